//! Curve export: one CSV per curve plus a JSON bundle, written atomically
//! (temp file + rename). CSV numbers carry 17 significant digits so a
//! round-trip through text is bit-exact.

use anyhow::Context;
use d2dgeo_core::curve::CurveSeries;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Bundle {
    pub meta: serde_json::Value,
    pub curves: Vec<CurveSeries>,
}

fn atomic_write(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(dir: &Path, curve: &CurveSeries) -> anyhow::Result<PathBuf> {
    let path = dir.join(format!("{}.csv", curve.label));
    let mut out = String::from("x,y,stderr\n");
    for p in &curve.points {
        out.push_str(&fmt17(p.x));
        out.push(',');
        out.push_str(&fmt17(p.y));
        out.push(',');
        if let Some(se) = p.stderr {
            out.push_str(&fmt17(se));
        }
        out.push('\n');
    }
    atomic_write(&path, out.as_bytes())?;
    Ok(path)
}

pub fn write_bundle(dir: &Path, bundle: &Bundle) -> anyhow::Result<PathBuf> {
    let path = dir.join("curves.json");
    let text = serde_json::to_string_pretty(bundle)?;
    atomic_write(&path, text.as_bytes())?;
    Ok(path)
}

/// Emit curves in the requested format(s) under `dir`.
pub fn emit(
    dir: &Path,
    format: Format,
    meta: serde_json::Value,
    curves: &[CurveSeries],
) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output dir {}", dir.display()))?;
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        for c in curves {
            written.push(write_csv(dir, c)?);
        }
    }
    if matches!(format, Format::Json | Format::Both) {
        let bundle = Bundle { meta, curves: curves.to_vec() };
        written.push(write_bundle(dir, &bundle)?);
    }
    Ok(written)
}
