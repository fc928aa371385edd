//! Plot-ready sample files: CSV (one row per path) or JSON (array of arrays plus metadata).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use cei_core::GridPath;
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub n: usize,
    pub master_seed: u64,
    pub source: String,
}

#[derive(Serialize, Deserialize)]
struct JsonSamples {
    metadata: SampleMetadata,
    paths: Vec<Vec<f64>>,
}

pub fn emit_samples(
    paths: &[GridPath],
    meta: &SampleMetadata,
    format: Format,
    dest: &Path,
) -> Result<(), HarnessError> {
    if paths.is_empty() {
        return Err(HarnessError::InvalidConfig("no paths to emit".into()));
    }
    if let Some(p) = paths.iter().find(|p| p.n() != meta.n) {
        return Err(HarnessError::InvalidConfig(format!(
            "path of length {} in an n = {} file",
            p.n(),
            meta.n
        )));
    }
    let mut out = BufWriter::new(File::create(dest)?);
    match format {
        Format::Csv => {
            writeln!(
                out,
                "# n={} master_seed={} source={}",
                meta.n, meta.master_seed, meta.source
            )?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record((0..=meta.n).map(|k| format!("t_{k}")))?;
            for p in paths {
                w.write_record(p.values().iter().map(|v| v.to_string()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = JsonSamples {
                metadata: meta.clone(),
                paths: paths.iter().map(|p| p.values().to_vec()).collect(),
            };
            serde_json::to_writer(&mut out, &doc)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Reads a file written by [`emit_samples`]; the format is taken from the extension.
pub fn read_samples(src: &Path) -> Result<(SampleMetadata, Vec<GridPath>), HarnessError> {
    match src.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let doc: JsonSamples = serde_json::from_reader(BufReader::new(File::open(src)?))?;
            let paths = doc.paths.into_iter().map(GridPath::new).collect::<Result<_, _>>()?;
            Ok((doc.metadata, paths))
        }
        _ => read_csv(src),
    }
}

fn read_csv(src: &Path) -> Result<(SampleMetadata, Vec<GridPath>), HarnessError> {
    let mut reader = BufReader::new(File::open(src)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let meta = parse_comment(&first)?;
    let mut r = csv::Reader::from_reader(reader);
    let mut paths = Vec::new();
    for rec in r.records() {
        let values = rec?
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| HarnessError::InvalidConfig(format!("bad value {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        paths.push(GridPath::new(values)?);
    }
    Ok((meta, paths))
}

fn parse_comment(line: &str) -> Result<SampleMetadata, HarnessError> {
    let bad = || HarnessError::InvalidConfig(format!("bad sample header {line:?}"));
    let body = line.trim().strip_prefix('#').ok_or_else(bad)?;
    let (mut n, mut seed, mut source) = (None, None, String::new());
    for kv in body.split_whitespace() {
        match kv.split_once('=') {
            Some(("n", v)) => n = v.parse().ok(),
            Some(("master_seed", v)) => seed = v.parse().ok(),
            Some(("source", v)) => source = v.to_string(),
            _ => {}
        }
    }
    Ok(SampleMetadata {
        n: n.ok_or_else(bad)?,
        master_seed: seed.ok_or_else(bad)?,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_paths() -> Vec<GridPath> {
        vec![
            GridPath::new(vec![0.0, 0.1, -0.25, 1.0 / 3.0, 0.0]).unwrap(),
            GridPath::new(vec![0.0, -1e-300, 2.5e10, -0.7, 0.0]).unwrap(),
        ]
    }

    fn meta() -> SampleMetadata {
        SampleMetadata {
            n: 4,
            master_seed: 7,
            source: "bridge".into(),
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("s.csv");
        emit_samples(&two_paths(), &meta(), Format::Csv, &f).unwrap();
        let text = std::fs::read_to_string(&f).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "# n=4 master_seed=7 source=bridge");
        assert_eq!(lines[1], "t_0,t_1,t_2,t_3,t_4");
        assert_eq!(lines[2].split(',').count(), 5);
        assert_eq!(read_samples(&f).unwrap(), (meta(), two_paths()));
    }

    #[test]
    fn json_round_trip_carries_seed() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("s.json");
        emit_samples(&two_paths(), &meta(), Format::Json, &f).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(v["metadata"]["master_seed"], 7);
        assert_eq!(read_samples(&f).unwrap(), (meta(), two_paths()));
    }

    #[test]
    fn empty_or_ragged_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("s.csv");
        assert!(emit_samples(&[], &meta(), Format::Csv, &f).is_err());
        let short = vec![GridPath::new(vec![0.0, 1.0, 0.5]).unwrap()];
        assert!(emit_samples(&short, &meta(), Format::Csv, &f).is_err());
    }
}
