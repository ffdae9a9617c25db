use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::anneal_bench::AnnealBenchResult;
use super::shor_sweep::ShorSweepResult;
use crate::error::{Error, Result};

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                what: "csv",
                line: i + 2,
                msg: e.to_string(),
            })
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Two whitespace-separated columns, sorted by `x`.
pub fn to_dat(points: &[(f64, f64)]) -> String {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.iter().map(|(x, y)| format!("{x} {y}\n")).collect()
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_all(dir: &Path, files: Vec<(String, String)>) -> Result<Vec<PathBuf>> {
    files
        .into_iter()
        .map(|(name, body)| {
            let p = dir.join(name);
            write_file(&p, &body)?;
            Ok(p)
        })
        .collect()
}

/// Writes the sweep table, per-problem table, JSON summary and one `.dat`
/// curve per success category.
pub fn write_shor_outputs(dir: &Path, r: &ShorSweepResult) -> Result<Vec<PathBuf>> {
    let curve = |f: fn(&super::ShorSweepRow) -> f64| {
        to_dat(&r.rows.iter().map(|w| (w.delta, f(w))).collect::<Vec<_>>())
    };
    write_all(
        dir,
        vec![
            ("shor_sweep.csv".into(), to_csv(&r.rows)?),
            ("shor_problems.csv".into(), to_csv(&r.problems)?),
            ("shor_summary.json".into(), to_json(r)?),
            ("shor_success.dat".into(), curve(|w| w.shor_mean)),
            ("shor_lucky.dat".into(), curve(|w| w.shor_lucky_mean)),
            ("shor_extended.dat".into(), curve(|w| w.extended_mean)),
            ("shor_peak.dat".into(), curve(|w| w.peak_mean)),
        ],
    )
}

pub fn write_anneal_outputs(dir: &Path, r: &AnnealBenchResult) -> Result<Vec<PathBuf>> {
    let tag = r.spec.method.to_string();
    let median: Vec<(f64, f64)> = r
        .levels
        .iter()
        .map(|s| (s.l as f64, s.success_median))
        .collect();
    let base: Vec<(f64, f64)> = r.levels.iter().map(|s| (s.l as f64, s.baseline)).collect();
    let mut files = vec![
        (format!("anneal_{tag}_problems.csv"), to_csv(&r.rows)?),
        (format!("anneal_{tag}_levels.csv"), to_csv(&r.levels)?),
        (format!("anneal_{tag}_summary.json"), to_json(r)?),
        (format!("anneal_{tag}_success.dat"), to_dat(&median)),
        (format!("anneal_{tag}_baseline.dat"), to_dat(&base)),
    ];
    if let Some(fit) = &r.fit {
        let line: Vec<(f64, f64)> = r
            .levels
            .iter()
            .map(|s| (s.l as f64, fit.predict(s.l as f64)))
            .collect();
        files.push((format!("anneal_{tag}_fit.dat"), to_dat(&line)));
    }
    write_all(dir, files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_anneal_benchmark, AnnealBenchSpec, AnnealRow, SamplerSpec};

    #[test]
    fn dat_sorted() {
        assert_eq!(to_dat(&[(2.0, 0.5), (1.0, 0.25)]), "1 0.25\n2 0.5\n");
    }

    #[test]
    fn csv_roundtrip_and_stable() {
        let spec = AnnealBenchSpec {
            l_values: vec![2, 3],
            semiprimes_per_l: 3,
            reads_per_problem: 20,
            sampler: SamplerSpec::Exhaustive,
            ..Default::default()
        };
        let r = run_anneal_benchmark(&spec).unwrap();
        let text = to_csv(&r.rows).unwrap();
        let back: Vec<AnnealRow> = from_csv(&text).unwrap();
        assert_eq!(back, r.rows);
        assert_eq!(
            text,
            to_csv(&run_anneal_benchmark(&spec).unwrap().rows).unwrap()
        );
        let dir = tempfile::tempdir().unwrap();
        let files = write_anneal_outputs(dir.path(), &r).unwrap();
        assert_eq!(files.len(), 6);
        assert_eq!(r.fit.as_ref().unwrap().exponent, 0.0);
        assert!(from_csv::<AnnealRow>("l,bogus\n1,2\n").is_err());
    }

    #[test]
    fn unwritable_path_reported() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("f");
        fs::write(&blocker, "").unwrap();
        let e = write_file(&blocker.join("x.csv"), "").unwrap_err();
        assert!(e.to_string().contains("f"), "{e}");
    }
}
