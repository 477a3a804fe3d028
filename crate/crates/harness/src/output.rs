//! Sweep rows, CSV serialization and the post-write validator.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use dsc_core::regions::{RatePoint, RateRegion};
use serde::Deserialize;

use crate::HarnessError;

pub const HEADER: [&str; 21] = [
    "n",
    "m1",
    "m2",
    "q1",
    "q2",
    "seed",
    "trial",
    "R1",
    "R2",
    "p_e",
    "delta",
    "delta_mi",
    "div_cipher_uniform",
    "delta_1",
    "delta_2",
    "lemma2_bound",
    "in_sw",
    "in_key",
    "admissible_eps_delta",
    "runtime_ms",
    "mode",
];

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub q1: u32,
    pub q2: u32,
    pub seed: u64,
    pub trial: usize,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub p_e: f64,
    pub delta: f64,
    pub delta_mi: f64,
    pub div_cipher_uniform: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub lemma2_bound: f64,
    pub in_sw: bool,
    pub in_key: bool,
    pub admissible_eps_delta: bool,
    pub runtime_ms: f64,
    /// `exact`, `montecarlo`, or `exact-sampled` when Δ averaging had to
    /// fall back to sampling.
    pub mode: String,
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.m1.to_string(),
            self.m2.to_string(),
            self.q1.to_string(),
            self.q2.to_string(),
            self.seed.to_string(),
            self.trial.to_string(),
            fmt_g12(self.r1),
            fmt_g12(self.r2),
            fmt_g12(self.p_e),
            fmt_g12(self.delta),
            fmt_g12(self.delta_mi),
            fmt_g12(self.div_cipher_uniform),
            fmt_g12(self.delta_1),
            fmt_g12(self.delta_2),
            fmt_g12(self.lemma2_bound),
            self.in_sw.to_string(),
            self.in_key.to_string(),
            self.admissible_eps_delta.to_string(),
            fmt_g12(self.runtime_ms),
            self.mode.clone(),
        ]
    }
}

fn io(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Output(e.to_string())
}

/// Serializes rows to CSV bytes, header first.
pub fn to_csv(rows: &[ResultRow]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.record()).map_err(io)?;
    }
    w.into_inner().map_err(io)
}

/// Writes next to `path` and renames into place, so readers never see a
/// partial file.
pub fn write_csv_atomic(path: &Path, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let bytes = to_csv(rows)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(&bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(io)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(File::open(path).map_err(io)?);
    let header: Vec<String> = r
        .headers()
        .map_err(io)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != HEADER {
        return Err(HarnessError::Output(format!(
            "unexpected header {header:?}"
        )));
    }
    r.deserialize().map(|row| row.map_err(io)).collect()
}

/// Invariants every row must satisfy; 12 printed digits bound the
/// round-trip error well below the tolerance.
pub fn row_violations(row: &ResultRow, sw: &RateRegion, key: &RateRegion, tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    let label = format!("n={} trial={}", row.n, row.trial);
    let gap = row.delta - (row.delta_mi + row.div_cipher_uniform);
    if gap.abs() > tol {
        out.push(format!("{label}: delta decomposition off by {gap:e}"));
    }
    if row.delta < row.lemma2_bound - tol {
        out.push(format!(
            "{label}: delta {} below key-entropy bound {}",
            row.delta, row.lemma2_bound
        ));
    }
    if row.delta < row.delta_1.max(row.delta_2) - tol {
        out.push(format!("{label}: delta below a per-terminal delta"));
    }
    if !(0.0..=1.0).contains(&row.p_e) {
        out.push(format!("{label}: p_e {} out of range", row.p_e));
    }
    match dsc_core::regions::rates_from_params(row.n, row.m1, row.m2, row.q1, row.q2) {
        Ok(pt) => {
            if (pt.r1 - row.r1).abs() > tol || (pt.r2 - row.r2).abs() > tol {
                out.push(format!(
                    "{label}: rates ({}, {}) disagree with (n, m, q)",
                    row.r1, row.r2
                ));
            }
            let pt = RatePoint {
                r1: row.r1,
                r2: row.r2,
            };
            if sw.contains(pt).inside != row.in_sw {
                out.push(format!("{label}: in_sw flag mismatch"));
            }
            if key.contains(pt).inside != row.in_key {
                out.push(format!("{label}: in_key flag mismatch"));
            }
        }
        Err(e) => out.push(format!("{label}: {e}")),
    }
    out
}

/// Re-reads a written CSV and checks every row.
pub fn validate_csv(path: &Path, sw: &RateRegion, key: &RateRegion) -> Result<usize, HarnessError> {
    let rows = read_csv(path)?;
    let problems: Vec<String> = rows
        .iter()
        .flat_map(|r| row_violations(r, sw, key, 1e-9))
        .collect();
    if problems.is_empty() {
        Ok(rows.len())
    } else {
        Err(HarnessError::Output(format!(
            "written CSV fails validation: {}",
            problems.join("; ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_formatting() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (2.0f64.log2() / 3.0, "0.333333333333"),
            (3f64.log2(), "1.58496250072"),
            (1.0 / 3.0 * 1e-7, "3.33333333333e-08"),
            (123456789012345.0, "1.23456789012e+14"),
            (-0.25, "-0.25"),
            (1e-5, "1e-05"),
            (99999999999.9999, "100000000000"),
            (f64::NAN, "NaN"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g12(x), s, "{x}");
        }
    }

    fn row() -> ResultRow {
        ResultRow {
            n: 4,
            m1: 2,
            m2: 2,
            q1: 2,
            q2: 2,
            seed: 7,
            trial: 0,
            r1: 0.5,
            r2: 0.5,
            p_e: 0.25,
            delta: 0.75,
            delta_mi: 0.5,
            div_cipher_uniform: 0.25,
            delta_1: 0.1,
            delta_2: 0.2,
            lemma2_bound: 0.0,
            in_sw: true,
            in_key: true,
            admissible_eps_delta: false,
            runtime_ms: 0.0,
            mode: "exact".into(),
        }
    }

    #[test]
    fn roundtrip_and_validation() {
        use dsc_core::{Field, JointPmf};
        let f = Field::new(2).unwrap();
        let p = JointPmf::equal_uniform(f);
        let (sw, key) = (
            dsc_core::regions::sw_region(&p),
            dsc_core::regions::key_region(&p),
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_csv_atomic(&path, &[row()]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,m1,m2,q1,q2,seed,trial,R1,R2,p_e,delta,"));
        assert_eq!(read_csv(&path).unwrap(), vec![row()]);
        assert_eq!(validate_csv(&path, &sw, &key).unwrap(), 1);

        let mut bad = row();
        bad.delta = 1.0;
        bad.in_key = false;
        let v = row_violations(&bad, &sw, &key, 1e-9);
        assert_eq!(v.len(), 2, "{v:?}");
    }
}
