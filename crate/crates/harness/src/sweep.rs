//! Blocklength sweeps: one report row per (n, trial).

use std::time::Instant;

use dsc_core::metrics::{build_report, Thresholds};
use dsc_core::regions::{key_region, rates_from_params, sw_region, RateRegion};
use rayon::prelude::*;

use crate::config::{Experiment, Mode};
use crate::output::ResultRow;
use crate::suite::experiment_system;
use crate::HarnessError;

/// Regions of the configured source and key pmfs.
pub fn regions(exp: &Experiment) -> (RateRegion, RateRegion) {
    (sw_region(&exp.source), key_region(&exp.keys))
}

fn run_one(
    exp: &Experiment,
    setting: (usize, usize, usize),
    trial: usize,
    seed: u64,
    sw: &RateRegion,
    key: &RateRegion,
) -> Result<ResultRow, HarnessError> {
    let start = Instant::now();
    let (n, m1, m2) = setting;
    let (inst, mut rng) = experiment_system(exp, setting, trial, seed)?;
    let cfg = &exp.config;
    let thresholds = Thresholds {
        epsilon: cfg.epsilon,
        delta: cfg.delta,
    };
    let report = build_report(&inst.sys, &inst.src, &inst.keys, thresholds)?;
    let p_e = match cfg.mode {
        Mode::Exact => report.p_e,
        Mode::MonteCarlo => {
            let mut failures = 0usize;
            for _ in 0..cfg.mc_samples {
                if !inst
                    .sys
                    .roundtrip_trial(&inst.src, &inst.keys, &mut rng)?
                    .success
                {
                    failures += 1;
                }
            }
            failures as f64 / cfg.mc_samples as f64
        }
    };
    let mode = match (cfg.mode, report.exact) {
        (Mode::MonteCarlo, _) => "montecarlo",
        (Mode::Exact, true) => "exact",
        (Mode::Exact, false) => "exact-sampled",
    };
    let rates = rates_from_params(n, m1, m2, exp.config.q1, exp.config.q2)?;
    let runtime_ms = if cfg.record_runtime {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(ResultRow {
        n,
        m1,
        m2,
        q1: cfg.q1,
        q2: cfg.q2,
        seed,
        trial,
        r1: rates.r1,
        r2: rates.r2,
        p_e,
        delta: report.delta,
        delta_mi: report.delta_mi,
        div_cipher_uniform: report.div_cipher_uniform,
        delta_1: report.delta_marginals[0],
        delta_2: report.delta_marginals[1],
        lemma2_bound: report.key_bound.reported,
        in_sw: sw.contains(rates).inside,
        in_key: key.contains(rates).inside,
        admissible_eps_delta: report.delta <= cfg.epsilon && p_e <= cfg.delta,
        runtime_ms,
        mode: mode.into(),
    })
}

/// All rows in (n, trial) order. Each trial draws from its own generator,
/// so the rows do not depend on scheduling or on the number of trials.
pub fn run_sweep(exp: &Experiment, seed: u64) -> Result<Vec<ResultRow>, HarnessError> {
    let (sw, key) = regions(exp);
    let jobs: Vec<((usize, usize, usize), usize)> = exp
        .settings
        .iter()
        .flat_map(|&s| (0..exp.config.trials).map(move |t| (s, t)))
        .collect();
    jobs.par_iter()
        .map(|&(s, t)| run_one(exp, s, t, seed, &sw, &key))
        .collect()
}

/// Median of a nonempty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// Per blocklength: (n, median Δ, median p_e, rows).
pub fn medians_by_n(rows: &[ResultRow]) -> Vec<(usize, f64, f64, usize)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let group: Vec<&ResultRow> = rows.iter().filter(|r| r.n == n).collect();
            let d: Vec<f64> = group.iter().map(|r| r.delta).collect();
            let p: Vec<f64> = group.iter().map(|r| r.p_e).collect();
            (n, median(&d), median(&p), group.len())
        })
        .collect()
}

pub fn summary(rows: &[ResultRow]) -> String {
    let mut out = String::from("     n  trials    median delta    median p_e\n");
    for (n, d, p, k) in medians_by_n(rows) {
        out.push_str(&format!("{n:>6}  {k:>6}  {d:>14.9}  {p:>12.9}\n"));
    }
    let admissible = rows.iter().filter(|r| r.admissible_eps_delta).count();
    out.push_str(&format!(
        "{admissible} of {} rows (eps, delta)-admissible\n",
        rows.len()
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn experiment(extra: &str) -> Experiment {
        let text = format!(
            r#"{{
                "source_pmf": [[0.445, 0.055], [0.055, 0.445]],
                "key_pmf": [[0.25, 0.25], [0.25, 0.25]],
                "q1": 2, "q2": 2, "seed": 3 {extra}
            }}"#
        );
        ExperimentConfig::parse(&text).unwrap().validate().unwrap()
    }

    #[test]
    fn identity_rows_are_perfect() {
        let exp = experiment(r#", "n": [2, 3], "encoder": "identity", "trials": 2"#);
        let rows = run_sweep(&exp, 3).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.p_e, 0.0);
            assert!(r.delta.abs() < 1e-9);
            assert_eq!(r.mode, "exact");
        }
        assert_eq!(
            rows.iter().map(|r| (r.n, r.trial)).collect::<Vec<_>>(),
            vec![(2, 0), (2, 1), (3, 0), (3, 1)]
        );
    }

    #[test]
    fn adding_trials_keeps_existing_rows() {
        let a = run_sweep(&experiment(r#", "n": [4], "m": [[3, 3]], "trials": 2"#), 9).unwrap();
        let b = run_sweep(&experiment(r#", "n": [4], "m": [[3, 3]], "trials": 4"#), 9).unwrap();
        assert_eq!(a[..], b[..2]);
    }

    #[test]
    fn montecarlo_rows_are_close_to_exact() {
        let exact = run_sweep(&experiment(r#", "n": [6], "m": [[4, 4]], "trials": 2"#), 1).unwrap();
        let mc = run_sweep(
            &experiment(r#", "n": [6], "m": [[4, 4]], "trials": 2, "mode": "montecarlo", "mc_samples": 4000"#),
            1,
        )
        .unwrap();
        for (e, m) in exact.iter().zip(&mc) {
            assert_eq!(m.mode, "montecarlo");
            assert_eq!(e.delta, m.delta);
            let sigma = (e.p_e * (1.0 - e.p_e) / 4000.0).sqrt();
            assert!((e.p_e - m.p_e).abs() <= 4.0 * sigma + 1e-3);
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
