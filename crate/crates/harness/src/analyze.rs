//! Rate-region report for a configuration.

use std::fmt::Write;

use dsc_core::regions::{intersection_witness, rates_from_params, RatePoint, RateRegion};

use crate::config::Experiment;
use crate::sweep::regions;
use crate::HarnessError;

#[derive(Clone, Debug)]
pub struct RegionReport {
    pub sw: RateRegion,
    pub key: RateRegion,
    pub witness: Option<RatePoint>,
    /// (n, m₁, m₂, rates, in sw, in key) per configured setting.
    pub points: Vec<(usize, usize, usize, RatePoint, bool, bool)>,
}

pub fn analyze(exp: &Experiment) -> Result<RegionReport, HarnessError> {
    let (sw, key) = regions(exp);
    let points = exp
        .settings
        .iter()
        .map(|&(n, m1, m2)| {
            let pt = rates_from_params(n, m1, m2, exp.config.q1, exp.config.q2)?;
            Ok((
                n,
                m1,
                m2,
                pt,
                sw.contains(pt).inside,
                key.contains(pt).inside,
            ))
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(RegionReport {
        witness: intersection_witness(&sw, &key),
        sw,
        key,
        points,
    })
}

fn triple(t: [f64; 3]) -> String {
    format!("({:.6}, {:.6}, {:.6})", t[0], t[1], t[2])
}

impl RegionReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "source region  R1 >= H(X1|X2), R2 >= H(X2|X1), R1+R2 >= H(X1X2)"
        );
        let _ = writeln!(s, "  thresholds {}", triple(self.sw.thresholds()));
        let _ = writeln!(
            s,
            "key region     R1 <= H(K1), R2 <= H(K2), R1+R2 <= H(K1K2)"
        );
        let _ = writeln!(s, "  thresholds {}", triple(self.key.thresholds()));
        match self.witness {
            Some(w) => {
                let _ = writeln!(
                    s,
                    "intersection nonempty, witness ({:.6}, {:.6})",
                    w.r1, w.r2
                );
            }
            None => {
                let _ = writeln!(s, "intersection empty");
            }
        }
        let _ = writeln!(s, "     n   m1   m2         R1         R2  in_sw  in_key");
        for (n, m1, m2, pt, a, b) in &self.points {
            let _ = writeln!(
                s,
                "{n:>6} {m1:>4} {m2:>4} {:>10.6} {:>10.6}  {a:>5}  {b:>6}",
                pt.r1, pt.r2
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn report(src: &str, keys: &str) -> RegionReport {
        let text = format!(
            r#"{{"source_pmf": {src}, "key_pmf": {keys}, "q1": 2, "q2": 2, "n": [2], "m": [[1, 1]]}}"#
        );
        analyze(&ExperimentConfig::parse(&text).unwrap().validate().unwrap()).unwrap()
    }

    const EQUAL: &str = "[[0.5, 0.0], [0.0, 0.5]]";
    const UNIFORM: &str = "[[0.25, 0.25], [0.25, 0.25]]";

    #[test]
    fn equal_bits() {
        let r = report(EQUAL, EQUAL);
        assert_eq!(r.sw.thresholds(), [0.0, 0.0, 1.0]);
        assert_eq!(r.key.thresholds(), [1.0, 1.0, 1.0]);
        let w = r.witness.unwrap();
        assert!((w.r1 - 0.5).abs() < 1e-12 && (w.r2 - 0.5).abs() < 1e-12);
        assert!(r.points[0].4);
        let text = r.render();
        assert!(text.contains("witness (0.500000, 0.500000)"));
    }

    #[test]
    fn conflicting_sums() {
        let r = report(UNIFORM, EQUAL);
        assert!(r.witness.is_none());
        assert!(r.render().contains("intersection empty"));
    }

    #[test]
    fn dsbs_thresholds() {
        let r = report("[[0.445, 0.055], [0.055, 0.445]]", UNIFORM);
        let h = 0.499915958164528;
        let t = r.sw.thresholds();
        assert!(
            (t[0] - h).abs() < 1e-12 && (t[1] - h).abs() < 1e-12 && (t[2] - 1.0 - h).abs() < 1e-12
        );
    }
}
