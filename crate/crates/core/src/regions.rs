//! Rate regions as three half-space constraints in the (R₁, R₂) plane.

use crate::error::{Error, Result};
use crate::gf::Field;
use crate::prob::JointPmf;

/// Slack below which a constraint still counts as satisfied.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-12;
const ORDER_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    /// Lower bounds: R₁ ≥ H(X₁|X₂), R₂ ≥ H(X₂|X₁), R₁+R₂ ≥ H(X₁X₂).
    SlepianWolf,
    /// Upper bounds: R₁ ≤ H(K₁), R₂ ≤ H(K₂), R₁+R₂ ≤ H(K₁K₂).
    Key,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r2 >= 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate point ({r1}, {r2})")));
        }
        Ok(RatePoint { r1, r2 })
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRegion {
    kind: RegionKind,
    thresholds: [f64; 3],
}

/// Signed slack of each constraint; nonnegative means satisfied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub slacks: [f64; 3],
    pub inside: bool,
}

impl RateRegion {
    /// Thresholds are (t₁, t₂, t₁₂) in bits per symbol.
    pub fn new(kind: RegionKind, thresholds: [f64; 3]) -> Result<Self> {
        let [a, b, ab] = thresholds;
        if thresholds
            .iter()
            .any(|t| !t.is_finite() || *t < -ORDER_TOLERANCE)
        {
            return Err(Error::InvalidParameter(format!(
                "thresholds {thresholds:?}"
            )));
        }
        let ordered = match kind {
            RegionKind::SlepianWolf => a <= ab + ORDER_TOLERANCE && b <= ab + ORDER_TOLERANCE,
            RegionKind::Key => a.max(b) <= ab + ORDER_TOLERANCE && ab <= a + b + ORDER_TOLERANCE,
        };
        if !ordered {
            return Err(Error::InvalidParameter(format!(
                "thresholds {thresholds:?} violate entropy ordering for {kind:?}"
            )));
        }
        Ok(RateRegion { kind, thresholds })
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn thresholds(&self) -> [f64; 3] {
        self.thresholds
    }

    pub fn contains(&self, pt: RatePoint) -> Membership {
        let values = [pt.r1, pt.r2, pt.sum()];
        let mut slacks = [0.0; 3];
        for (s, (v, t)) in slacks.iter_mut().zip(values.iter().zip(self.thresholds)) {
            *s = match self.kind {
                RegionKind::SlepianWolf => v - t,
                RegionKind::Key => t - v,
            };
        }
        Membership {
            slacks,
            inside: slacks.iter().all(|&s| s >= -MEMBERSHIP_TOLERANCE),
        }
    }
}

pub fn sw_region(p: &JointPmf) -> RateRegion {
    let h = p.entropy_set();
    RateRegion::new(RegionKind::SlepianWolf, [h.h1g2, h.h2g1, h.h12])
        .expect("entropies of a pmf are ordered")
}

pub fn key_region(p: &JointPmf) -> RateRegion {
    let h = p.entropy_set();
    RateRegion::new(RegionKind::Key, [h.h1, h.h2, h.h12]).expect("entropies of a pmf are ordered")
}

/// A point of `sw ∩ key`, or `None` if the intersection is empty.
///
/// Takes the smallest admissible sum S = max(a₁₂, a₁ + a₂) and the midpoint
/// of the feasible R₁ interval on the line R₁ + R₂ = S.
pub fn intersection_witness(sw: &RateRegion, key: &RateRegion) -> Option<RatePoint> {
    let (lo, hi) = match (sw.kind, key.kind) {
        (RegionKind::SlepianWolf, RegionKind::Key) => (sw.thresholds, key.thresholds),
        _ => return None,
    };
    let [a1, a2, a12] = lo.map(|t| t.max(0.0));
    let [b1, b2, b12] = hi;
    let sum = a12.max(a1 + a2);
    if sum > b12.min(b1 + b2) + MEMBERSHIP_TOLERANCE {
        return None;
    }
    let left = a1.max(sum - b2);
    let right = b1.min(sum - a2);
    if left > right + MEMBERSHIP_TOLERANCE {
        return None;
    }
    let r1 = ((left + right) / 2.0).max(0.0);
    let r2 = (sum - r1).max(0.0);
    Some(RatePoint { r1, r2 })
}

/// Rᵢ = (mᵢ / n) log₂ qᵢ.
pub fn rates_from_params(n: usize, m1: usize, m2: usize, q1: u32, q2: u32) -> Result<RatePoint> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let (f1, f2) = (Field::new(q1)?, Field::new(q2)?);
    let n = n as f64;
    RatePoint::new(
        m1 as f64 / n * f1.log2_order(),
        m2 as f64 / n * f2.log2_order(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bit() -> Field {
        Field::new(2).unwrap()
    }

    fn close3(a: [f64; 3], b: [f64; 3]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn pt(r1: f64, r2: f64) -> RatePoint {
        RatePoint::new(r1, r2).unwrap()
    }

    #[test]
    fn sw_examples() {
        let f = bit();
        assert!(close3(
            sw_region(&JointPmf::uniform(f, f)).thresholds(),
            [1.0, 1.0, 2.0]
        ));
        assert!(close3(
            sw_region(&JointPmf::equal_uniform(f)).thresholds(),
            [0.0, 0.0, 1.0]
        ));
        let h = 0.499915958164528;
        assert!(close3(
            sw_region(&JointPmf::dsbs(0.11).unwrap()).thresholds(),
            [h, h, 1.499915958164528]
        ));
    }

    #[test]
    fn key_examples() {
        let f = bit();
        assert!(close3(
            key_region(&JointPmf::uniform(f, f)).thresholds(),
            [1.0, 1.0, 2.0]
        ));
        assert!(close3(
            key_region(&JointPmf::equal_uniform(f)).thresholds(),
            [1.0, 1.0, 1.0]
        ));
        let p = JointPmf::from_rows(f, f, &[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert!(close3(
            key_region(&p).thresholds(),
            [1.0, 1.0, 1.721928094887362]
        ));
    }

    #[test]
    fn membership_examples() {
        let f = bit();
        let eq = JointPmf::equal_uniform(f);
        assert!(sw_region(&eq).contains(pt(0.5, 0.5)).inside);
        assert!(key_region(&eq).contains(pt(0.5, 0.5)).inside);
        let m = key_region(&eq).contains(pt(0.6, 0.6));
        assert!(!m.inside);
        assert!((m.slacks[2] + 0.2).abs() < 1e-12);
        assert!(
            !sw_region(&JointPmf::uniform(f, f))
                .contains(pt(0.5, 1.0))
                .inside
        );
    }

    #[test]
    fn invalid_thresholds() {
        assert!(RateRegion::new(RegionKind::SlepianWolf, [1.5, 0.0, 1.0]).is_err());
        assert!(RateRegion::new(RegionKind::Key, [1.0, 1.0, 2.5]).is_err());
        assert!(RateRegion::new(RegionKind::Key, [1.0, f64::NAN, 1.0]).is_err());
        assert!(RatePoint::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn witness_examples() {
        let f = bit();
        let eq = JointPmf::equal_uniform(f);
        let w = intersection_witness(&sw_region(&eq), &key_region(&eq)).unwrap();
        assert!((w.r1 - 0.5).abs() < 1e-12 && (w.r2 - 0.5).abs() < 1e-12);

        let uni = JointPmf::uniform(f, f);
        assert_eq!(
            intersection_witness(&sw_region(&uni), &key_region(&eq)),
            None
        );

        let sw = sw_region(&JointPmf::dsbs(0.11).unwrap());
        let key = key_region(&uni);
        let w = intersection_witness(&sw, &key).unwrap();
        assert!(sw.contains(w).inside && key.contains(w).inside);
        assert_eq!(intersection_witness(&key, &sw), None);
    }

    #[test]
    fn rates_examples() {
        assert_eq!(rates_from_params(4, 2, 2, 2, 2).unwrap(), pt(0.5, 0.5));
        let r = rates_from_params(2, 1, 1, 3, 3).unwrap();
        assert!((r.r1 - 3f64.log2() / 2.0).abs() < 1e-15);
        assert!(rates_from_params(2, 1, 1, 4, 2).is_err());
        assert!(rates_from_params(0, 1, 1, 2, 2).is_err());
    }

    fn pmf_strategy() -> impl Strategy<Value = JointPmf> {
        prop::collection::vec(0.01f64..1.0, 4).prop_map(|w| {
            let t: f64 = w.iter().sum();
            JointPmf::new(bit(), bit(), w.iter().map(|x| x / t).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn witness_lies_in_both_regions(src in pmf_strategy(), keys in pmf_strategy()) {
            let (sw, key) = (sw_region(&src), key_region(&keys));
            match intersection_witness(&sw, &key) {
                Some(w) => {
                    prop_assert!(sw.contains(w).inside);
                    prop_assert!(key.contains(w).inside);
                }
                None => {
                    let [a1, a2, a12] = sw.thresholds();
                    let [b1, b2, b12] = key.thresholds();
                    prop_assert!(a12.max(a1 + a2) > b12.min(b1 + b2) || a1 > b1 || a2 > b2);
                }
            }
        }

        #[test]
        fn sw_membership_is_upward_closed(
            src in pmf_strategy(), r1 in 0.0f64..2.0, r2 in 0.0f64..2.0, d in 0.0f64..1.0
        ) {
            let sw = sw_region(&src);
            if sw.contains(pt(r1, r2)).inside {
                prop_assert!(sw.contains(pt(r1 + d, r2)).inside);
                prop_assert!(sw.contains(pt(r1, r2 + d)).inside);
            }
        }

        #[test]
        fn key_membership_is_downward_closed(
            keys in pmf_strategy(), r1 in 0.0f64..2.0, r2 in 0.0f64..2.0, d in 0.0f64..1.0
        ) {
            let key = key_region(&keys);
            if key.contains(pt(r1, r2)).inside {
                prop_assert!(key.contains(pt((r1 - d).max(0.0), r2)).inside);
                prop_assert!(key.contains(pt(r1, (r2 - d).max(0.0))).inside);
            }
        }
    }
}
