//! Per-system invariant checks.

use std::fmt;

use dsc_core::error::Error;
use dsc_core::metrics::{
    self, build_report_with, check_distribution, delta_affine, key_preimage_partition_verify_all,
    lemma1_verify, MetricPath, PathChoice, EXACT_PLAINTEXT_CAP,
};
use dsc_core::Thresholds;
use rayon::prelude::*;

use crate::suite::SystemInstance;
use crate::HarnessError;

pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Cardinality,
    Injective,
    UnitSums,
    CheckUniform,
    KeyPartition,
    Decomposition,
    KeyEntropyBound,
    AffineCrossCheck,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Cardinality,
        Check::Injective,
        Check::UnitSums,
        Check::CheckUniform,
        Check::KeyPartition,
        Check::Decomposition,
        Check::KeyEntropyBound,
        Check::AffineCrossCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Cardinality => "decoding-set cardinality",
            Check::Injective => "decoder injectivity",
            Check::UnitSums => "decoding-set sums equal one",
            Check::CheckUniform => "check distribution uniform",
            Check::KeyPartition => "key-preimage partition",
            Check::Decomposition => "delta decomposition",
            Check::KeyEntropyBound => "key-entropy lower bound",
            Check::AffineCrossCheck => "delta exact vs affine",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub check: Check,
    pub passed: bool,
    /// Size of the violation, or of the largest deviation when passing.
    pub worst: f64,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SystemVerdict {
    pub label: String,
    pub results: Vec<CheckResult>,
}

impl SystemVerdict {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, check: Check) -> &CheckResult {
        self.results
            .iter()
            .find(|r| r.check == check)
            .expect("all checks run")
    }
}

impl fmt::Display for SystemVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            let status = if r.passed { "ok  " } else { "FAIL" };
            writeln!(
                f,
                "  {status} {:<28} worst {:.3e}  {}",
                r.check.name(),
                r.worst,
                r.detail
            )?;
        }
        Ok(())
    }
}

fn result(check: Check, passed: bool, worst: f64, detail: String) -> CheckResult {
    CheckResult {
        check,
        passed,
        worst,
        detail,
    }
}

/// Runs every check on one system with exact enumeration.
pub fn verify_system(inst: &SystemInstance) -> Result<SystemVerdict, HarnessError> {
    let dims = inst.sys.dims();
    if dims.word_pairs() > EXACT_PLAINTEXT_CAP {
        return Err(Error::ResourceCap {
            what: "plaintext pair space for exact verification",
            size: dims.word_pairs(),
            cap: EXACT_PLAINTEXT_CAP,
        }
        .into());
    }
    let set = inst.sys.decoding_set();
    let table = inst.sys.table();
    let mut results = Vec::with_capacity(Check::ALL.len());

    let expected = dims.cipher_pairs() as usize;
    results.push(result(
        Check::Cardinality,
        set.len() == expected,
        (set.len() as f64 - expected as f64).abs(),
        format!("|D| = {}, expected {expected}", set.len()),
    ));
    let distinct = set.len();
    results.push(result(
        Check::Injective,
        table.is_injective(),
        (table.len() - distinct) as f64,
        format!("{} table entries, {distinct} distinct", table.len()),
    ));

    let l1 = lemma1_verify(&inst.sys, &inst.keys, &set)?;
    results.push(result(
        Check::UnitSums,
        l1.max_deviation < TOLERANCE,
        l1.max_deviation,
        format!(
            "deficit {:.6} at ciphertext {:?}",
            l1.max_deviation, l1.worst_cipher
        ),
    ));

    let check = check_distribution(&inst.sys, &inst.keys, &set)?;
    results.push(result(
        Check::CheckUniform,
        check.max_deviation < TOLERANCE,
        check.max_deviation,
        String::new(),
    ));

    let part = key_preimage_partition_verify_all(&inst.sys, &set)?;
    results.push(result(
        Check::KeyPartition,
        part.holds(),
        if part.holds() { 0.0 } else { 1.0 },
        format!("disjoint {}, covering {}", part.disjoint, part.covering),
    ));

    let thresholds = Thresholds {
        epsilon: 0.0,
        delta: 0.0,
    };
    let r = build_report_with(
        &inst.sys,
        &inst.src,
        &inst.keys,
        thresholds,
        PathChoice::Force(MetricPath::Enumeration),
    )?;
    let gap = (r.delta - (r.delta_mi + r.div_cipher_uniform)).abs();
    let mi_excess = (r.delta_mi - r.delta).max(0.0);
    results.push(result(
        Check::Decomposition,
        gap < TOLERANCE && mi_excess < TOLERANCE,
        gap.max(mi_excess),
        format!(
            "delta {:.9} = mi {:.9} + div {:.9}",
            r.delta, r.delta_mi, r.div_cipher_uniform
        ),
    ));

    let marginal = r.delta_marginals[0].max(r.delta_marginals[1]);
    let shortfall = (r.key_bound.raw - r.delta).max(marginal - r.delta).max(0.0);
    results.push(result(
        Check::KeyEntropyBound,
        shortfall < TOLERANCE,
        shortfall,
        format!(
            "delta {:.9}, bound {:.9}, max delta_i {:.9}",
            r.delta, r.key_bound.raw, marginal
        ),
    ));

    let affine = delta_affine(inst.sys.encoders(), &inst.keys)?;
    let diff = (affine - r.delta).abs();
    results.push(result(
        Check::AffineCrossCheck,
        diff < TOLERANCE,
        diff,
        format!("enumerated {:.12}, affine {:.12}", r.delta, affine),
    ));

    Ok(SystemVerdict {
        label: inst.label.clone(),
        results,
    })
}

/// Verifies every system; verdicts come back in input order.
pub fn verify_all(systems: &[SystemInstance]) -> Result<Vec<SystemVerdict>, HarnessError> {
    systems.par_iter().map(verify_system).collect()
}

/// Largest check-distribution deviation when `inst` is evaluated under a
/// point-mass key at the zero key pair. With a non-injective table the
/// check distribution then charges some ciphertext twice, so the deviation
/// is at least 1/|C|.
pub fn point_key_check_deviation(inst: &SystemInstance) -> Result<f64, HarnessError> {
    let base =
        dsc_core::JointPmf::point(inst.keys.base().field1(), inst.keys.base().field2(), 0, 0)?;
    let keys = dsc_core::BlockDistribution::new(base, inst.keys.n())?;
    Ok(metrics::check_distribution(&inst.sys, &keys, &inst.sys.decoding_set())?.max_deviation)
}
