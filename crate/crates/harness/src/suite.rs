//! Construction of the systems a command runs on.

use dsc_core::codec::AffineEncoderPair;
use dsc_core::{BlockDistribution, Cryptosystem, Field, JointPmf};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::config::{EncoderKind, Experiment, SuiteConfig};
use crate::HarnessError;

/// One system together with the distributions it is evaluated under.
pub struct SystemInstance {
    pub label: String,
    pub sys: Cryptosystem,
    pub src: BlockDistribution,
    pub keys: BlockDistribution,
}

/// Generator for item `index` of group `group`, independent of every other
/// (group, index) pair under the same master seed.
pub fn stream_rng(seed: u64, group: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((group << 32) | (index & 0xffff_ffff));
    rng
}

/// A pmf drawn uniformly from the probability simplex.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, f1: Field, f2: Field) -> JointPmf {
    let w: Vec<f64> = (0..f1.q() * f2.q()).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    JointPmf::new(f1, f2, w.iter().map(|x| x / total).collect()).expect("normalized weights")
}

/// Mass 1 − noise spread over the diagonal a = b (up to min(q₁, q₂)), the
/// rest uniform over the other cells.
pub fn correlated_pmf(f1: Field, f2: Field, noise: f64) -> JointPmf {
    let (q1, q2) = (f1.q() as usize, f2.q() as usize);
    let diag = q1.min(q2);
    let off = (q1 * q2 - diag) as f64;
    let table = (0..q1 * q2)
        .map(|i| {
            if i / q2 == i % q2 {
                (1.0 - noise) / diag as f64
            } else {
                noise / off
            }
        })
        .collect();
    JointPmf::new(f1, f2, table).expect("valid by construction")
}

fn corrupt(sys: Cryptosystem) -> Cryptosystem {
    let table = sys.table().corrupted((0, 1), (0, 0));
    Cryptosystem::with_table(sys.encoders().clone(), table)
}

/// Random systems as described by `suite`: moduli and blocklengths drawn
/// from the lists, mᵢ uniform in [1, n − 1], a random source pmf, and keys
/// cycling through uniform, random and correlated pmfs.
pub fn random_suite(
    suite: &SuiteConfig,
    seed: u64,
    offsets: bool,
    corrupted: bool,
) -> Result<Vec<SystemInstance>, HarnessError> {
    (0..suite.systems)
        .map(|i| {
            let mut rng = stream_rng(seed, 0, i as u64);
            let q1 = *suite.q.choose(&mut rng).expect("nonempty");
            let q2 = *suite.q.choose(&mut rng).expect("nonempty");
            let n = *suite.n.choose(&mut rng).expect("nonempty");
            let (f1, f2) = (Field::new(q1)?, Field::new(q2)?);
            let m1 = rng.random_range(1..n);
            let m2 = rng.random_range(1..n);
            let src = random_pmf(&mut rng, f1, f2);
            let keys = match i % 3 {
                0 => JointPmf::uniform(f1, f2),
                1 => random_pmf(&mut rng, f1, f2),
                _ => correlated_pmf(f1, f2, rng.random_range(0.0..0.3)),
            };
            let mut enc = AffineEncoderPair::random(&mut rng, n, m1, m2, f1, f2)?;
            if offsets || i % 2 == 1 {
                enc = enc.with_random_offsets(&mut rng)?;
            }
            let mut sys = Cryptosystem::new(enc)?;
            if corrupted {
                sys = corrupt(sys);
            }
            Ok(SystemInstance {
                label: format!("system {i} (seed {seed}, q=({q1},{q2}), n={n}, m=({m1},{m2}))"),
                sys,
                src: BlockDistribution::new(src, n)?,
                keys: BlockDistribution::new(keys, n)?,
            })
        })
        .collect()
}

/// The system for one (setting, trial) of an experiment, drawn from the
/// (n, trial) stream.
pub fn experiment_system(
    exp: &Experiment,
    setting: (usize, usize, usize),
    trial: usize,
    seed: u64,
) -> Result<(SystemInstance, ChaCha8Rng), HarnessError> {
    let (n, m1, m2) = setting;
    let [f1, f2] = exp.fields;
    let mut rng = stream_rng(seed, n as u64, trial as u64);
    let mut enc = match exp.config.encoder {
        EncoderKind::Random => AffineEncoderPair::random(&mut rng, n, m1, m2, f1, f2)?,
        EncoderKind::Identity => AffineEncoderPair::identity(f1, f2, n),
    };
    if exp.config.random_offsets {
        enc = enc.with_random_offsets(&mut rng)?;
    }
    let mut sys = Cryptosystem::new(enc)?;
    if exp.config.corrupt_decoder {
        sys = corrupt(sys);
    }
    Ok((
        SystemInstance {
            label: format!("n={n} m=({m1},{m2}) trial {trial} (seed {seed})"),
            sys,
            src: BlockDistribution::new(exp.source.clone(), n)?,
            keys: BlockDistribution::new(exp.keys.clone(), n)?,
        },
        rng,
    ))
}
