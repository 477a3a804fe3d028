//! Exact reliability and leakage metrics.
//!
//! The central quantity is the expected divergence
//!
//! ```text
//! Δ = Σₓ p(x) · D( p(c | x) ‖ p_Č )
//! ```
//!
//! between the ciphertext law given the plaintext pair and the check
//! distribution `p_Č`, the ciphertext law induced by a uniform plaintext on
//! the decoding set. The generic routines enumerate keys and plaintexts
//! through any [`Encryptor`]; [`delta_affine`] and the structured report
//! path instead push the key distribution through the affine encoders, which
//! is exact for the affine construction and much cheaper.
//!
//! All parallel loops reduce partial results in a fixed order, so repeated
//! runs give bit-identical floating point output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::{AffineEncoderPair, DecodingSet};
use crate::crypto::{Cryptosystem, Encryptor, SystemDims};
use crate::error::{ensure_cap, Error, Result};
use crate::prob::{entropy, kl_divergence, BlockDistribution, EntropySet};

/// Largest key-pair space q₁ⁿ·q₂ⁿ enumerated by the generic routines.
pub const KEY_SPACE_CAP: u128 = 1 << 20;
/// Plaintext-pair spaces up to this size are averaged exactly.
pub const EXACT_PLAINTEXT_CAP: u128 = 1 << 16;
/// Number of plaintexts outside D sampled when averaging is not exact.
pub const NON_DECODABLE_SAMPLES: usize = 256;
/// Largest key-pair space pushed through the affine encoders.
pub const AFFINE_KEY_CAP: u128 = 1 << 24;
/// Above this many (plaintext, key) pairs the report switches to the
/// affine-structure path.
pub const ENUMERATION_WORK_BUDGET: u128 = 1 << 27;

const CHUNK: usize = 64;

/// A distribution over ciphertext pairs, indexed `c1 * |C2| + c2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CipherDist {
    sizes: [usize; 2],
    probs: Vec<f64>,
}

impl CipherDist {
    fn zeros(dims: &SystemDims) -> Self {
        let sizes = [
            dims.cipher_space(0).size() as usize,
            dims.cipher_space(1).size() as usize,
        ];
        CipherDist {
            sizes,
            probs: vec![0.0; sizes[0] * sizes[1]],
        }
    }

    pub fn uniform(dims: &SystemDims) -> Self {
        let mut d = Self::zeros(dims);
        let p = 1.0 / d.probs.len() as f64;
        d.probs.fill(p);
        d
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, c1: u32, c2: u32) -> f64 {
        self.probs[c1 as usize * self.sizes[1] + c2 as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn marginal(&self, terminal: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.sizes[terminal]];
        for (i, &p) in self.probs.iter().enumerate() {
            let c = if terminal == 0 {
                i / self.sizes[1]
            } else {
                i % self.sizes[1]
            };
            out[c] += p;
        }
        out
    }

    /// Largest |p(c) − 1/|C|| over all ciphertext pairs.
    pub fn max_deviation_from_uniform(&self) -> f64 {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().map(|p| (p - u).abs()).fold(0.0, f64::max)
    }
}

/// Key-pair support grouped by the first key, for enumeration.
struct KeyTable {
    q2n: usize,
    rows: Vec<(u32, Vec<(u32, f64)>)>,
}

impl KeyTable {
    fn new(keys: &BlockDistribution) -> Result<Self> {
        let support = keys.support(KEY_SPACE_CAP)?;
        let mut rows: Vec<(u32, Vec<(u32, f64)>)> = Vec::new();
        for (k1, k2, p) in support {
            match rows.last_mut() {
                Some((last, row)) if *last == k1 => row.push((k2, p)),
                _ => rows.push((k1, vec![(k2, p)])),
            }
        }
        Ok(KeyTable {
            q2n: keys.space2().size() as usize,
            rows,
        })
    }

    /// Adds `weight · p(c | x1, x2)` into `out`. `c2_of` is scratch space.
    fn accumulate<E: Encryptor + ?Sized>(
        &self,
        oracle: &E,
        x1: u32,
        x2: u32,
        weight: f64,
        c2_of: &mut Vec<u32>,
        out: &mut [f64],
    ) {
        let n2 = oracle.dims().cipher_space(1).size() as usize;
        c2_of.clear();
        c2_of.extend((0..self.q2n as u32).map(|k2| oracle.encrypt_index(1, k2, x2)));
        for (k1, row) in &self.rows {
            let base = oracle.encrypt_index(0, *k1, x1) as usize * n2;
            for &(k2, p) in row {
                out[base + c2_of[k2 as usize] as usize] += weight * p;
            }
        }
    }
}

/// p(· | x₁, x₂): the key distribution pushed through the encryption map at
/// a fixed plaintext pair.
pub fn conditional_cipher_dist<E: Encryptor + ?Sized>(
    oracle: &E,
    keys: &BlockDistribution,
    x1: u32,
    x2: u32,
) -> Result<CipherDist> {
    let dims = oracle.dims();
    dims.ensure_compatible(keys)?;
    let table = KeyTable::new(keys)?;
    let mut out = CipherDist::zeros(&dims);
    table.accumulate(oracle, x1, x2, 1.0, &mut Vec::new(), &mut out.probs);
    Ok(out)
}

/// Σ_{x ∈ set} weight(x) · p(· | x), reduced in a fixed order.
fn weighted_cipher_sum<E: Encryptor + ?Sized>(
    oracle: &E,
    table: &KeyTable,
    plaintexts: &[(u32, u32, f64)],
) -> Vec<f64> {
    let dims = oracle.dims();
    let len = dims.cipher_pairs() as usize;
    let partials: Vec<Vec<f64>> = plaintexts
        .par_chunks(CHUNK.max(plaintexts.len().div_ceil(256)))
        .map(|chunk| {
            let mut acc = vec![0.0; len];
            let mut scratch = Vec::new();
            for &(x1, x2, w) in chunk {
                table.accumulate(oracle, x1, x2, w, &mut scratch, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; len];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// The check distribution p_Č: the ciphertext law under a uniform plaintext
/// on the decoding set.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckDistribution {
    pub dist: CipherDist,
    /// Largest deviation of any entry from the uniform value.
    pub max_deviation: f64,
}

impl CheckDistribution {
    pub fn is_uniform(&self, tol: f64) -> bool {
        self.max_deviation < tol
    }
}

pub fn check_distribution<E: Encryptor + ?Sized>(
    oracle: &E,
    keys: &BlockDistribution,
    set: &DecodingSet,
) -> Result<CheckDistribution> {
    let dims = oracle.dims();
    dims.ensure_compatible(keys)?;
    if set.is_empty() {
        return Err(Error::InvalidParameter("empty decoding set".into()));
    }
    let table = KeyTable::new(keys)?;
    let w = 1.0 / set.len() as f64;
    let members: Vec<(u32, u32, f64)> = set.members().iter().map(|&(a, b)| (a, b, w)).collect();
    let dist = CipherDist {
        sizes: CipherDist::zeros(&dims).sizes,
        probs: weighted_cipher_sum(oracle, &table, &members),
    };
    let max_deviation = dist.max_deviation_from_uniform();
    Ok(CheckDistribution {
        dist,
        max_deviation,
    })
}

/// Outcome of summing p(c | x) over the decoding set for every ciphertext.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitSumReport {
    /// max over ciphertext pairs of |Σ_{x ∈ D} p(c | x) − 1|.
    pub max_deviation: f64,
    pub worst_cipher: (u32, u32),
}

pub fn lemma1_verify<E: Encryptor + ?Sized>(
    oracle: &E,
    keys: &BlockDistribution,
    set: &DecodingSet,
) -> Result<UnitSumReport> {
    let dims = oracle.dims();
    dims.ensure_compatible(keys)?;
    let table = KeyTable::new(keys)?;
    let members: Vec<(u32, u32, f64)> = set.members().iter().map(|&(a, b)| (a, b, 1.0)).collect();
    let sums = weighted_cipher_sum(oracle, &table, &members);
    let n2 = dims.cipher_space(1).size() as usize;
    let (worst, dev) =
        sums.iter()
            .map(|s| (s - 1.0).abs())
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (i, d)| if d > best.1 { (i, d) } else { best },
            );
    Ok(UnitSumReport {
        max_deviation: dev,
        worst_cipher: ((worst / n2) as u32, (worst % n2) as u32),
    })
}

/// Whether the key-preimage sets `{k : Φ(k, x) = c}`, x ranging over the
/// decoding set, are pairwise disjoint and cover the whole key space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionCheck {
    pub disjoint: bool,
    pub covering: bool,
}

impl PartitionCheck {
    pub fn holds(&self) -> bool {
        self.disjoint && self.covering
    }
}

/// Partition check for a single ciphertext pair.
pub fn key_preimage_partition_verify<E: Encryptor + ?Sized>(
    oracle: &E,
    set: &DecodingSet,
    c1: u32,
    c2: u32,
) -> Result<PartitionCheck> {
    let dims = oracle.dims();
    ensure_cap("key pair space", dims.word_pairs(), KEY_SPACE_CAP)?;
    let (q1n, q2n) = (
        dims.word_space(0).size() as u32,
        dims.word_space(1).size() as u32,
    );
    let mut hits = vec![0u32; (q1n as usize) * (q2n as usize)];
    // A_x(c) is a product of one key set per terminal.
    for &(x1, x2) in set.members() {
        let first: Vec<u32> = (0..q1n)
            .filter(|&k| oracle.encrypt_index(0, k, x1) == c1)
            .collect();
        if first.is_empty() {
            continue;
        }
        let second: Vec<u32> = (0..q2n)
            .filter(|&k| oracle.encrypt_index(1, k, x2) == c2)
            .collect();
        for &k1 in &first {
            for &k2 in &second {
                hits[k1 as usize * q2n as usize + k2 as usize] += 1;
            }
        }
    }
    Ok(PartitionCheck {
        disjoint: hits.iter().all(|&h| h <= 1),
        covering: hits.iter().all(|&h| h >= 1),
    })
}

/// Partition check for every ciphertext pair at once: for each key pair,
/// the map x ↦ Φ(k, x) on the decoding set must hit every ciphertext pair
/// exactly once.
pub fn key_preimage_partition_verify_all<E: Encryptor + ?Sized>(
    oracle: &E,
    set: &DecodingSet,
) -> Result<PartitionCheck> {
    let dims = oracle.dims();
    ensure_cap("key pair space", dims.word_pairs(), KEY_SPACE_CAP)?;
    let (q1n, q2n) = (
        dims.word_space(0).size() as u32,
        dims.word_space(1).size() as u32,
    );
    let n2 = dims.cipher_space(1).size() as usize;
    let cipher_pairs = dims.cipher_pairs() as usize;
    let per_first_key: Vec<PartitionCheck> = (0..q1n)
        .into_par_iter()
        .map(|k1| {
            let mut seen = vec![false; cipher_pairs];
            let c1_of: Vec<usize> = set
                .members()
                .iter()
                .map(|&(x1, _)| oracle.encrypt_index(0, k1, x1) as usize)
                .collect();
            let mut check = PartitionCheck {
                disjoint: true,
                covering: true,
            };
            for k2 in 0..q2n {
                seen.fill(false);
                let mut distinct = 0usize;
                for (&(_, x2), &c1) in set.members().iter().zip(&c1_of) {
                    let c = c1 * n2 + oracle.encrypt_index(1, k2, x2) as usize;
                    if seen[c] {
                        check.disjoint = false;
                    } else {
                        seen[c] = true;
                        distinct += 1;
                    }
                }
                if distinct != cipher_pairs {
                    check.covering = false;
                }
            }
            check
        })
        .collect();
    Ok(PartitionCheck {
        disjoint: per_first_key.iter().all(|c| c.disjoint),
        covering: per_first_key.iter().all(|c| c.covering),
    })
}

/// Δ(x₁, x₂) = D(p(· | x₁, x₂) ‖ p_Č).
pub fn delta_pointwise(cond: &CipherDist, check: &CheckDistribution) -> Result<f64> {
    kl_divergence(&cond.probs, &check.dist.probs)
}

/// A metric value together with whether it was computed exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub exact: bool,
}

/// Plaintext pairs to average over, with their weights.
struct PlaintextPlan {
    entries: Vec<(u32, u32, f64)>,
    exact: bool,
}

impl PlaintextPlan {
    fn new(src: &BlockDistribution, set: &DecodingSet) -> Result<Self> {
        if src.pair_space_size() <= EXACT_PLAINTEXT_CAP {
            return Ok(PlaintextPlan {
                entries: src.support(EXACT_PLAINTEXT_CAP)?,
                exact: true,
            });
        }
        // D exactly, plus a uniform sample of the plaintexts outside D
        // reweighted by |outside| / samples.
        let mut entries: Vec<(u32, u32, f64)> = set
            .members()
            .iter()
            .map(|&(a, b)| (a, b, src.block_prob_index(a, b)))
            .filter(|e| e.2 > 0.0)
            .collect();
        let (s1, s2) = (src.space1().size(), src.space2().size());
        let outside = src.pair_space_size() - set.len() as u128;
        let scale = outside as f64 / NON_DECODABLE_SAMPLES as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut drawn = 0;
        while drawn < NON_DECODABLE_SAMPLES && outside > 0 {
            let a = rng.random_range(0..s1) as u32;
            let b = rng.random_range(0..s2) as u32;
            if set.contains(a, b) {
                continue;
            }
            drawn += 1;
            let p = src.block_prob_index(a, b);
            if p > 0.0 {
                entries.push((a, b, p * scale));
            }
        }
        Ok(PlaintextPlan {
            entries,
            exact: false,
        })
    }
}

/// Σ weight(x) · D(p(· | x) ‖ reference), reduced in a fixed order.
fn weighted_divergence<E: Encryptor + ?Sized>(
    oracle: &E,
    table: &KeyTable,
    plaintexts: &[(u32, u32, f64)],
    reference: &[f64],
) -> Result<f64> {
    let len = reference.len();
    let partials: Vec<Result<f64>> = plaintexts
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut cond = vec![0.0; len];
            let mut scratch = Vec::new();
            let mut sum = 0.0;
            for &(x1, x2, w) in chunk {
                cond.fill(0.0);
                table.accumulate(oracle, x1, x2, 1.0, &mut scratch, &mut cond);
                sum += w * kl_divergence(&cond, reference)?;
            }
            Ok(sum)
        })
        .collect();
    partials.into_iter().try_fold(0.0, |acc, p| Ok(acc + p?))
}

/// Δ by enumeration of plaintexts and keys.
pub fn delta_exact<E: Encryptor + ?Sized>(
    oracle: &E,
    src: &BlockDistribution,
    keys: &BlockDistribution,
    set: &DecodingSet,
) -> Result<Estimate> {
    let dims = oracle.dims();
    dims.ensure_compatible(src)?;
    let check = check_distribution(oracle, keys, set)?;
    delta_against(oracle, src, keys, set, &check)
}

fn delta_against<E: Encryptor + ?Sized>(
    oracle: &E,
    src: &BlockDistribution,
    keys: &BlockDistribution,
    set: &DecodingSet,
    check: &CheckDistribution,
) -> Result<Estimate> {
    let table = KeyTable::new(keys)?;
    let plan = PlaintextPlan::new(src, set)?;
    Ok(Estimate {
        value: weighted_divergence(oracle, &table, &plan.entries, &check.dist.probs)?,
        exact: plan.exact,
    })
}

/// p_C, the unconditional ciphertext law.
pub fn ciphertext_distribution<E: Encryptor + ?Sized>(
    oracle: &E,
    src: &BlockDistribution,
    keys: &BlockDistribution,
) -> Result<CipherDist> {
    let dims = oracle.dims();
    dims.ensure_compatible(src)?;
    dims.ensure_compatible(keys)?;
    let table = KeyTable::new(keys)?;
    let plaintexts = src.support(KEY_SPACE_CAP)?;
    Ok(CipherDist {
        sizes: CipherDist::zeros(&dims).sizes,
        probs: weighted_cipher_sum(oracle, &table, &plaintexts),
    })
}

/// I(C₁C₂; X₁X₂), computed as Σₓ p(x) D(p(· | x) ‖ p_C).
pub fn delta_mi<E: Encryptor + ?Sized>(
    oracle: &E,
    src: &BlockDistribution,
    keys: &BlockDistribution,
) -> Result<f64> {
    let p_c = ciphertext_distribution(oracle, src, keys)?;
    let table = KeyTable::new(keys)?;
    let plaintexts = src.support(KEY_SPACE_CAP)?;
    weighted_divergence(oracle, &table, &plaintexts, &p_c.probs)
}

/// Distribution of (K̃₁, K̃₂) = (K₁A₁ ⊕ b₁, K₂A₂ ⊕ b₂).
pub fn key_pushforward(enc: &AffineEncoderPair, keys: &BlockDistribution) -> Result<CipherDist> {
    pushforward(enc, keys, true)
}

/// Distribution of (X̃₁, X̃₂) = (X₁A₁, X₂A₂).
pub fn source_pushforward(enc: &AffineEncoderPair, src: &BlockDistribution) -> Result<CipherDist> {
    pushforward(enc, src, false)
}

fn pushforward(enc: &AffineEncoderPair, d: &BlockDistribution, affine: bool) -> Result<CipherDist> {
    let dims = SystemDims {
        n: enc.n(),
        m: [enc.m(0), enc.m(1)],
        fields: [enc.field(0), enc.field(1)],
    };
    dims.ensure_compatible(d)?;
    ensure_cap("block pair space", d.pair_space_size(), AFFINE_KEY_CAP)?;
    let image = |t| {
        if affine {
            enc.affine_image_table(t, AFFINE_KEY_CAP)
        } else {
            enc.linear_image_table(t, AFFINE_KEY_CAP)
        }
    };
    let (t1, t2) = (image(0)?, image(1)?);
    let n2 = dims.cipher_space(1).size() as usize;
    let len = dims.cipher_pairs() as usize;
    let q2n = d.space2().size() as u32;
    let partials: Vec<Vec<f64>> = (0..d.space1().size() as u32)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; len];
            for &w1 in chunk {
                let base = t1[w1 as usize] as usize * n2;
                for w2 in 0..q2n {
                    let p = d.block_prob_index(w1, w2);
                    if p > 0.0 {
                        acc[base + t2[w2 as usize] as usize] += p;
                    }
                }
            }
            acc
        })
        .collect();
    let mut probs = vec![0.0; len];
    for part in partials {
        for (t, p) in probs.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(CipherDist {
        sizes: CipherDist::zeros(&dims).sizes,
        probs,
    })
}

/// Δ for the affine construction: m₁log q₁ + m₂log q₂ − H(K̃₁K̃₂).
pub fn delta_affine(enc: &AffineEncoderPair, keys: &BlockDistribution) -> Result<f64> {
    let dims = SystemDims {
        n: enc.n(),
        m: [enc.m(0), enc.m(1)],
        fields: [enc.field(0), enc.field(1)],
    };
    let k = key_pushforward(enc, keys)?;
    Ok((dims.cipher_bits() - entropy(&k.probs)).max(0.0))
}

/// Δᵢ = Σ_{xᵢ} p(xᵢ) D(p(cᵢ | xᵢ) ‖ p_Čᵢ) for one terminal, with p_Čᵢ the
/// marginal of `check`.
pub fn delta_marginal<E: Encryptor + ?Sized>(
    oracle: &E,
    src: &BlockDistribution,
    keys: &BlockDistribution,
    check: &CheckDistribution,
    terminal: usize,
) -> Result<f64> {
    if terminal > 1 {
        return Err(Error::InvalidParameter(format!("terminal {terminal}")));
    }
    let dims = oracle.dims();
    dims.ensure_compatible(src)?;
    dims.ensure_compatible(keys)?;
    let key_probs = keys.marginal_block_probs(terminal, KEY_SPACE_CAP)?;
    let src_probs = src.marginal_block_probs(terminal, KEY_SPACE_CAP)?;
    let reference = check.dist.marginal(terminal);
    let len = reference.len();
    let words: Vec<u32> = (0..src_probs.len() as u32)
        .filter(|&x| src_probs[x as usize] > 0.0)
        .collect();
    let partials: Vec<Result<f64>> = words
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut cond = vec![0.0; len];
            let mut sum = 0.0;
            for &x in chunk {
                cond.fill(0.0);
                for (k, &p) in key_probs.iter().enumerate() {
                    if p > 0.0 {
                        cond[oracle.encrypt_index(terminal, k as u32, x) as usize] += p;
                    }
                }
                sum += src_probs[x as usize] * kl_divergence(&cond, &reference)?;
            }
            Ok(sum)
        })
        .collect();
    partials.into_iter().try_fold(0.0, |acc, p| Ok(acc + p?))
}

/// The key-entropy lower bound on Δ:
/// max{m₁log q₁ − nH(K₁), m₂log q₂ − nH(K₂), m₁log q₁ + m₂log q₂ − nH(K₁K₂)}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyEntropyBound {
    pub terms: [f64; 3],
    /// The signed maximum.
    pub raw: f64,
    /// `raw` floored at zero.
    pub reported: f64,
}

pub fn lemma2_bound(dims: &SystemDims, key_entropy: &EntropySet) -> KeyEntropyBound {
    let n = dims.n as f64;
    let terms = [
        dims.cipher_bits_of(0) - n * key_entropy.h1,
        dims.cipher_bits_of(1) - n * key_entropy.h2,
        dims.cipher_bits() - n * key_entropy.h12,
    ];
    let raw = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    KeyEntropyBound {
        terms,
        raw,
        reported: raw.max(0.0),
    }
}

/// Pair spaces up to this size get p_e summed over the complement of D,
/// which is exact to rounding even when p_e is tiny.
pub const COMPLEMENT_SUM_CAP: u128 = 1 << 24;

/// p_e = Pr[(X₁, X₂) ∉ D].
pub fn error_probability_exact(src: &BlockDistribution, set: &DecodingSet) -> f64 {
    let pairs = src.pair_space_size();
    if set.len() as u128 >= pairs {
        return 0.0;
    }
    if pairs <= COMPLEMENT_SUM_CAP {
        let q2n = src.space2().size() as u32;
        let rows: Vec<u32> = (0..src.space1().size() as u32).collect();
        let partials: Vec<f64> = rows
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut sum = 0.0;
                for &a in chunk {
                    for b in 0..q2n {
                        if !set.contains(a, b) {
                            sum += src.block_prob_index(a, b);
                        }
                    }
                }
                sum
            })
            .collect();
        return partials.iter().sum::<f64>().clamp(0.0, 1.0);
    }
    let inside: f64 = set
        .members()
        .iter()
        .map(|&(a, b)| src.block_prob_index(a, b))
        .sum();
    (1.0 - inside).clamp(0.0, 1.0)
}

/// Admissibility thresholds: Δ ≤ epsilon and p_e ≤ delta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub epsilon: f64,
    pub delta: f64,
}

/// How a report's leakage figures were computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricPath {
    /// Enumeration of plaintexts and keys through the encryption map.
    Enumeration,
    /// Pushforward of keys and sources through the affine encoders.
    AffineStructure,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecurityReport {
    pub delta: f64,
    pub delta_mi: f64,
    pub div_cipher_uniform: f64,
    pub delta_marginals: [f64; 2],
    pub key_bound: KeyEntropyBound,
    pub p_e: f64,
    pub rates: [f64; 2],
    pub thresholds: Thresholds,
    pub path: MetricPath,
    pub exact: bool,
}

impl SecurityReport {
    pub fn secure(&self) -> bool {
        self.delta <= self.thresholds.epsilon
    }

    pub fn reliable(&self) -> bool {
        self.p_e <= self.thresholds.delta
    }

    pub fn admissible(&self) -> bool {
        self.secure() && self.reliable()
    }

    /// Descriptions of every violated report invariant at tolerance `tol`.
    pub fn invariant_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let gap = self.delta - (self.delta_mi + self.div_cipher_uniform);
        if gap.abs() > tol {
            out.push(format!("delta - (delta_mi + div_cipher_uniform) = {gap:e}"));
        }
        if self.delta < self.key_bound.raw - tol {
            out.push(format!(
                "delta {} below key-entropy bound {}",
                self.delta, self.key_bound.raw
            ));
        }
        for (i, d) in self.delta_marginals.iter().enumerate() {
            if self.delta < d - tol {
                out.push(format!("delta {} below delta_{} = {d}", self.delta, i + 1));
            }
        }
        if self.delta < self.delta_mi - tol {
            out.push(format!(
                "delta {} below delta_mi {}",
                self.delta, self.delta_mi
            ));
        }
        out
    }
}

/// Which computation [`build_report_with`] should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathChoice {
    Auto,
    Force(MetricPath),
}

pub fn build_report(
    sys: &Cryptosystem,
    src: &BlockDistribution,
    keys: &BlockDistribution,
    thresholds: Thresholds,
) -> Result<SecurityReport> {
    build_report_with(sys, src, keys, thresholds, PathChoice::Auto)
}

pub fn build_report_with(
    sys: &Cryptosystem,
    src: &BlockDistribution,
    keys: &BlockDistribution,
    thresholds: Thresholds,
    choice: PathChoice,
) -> Result<SecurityReport> {
    let dims = sys.dims();
    dims.ensure_compatible(src)?;
    dims.ensure_compatible(keys)?;
    let set = sys.decoding_set();
    let path = match choice {
        PathChoice::Force(p) => p,
        PathChoice::Auto => {
            let pairs = dims.word_pairs();
            let work = pairs.saturating_mul(pairs);
            if pairs <= EXACT_PLAINTEXT_CAP && work <= ENUMERATION_WORK_BUDGET {
                MetricPath::Enumeration
            } else {
                MetricPath::AffineStructure
            }
        }
    };

    let (delta, delta_mi, div_cipher_uniform, delta_marginals, exact) = match path {
        MetricPath::Enumeration => {
            let check = check_distribution(sys, keys, &set)?;
            let delta = delta_against(sys, src, keys, &set, &check)?;
            let p_c = ciphertext_distribution(sys, src, keys)?;
            let mi = delta_mi(sys, src, keys)?;
            let div = kl_divergence(p_c.probs(), check.dist.probs())?;
            let marginals = [
                delta_marginal(sys, src, keys, &check, 0)?,
                delta_marginal(sys, src, keys, &check, 1)?,
            ];
            (delta.value, mi, div, marginals, delta.exact)
        }
        MetricPath::AffineStructure => {
            let structured = affine_structured_metrics(sys.encoders(), src, keys)?;
            (
                structured.delta,
                structured.delta_mi,
                structured.div_cipher_uniform,
                structured.delta_marginals,
                true,
            )
        }
    };

    Ok(SecurityReport {
        delta,
        delta_mi,
        div_cipher_uniform,
        delta_marginals,
        key_bound: lemma2_bound(&dims, &keys.base().entropy_set()),
        p_e: error_probability_exact(src, &set),
        rates: [dims.rate(0), dims.rate(1)],
        thresholds,
        path,
        exact,
    })
}

/// Leakage figures of the affine construction from pushforwards alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructuredMetrics {
    pub delta: f64,
    pub delta_mi: f64,
    pub div_cipher_uniform: f64,
    pub delta_marginals: [f64; 2],
}

/// For the affine scheme `C = X̃ ⊕ K̃` with K̃ independent of X̃, so
/// p(c | x) is p_K̃ shifted by X̃ and the check distribution is uniform.
/// Then Δ = log|C| − H(K̃), I(C; X) = H(C) − H(K̃) and
/// D(p_C ‖ uniform) = log|C| − H(C). Since X ⊕ K is again memoryless,
/// p_C is the affine pushforward of its letterwise law.
pub fn affine_structured_metrics(
    enc: &AffineEncoderPair,
    src: &BlockDistribution,
    keys: &BlockDistribution,
) -> Result<StructuredMetrics> {
    let dims = SystemDims {
        n: enc.n(),
        m: [enc.m(0), enc.m(1)],
        fields: [enc.field(0), enc.field(1)],
    };
    let p_k = key_pushforward(enc, keys)?;
    let sum = BlockDistribution::new(src.base().independent_sum(keys.base())?, src.n())?;
    let p_c = pushforward(enc, &sum, true)?;
    let uniform = CipherDist::uniform(&dims);
    let bits = dims.cipher_bits();
    let h_k = entropy(&p_k.probs);
    let h_c = entropy(&p_c.probs);
    let marginal_delta = |t: usize| (dims.cipher_bits_of(t) - entropy(&p_k.marginal(t))).max(0.0);
    Ok(StructuredMetrics {
        delta: (bits - h_k).max(0.0),
        delta_mi: (h_c - h_k).max(0.0),
        div_cipher_uniform: kl_divergence(&p_c.probs, &uniform.probs)?,
        delta_marginals: [marginal_delta(0), marginal_delta(1)],
    })
}
