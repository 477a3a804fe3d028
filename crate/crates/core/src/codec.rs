//! Linear and affine encoders, and the minimum-entropy joint decoder.
//!
//! Terminal i compresses a length-n word with `x ↦ xAᵢ` (linear) or
//! `k ↦ kAᵢ ⊕ bᵢ` (affine). A syndrome pair fixes a product of two cosets of
//! the encoders' left kernels; the joint decoder picks from that product the
//! pair whose empirical joint type has the least entropy, breaking ties by
//! lexicographic order on the concatenated pair. The decoder is tabulated
//! once per encoder pair, and its value set is the correct-decoding set.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{ensure_cap, Error, Result};
use crate::gf::{
    sample_surjective_matrix, vec_mat_mul, Field, FieldMatrix, FieldVector, LeftSolver, WordSpace,
};

/// Upper bound on q₁^{n−m₁}·q₂^{n−m₂}, the size of one coset product.
pub const COSET_PRODUCT_CAP: u128 = 1 << 20;
/// Upper bound on q₁^{m₁}·q₂^{m₂}, the number of decoder table entries.
pub const TABLE_CAP: u128 = 1 << 20;
/// Upper bound on a single terminal's word space during table construction.
pub const TERMINAL_SPACE_CAP: u128 = 1 << 24;

/// Two-terminal affine encoder: `kᵢ ↦ kᵢAᵢ ⊕ bᵢ`, with `Aᵢ` an n×mᵢ matrix
/// of full column rank.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineEncoderPair {
    matrices: [FieldMatrix; 2],
    offsets: [FieldVector; 2],
}

impl AffineEncoderPair {
    pub fn new(a1: FieldMatrix, a2: FieldMatrix, b1: FieldVector, b2: FieldVector) -> Result<Self> {
        if a1.rows() != a2.rows() {
            return Err(Error::dims(format!(
                "encoders have {} and {} rows",
                a1.rows(),
                a2.rows()
            )));
        }
        for (a, b) in [(&a1, &b1), (&a2, &b2)] {
            a.field().ensure_same(b.field())?;
            if b.len() != a.cols() {
                return Err(Error::dims(format!(
                    "offset of length {} for {} columns",
                    b.len(),
                    a.cols()
                )));
            }
            let rank = a.rank();
            if rank != a.cols() {
                return Err(Error::NotSurjective {
                    rank,
                    cols: a.cols(),
                });
            }
        }
        Ok(AffineEncoderPair {
            matrices: [a1, a2],
            offsets: [b1, b2],
        })
    }

    /// Linear encoders (zero offsets).
    pub fn linear(a1: FieldMatrix, a2: FieldMatrix) -> Result<Self> {
        let b1 = FieldVector::zeros(a1.field(), a1.cols());
        let b2 = FieldVector::zeros(a2.field(), a2.cols());
        Self::new(a1, a2, b1, b2)
    }

    /// Identity encoders: no compression, so encryption is a plain one-time pad.
    pub fn identity(field1: Field, field2: Field, n: usize) -> Self {
        Self::linear(
            FieldMatrix::identity(field1, n),
            FieldMatrix::identity(field2, n),
        )
        .expect("identity has full rank")
    }

    /// Independently drawn surjective matrices with zero offsets.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        m1: usize,
        m2: usize,
        field1: Field,
        field2: Field,
    ) -> Result<Self> {
        let a1 = sample_surjective_matrix(rng, n, m1, field1)?;
        let a2 = sample_surjective_matrix(rng, n, m2, field2)?;
        Self::linear(a1, a2)
    }

    pub fn with_offsets(mut self, b1: FieldVector, b2: FieldVector) -> Result<Self> {
        let [a1, a2] = self.matrices;
        self = Self::new(a1, a2, b1, b2)?;
        Ok(self)
    }

    /// Offsets drawn uniformly at random.
    pub fn with_random_offsets<R: Rng + ?Sized>(self, rng: &mut R) -> Result<Self> {
        let draw = |rng: &mut R, a: &FieldMatrix| {
            let f = a.field();
            let elems = (0..a.cols())
                .map(|_| rng.random_range(0..f.q()) as u8)
                .collect();
            FieldVector::new(f, elems)
        };
        let b1 = draw(rng, &self.matrices[0])?;
        let b2 = draw(rng, &self.matrices[1])?;
        self.with_offsets(b1, b2)
    }

    pub fn n(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn m(&self, terminal: usize) -> usize {
        self.matrices[terminal].cols()
    }

    pub fn field(&self, terminal: usize) -> Field {
        self.matrices[terminal].field()
    }

    pub fn matrix(&self, terminal: usize) -> &FieldMatrix {
        &self.matrices[terminal]
    }

    pub fn offset(&self, terminal: usize) -> &FieldVector {
        &self.offsets[terminal]
    }

    /// φᵢ(x) = xAᵢ.
    pub fn encode_linear(&self, terminal: usize, x: &FieldVector) -> Result<FieldVector> {
        linear_encode(x, &self.matrices[terminal])
    }

    /// φ̃ᵢ(k) = kAᵢ ⊕ bᵢ.
    pub fn encode_affine(&self, terminal: usize, k: &FieldVector) -> Result<FieldVector> {
        affine_encode(k, &self.matrices[terminal], &self.offsets[terminal])
    }

    /// Affine images of every indexed word of one terminal. Fails above
    /// `cap` words.
    pub fn affine_image_table(&self, terminal: usize, cap: u128) -> Result<Vec<u32>> {
        self.image_table(terminal, cap, true)
    }

    /// Linear images of every indexed word of one terminal.
    pub fn linear_image_table(&self, terminal: usize, cap: u128) -> Result<Vec<u32>> {
        self.image_table(terminal, cap, false)
    }

    fn image_table(&self, terminal: usize, cap: u128, with_offset: bool) -> Result<Vec<u32>> {
        let a = &self.matrices[terminal];
        let b = &self.offsets[terminal];
        let f = a.field();
        let inputs = WordSpace::new(f, a.rows())?;
        let outputs = WordSpace::new(f, a.cols())?;
        ensure_cap("encoder image table", inputs.size() as u128, cap)?;
        Ok((0..inputs.size() as u32)
            .into_par_iter()
            .map_init(
                || (vec![0u8; a.rows()], vec![0u8; a.cols()]),
                |(x, y), w| {
                    inputs.digits_into(w, x);
                    a.left_mul_into(x, y);
                    if with_offset {
                        for (yi, &bi) in y.iter_mut().zip(b.as_slice()) {
                            *yi = f.add(*yi, bi);
                        }
                    }
                    outputs.index_of(y)
                },
            )
            .collect())
    }
}

/// φ(x) = xA.
pub fn linear_encode(x: &FieldVector, a: &FieldMatrix) -> Result<FieldVector> {
    vec_mat_mul(x, a)
}

/// φ̃(k) = kA ⊕ b.
pub fn affine_encode(k: &FieldVector, a: &FieldMatrix, b: &FieldVector) -> Result<FieldVector> {
    if b.len() != a.cols() {
        return Err(Error::dims(format!(
            "offset of length {} for {} columns",
            b.len(),
            a.cols()
        )));
    }
    vec_mat_mul(k, a)?.add(b)
}

/// Entropy in bits of the empirical joint type of ((x₁ₜ, x₂ₜ))ₜ.
pub fn pairwise_empirical_entropy(x1: &FieldVector, x2: &FieldVector) -> Result<f64> {
    if x1.len() != x2.len() {
        return Err(Error::dims(format!(
            "sequences of lengths {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    let n = x1.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut pairs: Vec<(u8, u8)> = x1
        .as_slice()
        .iter()
        .copied()
        .zip(x2.as_slice().iter().copied())
        .collect();
    pairs.sort_unstable();
    let counts = pairs.chunk_by(|a, b| a == b).map(|run| run.len());
    let n_f = n as f64;
    Ok(counts
        .map(|c| {
            let p = c as f64 / n_f;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

/// Scores a pair of sequences by Σ c·log₂ c over its joint type counts.
/// The empirical entropy is log₂ n − score/n, so the minimum-entropy pair
/// is the one with the largest score.
struct TypeScorer {
    q2: usize,
    c_log_c: Vec<f64>,
    counts: Vec<u32>,
    touched: Vec<usize>,
}

/// Scores closer than this are treated as a tie.
const SCORE_TIE: f64 = 1e-9;

impl TypeScorer {
    fn new(q1: usize, q2: usize, n: usize) -> Self {
        TypeScorer {
            q2,
            c_log_c: (0..=n)
                .map(|c| {
                    if c < 2 {
                        0.0
                    } else {
                        c as f64 * (c as f64).log2()
                    }
                })
                .collect(),
            counts: vec![0; q1 * q2],
            touched: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn score(&mut self, x1: &[u8], x2: &[u8]) -> f64 {
        for (&a, &b) in x1.iter().zip(x2) {
            let cell = a as usize * self.q2 + b as usize;
            if self.counts[cell] == 0 {
                self.touched.push(cell);
            }
            self.counts[cell] += 1;
        }
        let mut s = 0.0;
        for &cell in &self.touched {
            s += self.c_log_c[self.counts[cell] as usize];
            self.counts[cell] = 0;
        }
        self.touched.clear();
        s
    }
}

/// Coset decomposition of one terminal's word space under a linear encoder:
/// for each syndrome, the member words in increasing index order.
struct CosetIndex {
    n: usize,
    /// Digits of every member, `n` bytes per member, grouped by syndrome.
    digits: Vec<u8>,
    indices: Vec<u32>,
    coset_size: usize,
}

impl CosetIndex {
    fn new(a: &FieldMatrix) -> Result<Self> {
        let f = a.field();
        let (n, m) = (a.rows(), a.cols());
        let words = WordSpace::new(f, n)?;
        let syndromes = WordSpace::new(f, m)?;
        ensure_cap(
            "terminal word space",
            words.size() as u128,
            TERMINAL_SPACE_CAP,
        )?;
        let solver = LeftSolver::new(a)?;

        // All kernel elements as combinations of a basis.
        let basis = a.left_kernel_basis();
        let coeffs = WordSpace::new(f, basis.len())?;
        let kernel: Vec<Vec<u8>> = (0..coeffs.size() as u32)
            .map(|c| {
                let mut v = vec![0u8; n];
                for (coef, b) in coeffs.digits(c).into_iter().zip(&basis) {
                    for (vi, &bi) in v.iter_mut().zip(b.as_slice()) {
                        *vi = f.add(*vi, f.mul(coef, bi));
                    }
                }
                v
            })
            .collect();
        let coset_size = kernel.len();

        let mut digits = Vec::with_capacity(words.size() as usize * n);
        let mut indices = Vec::with_capacity(words.size() as usize);
        let mut base = vec![0u8; n];
        let mut member = vec![0u8; n];
        let mut coset: Vec<(u32, Vec<u8>)> = Vec::with_capacity(coset_size);
        for s in 0..syndromes.size() as u32 {
            solver.solve_into(&syndromes.digits(s), &mut base);
            coset.clear();
            for k in &kernel {
                for ((o, &x), &y) in member.iter_mut().zip(&base).zip(k) {
                    *o = f.add(x, y);
                }
                coset.push((words.index_of(&member), member.clone()));
            }
            coset.sort_unstable_by_key(|c| c.0);
            for (idx, d) in &coset {
                indices.push(*idx);
                digits.extend_from_slice(d);
            }
        }
        Ok(CosetIndex {
            n,
            digits,
            indices,
            coset_size,
        })
    }

    #[inline]
    fn member(&self, syndrome: u32, j: usize) -> (u32, &[u8]) {
        let pos = syndrome as usize * self.coset_size + j;
        (
            self.indices[pos],
            &self.digits[pos * self.n..(pos + 1) * self.n],
        )
    }
}

/// Tabulated joint decoder ψ: syndrome pair ↦ reconstructed word pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoderTable {
    n: usize,
    words: [WordSpace; 2],
    syndromes: [WordSpace; 2],
    /// Entry `s1 * |S2| + s2` holds the decoded pair of word indices.
    entries: Vec<(u32, u32)>,
}

/// Builds the minimum-entropy decoder for the linear parts of `enc`.
pub fn build_decoder_table(enc: &AffineEncoderPair) -> Result<DecoderTable> {
    let n = enc.n();
    let (f1, f2) = (enc.field(0), enc.field(1));
    let (m1, m2) = (enc.m(0), enc.m(1));
    let pow = |f: Field, e: usize| (f.q() as u128).checked_pow(e as u32).unwrap_or(u128::MAX);
    ensure_cap(
        "coset product",
        pow(f1, n - m1).saturating_mul(pow(f2, n - m2)),
        COSET_PRODUCT_CAP,
    )?;
    ensure_cap(
        "decoder table",
        pow(f1, m1).saturating_mul(pow(f2, m2)),
        TABLE_CAP,
    )?;

    let c1 = CosetIndex::new(enc.matrix(0))?;
    let c2 = CosetIndex::new(enc.matrix(1))?;
    let syn1 = WordSpace::new(f1, m1)?;
    let syn2 = WordSpace::new(f2, m2)?;
    let (q1, q2) = (f1.q() as usize, f2.q() as usize);

    let entries: Vec<(u32, u32)> = (0..syn1.size() as u32)
        .into_par_iter()
        .flat_map_iter(|s1| {
            let mut scorer = TypeScorer::new(q1, q2, n);
            let (c1, c2) = (&c1, &c2);
            (0..syn2.size() as u32).map(move |s2| {
                let mut best: Option<(f64, u32, u32)> = None;
                for j1 in 0..c1.coset_size {
                    let (i1, d1) = c1.member(s1, j1);
                    for j2 in 0..c2.coset_size {
                        let (i2, d2) = c2.member(s2, j2);
                        let score = scorer.score(d1, d2);
                        best = match best {
                            None => Some((score, i1, i2)),
                            Some((bs, b1, b2)) => {
                                let better = score > bs + SCORE_TIE
                                    || (score > bs - SCORE_TIE && (i1, i2) < (b1, b2));
                                if better {
                                    Some((score, i1, i2))
                                } else {
                                    Some((bs, b1, b2))
                                }
                            }
                        };
                    }
                }
                let (_, b1, b2) = best.expect("cosets are nonempty");
                (b1, b2)
            })
        })
        .collect();

    Ok(DecoderTable {
        n,
        words: [WordSpace::new(f1, n)?, WordSpace::new(f2, n)?],
        syndromes: [syn1, syn2],
        entries,
    })
}

impl DecoderTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn word_space(&self, terminal: usize) -> WordSpace {
        self.words[terminal]
    }

    pub fn syndrome_space(&self, terminal: usize) -> WordSpace {
        self.syndromes[terminal]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    #[inline]
    pub fn decode_index(&self, s1: u32, s2: u32) -> (u32, u32) {
        self.entries[s1 as usize * self.syndromes[1].size() as usize + s2 as usize]
    }

    /// ψ(x̃₁, x̃₂).
    pub fn decode(&self, s1: &FieldVector, s2: &FieldVector) -> Result<(FieldVector, FieldVector)> {
        for (s, space) in [(s1, self.syndromes[0]), (s2, self.syndromes[1])] {
            space.field().ensure_same(s.field())?;
            if s.len() != space.len() {
                return Err(Error::dims(format!(
                    "syndrome of length {} for m = {}",
                    s.len(),
                    space.len()
                )));
            }
        }
        let (w1, w2) = self.decode_index(s1.index(), s2.index());
        Ok((self.words[0].vector(w1), self.words[1].vector(w2)))
    }

    /// The set of pairs that decode correctly: the table's value set.
    pub fn decoding_set(&self) -> DecodingSet {
        let mut members: Vec<(u32, u32)> = self.entries.clone();
        members.sort_unstable();
        members.dedup();
        DecodingSet {
            lookup: members.iter().copied().collect(),
            members,
        }
    }

    /// Whether every value is distinct (ψ is one-to-one).
    pub fn is_injective(&self) -> bool {
        self.decoding_set().len() == self.entries.len()
    }

    /// Whether every value re-encodes to its own syndrome pair under `enc`.
    pub fn reencodes(&self, enc: &AffineEncoderPair) -> bool {
        let s2n = self.syndromes[1].size() as usize;
        self.entries.iter().enumerate().all(|(pos, &(w1, w2))| {
            let x1 = self.words[0].vector(w1);
            let x2 = self.words[1].vector(w2);
            let (Ok(y1), Ok(y2)) = (enc.encode_linear(0, &x1), enc.encode_linear(1, &x2)) else {
                return false;
            };
            y1.index() as usize == pos / s2n && y2.index() as usize == pos % s2n
        })
    }

    /// A copy in which syndrome pair `victim` decodes to the value stored for
    /// `target`. The result is deliberately not injective; it exists to
    /// exercise the invariant checks.
    pub fn corrupted(&self, victim: (u32, u32), target: (u32, u32)) -> DecoderTable {
        let mut out = self.clone();
        let s2n = self.syndromes[1].size() as usize;
        let value = self.entries[target.0 as usize * s2n + target.1 as usize];
        out.entries[victim.0 as usize * s2n + victim.1 as usize] = value;
        out
    }
}

/// The correct-decoding set D⁽ⁿ⁾, as word-index pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodingSet {
    members: Vec<(u32, u32)>,
    lookup: HashSet<(u32, u32)>,
}

impl DecodingSet {
    pub fn from_members(members: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut members: Vec<(u32, u32)> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        DecodingSet {
            lookup: members.iter().copied().collect(),
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w1: u32, w2: u32) -> bool {
        self.lookup.contains(&(w1, w2))
    }

    /// Members in increasing index order.
    pub fn members(&self) -> &[(u32, u32)] {
        &self.members
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u32) -> Field {
        Field::new(q).unwrap()
    }

    fn v(f: Field, e: &[u8]) -> FieldVector {
        FieldVector::new(f, e.to_vec()).unwrap()
    }

    #[test]
    fn linear_encode_examples() {
        let f = gf(2);
        let x = v(f, &[1, 0, 1]);
        assert_eq!(linear_encode(&x, &FieldMatrix::identity(f, 3)).unwrap(), x);
        let a = FieldMatrix::from_rows(f, &[&[1, 0], &[1, 1], &[0, 1]]).unwrap();
        assert!(linear_encode(&FieldVector::zeros(f, 3), &a)
            .unwrap()
            .is_zero());
        // (1,1,1)·A = (1+1+0, 0+1+1) = (0, 0)
        assert_eq!(
            linear_encode(&v(f, &[1, 1, 1]), &a).unwrap().as_slice(),
            &[0, 0]
        );
        assert!(linear_encode(&v(f, &[1, 1]), &a).is_err());
    }

    #[test]
    fn affine_encode_examples() {
        let f = gf(2);
        let a = FieldMatrix::from_rows(f, &[&[1, 0], &[1, 1], &[0, 1]]).unwrap();
        let b = v(f, &[1, 0]);
        let zero_b = FieldVector::zeros(f, 2);
        let space = WordSpace::new(f, 3).unwrap();
        for w in 0..8 {
            let k = space.vector(w);
            assert_eq!(
                affine_encode(&k, &a, &zero_b).unwrap(),
                linear_encode(&k, &a).unwrap()
            );
            let shifted = affine_encode(&k, &a, &b).unwrap();
            assert_eq!(shifted.sub(&b).unwrap(), linear_encode(&k, &a).unwrap());
        }
        assert_eq!(affine_encode(&FieldVector::zeros(f, 3), &a, &b).unwrap(), b);
        assert!(affine_encode(&v(f, &[1, 1, 1]), &a, &v(f, &[1])).is_err());
    }

    #[test]
    fn empirical_entropy_examples() {
        let f = gf(2);
        let h = |a: &[u8], b: &[u8]| pairwise_empirical_entropy(&v(f, a), &v(f, b)).unwrap();
        assert_eq!(h(&[1, 1, 1], &[0, 0, 0]), 0.0);
        assert!((h(&[0, 1], &[0, 1]) - 1.0).abs() < 1e-15);
        // pair counts (0,0)x2, (0,1)x1, (1,1)x1: type (1/2, 1/4, 1/4)
        assert!((h(&[0, 0, 0, 1], &[0, 0, 1, 1]) - 1.5).abs() < 1e-15);
        assert!(pairwise_empirical_entropy(&v(f, &[0]), &v(f, &[0, 1])).is_err());
    }

    #[test]
    fn scorer_orders_like_entropy() {
        let f = gf(3);
        let space = WordSpace::new(f, 3).unwrap();
        let mut scorer = TypeScorer::new(3, 3, 3);
        for a in 0..27 {
            for b in 0..27 {
                let (x1, x2) = (space.vector(a), space.vector(b));
                let h = pairwise_empirical_entropy(&x1, &x2).unwrap();
                let s = scorer.score(x1.as_slice(), x2.as_slice());
                assert!((h - (3f64.log2() - s / 3.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_rank_deficient_encoders() {
        let f = gf(2);
        let a = FieldMatrix::from_rows(f, &[&[1, 1], &[1, 1]]).unwrap();
        assert!(matches!(
            AffineEncoderPair::linear(a, FieldMatrix::identity(f, 2)),
            Err(Error::NotSurjective { .. })
        ));
    }

    #[test]
    fn identity_table_is_identity() {
        let f = gf(2);
        let enc = AffineEncoderPair::identity(f, f, 2);
        let t = build_decoder_table(&enc).unwrap();
        assert_eq!(t.len(), 16);
        for s1 in 0..4 {
            for s2 in 0..4 {
                assert_eq!(t.decode_index(s1, s2), (s1, s2));
            }
        }
        assert_eq!(t.decoding_set().len(), 16);
    }

    #[test]
    fn repetition_code_zero_syndrome() {
        // A = [[1],[1]]: syndrome 0 is the coset {00, 11} at each terminal.
        // All four pairs have joint-type entropy 0; the tie goes to (00, 00).
        let f = gf(2);
        let a = FieldMatrix::from_rows(f, &[&[1], &[1]]).unwrap();
        let enc = AffineEncoderPair::linear(a.clone(), a).unwrap();
        let t = build_decoder_table(&enc).unwrap();
        let (x1, x2) = t.decode(&v(f, &[0]), &v(f, &[0])).unwrap();
        assert_eq!(
            (x1.as_slice(), x2.as_slice()),
            (&[0u8, 0][..], &[0u8, 0][..])
        );
        assert_eq!(t.decoding_set().len(), 4);
    }

    #[test]
    fn decoding_set_cardinality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (f2, f3) = (gf(2), gf(3));
        let enc = AffineEncoderPair::random(&mut rng, 3, 2, 2, f2, f2).unwrap();
        assert_eq!(build_decoder_table(&enc).unwrap().decoding_set().len(), 16);
        let enc = AffineEncoderPair::random(&mut rng, 2, 1, 2, f3, f3).unwrap();
        assert_eq!(build_decoder_table(&enc).unwrap().decoding_set().len(), 27);
    }

    fn exhaustive_checks(enc: &AffineEncoderPair) {
        let t = build_decoder_table(enc).unwrap();
        assert!(t.is_injective());
        assert!(t.reencodes(enc));
        let d = t.decoding_set();
        let (w1s, w2s) = (t.word_space(0), t.word_space(1));
        for a in 0..w1s.size() as u32 {
            for b in 0..w2s.size() as u32 {
                let (x1, x2) = (w1s.vector(a), w2s.vector(b));
                let s1 = enc.encode_linear(0, &x1).unwrap();
                let s2 = enc.encode_linear(1, &x2).unwrap();
                let (y1, y2) = t.decode(&s1, &s2).unwrap();
                if d.contains(a, b) {
                    assert_eq!((&y1, &y2), (&x1, &x2));
                } else {
                    assert_ne!((y1.index(), y2.index()), (a, b));
                    assert_eq!(enc.encode_linear(0, &y1).unwrap(), s1);
                    assert_eq!(enc.encode_linear(1, &y2).unwrap(), s2);
                }
                // The chosen representative has minimum type entropy.
                let h_member = pairwise_empirical_entropy(&x1, &x2).unwrap();
                let h_chosen = pairwise_empirical_entropy(&y1, &y2).unwrap();
                assert!(h_chosen <= h_member + 1e-12);
            }
        }
    }

    #[test]
    fn decoder_exhaustive_small_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (q, n) in [(2u32, 2usize), (2, 3), (2, 4), (3, 2), (3, 3)] {
            let f = gf(q);
            for m1 in 1..=n {
                for m2 in 1..=n {
                    let enc = AffineEncoderPair::random(&mut rng, n, m1, m2, f, f).unwrap();
                    exhaustive_checks(&enc);
                }
            }
        }
    }

    #[test]
    fn mixed_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let enc = AffineEncoderPair::random(&mut rng, 3, 1, 2, gf(2), gf(3)).unwrap();
        exhaustive_checks(&enc);
        let t = build_decoder_table(&enc).unwrap();
        assert_eq!(t.decoding_set().len(), 2 * 9);
    }

    #[test]
    fn zero_syndrome_picks_min_entropy_kernel_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = gf(2);
        let enc = AffineEncoderPair::random(&mut rng, 4, 2, 2, f, f).unwrap();
        let t = build_decoder_table(&enc).unwrap();
        // Oracle: brute-force minimum over the kernel product.
        let words = WordSpace::new(f, 4).unwrap();
        let ker: Vec<u32> = (0..16)
            .filter(|&w| enc.encode_linear(0, &words.vector(w)).unwrap().is_zero())
            .collect();
        let ker2: Vec<u32> = (0..16)
            .filter(|&w| enc.encode_linear(1, &words.vector(w)).unwrap().is_zero())
            .collect();
        let mut best = (f64::INFINITY, 0, 0);
        for &a in &ker {
            for &b in &ker2 {
                let h = pairwise_empirical_entropy(&words.vector(a), &words.vector(b)).unwrap();
                if h < best.0 - 1e-12 {
                    best = (h, a, b);
                }
            }
        }
        assert_eq!(t.decode_index(0, 0), (best.1, best.2));
    }

    #[test]
    fn corrupted_table_is_detected() {
        let f = gf(2);
        let enc = AffineEncoderPair::identity(f, f, 2);
        let t = build_decoder_table(&enc).unwrap().corrupted((0, 1), (0, 0));
        assert!(!t.is_injective());
        assert_eq!(t.decoding_set().len(), 15);
        assert!(!t.reencodes(&enc));
    }

    #[test]
    fn cap_is_enforced() {
        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let enc = AffineEncoderPair::random(&mut rng, 22, 1, 1, f, f).unwrap();
        assert!(matches!(
            build_decoder_table(&enc),
            Err(Error::ResourceCap { .. })
        ));
    }
}
