//! Discrete joint distributions on two finite alphabets and their
//! memoryless blocklength-n extensions. All information quantities are in
//! bits.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{ensure_cap, Error, Result};
use crate::gf::{Field, FieldVector, WordSpace};

/// Tolerance on the total mass of a pmf handed to a constructor.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Shannon entropy in bits; zero-mass entries contribute nothing.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Binary entropy function h₂.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// Kullback-Leibler divergence D(p ‖ r) in bits.
pub fn kl_divergence(p: &[f64], r: &[f64]) -> Result<f64> {
    if p.len() != r.len() {
        return Err(Error::dims(format!(
            "distributions over {} and {} outcomes",
            p.len(),
            r.len()
        )));
    }
    let mut d = 0.0;
    for (&pi, &ri) in p.iter().zip(r) {
        if pi > 0.0 {
            if ri <= 0.0 {
                return Err(Error::InfiniteDivergence);
            }
            d += pi * (pi / ri).log2();
        }
    }
    // Rounding can leave a tiny negative value when p == r.
    Ok(d.max(0.0))
}

/// The entropy profile of a pair (X₁, X₂).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropySet {
    pub h12: f64,
    pub h1: f64,
    pub h2: f64,
    pub h1g2: f64,
    pub h2g1: f64,
    pub mi: f64,
}

/// A probability table over GF(q₁) × GF(q₂).
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    field1: Field,
    field2: Field,
    /// Row-major: entry `a * q2 + b` is p(a, b).
    table: Vec<f64>,
}

impl JointPmf {
    pub fn new(field1: Field, field2: Field, table: Vec<f64>) -> Result<Self> {
        let (q1, q2) = (field1.q() as usize, field2.q() as usize);
        if table.len() != q1 * q2 {
            return Err(Error::InvalidPmf(format!(
                "{} entries for a {q1}x{q2} table",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!(
                "entry {bad} is not a probability"
            )));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidPmf(format!("entries sum to {total}, not 1")));
        }
        let table = table.into_iter().map(|p| p / total).collect();
        Ok(JointPmf {
            field1,
            field2,
            table,
        })
    }

    /// Law of (A₁ ⊕ B₁, A₂ ⊕ B₂) for independent (A₁, A₂) ~ self and
    /// (B₁, B₂) ~ other.
    pub fn independent_sum(&self, other: &JointPmf) -> Result<JointPmf> {
        self.field1.ensure_same(other.field1)?;
        self.field2.ensure_same(other.field2)?;
        let (f1, f2) = (self.field1, self.field2);
        let q2 = f2.q() as usize;
        let mut table = vec![0.0; self.table.len()];
        for (i, &p) in self.table.iter().enumerate() {
            for (j, &r) in other.table.iter().enumerate() {
                let a = f1.add((i / q2) as u8, (j / q2) as u8) as usize;
                let b = f2.add((i % q2) as u8, (j % q2) as u8) as usize;
                table[a * q2 + b] += p * r;
            }
        }
        JointPmf::new(f1, f2, table)
    }

    pub fn from_rows(field1: Field, field2: Field, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != field1.q() as usize || rows.iter().any(|r| r.len() != field2.q() as usize)
        {
            return Err(Error::InvalidPmf(format!(
                "table shape does not match {}x{}",
                field1.q(),
                field2.q()
            )));
        }
        Self::new(field1, field2, rows.concat())
    }

    pub fn uniform(field1: Field, field2: Field) -> Self {
        let cells = (field1.q() * field2.q()) as usize;
        JointPmf {
            field1,
            field2,
            table: vec![1.0 / cells as f64; cells],
        }
    }

    /// X₁ uniform and X₂ = X₁.
    pub fn equal_uniform(field: Field) -> Self {
        let q = field.q() as usize;
        let mut table = vec![0.0; q * q];
        for a in 0..q {
            table[a * q + a] = 1.0 / q as f64;
        }
        JointPmf {
            field1: field,
            field2: field,
            table,
        }
    }

    /// Doubly symmetric binary source: uniform bits that differ with
    /// probability `crossover`.
    pub fn dsbs(crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::InvalidPmf(format!(
                "crossover {crossover} outside [0,1]"
            )));
        }
        let f = Field::new(2)?;
        let same = (1.0 - crossover) / 2.0;
        let diff = crossover / 2.0;
        Self::new(f, f, vec![same, diff, diff, same])
    }

    /// A point mass on `(a, b)`.
    pub fn point(field1: Field, field2: Field, a: u8, b: u8) -> Result<Self> {
        field1.check(a as u32)?;
        field2.check(b as u32)?;
        let q2 = field2.q() as usize;
        let mut table = vec![0.0; (field1.q() * field2.q()) as usize];
        table[a as usize * q2 + b as usize] = 1.0;
        Ok(JointPmf {
            field1,
            field2,
            table,
        })
    }

    pub fn field1(&self) -> Field {
        self.field1
    }

    pub fn field2(&self) -> Field {
        self.field2
    }

    #[inline]
    pub fn prob(&self, a: u8, b: u8) -> f64 {
        self.table[a as usize * self.field2.q() as usize + b as usize]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn marginal1(&self) -> Vec<f64> {
        let q2 = self.field2.q() as usize;
        self.table.chunks(q2).map(|row| row.iter().sum()).collect()
    }

    pub fn marginal2(&self) -> Vec<f64> {
        let q2 = self.field2.q() as usize;
        let mut m = vec![0.0; q2];
        for row in self.table.chunks(q2) {
            for (acc, p) in m.iter_mut().zip(row) {
                *acc += p;
            }
        }
        m
    }

    pub fn entropy_set(&self) -> EntropySet {
        let h12 = entropy(&self.table);
        let h1 = entropy(&self.marginal1());
        let h2 = entropy(&self.marginal2());
        EntropySet {
            h12,
            h1,
            h2,
            h1g2: h12 - h2,
            h2g1: h12 - h1,
            mi: h1 + h2 - h12,
        }
    }

    pub fn same_shape(&self, other: &JointPmf) -> bool {
        self.field1 == other.field1 && self.field2 == other.field2
    }
}

/// The i.i.d. extension of a [`JointPmf`] to blocks of length n. Block
/// probabilities are evaluated on demand.
#[derive(Clone, Debug)]
pub struct BlockDistribution {
    base: JointPmf,
    n: usize,
    space1: WordSpace,
    space2: WordSpace,
}

impl BlockDistribution {
    pub fn new(base: JointPmf, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "blocklength must be at least 1".into(),
            ));
        }
        let space1 = WordSpace::new(base.field1, n)?;
        let space2 = WordSpace::new(base.field2, n)?;
        Ok(BlockDistribution {
            base,
            n,
            space1,
            space2,
        })
    }

    pub fn base(&self) -> &JointPmf {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space1(&self) -> WordSpace {
        self.space1
    }

    pub fn space2(&self) -> WordSpace {
        self.space2
    }

    /// ∏ₜ p(x₁ₜ, x₂ₜ).
    pub fn block_prob(&self, x1: &[u8], x2: &[u8]) -> Result<f64> {
        if x1.len() != self.n || x2.len() != self.n {
            return Err(Error::dims(format!(
                "block lengths ({}, {}) for n = {}",
                x1.len(),
                x2.len(),
                self.n
            )));
        }
        Ok(x1
            .iter()
            .zip(x2)
            .map(|(&a, &b)| self.base.prob(a, b))
            .product())
    }

    /// Block probability of a pair of indexed words.
    pub fn block_prob_index(&self, w1: u32, w2: u32) -> f64 {
        let (mut w1, mut w2) = (w1, w2);
        let (q1, q2) = (self.base.field1.q(), self.base.field2.q());
        let mut p = 1.0;
        for _ in 0..self.n {
            p *= self.base.prob((w1 % q1) as u8, (w2 % q2) as u8);
            w1 /= q1;
            w2 /= q2;
        }
        p
    }

    /// Number of block pairs, q₁ⁿ·q₂ⁿ.
    pub fn pair_space_size(&self) -> u128 {
        self.space1.size() as u128 * self.space2.size() as u128
    }

    /// Every block pair with positive probability, in index order, as
    /// `(w1, w2, p)`. Fails when the pair space exceeds `cap`.
    pub fn support(&self, cap: u128) -> Result<Vec<(u32, u32, f64)>> {
        ensure_cap("block pair space", self.pair_space_size(), cap)?;
        let (s1, s2) = (self.space1.size() as u32, self.space2.size() as u32);
        let mut out = Vec::new();
        for w1 in 0..s1 {
            for w2 in 0..s2 {
                let p = self.block_prob_index(w1, w2);
                if p > 0.0 {
                    out.push((w1, w2, p));
                }
            }
        }
        Ok(out)
    }

    /// Block probabilities of one terminal's marginal, indexed by word.
    pub fn marginal_block_probs(&self, terminal: usize, cap: u128) -> Result<Vec<f64>> {
        let (space, marg) = match terminal {
            0 => (self.space1, self.base.marginal1()),
            1 => (self.space2, self.base.marginal2()),
            _ => return Err(Error::InvalidParameter(format!("terminal {terminal}"))),
        };
        ensure_cap("single-terminal block space", space.size() as u128, cap)?;
        let q = space.field().q();
        Ok((0..space.size() as u32)
            .map(|w| {
                let mut w = w;
                let mut p = 1.0;
                for _ in 0..self.n {
                    p *= marg[(w % q) as usize];
                    w /= q;
                }
                p
            })
            .collect())
    }

    /// n i.i.d. draws from the base pmf.
    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R) -> (FieldVector, FieldVector) {
        // Validated at construction: nonnegative with unit mass.
        let dist = WeightedIndex::new(&self.base.table).expect("valid pmf");
        let q2 = self.base.field2.q() as usize;
        let mut x1 = Vec::with_capacity(self.n);
        let mut x2 = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let cell = dist.sample(rng);
            x1.push((cell / q2) as u8);
            x2.push((cell % q2) as u8);
        }
        (
            FieldVector::new(self.base.field1, x1).expect("residues in range"),
            FieldVector::new(self.base.field2, x2).expect("residues in range"),
        )
    }
}
