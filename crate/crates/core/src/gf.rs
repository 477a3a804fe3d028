//! Prime-field arithmetic and dense linear algebra over GF(q).
//!
//! Residues are stored as `u8`, which bounds the modulus at 251. Vectors are
//! row vectors and matrices act on the right, so an encoder is `x ↦ xA`.
//! Besides the value types this module provides [`WordSpace`], the
//! bijection between words of a fixed length and integer indices that all
//! exhaustive enumeration loops in the crate run over.

use rand::Rng;

use crate::error::{Error, Result};

/// A prime field GF(q) with q ≤ 251.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    q: u8,
}

impl Field {
    pub const MAX_MODULUS: u32 = 251;

    pub fn new(q: u32) -> Result<Self> {
        if !(2..=Self::MAX_MODULUS).contains(&q) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Field { q: q as u8 })
    }

    #[inline]
    pub fn q(self) -> u32 {
        self.q as u32
    }

    /// log₂ q, the information content of one symbol.
    pub fn log2_order(self) -> f64 {
        (self.q as f64).log2()
    }

    pub fn check(self, value: u32) -> Result<u8> {
        if value < self.q() {
            Ok(value as u8)
        } else {
            Err(Error::ResidueOutOfRange { value, q: self.q() })
        }
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        ((a as u16 + b as u16) % self.q as u16) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.q as u16) as u8
    }

    /// Multiplicative inverse by Fermat's little theorem; `None` for zero.
    pub fn inv(self, a: u8) -> Option<u8> {
        if a == 0 {
            return None;
        }
        let mut result = 1u8;
        let mut base = a;
        let mut exp = self.q() - 2;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        Some(result)
    }

    pub fn ensure_same(self, other: Field) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                left: self.q(),
                right: other.q(),
            })
        }
    }
}

fn is_prime(q: u32) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// All words of length `len` over GF(q), indexed in lexicographic order.
///
/// The first symbol is the most significant digit, so comparing indices is
/// the same as comparing the words lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WordSpace {
    field: Field,
    len: usize,
    size: u64,
}

impl WordSpace {
    /// Largest word space that may be indexed (indices are `u32`).
    pub const MAX_SIZE: u64 = 1 << 31;

    pub fn new(field: Field, len: usize) -> Result<Self> {
        let size = (field.q() as u128)
            .checked_pow(len as u32)
            .unwrap_or(u128::MAX);
        crate::error::ensure_cap("word space", size, Self::MAX_SIZE as u128)?;
        Ok(WordSpace {
            field,
            len,
            size: size as u64,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn index_of(&self, symbols: &[u8]) -> u32 {
        debug_assert_eq!(symbols.len(), self.len);
        let q = self.field.q();
        symbols.iter().fold(0u32, |acc, &s| acc * q + s as u32)
    }

    /// Writes the digits of `index` into `out` (most significant first).
    pub fn digits_into(&self, mut index: u32, out: &mut [u8]) {
        debug_assert_eq!(out.len(), self.len);
        let q = self.field.q();
        for slot in out.iter_mut().rev() {
            *slot = (index % q) as u8;
            index /= q;
        }
    }

    pub fn digits(&self, index: u32) -> Vec<u8> {
        let mut out = vec![0; self.len];
        self.digits_into(index, &mut out);
        out
    }

    pub fn vector(&self, index: u32) -> FieldVector {
        FieldVector {
            field: self.field,
            elems: self.digits(index),
        }
    }

    /// Symbol-wise field addition of two indexed words.
    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let q = self.field.q();
        if q == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut weight = 1u32;
        for _ in 0..self.len {
            let digit = (a % q + b % q) % q;
            out += digit * weight;
            weight *= q;
            a /= q;
            b /= q;
        }
        out
    }

    /// Symbol-wise field subtraction `a ⊖ b` of two indexed words.
    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        let q = self.field.q();
        if q == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut weight = 1u32;
        for _ in 0..self.len {
            let digit = (a % q + q - b % q) % q;
            out += digit * weight;
            weight *= q;
            a /= q;
            b /= q;
        }
        out
    }
}

/// A word over GF(q).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldVector {
    field: Field,
    elems: Vec<u8>,
}

impl FieldVector {
    pub fn new(field: Field, elems: Vec<u8>) -> Result<Self> {
        for &e in &elems {
            field.check(e as u32)?;
        }
        Ok(FieldVector { field, elems })
    }

    pub fn zeros(field: Field, len: usize) -> Self {
        FieldVector {
            field,
            elems: vec![0; len],
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.elems
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|&e| e == 0)
    }

    /// Lexicographic index of this word within its [`WordSpace`].
    pub fn index(&self) -> u32 {
        let q = self.field.q();
        self.elems.iter().fold(0u32, |acc, &s| acc * q + s as u32)
    }

    fn zip_with(
        &self,
        other: &FieldVector,
        op: impl Fn(Field, u8, u8) -> u8,
    ) -> Result<FieldVector> {
        self.field.ensure_same(other.field)?;
        if self.len() != other.len() {
            return Err(Error::dims(format!(
                "vector lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        let f = self.field;
        Ok(FieldVector {
            field: f,
            elems: self
                .elems
                .iter()
                .zip(&other.elems)
                .map(|(&a, &b)| op(f, a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &FieldVector) -> Result<FieldVector> {
        self.zip_with(other, Field::add)
    }

    pub fn sub(&self, other: &FieldVector) -> Result<FieldVector> {
        self.zip_with(other, Field::sub)
    }

    pub fn scale(&self, c: u8) -> FieldVector {
        let f = self.field;
        FieldVector {
            field: f,
            elems: self.elems.iter().map(|&e| f.mul(e, c)).collect(),
        }
    }
}

/// A dense row-major matrix over GF(q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl FieldMatrix {
    pub fn new(field: Field, rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        for &e in &entries {
            field.check(e as u32)?;
        }
        Ok(FieldMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(field: Field, rows: &[&[u8]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dims("ragged rows"));
        }
        Self::new(field, rows.len(), cols, rows.concat())
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// `x · A` on raw residues, written into `out` (length `cols`).
    #[inline]
    pub fn left_mul_into(&self, x: &[u8], out: &mut [u8]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        let q = self.field.q();
        let mut acc = [0u32; 64];
        let acc = if self.cols <= 64 {
            &mut acc[..self.cols]
        } else {
            return self.left_mul_into_slow(x, out);
        };
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0 {
                continue;
            }
            for (a, &e) in acc.iter_mut().zip(self.row(r)) {
                *a += xr as u32 * e as u32;
            }
        }
        for (o, a) in out.iter_mut().zip(acc.iter()) {
            *o = (a % q) as u8;
        }
    }

    fn left_mul_into_slow(&self, x: &[u8], out: &mut [u8]) {
        let f = self.field;
        out.fill(0);
        for (r, &xr) in x.iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.mul(xr, self.get(r, c)));
            }
        }
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.row_reduce().len()
    }

    /// Reduces `self` in place to reduced row echelon form and returns the
    /// pivot columns.
    fn row_reduce(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(p, row);
            let inv = f.inv(self.get(row, col)).expect("nonzero pivot");
            for c in 0..self.cols {
                let v = self.get(row, c);
                self.entries[row * self.cols + c] = f.mul(v, inv);
            }
            for r in 0..self.rows {
                let factor = self.get(r, col);
                if r == row || factor == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(row, c)));
                    self.entries[r * self.cols + c] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// A basis of the left kernel `{x : xA = 0}`.
    pub fn left_kernel_basis(&self) -> Vec<FieldVector> {
        let f = self.field;
        // xA = 0  <=>  Aᵀ xᵀ = 0
        let mut t = self.transpose();
        let pivots = t.row_reduce();
        let n = self.rows;
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u8; n];
                v[fc] = 1;
                for (pr, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(t.get(pr, fc));
                }
                FieldVector { field: f, elems: v }
            })
            .collect()
    }
}

/// Solves `xA = s` for a fixed surjective `A`, returning the solution whose
/// non-pivot coordinates are zero.
#[derive(Clone, Debug)]
pub struct LeftSolver {
    field: Field,
    n: usize,
    m: usize,
    /// `T` with `T Aᵀ = RREF(Aᵀ)`, stored row-major as m×m.
    transform: Vec<u8>,
    pivots: Vec<usize>,
}

impl LeftSolver {
    pub fn new(a: &FieldMatrix) -> Result<Self> {
        let (n, m) = (a.rows(), a.cols());
        let f = a.field();
        // Row-reduce [Aᵀ | I_m]; the right block accumulates T.
        let at = a.transpose();
        let mut aug = FieldMatrix::zeros(f, m, n + m);
        for r in 0..m {
            for c in 0..n {
                aug.entries[r * (n + m) + c] = at.get(r, c);
            }
            aug.entries[r * (n + m) + n + r] = 1;
        }
        let pivots: Vec<usize> = aug.row_reduce().into_iter().filter(|&c| c < n).collect();
        if pivots.len() != m {
            return Err(Error::NotSurjective {
                rank: pivots.len(),
                cols: m,
            });
        }
        let mut transform = vec![0u8; m * m];
        for r in 0..m {
            for c in 0..m {
                transform[r * m + c] = aug.get(r, n + c);
            }
        }
        Ok(LeftSolver {
            field: f,
            n,
            m,
            transform,
            pivots,
        })
    }

    /// Writes a particular solution of `xA = s` into `out`.
    pub fn solve_into(&self, s: &[u8], out: &mut [u8]) {
        debug_assert_eq!(s.len(), self.m);
        let f = self.field;
        out[..self.n].fill(0);
        for (r, &pc) in self.pivots.iter().enumerate() {
            let row = &self.transform[r * self.m..(r + 1) * self.m];
            let v = row
                .iter()
                .zip(s)
                .fold(0u8, |acc, (&t, &si)| f.add(acc, f.mul(t, si)));
            out[pc] = v;
        }
    }
}

/// Row vector times matrix over GF(q).
pub fn vec_mat_mul(x: &FieldVector, a: &FieldMatrix) -> Result<FieldVector> {
    x.field().ensure_same(a.field())?;
    if x.len() != a.rows() {
        return Err(Error::dims(format!(
            "vector of length {} times {}x{} matrix",
            x.len(),
            a.rows(),
            a.cols()
        )));
    }
    let mut out = vec![0u8; a.cols()];
    a.left_mul_into(x.as_slice(), &mut out);
    Ok(FieldVector {
        field: a.field(),
        elems: out,
    })
}

/// Draws an n×m matrix with i.i.d. uniform entries, resampling until it has
/// rank m so that `x ↦ xA` is onto GF(q)^m.
pub fn sample_surjective_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    field: Field,
) -> Result<FieldMatrix> {
    if m > n {
        return Err(Error::InvalidParameter(format!(
            "no surjective map from GF(q)^{n} onto GF(q)^{m}"
        )));
    }
    loop {
        let entries: Vec<u8> = (0..n * m)
            .map(|_| rng.random_range(0..field.q()) as u8)
            .collect();
        let a = FieldMatrix {
            field,
            rows: n,
            cols: m,
            entries,
        };
        if a.rank() == m {
            return Ok(a);
        }
    }
}
