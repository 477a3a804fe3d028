//! One-time pad encryption with post-encryption affine compression.
//!
//! Terminal i sends `Cᵢ = φ̃ᵢ(Xᵢ ⊕ Kᵢ) = (Xᵢ ⊕ Kᵢ)Aᵢ ⊕ bᵢ`. The sink knows
//! both keys, strips the compressed keys `K̃ᵢ = KᵢAᵢ ⊕ bᵢ` from the
//! ciphertexts to recover the syndromes `X̃ᵢ = XᵢAᵢ`, and runs the joint
//! decoder on them.

use std::sync::OnceLock;

use rand::Rng;

use crate::codec::{build_decoder_table, AffineEncoderPair, DecoderTable, DecodingSet};
use crate::error::{Error, Result};
use crate::gf::{Field, FieldVector, WordSpace};
use crate::prob::BlockDistribution;

/// Largest per-terminal word space for which encryption lookup tables are
/// precomputed.
const LOOKUP_CAP: u128 = 1 << 24;

/// Shape of a two-terminal system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SystemDims {
    pub n: usize,
    pub m: [usize; 2],
    pub fields: [Field; 2],
}

impl SystemDims {
    pub fn word_space(&self, terminal: usize) -> WordSpace {
        WordSpace::new(self.fields[terminal], self.n).expect("validated at construction")
    }

    pub fn cipher_space(&self, terminal: usize) -> WordSpace {
        WordSpace::new(self.fields[terminal], self.m[terminal]).expect("validated at construction")
    }

    /// q₁^{m₁}·q₂^{m₂}.
    pub fn cipher_pairs(&self) -> u128 {
        self.cipher_space(0).size() as u128 * self.cipher_space(1).size() as u128
    }

    /// q₁ⁿ·q₂ⁿ, the number of key pairs (and of plaintext pairs).
    pub fn word_pairs(&self) -> u128 {
        self.word_space(0).size() as u128 * self.word_space(1).size() as u128
    }

    /// m₁ log₂ q₁ + m₂ log₂ q₂, the ciphertext pair's maximum entropy.
    pub fn cipher_bits(&self) -> f64 {
        self.cipher_bits_of(0) + self.cipher_bits_of(1)
    }

    pub fn cipher_bits_of(&self, terminal: usize) -> f64 {
        self.m[terminal] as f64 * self.fields[terminal].log2_order()
    }

    /// Rate of terminal i in bits per source symbol: (mᵢ/n)·log₂ qᵢ.
    /// Checks that `d` is over blocks of length n on this system's fields.
    pub fn ensure_compatible(&self, d: &BlockDistribution) -> Result<()> {
        if d.n() != self.n {
            return Err(Error::dims(format!(
                "distribution over blocks of length {} for n = {}",
                d.n(),
                self.n
            )));
        }
        self.fields[0].ensure_same(d.base().field1())?;
        self.fields[1].ensure_same(d.base().field2())
    }

    pub fn rate(&self, terminal: usize) -> f64 {
        self.cipher_bits_of(terminal) / self.n as f64
    }
}

/// An encryption map `Φᵢ(kᵢ, xᵢ)` for each terminal, on indexed words.
///
/// Each terminal sees only its own key and plaintext. The metrics in
/// [`crate::metrics`] accept any implementation, so arbitrary (including
/// deliberately broken) systems can be evaluated.
pub trait Encryptor: Sync {
    fn dims(&self) -> SystemDims;

    /// Ciphertext index produced by `terminal` from `key` and `plain`.
    fn encrypt_index(&self, terminal: usize, key: u32, plain: u32) -> u32;
}

/// Wraps a closure as an [`Encryptor`].
pub struct FnEncryptor<F> {
    dims: SystemDims,
    f: F,
}

impl<F> FnEncryptor<F>
where
    F: Fn(usize, u32, u32) -> u32 + Sync,
{
    pub fn new(dims: SystemDims, f: F) -> Self {
        FnEncryptor { dims, f }
    }
}

impl<F> Encryptor for FnEncryptor<F>
where
    F: Fn(usize, u32, u32) -> u32 + Sync,
{
    fn dims(&self) -> SystemDims {
        self.dims
    }

    fn encrypt_index(&self, terminal: usize, key: u32, plain: u32) -> u32 {
        (self.f)(terminal, key, plain)
    }
}

/// What a compressed word stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordRole {
    /// `Cᵢ`, sent over the public channel.
    Ciphertext,
    /// `X̃ᵢ = φᵢ(Xᵢ)`.
    CompressedSource,
    /// `K̃ᵢ = φ̃ᵢ(Kᵢ)`.
    CompressedKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedWord {
    pub role: WordRole,
    pub terminal: usize,
    pub word: FieldVector,
}

/// The affine cryptosystem (Φ₁, Φ₂, Ψ) with its minimum-entropy decoder.
#[derive(Debug)]
pub struct Cryptosystem {
    enc: AffineEncoderPair,
    table: DecoderTable,
    dims: SystemDims,
    words: [WordSpace; 2],
    lookup: [OnceLock<Option<Vec<u32>>>; 2],
}

impl Cryptosystem {
    pub fn new(enc: AffineEncoderPair) -> Result<Self> {
        let table = build_decoder_table(&enc)?;
        Ok(Self::with_table(enc, table))
    }

    /// A system whose decoder is the given table. Used to evaluate
    /// hand-modified decoders; no invariant of the table is checked here.
    pub fn with_table(enc: AffineEncoderPair, table: DecoderTable) -> Self {
        let dims = SystemDims {
            n: enc.n(),
            m: [enc.m(0), enc.m(1)],
            fields: [enc.field(0), enc.field(1)],
        };
        Cryptosystem {
            words: [dims.word_space(0), dims.word_space(1)],
            enc,
            table,
            dims,
            lookup: [OnceLock::new(), OnceLock::new()],
        }
    }

    pub fn encoders(&self) -> &AffineEncoderPair {
        &self.enc
    }

    pub fn table(&self) -> &DecoderTable {
        &self.table
    }

    pub fn decoding_set(&self) -> DecodingSet {
        self.table.decoding_set()
    }

    pub fn dims(&self) -> SystemDims {
        self.dims
    }

    fn check_word(&self, terminal: usize, w: &FieldVector, len: usize) -> Result<()> {
        if terminal > 1 {
            return Err(Error::InvalidParameter(format!("terminal {terminal}")));
        }
        self.dims.fields[terminal].ensure_same(w.field())?;
        if w.len() != len {
            return Err(Error::dims(format!(
                "word of length {} where {len} expected",
                w.len()
            )));
        }
        Ok(())
    }

    /// `Cᵢ = (xᵢ ⊕ kᵢ)Aᵢ ⊕ bᵢ`.
    pub fn encrypt(
        &self,
        terminal: usize,
        key: &FieldVector,
        plain: &FieldVector,
    ) -> Result<CompressedWord> {
        self.check_word(terminal, key, self.dims.n)?;
        self.check_word(terminal, plain, self.dims.n)?;
        let padded = plain.add(key)?;
        Ok(CompressedWord {
            role: WordRole::Ciphertext,
            terminal,
            word: self.enc.encode_affine(terminal, &padded)?,
        })
    }

    /// `K̃ᵢ = kᵢAᵢ ⊕ bᵢ`.
    pub fn compress_key(&self, terminal: usize, key: &FieldVector) -> Result<CompressedWord> {
        self.check_word(terminal, key, self.dims.n)?;
        Ok(CompressedWord {
            role: WordRole::CompressedKey,
            terminal,
            word: self.enc.encode_affine(terminal, key)?,
        })
    }

    /// `X̃ᵢ = xᵢAᵢ`.
    pub fn compress_source(&self, terminal: usize, plain: &FieldVector) -> Result<CompressedWord> {
        self.check_word(terminal, plain, self.dims.n)?;
        Ok(CompressedWord {
            role: WordRole::CompressedSource,
            terminal,
            word: self.enc.encode_linear(terminal, plain)?,
        })
    }

    /// `Ψ(k₁, k₂, c₁, c₂) = ψ(c₁ ⊖ K̃₁, c₂ ⊖ K̃₂)`.
    pub fn decrypt(
        &self,
        k1: &FieldVector,
        k2: &FieldVector,
        c1: &CompressedWord,
        c2: &CompressedWord,
    ) -> Result<(FieldVector, FieldVector)> {
        let mut syndromes = Vec::with_capacity(2);
        for (terminal, (k, c)) in [(k1, c1), (k2, c2)].into_iter().enumerate() {
            if c.role != WordRole::Ciphertext || c.terminal != terminal {
                return Err(Error::InvalidParameter(format!(
                    "expected ciphertext of terminal {terminal}, got {:?} of terminal {}",
                    c.role, c.terminal
                )));
            }
            self.check_word(terminal, &c.word, self.dims.m[terminal])?;
            let key_word = self.compress_key(terminal, k)?.word;
            syndromes.push(c.word.sub(&key_word)?);
        }
        self.table.decode(&syndromes[0], &syndromes[1])
    }

    /// Samples a plaintext pair and an independent key pair, encrypts and
    /// decrypts.
    pub fn roundtrip_trial<R: Rng + ?Sized>(
        &self,
        src: &BlockDistribution,
        keys: &BlockDistribution,
        rng: &mut R,
    ) -> Result<TrialOutcome> {
        self.dims.ensure_compatible(src)?;
        self.dims.ensure_compatible(keys)?;
        let (x1, x2) = src.sample_block(rng);
        let (k1, k2) = keys.sample_block(rng);
        let c1 = self.encrypt(0, &k1, &x1)?;
        let c2 = self.encrypt(1, &k2, &x2)?;
        let (y1, y2) = self.decrypt(&k1, &k2, &c1, &c2)?;
        Ok(TrialOutcome {
            success: y1 == x1 && y2 == x2,
            ciphertexts: (c1, c2),
        })
    }

    fn lookup(&self, terminal: usize) -> Option<&[u32]> {
        self.lookup[terminal]
            .get_or_init(|| self.enc.affine_image_table(terminal, LOOKUP_CAP).ok())
            .as_deref()
    }
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub success: bool,
    /// The words an eavesdropper observes.
    pub ciphertexts: (CompressedWord, CompressedWord),
}

impl Encryptor for Cryptosystem {
    fn dims(&self) -> SystemDims {
        self.dims
    }

    #[inline]
    fn encrypt_index(&self, terminal: usize, key: u32, plain: u32) -> u32 {
        let words = &self.words[terminal];
        let padded = words.add(plain, key);
        match self.lookup(terminal) {
            Some(table) => table[padded as usize],
            None => self
                .enc
                .encode_affine(terminal, &words.vector(padded))
                .expect("dimensions match")
                .index(),
        }
    }
}
