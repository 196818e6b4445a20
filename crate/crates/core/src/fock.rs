//! Truncated full Fock space `C Ω ⊕ H ⊕ H^{⊗2} ⊕ ... ⊕ H^{⊗L}` over `H = C^d`.
//!
//! Basis words are enumerated graded-lexicographically: all words of length 0
//! (the vacuum), then length 1 in letter order, then length 2, and so on. The
//! first letter of a word is the most significant digit, so the degree-`n`
//! block is a row-major `d × d^{n-1}` array indexed by (first letter, rest).
//! Letters are zero-based.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default bound on the number of amplitudes a single space may hold.
pub const DEFAULT_CAPACITY: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    dim: usize,
    max_degree: usize,
    /// `offsets[n]` is the index of the first word of length `n`; one extra
    /// trailing entry holds `total_dim`.
    offsets: Vec<usize>,
}

impl FockSpace {
    pub fn new(dim: usize, max_degree: usize) -> Result<Self> {
        Self::with_capacity(dim, max_degree, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(dim: usize, max_degree: usize, capacity: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("Fock space needs dim >= 1".into()));
        }
        let mut offsets = Vec::with_capacity(max_degree + 2);
        let mut total: u128 = 0;
        let mut block: u128 = 1;
        for _ in 0..=max_degree {
            offsets.push(total as usize);
            total += block;
            if total > capacity as u128 {
                let mut full = total;
                let mut b = block;
                for _ in offsets.len()..=max_degree {
                    b = b.saturating_mul(dim as u128);
                    full = full.saturating_add(b);
                }
                return Err(Error::Capacity { total_dim: full, budget: capacity });
            }
            block *= dim as u128;
        }
        offsets.push(total as usize);
        Ok(FockSpace { dim, max_degree, offsets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn total_dim(&self) -> usize {
        self.offsets[self.max_degree + 1]
    }

    pub fn block_range(&self, degree: usize) -> Range<usize> {
        self.offsets[degree]..self.offsets[degree + 1]
    }

    pub fn block_len(&self, degree: usize) -> usize {
        self.offsets[degree + 1] - self.offsets[degree]
    }

    /// Same alphabet, larger truncation.
    pub fn enlarged(&self, extra: usize) -> Result<FockSpace> {
        FockSpace::new(self.dim, self.max_degree + extra)
    }

    /// Same truncation, different alphabet size.
    pub fn with_dim(&self, dim: usize) -> Result<FockSpace> {
        FockSpace::new(dim, self.max_degree)
    }

    pub fn index_of(&self, word: &TensorWord) -> Option<usize> {
        let n = word.len();
        if n > self.max_degree || word.letters.iter().any(|&a| a >= self.dim) {
            return None;
        }
        let local = word.letters.iter().fold(0usize, |acc, &a| acc * self.dim + a);
        Some(self.offsets[n] + local)
    }

    pub fn word_at(&self, index: usize) -> TensorWord {
        assert!(index < self.total_dim(), "basis index out of range");
        let n = (0..=self.max_degree).find(|&n| index < self.offsets[n + 1]).unwrap();
        let mut local = index - self.offsets[n];
        let mut letters = vec![0; n];
        for slot in letters.iter_mut().rev() {
            *slot = local % self.dim;
            local /= self.dim;
        }
        TensorWord { letters }
    }

    pub fn degree_of(&self, index: usize) -> usize {
        (0..=self.max_degree).find(|&n| index < self.offsets[n + 1]).expect("index out of range")
    }

    pub fn words(&self) -> impl Iterator<Item = TensorWord> + '_ {
        (0..self.total_dim()).map(move |i| self.word_at(i))
    }
}

/// A basis word `e_{i1} ⊗ ... ⊗ e_{in}`; the empty word is the vacuum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TensorWord {
    pub letters: Vec<usize>,
}

impl TensorWord {
    pub fn new(letters: Vec<usize>) -> Self {
        TensorWord { letters }
    }

    pub fn vacuum() -> Self {
        TensorWord { letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for TensorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "Ω");
        }
        let parts: Vec<String> = self.letters.iter().map(|a| format!("e{}", a + 1)).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// Dense vector of amplitudes over the graded-lex basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    space: FockSpace,
    amps: Vec<C64>,
}

impl FockVector {
    pub fn zeros(space: &FockSpace) -> Self {
        FockVector { space: space.clone(), amps: vec![C64::new(0.0, 0.0); space.total_dim()] }
    }

    pub fn vacuum(space: &FockSpace) -> Self {
        Self::basis(space, 0)
    }

    pub fn basis(space: &FockSpace, index: usize) -> Self {
        let mut v = Self::zeros(space);
        v.amps[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_word(space: &FockSpace, word: &TensorWord) -> Result<Self> {
        let idx = space
            .index_of(word)
            .ok_or(Error::Degree { degree: word.len(), max_degree: space.max_degree() })?;
        Ok(Self::basis(space, idx))
    }

    pub fn from_amplitudes(space: &FockSpace, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), got: amps.len() });
        }
        Ok(FockVector { space: space.clone(), amps })
    }

    /// The elementary tensor `ξ1 ⊗ ... ⊗ ξn`.
    pub fn product(space: &FockSpace, factors: &[Vec<C64>]) -> Result<Self> {
        let n = factors.len();
        if n > space.max_degree() {
            return Err(Error::Degree { degree: n, max_degree: space.max_degree() });
        }
        for f in factors {
            if f.len() != space.dim() {
                return Err(Error::DimensionMismatch { expected: space.dim(), got: f.len() });
            }
        }
        let mut block = vec![C64::new(1.0, 0.0)];
        for f in factors.iter().rev() {
            let mut next = Vec::with_capacity(block.len() * f.len());
            for &a in f {
                next.extend(block.iter().map(|&b| a * b));
            }
            block = next;
        }
        let mut v = Self::zeros(space);
        v.amps[space.block_range(n)].copy_from_slice(&block);
        Ok(v)
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn block(&self, degree: usize) -> &[C64] {
        &self.amps[self.space.block_range(degree)]
    }

    pub fn block_mut(&mut self, degree: usize) -> &mut [C64] {
        let r = self.space.block_range(degree);
        &mut self.amps[r]
    }

    pub fn amplitude(&self, word: &TensorWord) -> C64 {
        self.space.index_of(word).map_or(C64::new(0.0, 0.0), |i| self.amps[i])
    }

    pub fn vacuum_amplitude(&self) -> C64 {
        self.amps[0]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        debug_assert_eq!(self.space, other.space);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Highest degree carrying a nonzero amplitude (0 for the zero vector).
    pub fn degree(&self) -> usize {
        (0..=self.space.max_degree())
            .rev()
            .find(|&n| self.block(n).iter().any(|a| a.norm_sqr() > 0.0))
            .unwrap_or(0)
    }

    pub fn scaled(&self, c: C64) -> FockVector {
        FockVector { space: self.space.clone(), amps: self.amps.iter().map(|a| a * c).collect() }
    }

    pub fn axpy(&mut self, c: C64, other: &FockVector) {
        debug_assert_eq!(self.space, other.space);
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    pub fn add(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.axpy(C64::new(1.0, 0.0), other);
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    pub fn distance(&self, other: &FockVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &FockVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Zero-pads into a space with the same alphabet and larger truncation.
    pub fn embed(&self, target: &FockSpace) -> Result<FockVector> {
        if target.dim() != self.space.dim() || target.max_degree() < self.space.max_degree() {
            return Err(Error::IncompatibleSpaces("embedding needs a larger truncation".into()));
        }
        let mut amps = self.amps.clone();
        amps.resize(target.total_dim(), C64::new(0.0, 0.0));
        Ok(FockVector { space: target.clone(), amps })
    }

    /// Orthogonal projection onto the degrees kept by `target`.
    pub fn compress(&self, target: &FockSpace) -> Result<FockVector> {
        if target.dim() != self.space.dim() || target.max_degree() > self.space.max_degree() {
            return Err(Error::IncompatibleSpaces("compression needs a smaller truncation".into()));
        }
        Ok(FockVector { space: target.clone(), amps: self.amps[..target.total_dim()].to_vec() })
    }

    /// Keeps only degrees `<= d`.
    pub fn truncate_degree(&self, d: usize) -> FockVector {
        let mut out = self.clone();
        if d < self.space.max_degree() {
            let start = self.space.block_range(d + 1).start;
            for a in &mut out.amps[start..] {
                *a = C64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// Standard inner product on `C^d`, conjugate-linear in the first slot.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn unit_vector(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[index] = C64::new(1.0, 0.0);
    v
}
