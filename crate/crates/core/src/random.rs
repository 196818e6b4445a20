//! Seeded random fixtures shared by the verification suites.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fock::{FockSpace, FockVector};

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn complex_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    (0..dim).map(|_| complex_normal(rng)).collect()
}

pub fn unit_complex_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v = complex_vector(rng, dim);
    let n = crate::fock::vec_norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

pub fn complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix.
pub fn unitary<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let qr = complex_matrix(rng, dim, dim).qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// `n` orthonormal vectors in `C^dim` (columns of a random unitary).
pub fn orthonormal_family<R: Rng>(rng: &mut R, dim: usize, n: usize) -> Vec<Vec<C64>> {
    let u = unitary(rng, dim);
    (0..n).map(|j| u.column(j).iter().copied().collect()).collect()
}

/// Random vector supported on degrees `<= max_degree` of `space`.
pub fn fock_vector<R: Rng>(rng: &mut R, space: &FockSpace, max_degree: usize) -> FockVector {
    let mut v = FockVector::zeros(space);
    let top = max_degree.min(space.max_degree());
    let end = space.block_range(top).end;
    for a in &mut v.amplitudes_mut()[..end] {
        *a = complex_normal(rng);
    }
    v
}
