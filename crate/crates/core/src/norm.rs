//! Operator norms (largest singular value) and trace norms.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, FockVector};
use crate::operator::LinearOperator;

/// Dense SVD is used up to this many basis vectors.
pub const DENSE_THRESHOLD: usize = 2000;
pub const POWER_ITERATION_CAP: usize = 10_000;
pub const POWER_ITERATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactSvd,
    PowerIteration,
    TraceNormSvd,
}

impl std::fmt::Display for NormMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormMethod::ExactSvd => "exact-svd",
            NormMethod::PowerIteration => "power-iteration",
            NormMethod::TraceNormSvd => "trace-norm-svd",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub method: NormMethod,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    pub dense_threshold: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub method: Option<NormMethod>,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            dense_threshold: DENSE_THRESHOLD,
            max_iterations: POWER_ITERATION_CAP,
            tolerance: POWER_ITERATION_TOL,
            seed: 0,
            method: None,
        }
    }
}

/// Norm of the compression of `x` to `space` (headroom-evaluated).
pub fn operator_norm(x: &LinearOperator, space: &FockSpace) -> Result<NormReport> {
    operator_norm_with(x, space, &NormOptions::default())
}

pub fn operator_norm_with(
    x: &LinearOperator,
    space: &FockSpace,
    opts: &NormOptions,
) -> Result<NormReport> {
    let method = opts.method.unwrap_or(if space.total_dim() <= opts.dense_threshold {
        NormMethod::ExactSvd
    } else {
        NormMethod::PowerIteration
    });
    match method {
        NormMethod::PowerIteration => power_iteration(x, space, opts),
        _ => {
            let m = x.to_dense(space)?;
            Ok(NormReport {
                value: spectral_norm(&m),
                method: NormMethod::ExactSvd,
                iterations: 0,
                residual: 0.0,
            })
        }
    }
}

fn power_iteration(x: &LinearOperator, space: &FockSpace, opts: &NormOptions) -> Result<NormReport> {
    let xs = x.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let amps: Vec<C64> = (0..space.total_dim())
        .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let mut v = FockVector::from_amplitudes(space, amps)?;
    v = v.scaled(C64::new(1.0 / v.norm(), 0.0));
    let mut prev = f64::NAN;
    let mut drift = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let w = x.apply(&v)?;
        let u = xs.apply(&w)?;
        let rq = w.norm_sqr();
        let un = u.norm();
        if un == 0.0 {
            return Ok(NormReport { value: 0.0, method: NormMethod::PowerIteration, iterations: it, residual: 0.0 });
        }
        let residual = u.sub(&v.scaled(C64::new(rq, 0.0))).norm();
        drift = (rq - prev).abs();
        if drift <= opts.tolerance * rq.max(f64::MIN_POSITIVE) {
            return Ok(NormReport {
                value: rq.sqrt(),
                method: NormMethod::PowerIteration,
                iterations: it,
                residual: residual / rq.sqrt().max(f64::MIN_POSITIVE),
            });
        }
        prev = rq;
        v = u.scaled(C64::new(1.0 / un, 0.0));
    }
    Err(Error::NonConvergence { iterations: opts.max_iterations, drift })
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Sum of all singular values.
pub fn trace_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).iter().sum()
}

/// Singular values of a real symmetric matrix, descending: the absolute
/// eigenvalues, without computing eigenvectors.
pub fn symmetric_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().symmetric_eigenvalues().iter().map(|l| l.abs()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Trace norm of a real symmetric matrix via its eigenvalues.
pub fn symmetric_trace_norm(m: &DMatrix<f64>) -> f64 {
    symmetric_singular_values(m).iter().sum()
}

// The singular vectors of nalgebra's complex SVD can be inaccurate on
// rank-deficient inputs (reconstruction errors of order 1e-2 observed), so
// bases and polar factors below come from QR and Hermitian eigensolvers.

/// Orthonormal basis of the column span of `m`, from Householder QR with
/// column pivoting. Pivots below `rel_tol` times the largest are treated as
/// zero.
pub fn column_span_basis(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let pivots: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|k| r[(k, k)].norm()).collect();
    let top = pivots.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let rank = pivots.iter().take_while(|p| **p > rel_tol * top).count();
    qr.q().columns(0, rank).into_owned()
}

/// Polar factor `U V*` of `m = U Σ V*` on the part of the spectrum above
/// `rel_tol` times the largest singular value. Going through `m* m` leaves
/// singular values below about `1e-8` of the largest unresolved, so
/// `rel_tol` should stay above that.
pub fn polar_factor(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let (rows, cols) = m.shape();
    let mut out = DMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return out;
    }
    let eig = (m.adjoint() * m).symmetric_eigen();
    let smax = eig.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt();
    for (k, l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        if s > rel_tol * smax && s > 0.0 {
            let v = eig.eigenvectors.column(k);
            let mv = m * v;
            let u = &mv / C64::new(mv.norm(), 0.0);
            out += u * v.adjoint();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::unit_vector;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_and_zero_norms() {
        let s = FockSpace::new(2, 2).unwrap();
        assert!((operator_norm(&LinearOperator::identity(), &s).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&LinearOperator::zero(), &s).unwrap().value, 0.0);
    }

    #[test]
    fn creation_norm_is_vector_norm() {
        let s = FockSpace::new(2, 3).unwrap();
        let xi = vec![C64::new(0.6, 0.3), C64::new(-1.2, 0.4)];
        let expect = crate::fock::vec_norm(&xi);
        let r = operator_norm(&LinearOperator::creation(&xi), &s).unwrap();
        assert!((r.value - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn power_iteration_agrees_with_dense() {
        let s = FockSpace::new(2, 4).unwrap();
        let a = LinearOperator::creation(&[c(1.0), c(0.5)]);
        let b = LinearOperator::annihilation(&unit_vector(2, 1));
        let x = a.add(&b.scale(c(2.0))).unwrap();
        let exact = operator_norm(&x, &s).unwrap();
        let opts = NormOptions { method: Some(NormMethod::PowerIteration), ..Default::default() };
        let pow = operator_norm_with(&x, &s, &opts).unwrap();
        assert_eq!(pow.method, NormMethod::PowerIteration);
        assert!(pow.value <= exact.value + pow.residual + 1e-12);
        assert!((pow.value - exact.value).abs() < 1e-6 * exact.value);
    }

    #[test]
    fn power_iteration_reports_non_convergence() {
        let s = FockSpace::new(2, 3).unwrap();
        let x = LinearOperator::creation(&[c(1.0), c(0.5)]).add(&LinearOperator::annihilation(&[c(0.3), c(1.0)])).unwrap();
        let opts = NormOptions { method: Some(NormMethod::PowerIteration), max_iterations: 2, ..Default::default() };
        assert!(matches!(operator_norm_with(&x, &s, &opts), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn trace_norm_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(0.0)]);
        assert!((trace_norm(&m) - 5f64.sqrt()).abs() < 1e-12);
        let id = DMatrix::<C64>::identity(7, 7);
        assert!((trace_norm(&id) - 7.0).abs() < 1e-12);
        let u = nalgebra::DVector::from_vec(vec![C64::new(1.0, 1.0), c(2.0), C64::new(0.0, -0.5)]);
        let uu = &u * u.adjoint();
        assert!((trace_norm(&uu) - u.norm_squared()).abs() < 1e-12);
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!((symmetric_trace_norm(&r) - 5f64.sqrt()).abs() < 1e-12);
    }

    /// Rank-2 columns confined to two coordinates of an 8-dimensional space,
    /// the shape on which the complex SVD returned inaccurate vectors.
    fn confined(seed: u64) -> DMatrix<C64> {
        let mut r = crate::random::rng(seed);
        let a = crate::random::complex_matrix(&mut r, 2, 4);
        let mut m = DMatrix::zeros(8, 4);
        for j in 0..4 {
            m[(4, j)] = a[(0, j)];
            m[(6, j)] = a[(1, j)];
        }
        m
    }

    #[test]
    fn span_basis_on_rank_deficient_input() {
        for seed in 0..50 {
            let m = confined(seed);
            let q = column_span_basis(&m, 1e-10);
            assert_eq!(q.ncols(), 2);
            assert!((q.adjoint() * &q - DMatrix::<C64>::identity(2, 2)).norm() < 1e-14);
            assert!((&q * q.adjoint() * &m - &m).norm() < 1e-13 * m.norm());
        }
        assert_eq!(column_span_basis(&DMatrix::zeros(3, 2), 1e-10).ncols(), 0);
    }

    #[test]
    fn polar_factor_attains_trace_norm() {
        for seed in 0..50 {
            let m = confined(seed);
            let w = polar_factor(&m, 1e-6);
            let pairing: C64 = (w.adjoint() * &m).trace();
            assert!((pairing.re - trace_norm(&m)).abs() < 1e-12 * trace_norm(&m));
            assert!(spectral_norm(&w) < 1.0 + 1e-12);
        }
    }
}
