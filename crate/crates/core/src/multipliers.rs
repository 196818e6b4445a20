//! Radial multipliers `m_φ(W(ξ)) = φ(|ξ|) W(ξ)` and their cb norms.
//!
//! A radial function is stored as `φ(n) = c1 + c2 (-1)^n + ψ(n)` with `ψ`
//! finitely supported. Its cb norm is `|c1| + |c2| + ‖B‖₁` where
//! `B[i][j] = ψ(i+j) - ψ(i+j+2)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, FockVector};
use crate::norm::{polar_factor, spectral_norm, symmetric_singular_values, symmetric_trace_norm, trace_norm, NormMethod, NormReport};
use crate::operator::LinearOperator;
use crate::random::{complex_normal, rng};

/// Upper limit of the Haagerup net search.
pub const HAAGERUP_SEARCH_CAP: usize = 10_000;
/// Tolerance for the vanishing of `ψ` at the end of a declared range.
pub const TAIL_TOLERANCE: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct RadialSymbol {
    pub c1: C64,
    pub c2: C64,
    psi: Vec<C64>,
}

impl RadialSymbol {
    pub fn new(c1: C64, c2: C64, psi: Vec<C64>) -> Self {
        RadialSymbol { c1, c2, psi }
    }

    /// Finitely supported `φ` given by its values.
    pub fn finite(values: Vec<C64>) -> Self {
        RadialSymbol::new(ZERO, ZERO, values)
    }

    pub fn real_finite(values: &[f64]) -> Self {
        RadialSymbol::finite(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        RadialSymbol::new(c, ZERO, Vec::new())
    }

    pub fn alternating(c: C64) -> Self {
        RadialSymbol::new(ZERO, c, Vec::new())
    }

    /// `δ_{n,k}`.
    pub fn delta(k: usize) -> Self {
        let mut psi = vec![ZERO; k + 1];
        psi[k] = ONE;
        RadialSymbol::finite(psi)
    }

    /// `δ_{≤d}`, the symbol of the projection onto words of length `≤ d`.
    pub fn cutoff_projection(d: usize) -> Self {
        RadialSymbol::finite(vec![ONE; d + 1])
    }

    /// `ψ_t(k) = e^{-kt}` for `k < ceil(30/t)`, so the Hankel matrix has size
    /// `ceil(30/t)` and the dropped tail starts at `e^{-30}`.
    pub fn geometric(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Precondition(format!("geometric symbol needs t > 0 (got {t})")));
        }
        let size = (30.0 / t).ceil() as usize;
        Ok(RadialSymbol::geometric_cut(t, size.max(1) - 1))
    }

    /// `ψ_t · δ_{≤d}`.
    pub fn geometric_cut(t: f64, d: usize) -> Self {
        RadialSymbol::finite((0..=d).map(|k| C64::new((-(k as f64) * t).exp(), 0.0)).collect())
    }

    pub fn psi(&self) -> &[C64] {
        &self.psi
    }

    /// Largest `n` with `ψ(n) != 0`, or `None` if `ψ = 0`.
    pub fn support_bound(&self) -> Option<usize> {
        self.psi.iter().rposition(|v| *v != ZERO)
    }

    pub fn psi_at(&self, n: usize) -> C64 {
        self.psi.get(n).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, n: usize) -> C64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        self.c1 + self.c2 * sign + self.psi_at(n)
    }

    pub fn is_real(&self) -> bool {
        self.c1.im == 0.0 && self.c2.im == 0.0 && self.psi.iter().all(|v| v.im == 0.0)
    }

    pub fn scale(&self, c: C64) -> Self {
        RadialSymbol::new(self.c1 * c, self.c2 * c, self.psi.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.psi.len().max(other.psi.len());
        RadialSymbol::new(
            self.c1 + other.c1,
            self.c2 + other.c2,
            (0..n).map(|k| self.psi_at(k) + other.psi_at(k)).collect(),
        )
    }

    /// Pointwise product `φρ`.
    pub fn times(&self, other: &Self) -> Self {
        let c1 = self.c1 * other.c1 + self.c2 * other.c2;
        let c2 = self.c1 * other.c2 + self.c2 * other.c1;
        let n = self.psi.len().max(other.psi.len());
        let psi = (0..n).map(|k| self.eval(k) * other.eval(k) - c1 - c2 * if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        RadialSymbol::new(c1, c2, psi)
    }
}

/// A complex number given either as a real or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Scalar> for C64 {
    fn from(s: Scalar) -> C64 {
        match s {
            Scalar::Real(r) => C64::new(r, 0.0),
            Scalar::Pair([re, im]) => C64::new(re, im),
        }
    }
}

/// JSON form of a radial function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Finite { values: Vec<Scalar> },
    Geometric { t: f64 },
    CutoffProjection { d: usize },
    General { c1: Scalar, c2: Scalar, psi: Vec<Scalar> },
}

impl PhiSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_symbol(&self) -> Result<RadialSymbol> {
        let conv = |v: &[Scalar]| v.iter().map(|&s| C64::from(s)).collect::<Vec<_>>();
        let all_finite = |v: &[C64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        let sym = match self {
            PhiSpec::Finite { values } => RadialSymbol::finite(conv(values)),
            PhiSpec::Geometric { t } => RadialSymbol::geometric(*t)?,
            PhiSpec::CutoffProjection { d } => RadialSymbol::cutoff_projection(*d),
            PhiSpec::General { c1, c2, psi } => RadialSymbol::new((*c1).into(), (*c2).into(), conv(psi)),
        };
        if !all_finite(&sym.psi) || !all_finite(&[sym.c1, sym.c2]) {
            return Err(Error::InvalidInput("φ contains non-finite values".into()));
        }
        Ok(sym)
    }
}

/// Declared behaviour of `φ` beyond the supplied values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    Zero,
    ConstantAlternating { c1: C64, c2: C64 },
}

pub fn decompose_phi(values: &[C64], tail: Tail) -> Result<RadialSymbol> {
    match tail {
        Tail::Zero => Ok(RadialSymbol::finite(values.to_vec())),
        Tail::ConstantAlternating { c1, c2 } => {
            let psi: Vec<C64> = values
                .iter()
                .enumerate()
                .map(|(n, v)| v - c1 - c2 * if n % 2 == 0 { 1.0 } else { -1.0 })
                .collect();
            if let Some((index, last)) = psi.iter().enumerate().last() {
                if last.norm() > TAIL_TOLERANCE {
                    return Err(Error::InconsistentTail { index, value: last.norm() });
                }
            }
            Ok(RadialSymbol::new(c1, c2, psi))
        }
    }
}

#[derive(Clone, Debug)]
pub struct HankelData {
    pub size: usize,
    pub matrix: DMatrix<C64>,
    pub trace_norm: f64,
    /// Set when `size` does not cover the support of `ψ`.
    pub truncated: bool,
}

fn hankel_entries(s: &RadialSymbol, size: usize) -> DMatrix<C64> {
    DMatrix::from_fn(size, size, |i, j| s.psi_at(i + j) - s.psi_at(i + j + 2))
}

/// Trace norm of the Hankel matrix, via the symmetric eigenproblem when real.
fn hankel_trace_norm(s: &RadialSymbol, m: &DMatrix<C64>) -> f64 {
    if s.is_real() {
        symmetric_trace_norm(&m.map(|z| z.re))
    } else {
        trace_norm(m)
    }
}

pub fn hankel_matrix(s: &RadialSymbol, size: usize) -> HankelData {
    let matrix = hankel_entries(s, size);
    let truncated = s.support_bound().is_some_and(|n| size < n + 1);
    let trace_norm = hankel_trace_norm(s, &matrix);
    HankelData { size, matrix, trace_norm, truncated }
}

/// Size of `B` that captures the whole support of `ψ`.
pub fn full_hankel_size(s: &RadialSymbol) -> usize {
    s.support_bound().map_or(0, |n| n + 1)
}

pub fn radial_norm(s: &RadialSymbol) -> NormReport {
    let b = hankel_matrix(s, full_hankel_size(s));
    NormReport {
        value: s.c1.norm() + s.c2.norm() + b.trace_norm,
        method: NormMethod::TraceNormSvd,
        iterations: 0,
        residual: 0.0,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PdNormReport {
    pub d: usize,
    pub norm: NormReport,
    pub asymptote: f64,
    /// `norm / asymptote`, undefined at `d = 0`.
    pub ratio: Option<f64>,
}

pub fn projection_pd_norm(d: usize) -> PdNormReport {
    let norm = radial_norm(&RadialSymbol::cutoff_projection(d));
    let asymptote = 4.0 * d as f64 / PI;
    let ratio = (d > 0).then(|| norm.value / asymptote);
    PdNormReport { d, norm, asymptote, ratio }
}

/// `{|1 + e^{2πik/(d+1)}|}` sorted descending.
pub fn circulant_reference(d: usize) -> Vec<f64> {
    let m = (d + 1) as f64;
    let mut v: Vec<f64> = (0..=d).map(|k| (C64::new(1.0, 0.0) + C64::from_polar(1.0, 2.0 * PI * k as f64 / m)).norm()).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Largest gap between the singular values of `B + e_{d,d}` (for `δ_{≤d}`)
/// and [`circulant_reference`].
pub fn circulant_deviation(d: usize) -> f64 {
    let mut b = hankel_entries(&RadialSymbol::cutoff_projection(d), d + 1).map(|z| z.re);
    b[(d, d)] += 1.0;
    symmetric_singular_values(&b)
        .iter()
        .zip(circulant_reference(d))
        .map(|(a, r)| (a - r).abs())
        .fold(0.0, f64::max)
}

/// Scales the degree-`n` block of `xi` by `φ(n)`.
pub fn apply_radial_multiplier(s: &RadialSymbol, xi: &FockVector) -> FockVector {
    let mut out = xi.clone();
    for n in 0..=xi.space().max_degree() {
        let f = s.eval(n);
        for a in out.block_mut(n) {
            *a *= f;
        }
    }
    out
}

/// The same multiplier as an operator on the Fock space.
pub fn radial_multiplier_operator(s: &RadialSymbol) -> LinearOperator {
    let tail = s.support_bound().map_or(0, |n| n + 1);
    LinearOperator::degree_scaling((0..tail).map(|n| s.eval(n)).collect(), s.c1 + s.c2, s.c1 - s.c2)
}

/// `S(m) = Σ_{j=1}^m 2 sin((2j-1)π/(4m+2))`, the trace norm of the `m × m`
/// matrix `I - Z²` restricted to one parity class.
fn half_sum(m: usize) -> f64 {
    let den = (4 * m + 2) as f64;
    (1..=m).map(|j| 2.0 * ((2 * j - 1) as f64 * PI / den).sin()).sum()
}

/// `‖P_{k+1} - P_k‖_cb = ‖m_{δ_k}‖_cb` in closed form.
pub fn delta_norm_closed_form(k: usize) -> f64 {
    half_sum((k + 2) / 2) + half_sum((k + 1) / 2)
}

#[derive(Clone, Debug, Serialize)]
pub struct HaagerupReport {
    pub n: usize,
    pub t: f64,
    pub d: usize,
    pub certificate: f64,
    /// Certificates at `d, d+1, ..., d+5`.
    pub tail_certificates: Vec<f64>,
    pub tail_nonincreasing: bool,
    /// `1 + Σ_{k>d} e^{-kt} ‖P_{k+1} - P_k‖_cb`.
    pub telescoping_bound: f64,
}

fn telescoping_bound(t: f64, d: usize) -> f64 {
    let mut sum = 0.0;
    for k in d + 1.. {
        let term = (-(k as f64) * t).exp() * delta_norm_closed_form(k);
        sum += term;
        if term < 1e-17 * sum.max(1e-300) || term == 0.0 {
            break;
        }
    }
    1.0 + sum
}

/// Finds the first `d` past the peak from which every
/// `‖m_{ψ_t δ_{≤d'}}‖_cb`, `d' >= d`, stays below `1 + 1/n`, with `t = 1/n`.
///
/// Small `d` are excluded by a hump: `δ_{≤0}` already has norm 1 but the
/// certificates then rise above 1 before decaying. The telescoping bound is
/// decreasing in `d`, so once it drops below the target every larger `d` is
/// certified and the scan can stop.
pub fn haagerup_net(n: usize) -> Result<HaagerupReport> {
    if n == 0 {
        return Err(Error::Precondition("haagerup_net needs n >= 1".into()));
    }
    let t = 1.0 / n as f64;
    let target = 1.0 + 1.0 / n as f64;
    let horizon = (0..=HAAGERUP_SEARCH_CAP)
        .find(|&d| telescoping_bound(t, d) <= target)
        .ok_or_else(|| {
            Error::SearchCap(format!(
                "telescoping bound stays above {target} for d <= {HAAGERUP_SEARCH_CAP} at t = {t}"
            ))
        })?;
    let certs: Vec<f64> =
        (0..=horizon + 5).map(|d| radial_norm(&RadialSymbol::geometric_cut(t, d)).value).collect();
    let peak = (0..=horizon).fold(0, |best, d| if certs[d] > certs[best] { d } else { best });
    let last_bad = (0..horizon).rev().find(|&d| certs[d] > target);
    let d = last_bad.map_or(0, |b| b + 1).max(peak);
    let tail_certificates: Vec<f64> = if d + 5 < certs.len() {
        certs[d..=d + 5].to_vec()
    } else {
        (d..=d + 5).map(|k| radial_norm(&RadialSymbol::geometric_cut(t, k)).value).collect()
    };
    let tail_nonincreasing = tail_certificates.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(HaagerupReport {
        n,
        t,
        d,
        certificate: tail_certificates[0],
        tail_certificates,
        tail_nonincreasing,
        telescoping_bound: telescoping_bound(t, d),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ToeplitzWitness {
    /// Largest `|γ(x)|/‖x‖` over all candidates.
    pub best: f64,
    /// Largest ratio among the random candidates alone.
    pub best_random: f64,
    pub trials: usize,
    pub radial_norm: f64,
}

/// Lower-bound witnesses for `‖γ‖` over the Toeplitz algebra.
///
/// The shift `S` is the creation operator on `F(C)` truncated at degree
/// `N + 1`. Candidates are `x = a·1 + Σ K_ij (S^i S*^j - S^{i+1} S*^{j+1})`
/// with `i, j ≤ N`. The bracket is the matrix unit `e_ij` on `ℓ²(N)`, so the
/// truncation computes `‖x‖` exactly and `γ(x) = a φ(0) + Σ K_ij B_ij`. One
/// candidate is the polar witness `K = conj(U V*)` of `B`; the others are
/// random with random window size and rank.
pub fn toeplitz_lower_bound(s: &RadialSymbol, big_n: usize, trials: usize, seed: u64) -> Result<ToeplitzWitness> {
    let need = full_hankel_size(s).saturating_sub(1);
    if big_n < need {
        return Err(Error::Precondition(format!("N = {big_n} is below the support bound {need}")));
    }
    let size = big_n + 1;
    let space = FockSpace::new(1, size)?;
    let shift = LinearOperator::creation(&[ONE]);
    let power = |op: &LinearOperator, k: usize| -> Result<LinearOperator> {
        LinearOperator::product(vec![op.clone(); k])
    };
    let mut units = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let a = power(&shift, i)?.compose(&power(&shift.adjoint(), j)?)?;
            let b = power(&shift, i + 1)?.compose(&power(&shift.adjoint(), j + 1)?)?;
            units.push(a.sub(&b)?.to_dense(&space)?);
        }
    }
    let b = hankel_entries(s, size);
    let phi0 = s.eval(0);
    let total = space.total_dim();
    let ratio = |a: C64, k: &DMatrix<C64>| -> f64 {
        let mut x = DMatrix::<C64>::identity(total, total) * a;
        let mut gamma = a * phi0;
        for i in 0..size {
            for j in 0..size {
                let c = k[(i, j)];
                if c != ZERO {
                    x += &units[i * size + j] * c;
                    gamma += c * b[(i, j)];
                }
            }
        }
        let nx = spectral_norm(&x);
        if nx == 0.0 { 0.0 } else { gamma.norm() / nx }
    };

    let polar = polar_factor(&b, 1e-6).map(|z| z.conj());
    let mut best = ratio(ZERO, &polar).max(ratio(ONE, &DMatrix::zeros(size, size)));

    let mut r = rng(seed);
    let mut best_random: f64 = 0.0;
    for _ in 0..trials {
        let w = r.random_range(1..=size);
        let rank = r.random_range(1..=w);
        let left = DMatrix::from_fn(w, rank, |_, _| complex_normal(&mut r));
        let right = DMatrix::from_fn(rank, w, |_, _| complex_normal(&mut r));
        let mut k = DMatrix::zeros(size, size);
        k.view_mut((0, 0), (w, w)).copy_from(&(left * right));
        let a = if r.random_bool(0.5) { complex_normal(&mut r) } else { ZERO };
        best_random = best_random.max(ratio(a, &k));
    }
    best = best.max(best_random);
    Ok(ToeplitzWitness { best, best_random, trials, radial_norm: radial_norm(s).value })
}
