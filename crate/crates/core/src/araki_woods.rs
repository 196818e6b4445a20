//! Finite almost-periodic free Araki-Woods model.
//!
//! The one-particle space `H = C^d` carries a positive diagonal generator `A`
//! built from eigenvalue pairs `(λ, 1/λ)` and trivial indices (eigenvalue 1).
//! `J` is complex conjugation followed by the swap inside each pair, and the
//! involution is `I = J A^{-1/2}`. Since everything is real apart from the
//! conjugation, `I ξ = S conj(ξ)` for a real matrix `S` with
//! `S e_i = a_i^{-1/2} e_{J(i)}`.
//!
//! Index layout: each pair occupies two consecutive indices `(+, -)` with
//! `A e_+ = λ e_+` and `A e_- = λ^{-1} e_-`; trivial indices come last.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{inner, vec_norm, FockSpace, FockVector, TensorWord};
use crate::operator::{vacuum_expectation, LinearOperator};

/// A symbol `xΩ` of an algebra element, stored as a Fock vector.
pub type Symbol = FockVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenPair {
    pub lambda: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub pairs: Vec<EigenPair>,
    pub trivial_dim: usize,
    pub max_degree: usize,
}

impl RepSpec {
    pub fn trivial(dim: usize, max_degree: usize) -> Self {
        RepSpec { pairs: Vec::new(), trivial_dim: dim, max_degree }
    }

    pub fn pairs(pairs: &[(f64, usize)], trivial_dim: usize, max_degree: usize) -> Self {
        RepSpec {
            pairs: pairs.iter().map(|&(lambda, multiplicity)| EigenPair { lambda, multiplicity }).collect(),
            trivial_dim,
            max_degree,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn dim(&self) -> usize {
        self.trivial_dim + 2 * self.pairs.iter().map(|p| p.multiplicity).sum::<usize>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairIndex {
    pub plus: usize,
    pub minus: usize,
    pub lambda: f64,
}

#[derive(Clone, Debug)]
pub struct RepModel {
    space: FockSpace,
    eigenvalues: Vec<f64>,
    partner: Vec<usize>,
    pairs: Vec<PairIndex>,
    trivial: Vec<usize>,
    kr_basis: Vec<Vec<C64>>,
}

/// Residuals of the structural identities of a model.
#[derive(Clone, Debug, Serialize)]
pub struct ModelInvariants {
    /// `max |JAJ - A^{-1}|`
    pub jaj: f64,
    /// `max |I∘I - Id|`
    pub involution_square: f64,
    /// `max |I*I - A^{-1}|` on the linear part
    pub involution_gram: f64,
    /// `max ‖Iξ - ξ‖` over the real basis of `K_R`
    pub fixed_points: f64,
}

impl ModelInvariants {
    pub fn max(&self) -> f64 {
        self.jaj.max(self.involution_square).max(self.involution_gram).max(self.fixed_points)
    }
}

pub fn build_model(spec: &RepSpec) -> Result<RepModel> {
    let mut eigenvalues = Vec::new();
    let mut partner = Vec::new();
    let mut pairs = Vec::new();
    for p in &spec.pairs {
        if !(p.lambda > 1.0) || !p.lambda.is_finite() {
            return Err(Error::Precondition(format!(
                "pair eigenvalue must satisfy λ > 1 (got {}); use trivial_dim for λ = 1",
                p.lambda
            )));
        }
        for _ in 0..p.multiplicity {
            let plus = eigenvalues.len();
            eigenvalues.extend([p.lambda, 1.0 / p.lambda]);
            partner.extend([plus + 1, plus]);
            pairs.push(PairIndex { plus, minus: plus + 1, lambda: p.lambda });
        }
    }
    let mut trivial = Vec::new();
    for _ in 0..spec.trivial_dim {
        let i = eigenvalues.len();
        eigenvalues.push(1.0);
        partner.push(i);
        trivial.push(i);
    }
    if eigenvalues.is_empty() {
        return Err(Error::Precondition("model needs dimension >= 1".into()));
    }
    let space = FockSpace::new(eigenvalues.len(), spec.max_degree)?;
    Ok(RepModel::assemble(space, eigenvalues, partner, pairs, trivial))
}

impl RepModel {
    fn assemble(
        space: FockSpace,
        eigenvalues: Vec<f64>,
        partner: Vec<usize>,
        pairs: Vec<PairIndex>,
        trivial: Vec<usize>,
    ) -> RepModel {
        let d = eigenvalues.len();
        let mut kr_basis = Vec::with_capacity(d);
        for p in &pairs {
            // ξ = a e_+ + λ^{-1/2} conj(a) e_- is fixed by I; take a = 1 and a = i.
            let s = p.lambda.powf(-0.5);
            let norm = (1.0 + s * s).sqrt();
            let mut re = vec![C64::new(0.0, 0.0); d];
            re[p.plus] = C64::new(1.0 / norm, 0.0);
            re[p.minus] = C64::new(s / norm, 0.0);
            let mut im = vec![C64::new(0.0, 0.0); d];
            im[p.plus] = C64::new(0.0, 1.0 / norm);
            im[p.minus] = C64::new(0.0, -s / norm);
            kr_basis.push(re);
            kr_basis.push(im);
        }
        for &i in &trivial {
            kr_basis.push(crate::fock::unit_vector(d, i));
        }
        RepModel { space, eigenvalues, partner, pairs, trivial, kr_basis }
    }

    /// `H ⊕ H` with `U_t ⊕ U_t`, the first copy on indices `0..d`.
    pub fn doubled(&self) -> Result<RepModel> {
        let d = self.dim();
        let mut eigenvalues = self.eigenvalues.clone();
        eigenvalues.extend_from_slice(&self.eigenvalues);
        let mut partner = self.partner.clone();
        partner.extend(self.partner.iter().map(|p| p + d));
        let mut pairs = self.pairs.clone();
        pairs.extend(self.pairs.iter().map(|p| PairIndex { plus: p.plus + d, minus: p.minus + d, lambda: p.lambda }));
        let mut trivial = self.trivial.clone();
        trivial.extend(self.trivial.iter().map(|t| t + d));
        let space = FockSpace::new(2 * d, self.max_degree())?;
        Ok(RepModel::assemble(space, eigenvalues, partner, pairs, trivial))
    }

    pub fn with_max_degree(&self, max_degree: usize) -> Result<RepModel> {
        let mut m = self.clone();
        m.space = FockSpace::new(self.dim(), max_degree)?;
        Ok(m)
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_degree(&self) -> usize {
        self.space.max_degree()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn pairs(&self) -> &[PairIndex] {
        &self.pairs
    }

    pub fn trivial_indices(&self) -> &[usize] {
        &self.trivial
    }

    /// Index swapped with `i` by `J`.
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    /// Real basis of `K_R`, each vector of unit norm in `H`.
    pub fn kr_basis(&self) -> &[Vec<C64>] {
        &self.kr_basis
    }

    /// The generator `A` as a diagonal matrix.
    pub fn generator(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues))
    }

    /// Permutation matrix of the linear part of `J`.
    pub fn swap_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| if self.partner[j] == i { 1.0 } else { 0.0 })
    }

    /// Real matrix `S` with `I ξ = S conj(ξ)`.
    pub fn involution_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            if self.partner[j] == i {
                self.eigenvalues[j].powf(-0.5)
            } else {
                0.0
            }
        })
    }

    pub fn conjugation_apply(&self, xi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); xi.len()];
        for (i, x) in xi.iter().enumerate() {
            out[self.partner[i]] = x.conj();
        }
        out
    }

    /// `U_t = A^{it}` as a diagonal unitary.
    pub fn modular_unitary(&self, t: f64) -> DMatrix<C64> {
        let diag: Vec<C64> =
            self.eigenvalues.iter().map(|a| C64::from_polar(1.0, t * a.ln())).collect();
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
    }

    pub fn in_kr(&self, xi: &[C64], tol: f64) -> bool {
        let ix = involution_apply(self, xi);
        ix.iter().zip(xi).all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn invariants(&self) -> ModelInvariants {
        let a = self.generator();
        let p = self.swap_matrix();
        let a_inv = a.map(|x| if x != 0.0 { 1.0 / x } else { 0.0 });
        let jaj = (&p * &a * &p - &a_inv).amax();
        let s = self.involution_matrix();
        let d = self.dim();
        let involution_square = (&s * &s - DMatrix::<f64>::identity(d, d)).amax();
        let involution_gram = (s.transpose() * &s - &a_inv).amax();
        let fixed_points = self
            .kr_basis
            .iter()
            .map(|v| {
                let iv = involution_apply(self, v);
                iv.iter().zip(v).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        ModelInvariants { jaj, involution_square, involution_gram, fixed_points }
    }
}

/// `ē = I(e)`, conjugate-linear.
pub fn involution_apply(model: &RepModel, xi: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); xi.len()];
    for (i, x) in xi.iter().enumerate() {
        out[model.partner[i]] = x.conj() * model.eigenvalues[i].powf(-0.5);
    }
    out
}

fn check_dim(model: &RepModel, xi: &[C64]) -> Result<()> {
    if xi.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: xi.len() });
    }
    Ok(())
}

/// `W(ξ) = ℓ(ξ) + ℓ(Iξ)*`.
pub fn field_operator(model: &RepModel, xi: &[C64]) -> Result<LinearOperator> {
    check_dim(model, xi)?;
    LinearOperator::creation(xi).add(&LinearOperator::annihilation(&involution_apply(model, xi)))
}

/// Wick expansion `Σ_k ℓ(e_1)···ℓ(e_k) ℓ(ē_{k+1})*···ℓ(ē_n)*` of
/// `W(e_1 ⊗ ··· ⊗ e_n)`.
pub fn wick_operator(model: &RepModel, letters: &[Vec<C64>]) -> Result<LinearOperator> {
    let n = letters.len();
    if n > model.max_degree() {
        return Err(Error::Degree { degree: n, max_degree: model.max_degree() });
    }
    for e in letters {
        check_dim(model, e)?;
    }
    if n == 0 {
        return Ok(LinearOperator::identity());
    }
    let creators: Vec<LinearOperator> = letters.iter().map(|e| LinearOperator::creation(e)).collect();
    let annihilators: Vec<LinearOperator> = letters
        .iter()
        .map(|e| LinearOperator::annihilation(&involution_apply(model, e)))
        .collect();
    let terms = (0..=n)
        .map(|k| {
            let mut factors = creators[..k].to_vec();
            factors.extend_from_slice(&annihilators[k..]);
            LinearOperator::product(factors)
        })
        .collect::<Result<Vec<_>>>()?;
    LinearOperator::sum(terms)
}

/// `W(e_{i1} ⊗ ··· ⊗ e_{in})` for a basis word.
pub fn wick_word_operator(model: &RepModel, word: &TensorWord) -> Result<LinearOperator> {
    let d = model.dim();
    let letters: Vec<Vec<C64>> = word.letters.iter().map(|&a| crate::fock::unit_vector(d, a)).collect();
    wick_operator(model, &letters)
}

/// `W(ξ) = Σ_w ξ_w W(w)` for a general symbol.
pub fn symbol_to_operator(model: &RepModel, xi: &FockVector) -> Result<LinearOperator> {
    if xi.space().dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: xi.space().dim() });
    }
    let mut terms = Vec::new();
    for (i, a) in xi.amplitudes().iter().enumerate() {
        if *a != C64::new(0.0, 0.0) {
            terms.push(wick_word_operator(model, &xi.space().word_at(i))?.scale(*a));
        }
    }
    LinearOperator::sum(terms)
}

/// `xΩ`.
pub fn operator_to_symbol(x: &LinearOperator, space: &FockSpace) -> Result<Symbol> {
    x.apply(&FockVector::vacuum(space))
}

/// `F(U_t) = 1 ⊕ ⊕ U_t^{⊗n}`.
pub fn modular_flow_operator(model: &RepModel, t: f64) -> LinearOperator {
    LinearOperator::tensor_power(model.modular_unitary(t))
}

/// Symbol of `σ_{-t}(W(ξ)) = F(U_t) W(ξ) F(U_t)*`, i.e. `F(U_t) ξ`.
pub fn modular_flow(model: &RepModel, t: f64, xi: &Symbol) -> Result<Symbol> {
    modular_flow_operator(model, t).apply(xi)
}

/// `F(U_t) x F(U_t)*`.
pub fn conjugate_by_flow(model: &RepModel, t: f64, x: &LinearOperator) -> Result<LinearOperator> {
    LinearOperator::product(vec![
        modular_flow_operator(model, t),
        x.clone(),
        modular_flow_operator(model, -t),
    ])
}

/// `χ(W(ξ)W(η))`, evaluated on the Fock space.
pub fn two_point(model: &RepModel, xi: &[C64], eta: &[C64]) -> Result<C64> {
    let x = field_operator(model, xi)?.compose(&field_operator(model, eta)?)?;
    vacuum_expectation(&x, model.space())
}

/// Closed form `⟨Iξ, η⟩` of the two-point function.
pub fn two_point_formula(model: &RepModel, xi: &[C64], eta: &[C64]) -> C64 {
    inner(&involution_apply(model, xi), eta)
}

/// `χ(W(ξ)^p)`.
pub fn field_moment(model: &RepModel, xi: &[C64], power: usize) -> Result<C64> {
    let w = field_operator(model, xi)?;
    let mut v = FockVector::vacuum(model.space());
    let big = model.space().enlarged(power.div_ceil(2))?;
    v = v.embed(&big)?;
    for _ in 0..power {
        v = w.apply_truncated(&v)?;
    }
    Ok(v.vacuum_amplitude())
}

/// `χ(W(ξ)^{2k})` for a unit vector `ξ ∈ K_R`.
pub fn semicircular_moment(model: &RepModel, xi: &[C64], k: usize) -> Result<f64> {
    check_dim(model, xi)?;
    if 2 * k > model.max_degree() {
        return Err(Error::Degree { degree: 2 * k, max_degree: model.max_degree() });
    }
    if !model.in_kr(xi, 1e-10) {
        return Err(Error::Precondition("moment vector must lie in K_R".into()));
    }
    if (vec_norm(xi) - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition("moment vector must be a unit vector".into()));
    }
    Ok(field_moment(model, xi, 2 * k)?.re)
}

/// Catalan numbers via Segner's recurrence.
pub fn catalan(k: usize) -> u64 {
    let mut c = vec![1u64; k + 1];
    for n in 1..=k {
        c[n] = (0..n).map(|i| c[i] * c[n - 1 - i]).sum();
    }
    c[k]
}
