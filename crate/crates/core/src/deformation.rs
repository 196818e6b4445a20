//! The malleable deformation on `H ⊕ H`: the rotations `α_s = Γ(V_s)`, the
//! flip `β = Γ(1 ⊕ -1)`, the projection onto first-copy words and the `S_n`
//! identities behind the lower bound for radial multipliers.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::araki_woods::{involution_apply, wick_operator, RepModel, Symbol};
use crate::bounds::{majf_check, MajfReport};
use crate::error::{Error, Result};
use crate::fock::{vec_norm, FockSpace, FockVector, TensorWord};
use crate::norm::operator_norm;
use crate::operator::{LinearOperator, TensorOperator, TensorVector};

#[derive(Clone, Debug)]
pub struct DoubledModel {
    pub base: RepModel,
    pub doubled: RepModel,
}

impl DoubledModel {
    pub fn new(base: &RepModel) -> Result<Self> {
        Ok(DoubledModel { base: base.clone(), doubled: base.doubled()? })
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// `ι₁ξ = ξ ⊕ 0`.
    pub fn iota1(&self, xi: &[C64]) -> Vec<C64> {
        let mut v = xi.to_vec();
        v.resize(2 * self.base_dim(), C64::new(0.0, 0.0));
        v
    }

    /// `ι₂ξ = 0 ⊕ ξ`.
    pub fn iota2(&self, xi: &[C64]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.base_dim()];
        v.extend_from_slice(xi);
        v
    }

    /// Embeds a symbol over `H` into the first-copy words over `H ⊕ H`.
    pub fn embed_first(&self, xi: &Symbol) -> Result<Symbol> {
        self.embed_copy(xi, 0)
    }

    /// Embeds a symbol over `H` into the second-copy words over `H ⊕ H`.
    pub fn embed_second(&self, xi: &Symbol) -> Result<Symbol> {
        self.embed_copy(xi, self.base_dim())
    }

    fn embed_copy(&self, xi: &Symbol, offset: usize) -> Result<Symbol> {
        if xi.space().dim() != self.base_dim() {
            return Err(Error::DimensionMismatch { expected: self.base_dim(), got: xi.space().dim() });
        }
        let target = FockSpace::new(2 * self.base_dim(), xi.space().max_degree())?;
        let mut out = FockVector::zeros(&target);
        for (i, a) in xi.amplitudes().iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            let w = xi.space().word_at(i);
            let shifted = TensorWord::new(w.letters.iter().map(|l| l + offset).collect());
            let j = target.index_of(&shifted).expect("word fits the doubled space");
            out.amplitudes_mut()[j] = *a;
        }
        Ok(out)
    }
}

/// `V_s = [[cos(πs/2), -sin(πs/2)], [sin(πs/2), cos(πs/2)]] ⊗ 1_d`.
pub fn rotation(d: usize, s: f64) -> DMatrix<C64> {
    let (sn, cs) = (PI * s / 2.0).sin_cos();
    DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let (bi, bj) = (i / d, j / d);
        if i % d != j % d {
            return C64::new(0.0, 0.0);
        }
        C64::new(
            match (bi, bj) {
                (0, 0) | (1, 1) => cs,
                (0, 1) => -sn,
                _ => sn,
            },
            0.0,
        )
    })
}

pub fn alpha_operator(dm: &DoubledModel, s: f64) -> LinearOperator {
    LinearOperator::tensor_power(rotation(dm.base_dim(), s))
}

pub fn beta_operator(dm: &DoubledModel) -> LinearOperator {
    let d = dm.base_dim();
    LinearOperator::tensor_power(DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i < d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    }))
}

pub fn alpha(dm: &DoubledModel, s: f64, xi: &Symbol) -> Result<Symbol> {
    alpha_operator(dm, s).apply(xi)
}

pub fn beta(dm: &DoubledModel, xi: &Symbol) -> Result<Symbol> {
    beta_operator(dm).apply(xi)
}

/// Keeps only the words whose letters all lie in the first copy.
pub fn project_first_copy(dm: &DoubledModel, xi: &Symbol) -> Symbol {
    let d = dm.base_dim();
    let mut out = xi.clone();
    let space = xi.space().clone();
    for n in 1..=space.max_degree() {
        let range = space.block_range(n);
        // With letter 0 most significant, the word at offset k of block n
        // has letters given by the base-2d digits of k.
        let dd = space.dim();
        for (k, a) in out.amplitudes_mut()[range].iter_mut().enumerate() {
            let mut rest = k;
            let mut inside = true;
            for _ in 0..n {
                if rest % dd >= d {
                    inside = false;
                    break;
                }
                rest /= dd;
            }
            if !inside {
                *a = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

pub fn is_first_copy(dm: &DoubledModel, xi: &Symbol) -> bool {
    project_first_copy(dm, xi).max_abs_diff(xi) == 0.0
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MalleabilityReport {
    /// `max ‖β α_s ξ - α_{-s} β ξ‖`
    pub beta_alpha: f64,
    /// `max ‖β² ξ - ξ‖`
    pub beta_square: f64,
    /// `max ‖α₁ ι₁(w) - ι₂(w)‖` over first-copy words
    pub copy_swap: f64,
    /// `max |⟨α_s ξ, Ω⟩ - ⟨ξ, Ω⟩|`
    pub state: f64,
}

impl MalleabilityReport {
    pub fn max(&self) -> f64 {
        self.beta_alpha.max(self.beta_square).max(self.copy_swap).max(self.state)
    }
}

/// Residuals of `βα_s = α_{-s}β`, `β² = 1`, `α₁(x ∗ 1) = 1 ∗ x` and
/// state preservation.
///
/// `samples` are symbols over `H ⊕ H`; `base_words` are symbols over `H`
/// used for the copy swap.
pub fn malleability_residuals(
    dm: &DoubledModel,
    s: f64,
    samples: &[Symbol],
    base_words: &[Symbol],
) -> Result<MalleabilityReport> {
    let a_s = alpha_operator(dm, s);
    let a_ms = alpha_operator(dm, -s);
    let a_1 = alpha_operator(dm, 1.0);
    let b = beta_operator(dm);
    let mut r = MalleabilityReport::default();
    for xi in samples {
        let lhs = b.apply(&a_s.apply(xi)?)?;
        let rhs = a_ms.apply(&b.apply(xi)?)?;
        r.beta_alpha = r.beta_alpha.max(lhs.distance(&rhs));
        r.beta_square = r.beta_square.max(b.apply(&b.apply(xi)?)?.distance(xi));
        r.state = r.state.max((a_s.apply(xi)?.vacuum_amplitude() - xi.vacuum_amplitude()).norm());
    }
    for w in base_words {
        let first = dm.embed_first(w)?;
        let second = dm.embed_second(w)?;
        r.copy_swap = r.copy_swap.max(a_1.apply(&first)?.distance(&second));
    }
    Ok(r)
}

/// `2‖α_s ξ - P α_s ξ‖ - ‖ξ - α_{2s} ξ‖` in the symbol norm.
pub fn transversality_residual(dm: &DoubledModel, xi: &Symbol, s: f64) -> Result<f64> {
    if !is_first_copy(dm, xi) {
        return Err(Error::Precondition("transversality needs a first-copy symbol".into()));
    }
    let a = alpha(dm, s, xi)?;
    let lhs = 2.0 * a.distance(&project_first_copy(dm, &a));
    let rhs = xi.distance(&alpha(dm, 2.0 * s, xi)?);
    Ok(lhs - rhs)
}

/// Per-degree form of transversality: `4(1 - x^n) - 2(1 - (2x-1)^n)`,
/// nonnegative for `x ∈ [0, 1]`.
pub fn transversality_scalar_slack(x: f64, n: i32) -> f64 {
    4.0 * (1.0 - x.powi(n)) - 2.0 * (1.0 - (2.0 * x - 1.0).powi(n))
}

/// `n` orthonormal vectors `e_i`, one per eigenvalue pair (the `λ > 1`
/// eigenvector) and then trivial indices, so `‖ē_i‖ = λ^{-1/2} <= 1` and all
/// vectors of `{e_i} ∪ {ē_j}` with distinct indices have disjoint supports.
pub fn select_orthogonal_system(model: &RepModel, n: usize) -> Result<Vec<Vec<C64>>> {
    let d = model.dim();
    let mut idx: Vec<usize> = model.pairs().iter().map(|p| p.plus).collect();
    idx.extend_from_slice(model.trivial_indices());
    if n > idx.len() {
        return Err(Error::Precondition(format!(
            "model offers {} pairs or trivial indices, {} requested",
            idx.len(),
            n
        )));
    }
    Ok(idx[..n].iter().map(|&i| crate::fock::unit_vector(d, i)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SnReport {
    pub n: usize,
    /// Max entry of `(S_n*S_n - 1⊗1 - (1/n)Σ 1⊗W(ē_i⊗e_i)) v` over test vectors.
    pub identity_residual: f64,
    /// `(1/n)Σ α_i ℓ(ē_i)ℓ(e_i)`, bound `1/√n`.
    pub creating: MajfReport,
    /// `(1/n)Σ α_i ℓ(ē_i)ℓ(ē_i)*`, bound `1/n`.
    pub middle: MajfReport,
    /// `(1/n)Σ α_i ℓ(e_i)*ℓ(ē_i)*`, bound `1/√n`.
    pub annihilating_norm: f64,
    /// Compressed norm of `(1/n)Σ α_i W(ē_i⊗e_i)`.
    pub direct_norm: f64,
    pub summand_bound: f64,
    pub bound: f64,
}

impl SnReport {
    pub fn bound_slack(&self) -> f64 {
        self.bound - self.summand_bound.max(self.direct_norm)
    }
}

/// `S_n = (1/√n) Σ ℓ(e_i) ⊗ W(e_i)`.
pub fn sn_operator(model: &RepModel, system: &[Vec<C64>]) -> Result<TensorOperator> {
    let n = system.len() as f64;
    let terms = system
        .iter()
        .map(|e| Ok(TensorOperator::kron(&LinearOperator::creation(e), &crate::araki_woods::field_operator(model, e)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TensorOperator::sum(terms).scale(C64::new(1.0 / n.sqrt(), 0.0)))
}

/// Checks the identity `S_n*S_n - 1⊗1 = (1/n) Σ 1 ⊗ W(ē_i ⊗ e_i)` on test
/// vectors and the norm bound `‖(1/n) Σ α_i W(ē_i ⊗ e_i)‖ <= 3/√n` through
/// its three summands.
pub fn sn_identity_check(
    model: &RepModel,
    system: &[Vec<C64>],
    alphas: &[C64],
    test_vectors: &[TensorVector],
) -> Result<SnReport> {
    let n = system.len();
    let big_l = model.max_degree();
    if n == 0 || alphas.len() != n {
        return Err(Error::Precondition("need a nonempty system and one coefficient per vector".into()));
    }
    if big_l < 2 {
        return Err(Error::Precondition(format!("S_n checks need max_degree >= 2 (got {big_l})")));
    }
    for v in test_vectors {
        let (a, b) = v.degrees();
        if a + 2 > big_l || b + 2 > big_l {
            return Err(Error::Precondition(format!(
                "test vector degrees ({a}, {b}) exceed max_degree - 2 = {}",
                big_l - 2
            )));
        }
    }
    let bars: Vec<Vec<C64>> = system.iter().map(|e| involution_apply(model, e)).collect();
    let scale = C64::new(1.0 / n as f64, 0.0);

    let sn = sn_operator(model, system)?;
    let lhs = sn.adjoint().compose(&sn);
    let w_terms = system
        .iter()
        .zip(&bars)
        .map(|(e, eb)| wick_operator(model, &[eb.clone(), e.clone()]))
        .collect::<Result<Vec<_>>>()?;
    let w_sum = LinearOperator::sum(w_terms.clone())?.scale(scale);
    let rhs = TensorOperator::sum(vec![TensorOperator::identity(), TensorOperator::kron(&LinearOperator::identity(), &w_sum)]);
    // Test degrees are at most L - 2 and every path raises each side by at
    // most 2, so truncated evaluation is already exact.
    let mut identity_residual: f64 = 0.0;
    for v in test_vectors {
        identity_residual = identity_residual.max(lhs.apply_truncated(v)?.max_abs_diff(&rhs.apply_truncated(v)?));
    }

    // Normalised ē_i = ‖ē_i‖ u_i; the u_i are orthonormal for a selected system.
    let norms: Vec<f64> = bars.iter().map(|b| vec_norm(b)).collect();
    let units: Vec<Vec<C64>> = bars.iter().zip(&norms).map(|(b, n)| b.iter().map(|x| x / n).collect()).collect();
    let space = model.space();
    let creating_alphas: Vec<C64> = alphas.iter().zip(&norms).map(|(a, n)| a * n).collect();
    let middle_alphas: Vec<C64> = alphas.iter().zip(&norms).map(|(a, n)| a * n * n).collect();
    let creating = majf_check(space, &creating_alphas, &units, system)?;
    let middle = majf_check(space, &middle_alphas, &units, &units)?;
    let annihilating_norm = creating.creating_norm;

    let weighted = LinearOperator::sum(w_terms.iter().zip(alphas).map(|(w, a)| w.scale(*a)).collect())?.scale(scale);
    let direct_norm = operator_norm(&weighted, space)?.value;
    let root = (n as f64).sqrt();
    Ok(SnReport {
        n,
        identity_residual,
        summand_bound: creating.creating_norm + middle.annihilating_norm + annihilating_norm,
        creating,
        middle,
        annihilating_norm,
        direct_norm,
        bound: 3.0 / root,
    })
}
