//! Norm bounds for averaged creation/annihilation products over orthonormal
//! families: `‖(1/n) Σ α_i ℓ(e_i)ℓ(f_i)*‖ ≤ 1/n` and
//! `‖(1/n) Σ α_i ℓ(e_i)ℓ(f_i)‖ ≤ 1/√n`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{inner, FockSpace};
use crate::norm::operator_norm;
use crate::operator::LinearOperator;

pub const GRAM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct MajfReport {
    pub n: usize,
    pub annihilating_norm: f64,
    pub creating_norm: f64,
    pub annihilating_bound: f64,
    pub creating_bound: f64,
    pub annihilating_slack: f64,
    pub creating_slack: f64,
}

impl MajfReport {
    pub fn min_slack(&self) -> f64 {
        self.annihilating_slack.min(self.creating_slack)
    }
}

/// Largest deviation of the Gram matrix of `family` from the identity.
pub fn gram_defect(family: &[Vec<C64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in family.iter().enumerate() {
        for (j, b) in family.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(a, b) - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

pub fn majf_check(
    space: &FockSpace,
    alphas: &[C64],
    e: &[Vec<C64>],
    f: &[Vec<C64>],
) -> Result<MajfReport> {
    let n = alphas.len();
    if n == 0 || e.len() != n || f.len() != n {
        return Err(Error::Precondition("need n >= 1 coefficients and families of length n".into()));
    }
    if alphas.iter().any(|a| a.norm() > 1.0 + 1e-12) {
        return Err(Error::Precondition("coefficients must satisfy |α_i| <= 1".into()));
    }
    for fam in [e, f] {
        if let Some(v) = fam.iter().find(|v| v.len() != space.dim()) {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: v.len() });
        }
        let defect = gram_defect(fam);
        if defect > GRAM_TOLERANCE {
            return Err(Error::Precondition(format!("family is not orthonormal (Gram defect {defect:e})")));
        }
    }
    let scale = C64::new(1.0 / n as f64, 0.0);
    let mut down = Vec::with_capacity(n);
    let mut up = Vec::with_capacity(n);
    for i in 0..n {
        let le = LinearOperator::creation(&e[i]);
        down.push(le.compose(&LinearOperator::annihilation(&f[i]))?.scale(alphas[i] * scale));
        up.push(le.compose(&LinearOperator::creation(&f[i]))?.scale(alphas[i] * scale));
    }
    let annihilating_norm = operator_norm(&LinearOperator::sum(down)?, space)?.value;
    let creating_norm = operator_norm(&LinearOperator::sum(up)?, space)?.value;
    let annihilating_bound = 1.0 / n as f64;
    let creating_bound = 1.0 / (n as f64).sqrt();
    Ok(MajfReport {
        n,
        annihilating_norm,
        creating_norm,
        annihilating_bound,
        creating_bound,
        annihilating_slack: annihilating_bound - annihilating_norm,
        creating_slack: creating_bound - creating_norm,
    })
}
