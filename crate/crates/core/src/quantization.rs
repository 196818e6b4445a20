//! First and second quantization of contractions, I-compatibility, the
//! finite-rank band approximants and the composed approximation maps
//! `m_φ ∘ Γ(T)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::araki_woods::{RepModel, Symbol};
use crate::error::{Error, Result};
use crate::fock::{vec_norm, FockSpace, FockVector};
use crate::multipliers::{haagerup_net, radial_norm, HaagerupReport, RadialSymbol};
use crate::norm::{column_span_basis, singular_values, spectral_norm};
use crate::operator::LinearOperator;

/// Slack allowed on `‖T‖ <= 1`.
pub const NORM_SLACK: f64 = 1e-12;
/// Largest `‖ITI - T‖` accepted for second quantization.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-12;
/// Tolerance used to classify a matrix as unitary or projection.
pub const KIND_TOLERANCE: f64 = 1e-10;
/// Singular values below this count as zero in rank computations.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Bands are chosen by exhaustive search up to this many candidates.
pub const EXACT_BAND_SEARCH: usize = 16;

#[derive(Clone, Debug)]
pub struct ContractionSpec {
    pub t: DMatrix<C64>,
    pub norm_bound: f64,
    pub i_defect: f64,
}

impl ContractionSpec {
    pub fn new(model: &RepModel, t: DMatrix<C64>) -> Result<Self> {
        let d = model.dim();
        if t.nrows() != d || t.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: t.nrows().max(t.ncols()) });
        }
        let norm_bound = spectral_norm(&t);
        if norm_bound > 1.0 + NORM_SLACK {
            return Err(Error::Precondition(format!("T is not a contraction: ‖T‖ = {norm_bound}")));
        }
        let i_defect = i_compatibility_defect(model, &t);
        Ok(ContractionSpec { t, norm_bound, i_defect })
    }

    pub fn identity(model: &RepModel) -> Self {
        let d = model.dim();
        ContractionSpec { t: DMatrix::identity(d, d), norm_bound: 1.0, i_defect: 0.0 }
    }

    pub fn rank(&self) -> usize {
        singular_values(&self.t).iter().filter(|s| **s > RANK_TOLERANCE).count()
    }

    fn require_compatible(&self) -> Result<()> {
        if self.i_defect > COMPATIBILITY_TOLERANCE {
            return Err(Error::Compatibility { defect: self.i_defect, tolerance: COMPATIBILITY_TOLERANCE });
        }
        Ok(())
    }
}

/// `Γ̃(T) = 1 ⊕ ⊕ T^{⊗n}`.
pub fn first_quantization(t: &DMatrix<C64>) -> Result<LinearOperator> {
    let n = spectral_norm(t);
    if n > 1.0 + NORM_SLACK {
        return Err(Error::Precondition(format!("T is not a contraction: ‖T‖ = {n}")));
    }
    Ok(LinearOperator::tensor_power(t.clone()))
}

/// Matrix of the linear map `ITI`. With `Iξ = S conj(ξ)` and `S` real this
/// is `S conj(T) S`.
pub fn iti_matrix(model: &RepModel, t: &DMatrix<C64>) -> DMatrix<C64> {
    let s = model.involution_matrix().map(|x| C64::new(x, 0.0));
    &s * t.map(|z| z.conj()) * &s
}

/// `‖ITI - T‖`.
pub fn i_compatibility_defect(model: &RepModel, t: &DMatrix<C64>) -> f64 {
    spectral_norm(&(iti_matrix(model, t) - t))
}

/// `Γ̃(T)ξ`, the symbol of `Γ(T)W(ξ)`.
pub fn second_quantize_symbol(model: &RepModel, t: &ContractionSpec, xi: &Symbol) -> Result<Symbol> {
    if xi.space().dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: xi.space().dim() });
    }
    t.require_compatible()?;
    first_quantization(&t.t)?.apply(xi)
}

/// `ℓ(h_1)···ℓ(h_k) ℓ(h_{k+1})*···ℓ(h_n)*`.
#[derive(Clone, Debug)]
pub struct Monomial {
    pub creators: Vec<Vec<C64>>,
    pub annihilators: Vec<Vec<C64>>,
}

impl Monomial {
    pub fn operator(&self) -> Result<LinearOperator> {
        let mut factors: Vec<LinearOperator> = self.creators.iter().map(|h| LinearOperator::creation(h)).collect();
        factors.extend(self.annihilators.iter().map(|h| LinearOperator::annihilation(h)));
        if factors.is_empty() {
            return Ok(LinearOperator::identity());
        }
        LinearOperator::product(factors)
    }

    pub fn mapped(&self, m: &DMatrix<C64>) -> Monomial {
        let map = |h: &Vec<C64>| (m * nalgebra::DVector::from_column_slice(h)).iter().copied().collect();
        Monomial {
            creators: self.creators.iter().map(map).collect(),
            annihilators: self.annihilators.iter().map(map).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionKind {
    Unitary,
    Projection,
}

pub fn classify(t: &DMatrix<C64>) -> Option<ContractionKind> {
    if t.nrows() != t.ncols() {
        return None;
    }
    let n = t.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let ta = t.adjoint();
    if spectral_norm(&(&ta * t - &id)) <= KIND_TOLERANCE && spectral_norm(&(t * &ta - &id)) <= KIND_TOLERANCE {
        return Some(ContractionKind::Unitary);
    }
    if spectral_norm(&(t * t - t)) <= KIND_TOLERANCE && spectral_norm(&(&ta - t)) <= KIND_TOLERANCE {
        return Some(ContractionKind::Projection);
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctorReport {
    pub kind: ContractionKind,
    pub residuals: Vec<f64>,
}

impl FunctorReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Orthonormal basis of the range of a projection, as the columns of `Q`.
fn range_isometry(p: &DMatrix<C64>) -> DMatrix<C64> {
    column_span_basis(p, RANK_TOLERANCE)
}

/// For a unitary `T`, compares `Γ̃(T) x Γ̃(T)*` with the mapped monomial on
/// `space`. For a projection, compares `ι* x ι` with the mapped monomial on
/// the Fock space of `ran T`, where `ι = Γ̃(Q)` for an isometry `Q` onto
/// `ran T`.
pub fn toeplitz_functor_check(t: &DMatrix<C64>, monomials: &[Monomial], space: &FockSpace) -> Result<FunctorReport> {
    if t.nrows() != space.dim() || t.ncols() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: t.nrows() });
    }
    let kind = classify(t)
        .ok_or_else(|| Error::Precondition("T must be an orthogonal projection or a unitary".into()))?;
    let mut residuals = Vec::with_capacity(monomials.len());
    match kind {
        ContractionKind::Unitary => {
            let g = LinearOperator::tensor_power(t.clone());
            let gs = LinearOperator::tensor_power(t.adjoint());
            for m in monomials {
                let lhs = LinearOperator::product(vec![g.clone(), m.operator()?, gs.clone()])?.to_dense(space)?;
                let rhs = m.mapped(t).operator()?.to_dense(space)?;
                residuals.push((lhs - rhs).camax());
            }
        }
        ContractionKind::Projection => {
            let q = range_isometry(t);
            let small = space.with_dim(q.ncols().max(1))?;
            let iota = LinearOperator::tensor_power(q.clone());
            let iota_star = LinearOperator::tensor_power(q.adjoint());
            for m in monomials {
                if q.ncols() == 0 {
                    residuals.push(0.0);
                    continue;
                }
                let lhs = LinearOperator::product(vec![iota_star.clone(), m.operator()?, iota.clone()])?.to_dense(&small)?;
                let rhs = m.mapped(&(q.adjoint() * t)).operator()?.to_dense(&small)?;
                residuals.push((lhs - rhs).camax());
            }
        }
    }
    Ok(FunctorReport { kind, residuals })
}

/// A candidate summand of a band approximant.
#[derive(Clone, Debug, Serialize)]
pub struct Band {
    /// `λ > 1` of the band, or `1` for the trivial part.
    pub lambda: f64,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct BandApproximant {
    pub contraction: ContractionSpec,
    /// Bands offered by `F`, in increasing `λ` (trivial part first).
    pub candidates: Vec<Band>,
    /// Indices into `candidates` that were selected.
    pub selected: Vec<usize>,
    pub rank: usize,
    /// `max ‖Tf - f‖ / ‖f‖` over `F`.
    pub residual: f64,
}

/// Orthogonal projection onto the span of `vectors`.
fn span_projection(d: usize, vectors: &[Vec<C64>]) -> DMatrix<C64> {
    if vectors.is_empty() {
        return DMatrix::zeros(d, d);
    }
    let m = DMatrix::from_fn(d, vectors.len(), |i, j| vectors[j][i]);
    let q = column_span_basis(&m, RANK_TOLERANCE);
    &q * q.adjoint()
}

fn restrict(v: &[C64], idx: &[usize]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for &i in idx {
        out[i] = v[i];
    }
    out
}

/// `T_E = (P_E + I P_E I) / (1 + 2δ/λ)` with `I P_E I = S conj(P_E) S`.
pub fn band_contraction(model: &RepModel, p_e: &DMatrix<C64>, delta: f64, lambda: f64) -> DMatrix<C64> {
    (p_e + iti_matrix(model, p_e)) / C64::new(1.0 + 2.0 * delta / lambda, 0.0)
}

/// Minimal-rank band approximant with `‖Tf - f‖ <= ε‖f‖` on `F`.
///
/// Each distinct `λ > 1` gives the band `E ⊕ JE` with
/// `E = span(P_λ F ∪ J P_{1/λ} F)`; the eigenvalue-1 part gives the
/// projection onto `P_0 F + I P_0 F`. Bands are mutually orthogonal and each
/// contains the component of every `f` in its eigenspaces.
pub fn band_approximant(model: &RepModel, family: &[Vec<C64>], eps: f64) -> Result<BandApproximant> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("ε must be positive (got {eps})")));
    }
    let d = model.dim();
    if let Some(f) = family.iter().find(|f| f.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: f.len() });
    }
    // Group eigenvalue pairs by λ.
    let mut groups: Vec<(f64, Vec<usize>, Vec<usize>)> = Vec::new();
    for p in model.pairs() {
        match groups.iter_mut().find(|g| (g.0 - p.lambda).abs() <= 1e-12 * p.lambda) {
            Some(g) => {
                g.1.push(p.plus);
                g.2.push(p.minus);
            }
            None => groups.push((p.lambda, vec![p.plus], vec![p.minus])),
        }
    }
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut projections: Vec<(Band, DMatrix<C64>, Vec<usize>)> = Vec::new();
    let trivial = model.trivial_indices().to_vec();
    if !trivial.is_empty() {
        let mut vecs = Vec::new();
        for f in family {
            let p0 = restrict(f, &trivial);
            vecs.push(model.conjugation_apply(&p0));
            vecs.push(p0);
        }
        let p = span_projection(d, &vecs);
        projections.push((Band { lambda: 1.0, rank: 0 }, p, trivial.clone()));
    }
    for (lambda, plus, minus) in &groups {
        let mut e_vecs = Vec::new();
        for f in family {
            e_vecs.push(restrict(f, plus));
            e_vecs.push(model.conjugation_apply(&restrict(f, minus)));
        }
        let p_e = span_projection(d, &e_vecs);
        let t_band = band_contraction(model, &p_e, 0.0, *lambda);
        let mut support = plus.clone();
        support.extend(minus);
        projections.push((Band { lambda: *lambda, rank: 0 }, t_band, support));
    }
    for (band, p, _) in &mut projections {
        band.rank = singular_values(p).iter().filter(|s| **s > 0.5).count();
    }
    // Captured squared mass of each f per band, relative to ‖f‖².
    let norms: Vec<f64> = family.iter().map(|f| vec_norm(f)).collect();
    let mass: Vec<Vec<f64>> = projections
        .iter()
        .map(|(_, _, support)| {
            family
                .iter()
                .zip(&norms)
                .map(|(f, n)| if *n > 0.0 { vec_norm(&restrict(f, support)).powi(2) / (n * n) } else { 0.0 })
                .collect()
        })
        .collect();
    // Skip bands with rank 0 (no component of F there).
    let useful: Vec<usize> = (0..projections.len()).filter(|&b| projections[b].0.rank > 0).collect();
    let residual_of = |set: &[usize]| -> f64 {
        (0..family.len())
            .map(|i| (1.0 - set.iter().map(|&b| mass[b][i]).sum::<f64>()).max(0.0).sqrt())
            .fold(0.0, f64::max)
    };
    let rank_of = |set: &[usize]| -> usize { set.iter().map(|&b| projections[b].0.rank).sum() };
    let admissible = |set: &[usize]| residual_of(set) <= eps;

    let selected: Vec<usize> = if useful.len() <= EXACT_BAND_SEARCH {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for bits in 0u32..(1u32 << useful.len()) {
            let set: Vec<usize> = (0..useful.len()).filter(|k| bits >> k & 1 == 1).map(|k| useful[k]).collect();
            if admissible(&set) {
                let r = rank_of(&set);
                if best.as_ref().is_none_or(|(br, _)| r < *br) {
                    best = Some((r, set));
                }
            }
        }
        best.map(|b| b.1).unwrap_or_else(|| useful.clone())
    } else {
        // Greedy: add the band with the largest worst-case gain per unit rank.
        let mut set: Vec<usize> = Vec::new();
        let mut rest = useful.clone();
        while !admissible(&set) && !rest.is_empty() {
            let (k, _) = rest
                .iter()
                .enumerate()
                .map(|(k, &b)| {
                    let mut trial = set.clone();
                    trial.push(b);
                    (k, (residual_of(&set) - residual_of(&trial)) / projections[b].0.rank as f64)
                })
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            set.push(rest.remove(k));
        }
        set.sort();
        set
    };

    let mut t = DMatrix::<C64>::zeros(d, d);
    for &b in &selected {
        t += &projections[b].1;
    }
    let contraction = ContractionSpec::new(model, t)?;
    let residual = family
        .iter()
        .zip(&norms)
        .map(|(f, n)| {
            if *n == 0.0 {
                return 0.0;
            }
            let tf = &contraction.t * nalgebra::DVector::from_column_slice(f);
            let diff: Vec<C64> = tf.iter().zip(f).map(|(a, b)| a - b).collect();
            vec_norm(&diff) / n
        })
        .fold(0.0, f64::max);
    let rank = rank_of(&selected);
    Ok(BandApproximant {
        contraction,
        candidates: projections.iter().map(|p| p.0.clone()).collect(),
        selected,
        rank,
        residual,
    })
}

/// `ξ ↦ Σ_n φ(n) T^{⊗n} ξ_n`, the symbol map of `m_φ ∘ Γ(T)`.
#[derive(Clone, Debug)]
pub struct CmapMap {
    pub symbol: RadialSymbol,
    pub contraction: ContractionSpec,
    /// Dimension of the image, `None` if it overflows `u128`.
    pub rank: Option<u128>,
    /// `‖m_φ‖_cb`, which bounds the cb norm since `Γ(T)` is unital
    /// completely positive.
    pub certificate: f64,
}

impl CmapMap {
    pub fn apply(&self, xi: &Symbol) -> Result<Symbol> {
        let g = LinearOperator::tensor_power(self.contraction.t.clone()).apply(xi)?;
        Ok(crate::multipliers::apply_radial_multiplier(&self.symbol, &g))
    }
}

pub fn cmap_map(symbol: &RadialSymbol, t: &ContractionSpec) -> Result<CmapMap> {
    if symbol.c1 != C64::new(0.0, 0.0) || symbol.c2 != C64::new(0.0, 0.0) {
        return Err(Error::Precondition("φ must be finitely supported (c1 = c2 = 0)".into()));
    }
    t.require_compatible()?;
    let r = t.rank() as u128;
    let mut rank: Option<u128> = Some(0);
    if let Some(top) = symbol.support_bound() {
        for n in 0..=top {
            if symbol.eval(n) != C64::new(0.0, 0.0) {
                rank = rank.and_then(|acc| r.checked_pow(n as u32).and_then(|p| acc.checked_add(p)));
            }
        }
    }
    Ok(CmapMap {
        symbol: symbol.clone(),
        contraction: t.clone(),
        rank,
        certificate: radial_norm(symbol).value,
    })
}

/// Fixed probe symbols for pointwise convergence: `Ω`, each `K_R` basis
/// vector and one degree-2 word.
pub fn cmap_probes(model: &RepModel, space: &FockSpace) -> Result<Vec<FockVector>> {
    let k = model.kr_basis();
    let mut probes = vec![FockVector::vacuum(space)];
    for e in k {
        probes.push(FockVector::product(space, &[e.clone()])?);
    }
    if space.max_degree() >= 2 {
        probes.push(FockVector::product(space, &[k[0].clone(), k[k.len() - 1].clone()])?);
    }
    Ok(probes)
}

/// `max ‖Φ(ξ) - ξ‖ / ‖ξ‖` over the probes.
pub fn probe_residual(map: &CmapMap, probes: &[FockVector]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in probes {
        worst = worst.max(map.apply(p)?.distance(p) / p.norm());
    }
    Ok(worst)
}

/// One element of the approximation net at level `n`.
#[derive(Clone, Debug, Serialize)]
pub struct NetElement {
    pub n: usize,
    pub t: f64,
    pub d: usize,
    pub band_rank: usize,
    pub band_residual: f64,
    pub certificate: f64,
    pub probe_residual: f64,
    /// `None` if the dimension of the image overflows `u128`.
    #[serde(serialize_with = "serialize_rank")]
    pub cmap_rank: Option<u128>,
    pub haagerup: HaagerupReport,
}

/// Ranks beyond `u64` are written as decimal strings, which JSON numbers
/// cannot hold exactly.
fn serialize_rank<S: serde::Serializer>(rank: &Option<u128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match rank {
        None => s.serialize_none(),
        Some(r) => match u64::try_from(*r) {
            Ok(small) => s.serialize_u64(small),
            Err(_) => s.serialize_str(&r.to_string()),
        },
    }
}

/// Builds `m_{ψ_t δ_{<=d_n}} ∘ Γ(T_n)` with `t = 1/n` and `T_n` the band
/// approximant of the `K_R` basis at `ε = 1/n`, and measures it on the probes.
pub fn net_element(model: &RepModel, n: usize) -> Result<NetElement> {
    let haagerup = haagerup_net(n)?;
    let eps = 1.0 / n as f64;
    let band = band_approximant(model, model.kr_basis(), eps)?;
    let map = cmap_map(&RadialSymbol::geometric_cut(haagerup.t, haagerup.d), &band.contraction)?;
    let probes = cmap_probes(model, model.space())?;
    Ok(NetElement {
        n,
        t: haagerup.t,
        d: haagerup.d,
        band_rank: band.rank,
        band_residual: band.residual,
        certificate: map.certificate,
        probe_residual: probe_residual(&map, &probes)?,
        cmap_rank: map.rank,
        haagerup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::araki_woods::{build_model, RepSpec};
    use crate::fock::unit_vector;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag(v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| c(x))))
    }

    #[test]
    fn first_quantization_examples() {
        let s = FockSpace::new(2, 3).unwrap();
        let id = first_quantization(&DMatrix::identity(2, 2)).unwrap().to_dense(&s).unwrap();
        assert_eq!(id, DMatrix::identity(15, 15));
        let t = 0.7f64;
        let g = first_quantization(&(DMatrix::identity(2, 2) * c((-t).exp()))).unwrap().to_dense(&s).unwrap();
        for i in 0..15 {
            let n = s.degree_of(i) as f64;
            assert!((g[(i, i)] - c((-n * t).exp())).norm() < 1e-14);
        }
        let z = first_quantization(&DMatrix::zeros(2, 2)).unwrap().to_dense(&s).unwrap();
        let mut vac = DMatrix::zeros(15, 15);
        vac[(0, 0)] = c(1.0);
        assert_eq!(z, vac);
        assert!(first_quantization(&(DMatrix::identity(2, 2) * c(1.1))).is_err());
    }

    #[test]
    fn compatibility_examples() {
        let pair = build_model(&RepSpec::pairs(&[(2.0, 1)], 0, 2)).unwrap();
        assert!(i_compatibility_defect(&pair, &DMatrix::identity(2, 2)) < 1e-15);
        let t = diag(&[1.0, 0.0]);
        let iti = iti_matrix(&pair, &t);
        assert!((iti - diag(&[0.0, 1.0])).camax() < 1e-15);
        assert!(i_compatibility_defect(&pair, &t) > 0.5);
        let triv = build_model(&RepSpec::trivial(3, 2)).unwrap();
        assert!(i_compatibility_defect(&triv, &diag(&[0.3, -0.2, 1.0])) == 0.0);
    }

    #[test]
    fn second_quantization_rejects_incompatible() {
        let pair = build_model(&RepSpec::pairs(&[(2.0, 1)], 0, 2)).unwrap();
        let spec = ContractionSpec::new(&pair, diag(&[1.0, 0.0])).unwrap();
        let xi = FockVector::vacuum(pair.space());
        assert!(matches!(second_quantize_symbol(&pair, &spec, &xi), Err(Error::Compatibility { .. })));
        let id = ContractionSpec::identity(&pair);
        assert_eq!(second_quantize_symbol(&pair, &id, &xi).unwrap(), xi);
    }

    #[test]
    fn functor_projection_and_permutation() {
        let s = FockSpace::new(3, 3).unwrap();
        let mono = Monomial { creators: vec![unit_vector(3, 0)], annihilators: vec![unit_vector(3, 1)] };
        let p = diag(&[1.0, 1.0, 0.0]);
        let r = toeplitz_functor_check(&p, &[mono.clone()], &s).unwrap();
        assert_eq!(r.kind, ContractionKind::Projection);
        assert!(r.max_residual() < 1e-12);
        let perm = DMatrix::from_fn(3, 3, |i, j| if (j + 1) % 3 == i { c(1.0) } else { c(0.0) });
        let r = toeplitz_functor_check(&perm, &[mono], &s).unwrap();
        assert_eq!(r.kind, ContractionKind::Unitary);
        assert!(r.max_residual() < 1e-12);
        assert!(toeplitz_functor_check(&diag(&[0.5, 1.0, 1.0]), &[], &s).is_err());
    }

    #[test]
    fn band_single_pair() {
        let m = build_model(&RepSpec::pairs(&[(2.0, 1), (3.0, 1)], 1, 2)).unwrap();
        let f = vec![c(0.3), c(-0.8), c(0.0), c(0.0), c(0.0)];
        let b = band_approximant(&m, &[f], 0.1).unwrap();
        assert_eq!(b.rank, 2);
        assert!(b.residual < 1e-12);
        assert!(b.contraction.i_defect < 1e-12);
        let expect = diag(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!((&b.contraction.t - expect).camax() < 1e-12);
    }

    #[test]
    fn band_large_eps_gives_zero() {
        let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 2)).unwrap();
        let f = vec![c(1.0), c(2.0), c(-1.0)];
        let b = band_approximant(&m, &[f], 2.0).unwrap();
        assert_eq!(b.rank, 0);
        assert_eq!(b.contraction.t, DMatrix::zeros(3, 3));
    }

    #[test]
    fn band_trivial_model_projects_onto_f_and_if() {
        let m = build_model(&RepSpec::trivial(3, 1)).unwrap();
        let f = vec![C64::new(1.0, 1.0), c(0.0), C64::new(0.0, 2.0)];
        let b = band_approximant(&m, &[f.clone()], 1e-3).unwrap();
        let want = span_projection(3, &[f.clone(), f.iter().map(|z| z.conj()).collect()]);
        assert!((&b.contraction.t - want).camax() < 1e-12);
        assert_eq!(b.rank, 2);
    }

    #[test]
    fn delta_formula_on_merged_bands() {
        // Two pairs with nearby λ merged into one band of width δ.
        let (lambda, delta) = (2.0, 0.05);
        let m = build_model(&RepSpec::pairs(&[(lambda, 1), (lambda + delta, 1)], 0, 1)).unwrap();
        let v = vec![c(0.6), c(0.0), c(0.8), c(0.0)];
        let p_e = span_projection(4, &[v]);
        let t = band_contraction(&m, &p_e, delta, lambda);
        assert!(spectral_norm(&t) <= 1.0 + 1e-12);
        let jpj = {
            let sw = m.swap_matrix().map(|x| c(x));
            &sw * p_e.map(|z| z.conj()) * &sw
        };
        let exact = &p_e + jpj;
        assert!(spectral_norm(&(t - exact)) < 4.0 * delta / lambda);
    }

    #[test]
    fn cmap_examples() {
        let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 3)).unwrap();
        let id = ContractionSpec::identity(&m);
        let vac = cmap_map(&RadialSymbol::cutoff_projection(0), &id).unwrap();
        assert_eq!(vac.rank, Some(1));
        let probes = cmap_probes(&m, m.space()).unwrap();
        assert_eq!(probes.len(), 5);
        let out = vac.apply(&probes[1]).unwrap();
        assert!(out.norm() == 0.0);
        assert!(probe_residual(&vac, &probes[..1]).unwrap() < 1e-15);
        assert!(cmap_map(&RadialSymbol::constant(c(1.0)), &id).is_err());
        let big = cmap_map(&RadialSymbol::cutoff_projection(200), &id).unwrap();
        assert_eq!(big.rank, None);
    }
}
