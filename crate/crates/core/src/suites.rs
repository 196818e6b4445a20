//! Seeded verification suites behind `awlab verify`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::araki_woods::{
    build_model, catalan, conjugate_by_flow, field_moment, field_operator, involution_apply, modular_flow,
    modular_flow_operator, semicircular_moment, symbol_to_operator, two_point, two_point_formula, wick_operator,
    RepModel, RepSpec,
};
use crate::bounds::majf_check;
use crate::deformation::{
    alpha_operator, malleability_residuals, project_first_copy, select_orthogonal_system, sn_identity_check,
    transversality_residual, transversality_scalar_slack, DoubledModel,
};
use crate::error::{Error, Result};
use crate::fock::{FockSpace, FockVector, TensorWord};
use crate::norm::{operator_norm, spectral_norm};
use crate::operator::{vacuum_expectation, LinearOperator, TensorVector};
use crate::quantization::{
    band_approximant, first_quantization, i_compatibility_defect, iti_matrix, second_quantize_symbol, ContractionSpec,
};
use crate::random::{complex_matrix, complex_vector, fock_vector, orthonormal_family, rng, unit_complex_vector, SuiteRng};

pub const SUITES: [&str; 9] =
    ["wick", "majf", "moments", "twopoint", "modular", "malleability", "transversality", "cas00", "quantization"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub max_residual: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Diagnostics of failed checks.
    pub failures: Vec<String>,
    /// Extra signed quantities such as minimal slacks.
    pub metrics: BTreeMap<String, f64>,
}

struct Builder {
    suite: String,
    seed: u64,
    tol: Option<f64>,
    checks: Vec<Check>,
    metrics: BTreeMap<String, f64>,
}

impl Builder {
    fn new(suite: &str, seed: u64, tol: Option<f64>) -> Self {
        Builder { suite: suite.into(), seed, tol, checks: Vec::new(), metrics: BTreeMap::new() }
    }

    fn check(&mut self, name: &str, cases: usize, residual: f64, tolerance: f64) {
        let tolerance = self.tol.unwrap_or(tolerance);
        let passed = residual.is_finite() && residual <= tolerance;
        self.checks.push(Check { name: name.into(), cases, residual, tolerance, passed });
    }

    /// Records a signed slack that must stay above `-tolerance`.
    fn slack(&mut self, name: &str, cases: usize, min_slack: f64, tolerance: f64) {
        self.metrics.insert(format!("{name}.min_slack"), min_slack);
        self.check(name, cases, (-min_slack).max(0.0), tolerance);
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn finish(self) -> SuiteReport {
        let failures = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: residual {:e} exceeds tolerance {:e} over {} cases", c.name, c.residual, c.tolerance, c.cases))
            .collect();
        SuiteReport {
            cases: self.checks.iter().map(|c| c.cases).sum(),
            max_residual: self.checks.iter().map(|c| c.residual).fold(0.0, f64::max),
            passed: self.checks.iter().all(|c| c.passed),
            suite: self.suite,
            seed: self.seed,
            checks: self.checks,
            failures,
            metrics: self.metrics,
        }
    }
}

pub fn run_suite(name: &str, seed: u64, tol: Option<f64>) -> Result<SuiteReport> {
    let mut b = Builder::new(name, seed, tol);
    let mut r = rng(seed);
    match name {
        "wick" => wick(&mut b, &mut r)?,
        "majf" => majf(&mut b, &mut r)?,
        "moments" => moments(&mut b)?,
        "twopoint" => twopoint(&mut b, &mut r)?,
        "modular" => modular(&mut b, &mut r)?,
        "malleability" => malleability(&mut b, &mut r)?,
        "transversality" => transversality(&mut b, &mut r)?,
        "cas00" => cas00(&mut b, &mut r)?,
        "quantization" => quantization(&mut b, &mut r)?,
        _ => {
            return Err(Error::InvalidInput(format!("unknown suite '{name}'; expected one of {}", SUITES.join(", "))))
        }
    }
    Ok(b.finish())
}

/// Random model for the randomized suites: `λ = 1` gives a trivial model,
/// otherwise one pair plus up to one trivial index.
fn random_model(r: &mut SuiteRng, lambda: f64, max_dim: usize, max_degree: usize) -> Result<RepModel> {
    let spec = if lambda == 1.0 {
        RepSpec::trivial(r.random_range(1..=max_dim), max_degree)
    } else {
        RepSpec::pairs(&[(lambda, 1)], r.random_range(0..=max_dim.saturating_sub(2)), max_degree)
    };
    build_model(&spec)
}

fn dense_residual(x: &LinearOperator, space: &FockSpace) -> Result<f64> {
    Ok(x.to_dense(space)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn wick(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let lambdas = [1.0, 2.0, 4.0];
    let mut jobs = Vec::with_capacity(100);
    for _ in 0..100 {
        let lambda = lambdas[r.random_range(0..3)];
        let model = random_model(r, lambda, 3, 6)?;
        let len = r.random_range(1..=4);
        let letters: Vec<Vec<C64>> = (0..len).map(|_| complex_vector(r, model.dim())).collect();
        jobs.push((model, letters));
    }
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|(model, letters)| -> Result<(f64, f64)> {
            let space = model.space();
            let w = wick_operator(model, letters)?;
            let sym = w.apply(&FockVector::vacuum(space))?;
            let want = FockVector::product(space, letters)?;
            let vac = sym.distance(&want);
            // W(e0 ⊗ rest) - W(e0) W(rest) + ⟨ē0, e1⟩ W(e2 ⊗ ...)
            let rec = if letters.len() >= 2 {
                let head = field_operator(model, &letters[0])?;
                let rest = wick_operator(model, &letters[1..])?;
                let tail = wick_operator(model, &letters[2..])?;
                let c = crate::fock::inner(&involution_apply(model, &letters[0]), &letters[1]);
                let diff = w.sub(&head.compose(&rest)?)?.add(&tail.scale(c))?;
                dense_residual(&diff, space)?
            } else {
                0.0
            };
            Ok((vac, rec))
        })
        .collect::<Result<Vec<_>>>()?;
    b.check("symbol", results.len(), results.iter().map(|x| x.0).fold(0.0, f64::max), 1e-12);
    b.check("recursion", results.len(), results.iter().map(|x| x.1).fold(0.0, f64::max), 1e-12);
    Ok(())
}

fn majf(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let mut jobs = Vec::new();
    for n in 2..=8usize {
        for _ in 0..20 {
            let alphas: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, r.random_range(0.0..2.0 * PI))).collect();
            let e = orthonormal_family(r, n, n);
            let f = orthonormal_family(r, n, n);
            jobs.push((n, alphas, e, f));
        }
    }
    let reports = jobs
        .par_iter()
        .map(|(n, a, e, f)| {
            let space = FockSpace::new(*n, if *n <= 5 { 3 } else { 2 })?;
            majf_check(&space, a, e, f)
        })
        .collect::<Result<Vec<_>>>()?;
    let ann = reports.iter().map(|x| x.annihilating_slack).fold(f64::INFINITY, f64::min);
    let cre = reports.iter().map(|x| x.creating_slack).fold(f64::INFINITY, f64::min);
    b.slack("annihilating_bound", reports.len(), ann, 1e-10);
    b.slack("creating_bound", reports.len(), cre, 1e-10);
    Ok(())
}

fn moments(b: &mut Builder) -> Result<()> {
    let models = [RepSpec::trivial(1, 10), RepSpec::pairs(&[(2.0, 1)], 0, 10)];
    let mut even: f64 = 0.0;
    let mut odd: f64 = 0.0;
    let mut cases = 0;
    for spec in &models {
        let m = build_model(spec)?;
        for xi in m.kr_basis() {
            for k in 1..=5 {
                even = even.max((semicircular_moment(&m, xi, k)? - catalan(k) as f64).abs());
                odd = odd.max(field_moment(&m, xi, 2 * k - 1)?.norm());
                cases += 1;
            }
        }
    }
    b.check("catalan", cases, even, 1e-10);
    b.check("odd_vanish", cases, odd, 1e-12);
    Ok(())
}

fn twopoint(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let specs = [RepSpec::trivial(2, 2), RepSpec::pairs(&[(2.0, 1)], 0, 2), RepSpec::pairs(&[(4.0, 1)], 1, 2)];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for spec in &specs {
        let m = build_model(spec)?;
        for _ in 0..100 {
            let xi = complex_vector(r, m.dim());
            let eta = complex_vector(r, m.dim());
            worst = worst.max((two_point(&m, &xi, &eta)? - two_point_formula(&m, &xi, &eta)).norm());
            cases += 1;
        }
    }
    b.check("formula", cases, worst, 1e-12);
    Ok(())
}

fn modular(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1), (4.0, 1)], 1, 3))?;
    let space = m.space();
    let mut state: f64 = 0.0;
    let mut symbol: f64 = 0.0;
    let mut operator: f64 = 0.0;
    let mut cases = 0;
    for &t in &[0.3, 1.0, 2.0] {
        for _ in 0..5 {
            let x = symbol_to_operator(&m, &fock_vector(r, space, 2))?;
            let y = conjugate_by_flow(&m, t, &x)?;
            state = state.max((vacuum_expectation(&y, space)? - vacuum_expectation(&x, space)?).norm());
            let zeta = complex_vector(r, m.dim());
            let ut = m.modular_unitary(t);
            let uz: Vec<C64> = (&ut * nalgebra::DVector::from_vec(zeta.clone())).iter().copied().collect();
            let flowed = modular_flow(&m, t, &FockVector::product(space, &[zeta.clone()])?)?;
            symbol = symbol.max(flowed.distance(&FockVector::product(space, &[uz.clone()])?));
            let lhs = conjugate_by_flow(&m, t, &field_operator(&m, &zeta)?)?;
            let diff = lhs.sub(&field_operator(&m, &uz)?)?;
            operator = operator.max(dense_residual(&diff, space)?);
            cases += 1;
        }
    }
    b.check("state_invariance", cases, state, 1e-10);
    b.check("flow_symbol", cases, symbol, 1e-12);
    b.check("flow_operator", cases, operator, 1e-12);
    Ok(())
}

fn malleability(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let base = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 3))?;
    let dm = DoubledModel::new(&base)?;
    let space = dm.doubled.space();
    let samples: Vec<FockVector> = (0..10).map(|_| fock_vector(r, space, 3)).collect();
    let words: Vec<FockVector> = space_words(base.space(), 3).into_iter().take(12).collect();
    let mut worst = crate::deformation::MalleabilityReport::default();
    let mut group: f64 = 0.0;
    let mut flow: f64 = 0.0;
    let mut cases = 0;
    for s in [0.0, 0.5, r.random_range(-1.0..1.0), r.random_range(0.0..4.0)] {
        let rep = malleability_residuals(&dm, s, &samples, &words)?;
        worst.beta_alpha = worst.beta_alpha.max(rep.beta_alpha);
        worst.beta_square = worst.beta_square.max(rep.beta_square);
        worst.copy_swap = worst.copy_swap.max(rep.copy_swap);
        worst.state = worst.state.max(rep.state);
        let t = r.random_range(-1.0..1.0);
        let a_s = alpha_operator(&dm, s);
        let a_t = alpha_operator(&dm, t);
        let a_st = alpha_operator(&dm, s + t);
        let f = modular_flow_operator(&dm.doubled, t);
        for xi in &samples {
            group = group.max(a_s.apply(&a_t.apply(xi)?)?.distance(&a_st.apply(xi)?));
            flow = flow.max(a_s.apply(&f.apply(xi)?)?.distance(&f.apply(&a_s.apply(xi)?)?));
            cases += 1;
        }
    }
    b.check("beta_alpha", cases, worst.beta_alpha, 1e-12);
    b.check("beta_square", cases, worst.beta_square, 1e-12);
    b.check("copy_swap", words.len() * 4, worst.copy_swap, 1e-12);
    b.check("state", cases, worst.state, 1e-12);
    b.check("group_law", cases, group, 1e-12);
    b.check("flow_commutation", cases, flow, 1e-12);

    // χ̃(y x) = χ̃(y E(x)) with E the projection onto first-copy words.
    let small_base = build_model(&RepSpec::pairs(&[(2.0, 1)], 0, 2))?;
    let small = DoubledModel::new(&small_base)?;
    let sspace = small.doubled.space();
    let mut oracle: f64 = 0.0;
    let mut oracle_cases = 0;
    for _ in 0..10 {
        let y_sym = small.embed_first(&fock_vector(r, small_base.space(), 2))?;
        let x_sym = fock_vector(r, sspace, 2);
        let y = symbol_to_operator(&small.doubled, &y_sym)?;
        let x = symbol_to_operator(&small.doubled, &x_sym)?;
        let ex = symbol_to_operator(&small.doubled, &project_first_copy(&small, &x_sym))?;
        let lhs = vacuum_expectation(&y.compose(&x)?, sspace)?;
        let rhs = vacuum_expectation(&y.compose(&ex)?, sspace)?;
        oracle = oracle.max((lhs - rhs).norm());
        oracle_cases += 1;
    }
    b.check("expectation_oracle", oracle_cases, oracle, 1e-10);
    Ok(())
}

/// Basis words of `space` up to `max_degree` as unit symbols.
fn space_words(space: &FockSpace, max_degree: usize) -> Vec<FockVector> {
    (0..space.block_range(max_degree.min(space.max_degree())).end).map(|i| FockVector::basis(space, i)).collect()
}

fn transversality(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let bases = [
        build_model(&RepSpec::trivial(2, 3))?,
        build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 3))?,
    ];
    let dms = bases.iter().map(DoubledModel::new).collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::with_capacity(1000);
    for k in 0..1000 {
        let which = k % dms.len();
        let deg = r.random_range(0..=3);
        let sym = fock_vector(r, bases[which].space(), deg);
        let s = 1.0 - r.random_range(0.0..1.0);
        jobs.push((which, sym, s));
    }
    let slacks = jobs
        .par_iter()
        .map(|(w, sym, s)| transversality_residual(&dms[*w], &dms[*w].embed_first(sym)?, *s))
        .collect::<Result<Vec<f64>>>()?;
    b.slack("random_symbols", slacks.len(), slacks.iter().copied().fold(f64::INFINITY, f64::min), 1e-10);

    let mut eq: f64 = 0.0;
    let mut cases = 0;
    for (dm, base) in dms.iter().zip(&bases) {
        for _ in 0..20 {
            let e = unit_complex_vector(r, base.dim());
            let xi = FockVector::product(dm.doubled.space(), &[dm.iota1(&e)])?;
            eq = eq.max(transversality_residual(dm, &xi, 1.0 - r.random_range(0.0..1.0))?.abs());
            cases += 1;
        }
    }
    b.check("degree_one_equality", cases, eq, 1e-10);

    let mut scalar = f64::INFINITY;
    for n in 1..=12 {
        for k in 0..=100 {
            scalar = scalar.min(transversality_scalar_slack(k as f64 / 100.0, n));
        }
    }
    b.slack("scalar_reduction", 12 * 101, scalar, 1e-12);
    Ok(())
}

fn cas00(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let cases = [
        (2usize, RepSpec::pairs(&[(2.0, 1), (4.0, 1)], 0, 3)),
        (4, RepSpec::pairs(&[(2.0, 1), (3.0, 1)], 2, 3)),
        (9, RepSpec::trivial(9, 3)),
    ];
    let mut ident: f64 = 0.0;
    let mut slack = f64::INFINITY;
    let mut count = 0;
    for (n, spec) in cases {
        let m = build_model(&spec)?;
        let sys = select_orthogonal_system(&m, n)?;
        let space = m.space();
        let vac = FockVector::vacuum(space);
        let mut tests = vec![TensorVector::product(&vac, &vac)];
        for _ in 0..3 {
            let a = fock_vector(r, space, 1);
            let c = fock_vector(r, space, 1);
            tests.push(TensorVector::product(&a, &c));
        }
        let ones = vec![C64::new(1.0, 0.0); n];
        let rep = sn_identity_check(&m, &sys, &ones, &tests)?;
        ident = ident.max(rep.identity_residual);
        slack = slack.min(rep.bound_slack());
        b.metric(&format!("n{n}.direct_norm"), rep.direct_norm);
        b.metric(&format!("n{n}.summand_bound"), rep.summand_bound);
        b.metric(&format!("n{n}.bound"), rep.bound);
        count += tests.len();
    }
    b.check("identity", count, ident, 1e-12);
    b.slack("norm_bound", 3, slack, 1e-10);
    Ok(())
}

/// Random `T` with `ITI = T` and `‖T‖ <= 1`, from averaging with `ITI`.
fn random_compatible_contraction(r: &mut SuiteRng, model: &RepModel) -> DMatrix<C64> {
    let d = model.dim();
    let x = complex_matrix(r, d, d);
    let y = (&x + iti_matrix(model, &x)) * C64::new(0.5, 0.0);
    let n = spectral_norm(&y);
    if n > 1.0 {
        y / C64::new(n, 0.0)
    } else {
        y
    }
}

fn quantization(b: &mut Builder, r: &mut SuiteRng) -> Result<()> {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 3))?;
    let space = m.space();
    let d = m.dim();
    let mut functorial: f64 = 0.0;
    let mut unital: f64 = 0.0;
    let mut contractive = f64::INFINITY;
    let mut propagation: f64 = 0.0;
    let mut wick_map: f64 = 0.0;
    let mut state: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..10 {
        let s = random_compatible_contraction(r, &m);
        let t = random_compatible_contraction(r, &m);
        let gs = first_quantization(&s)?;
        let gt = first_quantization(&t)?;
        let gst = first_quantization(&(&s * &t))?;
        functorial = functorial.max(dense_residual(&gs.compose(&gt)?.sub(&gst)?, space)?);
        let vac = FockVector::vacuum(space);
        unital = unital.max(gt.apply(&vac)?.distance(&vac));
        contractive = contractive.min(1.0 + 1e-12 - operator_norm(&gt, space)?.value);
        propagation = propagation.max(i_compatibility_defect(&m, &t));

        let spec = ContractionSpec::new(&m, t.clone())?;
        let letters: Vec<Vec<C64>> = (0..3).map(|_| complex_vector(r, d)).collect();
        let word = FockVector::product(space, &letters)?;
        let mapped = second_quantize_symbol(&m, &spec, &word)?;
        let t_letters: Vec<Vec<C64>> =
            letters.iter().map(|e| (&t * nalgebra::DVector::from_vec(e.clone())).iter().copied().collect()).collect();
        let want = wick_operator(&m, &t_letters)?;
        let got = symbol_to_operator(&m, &mapped)?;
        wick_map = wick_map.max(dense_residual(&got.sub(&want)?, space)?);
        let xi = fock_vector(r, space, 3);
        state = state.max((second_quantize_symbol(&m, &spec, &xi)?.vacuum_amplitude() - xi.vacuum_amplitude()).norm());
        cases += 1;
    }
    b.check("functoriality", cases, functorial, 1e-12);
    b.check("unitality", cases, unital, 1e-12);
    b.slack("contractivity", cases, contractive, 0.0);
    b.check("compatibility", cases, propagation, 1e-12);
    b.check("wick_map", cases, wick_map, 1e-12);
    b.check("state", cases, state, 1e-12);

    // Γ̃(T) commutes with the degree-wise conjugation I^{⊗n} when ITI = T.
    let mut conj: f64 = 0.0;
    for _ in 0..5 {
        let t = random_compatible_contraction(r, &m);
        let g = first_quantization(&t)?;
        let xi = fock_vector(r, space, 3);
        conj = conj.max(involution_fock(&m, &g.apply(&xi)?).distance(&g.apply(&involution_fock(&m, &xi))?));
    }
    b.check("conjugation_commutes", 5, conj, 1e-12);

    let band_specs = [
        RepSpec::pairs(&[(2.0, 2), (3.0, 1), (5.0, 1)], 2, 1),
        RepSpec::pairs(&[(1.5, 1), (2.5, 1)], 0, 1),
        RepSpec::trivial(4, 1),
    ];
    let mut defect: f64 = 0.0;
    let mut approx = f64::INFINITY;
    let mut norm = f64::INFINITY;
    let mut rank_ok = f64::INFINITY;
    let mut band_cases = 0;
    for spec in &band_specs {
        let bm = build_model(spec)?;
        for _ in 0..20 {
            let k = r.random_range(1..=3);
            let family: Vec<Vec<C64>> = (0..k)
                .map(|_| {
                    let mut v = complex_vector(r, bm.dim());
                    // Sparsify so that some bands are unused.
                    for x in v.iter_mut() {
                        if r.random_bool(0.4) {
                            *x = C64::new(0.0, 0.0);
                        }
                    }
                    if v.iter().all(|x| x.norm() == 0.0) {
                        v[0] = C64::new(1.0, 0.0);
                    }
                    v
                })
                .collect();
            let eps = [1e-3, 0.1, 0.5, 0.9, 1.5][r.random_range(0..5)];
            let ba = band_approximant(&bm, &family, eps)?;
            defect = defect.max(ba.contraction.i_defect);
            approx = approx.min(eps - ba.residual);
            norm = norm.min(1.0 + 1e-12 - ba.contraction.norm_bound);
            rank_ok = rank_ok.min(bm.dim() as f64 - ba.rank as f64);
            band_cases += 1;
        }
    }
    b.check("band_compatibility", band_cases, defect, 1e-12);
    b.slack("band_approximation", band_cases, approx, 1e-12);
    b.slack("band_contraction", band_cases, norm, 0.0);
    b.slack("band_rank", band_cases, rank_ok, 0.0);
    Ok(())
}

/// `I^{⊗n}` on every degree: `I(e_1 ⊗ ... ⊗ e_n) = Ie_1 ⊗ ... ⊗ Ie_n`.
fn involution_fock(model: &RepModel, xi: &FockVector) -> FockVector {
    let space = xi.space();
    let mut out = FockVector::zeros(space);
    for (i, a) in xi.amplitudes().iter().enumerate() {
        if *a == C64::new(0.0, 0.0) {
            continue;
        }
        let w = space.word_at(i);
        let mut coef = a.conj();
        let mut letters = Vec::with_capacity(w.len());
        for &l in &w.letters {
            letters.push(model.partner(l));
            coef *= model.eigenvalues()[l].powf(-0.5);
        }
        let j = space.index_of(&TensorWord::new(letters)).expect("same length");
        out.amplitudes_mut()[j] += coef;
    }
    out
}
