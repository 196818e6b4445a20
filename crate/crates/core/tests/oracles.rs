//! Independent oracles for the documented example values: a brute-force
//! Fock construction built from word lists, Dyck-path enumeration, closed
//! forms and direct expansion.

use std::f64::consts::PI;

use awlab_core::araki_woods::{
    build_model, catalan, field_operator, involution_apply, semicircular_moment, two_point, wick_operator,
};
use awlab_core::bounds::majf_check;
use awlab_core::deformation::{
    alpha, beta, select_orthogonal_system, sn_identity_check, transversality_residual, DoubledModel,
};
use awlab_core::fock::{inner, unit_vector, vec_norm};
use awlab_core::multipliers::{
    apply_radial_multiplier, circulant_reference, haagerup_net, hankel_matrix, projection_pd_norm, radial_norm,
    toeplitz_lower_bound, RadialSymbol,
};
use awlab_core::norm::{operator_norm, singular_values, trace_norm};
use awlab_core::quantization::{
    band_approximant, cmap_map, cmap_probes, i_compatibility_defect, iti_matrix, probe_residual,
    second_quantize_symbol, toeplitz_functor_check, ContractionSpec, Monomial,
};
use awlab_core::{FockSpace, FockVector, LinearOperator, RepSpec, TensorVector, C64};
use nalgebra::DMatrix;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn max_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Words of length `<= l` over `d` letters, by degree and then as base-`d`
/// numbers with the first letter most significant.
fn words(d: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for n in 1..=l {
        for code in 0..d.pow(n as u32) {
            let mut w = vec![0; n];
            let mut x = code;
            for k in (0..n).rev() {
                w[k] = x % d;
                x /= d;
            }
            out.push(w);
        }
    }
    out
}

/// Dense `ℓ(ξ)` on the truncated space: `e_w ↦ Σ_i ξ_i e_{iw}`, dropping
/// words that leave the truncation.
fn creation_oracle(xi: &[C64], d: usize, l: usize) -> DMatrix<C64> {
    let ws = words(d, l);
    let index = |w: &Vec<usize>| ws.iter().position(|v| v == w);
    let mut m = DMatrix::zeros(ws.len(), ws.len());
    for (j, w) in ws.iter().enumerate() {
        if w.len() == l {
            continue;
        }
        for (i, x) in xi.iter().enumerate() {
            let mut v = vec![i];
            v.extend_from_slice(w);
            m[(index(&v).unwrap(), j)] += x;
        }
    }
    m
}

fn rotation_oracle(d: usize, s: f64) -> DMatrix<C64> {
    let (sn, cs) = (PI * s / 2.0).sin_cos();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        m[(i, i)] = c(cs);
        m[(i + d, i + d)] = c(cs);
        m[(i, i + d)] = c(-sn);
        m[(i + d, i)] = c(sn);
    }
    m
}

/// Number of ±1 paths of length `2k` that stay nonnegative and end at 0.
fn dyck_paths(k: usize) -> u64 {
    (0u64..1 << (2 * k))
        .filter(|bits| {
            let mut h: i64 = 0;
            for s in 0..2 * k {
                h += if bits >> s & 1 == 1 { 1 } else { -1 };
                if h < 0 {
                    return false;
                }
            }
            h == 0
        })
        .count() as u64
}

#[test]
fn fock_dimension_by_summation() {
    let s = FockSpace::new(3, 4).unwrap();
    assert_eq!(s.total_dim(), 1 + 3 + 9 + 27 + 81);
    assert_eq!(s.total_dim(), words(3, 4).len());
}

#[test]
fn basis_order_matches_word_enumeration() {
    let s = FockSpace::new(2, 3).unwrap();
    for (i, w) in words(2, 3).into_iter().enumerate() {
        assert_eq!(s.word_at(i).letters, w);
    }
}

#[test]
fn creation_matches_brute_force_matrix() {
    let xi = vec![C64::new(0.3, -1.0), c(2.0), C64::new(0.0, 0.5)];
    let space = FockSpace::new(3, 3).unwrap();
    let got = LinearOperator::creation(&xi).to_dense(&space).unwrap();
    let want = creation_oracle(&xi, 3, 3);
    assert!(max_entry(&(got - &want)) < 1e-15);
    let got_star = LinearOperator::annihilation(&xi).to_dense(&space).unwrap();
    assert!(max_entry(&(got_star - want.adjoint())) < 1e-15);
}

#[test]
fn annihilation_after_creation_is_inner_product() {
    // ℓ(f)*ℓ(e) = ⟨f, e⟩ on degrees <= L - 1.
    let (d, l) = (2, 3);
    let e = vec![C64::new(1.0, 2.0), c(-0.5)];
    let f = vec![c(0.25), C64::new(0.0, 1.0)];
    let prod = creation_oracle(&f, d, l).adjoint() * creation_oracle(&e, d, l);
    let ip = inner(&f, &e);
    let low = FockSpace::new(d, l).unwrap().block_range(l).start;
    let got = LinearOperator::annihilation(&f)
        .compose(&LinearOperator::creation(&e))
        .unwrap()
        .to_dense(&FockSpace::new(d, l).unwrap())
        .unwrap();
    for j in 0..low {
        for i in 0..low {
            let want = if i == j { ip } else { c(0.0) };
            assert!((prod[(i, j)] - want).norm() < 1e-14);
            assert!((got[(i, j)] - want).norm() < 1e-14);
        }
    }
}

#[test]
fn creation_norm_equals_vector_norm() {
    let xi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), c(1.0)];
    let space = FockSpace::new(3, 2).unwrap();
    let n = operator_norm(&LinearOperator::creation(&xi), &space).unwrap().value;
    assert!((n - vec_norm(&xi)).abs() < 1e-12);
    let oracle = singular_values(&creation_oracle(&xi, 3, 2))[0];
    assert!((oracle - vec_norm(&xi)).abs() < 1e-12);
}

#[test]
fn commutator_sum_on_vacuum() {
    let e = vec![c(1.0), C64::new(0.0, -2.0)];
    let space = FockSpace::new(2, 2).unwrap();
    let le = LinearOperator::creation(&e);
    let x = le.compose(&le.adjoint()).unwrap().add(&le.adjoint().compose(&le).unwrap()).unwrap();
    let v = x.apply(&FockVector::vacuum(&space)).unwrap();
    let want = FockVector::vacuum(&space).scaled(c(vec_norm(&e).powi(2)));
    assert!(v.max_abs_diff(&want) < 1e-14);
}

#[test]
fn symmetric_two_by_two_trace_norm() {
    let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(0.0)]);
    let l1 = (1.0 + 5f64.sqrt()) / 2.0;
    let l2 = (1.0 - 5f64.sqrt()) / 2.0;
    assert!((trace_norm(&m) - (l1.abs() + l2.abs())).abs() < 1e-14);
    assert!((trace_norm(&m) - 5f64.sqrt()).abs() < 1e-14);
}

#[test]
fn vacuum_state_of_number_like_operator() {
    let xi = vec![C64::new(0.3, 0.4), c(1.2)];
    let space = FockSpace::new(2, 2).unwrap();
    let l = LinearOperator::creation(&xi);
    let v = l.adjoint().compose(&l).unwrap().apply(&FockVector::vacuum(&space)).unwrap();
    assert!((v.vacuum_amplitude() - c(vec_norm(&xi).powi(2))).norm() < 1e-14);
}

#[test]
fn majf_single_term_attains_one() {
    let space = FockSpace::new(2, 3).unwrap();
    let e1 = unit_vector(2, 0);
    let r = majf_check(&space, &[c(1.0)], &[e1.clone()], &[e1]).unwrap();
    assert!((r.annihilating_norm - 1.0).abs() < 1e-12);
    assert!((r.annihilating_bound - 1.0).abs() < 1e-15);
}

#[test]
fn majf_two_terms_against_brute_svd() {
    let (d, l) = (4, 4);
    let space = FockSpace::new(d, l).unwrap();
    let e: Vec<_> = (0..2).map(|i| unit_vector(d, i)).collect();
    let f: Vec<_> = (2..4).map(|i| unit_vector(d, i)).collect();
    let r = majf_check(&space, &[c(1.0), c(1.0)], &e, &f).unwrap();
    let mut down = DMatrix::zeros(space.total_dim(), space.total_dim());
    let mut up = down.clone();
    for i in 0..2 {
        let le = creation_oracle(&e[i], d, l);
        let lf = creation_oracle(&f[i], d, l);
        down += &le * lf.adjoint() * c(0.5);
        up += &le * &lf * c(0.5);
    }
    assert!((r.annihilating_norm - singular_values(&down)[0]).abs() < 1e-12);
    assert!((r.creating_norm - singular_values(&up)[0]).abs() < 1e-12);
    // Distinct basis vectors attain both bounds: ‖·‖ = 1/2 and 1/√2.
    assert!((r.annihilating_norm - 0.5).abs() < 1e-12);
    assert!((r.creating_norm - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(r.min_slack() > -1e-12);
}

#[test]
fn araki_woods_pair_model_values() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 0, 2)).unwrap();
    let p = m.pairs()[0];
    let a = m.generator();
    assert!((a[(p.plus, p.plus)] - 2.0).abs() < 1e-15);
    assert!((a[(p.minus, p.minus)] - 0.5).abs() < 1e-15);
    let plus = unit_vector(2, p.plus);
    let minus = unit_vector(2, p.minus);
    let ip = involution_apply(&m, &plus);
    let im = involution_apply(&m, &minus);
    for k in 0..2 {
        assert!((ip[k] - minus[k] * 2f64.powf(-0.5)).norm() < 1e-15);
        assert!((im[k] - plus[k] * 2f64.sqrt()).norm() < 1e-15);
    }
    let xi = vec![C64::new(0.3, 1.0), C64::new(-2.0, 0.1)];
    let back = involution_apply(&m, &involution_apply(&m, &xi));
    assert!(back.iter().zip(&xi).all(|(a, b)| (a - b).norm() < 1e-14));
}

#[test]
fn fixed_points_have_real_dimension_d() {
    for spec in [RepSpec::pairs(&[(2.0, 1), (5.0, 2)], 2, 1), RepSpec::trivial(3, 1)] {
        let m = build_model(&spec).unwrap();
        let d = m.dim();
        // Real matrix of ξ ↦ Iξ - ξ on C^d ≅ R^{2d}.
        let mut r = DMatrix::<f64>::zeros(2 * d, 2 * d);
        for k in 0..2 * d {
            let mut v = vec![c(0.0); d];
            v[k % d] = if k < d { c(1.0) } else { C64::new(0.0, 1.0) };
            let out = involution_apply(&m, &v);
            for i in 0..d {
                r[(i, k)] = (out[i] - v[i]).re;
                r[(i + d, k)] = (out[i] - v[i]).im;
            }
        }
        let rank = r.svd(false, false).singular_values.iter().filter(|s| **s > 1e-10).count();
        assert_eq!(2 * d - rank, d);
    }
}

#[test]
fn field_adjoint_is_field_of_involution() {
    let m = build_model(&RepSpec::pairs(&[(3.0, 1)], 1, 3)).unwrap();
    let xi = vec![C64::new(0.2, 0.7), c(-1.0), C64::new(0.0, 0.4)];
    let w = field_operator(&m, &xi).unwrap().to_dense(m.space()).unwrap();
    let wi = field_operator(&m, &involution_apply(&m, &xi)).unwrap().to_dense(m.space()).unwrap();
    assert!(max_entry(&(w.adjoint() - wi)) < 1e-14);
}

#[test]
fn wick_low_orders_against_brute_force() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 3)).unwrap();
    let (d, l) = (3, 3);
    let space = m.space();
    let id = DMatrix::<C64>::identity(space.total_dim(), space.total_dim());
    assert!(max_entry(&(wick_operator(&m, &[]).unwrap().to_dense(space).unwrap() - &id)) < 1e-15);
    let e0 = vec![c(1.0), C64::new(0.0, 0.5), c(0.0)];
    let e1 = vec![c(0.0), c(1.0), c(2.0)];
    let field = |x: &Vec<C64>| creation_oracle(x, d, l) + creation_oracle(&involution_apply(&m, x), d, l).adjoint();
    let w0 = wick_operator(&m, &[e0.clone()]).unwrap().to_dense(space).unwrap();
    assert!(max_entry(&(w0 - field(&e0))) < 1e-14);
    // W(e0 ⊗ e1) = W(e0)W(e1) - ⟨ē0, e1⟩ on degrees <= L - 1.
    let w01 = wick_operator(&m, &[e0.clone(), e1.clone()]).unwrap().to_dense(space).unwrap();
    let want = field(&e0) * field(&e1) - &id * inner(&involution_apply(&m, &e0), &e1);
    let top = space.block_range(l).start;
    for j in 0..top {
        for i in 0..space.total_dim() {
            assert!((w01[(i, j)] - want[(i, j)]).norm() < 1e-13);
        }
    }
}

#[test]
fn creations_build_tensor_products() {
    let space = FockSpace::new(2, 2).unwrap();
    let xi = vec![c(1.0), C64::new(0.0, 1.0)];
    let eta = vec![c(2.0), c(-1.0)];
    let v = LinearOperator::creation(&xi)
        .compose(&LinearOperator::creation(&eta))
        .unwrap()
        .apply(&FockVector::vacuum(&space))
        .unwrap();
    for (i, w) in words(2, 2).into_iter().enumerate() {
        let want = if w.len() == 2 { xi[w[0]] * eta[w[1]] } else { c(0.0) };
        assert!((v.amplitudes()[i] - want).norm() < 1e-15);
    }
}

#[test]
fn two_point_values() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 2)).unwrap();
    for xi in m.kr_basis() {
        // Direct expansion of (ℓ(ξ) + ℓ(ξ)*)² on Ω for ξ = Iξ.
        let w = creation_oracle(xi, 3, 2) + creation_oracle(xi, 3, 2).adjoint();
        let direct = (&w * &w)[(0, 0)];
        assert!((direct - c(1.0)).norm() < 1e-14);
        assert!((two_point(&m, xi, xi).unwrap() - c(1.0)).norm() < 1e-14);
    }
    let plus = unit_vector(3, m.pairs()[0].plus);
    assert!(two_point(&m, &plus, &plus).unwrap().norm() < 1e-15);
}

#[test]
fn catalan_numbers_match_dyck_paths() {
    for k in 0..=7 {
        assert_eq!(catalan(k), dyck_paths(k));
    }
    let m = build_model(&RepSpec::trivial(1, 6)).unwrap();
    let xi = &m.kr_basis()[0];
    assert!((semicircular_moment(&m, xi, 1).unwrap() - dyck_paths(1) as f64).abs() < 1e-12);
    assert!((semicircular_moment(&m, xi, 3).unwrap() - dyck_paths(3) as f64).abs() < 1e-12);
}

#[test]
fn hankel_examples() {
    let b = hankel_matrix(&RadialSymbol::delta(1), 2);
    let want = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    assert!(max_entry(&(&b.matrix - want)) < 1e-15);
    assert!((b.trace_norm - 2.0).abs() < 1e-14);
    let p = hankel_matrix(&RadialSymbol::cutoff_projection(1), 2);
    assert!((p.trace_norm - 5f64.sqrt()).abs() < 1e-14);
    let t = 0.3;
    let g = hankel_matrix(&RadialSymbol::geometric(t).unwrap(), 8);
    for i in 0..8 {
        for j in 0..8 {
            let want = (1.0 - (-2.0 * t).exp()) * (-(i as f64) * t).exp() * (-(j as f64) * t).exp();
            assert!((g.matrix[(i, j)] - c(want)).norm() < 1e-15);
        }
    }
}

#[test]
fn cb_norm_examples() {
    // ‖m_φ‖_cb = 2 for φ(n) = δ_{n,1}.
    assert!((radial_norm(&RadialSymbol::delta(1)).value - 2.0).abs() < 1e-12);
    for t in [0.1, 0.5, 1.0, 2.0] {
        let s = RadialSymbol::geometric(t).unwrap();
        assert!((radial_norm(&s).value - 1.0).abs() < 1e-9);
        // Rank-one oracle on the same window: (1 - e^{-2t}) Σ_{i<N} e^{-2it} = 1 - e^{-2Nt}.
        let n = s.psi().len();
        let u2: f64 = (0..n).map(|i| (-2.0 * i as f64 * t).exp()).sum();
        let rank_one = u2 * (1.0 - (-2.0 * t).exp());
        assert!((rank_one - (1.0 - (-2.0 * n as f64 * t).exp())).abs() < 1e-12);
        assert!((radial_norm(&s).value - rank_one).abs() < 1e-9);
    }
    assert!((projection_pd_norm(1).norm.value - 5f64.sqrt()).abs() < 1e-14);
}

#[test]
fn projection_norm_against_riemann_sum() {
    for d in [100usize, 400] {
        let r = projection_pd_norm(d);
        let m = (d + 1) as f64;
        let riemann: f64 = (0..=d).map(|k| (c(1.0) + C64::from_polar(1.0, 2.0 * PI * k as f64 / m)).norm()).sum();
        // B + e_{dd} is circulant-like with these singular values, so
        // ‖P_d‖ differs from the sum by at most the rank-one correction.
        assert!((r.norm.value - riemann).abs() <= 1.0 + 1e-9);
        let tol = if d == 100 { 0.02 } else { 0.005 };
        assert!((r.ratio.unwrap() - 1.0).abs() < tol);
        assert!((riemann / (4.0 * d as f64 / PI) - 1.0).abs() < tol);
    }
}

#[test]
fn circulant_closed_forms() {
    let one = circulant_reference(1);
    assert!((one[0] - 2.0).abs() < 1e-15 && one[1].abs() < 1e-15);
    let three = circulant_reference(3);
    let want = [2.0, 2f64.sqrt(), 2f64.sqrt(), 0.0];
    for (a, b) in three.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn multiplier_composition_is_pointwise_product() {
    let space = FockSpace::new(2, 4).unwrap();
    let phi = RadialSymbol::real_finite(&[0.5, -1.0, 2.0, 0.25, 3.0]);
    let rho = RadialSymbol::real_finite(&[1.5, 0.5, -0.75, 1.0, -2.0]);
    let amps: Vec<C64> = (0..space.total_dim()).map(|i| C64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.03)).collect();
    let xi = FockVector::from_amplitudes(&space, amps).unwrap();
    let lhs = apply_radial_multiplier(&phi, &apply_radial_multiplier(&rho, &xi));
    let rhs = apply_radial_multiplier(&phi.times(&rho), &xi);
    assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    for (i, a) in xi.amplitudes().iter().enumerate() {
        let n = space.degree_of(i);
        assert!((lhs.amplitudes()[i] - a * phi.eval(n) * rho.eval(n)).norm() < 1e-14);
    }
}

#[test]
fn haagerup_net_examples() {
    assert!(haagerup_net(1).unwrap().certificate <= 2.0);
    assert!(haagerup_net(20).unwrap().certificate <= 1.05);
}

#[test]
fn toeplitz_witness_examples() {
    let w = toeplitz_lower_bound(&RadialSymbol::delta(1), 8, 200, 0).unwrap();
    assert!(w.best <= 2.0 + 1e-9);
    assert!(w.best >= 1.5);
    let g = toeplitz_lower_bound(&RadialSymbol::geometric(1.0).unwrap(), 30, 50, 0).unwrap();
    assert!(g.best <= 1.0 + 1e-9);
}

#[test]
fn scalar_contraction_quantizes_to_geometric_multiplier() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 3)).unwrap();
    let t: f64 = 0.4;
    let spec = ContractionSpec::new(&m, DMatrix::identity(3, 3) * c((-t).exp())).unwrap();
    let amps: Vec<C64> = (0..m.space().total_dim()).map(|i| C64::new(1.0, i as f64)).collect();
    let xi = FockVector::from_amplitudes(m.space(), amps).unwrap();
    let got = second_quantize_symbol(&m, &spec, &xi).unwrap();
    let want = apply_radial_multiplier(&RadialSymbol::geometric_cut(t, 3), &xi);
    assert!(got.max_abs_diff(&want) < 1e-13);
}

#[test]
fn incompatible_projection_has_positive_defect() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 0, 1)).unwrap();
    let p = m.pairs()[0];
    let mut t = DMatrix::zeros(2, 2);
    t[(p.plus, p.plus)] = c(1.0);
    let mut want = DMatrix::zeros(2, 2);
    want[(p.minus, p.minus)] = c(1.0);
    assert!(max_entry(&(iti_matrix(&m, &t) - want)) < 1e-15);
    assert!(i_compatibility_defect(&m, &t) > 0.5);
    let spec = ContractionSpec::new(&m, t).unwrap();
    assert!(spec.i_defect > 0.5);
    assert!(second_quantize_symbol(&m, &spec, &FockVector::vacuum(m.space())).is_err());
}

#[test]
fn compression_by_coordinate_projection() {
    let space = FockSpace::new(3, 3).unwrap();
    let mut t = DMatrix::zeros(3, 3);
    t[(0, 0)] = c(1.0);
    t[(1, 1)] = c(1.0);
    let x = Monomial { creators: vec![unit_vector(3, 0)], annihilators: vec![unit_vector(3, 1)] };
    let r = toeplitz_functor_check(&t, &[x.clone()], &space).unwrap();
    assert!(r.max_residual() < 1e-14);
    let perm = DMatrix::from_fn(3, 3, |i, j| if (j + 1) % 3 == i { c(1.0) } else { c(0.0) });
    let r = toeplitz_functor_check(&perm, &[x], &space).unwrap();
    assert!(r.max_residual() < 1e-14);
    // Entrywise oracle for the permutation: conjugating ℓ(e_0)ℓ(e_1)* gives ℓ(e_1)ℓ(e_2)*.
    let g = LinearOperator::tensor_power(perm.clone());
    let gs = LinearOperator::tensor_power(perm.adjoint());
    let lhs = LinearOperator::product(vec![
        g,
        LinearOperator::creation(&unit_vector(3, 0)),
        LinearOperator::annihilation(&unit_vector(3, 1)),
        gs,
    ])
    .unwrap()
    .to_dense(&space)
    .unwrap();
    let rhs = creation_oracle(&unit_vector(3, 1), 3, 3) * creation_oracle(&unit_vector(3, 2), 3, 3).adjoint();
    assert!(max_entry(&(lhs - rhs)) < 1e-14);
}

#[test]
fn band_for_single_pair_is_its_projection() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1), (3.0, 1)], 1, 1)).unwrap();
    let p = m.pairs()[0];
    let mut f = vec![c(0.0); 5];
    f[p.plus] = C64::new(1.0, 0.5);
    f[p.minus] = c(-0.3);
    for eps in [1e-3, 0.5] {
        let b = band_approximant(&m, &[f.clone()], eps).unwrap();
        assert_eq!(b.rank, 2);
        let mut want = DMatrix::zeros(5, 5);
        want[(p.plus, p.plus)] = c(1.0);
        want[(p.minus, p.minus)] = c(1.0);
        assert!(max_entry(&(&b.contraction.t - want)) < 1e-12);
    }
}

#[test]
fn band_for_trivial_model_projects_onto_f_and_if() {
    let m = build_model(&RepSpec::trivial(4, 1)).unwrap();
    let f = vec![C64::new(1.0, 1.0), c(2.0), c(0.0), c(0.0)];
    let b = band_approximant(&m, &[f.clone()], 1e-6).unwrap();
    // Orthonormalize {f, If} by hand.
    let g = involution_apply(&m, &f);
    let nf = vec_norm(&f);
    let u: Vec<C64> = f.iter().map(|z| z / nf).collect();
    let ip = inner(&u, &g);
    let v: Vec<C64> = g.iter().zip(&u).map(|(a, b)| a - b * ip).collect();
    let nv = vec_norm(&v);
    let mut want = DMatrix::<C64>::zeros(4, 4);
    for w in [u, v.iter().map(|z| z / nv).collect::<Vec<_>>()] {
        let col = nalgebra::DVector::from_vec(w);
        want += &col * col.adjoint();
    }
    assert!(max_entry(&(&b.contraction.t - want)) < 1e-12);
}

#[test]
fn saturated_bands_give_the_identity() {
    // Two generic vectors span each 2-dimensional eigenspace, so both bands
    // are full and T must be the identity. The spanning sets are
    // rank-deficient, which once broke the band projections.
    let m = build_model(&RepSpec::pairs(&[(1.05, 2), (4.990626452169825, 2)], 0, 2)).unwrap();
    let mut r = awlab_core::random::rng(261573724734295875);
    let family: Vec<Vec<C64>> = (0..2).map(|_| awlab_core::random::complex_vector(&mut r, 8)).collect();
    let b = band_approximant(&m, &family, 0.05).unwrap();
    assert_eq!(b.rank, 8);
    assert!(max_entry(&(&b.contraction.t - DMatrix::<C64>::identity(8, 8))) < 1e-12);
    assert!(b.residual < 1e-12);
}

#[test]
fn cmap_with_identity_contraction() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 3)).unwrap();
    let id = ContractionSpec::identity(&m);
    let probes = cmap_probes(&m, m.space()).unwrap();
    let mut last = f64::INFINITY;
    for n in [1, 5, 20] {
        let h = haagerup_net(n).unwrap();
        let map = cmap_map(&RadialSymbol::geometric_cut(h.t, h.d), &id).unwrap();
        if n == 20 {
            assert!(map.certificate <= 1.05);
        }
        let r = probe_residual(&map, &probes).unwrap();
        assert!(r < last);
        last = r;
    }
}

#[test]
fn deformation_examples() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1)], 1, 2)).unwrap();
    let dm = DoubledModel::new(&m).unwrap();
    let xi = FockVector::product(m.space(), &[m.kr_basis()[0].clone()]).unwrap();
    let first = dm.embed_first(&xi).unwrap();
    let second = dm.embed_second(&xi).unwrap();
    assert!(alpha(&dm, 1.0, &first).unwrap().max_abs_diff(&second) < 1e-15);
    assert!(beta(&dm, &first).unwrap().max_abs_diff(&first) < 1e-15);
    // α_s acts on letters by the rotation matrix.
    let s = 0.5;
    let r = rotation_oracle(3, s);
    let e = dm.iota1(&m.kr_basis()[1]);
    let word = FockVector::product(dm.doubled.space(), &[e.clone(), e.clone()]).unwrap();
    let re: Vec<C64> = (&r * nalgebra::DVector::from_vec(e)).iter().copied().collect();
    let want = FockVector::product(dm.doubled.space(), &[re.clone(), re]).unwrap();
    assert!(alpha(&dm, s, &word).unwrap().max_abs_diff(&want) < 1e-15);
}

#[test]
fn transversality_equality_in_degree_one() {
    let m = build_model(&RepSpec::trivial(2, 2)).unwrap();
    let dm = DoubledModel::new(&m).unwrap();
    let unit = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let xi = dm.embed_first(&FockVector::product(m.space(), &[unit]).unwrap()).unwrap();
    for s in [0.1, 0.37, 0.5, 1.0] {
        let a = alpha(&dm, s, &xi).unwrap();
        let lhs = 2.0 * a.distance(&awlab_core::deformation::project_first_copy(&dm, &a));
        let rhs = xi.distance(&alpha(&dm, 2.0 * s, &xi).unwrap());
        let want = 4.0 * (1.0 - (PI * s / 2.0).cos().powi(2));
        assert!((lhs * lhs - want).abs() < 1e-12);
        assert!((rhs * rhs - want).abs() < 1e-12);
        assert!(transversality_residual(&dm, &xi, s).unwrap().abs() < 1e-10);
    }
}

#[test]
fn orthogonal_system_norms() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1), (4.0, 1)], 0, 1)).unwrap();
    let sys = select_orthogonal_system(&m, 2).unwrap();
    let norms: Vec<f64> = sys.iter().map(|e| vec_norm(&involution_apply(&m, e))).collect();
    assert!((norms[0] - 2f64.powf(-0.5)).abs() < 1e-15);
    assert!((norms[1] - 0.5).abs() < 1e-15);
}

#[test]
fn s1_identity_on_vacuum() {
    let m = build_model(&RepSpec::trivial(1, 2)).unwrap();
    let sys = select_orthogonal_system(&m, 1).unwrap();
    let vac = FockVector::vacuum(m.space());
    let v = TensorVector::product(&vac, &vac);
    let sn = awlab_core::deformation::sn_operator(&m, &sys).unwrap();
    let got = sn.adjoint().compose(&sn).apply(&v).unwrap();
    let ebar = involution_apply(&m, &sys[0]);
    let word = FockVector::product(m.space(), &[ebar, sys[0].clone()]).unwrap();
    let mut want = TensorVector::product(&vac, &vac);
    want.axpy(c(1.0), &TensorVector::product(&vac, &word));
    assert!(got.max_abs_diff(&want) < 1e-14);
    let r = sn_identity_check(&m, &sys, &[c(1.0)], &[v]).unwrap();
    assert!(r.identity_residual < 1e-14);
}

#[test]
fn s4_norm_bound_holds() {
    let m = build_model(&RepSpec::pairs(&[(2.0, 1), (3.0, 1)], 2, 2)).unwrap();
    let sys = select_orthogonal_system(&m, 4).unwrap();
    let vac = FockVector::vacuum(m.space());
    let r = sn_identity_check(&m, &sys, &[c(1.0); 4], &[TensorVector::product(&vac, &vac)]).unwrap();
    assert!(r.bound_slack() >= 0.0);
}
