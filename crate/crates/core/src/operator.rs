//! Matrix-free linear operators on truncated Fock spaces.
//!
//! Operators are expression trees over creation/annihilation operators,
//! degree-wise scalings and tensor powers `1 ⊕ T ⊕ T^{⊗2} ⊕ ...`. Creation
//! discards whatever would leave the truncation, so a product that first
//! raises and later lowers the degree loses mass. [`LinearOperator::apply`]
//! avoids that by evaluating on a space enlarged by the operator's headroom
//! and compressing back: the result is the compression of the exact product.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, FockVector};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Degree bookkeeping for an operator. For every net degree shift `s`
/// reachable along a monomial path, `peaks` records the highest degree
/// (relative to the input) visited by any path with that shift. The headroom
/// is the largest excursion above `max(input, output)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaisingProfile {
    peaks: Vec<(i64, i64)>,
}

impl RaisingProfile {
    fn neutral() -> RaisingProfile {
        RaisingProfile { peaks: vec![(0, 0)] }
    }

    fn empty() -> RaisingProfile {
        RaisingProfile { peaks: Vec::new() }
    }

    fn single(shift: i64, peak: i64) -> RaisingProfile {
        RaisingProfile { peaks: vec![(shift, peak)] }
    }

    pub fn min_shift(&self) -> i64 {
        self.peaks.first().map_or(0, |p| p.0)
    }

    pub fn max_shift(&self) -> i64 {
        self.peaks.last().map_or(0, |p| p.0)
    }

    /// Maximal number of degrees an output can sit above its input.
    pub fn raised(&self) -> usize {
        self.max_shift().max(0) as usize
    }

    /// Maximal number of degrees an output can sit below its input.
    pub fn lowered(&self) -> usize {
        (-self.min_shift()).max(0) as usize
    }

    pub fn headroom(&self) -> usize {
        self.peaks.iter().map(|&(s, p)| (p - s.max(0)).max(0)).max().unwrap_or(0) as usize
    }

    fn insert(peaks: &mut Vec<(i64, i64)>, shift: i64, peak: i64) {
        match peaks.binary_search_by_key(&shift, |p| p.0) {
            Ok(i) => peaks[i].1 = peaks[i].1.max(peak),
            Err(i) => peaks.insert(i, (shift, peak)),
        }
    }

    fn hull(mut self, other: &RaisingProfile) -> RaisingProfile {
        for &(s, p) in &other.peaks {
            Self::insert(&mut self.peaks, s, p);
        }
        self
    }

    /// Profile of `outer ∘ inner`.
    fn then(inner: RaisingProfile, outer: &RaisingProfile) -> RaisingProfile {
        let mut peaks = Vec::new();
        for &(si, pi) in &inner.peaks {
            for &(so, po) in &outer.peaks {
                Self::insert(&mut peaks, si + so, pi.max(si + po));
            }
        }
        RaisingProfile { peaks }
    }
}

#[derive(Debug)]
enum Node {
    Identity,
    Create(Vec<C64>),
    Annihilate(Vec<C64>),
    Scale(C64, LinearOperator),
    Sum(Vec<LinearOperator>),
    /// `factors[0] ∘ factors[1] ∘ ...`; the last factor acts first.
    Product(Vec<LinearOperator>),
    /// Multiplies the degree-`n` block by `head[n]`, or by `even`/`odd`
    /// past the end of `head`.
    DegreeScaling { head: Vec<C64>, even: C64, odd: C64 },
    /// `1 ⊕ M ⊕ M^{⊗2} ⊕ ...` for a (possibly rectangular) matrix `M`.
    TensorPower(DMatrix<C64>),
}

#[derive(Clone, Debug)]
pub struct LinearOperator(Arc<Inner>);

#[derive(Debug)]
struct Inner {
    node: Node,
    profile: RaisingProfile,
}

/// Amplitudes plus the range of degrees that may be nonzero.
struct Work {
    space: FockSpace,
    amps: Vec<C64>,
    range: Option<(usize, usize)>,
}

impl Work {
    fn from_vector(v: &FockVector) -> Work {
        let space = v.space().clone();
        let range = nonzero_range(v);
        Work { amps: v.amplitudes().to_vec(), space, range }
    }

    fn zeros(space: FockSpace) -> Work {
        let n = space.total_dim();
        Work { space, amps: vec![ZERO; n], range: None }
    }
}

fn nonzero_range(v: &FockVector) -> Option<(usize, usize)> {
    let l = v.space().max_degree();
    let nz = |n: &usize| v.block(*n).iter().any(|a| *a != ZERO);
    let lo = (0..=l).find(nz)?;
    let hi = (0..=l).rev().find(nz)?;
    Some((lo, hi))
}

impl LinearOperator {
    fn node(node: Node) -> Self {
        let profile = Self::compute_profile(&node);
        LinearOperator(Arc::new(Inner { node, profile }))
    }

    pub fn identity() -> Self {
        Self::node(Node::Identity)
    }

    pub fn zero() -> Self {
        Self::node(Node::Sum(Vec::new()))
    }

    /// `ℓ(ξ)`: prepends `ξ` to every word.
    pub fn creation(xi: &[C64]) -> Self {
        Self::node(Node::Create(xi.to_vec()))
    }

    /// `ℓ(ξ)*`: strips the first letter against `ξ`.
    pub fn annihilation(xi: &[C64]) -> Self {
        Self::node(Node::Annihilate(xi.to_vec()))
    }

    pub fn degree_scaling(head: Vec<C64>, even: C64, odd: C64) -> Self {
        Self::node(Node::DegreeScaling { head, even, odd })
    }

    pub fn tensor_power(m: DMatrix<C64>) -> Self {
        Self::node(Node::TensorPower(m))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::node(Node::Scale(c, self.clone()))
    }

    pub fn sum(terms: Vec<LinearOperator>) -> Result<Self> {
        let mut dim = None;
        for t in &terms {
            dim = merge_dim(dim, t.in_dim())?;
            merge_dim(t.in_dim(), t.out_dim())?;
        }
        Ok(Self::node(Node::Sum(terms)))
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        Self::sum(vec![self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &LinearOperator) -> Result<Self> {
        Self::sum(vec![self.clone(), other.scale(-ONE)])
    }

    /// `factors[0] ∘ factors[1] ∘ ... ∘ factors[k-1]`.
    pub fn product(factors: Vec<LinearOperator>) -> Result<Self> {
        for w in factors.windows(2) {
            if let (Some(a), Some(b)) = (w[0].in_dim(), w[1].out_dim()) {
                if a != b {
                    return Err(Error::IncompatibleSpaces(format!(
                        "cannot compose an operator on C^{a} after one landing in C^{b}"
                    )));
                }
            }
        }
        Ok(Self::node(Node::Product(factors)))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        Self::product(vec![self.clone(), other.clone()])
    }

    pub fn adjoint(&self) -> Self {
        match &self.0.node {
            Node::Identity => self.clone(),
            Node::Create(x) => Self::annihilation(x),
            Node::Annihilate(x) => Self::creation(x),
            Node::Scale(c, x) => Self::node(Node::Scale(c.conj(), x.adjoint())),
            Node::Sum(ts) => Self::node(Node::Sum(ts.iter().map(|t| t.adjoint()).collect())),
            Node::Product(fs) => {
                Self::node(Node::Product(fs.iter().rev().map(|f| f.adjoint()).collect()))
            }
            Node::DegreeScaling { head, even, odd } => Self::degree_scaling(
                head.iter().map(|c| c.conj()).collect(),
                even.conj(),
                odd.conj(),
            ),
            Node::TensorPower(m) => Self::tensor_power(m.adjoint()),
        }
    }

    /// Dimension of the one-particle space the operator reads, when fixed.
    pub fn in_dim(&self) -> Option<usize> {
        match &self.0.node {
            Node::Identity | Node::DegreeScaling { .. } => None,
            Node::Create(x) | Node::Annihilate(x) => Some(x.len()),
            Node::Scale(_, x) => x.in_dim(),
            Node::Sum(ts) => ts.iter().find_map(|t| t.in_dim()),
            Node::Product(fs) => fs.iter().rev().find_map(|f| f.in_dim()),
            Node::TensorPower(m) => Some(m.ncols()),
        }
    }

    /// Dimension of the one-particle space of the output, when fixed.
    pub fn out_dim(&self) -> Option<usize> {
        match &self.0.node {
            Node::Identity | Node::DegreeScaling { .. } => None,
            Node::Create(x) | Node::Annihilate(x) => Some(x.len()),
            Node::Scale(_, x) => x.out_dim(),
            Node::Sum(ts) => ts.iter().find_map(|t| t.out_dim()),
            Node::Product(fs) => fs.iter().find_map(|f| f.out_dim()),
            Node::TensorPower(m) => Some(m.nrows()),
        }
    }

    pub fn profile(&self) -> &RaisingProfile {
        &self.0.profile
    }

    fn compute_profile(node: &Node) -> RaisingProfile {
        match node {
            Node::Identity | Node::DegreeScaling { .. } | Node::TensorPower(_) => {
                RaisingProfile::neutral()
            }
            Node::Create(_) => RaisingProfile::single(1, 1),
            Node::Annihilate(_) => RaisingProfile::single(-1, 0),
            Node::Scale(_, x) => x.profile().clone(),
            Node::Sum(ts) => ts.iter().fold(RaisingProfile::empty(), |acc, t| acc.hull(t.profile())),
            Node::Product(fs) => fs
                .iter()
                .rev()
                .fold(RaisingProfile::neutral(), |acc, f| RaisingProfile::then(acc, f.profile())),
        }
    }

    /// Exact evaluation followed by compression to the input truncation.
    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        self.check_input(v.space())?;
        let h = self.profile().headroom();
        if h == 0 {
            return Ok(self.apply_truncated_unchecked(v));
        }
        let big = v.space().enlarged(h)?;
        let w = self.apply_truncated_unchecked(&v.embed(&big)?);
        let target = FockSpace::new(w.space().dim(), v.space().max_degree())?;
        w.compress(&target)
    }

    /// Evaluation inside the given truncation, discarding overflow at every
    /// creation step.
    pub fn apply_truncated(&self, v: &FockVector) -> Result<FockVector> {
        self.check_input(v.space())?;
        Ok(self.apply_truncated_unchecked(v))
    }

    fn apply_truncated_unchecked(&self, v: &FockVector) -> FockVector {
        let w = self.eval(Work::from_vector(v));
        FockVector::from_amplitudes(&w.space, w.amps).expect("work buffer matches its space")
    }

    fn check_input(&self, space: &FockSpace) -> Result<()> {
        match self.in_dim() {
            Some(d) if d != space.dim() => {
                Err(Error::DimensionMismatch { expected: d, got: space.dim() })
            }
            _ => Ok(()),
        }
    }

    /// Output space for inputs living in `space`.
    pub fn codomain(&self, space: &FockSpace) -> Result<FockSpace> {
        self.check_input(space)?;
        match self.out_dim() {
            Some(d) if d != space.dim() => space.with_dim(d),
            _ => Ok(space.clone()),
        }
    }

    /// Dense matrix of the (headroom-evaluated) compression in graded-lex
    /// order. Columns are computed in parallel.
    pub fn to_dense(&self, space: &FockSpace) -> Result<DMatrix<C64>> {
        let out = self.codomain(space)?;
        let n = space.total_dim();
        let cols: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|j| self.apply(&FockVector::basis(space, j)).map(|v| v.into_amplitudes()))
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(out.total_dim(), n, |i, j| cols[j][i]))
    }

    fn eval(&self, w: Work) -> Work {
        if w.range.is_none() {
            return match &self.0.node {
                Node::TensorPower(m) if m.nrows() != w.space.dim() => {
                    Work::zeros(w.space.with_dim(m.nrows()).expect("smaller or equal space"))
                }
                _ => w,
            };
        }
        match &self.0.node {
            Node::Identity => w,
            Node::Create(xi) => create(xi, w),
            Node::Annihilate(xi) => annihilate(xi, w),
            Node::Scale(c, x) => {
                let mut r = x.eval(w);
                for a in &mut r.amps {
                    *a *= c;
                }
                r
            }
            Node::Sum(ts) => {
                if ts.is_empty() {
                    return Work::zeros(w.space);
                }
                let mut acc: Option<Work> = None;
                for t in ts {
                    let r = t.eval(Work { space: w.space.clone(), amps: w.amps.clone(), range: w.range });
                    acc = Some(match acc {
                        None => r,
                        Some(mut a) => {
                            for (x, y) in a.amps.iter_mut().zip(&r.amps) {
                                *x += y;
                            }
                            a.range = match (a.range, r.range) {
                                (None, x) | (x, None) => x,
                                (Some((l1, h1)), Some((l2, h2))) => Some((l1.min(l2), h1.max(h2))),
                            };
                            a
                        }
                    });
                }
                acc.unwrap()
            }
            Node::Product(fs) => fs.iter().rev().fold(w, |acc, f| f.eval(acc)),
            Node::DegreeScaling { head, even, odd } => {
                let mut w = w;
                let (lo, hi) = w.range.unwrap();
                for n in lo..=hi {
                    let c = head.get(n).copied().unwrap_or(if n % 2 == 0 { *even } else { *odd });
                    let r = w.space.block_range(n);
                    for a in &mut w.amps[r] {
                        *a *= c;
                    }
                }
                w
            }
            Node::TensorPower(m) => tensor_power(m, w),
        }
    }
}

fn merge_dim(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::IncompatibleSpaces(format!(
            "operators on C^{x} and C^{y} cannot be added"
        ))),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        _ => Ok(None),
    }
}

fn create(xi: &[C64], w: Work) -> Work {
    let (lo, hi) = w.range.unwrap();
    let l = w.space.max_degree();
    let mut out = Work::zeros(w.space.clone());
    if lo + 1 > l {
        return out;
    }
    for n in lo..=hi.min(l - 1) {
        let src = &w.amps[w.space.block_range(n)];
        let len = src.len();
        let dst_start = w.space.block_range(n + 1).start;
        for (a, &x) in xi.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let dst = &mut out.amps[dst_start + a * len..dst_start + (a + 1) * len];
            for (d, s) in dst.iter_mut().zip(src) {
                *d = x * s;
            }
        }
    }
    out.range = Some((lo + 1, (hi + 1).min(l)));
    out
}

fn annihilate(xi: &[C64], w: Work) -> Work {
    let (lo, hi) = w.range.unwrap();
    let mut out = Work::zeros(w.space.clone());
    if hi == 0 {
        return out;
    }
    for n in lo.max(1)..=hi {
        let src = &w.amps[w.space.block_range(n)];
        let len = w.space.block_len(n - 1);
        let dst_start = w.space.block_range(n - 1).start;
        let dst = &mut out.amps[dst_start..dst_start + len];
        for (a, &x) in xi.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let c = x.conj();
            for (d, s) in dst.iter_mut().zip(&src[a * len..(a + 1) * len]) {
                *d += c * s;
            }
        }
    }
    out.range = Some((lo.max(1) - 1, hi - 1));
    out
}

fn tensor_power(m: &DMatrix<C64>, w: Work) -> Work {
    let (lo, hi) = w.range.unwrap();
    let din = m.ncols();
    let dout = m.nrows();
    let out_space = w.space.with_dim(dout).expect("tensor power output space");
    let mut out = Work::zeros(out_space);
    for n in lo..=hi {
        let mut cur: Vec<C64> = w.amps[w.space.block_range(n)].to_vec();
        // After k axes: shape (dout^k, din, din^(n-k-1)).
        let mut outer = 1usize;
        for k in 0..n {
            let inner = din.pow((n - k - 1) as u32);
            let mut next = vec![ZERO; outer * dout * inner];
            for p in 0..outer {
                for b in 0..din {
                    let src = &cur[(p * din + b) * inner..(p * din + b + 1) * inner];
                    for a in 0..dout {
                        let c = m[(a, b)];
                        if c == ZERO {
                            continue;
                        }
                        let dst = &mut next[(p * dout + a) * inner..(p * dout + a + 1) * inner];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += c * s;
                        }
                    }
                }
            }
            cur = next;
            outer *= dout;
        }
        let r = out.space.block_range(n);
        out.amps[r].copy_from_slice(&cur);
    }
    out.range = Some((lo, hi));
    out
}

/// `⟨xΩ, Ω⟩`.
pub fn vacuum_expectation(x: &LinearOperator, space: &FockSpace) -> Result<C64> {
    Ok(x.apply(&FockVector::vacuum(space))?.vacuum_amplitude())
}

/// Vector in `F_left ⊗ F_right`, stored row-major with the left index major.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorVector {
    left: FockSpace,
    right: FockSpace,
    amps: Vec<C64>,
}

impl TensorVector {
    pub fn zeros(left: &FockSpace, right: &FockSpace) -> Self {
        TensorVector {
            left: left.clone(),
            right: right.clone(),
            amps: vec![ZERO; left.total_dim() * right.total_dim()],
        }
    }

    pub fn product(a: &FockVector, b: &FockVector) -> Self {
        let mut amps = Vec::with_capacity(a.amplitudes().len() * b.amplitudes().len());
        for x in a.amplitudes() {
            amps.extend(b.amplitudes().iter().map(|y| x * y));
        }
        TensorVector { left: a.space().clone(), right: b.space().clone(), amps }
    }

    pub fn left_space(&self) -> &FockSpace {
        &self.left
    }

    pub fn right_space(&self) -> &FockSpace {
        &self.right
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, i: usize, j: usize) -> C64 {
        self.amps[i * self.right.total_dim() + j]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn axpy(&mut self, c: C64, other: &TensorVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    pub fn distance(&self, other: &TensorVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &TensorVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Highest left and right degrees carrying nonzero amplitudes.
    pub fn degrees(&self) -> (usize, usize) {
        let rn = self.right.total_dim();
        let mut dl = 0;
        let mut dr = 0;
        for (k, a) in self.amps.iter().enumerate() {
            if *a != ZERO {
                dl = dl.max(self.left.degree_of(k / rn));
                dr = dr.max(self.right.degree_of(k % rn));
            }
        }
        (dl, dr)
    }

    fn resize(&self, left: &FockSpace, right: &FockSpace) -> TensorVector {
        let mut out = TensorVector::zeros(left, right);
        let rn_old = self.right.total_dim();
        let rn_new = right.total_dim();
        let rows = self.left.total_dim().min(left.total_dim());
        let cols = rn_old.min(rn_new);
        for i in 0..rows {
            out.amps[i * rn_new..i * rn_new + cols]
                .copy_from_slice(&self.amps[i * rn_old..i * rn_old + cols]);
        }
        out
    }
}

#[derive(Debug)]
enum TensorNode {
    Kron(LinearOperator, LinearOperator),
    Scale(C64, TensorOperator),
    Sum(Vec<TensorOperator>),
    Product(Vec<TensorOperator>),
}

/// Operators on `F(H) ⊗ F(K)` built from elementary tensors `a ⊗ b`.
#[derive(Clone, Debug)]
pub struct TensorOperator(Arc<TensorNode>);

impl TensorOperator {
    pub fn kron(a: &LinearOperator, b: &LinearOperator) -> Self {
        TensorOperator(Arc::new(TensorNode::Kron(a.clone(), b.clone())))
    }

    pub fn identity() -> Self {
        Self::kron(&LinearOperator::identity(), &LinearOperator::identity())
    }

    pub fn scale(&self, c: C64) -> Self {
        TensorOperator(Arc::new(TensorNode::Scale(c, self.clone())))
    }

    pub fn sum(terms: Vec<TensorOperator>) -> Self {
        TensorOperator(Arc::new(TensorNode::Sum(terms)))
    }

    pub fn product(factors: Vec<TensorOperator>) -> Self {
        TensorOperator(Arc::new(TensorNode::Product(factors)))
    }

    pub fn compose(&self, other: &TensorOperator) -> Self {
        Self::product(vec![self.clone(), other.clone()])
    }

    pub fn adjoint(&self) -> Self {
        match &*self.0 {
            TensorNode::Kron(a, b) => Self::kron(&a.adjoint(), &b.adjoint()),
            TensorNode::Scale(c, x) => x.adjoint().scale(c.conj()),
            TensorNode::Sum(ts) => Self::sum(ts.iter().map(|t| t.adjoint()).collect()),
            TensorNode::Product(fs) => Self::product(fs.iter().rev().map(|f| f.adjoint()).collect()),
        }
    }

    /// Left and right profiles.
    pub fn profiles(&self) -> (RaisingProfile, RaisingProfile) {
        match &*self.0 {
            TensorNode::Kron(a, b) => (a.profile().clone(), b.profile().clone()),
            TensorNode::Scale(_, x) => x.profiles(),
            TensorNode::Sum(ts) => ts.iter().map(|t| t.profiles()).fold(
                (RaisingProfile::empty(), RaisingProfile::empty()),
                |(a, b), (c, d)| (a.hull(&c), b.hull(&d)),
            ),
            TensorNode::Product(fs) => fs.iter().rev().map(|f| f.profiles()).fold(
                (RaisingProfile::neutral(), RaisingProfile::neutral()),
                |(a, b), (c, d)| (RaisingProfile::then(a, &c), RaisingProfile::then(b, &d)),
            ),
        }
    }

    /// Exact evaluation with headroom on both factors, compressed back.
    /// Operators must preserve the one-particle dimensions.
    pub fn apply(&self, v: &TensorVector) -> Result<TensorVector> {
        let (pl, pr) = self.profiles();
        let big_l = v.left.enlarged(pl.headroom())?;
        let big_r = v.right.enlarged(pr.headroom())?;
        let w = self.eval(v.resize(&big_l, &big_r))?;
        Ok(w.resize(&v.left, &v.right))
    }

    /// Evaluation directly on the spaces of `v`, discarding overflow. Exact
    /// whenever no intermediate degree exceeds the truncation.
    pub fn apply_truncated(&self, v: &TensorVector) -> Result<TensorVector> {
        self.eval(v.clone())
    }

    fn eval(&self, v: TensorVector) -> Result<TensorVector> {
        match &*self.0 {
            TensorNode::Kron(a, b) => {
                let ln = v.left.total_dim();
                let rn = v.right.total_dim();
                let mut mid = TensorVector::zeros(&v.left, &v.right);
                for j in 0..rn {
                    let col: Vec<C64> = (0..ln).map(|i| v.amps[i * rn + j]).collect();
                    if col.iter().all(|c| *c == ZERO) {
                        continue;
                    }
                    let fv = FockVector::from_amplitudes(&v.left, col)?;
                    a.check_input(&v.left)?;
                    let out = a.apply_truncated_unchecked(&fv);
                    if out.space() != &v.left {
                        return Err(Error::IncompatibleSpaces(
                            "tensor factors must preserve the one-particle dimension".into(),
                        ));
                    }
                    for (i, x) in out.amplitudes().iter().enumerate() {
                        mid.amps[i * rn + j] = *x;
                    }
                }
                let mut out = TensorVector::zeros(&v.left, &v.right);
                for i in 0..ln {
                    let row = &mid.amps[i * rn..(i + 1) * rn];
                    if row.iter().all(|c| *c == ZERO) {
                        continue;
                    }
                    let fv = FockVector::from_amplitudes(&v.right, row.to_vec())?;
                    b.check_input(&v.right)?;
                    let r = b.apply_truncated_unchecked(&fv);
                    if r.space() != &v.right {
                        return Err(Error::IncompatibleSpaces(
                            "tensor factors must preserve the one-particle dimension".into(),
                        ));
                    }
                    out.amps[i * rn..(i + 1) * rn].copy_from_slice(r.amplitudes());
                }
                Ok(out)
            }
            TensorNode::Scale(c, x) => {
                let mut r = x.eval(v)?;
                for a in &mut r.amps {
                    *a *= c;
                }
                Ok(r)
            }
            TensorNode::Sum(ts) => {
                let mut acc = TensorVector::zeros(&v.left, &v.right);
                for t in ts {
                    let r = t.eval(v.clone())?;
                    acc.axpy(ONE, &r);
                }
                Ok(acc)
            }
            TensorNode::Product(fs) => {
                let mut cur = v;
                for f in fs.iter().rev() {
                    cur = f.eval(cur)?;
                }
                Ok(cur)
            }
        }
    }
}
