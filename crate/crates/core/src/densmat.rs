//! Dense Hermitian operators on tensor-product spaces.
//!
//! Matrices are indexed with factor 0 as the most significant digit, so a
//! two-factor index reads `a * d_B + b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Eigenvalues below this magnitude are treated as exact zeros.
pub const EIG_CLAMP: f64 = 1e-12;
/// Weight of `rho` on the kernel of `sigma` above which the relative entropy is infinite.
pub const SUPPORT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    /// Converts a value in nats to this base.
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            LogBase::E => x,
            LogBase::Two => x / std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorShape {
    dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("empty factor list".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Shape(format!("zero local dimension in {dims:?}")));
        }
        Ok(TensorShape { dims })
    }

    pub fn single(d: usize) -> Self {
        TensorShape { dims: vec![d.max(1)] }
    }

    pub fn bipartite(da: usize, db: usize) -> Self {
        TensorShape { dims: vec![da.max(1), db.max(1)] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn factors(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Strides of each factor in the flattened index.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    pub fn concat(&self, other: &TensorShape) -> TensorShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        TensorShape { dims }
    }

    pub(crate) fn check_bipartite(&self) -> Result<(usize, usize)> {
        if self.dims.len() != 2 {
            return Err(Error::Shape(format!("expected two factors, got {:?}", self.dims)));
        }
        Ok((self.dims[0], self.dims[1]))
    }
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(m: &CMat) -> Eigen {
    let n = m.nrows();
    if m.iter().all(|z| z.im == 0.0) {
        // Real symmetric input: the real solver is several times faster.
        let se = m.map(|z| z.re).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
        let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, c| C64::new(se.eigenvectors[(r, order[c])], 0.0));
        return Eigen { values, vectors };
    }
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

impl Eigen {
    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            for r in 0..n {
                scaled[(r, c)] *= fv[c];
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    shape: TensorShape,
    mat: CMat,
}

impl HermitianOperator {
    pub fn new(shape: TensorShape, mat: CMat) -> Result<Self> {
        check_dims(&shape, &mat)?;
        let dev = hermitian_deviation(&mat);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(HermitianOperator { shape, mat: symmetrize(&mat) })
    }

    /// Replaces `mat` by its Hermitian part without a tolerance check.
    pub fn hermitize(shape: TensorShape, mat: CMat) -> Result<Self> {
        check_dims(&shape, &mat)?;
        Ok(HermitianOperator { shape, mat: symmetrize(&mat) })
    }

    pub(crate) fn from_parts(shape: TensorShape, mat: CMat) -> Self {
        debug_assert_eq!(shape.dim(), mat.nrows());
        HermitianOperator { shape, mat }
    }

    pub fn zeros(shape: TensorShape) -> Self {
        let d = shape.dim();
        HermitianOperator { shape, mat: CMat::zeros(d, d) }
    }

    pub fn identity(shape: TensorShape) -> Self {
        let d = shape.dim();
        HermitianOperator { shape, mat: CMat::identity(d, d) }
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn eig(&self) -> Eigen {
        eigh(&self.mat)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().values
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn with_shape(self, shape: TensorShape) -> Result<Self> {
        check_dims(&shape, &self.mat)?;
        Ok(HermitianOperator { shape, mat: self.mat })
    }
}

fn check_dims(shape: &TensorShape, mat: &CMat) -> Result<()> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::Shape(format!("matrix is {}x{}", mat.nrows(), mat.ncols())));
    }
    if mat.nrows() != shape.dim() {
        return Err(Error::Shape(format!("matrix dimension {} does not match shape {:?}", mat.nrows(), shape.dims())));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Trace(tr, (tr - 1.0).abs()));
        }
        let min = op.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityMatrix { op })
    }

    pub fn from_matrix(shape: TensorShape, mat: CMat) -> Result<Self> {
        Self::new(HermitianOperator::new(shape, mat)?)
    }

    /// Builds a state from a matrix known to be a density matrix up to rounding.
    pub(crate) fn from_matrix_unchecked(shape: TensorShape, mat: CMat) -> Self {
        DensityMatrix { op: HermitianOperator::from_parts(shape, symmetrize(&mat)) }
    }

    pub fn from_pure(shape: TensorShape, psi: &CVec) -> Result<Self> {
        if psi.len() != shape.dim() {
            return Err(Error::Shape(format!("vector length {} does not match shape {:?}", psi.len(), shape.dims())));
        }
        let n2 = psi.norm_squared();
        if (n2 - 1.0).abs() > TRACE_TOL {
            return Err(Error::Trace(n2, (n2 - 1.0).abs()));
        }
        Ok(Self::from_matrix_unchecked(shape, psi * psi.adjoint()))
    }

    pub fn maximally_mixed(shape: TensorShape) -> Self {
        let d = shape.dim();
        let mat = CMat::identity(d, d).scale(1.0 / d as f64);
        DensityMatrix { op: HermitianOperator::from_parts(shape, mat) }
    }

    pub fn diagonal(shape: TensorShape, probs: &[f64]) -> Result<Self> {
        if probs.len() != shape.dim() {
            return Err(Error::Shape(format!("{} weights for dimension {}", probs.len(), shape.dim())));
        }
        let mat = CMat::from_diagonal(&DVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0))));
        Self::from_matrix(shape, mat)
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        &self.op.mat
    }

    pub fn shape(&self) -> &TensorShape {
        &self.op.shape
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn eig(&self) -> Eigen {
        self.op.eig()
    }

    /// Eigenvalues in ascending order with numerical dust set to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        self.op.eigenvalues().into_iter().map(clamp_eig).collect()
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            op: HermitianOperator::from_parts(self.shape().concat(other.shape()), kron(self.matrix(), other.matrix())),
        }
    }

    pub fn product(states: &[&DensityMatrix]) -> Result<DensityMatrix> {
        let (first, rest) = states.split_first().ok_or_else(|| Error::Argument("empty product".into()))?;
        Ok(rest.iter().fold((*first).clone(), |acc, s| acc.kron(s)))
    }

    /// Reinterprets the same matrix with a different factorization.
    pub fn with_shape(self, shape: TensorShape) -> Result<Self> {
        Ok(DensityMatrix { op: self.op.with_shape(shape)? })
    }

    /// Conjugation `U ρ U†`.
    pub fn conjugate(&self, u: &CMat) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::Shape("unitary dimension mismatch".into()));
        }
        Ok(Self::from_matrix_unchecked(self.shape().clone(), u * self.matrix() * u.adjoint()))
    }

    /// Convex combination of states with identical shapes.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let (_, first) = parts.first().ok_or_else(|| Error::Argument("empty mixture".into()))?;
        let d = first.dim();
        let mut m = CMat::zeros(d, d);
        for (w, r) in parts {
            if r.shape() != first.shape() {
                return Err(Error::Shape("mixture of different shapes".into()));
            }
            m += r.matrix().scale(*w);
        }
        Self::from_matrix(first.shape().clone(), m)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.matrix().iter().all(|z| z.im.abs() <= tol)
    }
}

impl AsRef<HermitianOperator> for DensityMatrix {
    fn as_ref(&self) -> &HermitianOperator {
        &self.op
    }
}

impl AsRef<HermitianOperator> for HermitianOperator {
    fn as_ref(&self) -> &HermitianOperator {
        self
    }
}

pub(crate) fn clamp_eig(x: f64) -> f64 {
    if x.abs() < EIG_CLAMP {
        0.0
    } else {
        x
    }
}

/// `-Σ p ln p` with `0 ln 0 = 0`; negative dust is ignored.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| -xlogx(x)).sum()
}

pub(crate) fn xlogx(x: f64) -> f64 {
    if x <= EIG_CLAMP {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    base.from_nats(shannon_entropy(&rho.spectrum()).max(0.0))
}

/// `S(ρ‖σ) = Tr ρ (ln ρ − ln σ)` in nats; infinite when the support of `ρ` leaks out of that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::Shape(format!(
            "relative entropy of {:?} against {:?}",
            rho.shape().dims(),
            sigma.shape().dims()
        )));
    }
    let es = sigma.eig();
    let w = diag_in_basis(rho.matrix(), &es.vectors);
    let mut cross = 0.0;
    for (mu, wj) in es.values.iter().zip(&w) {
        let mu = clamp_eig(*mu);
        if mu <= 0.0 {
            if *wj > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += wj * mu.ln();
        }
    }
    let s = shannon_entropy(&rho.spectrum());
    Ok((-s - cross).max(0.0))
}

/// Diagonal of `V† M V`.
pub(crate) fn diag_in_basis(m: &CMat, v: &CMat) -> Vec<f64> {
    let mv = m * v;
    (0..v.ncols()).map(|j| v.column(j).iter().zip(mv.column(j).iter()).map(|(a, b)| (a.conj() * b).re).sum()).collect()
}

fn check_factor_set(shape: &TensorShape, keep: &[usize]) -> Result<Vec<usize>> {
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.is_empty() || k.len() != keep.len() || *k.last().unwrap() >= shape.factors() {
        return Err(Error::Index(format!("factor set {keep:?} for {} factors", shape.factors())));
    }
    Ok(k)
}

/// Offsets of every multi-index over `factors` inside the flattened index.
fn offsets(shape: &TensorShape, factors: &[usize]) -> Vec<usize> {
    let strides = shape.strides();
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * shape.dims()[f]);
        for &o in &out {
            for m in 0..shape.dims()[f] {
                next.push(o + m * strides[f]);
            }
        }
        out = next;
    }
    out
}

pub fn partial_trace_op(op: &HermitianOperator, keep: &[usize]) -> Result<HermitianOperator> {
    let shape = op.shape();
    let keep = check_factor_set(shape, keep)?;
    let traced: Vec<usize> = (0..shape.factors()).filter(|f| !keep.contains(f)).collect();
    let ok = offsets(shape, &keep);
    let ot = offsets(shape, &traced);
    let m = op.matrix();
    let n = ok.len();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for &t in &ot {
                acc += m[(ok[i] + t, ok[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    let dims = keep.iter().map(|&f| shape.dims()[f]).collect();
    Ok(HermitianOperator::from_parts(TensorShape { dims }, out))
}

/// Reduced state on the factors in `keep`, which come out in ascending order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix { op: partial_trace_op(rho.op(), keep)? })
}

pub fn partial_transpose(op: &HermitianOperator, factor: usize) -> Result<HermitianOperator> {
    let shape = op.shape();
    if factor >= shape.factors() {
        return Err(Error::Index(format!("factor {factor} of {}", shape.factors())));
    }
    let s = shape.strides()[factor];
    let d = shape.dims()[factor];
    let m = op.matrix();
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for x in 0..n {
        let xf = (x / s) % d;
        for y in 0..n {
            let yf = (y / s) % d;
            let xn = x - xf * s + yf * s;
            let yn = y - yf * s + xf * s;
            out[(xn, yn)] = m[(x, y)];
        }
    }
    Ok(HermitianOperator::from_parts(shape.clone(), out))
}

/// Reorders tensor factors: factor `order[k]` of the input becomes factor `k`.
pub fn permute_factors(op: &HermitianOperator, order: &[usize]) -> Result<HermitianOperator> {
    let shape = op.shape();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..shape.factors()).collect::<Vec<_>>() {
        return Err(Error::Index(format!("{order:?} is not a permutation of the factors")));
    }
    let new_dims: Vec<usize> = order.iter().map(|&f| shape.dims()[f]).collect();
    let new_shape = TensorShape { dims: new_dims };
    let old_strides = shape.strides();
    let new_strides = new_shape.strides();
    let n = shape.dim();
    let map: Vec<usize> = (0..n)
        .map(|x| {
            let mut y = 0;
            for (k, &f) in order.iter().enumerate() {
                y += ((x / old_strides[f]) % shape.dims()[f]) * new_strides[k];
            }
            y
        })
        .collect();
    let m = op.matrix();
    let mut out = CMat::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            out[(map[x], map[y])] = m[(x, y)];
        }
    }
    Ok(HermitianOperator::from_parts(new_shape, out))
}

pub fn trace_norm(op: &HermitianOperator) -> f64 {
    op.eigenvalues().iter().map(|x| x.abs()).sum()
}
