//! `min S(ρ‖σ)` over unit-trace `σ` with `σ ⪰ 0` and `σ^{T_B} ⪰ 0`.
//!
//! Primal log-barrier method: `σ = 𝟙/n + Σ x_a B_a` over an orthonormal basis of
//! traceless Hermitian matrices (real symmetric ones when `ρ` is real, which loses
//! nothing because complex conjugation preserves both cones), and Newton steps on
//! `−Tr ρ ln σ − μ ln det σ − μ ln det σ^{T_B}` for a decreasing `μ`.

use nalgebra::DMatrix;

use super::logdiff::CrossEntropy;
use super::{OptKind, OptReport};
use crate::densmat::{eigh, von_neumann_entropy, CMat, DensityMatrix, LogBase, C64};
use crate::error::{Error, Result};
use crate::measures::is_ppt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptOptions {
    /// Relative change of the objective between barrier stages that ends the run.
    pub tol: f64,
    pub mu_start: f64,
    pub mu_factor: f64,
    pub max_newton: usize,
}

impl Default for PptOptions {
    fn default() -> Self {
        PptOptions { tol: 1e-9, mu_start: 0.1, mu_factor: 0.1, max_newton: 1000 }
    }
}

pub fn e_ppt(rho: &DensityMatrix) -> Result<OptReport> {
    e_ppt_with(rho, &PptOptions::default())
}

pub fn e_ppt_with(rho: &DensityMatrix, opts: &PptOptions) -> Result<OptReport> {
    let (da, db) = rho.shape().check_bipartite()?;
    if is_ppt(rho)?.ppt {
        return Ok(OptReport {
            value: 0.0,
            sigma_star: rho.clone(),
            iterations: 0,
            converged: true,
            kind: OptKind::PptLower,
            decomposition: None,
        });
    }
    let solver = Barrier::new(rho, da, db);
    let (x, iterations, converged, value) = solver.run(opts);
    if !converged {
        return Err(Error::NoConvergence(format!("PPT relaxation stopped after {iterations} Newton steps at {value}")));
    }
    let sigma = DensityMatrix::from_matrix_unchecked(rho.shape().clone(), solver.sigma(&x));
    Ok(OptReport { value, sigma_star: sigma, iterations, converged, kind: OptKind::PptLower, decomposition: None })
}

type Sparse = Vec<(usize, usize, C64)>;

/// Orthonormal traceless Hermitian basis, stored as sparse entry lists.
fn traceless_basis(n: usize, real: bool) -> Vec<Sparse> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            out.push(vec![(p, q, C64::new(s, 0.0)), (q, p, C64::new(s, 0.0))]);
            if !real {
                out.push(vec![(p, q, C64::new(0.0, -s)), (q, p, C64::new(0.0, s))]);
            }
        }
    }
    // Generalized Gell-Mann diagonals.
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut e: Sparse = (0..k).map(|i| (i, i, C64::new(norm, 0.0))).collect();
        e.push((k, k, C64::new(-(k as f64) * norm, 0.0)));
        out.push(e);
    }
    out
}

fn partial_transpose_mat(m: &CMat, da: usize, db: usize) -> CMat {
    let n = da * db;
    CMat::from_fn(n, n, |p, q| {
        let (a, b) = (p / db, p % db);
        let (a2, b2) = (q / db, q % db);
        m[(a * db + b2, a2 * db + b)]
    })
}

/// `V† B V` for a sparse `B`.
fn rotate(b: &Sparse, v: &CMat) -> CMat {
    let n = v.nrows();
    let mut x = CMat::zeros(n, n);
    for &(p, q, c) in b {
        for j in 0..n {
            let vq = v[(q, j)] * c;
            for i in 0..n {
                x[(i, j)] += v[(p, i)].conj() * vq;
            }
        }
    }
    x
}

fn column_of(m: &CMat) -> impl Iterator<Item = f64> + '_ {
    m.iter().map(|z| z.re).chain(m.iter().map(|z| z.im))
}

struct Barrier {
    rho: CMat,
    entropy: f64,
    n: usize,
    basis: Vec<Sparse>,
    basis_pt: Vec<Sparse>,
    da: usize,
    db: usize,
}

struct Point {
    ce: CrossEntropy,
    pt_vals: Vec<f64>,
    pt_vecs: CMat,
    value: f64,
}

impl Barrier {
    fn new(rho: &DensityMatrix, da: usize, db: usize) -> Self {
        let n = da * db;
        let basis = traceless_basis(n, rho.is_real(1e-14));
        let basis_pt = basis
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&(p, q, c)| {
                        let (a, bb) = (p / db, p % db);
                        let (a2, b2) = (q / db, q % db);
                        (a * db + b2, a2 * db + bb, c)
                    })
                    .collect()
            })
            .collect();
        Barrier { rho: rho.matrix().clone(), entropy: von_neumann_entropy(rho, LogBase::E), n, basis, basis_pt, da, db }
    }

    fn sigma(&self, x: &[f64]) -> CMat {
        let n = self.n;
        let mut s = CMat::identity(n, n).unscale(n as f64);
        for (b, &xa) in self.basis.iter().zip(x) {
            for &(p, q, c) in b {
                s[(p, q)] += c * xa;
            }
        }
        s
    }

    fn point(&self, x: &[f64], mu: f64) -> Option<Point> {
        let s = self.sigma(x);
        let ce = CrossEntropy::new(&self.rho, &s)?;
        let pt = eigh(&partial_transpose_mat(&s, self.da, self.db));
        if !(pt.values[0] > 0.0) {
            return None;
        }
        let logdet = |v: &[f64]| v.iter().map(|x| x.ln()).sum::<f64>();
        let value = ce.value - mu * (logdet(&ce.vals) + logdet(&pt.values));
        value.is_finite().then_some(Point { value, ce, pt_vals: pt.values, pt_vecs: pt.vectors })
    }

    /// Gradient and Hessian of the barrier objective at `pt`.
    fn derivatives(&self, pt: &Point, mu: f64) -> (Vec<f64>, DMatrix<f64>) {
        let n = self.n;
        let m = self.basis.len();
        let gr = pt.ce.gamma_r();
        let f2 = pt.ce.dd2_table();
        let inv_sqrt = |v: &[f64]| v.iter().map(|x| 1.0 / x.sqrt()).collect::<Vec<_>>();
        let (ls, ns) = (inv_sqrt(&pt.ce.vals), inv_sqrt(&pt.pt_vals));
        let rows = 2 * n * n;
        let mut xs = DMatrix::<f64>::zeros(rows, m);
        let mut ns_mat = DMatrix::<f64>::zeros(rows, m);
        let mut zs = DMatrix::<f64>::zeros(rows, m);
        let mut zts = DMatrix::<f64>::zeros(rows, m);
        let mut g = vec![0.0; m];
        for a in 0..m {
            let x = rotate(&self.basis[a], &pt.ce.vecs);
            let xt = rotate(&self.basis_pt[a], &pt.pt_vecs);
            let mut ga = 0.0;
            for i in 0..n {
                for j in 0..n {
                    ga -= (gr[(i, j)] * x[(j, i)]).re;
                }
                ga -= mu * (x[(i, i)].re * ls[i] * ls[i] + xt[(i, i)].re * ns[i] * ns[i]);
            }
            g[a] = ga;
            let nx = pt.ce.hessian_action(&f2, &x);
            let z = CMat::from_fn(n, n, |i, j| x[(i, j)] * (ls[i] * ls[j]));
            let zt = CMat::from_fn(n, n, |i, j| xt[(i, j)] * (ns[i] * ns[j]));
            for (r, v) in column_of(&x).enumerate() {
                xs[(r, a)] = v;
            }
            // For Hermitian `Y`, `Re Tr[N Y] = Σ_kj Re(N_kj conj(Y_kj))`.
            for (r, v) in column_of(&nx).enumerate() {
                ns_mat[(r, a)] = v;
            }
            for (r, v) in column_of(&z).enumerate() {
                zs[(r, a)] = v;
            }
            for (r, v) in column_of(&zt).enumerate() {
                zts[(r, a)] = v;
            }
        }
        let h = -xs.tr_mul(&ns_mat) + (zs.tr_mul(&zs) + zts.tr_mul(&zts)) * mu;
        let h = (&h + h.transpose()) * 0.5;
        (g, h)
    }

    fn newton_direction(h: DMatrix<f64>, g: &[f64]) -> Vec<f64> {
        let m = g.len();
        let rhs = DMatrix::from_column_slice(m, 1, g);
        let scale = (0..m).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut shift = 0.0;
        loop {
            let mut hs = h.clone();
            for i in 0..m {
                hs[(i, i)] += shift;
            }
            if let Some(ch) = hs.cholesky() {
                return ch.solve(&rhs).iter().map(|v| -v).collect();
            }
            shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
        }
    }

    /// Returns `(x, newton steps, converged, S(ρ‖σ))`.
    fn run(&self, opts: &PptOptions) -> (Vec<f64>, usize, bool, f64) {
        let m = self.basis.len();
        let mut x = vec![0.0; m];
        let mut mu = opts.mu_start;
        let mut steps = 0;
        let mut last: Option<f64> = None;
        let rel_entropy = |p: &Point| (p.ce.value - self.entropy).max(0.0);
        loop {
            let mut pt = self.point(&x, mu).expect("iterates stay strictly feasible");
            for _ in 0..100 {
                if steps >= opts.max_newton {
                    return (x, steps, false, rel_entropy(&pt));
                }
                steps += 1;
                let (g, h) = self.derivatives(&pt, mu);
                let d = Self::newton_direction(h, &g);
                let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                if -slope < 1e-15 {
                    break;
                }
                let mut t = 1.0;
                let mut next = None;
                for _ in 0..60 {
                    let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                    if let Some(p) = self.point(&xn, mu) {
                        if p.value <= pt.value + 0.25 * t * slope {
                            next = Some((xn, p));
                            break;
                        }
                    }
                    t *= 0.5;
                }
                let Some((xn, p)) = next else { break };
                x = xn;
                pt = p;
                if -slope < 1e-13 {
                    break;
                }
            }
            let v = rel_entropy(&pt);
            if let Some(prev) = last {
                if (prev - v).abs() < opts.tol * v.max(1.0) {
                    return (x, steps, true, v);
                }
            }
            last = Some(v);
            mu *= opts.mu_factor;
            if mu < 1e-16 {
                return (x, steps, false, v);
            }
        }
    }
}
