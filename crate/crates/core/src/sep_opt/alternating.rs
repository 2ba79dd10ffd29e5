//! Upper bound on the relative entropy of entanglement from explicit product
//! decompositions `σ = Σ_i A_i ⊗ B_i`.
//!
//! Factors are parametrized as `A_i = X_i X_i†`, `B_i = Y_i Y_i†`. Each half-step
//! holds one side fixed and runs L-BFGS on the other, warm-started, so the objective
//! never increases. The objective `−Tr ρ ln σ + ln Tr σ − S(ρ)` is invariant under
//! rescaling, and the factors are renormalized after every half-step.

use super::lbfgs;
use super::logdiff::CrossEntropy;
use super::{OptKind, OptReport, ProductDecomposition};
use crate::densmat::{permute_factors, von_neumann_entropy, CMat, DensityMatrix, LogBase, C64};
use crate::error::{Error, Result};
use crate::random::{ginibre, real_gaussian, restart_seed, seeded, SeededRng};

/// Which product states the decomposition may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FactorField {
    /// `RealPart` for real `ρ`, `Complex` otherwise.
    #[default]
    Auto,
    /// Complex factors; default budget `D²` terms.
    Complex,
    /// `σ = Re Σ A_i ⊗ B_i` with complex factors, for real `ρ`; default budget `D(D+1)/2`.
    ///
    /// Each term `Re(A ⊗ B)` is itself separable, being the even mixture of
    /// `A ⊗ B` and its complex conjugate.
    RealPart,
    /// Real symmetric factors only; default budget `D(D+1)/2`. This is a strictly
    /// smaller set than `RealPart` and can miss the optimum.
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AltOptions {
    /// Number of product terms; `None` picks the default budget of the field.
    pub terms: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub field: FactorField,
    pub max_sweeps: usize,
    /// A sweep improving the objective by less than this ends the run.
    pub tol: f64,
    /// L-BFGS iterations per half-step.
    pub inner_iterations: usize,
}

impl Default for AltOptions {
    fn default() -> Self {
        AltOptions {
            terms: None,
            restarts: 8,
            seed: 0,
            field: FactorField::Auto,
            max_sweeps: 500,
            tol: 1e-8,
            inner_iterations: 10,
        }
    }
}

pub fn closest_separable_alternating(rho: &DensityMatrix, opts: &AltOptions) -> Result<OptReport> {
    let (da, db) = rho.shape().check_bipartite()?;
    let real_rho = rho.is_real(1e-14);
    let field = match opts.field {
        FactorField::Auto if real_rho => FactorField::RealPart,
        FactorField::Auto => FactorField::Complex,
        FactorField::RealPart if !real_rho => {
            return Err(Error::Argument("real-part decompositions need a real state".into()))
        }
        f => f,
    };
    let d = da * db;
    let terms = opts.terms.unwrap_or(if field == FactorField::Complex { d * d } else { d * (d + 1) / 2 });
    if terms == 0 || opts.restarts == 0 || opts.max_sweeps == 0 {
        return Err(Error::Argument("terms, restarts and sweeps must be positive".into()));
    }
    let swapped = permute_factors(rho.op(), &[1, 0])?.into_matrix();
    let ctx = Context {
        rho: rho.matrix(),
        swapped: &swapped,
        entropy: von_neumann_entropy(rho, LogBase::E),
        da,
        db,
        field,
        opts,
    };

    let mut best: Option<Run> = None;
    let mut sweeps = 0;
    for r in 0..opts.restarts {
        let mut rng = seeded(restart_seed(opts.seed, r));
        let run = ctx.run(terms, &mut rng);
        sweeps += run.sweeps;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let mut dec = ProductDecomposition {
        dims: (da, db),
        terms: best.xs.iter().zip(&best.ys).map(|(x, y)| (x * x.adjoint(), y * y.adjoint())).collect(),
        real_part: field == FactorField::RealPart,
    };
    let tr = dec.total_trace();
    dec.terms.iter_mut().for_each(|(a, _)| *a = a.unscale(tr));
    let sigma = DensityMatrix::from_matrix_unchecked(rho.shape().clone(), dec.sigma());
    Ok(OptReport {
        value: best.value.max(0.0),
        sigma_star: sigma,
        iterations: sweeps,
        converged: best.converged,
        kind: OptKind::AlternatingUpper,
        decomposition: Some(dec),
    })
}

struct Context<'a> {
    rho: &'a CMat,
    swapped: &'a CMat,
    entropy: f64,
    da: usize,
    db: usize,
    field: FactorField,
    opts: &'a AltOptions,
}

struct Run {
    xs: Vec<CMat>,
    ys: Vec<CMat>,
    value: f64,
    sweeps: usize,
    converged: bool,
}

/// One side of the decomposition held fixed: `σ = Σ F_i ⊗ Y_i Y_i†`.
struct Half<'a> {
    rho: &'a CMat,
    entropy: f64,
    fixed: Vec<CMat>,
    df: usize,
    dv: usize,
    field: FactorField,
}

impl Half<'_> {
    fn complex_vars(&self) -> bool {
        self.field != FactorField::Real
    }

    fn pack(&self, ys: &[CMat]) -> Vec<f64> {
        let mut v = Vec::with_capacity(ys.len() * self.dv * self.dv * 2);
        for y in ys {
            v.extend(y.iter().map(|z| z.re));
            if self.complex_vars() {
                v.extend(y.iter().map(|z| z.im));
            }
        }
        v
    }

    fn unpack(&self, v: &[f64]) -> Vec<CMat> {
        let n = self.dv * self.dv;
        let stride = if self.complex_vars() { 2 * n } else { n };
        v.chunks(stride)
            .map(|c| {
                CMat::from_iterator(
                    self.dv,
                    self.dv,
                    (0..n).map(|k| C64::new(c[k], if self.complex_vars() { c[n + k] } else { 0.0 })),
                )
            })
            .collect()
    }

    /// Root `Y_i` of term `i` from the packed variables (column-major).
    fn root(&self, v: &[f64], i: usize) -> Vec<C64> {
        let n = self.dv * self.dv;
        if self.complex_vars() {
            let c = &v[2 * n * i..2 * n * (i + 1)];
            (0..n).map(|k| C64::new(c[k], c[n + k])).collect()
        } else {
            v[n * i..n * (i + 1)].iter().map(|&x| C64::new(x, 0.0)).collect()
        }
    }

    fn sigma(&self, v: &[f64]) -> (CMat, Vec<Vec<C64>>) {
        let (df, dv) = (self.df, self.dv);
        let d = df * dv;
        let mut s = CMat::zeros(d, d);
        let mut roots = Vec::with_capacity(self.fixed.len());
        let mut b = vec![C64::new(0.0, 0.0); dv * dv];
        for (i, f) in self.fixed.iter().enumerate() {
            let y = self.root(v, i);
            for j in 0..dv {
                for j2 in 0..dv {
                    b[j * dv + j2] = (0..dv).map(|k| y[k * dv + j] * y[k * dv + j2].conj()).sum();
                }
            }
            for a in 0..df {
                for a2 in 0..df {
                    let fa = f[(a, a2)];
                    for j in 0..dv {
                        for j2 in 0..dv {
                            s[(a * dv + j, a2 * dv + j2)] += fa * b[j * dv + j2];
                        }
                    }
                }
            }
            roots.push(y);
        }
        if self.field == FactorField::RealPart {
            s.apply(|z| z.im = 0.0);
        }
        (s, roots)
    }

    fn value(&self, ys: &[CMat]) -> Option<f64> {
        let (s, _) = self.sigma(&self.pack(ys));
        let tr = s.trace().re;
        let ce = CrossEntropy::new(self.rho, &s)?;
        Some(ce.value + tr.ln() - self.entropy)
    }

    fn eval(&self, v: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (s, roots) = self.sigma(v);
        let tr = s.trace().re;
        let ce = CrossEntropy::new(self.rho, &s)?;
        let value = ce.value + tr.ln() - self.entropy;
        let mut g = ce.gradient();
        for i in 0..g.nrows() {
            g[(i, i)] += 1.0 / tr;
        }
        if self.field != FactorField::Complex {
            g.apply(|z| z.im = 0.0);
        }
        let (df, dv) = (self.df, self.dv);
        let mut grad = Vec::with_capacity(v.len());
        let mut gb = vec![C64::new(0.0, 0.0); dv * dv];
        let mut gy = vec![C64::new(0.0, 0.0); dv * dv];
        for (f, y) in self.fixed.iter().zip(&roots) {
            // Tr_fixed[(F ⊗ 𝟙) G]
            gb.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for a in 0..df {
                for a2 in 0..df {
                    let fa = f[(a, a2)];
                    for j in 0..dv {
                        for j2 in 0..dv {
                            gb[j * dv + j2] += fa * g[(a2 * dv + j, a * dv + j2)];
                        }
                    }
                }
            }
            // 2 G_B Y, column-major like the variables.
            for c in 0..dv {
                for r in 0..dv {
                    gy[c * dv + r] = (0..dv).map(|k| gb[r * dv + k] * y[c * dv + k]).sum::<C64>() * 2.0;
                }
            }
            grad.extend(gy.iter().map(|z| z.re));
            if self.complex_vars() {
                grad.extend(gy.iter().map(|z| z.im));
            }
        }
        value.is_finite().then_some((value, grad))
    }
}

impl Context<'_> {
    fn root<R: rand::Rng>(&self, d: usize, rng: &mut R) -> CMat {
        if self.field == FactorField::Real {
            real_gaussian(d, d, rng)
        } else {
            ginibre(d, d, rng)
        }
    }

    fn half(&self, fixed_roots: &[CMat], free_side_b: bool) -> Half<'_> {
        let fixed = fixed_roots.iter().map(|x| x * x.adjoint()).collect();
        let (rho, df, dv) = if free_side_b { (self.rho, self.da, self.db) } else { (self.swapped, self.db, self.da) };
        Half { rho, entropy: self.entropy, fixed, df, dv, field: self.field }
    }

    /// Optimizes the free roots in place and returns the objective after renormalizing.
    fn half_step(&self, fixed: &mut [CMat], free: &mut Vec<CMat>, free_side_b: bool, before: f64) -> f64 {
        let h = self.half(fixed, free_side_b);
        let res = lbfgs::minimize(|v| h.eval(v), h.pack(free), self.opts.inner_iterations, 1e-15, 10);
        *free = h.unpack(&res.x);
        let tr: f64 = fixed.iter().zip(free.iter()).map(|(x, y)| x.norm_squared() * y.norm_squared()).sum();
        let s = tr.sqrt().sqrt();
        fixed.iter_mut().for_each(|x| *x = x.unscale(s));
        free.iter_mut().for_each(|y| *y = y.unscale(s));
        let after = self.half(fixed, free_side_b).value(free).unwrap_or(res.value);
        assert!(
            after <= before + 1e-12 * before.abs().max(1.0),
            "alternating objective increased from {before} to {after}"
        );
        after
    }

    fn run(&self, terms: usize, rng: &mut SeededRng) -> Run {
        let mut xs: Vec<CMat> = (0..terms).map(|_| self.root(self.da, rng)).collect();
        let mut ys: Vec<CMat> = (0..terms).map(|_| self.root(self.db, rng)).collect();
        let mut value = self.half(&xs, true).value(&ys).expect("Wishart factors give a full-rank starting point");
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < self.opts.max_sweeps {
            sweeps += 1;
            let start = value;
            value = self.half_step(&mut xs, &mut ys, true, value);
            value = self.half_step(&mut ys, &mut xs, false, value);
            if start - value < self.opts.tol {
                converged = true;
                break;
            }
        }
        Run { xs, ys, value, sweeps, converged }
    }
}
