//! Geometric quantum discord: distance to the closest classical-classical state.

use rand::Rng;

use crate::densmat::{
    diag_in_basis, eigh, kron, max_abs, shannon_entropy, von_neumann_entropy, CMat, CVec, DensityMatrix, LogBase,
    TensorShape, C64,
};
use crate::error::{Error, Result};
use crate::measures::mutual_information;
use crate::random::{haar_unitary, random_hermitian, restart_seed, seeded};

#[derive(Clone, Debug, PartialEq)]
pub struct LocalBases {
    pub basis_a: CMat,
    pub basis_b: CMat,
}

impl LocalBases {
    pub fn new(basis_a: CMat, basis_b: CMat) -> Result<Self> {
        for u in [&basis_a, &basis_b] {
            let n = u.nrows();
            if u.ncols() != n || max_abs(&(u.adjoint() * u - CMat::identity(n, n))) > 1e-10 {
                return Err(Error::Argument("local basis is not unitary".into()));
            }
        }
        Ok(LocalBases { basis_a, basis_b })
    }

    pub fn computational(da: usize, db: usize) -> Self {
        LocalBases { basis_a: CMat::identity(da, da), basis_b: CMat::identity(db, db) }
    }

    fn joint(&self) -> CMat {
        kron(&self.basis_a, &self.basis_b)
    }
}

#[derive(Clone, Debug)]
pub struct DiscordResult {
    pub discord: f64,
    pub closest_classical: DensityMatrix,
    pub bases: LocalBases,
    pub iterations: usize,
}

fn check_bases(rho: &DensityMatrix, bases: &LocalBases) -> Result<()> {
    let (da, db) = rho.shape().check_bipartite()?;
    if bases.basis_a.nrows() != da || bases.basis_b.nrows() != db {
        return Err(Error::Shape("local bases do not match the state".into()));
    }
    Ok(())
}

/// Weights `μ_ab = ⟨ab|ρ|ab⟩` in the product basis.
fn weights(rho: &DensityMatrix, u: &CMat) -> Vec<f64> {
    diag_in_basis(rho.matrix(), u).into_iter().map(|x| x.max(0.0)).collect()
}

/// `σ_cl = Σ μ_ab |a⟩⟨a| ⊗ |b⟩⟨b|`.
pub fn classical_state(rho: &DensityMatrix, bases: &LocalBases) -> Result<DensityMatrix> {
    check_bases(rho, bases)?;
    let u = bases.joint();
    let mu = weights(rho, &u);
    let d = CMat::from_diagonal(&CVec::from_iterator(mu.len(), mu.iter().map(|&x| C64::new(x, 0.0))));
    Ok(DensityMatrix::from_matrix_unchecked(rho.shape().clone(), &u * d * u.adjoint()))
}

/// `S(ρ‖σ_cl) = H(μ) − S(ρ)`, using `Tr ρ ln σ_cl = Σ μ ln μ`.
fn discord_for(rho: &DensityMatrix, entropy: f64, bases: &LocalBases) -> f64 {
    (shannon_entropy(&weights(rho, &bases.joint())) - entropy).max(0.0)
}

fn finish(rho: &DensityMatrix, best: f64, bases: LocalBases, iterations: usize) -> Result<DiscordResult> {
    let closest_classical = classical_state(rho, &bases)?;
    Ok(DiscordResult { discord: best, closest_classical, bases, iterations })
}

fn haar_bases<R: Rng + ?Sized>(da: usize, db: usize, rng: &mut R) -> LocalBases {
    LocalBases { basis_a: haar_unitary(da, rng), basis_b: haar_unitary(db, rng) }
}

/// Minimum over `samples` Haar-random pairs of local bases.
pub fn discord_direct(rho: &DensityMatrix, samples: usize, seed: u64) -> Result<DiscordResult> {
    let (da, db) = rho.shape().check_bipartite()?;
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let s = von_neumann_entropy(rho, LogBase::E);
    let mut rng = seeded(seed);
    let mut best: Option<(f64, LocalBases)> = None;
    for _ in 0..samples {
        let b = haar_bases(da, db, &mut rng);
        let d = discord_for(rho, s, &b);
        if best.as_ref().is_none_or(|(v, _)| d < *v) {
            best = Some((d, b));
        }
    }
    let (v, b) = best.expect("at least one sample");
    finish(rho, v, b, samples)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McmcOptions {
    pub steps: usize,
    pub step_size: f64,
    pub beta: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions { steps: 5000, step_size: 0.1, beta: 1e4, restarts: 8, seed: 0 }
    }
}

/// `exp(iηH) U` with `H` a Gaussian Hermitian matrix of unit spectral norm.
fn perturb<R: Rng + ?Sized>(u: &CMat, eta: f64, rng: &mut R) -> CMat {
    let n = u.nrows();
    let e = eigh(&random_hermitian(n, rng));
    let scale = e.values.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let phases: Vec<C64> = e.values.iter().map(|&x| C64::from_polar(1.0, eta * x / scale)).collect();
    let mut vp = e.vectors.clone();
    for c in 0..n {
        for r in 0..n {
            vp[(r, c)] *= phases[c];
        }
    }
    vp * e.vectors.adjoint() * u
}

/// Metropolis walk over pairs of local unitaries; returns the best state seen.
pub fn discord_mcmc(rho: &DensityMatrix, opts: &McmcOptions) -> Result<DiscordResult> {
    let (da, db) = rho.shape().check_bipartite()?;
    if opts.steps == 0 || !(opts.step_size > 0.0) || !(opts.beta > 0.0) || opts.restarts == 0 {
        return Err(Error::Argument("steps, step size, inverse temperature and restarts must be positive".into()));
    }
    let s = von_neumann_entropy(rho, LogBase::E);
    let mut best: Option<(f64, LocalBases)> = None;
    let mut iterations = 0;
    for r in 0..opts.restarts {
        let mut rng = seeded(restart_seed(opts.seed, r));
        let mut cur = haar_bases(da, db, &mut rng);
        let mut cur_d = discord_for(rho, s, &cur);
        let mut run_best = (cur_d, cur.clone());
        for _ in 0..opts.steps {
            let cand = LocalBases {
                basis_a: perturb(&cur.basis_a, opts.step_size, &mut rng),
                basis_b: perturb(&cur.basis_b, opts.step_size, &mut rng),
            };
            let d = discord_for(rho, s, &cand);
            let delta = d - cur_d;
            let u: f64 = rng.random();
            if delta < 0.0 || u < (-opts.beta * delta).exp() {
                cur = cand;
                cur_d = d;
                if d < run_best.0 {
                    run_best = (d, cur.clone());
                }
            }
            iterations += 1;
        }
        if best.as_ref().is_none_or(|(v, _)| run_best.0 < *v) {
            best = Some(run_best);
        }
    }
    let (v, b) = best.expect("at least one restart");
    finish(rho, v, b, iterations)
}

/// `ρ(c) = (1−c) 𝟙/4 + c |Ψ−⟩⟨Ψ−|`.
pub fn singlet_werner_state(c: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Argument(format!("c = {c} outside [0, 1]")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, 0.0)]);
    let m = CMat::identity(4, 4).scale((1.0 - c) / 4.0) + (&psi * psi.adjoint()).scale(c);
    DensityMatrix::from_matrix(TensorShape::bipartite(2, 2), m)
}

/// Known discord of [`singlet_werner_state`].
pub fn discord_werner_closed_form(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Argument(format!("c = {c} outside [0, 1]")));
    }
    let xl = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    Ok(xl(1.0 - c) / 4.0 - xl(1.0 + c) / 2.0 + xl(1.0 + 3.0 * c) / 4.0)
}

/// Mutual information of the closest classical state.
pub fn classical_correlation_discord(result: &DiscordResult) -> Result<f64> {
    mutual_information(&result.closest_classical)
}
