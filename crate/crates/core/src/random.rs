//! Seeded random matrices and states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::densmat::{CMat, CVec, DensityMatrix, TensorShape, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for restart number `restart` of a seeded search.
pub(crate) fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian matrix with independent standard-normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(gauss(rng), gauss(rng)))
}

pub fn real_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(gauss(rng), 0.0))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    q
}

pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(n, |_, _| C64::new(gauss(rng), gauss(rng)));
    let norm = v.norm();
    v.unscale(norm)
}

/// Wishart-distributed state `G G† / Tr` with `G` of size `dim × rank`.
pub fn random_density<R: Rng + ?Sized>(shape: TensorShape, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(shape.dim(), rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(shape, m.unscale(tr))
}

pub fn random_real_density<R: Rng + ?Sized>(shape: TensorShape, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = real_gaussian(shape.dim(), rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(shape, m.unscale(tr))
}

/// Uniform point on the probability simplex.
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
