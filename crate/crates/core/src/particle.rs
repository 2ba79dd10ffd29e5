//! Particle-picture correlation: nonfreeness, and the quantum nonfreeness of two
//! fermions in four modes from the Slater-decomposition matrix `K`.
//!
//! Two-particle states are handled either on the full 16-dimensional Fock space of
//! four modes, or directly on the 6-dimensional two-particle sector with basis
//! `f_a† f_b† |Ω⟩`, `a < b`, in the order of [`PAIRS`].

use crate::densmat::{eigh, max_abs, shannon_entropy, CMat, CVec, DensityMatrix, C64};
use crate::error::{Error, Result};

const SPECTRUM_TOL: f64 = 1e-10;
const SECTOR_TOL: f64 = 1e-10;
/// Eigenvalues of `ρ` below this (relative to the largest) carry no branch.
const RANK_TOL: f64 = 1e-12;

/// Mode pairs `(a, b)`, `a < b`, labelling the two-particle sector of four modes.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// `C⁽ᵖ⁾ = S(γ) + S(𝟙 − γ) − S(ρ)` in nats, with `γ` normalized to the particle number.
pub fn nonfreeness(rho: &DensityMatrix, gamma: &CMat) -> Result<f64> {
    if gamma.nrows() != gamma.ncols() {
        return Err(Error::Shape(format!("1RDM is {}x{}", gamma.nrows(), gamma.ncols())));
    }
    let herm = max_abs(&(gamma - gamma.adjoint()));
    if herm > SPECTRUM_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let occ = eigh(gamma).values;
    if let Some(&x) = occ.iter().find(|&&x| !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&x)) {
        return Err(Error::Argument(format!("1RDM eigenvalue {x} outside [0, 1]")));
    }
    let holes: Vec<f64> = occ.iter().map(|x| 1.0 - x).collect();
    let c = shannon_entropy(&occ) + shannon_entropy(&holes) - shannon_entropy(&rho.spectrum());
    Ok(c.max(0.0))
}

/// Nonfreeness of a state on the full Fock space, with its own 1RDM.
pub fn nonfreeness_fock(rho: &DensityMatrix) -> Result<f64> {
    let gamma = crate::fock::one_particle_rdm_mixed(rho)?;
    nonfreeness(rho, &gamma)
}

/// Antisymmetric expansion matrices `w⁽ⁱ⁾` with `|Ψ_i⟩ = Σ_ab w⁽ⁱ⁾_ab f_a† f_b† |Ω⟩`.
/// Branch `i` carries the norm `√λ_i` of its eigenvalue.
#[derive(Clone, Debug)]
pub struct SlaterExpansion {
    branches: Vec<CMat>,
}

impl SlaterExpansion {
    /// Branches from amplitudes on [`PAIRS`]; `w_ab = c_ab / 2 = −w_ba`.
    pub fn from_amplitudes(amps: &[CVec]) -> Result<Self> {
        let branches = amps
            .iter()
            .map(|c| {
                if c.len() != PAIRS.len() {
                    return Err(Error::Shape(format!("two-particle amplitudes need 6 entries, got {}", c.len())));
                }
                let mut w = CMat::zeros(4, 4);
                for (k, &(a, b)) in PAIRS.iter().enumerate() {
                    w[(a, b)] = c[k] * 0.5;
                    w[(b, a)] = -c[k] * 0.5;
                }
                Ok(w)
            })
            .collect::<Result<_>>()?;
        Ok(SlaterExpansion { branches })
    }

    /// Spectral branches of a two-fermion state, on the 16-dimensional Fock space or
    /// the 6-dimensional sector. Branches of vanishing weight are dropped.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let sector = two_particle_block(rho)?;
        let eig = eigh(&sector);
        let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
        let amps: Vec<CVec> = eig
            .values
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &l)| l > RANK_TOL * top.max(1.0))
            .map(|(k, &l)| eig.vectors.column(k).into_owned() * C64::from(l.sqrt()))
            .collect();
        Self::from_amplitudes(&amps)
    }

    pub fn branches(&self) -> &[CMat] {
        &self.branches
    }

    pub fn rank(&self) -> usize {
        self.branches.len()
    }

    /// `K_ij = Σ ε^{abcd} w⁽ⁱ⁾_ab w⁽ʲ⁾_cd`, complex symmetric.
    pub fn k_matrix(&self) -> CMat {
        let r = self.branches.len();
        CMat::from_fn(r, r, |i, j| levi_civita_pairing(&self.branches[i], &self.branches[j]))
    }
}

/// `Σ ε^{abcd} x_ab y_cd` over the 24 permutations of four modes.
fn levi_civita_pairing(x: &CMat, y: &CMat) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if let Some(s) = permutation_sign([a, b, c, d]) {
                        sum += x[(a, b)] * y[(c, d)] * s;
                    }
                }
            }
        }
    }
    sum
}

fn permutation_sign(p: [usize; 4]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return None;
            }
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    Some(sign)
}

/// The `6×6` block of `ρ` on [`PAIRS`], after checking nothing lies outside it.
fn two_particle_block(rho: &DensityMatrix) -> Result<CMat> {
    let m = rho.matrix();
    match rho.dim() {
        6 => Ok(m.clone()),
        16 => {
            let idx: Vec<usize> = PAIRS.iter().map(|&(a, b)| (1 << a) | (1 << b)).collect();
            let block = CMat::from_fn(6, 6, |r, c| m[(idx[r], idx[c])]);
            let leak = (block.trace().re - rho.matrix().trace().re).abs();
            if leak > SECTOR_TOL {
                return Err(Error::Argument(format!("weight {leak:.3e} outside the two-particle sector")));
            }
            Ok(block)
        }
        d => Err(Error::Shape(format!("two fermions in four modes need dimension 16 or 6, got {d}"))),
    }
}

pub fn slater_k_matrix(rho: &DensityMatrix) -> Result<CMat> {
    Ok(SlaterExpansion::from_density(rho)?.k_matrix())
}

/// `max(0, 2 max_i κ_i − Σ_i κ_i)` with `κ_i` the singular values of `K`.
///
/// `K` is complex symmetric, so its singular values are the moduli of its Takagi
/// values. Unlike the eigenvalues, they do not depend on how degenerate eigenvectors
/// of `ρ` are chosen.
pub fn quantum_nonfreeness(rho: &DensityMatrix) -> Result<f64> {
    Ok(quantum_nonfreeness_of(&slater_k_matrix(rho)?))
}

pub fn quantum_nonfreeness_of(k: &CMat) -> f64 {
    if k.is_empty() {
        return 0.0;
    }
    let s = k.clone().singular_values();
    let max = s.max();
    (2.0 * max - s.sum()).max(0.0)
}
