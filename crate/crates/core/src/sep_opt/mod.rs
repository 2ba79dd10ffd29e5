//! Closest separable states under the relative entropy.
//!
//! [`e_ppt`] minimizes over states with positive partial transpose and gives a
//! lower bound; [`closest_separable_alternating`] searches explicit product
//! decompositions and gives an upper bound.

mod alternating;
mod lbfgs;
mod logdiff;
mod ppt;

pub use alternating::{closest_separable_alternating, AltOptions, FactorField};
pub use ppt::{e_ppt, e_ppt_with, PptOptions};

use serde::{Deserialize, Serialize};

use crate::densmat::{eigh, kron, CMat, CVec, DensityMatrix, TensorShape, C64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptKind {
    PptLower,
    AlternatingUpper,
}

/// `σ = Σ_i A_i ⊗ B_i`, or its real part when `real_part` is set.
#[derive(Clone, Debug)]
pub struct ProductDecomposition {
    pub dims: (usize, usize),
    pub terms: Vec<(CMat, CMat)>,
    pub real_part: bool,
}

impl ProductDecomposition {
    pub fn sigma(&self) -> CMat {
        let d = self.dims.0 * self.dims.1;
        let mut s = CMat::zeros(d, d);
        for (a, b) in &self.terms {
            s += kron(a, b);
        }
        if self.real_part {
            s.apply(|z| z.im = 0.0);
        }
        s
    }

    pub fn total_trace(&self) -> f64 {
        self.terms.iter().map(|(a, b)| a.trace().re * b.trace().re).sum()
    }

    /// Checks unit total trace (1e-8) and positivity of every factor (−1e-10).
    pub fn validate(&self) -> Result<()> {
        let tr = self.total_trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::Trace(tr, (tr - 1.0).abs()));
        }
        for (a, b) in &self.terms {
            for m in [a, b] {
                let min = eigh(m).values[0];
                if min < -1e-10 {
                    return Err(Error::NotPositive(min));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OptReport {
    pub value: f64,
    pub sigma_star: DensityMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub kind: OptKind,
    pub decomposition: Option<ProductDecomposition>,
}

/// `ρ_p = p 𝟙/4 + (1−p) |Ψ+⟩⟨Ψ+|` with `Ψ+ = (|00⟩ + |11⟩)/√2`.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("p = {p} outside [0, 1]")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = CVec::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)]);
    let m = CMat::identity(4, 4).scale(p / 4.0) + (&psi * psi.adjoint()).scale(1.0 - p);
    DensityMatrix::from_matrix(TensorShape::bipartite(2, 2), m)
}

/// The 3×3 bound-entangled family `ρ_a`, PPT for every `a ∈ [0, 1]`.
///
/// The only coherences are among `|00⟩, |11⟩, |22⟩` and the `|20⟩, |22⟩` pair; a
/// further `|02⟩–|20⟩` coherence of size `a` would make the matrix indefinite.
pub fn horodecki_state(a: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::Argument(format!("a = {a} outside [0, 1]")));
    }
    let mut m = CMat::zeros(9, 9);
    for i in 0..9 {
        m[(i, i)] = C64::new(a, 0.0);
    }
    for &(i, j) in &[(0, 4), (0, 8), (4, 8)] {
        m[(i, j)] = C64::new(a, 0.0);
        m[(j, i)] = C64::new(a, 0.0);
    }
    m[(6, 6)] = C64::new((1.0 + a) / 2.0, 0.0);
    m[(8, 8)] = C64::new((1.0 + a) / 2.0, 0.0);
    let off = (1.0 - a * a).max(0.0).sqrt() / 2.0;
    m[(6, 8)] = C64::new(off, 0.0);
    m[(8, 6)] = C64::new(off, 0.0);
    DensityMatrix::from_matrix(TensorShape::bipartite(3, 3), m.unscale(8.0 * a + 1.0))
}
