//! Two-site Hubbard model at half filling, as a model of a stretched two-electron bond.
//!
//! Energies are in units of the on-site repulsion `U = 1`; the hopping decays as
//! `t = e^{−r}` with the site separation `r`. Modes are `(L↑, L↓, R↑, R↓) = (0, 1, 2, 3)`,
//! and the left/right split is `[[0, 1], [2, 3]]`.

use serde::{Deserialize, Serialize};

use crate::densmat::{eigh, CMat, CVec, DensityMatrix, HermitianOperator, TensorShape, C64};
use crate::error::{Error, Result};
use crate::fock::{number_operator, split_modes, split_operator, word_matrix, ModeBasis};
use crate::measures::{coupling_bound, mutual_information, CouplingBound};
use crate::particle::{nonfreeness_fock, quantum_nonfreeness, slater_k_matrix};
use crate::rdmio::ScanRecord;
use crate::ssr::{ssr_measure_with, SeparableBackend, SsrKind, SsrMeasure};
use crate::twoorb::{project_to_table_basis, TableBasis};

pub const LEFT_RIGHT: [[usize; 2]; 2] = [[0, 1], [2, 3]];
/// Chemical potential of the grand-canonical ensemble; `U/2` keeps `⟨N⟩ = 2`.
pub const HALF_FILLING_MU: f64 = 0.5;
const ROOT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerParams {
    t: f64,
    r: f64,
    temperature: f64,
}

impl DimerParams {
    pub fn from_r(r: f64, temperature: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::Argument(format!("separation {r} is not finite")));
        }
        Self::check_temperature(temperature)?;
        Ok(DimerParams { t: (-r).exp(), r, temperature })
    }

    /// `t = 0` is the infinitely separated limit `r = ∞`.
    pub fn from_t(t: f64, temperature: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Argument(format!("hopping {t} must be finite and non-negative")));
        }
        Self::check_temperature(temperature)?;
        Ok(DimerParams { t, r: -t.ln(), temperature })
    }

    fn check_temperature(temperature: f64) -> Result<()> {
        if !(temperature >= 0.0) {
            return Err(Error::Argument(format!("temperature {temperature} must be non-negative")));
        }
        Ok(())
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// Closed-form two-particle spectrum. `energies` is ascending: the singlet ground
/// state, the triplet, the antisymmetric ionic singlet and the upper singlet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerSpectrum {
    pub energies: [f64; 6],
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub w: f64,
}

impl DimerSpectrum {
    /// Gap between the ground state and the triplet.
    pub fn gap(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }
}

pub fn closed_form_spectrum(t: f64) -> DimerSpectrum {
    let w = (0.25 + 4.0 * t * t).sqrt();
    let a = ((w + 0.5) / (2.0 * w)).sqrt();
    let b = 2.0 * t / (2.0 * w * (w + 0.5)).sqrt();
    let c = -((w - 0.5) / (2.0 * w)).sqrt();
    // d = 2t/√(2W(W − ½)) written without the cancellation at small t.
    let d = (1.0 - c * c).sqrt();
    DimerSpectrum { energies: [0.5 - w, 0.0, 0.0, 0.0, 1.0, 0.5 + w], a, b, c, d, w }
}

pub fn dimer_basis() -> ModeBasis {
    ModeBasis::orbitals(2).expect("four modes")
}

/// `−t Σ_σ (f_Lσ† f_Rσ + h.c.)` on the 16-dimensional Fock space.
pub fn hopping_operator(t: f64) -> CMat {
    let basis = dimer_basis();
    let mut h = CMat::zeros(16, 16);
    for (l, r) in [(0, 2), (1, 3)] {
        h += word_matrix(&basis, &[(l, true), (r, false)]).expect("valid modes");
        h += word_matrix(&basis, &[(r, true), (l, false)]).expect("valid modes");
    }
    h.scale(-t)
}

/// Full Fock-space Hamiltonian with `U = 1`.
pub fn dimer_hamiltonian(t: f64) -> CMat {
    let basis = dimer_basis();
    let mut h = hopping_operator(t);
    for (u, d) in [(0, 1), (2, 3)] {
        h += word_matrix(&basis, &[(u, true), (u, false), (d, true), (d, false)]).expect("valid modes");
    }
    h
}

/// Restriction to the two-particle sector in the pair order of [`crate::particle::PAIRS`].
pub fn sector_hamiltonian(t: f64) -> CMat {
    let h = dimer_hamiltonian(t);
    let idx = pair_indices();
    CMat::from_fn(6, 6, |r, c| h[(idx[r], idx[c])])
}

fn pair_indices() -> Vec<usize> {
    crate::particle::PAIRS.iter().map(|&(a, b)| (1 << a) | (1 << b)).collect()
}

/// `f_a† f_b† |Ω⟩` for `a < b` as a Fock vector.
fn pair_state(a: usize, b: usize) -> CVec {
    let mut v = CVec::zeros(16);
    v[(1 << a) | (1 << b)] = C64::new(1.0, 0.0);
    v
}

/// Two-particle eigenstates paired with the energies of [`closed_form_spectrum`].
pub fn closed_form_states(t: f64) -> [(f64, CVec); 6] {
    let s = closed_form_spectrum(t);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // |1±⟩ = (f†L↑ f†R↓ ∓ f†L↓ f†R↑)|Ω⟩/√2, |2±⟩ = (f†L↑ f†L↓ ± f†R↑ f†R↓)|Ω⟩/√2.
    let one_p = (pair_state(0, 3) - pair_state(1, 2)) * C64::from(h);
    let one_m = (pair_state(0, 3) + pair_state(1, 2)) * C64::from(h);
    let two_p = (pair_state(0, 1) + pair_state(2, 3)) * C64::from(h);
    let two_m = (pair_state(0, 1) - pair_state(2, 3)) * C64::from(h);
    let e = s.energies;
    [
        (e[0], &one_p * C64::from(s.a) + &two_p * C64::from(s.b)),
        (e[1], pair_state(0, 2)),
        (e[2], one_m),
        (e[3], pair_state(1, 3)),
        (e[4], two_m),
        (e[5], one_p * C64::from(s.c) + two_p * C64::from(s.d)),
    ]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ensemble {
    /// `e^{−H/T}/Z` on the two-particle sector.
    #[default]
    Canonical,
    /// `e^{−(H − μN)/T}/Z` on the whole Fock space at half filling.
    GrandCanonical,
}

/// Thermal state on the 16-dimensional Fock space. `T = 0` gives the ground state.
pub fn gibbs_state(params: &DimerParams, ensemble: Ensemble) -> Result<DensityMatrix> {
    let levels: Vec<(f64, CVec)> = match ensemble {
        Ensemble::Canonical => closed_form_states(params.t).into_iter().collect(),
        Ensemble::GrandCanonical => {
            let h =
                dimer_hamiltonian(params.t) - number_operator(&dimer_basis(), &[0, 1, 2, 3])?.scale(HALF_FILLING_MU);
            let e = eigh(&h);
            e.values.iter().enumerate().map(|(k, &x)| (x, e.vectors.column(k).into_owned())).collect()
        }
    };
    thermal_mixture(&levels, params.temperature)
}

/// Ground state and triplet only, weighted `p² = 1/(1 + 3e^{−ΔE/T})` and `q² = e^{−ΔE/T} p²`.
///
/// This is the low-temperature truncation behind the closed-form critical distances.
/// It differs from the canonical [`gibbs_state`] by the Boltzmann weight of the
/// omitted levels, `≈ e^{−(1 − E₀)/T}`.
pub fn two_level_state(params: &DimerParams) -> Result<DensityMatrix> {
    let levels: Vec<(f64, CVec)> = closed_form_states(params.t).into_iter().take(4).collect();
    thermal_mixture(&levels, params.temperature)
}

fn thermal_mixture(levels: &[(f64, CVec)], temp: f64) -> Result<DensityMatrix> {
    let e0 = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = if temp == 0.0 {
        // Only at t = 0 is the ground level degenerate; it is then shared equally, as for T → 0.
        levels.iter().map(|l| if l.0 == e0 { 1.0 } else { 0.0 }).collect()
    } else {
        levels.iter().map(|l| (-(l.0 - e0) / temp).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    let mut m = CMat::zeros(16, 16);
    for ((_, v), w) in levels.iter().zip(&weights) {
        if *w > 0.0 {
            m += (v * v.adjoint()).scale(w / z);
        }
    }
    DensityMatrix::from_matrix(TensorShape::single(16), m)
}

/// `Z = Σ_i e^{−E_i/T}` over the two-particle spectrum.
pub fn partition_function(params: &DimerParams) -> f64 {
    closed_form_spectrum(params.t).energies.iter().map(|e| (-e / params.temperature).exp()).sum()
}

/// The Fock-space state as a left ⊗ right two-orbital state.
pub fn left_right(rho: &DensityMatrix) -> Result<DensityMatrix> {
    split_modes(rho, &LEFT_RIGHT.map(|g| g.to_vec()))
}

/// The hopping term as an operator on left ⊗ right.
pub fn coupling_operator(t: f64) -> Result<HermitianOperator> {
    let (shape, m) = split_operator(&hopping_operator(t), &LEFT_RIGHT.map(|g| g.to_vec()))?;
    HermitianOperator::new(shape, m)
}

/// `I(L:R) ≤ 2‖H_LR‖_F / T` for the Gibbs state of `params`.
///
/// The bound follows from the Gibbs state minimizing the free energy over all states
/// of the Fock space, which only the grand-canonical state does.
pub fn thermal_bound(params: &DimerParams, ensemble: Ensemble) -> Result<CouplingBound> {
    let rho = left_right(&gibbs_state(params, ensemble)?)?;
    coupling_bound(&rho, &[coupling_operator(params.t)?], params.temperature)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Picture {
    /// Correlation and entanglement between the two sites.
    #[default]
    Mode,
    /// Nonfreeness and quantum nonfreeness of the two electrons.
    Particle,
}

impl std::str::FromStr for Picture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode" => Ok(Picture::Mode),
            "particle" => Ok(Picture::Particle),
            _ => Err(Error::Argument(format!("unknown picture {s:?}"))),
        }
    }
}

/// Low-temperature expansion `−½ ln T + c₀ + c₁ T` of the critical separation,
/// truncated before the `O(T²)` term.
pub fn asymptotic_rcrit(temperature: f64, picture: Picture) -> f64 {
    let ln3 = 3f64.ln();
    let c0 = 2f64.ln() - 0.5 * ln3.ln();
    let c1 = match picture {
        Picture::Mode => -0.5 * (1.0 + ln3),
        Picture::Particle => -0.5 * (2.0 + ln3),
    };
    -0.5 * temperature.ln() + c0 + c1 * temperature
}

/// Bracket `[0.1, −½ ln T + 10]` for the critical separation.
fn bracket(temperature: f64) -> Result<(f64, f64)> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Argument(format!("critical distance needs T > 0, got {temperature}")));
    }
    Ok((0.1, (-0.5 * temperature.ln() + 10.0).max(0.2)))
}

/// Bisection for a sign change of `f`, to 1e-8 in `r`.
fn bisect(f: impl Fn(f64) -> Result<f64>, (mut lo, mut hi): (f64, f64)) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(format!("no sign change on [{lo}, {hi}] (values {flo:.3e}, {fhi:.3e})")));
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ground-state and triplet-only model: root of `3e^{−ΔE/T} − a²`.
pub fn critical_distance_mode(temperature: f64) -> Result<f64> {
    let f = |r: f64| {
        let s = closed_form_spectrum((-r).exp());
        Ok(3.0 * (-s.gap() / temperature).exp() - s.a * s.a)
    };
    bisect(f, bracket(temperature)?)
}

/// Ground-state and triplet-only model: root of `|a² − b²| p² − 3q²`.
pub fn critical_distance_particle(temperature: f64) -> Result<f64> {
    let f = |r: f64| {
        let s = closed_form_spectrum((-r).exp());
        let x = (-s.gap() / temperature).exp();
        let (p2, q2) = (1.0 / (1.0 + 3.0 * x), x / (1.0 + 3.0 * x));
        Ok((s.a * s.a - s.b * s.b).abs() * p2 - 3.0 * q2)
    };
    bisect(f, bracket(temperature)?)
}

/// Critical separation of the full canonical Gibbs state, from the sign of the
/// separability margin rather than from the two-level model.
pub fn critical_distance_gibbs(temperature: f64, picture: Picture) -> Result<f64> {
    let f = |r: f64| {
        let rho = gibbs_state(&DimerParams::from_r(r, temperature)?, Ensemble::Canonical)?;
        match picture {
            Picture::Mode => {
                let rho_n = crate::ssr::ssr_project(&left_right(&rho)?, SsrKind::Number, &[2, 2])?;
                let m = project_to_table_basis(&rho_n, TableBasis::Number)?.sector_m();
                Ok(m.p10 * m.p11 - ((m.p8 - m.p9) / 2.0).powi(2))
            }
            Picture::Particle => {
                let s = slater_k_matrix(&rho)?.singular_values();
                Ok(s.sum() - 2.0 * s.max())
            }
        }
    };
    bisect(f, bracket(temperature)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub picture: Picture,
    /// Superselection rule of the mode picture; ignored in the particle picture.
    pub ssr: SsrKind,
    pub ensemble: Ensemble,
    pub backend: SeparableBackend,
    pub jobs: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            picture: Picture::Mode,
            ssr: SsrKind::Number,
            ensemble: Ensemble::Canonical,
            backend: SeparableBackend::Auto,
            jobs: 1,
        }
    }
}

/// `r ∈ [0.1, 6]` in steps of 0.05 crossed with 13 temperatures from 1e-3 to 1 on a log scale.
pub fn default_grid() -> Vec<(f64, f64)> {
    let rs = crate::scan::linear_grid(0.1, 6.0, 0.05).expect("valid grid");
    let ts = crate::scan::log_grid(1e-3, 1.0, 13).expect("valid grid");
    ts.iter().flat_map(|&t| rs.iter().map(move |&r| (t, r))).collect()
}

/// Column names of a scan in the given picture.
pub fn scan_columns(picture: Picture) -> [&'static str; 2] {
    match picture {
        Picture::Mode => ["mutual_information", "entanglement"],
        Picture::Particle => ["nonfreeness", "quantum_nonfreeness"],
    }
}

/// Measures at every `(T, r)` point, in grid order. A failing point keeps its row,
/// with NaN values and the error as its status.
pub fn scan(grid: &[(f64, f64)], opts: &ScanOptions) -> Result<Vec<ScanRecord>> {
    if grid.is_empty() {
        return Err(Error::Argument("empty scan grid".into()));
    }
    let names = scan_columns(opts.picture);
    Ok(crate::scan::par_map(grid, opts.jobs, |&(temp, r)| {
        let mut rec = ScanRecord::new(vec![("T".into(), temp), ("r".into(), r)]);
        let values = scan_point(temp, r, opts).unwrap_or_else(|e| {
            rec.status = e.to_string();
            [f64::NAN; 2]
        });
        rec.measures = names.iter().map(|n| n.to_string()).zip(values).collect();
        rec
    }))
}

fn scan_point(temp: f64, r: f64, opts: &ScanOptions) -> Result<[f64; 2]> {
    let rho = gibbs_state(&DimerParams::from_r(r, temp)?, opts.ensemble)?;
    match opts.picture {
        Picture::Mode => {
            let lr = left_right(&rho)?;
            let projected = crate::ssr::ssr_project(&lr, opts.ssr, &[2, 2])?;
            let i = mutual_information(&projected)?;
            let e = ssr_measure_with(&lr, opts.ssr, &[2, 2], SsrMeasure::Entanglement, opts.backend)?;
            Ok([i, e])
        }
        Picture::Particle => Ok([nonfreeness_fock(&rho)?, quantum_nonfreeness(&rho)?]),
    }
}
