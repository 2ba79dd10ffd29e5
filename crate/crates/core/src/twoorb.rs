//! Two spatial orbitals (four modes) with spin symmetry.
//!
//! States that commute with the local particle numbers, the magnetization and the
//! total spin are diagonal in the sixteen-state basis of [`table_vector`]. For them
//! the closest separable state under the number superselection rule has a closed
//! form, and all entanglement sits in the span `M` of states 8–11.
//!
//! The two-orbital space is the tensor product `ℂ⁴ ⊗ ℂ⁴` of the orbitals `A`, `B`
//! with local basis `(|Ω⟩, |↑⟩, |↓⟩, |↑↓⟩)`, obtained from the Fock space of the modes
//! `(A↑, A↓, B↑, B↓)` by [`crate::fock::split_operator`] (no reordering signs occur).

use crate::densmat::{eigh, max_abs, shannon_entropy, xlogx, CMat, CVec, DensityMatrix, TensorShape, C64};
use crate::error::{Error, Result};
use crate::fock::{number_operator, reflection, split_operator, symmetry_ops, ModeBasis};

const WEIGHT_CLIP: f64 = 1e-12;
const SUM_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-8;
const EQUAL_TOL: f64 = 1e-10;

/// Which states 6 and 7 the weights refer to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TableBasis {
    /// `|↑↓, Ω⟩` and `|Ω, ↑↓⟩`.
    #[default]
    Number,
    /// `(|Ω, ↑↓⟩ ∓ |↑↓, Ω⟩)/√2`, the eigenstates of the site reflection.
    Parity,
}

const OMEGA: usize = 0;
const UP: usize = 1;
const DOWN: usize = 2;
const PAIR: usize = 3;

fn idx(a: usize, b: usize) -> usize {
    4 * a + b
}

/// Basis state `|Ψ_i⟩`, `i = 1..=16`, as a vector on `ℂ⁴ ⊗ ℂ⁴`.
pub fn table_vector(i: usize, basis: TableBasis) -> Result<CVec> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let single = |a, b| vec![(idx(a, b), 1.0)];
    let pair = |x: (usize, usize), y: (usize, usize), sign: f64| vec![(idx(x.0, x.1), s), (idx(y.0, y.1), sign * s)];
    let entries = match (i, basis) {
        (1, _) => single(OMEGA, OMEGA),
        (2, _) => single(OMEGA, UP),
        (3, _) => single(UP, OMEGA),
        (4, _) => single(OMEGA, DOWN),
        (5, _) => single(DOWN, OMEGA),
        (6, TableBasis::Number) => single(PAIR, OMEGA),
        (7, TableBasis::Number) => single(OMEGA, PAIR),
        (6, TableBasis::Parity) => pair((OMEGA, PAIR), (PAIR, OMEGA), -1.0),
        (7, TableBasis::Parity) => pair((OMEGA, PAIR), (PAIR, OMEGA), 1.0),
        (8, _) => pair((UP, DOWN), (DOWN, UP), -1.0),
        (9, _) => pair((UP, DOWN), (DOWN, UP), 1.0),
        (10, _) => single(UP, UP),
        (11, _) => single(DOWN, DOWN),
        (12, _) => single(PAIR, UP),
        (13, _) => single(UP, PAIR),
        (14, _) => single(PAIR, DOWN),
        (15, _) => single(DOWN, PAIR),
        (16, _) => single(PAIR, PAIR),
        _ => return Err(Error::Index(format!("table state {i} outside 1..=16"))),
    };
    let mut v = CVec::zeros(16);
    for (k, x) in entries {
        v[k] = C64::new(x, 0.0);
    }
    Ok(v)
}

/// Conserved quantities available for twirling two orbitals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// `N_A ⊗ 𝟙` and `𝟙 ⊗ N_B`.
    LocalNumbers,
    /// Local parities `(−1)^{N_A}` and `(−1)^{N_B}`.
    LocalParities,
    TotalNumber,
    Magnetization,
    TotalSpin,
    /// Exchange of the two orbitals, with the fermionic sign.
    Reflection,
}

/// The operators of `symmetries` on `ℂ⁴ ⊗ ℂ⁴`.
pub fn symmetry_generators(symmetries: &[Symmetry]) -> Result<Vec<CMat>> {
    let basis = ModeBasis::orbitals(2)?;
    let groups = [vec![0, 1], vec![2, 3]];
    let to_tensor = |m: CMat| split_operator(&m, &groups).map(|(_, t)| t);
    let ops = symmetry_ops(&basis)?;
    let parity = |modes: &[usize]| -> Result<CMat> {
        let n = number_operator(&basis, modes)?;
        let d = n.nrows();
        Ok(CMat::from_fn(d, d, |r, c| {
            let even = (n[(r, r)].re.round() as i64) % 2 == 0;
            C64::new(
                if r != c {
                    0.0
                } else if even {
                    1.0
                } else {
                    -1.0
                },
                0.0,
            )
        }))
    };
    let mut out = Vec::new();
    for s in symmetries {
        match s {
            Symmetry::LocalNumbers => {
                out.push(to_tensor(number_operator(&basis, &[0, 1])?)?);
                out.push(to_tensor(number_operator(&basis, &[2, 3])?)?);
            }
            Symmetry::LocalParities => {
                out.push(to_tensor(parity(&[0, 1])?)?);
                out.push(to_tensor(parity(&[2, 3])?)?);
            }
            Symmetry::TotalNumber => out.push(to_tensor(ops.n.clone())?),
            Symmetry::Magnetization => out.push(to_tensor(ops.s_z.clone())?),
            Symmetry::TotalSpin => out.push(to_tensor(ops.s_squared.clone())?),
            Symmetry::Reflection => out.push(to_tensor(reflection(&basis, &[(0, 1)])?)?),
        }
    }
    Ok(out)
}

/// Orthonormal bases of the joint eigenspaces of commuting Hermitian `generators`.
fn joint_eigenspaces(generators: &[CMat], n: usize) -> Vec<CMat> {
    let mut blocks = vec![CMat::identity(n, n)];
    for g in generators {
        let mut next = Vec::new();
        for q in &blocks {
            let e = eigh(&(q.adjoint() * g * q));
            let k = e.values.len();
            let mut start = 0;
            while start < k {
                let mut end = start + 1;
                while end < k && e.values[end] - e.values[start] < 1e-8 {
                    end += 1;
                }
                next.push(q * e.vectors.columns(start, end - start));
                start = end;
            }
        }
        blocks = next;
    }
    blocks
}

/// `ρ ↦ Σ_k P_k ρ P_k` over the joint eigenprojectors of commuting Hermitian generators.
pub fn twirl(rho: &DensityMatrix, generators: &[CMat]) -> Result<DensityMatrix> {
    let n = rho.dim();
    for (i, g) in generators.iter().enumerate() {
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::Shape(format!("generator {i} is {}×{}, state is {n}×{n}", g.nrows(), g.ncols())));
        }
        if max_abs(&(g - g.adjoint())) > 1e-10 {
            return Err(Error::NotHermitian(max_abs(&(g - g.adjoint()))));
        }
        for h in &generators[..i] {
            let scale = max_abs(g).max(max_abs(h)).max(1.0);
            if max_abs(&(g * h - h * g)) > 1e-10 * scale * scale {
                return Err(Error::Argument("twirl generators do not commute".into()));
            }
        }
    }
    let mut out = CMat::zeros(n, n);
    for q in joint_eigenspaces(generators, n) {
        let p = &q * q.adjoint();
        out += &p * rho.matrix() * &p;
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho.shape().clone(), out))
}

/// Weights of the sector `M = span{Ψ8, Ψ9, Ψ10, Ψ11}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorM {
    pub p8: f64,
    pub p9: f64,
    pub p10: f64,
    pub p11: f64,
}

impl SectorM {
    pub fn new(p8: f64, p9: f64, p10: f64, p11: f64) -> Result<Self> {
        let m = SectorM { p8, p9, p10, p11 };
        let w = m.weights();
        if let Some(&neg) = w.iter().find(|&&x| x < -WEIGHT_CLIP || !x.is_finite()) {
            return Err(Error::NotPositive(neg));
        }
        if m.trace() > 1.0 + SUM_TOL {
            return Err(Error::Trace(m.trace(), m.trace() - 1.0));
        }
        let [p8, p9, p10, p11] = w.map(|x| x.max(0.0));
        Ok(SectorM { p8, p9, p10, p11 })
    }

    pub fn weights(&self) -> [f64; 4] {
        [self.p8, self.p9, self.p10, self.p11]
    }

    pub fn trace(&self) -> f64 {
        self.weights().iter().sum()
    }
}

/// `q10 q11 ≥ ((q8 − q9)/2)²`: separability of a diagonal state on `M`.
pub fn separability_condition_m(sector: &SectorM) -> bool {
    let d = (sector.p8 - sector.p9) / 2.0;
    sector.p10 * sector.p11 >= d * d
}

/// Closest separable weights within `M`, preserving the sector trace.
fn closest_in_sector(m: &SectorM) -> SectorM {
    if separability_condition_m(m) {
        return *m;
    }
    let swap = m.p9 > m.p8;
    let (p8, p9) = if swap { (m.p9, m.p8) } else { (m.p8, m.p9) };
    let (p10, p11) = (m.p10, m.p11);
    let s = p8 + p9 + p10 + p11;
    let (q8, q9, q10, q11) = if (p10 - p11).abs() <= EQUAL_TOL {
        let half = (p10 + p11) / 2.0;
        let rest = s - p8;
        if rest <= 0.0 {
            // Pure Ψ8 limit: the ratio below is 0/0; the sector trace fixes the rest.
            let q8 = s / 2.0;
            (q8, s - q8, 0.0, 0.0)
        } else {
            let f = s / (2.0 * rest);
            (s / 2.0, f * p9, f * half, f * half)
        }
    } else {
        let a = s * s - (p10 - p11).powi(2);
        let b = (p8 - p9) * s;
        let c = (p10 + p11).powi(2) * (p8 - p9).powi(2)
            + 8.0 * p10 * p11 * (2.0 * p10 * p11 + (p10 + p11) * (p8 + p9) + 2.0 * p8 * p9);
        let rc = c.max(0.0).sqrt();
        let q8 = (a + b + rc) / (4.0 * (s - p9));
        let q9 = (a - b - rc) / (4.0 * (s - p8));
        let shift = (p8 + p9 - q8 - q9) / 2.0;
        (q8, q9, p10 + shift, p11 + shift)
    };
    let (q8, q9) = if swap { (q9, q8) } else { (q8, q9) };
    SectorM { p8: q8, p9: q9, p10: q10, p11: q11 }
}

/// `Σ p ln(p/q)` over matching weights.
fn relative_entropy_weights(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a <= 0.0 {
                0.0
            } else if b <= 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum::<f64>()
        .max(0.0)
}

/// A two-orbital state diagonal in the table basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTwoOrbitalState {
    p: [f64; 16],
    basis: TableBasis,
}

impl SymmetricTwoOrbitalState {
    /// `p[i-1]` is the weight of `|Ψ_i⟩`. Weights in `[−1e-12, 0)` are clipped to zero
    /// and the vector renormalized.
    pub fn new(p: [f64; 16], basis: TableBasis) -> Result<Self> {
        if let Some(&neg) = p.iter().find(|&&x| x < -WEIGHT_CLIP || !x.is_finite()) {
            return Err(Error::NotPositive(neg));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Trace(total, (total - 1.0).abs()));
        }
        let mut p = p.map(|x| x.max(0.0));
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        Ok(SymmetricTwoOrbitalState { p, basis })
    }

    pub fn weights(&self) -> &[f64; 16] {
        &self.p
    }

    /// Weight of `|Ψ_i⟩`, 1-based.
    pub fn weight(&self, i: usize) -> f64 {
        self.p[i - 1]
    }

    pub fn basis(&self) -> TableBasis {
        self.basis
    }

    pub fn sector_m(&self) -> SectorM {
        SectorM { p8: self.p[7], p9: self.p[8], p10: self.p[9], p11: self.p[10] }
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        let mut m = CMat::zeros(16, 16);
        for (i, &w) in self.p.iter().enumerate() {
            if w > 0.0 {
                let v = table_vector(i + 1, self.basis)?;
                m += (&v * v.adjoint()).scale(w);
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(TensorShape::bipartite(4, 4), m))
    }
}

/// Table weights `p_i = ⟨Ψ_i|ρ|Ψ_i⟩` of a two-orbital state.
///
/// `ρ` must commute with the total particle number, magnetization and total spin.
/// In the parity basis it must also have no coherence between states 6 and 7.
/// The weights are those of the superselected state `ρ^N` (or `ρ^P`), which is
/// diagonal in the respective basis.
pub fn project_to_table_basis(rho: &DensityMatrix, basis: TableBasis) -> Result<SymmetricTwoOrbitalState> {
    if rho.shape().dims() != [4, 4] {
        return Err(Error::Shape(format!("expected a 4⊗4 state, got {:?}", rho.shape().dims())));
    }
    let m = rho.matrix();
    let gens = symmetry_generators(&[Symmetry::TotalNumber, Symmetry::Magnetization, Symmetry::TotalSpin])?;
    let worst = gens.iter().map(|g| max_abs(&(m * g - g * m))).fold(0.0, f64::max);
    if worst > SYMMETRY_TOL {
        return Err(Error::Symmetry(worst));
    }
    let vecs: Vec<CVec> = (1..=16).map(|i| table_vector(i, basis)).collect::<Result<_>>()?;
    if basis == TableBasis::Parity {
        let c = (vecs[5].adjoint() * m * &vecs[6])[(0, 0)].norm();
        if c > SYMMETRY_TOL {
            return Err(Error::Symmetry(c));
        }
    }
    let mut p = [0.0; 16];
    for (w, v) in p.iter_mut().zip(&vecs) {
        *w = (v.adjoint() * m * v)[(0, 0)].re;
    }
    SymmetricTwoOrbitalState::new(p, basis)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NssrSolution {
    /// Weights of the closest separable state, in the basis of the input.
    pub closest: SymmetricTwoOrbitalState,
    /// `S(ρ^N ‖ σ*)` in nats.
    pub entanglement: f64,
}

/// Closest separable state to a symmetric state under the number superselection rule.
pub fn closest_separable_nssr(state: &SymmetricTwoOrbitalState) -> Result<NssrSolution> {
    let m = state.sector_m();
    let q = closest_in_sector(&m);
    let mut p = state.p;
    p[7..11].copy_from_slice(&q.weights());
    let entanglement = relative_entropy_weights(&m.weights(), &q.weights());
    Ok(NssrSolution { closest: SymmetricTwoOrbitalState { p, basis: state.basis }, entanglement })
}

/// `t ln t + (S−t) ln(S−t) − S ln(S/2)`, `t = max{p8, p9}`: the entanglement of an
/// entangled sector with `p10 = p11`.
pub fn equal_spin_entanglement(sector: &SectorM) -> f64 {
    let s = sector.trace();
    let t = sector.p8.max(sector.p9);
    if s <= 0.0 {
        return 0.0;
    }
    xlogx(t) + xlogx(s - t) - s * (s / 2.0).ln()
}

/// Closest separable state under the parity superselection rule, for states with `p1 = p16`.
///
/// The even–even span `{Ψ1, Ψ6, Ψ7, Ψ16}` is isomorphic to `M`, with states 6 and 7
/// of the parity basis in the roles of 8 and 9 and states 1 and 16 in the roles of
/// 10 and 11. Both blocks are solved independently and their entanglement adds.
pub fn closest_separable_pssr(state: &SymmetricTwoOrbitalState) -> Result<NssrSolution> {
    if state.basis != TableBasis::Parity {
        return Err(Error::Argument("parity-rule entanglement needs weights in the parity basis".into()));
    }
    let (p1, p16) = (state.weight(1), state.weight(16));
    if (p1 - p16).abs() > EQUAL_TOL {
        return Err(Error::Argument(format!("closed form needs p1 = p16, got {p1} and {p16}")));
    }
    let even = SectorM { p8: state.weight(6), p9: state.weight(7), p10: p1, p11: p16 };
    let q = closest_in_sector(&even);
    let mut sol = closest_separable_nssr(state)?;
    let p = &mut sol.closest.p;
    (p[5], p[6], p[0], p[15]) = (q.p8, q.p9, q.p10, q.p11);
    sol.entanglement += relative_entropy_weights(&even.weights(), &q.weights());
    Ok(sol)
}

pub fn entanglement_pssr(state: &SymmetricTwoOrbitalState) -> Result<f64> {
    Ok(closest_separable_pssr(state)?.entanglement)
}

/// Value of a measure without superselection and under the parity and number rules.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SsrTriple {
    pub none: f64,
    pub parity: f64,
    pub number: f64,
}

impl SsrTriple {
    pub fn get(&self, kind: crate::ssr::SsrKind) -> f64 {
        match kind {
            crate::ssr::SsrKind::None => self.none,
            crate::ssr::SsrKind::Parity => self.parity,
            crate::ssr::SsrKind::Number => self.number,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SingleOrbitalMeasures {
    pub mutual_information: SsrTriple,
    pub entanglement: SsrTriple,
}

/// Correlation between one orbital and the rest of a pure state whose orbital
/// reduced state is `diag(p)` in the basis `(Ω, ↑, ↓, ↑↓)`. Values in nats.
pub fn single_orbital_measures(p: &[f64]) -> Result<SingleOrbitalMeasures> {
    if p.len() != 4 {
        return Err(Error::Shape(format!("expected 4 probabilities, got {}", p.len())));
    }
    if p.iter().any(|&x| x < -WEIGHT_CLIP || !x.is_finite()) {
        return Err(Error::Argument(format!("{p:?} has negative entries")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Trace(total, (total - 1.0).abs()));
    }
    let p: Vec<f64> = p.iter().map(|x| x.max(0.0)).collect();
    let e = shannon_entropy(&p);
    let sum_xlogx = -e;
    let even = p[0] + p[3];
    let odd = p[1] + p[2];
    let e_p = xlogx(even) + xlogx(odd) - sum_xlogx;
    let e_n = xlogx(odd) - xlogx(p[1]) - xlogx(p[2]);
    let i_p = xlogx(even) + xlogx(odd) - 2.0 * sum_xlogx;
    let i_n = xlogx(p[0]) + xlogx(odd) + xlogx(p[3]) - 2.0 * sum_xlogx;
    Ok(SingleOrbitalMeasures {
        mutual_information: SsrTriple { none: 2.0 * e, parity: i_p, number: i_n },
        entanglement: SsrTriple { none: e, parity: e_p, number: e_n },
    })
}

/// Distance `Σ_{α≤N} (1−λ_α) + Σ_{α>N} λ_α` of descending natural occupation
/// numbers from the closed-shell point.
pub fn intrinsic_correlation(occupations: &[f64], particles: usize) -> Result<f64> {
    if occupations.iter().any(|&x| !(-1e-12..=1.0 + 1e-12).contains(&x)) {
        return Err(Error::Argument("occupation numbers must lie in [0, 1]".into()));
    }
    if occupations.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Argument("occupation numbers must be sorted in descending order".into()));
    }
    if particles > occupations.len() {
        return Err(Error::Argument(format!("{particles} particles in {} spin-orbitals", occupations.len())));
    }
    let (occ, virt) = occupations.split_at(particles);
    Ok(occ.iter().map(|x| 1.0 - x).sum::<f64>() + virt.iter().sum::<f64>())
}
