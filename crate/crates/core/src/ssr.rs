//! Superselection sectors and the projection onto the physical part of a state.

use serde::{Deserialize, Serialize};

use crate::densmat::{kron, CMat, DensityMatrix, C64};
use crate::error::{Error, Result};
use crate::fock::local_number_operator;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SsrKind {
    #[default]
    None,
    Parity,
    Number,
}

impl std::fmt::Display for SsrKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SsrKind::None => "none",
            SsrKind::Parity => "p",
            SsrKind::Number => "n",
        })
    }
}

impl std::str::FromStr for SsrKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SsrKind::None),
            "p" | "parity" => Ok(SsrKind::Parity),
            "n" | "number" => Ok(SsrKind::Number),
            _ => Err(Error::Argument(format!("unknown superselection rule {s:?}"))),
        }
    }
}

const ROUND_TOL: f64 = 1e-8;
const PROJECTOR_TOL: f64 = 1e-12;

/// Per-factor spectral projectors `(q, P_q)` of a conserved local charge.
#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    pub factors: Vec<Vec<(i64, CMat)>>,
}

impl SectorDecomposition {
    /// Projectors from local number operators; parity groups sectors by `q mod 2`.
    pub fn from_number_operators(numbers: &[CMat], kind: SsrKind) -> Result<Self> {
        let factors = numbers.iter().map(|n| sectors_of(n, kind)).collect::<Result<Vec<_>>>()?;
        let dec = SectorDecomposition { factors };
        dec.validate()?;
        Ok(dec)
    }

    /// Projectors for factors made of the given numbers of fermionic modes.
    pub fn for_modes(modes_per_factor: &[usize], kind: SsrKind) -> Result<Self> {
        let numbers: Vec<CMat> = modes_per_factor.iter().map(|&m| local_number_operator(m)).collect();
        Self::from_number_operators(&numbers, kind)
    }

    fn validate(&self) -> Result<()> {
        for f in &self.factors {
            let d = f[0].1.nrows();
            let mut sum = CMat::zeros(d, d);
            for (i, (_, p)) in f.iter().enumerate() {
                sum += p;
                for (j, (_, q)) in f.iter().enumerate() {
                    let prod = p * q;
                    let target = if i == j { p.clone() } else { CMat::zeros(d, d) };
                    if crate::densmat::max_abs(&(prod - target)) > PROJECTOR_TOL {
                        return Err(Error::Argument("sector projectors are not orthogonal".into()));
                    }
                }
            }
            if crate::densmat::max_abs(&(sum - CMat::identity(d, d))) > PROJECTOR_TOL {
                return Err(Error::Argument("sector projectors are not complete".into()));
            }
        }
        Ok(())
    }
}

fn sectors_of(n: &CMat, kind: SsrKind) -> Result<Vec<(i64, CMat)>> {
    let e = crate::densmat::eigh(n);
    let d = n.nrows();
    let mut labels = Vec::with_capacity(d);
    for &x in &e.values {
        let q = x.round();
        if (x - q).abs() > ROUND_TOL {
            return Err(Error::Argument(format!("local charge has non-integer eigenvalue {x}")));
        }
        labels.push(match kind {
            SsrKind::Parity => (q as i64).rem_euclid(2),
            _ => q as i64,
        });
    }
    let mut qs = labels.clone();
    qs.sort_unstable();
    qs.dedup();
    if kind == SsrKind::None {
        return Ok(vec![(0, CMat::identity(d, d))]);
    }
    Ok(qs
        .into_iter()
        .map(|q| {
            let mut p = CMat::zeros(d, d);
            for (k, &l) in labels.iter().enumerate() {
                if l == q {
                    let v = e.vectors.column(k);
                    p += v * v.adjoint();
                }
            }
            // Diagonal number operators give exact 0/1 projectors; remove rounding dust.
            p.apply(|z| {
                if z.norm() < 1e-14 {
                    *z = C64::new(0.0, 0.0)
                }
            });
            (q, p)
        })
        .collect())
}

/// `ρ^Q = Σ (P_q ⊗ P_q' ⊗ ⋯) ρ (P_q ⊗ P_q' ⊗ ⋯)` over all sector combinations.
pub fn ssr_project(rho: &DensityMatrix, kind: SsrKind, modes_per_factor: &[usize]) -> Result<DensityMatrix> {
    if kind == SsrKind::None {
        return Ok(rho.clone());
    }
    let dims = rho.shape().dims();
    if modes_per_factor.len() != dims.len() || dims.iter().zip(modes_per_factor).any(|(&d, &m)| d != 1 << m) {
        return Err(Error::Shape(format!("factors {dims:?} do not carry {modes_per_factor:?} fermionic modes")));
    }
    let dec = SectorDecomposition::for_modes(modes_per_factor, kind)?;
    project_with(rho, &dec)
}

pub fn project_with(rho: &DensityMatrix, dec: &SectorDecomposition) -> Result<DensityMatrix> {
    let dims = rho.shape().dims();
    if dec.factors.len() != dims.len() || dec.factors.iter().zip(dims).any(|(f, &d)| f[0].1.nrows() != d) {
        return Err(Error::Shape("sector decomposition does not match the state".into()));
    }
    let mut projectors = vec![CMat::identity(1, 1)];
    for f in &dec.factors {
        projectors = projectors.iter().flat_map(|acc| f.iter().map(move |(_, p)| kron(acc, p))).collect();
    }
    let d = rho.dim();
    let mut out = CMat::zeros(d, d);
    for p in &projectors {
        out += p * rho.matrix() * p;
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho.shape().clone(), out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SsrMeasure {
    TotalCorrelation,
    Entanglement,
    ClassicalCorrelation,
}

/// How the closest separable state of the superselected state is found.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum SeparableBackend {
    /// Closed form for symmetric two-orbital states under the number or parity
    /// rule, the PPT program up to `2 ⊗ 3`, and alternating decompositions otherwise.
    #[default]
    Auto,
    ClosedForm,
    Ppt,
    Alternating(crate::sep_opt::AltOptions),
}

pub fn ssr_measure(rho: &DensityMatrix, kind: SsrKind, modes_per_factor: &[usize], measure: SsrMeasure) -> Result<f64> {
    ssr_measure_with(rho, kind, modes_per_factor, measure, SeparableBackend::Auto)
}

/// `measure(ρ^Q)` in nats, with `ρ^Q` the projection of `ρ` for the rule `kind`.
pub fn ssr_measure_with(
    rho: &DensityMatrix,
    kind: SsrKind,
    modes_per_factor: &[usize],
    measure: SsrMeasure,
    backend: SeparableBackend,
) -> Result<f64> {
    let projected = ssr_project(rho, kind, modes_per_factor)?;
    match measure {
        SsrMeasure::TotalCorrelation => crate::measures::mutual_information(&projected),
        SsrMeasure::Entanglement => Ok(closest_separable(&projected, kind, backend)?.0),
        SsrMeasure::ClassicalCorrelation => {
            let (_, sigma) = closest_separable(&projected, kind, backend)?;
            crate::measures::classical_correlation_geometric(&projected, &sigma)
        }
    }
}

fn is_pure(rho: &DensityMatrix) -> bool {
    let m = rho.matrix();
    ((m * m).trace().re - 1.0).abs() < 1e-12
}

/// `(E, σ*)` for an already superselected state.
fn closest_separable(rho: &DensityMatrix, kind: SsrKind, backend: SeparableBackend) -> Result<(f64, DensityMatrix)> {
    use crate::sep_opt::{closest_separable_alternating, e_ppt, AltOptions};
    let (da, db) = rho.shape().check_bipartite()?;
    let closed = || closed_form(rho, kind);
    let report = match backend {
        SeparableBackend::ClosedForm => return closed(),
        SeparableBackend::Auto => {
            if is_pure(rho) {
                return schmidt_dephased(rho);
            }
            if let Ok(out) = closed() {
                return Ok(out);
            }
            if da * db <= 6 {
                e_ppt(rho)?
            } else {
                closest_separable_alternating(rho, &AltOptions::default())?
            }
        }
        SeparableBackend::Ppt => e_ppt(rho)?,
        SeparableBackend::Alternating(opts) => closest_separable_alternating(rho, &opts)?,
    };
    Ok((report.value, report.sigma_star))
}

/// `(S(ρ_A), Σ_k s_k² |u_k v_k⟩⟨u_k v_k|)` from the Schmidt decomposition of a pure
/// state. The minimizer is not unique; this is the one that keeps the Schmidt basis.
fn schmidt_dephased(rho: &DensityMatrix) -> Result<(f64, DensityMatrix)> {
    let (da, db) = rho.shape().check_bipartite()?;
    let eig = rho.eig();
    let psi = eig.vectors.column(eig.values.len() - 1);
    let svd = CMat::from_fn(da, db, |a, b| psi[a * db + b]).svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut sigma = CMat::zeros(da * db, da * db);
    let mut weights = Vec::with_capacity(svd.singular_values.len());
    for (k, s) in svd.singular_values.iter().enumerate() {
        let w = s * s;
        weights.push(w);
        let prod = u.column(k).kronecker(&v_t.row(k).transpose());
        sigma += (&prod * prod.adjoint()).scale(w);
    }
    let sigma = DensityMatrix::from_matrix(rho.shape().clone(), sigma)?;
    Ok((crate::densmat::shannon_entropy(&weights), sigma))
}

fn closed_form(rho: &DensityMatrix, kind: SsrKind) -> Result<(f64, DensityMatrix)> {
    use crate::twoorb::{closest_separable_nssr, closest_separable_pssr, project_to_table_basis, TableBasis};
    let basis = match kind {
        SsrKind::Number => TableBasis::Number,
        SsrKind::Parity => TableBasis::Parity,
        SsrKind::None => return Err(Error::Argument("no closed form without a superselection rule".into())),
    };
    let state = project_to_table_basis(rho, basis)?;
    // The table weights must describe the state completely.
    let rebuilt = state.density()?;
    let off = crate::densmat::max_abs(&(rebuilt.matrix() - rho.matrix()));
    if off > 1e-8 {
        return Err(Error::Symmetry(off));
    }
    let sol = match kind {
        SsrKind::Number => closest_separable_nssr(&state)?,
        _ => closest_separable_pssr(&state)?,
    };
    Ok((sol.entanglement, sol.closest.density()?))
}
