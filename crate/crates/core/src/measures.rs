//! Correlation measures built on the relative entropy.
//!
//! All values are in nats; convert with [`LogBase::from_nats`].

use serde::{Deserialize, Serialize};

use crate::densmat::{
    partial_trace, partial_transpose, relative_entropy, trace_norm, von_neumann_entropy, DensityMatrix,
    HermitianOperator, LogBase,
};
use crate::error::{Error, Result};
use crate::ssr::SsrKind;

/// Minimum partial-transpose eigenvalue accepted as non-negative.
pub const PPT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub total: f64,
    pub entanglement: f64,
    pub classical: f64,
    pub ssr: SsrKind,
    pub log_base: LogBase,
}

impl CorrelationReport {
    /// Builds a report from values in nats, converting to `log_base`.
    pub fn from_nats(total: f64, entanglement: f64, classical: f64, ssr: SsrKind, log_base: LogBase) -> Self {
        CorrelationReport {
            total: log_base.from_nats(total),
            entanglement: log_base.from_nats(entanglement),
            classical: log_base.from_nats(classical),
            ssr,
            log_base,
        }
    }
}

pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    rho.shape().check_bipartite()?;
    let sa = von_neumann_entropy(&partial_trace(rho, &[0])?, LogBase::E);
    let sb = von_neumann_entropy(&partial_trace(rho, &[1])?, LogBase::E);
    let s = von_neumann_entropy(rho, LogBase::E);
    Ok((sa + sb - s).max(0.0))
}

/// `ρ_A ⊗ ρ_B`.
pub fn closest_uncorrelated(rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.shape().check_bipartite()?;
    Ok(partial_trace(rho, &[0])?.kron(&partial_trace(rho, &[1])?))
}

/// `S(σ* ‖ ρ_A ⊗ ρ_B)` for the closest separable state `σ*` of `ρ`.
pub fn classical_correlation_geometric(rho: &DensityMatrix, sigma_star: &DensityMatrix) -> Result<f64> {
    relative_entropy(sigma_star, &closest_uncorrelated(rho)?)
}

pub fn log_negativity(rho: &DensityMatrix) -> Result<f64> {
    rho.shape().check_bipartite()?;
    Ok(trace_norm(&partial_transpose(rho.op(), 1)?).ln().max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptTest {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

pub fn is_ppt(rho: &DensityMatrix) -> Result<PptTest> {
    rho.shape().check_bipartite()?;
    let min = partial_transpose(rho.op(), 1)?.eigenvalues()[0];
    Ok(PptTest { ppt: min >= -PPT_TOL, min_eigenvalue: min })
}

/// `S(ρ ‖ ρ_1 ⊗ ⋯ ⊗ ρ_ν)` where each group is a contiguous run of factors, in order.
pub fn multipartite_mutual_information(rho: &DensityMatrix, groups: &[Vec<usize>]) -> Result<f64> {
    if groups.len() < 2 {
        return Err(Error::Argument("need at least two parts".into()));
    }
    let flat: Vec<usize> = groups.iter().flatten().copied().collect();
    if flat != (0..rho.shape().factors()).collect::<Vec<_>>() || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Index(format!("{groups:?} is not an ordered partition of the factors")));
    }
    let mut reduced = Vec::with_capacity(groups.len());
    for g in groups {
        reduced.push(partial_trace(rho, g)?);
    }
    let refs: Vec<&DensityMatrix> = reduced.iter().collect();
    let product = DensityMatrix::product(&refs)?.with_shape(rho.shape().clone())?;
    relative_entropy(rho, &product)
}

/// Every factor as its own part.
pub fn total_correlation(rho: &DensityMatrix) -> Result<f64> {
    let groups: Vec<Vec<usize>> = (0..rho.shape().factors()).map(|f| vec![f]).collect();
    multipartite_mutual_information(rho, &groups)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingBound {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Thermal bound `I(1:⋯:ν) ≤ (2/T) Σ ‖H_ij‖_F` for a Gibbs state of a Hamiltonian
/// whose inter-factor couplings are `couplings`.
pub fn coupling_bound(
    rho_thermal: &DensityMatrix,
    couplings: &[HermitianOperator],
    temperature: f64,
) -> Result<CouplingBound> {
    if !(temperature > 0.0) {
        return Err(Error::Argument(format!("temperature must be positive, got {temperature}")));
    }
    let lhs = total_correlation(rho_thermal)?;
    let rhs = 2.0 / temperature * couplings.iter().map(|h| h.frobenius_norm()).sum::<f64>();
    Ok(CouplingBound { lhs, rhs, satisfied: lhs <= rhs + 1e-9 })
}
