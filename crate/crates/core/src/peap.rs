//! Parallel effort assignment and propagation.
//!
//! Every accessible factor is worked on in the same timestep, so no effort
//! moves between accessible factors. Effort reaches the goal directly through
//! each factor's significance, and indirectly through one hop into the latent
//! factors:
//!
//! ```text
//! TotalEPI = Σ_{i∈DAF} Eff_i·nSig_i + Σ_{j∈NDAF} (Σ_{i∈DAF} Eff_i·d(i→j))·nSig_j
//! ```
//!
//! Latent factors do not pass effort on to other latent factors.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{
    classify_factors, EffortAssignment, FactorId, FactorSystem, NormalizedInfluenceMatrix,
    PeapVariant, SignificanceVector, StrategyResult, StrategyTag,
};
use crate::relation::EdgeMask;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeapConfig {
    /// Only propagate along significant DAF→NDAF edges.
    pub gating: bool,
    pub total_effort: f64,
}

impl Default for PeapConfig {
    fn default() -> Self {
        Self {
            gating: false,
            total_effort: 1.0,
        }
    }
}

/// `total / m` on each of the `m` accessible factors.
pub fn uniform_assignment(daf: &[FactorId], total: f64) -> Result<EffortAssignment> {
    if daf.is_empty() {
        return Err(Error::NoActionableFactors);
    }
    let each = total / daf.len() as f64;
    Ok(EffortAssignment::unchecked(
        daf.iter().map(|id| (id.clone(), each)).collect(),
        total,
    ))
}

/// Effort proportional to normalized significance:
/// `Eff_i = total · nSig_i / Σ_{DAF} nSig_j`.
pub fn weighted_assignment(
    daf: &[FactorId],
    nsig: &SignificanceVector,
    total: f64,
) -> Result<EffortAssignment> {
    if daf.is_empty() {
        return Err(Error::NoActionableFactors);
    }
    let denom: f64 = daf.iter().map(|id| nsig.get(id.as_str())).sum();
    if !(denom > 0.0) {
        return Err(Error::ZeroSignificance);
    }
    Ok(EffortAssignment::unchecked(
        daf.iter()
            .map(|id| (id.clone(), total * nsig.get(id.as_str()) / denom))
            .collect(),
        total,
    ))
}

/// Effort arriving at each latent factor: `Σ_i Eff_i · d(i→j)`, restricted to
/// significant edges when `gate` is given.
pub fn propagate_to_latent(
    system: &FactorSystem,
    assignment: &EffortAssignment,
    ndim: &NormalizedInfluenceMatrix,
    ndaf: &[FactorId],
    gate: Option<&EdgeMask>,
) -> Result<BTreeMap<FactorId, f64>> {
    let sources = assignment
        .efforts
        .iter()
        .map(|(id, eff)| Ok((system.require_index(id.as_str())?, *eff)))
        .collect::<Result<Vec<_>>>()?;
    let mut inflows = BTreeMap::new();
    for latent in ndaf {
        let j = system.require_index(latent.as_str())?;
        let inflow: f64 = sources
            .iter()
            .filter(|(i, _)| gate.is_none_or(|g| g.is_significant(*i, j)))
            .map(|&(i, eff)| eff * ndim.d(i, j))
            .sum();
        inflows.insert(latent.clone(), inflow);
    }
    Ok(inflows)
}

/// Direct contributions of the assigned factors plus the latent inflows,
/// each weighted by significance.
pub fn peap_total_epi(
    assignment: &EffortAssignment,
    latent_inflows: &BTreeMap<FactorId, f64>,
    nsig: &SignificanceVector,
) -> f64 {
    let direct: f64 = assignment
        .efforts
        .iter()
        .map(|(id, eff)| eff * nsig.get(id.as_str()))
        .sum();
    let indirect: f64 = latent_inflows
        .iter()
        .map(|(id, inflow)| inflow * nsig.get(id.as_str()))
        .sum();
    direct + indirect
}

/// Matrix form `E_DAFᵀ · (nSig_DAF + P · nSig_NDAF)` with `P_ij = d(i→j)`
/// (zeroed on insignificant edges when `gate` is given).
pub fn peap_total_epi_matrix(
    system: &FactorSystem,
    assignment: &EffortAssignment,
    ndim: &NormalizedInfluenceMatrix,
    nsig: &SignificanceVector,
    gate: Option<&EdgeMask>,
) -> Result<f64> {
    let (daf, ndaf) = classify_factors(system)?;
    let daf_idx = daf
        .iter()
        .map(|id| system.require_index(id.as_str()))
        .collect::<Result<Vec<_>>>()?;
    let ndaf_idx = ndaf
        .iter()
        .map(|id| system.require_index(id.as_str()))
        .collect::<Result<Vec<_>>>()?;
    let e = DVector::from_iterator(daf.len(), daf.iter().map(|id| assignment.effort(id.as_str())));
    let s_daf = DVector::from_iterator(daf.len(), daf.iter().map(|id| nsig.get(id.as_str())));
    let s_ndaf = DVector::from_iterator(ndaf.len(), ndaf.iter().map(|id| nsig.get(id.as_str())));
    let p = DMatrix::from_fn(daf.len(), ndaf.len(), |r, c| {
        let (i, j) = (daf_idx[r], ndaf_idx[c]);
        if gate.is_none_or(|g| g.is_significant(i, j)) {
            ndim.d(i, j)
        } else {
            0.0
        }
    });
    Ok(e.dot(&(s_daf + p * s_ndaf)))
}

/// Runs one parallel sub-strategy end to end.
pub fn evaluate_peap(
    system: &FactorSystem,
    nsig: &SignificanceVector,
    ndim: &NormalizedInfluenceMatrix,
    variant: PeapVariant,
    config: PeapConfig,
    significant: Option<&EdgeMask>,
) -> Result<StrategyResult> {
    let gate = if config.gating {
        Some(significant.ok_or(Error::GatingWithoutEdges)?)
    } else {
        None
    };
    let (daf, ndaf) = classify_factors(system)?;
    let assignment = match variant {
        PeapVariant::Uniform => uniform_assignment(&daf, config.total_effort)?,
        PeapVariant::Weighted => weighted_assignment(&daf, nsig, config.total_effort)?,
    };
    let latent_inflows = propagate_to_latent(system, &assignment, ndim, &ndaf, gate)?;
    let total_epi = peap_total_epi(&assignment, &latent_inflows, nsig);
    Ok(StrategyResult {
        strategy: StrategyTag::Peap { variant },
        assignment,
        latent_inflows,
        uepf: None,
        total_epi,
    })
}
