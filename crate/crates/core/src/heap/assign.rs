//! Block and unit heuristics for distributing effort along a strategic path,
//! and the resulting block effort propagation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::path::{PathMember, StrategicPath};
use super::propagation::Uepf;
use crate::error::{Error, Result};
use crate::model::{EffortAssignment, FactorId, SignificanceVector};

/// How total effort is split across effective blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BlockHeuristic {
    /// Equal share per effective block.
    #[serde(rename = "Uni")]
    Uni,
    /// Block significance ratio: the block's share of path DAF significance.
    #[serde(rename = "BSR")]
    Bsr,
    /// Block effort propagation ratio: proportional to the block's mean DAF UEPF.
    #[serde(rename = "BEPR")]
    Bepr,
}

/// How a block's effort is split across its accessible path factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UnitHeuristic {
    #[serde(rename = "Uni")]
    Uni,
    #[serde(rename = "nSig")]
    NSig,
    #[serde(rename = "UEPF")]
    Uepf,
}

impl BlockHeuristic {
    pub const ALL: [BlockHeuristic; 3] = [BlockHeuristic::Uni, BlockHeuristic::Bsr, BlockHeuristic::Bepr];

    pub fn label(self) -> &'static str {
        match self {
            BlockHeuristic::Uni => "Uni",
            BlockHeuristic::Bsr => "BSR",
            BlockHeuristic::Bepr => "BEPR",
        }
    }
}

impl UnitHeuristic {
    pub const ALL: [UnitHeuristic; 3] = [UnitHeuristic::Uni, UnitHeuristic::NSig, UnitHeuristic::Uepf];

    pub fn label(self) -> &'static str {
        match self {
            UnitHeuristic::Uni => "Uni",
            UnitHeuristic::NSig => "nSig",
            UnitHeuristic::Uepf => "UEPF",
        }
    }
}

impl FromStr for BlockHeuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "uni" | "uniform" => Ok(BlockHeuristic::Uni),
            "bsr" => Ok(BlockHeuristic::Bsr),
            "bepr" => Ok(BlockHeuristic::Bepr),
            _ => Err(format!("unknown block heuristic `{s}` (uni, bsr, bepr)")),
        }
    }
}

impl FromStr for UnitHeuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "uni" | "uniform" => Ok(UnitHeuristic::Uni),
            "nsig" => Ok(UnitHeuristic::NSig),
            "uepf" => Ok(UnitHeuristic::Uepf),
            _ => Err(format!("unknown unit heuristic `{s}` (uni, nsig, uepf)")),
        }
    }
}

/// A (block, unit) heuristic pair, written `(BSR, nSig)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HeapHeuristic {
    pub block: BlockHeuristic,
    pub unit: UnitHeuristic,
}

impl HeapHeuristic {
    pub const fn new(block: BlockHeuristic, unit: UnitHeuristic) -> Self {
        Self { block, unit }
    }

    /// The full 3×3 grid in report order.
    pub fn grid() -> Vec<HeapHeuristic> {
        BlockHeuristic::ALL
            .iter()
            .flat_map(|&b| UnitHeuristic::ALL.iter().map(move |&u| HeapHeuristic::new(b, u)))
            .collect()
    }

    pub fn needs_uepf(self) -> bool {
        self.block == BlockHeuristic::Bepr || self.unit == UnitHeuristic::Uepf
    }

    pub fn family_name(self) -> &'static str {
        match (self.block == BlockHeuristic::Uni, self.unit == UnitHeuristic::Uni) {
            (true, true) => "Uniform block Uniform unit - HEAP",
            (true, false) => "Uniform block Weighted unit - HEAP",
            (false, true) => "Weighted block Uniform unit - HEAP",
            (false, false) => "Weighted block Weighted unit - HEAP",
        }
    }
}

impl fmt::Display for HeapHeuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&format!("({}, {})", self.block.label(), self.unit.label()))
    }
}

/// Blocks of the path that hold at least one accessible factor.
pub fn effective_blocks(path: &StrategicPath) -> Result<Vec<u32>> {
    if path.effective_blocks.is_empty() {
        return Err(Error::NoEffectiveBlocks);
    }
    Ok(path.effective_blocks.clone())
}

/// Share of total effort per effective block; shares sum to one.
pub fn block_shares(
    path: &StrategicPath,
    heuristic: BlockHeuristic,
    nsig: &SignificanceVector,
    uepf: Option<&Uepf>,
) -> Result<BTreeMap<u32, f64>> {
    let blocks = effective_blocks(path)?;
    let weights: Vec<f64> = match heuristic {
        BlockHeuristic::Uni => vec![1.0; blocks.len()],
        BlockHeuristic::Bsr => blocks
            .iter()
            .map(|&b| path.accessible_in_block(b).map(|m| nsig.get(m.id.as_str())).sum())
            .collect(),
        BlockHeuristic::Bepr => {
            let u = uepf.ok_or(Error::MissingUepf("BEPR"))?;
            blocks
                .iter()
                .map(|&b| {
                    let vals: Vec<f64> = path.accessible_in_block(b).map(|m| u.get(m.id.as_str())).collect();
                    vals.iter().sum::<f64>() / vals.len() as f64
                })
                .collect()
        }
    };
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroSignificance);
    }
    Ok(blocks.into_iter().zip(weights).map(|(b, w)| (b, w / total)).collect())
}

fn unit_shares(
    members: &[&PathMember],
    heuristic: UnitHeuristic,
    nsig: &SignificanceVector,
    uepf: Option<&Uepf>,
) -> Result<Vec<f64>> {
    let weights: Vec<f64> = match heuristic {
        UnitHeuristic::Uni => vec![1.0; members.len()],
        UnitHeuristic::NSig => members.iter().map(|m| nsig.get(m.id.as_str())).collect(),
        UnitHeuristic::Uepf => {
            let u = uepf.ok_or(Error::MissingUepf("UEPF"))?;
            members.iter().map(|m| u.get(m.id.as_str())).collect()
        }
    };
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroSignificance);
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// `Eff(F) = total · block_share(block(F)) · unit_share(F)` for every
/// accessible path factor; latent factors never receive effort.
pub fn heap_assignment(
    path: &StrategicPath,
    heuristic: HeapHeuristic,
    nsig: &SignificanceVector,
    uepf: Option<&Uepf>,
    total: f64,
) -> Result<EffortAssignment> {
    let shares = block_shares(path, heuristic.block, nsig, uepf)?;
    let mut efforts = BTreeMap::new();
    for (&block, &share) in &shares {
        let members: Vec<&PathMember> = path.accessible_in_block(block).collect();
        let units = unit_shares(&members, heuristic.unit, nsig, uepf)?;
        for (m, u) in members.iter().zip(units) {
            efforts.insert(m.id.clone(), total * share * u);
        }
    }
    Ok(EffortAssignment::unchecked(efforts, total))
}

/// `BEP_b = Σ_{F∈b} Eff(F)·UEPF(F)` per effective block.
pub fn block_effort_propagation(
    path: &StrategicPath,
    assignment: &EffortAssignment,
    uepf: &Uepf,
) -> BTreeMap<u32, f64> {
    path.effective_blocks
        .iter()
        .map(|&b| {
            let bep = path
                .accessible_in_block(b)
                .map(|m| assignment.effort(m.id.as_str()) * uepf.get(m.id.as_str()))
                .sum();
            (b, bep)
        })
        .collect()
}

/// Sum of block effort propagation over the effective blocks.
pub fn heap_total_epi(path: &StrategicPath, assignment: &EffortAssignment, uepf: &Uepf) -> f64 {
    block_effort_propagation(path, assignment, uepf).values().sum()
}

/// Effort arriving at each latent path factor when the assignment is pushed
/// upward through `d′`.
pub fn latent_arrivals(
    path: &StrategicPath,
    dprime: &super::AscendingInfluence,
    assignment: &EffortAssignment,
) -> BTreeMap<FactorId, f64> {
    let members = path.members();
    let mut arriving = vec![0.0; members.len()];
    for i in 0..members.len() {
        let outgoing = assignment.effort(members[i].id.as_str()) + arriving[i];
        for (j, d) in dprime.upper(i) {
            arriving[j] += outgoing * d;
        }
    }
    members
        .iter()
        .zip(arriving)
        .filter(|(m, _)| !m.accessible)
        .map(|(m, a)| (m.id.clone(), a))
        .collect()
}
