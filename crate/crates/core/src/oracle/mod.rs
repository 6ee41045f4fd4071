//! Independent brute-force verifiers.
//!
//! Nothing here calls into the propagation engines: ascending influence is
//! recomputed by enumerating chains, TotalEPI by pushing effort forward one
//! timestep at a time, and optima by exhaustive search over a simplex grid.

pub mod random;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heap::{PathMember, StrategicPath};
use crate::model::{
    EffortAssignment, FactorId, FactorSystem, NormalizedInfluenceMatrix, SignificanceVector,
};
use crate::relation::EdgeMask;

/// Largest path the chain enumeration accepts.
pub const MAX_CHAIN_FACTORS: usize = 12;
/// Largest number of accessible factors the grid search accepts.
pub const MAX_GRID_FACTORS: usize = 4;
/// Coarsest grid step the search accepts.
pub const MAX_GRID_RESOLUTION: f64 = 0.05;
/// Finest grid step the search accepts.
pub const MIN_GRID_RESOLUTION: f64 = 0.005;

/// What the effort flows through.
#[derive(Clone, Copy, Debug)]
pub enum Structure<'a> {
    /// All accessible factors at timestep 0, one hop into the latent factors.
    Parallel {
        system: &'a FactorSystem,
        gate: Option<&'a EdgeMask>,
    },
    /// Blockwise timesteps along a strategic path.
    Hierarchical {
        path: &'a StrategicPath,
        within_block: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub timestep: usize,
    /// Effort arriving at each factor processed in this step (assigned plus
    /// propagated).
    pub arrivals: BTreeMap<FactorId, f64>,
    /// Goal accumulation after this step.
    pub goal_after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationTrace {
    pub steps: Vec<TraceStep>,
    pub goal: f64,
}

fn above(from: &PathMember, to: &PathMember, within_block: bool) -> bool {
    let (fb, tb) = (from.level.block, to.level.block);
    tb > fb || (within_block && tb == fb && to.level.sublevel > from.level.sublevel)
}

/// Sum over every ascending chain `from → k₁ → … → to` of the product of
/// direct influences. Intermediates must sit in blocks strictly increasing
/// and strictly between the end points; a same-block pair (only reachable
/// with `within_block`) has just the direct term. Returns 0 when `to` is not
/// above `from`.
pub fn chain_sum_dprime(
    from: &str,
    to: &str,
    path: &StrategicPath,
    ndim: &NormalizedInfluenceMatrix,
    within_block: bool,
) -> Result<f64> {
    let members = path.members();
    if members.len() > MAX_CHAIN_FACTORS {
        return Err(Error::OracleBound(format!(
            "chain enumeration limited to {MAX_CHAIN_FACTORS} path factors, got {}",
            members.len()
        )));
    }
    let src = path.member(from).ok_or_else(|| Error::UnknownFactor(from.to_owned()))?;
    let dst = path.member(to).ok_or_else(|| Error::UnknownFactor(to.to_owned()))?;
    if !above(src, dst, within_block) {
        return Ok(0.0);
    }
    let between: Vec<&PathMember> = members
        .iter()
        .filter(|m| m.level.block > src.level.block && m.level.block < dst.level.block)
        .collect();

    fn walk(
        at: &PathMember,
        product: f64,
        dst: &PathMember,
        between: &[&PathMember],
        ndim: &NormalizedInfluenceMatrix,
    ) -> f64 {
        let mut total = product * ndim.d(at.index, dst.index);
        for k in between.iter().filter(|k| k.level.block > at.level.block) {
            total += walk(k, product * ndim.d(at.index, k.index), dst, between, ndim);
        }
        total
    }
    Ok(walk(src, 1.0, dst, &between, ndim))
}

/// Pushes the assignment through the structure one timestep at a time. Effort
/// `a` arriving at factor `F` adds `a·nSig(F)` to the goal and is forwarded
/// to every eligible upper factor `j` as `a·w(F→j)`, where `w` is the direct
/// influence for the parallel structure and the chain-summed ascending
/// influence for a hierarchical path.
pub fn simulate_forward(
    structure: Structure<'_>,
    assignment: &EffortAssignment,
    ndim: &NormalizedInfluenceMatrix,
    nsig: &SignificanceVector,
) -> Result<SimulationTrace> {
    match structure {
        Structure::Parallel { system, gate } => simulate_parallel(system, gate, assignment, ndim, nsig),
        Structure::Hierarchical { path, within_block } => {
            simulate_path(path, within_block, assignment, ndim, nsig)
        }
    }
}

fn simulate_parallel(
    system: &FactorSystem,
    gate: Option<&EdgeMask>,
    assignment: &EffortAssignment,
    ndim: &NormalizedInfluenceMatrix,
    nsig: &SignificanceVector,
) -> Result<SimulationTrace> {
    let daf: Vec<(usize, &FactorId)> = system
        .factors()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_daf())
        .map(|(i, f)| (i, &f.id))
        .collect();
    let latent: Vec<(usize, &FactorId)> = system
        .factors()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_ndaf())
        .map(|(i, f)| (i, &f.id))
        .collect();
    for id in assignment.efforts.keys() {
        if !daf.iter().any(|(_, d)| *d == id) {
            return Err(Error::InvalidAssignment(format!("`{id}` is not directly accessible")));
        }
    }

    let mut goal = 0.0;
    let mut first = BTreeMap::new();
    let mut incoming = vec![0.0; latent.len()];
    for &(i, id) in &daf {
        let a = assignment.effort(id.as_str());
        first.insert(id.clone(), a);
        goal += a * nsig.get(id.as_str());
        for (slot, &(j, _)) in latent.iter().enumerate() {
            if gate.is_none_or(|g| g.is_significant(i, j)) {
                incoming[slot] += a * ndim.d(i, j);
            }
        }
    }
    let mut steps = vec![TraceStep {
        timestep: 0,
        arrivals: first,
        goal_after: goal,
    }];
    let mut second = BTreeMap::new();
    for (slot, &(_, id)) in latent.iter().enumerate() {
        goal += incoming[slot] * nsig.get(id.as_str());
        second.insert(id.clone(), incoming[slot]);
    }
    steps.push(TraceStep {
        timestep: 1,
        arrivals: second,
        goal_after: goal,
    });
    Ok(SimulationTrace { steps, goal })
}

fn simulate_path(
    path: &StrategicPath,
    within_block: bool,
    assignment: &EffortAssignment,
    ndim: &NormalizedInfluenceMatrix,
    nsig: &SignificanceVector,
) -> Result<SimulationTrace> {
    let members = path.members();
    for id in assignment.efforts.keys() {
        match path.member(id.as_str()) {
            Some(m) if m.accessible => {}
            _ => {
                return Err(Error::InvalidAssignment(format!(
                    "`{id}` is not an accessible path factor"
                )))
            }
        }
    }
    let timestep_of = |m: &PathMember| {
        if within_block {
            (m.level.block, m.level.sublevel)
        } else {
            (m.level.block, 0)
        }
    };
    let mut timesteps: Vec<(u32, u32)> = members.iter().map(timestep_of).collect();
    timesteps.sort_unstable();
    timesteps.dedup();

    let mut incoming: BTreeMap<&str, f64> = BTreeMap::new();
    let mut goal = 0.0;
    let mut steps = Vec::with_capacity(timesteps.len());
    for (t, key) in timesteps.iter().enumerate() {
        let mut arrivals = BTreeMap::new();
        for m in members.iter().filter(|m| timestep_of(m) == *key) {
            let a = assignment.effort(m.id.as_str()) + incoming.get(m.id.as_str()).copied().unwrap_or(0.0);
            arrivals.insert(m.id.clone(), a);
            goal += a * nsig.get(m.id.as_str());
            for up in members.iter().filter(|u| above(m, u, within_block)) {
                let w = chain_sum_dprime(m.id.as_str(), up.id.as_str(), path, ndim, within_block)?;
                *incoming.entry(up.id.as_str()).or_insert(0.0) += a * w;
            }
        }
        steps.push(TraceStep {
            timestep: t,
            arrivals,
            goal_after: goal,
        });
    }
    Ok(SimulationTrace { steps, goal })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridOptimum {
    pub assignment: EffortAssignment,
    pub total_epi: f64,
    pub points: usize,
}

/// Exhaustive search over effort vectors on the simplex grid with step
/// `resolution`, each point scored by [`simulate_forward`]. Ties keep the
/// first point in enumeration order.
pub fn grid_search_epi(
    structure: Structure<'_>,
    ndim: &NormalizedInfluenceMatrix,
    nsig: &SignificanceVector,
    resolution: f64,
) -> Result<GridOptimum> {
    let daf: Vec<FactorId> = match structure {
        Structure::Parallel { system, .. } => system.eligible().filter(|f| f.accessible).map(|f| f.id.clone()).collect(),
        Structure::Hierarchical { path, .. } => path.accessible().map(|m| m.id.clone()).collect(),
    };
    if daf.is_empty() {
        return Err(Error::NoActionableFactors);
    }
    if daf.len() > MAX_GRID_FACTORS {
        return Err(Error::OracleBound(format!(
            "grid search limited to {MAX_GRID_FACTORS} accessible factors, got {}",
            daf.len()
        )));
    }
    if !(MIN_GRID_RESOLUTION..=MAX_GRID_RESOLUTION).contains(&resolution) {
        return Err(Error::OracleBound(format!(
            "grid resolution must lie in [{MIN_GRID_RESOLUTION}, {MAX_GRID_RESOLUTION}], got {resolution}"
        )));
    }
    let steps = (1.0 / resolution).round() as usize;
    if ((steps as f64) * resolution - 1.0).abs() > 1e-9 {
        return Err(Error::OracleBound(format!("1/{resolution} is not an integer")));
    }

    let mut best: Option<GridOptimum> = None;
    let mut points = 0;
    let mut parts = vec![0usize; daf.len()];
    compositions(steps, &mut parts, 0, &mut |parts| -> Result<()> {
        points += 1;
        let efforts = daf
            .iter()
            .zip(parts.iter())
            .map(|(id, &p)| (id.clone(), p as f64 / steps as f64))
            .collect();
        let assignment = EffortAssignment::unchecked(efforts, 1.0);
        let epi = simulate_forward(structure, &assignment, ndim, nsig)?.goal;
        if best.as_ref().is_none_or(|b| epi > b.total_epi) {
            best = Some(GridOptimum {
                assignment,
                total_epi: epi,
                points: 0,
            });
        }
        Ok(())
    })?;
    let mut best = best.expect("grid has at least one point");
    best.points = points;
    Ok(best)
}

fn compositions(
    remaining: usize,
    parts: &mut [usize],
    at: usize,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if at + 1 == parts.len() {
        parts[at] = remaining;
        return visit(parts);
    }
    for v in 0..=remaining {
        parts[at] = v;
        compositions(remaining - v, parts, at + 1, visit)?;
    }
    Ok(())
}
