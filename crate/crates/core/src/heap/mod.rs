//! Hierarchical effort assignment and propagation.
//!
//! Effort is assigned along a *strategic path*: one nonempty factor subset
//! from each sublevel of the hierarchy. Blocks are worked on in successive
//! timesteps, so effort put into a factor reaches the goal directly through
//! its significance and indirectly through every factor above it:
//!
//! ```text
//! UEPF(F)  = nSig(F) + Σ_{j ∈ Upper(F)} d′(F→j) · UEPF(j)
//! TotalEPI = Σ_blocks Σ_{F ∈ block} Eff(F) · UEPF(F)
//! ```
//!
//! where `d′` is the ascending influence through all intermediate blocks.
//! How effort is split across blocks and within a block is set by a
//! [`HeapHeuristic`].

mod assign;
mod path;
mod propagation;

pub use assign::{
    block_effort_propagation, block_shares, effective_blocks, heap_assignment, heap_total_epi,
    latent_arrivals, BlockHeuristic, HeapHeuristic, UnitHeuristic,
};
pub use path::{enumerate_paths, PathBlock, PathMember, StrategicPath, MAX_PATHS};
pub use propagation::{ascending_influence, uepf, AscendingInfluence, PropagationOptions, Uepf};

use crate::error::Result;
use crate::model::{NormalizedInfluenceMatrix, SignificanceVector, StrategyResult, StrategyTag};

/// Runs one hierarchical strategy on one path end to end.
pub fn evaluate_heap(
    path: &StrategicPath,
    heuristic: HeapHeuristic,
    nsig: &SignificanceVector,
    ndim: &NormalizedInfluenceMatrix,
    opts: PropagationOptions,
    total_effort: f64,
) -> Result<StrategyResult> {
    let dprime = ascending_influence(path, ndim, opts);
    let factors = uepf(path, &dprime, nsig);
    let assignment = heap_assignment(path, heuristic, nsig, Some(&factors), total_effort)?;
    let total_epi = heap_total_epi(path, &assignment, &factors);
    let latent_inflows = latent_arrivals(path, &dprime, &assignment);
    Ok(StrategyResult {
        strategy: StrategyTag::Heap {
            heuristic,
            path: path.ordinal,
        },
        assignment,
        latent_inflows,
        uepf: Some(factors.values),
        total_epi,
    })
}
