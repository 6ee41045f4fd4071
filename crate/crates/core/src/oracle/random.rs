//! Seeded random decision systems for property checks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::heap::StrategicPath;
use crate::matrix::SquareMatrix;
use crate::model::{Factor, FactorId, FactorSystem, Level, NormalizedInfluenceMatrix, SignificanceVector};
use crate::relation::{ClosureScale, EdgeMask, ThresholdRule, TotalRelationMatrix};

/// A random system for the parallel strategy.
#[derive(Clone, Debug)]
pub struct RandomSystem {
    pub system: FactorSystem,
    pub nsig: SignificanceVector,
    pub ndim: NormalizedInfluenceMatrix,
    /// Significant edges from the closure of `0.9 · N`.
    pub edges: EdgeMask,
}

/// A random hierarchy with one random strategic path through it.
#[derive(Clone, Debug)]
pub struct RandomHeapSystem {
    pub system: FactorSystem,
    pub nsig: SignificanceVector,
    pub ndim: NormalizedInfluenceMatrix,
    pub path: StrategicPath,
}

/// Row-normalized nonnegative matrix with roughly a quarter of the entries zero.
pub fn random_ndim<R: Rng + ?Sized>(rng: &mut R, n: usize) -> NormalizedInfluenceMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(0.75) {
                m[(i, j)] = rng.random_range(0.0..6.0);
            }
        }
        let s = m.row_sum(i);
        if s > 0.0 {
            for j in 0..n {
                m[(i, j)] /= s;
            }
        }
    }
    NormalizedInfluenceMatrix::from_precomputed(m, false)
}

pub fn random_nsig<R: Rng + ?Sized>(rng: &mut R, ids: &[FactorId]) -> SignificanceVector {
    let raw: Vec<f64> = ids.iter().map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    SignificanceVector::new(ids.iter().cloned().zip(raw.into_iter().map(|v| v / total)).collect())
}

/// 2..=`max_factors` factors over up to three blocks, at least one accessible.
pub fn random_peap_system<R: Rng + ?Sized>(rng: &mut R, max_factors: usize) -> RandomSystem {
    let n = rng.random_range(2..=max_factors.max(2));
    let blocks = rng.random_range(1..=3.min(n) as u32);
    let mut factors: Vec<Factor> = (0..n)
        .map(|i| {
            let block = if (i as u32) < blocks { i as u32 + 1 } else { rng.random_range(1..=blocks) };
            Factor::new(&format!("f{i}"), &format!("factor {i}"), rng.random_bool(0.7), Level::new(block, 1))
        })
        .collect();
    let forced = rng.random_range(0..n);
    factors[forced].accessible = true;
    let system = FactorSystem::new(factors, "goal").expect("generated ids are unique");
    let ids: Vec<FactorId> = system.factors().iter().map(|f| f.id.clone()).collect();
    let nsig = random_nsig(rng, &ids);
    let ndim = random_ndim(rng, n);
    let edges = TotalRelationMatrix::compute(&ndim.matrix().scaled(0.9), ClosureScale::None, ThresholdRule::MeanHalfStd)
        .expect("0.9 · row-substochastic closure converges")
        .significant;
    RandomSystem {
        system,
        nsig,
        ndim,
        edges,
    }
}

/// Random hierarchy of 2..=`max_factors` factors and a random path through it.
pub fn random_heap_system<R: Rng + ?Sized>(rng: &mut R, max_factors: usize) -> RandomHeapSystem {
    let n = rng.random_range(2..=max_factors.max(2));
    random_heap_system_with(rng, n, None)
}

/// Random hierarchy of exactly `n` factors. With `daf = Some(k)` the chosen
/// path holds exactly `k` accessible factors (and the system no others).
pub fn random_heap_system_with<R: Rng + ?Sized>(rng: &mut R, n: usize, daf: Option<usize>) -> RandomHeapSystem {
    assert!(n >= 1);
    let blocks = rng.random_range(1..=n.min(4)) as u32;
    let mut levels: Vec<Level> = (0..n)
        .map(|i| {
            let block = if (i as u32) < blocks { i as u32 + 1 } else { rng.random_range(1..=blocks) };
            Level::new(block, rng.random_range(1..=2))
        })
        .collect();
    levels.shuffle(rng);

    let accessible: Vec<bool> = match daf {
        Some(k) => {
            assert!(k >= 1 && k <= n);
            let mut flags = vec![false; n];
            flags[..k].iter_mut().for_each(|f| *f = true);
            flags.shuffle(rng);
            flags
        }
        None => {
            let mut flags: Vec<bool> = (0..n).map(|_| rng.random_bool(0.65)).collect();
            if !flags.iter().any(|f| *f) {
                let k = rng.random_range(0..n);
                flags[k] = true;
            }
            flags
        }
    };

    let factors: Vec<Factor> = (0..n)
        .map(|i| Factor::new(&format!("f{i}"), &format!("factor {i}"), accessible[i], levels[i]))
        .collect();
    let system = FactorSystem::new(factors, "goal").expect("generated ids are unique");
    let ids: Vec<FactorId> = system.factors().iter().map(|f| f.id.clone()).collect();
    let nsig = random_nsig(rng, &ids);
    let ndim = random_ndim(rng, n);

    let mut by_level: BTreeMap<Level, Vec<(FactorId, bool)>> = BTreeMap::new();
    for f in system.factors() {
        by_level.entry(f.level).or_default().push((f.id.clone(), f.accessible));
    }
    let mut selection = BTreeMap::new();
    for (level, fs) in by_level {
        // Keep every accessible factor when the caller pinned the count so the
        // path holds all of them; otherwise draw a random nonempty subset.
        let chosen: Vec<FactorId> = if daf.is_some() {
            let acc: Vec<FactorId> = fs.iter().filter(|(_, a)| *a).map(|(id, _)| id.clone()).collect();
            if acc.is_empty() {
                vec![fs[0].0.clone()]
            } else {
                acc
            }
        } else {
            loop {
                let pick: Vec<FactorId> = fs.iter().filter(|_| rng.random_bool(0.6)).map(|(id, _)| id.clone()).collect();
                if !pick.is_empty() {
                    break pick;
                }
            }
        };
        selection.insert(level, chosen);
    }
    let mut path = StrategicPath::from_selection(&system, 1, selection).expect("selection drawn from the system");
    if path.effective_blocks.is_empty() {
        // add one accessible factor so the path can receive effort
        let f = system.factors().iter().find(|f| f.accessible).expect("one factor is accessible");
        let mut sel = path.selection.clone();
        sel.entry(f.level).or_default().push(f.id.clone());
        path = StrategicPath::from_selection(&system, 1, sel).expect("selection drawn from the system");
    }
    RandomHeapSystem {
        system,
        nsig,
        ndim,
        path,
    }
}
