//! Ascending influence `d′` and the unit effort propagation factors.

use std::collections::BTreeMap;

use super::path::{PathMember, StrategicPath};
use crate::error::{Error, Result};
use crate::model::{FactorId, NormalizedInfluenceMatrix, SignificanceVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Let effort move to later sublevels of the same block. Off by default:
    /// a block is worked on in a single timestep.
    pub within_block: bool,
}

impl PropagationOptions {
    /// Whether `to` is in the upper level of `from`.
    pub fn is_upper(self, from: &PathMember, to: &PathMember) -> bool {
        to.level.block > from.level.block
            || (self.within_block
                && to.level.block == from.level.block
                && to.level.sublevel > from.level.sublevel)
    }
}

/// Path-specific total ascending influence `d′(i→j)` for every pair where
/// `j` lies in the upper level of `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AscendingInfluence {
    ids: Vec<FactorId>,
    /// `values[i][j]`, indexed by path position; `None` when `j` is not upper of `i`.
    values: Vec<Vec<Option<f64>>>,
}

impl AscendingInfluence {
    /// Externally known `d′` values on `path`; every other pair is treated
    /// as not upper.
    pub fn from_pairs<'a>(
        path: &StrategicPath,
        pairs: impl IntoIterator<Item = (&'a str, &'a str, f64)>,
    ) -> Result<Self> {
        let ids: Vec<FactorId> = path.members().iter().map(|m| m.id.clone()).collect();
        let mut values = vec![vec![None; ids.len()]; ids.len()];
        for (from, to, v) in pairs {
            let i = path.position(from).ok_or_else(|| Error::UnknownFactor(from.to_owned()))?;
            let j = path.position(to).ok_or_else(|| Error::UnknownFactor(to.to_owned()))?;
            values[i][j] = Some(v);
        }
        Ok(Self { ids, values })
    }

    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        let i = self.ids.iter().position(|x| x.as_str() == from)?;
        let j = self.ids.iter().position(|x| x.as_str() == to)?;
        self.values[i][j]
    }

    pub fn at(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    /// Upper-level neighbours of the factor at path position `i`.
    pub fn upper(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values[i]
            .iter()
            .enumerate()
            .filter_map(|(j, v)| v.map(|v| (j, v)))
    }

    pub fn pairs(&self) -> BTreeMap<(FactorId, FactorId), f64> {
        let mut out = BTreeMap::new();
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    out.insert((self.ids[i].clone(), self.ids[j].clone()), *v);
                }
            }
        }
        out
    }
}

/// `d′(i→j) = d(i→j)` when no path block lies strictly between the blocks of
/// `i` and `j`; otherwise
/// `d′(i→j) = d(i→j) + Σ_k d(i→k)·d′(k→j)` over path factors `k` whose block
/// is strictly between.
///
/// Filled from the top of the path down so every `d′(k→j)` is available
/// when needed.
pub fn ascending_influence(
    path: &StrategicPath,
    ndim: &NormalizedInfluenceMatrix,
    opts: PropagationOptions,
) -> AscendingInfluence {
    let members = path.members();
    let n = members.len();
    let mut values = vec![vec![None; n]; n];
    for i in (0..n).rev() {
        let mi = &members[i];
        for j in (i + 1)..n {
            let mj = &members[j];
            if !opts.is_upper(mi, mj) {
                continue;
            }
            let mut v = ndim.d(mi.index, mj.index);
            for (k, mk) in members.iter().enumerate().take(j).skip(i + 1) {
                if mk.level.block > mi.level.block && mk.level.block < mj.level.block {
                    let tail: f64 = values[k][j].expect("d′ above is filled first");
                    v += ndim.d(mi.index, mk.index) * tail;
                }
            }
            values[i][j] = Some(v);
        }
    }
    AscendingInfluence {
        ids: members.iter().map(|m| m.id.clone()).collect(),
        values,
    }
}

/// Unit effort propagation factors along a path.
#[derive(Clone, Debug, PartialEq)]
pub struct Uepf {
    pub values: BTreeMap<FactorId, f64>,
    /// `IDEPF = UEPF − nSig`: the share that reaches the goal through upper factors.
    pub idepf: BTreeMap<FactorId, f64>,
}

impl Uepf {
    pub fn get(&self, id: &str) -> f64 {
        self.values.get(id).copied().unwrap_or(0.0)
    }
}

/// `UEPF(F) = nSig(F) + Σ_{j ∈ Upper(F)} d′(F→j)·UEPF(j)`, computed from the
/// top of the path down; factors with nothing above have `IDEPF = 0`.
pub fn uepf(path: &StrategicPath, dprime: &AscendingInfluence, nsig: &SignificanceVector) -> Uepf {
    let members = path.members();
    let mut u = vec![0.0; members.len()];
    let mut idepf = vec![0.0; members.len()];
    for i in (0..members.len()).rev() {
        let indirect: f64 = dprime.upper(i).map(|(j, d)| d * u[j]).sum();
        idepf[i] = indirect;
        u[i] = nsig.get(members[i].id.as_str()) + indirect;
    }
    Uepf {
        values: members.iter().zip(&u).map(|(m, v)| (m.id.clone(), *v)).collect(),
        idepf: members.iter().zip(&idepf).map(|(m, v)| (m.id.clone(), *v)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use crate::model::{Factor, FactorSystem, Level};

    fn chain() -> (FactorSystem, StrategicPath) {
        let s = FactorSystem::new(
            vec![
                Factor::new("i", "I", true, Level::new(1, 1)),
                Factor::new("k", "K", true, Level::new(2, 1)),
                Factor::new("j", "J", false, Level::new(3, 1)),
            ],
            "g",
        )
        .unwrap();
        let p = super::super::enumerate_paths(&s).unwrap().remove(0);
        (s, p)
    }

    #[test]
    fn single_expansion() {
        let (_, p) = chain();
        let m = SquareMatrix::from_rows(&[
            vec![0.0, 0.5, 0.1],
            vec![0.0, 0.0, 0.4],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let nd = NormalizedInfluenceMatrix::from_precomputed(m, true);
        let dp = ascending_influence(&p, &nd, PropagationOptions::default());
        assert!((dp.get("i", "j").unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(dp.get("i", "k"), Some(0.5));
        assert_eq!(dp.get("k", "j"), Some(0.4));
        assert_eq!(dp.get("j", "i"), None);
    }

    #[test]
    fn uepf_top_down() {
        let (_, p) = chain();
        let m = SquareMatrix::from_rows(&[
            vec![0.0, 0.5, 0.1],
            vec![0.0, 0.0, 0.4],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let nd = NormalizedInfluenceMatrix::from_precomputed(m, true);
        let dp = ascending_influence(&p, &nd, PropagationOptions::default());
        let ns = SignificanceVector::from_pairs([("i", 0.2), ("k", 0.3), ("j", 0.5)]);
        let u = uepf(&p, &dp, &ns);
        assert_eq!(u.get("j"), 0.5);
        assert_eq!(u.idepf["j"], 0.0);
        let uk = 0.3 + 0.4 * 0.5;
        assert!((u.get("k") - uk).abs() < 1e-15);
        let ui = 0.2 + 0.5 * uk + 0.3 * 0.5;
        assert!((u.get("i") - ui).abs() < 1e-15);
    }

    #[test]
    fn within_block_flag_adds_same_block_pairs() {
        let s = FactorSystem::new(
            vec![
                Factor::new("a", "A", true, Level::new(1, 1)),
                Factor::new("b", "B", true, Level::new(1, 2)),
                Factor::new("c", "C", false, Level::new(2, 1)),
            ],
            "g",
        )
        .unwrap();
        let p = super::super::enumerate_paths(&s).unwrap().remove(0);
        let m = SquareMatrix::from_rows(&[
            vec![0.0, 0.2, 0.3],
            vec![0.1, 0.0, 0.6],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let nd = NormalizedInfluenceMatrix::from_precomputed(m, true);
        let off = ascending_influence(&p, &nd, PropagationOptions::default());
        assert_eq!(off.get("a", "b"), None);
        let on = ascending_influence(&p, &nd, PropagationOptions { within_block: true });
        assert_eq!(on.get("a", "b"), Some(0.2));
        // same-block hop is not an intermediate for a→c
        assert_eq!(on.get("a", "c"), Some(0.3));
    }
}
