use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FactorId, FactorSystem, Level};

/// Upper bound on the number of paths `enumerate_paths` will materialize.
pub const MAX_PATHS: usize = 1 << 16;

/// A factor on a strategic path, with the data the engines need.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathMember {
    pub id: FactorId,
    /// Position in the factor system.
    #[serde(skip)]
    pub index: usize,
    pub level: Level,
    pub accessible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathBlock {
    pub block: u32,
    pub members: Vec<FactorId>,
}

/// One choice of a nonempty factor subset from every sublevel.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategicPath {
    /// 1-based position in enumeration order.
    pub ordinal: usize,
    pub selection: BTreeMap<Level, Vec<FactorId>>,
    /// Blocks touched by the path, bottom-up.
    pub blocks: Vec<PathBlock>,
    /// Blocks holding at least one accessible path factor, bottom-up.
    pub effective_blocks: Vec<u32>,
    members: Vec<PathMember>,
}

impl StrategicPath {
    /// Builds a path from an explicit selection. Members are ordered by level,
    /// then by position in the system.
    pub fn from_selection(
        system: &FactorSystem,
        ordinal: usize,
        selection: BTreeMap<Level, Vec<FactorId>>,
    ) -> Result<Self> {
        let mut members = Vec::new();
        for (level, ids) in &selection {
            for id in ids {
                let index = system.require_index(id.as_str())?;
                let f = &system.factors()[index];
                if f.level != *level {
                    return Err(Error::Project(format!(
                        "factor `{id}` is not on level {}",
                        level.label(false)
                    )));
                }
                if f.excluded {
                    return Err(Error::Project(format!("factor `{id}` is excluded")));
                }
                members.push(PathMember {
                    id: id.clone(),
                    index,
                    level: *level,
                    accessible: f.accessible,
                });
            }
        }
        members.sort_by_key(|m| (m.level, m.index));
        members.dedup_by_key(|m| m.index);

        let mut blocks: Vec<PathBlock> = Vec::new();
        for m in &members {
            match blocks.last_mut() {
                Some(b) if b.block == m.level.block => b.members.push(m.id.clone()),
                _ => blocks.push(PathBlock {
                    block: m.level.block,
                    members: vec![m.id.clone()],
                }),
            }
        }
        let effective_blocks = blocks
            .iter()
            .filter(|b| {
                members
                    .iter()
                    .any(|m| m.level.block == b.block && m.accessible)
            })
            .map(|b| b.block)
            .collect();
        Ok(Self {
            ordinal,
            selection,
            blocks,
            effective_blocks,
            members,
        })
    }

    /// Path factors in ascending (level, system position) order.
    pub fn members(&self) -> &[PathMember] {
        &self.members
    }

    pub fn member(&self, id: &str) -> Option<&PathMember> {
        self.members.iter().find(|m| m.id.as_str() == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.members.iter().position(|m| m.id.as_str() == id)
    }

    /// Accessible path factors of one block, in path order.
    pub fn accessible_in_block(&self, block: u32) -> impl Iterator<Item = &PathMember> {
        self.members
            .iter()
            .filter(move |m| m.accessible && m.level.block == block)
    }

    pub fn accessible(&self) -> impl Iterator<Item = &PathMember> {
        self.members.iter().filter(|m| m.accessible)
    }
}

/// Every strategic path of the system.
///
/// Each sublevel contributes one nonempty subset of its non-excluded factors.
/// Subsets are ordered by ascending bitmask over the sublevel's factors in
/// input order; the Cartesian product is ordered with the lowest sublevel as
/// the most significant digit. Sublevels left empty by exclusions are skipped.
pub fn enumerate_paths(system: &FactorSystem) -> Result<Vec<StrategicPath>> {
    let mut by_level: BTreeMap<Level, Vec<FactorId>> = BTreeMap::new();
    for f in system.eligible() {
        by_level.entry(f.level).or_default().push(f.id.clone());
    }
    let mut choices: Vec<(Level, Vec<Vec<FactorId>>)> = Vec::with_capacity(by_level.len());
    let mut count: usize = 1;
    for (level, ids) in by_level {
        if ids.len() >= 17 {
            return Err(Error::TooManyPaths { limit: MAX_PATHS });
        }
        let subsets: Vec<Vec<FactorId>> = (1u32..(1 << ids.len()))
            .map(|mask| {
                ids.iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, id)| id.clone())
                    .collect()
            })
            .collect();
        count = count
            .checked_mul(subsets.len())
            .filter(|c| *c <= MAX_PATHS)
            .ok_or(Error::TooManyPaths { limit: MAX_PATHS })?;
        choices.push((level, subsets));
    }
    if choices.is_empty() {
        return Ok(Vec::new());
    }

    let mut paths = Vec::with_capacity(count);
    let mut digits = vec![0usize; choices.len()];
    loop {
        let selection = choices
            .iter()
            .zip(&digits)
            .map(|((level, subsets), &d)| (*level, subsets[d].clone()))
            .collect();
        paths.push(StrategicPath::from_selection(system, paths.len() + 1, selection)?);

        // odometer, top sublevel turns fastest
        let mut k = choices.len();
        loop {
            if k == 0 {
                return Ok(paths);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < choices[k].1.len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Factor;

    fn sys(factors: Vec<Factor>) -> FactorSystem {
        FactorSystem::new(factors, "g").unwrap()
    }

    #[test]
    fn singleton_sublevels_give_one_path() {
        let s = sys(vec![
            Factor::new("a", "A", true, Level::new(1, 1)),
            Factor::new("b", "B", true, Level::new(1, 2)),
            Factor::new("c", "C", false, Level::new(2, 1)),
        ]);
        let paths = enumerate_paths(&s).unwrap();
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert_eq!(p.ordinal, 1);
        assert_eq!(p.blocks.len(), 2);
        assert_eq!(p.effective_blocks, vec![1]);
        assert_eq!(p.members().len(), 3);
    }

    #[test]
    fn two_by_two_gives_nine_paths_in_mask_order() {
        let s = sys(vec![
            Factor::new("a", "A", true, Level::new(1, 1)),
            Factor::new("b", "B", true, Level::new(1, 1)),
            Factor::new("c", "C", true, Level::new(2, 1)),
            Factor::new("d", "D", true, Level::new(2, 1)),
        ]);
        let paths = enumerate_paths(&s).unwrap();
        assert_eq!(paths.len(), 9);
        let first: Vec<_> = paths.iter().map(|p| p.selection[&Level::new(1, 1)].clone()).collect();
        assert_eq!(first[0], vec![FactorId::from("a")]);
        assert_eq!(first[3], vec![FactorId::from("b")]);
        assert_eq!(first[8], vec![FactorId::from("a"), FactorId::from("b")]);
        let top: Vec<_> = paths[..3].iter().map(|p| p.selection[&Level::new(2, 1)].len()).collect();
        assert_eq!(top, vec![1, 1, 2]);
        assert_eq!(
            paths.iter().map(|p| p.ordinal).collect::<Vec<_>>(),
            (1..=9).collect::<Vec<_>>()
        );
    }

    #[test]
    fn excluded_sublevel_is_skipped() {
        let s = sys(vec![
            Factor::new("x", "X", true, Level::new(1, 1)).excluded(),
            Factor::new("a", "A", true, Level::new(1, 2)),
            Factor::new("b", "B", false, Level::new(2, 1)),
        ]);
        let paths = enumerate_paths(&s).unwrap();
        assert_eq!(paths.len(), 1);
        assert!(!paths[0].selection.contains_key(&Level::new(1, 1)));
    }

    #[test]
    fn explosion_is_refused() {
        let factors = (0..17)
            .map(|i| Factor::new(&format!("f{i}"), "F", true, Level::new(1, 1)))
            .collect();
        assert!(matches!(enumerate_paths(&sys(factors)), Err(Error::TooManyPaths { .. })));
    }
}
