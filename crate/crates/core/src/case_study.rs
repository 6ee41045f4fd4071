//! The 18-factor high school administration system, bundled for examples and
//! regression tests.
//!
//! The influence matrix is partial: only the coefficients into the latent
//! factors and among the top of the hierarchy are known, so results that need
//! the full matrix (thresholds, complete path TotalEPI) are not reproducible
//! from it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::Result;
use crate::project::{parse_project, Project};

pub const PROJECT_JSON: &str = include_str!("../fixtures/high_school.json");
pub const PUBLISHED_JSON: &str = include_str!("../fixtures/high_school_published.json");

pub fn project() -> Result<Project> {
    parse_project(PROJECT_JSON, Path::new("."))
}

/// Published intermediate values for the case study, as printed (six
/// decimals, intermediates rounded).
#[derive(Clone, Debug, Deserialize)]
pub struct Published {
    pub weighted_efforts: BTreeMap<String, f64>,
    pub pabl_coefficients: BTreeMap<String, f64>,
    pub pabl_inflow_weighted: f64,
    pub uniform_inflows: BTreeMap<String, f64>,
    pub weighted_inflows: BTreeMap<String, f64>,
    pub u_peap_total_epi: f64,
    pub w_peap_total_epi: f64,
    pub dprime: Vec<PublishedEdge>,
    pub uepf: BTreeMap<String, f64>,
    pub bsr_path1: Vec<f64>,
    pub uni_nsig_block1_path1: BTreeMap<String, f64>,
    pub path_count: usize,
    pub effective_blocks: usize,
    pub tau: f64,
    /// Keyed by heuristic label, one value per path. Context only.
    pub heap_total_epi: BTreeMap<String, Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PublishedEdge {
    pub from: String,
    pub to: String,
    pub value: f64,
}

pub fn published() -> Published {
    serde_json::from_str(PUBLISHED_JSON).expect("bundled reference values parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_project_loads() {
        let p = project().unwrap();
        assert_eq!(p.system.len(), 18);
        assert!(p.ndim.is_partial());
        let pubd = published();
        assert_eq!(pubd.weighted_efforts.len(), 12);
        assert_eq!(pubd.heap_total_epi.len(), 9);
    }
}
