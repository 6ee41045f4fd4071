//! Seeded agreement checks between the engines and the brute-force oracles.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::heap::{ascending_influence, evaluate_heap, HeapHeuristic, PropagationOptions};
use crate::matrix::SquareMatrix;
use crate::model::{classify_factors, PeapVariant};
use crate::oracle::random::{random_heap_system, random_ndim, random_peap_system};
use crate::oracle::{chain_sum_dprime, simulate_forward, Structure};
use crate::peap::{evaluate_peap, peap_total_epi_matrix, PeapConfig};
use crate::relation::total_relation_matrix;
use crate::report::{fmt6, md_table, to_json, Format};

pub const DEFAULT_SEED: u64 = 0x00C0_FFEE;
pub const DEFAULT_CASES: usize = 1000;
pub const AGREEMENT_TOL: f64 = 1e-12;
pub const SERIES_TOL: f64 = 1e-10;
pub const CONSERVATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub cases: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            cases: DEFAULT_CASES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub comparisons: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl VerifySummary {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut s = String::from("check,cases,comparisons,max_error,tolerance,passed\n");
                for c in &self.checks {
                    let _ = writeln!(
                        s,
                        "{},{},{},{:e},{:e},{}",
                        c.name, c.cases, c.comparisons, c.max_error, c.tolerance, c.passed
                    );
                }
                Ok(s)
            }
            Format::Md => {
                let rows = self
                    .checks
                    .iter()
                    .map(|c| {
                        vec![
                            c.name.to_owned(),
                            c.cases.to_string(),
                            c.comparisons.to_string(),
                            format!("{:.3e}", c.max_error),
                            format!("{:.0e}", c.tolerance),
                            if c.passed { "pass" } else { "FAIL" }.to_owned(),
                        ]
                    })
                    .collect();
                let mut s = format!("Seed {:#x}\n\n", self.seed);
                s.push_str(&md_table(&["Check", "Cases", "Comparisons", "Max error", "Tolerance", "Result"], rows));
                Ok(s)
            }
        }
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    comparisons: usize,
    max_error: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            cases: 0,
            comparisons: 0,
            max_error: 0.0,
        }
    }

    fn compare(&mut self, a: f64, b: f64) {
        self.comparisons += 1;
        let e = (a - b).abs();
        // NaN must fail the check
        if e.is_nan() || e > self.max_error {
            self.max_error = if e.is_nan() { f64::INFINITY } else { e };
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            cases: self.cases,
            comparisons: self.comparisons,
            max_error: self.max_error,
            tolerance: self.tolerance,
            passed: self.comparisons > 0 && self.max_error <= self.tolerance,
        }
    }
}

/// Ascending influence recursion against explicit chain enumeration, with
/// and without same-block propagation.
pub fn check_ascending_influence(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut t = Tally::new("ascending influence vs chain sum", AGREEMENT_TOL);
    for _ in 0..cases {
        let s = random_heap_system(rng, 8);
        for within_block in [false, true] {
            let d = ascending_influence(&s.path, &s.ndim, PropagationOptions { within_block });
            for a in s.path.members() {
                for b in s.path.members() {
                    let oracle = chain_sum_dprime(a.id.as_str(), b.id.as_str(), &s.path, &s.ndim, within_block)?;
                    t.compare(d.get(a.id.as_str(), b.id.as_str()).unwrap_or(0.0), oracle);
                }
            }
        }
        t.cases += 1;
    }
    Ok(t.finish())
}

/// Hierarchical TotalEPI for every heuristic pair against the timestep
/// simulation of the same assignment.
pub fn check_heap_simulation(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut t = Tally::new("hierarchical TotalEPI vs simulation", AGREEMENT_TOL);
    for _ in 0..cases {
        let s = random_heap_system(rng, 8);
        for within_block in [false, true] {
            for h in HeapHeuristic::grid() {
                let r = evaluate_heap(&s.path, h, &s.nsig, &s.ndim, PropagationOptions { within_block }, 1.0)?;
                let sim = simulate_forward(
                    Structure::Hierarchical {
                        path: &s.path,
                        within_block,
                    },
                    &r.assignment,
                    &s.ndim,
                    &s.nsig,
                )?;
                t.compare(r.total_epi, sim.goal);
            }
        }
        t.cases += 1;
    }
    Ok(t.finish())
}

/// Parallel TotalEPI: scalar form, matrix form and simulation, gated and not.
pub fn check_peap_forms(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut t = Tally::new("parallel TotalEPI scalar vs matrix vs simulation", AGREEMENT_TOL);
    for _ in 0..cases {
        let s = random_peap_system(rng, 20);
        for gating in [false, true] {
            let gate = gating.then_some(&s.edges);
            for variant in [PeapVariant::Uniform, PeapVariant::Weighted] {
                let config = PeapConfig {
                    gating,
                    total_effort: 1.0,
                };
                let r = evaluate_peap(&s.system, &s.nsig, &s.ndim, variant, config, Some(&s.edges))?;
                let m = peap_total_epi_matrix(&s.system, &r.assignment, &s.ndim, &s.nsig, gate)?;
                let sim = simulate_forward(
                    Structure::Parallel {
                        system: &s.system,
                        gate,
                    },
                    &r.assignment,
                    &s.ndim,
                    &s.nsig,
                )?;
                t.compare(r.total_epi, m);
                t.compare(r.total_epi, sim.goal);
            }
        }
        t.cases += 1;
    }
    Ok(t.finish())
}

/// Closed-form closure against the power series, truncated once the next
/// term is negligible.
pub fn check_closure_series(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    use rand::Rng;
    let mut t = Tally::new("total relation closure vs power series", SERIES_TOL);
    for _ in 0..cases {
        let n = rng.random_range(1..=10);
        let scale = rng.random_range(0.05..=0.9);
        let m = random_ndim(rng, n).matrix().scaled(scale);
        let closed = total_relation_matrix(&m)?;
        let series = power_series(&m, 1e-16);
        for (a, b) in closed.entries().iter().zip(series.entries()) {
            t.compare(*a, *b);
        }
        t.cases += 1;
    }
    Ok(t.finish())
}

fn power_series(m: &SquareMatrix, eps: f64) -> SquareMatrix {
    let mut term = m.clone();
    let mut sum = m.clone();
    while term.max_abs_row_sum() > eps {
        term = term.matmul(m);
        sum = sum.add(&term);
    }
    sum
}

/// Every strategy's efforts sum to the total.
pub fn check_conservation(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut t = Tally::new("effort conservation", CONSERVATION_TOL);
    for _ in 0..cases {
        let s = random_heap_system(rng, 8);
        for h in HeapHeuristic::grid() {
            let r = evaluate_heap(&s.path, h, &s.nsig, &s.ndim, PropagationOptions::default(), 1.0)?;
            t.compare(r.assignment.sum(), 1.0);
        }
        if classify_factors(&s.system).is_ok() {
            for variant in [PeapVariant::Uniform, PeapVariant::Weighted] {
                let r = evaluate_peap(&s.system, &s.nsig, &s.ndim, variant, PeapConfig::default(), None)?;
                t.compare(r.assignment.sum(), 1.0);
            }
        }
        t.cases += 1;
    }
    Ok(t.finish())
}

/// Runs every check with the seed and case count of `config`.
pub fn run_verification(config: VerifyConfig) -> Result<VerifySummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let checks = vec![
        check_ascending_influence(&mut rng, config.cases)?,
        check_heap_simulation(&mut rng, config.cases)?,
        check_peap_forms(&mut rng, config.cases)?,
        check_closure_series(&mut rng, config.cases)?,
        check_conservation(&mut rng, config.cases)?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifySummary {
        seed: config.seed,
        checks,
        passed,
    })
}

/// One-line human summary.
pub fn summary_line(s: &VerifySummary) -> String {
    let worst = s.checks.iter().map(|c| c.max_error).fold(0.0, f64::max);
    format!(
        "{} checks, {}, worst error {}",
        s.checks.len(),
        if s.passed { "all passed" } else { "FAILED" },
        if worst < 1e-6 { format!("{worst:.1e}") } else { fmt6(worst) }
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let s = run_verification(VerifyConfig { seed: 7, cases: 40 }).unwrap();
        assert!(s.passed, "{}", s.render(Format::Md).unwrap());
        assert_eq!(s.checks.len(), 5);
        assert!(s.checks.iter().all(|c| c.cases == 40 && c.comparisons > 0));
    }

    #[test]
    fn nan_fails() {
        let mut t = Tally::new("x", 1.0);
        t.compare(f64::NAN, 0.0);
        assert!(!t.finish().passed);
    }
}
