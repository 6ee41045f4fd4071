//! The full comparison table for a project, as the `compare` command prints it.

use effprop::case_study;
use effprop::heap::{enumerate_paths, evaluate_heap, HeapHeuristic, PropagationOptions};
use effprop::model::PeapVariant;
use effprop::peap::{evaluate_peap, PeapConfig};
use effprop::report::{ComparisonReport, Format, ReportMetadata};

fn main() -> effprop::Result<()> {
    let p = case_study::project()?;
    let mut results = Vec::new();
    for v in [PeapVariant::Uniform, PeapVariant::Weighted] {
        results.push(evaluate_peap(&p.system, &p.nsig, &p.ndim, v, PeapConfig::default(), None)?);
    }
    for path in enumerate_paths(&p.system)? {
        for h in HeapHeuristic::grid() {
            results.push(evaluate_heap(&path, h, &p.nsig, &p.ndim, PropagationOptions::default(), 1.0)?);
        }
    }
    let report = ComparisonReport::new(ReportMetadata::new(p.id(), p.options.clone()), &results);
    print!("{}", report.render(Format::Md)?);
    if let Some(best) = report.best() {
        println!("\nbest: {} {} path {}", best.name, best.heuristic, best.path);
    }
    Ok(())
}
