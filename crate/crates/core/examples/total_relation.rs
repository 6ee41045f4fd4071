//! Total relation matrix and significant edges of a project built from
//! opinion files.

use effprop::project::load_project;
use effprop::relation::ThresholdRule;

fn main() -> effprop::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/small.json");
    let project = load_project(path)?;
    let trm = project.total_relation()?;
    let ids: Vec<&str> = project.system.factors().iter().map(|f| f.id.as_str()).collect();

    println!("T = N(I - N)^-1 after max-row-sum scaling:");
    for (id, row) in ids.iter().zip(trm.entries.rows()) {
        println!("  {id}: {}", row.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join("  "));
    }
    println!("threshold (mean + sigma/2) = {:.6}", trm.threshold);
    for (i, j) in trm.significant.edges() {
        println!("  {} -> {}  {:.6}", ids[i], ids[j], trm.entries[(i, j)]);
    }

    for rule in [ThresholdRule::Mean, ThresholdRule::MeanStd] {
        println!("{rule:?}: threshold {:.6}", rule.apply(&trm.entries));
    }
    Ok(())
}
