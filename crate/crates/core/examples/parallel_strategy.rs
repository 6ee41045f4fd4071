//! Both parallel sub-strategies on the bundled case study, next to the
//! published figures.

use effprop::case_study;
use effprop::model::{classify_factors, FactorId, PeapVariant};
use effprop::peap::{evaluate_peap, peap_total_epi, weighted_assignment, PeapConfig};

fn main() -> effprop::Result<()> {
    let p = case_study::project()?;
    let published = case_study::published();
    let (daf, ndaf) = classify_factors(&p.system)?;
    println!("{} accessible, {} latent", daf.len(), ndaf.len());

    let eff = weighted_assignment(&daf, &p.nsig, 1.0)?;
    println!("\nweighted efforts (computed / published):");
    for id in &daf {
        println!("  {:<9} {:.6} / {:.6}", id, eff.effort(id.as_str()), published.weighted_efforts[id.as_str()]);
    }

    // Only the coefficients into Pabl are complete in the bundled matrix, so
    // the engine's TeachSat and StudSat inflows are partial.
    for variant in [PeapVariant::Uniform, PeapVariant::Weighted] {
        let r = evaluate_peap(&p.system, &p.nsig, &p.ndim, variant, PeapConfig::default(), None)?;
        let inflows: Vec<String> = r.latent_inflows.iter().map(|(k, v)| format!("{k} {v:.6}")).collect();
        println!("\n{}: latent inflows {}", r.strategy.name(), inflows.join(", "));
    }

    let inflows = |m: &std::collections::BTreeMap<String, f64>| {
        m.iter().map(|(k, v)| (FactorId::new(k.clone()), *v)).collect()
    };
    let uni = effprop::peap::uniform_assignment(&daf, 1.0)?;
    println!(
        "\nU-PEAP from published inflows: {:.6} (published {:.6})",
        peap_total_epi(&uni, &inflows(&published.uniform_inflows), &p.nsig),
        published.u_peap_total_epi
    );
    println!(
        "W-PEAP from published inflows: {:.6} (published {:.6})",
        peap_total_epi(&eff, &inflows(&published.weighted_inflows), &p.nsig),
        published.w_peap_total_epi
    );
    Ok(())
}
