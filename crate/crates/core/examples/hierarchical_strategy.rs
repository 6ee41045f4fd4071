//! Strategic paths, ascending influence and UEPF on the case study, then
//! every heuristic pair on the first path.

use effprop::case_study;
use effprop::heap::{ascending_influence, block_shares, enumerate_paths, evaluate_heap, uepf, BlockHeuristic, HeapHeuristic, PropagationOptions};

fn main() -> effprop::Result<()> {
    let p = case_study::project()?;
    let paths = enumerate_paths(&p.system)?;
    for path in &paths {
        let ids: Vec<&str> = path.members().iter().map(|m| m.id.as_str()).collect();
        println!("path {}: {}", path.ordinal, ids.join(" "));
    }

    let path = &paths[0];
    let opts = PropagationOptions::default();
    let d = ascending_influence(path, &p.ndim, opts);
    println!("\nd'(NStud -> StudSat) = {:.6}", d.get("NStud", "StudSat").unwrap_or(0.0));
    let u = uepf(path, &d, &p.nsig);
    for id in ["StudSat", "TeachSat", "NStud"] {
        println!("UEPF({id}) = {:.6}", u.get(id));
    }

    let bsr = block_shares(path, BlockHeuristic::Bsr, &p.nsig, None)?;
    println!("\nBSR shares: {:?}", bsr.values().map(|v| format!("{v:.6}")).collect::<Vec<_>>());

    // The bundled matrix is partial, so these are not the published totals.
    println!();
    for h in HeapHeuristic::grid() {
        let r = evaluate_heap(path, h, &p.nsig, &p.ndim, opts, 1.0)?;
        println!("{h:<14} TotalEPI {:.6}", r.total_epi);
    }
    Ok(())
}
