//! Cross-check the engines against the brute-force oracles on one random
//! system, then run the seeded suite behind `effprop verify`.

use effprop::heap::{ascending_influence, evaluate_heap, HeapHeuristic, PropagationOptions};
use effprop::oracle::random::random_heap_system_with;
use effprop::oracle::{chain_sum_dprime, grid_search_epi, simulate_forward, Structure};
use effprop::verify::{run_verification, VerifyConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> effprop::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let opts = PropagationOptions::default();
    // draw until the path spans more than one block
    let s = loop {
        let s = random_heap_system_with(&mut rng, 6, Some(3));
        if s.path.blocks.len() > 1 {
            break s;
        }
    };

    let d = ascending_influence(&s.path, &s.ndim, opts);
    // the pair with the most ascending influence
    let ((a, b), v) = d
        .pairs()
        .into_iter()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("path has an upper pair");
    println!(
        "d'({a} -> {b}): recursion {v:.12}, chain sum {:.12}",
        chain_sum_dprime(a.as_str(), b.as_str(), &s.path, &s.ndim, false)?
    );

    let structure = Structure::Hierarchical {
        path: &s.path,
        within_block: false,
    };
    for h in HeapHeuristic::grid() {
        let r = evaluate_heap(&s.path, h, &s.nsig, &s.ndim, opts, 1.0)?;
        let sim = simulate_forward(structure, &r.assignment, &s.ndim, &s.nsig)?;
        println!("{h:<14} engine {:.9}  simulation {:.9}", r.total_epi, sim.goal);
    }

    let best = grid_search_epi(structure, &s.ndim, &s.nsig, 0.05)?;
    println!("grid optimum {:.9} over {} points at {:?}", best.total_epi, best.points, best.assignment.efforts);

    let summary = run_verification(VerifyConfig { seed: 1, cases: 200 })?;
    for c in &summary.checks {
        println!("{:<50} max error {:.1e}  {}", c.name, c.max_error, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
