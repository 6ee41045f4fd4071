//! Aggregate expert opinion matrices into a direct influence matrix and
//! row-normalize it.

use effprop::ingestion::{aggregate_opinions, aggregate_opinions_weighted, normalize_dim, OpinionMatrix};

fn main() -> effprop::Result<()> {
    // 0 = no influence ... 6 = extremely high influence
    let experts = vec![
        OpinionMatrix::new("e1", vec![vec![0, 4, 2], vec![1, 0, 3], vec![0, 0, 0]])?,
        OpinionMatrix::new("e2", vec![vec![0, 2, 2], vec![3, 0, 1], vec![1, 0, 0]])?,
    ];

    let dim = aggregate_opinions(&experts)?;
    println!("direct influence (equal weights):");
    for row in dim.0.rows() {
        println!("  {row:?}");
    }

    let ndim = normalize_dim(&dim);
    println!("normalized:");
    for row in ndim.matrix().rows() {
        println!("  {:?}", row.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    }

    let weighted = aggregate_opinions_weighted(&experts, &[3.0, 1.0])?;
    println!("first expert weighted 3:1 -> row a = {:?}", weighted.0.row(0));
    Ok(())
}
