//! A Brownian sheet built from a Poisson field, queried at nodes and off-grid.
use std::sync::Arc;

use nearcrit::coupling::{build_yamada, sample_pinned_sheet, CellGrid, CoupledSheet, Gaussianizer, PinnedSource, PoissonField};
use nearcrit::rng::{StreamKey, Tag};

fn main() -> nearcrit::Result<()> {
    let (t, k) = (64.0, 8);
    let key = StreamKey::new(3);
    let field = PoissonField::new(t, CellGrid::new(k, 2.0)?, key)?;
    let mut sheet = CoupledSheet::from_field(&field, Arc::new(Gaussianizer::new(t, k)?), PinnedSource::Keyed(key))?;
    let nodes = sheet.node_values(k, 2 * k)?;
    println!("W(1, 1) = {:+.4}, W(1, 2) = {:+.4}", nodes[k][k], nodes[k][2 * k]);
    let w = sheet.values_at(&[(0.3, 0.45), (0.71, 1.2), (1.0, 2.0)])?;
    println!("W at (0.3,0.45), (0.71,1.2), (1,2): {w:+.4?}");
    println!("column strip W((2/8,3/8] × (0, 1.37]) = {:+.4}", sheet.column_strip(2, 1.37)?);

    let mut rng = key.rng(Tag::Auxiliary, 0);
    let b = sample_pinned_sheet(k, &[(0.05, 0.05), (0.125, 0.1), (0.125, 0.125)], &mut rng)?;
    println!("pinned sheet: {b:+.4?} (zero on the far edges)");

    let y = build_yamada(0.5, 1.0, 1.0)?;
    println!("Υ'' lives on {:.3} ≤ |x| ≤ {}", y.a, y.eps);
    for x in [-1.0, -0.4, 0.0, 0.35, 0.45] {
        println!("Υ({x:+}) = {:.4}, Υ' = {:+.4}, Υ'' = {:.4}", y.evaluate(x), y.first(x), y.second(x));
    }
    Ok(())
}
