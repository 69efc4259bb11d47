//! A rule-based infinity-fold tower and its level-independent decomposition.

use mvb::atlas::{Chart, FiniteBase};
use mvb::exactlin::Rational;
use mvb::infbundle::{DimRule, Generator, InfinityPresentation, TowerDecomposition, TransitionRule};
use mvb::split::Options;

fn main() -> mvb::Result<()> {
    let base = FiniteBase::numbered(2);
    let charts = vec![
        Chart { id: "c0".into(), domain: base.points().to_vec() },
        Chart { id: "c1".into(), domain: vec!["p1".into()] },
    ];
    let tower = InfinityPresentation::new(Generator::Rule {
        base,
        charts,
        dims: DimRule::ByCard { dims: vec![1, 1] },
        transitions: TransitionRule::ChartTwist { coefficient: Rational::new(1, 3) },
    });
    for n in 1..=4 {
        let t = tower.truncate(n)?;
        println!("level {n}: total dim {}", t.dims().total(&t.dims().top()));
    }
    println!("truncations restrict: {}", tower.tower_certificate(4)?.passed());
    let dec = TowerDecomposition::new(&tower, Options::default());
    println!("levels 3, 4 agree: {}", dec.level_independence(&[3, 4])?.passed());
    Ok(())
}
