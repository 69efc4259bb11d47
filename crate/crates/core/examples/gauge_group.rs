//! Composing, inverting and evaluating gauges; statomorphisms.

use mvb::gauge::DimAssignment;
use mvb::random;

fn main() -> mvb::Result<()> {
    let mut rng = random::rng(1);
    let dims = DimAssignment::uniform(3, 1);
    let f = random::invertible_gauge(&mut rng, &dims);
    let g = random::invertible_gauge(&mut rng, &dims);
    let v = random::coords(&mut rng, &dims, &dims.top());
    let composite = g.compose(&f)?;
    assert_eq!(composite.evaluate(&v)?, g.evaluate(&f.evaluate(&v)?)?);
    assert!(f.invert()?.compose(&f)?.is_identity());
    let s = random::statomorphism(&mut rng, &dims);
    println!("statomorphism: {}, its inverse: {}", s.is_statomorphism(), s.invert()?.is_statomorphism());
    println!("{} components, (g . f)(v) = {:?}", composite.components().len(), composite.evaluate(&v)?);
    Ok(())
}
