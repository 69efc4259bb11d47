//! Validating an atlas and locating a broken cocycle.

use mvb::atlas::TransitionKey;
use mvb::corpus::uniform_twisted;
use mvb::random;

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(3, 2, 1, 3, 2);
    println!("twisted atlas valid: {}", a.validate().is_valid());
    let mut rng = random::rng(9);
    let bump = random::invertible_gauge(&mut rng, a.dims());
    let key = TransitionKey::new("c0", "c1", "p0");
    let broken = a.with_transition(&key, bump.compose(&*a.transition("c0", "c1", "p0")?)?)?;
    for (charts, point) in broken.validate().cocycle_cells() {
        println!("cocycle fails at {charts:?} over {point}");
    }
    Ok(())
}
