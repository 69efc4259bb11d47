//! Horizontal lifts of a triple vector bundle and the decompositions they encode.

use mvb::corpus::uniform_twisted;
use mvb::lift::{lift_round_trip, ModuleSequence};
use mvb::random;
use mvb::split::{self, FirstSection, Options};

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(12, 3, 1, 2, 2);
    let seq = ModuleSequence::new(a.dims(), FirstSection::ZeroTop)?;
    println!("exact: {}", seq.exactness()?.passed());
    let s = split::decompose(&a, Options::default())?;
    let mut rng = random::rng(12);
    let cert = lift_round_trip(&a, &s, &mut rng)?;
    println!("{}: {}", cert.claim, cert.passed());
    Ok(())
}
