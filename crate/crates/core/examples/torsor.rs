//! Two decompositions differ by a statomorphism.

use mvb::corpus::uniform_twisted;
use mvb::split::{self, FirstSection, Options, Pasting};

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(8, 3, 1, 2, 2);
    let s1 = split::decompose(&a, Options::default())?;
    let s2 = split::decompose(&a, Options::default().with_pasting(Pasting::UniformAverage).with_first(FirstSection::Skewed))?;
    let tau = split::torsor(&a, &s1, &s2)?;
    let nontrivial = tau.data().values().filter(|g| !g.is_identity()).count();
    println!("statomorphism: {}", tau.data().values().all(|g| g.is_statomorphism()));
    println!("cells where it is not the identity: {nontrivial} of {}", tau.data().len());
    println!("acting recovers the second: {}", split::act(&s1, &tau)? == s2);
    Ok(())
}
