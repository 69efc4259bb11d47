//! Linear sections of a double vector bundle and the local splitting they give.

use mvb::corpus::uniform_twisted;
use mvb::lift::{local_split_double, sequence_certificate, ModuleSequence};
use mvb::random;
use mvb::split::FirstSection;

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(11, 2, 1, 2, 2);
    let seq = ModuleSequence::new(a.dims(), FirstSection::Skewed)?;
    println!("morphisms {}, sections {}, side pairs {}", seq.kernel.dim(), seq.sections.dim(), seq.pairs().len());
    let mut rng = random::rng(11);
    println!("exact: {}", sequence_certificate(&a, FirstSection::Skewed, &mut rng)?.passed());
    let (sigma, cert) = local_split_double(&a, FirstSection::Skewed, &mut rng)?;
    println!("splitting over {} cells: {}", sigma.data().len(), cert.passed());
    Ok(())
}
