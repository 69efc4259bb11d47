//! The n-pullback and the ultracore sequence.

use mvb::corepull::{pullback, pullback_certificate, ultracore_sequence};
use mvb::corpus::uniform_twisted;
use mvb::random;

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(6, 3, 1, 2, 2);
    let top = a.dims().top();
    let pb = pullback(&a)?;
    println!("projection onto the pullback is surjective: {}", pullback_certificate(&a, &pb)?.passed());
    let mut rng = random::rng(6);
    let seq = ultracore_sequence(&a, 1, &mut rng, 4)?;
    println!(
        "{} = {} + {} ({} orderings, exact: {})",
        a.dims().total(&top),
        seq.ultracore_dim,
        seq.pullback.atlas.dims().total(&top),
        seq.orderings_checked,
        seq.certificate.passed()
    );
    Ok(())
}
