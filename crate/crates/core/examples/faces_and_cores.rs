//! Faces, cores and cores computed by stages.

use mvb::bundle::face;
use mvb::corepull::{core, core_by_stages, core_closure};
use mvb::corpus::uniform_twisted;
use mvb::cubecat::IndexSet;
use mvb::random;

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(5, 3, 1, 2, 2);
    let s = IndexSet::range(3);
    let f = face(&a, &IndexSet::new([1, 3])?, &IndexSet::empty())?;
    println!("face over {{1, 3}}: {}-fold, valid {}", f.n(), f.validate().is_valid());
    for j in s.nonempty_subsets() {
        let c = core(&a, &s, &j)?;
        println!("core ({s}, {j}): {}-fold, total dim {}, closed {}", c.n(), c.dims().total(&c.dims().top()), core_closure(&a, &s, &j)?.passed());
    }
    let mut rng = random::rng(5);
    let cert = core_by_stages(&a, &s, &IndexSet::singleton(1), &IndexSet::new([1, 2])?, &mut rng, 10)?;
    println!("by stages: {}", cert.passed());
    Ok(())
}
