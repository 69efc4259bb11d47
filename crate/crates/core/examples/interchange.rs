//! The two additions of a double vector bundle commute.

use mvb::bundle::{interchange_sides, same, BundleElement};
use mvb::corpus::uniform_twisted;
use mvb::cubecat::IndexSet;
use mvb::random;

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(4, 2, 1, 2, 1);
    let mut rng = random::rng(4);
    let top = IndexSet::range(2);
    // Elements (x1, x2, x12): d1, d2 share x2; d1, d3 share x1; and so on.
    let base = random::coords(&mut rng, a.dims(), &top);
    let mut d = Vec::new();
    for (s1, s2) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let mut c = base.clone();
        c.insert(IndexSet::singleton(1), random::vector(&mut random::rng(10 + s1), 1));
        c.insert(IndexSet::singleton(2), random::vector(&mut random::rng(20 + s2), 1));
        c.insert(top.clone(), random::vector(&mut rng, 1));
        d.push(BundleElement::new(&a, top.clone(), "c0", "p0", c)?);
    }
    let (lhs, rhs) = interchange_sides(&a, [&d[0], &d[1], &d[2], &d[3]], 1, 2)?;
    println!("(d1 +1 d2) +2 (d3 +1 d4) = {:?}", lhs.components);
    println!("(d1 +2 d3) +1 (d2 +2 d4) = {:?}", rhs.components);
    println!("equal: {}", same(&a, &lhs, &rhs)?);
    Ok(())
}
