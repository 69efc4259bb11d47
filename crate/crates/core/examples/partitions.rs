//! Partitions of index sets and coarsening.

use mvb::cubecat::{coarsen, partitions, IndexSet, Partition};

fn main() -> mvb::Result<()> {
    for k in 1..=5 {
        println!("#I = {k}: {} partitions", partitions(&IndexSet::range(k))?.len());
    }
    let rho = Partition::new(vec![IndexSet::new([1, 3])?, IndexSet::singleton(2), IndexSet::singleton(4)])?;
    let pi = Partition::new(vec![IndexSet::new([1, 2])?, IndexSet::singleton(3)])?;
    println!("{rho:?} coarsened by {pi:?} = {:?}", coarsen(&rho, &pi)?);
    Ok(())
}
