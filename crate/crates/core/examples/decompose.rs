//! Linear splittings and decompositions under both pasting strategies.

use mvb::random::{self, AtlasShape};
use mvb::split::{self, Decomposer, Options, Pasting};

fn main() -> mvb::Result<()> {
    let mut rng = random::rng(7);
    let a = random::twisted_atlas(&mut rng, &AtlasShape { n: 3, max_dim: 2, charts: 3, points: 3 });
    for pasting in [Pasting::LeastChart, Pasting::UniformAverage] {
        let opts = Options::default().with_pasting(pasting);
        let sigma = split::find_splitting(&a, opts)?;
        let mut d = Decomposer::new(&a, opts);
        let s = d.decompose()?;
        println!(
            "{pasting:?}: splitting {}, decomposition {}, cached ({:?})",
            split::is_splitting(&a, &sigma)?.passed(),
            split::is_decomposition(&a, &s, &mut rng, 4)?.passed(),
            d.cache_sizes()
        );
    }
    Ok(())
}
