//! Randomized invariants across the gauge, atlas, bundle, core, splitting,
//! section, tower and CLI layers.

use clap::Parser;
use mvb::atlas::{AtlasPresentation, FiniteBase, TransitionKey};
use mvb::bundle::{transport, BundleElement};
use mvb::cli::{run, Cli};
use mvb::corepull::{core_partition, preserves_core};
use mvb::cubecat::{partitions, IndexSet};
use mvb::gauge::{add_over, Coords};
use mvb::infbundle::{DimRule, Generator, InfinityPresentation, TransitionRule};
use mvb::exactlin::Rational;
use mvb::lift;
use mvb::random::{self, AtlasShape, Rng8};
use mvb::split::{self, Options, Pasting};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn shape(n: usize, max_dim: usize, charts: usize, points: usize) -> AtlasShape {
    AtlasShape { n, max_dim, charts, points }
}

/// Two top-node coordinate tuples agreeing off the components containing `i`.
fn addable_pair(rng: &mut Rng8, dims: &mvb::gauge::DimAssignment, i: u32) -> (Coords, Coords) {
    let top = dims.top();
    let u = random::coords(rng, dims, &top);
    let mut w = random::coords(rng, dims, &top);
    for (k, x) in &u {
        if !k.contains(i) {
            w.insert(k.clone(), x.clone());
        }
    }
    (u, w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauges_respect_every_addition(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let dims = random::dims(&mut rng, n, 2);
        let g = random::invertible_gauge(&mut rng, &dims);
        for i in 1..=n as u32 {
            let (u, w) = addable_pair(&mut rng, &dims, i);
            let lhs = g.evaluate(&add_over(i, &u, &w).unwrap()).unwrap();
            let rhs = add_over(i, &g.evaluate(&u).unwrap(), &g.evaluate(&w).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn composition_evaluates_in_sequence(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let dims = random::dims(&mut rng, n, 2);
        let (f, g) = (random::gauge(&mut rng, &dims, &dims), random::gauge(&mut rng, &dims, &dims));
        let v = random::coords(&mut rng, &dims, &dims.top());
        prop_assert_eq!(g.compose(&f).unwrap().evaluate(&v).unwrap(), g.evaluate(&f.evaluate(&v).unwrap()).unwrap());
    }

    #[test]
    fn model_presentations_validate(seed in any::<u64>(), n in 1usize..=4, points in 1usize..=3) {
        let mut rng = random::rng(seed);
        let dims = random::dims(&mut rng, n, 2);
        let base = FiniteBase::numbered(points);
        prop_assert!(AtlasPresentation::decomposed(&dims, &base).validate().is_valid());
        let singles: Vec<usize> = (1..=n as u32).map(|i| dims.get(&IndexSet::singleton(i))).collect();
        prop_assert!(AtlasPresentation::vacant(&singles, &base).validate().is_valid());
        let ps = partitions(&dims.top()).unwrap();
        let rho = random::choose(&mut rng, &ps);
        prop_assert!(AtlasPresentation::diagonal(&dims, rho, &base).unwrap().validate().is_valid());
    }

    #[test]
    fn inverse_transitions_are_already_stored(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let a = random::twisted_atlas(&mut rng, &shape(n, 2, 3, 3));
        let fabricated: BTreeMap<TransitionKey, _> = a
            .transitions()
            .keys()
            .map(|k| (k.clone(), a.transition(&k.to, &k.from, &k.point).unwrap().invert().unwrap()))
            .collect();
        let rebuilt = a.with_data(a.dims().clone(), fabricated).unwrap();
        prop_assert_eq!(&rebuilt, &a);
        prop_assert!(rebuilt.validate().is_valid());
    }

    #[test]
    fn projections_commute_and_ignore_charts(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = random::rng(seed);
        let a = random::twisted_atlas(&mut rng, &shape(n, 2, 2, 2));
        let (chart, p) = random::pick_cell(&mut rng, &a);
        let top = a.dims().top();
        let e = BundleElement::new(&a, top.clone(), &chart, &p, random::coords(&mut rng, a.dims(), &top)).unwrap();
        let (i, j) = (1u32, n as u32);
        prop_assert_eq!(e.project(i).unwrap().project(j).unwrap(), e.project(j).unwrap().project(i).unwrap());
        let other = random::pick_chart_at(&mut rng, &a, &p);
        let there = transport(&a, &e, &other).unwrap();
        prop_assert!(mvb::bundle::same(&a, &there.project(i).unwrap(), &e.project(i).unwrap()).unwrap());
    }

    #[test]
    fn transitions_preserve_every_core(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = random::rng(seed);
        let a = random::twisted_atlas(&mut rng, &shape(n, 2, 2, 2));
        let top = a.dims().top();
        for j in top.nonempty_subsets() {
            let rho = core_partition(&top, &j).unwrap();
            for g in a.transitions().values() {
                prop_assert!(preserves_core(g, &rho).unwrap());
            }
        }
    }

    #[test]
    fn statomorphisms_are_natural(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let a = random::twisted_atlas(&mut rng, &shape(n, 2, 3, 2));
        let lin = a.linear_model();
        let tau = split::random_statomorphism(&mut rng, &a).unwrap();
        prop_assert!(tau.check_natural(&lin, &lin).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn decompositions_rebuild_from_their_parts(seed in any::<u64>(), n in 2usize..=3, average in any::<bool>()) {
        let mut rng = random::rng(seed);
        let a = random::twisted_atlas(&mut rng, &shape(n, 2, 3, 3));
        let pasting = if average { Pasting::UniformAverage } else { Pasting::LeastChart };
        let opts = Options::default().with_pasting(pasting);
        let s = split::decompose(&a, opts).unwrap();
        prop_assert!(split::is_decomposition(&a, &s, &mut rng, 2).unwrap().passed());
        prop_assert_eq!(&split::decompose(&a, opts).unwrap(), &s);
        let sigma = split::splitting_of(&a, &s).unwrap();
        let cores = split::core_decompositions(&a, &s).unwrap();
        prop_assert_eq!(&split::splitting_to_decomposition(&a, &sigma, &cores).unwrap(), &s);
    }

    #[test]
    fn section_morphisms_form_a_module(seed in any::<u64>(), n in 2usize..=3, d in 1usize..=2) {
        let mut rng = random::rng(seed);
        let a = random::twisted_atlas(&mut rng, &shape(n, 1, 2, 2));
        prop_assert!(lift::module_laws(&a, d, &mut rng, 3).unwrap().passed());
    }

    #[test]
    fn rule_towers_restrict(num in -3i64..=3, den in 1i64..=3, max in 1usize..=3) {
        let base = FiniteBase::numbered(2);
        let charts = vec![
            mvb::atlas::Chart { id: "c0".into(), domain: base.points().to_vec() },
            mvb::atlas::Chart { id: "c1".into(), domain: vec![base.points()[1].clone()] },
        ];
        let tower = InfinityPresentation::new(Generator::Rule {
            base,
            charts,
            dims: DimRule::CardAtMost { max, dim: 1 },
            transitions: TransitionRule::ChartTwist { coefficient: Rational::new(num, den) },
        });
        prop_assert!(tower.tower_certificate(4).unwrap().passed());
    }

    #[test]
    fn generated_instances_validate_and_reports_repeat(seed in any::<u64>(), n in 1usize..=3) {
        let file = std::env::temp_dir().join(format!("mvb-prop-{}-{seed}.json", std::process::id()));
        let path = file.to_str().unwrap();
        let seed_arg = seed.to_string();
        let n_arg = n.to_string();
        let gen = Cli::try_parse_from(["mvb", "--seed", &seed_arg, "gen", "--n", &n_arg, "--charts", "3", "--out", path]).unwrap();
        let (r1, c1) = run(&gen);
        let (r2, _) = run(&gen);
        prop_assert_eq!(c1, 0);
        prop_assert_eq!(&r1.hash, &r2.hash);
        let (v, code) = run(&Cli::try_parse_from(["mvb", "validate", path]).unwrap());
        std::fs::remove_file(&file).unwrap();
        prop_assert_eq!(code, 0, "{}", v.to_text());
    }
}
