//! The twelve acceptance criteria, each checked exactly and reported on one line.

use mvb::atlas::{AtlasPresentation, FiniteBase, TransitionKey, ViolationKind};
use mvb::bundle::{interchange_sides, same, BundleElement, BundleMorphism};
use mvb::corepull::{core, core_by_stages, core_morphism, core_partition, pullback, pullback_certificate, ultracore_sequence};
use mvb::corpus;
use mvb::cubecat::{partitions, IndexSet};
use mvb::gauge::{Coords, DimAssignment, Gauge};
use mvb::infbundle::{InfinityPresentation, TowerDecomposition};
use mvb::lift;
use mvb::random::{self, AtlasShape, Rng8};
use mvb::split::{self, FirstSection, Options, Pasting};
use rand::Rng;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set(v: &[u32]) -> IndexSet {
    IndexSet::new(v.iter().copied()).unwrap()
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Instances read back from the files on disk.
fn instances() -> Vec<(String, AtlasPresentation)> {
    corpus::fixtures()
        .into_iter()
        .filter(|f| f.instance().is_some())
        .map(|f| {
            let bytes = std::fs::read(fixture_dir().join(f.file_name())).expect("fixture on disk");
            (f.name.to_string(), mvb::format::read_instance(&bytes).expect("fixture parses"))
        })
        .collect()
}

fn tower(name: &str) -> InfinityPresentation {
    let bytes = std::fs::read(fixture_dir().join(format!("{name}.json"))).expect("generator on disk");
    InfinityPresentation::new(mvb::format::read_generator(&bytes).expect("generator parses"))
}

/// Restricted growth strings of length `k`; one per set partition.
fn bell_by_growth_strings(k: usize) -> usize {
    fn extend(prefix: &mut Vec<usize>, k: usize) -> usize {
        if prefix.len() == k {
            return 1;
        }
        let bound = prefix.iter().copied().max().map_or(0, |m| m + 1);
        (0..=bound)
            .map(|b| {
                prefix.push(b);
                let c = extend(prefix, k);
                prefix.pop();
                c
            })
            .sum()
    }
    extend(&mut Vec::new(), k)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut counts = Vec::new();
    for k in 1..=5usize {
        let ours = partitions(&IndexSet::range(k)).map_err(|e| e.to_string())?;
        let oracle = bell_by_growth_strings(k);
        ensure(ours.len() == oracle, || format!("#I = {k}: {} partitions, enumerator gives {oracle}", ours.len()))?;
        counts.push(ours.len());
    }
    ensure(counts == [1, 2, 5, 15, 52], || format!("counts {counts:?}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("counts {counts:?} in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = random::rng(2002);
    let trials = 1000;
    for t in 0..trials {
        let n = rng.gen_range(1..=3);
        let dims = random::dims(&mut rng, n, 2);
        let (f, g, h) = (random::invertible_gauge(&mut rng, &dims), random::invertible_gauge(&mut rng, &dims), random::invertible_gauge(&mut rng, &dims));
        let v = random::coords(&mut rng, &dims, &dims.top());
        let gf = g.compose(&f).unwrap();
        ensure(gf.evaluate(&v).unwrap() == g.evaluate(&f.evaluate(&v).unwrap()).unwrap(), || format!("trial {t}: evaluation contract"))?;
        ensure(h.compose(&gf).unwrap() == h.compose(&g).unwrap().compose(&f).unwrap(), || format!("trial {t}: associativity"))?;
        let id = Gauge::identity(&dims);
        ensure(id.compose(&f).unwrap() == f && f.compose(&id).unwrap() == f, || format!("trial {t}: unit laws"))?;
        let inv = f.invert().unwrap();
        ensure(inv.compose(&f).unwrap() == id && f.compose(&inv).unwrap() == id, || format!("trial {t}: two-sided inverse"))?;
        let (s1, s2) = (random::statomorphism(&mut rng, &dims), random::statomorphism(&mut rng, &dims));
        let closed = s2.compose(&s1).unwrap().is_statomorphism() && s1.invert().unwrap().is_statomorphism() && id.is_statomorphism();
        ensure(closed, || format!("trial {t}: statomorphisms not closed"))?;
        ensure(!f.linear_part().is_statomorphism() || f.is_statomorphism(), || format!("trial {t}: linear-part test"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{trials} random gauge triples in {elapsed:?}"))
}

fn criterion_3() -> Outcome {
    let mut rng = random::rng(3003);
    let mut checked = 0;
    for (name, a) in instances() {
        ensure(a.validate().is_valid(), || format!("{name} fails validation"))?;
        checked += 1;
    }
    for n in 1..=4 {
        for charts in 1..=3 {
            let a = random::twisted_atlas(&mut rng, &AtlasShape { n, max_dim: 2, charts, points: 3 });
            ensure(a.validate().is_valid(), || format!("generated n={n} charts={charts} fails validation"))?;
            checked += 1;
        }
    }
    let a = corpus::uniform_twisted(3, 3, 1, 3, 3);
    let p = "p0";
    ensure(a.charts_at(p).len() == 3, || "p0 is not triply covered".into())?;
    let there = a.transition("c0", "c1", p).unwrap().into_owned();
    let back = a.transition("c1", "c0", p).unwrap().into_owned();
    let bump = loop {
        let g = random::invertible_gauge(&mut rng, a.dims());
        if !g.is_identity() {
            break g;
        }
    };
    let bad = a
        .with_transition(&TransitionKey::new("c0", "c1", p), bump.compose(&there).unwrap())
        .and_then(|b| b.with_transition(&TransitionKey::new("c1", "c0", p), back.compose(&bump.invert().unwrap()).unwrap()))
        .map_err(|e| e.to_string())?;
    let report = bad.validate();
    let cells = report.cocycle_cells();
    ensure(report.violations.iter().all(|v| v.kind == ViolationKind::Cocycle), || "non-cocycle violation after perturbation".into())?;
    let expected = vec![(vec!["c0".to_string(), "c1".to_string(), "c2".to_string()], p.to_string())];
    ensure(cells == expected, || format!("perturbation detected at {cells:?}"))?;
    Ok(format!("{checked} atlases valid; perturbation detected at exactly one triple"))
}

/// Four elements at the top node forming an interchange square for `(i, j)`:
/// components avoiding `i` are shared along the `i`-addition, those avoiding
/// `j` along the `j`-addition.
fn square(rng: &mut Rng8, a: &AtlasPresentation, i: u32, j: u32) -> [BundleElement; 4] {
    let top = a.dims().top();
    let (chart, p) = random::pick_cell(rng, a);
    let mut comps: [Coords; 4] = Default::default();
    for k in top.nonempty_subsets() {
        let d = a.dims().get(&k);
        let draws: Vec<_> = (0..4).map(|_| random::vector(rng, d)).collect();
        let pick = match (k.contains(i), k.contains(j)) {
            (false, false) => [0, 0, 0, 0],
            (true, false) => [0, 1, 0, 1],
            (false, true) => [0, 0, 2, 2],
            (true, true) => [0, 1, 2, 3],
        };
        for (slot, &x) in pick.iter().enumerate() {
            comps[slot].insert(k.clone(), draws[x].clone());
        }
    }
    comps.map(|c| {
        let e = BundleElement::new(a, top.clone(), &chart, &p, c).unwrap();
        let to = random::pick_chart_at(rng, a, &p);
        mvb::bundle::transport(a, &e, &to).unwrap()
    })
}

fn criterion_4() -> Outcome {
    let mut rng = random::rng(4004);
    let per_face = 1000;
    let mut total = 0;
    for (name, a) in instances() {
        let n = a.n() as u32;
        for i in 1..=n {
            for j in i + 1..=n {
                for q in 0..per_face {
                    let d = square(&mut rng, &a, i, j);
                    let (lhs, rhs) = interchange_sides(&a, [&d[0], &d[1], &d[2], &d[3]], i, j).map_err(|e| e.to_string())?;
                    ensure(same(&a, &lhs, &rhs).unwrap(), || format!("{name}: face ({i}, {j}), quadruple {q}"))?;
                    total += 1;
                }
            }
        }
    }
    Ok(format!("{total} quadruples, {per_face} per square face of every fixture"))
}

fn criterion_5() -> Outcome {
    let mut rng = random::rng(5005);
    let mut max_orderings = 0;
    for (name, a) in instances() {
        let pb = pullback(&a).map_err(|e| e.to_string())?;
        let cert = pullback_certificate(&a, &pb).map_err(|e| e.to_string())?;
        ensure(cert.passed(), || format!("{name}: pullback {:?}", cert.counterexample))?;
        let top = a.dims().top();
        let total = a.dims().total(&top);
        for k in 1..=a.n() as u32 {
            let seq = ultracore_sequence(&a, k, &mut rng, 2).map_err(|e| e.to_string())?;
            ensure(seq.certificate.passed(), || format!("{name}, k = {k}: {:?}", seq.certificate.counterexample))?;
            let p_dim = seq.pullback.atlas.dims().total(&top);
            ensure(total == seq.ultracore_dim + p_dim, || format!("{name}: {total} != {} + {p_dim}", seq.ultracore_dim))?;
            ensure(seq.ultracore_dim == a.dims().get(&top), || format!("{name}: ultracore has dim {}", seq.ultracore_dim))?;
            max_orderings = max_orderings.max(seq.orderings_checked);
        }
        if name == "twisted_n3_ones" {
            let seq = ultracore_sequence(&a, 1, &mut rng, 2).map_err(|e| e.to_string())?;
            let p_dim = seq.pullback.atlas.dims().total(&top);
            ensure((total, seq.ultracore_dim, p_dim) == (7, 1, 6), || format!("expected 7 = 1 + 6, got {total} = {} + {p_dim}", seq.ultracore_dim))?;
        }
    }
    ensure(max_orderings >= 3, || format!("only {max_orderings} orderings checked"))?;
    Ok(format!("every fixture and k; 7 = 1 + 6; up to {max_orderings} orderings"))
}

fn criterion_6() -> Outcome {
    // Distinct dimensions make the identification with building bundles visible.
    let dims = DimAssignment::from_fn(3, |j| match j.elements() {
        [1] => 1,
        [2] => 2,
        [3] => 1,
        [1, 2] => 2,
        [1, 3] => 0,
        [2, 3] => 1,
        _ => 2,
    });
    let dec = AtlasPresentation::decomposed(&dims, &FiniteBase::numbered(1));
    let s = set(&[1, 2, 3]);
    for j in s.nonempty_subsets() {
        let c = core(&dec, &s, &j).map_err(|e| e.to_string())?;
        let rho = core_partition(&s, &j).unwrap();
        ensure(c.n() == s.len() - j.len() + 1, || format!("core ({s}, {j}) has {} directions", c.n()))?;
        // Node nu of the core carries the product of A_[nu'] for nu' ⊆ nu.
        for nu in IndexSet::range(rho.len()).nonempty_subsets() {
            let expected: usize = nu.nonempty_subsets().iter().map(|sub| dims.get(&rho.union_of(sub).unwrap())).sum();
            ensure(c.dims().total(&nu) == expected, || format!("core ({s}, {j}) node {nu}: {} != {expected}", c.dims().total(&nu)))?;
        }
        ensure(c.transitions().is_empty() && c.validate().is_valid(), || format!("core ({s}, {j}) is not decomposed"))?;
    }
    for (j, rest) in [(set(&[1, 2]), 3u32), (set(&[2, 3]), 1), (set(&[1, 3]), 2)] {
        let c = core(&dec, &s, &j).unwrap();
        let expected = dims.get(&IndexSet::singleton(rest)) + dims.get(&j) + dims.get(&s);
        ensure(c.dims().total(&c.dims().top()) == expected, || format!("core ({s}, {j}) total"))?;
    }
    ensure(core(&dec, &s, &s).unwrap().dims().total(&set(&[1])) == dims.get(&s), || "ultracore is not A_S".into())?;

    let mut rng = random::rng(6006);
    let mut stages = 0;
    for (name, a) in instances().into_iter().filter(|(_, a)| a.n() >= 3) {
        let top = a.dims().top();
        for j in top.nonempty_subsets() {
            for k in j.nonempty_subsets() {
                let cert = core_by_stages(&a, &top, &k, &j, &mut rng, 4).map_err(|e| e.to_string())?;
                ensure(cert.passed(), || format!("{name}: stages ({k}, {j}) {:?}", cert.counterexample))?;
                stages += 1;
            }
        }
    }
    let mut pairs = 0;
    for (name, a) in instances() {
        let at_point = |rng: &mut Rng8| -> BTreeMap<String, Gauge> {
            a.base().points().iter().map(|p| (p.clone(), random::statomorphism(rng, a.dims()))).collect()
        };
        let top = a.dims().top();
        for _ in 0..3 {
            let f = BundleMorphism::transported(&a, &a, &at_point(&mut rng)).unwrap();
            let g = BundleMorphism::transported(&a, &a, &at_point(&mut rng)).unwrap();
            for j in top.nonempty_subsets() {
                let lhs = core_morphism(&g.compose(&f).unwrap(), &a, &a, &top, &j).map_err(|e| e.to_string())?;
                let rhs = core_morphism(&g, &a, &a, &top, &j).unwrap().compose(&core_morphism(&f, &a, &a, &top, &j).unwrap()).unwrap();
                ensure(lhs == rhs, || format!("{name}: core of composite differs at J = {j}"))?;
                let c = core(&a, &top, &j).unwrap();
                lhs.check_natural(&c, &c).map_err(|e| format!("{name}: core morphism not natural: {e}"))?;
            }
            pairs += 1;
        }
    }
    Ok(format!("decomposed cores match; {stages} stage certificates; {pairs} morphism pairs"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = random::rng(7007);
    let mut runs = 0;
    for (name, a) in instances() {
        for pasting in [Pasting::LeastChart, Pasting::UniformAverage] {
            let s = split::decompose(&a, Options::default().with_pasting(pasting)).map_err(|e| format!("{name} {pasting:?}: {e}"))?;
            let cert = split::is_decomposition(&a, &s, &mut rng, 4).map_err(|e| e.to_string())?;
            ensure(cert.passed(), || format!("{name} {pasting:?}: {:?}", cert.counterexample))?;
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("{runs} decompositions verified in {elapsed:?}"))
}

fn criterion_8() -> Outcome {
    let mut rng = random::rng(8008);
    let mut nontrivial = 0;
    for (name, a) in instances() {
        let s1 = split::decompose(&a, Options::default().with_pasting(Pasting::LeastChart)).unwrap();
        let s2 = split::decompose(&a, Options::default().with_pasting(Pasting::UniformAverage).with_first(FirstSection::Skewed)).unwrap();
        let tau = split::torsor(&a, &s1, &s2).map_err(|e| format!("{name}: {e}"))?;
        ensure(tau.data().values().all(Gauge::is_statomorphism), || format!("{name}: torsor element is not a statomorphism"))?;
        ensure(split::act(&s1, &tau).unwrap() == s2, || format!("{name}: acting does not recover the second decomposition"))?;
        if tau.data().values().any(|g| !g.is_identity()) {
            nontrivial += 1;
        }
        let sigma = split::random_statomorphism(&mut rng, &a).unwrap();
        let moved = split::act(&s1, &sigma).unwrap();
        ensure(split::is_decomposition(&a, &moved, &mut rng, 2).unwrap().passed(), || format!("{name}: acted decomposition invalid"))?;
        ensure(split::torsor(&a, &s1, &moved).unwrap() == sigma, || format!("{name}: extraction does not recover the statomorphism"))?;
    }
    ensure(nontrivial > 0, || "every torsor element was the identity".into())?;
    Ok(format!("round trips exact; {nontrivial} fixtures with a nontrivial statomorphism"))
}

fn criterion_9() -> Outcome {
    for (name, a) in instances() {
        let s = split::decompose(&a, Options::default()).unwrap();
        let normal = split::normalize_atlas(&a, &s).map_err(|e| e.to_string())?;
        for (key, t) in normal.transitions() {
            let stray = t.components().iter().find(|(rho, c)| !rho.is_trivial() && !c.is_zero());
            ensure(stray.is_none(), || format!("{name}: {key:?} has a nonzero component at {:?}", stray.unwrap().0))?;
        }
        ensure(normal.validate().is_valid(), || format!("{name}: normalized atlas fails validation"))?;
        ensure(split::normalization_certificate(&a, &s).unwrap().passed(), || format!("{name}: certificate"))?;
    }
    Ok("normalized transitions are block diagonal and validate".into())
}

fn criterion_10() -> Outcome {
    let mut rng = random::rng(1010);
    let mut rounds = 0;
    for (name, a) in instances().into_iter().filter(|(_, a)| a.n() == 3) {
        for first in [FirstSection::ZeroTop, FirstSection::Skewed] {
            let seq = lift::ModuleSequence::new(a.dims(), first).map_err(|e| e.to_string())?;
            let exact = seq.exactness().map_err(|e| e.to_string())?;
            ensure(exact.passed(), || format!("{name}: {:?}", exact.counterexample))?;
            // Rank count: dim Mor = dim ker + dim of the pair module.
            ensure(seq.sections.dim() == seq.kernel.dim() + seq.pairs().len(), || format!("{name}: ranks {} != {} + {}", seq.sections.dim(), seq.kernel.dim(), seq.pairs().len()))?;
            let cert = lift::sequence_certificate(&a, first, &mut rng).map_err(|e| e.to_string())?;
            ensure(cert.passed(), || format!("{name}: {:?}", cert.counterexample))?;
        }
        for pasting in [Pasting::LeastChart, Pasting::UniformAverage] {
            let s = split::decompose(&a, Options::default().with_pasting(pasting)).unwrap();
            let cert = lift::lift_round_trip(&a, &s, &mut rng).map_err(|e| format!("{name}: {e}"))?;
            ensure(cert.passed(), || format!("{name} {pasting:?}: {:?}", cert.counterexample))?;
            rounds += 1;
        }
    }
    Ok(format!("sequences exact; {rounds} lift round trips with formula = pipeline"))
}

fn criterion_11() -> Outcome {
    let t = tower("generator_stabilizing_n3");
    let tc = t.tower_certificate(4).map_err(|e| e.to_string())?;
    ensure(tc.passed(), || format!("tower: {:?}", tc.counterexample))?;
    for pasting in [Pasting::LeastChart, Pasting::UniformAverage] {
        let dec = TowerDecomposition::new(&t, Options::default().with_pasting(pasting));
        let cert = dec.level_independence(&[3, 4]).map_err(|e| e.to_string())?;
        ensure(cert.passed(), || format!("{pasting:?}: {:?}", cert.counterexample))?;
    }
    Ok("decompositions at levels 3 and 4 agree on every I ⊆ [3]".into())
}

fn report_hash(args: &[&str]) -> Result<(String, serde_json::Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mvb"))
        .args(args)
        .env("MVB_FIXTURES", fixture_dir())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || format!("{args:?} exited with {:?}", out.status.code()))?;
    let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let hash = v["hash"].as_str().unwrap_or_default().to_string();
    v.as_object_mut().unwrap().remove("timing_ms");
    Ok((hash, v))
}

fn criterion_12() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["--seed", "12", "decompose", "--strategy", "uniform-average", "twisted_n3.json"],
        &["--seed", "12", "ultracore", "--k", "2", "twisted_n4_ones.json"],
        &["--seed", "12", "gen", "--n", "3", "--max-dim", "2"],
    ];
    for args in runs {
        let (h1, r1) = report_hash(args)?;
        let (h2, r2) = report_hash(args)?;
        ensure(!h1.is_empty() && h1 == h2 && r1 == r2, || format!("{args:?}: {h1} vs {h2}"))?;
    }
    Ok(format!("{} commands reproduce their report hash", runs.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("partition calculus", criterion_1),
        ("gauge group", criterion_2),
        ("cocycle law", criterion_3),
        ("interchange law", criterion_4),
        ("n-pullback and ultracore", criterion_5),
        ("cores", criterion_6),
        ("decomposition pipeline", criterion_7),
        ("torsor", criterion_8),
        ("atlas normalization", criterion_9),
        ("n = 3 section calculus", criterion_10),
        ("infinity-fold tower", criterion_11),
        ("CLI determinism", criterion_12),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (title, check)) in criteria.iter().enumerate() {
        let number = k + 1;
        if !only.is_empty() && !only.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {number:>2} PASS  {title}: {detail} [{:.1?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {number:>2} FAIL  {title}: {why} [{:.1?}]", start.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
