//! Cores, the n-pullback and the ultracore sequence.
//!
//! The `(S, J)`-core consists of the elements of `E_S` lying over iterated
//! zeros under every projection dropping a member of `J`. In chart
//! coordinates these are exactly the tuples supported on unions of blocks of
//! the diagonal partition `{J} u {{s} : s in S \ J}`, so the core is the
//! reindexing of the presentation along that partition. Membership is decided
//! from the definition (projections against zero lifts); the coordinate
//! description is only used to build presentations and is checked against it.

use crate::atlas::AtlasPresentation;
use crate::bundle::{add, fiber_matrix, same, transport, zero_lift, BundleElement, BundleMorphism};
use crate::certificate::Certificate;
use crate::cubecat::{DiagonalPartition, IndexSet, Partition};
use crate::error::{Error, Result};
use crate::exactlin::Matrix;
use crate::gauge::{zero_coords, Coords, DimAssignment, Gauge};
use crate::random::{self, Rng8};
use itertools::Itertools;
use serde_json::json;
use std::cell::Cell;
use std::collections::BTreeMap;

/// The diagonal partition of `S` with distinguished block `J`.
pub fn core_partition(s: &IndexSet, j: &IndexSet) -> Result<Partition> {
    Ok(DiagonalPartition::new(s, j)?.as_partition())
}

fn check_core_args(atlas: &AtlasPresentation, s: &IndexSet, j: &IndexSet) -> Result<Partition> {
    if !s.is_subset(&atlas.dims().top()) {
        return Err(Error::InvalidArgument(format!("{s} is not a subset of [{}]", atlas.n())));
    }
    core_partition(s, j).map_err(|_| Error::InvalidArgument(format!("need a nonempty J ⊆ S, got J = {j}, S = {s}")))
}

/// The core as a presentation over the cube of blocks of the diagonal partition.
pub fn core(atlas: &AtlasPresentation, s: &IndexSet, j: &IndexSet) -> Result<AtlasPresentation> {
    let rho = check_core_args(atlas, s, j)?;
    atlas.reindex(&rho)
}

/// Coordinates on `E_S` from coordinates on the core cube: zeros off the unions of blocks.
pub fn embed_core(dims: &DimAssignment, rho: &Partition, w: &Coords) -> Coords {
    let mut v = zero_coords(dims, rho.ground());
    for (nu, x) in w {
        v.insert(rho.union_of(nu).expect("block positions"), x.clone());
    }
    v
}

/// Core-cube coordinates read off from `E_S` coordinates.
pub fn extract_core(rho: &Partition, v: &Coords) -> Coords {
    IndexSet::range(rho.len())
        .nonempty_subsets()
        .into_iter()
        .map(|nu| {
            let u = rho.union_of(&nu).expect("block positions");
            (nu, v[&u].clone())
        })
        .collect()
}

/// Probes `g` on core elements: returns whether every image stays in the core
/// and the restricted gauge agrees with the reindexed components.
pub fn preserves_core(g: &Gauge, rho: &Partition) -> Result<bool> {
    let src = crate::gauge::reindex_dims(g.source(), rho)?;
    let tgt = crate::gauge::reindex_dims(g.target(), rho)?;
    let closed = Cell::new(true);
    let probed = Gauge::from_fn(&src, &tgt, |w| {
        let out = g.evaluate(&embed_core(g.source(), rho, w))?;
        if out.iter().any(|(k, x)| !rho.is_union_of_blocks(k) && x.iter().any(|c| !c.is_zero())) {
            closed.set(false);
        }
        Ok(extract_core(rho, &out))
    })?;
    Ok(closed.get() && probed == g.reindex(rho)?)
}

/// Checks every transition against the core by exhaustive basis probing.
pub fn core_closure(atlas: &AtlasPresentation, s: &IndexSet, j: &IndexSet) -> Result<Certificate> {
    let rho = check_core_args(atlas, s, j)?;
    let mut cert = Certificate::new(format!("transitions preserve the ({s}, {j})-core"));
    for (key, t) in atlas.transitions() {
        if !preserves_core(t, &rho)? {
            cert.fail(json!({ "from": key.from, "to": key.to, "point": key.point }));
        }
    }
    cert.witness(json!({ "transitions": atlas.transitions().len(), "partition": rho }));
    Ok(cert)
}

/// Membership by definition: for each `j in J`, the projection dropping `j`
/// is the zero lift of its projection to `S \ J`.
pub fn in_core(atlas: &AtlasPresentation, s: &IndexSet, j: &IndexSet, e: &BundleElement) -> Result<bool> {
    check_core_args(atlas, s, j)?;
    if e.node != *s {
        return Err(Error::InvalidArgument(format!("element at {} is not in E_{s}", e.node)));
    }
    for i in j.iter() {
        let x = e.project(i)?;
        let mut y = x.clone();
        for other in j.iter().filter(|&o| o != i) {
            y = y.project(other)?;
        }
        if !same(atlas, &x, &zero_lift(atlas, &y, &s.without(i))?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The element of the core presentation represented by `e`, in the same chart.
pub fn core_element(atlas: &AtlasPresentation, s: &IndexSet, j: &IndexSet, e: &BundleElement) -> Result<BundleElement> {
    if !in_core(atlas, s, j, e)? {
        return Err(Error::InvalidArgument(format!("element is not in the ({s}, {j})-core")));
    }
    let rho = core_partition(s, j)?;
    let components = extract_core(&rho, &e.components);
    Ok(BundleElement { node: IndexSet::range(rho.len()), chart: e.chart.clone(), point: e.point.clone(), components })
}

/// A random element of `E_S` in the `J`-core, in a random chart.
pub fn random_core_element(rng: &mut Rng8, atlas: &AtlasPresentation, s: &IndexSet, j: &IndexSet) -> Result<BundleElement> {
    let rho = core_partition(s, j)?;
    let (chart, point) = random::pick_cell(rng, atlas);
    let w = random::coords(rng, &crate::gauge::reindex_dims(atlas.dims(), &rho)?, &IndexSet::range(rho.len()));
    BundleElement::new(atlas, s.clone(), &chart, &point, embed_core(atlas.dims(), &rho, &w))
}

/// Cores by stages: for `K ⊆ J ⊆ S` the `(S, J)`-core is the core of the
/// `(S, K)`-core at the block positions covering `J`.
pub fn core_by_stages(
    atlas: &AtlasPresentation,
    s: &IndexSet,
    k: &IndexSet,
    j: &IndexSet,
    rng: &mut Rng8,
    samples: usize,
) -> Result<Certificate> {
    if !k.is_subset(j) {
        return Err(Error::InvalidArgument(format!("need K ⊆ J, got K = {k}, J = {j}")));
    }
    let rho_j = check_core_args(atlas, s, j)?;
    let rho_k = check_core_args(atlas, s, k)?;
    let mut cert = Certificate::new(format!("({s}, {j})-core by stages through ({s}, {k})"));
    let outer = IndexSet::range(rho_k.len());
    let inner = rho_k.positions_within(j).expect("J is a union of blocks");
    let rho_inner = core_partition(&outer, &inner)?;
    let staged = rho_k.expand(&rho_inner)?;
    cert.check(staged == rho_j, json!({ "staged_partition": staged, "direct_partition": rho_j }));
    let core_k = core(atlas, s, k)?;
    let staged_atlas = core(&core_k, &outer, &inner)?;
    cert.check(staged_atlas == core(atlas, s, j)?, json!({ "presentations": "differ" }));
    let mut positives = 0;
    let subs = s.nonempty_subsets();
    for _ in 0..samples {
        let jp = random::choose(rng, &subs).clone();
        let e = random_core_element(rng, atlas, s, &jp)?;
        let e = transport(atlas, &e, &random::pick_chart_at(rng, atlas, &e.point))?;
        let direct = in_core(atlas, s, j, &e)?;
        let stages = in_core(atlas, s, k, &e)? && in_core(&core_k, &outer, &inner, &core_element(atlas, s, k, &e)?)?;
        positives += direct as usize;
        if direct != stages {
            cert.fail(json!({ "element": e, "direct": direct, "by_stages": stages }));
        }
    }
    cert.witness(json!({ "samples": samples, "in_core": positives }));
    Ok(cert)
}

/// The restriction of a natural morphism to the `(S, J)`-cores.
pub fn core_morphism(
    tau: &BundleMorphism,
    source: &AtlasPresentation,
    target: &AtlasPresentation,
    s: &IndexSet,
    j: &IndexSet,
) -> Result<BundleMorphism> {
    let rho = check_core_args(source, s, j)?;
    tau.check_natural(source, target)?;
    for ((chart, point), g) in tau.data() {
        if !preserves_core(g, &rho)? {
            return Err(Error::Semantic(format!("morphism at ({chart}, {point}) leaves the ({s}, {j})-core")));
        }
    }
    tau.reindex(&rho)
}

pub struct Pullback {
    pub atlas: AtlasPresentation,
    /// Drops the top component in every chart.
    pub projection: BundleMorphism,
}

/// The n-pullback: all building dimensions but the top one, with the transitions
/// of the proper nodes.
pub fn pullback(atlas: &AtlasPresentation) -> Result<Pullback> {
    let dims = atlas.dims();
    let top = dims.top();
    let pdims = if atlas.n() == 0 { dims.clone() } else { dims.with(&top, 0) };
    let mut transitions = BTreeMap::new();
    for (key, g) in atlas.transitions() {
        let mut h = Gauge::zero(&pdims, &pdims)?;
        for (rho, t) in g.components() {
            if *rho.ground() != top {
                h.set_component(rho, t.clone())?;
            }
        }
        transitions.insert(key.clone(), h);
    }
    let p = atlas.with_data(pdims.clone(), transitions)?;
    let pi = crate::atlas::inclusion_gauge(dims, &pdims, |j| *j != top)?;
    let data = atlas.cells().into_iter().map(|c| (c, pi.clone())).collect();
    let projection = BundleMorphism::new(dims.clone(), pdims, data)?;
    Ok(Pullback { atlas: p, projection })
}

/// The coordinate matrix of a gauge with only linear parts, block diagonal over subsets of `node`.
fn linear_matrix(g: &Gauge, node: &IndexSet) -> Matrix {
    let sets = node.nonempty_subsets();
    let rows: usize = sets.iter().map(|j| g.target().get(j)).sum();
    let cols: usize = sets.iter().map(|j| g.source().get(j)).sum();
    let mut m = Matrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for j in &sets {
        let b = g.linear(j);
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                m.set(r0 + r, c0 + c, b.get(r, c).clone());
            }
        }
        r0 += b.rows();
        c0 += b.cols();
    }
    m
}

/// Surjectivity of the projection onto the pullback in every chart and point,
/// and naturality of the projection.
pub fn pullback_certificate(atlas: &AtlasPresentation, pb: &Pullback) -> Result<Certificate> {
    let mut cert = Certificate::new("the projection onto the n-pullback is a fiberwise surjection");
    let top = atlas.dims().top();
    let want = pb.atlas.dims().total(&top);
    for ((chart, point), g) in pb.projection.data() {
        if !g.is_block_diagonal() {
            cert.fail(json!({ "chart": chart, "point": point, "reason": "nonlinear projection" }));
        }
        let rank = linear_matrix(g, &top).rank();
        cert.check(rank == want, json!({ "chart": chart, "point": point, "rank": rank, "pullback_dim": want }));
    }
    let natural = pb.projection.naturality_failures(atlas, &pb.atlas)?;
    cert.check(natural.is_empty(), json!({ "not_natural": natural.len() }));
    cert.check(pb.atlas.validate().is_valid(), json!({ "pullback": "invalid" }));
    cert.witness(json!({ "total_dim": atlas.dims().total(&top), "pullback_dim": want, "ultracore_dim": atlas.dims().get(&top) }));
    Ok(cert)
}

/// `iota(z, b)`: nested fiber sums of the ultracore element `z` with zero lifts
/// of the projections of `b` to `{j_l, ..., j_{n-1}}`, for the ordering
/// `order = (j_1, ..., j_{n-1})` of `[n] \ {k}`.
pub fn ultracore_embed(atlas: &AtlasPresentation, order: &[u32], z: &BundleElement, b: &BundleElement) -> Result<BundleElement> {
    let top = atlas.dims().top();
    if z.node != top || z.point != b.point {
        return Err(Error::FiberMismatch("ultracore element and base element do not match".into()));
    }
    let mut x = z.clone();
    for l in (0..order.len()).rev() {
        let keep = IndexSet::new(order[l..].iter().copied())?;
        let mut y = b.clone();
        for i in b.node.difference(&keep).iter() {
            y = y.project(i)?;
        }
        x = add(atlas, &x, &zero_lift(atlas, &y, &top)?, order[l])?;
    }
    Ok(x)
}

pub struct UltracoreSequence {
    pub k: u32,
    pub pullback: Pullback,
    pub ultracore_dim: usize,
    pub orderings_checked: usize,
    pub certificate: Certificate,
}

/// Fiberwise exactness of `0 -> ultracore -> E -> P -> 0` over `E_{[n] \ {k}}`,
/// at random base elements, and independence of the embedding from the ordering.
pub fn ultracore_sequence(atlas: &AtlasPresentation, k: u32, rng: &mut Rng8, samples: usize) -> Result<UltracoreSequence> {
    let n = atlas.n();
    if k == 0 || k as usize > n {
        return Err(Error::InvalidArgument(format!("k = {k} is not in [{n}]")));
    }
    let dims = atlas.dims();
    let top = dims.top();
    let rest = top.without(k);
    let pb = pullback(atlas)?;
    let d = dims.get(&top);
    let mut cert = Certificate::new(format!("0 -> ultracore -> E -> P -> 0 is exact over E_{rest}"));
    cert.absorb(pullback_certificate(atlas, &pb)?);
    let pdim = pb.atlas.dims().total(&top);
    cert.check(dims.total(&top) == d + pdim, json!({ "total": dims.total(&top), "ultracore": d, "pullback": pdim }));
    let orderings: Vec<Vec<u32>> = rest.iter().permutations(rest.len()).take(24).collect();
    for _ in 0..samples {
        let (chart, point) = random::pick_cell(rng, atlas);
        let b = BundleElement::new(atlas, rest.clone(), &chart, &point, random::coords(rng, dims, &rest))?;
        let zchart = random::pick_chart_at(rng, atlas, &point);
        let zero_top = BundleElement::zero(atlas, &top, &zchart, &point)?;
        let ultra = |x: usize| -> Result<BundleElement> {
            let mut z = zero_top.clone();
            z.components.get_mut(&top).unwrap()[x] = crate::exactlin::Rational::one();
            Ok(z)
        };
        let fiber_coords = |e: &BundleElement| -> Result<Vec<crate::exactlin::Rational>> {
            let e = transport(atlas, e, &chart)?;
            Ok(e.components.iter().filter(|(j, _)| j.contains(k)).flat_map(|(_, v)| v.iter().cloned()).collect())
        };
        let rows = dims.total(&top) - dims.total(&rest);
        let columns = (0..d).map(|x| fiber_coords(&ultracore_embed(atlas, &orderings[0], &ultra(x)?, &b)?)).collect::<Result<Vec<_>>>()?;
        let iota = Matrix::from_columns(rows, &columns)?;
        let pi_gauge = pb.projection.at(&chart, &point)?;
        let pi = fiber_matrix(dims, pb.atlas.dims(), &b.zero_lift(dims, &top)?.components, k, |v| pi_gauge.evaluate(v))?;
        let composite = pi.mul(&iota)?;
        let (ri, rp) = (iota.rank(), pi.rank());
        let kernel = pi.cols() - rp;
        let ok = ri == d && rp == pi.rows() && composite.is_zero() && kernel == ri;
        cert.check(ok, json!({ "chart": chart, "point": point, "base": b, "rank_iota": ri, "rank_pi": rp, "kernel_pi": kernel }));
        cert.witness(json!({ "chart": chart, "point": point, "rank_iota": ri, "rank_pi": rp, "kernel_pi": kernel, "fiber_dim": rows }));
        let mut z = zero_top.clone();
        *z.components.get_mut(&top).unwrap() = random::vector(rng, d);
        let first = ultracore_embed(atlas, &orderings[0], &z, &b)?;
        for order in &orderings[1..] {
            let other = ultracore_embed(atlas, order, &z, &b)?;
            cert.check(same(atlas, &first, &other)?, json!({ "ordering": order, "base": b, "ultracore": z }));
        }
    }
    Ok(UltracoreSequence { k, pullback: pb, ultracore_dim: d, orderings_checked: orderings.len(), certificate: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::FiniteBase;
    use crate::bundle::face;

    fn set(v: &[u32]) -> IndexSet {
        IndexSet::new(v.iter().copied()).unwrap()
    }

    fn shape(n: usize) -> random::AtlasShape {
        random::AtlasShape { n, max_dim: 2, charts: 2, points: 2 }
    }

    #[test]
    fn decomposed_core_layout() {
        let a = AtlasPresentation::decomposed(&DimAssignment::uniform(3, 1), &FiniteBase::numbered(1));
        let c = core(&a, &set(&[1, 2, 3]), &set(&[1, 2])).unwrap();
        assert_eq!(c.n(), 2);
        assert_eq!(c.dims().total(&set(&[1, 2])), 3);
        let s = set(&[1, 2, 3]);
        assert_eq!(core(&a, &s, &set(&[2])).unwrap(), face(&a, &s, &IndexSet::empty()).unwrap());
        let u = core(&a, &s, &s).unwrap();
        assert_eq!(u.n(), 1);
        assert_eq!(u.dims().get(&set(&[1])), 1);
    }

    #[test]
    fn membership_matches_coordinates() {
        let mut rng = random::rng(4);
        let a = random::twisted_atlas(&mut rng, &shape(3));
        let s = set(&[1, 2, 3]);
        for j in s.nonempty_subsets() {
            assert!(core_closure(&a, &s, &j).unwrap().passed());
            let e = random_core_element(&mut rng, &a, &s, &j).unwrap();
            assert!(in_core(&a, &s, &j, &e).unwrap());
            let moved = transport(&a, &e, &random::pick_chart_at(&mut rng, &a, &e.point)).unwrap();
            assert!(in_core(&a, &s, &j, &moved).unwrap());
        }
        let e = BundleElement::new(&a, s.clone(), "c0", "p0", random::coords(&mut rng, a.dims(), &s)).unwrap();
        if e.components[&set(&[1])].iter().any(|x| !x.is_zero()) {
            assert!(!in_core(&a, &s, &set(&[1, 2]), &e).unwrap());
            assert!(in_core(&a, &s, &set(&[1]), &e).unwrap());
        }
    }

    #[test]
    fn stages_and_faces() {
        let mut rng = random::rng(8);
        let a = random::twisted_atlas(&mut rng, &shape(3));
        let s = set(&[1, 2, 3]);
        for (k, j) in [(set(&[1]), set(&[1, 2])), (set(&[2]), s.clone()), (set(&[1, 3]), set(&[1, 3]))] {
            let cert = core_by_stages(&a, &s, &k, &j, &mut rng, 20).unwrap();
            assert!(cert.passed(), "{cert:?}");
        }
        // Cores of faces are faces of cores.
        let i = set(&[1, 3]);
        let f = face(&a, &i, &IndexSet::empty()).unwrap();
        assert_eq!(core(&f, &set(&[1, 2]), &set(&[2])).unwrap(), core(&a, &i, &set(&[3])).unwrap());
    }

    #[test]
    fn intersections() {
        let mut rng = random::rng(12);
        let a = random::twisted_atlas(&mut rng, &shape(3));
        let s = set(&[1, 2, 3]);
        let subs = s.nonempty_subsets();
        for _ in 0..40 {
            let jp = random::choose(&mut rng, &subs).clone();
            let e = random_core_element(&mut rng, &a, &s, &jp).unwrap();
            for i in &subs {
                for j in &subs {
                    let both = in_core(&a, &s, i, &e).unwrap() && in_core(&a, &s, j, &e).unwrap();
                    if i.is_disjoint(j) {
                        let rho = core_partition(&s, j).unwrap();
                        let inner = rho.positions_within(i).unwrap();
                        let iterated = in_core(&a, &s, j, &e).unwrap()
                            && in_core(&core(&a, &s, j).unwrap(), &IndexSet::range(rho.len()), &inner, &core_element(&a, &s, j, &e).unwrap()).unwrap();
                        assert_eq!(both, iterated);
                    } else {
                        assert_eq!(both, in_core(&a, &s, &i.union(j), &e).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn core_morphisms_compose() {
        let mut rng = random::rng(2);
        let a = random::twisted_atlas(&mut rng, &shape(3));
        let at_point = |rng: &mut Rng8| -> BTreeMap<String, Gauge> {
            a.base().points().iter().map(|p| (p.clone(), random::statomorphism(rng, a.dims()))).collect()
        };
        let f = BundleMorphism::transported(&a, &a, &at_point(&mut rng)).unwrap();
        let g = BundleMorphism::transported(&a, &a, &at_point(&mut rng)).unwrap();
        let s = set(&[1, 2, 3]);
        let j = set(&[1, 2]);
        let lhs = core_morphism(&g.compose(&f).unwrap(), &a, &a, &s, &j).unwrap();
        let rhs = core_morphism(&g, &a, &a, &s, &j).unwrap().compose(&core_morphism(&f, &a, &a, &s, &j).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let id = core_morphism(&BundleMorphism::identity(&a), &a, &a, &s, &j).unwrap();
        assert_eq!(id, BundleMorphism::identity(&core(&a, &s, &j).unwrap()));
    }

    #[test]
    fn pullback_counts() {
        let base = FiniteBase::numbered(1);
        let a = AtlasPresentation::decomposed(&DimAssignment::uniform(3, 1), &base);
        let pb = pullback(&a).unwrap();
        assert_eq!(pb.atlas.dims().total(&set(&[1, 2, 3])), 6);
        let one = AtlasPresentation::decomposed(&DimAssignment::uniform(1, 2), &base);
        assert_eq!(pullback(&one).unwrap().atlas.dims().total(&set(&[1])), 0);
        let mut rng = random::rng(1);
        let t = random::twisted_atlas(&mut rng, &shape(3));
        assert!(pullback_certificate(&t, &pullback(&t).unwrap()).unwrap().passed());
    }

    #[test]
    fn ultracore_exactness() {
        let base = FiniteBase::numbered(1);
        let a = AtlasPresentation::decomposed(&DimAssignment::uniform(3, 1), &base);
        let mut rng = random::rng(3);
        let seq = ultracore_sequence(&a, 1, &mut rng, 2).unwrap();
        assert!(seq.certificate.passed());
        assert_eq!((seq.ultracore_dim, seq.pullback.atlas.dims().total(&set(&[1, 2, 3]))), (1, 6));
        let t = random::twisted_atlas(&mut rng, &random::AtlasShape { n: 4, max_dim: 1, charts: 2, points: 1 });
        let seq = ultracore_sequence(&t, 2, &mut rng, 2).unwrap();
        assert!(seq.certificate.passed(), "{:?}", seq.certificate);
        assert_eq!(seq.orderings_checked, 6);
    }
}
