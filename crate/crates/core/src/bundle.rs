//! Elements, fiber operations, faces and morphisms on top of a presentation.
//!
//! An element carries the chart it is expressed in; two elements are equal
//! when they agree after transport to the least chart of their point.

use crate::atlas::{AtlasPresentation, TransitionKey};
use crate::cubecat::{partitions, IndexSet, Partition};
use crate::error::{Error, Result};
use crate::exactlin::{zero_vector, Matrix, MultiTensor, Rational, Vector};
use crate::gauge::{add_over, check_coords, reindex_dims, scale_over, zero_coords, Coords, DimAssignment, Gauge};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(into = "ElementRepr", from = "ElementRepr")]
pub struct BundleElement {
    pub node: IndexSet,
    pub chart: String,
    pub point: String,
    pub components: Coords,
}

#[derive(Clone, Serialize, Deserialize)]
struct ComponentEntry {
    set: IndexSet,
    vector: Vector,
}

#[derive(Clone, Serialize, Deserialize)]
struct ElementRepr {
    node: IndexSet,
    chart: String,
    point: String,
    components: Vec<ComponentEntry>,
}

impl From<BundleElement> for ElementRepr {
    fn from(e: BundleElement) -> Self {
        let components = e.components.into_iter().map(|(set, vector)| ComponentEntry { set, vector }).collect();
        ElementRepr { node: e.node, chart: e.chart, point: e.point, components }
    }
}

impl From<ElementRepr> for BundleElement {
    fn from(r: ElementRepr) -> Self {
        let components = r.components.into_iter().map(|c| (c.set, c.vector)).collect();
        BundleElement { node: r.node, chart: r.chart, point: r.point, components }
    }
}

impl BundleElement {
    pub fn new(atlas: &AtlasPresentation, node: IndexSet, chart: &str, point: &str, components: Coords) -> Result<Self> {
        if !atlas.chart(chart)?.contains(point) {
            return Err(Error::InvalidArgument(format!("point {point:?} is not in chart {chart:?}")));
        }
        if !node.is_subset(&atlas.dims().top()) {
            return Err(Error::InvalidArgument(format!("node {node} outside [{}]", atlas.n())));
        }
        if !node.is_empty() {
            let found = check_coords(atlas.dims(), &components)?;
            if found != node {
                return Err(Error::DimensionMismatch(format!("components span {found}, node is {node}")));
            }
        } else if !components.is_empty() {
            return Err(Error::DimensionMismatch("components given at the base node".into()));
        }
        Ok(BundleElement { node, chart: chart.into(), point: point.into(), components })
    }

    pub fn zero(atlas: &AtlasPresentation, node: &IndexSet, chart: &str, point: &str) -> Result<Self> {
        BundleElement::new(atlas, node.clone(), chart, point, zero_coords(atlas.dims(), node))
    }

    pub fn component(&self, j: &IndexSet) -> &Vector {
        &self.components[j]
    }

    /// Drops every component containing `i`.
    pub fn project(&self, i: u32) -> Result<BundleElement> {
        if !self.node.contains(i) {
            return Err(Error::InvalidArgument(format!("{i} is not in node {}", self.node)));
        }
        Ok(BundleElement {
            node: self.node.without(i),
            chart: self.chart.clone(),
            point: self.point.clone(),
            components: self.components.iter().filter(|(j, _)| !j.contains(i)).map(|(j, v)| (j.clone(), v.clone())).collect(),
        })
    }

    /// Multiplies by `c` in the fiber over the `i`-face.
    pub fn scale(&self, c: &Rational, i: u32) -> Result<BundleElement> {
        if !self.node.contains(i) {
            return Err(Error::InvalidArgument(format!("{i} is not in node {}", self.node)));
        }
        Ok(BundleElement { components: scale_over(i, c, &self.components), ..self.clone() })
    }

    /// The iterated zero section from node `R` up to `S`.
    pub fn zero_lift(&self, dims: &DimAssignment, s: &IndexSet) -> Result<BundleElement> {
        if !self.node.is_subset(s) {
            return Err(Error::InvalidArgument(format!("{} is not a subset of {s}", self.node)));
        }
        let mut components = zero_coords(dims, s);
        for (j, v) in &self.components {
            components.insert(j.clone(), v.clone());
        }
        Ok(BundleElement { node: s.clone(), chart: self.chart.clone(), point: self.point.clone(), components })
    }
}

/// Expresses `e` in the chart `to`.
pub fn transport(atlas: &AtlasPresentation, e: &BundleElement, to: &str) -> Result<BundleElement> {
    if e.chart == to {
        return Ok(e.clone());
    }
    let t = atlas.transition(&e.chart, to, &e.point)?;
    let components = if e.node.is_empty() { Coords::new() } else { t.evaluate(&e.components)? };
    Ok(BundleElement { node: e.node.clone(), chart: to.into(), point: e.point.clone(), components })
}

pub fn canonical(atlas: &AtlasPresentation, e: &BundleElement) -> Result<BundleElement> {
    transport(atlas, e, atlas.canonical_chart(&e.point)?)
}

/// Equality of the underlying points of the bundle.
pub fn same(atlas: &AtlasPresentation, a: &BundleElement, b: &BundleElement) -> Result<bool> {
    if a.node != b.node || a.point != b.point {
        return Ok(false);
    }
    Ok(canonical(atlas, a)?.components == canonical(atlas, b)?.components)
}

/// `a +_i b` in the fiber over the `i`-face, computed in the chart of `a`.
pub fn add(atlas: &AtlasPresentation, a: &BundleElement, b: &BundleElement, i: u32) -> Result<BundleElement> {
    if a.node != b.node || a.point != b.point {
        return Err(Error::FiberMismatch("elements at different nodes or points".into()));
    }
    if !a.node.contains(i) {
        return Err(Error::InvalidArgument(format!("{i} is not in node {}", a.node)));
    }
    let b = transport(atlas, b, &a.chart)?;
    Ok(BundleElement { components: add_over(i, &a.components, &b.components)?, ..a.clone() })
}

pub fn scale(c: &Rational, e: &BundleElement, i: u32) -> Result<BundleElement> {
    e.scale(c, i)
}

pub fn project(e: &BundleElement, i: u32) -> Result<BundleElement> {
    e.project(i)
}

pub fn zero_lift(atlas: &AtlasPresentation, e: &BundleElement, s: &IndexSet) -> Result<BundleElement> {
    e.zero_lift(atlas.dims(), s)
}

/// Both sides of the interchange law `(d1 +_i d2) +_j (d3 +_i d4)` and
/// `(d1 +_j d3) +_i (d2 +_j d4)`.
pub fn interchange_sides(
    atlas: &AtlasPresentation,
    d: [&BundleElement; 4],
    i: u32,
    j: u32,
) -> Result<(BundleElement, BundleElement)> {
    let lhs = add(atlas, &add(atlas, d[0], d[1], i)?, &add(atlas, d[2], d[3], i)?, j)?;
    let rhs = add(atlas, &add(atlas, d[0], d[2], j)?, &add(atlas, d[1], d[3], j)?, i)?;
    Ok((lhs, rhs))
}

/// The matrix of a fiberwise linear map over the `k`-face, at the base element
/// given by the components of `base` not containing `k`. Columns are images of
/// the standard basis of the fiber coordinates (components containing `k`).
pub fn fiber_matrix(
    source: &DimAssignment,
    target: &DimAssignment,
    base: &Coords,
    k: u32,
    map: impl Fn(&Coords) -> Result<Coords>,
) -> Result<Matrix> {
    let src_slots: Vec<(IndexSet, usize)> = base.keys().filter(|j| j.contains(k)).map(|j| (j.clone(), source.get(j))).collect();
    let mut columns = Vec::new();
    let mut rows = None;
    let mut probe_base = base.clone();
    for (j, d) in &src_slots {
        probe_base.insert(j.clone(), zero_vector(*d));
    }
    for (j, d) in &src_slots {
        for x in 0..*d {
            let mut v = probe_base.clone();
            v.get_mut(j).unwrap()[x] = Rational::one();
            let out = map(&v)?;
            let col: Vector = out.iter().filter(|(l, _)| l.contains(k)).flat_map(|(_, y)| y.iter().cloned()).collect();
            rows = Some(col.len());
            columns.push(col);
        }
    }
    let rows = rows.unwrap_or_else(|| {
        base.keys().filter(|j| j.contains(k)).map(|j| target.get(j)).sum()
    });
    Matrix::from_columns(rows, &columns)
}

/// Coordinates of the `(I, J)`-face: node `K'` of the face (a subset of the
/// positions of `I \ J`) carries the concatenation of `V_{K u J'}` over `J' ⊆ J`,
/// `K` the image of `K'`, in subset order.
pub fn face_dims(dims: &DimAssignment, i: &IndexSet, j: &IndexSet) -> DimAssignment {
    let free = i.difference(j);
    let js = j.subsets();
    DimAssignment::from_fn(free.len(), |kp| {
        let k = free.pick(kp).expect("positions in range");
        js.iter().map(|jp| dims.get(&k.union(jp))).sum()
    })
}

fn face_embed(dims: &DimAssignment, i: &IndexSet, j: &IndexSet, param: &Coords, w: &Coords) -> Coords {
    let free = i.difference(j);
    let mut out = Coords::new();
    for l in i.nonempty_subsets() {
        if l.is_subset(j) {
            out.insert(l.clone(), param[&l].clone());
        }
    }
    for (kp, v) in w {
        let k = free.pick(kp).expect("positions in range");
        let mut off = 0;
        for jp in j.subsets() {
            let l = k.union(&jp);
            let d = dims.get(&l);
            out.insert(l, v[off..off + d].to_vec());
            off += d;
        }
    }
    out
}

fn face_extract(i: &IndexSet, j: &IndexSet, v: &Coords) -> Coords {
    let free = i.difference(j);
    free.nonempty_subsets()
        .into_iter()
        .map(|k| {
            let kp = free.positions_of(&k).expect("subset");
            let comp: Vector = j.subsets().iter().flat_map(|jp| v[&k.union(jp)].iter().cloned()).collect();
            (kp, comp)
        })
        .collect()
}

/// The `(I, J)`-face along the zero section of `E_J`; its base is the base of `A`.
pub fn face(atlas: &AtlasPresentation, i: &IndexSet, j: &IndexSet) -> Result<AtlasPresentation> {
    if !j.is_subset(i) || !i.is_subset(&atlas.dims().top()) {
        return Err(Error::InvalidArgument(format!("need J ⊆ I ⊆ [n], got J = {j}, I = {i}")));
    }
    if j.is_empty() {
        return atlas.reindex(&Partition::discrete(i));
    }
    face_along(atlas, i, j, &|p: &str| BundleElement::zero(atlas, j, atlas.canonical_chart(p)?, p))
}

/// The `(I, J)`-face restricted along a section of `E_J`, whose coordinates
/// enter the transitions as frozen parameters.
pub fn face_along(
    atlas: &AtlasPresentation,
    i: &IndexSet,
    j: &IndexSet,
    section: &dyn Fn(&str) -> Result<BundleElement>,
) -> Result<AtlasPresentation> {
    if !j.is_subset(i) || !i.is_subset(&atlas.dims().top()) {
        return Err(Error::InvalidArgument(format!("need J ⊆ I ⊆ [n], got J = {j}, I = {i}")));
    }
    let dims = atlas.dims();
    let fdims = face_dims(dims, i, j);
    let mut transitions = BTreeMap::new();
    for (key, t) in atlas.transitions() {
        let s = section(&key.point)?;
        if s.node != *j {
            return Err(Error::InvalidArgument(format!("section value at node {}, expected {j}", s.node)));
        }
        let param = transport(atlas, &s, &key.from)?.components;
        let g = Gauge::from_fn(&fdims, &fdims, |w| {
            let full = face_embed(dims, i, j, &param, w);
            Ok(face_extract(i, j, &t.evaluate(&full)?))
        })?;
        transitions.insert(key.clone(), g);
    }
    atlas.with_data(fdims, transitions)
}

/// Per chart and point, a gauge from source to target coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BundleMorphism {
    source_dims: DimAssignment,
    target_dims: DimAssignment,
    data: BTreeMap<(String, String), Gauge>,
}

impl BundleMorphism {
    pub fn new(source_dims: DimAssignment, target_dims: DimAssignment, data: BTreeMap<(String, String), Gauge>) -> Result<Self> {
        for g in data.values() {
            if g.source() != &source_dims || g.target() != &target_dims {
                return Err(Error::DimensionMismatch("morphism data with wrong dimensions".into()));
            }
        }
        Ok(BundleMorphism { source_dims, target_dims, data })
    }

    pub fn identity(atlas: &AtlasPresentation) -> Self {
        let id = Gauge::identity(atlas.dims());
        let data = atlas.cells().into_iter().map(|c| (c, id.clone())).collect();
        BundleMorphism { source_dims: atlas.dims().clone(), target_dims: atlas.dims().clone(), data }
    }

    /// Extends gauges given in the least chart of each point to every chart by naturality.
    pub fn transported(
        source: &AtlasPresentation,
        target: &AtlasPresentation,
        at_point: &BTreeMap<String, Gauge>,
    ) -> Result<Self> {
        let mut data = BTreeMap::new();
        for (chart, p) in source.cells() {
            let home = source.canonical_chart(&p)?;
            let g = at_point.get(&p).ok_or_else(|| Error::InvalidArgument(format!("no gauge at {p:?}")))?;
            let there = target.transition(home, &chart, &p)?.compose(&g.compose(&*source.transition(&chart, home, &p)?)?)?;
            data.insert((chart, p), there);
        }
        BundleMorphism::new(source.dims().clone(), target.dims().clone(), data)
    }

    pub fn source_dims(&self) -> &DimAssignment {
        &self.source_dims
    }

    pub fn target_dims(&self) -> &DimAssignment {
        &self.target_dims
    }

    pub fn data(&self) -> &BTreeMap<(String, String), Gauge> {
        &self.data
    }

    pub fn at(&self, chart: &str, point: &str) -> Result<&Gauge> {
        self.data
            .get(&(chart.to_string(), point.to_string()))
            .ok_or_else(|| Error::InvalidArgument(format!("no morphism data at ({chart}, {point})")))
    }

    pub fn apply(&self, e: &BundleElement) -> Result<BundleElement> {
        let g = self.at(&e.chart, &e.point)?;
        let components = if e.node.is_empty() { Coords::new() } else { g.evaluate(&e.components)? };
        Ok(BundleElement { components, ..e.clone() })
    }

    /// `self . first`.
    pub fn compose(&self, first: &BundleMorphism) -> Result<BundleMorphism> {
        if first.target_dims != self.source_dims || first.data.len() != self.data.len() {
            return Err(Error::DimensionMismatch("morphisms do not compose".into()));
        }
        let data = first
            .data
            .iter()
            .map(|(cell, f)| {
                let g = self.data.get(cell).ok_or_else(|| Error::Incompatible(format!("no data at {cell:?}")))?;
                Ok((cell.clone(), g.compose(f)?))
            })
            .collect::<Result<_>>()?;
        Ok(BundleMorphism { source_dims: first.source_dims.clone(), target_dims: self.target_dims.clone(), data })
    }

    /// Chartwise inverse.
    pub fn invert(&self) -> Result<BundleMorphism> {
        let data = self.data.iter().map(|(c, g)| Ok((c.clone(), g.invert()?))).collect::<Result<_>>()?;
        Ok(BundleMorphism { source_dims: self.target_dims.clone(), target_dims: self.source_dims.clone(), data })
    }

    /// Reindexes source and target along a partition of a subset of `[n]`.
    pub fn reindex(&self, rho: &Partition) -> Result<BundleMorphism> {
        let data = self.data.iter().map(|(c, g)| Ok((c.clone(), g.reindex(rho)?))).collect::<Result<_>>()?;
        Ok(BundleMorphism {
            source_dims: reindex_dims(&self.source_dims, rho)?,
            target_dims: reindex_dims(&self.target_dims, rho)?,
            data,
        })
    }

    /// Components where `t^target_{b,a} . data_a != data_b . t^source_{b,a}`.
    pub fn naturality_failures(&self, source: &AtlasPresentation, target: &AtlasPresentation) -> Result<Vec<(TransitionKey, Partition)>> {
        if source.charts() != target.charts() {
            return Err(Error::Incompatible("morphisms need a shared chart index set".into()));
        }
        let mut bad = Vec::new();
        for a in source.charts() {
            for b in source.charts() {
                for p in a.domain.iter().filter(|p| b.contains(p)) {
                    let lhs = target.transition(&a.id, &b.id, p)?.compose(self.at(&a.id, p)?)?;
                    let rhs = self.at(&b.id, p)?.compose(&*source.transition(&a.id, &b.id, p)?)?;
                    for (rho, t) in lhs.components() {
                        if rhs.component(rho) != t {
                            bad.push((TransitionKey::new(&a.id, &b.id, p), rho.clone()));
                        }
                    }
                }
            }
        }
        Ok(bad)
    }

    pub fn check_natural(&self, source: &AtlasPresentation, target: &AtlasPresentation) -> Result<()> {
        match self.naturality_failures(source, target)?.into_iter().next() {
            None => Ok(()),
            Some((key, rho)) => Err(Error::NotNatural { chart: key.to, point: key.point, target: rho.ground().clone(), blocks: rho }),
        }
    }
}

/// Layout of the Hom bundle: node `J` stacks, for each partition `rho` of `J`
/// in enumeration order, the entries of a tensor `V^E_{rho blocks} -> V^F_J`.
pub fn hom_dims(e: &DimAssignment, f: &DimAssignment) -> Result<DimAssignment> {
    if e.n() != f.n() {
        return Err(Error::DimensionMismatch("Hom of bundles over different cubes".into()));
    }
    Ok(DimAssignment::from_fn(e.n(), |j| {
        partitions(j).unwrap().iter().map(|rho| f.get(j) * e.block_dims(rho).iter().product::<usize>()).sum()
    }))
}

/// The Hom bundle in decomposed form (a single chart covering the base).
pub fn hom_bundle(e: &AtlasPresentation, f: &AtlasPresentation) -> Result<AtlasPresentation> {
    if e.base() != f.base() {
        return Err(Error::Incompatible("Hom of bundles over different bases".into()));
    }
    Ok(AtlasPresentation::decomposed(&hom_dims(e.dims(), f.dims())?, e.base()))
}

/// Unpacks a Hom element at node `I` into a gauge on the subsets of `I`
/// (zero elsewhere), relative to the least charts of its point.
pub fn hom_to_gauge(e: &DimAssignment, f: &DimAssignment, h: &BundleElement) -> Result<Gauge> {
    let mut g = Gauge::zero(e, f)?;
    for (j, v) in &h.components {
        let mut off = 0;
        for rho in partitions(j)? {
            let dims = e.block_dims(&rho);
            let len = f.get(j) * dims.iter().product::<usize>();
            g.set_component(&rho, MultiTensor::new(f.get(j), dims, v[off..off + len].to_vec())?)?;
            off += len;
        }
    }
    Ok(g)
}

/// Packs the components of `g` on subsets of `node` into Hom coordinates.
pub fn gauge_to_hom(g: &Gauge, node: &IndexSet) -> Coords {
    node.nonempty_subsets()
        .into_iter()
        .map(|j| {
            let v: Vector = partitions(&j).unwrap().iter().flat_map(|rho| g.component(rho).entries().iter().cloned()).collect();
            (j, v)
        })
        .collect()
}

/// Applies a Hom element to an element of `E` at the same node and point.
/// Both are read in the least chart; the result is in `F`'s least chart.
pub fn hom_evaluate(
    e_atlas: &AtlasPresentation,
    f_atlas: &AtlasPresentation,
    h: &BundleElement,
    x: &BundleElement,
) -> Result<BundleElement> {
    if h.node != x.node || h.point != x.point {
        return Err(Error::FiberMismatch("Hom element and argument over different nodes or points".into()));
    }
    let g = hom_to_gauge(e_atlas.dims(), f_atlas.dims(), h)?;
    let x = canonical(e_atlas, x)?;
    let chart = f_atlas.canonical_chart(&x.point)?;
    let components = if x.node.is_empty() { Coords::new() } else { g.evaluate(&x.components)? };
    BundleElement::new(f_atlas, x.node.clone(), chart, &x.point, components)
}

/// Tangent prolongation over a discrete base: index `n+1` carries the
/// tangent direction, `V'_{J u {n+1}} = V_J` and `V'_{{n+1}} = 0`. By the
/// product rule the component on `rho` with `n+1` adjoined to one block is
/// the original component on `rho`; base derivatives vanish.
pub fn tangent_prolongation(atlas: &AtlasPresentation) -> Result<AtlasPresentation> {
    let n = atlas.n();
    let t = n as u32 + 1;
    let dims = atlas.dims();
    let tdims = DimAssignment::from_fn(n + 1, |j| {
        if j.contains(t) { dims.get(&j.without(t)) } else { dims.get(j) }
    });
    let mut transitions = BTreeMap::new();
    for (key, g) in atlas.transitions() {
        let mut h = Gauge::zero(&tdims, &tdims)?;
        for (rho, comp) in g.components() {
            h.set_component(rho, comp.clone())?;
            for b in 0..rho.len() {
                let mut blocks = rho.blocks().to_vec();
                blocks[b] = blocks[b].with(t);
                h.set_component(&Partition::new(blocks)?, comp.clone())?;
            }
        }
        transitions.insert(key.clone(), h);
    }
    atlas.with_data(tdims, transitions)
}

/// The derivative direction of a prolonged element: components `J u {n+1}`.
pub fn tangent_part(e: &BundleElement, t: u32) -> Coords {
    e.components.iter().filter(|(j, _)| j.contains(t)).map(|(j, v)| (j.without(t), v.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::FiniteBase;
    use crate::random;

    fn set(v: &[u32]) -> IndexSet {
        IndexSet::new(v.iter().copied()).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn projection_examples() {
        let a = AtlasPresentation::decomposed(&DimAssignment::uniform(2, 1), &FiniteBase::numbered(1));
        let comps: Coords = [(set(&[1]), vec![q(1)]), (set(&[2]), vec![q(2)]), (set(&[1, 2]), vec![q(3)])].into_iter().collect();
        let e = BundleElement::new(&a, set(&[1, 2]), "U", "p0", comps).unwrap();
        let p = e.project(1).unwrap();
        assert_eq!(p.components, [(set(&[2]), vec![q(2)])].into_iter().collect());
        assert_eq!(e.project(1).unwrap().project(2).unwrap(), e.project(2).unwrap().project(1).unwrap());
        let z = BundleElement::zero(&a, &set(&[1, 2]), "U", "p0").unwrap();
        assert_eq!(z.project(2).unwrap(), BundleElement::zero(&a, &set(&[1]), "U", "p0").unwrap());
        assert!(e.project(1).unwrap().project(1).is_err());
        assert_eq!(e.scale(&q(0), 2).unwrap().components[&set(&[1, 2])], vec![q(0)]);
    }

    #[test]
    fn zero_lift_examples() {
        let mut rng = random::rng(3);
        let a = random::twisted_atlas(&mut rng, &random::AtlasShape { n: 3, max_dim: 2, charts: 2, points: 2 });
        let r = set(&[1]);
        let e = BundleElement::new(&a, r.clone(), "c0", "p0", random::coords(&mut rng, a.dims(), &r)).unwrap();
        assert_eq!(zero_lift(&a, &e, &r).unwrap(), e);
        let via2 = zero_lift(&a, &zero_lift(&a, &e, &set(&[1, 2])).unwrap(), &set(&[1, 2, 3])).unwrap();
        let via3 = zero_lift(&a, &zero_lift(&a, &e, &set(&[1, 3])).unwrap(), &set(&[1, 2, 3])).unwrap();
        assert_eq!(via2, via3);
        let s = set(&[1, 2, 3]);
        assert_eq!(zero_lift(&a, &e, &s).unwrap().project(2).unwrap(), zero_lift(&a, &e, &set(&[1, 3])).unwrap());
        assert!(zero_lift(&a, &e, &set(&[2])).is_err());
        // Zero sections are intrinsic: transporting a zero lift gives the zero lift of the transport.
        let moved = transport(&a, &zero_lift(&a, &e, &s).unwrap(), "c1").unwrap();
        assert_eq!(moved, zero_lift(&a, &transport(&a, &e, "c1").unwrap(), &s).unwrap());
    }

    #[test]
    fn add_is_chart_independent() {
        let mut rng = random::rng(5);
        let a = random::twisted_atlas(&mut rng, &random::AtlasShape { n: 2, max_dim: 2, charts: 2, points: 1 });
        let node = set(&[1, 2]);
        let x = BundleElement::new(&a, node.clone(), "c0", "p0", random::coords(&mut rng, a.dims(), &node)).unwrap();
        let mut y = x.clone();
        for (j, v) in y.components.iter_mut() {
            if j.contains(1) {
                *v = random::vector(&mut rng, v.len());
            }
        }
        let y_moved = transport(&a, &y, "c1").unwrap();
        let in_a = add(&a, &x, &y_moved, 1).unwrap();
        let in_b = add(&a, &transport(&a, &x, "c1").unwrap(), &y_moved, 1).unwrap();
        assert!(same(&a, &in_a, &in_b).unwrap());
        assert!(add(&a, &x, &y, 2).is_err() || x.components == y.components);
    }

    #[test]
    fn faces() {
        let base = FiniteBase::numbered(1);
        let d = DimAssignment::uniform(3, 1);
        let a = AtlasPresentation::decomposed(&d, &base);
        assert_eq!(face(&a, &set(&[1, 2, 3]), &IndexSet::empty()).unwrap(), a);
        let f = face(&a, &set(&[1, 2]), &IndexSet::empty()).unwrap();
        assert_eq!(f.dims(), &DimAssignment::uniform(2, 1));
        let top = face(&a, &set(&[1, 2]), &set(&[1, 2])).unwrap();
        assert_eq!(top.n(), 0);
        let mut rng = random::rng(9);
        let t = random::twisted_atlas(&mut rng, &random::AtlasShape { n: 3, max_dim: 2, charts: 2, points: 2 });
        for (i, j) in [(set(&[1, 2, 3]), set(&[3])), (set(&[1, 3]), set(&[1])), (set(&[2, 3]), IndexSet::empty())] {
            assert!(face(&t, &i, &j).unwrap().validate().is_valid());
        }
        let via_probe = face_along(&t, &set(&[1, 2]), &IndexSet::empty(), &|p: &str| BundleElement::zero(&t, &IndexSet::empty(), t.canonical_chart(p)?, p)).unwrap();
        assert_eq!(via_probe, face(&t, &set(&[1, 2]), &IndexSet::empty()).unwrap());
        let p0 = random::coords(&mut rng, t.dims(), &set(&[3]));
        let sec = move |p: &str| BundleElement::new(&t, set(&[3]), "c0", p, p0.clone());
        let t2 = random::twisted_atlas(&mut random::rng(9), &random::AtlasShape { n: 3, max_dim: 2, charts: 2, points: 2 });
        assert!(face_along(&t2, &set(&[1, 2, 3]), &set(&[3]), &sec).unwrap().validate().is_valid());
    }

    #[test]
    fn hom_dimensions() {
        let base = FiniteBase::numbered(1);
        let e = AtlasPresentation::decomposed(&DimAssignment::uniform(1, 2), &base);
        let f = AtlasPresentation::decomposed(&DimAssignment::uniform(1, 3), &base);
        assert_eq!(hom_bundle(&e, &f).unwrap().dims().get(&set(&[1])), 6);
        let e = AtlasPresentation::decomposed(&DimAssignment::uniform(2, 1), &base);
        let h = hom_bundle(&e, &e).unwrap();
        assert_eq!(h.dims().total(&set(&[1, 2])), 4);
    }

    #[test]
    fn tangent_examples() {
        let base = FiniteBase::numbered(2);
        let a = AtlasPresentation::decomposed(&DimAssignment::uniform(1, 1), &base);
        let t = tangent_prolongation(&a).unwrap();
        assert_eq!(t.dims().get(&set(&[1])), 1);
        assert_eq!(t.dims().get(&set(&[2])), 0);
        assert_eq!(t.dims().get(&set(&[1, 2])), 1);
        let mut rng = random::rng(21);
        let tw = random::twisted_atlas(&mut rng, &random::AtlasShape { n: 2, max_dim: 2, charts: 2, points: 2 });
        assert!(tangent_prolongation(&tw).unwrap().validate().is_valid());
    }
}
