//! Partition-indexed families of multilinear maps.
//!
//! A gauge `g` between two dimension assignments over the `n`-cube acts on
//! decomposed coordinates `v = (v_J)` by
//!
//! ```text
//! g(v)_J = sum over partitions {J_1..J_k} of J of  g[J, {J_1..J_k}](v_{J_1}, ..., v_{J_k})
//! ```
//!
//! This is the form of every chart change, statomorphism and (with arbitrary
//! linear parts) every morphism of multiple vector bundles over a point.
//!
//! Composition expands `(g . f)[J, rho]` as a sum over the coarsenings `sigma`
//! of `rho`: the outer factor is `g[J, sigma]`, and the inner factor for a block
//! `K` of `sigma` is `f[K, rho|K]`.
//!
//! Inversion solves `g . f = id` by recursion on the number of blocks. For a
//! one-block `rho` the equation reads `g[J,{J}] f[J,{J}] = id`. For `rho` with
//! `k >= 2` blocks the coarsening `{J}` contributes `g[J,{J}] f[J,rho]`, and every
//! other coarsening has blocks `K` strictly inside `J`, whose restrictions
//! `rho|K` have fewer than `k` blocks. Those inner factors are already known, so
//! `f[J,rho] = -g[J,{J}]^-1 (sum of the remaining terms)` is triangular.

use crate::cubecat::{partitions, IndexSet, Partition};
use crate::error::{Error, Result};
use crate::exactlin::{add_vectors, multi_indices, unit_vector, zero_vector, Matrix, MultiTensor, Rational, Vector};
use std::collections::BTreeMap;

/// Decomposed coordinates: one vector per nonempty subset of a node.
pub type Coords = BTreeMap<IndexSet, Vector>;

/// Dimensions of the building spaces `V_J` for every nonempty `J` of `[n]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DimAssignment {
    n: usize,
    dims: BTreeMap<IndexSet, usize>,
}

impl DimAssignment {
    pub fn new(n: usize, dims: BTreeMap<IndexSet, usize>) -> Result<Self> {
        let expected = IndexSet::range(n).nonempty_subsets();
        for j in &expected {
            if !dims.contains_key(j) {
                return Err(Error::Structural(format!("missing dimension for {j}")));
            }
        }
        if dims.len() != expected.len() {
            let extra = dims.keys().find(|k| !expected.contains(k)).cloned().unwrap_or_default();
            return Err(Error::Structural(format!("dimension given for {extra}, outside [{n}]")));
        }
        Ok(DimAssignment { n, dims })
    }

    pub fn from_fn(n: usize, f: impl Fn(&IndexSet) -> usize) -> Self {
        let dims = IndexSet::range(n).nonempty_subsets().into_iter().map(|j| (j.clone(), f(&j))).collect();
        DimAssignment { n, dims }
    }

    pub fn uniform(n: usize, d: usize) -> Self {
        DimAssignment::from_fn(n, |_| d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of `V_J`; zero for the empty set.
    pub fn get(&self, j: &IndexSet) -> usize {
        if j.is_empty() {
            return 0;
        }
        *self.dims.get(j).unwrap_or_else(|| panic!("{j} is not a subset of [{}]", self.n))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IndexSet, usize)> {
        self.dims.iter().map(|(k, v)| (k, *v))
    }

    /// Nonempty subsets of `[n]` in enumeration order.
    pub fn sets(&self) -> Vec<IndexSet> {
        IndexSet::range(self.n).nonempty_subsets()
    }

    /// Total fiber dimension of the node `I` over the base.
    pub fn total(&self, node: &IndexSet) -> usize {
        node.nonempty_subsets().iter().map(|j| self.get(j)).sum()
    }

    pub fn block_dims(&self, rho: &Partition) -> Vec<usize> {
        rho.blocks().iter().map(|b| self.get(b)).collect()
    }

    pub fn top(&self) -> IndexSet {
        IndexSet::range(self.n)
    }

    /// The assignment with `V_J` replaced by `d` for a single `J`.
    pub fn with(&self, j: &IndexSet, d: usize) -> DimAssignment {
        let mut out = self.clone();
        out.dims.insert(j.clone(), d);
        out
    }
}

/// Zero coordinates at the node `I`.
pub fn zero_coords(dims: &DimAssignment, node: &IndexSet) -> Coords {
    node.nonempty_subsets().into_iter().map(|j| {
        let d = dims.get(&j);
        (j, zero_vector(d))
    }).collect()
}

/// The node spanned by a coordinate family.
pub fn node_of(v: &Coords) -> IndexSet {
    v.keys().fold(IndexSet::empty(), |acc, k| acc.union(k))
}

pub fn check_coords(dims: &DimAssignment, v: &Coords) -> Result<IndexSet> {
    let node = node_of(v);
    if !node.is_subset(&dims.top()) {
        return Err(Error::DimensionMismatch(format!("node {node} outside [{}]", dims.n())));
    }
    let sets = node.nonempty_subsets();
    if sets.len() != v.len() {
        return Err(Error::DimensionMismatch(format!("coordinates do not cover all subsets of {node}")));
    }
    for j in &sets {
        match v.get(j) {
            Some(x) if x.len() == dims.get(j) => {}
            Some(x) => {
                return Err(Error::DimensionMismatch(format!(
                    "component {j} has length {}, expected {}",
                    x.len(),
                    dims.get(j)
                )))
            }
            None => return Err(Error::DimensionMismatch(format!("missing component {j}"))),
        }
    }
    Ok(node)
}

/// Adds two coordinate families in the fiber over the `i`-face: components
/// containing `i` are summed, the others must agree and are copied.
pub fn add_over(i: u32, u: &Coords, w: &Coords) -> Result<Coords> {
    if u.keys().ne(w.keys()) {
        return Err(Error::FiberMismatch("different nodes".into()));
    }
    let mut out = Coords::new();
    for (j, x) in u {
        let y = &w[j];
        if j.contains(i) {
            out.insert(j.clone(), add_vectors(x, y));
        } else if x == y {
            out.insert(j.clone(), x.clone());
        } else {
            return Err(Error::FiberMismatch(format!("components at {j} differ")));
        }
    }
    Ok(out)
}

/// Scales the components containing `i`.
pub fn scale_over(i: u32, c: &Rational, u: &Coords) -> Coords {
    u.iter()
        .map(|(j, x)| {
            let y = if j.contains(i) { x.iter().map(|a| c * a).collect() } else { x.clone() };
            (j.clone(), y)
        })
        .collect()
}

/// A partition-indexed family of multilinear maps between decomposed coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gauge {
    source: DimAssignment,
    target: DimAssignment,
    components: BTreeMap<Partition, MultiTensor>,
}

impl Gauge {
    pub fn zero(source: &DimAssignment, target: &DimAssignment) -> Result<Gauge> {
        if source.n() != target.n() {
            return Err(Error::DimensionMismatch(format!(
                "source cube [{}] and target cube [{}] differ",
                source.n(),
                target.n()
            )));
        }
        let mut components = BTreeMap::new();
        for j in source.sets() {
            for rho in partitions(&j)? {
                let t = MultiTensor::zeros(target.get(&j), source.block_dims(&rho));
                components.insert(rho, t);
            }
        }
        Ok(Gauge { source: source.clone(), target: target.clone(), components })
    }

    pub fn identity(dims: &DimAssignment) -> Gauge {
        let mut g = Gauge::zero(dims, dims).expect("same cube");
        for j in dims.sets() {
            g.components.insert(Partition::trivial(&j), MultiTensor::identity(dims.get(&j)));
        }
        g
    }

    /// Builds a gauge from explicit components; absent components are zero.
    pub fn from_components(
        source: &DimAssignment,
        target: &DimAssignment,
        components: impl IntoIterator<Item = (Partition, MultiTensor)>,
    ) -> Result<Gauge> {
        let mut g = Gauge::zero(source, target)?;
        for (rho, t) in components {
            g.set_component(&rho, t)?;
        }
        Ok(g)
    }

    /// The block-diagonal gauge with the given linear parts.
    pub fn block_diagonal(
        source: &DimAssignment,
        target: &DimAssignment,
        linear: impl Fn(&IndexSet) -> Matrix,
    ) -> Result<Gauge> {
        let mut g = Gauge::zero(source, target)?;
        for j in source.sets() {
            g.set_component(&Partition::trivial(&j), MultiTensor::from_matrix(&linear(&j)))?;
        }
        Ok(g)
    }

    pub fn source(&self) -> &DimAssignment {
        &self.source
    }

    pub fn target(&self) -> &DimAssignment {
        &self.target
    }

    pub fn n(&self) -> usize {
        self.source.n()
    }

    pub fn components(&self) -> &BTreeMap<Partition, MultiTensor> {
        &self.components
    }

    pub fn component(&self, rho: &Partition) -> &MultiTensor {
        self.components.get(rho).unwrap_or_else(|| panic!("no component {rho}"))
    }

    pub fn set_component(&mut self, rho: &Partition, t: MultiTensor) -> Result<()> {
        let slot = self
            .components
            .get_mut(rho)
            .ok_or_else(|| Error::DimensionMismatch(format!("{rho} is not a partition of a subset of [{}]", self.source.n())))?;
        if slot.out_dim() != t.out_dim() || slot.in_dims() != t.in_dims() {
            return Err(Error::DimensionMismatch(format!(
                "component {} {rho}: expected shape {}x{:?}, got {}x{:?}",
                rho.ground(),
                slot.out_dim(),
                slot.in_dims(),
                t.out_dim(),
                t.in_dims()
            )));
        }
        *slot = t;
        Ok(())
    }

    /// The linear part `g[J, {J}]` as a matrix.
    pub fn linear(&self, j: &IndexSet) -> Matrix {
        self.component(&Partition::trivial(j)).to_matrix().expect("one block")
    }

    pub fn linear_part(&self) -> Gauge {
        let mut g = Gauge::zero(&self.source, &self.target).expect("same cube");
        for j in self.source.sets() {
            let p = Partition::trivial(&j);
            g.components.insert(p.clone(), self.component(&p).clone());
        }
        g
    }

    /// True when every component on a partition with two or more blocks vanishes.
    pub fn is_block_diagonal(&self) -> bool {
        self.components.iter().all(|(rho, t)| rho.is_trivial() || t.is_zero())
    }

    /// Every trivial-partition component is the identity matrix.
    pub fn is_statomorphism(&self) -> bool {
        self.source == self.target
            && self.source.sets().iter().all(|j| self.linear(j).is_identity())
    }

    pub fn is_identity(&self) -> bool {
        self.is_statomorphism() && self.is_block_diagonal()
    }

    pub fn evaluate(&self, v: &Coords) -> Result<Coords> {
        let node = check_coords(&self.source, v)?;
        let mut out = Coords::new();
        for j in node.nonempty_subsets() {
            let mut acc = zero_vector(self.target.get(&j));
            for rho in partitions(&j)? {
                let t = self.component(&rho);
                if t.is_zero() {
                    continue;
                }
                let args: Vec<&[Rational]> = rho.blocks().iter().map(|b| v[b].as_slice()).collect();
                acc = add_vectors(&acc, &t.apply(&args)?);
            }
            out.insert(j, acc);
        }
        Ok(out)
    }

    /// `self . f`: first `f`, then `self`.
    pub fn compose(&self, f: &Gauge) -> Result<Gauge> {
        if f.target != self.source {
            return Err(Error::DimensionMismatch("composing gauges with unequal middle dimensions".into()));
        }
        let mut h = Gauge::zero(&f.source, &self.target)?;
        let keys: Vec<Partition> = h.components.keys().cloned().collect();
        for rho in keys {
            let mut acc = MultiTensor::zeros(self.target.get(rho.ground()), f.source.block_dims(&rho));
            for (pi, sigma) in rho.coarsenings() {
                let outer = self.component(&sigma);
                if outer.is_zero() {
                    continue;
                }
                acc = acc.add(&composition_term(outer, &rho, &pi, |p| f.component(p))?)?;
            }
            h.components.insert(rho, acc);
        }
        Ok(h)
    }

    /// Two-sided inverse, or the first `J` whose linear part is singular.
    pub fn invert(&self) -> Result<Gauge> {
        if self.source.n() != self.target.n() {
            return Err(Error::DimensionMismatch("inverting a gauge between different cubes".into()));
        }
        let mut f = Gauge::zero(&self.target, &self.source)?;
        let mut lin_inv: BTreeMap<IndexSet, Matrix> = BTreeMap::new();
        for j in self.source.sets() {
            let inv = self.linear(&j).inverse().map_err(|e| match e {
                Error::Singular | Error::DimensionMismatch(_) => Error::NotInvertible(j.clone()),
                other => other,
            })?;
            f.components.insert(Partition::trivial(&j), MultiTensor::from_matrix(&inv));
            lin_inv.insert(j, inv);
        }
        let mut by_blocks: Vec<Partition> = f.components.keys().filter(|p| !p.is_trivial()).cloned().collect();
        by_blocks.sort_by_key(|p| p.len());
        for rho in by_blocks {
            let j = rho.ground().clone();
            let mut acc = MultiTensor::zeros(self.source.get(&j), self.target.block_dims(&rho));
            for (pi, sigma) in rho.coarsenings() {
                if sigma.is_trivial() {
                    continue;
                }
                let outer = self.component(&sigma);
                if outer.is_zero() {
                    continue;
                }
                acc = acc.add(&composition_term(outer, &rho, &pi, |p| f.component(p))?)?;
            }
            let t = acc.map_output(&lin_inv[&j].scale(&Rational::from_int(-1)))?;
            f.components.insert(rho, t);
        }
        Ok(f)
    }

    /// Extracts the gauge of a map known to have gauge form, by probing
    /// basis inputs: with exactly the blocks of `rho` nonzero, only the
    /// `rho` term survives in the output at `J = ground(rho)`.
    pub fn from_fn(
        source: &DimAssignment,
        target: &DimAssignment,
        map: impl Fn(&Coords) -> Result<Coords>,
    ) -> Result<Gauge> {
        let mut g = Gauge::zero(source, target)?;
        let top = source.top();
        let base = zero_coords(source, &top);
        let keys: Vec<Partition> = g.components.keys().cloned().collect();
        for rho in keys {
            let j = rho.ground().clone();
            let dims = source.block_dims(&rho);
            let mut t = MultiTensor::zeros(target.get(&j), dims.clone());
            if t.out_dim() > 0 {
                for idx in multi_indices(&dims) {
                    let mut v = base.clone();
                    for (b, &x) in rho.blocks().iter().zip(&idx) {
                        v.insert(b.clone(), unit_vector(source.get(b), x));
                    }
                    let out = map(&v)?;
                    let col = out.get(&j).ok_or_else(|| Error::DimensionMismatch(format!("probe output lacks {j}")))?;
                    t.set_column(&idx, col);
                }
            }
            g.components.insert(rho, t);
        }
        Ok(g)
    }

    /// Reindexes along a partition `rho` of a subset of `[n]`: the result lives on
    /// the cube of block positions, with component `[nu, pi]` taken from
    /// `self[[nu], {[pi_1], ...}]`.
    pub fn reindex(&self, rho: &Partition) -> Result<Gauge> {
        let k = rho.len();
        let src = reindex_dims(&self.source, rho)?;
        let tgt = reindex_dims(&self.target, rho)?;
        let mut g = Gauge::zero(&src, &tgt)?;
        let keys: Vec<Partition> = g.components.keys().cloned().collect();
        for pi in keys {
            let expanded = rho.expand(&pi)?;
            g.components.insert(pi, self.component(&expanded).clone());
        }
        debug_assert_eq!(g.n(), k);
        Ok(g)
    }

    /// Relabels indices by a bijection `perm` of `[n]` (`perm[i-1]` is the new label of `i`).
    /// Tensor inputs are permuted back to canonical block order.
    pub fn relabel(&self, perm: &[u32]) -> Result<Gauge> {
        let src = relabel_dims(&self.source, perm)?;
        let tgt = relabel_dims(&self.target, perm)?;
        let mut g = Gauge::zero(&src, &tgt)?;
        for (rho, t) in &self.components {
            let (new_rho, order) = relabel_partition(rho, perm)?;
            g.set_component(&new_rho, permute_inputs(t, &order))?;
        }
        Ok(g)
    }
}

/// One term of the composition sum: the outer tensor on the coarsening given by
/// `pi`, fed with the inner tensors `inner(rho|K)` for each block `K`.
fn composition_term<'a>(
    outer: &MultiTensor,
    rho: &Partition,
    pi: &Partition,
    inner: impl Fn(&Partition) -> &'a MultiTensor,
) -> Result<MultiTensor> {
    let restricted: Vec<(Vec<usize>, &MultiTensor)> = pi
        .blocks()
        .iter()
        .map(|positions| {
            let sub = Partition::new(positions.iter().map(|p| rho.blocks()[p as usize - 1].clone()).collect())
                .expect("sub-family of a partition");
            let pos: Vec<usize> = positions.iter().map(|p| p as usize - 1).collect();
            (pos, inner(&sub))
        })
        .collect();
    let dims = rho_dims(&restricted, rho.len());
    if restricted.iter().any(|(_, t)| t.is_zero()) {
        return Ok(MultiTensor::zeros(outer.out_dim(), dims));
    }
    let mut out = MultiTensor::zeros(outer.out_dim(), dims.clone());
    if outer.out_dim() == 0 {
        return Ok(out);
    }
    for idx in multi_indices(&dims) {
        let cols: Vec<Vector> = restricted
            .iter()
            .map(|(pos, t)| {
                let sub_idx: Vec<usize> = pos.iter().map(|&p| idx[p]).collect();
                t.column(&sub_idx)
            })
            .collect();
        let args: Vec<&[Rational]> = cols.iter().map(|c| c.as_slice()).collect();
        out.set_column(&idx, &outer.apply(&args)?);
    }
    Ok(out)
}

fn rho_dims(restricted: &[(Vec<usize>, &MultiTensor)], k: usize) -> Vec<usize> {
    let mut dims = vec![0; k];
    for (pos, t) in restricted {
        for (p, d) in pos.iter().zip(t.in_dims()) {
            dims[*p] = *d;
        }
    }
    dims
}

/// Dimensions on the cube of block positions of `rho`: `nu -> dims([nu])`.
pub fn reindex_dims(dims: &DimAssignment, rho: &Partition) -> Result<DimAssignment> {
    if !rho.ground().is_subset(&dims.top()) {
        return Err(Error::InvalidPartition(format!("{rho} is not a partition of a subset of [{}]", dims.n())));
    }
    let k = rho.len();
    Ok(DimAssignment::from_fn(k, |nu| dims.get(&rho.union_of(nu).expect("positions in range"))))
}

pub fn relabel_set(set: &IndexSet, perm: &[u32]) -> Result<IndexSet> {
    IndexSet::new(set.iter().map(|i| perm.get(i as usize - 1).copied().unwrap_or(0)))
        .map_err(|_| Error::InvalidArgument("relabeling is not a bijection of [n]".into()))
}

fn check_perm(perm: &[u32]) -> Result<()> {
    let s = IndexSet::new(perm.iter().copied()).map_err(|_| Error::InvalidArgument("not a permutation".into()))?;
    if s != IndexSet::range(perm.len()) {
        return Err(Error::InvalidArgument("not a permutation".into()));
    }
    Ok(())
}

pub fn relabel_dims(dims: &DimAssignment, perm: &[u32]) -> Result<DimAssignment> {
    check_perm(perm)?;
    if perm.len() != dims.n() {
        return Err(Error::InvalidArgument("permutation length differs from n".into()));
    }
    let mut map = BTreeMap::new();
    for (j, d) in dims.iter() {
        map.insert(relabel_set(j, perm)?, d);
    }
    DimAssignment::new(dims.n(), map)
}

/// The relabeled partition, and for each of its blocks the position of the old block.
fn relabel_partition(rho: &Partition, perm: &[u32]) -> Result<(Partition, Vec<usize>)> {
    let blocks: Vec<IndexSet> = rho.blocks().iter().map(|b| relabel_set(b, perm)).collect::<Result<_>>()?;
    let new = Partition::new(blocks.clone())?;
    let order = new.blocks().iter().map(|b| blocks.iter().position(|c| c == b).expect("same blocks")).collect();
    Ok((new, order))
}

/// The tensor whose input slot `s` is the old slot `order[s]`.
pub fn permute_inputs(t: &MultiTensor, order: &[usize]) -> MultiTensor {
    let new_dims: Vec<usize> = order.iter().map(|&o| t.in_dims()[o]).collect();
    let mut out = MultiTensor::zeros(t.out_dim(), new_dims.clone());
    for idx in multi_indices(&new_dims) {
        let mut old = vec![0; idx.len()];
        for (s, &o) in order.iter().enumerate() {
            old[o] = idx[s];
        }
        out.set_column(&idx, &t.column(&old));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn set(v: &[u32]) -> IndexSet {
        IndexSet::new(v.iter().copied()).unwrap()
    }

    fn pair() -> Partition {
        Partition::discrete(&set(&[1, 2]))
    }

    fn scalar(x: i64) -> MultiTensor {
        MultiTensor::new(1, vec![1, 1], vec![q(x)]).unwrap()
    }

    fn lin(x: i64) -> MultiTensor {
        MultiTensor::new(1, vec![1], vec![q(x)]).unwrap()
    }

    // n = 2, all dims 1: linear parts (a, b, c) and nonlinear entry w.
    fn two_gauge(a: i64, b: i64, c: i64, w: i64) -> Gauge {
        let d = DimAssignment::uniform(2, 1);
        Gauge::from_components(
            &d,
            &d,
            [
                (Partition::trivial(&set(&[1])), lin(a)),
                (Partition::trivial(&set(&[2])), lin(b)),
                (Partition::trivial(&set(&[1, 2])), lin(c)),
                (pair(), scalar(w)),
            ],
        )
        .unwrap()
    }

    fn coords(v1: i64, v2: i64, v12: i64) -> Coords {
        [(set(&[1]), vec![q(v1)]), (set(&[2]), vec![q(v2)]), (set(&[1, 2]), vec![q(v12)])]
            .into_iter()
            .collect()
    }

    #[test]
    fn evaluate_example() {
        let g = two_gauge(1, 1, 1, 2);
        assert_eq!(g.evaluate(&coords(3, 5, 7)).unwrap(), coords(3, 5, 37));
        assert_eq!(g.evaluate(&coords(0, 0, 0)).unwrap(), coords(0, 0, 0));
        let id = Gauge::identity(&DimAssignment::uniform(2, 1));
        assert_eq!(id.evaluate(&coords(3, 5, 7)).unwrap(), coords(3, 5, 7));
    }

    #[test]
    fn compose_examples() {
        let h = two_gauge(1, 1, 1, 2).compose(&two_gauge(1, 1, 1, 3)).unwrap();
        assert_eq!(h.component(&pair()), &scalar(5));
        // Formal expansion: (c w + w' a b) with g = (a,b,c,w) after f = (a',b',c',w') is
        // c*w' + w*a'*b'; here g = (2,3,5,7), f = (11,13,17,19).
        let g = two_gauge(2, 3, 5, 7);
        let f = two_gauge(11, 13, 17, 19);
        let h = g.compose(&f).unwrap();
        assert_eq!(h.component(&pair()), &scalar(5 * 19 + 7 * 11 * 13));
        assert_eq!(h.linear(&set(&[1, 2])), Matrix::from_ints(1, 1, &[85]));
    }

    #[test]
    fn invert_examples() {
        let inv = two_gauge(1, 1, 1, 2).invert().unwrap();
        assert_eq!(inv.component(&pair()), &scalar(-2));
        let inv = two_gauge(2, 3, 5, 7).invert().unwrap();
        let expect = Rational::new(-7, 5 * 2 * 3);
        assert_eq!(inv.component(&pair()).entries(), &[expect]);
        let id = Gauge::identity(&DimAssignment::uniform(3, 2));
        assert_eq!(id.invert().unwrap(), id);
        assert_eq!(two_gauge(1, 0, 1, 1).invert(), Err(Error::NotInvertible(set(&[2]))));
    }

    #[test]
    fn statomorphism_checks() {
        assert!(Gauge::identity(&DimAssignment::uniform(2, 1)).is_statomorphism());
        assert!(!two_gauge(2, 1, 1, 0).is_statomorphism());
        assert!(two_gauge(1, 1, 1, 9).is_statomorphism());
    }

    #[test]
    fn from_fn_recovers_gauge() {
        let g = two_gauge(2, 3, 5, 7);
        let back = Gauge::from_fn(g.source(), g.target(), |v| g.evaluate(v)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn reindex_and_relabel() {
        let d = DimAssignment::from_fn(3, |j| j.len());
        let rho = Partition::new(vec![set(&[1, 2]), set(&[3])]).unwrap();
        let r = reindex_dims(&d, &rho).unwrap();
        assert_eq!(r.get(&set(&[1])), 2);
        assert_eq!(r.get(&set(&[1, 2])), 3);
        let g = two_gauge(2, 3, 5, 7);
        let swapped = g.relabel(&[2, 1]).unwrap();
        assert_eq!(swapped.linear(&set(&[1])), Matrix::from_ints(1, 1, &[3]));
        assert_eq!(swapped.relabel(&[2, 1]).unwrap(), g);
    }
}
