//! Linear splittings and decompositions.
//!
//! Everything is computed in chart coordinates, one base point at a time. A
//! splitting in chart `a` is a gauge from the vacant coordinates whose only
//! free data are the tensors on discrete partitions; a decomposition in chart
//! `a` is a statomorphism gauge from the coordinates of the linear model.
//!
//! Every face and every iterated core of a presentation is its reindexing
//! along a partition of a subset of `[n]`, so both caches are keyed by that
//! partition. A face or core reached along different paths therefore gets one
//! splitting and one decomposition.
//!
//! Splitting a presentation over the cube of blocks of `rho` proceeds as in
//! the existence proof: splittings of all proper faces come from the cache;
//! a section of the ultracore sequence over the face opposite to `1` gives a
//! first top map; the frame iteration makes it linear over sides `2..m`
//! using the standard basis of each singleton fiber; chart-local results are
//! pasted with least-chart or uniform weights. The pasted map is read off by
//! probing and compared against direct evaluation at random inputs.

use crate::atlas::{vacant_dims, AtlasPresentation};
use crate::bundle::BundleMorphism;
use crate::certificate::Certificate;
use crate::corepull::{core_partition, embed_core, extract_core};
use crate::cubecat::{partitions, IndexSet, Partition};
use crate::error::{Error, Result};
use crate::exactlin::{unit_vector, zero_vector, MultiTensor, Rational, Vector};
use crate::gauge::{add_over, check_coords, reindex_dims, scale_over, zero_coords, Coords, DimAssignment, Gauge};
use crate::random::{self, Rng8};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::cell::Cell;
use std::collections::BTreeMap;

/// A splitting: per chart and point, a gauge from the vacant coordinates.
pub type Splitting = BundleMorphism;
/// A decomposition: per chart and point, a statomorphism gauge from the linear model.
pub type Decomposition = BundleMorphism;

type Cell2 = (String, String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pasting {
    /// The local splitting of the least chart at each point.
    LeastChart,
    /// The average of all local splittings at a point, weight `1/#charts`.
    UniformAverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstSection {
    /// Zero top component in the chart.
    ZeroTop,
    /// Top component `(1 + q(b)^2) * M(w)`, linear in the fiber coordinates `w`
    /// but not in the base `b`, so the frame iteration has work to do.
    Skewed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Options {
    pub pasting: Pasting,
    pub first: FirstSection,
    /// Random inputs per point at which the pasted map is compared to its gauge.
    pub samples: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { pasting: Pasting::LeastChart, first: FirstSection::ZeroTop, samples: 2, seed: 0 }
    }
}

impl Options {
    pub fn with_pasting(self, pasting: Pasting) -> Self {
        Options { pasting, ..self }
    }

    pub fn with_first(self, first: FirstSection) -> Self {
        Options { first, ..self }
    }
}

/// Blocks of `rho` at the given 1-based positions, as a partition.
fn sub_partition(rho: &Partition, positions: &IndexSet) -> Partition {
    Partition::new(positions.iter().map(|p| rho.blocks()[p as usize - 1].clone()).collect()).expect("sub-family of a partition")
}

/// Staged splittings and decompositions of one presentation, with shared caches.
pub struct Decomposer<'a> {
    atlas: &'a AtlasPresentation,
    options: Options,
    tops: BTreeMap<Partition, BTreeMap<Cell2, MultiTensor>>,
    decompositions: BTreeMap<Partition, BTreeMap<Cell2, Gauge>>,
    certificate: Certificate,
    rng: Rng8,
}

impl<'a> Decomposer<'a> {
    pub fn new(atlas: &'a AtlasPresentation, options: Options) -> Self {
        Decomposer {
            atlas,
            options,
            tops: BTreeMap::new(),
            decompositions: BTreeMap::new(),
            certificate: Certificate::new("pasted splittings agree with their gauges; chain bracketings agree"),
            rng: random::rng(options.seed),
        }
    }

    pub fn atlas(&self) -> &AtlasPresentation {
        self.atlas
    }

    /// Checks made while building: pasted maps against probed gauges, and the
    /// two bracketings of every chain step.
    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// Number of cached splitting tops and decompositions.
    pub fn cache_sizes(&self) -> (usize, usize) {
        (self.tops.len(), self.decompositions.len())
    }

    fn sub_atlas(&self, rho: &Partition) -> Result<AtlasPresentation> {
        self.atlas.reindex(rho)
    }

    /// Splitting gauges of the reindexing along `rho`, per cell; the top
    /// component is left zero when `with_top` is false.
    fn assemble_splitting(&mut self, rho: &Partition, with_top: bool) -> Result<BTreeMap<Cell2, Gauge>> {
        let m = rho.len();
        let dims = reindex_dims(self.atlas.dims(), rho)?;
        let vdims = vacant_dims(&dims);
        let positions = IndexSet::range(m);
        let mut out = BTreeMap::new();
        let mut proto = Gauge::zero(&vdims, &dims)?;
        for q in positions.nonempty_subsets().into_iter().filter(|q| q.len() == 1) {
            proto.set_component(&Partition::trivial(&q), MultiTensor::identity(dims.get(&q)))?;
        }
        let mut pieces: Vec<(Partition, BTreeMap<Cell2, MultiTensor>)> = Vec::new();
        for q in positions.nonempty_subsets() {
            if q.len() < 2 || (q == positions && !with_top) {
                continue;
            }
            let sub = sub_partition(rho, &q);
            self.split_top(&sub)?;
            pieces.push((Partition::discrete(&q), self.tops[&sub].clone()));
        }
        for cell in self.atlas.cells() {
            let mut g = proto.clone();
            for (disc, tops) in &pieces {
                g.set_component(disc, tops[&cell].clone())?;
            }
            out.insert(cell, g);
        }
        Ok(out)
    }

    /// Splitting of the reindexing along `rho`.
    pub fn splitting_of(&mut self, rho: &Partition) -> Result<Splitting> {
        let sub = self.sub_atlas(rho)?;
        let data = self.assemble_splitting(rho, true)?;
        BundleMorphism::new(vacant_dims(sub.dims()), sub.dims().clone(), data)
    }

    /// The full splitting of the presentation.
    pub fn splitting(&mut self) -> Result<Splitting> {
        self.splitting_of(&Partition::discrete(&self.atlas.dims().top()))
    }

    fn split_top(&mut self, rho: &Partition) -> Result<()> {
        if self.tops.contains_key(rho) || rho.len() < 2 {
            return Ok(());
        }
        let lower = self.assemble_splitting(rho, false)?;
        let b = self.sub_atlas(rho)?;
        let m = rho.len();
        let top = IndexSet::range(m);
        let disc = Partition::discrete(&top);
        let vac = b.vacant_model();
        let mut tops = BTreeMap::new();
        for p in b.base().points() {
            let home = b.canonical_chart(p)?.to_string();
            let charts: Vec<String> = b.charts_at(p).into_iter().map(String::from).collect();
            let local = LocalSplit { atlas: &b, lower: &lower, point: p, first: self.options.first };
            let pasted = |e: &Coords| -> Result<Coords> {
                let used: Vec<&String> = match self.options.pasting {
                    Pasting::LeastChart => vec![&home],
                    Pasting::UniformAverage => charts.iter().collect(),
                };
                let weight = Rational::new(1, used.len() as i64);
                let mut acc: Option<Coords> = None;
                for alpha in used {
                    let e_alpha = vac.transition(&home, alpha, p)?.evaluate(e)?;
                    let x = local.top_map(alpha, &e_alpha)?;
                    let y = b.transition(alpha, &home, p)?.evaluate(&x)?;
                    let term = scale_over(1, &weight, &y);
                    acc = Some(match acc {
                        None => term,
                        Some(a) => add_over(1, &a, &term)?,
                    });
                }
                Ok(acc.expect("at least one chart"))
            };
            let g = Gauge::from_fn(vac.dims(), b.dims(), pasted)?;
            let lower_home = &lower[&(home.clone(), p.clone())];
            for (q, t) in lower_home.components() {
                if *q.ground() != top && g.component(q) != t {
                    self.certificate.fail(json!({ "partition": rho, "point": p, "component": q, "reason": "pasted map changes a face splitting" }));
                }
            }
            for _ in 0..self.options.samples {
                let e = random::coords(&mut self.rng, vac.dims(), &top);
                if g.evaluate(&e)? != pasted(&e)? {
                    self.certificate.fail(json!({ "partition": rho, "point": p, "reason": "pasted map is not multilinear" }));
                }
            }
            for beta in &charts {
                let there = b.transition(&home, beta, p)?.compose(&g.compose(&*vac.transition(beta, &home, p)?)?)?;
                tops.insert((beta.clone(), p.clone()), there.component(&disc).clone());
            }
        }
        self.tops.insert(rho.clone(), tops);
        Ok(())
    }

    /// Decomposition gauges of the reindexing along `rho`, per cell.
    pub fn decomposition_gauges(&mut self, rho: &Partition) -> Result<BTreeMap<Cell2, Gauge>> {
        if let Some(d) = self.decompositions.get(rho) {
            return Ok(d.clone());
        }
        let m = rho.len();
        let dims = reindex_dims(self.atlas.dims(), rho)?;
        let out = if m < 2 {
            self.atlas.cells().into_iter().map(|c| (c, Gauge::identity(&dims))).collect()
        } else {
            let sigma = self.assemble_splitting(rho, true)?;
            let top = IndexSet::range(m);
            let mut cores = Vec::new();
            for q in top.nonempty_subsets().into_iter().filter(|q| q.len() == 2) {
                let inner = core_partition(&top, &q)?;
                let key = rho.expand(&inner)?;
                cores.push((q, self.decomposition_gauges(&key)?));
            }
            let mut out = BTreeMap::new();
            for cell in self.atlas.cells() {
                let per_core: Vec<(IndexSet, &Gauge)> = cores.iter().map(|(q, d)| (q.clone(), &d[&cell])).collect();
                let (g, mismatches) = chain_gauge(&dims, &sigma[&cell], &per_core)?;
                if mismatches > 0 {
                    self.certificate.fail(json!({ "partition": rho, "cell": cell, "reason": "chain bracketings disagree" }));
                }
                out.insert(cell, g);
            }
            out
        };
        self.decompositions.insert(rho.clone(), out.clone());
        Ok(out)
    }

    /// Decomposition of the reindexing along `rho`, as a morphism from its linear model.
    pub fn decomposition_of(&mut self, rho: &Partition) -> Result<Decomposition> {
        let sub = self.sub_atlas(rho)?;
        let data = self.decomposition_gauges(rho)?;
        BundleMorphism::new(sub.dims().clone(), sub.dims().clone(), data)
    }

    pub fn decompose(&mut self) -> Result<Decomposition> {
        self.decomposition_of(&Partition::discrete(&self.atlas.dims().top()))
    }
}

/// The chart-local construction at one point: first section, then the frame iteration.
struct LocalSplit<'b> {
    atlas: &'b AtlasPresentation,
    lower: &'b BTreeMap<Cell2, Gauge>,
    point: &'b str,
    first: FirstSection,
}

impl LocalSplit<'_> {
    fn top_map(&self, chart: &str, e: &Coords) -> Result<Coords> {
        self.iterate(chart, self.atlas.n() as u32, e)
    }

    /// Linear over sides `1..=k`; `k = 1` is the first section.
    fn iterate(&self, chart: &str, k: u32, e: &Coords) -> Result<Coords> {
        if k == 1 {
            return self.first_section(chart, e);
        }
        let slot = IndexSet::singleton(k);
        let d = e[&slot].len();
        let mut base = e.clone();
        base.insert(slot.clone(), zero_vector(d));
        let mut acc = scale_over(k, &Rational::zero(), &self.iterate(chart, k - 1, &base)?);
        for j in 0..d {
            let beta = &e[&slot][j];
            if beta.is_zero() {
                continue;
            }
            let mut ej = e.clone();
            ej.insert(slot.clone(), unit_vector(d, j));
            acc = add_over(k, &acc, &scale_over(k, beta, &self.iterate(chart, k - 1, &ej)?))?;
        }
        Ok(acc)
    }

    fn first_section(&self, chart: &str, e: &Coords) -> Result<Coords> {
        let lower = &self.lower[&(chart.to_string(), self.point.to_string())];
        let mut v = lower.evaluate(e)?;
        let top = self.atlas.dims().top();
        let d = self.atlas.dims().get(&top);
        let value = match self.first {
            FirstSection::ZeroTop => zero_vector(d),
            FirstSection::Skewed => {
                let q: Rational = v.iter().filter(|(j, _)| !j.contains(1)).flat_map(|(_, x)| x.iter().cloned()).sum();
                let w: Rational = v.iter().filter(|(j, _)| j.contains(1) && **j != top).flat_map(|(_, x)| x.iter().cloned()).sum();
                let c = (Rational::one() + &q * &q) * w;
                vec![c; d]
            }
        };
        v.insert(top, value);
        Ok(v)
    }
}

/// The chain construction of a decomposition from a splitting gauge and
/// decomposition gauges of the cores at all pairs, in one chart. Returns the
/// gauge and the number of steps where the two bracketings disagreed.
pub fn chain_gauge(dims: &DimAssignment, sigma: &Gauge, cores: &[(IndexSet, &Gauge)]) -> Result<(Gauge, usize)> {
    let top = dims.top();
    let pairs: Vec<(IndexSet, Partition, &Gauge)> = cores
        .iter()
        .map(|(j, g)| Ok((j.clone(), core_partition(&top, j)?, *g)))
        .collect::<Result<_>>()?;
    let expected = top.nonempty_subsets().into_iter().filter(|j| j.len() == 2).count();
    if pairs.len() != expected {
        return Err(Error::InvalidArgument(format!("need core decompositions at all {expected} pairs")));
    }
    let chain = Chain { dims, sigma, pairs, mismatches: Cell::new(0) };
    let g = Gauge::from_fn(dims, dims, |x| chain.apply(chain.pairs.len(), x))?;
    Ok((g, chain.mismatches.get()))
}

struct Chain<'c> {
    dims: &'c DimAssignment,
    sigma: &'c Gauge,
    pairs: Vec<(IndexSet, Partition, &'c Gauge)>,
    mismatches: Cell<usize>,
}

impl Chain<'_> {
    fn apply(&self, k: usize, x: &Coords) -> Result<Coords> {
        if k == 0 {
            let vdims = self.sigma.source();
            let mut v = Coords::new();
            for (j, c) in x {
                if j.len() == 1 {
                    v.insert(j.clone(), c.clone());
                } else {
                    if c.iter().any(|a| !a.is_zero()) {
                        return Err(Error::Semantic(format!("chain start has a nonzero component at {j}")));
                    }
                    v.insert(j.clone(), zero_vector(vdims.get(j)));
                }
            }
            return self.sigma.evaluate(&v);
        }
        let (pair, rho, core) = &self.pairs[k - 1];
        let earlier = |i: &IndexSet| self.pairs[..k - 1].iter().any(|(q, _, _)| q.is_subset(i));
        let mut y = Coords::new();
        let mut z = Coords::new();
        for (i, a) in x {
            let zero = zero_vector(a.len());
            let yi = if i.len() == 1 || earlier(i) { a.clone() } else { zero.clone() };
            let zi = if i.is_disjoint(pair) {
                yi.clone()
            } else if pair.is_subset(i) && !earlier(i) {
                a.clone()
            } else {
                zero
            };
            y.insert(i.clone(), yi);
            z.insert(i.clone(), zi);
        }
        let sy = self.apply(k - 1, &y)?;
        let sz = embed_core(self.dims, rho, &core.evaluate(&extract_core(rho, &z))?);
        let (s, t) = (pair.elements()[0], pair.elements()[1]);
        let bracket = |first: u32, second: u32| -> Result<Coords> {
            let lifted = scale_over(first, &Rational::zero(), &sy);
            add_over(first, &sy, &add_over(second, &lifted, &sz)?)
        };
        let lhs = bracket(s, t)?;
        if lhs != bracket(t, s)? {
            self.mismatches.set(self.mismatches.get() + 1);
        }
        Ok(lhs)
    }
}

/// Decomposition from a splitting and compatible decompositions of the cores
/// at all pairs `J` (morphisms from the cores of the linear model).
pub fn splitting_to_decomposition(
    atlas: &AtlasPresentation,
    sigma: &Splitting,
    cores: &BTreeMap<IndexSet, Decomposition>,
) -> Result<Decomposition> {
    let split_cert = is_splitting(atlas, sigma)?;
    split_cert.into_result()?;
    compatibility(atlas, sigma, cores)?.into_result()?;
    let dims = atlas.dims();
    let mut data = BTreeMap::new();
    for cell in atlas.cells() {
        let per_core: Vec<(IndexSet, &Gauge)> = cores.iter().map(|(j, d)| Ok((j.clone(), d.at(&cell.0, &cell.1)?))).collect::<Result<_>>()?;
        let (g, mismatches) = chain_gauge(dims, sigma.at(&cell.0, &cell.1)?, &per_core)?;
        if mismatches > 0 {
            return Err(Error::Semantic(format!("the two bracketings disagree at {cell:?}")));
        }
        data.insert(cell, g);
    }
    BundleMorphism::new(dims.clone(), dims.clone(), data)
}

/// Compatibility of a splitting with core decompositions: each core
/// decomposition restricts to the splitting on the face opposite its pair,
/// and any two agree on the intersection of their cores.
pub fn compatibility(atlas: &AtlasPresentation, sigma: &Splitting, cores: &BTreeMap<IndexSet, Decomposition>) -> Result<Certificate> {
    let top = atlas.dims().top();
    let mut cert = Certificate::new("splitting and core decompositions are compatible");
    let rhos: BTreeMap<&IndexSet, Partition> = cores.keys().map(|j| Ok((j, core_partition(&top, j)?))).collect::<Result<_>>()?;
    for cell in atlas.cells() {
        let s = sigma.at(&cell.0, &cell.1)?;
        for (j, d) in cores {
            let rho = &rhos[j];
            let g = d.at(&cell.0, &cell.1)?;
            let singles = IndexSet::new((1..=rho.len() as u32).filter(|&p| rho.blocks()[p as usize - 1].len() == 1))?;
            for q in singles.nonempty_subsets() {
                let face = rho.union_of(&q)?;
                if g.component(&Partition::discrete(&q)) != s.component(&Partition::discrete(&face)) {
                    cert.fail(json!({ "cell": cell, "core": j, "face": face }));
                }
            }
        }
        for (i, di) in cores {
            for (j, dj) in cores.range((std::ops::Bound::Excluded(i.clone()), std::ops::Bound::Unbounded)) {
                let (ri, rj) = (&rhos[i], &rhos[j]);
                let (gi, gj) = (di.at(&cell.0, &cell.1)?, dj.at(&cell.0, &cell.1)?);
                for k in top.nonempty_subsets() {
                    if !ri.is_union_of_blocks(&k) || !rj.is_union_of_blocks(&k) {
                        continue;
                    }
                    for pi in partitions(&k)? {
                        let (Some(pi_i), Some(pi_j)) = (position_partition(ri, &pi), position_partition(rj, &pi)) else { continue };
                        if gi.component(&pi_i) != gj.component(&pi_j) {
                            cert.fail(json!({ "cell": cell, "cores": [i, j], "target": k, "blocks": pi }));
                        }
                    }
                }
            }
        }
    }
    Ok(cert)
}

/// `pi` read on the cube of blocks of `rho`, when each block of `pi` is a union of blocks of `rho`.
fn position_partition(rho: &Partition, pi: &Partition) -> Option<Partition> {
    let blocks = pi.blocks().iter().map(|b| rho.positions_within(b)).collect::<Option<Vec<_>>>()?;
    Partition::new(blocks).ok()
}

/// Linear splitting, from the cached staged construction.
pub fn find_splitting(atlas: &AtlasPresentation, options: Options) -> Result<Splitting> {
    Decomposer::new(atlas, options).splitting()
}

pub fn decompose(atlas: &AtlasPresentation, options: Options) -> Result<Decomposition> {
    let mut d = Decomposer::new(atlas, options);
    let out = d.decompose()?;
    d.certificate().clone().into_result()?;
    Ok(out)
}

/// The splitting `S . iota` contained in a decomposition.
pub fn splitting_of(atlas: &AtlasPresentation, s: &Decomposition) -> Result<Splitting> {
    let vdims = vacant_dims(atlas.dims());
    let iota = crate::atlas::inclusion_gauge(&vdims, atlas.dims(), |j| j.len() == 1)?;
    let data = s.data().iter().map(|(c, g)| Ok((c.clone(), g.compose(&iota)?))).collect::<Result<_>>()?;
    BundleMorphism::new(vdims, atlas.dims().clone(), data)
}

/// The decompositions induced on the cores at all pairs.
pub fn core_decompositions(atlas: &AtlasPresentation, s: &Decomposition) -> Result<BTreeMap<IndexSet, Decomposition>> {
    let top = atlas.dims().top();
    let lin = atlas.linear_model();
    top.nonempty_subsets()
        .into_iter()
        .filter(|j| j.len() == 2)
        .map(|j| {
            let d = crate::corepull::core_morphism(s, &lin, atlas, &top, &j)?;
            Ok((j, d))
        })
        .collect()
}

pub fn is_splitting(atlas: &AtlasPresentation, sigma: &Splitting) -> Result<Certificate> {
    let mut cert = Certificate::new("linear splitting: natural, identity on singletons");
    let vac = atlas.vacant_model();
    if sigma.source_dims() != vac.dims() || sigma.target_dims() != atlas.dims() {
        cert.fail(json!({ "reason": "dimensions" }));
        return Ok(cert);
    }
    let bad = sigma.naturality_failures(&vac, atlas)?;
    cert.check(bad.is_empty(), json!({ "not_natural": bad.first().map(|(k, r)| json!({ "key": k.point, "from": k.from, "to": k.to, "blocks": r })) }));
    for ((chart, point), g) in sigma.data() {
        for j in atlas.dims().sets().into_iter().filter(|j| j.len() == 1) {
            cert.check(g.linear(&j).is_identity(), json!({ "chart": chart, "point": point, "singleton": j }));
        }
    }
    cert.witness(json!({ "cells": sigma.data().len() }));
    Ok(cert)
}

/// Natural, identity on every building bundle (each core at `(I, I)`), and
/// bijective on sampled fibers.
pub fn is_decomposition(atlas: &AtlasPresentation, s: &Decomposition, rng: &mut Rng8, samples: usize) -> Result<Certificate> {
    let mut cert = Certificate::new("decomposition: natural, identity on building bundles, fiberwise bijective");
    let lin = atlas.linear_model();
    if s.source_dims() != atlas.dims() || s.target_dims() != atlas.dims() {
        cert.fail(json!({ "reason": "dimensions" }));
        return Ok(cert);
    }
    let bad = s.naturality_failures(&lin, atlas)?;
    cert.check(bad.is_empty(), json!({ "not_natural": bad.len() }));
    if !bad.is_empty() {
        return Ok(cert);
    }
    for i in atlas.dims().sets() {
        let c = crate::corepull::core_morphism(s, &lin, atlas, &i, &i)?;
        for ((chart, point), g) in c.data() {
            cert.check(g.linear(&IndexSet::singleton(1)).is_identity(), json!({ "chart": chart, "point": point, "building": i }));
        }
    }
    let top = atlas.dims().top();
    for ((chart, point), g) in s.data() {
        let inv = match g.invert() {
            Ok(inv) => inv,
            Err(_) => {
                cert.fail(json!({ "chart": chart, "point": point, "reason": "not invertible" }));
                continue;
            }
        };
        for _ in 0..samples {
            let x = random::coords(rng, atlas.dims(), &top);
            let ok = inv.evaluate(&g.evaluate(&x)?)? == x && g.evaluate(&inv.evaluate(&x)?)? == x;
            cert.check(ok, json!({ "chart": chart, "point": point, "reason": "round trip" }));
        }
    }
    cert.witness(json!({ "cells": s.data().len(), "building_bundles": atlas.dims().sets().len() }));
    Ok(cert)
}

/// The statomorphism family `tau = S1^-1 . S2` of the linear model.
pub fn torsor(atlas: &AtlasPresentation, s1: &Decomposition, s2: &Decomposition) -> Result<BundleMorphism> {
    let inv = s1.invert()?;
    let tau = inv.compose(s2)?;
    let lin = atlas.linear_model();
    tau.check_natural(&lin, &lin)?;
    for ((chart, point), g) in tau.data() {
        if !g.is_statomorphism() {
            return Err(Error::Semantic(format!("S1^-1 . S2 is not a statomorphism at ({chart}, {point})")));
        }
    }
    Ok(tau)
}

/// The right action `S . tau`.
pub fn act(s: &Decomposition, tau: &BundleMorphism) -> Result<Decomposition> {
    s.compose(tau)
}

/// A random statomorphism of the linear model, natural by construction.
pub fn random_statomorphism(rng: &mut Rng8, atlas: &AtlasPresentation) -> Result<BundleMorphism> {
    let lin = atlas.linear_model();
    let at: BTreeMap<String, Gauge> = atlas.base().points().iter().map(|p| (p.clone(), random::statomorphism(rng, atlas.dims()))).collect();
    BundleMorphism::transported(&lin, &lin, &at)
}

/// Transitions `S_b^-1 . t_{b,a} . S_a`, block diagonal for a decomposition.
pub fn normalize_atlas(atlas: &AtlasPresentation, s: &Decomposition) -> Result<AtlasPresentation> {
    let mut transitions = BTreeMap::new();
    for (key, t) in atlas.transitions() {
        let sa = s.at(&key.from, &key.point)?;
        let sb = s.at(&key.to, &key.point)?;
        transitions.insert(key.clone(), sb.invert()?.compose(&t.compose(sa)?)?);
    }
    atlas.with_data(atlas.dims().clone(), transitions)
}

pub fn normalization_certificate(atlas: &AtlasPresentation, s: &Decomposition) -> Result<Certificate> {
    let normal = normalize_atlas(atlas, s)?;
    let mut cert = Certificate::new("normalized transitions are block diagonal and valid");
    for (key, t) in normal.transitions() {
        cert.check(t.is_block_diagonal(), json!({ "from": key.from, "to": key.to, "point": key.point }));
    }
    cert.check(normal.validate().is_valid(), json!({ "reason": "normalized presentation is invalid" }));
    let bad = normal.intertwining_failures(atlas, s.data())?;
    cert.check(bad.is_empty(), json!({ "not_intertwined": bad.len() }));
    cert.witness(json!({ "transitions": normal.transitions().len() }));
    Ok(cert)
}

/// `S . iota . (S^P)^-1`, where `S^P` is the decomposition induced on the pullback.
pub fn split_pullback(atlas: &AtlasPresentation, s: &Decomposition) -> Result<BundleMorphism> {
    let pb = crate::corepull::pullback(atlas)?;
    let top = atlas.dims().top();
    let pdims = pb.atlas.dims().clone();
    let iota = crate::atlas::inclusion_gauge(&pdims, atlas.dims(), |j| *j != top)?;
    let mut data = BTreeMap::new();
    for (cell, g) in s.data() {
        let mut sp = Gauge::zero(&pdims, &pdims)?;
        for (rho, t) in g.components() {
            if *rho.ground() != top {
                sp.set_component(rho, t.clone())?;
            }
        }
        data.insert(cell.clone(), g.compose(&iota)?.compose(&sp.invert()?)?);
    }
    BundleMorphism::new(pdims, atlas.dims().clone(), data)
}

pub fn split_pullback_certificate(atlas: &AtlasPresentation, sp: &BundleMorphism) -> Result<Certificate> {
    let pb = crate::corepull::pullback(atlas)?;
    let mut cert = Certificate::new("the pullback section splits every ultracore sequence");
    let composite = pb.projection.compose(sp)?;
    for ((chart, point), g) in composite.data() {
        cert.check(g.is_identity(), json!({ "chart": chart, "point": point }));
    }
    let bad = sp.naturality_failures(&pb.atlas, atlas)?;
    cert.check(bad.is_empty(), json!({ "not_natural": bad.len() }));
    Ok(cert)
}

/// Evaluates a decomposition gauge on a decomposed coordinate tuple.
pub fn apply_at(s: &Decomposition, chart: &str, point: &str, x: &Coords) -> Result<Coords> {
    check_coords(s.source_dims(), x)?;
    s.at(chart, point)?.evaluate(x)
}

/// The zero tuple plus one component, for examples.
pub fn single_component(dims: &DimAssignment, j: &IndexSet, v: Vector) -> Coords {
    let mut x = zero_coords(dims, &dims.top());
    x.insert(j.clone(), v);
    x
}
