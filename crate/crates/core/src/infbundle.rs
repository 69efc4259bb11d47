//! Infinity-fold presentations as towers of n-fold truncations, computed
//! lazily, and their decompositions level by level.
//!
//! The truncation at `[n]` restricted to `[k]` (the face along the discrete
//! partition of `[k]`) is the truncation at `[k]`; the inclusions of the tower
//! are the zero lifts.

use crate::atlas::{AtlasPresentation, Chart, FiniteBase};
use crate::bundle::BundleMorphism;
use crate::certificate::Certificate;
use crate::cubecat::{IndexSet, Partition};
use crate::error::{Error, Result};
use crate::exactlin::{MultiTensor, Rational};
use crate::gauge::{DimAssignment, Gauge};
use crate::split::{Decomposer, Decomposition, Options};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// Dimension of `V_J` as a function of `J`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DimRule {
    /// `dim` for `#J <= max`, zero otherwise.
    CardAtMost { max: usize, dim: usize },
    /// `dims[#J - 1]`, zero beyond the list.
    ByCard { dims: Vec<usize> },
}

impl DimRule {
    pub fn dim(&self, j: &IndexSet) -> usize {
        match self {
            DimRule::CardAtMost { max, dim } => if j.len() <= *max { *dim } else { 0 },
            DimRule::ByCard { dims } => dims.get(j.len().wrapping_sub(1)).copied().unwrap_or(0),
        }
    }
}

/// Transitions of a rule-based tower, as conjugates of identity gluings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TransitionRule {
    Identity,
    /// Chart number `c` gets coordinates with the component at `{i}, {j}`
    /// (`i < j`) equal to `c * coefficient` in every entry.
    ChartTwist { coefficient: Rational },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// A presentation over `[n]`; every `V_J` with `J` outside `[n]` is zero.
    Stabilizing { n: usize, instance: AtlasPresentation },
    Rule { base: FiniteBase, charts: Vec<Chart>, dims: DimRule, transitions: TransitionRule },
}

/// The chart twist of a rule-based tower at level `n`, for chart number `c`.
fn chart_twist(dims: &DimAssignment, c: usize, coefficient: &Rational) -> Result<Gauge> {
    let mut g = Gauge::identity(dims);
    let value = &Rational::from_int(c as i64) * coefficient;
    for i in 1..=dims.n() as u32 {
        for j in i + 1..=dims.n() as u32 {
            let rho = Partition::discrete(&IndexSet::new([i, j])?);
            let (di, dj) = (dims.get(&IndexSet::singleton(i)), dims.get(&IndexSet::singleton(j)));
            let out = dims.get(&IndexSet::new([i, j])?);
            let t = MultiTensor::new(out, vec![di, dj], vec![value.clone(); out * di * dj])?;
            g.set_component(&rho, t)?;
        }
    }
    Ok(g)
}

/// A gauge over `[k]` extended to `[n]`: identity on the new sets, whose
/// dimensions are zero, and nothing else new.
fn extend_gauge(g: &Gauge, dims: &DimAssignment) -> Result<Gauge> {
    let mut out = Gauge::identity(dims);
    for (rho, t) in g.components() {
        out.set_component(rho, t.clone())?;
    }
    Ok(out)
}

impl Generator {
    fn level(&self, n: usize) -> Result<AtlasPresentation> {
        match self {
            Generator::Stabilizing { n: top, instance } => {
                if n <= *top {
                    return instance.reindex(&Partition::discrete(&IndexSet::range(n)));
                }
                let small = instance.dims();
                let dims = DimAssignment::from_fn(n, |j| if j.is_subset(&small.top()) { small.get(j) } else { 0 });
                let transitions = instance.transitions().iter().map(|(k, g)| Ok((k.clone(), extend_gauge(g, &dims)?))).collect::<Result<_>>()?;
                instance.with_data(dims, transitions)
            }
            Generator::Rule { base, charts, dims: rule, transitions } => {
                let dims = DimAssignment::from_fn(n, |j| rule.dim(j));
                let plain = AtlasPresentation::glued(&dims, base, charts.clone())?;
                match transitions {
                    TransitionRule::Identity => Ok(plain),
                    TransitionRule::ChartTwist { coefficient } => {
                        let mut psi = BTreeMap::new();
                        for (c, chart) in plain.charts().iter().enumerate() {
                            let g = chart_twist(&dims, c, coefficient)?;
                            for p in &chart.domain {
                                psi.insert((chart.id.clone(), p.clone()), g.clone());
                            }
                        }
                        plain.twist(&psi)
                    }
                }
            }
        }
    }
}

/// A tower of truncations, computed on demand and kept.
#[derive(Debug)]
pub struct InfinityPresentation {
    generator: Generator,
    cache: Mutex<BTreeMap<usize, Arc<AtlasPresentation>>>,
}

impl InfinityPresentation {
    pub fn new(generator: Generator) -> Self {
        InfinityPresentation { generator, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn base(&self) -> &FiniteBase {
        match &self.generator {
            Generator::Stabilizing { instance, .. } => instance.base(),
            Generator::Rule { base, .. } => base,
        }
    }

    /// The presentation over `[n]`; `n = 0` gives the base alone.
    pub fn truncate(&self, n: usize) -> Result<Arc<AtlasPresentation>> {
        let mut cache = self.cache.lock().map_err(|_| Error::Semantic("truncation cache poisoned".into()))?;
        if let Some(a) = cache.get(&n) {
            return Ok(Arc::clone(a));
        }
        let a = Arc::new(self.generator.level(n)?);
        cache.insert(n, Arc::clone(&a));
        Ok(a)
    }

    /// Each truncation up to `max` validates, and restricts to the lower ones.
    pub fn tower_certificate(&self, max: usize) -> Result<Certificate> {
        let mut cert = Certificate::new("truncations validate and restrict to each other");
        for l in 0..=max {
            let big = self.truncate(l)?;
            let report = big.validate();
            cert.check(report.is_valid(), json!({ "level": l, "reason": "invalid truncation", "violations": report.violations.len() }));
            for k in 0..l {
                let restricted = big.reindex(&Partition::discrete(&IndexSet::range(k)))?;
                cert.check(restricted == *self.truncate(k)?, json!({ "level": l, "restricted_to": k }));
            }
        }
        cert.witness(json!({ "levels": max + 1 }));
        Ok(cert)
    }
}

/// Decompositions of the truncations, each built on its own level and kept.
pub struct TowerDecomposition<'a> {
    tower: &'a InfinityPresentation,
    options: Options,
    levels: Mutex<BTreeMap<usize, Arc<Decomposition>>>,
}

impl<'a> TowerDecomposition<'a> {
    pub fn new(tower: &'a InfinityPresentation, options: Options) -> Self {
        TowerDecomposition { tower, options, levels: Mutex::new(BTreeMap::new()) }
    }

    /// The decomposition of the truncation at `[n]`.
    pub fn level(&self, n: usize) -> Result<Arc<Decomposition>> {
        if let Some(s) = self.levels.lock().map_err(|_| Error::Semantic("decomposition cache poisoned".into()))?.get(&n) {
            return Ok(Arc::clone(s));
        }
        let atlas = self.tower.truncate(n)?;
        let mut decomposer = Decomposer::new(&atlas, self.options);
        let s = Arc::new(decomposer.decompose()?);
        let mut levels = self.levels.lock().map_err(|_| Error::Semantic("decomposition cache poisoned".into()))?;
        Ok(Arc::clone(levels.entry(n).or_insert(s)))
    }

    /// The decomposition at the node `I`, read at the level `max I`.
    pub fn at(&self, node: &IndexSet) -> Result<Decomposition> {
        self.restricted(node, node.max().unwrap_or(0) as usize)
    }

    /// The level-`n` decomposition restricted to the node `I`.
    pub fn restricted(&self, node: &IndexSet, n: usize) -> Result<Decomposition> {
        if !node.is_subset(&IndexSet::range(n)) {
            return Err(Error::InvalidArgument(format!("{node} is not contained in [{n}]")));
        }
        self.level(n)?.reindex(&Partition::discrete(node))
    }

    /// For every nonempty `I` inside the smallest level, the restrictions of
    /// all given levels to `I` coincide; each level is a decomposition.
    pub fn level_independence(&self, levels: &[usize]) -> Result<Certificate> {
        let mut cert = Certificate::new("the decomposition at a node does not depend on the level");
        let low = *levels.iter().min().ok_or_else(|| Error::InvalidArgument("no levels".into()))?;
        for &n in levels {
            let atlas = self.tower.truncate(n)?;
            let s = self.level(n)?;
            cert.check(s.check_natural(&atlas.linear_model(), &atlas).is_ok(), json!({ "level": n, "reason": "not natural" }));
            cert.check(
                s.data().values().all(|g| IndexSet::range(n).nonempty_subsets().iter().all(|j| j.is_empty() || g.linear(j).is_identity())),
                json!({ "level": n, "reason": "not the identity on building bundles" }),
            );
        }
        let mut compared = 0;
        for node in IndexSet::range(low).nonempty_subsets() {
            let reference = self.restricted(&node, low)?;
            for &n in levels.iter().filter(|&&n| n != low) {
                let other = self.restricted(&node, n)?;
                let same = other == reference;
                cert.check(same, json!({ "node": node, "levels": [low, n], "cells": first_difference(&reference, &other) }));
                compared += 1;
            }
        }
        cert.witness(json!({ "levels": levels, "nodes_compared": compared }));
        Ok(cert)
    }
}

fn first_difference(a: &BundleMorphism, b: &BundleMorphism) -> Option<(String, String)> {
    a.data().iter().find(|(k, g)| b.data().get(*k) != Some(*g)).map(|(k, _)| k.clone())
}
