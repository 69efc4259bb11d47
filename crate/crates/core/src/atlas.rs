//! Atlas presentations of n-fold vector bundles over a finite base.
//!
//! A presentation stores, for every ordered pair of overlapping charts and
//! every common point, the gauge `t_{to,from}(p)` taking coordinates in the
//! chart `from` to coordinates in the chart `to`. Both directions are stored
//! and cross-checked. Self-transitions may be given explicitly (they must be
//! identities) and are the identity when absent.

use crate::cubecat::{IndexSet, Partition};
use crate::error::{Error, Result};
use crate::gauge::{reindex_dims, relabel_dims, DimAssignment, Gauge};
use crate::exactlin::{Matrix, MultiTensor};
use serde::Serialize;
use std::borrow::Cow;
use std::collections::BTreeMap;

/// Finitely many named base points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteBase {
    points: Vec<String>,
}

impl FiniteBase {
    pub fn new<S: Into<String>>(points: impl IntoIterator<Item = S>) -> Result<Self> {
        let points: Vec<String> = points.into_iter().map(Into::into).collect();
        if points.is_empty() {
            return Err(Error::Structural("base must be nonempty".into()));
        }
        for (k, p) in points.iter().enumerate() {
            if points[..k].contains(p) {
                return Err(Error::Structural(format!("duplicate base point {p:?}")));
            }
        }
        Ok(FiniteBase { points })
    }

    /// Points named `p0, p1, ...`.
    pub fn numbered(count: usize) -> Self {
        FiniteBase::new((0..count).map(|i| format!("p{i}"))).expect("nonempty")
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn contains(&self, p: &str) -> bool {
        self.points.iter().any(|q| q == p)
    }

    pub fn index_of(&self, p: &str) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chart {
    pub id: String,
    pub domain: Vec<String>,
}

impl Chart {
    pub fn contains(&self, p: &str) -> bool {
        self.domain.iter().any(|q| q == p)
    }
}

/// `(from, to, point)` for the transition taking `from`-coordinates to `to`-coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TransitionKey {
    pub from: String,
    pub to: String,
    pub point: String,
}

impl TransitionKey {
    pub fn new(from: &str, to: &str, point: &str) -> Self {
        TransitionKey { from: from.into(), to: to.into(), point: point.into() }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AtlasPresentation {
    dims: DimAssignment,
    base: FiniteBase,
    charts: Vec<Chart>,
    transitions: BTreeMap<TransitionKey, Gauge>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// An explicit self-transition differs from the identity.
    SelfTransition,
    /// A transition has a singular linear part.
    NotInvertible,
    /// `t_{gamma,alpha} != t_{gamma,beta} . t_{beta,alpha}`; with `gamma = alpha` this is the inverse pair check.
    Cocycle,
}

/// A violated invariant with its `(alpha, beta, gamma, p, J, rho)` coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub charts: Vec<String>,
    pub point: String,
    pub target: IndexSet,
    pub blocks: Option<Partition>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Distinct `(alpha, beta, gamma, p)` cells among cocycle violations.
    pub fn cocycle_cells(&self) -> Vec<(Vec<String>, String)> {
        let mut cells: Vec<(Vec<String>, String)> = self
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Cocycle)
            .map(|v| (v.charts.clone(), v.point.clone()))
            .collect();
        cells.dedup();
        cells.sort();
        cells.dedup();
        cells
    }
}

impl AtlasPresentation {
    /// Checks structural well-formedness; cocycle conditions are left to [`validate`](Self::validate).
    pub fn new(
        dims: DimAssignment,
        base: FiniteBase,
        mut charts: Vec<Chart>,
        transitions: BTreeMap<TransitionKey, Gauge>,
    ) -> Result<Self> {
        charts.sort_by(|a, b| a.id.cmp(&b.id));
        for w in charts.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::Structural(format!("duplicate chart id {:?}", w[0].id)));
            }
        }
        for c in &mut charts {
            for p in &c.domain {
                if !base.contains(p) {
                    return Err(Error::Structural(format!("chart {:?} contains unknown point {p:?}", c.id)));
                }
            }
            let mut dom: Vec<String> = base.points().iter().filter(|p| c.domain.contains(p)).cloned().collect();
            if dom.len() != c.domain.len() {
                return Err(Error::Structural(format!("chart {:?} lists a point twice", c.id)));
            }
            if dom.is_empty() {
                return Err(Error::Structural(format!("chart {:?} has an empty domain", c.id)));
            }
            std::mem::swap(&mut c.domain, &mut dom);
        }
        for p in base.points() {
            if !charts.iter().any(|c| c.contains(p)) {
                return Err(Error::Structural(format!("point {p:?} is not covered by any chart")));
            }
        }
        let atlas = AtlasPresentation { dims, base, charts, transitions };
        for (key, g) in &atlas.transitions {
            let (a, b) = (atlas.chart(&key.from)?, atlas.chart(&key.to)?);
            if !a.contains(&key.point) || !b.contains(&key.point) {
                return Err(Error::Structural(format!(
                    "transition {} -> {} at {:?} outside the overlap",
                    key.from, key.to, key.point
                )));
            }
            if g.source() != &atlas.dims || g.target() != &atlas.dims {
                return Err(Error::Structural(format!(
                    "transition {} -> {} at {:?} has wrong dimensions",
                    key.from, key.to, key.point
                )));
            }
        }
        for a in &atlas.charts {
            for b in &atlas.charts {
                if a.id == b.id {
                    continue;
                }
                for p in &a.domain {
                    if b.contains(p) && !atlas.transitions.contains_key(&TransitionKey::new(&a.id, &b.id, p)) {
                        return Err(Error::Structural(format!(
                            "missing transition {} -> {} at {p:?}",
                            a.id, b.id
                        )));
                    }
                }
            }
        }
        Ok(atlas)
    }

    pub fn n(&self) -> usize {
        self.dims.n()
    }

    pub fn dims(&self) -> &DimAssignment {
        &self.dims
    }

    pub fn base(&self) -> &FiniteBase {
        &self.base
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn transitions(&self) -> &BTreeMap<TransitionKey, Gauge> {
        &self.transitions
    }

    pub fn chart(&self, id: &str) -> Result<&Chart> {
        self.charts
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown chart {id:?}")))
    }

    /// Charts containing `p`, in id order.
    pub fn charts_at(&self, p: &str) -> Vec<&str> {
        self.charts.iter().filter(|c| c.contains(p)).map(|c| c.id.as_str()).collect()
    }

    /// The least chart containing `p`.
    pub fn canonical_chart(&self, p: &str) -> Result<&str> {
        self.charts_at(p)
            .first()
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown point {p:?}")))
    }

    /// Every `(chart, point)` cell, charts in id order, points in base order.
    pub fn cells(&self) -> Vec<(String, String)> {
        self.charts
            .iter()
            .flat_map(|c| c.domain.iter().map(move |p| (c.id.clone(), p.clone())))
            .collect()
    }

    /// `t_{to,from}(p)`.
    pub fn transition(&self, from: &str, to: &str, p: &str) -> Result<Cow<'_, Gauge>> {
        if let Some(g) = self.transitions.get(&TransitionKey::new(from, to, p)) {
            return Ok(Cow::Borrowed(g));
        }
        if from == to && self.chart(from)?.contains(p) {
            return Ok(Cow::Owned(Gauge::identity(&self.dims)));
        }
        Err(Error::InvalidArgument(format!("no transition {from} -> {to} at {p:?}")))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let push_diff = |out: &mut Vec<Violation>, kind, charts: Vec<String>, p: &str, lhs: &Gauge, rhs: &Gauge| {
            for (rho, t) in lhs.components() {
                if rhs.component(rho) != t {
                    out.push(Violation {
                        kind,
                        charts: charts.clone(),
                        point: p.to_string(),
                        target: rho.ground().clone(),
                        blocks: Some(rho.clone()),
                    });
                }
            }
        };
        let id = Gauge::identity(&self.dims);
        for (key, g) in &self.transitions {
            if key.from == key.to {
                push_diff(&mut out, ViolationKind::SelfTransition, vec![key.from.clone(); 3], &key.point, g, &id);
            }
            if let Err(Error::NotInvertible(j)) = g.invert() {
                out.push(Violation {
                    kind: ViolationKind::NotInvertible,
                    charts: vec![key.from.clone(), key.to.clone()],
                    point: key.point.clone(),
                    target: j,
                    blocks: None,
                });
            }
        }
        let ids: Vec<&str> = self.charts.iter().map(|c| c.id.as_str()).collect();
        for p in self.base.points() {
            let here: Vec<&str> = ids.iter().copied().filter(|c| self.chart(c).unwrap().contains(p)).collect();
            for (x, a) in here.iter().enumerate() {
                for b in &here[x + 1..] {
                    let there = self.transition(a, b, p).unwrap();
                    let back = self.transition(b, a, p).unwrap();
                    let round = back.compose(&there).unwrap();
                    push_diff(&mut out, ViolationKind::Cocycle, vec![a.to_string(), b.to_string(), a.to_string()], p, &round, &id);
                }
            }
            for (x, a) in here.iter().enumerate() {
                for (y, b) in here.iter().enumerate().skip(x + 1) {
                    for c in &here[y + 1..] {
                        let direct = self.transition(a, c, p).unwrap();
                        let via = self.transition(b, c, p).unwrap().compose(&self.transition(a, b, p).unwrap()).unwrap();
                        push_diff(&mut out, ViolationKind::Cocycle, vec![a.to_string(), b.to_string(), c.to_string()], p, &via, &direct);
                    }
                }
            }
        }
        out.sort();
        ValidationReport { violations: out }
    }

    /// The single-chart presentation with identity transitions.
    pub fn decomposed(dims: &DimAssignment, base: &FiniteBase) -> AtlasPresentation {
        let chart = Chart { id: "U".into(), domain: base.points().to_vec() };
        AtlasPresentation::new(dims.clone(), base.clone(), vec![chart], BTreeMap::new()).expect("well-formed")
    }

    /// Decomposed with the given singleton dimensions and zero elsewhere.
    pub fn vacant(singleton_dims: &[usize], base: &FiniteBase) -> AtlasPresentation {
        let n = singleton_dims.len();
        let dims = DimAssignment::from_fn(n, |j| if j.len() == 1 { singleton_dims[j.min().unwrap() as usize - 1] } else { 0 });
        AtlasPresentation::decomposed(&dims, base)
    }

    /// The decomposed presentation over the cube of blocks of `rho`.
    pub fn diagonal(dims: &DimAssignment, rho: &Partition, base: &FiniteBase) -> Result<AtlasPresentation> {
        AtlasPresentation::decomposed(dims, base).reindex(rho)
    }

    /// Reindexes along a partition of a subset of `[n]`; node `nu` of the result is `[nu]`.
    pub fn reindex(&self, rho: &Partition) -> Result<AtlasPresentation> {
        let dims = reindex_dims(&self.dims, rho)?;
        let transitions = self
            .transitions
            .iter()
            .map(|(k, g)| Ok((k.clone(), g.reindex(rho)?)))
            .collect::<Result<_>>()?;
        Ok(AtlasPresentation { dims, base: self.base.clone(), charts: self.charts.clone(), transitions })
    }

    /// Same charts and building dimensions, transitions replaced by their linear parts.
    pub fn linear_model(&self) -> AtlasPresentation {
        AtlasPresentation {
            dims: self.dims.clone(),
            base: self.base.clone(),
            charts: self.charts.clone(),
            transitions: self.transitions.iter().map(|(k, g)| (k.clone(), g.linear_part())).collect(),
        }
    }

    /// Same charts, singleton building dimensions only, with the singleton linear parts.
    pub fn vacant_model(&self) -> AtlasPresentation {
        let dims = vacant_dims(&self.dims);
        let transitions = self
            .transitions
            .iter()
            .map(|(k, g)| {
                let v = Gauge::block_diagonal(&dims, &dims, |j| {
                    if j.len() == 1 { g.linear(j) } else { Matrix::zeros(0, 0) }
                })
                .expect("vacant shapes");
                (k.clone(), v)
            })
            .collect();
        AtlasPresentation { dims, base: self.base.clone(), charts: self.charts.clone(), transitions }
    }

    /// The restriction to the base points `u`.
    pub fn restrict(&self, u: &[String]) -> Result<AtlasPresentation> {
        if u.is_empty() {
            return Err(Error::InvalidArgument("restriction to an empty set of points".into()));
        }
        for p in u {
            if !self.base.contains(p) {
                return Err(Error::InvalidArgument(format!("unknown point {p:?}")));
            }
        }
        let keep: Vec<String> = self.base.points().iter().filter(|p| u.contains(p)).cloned().collect();
        let base = FiniteBase::new(keep.clone())?;
        let charts: Vec<Chart> = self
            .charts
            .iter()
            .map(|c| Chart { id: c.id.clone(), domain: c.domain.iter().filter(|p| keep.contains(p)).cloned().collect() })
            .filter(|c| !c.domain.is_empty())
            .collect();
        let transitions = self
            .transitions
            .iter()
            .filter(|(k, _)| keep.contains(&k.point))
            .map(|(k, g)| (k.clone(), g.clone()))
            .collect();
        AtlasPresentation::new(self.dims.clone(), base, charts, transitions)
    }

    /// Relabels cube indices by a permutation (`perm[i-1]` is the new label of `i`).
    pub fn relabel(&self, perm: &[u32]) -> Result<AtlasPresentation> {
        let dims = relabel_dims(&self.dims, perm)?;
        let transitions = self
            .transitions
            .iter()
            .map(|(k, g)| Ok((k.clone(), g.relabel(perm)?)))
            .collect::<Result<_>>()?;
        Ok(AtlasPresentation { dims, base: self.base.clone(), charts: self.charts.clone(), transitions })
    }

    /// New chart coordinates `w_alpha = psi_alpha(p)(v_alpha)`; transitions become
    /// `psi_beta . t_{beta,alpha} . psi_alpha^-1`, so validity is preserved.
    pub fn twist(&self, psi: &BTreeMap<(String, String), Gauge>) -> Result<AtlasPresentation> {
        let cells = self.cells();
        let mut new_dims = None;
        for cell in &cells {
            let g = psi.get(cell).ok_or_else(|| Error::InvalidArgument(format!("no twist at {cell:?}")))?;
            if g.source() != &self.dims {
                return Err(Error::DimensionMismatch("twist source dimensions".into()));
            }
            match &new_dims {
                None => new_dims = Some(g.target().clone()),
                Some(d) if d != g.target() => return Err(Error::DimensionMismatch("twist target dimensions".into())),
                _ => {}
            }
        }
        let dims = new_dims.unwrap_or_else(|| self.dims.clone());
        let mut transitions = BTreeMap::new();
        for a in &self.charts {
            for b in &self.charts {
                if a.id == b.id {
                    continue;
                }
                for p in a.domain.iter().filter(|p| b.contains(p)) {
                    let t = self.transition(&a.id, &b.id, p)?;
                    let pa = &psi[&(a.id.clone(), p.clone())];
                    let pb = &psi[&(b.id.clone(), p.clone())];
                    let g = pb.compose(&t.compose(&pa.invert()?)?)?;
                    transitions.insert(TransitionKey::new(&a.id, &b.id, p), g);
                }
            }
        }
        AtlasPresentation::new(dims, self.base.clone(), self.charts.clone(), transitions)
    }

    /// Cells where a chart-wise family `h_alpha(p)` fails to intertwine `self` with `other`:
    /// `t^other_{beta,alpha} . h_alpha = h_beta . t^self_{beta,alpha}`.
    pub fn intertwining_failures(
        &self,
        other: &AtlasPresentation,
        h: &BTreeMap<(String, String), Gauge>,
    ) -> Result<Vec<TransitionKey>> {
        if self.charts != other.charts || self.base != other.base {
            return Err(Error::Incompatible("presentations over different charts".into()));
        }
        let mut bad = Vec::new();
        for a in &self.charts {
            for b in &self.charts {
                for p in a.domain.iter().filter(|p| b.contains(p)) {
                    let ha = &h[&(a.id.clone(), p.clone())];
                    let hb = &h[&(b.id.clone(), p.clone())];
                    let lhs = other.transition(&a.id, &b.id, p)?.compose(ha)?;
                    let rhs = hb.compose(&*self.transition(&a.id, &b.id, p)?)?;
                    if lhs != rhs {
                        bad.push(TransitionKey::new(&a.id, &b.id, p));
                    }
                }
            }
        }
        Ok(bad)
    }

    /// Replaces one stored transition; used to inject faults in tests.
    pub fn with_transition(&self, key: &TransitionKey, g: Gauge) -> Result<AtlasPresentation> {
        if !self.transitions.contains_key(key) {
            return Err(Error::InvalidArgument(format!("no stored transition {key:?}")));
        }
        let mut out = self.clone();
        out.transitions.insert(key.clone(), g);
        Ok(out)
    }

    /// The given charts glued by identity transitions.
    pub fn glued(dims: &DimAssignment, base: &FiniteBase, charts: Vec<Chart>) -> Result<AtlasPresentation> {
        let mut transitions = BTreeMap::new();
        for a in &charts {
            for b in charts.iter().filter(|b| b.id != a.id) {
                for p in a.domain.iter().filter(|p| b.contains(p)) {
                    transitions.insert(TransitionKey::new(&a.id, &b.id, p), Gauge::identity(dims));
                }
            }
        }
        AtlasPresentation::new(dims.clone(), base.clone(), charts, transitions)
    }

    /// The same presentation with replaced dimensions and transitions; checked structurally.
    pub fn with_data(&self, dims: DimAssignment, transitions: BTreeMap<TransitionKey, Gauge>) -> Result<AtlasPresentation> {
        AtlasPresentation::new(dims, self.base.clone(), self.charts.clone(), transitions)
    }
}

/// Singleton dimensions kept, all others zero.
pub fn vacant_dims(dims: &DimAssignment) -> DimAssignment {
    DimAssignment::from_fn(dims.n(), |j| if j.len() == 1 { dims.get(j) } else { 0 })
}

/// A gauge with identity components wherever `keep` holds on a trivial partition
/// and zeros elsewhere, between possibly different dimension assignments with
/// matching dimensions on the kept sets.
pub fn inclusion_gauge(source: &DimAssignment, target: &DimAssignment, keep: impl Fn(&IndexSet) -> bool) -> Result<Gauge> {
    let mut g = Gauge::zero(source, target)?;
    for j in source.sets() {
        if keep(&j) {
            let (s, t) = (source.get(&j), target.get(&j));
            if s != t {
                return Err(Error::DimensionMismatch(format!("inclusion at {j}: {s} vs {t}")));
            }
            g.set_component(&Partition::trivial(&j), MultiTensor::identity(s))?;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn set(v: &[u32]) -> IndexSet {
        IndexSet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn prototypes_validate() {
        let base = FiniteBase::numbered(2);
        let d3 = DimAssignment::uniform(3, 1);
        let dec = AtlasPresentation::decomposed(&d3, &base);
        assert!(dec.validate().is_valid());
        assert_eq!(dec.dims().total(&set(&[1, 2, 3])), 7);
        let d2 = DimAssignment::from_fn(2, |j| match j.elements() { [1] => 2, [2] => 3, _ => 4 });
        let dec2 = AtlasPresentation::decomposed(&d2, &base);
        assert_eq!(dec2.dims().total(&set(&[1, 2])), 9);
        let vac = AtlasPresentation::vacant(&[1, 1, 1], &base);
        assert_eq!(vac.dims().total(&set(&[1, 2, 3])), 3);
        assert!(vac.validate().is_valid());
    }

    #[test]
    fn diagonal_examples() {
        let base = FiniteBase::numbered(1);
        let d = DimAssignment::uniform(3, 1);
        let disc = AtlasPresentation::diagonal(&d, &Partition::discrete(&set(&[1, 2, 3])), &base).unwrap();
        assert_eq!(disc, AtlasPresentation::decomposed(&d, &base));
        let rho = Partition::new(vec![set(&[1, 2]), set(&[3])]).unwrap();
        let diag = AtlasPresentation::diagonal(&d, &rho, &base).unwrap();
        assert_eq!(diag.n(), 2);
        assert_eq!(diag.dims().total(&set(&[1, 2])), 3);
        let one = AtlasPresentation::diagonal(&d, &Partition::trivial(&set(&[1, 2, 3])), &base).unwrap();
        assert_eq!(one.n(), 1);
        assert_eq!(one.dims().get(&set(&[1])), 1);
    }

    #[test]
    fn two_charts_need_inverse_transitions() {
        let mut rng = random::rng(7);
        let dims = DimAssignment::uniform(2, 1);
        let base = FiniteBase::numbered(1);
        let t = random::invertible_gauge(&mut rng, &dims);
        let charts = vec![
            Chart { id: "a".into(), domain: vec!["p0".into()] },
            Chart { id: "b".into(), domain: vec!["p0".into()] },
        ];
        let mut tr = BTreeMap::new();
        tr.insert(TransitionKey::new("a", "b", "p0"), t.clone());
        tr.insert(TransitionKey::new("b", "a", "p0"), t.invert().unwrap());
        let good = AtlasPresentation::new(dims.clone(), base.clone(), charts.clone(), tr.clone()).unwrap();
        assert!(good.validate().is_valid());
        let tau = random::nontrivial_statomorphism(&mut rng, &dims).unwrap();
        tr.insert(TransitionKey::new("b", "a", "p0"), tau.compose(&t.invert().unwrap()).unwrap());
        let bad = AtlasPresentation::new(dims, base, charts, tr).unwrap();
        let report = bad.validate();
        assert_eq!(report.cocycle_cells(), vec![(vec!["a".to_string(), "b".into(), "a".into()], "p0".to_string())]);
        let mut missing = BTreeMap::new();
        missing.insert(TransitionKey::new("a", "b", "p0"), t);
        let err = AtlasPresentation::new(
            DimAssignment::uniform(2, 1),
            FiniteBase::numbered(1),
            vec![Chart { id: "a".into(), domain: vec!["p0".into()] }, Chart { id: "b".into(), domain: vec!["p0".into()] }],
            missing,
        );
        assert!(matches!(err, Err(Error::Structural(_))));
    }

    #[test]
    fn generated_atlases_validate_and_restrict() {
        let mut rng = random::rng(11);
        for n in 1..=3 {
            let a = random::twisted_atlas(&mut rng, &random::AtlasShape { n, max_dim: 2, charts: 3, points: 3 });
            assert!(a.validate().is_valid());
            let first = a.base().points()[..1].to_vec();
            assert!(a.restrict(&first).unwrap().validate().is_valid());
            assert_eq!(a.restrict(a.base().points()).unwrap(), a);
            assert!(a.linear_model().validate().is_valid());
            assert!(a.vacant_model().validate().is_valid());
        }
    }
}
