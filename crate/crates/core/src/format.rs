//! The JSON wire format, version 1.
//!
//! Rationals are strings `"p/q"` in lowest terms (`"p"` when integral).
//! Gauges list their components `{target, blocks, tensor}`; zero components
//! are omitted except the linear parts. Writers emit pretty JSON followed by
//! a newline, so a written document reads back and rewrites to the same bytes.
//!
//! Reading distinguishes three failures: [`Error::Syntax`] with a byte
//! offset, [`Error::Schema`] with the path of the offending value, and
//! [`Error::Semantic`] for well-formed documents describing invalid objects.

use crate::atlas::{AtlasPresentation, Chart, FiniteBase, TransitionKey};
use crate::bundle::BundleMorphism;
use crate::cubecat::{IndexSet, Partition};
use crate::error::{Error, Result};
use crate::exactlin::{MultiTensor, Rational};
use crate::gauge::{DimAssignment, Gauge};
use crate::infbundle::{DimRule, Generator, TransitionRule};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::{BTreeMap, BTreeSet};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimEntry {
    pub set: IndexSet,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDoc {
    pub out_dim: usize,
    pub in_dims: Vec<usize>,
    pub entries: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub target: IndexSet,
    pub blocks: Partition,
    pub tensor: TensorDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeDoc {
    pub n: usize,
    pub source_dims: Vec<DimEntry>,
    pub target_dims: Vec<DimEntry>,
    pub components: Vec<ComponentDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDoc {
    pub id: String,
    pub domain: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub to: String,
    pub point: String,
    pub gauge: GaugeDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub format_version: u32,
    pub n: usize,
    pub base: Vec<String>,
    pub dims: Vec<DimEntry>,
    pub charts: Vec<ChartDoc>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDoc {
    pub chart: String,
    pub point: String,
    pub components: Vec<ComponentDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub format_version: u32,
    pub n: usize,
    pub source_dims: Vec<DimEntry>,
    pub target_dims: Vec<DimEntry>,
    pub cells: Vec<CellDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorDoc {
    Stabilizing {
        format_version: u32,
        #[serde(rename = "N")]
        n: usize,
        instance: InstanceDoc,
    },
    Rule {
        format_version: u32,
        base: Vec<String>,
        charts: Vec<ChartDoc>,
        dim_rule: DimRule,
        transition_rule: TransitionRule,
    },
}

/// Any readable document.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Instance(AtlasPresentation),
    Generator(Generator),
    Gauge(Gauge),
    Morphism(BundleMorphism),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

/// Parses JSON text; failures carry the byte offset.
pub fn parse_json(bytes: &[u8]) -> Result<Value> {
    serde_json::from_slice(bytes).map_err(|e| {
        let offset = byte_offset(bytes, e.line(), e.column());
        Error::Syntax { offset, message: e.to_string() }
    })
}

/// Byte offset of a 1-based line and column.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let start: usize = bytes.split(|&b| b == b'\n').take(line.saturating_sub(1)).map(|l| l.len() + 1).sum();
    (start + column.saturating_sub(1)).min(bytes.len())
}

fn typed<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })
}

fn join(path: &str, field: &str) -> String {
    if path.is_empty() {
        field.to_string()
    } else {
        format!("{path}.{field}")
    }
}

fn check_version(path: &str, v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(schema(path, format!("unsupported format_version {v}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

pub fn dims_to_doc(dims: &DimAssignment) -> Vec<DimEntry> {
    dims.iter().map(|(set, dim)| DimEntry { set: set.clone(), dim }).collect()
}

pub fn dims_from_doc(n: usize, entries: &[DimEntry], path: &str) -> Result<DimAssignment> {
    let mut map = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        if map.insert(e.set.clone(), e.dim).is_some() {
            return Err(schema(format!("{path}[{i}]"), format!("dimension of {} given twice", e.set)));
        }
    }
    DimAssignment::new(n, map).map_err(|e| schema(path, e.to_string()))
}

fn tensor_doc(t: &MultiTensor) -> TensorDoc {
    TensorDoc { out_dim: t.out_dim(), in_dims: t.in_dims().to_vec(), entries: t.entries().to_vec() }
}

fn components_to_doc(g: &Gauge) -> Vec<ComponentDoc> {
    g.components()
        .iter()
        .filter(|(rho, t)| rho.len() == 1 || !t.is_zero())
        .map(|(rho, t)| ComponentDoc { target: rho.ground().clone(), blocks: rho.clone(), tensor: tensor_doc(t) })
        .collect()
}

fn components_from_doc(source: &DimAssignment, target: &DimAssignment, docs: &[ComponentDoc], path: &str) -> Result<Gauge> {
    let mut g = Gauge::zero(source, target).map_err(|e| schema(path, e.to_string()))?;
    let mut seen = BTreeSet::new();
    for (i, c) in docs.iter().enumerate() {
        let here = format!("{path}[{i}]");
        let name = format!("(J = {}, blocks = {})", c.target, c.blocks);
        if c.blocks.ground() != &c.target {
            return Err(schema(here, format!("component {name}: blocks do not partition the target")));
        }
        if !c.target.is_subset(&source.top()) {
            return Err(schema(here, format!("component {name}: target outside [{}]", source.n())));
        }
        if !seen.insert(c.blocks.clone()) {
            return Err(schema(here, format!("component {name} given twice")));
        }
        let (out, ins) = (target.get(&c.target), source.block_dims(&c.blocks));
        if c.tensor.out_dim != out || c.tensor.in_dims != ins {
            return Err(schema(
                join(&here, "tensor"),
                format!("component {name}: expected shape {out}x{ins:?}, got {}x{:?}", c.tensor.out_dim, c.tensor.in_dims),
            ));
        }
        let expected = out * ins.iter().product::<usize>();
        if c.tensor.entries.len() != expected {
            return Err(schema(
                join(&here, "tensor.entries"),
                format!("component {name}: needs {expected} entries, got {}", c.tensor.entries.len()),
            ));
        }
        let t = MultiTensor::new(out, ins, c.tensor.entries.clone()).map_err(|e| schema(&here, e.to_string()))?;
        g.set_component(&c.blocks, t).map_err(|e| schema(&here, e.to_string()))?;
    }
    Ok(g)
}

pub fn gauge_to_doc(g: &Gauge) -> GaugeDoc {
    GaugeDoc { n: g.n(), source_dims: dims_to_doc(g.source()), target_dims: dims_to_doc(g.target()), components: components_to_doc(g) }
}

pub fn gauge_from_doc(doc: &GaugeDoc, path: &str) -> Result<Gauge> {
    let source = dims_from_doc(doc.n, &doc.source_dims, &join(path, "source_dims"))?;
    let target = dims_from_doc(doc.n, &doc.target_dims, &join(path, "target_dims"))?;
    components_from_doc(&source, &target, &doc.components, &join(path, "components"))
}

fn charts_to_doc(charts: &[Chart]) -> Vec<ChartDoc> {
    charts.iter().map(|c| ChartDoc { id: c.id.clone(), domain: c.domain.clone() }).collect()
}

fn charts_from_doc(docs: &[ChartDoc]) -> Vec<Chart> {
    docs.iter().map(|c| Chart { id: c.id.clone(), domain: c.domain.clone() }).collect()
}

fn semantic(e: Error) -> Error {
    match e {
        Error::Schema { .. } | Error::Syntax { .. } | Error::Semantic(_) => e,
        other => Error::Semantic(other.to_string()),
    }
}

pub fn instance_to_doc(atlas: &AtlasPresentation) -> InstanceDoc {
    InstanceDoc {
        format_version: FORMAT_VERSION,
        n: atlas.n(),
        base: atlas.base().points().to_vec(),
        dims: dims_to_doc(atlas.dims()),
        charts: charts_to_doc(atlas.charts()),
        transitions: atlas
            .transitions()
            .iter()
            .map(|(k, g)| TransitionDoc { from: k.from.clone(), to: k.to.clone(), point: k.point.clone(), gauge: gauge_to_doc(g) })
            .collect(),
    }
}

/// The presentation of a document, checked structurally; cocycle conditions
/// are left to validation.
pub fn instance_from_doc(doc: &InstanceDoc, path: &str) -> Result<AtlasPresentation> {
    check_version(&join(path, "format_version"), doc.format_version)?;
    let dims = dims_from_doc(doc.n, &doc.dims, &join(path, "dims"))?;
    let base = FiniteBase::new(doc.base.clone()).map_err(semantic)?;
    let mut transitions = BTreeMap::new();
    for (i, t) in doc.transitions.iter().enumerate() {
        let here = join(path, &format!("transitions[{i}]"));
        let g = gauge_from_doc(&t.gauge, &join(&here, "gauge"))?;
        if g.source() != &dims || g.target() != &dims {
            return Err(schema(join(&here, "gauge"), "gauge dimensions differ from the instance dimensions"));
        }
        if transitions.insert(TransitionKey::new(&t.from, &t.to, &t.point), g).is_some() {
            return Err(schema(here, format!("transition {} -> {} at {:?} given twice", t.from, t.to, t.point)));
        }
    }
    AtlasPresentation::new(dims, base, charts_from_doc(&doc.charts), transitions).map_err(semantic)
}

pub fn morphism_to_doc(m: &BundleMorphism) -> MorphismDoc {
    MorphismDoc {
        format_version: FORMAT_VERSION,
        n: m.source_dims().n(),
        source_dims: dims_to_doc(m.source_dims()),
        target_dims: dims_to_doc(m.target_dims()),
        cells: m
            .data()
            .iter()
            .map(|((chart, point), g)| CellDoc { chart: chart.clone(), point: point.clone(), components: components_to_doc(g) })
            .collect(),
    }
}

pub fn morphism_from_doc(doc: &MorphismDoc) -> Result<BundleMorphism> {
    check_version("format_version", doc.format_version)?;
    let source = dims_from_doc(doc.n, &doc.source_dims, "source_dims")?;
    let target = dims_from_doc(doc.n, &doc.target_dims, "target_dims")?;
    let mut data = BTreeMap::new();
    for (i, c) in doc.cells.iter().enumerate() {
        let g = components_from_doc(&source, &target, &c.components, &format!("cells[{i}].components"))?;
        if data.insert((c.chart.clone(), c.point.clone()), g).is_some() {
            return Err(schema(format!("cells[{i}]"), format!("cell ({}, {}) given twice", c.chart, c.point)));
        }
    }
    BundleMorphism::new(source, target, data).map_err(semantic)
}

pub fn generator_to_doc(g: &Generator) -> GeneratorDoc {
    match g {
        Generator::Stabilizing { n, instance } => {
            GeneratorDoc::Stabilizing { format_version: FORMAT_VERSION, n: *n, instance: instance_to_doc(instance) }
        }
        Generator::Rule { base, charts, dims, transitions } => GeneratorDoc::Rule {
            format_version: FORMAT_VERSION,
            base: base.points().to_vec(),
            charts: charts_to_doc(charts),
            dim_rule: dims.clone(),
            transition_rule: transitions.clone(),
        },
    }
}

pub fn generator_from_doc(doc: &GeneratorDoc) -> Result<Generator> {
    match doc {
        GeneratorDoc::Stabilizing { format_version, n, instance } => {
            check_version("format_version", *format_version)?;
            let instance = instance_from_doc(instance, "instance")?;
            if instance.n() != *n {
                return Err(schema("N", format!("N = {n} but the instance is {}-fold", instance.n())));
            }
            Ok(Generator::Stabilizing { n: *n, instance })
        }
        GeneratorDoc::Rule { format_version, base, charts, dim_rule, transition_rule } => {
            check_version("format_version", *format_version)?;
            let base = FiniteBase::new(base.clone()).map_err(semantic)?;
            let charts = charts_from_doc(charts);
            AtlasPresentation::glued(&DimAssignment::from_fn(0, |_| 0), &base, charts.clone()).map_err(semantic)?;
            Ok(Generator::Rule { base, charts, dims: dim_rule.clone(), transitions: transition_rule.clone() })
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_text<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable document");
    s.push('\n');
    s
}

pub fn write_instance(atlas: &AtlasPresentation) -> String {
    to_text(&instance_to_doc(atlas))
}

pub fn write_gauge(g: &Gauge) -> String {
    to_text(&gauge_to_doc(g))
}

pub fn write_morphism(m: &BundleMorphism) -> String {
    to_text(&morphism_to_doc(m))
}

pub fn write_generator(g: &Generator) -> String {
    to_text(&generator_to_doc(g))
}

/// Reads a presentation without checking the cocycle conditions.
pub fn read_instance(bytes: &[u8]) -> Result<AtlasPresentation> {
    instance_from_doc(&typed(parse_json(bytes)?)?, "")
}

pub fn read_gauge(bytes: &[u8]) -> Result<Gauge> {
    gauge_from_doc(&typed(parse_json(bytes)?)?, "")
}

pub fn read_morphism(bytes: &[u8]) -> Result<BundleMorphism> {
    morphism_from_doc(&typed(parse_json(bytes)?)?)
}

pub fn read_generator(bytes: &[u8]) -> Result<Generator> {
    generator_from_doc(&typed(parse_json(bytes)?)?)
}

/// Reads any document, recognized by its fields; presentations must validate.
pub fn parse(bytes: &[u8]) -> Result<Document> {
    let value = parse_json(bytes)?;
    let obj = value.as_object().ok_or_else(|| schema("", "expected a JSON object"))?;
    if obj.contains_key("kind") {
        Ok(Document::Generator(generator_from_doc(&typed(value)?)?))
    } else if obj.contains_key("transitions") {
        let atlas = instance_from_doc(&typed(value)?, "")?;
        let report = atlas.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::Semantic(format!(
                "{} violation(s); first: {:?} at charts {:?}, point {:?}, component {}",
                report.violations.len(),
                v.kind,
                v.charts,
                v.point,
                v.target
            )));
        }
        Ok(Document::Instance(atlas))
    } else if obj.contains_key("cells") {
        Ok(Document::Morphism(morphism_from_doc(&typed(value)?)?))
    } else if obj.contains_key("components") {
        Ok(Document::Gauge(gauge_from_doc(&typed(value)?, "")?))
    } else {
        Err(schema("", "unrecognized document: expected an instance, generator, gauge or morphism"))
    }
}

/// Rewrites a document in canonical form.
pub fn write(doc: &Document) -> String {
    match doc {
        Document::Instance(a) => write_instance(a),
        Document::Generator(g) => write_generator(g),
        Document::Gauge(g) => write_gauge(g),
        Document::Morphism(m) => write_morphism(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{self, AtlasShape};

    fn sample() -> AtlasPresentation {
        let mut rng = random::rng(31);
        random::twisted_atlas(&mut rng, &AtlasShape { n: 2, max_dim: 2, charts: 2, points: 2 })
    }

    #[test]
    fn instance_round_trip() {
        let a = sample();
        let text = write_instance(&a);
        let back = read_instance(text.as_bytes()).unwrap();
        assert_eq!(back, a);
        assert_eq!(write_instance(&back), text);
        assert!(matches!(parse(text.as_bytes()).unwrap(), Document::Instance(_)));
    }

    #[test]
    fn truncated_text_is_a_syntax_error() {
        let text = write_instance(&sample());
        let cut = &text.as_bytes()[..text.len() / 2];
        match read_instance(cut) {
            Err(Error::Syntax { offset, .. }) => assert!(offset <= cut.len() && offset > 0),
            other => panic!("expected a syntax error, got {other:?}"),
        }
        match parse_json(b"{\"n\": 2,\n  \"x\": ]}") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 16),
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_tensor_length_names_the_component() {
        let mut doc = instance_to_doc(&sample());
        let c = doc.transitions[0].gauge.components.iter_mut().find(|c| c.blocks.len() == 2).expect("a bilinear component");
        c.tensor.entries.pop();
        let text = to_text(&doc);
        match read_instance(text.as_bytes()) {
            Err(Error::Schema { path, message }) => {
                assert!(path.starts_with("transitions[0].gauge.components["), "{path}");
                assert!(message.contains("J = {1,2}"), "{message}");
                assert!(message.contains("blocks"), "{message}");
            }
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_paths() {
        let mut v: Value = serde_json::from_str(&write_instance(&sample())).unwrap();
        v["charts"][1]["domain"] = Value::from(3);
        match read_instance(v.to_string().as_bytes()) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "charts[1].domain"),
            other => panic!("expected a schema error, got {other:?}"),
        }
        v = serde_json::from_str(&write_instance(&sample())).unwrap();
        v["format_version"] = Value::from(2);
        assert!(matches!(read_instance(v.to_string().as_bytes()), Err(Error::Schema { .. })));
    }

    #[test]
    fn invalid_cocycle_is_semantic() {
        let a = sample();
        let key = a.transitions().keys().next().unwrap().clone();
        let mut g = a.transitions()[&key].clone();
        let rho = Partition::trivial(&IndexSet::singleton(1));
        let mut t = g.component(&rho).clone();
        t.entries_mut()[0] = &t.entries()[0] + &Rational::one();
        g.set_component(&rho, t).unwrap();
        let bad = a.with_transition(&key, g).unwrap();
        let text = write_instance(&bad);
        assert!(read_instance(text.as_bytes()).is_ok());
        assert!(matches!(parse(text.as_bytes()), Err(Error::Semantic(_))));
    }

    #[test]
    fn morphism_and_generator_round_trip() {
        let a = sample();
        let mut rng = random::rng(2);
        let m = crate::split::random_statomorphism(&mut rng, &a).unwrap();
        let text = write_morphism(&m);
        assert_eq!(read_morphism(text.as_bytes()).unwrap(), m);
        let gens = [
            Generator::Stabilizing { n: 2, instance: a.clone() },
            Generator::Rule {
                base: a.base().clone(),
                charts: a.charts().to_vec(),
                dims: DimRule::CardAtMost { max: 2, dim: 1 },
                transitions: TransitionRule::ChartTwist { coefficient: Rational::new(1, 2) },
            },
        ];
        for g in gens {
            let text = write_generator(&g);
            assert_eq!(read_generator(text.as_bytes()).unwrap(), g);
            assert_eq!(write(&parse(text.as_bytes()).unwrap()), text);
        }
        let g = a.transitions().values().next().unwrap();
        assert_eq!(read_gauge(write_gauge(g).as_bytes()).unwrap(), *g);
    }
}
