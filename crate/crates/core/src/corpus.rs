//! The seeded fixture corpus shipped in `fixtures/`.
//!
//! Every entry is rebuilt from its seed, so the files on disk can be checked
//! byte for byte against this list.

use crate::atlas::{AtlasPresentation, Chart, FiniteBase};
use crate::exactlin::Rational;
use crate::format::{self, Document};
use crate::gauge::DimAssignment;
use crate::infbundle::{DimRule, Generator, TransitionRule};
use crate::random::{self, AtlasShape};

pub struct Fixture {
    pub name: &'static str,
    pub document: Document,
}

impl Fixture {
    pub fn file_name(&self) -> String {
        format!("{}.json", self.name)
    }

    pub fn text(&self) -> String {
        format::write(&self.document)
    }

    pub fn instance(&self) -> Option<&AtlasPresentation> {
        match &self.document {
            Document::Instance(a) => Some(a),
            _ => None,
        }
    }
}

/// Uniform dimension `d` on every set, over `points` points and `charts` charts, twisted.
pub fn uniform_twisted(seed: u64, n: usize, d: usize, charts: usize, points: usize) -> AtlasPresentation {
    let mut rng = random::rng(seed);
    let base = FiniteBase::numbered(points);
    let cover = random::chart_cover(&mut rng, charts, &base);
    let plain = AtlasPresentation::glued(&DimAssignment::uniform(n, d), &base, cover).expect("well-formed cover");
    random::twist(&mut rng, &plain)
}

fn twisted(seed: u64, n: usize, max_dim: usize, charts: usize, points: usize) -> AtlasPresentation {
    random::twisted_atlas(&mut random::rng(seed), &AtlasShape { n, max_dim, charts, points })
}

fn instance(name: &'static str, a: AtlasPresentation) -> Fixture {
    Fixture { name, document: Document::Instance(a) }
}

/// Instances first, then generators.
pub fn fixtures() -> Vec<Fixture> {
    let base2 = FiniteBase::numbered(2);
    let rule_charts = vec![
        Chart { id: "c0".into(), domain: base2.points().to_vec() },
        Chart { id: "c1".into(), domain: vec![base2.points()[0].clone()] },
    ];
    vec![
        instance("decomposed_n2", AtlasPresentation::decomposed(&DimAssignment::uniform(2, 1), &FiniteBase::numbered(1))),
        instance("decomposed_n3", AtlasPresentation::decomposed(&DimAssignment::uniform(3, 1), &FiniteBase::numbered(2))),
        instance("twisted_n2", twisted(101, 2, 2, 3, 4)),
        instance("twisted_n3_ones", uniform_twisted(102, 3, 1, 2, 2)),
        instance("twisted_n3", twisted(103, 3, 2, 3, 4)),
        instance("twisted_n4_ones", uniform_twisted(104, 4, 1, 2, 2)),
        instance("twisted_n4", twisted(105, 4, 2, 3, 4)),
        Fixture {
            name: "generator_stabilizing_n3",
            document: Document::Generator(Generator::Stabilizing { n: 3, instance: uniform_twisted(106, 3, 1, 2, 2) }),
        },
        Fixture {
            name: "generator_rule",
            document: Document::Generator(Generator::Rule {
                base: base2,
                charts: rule_charts,
                dims: DimRule::CardAtMost { max: 2, dim: 1 },
                transitions: TransitionRule::ChartTwist { coefficient: Rational::new(1, 2) },
            }),
        },
    ]
}

pub fn instances() -> Vec<(&'static str, AtlasPresentation)> {
    fixtures().into_iter().filter_map(|f| match f.document {
        Document::Instance(a) => Some((f.name, a)),
        _ => None,
    }).collect()
}
