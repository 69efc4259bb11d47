//! Seeded random instances: rationals, coordinates, gauges and twisted atlases.
//!
//! Twisted atlases start from a multi-chart presentation with identity
//! transitions and conjugate by random invertible gauges per chart and point,
//! so they are valid by construction.

use crate::atlas::{AtlasPresentation, Chart, FiniteBase};
use crate::cubecat::{IndexSet, Partition};
use crate::exactlin::{Matrix, MultiTensor, Rational, Vector};
use crate::gauge::{Coords, DimAssignment, Gauge};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small integers, occasionally halves or thirds.
pub fn rational(rng: &mut Rng8) -> Rational {
    let n = rng.gen_range(-3i64..=3);
    match rng.gen_range(0..6) {
        0 => Rational::new(n, 2),
        1 => Rational::new(n, 3),
        _ => Rational::from_int(n),
    }
}

/// Integers in `[-2, 2]`; used for gauge entries to keep growth mild.
pub fn small_int(rng: &mut Rng8) -> Rational {
    Rational::from_int(rng.gen_range(-2i64..=2))
}

pub fn vector(rng: &mut Rng8, d: usize) -> Vector {
    (0..d).map(|_| rational(rng)).collect()
}

pub fn coords(rng: &mut Rng8, dims: &DimAssignment, node: &IndexSet) -> Coords {
    node.nonempty_subsets().into_iter().map(|j| {
        let v = vector(rng, dims.get(&j));
        (j, v)
    }).collect()
}

pub fn tensor(rng: &mut Rng8, out_dim: usize, in_dims: Vec<usize>) -> MultiTensor {
    let len = out_dim * in_dims.iter().product::<usize>();
    MultiTensor::new(out_dim, in_dims, (0..len).map(|_| small_int(rng)).collect()).expect("shape")
}

/// A product of unit lower and invertible upper triangular matrices.
pub fn invertible_matrix(rng: &mut Rng8, d: usize) -> Matrix {
    let mut l = Matrix::identity(d);
    let mut u = Matrix::zeros(d, d);
    let diag = [Rational::one(), Rational::from_int(-1), Rational::from_int(2), Rational::new(1, 2)];
    for i in 0..d {
        for j in 0..d {
            if j < i {
                l.set(i, j, Rational::from_int(rng.gen_range(-1..=1)));
            } else if j == i {
                u.set(i, j, diag.choose(rng).unwrap().clone());
            } else {
                u.set(i, j, Rational::from_int(rng.gen_range(-1..=1)));
            }
        }
    }
    l.mul(&u).expect("square")
}

pub fn matrix(rng: &mut Rng8, rows: usize, cols: usize) -> Matrix {
    let rows_v = (0..rows).map(|_| (0..cols).map(|_| small_int(rng)).collect()).collect();
    let mut m = Matrix::from_rows(rows_v).expect("rectangular");
    if rows == 0 {
        m = Matrix::zeros(0, cols);
    }
    m
}

/// Arbitrary components, including linear parts.
pub fn gauge(rng: &mut Rng8, source: &DimAssignment, target: &DimAssignment) -> Gauge {
    let mut g = Gauge::zero(source, target).expect("same cube");
    let keys: Vec<Partition> = g.components().keys().cloned().collect();
    for rho in keys {
        let t = tensor(rng, target.get(rho.ground()), source.block_dims(&rho));
        g.set_component(&rho, t).expect("shape");
    }
    g
}

/// Invertible linear parts and random nonlinear components.
pub fn invertible_gauge(rng: &mut Rng8, dims: &DimAssignment) -> Gauge {
    let mut g = gauge(rng, dims, dims);
    for j in dims.sets() {
        let m = invertible_matrix(rng, dims.get(&j));
        g.set_component(&Partition::trivial(&j), MultiTensor::from_matrix(&m)).expect("shape");
    }
    g
}

/// Identity linear parts and random nonlinear components.
pub fn statomorphism(rng: &mut Rng8, dims: &DimAssignment) -> Gauge {
    let mut g = gauge(rng, dims, dims);
    for j in dims.sets() {
        g.set_component(&Partition::trivial(&j), MultiTensor::identity(dims.get(&j))).expect("shape");
    }
    g
}

/// A statomorphism that differs from the identity, when the dimensions allow one.
pub fn nontrivial_statomorphism(rng: &mut Rng8, dims: &DimAssignment) -> Option<Gauge> {
    let has_room = dims.sets().iter().any(|j| {
        dims.get(j) > 0 && crate::cubecat::partitions(j).unwrap().iter().any(|r| r.len() > 1 && dims.block_dims(r).iter().all(|&d| d > 0))
    });
    if !has_room {
        return None;
    }
    loop {
        let g = statomorphism(rng, dims);
        if !g.is_identity() {
            return Some(g);
        }
    }
}

pub fn block_diagonal_invertible(rng: &mut Rng8, dims: &DimAssignment) -> Gauge {
    let mats: BTreeMap<IndexSet, Matrix> = dims.sets().into_iter().map(|j| {
        let m = invertible_matrix(rng, dims.get(&j));
        (j, m)
    }).collect();
    Gauge::block_diagonal(dims, dims, |j| mats[j].clone()).expect("shape")
}

/// Singletons in `1..=max_dim`, larger sets in `0..=max_dim`.
pub fn dims(rng: &mut Rng8, n: usize, max_dim: usize) -> DimAssignment {
    let values: BTreeMap<IndexSet, usize> = IndexSet::range(n).nonempty_subsets().into_iter().map(|j| {
        let lo = if j.len() == 1 { 1 } else { 0 };
        let d = rng.gen_range(lo..=max_dim.max(lo));
        (j, d)
    }).collect();
    DimAssignment::new(n, values).expect("complete")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AtlasShape {
    pub n: usize,
    pub max_dim: usize,
    pub charts: usize,
    pub points: usize,
}

/// Charts `c0..`: `c0` covers the base, the others cover `p0` and a random
/// subset of the remaining points, so `p0` lies in every chart.
pub fn chart_cover(rng: &mut Rng8, charts: usize, base: &FiniteBase) -> Vec<Chart> {
    let pts = base.points();
    (0..charts)
        .map(|c| {
            let domain = pts
                .iter()
                .enumerate()
                .filter(|(i, _)| c == 0 || *i == 0 || rng.gen_bool(0.5))
                .map(|(_, p)| p.clone())
                .collect();
            Chart { id: format!("c{c}"), domain }
        })
        .collect()
}

/// The given charts glued by identity transitions.
pub fn untwisted(dims: &DimAssignment, base: &FiniteBase, charts: Vec<Chart>) -> AtlasPresentation {
    AtlasPresentation::glued(dims, base, charts).expect("well-formed")
}

/// Conjugates every chart of `atlas` by a gauge drawn from `draw`.
pub fn twist_with(rng: &mut Rng8, atlas: &AtlasPresentation, mut draw: impl FnMut(&mut Rng8, &DimAssignment) -> Gauge) -> AtlasPresentation {
    let psi: BTreeMap<(String, String), Gauge> = atlas.cells().into_iter().map(|cell| {
        let g = draw(rng, atlas.dims());
        (cell, g)
    }).collect();
    atlas.twist(&psi).expect("twist of a valid atlas")
}

/// A random valid presentation with nonlinear transitions.
pub fn twisted_atlas(rng: &mut Rng8, shape: &AtlasShape) -> AtlasPresentation {
    let dims = dims(rng, shape.n, shape.max_dim);
    let base = FiniteBase::numbered(shape.points);
    let charts = chart_cover(rng, shape.charts, &base);
    let plain = untwisted(&dims, &base, charts);
    twist_with(rng, &plain, invertible_gauge)
}

/// A random valid presentation whose transitions are block diagonal.
pub fn linear_atlas(rng: &mut Rng8, shape: &AtlasShape) -> AtlasPresentation {
    let dims = dims(rng, shape.n, shape.max_dim);
    let base = FiniteBase::numbered(shape.points);
    let charts = chart_cover(rng, shape.charts, &base);
    let plain = untwisted(&dims, &base, charts);
    twist_with(rng, &plain, block_diagonal_invertible)
}

/// Twists a given presentation by random invertible gauges.
pub fn twist(rng: &mut Rng8, atlas: &AtlasPresentation) -> AtlasPresentation {
    twist_with(rng, atlas, invertible_gauge)
}

/// Random coordinates at `node` in a random chart at a random point.
pub fn pick_cell(rng: &mut Rng8, atlas: &AtlasPresentation) -> (String, String) {
    let cells = atlas.cells();
    cells.choose(rng).cloned().expect("nonempty atlas")
}

pub fn choose<'a, T>(rng: &mut Rng8, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("nonempty choice")
}

/// A random chart containing `point`.
pub fn pick_chart_at(rng: &mut Rng8, atlas: &AtlasPresentation, point: &str) -> String {
    choose(rng, &atlas.charts_at(point)).to_string()
}
