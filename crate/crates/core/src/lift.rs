//! Sections of double and triple presentations over the finite base.
//!
//! At a point, a section is a map between chart coordinates. Linear and
//! doubly linear sections are found among the maps of total degree at most
//! two as the solutions of their axioms, imposed at point sets on which such
//! maps are determined by their values. Over a one-point base every module
//! is then a finite-dimensional rational space, and maps between modules are
//! read off by interpolation.
//!
//! For a triple presentation the sides are `A, B, C` (indices 1, 2, 3), the
//! faces `D = {1,2}`, `E = {2,3}`, `F = {1,3}`, and the cores at pairs are
//! `L_EF` (pair `{1,2}`), `L_DE` (pair `{1,3}`) and `L_FD` (pair `{2,3}`).

use crate::atlas::AtlasPresentation;
use crate::bundle::BundleMorphism;
use crate::certificate::Certificate;
use crate::corepull::core_partition;
use crate::cubecat::{IndexSet, Partition};
use crate::error::{Error, Result};
use crate::exactlin::{add_vectors, is_zero_vector, scale_vector, unit_vector, zero_vector, Matrix, Rational, Vector};
use crate::gauge::{add_over, scale_over, zero_coords, Coords, DimAssignment, Gauge};
use crate::random::{self, Rng8};
use crate::split::{self, Decomposition, FirstSection, Splitting};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;

/// Coordinate blocks flattened in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    blocks: Vec<(IndexSet, usize)>,
}

impl Layout {
    pub fn new(blocks: Vec<(IndexSet, usize)>) -> Self {
        Layout { blocks }
    }

    pub fn blocks(&self) -> &[(IndexSet, usize)] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|(_, d)| d).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self, x: &Coords) -> Result<Vector> {
        let mut out = Vec::with_capacity(self.len());
        for (k, d) in &self.blocks {
            let v = x.get(k).ok_or_else(|| Error::DimensionMismatch(format!("missing component {k}")))?;
            if v.len() != *d {
                return Err(Error::DimensionMismatch(format!("component {k} has length {}, expected {d}", v.len())));
            }
            out.extend(v.iter().cloned());
        }
        Ok(out)
    }

    pub fn unflatten(&self, v: &[Rational]) -> Coords {
        let mut out = Coords::new();
        let mut at = 0;
        for (k, d) in &self.blocks {
            out.insert(k.clone(), v[at..at + d].to_vec());
            at += d;
        }
        out
    }

    /// Block and in-block index of a flat position.
    fn locate(&self, mut flat: usize) -> (IndexSet, usize) {
        for (k, d) in &self.blocks {
            if flat < *d {
                return (k.clone(), flat);
            }
            flat -= d;
        }
        panic!("flat position outside the layout")
    }

    /// Flat positions of the blocks selected by `keep`.
    fn positions(&self, keep: impl Fn(&IndexSet) -> bool) -> Vec<usize> {
        let mut out = Vec::new();
        let mut at = 0;
        for (k, d) in &self.blocks {
            if keep(k) {
                out.extend(at..at + d);
            }
            at += d;
        }
        out
    }
}

fn monomial_count(n: usize) -> usize {
    1 + n + n * (n + 1) / 2
}

/// `1, x_i, x_i x_j (i <= j)`.
fn monomials(x: &[Rational]) -> Vector {
    let mut out = Vec::with_capacity(monomial_count(x.len()));
    out.push(Rational::one());
    out.extend(x.iter().cloned());
    for i in 0..x.len() {
        for j in i..x.len() {
            out.push(&x[i] * &x[j]);
        }
    }
    out
}

/// `0, e_i, 2 e_i, e_i + e_j (i < j)`: a map of degree at most two is
/// determined by its values there.
fn probe_points(n: usize) -> Vec<Vector> {
    let two = Rational::from_int(2);
    let mut out = vec![zero_vector(n)];
    for i in 0..n {
        out.push(unit_vector(n, i));
        out.push(scale_vector(&two, &unit_vector(n, i)));
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(add_vectors(&unit_vector(n, i), &unit_vector(n, j)));
        }
    }
    out
}

fn total(v: &[Rational]) -> Rational {
    v.iter().cloned().sum()
}

fn rank_of(rows: usize, columns: &[Vector]) -> Result<usize> {
    if columns.is_empty() {
        return Ok(0);
    }
    Ok(Matrix::from_columns(rows, columns)?.rank())
}

fn span_contains(rows: usize, columns: &[Vector], v: &[Rational]) -> Result<bool> {
    if columns.is_empty() {
        return Ok(is_zero_vector(v));
    }
    Matrix::from_columns(rows, columns)?.image_contains(v)
}

/// Coordinates of `v` in the basis `columns`.
fn coordinates_in(rows: usize, columns: &[Vector], v: &[Rational]) -> Result<Vector> {
    if columns.is_empty() {
        return if is_zero_vector(v) { Ok(Vec::new()) } else { Err(Error::Semantic("vector outside the span".into())) };
    }
    Matrix::from_columns(rows, columns)?.solve_any(v)?.ok_or_else(|| Error::Semantic("vector outside the span".into()))
}

fn combine(len: usize, columns: &[Vector], coefficients: &[Rational]) -> Vector {
    columns.iter().zip(coefficients).fold(zero_vector(len), |acc, (c, k)| add_vectors(&acc, &scale_vector(k, c)))
}

/// The zero over `x`, at the node `to`.
fn lift_zero(dims: &DimAssignment, x: &Coords, to: &IndexSet) -> Coords {
    let mut out = zero_coords(dims, to);
    for (k, v) in x {
        out.insert(k.clone(), v.clone());
    }
    out
}

/// The components of `x` at subsets of `node`.
fn restrict(x: &Coords, node: &IndexSet) -> Coords {
    x.iter().filter(|(k, _)| k.is_subset(node)).map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Coordinates on the cube of blocks of `rho`, from coordinates indexed by unions of blocks.
fn to_positions(rho: &Partition, x: &Coords) -> Coords {
    x.iter().filter_map(|(k, v)| rho.positions_within(k).map(|p| (p, v.clone()))).collect()
}

fn from_positions(rho: &Partition, w: &Coords) -> Coords {
    w.iter().map(|(p, v)| (rho.union_of(p).expect("block positions"), v.clone())).collect()
}

/// One entry of a component table: the coefficient vector of a monomial in
/// an output block. The monomial lists its variables as (block, index).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub set: IndexSet,
    pub monomial: Vec<(IndexSet, usize)>,
    pub vector: Vector,
}

/// Maps of degree at most two from the coordinates at the node `source` to
/// the output blocks, that for each `j` in `source` are additive over `j` in
/// every output block containing `j` and depend only on the `j`-face in the
/// others. A map is stored as its coefficients, output row by output row.
#[derive(Clone, Debug)]
pub struct LinearMaps {
    source: IndexSet,
    input: Layout,
    output: Layout,
    monomials: usize,
    interpolation: Matrix,
    /// Per output block, the functionals every row of the block must annihilate.
    laws: Vec<Matrix>,
    basis: Vec<Vector>,
}

impl LinearMaps {
    pub fn new(dims: &DimAssignment, source: &IndexSet, output: Vec<(IndexSet, usize)>) -> Result<Self> {
        let input = Layout::new(source.nonempty_subsets().into_iter().map(|k| {
            let d = dims.get(&k);
            (k, d)
        }).collect());
        let output = Layout::new(output);
        let n = input.len();
        let k = monomial_count(n);
        let vander = Matrix::from_rows(probe_points(n).iter().map(|p| monomials(p)).collect())?;
        let interpolation = vander.inverse()?;
        let mut laws = Vec::new();
        let mut basis = Vec::new();
        let mut row = 0;
        for (label, d) in output.blocks() {
            let rows = law_rows(&input, source, label);
            let law = if rows.is_empty() { Matrix::zeros(0, k) } else { Matrix::from_rows(rows)? };
            let allowed = if rows_empty(&law) { (0..k).map(|i| unit_vector(k, i)).collect() } else { law.kernel_basis() };
            for r in row..row + d {
                for a in &allowed {
                    let mut v = zero_vector(output.len() * k);
                    v[r * k..(r + 1) * k].clone_from_slice(a);
                    basis.push(v);
                }
            }
            row += d;
            laws.push(law);
        }
        Ok(LinearMaps { source: source.clone(), input, output, monomials: k, interpolation, laws, basis })
    }

    /// Sections of the projection dropping `direction` from `source + direction`
    /// that are morphisms over the faces: the output blocks are the fiber
    /// components, the subsets containing `direction`.
    pub fn sections(dims: &DimAssignment, source: &IndexSet, direction: u32) -> Result<Self> {
        if source.contains(direction) {
            return Err(Error::InvalidArgument(format!("{direction} lies in {source}")));
        }
        let node = source.with(direction);
        let output = node.nonempty_subsets().into_iter().filter(|k| k.contains(direction)).map(|k| {
            let d = dims.get(&k);
            (k, d)
        }).collect();
        LinearMaps::new(dims, source, output)
    }

    /// Morphisms from the node `source` to the vector bundle `V_target`,
    /// additive over every element of `source`.
    pub fn morphisms(dims: &DimAssignment, source: &IndexSet, target: &IndexSet) -> Result<Self> {
        if !source.is_subset(target) {
            return Err(Error::InvalidArgument(format!("{source} is not contained in {target}")));
        }
        LinearMaps::new(dims, source, vec![(target.clone(), dims.get(target))])
    }

    pub fn source(&self) -> &IndexSet {
        &self.source
    }

    pub fn input(&self) -> &Layout {
        &self.input
    }

    pub fn output(&self) -> &Layout {
        &self.output
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn coefficient_len(&self) -> usize {
        self.output.len() * self.monomials
    }

    pub fn zero(&self) -> Vector {
        zero_vector(self.coefficient_len())
    }

    pub fn evaluate(&self, coeffs: &[Rational], x: &Coords) -> Result<Coords> {
        if coeffs.len() != self.coefficient_len() {
            return Err(Error::DimensionMismatch("coefficient vector length".into()));
        }
        let m = monomials(&self.input.flatten(x)?);
        let k = self.monomials;
        let y: Vector = (0..self.output.len()).map(|r| coeffs[r * k..(r + 1) * k].iter().zip(&m).map(|(c, v)| c * v).sum()).collect();
        Ok(self.output.unflatten(&y))
    }

    /// Coefficients of the map of degree at most two through the values of `f` at the probe points.
    pub fn fit(&self, f: impl Fn(&Coords) -> Result<Coords>) -> Result<Vector> {
        let values: Vec<Vector> = probe_points(self.input.len())
            .iter()
            .map(|p| self.output.flatten(&f(&self.input.unflatten(p))?))
            .collect::<Result<_>>()?;
        let k = self.monomials;
        let mut out = Vec::with_capacity(self.coefficient_len());
        for r in 0..self.output.len() {
            let column: Vector = values.iter().map(|v| v[r].clone()).collect();
            out.extend(self.interpolation.mul_vec(&column)?);
        }
        debug_assert_eq!(out.len(), k * self.output.len());
        Ok(out)
    }

    /// Whether the coefficients satisfy every law.
    pub fn contains(&self, coeffs: &[Rational]) -> Result<bool> {
        let k = self.monomials;
        let mut row = 0;
        for ((_, d), law) in self.output.blocks().iter().zip(&self.laws) {
            for r in row..row + d {
                if law.rows() > 0 && !is_zero_vector(&law.mul_vec(&coeffs[r * k..(r + 1) * k])?) {
                    return Ok(false);
                }
            }
            row += d;
        }
        Ok(true)
    }

    pub fn coordinates(&self, coeffs: &[Rational]) -> Result<Vector> {
        coordinates_in(self.coefficient_len(), &self.basis, coeffs)
    }

    /// Nonzero coefficients grouped by output block and monomial.
    pub fn table(&self, coeffs: &[Rational]) -> Vec<TableEntry> {
        let n = self.input.len();
        let mut names: Vec<Vec<(IndexSet, usize)>> = vec![Vec::new()];
        names.extend((0..n).map(|i| vec![self.input.locate(i)]));
        for i in 0..n {
            for j in i..n {
                names.push(vec![self.input.locate(i), self.input.locate(j)]);
            }
        }
        let k = self.monomials;
        let mut out = Vec::new();
        let mut row = 0;
        for (label, d) in self.output.blocks() {
            for (mono, name) in names.iter().enumerate() {
                let vector: Vector = (row..row + d).map(|r| coeffs[r * k + mono].clone()).collect();
                if !is_zero_vector(&vector) {
                    out.push(TableEntry { set: label.clone(), monomial: name.clone(), vector });
                }
            }
            row += d;
        }
        out
    }
}

fn rows_empty(m: &Matrix) -> bool {
    m.rows() == 0
}

/// Functionals on the monomials of the input that a row in the block `label` must annihilate.
fn law_rows(input: &Layout, source: &IndexSet, label: &IndexSet) -> Vec<Vector> {
    let n = input.len();
    let mut rows = Vec::new();
    let mut push = |m: Vector| {
        if !is_zero_vector(&m) {
            rows.push(m);
        }
    };
    for j in source.iter() {
        let moving = input.positions(|k| k.contains(j));
        let fixed = input.positions(|k| !k.contains(j));
        if label.contains(j) {
            // f(u + v + w) = f(u + v) + f(u + w) for v, w over the same j-face point u.
            let (nu, nv) = (fixed.len(), moving.len());
            for z in probe_points(nu + 2 * nv) {
                let assemble = |v: &[Rational]| {
                    let mut x = zero_vector(n);
                    for (p, c) in fixed.iter().zip(&z[..nu]) {
                        x[*p] = c.clone();
                    }
                    for (p, c) in moving.iter().zip(v) {
                        x[*p] = c.clone();
                    }
                    x
                };
                let (v, w) = z[nu..].split_at(nv);
                let sum = add_vectors(v, w);
                let m = monomials(&assemble(&sum));
                let m = add_vectors(&m, &scale_vector(&Rational::from_int(-1), &monomials(&assemble(v))));
                push(add_vectors(&m, &scale_vector(&Rational::from_int(-1), &monomials(&assemble(w)))));
            }
        } else {
            // f(x) = f(x with the components containing j set to zero).
            for x in probe_points(n) {
                let mut y = x.clone();
                for p in &moving {
                    y[*p] = Rational::zero();
                }
                push(add_vectors(&monomials(&x), &scale_vector(&Rational::from_int(-1), &monomials(&y))));
            }
        }
    }
    rows
}

/// The section value: the input coordinates completed by the fiber components.
pub fn section_value(space: &LinearMaps, coeffs: &[Rational], x: &Coords) -> Result<Coords> {
    let mut out = x.clone();
    out.extend(space.evaluate(coeffs, x)?);
    Ok(out)
}

fn fiber_part(space: &LinearMaps, y: &Coords) -> Result<Coords> {
    space
        .output()
        .blocks()
        .iter()
        .map(|(k, _)| y.get(k).map(|v| (k.clone(), v.clone())).ok_or_else(|| Error::DimensionMismatch(format!("missing component {k}"))))
        .collect()
}

/// `0_x + core`: the zero over `x` moved by a value in the core through the
/// additions over the elements of the node of `x`, the largest first.
pub fn tilde_value(dims: &DimAssignment, source: &IndexSet, direction: u32, x: &Coords, core: &Vector) -> Result<Coords> {
    let node = source.with(direction);
    let mut acc = zero_coords(dims, &node);
    acc.insert(node.clone(), core.clone());
    let elements = source.elements();
    for (pos, &j) in elements.iter().enumerate().rev() {
        let mut y = x.clone();
        for &smaller in &elements[..pos] {
            y = scale_over(smaller, &Rational::zero(), &y);
        }
        acc = add_over(j, &acc, &lift_zero(dims, &y, &node))?;
    }
    Ok(acc)
}

/// A section `s(a, b)` of the core sequence of a double presentation: linear
/// in `a` for fixed `b`.
pub fn core_sequence_section(dims: &DimAssignment, first: FirstSection, a: &Vector, b: &Vector) -> Coords {
    let top = dims.top();
    let d = dims.get(&top);
    let value = match first {
        FirstSection::ZeroTop => zero_vector(d),
        FirstSection::Skewed => {
            let q = total(b);
            vec![(Rational::one() + &q * &q) * total(a); d]
        }
    };
    let mut out = Coords::new();
    out.insert(IndexSet::singleton(1), a.clone());
    out.insert(IndexSet::singleton(2), b.clone());
    out.insert(top, value);
    out
}

/// The linear-section sequence of a double or triple presentation at a point:
/// `Hom(A, C) -> sections of D over A -> sections of B` for `n = 2`, and
/// `Mor2(D, S) -> doubly linear sections of T over D -> pairs` for `n = 3`.
/// The modules depend only on the dimensions; the chart enters when
/// sections are compared across charts.
#[derive(Clone, Debug)]
pub struct ModuleSequence {
    dims: DimAssignment,
    source: IndexSet,
    direction: u32,
    pub kernel: LinearMaps,
    pub sections: LinearMaps,
    /// For each `j` in the source, the sections over the face without `j`.
    sides: Vec<(u32, LinearMaps)>,
    /// Basis of the side tuples with matching base sections.
    pairs: Vec<Vector>,
    first: FirstSection,
}

impl ModuleSequence {
    pub fn new(dims: &DimAssignment, first: FirstSection) -> Result<Self> {
        let n = dims.n();
        if n != 2 && n != 3 {
            return Err(Error::InvalidArgument(format!("section calculus needs n = 2 or 3, got {n}")));
        }
        let top = dims.top();
        let source = IndexSet::range(n - 1);
        let direction = n as u32;
        let kernel = LinearMaps::morphisms(dims, &source, &top)?;
        let sections = LinearMaps::sections(dims, &source, direction)?;
        let sides: Vec<(u32, LinearMaps)> =
            source.iter().map(|j| Ok((j, LinearMaps::sections(dims, &source.without(j), direction)?))).collect::<Result<_>>()?;
        let mut seq = ModuleSequence { dims: dims.clone(), source, direction, kernel, sections, sides, pairs: Vec::new(), first };
        seq.pairs = seq.pair_basis()?;
        Ok(seq)
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut at = 0;
        for (_, s) in &self.sides {
            out.push(at);
            at += s.coefficient_len();
        }
        out.push(at);
        out
    }

    pub fn pair_len(&self) -> usize {
        *self.offsets().last().expect("offsets")
    }

    fn pair_basis(&self) -> Result<Vec<Vector>> {
        let off = self.offsets();
        let len = off[self.sides.len()];
        let mut block = Vec::new();
        for (s, (_, side)) in self.sides.iter().enumerate() {
            for b in side.basis() {
                let mut v = zero_vector(len);
                v[off[s]..off[s + 1]].clone_from_slice(b);
                block.push(v);
            }
        }
        // Base values agree wherever two sides share a block: its constant coefficients match.
        let mut rows = Vec::new();
        for s in 0..self.sides.len() {
            for t in s + 1..self.sides.len() {
                let (js, side_s) = &self.sides[s];
                let (jt, side_t) = &self.sides[t];
                let (ks, kt) = (side_s.monomials, side_t.monomials);
                let rows_s = side_s.output().positions(|k| !k.contains(*jt));
                let rows_t = side_t.output().positions(|k| !k.contains(*js));
                for (rs, rt) in rows_s.iter().zip(&rows_t) {
                    let mut row = zero_vector(len);
                    row[off[s] + rs * ks] = Rational::one();
                    row[off[t] + rt * kt] = Rational::from_int(-1);
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() || block.is_empty() {
            return Ok(block);
        }
        let matching = Matrix::from_rows(rows)?;
        let on_block = matching.mul(&Matrix::from_columns(len, &block)?)?;
        Ok(on_block.kernel_basis().iter().map(|k| combine(len, &block, k)).collect())
    }

    pub fn dims(&self) -> &DimAssignment {
        &self.dims
    }

    pub fn pairs(&self) -> &[Vector] {
        &self.pairs
    }

    pub fn sides(&self) -> &[(u32, LinearMaps)] {
        &self.sides
    }

    /// The side sections over the face without `j`.
    pub fn side(&self, j: u32) -> Result<&LinearMaps> {
        self.sides.iter().find(|(k, _)| *k == j).map(|(_, s)| s).ok_or_else(|| Error::InvalidArgument(format!("no side without {j}")))
    }

    fn side_slice<'v>(&self, pair: &'v [Rational], j: u32) -> &'v [Rational] {
        let off = self.offsets();
        let s = self.sides.iter().position(|(k, _)| *k == j).expect("side index");
        &pair[off[s]..off[s + 1]]
    }

    /// Concatenates side coefficients in side order.
    pub fn pair_of(&self, parts: &[(u32, Vector)]) -> Vector {
        let mut out = Vec::with_capacity(self.pair_len());
        for (j, _) in &self.sides {
            let part = parts.iter().find(|(k, _)| k == j).map(|(_, v)| v.clone());
            out.extend(part.unwrap_or_else(|| self.side(*j).expect("side").zero()));
        }
        out
    }

    pub fn tilde(&self, phi: &[Rational]) -> Result<Vector> {
        let top = self.dims.top();
        self.sections.fit(|x| {
            let core = self.kernel.evaluate(phi, x)?.remove(&top).expect("core block");
            fiber_part(&self.sections, &tilde_value(&self.dims, &self.source, self.direction, x, &core)?)
        })
    }

    /// The side sections underlying a section: its faces along the zero lifts.
    pub fn project(&self, xi: &[Rational]) -> Result<Vector> {
        let mut out = Vec::with_capacity(self.pair_len());
        for (_, side) in &self.sides {
            let face = side.source().with(self.direction);
            out.extend(side.fit(|x| {
                let y = section_value(&self.sections, xi, &lift_zero(&self.dims, x, &self.source))?;
                fiber_part(side, &restrict(&y, &face))
            })?);
        }
        Ok(out)
    }

    /// A section over the given side sections: `s(a, b(m))` for `n = 2`; for
    /// `n = 3` a splitting of `T` over `C` applied to the side values, with
    /// the core component of the argument added back through `L_EF`.
    pub fn hat(&self, pair: &[Rational]) -> Result<Vector> {
        let top = self.dims.top();
        if self.dims.n() == 2 {
            let base = self.side(1)?.evaluate(self.side_slice(pair, 1), &Coords::new())?;
            let b = base[&IndexSet::singleton(2)].clone();
            return self.sections.fit(|x| {
                let a = &x[&IndexSet::singleton(1)];
                fiber_part(&self.sections, &core_sequence_section(&self.dims, self.first, a, &b))
            });
        }
        let (side_e, side_f) = (self.side(1)?, self.side(2)?);
        let (pe, pf) = (self.side_slice(pair, 1), self.side_slice(pair, 2));
        let set = |v: &[u32]| IndexSet::new(v.iter().copied()).expect("index set");
        self.sections.fit(|x| {
            let k = x[&set(&[1, 2])].clone();
            let e = section_value(side_e, pe, &restrict(x, &set(&[2])))?;
            let f = section_value(side_f, pf, &restrict(x, &set(&[1])))?;
            let split = self.edge_splitting(&e, &f)?;
            let mut w = zero_coords(&self.dims, &top);
            w.insert(set(&[3]), e[&set(&[3])].clone());
            w.insert(set(&[1, 2]), crate::exactlin::sub_vectors(&k, &split[&set(&[1, 2])]));
            let lifted_e = lift_zero(&self.dims, &e, &top);
            let y = add_over(1, &split, &add_over(2, &lifted_e, &w)?)?;
            fiber_part(&self.sections, &y)
        })
    }

    /// A splitting of `T` as a double bundle over `C` with sides `E` and `F`,
    /// bilinear in the two fibers over `C`.
    fn edge_splitting(&self, e: &Coords, f: &Coords) -> Result<Coords> {
        let set = |v: &[u32]| IndexSet::new(v.iter().copied()).expect("index set");
        let d = &self.dims;
        let (a, b) = (&f[&set(&[1])], &e[&set(&[2])]);
        let (c_e, c_f) = (&e[&set(&[3])], &f[&set(&[3])]);
        if c_e != c_f {
            return Err(Error::FiberMismatch("side values over different points of C".into()));
        }
        let (kbc, kca) = (&e[&set(&[2, 3])], &f[&set(&[1, 3])]);
        let mut out = Coords::new();
        out.insert(set(&[1]), a.clone());
        out.insert(set(&[2]), b.clone());
        out.insert(set(&[3]), c_e.clone());
        out.insert(set(&[1, 2]), vec![total(a) * total(b); d.get(&set(&[1, 2]))]);
        out.insert(set(&[2, 3]), kbc.clone());
        out.insert(set(&[1, 3]), kca.clone());
        out.insert(set(&[1, 2, 3]), vec![total(a) * total(kbc) + total(kca) * total(b); d.get(&set(&[1, 2, 3]))]);
        Ok(out)
    }

    pub fn in_pairs(&self, v: &[Rational]) -> Result<bool> {
        span_contains(self.pair_len(), &self.pairs, v)
    }

    /// The module action of a base value: scaling in the fiber over the source.
    pub fn act(&self, f: &Rational, xi: &[Rational]) -> Result<Vector> {
        self.sections.fit(|x| fiber_part(&self.sections, &scale_over(self.direction, f, &section_value(&self.sections, xi, x)?)))
    }

    /// Exactness by ranks: `tilde` injective, `pi` onto the side tuples
    /// (through `hat`), and the image of `tilde` equal to the kernel of `pi`.
    pub fn exactness(&self) -> Result<Certificate> {
        let mut cert = Certificate::new(if self.dims.n() == 2 {
            "0 -> Hom(A,C) -> linear sections -> sections of B -> 0 is exact"
        } else {
            "0 -> Mor2(D,S) -> doubly linear sections -> side pairs -> 0 is exact"
        });
        let len = self.sections.coefficient_len();
        let tildes: Vec<Vector> = self.kernel.basis().iter().map(|phi| self.tilde(phi)).collect::<Result<_>>()?;
        for (i, t) in tildes.iter().enumerate() {
            cert.check(self.sections.contains(t)?, json!({ "reason": "tilde image is not a section", "basis": i }));
            cert.check(is_zero_vector(&self.project(t)?), json!({ "reason": "pi . tilde is not zero", "basis": i }));
        }
        let tilde_rank = rank_of(len, &tildes)?;
        cert.check(tilde_rank == self.kernel.dim(), json!({ "reason": "tilde is not injective", "rank": tilde_rank }));
        let projections: Vec<Vector> = self.sections.basis().iter().map(|xi| self.project(xi)).collect::<Result<_>>()?;
        for (i, p) in projections.iter().enumerate() {
            cert.check(self.in_pairs(p)?, json!({ "reason": "pi leaves the side tuples", "basis": i }));
        }
        for (i, p) in self.pairs.iter().enumerate() {
            let h = self.hat(p)?;
            cert.check(self.sections.contains(&h)?, json!({ "reason": "hat is not a section", "pair": i }));
            cert.check(self.project(&h)? == *p, json!({ "reason": "pi . hat is not the identity", "pair": i }));
        }
        let pi_rank = rank_of(self.pair_len(), &projections)?;
        cert.check(pi_rank == self.pairs.len(), json!({ "reason": "pi is not surjective", "rank": pi_rank }));
        let kernel_of_pi: Vec<Vector> = if projections.is_empty() {
            Vec::new()
        } else {
            Matrix::from_columns(self.pair_len(), &projections)?
                .kernel_basis()
                .iter()
                .map(|k| combine(len, self.sections.basis(), k))
                .collect()
        };
        let both: Vec<Vector> = tildes.iter().chain(&kernel_of_pi).cloned().collect();
        let joint = rank_of(len, &both)?;
        cert.check(
            joint == tilde_rank && joint == kernel_of_pi.len(),
            json!({ "reason": "image of tilde differs from kernel of pi", "image": tilde_rank, "kernel": kernel_of_pi.len() }),
        );
        cert.check(
            self.sections.dim() == self.kernel.dim() + self.pairs.len(),
            json!({ "reason": "dimensions", "middle": self.sections.dim() }),
        );
        cert.witness(json!({
            "kernel_dim": self.kernel.dim(),
            "sections_dim": self.sections.dim(),
            "quotient_dim": self.pairs.len(),
            "tilde_rank": tilde_rank,
            "pi_rank": pi_rank,
        }));
        Ok(cert)
    }

    /// Sections and kernel elements written in the canonical chart at `point`
    /// and moved to every other chart there stay in the modules.
    pub fn chart_independence(&self, atlas: &AtlasPresentation, point: &str, rng: &mut Rng8) -> Result<Certificate> {
        let mut cert = Certificate::new("the section modules do not depend on the chart");
        let home = atlas.canonical_chart(point)?.to_string();
        let top = self.dims.top();
        for chart in atlas.charts_at(point) {
            if chart == home {
                continue;
            }
            let there = atlas.transition(&home, chart, point)?.into_owned();
            let back = atlas.transition(chart, &home, point)?.into_owned();
            for (i, xi) in self.sections.basis().iter().enumerate() {
                let moved = |x: &Coords| -> Result<Coords> {
                    let y = section_value(&self.sections, xi, &back.evaluate(x)?)?;
                    fiber_part(&self.sections, &there.evaluate(&y)?)
                };
                let eta = self.sections.fit(moved)?;
                let x = random::coords(rng, &self.dims, &self.source);
                let exact = self.sections.evaluate(&eta, &x)? == moved(&x)?;
                cert.check(exact && self.sections.contains(&eta)?, json!({ "chart": chart, "point": point, "section": i }));
            }
            let linear = there.linear(&top);
            for (i, phi) in self.kernel.basis().iter().enumerate() {
                let moved = |x: &Coords| -> Result<Coords> {
                    let v = self.kernel.evaluate(phi, &back.evaluate(x)?)?;
                    Ok(BTreeMap::from([(top.clone(), linear.mul_vec(&v[&top])?)]))
                };
                let eta = self.kernel.fit(moved)?;
                cert.check(self.kernel.contains(&eta)?, json!({ "chart": chart, "point": point, "kernel": i }));
            }
        }
        Ok(cert)
    }
}

/// Exactness at every point and chart independence of the modules.
pub fn sequence_certificate(atlas: &AtlasPresentation, first: FirstSection, rng: &mut Rng8) -> Result<Certificate> {
    let seq = ModuleSequence::new(atlas.dims(), first)?;
    let mut cert = Certificate::new("the linear-section sequence is exact at every point");
    cert.absorb(seq.exactness()?);
    for p in atlas.base().points() {
        cert.absorb(seq.chart_independence(atlas, p, rng)?);
    }
    Ok(cert)
}

/// A splitting of a double presentation built from a section of its core
/// sequence: `Sigma(a, b) = sum_i beta_i . s(a, e_i)` over the standard frame
/// `e_i` of `B` in the last chart at each point, summed over `A`.
pub fn local_split_double(atlas: &AtlasPresentation, first: FirstSection, rng: &mut Rng8) -> Result<(Splitting, Certificate)> {
    if atlas.n() != 2 {
        return Err(Error::InvalidArgument("local splitting needs a double presentation".into()));
    }
    let dims = atlas.dims();
    let vac = atlas.vacant_model();
    let (s1, s2) = (IndexSet::singleton(1), IndexSet::singleton(2));
    let local = |a: &Vector, b: &Vector| -> Result<Coords> {
        let mut acc = core_sequence_section(dims, FirstSection::ZeroTop, a, &zero_vector(b.len()));
        for (i, beta) in b.iter().enumerate() {
            if beta.is_zero() {
                continue;
            }
            let term = core_sequence_section(dims, first, a, &unit_vector(b.len(), i));
            acc = add_over(2, &acc, &scale_over(2, beta, &term))?;
        }
        Ok(acc)
    };
    let mut cert = Certificate::new("local splitting: linear over both sides, agrees with its gauge");
    let mut at = BTreeMap::new();
    for p in atlas.base().points() {
        let home = atlas.canonical_chart(p)?.to_string();
        let frame = atlas.charts_at(p).last().copied().unwrap_or(home.as_str()).to_string();
        let to_frame = vac.transition(&home, &frame, p)?.into_owned();
        let from_frame = atlas.transition(&frame, &home, p)?.into_owned();
        let map = |v: &Coords| -> Result<Coords> {
            let w = to_frame.evaluate(v)?;
            from_frame.evaluate(&local(&w[&s1], &w[&s2])?)
        };
        let g = Gauge::from_fn(vac.dims(), dims, map)?;
        let (da, db) = (dims.get(&s1), dims.get(&s2));
        let (a1, a2, b1, b2) = (random::vector(rng, da), random::vector(rng, da), random::vector(rng, db), random::vector(rng, db));
        let over_b = add_over(1, &local(&a1, &b1)?, &local(&a2, &b1)?)? == local(&add_vectors(&a1, &a2), &b1)?;
        let over_a = add_over(2, &local(&a1, &b1)?, &local(&a1, &b2)?)? == local(&a1, &add_vectors(&b1, &b2))?;
        cert.check(over_a && over_b, json!({ "point": p, "reason": "not bilinear" }));
        let mut v = zero_coords(vac.dims(), &dims.top());
        v.insert(s1.clone(), a1.clone());
        v.insert(s2.clone(), b2.clone());
        cert.check(g.evaluate(&v)? == map(&v)?, json!({ "point": p, "reason": "gauge differs from the map" }));
        at.insert(p.clone(), g);
    }
    let sigma = BundleMorphism::transported(&vac, atlas, &at)?;
    cert.absorb(split::is_splitting(atlas, &sigma)?);
    Ok((sigma, cert))
}

/// Decomposition of a double presentation from a splitting, the identity on the core.
pub fn double_decomposition(atlas: &AtlasPresentation, sigma: &Splitting) -> Result<Decomposition> {
    let pair = IndexSet::range(2);
    let core = atlas.reindex(&Partition::trivial(&pair))?;
    split::splitting_to_decomposition(atlas, sigma, &BTreeMap::from([(pair, BundleMorphism::identity(&core))]))
}

fn set(v: &[u32]) -> IndexSet {
    IndexSet::new(v.iter().copied()).expect("index set")
}

fn face_d() -> Partition {
    Partition::discrete(&set(&[1, 2]))
}
fn face_e() -> Partition {
    Partition::discrete(&set(&[2, 3]))
}
fn face_f() -> Partition {
    Partition::discrete(&set(&[1, 3]))
}
fn core_de() -> Partition {
    core_partition(&set(&[1, 2, 3]), &set(&[1, 3])).expect("core partition")
}
fn core_fd() -> Partition {
    core_partition(&set(&[1, 2, 3]), &set(&[2, 3])).expect("core partition")
}
fn core_ef() -> Partition {
    core_partition(&set(&[1, 2, 3]), &set(&[1, 2])).expect("core partition")
}

/// A module splitting of the doubly linear sequence at one point: the
/// sections assigned to the basis of side pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizontalLift {
    pub point: String,
    pub chart: String,
    pub images: Vec<Vector>,
}

/// The data equivalent to a decomposition of a triple presentation: splittings
/// of the faces `D, E, F` and of the cores `L_DE, L_FD`, and a horizontal lift
/// at every point.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftData {
    pub d: Splitting,
    pub e: Splitting,
    pub f: Splitting,
    pub l_de: Splitting,
    pub l_fd: Splitting,
    pub lifts: BTreeMap<String, HorizontalLift>,
}

/// The pieces of the explicit decomposition formula at one point, in the
/// coordinates of the triple presentation.
struct Pieces<'a> {
    seq: &'a ModuleSequence,
    lift: &'a HorizontalLift,
    d: Gauge,
    e: Gauge,
    f: Gauge,
    l_de: Gauge,
    l_fd: Gauge,
}

impl<'a> Pieces<'a> {
    fn at(seq: &'a ModuleSequence, data: &'a LiftData, point: &str) -> Result<Self> {
        let lift = data.lifts.get(point).ok_or_else(|| Error::InvalidArgument(format!("no lift at {point:?}")))?;
        let chart = lift.chart.as_str();
        Ok(Pieces {
            seq,
            lift,
            d: data.d.at(chart, point)?.clone(),
            e: data.e.at(chart, point)?.clone(),
            f: data.f.at(chart, point)?.clone(),
            l_de: data.l_de.at(chart, point)?.clone(),
            l_fd: data.l_fd.at(chart, point)?.clone(),
        })
    }

    fn dims(&self) -> &DimAssignment {
        self.seq.dims()
    }

    fn zero_lift(&self, x: &Coords) -> Coords {
        lift_zero(self.dims(), x, &self.dims().top())
    }

    /// A double splitting on the cube of blocks of `rho`, at its two sides.
    fn split(g: &Gauge, rho: &Partition, first: &Vector, second: &Vector) -> Result<Coords> {
        let w = Coords::from([
            (set(&[1]), first.clone()),
            (set(&[2]), second.clone()),
            (set(&[1, 2]), zero_vector(g.source().get(&set(&[1, 2])))),
        ]);
        Ok(from_positions(rho, &g.evaluate(&w)?))
    }

    fn sigma_d(&self, a: &Vector, b: &Vector) -> Result<Coords> {
        Self::split(&self.d, &face_d(), a, b)
    }
    fn sigma_e(&self, b: &Vector, c: &Vector) -> Result<Coords> {
        Self::split(&self.e, &face_e(), b, c)
    }
    fn sigma_f(&self, a: &Vector, c: &Vector) -> Result<Coords> {
        Self::split(&self.f, &face_f(), a, c)
    }
    fn sigma_de(&self, b: &Vector, kca: &Vector) -> Result<Coords> {
        Ok(self.zero_lift(&Self::split(&self.l_de, &core_de(), kca, b)?))
    }
    fn sigma_fd(&self, a: &Vector, kbc: &Vector) -> Result<Coords> {
        Ok(self.zero_lift(&Self::split(&self.l_fd, &core_fd(), a, kbc)?))
    }

    /// `S^E(b, c, k) = Sigma^E(b, c) +_B (0 over b +_C k)`.
    fn dec_e(&self, b: &Vector, c: &Vector, k: &Vector) -> Result<Coords> {
        let s = self.sigma_e(b, c)?;
        let mut core = zero_coords(self.dims(), &set(&[2, 3]));
        core.insert(set(&[2, 3]), k.clone());
        add_over(2, &s, &add_over(3, &scale_over(2, &Rational::zero(), &s), &core)?)
    }

    fn apply_lift(&self, pair: &[Rational]) -> Result<Vector> {
        let k = coordinates_in(self.seq.pair_len(), self.seq.pairs(), pair)?;
        Ok(combine(self.seq.sections.coefficient_len(), &self.lift.images, &k))
    }

    /// The lift of `(Sigma^E(., c), Sigma^F(., c))`.
    fn horizontal(&self, c: &Vector) -> Result<Vector> {
        let (side_e, side_f) = (self.seq.side(1)?, self.seq.side(2)?);
        let xe = side_e.fit(|x| fiber_part(side_e, &self.sigma_e(&x[&set(&[2])], c)?))?;
        let xf = side_f.fit(|x| fiber_part(side_f, &self.sigma_f(&x[&set(&[1])], c)?))?;
        self.apply_lift(&self.seq.pair_of(&[(1, xe), (2, xf)]))
    }

    /// `Sigma(a, b, c)`: the horizontal lift over `c` at `Sigma^D(a, b)`.
    fn sigma(&self, a: &Vector, b: &Vector, c: &Vector) -> Result<Coords> {
        section_value(&self.seq.sections, &self.horizontal(c)?, &self.sigma_d(a, b)?)
    }

    /// `Sigma^{L_EF}(c, k)`: the horizontal lift over `c` at the core element `k` of `D`.
    fn sigma_ef(&self, c: &Vector, k: &Vector) -> Result<Coords> {
        let mut x = zero_coords(self.dims(), &set(&[1, 2]));
        x.insert(set(&[1, 2]), k.clone());
        section_value(&self.seq.sections, &self.horizontal(c)?, &x)
    }

    /// The decomposition at decomposed coordinates `x`.
    fn formula(&self, x: &Coords) -> Result<Coords> {
        let g = |v: &[u32]| x[&set(v)].clone();
        let (a, b, c) = (g(&[1]), g(&[2]), g(&[3]));
        let (kab, kbc, kca, s) = (g(&[1, 2]), g(&[2, 3]), g(&[1, 3]), g(&[1, 2, 3]));
        let z = |y: &Coords| self.zero_lift(y);
        let first = add_over(3, &self.sigma(&a, &b, &c)?, &add_over(2, &z(&self.sigma_d(&a, &b)?), &self.sigma_fd(&a, &kbc)?)?)?;
        let second = add_over(1, &z(&self.sigma_f(&a, &c)?), &self.sigma_ef(&c, &kab)?)?;
        let mut core = zero_coords(self.dims(), &self.dims().top());
        core.insert(self.dims().top(), s);
        let zero_b = z(&Coords::from([(set(&[2]), b.clone())]));
        let third = add_over(3, &add_over(3, &z(&self.dec_e(&b, &c, &kbc)?), &self.sigma_de(&b, &kca)?)?, &add_over(2, &zero_b, &core)?)?;
        add_over(1, &add_over(2, &first, &second)?, &third)
    }
}

fn check_triple(atlas: &AtlasPresentation) -> Result<()> {
    if atlas.n() != 3 {
        return Err(Error::InvalidArgument("horizontal lifts need a triple presentation".into()));
    }
    Ok(())
}

/// The lift data contained in a decomposition `S`:
/// `sigma(xi^E, xi^F)(S^D(a, b, k)) = S(a, b, c, k, phi^F(a), phi^E(b), 0)`,
/// where `xi^F(a) = S^F(a, c, phi^F(a))` and `xi^E(b) = S^E(b, c, phi^E(b))`.
pub fn lift_from_decomposition(atlas: &AtlasPresentation, seq: &ModuleSequence, s: &Decomposition) -> Result<LiftData> {
    check_triple(atlas)?;
    let face_split = |rho: &Partition| split::splitting_of(&atlas.reindex(rho)?, &s.reindex(rho)?);
    let cores = split::core_decompositions(atlas, s)?;
    let core_split = |rho: &Partition, j: &[u32]| split::splitting_of(&atlas.reindex(rho)?, &cores[&set(j)]);
    let (side_e, side_f) = (seq.side(1)?, seq.side(2)?);
    let mut lifts = BTreeMap::new();
    for p in atlas.base().points() {
        let chart = atlas.canonical_chart(p)?.to_string();
        let g = s.at(&chart, p)?;
        let inv = g.invert()?;
        let images = seq
            .pairs()
            .iter()
            .map(|pair| {
                let (pe, pf) = (seq.side_slice(pair, 1), seq.side_slice(pair, 2));
                seq.sections.fit(|d| {
                    let x = inv.evaluate(d)?;
                    let a = x[&set(&[1])].clone();
                    let b = x[&set(&[2])].clone();
                    let yf = inv.evaluate(&section_value(side_f, pf, &restrict(d, &set(&[1])))?)?;
                    let ye = inv.evaluate(&section_value(side_e, pe, &restrict(d, &set(&[2])))?)?;
                    let mut full = x.clone();
                    full.insert(set(&[3]), yf[&set(&[3])].clone());
                    full.insert(set(&[1, 3]), yf[&set(&[1, 3])].clone());
                    full.insert(set(&[2, 3]), ye[&set(&[2, 3])].clone());
                    full.insert(set(&[1, 2, 3]), zero_vector(seq.dims().get(&set(&[1, 2, 3]))));
                    debug_assert_eq!((full[&set(&[1])].clone(), full[&set(&[2])].clone()), (a, b));
                    fiber_part(&seq.sections, &g.evaluate(&full)?)
                })
            })
            .collect::<Result<_>>()?;
        lifts.insert(p.clone(), HorizontalLift { point: p.clone(), chart, images });
    }
    Ok(LiftData {
        d: face_split(&face_d())?,
        e: face_split(&face_e())?,
        f: face_split(&face_f())?,
        l_de: core_split(&core_de(), &[1, 3])?,
        l_fd: core_split(&core_fd(), &[2, 3])?,
        lifts,
    })
}

/// The lift is a right inverse of the projection to side pairs and meets the
/// core splittings:
/// `sigma(tilde phi^F, 0)(d) = 0_d +_E Sigma^{L_DE}(b, phi^F(a))` and
/// `sigma(0, tilde phi^E)(d) = 0_d +_F Sigma^{L_FD}(a, phi^E(b))`.
pub fn lift_compatibility(atlas: &AtlasPresentation, seq: &ModuleSequence, data: &LiftData) -> Result<Certificate> {
    check_triple(atlas)?;
    let dims = atlas.dims();
    let mut cert = Certificate::new("horizontal lift: right inverse of pi, compatible with the core splittings");
    let hom_f = LinearMaps::morphisms(dims, &set(&[1]), &set(&[1, 3]))?;
    let hom_e = LinearMaps::morphisms(dims, &set(&[2]), &set(&[2, 3]))?;
    let (side_e, side_f) = (seq.side(1)?, seq.side(2)?);
    let probes: Vec<Coords> = probe_points(seq.sections.input().len()).iter().map(|v| seq.sections.input().unflatten(v)).collect();
    for p in atlas.base().points() {
        let pieces = Pieces::at(seq, data, p)?;
        for (i, (pair, image)) in seq.pairs().iter().zip(&pieces.lift.images).enumerate() {
            cert.check(seq.sections.contains(image)?, json!({ "point": p, "pair": i, "reason": "lift image is not doubly linear" }));
            cert.check(seq.project(image)? == *pair, json!({ "point": p, "pair": i, "reason": "pi . sigma is not the identity" }));
        }
        for (i, phi) in hom_f.basis().iter().enumerate() {
            let xf = side_f.fit(|x| {
                let core = hom_f.evaluate(phi, x)?.remove(&set(&[1, 3])).expect("block");
                fiber_part(side_f, &tilde_value(dims, &set(&[1]), 3, x, &core)?)
            })?;
            let xi = pieces.apply_lift(&seq.pair_of(&[(2, xf)]))?;
            for d in &probes {
                let a = &d[&set(&[1])];
                let value = hom_f.evaluate(phi, &restrict(d, &set(&[1])))?[&set(&[1, 3])].clone();
                let rhs = add_over(1, &pieces.zero_lift(d), &pieces.sigma_de(&d[&set(&[2])], &value)?)?;
                if section_value(&seq.sections, &xi, d)? != rhs {
                    cert.fail(json!({ "point": p, "condition": "L_DE", "phi_F": hom_f.table(phi), "basis": i, "a": a }));
                    break;
                }
            }
        }
        for (i, phi) in hom_e.basis().iter().enumerate() {
            let xe = side_e.fit(|x| {
                let core = hom_e.evaluate(phi, x)?.remove(&set(&[2, 3])).expect("block");
                fiber_part(side_e, &tilde_value(dims, &set(&[2]), 3, x, &core)?)
            })?;
            let xi = pieces.apply_lift(&seq.pair_of(&[(1, xe)]))?;
            for d in &probes {
                let value = hom_e.evaluate(phi, &restrict(d, &set(&[2])))?[&set(&[2, 3])].clone();
                let rhs = add_over(2, &pieces.zero_lift(d), &pieces.sigma_fd(&d[&set(&[1])], &value)?)?;
                if section_value(&seq.sections, &xi, d)? != rhs {
                    cert.fail(json!({ "point": p, "condition": "L_FD", "phi_E": hom_e.table(phi), "basis": i }));
                    break;
                }
            }
        }
    }
    cert.witness(json!({ "points": data.lifts.len(), "hom_f_dim": hom_f.dim(), "hom_e_dim": hom_e.dim() }));
    Ok(cert)
}

fn require_compatible(atlas: &AtlasPresentation, seq: &ModuleSequence, data: &LiftData) -> Result<()> {
    let cert = lift_compatibility(atlas, seq, data)?;
    if !cert.passed() {
        return Err(Error::Incompatible(cert.counterexample.map(|c| c.to_string()).unwrap_or_default()));
    }
    Ok(())
}

/// The decomposition assembled by the explicit formula
/// `S(a,b,c,k_AB,k_BC,k_CA,s) =
///   ((Sigma(a,b,c) +_D (0_{Sigma^D(a,b)} +_F Sigma^{L_FD}(a,k_BC)))
///     +_F (0_{Sigma^F(a,c)} +_E Sigma^{L_EF}(c,k_AB)))
///   +_E (0_{S^E(b,c,k_BC)} +_D Sigma^{L_DE}(b,k_CA) +_D (0_{0^D_b} +_F s))`,
/// with `Sigma` and `Sigma^{L_EF}` obtained from the lift. Each gauge is
/// compared with the formula at `samples` random inputs.
pub fn decomposition_from_lift(
    atlas: &AtlasPresentation,
    seq: &ModuleSequence,
    data: &LiftData,
    rng: &mut Rng8,
    samples: usize,
) -> Result<Decomposition> {
    check_triple(atlas)?;
    require_compatible(atlas, seq, data)?;
    let dims = atlas.dims();
    let mut at = BTreeMap::new();
    for p in atlas.base().points() {
        let pieces = Pieces::at(seq, data, p)?;
        let g = Gauge::from_fn(dims, dims, |x| pieces.formula(x))?;
        for _ in 0..samples {
            let x = random::coords(rng, dims, &dims.top());
            if g.evaluate(&x)? != pieces.formula(&x)? {
                return Err(Error::Semantic(format!("the formula is not multilinear at {p:?}")));
            }
        }
        at.insert(p.clone(), g);
    }
    BundleMorphism::transported(&atlas.linear_model(), atlas, &at)
}

/// The splitting `Sigma(a, b, c)` obtained from the lift.
pub fn splitting_from_lift(atlas: &AtlasPresentation, seq: &ModuleSequence, data: &LiftData) -> Result<Splitting> {
    check_triple(atlas)?;
    let vac = atlas.vacant_model();
    let mut at = BTreeMap::new();
    for p in atlas.base().points() {
        let pieces = Pieces::at(seq, data, p)?;
        let g = Gauge::from_fn(vac.dims(), atlas.dims(), |v| pieces.sigma(&v[&set(&[1])], &v[&set(&[2])], &v[&set(&[3])]))?;
        at.insert(p.clone(), g);
    }
    BundleMorphism::transported(&vac, atlas, &at)
}

/// The splitting `Sigma^{L_EF}(c, k) = sigma(Sigma^E(., c), Sigma^F(., c))(k)` of the core `L_EF`.
pub fn core_splitting_from_lift(atlas: &AtlasPresentation, seq: &ModuleSequence, data: &LiftData) -> Result<Splitting> {
    check_triple(atlas)?;
    let rho = core_ef();
    let core = atlas.reindex(&rho)?;
    let vac = core.vacant_model();
    let mut at = BTreeMap::new();
    for p in atlas.base().points() {
        let pieces = Pieces::at(seq, data, p)?;
        let g = Gauge::from_fn(vac.dims(), core.dims(), |w| {
            Ok(to_positions(&rho, &pieces.sigma_ef(&w[&set(&[2])], &w[&set(&[1])])?))
        })?;
        at.insert(p.clone(), g);
    }
    BundleMorphism::transported(&vac, &core, &at)
}

/// The decomposition built by the staged chain from the same lift data:
/// `Sigma` from the lift, and the three core decompositions from the core splittings.
pub fn pipeline_from_lift(atlas: &AtlasPresentation, seq: &ModuleSequence, data: &LiftData) -> Result<Decomposition> {
    require_compatible(atlas, seq, data)?;
    let sigma = splitting_from_lift(atlas, seq, data)?;
    let ef = core_splitting_from_lift(atlas, seq, data)?;
    let mut cores = BTreeMap::new();
    for (j, rho, s) in [(set(&[1, 2]), core_ef(), &ef), (set(&[1, 3]), core_de(), &data.l_de), (set(&[2, 3]), core_fd(), &data.l_fd)] {
        cores.insert(j, double_decomposition(&atlas.reindex(&rho)?, s)?);
    }
    split::splitting_to_decomposition(atlas, &sigma, &cores)
}

/// The explicit formula against the staged chain, and the round trip through
/// the lift data, for a decomposition `s`.
pub fn lift_round_trip(atlas: &AtlasPresentation, s: &Decomposition, rng: &mut Rng8) -> Result<Certificate> {
    let seq = ModuleSequence::new(atlas.dims(), FirstSection::ZeroTop)?;
    let mut cert = Certificate::new("decomposition <-> horizontal lift round trip; formula equals the chain");
    let data = lift_from_decomposition(atlas, &seq, s)?;
    cert.absorb(lift_compatibility(atlas, &seq, &data)?);
    let rebuilt = decomposition_from_lift(atlas, &seq, &data, rng, 2)?;
    cert.check(rebuilt == *s, json!({ "reason": "decomposition -> lift -> decomposition changed it" }));
    let chain = pipeline_from_lift(atlas, &seq, &data)?;
    cert.check(chain == rebuilt, json!({ "reason": "formula differs from the chain construction" }));
    let again = lift_from_decomposition(atlas, &seq, &rebuilt)?;
    cert.check(again == data, json!({ "reason": "lift -> decomposition -> lift changed it" }));
    cert.witness(json!({ "points": data.lifts.len(), "pair_dim": seq.pairs().len(), "sections_dim": seq.sections.dim() }));
    Ok(cert)
}

/// The trivial bundle of rank `d` presented with the charts of `atlas`.
pub fn trivial_target(atlas: &AtlasPresentation, d: usize) -> Result<AtlasPresentation> {
    let top = atlas.dims().top();
    let dims = DimAssignment::from_fn(atlas.n(), |j| if *j == top { d } else { 0 });
    let id = Gauge::identity(&dims);
    let transitions = atlas.transitions().keys().map(|k| (k.clone(), id.clone())).collect();
    atlas.with_data(dims, transitions)
}

/// A random morphism to the trivial bundle of rank `d`, natural by construction.
pub fn random_morphism(rng: &mut Rng8, atlas: &AtlasPresentation, d: usize) -> Result<BundleMorphism> {
    let target = trivial_target(atlas, d)?;
    let at = atlas.base().points().iter().map(|p| (p.clone(), random::gauge(rng, atlas.dims(), target.dims()))).collect();
    BundleMorphism::transported(atlas, &target, &at)
}

/// `f1 . tau1 + f2 . tau2` for base functions `f1, f2`, computed on the components.
pub fn combine_morphisms(
    f1: &BTreeMap<String, Rational>,
    tau1: &BundleMorphism,
    f2: &BTreeMap<String, Rational>,
    tau2: &BundleMorphism,
) -> Result<BundleMorphism> {
    if tau1.source_dims() != tau2.source_dims() || tau1.target_dims() != tau2.target_dims() {
        return Err(Error::DimensionMismatch("morphisms between different bundles".into()));
    }
    let value = |f: &BTreeMap<String, Rational>, p: &str| f.get(p).cloned().ok_or_else(|| Error::InvalidArgument(format!("no value at {p:?}")));
    let mut data = BTreeMap::new();
    for ((chart, p), g1) in tau1.data() {
        let g2 = tau2.at(chart, p)?;
        let (c1, c2) = (value(f1, p)?, value(f2, p)?);
        let mut g = Gauge::zero(g1.source(), g1.target())?;
        for (rho, t) in g1.components() {
            g.set_component(rho, t.scale(&c1).add(&g2.component(rho).scale(&c2))?)?;
        }
        data.insert((chart.clone(), p.clone()), g);
    }
    BundleMorphism::new(tau1.source_dims().clone(), tau1.target_dims().clone(), data)
}

/// The pointwise check of the module structure on morphisms to a trivial bundle.
pub fn module_laws(atlas: &AtlasPresentation, d: usize, rng: &mut Rng8, samples: usize) -> Result<Certificate> {
    let mut cert = Certificate::new("morphisms to a vector bundle form a module over base functions");
    let target = trivial_target(atlas, d)?;
    let (t1, t2) = (random_morphism(rng, atlas, d)?, random_morphism(rng, atlas, d)?);
    let f = |rng: &mut Rng8| -> BTreeMap<String, Rational> { atlas.base().points().iter().map(|p| (p.clone(), random::rational(rng))).collect() };
    let (f1, f2) = (f(rng), f(rng));
    let sum = combine_morphisms(&f1, &t1, &f2, &t2)?;
    let bad = sum.naturality_failures(atlas, &target)?;
    cert.check(bad.is_empty(), json!({ "reason": "combination is not natural", "failures": bad.len() }));
    let top = atlas.dims().top();
    for ((chart, p), g) in sum.data() {
        for _ in 0..samples {
            let x = random::coords(rng, atlas.dims(), &top);
            let lhs = g.evaluate(&x)?[&top].clone();
            let y1 = t1.at(chart, p)?.evaluate(&x)?[&top].clone();
            let y2 = t2.at(chart, p)?.evaluate(&x)?[&top].clone();
            let rhs = add_vectors(&scale_vector(&f1[p], &y1), &scale_vector(&f2[p], &y2));
            cert.check(lhs == rhs, json!({ "chart": chart, "point": p }));
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::FiniteBase;
    use crate::split::{decompose, Options, Pasting};

    /// Every dimension one, two charts, twisted.
    fn full_atlas(rng: &mut Rng8, n: usize, points: usize) -> AtlasPresentation {
        let base = FiniteBase::numbered(points);
        let charts = random::chart_cover(rng, 2, &base);
        random::twist(rng, &random::untwisted(&DimAssignment::uniform(n, 1), &base, charts))
    }

    fn shape(n: usize, max_dim: usize, charts: usize, points: usize) -> random::AtlasShape {
        random::AtlasShape { n, max_dim, charts, points }
    }

    #[test]
    fn interpolation_recovers_quadratics() {
        let mut rng = random::rng(3);
        let dims = DimAssignment::from_fn(2, |j| j.len());
        let space = LinearMaps::new(&dims, &set(&[1, 2]), vec![(set(&[1, 2]), 2)]).unwrap();
        let coeffs = random::vector(&mut rng, space.coefficient_len());
        let fitted = space.fit(|x| space.evaluate(&coeffs, x)).unwrap();
        assert_eq!(fitted, coeffs);
    }

    #[test]
    fn double_sequence_on_decomposed() {
        let dims = DimAssignment::uniform(2, 1);
        let seq = ModuleSequence::new(&dims, FirstSection::ZeroTop).unwrap();
        assert_eq!((seq.kernel.dim(), seq.sections.dim(), seq.pairs().len()), (1, 2, 1));
        // phi(a) = 3a fills the core slot.
        let phi = seq.kernel.fit(|x| Ok(Coords::from([(set(&[1, 2]), scale_vector(&Rational::from_int(3), &x[&set(&[1])]))]))).unwrap();
        let t = seq.tilde(&phi).unwrap();
        let a = Coords::from([(set(&[1]), vec![Rational::from_int(2)])]);
        let v = section_value(&seq.sections, &t, &a).unwrap();
        assert_eq!(v[&set(&[2])], vec![Rational::zero()]);
        assert_eq!(v[&set(&[1, 2])], vec![Rational::from_int(6)]);
        assert!(is_zero_vector(&seq.tilde(&seq.kernel.zero()).unwrap()));
        // hat(b)(a) = (a, b, 0) for the zero core-sequence section.
        let h = seq.hat(&seq.pairs()[0]).unwrap();
        let v = section_value(&seq.sections, &h, &a).unwrap();
        assert_eq!(v[&set(&[1, 2])], vec![Rational::zero()]);
        assert!(seq.exactness().unwrap().passed());
    }

    #[test]
    fn double_sequence_on_twisted() {
        let mut rng = random::rng(8);
        for first in [FirstSection::ZeroTop, FirstSection::Skewed] {
            let a = random::twisted_atlas(&mut rng, &shape(2, 2, 2, 2));
            let cert = sequence_certificate(&a, first, &mut rng).unwrap();
            assert!(cert.passed(), "{cert:?}");
        }
    }

    #[test]
    fn triple_counts() {
        for dims in [DimAssignment::uniform(3, 1), DimAssignment::from_fn(3, |j| if j.len() == 2 { 2 } else { 1 })] {
            let seq = ModuleSequence::new(&dims, FirstSection::ZeroTop).unwrap();
            let d = |v: &[u32]| dims.get(&set(v));
            let s = d(&[1, 2, 3]);
            assert_eq!(seq.kernel.dim(), d(&[1, 2]) * s + d(&[1]) * d(&[2]) * s);
            let pairs = d(&[3]) + d(&[1]) * d(&[1, 3]) + d(&[2]) * d(&[2, 3]);
            assert_eq!(seq.pairs().len(), pairs);
            assert!(seq.exactness().unwrap().passed());
        }
        assert_eq!(ModuleSequence::new(&DimAssignment::uniform(3, 1), FirstSection::ZeroTop).unwrap().kernel.dim(), 2);
    }

    #[test]
    fn triple_sequence_on_twisted() {
        let mut rng = random::rng(12);
        let a = full_atlas(&mut rng, 3, 2);
        assert!(sequence_certificate(&a, FirstSection::ZeroTop, &mut rng).unwrap().passed());
    }

    #[test]
    fn module_action_is_closed() {
        let dims = DimAssignment::uniform(3, 1);
        let seq = ModuleSequence::new(&dims, FirstSection::ZeroTop).unwrap();
        let f = Rational::new(-3, 2);
        for xi in seq.sections.basis() {
            let moved = seq.act(&f, xi).unwrap();
            assert!(seq.sections.contains(&moved).unwrap());
            assert_eq!(moved, scale_vector(&f, xi));
        }
    }

    #[test]
    fn local_splitting() {
        let mut rng = random::rng(4);
        let dec = AtlasPresentation::decomposed(&DimAssignment::uniform(2, 1), &FiniteBase::numbered(1));
        let (sigma, cert) = local_split_double(&dec, FirstSection::ZeroTop, &mut rng).unwrap();
        assert!(cert.passed());
        assert!(sigma.data().values().all(|g| g.components().iter().all(|(r, t)| r.len() == 1 || t.is_zero())));
        let a = random::twisted_atlas(&mut rng, &shape(2, 2, 3, 1));
        let (sigma, cert) = local_split_double(&a, FirstSection::Skewed, &mut rng).unwrap();
        assert!(cert.passed(), "{cert:?}");
        let s1 = double_decomposition(&a, &sigma).unwrap();
        let s2 = decompose(&a, Options::default()).unwrap();
        split::torsor(&a, &s2, &s1).unwrap();
    }

    #[test]
    fn lift_of_decomposed_is_identity() {
        let mut rng = random::rng(5);
        let a = AtlasPresentation::decomposed(&DimAssignment::uniform(3, 1), &FiniteBase::numbered(1));
        let s = BundleMorphism::identity(&a);
        let seq = ModuleSequence::new(a.dims(), FirstSection::ZeroTop).unwrap();
        let data = lift_from_decomposition(&a, &seq, &s).unwrap();
        let rebuilt = decomposition_from_lift(&a, &seq, &data, &mut rng, 1).unwrap();
        assert!(rebuilt.data().values().all(|g| g.is_identity()));
    }

    #[test]
    fn lift_round_trip_on_twisted() {
        let mut rng = random::rng(9);
        let a = full_atlas(&mut rng, 3, 2);
        for pasting in [Pasting::LeastChart, Pasting::UniformAverage] {
            let s = decompose(&a, Options::default().with_pasting(pasting).with_first(FirstSection::Skewed)).unwrap();
            let cert = lift_round_trip(&a, &s, &mut rng).unwrap();
            assert!(cert.passed(), "{cert:?}");
        }
    }

    #[test]
    fn incompatible_lift_is_reported() {
        let mut rng = random::rng(10);
        let a = full_atlas(&mut rng, 3, 1);
        let s = decompose(&a, Options::default()).unwrap();
        let seq = ModuleSequence::new(a.dims(), FirstSection::ZeroTop).unwrap();
        let mut data = lift_from_decomposition(&a, &seq, &s).unwrap();
        // Shifting every image by the same kernel element keeps pi . sigma = id
        // but breaks the conditions on the core splittings.
        let shift = seq.tilde(&seq.kernel.basis()[0]).unwrap();
        for lift in data.lifts.values_mut() {
            for im in lift.images.iter_mut() {
                *im = add_vectors(im, &shift);
            }
        }
        match decomposition_from_lift(&a, &seq, &data, &mut rng, 1) {
            Err(Error::Incompatible(msg)) => assert!(msg.contains("phi")),
            other => panic!("expected an incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn morphism_module_laws() {
        let mut rng = random::rng(14);
        let a = random::twisted_atlas(&mut rng, &shape(2, 2, 2, 3));
        assert!(module_laws(&a, 2, &mut rng, 3).unwrap().passed());
    }
}
