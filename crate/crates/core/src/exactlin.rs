//! Exact rational scalars, matrices and multilinear tensors.
//!
//! Row reduction is fraction-free (Bareiss): each row is cleared to integers
//! first, so intermediate entries stay minors of the input instead of
//! accumulating denominators.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

/// An exact rational number in reduced form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(r: BigRational) -> Self {
        Rational(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Option<Rational> {
        (!self.is_zero()).then(|| Rational(self.0.recip()))
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let num = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let den = match d {
            Some(d) => BigInt::from_str(d.trim()).map_err(|_| bad())?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let r = Rational::from_str(&s).map_err(serde::de::Error::custom)?;
        if r.to_string() != s {
            return Err(serde::de::Error::custom(format!("rational {s:?} is not in reduced form")));
        }
        Ok(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(self.0.$m(&rhs.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

pub type Vector = Vec<Rational>;

pub fn zero_vector(n: usize) -> Vector {
    vec![Rational::zero(); n]
}

pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = zero_vector(n);
    v[i] = Rational::one();
    v
}

pub fn add_vectors(a: &[Rational], b: &[Rational]) -> Vector {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vectors(a: &[Rational], b: &[Rational]) -> Vector {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vector(c: &Rational, a: &[Rational]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn is_zero_vector(a: &[Rational]) -> bool {
    a.iter().all(Rational::is_zero)
}

/// A dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: zero_vector(rows * cols) }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: rows.len(), cols, data: rows.into_iter().flatten().collect() })
    }

    /// Builds from columns of equal length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vector]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("column length".into()));
        }
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn from_ints(rows: usize, cols: usize, v: &[i64]) -> Self {
        assert_eq!(v.len(), rows * cols);
        Matrix { rows, cols, data: v.iter().map(|&x| Rational::from_int(x)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rational) {
        self.data[i * self.cols + j] = x;
    }

    pub fn data(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vector(&self.data)
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.rows) && self.rows == self.cols
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Appends the columns of `other`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let rows = (0..self.rows)
            .map(|i| self.row(i).iter().chain(other.row(i)).cloned().collect())
            .collect();
        Matrix::from_rows(rows).map(|mut m| {
            m.cols = self.cols + other.cols;
            m.rows = self.rows;
            m
        })
    }

    pub fn rank(&self) -> usize {
        Echelon::of(self).pivots.len()
    }

    /// A basis of the right kernel, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let e = Echelon::of(self);
        let free: Vec<usize> = (0..self.cols).filter(|c| !e.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut rhs_free = zero_vector(self.cols);
                rhs_free[f] = Rational::one();
                e.back_substitute(&rhs_free, None)
            })
            .collect()
    }

    pub fn image_contains(&self, v: &[Rational]) -> Result<bool> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch("vector length differs from row count".into()));
        }
        let aug = self.hstack(&Matrix::from_columns(self.rows, &[v.to_vec()])?)?;
        Ok(aug.rank() == self.rank())
    }

    /// The unique solution of a square invertible system.
    pub fn solve(&self, b: &[Rational]) -> Result<Vector> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "system {}x{} with right-hand side of length {}",
                self.rows,
                self.cols,
                b.len()
            )));
        }
        self.solve_any(b)?.filter(|_| self.rank() == self.cols).ok_or(Error::Singular)
    }

    /// Some solution of `self * x = b`, or `None` if the system is inconsistent.
    pub fn solve_any(&self, b: &[Rational]) -> Result<Option<Vector>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch("right-hand side length".into()));
        }
        let aug = self.hstack(&Matrix::from_columns(self.rows, &[b.to_vec()])?)?;
        let e = Echelon::of(&aug);
        if e.pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let x = e.back_substitute(&zero_vector(self.cols + 1), Some(self.cols));
        Ok(Some(x[..self.cols].to_vec()))
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(n))?;
        let e = Echelon::of(&aug);
        if e.pivots.len() < n || e.pivots.iter().take(n).any(|&p| p >= n) {
            return Err(Error::Singular);
        }
        let mut cols = Vec::with_capacity(n);
        for k in 0..n {
            let x = e.back_substitute(&zero_vector(2 * n), Some(n + k));
            cols.push(x[..n].to_vec());
        }
        Matrix::from_columns(n, &cols)
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: scale_vector(c, &self.data) }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        Ok(Matrix { rows: self.rows, cols: self.cols, data: add_vectors(&self.data, &other.data) })
    }
}

/// Row echelon form over the integers, produced by fraction-free elimination.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    cols: usize,
}

impl Echelon {
    fn of(m: &Matrix) -> Echelon {
        let mut rows: Vec<Vec<BigInt>> = (0..m.rows).map(|i| integer_row(m.row(i))).collect();
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..m.cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let (head, tail) = rows.split_at_mut(r + 1);
            let pivot_row = &head[r];
            for row in tail.iter_mut() {
                let lead = row[c].clone();
                for j in c + 1..m.cols {
                    let num = &pivot_row[c] * &row[j] - &lead * &pivot_row[j];
                    let (q, rem) = num.div_rem(&prev);
                    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                    row[j] = q;
                }
                row[c] = BigInt::zero();
            }
            prev = rows[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        Echelon { rows, pivots, cols: m.cols }
    }

    /// Solves the echelon system for the pivot variables. Non-pivot variables take
    /// their values from `fixed`; if `rhs_col` is given, that column is moved to the
    /// right-hand side instead of being treated as a variable.
    fn back_substitute(&self, fixed: &[Rational], rhs_col: Option<usize>) -> Vector {
        let mut x: Vector = fixed.to_vec();
        x.resize(self.cols, Rational::zero());
        for (r, &pc) in self.pivots.iter().enumerate().rev() {
            if Some(pc) == rhs_col {
                continue;
            }
            let row = &self.rows[r];
            let mut acc = match rhs_col {
                Some(rc) => Rational::from_big(BigRational::from_integer(row[rc].clone())),
                None => Rational::zero(),
            };
            for j in pc + 1..self.cols {
                if Some(j) == rhs_col || row[j].is_zero() || x[j].is_zero() {
                    continue;
                }
                acc -= &(Rational::from_big(BigRational::from_integer(row[j].clone())) * &x[j]);
            }
            x[pc] = acc / Rational::from_big(BigRational::from_integer(row[pc].clone()));
        }
        if let Some(rc) = rhs_col {
            x[rc] = Rational::zero();
        }
        x
    }
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// A multilinear map `V_1 x ... x V_k -> W` with entries laid out row-major,
/// output index slowest, then inputs in order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MultiTensor {
    out_dim: usize,
    in_dims: Vec<usize>,
    entries: Vec<Rational>,
}

impl MultiTensor {
    pub fn new(out_dim: usize, in_dims: Vec<usize>, entries: Vec<Rational>) -> Result<Self> {
        let expect = out_dim * in_dims.iter().product::<usize>();
        if entries.len() != expect {
            return Err(Error::DimensionMismatch(format!(
                "tensor {out_dim}x{in_dims:?} needs {expect} entries, got {}",
                entries.len()
            )));
        }
        Ok(MultiTensor { out_dim, in_dims, entries })
    }

    pub fn zeros(out_dim: usize, in_dims: Vec<usize>) -> Self {
        let len = out_dim * in_dims.iter().product::<usize>();
        MultiTensor { out_dim, in_dims, entries: zero_vector(len) }
    }

    pub fn identity(d: usize) -> Self {
        MultiTensor::from_matrix(&Matrix::identity(d))
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        MultiTensor { out_dim: m.rows, in_dims: vec![m.cols], entries: m.data.clone() }
    }

    /// The matrix of a one-block tensor.
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.in_dims.len() != 1 {
            return Err(Error::DimensionMismatch("matrix view needs exactly one block".into()));
        }
        Ok(Matrix { rows: self.out_dim, cols: self.in_dims[0], data: self.entries.clone() })
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Rational] {
        &mut self.entries
    }

    /// Number of input multi-indices.
    pub fn input_count(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vector(&self.entries)
    }

    /// Flat position of an input multi-index.
    pub fn input_offset(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.in_dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// The output vector for a basis-vector input multi-index.
    pub fn column(&self, index: &[usize]) -> Vector {
        let off = self.input_offset(index);
        let stride = self.input_count();
        (0..self.out_dim).map(|o| self.entries[o * stride + off].clone()).collect()
    }

    pub fn set_column(&mut self, index: &[usize], values: &[Rational]) {
        let off = self.input_offset(index);
        let stride = self.input_count();
        for (o, v) in values.iter().enumerate() {
            self.entries[o * stride + off] = v.clone();
        }
    }

    pub fn apply(&self, args: &[&[Rational]]) -> Result<Vector> {
        if args.len() != self.in_dims.len() || args.iter().zip(&self.in_dims).any(|(a, &d)| a.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "tensor with inputs {:?} applied to arguments of lengths {:?}",
                self.in_dims,
                args.iter().map(|a| a.len()).collect::<Vec<_>>()
            )));
        }
        let mut out = zero_vector(self.out_dim);
        if self.out_dim == 0 {
            return Ok(out);
        }
        let stride = self.input_count();
        // Product weights of every input multi-index, skipping zero factors.
        let mut weights: Vec<(usize, Rational)> = vec![(0, Rational::one())];
        for (a, &d) in args.iter().zip(&self.in_dims) {
            let mut next = Vec::with_capacity(weights.len() * d);
            for (off, w) in &weights {
                for (i, x) in a.iter().enumerate() {
                    if !x.is_zero() {
                        next.push((off * d + i, w * x));
                    }
                }
            }
            weights = next;
            if weights.is_empty() {
                return Ok(out);
            }
        }
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.entries[o * stride..(o + 1) * stride];
            for (off, w) in &weights {
                let t = &row[*off];
                if !t.is_zero() {
                    *slot += &(t * w);
                }
            }
        }
        Ok(out)
    }

    /// `m . self`, acting on the output index.
    pub fn map_output(&self, m: &Matrix) -> Result<MultiTensor> {
        if m.cols != self.out_dim {
            return Err(Error::DimensionMismatch("output map does not match tensor output".into()));
        }
        let stride = self.input_count();
        let mut out = MultiTensor::zeros(m.rows, self.in_dims.clone());
        for off in 0..stride {
            let col: Vector = (0..self.out_dim).map(|o| self.entries[o * stride + off].clone()).collect();
            let img = m.mul_vec(&col)?;
            for (o, v) in img.into_iter().enumerate() {
                out.entries[o * stride + off] = v;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &MultiTensor) -> Result<MultiTensor> {
        if self.out_dim != other.out_dim || self.in_dims != other.in_dims {
            return Err(Error::DimensionMismatch("tensor sum with different shapes".into()));
        }
        Ok(MultiTensor {
            out_dim: self.out_dim,
            in_dims: self.in_dims.clone(),
            entries: add_vectors(&self.entries, &other.entries),
        })
    }

    pub fn scale(&self, c: &Rational) -> MultiTensor {
        MultiTensor {
            out_dim: self.out_dim,
            in_dims: self.in_dims.clone(),
            entries: scale_vector(c, &self.entries),
        }
    }
}

/// Every multi-index of a box with the given side lengths, in row-major order.
pub fn multi_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..d).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn apply(t: &MultiTensor, args: &[&[Rational]]) -> Result<Vector> {
    t.apply(args)
}

pub fn solve_linear(a: &MultiTensor, b: &[Rational]) -> Result<Vector> {
    a.to_matrix()?.solve(b)
}

pub fn kernel_basis(a: &MultiTensor) -> Result<Vec<Vector>> {
    Ok(a.to_matrix()?.kernel_basis())
}

pub fn image_contains(a: &MultiTensor, v: &[Rational]) -> Result<bool> {
    a.to_matrix()?.image_contains(v)
}
