//! Exact rational linear algebra: vectors, matrices, subspaces in reduced
//! row echelon form, and finitely generated cones.
//!
//! Every operation is exact. Cone membership is decided by a phase-one
//! simplex over arbitrary-precision rationals with Bland's pivoting rule.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::automaton::StateSet;
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(x: i64) -> Rational {
    BigRational::from_integer(BigInt::from(x))
}

/// A vector in `Q^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn zeros(n: usize) -> Self {
        RationalVector(vec![Rational::zero(); n])
    }

    pub fn from_rationals(v: Vec<Rational>) -> Self {
        RationalVector(v)
    }

    pub fn from_integers(v: &[i64]) -> Self {
        RationalVector(v.iter().map(|&x| integer(x)).collect())
    }

    /// `χ_q`
    pub fn unit(n: usize, q: usize) -> Self {
        let mut v = RationalVector::zeros(n);
        v.0[q] = Rational::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RationalVector(self.0.iter().map(|x| x * c).collect())
    }

    /// Coordinates as integers, when every coordinate is integral and fits.
    pub fn to_integers(&self) -> Option<Vec<i64>> {
        self.0
            .iter()
            .map(|x| {
                if x.is_integer() {
                    i64::try_from(x.to_integer()).ok()
                } else {
                    None
                }
            })
            .collect()
    }

    /// `⟨x, y⟩ = Σ x(i) y(i)`
    pub fn inner_product(&self, other: &RationalVector) -> Result<Rational> {
        check_len(self.len(), other.len())?;
        Ok(self.dot(other))
    }

    pub(crate) fn dot(&self, other: &RationalVector) -> Rational {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(x, y)| !x.is_zero() && !y.is_zero())
            .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
    }

    /// Row vector times matrix, `x M`.
    pub fn times(&self, m: &RationalMatrix) -> Result<RationalVector> {
        check_len(self.len(), m.rows)?;
        let mut out = vec![Rational::zero(); m.cols];
        for (i, x) in self.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, slot) in out.iter_mut().enumerate() {
                let e = m.get(i, j);
                if !e.is_zero() {
                    *slot += x * e;
                }
            }
        }
        Ok(RationalVector(out))
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}

impl Neg for &RationalVector {
    type Output = RationalVector;
    fn neg(self) -> RationalVector {
        RationalVector(self.0.iter().map(|x| -x).collect())
    }
}

impl Add for &RationalVector {
    type Output = RationalVector;
    fn add(self, rhs: &RationalVector) -> RationalVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        RationalVector(self.0.iter().zip(&rhs.0).map(|(x, y)| x + y).collect())
    }
}

impl Sub for &RationalVector {
    type Output = RationalVector;
    fn sub(self, rhs: &RationalVector) -> RationalVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        RationalVector(self.0.iter().zip(&rhs.0).map(|(x, y)| x - y).collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `χ_S`: coordinate `i` is 1 when `i ∈ S`.
pub fn char_vector(s: &StateSet) -> RationalVector {
    let n = s.universe_size();
    let mut v = RationalVector::zeros(n);
    for q in s.iter() {
        v.0[q] = Rational::one();
    }
    v
}

/// A dense rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: &[RationalVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, RationalVector::len);
        let mut m = RationalMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            check_len(r.len(), cols)?;
            for (j, x) in r.0.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
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

    pub fn row(&self, i: usize) -> RationalVector {
        RationalVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = RationalMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        check_len(self.cols, other.rows)?;
        let mut out = RationalMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let r = self.row(i).times(other)?;
            for (j, x) in r.0.into_iter().enumerate() {
                out.set(i, j, x);
            }
        }
        Ok(out)
    }
}

/// A linear subspace of `Q^n` held as its reduced row echelon basis
/// (leading ones, zeros above and below each pivot). Two bases compare
/// equal exactly when they span the same subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    ambient: usize,
    rows: Vec<RationalVector>,
    pivots: Vec<usize>,
}

impl SubspaceBasis {
    pub fn zero(ambient: usize) -> Self {
        SubspaceBasis {
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        SubspaceBasis {
            ambient,
            rows: (0..ambient)
                .map(|i| RationalVector::unit(ambient, i))
                .collect(),
            pivots: (0..ambient).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vectors(&self) -> &[RationalVector] {
        &self.rows
    }

    /// Whether `v` is a rational combination of the basis.
    pub fn contains(&self, v: &RationalVector) -> Result<bool> {
        check_len(v.len(), self.ambient)?;
        Ok(self.residual(v).is_zero())
    }

    fn residual(&self, v: &RationalVector) -> RationalVector {
        let mut r = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !r.0[p].is_zero() {
                let c = r.0[p].clone();
                for (x, y) in r.0.iter_mut().zip(&row.0) {
                    if !y.is_zero() {
                        *x -= &c * y;
                    }
                }
            }
        }
        r
    }

    pub fn is_subspace_of(&self, other: &SubspaceBasis) -> Result<bool> {
        for v in &self.rows {
            if !other.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Canonical reduced echelon basis of `Span(vectors)` inside `Q^ambient`.
pub fn span_basis(vectors: &[RationalVector], ambient: usize) -> Result<SubspaceBasis> {
    for v in vectors {
        check_len(v.len(), ambient)?;
    }
    let mut rows: Vec<Vec<Rational>> = vectors.iter().map(|v| v.0.clone()).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ambient {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for x in rows[rank].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let c = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &c * y;
                    }
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    Ok(SubspaceBasis {
        ambient,
        rows: rows.into_iter().map(RationalVector).collect(),
        pivots,
    })
}

pub fn in_span(v: &RationalVector, b: &SubspaceBasis) -> Result<bool> {
    b.contains(v)
}

/// `X^⊥`: the null space of the matrix whose rows are the basis.
pub fn orthogonal_complement(b: &SubspaceBasis) -> SubspaceBasis {
    let n = b.ambient;
    let mut null = Vec::new();
    for free in (0..n).filter(|c| !b.pivots.contains(c)) {
        let mut x = RationalVector::zeros(n);
        x.0[free] = Rational::one();
        for (row, &p) in b.rows.iter().zip(&b.pivots) {
            x.0[p] = -row.0[free].clone();
        }
        null.push(x);
    }
    span_basis(&null, n).expect("lengths agree")
}

/// Generators of a finitely generated cone. Duplicates are dropped on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeGenerators {
    ambient: usize,
    gens: Vec<RationalVector>,
}

impl ConeGenerators {
    pub fn new(ambient: usize, vectors: Vec<RationalVector>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut gens = Vec::with_capacity(vectors.len());
        for v in vectors {
            check_len(v.len(), ambient)?;
            if seen.insert(v.clone()) {
                gens.push(v);
            }
        }
        Ok(ConeGenerators { ambient, gens })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vectors(&self) -> &[RationalVector] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }
}

/// `Some((head, tail))` when `v = χ_head − χ_tail` for distinct coordinates.
pub fn incidence_pair(v: &RationalVector) -> Option<(usize, usize)> {
    let mut head = None;
    let mut tail = None;
    for (i, x) in v.0.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        if x.is_one() && head.is_none() {
            head = Some(i);
        } else if (-x).is_one() && tail.is_none() {
            tail = Some(i);
        } else {
            return None;
        }
    }
    head.zip(tail)
}

/// Whether `v ∈ cone(gens)`. When every generator is an incidence vector
/// `χ_h − χ_t` and `v` is zero or an incidence vector `χ_q − χ_p`, this is
/// directed reachability from `p` to `q` along arcs `t → h`; otherwise an
/// exact linear feasibility problem is solved.
pub fn in_cone(v: &RationalVector, gens: &ConeGenerators) -> Result<bool> {
    check_len(v.len(), gens.ambient)?;
    if v.is_zero() {
        return Ok(true);
    }
    let arcs: Option<Vec<(usize, usize)>> = gens
        .gens
        .iter()
        .map(|g| incidence_pair(g).map(|(h, t)| (t, h)))
        .collect();
    if let (Some(arcs), Some((q, p))) = (arcs, incidence_pair(v)) {
        return Ok(reachable(gens.ambient, &arcs, p, q));
    }
    in_cone_lp(v, gens)
}

fn reachable(n: usize, arcs: &[(usize, usize)], from: usize, to: usize) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(t, h) in arcs {
        adj[t].push(h);
    }
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            return true;
        }
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    false
}

/// Whether `v ∈ cone(gens)`, always through the simplex.
pub fn in_cone_lp(v: &RationalVector, gens: &ConeGenerators) -> Result<bool> {
    check_len(v.len(), gens.ambient)?;
    let columns: Vec<&RationalVector> = gens.gens.iter().collect();
    Ok(nonnegative_combination_exists(&columns, v))
}

/// Phase-one simplex for `Σ c_j g_j = v`, `c ≥ 0`.
fn nonnegative_combination_exists(columns: &[&RationalVector], target: &RationalVector) -> bool {
    let rows = target.len();
    let m = columns.len();
    let width = m + rows + 1;
    let rhs = width - 1;
    let mut t: Vec<Vec<Rational>> = (0..=rows).map(|_| vec![Rational::zero(); width]).collect();
    for i in 0..rows {
        let flip = target.0[i].is_negative();
        for (j, col) in columns.iter().enumerate() {
            let x = &col.0[i];
            t[i][j] = if flip { -x } else { x.clone() };
        }
        t[i][m + i] = Rational::one();
        t[i][rhs] = target.0[i].abs();
    }
    // objective row: W = obj[rhs] − Σ obj[j] x_j, W = sum of artificials
    for j in (0..m).chain(std::iter::once(rhs)) {
        let s = (0..rows).fold(Rational::zero(), |acc, i| acc + &t[i][j]);
        t[rows][j] = s;
    }
    let mut basis: Vec<usize> = (m..m + rows).collect();

    // Bland: lowest-index improving column among the original variables
    while let Some(enter) = (0..m).find(|&j| t[rows][j].is_positive()) {
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = &t[i][rhs] / &t[i][enter];
            leave = match leave {
                None => Some(i),
                Some(k) => {
                    let best = &t[k][rhs] / &t[k][enter];
                    if ratio < best || (ratio == best && basis[i] < basis[k]) {
                        Some(i)
                    } else {
                        Some(k)
                    }
                }
            };
        }
        // the objective is bounded below by 0, so some row always qualifies
        let Some(r) = leave else { break };
        let inv = t[r][enter].recip();
        for x in t[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let c = row[enter].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &c * y;
                    }
                }
            }
        }
        basis[r] = enter;
    }
    t[rows][rhs].is_zero()
}

/// Whether `⟨g, v⟩ ≤ 0` for every generator, i.e. `v ∈ cone(gens)°`.
pub fn in_polar_cone(v: &RationalVector, gens: &ConeGenerators) -> Result<bool> {
    check_len(v.len(), gens.ambient)?;
    Ok(gens.gens.iter().all(|g| !g.dot(v).is_positive()))
}
