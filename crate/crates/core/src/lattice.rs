//! Integer matrices, Hermite and Smith normal forms, and exponent lattices.
//!
//! An algebraic subgroup of the torus is stored by its relation lattice: the
//! exponent vectors `m` with `x^m = 1` on it.

use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Integer;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Integer>>,
}

impl IntegerMatrix {
    pub fn new(cols: usize, entries: Vec<Vec<Integer>>) -> Self {
        assert!(entries.iter().all(|r| r.len() == cols), "ragged matrix");
        IntegerMatrix { rows: entries.len(), cols, entries }
    }

    pub fn from_i64(cols: usize, rows: &[Vec<i64>]) -> Self {
        Self::new(cols, rows.iter().map(|r| r.iter().map(|&v| Integer::from(v)).collect()).collect())
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::new(cols, vec![vec![Integer::zero(); cols]; rows])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.entries[i][i] = Integer::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Integer {
        &self.entries[i][j]
    }

    pub fn row(&self, i: usize) -> &[Integer] {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[Vec<Integer>] {
        &self.entries
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        self.entries.iter().map(|r| r.iter().map(|v| v.to_i64().expect("entry exceeds i64")).collect()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.rows, (0..self.cols).map(|j| (0..self.rows).map(|i| self.entries[i][j].clone()).collect()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let entries = (0..self.rows)
            .map(|i| {
                (0..other.cols)
                    .map(|j| (0..self.cols).fold(Integer::zero(), |acc, k| acc + &self.entries[i][k] * &other.entries[k][j]))
                    .collect()
            })
            .collect();
        Self::new(other.cols, entries)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_zero())
    }

    /// Determinant of a square matrix (fraction-free Bareiss elimination).
    pub fn determinant(&self) -> Integer {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Integer::one();
        }
        let mut a = self.entries.clone();
        let mut sign = Integer::one();
        let mut prev = Integer::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Integer::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().abs().is_one()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.entries.swap(i, j);
    }

    /// `row_i -= q * row_j`
    fn sub_row(&mut self, i: usize, j: usize, q: &Integer) {
        if q.is_zero() {
            return;
        }
        let src = self.entries[j].clone();
        for (a, b) in self.entries[i].iter_mut().zip(&src) {
            *a -= q * b;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for a in &mut self.entries[i] {
            *a = -a.clone();
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in &mut self.entries {
            r.swap(i, j);
        }
    }

    /// `col_i -= q * col_j`
    fn sub_col(&mut self, i: usize, j: usize, q: &Integer) {
        if q.is_zero() {
            return;
        }
        for r in &mut self.entries {
            let v = &r[j] * q;
            r[i] -= v;
        }
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses a row list such as `[[1, -1], [0, 2]]`; `cols` fixes the width
/// (needed for the empty list).
pub fn parse_rows(text: &str, cols: usize) -> Result<IntegerMatrix> {
    let t = text.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::parse(0, "row list must be enclosed in brackets"))?;
    let mut rows = Vec::new();
    let mut rest = inner.trim();
    let mut offset = t.len() - t[1..].trim_start().len();
    while !rest.is_empty() {
        let open = rest.strip_prefix('[').ok_or_else(|| Error::parse(offset, "expected '['"))?;
        let close = open.find(']').ok_or_else(|| Error::parse(offset, "unterminated row"))?;
        let body = &open[..close];
        let row: Vec<Integer> = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',').map(|v| v.trim().parse::<Integer>().map_err(|_| Error::parse(offset, format!("bad integer `{}`", v.trim())))).collect::<Result<_>>()?
        };
        if row.len() != cols {
            return Err(Error::parse(offset, format!("row has {} entries, expected {cols}", row.len())));
        }
        rows.push(row);
        let after = open[close + 1..].trim_start();
        let consumed = rest.len() - after.len();
        rest = after.strip_prefix(',').map(str::trim_start).unwrap_or(after);
        offset += consumed + (after.len() - rest.len());
    }
    Ok(IntegerMatrix::new(cols, rows))
}

/// Row Hermite normal form. Returns `(H, U)` with `U` unimodular and
/// `U * M = [H; 0]`: `H` holds the nonzero rows, pivots are positive and the
/// entries above each pivot lie in `[0, pivot)`.
pub fn hermite_normal_form(m: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix) {
    let mut a = m.clone();
    let mut u = IntegerMatrix::identity(m.rows);
    let mut r = 0;
    for col in 0..m.cols {
        if r == m.rows {
            break;
        }
        loop {
            let pivot = (r..m.rows).filter(|&i| !a.entries[i][col].is_zero()).min_by_key(|&i| a.entries[i][col].abs());
            let Some(p) = pivot else { break };
            a.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..m.rows {
                let q = a.entries[i][col].div_floor(&a.entries[r][col]);
                a.sub_row(i, r, &q);
                u.sub_row(i, r, &q);
                if !a.entries[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a.entries[r][col].is_zero() {
            continue;
        }
        if a.entries[r][col].is_negative() {
            a.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = a.entries[i][col].div_floor(&a.entries[r][col]);
            a.sub_row(i, r, &q);
            u.sub_row(i, r, &q);
        }
        r += 1;
    }
    a.entries.truncate(r);
    a.rows = r;
    (a, u)
}

/// Smith normal form `(D, U, V)` with `D = U * M * V` diagonal, positive
/// diagonal entries dividing each other, `U` and `V` unimodular.
pub fn smith_normal_form(m: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix, IntegerMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntegerMatrix::identity(rows);
    let mut v = IntegerMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a.entries[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| a.entries[i][j].abs() < a.entries[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { return (a, u, v) };
            a.swap_rows(t, bi);
            u.swap_rows(t, bi);
            a.swap_cols(t, bj);
            v.swap_cols(t, bj);
            let mut clean = true;
            for i in t + 1..rows {
                let q = a.entries[i][t].div_floor(&a.entries[t][t]);
                a.sub_row(i, t, &q);
                u.sub_row(i, t, &q);
                clean &= a.entries[i][t].is_zero();
            }
            for j in t + 1..cols {
                let q = a.entries[t][j].div_floor(&a.entries[t][t]);
                a.sub_col(j, t, &q);
                v.sub_col(j, t, &q);
                clean &= a.entries[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.entries[i][j].is_multiple_of(&a.entries[t][t])));
            match bad {
                Some(i) => {
                    let minus_one = -Integer::one();
                    a.sub_row(t, i, &minus_one);
                    u.sub_row(t, i, &minus_one);
                }
                None => break,
            }
        }
        if a.entries[t][t].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    (a, u, v)
}

fn rank_of_diagonal(d: &IntegerMatrix) -> usize {
    (0..d.rows.min(d.cols)).take_while(|&i| !d.entries[i][i].is_zero()).count()
}

/// Basis (as rows) of the integer vectors `x` with `M * x = 0`.
pub fn integer_kernel(m: &IntegerMatrix) -> IntegerMatrix {
    let (d, _, v) = smith_normal_form(m);
    let r = rank_of_diagonal(&d);
    let vt = v.transpose();
    IntegerMatrix::new(m.cols, vt.entries[r..].to_vec())
}

/// An integer solution `x` of `M * x = b`, if one exists.
pub fn solve_integer(m: &IntegerMatrix, b: &[Integer]) -> Option<Vec<Integer>> {
    assert_eq!(b.len(), m.rows);
    let (d, u, v) = smith_normal_form(m);
    let ub: Vec<Integer> = (0..m.rows).map(|i| (0..m.rows).fold(Integer::zero(), |acc, k| acc + &u.entries[i][k] * &b[k])).collect();
    let r = rank_of_diagonal(&d);
    if ub[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut z = vec![Integer::zero(); m.cols];
    for i in 0..r {
        let (q, rem) = ub[i].div_rem(&d.entries[i][i]);
        if !rem.is_zero() {
            return None;
        }
        z[i] = q;
    }
    Some((0..m.cols).map(|i| (0..m.cols).fold(Integer::zero(), |acc, k| acc + &v.entries[i][k] * &z[k])).collect())
}

/// Sublattice of `Z^n` spanned by integer rows, kept in Hermite normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentLattice {
    ambient_dim: usize,
    basis: IntegerMatrix,
}

impl ExponentLattice {
    pub fn from_matrix(m: &IntegerMatrix) -> Self {
        ExponentLattice { ambient_dim: m.cols, basis: hermite_normal_form(m).0 }
    }

    pub fn new(ambient_dim: usize, rows: &[Vec<i64>]) -> Self {
        Self::from_matrix(&IntegerMatrix::from_i64(ambient_dim, rows))
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, &[])
    }

    pub fn full(n: usize) -> Self {
        Self::from_matrix(&IntegerMatrix::identity(n))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &IntegerMatrix {
        &self.basis
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.basis.to_i64_rows()
    }

    /// Product of the invariant factors: the index in the saturation.
    pub fn saturation_index(&self) -> Integer {
        let (d, _, _) = smith_normal_form(&self.basis);
        (0..self.rank()).fold(Integer::one(), |acc, i| acc * &d.entries[i][i])
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation_index().is_one()
    }

    /// Basis (rows) of the vectors orthogonal to every lattice vector.
    pub fn orthogonal(&self) -> IntegerMatrix {
        if self.rank() == 0 {
            return IntegerMatrix::identity(self.ambient_dim);
        }
        integer_kernel(&self.basis)
    }

    /// `{m : k*m in L for some k >= 1}`.
    pub fn saturation(&self) -> Self {
        let perp = self.orthogonal();
        if perp.rows == 0 {
            return Self::full(self.ambient_dim);
        }
        Self::from_matrix(&integer_kernel(&perp))
    }

    pub fn contains(&self, v: &[Integer]) -> bool {
        if self.rank() == 0 {
            return v.iter().all(|x| x.is_zero());
        }
        solve_integer(&self.basis.transpose(), v).is_some()
    }

    /// Lattice spanned by both.
    pub fn sum(&self, other: &Self) -> Self {
        let mut rows = self.basis.entries.clone();
        rows.extend(other.basis.entries.iter().cloned());
        Self::from_matrix(&IntegerMatrix::new(self.ambient_dim, rows))
    }

    pub fn parse(text: &str, ambient_dim: usize) -> Result<Self> {
        Ok(Self::from_matrix(&parse_rows(text, ambient_dim)?))
    }
}

impl fmt::Display for ExponentLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis)
    }
}

impl fmt::Debug for ExponentLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis)
    }
}

/// Monomial map whose kernel is the connected subgroup cut by a saturated
/// relation lattice: `u_j = x^{matrix[j]}` with the lattice basis as rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientMap {
    pub ambient_dim: usize,
    pub target_dim: usize,
    pub matrix: IntegerMatrix,
    /// Rows `k` such that `t -> t^k` parametrizes the kernel.
    pub kernel: IntegerMatrix,
}

pub fn quotient_map(t: &ExponentLattice) -> QuotientMap {
    let sat = t.saturation();
    QuotientMap { ambient_dim: t.ambient_dim, target_dim: sat.rank(), matrix: sat.basis.clone(), kernel: sat.orthogonal() }
}

impl QuotientMap {
    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.matrix.to_i64_rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(cols: usize, rows: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::from_i64(cols, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn hermite_examples() {
        let (h, u) = hermite_normal_form(&IntegerMatrix::identity(2));
        assert_eq!(h, IntegerMatrix::identity(2));
        assert!(u.is_unimodular());
        let m = mat(2, &[&[2, 4], &[1, 1]]);
        let (h, u) = hermite_normal_form(&m);
        assert_eq!(h, mat(2, &[&[1, 1], &[0, 2]]));
        assert!(u.is_unimodular());
        assert_eq!(u.mul(&m), h);
        let (h, u) = hermite_normal_form(&mat(2, &[&[0, 0]]));
        assert_eq!(h.rows(), 0);
        assert!(u.is_unimodular());
    }

    #[test]
    fn smith_examples() {
        let (d, _, _) = smith_normal_form(&IntegerMatrix::identity(3));
        assert_eq!(d, IntegerMatrix::identity(3));
        let m = mat(2, &[&[2, 4], &[1, 1]]);
        let (d, u, v) = smith_normal_form(&m);
        assert_eq!(d, mat(2, &[&[1, 0], &[0, 2]]));
        assert_eq!(u.mul(&m).mul(&v), d);
        let (d, _, _) = smith_normal_form(&mat(2, &[&[2, 0], &[0, 2]]));
        assert_eq!(d, mat(2, &[&[2, 0], &[0, 2]]));
    }

    #[test]
    fn saturation_examples() {
        assert_eq!(ExponentLattice::new(2, &[vec![2, 2]]).saturation(), ExponentLattice::new(2, &[vec![1, 1]]));
        let l = ExponentLattice::new(2, &[vec![1, -1]]);
        assert_eq!(l.saturation(), l);
        let l = ExponentLattice::new(2, &[vec![2, 0], vec![0, 3]]);
        assert_eq!(l.saturation(), ExponentLattice::full(2));
        assert_eq!(l.saturation_index(), Integer::from(6));
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_map(&ExponentLattice::new(2, &[vec![1, -1]]));
        assert_eq!(q.rows(), vec![vec![1, -1]]);
        assert_eq!(q.target_dim, 1);
        assert_eq!(q.kernel.to_i64_rows(), vec![vec![1, 1]]);
        let q = quotient_map(&ExponentLattice::full(3));
        assert_eq!(q.matrix, IntegerMatrix::identity(3));
        assert_eq!(q.kernel.rows(), 0);
        let q = quotient_map(&ExponentLattice::zero(2));
        assert_eq!(q.target_dim, 0);
    }

    #[test]
    fn row_lists_round_trip() {
        let l = ExponentLattice::new(3, &[vec![1, -1, 0], vec![0, 2, 4]]);
        let s = l.to_string();
        assert_eq!(s, "[[1, 1, 4], [0, 2, 4]]");
        assert_eq!(ExponentLattice::parse(&s, 3).unwrap(), l);
        assert_eq!(ExponentLattice::parse("[]", 2).unwrap(), ExponentLattice::zero(2));
        assert!(parse_rows("[[1, 2], [3]]", 2).is_err());
    }

    #[test]
    fn integer_solving() {
        let m = mat(2, &[&[2, 4], &[1, 1]]);
        let b = vec![Integer::from(6), Integer::from(2)];
        let x = solve_integer(&m, &b).unwrap();
        assert_eq!(x, vec![Integer::from(1), Integer::from(1)]);
        assert!(solve_integer(&mat(1, &[&[2]]), &[Integer::from(3)]).is_none());
    }

    fn arb_matrix() -> impl Strategy<Value = IntegerMatrix> {
        (1usize..4, 1usize..4).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(-6i64..7, c), r).prop_map(move |rows| IntegerMatrix::from_i64(c, &rows))
        })
    }

    proptest! {
        #[test]
        fn hermite_is_a_projection(m in arb_matrix()) {
            let (h, u) = hermite_normal_form(&m);
            prop_assert!(u.is_unimodular());
            let um = u.mul(&m);
            prop_assert_eq!(&IntegerMatrix::new(m.cols(), um.entries()[..h.rows()].to_vec()), &h);
            prop_assert!(um.entries()[h.rows()..].iter().flatten().all(|v| v.is_zero()));
            prop_assert_eq!(hermite_normal_form(&h).0, h);
        }

        #[test]
        fn smith_is_diagonal_chain(m in arb_matrix()) {
            let (d, u, v) = smith_normal_form(&m);
            prop_assert!(u.is_unimodular() && v.is_unimodular());
            prop_assert_eq!(&u.mul(&m).mul(&v), &d);
            let k = d.rows().min(d.cols());
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    if i != j { prop_assert!(d.get(i, j).is_zero()); }
                }
            }
            for i in 1..k {
                prop_assert!(d.get(i - 1, i - 1).is_zero() && d.get(i, i).is_zero() || d.get(i, i).is_multiple_of(d.get(i - 1, i - 1)));
            }
        }

        #[test]
        fn saturation_is_idempotent_with_index(m in arb_matrix()) {
            let l = ExponentLattice::from_matrix(&m);
            let s = l.saturation();
            prop_assert_eq!(s.rank(), l.rank());
            prop_assert!(s.is_saturated());
            prop_assert_eq!(&s.saturation(), &s);
            for r in l.basis().entries() {
                prop_assert!(s.contains(r));
            }
            // Index equals |det| of the basis change from s to l.
            if l.rank() > 0 {
                let coords: Vec<Vec<Integer>> = l.basis().entries().iter().map(|r| solve_integer(&s.basis().transpose(), r).unwrap()).collect();
                let change = IntegerMatrix::new(s.rank(), coords);
                prop_assert_eq!(change.determinant().abs(), l.saturation_index());
            }
        }

        #[test]
        fn quotient_kills_the_subgroup(m in arb_matrix()) {
            let q = quotient_map(&ExponentLattice::from_matrix(&m));
            if q.kernel.rows() > 0 && q.matrix.rows() > 0 {
                prop_assert!(q.matrix.mul(&q.kernel.transpose()).is_zero());
            }
            prop_assert_eq!(q.matrix.rows() + q.kernel.rows(), m.cols());
        }
    }
}
