//! Constructible sets and the locus where fibres of a projection jump in
//! dimension.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::groebner::{groebner_basis, is_unit};
use crate::ideal::{binomial, monomial_dimension, shift, PolynomialIdeal};
use crate::poly::{Exponents, TermOrder};
use crate::{Poly, Rational};

/// `V(closed) \ V(excluded)`. An excluded unit ideal removes nothing.
#[derive(Clone, Debug)]
pub struct Piece {
    pub closed: PolynomialIdeal,
    pub excluded: PolynomialIdeal,
}

impl Piece {
    pub fn dimension(&self) -> Result<i64> {
        if self.excluded.is_unit()? {
            return self.closed.dimension();
        }
        let mut best = -1;
        for e in self.excluded.generators() {
            best = best.max(self.closed.saturate_by(e)?.dimension()?);
        }
        Ok(best)
    }

    pub fn contains_point(&self, point: &[Rational]) -> bool {
        self.closed.generators().iter().all(|g| g.eval(point).is_zero())
            && self.excluded.generators().iter().any(|g| !g.eval(point).is_zero())
    }
}

#[derive(Clone, Debug)]
pub struct ConstructibleSet {
    pub ambient_dim: usize,
    pub torus: bool,
    pub pieces: Vec<Piece>,
    /// False when the computation may over-approximate the true set.
    pub exact: bool,
}

impl ConstructibleSet {
    pub fn empty(ambient_dim: usize, torus: bool) -> Self {
        ConstructibleSet { ambient_dim, torus, pieces: Vec::new(), exact: true }
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.dimension()? < 0)
    }

    pub fn dimension(&self) -> Result<i64> {
        let mut best = -1;
        for p in &self.pieces {
            best = best.max(p.dimension()?);
        }
        Ok(best)
    }

    pub fn contains_point(&self, point: &[Rational]) -> bool {
        self.pieces.iter().any(|p| p.contains_point(point))
    }
}

/// How the ambient space maps to the base of the fibration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `u_j = x^{rows[j]}`; requires torus mode.
    Monomial(Vec<Vec<i64>>),
    /// `u_j = x_{coords[j]}`.
    Coordinates(Vec<usize>),
}

impl Projection {
    pub fn target_dim(&self) -> usize {
        match self {
            Projection::Monomial(rows) => rows.len(),
            Projection::Coordinates(c) => c.len(),
        }
    }

    /// Equations of the fibre over `u` in the ambient coordinates.
    pub fn fibre_equations(&self, n: usize, u: &[Rational]) -> Vec<Poly> {
        match self {
            Projection::Monomial(rows) => rows.iter().zip(u).map(|(r, c)| binomial(r, c)).collect(),
            Projection::Coordinates(cs) => {
                cs.iter().zip(u).map(|(&i, c)| &Poly::var(n, i) - &Poly::constant(n, c.clone())).collect()
            }
        }
    }

    pub fn image_of(&self, x: &[Rational]) -> Vec<Rational> {
        match self {
            Projection::Monomial(rows) => rows
                .iter()
                .map(|r| r.iter().zip(x).fold(Rational::one(), |acc, (&e, v)| acc * num_traits::Pow::pow(v, e as i32)))
                .collect(),
            Projection::Coordinates(cs) => cs.iter().map(|&i| x[i].clone()).collect(),
        }
    }
}

/// Dimension of `V` intersected with the fibre over `u` (−1 when empty).
pub fn fibre_dimension(v: &PolynomialIdeal, proj: &Projection, u: &[Rational]) -> Result<i64> {
    v.add_polys(&proj.fibre_equations(v.nvars(), u)).dimension()
}

const MAX_STRATA_DEPTH: usize = 64;

struct Graph<'a> {
    gens: Vec<Poly>,
    nx: usize,
    k: usize,
    torus: bool,
    v: &'a PolynomialIdeal,
}

impl Graph<'_> {
    fn total(&self) -> usize {
        self.nx + self.k
    }

    fn stratify(&self, z: &[Poly], expected: i64, depth: usize, out: &mut Vec<Piece>) -> Result<()> {
        if depth > MAX_STRATA_DEPTH {
            return Err(Error::BudgetExhausted("fibre stratification too deep".into()));
        }
        let mut gens = self.gens.clone();
        gens.extend(z.iter().map(|p| shift(p, self.nx, self.total())));
        let gb = groebner_basis(&gens, TermOrder::Block(self.nx), self.v.budget())?;
        let keep: Vec<bool> = (0..self.total()).map(|i| i >= self.nx).collect();
        let base_gens: Vec<Poly> = gb.iter().filter_map(|g| g.restrict(&keep)).collect();
        if is_unit(&base_gens) {
            return Ok(());
        }
        let mut lead_monomials: Vec<Exponents> = Vec::new();
        let mut coeffs: BTreeSet<Vec<(Exponents, String)>> = BTreeSet::new();
        let mut lcs: Vec<Poly> = Vec::new();
        for g in gb.iter().filter(|g| g.restrict(&keep).is_none()) {
            let xpart = |e: &Exponents| e[..self.nx].to_vec();
            let lead = g
                .terms()
                .map(|(e, _)| xpart(e))
                .max_by(|a, b| TermOrder::GrevLex.cmp(a, b))
                .unwrap();
            let lc = Poly::from_terms(
                self.k,
                g.terms().filter(|(e, _)| xpart(e) == lead).map(|(e, c)| (e[self.nx..].to_vec(), c.clone())),
            );
            lead_monomials.push(lead);
            let key: Vec<(Exponents, String)> =
                lc.normalized(TermOrder::GrevLex).terms().map(|(e, c)| (e.clone(), c.to_string())).collect();
            if !lc.is_constant() && coeffs.insert(key) {
                lcs.push(lc);
            }
        }
        let fibre = monomial_dimension(&lead_monomials, self.nx);
        let product = lcs.iter().fold(Poly::one(self.k), |acc, l| &acc * l);
        let base = PolynomialIdeal::from_polys(self.k, base_gens.clone(), self.torus).with_budget(*self.v.budget());
        if fibre > expected && !base.radical_contains(&product)? {
            out.push(Piece {
                closed: base,
                excluded: PolynomialIdeal::from_polys(self.k, vec![product], self.torus).with_budget(*self.v.budget()),
            });
        }
        for lc in lcs {
            let mut next = base_gens.clone();
            next.push(lc);
            self.stratify(&next, expected, depth + 1, out)?;
        }
        Ok(())
    }
}

/// The base points over which the fibre of `v` has dimension above `expected`.
///
/// The graph of the projection is stratified by a block-order Gröbner basis
/// with the fibre variables first: on the part of each stratum where no
/// leading coefficient vanishes the basis specializes, so the fibre dimension
/// there is read off the leading monomials; the zero sets of the leading
/// coefficients are treated recursively. Irreducibility of `v` is not used,
/// so the answer is exact for any input.
pub fn fiber_jump_locus(v: &PolynomialIdeal, proj: &Projection, expected: i64) -> Result<ConstructibleSet> {
    let n = v.nvars();
    let k = proj.target_dim();
    let torus = v.torus_mode();
    let nx = n + usize::from(torus);
    let total = nx + k;
    let mut gens: Vec<Poly> = v.generators().iter().map(|g| g.extend(total - n)).collect();
    if torus {
        gens.push(&Poly::term(total, (0..total).map(|i| u32::from(i < nx)).collect(), Rational::one()) - &Poly::one(total));
    }
    match proj {
        Projection::Monomial(rows) => {
            if !torus {
                return Err(Error::pre("monomial projections need torus mode"));
            }
            for (j, r) in rows.iter().enumerate() {
                if r.len() != n {
                    return Err(Error::pre("projection row length differs from the ambient dimension"));
                }
                let mut plus = vec![0u32; total];
                let mut minus = vec![0u32; total];
                for (i, &e) in r.iter().enumerate() {
                    plus[i] = e.max(0) as u32;
                    minus[i] = (-e).max(0) as u32;
                }
                minus[nx + j] += 1;
                gens.push(&Poly::term(total, minus, Rational::one()) - &Poly::term(total, plus, Rational::one()));
            }
        }
        Projection::Coordinates(cs) => {
            for (j, &i) in cs.iter().enumerate() {
                if i >= n {
                    return Err(Error::pre("projection coordinate out of range"));
                }
                gens.push(&Poly::var(total, nx + j) - &Poly::var(total, i));
            }
        }
    }
    let graph = Graph { gens, nx, k, torus, v };
    let mut pieces = Vec::new();
    graph.stratify(&[], expected, 0, &mut pieces)?;
    let mut seen = BTreeSet::new();
    let mut unique = Vec::new();
    for p in pieces {
        let key = (p.closed.to_canonical_string()?, p.excluded.to_canonical_string()?);
        if seen.insert(key) {
            unique.push(p);
        }
    }
    Ok(ConstructibleSet { ambient_dim: k, torus, pieces: unique, exact: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn coset_fibres_jump_over_their_constant() {
        let v = PolynomialIdeal::parse(2, &["x1 - 2*x2"], true).unwrap();
        let proj = Projection::Monomial(vec![vec![1, -1]]);
        let locus = fiber_jump_locus(&v, &proj, 0).unwrap();
        assert_eq!(locus.dimension().unwrap(), 0);
        assert!(locus.contains_point(&[q(2)]));
        assert!(!locus.contains_point(&[q(3)]));
        assert_eq!(fibre_dimension(&v, &proj, &[q(2)]).unwrap(), 1);
        assert_eq!(fibre_dimension(&v, &proj, &[q(3)]).unwrap(), -1);
    }

    #[test]
    fn line_has_no_jumps() {
        let v = PolynomialIdeal::parse(2, &["x1 + x2 - 1"], true).unwrap();
        let locus = fiber_jump_locus(&v, &Projection::Monomial(vec![vec![1, -1]]), 0).unwrap();
        assert!(locus.is_empty().unwrap());
    }

    #[test]
    fn determinantal_fibre_over_origin() {
        let v = PolynomialIdeal::parse(4, &["x1*x4 - x2*x3"], false).unwrap();
        let proj = Projection::Coordinates(vec![2, 3]);
        let locus = fiber_jump_locus(&v, &proj, 1).unwrap();
        assert_eq!(locus.dimension().unwrap(), 0);
        assert!(locus.contains_point(&[q(0), q(0)]));
        assert!(!locus.contains_point(&[q(0), q(1)]));
        assert_eq!(fibre_dimension(&v, &proj, &[q(0), q(0)]).unwrap(), 2);
        assert_eq!(fibre_dimension(&v, &proj, &[q(0), q(1)]).unwrap(), 1);
    }

    #[test]
    fn reducible_input_is_handled_exactly() {
        // A line and a coset: only the coset's constant jumps.
        let v = PolynomialIdeal::parse(2, &["(x1 - 3*x2)*(x1 + x2 - 1)"], true).unwrap();
        let locus = fiber_jump_locus(&v, &Projection::Monomial(vec![vec![1, -1]]), 0).unwrap();
        assert!(locus.contains_point(&[q(3)]));
        assert!(!locus.contains_point(&[q(5)]));
        assert_eq!(locus.dimension().unwrap(), 0);
    }
}
