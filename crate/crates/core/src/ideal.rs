//! Ideals of polynomial rings over the rationals, optionally read inside the
//! torus (saturated by the product of the coordinates).

use std::fmt;
use std::sync::OnceLock;

use num_traits::One;

use crate::error::{Error, Result};
use crate::groebner::{groebner_basis, is_unit, normal_form, Budget};
use crate::laurent::{default_names, LaurentPolynomial};
use crate::poly::{Exponents, TermOrder};
use crate::univariate;
use crate::{Poly, Rational};

#[derive(Clone)]
pub struct PolynomialIdeal {
    nvars: usize,
    generators: Vec<Poly>,
    torus: bool,
    budget: Budget,
    saturated: OnceLock<Vec<Poly>>,
    basis: OnceLock<Vec<Poly>>,
}

/// Size of a largest subset of the variables containing the support of no
/// monomial in `lms`; −1 when some monomial is constant.
pub fn monomial_dimension(lms: &[Exponents], nvars: usize) -> i64 {
    if lms.iter().any(|m| m.iter().all(|&e| e == 0)) {
        return -1;
    }
    let masks: Vec<u64> = lms
        .iter()
        .map(|m| m.iter().enumerate().filter(|(_, &e)| e > 0).fold(0u64, |acc, (i, _)| acc | (1 << i)))
        .collect();
    let mut best = 0;
    for set in 0u64..(1u64 << nvars) {
        let size = set.count_ones() as i64;
        if size > best && masks.iter().all(|&m| m & !set != 0) {
            best = size;
        }
    }
    best
}

/// `x^{m+} - c * x^{m-}` as a polynomial.
pub fn binomial(m: &[i64], c: &Rational) -> Poly {
    LaurentPolynomial::binomial(m, c).to_affine_polynomial()
}

/// Shifts every variable of `p` up by `offset` inside a ring of `nvars` variables.
pub(crate) fn shift(p: &Poly, offset: usize, nvars: usize) -> Poly {
    let map: Vec<usize> = (0..p.nvars()).map(|i| i + offset).collect();
    p.remap(&map, nvars)
}

/// Generators of the ideal of `gens` intersected with the polynomials in the
/// last `nvars - drop` variables, restricted to those variables.
pub(crate) fn eliminate_leading(gens: &[Poly], drop: usize, budget: &Budget) -> Result<Vec<Poly>> {
    let Some(first) = gens.first() else { return Ok(Vec::new()) };
    let n = first.nvars();
    let gb = groebner_basis(gens, TermOrder::Block(drop), budget)?;
    let keep: Vec<bool> = (0..n).map(|i| i >= drop).collect();
    Ok(gb.iter().filter_map(|g| g.restrict(&keep)).collect())
}

/// `t * prod(x_i) - 1` in the ring `(t, x_1..x_n)`, with `t` first.
fn torus_relation(n: usize) -> Poly {
    &Poly::term(n + 1, vec![1u32; n + 1], Rational::one()) - &Poly::one(n + 1)
}

impl PolynomialIdeal {
    pub fn from_polys(nvars: usize, generators: Vec<Poly>, torus: bool) -> Self {
        let generators = generators.into_iter().filter(|g| !g.is_zero()).collect();
        PolynomialIdeal { nvars, generators, torus, budget: Budget::default(), saturated: OnceLock::new(), basis: OnceLock::new() }
    }

    /// Laurent generators are cleared to polynomials; in the torus monomial
    /// factors are removed as well.
    pub fn new(nvars: usize, generators: &[LaurentPolynomial], torus: bool) -> Self {
        let polys = generators
            .iter()
            .map(|g| if torus { g.to_polynomial() } else { g.to_affine_polynomial() })
            .collect();
        Self::from_polys(nvars, polys, torus)
    }

    pub fn parse(nvars: usize, generators: &[&str], torus: bool) -> Result<Self> {
        let gens = generators.iter().map(|s| LaurentPolynomial::parse(s, nvars)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(nvars, &gens, torus))
    }

    pub fn zero(nvars: usize, torus: bool) -> Self {
        Self::from_polys(nvars, Vec::new(), torus)
    }

    pub fn unit(nvars: usize, torus: bool) -> Self {
        Self::from_polys(nvars, vec![Poly::one(nvars)], torus)
    }

    /// The point `coords` as an ideal of linear forms.
    pub fn point(coords: &[Rational], torus: bool) -> Self {
        let n = coords.len();
        let gens = coords.iter().enumerate().map(|(i, c)| &Poly::var(n, i) - &Poly::constant(n, c.clone())).collect();
        Self::from_polys(n, gens, torus)
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self.saturated = OnceLock::new();
        self.basis = OnceLock::new();
        self
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn torus_mode(&self) -> bool {
        self.torus
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    fn derived(&self, generators: Vec<Poly>) -> Self {
        Self::from_polys(self.nvars, generators, self.torus).with_budget(self.budget)
    }

    pub fn add_polys(&self, extra: &[Poly]) -> Self {
        let mut g = self.generators.clone();
        g.extend(extra.iter().cloned());
        self.derived(g)
    }

    pub fn sum(&self, other: &Self) -> Self {
        self.add_polys(&other.generators)
    }

    /// Generators of the ideal actually studied: in the torus, the saturation
    /// by the product of the coordinates.
    pub fn effective_generators(&self) -> Result<&[Poly]> {
        if !self.torus {
            return Ok(&self.generators);
        }
        if let Some(s) = self.saturated.get() {
            return Ok(s);
        }
        let n = self.nvars;
        let mut gens: Vec<Poly> = self.generators.iter().map(|g| shift(g, 1, n + 1)).collect();
        gens.push(torus_relation(n));
        let sat = eliminate_leading(&gens, 1, &self.budget)?;
        Ok(self.saturated.get_or_init(|| sat))
    }

    /// Reduced Gröbner basis under graded reverse lexicographic order.
    pub fn basis(&self) -> Result<&[Poly]> {
        if let Some(b) = self.basis.get() {
            return Ok(b);
        }
        let gb = groebner_basis(self.effective_generators()?, TermOrder::GrevLex, &self.budget)?;
        Ok(self.basis.get_or_init(|| gb))
    }

    pub fn groebner_basis(&self, order: TermOrder) -> Result<Vec<Poly>> {
        if order == TermOrder::GrevLex {
            return Ok(self.basis()?.to_vec());
        }
        groebner_basis(self.effective_generators()?, order, &self.budget)
    }

    pub fn is_unit(&self) -> Result<bool> {
        Ok(is_unit(self.basis()?))
    }

    /// Krull dimension of the zero set; −1 when it is empty.
    pub fn dimension(&self) -> Result<i64> {
        let lms: Vec<Exponents> =
            self.basis()?.iter().map(|g| g.leading_term(TermOrder::GrevLex).unwrap().0.clone()).collect();
        Ok(monomial_dimension(&lms, self.nvars))
    }

    pub fn normal_form(&self, f: &Poly) -> Result<Poly> {
        Ok(normal_form(f, self.basis()?, TermOrder::GrevLex))
    }

    pub fn contains(&self, f: &Poly) -> Result<bool> {
        Ok(self.normal_form(f)?.is_zero())
    }

    /// Whether `f` vanishes on the zero set (Rabinowitsch trick).
    pub fn radical_contains(&self, f: &Poly) -> Result<bool> {
        if f.is_zero() || self.contains(f)? {
            return Ok(true);
        }
        let n = self.nvars;
        let mut gens: Vec<Poly> = self.effective_generators()?.iter().map(|g| shift(g, 1, n + 1)).collect();
        let s = Poly::var(n + 1, 0);
        gens.push(&(&s * &shift(f, 1, n + 1)) - &Poly::one(n + 1));
        Ok(is_unit(&groebner_basis(&gens, TermOrder::GrevLex, &self.budget)?))
    }

    /// Whether the zero set of `self` lies inside the zero set of `other`.
    pub fn variety_within(&self, other: &Self) -> Result<bool> {
        for g in other.effective_generators()? {
            if !self.radical_contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn same_variety(&self, other: &Self) -> Result<bool> {
        Ok(self.variety_within(other)? && other.variety_within(self)?)
    }

    /// The saturation `I : f^∞`, whose zero set is the closure of the part of
    /// the zero set where `f` does not vanish.
    pub fn saturate_by(&self, f: &Poly) -> Result<Self> {
        let n = self.nvars;
        let mut gens: Vec<Poly> = self.effective_generators()?.iter().map(|g| shift(g, 1, n + 1)).collect();
        let s = Poly::var(n + 1, 0);
        gens.push(&(&s * &shift(f, 1, n + 1)) - &Poly::one(n + 1));
        Ok(self.derived(eliminate_leading(&gens, 1, &self.budget)?))
    }

    /// Closure of the projection onto the coordinates `keep` (in that order).
    pub fn eliminate(&self, keep: &[usize]) -> Result<Self> {
        let n = self.nvars;
        if keep.iter().any(|&k| k >= n) {
            return Err(Error::pre("eliminate: coordinate out of range"));
        }
        let drop: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
        let mut map = vec![0; n];
        for (slot, &v) in drop.iter().chain(keep).enumerate() {
            map[v] = slot;
        }
        let gens: Vec<Poly> = self.effective_generators()?.iter().map(|g| g.remap(&map, n)).collect();
        let elim = eliminate_leading(&gens, drop.len(), &self.budget)?;
        Ok(Self::from_polys(keep.len(), elim, self.torus).with_budget(self.budget))
    }

    /// Substitutes `x_i -> images[i]`.
    pub fn compose(&self, images: &[Poly], nvars: usize, torus: bool) -> Self {
        let gens = self.generators.iter().map(|g| g.compose(images)).collect();
        Self::from_polys(nvars, gens, torus).with_budget(self.budget)
    }

    /// The constant value of `x^m` on the zero set, if it is constant.
    pub fn monomial_constant_on(&self, m: &[i64]) -> Result<Option<Rational>> {
        if m.len() != self.nvars {
            return Err(Error::pre("exponent vector length differs from the ambient dimension"));
        }
        if self.is_unit()? {
            return Err(Error::EmptyVariety);
        }
        if m.iter().all(|&v| v == 0) {
            return Ok(Some(Rational::one()));
        }
        // Ring (t, x_1..x_n, u): eliminate t and x.
        let n = self.nvars;
        let total = n + 2;
        let mut gens: Vec<Poly> = self.effective_generators()?.iter().map(|g| shift(g, 1, total)).collect();
        let mut te = vec![0u32; total];
        te[0] = 1;
        for (i, &v) in m.iter().enumerate() {
            if v != 0 {
                te[i + 1] = 1;
            }
        }
        gens.push(&Poly::term(total, te, Rational::one()) - &Poly::one(total));
        let mut plus = vec![0u32; total];
        let mut minus = vec![0u32; total];
        for (i, &v) in m.iter().enumerate() {
            plus[i + 1] = v.max(0) as u32;
            minus[i + 1] = (-v).max(0) as u32;
        }
        minus[n + 1] = 1;
        gens.push(&Poly::term(total, minus, Rational::one()) - &Poly::term(total, plus, Rational::one()));
        let elim = eliminate_leading(&gens, n + 1, &self.budget)?;
        let basis = groebner_basis(&elim, TermOrder::Lex, &self.budget)?;
        if is_unit(&basis) {
            return Err(Error::EmptyVariety);
        }
        match basis.as_slice() {
            [g] => {
                let dense = univariate::from_poly(g, 0).ok_or_else(|| Error::Internal("eliminant not univariate".into()))?;
                if univariate::degree(&dense) == Some(1) {
                    Ok(Some(-&dense[0] / &dense[1]))
                } else {
                    Ok(None)
                }
            }
            _ => Ok(None),
        }
    }

    /// Points of a zero-dimensional ideal: the rational points, and ideals of
    /// the remaining (non-rational) points grouped by the eliminants that cut
    /// them out.
    pub fn zero_dimensional_parts(&self) -> Result<(Vec<Vec<Rational>>, Vec<PolynomialIdeal>)> {
        if self.dimension()? != 0 {
            return Err(Error::pre("ideal is not zero-dimensional"));
        }
        let mut points = Vec::new();
        let mut clusters = Vec::new();
        self.split_points(self.nvars, Vec::new(), &mut points, &mut clusters)?;
        points.sort();
        Ok((points, clusters))
    }

    fn split_points(
        &self,
        upto: usize,
        suffix: Vec<Rational>,
        points: &mut Vec<Vec<Rational>>,
        clusters: &mut Vec<PolynomialIdeal>,
    ) -> Result<()> {
        if self.is_unit()? {
            return Ok(());
        }
        if upto == 0 {
            points.push(suffix);
            return Ok(());
        }
        let var = upto - 1;
        let n = self.nvars;
        let elim = self.eliminate(&[var])?;
        let g = elim.generators.first().ok_or_else(|| Error::Internal("zero-dimensional ideal with free coordinate".into()))?;
        let dense = univariate::from_poly(g, 0).unwrap();
        let roots = univariate::rational_roots(&dense);
        let sf = univariate::squarefree(&dense);
        let mut rest = sf.clone();
        for r in &roots {
            rest = univariate::div_rem(&rest, &[-r.clone(), Rational::one()]).0;
        }
        if univariate::degree(&rest).unwrap_or(0) > 0 {
            let cluster = self.add_polys(&[univariate::to_poly(&rest, n, var)]);
            if !cluster.is_unit()? {
                clusters.push(cluster);
            }
        }
        for r in roots {
            let lin = &Poly::var(n, var) - &Poly::constant(n, r.clone());
            let sub = self.add_polys(&[lin]);
            let mut s = vec![r];
            s.extend(suffix.iter().cloned());
            sub.split_points(var, s, points, clusters)?;
        }
        Ok(())
    }

    /// Canonical text: the reduced basis in canonical Laurent form.
    pub fn to_canonical_string(&self) -> Result<String> {
        self.to_canonical_string_with(&default_names(self.nvars))
    }

    pub fn to_canonical_string_with(&self, names: &[String]) -> Result<String> {
        let parts: Vec<String> =
            self.basis()?.iter().map(|g| LaurentPolynomial::from_polynomial(&g.normalized(TermOrder::GrevLex)).to_string_with(names)).collect();
        Ok(format!("<{}>", parts.join(", ")))
    }
}

impl fmt::Debug for PolynomialIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| LaurentPolynomial::from_polynomial(g).to_string()).collect();
        write!(f, "<{}>{}", gens.join(", "), if self.torus { " in torus" } else { "" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn ideal(n: usize, g: &[&str], torus: bool) -> PolynomialIdeal {
        PolynomialIdeal::parse(n, g, torus).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(ideal(2, &[], false).dimension().unwrap(), 2);
        assert_eq!(ideal(2, &["x1 - 2", "x2 - 3"], false).dimension().unwrap(), 0);
        assert_eq!(ideal(2, &["x1*x2 - 1"], true).dimension().unwrap(), 1);
        assert_eq!(ideal(2, &["1"], true).dimension().unwrap(), -1);
        // x1*x2 = 0 is empty in the torus.
        assert_eq!(ideal(2, &["x1*x2"], true).dimension().unwrap(), -1);
        assert_eq!(ideal(2, &["x1*x2"], false).dimension().unwrap(), 1);
    }

    #[test]
    fn elimination() {
        let e = ideal(2, &["x1 - 2*x2"], true).eliminate(&[1]).unwrap();
        assert!(e.generators().is_empty());
        let e = ideal(2, &["x1 - 2", "x2 - 3"], false).eliminate(&[0]).unwrap();
        assert_eq!(e.to_canonical_string().unwrap(), "<x1 - 2>");
        let e = ideal(4, &["x1*x4 - x2*x3"], false).eliminate(&[2, 3]).unwrap();
        assert!(e.generators().is_empty());
    }

    #[test]
    fn constant_monomials() {
        assert_eq!(ideal(2, &["x1 - 2*x2"], true).monomial_constant_on(&[1, -1]).unwrap(), Some(q(2, 1)));
        assert_eq!(ideal(2, &["x1 + x2 - 1"], true).monomial_constant_on(&[0, 0]).unwrap(), Some(q(1, 1)));
        assert_eq!(ideal(2, &["x1 + x2 - 1"], true).monomial_constant_on(&[1, -1]).unwrap(), None);
        assert_eq!(ideal(2, &["x1 - 4", "x2 - 8"], true).monomial_constant_on(&[-3, 2]).unwrap(), Some(q(1, 1)));
        assert_eq!(ideal(2, &["1"], true).monomial_constant_on(&[1, 0]), Err(Error::EmptyVariety));
    }

    #[test]
    fn constant_implies_binomial_membership() {
        let i = ideal(3, &["x1^2 - 3*x2*x3", "x3 - 5"], true);
        for m in [[2, -1, -1], [0, 0, 1], [2, -1, 0]] {
            if let Some(c) = i.monomial_constant_on(&m).unwrap() {
                assert!(i.contains(&binomial(&m, &c)).unwrap(), "{m:?}");
            }
        }
        assert_eq!(i.monomial_constant_on(&[2, -1, 0]).unwrap(), Some(q(15, 1)));
    }

    #[test]
    fn radical_and_saturation() {
        let i = ideal(2, &["x1^2", "x2"], false);
        assert!(!i.contains(&Poly::var(2, 0)).unwrap());
        assert!(i.radical_contains(&Poly::var(2, 0)).unwrap());
        let j = ideal(2, &["x1*x2 - x1"], false);
        let s = j.saturate_by(&Poly::var(2, 0)).unwrap();
        assert_eq!(s.to_canonical_string().unwrap(), "<x2 - 1>");
    }

    #[test]
    fn points_of_zero_dimensional_ideals() {
        let i = ideal(2, &["x1^2 - 3*x1 + 2", "x2 - x1"], false);
        let (pts, clusters) = i.zero_dimensional_parts().unwrap();
        assert_eq!(pts, vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]]);
        assert!(clusters.is_empty());
        let j = ideal(2, &["x1^2 - 2", "x2 - 1"], false);
        let (pts, clusters) = j.zero_dimensional_parts().unwrap();
        assert!(pts.is_empty());
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].dimension().unwrap(), 0);
        // Brute-force agreement: dimension 0 iff every single-variable eliminant
        // is nonzero and nonconstant.
        for (g, zero_dim) in [(vec!["x1^2 - 2", "x2 - 1"], true), (vec!["x1*x2 - 1"], false), (vec!["x1 - x2", "x1^3 - x2^2"], true)] {
            let i = ideal(2, &g, true);
            let all = (0..2).all(|v| {
                let e = i.eliminate(&[v]).unwrap();
                e.generators().first().is_some_and(|p| !p.is_constant())
            });
            assert_eq!(all, zero_dim);
            assert_eq!(i.dimension().unwrap() == 0, zero_dim);
        }
    }

    #[test]
    fn dimension_is_cached_and_stable() {
        let i = ideal(3, &["x1*x2 - x3", "x3 - 2"], true);
        assert_eq!(i.dimension().unwrap(), 1);
        assert_eq!(i.clone().dimension().unwrap(), 1);
        assert!(i.contains(&binomial(&[1, 1, 0], &q(2, 1))).unwrap());
    }
}
