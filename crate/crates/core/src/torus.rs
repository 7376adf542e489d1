//! Cosets of subtori of the torus, weakly special and special closures,
//! finite-rank groups, atypicality witnesses and atypical coset loci.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};

use crate::constructible::{fiber_jump_locus, ConstructibleSet, Projection};
use crate::error::{Error, Result};
use crate::ideal::{binomial, PolynomialIdeal};
use crate::laurent::{default_names, LaurentPolynomial};
use crate::lattice::{
    hermite_normal_form, integer_kernel, quotient_map, smith_normal_form, solve_integer, ExponentLattice, IntegerMatrix,
};
use crate::mult::{MultValue, MultiplicativePoint};
use crate::{Integer, Poly, Rational};

/// The coset `{x : x^m = c_m for m in L}` of the subtorus cut by a saturated
/// relation lattice `L`; the constants belong to the HNF basis rows of `L`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusCoset {
    lattice: ExponentLattice,
    constants: Vec<MultValue>,
}

/// All `d`-th roots of `b` inside the representable group, or `None` when the
/// prime exponents of `b` are not divisible by `d`.
fn roots(b: &MultValue, d: i64) -> Option<Vec<MultValue>> {
    if b.primes().values().any(|e| e % d != 0) {
        return None;
    }
    let primes: BTreeMap<u64, i64> = b.primes().iter().map(|(p, e)| (*p, e / d)).collect();
    let base = b.angle() / Rational::from_integer(d.into());
    Some(
        (0..d)
            .map(|t| MultValue::from_parts(primes.clone(), &base + Rational::new(t.into(), d.into())))
            .collect(),
    )
}

fn combine(values: &[MultValue], coeffs: &[Integer]) -> MultValue {
    values.iter().zip(coeffs).fold(MultValue::one(), |acc, (v, c)| acc.mul(&v.pow(c.to_i64().expect("exponent exceeds i64"))))
}

impl TorusCoset {
    pub fn full(n: usize) -> Self {
        TorusCoset { lattice: ExponentLattice::zero(n), constants: Vec::new() }
    }

    /// Irreducible components of `{x : x^{rows[j]} = constants[j]}`, sorted.
    pub fn components_of_system(n: usize, rows: &[Vec<i64>], constants: &[MultValue]) -> Result<Vec<TorusCoset>> {
        if rows.len() != constants.len() || rows.iter().any(|r| r.len() != n) {
            return Err(Error::pre("relation rows and constants do not match"));
        }
        if rows.is_empty() {
            return Ok(vec![Self::full(n)]);
        }
        let m = IntegerMatrix::from_i64(n, rows);
        let (h, u) = hermite_normal_form(&m);
        let r = h.rows();
        let transformed: Vec<MultValue> = (0..rows.len()).map(|i| combine(constants, u.row(i))).collect();
        if transformed[r..].iter().any(|c| !c.is_one()) {
            return Ok(Vec::new());
        }
        if r == 0 {
            return Ok(vec![Self::full(n)]);
        }
        let c = &transformed[..r];
        let sat = ExponentLattice::from_matrix(&h).saturation();
        let st = sat.basis().transpose();
        let a_rows: Vec<Vec<Integer>> = (0..r)
            .map(|i| solve_integer(&st, h.row(i)).ok_or_else(|| Error::Internal("row outside its saturation".into())))
            .collect::<Result<_>>()?;
        let a = IntegerMatrix::new(r, a_rows);
        let (d, p, q) = smith_normal_form(&a);
        let mut choices: Vec<Vec<MultValue>> = Vec::with_capacity(r);
        for l in 0..r {
            let b = combine(c, p.row(l));
            let dl = d.get(l, l).to_i64().ok_or_else(|| Error::Unsupported("huge invariant factor".into()))?;
            let rs = roots(&b, dl).ok_or_else(|| {
                Error::Unsupported(format!("component constants need a {dl}-th root of {b}, which is not a prime-power product"))
            })?;
            choices.push(rs);
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; r];
        loop {
            let w: Vec<MultValue> = (0..r).map(|l| choices[l][idx[l]].clone()).collect();
            let ys: Vec<MultValue> = (0..r).map(|k| combine(&w, q.row(k))).collect();
            out.push(TorusCoset { lattice: sat.clone(), constants: ys });
            let mut i = 0;
            while i < r && idx[i] + 1 == choices[i].len() {
                idx[i] = 0;
                i += 1;
            }
            if i == r {
                break;
            }
            idx[i] += 1;
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// The coset cut out by the system, which must be irreducible and nonempty.
    pub fn new(n: usize, rows: &[Vec<i64>], constants: &[MultValue]) -> Result<Self> {
        let mut comps = Self::components_of_system(n, rows, constants)?;
        match comps.len() {
            1 => Ok(comps.pop().unwrap()),
            0 => Err(Error::pre("inconsistent relations")),
            k => Err(Error::pre(format!("relations cut out {k} cosets"))),
        }
    }

    /// The coset of the (saturated) subgroup cut by `lattice` through `point`.
    pub fn through_point(lattice: &ExponentLattice, point: &MultiplicativePoint) -> Self {
        let lattice = lattice.saturation();
        let constants = lattice.rows().iter().map(|m| point.monomial(m)).collect();
        TorusCoset { lattice, constants }
    }

    pub fn point(p: &MultiplicativePoint) -> Self {
        Self::through_point(&ExponentLattice::full(p.ambient_dim()), p)
    }

    pub fn ambient_dim(&self) -> usize {
        self.lattice.ambient_dim()
    }

    pub fn dimension(&self) -> i64 {
        (self.ambient_dim() - self.lattice.rank()) as i64
    }

    pub fn lattice(&self) -> &ExponentLattice {
        &self.lattice
    }

    pub fn constants(&self) -> &[MultValue] {
        &self.constants
    }

    pub fn relations(&self) -> Vec<(Vec<i64>, MultValue)> {
        self.lattice.rows().into_iter().zip(self.constants.iter().cloned()).collect()
    }

    /// The value of `x^m` on the coset when `m` is a relation.
    pub fn constant_of(&self, m: &[i64]) -> Option<MultValue> {
        if self.lattice.rank() == 0 {
            return m.iter().all(|&v| v == 0).then(MultValue::one);
        }
        let target: Vec<Integer> = m.iter().map(|&v| Integer::from(v)).collect();
        let coeffs = solve_integer(&self.lattice.basis().transpose(), &target)?;
        Some(combine(&self.constants, &coeffs))
    }

    pub fn is_special(&self) -> bool {
        self.constants.iter().all(MultValue::is_torsion)
    }

    pub fn is_subgroup(&self) -> bool {
        self.constants.iter().all(MultValue::is_one)
    }

    pub fn contains_point(&self, p: &MultiplicativePoint) -> bool {
        self.relations().iter().all(|(m, c)| p.monomial(m) == *c)
    }

    /// Whether `other` lies inside this coset.
    pub fn contains_coset(&self, other: &TorusCoset) -> bool {
        self.relations().iter().all(|(m, c)| other.constant_of(m).as_ref() == Some(c))
    }

    /// A point of the coset.
    pub fn base_point(&self) -> MultiplicativePoint {
        let n = self.ambient_dim();
        let r = self.lattice.rank();
        if r == 0 {
            return MultiplicativePoint::identity(n);
        }
        // U S V = [I 0]; take z = (U log c, 0) and x = exp(V z).
        let (_, u, v) = smith_normal_form(self.lattice.basis());
        let z: Vec<MultValue> = (0..n).map(|k| if k < r { combine(&self.constants, u.row(k)) } else { MultValue::one() }).collect();
        MultiplicativePoint::new((0..n).map(|i| combine(&z, v.row(i))).collect())
    }

    pub fn subgroup(&self) -> Self {
        TorusCoset { lattice: self.lattice.clone(), constants: vec![MultValue::one(); self.lattice.rank()] }
    }

    /// `g * self`.
    pub fn translate(&self, g: &MultiplicativePoint) -> Self {
        let constants = self.relations().iter().map(|(m, c)| c.mul(&g.monomial(m))).collect();
        TorusCoset { lattice: self.lattice.clone(), constants }
    }

    /// Binomial ideal of the coset (torus mode). Constants must be rational.
    pub fn ideal(&self) -> Result<PolynomialIdeal> {
        let n = self.ambient_dim();
        let gens = self
            .relations()
            .iter()
            .map(|(m, c)| {
                let q = c.to_rational().ok_or_else(|| Error::Unsupported(format!("non-rational coset constant {c}")))?;
                Ok(binomial(m, &q))
            })
            .collect::<Result<Vec<Poly>>>()?;
        Ok(PolynomialIdeal::from_polys(n, gens, true))
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .relations()
            .iter()
            .map(|(m, c)| {
                let mono = LaurentPolynomial::monomial(m.len(), m.clone(), Rational::one());
                format!("{} = {}", mono.to_string_with(names), c)
            })
            .collect();
        format!("[{}]", parts.join(", "))
    }

    /// Parses `[x1*x2^-1 = 2^1, ...]` over `names`.
    pub fn parse_with(text: &str, names: &[String]) -> Result<Self> {
        let n = names.len();
        let t = text.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::parse(0, "coset must be enclosed in brackets"))?;
        let mut rows = Vec::new();
        let mut consts = Vec::new();
        let mut offset = text.len() - text.trim_start().len() + 1;
        if !inner.trim().is_empty() {
            for part in inner.split(',') {
                let (lhs, rhs) = part.split_once('=').ok_or_else(|| Error::parse(offset, "expected `monomial = constant`"))?;
                let shifted = |e: Error| match e {
                    Error::Parse { pos, msg } => Error::parse(offset + pos, msg),
                    other => other,
                };
                let mono = LaurentPolynomial::parse_with(lhs, names).map_err(shifted)?;
                let (m, c) = mono
                    .terms()
                    .next()
                    .filter(|_| mono.terms().count() == 1)
                    .ok_or_else(|| Error::parse(offset, "left side must be a monomial"))?;
                let value = MultValue::parse(rhs).map_err(|e| match e {
                    Error::Parse { pos, msg } => Error::parse(offset + lhs.len() + 1 + pos, msg),
                    other => other,
                })?;
                rows.push(m.clone());
                consts.push(value.mul(&MultValue::from_rational(c)?.inv()));
                offset += part.len() + 1;
            }
        }
        Self::new(n, &rows, &consts)
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Self::parse_with(text, &default_names(n))
    }
}

impl fmt::Display for TorusCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&default_names(self.ambient_dim())))
    }
}

impl fmt::Debug for TorusCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Components of the intersection of two cosets.
pub fn coset_intersection_components(a: &TorusCoset, b: &TorusCoset) -> Result<Vec<TorusCoset>> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::pre("cosets live in tori of different dimension"));
    }
    let mut rows = a.lattice.rows();
    rows.extend(b.lattice.rows());
    let mut consts = a.constants.clone();
    consts.extend(b.constants.iter().cloned());
    TorusCoset::components_of_system(a.ambient_dim(), &rows, &consts)
}

/// The intersection when it is a single coset or empty.
pub fn coset_intersection(a: &TorusCoset, b: &TorusCoset) -> Result<Option<TorusCoset>> {
    let mut comps = coset_intersection_components(a, b)?;
    match comps.len() {
        0 => Ok(None),
        1 => Ok(comps.pop()),
        k => Err(Error::pre(format!("intersection has {k} components; use coset_intersection_components"))),
    }
}

/// A finitely generated subgroup of the torus, or its division closure,
/// optionally with the roots of unity of order `torsion_order_cap` adjoined
/// in every coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteRankGroup {
    pub ambient_dim: usize,
    pub generators: Vec<MultiplicativePoint>,
    pub division_closed: bool,
    pub torsion_order_cap: u64,
}

impl FiniteRankGroup {
    pub fn new(generators: Vec<MultiplicativePoint>, division_closed: bool, torsion_order_cap: u64) -> Result<Self> {
        let n = generators.first().map(|g| g.ambient_dim()).ok_or_else(|| Error::pre("a group needs at least one generator"))?;
        if generators.iter().any(|g| g.ambient_dim() != n) {
            return Err(Error::pre("generators of different dimensions"));
        }
        if torsion_order_cap == 0 {
            return Err(Error::pre("torsion order cap must be positive"));
        }
        Ok(FiniteRankGroup { ambient_dim: n, generators, division_closed, torsion_order_cap })
    }

    /// Generators including the adjoined torsion.
    pub fn all_generators(&self) -> Vec<MultiplicativePoint> {
        let mut gens = self.generators.clone();
        if !self.division_closed && self.torsion_order_cap > 1 {
            for i in 0..self.ambient_dim {
                let mut coords = vec![MultValue::one(); self.ambient_dim];
                coords[i] = MultValue::root_of_unity(self.torsion_order_cap, 1);
                gens.push(MultiplicativePoint::new(coords));
            }
        }
        gens
    }

    pub fn rank(&self) -> usize {
        let primes: BTreeSet<u64> = self.generators.iter().flat_map(|g| g.coords().iter().flat_map(|c| c.primes().keys().copied())).collect();
        let primes: Vec<u64> = primes.into_iter().collect();
        let width = self.ambient_dim * primes.len();
        if width == 0 {
            return 0;
        }
        let rows: Vec<Vec<Integer>> = self
            .generators
            .iter()
            .map(|g| g.coords().iter().flat_map(|c| primes.iter().map(|p| Integer::from(*c.primes().get(p).unwrap_or(&0)))).collect())
            .collect();
        ExponentLattice::from_matrix(&IntegerMatrix::new(width, rows)).rank()
    }

    pub fn contains(&self, p: &MultiplicativePoint) -> bool {
        crate::mult::multiplicative_membership(p, &self.all_generators(), self.division_closed)
    }

    /// The image under `x -> (x^{rows[j]})_j`.
    pub fn image(&self, rows: &[Vec<i64>]) -> FiniteRankGroup {
        let gens = self
            .all_generators()
            .iter()
            .map(|g| MultiplicativePoint::new(rows.iter().map(|m| g.monomial(m)).collect()))
            .collect();
        FiniteRankGroup { ambient_dim: rows.len(), generators: gens, division_closed: self.division_closed, torsion_order_cap: 1 }
    }

    /// Generators of the part of the group lying in the subgroup cut by
    /// `lattice`. For division-closed groups the result is the division
    /// closure of that part, which agrees with the intersection on every
    /// point of the subgroup.
    pub fn intersect_subgroup(&self, lattice: &ExponentLattice) -> FiniteRankGroup {
        let rows = lattice.rows();
        let gens = self.all_generators();
        let images: Vec<MultiplicativePoint> = gens.iter().map(|g| MultiplicativePoint::new(rows.iter().map(|m| g.monomial(m)).collect())).collect();
        let primes: BTreeSet<u64> = images.iter().flat_map(|g| g.coords().iter().flat_map(|c| c.primes().keys().copied())).collect();
        let primes: Vec<u64> = primes.into_iter().collect();
        let r = rows.len();
        let k = gens.len();
        let modulus = if self.division_closed {
            Integer::one()
        } else {
            images.iter().flat_map(|g| g.coords().iter().map(|c| c.angle().denom().clone())).fold(Integer::one(), |a, d| a.lcm(&d))
        };
        // Columns: generators, then one slack per torsion equation.
        let slack = if modulus.is_one() { 0 } else { r };
        let mut eqs: Vec<Vec<Integer>> = Vec::new();
        for j in 0..r {
            for p in &primes {
                let mut row: Vec<Integer> = images.iter().map(|g| Integer::from(*g.coords()[j].primes().get(p).unwrap_or(&0))).collect();
                row.extend(std::iter::repeat_n(Integer::zero(), slack));
                eqs.push(row);
            }
            if slack > 0 {
                let mut row: Vec<Integer> = images.iter().map(|g| (g.coords()[j].angle() * Rational::from_integer(modulus.clone())).to_integer()).collect();
                let mut s = vec![Integer::zero(); slack];
                s[j] = modulus.clone();
                row.extend(s);
                eqs.push(row);
            }
        }
        let kernel = if eqs.is_empty() {
            IntegerMatrix::identity(k + slack)
        } else {
            integer_kernel(&IntegerMatrix::new(k + slack, eqs))
        };
        let mut new_gens: Vec<MultiplicativePoint> = kernel
            .entries()
            .iter()
            .map(|a| {
                gens.iter().zip(&a[..k]).fold(MultiplicativePoint::identity(self.ambient_dim), |acc, (g, c)| acc.mul(&g.pow(c.to_i64().unwrap())))
            })
            .filter(|g| g.coords().iter().any(|c| !c.is_one()))
            .collect();
        if new_gens.is_empty() {
            new_gens.push(MultiplicativePoint::identity(self.ambient_dim));
        }
        FiniteRankGroup { ambient_dim: self.ambient_dim, generators: new_gens, division_closed: self.division_closed, torsion_order_cap: 1 }
    }

    /// Points of the group with rational coordinates reachable by words with
    /// exponents `a / d`, `|a| <= word_bound` (and `1 <= d <= word_bound` when
    /// division closed), times the admissible signs. Sorted, without repeats.
    pub fn bounded_points(&self, word_bound: i64) -> Vec<MultiplicativePoint> {
        let n = self.ambient_dim;
        let k = word_bound.max(0);
        let r = self.generators.len();
        let dens: Vec<i64> = if self.division_closed { (1..=k.max(1)).collect() } else { vec![1] };
        let signs_free = if self.division_closed { self.torsion_order_cap >= 2 } else { false };
        let mut out: BTreeSet<MultiplicativePoint> = BTreeSet::new();
        let half = Rational::new(1.into(), 2.into());
        let mut a = vec![-k; r];
        loop {
            for &d in &dens {
                let word = self.generators.iter().zip(&a).fold(MultiplicativePoint::identity(n), |acc, (g, &e)| acc.mul(&g.pow(e)));
                if word.coords().iter().any(|c| c.primes().values().any(|e| e % d != 0)) {
                    continue;
                }
                // Per coordinate: the admissible torsion parts that make it rational.
                let mut options: Vec<Vec<MultValue>> = Vec::with_capacity(n);
                for c in word.coords() {
                    let free: BTreeMap<u64, i64> = c.primes().iter().map(|(p, e)| (*p, e / d)).collect();
                    let mut angles: Vec<Rational> = Vec::new();
                    if self.division_closed {
                        angles.push(Rational::zero());
                        if signs_free {
                            angles.push(half.clone());
                        }
                    } else {
                        let cap = self.torsion_order_cap as i64;
                        for t in 0..cap {
                            let ang = MultValue::from_parts(BTreeMap::new(), c.angle() + Rational::new(t.into(), cap.into()));
                            if ang.sign().is_some() {
                                angles.push(ang.angle().clone());
                            }
                        }
                    }
                    options.push(angles.into_iter().map(|ang| MultValue::from_parts(free.clone(), ang)).collect());
                }
                let mut idx = vec![0usize; n];
                if options.iter().any(|o| o.is_empty()) {
                    continue;
                }
                loop {
                    out.insert(MultiplicativePoint::new((0..n).map(|i| options[i][idx[i]].clone()).collect()));
                    let mut i = 0;
                    while i < n && idx[i] + 1 == options[i].len() {
                        idx[i] = 0;
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                    idx[i] += 1;
                }
            }
            let mut i = 0;
            while i < r && a[i] == k {
                a[i] = -k;
                i += 1;
            }
            if i == r {
                break;
            }
            a[i] += 1;
        }
        out.into_iter().collect()
    }
}

/// Whether the coset contains a point of the group: its constant vector must
/// lie in the image of the group under the relation monomials.
pub fn is_gamma_special(c: &TorusCoset, gamma: &FiniteRankGroup) -> bool {
    if c.lattice.rank() == 0 {
        return true;
    }
    let image = gamma.image(&c.lattice.rows());
    image.contains(&MultiplicativePoint::new(c.constants.clone()))
}

type Fraction = (Poly, Poly);

/// Log-Jacobian kernel of a prime ideal: rational basis (as integer rows) of
/// the exponent vectors `m` whose monomial has vanishing logarithmic
/// differential on the variety.
fn log_jacobian_relations(x: &PolynomialIdeal) -> Result<IntegerMatrix> {
    let n = x.nvars();
    let basis = x.basis()?.to_vec();
    let dim = x.dimension()?;
    let nf = |p: &Poly| x.normal_form(p);
    let mut rows: Vec<Vec<Poly>> = Vec::new();
    for g in &basis {
        let row = (0..n).map(|i| nf(&(&Poly::var(n, i) * &g.derivative(i)))).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    // Fraction-free elimination over the function field.
    let mut rank = 0;
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(rank, p);
        for b in rank + 1..rows.len() {
            if rows[b][col].is_zero() {
                continue;
            }
            let (lead, factor) = (rows[rank][col].clone(), rows[b][col].clone());
            let new_row = (0..n).map(|j| nf(&(&(&lead * &rows[b][j]) - &(&factor * &rows[rank][j])))).collect::<Result<Vec<_>>>()?;
            rows[b] = new_row;
        }
        pivots.push(col);
        rank += 1;
    }
    if rank as i64 != n as i64 - dim {
        return Err(Error::Internal(format!(
            "log-Jacobian has rank {rank} on a variety of dimension {dim} in dimension {n}; the ideal is probably not prime"
        )));
    }
    let one = Poly::one(n);
    let mut equations: Vec<Vec<Rational>> = Vec::new();
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut y: Vec<Fraction> = vec![(Poly::zero(n), one.clone()); n];
        y[f] = (one.clone(), one.clone());
        for i in (0..rank).rev() {
            // y[p_i] = -(sum_{j != p_i} R[i][j] y[j]) / R[i][p_i]
            let mut acc: Fraction = (Poly::zero(n), one.clone());
            for j in (0..n).filter(|&j| j != pivots[i]) {
                if rows[i][j].is_zero() || y[j].0.is_zero() {
                    continue;
                }
                let term_num = nf(&(&rows[i][j] * &y[j].0))?;
                acc = (nf(&(&(&acc.0 * &y[j].1) + &(&term_num * &acc.1)))?, nf(&(&acc.1 * &y[j].1))?);
            }
            y[pivots[i]] = (-&acc.0, nf(&(&acc.1 * &rows[i][pivots[i]]))?);
        }
        let mut w: Vec<Poly> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = y[j].0.clone();
            for (k, yk) in y.iter().enumerate() {
                if k != j {
                    v = nf(&(&v * &yk.1))?;
                }
            }
            w.push(v);
        }
        let monomials: BTreeSet<Vec<u32>> = w.iter().flat_map(|p| p.terms().map(|(e, _)| e.clone())).collect();
        for mono in monomials {
            equations.push(w.iter().map(|p| p.coeff(&mono)).collect());
        }
    }
    if equations.is_empty() {
        return Ok(IntegerMatrix::identity(n));
    }
    let int_rows: Vec<Vec<Integer>> = equations
        .iter()
        .map(|row| {
            let den = row.iter().fold(Integer::one(), |acc, c| acc.lcm(c.denom()));
            row.iter().map(|c| (c * Rational::from_integer(den.clone())).to_integer()).collect()
        })
        .collect();
    Ok(integer_kernel(&IntegerMatrix::new(n, int_rows)))
}

/// The smallest coset containing the (irreducible, torus-mode) variety.
pub fn weakly_special_closure(x: &PolynomialIdeal) -> Result<TorusCoset> {
    if !x.torus_mode() {
        return Err(Error::pre("weakly special closures are computed in torus mode"));
    }
    if x.is_unit()? {
        return Err(Error::EmptyVariety);
    }
    let n = x.nvars();
    let relations = log_jacobian_relations(x)?;
    let rows = relations.to_i64_rows();
    let mut consts = Vec::with_capacity(rows.len());
    for m in &rows {
        match x.monomial_constant_on(m)? {
            Some(c) => consts.push(MultValue::from_rational(&c)?),
            None => return Err(Error::NotConstantVerifiable(format!("{m:?}"))),
        }
    }
    TorusCoset::new(n, &rows, &consts)
}

/// Drops from a coset every relation whose constant is not a root of unity.
/// Constants of order above `torsion_cap` are refused.
pub fn special_part(c: &TorusCoset, torsion_cap: u64) -> Result<TorusCoset> {
    let n = c.ambient_dim();
    let rels = c.relations();
    if rels.is_empty() {
        return Ok(c.clone());
    }
    let primes: BTreeSet<u64> = c.constants.iter().flat_map(|v| v.primes().keys().copied()).collect();
    let primes: Vec<u64> = primes.into_iter().collect();
    let r = rels.len();
    let kernel = if primes.is_empty() {
        IntegerMatrix::identity(r)
    } else {
        let eqs: Vec<Vec<Integer>> =
            primes.iter().map(|p| c.constants.iter().map(|v| Integer::from(*v.primes().get(p).unwrap_or(&0))).collect()).collect();
        integer_kernel(&IntegerMatrix::new(r, eqs))
    };
    let mut rows = Vec::new();
    let mut consts = Vec::new();
    for a in kernel.entries() {
        let m: Vec<i64> = (0..n).map(|i| rels.iter().zip(a).map(|((row, _), k)| row[i] * k.to_i64().unwrap()).sum()).collect();
        let v = combine(&c.constants, a);
        if v.root_order() > torsion_cap {
            return Err(Error::Unsupported(format!("torsion constant {v} has order above the cap {torsion_cap}")));
        }
        rows.push(m);
        consts.push(v);
    }
    TorusCoset::new(n, &rows, &consts)
}

/// The smallest torsion coset containing the variety.
pub fn special_closure(x: &PolynomialIdeal, torsion_cap: u64) -> Result<TorusCoset> {
    special_part(&weakly_special_closure(x)?, torsion_cap)
}

/// Γ-special closure of a variety with weakly special closure `ws`, relative
/// to the candidate group points `points`: among the cosets through `ws`
/// that contain a group point, the one contained in all others. `None` when
/// no single smallest candidate exists.
pub fn gamma_special_closure_torus(
    ws: &TorusCoset,
    gamma: &FiniteRankGroup,
    points: &[MultiplicativePoint],
) -> Result<Option<TorusCoset>> {
    let n = ws.ambient_dim();
    let mut candidates: BTreeSet<TorusCoset> = BTreeSet::new();
    candidates.insert(TorusCoset::full(n));
    if is_gamma_special(ws, gamma) {
        candidates.insert(ws.clone());
    }
    let rels = ws.relations();
    for g in points {
        // Relations m of ws with g^m equal to the constant of ws.
        let quotients: Vec<MultValue> = rels.iter().map(|(m, c)| g.monomial(m).mul(&c.inv())).collect();
        let lattice = relation_kernel(&rels.iter().map(|(m, _)| m.clone()).collect::<Vec<_>>(), &quotients, n);
        let sat = lattice.saturation();
        let consts: Vec<MultValue> = sat.rows().iter().map(|m| ws.constant_of(m).expect("saturation of a sublattice of a saturated lattice")).collect();
        let cand = TorusCoset::new(n, &sat.rows(), &consts)?;
        if is_gamma_special(&cand, gamma) {
            candidates.insert(cand);
        }
    }
    let smallest: Vec<&TorusCoset> = candidates.iter().filter(|c| candidates.iter().all(|o| o.contains_coset(c))).collect();
    Ok(smallest.first().map(|c| (*c).clone()))
}

/// Sublattice of the span of `rows` on which the homomorphism given by
/// `values` (on the rows) is trivial.
fn relation_kernel(rows: &[Vec<i64>], values: &[MultValue], n: usize) -> ExponentLattice {
    if rows.is_empty() {
        return ExponentLattice::zero(n);
    }
    let r = rows.len();
    let primes: BTreeSet<u64> = values.iter().flat_map(|v| v.primes().keys().copied()).collect();
    let modulus = values.iter().map(|v| v.angle().denom().clone()).fold(Integer::one(), |a, d| a.lcm(&d));
    let mut eqs: Vec<Vec<Integer>> = primes
        .iter()
        .map(|p| {
            let mut row: Vec<Integer> = values.iter().map(|v| Integer::from(*v.primes().get(p).unwrap_or(&0))).collect();
            row.push(Integer::zero());
            row
        })
        .collect();
    let mut trow: Vec<Integer> = values.iter().map(|v| (v.angle() * Rational::from_integer(modulus.clone())).to_integer()).collect();
    trow.push(modulus.clone());
    eqs.push(trow);
    let kernel = integer_kernel(&IntegerMatrix::new(r + 1, eqs));
    let combos: Vec<Vec<i64>> = kernel
        .entries()
        .iter()
        .map(|a| (0..n).map(|i| rows.iter().zip(a).map(|(row, k)| row[i] * k.to_i64().unwrap()).sum()).collect())
        .collect();
    ExponentLattice::new(n, &combos)
}

/// An atypical component together with the data that certifies it.
#[derive(Clone, Debug)]
pub struct AtypicalWitness {
    pub component: PolynomialIdeal,
    pub against: TorusCoset,
    pub ambient: TorusCoset,
    /// `(dim X, dim V, dim W, dim S)`.
    pub dims: (i64, i64, i64, i64),
    pub ws_closure: TorusCoset,
    pub defect: i64,
    pub gamma_defect: Option<i64>,
}

/// Witness when `X` (inside `V ∩ W ⊆ S`) satisfies `dim X > dim V + dim W − dim S`.
pub fn atypicality_check(
    v: &PolynomialIdeal,
    w: &TorusCoset,
    s: &TorusCoset,
    x: &PolynomialIdeal,
) -> Result<Option<AtypicalWitness>> {
    let wi = w.ideal()?;
    let si = s.ideal()?;
    if !x.variety_within(v)? || !x.variety_within(&wi)? {
        return Err(Error::pre("component is not contained in V ∩ W"));
    }
    if !v.sum(&wi).variety_within(&si)? {
        return Err(Error::pre("V ∩ W is not contained in S"));
    }
    let dims = (x.dimension()?, v.dimension()?, w.dimension(), s.dimension());
    if dims.0 < 0 {
        return Err(Error::EmptyVariety);
    }
    if dims.0 <= dims.1 + dims.2 - dims.3 {
        return Ok(None);
    }
    let ws = weakly_special_closure(x)?;
    let special = special_part(&ws, 2)?;
    Ok(Some(AtypicalWitness {
        component: x.clone(),
        against: w.clone(),
        ambient: s.clone(),
        dims,
        defect: special.dimension() - dims.0,
        ws_closure: ws,
        gamma_defect: None,
    }))
}

/// Base points `u` of the quotient by the subgroup cut by `t` over which
/// `V ∩ π⁻¹(u)` is atypical in `S`.
pub fn atypical_coset_locus(v: &PolynomialIdeal, t: &ExponentLattice, s: &TorusCoset) -> Result<ConstructibleSet> {
    let q = quotient_map(t);
    let n = v.nvars() as i64;
    let subgroup_dim = n - q.target_dim as i64;
    let expected = v.dimension()? + subgroup_dim - s.dimension();
    let locus = fiber_jump_locus(v, &Projection::Monomial(q.rows()), expected)?;
    let base_dim = s.dimension() - subgroup_dim;
    let ld = locus.dimension()?;
    if ld >= 0 && ld >= base_dim {
        return Err(Error::DenseLocus(format!("locus of dimension {ld} in a base of dimension {base_dim}")));
    }
    Ok(locus)
}

/// Moves a Γ-special coset through `base` to the subgroup through the
/// identity: returns the subgroup, `V` translated by `base⁻¹` and the part
/// of Γ inside the subgroup.
pub fn translate_to_subgroup(
    s: &TorusCoset,
    base: &MultiplicativePoint,
    v: &PolynomialIdeal,
    gamma: &FiniteRankGroup,
) -> Result<(TorusCoset, PolynomialIdeal, FiniteRankGroup)> {
    if !gamma.contains(base) {
        return Err(Error::pre(format!("{base} is not a point of the group")));
    }
    if !s.contains_point(base) {
        return Err(Error::pre(format!("{base} does not lie on the coset")));
    }
    let q = base.to_rationals().ok_or_else(|| Error::Unsupported("translation by a non-rational point".into()))?;
    let n = v.nvars();
    let images: Vec<Poly> = (0..n).map(|i| Poly::term(n, { let mut e = vec![0; n]; e[i] = 1; e }, q[i].clone())).collect();
    let translated = v.compose(&images, n, v.torus_mode());
    let s0 = s.subgroup();
    let g0 = gamma.intersect_subgroup(s.lattice());
    Ok((s0, translated, g0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(v: i64) -> MultValue {
        MultValue::from_i64(v).unwrap()
    }

    fn pt(v: &[i64]) -> MultiplicativePoint {
        MultiplicativePoint::from_i64(v).unwrap()
    }

    fn ideal(n: usize, g: &[&str]) -> PolynomialIdeal {
        PolynomialIdeal::parse(n, g, true).unwrap()
    }

    fn coset(n: usize, rows: &[Vec<i64>], c: &[i64]) -> TorusCoset {
        TorusCoset::new(n, rows, &c.iter().map(|&v| mv(v)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn intersections() {
        let s = coset(2, &[vec![1, 1]], &[2]);
        let t = coset(2, &[vec![2, 1]], &[4]);
        let p = coset_intersection(&s, &t).unwrap().unwrap();
        assert_eq!(p, TorusCoset::point(&pt(&[2, 1])));
        assert_eq!(coset_intersection(&s, &TorusCoset::full(2)).unwrap(), Some(s.clone()));
        assert_eq!(coset_intersection(&s, &coset(2, &[vec![1, 1]], &[3])).unwrap(), None);
        // x^2 = 4 has two components.
        let comps = TorusCoset::components_of_system(1, &[vec![2]], &[mv(4)]).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(TorusCoset::components_of_system(1, &[vec![2]], &[mv(2)]).is_err());
    }

    #[test]
    fn coset_text_round_trip() {
        let c = coset(3, &[vec![1, -1, 0], vec![0, 2, 1]], &[2, -3]);
        let s = c.to_string();
        assert_eq!(TorusCoset::parse(&s, 3).unwrap(), c);
        assert_eq!(TorusCoset::parse("[x1*x2^-1 = 2]", 2).unwrap().to_string(), "[x1*x2^-1 = 2^1]");
        assert_eq!(TorusCoset::parse("[]", 2).unwrap(), TorusCoset::full(2));
        assert!(c.contains_point(&c.base_point()));
    }

    #[test]
    fn closures() {
        let c = weakly_special_closure(&ideal(2, &["x1 - 2*x2"])).unwrap();
        assert_eq!(c, coset(2, &[vec![1, -1]], &[2]));
        let c = weakly_special_closure(&ideal(2, &["x1 - 4", "x2 - 8"])).unwrap();
        assert_eq!(c, TorusCoset::point(&pt(&[4, 8])));
        let c = weakly_special_closure(&ideal(2, &["x1 + x2 - 1"])).unwrap();
        assert_eq!(c, TorusCoset::full(2));
        let c = weakly_special_closure(&ideal(3, &["x1*x2 - 3", "x3 - x1 - 1"])).unwrap();
        assert_eq!(c, coset(3, &[vec![1, 1, 0]], &[3]));
        assert_eq!(special_closure(&ideal(2, &["x1 - 2*x2"]), 2).unwrap(), TorusCoset::full(2));
        assert_eq!(special_closure(&ideal(2, &["x1 + x2"]), 2).unwrap(), coset(2, &[vec![1, -1]], &[-1]));
        let sp = ideal(2, &["x1 - x2^2"]);
        assert_eq!(special_closure(&sp, 2).unwrap(), weakly_special_closure(&sp).unwrap());
    }

    #[test]
    fn gamma_speciality() {
        let g = FiniteRankGroup::new(vec![pt(&[2, 1])], true, 1).unwrap();
        assert!(is_gamma_special(&coset(2, &[vec![1, -1]], &[2]), &g));
        let gamma = FiniteRankGroup::new(vec![pt(&[1, 2])], true, 1).unwrap();
        assert!(!is_gamma_special(&TorusCoset::point(&pt(&[2, 1])), &gamma));
        assert!(is_gamma_special(&coset(2, &[vec![1, 1]], &[2]), &gamma));
        assert!(is_gamma_special(&TorusCoset::full(2), &gamma));
        // Re-basing does not change the answer.
        let c = coset(2, &[vec![1, -1]], &[2]);
        let moved = TorusCoset::through_point(c.lattice(), &pt(&[4, 2]));
        assert_eq!(moved, c);
    }

    #[test]
    fn atypicality() {
        let v = ideal(2, &["x1 - 2*x2"]);
        let w = coset(2, &[vec![1, -1]], &[2]);
        let s = TorusCoset::full(2);
        let wit = atypicality_check(&v, &w, &s, &w.ideal().unwrap()).unwrap().unwrap();
        assert_eq!(wit.dims, (1, 1, 1, 2));
        assert_eq!(wit.defect, 1);
        let v = ideal(2, &["x1 + x2 - 1"]);
        let w = coset(2, &[vec![1, -1]], &[3]);
        let x = ideal(2, &["4*x1 - 3", "4*x2 - 1"]);
        assert!(atypicality_check(&v, &w, &s, &x).unwrap().is_none());
        let full = ideal(2, &[]);
        assert!(atypicality_check(&full, &s, &s, &full).unwrap().is_none());
        assert!(atypicality_check(&v, &w, &s, &ideal(2, &["x1 - 1", "x2 - 1"])).is_err());
    }

    #[test]
    fn coset_loci() {
        let diag = ExponentLattice::new(2, &[vec![1, -1]]);
        let s = TorusCoset::full(2);
        let l = atypical_coset_locus(&ideal(2, &["x1 - 2*x2"]), &diag, &s).unwrap();
        assert_eq!(l.dimension().unwrap(), 0);
        assert!(l.contains_point(&[Rational::from_integer(2.into())]));
        let l = atypical_coset_locus(&ideal(2, &["x1 + x2 - 1"]), &diag, &s).unwrap();
        assert!(l.is_empty().unwrap());
        let l = atypical_coset_locus(&ideal(2, &[]), &diag, &s).unwrap();
        assert!(l.is_empty().unwrap());
    }

    #[test]
    fn translation() {
        let s = coset(2, &[vec![1, -1]], &[2]);
        let g = FiniteRankGroup::new(vec![pt(&[2, 1])], true, 1).unwrap();
        let (s0, v0, _) = translate_to_subgroup(&s, &pt(&[2, 1]), &ideal(2, &["x1 - 2*x2"]), &g).unwrap();
        assert_eq!(s0, coset(2, &[vec![1, -1]], &[1]));
        assert!(v0.same_variety(&ideal(2, &["x1 - x2"])).unwrap());
        let g = FiniteRankGroup::new(vec![pt(&[2, 1]), pt(&[3, 3])], true, 1).unwrap();
        let (_, _, g0) = translate_to_subgroup(&s0, &pt(&[1, 1]), &ideal(2, &["x1 - x2"]), &g).unwrap();
        assert!(g0.contains(&pt(&[3, 3])));
        assert!(!g0.contains(&pt(&[2, 1])));
        assert!(translate_to_subgroup(&s, &pt(&[4, 2]), &ideal(2, &["x1 - 2*x2"]), &FiniteRankGroup::new(vec![pt(&[3, 1])], true, 1).unwrap()).is_err());
    }

    #[test]
    fn bounded_group_points() {
        let g = FiniteRankGroup::new(vec![pt(&[2, 1])], true, 1).unwrap();
        let pts = g.bounded_points(2);
        assert_eq!(pts.len(), 5);
        assert!(pts.contains(&pt(&[4, 1])));
        let g2 = FiniteRankGroup::new(vec![pt(&[2, 1])], true, 2).unwrap();
        assert!(g2.bounded_points(1).contains(&pt(&[2, -1])));
        let g3 = FiniteRankGroup::new(vec![pt(&[4, 9])], true, 1).unwrap();
        assert!(g3.bounded_points(2).contains(&pt(&[2, 3])));
    }

    #[test]
    fn gamma_closure_of_a_non_special_point() {
        let gamma = FiniteRankGroup::new(vec![pt(&[1, 2])], true, 1).unwrap();
        let p = TorusCoset::point(&pt(&[2, 1]));
        let pts = gamma.bounded_points(6);
        // Both {y1 y2 = 2} and {y1^2 y2 = 4} are Γ-special and contain the
        // point, but their intersection is not: no smallest one exists.
        assert_eq!(gamma_special_closure_torus(&p, &gamma, &pts).unwrap(), None);
        let g = FiniteRankGroup::new(vec![pt(&[2, 1])], true, 1).unwrap();
        let c = coset(2, &[vec![1, -1]], &[2]);
        assert_eq!(gamma_special_closure_torus(&c, &g, &g.bounded_points(6)).unwrap(), Some(c));
    }
}
