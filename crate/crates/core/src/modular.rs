//! Modular polynomials, singular moduli and weakly special subvarieties of
//! `Y(1)^n`, with Γ-structures given by finitely many non-special values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::constructible::{fiber_jump_locus, ConstructibleSet, Projection};
use crate::error::{Error, Result};
use crate::ideal::PolynomialIdeal;
use crate::laurent::default_names;
use crate::univariate;
use crate::{Integer, Poly, Rational};

const BUNDLED_PHI: [&str; 5] = [
    include_str!("../data/phi_1.txt"),
    include_str!("../data/phi_2.txt"),
    include_str!("../data/phi_3.txt"),
    include_str!("../data/phi_4.txt"),
    include_str!("../data/phi_5.txt"),
];
const BUNDLED_CLASS: &str = include_str!("../data/class_polys.txt");

/// Dedekind psi: the degree of `Φ_N` in each variable.
pub fn psi(n: u32) -> u64 {
    let mut m = n;
    let mut num = n as u64;
    let mut den = 1u64;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            num *= p as u64 + 1;
            den *= p as u64;
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        num *= m as u64 + 1;
        den *= m as u64;
    }
    num / den
}

/// Modular polynomials `Φ_1..Φ_max` and Hilbert class polynomials.
#[derive(Clone, Debug)]
pub struct ModularPolynomialTable {
    phis: Vec<Poly>,
    class_polys: BTreeMap<i64, Vec<Integer>>,
}

fn data_line_tokens(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

fn parse_int(tok: &str, what: &str, line: usize) -> Result<Integer> {
    tok.parse::<Integer>().map_err(|_| Error::Data(format!("{what}, line {line}: bad integer `{tok}`")))
}

impl ModularPolynomialTable {
    /// The table compiled into the library, checked once on first use.
    pub fn bundled() -> Result<&'static Self> {
        static TABLE: OnceLock<Result<ModularPolynomialTable>> = OnceLock::new();
        TABLE
            .get_or_init(|| {
                let t = Self::from_texts(&BUNDLED_PHI, BUNDLED_CLASS)?;
                t.check_integrity()?;
                Ok(t)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Reads `phi_1.txt, phi_2.txt, ...` (as many as exist) and
    /// `class_polys.txt` from a directory.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| Error::Data(format!("{name}: {e}")));
        let mut phis = Vec::new();
        for n in 1.. {
            if !dir.join(format!("phi_{n}.txt")).exists() {
                break;
            }
            phis.push(read(&format!("phi_{n}.txt"))?);
        }
        let class = read("class_polys.txt")?;
        let refs: Vec<&str> = phis.iter().map(String::as_str).collect();
        Self::from_texts(&refs, &class)
    }

    /// `phi_texts[k]` holds `Φ_{k+1}` as `degX degY coeff` lines.
    pub fn from_texts(phi_texts: &[&str], class_text: &str) -> Result<Self> {
        if phi_texts.is_empty() {
            return Err(Error::Data("no modular polynomials".into()));
        }
        let mut phis = Vec::with_capacity(phi_texts.len());
        for (k, text) in phi_texts.iter().enumerate() {
            let what = format!("phi_{}", k + 1);
            let mut p = Poly::zero(2);
            for (line, toks) in data_line_tokens(text) {
                let [a, b, c] = toks[..] else {
                    return Err(Error::Data(format!("{what}, line {line}: expected `degX degY coeff`")));
                };
                let a: u32 = a.parse().map_err(|_| Error::Data(format!("{what}, line {line}: bad degree")))?;
                let b: u32 = b.parse().map_err(|_| Error::Data(format!("{what}, line {line}: bad degree")))?;
                p.add_term(vec![a, b], Rational::from_integer(parse_int(c, &what, line)?));
            }
            phis.push(p);
        }
        let mut class_polys = BTreeMap::new();
        for (line, toks) in data_line_tokens(class_text) {
            let d: i64 = toks[0].parse().map_err(|_| Error::Data(format!("class_polys, line {line}: bad discriminant")))?;
            let coeffs = toks[1..].iter().map(|t| parse_int(t, "class_polys", line)).collect::<Result<Vec<_>>>()?;
            if d >= 0 || coeffs.len() < 2 || !coeffs.last().unwrap().is_one() {
                return Err(Error::Data(format!("class_polys, line {line}: malformed entry for D = {d}")));
            }
            class_polys.insert(d, coeffs);
        }
        Ok(ModularPolynomialTable { phis, class_polys })
    }

    pub fn max_n(&self) -> u32 {
        self.phis.len() as u32
    }

    pub fn max_disc(&self) -> u32 {
        self.class_polys.keys().map(|d| d.unsigned_abs() as u32).max().unwrap_or(0)
    }

    /// `Φ_N(X, Y)` in two variables.
    pub fn phi(&self, n: u32) -> Result<&Poly> {
        if n == 0 {
            return Err(Error::pre("modular polynomials are indexed from 1"));
        }
        self.phis
            .get(n as usize - 1)
            .ok_or_else(|| Error::DataBound(format!("Φ_{n} requested but only Φ_1..Φ_{} are bundled", self.max_n())))
    }

    /// `Φ_N(x_i, x_k)` in `nvars` variables.
    pub fn phi_in(&self, n: u32, i: usize, k: usize, nvars: usize) -> Result<Poly> {
        let p = self.phi(n)?;
        Ok(p.compose(&[Poly::var(nvars, i), Poly::var(nvars, k)]))
    }

    pub fn class_polynomials(&self) -> impl Iterator<Item = (i64, &[Integer])> {
        self.class_polys.iter().map(|(d, c)| (*d, c.as_slice()))
    }

    /// Symmetry, degree `ψ(N)` and the Kronecker congruence for prime `N`;
    /// also `Φ_2(j(i), j(2i)) = 0` when the class table has `D = -4, -16`.
    pub fn check_integrity(&self) -> Result<Vec<String>> {
        let mut log = Vec::new();
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        if self.phis[0] != &x - &y {
            return Err(Error::Data("Φ_1 is not X - Y".into()));
        }
        log.push("Φ_1 = X - Y".to_string());
        for (k, p) in self.phis.iter().enumerate().skip(1) {
            let n = k as u32 + 1;
            let swapped = p.remap(&[1, 0], 2);
            if &swapped != p {
                return Err(Error::Data(format!("Φ_{n} is not symmetric")));
            }
            let d = psi(n);
            if p.degree_in(0) as u64 != d {
                return Err(Error::Data(format!("Φ_{n} has degree {} in X, expected {d}", p.degree_in(0))));
            }
            let mut detail = format!("Φ_{n}: symmetric, degree {d}");
            if (2..n).all(|q| !n.is_multiple_of(q)) {
                let kron = &(&x.pow(n) - &y) * &(&x - &y.pow(n));
                let diff = p - &kron;
                let modulus = Integer::from(n);
                if diff.terms().any(|(_, c)| !c.is_integer() || !c.to_integer().is_multiple_of(&modulus)) {
                    return Err(Error::Data(format!("Φ_{n} fails the Kronecker congruence")));
                }
                detail.push_str(", Kronecker congruence holds");
            }
            log.push(detail);
        }
        log.push(format!("{} class polynomials, |D| <= {}", self.class_polys.len(), self.max_disc()));
        if let (Some(a), Some(b), Ok(p2)) = (self.class_polys.get(&-4), self.class_polys.get(&-16), self.phi(2)) {
            if a.len() == 2 && b.len() == 2 {
                let point = [Rational::from_integer(-a[0].clone()), Rational::from_integer(-b[0].clone())];
                if !p2.eval(&point).is_zero() {
                    return Err(Error::Data("Φ_2(j(i), j(2i)) != 0".into()));
                }
                log.push(format!("Φ_2({}, {}) = 0", point[0], point[1]));
            }
        }
        Ok(log)
    }
}

/// An exact value on `Y(1)`: a rational number or a root of an irreducible
/// integer polynomial, told apart from its conjugates by a label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExactValue {
    Rational(Rational),
    Algebraic { minpoly: Vec<Integer>, label: u32 },
}

impl From<Rational> for ExactValue {
    fn from(q: Rational) -> Self {
        ExactValue::Rational(q)
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactValue::Rational(q) => write!(f, "{q}"),
            ExactValue::Algebraic { minpoly, label } => {
                let cs: Vec<String> = minpoly.iter().map(ToString::to_string).collect();
                write!(f, "root([{}], {label})", cs.join(", "))
            }
        }
    }
}

/// Whether `c` is a root of a bundled class polynomial with `|D| <= disc_bound`.
pub fn is_special_value(table: &ModularPolynomialTable, c: &ExactValue, disc_bound: u32) -> bool {
    let in_range = |d: i64| d.unsigned_abs() <= disc_bound as u64;
    match c {
        ExactValue::Rational(q) => table.class_polynomials().filter(|(d, _)| in_range(*d)).any(|(_, coeffs)| {
            let dense: Vec<Rational> = coeffs.iter().cloned().map(Rational::from_integer).collect();
            univariate::eval(&dense, q).is_zero()
        }),
        ExactValue::Algebraic { minpoly, .. } => {
            let lead = minpoly.last().cloned().unwrap_or_else(Integer::one);
            table.class_polynomials().filter(|(d, _)| in_range(*d)).any(|(_, coeffs)| {
                coeffs.len() == minpoly.len() && coeffs.iter().zip(minpoly).all(|(a, b)| a * &lead == *b)
            })
        }
    }
}

/// Smallest `N <= n_max` with `Φ_N(a, b) = 0`. Algebraic values are only
/// compared for equality.
pub fn hecke_relation(table: &ModularPolynomialTable, a: &ExactValue, b: &ExactValue, n_max: u32) -> Result<Option<u32>> {
    if n_max > table.max_n() {
        return Err(Error::DataBound(format!("Hecke bound {n_max} exceeds the bundled Φ_1..Φ_{}", table.max_n())));
    }
    match (a, b) {
        (ExactValue::Rational(p), ExactValue::Rational(q)) => {
            for n in 1..=n_max {
                if table.phi(n)?.eval(&[p.clone(), q.clone()]).is_zero() {
                    return Ok(Some(n));
                }
            }
            Ok(None)
        }
        _ => Ok((a == b && n_max >= 1).then_some(1)),
    }
}

/// Rational `η` with `Φ_N(a, η) = 0` for some `N <= n_max`, with the least such `N`.
pub fn rational_hecke_images(table: &ModularPolynomialTable, a: &Rational, n_max: u32) -> Result<BTreeMap<Rational, u32>> {
    let mut out = BTreeMap::new();
    for n in 1..=n_max {
        let phi = table.phi(n)?;
        let specialized = phi.compose(&[Poly::constant(1, a.clone()), Poly::var(1, 0)]);
        let dense = univariate::from_poly(&specialized, 0).ok_or_else(|| Error::Internal("specialization not univariate".into()))?;
        for r in univariate::rational_roots(&dense) {
            out.entry(r).or_insert(n);
        }
    }
    Ok(out)
}

/// A weakly special subvariety of `Y(1)^n`: some coordinates are constant,
/// the others fall into blocks tied together by modular relations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModularWeaklySpecial {
    n: usize,
    blocks: Vec<Vec<usize>>,
    edges: Vec<(usize, usize, u32)>,
    ties: Vec<(usize, usize, u32)>,
    constants: BTreeMap<usize, Rational>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl ModularWeaklySpecial {
    pub fn full(n: usize) -> Self {
        Self::from_relations(n, &[], BTreeMap::new())
    }

    /// Builds the variety from pairwise relations `Φ_N(x_i, x_k) = 0` and
    /// constant coordinates. Blocks are the connected components of the
    /// relation graph on the non-constant coordinates; a spanning tree with
    /// the smallest labels is chosen (Kruskal) and the remaining relations
    /// are kept as ties. Relations touching constant coordinates are ignored.
    pub fn from_relations(n: usize, relations: &[(usize, usize, u32)], constants: BTreeMap<usize, Rational>) -> Self {
        let mut rels: Vec<(u32, usize, usize)> = relations
            .iter()
            .filter(|(i, k, _)| i != k && !constants.contains_key(i) && !constants.contains_key(k))
            .map(|&(i, k, m)| (m, i.min(k), i.max(k)))
            .collect();
        rels.sort();
        rels.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
        let mut uf = UnionFind::new(n);
        let mut edges = Vec::new();
        let mut ties = Vec::new();
        for (m, i, k) in rels {
            if uf.union(i, k) {
                edges.push((i, k, m));
            } else {
                ties.push((i, k, m));
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in (0..n).filter(|i| !constants.contains_key(i)) {
            groups.entry(uf.find(i)).or_default().push(i);
        }
        edges.sort();
        ties.sort();
        ModularWeaklySpecial { n, blocks: groups.into_values().collect(), edges, ties, constants }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn edges(&self) -> &[(usize, usize, u32)] {
        &self.edges
    }

    pub fn ties(&self) -> &[(usize, usize, u32)] {
        &self.ties
    }

    pub fn constants(&self) -> &BTreeMap<usize, Rational> {
        &self.constants
    }

    pub fn dimension(&self) -> i64 {
        self.blocks.len() as i64
    }

    /// Largest `N` among the modular relations; 0 when there are none.
    pub fn complexity(&self) -> u32 {
        self.edges.iter().chain(&self.ties).map(|e| e.2).max().unwrap_or(0)
    }

    pub fn relations(&self) -> Vec<(usize, usize, u32)> {
        let mut r: Vec<_> = self.edges.iter().chain(&self.ties).copied().collect();
        r.sort();
        r
    }

    /// Adds the relation `Φ_N(x_i, x_k) = 0`.
    pub fn with_relation(&self, i: usize, k: usize, n: u32) -> Self {
        let mut rels = self.relations();
        rels.push((i, k, n));
        Self::from_relations(self.n, &rels, self.constants.clone())
    }

    /// Fixes coordinate `i` to `c`.
    pub fn with_constant(&self, i: usize, c: Rational) -> Self {
        let mut constants = self.constants.clone();
        constants.insert(i, c);
        Self::from_relations(self.n, &self.relations(), constants)
    }

    /// Drops the constants and keeps the modular shape.
    pub fn shape(&self) -> Self {
        Self::from_relations(self.n, &self.relations(), BTreeMap::new())
    }

    pub fn is_special(&self, table: &ModularPolynomialTable, disc_bound: u32) -> bool {
        self.constants.values().all(|c| is_special_value(table, &ExactValue::Rational(c.clone()), disc_bound))
    }

    pub fn ideal(&self, table: &ModularPolynomialTable) -> Result<PolynomialIdeal> {
        let n = self.n;
        let mut gens = Vec::new();
        for &(i, k, m) in self.edges.iter().chain(&self.ties) {
            gens.push(table.phi_in(m, i, k, n)?);
        }
        for (&i, c) in &self.constants {
            gens.push(&Poly::var(n, i) - &Poly::constant(n, c.clone()));
        }
        Ok(PolynomialIdeal::from_polys(n, gens, false))
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        let mut parts: Vec<String> =
            self.relations().iter().map(|&(i, k, m)| format!("Phi_{m}({}, {})", names[i], names[k])).collect();
        parts.extend(self.constants.iter().map(|(&i, c)| format!("{} = {c}", names[i])));
        format!("[{}]", parts.join(", "))
    }

    /// Parses the bracketed form printed by [`Self::to_string_with`].
    pub fn parse_with(text: &str, names: &[String]) -> Result<Self> {
        let lead = text.len() - text.trim_start().len();
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::parse(lead, "expected `[...]`"))?;
        let var = |name: &str, pos: usize| {
            names.iter().position(|v| v == name.trim()).ok_or_else(|| Error::parse(pos, format!("unknown variable `{}`", name.trim())))
        };
        let mut relations = Vec::new();
        let mut constants = BTreeMap::new();
        let mut depth = 0usize;
        let mut start = 0;
        let mut parts = Vec::new();
        for (i, ch) in inner.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    parts.push((start, &inner[start..i]));
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push((start, &inner[start..]));
        for (off, part) in parts {
            let pos = lead + 1 + off + (part.len() - part.trim_start().len());
            let p = part.trim();
            if p.is_empty() {
                if inner.trim().is_empty() {
                    break;
                }
                return Err(Error::parse(pos, "empty entry"));
            }
            if let Some(rest) = p.strip_prefix("Phi_") {
                let bad = || Error::parse(pos, format!("expected `Phi_N(xi, xk)`, found `{p}`"));
                let (num, args) = rest.split_once('(').ok_or_else(bad)?;
                let m: u32 = num.trim().parse().map_err(|_| bad())?;
                let args = args.strip_suffix(')').ok_or_else(bad)?;
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                if m == 0 {
                    return Err(bad());
                }
                relations.push((var(a, pos)?, var(b, pos)?, m));
            } else {
                let (lhs, rhs) = p.split_once('=').ok_or_else(|| Error::parse(pos, format!("expected `x = c`, found `{p}`")))?;
                let c: Rational = rhs.trim().parse().map_err(|_| Error::parse(pos + lhs.len() + 1, "bad rational constant"))?;
                constants.insert(var(lhs, pos)?, c);
            }
        }
        Ok(Self::from_relations(names.len(), &relations, constants))
    }
}

impl fmt::Display for ModularWeaklySpecial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&default_names(self.n)))
    }
}

impl fmt::Debug for ModularWeaklySpecial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `Γ = (Ξ̄)^n`: Hecke orbits of finitely many non-special values, plus all
/// special points when `include_all_special` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularGamma {
    pub xi_nonspecial: Vec<Rational>,
    pub include_all_special: bool,
    pub hecke_bound: u32,
    pub disc_bound: u32,
}

impl ModularGamma {
    pub fn new(xi_nonspecial: Vec<Rational>, hecke_bound: u32, disc_bound: u32) -> Self {
        ModularGamma { xi_nonspecial, include_all_special: true, hecke_bound, disc_bound }
    }

    /// Whether `c` lies in the truncated `Ξ̄`.
    pub fn admits(&self, table: &ModularPolynomialTable, c: &Rational) -> Result<bool> {
        let v = ExactValue::Rational(c.clone());
        if self.include_all_special && is_special_value(table, &v, self.disc_bound) {
            return Ok(true);
        }
        for xi in &self.xi_nonspecial {
            if hecke_relation(table, &ExactValue::Rational(xi.clone()), &v, self.hecke_bound)?.is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The rational values of the truncated `Ξ̄`, sorted.
    pub fn rational_values(&self, table: &ModularPolynomialTable) -> Result<Vec<Rational>> {
        let mut out = BTreeSet::new();
        for xi in &self.xi_nonspecial {
            out.extend(rational_hecke_images(table, xi, self.hecke_bound)?.into_keys());
        }
        if self.include_all_special {
            for (d, c) in table.class_polynomials() {
                if c.len() == 2 && d.unsigned_abs() <= self.disc_bound as u64 {
                    out.insert(Rational::from_integer(-c[0].clone()));
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

fn single_constant(x: &PolynomialIdeal, i: usize) -> Result<Option<Rational>> {
    let e = x.eliminate(&[i])?;
    for g in e.basis()? {
        if let Some(d) = univariate::from_poly(g, 0) {
            if univariate::degree(&d) == Some(1) {
                return Ok(Some(-&d[0] / &d[1]));
            }
            if univariate::degree(&d).is_some_and(|k| k > 1) {
                return Err(Error::Unsupported(format!("coordinate x{} takes irrational constant values", i + 1)));
            }
        }
    }
    Ok(None)
}

/// The smallest weakly special variety of complexity `<= n_max` containing
/// the irreducible variety `x`.
pub fn weakly_special_closure_modular(table: &ModularPolynomialTable, x: &PolynomialIdeal, n_max: u32) -> Result<ModularWeaklySpecial> {
    if x.torus_mode() {
        return Err(Error::pre("modular closures are computed in affine mode"));
    }
    if n_max > table.max_n() {
        return Err(Error::DataBound(format!("complexity bound {n_max} exceeds the bundled Φ_1..Φ_{}", table.max_n())));
    }
    if x.is_unit()? {
        return Err(Error::EmptyVariety);
    }
    let n = x.nvars();
    let mut constants = BTreeMap::new();
    for i in 0..n {
        if let Some(c) = single_constant(x, i)? {
            constants.insert(i, c);
        }
    }
    let free: Vec<usize> = (0..n).filter(|i| !constants.contains_key(i)).collect();
    let mut relations = Vec::new();
    for (a, &i) in free.iter().enumerate() {
        for &k in &free[a + 1..] {
            for m in 1..=n_max {
                let phi = table.phi_in(m, i, k, n)?;
                if x.contains(&phi)? || x.radical_contains(&phi)? {
                    relations.push((i, k, m));
                    break;
                }
            }
        }
    }
    Ok(ModularWeaklySpecial::from_relations(n, &relations, constants))
}

/// Drops the constants of `ws` that are not in the truncated `Ξ̄`. Dropped
/// coordinates whose values are Hecke-related within the Γ bound stay tied.
pub fn gamma_special_closure(table: &ModularPolynomialTable, ws: &ModularWeaklySpecial, gamma: &ModularGamma) -> Result<ModularWeaklySpecial> {
    let mut kept = BTreeMap::new();
    let mut dropped: Vec<(usize, Rational)> = Vec::new();
    for (&i, c) in ws.constants() {
        if gamma.admits(table, c)? {
            kept.insert(i, c.clone());
        } else {
            dropped.push((i, c.clone()));
        }
    }
    let mut relations = ws.relations();
    for (a, (i, ci)) in dropped.iter().enumerate() {
        for (k, ck) in &dropped[a + 1..] {
            let rel = hecke_relation(table, &ExactValue::Rational(ci.clone()), &ExactValue::Rational(ck.clone()), gamma.hecke_bound)?;
            if let Some(m) = rel {
                relations.push((*i, *k, m));
            }
        }
    }
    Ok(ModularWeaklySpecial::from_relations(ws.ambient_dim(), &relations, kept))
}

/// `dim ⟨X⟩_Γ − dim X`.
pub fn gamma_defect(table: &ModularPolynomialTable, x: &PolynomialIdeal, gamma: &ModularGamma, n_max: u32) -> Result<i64> {
    let ws = weakly_special_closure_modular(table, x, n_max)?;
    Ok(gamma_special_closure(table, &ws, gamma)?.dimension() - x.dimension()?)
}

/// Dimension of the projection of `s` onto the coordinates `coords`.
pub fn projected_dimension(s: &ModularWeaklySpecial, coords: &[usize]) -> i64 {
    s.blocks().iter().filter(|b| b.iter().any(|i| coords.contains(i))).count() as i64
}

/// The points `c` of `pr_i S` over which `V ∩ S_{i,c}` is atypical in `S`.
pub fn atypical_fiber_locus_modular(v: &PolynomialIdeal, s: &ModularWeaklySpecial, coords: &[usize]) -> Result<ConstructibleSet> {
    let base_dim = projected_dimension(s, coords);
    let expected = v.dimension()? - base_dim;
    let locus = fiber_jump_locus(v, &Projection::Coordinates(coords.to_vec()), expected)?;
    let ld = locus.dimension()?;
    if ld >= 0 && ld >= base_dim {
        return Err(Error::DenseLocus(format!("locus of dimension {ld} in a base of dimension {base_dim}")));
    }
    Ok(locus)
}

/// The outcome of removing the constant coordinates of an atypical component.
#[derive(Clone, Debug)]
pub struct StripReduction {
    /// Remaining coordinates `k`.
    pub kept: Vec<usize>,
    /// The stripped coordinates and their values.
    pub constants: BTreeMap<usize, Rational>,
    pub s_prime: PolynomialIdeal,
    pub v_prime: PolynomialIdeal,
    pub x_prime: PolynomialIdeal,
    /// `(dim X, dim V_{i,c}, dim S_{i,c})`, equal to the primed dimensions.
    pub dims: (i64, i64, i64),
    /// Dimension of the weakly special closure of `X` and of its projection.
    pub closure_dims: (i64, i64),
    /// `V ∩ S_{i,c}` is already atypical in `S`.
    pub already_atypical: bool,
    pub atypical_before: bool,
    pub atypical_after: bool,
}

fn substitute(x: &PolynomialIdeal, constants: &BTreeMap<usize, Rational>, kept: &[usize]) -> PolynomialIdeal {
    let m = kept.len();
    let images: Vec<Poly> = (0..x.nvars())
        .map(|i| match constants.get(&i) {
            Some(c) => Poly::constant(m, c.clone()),
            None => Poly::var(m, kept.iter().position(|&k| k == i).unwrap()),
        })
        .collect();
    x.compose(&images, m, false)
}

/// Projects `V`, `S` and `X` away from the constant coordinates of `⟨X⟩_ws`.
pub fn strip_constants_reduction(
    table: &ModularPolynomialTable,
    v: &PolynomialIdeal,
    s: &ModularWeaklySpecial,
    x: &PolynomialIdeal,
    n_max: u32,
) -> Result<StripReduction> {
    let n = v.nvars();
    let si = s.ideal(table)?;
    if !x.variety_within(v)? || !v.variety_within(&si)? {
        return Err(Error::pre("expected X ⊆ V ⊆ S"));
    }
    let ws = weakly_special_closure_modular(table, x, n_max)?;
    let (dx, dv, ds, dp) = (x.dimension()?, v.dimension()?, s.dimension(), ws.dimension());
    let atypical_before = dx > dv + dp - ds;
    if !atypical_before {
        return Err(Error::pre(format!("X is not atypical: {dx} <= {dv} + {dp} - {ds}")));
    }
    let constants = ws.constants().clone();
    let kept: Vec<usize> = (0..n).filter(|i| !constants.contains_key(i)).collect();
    let fixing: Vec<Poly> = constants.iter().map(|(&i, c)| &Poly::var(n, i) - &Poly::constant(n, c.clone())).collect();
    let v_ic = v.add_polys(&fixing);
    let s_ic = si.add_polys(&fixing);
    let (dv_ic, ds_ic) = (v_ic.dimension()?, s_ic.dimension()?);
    let v_prime = substitute(v, &constants, &kept);
    let s_prime = substitute(&si, &constants, &kept);
    let x_prime = substitute(x, &constants, &kept);
    let p_prime_dim = dp;
    let (dxp, dvp, dsp) = (x_prime.dimension()?, v_prime.dimension()?, s_prime.dimension()?);
    if (dxp, dvp, dsp) != (dx, dv_ic, ds_ic) {
        return Err(Error::Internal(format!(
            "dimension ledger mismatch: ({dxp}, {dvp}, {dsp}) after stripping, ({dx}, {dv_ic}, {ds_ic}) before"
        )));
    }
    Ok(StripReduction {
        kept,
        constants,
        s_prime,
        v_prime,
        x_prime,
        dims: (dx, dv_ic, ds_ic),
        closure_dims: (dp, p_prime_dim),
        already_atypical: dv_ic > dv + ds_ic - ds,
        atypical_before,
        atypical_after: dxp > dvp + p_prime_dim - dsp,
    })
}

/// `Φ_N` specialized in its first argument, as a dense univariate polynomial.
pub fn phi_specialized(table: &ModularPolynomialTable, n: u32, a: &Rational) -> Result<univariate::Dense> {
    let phi = table.phi(n)?;
    let p = phi.compose(&[Poly::constant(1, a.clone()), Poly::var(1, 0)]);
    Ok(univariate::from_poly(&p, 0).unwrap_or_default())
}

/// `|numerator| + denominator`, a crude size used to keep searches small.
pub fn naive_height(q: &Rational) -> Integer {
    q.numer().abs() + q.denom()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> &'static ModularPolynomialTable {
        ModularPolynomialTable::bundled().unwrap()
    }

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn r(v: i64) -> ExactValue {
        ExactValue::Rational(q(v))
    }

    fn affine(n: usize, g: &[&str]) -> PolynomialIdeal {
        PolynomialIdeal::parse(n, g, false).unwrap()
    }

    #[test]
    fn bundled_table_is_consistent() {
        let tab = t();
        assert!(tab.max_n() >= 5);
        assert_eq!(psi(4), 6);
        assert_eq!(psi(5), 6);
        assert_eq!(tab.phi(1).unwrap(), &(&Poly::var(2, 0) - &Poly::var(2, 1)));
        assert!(tab.phi(2).unwrap().eval(&[q(1728), q(287496)]).is_zero());
        assert!(matches!(tab.phi(6), Err(Error::DataBound(_))));
        assert!(tab.check_integrity().unwrap().len() >= 5);
    }

    #[test]
    fn corrupted_data_is_rejected() {
        let bad = "3 0 1\n0 3 1\n2 2 -1\n1 1 5\n";
        let tab = ModularPolynomialTable::from_texts(&[BUNDLED_PHI[0], bad], BUNDLED_CLASS).unwrap();
        assert!(tab.check_integrity().is_err());
        let asym = BUNDLED_PHI[1].replacen("\n2 2 -1", "\n2 2 -2", 1);
        let tab = ModularPolynomialTable::from_texts(&[BUNDLED_PHI[0], &asym], BUNDLED_CLASS).unwrap();
        assert!(tab.check_integrity().is_err());
        assert!(ModularPolynomialTable::from_texts(&[BUNDLED_PHI[0]], "-3 0 x\n").is_err());
    }

    #[test]
    fn symmetry_at_random_pairs() {
        let p2 = t().phi(2).unwrap();
        for (a, b) in [(1, 2), (-3, 7), (5, 11), (0, 4), (13, -2), (6, 6), (-9, 1), (2, 17), (100, -50), (3, 8)] {
            let (a, b) = (Rational::new(a.into(), 3.into()), Rational::new(b.into(), 7.into()));
            assert_eq!(p2.eval(&[a.clone(), b.clone()]), p2.eval(&[b, a]));
        }
    }

    #[test]
    fn hecke_and_special_values() {
        let tab = t();
        assert_eq!(hecke_relation(tab, &r(9), &r(9), 5).unwrap(), Some(1));
        assert_eq!(hecke_relation(tab, &r(1728), &r(287496), 5).unwrap(), Some(2));
        assert_eq!(hecke_relation(tab, &r(0), &r(5), 5).unwrap(), None);
        assert!(hecke_relation(tab, &r(0), &r(5), 9).is_err());
        assert!(is_special_value(tab, &r(0), 100));
        assert!(is_special_value(tab, &r(1728), 100));
        assert!(!is_special_value(tab, &r(5), 100));
        assert!(!is_special_value(tab, &r(1728), 3));
        let h15: Vec<Integer> = tab.class_polynomials().find(|(d, _)| *d == -15).unwrap().1.to_vec();
        assert!(is_special_value(tab, &ExactValue::Algebraic { minpoly: h15, label: 0 }, 100));
        let images = rational_hecke_images(tab, &q(1728), 2).unwrap();
        assert_eq!(images.get(&q(287496)), Some(&2));
    }

    #[test]
    fn text_round_trip() {
        let names = default_names(4);
        for text in ["[]", "[Phi_1(x1, x2)]", "[Phi_2(x1, x3), Phi_3(x2, x3), x4 = -3/2]"] {
            let w = ModularWeaklySpecial::parse_with(text, &names).unwrap();
            assert_eq!(w.to_string_with(&names), text);
        }
        assert!(ModularWeaklySpecial::parse_with("[Phi_1(x1, x5)]", &names).is_err());
        assert!(ModularWeaklySpecial::parse_with("[x1 = 1/0]", &names).is_err());
    }

    #[test]
    fn modular_closures() {
        let tab = t();
        let diag = weakly_special_closure_modular(tab, &affine(2, &["x1 - x2"]), 5).unwrap();
        assert_eq!(diag.blocks(), &[vec![0, 1]]);
        assert_eq!(diag.edges(), &[(0, 1, 1)]);
        assert_eq!(diag.complexity(), 1);
        let pt = weakly_special_closure_modular(tab, &affine(2, &["x1 - 5", "x2 - 7"]), 5).unwrap();
        assert_eq!(pt.dimension(), 0);
        assert_eq!(pt.to_string(), "[x1 = 5, x2 = 7]");
        let line = weakly_special_closure_modular(tab, &affine(2, &["x1 + x2 - 1"]), 5).unwrap();
        assert_eq!(line, ModularWeaklySpecial::full(2));
        let p2 = tab.phi(2).unwrap().clone();
        let curve = PolynomialIdeal::from_polys(2, vec![p2], false);
        let c = weakly_special_closure_modular(tab, &curve, 5).unwrap();
        assert_eq!(c.edges(), &[(0, 1, 2)]);
    }

    #[test]
    fn gamma_closures() {
        let tab = t();
        let gamma = ModularGamma::new(vec![q(5)], 5, 100);
        let pt = affine(2, &["x1 - 5", "x2 - 7"]);
        let ws = weakly_special_closure_modular(tab, &pt, 5).unwrap();
        let c = gamma_special_closure(tab, &ws, &gamma).unwrap();
        assert_eq!(c.to_string(), "[x1 = 5]");
        assert_eq!(gamma_defect(tab, &pt, &gamma, 5).unwrap(), 1);
        let sp = affine(2, &["x1", "x2 - 1728"]);
        assert_eq!(gamma_defect(tab, &sp, &gamma, 5).unwrap(), 0);
        assert_eq!(gamma_defect(tab, &affine(2, &["x1 + x2 - 1"]), &gamma, 5).unwrap(), 1);
        // Two non-admissible values tied by Φ_1 stay tied.
        let twin = affine(2, &["x1 - 7", "x2 - 7"]);
        let ws = weakly_special_closure_modular(tab, &twin, 5).unwrap();
        assert_eq!(gamma_special_closure(tab, &ws, &gamma).unwrap().to_string(), "[Phi_1(x1, x2)]");
        assert!(gamma.rational_values(tab).unwrap().contains(&q(1728)));
    }

    #[test]
    fn complexity_is_monotone() {
        let s = ModularWeaklySpecial::full(3).with_relation(0, 1, 2);
        assert_eq!(s.with_relation(1, 2, 3).complexity(), 3);
        assert_eq!(s.with_relation(1, 2, 1).complexity(), 2);
        assert_eq!(s.with_relation(0, 1, 1).dimension(), 2);
    }

    #[test]
    fn fiber_loci() {
        let v = affine(4, &["x1*x4 - x2*x3"]);
        let l = atypical_fiber_locus_modular(&v, &ModularWeaklySpecial::full(4), &[2, 3]).unwrap();
        assert_eq!(l.dimension().unwrap(), 0);
        assert!(l.contains_point(&[q(0), q(0)]));
        let l = atypical_fiber_locus_modular(&affine(2, &["x1 - x2"]), &ModularWeaklySpecial::full(2), &[1]).unwrap();
        assert!(l.is_empty().unwrap());
        let l = atypical_fiber_locus_modular(&affine(2, &[]), &ModularWeaklySpecial::full(2), &[0]).unwrap();
        assert!(l.is_empty().unwrap());
    }

    #[test]
    fn strip_constants() {
        let tab = t();
        let v = affine(3, &["x3 - 5", "x1*x2 - x1 - 1"]);
        let red = strip_constants_reduction(tab, &v, &ModularWeaklySpecial::full(3), &v, 5).unwrap();
        assert_eq!(red.kept, vec![0, 1]);
        assert_eq!(red.dims, (1, 1, 2));
        assert!(red.v_prime.same_variety(&affine(2, &["x1*x2 - x1 - 1"])).unwrap());
        // V lies in {x3 = 5}, so the fixed slice is already atypical.
        assert!(red.already_atypical);
        let v = affine(3, &["x3 - x1 + x2 - 5"]);
        let x = affine(3, &["x1 - x2", "x3 - 5"]);
        let red = strip_constants_reduction(tab, &v, &ModularWeaklySpecial::full(3), &x, 5).unwrap();
        assert!(!red.already_atypical);
        assert_eq!((red.dims, red.closure_dims), ((1, 1, 2), (1, 1)));
        assert!(red.atypical_after);
        let v = affine(2, &["x1 - 5"]);
        let x = affine(2, &["x1 - 5", "x2"]);
        let red = strip_constants_reduction(tab, &v, &ModularWeaklySpecial::full(2), &x, 5).unwrap();
        assert!(red.kept.is_empty());
        assert_eq!(red.dims.2, 0);
        // 0 > 1 + 0 - 2.
        assert!(red.already_atypical);
        let plain = affine(2, &["x1 - x2"]);
        assert!(strip_constants_reduction(tab, &plain, &ModularWeaklySpecial::full(2), &plain, 5).is_ok());
    }
}
