//! Bounded searches for maximal Γ-atypical subvarieties, Γ-optimal
//! subvarieties and uniform behaviour in families, plus a brute-force oracle.
//!
//! Every finiteness input is replaced by an explicit search bound, so every
//! answer is relative to the [`SearchBounds`] it was computed under.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::constructible::{fiber_jump_locus, ConstructibleSet, Projection};
use crate::error::{Error, Result};
use crate::groebner::Budget;
use crate::ideal::PolynomialIdeal;
use crate::lattice::{ExponentLattice, IntegerMatrix};
use crate::laurent::default_names;
use crate::modular::{
    gamma_special_closure, weakly_special_closure_modular, ModularGamma, ModularPolynomialTable, ModularWeaklySpecial,
};
use crate::mult::MultiplicativePoint;
use crate::torus::{
    atypical_coset_locus, gamma_special_closure_torus, is_gamma_special, special_part, translate_to_subgroup,
    weakly_special_closure, FiniteRankGroup, TorusCoset,
};
use crate::{Integer, Poly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    /// Largest absolute entry of enumerated relation lattices (HNF).
    pub subgroup_entry_bound: i64,
    /// Largest `N` of enumerated modular relations.
    pub modular_complexity_bound: u32,
    /// Largest absolute generator exponent in Γ-point words.
    pub gamma_word_bound: i64,
    pub hecke_bound: u32,
    pub disc_bound: u32,
    /// Refuse enumerations with more candidates than this.
    pub max_candidates: usize,
    pub budget: Budget,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            subgroup_entry_bound: 2,
            modular_complexity_bound: 2,
            gamma_word_bound: 6,
            hecke_bound: 5,
            disc_bound: 100,
            max_candidates: 20_000,
            budget: Budget::default(),
        }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<()> {
        if self.subgroup_entry_bound < 1
            || self.modular_complexity_bound < 1
            || self.gamma_word_bound < 1
            || self.hecke_bound < 1
            || self.disc_bound < 1
            || self.max_candidates < 1
        {
            return Err(Error::pre("search bounds must be positive"));
        }
        Ok(())
    }
}

/// A weakly special subvariety in either setting.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpecialVariety {
    Torus(TorusCoset),
    Modular(ModularWeaklySpecial),
}

impl SpecialVariety {
    pub fn dimension(&self) -> i64 {
        match self {
            SpecialVariety::Torus(c) => c.dimension(),
            SpecialVariety::Modular(m) => m.dimension(),
        }
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        match self {
            SpecialVariety::Torus(c) => c.to_string_with(names),
            SpecialVariety::Modular(m) => m.to_string_with(names),
        }
    }
}

impl fmt::Display for SpecialVariety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecialVariety::Torus(c) => write!(f, "{c}"),
            SpecialVariety::Modular(m) => write!(f, "{m}"),
        }
    }
}

impl fmt::Debug for SpecialVariety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An atypical component found by the engine.
#[derive(Clone, Debug)]
pub struct Witness {
    pub component: PolynomialIdeal,
    /// Canonical text of the component, used for ordering and comparison.
    pub component_text: String,
    pub against: SpecialVariety,
    pub ambient: SpecialVariety,
    /// `(dim X, dim V, dim W, dim S)`.
    pub dims: (i64, i64, i64, i64),
    pub ws_closure: SpecialVariety,
    pub defect: i64,
    pub gamma_defect: Option<i64>,
    /// A Γ-point on `against`: all coordinates in the torus, the constant
    /// coordinates in the modular setting.
    pub translate: Vec<(usize, Rational)>,
}

impl Witness {
    pub fn dimension(&self) -> i64 {
        self.dims.0
    }
}

/// The ambient special variety together with Γ.
#[derive(Clone, Debug)]
pub enum Ambient<'a> {
    Torus { s: TorusCoset, gamma: FiniteRankGroup },
    Modular { table: &'a ModularPolynomialTable, s: ModularWeaklySpecial, gamma: ModularGamma },
}

impl Ambient<'_> {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Ambient::Torus { s, .. } => s.ambient_dim(),
            Ambient::Modular { s, .. } => s.ambient_dim(),
        }
    }

    pub fn special(&self) -> SpecialVariety {
        match self {
            Ambient::Torus { s, .. } => SpecialVariety::Torus(s.clone()),
            Ambient::Modular { s, .. } => SpecialVariety::Modular(s.clone()),
        }
    }

    fn is_torus(&self) -> bool {
        matches!(self, Ambient::Torus { .. })
    }
}

/// Result of an engine or oracle run.
#[derive(Clone, Debug, Default)]
pub struct EngineRun {
    pub witnesses: Vec<Witness>,
    /// The proper Γ-special subvarieties the returned witnesses come from.
    pub sigma: Vec<SpecialVariety>,
    pub diagnostics: Vec<String>,
}

pub const KNOWN_GAP: &str = "intersections of dimension >= 1 are treated as a single top-dimensional component; \
lower-dimensional embedded components and clusters of conjugate irrational points are not examined";

/// All saturated relation lattices in `Z^n` whose HNF entries are at most `b`
/// in absolute value, from rank 0 to rank `n`.
pub fn enumerate_torus_lattices(n: usize, b: i64, max_candidates: usize) -> Result<Vec<ExponentLattice>> {
    let mut out: BTreeSet<ExponentLattice> = BTreeSet::new();
    out.insert(ExponentLattice::zero(n));
    for rank in 1..=n {
        for pivots in subsets(n, rank) {
            // Free slots: for each row, the entries right of its pivot.
            let mut slots: Vec<(usize, usize, Vec<i64>)> = Vec::new();
            for (r, &p) in pivots.iter().enumerate() {
                for c in p + 1..n {
                    slots.push((r, c, Vec::new()));
                }
            }
            for pivot_values in product(&vec![(1..=b).collect::<Vec<i64>>(); rank]) {
                let ranges: Vec<Vec<i64>> = slots
                    .iter()
                    .map(|(_, c, _)| match pivots.iter().position(|p| p == c) {
                        Some(row) => (0..pivot_values[row]).collect(),
                        None => (-b..=b).collect(),
                    })
                    .collect();
                for values in product(&ranges) {
                    let mut rows = vec![vec![0i64; n]; rank];
                    for (r, &p) in pivots.iter().enumerate() {
                        rows[r][p] = pivot_values[r];
                    }
                    for ((r, c, _), v) in slots.iter().zip(&values) {
                        rows[*r][*c] = *v;
                    }
                    let l = ExponentLattice::new(n, &rows);
                    if l.rank() == rank && l.is_saturated() && l.rows() == rows {
                        out.insert(l);
                        if out.len() > max_candidates {
                            return Err(Error::BudgetExhausted(format!("more than {max_candidates} candidate lattices")));
                        }
                    }
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.sort();
    out
}

fn product<T: Clone>(ranges: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for r in ranges {
        out = out.into_iter().flat_map(|prefix| r.iter().map(move |v| {
            let mut p = prefix.clone();
            p.push(v.clone());
            p
        })).collect();
    }
    out
}

fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else { return vec![Vec::new()] };
    let mut out = Vec::new();
    for p in set_partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].insert(0, first);
            out.push(q);
        }
        let mut q = p;
        q.push(vec![first]);
        out.push(q);
    }
    out
}

/// Labelled trees on `block` via Prüfer sequences.
fn spanning_trees(block: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let k = block.len();
    if k <= 1 {
        return vec![Vec::new()];
    }
    if k == 2 {
        return vec![vec![(block[0], block[1])]];
    }
    let mut out = Vec::new();
    for seq in product(&vec![(0..k).collect::<Vec<usize>>(); k - 2]) {
        let mut degree = vec![1usize; k];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut edges = Vec::new();
        for &s in &seq {
            let leaf = (0..k).find(|&i| degree[i] == 1).unwrap();
            edges.push((block[leaf.min(s)], block[leaf.max(s)]));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..k).filter(|&i| degree[i] == 1).collect();
        edges.push((block[rest[0]], block[rest[1]]));
        edges.sort();
        out.push(edges);
    }
    out
}

/// All constant-free modular shapes on `n` coordinates with relation labels
/// at most `n_max`.
pub fn enumerate_modular_shapes(n: usize, n_max: u32, max_candidates: usize) -> Result<Vec<ModularWeaklySpecial>> {
    let mut out = BTreeSet::new();
    let coords: Vec<usize> = (0..n).collect();
    for partition in set_partitions(&coords) {
        let per_block: Vec<Vec<Vec<(usize, usize)>>> = partition.iter().map(|b| spanning_trees(b)).collect();
        for trees in product(&per_block) {
            let edges: Vec<(usize, usize)> = trees.concat();
            for labels in product(&vec![(1..=n_max).collect::<Vec<u32>>(); edges.len()]) {
                let rels: Vec<(usize, usize, u32)> = edges.iter().zip(&labels).map(|(&(i, k), &m)| (i, k, m)).collect();
                out.insert(ModularWeaklySpecial::from_relations(n, &rels, BTreeMap::new()));
                if out.len() > max_candidates {
                    return Err(Error::BudgetExhausted(format!("more than {max_candidates} modular shapes")));
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Special candidates: subgroups in the torus, constant-free shapes in `Y(1)^n`.
pub fn enumerate_special_candidates(torus: bool, n: usize, bounds: &SearchBounds) -> Result<Vec<SpecialVariety>> {
    bounds.validate()?;
    if torus {
        Ok(enumerate_torus_lattices(n, bounds.subgroup_entry_bound, bounds.max_candidates)?
            .into_iter()
            .map(|l| SpecialVariety::Torus(TorusCoset::through_point(&l, &MultiplicativePoint::identity(n))))
            .collect())
    } else {
        Ok(enumerate_modular_shapes(n, bounds.modular_complexity_bound, bounds.max_candidates)?
            .into_iter()
            .map(SpecialVariety::Modular)
            .collect())
    }
}

/// Bounded Γ-points whose image under `x -> (x^{rows[j]})` lies in `locus`,
/// paired with that image.
pub fn mordell_lang_search_torus(
    locus: &ConstructibleSet,
    rows: &[Vec<i64>],
    gamma: &FiniteRankGroup,
    bounds: &SearchBounds,
) -> Vec<(MultiplicativePoint, Vec<Rational>)> {
    gamma
        .bounded_points(bounds.gamma_word_bound)
        .into_iter()
        .filter_map(|g| {
            let u: Vec<Rational> = rows.iter().map(|m| g.monomial(m).to_rational()).collect::<Option<_>>()?;
            locus.contains_point(&u).then_some((g, u))
        })
        .collect()
}

/// Tuples of truncated `Ξ̄` values (rational part) lying in `locus`.
pub fn mordell_lang_search_modular(
    table: &ModularPolynomialTable,
    locus: &ConstructibleSet,
    gamma: &ModularGamma,
) -> Result<Vec<Vec<Rational>>> {
    let values = gamma.rational_values(table)?;
    Ok(product(&vec![values; locus.ambient_dim]).into_iter().filter(|c| locus.contains_point(c)).collect())
}

/// Irreducible pieces of an ideal that the engine examines: rational points
/// when zero-dimensional, the whole ideal otherwise.
pub fn intersection_components(ideal: &PolynomialIdeal, diagnostics: &mut Vec<String>) -> Result<Vec<PolynomialIdeal>> {
    let d = ideal.dimension()?;
    if d < 0 {
        return Ok(Vec::new());
    }
    if d > 0 {
        return Ok(vec![ideal.clone()]);
    }
    let (points, clusters) = ideal.zero_dimensional_parts()?;
    for c in clusters {
        diagnostics.push(format!("skipped cluster of conjugate points {}", c.to_canonical_string()?));
    }
    Ok(points.iter().map(|p| PolynomialIdeal::point(p, ideal.torus_mode()).with_budget(*ideal.budget())).collect())
}

/// Setting-specific closures used while examining an intersection.
struct Ops<'a, 'b> {
    ambient: &'b Ambient<'a>,
    bounds: &'b SearchBounds,
    /// Bounded Γ-points (torus setting).
    points: Vec<MultiplicativePoint>,
}

impl Ops<'_, '_> {
    fn ws_closure(&self, x: &PolynomialIdeal) -> Result<SpecialVariety> {
        match self.ambient {
            Ambient::Torus { .. } => Ok(SpecialVariety::Torus(weakly_special_closure(x)?)),
            Ambient::Modular { table, .. } => {
                Ok(SpecialVariety::Modular(weakly_special_closure_modular(table, x, self.bounds.modular_complexity_bound)?))
            }
        }
    }

    fn gamma_special(&self, v: &SpecialVariety) -> Result<bool> {
        match (self.ambient, v) {
            (Ambient::Torus { gamma, .. }, SpecialVariety::Torus(c)) => Ok(is_gamma_special(c, gamma)),
            (Ambient::Modular { table, gamma, .. }, SpecialVariety::Modular(m)) => {
                for c in m.constants().values() {
                    if !gamma.admits(table, c)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Err(Error::Internal("setting mismatch".into())),
        }
    }

    /// Dimension of the special closure of a variety with closure `ws`.
    fn special_closure_dim(&self, ws: &SpecialVariety) -> Result<i64> {
        match (self.ambient, ws) {
            (Ambient::Torus { .. }, SpecialVariety::Torus(c)) => Ok(special_part(c, 2)?.dimension()),
            (Ambient::Modular { table, gamma, .. }, SpecialVariety::Modular(m)) => {
                let special_only = ModularGamma { xi_nonspecial: Vec::new(), include_all_special: true, ..gamma.clone() };
                Ok(gamma_special_closure(table, m, &special_only)?.dimension())
            }
            _ => Err(Error::Internal("setting mismatch".into())),
        }
    }

    fn gamma_closure_dim(&self, ws: &SpecialVariety) -> Result<Option<i64>> {
        match (self.ambient, ws) {
            (Ambient::Torus { gamma, .. }, SpecialVariety::Torus(c)) => {
                Ok(gamma_special_closure_torus(c, gamma, &self.points)?.map(|c| c.dimension()))
            }
            (Ambient::Modular { table, gamma, .. }, SpecialVariety::Modular(m)) => {
                Ok(Some(gamma_special_closure(table, m, gamma)?.dimension()))
            }
            _ => Err(Error::Internal("setting mismatch".into())),
        }
    }

    fn ideal_of(&self, v: &SpecialVariety) -> Result<PolynomialIdeal> {
        let ideal = match (self.ambient, v) {
            (_, SpecialVariety::Torus(c)) => c.ideal()?,
            (Ambient::Modular { table, .. }, SpecialVariety::Modular(m)) => m.ideal(table)?,
            _ => return Err(Error::Internal("setting mismatch".into())),
        };
        Ok(ideal.with_budget(self.bounds.budget))
    }

    /// Γ-atypical components of `V ∩ W` in `S`.
    fn examine(
        &self,
        v: &PolynomialIdeal,
        w: &SpecialVariety,
        translate: &[(usize, Rational)],
        diagnostics: &mut Vec<String>,
    ) -> Result<Vec<Witness>> {
        let s = self.ambient.special();
        let (dv, dw, ds) = (v.dimension()?, w.dimension(), s.dimension());
        let inter = v.sum(&self.ideal_of(w)?);
        let mut out = Vec::new();
        for x in intersection_components(&inter, diagnostics)? {
            let dx = x.dimension()?;
            if dx <= dv + dw - ds {
                continue;
            }
            let ws = match self.ws_closure(&x) {
                Ok(c) => c,
                Err(Error::Internal(msg)) | Err(Error::Unsupported(msg)) | Err(Error::NotConstantVerifiable(msg)) => {
                    diagnostics.push(format!("skipped component {}: {msg}", x.to_canonical_string()?));
                    continue;
                }
                Err(e) => return Err(e),
            };
            if !self.gamma_special(&ws)? {
                continue;
            }
            let defect = self.special_closure_dim(&ws)? - dx;
            let gamma_defect = self.gamma_closure_dim(&ws)?.map(|d| d - dx);
            out.push(Witness {
                component_text: x.to_canonical_string()?,
                component: x,
                against: w.clone(),
                ambient: s.clone(),
                dims: (dx, dv, dw, ds),
                ws_closure: ws,
                defect,
                gamma_defect,
                translate: translate.to_vec(),
            });
        }
        Ok(out)
    }
}

/// Keeps one witness per component (the one against the smallest special
/// variety in serialized order) and drops components strictly contained in
/// another. Sorted by dimension (descending), then component text.
fn maximal(witnesses: Vec<Witness>) -> Result<Vec<Witness>> {
    let mut by_text: BTreeMap<String, Witness> = BTreeMap::new();
    for w in witnesses {
        match by_text.get(&w.component_text) {
            Some(old) if (old.against.to_string(), &old.translate) <= (w.against.to_string(), &w.translate) => {}
            _ => {
                by_text.insert(w.component_text.clone(), w);
            }
        }
    }
    let mut unique: Vec<Witness> = Vec::new();
    for w in by_text.into_values() {
        let mut merged = false;
        for u in unique.iter_mut() {
            if u.component.same_variety(&w.component)? {
                if (w.against.to_string(), &w.translate) < (u.against.to_string(), &u.translate) {
                    *u = Witness { component: u.component.clone(), component_text: u.component_text.clone(), ..w.clone() };
                }
                merged = true;
                break;
            }
        }
        if !merged {
            unique.push(w);
        }
    }
    let mut keep = Vec::new();
    for (i, w) in unique.iter().enumerate() {
        let mut dominated = false;
        for (j, o) in unique.iter().enumerate() {
            if i != j && o.dims.0 > w.dims.0 && w.component.variety_within(&o.component)? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            keep.push(w.clone());
        }
    }
    keep.sort_by(|a, b| b.dims.0.cmp(&a.dims.0).then_with(|| a.component_text.cmp(&b.component_text)));
    Ok(keep)
}

fn rational_translate(g: &MultiplicativePoint) -> Vec<(usize, Rational)> {
    g.to_rationals().map(|q| q.into_iter().enumerate().collect()).unwrap_or_default()
}

/// Candidate cosets inside `s`: lattices containing the relations of `s`
/// through the Γ-points on `s`, optionally filtered by the atypical locus.
fn torus_search(
    v: &PolynomialIdeal,
    s: &TorusCoset,
    ops: &Ops<'_, '_>,
    lattices: &[ExponentLattice],
    use_locus: bool,
    run: &mut EngineRun,
) -> Result<Vec<Witness>> {
    let on_s: Vec<&MultiplicativePoint> = ops.points.iter().filter(|p| s.contains_point(p)).collect();
    let mut found = Vec::new();
    let mut seen: BTreeSet<ExponentLattice> = BTreeSet::new();
    for l in lattices {
        let l = l.sum(s.lattice()).saturation();
        if l == *s.lattice() || !seen.insert(l.clone()) {
            continue;
        }
        let rows = l.rows();
        let locus = if use_locus {
            match atypical_coset_locus(v, &l, s) {
                Ok(c) => Some(c),
                Err(Error::DenseLocus(msg)) => {
                    run.diagnostics.push(format!("locus for {l} not used: {msg}"));
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let mut cosets: BTreeMap<TorusCoset, MultiplicativePoint> = BTreeMap::new();
        for g in &on_s {
            if let Some(c) = &locus {
                let Some(u) = rows.iter().map(|m| g.monomial(m).to_rational()).collect::<Option<Vec<_>>>() else { continue };
                if !c.contains_point(&u) {
                    continue;
                }
            }
            cosets.entry(TorusCoset::through_point(&l, g)).or_insert_with(|| (*g).clone());
        }
        for (w, g) in cosets {
            let wv = SpecialVariety::Torus(w);
            let ws = ops.examine(v, &wv, &rational_translate(&g), &mut run.diagnostics)?;
            if use_locus && !ws.is_empty() {
                run.sigma.push(wv);
            }
            found.extend(ws);
        }
    }
    Ok(found)
}

/// The modular analogue: shapes merged into `s`, then constant blocks.
fn modular_search(
    v: &PolynomialIdeal,
    s: &ModularWeaklySpecial,
    ops: &Ops<'_, '_>,
    table: &ModularPolynomialTable,
    gamma: &ModularGamma,
    shapes: &[ModularWeaklySpecial],
    use_locus: bool,
    run: &mut EngineRun,
) -> Result<Vec<Witness>> {
    let n = s.ambient_dim();
    let values = gamma.rational_values(table)?;
    let (dv, ds) = (v.dimension()?, s.dimension());
    let mut found = Vec::new();
    let mut merged_seen = BTreeSet::new();
    for shape in shapes {
        let mut rels = s.relations();
        rels.extend(shape.relations());
        let p0 = ModularWeaklySpecial::from_relations(n, &rels, s.constants().clone());
        if !merged_seen.insert(p0.clone()) {
            continue;
        }
        let p0_ideal = p0.ideal(table)?.with_budget(ops.bounds.budget);
        let vp = v.sum(&p0_ideal);
        if vp.is_unit()? {
            continue;
        }
        let blocks = p0.blocks().to_vec();
        for chosen in (0..=blocks.len()).flat_map(|k| subsets(blocks.len(), k)) {
            if chosen.is_empty() && p0 == *s {
                continue;
            }
            let coords: Vec<usize> = {
                let mut c: Vec<usize> = chosen.iter().flat_map(|&b| blocks[b].clone()).collect();
                c.sort();
                c
            };
            let dw = p0.dimension() - chosen.len() as i64;
            let tuples: Vec<Vec<Rational>> = if coords.is_empty() {
                vec![Vec::new()]
            } else if use_locus {
                let locus = fiber_jump_locus(&vp, &Projection::Coordinates(coords.clone()), dv + dw - ds)?;
                product(&vec![values.clone(); coords.len()]).into_iter().filter(|c| locus.contains_point(c)).collect()
            } else {
                // Necessary condition for V ∩ W to be nonempty.
                let image = vp.eliminate(&coords)?;
                product(&vec![values.clone(); coords.len()])
                    .into_iter()
                    .filter(|c| image.generators().iter().all(|g| g.eval(c) == Rational::from_integer(0.into())))
                    .collect()
            };
            for c in tuples {
                let mut w = p0.clone();
                for (&i, ci) in coords.iter().zip(&c) {
                    w = w.with_constant(i, ci.clone());
                }
                let translate: Vec<(usize, Rational)> = w.constants().iter().map(|(i, c)| (*i, c.clone())).collect();
                let wv = SpecialVariety::Modular(w);
                let ws = ops.examine(v, &wv, &translate, &mut run.diagnostics)?;
                if use_locus && !ws.is_empty() {
                    run.sigma.push(wv);
                }
                found.extend(ws);
            }
        }
    }
    Ok(found)
}

fn check_ambient(v: &PolynomialIdeal, ambient: &Ambient<'_>, bounds: &SearchBounds) -> Result<()> {
    bounds.validate()?;
    if v.nvars() != ambient.ambient_dim() {
        return Err(Error::pre("variety and ambient live in different dimensions"));
    }
    if v.torus_mode() != ambient.is_torus() {
        return Err(Error::pre("torus problems need torus-mode ideals and modular problems affine ones"));
    }
    let s_ideal = match ambient {
        Ambient::Torus { s, gamma } => {
            if !is_gamma_special(s, gamma) {
                return Err(Error::pre(format!("ambient {s} is not Γ-special")));
            }
            s.ideal()?
        }
        Ambient::Modular { table, s, gamma } => {
            for c in s.constants().values() {
                if !gamma.admits(table, c)? {
                    return Err(Error::pre(format!("ambient {s} is not Γ-special")));
                }
            }
            s.ideal(table)?
        }
    };
    if v.is_unit()? {
        return Err(Error::EmptyVariety);
    }
    if !v.variety_within(&s_ideal)? {
        return Err(Error::pre("V is not contained in the ambient special variety"));
    }
    Ok(())
}

/// Maximal Γ-atypical subvarieties of `V` in `S`: atypical loci over every
/// bounded candidate, Γ-points in them, then recursion into the Γ-special
/// varieties found.
pub fn maximal_gamma_atypical(v: &PolynomialIdeal, ambient: &Ambient<'_>, bounds: &SearchBounds) -> Result<EngineRun> {
    check_ambient(v, ambient, bounds)?;
    let n = v.nvars();
    let v = v.clone().with_budget(bounds.budget);
    let mut run = EngineRun::default();
    run.diagnostics.push(KNOWN_GAP.to_string());
    let found = match ambient {
        Ambient::Torus { s, gamma } => {
            let points = gamma.bounded_points(bounds.gamma_word_bound);
            let lattices = enumerate_torus_lattices(n, bounds.subgroup_entry_bound, bounds.max_candidates)?;
            if s.is_subgroup() {
                let ops = Ops { ambient, bounds, points };
                torus_recursive(&v, s, &ops, &lattices, 0, &mut run)?
            } else {
                // Move S to the subgroup through the identity.
                let base = points
                    .iter()
                    .find(|p| s.contains_point(p))
                    .cloned()
                    .ok_or_else(|| Error::BudgetExhausted(format!("no Γ-point on {s} within the word bound")))?;
                let (s0, v0, gamma0) = translate_to_subgroup(s, &base, &v, gamma)?;
                let inv = base.inv();
                let points0: Vec<MultiplicativePoint> = points.iter().filter(|p| s.contains_point(p)).map(|p| p.mul(&inv)).collect();
                let sub = Ambient::Torus { s: s0.clone(), gamma: gamma0 };
                let ops = Ops { ambient: &sub, bounds, points: points0 };
                let mut inner = EngineRun::default();
                let found = torus_recursive(&v0, &s0, &ops, &lattices, 0, &mut inner)?;
                run.diagnostics.extend(inner.diagnostics);
                run.diagnostics.push(format!("translated by {base} to the subgroup {s0}"));
                found.iter().map(|w| translate_witness(w, &base, s)).collect::<Result<_>>()?
            }
        }
        Ambient::Modular { table, s, gamma } => {
            let shapes = enumerate_modular_shapes(n, bounds.modular_complexity_bound, bounds.max_candidates)?;
            let ops = Ops { ambient, bounds, points: Vec::new() };
            modular_recursive(&v, s, &ops, table, gamma, &shapes, 0, &mut run)?
        }
    };
    run.witnesses = maximal(found)?;
    run.sigma = run.witnesses.iter().map(|w| w.against.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    Ok(run)
}

fn translate_special(w: &SpecialVariety, g: &MultiplicativePoint) -> SpecialVariety {
    match w {
        SpecialVariety::Torus(c) => SpecialVariety::Torus(c.translate(g)),
        other => other.clone(),
    }
}

fn translate_witness(w: &Witness, g: &MultiplicativePoint, s: &TorusCoset) -> Result<Witness> {
    let q = g.to_rationals().ok_or_else(|| Error::Unsupported("translation by a non-rational point".into()))?;
    let n = q.len();
    let images: Vec<Poly> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            Poly::term(n, e, Rational::from_integer(1.into()) / &q[i])
        })
        .collect();
    let component = w.component.compose(&images, n, true);
    let translate = w.translate.iter().map(|(i, c)| (*i, c * &q[*i])).collect();
    let ws_closure = translate_special(&w.ws_closure, g);
    // Torsion cosets are not stable under translation, so the defect is recomputed.
    let defect = match &ws_closure {
        SpecialVariety::Torus(c) => special_part(c, 2)?.dimension() - w.dims.0,
        SpecialVariety::Modular(_) => w.defect,
    };
    Ok(Witness {
        component_text: component.to_canonical_string()?,
        component,
        against: translate_special(&w.against, g),
        ambient: SpecialVariety::Torus(s.clone()),
        ws_closure,
        defect,
        translate,
        ..w.clone()
    })
}

fn torus_recursive(
    v: &PolynomialIdeal,
    s: &TorusCoset,
    ops: &Ops<'_, '_>,
    lattices: &[ExponentLattice],
    depth: i64,
    run: &mut EngineRun,
) -> Result<Vec<Witness>> {
    if depth > ops.ambient.special().dimension() {
        return Err(Error::Internal("recursion deeper than the ambient dimension".into()));
    }
    let Ambient::Torus { gamma, .. } = ops.ambient else {
        return Err(Error::Internal("setting mismatch".into()));
    };
    let local = Ambient::Torus { s: s.clone(), gamma: gamma.clone() };
    let local_ops = Ops { ambient: &local, bounds: ops.bounds, points: ops.points.clone() };
    let mut sigma_run = EngineRun::default();
    let mut found = torus_search(v, s, &local_ops, lattices, true, &mut sigma_run)?;
    run.diagnostics.extend(sigma_run.diagnostics);
    let top = ops.ambient.special();
    // Recursion: atypical subvarieties of V ∩ T inside T are atypical in S.
    for t in &sigma_run.sigma {
        let SpecialVariety::Torus(tc) = t else { continue };
        let inter = v.sum(&tc.ideal()?.with_budget(ops.bounds.budget));
        for y in intersection_components(&inter, &mut run.diagnostics)? {
            if y.dimension()? < 1 || y.dimension()? >= v.dimension()? {
                continue;
            }
            for inner in torus_recursive(&y, tc, ops, lattices, depth + 1, run)? {
                if let Some(w) = lift_witness(v, &inner, &top)? {
                    found.push(w);
                }
            }
        }
    }
    Ok(found.into_iter().map(|w| Witness { ambient: top.clone(), dims: (w.dims.0, w.dims.1, w.dims.2, top.dimension()), ..w }).collect())
}

/// Re-reads a witness found inside a smaller ambient as a witness for `V` in `top`.
fn lift_witness(v: &PolynomialIdeal, w: &Witness, top: &SpecialVariety) -> Result<Option<Witness>> {
    let (dx, dv, dw, ds) = (w.dims.0, v.dimension()?, w.against.dimension(), top.dimension());
    if dx <= dv + dw - ds {
        return Ok(None);
    }
    Ok(Some(Witness { ambient: top.clone(), dims: (dx, dv, dw, ds), ..w.clone() }))
}

#[allow(clippy::too_many_arguments)]
fn modular_recursive(
    v: &PolynomialIdeal,
    s: &ModularWeaklySpecial,
    ops: &Ops<'_, '_>,
    table: &ModularPolynomialTable,
    gamma: &ModularGamma,
    shapes: &[ModularWeaklySpecial],
    depth: i64,
    run: &mut EngineRun,
) -> Result<Vec<Witness>> {
    let top = ops.ambient.special();
    if depth > top.dimension() {
        return Err(Error::Internal("recursion deeper than the ambient dimension".into()));
    }
    let local = Ambient::Modular { table, s: s.clone(), gamma: gamma.clone() };
    let local_ops = Ops { ambient: &local, bounds: ops.bounds, points: Vec::new() };
    let mut sigma_run = EngineRun::default();
    let mut found = modular_search(v, s, &local_ops, table, gamma, shapes, true, &mut sigma_run)?;
    run.diagnostics.extend(sigma_run.diagnostics);
    for t in &sigma_run.sigma {
        let SpecialVariety::Modular(tm) = t else { continue };
        let inter = v.sum(&tm.ideal(table)?.with_budget(ops.bounds.budget));
        for y in intersection_components(&inter, &mut run.diagnostics)? {
            if y.dimension()? < 1 || y.dimension()? >= v.dimension()? {
                continue;
            }
            for inner in modular_recursive(&y, tm, ops, table, gamma, shapes, depth + 1, run)? {
                if let Some(w) = lift_witness(v, &inner, &top)? {
                    found.push(w);
                }
            }
        }
    }
    Ok(found)
}

/// Exhaustive check: every bounded candidate through every bounded Γ-point,
/// intersected with `V` directly. Tiny instances only.
pub fn brute_force_oracle(v: &PolynomialIdeal, ambient: &Ambient<'_>, bounds: &SearchBounds) -> Result<EngineRun> {
    check_ambient(v, ambient, bounds)?;
    let n = v.nvars();
    if n > 3 {
        return Err(Error::Unsupported("the oracle only handles n <= 3".into()));
    }
    let v = v.clone().with_budget(bounds.budget);
    let mut run = EngineRun::default();
    run.diagnostics.push(KNOWN_GAP.to_string());
    let found = match ambient {
        Ambient::Torus { s, gamma } => {
            let points = gamma.bounded_points(bounds.gamma_word_bound);
            let lattices = enumerate_torus_lattices(n, bounds.subgroup_entry_bound, bounds.max_candidates)?;
            let ops = Ops { ambient, bounds, points };
            torus_search(&v, s, &ops, &lattices, false, &mut run)?
        }
        Ambient::Modular { table, s, gamma } => {
            let shapes = enumerate_modular_shapes(n, bounds.modular_complexity_bound, bounds.max_candidates)?;
            let ops = Ops { ambient, bounds, points: Vec::new() };
            modular_search(&v, s, &ops, table, gamma, &shapes, false, &mut run)?
        }
    };
    run.witnesses = maximal(found)?;
    Ok(run)
}

/// A candidate of the optimality search.
#[derive(Clone, Debug)]
pub struct OptimalCandidate {
    pub component: PolynomialIdeal,
    pub component_text: String,
    pub dimension: i64,
    pub ws_closure: SpecialVariety,
    pub ws_closure_gamma_special: bool,
    pub defect: i64,
    /// `None` when no smallest Γ-special variety exists among the candidates.
    pub gamma_defect: Option<i64>,
    pub gamma_optimal: bool,
}

/// `V` and the components of its intersections with the bounded Γ-special
/// family, with defects and the Γ-optimality flag relative to that family.
pub fn optimal_enumeration(v: &PolynomialIdeal, ambient: &Ambient<'_>, bounds: &SearchBounds) -> Result<(Vec<OptimalCandidate>, Vec<String>)> {
    check_ambient(v, ambient, bounds)?;
    let n = v.nvars();
    let v = v.clone().with_budget(bounds.budget);
    let mut diagnostics = vec![KNOWN_GAP.to_string()];
    let mut pieces: Vec<PolynomialIdeal> = vec![v.clone()];
    let points = match ambient {
        Ambient::Torus { gamma, .. } => gamma.bounded_points(bounds.gamma_word_bound),
        Ambient::Modular { .. } => Vec::new(),
    };
    let ops = Ops { ambient, bounds, points };
    let specials: Vec<SpecialVariety> = match ambient {
        Ambient::Torus { s, .. } => {
            let mut out = BTreeSet::new();
            for l in enumerate_torus_lattices(n, bounds.subgroup_entry_bound, bounds.max_candidates)? {
                let l = l.sum(s.lattice()).saturation();
                for g in ops.points.iter().filter(|p| s.contains_point(p)) {
                    out.insert(SpecialVariety::Torus(TorusCoset::through_point(&l, g)));
                }
            }
            out.into_iter().collect()
        }
        Ambient::Modular { table, s, gamma } => {
            let values = gamma.rational_values(table)?;
            let mut out = BTreeSet::new();
            for shape in enumerate_modular_shapes(n, bounds.modular_complexity_bound, bounds.max_candidates)? {
                let mut rels = s.relations();
                rels.extend(shape.relations());
                let p0 = ModularWeaklySpecial::from_relations(n, &rels, s.constants().clone());
                let blocks = p0.blocks().to_vec();
                for chosen in (0..=blocks.len()).flat_map(|k| subsets(blocks.len(), k)) {
                    let coords: Vec<usize> = chosen.iter().flat_map(|&b| blocks[b].clone()).collect();
                    for c in product(&vec![values.clone(); coords.len()]) {
                        let mut w = p0.clone();
                        for (&i, ci) in coords.iter().zip(&c) {
                            w = w.with_constant(i, ci.clone());
                        }
                        out.insert(SpecialVariety::Modular(w));
                    }
                }
            }
            out.into_iter().collect()
        }
    };
    if specials.len() > bounds.max_candidates {
        return Err(Error::BudgetExhausted(format!("{} special candidates exceed the limit", specials.len())));
    }
    for w in &specials {
        let inter = v.sum(&ops.ideal_of(w)?);
        pieces.extend(intersection_components(&inter, &mut diagnostics)?);
    }
    // Deduplicate by variety.
    let mut unique: Vec<(String, PolynomialIdeal)> = Vec::new();
    let mut texts = BTreeSet::new();
    for p in pieces {
        let t = p.to_canonical_string()?;
        if !texts.insert(t.clone()) {
            continue;
        }
        let mut dup = false;
        for (_, u) in &unique {
            if u.same_variety(&p)? {
                dup = true;
                break;
            }
        }
        if !dup {
            unique.push((t, p));
        }
    }
    let mut cands = Vec::new();
    for (t, x) in unique {
        let dx = x.dimension()?;
        let ws = match ops.ws_closure(&x) {
            Ok(c) => c,
            Err(Error::Internal(msg)) | Err(Error::Unsupported(msg)) | Err(Error::NotConstantVerifiable(msg)) => {
                diagnostics.push(format!("skipped candidate {t}: {msg}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        cands.push(OptimalCandidate {
            component_text: t,
            dimension: dx,
            ws_closure_gamma_special: ops.gamma_special(&ws)?,
            defect: ops.special_closure_dim(&ws)? - dx,
            gamma_defect: ops.gamma_closure_dim(&ws)?.map(|d| d - dx),
            ws_closure: ws,
            component: x,
            gamma_optimal: false,
        });
    }
    for i in 0..cands.len() {
        let Some(dx) = cands[i].gamma_defect else { continue };
        let mut optimal = true;
        for j in 0..cands.len() {
            if i == j || cands[j].dimension <= cands[i].dimension {
                continue;
            }
            if !cands[i].component.variety_within(&cands[j].component)? {
                continue;
            }
            if let Some(dy) = cands[j].gamma_defect {
                if dy <= dx {
                    optimal = false;
                    break;
                }
            }
        }
        cands[i].gamma_optimal = optimal;
    }
    cands.sort_by(|a, b| b.dimension.cmp(&a.dimension).then_with(|| a.component_text.cmp(&b.component_text)));
    Ok((cands, diagnostics))
}

/// A family `V_q` cut out by polynomials in the ambient variables followed by
/// the parameter variables, over the parameter domain `domain`.
#[derive(Clone, Debug)]
pub struct ParametricFamily {
    pub ambient_dim: usize,
    pub params: usize,
    pub generators: Vec<Poly>,
    pub domain: PolynomialIdeal,
    pub torus: bool,
}

impl ParametricFamily {
    pub fn specialize(&self, q: &[Rational]) -> Result<PolynomialIdeal> {
        if q.len() != self.params {
            return Err(Error::pre("wrong number of parameter values"));
        }
        if self.domain.generators().iter().any(|g| g.eval(q) != Rational::from_integer(0.into())) {
            return Err(Error::pre(format!("parameter point {q:?} lies outside the domain")));
        }
        let n = self.ambient_dim;
        let images: Vec<Poly> = (0..n).map(|i| Poly::var(n, i)).chain(q.iter().map(|c| Poly::constant(n, c.clone()))).collect();
        let gens = self.generators.iter().map(|g| g.compose(&images)).collect();
        Ok(PolynomialIdeal::from_polys(n, gens, self.torus))
    }
}

#[derive(Clone, Debug)]
pub struct EnumerationReport {
    pub torus: bool,
    /// Shapes shared by all instances: subgroups or constant-free modular shapes.
    pub sigma: Vec<SpecialVariety>,
    pub instances: Vec<FamilyInstance>,
    /// Largest number of translates needed by one instance.
    pub m: usize,
    pub bounds: SearchBounds,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub parameter: Vec<Rational>,
    pub witnesses: Vec<Witness>,
    /// For each witness: the index of its shape in `sigma` and the Γ-datum.
    pub translates: Vec<(usize, Vec<(usize, Rational)>)>,
}

fn shape_of(w: &SpecialVariety) -> SpecialVariety {
    match w {
        SpecialVariety::Torus(c) => SpecialVariety::Torus(c.subgroup()),
        SpecialVariety::Modular(m) => SpecialVariety::Modular(m.shape()),
    }
}

/// Runs the engine at each sampled parameter and factors each witness's
/// special variety as a shared shape plus a Γ-translate.
pub fn uniform_family_report(
    family: &ParametricFamily,
    ambient: &Ambient<'_>,
    bounds: &SearchBounds,
    sample: &[Vec<Rational>],
) -> Result<EnumerationReport> {
    let mut runs = Vec::new();
    let mut diagnostics = Vec::new();
    for q in sample {
        let v = family.specialize(q)?;
        let run = maximal_gamma_atypical(&v, ambient, bounds)?;
        diagnostics.extend(run.diagnostics.iter().filter(|d| d.as_str() != KNOWN_GAP).cloned());
        runs.push((q.clone(), run.witnesses));
    }
    diagnostics.insert(0, KNOWN_GAP.to_string());
    let sigma: Vec<SpecialVariety> =
        runs.iter().flat_map(|(_, ws)| ws.iter().map(|w| shape_of(&w.against))).collect::<BTreeSet<_>>().into_iter().collect();
    let mut instances = Vec::new();
    let mut m = 0;
    for (q, ws) in runs {
        let translates: Vec<(usize, Vec<(usize, Rational)>)> = ws
            .iter()
            .map(|w| (sigma.iter().position(|s| *s == shape_of(&w.against)).unwrap(), w.translate.clone()))
            .collect();
        let distinct: BTreeSet<_> = translates.iter().map(|(_, t)| t.clone()).collect();
        m = m.max(distinct.len());
        instances.push(FamilyInstance { parameter: q, witnesses: ws, translates });
    }
    Ok(EnumerationReport { torus: ambient.is_torus(), sigma, instances, m, bounds: *bounds, diagnostics })
}

/// Names `x1..xn` as used in serialized output.
pub fn names(n: usize) -> Vec<String> {
    default_names(n)
}

/// Exponent lattice from integer rows, used by callers building candidates.
pub fn lattice_from_rows(n: usize, rows: &[Vec<i64>]) -> ExponentLattice {
    ExponentLattice::from_matrix(&IntegerMatrix::new(n, rows.iter().map(|r| r.iter().map(|&v| Integer::from(v)).collect()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[i64]) -> MultiplicativePoint {
        MultiplicativePoint::from_i64(v).unwrap()
    }

    fn torus(n: usize, g: &[&str]) -> PolynomialIdeal {
        PolynomialIdeal::parse(n, g, true).unwrap()
    }

    fn ambient(n: usize, gens: &[&[i64]]) -> Ambient<'static> {
        let gamma = FiniteRankGroup::new(gens.iter().map(|g| pt(g)).collect(), true, 1).unwrap();
        Ambient::Torus { s: TorusCoset::full(n), gamma }
    }

    fn texts(run: &EngineRun) -> Vec<String> {
        run.witnesses.iter().map(|w| w.component_text.clone()).collect()
    }

    #[test]
    fn torus_lattice_enumeration() {
        let ls = enumerate_torus_lattices(2, 1, 100).unwrap();
        let shown: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
        assert_eq!(ls.len(), 6, "{shown:?}");
        assert!(shown.contains(&"[[1, -1]]".to_string()));
        assert!(shown.contains(&"[[1, 1]]".to_string()));
        let ls = enumerate_torus_lattices(2, 2, 100).unwrap();
        assert!(ls.iter().all(|l| l.is_saturated()));
        assert!(enumerate_torus_lattices(3, 2, 10).is_err());
    }

    #[test]
    fn modular_shape_enumeration() {
        let shapes = enumerate_modular_shapes(2, 1, 100).unwrap();
        assert_eq!(shapes.len(), 2);
        assert_eq!(enumerate_modular_shapes(3, 1, 100).unwrap().len(), 3 + 3 + 1);
        assert_eq!(spanning_trees(&[0, 1, 2, 3]).len(), 16);
    }

    #[test]
    fn mordell_lang_examples() {
        let gamma = FiniteRankGroup::new(vec![pt(&[2, 1])], true, 1).unwrap();
        let rows = vec![vec![1, -1]];
        let v = torus(2, &["x1 - 2*x2"]);
        let locus = atypical_coset_locus(&v, &lattice_from_rows(2, &rows), &TorusCoset::full(2)).unwrap();
        let hits = mordell_lang_search_torus(&locus, &rows, &gamma, &SearchBounds::default());
        assert_eq!(hits, vec![(pt(&[2, 1]), vec![Rational::from_integer(2.into())])]);
        let v5 = torus(2, &["x1 - 5*x2"]);
        let locus = atypical_coset_locus(&v5, &lattice_from_rows(2, &rows), &TorusCoset::full(2)).unwrap();
        assert!(mordell_lang_search_torus(&locus, &rows, &gamma, &SearchBounds::default()).is_empty());
    }

    #[test]
    fn engine_on_the_coset_and_the_line() {
        let b = SearchBounds::default();
        let amb = ambient(2, &[&[2, 1]]);
        let v = torus(2, &["x1 - 2*x2"]);
        let run = maximal_gamma_atypical(&v, &amb, &b).unwrap();
        assert_eq!(texts(&run), vec!["<x1 - 2*x2>"]);
        assert_eq!(run.witnesses[0].dims, (1, 1, 1, 2));
        assert_eq!(texts(&brute_force_oracle(&v, &amb, &b).unwrap()), texts(&run));
        let line = torus(2, &["x1 + x2 - 1"]);
        assert!(maximal_gamma_atypical(&line, &amb, &b).unwrap().witnesses.is_empty());
        assert!(brute_force_oracle(&line, &amb, &b).unwrap().witnesses.is_empty());
        let whole = torus(2, &[]);
        assert!(maximal_gamma_atypical(&whole, &amb, &b).unwrap().witnesses.is_empty());
    }

    #[test]
    fn translated_ambient() {
        let b = SearchBounds { subgroup_entry_bound: 1, ..SearchBounds::default() };
        let gamma = FiniteRankGroup::new(vec![pt(&[2, 1, 1]), pt(&[1, 1, 3])], true, 1).unwrap();
        let s = TorusCoset::new(3, &[vec![1, -1, 0]], &[crate::mult::MultValue::from_i64(2).unwrap()]).unwrap();
        let v = torus(3, &["x1 - 2*x2", "x3 - 3"]);
        let amb = Ambient::Torus { s, gamma };
        let run = maximal_gamma_atypical(&v, &amb, &b).unwrap();
        let oracle = brute_force_oracle(&v, &amb, &b).unwrap();
        assert_eq!(texts(&run), texts(&oracle));
        assert_eq!(texts(&run), vec!["<x1 - 2*x2, x3 - 3>"]);
    }

    #[test]
    fn optimality() {
        let b = SearchBounds::default();
        let (c, _) = optimal_enumeration(&torus(2, &["x1 - 2*x2"]), &ambient(2, &[&[2, 1]]), &b).unwrap();
        let v = &c[0];
        assert_eq!((v.component_text.as_str(), v.gamma_defect, v.ws_closure_gamma_special, v.gamma_optimal), ("<x1 - 2*x2>", Some(0), true, true));
        // The plane y1 y2 = 2 meets y1^2 y2 = 4 in (2, 1), which is not Γ-special.
        let s = torus(2, &["x1*x2 - 2"]);
        let (c, _) = optimal_enumeration(&s, &ambient(2, &[&[1, 2]]), &b).unwrap();
        let p = c.iter().find(|x| x.component_text == "<x1 - 2, x2 - 1>").unwrap();
        assert!(!p.ws_closure_gamma_special);
        let (c, _) = optimal_enumeration(&torus(2, &["x1 - 3*x2"]), &ambient(2, &[&[1, 2]]), &b).unwrap();
        assert!(c.iter().all(|x| !(x.gamma_optimal && x.ws_closure_gamma_special)));
    }

    #[test]
    fn family_report() {
        let n = 2;
        let x = Poly::var(3, 0);
        let y = Poly::var(3, 1);
        let t = Poly::var(3, 2);
        let fam = ParametricFamily {
            ambient_dim: n,
            params: 1,
            generators: vec![&x - &(&t * &y)],
            domain: PolynomialIdeal::zero(1, false),
            torus: true,
        };
        let sample: Vec<Vec<Rational>> = [2, 4, 8].iter().map(|&v| vec![Rational::from_integer(v.into())]).collect();
        let rep = uniform_family_report(&fam, &ambient(2, &[&[2, 1]]), &SearchBounds::default(), &sample).unwrap();
        assert_eq!(rep.sigma.len(), 1);
        assert_eq!(rep.m, 1);
        assert!(rep.instances.iter().all(|i| i.witnesses.len() == 1));
        let datum: Vec<_> = rep.instances.iter().map(|i| i.translates[0].1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        assert_eq!(datum.len(), 3);
    }
}
