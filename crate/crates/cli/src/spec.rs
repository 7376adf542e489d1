//! The `key = value` problem format.
//!
//! ```text
//! # comment
//! setting = torus
//! n = 2
//! variety = x1 - 2*x2
//! gamma = (2, 1)
//! bounds.gamma_word = 6
//! ```
//!
//! Repeatable keys (`variety`, `gamma`, `xi`, `subgroup`, `against`,
//! `family.domain`, `family.sample`) accumulate in order.

use std::fmt::{self, Write as _};

use atypical::engine::SearchBounds;
use atypical::laurent::{default_names, LaurentPolynomial};
use atypical::modular::ModularWeaklySpecial;
use atypical::mult::MultiplicativePoint;
use atypical::torus::TorusCoset;
use atypical::{Error, Rational};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Setting {
    Torus,
    Modular,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::Torus => "torus",
            Setting::Modular => "modular",
        })
    }
}

/// A problem-spec error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct SpecErrors(pub Vec<SpecError>);

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub setting: Setting,
    pub n: usize,
    pub variety: Vec<LaurentPolynomial>,
    pub ambient: Option<Ambient>,
    pub gamma: Vec<MultiplicativePoint>,
    pub division_closed: bool,
    pub torsion_cap: u64,
    pub xi: Vec<Rational>,
    pub include_special: bool,
    pub bounds: SearchBounds,
    /// Relation rows of the subgroup for `atypical-locus` (torus).
    pub subgroup: Vec<Vec<i64>>,
    /// 0-based coordinates for `atypical-locus` (modular).
    pub projection: Vec<usize>,
    /// Special varieties to intersect with in `enumerate`.
    pub against: Vec<Ambient>,
    pub params: usize,
    pub domain: Vec<LaurentPolynomial>,
    pub sample: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ambient {
    Torus(TorusCoset),
    Modular(ModularWeaklySpecial),
}

impl Ambient {
    fn to_string_with(&self, names: &[String]) -> String {
        match self {
            Ambient::Torus(c) => c.to_string_with(names),
            Ambient::Modular(m) => m.to_string_with(names),
        }
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
    /// 1-based column of the first character of `value`.
    value_col: usize,
    key_col: usize,
}

const KEYS: &[&str] = &[
    "setting",
    "n",
    "variety",
    "ambient",
    "gamma",
    "gamma.division_closed",
    "gamma.torsion_cap",
    "xi",
    "xi.include_special",
    "bounds.subgroup_entry",
    "bounds.modular_complexity",
    "bounds.gamma_word",
    "bounds.hecke",
    "bounds.disc",
    "bounds.max_candidates",
    "bounds.max_degree",
    "bounds.max_basis",
    "bounds.max_pairs",
    "subgroup",
    "projection",
    "against",
    "family.params",
    "family.domain",
    "family.sample",
];

const REPEATABLE: &[&str] = &["variety", "gamma", "xi", "subgroup", "against", "family.domain", "family.sample"];

fn split_lines(text: &str) -> (Vec<Entry<'_>>, Vec<SpecError>) {
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            errors.push(SpecError { line, column: 1 + indent(content), message: "expected `key = value`".into() });
            continue;
        };
        let key_part = &content[..eq];
        let value_part = &content[eq + 1..];
        let key = key_part.trim();
        let key_col = 1 + indent(key_part);
        let value_col = eq + 2 + indent(value_part);
        if !KEYS.contains(&key) {
            errors.push(SpecError { line, column: key_col, message: format!("unknown key `{key}`") });
            continue;
        }
        entries.push(Entry { line, key, value: value_part.trim(), value_col, key_col });
    }
    (entries, errors)
}

fn indent(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

fn at(e: &Entry<'_>, message: impl Into<String>) -> SpecError {
    SpecError { line: e.line, column: e.value_col, message: message.into() }
}

/// Maps a core parse error at byte `pos` of the value onto the line.
fn core_at(e: &Entry<'_>, offset: usize, err: Error) -> SpecError {
    match err {
        Error::Parse { pos, msg } => SpecError { line: e.line, column: e.value_col + offset + pos, message: msg },
        other => at(e, other.to_string()),
    }
}

fn parse_num<T: std::str::FromStr>(e: &Entry<'_>) -> Result<T, SpecError> {
    e.value.parse().map_err(|_| at(e, format!("`{}` is not a valid number for `{}`", e.value, e.key)))
}

fn parse_bool(e: &Entry<'_>) -> Result<bool, SpecError> {
    match e.value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(at(e, "expected `true` or `false`")),
    }
}

fn parse_rationals(e: &Entry<'_>) -> Result<Vec<Rational>, SpecError> {
    let mut out = Vec::new();
    let mut off = 0;
    for part in e.value.split(',') {
        let t = part.trim();
        let col = e.value_col + off + indent(part);
        off += part.len() + 1;
        if t.is_empty() {
            continue;
        }
        out.push(t.parse().map_err(|_| SpecError { line: e.line, column: col, message: format!("`{t}` is not a rational") })?);
    }
    Ok(out)
}

fn parse_ints(e: &Entry<'_>) -> Result<Vec<i64>, SpecError> {
    let mut out = Vec::new();
    let mut off = 0;
    for part in e.value.split(|c: char| c == ',' || c.is_whitespace()) {
        let col = e.value_col + off;
        off += part.len() + 1;
        if part.is_empty() {
            continue;
        }
        out.push(part.parse().map_err(|_| SpecError { line: e.line, column: col, message: format!("`{part}` is not an integer") })?);
    }
    Ok(out)
}

fn parse_ambient(e: &Entry<'_>, setting: Setting, names: &[String]) -> Result<Ambient, SpecError> {
    match setting {
        Setting::Torus => TorusCoset::parse_with(e.value, names).map(Ambient::Torus).map_err(|err| core_at(e, 0, err)),
        Setting::Modular => {
            ModularWeaklySpecial::parse_with(e.value, names).map(Ambient::Modular).map_err(|err| core_at(e, 0, err))
        }
    }
}

impl ProblemSpec {
    /// Variable names: `x1..xn` followed by the family parameters `t1..tp`.
    pub fn names(&self) -> Vec<String> {
        names(self.n, self.params)
    }

    pub fn parse(text: &str) -> Result<Self, SpecErrors> {
        let (entries, mut errors) = split_lines(text);
        let mut seen: Vec<&str> = Vec::new();
        for e in &entries {
            if !REPEATABLE.contains(&e.key) && seen.contains(&e.key) {
                errors.push(SpecError { line: e.line, column: e.key_col, message: format!("duplicate key `{}`", e.key) });
            }
            seen.push(e.key);
        }
        let find = |k: &str| entries.iter().find(|e| e.key == k);
        let setting = match find("setting") {
            Some(e) => match e.value {
                "torus" => Some(Setting::Torus),
                "modular" => Some(Setting::Modular),
                _ => {
                    errors.push(at(e, "setting must be `torus` or `modular`"));
                    None
                }
            },
            None => {
                errors.push(SpecError { line: 1, column: 1, message: "missing `setting`".into() });
                None
            }
        };
        let n = match find("n") {
            Some(e) => match parse_num::<usize>(e) {
                Ok(0) => {
                    errors.push(at(e, "n must be positive"));
                    None
                }
                Ok(n) => Some(n),
                Err(err) => {
                    errors.push(err);
                    None
                }
            },
            None => {
                errors.push(SpecError { line: 1, column: 1, message: "missing `n`".into() });
                None
            }
        };
        let params = match find("family.params").map(parse_num::<usize>) {
            Some(Ok(p)) => p,
            Some(Err(err)) => {
                errors.push(err);
                0
            }
            None => 0,
        };
        let (Some(setting), Some(n)) = (setting, n) else {
            return Err(SpecErrors(errors));
        };
        let mut spec = ProblemSpec {
            setting,
            n,
            variety: Vec::new(),
            ambient: None,
            gamma: Vec::new(),
            division_closed: true,
            torsion_cap: 1,
            xi: Vec::new(),
            include_special: true,
            bounds: SearchBounds::default(),
            subgroup: Vec::new(),
            projection: Vec::new(),
            against: Vec::new(),
            params,
            domain: Vec::new(),
            sample: Vec::new(),
        };
        let all_names = names(n, params);
        let point_names = default_names(n);
        let param_names: Vec<String> = all_names[n..].to_vec();
        for e in &entries {
            if let Err(err) = spec.apply(e, &all_names, &point_names, &param_names) {
                errors.push(err);
            }
        }
        if errors.is_empty() {
            Ok(spec)
        } else {
            errors.sort_by_key(|e| (e.line, e.column));
            Err(SpecErrors(errors))
        }
    }

    fn apply(&mut self, e: &Entry<'_>, all: &[String], point: &[String], param: &[String]) -> Result<(), SpecError> {
        let b = &mut self.bounds;
        match e.key {
            "setting" | "n" | "family.params" => {}
            "variety" | "family.domain" => {
                let names = if e.key == "variety" { all } else { param };
                let p = LaurentPolynomial::parse_with(e.value, names).map_err(|err| core_at(e, 0, err))?;
                if self.setting == Setting::Modular && p.has_negative_exponents() {
                    return Err(at(e, "negative exponents are only allowed in the torus setting"));
                }
                if e.key == "variety" {
                    self.variety.push(p);
                } else {
                    self.domain.push(p);
                }
            }
            "ambient" => self.ambient = Some(parse_ambient(e, self.setting, point)?),
            "against" => self.against.push(parse_ambient(e, self.setting, point)?),
            "gamma" => {
                let p = MultiplicativePoint::parse(e.value).map_err(|err| core_at(e, 0, err))?;
                if p.coords().len() != self.n {
                    return Err(at(e, format!("generator has {} coordinates, expected {}", p.coords().len(), self.n)));
                }
                self.gamma.push(p);
            }
            "gamma.division_closed" => self.division_closed = parse_bool(e)?,
            "gamma.torsion_cap" => self.torsion_cap = parse_num(e)?,
            "xi" => self.xi.extend(parse_rationals(e)?),
            "xi.include_special" => self.include_special = parse_bool(e)?,
            "bounds.subgroup_entry" => b.subgroup_entry_bound = parse_num(e)?,
            "bounds.modular_complexity" => b.modular_complexity_bound = parse_num(e)?,
            "bounds.gamma_word" => b.gamma_word_bound = parse_num(e)?,
            "bounds.hecke" => b.hecke_bound = parse_num(e)?,
            "bounds.disc" => b.disc_bound = parse_num(e)?,
            "bounds.max_candidates" => b.max_candidates = parse_num(e)?,
            "bounds.max_degree" => b.budget.max_degree = parse_num(e)?,
            "bounds.max_basis" => b.budget.max_basis = parse_num(e)?,
            "bounds.max_pairs" => b.budget.max_pairs = parse_num(e)?,
            "subgroup" => {
                let row = parse_ints(e)?;
                if row.len() != self.n {
                    return Err(at(e, format!("relation has {} entries, expected {}", row.len(), self.n)));
                }
                self.subgroup.push(row);
            }
            "projection" => {
                let mut coords = Vec::new();
                for v in parse_ints(e)? {
                    if v < 1 || v as usize > self.n {
                        return Err(at(e, format!("coordinate {v} outside 1..{}", self.n)));
                    }
                    coords.push(v as usize - 1);
                }
                self.projection = coords;
            }
            "family.sample" => {
                let q = parse_rationals(e)?;
                if q.len() != self.params {
                    return Err(at(e, format!("sample has {} values, expected {}", q.len(), self.params)));
                }
                self.sample.push(q);
            }
            other => return Err(at(e, format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same spec.
    pub fn to_text(&self) -> String {
        let names = self.names();
        let point = default_names(self.n);
        let params = &names[self.n..];
        let mut s = String::new();
        let _ = writeln!(s, "setting = {}", self.setting);
        let _ = writeln!(s, "n = {}", self.n);
        for v in &self.variety {
            let _ = writeln!(s, "variety = {}", v.to_string_with(&names));
        }
        if let Some(a) = &self.ambient {
            let _ = writeln!(s, "ambient = {}", a.to_string_with(&point));
        }
        match self.setting {
            Setting::Torus => {
                for g in &self.gamma {
                    let _ = writeln!(s, "gamma = {g}");
                }
                let _ = writeln!(s, "gamma.division_closed = {}", self.division_closed);
                let _ = writeln!(s, "gamma.torsion_cap = {}", self.torsion_cap);
            }
            Setting::Modular => {
                if !self.xi.is_empty() {
                    let xi: Vec<String> = self.xi.iter().map(|q| q.to_string()).collect();
                    let _ = writeln!(s, "xi = {}", xi.join(", "));
                }
                let _ = writeln!(s, "xi.include_special = {}", self.include_special);
            }
        }
        let b = &self.bounds;
        let _ = writeln!(s, "bounds.subgroup_entry = {}", b.subgroup_entry_bound);
        let _ = writeln!(s, "bounds.modular_complexity = {}", b.modular_complexity_bound);
        let _ = writeln!(s, "bounds.gamma_word = {}", b.gamma_word_bound);
        let _ = writeln!(s, "bounds.hecke = {}", b.hecke_bound);
        let _ = writeln!(s, "bounds.disc = {}", b.disc_bound);
        let _ = writeln!(s, "bounds.max_candidates = {}", b.max_candidates);
        let _ = writeln!(s, "bounds.max_degree = {}", b.budget.max_degree);
        let _ = writeln!(s, "bounds.max_basis = {}", b.budget.max_basis);
        let _ = writeln!(s, "bounds.max_pairs = {}", b.budget.max_pairs);
        for row in &self.subgroup {
            let r: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "subgroup = {}", r.join(" "));
        }
        if !self.projection.is_empty() {
            let p: Vec<String> = self.projection.iter().map(|v| (v + 1).to_string()).collect();
            let _ = writeln!(s, "projection = {}", p.join(", "));
        }
        for a in &self.against {
            let _ = writeln!(s, "against = {}", a.to_string_with(&point));
        }
        if self.params > 0 {
            let _ = writeln!(s, "family.params = {}", self.params);
            for d in &self.domain {
                let _ = writeln!(s, "family.domain = {}", d.to_string_with(params));
            }
            for q in &self.sample {
                let q: Vec<String> = q.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "family.sample = {}", q.join(", "));
            }
        }
        s
    }
}

pub fn names(n: usize, params: usize) -> Vec<String> {
    let mut v = default_names(n);
    v.extend((1..=params).map(|i| format!("t{i}")));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_torus_spec() {
        let spec = ProblemSpec::parse("setting = torus\nn = 2\nvariety = x1 - 2*x2\n").unwrap();
        assert_eq!(spec.variety.len(), 1);
        assert_eq!(spec.bounds, SearchBounds::default());
    }

    #[test]
    fn out_of_range_variable() {
        let err = ProblemSpec::parse("setting = torus\nn = 2\nvariety = x1 - x3\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!((err.0[0].line, err.0[0].column), (3, 16));
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let err = ProblemSpec::parse("setting = torus\nn = 2\n  colour = red\nn = 3\n").unwrap_err();
        let pos: Vec<(usize, usize)> = err.0.iter().map(|e| (e.line, e.column)).collect();
        assert_eq!(pos, vec![(3, 3), (4, 1)]);
    }

    #[test]
    fn modular_round_trip() {
        let text = "setting = modular\nn = 3\nvariety = x1 + x2 - 1\nambient = [x3 = 5]\nxi = 5\nbounds.hecke = 3\nbounds.disc = 50\nprojection = 3\n";
        let spec = ProblemSpec::parse(text).unwrap();
        let echo = spec.to_text();
        let again = ProblemSpec::parse(&echo).unwrap();
        assert_eq!(again, spec);
        assert_eq!(again.to_text(), echo);
    }

    #[test]
    fn family_round_trip() {
        let text = "setting = torus\nn = 2\nvariety = x1 - t1*x2\ngamma = (2, 1)\nfamily.params = 1\nfamily.sample = 2\nfamily.sample = 4\n";
        let spec = ProblemSpec::parse(text).unwrap();
        assert_eq!(spec.sample.len(), 2);
        assert_eq!(ProblemSpec::parse(&spec.to_text()).unwrap(), spec);
    }
}
