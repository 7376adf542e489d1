//! Command dispatch: turns a [`ProblemSpec`] into a result document.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use atypical::engine::{
    brute_force_oracle, intersection_components, maximal_gamma_atypical, optimal_enumeration, uniform_family_report,
    Ambient as EngineAmbient, EngineRun, ParametricFamily, SearchBounds, SpecialVariety, Witness, KNOWN_GAP,
};
use atypical::ideal::PolynomialIdeal;
use atypical::laurent::default_names;
use atypical::lattice::ExponentLattice;
use atypical::modular::{
    atypical_fiber_locus_modular, gamma_special_closure, weakly_special_closure_modular, ModularGamma,
    ModularPolynomialTable, ModularWeaklySpecial,
};
use atypical::torus::{
    atypical_coset_locus, gamma_special_closure_torus, is_gamma_special, special_part, weakly_special_closure,
    FiniteRankGroup, TorusCoset,
};
use atypical::{Error, Rational};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::doc::SCHEMA;
use crate::spec::{Ambient, ProblemSpec, Setting, SpecErrors};

/// Environment variable naming a directory with `phi_1.txt`.. and `class_polynomials.txt`.
pub const DATA_DIR_VAR: &str = "ATYPICAL_DATA_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Closure,
    AtypicalLocus,
    Enumerate,
    Optimal,
    Family,
    OracleCheck,
    DataCheck,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Closure,
        Command::AtypicalLocus,
        Command::Enumerate,
        Command::Optimal,
        Command::Family,
        Command::OracleCheck,
        Command::DataCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Closure => "closure",
            Command::AtypicalLocus => "atypical-locus",
            Command::Enumerate => "enumerate",
            Command::Optimal => "optimal",
            Command::Family => "family",
            Command::OracleCheck => "oracle-check",
            Command::DataCheck => "data-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(#[from] SpecErrors),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("oracle disagrees with the engine")]
    CheckFailed(Box<Value>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                Error::Parse { .. } => 2,
                Error::BudgetExhausted(_) => 4,
                Error::Precondition(_)
                | Error::EmptyVariety
                | Error::DataBound(_)
                | Error::Unsupported(_)
                | Error::DenseLocus(_)
                | Error::NotConstantVerifiable(_) => 3,
                Error::Data(_) | Error::Internal(_) => 1,
            },
            CliError::CheckFailed(_) => 1,
        }
    }
}

type Res<T> = Result<T, CliError>;

fn pre(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::Precondition(msg.into()))
}

enum Table {
    Bundled(&'static ModularPolynomialTable),
    Loaded(Box<ModularPolynomialTable>),
}

impl Table {
    fn load(data_dir: Option<&Path>) -> Res<Self> {
        match data_dir {
            Some(dir) => {
                let t = ModularPolynomialTable::load_dir(dir)?;
                t.check_integrity()?;
                Ok(Table::Loaded(Box::new(t)))
            }
            None => Ok(Table::Bundled(ModularPolynomialTable::bundled()?)),
        }
    }

    fn get(&self) -> &ModularPolynomialTable {
        match self {
            Table::Bundled(t) => t,
            Table::Loaded(t) => t,
        }
    }
}

/// Runs `command` on `spec` (absent only for `data-check`).
pub fn run_command(spec: Option<&ProblemSpec>, command: Command, data_dir: Option<&Path>) -> Res<Value> {
    let table = if command == Command::DataCheck || spec.is_some_and(|s| s.setting == Setting::Modular) {
        Some(Table::load(data_dir)?)
    } else {
        None
    };
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("command".into(), json!(command.name()));
    if command == Command::DataCheck {
        let log = table.as_ref().unwrap().get().check_integrity()?;
        doc.insert("bounds".into(), bounds_value(spec.map(|s| s.bounds).unwrap_or_default()));
        doc.insert("results".into(), json!({ "passed": true, "checks": log }));
        doc.insert("diagnostics".into(), json!([]));
        return Ok(Value::Object(doc));
    }
    let spec = spec.ok_or_else(|| pre(format!("`{command}` needs a problem spec")))?;
    doc.insert("input".into(), json!(spec.to_text()));
    doc.insert("bounds".into(), bounds_value(spec.bounds));
    let ctx = Context::new(spec, table.as_ref().map(Table::get))?;
    let mut diagnostics = Vec::new();
    let results = match command {
        Command::Closure => ctx.closure()?,
        Command::AtypicalLocus => ctx.atypical_locus()?,
        Command::Enumerate => ctx.enumerate(&mut diagnostics)?,
        Command::Optimal => ctx.optimal(&mut diagnostics)?,
        Command::Family => ctx.family(&mut diagnostics)?,
        Command::OracleCheck => ctx.oracle_check(&mut diagnostics)?,
        Command::DataCheck => unreachable!(),
    };
    let agree = results.get("agree").and_then(Value::as_bool);
    doc.insert("results".into(), results);
    doc.insert("diagnostics".into(), json!(diagnostics));
    let doc = Value::Object(doc);
    if agree == Some(false) {
        return Err(CliError::CheckFailed(Box::new(doc)));
    }
    Ok(doc)
}

fn bounds_value(b: SearchBounds) -> Value {
    json!({
        "subgroup_entry": b.subgroup_entry_bound,
        "modular_complexity": b.modular_complexity_bound,
        "gamma_word": b.gamma_word_bound,
        "hecke": b.hecke_bound,
        "disc": b.disc_bound,
        "max_candidates": b.max_candidates,
        "max_degree": b.budget.max_degree,
        "max_basis": b.budget.max_basis,
        "max_pairs": b.budget.max_pairs,
    })
}

struct Context<'a> {
    spec: &'a ProblemSpec,
    table: Option<&'a ModularPolynomialTable>,
    names: Vec<String>,
    torus: bool,
}

impl<'a> Context<'a> {
    fn new(spec: &'a ProblemSpec, table: Option<&'a ModularPolynomialTable>) -> Res<Self> {
        Ok(Context { spec, table, names: default_names(spec.n), torus: spec.setting == Setting::Torus })
    }

    fn variety(&self) -> Res<PolynomialIdeal> {
        if self.spec.params > 0 {
            return Err(pre("this command takes a single variety; drop `family.params`"));
        }
        if self.spec.variety.is_empty() {
            return Err(pre("no `variety` generators given"));
        }
        Ok(PolynomialIdeal::new(self.spec.n, &self.spec.variety, self.torus).with_budget(self.spec.bounds.budget))
    }

    fn table(&self) -> &'a ModularPolynomialTable {
        self.table.expect("modular problems load the table")
    }

    fn torus_gamma(&self) -> Res<FiniteRankGroup> {
        let gens = if self.spec.gamma.is_empty() {
            vec![atypical::mult::MultiplicativePoint::identity(self.spec.n)]
        } else {
            self.spec.gamma.clone()
        };
        Ok(FiniteRankGroup::new(gens, self.spec.division_closed, self.spec.torsion_cap)?)
    }

    fn modular_gamma(&self) -> ModularGamma {
        ModularGamma {
            xi_nonspecial: self.spec.xi.clone(),
            include_all_special: self.spec.include_special,
            hecke_bound: self.spec.bounds.hecke_bound,
            disc_bound: self.spec.bounds.disc_bound,
        }
    }

    fn ambient(&self) -> Res<EngineAmbient<'a>> {
        let n = self.spec.n;
        Ok(match &self.spec.ambient {
            None if self.torus => EngineAmbient::Torus { s: TorusCoset::full(n), gamma: self.torus_gamma()? },
            None => EngineAmbient::Modular { table: self.table(), s: ModularWeaklySpecial::full(n), gamma: self.modular_gamma() },
            Some(Ambient::Torus(s)) => EngineAmbient::Torus { s: s.clone(), gamma: self.torus_gamma()? },
            Some(Ambient::Modular(s)) => {
                EngineAmbient::Modular { table: self.table(), s: s.clone(), gamma: self.modular_gamma() }
            }
        })
    }

    fn special(&self, v: &SpecialVariety) -> String {
        v.to_string_with(&self.names)
    }

    fn ideal_text(&self, i: &PolynomialIdeal) -> Res<String> {
        Ok(i.to_canonical_string_with(&self.names)?)
    }

    fn translate_text(&self, t: &[(usize, Rational)]) -> String {
        if self.torus {
            let coords: Vec<String> = t.iter().map(|(_, c)| c.to_string()).collect();
            format!("({})", coords.join(", "))
        } else {
            let parts: Vec<String> = t.iter().map(|(i, c)| format!("{} = {c}", self.names[*i])).collect();
            format!("[{}]", parts.join(", "))
        }
    }

    fn witness(&self, w: &Witness) -> Res<Value> {
        let (dx, dv, dw, ds) = w.dims;
        Ok(json!({
            "component": self.ideal_text(&w.component)?,
            "dimension": dx,
            "against": self.special(&w.against),
            "ambient": self.special(&w.ambient),
            "inequality": format!("{dx} > {dv} + {dw} - {ds}"),
            "ws_closure": self.special(&w.ws_closure),
            "defect": w.defect,
            "gamma_defect": w.gamma_defect,
            "translate": self.translate_text(&w.translate),
        }))
    }

    fn witnesses(&self, ws: &[Witness]) -> Res<Value> {
        Ok(Value::Array(ws.iter().map(|w| self.witness(w)).collect::<Res<_>>()?))
    }

    fn gamma_value(&self) -> Value {
        if self.torus {
            let gens: Vec<String> = self.spec.gamma.iter().map(|g| g.to_string()).collect();
            json!({ "generators": gens, "division_closed": self.spec.division_closed, "torsion_cap": self.spec.torsion_cap })
        } else {
            let xi: Vec<String> = self.spec.xi.iter().map(|q| q.to_string()).collect();
            json!({ "xi": xi, "include_special": self.spec.include_special })
        }
    }

    fn closure(&self) -> Res<Value> {
        let v = self.variety()?;
        let dx = v.dimension()?;
        if self.torus {
            let gamma = self.torus_gamma()?;
            let ws = weakly_special_closure(&v)?;
            let special = special_part(&ws, 2)?;
            let points = gamma.bounded_points(self.spec.bounds.gamma_word_bound);
            let gc = gamma_special_closure_torus(&ws, &gamma, &points)?;
            Ok(json!({
                "variety": self.ideal_text(&v)?,
                "dimension": dx,
                "ws_closure": ws.to_string_with(&self.names),
                "ws_dimension": ws.dimension(),
                "ws_closure_special": ws.is_special(),
                "ws_closure_gamma_special": is_gamma_special(&ws, &gamma),
                "special_closure": special.to_string_with(&self.names),
                "defect": special.dimension() - dx,
                "gamma": self.gamma_value(),
                "gamma_closure": gc.as_ref().map(|c| c.to_string_with(&self.names)),
                "gamma_defect": gc.map(|c| c.dimension() - dx),
            }))
        } else {
            let table = self.table();
            let gamma = self.modular_gamma();
            let ws = weakly_special_closure_modular(table, &v, self.spec.bounds.modular_complexity_bound)?;
            let special_only = ModularGamma { xi_nonspecial: Vec::new(), include_all_special: true, ..gamma.clone() };
            let special = gamma_special_closure(table, &ws, &special_only)?;
            let gc = gamma_special_closure(table, &ws, &gamma)?;
            Ok(json!({
                "variety": self.ideal_text(&v)?,
                "dimension": dx,
                "ws_closure": ws.to_string_with(&self.names),
                "ws_dimension": ws.dimension(),
                "ws_complexity": ws.complexity(),
                "ws_closure_special": ws.is_special(table, self.spec.bounds.disc_bound),
                "special_closure": special.to_string_with(&self.names),
                "defect": special.dimension() - dx,
                "gamma": self.gamma_value(),
                "gamma_closure": gc.to_string_with(&self.names),
                "gamma_defect": gc.dimension() - dx,
            }))
        }
    }

    fn atypical_locus(&self) -> Res<Value> {
        let v = self.variety()?;
        let (locus, base_names, projection) = if self.torus {
            if self.spec.subgroup.is_empty() {
                return Err(pre("`atypical-locus` in the torus needs `subgroup` rows"));
            }
            let s = match &self.spec.ambient {
                Some(Ambient::Torus(s)) => s.clone(),
                _ => TorusCoset::full(self.spec.n),
            };
            let t = ExponentLattice::new(self.spec.n, &self.spec.subgroup).saturation();
            let locus = atypical_coset_locus(&v, &t, &s)?;
            let monomials: Vec<String> =
                t.rows().iter().map(|m| TorusCoset::new(self.spec.n, std::slice::from_ref(m), &[atypical::mult::MultValue::one()]))
                    .map(|c| c.map(|c| c.to_string_with(&self.names)))
                    .collect::<Result<_, _>>()?;
            let names: Vec<String> = (1..=t.rank()).map(|i| format!("u{i}")).collect();
            (locus, names, json!({ "lattice": t.to_string(), "quotient_relations": monomials }))
        } else {
            if self.spec.projection.is_empty() {
                return Err(pre("`atypical-locus` in the modular setting needs `projection` coordinates"));
            }
            let s = match &self.spec.ambient {
                Some(Ambient::Modular(s)) => s.clone(),
                _ => ModularWeaklySpecial::full(self.spec.n),
            };
            let locus = atypical_fiber_locus_modular(&v, &s, &self.spec.projection)?;
            let names: Vec<String> = self.spec.projection.iter().map(|&i| self.names[i].clone()).collect();
            (locus, names.clone(), json!({ "coordinates": names }))
        };
        let pieces = locus
            .pieces
            .iter()
            .map(|p| {
                Ok(json!({
                    "closed": p.closed.to_canonical_string_with(&base_names)?,
                    "excluded": p.excluded.to_canonical_string_with(&base_names)?,
                    "dimension": p.dimension()?,
                }))
            })
            .collect::<Result<Vec<Value>, Error>>()?;
        Ok(json!({
            "variety": self.ideal_text(&v)?,
            "projection": projection,
            "base_dimension": locus.ambient_dim,
            "locus_dimension": locus.dimension()?,
            "exact": locus.exact,
            "pieces": pieces,
        }))
    }

    fn against_checks(&self, v: &PolynomialIdeal, ambient: &EngineAmbient<'_>, diagnostics: &mut Vec<String>) -> Res<Value> {
        let mut out = Vec::new();
        let ds = ambient.special().dimension();
        let dv = v.dimension()?;
        for a in &self.spec.against {
            let (t_ideal, t_text, t_dim, t_gamma) = match (a, ambient) {
                (Ambient::Torus(t), EngineAmbient::Torus { gamma, .. }) => {
                    (t.ideal()?, t.to_string_with(&self.names), t.dimension(), is_gamma_special(t, gamma))
                }
                (Ambient::Modular(t), EngineAmbient::Modular { table, gamma, .. }) => {
                    let mut ok = true;
                    for c in t.constants().values() {
                        ok &= gamma.admits(table, c)?;
                    }
                    (t.ideal(table)?, t.to_string_with(&self.names), t.dimension(), ok)
                }
                _ => unreachable!("spec parsing fixes the setting"),
            };
            let inter = v.sum(&t_ideal.with_budget(self.spec.bounds.budget));
            let mut comps = Vec::new();
            for x in intersection_components(&inter, diagnostics)? {
                let dx = x.dimension()?;
                let (ws, gs) = match ambient {
                    EngineAmbient::Torus { gamma, .. } => {
                        let c = weakly_special_closure(&x)?;
                        (c.to_string_with(&self.names), is_gamma_special(&c, gamma))
                    }
                    EngineAmbient::Modular { table, gamma, .. } => {
                        let c = weakly_special_closure_modular(table, &x, self.spec.bounds.modular_complexity_bound)?;
                        let mut ok = true;
                        for q in c.constants().values() {
                            ok &= gamma.admits(table, q)?;
                        }
                        (c.to_string_with(&self.names), ok)
                    }
                };
                comps.push(json!({
                    "component": self.ideal_text(&x)?,
                    "dimension": dx,
                    "atypical": dx > dv + t_dim - ds,
                    "inequality": format!("{dx} > {dv} + {t_dim} - {ds}"),
                    "ws_closure": ws,
                    "ws_closure_gamma_special": gs,
                }));
            }
            out.push(json!({ "special": t_text, "gamma_special": t_gamma, "components": comps }));
        }
        Ok(Value::Array(out))
    }

    fn run_value(&self, run: &EngineRun) -> Res<Value> {
        let sigma: Vec<String> = run.sigma.iter().map(|s| self.special(s)).collect();
        Ok(json!({ "witnesses": self.witnesses(&run.witnesses)?, "sigma": sigma }))
    }

    fn enumerate(&self, diagnostics: &mut Vec<String>) -> Res<Value> {
        let v = self.variety()?;
        let ambient = self.ambient()?;
        let run = maximal_gamma_atypical(&v, &ambient, &self.spec.bounds)?;
        diagnostics.extend(run.diagnostics.iter().cloned());
        let mut out = self.run_value(&run)?;
        out["ambient"] = json!(self.special(&ambient.special()));
        out["gamma"] = self.gamma_value();
        if !self.spec.against.is_empty() {
            out["intersections"] = self.against_checks(&v, &ambient, diagnostics)?;
        }
        Ok(out)
    }

    fn optimal(&self, diagnostics: &mut Vec<String>) -> Res<Value> {
        let v = self.variety()?;
        let ambient = self.ambient()?;
        let (cands, diag) = optimal_enumeration(&v, &ambient, &self.spec.bounds)?;
        diagnostics.extend(diag);
        let list = cands
            .iter()
            .map(|c| {
                Ok(json!({
                    "component": self.ideal_text(&c.component)?,
                    "dimension": c.dimension,
                    "ws_closure": self.special(&c.ws_closure),
                    "ws_closure_gamma_special": c.ws_closure_gamma_special,
                    "defect": c.defect,
                    "gamma_defect": c.gamma_defect,
                    "gamma_optimal": c.gamma_optimal,
                }))
            })
            .collect::<Res<Vec<Value>>>()?;
        let reported: Vec<Value> = cands
            .iter()
            .zip(&list)
            .filter(|(c, _)| c.gamma_optimal && c.ws_closure_gamma_special)
            .map(|(_, v)| v["component"].clone())
            .collect();
        Ok(json!({ "candidates": list, "optimal_with_gamma_special_closure": reported }))
    }

    fn family(&self, diagnostics: &mut Vec<String>) -> Res<Value> {
        let spec = self.spec;
        if spec.params == 0 {
            return Err(pre("`family` needs `family.params`"));
        }
        if spec.sample.is_empty() {
            return Err(pre("`family` needs at least one `family.sample`"));
        }
        let total = spec.n + spec.params;
        let generators = spec
            .variety
            .iter()
            .map(|g| if self.torus { g.to_polynomial() } else { g.to_affine_polynomial() })
            .inspect(|p| {
                debug_assert_eq!(p.nvars(), total);
            })
            .collect();
        let fam = ParametricFamily {
            ambient_dim: spec.n,
            params: spec.params,
            generators,
            domain: PolynomialIdeal::new(spec.params, &spec.domain, false),
            torus: self.torus,
        };
        let ambient = self.ambient()?;
        let rep = uniform_family_report(&fam, &ambient, &spec.bounds, &spec.sample)?;
        diagnostics.extend(rep.diagnostics.iter().cloned());
        let instances = rep
            .instances
            .iter()
            .map(|inst| {
                let q: Vec<String> = inst.parameter.iter().map(|c| c.to_string()).collect();
                let translates: Vec<Value> = inst
                    .translates
                    .iter()
                    .map(|(k, t)| json!({ "shape": *k, "translate": self.translate_text(t) }))
                    .collect();
                Ok(json!({
                    "parameter": format!("({})", q.join(", ")),
                    "witnesses": self.witnesses(&inst.witnesses)?,
                    "translates": translates,
                }))
            })
            .collect::<Res<Vec<Value>>>()?;
        let sigma: Vec<String> = rep.sigma.iter().map(|s| self.special(s)).collect();
        Ok(json!({ "setting": spec.setting.to_string(), "sigma": sigma, "m": rep.m, "instances": instances }))
    }

    fn oracle_check(&self, diagnostics: &mut Vec<String>) -> Res<Value> {
        let v = self.variety()?;
        let ambient = self.ambient()?;
        let engine = maximal_gamma_atypical(&v, &ambient, &self.spec.bounds)?;
        let oracle = brute_force_oracle(&v, &ambient, &self.spec.bounds)?;
        let key = |r: &EngineRun| -> BTreeSet<String> { r.witnesses.iter().map(|w| w.component_text.clone()).collect() };
        let agree = key(&engine) == key(&oracle);
        let extra: BTreeSet<String> =
            engine.diagnostics.iter().chain(&oracle.diagnostics).filter(|d| d.as_str() != KNOWN_GAP).cloned().collect();
        diagnostics.push(KNOWN_GAP.to_string());
        diagnostics.extend(extra);
        Ok(json!({
            "agree": agree,
            "engine": self.witnesses(&engine.witnesses)?,
            "oracle": self.witnesses(&oracle.witnesses)?,
        }))
    }
}
