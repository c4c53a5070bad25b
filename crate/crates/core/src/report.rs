//! Reports: statistics, requirement listings, verdicts and cross-check
//! summaries as serialisable values, with text and DOT renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dsl::{Diagnostic, Spec};
use crate::featured::{
    Evidence, FReq, FamilyAgreement, FeaturedResult, FeaturedStatus, FeaturedVerdict, ReqDiff, ReqKey,
};
use crate::logic::{FeatureExpr, Product, Universe};
use crate::model::{Component, StateId};
use crate::receptiveness::{Mode, ReqResult, Status, Verdict, Witness};
use crate::system::{ComponentSet, System, SystemLabel, SystemState};
use crate::team::{Commutation, Eta, Feta, PrunedView, Triple};

pub const SCHEMA_VERSION: &str = "report-v1";

/// The JSON schema of [`Report`].
pub const SCHEMA: &str = include_str!("../schema/report-v1.json");

/// A complete report of one command run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    /// Name of the analysed system; absent when the input did not
    /// elaborate.
    pub model: Option<String>,
    pub holds: bool,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub products: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requirements: Option<Vec<RequirementEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

impl Report {
    pub fn new(command: &str, model: Option<String>, diagnostics: Vec<Diagnostic>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            model,
            holds: true,
            diagnostics,
            products: None,
            stats: None,
            projection: None,
            requirements: None,
            verdict: None,
            verification: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Stats {
    pub components: usize,
    pub features: usize,
    pub products: usize,
    pub states: usize,
    pub transitions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reachable_states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reachable_transitions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionEntry {
    pub source: String,
    pub senders: Vec<String>,
    pub action: String,
    pub receivers: Vec<String>,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub product: Vec<String>,
    pub commutes: bool,
    pub states: usize,
    pub transitions: usize,
    pub only_in_family: Vec<TransitionEntry>,
    pub only_in_product: Vec<TransitionEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Factors {
    pub senders_enabled: String,
    pub synchronisation: String,
    pub reachability: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RequirementEntry {
    pub state: String,
    pub senders: Vec<String>,
    pub action: String,
    /// Application condition of a featured requirement.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Factors>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessEntry {
    /// The product the witness belongs to, for per-product evidence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<Vec<String>>,
    pub path: Vec<TransitionEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultEntry {
    pub requirement: RequirementEntry,
    pub status: Status,
    pub witnesses: Vec<WitnessEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub mode: Mode,
    /// Set for the verdict of a single product team.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<Vec<String>>,
    pub holds: bool,
    pub total: usize,
    pub violations: usize,
    pub results: Vec<ResultEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
    pub queries: usize,
    pub backend_mismatches: usize,
}

/// Naming of states, component sets and products for one system.
pub struct Names<'a, C> {
    pub sys: &'a System<C>,
    pub universe: &'a Universe,
    pub products: &'a [Product],
    pub fm: &'a FeatureExpr,
}

impl<'a, C: Component> Names<'a, C> {
    pub fn state(&self, q: &SystemState) -> String {
        self.sys.display_state(q)
    }

    pub fn set(&self, set: ComponentSet) -> Vec<String> {
        set.iter().map(|i| self.sys.names()[i].clone()).collect()
    }

    pub fn product(&self, p: Product) -> Vec<String> {
        self.universe.selected(p).map(|f| f.to_string()).collect()
    }

    /// A short equivalent of `expr` relative to the feature model: `fm`'s
    /// own text when every valid product satisfies it, `false` when none
    /// does, and otherwise the characteristic formula of the satisfying
    /// products.
    pub fn simplify(&self, expr: &FeatureExpr) -> String {
        let models: Vec<Product> = self.products.iter().copied().filter(|&p| self.universe.holds(expr, p)).collect();
        if models.is_empty() {
            "false".into()
        } else if models.len() == self.products.len() {
            self.fm.to_string()
        } else {
            self.universe.chi_set(&models).to_string()
        }
    }

    pub fn transition(&self, (s, l, t): &Triple, constraint: Option<String>) -> TransitionEntry {
        TransitionEntry {
            source: self.state(s),
            senders: self.set(l.senders),
            action: l.action.to_string(),
            receivers: self.set(l.receivers),
            target: self.state(t),
            constraint,
        }
    }

    pub fn edge(&self, lts: &Eta, e: usize) -> TransitionEntry {
        let edge = lts.edge(e);
        let triple = (lts.state(edge.source).clone(), edge.label.clone(), lts.state(edge.target).clone());
        self.transition(&triple, None)
    }

    fn witness(&self, lts: &Eta, w: &Witness, product: Option<Product>) -> WitnessEntry {
        let path = w.prefix.iter().chain(std::iter::once(&w.step)).map(|&e| self.edge(lts, e)).collect();
        WitnessEntry { product: product.map(|p| self.product(p)), path }
    }

    pub fn req_key(&self, (q, senders, a): &ReqKey) -> RequirementEntry {
        RequirementEntry {
            state: self.state(q),
            senders: self.set(*senders),
            action: a.to_string(),
            condition: None,
            factors: None,
        }
    }

    pub fn freq(&self, lts: &Eta, f: &FReq, raw: bool, factors: bool) -> RequirementEntry {
        let show = |e: &FeatureExpr| if raw { e.to_string() } else { self.simplify(e) };
        RequirementEntry {
            state: self.state(lts.state(f.state)),
            senders: self.set(f.senders),
            action: f.action.to_string(),
            condition: Some(show(&f.psi)),
            factors: factors.then(|| Factors {
                senders_enabled: show(&f.fe),
                synchronisation: show(&f.chi_sync),
                reachability: show(&f.chi_reach),
            }),
        }
    }

    pub fn product_verdict(&self, eta: &Eta, v: &Verdict, product: Option<Product>) -> VerdictReport {
        let results: Vec<ResultEntry> = v.results.iter().map(|r| self.req_result(eta, r)).collect();
        VerdictReport {
            mode: v.mode,
            product: product.map(|p| self.product(p)),
            holds: v.holds(),
            total: results.len(),
            violations: v.violations().count(),
            results,
        }
    }

    fn req_result(&self, eta: &Eta, r: &ReqResult) -> ResultEntry {
        let key = (eta.state(r.req.state).clone(), r.req.senders, r.req.action.clone());
        ResultEntry {
            requirement: self.req_key(&key),
            status: r.status,
            witnesses: r.witness.iter().map(|w| self.witness(eta, w, None)).collect(),
            counterexample: None,
        }
    }

    pub fn featured_verdict(&self, feta: &Feta, v: &FeaturedVerdict, raw: bool) -> VerdictReport {
        let results: Vec<ResultEntry> = v.results.iter().map(|r| self.featured_result(feta, r, raw)).collect();
        VerdictReport {
            mode: v.mode,
            product: None,
            holds: v.holds(),
            total: results.len(),
            violations: v.violations().count(),
            results,
        }
    }

    fn featured_result(&self, feta: &Feta, r: &FeaturedResult, raw: bool) -> ResultEntry {
        let lts = feta.lts();
        let witnesses = match &r.evidence {
            Evidence::Symbolic { candidates, .. } if r.status != FeaturedStatus::Violated => candidates
                .iter()
                .filter(|&&e| {
                    self.products.iter().any(|&p| self.universe.holds(&r.freq.psi, p) && feta.realisable(e, p))
                })
                .map(|&e| WitnessEntry {
                    product: None,
                    path: vec![self.transition(&feta.triple(e), Some(self.simplify(feta.gamma(e))))],
                })
                .collect(),
            Evidence::Symbolic { .. } => Vec::new(),
            Evidence::PerProduct(paths) => paths.iter().map(|(&p, w)| self.witness(lts, w, Some(p))).collect(),
        };
        ResultEntry {
            requirement: self.freq(lts, &r.freq, raw, false),
            status: match r.status {
                FeaturedStatus::Compliant => Status::Compliant,
                FeaturedStatus::WeaklyCompliant => Status::WeaklyCompliant,
                FeaturedStatus::Violated => Status::Violated,
            },
            witnesses,
            counterexample: r.counterexample.map(|p| self.product(p)),
        }
    }

    pub fn projection(&self, c: &Commutation, projected: &Eta) -> ProjectionReport {
        ProjectionReport {
            product: self.product(c.product),
            commutes: c.holds(),
            states: projected.num_states(),
            transitions: projected.edges().len(),
            only_in_family: c.only_in_family.iter().map(|t| self.transition(t, None)).collect(),
            only_in_product: c.only_in_product.iter().map(|t| self.transition(t, None)).collect(),
        }
    }

    pub fn req_diff(&self, d: &ReqDiff) -> String {
        let show =
            |keys: &[ReqKey]| keys.iter().map(|k| requirement_line(&self.req_key(k))).collect::<Vec<_>>().join("; ");
        format!(
            "product {}: only featured [{}], only product [{}]",
            self.universe.display_product(d.product),
            show(&d.only_featured),
            show(&d.only_product)
        )
    }

    pub fn agreement(&self, a: &FamilyAgreement) -> CheckOutcome {
        let per: Vec<String> =
            a.per_product.iter().map(|&(p, ok)| format!("{}={}", self.universe.display_product(p), ok)).collect();
        let mut detail = format!("family {} / products {}", a.featured, per.join(", "));
        if let Some((p, key)) = &a.counterexample {
            let _ = write!(
                detail,
                "; counterexample {} at {}",
                self.universe.display_product(*p),
                requirement_line(&self.req_key(key))
            );
        }
        CheckOutcome { name: format!("family-receptiveness-{}", a.mode), holds: a.holds(), detail }
    }
}

pub fn stats(spec: &Spec, feta: Option<(&Feta, &PrunedView)>, states: usize, transitions: usize) -> Stats {
    Stats {
        components: spec.system.len(),
        features: spec.universe().len(),
        products: spec.products.len(),
        states,
        transitions,
        reachable_states: feta.map(|(_, v)| v.states.len()),
        reachable_transitions: feta.map(|(_, v)| v.edges.len()),
    }
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(","))
}

pub fn label_line(t: &TransitionEntry) -> String {
    format!("{} {} {}", braces(&t.senders), t.action, braces(&t.receivers))
}

pub fn transition_line(t: &TransitionEntry) -> String {
    let mut s = String::new();
    if let Some(c) = &t.constraint {
        let _ = write!(s, "[{c}] ");
    }
    let _ = write!(s, "({}) {} ({})", t.source, label_line(t), t.target);
    s
}

pub fn requirement_line(r: &RequirementEntry) -> String {
    let mut s = String::new();
    if let Some(c) = &r.condition {
        let _ = write!(s, "[{c}] ");
    }
    let _ = write!(s, "rcp({}, {}) @ ({})", braces(&r.senders), r.action, r.state);
    s
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Compliant => "compliant",
        Status::WeaklyCompliant => "weakly compliant",
        Status::Violated => "VIOLATED",
    }
}

/// Human-readable rendering.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    if let Some(ps) = &r.products {
        let _ = writeln!(out, "{} valid product(s):", ps.len());
        for p in ps {
            let _ = writeln!(out, "  {}", braces(p));
        }
    }
    if let Some(s) = &r.stats {
        let _ = writeln!(out, "components: {}", s.components);
        let _ = writeln!(out, "features: {}", s.features);
        let _ = writeln!(out, "products: {}", s.products);
        let _ = writeln!(out, "states: {}", s.states);
        let _ = writeln!(out, "transitions: {}", s.transitions);
        if let (Some(q), Some(t)) = (s.reachable_states, s.reachable_transitions) {
            let _ = writeln!(out, "reachable realisable core: {q} states, {t} transitions");
        }
    }
    if let Some(p) = &r.projection {
        let _ = writeln!(
            out,
            "projection onto {}: {} states, {} transitions; {}",
            braces(&p.product),
            p.states,
            p.transitions,
            if p.commutes { "commutes with the product team" } else { "DOES NOT commute with the product team" }
        );
        for t in &p.only_in_family {
            let _ = writeln!(out, "  only in projected family team: {}", transition_line(t));
        }
        for t in &p.only_in_product {
            let _ = writeln!(out, "  only in product team: {}", transition_line(t));
        }
    }
    if let Some(reqs) = &r.requirements {
        let mut current: Option<&str> = None;
        for req in reqs {
            if current != Some(req.state.as_str()) {
                let _ = writeln!(out, "({})", req.state);
                current = Some(&req.state);
            }
            let _ = writeln!(out, "  {}", requirement_line(req));
            if let Some(f) = &req.factors {
                let _ = writeln!(out, "      senders enabled: {}", f.senders_enabled);
                let _ = writeln!(out, "      synchronisation: {}", f.synchronisation);
                let _ = writeln!(out, "      reachability:    {}", f.reachability);
            }
        }
        if reqs.is_empty() {
            let _ = writeln!(out, "no requirements");
        }
    }
    if let Some(v) = &r.verdict {
        for res in &v.results {
            let _ = writeln!(out, "{}: {}", requirement_line(&res.requirement), status_word(res.status));
            if let Some(p) = &res.counterexample {
                let _ = writeln!(out, "    counterexample product: {}", braces(p));
            }
            if res.status == Status::WeaklyCompliant {
                for w in &res.witnesses {
                    let via = w.path.iter().map(transition_line).collect::<Vec<_>>().join(" ; ");
                    match &w.product {
                        Some(p) => {
                            let _ = writeln!(out, "    {}: {via}", braces(p));
                        }
                        None => {
                            let _ = writeln!(out, "    {via}");
                        }
                    }
                }
            }
        }
        let _ = writeln!(out, "{} requirement(s), {} violation(s)", v.total, v.violations);
        let _ = writeln!(out, "{}", verdict_sentence(v));
    }
    if let Some(v) = &r.verification {
        for c in &v.checks {
            let _ = writeln!(out, "{}: {} ({})", c.name, if c.holds { "ok" } else { "FAILED" }, c.detail);
        }
        let _ = writeln!(out, "solver queries: {}, backend mismatches: {}", v.queries, v.backend_mismatches);
    }
    out
}

/// The one-line conclusion of a verdict, e.g. `featured weakly receptive`.
pub fn verdict_sentence(v: &VerdictReport) -> String {
    let subject = match &v.product {
        Some(p) => format!("product {}", braces(p)),
        None => "family".into(),
    };
    let property = match (v.product.is_some(), v.mode) {
        (false, Mode::Strict) => "featured receptive",
        (false, Mode::Weak) => "featured weakly receptive",
        (true, Mode::Strict) => "receptive",
        (true, Mode::Weak) => "weakly receptive",
    };
    if v.holds {
        format!("{subject}: {property}")
    } else {
        format!("{subject}: not {property}")
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// A node of a DOT rendering with the transitions leaving it.
pub struct DotGraph {
    pub name: String,
    pub states: Vec<String>,
    pub initial: Vec<String>,
    /// `(source, label, target)`.
    pub edges: Vec<(String, String, String)>,
    /// `(state, text)` notes attached to states.
    pub notes: Vec<(String, String)>,
}

impl DotGraph {
    /// Renders with states and edges in lexicographic order.
    pub fn render(mut self) -> String {
        self.states.sort();
        self.states.dedup();
        self.initial.sort();
        self.edges.sort();
        self.notes.sort();
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", quote(&self.name));
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  node [shape=ellipse];");
        for s in &self.states {
            let _ = writeln!(out, "  {};", quote(s));
        }
        for (i, s) in self.initial.iter().enumerate() {
            let _ = writeln!(out, "  __init{i} [shape=point, label=\"\"];");
            let _ = writeln!(out, "  __init{i} -> {};", quote(s));
        }
        for (s, l, t) in &self.edges {
            let _ = writeln!(out, "  {} -> {} [label={}];", quote(s), quote(t), quote(l));
        }
        for (i, (s, text)) in self.notes.iter().enumerate() {
            let _ = writeln!(out, "  __note{i} [shape=note, style=dashed, label={}];", quote(text));
            let _ = writeln!(out, "  __note{i} -> {} [style=dashed, arrowhead=none];", quote(s));
        }
        out.push_str("}\n");
        out
    }
}

/// DOT of a featured team restricted to `states` and `edges`, with edge
/// labels `[γ] {S} a {R}`.
pub fn feta_dot<C: Component>(
    names: &Names<'_, C>,
    feta: &Feta,
    states: &[StateId],
    edges: &[usize],
    raw: bool,
    notes: &[FReq],
) -> String {
    let lts = feta.lts();
    let state = |q: StateId| names.state(lts.state(q));
    let edges = edges
        .iter()
        .map(|&e| {
            let edge = lts.edge(e);
            let g = if raw { feta.gamma(e).to_string() } else { names.simplify(feta.gamma(e)) };
            (state(edge.source), format!("[{g}] {}", names.sys.display_label(&edge.label)), state(edge.target))
        })
        .collect();
    let notes = notes
        .iter()
        .filter(|f| states.contains(&f.state))
        .map(|f| {
            let entry = names.freq(lts, f, raw, false);
            (entry.state.clone(), requirement_line(&entry))
        })
        .collect();
    DotGraph {
        name: "feta".into(),
        states: states.iter().map(|&q| state(q)).collect(),
        initial: lts.initial().iter().map(|&q| state(q)).collect(),
        edges,
        notes,
    }
    .render()
}

/// DOT of a plain team automaton, showing its reachable part.
pub fn eta_dot<C: Component>(names: &Names<'_, C>, eta: &Eta) -> String {
    let reachable = eta.reachable();
    let mask = eta.reach_mask(|_| true);
    let state = |q: StateId| names.state(eta.state(q));
    DotGraph {
        name: "eta".into(),
        states: reachable.iter().map(|&q| state(q)).collect(),
        initial: eta.initial().iter().map(|&q| state(q)).collect(),
        edges: eta
            .edges()
            .iter()
            .filter(|e| mask[e.source])
            .map(|e| (state(e.source), label_text(names, &e.label), state(e.target)))
            .collect(),
        notes: Vec::new(),
    }
    .render()
}

fn label_text<C: Component>(names: &Names<'_, C>, l: &SystemLabel) -> String {
    names.sys.display_label(l)
}
