//! Checking a parsed document and building the featured system and
//! synchronisation specification it describes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::logic::{Backend, FeatureExpr, FeatureModel, Logic, Product, Universe};
use crate::model::{Action, Fca, FcaBuilder};
use crate::sync::{ActionSelector, Bound, FeaturedSyncSpec, Interval, SyncRule, SyncType};
use crate::syntax::Pos;
use crate::system::{FeaturedSystem, Limits, System};

use super::{ComponentDecl, Diagnostic, Direction, IntervalDecl, Located, SpecDocument};

#[derive(Debug, Clone, Copy, Default)]
pub struct ElaborateOptions {
    pub backend: Backend,
    pub limits: Limits,
    /// Reject rule lists in which two rules of differing types match the
    /// same action and product.
    pub strict: bool,
}

/// A checked specification.
#[derive(Debug, Clone)]
pub struct Spec {
    pub name: String,
    pub system: FeaturedSystem,
    pub sync: FeaturedSyncSpec,
    pub logic: Logic,
    /// Valid products in product order.
    pub products: Vec<Product>,
    pub warnings: Vec<Diagnostic>,
}

impl Spec {
    pub fn feature_model(&self) -> &Arc<FeatureModel> {
        self.system.feature_model()
    }

    pub fn universe(&self) -> &Universe {
        self.feature_model().universe()
    }
}

struct Ctx {
    diags: Vec<Diagnostic>,
}

impl Ctx {
    fn error(&mut self, pos: Pos, code: &'static str, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(pos, code, message));
    }

    fn warning(&mut self, pos: Pos, code: &'static str, message: impl Into<String>) {
        self.diags.push(Diagnostic::warning(pos, code, message));
    }

    fn failed(&self) -> bool {
        self.diags.iter().any(Diagnostic::is_fatal)
    }

    fn check_expr(&mut self, universe: &Universe, e: &Located<FeatureExpr>) -> bool {
        let mut ok = true;
        for f in e.value.variables() {
            if universe.index_of(f.as_str()).is_none() {
                self.error(e.pos, "undeclared", format!("undeclared feature `{f}`"));
                ok = false;
            }
        }
        ok
    }
}

/// Elaborates a parsed document. On success the returned [`Spec`] carries
/// any warnings; otherwise all diagnostics found are returned.
pub fn elaborate(doc: &SpecDocument, options: &ElaborateOptions) -> Result<Spec, Vec<Diagnostic>> {
    let mut cx = Ctx { diags: Vec::new() };

    let mut names: Vec<&str> = Vec::new();
    for f in &doc.features {
        if names.contains(&f.value.as_str()) {
            cx.error(f.pos, "duplicate", format!("duplicate feature `{}`", f.value));
        } else {
            names.push(&f.value);
        }
    }
    let universe = match Universe::new(names) {
        Ok(u) => u,
        Err(e) => {
            let pos = doc.features.first().map(|f| f.pos).unwrap_or_default();
            cx.error(pos, "model", e.to_string());
            return Err(cx.diags);
        }
    };
    let Some(fm_decl) = &doc.feature_model else {
        cx.error(Pos::default(), "missing-section", "missing feature model");
        return Err(cx.diags);
    };
    if !cx.check_expr(&universe, fm_decl) {
        return Err(cx.diags);
    }
    let model = Arc::new(FeatureModel::new(universe.clone(), fm_decl.value.clone()).expect("checked"));
    let logic = Logic::new(universe.clone(), options.backend);

    let mut types: BTreeMap<&str, Fca> = BTreeMap::new();
    for decl in &doc.components {
        if types.contains_key(decl.name.value.as_str()) {
            cx.error(decl.name.pos, "duplicate", format!("duplicate component `{}`", decl.name.value));
            continue;
        }
        if let Some(fca) = component(&mut cx, &universe, &model, decl) {
            types.insert(&decl.name.value, fca);
        }
    }

    let Some(sys_decl) = &doc.system else {
        cx.error(Pos::default(), "missing-section", "missing system declaration");
        return Err(cx.diags);
    };
    let mut members = Vec::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for (inst, kind) in &sys_decl.members {
        if !seen.insert(&inst.value) {
            cx.error(inst.pos, "duplicate", format!("duplicate component instance `{}`", inst.value));
        }
        match types.get(kind.value.as_str()) {
            Some(fca) => members.push((inst.value.clone(), fca.clone())),
            None if doc.components.iter().any(|c| c.name.value == kind.value) => {}
            None => cx.error(kind.pos, "undeclared", format!("undeclared component `{}`", kind.value)),
        }
    }
    if sys_decl.members.is_empty() {
        cx.error(sys_decl.name.pos, "model", "a system needs at least one component");
    }
    if cx.failed() {
        return Err(cx.diags);
    }
    let system = match System::new(members) {
        Ok(s) => s,
        Err(e) => {
            cx.error(sys_decl.name.pos, "model", e.to_string());
            return Err(cx.diags);
        }
    };
    for open in system.open_actions() {
        cx.warning(sys_decl.name.pos, "open-system", format!("system is open: {open}"));
    }

    let Some(sync_decl) = &doc.sync else {
        cx.error(Pos::default(), "missing-section", "missing sync block");
        return Err(cx.diags);
    };
    let mut rules = Vec::new();
    for r in &sync_decl.rules {
        let actions = match &r.actions {
            None => ActionSelector::All,
            Some(list) => {
                let mut set = BTreeSet::new();
                for a in list {
                    let action = Action::new(&a.value);
                    if !system.actions().contains(&action) {
                        cx.error(a.pos, "undeclared", format!("action `{}` is not in the system alphabet", a.value));
                    }
                    set.insert(action);
                }
                ActionSelector::Only(set)
            }
        };
        let senders = interval(&mut cx, &r.senders);
        let receivers = interval(&mut cx, &r.receivers);
        let guard = match &r.guard {
            Some(g) if cx.check_expr(&universe, g) => g.value.clone(),
            Some(_) => continue,
            None => FeatureExpr::True,
        };
        if let (Some(s), Some(rc)) = (senders, receivers) {
            rules.push(SyncRule { guard, actions, sync: SyncType::new(s, rc) });
        }
    }
    if cx.failed() {
        return Err(cx.diags);
    }
    let sync = FeaturedSyncSpec::new(rules, model.clone(), system.actions().clone()).expect("rules checked");

    let products = match logic.valid_products(&model, options.limits.max_products) {
        Ok(ps) => ps,
        Err(e) => {
            cx.error(fm_decl.pos, "model", e.to_string());
            return Err(cx.diags);
        }
    };
    if products.is_empty() {
        cx.warning(fm_decl.pos, "no-products", "feature model has no valid products");
    }
    for (p, a) in sync.missing(&products) {
        cx.error(
            sync_decl.pos,
            "not-total",
            format!("no synchronisation rule covers `{a}` for product {}", universe.display_product(p)),
        );
    }
    if options.strict {
        for overlap in sync.overlaps(&products) {
            cx.error(sync_decl.pos, "overlap", overlap.to_string());
        }
    }
    if cx.failed() {
        return Err(cx.diags);
    }
    Ok(Spec { name: sys_decl.name.value.clone(), system, sync, logic, products, warnings: cx.diags })
}

fn interval(cx: &mut Ctx, decl: &Located<IntervalDecl>) -> Option<Interval> {
    let max = decl.value.max.map_or(Bound::Unbounded, Bound::Finite);
    match Interval::new(decl.value.min, max) {
        Ok(i) => Some(i),
        Err(e) => {
            cx.error(decl.pos, "interval", e.to_string());
            None
        }
    }
}

fn component(cx: &mut Ctx, universe: &Universe, model: &Arc<FeatureModel>, decl: &ComponentDecl) -> Option<Fca> {
    let before = cx.diags.len();
    let name = &decl.name.value;
    let mut b = FcaBuilder::new(name.clone(), model.clone());
    let mut dirs: BTreeMap<&str, Direction> = BTreeMap::new();
    for (list, dir) in [(&decl.inputs, Direction::Input), (&decl.outputs, Direction::Output)] {
        for a in list {
            match dirs.insert(&a.value, dir) {
                Some(prev) if prev != dir => cx.error(
                    a.pos,
                    "duplicate",
                    format!("action `{}` is declared both as input and as output in `{name}`", a.value),
                ),
                Some(_) => cx.error(a.pos, "duplicate", format!("action `{}` declared twice in `{name}`", a.value)),
                None => {}
            }
            b = match dir {
                Direction::Input => b.input(&a.value),
                Direction::Output => b.output(&a.value),
            };
        }
    }
    let explicit = !decl.states.is_empty();
    for s in &decl.states {
        b = b.state(&s.value);
    }
    let known = |s: &str| !explicit || decl.states.iter().any(|x| x.value == s);
    for s in &decl.initial {
        if !known(&s.value) {
            cx.error(s.pos, "undeclared", format!("undeclared state `{}` in `{name}`", s.value));
        }
        b = b.initial(&s.value);
    }
    if decl.initial.is_empty() {
        cx.warning(decl.name.pos, "no-initial", format!("component `{name}` has no initial state"));
    }
    let mut edges = BTreeSet::new();
    for t in &decl.transitions {
        for s in [&t.source, &t.target] {
            if !known(&s.value) {
                cx.error(s.pos, "undeclared", format!("undeclared state `{}` in `{name}`", s.value));
            }
        }
        match (dirs.get(t.action.value.as_str()), t.direction) {
            (None, _) => {
                cx.error(t.action.pos, "undeclared", format!("action `{}` is not declared in `{name}`", t.action.value))
            }
            (Some(d), Some(used)) if *d != used => {
                let (wrote, declared) = match used {
                    Direction::Output => ("!", "an input"),
                    Direction::Input => ("?", "an output"),
                };
                cx.error(
                    t.action.pos,
                    "direction",
                    format!("`{}{wrote}` used but `{}` is {declared} of `{name}`", t.action.value, t.action.value),
                );
            }
            _ => {}
        }
        if !edges.insert((&t.source.value, &t.action.value, &t.target.value)) {
            cx.error(
                t.source.pos,
                "duplicate",
                format!("duplicate transition {} -> {} by {}", t.source.value, t.target.value, t.action.value),
            );
        }
        let guard = match &t.guard {
            Some(g) => {
                cx.check_expr(universe, g);
                g.value.clone()
            }
            None => FeatureExpr::True,
        };
        b = b.transition(&t.source.value, &t.action.value, &t.target.value, guard);
    }
    if cx.diags[before..].iter().any(Diagnostic::is_fatal) {
        return None;
    }
    match b.build() {
        Ok(fca) => Some(fca),
        Err(e) => {
            cx.error(decl.name.pos, "model", e.to_string());
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::dsl::parse;

    fn check(text: &str) -> Result<Spec, Vec<Diagnostic>> {
        elaborate(&parse(text)?, &ElaborateOptions::default())
    }

    fn codes(text: &str) -> Vec<&'static str> {
        check(text).unwrap_err().iter().filter(|d| d.is_fatal()).map(|d| d.code).collect()
    }

    const HEAD: &str = "features a; feature_model true;";

    #[test]
    fn running_example_elaborates_cleanly() {
        let spec = check(corpus::ACCESS_MANAGEMENT).unwrap();
        assert!(spec.warnings.is_empty(), "{:?}", spec.warnings);
        assert_eq!(spec.products.len(), 2);
        assert_eq!(spec.system.names(), ["u1", "u2", "s"]);
    }

    #[test]
    fn undeclared_features_are_reported() {
        let text = "features a; feature_model a && b; component C { output x; init 0; } \
                    system S = { c: C }; sync { default [1,1] -> [0,0]; }";
        assert_eq!(codes(text), ["undeclared"]);
        let text = format!("{HEAD} component C {{ output x; init 0; 0 -> 0 by x when z; }} system S = {{ c: C }}; sync {{ default [1,1] -> [0,0]; }}");
        assert_eq!(codes(&text), ["undeclared"]);
    }

    #[test]
    fn suffix_must_match_declaration() {
        let text = format!("{HEAD} component C {{ input x; init 0; 0 -> 0 by x!; }} system S = {{ c: C }}; sync {{ default [1,1] -> [1,1]; }}");
        assert_eq!(codes(&text), ["direction"]);
    }

    #[test]
    fn unknown_actions_are_reported() {
        let text = format!("{HEAD} component C {{ output x; init 0; 0 -> 0 by y; }} system S = {{ c: C }}; sync {{ default [1,1] -> [1,1]; }}");
        assert_eq!(codes(&text), ["undeclared"]);
        let text = format!("{HEAD} component C {{ output x; init 0; }} system S = {{ c: C }}; sync {{ y: [1,1] -> [1,1]; default [1,1] -> [0,0]; }}");
        assert_eq!(codes(&text), ["undeclared"]);
    }

    #[test]
    fn totality_violations_are_fatal() {
        let text = "features a; feature_model true; component C { output x; init 0; } \
                    system S = { c: C }; sync { x: [1,1] -> [0,0] when a; }";
        let diags = check(text).unwrap_err();
        let fatal: Vec<_> = diags.iter().filter(|d| d.is_fatal()).collect();
        assert_eq!(fatal.len(), 1);
        assert_eq!(fatal[0].code, "not-total");
        assert!(fatal[0].message.contains("{}"));
    }

    #[test]
    fn open_systems_and_empty_models_warn() {
        let text = "features a; feature_model a && !a; component C { output x; init 0; } \
                    system S = { c: C }; sync { default [1,1] -> [0,0]; }";
        let spec = check(text).unwrap();
        let codes: Vec<_> = spec.warnings.iter().map(|d| d.code).collect();
        assert_eq!(codes, ["open-system", "no-products"]);
    }

    #[test]
    fn strict_mode_rejects_overlaps() {
        let text = "features a; feature_model true; component C { output x; input y; init 0; } \
                    system S = { c: C }; sync { x: [1,1] -> [0,0]; default [1,*] -> [0,*]; }";
        assert!(check(text).unwrap().warnings.iter().all(|d| d.code != "overlap"));
        let strict = ElaborateOptions { strict: true, ..Default::default() };
        let diags = elaborate(&parse(text).unwrap(), &strict).unwrap_err();
        assert!(diags.iter().any(|d| d.is_fatal() && d.code == "overlap"));
    }

    #[test]
    fn undeclared_states_with_explicit_state_list() {
        let text = format!("{HEAD} component C {{ output x; states 0; init 0; 0 -> 1 by x; }} system S = {{ c: C }}; sync {{ default [1,1] -> [0,0]; }}");
        assert_eq!(codes(&text), ["undeclared"]);
    }

    #[test]
    fn unknown_component_type() {
        let text = format!("{HEAD} system S = {{ c: Missing }}; sync {{ default [1,1] -> [0,0]; }}");
        assert_eq!(codes(&text), ["undeclared"]);
    }
}
