//! Labelled and featured transition systems, and the (featured) component
//! automata built from them.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::logic::{FeatureExpr, FeatureModel, LogicError, Product};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(StateId),
    #[error("action `{0}` is not in the alphabet")]
    UnknownAction(String),
    #[error("action `{0}` is declared both as input and as output")]
    OverlappingAlphabets(String),
    #[error("duplicate transition {0}")]
    DuplicateTransition(String),
    #[error("expected {expected} transition guards, got {got}")]
    GuardCount { expected: usize, got: usize },
    #[error("product {0} is not valid for the feature model")]
    InvalidProduct(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// An action name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(Arc<str>);

impl Action {
    pub fn new(name: &str) -> Self {
        Action(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Action {
    fn from(name: &str) -> Self {
        Action::new(name)
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

/// Transition labels carry an action.
pub trait Label: Clone + fmt::Debug {
    fn action(&self) -> &Action;
}

impl Label for Action {
    fn action(&self) -> &Action {
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge<L> {
    pub source: StateId,
    pub label: L,
    pub target: StateId,
}

/// A labelled transition system `(Q, I, Σ, E)` with states addressed by
/// index and identified externally by their value.
#[derive(Debug, Clone)]
pub struct Lts<S, L> {
    states: Vec<S>,
    index: HashMap<S, StateId>,
    initial: Vec<StateId>,
    actions: BTreeSet<Action>,
    edges: Vec<Edge<L>>,
    outgoing: Vec<Vec<usize>>,
}

impl<S, L> Lts<S, L>
where
    S: Clone + Eq + Hash + fmt::Debug,
    L: Label,
{
    pub fn new(
        states: Vec<S>,
        initial: Vec<StateId>,
        actions: BTreeSet<Action>,
        edges: Vec<Edge<L>>,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(format!("{s:?}")));
            }
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        if let Some(&bad) = initial.iter().find(|&&q| q >= states.len()) {
            return Err(ModelError::StateOutOfRange(bad));
        }
        let mut outgoing = vec![Vec::new(); states.len()];
        for (i, e) in edges.iter().enumerate() {
            for q in [e.source, e.target] {
                if q >= states.len() {
                    return Err(ModelError::StateOutOfRange(q));
                }
            }
            if !actions.contains(e.label.action()) {
                return Err(ModelError::UnknownAction(e.label.action().to_string()));
            }
            outgoing[e.source].push(i);
        }
        Ok(Lts { states, index, initial, actions, edges, outgoing })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn state(&self, q: StateId) -> &S {
        &self.states[q]
    }

    pub fn id_of(&self, s: &S) -> Option<StateId> {
        self.index.get(s).copied()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn actions(&self) -> &BTreeSet<Action> {
        &self.actions
    }

    pub fn edges(&self) -> &[Edge<L>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge<L> {
        &self.edges[e]
    }

    /// Indices of the edges leaving `q`.
    pub fn outgoing(&self, q: StateId) -> &[usize] {
        &self.outgoing[q]
    }

    /// Some transition from `q` carries action `a`.
    pub fn enabled(&self, q: StateId, a: &Action) -> bool {
        self.outgoing[q].iter().any(|&e| self.edges[e].label.action() == a)
    }

    /// States reachable from the initial states using only the edges
    /// accepted by `allow`, as a membership mask.
    pub fn reach_mask(&self, allow: impl Fn(usize) -> bool) -> Vec<bool> {
        self.reach_mask_from(&self.initial, allow)
    }

    pub fn reach_mask_from(&self, start: &[StateId], allow: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::new();
        for &q in start {
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &e in &self.outgoing[q] {
                let t = self.edges[e].target;
                if !seen[t] && allow(e) {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Reachable states in index order.
    pub fn reachable(&self) -> Vec<StateId> {
        let mask = self.reach_mask(|_| true);
        (0..self.states.len()).filter(|&q| mask[q]).collect()
    }

    /// Same states, initial states and alphabet; only the edges accepted by
    /// `keep`.
    pub fn retain_edges(&self, keep: impl Fn(usize, &Edge<L>) -> bool) -> Self {
        let edges: Vec<Edge<L>> =
            self.edges.iter().enumerate().filter(|(i, e)| keep(*i, e)).map(|(_, e)| e.clone()).collect();
        Lts::new(self.states.clone(), self.initial.clone(), self.actions.clone(), edges)
            .expect("subset of a well-formed transition system")
    }
}

/// A featured transition system: an [`Lts`] plus a guard per transition
/// over a shared feature model.
#[derive(Debug, Clone)]
pub struct Fts<S, L> {
    lts: Lts<S, L>,
    guards: Vec<FeatureExpr>,
    model: Arc<FeatureModel>,
}

impl<S, L> Fts<S, L>
where
    S: Clone + Eq + Hash + fmt::Debug,
    L: Label,
{
    pub fn new(lts: Lts<S, L>, guards: Vec<FeatureExpr>, model: Arc<FeatureModel>) -> Result<Self, ModelError> {
        if guards.len() != lts.edges().len() {
            return Err(ModelError::GuardCount { expected: lts.edges().len(), got: guards.len() });
        }
        for g in &guards {
            model.universe().check(g)?;
        }
        Ok(Fts { lts, guards, model })
    }

    /// Views an LTS as an FTS whose transitions are all guarded by `true`.
    pub fn unguarded(lts: Lts<S, L>, model: Arc<FeatureModel>) -> Self {
        let guards = vec![FeatureExpr::True; lts.edges().len()];
        Fts { lts, guards, model }
    }

    pub fn lts(&self) -> &Lts<S, L> {
        &self.lts
    }

    pub fn guards(&self) -> &[FeatureExpr] {
        &self.guards
    }

    pub fn guard(&self, e: usize) -> &FeatureExpr {
        &self.guards[e]
    }

    pub fn feature_model(&self) -> &Arc<FeatureModel> {
        &self.model
    }

    /// Transition `e` is realisable for `p`.
    pub fn realisable(&self, e: usize, p: Product) -> bool {
        self.model.universe().holds(&self.guards[e], p)
    }

    /// Syntactic enabledness: guards are ignored.
    pub fn enabled(&self, q: StateId, a: &Action) -> bool {
        self.lts.enabled(q, a)
    }

    /// The product model: same states, only the transitions realisable
    /// for `p`.
    pub fn project(&self, p: Product) -> Result<Lts<S, L>, ModelError> {
        check_valid(&self.model, p)?;
        Ok(self.lts.retain_edges(|i, _| self.realisable(i, p)))
    }
}

pub(crate) fn check_valid(model: &FeatureModel, p: Product) -> Result<(), ModelError> {
    if model.is_valid(p) {
        Ok(())
    } else {
        Err(ModelError::InvalidProduct(model.universe().display_product(p)))
    }
}

/// Shared view of component automata with and without features.
pub trait Component {
    fn name(&self) -> &str;
    fn automaton(&self) -> &Lts<String, Action>;
    fn inputs(&self) -> &BTreeSet<Action>;
    fn outputs(&self) -> &BTreeSet<Action>;

    fn is_input(&self, a: &Action) -> bool {
        self.inputs().contains(a)
    }

    fn is_output(&self, a: &Action) -> bool {
        self.outputs().contains(a)
    }
}

/// A featured component automaton.
#[derive(Debug, Clone)]
pub struct Fca {
    name: String,
    fts: Fts<String, Action>,
    inputs: BTreeSet<Action>,
    outputs: BTreeSet<Action>,
}

/// A component automaton without features.
#[derive(Debug, Clone)]
pub struct Ca {
    name: String,
    lts: Lts<String, Action>,
    inputs: BTreeSet<Action>,
    outputs: BTreeSet<Action>,
}

fn check_alphabets(inputs: &BTreeSet<Action>, outputs: &BTreeSet<Action>) -> Result<(), ModelError> {
    match inputs.intersection(outputs).next() {
        Some(a) => Err(ModelError::OverlappingAlphabets(a.to_string())),
        None => Ok(()),
    }
}

fn check_unique_edges(lts: &Lts<String, Action>) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for e in lts.edges() {
        if !seen.insert((e.source, e.label.clone(), e.target)) {
            return Err(ModelError::DuplicateTransition(format!(
                "{} --{}--> {}",
                lts.state(e.source),
                e.label,
                lts.state(e.target)
            )));
        }
    }
    Ok(())
}

impl Fca {
    pub fn new(
        name: impl Into<String>,
        fts: Fts<String, Action>,
        inputs: BTreeSet<Action>,
        outputs: BTreeSet<Action>,
    ) -> Result<Self, ModelError> {
        check_alphabets(&inputs, &outputs)?;
        let alphabet: BTreeSet<Action> = inputs.union(&outputs).cloned().collect();
        if &alphabet != fts.lts().actions() {
            let odd = alphabet.symmetric_difference(fts.lts().actions()).next().unwrap();
            return Err(ModelError::UnknownAction(odd.to_string()));
        }
        check_unique_edges(fts.lts())?;
        Ok(Fca { name: name.into(), fts, inputs, outputs })
    }

    pub fn fts(&self) -> &Fts<String, Action> {
        &self.fts
    }

    pub fn feature_model(&self) -> &Arc<FeatureModel> {
        self.fts.feature_model()
    }

    pub fn project(&self, p: Product) -> Result<Ca, ModelError> {
        Ok(Ca {
            name: self.name.clone(),
            lts: self.fts.project(p)?,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        })
    }

    /// Local transition `source --a--> target`, if present.
    pub fn find_edge(&self, source: StateId, a: &Action, target: StateId) -> Option<usize> {
        let lts = self.fts.lts();
        lts.outgoing(source).iter().copied().find(|&e| {
            let edge = lts.edge(e);
            &edge.label == a && edge.target == target
        })
    }
}

impl Ca {
    pub fn new(
        name: impl Into<String>,
        lts: Lts<String, Action>,
        inputs: BTreeSet<Action>,
        outputs: BTreeSet<Action>,
    ) -> Result<Self, ModelError> {
        check_alphabets(&inputs, &outputs)?;
        check_unique_edges(&lts)?;
        Ok(Ca { name: name.into(), lts, inputs, outputs })
    }
}

impl Component for Fca {
    fn name(&self) -> &str {
        &self.name
    }
    fn automaton(&self) -> &Lts<String, Action> {
        self.fts.lts()
    }
    fn inputs(&self) -> &BTreeSet<Action> {
        &self.inputs
    }
    fn outputs(&self) -> &BTreeSet<Action> {
        &self.outputs
    }
}

impl Component for Ca {
    fn name(&self) -> &str {
        &self.name
    }
    fn automaton(&self) -> &Lts<String, Action> {
        &self.lts
    }
    fn inputs(&self) -> &BTreeSet<Action> {
        &self.inputs
    }
    fn outputs(&self) -> &BTreeSet<Action> {
        &self.outputs
    }
}

/// Incremental construction of an [`Fca`] from state names.
#[derive(Debug, Clone)]
pub struct FcaBuilder {
    name: String,
    model: Arc<FeatureModel>,
    states: Vec<String>,
    initial: Vec<String>,
    inputs: BTreeSet<Action>,
    outputs: BTreeSet<Action>,
    transitions: Vec<(String, Action, String, FeatureExpr)>,
}

impl FcaBuilder {
    pub fn new(name: impl Into<String>, model: Arc<FeatureModel>) -> Self {
        FcaBuilder {
            name: name.into(),
            model,
            states: Vec::new(),
            initial: Vec::new(),
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
            transitions: Vec::new(),
        }
    }

    pub fn input(mut self, a: &str) -> Self {
        self.inputs.insert(Action::new(a));
        self
    }

    pub fn output(mut self, a: &str) -> Self {
        self.outputs.insert(Action::new(a));
        self
    }

    /// Declares a state; states used by transitions are added implicitly.
    pub fn state(mut self, s: &str) -> Self {
        if !self.states.iter().any(|x| x == s) {
            self.states.push(s.to_string());
        }
        self
    }

    pub fn initial(mut self, s: &str) -> Self {
        self = self.state(s);
        self.initial.push(s.to_string());
        self
    }

    pub fn transition(mut self, source: &str, a: &str, target: &str, guard: FeatureExpr) -> Self {
        self = self.state(source).state(target);
        self.transitions.push((source.to_string(), Action::new(a), target.to_string(), guard));
        self
    }

    pub fn build(self) -> Result<Fca, ModelError> {
        let id = |s: &str| self.states.iter().position(|x| x == s).ok_or_else(|| ModelError::UnknownState(s.into()));
        let initial = self.initial.iter().map(|s| id(s)).collect::<Result<Vec<_>, _>>()?;
        let mut edges = Vec::new();
        let mut guards = Vec::new();
        for (s, a, t, g) in &self.transitions {
            edges.push(Edge { source: id(s)?, label: a.clone(), target: id(t)? });
            guards.push(g.clone());
        }
        let actions = self.inputs.union(&self.outputs).cloned().collect();
        let lts = Lts::new(self.states.clone(), initial, actions, edges)?;
        let fts = Fts::new(lts, guards, self.model)?;
        Fca::new(self.name, fts, self.inputs, self.outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Universe;

    fn model() -> Arc<FeatureModel> {
        let u = Universe::new(["lock", "unlock"]).unwrap();
        Arc::new(FeatureModel::new(u, "lock xor unlock".parse().unwrap()).unwrap())
    }

    fn g(s: &str) -> FeatureExpr {
        s.parse().unwrap()
    }

    fn user(m: Arc<FeatureModel>) -> Fca {
        FcaBuilder::new("User", m)
            .input("confirm")
            .output("join")
            .output("leave")
            .initial("0")
            .state("1")
            .state("2")
            .transition("0", "join", "1", g("lock"))
            .transition("0", "join", "2", g("unlock"))
            .transition("1", "confirm", "2", g("lock"))
            .transition("2", "leave", "0", g("true"))
            .build()
            .unwrap()
    }

    fn server(m: Arc<FeatureModel>) -> Fca {
        FcaBuilder::new("Server", m)
            .input("join")
            .input("leave")
            .output("confirm")
            .initial("0")
            .transition("0", "join", "0", g("unlock"))
            .transition("0", "leave", "0", g("true"))
            .transition("0", "join", "1", g("lock"))
            .transition("1", "confirm", "0", g("lock"))
            .build()
            .unwrap()
    }

    fn edge_names(lts: &Lts<String, Action>) -> Vec<String> {
        lts.edges().iter().map(|e| format!("{}-{}-{}", lts.state(e.source), e.label, lts.state(e.target))).collect()
    }

    #[test]
    fn projecting_the_user() {
        let m = model();
        let u = user(m.clone());
        let lock = m.universe().product(["lock"]).unwrap();
        let unlock = m.universe().product(["unlock"]).unwrap();
        let by_lock = u.fts().project(lock).unwrap();
        assert_eq!(edge_names(&by_lock), ["0-join-1", "1-confirm-2", "2-leave-0"]);
        assert_eq!(by_lock.num_states(), 3);
        let by_unlock = u.fts().project(unlock).unwrap();
        assert_eq!(edge_names(&by_unlock), ["0-join-2", "2-leave-0"]);
    }

    #[test]
    fn projection_rejects_invalid_products() {
        let m = model();
        let both = m.universe().product(["lock", "unlock"]).unwrap();
        assert!(matches!(user(m).fts().project(both), Err(ModelError::InvalidProduct(_))));
    }

    #[test]
    fn unguarded_projection_keeps_everything() {
        let m = model();
        let lock = m.universe().product(["lock"]).unwrap();
        let projected = user(m.clone()).fts().project(lock).unwrap();
        let again = Fts::unguarded(projected.clone(), m).project(lock).unwrap();
        assert_eq!(again.edges(), projected.edges());
    }

    #[test]
    fn enabledness_of_the_server() {
        let s = server(model());
        let lts = s.automaton();
        let q0 = lts.id_of(&"0".to_string()).unwrap();
        let q1 = lts.id_of(&"1".to_string()).unwrap();
        assert!(s.fts().enabled(q0, &Action::new("leave")));
        assert!(!s.fts().enabled(q1, &Action::new("join")));
        assert!(!s.fts().enabled(q0, &Action::new("dance")));
    }

    #[test]
    fn reachability() {
        let m = model();
        let lock = m.universe().product(["lock"]).unwrap();
        let unlock = m.universe().product(["unlock"]).unwrap();
        assert_eq!(server(m.clone()).fts().project(unlock).unwrap().reachable(), [0]);
        assert_eq!(user(m.clone()).fts().project(lock).unwrap().reachable(), [0, 1, 2]);
        let empty = user(m).fts().lts().retain_edges(|_, _| false);
        assert_eq!(empty.reachable(), [0]);
    }

    #[test]
    fn alphabets_must_be_disjoint() {
        let err = FcaBuilder::new("X", model()).input("a").output("a").build().unwrap_err();
        assert_eq!(err, ModelError::OverlappingAlphabets("a".into()));
    }

    #[test]
    fn duplicate_transitions_are_rejected() {
        let err = FcaBuilder::new("X", model())
            .output("a")
            .initial("0")
            .transition("0", "a", "0", g("lock"))
            .transition("0", "a", "0", g("unlock"))
            .build()
            .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateTransition(_)));
    }

    #[test]
    fn guards_must_use_declared_features() {
        let err = FcaBuilder::new("X", model())
            .output("a")
            .initial("0")
            .transition("0", "a", "0", g("secure"))
            .build()
            .unwrap_err();
        assert_eq!(err, ModelError::Logic(LogicError::UnknownFeature("secure".into())));
    }
}
