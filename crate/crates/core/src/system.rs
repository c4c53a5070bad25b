//! Systems of (featured) component automata and the composite state space
//! they induce.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::logic::{FeatureModel, Product};
use crate::model::{Action, Ca, Component, Edge, Fca, Label, Lts, ModelError, StateId};

/// Resource bounds for composition and family analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest composite state space that is built.
    pub max_states: usize,
    /// Largest number of components enabled for one action in one state;
    /// sender/receiver sets are enumerated over all subsets of these.
    pub max_participants: usize,
    /// Largest number of valid products a family analysis accepts.
    pub max_products: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_states: 1_000_000, max_participants: 20, max_products: 1 << 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("a system needs at least one component")]
    Empty,
    #[error("duplicate component name `{0}`")]
    DuplicateName(String),
    #[error("at most 64 components are supported, got {0}")]
    TooManyComponents(usize),
    #[error("component `{0}` does not share the system's features and feature model")]
    FeatureModelMismatch(String),
    #[error("composite state space has {size} states, above the limit of {limit}")]
    TooManyStates { size: u128, limit: usize },
    #[error("{count} components are enabled for `{action}` in one state, above the limit of {limit}")]
    TooManyParticipants { action: String, count: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A set of component indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ComponentSet(u64);

impl ComponentSet {
    pub const EMPTY: ComponentSet = ComponentSet(0);

    pub fn singleton(i: usize) -> Self {
        ComponentSet(1 << i)
    }

    pub fn from_bits(bits: u64) -> Self {
        ComponentSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn with(self, i: usize) -> Self {
        ComponentSet(self.0 | 1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        ComponentSet(self.0 | other.0)
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }

    /// Every subset of `members`, including the empty one.
    pub fn subsets(members: &[usize]) -> impl Iterator<Item = ComponentSet> + '_ {
        (0u64..(1u64 << members.len())).map(move |mask| {
            members
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .fold(ComponentSet::EMPTY, |acc, (_, &i)| acc.with(i))
        })
    }
}

impl FromIterator<usize> for ComponentSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        iter.into_iter().fold(ComponentSet::EMPTY, |acc, i| acc.with(i))
    }
}

impl Ord for ComponentSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for ComponentSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ComponentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// One local state per component.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemState(Box<[StateId]>);

impl SystemState {
    pub fn new(locals: Vec<StateId>) -> Self {
        SystemState(locals.into_boxed_slice())
    }

    pub fn locals(&self) -> &[StateId] {
        &self.0
    }

    pub fn local(&self, component: usize) -> StateId {
        self.0[component]
    }
}

impl fmt::Debug for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("").field(&self.0).finish()
    }
}

/// `(S, a, R)`: the senders and receivers synchronising on an action.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemLabel {
    pub senders: ComponentSet,
    pub action: Action,
    pub receivers: ComponentSet,
}

impl SystemLabel {
    pub fn participants(&self) -> ComponentSet {
        self.senders.union(self.receivers)
    }

    fn sort_key(&self) -> (&Action, ComponentSet, ComponentSet) {
        (&self.action, self.senders, self.receivers)
    }
}

impl Label for SystemLabel {
    fn action(&self) -> &Action {
        &self.action
    }
}

impl Ord for SystemLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for SystemLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A system transition together with the local transition each
/// participant takes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemTransition {
    pub source: SystemState,
    pub label: SystemLabel,
    pub target: SystemState,
    /// `(component, local edge index)`, ordered by component.
    pub moves: Vec<(usize, usize)>,
}

/// An action lacking a sender or a receiver in a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenAction {
    pub action: Action,
    pub has_sender: bool,
    pub has_receiver: bool,
}

impl fmt::Display for OpenAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let missing = match (self.has_sender, self.has_receiver) {
            (false, false) => "no sender and no receiver",
            (false, true) => "no sender",
            _ => "no receiver",
        };
        write!(f, "`{}` has {missing}", self.action)
    }
}

/// Access to a component's feature model, when it has one.
pub trait Featured {
    fn features(&self) -> Option<&Arc<FeatureModel>>;
}

impl Featured for Fca {
    fn features(&self) -> Option<&Arc<FeatureModel>> {
        Some(self.feature_model())
    }
}

impl Featured for Ca {
    fn features(&self) -> Option<&Arc<FeatureModel>> {
        None
    }
}

/// A named, nonempty family of components.
#[derive(Debug, Clone)]
pub struct System<C> {
    names: Vec<String>,
    components: Vec<C>,
    actions: BTreeSet<Action>,
}

pub type FeaturedSystem = System<Fca>;
pub type PlainSystem = System<Ca>;

/// Local states of a partially expanded transition with the moves so far.
type Partial = (Vec<StateId>, Vec<(usize, usize)>);

/// The full composite state space with its system transitions.
#[derive(Debug, Clone)]
pub struct Composition {
    pub lts: Lts<SystemState, SystemLabel>,
    /// Local moves of each edge of `lts`, index-aligned.
    pub moves: Vec<Vec<(usize, usize)>>,
}

impl<C: Component + Featured> System<C> {
    pub fn new(members: Vec<(String, C)>) -> Result<Self, ComposeError> {
        if members.is_empty() {
            return Err(ComposeError::Empty);
        }
        if members.len() > 64 {
            return Err(ComposeError::TooManyComponents(members.len()));
        }
        let mut names = Vec::new();
        let mut components = Vec::new();
        for (name, c) in members {
            if names.contains(&name) {
                return Err(ComposeError::DuplicateName(name));
            }
            names.push(name);
            components.push(c);
        }
        if let Some(first) = components[0].features() {
            for (name, c) in names.iter().zip(&components) {
                if c.features().map(|m| m.as_ref()) != Some(first.as_ref()) {
                    return Err(ComposeError::FeatureModelMismatch(name.clone()));
                }
            }
        }
        let actions = components.iter().flat_map(|c| c.automaton().actions().iter().cloned()).collect();
        Ok(System { names, components, actions })
    }
}

impl<C: Component> System<C> {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn components(&self) -> &[C] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &C {
        &self.components[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn actions(&self) -> &BTreeSet<Action> {
        &self.actions
    }

    /// Actions lacking a sender or a receiver. Empty for closed systems.
    pub fn open_actions(&self) -> Vec<OpenAction> {
        self.actions
            .iter()
            .filter_map(|a| {
                let has_sender = self.components.iter().any(|c| c.is_output(a));
                let has_receiver = self.components.iter().any(|c| c.is_input(a));
                (!has_sender || !has_receiver).then(|| OpenAction { action: a.clone(), has_sender, has_receiver })
            })
            .collect()
    }

    /// `∏ |Q_i|`.
    pub fn state_count(&self) -> u128 {
        self.components.iter().map(|c| c.automaton().num_states() as u128).product()
    }

    fn product_of(&self, choices: impl Fn(&C) -> Vec<StateId>) -> Vec<SystemState> {
        let mut out = vec![Vec::new()];
        for c in &self.components {
            let locals = choices(c);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    locals.iter().map(move |&q| {
                        let mut next = prefix.clone();
                        next.push(q);
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(SystemState::new).collect()
    }

    /// All composite states, lexicographic in the local state indices.
    pub fn all_states(&self) -> Vec<SystemState> {
        self.product_of(|c| (0..c.automaton().num_states()).collect())
    }

    pub fn initial_states(&self) -> Vec<SystemState> {
        self.product_of(|c| c.automaton().initial().to_vec())
    }

    /// All system transitions leaving `q`, ordered by action, senders,
    /// receivers and target.
    pub fn successors(&self, q: &SystemState, limits: &Limits) -> Result<Vec<SystemTransition>, ComposeError> {
        let mut out = Vec::new();
        for a in &self.actions {
            let enabled = |i: usize| self.components[i].automaton().enabled(q.local(i), a);
            let senders: Vec<usize> =
                (0..self.len()).filter(|&i| self.components[i].is_output(a) && enabled(i)).collect();
            let receivers: Vec<usize> =
                (0..self.len()).filter(|&i| self.components[i].is_input(a) && enabled(i)).collect();
            let count = senders.len() + receivers.len();
            if count > limits.max_participants {
                return Err(ComposeError::TooManyParticipants {
                    action: a.to_string(),
                    count,
                    limit: limits.max_participants,
                });
            }
            for s in ComponentSet::subsets(&senders) {
                for r in ComponentSet::subsets(&receivers) {
                    if s.is_empty() && r.is_empty() {
                        continue;
                    }
                    let label = SystemLabel { senders: s, action: a.clone(), receivers: r };
                    self.expand(q, &label, &mut out);
                }
            }
        }
        out.sort_by(|x, y| (&x.label, &x.target).cmp(&(&y.label, &y.target)));
        Ok(out)
    }

    // Combines every choice of local a-transition for the participants.
    fn expand(&self, q: &SystemState, label: &SystemLabel, out: &mut Vec<SystemTransition>) {
        let participants = label.participants();
        debug_assert!(!participants.is_empty());
        debug_assert!(!label.senders.intersects(label.receivers));
        let mut partial: Vec<Partial> = vec![(q.locals().to_vec(), Vec::new())];
        for i in participants.iter() {
            let lts = self.components[i].automaton();
            debug_assert!(if label.senders.contains(i) {
                self.components[i].is_output(&label.action)
            } else {
                self.components[i].is_input(&label.action)
            });
            let local: Vec<usize> =
                lts.outgoing(q.local(i)).iter().copied().filter(|&e| lts.edge(e).label == label.action).collect();
            partial = partial
                .into_iter()
                .flat_map(|(state, moves)| {
                    local.iter().map(move |&e| {
                        let mut state = state.clone();
                        let mut moves = moves.clone();
                        state[i] = lts.edge(e).target;
                        moves.push((i, e));
                        (state, moves)
                    })
                })
                .collect();
        }
        for (target, moves) in partial {
            out.push(SystemTransition {
                source: q.clone(),
                label: label.clone(),
                target: SystemState::new(target),
                moves,
            });
        }
    }

    /// Builds the complete composite state space.
    pub fn compose(&self, limits: &Limits) -> Result<Composition, ComposeError> {
        let size = self.state_count();
        if size > limits.max_states as u128 {
            return Err(ComposeError::TooManyStates { size, limit: limits.max_states });
        }
        let states = self.all_states();
        let index: std::collections::HashMap<&SystemState, usize> =
            states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let initial: Vec<StateId> = self.initial_states().iter().map(|s| index[s]).collect();
        let mut edges = Vec::new();
        let mut moves = Vec::new();
        for (i, q) in states.iter().enumerate() {
            for t in self.successors(q, limits)? {
                edges.push(Edge { source: i, label: t.label, target: index[&t.target] });
                moves.push(t.moves);
            }
        }
        let lts = Lts::new(states, initial, self.actions.clone(), edges)?;
        Ok(Composition { lts, moves })
    }

    pub fn display_state(&self, q: &SystemState) -> String {
        let parts: Vec<&str> =
            q.locals().iter().zip(&self.components).map(|(&s, c)| c.automaton().state(s).as_str()).collect();
        parts.join(",")
    }

    pub fn display_set(&self, set: ComponentSet) -> String {
        let parts: Vec<&str> = set.iter().map(|i| self.names[i].as_str()).collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn display_label(&self, label: &SystemLabel) -> String {
        format!("{} {} {}", self.display_set(label.senders), label.action, self.display_set(label.receivers))
    }

    /// Parses a composite state written as comma-separated local state
    /// names, optionally in parentheses.
    pub fn parse_state(&self, text: &str) -> Option<SystemState> {
        let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != self.len() {
            return None;
        }
        let locals = parts
            .iter()
            .zip(&self.components)
            .map(|(p, c)| c.automaton().id_of(&p.to_string()))
            .collect::<Option<Vec<_>>>()?;
        Some(SystemState::new(locals))
    }
}

impl FeaturedSystem {
    pub fn feature_model(&self) -> &Arc<FeatureModel> {
        self.components[0].feature_model()
    }

    /// Component-wise projection onto a valid product.
    pub fn project(&self, p: Product) -> Result<PlainSystem, ComposeError> {
        let members = self
            .names
            .iter()
            .zip(&self.components)
            .map(|(n, c)| Ok((n.clone(), c.project(p)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        System::new(members)
    }
}
