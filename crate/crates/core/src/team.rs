//! Featured team automata generated by a featured system and a featured
//! synchronisation type specification, and plain team automata generated
//! by a system and a synchronisation type specification.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::logic::{FeatureExpr, Logic, Product};
use crate::model::{check_valid, Action, Component, Fts, Lts, ModelError, StateId};
use crate::sync::{FeaturedSyncSpec, SyncError, SyncSpec};
use crate::system::{ComposeError, FeaturedSystem, Limits, PlainSystem, SystemLabel, SystemState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TeamError {
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Sync(#[from] SyncError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no synchronisation type for action `{0}`")]
    Untyped(String),
}

/// A team transition written out by value.
pub type Triple = (SystemState, SystemLabel, SystemState);

/// A featured team automaton: the composite state space of a featured
/// system with a constraint `γ(t) = γ̂(t) ∧ Χ_P(fst,t)` on every
/// transition.
#[derive(Debug, Clone)]
pub struct Feta {
    fts: Fts<SystemState, SystemLabel>,
    gamma_hat: Vec<FeatureExpr>,
    allowed: Vec<Vec<Product>>,
    moves: Vec<Vec<(usize, usize)>>,
}

/// Conjunction of the local constraints of the participants' moves.
pub fn gamma_hat(sys: &FeaturedSystem, moves: &[(usize, usize)]) -> FeatureExpr {
    FeatureExpr::and(moves.iter().map(|&(i, e)| sys.component(i).fts().guard(e).clone()))
}

/// The valid products whose synchronisation type for `label.action` the
/// label satisfies.
pub fn products_allowing(
    fst: &FeaturedSyncSpec,
    products: &[Product],
    label: &SystemLabel,
) -> Result<Vec<Product>, SyncError> {
    let mut out = Vec::new();
    for &p in products {
        if fst.lookup(p, &label.action)?.admits(label) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Builds `fst[S]` over the full composite state space. `products` are the
/// valid products of the shared feature model.
pub fn build_feta(
    sys: &FeaturedSystem,
    fst: &FeaturedSyncSpec,
    products: &[Product],
    limits: &Limits,
) -> Result<Feta, TeamError> {
    let universe = sys.feature_model().universe();
    let composition = sys.compose(limits)?;
    let mut gamma_hats = Vec::with_capacity(composition.moves.len());
    let mut allowed = Vec::with_capacity(composition.moves.len());
    let mut guards = Vec::with_capacity(composition.moves.len());
    for (edge, moves) in composition.lts.edges().iter().zip(&composition.moves) {
        let hat = gamma_hat(sys, moves);
        let ps = products_allowing(fst, products, &edge.label)?;
        guards.push(FeatureExpr::and([hat.clone(), universe.chi_set(&ps)]));
        gamma_hats.push(hat);
        allowed.push(ps);
    }
    let fts = Fts::new(composition.lts, guards, sys.feature_model().clone())?;
    Ok(Feta { fts, gamma_hat: gamma_hats, allowed, moves: composition.moves })
}

impl Feta {
    pub fn fts(&self) -> &Fts<SystemState, SystemLabel> {
        &self.fts
    }

    pub fn lts(&self) -> &Lts<SystemState, SystemLabel> {
        self.fts.lts()
    }

    /// `γ(t)` as stored: the literal conjunction of `γ̂(t)` and `Χ_P(fst,t)`.
    pub fn gamma(&self, e: usize) -> &FeatureExpr {
        self.fts.guard(e)
    }

    pub fn gamma_hat(&self, e: usize) -> &FeatureExpr {
        &self.gamma_hat[e]
    }

    /// `P(fst, t)`.
    pub fn allowed(&self, e: usize) -> &[Product] {
        &self.allowed[e]
    }

    pub fn moves(&self, e: usize) -> &[(usize, usize)] {
        &self.moves[e]
    }

    /// `p ⊨ γ(t)`.
    pub fn realisable(&self, e: usize, p: Product) -> bool {
        self.fts.realisable(e, p)
    }

    /// The team of one valid product: only the transitions realisable
    /// for `p`.
    pub fn project(&self, p: Product) -> Result<Lts<SystemState, SystemLabel>, ModelError> {
        self.fts.project(p)
    }

    /// Reachability in the product team of `p`, as a state mask.
    pub fn reach_mask(&self, p: Product) -> Vec<bool> {
        self.lts().reach_mask(|e| self.realisable(e, p))
    }

    pub fn triple(&self, e: usize) -> Triple {
        triple(self.lts(), e)
    }
}

fn triple(lts: &Lts<SystemState, SystemLabel>, e: usize) -> Triple {
    let edge = lts.edge(e);
    (lts.state(edge.source).clone(), edge.label.clone(), lts.state(edge.target).clone())
}

/// A plain team automaton `st[S]`.
pub type Eta = Lts<SystemState, SystemLabel>;

/// Builds `st[S]` by keeping the system transitions that satisfy the
/// synchronisation type of their action.
pub fn build_eta(sys: &PlainSystem, st: &SyncSpec, limits: &Limits) -> Result<Eta, TeamError> {
    for a in sys.actions() {
        if st.get(a).is_none() {
            return Err(TeamError::Untyped(a.to_string()));
        }
    }
    let composition = sys.compose(limits)?;
    Ok(composition.lts.retain_edges(|_, e| st.get(&e.label.action).is_some_and(|t| t.admits(&e.label))))
}

/// Presentation view of a featured team: transitions with satisfiable
/// constraints and the states reachable over them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedView {
    /// Reachable state ids, ascending.
    pub states: Vec<StateId>,
    /// Edge ids of the realisable transitions among reachable states.
    pub edges: Vec<usize>,
}

pub fn prune_presentation(feta: &Feta, logic: &Logic) -> PrunedView {
    let lts = feta.lts();
    let live: Vec<bool> = (0..lts.edges().len()).map(|e| logic.is_satisfiable(feta.gamma(e))).collect();
    let mask = lts.reach_mask(|e| live[e]);
    let states = (0..lts.num_states()).filter(|&q| mask[q]).collect();
    let edges = (0..lts.edges().len()).filter(|&e| live[e] && mask[lts.edge(e).source]).collect();
    PrunedView { states, edges }
}

/// Result of comparing the projection of a featured team with the team of
/// the projected system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commutation {
    pub product: Product,
    pub same_states: bool,
    pub same_initial: bool,
    pub same_actions: bool,
    /// Transitions of the projected featured team missing from the
    /// product team.
    pub only_in_family: Vec<Triple>,
    /// Transitions of the product team missing from the projected
    /// featured team.
    pub only_in_product: Vec<Triple>,
}

impl Commutation {
    pub fn holds(&self) -> bool {
        self.same_states
            && self.same_initial
            && self.same_actions
            && self.only_in_family.is_empty()
            && self.only_in_product.is_empty()
    }
}

/// Checks that projecting `fst[S]` onto `p` yields the same transition
/// system as generating the team of `S` projected onto `p` under `fst`
/// projected onto `p`. The two sides are built independently.
pub fn check_projection_commutes(
    sys: &FeaturedSystem,
    fst: &FeaturedSyncSpec,
    products: &[Product],
    p: Product,
    limits: &Limits,
) -> Result<Commutation, TeamError> {
    check_valid(sys.feature_model(), p)?;
    let family = build_feta(sys, fst, products, limits)?.project(p)?;
    let product = build_eta(&sys.project(p)?, &fst.project(p)?, limits)?;
    Ok(compare(p, &family, &product))
}

fn compare(p: Product, family: &Eta, product: &Eta) -> Commutation {
    let states = |l: &Eta| l.states().iter().cloned().collect::<BTreeSet<_>>();
    let initial = |l: &Eta| l.initial().iter().map(|&q| l.state(q).clone()).collect::<BTreeSet<_>>();
    let edges = |l: &Eta| (0..l.edges().len()).map(|e| triple(l, e)).collect::<BTreeSet<_>>();
    let (ef, ep) = (edges(family), edges(product));
    Commutation {
        product: p,
        same_states: states(family) == states(product),
        same_initial: initial(family) == initial(product),
        same_actions: family.actions() == product.actions(),
        only_in_family: ef.difference(&ep).cloned().collect(),
        only_in_product: ep.difference(&ef).cloned().collect(),
    }
}

/// Local `a`-transitions of component `i` leaving its state in `q`.
pub(crate) fn local_edges<'a, C: Component>(c: &'a C, q: &SystemState, i: usize, a: &'a Action) -> Vec<usize> {
    let lts = c.automaton();
    lts.outgoing(q.local(i)).iter().copied().filter(|&e| &lts.edge(e).label == a).collect()
}
