//! Receptiveness of a whole family, decided on its featured team
//! automaton, and cross-checks against the product-by-product analysis.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::logic::{FeatureExpr, Logic, Product};
use crate::model::{Action, StateId};
use crate::receptiveness::{self, is_reception, output_enabled, weak_search, Mode, Req, Witness};
use crate::sync::{FeaturedSyncSpec, SyncError};
use crate::system::{ComponentSet, ComposeError, FeaturedSystem, Limits, SystemState};
use crate::team::{build_eta, local_edges, Feta, TeamError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Team(#[from] TeamError),
    #[error("{count} valid products exceed the limit of {limit}")]
    TooManyProducts { count: usize, limit: usize },
}

impl From<ComposeError> for FamilyError {
    fn from(e: ComposeError) -> Self {
        FamilyError::Team(e.into())
    }
}

impl From<SyncError> for FamilyError {
    fn from(e: SyncError) -> Self {
        FamilyError::Team(e.into())
    }
}

/// The valid products under which each state of a featured team is
/// reachable, computed by one search per product.
#[derive(Debug, Clone)]
pub struct ReachTable {
    products: Vec<Product>,
    masks: Vec<Vec<bool>>,
}

impl ReachTable {
    pub fn new(feta: &Feta, products: &[Product], limits: &Limits) -> Result<Self, FamilyError> {
        if products.len() > limits.max_products {
            return Err(FamilyError::TooManyProducts { count: products.len(), limit: limits.max_products });
        }
        let masks = products.iter().map(|&p| feta.reach_mask(p)).collect();
        Ok(ReachTable { products: products.to_vec(), masks })
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    /// `P(q)`, in product order.
    pub fn at(&self, q: StateId) -> Vec<Product> {
        self.products.iter().zip(&self.masks).filter(|(_, m)| m[q]).map(|(&p, _)| p).collect()
    }

    pub fn reachable_in(&self, p: Product, q: StateId) -> bool {
        self.products.iter().position(|&x| x == p).is_some_and(|i| self.masks[i][q])
    }
}

/// A symbolic characterisation of `P(q)` for every state: a least fixpoint
/// over feature expressions in which a state's condition grows by
/// `cond(source) ∧ γ(t)` along each transition.
pub fn symbolic_reachability(feta: &Feta, logic: &Logic) -> Vec<FeatureExpr> {
    let lts = feta.lts();
    let fm = feta.fts().feature_model().expr().clone();
    let mut cond = vec![FeatureExpr::False; lts.num_states()];
    let mut work: Vec<StateId> = Vec::new();
    for &q in lts.initial() {
        cond[q] = fm.clone();
        work.push(q);
    }
    while let Some(q) = work.pop() {
        for &e in lts.outgoing(q) {
            let t = lts.edge(e).target;
            let incoming = FeatureExpr::and([cond[q].clone(), feta.gamma(e).clone()]);
            if !logic.entails(&incoming, &cond[t]) {
                cond[t] = FeatureExpr::or([cond[t].clone(), incoming]);
                work.push(t);
            }
        }
    }
    cond
}

/// `[ψ] rcp(J, a)@q` with `ψ = fe ∧ Χ_P(fst,J,a) ∧ Χ_P(q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FReq {
    pub state: StateId,
    pub senders: ComponentSet,
    pub action: Action,
    /// Every sender has an `a`-transition from its local state.
    pub fe: FeatureExpr,
    /// The products whose type for `a` admits `|J|` senders and demands a
    /// receiver.
    pub chi_sync: FeatureExpr,
    /// The products in which the state is reachable.
    pub chi_reach: FeatureExpr,
    pub psi: FeatureExpr,
}

impl FReq {
    pub fn req(&self) -> Req {
        Req { state: self.state, senders: self.senders, action: self.action.clone() }
    }
}

/// `⋀_{j∈J} ⋁ γ_j(q_j --a--> q_j')`.
pub fn sender_guard(sys: &FeaturedSystem, q: &SystemState, senders: ComponentSet, a: &Action) -> FeatureExpr {
    FeatureExpr::and(senders.iter().map(|j| {
        let c = sys.component(j);
        FeatureExpr::or(local_edges(c, q, j, a).into_iter().map(|e| c.fts().guard(e).clone()))
    }))
}

/// The valid products whose type for `a` admits `senders` senders and
/// excludes zero receivers.
pub fn products_for_senders(
    fst: &FeaturedSyncSpec,
    products: &[Product],
    senders: usize,
    a: &Action,
) -> Result<Vec<Product>, SyncError> {
    let mut out = Vec::new();
    for &p in products {
        if fst.lookup(p, a)?.demands_reception(senders) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Everything the family analyses share.
#[derive(Debug, Clone)]
pub struct Family<'a> {
    pub sys: &'a FeaturedSystem,
    pub fst: &'a FeaturedSyncSpec,
    pub feta: &'a Feta,
    pub logic: &'a Logic,
    pub reach: ReachTable,
    pub limits: Limits,
}

impl<'a> Family<'a> {
    pub fn new(
        sys: &'a FeaturedSystem,
        fst: &'a FeaturedSyncSpec,
        feta: &'a Feta,
        logic: &'a Logic,
        products: &[Product],
        limits: &Limits,
    ) -> Result<Self, FamilyError> {
        let reach = ReachTable::new(feta, products, limits)?;
        Ok(Family { sys, fst, feta, logic, reach, limits: *limits })
    }

    pub fn products(&self) -> &[Product] {
        self.reach.products()
    }

    /// All featured requirements with a satisfiable condition, ordered by
    /// state, action, number of senders and sender set.
    pub fn derive_freqs(&self) -> Result<Vec<FReq>, FamilyError> {
        let lts = self.feta.lts();
        let universe = self.sys.feature_model().universe();
        let mut out = Vec::new();
        for q in 0..lts.num_states() {
            let reach = self.reach.at(q);
            if reach.is_empty() {
                continue;
            }
            let chi_reach = universe.chi_set(&reach);
            let state = lts.state(q);
            for a in self.sys.actions() {
                let enabled = output_enabled(self.sys, state.locals(), a);
                if enabled.len() > self.limits.max_participants {
                    return Err(ComposeError::TooManyParticipants {
                        action: a.to_string(),
                        count: enabled.len(),
                        limit: self.limits.max_participants,
                    }
                    .into());
                }
                let mut groups: Vec<ComponentSet> = ComponentSet::subsets(&enabled).filter(|j| !j.is_empty()).collect();
                groups.sort_by_key(|j| (j.len(), *j));
                for senders in groups {
                    let fe = sender_guard(self.sys, state, senders, a);
                    let sync = products_for_senders(self.fst, self.products(), senders.len(), a)?;
                    let chi_sync = universe.chi_set(&sync);
                    let psi = FeatureExpr::and([fe.clone(), chi_sync.clone(), chi_reach.clone()]);
                    if self.logic.is_satisfiable(&psi) {
                        out.push(FReq {
                            state: q,
                            senders,
                            action: a.clone(),
                            fe,
                            chi_sync,
                            chi_reach: chi_reach.clone(),
                            psi,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Candidate reception transitions for a requirement.
    pub fn receptions(&self, freq: &FReq) -> Vec<usize> {
        let lts = self.feta.lts();
        lts.outgoing(freq.state)
            .iter()
            .copied()
            .filter(|&e| is_reception(&lts.edge(e).label, freq.senders, &freq.action))
            .collect()
    }

    /// `⊨ ψ → ⋁ γ(t)` over the candidate receptions.
    pub fn featured_compliance(&self, freq: &FReq) -> FeaturedResult {
        let candidates = self.receptions(freq);
        let evidence = FeatureExpr::or(candidates.iter().map(|&e| self.feta.gamma(e).clone()));
        let counterexample = self.logic.find_model(&FeatureExpr::and([freq.psi.clone(), evidence.clone().negate()]));
        FeaturedResult {
            freq: freq.clone(),
            status: if counterexample.is_none() { FeaturedStatus::Compliant } else { FeaturedStatus::Violated },
            evidence: Evidence::Symbolic { candidates, condition: evidence },
            counterexample,
        }
    }

    /// One search per product satisfying `ψ`, over that product's
    /// realisable transitions in which no sender participates.
    pub fn featured_weak_compliance(&self, freq: &FReq) -> FeaturedResult {
        let universe = self.sys.feature_model().universe();
        let mut paths = BTreeMap::new();
        let mut counterexample = None;
        for &p in self.products() {
            if !universe.holds(&freq.psi, p) {
                continue;
            }
            match weak_search(self.feta.lts(), freq.state, freq.senders, &freq.action, |e| self.feta.realisable(e, p)) {
                Some(w) => {
                    paths.insert(p, w);
                }
                None => {
                    counterexample = Some(p);
                    break;
                }
            }
        }
        let status = match counterexample {
            Some(_) => FeaturedStatus::Violated,
            None if paths.values().all(|w| w.prefix.is_empty()) => FeaturedStatus::Compliant,
            None => FeaturedStatus::WeaklyCompliant,
        };
        FeaturedResult { freq: freq.clone(), status, evidence: Evidence::PerProduct(paths), counterexample }
    }

    pub fn check_freq(&self, freq: &FReq, mode: Mode) -> FeaturedResult {
        let strict = self.featured_compliance(freq);
        if strict.status == FeaturedStatus::Compliant || mode == Mode::Strict {
            return strict;
        }
        self.featured_weak_compliance(freq)
    }

    pub fn verdict(&self, mode: Mode) -> Result<FeaturedVerdict, FamilyError> {
        let freqs = self.derive_freqs()?;
        Ok(FeaturedVerdict { mode, results: freqs.iter().map(|f| self.check_freq(f, mode)).collect() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeaturedStatus {
    Compliant,
    WeaklyCompliant,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// The reception transitions considered and the disjunction of their
    /// constraints.
    Symbolic { candidates: Vec<usize>, condition: FeatureExpr },
    /// A witness for every product satisfying the condition, as far as the
    /// search went.
    PerProduct(BTreeMap<Product, Witness>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeaturedResult {
    pub freq: FReq,
    pub status: FeaturedStatus,
    pub evidence: Evidence,
    /// A product satisfying `ψ` for which no witness exists.
    pub counterexample: Option<Product>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeaturedVerdict {
    pub mode: Mode,
    pub results: Vec<FeaturedResult>,
}

impl FeaturedVerdict {
    pub fn holds(&self) -> bool {
        self.results.iter().all(|r| r.status != FeaturedStatus::Violated)
    }

    pub fn violations(&self) -> impl Iterator<Item = &FeaturedResult> {
        self.results.iter().filter(|r| r.status == FeaturedStatus::Violated)
    }
}

/// A requirement written out by value, independent of state numbering.
pub type ReqKey = (SystemState, ComponentSet, Action);

/// Requirements of one product that only one side produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReqDiff {
    pub product: Product,
    pub only_featured: Vec<ReqKey>,
    pub only_product: Vec<ReqKey>,
}

/// Per-product teams built directly from the projected system and
/// synchronisation specification.
fn product_team(
    family: &Family<'_>,
    p: Product,
) -> Result<(crate::system::PlainSystem, crate::sync::SyncSpec, crate::team::Eta), FamilyError> {
    let sys = family.sys.project(p)?;
    let st = family.fst.project(p)?;
    let eta = build_eta(&sys, &st, &family.limits)?;
    Ok((sys, st, eta))
}

/// For every valid product, the featured requirements whose condition the
/// product satisfies coincide with the requirements of the product team.
/// Returns the products where they differ.
pub fn check_requirement_correspondence(family: &Family<'_>) -> Result<Vec<ReqDiff>, FamilyError> {
    let freqs = family.derive_freqs()?;
    let universe = family.sys.feature_model().universe();
    let lts = family.feta.lts();
    let mut diffs = Vec::new();
    for &p in family.products() {
        let featured: BTreeSet<ReqKey> = freqs
            .iter()
            .filter(|f| universe.holds(&f.psi, p))
            .map(|f| (lts.state(f.state).clone(), f.senders, f.action.clone()))
            .collect();
        let (sys, st, eta) = product_team(family, p)?;
        let plain: BTreeSet<ReqKey> = receptiveness::derive_reqs(&eta, &st, &sys, &family.limits)?
            .into_iter()
            .map(|r| (eta.state(r.state).clone(), r.senders, r.action))
            .collect();
        if featured != plain {
            diffs.push(ReqDiff {
                product: p,
                only_featured: featured.difference(&plain).cloned().collect(),
                only_product: plain.difference(&featured).cloned().collect(),
            });
        }
    }
    Ok(diffs)
}

/// The symbolic featured compliance check agrees with asking, product by
/// product, for a realisable reception.
pub fn check_compliance_unfolding(family: &Family<'_>, freq: &FReq) -> bool {
    let symbolic = family.featured_compliance(freq).status == FeaturedStatus::Compliant;
    let universe = family.sys.feature_model().universe();
    let candidates = family.receptions(freq);
    let unfolded = family
        .products()
        .iter()
        .filter(|&&p| universe.holds(&freq.psi, p))
        .all(|&p| candidates.iter().any(|&e| family.feta.realisable(e, p)));
    symbolic == unfolded
}

/// Outcome of comparing the family verdict with the product verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyAgreement {
    pub mode: Mode,
    pub featured: bool,
    pub per_product: Vec<(Product, bool)>,
    /// On disagreement, a product whose verdict contradicts the family
    /// verdict and the requirement responsible.
    pub counterexample: Option<(Product, ReqKey)>,
}

impl FamilyAgreement {
    pub fn all_products(&self) -> bool {
        self.per_product.iter().all(|&(_, ok)| ok)
    }

    pub fn holds(&self) -> bool {
        self.featured == self.all_products()
    }
}

/// The family is featured (weakly) receptive exactly when every product
/// team is (weakly) receptive.
pub fn check_family_receptiveness(family: &Family<'_>, mode: Mode) -> Result<FamilyAgreement, FamilyError> {
    let verdict = family.verdict(mode)?;
    let featured = verdict.holds();
    let lts = family.feta.lts();
    let mut per_product = Vec::new();
    let mut counterexample = None;
    for &p in family.products() {
        let (sys, st, eta) = product_team(family, p)?;
        let v = receptiveness::receptiveness_verdict(&eta, &st, &sys, mode, &family.limits)?;
        if featured && !v.holds() && counterexample.is_none() {
            let r = &v.violations().next().expect("violation").req;
            counterexample = Some((p, (eta.state(r.state).clone(), r.senders, r.action.clone())));
        }
        per_product.push((p, v.holds()));
    }
    if !featured && counterexample.is_none() {
        let bad = verdict.violations().next().expect("violation");
        if let Some(p) = bad.counterexample {
            if per_product.iter().any(|&(x, ok)| x == p && ok) {
                counterexample =
                    Some((p, (lts.state(bad.freq.state).clone(), bad.freq.senders, bad.freq.action.clone())));
            }
        }
    }
    Ok(FamilyAgreement { mode, featured, per_product, counterexample })
}
