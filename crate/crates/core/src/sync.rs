//! Synchronisation types and (featured) synchronisation type
//! specifications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::logic::{FeatureExpr, FeatureModel, LogicError, Product};
use crate::model::{check_valid, Action, ModelError};
use crate::system::SystemLabel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyncError {
    #[error("interval [{min},{max}] is empty")]
    EmptyInterval { min: u32, max: u32 },
    #[error("no synchronisation rule covers `{action}` for product {product}")]
    NoMatchingRule { product: String, action: String },
    #[error("action `{0}` is not in the system alphabet")]
    UnknownAction(String),
    #[error("rules {first} and {second} assign different types to `{action}` for product {product}")]
    Overlap { first: usize, second: usize, product: String, action: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite(u32),
    /// `*`
    Unbounded,
}

/// `[min, max]` on the number of participants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    min: u32,
    max: Bound,
}

impl Interval {
    pub fn new(min: u32, max: Bound) -> Result<Self, SyncError> {
        if let Bound::Finite(m) = max {
            if m < min {
                return Err(SyncError::EmptyInterval { min, max: m });
            }
        }
        Ok(Interval { min, max })
    }

    pub fn exactly(n: u32) -> Self {
        Interval { min: n, max: Bound::Finite(n) }
    }

    pub fn at_least(n: u32) -> Self {
        Interval { min: n, max: Bound::Unbounded }
    }

    pub fn min(&self) -> u32 {
        self.min
    }

    pub fn max(&self) -> Bound {
        self.max
    }

    pub fn contains(&self, x: usize) -> bool {
        x >= self.min as usize
            && match self.max {
                Bound::Finite(m) => x <= m as usize,
                Bound::Unbounded => true,
            }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Bound::Finite(m) => write!(f, "[{},{}]", self.min, m),
            Bound::Unbounded => write!(f, "[{},*]", self.min),
        }
    }
}

/// Bounds on the number of senders and receivers of one synchronisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SyncType {
    pub senders: Interval,
    pub receivers: Interval,
}

impl SyncType {
    pub fn new(senders: Interval, receivers: Interval) -> Self {
        SyncType { senders, receivers }
    }

    /// `|S| ∈ s` and `|R| ∈ r`.
    pub fn admits(&self, label: &SystemLabel) -> bool {
        self.senders.contains(label.senders.len()) && self.receivers.contains(label.receivers.len())
    }

    /// A group of `senders` may emit and at least one receiver is required.
    pub fn demands_reception(&self, senders: usize) -> bool {
        self.senders.contains(senders) && !self.receivers.contains(0)
    }
}

impl fmt::Display for SyncType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.senders, self.receivers)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionSelector {
    All,
    Only(BTreeSet<Action>),
}

impl ActionSelector {
    pub fn covers(&self, a: &Action) -> bool {
        match self {
            ActionSelector::All => true,
            ActionSelector::Only(set) => set.contains(a),
        }
    }
}

/// `actions: type when guard`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncRule {
    pub guard: FeatureExpr,
    pub actions: ActionSelector,
    pub sync: SyncType,
}

/// A featured synchronisation type specification: an ordered rule list,
/// read with first-match semantics, over a system's alphabet.
#[derive(Debug, Clone)]
pub struct FeaturedSyncSpec {
    rules: Vec<SyncRule>,
    model: Arc<FeatureModel>,
    actions: BTreeSet<Action>,
}

/// A synchronisation type specification without features.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SyncSpec(BTreeMap<Action, SyncType>);

impl SyncSpec {
    pub fn new(types: BTreeMap<Action, SyncType>) -> Self {
        SyncSpec(types)
    }

    pub fn get(&self, a: &Action) -> Option<&SyncType> {
        self.0.get(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Action, &SyncType)> {
        self.0.iter()
    }

    /// The same type for every action.
    pub fn uniform(actions: &BTreeSet<Action>, sync: SyncType) -> Self {
        SyncSpec(actions.iter().map(|a| (a.clone(), sync)).collect())
    }
}

impl FeaturedSyncSpec {
    pub fn new(rules: Vec<SyncRule>, model: Arc<FeatureModel>, actions: BTreeSet<Action>) -> Result<Self, SyncError> {
        for rule in &rules {
            model.universe().check(&rule.guard)?;
            if let ActionSelector::Only(set) = &rule.actions {
                if let Some(a) = set.iter().find(|a| !actions.contains(*a)) {
                    return Err(SyncError::UnknownAction(a.to_string()));
                }
            }
        }
        Ok(FeaturedSyncSpec { rules, model, actions })
    }

    pub fn rules(&self) -> &[SyncRule] {
        &self.rules
    }

    pub fn actions(&self) -> &BTreeSet<Action> {
        &self.actions
    }

    pub fn feature_model(&self) -> &Arc<FeatureModel> {
        &self.model
    }

    fn matching<'a>(&'a self, p: Product, a: &'a Action) -> impl Iterator<Item = (usize, &'a SyncRule)> + 'a {
        let universe = self.model.universe();
        self.rules.iter().enumerate().filter(move |(_, r)| r.actions.covers(a) && universe.holds(&r.guard, p))
    }

    /// Type of the first rule matching `(p, a)`.
    pub fn lookup(&self, p: Product, a: &Action) -> Result<SyncType, SyncError> {
        check_valid(&self.model, p)?;
        if !self.actions.contains(a) {
            return Err(SyncError::UnknownAction(a.to_string()));
        }
        self.matching(p, a).next().map(|(_, r)| r.sync).ok_or_else(|| SyncError::NoMatchingRule {
            product: self.model.universe().display_product(p),
            action: a.to_string(),
        })
    }

    /// Every `(product, action)` pair that no rule covers.
    pub fn missing(&self, products: &[Product]) -> Vec<(Product, Action)> {
        products
            .iter()
            .flat_map(|&p| self.actions.iter().map(move |a| (p, a.clone())))
            .filter(|(p, a)| self.matching(*p, a).next().is_none())
            .collect()
    }

    /// Pairs matched by rules of differing types, for the strict reading.
    pub fn overlaps(&self, products: &[Product]) -> Vec<SyncError> {
        let mut out = Vec::new();
        for &p in products {
            for a in &self.actions {
                let mut hits = self.matching(p, a);
                if let Some((first, r)) = hits.next() {
                    if let Some((second, _)) = hits.find(|(_, other)| other.sync != r.sync) {
                        out.push(SyncError::Overlap {
                            first,
                            second,
                            product: self.model.universe().display_product(p),
                            action: a.to_string(),
                        });
                    }
                }
            }
        }
        out
    }

    /// The specification for one product.
    pub fn project(&self, p: Product) -> Result<SyncSpec, SyncError> {
        let mut types = BTreeMap::new();
        for a in &self.actions {
            types.insert(a.clone(), self.lookup(p, a)?);
        }
        Ok(SyncSpec(types))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::system::ComponentSet;

    fn label(senders: usize, receivers: usize) -> SystemLabel {
        SystemLabel {
            senders: ComponentSet::from_iter(0..senders),
            action: Action::new("a"),
            receivers: ComponentSet::from_iter(senders..senders + receivers),
        }
    }

    #[test]
    fn interval_membership() {
        assert!(Interval::at_least(1).contains(2));
        assert!(!Interval::exactly(1).contains(0));
        assert!(Interval::exactly(1).contains(1));
        assert!(Interval::new(2, Bound::Finite(1)).is_err());
        assert_eq!(Interval::at_least(1).to_string(), "[1,*]");
    }

    #[test]
    fn transition_satisfaction() {
        let many = SyncType::new(Interval::at_least(1), Interval::exactly(1));
        let one = SyncType::new(Interval::exactly(1), Interval::exactly(1));
        assert!(many.admits(&label(2, 1)));
        assert!(!one.admits(&label(2, 1)));
        assert!(!one.admits(&label(0, 1)));
    }

    #[test]
    fn lookups_in_the_running_example() {
        let (sys, fst) = corpus::access_management();
        let u = sys.feature_model().universe();
        let lock = u.product(["lock"]).unwrap();
        let unlock = u.product(["unlock"]).unwrap();
        let one = SyncType::new(Interval::exactly(1), Interval::exactly(1));
        let many = SyncType::new(Interval::at_least(1), Interval::exactly(1));
        assert_eq!(fst.lookup(lock, &"join".into()).unwrap(), one);
        assert_eq!(fst.lookup(unlock, &"leave".into()).unwrap(), many);
        assert_eq!(fst.lookup(lock, &"confirm".into()).unwrap(), one);
        assert_eq!(fst.lookup(unlock, &"confirm".into()).unwrap(), one);
        let st = fst.project(unlock).unwrap();
        assert_eq!(st.get(&"join".into()), Some(&many));
        assert_eq!(st.get(&"leave".into()), Some(&many));
        assert!(fst.missing(&[lock, unlock]).is_empty());
    }

    #[test]
    fn missing_pairs_are_reported() {
        let (sys, fst) = corpus::access_management();
        let u = sys.feature_model().universe();
        let lock = u.product(["lock"]).unwrap();
        let unlock = u.product(["unlock"]).unwrap();
        let only_lock: Vec<SyncRule> = fst
            .rules()
            .iter()
            .cloned()
            .map(|mut r| {
                r.guard = "lock".parse().unwrap();
                r
            })
            .collect();
        let partial = FeaturedSyncSpec::new(only_lock, fst.feature_model().clone(), fst.actions().clone()).unwrap();
        let missing = partial.missing(&[lock, unlock]);
        assert_eq!(missing.len(), 3);
        assert!(missing.iter().all(|(p, _)| *p == unlock));
        assert!(matches!(partial.lookup(unlock, &"join".into()), Err(SyncError::NoMatchingRule { .. })));
    }

    #[test]
    fn empty_alphabet_is_total() {
        let (_, fst) = corpus::access_management();
        let none = FeaturedSyncSpec::new(vec![], fst.feature_model().clone(), BTreeSet::new()).unwrap();
        assert!(none.missing(&[Product::EMPTY]).is_empty());
    }

    #[test]
    fn overlaps_with_different_types_are_found() {
        let (sys, fst) = corpus::access_management();
        let u = sys.feature_model().universe();
        let products = [u.product(["lock"]).unwrap(), u.product(["unlock"]).unwrap()];
        assert!(fst.overlaps(&products).is_empty());
        let mut rules = fst.rules().to_vec();
        rules.push(SyncRule {
            guard: FeatureExpr::True,
            actions: ActionSelector::All,
            sync: SyncType::new(Interval::at_least(0), Interval::at_least(0)),
        });
        let loose = FeaturedSyncSpec::new(rules, fst.feature_model().clone(), fst.actions().clone()).unwrap();
        assert_eq!(loose.overlaps(&products).len(), 6);
    }

    #[test]
    fn constant_specification() {
        let (_, fst) = corpus::access_management();
        let any = SyncType::new(Interval::at_least(0), Interval::at_least(0));
        let rules = vec![SyncRule { guard: FeatureExpr::True, actions: ActionSelector::All, sync: any }];
        let c = FeaturedSyncSpec::new(rules, fst.feature_model().clone(), fst.actions().clone()).unwrap();
        let lock = fst.feature_model().universe().product(["lock"]).unwrap();
        assert_eq!(c.project(lock).unwrap(), SyncSpec::uniform(fst.actions(), any));
    }
}
