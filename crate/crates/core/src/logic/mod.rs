//! Feature logic: feature universes, products, feature expressions and the
//! satisfiability backends used to reason about them.

mod expr;
mod sat;
mod solver;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use expr::{Feature, FeatureExpr};
pub use sat::Cnf;
pub use solver::{Backend, Logic, QueryStats};

/// Largest feature universe a [`Product`] bitmask can address.
pub const MAX_FEATURES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("feature names must be non-empty")]
    EmptyFeatureName,
    #[error("at most {MAX_FEATURES} features are supported, got {0}")]
    TooManyFeatures(usize),
    #[error("feature model has more than {limit} valid products")]
    TooManyProducts { limit: usize },
}

/// A finite set of features. Features are kept sorted by name and a
/// feature's position is its bit in a [`Product`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Universe {
    names: Vec<Feature>,
    index: BTreeMap<Feature, usize>,
}

impl Universe {
    pub fn new<I, S>(names: I) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut index = BTreeMap::new();
        for name in names {
            let name = name.as_ref();
            if name.is_empty() {
                return Err(LogicError::EmptyFeatureName);
            }
            if index.insert(Feature::new(name), 0).is_some() {
                return Err(LogicError::DuplicateFeature(name.to_string()));
            }
        }
        if index.len() > MAX_FEATURES {
            return Err(LogicError::TooManyFeatures(index.len()));
        }
        let names: Vec<Feature> = index.keys().cloned().collect();
        for (i, f) in names.iter().enumerate() {
            index.insert(f.clone(), i);
        }
        Ok(Universe { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(&Feature::new(name)).copied()
    }

    /// Checks that every variable of `expr` belongs to the universe.
    pub fn check(&self, expr: &FeatureExpr) -> Result<(), LogicError> {
        match expr.variables().into_iter().find(|f| !self.index.contains_key(f)) {
            Some(f) => Err(LogicError::UnknownFeature(f.to_string())),
            None => Ok(()),
        }
    }

    pub fn product<I, S>(&self, selected: I) -> Result<Product, LogicError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u64;
        for name in selected {
            let i =
                self.index_of(name.as_ref()).ok_or_else(|| LogicError::UnknownFeature(name.as_ref().to_string()))?;
            bits |= 1 << i;
        }
        Ok(Product(bits))
    }

    /// Every subset of the universe, in product order.
    pub fn all_products(&self) -> Vec<Product> {
        let n = self.len();
        assert!(n < 32, "refusing to enumerate 2^{n} products");
        let mut all: Vec<Product> = (0..(1u64 << n)).map(Product).collect();
        all.sort();
        all
    }

    pub fn selected<'a>(&'a self, p: Product) -> impl Iterator<Item = &'a Feature> + 'a {
        p.indices().map(move |i| &self.names[i])
    }

    /// Truth value of `expr` when exactly the features in `p` are selected.
    pub fn eval(&self, expr: &FeatureExpr, p: Product) -> Result<bool, LogicError> {
        self.check(expr)?;
        Ok(self.holds(expr, p))
    }

    /// Unchecked evaluation for expressions already validated against this
    /// universe. Unknown variables evaluate to false.
    pub fn holds(&self, expr: &FeatureExpr, p: Product) -> bool {
        expr.eval_with(|f| self.index.get(f).is_some_and(|&i| p.contains(i)))
    }

    /// The expression satisfied by `p` and by no other product.
    pub fn chi_product(&self, p: Product) -> FeatureExpr {
        let positive = (0..self.len()).filter(|&i| p.contains(i)).map(|i| FeatureExpr::Var(self.names[i].clone()));
        let negative =
            (0..self.len()).filter(|&i| !p.contains(i)).map(|i| FeatureExpr::Var(self.names[i].clone()).negate());
        FeatureExpr::and(positive.chain(negative))
    }

    /// The expression satisfied by exactly the products in `products`.
    pub fn chi_set(&self, products: &[Product]) -> FeatureExpr {
        FeatureExpr::or(products.iter().map(|&p| self.chi_product(p)))
    }

    pub fn display_product(&self, p: Product) -> String {
        let names: Vec<&str> = self.selected(p).map(|f| f.as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// A set of selected features, stored as a bitmask over a [`Universe`].
///
/// Products order lexicographically by their sorted feature names, which
/// coincides with comparing the sorted index sequences.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Product(u64);

impl Product {
    pub const EMPTY: Product = Product(0);

    pub fn from_bits(bits: u64) -> Self {
        Product(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 & (1 << index) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

impl Ord for Product {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(other.indices())
    }
}

impl PartialOrd for Product {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

/// A feature universe together with the expression selecting its valid
/// products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    universe: Universe,
    expr: FeatureExpr,
}

impl FeatureModel {
    pub fn new(universe: Universe, expr: FeatureExpr) -> Result<Self, LogicError> {
        universe.check(&expr)?;
        Ok(FeatureModel { universe, expr })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn expr(&self) -> &FeatureExpr {
        &self.expr
    }

    pub fn is_valid(&self, p: Product) -> bool {
        p.bits() >> self.universe.len() == 0 && self.universe.holds(&self.expr, p)
    }
}
