use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::sat::Cnf;
use super::{FeatureExpr, FeatureModel, LogicError, Product, Universe};

/// Universes up to this size are enumerated by [`Backend::Auto`].
pub const ENUMERATION_LIMIT: usize = 16;

/// Satisfiability backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Enumeration for small universes, SAT above [`ENUMERATION_LIMIT`].
    #[default]
    Auto,
    /// Exhaustive enumeration of all assignments.
    Enumerative,
    /// Tseitin CNF plus DPLL.
    Sat,
    /// Runs both and counts disagreements in [`QueryStats`].
    CrossCheck,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Backend::Auto),
            "enumerative" | "enum" => Ok(Backend::Enumerative),
            "sat" => Ok(Backend::Sat),
            "cross-check" | "crosscheck" => Ok(Backend::CrossCheck),
            other => Err(format!("unknown backend `{other}` (expected auto, enumerative, sat or cross-check)")),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Auto => "auto",
            Backend::Enumerative => "enumerative",
            Backend::Sat => "sat",
            Backend::CrossCheck => "cross-check",
        })
    }
}

/// Counters for the queries answered by a [`Logic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueryStats {
    pub queries: usize,
    pub mismatches: usize,
}

/// Satisfiability, entailment and product enumeration over one universe.
#[derive(Debug)]
pub struct Logic {
    universe: Universe,
    backend: Backend,
    queries: AtomicUsize,
    mismatches: AtomicUsize,
}

impl Clone for Logic {
    fn clone(&self) -> Self {
        Logic {
            universe: self.universe.clone(),
            backend: self.backend,
            queries: AtomicUsize::new(self.queries.load(Ordering::Relaxed)),
            mismatches: AtomicUsize::new(self.mismatches.load(Ordering::Relaxed)),
        }
    }
}

impl Logic {
    pub fn new(universe: Universe, backend: Backend) -> Self {
        Logic { universe, backend, queries: AtomicUsize::new(0), mismatches: AtomicUsize::new(0) }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn stats(&self) -> QueryStats {
        QueryStats {
            queries: self.queries.load(Ordering::Relaxed),
            mismatches: self.mismatches.load(Ordering::Relaxed),
        }
    }

    fn enumerate(&self) -> bool {
        match self.backend {
            Backend::Auto => self.universe.len() <= ENUMERATION_LIMIT,
            Backend::Enumerative => true,
            Backend::Sat | Backend::CrossCheck => false,
        }
    }

    /// Some product satisfying `expr`, if any. The enumerative route returns
    /// the least model in product order; the SAT route returns whichever
    /// model the search reaches first.
    pub fn find_model(&self, expr: &FeatureExpr) -> Option<Product> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        match self.backend {
            Backend::CrossCheck => {
                let by_enum = enumerate_model(&self.universe, expr);
                let by_sat = Cnf::encode(&self.universe, expr).solve();
                if by_enum.is_some() != by_sat.is_some() || by_sat.is_some_and(|p| !self.universe.holds(expr, p)) {
                    self.mismatches.fetch_add(1, Ordering::Relaxed);
                }
                by_enum
            }
            _ if self.enumerate() => enumerate_model(&self.universe, expr),
            _ => Cnf::encode(&self.universe, expr).solve(),
        }
    }

    pub fn is_satisfiable(&self, expr: &FeatureExpr) -> bool {
        self.find_model(expr).is_some()
    }

    /// Every product satisfying `lhs` satisfies `rhs`.
    pub fn entails(&self, lhs: &FeatureExpr, rhs: &FeatureExpr) -> bool {
        !self.is_satisfiable(&FeatureExpr::and([lhs.clone(), rhs.clone().negate()]))
    }

    pub fn equivalent(&self, a: &FeatureExpr, b: &FeatureExpr) -> bool {
        self.entails(a, b) && self.entails(b, a)
    }

    /// All products satisfying `expr`, in product order, failing once more
    /// than `limit` are found.
    pub fn models(&self, expr: &FeatureExpr, limit: usize) -> Result<Vec<Product>, LogicError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        match self.backend {
            Backend::CrossCheck => {
                let by_enum = enumerate_models(&self.universe, expr, limit);
                let by_sat = sat_models(&self.universe, expr, limit);
                if by_enum != by_sat {
                    self.mismatches.fetch_add(1, Ordering::Relaxed);
                }
                by_enum
            }
            _ if self.enumerate() => enumerate_models(&self.universe, expr, limit),
            _ => sat_models(&self.universe, expr, limit),
        }
    }

    /// The valid products of a feature model.
    pub fn valid_products(&self, fm: &FeatureModel, limit: usize) -> Result<Vec<Product>, LogicError> {
        debug_assert_eq!(fm.universe(), &self.universe);
        self.models(fm.expr(), limit)
    }
}

fn enumerate_model(universe: &Universe, expr: &FeatureExpr) -> Option<Product> {
    universe.all_products().into_iter().find(|&p| universe.holds(expr, p))
}

fn enumerate_models(universe: &Universe, expr: &FeatureExpr, limit: usize) -> Result<Vec<Product>, LogicError> {
    let mut out = Vec::new();
    for p in universe.all_products() {
        if universe.holds(expr, p) {
            if out.len() == limit {
                return Err(LogicError::TooManyProducts { limit });
            }
            out.push(p);
        }
    }
    Ok(out)
}

fn sat_models(universe: &Universe, expr: &FeatureExpr, limit: usize) -> Result<Vec<Product>, LogicError> {
    let cnf = Cnf::encode(universe, expr);
    let mut out = Vec::new();
    if let Some(model) = cnf.solve() {
        split_models(&cnf, universe.len(), &mut Vec::new(), model, limit, &mut out)?;
    }
    out.sort();
    Ok(out)
}

/// Enumerates the models extending `fixed` by splitting on one feature at a
/// time; `model` is a known model extending `fixed`, which covers the branch
/// agreeing with it without another solver call.
fn split_models(
    cnf: &Cnf,
    features: usize,
    fixed: &mut Vec<(usize, bool)>,
    model: Product,
    limit: usize,
    out: &mut Vec<Product>,
) -> Result<(), LogicError> {
    let i = fixed.len();
    if i == features {
        if out.len() == limit {
            return Err(LogicError::TooManyProducts { limit });
        }
        out.push(model);
        return Ok(());
    }
    let value = model.contains(i);
    fixed.push((i, value));
    split_models(cnf, features, fixed, model, limit, out)?;
    fixed.pop();
    fixed.push((i, !value));
    if let Some(other) = cnf.solve_with(fixed) {
        split_models(cnf, features, fixed, other, limit, out)?;
    }
    fixed.pop();
    Ok(())
}
