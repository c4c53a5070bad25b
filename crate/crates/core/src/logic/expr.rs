use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::syntax::{self, SyntaxError};

/// A feature name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature(Arc<str>);

impl Feature {
    pub fn new(name: &str) -> Self {
        Feature(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Feature {
    fn from(name: &str) -> Self {
        Feature::new(name)
    }
}

/// Boolean expression over features.
///
/// Expressions are kept exactly as built: nothing is simplified on
/// construction, so `lock && lock && lock` stays a three-way conjunction.
/// Use [`crate::logic::Logic::equivalent`] for semantic comparisons.
///
/// `And(vec![])` is `true` and `Or(vec![])` is `false`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FeatureExpr {
    True,
    False,
    Var(Feature),
    Not(Box<FeatureExpr>),
    And(Vec<FeatureExpr>),
    Or(Vec<FeatureExpr>),
    Implies(Box<FeatureExpr>, Box<FeatureExpr>),
    Iff(Box<FeatureExpr>, Box<FeatureExpr>),
    Xor(Box<FeatureExpr>, Box<FeatureExpr>),
}

impl FeatureExpr {
    pub fn var(name: &str) -> Self {
        FeatureExpr::Var(Feature::new(name))
    }

    pub fn negate(self) -> Self {
        FeatureExpr::Not(Box::new(self))
    }

    pub fn and<I: IntoIterator<Item = FeatureExpr>>(parts: I) -> Self {
        FeatureExpr::And(parts.into_iter().collect())
    }

    pub fn or<I: IntoIterator<Item = FeatureExpr>>(parts: I) -> Self {
        FeatureExpr::Or(parts.into_iter().collect())
    }

    pub fn implies(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        FeatureExpr::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        FeatureExpr::Iff(Box::new(lhs), Box::new(rhs))
    }

    pub fn xor(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        FeatureExpr::Xor(Box::new(lhs), Box::new(rhs))
    }

    /// All feature variables occurring in the expression.
    pub fn variables(&self) -> BTreeSet<Feature> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Feature>) {
        match self {
            FeatureExpr::True | FeatureExpr::False => {}
            FeatureExpr::Var(f) => {
                out.insert(f.clone());
            }
            FeatureExpr::Not(e) => e.collect_variables(out),
            FeatureExpr::And(es) | FeatureExpr::Or(es) => {
                for e in es {
                    e.collect_variables(out);
                }
            }
            FeatureExpr::Implies(a, b) | FeatureExpr::Iff(a, b) | FeatureExpr::Xor(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }

    /// Evaluates under an arbitrary assignment. Callers that hold a
    /// [`crate::logic::Universe`] should prefer its checked evaluation.
    pub fn eval_with<F: Fn(&Feature) -> bool + Copy>(&self, value: F) -> bool {
        match self {
            FeatureExpr::True => true,
            FeatureExpr::False => false,
            FeatureExpr::Var(f) => value(f),
            FeatureExpr::Not(e) => !e.eval_with(value),
            FeatureExpr::And(es) => es.iter().all(|e| e.eval_with(value)),
            FeatureExpr::Or(es) => es.iter().any(|e| e.eval_with(value)),
            FeatureExpr::Implies(a, b) => !a.eval_with(value) || b.eval_with(value),
            FeatureExpr::Iff(a, b) => a.eval_with(value) == b.eval_with(value),
            FeatureExpr::Xor(a, b) => a.eval_with(value) != b.eval_with(value),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            FeatureExpr::True | FeatureExpr::False | FeatureExpr::Var(_) => 1,
            FeatureExpr::Not(e) => 1 + e.size(),
            FeatureExpr::And(es) | FeatureExpr::Or(es) => 1 + es.iter().map(|e| e.size()).sum::<usize>(),
            FeatureExpr::Implies(a, b) | FeatureExpr::Iff(a, b) | FeatureExpr::Xor(a, b) => 1 + a.size() + b.size(),
        }
    }

    // Binding strength, higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            FeatureExpr::Iff(..) => 1,
            FeatureExpr::Implies(..) => 2,
            FeatureExpr::Or(es) if es.len() >= 2 => 3,
            FeatureExpr::Xor(..) => 4,
            FeatureExpr::And(es) if es.len() >= 2 => 5,
            FeatureExpr::Not(_) => 6,
            FeatureExpr::And(es) | FeatureExpr::Or(es) if es.len() == 1 => es[0].precedence(),
            _ => 7,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, child: &FeatureExpr, min: u8) -> fmt::Result {
        // Children of the same n-ary operator are parenthesised so that a
        // printed expression parses back to the same tree.
        let same_nary = matches!(
            (self, child),
            (FeatureExpr::And(_), FeatureExpr::And(c)) | (FeatureExpr::Or(_), FeatureExpr::Or(c)) if c.len() >= 2
        );
        if child.precedence() < min || same_nary {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for FeatureExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureExpr::True => f.write_str("true"),
            FeatureExpr::False => f.write_str("false"),
            FeatureExpr::Var(v) => write!(f, "{v}"),
            FeatureExpr::Not(e) => {
                f.write_str("!")?;
                self.write_child(f, e, 6)
            }
            FeatureExpr::And(es) | FeatureExpr::Or(es) => {
                let (op, empty) = match self {
                    FeatureExpr::And(_) => (" && ", "true"),
                    _ => (" || ", "false"),
                };
                match es.len() {
                    0 => f.write_str(empty),
                    1 => write!(f, "{}", es[0]),
                    _ => {
                        let min = self.precedence() + 1;
                        for (i, e) in es.iter().enumerate() {
                            if i > 0 {
                                f.write_str(op)?;
                            }
                            self.write_child(f, e, min)?;
                        }
                        Ok(())
                    }
                }
            }
            // `xor` and `<->` are left-associative, `->` is right-associative.
            FeatureExpr::Xor(a, b) => {
                self.write_child(f, a, 4)?;
                f.write_str(" xor ")?;
                self.write_child(f, b, 5)
            }
            FeatureExpr::Implies(a, b) => {
                self.write_child(f, a, 3)?;
                f.write_str(" -> ")?;
                self.write_child(f, b, 2)
            }
            FeatureExpr::Iff(a, b) => {
                self.write_child(f, a, 1)?;
                f.write_str(" <-> ")?;
                self.write_child(f, b, 2)
            }
        }
    }
}

impl FromStr for FeatureExpr {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        syntax::parse_expr(s)
    }
}

impl Serialize for FeatureExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
