//! Tseitin encoding of feature expressions into CNF and a small DPLL solver.

use super::{FeatureExpr, Product, Universe};

/// Literal: variable index shifted left by one, low bit set for negation.
type Lit = u32;

fn lit(var: usize, negated: bool) -> Lit {
    ((var as u32) << 1) | negated as u32
}

fn var_of(l: Lit) -> usize {
    (l >> 1) as usize
}

fn negate(l: Lit) -> Lit {
    l ^ 1
}

/// A CNF whose first `features` variables are the universe's features;
/// the remaining variables are Tseitin auxiliaries.
#[derive(Debug, Clone)]
pub struct Cnf {
    features: usize,
    vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    /// Encodes `expr` so that the CNF is satisfiable iff `expr` is, with the
    /// feature variables of every model forming a satisfying product.
    pub fn encode(universe: &Universe, expr: &FeatureExpr) -> Self {
        let mut cnf = Cnf { features: universe.len(), vars: universe.len(), clauses: Vec::new() };
        let root = cnf.encode_expr(universe, expr);
        cnf.clauses.push(vec![root]);
        cnf
    }

    pub fn num_vars(&self) -> usize {
        self.vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    fn fresh(&mut self) -> usize {
        self.vars += 1;
        self.vars - 1
    }

    fn encode_expr(&mut self, universe: &Universe, expr: &FeatureExpr) -> Lit {
        match expr {
            FeatureExpr::True => self.encode_nary(universe, &[], true),
            FeatureExpr::False => self.encode_nary(universe, &[], false),
            FeatureExpr::Var(f) => {
                let i = universe.index_of(f.as_str()).unwrap_or_else(|| panic!("feature `{f}` is not in the universe"));
                lit(i, false)
            }
            FeatureExpr::Not(e) => negate(self.encode_expr(universe, e)),
            FeatureExpr::And(es) => self.encode_nary(universe, es, true),
            FeatureExpr::Or(es) => self.encode_nary(universe, es, false),
            FeatureExpr::Implies(a, b) => {
                let a = self.encode_expr(universe, a);
                let b = self.encode_expr(universe, b);
                self.define_or(&[negate(a), b])
            }
            FeatureExpr::Iff(a, b) => {
                let a = self.encode_expr(universe, a);
                let b = self.encode_expr(universe, b);
                self.define_iff(a, b)
            }
            FeatureExpr::Xor(a, b) => {
                let a = self.encode_expr(universe, a);
                let b = self.encode_expr(universe, b);
                negate(self.define_iff(a, b))
            }
        }
    }

    fn encode_nary(&mut self, universe: &Universe, es: &[FeatureExpr], conjunction: bool) -> Lit {
        let lits: Vec<Lit> = es.iter().map(|e| self.encode_expr(universe, e)).collect();
        if conjunction {
            // x <-> AND l  ==  !x <-> OR !l
            let negated: Vec<Lit> = lits.iter().map(|&l| negate(l)).collect();
            negate(self.define_or(&negated))
        } else {
            self.define_or(&lits)
        }
    }

    fn define_or(&mut self, lits: &[Lit]) -> Lit {
        let x = lit(self.fresh(), false);
        let mut long = vec![negate(x)];
        for &l in lits {
            self.clauses.push(vec![x, negate(l)]);
            long.push(l);
        }
        self.clauses.push(long);
        x
    }

    fn define_iff(&mut self, a: Lit, b: Lit) -> Lit {
        let x = lit(self.fresh(), false);
        self.clauses.push(vec![negate(x), negate(a), b]);
        self.clauses.push(vec![negate(x), a, negate(b)]);
        self.clauses.push(vec![x, a, b]);
        self.clauses.push(vec![x, negate(a), negate(b)]);
        x
    }

    /// Adds a clause excluding `p` as an assignment of the feature variables.
    pub fn block(&mut self, p: Product) {
        let clause = (0..self.features).map(|i| lit(i, p.contains(i))).collect();
        self.clauses.push(clause);
    }

    /// Runs DPLL; returns the feature part of a model if one exists.
    /// Feature variables left unassigned by the search are set to false.
    pub fn solve(&self) -> Option<Product> {
        self.solve_with(&[])
    }

    /// Like [`Cnf::solve`], with the given features fixed to the given
    /// values.
    pub fn solve_with(&self, assumptions: &[(usize, bool)]) -> Option<Product> {
        let mut solver = Dpll { assignment: vec![None; self.vars], trail: Vec::new(), clauses: &self.clauses };
        for &(i, value) in assumptions {
            assert!(i < self.features, "assumption on a non-feature variable");
            match solver.assignment[i] {
                Some(v) if v != value => return None,
                _ => solver.assign(lit(i, !value)),
            }
        }
        if !solver.search() {
            return None;
        }
        let mut bits = 0u64;
        for i in 0..self.features {
            if solver.assignment[i] == Some(true) {
                bits |= 1 << i;
            }
        }
        Some(Product::from_bits(bits))
    }
}

struct Dpll<'a> {
    assignment: Vec<Option<bool>>,
    trail: Vec<usize>,
    clauses: &'a [Vec<Lit>],
}

enum ClauseState {
    Satisfied,
    Conflict,
    Unit(Lit),
    Open,
}

impl Dpll<'_> {
    fn value(&self, l: Lit) -> Option<bool> {
        self.assignment[var_of(l)].map(|v| v != (l & 1 == 1))
    }

    fn assign(&mut self, l: Lit) {
        self.assignment[var_of(l)] = Some(l & 1 == 0);
        self.trail.push(var_of(l));
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.assignment[v] = None;
        }
    }

    fn clause_state(&self, clause: &[Lit]) -> ClauseState {
        let mut unassigned = None;
        let mut count = 0;
        for &l in clause {
            match self.value(l) {
                Some(true) => return ClauseState::Satisfied,
                Some(false) => {}
                None => {
                    count += 1;
                    unassigned = Some(l);
                }
            }
        }
        match (count, unassigned) {
            (0, _) => ClauseState::Conflict,
            (1, Some(l)) => ClauseState::Unit(l),
            _ => ClauseState::Open,
        }
    }

    /// Unit propagation to fixpoint. Returns false on conflict, otherwise
    /// the first literal of some open clause to branch on (if any).
    fn propagate(&mut self) -> Result<Option<Lit>, ()> {
        loop {
            let mut changed = false;
            let mut branch = None;
            for clause in self.clauses {
                match self.clause_state(clause) {
                    ClauseState::Satisfied => {}
                    ClauseState::Conflict => return Err(()),
                    ClauseState::Unit(l) => {
                        self.assign(l);
                        changed = true;
                    }
                    ClauseState::Open => {
                        if branch.is_none() {
                            branch = clause.iter().copied().find(|&l| self.value(l).is_none());
                        }
                    }
                }
            }
            if !changed {
                return Ok(branch);
            }
        }
    }

    fn search(&mut self) -> bool {
        let mark = self.trail.len();
        let branch = match self.propagate() {
            Err(()) => {
                self.undo(mark);
                return false;
            }
            Ok(None) => return true,
            Ok(Some(l)) => l,
        };
        for choice in [branch, negate(branch)] {
            let inner = self.trail.len();
            self.assign(choice);
            if self.search() {
                return true;
            }
            self.undo(inner);
        }
        self.undo(mark);
        false
    }
}
