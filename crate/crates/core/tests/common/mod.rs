//! Shared helpers for the integration tests: a seeded generator of small
//! random families and independent reference computations.

#![allow(dead_code)]

use std::collections::BTreeSet;

use feta::corpus;
use feta::dsl::{self, ElaborateOptions, Spec};
use feta::logic::{Backend, FeatureExpr, Product, Universe};
use feta::system::Limits;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of random families the suites run through.
pub const RANDOM_INSTANCES: u64 = 200;

/// Bounds on the generated families.
pub const MAX_COMPONENTS: usize = 3;
pub const MAX_STATES: usize = 3;
pub const MAX_ACTIONS: usize = 3;
pub const MAX_FEATURES: usize = 3;

pub fn random_expr(rng: &mut impl Rng, features: &[String], depth: u32) -> FeatureExpr {
    if depth == 0 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..10) {
            0 => FeatureExpr::True,
            1 => FeatureExpr::False,
            _ => FeatureExpr::var(features.choose(rng).expect("at least one feature")),
        };
    }
    let mut sub = || random_expr(rng, features, depth - 1);
    let (a, b) = (sub(), sub());
    match rng.gen_range(0..6) {
        0 => a.negate(),
        1 => FeatureExpr::and([a, b]),
        2 => FeatureExpr::or([a, b]),
        3 => FeatureExpr::implies(a, b),
        4 => FeatureExpr::iff(a, b),
        _ => FeatureExpr::xor(a, b),
    }
}

fn random_sync_type(rng: &mut impl Rng) -> String {
    let senders = ["[1,1]", "[1,1]", "[1,*]", "[1,2]", "[0,1]", "[2,2]"];
    let receivers = ["[1,*]", "[1,1]", "[0,*]", "[0,1]", "[2,*]", "[1,2]", "[0,0]"];
    format!("{} -> {}", senders.choose(rng).unwrap(), receivers.choose(rng).unwrap())
}

fn guard(rng: &mut impl Rng, features: &[String]) -> String {
    if rng.gen_bool(0.5) {
        String::new()
    } else {
        format!(" when {}", random_expr(rng, features, 2))
    }
}

/// Source text of a random family: at most [`MAX_COMPONENTS`] components
/// with at most [`MAX_STATES`] states each, over at most [`MAX_ACTIONS`]
/// actions and [`MAX_FEATURES`] features.
pub fn random_source(rng: &mut impl Rng) -> String {
    let features: Vec<String> = (0..rng.gen_range(1..=MAX_FEATURES)).map(|i| format!("f{i}")).collect();
    let actions: Vec<String> = (0..rng.gen_range(1..=MAX_ACTIONS)).map(|i| format!("a{i}")).collect();
    let fm = if rng.gen_bool(0.3) { FeatureExpr::True } else { random_expr(rng, &features, 2) };
    let mut text = format!("features {};\nfeature_model {fm};\n", features.join(", "));

    let n = rng.gen_range(1..=MAX_COMPONENTS);
    let mut used = BTreeSet::new();
    for c in 0..n {
        let (mut inputs, mut outputs) = (Vec::new(), Vec::new());
        for a in &actions {
            match rng.gen_range(0..5) {
                0 | 1 => inputs.push(a.clone()),
                2 | 3 => outputs.push(a.clone()),
                _ => {}
            }
        }
        let states = rng.gen_range(1..=MAX_STATES);
        text += &format!("component C{c} {{\n");
        if !inputs.is_empty() {
            text += &format!("  input {};\n", inputs.join(", "));
        }
        if !outputs.is_empty() {
            text += &format!("  output {};\n", outputs.join(", "));
        }
        text += "  init q0;\n";
        let alphabet: Vec<(&String, &str)> =
            inputs.iter().map(|a| (a, "?")).chain(outputs.iter().map(|a| (a, "!"))).collect();
        used.extend(inputs.iter().chain(&outputs).cloned());
        let mut seen = BTreeSet::new();
        if !alphabet.is_empty() {
            for _ in 0..rng.gen_range(1..=2 * states + 1) {
                let (a, dir) = *alphabet.choose(rng).expect("non-empty");
                let (s, t) = (rng.gen_range(0..states), rng.gen_range(0..states));
                if seen.insert((s, a.clone(), t)) {
                    text += &format!("  q{s} -> q{t} by {a}{dir}{};\n", guard(rng, &features));
                }
            }
        }
        if states > 1 {
            let all: Vec<String> = (0..states).map(|s| format!("q{s}")).collect();
            text += &format!("  states {};\n", all.join(", "));
        }
        text += "}\n";
    }
    let members: Vec<String> = (0..n).map(|c| format!("c{c}: C{c}")).collect();
    text += &format!("system Rand = {{ {} }};\nsync {{\n", members.join(", "));
    let used: Vec<String> = used.into_iter().collect();
    for _ in 0..rng.gen_range(0..=2) {
        let Some(a) = used.choose(rng) else { break };
        text += &format!("  {a}: {}{};\n", random_sync_type(rng), guard(rng, &features));
    }
    text += &format!("  default {};\n}}\n", random_sync_type(rng));
    text
}

pub fn options() -> ElaborateOptions {
    ElaborateOptions { backend: Backend::CrossCheck, limits: Limits::default(), strict: false }
}

pub fn elaborate(text: &str) -> Spec {
    let doc = dsl::parse(text).unwrap_or_else(|d| panic!("generated text does not parse: {d:?}\n{text}"));
    dsl::elaborate(&doc, &options()).unwrap_or_else(|d| panic!("generated text does not elaborate: {d:?}\n{text}"))
}

/// The random family for `seed`; draws again until the feature model has a
/// valid product.
pub fn random_spec(seed: u64) -> (String, Spec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let text = random_source(&mut rng);
        let spec = elaborate(&text);
        if !spec.products.is_empty() {
            return (text, spec);
        }
    }
}

/// The running example, elaborated with the cross-checking backend.
pub fn running_example() -> Spec {
    elaborate(corpus::ACCESS_MANAGEMENT)
}

/// Truth value of `expr` under `p`, by direct recursion over the syntax.
pub fn reference_eval(universe: &Universe, expr: &FeatureExpr, p: Product) -> bool {
    let value = |e: &FeatureExpr| reference_eval(universe, e, p);
    match expr {
        FeatureExpr::True => true,
        FeatureExpr::False => false,
        FeatureExpr::Var(f) => p.contains(universe.index_of(f.as_str()).expect("declared feature")),
        FeatureExpr::Not(e) => !value(e),
        FeatureExpr::And(es) => es.iter().all(value),
        FeatureExpr::Or(es) => es.iter().any(value),
        FeatureExpr::Implies(a, b) => !value(a) || value(b),
        FeatureExpr::Iff(a, b) => value(a) == value(b),
        FeatureExpr::Xor(a, b) => value(a) != value(b),
    }
}

/// All products over a universe of `n` features, by counting.
pub fn every_product(n: usize) -> Vec<Product> {
    (0..1u64 << n).map(Product::from_bits).collect()
}

/// Feature names `f0 .. f{n-1}`.
pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

/// Expressions over the features `f0 .. f{n-1}`.
pub fn expr_strategy(n: usize) -> impl Strategy<Value = FeatureExpr> {
    let leaf = prop_oneof![
        1 => Just(FeatureExpr::True),
        1 => Just(FeatureExpr::False),
        6 => (0..n).prop_map(|i| FeatureExpr::var(&format!("f{i}"))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(FeatureExpr::negate),
            prop::collection::vec(inner.clone(), 0..4).prop_map(FeatureExpr::and),
            prop::collection::vec(inner.clone(), 0..4).prop_map(FeatureExpr::or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FeatureExpr::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FeatureExpr::iff(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| FeatureExpr::xor(a, b)),
        ]
    })
}
