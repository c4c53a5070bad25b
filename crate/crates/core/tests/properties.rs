//! Property tests over random formulas and random families.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use feta::dsl;
use feta::featured::{
    check_compliance_unfolding, check_family_receptiveness, check_requirement_correspondence, symbolic_reachability,
    Family, FeaturedStatus,
};
use feta::logic::{Backend, Cnf, FeatureExpr, FeatureModel, Logic, Product, Universe};
use feta::model::{Component, Fts};
use feta::receptiveness::{check_req, derive_reqs, output_enabled, receptiveness_verdict, Mode, Status};
use feta::sync::FeaturedSyncSpec;
use feta::system::{Limits, SystemState};
use feta::team::{build_eta, build_feta, check_projection_commutes, Eta, Triple};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn universe(n: usize) -> Universe {
    Universe::new(common::names(n)).unwrap()
}

fn triples(lts: &Eta) -> BTreeSet<Triple> {
    lts.edges().iter().map(|e| (lts.state(e.source).clone(), e.label.clone(), lts.state(e.target).clone())).collect()
}

fn sized_expr(max: usize) -> impl Strategy<Value = (usize, FeatureExpr)> {
    (1..=max).prop_flat_map(|n| (Just(n), common::expr_strategy(n)))
}

proptest! {
    #[test]
    fn product_formula_characterises_exactly_its_product(n in 0usize..=5, p in any::<u64>(), q in any::<u64>()) {
        let u = universe(n);
        let mask = (1u64 << n) - 1;
        let (p, q) = (Product::from_bits(p & mask), Product::from_bits(q & mask));
        let chi = u.chi_product(p);
        prop_assert!(u.holds(&chi, p));
        prop_assert_eq!(u.holds(&chi, q), p == q);
    }

    #[test]
    fn set_formula_characterises_exactly_its_set(n in 0usize..=4, members in any::<u16>()) {
        let u = universe(n);
        let all = common::every_product(n);
        let set: Vec<Product> = all.iter().copied().filter(|p| members >> p.bits() & 1 == 1).collect();
        let chi = u.chi_set(&set);
        for &q in &all {
            prop_assert_eq!(common::reference_eval(&u, &chi, q), set.contains(&q));
        }
    }

    #[test]
    fn valid_products_match_enumeration((n, fm) in sized_expr(12)) {
        let u = universe(n);
        let expected: Vec<Product> = {
            let mut ps: Vec<Product> =
                common::every_product(n).into_iter().filter(|&p| common::reference_eval(&u, &fm, p)).collect();
            ps.sort();
            ps
        };
        let model = FeatureModel::new(u.clone(), fm).unwrap();
        for backend in [Backend::Enumerative, Backend::Sat] {
            let logic = Logic::new(u.clone(), backend);
            prop_assert_eq!(&logic.valid_products(&model, usize::MAX).unwrap(), &expected);
        }
    }

    #[test]
    fn entailment_is_unsatisfiability_of_the_difference((n, a) in sized_expr(6), seed in any::<u64>()) {
        let u = universe(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = common::random_expr(&mut rng, &common::names(n), 3);
        let logic = Logic::new(u, Backend::CrossCheck);
        let diff = FeatureExpr::and([a.clone(), b.clone().negate()]);
        prop_assert_eq!(logic.entails(&a, &b), !logic.is_satisfiable(&diff));
        prop_assert_eq!(logic.stats().mismatches, 0);
    }

    #[test]
    fn cnf_models_satisfy_the_formula((n, e) in sized_expr(8)) {
        let u = universe(n);
        let sat = Cnf::encode(&u, &e).solve();
        let expected = common::every_product(n).into_iter().any(|p| common::reference_eval(&u, &e, p));
        prop_assert_eq!(sat.is_some(), expected);
        if let Some(p) = sat {
            prop_assert!(common::reference_eval(&u, &e, p));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn backends_agree_on_satisfiability((n, e) in sized_expr(10)) {
        let u = universe(n);
        let enumerative = Logic::new(u.clone(), Backend::Enumerative).is_satisfiable(&e);
        let sat = Logic::new(u, Backend::Sat).is_satisfiable(&e);
        prop_assert_eq!(enumerative, sat);
    }
}

/// Properties checked on each random family.
fn family_properties(seed: u64) -> Result<(), TestCaseError> {
    let (text, spec) = common::random_spec(seed);
    let limits = Limits::default();
    let u = spec.universe();
    let fm = spec.feature_model().expr();

    // Composition.
    let comp = spec.system.compose(&limits).unwrap();
    let sizes: u128 = spec.system.components().iter().map(|c| c.automaton().num_states() as u128).product();
    prop_assert_eq!(comp.lts.num_states() as u128, sizes, "{}", text);
    for q in 0..comp.lts.num_states() {
        let state = comp.lts.state(q);
        let direct: BTreeSet<Triple> = spec
            .system
            .successors(state, &limits)
            .unwrap()
            .into_iter()
            .map(|t| (t.source, t.label, t.target))
            .collect();
        let composed: BTreeSet<Triple> = comp
            .lts
            .outgoing(q)
            .iter()
            .map(|&e| {
                let edge = comp.lts.edge(e);
                (state.clone(), edge.label.clone(), comp.lts.state(edge.target).clone())
            })
            .collect();
        prop_assert_eq!(direct, composed, "{}", text);
    }
    for e in comp.lts.edges() {
        let l = &e.label;
        prop_assert!(!l.participants().is_empty());
        prop_assert!(!l.senders.intersects(l.receivers));
        for i in 0..spec.system.len() {
            let c = spec.system.component(i);
            let local = comp.lts.state(e.source).local(i);
            if l.senders.contains(i) {
                prop_assert!(c.is_output(&l.action) && c.automaton().enabled(local, &l.action));
            } else if l.receivers.contains(i) {
                prop_assert!(c.is_input(&l.action) && c.automaton().enabled(local, &l.action));
            } else {
                prop_assert_eq!(comp.lts.state(e.target).local(i), local);
            }
        }
    }

    // Synchronisation rules.
    for &p in &spec.products {
        let st = spec.sync.project(p).unwrap();
        for a in spec.system.actions() {
            prop_assert_eq!(Some(&spec.sync.lookup(p, a).unwrap()), st.get(a));
        }
    }
    if spec.sync.overlaps(&spec.products).is_empty() {
        let mut rules = spec.sync.rules().to_vec();
        rules.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled =
            FeaturedSyncSpec::new(rules, Arc::clone(spec.feature_model()), spec.sync.actions().clone()).unwrap();
        for &p in &spec.products {
            for a in spec.system.actions() {
                prop_assert_eq!(spec.sync.lookup(p, a), shuffled.lookup(p, a));
            }
        }
    }

    // Featured team and projection.
    let feta = build_feta(&spec.system, &spec.sync, &spec.products, &limits).unwrap();
    let lts = feta.lts();
    for e in 0..lts.edges().len() {
        prop_assert!(spec.logic.entails(feta.gamma(e), fm), "{}", text);
        let label = &lts.edge(e).label;
        for &p in &spec.products {
            let admitted = spec.sync.lookup(p, &label.action).unwrap().admits(label);
            prop_assert_eq!(u.holds(feta.gamma(e), p), u.holds(feta.gamma_hat(e), p) && admitted, "{}", text);
        }
    }
    let system_triples = triples(&comp.lts);
    for &p in &spec.products {
        let projected = feta.project(p).unwrap();
        let expected: BTreeSet<Triple> =
            (0..lts.edges().len()).filter(|&e| u.holds(feta.gamma(e), p)).map(|e| feta.triple(e)).collect();
        prop_assert_eq!(&triples(&projected), &expected);
        let again = Fts::unguarded(projected.clone(), Arc::clone(spec.feature_model())).project(p).unwrap();
        prop_assert_eq!(triples(&again), triples(&projected));
        for q in 0..projected.num_states() {
            for a in projected.actions() {
                if projected.enabled(q, a) {
                    prop_assert!(feta.fts().enabled(q, a));
                }
            }
        }
        let c = check_projection_commutes(&spec.system, &spec.sync, &spec.products, p, &limits).unwrap();
        prop_assert!(c.holds(), "projection differs for {}: {:?}\n{}", u.display_product(p), c, text);

        let sys = spec.system.project(p).unwrap();
        let st = spec.sync.project(p).unwrap();
        let eta = build_eta(&sys, &st, &limits).unwrap();
        prop_assert!(triples(&eta).is_subset(&system_triples));

        // Product-level receptiveness.
        for r in derive_reqs(&eta, &st, &sys, &limits).unwrap() {
            let locals = eta.state(r.state).locals();
            let enabled = output_enabled(&sys, locals, &r.action);
            prop_assert!(!r.senders.is_empty() && r.senders.iter().all(|j| enabled.contains(&j)));
            prop_assert!(st.get(&r.action).unwrap().demands_reception(r.senders.len()));
            let strict = check_req(&eta, &r, Mode::Strict);
            let weak = check_req(&eta, &r, Mode::Weak);
            if strict.status == Status::Compliant {
                prop_assert_eq!(weak.status, Status::Compliant);
            }
            if let Some(w) = &weak.witness {
                let mut at = r.state;
                let mut visited = BTreeSet::from([at]);
                for &e in &w.prefix {
                    let edge = eta.edge(e);
                    prop_assert_eq!(edge.source, at);
                    prop_assert!(!edge.label.participants().intersects(r.senders));
                    at = edge.target;
                    prop_assert!(visited.insert(at), "witness revisits a state");
                }
                let step = eta.edge(w.step);
                prop_assert_eq!(step.source, at);
                prop_assert!(step.label.senders == r.senders && step.label.action == r.action);
                prop_assert!(!step.label.receivers.is_empty());
            }
        }
        if receptiveness_verdict(&eta, &st, &sys, Mode::Strict, &limits).unwrap().holds() {
            prop_assert!(receptiveness_verdict(&eta, &st, &sys, Mode::Weak, &limits).unwrap().holds());
        }
    }

    // Family-level receptiveness.
    let family = Family::new(&spec.system, &spec.sync, &feta, &spec.logic, &spec.products, &limits).unwrap();
    for &p in &spec.products {
        let projected = feta.project(p).unwrap();
        let reachable: BTreeSet<SystemState> =
            projected.reachable().into_iter().map(|q| projected.state(q).clone()).collect();
        for q in 0..lts.num_states() {
            prop_assert_eq!(family.reach.reachable_in(p, q), reachable.contains(lts.state(q)));
        }
    }
    let symbolic = symbolic_reachability(&feta, &spec.logic);
    for (q, expr) in symbolic.iter().enumerate() {
        prop_assert_eq!(spec.logic.models(expr, usize::MAX).unwrap(), family.reach.at(q));
    }
    let freqs = family.derive_freqs().unwrap();
    for f in &freqs {
        prop_assert!(spec.logic.entails(&f.psi, fm));
        prop_assert!(check_compliance_unfolding(&family, f), "{}", text);
        if family.featured_compliance(f).status == FeaturedStatus::Compliant {
            prop_assert_ne!(family.featured_weak_compliance(f).status, FeaturedStatus::Violated);
        }
    }
    prop_assert!(check_requirement_correspondence(&family).unwrap().is_empty(), "{}", text);
    for mode in [Mode::Strict, Mode::Weak] {
        let agreement = check_family_receptiveness(&family, mode).unwrap();
        prop_assert!(agreement.holds(), "{:?}\n{}", agreement, text);
    }
    prop_assert_eq!(spec.logic.stats().mismatches, 0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_family_properties(seed in any::<u64>()) {
        family_properties(seed)?;
    }

    #[test]
    fn printing_and_reparsing_is_stable(seed in any::<u64>()) {
        let (text, _) = common::random_spec(seed);
        let doc = dsl::parse(&text).unwrap();
        let printed = doc.to_string();
        let reparsed = dsl::parse(&printed).unwrap();
        prop_assert_eq!(&reparsed, &doc);
        prop_assert_eq!(reparsed.to_string(), printed);
    }
}

#[test]
fn generated_families_are_not_trivial() {
    let mut with_reqs = 0;
    let mut strict_violations = 0;
    let mut weak_violations = 0;
    let limits = Limits::default();
    for seed in 0..common::RANDOM_INSTANCES {
        let (_, spec) = common::random_spec(seed);
        let feta = build_feta(&spec.system, &spec.sync, &spec.products, &limits).unwrap();
        let family = Family::new(&spec.system, &spec.sync, &feta, &spec.logic, &spec.products, &limits).unwrap();
        if !family.derive_freqs().unwrap().is_empty() {
            with_reqs += 1;
        }
        strict_violations += usize::from(!family.verdict(Mode::Strict).unwrap().holds());
        weak_violations += usize::from(!family.verdict(Mode::Weak).unwrap().holds());
    }
    assert!(with_reqs >= 50, "{with_reqs}");
    assert!(strict_violations >= 10, "{strict_violations}");
    assert!(weak_violations >= 5, "{weak_violations}");
}
