//! Feature expressions, valid products and entailment.

use feta::logic::{Backend, FeatureExpr, FeatureModel, Logic, Universe};

fn main() {
    let universe = Universe::new(["lock", "unlock"]).expect("distinct feature names");
    let fm =
        FeatureModel::new(universe.clone(), "lock xor unlock".parse().expect("well-formed")).expect("known features");
    let logic = Logic::new(universe.clone(), Backend::CrossCheck);

    let products = logic.valid_products(&fm, 16).expect("few products");
    println!("valid products of `{}`:", fm.expr());
    for &p in &products {
        println!("  {}  characterised by {}", universe.display_product(p), universe.chi_product(p));
    }

    let guard: FeatureExpr = "unlock && !lock".parse().expect("well-formed");
    println!("`{guard}` entails the feature model: {}", logic.entails(&guard, fm.expr()));
    let contradiction: FeatureExpr = "lock && (unlock && !lock)".parse().expect("well-formed");
    println!("`{contradiction}` satisfiable: {}", logic.is_satisfiable(&contradiction));
    println!("characteristic formula of all valid products: {}", universe.chi_set(&products));
    println!("backend mismatches: {}", logic.stats().mismatches);
}
