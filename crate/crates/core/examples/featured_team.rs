//! Generating the featured team automaton of a family and printing its
//! reachable, realisable core with simplified constraints.

use feta::corpus;
use feta::report::{self, Names};
use feta::system::Limits;
use feta::team::{build_feta, prune_presentation};

fn main() {
    let spec = corpus::load(corpus::ACCESS_MANAGEMENT);
    let feta = build_feta(&spec.system, &spec.sync, &spec.products, &Limits::default()).expect("small family");
    let view = prune_presentation(&feta, &spec.logic);
    println!(
        "team: {} states, {} transitions; core: {} states, {} transitions",
        feta.lts().num_states(),
        feta.lts().edges().len(),
        view.states.len(),
        view.edges.len()
    );
    let names = Names {
        sys: &spec.system,
        universe: spec.universe(),
        products: &spec.products,
        fm: spec.feature_model().expr(),
    };
    print!("{}", report::feta_dot(&names, &feta, &view.states, &view.edges, false, &[]));
}
