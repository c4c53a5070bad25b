//! Composing the components of a system into its synchronisation-free
//! transition system.

use feta::corpus;
use feta::system::Limits;

fn main() {
    let (sys, _) = corpus::access_management();
    let comp = sys.compose(&Limits::default()).expect("small system");
    println!("components: {}", sys.names().join(", "));
    println!("{} states, {} transitions", comp.lts.num_states(), comp.lts.edges().len());

    let initial = comp.lts.initial()[0];
    println!("from ({}):", sys.display_state(comp.lts.state(initial)));
    for &e in comp.lts.outgoing(initial) {
        let edge = comp.lts.edge(e);
        println!("  {}  ->  ({})", sys.display_label(&edge.label), sys.display_state(comp.lts.state(edge.target)));
    }
}
