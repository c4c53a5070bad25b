//! Receptiveness of single product teams, with weak-compliance witnesses.

use feta::corpus;
use feta::receptiveness::{receptiveness_verdict, Mode, Status};
use feta::system::Limits;
use feta::team::build_eta;

fn main() {
    let spec = corpus::load(corpus::ACCESS_MANAGEMENT);
    let limits = Limits::default();
    for &p in &spec.products {
        let sys = spec.system.project(p).expect("valid product");
        let st = spec.sync.project(p).expect("total rules");
        let eta = build_eta(&sys, &st, &limits).expect("small team");
        for mode in [Mode::Strict, Mode::Weak] {
            let v = receptiveness_verdict(&eta, &st, &sys, mode, &limits).expect("within bounds");
            println!("{} {mode}: holds = {}", spec.universe().display_product(p), v.holds());
            for r in &v.results {
                let req = format!(
                    "rcp({}, {}) @ ({})",
                    sys.display_set(r.req.senders),
                    r.req.action,
                    sys.display_state(eta.state(r.req.state))
                );
                match (r.status, &r.witness) {
                    (Status::Violated, _) => println!("    violated: {req}"),
                    (Status::WeaklyCompliant, Some(w)) => {
                        let path: Vec<String> =
                            w.prefix.iter().chain([&w.step]).map(|&e| sys.display_label(&eta.edge(e).label)).collect();
                        println!("    weakly compliant: {req} via {}", path.join(" ; "));
                    }
                    _ => {}
                }
            }
        }
    }
}
