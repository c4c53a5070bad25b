//! Featured requirements and the family-level receptiveness verdicts, next
//! to the product-by-product verdicts they must agree with.

use feta::corpus;
use feta::featured::{check_family_receptiveness, Family};
use feta::receptiveness::Mode;
use feta::report::{self, Names, Report};
use feta::system::Limits;
use feta::team::build_feta;

fn main() {
    let spec = corpus::load(corpus::ACCESS_MANAGEMENT);
    let limits = Limits::default();
    let feta = build_feta(&spec.system, &spec.sync, &spec.products, &limits).expect("small family");
    let family =
        Family::new(&spec.system, &spec.sync, &feta, &spec.logic, &spec.products, &limits).expect("few products");
    let names = Names {
        sys: &spec.system,
        universe: spec.universe(),
        products: &spec.products,
        fm: spec.feature_model().expr(),
    };

    let mut reqs = Report::new("reqs", Some(spec.name.clone()), Vec::new());
    reqs.requirements = Some(
        family.derive_freqs().expect("within bounds").iter().map(|f| names.freq(feta.lts(), f, false, false)).collect(),
    );
    print!("{}", report::render_text(&reqs));

    for mode in [Mode::Strict, Mode::Weak] {
        let v = family.verdict(mode).expect("within bounds");
        println!("{}", report::verdict_sentence(&names.featured_verdict(&feta, &v, false)));
        let agreement = check_family_receptiveness(&family, mode).expect("within bounds");
        println!("  {}", names.agreement(&agreement).detail);
    }
}
