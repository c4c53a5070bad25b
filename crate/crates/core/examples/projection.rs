//! Projecting the featured team onto each product and comparing the result
//! with the team generated from the projected components.

use feta::corpus;
use feta::system::Limits;
use feta::team::check_projection_commutes;

fn main() {
    let spec = corpus::load(corpus::ACCESS_MANAGEMENT);
    for &p in &spec.products {
        let c = check_projection_commutes(&spec.system, &spec.sync, &spec.products, p, &Limits::default())
            .expect("small family");
        println!(
            "{}: commutes = {} ({} extra in family, {} extra in product)",
            spec.universe().display_product(p),
            c.holds(),
            c.only_in_family.len(),
            c.only_in_product.len()
        );
    }
}
