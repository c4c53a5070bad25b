//! Parsing and elaborating a specification, showing diagnostics for a
//! broken one.

use feta::corpus;
use feta::dsl::{self, ElaborateOptions};

const BROKEN: &str = "features a;
feature_model a || b;
component C { output go; init s; s -> s by go?; }
system Sys = { c: C }
sync { default [1,1] -> [0,*]; }
";

fn main() {
    let doc = dsl::parse(corpus::TOKEN_RING).expect("bundled model parses");
    let spec = dsl::elaborate(&doc, &ElaborateOptions::default()).expect("bundled model elaborates");
    println!("{}: {} components, {} valid products", spec.name, spec.system.len(), spec.products.len());
    println!("--- normalised source ---\n{doc}");

    let diagnostics = dsl::parse(BROKEN)
        .and_then(|doc| dsl::elaborate(&doc, &ElaborateOptions::default()).map(|_| ()))
        .expect_err("the broken specification is rejected");
    for d in diagnostics {
        println!("{d}");
    }
}
