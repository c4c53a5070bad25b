//! Running the command line on every bundled model: `verify`, then the
//! strict and weak family checks.

use std::io::Write;

use feta::cli;
use feta::corpus;

fn main() {
    let dir = std::env::temp_dir().join("feta-corpus");
    std::fs::create_dir_all(&dir).expect("temporary directory");
    for (name, text) in corpus::ALL {
        let path = dir.join(format!("{name}.feta"));
        std::fs::File::create(&path).and_then(|mut f| f.write_all(text.as_bytes())).expect("writable");
        let path = path.to_string_lossy().into_owned();
        let mut sink = Vec::new();
        let verify = cli::run(["feta", "verify", &path], &mut sink, &mut std::io::sink());
        let strict = cli::run(["feta", "check", "--strict", &path], &mut sink, &mut std::io::sink());
        let weak = cli::run(["feta", "check", "--weak", &path], &mut sink, &mut std::io::sink());
        println!("{name:20} verify={verify} strict={strict} weak={weak}");
    }
}
