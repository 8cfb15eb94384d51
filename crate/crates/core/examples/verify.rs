//! Checks a corpus benchmark against its mapping:
//! `cargo run --example verify -- corpus/travelArrange01`

use std::fs;
use std::path::Path;

use pdag_core::plan::{ground, GroundOptions};
use pdag_core::verify::{check_bisimulation, parse_mapping, soundness_summary, VerifyCaps};
use pdag_core::{parse_domain, parse_problem};

fn main() {
    let dir = std::env::args().nth(1).expect("usage: verify <benchmark dir>");
    let dir = Path::new(&dir);
    let read = |f: &str| fs::read_to_string(dir.join(f)).unwrap();
    let hl = parse_domain(&read("hl_domain.pddl")).unwrap();
    let ll = parse_domain(&read("ll_domain.pddl")).unwrap();
    let hlp = parse_problem(&read("hl_problem.pddl"), &hl).unwrap();
    let llp = parse_problem(&read("ll_problem.pddl"), &ll).unwrap();
    let m = match parse_mapping(&read("mapping.map"), &hl, &ll) {
        Ok(m) => m,
        Err(d) => {
            eprint!("{}", d.render("mapping.map"));
            std::process::exit(2);
        }
    };
    let opts = GroundOptions::default();
    let ht = ground(&hl, &hlp, &opts).unwrap();
    let lt = ground(&ll, &llp, &opts).unwrap();
    let report = check_bisimulation(&ht, &lt, &m, &VerifyCaps::default()).unwrap();
    print!("{}", soundness_summary(&report, &dir.join("mapping.map").display().to_string()));
    if let Some(c) = &report.counterexample {
        println!("{c:#?}");
    }
}
