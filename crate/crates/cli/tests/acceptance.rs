//! The eight acceptance criteria, each mapped onto one or more suites run at
//! 200 samples. Prints one PASS/FAIL line per criterion.
//!
//! Some displayed formulas do not hold as printed; the checks that test them
//! verbatim are listed in `KNOWN_FAILURES` and are expected to fail. Every
//! other check must pass.

use ewtoda_cli::{run_suite, Report, SuiteSpec};

const SEED: u64 = 7;
const SAMPLES: usize = 200;

struct Criterion {
    number: usize,
    title: &'static str,
    suites: &'static [&'static str],
    /// `(suite, check id prefix)` of checks that test a formula verbatim and
    /// fail.
    known_failures: &'static [(&'static str, &'static str)],
}

const CRITERIA: [Criterion; 8] = [
    Criterion {
        number: 1,
        title: "Einstein/ASD normal-form metrics",
        suites: &["dm-einstein"],
        known_failures: &[],
    },
    Criterion {
        number: 2,
        title: "scalar curvature and co-closed Ω on the n, Λ grid",
        suites: &["appendix-a"],
        known_failures: &[],
    },
    Criterion {
        number: 3,
        title: "Kaluza-Klein lift and quadric pullback",
        suites: &["kk-lift", "quadric"],
        known_failures: &[],
    },
    Criterion {
        number: 4,
        title: "Jones-Tod quotients against the displayed structures",
        suites: &["jones-tod"],
        known_failures: &[("jones-tod", "k3-printed/")],
    },
    Criterion {
        number: 5,
        title: "Toda catalogue and parametric family",
        suites: &["toda-catalog"],
        known_failures: &[("toda-catalog", "sextic/")],
    },
    Criterion {
        number: 6,
        title: "Tod's construction",
        suites: &["tod-steps"],
        known_failures: &[],
    },
    Criterion {
        number: 7,
        title: "hyper-Hermitian, monopole, symmetry and minitwistor identities",
        suites: &["hyperhermitian", "monopoles", "symmetry-criterion", "minitwistor"],
        known_failures: &[("hyperhermitian", "beta-printed/"), ("minitwistor", "printed;")],
    },
    Criterion {
        number: 8,
        title: "finite-difference oracle and perturbation controls",
        suites: &["oracle"],
        known_failures: &[],
    },
];

fn run(name: &str) -> Report {
    run_suite(&SuiteSpec::new(name).with_seed(SEED).with_samples(SAMPLES)).unwrap()
}

#[test]
fn acceptance() {
    let mut unexpected = Vec::new();
    for c in &CRITERIA {
        let mut failed = Vec::new();
        let mut total = 0;
        for s in c.suites {
            let r = run(s);
            total += r.summary.checks;
            for f in r.failures() {
                failed.push((*s, f.id.clone()));
            }
        }
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "Criterion {}: {verdict} ({}; {} of {total} checks failed)",
            c.number,
            c.title,
            failed.len()
        );
        for (s, id) in &failed {
            if !c.known_failures.iter().any(|(ks, p)| ks == s && id.starts_with(p)) {
                unexpected.push(format!("criterion {}: {s} {id}", c.number));
            }
        }
    }
    assert!(unexpected.is_empty(), "unexpected failures:\n{}", unexpected.join("\n"));
}
