//! Acceptance criteria 1 to 9, one line each. The process succeeds when every outcome matches
//! the recorded expectation below; outcomes that are known to fail stay failing here.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dglr_core::verify::{run_suite, Status, SuiteId, SuiteParams, VerificationReport};

/// Seeded cases per oracle family in criterion 8.
const ORACLE_CASES: usize = 200;
const ORACLE_SEED: u64 = 0x0a11_ce55;
const HOMOLOGY_MAX_DEGREE: u32 = 6;

struct Criterion {
    id: u8,
    title: &'static str,
    limit: Duration,
    expect_pass: bool,
    run: fn(&SuiteParams) -> (bool, String),
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, title: "Frobenius counts", limit: secs(1), expect_pass: false, run: frobenius },
    Criterion { id: 2, title: "square-zero differentials", limit: secs(10), expect_pass: true, run: square_zero },
    Criterion { id: 3, title: "edge and vertex building blocks", limit: secs(300), expect_pass: false, run: building_blocks },
    Criterion { id: 4, title: "listed cycles in degrees 2337 to 2339", limit: secs(60), expect_pass: false, run: listed_cycles },
    Criterion { id: 5, title: "top degree carries no cycle", limit: secs(7200), expect_pass: false, run: top_degree },
    Criterion { id: 6, title: "explicit homotopies", limit: secs(30), expect_pass: true, run: homotopy },
    Criterion { id: 7, title: "action on the tower", limit: secs(300), expect_pass: true, run: phi },
    Criterion { id: 8, title: "free Lie and homology oracles", limit: secs(120), expect_pass: true, run: oracles },
    Criterion { id: 9, title: "minimality and ranks of L(G,1)", limit: secs(10), expect_pass: true, run: homology },
];

fn failing(reports: &[VerificationReport]) -> String {
    let names: Vec<String> = reports
        .iter()
        .flat_map(|r| r.witnesses.iter().filter(|c| c.status != Status::Pass).map(move |c| format!("{}/{}", r.lemma_id, c.name)))
        .collect();
    if names.is_empty() { String::new() } else { format!("not passing: {}", names.join(", ")) }
}

fn suites(params: &SuiteParams, ids: &[SuiteId]) -> (bool, String) {
    let reports: Vec<VerificationReport> = ids.iter().map(|&id| run_suite(id, params)).collect();
    (reports.iter().all(|r| r.status == Status::Pass), failing(&reports))
}

fn frobenius(p: &SuiteParams) -> (bool, String) {
    suites(p, &[SuiteId::Frobenius])
}

fn square_zero(p: &SuiteParams) -> (bool, String) {
    suites(p, &[SuiteId::SquareZero])
}

fn building_blocks(p: &SuiteParams) -> (bool, String) {
    suites(p, &[SuiteId::EdgeSummands, SuiteId::VertexTriples, SuiteId::EdgeTail])
}

fn listed_cycles(p: &SuiteParams) -> (bool, String) {
    suites(p, &[SuiteId::FirstCycles, SuiteId::SecondCycles, SuiteId::ThirdCycles])
}

/// When the cycle space overruns its budget, the support and the synthetic analogue decide.
fn top_degree(p: &SuiteParams) -> (bool, String) {
    let r = run_suite(SuiteId::TopDegree, p);
    let status = |name: &str| r.check(name).map(|c| c.status);
    let pass = match status("cycle-space-zero") {
        Some(Status::BudgetExceeded) => status("support") == Some(Status::Pass) && status("synthetic-analogue") == Some(Status::Pass),
        _ => r.status == Status::Pass,
    };
    (pass, failing(std::slice::from_ref(&r)))
}

fn homotopy(p: &SuiteParams) -> (bool, String) {
    suites(p, &[SuiteId::Homotopy])
}

fn phi(p: &SuiteParams) -> (bool, String) {
    suites(p, &[SuiteId::Phi])
}

fn oracles(_: &SuiteParams) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut multidegrees = 0;
    for _ in 0..ORACLE_CASES {
        match common::lie_case(&common::random_degrees(&mut rng), common::MAX_TOTAL_DEGREE) {
            Ok(k) => multidegrees += k,
            Err(e) => return (false, e),
        }
    }
    for _ in 0..ORACLE_CASES {
        if let Err(e) = common::homology_case(&common::RandomDgl::sample(&mut rng), HOMOLOGY_MAX_DEGREE) {
            return (false, e);
        }
    }
    (true, format!("{ORACLE_CASES} alphabets over {multidegrees} multidegrees, {ORACLE_CASES} dgls in degrees 1 to {HOMOLOGY_MAX_DEGREE}"))
}

fn homology(p: &SuiteParams) -> (bool, String) {
    let r = run_suite(SuiteId::Homology, p);
    let ok = ["linear-part", "ranks"].iter().all(|n| r.check(n).is_some_and(|c| c.status == Status::Pass));
    (ok, String::new())
}

fn main() -> ExitCode {
    let params = SuiteParams::paper_default();
    let mut matched = true;
    for c in &CRITERIA {
        let start = Instant::now();
        let (holds, detail) = (c.run)(&params);
        let elapsed = start.elapsed();
        let pass = holds && elapsed <= c.limit;
        let timing = format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), c.limit.as_secs());
        let detail = if elapsed > c.limit { format!("over time limit; {detail}") } else { detail };
        let sep = if detail.is_empty() { "" } else { ": " };
        println!("criterion {} {} {} ({timing}){sep}{detail}", c.id, if pass { "PASS" } else { "FAIL" }, c.title);
        if pass != c.expect_pass {
            matched = false;
            println!("criterion {} expected {}", c.id, if c.expect_pass { "PASS" } else { "FAIL" });
        }
    }
    if matched {
        println!("acceptance: all outcomes match expectations");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: outcomes differ from expectations");
        ExitCode::FAILURE
    }
}
