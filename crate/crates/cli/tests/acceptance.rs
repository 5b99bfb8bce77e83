//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdict lines are always printed.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use sublab_core::harness::random::{
    axiom_batch, exponential_batch, independent_rosenthal_batch, oracle_batch, rosenthal_batch, AXIOM_PROPERTIES,
};
use sublab_core::harness::{
    clt_gap, counterexample_check, fclt_gap, ArrayBuilder, CounterexampleConfig, GridPolicy, PdeSettings,
    RosenthalVariant,
};
use sublab_core::{GCoefficients, PathFunctional, TestFunction};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const ORACLE_SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn g(lo: f64, hi: f64) -> GCoefficients {
    GCoefficients::new(lo, hi).unwrap()
}

fn c1_positive_part() -> Verdict {
    let pde = PdeSettings { dx: 0.02, cfl: 0.9 };
    let phi = TestFunction::positive_part(8.0).unwrap();
    let mut worst_err = 0.0_f64;
    let mut worst_time = Duration::ZERO;
    for r in [0.0, 0.25, 1.0] {
        let start = Instant::now();
        let v = pde.g_normal(&phi, 1.0, g(r, 1.0)).unwrap();
        worst_time = worst_time.max(start.elapsed());
        worst_err = worst_err.max((v - INV_SQRT_2PI).abs());
    }
    verdict(
        worst_err <= 2e-3 && worst_time < Duration::from_secs(10),
        format!("max |E[x+] - 1/sqrt(2pi)| = {worst_err:.2e}, slowest solve {worst_time:.2?}"),
    )
}

fn c2_moments() -> Verdict {
    let pde = PdeSettings::default();
    let gc = g(0.25, 1.0);
    let sq = pde.g_normal(&TestFunction::square(8.0).unwrap(), 1.0, gc).unwrap();
    let ab = pde.g_normal(&TestFunction::abs(8.0).unwrap(), 1.0, gc).unwrap();
    let target = (2.0 / PI).sqrt();
    verdict(
        (sq - 1.0).abs() <= 0.01 && (ab - target).abs() <= 0.01 * target,
        format!("E[xi^2] = {sq:.6}, E|xi| = {ab:.6} (target {target:.6})"),
    )
}

fn c3_third_moment() -> Verdict {
    let pde = PdeSettings::default();
    let v = pde.g_normal(&TestFunction::cube(8.0).unwrap(), 1.0, g(0.25, 1.0)).unwrap();
    let (lo, hi) = (0.185_903_216 - 0.02, 1.083_523_347 + 0.02);
    let rep = counterexample_check(0.25, 6.0, &CounterexampleConfig::default()).unwrap();
    verdict(
        v >= lo && v <= hi && rep.contradiction && rep.consistent,
        format!(
            "E[xi^3] = {v:.6} in [{lo:.6}, {hi:.6}]; sqrt(37) * lower = {:.6} > upper = {:.6}",
            rep.scaled_lower_bound, rep.bounds.1
        ),
    )
}

fn c4_oracle() -> Verdict {
    let start = Instant::now();
    let s = oracle_batch(ORACLE_SEED, 200).unwrap();
    let t = start.elapsed();
    verdict(
        s.instances == 200 && s.max_abs_diff <= 1e-6 && t < Duration::from_secs(60),
        format!("200 instances, max |dp - tree| = {:.2e}, {t:.2?}", s.max_abs_diff),
    )
}

fn c5_clt() -> Verdict {
    let b = ArrayBuilder::UncertainRademacher { sigmas: vec![0.5, 1.0] };
    let study = clt_gap(
        &|n| b.build(n),
        &TestFunction::positive_part(8.0).unwrap(),
        &[4, 16, 64],
        1.0,
        g(0.25, 1.0),
        GridPolicy::default(),
        PdeSettings::default(),
    )
    .unwrap();
    let t = &study.table;
    let gaps = t.gaps();
    verdict(
        t.is_nonincreasing(0.0) && gaps[2] <= gaps[0] / 2.0,
        format!("gaps at n = 4, 16, 64: {:.6}, {:.6}, {:.6}", gaps[0], gaps[1], gaps[2]),
    )
}

fn c6_rosenthal() -> Verdict {
    let start = Instant::now();
    let suffix = rosenthal_batch(61, 100, RosenthalVariant::SuffixSq).unwrap();
    let max_sq = rosenthal_batch(62, 100, RosenthalVariant::MaxSq).unwrap();
    let indep = independent_rosenthal_batch(63, 100, 2.0, 8.0).unwrap();
    let t = start.elapsed();
    let all = [&suffix, &max_sq, &indep];
    verdict(
        all.iter().all(|s| s.instances == 100 && s.passed()) && t < Duration::from_secs(120),
        format!(
            "violations {}/{}/{}, min slack {:.2e}/{:.2e}/{:.2e}, {t:.2?}",
            suffix.violations, max_sq.violations, indep.violations, suffix.min_slack, max_sq.min_slack, indep.min_slack
        ),
    )
}

fn c7_exponential() -> Verdict {
    let s = exponential_batch(71, 100).unwrap();
    verdict(
        s.instances == 100 && s.passed(),
        format!("violations {}, min slack {:.2e}", s.violations, s.min_slack),
    )
}

fn c8_axioms() -> Verdict {
    let s = axiom_batch(81, 1000);
    verdict(
        s.instances == 1000 && s.checks == 1000 * AXIOM_PROPERTIES.len() && s.passed(),
        format!("{} checks on 1000 instances, {} failures", s.checks, s.failures.len()),
    )
}

fn c9_fclt() -> Verdict {
    let pde = PdeSettings::default();
    let clip = TestFunction::identity(1.0).unwrap();
    let skeleton = PathFunctional::skeleton(vec![0.5, 1.0], vec![clip.clone(), clip]).unwrap();
    let classical = ArrayBuilder::UncertainRademacher { sigmas: vec![1.0] };
    let sk = fclt_gap(
        &|n| classical.build(n),
        &skeleton,
        &[4, 64],
        1.0,
        GCoefficients::classical(1.0).unwrap(),
        GridPolicy::default(),
        pde,
    )
    .unwrap();
    let uncertain = ArrayBuilder::UncertainRademacher { sigmas: vec![0.5, 1.0] };
    let rm = fclt_gap(
        &|n| uncertain.build(n),
        &PathFunctional::running_max(TestFunction::identity(8.0).unwrap()),
        &[2, 4, 8, 16, 32],
        1.0,
        g(0.25, 1.0),
        GridPolicy::default(),
        pde,
    )
    .unwrap();
    let sg = sk.gaps();
    let cauchy: Vec<String> = rm.gaps().iter().map(|x| format!("{x:.4}")).collect();
    verdict(
        sg[1] < sg[0] && rm.is_strictly_decreasing(),
        format!("skeleton gap {:.4} -> {:.4}; running-max Cauchy gaps {}", sg[0], sg[1], cauchy.join(" > ")),
    )
}

fn c10_determinism() -> Verdict {
    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/suite.json");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, parallel) in ["1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let status = Command::new(env!("CARGO_BIN_EXE_sublab"))
            .args(["run", suite.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "12345"])
            .args(["--parallel", parallel])
            .status()
            .unwrap();
        outputs.push((status.success(), std::fs::read(out.join("report.csv")).unwrap_or_default()));
    }
    let same = outputs[0].1 == outputs[1].1 && !outputs[0].1.is_empty();
    verdict(
        same && outputs.iter().all(|(ok, _)| *ok),
        format!("two runs of the bundled suite (1 and 4 threads), {} CSV bytes each, identical: {same}", outputs[0].1.len()),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("G-normal positive part", c1_positive_part),
        ("G-normal moments", c2_moments),
        ("third-moment bounds and |a| = 6 contradiction", c3_third_moment),
        ("tree oracle equivalence", c4_oracle),
        ("CLT gaps, uncertain variance", c5_clt),
        ("Rosenthal suites", c6_rosenthal),
        ("exponential inequality", c7_exponential),
        ("axiom checks", c8_axioms),
        ("FCLT skeleton and running max", c9_fclt),
        ("deterministic CSV", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<46} {}  {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
