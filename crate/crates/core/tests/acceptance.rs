//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails. Tolerances are the stated ones; nothing
//! is relaxed to make a line green.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use copson::auxiliary::{aux_eval, AuxFunction, AuxParams};
use copson::certify::{
    check_gap_bound, check_index_condition, check_polynomial_criterion,
    check_threshold_criterion, Certificate, DEFAULT_TOL,
};
use copson::estimate::{
    brute_force_oracle, extremal_probe, log_ratio_gradient, minimize_ratio, OptimizerConfig,
};
use copson::inequality::{dual_sides, ratio_functional, TruncatedSequence};
use copson::params::{parse_rational, Exponents, Param};
use copson::polynomials::{a1, a1_exact, a2, a2_exact};
use copson::weight_trace::weighted_and_direct;
use copson::weights::WeightFamily;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn param(s: &str) -> Param {
    s.parse().unwrap()
}

fn fam(spec: &str) -> WeightFamily {
    WeightFamily::from_spec(spec).unwrap()
}

fn all_pass(certs: &[Certificate]) -> bool {
    certs.iter().all(|c| c.passed)
}

fn describe(certs: &[Certificate]) -> String {
    certs
        .iter()
        .map(|c| format!("{}={}", c.condition_id, if c.passed { "ok" } else { "fail" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn certify_set(family: &WeightFamily, l: &str, p: &str, n: usize) -> Vec<Certificate> {
    let (l, p) = (param(l), param(p));
    let exps = Exponents::new(p.value, l.value).unwrap();
    let mut certs = vec![
        check_index_condition(family, &exps, n, DEFAULT_TOL).unwrap(),
        check_gap_bound(family, l.value, n, DEFAULT_TOL).unwrap(),
        check_polynomial_criterion(&l, &p, DEFAULT_TOL).unwrap(),
    ];
    if l.value < 1.0 {
        certs.push(check_threshold_criterion(&l, None, &p, DEFAULT_TOL).unwrap());
    }
    certs
}

/// Unit family, L = 1: certificates at N = 10^5 within 5 s, and the
/// estimate at N = 2000 within 1e-3 of (p/(1−p))^p.
fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in ["0.1", "0.2", "1/3"] {
        let start = Instant::now();
        let certs = certify_set(&WeightFamily::Unit, "1", p, 100_000);
        let elapsed = start.elapsed();
        let cert_ok = all_pass(&certs) && elapsed < Duration::from_secs(5);

        let pv = param(p).value;
        let target = (pv / (1.0 - pv)).powf(pv);
        let est = minimize_ratio(&WeightFamily::Unit, pv, &OptimizerConfig::default().with_n(2000)).unwrap();
        let est_ok = (est.value - target).abs() <= 1e-3;
        ok &= cert_ok && est_ok;
        parts.push(format!(
            "p={p}: certify {} ({:.2}s) [{}]; estimate {:.6} vs {:.6} (|Δ|={:.2e}, tol 1e-3) {}",
            if cert_ok { "ok" } else { "FAIL" },
            elapsed.as_secs_f64(),
            describe(&certs),
            est.value,
            target,
            (est.value - target).abs(),
            if est_ok { "ok" } else { "FAIL" }
        ));
    }
    Outcome::new(ok, parts.join(" | "))
}

/// Unit family, p = 1/2: the two-term oracle is ≈ 0.9659 < 1 and the
/// minimiser goes below 1, all within 1 s.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let oracle = brute_force_oracle(&WeightFamily::Unit, 0.5, 2, 2000).unwrap();
    let oracle_ok = (oracle.value - 0.9659).abs() <= 1e-3 && oracle.value < 1.0;
    let mut below = Vec::new();
    for n in [2, 3, 10, 50] {
        let est = minimize_ratio(&WeightFamily::Unit, 0.5, &OptimizerConfig::default().with_n(n)).unwrap();
        below.push((n, est.value));
    }
    let elapsed = start.elapsed();
    let min_ok = below.iter().all(|(_, v)| *v < 1.0);
    let time_ok = elapsed < Duration::from_secs(1);
    Outcome::new(
        oracle_ok && min_ok && time_ok,
        format!(
            "oracle N=2 {:.6} (target 0.9659±1e-3, <1); minimize {} ; {:.3}s",
            oracle.value,
            below
                .iter()
                .map(|(n, v)| format!("N={n}:{v:.6}"))
                .collect::<Vec<_>>()
                .join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

/// PowerDiff(2) and PowerKernel(2), L = 1/2, p = 1/16: certificates at
/// N = 10^5 and the extremal probe within 5e-3 of (1/7)^{1/16}, within 10 s.
fn criterion_3() -> Outcome {
    let target = (1.0f64 / 7.0).powf(1.0 / 16.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in ["powerdiff:2", "powerkernel:2"] {
        let start = Instant::now();
        let family = fam(spec);
        let certs = certify_set(&family, "1/2", "1/16", 100_000);
        let probe = extremal_probe(&family, 1.0 / 16.0, 1e-3, 100_000).unwrap();
        let elapsed = start.elapsed();
        let cert_ok = all_pass(&certs);
        let probe_ok = (probe - target).abs() <= 5e-3;
        let time_ok = elapsed < Duration::from_secs(10);
        ok &= cert_ok && probe_ok && time_ok;
        parts.push(format!(
            "{spec}: certify {} [{}]; probe {:.6} vs {:.6} (|Δ|={:.2e}, tol 5e-3) {}; {:.2}s",
            if cert_ok { "ok" } else { "FAIL" },
            describe(&certs),
            probe,
            target,
            (probe - target).abs(),
            if probe_ok { "ok" } else { "FAIL" },
            elapsed.as_secs_f64()
        ));
    }
    Outcome::new(ok, parts.join(" | "))
}

/// a1(1, 1/3) = 2 exactly; u(1) = a1 and v(1) = a2 on a 30×30 grid;
/// a2(L, L²/4) ≥ 0 for L = k/100.
fn criterion_4() -> Outcome {
    let exact = a1_exact(&parse_rational("1").unwrap(), &parse_rational("1/3").unwrap());
    let exact_ok = exact == BigRational::from_integer(2.into());

    let mut worst: f64 = 0.0;
    for i in 0..30 {
        let l = 0.05 + 0.9 * i as f64 / 29.0;
        for j in 0..30 {
            let p = l * (j as f64 + 0.5) / 30.0;
            let params = AuxParams::new(l, 0.0, p);
            let u = aux_eval(AuxFunction::CurvatureBound, &params, 1.0).unwrap();
            let v = aux_eval(AuxFunction::SlopeFactor, &params, 1.0).unwrap();
            worst = worst.max((u - a1(l, p)).abs()).max((v - a2(l, p)).abs());
        }
    }
    let grid_ok = worst <= 1e-9;

    let mut min_a2 = f64::INFINITY;
    let mut all_nonneg = true;
    for k in 1..100 {
        let l = BigRational::new(k.into(), 100.into());
        let p = &l * &l / BigRational::from_integer(4.into());
        let v = a2_exact(&l, &p);
        all_nonneg &= v >= BigRational::zero();
        min_a2 = min_a2.min(a2(k as f64 / 100.0, (k * k) as f64 / 40000.0));
    }
    Outcome::new(
        exact_ok && grid_ok && all_nonneg,
        format!(
            "a1(1,1/3)={exact}; max |u(1)−a1|,|v(1)−a2| = {worst:.2e} (tol 1e-9); min a2(L,L²/4) over 99 L = {min_a2:.6}"
        ),
    )
}

/// Weighted and direct certificates agree on verdict and argmin on 50 random
/// instances with N ≤ 10^4.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = Vec::new();
    let (mut passes, mut fails) = (0, 0);
    for i in 0..50 {
        let family = match i % 3 {
            0 => WeightFamily::Unit,
            1 => WeightFamily::power_diff(rng.gen_range(1.0..4.0)).unwrap(),
            _ => WeightFamily::power_kernel(rng.gen_range(1.0..4.0)).unwrap(),
        };
        let l: f64 = rng.gen_range(0.2..2.5);
        let p: f64 = rng.gen_range(0.01..l.min(0.99));
        let n: usize = rng.gen_range(1..=10_000);
        let exps = Exponents::new(p, l).unwrap();
        let (w, d) = weighted_and_direct(&family, &exps, n, DEFAULT_TOL).unwrap();
        if d.passed {
            passes += 1;
        } else {
            fails += 1;
        }
        if w.passed != d.passed || w.argmin_n != d.argmin_n {
            mismatches.push(format!(
                "#{i} {family} L={l:.4} p={p:.4} N={n}: weighted ({}, n={}) direct ({}, n={})",
                w.passed, w.argmin_n, d.passed, d.argmin_n
            ));
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("50/50 agree ({passes} passing, {fails} failing instances)")
        } else {
            format!("{} mismatches: {}", mismatches.len(), mismatches.join("; "))
        },
    )
}

fn random_sequence(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.gen_range(1..=200);
    let kind = rng.gen_range(0..4);
    let mut x: Vec<f64> = (1..=n)
        .map(|k| match kind {
            0 => rng.gen_range(0.0..1.0),
            1 => (rng.gen_range(-20.0..5.0f64)).exp(),
            2 => {
                if rng.gen_bool(0.3) {
                    rng.gen_range(0.0..10.0)
                } else {
                    0.0
                }
            }
            _ => (k as f64).powf(-rng.gen_range(0.5..20.0)),
        })
        .collect();
    if x.iter().all(|v| *v == 0.0) {
        x[0] = 1.0;
    }
    x
}

/// Unit family: ratio ≥ p^p − 1e-6 on 100 random sequences for each p.
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::INFINITY;
    let mut worst_at = 0.0;
    for k in 1..=9 {
        let p = k as f64 / 10.0;
        for _ in 0..100 {
            let x = TruncatedSequence::new(random_sequence(&mut rng)).unwrap();
            let r = ratio_functional(&WeightFamily::Unit, &x, p).unwrap();
            let slack = r - p.powf(p);
            if slack < worst {
                worst = slack;
                worst_at = p;
            }
        }
    }
    Outcome::new(
        worst >= -1e-6,
        format!("min(ratio − p^p) over 900 sequences = {worst:.3e} (at p={worst_at}), tol −1e-6"),
    )
}

/// Analytic gradient of ln ratio against central differences, N = 20.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let h = 1e-6;
    for i in 0..100 {
        let family = match i % 3 {
            0 => WeightFamily::Unit,
            1 => WeightFamily::power_diff(rng.gen_range(1.0..3.0)).unwrap(),
            _ => WeightFamily::power_kernel(rng.gen_range(1.0..3.0)).unwrap(),
        };
        let p: f64 = rng.gen_range(0.05..0.95);
        let x: Vec<f64> = (0..20).map(|_| rng.gen_range(0.1..2.0)).collect();
        let seq = TruncatedSequence::new(x.clone()).unwrap();
        let g = log_ratio_gradient(&family, &seq, p).unwrap();
        let f = |v: &[f64]| {
            ratio_functional(&family, &TruncatedSequence::new(v.to_vec()).unwrap(), p)
                .unwrap()
                .ln()
        };
        for k in 0..20 {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += h;
            minus[k] -= h;
            let fd = (f(&plus) - f(&minus)) / (2.0 * h);
            worst = worst.max((fd - g[k]).abs());
        }
    }
    Outcome::new(
        worst <= 1e-5,
        format!("max-norm |analytic − central FD| over 100 instances = {worst:.2e} (tol 1e-5)"),
    )
}

/// Minimiser against the exhaustive oracle for N ∈ {2,3}.
fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for spec in ["unit", "powerdiff:2"] {
        let family = fam(spec);
        for p in [0.25, 0.5] {
            for (n, res) in [(2, 100_000), (3, 1000)] {
                let oracle = brute_force_oracle(&family, p, n, res).unwrap();
                let cfg = OptimizerConfig {
                    max_iters: 20_000,
                    ..OptimizerConfig::default().with_n(n)
                };
                let est = minimize_ratio(&family, p, &cfg).unwrap();
                let d = (est.value - oracle.value).abs();
                worst = worst.max(d);
                parts.push(format!("{spec} p={p} N={n}: {:.7}/{:.7}", est.value, oracle.value));
            }
        }
    }
    Outcome::new(
        worst <= 1e-4,
        format!("max |minimize − oracle| = {worst:.2e} (tol 1e-4); {}", parts.join(", ")),
    )
}

/// Dual inequality on random positive sequences for the certified (L, p).
fn criterion_9() -> Outcome {
    let cases: [(&str, &str, &str); 5] = [
        ("unit", "1", "0.1"),
        ("unit", "1", "0.2"),
        ("unit", "1", "1/3"),
        ("powerdiff:2", "1/2", "1/16"),
        ("powerkernel:2", "1/2", "1/16"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for (spec, l, p) in cases {
        let family = fam(spec);
        // only certified parameters count
        if !all_pass(&certify_set(&family, l, p, 10_000)) {
            return Outcome::new(false, format!("{spec} L={l} p={p} not certified"));
        }
        let exps = Exponents::new(param(p).value, param(l).value).unwrap();
        for _ in 0..100 {
            let n = rng.gen_range(1..=100);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-6.0..3.0f64).exp()).collect();
            let d = dual_sides(&family, &TruncatedSequence::new(x).unwrap(), &exps).unwrap();
            worst = worst.max(d.lhs - d.rhs);
            checked += 1;
        }
    }
    Outcome::new(
        worst <= 1e-9,
        format!("max(lhs − rhs) over {checked} sequences = {worst:.3e} (tol 1e-9)"),
    )
}

/// Every CLI command run twice with identical arguments gives identical bytes.
fn criterion_10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_copson");
    let dir = tempfile::tempdir().unwrap();
    let seq_file = dir.path().join("x.txt");
    std::fs::write(&seq_file, "1\n0.5\n0.25\n0\n0.125\n").unwrap();
    let seq_arg = seq_file.display().to_string();
    let commands: Vec<Vec<String>> = [
        vec!["certify", "--family", "powerdiff:2", "--L", "1/2", "--p", "1/16", "--N", "20000", "--weighted"],
        vec!["scan", "--L", "1:3:50", "--p", "0:1/3:50"],
        vec!["scan", "--L", "0:1:20", "--p-mode", "threshold"],
        vec!["estimate", "--p", "0.3", "--N", "50,100", "--init", "random", "--seed", "42"],
        vec!["estimate", "--family", "powerkernel:2", "--p", "0.1", "--N", "80"],
        vec!["probe", "--p", "0.25", "--eps", "0.1,0.001", "--N", "1000,100000"],
        vec!["weights", "--L", "1", "--p", "0.3333", "--N", "200"],
        vec!["aux", "--fn", "g", "--L", "1", "--p", "0.25"],
        vec!["eval", "--p", "0.3", "--L", "1", "--sequence", seq_arg.as_str()],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();

    let mut bad = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        // identical arguments, including output paths
        let out_file = dir.path().join(format!("out-{i}"));
        let seq_out = dir.path().join(format!("seq-{i}"));
        let run = || {
            let mut cmd = Command::new(exe);
            cmd.args(args);
            let stdout = cmd.output().unwrap();
            let mut cmd = Command::new(exe);
            cmd.args(args).arg("--out").arg(&out_file);
            if args[0] == "estimate" {
                cmd.arg("--sequence-out").arg(&seq_out);
            }
            let status = cmd.status().unwrap();
            let file = std::fs::read(&out_file).unwrap_or_default();
            let seq = std::fs::read(&seq_out).unwrap_or_default();
            (stdout.stdout, stdout.status.code(), status.code(), file, seq)
        };
        let a = run();
        let b = run();
        if a.0.is_empty() || a.3.is_empty() {
            bad.push(format!("{}: no output", args[0]));
        }
        if a != b {
            bad.push(format!("{}: outputs differ", args.join(" ")));
        }
    }
    Outcome::new(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} commands byte-identical across reruns (stdout and --out files)", commands.len())
        } else {
            bad.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("unit family reproduction", criterion_1),
        ("failure regime witness", criterion_2),
        ("power families at L=1/2, p=1/16", criterion_3),
        ("polynomial identities", criterion_4),
        ("weighted/direct certificate equivalence", criterion_5),
        ("validity floor p^p", criterion_6),
        ("gradient vs finite differences", criterion_7),
        ("optimizer vs brute-force oracle", criterion_8),
        ("dual consistency", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {:>2} ({name}) [{:.2}s]: {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
