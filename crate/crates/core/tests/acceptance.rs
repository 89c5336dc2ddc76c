//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Every stochastic criterion uses the library's default ensemble: 100
//! coherent states, seed 0, uniform theta and phi.

use std::f64::consts::{LN_2, PI};
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qkt_oe::classical_map::{classical_step, PhasePoint};
use qkt_oe::diagnostics::{otoc_from_operators, Quantity};
use qkt_oe::entropy::{
    half_half_partition, observational_entropy, prediction_retrodiction_check, CoarseGraining, HalfHalfOrder,
};
use qkt_oe::experiments::{
    fig2_oe_vs_mu, fig3_oe_dynamics, fig4_rates_vs_kappa, fig56_small_j, fig7_saddle_vs_chaos, run_with_threads,
    Experiment, RunConfig,
};
use qkt_oe::kicked_top::{evolve_state, floquet_unitary, heisenberg_evolve, KickedTopParams};
use qkt_oe::spin_algebra::{coherent_state, SpinOperators, SpinSpace};
use qkt_oe::{ComplexMatrix, StateVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn config(experiment: Experiment, pairs: &[(&str, &str)]) -> RunConfig {
    RunConfig::from_pairs(experiment, pairs.iter().copied()).expect("acceptance config")
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

/// Tail mean of the kappa = 7 series and the three saturation-approach slopes
/// share one run.
fn fig3_run() -> (qkt_oe::experiments::Fig3Result, Duration) {
    let cfg = config(Experiment::Fig3OeDynamics, &[("kappa", "4, 4.5, 7")]);
    let (res, dt) = timed(|| fig3_oe_dynamics(&cfg));
    (res.expect("fig3 run"), dt)
}

fn criterion_1(res: &qkt_oe::experiments::Fig3Result, dt: Duration) -> Outcome {
    let s = res.series.iter().find(|s| s.meta.kappa == Some(7.0)).expect("kappa 7 series");
    let tail = &s.values[20..=50];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let pass = (5.8..=5.99).contains(&mean) && dt <= Duration::from_secs(120);
    Outcome { pass, detail: format!("mean OE over steps 20-50 = {mean:.4} (want [5.8, 5.99]), {dt:.1?}") }
}

fn criterion_2(res: &qkt_oe::experiments::Fig3Result, dt: Duration) -> Outcome {
    let mut pass = dt <= Duration::from_secs(300);
    let mut parts = Vec::new();
    for (kappa, target) in [(7.0, -0.445), (4.5, -0.395), (4.0, -0.326)] {
        let i = res.series.iter().position(|s| s.meta.kappa == Some(kappa)).expect("series");
        let slope = res.fits[i].slope;
        let ok = within(slope, target, 0.05);
        pass &= ok;
        parts.push(format!("k={kappa}: {slope:.4} vs {target}{}", if ok { "" } else { " (out)" }));
    }
    Outcome { pass, detail: format!("{}, {dt:.1?}", parts.join("; ")) }
}

fn criterion_3() -> Outcome {
    let cfg = config(Experiment::Fig4RatesVsKappa, &[]);
    let (res, dt) = timed(|| fig4_rates_vs_kappa(&cfg).expect("fig4 run"));
    let slope = |d: usize, q: Quantity| res.fits.iter().find(|f| f.dim == d && f.quantity == q).expect("fit").slope;
    let mut pass = dt <= Duration::from_secs(3600);
    let mut parts = Vec::new();
    for (d, q, target, tol) in [
        (400, Quantity::Oe, 0.0856, 0.02),
        (1000, Quantity::Oe, 0.0918, 0.02),
        (400, Quantity::Otoc, 0.2518, 0.05),
        (1000, Quantity::Otoc, 0.2436, 0.05),
    ] {
        let s = slope(d, q);
        let ok = within(s, target, tol);
        pass &= ok;
        parts.push(format!("{} d={d}: {s:.4} vs {target}{}", q.tag(), if ok { "" } else { " (out)" }));
    }

    // Reduced grid: only the sign of each fitted trend is checked.
    let smoke = config(Experiment::Fig4RatesVsKappa, &[("d", "1000"), ("kappa", "4, 5, 6")]);
    let (small, dt_small) = timed(|| fig4_rates_vs_kappa(&smoke).expect("fig4 smoke run"));
    let rising = small.fits.iter().all(|f| f.slope > 0.0);
    pass &= rising && dt_small <= Duration::from_secs(600);
    parts.push(format!("reduced grid trends positive: {rising}"));
    Outcome { pass, detail: format!("{}, {dt:.1?} + {dt_small:.1?}", parts.join("; ")) }
}

fn criterion_4() -> Outcome {
    let cfg = config(Experiment::Fig2OeVsMu, &[]);
    let (rows, dt) = timed(|| fig2_oe_vs_mu(&cfg).expect("fig2 run"));
    let oe = |kappa: Option<f64>, mu: usize| rows.iter().find(|r| r.kappa == kappa && r.mu == mu).expect("row").oe;
    let mut pass = dt <= Duration::from_secs(600);
    let mut parts = Vec::new();

    let worst = [64, 128, 256, 512]
        .iter()
        .map(|&mu| ((oe(Some(0.5), 2 * mu) - oe(Some(0.5), mu)) / LN_2 - 1.0).abs())
        .fold(0.0, f64::max);
    pass &= worst <= 0.1;
    parts.push(format!("k=0.5 increments off ln2 by at most {:.1}%", 100.0 * worst));

    let top = cfg
        .kappas
        .iter()
        .map(|&k| (oe(Some(k), 1024) - 1024f64.ln()).abs())
        .fold(0.0, f64::max);
    pass &= top <= 1e-9;
    parts.push(format!("max |OE(1024) - ln 1024| = {top:.1e}"));

    let gain = oe(Some(7.0), 2) - oe(None, 2);
    pass &= gain >= 1.0;
    parts.push(format!("k=7 OE(2) - unevolved = {gain:.3} nat"));
    Outcome { pass, detail: format!("{}, {dt:.1?}", parts.join("; ")) }
}

fn criterion_5() -> Outcome {
    let cfg = config(Experiment::Fig56SmallJ, &[("j", "3/2, 5/2, 7/2, 9/2")]);
    let (res, dt) = timed(|| fig56_small_j(&cfg).expect("fig56 run"));
    let mut pass = dt <= Duration::from_secs(60);
    let mut parts = Vec::new();
    for r in res.iter().filter(|r| r.oe.meta.j > 3.0) {
        let v = &r.oe.values;
        let max = r.oe.max();
        let early = v[..=2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tail = &v[3..];
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let spread = tail.iter().map(|x| (x - mean).abs() / mean).fold(0.0, f64::max);
        let ok = early >= 0.9 * max && spread <= 0.25;
        pass &= ok;
        parts.push(format!("OE j={}: {:.0}% of max by step 2, tail within {:.1}%", r.oe.meta.j, 100.0 * early / max, 100.0 * spread));
    }
    let revival = res.iter().filter(|r| r.otoc.meta.j < 3.0).any(|r| {
        let v = &r.otoc.values;
        (6..v.len()).any(|t| {
            let running = v[..t].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v[t] < 0.5 * running
        })
    });
    pass &= revival;
    parts.push(format!("OTOC revival at j=3/2 or 5/2: {revival}"));
    Outcome { pass, detail: format!("{}, {dt:.1?}", parts.join("; ")) }
}

fn criterion_6() -> Outcome {
    let cfg = config(Experiment::Fig7SaddleVsChaos, &[]);
    let (runs, dt) = timed(|| fig7_saddle_vs_chaos(&cfg).expect("fig7 run"));
    let get = |label: &str| runs.iter().find(|r| r.label == label).expect("point run");
    let (saddle, chaotic) = (get("saddle"), get("chaotic"));
    let fotoc = (saddle.fotoc_stats.std, chaotic.fotoc_stats.std);
    let oe = (saddle.oe_stats.std, chaotic.oe_stats.std);
    let pass = fotoc.0 > fotoc.1 && oe.0 > oe.1 && dt <= Duration::from_secs(300);
    Outcome {
        pass,
        detail: format!(
            "tail from step {}: FOTOC std {:.4} vs {:.4}, OE std {:.4} vs {:.4}, {dt:.1?}",
            saddle.tail_start, fotoc.0, fotoc.1, oe.0, oe.1
        ),
    }
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    StateVector::normalized(amps).expect("non-zero state")
}

/// Finest-to-roughest chain built by merging random adjacent blocks.
fn roughening_chain(dim: usize, links: usize, rng: &mut ChaCha8Rng) -> Vec<CoarseGraining> {
    let mut volumes = vec![1usize; dim];
    let mut chain = vec![CoarseGraining::from_volumes(dim, &volumes).expect("finest")];
    for _ in 0..links {
        let merges = rng.gen_range(1..=volumes.len().saturating_sub(1).clamp(1, 8));
        for _ in 0..merges {
            if volumes.len() < 2 {
                break;
            }
            let i = rng.gen_range(0..volumes.len() - 1);
            let v = volumes.remove(i + 1);
            volumes[i] += v;
        }
        chain.push(CoarseGraining::from_volumes(dim, &volumes).expect("merged"));
    }
    chain
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failed = Vec::new();

    // (a) monotone under roughening
    let chains: Vec<_> = (0..5).map(|_| roughening_chain(64, 12, &mut rng)).collect();
    let mut violations = 0;
    for _ in 0..200 {
        let psi = random_state(64, &mut rng);
        for chain in &chains {
            let oes: Vec<f64> = chain.iter().map(|cg| observational_entropy(&psi, cg).unwrap().total).collect();
            violations += oes.windows(2).filter(|w| w[1] < w[0] - 1e-10).count();
        }
    }
    if violations > 0 {
        failed.push(format!("(a) {violations} monotonicity violations"));
    }

    // (b) bounds
    let mut out_of_bounds = 0;
    for chain in &chains {
        for _ in 0..40 {
            let psi = random_state(64, &mut rng);
            for cg in chain {
                let s = observational_entropy(&psi, cg).unwrap().total;
                if !(s >= -1e-12 && s <= 64f64.ln() + 1e-12) {
                    out_of_bounds += 1;
                }
            }
        }
    }
    if out_of_bounds > 0 {
        failed.push(format!("(b) {out_of_bounds} out of bounds"));
    }

    // (c) retrodiction identity
    let hh = half_half_partition(64, HalfHalfOrder::FineFirst).unwrap();
    let bad = (0..100)
        .filter(|_| !prediction_retrodiction_check(&random_state(64, &mut rng), &hh).unwrap().holds(1e-8))
        .count();
    if bad > 0 {
        failed.push(format!("(c) {bad} retrodiction failures"));
    }

    // (d) su(2)
    let mut worst_alg: f64 = 0.0;
    for twice_j in 1..=40 {
        let space = SpinSpace::from_twice_j(twice_j);
        let ops = SpinOperators::new(space);
        let (x, y, z) = (&ops.jx, &ops.jy, &ops.jz);
        let i = C64::new(0.0, 1.0);
        worst_alg = worst_alg
            .max(x.commutator(y).max_abs_diff(&z.scale(i)))
            .max(y.commutator(z).max_abs_diff(&x.scale(i)))
            .max(z.commutator(x).max_abs_diff(&y.scale(i)));
        let j = space.j();
        let cas = ComplexMatrix::identity(space.dim()).scale(C64::new(j * (j + 1.0), 0.0));
        worst_alg = worst_alg.max(ops.casimir().max_abs_diff(&cas));
    }
    if worst_alg > 1e-9 {
        failed.push(format!("(d) su(2) error {worst_alg:.1e}"));
    }

    // (e) unitarity over the dimensions and kicks the experiments use
    let mut worst_u: f64 = 0.0;
    for dim in [2usize, 4, 6, 8, 10, 64, 400, 1000, 1024] {
        for kappa in [0.5, 2.5, 3.5, 4.0, 4.5, 5.0, 6.5, 7.0, 1.5 * PI] {
            let u = floquet_unitary(KickedTopParams::new(SpinSpace::from_dim(dim).unwrap(), kappa)).unwrap();
            worst_u = worst_u.max(u.unitarity_error());
            if dim >= 400 {
                break;
            }
        }
    }
    if worst_u > 1e-10 {
        failed.push(format!("(e) unitarity error {worst_u:.1e}"));
    }

    // (f) fast path against dense projectors
    let mut worst_f: f64 = 0.0;
    for dim in [2usize, 8, 16, 32, 64] {
        let chain = roughening_chain(dim, 4, &mut rng);
        for cg in &chain {
            let psi = random_state(dim, &mut rng);
            let rho = psi.projector();
            let oracle: f64 = (0..cg.len())
                .map(|i| {
                    let p = rho.matmul(&cg.projector(i)).trace().re;
                    let v = cg.projector(i).trace().re;
                    if p > 0.0 {
                        -p * (p / v).ln()
                    } else {
                        0.0
                    }
                })
                .sum();
            worst_f = worst_f.max((observational_entropy(&psi, cg).unwrap().total - oracle).abs());
        }
    }
    if worst_f > 1e-12 {
        failed.push(format!("(f) fast path off by {worst_f:.1e}"));
    }

    // (g) classical sphere
    let mut p = PhasePoint::new(0.3, 0.4, 0.75f64.sqrt());
    let mut worst_g: f64 = 0.0;
    for _ in 0..10_000 {
        p = classical_step(p, 7.0).unwrap();
        worst_g = worst_g.max((p.norm_sqr() - 1.0).abs());
    }
    if worst_g > 1e-12 {
        failed.push(format!("(g) sphere drift {worst_g:.1e}"));
    }

    // (h) Heisenberg operators against Schroedinger-evolved vectors
    let space = SpinSpace::from_dim(64).unwrap();
    let u = floquet_unitary(KickedTopParams::new(space, 5.0)).unwrap();
    let jz = SpinOperators::new(space).jz.clone();
    let ops = heisenberg_evolve(&u, &jz, 8).unwrap();
    let ud = u.adjoint();
    let mut worst_h: f64 = 0.0;
    for _ in 0..10 {
        let (theta, phi) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let psi = coherent_state(space, theta, phi).unwrap();
        let traj = evolve_state(&u, &psi, 8).unwrap();
        let heis = otoc_from_operators(&psi, &ops).unwrap();
        for t in 0..=8 {
            let e_h = psi.expectation(&ops[t]);
            let e_s = traj[t].expectation(&jz);
            worst_h = worst_h.max((e_h - e_s).norm());
            // A(t) v = U^-t A U^t v applied by vectors only
            let at = |v: &[C64]| {
                let mut w = v.to_vec();
                for _ in 0..t {
                    w = u.apply(&w);
                }
                w = jz.apply(&w);
                for _ in 0..t {
                    w = ud.apply(&w);
                }
                w
            };
            let v = psi.amplitudes();
            let x: Vec<C64> = at(&jz.apply(v)).iter().zip(jz.apply(&at(v))).map(|(a, b)| a - b).collect();
            let schr = 0.5 * x.iter().map(|c| c.norm_sqr()).sum::<f64>();
            worst_h = worst_h.max((schr - heis[t]).abs() / schr.max(1.0));
        }
    }
    if worst_h > 1e-7 {
        failed.push(format!("(h) picture mismatch {worst_h:.1e}"));
    }

    let detail = if failed.is_empty() {
        format!(
            "a-h hold: su(2) {worst_alg:.1e}, unitarity {worst_u:.1e}, fast path {worst_f:.1e}, sphere {worst_g:.1e}, pictures {worst_h:.1e}"
        )
    } else {
        failed.join("; ")
    };
    Outcome { pass: failed.is_empty(), detail }
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let cases = [
        (Experiment::Fig3OeDynamics, vec![("kappa", "4, 7"), ("steps", "12"), ("count", "24")]),
        (Experiment::Fig56SmallJ, vec![]),
        (Experiment::Fig7SaddleVsChaos, vec![("d", "96"), ("steps", "120")]),
        (Experiment::Fig1PhaseSpace, vec![("n_init", "10"), ("steps", "50")]),
    ];
    for (experiment, pairs) in cases {
        let cfg = config(experiment, &pairs);
        let runs: Vec<_> = [1usize, 4, 1].iter().map(|&t| run_with_threads(&cfg, t).expect("run")).collect();
        let same = runs[0].tables.iter().all(|t| {
            let bytes = |i: usize| runs[i].render(&t.name, cfg.format).unwrap();
            bytes(0) == bytes(1) && bytes(0) == bytes(2)
        });
        pass &= same;
        parts.push(format!("{}: {}", experiment.name(), if same { "identical" } else { "DIFFERENT" }));
    }

    // Through the binary, with the worker cap taken from the environment.
    let dir = tempfile::tempdir().expect("tempdir");
    let outputs: Vec<Vec<(String, Vec<u8>)>> = ["1", "3"]
        .iter()
        .map(|threads| {
            let out = dir.path().join(format!("t{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_qkt-oe"))
                .args(["run", "fig4_rates_vs_kappa", "--set", "d=96", "--set", "count=20", "--out"])
                .arg(&out)
                .env("QKT_OE_THREADS", threads)
                .stdout(Stdio::null())
                .status()
                .expect("spawn qkt-oe");
            assert!(status.success());
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| {
                    let p = e.unwrap().path();
                    (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
                })
                .collect();
            files.sort();
            files
        })
        .collect();
    let cli_same = outputs[0] == outputs[1] && !outputs[0].is_empty();
    pass &= cli_same;
    parts.push(format!("CLI with 1 vs 3 workers: {}", if cli_same { "identical" } else { "DIFFERENT" }));
    Outcome { pass, detail: parts.join("; ") }
}

fn main() -> ExitCode {
    let (fig3, fig3_time) = fig3_run();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 OE saturation, chaotic regime", Box::new(|| criterion_1(&fig3, fig3_time))),
        ("2 saturation-approach slopes", Box::new(|| criterion_2(&fig3, fig3_time))),
        ("3 growth-rate slopes against kappa", Box::new(criterion_3)),
        ("4 OE against coarse-graining length", Box::new(criterion_4)),
        ("5 small-j robustness", Box::new(criterion_5)),
        ("6 saddle against chaos", Box::new(criterion_6)),
        ("7 property suites", Box::new(criterion_7)),
        ("8 determinism", Box::new(criterion_8)),
    ];
    let mut failures = 0;
    for (name, check) in &criteria {
        let o = check();
        failures += usize::from(!o.pass);
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
