//! Acceptance criteria. Runs as a plain binary (no libtest harness) so every
//! criterion prints exactly one PASS/FAIL line; exits nonzero on any failure.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use rand::seq::index::sample;
use rand::Rng;

use postselect::algorithm::{StopRule, BOUND_TOLERANCE, IDENTITY_TOLERANCE, SIGMA_BAND, TV_TOLERANCE};
use postselect::statevec::rng_from_seed;
use postselect::sweep::{quantile_threshold, sweep_points, SweepPoint};
use postselect::verify::{verify, Verification};
use postselect::{
    amplitude_amplification_success, exact_analysis, grover_simulate, random_search,
    run_repeat_until_success, AmplitudeEncoder, CostInstance, Generator, JunkPolicy, RunConfig,
};

const SWEEP_COUNT: usize = 240;
const SWEEP_SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Swept {
    point: SweepPoint,
    config: RunConfig,
    verification: Verification,
}

fn run_sweep() -> Vec<Swept> {
    sweep_points(SWEEP_COUNT, SWEEP_SEED, 12)
        .expect("sweep points")
        .into_iter()
        .map(|point| {
            let (instance, config) = point.build().expect("sweep point builds");
            let verification = verify(&instance, &config).expect("verification runs");
            Swept {
                point,
                config,
                verification,
            }
        })
        .collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_postselect"))
}

fn demo() -> CostInstance {
    CostInstance::from_costs(vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]).unwrap()
}

fn random_instance(seed: u64, n_data: usize) -> CostInstance {
    Generator::UniformRandom {
        n_data,
        low: 0.0,
        high: 1.0,
    }
    .generate(seed)
    .unwrap()
}

fn refutation_bound(sweep: &[Swept]) -> Outcome {
    let violations = sweep
        .iter()
        .filter(|s| !s.verification.analysis.within_bound())
        .count();
    let worst = sweep
        .iter()
        .map(|s| s.verification.analysis.p_joint - s.verification.analysis.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let encoders: BTreeSet<String> = sweep.iter().map(|s| format!("{:?}", s.point.encoder)).collect();
    let junks: BTreeSet<String> = sweep.iter().map(|s| s.config.junk.to_string()).collect();
    let sizes: BTreeSet<usize> = sweep.iter().map(|s| s.point.n_data).collect();
    let covered = encoders.len() == 7 && junks.len() == 2 && sizes.iter().all(|n| (1..=12).contains(n));

    let status = bin()
        .args(["verify", "--sweep", "200"])
        .output()
        .expect("binary runs");
    let exit = status.status.code();
    outcome(
        violations == 0 && covered && exit == Some(0),
        format!(
            "{} configs, {} violations, max p_joint - M/N = {worst:.3e}, {} encoders x {} junk, n_data {:?}..{:?}; `verify --sweep 200` exit {exit:?}",
            sweep.len(),
            violations,
            encoders.len(),
            junks.len(),
            sizes.first(),
            sizes.last()
        ),
    )
}

fn per_state_bound(sweep: &[Swept]) -> Outcome {
    let violations = sweep
        .iter()
        .filter(|s| !s.verification.analysis.per_state_within_bound())
        .count();
    let worst = sweep
        .iter()
        .map(|s| {
            s.verification.analysis.max_per_state_product() - s.verification.analysis.per_state_ceiling()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let identity: Vec<&Swept> = sweep
        .iter()
        .filter(|s| s.config.encoder == AmplitudeEncoder::Identity)
        .collect();
    let identity_gap = identity
        .iter()
        .flat_map(|s| {
            let ceiling = s.verification.analysis.per_state_ceiling();
            s.verification
                .analysis
                .per_state_products
                .iter()
                .map(move |p| (p - ceiling).abs())
        })
        .fold(0.0, f64::max);
    outcome(
        violations == 0 && !identity.is_empty() && identity_gap <= IDENTITY_TOLERANCE,
        format!(
            "{violations} violations, max(product - 1/N) = {worst:.3e}; identity equality gap {identity_gap:.3e} over {} configs",
            identity.len()
        ),
    )
}

fn tightness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = rng_from_seed(31);
    for i in 0..20 {
        let inst = random_instance(1000 + i, rng.gen_range(1..=12));
        let c_tol = quantile_threshold(&inst, rng.gen_range(0.05..1.0));
        for enc in [
            AmplitudeEncoder::Identity,
            AmplitudeEncoder::OracleThreshold(c_tol),
        ] {
            let a = exact_analysis(&inst, &RunConfig::new(c_tol, enc)).unwrap();
            worst = worst.max((a.p_joint - a.bound).abs());
        }
    }
    outcome(
        worst <= IDENTITY_TOLERANCE,
        format!("20 instances x {{identity, oracle}}: max |p_joint - M/N| = {worst:.3e}"),
    )
}

fn chain_identity(sweep: &[Swept]) -> Outcome {
    let defined: Vec<&Swept> = sweep
        .iter()
        .filter(|s| s.verification.chain.is_defined())
        .collect();
    let worst = defined
        .iter()
        .map(|s| s.verification.chain.max_discrepancy())
        .fold(0.0, f64::max);
    outcome(
        !defined.is_empty() && worst <= IDENTITY_TOLERANCE,
        format!(
            "{} defined configs, max route discrepancy {worst:.3e}",
            defined.len()
        ),
    )
}

fn sequential_equals_joint(sweep: &[Swept]) -> Outcome {
    let worst = sweep
        .iter()
        .map(|s| s.verification.tv_distance)
        .fold(0.0, f64::max);
    outcome(
        worst <= TV_TOLERANCE,
        format!("{} configs, max TV distance {worst:.3e}", sweep.len()),
    )
}

fn sampled_convergence() -> Outcome {
    let demo = demo();
    let two = random_instance(77, 6);
    let part = Generator::NumberPartition {
        weights: vec![3.0, 5.0, 6.0, 7.0, 9.0, 11.0],
    }
    .generate(0)
    .unwrap();
    let structured = Generator::HammingStructured {
        n_data: 8,
        lipschitz: 1.0,
    }
    .generate(5)
    .unwrap();
    let cases: Vec<(&CostInstance, f64, AmplitudeEncoder, JunkPolicy, usize)> = vec![
        (
            &demo,
            3.0,
            AmplitudeEncoder::Identity,
            JunkPolicy::Concentrated,
            1,
        ),
        (
            &demo,
            3.0,
            AmplitudeEncoder::OracleThreshold(3.0),
            JunkPolicy::Spread,
            2,
        ),
        (
            &demo,
            5.0,
            AmplitudeEncoder::CosinePower(1.0),
            JunkPolicy::Concentrated,
            1,
        ),
        (&demo, 5.0, AmplitudeEncoder::Linear, JunkPolicy::Spread, 3),
        (
            &two,
            quantile_threshold(&two, 0.5),
            AmplitudeEncoder::CosinePower(0.5),
            JunkPolicy::Concentrated,
            1,
        ),
        (
            &two,
            quantile_threshold(&two, 0.25),
            AmplitudeEncoder::CosinePower(2.0),
            JunkPolicy::Spread,
            2,
        ),
        (
            &part,
            quantile_threshold(&part, 0.3),
            AmplitudeEncoder::Linear,
            JunkPolicy::Concentrated,
            1,
        ),
        (
            &part,
            quantile_threshold(&part, 0.5),
            AmplitudeEncoder::CosinePower(8.0),
            JunkPolicy::Spread,
            2,
        ),
        (
            &structured,
            quantile_threshold(&structured, 0.25),
            AmplitudeEncoder::CosinePower(1.0),
            JunkPolicy::Concentrated,
            1,
        ),
        (
            &structured,
            quantile_threshold(&structured, 0.5),
            AmplitudeEncoder::Identity,
            JunkPolicy::Spread,
            3,
        ),
    ];
    let mut inside = 0;
    let mut worst_z: f64 = 0.0;
    for (i, (inst, c_tol, enc, junk, n_anc)) in cases.iter().enumerate() {
        let cfg = RunConfig::new(*c_tol, *enc)
            .with_junk(*junk)
            .with_ancillas(*n_anc)
            .with_budget(100_000, StopRule::Exhaust)
            .with_seed(500 + i as u64);
        let exact = exact_analysis(inst, &cfg).unwrap().p_joint;
        let stats = run_repeat_until_success(inst, &cfg).unwrap();
        let sigma = (exact * (1.0 - exact) / stats.preparations_used as f64).sqrt();
        if stats.consistent_with(exact) {
            inside += 1;
        }
        if sigma > 0.0 {
            worst_z = worst_z.max((stats.p_joint_estimate - exact).abs() / sigma);
        }
    }
    outcome(
        inside == cases.len(),
        format!(
            "{inside}/{} configs within {SIGMA_BAND} sigma at 1e5 preparations, max |z| = {worst_z:.2}",
            cases.len()
        ),
    )
}

fn junk_independence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut mismatched_definedness = 0;
    let encoders = [
        AmplitudeEncoder::Identity,
        AmplitudeEncoder::CosinePower(0.5),
        AmplitudeEncoder::CosinePower(2.0),
        AmplitudeEncoder::CosinePower(8.0),
        AmplitudeEncoder::Linear,
    ];
    let mut rng = rng_from_seed(77);
    for i in 0..20 {
        let inst = random_instance(2000 + i, rng.gen_range(1..=10));
        let c_tol = quantile_threshold(&inst, rng.gen_range(0.0..1.0));
        let enc = if i % 6 == 5 {
            AmplitudeEncoder::OracleThreshold(c_tol)
        } else {
            encoders[i as usize % encoders.len()]
        };
        let base = RunConfig::new(c_tol, enc).with_ancillas(rng.gen_range(2..=4));
        let a = exact_analysis(&inst, &base.clone().with_junk(JunkPolicy::Concentrated)).unwrap();
        let b = exact_analysis(&inst, &base.with_junk(JunkPolicy::Spread)).unwrap();
        worst = worst
            .max((a.p_first - b.p_first).abs())
            .max((a.p_joint - b.p_joint).abs());
        match (a.p_cond, b.p_cond) {
            (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
            (None, None) => {}
            _ => mismatched_definedness += 1,
        }
    }
    outcome(
        worst <= IDENTITY_TOLERANCE && mismatched_definedness == 0,
        format!("20 configs, max difference {worst:.3e}"),
    )
}

fn baseline_sanity() -> Outcome {
    let mut rng = rng_from_seed(8);
    let mut worst: f64 = 0.0;
    let triples = 60;
    for _ in 0..triples {
        let n_data = rng.gen_range(1..=12);
        let n = 1usize << n_data;
        let m = rng.gen_range(1..=n);
        let t = rng.gen_range(0..=50);
        let mut costs = vec![1.0; n];
        for k in sample(&mut rng, n, m).iter() {
            costs[k] = 0.0;
        }
        let inst = CostInstance::from_costs(costs).unwrap();
        let sim = grover_simulate(&inst, 0.5, t).unwrap();
        let closed = amplitude_amplification_success(n_data, m, t).unwrap();
        worst = worst.max((sim - closed).abs());
    }
    let classic = amplitude_amplification_success(3, 1, 2).unwrap();

    let inst = demo();
    let runs = 10_000u64;
    let trials: Vec<f64> = (0..runs)
        .map(|s| random_search(&inst, 3.0, s, 1_000_000).unwrap().trials_used as f64)
        .collect();
    let mean = trials.iter().sum::<f64>() / runs as f64;
    let p = 3.0 / 8.0;
    let se = ((1.0 - p) / (p * p) / runs as f64).sqrt();
    let expected = 8.0 / 3.0;

    let pass =
        worst <= 1e-10 && (classic - 0.94531).abs() <= 1e-5 && (mean - expected).abs() <= SIGMA_BAND * se;
    outcome(
        pass,
        format!(
            "{triples} Grover triples max |sim - closed| = {worst:.3e}; N=8,M=1,t=2 -> {classic:.6}; random search mean {mean:.4} vs N/M {expected:.4} (5 sigma = {:.4})",
            SIGMA_BAND * se
        ),
    )
}

fn worse_than_random() -> Outcome {
    let mut rng = rng_from_seed(99);
    let mut worse = 0;
    let mut min_ratio = f64::INFINITY;
    for i in 0..10 {
        let inst = random_instance(3000 + i, rng.gen_range(3..=10));
        let c_tol = quantile_threshold(&inst, 0.25);
        let a = exact_analysis(&inst, &RunConfig::new(c_tol, AmplitudeEncoder::CosinePower(8.0))).unwrap();
        let random_cost = inst.len() as f64 / a.m as f64;
        if let Some(per_hit) = a.expected_preparations_per_hit() {
            min_ratio = min_ratio.min(per_hit / random_cost);
            if per_hit > random_cost {
                worse += 1;
            }
        }
    }
    outcome(
        worse == 10,
        format!("{worse}/10 instances with 1/p_joint > N/M, smallest ratio {min_ratio:.2}"),
    )
}

fn strip_timestamp(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| match serde_json::from_str::<serde_json::Value>(l) {
            Ok(serde_json::Value::Object(mut map)) => {
                map.remove("timestamp");
                serde_json::Value::Object(map).to_string()
            }
            _ => l.to_string(),
        })
        .collect()
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = d.join("inst.txt");
    let inst_s = inst.to_str().unwrap().to_string();
    let commands: Vec<(&str, Vec<String>)> = vec![
        (
            "generate",
            vec![
                "generate",
                "--kind",
                "hamming_structured",
                "--n",
                "8",
                "--seed",
                "4",
                "-o",
                "{out}",
            ],
        ),
        (
            "verify-file",
            vec![
                "verify",
                &inst_s,
                "--c-tol",
                "0",
                "--encoder",
                "cospow:2",
                "--seed",
                "1",
                "-o",
                "{out}",
            ],
        ),
        (
            "verify-sweep",
            vec!["verify", "--sweep", "30", "--seed", "9", "-o", "{out}"],
        ),
        (
            "verify-csv",
            vec![
                "verify", "--sweep", "10", "--seed", "9", "--format", "csv", "-o", "{out}",
            ],
        ),
        (
            "compare",
            vec![
                "compare",
                &inst_s,
                "--c-tol",
                "0",
                "--strategy",
                "postselect,random,hillclimb,grover:auto",
                "--seeds",
                "50",
                "--seed",
                "3",
                "-o",
                "{out}",
            ],
        ),
    ]
    .into_iter()
    .map(|(n, v)| (n, v.into_iter().map(String::from).collect()))
    .collect();

    let gen_ok = bin()
        .args([
            "generate",
            "--kind",
            "hamming_structured",
            "--n",
            "8",
            "--seed",
            "4",
            "-o",
            &inst_s,
        ])
        .output()
        .unwrap()
        .status
        .success();
    let mut identical = 0;
    let mut failed = Vec::new();
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = d.join(format!("{name}-{rep}.out"));
            let argv: Vec<String> = args
                .iter()
                .map(|a| {
                    if a == "{out}" {
                        out.to_str().unwrap().to_string()
                    } else {
                        a.clone()
                    }
                })
                .collect();
            let ok = bin().args(&argv).output().unwrap().status.success();
            outputs.push((ok, strip_timestamp(&out)));
        }
        if outputs.iter().all(|(ok, _)| *ok) && outputs[0].1 == outputs[1].1 && !outputs[0].1.is_empty() {
            identical += 1;
        } else {
            failed.push(*name);
        }
    }
    outcome(
        gen_ok && failed.is_empty(),
        format!(
            "{identical}/{} commands byte-identical over two runs (timestamp excluded){}",
            commands.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; differing: {failed:?}")
            }
        ),
    )
}

fn main() {
    let sweep = run_sweep();
    let criteria: Vec<Criterion<'_>> = vec![
        (
            "AC1 refutation bound p_joint <= M/N",
            Box::new(|| refutation_bound(&sweep)),
        ),
        (
            "AC2 per-state product <= 1/N",
            Box::new(|| per_state_bound(&sweep)),
        ),
        ("AC3 tightness witnesses", Box::new(tightness)),
        ("AC4 chain identity", Box::new(|| chain_identity(&sweep))),
        (
            "AC5 sequential = joint",
            Box::new(|| sequential_equals_joint(&sweep)),
        ),
        ("AC6 sampled convergence", Box::new(sampled_convergence)),
        ("AC7 junk independence", Box::new(junk_independence)),
        ("AC8 baseline sanity", Box::new(baseline_sanity)),
        ("AC9 worse than random search", Box::new(worse_than_random)),
        ("AC10 reproducibility", Box::new(reproducibility)),
    ];
    const { assert!(BOUND_TOLERANCE == 1e-9 && IDENTITY_TOLERANCE == 1e-12 && TV_TOLERANCE == 1e-10) };

    let mut failures = 0;
    for (name, check) in &criteria {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
