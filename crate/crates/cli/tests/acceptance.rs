//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line straight to
//! stdout (visible without `--nocapture`) and then asserts.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use ceo_cli::scenario::Scenario;
use ceo_core::gaussian::{discretized_normal, gaussian_exponent, gaussian_rate, GaussianScenario};
use ceo_core::lfp::{LfpInstance, ZERO_WEIGHT};
use ceo_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{verdict} criterion {id} ({name}): {detail}").unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn ceo(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_ceo")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_1_gaussian_closed_forms() {
    let s = GaussianScenario::new(1.0, 0.0, 1.0).unwrap();
    let rate = gaussian_rate(&s);
    let (exponent, lambda) = gaussian_exponent(&s);
    let pass = (rate - 0.5 * 2f64.ln()).abs() <= 1e-12
        && (exponent - 1.0 / 16.0).abs() <= 1e-12
        && lambda == 0.5;
    report(1, "Gaussian closed forms", pass, &format!("rate={rate} exponent={exponent} lambda*={lambda}"));
}

#[test]
fn criterion_2_context_gain_curves() {
    let stdout = ceo(&["gaussian", "--sigma-s2", "1", "--grid", "0.25:4:61"]);
    let mut reader = csv::Reader::from_reader(stdout.as_slice());
    let rows: Vec<(f64, f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap())
        })
        .collect();
    let mut worst = 0.0f64;
    for (n2, with, without) in &rows {
        worst = worst
            .max((with - 1.0 / (4.0 * n2)).abs())
            .max((without - 1.0 / (4.0 * (n2 + 1.0))).abs());
    }
    let gaps: Vec<f64> = rows.iter().map(|(_, w, wo)| w - wo).collect();
    let positive = gaps.iter().all(|g| *g > 0.0);
    let decreasing = gaps.windows(2).all(|g| g[1] < g[0]);
    let pass = rows.len() == 61 && worst <= 1e-12 && positive && decreasing;
    report(
        2,
        "context gain curves",
        pass,
        &format!("{} rows, max error {worst:e}, gap positive={positive} decreasing={decreasing}", rows.len()),
    );
}

#[test]
fn criterion_3_vanishing_rate_convergence() {
    let ratio = |v: f64| {
        let s = GaussianScenario::new(1.0, 0.0, v).unwrap();
        gaussian_exponent(&s).0 / gaussian_rate(&s)
    };
    let seq: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&v| ratio(v)).collect();
    let rel = (seq[2] - 0.25).abs() / 0.25;
    let monotone = seq.windows(2).all(|w| w[1] > w[0]);
    report(
        3,
        "vanishing-rate convergence",
        rel < 0.01 && monotone,
        &format!("ratios {seq:?}, relative error at 1e4 = {rel:e}"),
    );
}

#[test]
fn criterion_4_discretization_bridge() {
    let start = Instant::now();
    let p0 = discretized_normal(0.0, 2.0, -12.0, 13.0, 0.001).unwrap();
    let p1 = discretized_normal(1.0, 2.0, -12.0, 13.0, 0.001).unwrap();
    let r = chernoff_information(&p0, &p1).unwrap();
    let value = r.value.to_f64();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (value - 0.0625).abs() < 1e-4 && (r.lambda_star - 0.5).abs() < 1e-3 && elapsed < 5.0;
    report(
        4,
        "discretization bridge",
        pass,
        &format!("value={value} lambda*={} in {elapsed:.2}s", r.lambda_star),
    );
}

fn random_instance(rng: &mut ChaCha8Rng, i_max: usize, j_max: usize) -> LfpInstance {
    let mut draw = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let a: Vec<f64> = (0..i_max * j_max).map(|_| draw(0.5, 5.0)).collect();
    let b: Vec<f64> = (0..i_max * j_max).map(|_| draw(0.5, 5.0)).collect();
    let c1 = draw(0.0, 1.0);
    let c2 = draw(0.5, 2.0);
    LfpInstance::from_flat(i_max, j_max, &a, &b, c1, c2).unwrap()
}

#[test]
fn criterion_5_lfp_sparsity_and_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sparse = 0;
    for k in 0..100 {
        let inst = random_instance(&mut rng, 1 + k % 3, 4 + k % 5);
        let sol = solve_lfp(&inst, 1e-9).unwrap();
        let support = sol.weights.iter().filter(|w| **w > ZERO_WEIGHT).count();
        if support <= inst.i_max() {
            sparse += 1;
        }
    }
    let mut worst_gap = 0.0f64;
    for k in 0..20 {
        let j_max = 2 + k % 3;
        let inst = random_instance(&mut rng, 1 + k % 3, j_max);
        let step = match j_max {
            2 => 1e-5,
            3 => 5e-4,
            _ => 1e-3,
        };
        let sol = solve_lfp(&inst, 1e-9).unwrap();
        let (grid, _) = brute_force_lfp(&inst, step).unwrap();
        worst_gap = worst_gap.max((sol.gamma - grid).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = sparse == 100 && worst_gap < 1e-3 && elapsed < 30.0;
    report(
        5,
        "LFP sparsity and oracle agreement",
        pass,
        &format!("{sparse}/100 sparse, worst |gamma - grid| = {worst_gap:e}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_6_exponent_per_rate_assembly() {
    let sc = Scenario::load(&scenario("bsc.toml")).unwrap();
    let plan = GroupPlan::single(TestChannel::identity(2));
    let r = evaluate_plan(&sc.source, &sc.observation, &plan).unwrap();
    let numerator = -(0.6f64.ln());
    let denominator = -(0.1f64 * 0.1f64.ln() + 0.9 * 0.9f64.ln());
    let pass = (r.numerator - numerator).abs() <= 1e-9
        && (r.denominator - denominator).abs() <= 1e-9
        && (r.ratio - numerator / denominator).abs() <= 1e-9
        && (r.ratio - 1.5714).abs() < 5e-5;
    report(
        6,
        "exponent-per-rate assembly",
        pass,
        &format!("numerator={} denominator={} ratio={}", r.numerator, r.denominator, r.ratio),
    );
}

#[test]
fn criterion_7_monte_carlo_slope() {
    let start = Instant::now();
    let sc = Scenario::load(&scenario("context_benchmark.toml")).unwrap();
    let sim = sc.simulation.clone().unwrap();
    assert_eq!(sim.l_values, [10, 20, 30, 40, 50]);
    assert_eq!(sim.trials, 200_000);
    let (plan, _) = optimize_weights(&sc.source, &sc.observation, &sc.dictionary).unwrap();
    let theory = evaluate_plan(&sc.source, &sc.observation, &plan).unwrap().numerator;
    let config =
        SimConfig::new(sc.source, sc.observation, plan, sim.l_values, sim.trials, sim.seed).unwrap();
    let result = estimate_exponent(&config).unwrap();
    let slope = result.fitted_slope;
    let rel = (slope - theory).abs() / theory;
    let within = rel <= 0.15;
    let below = slope <= theory + 2.0 * result.slope_stderr;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        7,
        "Monte-Carlo slope vs theory",
        within && below && elapsed < 300.0,
        &format!(
            "slope={slope} stderr={} theory={theory} relative gap={rel:.4} (<=0.15: {within}), \
             slope <= theory + 2 stderr: {below}, {elapsed:.1}s",
            result.slope_stderr
        ),
    );
}

fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.01 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

fn brute_force_mi(src: &[Vec<f64>], obs: &[Vec<Vec<f64>>], q: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for x in 0..2 {
        for s in 0..2 {
            for y in 0..2 {
                for (u, q_u) in q[y].iter().enumerate() {
                    let joint = src[x][s] * obs[x][s][y] * q_u;
                    let p_xs_u: f64 = (0..2).map(|yy| src[x][s] * obs[x][s][yy] * q[yy][u]).sum();
                    let p_xs_y = src[x][s] * obs[x][s][y];
                    if joint > 0.0 {
                        total += joint * (joint * src[x][s] / (p_xs_y * p_xs_u)).ln();
                    }
                }
            }
        }
    }
    total
}

#[test]
fn criterion_8_invariant_suites() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = |p0: &[f64], p1: &[f64], l: f64| chernoff_divergence(p0, p1, l).unwrap().to_f64();

    let mut divergence_ok = 0;
    for k in 0..500 {
        let n = 2 + k % 5;
        let p0 = random_pmf(&mut rng, n);
        let p1 = random_pmf(&mut rng, n);
        let lambda: f64 = rng.random();
        let skew = (d(&p0, &p1, lambda) - d(&p1, &p0, 1.0 - lambda)).abs() < 1e-12;
        let ends = d(&p0, &p1, 0.0).abs() < 1e-12 && d(&p0, &p1, 1.0).abs() < 1e-12;
        let curve: Vec<f64> = (0..=100).map(|i| d(&p0, &p1, i as f64 / 100.0)).collect();
        let concave = curve.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= 1e-9);
        if skew && ends && concave {
            divergence_ok += 1;
        }
    }

    let mut mi_ok = 0;
    for _ in 0..100 {
        let flat = random_pmf(&mut rng, 4);
        let src = vec![vec![flat[0], flat[1]], vec![flat[2], flat[3]]];
        let obs: Vec<Vec<Vec<f64>>> =
            (0..2).map(|_| (0..2).map(|_| random_pmf(&mut rng, 2)).collect()).collect();
        let q: Vec<Vec<f64>> = (0..2).map(|_| random_pmf(&mut rng, 2)).collect();
        let got = conditional_mutual_information(
            &JointSourcePmf::new(src.clone()).unwrap(),
            &ObservationChannel::new(obs.clone()).unwrap(),
            &TestChannel::new(q.clone()).unwrap(),
        )
        .unwrap();
        if (got - brute_force_mi(&src, &obs, &q)).abs() < 1e-10 {
            mi_ok += 1;
        }
    }

    let path = scenario("bsc.toml");
    let first = ceo(&["simulate", path.to_str().unwrap()]);
    let second = ceo(&["simulate", path.to_str().unwrap()]);
    let identical = first == second;
    let elapsed = start.elapsed().as_secs_f64();

    report(
        8,
        "invariant suites",
        divergence_ok == 500 && mi_ok == 100 && identical && elapsed < 60.0,
        &format!(
            "divergence {divergence_ok}/500, mutual information {mi_ok}/100, \
             repeat simulation byte-identical: {identical}, {elapsed:.1}s"
        ),
    );
}
