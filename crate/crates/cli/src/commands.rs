use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ceo_core::gaussian::{figure2_table, Figure2Row};
use ceo_core::{
    chernoff_divergence, chernoff_information, estimate_exponent, evaluate_plan, group_bound,
    induced_codeword_channel, optimize_weights, solve_lfp, vanishing_rate_limit, GroupPlan,
    SimConfig,
};

use crate::scenario::{load_lfp, Scenario};
use crate::{fmt_f64, Cli, Command};

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Divergence { file, s, x1, x2, curve, dictionary_entry } => {
            divergence(&Scenario::load(&file)?, s, x1, x2, curve, dictionary_entry, out)
        }
        Command::Optimize { file, taus } => optimize(&Scenario::load(&file)?, &taus, out),
        Command::Simulate { file } => simulate(&Scenario::load(&file)?, out),
        Command::Gaussian { sigma_s2, grid, scenario } => {
            let (sigma_s2, grid) = match (scenario, sigma_s2, grid) {
                (Some(path), _, _) => {
                    let sc = Scenario::load(&path)?;
                    let g = sc
                        .gaussian
                        .with_context(|| format!("{} has no [gaussian] block", path.display()))?;
                    (g.sigma_s2, g.sigma_n2)
                }
                (None, Some(v), Some(g)) => (v, g.0),
                _ => bail!("pass --sigma-s2 with --grid, or --scenario"),
            };
            gaussian(sigma_s2, &grid, out)
        }
        Command::Lfp { file } => lfp(&file, out),
    }
}

pub fn divergence(
    sc: &Scenario,
    s: usize,
    x1: usize,
    x2: usize,
    curve: Option<usize>,
    dictionary_entry: Option<usize>,
    out: &mut dyn Write,
) -> Result<()> {
    let (xn, sn) = (sc.source.x_size(), sc.source.s_size());
    if x1 >= xn || x2 >= xn || s >= sn {
        bail!("pair (s={s}, x1={x1}, x2={x2}) is outside |X| = {xn}, |S| = {sn}");
    }
    if x1 == x2 {
        bail!("x1 and x2 must differ");
    }
    let (p0, p1) = match dictionary_entry {
        None => (sc.observation.row(x1, s).to_vec(), sc.observation.row(x2, s).to_vec()),
        Some(k) => {
            let q = sc
                .dictionary
                .get(k)
                .with_context(|| format!("dictionary has {} entries, no entry {k}", sc.dictionary.len()))?;
            let cw = induced_codeword_channel(&sc.observation, q)?;
            (cw.row(x1, s).to_vec(), cw.row(x2, s).to_vec())
        }
    };
    let best = chernoff_information(&p0, &p1)?;
    writeln!(out, "kind,s,x1,x2,lambda,value")?;
    writeln!(
        out,
        "optimum,{s},{x1},{x2},{},{}",
        fmt_f64(best.lambda_star),
        fmt_f64(best.value.to_f64())
    )?;
    if let Some(n) = curve {
        if n < 2 {
            bail!("--curve needs at least 2 points, got {n}");
        }
        for k in 0..n {
            let lambda = if k + 1 == n { 1.0 } else { k as f64 / (n - 1) as f64 };
            let d = chernoff_divergence(&p0, &p1, lambda)?;
            writeln!(out, "sample,{s},{x1},{x2},{},{}", fmt_f64(lambda), fmt_f64(d.to_f64()))?;
        }
    }
    Ok(())
}

pub fn optimize(sc: &Scenario, taus: &[f64], out: &mut dyn Write) -> Result<()> {
    if sc.dictionary.is_empty() {
        bail!("the scenario has no [[dictionary]] entries to optimize over");
    }
    let sweep = vanishing_rate_limit(&sc.source, &sc.observation, &sc.dictionary, taus)?;
    let bound = group_bound(sc.source.x_size(), sc.source.s_size());
    writeln!(
        out,
        "tau,ratio,numerator,denominator,support,worst_s,worst_x1,worst_x2,lambda_star,group_bound"
    )?;
    for step in &sweep {
        let r = &step.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{bound}",
            fmt_f64(step.tau),
            fmt_f64(r.ratio),
            fmt_f64(r.numerator),
            fmt_f64(r.denominator),
            step.plan.group_count(),
            r.worst_triple.s,
            r.worst_triple.x1,
            r.worst_triple.x2,
            fmt_f64(r.lambda_star),
        )?;
    }
    let last = sweep.last().map_or(0, |s| s.plan.group_count());
    writeln!(out, "# support={last} group_bound={bound}")?;
    Ok(())
}

/// The plan used by `simulate`: explicit weights if given, otherwise optimized.
pub fn simulation_plan(sc: &Scenario) -> Result<GroupPlan> {
    let sim = sc.simulation.as_ref().context("the scenario has no [simulation] block")?;
    if sc.dictionary.is_empty() {
        bail!("the scenario has no [[dictionary]] entries to quantize with");
    }
    Ok(match &sim.weights {
        Some(w) => GroupPlan::new(w.clone(), sc.dictionary.clone())?,
        None => optimize_weights(&sc.source, &sc.observation, &sc.dictionary)?.0,
    })
}

pub fn simulate(sc: &Scenario, out: &mut dyn Write) -> Result<()> {
    let plan = simulation_plan(sc)?;
    let sim = sc.simulation.as_ref().expect("checked by simulation_plan");
    let theory = evaluate_plan(&sc.source, &sc.observation, &plan)?;
    let config = SimConfig::new(
        sc.source.clone(),
        sc.observation.clone(),
        plan,
        sim.l_values.clone(),
        sim.trials,
        sim.seed,
    )?;
    let result = estimate_exponent(&config)?;
    writeln!(out, "l,errors,trials,p_e_hat")?;
    for p in &result.per_l {
        writeln!(out, "{},{},{},{}", p.l, p.errors, p.trials, fmt_f64(p.p_e_hat))?;
    }
    writeln!(
        out,
        "# fitted_slope={} slope_stderr={} intercept={} theory_numerator={}",
        fmt_f64(result.fitted_slope),
        fmt_f64(result.slope_stderr),
        fmt_f64(result.intercept),
        fmt_f64(theory.numerator)
    )?;
    Ok(())
}

pub fn write_figure2(rows: &[Figure2Row], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "sigma_n2,alpha_with,alpha_without")?;
    for r in rows {
        writeln!(out, "{},{},{}", fmt_f64(r.sigma_n2), fmt_f64(r.alpha_with), fmt_f64(r.alpha_without))?;
    }
    Ok(())
}

pub fn gaussian(sigma_s2: f64, grid: &[f64], out: &mut dyn Write) -> Result<()> {
    write_figure2(&figure2_table(sigma_s2, grid)?, out)
}

pub fn lfp(path: &Path, out: &mut dyn Write) -> Result<()> {
    let (inst, tol) = load_lfp(path)?;
    let sol = solve_lfp(&inst, tol)?;
    let weight_cols: Vec<String> = (0..inst.j_max()).map(|j| format!("w_{j}")).collect();
    writeln!(out, "gamma,support_size,{}", weight_cols.join(","))?;
    let weights: Vec<String> = sol.weights.iter().map(|w| fmt_f64(*w)).collect();
    writeln!(out, "{},{},{}", fmt_f64(sol.gamma), sol.support_size, weights.join(","))?;
    Ok(())
}
