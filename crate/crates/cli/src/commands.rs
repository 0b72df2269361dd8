use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use dps_core::monotonicity::{check_g, check_separation, coalesce_weights, compare_policies};
use dps_core::simulator::{simulate, SimConfig};
use dps_core::solver::{cmu_sojourn, ps_sojourn, solve_sojourn, sweep};
use dps_core::{SystemParams, WeightVector};

use crate::args::{Cli, Command, Family, Grid, WeightSpec};
use crate::format::{list, num};
use crate::instance::{self, Instance};
use crate::{Exit, Failure};

/// Largest |z| accepted by `simulate` before it reports a mismatch.
pub const Z_LIMIT: f64 = 4.0;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Exit, Failure> {
    match &cli.command {
        Command::Solve { instance, family } => solve(&load(instance, *family)?, out),
        Command::Check { instance, family } => check(&load(instance, *family)?, out),
        Command::Compare { instance, alpha, beta } => compare(&load(instance, None)?, alpha, beta, out),
        Command::Sweep {
            instance,
            grid,
            out: dest,
        } => sweep_csv(&load(instance, None)?, grid, dest.as_deref(), out),
        Command::Simulate {
            instance,
            family,
            seed,
            target,
            warmup,
            out: dest,
        } => {
            let mut cfg = SimConfig::new(*seed, *target);
            cfg.warmup_fraction = *warmup;
            simulate_report(&load(instance, *family)?, &cfg, dest.as_deref(), out)
        }
    }
}

fn load(path: &Path, family: Option<Family>) -> Result<Instance, Failure> {
    let mut inst = instance::load(path)?;
    if let Some(f) = family {
        inst.weights = f.weights(inst.params.class_count())?;
    }
    Ok(inst)
}

fn header(inst: &Instance, weights: bool, out: &mut dyn Write) -> std::io::Result<()> {
    if let Some(name) = &inst.name {
        writeln!(out, "instance  {name}")?;
    }
    writeln!(out, "classes   {}", inst.params.class_count())?;
    writeln!(out, "load      {}", num(inst.params.load()))?;
    if weights {
        writeln!(out, "weights   {}", list(inst.weights.as_slice()))?;
    }
    Ok(())
}

pub fn solve(inst: &Instance, out: &mut dyn Write) -> Result<Exit, Failure> {
    let (p, g) = (&inst.params, &inst.weights);
    let sol = solve_sojourn(p, g)?;
    header(inst, true, out)?;
    writeln!(out)?;
    writeln!(
        out,
        "{:>5} {:>16} {:>16} {:>16} {:>16}",
        "class", "lambda", "mu", "weight", "sojourn"
    )?;
    for k in 0..p.class_count() {
        writeln!(
            out,
            "{:>5} {:>16} {:>16} {:>16} {:>16}",
            k + 1,
            num(p.lambda()[k]),
            num(p.mu()[k]),
            num(g.as_slice()[k]),
            num(sol.per_class[k])
        )?;
    }
    writeln!(out)?;
    writeln!(out, "t_dps     {}", num(sol.aggregate))?;
    writeln!(out, "t_ps      {}", num(ps_sojourn(p)))?;
    writeln!(out, "t_opt     {}", num(cmu_sojourn(p)))?;
    Ok(Exit::Ok)
}

pub fn check(inst: &Instance, out: &mut dyn Write) -> Result<Exit, Failure> {
    let (p, g) = (&inst.params, &inst.weights);
    header(inst, true, out)?;
    let in_g = check_g(g);
    writeln!(out, "weights nonincreasing: {}", yes_no(in_g))?;

    let sep = check_separation(p);
    if sep.holds {
        writeln!(out, "(5) satisfied")?;
    } else {
        let at: Vec<String> = sep.violations.iter().map(|v| format!("j={}", v.j)).collect();
        writeln!(out, "(5) violated at {}", at.join(", "))?;
    }
    let bound = 1.0 - p.load();
    for j in 1..p.class_count() {
        let ratio = p.mu()[j] / p.mu()[j - 1];
        let rel = if ratio <= bound { "<=" } else { ">" };
        writeln!(
            out,
            "  j={j}: mu_{}/mu_{j} = {} {rel} 1 - rho = {}",
            j + 1,
            num(ratio),
            num(bound)
        )?;
    }

    if !sep.holds {
        if in_g {
            let c = coalesce_weights(p, g)?;
            writeln!(out, "coalesced weights: {}", list(c.as_slice()))?;
        } else {
            writeln!(out, "coalesced weights: unavailable, weights are not nonincreasing")?;
        }
    }
    let certified = in_g && sep.holds;
    writeln!(out, "certified: {}", yes_no(certified))?;
    Ok(if certified { Exit::Ok } else { Exit::Uncertified })
}

pub fn compare(inst: &Instance, alpha: &WeightSpec, beta: &WeightSpec, out: &mut dyn Write) -> Result<Exit, Failure> {
    let p = &inst.params;
    let a = alpha.weights(p.class_count())?;
    let b = beta.weights(p.class_count())?;
    let r = compare_policies(p, &a, &b)?;
    header(inst, false, out)?;
    writeln!(out, "alpha     {}", list(a.as_slice()))?;
    writeln!(out, "beta      {}", list(b.as_slice()))?;
    writeln!(out, "alpha nonincreasing: {}", yes_no(r.alpha_in_g))?;
    writeln!(out, "beta nonincreasing:  {}", yes_no(r.beta_in_g))?;
    writeln!(out, "ratio dominance:     {}", yes_no(r.ratio_condition_holds))?;
    writeln!(out, "separation:          {}", yes_no(r.separation_condition_holds()))?;
    writeln!(out, "certified:           {}", yes_no(r.certified))?;
    writeln!(out, "t_alpha   {}", num(r.t_alpha))?;
    writeln!(out, "t_beta    {}", num(r.t_beta))?;
    writeln!(out, "t_alpha - t_beta  {}", num(r.difference))?;
    match &r.unit_checks {
        Some(u) => {
            writeln!(out, "unit-arrival reduction: {} classes", u.classes)?;
            writeln!(out, "  y nonincreasing: {}", yes_no(u.y_nonincreasing))?;
            writeln!(out, "  expansion difference: {}", num(u.expansion_difference))?;
        }
        None => writeln!(out, "unit-arrival reduction: unavailable")?,
    }

    Ok(if r.theorem_violated() {
        Exit::TheoremViolation
    } else if r.certified {
        Exit::Ok
    } else {
        Exit::Uncertified
    })
}

/// Writes the sweep CSV. The bytes depend only on the instance and grid.
pub fn write_sweep(params: &SystemParams, grid: &Grid, w: &mut dyn Write) -> Result<usize, Failure> {
    let rows = sweep(params, &grid.points())?;
    let m = params.class_count();
    let g_cols: Vec<String> = (1..=m).map(|k| format!("g_{k}")).collect();
    writeln!(w, "x,{},t_dps,t_ps,t_opt", g_cols.join(","))?;
    for row in &rows {
        let g: Vec<String> = row.g.as_slice().iter().map(|&v| num(v)).collect();
        writeln!(
            w,
            "{},{},{},{},{}",
            num(row.x),
            g.join(","),
            num(row.t_dps),
            num(row.t_ps),
            num(row.t_opt)
        )?;
    }
    Ok(rows.len())
}

fn sweep_csv(inst: &Instance, grid: &Grid, dest: Option<&Path>, out: &mut dyn Write) -> Result<Exit, Failure> {
    match dest {
        None => {
            write_sweep(&inst.params, grid, out)?;
        }
        Some(path) => {
            let mut w = create(path)?;
            let n = write_sweep(&inst.params, grid, &mut w)?;
            w.flush()?;
            writeln!(out, "wrote {n} rows to {}", path.display())?;
        }
    }
    Ok(Exit::Ok)
}

/// Per-class comparison of a simulation run with the exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub exact: f64,
    pub mean: f64,
    pub stderr: f64,
    pub z: f64,
    pub little: f64,
    pub little_stderr: f64,
    pub completed: u64,
}

pub fn simulation_rows(params: &SystemParams, g: &WeightVector, cfg: &SimConfig) -> Result<Vec<SimRow>, Failure> {
    let exact = solve_sojourn(params, g)?;
    let est = simulate(params, g, cfg)?;
    let little = est.littles_law_sojourn(params);
    Ok((0..params.class_count())
        .map(|k| {
            let (mean, se, t) = (est.per_class_mean[k], est.per_class_stderr[k], exact.per_class[k]);
            SimRow {
                exact: t,
                mean,
                stderr: se,
                z: z_score(mean, t, se),
                little: little[k].0,
                little_stderr: little[k].1,
                completed: est.completed[k],
            }
        })
        .collect())
}

fn z_score(mean: f64, exact: f64, se: f64) -> f64 {
    let d = mean - exact;
    if d == 0.0 {
        0.0
    } else if se > 0.0 {
        d / se
    } else {
        f64::INFINITY.copysign(d)
    }
}

fn simulate_report(
    inst: &Instance,
    cfg: &SimConfig,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Exit, Failure> {
    let (p, g) = (&inst.params, &inst.weights);
    let rows = simulation_rows(p, g, cfg)?;
    header(inst, true, out)?;
    writeln!(out, "seed      {}", cfg.seed)?;
    writeln!(out)?;
    writeln!(
        out,
        "{:>5} {:>16} {:>16} {:>14} {:>8} {:>16} {:>10}",
        "class", "exact", "simulated", "stderr", "z", "little", "completed"
    )?;
    for (k, r) in rows.iter().enumerate() {
        writeln!(
            out,
            "{:>5} {:>16} {:>16} {:>14} {:>8.3} {:>16} {:>10}",
            k + 1,
            num(r.exact),
            num(r.mean),
            num(r.stderr),
            r.z,
            num(r.little),
            r.completed
        )?;
    }

    if let Some(path) = dest {
        let mut w = create(path)?;
        writeln!(
            w,
            "class,lambda,mu,weight,t_exact,t_sim,stderr,z,t_little,t_little_stderr,completed"
        )?;
        for (k, r) in rows.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                k + 1,
                num(p.lambda()[k]),
                num(p.mu()[k]),
                num(g.as_slice()[k]),
                num(r.exact),
                num(r.mean),
                num(r.stderr),
                num(r.z),
                num(r.little),
                num(r.little_stderr),
                r.completed
            )?;
        }
        w.flush()?;
    }

    let worst = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    if worst > Z_LIMIT {
        writeln!(out, "max |z| = {} exceeds {}", num(worst), num(Z_LIMIT))?;
        return Ok(Exit::SimMismatch);
    }
    Ok(Exit::Ok)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::parse(format!("{}: cannot write: {e}", path.display())))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
