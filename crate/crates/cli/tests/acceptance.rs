//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the report is always printed.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use dps_cli::instance;
use dps_core::model::sigma;
use dps_core::monotonicity::{
    a_tilde, check_partial_column_sums, check_ratio_dominance, check_separation, coalesce_weights, compare_policies,
    contraction_factor, fixed_point_iterates, mu_tilde, normalize_arrivals, sojourn_difference_expansion,
    split_classes, y_direct, y_fixed_point_default,
};
use dps_core::scalar::rel_close;
use dps_core::simulator::{simulate, SimConfig};
use dps_core::solver::{log_grid, ps_sojourn, solve_sojourn, sweep, weight_family};
use dps_core::testing::*;
use dps_core::{SystemParams, WeightVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn instances_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn load(name: &str) -> instance::Instance {
    instance::load(&instances_dir().join(format!("{name}.instance"))).expect("shipped instance parses")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nonincreasing(v: &[f64]) -> bool {
    let scale = v.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    v.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale)
}

fn load_reproduction() -> Outcome {
    let r1 = load("fig1").params.load();
    let r2 = load("fig2").params.load();
    ensure((r1 - 0.911).abs() <= 0.001, || format!("rho(fig1) = {r1}"))?;
    ensure((r2 - 0.92).abs() <= 0.005, || format!("rho(fig2) = {r2}"))?;
    Ok(format!("rho(fig1) = {r1:.6}, rho(fig2) = {r2:.6}"))
}

fn condition_verdicts() -> Outcome {
    let s1 = check_separation(&load("fig1").params);
    let s2 = check_separation(&load("fig2").params);
    ensure(s1.holds, || "fig1 should satisfy separation".into())?;
    let js: Vec<usize> = s2.violations.iter().map(|v| v.j).collect();
    ensure(!s2.holds && js == [1, 2], || format!("fig2 violations at {js:?}"))?;

    let bin = env!("CARGO_BIN_EXE_dps");
    for (name, text, code) in [("fig1", "(5) satisfied", 0), ("fig2", "(5) violated at j=1, j=2", 1)] {
        let out = Command::new(bin)
            .arg("check")
            .arg(instances_dir().join(format!("{name}.instance")))
            .output()
            .map_err(|e| e.to_string())?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        ensure(stdout.contains(text) && out.status.code() == Some(code), || {
            format!("dps check {name}: exit {:?}, output:\n{stdout}", out.status.code())
        })?;
    }
    Ok("fig1 satisfied, fig2 violated at j=1, j=2".into())
}

fn sweep_shape() -> Outcome {
    let xs = log_grid(1.05, 50.0, 60);
    for name in ["fig1", "fig2"] {
        let rows = sweep(&load(name).params, &xs).map_err(|e| e.to_string())?;
        ensure(rows.len() == 60, || format!("{name}: {} rows", rows.len()))?;
        for (k, r) in rows.iter().enumerate() {
            ensure(r.t_opt <= r.t_dps && r.t_dps <= r.t_ps, || {
                format!(
                    "{name} row {}: t_opt {} t_dps {} t_ps {}",
                    k + 1,
                    r.t_opt,
                    r.t_dps,
                    r.t_ps
                )
            })?;
            if k > 0 {
                let prev = rows[k - 1].t_dps;
                ensure(r.t_dps <= prev + 1e-10, || {
                    format!("{name} row {}: {} after {prev}", k + 1, r.t_dps)
                })?;
            }
        }
    }
    Ok("60 points each, t_dps nonincreasing and within [t_opt, t_ps]".into())
}

fn ps_reduction() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let p = stable_instance(&mut r, 6, 0.95);
        let sol = solve_sojourn(&p, &WeightVector::uniform(p.class_count())).map_err(|e| e.to_string())?;
        for (k, t) in sol.per_class.iter().enumerate() {
            let expect = 1.0 / (p.mu()[k] * (1.0 - p.load()));
            worst = worst.max((t - expect).abs() / expect);
            ensure(rel_close(*t, expect, 1e-9), || {
                format!("instance {i} class {}: {t} vs {expect}", k + 1)
            })?;
        }
    }
    Ok(format!("200 instances, max relative error {worst:.1e}"))
}

fn certified_comparisons() -> Outcome {
    let mut r = rng(5);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..500 {
        let p = unit_separated_instance(&mut r, 6, 0.95);
        let (a, b) = dominating_pair(&mut r, p.class_count());
        let rep = compare_policies(&p, &a, &b).map_err(|e| e.to_string())?;
        worst = worst.max(rep.difference);
        ensure(rep.certified, || format!("instance {i} not certified: {rep:?}"))?;
        ensure(rep.t_alpha <= rep.t_beta + 1e-10, || format!("instance {i}: {rep:?}"))?;
    }
    Ok(format!("500 instances, max T(alpha) - T(beta) = {worst:.2e}"))
}

fn sorted_weights_beat_ps() -> Outcome {
    let mut r = rng(6);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..500 {
        let p = stable_instance(&mut r, 6, 0.95);
        let g = weights_in_g(&mut r, p.class_count());
        let t = solve_sojourn(&p, &g).map_err(|e| e.to_string())?.aggregate;
        let ps = ps_sojourn(&p);
        worst = worst.max(t - ps);
        ensure(t <= ps + 1e-10, || format!("instance {i}: {t} > {ps}"))?;
    }
    Ok(format!("500 instances, max T(g) - T_ps = {worst:.2e}"))
}

fn structural_properties() -> Outcome {
    const N: usize = 100;
    let mut r = rng(7);
    let fail = |property: &str, i: usize, what: String| format!("{property}, instance {i}: {what}");

    for i in 0..N {
        let p = stable_instance(&mut r, 6, 0.95);
        let g = WeightVector::new((0..p.class_count()).map(|_| r.gen_range(0.01..10.0)).collect()).unwrap();
        let (mu, w) = (p.mu(), g.as_slice());
        for a in 0..p.class_count() {
            for b in 0..p.class_count() {
                let s_ab = sigma(&p, &g, a + 1, b + 1).unwrap();
                let s_ba = sigma(&p, &g, b + 1, a + 1).unwrap();
                ensure(rel_close(s_ab * w[a], s_ba * w[b], 1e-12), || {
                    fail("sigma symmetry", i, format!("({a}, {b})"))
                })?;
                let lhs = s_ab / mu[a] + s_ba / mu[b];
                ensure(rel_close(lhs, 1.0 / (mu[a] * mu[b]), 1e-12), || {
                    fail("sigma sum", i, format!("({a}, {b})"))
                })?;
            }
        }
    }

    for i in 0..N {
        let p = stable_instance(&mut r, 6, 0.95);
        let (a, b) = dominating_pair(&mut r, p.class_count());
        ensure(check_ratio_dominance(&a, &b).unwrap(), || {
            fail("sign pattern", i, "pair not dominating".into())
        })?;
        for x in 1..=p.class_count() {
            for y in 1..=p.class_count() {
                let (sa, sb) = (sigma(&p, &a, x, y).unwrap(), sigma(&p, &b, x, y).unwrap());
                ensure(x > y || sa <= sb + 1e-12, || {
                    fail("sign pattern", i, format!("({x}, {y}) {sa} > {sb}"))
                })?;
                ensure(x < y || sa >= sb - 1e-12, || {
                    fail("sign pattern", i, format!("({x}, {y}) {sa} < {sb}"))
                })?;
            }
        }
    }

    for i in 0..N {
        let p = unit_instance(&mut r, 6, 0.95);
        let m = p.class_count();
        let a = WeightVector::new((0..m).map(|_| r.gen_range(0.01..10.0)).collect()).unwrap();
        let b = WeightVector::new((0..m).map(|_| r.gen_range(0.01..10.0)).collect()).unwrap();
        let e = sojourn_difference_expansion(&p, &a, &b).map_err(|e| e.to_string())?;
        let tb = solve_sojourn(&p, &b).unwrap().aggregate;
        let d = solve_sojourn(&p, &a).unwrap().aggregate - tb;
        // Relative to the difference, floored at the sojourn scale so that
        // near-equal policies are not judged on cancellation noise.
        ensure((e - d).abs() <= 1e-9 * d.abs().max(tb), || {
            fail("expansion", i, format!("{e} vs {d}"))
        })?;
    }

    for i in 0..N {
        let p = unit_separated_instance(&mut r, 6, 0.95);
        let g = weights_in_g(&mut r, p.class_count());
        let y = y_direct(&p, &g).map_err(|e| e.to_string())?;
        ensure(nonincreasing(&y.y), || fail("y ordering", i, format!("{:?}", y.y)))?;
        let fp = y_fixed_point_default(&p, &g).map_err(|e| e.to_string())?;
        for (n, it) in fixed_point_iterates(&p, &g).unwrap().take(fp.iterations).enumerate() {
            ensure(nonincreasing(&it), || {
                fail("iterate ordering", i, format!("iterate {} {it:?}", n + 1))
            })?;
        }
        let mt = mu_tilde(&p, &g).unwrap();
        ensure(nonincreasing(&mt), || fail("mu-tilde ordering", i, format!("{mt:?}")))?;
    }

    for i in 0..N {
        let p = unit_instance(&mut r, 6, 0.95);
        let g = WeightVector::new((0..p.class_count()).map(|_| r.gen_range(0.01..10.0)).collect()).unwrap();
        let a = a_tilde(&p, &g).unwrap();
        let q = contraction_factor(&p, &g).unwrap();
        ensure(q > 0.0 && q < 1.0, || fail("contraction", i, format!("q = {q}")))?;
        for _ in 0..100 {
            let x: Vec<f64> = (0..p.class_count()).map(|_| r.gen_range(0.0..5.0)).collect();
            let lhs: f64 = a.mul_vec(&x).iter().sum();
            let rhs = q * x.iter().sum::<f64>();
            ensure(lhs <= rhs * (1.0 + 1e-12), || {
                fail("contraction", i, format!("{lhs} > {rhs}"))
            })?;
        }

        let d = y_direct(&p, &g).unwrap();
        let f = y_fixed_point_default(&p, &g).map_err(|e| e.to_string())?;
        let gap = d.y.iter().zip(&f.y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        ensure(gap <= 1e-8, || fail("fixed point", i, format!("gap {gap:e}")))?;
    }

    for i in 0..N {
        let p = unit_instance(&mut r, 6, 0.95);
        let g = weights_in_g(&mut r, p.class_count());
        ensure(check_partial_column_sums(&p, &g).unwrap(), || {
            fail("partial column sums", i, format!("{:?}", p.mu()))
        })?;
        // Equal rates and weights give equal transformed rates.
        let mut mu = p.mu().to_vec();
        mu.push(*mu.last().unwrap());
        let mut w = g.as_slice().to_vec();
        w.push(*w.last().unwrap());
        let scaled = SystemParams::with_unit_arrivals(mu.iter().map(|v| v * 2.0).collect()).unwrap();
        let mt = mu_tilde(&scaled, &WeightVector::new(w).unwrap()).unwrap();
        let n = mt.len();
        ensure(rel_close(mt[n - 1], mt[n - 2], 1e-12), || {
            fail("mu-tilde ties", i, format!("{mt:?}"))
        })?;
    }

    Ok(format!("{N} instances per property, 100 vectors per contraction instance"))
}

fn splitting_and_normalization() -> Outcome {
    let mut r = rng(8);
    for i in 0..100 {
        let (p, q, counts) = rational_instance(&mut r, 4, 0.95);
        let g = weights_in_g(&mut r, p.class_count());
        let (sp, sg) = split_classes(&p, &g, q, &counts).map_err(|e| e.to_string())?;
        let t = solve_sojourn(&p, &g).unwrap().aggregate;
        let ts = solve_sojourn(&sp, &sg).unwrap().aggregate;
        ensure(rel_close(t, ts, 1e-9), || format!("split, instance {i}: {t} vs {ts}"))?;
    }
    for i in 0..100 {
        let base = unit_instance(&mut r, 6, 0.95);
        let c = r.gen_range(0.05..20.0);
        let p = SystemParams::new(vec![c; base.class_count()], base.mu().iter().map(|m| m * c).collect()).unwrap();
        let g = weights_in_g(&mut r, p.class_count());
        let (np, ng) = normalize_arrivals(&p, &g).map_err(|e| e.to_string())?;
        let t = solve_sojourn(&p, &g).unwrap().per_class;
        let tn = solve_sojourn(&np, &ng).unwrap().per_class;
        for (k, (a, b)) in t.iter().zip(&tn).enumerate() {
            ensure(rel_close(c * a, *b, 1e-9), || {
                format!("normalize, instance {i} class {}: {} vs {b}", k + 1, c * a)
            })?;
        }
    }
    Ok("100 split instances, 100 normalized instances".into())
}

fn coalescing() -> Outcome {
    let mut r = rng(9);
    let mut pairs = 0;
    for i in 0..100 {
        let p = unit_unseparated_instance(&mut r, 6, 0.95);
        let g = weights_in_g(&mut r, p.class_count());
        let c = coalesce_weights(&p, &g).map_err(|e| e.to_string())?;
        let y = y_direct(&p, &c).map_err(|e| e.to_string())?.y;
        for v in check_separation(&p).violations {
            pairs += 1;
            let (a, b) = (y[v.j - 1], y[v.j]);
            ensure(b <= a + 1e-12 * a.abs().max(1.0), || {
                format!("instance {i} pair {}: y = {y:?}", v.j)
            })?;
        }
    }
    Ok(format!("100 instances, {pairs} coalesced pairs ordered"))
}

fn simulator_agreement() -> Outcome {
    const TARGET: u64 = 200_000;
    let check = |label: &str, p: &SystemParams, g: &WeightVector, seed: u64| -> Result<f64, String> {
        let exact = solve_sojourn(p, g).map_err(|e| e.to_string())?;
        let est = simulate(p, g, &SimConfig::new(seed, TARGET)).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for k in 0..p.class_count() {
            let (m, se, t) = (est.per_class_mean[k], est.per_class_stderr[k], exact.per_class[k]);
            ensure(est.completed[k] >= TARGET, || {
                format!("{label} class {}: {} completions", k + 1, est.completed[k])
            })?;
            let allowed = (3.0 * se).max(0.02 * t);
            worst = worst.max((m - t).abs() / allowed);
            ensure((m - t).abs() <= allowed, || {
                format!("{label} class {}: {m} vs {t} (se {se})", k + 1)
            })?;
        }
        Ok(worst)
    };

    let fig1 = load("fig1").params;
    let mut worst = check("fig1", &fig1, &weight_family(2.0, 3).unwrap(), 2024)?;
    let mut r = rng(10);
    for i in 0..20 {
        let p = stable_instance(&mut r, 6, 0.9);
        let g = weights_in_g(&mut r, p.class_count());
        worst = worst.max(check(&format!("random instance {i}"), &p, &g, 3000 + i)?);
    }
    Ok(format!(
        "fig1 and 20 random instances, {TARGET} completions per class, worst error {worst:.2} of allowance"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_dps");
    let run = |args: &[&str], out: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!("dps {args:?} failed: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        std::fs::read(out).map_err(|e| e.to_string())
    };
    let fig = |n: &str| instances_dir().join(format!("{n}.instance")).display().to_string();
    let (f1, f2) = (fig("fig1"), fig("fig2"));

    let mut compared = 0;
    for args in [
        vec!["sweep", f1.as_str()],
        vec!["sweep", f2.as_str(), "--grid", "1.05:50:7"],
        vec!["simulate", f1.as_str(), "--seed", "7", "--family", "x=2"],
        vec!["simulate", f2.as_str(), "--seed", "8", "--target", "20000"],
    ] {
        let a = run(&args, &dir.path().join("a.csv"))?;
        let b = run(&args, &dir.path().join("b.csv"))?;
        ensure(!a.is_empty() && a == b, || {
            format!("dps {args:?} output differs between runs")
        })?;
        compared += 1;
    }
    Ok(format!("{compared} command lines, output byte-identical across runs"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("load reproduction", load_reproduction),
        ("condition verdicts", condition_verdicts),
        ("sweep shape", sweep_shape),
        ("PS reduction", ps_reduction),
        ("certified comparisons", certified_comparisons),
        ("sorted weights beat PS", sorted_weights_beat_ps),
        ("structural properties", structural_properties),
        ("class splitting and normalization", splitting_and_normalization),
        ("weight coalescing", coalescing),
        ("simulator agreement", simulator_agreement),
        ("deterministic output", determinism),
    ];

    let mut failed = 0;
    for (n, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = criterion();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2} s)", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.2} s)", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
