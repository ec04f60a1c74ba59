//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the lines show up in plain
//! `cargo test` output.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use narrowing::analysis::{prop_basic_check, prop_basic_terms};
use narrowing::blin::{
    ace_batch_bound, assert_lemma_eli, blin_rate_sweep, check_survivor_nesting,
    optimal_cube_losses, run_blin, ArmRule, BlinConfig,
};
use narrowing::blin_mos::{
    ace_noisy_batch_bound, mos_k_default, mos_optimal_cube_losses, mos_sample_count,
    prop_basic_params, run_blin_mos, sample_count_within_prop_basic, MosConfig, MosMode,
};
use narrowing::cube::DyadicCube;
use narrowing::objectives::{GpNorm, NoiseModel, Objective};
use narrowing::random_search::{rs_high_prob_bound, run_random_search};
use narrowing::rng::RandomSource;
use narrowing::schedule::{make_schedule, EdgeLengthSchedule, ScheduleKind, ScheduleSpec};
use narrowing::stats::{fit_line, median};
use narrowing_harness::compare::{run_comparison, Winner};
use narrowing_harness::config::{Algo, ExperimentConfig};
use narrowing_harness::runner::run_one;
use narrowing_harness::verify::{scatter_fits, scatter_grid, zooming_slopes};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);
type SampleCase = (MosMode, f64, f64, Option<f64>, f64, f64, Option<f64>);

fn budgets(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|i| 1u64 << i).collect()
}

fn gp(d: usize, p: f64) -> GpNorm {
    GpNorm::new(d, p).expect("valid g_p")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || ((a - b) / b).abs() <= tol
}

fn within_time(limit: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    if spent <= limit {
        Ok(())
    } else {
        Err(format!("took {spent:.1?}, limit {limit:?}"))
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let out = std::env::temp_dir().join("narrowing-acceptance");
    let (report, _) = run_comparison(1 << 19, 4, &[5.0, 1.5], &seeds, Path::new(&out))
        .map_err(|e| e.to_string())?;
    let p5 = report.entry(5.0).unwrap();
    let p15 = report.entry(1.5).unwrap();
    let msg = format!(
        "p=5: mos {:.3e} vs blin {:.3e}; p=1.5: blin {:.3e} vs mos {:.3e}",
        p5.mos_median, p5.blin_median, p15.blin_median, p15.mos_median
    );
    within_time(Duration::from_secs(300), start)?;
    if p5.winner == Winner::BlinMos && p15.blin_median <= p15.mos_median {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let grid = scatter_grid(0, 100_000).map_err(|e| e.to_string())?;
    let frac = grid.iter().filter(|c| c.pass).count() as f64 / grid.len() as f64;
    let fits = scatter_fits(0, 100_000).map_err(|e| e.to_string())?;
    let worst_dim = fits
        .iter()
        .map(|f| (f.scattering_dim - f.expected_dim).abs())
        .fold(0.0, f64::max);
    let worst_const = fits
        .iter()
        .map(|f| (f.scattering_const - 1.0).abs())
        .fold(0.0, f64::max);
    within_time(Duration::from_secs(60), start)?;
    let msg = format!(
        "{} points, {:.1}% within 3 sigma; {} fits, max |d_s err| {worst_dim:.3}, max |kappa_s err| {worst_const:.3}",
        grid.len(),
        100.0 * frac,
        fits.len()
    );
    if grid.len() == 24 && frac >= 0.95 && fits.iter().all(|f| f.pass) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let zs = zooming_slopes().map_err(|e| e.to_string())?;
    within_time(Duration::from_secs(120), start)?;
    let msg = zs
        .iter()
        .map(|z| {
            format!(
                "({},{}) slope {:.3} vs {:.3}",
                z.d, z.p, z.slope, z.expected
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    let flat = zs
        .iter()
        .find(|z| z.d == 1 && z.p == 1.0)
        .is_some_and(|z| z.counts.windows(2).all(|w| w[0] == w[1]));
    if zs.iter().all(|z| z.pass) && flat {
        Ok(msg)
    } else {
        Err(format!("{msg}; (1,1) level-constant: {flat}"))
    }
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..200).collect();
    let f5 = gp(4, 5.0);
    let ds5 = 0.8;
    let rs = narrowing::random_search::rs_rate_sweep(&f5, &budgets(8, 16), &seeds)
        .map_err(|e| e.to_string())?;
    let rs_ok = (rs.slope + 1.0 / ds5).abs() <= 0.2;

    let f1 = gp(1, 1.0);
    let noise: NoiseModel = "uniform:1"
        .parse()
        .map_err(|e: narrowing::error::Error| e.to_string())?;
    let noisy = narrowing::random_search::rs_noisy_rate_check(
        &f1,
        &noise,
        &budgets(10, 18),
        narrowing::random_search::default_omega,
        &seeds,
    )
    .map_err(|e| e.to_string())?;
    let noisy_ok = (noisy.slope + 0.5).abs() <= 0.2;

    let blin_seeds: Vec<u64> = (0..10).collect();
    let mut blin_msgs = Vec::new();
    let mut blin_ok = true;
    for p in [5.0, 1.5] {
        let r = blin_rate_sweep(
            &gp(4, p),
            &budgets(12, 19),
            ScheduleKind::AceBlin,
            ArmRule::Center,
            &blin_seeds,
        )
        .map_err(|e| e.to_string())?;
        blin_ok &= r.slope <= r.expected_slope + 0.2;
        blin_msgs.push(format!(
            "blin p={p} {:.3} (<= {:.3})",
            r.slope,
            r.expected_slope + 0.2
        ));
    }
    within_time(Duration::from_secs(600), start)?;
    let msg = format!(
        "rs {:.3} (-1.25 +/- 0.2), rs-noisy {:.3} (-0.5 +/- 0.2), {}",
        rs.slope,
        noisy.slope,
        blin_msgs.join(", ")
    );
    if rs_ok && noisy_ok && blin_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Check {
    let f = gp(1, 1.0);
    let (t, eps) = (1000, 0.1);
    let radius = rs_high_prob_bound(1.0, 1.0, 1.0, 1.0, t, eps).map_err(|e| e.to_string())?;
    let violations = (0..500u64)
        .into_par_iter()
        .map(|s| {
            let r = run_random_search(&f, t, &NoiseModel::None, &RandomSource::new(s)).unwrap();
            u32::from(1.0 - r.y_max > radius)
        })
        .sum::<u32>();
    let rate = f64::from(violations) / 500.0;
    let msg = format!("radius {radius:.6}, violation rate {rate:.3} (<= 0.13)");
    if rate <= eps + 0.03 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn schedule_for(kind: ScheduleKind, t: u64, f: &GpNorm, k: Option<f64>) -> EdgeLengthSchedule {
    let prof = f.profile().unwrap();
    let mut spec = ScheduleSpec::new(kind, t, f.dim(), prof.zooming_dim)
        .scattering_dim(prof.scattering_dim)
        .allow_geometric_fallback(true);
    if let Some(k) = k {
        spec = spec.k(k);
    }
    make_schedule(&spec).expect("schedule")
}

/// Default `k` where the formula has a solution, else `k = 1`.
fn default_k(f: &GpNorm, t: u64) -> f64 {
    let prof = f.profile().unwrap();
    mos_k_default(
        t,
        prof.zooming_const,
        prof.scattering_const,
        prof.scattering_dim,
        prof.zooming_dim,
    )
    .unwrap_or(1.0)
}

fn check_blin_run(
    f: &GpNorm,
    t: u64,
    kind: ScheduleKind,
    arm_rule: ArmRule,
    seed: u64,
) -> Result<usize, String> {
    let tag = format!("blin {} T={t} {kind} {arm_rule:?} seed {seed}", f.name());
    let cfg = BlinConfig::new(t, 1.0).arm_rule(arm_rule);
    let schedule = schedule_for(kind, t, f, None);
    let src = RandomSource::new(seed);
    let run = run_blin(f, &cfg, &schedule, &src).map_err(|e| format!("{tag}: {e}"))?;
    let x_star = &f.profile().unwrap().x_star;
    if run.trace.summary.total_pulls > t {
        return Err(format!("{tag}: {} pulls", run.trace.summary.total_pulls));
    }
    let lost = optimal_cube_losses(&run.batches, x_star);
    if !lost.is_empty() {
        return Err(format!("{tag}: optimal cube lost in batches {lost:?}"));
    }
    let eli = assert_lemma_eli(&run, f, 1.0).map_err(|e| e.to_string())?;
    if !eli.pass() {
        return Err(format!(
            "{tag}: {} gap-bound violations",
            eli.violations.len()
        ));
    }
    check_survivor_nesting(&run.batches).map_err(|e| format!("{tag}: {e}"))?;
    let first = &run.batches[0];
    let cells = 1usize << (first.level as usize * f.dim());
    let distinct: std::collections::HashSet<&DyadicCube> = first.cubes.iter().collect();
    if first.cubes.len() != cells
        || distinct.len() != cells
        || first.cubes.iter().any(|c| c.level() != first.level)
    {
        return Err(format!(
            "{tag}: first partition does not tile the unit cube"
        ));
    }
    let again = run_blin(f, &cfg, &schedule, &src).map_err(|e| e.to_string())?;
    if serde_json::to_vec(&again.trace).unwrap() != serde_json::to_vec(&run.trace).unwrap() {
        return Err(format!("{tag}: rerun differs"));
    }
    Ok(eli.cubes_checked)
}

fn check_mos_run(f: &GpNorm, t: u64, noisy: bool, seed: u64) -> Result<usize, String> {
    let prof = f.profile().unwrap();
    let (cfg, schedule, noise) = if noisy {
        let noise: NoiseModel = "uniform:1".parse().unwrap();
        (
            MosConfig::noisy(prof.scattering_const, prof.scattering_dim),
            schedule_for(ScheduleKind::AceMosNoisy, t, f, None),
            noise,
        )
    } else {
        let k = default_k(f, t);
        (
            MosConfig::noiseless_k(prof.scattering_const, prof.scattering_dim, k, 1.0),
            EdgeLengthSchedule::geometric(),
            NoiseModel::None,
        )
    };
    let tag = format!("mos {} T={t} noisy={noisy} seed {seed}", f.name());
    let src = RandomSource::new(seed);
    let run =
        run_blin_mos(f, t, &cfg, &schedule, &noise, &src).map_err(|e| format!("{tag}: {e}"))?;
    if run.trace.summary.total_pulls > t {
        return Err(format!("{tag}: {} pulls", run.trace.summary.total_pulls));
    }
    if !noisy {
        let lost = mos_optimal_cube_losses(&run, &prof.x_star);
        if !lost.is_empty() {
            return Err(format!("{tag}: optimal cube lost in batches {lost:?}"));
        }
    }
    for rec in &run.records {
        let (kappa, gamma, x) = prop_basic_params(&cfg, run.kappa_p, rec.level);
        let ok = sample_count_within_prop_basic(rec.n_m, run.epsilon, kappa, gamma, x)
            .map_err(|e| format!("{tag}: {e}"))?;
        if !ok || rec.n_m < 1 {
            return Err(format!(
                "{tag}: n_m = {} outside the sample-count bounds at batch {}",
                rec.n_m, rec.batch
            ));
        }
    }
    let again = run_blin_mos(f, t, &cfg, &schedule, &noise, &src).map_err(|e| e.to_string())?;
    if serde_json::to_vec(&again.trace).unwrap() != serde_json::to_vec(&run.trace).unwrap() {
        return Err(format!("{tag}: rerun differs"));
    }
    Ok(run.records.len())
}

fn check_schedules() -> Result<usize, String> {
    let mut checked = 0;
    for (d, p) in [(4, 5.0), (4, 1.5), (2, 2.0)] {
        let f = gp(d, p);
        for t in [1u64 << 10, 1 << 14, 1 << 19, 1 << 30] {
            for kind in [
                ScheduleKind::Geometric,
                ScheduleKind::AceBlin,
                ScheduleKind::AceMosNoisy,
                ScheduleKind::AceMosK,
            ] {
                let k = (kind == ScheduleKind::AceMosK).then(|| default_k(&f, t));
                let s = schedule_for(kind, t, &f, k);
                let mut prev_level = 0;
                let mut prev_edge = 1.0;
                for m in 1..=s.len().min(200) {
                    let (level, edge) = (s.level(m).unwrap(), s.edge(m).unwrap());
                    if level < prev_level
                        || prev_edge / edge != 2f64.powi((level - prev_level) as i32)
                    {
                        return Err(format!(
                            "{kind} T={t} ({d},{p}): r_{m} does not refine r_{}",
                            m - 1
                        ));
                    }
                    prev_level = level;
                    prev_edge = edge;
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

fn check_tiling() -> Result<usize, String> {
    let mut checked = 0;
    for (cube, ratio) in [
        (DyadicCube::unit(2), 2u64),
        (DyadicCube::new(3, vec![5, 2]).unwrap(), 4),
        (DyadicCube::new(1, vec![1, 0, 1]).unwrap(), 8),
        (DyadicCube::new(2, vec![3, 0, 1, 2]).unwrap(), 2),
    ] {
        let kids = cube.children(ratio).map_err(|e| e.to_string())?;
        let d = cube.dim() as u32;
        let distinct: std::collections::HashSet<&DyadicCube> = kids.iter().collect();
        let level = cube.level() + ratio.trailing_zeros();
        let ok = kids.len() as u64 == ratio.pow(d)
            && distinct.len() == kids.len()
            && kids
                .iter()
                .all(|k| k.level() == level && cube.contains_cube(k));
        if !ok {
            return Err(format!(
                "children of {cube:?} at ratio {ratio} do not tile it"
            ));
        }
        checked += kids.len();
    }
    Ok(checked)
}

fn criterion_6() -> Check {
    let profiles = [gp(4, 5.0), gp(4, 1.5), gp(2, 2.0)];
    let mut blin_cases = Vec::new();
    for f in &profiles {
        for t in [1u64 << 12, 1 << 16] {
            for kind in [ScheduleKind::Geometric, ScheduleKind::AceBlin] {
                for rule in [ArmRule::Center, ArmRule::UniformRandom] {
                    for seed in 0..3 {
                        blin_cases.push((f, t, kind, rule, seed));
                    }
                }
            }
        }
    }
    let cubes: usize = blin_cases
        .par_iter()
        .map(|&(f, t, kind, rule, seed)| check_blin_run(f, t, kind, rule, seed))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();

    let mut mos_cases = Vec::new();
    for f in &profiles[..2] {
        for t in [1u64 << 14, 1 << 17, 1 << 19] {
            for noisy in [false, true] {
                for seed in 0..3 {
                    mos_cases.push((f, t, noisy, seed));
                }
            }
        }
    }
    let records: usize = mos_cases
        .par_iter()
        .map(|&(f, t, noisy, seed)| check_mos_run(f, t, noisy, seed))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();

    for (f, t) in [(gp(4, 5.0), 1000u64), (gp(1, 1.0), 777)] {
        for noise in [NoiseModel::None, "uniform:1".parse().unwrap()] {
            let r = run_random_search(&f, t, &noise, &RandomSource::new(3))
                .map_err(|e| e.to_string())?;
            let again = run_random_search(&f, t, &noise, &RandomSource::new(3))
                .map_err(|e| e.to_string())?;
            if r.pulls() as u64 != t || r.y_max != again.y_max {
                return Err(format!(
                    "rs T={t}: {} pulls or nondeterministic output",
                    r.pulls()
                ));
            }
        }
    }
    let steps = check_schedules()?;
    let children = check_tiling()?;
    Ok(format!(
        "{} blin runs ({cubes} cubes gap-checked), {} mos runs ({records} batches), {steps} schedule steps, {children} child cubes; zero violations",
        blin_cases.len(),
        mos_cases.len()
    ))
}

fn criterion_7() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [5.0, 1.5] {
        for t in [1u64 << 14, 1 << 19] {
            for algo in [Algo::Blin, Algo::BlinMos] {
                let cfg = ExperimentConfig {
                    algo: Some(algo),
                    objective: Some("gp".into()),
                    dim: Some(4),
                    p: Some(p),
                    budget: Some(t),
                    seeds: Some((0..5).collect()),
                    schedule: Some(match algo {
                        Algo::Blin => ScheduleKind::AceBlin,
                        _ => ScheduleKind::AceMosNoisy,
                    }),
                    ..Default::default()
                }
                .resolve()
                .map_err(|e| e.to_string())?;
                let obj = cfg.objective().map_err(|e| e.to_string())?;
                let dz = obj.profile().unwrap().zooming_dim;
                let bound = match algo {
                    Algo::Blin => ace_batch_bound(t, 4, dz),
                    _ => ace_noisy_batch_bound(t, 4, dz),
                };
                let worst = cfg
                    .seeds
                    .par_iter()
                    .map(|&s| {
                        run_one(&cfg, obj.as_ref(), t, s).map(|r| r.trace.summary.total_batches)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .max()
                    .unwrap();
                ok &= worst <= bound;
                parts.push(format!(
                    "{algo} p={p} T=2^{}: {worst}/{bound}",
                    t.trailing_zeros()
                ));
            }
        }
    }
    let msg = parts.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// `-ln(1 - a)` by series for small `a`, directly otherwise.
fn neg_log1m(a: f64) -> f64 {
    if a < 1e-3 {
        (1..=8).map(|j| a.powi(j) / f64::from(j)).sum()
    } else {
        -(1.0 - a).ln()
    }
}

fn oracle_sample_count(eps: f64, x: f64) -> (u64, f64) {
    let raw = (1.0 / eps).ln() / neg_log1m(x);
    (raw.ceil() as u64, raw)
}

fn criterion_8() -> Check {
    let mut checked = 0;
    // Sample counts in both modes.
    let cases: [SampleCase; 6] = [
        (MosMode::Noisy, 0.01, 1.0, Some(0.5), 1.0, 0.25, None),
        (
            MosMode::Noisy,
            1.0 / (1u64 << 38) as f64,
            1.0,
            Some(0.5),
            0.8,
            0.125,
            None,
        ),
        (MosMode::Noisy, 1e-6, 0.7, Some(0.25), 2.6667, 0.03125, None),
        (MosMode::NoiselessK, 0.01, 1.0, None, 1.0, 0.5, Some(2.0)),
        (
            MosMode::NoiselessK,
            1.0 / (1u64 << 38) as f64,
            1.0,
            None,
            0.8,
            0.25,
            Some(8.28),
        ),
        (
            MosMode::NoiselessK,
            1e-4,
            1.0,
            None,
            2.6667,
            0.5,
            Some(1.48),
        ),
    ];
    for (mode, eps, ks, kp, ds, r, k) in cases {
        let x = match mode {
            MosMode::Noisy => ks * kp.unwrap() * r / (ds + 1.0),
            MosMode::NoiselessK => ks * r.powf(k.unwrap() * ds),
        };
        let (want, raw) = oracle_sample_count(eps, x);
        if (raw - raw.round()).abs() < 1e-6 {
            return Err(format!(
                "oracle case {mode:?} r={r} sits on a rounding boundary"
            ));
        }
        let got = mos_sample_count(mode, eps, ks, kp, ds, r, k).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("n_m {mode:?} r={r}: {got} vs oracle {want}"));
        }
        checked += 1;
    }

    // ACE prefix from the recurrence written out by hand.
    let (t, d, dz) = (1u64 << 19, 4.0, 3.2);
    let mut c = (dz - 1.0) / (dz * d) * (t as f64).log2();
    let eta = (d + 1.0 - dz) / d;
    let (mut sum, mut r) = (0.0, 1.0f64);
    let mut want = Vec::new();
    for _ in 0..3 {
        sum += c;
        c *= eta;
        r = r.min(2f64.powf(-sum.floor()));
        want.push(r);
        r = 2f64.powf(-sum.ceil());
        want.push(r);
    }
    let spec = ScheduleSpec::new(ScheduleKind::AceBlin, t, 4, dz);
    let got = make_schedule(&spec).map_err(|e| e.to_string())?.prefix(6);
    let literal = [0.125, 0.0625, 0.0625, 0.03125, 0.03125, 0.015625];
    if got.iter().zip(&want).any(|(g, w)| !rel_close(*g, *w, 1e-9)) || want != literal {
        return Err(format!("ACE prefix {got:?} vs oracle {want:?}"));
    }
    checked += 6;

    // Random-search radius.
    let want = 1.0 - (0.01f64.ln() / 1000.0).exp();
    let got = rs_high_prob_bound(1.0, 1.0, 1.0, 1.0, 1000, 0.01).map_err(|e| e.to_string())?;
    if !rel_close(got, want, 1e-9) || (got - 0.0045946).abs() > 1e-7 {
        return Err(format!("rs radius {got} vs oracle {want}"));
    }
    checked += 1;

    // Sample-count inequality grid.
    let kappas: Vec<f64> = (1..=10).map(|i| f64::from(i) / 10.0).collect();
    let gammas = [1.5, 2.0, 4.0];
    let xs: Vec<f64> = (1..=40).map(f64::from).collect();
    let report = prop_basic_check(&kappas, &gammas, &xs).map_err(|e| e.to_string())?;
    for &kappa in &kappas {
        for &gamma in &gammas {
            for &x in &xs {
                let gx = gamma.powf(x);
                let lower = gx / (gamma * neg_log1m(kappa / gamma));
                let middle = 1.0 / neg_log1m(kappa / gx);
                let upper = gx / kappa;
                let (l, m, u) = prop_basic_terms(kappa, gamma, x).map_err(|e| e.to_string())?;
                if !(rel_close(l, lower, 1e-9)
                    && rel_close(m, middle, 1e-9)
                    && rel_close(u, upper, 1e-9))
                {
                    return Err(format!("prop terms at ({kappa},{gamma},{x}): ({l},{m},{u}) vs ({lower},{middle},{upper})"));
                }
                let oracle_ok = lower <= middle * (1.0 + 1e-12) && middle <= upper * (1.0 + 1e-12);
                if !oracle_ok {
                    return Err(format!("oracle finds a violation at ({kappa},{gamma},{x})"));
                }
                checked += 1;
            }
        }
    }
    if !report.pass() || report.points != kappas.len() * gammas.len() * xs.len() {
        return Err(format!(
            "grid report: {} points, {} violations",
            report.points,
            report.violations.len()
        ));
    }

    // Regression-style sanity on the sweep helper used above.
    let line = fit_line(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
    if !rel_close(line.slope, 2.0, 1e-12) || median(&[3.0, 1.0, 2.0]) != 2.0 {
        return Err("line fit helper".into());
    }
    Ok(format!("{checked} values match direct evaluation"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("g_p experiment ordering", criterion_1),
        ("scattering law", criterion_2),
        ("zooming law", criterion_3),
        ("rate slopes", criterion_4),
        ("random-search high-probability radius", criterion_5),
        ("invariant suite", criterion_6),
        ("batch-count bounds", criterion_7),
        ("formula oracles", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {} PASS  {name} [{secs:.1}s]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} FAIL  {name} [{secs:.1}s]: {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
