//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::Instant;

use common::{desk, grid, nested, tree, wide_random};
use trws_core::baselines::{select_lambda, MsdSolver, LAMBDA_GRID};
use trws_core::diagnostics::agreement::{check_ewta, check_j_consistency_enhanced, psi};
use trws_core::diagnostics::mapping::{map_jconsistent_to_wta, map_wta_to_jconsistent};
use trws_core::diagnostics::oracle::{brute_force_map, brute_force_min_marginals};
use trws_core::io::format::{parse_model, write_model};
use trws_core::io::generators::{
    gen_potts_2x2, gen_stereo, gen_three_factor_chain, stereo_cost, Instance, PottsConfig, PottsVariant, SeparatorMode,
    StereoConfig,
};
use trws_core::problem::Effort;
use trws_core::trws::chain::{ChainSolver, UpdateKind};
use trws_core::trws::general::GeneralSolver;
use trws_core::trws::monotonic::MonotonicSolver;
use trws_core::trws::tree::{lower_bound, nu};
use trws_core::trws::{drive, Direction, PassSolver, ReuseMode, SolverOptions};
use trws_core::Problem;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn map_value(p: &Problem) -> f64 {
    brute_force_map(&p.model).expect("oracle guard").1
}

fn run_trws(p: &Problem, passes: usize, eps: f64) -> (ChainSolver<'_>, Vec<f64>) {
    let mut s = ChainSolver::start(p, SolverOptions::default()).expect("start");
    let trace = drive(&mut s, passes, eps).expect("drive");
    (s, trace.bounds())
}

fn c1_monotone_bound() -> Outcome {
    let problems: Vec<Problem> = (0..100).map(|s| wide_random(s).problem().unwrap()).collect();
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for (seed, p) in problems.iter().enumerate() {
        let (_, bounds) = run_trws(p, 500, 1e-7);
        for w in bounds.windows(2) {
            let inc = w[1] - w[0];
            worst = worst.min(inc);
            ensure(inc >= -1e-9, || format!("seed {seed}: bound dropped by {inc:e}"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.2} s"))?;
    Ok(format!("100 models, smallest increment {worst:e}, {secs:.2} s"))
}

fn c2_trees() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let p = tree(seed).problem().unwrap();
        ensure(p.decomposition.tree_count() == 1, || format!("seed {seed}: {} chains", p.decomposition.tree_count()))?;
        let (_, bounds) = run_trws(&p, 3, -1.0);
        let gap = (bounds.last().unwrap() - map_value(&p)).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-9, || format!("seed {seed}: |Φ − MAP| = {gap:e}"))?;
    }
    Ok(format!("50 trees, max gap {worst:e}"))
}

fn c3_submodular() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..30 {
        let p = grid(seed).problem().unwrap();
        let (_, bounds) = run_trws(&p, 500, 1e-7);
        let gap = (bounds.last().unwrap() - map_value(&p)).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-6, || format!("seed {seed}: |Φ − MAP| = {gap:e}"))?;
    }
    Ok(format!("30 grids, max gap {worst:e}"))
}

fn c4_min_marginals() -> Outcome {
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for seed in 0..30 {
        let p = desk(seed).problem().unwrap();
        let d = &p.decomposition;
        let mut s = MonotonicSolver::start(&p).map_err(|e| e.to_string())?;
        let mut failure = None;
        for direction in [Direction::Forward, Direction::Backward, Direction::Forward] {
            s.pass_with(direction, &mut |params, b| {
                for &t in d.trees_of(b) {
                    let got = nu(&p, params.tree(t), b);
                    let want = brute_force_min_marginals(&p, params, t, b).unwrap();
                    let err = got.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    worst = worst.max(err);
                    checked += 1;
                    if err > 1e-9 && failure.is_none() {
                        failure = Some(format!("seed {seed}: tree {t}, separator {b}, error {err:e}"));
                    }
                }
            })
            .map_err(|e| e.to_string())?;
        }
        if let Some(f) = failure {
            return Err(f);
        }
    }
    Ok(format!("{checked} min-marginals, max error {worst:e}"))
}

fn c5_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..30 {
        let p = desk(seed).problem().unwrap();
        let mut general = GeneralSolver::primed(&p).map_err(|e| e.to_string())?;
        let mut mono = MonotonicSolver::start(&p).map_err(|e| e.to_string())?;
        let mut chain = ChainSolver::start(&p, SolverOptions::default()).map_err(|e| e.to_string())?;
        let traces: Vec<Vec<f64>> = [&mut general as &mut dyn PassSolver, &mut mono, &mut chain]
            .into_iter()
            .map(|s| drive(s, 12, -1.0).unwrap().bounds())
            .collect();
        for k in 0..traces[0].len() {
            for other in &traces[1..] {
                let gap = (traces[0][k] - other[k]).abs();
                worst = worst.max(gap);
                ensure(gap <= 1e-9, || format!("seed {seed}: pass {}: traces differ by {gap:e}", k + 1))?;
            }
        }
    }
    Ok(format!("30 models x 12 passes, max gap {worst:e}"))
}

fn c6_reuse() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut reused = 0usize;
    for seed in 0..50 {
        let p = nested(seed).problem().unwrap();
        let mut plain = ChainSolver::start(&p, SolverOptions::default()).map_err(|e| e.to_string())?;
        let mut variants: Vec<ChainSolver> = [ReuseMode::After, ReuseMode::BeforeAfter]
            .into_iter()
            .map(|reuse| ChainSolver::start(&p, SolverOptions { reuse, ..SolverOptions::default() }).unwrap())
            .collect();
        for v in &mut variants {
            v.record_updates(true);
        }
        let mut direction = Direction::Forward;
        for pass in 0..8 {
            let base = plain.pass(direction).map_err(|e| e.to_string())?;
            for v in &mut variants {
                let bound = v.pass(direction).map_err(|e| e.to_string())?;
                let gap = (bound - base).abs();
                worst = worst.max(gap);
                ensure(gap <= 1e-12, || format!("seed {seed}: pass {pass}: bounds differ by {gap:e}"))?;
                for (m, n) in plain.messages().iter().zip(v.messages()) {
                    let err = m.values.iter().zip(&n.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    worst = worst.max(err);
                    ensure(err <= 1e-12, || {
                        format!("seed {seed}: pass {pass}: m_{}{} differs by {err:e}", m.from, m.to)
                    })?;
                }
            }
            direction = direction.reverse();
        }
        for v in &mut variants {
            reused += v.take_log().iter().filter(|e| e.2 != UpdateKind::Direct).count();
        }
    }
    ensure(reused > 0, || "no message was reused".into())?;
    Ok(format!("50 nested models x 2 schemes, {reused} reused updates, max gap {worst:e}"))
}

/// Draws desk models, keeping those on which the solver reaches the fixpoint.
fn c7_fixpoints() -> Outcome {
    let mut wta = 0usize;
    let mut worst_phi: f64 = 0.0;
    let mut seed = 0u64;
    while wta < 20 && seed < 200 {
        let p = desk(seed).problem().unwrap();
        seed += 1;
        let mut s = ChainSolver::start(&p, SolverOptions::default()).map_err(|e| e.to_string())?;
        let mut direction = Direction::Forward;
        let mut reached = None;
        for _ in 0..1000 {
            s.pass(direction).map_err(|e| e.to_string())?;
            direction = direction.reverse();
            let params = s.tree_params();
            if check_ewta(&p, &params).map_err(|e| e.to_string())?.holds() {
                reached = Some(params);
                break;
            }
        }
        let Some(params) = reached else { continue };
        let phi = lower_bound(&p, &params, &mut Effort::default());
        let (theta, _) = map_wta_to_jconsistent(&p, &params).map_err(|e| e.to_string())?;
        let gap = (psi(&theta) - phi).abs();
        worst_phi = worst_phi.max(gap);
        ensure(gap <= 1e-9, || format!("seed {}: |Ψ(φ(θ)) − Φ(θ)| = {gap:e}", seed - 1))?;
        wta += 1;
    }
    ensure(wta == 20, || format!("only {wta} of {seed} models reached tree agreement"))?;
    let drawn_wta = seed;

    let mut jc = 0usize;
    let mut worst_psi: f64 = 0.0;
    let mut seed = 0u64;
    while jc < 20 && seed < 200 {
        let p = desk(seed).problem().unwrap();
        seed += 1;
        let mut s = MsdSolver::new(&p);
        let mut direction = Direction::Forward;
        let mut reached = false;
        for _ in 0..5000 {
            s.sweep(direction);
            direction = direction.reverse();
            if check_j_consistency_enhanced(&p.model, &p.j, s.theta()).holds() {
                reached = true;
                break;
            }
        }
        if !reached {
            continue;
        }
        let params = map_jconsistent_to_wta(&p, s.theta()).map_err(|e| e.to_string())?;
        let gap = (lower_bound(&p, &params, &mut Effort::default()) - psi(s.theta())).abs();
        worst_psi = worst_psi.max(gap);
        ensure(gap <= 1e-9, || format!("seed {}: |Φ(ψ(θ')) − Ψ(θ')| = {gap:e}", seed - 1))?;
        jc += 1;
    }
    ensure(jc == 20, || format!("only {jc} of {seed} models reached J-consistency under diffusion"))?;
    Ok(format!("φ max gap {worst_phi:e} (20 of {drawn_wta} drawn), ψ max gap {worst_psi:e} (20 of {seed} drawn)"))
}

fn c8_effort() -> Outcome {
    let mut runs = 0usize;
    for seed in 0..100 {
        let p = if seed % 2 == 0 { wide_random(seed) } else { nested(seed) }.problem().unwrap();
        let limit = p.message_edge_count() as u64;
        for reuse in [ReuseMode::None, ReuseMode::After, ReuseMode::BeforeAfter] {
            let mut s = ChainSolver::start(&p, SolverOptions { reuse, ..SolverOptions::default() }).unwrap();
            let mut direction = Direction::Forward;
            for pass in 0..10 {
                s.pass(direction).map_err(|e| e.to_string())?;
                let ops = s.last_pass_ops();
                ensure(ops <= limit, || format!("seed {seed}, {reuse:?}, pass {pass}: {ops} ops > |J'| = {limit}"))?;
                direction = direction.reverse();
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} passes within |J'|"))
}

fn c9_baselines() -> Outcome {
    for seed in 0..100 {
        let p = wide_random(seed).problem().unwrap();
        let map = map_value(&p);
        let mut msd = MsdSolver::new(&p);
        let mut prev = f64::NEG_INFINITY;
        let mut direction = Direction::Forward;
        for k in 0..100 {
            let v = msd.sweep(direction);
            ensure(v >= prev - 1e-9, || format!("seed {seed}: MSD Ψ fell by {:e} at sweep {k}", prev - v))?;
            ensure(v <= map + 1e-9, || format!("seed {seed}: MSD Ψ {v} above MAP {map}"))?;
            prev = v;
            direction = direction.reverse();
        }
        let (_, sub, _) = select_lambda(&p, &LAMBDA_GRID, 100).map_err(|e| e.to_string())?;
        ensure(sub.best() <= map + 1e-9, || format!("seed {seed}: subgradient {} above MAP {map}", sub.best()))?;
    }
    let mut worst: f64 = 0.0;
    for seed in 0..30 {
        let p = grid(seed).problem().unwrap();
        let (_, bounds) = run_trws(&p, 500, 1e-7);
        let trws = *bounds.last().unwrap();
        let mut msd = MsdSolver::new(&p);
        let msd_bound = drive(&mut msd, 5000, 1e-12).unwrap().last_bound().unwrap();
        let (_, sub, _) = select_lambda(&p, &LAMBDA_GRID, 2000).map_err(|e| e.to_string())?;
        for (name, v) in [("MSD", msd_bound), ("subgradient", sub.best())] {
            let gap = (v - trws).abs();
            worst = worst.max(gap);
            ensure(gap <= 1e-4, || format!("grid {seed}: {name} {v} vs TRW-S {trws}"))?;
        }
    }
    Ok(format!("100 models sane, tight grids agree within {worst:e}"))
}

fn generated() -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    for seps in [SeparatorMode::Singleton, SeparatorMode::Pair] {
        let stereo =
            StereoConfig { width: 4, height: 3, labels: 4, lambda: 15.0, unaries: None, separators: seps, seed: 7 };
        out.push((format!("stereo {seps:?}"), gen_stereo(&stereo).unwrap()));
        for variant in [PottsVariant::AllEqual, PottsVariant::Pairwise] {
            let cfg = PottsConfig {
                width: 3,
                height: 3,
                labels: 3,
                weight: 1.5,
                variant,
                unary_scale: 1.0,
                separators: seps,
                seed: 11,
            };
            out.push((format!("potts {variant:?} {seps:?}"), gen_potts_2x2(&cfg).unwrap()));
        }
    }
    for seed in 0..20 {
        out.push((format!("random {seed}"), wide_random(seed)));
        out.push((format!("tree {seed}"), tree(seed)));
        out.push((format!("grid {seed}"), grid(seed)));
        out.push((format!("nested {seed}"), nested(seed)));
    }
    out.push(("three-factor chain".into(), gen_three_factor_chain(3).unwrap()));
    out
}

fn c10_generators() -> Outcome {
    let values = [stereo_cost(3, 3, 3, 15.0), stereo_cost(2, 3, 3, 15.0), stereo_cost(0, 2, 4, 15.0)];
    ensure(values == [0.0, 15.0, 45.0], || format!("stereo examples gave {values:?}"))?;
    let instances = generated();
    for (name, inst) in &instances {
        let order = inst.problem().unwrap().decomposition.node_order().clone();
        let text = write_model(&inst.model, &inst.j, Some(&order));
        let back = parse_model(&text).map_err(|e| format!("{name}: {e}"))?;
        for f in 0..inst.model.factor_count() {
            ensure(inst.model.scope(f) == back.model.scope(f), || format!("{name}: scope of factor {f} changed"))?;
            let same = inst.model.table(f).iter().zip(back.model.table(f)).all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(same, || format!("{name}: table of factor {f} changed"))?;
        }
        ensure(inst.j == back.j && back.order.as_ref() == Some(&order), || format!("{name}: structure changed"))?;
    }
    Ok(format!("stereo examples exact, {} instances round-trip", instances.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("monotone bound", c1_monotone_bound),
        ("exact on trees", c2_trees),
        ("tight on submodular grids", c3_submodular),
        ("min-marginals at averaging time", c4_min_marginals),
        ("formulation equivalence", c5_equivalence),
        ("reuse-scheme equivalence", c6_reuse),
        ("fixpoint correspondence", c7_fixpoints),
        ("message effort bound", c8_effort),
        ("baseline sanity", c9_baselines),
        ("generator fidelity", c10_generators),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
