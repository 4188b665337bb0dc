//! Acceptance criteria 1 to 9. Each test prints one PASS or FAIL line with
//! the worst residual it saw against its pinned tolerance. Tests take a
//! shared lock so the runtime budgets are measured without contention.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scatterchain::control::{
    check_admissible, control_disk, empty_system, follow_path, plan_opening_to_opening, set_disk_state, synth_driver,
    Synthesizer,
};
use scatterchain::dynamics::{simulate, DiskState, Engine, InjectionSchedule, Particle, Role, SystemState, UndefinedKind};
use scatterchain::geometry::{fixtures, illuminate, is_one_controllable, lit_by, wrap_signed, Chain, Side, Vec2};
use scatterchain::harness::{
    forward_reverse, oracle_from_tsv, phase_distance, random_admissible, sample_lit, verify, StateRanges, Trace,
    VerifyTolerances,
};
use scatterchain::Tolerances;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u8, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn star_chain(n: usize) -> Chain {
    Chain::new(fixtures::star_cell(), n)
}

#[test]
fn criterion_1_driver_replay() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let (mut worst, mut dh_ok, mut failures) = (0.0f64, true, 0);
    for i in 0..1000 {
        let side = if i % 2 == 0 { Side::Left } else { Side::Right };
        let chain = star_chain(rng.gen_range(1..=3));
        let mut s = SystemState::ground(chain.clone());
        let disk = chain.bath_cell(side);
        s.disks[disk] = DiskState::new(rng.gen_range(-PI..PI), rng.gen_range(-2.0..2.0));
        let target = rng.gen_range(-2.0..2.0);
        let delta = rng.gen_range(0.1..2.0);
        let tau = rng.gen_range(0.0..1.0);
        let plan = match synth_driver(&chain, side, s.disks[disk].omega, target, delta, None, tau, 0) {
            Ok(p) => p,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        dh_ok &= plan.delta_hat < delta;
        let sched = InjectionSchedule {
            injections: vec![plan.injection],
            ..Default::default()
        };
        match simulate(&s, &sched, tau + delta, &tol) {
            Ok(out) if out.state.particles.is_empty() => {
                let got = out.state.disks[disk].omega;
                worst = worst.max((got - target).abs() / target.abs().max(f64::MIN_POSITIVE));
            }
            _ => failures += 1,
        }
    }
    let t = secs(start.elapsed());
    report(
        1,
        failures == 0 && worst <= 1e-12 && dh_ok && t < 5.0,
        format!("1000 drivers, {failures} failed, worst relative omega error {worst:.2e} (tol 1e-12), residence below window {dh_ok}, {t:.2}s (limit 5s)"),
    );
}

#[test]
fn criterion_2_set_disk_state() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let start = Instant::now();
    let (mut wphi, mut womega, mut failures) = (0.0f64, 0.0f64, 0);
    for i in 0..500 {
        let side = if i % 2 == 0 { Side::Left } else { Side::Right };
        let mut s = SystemState::ground(star_chain(rng.gen_range(1..=2)));
        let disk = s.chain.bath_cell(side);
        s.disks[disk] = DiskState::new(rng.gen_range(-PI..PI), rng.gen_range(-1.0..1.0));
        let target = DiskState::new(rng.gen_range(-PI..PI), rng.gen_range(-2.0..2.0));
        let delta = 1.0;
        let out = set_disk_state(&s, side, target, delta, &tol)
            .ok()
            .and_then(|sched| simulate(&s, &sched, s.t + delta, &tol).ok());
        match out {
            Some(o) if o.state.particles.is_empty() => {
                let d = o.state.disks[disk];
                wphi = wphi.max(wrap_signed(d.phi - target.phi).abs());
                womega = womega.max((d.omega - target.omega).abs());
            }
            _ => failures += 1,
        }
    }
    let t = secs(start.elapsed());
    report(
        2,
        failures == 0 && wphi <= 1e-8 && womega <= 1e-9 && t < 5.0,
        format!("500 targets, {failures} failed, worst phi {wphi:.2e} (tol 1e-8), worst omega {womega:.2e} (tol 1e-9), {t:.2}s (limit 5s)"),
    );
}

#[test]
fn criterion_3_energy_drift() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let chain = star_chain(40);
    let ranges = StateRanges {
        max_particles: 3,
        ..StateRanges::default()
    };
    let (mut runs, mut worst, mut violations) = (0, 0.0f64, 0);
    while runs < 5 {
        let mut s = random_admissible(&mut rng, &chain, &ranges, &tol);
        if s.particles.len() < 3 {
            continue;
        }
        // start everyone in the middle so the chain holds them long enough
        for p in &mut s.particles {
            let to = 20 + p.cell % 3;
            p.q = p.q - chain.offset(p.cell) + chain.offset(to);
            p.cell = to;
        }
        if check_admissible(&s, f64::INFINITY, &tol).is_err() {
            continue;
        }
        let mut e = Engine::new(&s, &[], tol).unwrap();
        let Ok(n) = e.run_events(f64::INFINITY, 10_000) else {
            continue;
        };
        if n < 10_000 {
            continue;
        }
        let end = e.state_at(e.time());
        let check = verify(&Trace::record(&s, e.trace(), &end), &VerifyTolerances::default());
        worst = worst.max(check.energy_drift);
        violations += check.violations.len();
        runs += 1;
    }
    report(
        3,
        worst < 1e-8 && violations == 0,
        format!("{runs} runs of 10000 events, worst cumulative drift {worst:.2e} (tol 1e-8), {violations} trace violations"),
    );
}

#[test]
fn criterion_4_time_reversal() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let chain = star_chain(3);
    let (mut done, mut worst, mut failures) = (0, 0.0f64, 0);
    while done < 200 {
        let s = random_admissible(&mut rng, &chain, &StateRanges::default(), &tol);
        if s.particles.is_empty() {
            continue;
        }
        let mut dt = rng.gen_range(0.5..8.0);
        let events = loop {
            match simulate(&s, &InjectionSchedule::default(), s.t + dt, &tol) {
                Ok(o) if o.trace.len() <= 20 => break Some(o.trace.len()),
                Ok(_) => dt *= 0.5,
                Err(_) => break None,
            }
        };
        if events.is_none() {
            continue;
        }
        match forward_reverse(&s, dt, &tol) {
            Ok((_, home)) => worst = worst.max(phase_distance(&s, &home)),
            Err(_) => failures += 1,
        }
        done += 1;
    }
    report(
        4,
        failures == 0 && worst < 1e-6,
        format!("200 trajectories of at most 20 events, {failures} failed, worst return distance {worst:.2e} (tol 1e-6)"),
    );
}

#[test]
fn criterion_5_illumination() {
    let _g = serial();
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle");
    let mut worst = 0.0f64;
    let mut verdicts = true;
    for (name, cell, expect) in [("star", fixtures::star_cell(), true), ("tail", fixtures::tail_cell(), false)] {
        let oracle = oracle_from_tsv(&std::fs::read_to_string(dir.join(format!("{name}.tsv"))).unwrap()).unwrap();
        assert_eq!(oracle.len(), cell.arcs().len());
        for (k, o) in oracle.iter().enumerate() {
            worst = worst.max(illuminate(&cell, k).unwrap().symmetric_difference_measure(o));
        }
        let c = is_one_controllable(&cell);
        verdicts &= c.controllable == expect;
        match (expect, c.witness) {
            (true, w) => verdicts &= w.is_none(),
            (false, Some(w)) => {
                let dark = (0..cell.arcs().len()).all(|k| !lit_by(&cell, k, w) && !sample_lit(&cell, k, w));
                verdicts &= dark && !oracle.iter().any(|o| o.contains(w));
            }
            (false, None) => verdicts = false,
        }
    }
    report(
        5,
        worst < 1e-3 && verdicts,
        format!("worst symmetric difference {worst:.2e} rad (tol 1e-3), verdicts and witness {}", if verdicts { "ok" } else { "wrong" }),
    );
}

#[test]
fn criterion_6_path_following() {
    let _g = serial();
    let tol = Tolerances::default();
    let (mut worst, mut cases, mut failures) = (0.0f64, 0, Vec::new());
    for n in 1..=4 {
        let s = SystemState::ground(star_chain(n));
        let l = s.chain.width();
        for (from, to) in [(Side::Left, Side::Right), (Side::Right, Side::Left), (Side::Left, Side::Left)] {
            for angle in [0.15, -0.3, 0.45] {
                let Ok(path) = plan_opening_to_opening(&s.chain, from, to, angle) else {
                    continue;
                };
                if path.disk_vertices() > 10 || path.validate(&s.chain, &tol).is_err() {
                    continue;
                }
                cases += 1;
                let mut synth = Synthesizer::new(s.chain.clone(), tol);
                let ok = follow_path(&mut synth, &s, &path, 1.0, 0.0).ok().and_then(|(sched, r)| {
                    let out = simulate(&s, &sched, r.exit_time, &tol).ok()?;
                    let dev = r
                        .visited
                        .iter()
                        .zip(&path.vertices)
                        .map(|(a, b)| a.dist(b.point))
                        .fold(0.0, f64::max);
                    let right = r.exit_side == to && r.visited.len() == path.vertices.len() && out.state.particles.is_empty();
                    right.then_some(dev / l)
                });
                match ok {
                    Some(d) => worst = worst.max(d),
                    None => failures.push(format!("N={n} {from:?}->{to:?} angle {angle}")),
                }
            }
        }
    }
    report(
        6,
        cases >= 10 && failures.is_empty() && worst < 1e-8,
        format!("{cases} paths, failures {failures:?}, worst vertex deviation {worst:.2e} L (tol 1e-8 L)"),
    );
}

#[test]
fn criterion_7_control_disk() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let start = Instant::now();
    let (mut wphi, mut womega, mut wrestore, mut failures, mut late) = (0.0f64, 0.0f64, 0.0f64, 0, 0);
    for n in [2, 3] {
        let s = SystemState::ground(star_chain(n));
        let mut synth = Synthesizer::new(s.chain.clone(), tol);
        let j = n - 1;
        for _ in 0..100 {
            let target = DiskState::new(rng.gen_range(-PI..PI), rng.gen_range(-2.0..2.0));
            let delta = 1.0;
            let Ok(sched) = control_disk(&mut synth, &s, j, target, delta, Side::Left) else {
                failures += 1;
                continue;
            };
            if sched.end_time() > s.t + delta {
                late += 1;
            }
            let Ok(out) = simulate(&s, &sched, s.t + delta, &tol) else {
                failures += 1;
                continue;
            };
            if !out.state.particles.is_empty() {
                failures += 1;
                continue;
            }
            let d = out.state.disks[j];
            wphi = wphi.max(wrap_signed(d.phi - target.phi).abs());
            womega = womega.max((d.omega - target.omega).abs());
            for k in 0..j {
                let free = s.disks[k].advanced(delta);
                let e = out.state.disks[k];
                wrestore = wrestore.max(wrap_signed(e.phi - free.phi).abs()).max((e.omega - free.omega).abs());
            }
        }
    }
    let t = secs(start.elapsed());
    report(
        7,
        failures == 0 && late == 0 && wphi <= 1e-6 && womega <= 1e-8 && wrestore <= 1e-8 && t < 60.0,
        format!(
            "200 targets, {failures} failed, {late} late, worst phi {wphi:.2e} (tol 1e-6), omega {womega:.2e} (tol 1e-8), restore {wrestore:.2e} (tol 1e-8), {t:.2}s (limit 60s)"
        ),
    );
}

#[test]
fn criterion_8_empty_system() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let start = Instant::now();
    let (mut wphi, mut womega, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..50 {
        let chain = star_chain(rng.gen_range(1..=3));
        let s = random_admissible(&mut rng, &chain, &StateRanges::default(), &tol);
        let mut synth = Synthesizer::new(chain, tol);
        let out = empty_system(&mut synth, &s)
            .ok()
            .filter(|(_, t_end)| t_end.is_finite())
            .and_then(|(sched, t_end)| simulate(&s, &sched, t_end, &tol).ok());
        match out {
            Some(o) if o.state.particles.is_empty() => {
                for d in &o.state.disks {
                    wphi = wphi.max(wrap_signed(d.phi).abs());
                    womega = womega.max(d.omega.abs());
                }
            }
            _ => failures += 1,
        }
    }
    let t = secs(start.elapsed());
    report(
        8,
        failures == 0 && wphi < 1e-6 && womega < 1e-8 && t < 120.0,
        format!("50 states, {failures} failed, worst phi {wphi:.2e} (tol 1e-6), omega {womega:.2e} (tol 1e-8), {t:.2}s (limit 120s)"),
    );
}

fn resident(id: u64, q: Vec2, v: Vec2) -> Particle {
    Particle {
        id,
        cell: 0,
        q,
        v,
        role: Role::Resident,
    }
}

#[test]
fn criterion_9_undefined_events() {
    let _g = serial();
    let tol = Tolerances::default();
    let chain = star_chain(1);
    let corner = *chain
        .cell()
        .corners()
        .iter()
        .find(|c| c.x == 0.0)
        .expect("the left opening has corners");
    let q = Vec2::new(1.0, 0.0);
    let cases = [
        ("tangent", 3, UndefinedKind::TangentDisk, vec![resident(0, Vec2::new(1.0, 0.5), Vec2::new(1.0, 0.0))]),
        ("corner", 5, UndefinedKind::Corner, vec![resident(0, q, corner - q)]),
        (
            "simultaneous",
            4,
            UndefinedKind::SimultaneousDiskHit,
            vec![
                resident(0, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
                resident(1, Vec2::new(3.0, 0.0), Vec2::new(-1.0, 0.0)),
            ],
        ),
    ];
    let mut wrong = Vec::new();
    for (name, item, kind, particles) in cases {
        let mut s = SystemState::ground(chain.clone());
        s.particles = particles;
        let rejected = matches!(check_admissible(&s, f64::INFINITY, &tol), Err(v) if v.item() == item);
        let raised = matches!(
            simulate(&s, &InjectionSchedule::default(), 10.0, &tol),
            Err(e) if e.undefined().is_some_and(|u| u.kind == kind)
        );
        if !(rejected && raised) {
            wrong.push(format!("{name}: rejected {rejected}, raised {raised}"));
        }
    }
    report(9, wrong.is_empty(), format!("tangent, corner and simultaneous states, problems {wrong:?}"));
}
