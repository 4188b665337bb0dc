//! Command line front end. One scenario per run, or a sweep over several
//! scenarios with `--jobs` worker threads.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;

use crate::control::{control_disk, empty_system, ControlError, Synthesizer};
use crate::dynamics::{reverse, simulate, DiskState, EventKind, Injection, InjectionSchedule, SimError, SystemState};
use crate::geometry::angular::wrap_signed;
use crate::geometry::{build_cell, illuminate, is_one_controllable};
use crate::tolerance::Tolerances;

use super::oracle::{mc_illumination_oracle, oracle_coverage};
use super::report::{digest, VerificationReport};
use super::scenario::{Goal, Scenario, ScenarioError};
use super::trace::{verify, Trace, VerifyTolerances};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Pass = 0,
    Fail = 1,
    Input = 2,
    Undefined = 3,
}

/// Oracle samples used by `illuminate`.
pub const ORACLE_SAMPLES: usize = 100_000;
/// Largest symmetric difference accepted between `illuminate` and the oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-3;
/// Final disk accuracy after `synthesize-empty`.
pub const GROUND_PHI: f64 = 1e-6;
pub const GROUND_OMEGA: f64 = 1e-8;
/// Accuracy of `control-disk`.
pub const TARGET_PHI: f64 = 1e-6;
pub const TARGET_OMEGA: f64 = 1e-8;
pub const RESTORE: f64 = 1e-8;
/// Largest phase-space distance after forward, reverse and forward again.
pub const REVERSE_DISTANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "scatterchain", version, about = "Simulate and control chains of billiard cells with rotating disks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file; repeat for a sweep.
    #[arg(long, global = true)]
    scenario: Vec<PathBuf>,
    /// Directory for traces, schedules and reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Override a tolerance, e.g. `--tolerance time=1e-11`.
    #[arg(long = "tolerance", global = true, value_parser = parse_override)]
    tolerance: Vec<(String, f64)>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for the Monte-Carlo oracle; defaults to the scenario's rng_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Validate the cell and report its 1-controllability.
    CheckGeometry,
    /// Illuminated sets checked against the Monte-Carlo oracle.
    Illuminate,
    /// Free evolution over the goal duration.
    Simulate,
    /// Synthesize and replay a schedule emptying the chain.
    SynthesizeEmpty,
    /// Synthesize and replay a schedule setting one disk.
    ControlDisk,
    /// Forward, reverse and forward again.
    ReverseCheck,
    /// Check a trace file on its own.
    Verify { trace: PathBuf },
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Tolerances::default().set(k.trim(), v)?;
    Ok((k.trim().to_string(), v))
}

struct Failure {
    exit: Exit,
    msg: String,
}

fn input(msg: impl ToString) -> Failure {
    Failure {
        exit: Exit::Input,
        msg: msg.to_string(),
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        input(e)
    }
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Undefined { event, .. } => Failure {
            exit: Exit::Undefined,
            msg: event.to_string(),
        },
        other => input(other),
    }
}

/// Run the command line `argv` (program name first); returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("SCATTERCHAIN_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Input as i32 } else { Exit::Pass as i32 };
            let _ = e.print();
            return code;
        }
    };
    let exit = match &cli.command {
        Command::Verify { trace } => report_line("verify", trace, run_verify(trace, &cli.out)),
        cmd => sweep(&cli, cmd),
    };
    exit as i32
}

fn report_line(what: &str, path: &Path, r: Result<VerificationReport, Failure>) -> Exit {
    match r {
        Ok(rep) => {
            let failed: Vec<String> = rep
                .failures()
                .iter()
                .map(|f| format!("{}={:.3e}>{:.1e}", f.name, f.value, f.tolerance))
                .collect();
            if rep.pass {
                println!("{what} {}: pass", path.display());
                Exit::Pass
            } else {
                println!("{what} {}: FAIL {}", path.display(), failed.join(" "));
                Exit::Fail
            }
        }
        Err(f) => {
            eprintln!("{what} {}: {}", path.display(), f.msg);
            f.exit
        }
    }
}

fn sweep(cli: &Cli, cmd: &Command) -> Exit {
    if cli.scenario.is_empty() {
        eprintln!("error: --scenario <file> is required");
        return Exit::Input;
    }
    let many = cli.scenario.len() > 1;
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(Exit::Pass);
    let jobs = cli.jobs.clamp(1, cli.scenario.len());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = cli.scenario.get(i) else { break };
                let out = if many {
                    cli.out.join(path.file_stem().unwrap_or_default())
                } else {
                    cli.out.clone()
                };
                let name = command_name(cmd);
                let e = report_line(name, path, run_scenario(cli, cmd, path, &out));
                let mut w = worst.lock().expect("no worker panics while holding the lock");
                *w = (*w).max(e);
            });
        }
    });
    worst.into_inner().expect("workers finished")
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CheckGeometry => "check-geometry",
        Command::Illuminate => "illuminate",
        Command::Simulate => "simulate",
        Command::SynthesizeEmpty => "synthesize-empty",
        Command::ControlDisk => "control-disk",
        Command::ReverseCheck => "reverse-check",
        Command::Verify { .. } => "verify",
    }
}

fn write(out: &Path, name: &str, text: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(out).map_err(|e| input(format!("cannot create {}: {e}", out.display())))?;
    let p = out.join(name);
    std::fs::write(&p, text).map_err(|e| input(format!("cannot write {}: {e}", p.display())))
}

fn finish(out: &Path, mut rep: VerificationReport, start: Instant) -> Result<VerificationReport, Failure> {
    rep.seconds = start.elapsed().as_secs_f64();
    write(out, "report.toml", &rep.to_toml())?;
    Ok(rep)
}

/// Write the trace and record its digest and self-check in the report.
fn emit_trace(out: &Path, rep: &mut VerificationReport, trace: &Trace) -> Result<(), Failure> {
    let text = trace.to_text();
    write(out, "trace.txt", &text)?;
    rep.trace_digest = digest(&text);
    let check = verify(trace, &VerifyTolerances::default());
    rep.note("events", trace.events().len());
    rep.residual("energy_drift", check.energy_drift, VerifyTolerances::default().drift);
    rep.residual("trace_violations", check.violations.len() as f64, 0.0);
    Ok(())
}

fn run_scenario(cli: &Cli, cmd: &Command, path: &Path, out: &Path) -> Result<VerificationReport, Failure> {
    let start = Instant::now();
    let sc = Scenario::load(path)?;
    let mut tol = sc.tolerances();
    for (k, v) in &cli.tolerance {
        tol.set(k, *v).map_err(input)?;
    }
    let seed = cli.seed.unwrap_or(sc.rng_seed);
    info!("{} on {} with seed {seed}", command_name(cmd), path.display());
    let name = match (command_name(cmd), sc.goal.name()) {
        (c, g) if c == g => c.to_string(),
        (c, g) => format!("{c} (scenario goal {g})"),
    };
    let mut rep = VerificationReport::new(name);
    match cmd {
        Command::CheckGeometry => check_geometry(&sc, &mut rep),
        Command::Illuminate => illuminate_cmd(&sc, seed, out, &mut rep)?,
        Command::Simulate => simulate_cmd(&sc, &tol, out, &mut rep)?,
        Command::SynthesizeEmpty => empty_cmd(&sc, &tol, out, &mut rep)?,
        Command::ControlDisk => control_cmd(&sc, &tol, out, &mut rep)?,
        Command::ReverseCheck => reverse_cmd(&sc, &tol, out, &mut rep)?,
        Command::Verify { .. } => unreachable!("verify runs without a scenario"),
    }
    finish(out, rep, start)
}

fn check_geometry(sc: &Scenario, rep: &mut VerificationReport) {
    match build_cell(sc.geometry.cell.clone()) {
        Ok(cell) => {
            rep.residual("cell_conditions_violated", 0.0, 0.0);
            let c = is_one_controllable(&cell);
            rep.note("arcs", cell.arcs().len());
            rep.note("one_controllable", c.controllable);
            if let Some(w) = c.witness {
                rep.note("uncovered_witness", w);
            }
        }
        Err(e) => {
            rep.residual("cell_conditions_violated", 1.0, 0.0);
            rep.note("condition", e.condition());
            rep.note("error", e);
        }
    }
}

fn illuminate_cmd(sc: &Scenario, seed: u64, out: &Path, rep: &mut VerificationReport) -> Result<(), Failure> {
    let cell = sc.cell()?;
    let arcs: Vec<usize> = match sc.goal {
        Goal::Illuminate { arc: Some(k) } => vec![k],
        _ => (0..cell.arcs().len()).collect(),
    };
    let oracle = mc_illumination_oracle(&cell, ORACLE_SAMPLES, seed);
    let mut tsv = String::from("# arc start end\n");
    for &k in &arcs {
        let lit = illuminate(&cell, k).map_err(input)?;
        for iv in lit.intervals() {
            tsv.push_str(&format!("{k} {:.16e} {:.16e}\n", iv.start, iv.end()));
        }
        rep.residual(&format!("oracle_difference_arc_{k}"), lit.symmetric_difference_measure(&oracle[k]), ORACLE_TOLERANCE);
    }
    let c = is_one_controllable(&cell);
    let oracle_covers = oracle_coverage(&oracle).covers_circle() && cell.arcs().len() >= 3;
    rep.residual("verdict_mismatch", (c.controllable != oracle_covers) as u8 as f64, 0.0);
    rep.note("one_controllable", c.controllable);
    if let Some(w) = c.witness {
        rep.note("uncovered_witness", w);
        let gaps = c.coverage.complement();
        if let Some(iv) = gaps.intervals().iter().find(|iv| iv.contains(w)) {
            rep.note("uncovered_interval", format!("[{}, {}]", iv.start, iv.end()));
        }
        rep.residual("witness_lit_in_oracle", oracle_coverage(&oracle).contains(w) as u8 as f64, 0.0);
    }
    write(out, "illumination.tsv", &tsv)
}

fn duration(sc: &Scenario) -> Result<f64, Failure> {
    match sc.goal {
        Goal::Simulate { duration } | Goal::ReverseCheck { duration } => Ok(duration),
        _ => Err(input(format!("goal '{}' has no duration", sc.goal.name()))),
    }
}

fn simulate_cmd(sc: &Scenario, tol: &Tolerances, out: &Path, rep: &mut VerificationReport) -> Result<(), Failure> {
    let s = sc.state()?;
    let t_end = s.t + duration(sc)?;
    match simulate(&s, &InjectionSchedule::default(), t_end, tol) {
        Ok(o) => emit_trace(out, rep, &Trace::record(&s, &o.trace, &o.state)),
        Err(e) => {
            if let SimError::Undefined { trace, .. } = &e {
                let partial = Trace::record(&s, trace, &SystemState { particles: vec![], disks: vec![], ..s.clone() });
                write(out, "trace.txt", &partial.to_text())?;
            }
            Err(sim_failure(e))
        }
    }
}

fn control_failure(e: ControlError) -> Failure {
    match e {
        ControlError::Undefined(ev) => Failure {
            exit: Exit::Undefined,
            msg: ev.to_string(),
        },
        ControlError::Inadmissible(m) => Failure {
            exit: Exit::Undefined,
            msg: format!("state is not admissible: {m}"),
        },
        ControlError::Invalid(m) | ControlError::SchedulingConflict(m) => input(m),
        other => Failure {
            exit: Exit::Fail,
            msg: format!("synthesis failed: {other}"),
        },
    }
}

fn replay(
    s: &SystemState,
    sched: &InjectionSchedule,
    t_end: f64,
    tol: &Tolerances,
    out: &Path,
    rep: &mut VerificationReport,
) -> Result<SystemState, Failure> {
    write(out, "schedule.toml", &toml::to_string(sched).map_err(input)?)?;
    let o = simulate(s, sched, t_end, tol).map_err(sim_failure)?;
    emit_trace(out, rep, &Trace::record(s, &o.trace, &o.state))?;
    rep.note("injections", sched.len());
    rep.residual("particles_left", o.state.particles.len() as f64, 0.0);
    Ok(o.state)
}

fn empty_cmd(sc: &Scenario, tol: &Tolerances, out: &Path, rep: &mut VerificationReport) -> Result<(), Failure> {
    let s = sc.state()?;
    let mut synth = Synthesizer::new(s.chain.clone(), *tol);
    let (sched, t_end) = empty_system(&mut synth, &s).map_err(control_failure)?;
    rep.note("T", t_end);
    let last = replay(&s, &sched, t_end, tol, out, rep)?;
    let phi = last.disks.iter().map(|d| wrap_signed(d.phi).abs()).fold(0.0, f64::max);
    let omega = last.disks.iter().map(|d| d.omega.abs()).fold(0.0, f64::max);
    rep.residual("max_abs_phi", phi, GROUND_PHI);
    rep.residual("max_abs_omega", omega, GROUND_OMEGA);
    Ok(())
}

fn control_cmd(sc: &Scenario, tol: &Tolerances, out: &Path, rep: &mut VerificationReport) -> Result<(), Failure> {
    let Goal::ControlDisk {
        disk,
        phi,
        omega,
        delta,
        side,
    } = sc.goal
    else {
        return Err(input(format!("goal '{}' is not control-disk", sc.goal.name())));
    };
    let s = sc.state()?;
    if !s.particles.is_empty() {
        return Err(input("control-disk needs a state without particles"));
    }
    let mut synth = Synthesizer::new(s.chain.clone(), *tol);
    let target = DiskState::new(phi, omega);
    let sched = control_disk(&mut synth, &s, disk, target, delta, side).map_err(control_failure)?;
    let t_end = s.t + delta;
    let last = replay(&s, &sched, t_end, tol, out, rep)?;
    let d = last.disks[disk];
    rep.residual("target_phi", wrap_signed(d.phi - target.phi).abs(), TARGET_PHI);
    rep.residual("target_omega", (d.omega - target.omega).abs(), TARGET_OMEGA);
    let restore = (0..s.disks.len())
        .filter(|&k| k != disk)
        .map(|k| {
            let free = s.disks[k].advanced(delta);
            wrap_signed(last.disks[k].phi - free.phi).abs().max((last.disks[k].omega - free.omega).abs())
        })
        .fold(0.0, f64::max);
    rep.residual("restore", restore, RESTORE);
    rep.residual("overrun", (sched.end_time() - t_end).max(0.0), 0.0);
    Ok(())
}

/// Largest difference between two states: positions, velocities, disk
/// angles and angular velocities. Infinite when the particles differ.
pub fn phase_distance(a: &SystemState, b: &SystemState) -> f64 {
    if a.particles.len() != b.particles.len() || a.disks.len() != b.disks.len() {
        return f64::INFINITY;
    }
    let mut d = 0.0f64;
    for p in &a.particles {
        match b.particle(p.id) {
            Some(q) if q.cell == p.cell => d = d.max(p.q.dist(q.q)).max(p.v.dist(q.v)),
            _ => return f64::INFINITY,
        }
    }
    for (x, y) in a.disks.iter().zip(&b.disks) {
        d = d.max(wrap_signed(x.phi - y.phi).abs()).max((x.omega - y.omega).abs());
    }
    d
}

/// Forward over `dt`, reverse, forward `dt`, reverse again: returns the
/// states after the first forward leg and after the round trip. Particles
/// that leave during the forward leg come back in from the bath on the
/// reversed leg, at the mirrored time and with the opposite velocity.
pub fn forward_reverse(s: &SystemState, dt: f64, tol: &Tolerances) -> Result<(SystemState, SystemState), SimError> {
    let t_end = s.t + dt;
    let fwd = simulate(s, &InjectionSchedule::default(), t_end, tol)?;
    let mut returns = InjectionSchedule::default();
    for e in &fwd.trace {
        if let EventKind::Exit { side } = e.kind {
            returns.injections.push(Injection {
                t: s.t + (t_end - e.t),
                id: e.particle,
                side,
                y: e.point.y,
                v: -e.v_pre,
                role: e.role,
            });
        }
    }
    returns.normalize();
    let mut back = reverse(&fwd.state);
    back.t = s.t;
    let back = simulate(&back, &returns, t_end, tol)?.state;
    let mut home = reverse(&back);
    home.t = s.t;
    Ok((fwd.state, home))
}

fn reverse_cmd(sc: &Scenario, tol: &Tolerances, out: &Path, rep: &mut VerificationReport) -> Result<(), Failure> {
    let s = sc.state()?;
    let dt = duration(sc)?;
    let none = InjectionSchedule::default();
    let first = simulate(&s, &none, s.t + dt, tol).map_err(sim_failure)?;
    emit_trace(out, rep, &Trace::record(&s, &first.trace, &first.state))?;
    let (fwd, home) = forward_reverse(&s, dt, tol).map_err(sim_failure)?;
    rep.residual("return_distance", phase_distance(&s, &home), REVERSE_DISTANCE);
    let again = simulate(&home, &none, s.t + dt, tol).map_err(sim_failure)?.state;
    rep.residual("reforward_distance", phase_distance(&fwd, &again), REVERSE_DISTANCE);
    Ok(())
}

fn run_verify(path: &Path, out: &Path) -> Result<VerificationReport, Failure> {
    let start = Instant::now();
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let trace = Trace::parse(&text).map_err(input)?;
    let tol = VerifyTolerances::default();
    let check = verify(&trace, &tol);
    let mut rep = VerificationReport::new("verify");
    rep.trace_digest = digest(&text);
    rep.note("records", check.records);
    rep.residual("event_energy", check.max_event_energy, tol.energy);
    rep.residual("energy_drift", check.energy_drift, tol.drift);
    rep.residual("continuity", check.max_continuity, tol.continuity);
    rep.residual("flight", check.max_flight, tol.flight);
    rep.residual("violations", check.violations.len() as f64, 0.0);
    for v in check.violations.iter().take(10) {
        rep.note("violation", v);
    }
    finish(out, rep, start)
}
