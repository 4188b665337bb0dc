//! The command-line binary: exit codes, output files and diagnostics.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scatterchain::dynamics::{Particle, Role};
use scatterchain::geometry::{fixtures, Vec2};
use scatterchain::harness::{Goal, Scenario};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenarios").join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scatterchain"))
        .args(args)
        .env("SCATTERCHAIN_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn on(cmd: &str, scenario: &Path, out: &Path) -> Output {
    run(&[cmd, "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn geometry_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for (name, want) in [("star_check", 0), ("tail_check", 0), ("hooked_check", 1)] {
        let o = on("check-geometry", &fixture(name), &dir.path().join(name));
        assert_eq!(code(&o), want, "{name}: {}", stderr(&o));
    }
    let report = std::fs::read_to_string(dir.path().join("hooked_check/report.toml")).unwrap();
    assert!(report.contains("pass = false"), "{report}");
}

#[test]
fn illuminate_writes_sets_for_the_tail_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = on("illuminate", &fixture("tail_illuminate"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tsv = std::fs::read_to_string(dir.path().join("illumination.tsv")).unwrap();
    assert!(tsv.lines().count() > 2);
}

#[test]
fn ground_simulation_has_no_particle_events() {
    let dir = tempfile::tempdir().unwrap();
    let o = on("simulate", &fixture("ground_simulate"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trace = std::fs::read_to_string(dir.path().join("trace.txt")).unwrap();
    let kinds: Vec<&str> = trace
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().nth(4).unwrap())
        .collect();
    assert!(kinds.iter().all(|k| k.starts_with("spin-")), "{kinds:?}");
}

#[test]
fn synthesis_commands_pass_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, name) in [("synthesize-empty", "two_particles_empty"), ("control-disk", "control_disk_n3")] {
        let out = dir.path().join(name);
        let o = on(cmd, &fixture(name), &out);
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
        assert!(out.join("schedule.toml").exists());
        let trace = out.join("trace.txt");
        let v = run(&["verify", trace.to_str().unwrap(), "--out", out.join("verify").to_str().unwrap()]);
        assert_eq!(code(&v), 0, "{name}: {}", stderr(&v));
    }
}

#[test]
fn reverse_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = on("reverse-check", &fixture("reverse_check"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn verify_catches_a_tampered_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let o = on("control-disk", &fixture("control_disk_n3"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("trace.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let i = lines.iter().position(|l| l.split_whitespace().nth(4) == Some("disk")).unwrap();
    let mut cols: Vec<String> = lines[i].split_whitespace().map(String::from).collect();
    let vx: f64 = cols[9].parse().unwrap();
    cols[9] = format!("{:.16e}", vx * (1.0 + 1e-6));
    lines[i] = cols.join(" ");
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let v = run(&["verify", bad.to_str().unwrap(), "--out", dir.path().join("v").to_str().unwrap()]);
    assert_eq!(code(&v), 1, "{}", stderr(&v));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.toml");
    let text = std::fs::read_to_string(fixture("control_disk_n3")).unwrap().replace("delta = 1.0", "delta = \"soon\"");
    std::fs::write(&broken, text).unwrap();
    let o = on("control-disk", &broken, &dir.path().join("a"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    let o = on("simulate", &dir.path().join("missing.toml"), &dir.path().join("b"));
    assert_eq!(code(&o), 2);

    let o = run(&[
        "simulate",
        "--scenario",
        fixture("ground_simulate").to_str().unwrap(),
        "--tolerance",
        "nonsense=1",
        "--out",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);

    let o = run(&["verify", dir.path().join("broken.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn undefined_events_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::ground(fixtures::star_spec(), 1, Goal::Simulate { duration: 5.0 });
    // grazes the top of the disk
    s.initial.particles.push(Particle {
        id: 0,
        cell: 0,
        q: Vec2::new(1.0, 0.5),
        v: Vec2::new(1.0, 0.0),
        role: Role::Resident,
    });
    let path = dir.path().join("tangent.toml");
    std::fs::write(&path, s.to_toml()).unwrap();
    let o = on("simulate", &path, &dir.path().join("out"));
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn sweeps_write_one_directory_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "check-geometry",
        "--scenario",
        fixture("star_check").to_str().unwrap(),
        "--scenario",
        fixture("hooked_check").to_str().unwrap(),
        "--jobs",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "the worst verdict wins");
    assert!(dir.path().join("star_check/report.toml").exists());
    assert!(dir.path().join("hooked_check/report.toml").exists());
}
