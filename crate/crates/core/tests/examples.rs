//! Every example runs to completion, and the frozen fixtures match what the
//! generator produces today.

// the fixture generator pulls in the geometry example for its hooked cell
#![allow(clippy::duplicate_mod)]

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[path = $file]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    };
}

example!(check_geometry, "../examples/check_geometry.rs");
example!(illuminate, "../examples/illuminate.rs");
example!(simulate_chain, "../examples/simulate_chain.rs");
example!(driver_lemma, "../examples/driver_lemma.rs");
example!(set_disk_state, "../examples/set_disk_state.rs");
example!(follow_path, "../examples/follow_path.rs");
example!(control_disk, "../examples/control_disk.rs");
example!(empty_system, "../examples/empty_system.rs");
example!(reverse_check, "../examples/reverse_check.rs");

#[path = "../examples/build_fixtures.rs"]
mod build_fixtures;

#[test]
fn fixtures_are_current() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dir = tempfile::tempdir().unwrap();
    build_fixtures::write_fixtures(dir.path()).unwrap();
    for (rel, _) in build_fixtures::fixture_files().unwrap() {
        let fresh = std::fs::read_to_string(dir.path().join(&rel)).unwrap();
        let frozen = std::fs::read_to_string(root.join(&rel)).unwrap();
        assert!(fresh == frozen, "{rel} differs from the generator output");
    }
}
