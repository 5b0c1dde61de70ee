use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfweave")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["synth", "--distance", "3"], tmp.path())), 0);
    assert_eq!(code(&run(&["synth", "--distance", "4"], tmp.path())), 1);
    assert_eq!(code(&run(&["arch", "gen", "--arch", "square", "--rows", "0", "--cols", "3"], tmp.path())), 1);
    let o = run(&["synth", "--arch", "hexagon", "--mode", "center4"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
    assert_eq!(code(&run(&["simulate", "--shots", "0"], tmp.path())), 1);
}

#[test]
fn synth_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run(&["synth", "--arch", "heavy-square", "--distance", "3", "--out", "a"], tmp.path());
    let b = run(&["synth", "--arch", "heavy-square", "--distance", "3", "--out", "b"], tmp.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    for f in ["device.json", "layout.json", "schedule.json", "report.json"] {
        let x = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn arch_gen_writes_device_json() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["arch", "gen", "--arch", "hexagon", "--rows", "4", "--cols", "4", "--out", "g.json"], tmp.path());
    assert_eq!(code(&o), 0);
    let g = surfweave::arch::DeviceGraph::load(tmp.path().join("g.json")).unwrap();
    assert_eq!(g.num_qubits(), 16);
}

#[test]
fn export_circuit_parses_back() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["export-circuit", "--stabilizer", "0"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(!surfweave::circuit::parse_layers(&text).unwrap().is_empty());
    assert_eq!(code(&run(&["export-circuit", "--stabilizer", "99"], tmp.path())), 1);
}

#[test]
fn seeded_simulation_repeats() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--p-gate", "0.005", "--shots", "2000", "--seed", "7"];
    let a = run(&args, tmp.path());
    let b = run(&args, tmp.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("logical_errors"));
}

#[test]
fn empty_sweep_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.json"), r#"{"p_gate": [], "shots": 100, "seed": 1}"#).unwrap();
    let o = run(&["sweep", "--config", "c.json", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(tmp.path().join("s.csv")).unwrap();
    assert_eq!(csv, format!("{}\n", surfweave::driver::CSV_HEADER));
    assert!(tmp.path().join("s.svg").exists());
}
