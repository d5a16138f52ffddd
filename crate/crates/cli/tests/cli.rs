use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_partomo"));
    c.env_remove("PARTOMO_OUT").env_remove("PARTOMO_THREADS");
    c
}

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new() -> Self {
        Run { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, text: &str) -> PathBuf {
        let p = self.dir.path().join("config.toml");
        fs::write(&p, text).unwrap();
        p
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn exec(&self, sub: &str, text: &str, extra: &[&str]) -> Output {
        let cfg = self.config(text);
        bin().arg(sub).arg("--config").arg(&cfg).arg("--out").arg(self.out()).args(extra).output().unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out().join(name)).unwrap()).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn ok(o: &Output) {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

/// `(X, η, value)` records of a tomogram CSV.
fn records(path: &Path) -> Vec<(f64, f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("X,eta,value"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect()
}

const GROUND_M1: &str = r#"
[state]
preset = "ho_eigenstate"
n = 0
[representation]
kind = "M1"
"#;

#[test]
fn ground_state_tomogram_csv() {
    let r = Run::new();
    let o = r.exec("tomogram", GROUND_M1, &[]);
    ok(&o);
    let recs = records(&r.out().join("tomogram.csv"));
    let mut seen = 0;
    for (x, eta, v) in recs {
        if eta.abs() < 1e-12 {
            seen += 1;
            assert!((v - (-x * x).exp() / PI.sqrt()).abs() < 1e-5, "{x}: {v}");
        }
    }
    assert_eq!(seen, 901);
    let env = r.json("tomogram.json");
    assert_eq!(env["kind"], "M1");
    assert!(String::from_utf8_lossy(&o.stdout).contains("column normalization"));
}

#[test]
fn coherent_m2_column_means() {
    let r = Run::new();
    let cfg = r#"
[state]
preset = "coherent"
q0 = 1.0
p0 = 1.0
[representation]
kind = "M2"
[grids]
param = { min = -2.0, max = 2.0, points = 9 }
[output]
format = "csv"
"#;
    ok(&r.exec("tomogram", cfg, &[]));
    assert!(!r.out().join("tomogram.json").exists());
    let recs = records(&r.out().join("tomogram.csv"));
    let dx = 0.1;
    for k in 0..9 {
        let mu = -2.0 + 0.5 * k as f64;
        let mean: f64 = recs.iter().filter(|r| (r.1 - mu).abs() < 1e-9).map(|r| r.0 * r.2 * dx).sum();
        assert!((mean - (mu + 1.0)).abs() < 1e-6, "mu {mu}: {mean}");
    }
}

#[test]
fn missing_state_is_a_config_error() {
    let r = Run::new();
    let o = r.exec("tomogram", "[representation]\nkind = \"M1\"\n", &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[state]"));
    assert!(!r.out().exists());
}

#[test]
fn unparseable_config_and_unknown_keys() {
    let r = Run::new();
    assert_eq!(code(&r.exec("tomogram", "[state\n", &[])), 2);
    assert_eq!(code(&r.exec("tomogram", &format!("{GROUND_M1}\n[grids]\nxx = 1\n"), &[])), 2);
    assert_eq!(code(&r.exec("tomogram", &format!("{GROUND_M1}\n[grids]\nx = {{ min = 1.0, max = -1.0, points = 9 }}\n"), &[])), 2);
}

#[test]
fn reconstruct_round_trip() {
    let r = Run::new();
    ok(&r.exec("reconstruct", GROUND_M1, &["--format", "json"]));
    let rep = r.json("reconstruction.json");
    assert!(rep["fidelity"].as_f64().unwrap() >= 0.999, "{rep}");
    assert!(!r.out().join("wigner.csv").exists());
}

#[test]
fn reconstruct_from_written_csv() {
    let r = Run::new();
    ok(&r.exec("tomogram", &format!("{GROUND_M1}\n[output]\nformat = \"csv\"\n"), &[]));
    let csv = r.dir.path().join("t.csv");
    fs::rename(r.out().join("tomogram.csv"), &csv).unwrap();
    let cfg = format!("{GROUND_M1}\n[reconstruct]\ninput = {:?}\n", csv.to_str().unwrap());
    ok(&r.exec("reconstruct", &cfg, &[]));
    assert!(r.json("reconstruction.json")["fidelity"].as_f64().unwrap() >= 0.999);
    let header = fs::read_to_string(r.out().join("wigner.csv")).unwrap();
    assert!(header.starts_with("q,p,value\n"));
}

#[test]
fn starved_reconstruction_exits_3() {
    let r = Run::new();
    let cfg = format!("{GROUND_M1}\n[grids]\nparam = {{ min = -1.0, max = 1.0, points = 21 }}\n");
    let o = r.exec("reconstruct", &cfg, &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("reconstruction quality"));
}

#[test]
fn empty_input_exits_2() {
    let r = Run::new();
    let empty = r.dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let cfg = format!("[representation]\nkind = \"M1\"\n[reconstruct]\ninput = {:?}\n", empty.to_str().unwrap());
    assert_eq!(code(&r.exec("reconstruct", &cfg, &[])), 2);
}

const COHERENT_MOMENTS: &str = r#"
[state]
preset = "coherent"
q0 = 1.5
p0 = -0.5
[representation]
kind = "M1"
"#;

#[test]
fn moments_match_oracle() {
    let r = Run::new();
    ok(&r.exec("moments", COHERENT_MOMENTS, &[]));
    let rep = r.json("moments.json");
    let rows = rep["moments"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert!(row["abs_diff"].as_f64().unwrap() < 1e-6, "{row}");
    }
    assert!(r.out().join("moments.csv").exists());
}

#[test]
fn joint_moment_routes_agree() {
    let r = Run::new();
    let cfg = format!("{COHERENT_MOMENTS}\n[distribution]\ncenter = 0.3\nwidth = 1.2\n");
    ok(&r.exec("moments", &cfg, &[]));
    let rep = r.json("moments.json");
    let rows = rep["joint"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row["route_diff"].as_f64().unwrap() < 1e-4, "{row}");
        assert!(row["max_oracle_diff"].as_f64().unwrap() < 1e-4, "{row}");
    }
}

#[test]
fn unknown_moment_exits_2() {
    let r = Run::new();
    let cfg = format!("{COHERENT_MOMENTS}\n[moments]\nnames = [\"q\", \"q3\"]\n");
    let o = r.exec("moments", &cfg, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("q3"));
}

#[test]
fn free_evolution_suite_passes() {
    let r = Run::new();
    let cfg = r#"
[state]
preset = "coherent"
q0 = 1.0
p0 = 0.0
[representation]
kind = "M1"
[hamiltonian]
potential = []
[dynamics]
mode = "evolution"
"#;
    ok(&r.exec("dynamics", cfg, &[]));
    let rep = r.json("dynamics.json");
    assert_eq!(rep["evolution"]["passed"], true, "{rep}");
    for e in rep["evolution"]["rhs_vs_fd_error"].as_array().unwrap() {
        assert!(e.as_f64().unwrap() <= 1e-3);
    }
}

#[test]
fn oscillator_stationary_suite_passes() {
    let r = Run::new();
    let mut cfg = String::from("[representation]\nkind = \"M1\"\n[hamiltonian]\npotential = [0.0, 0.0, 0.5]\n[dynamics]\nmode = \"stationary\"\n");
    for n in 0..3 {
        cfg += &format!("[[dynamics.stationary]]\nstate = {{ preset = \"ho_eigenstate\", n = {n} }}\nenergy = {}\n", n as f64 + 0.5);
    }
    ok(&r.exec("dynamics", &cfg, &[]));
    let rep = r.json("dynamics.json");
    let rows = rep["stationary"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert_eq!(row["passed"], true, "{row}");
    }
}

#[test]
fn joint_stationary_in_dynamics() {
    let r = Run::new();
    let cfg = r#"
[state]
preset = "ho_eigenstate"
n = 1
[representation]
kind = "M2"
[distribution]
center = 0.0
width = 1.0
[hamiltonian]
potential = [0.0, 0.0, 0.5]
[dynamics]
mode = "stationary"
energy = 1.5
route = "generic"
"#;
    ok(&r.exec("dynamics", cfg, &[]));
    let rep = r.json("dynamics.json");
    assert!(rep["joint"]["rhs_factorization_error"].as_f64().unwrap() < 5e-4, "{rep}");
    assert_eq!(rep["joint"]["stationary"][0]["passed"], true, "{rep}");
}

#[test]
fn degree_five_potential_exits_2() {
    let r = Run::new();
    let cfg = format!("{GROUND_M1}\n[hamiltonian]\npotential = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0]\n");
    let o = r.exec("dynamics", &cfg, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hamiltonian"));
}

#[test]
fn joint_subcommand_writes_envelope() {
    let r = Run::new();
    let cfg = format!("{COHERENT_MOMENTS}\n[distribution]\ncenter = 0.0\nwidth = 1.0\n");
    ok(&r.exec("joint", &cfg, &[]));
    let env = r.json("joint.json");
    assert_eq!(env["distribution"]["width"], 1.0);
    let rep = r.json("joint_report.json");
    assert!((rep["total"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(r.out().join("joint.csv").exists());
    assert_eq!(code(&r.exec("joint", COHERENT_MOMENTS, &[])), 2);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let r = Run::new();
    let cfg = format!("{COHERENT_MOMENTS}\n[distribution]\ncenter = 0.3\nwidth = 1.2\n");
    ok(&r.exec("moments", &cfg, &["--threads", "1"]));
    let one = fs::read_to_string(r.out().join("moments.json")).unwrap();
    ok(&r.exec("moments", &cfg, &["--threads", "1"]));
    assert_eq!(one, fs::read_to_string(r.out().join("moments.json")).unwrap());
    ok(&r.exec("moments", &cfg, &["--threads", "4"]));
    let four: Value = r.json("moments.json");
    let one: Value = serde_json::from_str(&one).unwrap();
    for key in ["moments", "joint"] {
        for (a, b) in one[key].as_array().unwrap().iter().zip(four[key].as_array().unwrap()) {
            for field in ["oracle", "dual", "regular", "singular"] {
                if let (Some(x), Some(y)) = (a[field].as_f64(), b[field].as_f64()) {
                    assert!((x - y).abs() <= 1e-12, "{key}.{field}: {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn environment_overrides() {
    let r = Run::new();
    let cfg = r.config(GROUND_M1);
    let target = r.dir.path().join("from-env");
    let o = bin().args(["tomogram", "--format", "json", "--config"]).arg(&cfg).env("PARTOMO_OUT", &target).output().unwrap();
    ok(&o);
    assert!(target.join("tomogram.json").exists());
    let o = bin().args(["tomogram", "--config"]).arg(&cfg).arg("--out").arg(r.out()).env("PARTOMO_THREADS", "many").output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(!r.out().exists());
}
