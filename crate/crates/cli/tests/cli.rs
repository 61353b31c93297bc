use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use singlepeak_cli::RunConfig;

/// Small harmonic basis so each run takes seconds.
const FAST: &str = "quadrature.kmax = 4\nquadrature.radial_nodes = 48\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_singlepeak"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    (output, out)
}

fn report(out: &Path, name: &str) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(out.join(name)).unwrap()).unwrap()
}

#[test]
fn default_potentials_pass_checks() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), FAST, &["check-potentials"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out, "check-potentials.json");
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["A1", "A2", "V"]);
}

#[test]
fn constant_at_infinity_a_fails_first_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{FAST}potential.A.family = \"algebraic-decay\"\npotential.A.power = 0.0\n");
    let (o, out) = run(dir.path(), &cfg, &["check-potentials"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out, "check-potentials.json");
    assert_eq!(r["checks"][0]["name"], "A1");
    assert_eq!(r["checks"][0]["pass"], false);

    // the other commands stop unless forced
    let (o, _) = run(dir.path(), &cfg, &["scan"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(dir.path(), "dimension = 5\nscan.n_mu = \"many\"\n", &["scan"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");

    let (o, _) = run(dir.path(), "potential.V.family = \"cubic\"\n", &["check-potentials"]);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run(dir.path(), "epsilon = [0.5]\n", &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run(dir.path(), "", &["explode"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_without_magnetic_field_has_no_correction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{FAST}potential.A.family = \"zero\"\nscan.mu_min = 0.2\nscan.mu_max = 2.0\nscan.n_mu = 3\nscan.n_s = 4\n"
    );
    let (o, out) = run(dir.path(), &cfg, &["scan", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("gamma_landscape.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let h = rdr.headers().unwrap().clone();
    let expected = [
        "mu", "xi_1", "xi_2", "xi_3", "xi_4", "xi_5", "gamma", "g2_part", "correction_part", "quad_err", "error",
    ];
    assert_eq!(h.iter().collect::<Vec<_>>(), expected);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    let mus: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    // mu-major: mu is constant over each block of n_s rows
    for block in mus.chunks(4) {
        assert!(block.iter().all(|&m| m == block[0]));
    }
    assert!(mus[0] < mus[4] && mus[4] < mus[8]);
    for r in &rows {
        assert_eq!(r[8].parse::<f64>().unwrap(), 0.0);
        assert_eq!(&r[10], "");
    }
    let rep = report(&out, "scan.json");
    let echo: RunConfig = serde_json::from_value(rep["config"].clone()).unwrap();
    assert_eq!(echo.seed, 11);
    let mut parsed = RunConfig::from_toml(&cfg).unwrap();
    parsed.seed = 11;
    assert_eq!(echo, parsed);
}

#[test]
fn zero_potentials_have_no_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{FAST}potential.A.family = \"zero\"\npotential.V.family = \"zero\"\nscan.n_mu = 3\nscan.n_s = 3\n");
    let (o, out) = run(dir.path(), &cfg, &["solve", "--force"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("solutions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    let r = report(&out, "solve.json");
    assert!(r["warnings"][0].as_str().unwrap().contains("flat"));
}

#[test]
fn one_signed_potential_gives_a_solution_per_eps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{FAST}epsilon = [0.1, 0.05]\nscan.mu_min = 0.1\nscan.mu_max = 5.0\nscan.n_mu = 6\nscan.s_min = -2.0\nscan.s_max = 2.0\nscan.n_s = 5\nsearch.max_starts = 2\n"
    );
    let (o, out) = run(dir.path(), &cfg, &["solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("solutions.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    for eps in ["0.1", "0.05"] {
        assert!(rows.iter().any(|r| &r[0] == eps), "no row for eps {eps}");
    }
    let r = report(&out, "solve.json");
    let dumps = r["data"]["field_dumps"].as_array().unwrap();
    assert_eq!(dumps.len(), rows.len());
    let dump = std::fs::read_to_string(out.join(dumps[0].as_str().unwrap())).unwrap();
    let mut lines = dump.lines();
    assert_eq!(lines.next(), Some("# singlepeak field"));
    assert_eq!(lines.next(), Some("dimension 5"));
    assert_eq!(lines.next(), Some("kmax 4"));
    let data: Vec<&str> = dump.lines().skip_while(|l| *l != "channel degree r re im").skip(1).collect();
    // channels of degree <= 4 on S^4 times 48 radial nodes
    assert_eq!(data.len(), (1 + 5 + 14 + 30 + 55) * 48);
}

#[test]
fn asymptotics_without_magnetic_field_reports_trivial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{FAST}potential.A.family = \"zero\"\n");
    let (o, out) = run(dir.path(), &cfg, &["asymptotics"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out, "asymptotics.json");
    let checks = r["checks"].as_array().unwrap();
    let trivial: Vec<&serde_json::Value> = checks
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("magnetic cancellation"))
        .collect();
    assert_eq!(trivial.len(), 3);
    assert!(trivial.iter().all(|c| c["value"] == 0.0 && c["pass"] == true));
    let limit = checks.iter().find(|c| c["name"].as_str().unwrap().starts_with("small-mu limit")).unwrap();
    let (v, reference) = (limit["value"].as_f64().unwrap(), limit["reference"].as_f64().unwrap());
    assert!((v - reference).abs() < 0.02 * reference);
}

#[test]
fn verify_suite_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), FAST, &["verify", "--threads", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out, "verify.json");
    assert!(r["checks"].as_array().unwrap().len() >= 10);
}
