use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use casimech::cli::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_casimech"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

const SMALL: &str = r#"
scenario = "photon_number"

[system.cavity]
length = 1e-5
num_modes = 4

[system.mechanics]
omega = 1.8836515673088532e14
mass = 1e-16

[system.state]
beta_mag = 1.0

[grid]
start = 0.0
stop = 20.0
points = 5
"#;

fn run(scenario: &str, text: &str) -> (std::process::Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, text).unwrap();
    let out = bin()
        .arg(scenario)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    (out, dir)
}

#[test]
fn writes_csv_with_header() {
    let (out, dir) = run("photon_number", SMALL);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/photon_number.csv")).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    assert!(head.starts_with("# casimech v0.1.0, config-sha256="));
    assert_eq!(head.len(), "# casimech v0.1.0, config-sha256=".len() + 64);
    assert!(lines.next().unwrap().starts_with("t_tilde,t_s,order0"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        for v in r.split(',') {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
    }
}

#[test]
fn output_is_reproducible() {
    let (a, da) = run("photon_number", SMALL);
    let (b, db) = run("photon_number", SMALL);
    assert!(a.status.success() && b.status.success());
    let ra = fs::read(da.path().join("out/photon_number.csv")).unwrap();
    let rb = fs::read(db.path().join("out/photon_number.csv")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for n in ["1", "3"] {
        let out = dir.path().join(n);
        let st = bin()
            .args(["resonance_scan", "--config"])
            .arg(configs().join("resonance_scan.toml"))
            .arg("--out")
            .arg(&out)
            .env("CASIMECH_THREADS", n)
            .output()
            .unwrap();
        assert!(st.status.success());
        outputs.push(fs::read(out.join("resonance_scan.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn empty_grid_is_a_parse_error() {
    let text = SMALL.replace("points = 5", "points = 0");
    let (out, _d) = run("photon_number", &text);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.points must be ≥ 2"));
}

#[test]
fn malformed_config_is_a_parse_error() {
    let (out, _d) = run("photon_number", "scenario = [");
    assert_eq!(out.status.code(), Some(1));
    let (out, _d) = run("phonon_number", SMALL);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_physics_names_the_field() {
    let text = SMALL.replace("mass = 1e-16", "mass = -1.0");
    let (out, _d) = run("photon_number", &text);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mechanics.mass"));
    let text = SMALL.replace("beta_mag = 1.0", "beta_mag = 1.0\nk = 9");
    let (out, _d) = run("photon_number", &text);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("state.k"));
}

#[test]
fn shipped_configs_round_trip() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = RunConfig::parse(&text).unwrap();
        let again = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        cfg.system.build().unwrap();
    }
}

#[test]
fn round_trip_keeps_drive_tables_and_thermal_state() {
    let text = format!(
        "{SMALL}\n[system.state.thermal]\ntemperature = 0.5\n\n[[system.drives]]\ntarget = \"mode_k\"\nform = \"tabulated\"\ntimes = [0.0, 1e-14]\nlambda_x = [1e13, 0.0]\nlambda_p = [0.0, 0.0]\n"
    )
    .replace("[system.state]\nbeta_mag = 1.0\n", "");
    let cfg = RunConfig::parse(&text).unwrap();
    assert_eq!(cfg.system.drives.len(), 1);
    assert_eq!(RunConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
}

#[test]
fn oracle_compare_writes_json_report() {
    let text = fs::read_to_string(configs().join("oracle_compare.toml"))
        .unwrap()
        .replace("stop = 60.0", "stop = 10.0")
        .replace("points = 31", "points = 6");
    let (out, dir) = run("oracle_compare", &text);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/oracle_compare.json")).unwrap()).unwrap();
    assert_eq!(json["reports"].as_array().unwrap().len(), 2);
    assert!(json["scaling_exponent"].as_f64().is_some());
    assert!(json["reports"][0]["per_order"][2]["max_rel"].as_f64().unwrap() < 5e-3);
}
