use std::path::Path;
use std::process::Command;

fn cfsec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cfsec"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        run_ok(
            cfsec()
                .args([
                    "sweep", "--users", "3", "--snr-db", "0:20:10", "--trials", "4", "--seed", "5",
                    "--out",
                ])
                .arg(p),
        );
    }
    assert_eq!(read(&a), read(&b));
    let text = read(&a);
    assert!(text.starts_with(
        "cfsec_sweep_v1,snr_db,trial,r_sum_secure,r_baseline,r_nonsecure_cf,capacity_sum"
    ));
    assert_eq!(text.lines().count(), 1 + 3 * 5);
    let sidecar: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("a.csv.config.json"))).unwrap();
    assert_eq!(sidecar["seed"], 5);
    assert_eq!(sidecar["mode"], "snr-sweep");
}

#[test]
fn fixed_gain_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let args = [
        "sweep",
        "--h",
        "1,-0.5,0.8",
        "--g",
        "0.3,1.2,-0.7",
        "--snr-db",
        "30",
        "--trials",
        "1",
        "--out",
    ];
    run_ok(cfsec().args(args).arg(&out));
    let first = read(&out);
    run_ok(cfsec().args(args).arg(&out));
    assert_eq!(first, read(&out));
}

#[test]
fn default_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        cfsec()
            .env("CFSEC_OUT_DIR", dir.path())
            .args(["theta-sweep", "--points", "16"]),
    );
    let text = read(&dir.path().join("theta.csv"));
    assert!(text.starts_with("cfsec_theta_v1,theta"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn plot_from_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    run_ok(
        cfsec()
            .args(["sweep", "--snr-db", "0:30:10", "--trials", "3", "--out"])
            .arg(&csv),
    );
    let svg1 = dir.path().join("1.svg");
    let svg2 = dir.path().join("2.svg");
    run_ok(
        cfsec()
            .arg("plot")
            .arg("--csv")
            .arg(&csv)
            .arg("--out")
            .arg(&svg1),
    );
    run_ok(
        cfsec()
            .arg("plot")
            .arg("--csv")
            .arg(&csv)
            .arg("--out")
            .arg(&svg2),
    );
    let text = read(&svg1);
    assert_eq!(text, read(&svg2));
    assert_eq!(text.matches("<polyline").count(), 4);
}

#[test]
fn plot_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "hello,world\n1,2\n").unwrap();
    let out = cfsec()
        .arg("plot")
        .arg("--csv")
        .arg(&csv)
        .arg("--out")
        .arg(dir.path().join("x.svg"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn rates_json_with_enumeration() {
    let text = run_ok(cfsec().args([
        "rates",
        "--h",
        "1,-0.5",
        "--g",
        "0.3,1.2",
        "--snr-db",
        "20",
        "--enum-radius",
        "8",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["enumeration"]["agree"], true);
    assert!(v["report"]["r_sum_secure"].as_f64().unwrap() >= 0.0);
}

#[test]
fn rates_from_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("inst.json");
    std::fs::write(&f, r#"{"K": 3, "gain_seed": 4, "snr_db": 30}"#).unwrap();
    let text = run_ok(cfsec().arg("rates").arg("--instance").arg(&f));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["report"]["r_comb"].as_array().unwrap().len(), 3);
}

#[test]
fn rates_rejects_bad_gains() {
    let out = cfsec()
        .args(["rates", "--h", "1,2", "--g", "1", "--snr-db", "10"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn lemma1_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    run_ok(
        cfsec()
            .args([
                "lemma1", "--n", "1,4", "--users", "2", "--trials", "10000", "--out",
            ])
            .arg(&out),
    );
    let text = read(&out);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with(
        "cfsec_lemma1_v1,n,K,epsilon,entropy_bits_per_dim,ratio_bound_bits,clean_bound_bits,tail_prob"
    ));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn codec_demo_report() {
    let text = run_ok(cfsec().args(["codec-demo", "--n", "1", "--blocks", "8", "--trials", "200"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["alignment_residual"], 0);
    assert_eq!(v["crypto_lemma"]["exact_uniform"], true);
    assert!(v["power"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["within_limit"] == true));
}
