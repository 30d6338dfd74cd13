use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qrcp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrcp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn qrcp")
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn kahan_700_robust_pipeline_passes_check() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let g = qrcp(d, &["gen", "kahan", "--n", "700", "--c", "0.41800000000000004", "-o", "K.mtx"]);
    assert_eq!(code(&g), 0);
    assert_eq!(summary(&g)["config"]["c"], "0.41800000000000004");

    let f = qrcp(d, &["factor", "-i", "K.mtx", "-o", "out", "--strategy", "robust"]);
    assert_eq!(code(&f), 0, "{}", String::from_utf8_lossy(&f.stderr));
    let s = summary(&f);
    assert_eq!(s["config"]["strategy"]["strategy"], "robust");
    assert_eq!(s["config"]["strategy"]["tol"], f64::EPSILON.sqrt());
    for name in ["R.mtx", "perm.csv", "tau.csv", "events.csv", "summary.json"] {
        assert!(d.join("out").join(name).is_file(), "{name} missing");
    }
    let events = std::fs::read_to_string(d.join("out/events.csv")).unwrap();
    assert!(events.starts_with("k,j,beta,temp,temp2,decision,omega_before,omega_after\n"));

    let c = qrcp(d, &["check", "-i", "out", "--csv", "profile.csv", "--json", "check.json"]);
    assert_eq!(code(&c), 0, "{}", String::from_utf8_lossy(&c.stderr));
    assert_eq!(summary(&c)["result"]["passed"], true);
    let profile = std::fs::read_to_string(d.join("profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 701);
    assert!(profile.starts_with("i,red,blue\n"));
    // human text stays off stdout
    assert!(String::from_utf8_lossy(&c.stderr).contains("PASS"));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(d.join("check.json")).unwrap()).unwrap();
    assert_eq!(saved, summary(&c));
}

#[test]
fn wrong_column_injection_fails_check() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let g = qrcp(d, &["gen", "random", "--n", "100", "--field", "complex", "--seed", "7", "-o", "A.mtx"]);
    assert_eq!(code(&g), 0);
    let f = qrcp(d, &["factor", "-i", "A.mtx", "-o", "bad", "--strategy", "exact", "--inject", "wrong-column"]);
    assert_eq!(code(&f), 0);
    let c = qrcp(d, &["check", "-i", "bad/R.mtx"]);
    assert_eq!(code(&c), 1);
    assert_eq!(summary(&c)["result"]["passed"], false);

    let f = qrcp(d, &["factor", "-i", "A.mtx", "-o", "good", "--strategy", "exact"]);
    assert_eq!(code(&f), 0);
    assert_eq!(code(&qrcp(d, &["check", "-i", "good"])), 0);
}

#[test]
fn compare_grids_on_symmetrized_kahan() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let g = qrcp(d, &["gen", "symkahan", "--n", "120", "--c", "0.44300000000000006", "-o", "M.mtx"]);
    assert_eq!(code(&g), 0);
    let out = qrcp(
        d,
        &[
            "compare", "-i", "M.mtx", "--strategy", "classic", "--grid", "6x4", "--grid2", "4x6", "--csv", "perm.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert_eq!(s["config"]["a"]["grid"], "6x4");
    assert_eq!(s["config"]["b"]["grid"], "4x6");
    assert_eq!(s["config"]["b"]["strategy"], "classic");
    let r = &s["result"];
    assert!(r["identical"].is_boolean());
    assert_eq!(r["identical"].as_bool().unwrap(), r["divergence_step"].is_null());
    let csv = std::fs::read_to_string(d.join("perm.csv")).unwrap();
    assert!(csv.starts_with("k,perm_a,perm_b\n"));
    assert_eq!(csv.lines().count(), 121);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(code(&qrcp(d, &["gen", "kahan", "--n", "5", "--c", "0.5", "-o", "K.mtx"])), 0);
    let bad = [
        &["factor", "-i", "K.mtx", "-o", "x", "--strategy", "classic", "--inject", "excess-control"][..],
        &["factor", "-i", "K.mtx", "-o", "x", "--strategy", "bogus"],
        &["factor", "-i", "K.mtx", "-o", "x", "--grid", "6by4"],
        &["factor", "-i", "K.mtx", "-o", "x", "--tol", "0"],
        &["gen", "kahan", "--n", "5", "-o", "y.mtx"],
        &["gen", "kahan", "--n", "5", "--c", "1.5", "-o", "y.mtx"],
        &["sweep", "--n", "5", "--c-from", "0.9", "--c-to", "0.1"],
        &["frobnicate"],
    ];
    for args in bad {
        let out = qrcp(d, args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // single precision accepts the excess-control injection
    let ok = qrcp(
        d,
        &[
            "factor", "-i", "K.mtx", "-o", "x", "--precision", "single", "--strategy", "classic", "--inject",
            "excess-control",
        ],
    );
    assert_eq!(code(&ok), 0);
    assert_eq!(summary(&ok)["config"]["strategy"]["inject"][0], "excess-control");
}

#[test]
fn bad_input_files_exit_three_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("t.mtx"), "%%MatrixMarket matrix array real general\n2 2\n1\n2\n").unwrap();
    let out = qrcp(d, &["check", "-i", "t.mtx"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    let out = qrcp(d, &["check", "-i", "missing.mtx"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let run = |tag: &str| {
        let mtx = format!("A{tag}.mtx");
        let dir = format!("f{tag}");
        let sweep = format!("s{tag}.csv");
        assert_eq!(code(&qrcp(d, &["gen", "random", "--m", "40", "--n", "30", "--seed", "11", "-o", &mtx])), 0);
        assert_eq!(
            code(&qrcp(d, &["factor", "-i", &mtx, "-o", &dir, "--strategy", "classic", "--grid", "2x3"])),
            0
        );
        let s = qrcp(
            d,
            &[
                "sweep", "--family", "symkahan", "--n", "20,30", "--c-from", "0.2", "--c-to", "0.8", "--c-step",
                "0.2", "--grid", "1x1,4x6", "--strategy", "classic", "--precision", "single", "--csv", &sweep,
            ],
        );
        assert_eq!(code(&s), 0);
        assert_eq!(summary(&s)["result"]["cases"], 16);
        let read = |p: String| std::fs::read(d.join(p)).unwrap();
        vec![
            read(mtx),
            read(format!("{dir}/R.mtx")),
            read(format!("{dir}/perm.csv")),
            read(format!("{dir}/tau.csv")),
            read(format!("{dir}/events.csv")),
            read(sweep),
        ]
    };
    assert_eq!(run("1"), run("2"));
}

#[test]
fn report_merges_perm_and_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(code(&qrcp(d, &["gen", "kahan", "--n", "30", "--c", "0.3", "-o", "K.mtx"])), 0);
    assert_eq!(code(&qrcp(d, &["factor", "-i", "K.mtx", "-o", "f"])), 0);
    let out = qrcp(d, &["report", "--factor", "f", "--csv", "rb.csv"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(d.join("rb.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,pivot,red,blue"));
    let perm = std::fs::read_to_string(d.join("f/perm.csv")).unwrap();
    let first_pivot = perm.lines().nth(1).unwrap().split(',').nth(1).unwrap().to_owned();
    let row0: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row0[1], first_pivot);
    assert_eq!(text.lines().count(), 31);
}

#[test]
fn single_precision_files_keep_their_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let g = qrcp(d, &["gen", "random", "--n", "12", "--precision", "single", "--field", "complex", "-o", "A.mtx"]);
    assert_eq!(code(&g), 0);
    let text = std::fs::read_to_string(d.join("A.mtx")).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix array complex general\n% qrcp precision=single\n12 12\n"));
    let f = qrcp(d, &["factor", "-i", "A.mtx", "-o", "f"]);
    let s = summary(&f);
    assert_eq!(s["config"]["precision"], "single");
    assert_eq!(s["config"]["strategy"]["tol"], (f32::EPSILON.sqrt()) as f64);
    assert_eq!(s["result"]["field"], "complex");
    assert!(s["result"]["residual_rel"].as_f64().unwrap() <= s["result"]["residual_bound"].as_f64().unwrap());
}
