use std::process::Command;

use fockmetric::cli::output::read_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fockmetric"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn fig1_csv() {
    let text = run_ok(&["fig1"]);
    let (header, rows) = read_csv(&text).unwrap();
    assert_eq!(header, ["n", "delta_ng"]);
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0], [0.0, 0.0]);
    assert!((rows[1][1] - 1.386294).abs() < 1e-6);
    assert!(!text.contains('\r'));
}

#[test]
fn fig2_default_grid_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    run_ok(&["fig2", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    let (header, rows) = read_csv(&text).unwrap();
    assert_eq!(
        header,
        ["omega", "F_n0", "F_n3", "F_n5", "F_n10", "F_gauss"]
    );
    assert_eq!(rows.len(), 200);
    assert_eq!(rows[0][0], 0.05);
    assert_eq!(rows[199][0], 1.0);
    assert!((rows[199][5] - 1.0).abs() < 1e-15);
    for c in 1..6 {
        assert!(rows.windows(2).all(|w| w[1][c] < w[0][c]));
    }
}

#[test]
fn fig2_point_at_tenth() {
    let text = run_ok(&["fig2", "--omega", "0.1"]);
    let (_, rows) = read_csv(&text).unwrap();
    let expected = [0.1, 50.0, 650.0, 1550.0, 5550.0, 100.0];
    for (got, want) in rows[0].iter().zip(expected) {
        assert!(((got - want) / want).abs() < 1e-14, "{got} vs {want}");
    }
}

#[test]
fn csv_reparses_bit_identically() {
    // values printed by the writer parse back to the same doubles the library computes
    let text = run_ok(&[
        "fig6",
        "--omega-count",
        "7",
        "--linear",
        "--omega-start",
        "0.3",
    ]);
    let (_, rows) = read_csv(&text).unwrap();
    let grid = fockmetric::cli::figures::OmegaGrid {
        start: 0.3,
        stop: 1.0,
        count: 7,
        log: false,
    };
    let table = fockmetric::cli::figures::fig6(&grid, 5).unwrap();
    for (a, b) in rows.iter().zip(&table.rows) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn json_schema() {
    let text = run_ok(&["fig5", "--format", "json", "--t-count", "51"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["columns", "command", "params", "provenance", "rows"]);
    assert_eq!(v["command"], "fig5");
    assert!(v["provenance"].is_string());
    let columns: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        columns,
        [
            "t",
            "ng_system",
            "ng_ancilla",
            "mutual_info",
            "fidelity",
            "balance_residual"
        ]
    );
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 51);
    let last = rows.last().unwrap().as_array().unwrap();
    assert!((last[0].as_f64().unwrap() - 15.707963267948966).abs() < 1e-12);
    assert!(last[4].as_f64().unwrap() >= 1.0 - 1e-9);
}

#[test]
fn single_shot_commands() {
    let (h, rows) = read_csv(&run_ok(&["qfi", "--omega", "1", "--levels", "3"])).unwrap();
    assert_eq!(
        h,
        [
            "omega",
            "n",
            "qfi_closed",
            "qfi_numeric",
            "qfi_gaussian",
            "crb"
        ]
    );
    assert_eq!(rows[0][2], 6.5);

    let (_, rows) = read_csv(&run_ok(&[
        "qfi",
        "--omega",
        "1",
        "--levels",
        "0,1,2,3,4",
        "--superposition",
    ]))
    .unwrap();
    assert!((rows[0][1] - 4.5).abs() < 1e-14);
    assert!((rows[0][2] - 4.010_102_051_443_364).abs() < 1e-12);

    let (_, rows) = read_csv(&run_ok(&["ng", "--levels", "0,3"])).unwrap();
    assert!((rows[1][1] - rows[1][2]).abs() < 1e-9);

    let (h, rows) = read_csv(&run_ok(&["measure", "--p", "0.5"])).unwrap();
    assert_eq!(h, ["p", "mean_n", "fidelity_one", "delta_ng"]);
    assert!((rows[0][3] - 0.2616240718822739).abs() < 1e-12);

    let (_, rows) = read_csv(&run_ok(&[
        "protocol",
        "--gamma",
        "0.2",
        "--t-count",
        "11",
        "--detuning",
        "0.05",
    ]))
    .unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows.last().unwrap()[4] < 1.0 - 1e-3);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["fig7"]), 1);
    assert_eq!(code(&["fig2", "--omega-count", "abc"]), 1);
    assert_eq!(code(&["fig2", "--omega-count", "1"]), 1);
    assert_eq!(code(&["fig1", "--out", "/nonexistent-dir/x.csv"]), 2);
    assert_eq!(code(&["fig3", "--levels", "0,3"]), 3);
    assert_eq!(code(&["qfi", "--omega", "1", "--levels", "41"]), 3);
}
