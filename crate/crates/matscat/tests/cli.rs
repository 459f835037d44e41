//! End-to-end checks of the command-line surface: config files in,
//! deterministic reports out.

use clap::Parser;
use matscat::cli::{execute, parse_potential_file, Cli, CliError};
use std::path::PathBuf;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("matscat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Result<bool, CliError> {
    let mut argv = vec!["matscat"];
    argv.extend_from_slice(args);
    execute(Cli::parse_from(argv))
}

#[test]
fn shipped_configs_parse() {
    for name in [
        "complex2x2.json",
        "real2x2.json",
        "real2x2_deep.json",
        "square_well.json",
        "free.json",
    ] {
        let p = parse_potential_file(&config(name)).unwrap();
        assert!(p.n() >= 1, "{name}");
    }
}

#[test]
fn scatter_writes_deterministic_csv() {
    let potential = config("free.json");
    let out_a = scratch("scatter_a.csv");
    let out_b = scratch("scatter_b.csv");
    for out in [&out_a, &out_b] {
        let pass = run(&[
            "scatter",
            "--potential",
            potential.to_str().unwrap(),
            "--kmin",
            "0.5",
            "--kmax",
            "2.0",
            "--ksteps",
            "4",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        assert!(pass);
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "identical configs must produce byte-identical output");
    let text = String::from_utf8(a).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "1.0000000000000000e0"); // free transmission
        assert_eq!(fields[5], "0.0000000000000000e0"); // free reflection
    }
}

#[test]
fn verify_passes_on_complex_pair() {
    let out = scratch("verify.txt");
    let pass = run(&[
        "verify",
        "--potential",
        config("complex2x2.json").to_str().unwrap(),
        "--kmin",
        "0.5",
        "--kmax",
        "2.0",
        "--ksteps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(pass);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() >= 3 * 27);
    assert!(text.lines().all(|line| line.ends_with("PASS")));
}

#[test]
fn verify_rejects_corrupted_input() {
    let bad = scratch("bad.json");
    std::fs::write(
        &bad,
        r#"{"n": 2, "fragments": [{"x_min": 0.0, "x_max": 1.0, "matrix_re": [[3.0, 2.0], [1.0, 0.0]]}]}"#,
    )
    .unwrap();
    let err = run(&["verify", "--potential", bad.to_str().unwrap()]).unwrap_err();
    assert!(matches!(err, CliError::Validation(_)), "{err}");
}

#[test]
fn factorize_with_explicit_cuts() {
    let pass = run(&[
        "factorize",
        "--potential",
        config("complex2x2.json").to_str().unwrap(),
        "--kmin",
        "0.5",
        "--kmax",
        "1.5",
        "--ksteps",
        "3",
        "--cuts=-1.0,0.0,0.5",
        "--out",
        scratch("factorize.txt").to_str().unwrap(),
    ])
    .unwrap();
    assert!(pass);
}

#[test]
fn boundstates_and_levinson_on_real_pair() {
    let out = scratch("bound.txt");
    let pass = run(&[
        "boundstates",
        "--potential",
        config("real2x2.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(pass);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("distinct=1 total=1 nu=0"), "{text}");

    let out = scratch("levinson.txt");
    let pass = run(&[
        "levinson",
        "--potential",
        config("real2x2.json").to_str().unwrap(),
        "--kmin",
        "1e-5",
        "--kmax",
        "1e4",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(pass);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("total=1"), "{text}");
    assert!(text.trim_end().ends_with("PASS"), "{text}");
}

#[test]
fn halfline_sweep_passes() {
    let out = scratch("halfline.csv");
    let pass = run(&[
        "halfline",
        "--potential",
        config("real2x2_deep.json").to_str().unwrap(),
        "--kmin",
        "0.4",
        "--kmax",
        "3.0",
        "--ksteps",
        "5",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(pass);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.lines().skip(1).all(|line| line.ends_with("PASS")),
        "{text}"
    );
}

#[test]
fn scatter_norm_diff_column_on_deep_pair() {
    let out = scratch("normdiff.csv");
    let pass = run(&[
        "scatter",
        "--potential",
        config("real2x2_deep.json").to_str().unwrap(),
        "--kmin",
        "0.5",
        "--kmax",
        "2.0",
        "--ksteps",
        "4",
        "--norm-diff",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(pass);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",T_diff_norm"));
    // left and right transmissions differ for this potential
    for line in text.lines().skip(1) {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff > 1e-3, "{line}");
    }
}
