use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tableturn"))
        .args(args)
        .env_remove("TABLETURN_THREADS")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn balance_exit_codes() {
    let flat = run(&[
        "balance", "--ground", "flat", "--ratio", "1", "--legs", "0.75",
    ]);
    assert_eq!(flat.status.code(), Some(0));
    let json = stdout(&flat);
    assert!(json.contains("\"gamma\": 0.0000000000000000e0"), "{json}");
    assert!(json.contains("\"exit_code\": 0"));

    let cone = [
        "balance",
        "--ground",
        "cone:height=0.7071068,radius=1",
        "--ratio",
        "1",
    ];
    assert_eq!(code(&[&cone[..], &["--legs", "0.6971"]].concat()), 2);
    assert_eq!(code(&[&cone[..], &["--legs", "0.7072"]].concat()), 0);
    assert_eq!(
        code(&["balance", "--ground", "cliff", "--ratio", "1", "--legs", "1"]),
        4
    );
    let steep = "bumps:seed=1,n=8,sigma=0.3,target=50";
    let out = run(&[
        "balance",
        "--ground",
        steep,
        "--ratio",
        "0.5",
        "--samples",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("\"status\": \"no_sign_change\""));
}

#[test]
fn invalid_input_exits_one() {
    let out = run(&["balance", "--ground", "plume:xyz"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown kind `plume`"));
    assert_eq!(code(&["balance", "--ground", "flat", "--ratio", "0"]), 1);
    assert_eq!(code(&["balance", "--ground", "flat", "--ratio", "1.5"]), 1);
    assert_eq!(code(&["balance", "--ground", "flat", "--legs", "-1"]), 1);
    assert_eq!(code(&["sweep", "--ground", "flat", "--samples", "3"]), 1);
    assert_eq!(code(&["balance", "--ground", "flat", "--grid", "x.txt"]), 1);
    assert_eq!(code(&["balance"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["balance", "--grid", "/nonexistent/grid.txt"]), 1);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn threads_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_tableturn"))
        .args(["balance", "--ground", "flat"])
        .env("TABLETURN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_tableturn"))
        .args(["balance", "--ground", "flat"])
        .env("TABLETURN_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sweep_csv_layout() {
    let out = run(&["sweep", "--ground", "flat", "--samples", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gamma,t,phi,theta,hover,center_z");
    assert_eq!(lines.len(), 9);
    for l in &lines[1..] {
        let hover: f64 = l.split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(hover, 0.0);
    }

    let out = run(&["sweep", "--ground", "radial:a=0.2,w=3", "--samples", "16"]);
    assert!(stderr(&out).contains("balanced everywhere"));

    let out = run(&[
        "sweep",
        "--ground",
        "bumps:seed=1,target=0.7",
        "--samples",
        "256",
    ]);
    let hovers: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(hovers.len(), 256);
    assert!(hovers.iter().any(|&h| h > 0.0) && hovers.iter().any(|&h| h < 0.0));

    assert_eq!(code(&["sweep", "--ground", "cliff"]), 4);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let cases: [&[&str]; 3] = [
        &[
            "balance",
            "--ground",
            "bumps:seed=4,target=0.7",
            "--ratio",
            "0.6",
            "--legs",
            "0.9",
        ],
        &[
            "sweep",
            "--ground",
            "bumps:seed=2,target=0.7",
            "--ratio",
            "0.8",
            "--samples",
            "64",
        ],
        &["lipschitz", "--ground", "ridge:s=0.9", "--samples", "5000"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let threaded = Command::new(env!("CARGO_BIN_EXE_tableturn"))
        .args(cases[1])
        .env("TABLETURN_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(threaded.stdout, run(cases[1]).stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let p = path.to_str().unwrap();
    let out = run(&["sweep", "--ground", "flat", "--samples", "4", "--out", p]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("gamma,t,phi,theta,hover,center_z\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn grid_ground_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let mut text = String::from("-3 -3 0.5 0.5 13 13\n");
    for j in 0..13 {
        let row: Vec<String> = (0..13)
            .map(|i| format!("{}", 0.1 * ((i + 2 * j) % 5) as f64))
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    let out = run(&["balance", "--grid", path.to_str().unwrap(), "--legs", "1"]);
    assert!(matches!(out.status.code(), Some(0 | 2)), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"status\": \"solved\""));
}

#[test]
fn verify_suites() {
    let out = run(&["verify", "--suite", "critical-k"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("0.7071068"));
    assert!(text.contains("35.26"));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 4);
    assert_eq!(code(&["verify", "--suite", "frames"]), 0);
    assert_eq!(code(&["verify", "--suite", "sharpness"]), 0);
    assert_eq!(code(&["verify", "--suite", "nope"]), 1);
}

#[test]
fn gallery_entries() {
    let out = run(&["gallery", "--name", "radial"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("hover gap \u{2261} 0"));

    let out = run(&["gallery", "--name", "cone"]);
    assert_eq!(out.status.code(), Some(0));
    let err = stderr(&out);
    assert!(err.contains("L = 0.7071068: pass"), "{err}");
    assert!(err.contains("L = 0.6971068: fail"), "{err}");
    assert!(err.contains("35.26\u{b0}"));

    let out = run(&["gallery", "--name", "ridge"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("collision: true"));

    let out = run(&["gallery", "--name", "cliff", "--samples", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("no balance"));
    assert!(stdout(&out).contains("\"exactly_balanced\": false"));

    assert_eq!(code(&["gallery", "--name", "plume"]), 1);
}
