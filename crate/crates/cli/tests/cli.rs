use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mmps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmps"))
        .args(args)
        .output()
        .expect("spawn mmps")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&mmps(&[])), 2);
    assert_eq!(code(&mmps(&["frobnicate"])), 2);
    assert_eq!(code(&mmps(&["simulate", "--bogus"])), 2);
    let o = mmps(&[]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&mmps(&["--help"])), 0);
}

#[test]
fn invalid_config_is_rejected_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    for (k, text) in [
        "grid.n = 16\nmystery.key = 1\n",
        "params.nu = -1\n",
        "time.dt = zero\n",
    ]
    .iter()
    .enumerate()
    {
        let cfg = config(tmp.path(), &format!("bad{k}.cfg"), text);
        let out = tmp.path().join(format!("out{k}"));
        let o = mmps(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{text}");
        assert!(!out.exists());
    }
}

#[test]
fn zero_simulation_writes_zero_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "zero.cfg",
        "grid.n = 8\ninit.recipe = zero\ntime.t_end = 0.005\n",
    );
    let out = tmp.path().join("z");
    let o = mmps(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("t,u_l2,grad_u_l2,"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row.split(',').skip(1).all(|v| v == "0.0"), "{row}");
    }
}

#[test]
fn taylor_green_audit_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "tg.cfg",
        "grid.n = 16\ngrid.mode = periodic\ninit.recipe = taylor-green\ntime.t_end = 0.02\noutput.stride = 1\n",
    );
    let out = tmp.path().join("tg");
    let out = out.to_str().unwrap();
    assert_eq!(
        code(&mmps(&["simulate", "--config", &cfg, "--out", out])),
        0
    );
    let o = mmps(&["audit", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.contains("envelope holds") && text.contains("audit passed"),
        "{text}"
    );
    assert!(Path::new(out).join("audit.csv").exists());
}

#[test]
fn audit_of_missing_trajectory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mmps(&[
        "audit",
        "--out",
        tmp.path().join("nothing").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "run.cfg",
        "grid.n = 16\ninit.recipe = random-h1\ntime.t_end = 0.01\noutput.stride = 5\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        assert_eq!(
            code(&mmps(&[
                "simulate",
                "--config",
                &cfg,
                "--out",
                d.to_str().unwrap(),
                "--seed",
                "7"
            ])),
            0
        );
    }
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    assert!(ta.len() >= 5);
    assert_eq!(ta, tb);
    let c = tmp.path().join("c");
    assert_eq!(
        code(&mmps(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            c.to_str().unwrap(),
            "--seed",
            "8"
        ])),
        0
    );
    assert_ne!(read_tree(&a), read_tree(&c));
}

#[test]
fn probes_and_selftest_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "probe.cfg",
        "grid.n = 12\nprobe.samples = 4\nprobe.grids = 8, 16\n",
    );
    for (cmd, file) in [
        ("gn-probe", "gn_probe.csv"),
        ("stokes-selftest", "stokes_selftest.csv"),
    ] {
        let out = tmp.path().join(cmd);
        let o = mmps(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(out.join(file).exists());
    }
}

#[test]
fn small_experiments_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "exp.cfg",
        "grid.n = 16\ntime.dt = 0.002\ntime.t_end = 0.02\nuniqueness.delta = 1e-6\n",
    );
    for (cmd, file) in [
        ("schauder", "schauder.csv"),
        ("uniqueness", "uniqueness.csv"),
    ] {
        let out = tmp.path().join(cmd);
        let o = mmps(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(file).exists());
    }
    let zero = config(
        tmp.path(),
        "mms.cfg",
        "init.recipe = manufactured\nscheme.forcing = zero\nconvergence.grids = 8, 12, 16\nconvergence.temporal_n = 8\nconvergence.dts = 0.01, 0.005, 0.0025\nconvergence.t_end = 0.02\n",
    );
    let out = tmp.path().join("conv");
    let o = mmps(&[
        "convergence",
        "--config",
        &zero,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}
