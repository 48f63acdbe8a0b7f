use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlasov-hme")).args(args).current_dir(dir).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

/// Writes a trace whose `√E_h` is `amp(t)` on a fine grid.
fn synthetic(path: &Path, amp: impl Fn(f64) -> f64, t_end: f64) {
    let mut text = String::from("t,E_h,E_p,E_total,mass,momentum\n");
    let n = (t_end / 0.005) as usize;
    for i in 0..=n {
        let t = i as f64 * 0.005;
        let a = amp(t);
        text.push_str(&format!("{t:.16e},{:.16e},1,1,1,0\n", a * a));
    }
    fs::write(path, text).unwrap();
}

const SMALL: &str = "M = 8\nN = 32\nk = 0.5\nt_end = 4\n";

#[test]
fn run_writes_full_precision_trace() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("a.cfg"), SMALL).unwrap();
    let o = bin(&["run", "--config", "a.cfg", "--out", "trace.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,E_h,E_p,E_total,mass,momentum"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 6);
    // 17 significant digits: one before the point, sixteen after
    let mantissa = first[2].split('e').next().unwrap();
    assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 16);

    let data = rows(&dir.path().join("trace.csv"));
    assert!(data.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(data.last().unwrap()[0] >= 4.0);
    let m0 = data[0][4];
    assert!(data.iter().all(|r| ((r[4] - m0) / m0).abs() < 1e-12));
    assert!(data.iter().all(|r| r[1] >= 0.0 && (r[3] - r[1] - r[2]).abs() <= 1e-12 * r[3]));
}

#[test]
fn run_is_deterministic_and_stdout_matches_file() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("a.cfg"), SMALL).unwrap();
    assert!(bin(&["run", "--config", "a.cfg", "--out", "one.csv"], dir.path()).status.success());
    assert!(bin(&["run", "--config", "a.cfg", "--out", "two.csv"], dir.path()).status.success());
    let one = fs::read(dir.path().join("one.csv")).unwrap();
    assert_eq!(one, fs::read(dir.path().join("two.csv")).unwrap());
    let o = bin(&["run", "--config", "a.cfg"], dir.path());
    assert!(o.status.success());
    assert_eq!(o.stdout, one);
}

#[test]
fn run_downsamples_output() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("a.cfg"), SMALL).unwrap();
    assert!(bin(&["run", "--config", "a.cfg", "--out", "all.csv"], dir.path()).status.success());
    assert!(bin(&["run", "--config", "a.cfg", "--out", "some.csv", "--every", "10"], dir.path()).status.success());
    let all = rows(&dir.path().join("all.csv"));
    let some = rows(&dir.path().join("some.csv"));
    assert_eq!(some.len(), (all.len() - 1) / 10 + 1 + usize::from((all.len() - 1) % 10 != 0));
    assert_eq!(some[1], all[10]);
    assert_eq!(some.last(), all.last());
}

#[test]
fn bad_configs_are_rejected() {
    let dir = TempDir::new().unwrap();
    for (text, needle) in [
        (format!("{SMALL}L = 2\n"), "unknown key `L`"),
        (format!("{SMALL}N = 2\n"), "duplicate key `N`"),
        ("M = 8\nN = 32\nk = 0.5\n".to_string(), "missing required key `t_end`"),
        (format!("{SMALL}A = 1\n"), "A = 1"),
        (format!("{SMALL}cfl = fast\n"), "bad value"),
    ] {
        fs::write(dir.path().join("bad.cfg"), &text).unwrap();
        let o = bin(&["run", "--config", "bad.cfg", "--out", "t.csv"], dir.path());
        assert!(!o.status.success());
        assert!(stderr(&o).contains(needle), "{}", stderr(&o));
    }
    let o = bin(&["run", "--config", "missing.cfg"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn watchdog_dumps_state() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("hot.cfg"), "M = 4\nN = 64\nk = 0.5\nt_end = 40\nA = 0.5\nq = 5\n").unwrap();
    let o = bin(&["run", "--config", "hot.cfg", "--out", "hot.csv"], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("step") && err.contains("cell"), "{err}");
    let dump = fs::read_to_string(dir.path().join("hot.state.csv")).unwrap();
    let mut lines = dump.lines();
    assert_eq!(lines.next(), Some("x,rho,u1,theta"));
    assert_eq!(lines.count(), 64);
    assert!(rows(&dir.path().join("hot.csv")).len() > 10);
}

#[test]
fn fit_recovers_synthetic_rate() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("syn.csv");
    synthetic(&path, |t| (-0.1533 * t).exp() * (1.4 * t).cos().abs(), 30.0);
    let o = bin(&["fit", "--trace", "syn.csv", "--window", "0:25"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let fields: Vec<&str> = out.trim().split(' ').collect();
    assert_eq!(fields.len(), 3);
    let gamma: f64 = fields[0].strip_prefix("gamma=").unwrap().parse().unwrap();
    assert!((gamma + 0.1533).abs() < 1e-3, "{out}");
    let peaks: usize = fields[1].strip_prefix("peaks=").unwrap().parse().unwrap();
    assert!(peaks >= 10);
    assert!(fields[2].starts_with("residual="));

    let o = bin(&["fit", "--trace", "syn.csv"], dir.path());
    assert!(o.status.success());
    let o = bin(&["fit", "--trace", "syn.csv", "--window", "0:1"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("insufficient peaks"));
}

#[test]
fn recurrence_brackets_injected_bump() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bump.csv");
    // peaks of |cos(πt/2)| sit at even t; the jump at the zero t = 39
    // lifts the peak at 40 and keeps the signal continuous
    let amp = |t: f64| {
        let bump = if t > 39.0 { 200.0 } else { 1.0 };
        (-0.1 * t).exp() * (0.5 * PI * t).cos().abs() * bump
    };
    synthetic(&path, amp, 60.0);
    let o = bin(&["recurrence", "--trace", "bump.csv", "--window", "0:30"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let value = |key: &str| -> f64 {
        out.split_whitespace().find_map(|f| f.strip_prefix(key)).unwrap().parse().unwrap()
    };
    let (lo, hi) = (value("t_lo="), value("t_hi="));
    // the decaying envelope pulls each peak slightly earlier
    assert!((lo - 38.0).abs() < 0.1 && (hi - 40.0).abs() < 0.1, "{out}");

    synthetic(&path, |t| (-0.1 * t).exp() * (0.5 * PI * t).cos().abs(), 60.0);
    let o = bin(&["recurrence", "--trace", "bump.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no recurrence"));
}

#[test]
fn sweep_and_extrapolate() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("base.cfg"), "M = 16\nN = 32\nk = 0.5\nt_end = 10\n").unwrap();
    let o = bin(
        &["sweep", "--config", "base.cfg", "--vary", "N=32,64,128", "--extrapolate", "--window", "0:9.5", "--threads", "2", "--out", "table.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4, "{out}");
    assert!(lines[0].starts_with("N=32 ") && lines[2].starts_with("N=128 "));
    assert!(lines[3].starts_with("gamma0=") && lines[3].contains(" gamma1="));

    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let table: Vec<&str> = table.lines().collect();
    assert_eq!(table[0], "N,dx,gamma,peaks,residual");
    assert_eq!(table.len(), 4);
    let gammas: Vec<f64> = table[1..].iter().map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    // numerical diffusion shrinks with the cell size
    assert!(gammas[0] < gammas[1] && gammas[1] < gammas[2], "{gammas:?}");

    let single = bin(&["sweep", "--config", "base.cfg", "--vary", "N=64", "--window", "0:9.5", "--threads", "1"], dir.path());
    assert!(single.status.success());
    assert_eq!(stdout(&single).lines().next(), Some(lines[1]));

    let o = bin(&["sweep", "--config", "base.cfg", "--vary", "L=1,2"], dir.path());
    assert!(!o.status.success());
}
