use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use penalfd::study::errors_for;
use penalfd::Grid;
use penalfd_cli::run::{error_fields, ERROR_HEADER};
use penalfd_cli::Config;

const SQUARE: &str = r#"
[problem]
domain = "square"
radius = 0.3
case = "square-sin5"
alpha = 2.0
eps = 1e-3
scheme = "upwind2"

[grid]
n = 40
"#;

const DISK: &str = r#"
[problem]
domain = "disk"
radius = 0.3
case = "disk-sin"
c = 5.0
alpha = 2.0
eps = 1e-2
scheme = "upwind1"

[grid]
n = 40
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn penalfd(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_penalfd"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

/// `(from, to, order)` rows of `orders.csv` for one mask and norm.
fn orders(out: &Path, mask: &str, norm: &str) -> Vec<f64> {
    read_csv(&out.join("orders.csv"))
        .into_iter()
        .filter(|r| r[0] == mask && r[1] == norm)
        .map(|r| r[5].parse().unwrap())
        .collect()
}

fn assert_close(found: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(found.len(), expected.len());
    for (f, e) in found.iter().zip(expected) {
        assert!((f - e).abs() <= tol, "{found:?} vs {expected:?}");
    }
}

#[test]
fn solve_output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SQUARE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(penalfd(&["solve"], &cfg, &a).status.success());
    assert!(penalfd(&["solve", "--jobs", "2"], &cfg, &b).status.success());
    for name in ["solution.csv", "errors.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn solution_csv_reproduces_errors_csv() {
    let tmp = tempfile::tempdir().unwrap();
    for (k, text) in [SQUARE, DISK].into_iter().enumerate() {
        let cfg_path = write_config(tmp.path(), text);
        let out = tmp.path().join(format!("run{k}"));
        let res = penalfd(&["solve"], &cfg_path, &out);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

        let config = Config::load(&cfg_path).unwrap();
        let grid = Grid::new(config.grid.n).unwrap();
        let rows = read_csv(&out.join("solution.csv"));
        assert_eq!(rows[0], ["i", "j", "x", "y", "chi", "U"]);
        let mut u = vec![f64::NAN; grid.dim()];
        for r in &rows[1..] {
            let (i, j): (usize, usize) = (r[0].parse().unwrap(), r[1].parse().unwrap());
            u[grid.node_of(i, j).unwrap()] = r[5].parse().unwrap();
        }
        let cfg = config.penal_config(config.problem.eps, false);
        let mut expected = vec![ERROR_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        for mask in config.masks(&grid) {
            expected.push(error_fields(&errors_for(&grid, &cfg, &u, mask).unwrap()));
        }
        assert_eq!(read_csv(&out.join("errors.csv")), expected);
    }
}

#[test]
fn zero_eps_fails_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SQUARE.replace("eps = 1e-3", "eps = 0.0"));
    let res = penalfd(&["solve"], &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("problem.eps: eps must be > 0"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn misaligned_square_fails_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SQUARE.replace("n = 40", "n = 42"));
    let res = penalfd(&["solve"], &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("not aligned"));
}

#[test]
fn upwind2_on_disk_needs_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &DISK.replace("upwind1", "upwind2"));
    let res = penalfd(&["solve"], &cfg, &tmp.path().join("a"));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("problem.scheme"));
    let res = penalfd(&["solve", "--allow-upwind2-disk"], &cfg, &tmp.path().join("b"));
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn parse_error_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[problem]\neps = \n");
    let res = penalfd(&["solve"], &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 2"));
}

#[test]
fn solver_failure_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{DISK}\n[solver]\nmethod = \"bicgstab\"\ntol = 1e-300\n").replace("n = 40", "n = 6");
    let cfg = write_config(tmp.path(), &text);
    let res = penalfd(&["solve"], &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn sweep_h_reproduces_second_order() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SQUARE}\n[sweep]\nn = [50, 100, 150, 200]\nmasks = [\"fluid\"]\n").replace("eps = 1e-3", "eps = 1e-10");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let res = penalfd(&["sweep-h"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    // expected L2 orders close to -2
    assert_close(&orders(&out, "fluid", "L2"), &[-1.995, -1.997, -1.998], 0.005);
}

#[test]
fn sweep_eps_reproduces_first_order() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SQUARE}\n[sweep]\neps = [1e-1, 1e-2, 1e-3, 1e-4]\nmasks = [\"fluid\"]\n")
        .replace("n = 40", "n = 150");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let res = penalfd(&["sweep-eps", "--jobs", "2"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    // expected Linf orders close to 1
    assert_close(&orders(&out, "fluid", "Linf"), &[0.862, 0.922, 1.071], 0.02);
    let errors = read_csv(&out.join("errors.csv"));
    assert_eq!(errors[0][..3], ["N", "eps", "mask"]);
    assert_eq!(errors.len(), 5);
}

#[test]
fn supersolutions_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[supersol]\neps_1d = [1e-2]\neps_spherical = [1e-2]\n";
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("out");
    let res = penalfd(&["supersol"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = read_csv(&out.join("supersol.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!((rows[1][0].as_str(), rows[2][0].as_str()), ("1d", "spherical"));
    assert!(rows[1..].iter().all(|r| r.last().unwrap() == "true"));
}

#[test]
fn condnum_grows_as_eps_shrinks() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{DISK}\n[condnum]\neps = [1e-2, 1e-4]\n").replace("n = 40", "n = 20");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let res = penalfd(&["condnum"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = read_csv(&out.join("condnum.csv"));
    assert_eq!(rows[0], ["eps", "kappa_inf_bound", "kappa2", "kappa2_jacobi"]);
    let k: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((50.0..=200.0).contains(&(k[1] / k[0])), "{k:?}");
}

#[test]
fn condnum_refuses_large_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &DISK.replace("n = 40", "n = 200"));
    let res = penalfd(&["condnum"], &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn blayer_writes_thickness_and_order() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SQUARE}\n[blayer]\neps = [1e-1, 1e-2]\n").replace("n = 40", "n = 100");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let res = penalfd(&["blayer"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = read_csv(&out.join("blayer.csv"));
    assert_eq!(rows[0], ["eps", "x", "RU", "bl1", "bl2"]);
    assert_eq!(rows.len(), 3);
    let bl2: Vec<f64> = rows[1..].iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(bl2[1] < bl2[0]);
    assert_eq!(read_csv(&out.join("orders.csv")).len(), 2);
}
