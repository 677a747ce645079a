use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spd(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spd"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn spd")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn tune_writes_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = spd(&["tune"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tuned = dir.path().join("tuned.conf");
    assert!(tuned.exists());
    assert!(dir.path().join("tune.csv").exists());

    // The tuned config feeds straight back in.
    let again = tempfile::tempdir().unwrap();
    let o = spd(&["--config", tuned.to_str().unwrap(), "tune"], again.path());
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("trim"), "{stdout}");
}

#[test]
fn linear_counts_bits() {
    let dir = tempfile::tempdir().unwrap();
    let o = spd(&["linear", "1010"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("linear_pulses.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t_rise_ps,width_ps"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn characterize_short_run_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["characterize", "--gates", "200000", "--seed", "5"];
    assert!(spd(&args, a.path()).status.success());
    assert!(spd(&args, b.path()).status.success());
    let fa = read_dir_sorted(a.path());
    assert!(fa.iter().any(|(n, _)| n == "metrics.csv"));
    assert_eq!(fa, read_dir_sorted(b.path()));
}

#[test]
fn dark_only_characterize_leaves_efficiency_undefined() {
    let dir = tempfile::tempdir().unwrap();
    let o = spd(&["characterize", "--gates", "100000", "-s", "laser.mu=0"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "nan");
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "gate.f_g_hz=2e8\nlaser.mu=lots\n").unwrap();
    let o = spd(&["--config", conf.to_str().unwrap(), "tune"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");

    let o = spd(&["-s", "no.such.key=1", "tune"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = spd(&["--config", "/nonexistent/x.conf", "tune"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_bits_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = spd(&["linear", "10x1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain_file");
    fs::write(&file, "").unwrap();
    let o = spd(&["linear", "11"], &file);
    assert_eq!(o.status.code(), Some(3));
}
