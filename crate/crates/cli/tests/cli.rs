use std::path::Path;
use std::process::{Command, Output};

fn genuslab(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genuslab"))
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .env_remove("GENUSLAB_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path();
    let form_file = dir.path().join("form.txt");
    std::fs::write(&form_file, "3\n1 0 0\n0 1 0\n0 0 16\n").unwrap();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["genus", form_file.to_str().unwrap()], 0),
        (vec!["disc", "[[1,0],[0,1]]"], 0),
        (vec!["genus", "[[1,2],[3,4]]"], 2),
        (vec!["genus", "[[1,2],[2,1]]"], 2),
        (vec!["genus", "[[1,0],[0"], 2),
        (vec!["genus", "missing-file"], 2),
        (vec!["good-place", "[[1,0],[0,1]]", "--floor", "2"], 2),
        (vec!["equid", "[[1,0],[0,1]]", "--radii", "2,1"], 2),
        (vec!["scan", "diag(1,1,k):5..4"], 2),
        (vec!["genus"], 2),
        (vec!["spin-genus", "[[2,1],[1,2]]"], 3),
        (vec!["--class-budget", "2", "genus", "[[1,0,0],[0,1,0],[0,0,1000]]"], 4),
        (vec!["equid", "[[1,0],[0,1]]", "--radii", "1,400", "--count-cap", "100"], 4),
    ];
    for (args, code) in cases {
        let o = genuslab(cache, &args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn genus_summary_and_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = genuslab(dir.path(), &["genus", "[[1,0,0],[0,1,0],[0,0,16]]"]);
    assert!(stdout(&o).starts_with("classes=2 mass=1/8 closed\n"), "{}", stdout(&o));
    let o = genuslab(dir.path(), &["--class-budget", "2", "genus", "[[1,0,0],[0,1,0],[0,0,1000]]"]);
    assert!(stdout(&o).starts_with("classes=2 "), "{}", stdout(&o));
    assert!(stdout(&o).lines().next().unwrap().ends_with("budget_exhausted"));
}

#[test]
fn spinor_sizes_sum_to_class_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = genuslab(dir.path(), &["spin-genus", "--json", "[[1,0,0],[0,1,0],[0,0,64]]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let classes = v["classes"].as_array().unwrap().len();
    let sizes: u64 = v["sizes"].as_object().unwrap().values().map(|s| s.as_u64().unwrap()).sum();
    assert_eq!(sizes as usize, classes);
}

#[test]
fn cache_hits_on_equivalent_input() {
    let dir = tempfile::tempdir().unwrap();
    let first = genuslab(dir.path(), &["genus", "[[1,0,0],[0,1,0],[0,0,16]]"]);
    assert!(stderr(&first).contains("cache miss"));
    let again = genuslab(dir.path(), &["genus", "[[1,1,0],[1,2,0],[0,0,16]]"]);
    assert!(stderr(&again).contains("cache hit"), "{}", stderr(&again));
    assert_eq!(stdout(&first), stdout(&again));
    let gc = genuslab(dir.path(), &["cache", "gc"]);
    assert_eq!(stdout(&gc), "kept=1 removed=0\n");
}

#[test]
fn locked_cache_fails_fast() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("genus")).unwrap();
    std::fs::write(dir.path().join(".lock"), "1\n").unwrap();
    let o = genuslab(dir.path(), &["genus", "[[1,0],[0,1]]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("locked"));
    let o = genuslab(dir.path(), &["--no-cache", "genus", "[[1,0],[0,1]]"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("genuslab.conf");
    std::fs::write(&cfg, "# experiment\nradii = 1,3\nweighting = uniform\np_max = 30\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = genuslab(dir.path(), &["--config", cfg, "--p-max", "40", "config", "show"]);
    let text = stdout(&o);
    assert!(text.contains("radii = 1,3"), "{text}");
    assert!(text.contains("weighting = uniform"));
    assert!(text.contains("p_max = 40"));
    let o = genuslab(dir.path(), &["--config", cfg, "equid", "[[1,0],[0,1]]"]);
    assert_eq!(stdout(&o).lines().count(), 3);
    std::fs::write(dir.path().join("bad.conf"), "colour = red\n").unwrap();
    let o = genuslab(dir.path(), &["--config", dir.path().join("bad.conf").to_str().unwrap(), "config", "show"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_directory_flags_partial_failures() {
    let dir = tempfile::tempdir().unwrap();
    let forms = dir.path().join("forms");
    std::fs::create_dir(&forms).unwrap();
    std::fs::write(forms.join("a.txt"), "[[1,0,0],[0,1,0],[0,0,7]]").unwrap();
    std::fs::write(forms.join("b.txt"), "[[2,1],[1,2]]").unwrap();
    std::fs::write(forms.join("c.txt"), "[[1,0],[0,1]]").unwrap();
    let o = genuslab(dir.path(), &["scan", forms.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("c.txt,"));
    assert!(rows[1].starts_with("b.txt,") && rows[1].ends_with("spin_genus:3"), "{}", rows[1]);
    assert!(rows[2].ends_with(",ok"));
    assert!(stderr(&o).contains("1 of 3 rows did not complete"));
}

#[test]
fn equid_json_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let o = genuslab(dir.path(), &["equid", "[[1,0,0],[0,1,0],[0,0,10]]", "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["class_count"], 2);
    assert_eq!(stdout(&o).lines().next(), Some("R,empirical,expected,discrepancy"));
    assert_eq!(stdout(&o).lines().count(), 1 + v["radii"].as_array().unwrap().len());
}

#[test]
fn identity_file_summary_and_budget_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("i3.txt");
    std::fs::write(&file, "3\n1 0 0\n0 1 0\n0 0 1\n").unwrap();
    let o = genuslab(dir.path(), &["genus", file.to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().next(), Some("classes=1 mass=1/48 closed"));
    let o = genuslab(dir.path(), &["--class-budget", "1", "genus", "[[1,0,0],[0,1,0],[0,0,16]]"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).lines().next().unwrap().ends_with("budget_exhausted"));
}

#[test]
fn warm_cache_scan_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cold = genuslab(dir.path(), &["scan", "diag(1,1,k):1..10"]);
    let warm = genuslab(dir.path(), &["scan", "diag(1,1,k):1..10"]);
    assert_eq!(cold.status.code(), Some(0));
    assert_eq!(stdout(&cold), stdout(&warm));
    assert!(stderr(&cold).contains("cache hits=0 misses=10"), "{}", stderr(&cold));
    assert!(stderr(&warm).contains("cache hits=10 misses=0"), "{}", stderr(&warm));
    let text = stdout(&cold);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "disc").unwrap();
    let discs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| {
            let after_form = l.rsplit_once('"').unwrap().1;
            after_form.split(',').nth(col - 1).unwrap().parse().unwrap()
        })
        .collect();
    assert_eq!(discs.len(), 10);
    assert!(discs.windows(2).all(|w| w[0] < w[1]), "{discs:?}");
}
