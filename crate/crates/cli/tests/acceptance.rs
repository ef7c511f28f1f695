//! Acceptance criteria. Each test prints one PASS/FAIL line.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use genuslab_core::equid::linear_fit;
use genuslab_core::genus::p_neighbors;
use genuslab_core::oracle::reduced_forms;
use genuslab_core::{
    completeness_check, disc_homogeneous, genus_enumerate, genus_mass, good_place, killing_unit_check,
    same_genus, spin_genus_partition, GenusEnumeration, GenusPolicy, MassWeighting, QuadraticForm, Unimodular,
};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const GENUS_CLOSURE_LIMIT: Duration = Duration::from_secs(10);
const COMPLETENESS_LIMIT: Duration = Duration::from_secs(600);
const EQUID_TREND_LIMIT: Duration = Duration::from_secs(1800);
const GOOD_PLACE_CEILING: f64 = 25.0;
/// Largest ratio observed on the scan family when first run, with headroom.
const GOOD_PLACE_REGRESSION: f64 = 0.25;
const MIN_PEARSON: f64 = 0.85;
const SCAN_FAMILY: &str = "diag(1,1,k):geom(2,100000,1.35)";
const COMPLETENESS_DETS: [i64; 15] = [1, 3, 5, 7, 11, 15, 16, 21, 27, 32, 45, 55, 63, 64, 81];

fn report(id: u32, name: &str, outcome: Result<String, String>) {
    let mut stdout = std::io::stdout();
    match outcome {
        Ok(detail) => {
            let _ = writeln!(stdout, "criterion {id:>2} {name}: PASS ({detail})");
        }
        Err(detail) => {
            let _ = writeln!(stdout, "criterion {id:>2} {name}: FAIL ({detail})");
            panic!("criterion {id} failed: {detail}");
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_form(rng: &mut ChaCha8Rng, n: usize) -> QuadraticForm {
    loop {
        let mut g = vec![0i64; n * n];
        for i in 0..n {
            g[i * n + i] = rng.gen_range(1..=9);
            for j in 0..i {
                let v = rng.gen_range(-2..=2);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        if let Ok(q) = QuadraticForm::from_flat(n, g) {
            return q;
        }
    }
}

fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> Unimodular {
    let mut m: Vec<i64> = (0..n * n).map(|k| i64::from(k / n == k % n)).collect();
    for _ in 0..8 {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let c = if rng.gen_bool(0.5) { 1 } else { -1 };
        for r in 0..n {
            m[r * n + j] += c * m[r * n + i];
        }
    }
    Unimodular::new(n, m).expect("elementary products are unimodular")
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

#[test]
fn criterion_01_genus_closure() {
    let outcome = (|| {
        let mut slowest = Duration::ZERO;
        for n in 2..=6 {
            let q = QuadraticForm::identity(n).unwrap();
            let start = Instant::now();
            let g = genus_enumerate(&q, &GenusPolicy::default()).map_err(|e| format!("n={n}: {e}"))?;
            let took = start.elapsed();
            slowest = slowest.max(took);
            let oracle = reduced_forms(n, 1).map_err(|e| e.to_string())?;
            check(g.len() == 1 && oracle.len() == 1, || format!("n={n}: {} classes, oracle {}", g.len(), oracle.len()))?;
            check(took < GENUS_CLOSURE_LIMIT, || format!("n={n} took {took:?}"))?;
        }
        Ok(format!("I_2..I_6 one class each, slowest {slowest:.2?}"))
    })();
    report(1, "genus closure", outcome);
}

fn ternary_genera(det: i64) -> Vec<QuadraticForm> {
    let mut reps: Vec<QuadraticForm> = Vec::new();
    for q in reduced_forms(3, det).unwrap() {
        if !reps.iter().any(|r| same_genus(r, &q)) {
            reps.push(q);
        }
    }
    reps
}

fn completeness_genera() -> &'static Vec<GenusEnumeration> {
    static GENERA: OnceLock<Vec<GenusEnumeration>> = OnceLock::new();
    GENERA.get_or_init(|| {
        COMPLETENESS_DETS
            .iter()
            .flat_map(|&d| ternary_genera(d))
            .map(|q| genus_enumerate(&q, &GenusPolicy::default()).expect("genus closes"))
            .collect()
    })
}

#[test]
fn criterion_02_oracle_completeness() {
    let start = Instant::now();
    let outcome = (|| {
        let genera = completeness_genera();
        for g in genera {
            let r = completeness_check(g).map_err(|e| e.to_string())?;
            check(r.matches, || format!("det {}: missing {:?}, extra {:?}", g.seed.det(), r.missing, r.extra))?;
        }
        let took = start.elapsed();
        check(took < COMPLETENESS_LIMIT, || format!("took {took:?}"))?;
        Ok(format!("{} genera over {} determinants, {took:.2?}", genera.len(), COMPLETENESS_DETS.len()))
    })();
    report(2, "oracle completeness", outcome);
}

#[test]
fn criterion_03_neighbor_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases = 0;
    let mut neighbours = 0;
    let mut failures = Vec::new();
    while cases < 200 {
        let n = rng.gen_range(2..=4);
        let q = random_form(&mut rng, n);
        let p = [3u64, 5, 7][rng.gen_range(0..3)];
        if q.det() % (2 * p) == 0.into() || q.det() % p == 0.into() {
            continue;
        }
        cases += 1;
        match p_neighbors(&q, p) {
            Ok(nbs) => {
                for nb in nbs {
                    neighbours += 1;
                    if nb.det() != q.det() || !same_genus(&nb, &q) {
                        failures.push(format!("{q} at {p} gave {nb}"));
                    }
                }
            }
            Err(e) => failures.push(format!("{q} at {p}: {e}")),
        }
    }
    let outcome = if failures.is_empty() {
        Ok(format!("{cases} cases, {neighbours} neighbours"))
    } else {
        Err(format!("{} failures, first {}", failures.len(), failures[0]))
    };
    report(3, "neighbour invariants", outcome);
}

#[test]
fn criterion_04_mass_identities() {
    let outcome = (|| {
        let mut split = 0;
        for g in completeness_genera() {
            let m = genus_mass(g, MassWeighting::PerSpinor).map_err(|e| format!("det {}: {e}", g.seed.det()))?;
            let sum: BigRational = m.per_spinor.iter().map(|(_, v)| v.clone()).sum();
            check(sum == m.total, || format!("det {}: {sum} != {}", g.seed.det(), m.total))?;
            if spin_genus_partition(g).map_err(|e| e.to_string())?.spinor_genus_count() > 1 {
                split += 1;
            }
        }
        let mass = |n| genus_mass(&genus_enumerate(&QuadraticForm::identity(n).unwrap(), &GenusPolicy::default()).unwrap(), MassWeighting::Full).unwrap().total;
        check(mass(2) == ratio(1, 8), || format!("mass(I_2) = {}", mass(2)))?;
        check(mass(3) == ratio(1, 48), || format!("mass(I_3) = {}", mass(3)))?;
        Ok(format!("{} genera ({split} split), mass(I_2)=1/8, mass(I_3)=1/48", completeness_genera().len()))
    })();
    report(4, "mass identities", outcome);
}

#[test]
fn criterion_05_disc_fixtures_and_invariance() {
    let outcome = (|| {
        let norm = |q: &QuadraticForm| disc_homogeneous(q).map(|d| d.norm_sq).map_err(|e| e.to_string());
        check(norm(&QuadraticForm::identity(2).unwrap())? == ratio(2, 1), || "norm_sq(I_2) != 2".into())?;
        check(norm(&QuadraticForm::identity(3).unwrap())? == ratio(8, 1), || "norm_sq(I_3) != 8".into())?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(2..=4);
            let q = random_form(&mut rng, n);
            let u = random_unimodular(&mut rng, n);
            let (a, b) = (norm(&q)?, norm(&q.transform(&u))?);
            check(a == b, || format!("{q}: {a} != {b}"))?;
        }
        Ok("norm_sq(I_2)=2, norm_sq(I_3)=8, 100 equivalences".into())
    })();
    report(5, "disc fixtures and invariance", outcome);
}

#[test]
fn criterion_06_killing_unit_check() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let n = rng.gen_range(2..=4);
            let q = random_form(&mut rng, n);
            let p = good_place(&q, 3).map_err(|e| e.to_string())?.prime;
            check(killing_unit_check(&q, p).map_err(|e| e.to_string())?, || format!("{q} at good prime {p}"))?;
        }
        let control = QuadraticForm::diagonal(&[1, 1, 9]).unwrap();
        let negative = killing_unit_check(&control, 3).map_err(|e| e.to_string())?;
        check(!negative, || "negative control diag(1,1,9) at 3 was not flagged".into())?;
        Ok("100 forms true at the good prime, diag(1,1,9) at 3 false".into())
    })();
    report(6, "killing unit check", outcome);
}

struct ScanOutput {
    csv: String,
    fits: Value,
    took: Duration,
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = genuslab_cli::run(std::iter::once("genuslab").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn family_scan() -> &'static ScanOutput {
    static SCAN: OnceLock<ScanOutput> = OnceLock::new();
    SCAN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let fits = dir.path().join("fits.json");
        let start = Instant::now();
        let (code, csv, err) = run_cli(&["--no-cache", "scan", SCAN_FAMILY, "--fits", fits.to_str().unwrap()]);
        let took = start.elapsed();
        assert_eq!(code, 0, "scan failed: {err}");
        let fits = serde_json::from_str(&std::fs::read_to_string(fits).unwrap()).unwrap();
        ScanOutput { csv, fits, took }
    })
}

#[test]
fn criterion_07_good_place_bound() {
    let scan = family_scan();
    let outcome = (|| {
        let rows = scan.csv.lines().count() - 1;
        let max_det = scan
            .csv
            .lines()
            .skip(1)
            .filter_map(|l| l.rsplit_once('"').and_then(|(_, rest)| rest.split(',').nth(1)?.parse::<u64>().ok()))
            .max()
            .unwrap_or(0);
        let max_ratio = scan.fits["max_good_place_ratio"].as_f64().ok_or("no ratio")?;
        check(rows >= 30, || format!("only {rows} forms"))?;
        check(max_det >= 90_000, || format!("largest det {max_det}"))?;
        check(max_ratio <= GOOD_PLACE_CEILING, || format!("ratio {max_ratio} above {GOOD_PLACE_CEILING}"))?;
        check(max_ratio <= GOOD_PLACE_REGRESSION, || format!("ratio {max_ratio} above regression bound {GOOD_PLACE_REGRESSION}"))?;
        Ok(format!("{rows} forms, det up to {max_det}, max ratio {max_ratio:.4}"))
    })();
    report(7, "good-place bound", outcome);
}

#[test]
fn criterion_08_genus_disc_correlation() {
    let scan = family_scan();
    let outcome = (|| {
        let fit = &scan.fits["genus_vs_disc"];
        let points = fit["points"].as_array().ok_or("no genus_vs_disc fit")?.len();
        let r = scan.fits["genus_disc_pearson"].as_f64().ok_or("no correlation")?;
        let slope = fit["slope"].as_f64().ok_or("no slope")?;
        check(points >= 20, || format!("only {points} forms with |genus| >= 2"))?;
        check(r >= MIN_PEARSON, || format!("pearson {r}"))?;
        check(slope > 0.0, || format!("slope {slope}"))?;
        Ok(format!("{points} forms, pearson {r:.3}, slope {slope:.3}"))
    })();
    report(8, "genus-disc correlation", outcome);
}

#[test]
fn criterion_09_equidistribution_trend() {
    let scan = family_scan();
    let outcome = (|| {
        let fit = &scan.fits["discrepancy_vs_genus"];
        let points: Vec<(f64, f64)> = serde_json::from_value(fit["points"].clone()).map_err(|e| e.to_string())?;
        let slope = fit["slope"].as_f64().ok_or("no slope")?;
        let (lo, hi): (f64, f64) = serde_json::from_value(fit["slope_ci"].clone()).map_err(|e| e.to_string())?;
        let seed = fit["seed"].as_u64().ok_or("no seed")?;
        check(points.len() >= 8, || format!("only {} genera", points.len()))?;
        check(points.windows(2).all(|w| w[0].0 < w[1].0), || "class counts not strictly increasing".into())?;
        check(slope < 0.0 && hi < 0.0, || format!("slope {slope}, interval ({lo}, {hi})"))?;
        let a = linear_fit(points.clone(), seed).map_err(|e| e.to_string())?;
        let b = linear_fit(points, seed).map_err(|e| e.to_string())?;
        check(a == b && a.slope_ci.1.to_bits() == hi.to_bits(), || "refit is not bit-identical".into())?;
        check(scan.took < EQUID_TREND_LIMIT, || format!("scan took {:?}", scan.took))?;
        Ok(format!(
            "{} genera, slope {slope:.3}, 95% interval ({lo:.3}, {hi:.3}), scan {:.1?}",
            a.points.len(),
            scan.took
        ))
    })();
    report(9, "equidistribution trend", outcome);
}

#[test]
fn criterion_10_determinism() {
    let outcome = (|| {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache");
        let cache = cache.to_str().unwrap();
        let form = "[[1,0,0],[0,1,0],[0,0,210]]";
        let equid = |extra: &[&str]| {
            let mut args = vec!["--no-cache", "equid", form, "--radii", "1,2,4"];
            args.extend_from_slice(extra);
            run_cli(&args)
        };
        let (c1, a, _) = equid(&[]);
        let (c2, b, _) = equid(&["--workers", "1"]);
        check(c1 == 0 && c2 == 0, || format!("equid exit codes {c1}, {c2}"))?;
        check(a == b, || "equid CSV differs between runs".into())?;
        let scan = |extra: &[&str]| {
            let mut args = vec!["--cache-dir", cache, "scan", "diag(1,1,k):1..40"];
            args.extend_from_slice(extra);
            run_cli(&args)
        };
        let (c1, a, _) = scan(&[]);
        let (c2, b, _) = scan(&["--workers", "1"]);
        let (c3, c, _) = run_cli(&["--no-cache", "scan", "diag(1,1,k):1..40"]);
        check(c1 == 0 && c2 == 0 && c3 == 0, || format!("scan exit codes {c1}, {c2}, {c3}"))?;
        check(a == b && b == c, || "scan CSV differs between runs".into())?;
        Ok(format!("equid and scan CSV byte-identical ({} scan bytes)", a.len()))
    })();
    report(10, "determinism", outcome);
}
