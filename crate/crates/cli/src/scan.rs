//! Families of forms for batch scans and the scan table.

use std::path::Path;

use genuslab_core::equid::{format_sig17, linear_fit, pearson, power_fit_seeded, EquidReport, RateFit};
use genuslab_core::QuadraticForm;
use serde::Serialize;

use crate::CliError;

/// Parameter values of a family: `lo..hi` or `geom(lo,hi,ratio)`.
fn parse_range(spec: &str) -> Result<Vec<i64>, CliError> {
    let bad = || CliError::input(format!("bad family range `{spec}`"));
    if let Some(inner) = spec.strip_prefix("geom(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [lo, hi, ratio] = parts[..] else { return Err(bad()) };
        let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
        let ratio: f64 = ratio.parse().map_err(|_| bad())?;
        if !(lo >= 1.0 && ratio > 1.0) {
            return Err(bad());
        }
        let mut out: Vec<i64> = Vec::new();
        let mut x = lo;
        while x.round() <= hi {
            let k = x.round() as i64;
            if out.last() != Some(&k) {
                out.push(k);
            }
            x *= ratio;
        }
        return Ok(out);
    }
    let (lo, hi) = spec.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo..=hi).collect())
}

/// Gram template with the parameter `k`: `diag(1,1,k)` or a nested-array
/// matrix such as `[[2,1,0],[1,2,0],[0,0,k]]`.
fn instantiate(template: &str, k: i64) -> Result<QuadraticForm, CliError> {
    let t = template.trim();
    let entry = |tok: &str| -> Result<i64, CliError> {
        let tok = tok.trim();
        if tok == "k" {
            return Ok(k);
        }
        if let Some(c) = tok.strip_suffix("k").or_else(|| tok.strip_suffix("*k")) {
            let c: i64 = c.trim_end_matches('*').parse().map_err(|_| CliError::input(format!("bad entry `{tok}`")))?;
            return Ok(c * k);
        }
        tok.parse().map_err(|_| CliError::input(format!("bad entry `{tok}`")))
    };
    if let Some(inner) = t.strip_prefix("diag(").and_then(|s| s.strip_suffix(')')) {
        let d: Vec<i64> = inner.split(',').map(entry).collect::<Result<_, _>>()?;
        return QuadraticForm::diagonal(&d).map_err(CliError::from);
    }
    if t.starts_with("[[") {
        let rows: Vec<Vec<i64>> = t
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split("],[")
            .map(|row| row.split(',').map(entry).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        return QuadraticForm::new(rows).map_err(CliError::from);
    }
    Err(CliError::input(format!("unknown family template `{template}`")))
}

/// Forms of a family spec `template:range`, or every file of a directory.
pub fn family_forms(spec: &str) -> Result<Vec<(String, QuadraticForm)>, CliError> {
    let path = Path::new(spec);
    let forms = if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| CliError::input(format!("cannot read {spec}: {e}")))?
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display())))?;
                let q = QuadraticForm::parse(&text)
                    .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
                Ok((p.file_name().unwrap_or_default().to_string_lossy().into_owned(), q))
            })
            .collect::<Result<Vec<_>, CliError>>()?
    } else {
        let (template, range) = spec
            .rsplit_once(':')
            .ok_or_else(|| CliError::input(format!("family `{spec}` is neither a directory nor `template:range`")))?;
        parse_range(range)?
            .into_iter()
            .map(|k| Ok((format!("k={k}"), instantiate(template, k)?)))
            .collect::<Result<Vec<_>, CliError>>()?
    };
    if forms.is_empty() {
        return Err(CliError::input(format!("family `{spec}` is empty")));
    }
    Ok(forms)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub label: String,
    pub form: String,
    pub det: String,
    pub classes: Option<usize>,
    pub spinor_genera: Option<usize>,
    pub mass: Option<String>,
    pub disc: Option<f64>,
    pub log2_disc: Option<f64>,
    pub good_prime: Option<u64>,
    pub good_place_ratio: Option<f64>,
    pub sup_discrepancy: Option<f64>,
    pub status: String,
    #[serde(skip)]
    pub report: Option<EquidReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanFits {
    /// `log |genus|` against `log disc` over rows with at least two classes.
    pub genus_vs_disc: Option<RateFit>,
    pub genus_disc_pearson: Option<f64>,
    /// `log sup_discrepancy` against `log |genus|`.
    pub discrepancy_vs_genus: Option<RateFit>,
    pub max_good_place_ratio: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub family: String,
    pub rows: Vec<ScanRow>,
    pub fits: ScanFits,
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

impl ScanResult {
    pub const CSV_HEADER: &'static str =
        "label,form,det,classes,spinor_genera,mass,disc,log2_disc,good_prime,good_place_ratio,sup_discrepancy,status";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!(
                "{},\"{}\",{},{},{},{},{},{},{},{},{},{}\n",
                r.label,
                r.form,
                r.det,
                opt(r.classes, |x| x.to_string()),
                opt(r.spinor_genera, |x| x.to_string()),
                opt(r.mass.clone(), |x| x),
                opt(r.disc, format_sig17),
                opt(r.log2_disc, format_sig17),
                opt(r.good_prime, |x| x.to_string()),
                opt(r.good_place_ratio, format_sig17),
                opt(r.sup_discrepancy, format_sig17),
                r.status
            ));
        }
        out
    }
}

pub fn fit_rows(rows: &[ScanRow], seed: u64) -> ScanFits {
    let mut notes = Vec::new();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| match (r.classes, r.log2_disc) {
            (Some(c), Some(l)) if c >= 2 => Some((l * std::f64::consts::LN_2, (c as f64).ln())),
            _ => None,
        })
        .collect();
    let (genus_vs_disc, genus_disc_pearson) = if pts.len() >= 3 {
        match linear_fit(pts.clone(), seed) {
            Ok(f) => (Some(f), Some(pearson(&pts))),
            Err(e) => {
                notes.push(format!("genus_vs_disc: {e}"));
                (None, None)
            }
        }
    } else {
        notes.push("genus_vs_disc: fewer than 3 rows with at least two classes".into());
        (None, None)
    };
    // one report per class count, the first in row order
    let mut reports: Vec<EquidReport> = Vec::new();
    for r in rows.iter().filter_map(|r| r.report.as_ref()) {
        if !reports.iter().any(|x| x.class_count == r.class_count) {
            reports.push(r.clone());
        }
    }
    reports.sort_by_key(|r| r.class_count);
    let discrepancy_vs_genus = match power_fit_seeded(&reports, seed) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("discrepancy_vs_genus: {e}"));
            None
        }
    };
    let max_good_place_ratio = rows.iter().filter_map(|r| r.good_place_ratio).reduce(f64::max);
    ScanFits { genus_vs_disc, genus_disc_pearson, discrepancy_vs_genus, max_good_place_ratio, notes }
}
