//! Genus-averaged lattice point counts in balls against the Haar mean,
//! and power-law fits of the discrepancy.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::QuadraticForm;
use crate::enumerate::norm_counts;
use crate::genus::GenusEnumeration;

/// Default cap on the number of lattice points counted for one form.
pub const DEFAULT_COUNT_CAP: u64 = 20_000_000;

/// `A / det(A)^{1/n}` together with the integral form it comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitDetForm {
    pub n: usize,
    /// Row-major entries of the scaled matrix.
    pub matrix: Vec<f64>,
    pub provenance: QuadraticForm,
}

pub fn normalize_unit_det(q: &QuadraticForm) -> UnitDetForm {
    let n = q.dim();
    let det = q.det().to_f64().expect("finite determinant");
    let scale = det.powf(-1.0 / n as f64);
    UnitDetForm { n, matrix: q.gram().iter().map(|&x| x as f64 * scale).collect(), provenance: q.clone() }
}

impl UnitDetForm {
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.matrix.clone();
        let mut det = 1.0;
        for k in 0..n {
            let piv = a[k * n + k];
            det *= piv;
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        det
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Largest integer `m ≥ 0` with `m^n ≤ R^{2n}·det`, i.e. the largest value
/// of the integral form inside the ball of radius `R` of the scaled form.
pub fn norm_threshold(q: &QuadraticForm, radius: f64) -> i64 {
    let n = q.dim() as u32;
    let r2 = exact(radius) * exact(radius);
    let target = num_traits::pow(r2, n as usize) * BigRational::from_integer(q.det().clone());
    let floor = target.to_integer();
    let mut m = floor.nth_root(n);
    while BigRational::from_integer(num_traits::pow(&m + 1, n as usize)) <= target {
        m += 1;
    }
    while BigRational::from_integer(num_traits::pow(m.clone(), n as usize)) > target {
        m -= 1;
    }
    m.to_i64().expect("threshold fits in i64")
}

/// `#{x ∈ Zⁿ∖0 : xᵀÂx ≤ R²}` with an explicit point cap.
pub fn siegel_count_capped(f: &UnitDetForm, radius: f64, cap: u64) -> Result<u64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let m = norm_threshold(&f.provenance, radius);
    let counts = norm_counts(&f.provenance, m, cap).ok_or(Error::RadiusTooLarge(cap))?;
    Ok(counts.iter().sum())
}

pub fn siegel_count(f: &UnitDetForm, radius: f64) -> Result<u64> {
    siegel_count_capped(f, radius, DEFAULT_COUNT_CAP)
}

/// Volume of the n-ball of radius R, `π^{n/2} Rⁿ / Γ(n/2 + 1)`.
pub fn ball_volume(n: usize, radius: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let gamma = if n % 2 == 0 {
        (1..=n / 2).map(|k| k as f64).product::<f64>()
    } else {
        // Γ(k + 3/2) = (k + 1/2)(k − 1/2)···(1/2)·√π with k = (n − 1)/2
        (0..=(n - 1) / 2).map(|k| k as f64 + 0.5).product::<f64>() * pi.sqrt()
    };
    pi.powf(n as f64 / 2.0) * radius.powi(n as i32) / gamma
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    /// Weights proportional to `1/|Aut|`.
    Mass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidReport {
    pub genus_id: String,
    pub weighting: Weighting,
    pub radii: Vec<f64>,
    pub empirical: Vec<f64>,
    pub expected: Vec<f64>,
    pub discrepancy: Vec<f64>,
    pub sup_discrepancy: f64,
    pub class_count: usize,
}

/// Formats a double with 17 significant digits in positional notation.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.16}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

impl EquidReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,empirical,expected,discrepancy\n");
        for i in 0..self.radii.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_sig17(self.radii[i]),
                format_sig17(self.empirical[i]),
                format_sig17(self.expected[i]),
                format_sig17(self.discrepancy[i])
            ));
        }
        out
    }
}

/// Weighted mean over the genus of the ball counts against the ball volume.
/// The mean is formed exactly, so it does not depend on the order of the
/// classes or on the representatives chosen.
pub fn equid_experiment(g: &GenusEnumeration, radii: &[f64], weighting: Weighting) -> Result<EquidReport> {
    equid_experiment_capped(g, radii, weighting, DEFAULT_COUNT_CAP)
}

pub fn equid_experiment_capped(
    g: &GenusEnumeration,
    radii: &[f64],
    weighting: Weighting,
    cap: u64,
) -> Result<EquidReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be nonempty and positive".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("radii must be strictly ascending".into()));
    }
    let n = g.seed.dim();
    let thresholds: Vec<i64> = radii.iter().map(|&r| norm_threshold(&g.seed, r)).collect();
    let top = *thresholds.last().expect("nonempty");
    let per_class: Vec<Vec<u64>> = g
        .classes
        .par_iter()
        .map(|q| {
            let counts = norm_counts(q, top, cap).ok_or(Error::RadiusTooLarge(cap))?;
            let mut prefix = Vec::with_capacity(counts.len());
            let mut acc = 0u64;
            for c in counts {
                acc += c;
                prefix.push(acc);
            }
            Ok(thresholds.iter().map(|&m| prefix[m as usize]).collect())
        })
        .collect::<Result<_>>()?;
    let weights: Vec<BigRational> = match weighting {
        Weighting::Uniform => g.classes.iter().map(|_| BigRational::one()).collect(),
        Weighting::Mass => g.aut_orders.iter().map(|&a| BigRational::new(BigInt::one(), BigInt::from(a))).collect(),
    };
    let total: BigRational = weights.iter().sum();
    let mut empirical = Vec::with_capacity(radii.len());
    let mut expected = Vec::with_capacity(radii.len());
    let mut discrepancy = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        let mut acc = BigRational::zero();
        for (w, counts) in weights.iter().zip(&per_class) {
            acc += w * BigInt::from(counts[k]);
        }
        let mean = (acc / &total).to_f64().expect("finite mean");
        let vol = ball_volume(n, r);
        empirical.push(mean);
        expected.push(vol);
        discrepancy.push((mean - vol).abs() / vol);
    }
    let sup_discrepancy = discrepancy.iter().cloned().fold(0.0, f64::max);
    Ok(EquidReport {
        genus_id: g.classes[g.seed_index].to_text().replace('\n', ";"),
        weighting,
        radii: radii.to_vec(),
        empirical,
        expected,
        discrepancy,
        sup_discrepancy,
        class_count: g.classes.len(),
    })
}

pub const DEFAULT_FIT_SEED: u64 = 0x5eed;
pub const BOOTSTRAP_RESAMPLES: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Percentile bootstrap 95% interval for the slope.
    pub slope_ci: (f64, f64),
    pub seed: u64,
}

impl RateFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for &(x, y) in &self.points {
            out.push_str(&format!("{},{}\n", format_sig17(x), format_sig17(y)));
        }
        out
    }
}

fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Some((slope, my - slope * mx, r2))
}

/// Least-squares line through `points` with a seeded bootstrap interval.
pub fn linear_fit(points: Vec<(f64, f64)>, seed: u64) -> Result<RateFit> {
    let (slope, intercept, r_squared) = least_squares(&points)
        .ok_or_else(|| Error::InsufficientData("all x values coincide".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut sample = Vec::with_capacity(points.len());
    while slopes.len() < BOOTSTRAP_RESAMPLES {
        sample.clear();
        sample.extend((0..points.len()).map(|_| points[rng.gen_range(0..points.len())]));
        if let Some((s, _, _)) = least_squares(&sample) {
            slopes.push(s);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let q = |f: f64| slopes[((slopes.len() - 1) as f64 * f).round() as usize];
    Ok(RateFit { points, slope, intercept, r_squared, slope_ci: (q(0.025), q(0.975)), seed })
}

/// Fit of `log sup_discrepancy` against `log class_count`.
pub fn power_fit(reports: &[EquidReport]) -> Result<RateFit> {
    power_fit_seeded(reports, DEFAULT_FIT_SEED)
}

pub fn power_fit_seeded(reports: &[EquidReport], seed: u64) -> Result<RateFit> {
    let points: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.class_count >= 2 && r.sup_discrepancy > 0.0)
        .map(|r| ((r.class_count as f64).ln(), r.sup_discrepancy.ln()))
        .collect();
    let mut distinct: Vec<usize> = reports.iter().filter(|r| r.class_count >= 2).map(|r| r.class_count).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if points.len() < 5 || distinct.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "need at least 5 reports with distinct class counts ≥ 2, got {} usable and {} distinct",
            points.len(),
            distinct.len()
        )));
    }
    linear_fit(points, seed)
}

/// Pearson correlation coefficient.
pub fn pearson(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}
