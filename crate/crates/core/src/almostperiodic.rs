//! Exponential sums, bump smoothing of pure-point spectra, and ε-almost
//! period search.
//!
//! Sup norms are taken over a finite probe grid, which can only
//! under-estimate the true sup. Each reported period therefore also carries
//! the certified bound `Σ |a_n| |exp(2πi s_n τ) - 1|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::comb::{CombDistribution, Truncation, WindowedDistribution};
use crate::error::{Error, Result};
use crate::fourier::distribution_ft;
use crate::quadrature::CompositeRule;
use crate::scalar::TAU_EQ;
use crate::schwartz::TestFunction;

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `g(t) = Σ_n a_n exp(2πi<t, s_n>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSum {
    dim: usize,
    terms: Vec<(Complex64, Vec<f64>)>,
}

impl ExponentialSum {
    /// Merges equal frequencies (relative `TAU_EQ`) and drops zero terms.
    pub fn new(dim: usize, terms: Vec<(Complex64, Vec<f64>)>) -> Result<ExponentialSum> {
        for (_, s) in &terms {
            crate::error::check_dim(dim, s.len())?;
        }
        let mut terms = terms;
        terms.sort_by(|a, b| {
            a.1.iter().zip(&b.1).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        let close = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).all(|(x, y)| (x - y).abs() <= TAU_EQ * x.abs().max(y.abs()).max(1.0))
        };
        let mut merged: Vec<(Complex64, Vec<f64>)> = Vec::with_capacity(terms.len());
        for (a, s) in terms {
            match merged.last_mut() {
                Some(last) if close(&last.1, &s) => last.0 += a,
                _ => merged.push((a, s)),
            }
        }
        merged.retain(|(a, _)| *a != Complex64::new(0.0, 0.0));
        Ok(ExponentialSum { dim, terms: merged })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Complex64, Vec<f64>)] {
        &self.terms
    }

    /// `Σ |a_n|`, an upper bound for `|g|`.
    pub fn abs_sum(&self) -> f64 {
        self.terms.iter().map(|(a, _)| a.norm()).sum()
    }

    pub fn eval(&self, t: &[f64]) -> Result<Complex64> {
        crate::error::check_dim(self.dim, t.len())?;
        Ok(self.terms.iter().map(|(a, s)| a * cis(dot(t, s))).sum())
    }

    /// `h(t) = g(x0 + t·x)` as a one-dimensional sum.
    pub fn restrict_to_ray(&self, origin: &[f64], direction: &[f64]) -> Result<ExponentialSum> {
        crate::error::check_dim(self.dim, origin.len())?;
        crate::error::check_dim(self.dim, direction.len())?;
        ExponentialSum::new(
            1,
            self.terms.iter().map(|(a, s)| (a * cis(dot(origin, s)), vec![dot(direction, s)])).collect(),
        )
    }
}

/// `φ(x) = exp(1 - 1/(1 - |x/η|²))` on `|x| < η`, with `φ̌` tabulated on
/// `[0, max_frequency]` (it is radial) for cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct BumpFunction {
    eta: f64,
    dim: usize,
    max_frequency: f64,
    spacing: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    error_bound: f64,
}

const BUMP_PANELS_PER_UNIT: f64 = 40.0;
const BUMP_ORDER: usize = 16;

impl BumpFunction {
    /// Supported for `d ∈ {1, 2}`.
    pub fn new(eta: f64, dim: usize, max_frequency: f64) -> Result<BumpFunction> {
        if !(eta > 0.0) || !(max_frequency >= 0.0) || !max_frequency.is_finite() {
            return Err(Error::InvalidArgument("bump needs eta > 0 and a finite frequency range".into()));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!("bump transform tabulated for d <= 2, got d={dim}")));
        }
        let spacing = match dim {
            1 => 0.01,
            _ => 0.02,
        };
        let nodes = (max_frequency / spacing).ceil() as usize + 1;
        let fine = radial_rule(eta, max_frequency, 2.0);
        let coarse = radial_rule(eta, max_frequency, 1.0);
        let table: Vec<(f64, f64, f64)> = (0..nodes)
            .into_par_iter()
            .map(|i| {
                let xi = i as f64 * spacing;
                let (v, s) = bump_transform(eta, dim, &fine, xi);
                let (vc, _) = bump_transform(eta, dim, &coarse, xi);
                (v, s, (v - vc).abs())
            })
            .collect();
        let quadrature_error = table.iter().map(|t| t.2).fold(0.0, f64::max);
        // |φ̌''''| <= (2πη)^4 ‖φ‖_1 and cubic Hermite error is h^4/384 · max|f''''|
        let l1 = bump_transform(eta, dim, &fine, 0.0).0;
        let interpolation_error = spacing.powi(4) / 384.0 * (2.0 * PI * eta).powi(4) * l1;
        Ok(BumpFunction {
            eta,
            dim,
            max_frequency,
            spacing,
            values: table.iter().map(|t| t.0).collect(),
            slopes: table.iter().map(|t| t.1).collect(),
            error_bound: interpolation_error + quadrature_error,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    /// Bound on `|φ̌_table - φ̌|` over the tabulated range.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2 = x.iter().map(|v| v * v).sum::<f64>() / (self.eta * self.eta);
        bump_profile(r2)
    }

    /// `φ̌(ξ) = ∫ φ(x) exp(2πi<x,ξ>) dx`, real because `φ` is even.
    pub fn inverse_transform(&self, xi: &[f64]) -> Result<f64> {
        crate::error::check_dim(self.dim, xi.len())?;
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > self.max_frequency * (1.0 + 1e-12) {
            return Err(Error::FrequencyOutOfRange { frequency: r, max: self.max_frequency });
        }
        let u = r / self.spacing;
        let i = (u.floor() as usize).min(self.values.len().saturating_sub(2));
        if self.values.len() < 2 {
            return Ok(self.values[0]);
        }
        let t = u - i as f64;
        let h = self.spacing;
        let (t2, t3) = (t * t, t * t * t);
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1])
    }
}

fn bump_profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

fn radial_rule(eta: f64, max_frequency: f64, refine: f64) -> CompositeRule {
    let panels = ((BUMP_PANELS_PER_UNIT + 4.0 * eta * max_frequency) * refine).ceil() as usize;
    CompositeRule::new(0.0, eta, panels, BUMP_ORDER)
}

/// `(φ̌(ξ), dφ̌/dξ)` for the radial profile.
fn bump_transform(eta: f64, dim: usize, rule: &CompositeRule, xi: f64) -> (f64, f64) {
    let profile = |r: f64| bump_profile((r / eta).powi(2));
    match dim {
        1 => {
            let v = rule.integrate(|x| 2.0 * profile(x) * (2.0 * PI * x * xi).cos());
            let s = rule.integrate(|x| -2.0 * profile(x) * 2.0 * PI * x * (2.0 * PI * x * xi).sin());
            (v, s)
        }
        _ => {
            let v = rule.integrate(|r| 2.0 * PI * profile(r) * bessel_j(0, 2.0 * PI * r * xi) * r);
            let s = rule
                .integrate(|r| -2.0 * PI * profile(r) * bessel_j(1, 2.0 * PI * r * xi) * 2.0 * PI * r * r);
            (v, s)
        }
    }
}

/// `J_n(z) = (1/π) ∫_0^π cos(nθ - z sin θ) dθ` by the trapezoid rule, which
/// converges geometrically for this periodic integrand.
fn bessel_j(n: u32, z: f64) -> f64 {
    let m = (z.abs() * 0.6).ceil() as usize + 24;
    let h = PI / m as f64;
    let f = |theta: f64| (f64::from(n) * theta - z * theta.sin()).cos();
    let inner: f64 = (1..m).map(|j| f(j as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// `g_s(t) = Σ_n φ̌(ρ_n) q_n exp(2πi<t, ρ_n>)` for a spectrum
/// `Σ_n q_n δ_{ρ_n}`.
pub fn smooth(spectrum: &WindowedDistribution, bump: &BumpFunction) -> Result<ExponentialSum> {
    if !spectrum.is_measure() {
        return Err(Error::NotAMeasure(spectrum.max_order()));
    }
    let d = spectrum.center.len();
    crate::error::check_dim(bump.dim(), d)?;
    let terms = spectrum
        .points
        .iter()
        .map(|p| {
            let rho = p.point_f64();
            Ok((p.mass() * bump.inverse_transform(&rho)?, rho))
        })
        .collect::<Result<Vec<_>>>()?;
    ExponentialSum::new(d, terms)
}

/// Probe points `start + i·spacing`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeGrid {
    pub start: f64,
    pub spacing: f64,
    pub count: usize,
}

impl ProbeGrid {
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.start + i as f64 * self.spacing)
    }
}

/// Scan `τ = start + k·step` over `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodSearch {
    pub epsilon: f64,
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub probes: ProbeGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlmostPeriod {
    pub tau: f64,
    /// `max_t |g(t+τ) - g(t)|` over the probe grid.
    pub grid_defect: f64,
    /// `Σ |a_n| |exp(2πi s_n τ) - 1|`, a true upper bound on the sup defect.
    pub upper_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlmostPeriodReport {
    pub search: PeriodSearch,
    pub periods: Vec<AlmostPeriod>,
    /// Largest gap between consecutive found periods, the empirical
    /// relative-density radius.
    pub max_gap: Option<f64>,
    /// `end - last period`.
    pub trailing_gap: Option<f64>,
    pub note: &'static str,
}

const GRID_NOTE: &str = "empirical: the sup is taken over the probe grid and can only under-estimate the true sup";

/// Candidates between full grid checks; bounds memory use of the scan.
const CHUNK: usize = 4096;

/// Gram-matrix threshold for the mean-square prefilter.
const MAX_PREFILTER_TERMS: usize = 64;

struct DefectKernel<'a> {
    g: &'a ExponentialSum,
    /// `exp(2πi s_n t_p)` by probe.
    table: Vec<Vec<Complex64>>,
    /// `G_{nm} = mean_p exp(2πi (s_n - s_m) t_p)`.
    gram: Option<Vec<Vec<Complex64>>>,
}

impl<'a> DefectKernel<'a> {
    fn new(g: &'a ExponentialSum, probes: &ProbeGrid) -> DefectKernel<'a> {
        let table: Vec<Vec<Complex64>> =
            probes.points().map(|t| g.terms.iter().map(|(_, s)| cis(t * s[0])).collect()).collect();
        let n = g.terms.len();
        let gram = (n <= MAX_PREFILTER_TERMS).then(|| {
            let count = table.len() as f64;
            (0..n)
                .map(|a| {
                    (0..n).map(|b| table.iter().map(|row| row[a] * row[b].conj()).sum::<Complex64>() / count).collect()
                })
                .collect()
        });
        DefectKernel { g, table, gram }
    }

    fn coefficients(&self, tau: f64) -> Vec<Complex64> {
        self.g.terms.iter().map(|(a, s)| a * (cis(tau * s[0]) - 1.0)).collect()
    }

    /// `Some(grid_defect)` when the candidate can pass, `None` when the
    /// grid mean square already rules it out.
    fn grid_defect(&self, b: &[Complex64], epsilon: f64) -> Option<f64> {
        if let Some(gram) = &self.gram {
            let mean_square: f64 = b
                .iter()
                .enumerate()
                .map(|(i, bi)| (bi * b.iter().zip(&gram[i]).map(|(bj, g)| bj.conj() * g).sum::<Complex64>()).re)
                .sum();
            // grid sup >= grid root mean square
            if mean_square >= epsilon * epsilon * (1.0 + 1e-12) {
                return None;
            }
        }
        Some(
            self.table
                .iter()
                .map(|row| row.iter().zip(b).map(|(e, bi)| e * bi).sum::<Complex64>().norm())
                .fold(0.0, f64::max),
        )
    }
}

/// Every scan point `τ` whose probe-grid defect is below `ε`.
pub fn find_almost_periods(g: &ExponentialSum, search: &PeriodSearch) -> Result<AlmostPeriodReport> {
    if g.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: g.dim() });
    }
    if search.probes.count == 0 {
        return Err(Error::InvalidArgument("empty probe grid".into()));
    }
    if !(search.epsilon > 0.0) || !(search.step > 0.0) || search.end < search.start {
        return Err(Error::InvalidArgument("need epsilon > 0, step > 0 and start <= end".into()));
    }
    let kernel = DefectKernel::new(g, &search.probes);
    let candidates = ((search.end - search.start) / search.step + 1e-9).floor() as usize + 1;
    let mut periods = Vec::new();
    for chunk_start in (0..candidates).step_by(CHUNK) {
        let chunk_end = (chunk_start + CHUNK).min(candidates);
        let found: Vec<AlmostPeriod> = (chunk_start..chunk_end)
            .into_par_iter()
            .filter_map(|k| {
                let tau = search.start + k as f64 * search.step;
                let b = kernel.coefficients(tau);
                let grid_defect = kernel.grid_defect(&b, search.epsilon)?;
                (grid_defect < search.epsilon).then(|| AlmostPeriod {
                    tau,
                    grid_defect,
                    upper_bound: b.iter().map(|x| x.norm()).sum(),
                })
            })
            .collect();
        periods.extend(found);
    }
    let max_gap = periods.windows(2).map(|w| w[1].tau - w[0].tau).reduce(f64::max);
    let trailing_gap = periods.last().map(|p| search.end - p.tau);
    Ok(AlmostPeriodReport { search: *search, periods, max_gap, trailing_gap, note: GRID_NOTE })
}

/// Grid and certified defects of a single shift.
pub fn shift_defect(g: &ExponentialSum, probes: &ProbeGrid, tau: f64) -> Result<AlmostPeriod> {
    if g.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: g.dim() });
    }
    let kernel = DefectKernel { g, table: DefectKernel::new(g, probes).table, gram: None };
    let b = kernel.coefficients(tau);
    Ok(AlmostPeriod {
        tau,
        grid_defect: kernel.grid_defect(&b, f64::INFINITY).expect("no prefilter"),
        upper_bound: b.iter().map(|x| x.norm()).sum(),
    })
}

/// Search direction for `d > 1`: `t ↦ origin + t·direction`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ray {
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApDistributionReport {
    pub spectrum_radius: f64,
    /// Bound on the sup-norm contribution of the omitted spectrum.
    pub tail_bound: f64,
    pub terms: usize,
    pub report: AlmostPeriodReport,
}

/// Almost periods of `t ↦ <f(x), φ(t - x)> = Σ_n a_n φ̂(γ_n) exp(2πi<γ_n,t>)`
/// where `f̂ = Σ a_n δ_{γ_n}`, truncated where the tail of the spectrum
/// against `φ̂` is certified below `tolerance`.
pub fn check_ap_distribution(
    f: &CombDistribution,
    phi: &TestFunction,
    tolerance: f64,
    search: &PeriodSearch,
    ray: Option<&Ray>,
) -> Result<ApDistributionReport> {
    let spectrum = distribution_ft(f)?;
    if spectrum.max_derivative_order() > 0 {
        return Err(Error::NotAMeasure(spectrum.max_derivative_order()));
    }
    let phi_hat = phi.ft();
    let truncated = spectrum.pair(&phi_hat, Truncation::Auto { tolerance })?;
    let center: Vec<_> = phi_hat.center().iter().map(|&x| crate::scalar::Scalar::float(x)).collect();
    let window = spectrum.evaluate_window(&center, &crate::scalar::Scalar::float(truncated.radius))?;
    let terms = window
        .points
        .iter()
        .map(|p| {
            let gamma = p.point_f64();
            Ok((p.mass() * phi_hat.eval(&gamma)?, gamma))
        })
        .collect::<Result<Vec<_>>>()?;
    let sum = ExponentialSum::new(f.dim(), terms)?;
    let line = match (f.dim(), ray) {
        (1, None) => sum,
        (_, Some(ray)) => sum.restrict_to_ray(&ray.origin, &ray.direction)?,
        (d, None) => return Err(Error::InvalidArgument(format!("d={d} search needs a ray"))),
    };
    Ok(ApDistributionReport {
        spectrum_radius: truncated.radius,
        tail_bound: truncated.tail_bound,
        terms: line.terms().len(),
        report: find_almost_periods(&line, search)?,
    })
}
