//! Diagnostics for finite windows of discrete point sets.
//!
//! Every verdict here is about the window only: a window can refute relative
//! density or uniform discreteness of the full set but never confirm them.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::comb::WindowedDistribution;
use crate::error::{Error, Result};
use crate::fit::loglog;

/// Boundary slack for closed-ball membership.
pub const BALL_SLACK: f64 = 1e-9;

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The observation window a point set was cut from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Uniform bucket grid for neighbor queries.
struct Buckets<'a> {
    points: &'a [Vec<f64>],
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> Buckets<'a> {
    fn new(points: &'a [Vec<f64>], cell: f64) -> Buckets<'a> {
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(key(p, cell)).or_default().push(i);
        }
        Buckets { points, cell, map }
    }

    /// Indices of points within distance `r` of `x` (superset filtered exactly).
    fn within(&self, x: &[f64], r: f64, mut f: impl FnMut(usize)) {
        let boxes: Vec<(i64, i64)> = x
            .iter()
            .map(|v| (((v - r) / self.cell).floor() as i64, ((v + r) / self.cell).floor() as i64))
            .collect();
        crate::lattice::for_each_in_box(&boxes, |cell| {
            if let Some(ids) = self.map.get(cell) {
                for &i in ids {
                    if distance(&self.points[i], x) <= r {
                        f(i);
                    }
                }
            }
        });
    }

    fn count_within(&self, x: &[f64], r: f64) -> usize {
        let mut n = 0;
        self.within(x, r, |_| n += 1);
        n
    }

    /// Distance from `x` to the nearest point, searching rings of cells.
    fn nearest(&self, x: &[f64]) -> f64 {
        let home = key(x, self.cell);
        let mut best = f64::INFINITY;
        for ring in 0..=64i64 {
            let boxes: Vec<(i64, i64)> = home.iter().map(|&h| (h - ring, h + ring)).collect();
            crate::lattice::for_each_in_box(&boxes, |cell| {
                let on_ring = cell.iter().zip(&home).any(|(c, h)| (c - h).abs() == ring);
                if !on_ring {
                    return;
                }
                if let Some(ids) = self.map.get(cell) {
                    for &i in ids {
                        best = best.min(distance(&self.points[i], x));
                    }
                }
            });
            if best <= ring as f64 * self.cell {
                return best;
            }
        }
        self.points.iter().map(|p| distance(p, x)).fold(best, f64::min)
    }
}

fn key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|x| (x / cell).floor() as i64).collect()
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let d = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidArgument("points have mixed dimensions".into()));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coordinate".into()));
    }
    Ok(d)
}

fn typical_spacing(points: &[Vec<f64>], d: usize) -> f64 {
    let mut volume = 1.0;
    for axis in 0..d {
        let lo = points.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max);
        volume *= (hi - lo).max(1e-9);
    }
    let s = (volume / points.len() as f64).powf(1.0 / d as f64);
    if s.is_finite() && s > 0.0 {
        s
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Separation {
    pub eta: f64,
    /// Indices `(i, j)`, `i < j`, of a closest pair; lexicographically first
    /// among ties.
    pub pair: (usize, usize),
}

fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
    if (b.0, b.1, b.2) < (a.0, a.1, a.2) {
        b
    } else {
        a
    }
}

/// Minimum pairwise distance, by bucketing at a cell size that doubles until
/// the closest pair found lies within one cell width.
pub fn separating_constant(points: &[Vec<f64>]) -> Result<Separation> {
    let d = check_points(points)?;
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: points.len() });
    }
    let mut cell = typical_spacing(points, d);
    loop {
        let buckets = Buckets::new(points, cell);
        let best = (0..points.len())
            .into_par_iter()
            .map(|i| {
                let mut local = (f64::INFINITY, usize::MAX, usize::MAX);
                buckets.within(&points[i], cell, |j| {
                    if j > i {
                        local = better(local, (distance(&points[i], &points[j]), i, j));
                    }
                });
                local
            })
            .reduce(|| (f64::INFINITY, usize::MAX, usize::MAX), better);
        if best.0 <= cell {
            return Ok(Separation { eta: best.0, pair: (best.1, best.2) });
        }
        cell *= 2.0;
    }
}

/// O(n²) reference for [`separating_constant`].
pub fn separating_constant_brute(points: &[Vec<f64>]) -> Result<Separation> {
    check_points(points)?;
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: points.len() });
    }
    let best = (0..points.len())
        .into_par_iter()
        .map(|i| {
            ((i + 1)..points.len())
                .map(|j| (distance(&points[i], &points[j]), i, j))
                .fold((f64::INFINITY, usize::MAX, usize::MAX), better)
        })
        .reduce(|| (f64::INFINITY, usize::MAX, usize::MAX), better);
    Ok(Separation { eta: best.0, pair: (best.1, best.2) })
}

/// Parameters of `|x - x'| >= c · min{1, |x|^{-h}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PDiscreteness {
    pub c: f64,
    pub h: f64,
}

impl PDiscreteness {
    pub fn new(c: f64, h: f64) -> Result<PDiscreteness> {
        if !(c > 0.0) || !(h >= 0.0) {
            return Err(Error::InvalidArgument(format!("need c > 0 and h >= 0, got c={c}, h={h}")));
        }
        Ok(PDiscreteness { c, h })
    }

    fn scale_at(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r <= 1.0 {
            1.0
        } else {
            r.powf(-self.h)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PDiscreteVerdict {
    pub holds: bool,
    /// Ordered pair `(x, x')` minimizing `|x - x'| / min{1, |x|^{-h}}`.
    pub witness: Option<(usize, usize)>,
    pub worst_ratio: f64,
}

pub fn check_p_discrete(points: &[Vec<f64>], params: PDiscreteness) -> Result<PDiscreteVerdict> {
    check_points(points)?;
    let best = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let s = params.scale_at(&points[i]);
            (0..points.len())
                .filter(|&j| j != i)
                .map(|j| (distance(&points[i], &points[j]) / s, i, j))
                .fold((f64::INFINITY, usize::MAX, usize::MAX), better)
        })
        .reduce(|| (f64::INFINITY, usize::MAX, usize::MAX), better);
    let witness = (best.1 != usize::MAX).then_some((best.1, best.2));
    Ok(PDiscreteVerdict { holds: best.0 >= params.c, witness, worst_ratio: best.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Density {
    /// Largest number of points in a closed unit ball.
    pub value: usize,
    /// `false` when `value` is only a grid lower bound (d >= 3).
    pub exact: bool,
}

/// `sup_x #(A ∩ B(x,1))` over the window. Exact for d <= 2: an optimal ball
/// can be moved until it is centered at a point (one point inside) or has
/// two points on its boundary.
pub fn bounded_density(points: &[Vec<f64>]) -> Result<Density> {
    let d = check_points(points)?;
    if points.is_empty() {
        return Ok(Density { value: 0, exact: true });
    }
    match d {
        1 => {
            let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
            xs.sort_by(f64::total_cmp);
            let mut best = 0;
            let mut hi = 0;
            for lo in 0..xs.len() {
                while hi < xs.len() && xs[hi] - xs[lo] <= 2.0 + BALL_SLACK {
                    hi += 1;
                }
                best = best.max(hi - lo);
            }
            Ok(Density { value: best, exact: true })
        }
        2 => {
            let buckets = Buckets::new(points, 1.0);
            let r = 1.0 + BALL_SLACK;
            let best = (0..points.len())
                .into_par_iter()
                .map(|i| {
                    let a = &points[i];
                    let mut best = buckets.count_within(a, r);
                    let mut partners = Vec::new();
                    buckets.within(a, 2.0, |j| {
                        if j > i {
                            partners.push(j);
                        }
                    });
                    for j in partners {
                        let b = &points[j];
                        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                        let dist = (dx * dx + dy * dy).sqrt();
                        if dist == 0.0 {
                            continue;
                        }
                        let half = dist / 2.0;
                        let off = (1.0 - half * half).max(0.0).sqrt();
                        let (mx, my) = (a[0] + dx / 2.0, a[1] + dy / 2.0);
                        let (px, py) = (-dy / dist * off, dx / dist * off);
                        for center in [[mx + px, my + py], [mx - px, my - py]] {
                            best = best.max(buckets.count_within(&center, r));
                        }
                    }
                    best
                })
                .max()
                .unwrap_or(0);
            Ok(Density { value: best, exact: true })
        }
        _ => {
            // every optimal ball contains a data point, so only grid centers
            // within distance 1 of some point matter
            let h: f64 = 0.1;
            let buckets = Buckets::new(points, 1.0);
            let reach = (1.0 / h).ceil() as i64;
            let best = points
                .par_iter()
                .map(|p| {
                    let base: Vec<i64> = p.iter().map(|x| (x / h).round() as i64).collect();
                    let boxes: Vec<(i64, i64)> = base.iter().map(|&b| (b - reach, b + reach)).collect();
                    let mut best = 0;
                    crate::lattice::for_each_in_box(&boxes, |nu| {
                        let g: Vec<f64> = nu.iter().map(|&n| n as f64 * h).collect();
                        if distance(&g, p) <= 1.0 {
                            best = best.max(buckets.count_within(&g, 1.0 + BALL_SLACK));
                        }
                    });
                    best
                })
                .max()
                .unwrap_or(0);
            Ok(Density { value: best, exact: false })
        }
    }
}

/// Fine-grid reference bracket `(lower, upper)` for [`bounded_density`]:
/// unit balls at grid centers give the lower bound, and every unit ball is
/// inside a ball of radius `1 + h√d/2` around its nearest grid center.
pub fn bounded_density_grid(points: &[Vec<f64>], spacing: f64) -> Result<(usize, usize)> {
    let d = check_points(points)?;
    if points.is_empty() {
        return Ok((0, 0));
    }
    let grow = spacing * (d as f64).sqrt() / 2.0;
    let boxes: Vec<(i64, i64)> = (0..d)
        .map(|axis| {
            let lo = points.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min) - 1.0;
            let hi = points.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max) + 1.0;
            ((lo / spacing).floor() as i64, (hi / spacing).ceil() as i64)
        })
        .collect();
    let buckets = Buckets::new(points, 1.0);
    let (first_lo, first_hi) = boxes[0];
    let (lower, upper) = (first_lo..=first_hi)
        .into_par_iter()
        .map(|first| {
            let mut sub = boxes.clone();
            sub[0] = (first, first);
            let (mut lo, mut hi) = (0, 0);
            crate::lattice::for_each_in_box(&sub, |nu| {
                let g: Vec<f64> = nu.iter().map(|&n| n as f64 * spacing).collect();
                lo = lo.max(buckets.count_within(&g, 1.0));
                hi = hi.max(buckets.count_within(&g, 1.0 + grow + BALL_SLACK));
            });
            (lo, hi)
        })
        .reduce(|| (0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringRadius {
    pub lower: f64,
    pub upper: f64,
    pub spacing: f64,
}

/// Largest empty-ball radius inside the window, over grid centers whose
/// empty ball stays inside the window. The true windowed value over the
/// same certified region lies in `[lower, upper]`.
pub fn covering_radius(points: &[Vec<f64>], window: &Window, spacing: f64) -> Result<CoveringRadius> {
    let d = check_points(points)?;
    if points.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }
    if d != window.center.len() {
        return Err(Error::DimensionMismatch { expected: window.center.len(), found: d });
    }
    let buckets = Buckets::new(points, typical_spacing(points, d).max(spacing));
    let reach = (window.radius / spacing).floor() as i64;
    let (first_lo, first_hi) = (-reach, reach);
    let lower = (first_lo..=first_hi)
        .into_par_iter()
        .map(|first| {
            let mut boxes = vec![(-reach, reach); d];
            boxes[0] = (first, first);
            let mut best: f64 = 0.0;
            crate::lattice::for_each_in_box(&boxes, |nu| {
                let g: Vec<f64> = nu.iter().zip(&window.center).map(|(&n, c)| c + n as f64 * spacing).collect();
                let from_center = distance(&g, &window.center);
                if from_center > window.radius {
                    return;
                }
                let gap = buckets.nearest(&g);
                if from_center + gap <= window.radius {
                    best = best.max(gap);
                }
            });
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(CoveringRadius { lower, upper: lower + spacing * (d as f64).sqrt() / 2.0, spacing })
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingProfile {
    pub radii: Vec<f64>,
    /// `n(r) = #{x : |x| <= r}`.
    pub counts: Vec<usize>,
    /// `(s, #A_s)` for `s = 1..=ceil(max r)`, with `A_1 = {|x| <= 1}` and
    /// `A_s = {s-1 < |x| <= s}`.
    pub annuli: Vec<(u32, usize)>,
    pub slope: Option<f64>,
    pub bound: Option<CountingBound>,
}

/// Comparison of `n(r)` against the packing bound that p-discreteness gives
/// shell by shell.
#[derive(Debug, Clone, Serialize)]
pub struct CountingBound {
    pub params: PDiscreteness,
    /// `max n(r) / r^{d(h+1)}` over the probed radii.
    pub max_ratio: f64,
    /// Packing bound on `n(r)` at each radius.
    pub packing: Vec<f64>,
    /// `max packing(r) / r^{d(h+1)}`.
    pub chain_constant: f64,
    pub within_bound: bool,
}

/// Packing bound on `#(A ∩ A_s)`: disjoint balls of radius `(c/2) s^{-h}`
/// around the shell's points fit in `{max(s-2,0) <= |x| <= s+1}`.
pub fn shell_packing_bound(s: u32, dim: usize, params: PDiscreteness) -> f64 {
    let s = f64::from(s);
    let d = dim as i32;
    let rho = (params.c / 2.0).min(1.0) * s.powf(-params.h);
    ((s + 1.0).powi(d) - (s - 2.0).max(0.0).powi(d)) / rho.powi(d)
}

pub fn counting_profile(
    points: &[Vec<f64>],
    radii: &[f64],
    params: Option<PDiscreteness>,
) -> Result<CountingProfile> {
    let d = check_points(points)?;
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|r| *r < 0.0) {
        return Err(Error::InvalidArgument("radii must be nonnegative and increasing".into()));
    }
    let mut norms: Vec<f64> = points.iter().map(|p| norm(p)).collect();
    norms.sort_by(f64::total_cmp);
    let counts: Vec<usize> = radii.iter().map(|&r| norms.partition_point(|&x| x <= r)).collect();
    let max_s = radii.last().map_or(0, |r| r.ceil() as u32);
    let annuli: Vec<(u32, usize)> = (1..=max_s)
        .map(|s| {
            let lo = if s == 1 { 0 } else { norms.partition_point(|&x| x <= f64::from(s) - 1.0) };
            let hi = norms.partition_point(|&x| x <= f64::from(s));
            (s, hi - lo)
        })
        .collect();
    let slope = (radii.len() >= 3 && counts.iter().all(|&n| n > 0) && radii[0] > 0.0).then(|| {
        let ys: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
        loglog(radii, &ys).0
    });
    let bound = params.map(|params| {
        let exponent = d as f64 * (params.h + 1.0);
        let packing: Vec<f64> = radii
            .iter()
            .map(|&r| (1..=(r.ceil() as u32).max(1)).map(|s| shell_packing_bound(s, d, params)).sum())
            .collect();
        let ratio = |n: f64, r: f64| if r > 0.0 { n / r.powf(exponent) } else { 0.0 };
        let max_ratio = counts.iter().zip(radii).map(|(&n, &r)| ratio(n as f64, r)).fold(0.0, f64::max);
        let chain_constant = packing.iter().zip(radii).map(|(&b, &r)| ratio(b, r)).fold(0.0, f64::max);
        let within_bound = counts.iter().zip(&packing).all(|(&n, &b)| n as f64 <= b);
        CountingBound { params, max_ratio, packing, chain_constant, within_bound }
    });
    Ok(CountingProfile { radii: radii.to_vec(), counts, annuli, slope, bound })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderGrowth {
    /// Derivative order `k`, as a string like `(0,1)`.
    pub k: String,
    /// Fitted exponent `h(k)` of `|p_k(λ)|` against `1 + |λ|`.
    pub exponent: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientGrowth {
    pub orders: Vec<OrderGrowth>,
    /// `inf_λ sup_k |p_k(λ)| (1+|λ|)^{-h(k)}`.
    pub lower: f64,
    /// `sup_λ sup_k |p_k(λ)| (1+|λ|)^{-h(k)}`.
    pub upper: f64,
    /// `inf_λ Σ_k |p_k(λ)|`.
    pub min_total: f64,
}

pub fn coefficient_growth(w: &WindowedDistribution) -> Result<CoefficientGrowth> {
    if w.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }
    let mut samples: BTreeMap<&crate::multiindex::MultiIndex, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for p in &w.points {
        let r = 1.0 + norm(&p.point_f64());
        for (k, c) in &p.coeffs {
            if c.norm() > 0.0 {
                let entry = samples.entry(k).or_default();
                entry.0.push(r);
                entry.1.push(c.norm());
            }
        }
    }
    let exponents: BTreeMap<_, f64> = samples.iter().map(|(k, (xs, ys))| (*k, loglog(xs, ys).0)).collect();
    let orders = samples
        .iter()
        .map(|(k, (xs, _))| OrderGrowth { k: k.to_string(), exponent: exponents[k], samples: xs.len() })
        .collect();
    let (mut lower, mut upper, mut min_total) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for p in &w.points {
        let r = 1.0 + norm(&p.point_f64());
        let sup = p
            .coeffs
            .iter()
            .map(|(k, c)| c.norm() * r.powf(-exponents.get(k).copied().unwrap_or(0.0)))
            .fold(0.0, f64::max);
        lower = lower.min(sup);
        upper = upper.max(sup);
        min_total = min_total.min(p.coeffs.values().map(|c| c.norm()).sum());
    }
    Ok(CoefficientGrowth { orders, lower, upper, min_total })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub scope: &'static str,
    pub window: Option<Window>,
    pub dimension: usize,
    pub points: usize,
    pub separation: Option<Separation>,
    pub p_discrete: Option<PDiscreteVerdict>,
    pub density: Density,
    pub covering: Option<CoveringRadius>,
    pub counting: CountingProfile,
    pub coefficients: Option<CoefficientGrowth>,
}

/// Runs every diagnostic that applies to the input.
pub fn diagnose(
    points: &[Vec<f64>],
    window: Option<Window>,
    params: Option<PDiscreteness>,
    radii: &[f64],
    coefficients: Option<&WindowedDistribution>,
) -> Result<DiagnosticsReport> {
    let dimension = check_points(points)?;
    let separation = if points.len() >= 2 { Some(separating_constant(points)?) } else { None };
    let p_discrete = params.map(|p| check_p_discrete(points, p)).transpose()?;
    let covering = match &window {
        Some(w) if !points.is_empty() => Some(covering_radius(points, w, 0.05)?),
        _ => None,
    };
    Ok(DiagnosticsReport {
        scope: "windowed",
        dimension,
        points: points.len(),
        separation,
        p_discrete,
        density: bounded_density(points)?,
        covering,
        counting: counting_profile(points, radii, params)?,
        coefficients: coefficients.map(coefficient_growth).transpose()?,
        window,
    })
}
