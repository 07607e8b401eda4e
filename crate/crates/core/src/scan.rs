//! Grid evaluation, extremum detection and ridge classification of 2D maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PairSystem, PulseConfig, SignalSample};
use crate::scalar::Real;
use crate::signal::{Include, SignalModel, SignalOptions};

/// Quantity a scan records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    #[default]
    Total,
    SIOnly,
    SIIOnly,
    /// `S(C2) - S(-C2)` for every part.
    Residue,
}

/// Meaning of the second axis of a 2D grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowAxis {
    /// Rows hold `w_p`.
    #[default]
    Pump,
    /// Rows hold `w + w_p`.
    Sum,
    /// Rows hold `w - w_p`.
    Difference,
}

impl RowAxis {
    /// Narrowband frequency of the cell at broadband `w` and row value `y`.
    pub fn omega_p<T: Real>(self, w: T, y: T) -> T {
        match self {
            RowAxis::Pump => y,
            RowAxis::Sum => y - w,
            RowAxis::Difference => w - y,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid<T> {
    pub omega_axis: Vec<T>,
    /// Single entry for 1D scans.
    pub row_axis: Vec<T>,
    #[serde(default)]
    pub rows: RowAxis,
    pub mode: ScanMode,
    /// Chirp rate for [`ScanMode::Residue`].
    pub c2: T,
}

/// `n` points from `start` to `stop` inclusive.
pub fn linspace<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let d = (stop - start) / T::from_usize(n - 1).expect("count");
            (0..n).map(|i| start + d * T::from_usize(i).expect("index")).collect()
        }
    }
}

/// Points `start, start + step, ...` not beyond `stop` (within half a step).
pub fn arange<T: Real>(start: T, stop: T, step: T) -> Vec<T> {
    let n = ((stop - start) / step + T::lit(0.5)).floor().to_usize().unwrap_or(0) + 1;
    (0..n).map(|i| start + step * T::from_usize(i).expect("index")).collect()
}

impl<T: Real> ScanGrid<T> {
    pub fn one_d(omega_axis: Vec<T>, omega_p: T) -> Self {
        Self { omega_axis, row_axis: vec![omega_p], rows: RowAxis::Pump, mode: ScanMode::Total, c2: T::zero() }
    }

    pub fn two_d(omega_axis: Vec<T>, omega_p_axis: Vec<T>) -> Self {
        Self { omega_axis, row_axis: omega_p_axis, rows: RowAxis::Pump, mode: ScanMode::Total, c2: T::zero() }
    }

    /// 2D grid whose rows are `w + w_p` or `w - w_p` instead of `w_p`.
    pub fn with_rows(mut self, rows: RowAxis) -> Self {
        self.rows = rows;
        self
    }

    pub fn with_mode(mut self, mode: ScanMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn residue(mut self, c2: T) -> Self {
        self.mode = ScanMode::Residue;
        self.c2 = c2;
        self
    }

    pub fn is_1d(&self) -> bool {
        self.row_axis.len() == 1
    }

    /// Axes must be non-empty and strictly monotonic.
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("omega_axis", &self.omega_axis), ("row_axis", &self.row_axis)] {
            if axis.is_empty() {
                return Err(Error::Config(format!("{name} is empty")));
            }
            if axis.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("{name} has non-finite entries")));
            }
            if axis.len() > 1 {
                let up = axis[1] > axis[0];
                let mono = axis.windows(2).all(|w| if up { w[1] > w[0] } else { w[1] < w[0] });
                if !mono {
                    return Err(Error::Config(format!("{name} is not strictly monotonic")));
                }
            }
        }
        Ok(())
    }

    /// Largest spacing of the broadband axis.
    pub fn max_step(&self) -> T {
        self.omega_axis.windows(2).map(|w| (w[1] - w[0]).abs()).fold(T::zero(), T::max)
    }

    /// Whether the broadband step resolves the narrowest line (`step <= gamma / 4`).
    pub fn resolves(&self, gamma_min: T) -> bool {
        self.max_step() <= gamma_min / T::lit(4.0)
    }
}

/// Per-point evaluator shared by the scan entry points.
#[derive(Clone, Debug)]
pub struct Scanner<T: Real> {
    plus: SignalModel<T>,
    minus: Option<SignalModel<T>>,
}

impl<T: Real> Scanner<T> {
    pub fn new(
        system: &PairSystem<T>,
        pulse: &PulseConfig<T>,
        grid: &ScanGrid<T>,
        options: SignalOptions,
    ) -> Result<Self> {
        let include = match grid.mode {
            ScanMode::SIOnly => Include::SI,
            ScanMode::SIIOnly => Include::SII,
            ScanMode::Total | ScanMode::Residue => options.include,
        };
        let options = SignalOptions { include, ..options };
        let base = SignalModel::with_options(system.clone(), pulse.clone(), options)?;
        if grid.mode == ScanMode::Residue {
            if pulse.phase.kind != crate::phase::PhaseKind::Chirp {
                return Err(Error::Config("residue scans need a chirp phase profile".into()));
            }
            Ok(Self { plus: base.with_c2(grid.c2), minus: Some(base.with_c2(-grid.c2)) })
        } else {
            Ok(Self { plus: base, minus: None })
        }
    }

    pub fn model(&self) -> &SignalModel<T> {
        &self.plus
    }

    /// One grid point; evaluation failures become flagged samples.
    pub fn point(&self, omega: T, omega_p: T) -> SignalSample<T> {
        let eval = || -> Result<SignalSample<T>> {
            let p = self.plus.sample_at(omega, omega_p)?;
            match &self.minus {
                None => Ok(p),
                Some(m) => {
                    let q = m.sample_at(omega, omega_p)?;
                    Ok(SignalSample::new(omega, p.s_i - q.s_i, p.s_ii - q.s_ii))
                }
            }
        };
        eval().unwrap_or_else(|_| SignalSample::flagged(omega))
    }
}

/// Row-major map: row `i` holds `row_axis[i]`, read according to `rows`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalMatrix<T> {
    pub omega_axis: Vec<T>,
    pub row_axis: Vec<T>,
    pub rows: RowAxis,
    pub samples: Vec<SignalSample<T>>,
}

impl<T: Real> SignalMatrix<T> {
    pub fn rows(&self) -> usize {
        self.row_axis.len()
    }

    pub fn cols(&self) -> usize {
        self.omega_axis.len()
    }

    pub fn row(&self, i: usize) -> &[SignalSample<T>] {
        let n = self.cols();
        &self.samples[i * n..(i + 1) * n]
    }

    pub fn get(&self, i: usize, j: usize) -> &SignalSample<T> {
        &self.samples[i * self.cols() + j]
    }

    pub fn axes(&self) -> MapAxes<'_, T> {
        MapAxes { omega: &self.omega_axis, rows: &self.row_axis, kind: self.rows }
    }

    /// Narrowband frequency of cell `(i, j)`.
    pub fn omega_p(&self, i: usize, j: usize) -> T {
        self.rows.omega_p(self.omega_axis[j], self.row_axis[i])
    }

    /// One scalar per cell, row-major.
    pub fn values(&self, f: impl Fn(&SignalSample<T>) -> T) -> Vec<T> {
        self.samples.iter().map(f).collect()
    }
}

pub fn scan_1d<T: Real>(
    grid: &ScanGrid<T>,
    system: &PairSystem<T>,
    pulse: &PulseConfig<T>,
) -> Result<Vec<SignalSample<T>>> {
    scan_1d_with(grid, system, pulse, SignalOptions::default())
}

pub fn scan_1d_with<T: Real>(
    grid: &ScanGrid<T>,
    system: &PairSystem<T>,
    pulse: &PulseConfig<T>,
    options: SignalOptions,
) -> Result<Vec<SignalSample<T>>> {
    grid.validate()?;
    if !grid.is_1d() || grid.rows != RowAxis::Pump {
        return Err(Error::Config("1D scan needs a single narrowband frequency".into()));
    }
    let sc = Scanner::new(system, pulse, grid, options)?;
    let wp = grid.row_axis[0];
    Ok(grid.omega_axis.par_iter().map(|&w| sc.point(w, wp)).collect())
}

pub fn scan_2d<T: Real>(grid: &ScanGrid<T>, system: &PairSystem<T>, pulse: &PulseConfig<T>) -> Result<SignalMatrix<T>> {
    scan_2d_with(grid, system, pulse, SignalOptions::default())
}

pub fn scan_2d_with<T: Real>(
    grid: &ScanGrid<T>,
    system: &PairSystem<T>,
    pulse: &PulseConfig<T>,
    options: SignalOptions,
) -> Result<SignalMatrix<T>> {
    grid.validate()?;
    let sc = Scanner::new(system, pulse, grid, options)?;
    let n = grid.omega_axis.len();
    let samples = (0..grid.row_axis.len() * n)
        .into_par_iter()
        .map(|k| {
            let w = grid.omega_axis[k % n];
            sc.point(w, grid.rows.omega_p(w, grid.row_axis[k / n]))
        })
        .collect();
    Ok(SignalMatrix { omega_axis: grid.omega_axis.clone(), row_axis: grid.row_axis.clone(), rows: grid.rows, samples })
}

/// One 1D scan per interatomic distance, given as `r / lambda_a` with `lambda_a = 1 / w_a`.
pub fn distance_sweep<T: Real>(
    grid: &ScanGrid<T>,
    system: &PairSystem<T>,
    pulse: &PulseConfig<T>,
    r_over_lambda: &[T],
    options: SignalOptions,
) -> Result<Vec<(T, Vec<SignalSample<T>>)>> {
    let lambda = T::one() / system.atoms[0].omega;
    r_over_lambda
        .iter()
        .map(|&x| {
            let sys = system.clone().with_distance(x * lambda);
            Ok((x, scan_1d_with(grid, &sys, pulse, options)?))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Peak,
    Dip,
    /// Adjacent peak and dip on either side of the local baseline.
    Asymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum<T> {
    pub omega: T,
    pub kind: ExtremumKind,
    pub prominence: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremaOptions<T> {
    /// Absolute threshold; `None` means 1% of the largest `|S|` on the grid.
    pub min_prominence: Option<T>,
    /// Largest peak-to-dip distance of an asymmetric pair (3 gamma).
    pub pair_window: T,
    /// Largest admissible grid spacing.
    pub max_step: T,
}

impl<T: Real> ExtremaOptions<T> {
    /// Defaults for a line width `gamma`.
    pub fn for_gamma(gamma: T) -> Self {
        Self { min_prominence: None, pair_window: gamma * T::lit(3.0), max_step: gamma / T::lit(4.0) }
    }

    pub fn with_prominence(mut self, p: T) -> Self {
        self.min_prominence = Some(p);
        self
    }
}

/// Prominence of the local maximum at `i`: height above the higher of the two
/// lowest points reached before climbing above `v[i]` on either side.
fn prominence<T: Real>(v: &[T], i: usize) -> T {
    windowed_prominence(v, i, v.len())
}

/// [`prominence`] with the search limited to `reach` samples on each side.
fn windowed_prominence<T: Real>(v: &[T], i: usize, reach: usize) -> T {
    let h = v[i];
    let lo = i.saturating_sub(reach);
    let hi = (i + reach + 1).min(v.len());
    let mut left = h;
    for &x in v[lo..i].iter().rev() {
        if x > h {
            break;
        }
        left = left.min(x);
    }
    let mut right = h;
    for &x in &v[i + 1..hi] {
        if x > h {
            break;
        }
        right = right.min(x);
    }
    h - left.max(right)
}

/// Strict local maxima, with plateaus reported at their centre.
fn local_maxima<T: Real>(v: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = v.len();
    let mut i = 1;
    while i + 1 < n {
        if v[i] > v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Peaks, dips and asymmetric (dispersive) pairs of a uniformly sampled trace.
pub fn find_extrema<T: Real>(omega: &[T], values: &[T], opts: &ExtremaOptions<T>) -> Result<Vec<Extremum<T>>> {
    if omega.len() != values.len() {
        return Err(Error::Config("axis and value lengths differ".into()));
    }
    if omega.len() < 3 {
        return Err(Error::Config("need at least three samples".into()));
    }
    let step = omega[1] - omega[0];
    for w in omega.windows(2) {
        let d = w[1] - w[0];
        if (d - step).abs() > T::lit(1e-6) * step.abs() {
            return Err(Error::Config("extremum search needs a uniform grid".into()));
        }
    }
    if step.abs() > opts.max_step {
        return Err(Error::Config(format!("grid step {} is coarser than {}", step.abs(), opts.max_step)));
    }
    let finite: Vec<T> = values.iter().map(|&x| if x.is_finite() { x } else { T::zero() }).collect();
    let peak_abs = finite.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let threshold = opts.min_prominence.unwrap_or(peak_abs * T::lit(0.01));
    let neg: Vec<T> = finite.iter().map(|&x| -x).collect();

    let mut raw: Vec<(usize, ExtremumKind, T)> = Vec::new();
    for i in local_maxima(&finite) {
        let p = prominence(&finite, i);
        if p >= threshold && p > T::zero() {
            raw.push((i, ExtremumKind::Peak, p));
        }
    }
    for i in local_maxima(&neg) {
        let p = prominence(&neg, i);
        if p >= threshold && p > T::zero() {
            raw.push((i, ExtremumKind::Dip, p));
        }
    }
    raw.sort_by_key(|r| r.0);

    let window = opts.pair_window;
    let n = omega.len();
    let baseline = |mid: T| -> T {
        // value of the straight line through the trace at mid -/+ window
        let at = |x: T| -> T {
            let k = ((x - omega[0]) / step).round().to_isize().unwrap_or(0).clamp(0, n as isize - 1) as usize;
            finite[k]
        };
        (at(mid - window) + at(mid + window)) * T::lit(0.5)
    };
    // pair each extremum with its nearer neighbour when that neighbour agrees
    let gap = |a: usize, b: usize| (omega[raw[b].0] - omega[raw[a].0]).abs();
    let nearest = |k: usize| -> Option<usize> {
        let left = (k > 0).then(|| k - 1);
        let right = (k + 1 < raw.len()).then(|| k + 1);
        match (left, right) {
            (Some(l), Some(r)) => Some(if gap(l, k) <= gap(k, r) { l } else { r }),
            (l, r) => l.or(r),
        }
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < raw.len() {
        if k + 1 < raw.len() && nearest(k) == Some(k + 1) && nearest(k + 1) == Some(k) {
            let (i, ki, pi) = raw[k];
            let (j, kj, pj) = raw[k + 1];
            if ki != kj && gap(k, k + 1) <= window {
                let mid = (omega[i] + omega[j]) * T::lit(0.5);
                let base = baseline(mid);
                let (hi, lo) = if ki == ExtremumKind::Peak { (finite[i], finite[j]) } else { (finite[j], finite[i]) };
                if hi > base && lo < base {
                    let at = crossing(omega, &finite, i, j).unwrap_or(mid);
                    out.push(Extremum { omega: at, kind: ExtremumKind::Asymmetric, prominence: pi.max(pj) });
                    k += 2;
                    continue;
                }
            }
        }
        let (i, kind, p) = raw[k];
        out.push(Extremum { omega: omega[i], kind, prominence: p });
        k += 1;
    }
    Ok(out)
}

/// Where the trace between samples `i < j` crosses the mean of its two ends.
fn crossing<T: Real>(omega: &[T], v: &[T], i: usize, j: usize) -> Option<T> {
    let level = (v[i] + v[j]) * T::lit(0.5);
    (i..j).find_map(|k| {
        let (a, b) = (v[k] - level, v[k + 1] - level);
        if a == T::zero() {
            Some(omega[k])
        } else if (a < T::zero()) != (b < T::zero()) {
            Some(omega[k] + (omega[k + 1] - omega[k]) * a / (a - b))
        } else {
            None
        }
    })
}

/// Line families of a `(w, w_p)` map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RidgeKind {
    /// Constant `w + w_p` (two-photon lines).
    Horizontal,
    /// Constant `w`.
    Vertical,
    /// Constant `w_p`.
    Diagonal,
    /// Constant `w - w_p` (Raman and Rayleigh lines).
    Raman,
}

impl RidgeKind {
    pub const ALL: [RidgeKind; 4] = [RidgeKind::Horizontal, RidgeKind::Vertical, RidgeKind::Diagonal, RidgeKind::Raman];

    pub fn coordinate<T: Real>(self, w: T, wp: T) -> T {
        match self {
            RidgeKind::Horizontal => w + wp,
            RidgeKind::Vertical => w,
            RidgeKind::Diagonal => wp,
            RidgeKind::Raman => w - wp,
        }
    }

    /// Family whose lines are the rows of a grid.
    fn of_rows(rows: RowAxis) -> Self {
        match rows {
            RowAxis::Pump => RidgeKind::Diagonal,
            RowAxis::Sum => RidgeKind::Horizontal,
            RowAxis::Difference => RidgeKind::Raman,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ridge<T> {
    pub kind: RidgeKind,
    pub intercept: T,
    pub strength: T,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RidgeReport<T> {
    pub ridges: Vec<Ridge<T>>,
}

impl<T: Real> RidgeReport<T> {
    pub fn of_kind(&self, kind: RidgeKind) -> Vec<&Ridge<T>> {
        self.ridges.iter().filter(|r| r.kind == kind).collect()
    }

    pub fn intercepts(&self, kind: RidgeKind) -> Vec<T> {
        self.of_kind(kind).iter().map(|r| r.intercept).collect()
    }
}

/// Line profile of one family: for every intercept bin, the median of the
/// signed signal over the cells on that line. The median ignores the few
/// cells where a line crosses a ridge of another family.
#[derive(Clone, Debug, PartialEq)]
pub struct LineProfile<T> {
    pub kind: RidgeKind,
    pub intercepts: Vec<T>,
    pub level: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeOptions {
    /// Minimum profile prominence as a fraction of the largest `|level|` of
    /// the family (see [`ridge_detect`]).
    pub threshold: f64,
    /// Lines shorter than this fraction of the shorter grid side are ignored.
    pub min_coverage: f64,
    /// Prominence is measured against the profile within this distance (cm^-1).
    pub window: f64,
    /// Extrema closer than this (cm^-1) belong to one ridge, so a dispersive
    /// or split line counts once.
    pub merge: f64,
}

impl RidgeOptions {
    /// Defaults for lines of width `gamma` (for two-photon and Raman lines
    /// the sum of the two atomic widths).
    pub fn for_linewidth(gamma: f64) -> Self {
        Self { threshold: 0.1, min_coverage: 0.5, window: 3.0 * gamma, merge: 2.0 * gamma }
    }
}

impl Default for RidgeOptions {
    fn default() -> Self {
        Self::for_linewidth(400.0)
    }
}

fn median<T: Real>(v: &mut [T]) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * T::lit(0.5)
    }
}

fn mean_step<T: Real>(axis: &[T]) -> T {
    (axis[axis.len() - 1] - axis[0]).abs() / T::from_usize(axis.len() - 1).expect("count")
}

/// Geometry of a map: broadband axis, row axis and how rows are read.
#[derive(Clone, Copy, Debug)]
pub struct MapAxes<'a, T> {
    pub omega: &'a [T],
    pub rows: &'a [T],
    pub kind: RowAxis,
}

pub fn line_profile<T: Real>(
    axes: MapAxes<'_, T>,
    values: &[T],
    kind: RidgeKind,
    opts: &RidgeOptions,
) -> Result<LineProfile<T>> {
    let (omega, rows) = (axes.omega, axes.rows);
    let (nw, nr) = (omega.len(), rows.len());
    if nw < 3 || nr < 3 || values.len() != nw * nr {
        return Err(Error::Config("ridge detection needs at least a 3x3 map matching its axes".into()));
    }
    let (sw, sr) = (mean_step(omega), mean_step(rows));
    let h = if kind == RidgeKind::Vertical {
        sw
    } else if kind == RidgeKind::of_rows(axes.kind) {
        sr
    } else {
        sw.min(sr)
    };
    if !(h > T::zero()) {
        return Err(Error::Config("degenerate grid".into()));
    }
    let coord = |i: usize, j: usize| kind.coordinate(omega[j], axes.kind.omega_p(omega[j], rows[i]));
    let mut lo = T::infinity();
    for i in 0..nr {
        for j in 0..nw {
            lo = lo.min(coord(i, j));
        }
    }
    let mut bins: Vec<Vec<T>> = Vec::new();
    for i in 0..nr {
        for j in 0..nw {
            let v = values[i * nw + j];
            if !v.is_finite() {
                continue;
            }
            let k = ((coord(i, j) - lo) / h).round().to_usize().unwrap_or(0);
            if bins.len() <= k {
                bins.resize(k + 1, Vec::new());
            }
            bins[k].push(v);
        }
    }
    let need = ((nw.min(nr) as f64) * opts.min_coverage).ceil() as usize;
    let mut intercepts = Vec::new();
    let mut level = Vec::new();
    for (k, b) in bins.iter_mut().enumerate() {
        if b.len() >= need.max(3) {
            intercepts.push(lo + h * T::from_usize(k).expect("index"));
            level.push(median(b));
        }
    }
    Ok(LineProfile { kind, intercepts, level })
}

fn peak_level<T: Real>(prof: &LineProfile<T>) -> T {
    prof.level.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Ridges of one profile: maxima and minima with prominence of at least
/// `threshold * scale`, with extrema closer than `merge` grouped into one
/// ridge located at the group's centre.
pub fn profile_ridges<T: Real>(prof: &LineProfile<T>, scale: T, opts: &RidgeOptions) -> Vec<Ridge<T>> {
    let n = prof.level.len();
    if n < 3 {
        return Vec::new();
    }
    let thr = scale * T::lit(opts.threshold);
    if !(thr > T::zero()) {
        return Vec::new();
    }
    let h = mean_step(&prof.intercepts);
    let reach = (T::lit(opts.window) / h).ceil().to_usize().unwrap_or(1).max(1);
    let neg: Vec<T> = prof.level.iter().map(|&x| -x).collect();
    let mut ext: Vec<(usize, T)> = Vec::new();
    for v in [&prof.level, &neg] {
        for i in local_maxima(v) {
            let p = windowed_prominence(v, i, reach);
            if p >= thr {
                ext.push((i, p));
            }
        }
    }
    ext.sort_by_key(|e| e.0);
    let merge = T::lit(opts.merge);
    let mut out = Vec::new();
    let mut start = 0;
    while start < ext.len() {
        let mut end = start + 1;
        while end < ext.len() && prof.intercepts[ext[end].0] - prof.intercepts[ext[end - 1].0] <= merge {
            end += 1;
        }
        let group = &ext[start..end];
        let m = group.len();
        let intercept = if m % 2 == 1 {
            prof.intercepts[group[m / 2].0]
        } else {
            let (i, j) = (group[m / 2 - 1].0, group[m / 2].0);
            crossing(&prof.intercepts, &prof.level, i, j)
                .unwrap_or((prof.intercepts[i] + prof.intercepts[j]) * T::lit(0.5))
        };
        let strength = group.iter().fold(T::zero(), |a, e| a.max(e.1));
        out.push(Ridge { kind: prof.kind, intercept, strength });
        start = end;
    }
    out
}

/// Ridges of every family in a map given as row-major values. A family is
/// searched only if its profile varies by at least `threshold` times the
/// largest `|level|` of any family; its ridges are then graded against its
/// own largest `|level|`, so weak line families next to strong ones survive.
pub fn ridge_detect<T: Real>(axes: MapAxes<'_, T>, values: &[T], opts: &RidgeOptions) -> Result<RidgeReport<T>> {
    let profiles =
        RidgeKind::ALL.iter().map(|&kind| line_profile(axes, values, kind, opts)).collect::<Result<Vec<_>>>()?;
    let global = profiles.iter().map(peak_level).fold(T::zero(), T::max);
    let mut report = RidgeReport::default();
    for p in &profiles {
        let (lo, hi) = p.level.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &x| (a.min(x), b.max(x)));
        if hi - lo >= global * T::lit(opts.threshold) {
            report.ridges.extend(profile_ridges(p, peak_level(p), opts));
        }
    }
    Ok(report)
}

/// [`ridge_detect`] on one field of a scanned map.
pub fn ridge_detect_matrix<T: Real>(
    m: &SignalMatrix<T>,
    field: impl Fn(&SignalSample<T>) -> T,
    opts: &RidgeOptions,
) -> Result<RidgeReport<T>> {
    ridge_detect(m.axes(), &m.values(field), opts)
}
