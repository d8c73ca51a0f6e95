//! Singular-value sequences, L^{p+} diagnostics and Dixmier-trace estimation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KreinError;

/// Fit residual (relative to the data scale) above which an estimate is flagged non-convergent.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-2;
/// Smallest number of points a fit window may hold.
pub const MIN_WINDOW: usize = 8;

/// Descending singular values with their running sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSequence {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl SingularSequence {
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `σ_N = Σ_{i≤N} μ_i`, indexed from `N = 1` at position 0.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            mu: self.mu.iter().map(|x| x * lambda).collect(),
            sigma: self.sigma.iter().map(|x| x * lambda).collect(),
        }
    }
}

/// Sort `mu` descending and form partial sums.
pub fn characteristic_sequence(mu: &[f64]) -> Result<SingularSequence, KreinError> {
    if let Some(&bad) = mu.iter().find(|x| x.is_nan() || **x < 0.0) {
        return Err(KreinError::NegativeSingularValue(bad));
    }
    let mut mu = mu.to_vec();
    mu.sort_by(|a, b| b.total_cmp(a));
    let sigma = partial_sums(&mu);
    Ok(SingularSequence { mu, sigma })
}

pub(crate) fn partial_sums(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Running L^{p+} statistic over the available sequence.
///
/// `p = 1`: `sup_{n>2} σ_n / ln n`. `p > 1`: `sup_{n≥1} σ_n / n^{(p−1)/p}`.
/// Returns 0 for sequences too short to contribute a term.
pub fn lp_plus_diagnostic(seq: &SingularSequence, p: f64) -> Result<f64, KreinError> {
    if p.is_nan() || p < 1.0 {
        return Err(KreinError::InvalidExponent(p));
    }
    let stat = seq.sigma.iter().enumerate().filter_map(|(i, &s)| {
        let n = (i + 1) as f64;
        if p == 1.0 {
            (i + 1 > 2).then(|| s / n.ln())
        } else {
            Some(s / n.powf((p - 1.0) / p))
        }
    });
    Ok(stat.fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMethod {
    /// `σ_N / ln N` at the final index.
    Tail,
    /// Least-squares slope of `σ_N` against `ln N` over the window.
    Slope,
}

impl std::str::FromStr for EstimatorMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tail" => Ok(Self::Tail),
            "slope" => Ok(Self::Slope),
            other => Err(format!("unknown estimator '{other}' (expected tail|slope)")),
        }
    }
}

/// Fit window: the indices `N` with `ln N ≥ (1 − fraction)·ln N_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub fraction: f64,
}

impl Default for Window {
    fn default() -> Self {
        Self { fraction: 0.75 }
    }
}

impl Window {
    pub fn new(fraction: f64) -> Option<Self> {
        (fraction > 0.0 && fraction <= 1.0).then_some(Self { fraction })
    }

    /// First index (1-based) of the window for a sequence of length `len`.
    pub fn start(&self, len: usize) -> usize {
        if len == 0 {
            return 1;
        }
        let lo = (1.0 - self.fraction) * (len as f64).ln();
        // smallest N with ln N >= lo, guarding against exp/ln roundoff
        let mut n = lo.exp().floor().max(1.0) as usize;
        while n > 1 && ((n - 1) as f64).ln() >= lo {
            n -= 1;
        }
        while (n as f64).ln() < lo {
            n += 1;
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DixmierEstimate {
    pub value: f64,
    pub method: EstimatorMethod,
    /// Inclusive 1-based index range `[start, end]` of the fit window.
    pub window: (usize, usize),
    /// RMS deviation of the linear fit over the window, relative to the data scale.
    pub residual: f64,
    /// Intercept of the window fit (slope method), useful for extrapolation plots.
    pub intercept: f64,
    pub converged: bool,
}

impl DixmierEstimate {
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            value: self.value * lambda,
            intercept: self.intercept * lambda,
            ..self.clone()
        }
    }
}

pub fn dixmier_estimate(
    seq: &SingularSequence,
    method: EstimatorMethod,
    window: Window,
) -> Result<DixmierEstimate, KreinError> {
    dixmier_estimate_sums(&seq.sigma, method, window)
}

/// Estimate `lim σ_N / ln N` from raw partial sums. The summands may have
/// either sign (signed spectral densities such as `D²Δ^{−n−2}`).
pub fn dixmier_estimate_sums(
    sigma: &[f64],
    method: EstimatorMethod,
    window: Window,
) -> Result<DixmierEstimate, KreinError> {
    let end = sigma.len();
    let start = window.start(end);
    let points = (end + 1).saturating_sub(start);
    if points < MIN_WINDOW {
        return Err(KreinError::WindowTooSmall(points));
    }
    let fit = LineFit::new(start, &sigma[start - 1..end]);
    let value = match method {
        EstimatorMethod::Slope => fit.slope,
        EstimatorMethod::Tail => sigma[end - 1] / (end as f64).ln(),
    };
    Ok(DixmierEstimate {
        value,
        method,
        window: (start, end),
        residual: fit.relative_residual,
        intercept: fit.intercept,
        converged: fit.relative_residual < CONVERGENCE_THRESHOLD,
    })
}

/// Estimator choice passed down by trace functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub method: EstimatorMethod,
    pub window: Window,
}

impl Default for Estimator {
    fn default() -> Self {
        Self {
            method: EstimatorMethod::Slope,
            window: Window::default(),
        }
    }
}

impl Estimator {
    pub fn estimate(&self, sigma: &[f64]) -> Result<DixmierEstimate, KreinError> {
        dixmier_estimate_sums(sigma, self.method, self.window)
    }

    pub fn estimate_complex(&self, sigma: &[Complex64]) -> Result<ComplexEstimate, KreinError> {
        let re: Vec<f64> = sigma.iter().map(|z| z.re).collect();
        let im: Vec<f64> = sigma.iter().map(|z| z.im).collect();
        Ok(ComplexEstimate {
            re: self.estimate(&re)?,
            im: self.estimate(&im)?,
        })
    }
}

/// Estimates of the real and imaginary parts of a complex-valued trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: DixmierEstimate,
    pub im: DixmierEstimate,
}

impl ComplexEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value, self.im.value)
    }

    pub fn converged(&self) -> bool {
        self.re.converged && self.im.converged
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub sigma: f64,
    /// `σ_N / ln N` (NaN at `N = 1`).
    pub quotient: f64,
    /// Slope of the window fit ending at `N`.
    pub slope: f64,
}

pub fn convergence_table(sigma: &[f64], window: Window) -> Vec<ConvergenceRow> {
    let slopes = running_slopes(sigma, window);
    sigma
        .iter()
        .zip(slopes)
        .enumerate()
        .map(|(i, (&s, slope))| {
            let n = i + 1;
            let ln = (n as f64).ln();
            ConvergenceRow {
                n,
                sigma: s,
                quotient: if n > 1 { s / ln } else { f64::NAN },
                slope,
            }
        })
        .collect()
}

struct LineFit {
    slope: f64,
    intercept: f64,
    relative_residual: f64,
}

/// Slope, `1/N` coefficient and intercept from centered second moments.
/// Falls back to the plain line when `ln N` and `1/N` are nearly collinear.
fn solve_moments(n: f64, m: Moments) -> (f64, f64, f64) {
    let (mx, mz, my) = (m.sx / n, m.sz / n, m.sy / n);
    let sxx = m.sxx - m.sx * mx;
    let szz = m.szz - m.sz * mz;
    let sxz = m.sxz - m.sx * mz;
    let sxy = m.sxy - m.sx * my;
    let szy = m.szy - m.sz * my;
    let det = sxx * szz - sxz * sxz;
    let (slope, bz) = if det > 1e-12 * sxx * szz && det > 0.0 {
        ((sxy * szz - szy * sxz) / det, (szy * sxx - sxy * sxz) / det)
    } else if sxx > 0.0 {
        (sxy / sxx, 0.0)
    } else {
        (0.0, 0.0)
    };
    (slope, bz, my - slope * mx - bz * mz)
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sx: f64,
    sz: f64,
    sy: f64,
    sxx: f64,
    szz: f64,
    sxz: f64,
    sxy: f64,
    szy: f64,
}

impl Moments {
    fn add(&mut self, x: f64, z: f64, y: f64) {
        self.sx += x;
        self.sz += z;
        self.sy += y;
        self.sxx += x * x;
        self.szz += z * z;
        self.sxz += x * z;
        self.sxy += x * y;
        self.szy += z * y;
    }

    fn sub(self, o: Self) -> Self {
        Self {
            sx: self.sx - o.sx,
            sz: self.sz - o.sz,
            sy: self.sy - o.sy,
            sxx: self.sxx - o.sxx,
            szz: self.szz - o.szz,
            sxz: self.sxz - o.sxz,
            sxy: self.sxy - o.sxy,
            szy: self.szy - o.szy,
        }
    }
}

impl LineFit {
    /// Least squares `σ_N ≈ slope·ln N + intercept + b/N` over `N = start..`.
    ///
    /// The `1/N` regressor absorbs the leading finite-size correction of
    /// harmonic-type sums, which otherwise biases the slope near the window start.
    fn new(start: usize, ys: &[f64]) -> Self {
        let ns = || (start..start + ys.len()).map(|n| n as f64);
        let count = ys.len() as f64;
        // center x and z before forming moments for conditioning
        let mx = ns().map(f64::ln).sum::<f64>() / count;
        let mz = ns().map(|n| 1.0 / n).sum::<f64>() / count;
        let mut m = Moments::default();
        for (n, &y) in ns().zip(ys) {
            m.add(n.ln() - mx, 1.0 / n - mz, y);
        }
        let (slope, bz, c0) = solve_moments(count, m);
        let intercept = c0 - slope * mx - bz * mz;
        let rss: f64 = ns()
            .zip(ys)
            .map(|(n, y)| {
                let e = y - (slope * n.ln() + intercept + bz / n);
                e * e
            })
            .sum();
        let rms = (rss / count).sqrt();
        let span = ((start + ys.len() - 1) as f64).ln() - (start as f64).ln();
        let scale = (slope.abs() * span).max(ys.iter().fold(0.0_f64, |m, y| m.max(y.abs())));
        let relative_residual = if scale > 0.0 { rms / scale } else { 0.0 };
        Self {
            slope,
            intercept,
            relative_residual,
        }
    }
}

/// Slope of the window fit ending at each `N` (NaN while the window holds
/// fewer than [`MIN_WINDOW`] points). Uses prefix sums, O(len).
pub fn running_slopes(sigma: &[f64], window: Window) -> Vec<f64> {
    let len = sigma.len();
    let mut prefix = vec![Moments::default(); len + 1];
    for (i, &y) in sigma.iter().enumerate() {
        let n = (i + 1) as f64;
        let mut m = prefix[i];
        m.add(n.ln(), 1.0 / n, y);
        prefix[i + 1] = m;
    }
    (1..=len)
        .map(|end| {
            let start = window.start(end);
            let count = end + 1 - start;
            if count < MIN_WINDOW {
                return f64::NAN;
            }
            solve_moments(count as f64, prefix[end].sub(prefix[start - 1])).0
        })
        .collect()
}
