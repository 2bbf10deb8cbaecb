//! Simple linear regression with leverage and Cook's distance.

/// Least-squares line through `(xs[i], ys[i])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared residuals.
    pub sse: f64,
}

/// Ordinary least squares on centered sums. Needs at least two distinct x.
pub fn ols_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len(), "xs and ys must pair up");
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = y_mean - slope * x_mean;
    let sse = residuals(xs, ys, slope, intercept).iter().map(|e| e * e).sum();
    LineFit {
        slope,
        intercept,
        sse,
    }
}

pub fn residuals(xs: &[f64], ys: &[f64], slope: f64, intercept: f64) -> Vec<f64> {
    xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect()
}

/// Diagonal of the hat matrix for a line fit: `1/n + (x_i - x̄)² / Sxx`.
pub fn leverage(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    xs.iter()
        .map(|x| 1.0 / n + if sxx > 0.0 { (x - x_mean).powi(2) / sxx } else { 0.0 })
        .collect()
}

/// Number of fitted parameters (slope and intercept).
pub const LINE_PARAMS: usize = 2;

/// Relative residual size below which a fit counts as exact.
const PERFECT_FIT_TOLERANCE: f64 = 1e-12;

/// Cook's distance of every point for the line `slope * x + intercept`:
///
/// `D_i = e_i² / (p·s²) · h_ii / (1 − h_ii)²`, with `p = 2` and
/// `s² = Σe² / (n − p)`.
///
/// An exact fit has no influential points, so all distances are 0 then.
pub fn cooks_distances(xs: &[f64], ys: &[f64], slope: f64, intercept: f64) -> Vec<f64> {
    let n = xs.len();
    let e = residuals(xs, ys, slope, intercept);
    if n <= LINE_PARAMS {
        return vec![0.0; n];
    }
    let sse: f64 = e.iter().map(|r| r * r).sum();
    let scale = ys.iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
    let rms = (sse / n as f64).sqrt();
    if sse == 0.0 || rms <= PERFECT_FIT_TOLERANCE * scale {
        return vec![0.0; n];
    }
    let s2 = sse / (n - LINE_PARAMS) as f64;
    let p = LINE_PARAMS as f64;
    leverage(xs)
        .iter()
        .zip(&e)
        .map(|(h, r)| {
            let one_minus_h = 1.0 - h;
            (r * r / (p * s2)) * (h / (one_minus_h * one_minus_h))
        })
        .collect()
}
