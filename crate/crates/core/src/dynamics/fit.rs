use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("dynamics", "a line fit needs at least two paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("dynamics", "a line fit needs distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Abscissa of the vertex of the parabola through the sample maximum and its
/// two neighbours; the sample itself when the maximum sits at an end.
pub fn parabolic_peak(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::domain("dynamics", "peak search needs a nonempty grid"));
    }
    let i = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty");
    if i == 0 || i + 1 == xs.len() {
        return Ok(xs[i]);
    }
    let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Ok(x1);
    }
    Ok(x1 - 0.5 * num / den)
}

/// `y ≈ offset + a·cos(ωt) + b·sin(ωt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub angular_frequency: f64,
    pub offset: f64,
    pub cos_amplitude: f64,
    pub sin_amplitude: f64,
    pub rms_residual: f64,
}

impl Sinusoid {
    pub fn amplitude(&self) -> f64 {
        self.cos_amplitude.hypot(self.sin_amplitude)
    }

    pub fn value(&self, t: f64) -> f64 {
        let w = self.angular_frequency * t;
        self.offset + self.cos_amplitude * w.cos() + self.sin_amplitude * w.sin()
    }
}

fn fit_at(times: &[f64], values: &[f64], w: f64) -> Sinusoid {
    let mut a = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let row = Vector3::new(1.0, (w * t).cos(), (w * t).sin());
        a += row * row.transpose();
        rhs += row * y;
    }
    let c = a
        .try_inverse()
        .map(|inv| inv * rhs)
        .unwrap_or_else(|| Vector3::new(values.iter().sum::<f64>() / values.len() as f64, 0.0, 0.0));
    let mut fit = Sinusoid {
        angular_frequency: w,
        offset: c[0],
        cos_amplitude: c[1],
        sin_amplitude: c[2],
        rms_residual: 0.0,
    };
    let ss: f64 = times.iter().zip(values).map(|(&t, &y)| (y - fit.value(t)).powi(2)).sum();
    fit.rms_residual = (ss / times.len() as f64).sqrt();
    fit
}

/// Single-tone least-squares fit with the angular frequency searched over
/// `[w_min, w_max]`: a scan over `grid` trial frequencies followed by a
/// golden-section refinement of the best bracket.
pub fn fit_sinusoid(times: &[f64], values: &[f64], w_min: f64, w_max: f64, grid: usize) -> Result<Sinusoid> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(Error::domain("dynamics", "a sinusoid fit needs at least four samples"));
    }
    if !(w_min > 0.0 && w_max > w_min) || grid < 3 {
        return Err(Error::domain("dynamics", "invalid frequency search window"));
    }
    let trial = |k: usize| w_min + (w_max - w_min) * k as f64 / (grid - 1) as f64;
    let best = (0..grid)
        .map(|k| (k, fit_at(times, values, trial(k)).rms_residual))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .expect("grid is nonempty");
    let mut lo = trial(best.saturating_sub(1));
    let mut hi = trial((best + 1).min(grid - 1));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let residual = |w: f64| fit_at(times, values, w).rms_residual;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (residual(c), residual(d));
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-14 * hi.abs() {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = residual(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = residual(d);
        }
    }
    Ok(fit_at(times, values, 0.5 * (lo + hi)))
}
