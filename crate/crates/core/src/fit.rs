//! Exponential rate fitting by least squares in log space.

use serde::Serialize;

use crate::error::{Error, Result};

/// Series whose values never exceed this are reported as "at floor"
/// instead of being fitted.
pub const VALUE_FLOOR: f64 = 1e-14;
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub log_constant: f64,
    /// RMS deviation of `ln y` from the fitted line.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits `y = exp(log_constant + rate t)` to the samples with `t` in `window`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{} samples in window [{}, {}], need {MIN_FIT_SAMPLES}",
            pts.len(),
            window.0,
            window.1
        )));
    }
    if let Some(&(t, y)) = pts.iter().find(|&&(_, y)| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::Fit(format!("nonpositive value {y} at t = {t}")));
    }
    let (rate, log_constant, residual) = log_line(&pts);
    Ok(DecayFit {
        rate,
        log_constant,
        residual,
        window,
        samples: pts.len(),
    })
}

fn log_line(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stl = 0.0;
    for &(t, y) in pts {
        stt += (t - tm) * (t - tm);
        stl += (t - tm) * (y.ln() - lm);
    }
    let rate = if stt > 0.0 { stl / stt } else { 0.0 };
    let c = lm - rate * tm;
    let ss: f64 = pts
        .iter()
        .map(|&(t, y)| {
            let d = y.ln() - (c + rate * t);
            d * d
        })
        .sum();
    (rate, c, (ss / n).sqrt())
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, ym - slope * xm))
}

/// True when every value in the window is at or below [`VALUE_FLOOR`].
pub fn at_floor(series: &[(f64, f64)], window: (f64, f64)) -> bool {
    series
        .iter()
        .filter(|&&(t, _)| t >= window.0 && t <= window.1)
        .all(|&(_, y)| y.abs() <= VALUE_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let t = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                (t, f(t))
            })
            .collect()
    }

    #[test]
    fn exact_exponential() {
        let s = sample(|t| 3.0 * (-2.0 * t).exp(), 0.0, 3.0, 50);
        let fit = fit_decay_rate(&s, (0.0, 3.0)).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-12);
        assert!((fit.log_constant - 3f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert_eq!(fit.samples, 50);
    }

    #[test]
    fn noisy_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = sample(
            |t| 3.0 * (-2.0 * t).exp() * (1.0 + rng.gen_range(-0.01..0.01)),
            0.0,
            3.0,
            50,
        );
        let fit = fit_decay_rate(&s, (0.0, 3.0)).unwrap();
        assert!((fit.rate + 2.0).abs() <= 0.05);
    }

    #[test]
    fn floor_offset_is_negligible() {
        let s = sample(|t| (-2.0 * t).exp() + 1e-9, 0.0, 3.0, 50);
        let fit = fit_decay_rate(&s, (0.0, 3.0)).unwrap();
        assert!((fit.rate + 2.0).abs() <= 0.02);
    }

    #[test]
    fn rejects_bad_input() {
        let s = sample(|t| t - 1.0, 0.0, 3.0, 50);
        assert!(matches!(fit_decay_rate(&s, (0.0, 3.0)), Err(Error::Fit(_))));
        let s = sample(|t| (-t).exp(), 0.0, 3.0, 5);
        assert!(matches!(fit_decay_rate(&s, (0.0, 3.0)), Err(Error::Fit(_))));
        assert!(at_floor(&sample(|_| 0.0, 0.0, 1.0, 10), (0.0, 1.0)));
    }
}
