use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(x_min, x_max)` of the samples used.
    pub window: (f64, f64),
    pub samples: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<FitReport> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("fit abscissa {} vs ordinate {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Input(format!("fit needs at least 3 samples, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::Input("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitReport { slope, intercept: my - slope * mx, r2, window: (lo, hi), samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|t| -0.5 * t + 2.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 2.0).abs() < 1e-15);
        assert_eq!(f.r2, 1.0);
        assert!(linear_fit(&x[..2], &y[..2]).is_err());
    }
}
