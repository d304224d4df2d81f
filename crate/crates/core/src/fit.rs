//! Least-squares fits of gate-count curves against the threshold θ.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `n(θ) = coefficient · θ^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub exponent: f64,
    /// RMS of `ln n − ln n̂` over the fitted points.
    pub rms_log_residual: f64,
    pub points: usize,
}

impl PowerLaw {
    pub fn eval(&self, theta: f64) -> f64 {
        self.coefficient * theta.powf(self.exponent)
    }
}

/// `n(θ) = c0 + c1·θ + c2·θ² …`, lowest order first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coefficients: Vec<f64>,
    pub rms_residual: f64,
    pub points: usize,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }

    /// Stationary point of a quadratic; `None` for lower degrees.
    pub fn vertex(&self) -> Option<f64> {
        match self.coefficients[..] {
            [_, b, a] if a != 0.0 => Some(-b / (2.0 * a)),
            _ => None,
        }
    }
}

/// Fits `ln n = ln A + k ln θ` over the points with `n > 0` and `θ > 0`.
pub fn fit_power_law(theta: &[f64], counts: &[f64]) -> Result<PowerLaw> {
    check_lengths(theta, counts)?;
    let (lx, ly): (Vec<f64>, Vec<f64>) = theta
        .iter()
        .zip(counts)
        .filter(|&(&t, &n)| t > 0.0 && n > 0.0)
        .map(|(t, n)| (t.ln(), n.ln()))
        .unzip();
    if lx.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 3 positive points, got {}",
            lx.len()
        )));
    }
    let line = least_squares(&lx, &ly, 1)?;
    Ok(PowerLaw {
        coefficient: line.coefficients[0].exp(),
        exponent: line.coefficients[1],
        rms_log_residual: line.rms_residual,
        points: line.points,
    })
}

/// Ordinary least-squares polynomial of degree 0, 1 or 2.
pub fn fit_poly(theta: &[f64], counts: &[f64], degree: usize) -> Result<Polynomial> {
    check_lengths(theta, counts)?;
    if degree > 2 {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree {degree} exceeds 2"
        )));
    }
    if theta.len() <= degree {
        return Err(Error::InsufficientData(format!(
            "degree-{degree} fit needs more than {degree} points, got {}",
            theta.len()
        )));
    }
    least_squares(theta, counts, degree)
}

fn check_lengths(theta: &[f64], counts: &[f64]) -> Result<()> {
    if theta.len() != counts.len() {
        return Err(Error::InvalidParameter(format!(
            "{} θ values but {} counts",
            theta.len(),
            counts.len()
        )));
    }
    if theta.iter().chain(counts).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite fit input".into()));
    }
    Ok(())
}

// The abscissa is centred and scaled before building the Vandermonde
// matrix so that θ ∈ [1e-4, 5e-2] does not ruin its conditioning; the
// coefficients are mapped back afterwards.
fn least_squares(x: &[f64], y: &[f64], degree: usize) -> Result<Polynomial> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let spread = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let scale = if spread > 0.0 { spread } else { 1.0 };
    let design = DMatrix::from_fn(n, degree + 1, |i, j| ((x[i] - mean) / scale).powi(j as i32));
    let rhs = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let rank = svd.rank(1e-12 * svd.singular_values.max());
    if rank < degree + 1 {
        return Err(Error::InsufficientData(format!(
            "abscissae support rank {rank}, degree {degree} needs {}",
            degree + 1
        )));
    }
    let z = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Invariant(e.to_string()))?;
    let resid = &design * &z - &rhs;
    let rms_residual = (resid.norm_squared() / n as f64).sqrt();

    // Expand Σ z_j ((x − m)/s)^j into powers of x.
    let mut coefficients = vec![0.0; degree + 1];
    for (j, zj) in z.iter().enumerate() {
        let w = zj / scale.powi(j as i32);
        for (i, c) in coefficients.iter_mut().enumerate().take(j + 1) {
            *c += w * binomial(j, i) as f64 * (-mean).powi((j - i) as i32);
        }
    }
    Ok(Polynomial {
        coefficients,
        rms_residual,
        points: n,
    })
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// The θ grid used for the RC sweep: 0.0001 to 0.05 in steps of 0.0001.
pub fn theta_grid() -> Vec<f64> {
    (1..=500).map(|i| i as f64 * 1e-4).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let t = theta_grid();
        let n = t.iter().map(|&x| f(x)).collect();
        (t, n)
    }

    #[test]
    fn grid_spans_sweep_range() {
        let t = theta_grid();
        assert_eq!(t.len(), 500);
        assert_relative_eq!(t[0], 0.0001);
        assert_relative_eq!(t[499], 0.05);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn recovers_serial_mode_laws() {
        for (a, k) in [(72.0, -0.98), (2203.0, -0.48), (0.02, -1.6)] {
            let (t, n) = sample(|x| a * f64::powf(x, k));
            let fit = fit_power_law(&t, &n).unwrap();
            assert!((fit.exponent - k).abs() < 1e-9, "{fit:?}");
            assert_relative_eq!(fit.coefficient, a, max_relative = 1e-9);
            assert!(fit.rms_log_residual < 1e-9);
        }
    }

    #[test]
    fn constant_counts_have_zero_exponent() {
        let (t, n) = sample(|_| 17.0);
        let fit = fit_power_law(&t, &n).unwrap();
        assert!(fit.exponent.abs() < 1e-9);
        assert_relative_eq!(fit.coefficient, 17.0, max_relative = 1e-9);
    }

    #[test]
    fn zero_counts_are_skipped() {
        let (t, mut n) = sample(|x| 3.0 * x.powf(-0.5));
        for v in n.iter_mut().step_by(2) {
            *v = 0.0;
        }
        let fit = fit_power_law(&t, &n).unwrap();
        assert_eq!(fit.points, 250);
        assert!((fit.exponent + 0.5).abs() < 1e-9);
    }

    #[test]
    fn too_few_positive_points() {
        let t = [0.1, 0.2, 0.3, 0.4];
        let n = [0.0, 5.0, 0.0, 2.0];
        assert!(matches!(
            fit_power_law(&t, &n),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            fit_power_law(&t, &n[..3]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn exact_line() {
        let (t, n) = sample(|x| -3.5 + 1234.5 * x);
        let fit = fit_poly(&t, &n, 1).unwrap();
        assert_relative_eq!(fit.coefficients[0], -3.5, max_relative = 1e-9);
        assert_relative_eq!(fit.coefficients[1], 1234.5, max_relative = 1e-9);
    }

    #[test]
    fn parallel_and_line() {
        let (t, n) = sample(|x| -1.72e6 + 2.25e8 * x);
        let fit = fit_poly(&t, &n, 1).unwrap();
        assert_relative_eq!(fit.coefficients[1], 2.25e8, max_relative = 1e-3);
        assert_relative_eq!(fit.coefficients[0], -1.72e6, max_relative = 1e-6);
    }

    #[test]
    fn select_parabola_vertex() {
        // As printed, the quadratic term is too weak to bend the curve
        // anywhere near the sweep range.
        let (t, n) = sample(|x| 9.61e6 + 1.21e9 * x - 2.7 * x * x);
        let fit = fit_poly(&t, &n, 2).unwrap();
        assert_relative_eq!(fit.coefficients[1], 1.21e9, max_relative = 1e-6);
        assert!(fit.vertex().unwrap() > 1e6);

        // With the quadratic term scaled by 1e10 the peak lands at θ ≈ 0.0224.
        let (t, n) = sample(|x| 9.61e6 + 1.21e9 * x - 2.7e10 * x * x);
        let fit = fit_poly(&t, &n, 2).unwrap();
        let peak = fit.vertex().unwrap();
        assert!((peak - 0.023).abs() < 1e-3, "{peak}");
        assert_relative_eq!(peak, 1.21e9 / (2.0 * 2.7e10), max_relative = 1e-9);
    }

    #[test]
    fn degree_limits() {
        let t = [1.0, 2.0, 3.0];
        assert!(fit_poly(&t, &t, 3).is_err());
        assert!(fit_poly(&t[..2], &t[..2], 2).is_err());
        let flat = [2.0, 2.0, 2.0];
        assert!(matches!(
            fit_poly(&flat, &t, 1),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn eval_matches_coefficients() {
        let p = Polynomial {
            coefficients: vec![1.0, -2.0, 3.0],
            rms_residual: 0.0,
            points: 0,
        };
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.vertex(), Some(2.0 / 6.0));
    }
}
