//! Axisymmetric cuts of null infinity, `f(θ)`, with exact colatitude
//! derivatives up to fourth order.
//!
//! Tabulated data is represented by a least-squares cosine series
//! `Σ aₙ cos(nθ)`, which is even about both poles and therefore a smooth
//! function on the sphere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{parse_theta_value_csv, SphereFunction, SphereGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cut {
    Zero,
    /// `a cos θ`
    CosTheta { amplitude: f64 },
    /// `a (3cos²θ - 1)/2`
    Legendre2 { amplitude: f64 },
    /// `Σ aₙ cos(nθ)`
    CosineSeries { coefficients: Vec<f64> },
}

impl Default for Cut {
    fn default() -> Self {
        Cut::Zero
    }
}

impl Cut {
    /// `[f, f', f'', f''', f'''']` at colatitude `θ`.
    pub fn jet(&self, theta: f64) -> [f64; 5] {
        let (s, c) = theta.sin_cos();
        match self {
            Cut::Zero => [0.0; 5],
            Cut::CosTheta { amplitude: a } => [a * c, -a * s, -a * c, a * s, a * c],
            Cut::Legendre2 { amplitude: a } => {
                // (3cos²θ - 1)/2 = (3cos2θ + 1)/4
                let (s2, c2) = (2.0 * theta).sin_cos();
                let k = 0.75 * a;
                [
                    k * c2 + 0.25 * a,
                    -2.0 * k * s2,
                    -4.0 * k * c2,
                    8.0 * k * s2,
                    16.0 * k * c2,
                ]
            }
            Cut::CosineSeries { coefficients } => {
                let mut out = [0.0; 5];
                for (n, &a) in coefficients.iter().enumerate() {
                    let nf = n as f64;
                    let (sn, cn) = (nf * theta).sin_cos();
                    out[0] += a * cn;
                    out[1] -= a * nf * sn;
                    out[2] -= a * nf * nf * cn;
                    out[3] += a * nf.powi(3) * sn;
                    out[4] += a * nf.powi(4) * cn;
                }
                out
            }
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.jet(theta)[0]
    }

    pub fn negated(&self) -> Cut {
        match self {
            Cut::Zero => Cut::Zero,
            Cut::CosTheta { amplitude } => Cut::CosTheta {
                amplitude: -amplitude,
            },
            Cut::Legendre2 { amplitude } => Cut::Legendre2 {
                amplitude: -amplitude,
            },
            Cut::CosineSeries { coefficients } => Cut::CosineSeries {
                coefficients: coefficients.iter().map(|a| -a).collect(),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Cut::Zero => true,
            Cut::CosTheta { amplitude } | Cut::Legendre2 { amplitude } => *amplitude == 0.0,
            Cut::CosineSeries { coefficients } => coefficients.iter().all(|&a| a == 0.0),
        }
    }

    pub fn sample(&self, n_theta: usize) -> SphereFunction {
        SphereFunction::from_axisymmetric_fn(n_theta, |t| self.value(t))
    }

    /// Least-squares cosine series through `(θ, f)` samples.
    ///
    /// The number of modes is `min(max_modes, ⌊n/2⌋)`.
    pub fn fit_samples(samples: &[(f64, f64)], max_modes: usize) -> Result<Cut> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Parse(format!("need at least 2 samples, got {n}")));
        }
        for &(t, v) in samples {
            if !(0.0..=std::f64::consts::PI).contains(&t) || !v.is_finite() {
                return Err(Error::Domain(format!("bad sample (θ = {t}, f = {v})")));
            }
        }
        let modes = max_modes.min(n / 2).max(1);
        let a = DMatrix::from_fn(n, modes, |i, k| (k as f64 * samples[i].0).cos());
        let b = DVector::from_iterator(n, samples.iter().map(|s| s.1));
        let svd = a.svd(true, true);
        let x = svd
            .solve(&b, 1e-12)
            .map_err(|e| Error::Domain(format!("cosine fit failed: {e}")))?;
        Ok(Cut::CosineSeries {
            coefficients: x.iter().copied().collect(),
        })
    }

    /// Parse a `theta,value` CSV and fit it.
    pub fn from_csv(text: &str, max_modes: usize) -> Result<Cut> {
        Self::fit_samples(&parse_theta_value_csv(text)?, max_modes)
    }

    pub fn from_sphere_function(f: &SphereFunction, max_modes: usize) -> Result<Cut> {
        let g: SphereGrid = f.grid;
        let samples: Vec<_> = (0..g.n_theta).map(|j| (g.theta(j), f.at(j, 0))).collect();
        Self::fit_samples(&samples, max_modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(cut: &Cut) {
        let h = 1e-4;
        for &t in &[0.3, 1.1, 2.0, 2.9] {
            let jp = cut.jet(t + h);
            let jm = cut.jet(t - h);
            let j0 = cut.jet(t);
            for k in 0..4 {
                let fd = (jp[k] - jm[k]) / (2.0 * h);
                assert!((fd - j0[k + 1]).abs() < 1e-6, "order {k} at θ = {t}");
            }
        }
    }

    #[test]
    fn analytic_jets_are_consistent() {
        fd_check(&Cut::CosTheta { amplitude: 0.2 });
        fd_check(&Cut::Legendre2 { amplitude: 0.7 });
        fd_check(&Cut::CosineSeries {
            coefficients: vec![0.1, -0.3, 0.05, 0.02],
        });
    }

    #[test]
    fn legendre2_value() {
        let cut = Cut::Legendre2 { amplitude: 1.0 };
        for &t in &[0.0, 0.4, 1.2, 3.0] {
            let c: f64 = f64::cos(t);
            assert!((cut.value(t) - 0.5 * (3.0 * c * c - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn tabulated_fit_recovers_low_modes() {
        let exact = Cut::Legendre2 { amplitude: 0.3 };
        let f = exact.sample(32);
        let fit = Cut::from_csv(&f.to_csv(), 8).unwrap();
        for &t in &[0.05, 0.8, 1.6, 3.1] {
            let (a, b) = (fit.jet(t), exact.jet(t));
            for k in 0..5 {
                assert!((a[k] - b[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn negation() {
        let c = Cut::CosTheta { amplitude: 0.2 };
        assert_eq!(c.negated().value(0.0), -0.2);
        assert!(Cut::Zero.is_zero());
        assert!(!c.is_zero());
    }
}
