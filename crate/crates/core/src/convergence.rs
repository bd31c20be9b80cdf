//! Analytic convergence border `F / (mu^4 nu) = 1` and the sampled parameter set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Viscosity of the border curve that carries the dot set.
pub const DOT_SET_VISCOSITY: f64 = 0.01;

pub const REFERENCE_MODES: [u32; 5] = [1, 2, 3, 4, 5];
pub const REFERENCE_EXPONENTS: [u32; 4] = [0, 1, 2, 3];
pub const REFERENCE_VISCOSITIES: [f64; 6] = [0.01, 0.1, 0.3, 0.75, 1.0, 1.5];

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// `F / (mu^4 nu)`.
pub fn border_value(amplitude: f64, mu: f64, nu: f64) -> f64 {
    amplitude / (mu.powi(4) * nu)
}

/// Width on the border curve: `(F / nu)^(1/4)`.
pub fn border_mu(amplitude: f64, nu: f64) -> Result<f64> {
    positive("amplitude", amplitude)?;
    positive("nu", nu)?;
    Ok((amplitude / nu).sqrt().sqrt())
}

/// `true` iff `F / (mu^4 nu) < 1`; the border itself is non-convergent.
pub fn convergence_predicate(amplitude: f64, mu: f64, nu: f64) -> Result<bool> {
    positive("amplitude", amplitude)?;
    positive("mu", mu)?;
    positive("nu", nu)?;
    Ok(border_value(amplitude, mu, nu) < 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorderPoint {
    pub amplitude: f64,
    pub nu: f64,
    pub mu_border: f64,
}

impl BorderPoint {
    pub fn new(amplitude: f64, nu: f64) -> Result<Self> {
        Ok(Self {
            amplitude,
            nu,
            mu_border: border_mu(amplitude, nu)?,
        })
    }
}

/// Amplitude `F_n = 10^k / n`.
pub fn sample_amplitude(mode: u32, exponent: u32) -> f64 {
    10f64.powi(exponent as i32) / mode as f64
}

/// One `(n, k, F)` entry of the amplitude sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSample {
    pub mode: u32,
    pub exponent: u32,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub amplitudes: Vec<AmplitudeSample>,
    pub viscosities: Vec<f64>,
}

pub fn sample_set(modes: &[u32], exponents: &[u32], viscosities: &[f64]) -> SampleSet {
    let amplitudes = modes
        .iter()
        .flat_map(|&n| {
            exponents.iter().map(move |&k| AmplitudeSample {
                mode: n,
                exponent: k,
                amplitude: sample_amplitude(n, k),
            })
        })
        .collect();
    SampleSet {
        amplitudes,
        viscosities: viscosities.to_vec(),
    }
}

/// Modes 1..=5, `k = 0..=3` and the six reference viscosities.
pub fn reference_sample_set() -> SampleSet {
    sample_set(&REFERENCE_MODES, &REFERENCE_EXPONENTS, &REFERENCE_VISCOSITIES)
}

/// Width `margin * border_mu(F, 0.01)` on or above the dot-set curve.
pub fn dot_set_mu(amplitude: f64, margin: f64) -> Result<f64> {
    if !(margin.is_finite() && margin >= 1.0) {
        return Err(Error::param(
            "margin",
            format!("must be >= 1 to stay in the convergence region, got {margin}"),
        ));
    }
    Ok(margin * border_mu(amplitude, DOT_SET_VISCOSITY)?)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn border_examples() {
        assert_eq!(border_mu(1.0, 1.0).unwrap(), 1.0);
        assert!((border_mu(1000.0, 0.01).unwrap() - 10f64.powf(1.25)).abs() < 1e-12);
        assert!((border_mu(0.2, 0.01).unwrap() - 20f64.powf(0.25)).abs() < 1e-12);
        assert!(border_mu(0.0, 1.0).is_err());
        assert!(border_mu(1.0, -1.0).is_err());
    }

    #[test]
    fn predicate_examples() {
        assert!(!convergence_predicate(1.0, 2.0, 0.01).unwrap());
        assert!((border_value(1.0, 2.0, 0.01) - 6.25).abs() < 1e-12);
        assert!(convergence_predicate(1.0, 4.0, 0.01).unwrap());
        assert!((border_value(1.0, 4.0, 0.01) - 0.390625).abs() < 1e-12);
        assert!(convergence_predicate(0.0, 4.0, 0.01).is_err());
        assert!(convergence_predicate(1.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn border_is_excluded() {
        // exactly representable border: F = 16 nu at mu = 2
        assert!(!convergence_predicate(0.16, 2.0, 0.01).unwrap());
        assert!(!convergence_predicate(16.0, border_mu(16.0, 1.0).unwrap(), 1.0).unwrap());
    }

    #[test]
    fn sample_set_matches_formula() {
        let s = reference_sample_set();
        assert_eq!(s.amplitudes.len(), 20);
        let of = |n: u32| -> Vec<f64> {
            s.amplitudes.iter().filter(|a| a.mode == n).map(|a| a.amplitude).collect()
        };
        assert_eq!(of(1), vec![1.0, 10.0, 100.0, 1000.0]);
        assert_eq!(of(2), vec![0.5, 5.0, 50.0, 500.0]);
        assert_eq!(of(5), vec![0.2, 2.0, 20.0, 200.0]);
        assert_eq!(s.viscosities, REFERENCE_VISCOSITIES.to_vec());
    }

    #[test]
    fn dot_set_examples() {
        assert!((dot_set_mu(1.0, 1.0).unwrap() - 10f64.sqrt()).abs() < 1e-12);
        assert!((dot_set_mu(1000.0, 1.0).unwrap() - 17.782_794_100_389_23).abs() < 1e-12);
        let mu = dot_set_mu(0.2, 1.05).unwrap();
        assert!((mu - 1.05 * 20f64.powf(0.25)).abs() < 1e-12);
        assert!((mu - 2.2204).abs() < 1e-4);
        assert!(convergence_predicate(0.2, mu, 0.01).unwrap());
        assert!(dot_set_mu(1.0, 0.99).is_err());
    }

    proptest! {
        #[test]
        fn border_round_trip(f in 1e-3f64..1e4, nu in 1e-3f64..10.0) {
            let mu = border_mu(f, nu).unwrap();
            prop_assert!((border_value(f, mu, nu) - 1.0).abs() < 1e-12);
            prop_assert!(convergence_predicate(f, mu * (1.0 + 1e-6), nu).unwrap());
            prop_assert!(!convergence_predicate(f, mu * (1.0 - 1e-6), nu).unwrap());
        }

        #[test]
        fn border_scale_covariance(f in 1e-3f64..1e4, nu in 1e-3f64..10.0, c in 1e-3f64..1e3) {
            let a = border_mu(f, nu).unwrap();
            let b = border_mu(c * f, c * nu).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn border_monotonicity(f in 1e-3f64..1e4, nu in 1e-3f64..10.0, s in 1.001f64..10.0) {
            prop_assert!(border_mu(f * s, nu).unwrap() > border_mu(f, nu).unwrap());
            prop_assert!(border_mu(f, nu * s).unwrap() < border_mu(f, nu).unwrap());
        }
    }
}
