//! Polytropic ideal gas closure.
//!
//! Everything is nondimensional: the temperature is `ε_s`, which for this
//! equation of state coincides with the specific internal energy, and the
//! specific entropy carries no additive reference constant, so that
//! `ε(ρ, s) = ρ^(γ-1) e^s / (γ-1)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGasEos {
    gamma: f64,
}

fn check(rho: f64, eps: f64) -> Result<()> {
    if !(rho > 0.0) {
        return Err(Error::Domain {
            field: "rho",
            value: rho,
        });
    }
    if !(eps > 0.0) {
        return Err(Error::Domain {
            field: "eps",
            value: eps,
        });
    }
    Ok(())
}

impl IdealGasEos {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "adiabatic index must exceed 1, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure(&self, rho: f64, eps: f64) -> Result<f64> {
        check(rho, eps)?;
        Ok((self.gamma - 1.0) * rho * eps)
    }

    pub fn sound_speed_sq(&self, rho: f64, eps: f64) -> Result<f64> {
        check(rho, eps)?;
        Ok(self.gamma * (self.gamma - 1.0) * eps)
    }

    /// `∂³(ρε)/∂ρ³` at fixed entropy.
    pub fn d3_rho_eps(&self, rho: f64, eps: f64) -> Result<f64> {
        check(rho, eps)?;
        let g = self.gamma;
        Ok(g * (g - 1.0) * (g - 2.0) * eps / (rho * rho))
    }

    /// `∂³ε/∂ρ³` at fixed entropy, the specific counterpart of
    /// [`d3_rho_eps`](Self::d3_rho_eps).
    pub fn d3_eps(&self, rho: f64, eps: f64) -> Result<f64> {
        check(rho, eps)?;
        let g = self.gamma;
        Ok((g - 1.0) * (g - 2.0) * (g - 3.0) * eps / (rho * rho * rho))
    }

    pub fn entropy(&self, rho: f64, eps: f64) -> Result<f64> {
        check(rho, eps)?;
        Ok(((self.gamma - 1.0) * eps * rho.powf(1.0 - self.gamma)).ln())
    }

    /// Inverse of [`entropy`](Self::entropy) in its second argument.
    pub fn eps_from_entropy(&self, rho: f64, s: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Domain {
                field: "rho",
                value: rho,
            });
        }
        Ok(rho.powf(self.gamma - 1.0) * s.exp() / (self.gamma - 1.0))
    }

    pub fn temperature(&self, rho: f64, eps: f64) -> Result<f64> {
        check(rho, eps)?;
        Ok(eps)
    }

    // Unchecked kernels for inner loops whose inputs were validated upstream.

    #[inline]
    pub(crate) fn p_raw(&self, rho: f64, eps: f64) -> f64 {
        (self.gamma - 1.0) * rho * eps
    }

    #[inline]
    pub(crate) fn cs_raw(&self, eps: f64) -> f64 {
        (self.gamma * (self.gamma - 1.0) * eps).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rejects_bad_gamma() {
        assert!(IdealGasEos::new(1.0).is_err());
        assert!(IdealGasEos::new(0.5).is_err());
        assert!(IdealGasEos::new(f64::NAN).is_err());
    }

    #[test]
    fn pressure_examples() {
        let e = IdealGasEos::new(1.4).unwrap();
        assert!(rel(e.pressure(1.0, 2.5).unwrap(), 1.0) < 1e-15);
        assert!(rel(e.pressure(0.125, 2.0).unwrap(), 0.1) < 1e-15);
        let e2 = IdealGasEos::new(2.0).unwrap();
        assert_eq!(e2.pressure(3.0, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn domain_errors_name_the_field() {
        let e = IdealGasEos::new(1.4).unwrap();
        match e.pressure(-1.0, 1.0) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "rho"),
            other => panic!("{other:?}"),
        }
        match e.sound_speed_sq(1.0, 0.0) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "eps"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sound_speed_examples() {
        let e = IdealGasEos::new(1.4).unwrap();
        assert!(rel(e.sound_speed_sq(1.0, 2.5).unwrap(), 1.4) < 1e-15);
        let e = IdealGasEos::new(5.0 / 3.0).unwrap();
        assert!(rel(e.sound_speed_sq(1.0, 0.9).unwrap(), 1.0) < 1e-15);
    }

    #[test]
    fn third_derivative_examples() {
        assert_eq!(IdealGasEos::new(2.0).unwrap().d3_eps(0.7, 3.0).unwrap(), 0.0);
        assert_eq!(IdealGasEos::new(3.0).unwrap().d3_eps(0.7, 3.0).unwrap(), 0.0);
        let v = IdealGasEos::new(1.4).unwrap().d3_eps(1.0, 1.0).unwrap();
        assert!(rel(v, 0.384) < 1e-14);

        assert_eq!(IdealGasEos::new(2.0).unwrap().d3_rho_eps(0.7, 3.0).unwrap(), 0.0);
        let v = IdealGasEos::new(3.0).unwrap().d3_rho_eps(2.0, 1.0).unwrap();
        assert!(rel(v, 1.5) < 1e-15);
        let v = IdealGasEos::new(1.4).unwrap().d3_rho_eps(1.0, 1.0).unwrap();
        assert!(rel(v, -0.336) < 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let e = IdealGasEos::new(1.4).unwrap();
        assert!(e.entropy(1.0, 2.5).unwrap().abs() < 1e-15);
        assert!(IdealGasEos::new(2.0).unwrap().entropy(2.0, 2.0).unwrap().abs() < 1e-15);
        let rho = std::f64::consts::E;
        let eps = 2.5 * rho.powf(0.4);
        let s = e.entropy(rho, eps).unwrap();
        assert!(s.abs() < 1e-14);
        assert!(rel(e.eps_from_entropy(rho, s).unwrap(), eps) < 1e-12);
    }

    #[test]
    fn temperature_is_eps() {
        let e = IdealGasEos::new(1.4).unwrap();
        assert_eq!(e.temperature(1.0, 2.5).unwrap(), 2.5);
        assert_eq!(e.temperature(0.125, 2.0).unwrap(), 2.0);
        assert_eq!(e.temperature(17.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn temperature_matches_entropy_derivative() {
        // ϑ = ∂ε/∂s at fixed ρ, by central differences on ε(ρ, s).
        let e = IdealGasEos::new(1.4).unwrap();
        for &(rho, eps) in &[(1.0, 2.5), (0.125, 2.0), (3.0, 1.0)] {
            let s = e.entropy(rho, eps).unwrap();
            let ds = 1e-5;
            let d = (e.eps_from_entropy(rho, s + ds).unwrap()
                - e.eps_from_entropy(rho, s - ds).unwrap())
                / (2.0 * ds);
            assert!(rel(d, e.temperature(rho, eps).unwrap()) < 1e-9);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn third_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]
            #[test]
            fn entropy_round_trip(rho in 0.01f64..10.0, eps in 0.01f64..10.0) {
                let e = IdealGasEos::new(1.4).unwrap();
                let s = e.entropy(rho, eps).unwrap();
                prop_assert!(rel(e.eps_from_entropy(rho, s).unwrap(), eps) < 1e-12);
            }
        }

        proptest! {
            #[test]
            fn sound_speed_is_isentropic_slope(
                rho in 0.01f64..10.0,
                eps in 0.01f64..10.0,
                gamma in 1.1f64..3.0,
            ) {
                let e = IdealGasEos::new(gamma).unwrap();
                let s = e.entropy(rho, eps).unwrap();
                let p = |r: f64| e.pressure(r, e.eps_from_entropy(r, s).unwrap()).unwrap();
                let dr = 1e-5 * rho;
                let fd = (p(rho + dr) - p(rho - dr)) / (2.0 * dr);
                prop_assert!(rel(fd, e.sound_speed_sq(rho, eps).unwrap()) < 1e-6);
            }

            #[test]
            fn third_derivative_matches_differences(
                rho in 0.01f64..10.0,
                eps in 0.01f64..10.0,
                gamma in 1.1f64..1.8,
            ) {
                let e = IdealGasEos::new(gamma).unwrap();
                let s = e.entropy(rho, eps).unwrap();
                let eps_s = |r: f64| e.eps_from_entropy(r, s).unwrap();
                let h = 1e-3 * rho;
                let fd = third_difference(|r| r * eps_s(r), rho, h);
                prop_assert!(rel(fd, e.d3_rho_eps(rho, eps).unwrap()) < 1e-4);
                let fd = third_difference(eps_s, rho, h);
                prop_assert!(rel(fd, e.d3_eps(rho, eps).unwrap()) < 1e-4);
            }
        }
    }
}
