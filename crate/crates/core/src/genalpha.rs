//! Generalized-α parameters.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenAlphaParams {
    pub rho_inf: f64,
    pub alpha_m: f64,
    pub alpha_f: f64,
    pub gamma: f64,
    pub tau: f64,
    /// `τγα_f/α_m`, the weight of the rate unknown inside the spatial form.
    pub zeta: f64,
}

impl GenAlphaParams {
    pub fn new(rho_inf: f64, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho_inf) {
            return Err(invalid!("rho_inf must lie in [0, 1] (got {rho_inf})"));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid!("time step must be > 0 (got {tau})"));
        }
        let alpha_m = 0.5 * (3.0 - rho_inf) / (1.0 + rho_inf);
        let alpha_f = 1.0 / (1.0 + rho_inf);
        let gamma = 0.5 + alpha_m - alpha_f;
        Ok(Self {
            rho_inf,
            alpha_m,
            alpha_f,
            gamma,
            tau,
            zeta: tau * gamma * alpha_f / alpha_m,
        })
    }

    /// Number of steps to reach `t_final`; `t_final` must be a multiple of `τ`
    /// to within a relative `1e-9` of one step.
    pub fn steps_to(&self, t_final: f64) -> Result<usize> {
        let n = t_final / self.tau;
        let k = libm::round(n);
        if !(k >= 1.0) || libm::fabs(n - k) > 1e-9 * k.max(1.0) {
            return Err(invalid!(
                "t_final {t_final} is not a positive multiple of tau {}",
                self.tau
            ));
        }
        Ok(k as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let p = GenAlphaParams::new(1.0, 0.1).unwrap();
        assert_eq!((p.alpha_m, p.alpha_f, p.gamma), (0.5, 0.5, 0.5));
        let p = GenAlphaParams::new(0.0, 0.1).unwrap();
        assert_eq!((p.alpha_m, p.alpha_f, p.gamma), (1.5, 1.0, 1.0));
        let p = GenAlphaParams::new(0.9, 1e-3).unwrap();
        assert!((p.alpha_m - 0.552632).abs() < 1e-6);
        assert!((p.alpha_f - 0.526316).abs() < 1e-6);
        assert!((p.gamma - 0.526316).abs() < 1e-6);
        // ζ = τγα_f/α_m = 1e-3 · (10/19)(10/19)/(21/38)
        let zeta = 1e-3 * (10.0 / 19.0) * (10.0 / 19.0) / (2.1 / 3.8);
        assert!((p.zeta - zeta).abs() < 1e-15);
        assert!((p.zeta - 5.0125e-4).abs() < 1e-7);
    }

    #[test]
    fn zeta_positive_and_rejections() {
        for k in 0..=10 {
            let p = GenAlphaParams::new(k as f64 / 10.0, 1e-4).unwrap();
            assert!(p.zeta > 0.0);
        }
        assert!(GenAlphaParams::new(1.1, 0.1).is_err());
        assert!(GenAlphaParams::new(-0.1, 0.1).is_err());
        assert!(GenAlphaParams::new(0.5, 0.0).is_err());
        let p = GenAlphaParams::new(0.5, 5e-3).unwrap();
        assert_eq!(p.steps_to(1.0).unwrap(), 200);
        assert_eq!(p.steps_to(5e-3).unwrap(), 1);
        assert!(p.steps_to(1.0021).is_err());
    }
}
