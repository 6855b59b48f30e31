use crate::error::{Error, Result};
use crate::gradients::OracleMode;

/// Which theory schedule family to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Deterministic constraints: `μ_k = μ_c/√k`, `τ_k = τ₀/√(k+1)`.
    MostFw,
    /// Sampled constraints: `μ_k = μ_c/(k+1)^{1/4}`, `τ_k = τ₀/(k+1)^{1/4}`.
    MostFwPlus,
}

/// Problem constants that enter the step sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemConstants {
    /// Smoothness of the objective.
    pub l: f64,
    /// `‖G‖²`
    pub l_g: f64,
    /// Diameter of the hard set.
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleParams {
    pub mu_c: f64,
    pub tau_0: f64,
    pub constants: ProblemConstants,
    pub variant: Variant,
    pub mode: OracleMode,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleValues {
    pub gamma: f64,
    pub eta: f64,
    pub mu: f64,
    pub rho: f64,
    pub tau: f64,
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_c > 0.0 && self.mu_c.is_finite()) {
            return Err(Error::NonPositiveMu(self.mu_c));
        }
        if !(self.tau_0 >= 0.0 && self.tau_0.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau0 must be finite and >= 0, got {}", self.tau_0)));
        }
        Ok(())
    }

    pub fn mu(&self, k: usize) -> f64 {
        let k = k as f64;
        match self.variant {
            Variant::MostFw => self.mu_c / k.sqrt(),
            Variant::MostFwPlus => self.mu_c / (k + 1.0).powf(0.25),
        }
    }

    pub fn tau(&self, k: usize) -> f64 {
        let k1 = k as f64 + 1.0;
        match self.variant {
            Variant::MostFw => self.tau_0 / k1.sqrt(),
            Variant::MostFwPlus => self.tau_0 / k1.powf(0.25),
        }
    }

    /// Step-size values at iteration `k ≥ 1` for decision dimension `m`.
    pub fn at(&self, k: usize, m: usize) -> Result<ScheduleValues> {
        if k == 0 {
            return Err(Error::BadK(k));
        }
        let kf = k as f64;
        let rho = match self.mode {
            OracleMode::Szo => self.constants.d / ((m as f64).sqrt() * (kf + 1.0)),
            OracleMode::Sfo => 0.0,
        };
        Ok(ScheduleValues {
            gamma: 1.0 / kf,
            eta: 2.0 / (kf + 1.0),
            mu: self.mu(k),
            rho,
            tau: self.tau(k),
        })
    }

    /// Checks `μ_k ≥ μ_{k−1}(1 − η_k)` for `k ≥ 2`.
    pub fn check_mu_condition(&self, k: usize) -> Result<()> {
        if k < 2 {
            return Ok(());
        }
        let mu = self.mu(k);
        let bound = self.mu(k - 1) * (1.0 - 2.0 / (k as f64 + 1.0));
        if mu >= bound {
            Ok(())
        } else {
            Err(Error::ScheduleViolation { k, mu, bound })
        }
    }
}

pub fn schedule(params: &ScheduleParams, k: usize, m: usize) -> Result<ScheduleValues> {
    params.at(k, m)
}
