//! Smoothed indicator penalty `h_μ(Gx) = 𝒟²_𝒳(Gx) / (2μ)`.

use crate::error::{Error, Result};
use crate::linops::dot;
use crate::sets::ConstraintChannel;

#[derive(Clone, Debug)]
pub struct SmoothedPenalty<'a> {
    channel: &'a ConstraintChannel,
    mu: f64,
}

impl<'a> SmoothedPenalty<'a> {
    pub fn new(channel: &'a ConstraintChannel, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::NonPositiveMu(mu));
        }
        Ok(SmoothedPenalty { channel, mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn channel(&self) -> &ConstraintChannel {
        self.channel
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.channel.residual(x)?;
        Ok(dot(&r, &r) / (2.0 * self.mu))
    }

    /// `(1/μ) Gᵀ(Gx − Π_𝒳(Gx))`
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.channel.residual(x)?;
        let mut g = self.channel.apply_gt(&r)?;
        g.iter_mut().for_each(|v| *v /= self.mu);
        Ok(g)
    }

    /// Lipschitz constant of [`Self::grad`], `L_G / μ`.
    pub fn smoothness(&self) -> f64 {
        self.channel.spectral_bound() / self.mu
    }
}

pub fn penalty_value(channel: &ConstraintChannel, mu: f64, x: &[f64]) -> Result<f64> {
    SmoothedPenalty::new(channel, mu)?.value(x)
}

pub fn penalty_grad(channel: &ConstraintChannel, mu: f64, x: &[f64]) -> Result<Vec<f64>> {
    SmoothedPenalty::new(channel, mu)?.grad(x)
}
