use crate::error::{Error, Result};

/// The five physical parameters shared by every module.
///
/// `b` is the signed connectivity parameter: `b > 0` excitatory,
/// `b < 0` inhibitory, `b = 0` uncoupled (linear system).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Diffusion coefficient (default 1).
    pub a: f64,
    /// Connectivity parameter (signed).
    pub b: f64,
    /// Reset potential V_R.
    pub v_reset: f64,
    /// Threshold potential V_F.
    pub v_thresh: f64,
    /// Synaptic delay d >= 0.
    pub delay: f64,
}

impl ModelParams {
    /// Default parameters a = 1, V_R = 1, V_F = 2 with the given connectivity
    /// and no delay.
    pub fn with_b(b: f64) -> Self {
        ModelParams {
            a: 1.0,
            b,
            v_reset: 1.0,
            v_thresh: 2.0,
            delay: 0.0,
        }
    }

    pub fn with_delay(mut self, d: f64) -> Self {
        self.delay = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_reset < self.v_thresh) {
            return Err(Error::InvalidParams(format!(
                "V_R = {} must be below V_F = {}",
                self.v_reset, self.v_thresh
            )));
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParams(format!("a = {} must be positive", self.a)));
        }
        if !(self.delay >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "delay = {} must be nonnegative",
                self.delay
            )));
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidParams(format!("b = {} must be finite", self.b)));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::with_b(0.0)
    }
}
