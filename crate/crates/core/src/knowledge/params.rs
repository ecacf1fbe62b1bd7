use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How `observe` picks among several categories that all fit a percept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FitOrder {
    /// First fitting category in ascending id order.
    Oldest,
    /// First fitting category in descending id order, so categories produced by the
    /// latest split or merge take precedence over older overlapping ones.
    #[default]
    Newest,
}

/// Learning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Parameters {
    /// Probability of picking a uniformly random action.
    pub rho_ra: f64,
    /// Weight adaptation step.
    pub delta_aw: f64,
    /// Category merge threshold, compared against the raw weighted similarity
    /// whose range is `±(M + 1)`.
    pub theta_mc: f64,
    /// Interval-vector fold threshold on Δ, in `[0, 2]`.
    pub theta_mf: f64,
    #[serde(default)]
    pub fit_order: FitOrder,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            rho_ra: 0.0,
            delta_aw: 0.1,
            theta_mc: 1.0,
            theta_mf: 0.3,
            fit_order: FitOrder::default(),
        }
    }
}

impl Parameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64, range: &str| Err(Error::Config(format!("{name} = {v} is outside {range}")));
        if !(0.0..=1.0).contains(&self.rho_ra) {
            return bad("rho_ra", self.rho_ra, "[0, 1]");
        }
        if !(self.delta_aw >= 0.0 && self.delta_aw.is_finite()) {
            return bad("delta_aw", self.delta_aw, "[0, inf)");
        }
        if !self.theta_mc.is_finite() {
            return bad("theta_mc", self.theta_mc, "the finite reals");
        }
        if !(0.0..=2.0).contains(&self.theta_mf) {
            return bad("theta_mf", self.theta_mf, "[0, 2]");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert!(Parameters::default().validate().is_ok());
        let p = Parameters {
            rho_ra: 2.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = Parameters {
            delta_aw: -0.1,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = Parameters {
            theta_mf: 2.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = Parameters {
            theta_mc: f64::NAN,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = Parameters {
            theta_mc: -10.0,
            ..Default::default()
        };
        assert!(p.validate().is_ok());
    }
}
