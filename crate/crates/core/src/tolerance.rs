use serde::{Deserialize, Serialize};

use crate::error::{QmsError, Result};

/// Numerical thresholds shared by every decision procedure.
///
/// Reports embed the exact set in use so that any verdict can be reproduced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for numerical rank.
    pub rank: f64,
    /// Eigenvalue floor (relative to the operator norm) for positivity.
    pub psd: f64,
    /// Allowed deviation of a density's trace from one.
    pub trace: f64,
    /// Entrywise matrix equality.
    pub eq: f64,
    /// Real-part cutoff that places a generator eigenvalue on the imaginary axis.
    pub spec: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            psd: 1e-10,
            trace: 1e-9,
            eq: 1e-10,
            spec: 1e-8,
        }
    }
}

/// Partial override, as found in model files and on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<f64>,
}

impl Tolerances {
    /// Checks that every threshold lies in the open interval (0, 1).
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank", self.rank),
            ("psd", self.psd),
            ("trace", self.trace),
            ("eq", self.eq),
            ("spec", self.spec),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(QmsError::Validation {
                    what: format!("tolerance `{name}` must lie in (0, 1), got {v}"),
                    residual: v,
                });
            }
        }
        Ok(())
    }

    pub fn with_overrides(mut self, o: &ToleranceOverrides) -> Result<Self> {
        if let Some(v) = o.rank {
            self.rank = v;
        }
        if let Some(v) = o.psd {
            self.psd = v;
        }
        if let Some(v) = o.trace {
            self.trace = v;
        }
        if let Some(v) = o.eq {
            self.eq = v;
        }
        if let Some(v) = o.spec {
            self.spec = v;
        }
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn override_out_of_range_is_rejected() {
        let o = ToleranceOverrides {
            eq: Some(2.0),
            ..Default::default()
        };
        assert!(Tolerances::default().with_overrides(&o).is_err());
        let o = ToleranceOverrides {
            spec: Some(1e-6),
            ..Default::default()
        };
        let t = Tolerances::default().with_overrides(&o).unwrap();
        assert_eq!(t.spec, 1e-6);
        assert_eq!(t.eq, 1e-10);
    }
}
