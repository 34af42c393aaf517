use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use liesys_core::StepperConfig;

use crate::error::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Ck,
    LimitCycle,
    Convergence,
    RiccatiCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodName {
    Magnus2,
    Magnus4,
    Rkmk,
    Rk4,
}

impl MethodName {
    pub const GEOMETRIC: [MethodName; 3] = [MethodName::Magnus2, MethodName::Magnus4, MethodName::Rkmk];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Magnus2 => "magnus2",
            MethodName::Magnus4 => "magnus4",
            MethodName::Rkmk => "rkmk",
            MethodName::Rk4 => "rk4",
        }
    }

    /// `None` for the direct RK4 baseline.
    pub fn config(self) -> Option<StepperConfig> {
        match self {
            MethodName::Magnus2 => Some(StepperConfig::magnus2()),
            MethodName::Magnus4 => Some(StepperConfig::magnus4()),
            MethodName::Rkmk => Some(StepperConfig::rkmk4()),
            MethodName::Rk4 => None,
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "magnus2" => Ok(MethodName::Magnus2),
            "magnus4" => Ok(MethodName::Magnus4),
            "rkmk" => Ok(MethodName::Rkmk),
            "rk4" => Ok(MethodName::Rk4),
            other => Err(HarnessError::Invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resolution {
    Steps(usize),
    StepSize(f64),
}

/// Parameters of one harness run. [`RunRequest::new`] fills in the defaults of
/// the chosen experiment; every field may be overridden afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRequest {
    pub experiment: Experiment,
    /// `None` selects the experiment's default method set.
    pub method: Option<MethodName>,
    pub kappa1: f64,
    pub kappa2: f64,
    pub t0: f64,
    pub t1: f64,
    /// `None` selects the experiment's default step.
    pub resolution: Option<Resolution>,
    pub x0: Option<Vec<f64>>,
    pub ref_steps: Option<usize>,
    pub out: PathBuf,
}

impl RunRequest {
    pub fn new(experiment: Experiment, out: PathBuf) -> Self {
        let (t0, t1) = match experiment {
            Experiment::Ck | Experiment::Convergence => (3.0, 4.0),
            Experiment::LimitCycle => (0.0, 2.0),
            Experiment::RiccatiCheck => (0.0, 1.0),
        };
        Self {
            experiment,
            method: None,
            kappa1: 0.8,
            kappa2: -0.5,
            t0,
            t1,
            resolution: None,
            x0: None,
            ref_steps: None,
            out,
        }
    }

    pub fn initial_point(&self) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| match self.experiment {
            Experiment::Ck | Experiment::Convergence => vec![1.0, 1.0, 1.0],
            Experiment::LimitCycle => vec![0.0, 1.0],
            Experiment::RiccatiCheck => vec![0.0, 1.0, -1.0, 0.5],
        })
    }

    fn expected_dim(&self) -> usize {
        match self.experiment {
            Experiment::Ck | Experiment::Convergence => 3,
            Experiment::LimitCycle => 2,
            Experiment::RiccatiCheck => 4,
        }
    }

    fn default_resolution(&self) -> Resolution {
        match self.experiment {
            Experiment::RiccatiCheck => Resolution::StepSize(1e-3),
            _ => Resolution::StepSize(0.1),
        }
    }

    pub fn span(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Number of steps for `resolution` on this request's interval. Step sizes
    /// must divide the interval.
    pub fn steps_for(&self, resolution: Resolution) -> Result<usize, HarnessError> {
        let span = self.span();
        match resolution {
            Resolution::Steps(n) => Ok(n),
            Resolution::StepSize(h) => {
                if h.is_nan() || h <= 0.0 || h.is_infinite() {
                    return Err(HarnessError::Invalid(format!("step size {h} must be positive")));
                }
                let n = (span / h).round();
                if (n * h - span).abs() > 1e-9 * span.abs().max(1.0) {
                    return Err(HarnessError::Invalid(format!(
                        "step size {h} does not divide the interval [{}, {}]",
                        self.t0, self.t1
                    )));
                }
                Ok(n as usize)
            }
        }
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution.unwrap_or_else(|| self.default_resolution())
    }

    pub fn steps(&self) -> Result<usize, HarnessError> {
        self.steps_for(self.resolution())
    }

    /// Reference steps: the explicit value, else `1000·N`.
    pub fn reference_steps(&self) -> Result<usize, HarnessError> {
        let n = self.steps()?;
        Ok(self.ref_steps.unwrap_or(1000 * n))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |m: String| Err(HarnessError::Invalid(m));
        if !self.t0.is_finite() || !self.t1.is_finite() {
            return invalid("interval bounds must be finite".into());
        }
        let zero_length_ok = self.experiment == Experiment::LimitCycle;
        if self.t1 < self.t0 || (self.t1 == self.t0 && !zero_length_ok) {
            return invalid(format!("t1 = {} must exceed t0 = {}", self.t1, self.t0));
        }
        if !self.kappa1.is_finite() || !self.kappa2.is_finite() {
            return invalid("curvature parameters must be finite".into());
        }
        let x0 = self.initial_point();
        if x0.len() != self.expected_dim() {
            return invalid(format!("initial point needs {} components, got {}", self.expected_dim(), x0.len()));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return invalid("initial point must be finite".into());
        }
        if self.span() > 0.0 {
            let n = self.steps()?;
            if n == 0 {
                return invalid("at least one step required".into());
            }
            if let Some(r) = self.ref_steps {
                if r < 10 * n {
                    return invalid(format!("reference steps {r} must be at least 10·N = {}", 10 * n));
                }
            }
        }
        if self.experiment == Experiment::Convergence && self.method == Some(MethodName::Rk4) {
            return invalid("convergence compares the geometric methods only".into());
        }
        Ok(())
    }
}
