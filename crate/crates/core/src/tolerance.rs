use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed defect `max |M - M*|` for a matrix to count as Hermitian.
    pub herm: f64,
    pub orth: f64,
    pub eig: f64,
    /// Minimum distance between an admissible cutoff and the spectrum.
    pub gap: f64,
    pub doteq: f64,
    /// Scalar-matrix recognition for triple products of lifts.
    pub scalar: f64,
    pub compat: f64,
    /// Largest denominator accepted when recognizing a rational phase.
    pub q_max: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            orth: 1e-9,
            eig: 1e-9,
            gap: 1e-6,
            doteq: 1e-8,
            scalar: 1e-8,
            compat: 1e-8,
            q_max: 64,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("herm", self.herm),
            ("orth", self.orth),
            ("eig", self.eig),
            ("gap", self.gap),
            ("doteq", self.doteq),
            ("scalar", self.scalar),
            ("compat", self.compat),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("tolerance `{name}` must be positive, got {v}"));
            }
        }
        if self.q_max == 0 {
            return Err("q_max must be at least 1".into());
        }
        Ok(())
    }
}
