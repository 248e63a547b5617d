//! Model and storage parameter sets, shipped defaults, and admissibility checks.
//!
//! All quantities are relative to fossil generation: `r`, `c` and `eta` are
//! PV/fossil ratios, the remaining symbols are rates (1/year) or welfare
//! weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};

/// Welfare weight on the energy stock that, together with `gamma = 0.20`,
/// `omega = 0.19` and `rho = 0.05`, makes the composite shadow term equal 36/7.
/// That value reproduces both reported optima (11.6364 and 14.1026 euro/MWh).
pub const CALIBRATED_BETA: f64 = 0.94 / 7.0;

/// Parameters of the PV-only model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParameters {
    /// Relative economic return of PV vs fossil.
    pub r: f64,
    /// Relative cost of PV vs fossil.
    pub c: f64,
    /// Relative productivity of PV vs fossil.
    pub eta: f64,
    /// Welfare weight on the energy stock.
    pub beta: f64,
    /// Welfare weight on the damage stock.
    pub gamma: f64,
    /// Emission savings per unit of PV output (kgCO2/kWh).
    pub omega: f64,
    /// Depreciation rate of the energy stock (1/year).
    pub delta_e: f64,
    /// Growth rate of emissions (1/year).
    pub delta_d: f64,
    /// Discount rate (1/year).
    pub rho: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        Self::baseline()
    }
}

impl ModelParameters {
    /// Calibrated baseline without a carbon tax.
    pub fn baseline() -> Self {
        Self {
            r: 3.04,
            c: 0.44,
            eta: 1.4,
            beta: CALIBRATED_BETA,
            gamma: 0.20,
            omega: 0.19,
            delta_e: 0.05,
            delta_d: 0.04,
            rho: 0.05,
        }
    }

    /// Carbon-tax scenario: return rises to 3.8 and relative cost falls to 0.39.
    pub fn carbon_tax() -> Self {
        Self {
            r: 3.8,
            c: 0.39,
            ..Self::baseline()
        }
    }

    /// Baseline with the tabulated return `r = 3.4` instead of 3.04. Kept for
    /// comparison; it does not reproduce the reported baseline optimum.
    pub fn tabulated_return() -> Self {
        Self {
            r: 3.4,
            ..Self::baseline()
        }
    }

    fn check(&self, strict: bool) -> Violations {
        let mut v = Violations::default();
        for (name, value) in self.entries() {
            if !value.is_finite() {
                v.push(name, format!("{name} must be finite"));
            }
        }
        if !v.is_empty() {
            return v;
        }
        if self.r <= 0.0 {
            v.push("r", "r must be positive");
        }
        if self.c <= 0.0 {
            v.push("c", "c must be positive");
        }
        if self.eta <= 0.0 {
            v.push("eta", "eta must be positive");
        }
        if strict {
            if self.beta <= 0.0 {
                v.push("beta", "beta must be positive");
            }
            if self.gamma <= 0.0 {
                v.push("gamma", "gamma must be positive");
            }
            if self.omega <= 0.0 {
                v.push("omega", "omega must be positive");
            }
        } else {
            if self.beta < 0.0 {
                v.push("beta", "beta must be nonnegative");
            }
            if self.gamma < 0.0 {
                v.push("gamma", "gamma must be nonnegative");
            }
            if self.omega < 0.0 {
                v.push("omega", "omega must be nonnegative");
            }
        }
        if self.delta_e <= 0.0 {
            v.push("delta_e", "delta_e must be positive");
        }
        if self.rho <= self.delta_d {
            v.push("rho", "rho must exceed delta_d");
        }
        v
    }

    /// Every invariant of the model this parameter set violates, keyed by field name.
    pub fn violations(&self) -> Violations {
        self.check(true)
    }

    pub fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("r", self.r),
            ("c", self.c),
            ("eta", self.eta),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("omega", self.omega),
            ("delta_e", self.delta_e),
            ("delta_d", self.delta_d),
            ("rho", self.rho),
        ]
    }
}

/// Parameters of the storage extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageParameters {
    /// Budget share diverted to storage.
    pub s: f64,
    /// Relative storage cost.
    pub c_s: f64,
    /// Round-trip efficiency.
    pub eta_s: f64,
    /// Degradation rate of stored energy (1/year).
    pub delta_s: f64,
    /// Environmental coefficient of stored energy in the damage equation.
    pub q: f64,
    /// Welfare weight on stored energy.
    pub sigma: f64,
}

impl Default for StorageParameters {
    fn default() -> Self {
        Self {
            s: 0.3,
            c_s: 0.44,
            eta_s: 0.85,
            delta_s: 0.02,
            q: 0.04,
            sigma: 0.6,
        }
    }
}

impl StorageParameters {
    fn check(&self, strict: bool) -> Violations {
        let mut v = Violations::default();
        for (name, value) in self.entries() {
            if !value.is_finite() {
                v.push(name, format!("{name} must be finite"));
            }
        }
        if !v.is_empty() {
            return v;
        }
        if !(0.0..1.0).contains(&self.s) {
            v.push("s", "s must lie in [0, 1)");
        }
        if self.c_s < 0.0 {
            v.push("c_s", "c_s must be nonnegative");
        }
        let eta_ok = if strict {
            self.eta_s > 0.0 && self.eta_s <= 1.0
        } else {
            (0.0..=1.0).contains(&self.eta_s)
        };
        if !eta_ok {
            v.push("eta_s", "eta_s must lie in (0, 1]");
        }
        if self.delta_s < 0.0 {
            v.push("delta_s", "delta_s must be nonnegative");
        }
        if self.q < 0.0 {
            v.push("q", "q must be nonnegative");
        }
        if self.sigma < 0.0 {
            v.push("sigma", "sigma must be nonnegative");
        }
        v
    }

    pub fn violations(&self) -> Violations {
        self.check(true)
    }

    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("s", self.s),
            ("c_s", self.c_s),
            ("eta_s", self.eta_s),
            ("delta_s", self.delta_s),
            ("q", self.q),
            ("sigma", self.sigma),
        ]
    }
}

/// Checks every model (and, if given, storage) invariant. Field names in the
/// returned violations carry their section, e.g. `model.rho` or `storage.s`.
pub fn validate_parameters(p: &ModelParameters, sp: Option<&StorageParameters>) -> Result<(), Violations> {
    let mut all = Violations::default();
    all.0.extend(p.violations().0.into_iter().map(|v| v.within("model")));
    if let Some(sp) = sp {
        all.0.extend(sp.violations().0.into_iter().map(|v| v.within("storage")));
    }
    all.into_result()
}

/// Admissibility for evaluating closed forms. Same as [`validate_parameters`]
/// except that welfare weights, `omega` and `eta_s` may be zero, so the
/// degenerate limits stay computable.
pub(crate) fn check_evaluable(p: &ModelParameters, sp: Option<&StorageParameters>) -> Result<()> {
    let mut all = Violations::default();
    all.0.extend(p.check(false).0.into_iter().map(|v| v.within("model")));
    if let Some(sp) = sp {
        all.0.extend(sp.check(false).0.into_iter().map(|v| v.within("storage")));
    }
    all.into_result().map_err(Error::from)
}

/// Name of a single scalar parameter, used by sweeps and the C interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKey {
    R,
    C,
    Eta,
    Beta,
    Gamma,
    Omega,
    DeltaE,
    DeltaD,
    Rho,
    S,
    #[serde(rename = "c_s")]
    CS,
    EtaS,
    DeltaS,
    Q,
    Sigma,
}

impl ParamKey {
    pub const ALL: [ParamKey; 15] = [
        ParamKey::R,
        ParamKey::C,
        ParamKey::Eta,
        ParamKey::Beta,
        ParamKey::Gamma,
        ParamKey::Omega,
        ParamKey::DeltaE,
        ParamKey::DeltaD,
        ParamKey::Rho,
        ParamKey::S,
        ParamKey::CS,
        ParamKey::EtaS,
        ParamKey::DeltaS,
        ParamKey::Q,
        ParamKey::Sigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamKey::R => "r",
            ParamKey::C => "c",
            ParamKey::Eta => "eta",
            ParamKey::Beta => "beta",
            ParamKey::Gamma => "gamma",
            ParamKey::Omega => "omega",
            ParamKey::DeltaE => "delta_e",
            ParamKey::DeltaD => "delta_d",
            ParamKey::Rho => "rho",
            ParamKey::S => "s",
            ParamKey::CS => "c_s",
            ParamKey::EtaS => "eta_s",
            ParamKey::DeltaS => "delta_s",
            ParamKey::Q => "q",
            ParamKey::Sigma => "sigma",
        }
    }

    pub fn is_storage(self) -> bool {
        matches!(
            self,
            ParamKey::S | ParamKey::CS | ParamKey::EtaS | ParamKey::DeltaS | ParamKey::Q | ParamKey::Sigma
        )
    }

    pub fn get(self, p: &ModelParameters, sp: &StorageParameters) -> f64 {
        *self.slot_ref(p, sp)
    }

    pub fn set(self, p: &mut ModelParameters, sp: &mut StorageParameters, value: f64) {
        *self.slot(p, sp) = value;
    }

    fn slot_ref<'a>(self, p: &'a ModelParameters, sp: &'a StorageParameters) -> &'a f64 {
        match self {
            ParamKey::R => &p.r,
            ParamKey::C => &p.c,
            ParamKey::Eta => &p.eta,
            ParamKey::Beta => &p.beta,
            ParamKey::Gamma => &p.gamma,
            ParamKey::Omega => &p.omega,
            ParamKey::DeltaE => &p.delta_e,
            ParamKey::DeltaD => &p.delta_d,
            ParamKey::Rho => &p.rho,
            ParamKey::S => &sp.s,
            ParamKey::CS => &sp.c_s,
            ParamKey::EtaS => &sp.eta_s,
            ParamKey::DeltaS => &sp.delta_s,
            ParamKey::Q => &sp.q,
            ParamKey::Sigma => &sp.sigma,
        }
    }

    fn slot<'a>(self, p: &'a mut ModelParameters, sp: &'a mut StorageParameters) -> &'a mut f64 {
        match self {
            ParamKey::R => &mut p.r,
            ParamKey::C => &mut p.c,
            ParamKey::Eta => &mut p.eta,
            ParamKey::Beta => &mut p.beta,
            ParamKey::Gamma => &mut p.gamma,
            ParamKey::Omega => &mut p.omega,
            ParamKey::DeltaE => &mut p.delta_e,
            ParamKey::DeltaD => &mut p.delta_d,
            ParamKey::Rho => &mut p.rho,
            ParamKey::S => &mut sp.s,
            ParamKey::CS => &mut sp.c_s,
            ParamKey::EtaS => &mut sp.eta_s,
            ParamKey::DeltaS => &mut sp.delta_s,
            ParamKey::Q => &mut sp.q,
            ParamKey::Sigma => &mut sp.sigma,
        }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_valid() {
        assert!(validate_parameters(&ModelParameters::baseline(), Some(&StorageParameters::default())).is_ok());
        assert!(validate_parameters(&ModelParameters::carbon_tax(), None).is_ok());
    }

    #[test]
    fn rho_equal_to_delta_d_is_rejected() {
        let p = ModelParameters {
            rho: 0.04,
            ..ModelParameters::baseline()
        };
        let err = validate_parameters(&p, None).unwrap_err();
        assert!(err.mentions("model.rho"));
        assert!(err.to_string().contains("rho must exceed delta_d"));
    }

    #[test]
    fn zero_cost_is_rejected() {
        let p = ModelParameters {
            c: 0.0,
            ..ModelParameters::baseline()
        };
        let err = validate_parameters(&p, None).unwrap_err();
        assert!(err.to_string().contains("c must be positive"));
    }

    #[test]
    fn every_violation_is_listed() {
        let p = ModelParameters {
            c: 0.0,
            gamma: -1.0,
            rho: 0.01,
            ..ModelParameters::baseline()
        };
        let sp = StorageParameters {
            s: 1.0,
            eta_s: 1.5,
            ..StorageParameters::default()
        };
        let err = validate_parameters(&p, Some(&sp)).unwrap_err();
        for field in ["model.c", "model.gamma", "model.rho", "storage.s", "storage.eta_s"] {
            assert!(err.mentions(field), "missing {field} in {err}");
        }
        assert_eq!(err.0.len(), 5);
    }

    #[test]
    fn non_finite_values_are_violations() {
        let p = ModelParameters {
            eta: f64::NAN,
            ..ModelParameters::baseline()
        };
        assert!(p.violations().mentions("eta"));
    }

    #[test]
    fn zero_welfare_weights_are_evaluable_but_not_valid() {
        let p = ModelParameters {
            beta: 0.0,
            gamma: 0.0,
            ..ModelParameters::baseline()
        };
        assert!(validate_parameters(&p, None).is_err());
        assert!(check_evaluable(&p, None).is_ok());
    }

    #[test]
    fn param_keys_round_trip_through_names() {
        let mut p = ModelParameters::baseline();
        let mut sp = StorageParameters::default();
        for (k, key) in ParamKey::ALL.into_iter().enumerate() {
            assert_eq!(key.name().parse::<ParamKey>().unwrap(), key);
            key.set(&mut p, &mut sp, k as f64);
            assert_eq!(key.get(&p, &sp), k as f64);
        }
        assert!("nope".parse::<ParamKey>().is_err());
    }
}
