//! Closed-form optimal investment, steady states, co-states and first-order
//! residuals for the PV-only and the PV-plus-storage models.
//!
//! With transversality forcing the homogeneous co-state mode to zero, every
//! co-state is a constant times `exp(-rho t)`, so the current-value first-order
//! condition is time invariant and the optimal control is a constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{check_evaluable, ModelParameters, StorageParameters};

/// Which closed form to use for the storage-model optimum.
///
/// `AsPublished` is the alternative closed form, whose storage term lacks
/// the share weight. `FocDerived` solves the storage first-order condition term by term; its
/// storage term carries the extra factor `s / (1 - s)`. The two agree only
/// when `eta_s * theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    #[serde(alias = "published")]
    AsPublished,
    #[default]
    #[serde(alias = "foc")]
    FocDerived,
}

impl FormulaVariant {
    pub fn label(self) -> &'static str {
        match self {
            FormulaVariant::AsPublished => "as_published",
            FormulaVariant::FocDerived => "foc_derived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSolution {
    pub i_star: f64,
    pub psi: f64,
    pub e_star: f64,
    pub d_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_variant: Option<FormulaVariant>,
    /// Set when the interior optimum was negative and `i_star` was clamped to 0.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostateValues {
    pub t: f64,
    pub mu: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl CostateValues {
    /// Shifts every co-state forward by `dt` years along its `exp(-rho t)` decay.
    pub fn advanced(&self, rho: f64, dt: f64) -> Self {
        let k = (-rho * dt).exp();
        Self {
            t: self.t + dt,
            mu: self.mu * k,
            lambda: self.lambda * k,
            nu: self.nu.map(|n| n * k),
        }
    }
}

/// Composite shadow value of one unit of investment:
/// `beta / (delta_e + rho) + omega * gamma / (rho - delta_d)`.
pub fn composite_shadow_term(p: &ModelParameters) -> Result<f64> {
    check_evaluable(p, None)?;
    Ok(psi_unchecked(p))
}

fn psi_unchecked(p: &ModelParameters) -> f64 {
    p.beta / (p.delta_e + p.rho) + p.omega * p.gamma / (p.rho - p.delta_d)
}

/// Storage shadow weight `theta = sigma + gamma q / (rho - delta_d)`: the
/// welfare value of stored energy plus the damage it removes.
pub fn storage_shadow_weight(p: &ModelParameters, sp: &StorageParameters) -> f64 {
    sp.sigma + p.gamma * sp.q / (p.rho - p.delta_d)
}

fn clamp(i: f64) -> (f64, bool) {
    if i < 0.0 {
        (0.0, true)
    } else {
        (i, false)
    }
}

pub fn optimal_investment_base(p: &ModelParameters) -> Result<ClosedFormSolution> {
    check_evaluable(p, None)?;
    let psi = psi_unchecked(p);
    let (i_star, clamped) = clamp(p.r / (2.0 * p.c) + p.eta / (2.0 * p.c) * psi);
    let (e_star, d_star) = steady_state_base(p, i_star)?;
    Ok(ClosedFormSolution {
        i_star,
        psi,
        e_star,
        d_star,
        s_star: None,
        formula_variant: None,
        clamped,
    })
}

/// Rest point of the PV-only state system under constant investment `i`.
/// The damage rest point is unstable: the damage stock moves away from it at
/// rate `delta_d`.
pub fn steady_state_base(p: &ModelParameters, i: f64) -> Result<(f64, f64)> {
    if !(i >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "investment must be nonnegative, got {i}"
        )));
    }
    if p.delta_e == 0.0 {
        return Err(Error::NoSteadyState("energy (delta_e = 0)"));
    }
    if p.delta_d == 0.0 {
        return Err(Error::NoSteadyState("damage (delta_d = 0)"));
    }
    Ok((p.eta * i / p.delta_e, p.omega * p.eta * i / p.delta_d))
}

pub fn costates_base(p: &ModelParameters, t: f64) -> Result<CostateValues> {
    check_evaluable(p, None)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let decay = (-p.rho * t).exp();
    Ok(CostateValues {
        t,
        mu: p.beta / (p.delta_e + p.rho) * decay,
        lambda: p.gamma / (p.delta_d - p.rho) * decay,
        nu: None,
    })
}

/// Current-value derivative of the Hamiltonian in the control at `t = 0`:
/// `(r - 2 c i) + eta (mu_0 - omega lambda_0)`.
pub fn foc_residual_base(p: &ModelParameters, i: f64) -> f64 {
    let mu0 = p.beta / (p.delta_e + p.rho);
    let lambda0 = p.gamma / (p.delta_d - p.rho);
    (p.r - 2.0 * p.c * i) + p.eta * (mu0 - p.omega * lambda0)
}

fn check_share(sp: &StorageParameters) -> Result<()> {
    if !(0.0..1.0).contains(&sp.s) {
        return Err(Error::StorageShare(sp.s));
    }
    Ok(())
}

fn storage_i_star_unchecked(p: &ModelParameters, sp: &StorageParameters, variant: FormulaVariant) -> f64 {
    let s = sp.s;
    let one_s = 1.0 - s;
    let k = sp.delta_s + p.rho;
    let theta = storage_shadow_weight(p, sp);
    let market = (p.r * one_s - sp.c_s * s) / (2.0 * p.c * one_s * one_s);
    let psi = psi_unchecked(p);
    match variant {
        FormulaVariant::AsPublished => market + (p.eta * psi + theta * sp.eta_s / k) / (2.0 * p.c * one_s),
        FormulaVariant::FocDerived => {
            market + p.eta * psi / (2.0 * p.c * one_s) + sp.eta_s * s * theta / (k * 2.0 * p.c * one_s * one_s)
        }
    }
}

pub fn optimal_investment_storage(
    p: &ModelParameters,
    sp: &StorageParameters,
    variant: FormulaVariant,
) -> Result<ClosedFormSolution> {
    check_share(sp)?;
    check_evaluable(p, Some(sp))?;
    let (i_star, clamped) = clamp(storage_i_star_unchecked(p, sp, variant));
    let (e_star, d_star, s_star) = steady_state_storage(p, sp, i_star)?;
    Ok(ClosedFormSolution {
        i_star,
        psi: psi_unchecked(p),
        e_star,
        d_star,
        s_star: Some(s_star),
        formula_variant: Some(variant),
        clamped,
    })
}

/// Rest point `(E*, D*, S*)` of the storage system under constant investment `i`.
pub fn steady_state_storage(p: &ModelParameters, sp: &StorageParameters, i: f64) -> Result<(f64, f64, f64)> {
    check_share(sp)?;
    let (e_pv, _) = steady_state_base(p, i * (1.0 - sp.s))?;
    let s_star = if sp.s * sp.eta_s * i == 0.0 {
        0.0
    } else if sp.delta_s == 0.0 {
        return Err(Error::NoSteadyState("stored energy (delta_s = 0)"));
    } else {
        sp.s * sp.eta_s * i / sp.delta_s
    };
    let d_star = (p.omega * p.eta * (1.0 - sp.s) * i + sp.q * s_star) / p.delta_d;
    Ok((e_pv, d_star, s_star))
}

/// Largest storage share for which the net market return `r (1 - s) - c_s s`
/// stays positive.
pub fn viability_threshold(p: &ModelParameters, sp: &StorageParameters) -> f64 {
    p.r / (p.r + sp.c_s)
}

/// Upper bound on `s` below which the storage optimum exceeds the PV-only one.
pub fn dominance_threshold(p: &ModelParameters, sp: &StorageParameters) -> f64 {
    let te = storage_shadow_weight(p, sp) * sp.eta_s;
    let k = sp.delta_s + p.rho;
    let storage_branch = if te == 0.0 && sp.c_s == 0.0 {
        1.0
    } else {
        te / (te + sp.c_s * k)
    };
    viability_threshold(p, sp).min(storage_branch)
}

/// `I1* - I*` split into the part from rescaling the PV-only optimum by
/// `1 / (1 - s)` and the storage-net-of-cost part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestmentGap {
    pub scaling_term: f64,
    pub storage_term: f64,
    pub total: f64,
}

pub fn investment_gap(p: &ModelParameters, sp: &StorageParameters, variant: FormulaVariant) -> InvestmentGap {
    let s = sp.s;
    let one_s = 1.0 - s;
    let k = sp.delta_s + p.rho;
    let te = storage_shadow_weight(p, sp) * sp.eta_s;
    let scaling_term = s / one_s * (p.r / (2.0 * p.c) + p.eta / (2.0 * p.c) * psi_unchecked(p));
    let numerator = match variant {
        FormulaVariant::AsPublished => te * one_s - sp.c_s * k * s,
        FormulaVariant::FocDerived => s * (te - sp.c_s * k),
    };
    let storage_term = numerator / (2.0 * p.c * one_s * one_s * k);
    InvestmentGap {
        scaling_term,
        storage_term,
        total: scaling_term + storage_term,
    }
}

pub fn costates_storage(p: &ModelParameters, sp: &StorageParameters, t: f64) -> Result<CostateValues> {
    check_evaluable(p, Some(sp))?;
    let mut values = costates_base(p, t)?;
    let theta = storage_shadow_weight(p, sp);
    values.nu = Some(theta / (sp.delta_s + p.rho) * (-p.rho * t).exp());
    Ok(values)
}

/// Current-value derivative of the storage Hamiltonian in the control at `t = 0`.
pub fn foc_residual_storage(p: &ModelParameters, sp: &StorageParameters, i: f64) -> f64 {
    let one_s = 1.0 - sp.s;
    let nu0 = storage_shadow_weight(p, sp) / (sp.delta_s + p.rho);
    (p.r * one_s - 2.0 * p.c * one_s * one_s * i - sp.c_s * sp.s)
        + p.eta * one_s * psi_unchecked(p)
        + sp.eta_s * sp.s * nu0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn zero_weights() -> ModelParameters {
        ModelParameters {
            beta: 0.0,
            gamma: 0.0,
            ..ModelParameters::baseline()
        }
    }

    /// Independent calibration route: solve the reported optima for psi.
    fn psi_from_reported(i: f64, r: f64, c: f64, eta: f64) -> f64 {
        (2.0 * c * i - r) / eta
    }

    #[test]
    fn shadow_term_matches_calibration_of_reported_optima() {
        let psi = composite_shadow_term(&ModelParameters::baseline()).unwrap();
        let from_base = psi_from_reported(11.636_363_636_363_637, 3.04, 0.44, 1.4);
        let from_tax = psi_from_reported(14.102_564_102_564_102, 3.8, 0.39, 1.4);
        assert_relative_eq!(psi, 36.0 / 7.0, max_relative = 1e-14);
        assert_relative_eq!(psi, from_base, max_relative = 1e-12);
        assert_relative_eq!(psi, from_tax, max_relative = 1e-12);
        assert_relative_eq!(psi, 5.142857, epsilon = 1e-6);
    }

    #[test]
    fn shadow_term_trivial_cases() {
        assert_eq!(composite_shadow_term(&zero_weights()).unwrap(), 0.0);
        let p = ModelParameters {
            beta: 0.1,
            gamma: 0.0,
            ..ModelParameters::baseline()
        };
        assert_relative_eq!(composite_shadow_term(&p).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn shadow_term_rejects_invalid_parameters() {
        let p = ModelParameters {
            rho: 0.03,
            ..ModelParameters::baseline()
        };
        assert!(composite_shadow_term(&p).is_err());
    }

    #[test]
    fn reported_optima_are_reproduced() {
        let base = optimal_investment_base(&ModelParameters::baseline()).unwrap();
        assert!((base.i_star - 11.6364).abs() < 1e-4);
        assert_relative_eq!(base.i_star, 11.636364, epsilon = 1e-6);
        let tax = optimal_investment_base(&ModelParameters::carbon_tax()).unwrap();
        assert!((tax.i_star - 14.1026).abs() < 1e-4);
        assert_relative_eq!(tax.i_star, 14.102564, epsilon = 1e-6);
        assert!(!base.clamped && !tax.clamped);
    }

    #[test]
    fn zero_weights_collapse_to_market_term() {
        let p = ModelParameters {
            r: 3.4,
            ..zero_weights()
        };
        let sol = optimal_investment_base(&p).unwrap();
        assert_relative_eq!(sol.i_star, 3.4 / 0.88, max_relative = 1e-14);
        assert_relative_eq!(sol.i_star, 3.863636, epsilon = 1e-6);
    }

    #[test]
    fn steady_states() {
        let p = ModelParameters::baseline();
        assert_eq!(steady_state_base(&p, 0.0).unwrap(), (0.0, 0.0));
        let (e, d) = steady_state_base(&p, 11.636364).unwrap();
        assert!((e - 325.818).abs() < 1e-3);
        assert!((d - 77.3818).abs() < 1e-4);
        let no_dep = ModelParameters { delta_e: 0.0, ..p };
        assert!(matches!(steady_state_base(&no_dep, 1.0), Err(Error::NoSteadyState(_))));
        let no_growth = ModelParameters { delta_d: 0.0, ..p };
        assert!(matches!(
            steady_state_base(&no_growth, 1.0),
            Err(Error::NoSteadyState(_))
        ));
        assert!(steady_state_base(&p, -1.0).is_err());
    }

    #[test]
    fn base_costates() {
        let p = ModelParameters::baseline();
        let c0 = costates_base(&p, 0.0).unwrap();
        assert_relative_eq!(c0.mu, 1.342857, epsilon = 1e-6);
        assert_relative_eq!(c0.lambda, -20.0, max_relative = 1e-12);
        let far = costates_base(&p, 2000.0).unwrap();
        assert!(far.mu.abs() < 1e-40 && far.lambda.abs() < 1e-40);
        assert!(costates_base(&p, -1.0).is_err());
    }

    #[test]
    fn costates_satisfy_their_odes() {
        // mu' = delta_e mu - beta e^{-rho t}, lambda' = -delta_d lambda + gamma e^{-rho t}
        let p = ModelParameters::baseline();
        let sp = StorageParameters::default();
        let (t, h) = (7.0, 1e-4);
        let at = |t| costates_storage(&p, &sp, t).unwrap();
        let (lo, mid, hi) = (at(t - h), at(t), at(t + h));
        let d = |a: f64, b: f64| (b - a) / (2.0 * h);
        let disc = (-p.rho * t).exp();
        assert_relative_eq!(d(lo.mu, hi.mu), p.delta_e * mid.mu - p.beta * disc, max_relative = 1e-7);
        assert_relative_eq!(
            d(lo.lambda, hi.lambda),
            -p.delta_d * mid.lambda + p.gamma * disc,
            max_relative = 1e-7
        );
        // nu' = delta_s nu - sigma e^{-rho t} + q lambda  (= -dH/dS with D' containing -q S)
        let (nl, nm, nh) = (lo.nu.unwrap(), mid.nu.unwrap(), hi.nu.unwrap());
        assert_relative_eq!(
            d(nl, nh),
            sp.delta_s * nm - sp.sigma * disc + sp.q * mid.lambda,
            max_relative = 1e-7
        );
    }

    #[test]
    fn foc_residual_cases() {
        let p = ModelParameters::baseline();
        let i_star = optimal_investment_base(&p).unwrap().i_star;
        assert!(foc_residual_base(&p, i_star).abs() < 1e-12);
        let psi = composite_shadow_term(&p).unwrap();
        assert_relative_eq!(foc_residual_base(&p, 0.0), p.r + p.eta * psi, max_relative = 1e-14);
        assert_relative_eq!(foc_residual_base(&p, i_star + 1.0), -2.0 * p.c, max_relative = 1e-10);
    }

    #[test]
    fn storage_optimum_both_variants() {
        let p = ModelParameters::baseline();
        let sp = StorageParameters::default();
        assert_relative_eq!(storage_shadow_weight(&p, &sp), 1.4, max_relative = 1e-12);
        let published = optimal_investment_storage(&p, &sp, FormulaVariant::AsPublished).unwrap();
        let derived = optimal_investment_storage(&p, &sp, FormulaVariant::FocDerived).unwrap();
        assert!((published.i_star - 43.9146).abs() < 1e-4);
        assert!((derived.i_star - 28.1447).abs() < 1e-4);
        assert!(foc_residual_storage(&p, &sp, derived.i_star).abs() < 1e-12);
        assert!(foc_residual_storage(&p, &sp, published.i_star).abs() > 1.0);
        assert_eq!(derived.formula_variant, Some(FormulaVariant::FocDerived));
        let (e, d, s) = (derived.e_star, derived.d_star, derived.s_star.unwrap());
        let i = derived.i_star;
        assert_relative_eq!(e, 1.4 * 0.7 * i / 0.05, max_relative = 1e-14);
        assert_relative_eq!(s, 0.3 * 0.85 * i / 0.02, max_relative = 1e-14);
        assert_relative_eq!(
            d,
            0.19 * 1.4 * 0.7 * i / 0.04 + 0.04 * 0.85 * 0.3 * i / (0.02 * 0.04),
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_share_collapses_to_base() {
        let p = ModelParameters::baseline();
        let sp = StorageParameters {
            s: 0.0,
            ..StorageParameters::default()
        };
        let base = optimal_investment_base(&p).unwrap().i_star;
        let derived = optimal_investment_storage(&p, &sp, FormulaVariant::FocDerived).unwrap();
        assert_eq!(derived.i_star, base);
        let published = optimal_investment_storage(&p, &sp, FormulaVariant::AsPublished).unwrap();
        let theta = storage_shadow_weight(&p, &sp);
        let jump = theta * sp.eta_s / ((sp.delta_s + p.rho) * 2.0 * p.c);
        assert_relative_eq!(published.i_star - base, jump, max_relative = 1e-12);
        assert_relative_eq!(jump, 19.318182, epsilon = 1e-6);
    }

    #[test]
    fn storage_rejects_full_share() {
        let p = ModelParameters::baseline();
        let sp = StorageParameters {
            s: 1.0,
            ..StorageParameters::default()
        };
        assert!(matches!(
            optimal_investment_storage(&p, &sp, FormulaVariant::FocDerived),
            Err(Error::StorageShare(_))
        ));
    }

    #[test]
    fn thresholds() {
        let p = ModelParameters::baseline();
        let sp = StorageParameters::default();
        assert_relative_eq!(viability_threshold(&p, &sp), 0.873563, epsilon = 1e-6);
        assert_relative_eq!(dominance_threshold(&p, &sp), 0.873563, epsilon = 1e-6);
        assert!(sp.s < viability_threshold(&p, &sp));
        // s below the threshold is the same statement as a positive net return
        assert!(p.r * (1.0 - sp.s) - sp.c_s * sp.s > 0.0);
        let free = StorageParameters { c_s: 0.0, ..sp };
        assert_eq!(viability_threshold(&p, &free), 1.0);
        assert_eq!(dominance_threshold(&p, &free), 1.0);
        let dead = StorageParameters { eta_s: 0.0, ..sp };
        assert_eq!(dominance_threshold(&p, &dead), 0.0);
        let weak = StorageParameters { eta_s: 1e-9, ..sp };
        assert!(dominance_threshold(&p, &weak) < 1e-6);
    }

    #[test]
    fn gap_decomposition_matches_direct_difference() {
        let p = ModelParameters::baseline();
        let sp = StorageParameters::default();
        let base = optimal_investment_base(&p).unwrap().i_star;
        for variant in [FormulaVariant::AsPublished, FormulaVariant::FocDerived] {
            let direct = optimal_investment_storage(&p, &sp, variant).unwrap().i_star - base;
            let gap = investment_gap(&p, &sp, variant);
            assert_relative_eq!(gap.total, direct, max_relative = 1e-10);
            assert!(gap.total > 0.0);
        }
        let foc = investment_gap(&p, &sp, FormulaVariant::FocDerived);
        assert!((foc.total - 16.5083).abs() < 1e-4);
        let none = StorageParameters { s: 0.0, ..sp };
        assert_eq!(investment_gap(&p, &none, FormulaVariant::FocDerived).total, 0.0);
    }

    #[test]
    fn storage_costates() {
        let p = ModelParameters::baseline();
        let sp = StorageParameters::default();
        let c0 = costates_storage(&p, &sp, 0.0).unwrap();
        assert_relative_eq!(c0.nu.unwrap(), 20.0, max_relative = 1e-12);
        let inert = StorageParameters {
            q: 0.0,
            sigma: 0.0,
            ..sp
        };
        for t in [0.0, 3.0, 50.0] {
            assert_eq!(costates_storage(&p, &inert, t).unwrap().nu, Some(0.0));
        }
        let far = costates_storage(&p, &sp, 5000.0).unwrap();
        assert!(far.mu.abs() + far.lambda.abs() + far.nu.unwrap().abs() < 1e-100);
    }

    #[test]
    fn negative_interior_optimum_is_clamped() {
        // Expensive, useless storage with zero welfare weights pushes the interior optimum below zero.
        let sp = StorageParameters {
            s: 0.5,
            c_s: 50.0,
            eta_s: 0.0,
            ..StorageParameters::default()
        };
        let sol = optimal_investment_storage(&zero_weights(), &sp, FormulaVariant::FocDerived).unwrap();
        assert!(sol.clamped);
        assert_eq!(sol.i_star, 0.0);
        assert_eq!(sol.e_star, 0.0);
    }
}
