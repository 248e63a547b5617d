//! Named scenarios (baseline, carbon tax, storage), parameter sweeps, and
//! the storage-versus-carbon-tax comparisons.
//!
//! All scenarios share the welfare calibration of the base parameter set. The
//! carbon tax enters only as the shift of `(r, c)` to `(3.8, 0.39)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{exact_base, exact_storage, simulate_base, simulate_storage, IntegrationConfig, Trajectory};
use crate::error::{Error, Result};
use crate::model::{optimal_investment_base, optimal_investment_storage, ClosedFormSolution, FormulaVariant};
use crate::params::{check_evaluable, validate_parameters, ModelParameters, ParamKey, StorageParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    #[default]
    Baseline,
    CarbonTax,
    Storage,
    Custom,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Baseline => "baseline",
            ScenarioName::CarbonTax => "carbon_tax",
            ScenarioName::Storage => "storage",
            ScenarioName::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    /// Parameter overrides applied after the named preset.
    pub overlay: BTreeMap<ParamKey, f64>,
    #[serde(skip)]
    pub cfg: IntegrationConfig,
    pub variant: FormulaVariant,
}

impl ScenarioSpec {
    pub fn new(name: ScenarioName, cfg: IntegrationConfig) -> Self {
        Self {
            name,
            overlay: BTreeMap::new(),
            cfg,
            variant: FormulaVariant::default(),
        }
    }

    pub fn baseline(cfg: IntegrationConfig) -> Self {
        Self::new(ScenarioName::Baseline, cfg)
    }

    pub fn carbon_tax(cfg: IntegrationConfig) -> Self {
        Self::new(ScenarioName::CarbonTax, cfg)
    }

    pub fn storage(cfg: IntegrationConfig) -> Self {
        Self::new(ScenarioName::Storage, cfg)
    }

    pub fn with(mut self, key: ParamKey, value: f64) -> Self {
        self.overlay.insert(key, value);
        self
    }

    pub fn uses_storage(&self) -> bool {
        match self.name {
            ScenarioName::Storage => true,
            ScenarioName::Custom => self.overlay.keys().any(|k| k.is_storage()),
            _ => false,
        }
    }

    fn describe_overlay(&self) -> String {
        let parts: Vec<String> = self.overlay.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{} [overlay: {}]",
            self.name,
            if parts.is_empty() {
                "none".into()
            } else {
                parts.join(", ")
            }
        )
    }

    /// Merged parameters: `base`, then the preset, then the overlay.
    pub fn resolve(
        &self,
        base: &ModelParameters,
        base_storage: &StorageParameters,
    ) -> Result<(ModelParameters, Option<StorageParameters>)> {
        let mut p = *base;
        let mut sp = *base_storage;
        if self.name == ScenarioName::CarbonTax {
            let tax = ModelParameters::carbon_tax();
            p.r = tax.r;
            p.c = tax.c;
        }
        for (&key, &value) in &self.overlay {
            key.set(&mut p, &mut sp, value);
        }
        let storage = self.uses_storage().then_some(sp);
        validate_parameters(&p, storage.as_ref()).map_err(|v| Error::Scenario {
            scenario: self.describe_overlay(),
            source: Box::new(Error::InvalidParameters(v)),
        })?;
        Ok((p, storage))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub name: ScenarioName,
    pub model: ModelParameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageParameters>,
    pub solution: ClosedFormSolution,
    /// Investment that reaches PV capacity, `I (1 - s)`.
    pub effective_investment: f64,
    pub objective: f64,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

/// Closed-form optimum for the merged parameters, simulated under that
/// constant control.
pub fn run_scenario(
    spec: &ScenarioSpec,
    base: &ModelParameters,
    base_storage: &StorageParameters,
) -> Result<ScenarioOutcome> {
    let (p, sp) = spec.resolve(base, base_storage)?;
    let wrap = |e: Error| Error::Scenario {
        scenario: spec.describe_overlay(),
        source: Box::new(e),
    };
    let (solution, trajectory, share) = match sp {
        Some(sp) => {
            let sol = optimal_investment_storage(&p, &sp, spec.variant).map_err(wrap)?;
            let traj = simulate_storage(&p, &sp, |_| sol.i_star, &spec.cfg).map_err(wrap)?;
            (sol, traj, sp.s)
        }
        None => {
            let sol = optimal_investment_base(&p).map_err(wrap)?;
            let traj = simulate_base(&p, |_| sol.i_star, &spec.cfg).map_err(wrap)?;
            (sol, traj, 0.0)
        }
    };
    Ok(ScenarioOutcome {
        name: spec.name,
        model: p,
        storage: sp,
        effective_investment: solution.i_star * (1.0 - share),
        objective: trajectory.objective_value,
        solution,
        trajectory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: ParamKey,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl SweepAxis {
    pub fn new(param: ParamKey, min: f64, max: f64, step: f64) -> Self {
        Self { param, min, max, step }
    }

    /// `min, min + step, ...` up to and including `max` (within a 1e-9 step).
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.min < self.max) || !self.max.is_finite() || !self.min.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "axis {}: need step > 0 and min < max, got [{}, {}] step {}",
                self.param, self.min, self.max, self.step
            )));
        }
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.min + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepQuantity {
    IStar,
    EStar,
    DStar,
    /// 1 when the storage steady-state energy stock exceeds the carbon-tax one.
    Dominance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<SweepAxis>,
    pub quantity: SweepQuantity,
    #[serde(default)]
    pub variant: FormulaVariant,
}

/// Result of a 1- or 2-axis sweep. `values[row][col]` has `row` along `y`
/// (a single row for 1-axis sweeps) and `col` along `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub x_param: ParamKey,
    pub x: Vec<f64>,
    pub y_param: Option<ParamKey>,
    pub y: Vec<f64>,
    pub quantity: SweepQuantity,
    pub values: Vec<Vec<f64>>,
}

impl SweepGrid {
    pub fn max_cell(&self) -> (usize, usize, f64) {
        self.cells()
            .fold((0, 0, f64::NEG_INFINITY), |best, c| if c.2 > best.2 { c } else { best })
    }

    pub fn min_cell(&self) -> (usize, usize, f64) {
        self.cells()
            .fold((0, 0, f64::INFINITY), |best, c| if c.2 < best.2 { c } else { best })
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, v)))
    }
}

fn sweep_point(
    quantity: SweepQuantity,
    variant: FormulaVariant,
    p: &ModelParameters,
    sp: Option<&StorageParameters>,
) -> Result<f64> {
    if quantity == SweepQuantity::Dominance {
        let sp = sp.ok_or_else(|| Error::InvalidArgument("dominance sweeps need storage parameters".into()))?;
        let storage = optimal_investment_storage(p, sp, variant)?;
        let tax = optimal_investment_base(&ModelParameters { r: 3.8, c: 0.39, ..*p })?;
        return Ok(if storage.e_star > tax.e_star { 1.0 } else { 0.0 });
    }
    let sol = match sp {
        Some(sp) => optimal_investment_storage(p, sp, variant)?,
        None => optimal_investment_base(p)?,
    };
    Ok(match quantity {
        SweepQuantity::IStar => sol.i_star,
        SweepQuantity::EStar => sol.e_star,
        SweepQuantity::DStar => sol.d_star,
        SweepQuantity::Dominance => unreachable!(),
    })
}

/// Evaluates a closed-form quantity over the sweep axes. The storage model is
/// used when any axis is a storage parameter or the quantity is dominance.
pub fn sweep(spec: &SweepSpec, base: &ModelParameters, base_storage: &StorageParameters) -> Result<SweepGrid> {
    let (x_axis, y_axis) = match spec.axes.as_slice() {
        [x] => (*x, None),
        [x, y] => (*x, Some(*y)),
        _ => return Err(Error::InvalidArgument("a sweep needs one or two axes".into())),
    };
    let xs = x_axis.values()?;
    let ys = match y_axis {
        Some(a) => a.values()?,
        None => vec![f64::NAN],
    };
    let storage = spec.quantity == SweepQuantity::Dominance || spec.axes.iter().any(|a| a.param.is_storage());
    let mut values = Vec::with_capacity(ys.len());
    for &y in &ys {
        let mut row = Vec::with_capacity(xs.len());
        for &x in &xs {
            let mut p = *base;
            let mut sp = *base_storage;
            x_axis.param.set(&mut p, &mut sp, x);
            if let Some(a) = y_axis {
                a.param.set(&mut p, &mut sp, y);
            }
            let sp = storage.then_some(sp);
            check_evaluable(&p, sp.as_ref()).map_err(|e| Error::Scenario {
                scenario: format!(
                    "sweep point {}={x}{}",
                    x_axis.param,
                    y_axis.map(|a| format!(", {}={y}", a.param)).unwrap_or_default()
                ),
                source: Box::new(e),
            })?;
            row.push(sweep_point(spec.quantity, spec.variant, &p, sp.as_ref())?);
        }
        values.push(row);
    }
    Ok(SweepGrid {
        x_param: x_axis.param,
        x: xs,
        y_param: y_axis.map(|a| a.param),
        y: if y_axis.is_some() { ys } else { Vec::new() },
        quantity: spec.quantity,
        values,
    })
}

/// Optimal PV-only investment over a (cost, productivity) grid.
pub fn sweep_investment_surface(c_axis: SweepAxis, eta_axis: SweepAxis, base: &ModelParameters) -> Result<SweepGrid> {
    if c_axis.param != ParamKey::C || eta_axis.param != ParamKey::Eta {
        return Err(Error::InvalidArgument(
            "the investment surface sweeps c along x and eta along y".into(),
        ));
    }
    if !(c_axis.min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cost axis must stay positive, starts at {}",
            c_axis.min
        )));
    }
    let spec = SweepSpec {
        axes: vec![c_axis, eta_axis],
        quantity: SweepQuantity::IStar,
        variant: FormulaVariant::FocDerived,
    };
    sweep(&spec, base, &StorageParameters::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FirstPassage {
    Reached {
        t: f64,
    },
    /// The steady state lies at or below the target.
    NeverReached,
    /// The target is reachable but not within the simulated horizon.
    BeyondHorizon,
}

impl FirstPassage {
    pub fn time(&self) -> Option<f64> {
        match *self {
            FirstPassage::Reached { t } => Some(t),
            _ => None,
        }
    }

    /// Strictly earlier than `other`; reaching beats not reaching.
    pub fn beats(&self, other: &FirstPassage) -> bool {
        match (self.time(), other.time()) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        }
    }
}

fn first_passage(outcome: &ScenarioOutcome, target: f64) -> FirstPassage {
    match outcome.trajectory.first_passage_e(target) {
        Some(t) => FirstPassage::Reached { t },
        None if outcome.solution.e_star <= target => FirstPassage::NeverReached,
        None => FirstPassage::BeyondHorizon,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: ScenarioName,
    pub i_star: f64,
    pub effective_investment: f64,
    pub e_star: f64,
    pub d_star: f64,
    pub s_star: Option<f64>,
    pub objective: f64,
    pub first_passage: FirstPassage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub target_e: f64,
    pub summaries: Vec<ScenarioSummary>,
    /// Storage reaches the target strictly before the carbon tax and settles higher.
    pub storage_beats_tax: bool,
    #[serde(skip)]
    pub outcomes: Vec<ScenarioOutcome>,
}

impl ComparisonResult {
    pub fn summary(&self, name: ScenarioName) -> Option<&ScenarioSummary> {
        self.summaries.iter().find(|s| s.name == name)
    }
}

/// Runs the three scenarios on a shared integration config and compares how
/// fast each reaches `target_e`.
pub fn compare_storage_vs_tax(
    base_spec: &ScenarioSpec,
    tax_spec: &ScenarioSpec,
    storage_spec: &ScenarioSpec,
    target_e: f64,
    base: &ModelParameters,
    base_storage: &StorageParameters,
) -> Result<ComparisonResult> {
    if base_spec.cfg != tax_spec.cfg || base_spec.cfg != storage_spec.cfg {
        return Err(Error::InvalidArgument(
            "compared scenarios must share one integration config".into(),
        ));
    }
    let outcomes = [base_spec, tax_spec, storage_spec]
        .into_iter()
        .map(|s| run_scenario(s, base, base_storage))
        .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<ScenarioSummary> = outcomes
        .iter()
        .map(|o| ScenarioSummary {
            name: o.name,
            i_star: o.solution.i_star,
            effective_investment: o.effective_investment,
            e_star: o.solution.e_star,
            d_star: o.solution.d_star,
            s_star: o.solution.s_star,
            objective: o.objective,
            first_passage: first_passage(o, target_e),
        })
        .collect();
    let (tax, storage) = (&summaries[1], &summaries[2]);
    let storage_beats_tax = storage.e_star > tax.e_star && storage.first_passage.beats(&tax.first_passage);
    Ok(ComparisonResult {
        target_e,
        storage_beats_tax,
        summaries,
        outcomes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceCell {
    pub c_s: f64,
    pub eta_s: f64,
    pub storage_e_star: f64,
    pub tax_e_star: f64,
    pub storage_passage: FirstPassage,
    pub tax_passage: FirstPassage,
    pub dominant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceTable {
    pub c_s: Vec<f64>,
    pub eta_s: Vec<f64>,
    pub target_e: f64,
    pub variant: FormulaVariant,
    /// `cells[row][col]` with `row` along `eta_s` and `col` along `c_s`.
    pub cells: Vec<Vec<DominanceCell>>,
    /// For each `c_s` column, the midpoint between the last non-dominant and
    /// the first dominant `eta_s` cell, scanning upward.
    pub boundary: Vec<(f64, Option<f64>)>,
}

impl DominanceTable {
    pub fn iter(&self) -> impl Iterator<Item = &DominanceCell> {
        self.cells.iter().flatten()
    }

    /// Cells inside `c_s <= c_s_max`, `eta_s > eta_s_min` that storage does not dominate.
    pub fn exceptions_to_rule(&self, c_s_max: f64, eta_s_min: f64) -> Vec<DominanceCell> {
        self.iter()
            .filter(|c| c.c_s <= c_s_max + 1e-12 && c.eta_s > eta_s_min + 1e-12 && !c.dominant)
            .copied()
            .collect()
    }
}

/// Storage-versus-carbon-tax verdict over a `(c_s, eta_s)` grid. A cell is
/// dominant when storage settles at a higher energy stock and reaches
/// `target_e` strictly earlier.
pub fn generate_dominance_table(
    c_s_axis: SweepAxis,
    eta_s_axis: SweepAxis,
    target_e: f64,
    cfg: &IntegrationConfig,
    variant: FormulaVariant,
    base: &ModelParameters,
    base_storage: &StorageParameters,
) -> Result<DominanceTable> {
    let c_values = c_s_axis.values()?;
    let eta_values = eta_s_axis.values()?;
    let tax = run_scenario(&ScenarioSpec::carbon_tax(*cfg), base, base_storage)?;
    let tax_passage = first_passage(&tax, target_e);
    let mut cells = Vec::with_capacity(eta_values.len());
    for &eta_s in &eta_values {
        let mut row = Vec::with_capacity(c_values.len());
        for &c_s in &c_values {
            // eta_s = 0 is admissible here as the dead-storage limit
            let sp = StorageParameters {
                c_s,
                eta_s,
                ..*base_storage
            };
            check_evaluable(base, Some(&sp))?;
            let sol = optimal_investment_storage(base, &sp, variant)?;
            let traj = simulate_storage(base, &sp, |_| sol.i_star, cfg)?;
            let outcome = ScenarioOutcome {
                name: ScenarioName::Storage,
                model: *base,
                storage: Some(sp),
                effective_investment: sol.i_star * (1.0 - sp.s),
                objective: traj.objective_value,
                solution: sol,
                trajectory: traj,
            };
            let storage_passage = first_passage(&outcome, target_e);
            row.push(DominanceCell {
                c_s,
                eta_s,
                storage_e_star: sol.e_star,
                tax_e_star: tax.solution.e_star,
                storage_passage,
                tax_passage,
                dominant: sol.e_star > tax.solution.e_star && storage_passage.beats(&tax_passage),
            });
        }
        cells.push(row);
    }
    let boundary = c_values
        .iter()
        .enumerate()
        .map(|(col, &c_s)| {
            let flip = (1..eta_values.len())
                .find(|&row| !cells[row - 1][col].dominant && cells[row][col].dominant)
                .map(|row| 0.5 * (eta_values[row - 1] + eta_values[row]));
            (c_s, flip)
        })
        .collect();
    Ok(DominanceTable {
        c_s: c_values,
        eta_s: eta_values,
        target_e,
        variant,
        cells,
        boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub q: f64,
    pub sigma: f64,
    /// Storage minus carbon-tax damage rest point.
    pub delta_d_steady: f64,
    /// Storage minus carbon-tax damage stock at the horizon, from common initial stocks.
    pub delta_d_horizon: f64,
    /// Storage leaves less damage at the horizon.
    pub green: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentalScatter {
    pub horizon: f64,
    pub variant: FormulaVariant,
    pub points: Vec<ScatterPoint>,
}

impl EnvironmentalScatter {
    pub fn green_share(&self) -> f64 {
        self.points.iter().filter(|p| p.green).count() as f64 / self.points.len().max(1) as f64
    }
}

/// Environmental impact of storage relative to the carbon tax over a
/// `(q, sigma)` grid.
///
/// The damage rest point is unstable, so the stock runs away from it: a
/// higher rest point means damage falls faster from a common start. The
/// verdict therefore compares the damage stocks at the horizon `cfg.t_end`
/// (exact solutions of the linear system) rather than the rest points, which
/// are reported alongside.
pub fn environmental_scatter(
    q_axis: SweepAxis,
    sigma_axis: SweepAxis,
    cfg: &IntegrationConfig,
    variant: FormulaVariant,
    base: &ModelParameters,
    base_storage: &StorageParameters,
) -> Result<EnvironmentalScatter> {
    let q_values = q_axis.values()?;
    let sigma_values = sigma_axis.values()?;
    if q_values.iter().chain(&sigma_values).any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("q and sigma must be nonnegative".into()));
    }
    cfg.steps()?;
    let tax_params = ModelParameters {
        r: 3.8,
        c: 0.39,
        ..*base
    };
    let tax = optimal_investment_base(&tax_params)?;
    let tax_end = exact_base(&tax_params, tax.i_star, cfg, cfg.t_end)?;
    let mut points = Vec::with_capacity(q_values.len() * sigma_values.len());
    for &sigma in &sigma_values {
        for &q in &q_values {
            let sp = StorageParameters {
                q,
                sigma,
                ..*base_storage
            };
            let sol = optimal_investment_storage(base, &sp, variant)?;
            let end = exact_storage(base, &sp, sol.i_star, cfg, cfg.t_end)?;
            let delta_d_horizon = end.d - tax_end.d;
            points.push(ScatterPoint {
                q,
                sigma,
                delta_d_steady: sol.d_star - tax.d_star,
                delta_d_horizon,
                green: delta_d_horizon < 0.0,
            });
        }
    }
    Ok(EnvironmentalScatter {
        horizon: cfg.t_end,
        variant,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> IntegrationConfig {
        IntegrationConfig {
            dt: 0.05,
            t_end: 100.0,
            ..IntegrationConfig::default()
        }
    }

    fn defaults() -> (ModelParameters, StorageParameters) {
        (ModelParameters::baseline(), StorageParameters::default())
    }

    #[test]
    fn named_scenarios_reproduce_optima() {
        let (p, sp) = defaults();
        let base = run_scenario(&ScenarioSpec::baseline(cfg()), &p, &sp).unwrap();
        let tax = run_scenario(&ScenarioSpec::carbon_tax(cfg()), &p, &sp).unwrap();
        let storage = run_scenario(&ScenarioSpec::storage(cfg()), &p, &sp).unwrap();
        assert_relative_eq!(base.solution.i_star, 11.636364, epsilon = 1e-6);
        assert_relative_eq!(tax.solution.i_star, 14.102564, epsilon = 1e-6);
        assert!((tax.solution.i_star / base.solution.i_star - 1.2119).abs() < 1e-4);
        assert!((storage.solution.i_star - 28.1447).abs() < 1e-4);
        assert!((storage.effective_investment - 19.70).abs() < 5e-3);
        assert!(storage.storage.is_some() && base.storage.is_none());
        assert_eq!(base.trajectory.samples.len(), 2001);
    }

    #[test]
    fn invalid_overlay_is_named() {
        let (p, sp) = defaults();
        let spec = ScenarioSpec::carbon_tax(cfg()).with(ParamKey::Rho, 0.03);
        let err = run_scenario(&spec, &p, &sp).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("carbon_tax") && msg.contains("rho=0.03") && msg.contains("model.rho"),
            "{msg}"
        );
        assert!(err.is_validation());
    }

    #[test]
    fn custom_scenario_with_storage_keys_uses_storage_model() {
        let (p, sp) = defaults();
        let spec = ScenarioSpec::new(ScenarioName::Custom, cfg()).with(ParamKey::S, 0.1);
        let out = run_scenario(&spec, &p, &sp).unwrap();
        assert_eq!(out.storage.unwrap().s, 0.1);
        let plain = ScenarioSpec::new(ScenarioName::Custom, cfg()).with(ParamKey::R, 3.4);
        assert!(run_scenario(&plain, &p, &sp).unwrap().storage.is_none());
    }

    #[test]
    fn axis_values_include_both_ends() {
        let a = SweepAxis::new(ParamKey::CS, 0.05, 1.0, 0.05);
        let v = a.values().unwrap();
        assert_eq!(v.len(), 20);
        assert_relative_eq!(*v.last().unwrap(), 1.0, max_relative = 1e-12);
        assert!(SweepAxis::new(ParamKey::C, 1.0, 0.5, 0.1).values().is_err());
        assert!(SweepAxis::new(ParamKey::C, 0.5, 1.0, 0.0).values().is_err());
    }

    #[test]
    fn surface_halves_when_cost_doubles_without_welfare_weights() {
        let p = ModelParameters {
            beta: 0.0,
            gamma: 0.0,
            ..ModelParameters::baseline()
        };
        let grid = sweep_investment_surface(
            SweepAxis::new(ParamKey::C, 0.25, 1.0, 0.25),
            SweepAxis::new(ParamKey::Eta, 1.0, 2.0, 0.5),
            &p,
        )
        .unwrap();
        for row in &grid.values {
            assert_relative_eq!(row[1], row[0] / 2.0, max_relative = 1e-12);
            assert_relative_eq!(row[3], row[1] / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn surface_extremes_sit_at_opposite_corners() {
        let grid = sweep_investment_surface(
            SweepAxis::new(ParamKey::C, 0.2, 1.0, 0.1),
            SweepAxis::new(ParamKey::Eta, 0.5, 2.5, 0.25),
            &ModelParameters::baseline(),
        )
        .unwrap();
        let (rows, cols) = (grid.y.len(), grid.x.len());
        let (r, c, _) = grid.max_cell();
        assert_eq!((r, c), (rows - 1, 0), "max at high eta, low c");
        let (r, c, _) = grid.min_cell();
        assert_eq!((r, c), (0, cols - 1), "min at low eta, high c");
    }

    #[test]
    fn surface_rejects_nonpositive_cost() {
        let err = sweep_investment_surface(
            SweepAxis::new(ParamKey::C, 0.0, 1.0, 0.1),
            SweepAxis::new(ParamKey::Eta, 0.5, 2.5, 0.25),
            &ModelParameters::baseline(),
        );
        assert!(err.is_err());
        let err = sweep_investment_surface(
            SweepAxis::new(ParamKey::C, -0.5, 1.0, 0.1),
            SweepAxis::new(ParamKey::Eta, 0.5, 2.5, 0.25),
            &ModelParameters::baseline(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn unreachable_target_is_never_reached() {
        let (p, sp) = defaults();
        let c = cfg();
        let result = compare_storage_vs_tax(
            &ScenarioSpec::baseline(c),
            &ScenarioSpec::carbon_tax(c),
            &ScenarioSpec::storage(c),
            10_000.0,
            &p,
            &sp,
        )
        .unwrap();
        assert!(result
            .summaries
            .iter()
            .all(|s| s.first_passage == FirstPassage::NeverReached));
        assert!(!result.storage_beats_tax);
    }

    #[test]
    fn short_horizon_is_distinguished_from_never() {
        let (p, sp) = defaults();
        let c = IntegrationConfig {
            dt: 0.1,
            t_end: 2.0,
            ..cfg()
        };
        let result = compare_storage_vs_tax(
            &ScenarioSpec::baseline(c),
            &ScenarioSpec::carbon_tax(c),
            &ScenarioSpec::storage(c),
            300.0,
            &p,
            &sp,
        )
        .unwrap();
        assert_eq!(result.summaries[0].first_passage, FirstPassage::BeyondHorizon);
    }

    #[test]
    fn comparison_requires_shared_config() {
        let (p, sp) = defaults();
        let other = IntegrationConfig { e0: 5.0, ..cfg() };
        assert!(compare_storage_vs_tax(
            &ScenarioSpec::baseline(cfg()),
            &ScenarioSpec::carbon_tax(other),
            &ScenarioSpec::storage(cfg()),
            200.0,
            &p,
            &sp
        )
        .is_err());
    }

    #[test]
    fn shipped_defaults_order_scenarios() {
        let (p, sp) = defaults();
        let c = cfg();
        for target in [50.0, 200.0, 300.0] {
            let r = compare_storage_vs_tax(
                &ScenarioSpec::baseline(c),
                &ScenarioSpec::carbon_tax(c),
                &ScenarioSpec::storage(c),
                target,
                &p,
                &sp,
            )
            .unwrap();
            let t = |n| r.summary(n).unwrap().first_passage.time().unwrap();
            assert!(t(ScenarioName::Storage) < t(ScenarioName::CarbonTax));
            assert!(t(ScenarioName::CarbonTax) < t(ScenarioName::Baseline));
            assert!(r.storage_beats_tax);
        }
    }

    #[test]
    fn dead_storage_never_dominates_and_default_cell_does() {
        let (p, sp) = defaults();
        let c = cfg();
        let table = generate_dominance_table(
            SweepAxis::new(ParamKey::CS, 0.44, 0.88, 0.44),
            SweepAxis::new(ParamKey::EtaS, 0.0, 0.85, 0.85),
            200.0,
            &c,
            FormulaVariant::FocDerived,
            &p,
            &sp,
        )
        .unwrap();
        assert!(table.cells[0].iter().all(|cell| !cell.dominant));
        assert!(table.cells[1][0].dominant, "c_s = 0.44, eta_s = 0.85");
        assert_eq!(table.boundary[0], (0.44, Some(0.425)));
    }

    #[test]
    fn scatter_without_storage_damage_term_is_green_at_defaults() {
        let (p, sp) = defaults();
        let s = environmental_scatter(
            SweepAxis::new(ParamKey::Q, 0.0, 0.04, 0.04),
            SweepAxis::new(ParamKey::Sigma, 0.6, 1.0, 0.4),
            &cfg(),
            FormulaVariant::FocDerived,
            &p,
            &sp,
        )
        .unwrap();
        let at = |q: f64, sigma: f64| *s.points.iter().find(|x| x.q == q && x.sigma == sigma).unwrap();
        assert!(at(0.0, 0.6).green);
        assert!(at(0.04, 0.6).green);
    }

    #[test]
    fn scatter_turns_red_without_storage_value() {
        // no welfare weight and no abatement from storage: the PV share falls
        // below the carbon-tax investment and storage leaves more damage
        let (p, sp) = defaults();
        let s = environmental_scatter(
            SweepAxis::new(ParamKey::Q, 0.0, 0.1, 0.1),
            SweepAxis::new(ParamKey::Sigma, 0.0, 0.1, 0.1),
            &cfg(),
            FormulaVariant::FocDerived,
            &p,
            &sp,
        )
        .unwrap();
        assert!(!s.points[0].green);
        assert!(s.points[0].delta_d_steady < 0.0);
    }
}
