use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pvinvest::io::csv::{format_number, render_csv, trajectory_csv};
use pvinvest::io::svg::{Grid, Labels, Marker, Series};
use pvinvest::io::{self, emit_plot_svg, load_config, OutputFormat, Plot, RunConfig};
use pvinvest::model::{
    costates_base, costates_storage, dominance_threshold, investment_gap, viability_threshold, ClosedFormSolution,
    CostateValues, FormulaVariant, InvestmentGap,
};
use pvinvest::oracle::{
    brute_force_optimal_constant_control, calibrate_composite_term, oracle_config, verify_base_oracle,
    verify_storage_dominance, Calibration, DominanceReport, OracleSweep, VerificationReport,
};
use pvinvest::scenarios::{
    compare_storage_vs_tax, environmental_scatter, generate_dominance_table, run_scenario, sweep, FirstPassage,
    ScenarioName, ScenarioSpec, SweepAxis, SweepGrid, SweepQuantity, SweepSpec,
};
use pvinvest::{Error, ModelParameters, ParamKey, Result, StorageParameters, Trajectory};

#[derive(Parser)]
#[command(
    name = "pvinvest",
    version,
    about = "Optimal PV and storage investment: solve, simulate, sweep, verify"
)]
struct Cli {
    /// JSON run configuration; omitted sections take the calibrated defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tabular output format (overrides output.formats).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Published,
    Foc,
}

impl From<VariantArg> for FormulaVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Published => FormulaVariant::AsPublished,
            VariantArg::Foc => FormulaVariant::FocDerived,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    /// Closed-form quantity over one or two parameter axes.
    Surface,
    /// Storage vs carbon tax over (c_s, eta_s).
    Dominance,
    /// Damage impact of storage vs carbon tax over (q, sigma).
    Environment,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    IStar,
    EStar,
    DStar,
    Dominance,
}

impl From<QuantityArg> for SweepQuantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::IStar => SweepQuantity::IStar,
            QuantityArg::EStar => SweepQuantity::EStar,
            QuantityArg::DStar => SweepQuantity::DStar,
            QuantityArg::Dominance => SweepQuantity::Dominance,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lines,
    SurfaceHeatmap,
    Scatter,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form optimum, steady state and co-states.
    Solve {
        #[arg(long)]
        storage: bool,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// RK4 trajectory under the optimal constant investment.
    Simulate {
        #[arg(long)]
        storage: bool,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Parameter grids.
    Sweep {
        #[arg(long, value_enum, default_value = "surface")]
        grid: GridArg,
        /// Axis as `param:min:max:step`.
        #[arg(long)]
        x: Option<String>,
        /// Second axis, same form as `--x`.
        #[arg(long)]
        y: Option<String>,
        #[arg(long, value_enum, default_value = "i-star")]
        quantity: QuantityArg,
        /// Energy-stock target for first-passage times.
        #[arg(long, default_value_t = 200.0)]
        target: f64,
    },
    /// Baseline, carbon tax and storage side by side.
    Compare {
        #[arg(long, default_value_t = 200.0)]
        target: f64,
    },
    /// Brute-force and property checks of the closed forms.
    Verify {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// SVG charts.
    Plot {
        #[arg(long, value_enum, default_value = "lines")]
        kind: KindArg,
    },
}

enum Outcome {
    Done,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            let message = e.to_string();
            eprintln!("error: {message}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let cause = s.to_string();
                if !message.contains(&cause) {
                    eprintln!("  caused by: {cause}");
                }
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}

struct Context {
    cfg: RunConfig,
    dir: PathBuf,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn formats(&self) -> &[OutputFormat] {
        &self.cfg.output.formats
    }

    /// Writes `name.csv` and/or `name.json` according to the selected formats.
    fn write_table<T: Serialize>(&self, name: &str, value: &T, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        for f in self.formats() {
            let path = self.path(&format!("{name}.{}", f.extension()));
            match f {
                OutputFormat::Csv => io::write_csv(&path, header, rows)?,
                OutputFormat::Json => io::write_json(value, &path)?,
            }
        }
        Ok(())
    }

    fn write_trajectory(&self, name: &str, traj: &Trajectory) -> Result<()> {
        for f in self.formats() {
            let path = self.path(&format!("{name}.{}", f.extension()));
            match f {
                OutputFormat::Csv => io::write_text_file(&path, &trajectory_csv(traj))?,
                OutputFormat::Json => io::write_json(traj, &path)?,
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.formats = vec![match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }];
    }
    if let Command::Solve { storage, variant } | Command::Simulate { storage, variant } = &cli.command {
        if *storage && !cfg.scenario.uses_storage() {
            cfg.scenario.name = ScenarioName::Storage;
        }
        if let Some(v) = variant {
            cfg.scenario.variant = (*v).into();
        }
    }
    cfg.validate()?;
    let dir = cfg.output.directory.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let ctx = Context { cfg, dir };
    ctx.cfg.write_effective(&ctx.dir)?;
    match cli.command {
        Command::Solve { .. } => solve(&ctx),
        Command::Simulate { .. } => simulate(&ctx),
        Command::Sweep {
            grid,
            x,
            y,
            quantity,
            target,
        } => run_sweep(&ctx, grid, x, y, quantity, target),
        Command::Compare { target } => compare(&ctx, target),
        Command::Verify { samples, seed } => verify(&ctx, samples, seed),
        Command::Plot { kind } => plot(&ctx, kind),
    }
}

#[derive(Serialize)]
struct SolveReport {
    scenario: ScenarioName,
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<FormulaVariant>,
    model: ModelParameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    storage: Option<StorageParameters>,
    solution: ClosedFormSolution,
    effective_investment: f64,
    costates_t0: CostateValues,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<InvestmentGap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    viability_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dominance_threshold: Option<f64>,
}

fn solve(ctx: &Context) -> Result<Outcome> {
    let spec = &ctx.cfg.scenario;
    let out = run_scenario(spec, &ctx.cfg.model, &ctx.cfg.storage)?;
    let p = out.model;
    let report = SolveReport {
        scenario: out.name,
        variant: out.storage.map(|_| spec.variant),
        model: p,
        storage: out.storage,
        solution: out.solution,
        effective_investment: out.effective_investment,
        costates_t0: match &out.storage {
            Some(sp) => costates_storage(&p, sp, 0.0)?,
            None => costates_base(&p, 0.0)?,
        },
        gap: out.storage.map(|sp| investment_gap(&p, &sp, spec.variant)),
        viability_threshold: out.storage.map(|sp| viability_threshold(&p, &sp)),
        dominance_threshold: out.storage.map(|sp| dominance_threshold(&p, &sp)),
    };
    let mut rows = vec![
        ("i_star", Some(report.solution.i_star)),
        ("effective_investment", Some(report.effective_investment)),
        ("psi", Some(report.solution.psi)),
        ("e_star", Some(report.solution.e_star)),
        ("d_star", Some(report.solution.d_star)),
        ("s_star", report.solution.s_star),
        ("mu_0", Some(report.costates_t0.mu)),
        ("lambda_0", Some(report.costates_t0.lambda)),
        ("nu_0", report.costates_t0.nu),
    ];
    if let Some(g) = report.gap {
        rows.extend([
            ("gap_scaling_term", Some(g.scaling_term)),
            ("gap_storage_term", Some(g.storage_term)),
            ("gap_total", Some(g.total)),
        ]);
    }
    rows.push(("viability_threshold", report.viability_threshold));
    rows.push(("dominance_threshold", report.dominance_threshold));
    let rows: Vec<Vec<String>> = rows
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| vec![k.to_string(), format_number(v)]))
        .collect();
    ctx.write_table("solution", &report, &["quantity", "value"], &rows)?;
    let label = report.variant.map(|v| format!(" ({})", v.label())).unwrap_or_default();
    println!(
        "{}{label}: I* = {}",
        report.scenario,
        format_number(report.solution.i_star)
    );
    if report.solution.clamped {
        println!("note: unconstrained optimum was negative and has been clamped to 0");
    }
    Ok(Outcome::Done)
}

fn simulate(ctx: &Context) -> Result<Outcome> {
    let out = run_scenario(&ctx.cfg.scenario, &ctx.cfg.model, &ctx.cfg.storage)?;
    ctx.write_trajectory("trajectory", &out.trajectory)?;
    let last = out.trajectory.last();
    println!(
        "{}: {} samples, E({}) = {}, objective = {}",
        out.name,
        out.trajectory.samples.len(),
        format_number(last.t),
        format_number(last.e),
        format_number(out.objective)
    );
    if out.trajectory.clamped {
        println!("note: the energy stock was clamped at zero");
    }
    Ok(Outcome::Done)
}

fn parse_axis(spec: &str) -> Result<SweepAxis> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidArgument(format!("axis '{spec}' must look like param:min:max:step"));
    let [key, min, max, step] = parts.as_slice() else {
        return Err(bad());
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    Ok(SweepAxis::new(
        key.parse::<ParamKey>()?,
        num(min)?,
        num(max)?,
        num(step)?,
    ))
}

fn axis_or(arg: Option<String>, default: SweepAxis) -> Result<SweepAxis> {
    arg.map_or(Ok(default), |s| parse_axis(&s))
}

fn passage_cell(p: &FirstPassage) -> String {
    match p {
        FirstPassage::Reached { t } => format_number(*t),
        FirstPassage::NeverReached => "never".into(),
        FirstPassage::BeyondHorizon => "beyond_horizon".into(),
    }
}

fn surface_axes(x: Option<String>, y: Option<String>) -> Result<Vec<SweepAxis>> {
    let mut axes = vec![axis_or(x, SweepAxis::new(ParamKey::C, 0.1, 1.0, 0.05))?];
    axes.push(axis_or(y, SweepAxis::new(ParamKey::Eta, 0.5, 2.5, 0.1))?);
    Ok(axes)
}

fn grid_rows(grid: &SweepGrid) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (r, row) in grid.values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let mut line = vec![format_number(grid.x[c])];
            if let Some(y) = grid.y.get(r) {
                line.push(format_number(*y));
            }
            line.push(format_number(*v));
            rows.push(line);
        }
    }
    rows
}

fn run_sweep(
    ctx: &Context,
    grid: GridArg,
    x: Option<String>,
    y: Option<String>,
    quantity: QuantityArg,
    target: f64,
) -> Result<Outcome> {
    let (p, sp, sim) = (&ctx.cfg.model, &ctx.cfg.storage, &ctx.cfg.simulation);
    let variant = ctx.cfg.scenario.variant;
    match grid {
        GridArg::Surface => {
            let spec = SweepSpec {
                axes: surface_axes(x, y)?,
                quantity: quantity.into(),
                variant,
            };
            let result = sweep(&spec, p, sp)?;
            let value = serde_json::to_value(result.quantity).expect("enum serializes");
            let (xn, yn) = (result.x_param.name(), result.y_param.map(|k| k.name()));
            let mut header = vec![xn];
            header.extend(yn);
            header.push(value.as_str().unwrap_or("value"));
            ctx.write_table("sweep", &result, &header, &grid_rows(&result))?;
            println!("sweep: {} x {} grid", result.x.len(), result.y.len().max(1));
        }
        GridArg::Dominance => {
            let c_axis = axis_or(x, SweepAxis::new(ParamKey::CS, 0.05, 1.0, 0.05))?;
            let eta_axis = axis_or(y, SweepAxis::new(ParamKey::EtaS, 0.05, 1.0, 0.05))?;
            let table = generate_dominance_table(c_axis, eta_axis, target, sim, variant, p, sp)?;
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|c| {
                    vec![
                        format_number(c.c_s),
                        format_number(c.eta_s),
                        format_number(c.storage_e_star),
                        format_number(c.tax_e_star),
                        passage_cell(&c.storage_passage),
                        passage_cell(&c.tax_passage),
                        u8::from(c.dominant).to_string(),
                    ]
                })
                .collect();
            let header = [
                "c_s",
                "eta_s",
                "storage_e_star",
                "tax_e_star",
                "storage_passage",
                "tax_passage",
                "dominant",
            ];
            ctx.write_table("dominance", &table, &header, &rows)?;
            let dominant = table.iter().filter(|c| c.dominant).count();
            println!("dominance: storage dominant in {dominant} of {} cells", rows.len());
        }
        GridArg::Environment => {
            let q_axis = axis_or(x, SweepAxis::new(ParamKey::Q, 0.0, 0.2, 0.01))?;
            let sigma_axis = axis_or(y, SweepAxis::new(ParamKey::Sigma, 0.0, 1.0, 0.05))?;
            let scatter = environmental_scatter(q_axis, sigma_axis, sim, variant, p, sp)?;
            let rows: Vec<Vec<String>> = scatter
                .points
                .iter()
                .map(|pt| {
                    vec![
                        format_number(pt.q),
                        format_number(pt.sigma),
                        format_number(pt.delta_d_steady),
                        format_number(pt.delta_d_horizon),
                        u8::from(pt.green).to_string(),
                    ]
                })
                .collect();
            let header = ["q", "sigma", "delta_d_steady", "delta_d_horizon", "green"];
            ctx.write_table("environment", &scatter, &header, &rows)?;
            println!("environment: {:.1}% of points green", 100.0 * scatter.green_share());
        }
    }
    Ok(Outcome::Done)
}

fn compare(ctx: &Context, target: f64) -> Result<Outcome> {
    let sim = ctx.cfg.simulation;
    let variant = ctx.cfg.scenario.variant;
    let storage = ScenarioSpec {
        variant,
        ..ScenarioSpec::storage(sim)
    };
    let result = compare_storage_vs_tax(
        &ScenarioSpec::baseline(sim),
        &ScenarioSpec::carbon_tax(sim),
        &storage,
        target,
        &ctx.cfg.model,
        &ctx.cfg.storage,
    )?;
    let rows: Vec<Vec<String>> = result
        .summaries
        .iter()
        .map(|s| {
            vec![
                s.name.to_string(),
                format_number(s.i_star),
                format_number(s.effective_investment),
                format_number(s.e_star),
                format_number(s.d_star),
                s.s_star.map(format_number).unwrap_or_default(),
                format_number(s.objective),
                passage_cell(&s.first_passage),
            ]
        })
        .collect();
    let header = [
        "scenario",
        "i_star",
        "effective_investment",
        "e_star",
        "d_star",
        "s_star",
        "objective",
        "first_passage",
    ];
    ctx.write_table("comparison", &result, &header, &rows)?;
    if ctx.formats().contains(&OutputFormat::Csv) {
        for o in &result.outcomes {
            io::write_text_file(
                &ctx.path(&format!("trajectory_{}.csv", o.name)),
                &trajectory_csv(&o.trajectory),
            )?;
        }
    }
    print!("{}", render_csv(&header, &rows));
    println!("storage beats carbon tax: {}", result.storage_beats_tax);
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct VerifySummary {
    samples: usize,
    seed: u64,
    base_oracle: OracleSweep,
    storage_oracle: VerificationReport,
    dominance: DominanceReport,
    calibration: Calibration,
    passed: bool,
}

fn verify(ctx: &Context, samples: usize, seed: u64) -> Result<Outcome> {
    let (p, sp) = (&ctx.cfg.model, &ctx.cfg.storage);
    let base_oracle = verify_base_oracle(p, samples, seed)?;
    let cfg = oracle_config(
        p,
        Some(sp),
        ctx.cfg.simulation.e0,
        ctx.cfg.simulation.d0,
        ctx.cfg.simulation.s0,
    );
    let storage_oracle = brute_force_optimal_constant_control(p, Some(sp), FormulaVariant::FocDerived, &cfg, None)?;
    let dominance = verify_storage_dominance(p, sp, samples, seed)?;
    let tax = ModelParameters::carbon_tax();
    let calibration = calibrate_composite_term(11.6364, 14.1026, (p.r, p.c), (tax.r, tax.c), p.eta)?;
    let passed = base_oracle.passed && storage_oracle.passed && dominance.passed;
    let summary = VerifySummary {
        samples,
        seed,
        base_oracle,
        storage_oracle,
        dominance,
        calibration,
        passed,
    };
    let flag = |b: bool| u8::from(b).to_string();
    let alt_gap = summary.storage_oracle.alternative.map_or(f64::NAN, |a| a.relative_gap);
    let rows = vec![
        vec![
            "base_oracle".into(),
            flag(summary.base_oracle.passed),
            "max_relative_gap".into(),
            format_number(summary.base_oracle.max_relative_gap),
        ],
        vec![
            "storage_oracle".into(),
            flag(summary.storage_oracle.passed),
            "relative_gap".into(),
            format_number(summary.storage_oracle.relative_gap),
        ],
        vec![
            "storage_oracle_as_published".into(),
            "".into(),
            "relative_gap".into(),
            format_number(alt_gap),
        ],
        vec![
            "dominance".into(),
            flag(summary.dominance.passed),
            "max_identity_error".into(),
            format_number(summary.dominance.max_identity_error),
        ],
        vec![
            "calibration".into(),
            "1".into(),
            "psi".into(),
            format_number(summary.calibration.psi),
        ],
    ];
    ctx.write_table("verification", &summary, &["check", "passed", "metric", "value"], &rows)?;
    println!(
        "base oracle: {} (max gap {:.2e}); storage oracle: {} (gap {:.2e}, as-published gap {:.2e}); dominance: {} ({}/{})",
        pass(summary.base_oracle.passed),
        summary.base_oracle.max_relative_gap,
        pass(summary.storage_oracle.passed),
        summary.storage_oracle.relative_gap,
        alt_gap,
        pass(summary.dominance.passed),
        summary.dominance.holds,
        summary.dominance.samples
    );
    Ok(if passed {
        Outcome::Done
    } else {
        Outcome::VerificationFailed
    })
}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn plot(ctx: &Context, kind: KindArg) -> Result<Outcome> {
    let (p, sp, sim) = (&ctx.cfg.model, &ctx.cfg.storage, &ctx.cfg.simulation);
    let variant = ctx.cfg.scenario.variant;
    let (plot, name) = match kind {
        KindArg::Lines => {
            let specs = [
                ScenarioSpec::baseline(*sim),
                ScenarioSpec::carbon_tax(*sim),
                ScenarioSpec {
                    variant,
                    ..ScenarioSpec::storage(*sim)
                },
            ];
            let series = specs
                .iter()
                .map(|s| {
                    let out = run_scenario(s, p, sp)?;
                    Ok(Series {
                        label: out.name.to_string().replace('_', " "),
                        points: out.trajectory.samples.iter().map(|x| (x.t, x.e)).collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let labels = Labels::new(
                "Energy stock under the optimal constant investment",
                "time t [years]",
                "energy stock E [MWh]",
            );
            (Plot::Lines { labels, series }, "plot_lines.svg")
        }
        KindArg::SurfaceHeatmap => {
            let spec = SweepSpec {
                axes: surface_axes(None, None)?,
                quantity: SweepQuantity::IStar,
                variant,
            };
            let g = sweep(&spec, p, sp)?;
            let grid = Grid {
                x: g.x,
                y: g.y,
                values: g.values,
                value_label: "I* [EUR/MWh]".into(),
            };
            let labels = Labels::new(
                "Optimal PV investment",
                "investment cost c [-]",
                "PV productivity eta [-]",
            );
            (Plot::SurfaceHeatmap { labels, grid }, "plot_surface.svg")
        }
        KindArg::Scatter => {
            let scatter = environmental_scatter(
                SweepAxis::new(ParamKey::Q, 0.0, 0.2, 0.01),
                SweepAxis::new(ParamKey::Sigma, 0.0, 1.0, 0.05),
                sim,
                variant,
                p,
                sp,
            )?;
            let markers = scatter
                .points
                .iter()
                .map(|pt| Marker {
                    x: pt.q,
                    y: pt.sigma,
                    good: pt.green,
                })
                .collect();
            let labels = Labels::new(
                "Damage impact of storage relative to the carbon tax",
                "storage damage coefficient q [1/year]",
                "storage welfare weight sigma [-]",
            );
            let legend = ("storage leaves less damage".into(), "storage leaves more damage".into());
            (
                Plot::Scatter {
                    labels,
                    markers,
                    legend,
                },
                "plot_scatter.svg",
            )
        }
    };
    let path = ctx.path(name);
    emit_plot_svg(&plot, &path)?;
    println!("wrote {}", path.display());
    Ok(Outcome::Done)
}
