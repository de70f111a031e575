use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use secrecy_core::gamma::{gamma, gamma_grid_oracle};
use secrecy_core::rd::{max_distortion, rate_distortion, wyner_ziv_rate, wz_oracle};
use secrecy_core::region::{
    decompose, equality_condition_check, full_equivocations, region_point, saturation_key_rates, secrecy_distortions,
    zero_key_equivocations, Comparison,
};
use secrecy_core::sim::{key_plan, SimConfig, SimSystem};

use crate::error::{CliError, CliResult};
use crate::model::{self, Grid, LoadedModel};
use crate::output::{document, emit, flat_table, Cell, Format, Metadata, Table};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model file (JSON, schema version 1)
    #[arg(long)]
    pub model: PathBuf,
    /// Write output here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv for sweep, json otherwise]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for grid evaluation and enumeration
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Seed recorded in the metadata; mandatory for simulate
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tie tolerance for systematic-versus-general verdicts
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

/// Operating point; unset values fall back to the model's `params` section.
#[derive(Debug, Clone, Default, Args)]
pub struct PointArgs {
    /// Bandwidth expansion factor λ
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Key rate R (bits per source symbol)
    #[arg(long = "key-rate", short = 'R')]
    pub key_rate: Option<f64>,
    /// Distortion level D
    #[arg(long, short = 'D')]
    pub distortion: Option<f64>,
    /// Cost budget Q
    #[arg(long = "cost", short = 'Q')]
    pub q: Option<f64>,
    /// Rate floor r of Γ(r, Q)
    #[arg(long = "rate-floor", short = 'r')]
    pub rate_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    lambda: Option<f64>,
    key_rate: f64,
    distortion: f64,
    q: f64,
    rate_floor: f64,
}

impl Point {
    fn resolve(args: &PointArgs, m: &LoadedModel) -> Self {
        let p = &m.file.params;
        Point {
            lambda: args.lambda.or(p.lambda),
            key_rate: args.key_rate.or(p.key_rate).unwrap_or(0.0),
            distortion: args.distortion.or(p.distortion).unwrap_or(0.0),
            q: args.q.unwrap_or_else(|| m.budget()),
            rate_floor: args.rate_floor.unwrap_or(0.0),
        }
    }

    fn lambda(&self) -> CliResult<f64> {
        self.lambda
            .ok_or_else(|| CliError::Usage("lambda: not given (use --lambda or params.lambda in the model)".into()))
    }

    fn with(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::R => self.key_rate = value,
            Axis::D => self.distortion = value,
            Axis::Lambda => self.lambda = Some(value),
            Axis::Q => self.q = value,
            Axis::RateFloor => self.rate_floor = value,
        }
        self
    }

    fn json(&self) -> Value {
        json!({
            "lambda": self.lambda,
            "R": self.key_rate,
            "D": self.distortion,
            "Q": self.q,
        })
    }
}

fn format_or(common: &Common, default: Format) -> Format {
    common.format.unwrap_or(default)
}

fn finish(common: &Common, meta: &Metadata, body: Value) -> CliResult<()> {
    let text = match format_or(common, Format::Json) {
        Format::Json => document(meta, body)?,
        Format::Csv => flat_table(&body).render(meta, Format::Csv)?,
    };
    emit(common.out.as_ref(), &text)
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub point: PointArgs,
}

pub fn region(args: &RegionArgs) -> CliResult<()> {
    let m = model::load(&args.common.model)?;
    let pt = Point::resolve(&args.point, &m);
    let lambda = pt.lambda()?;
    let p = region_point(&m.model, lambda, pt.key_rate, pt.distortion, pt.q)?;
    let unsaturated = p.bracket > 0.0;
    let decomposition = if unsaturated {
        Some(decompose(&m.model, lambda, pt.key_rate, pt.distortion, pt.q)?)
    } else {
        None
    };
    let body = json!({
        "point": pt.json(),
        "delta_star": p.delta_star,
        "ceiling": p.ceiling,
        "source_rate": p.source_rate,
        "bandwidth": p.bandwidth,
        "capacity": p.capacity,
        "gamma": p.gamma,
        "bracket": p.bracket,
        "regime": if unsaturated { "unsaturated" } else { "saturated" },
        "saturation_key_rate": (p.bracket + pt.key_rate).max(0.0),
        "decomposition": decomposition,
        "transmissibility": {
            "holds": true,
            "source_rate": p.source_rate,
            "limit": p.bandwidth * p.capacity,
        },
    });
    finish(&args.common, &Metadata::new("region", &m.sha256, args.common.seed, args.common.tol), body)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// Δ*(λ, R, D, Q) of the informed-receiver system
    #[value(name = "delta_star")]
    DeltaStar,
    /// Γ(r, Q) of the coded channels
    #[value(name = "gamma")]
    Gamma,
    /// Wyner–Ziv rate R_U|V(D)
    #[value(name = "wz")]
    Wz,
    /// rate–distortion R_U(D)
    #[value(name = "rd")]
    Rd,
    /// saturation key rates, systematic and general
    #[value(name = "saturation")]
    Saturation,
    /// secrecy distortions, systematic and general
    #[value(name = "secrecy_distortion")]
    SecrecyDistortion,
    /// zero key-rate equivocations, systematic and general
    #[value(name = "zero_key")]
    ZeroKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "R")]
    R,
    #[value(name = "D")]
    D,
    #[value(name = "lambda")]
    Lambda,
    #[value(name = "Q")]
    Q,
    #[value(name = "r")]
    RateFloor,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::R => "R",
            Axis::D => "D",
            Axis::Lambda => "lambda",
            Axis::Q => "Q",
            Axis::RateFloor => "r",
        }
    }
}

impl Quantity {
    fn axes(self) -> &'static [Axis] {
        match self {
            Quantity::DeltaStar => &[Axis::R, Axis::D, Axis::Lambda, Axis::Q],
            Quantity::Gamma => &[Axis::RateFloor, Axis::Q],
            Quantity::Wz | Quantity::Rd => &[Axis::D],
            Quantity::Saturation | Quantity::ZeroKey => &[Axis::D, Axis::Lambda, Axis::Q],
            Quantity::SecrecyDistortion => &[Axis::Lambda, Axis::Q],
        }
    }

    fn columns(self) -> &'static [&'static str] {
        match self {
            Quantity::DeltaStar => &["delta_star"],
            Quantity::Gamma => &["gamma"],
            Quantity::Wz => &["wz_rate"],
            Quantity::Rd => &["rd_rate"],
            Quantity::Saturation | Quantity::SecrecyDistortion | Quantity::ZeroKey => &["sys", "gen"],
        }
    }

    fn evaluate(self, m: &LoadedModel, pt: Point) -> CliResult<Vec<f64>> {
        let sm = &m.model;
        let pair = |c: Comparison| vec![c.sys, c.gen];
        Ok(match self {
            Quantity::DeltaStar => {
                vec![region_point(sm, pt.lambda()?, pt.key_rate, pt.distortion, pt.q)?.delta_star]
            }
            Quantity::Gamma => vec![gamma(sm.coded(), pt.rate_floor, pt.q)?.value],
            Quantity::Wz => vec![wyner_ziv_rate(sm.pu(), sm.ch_v(), sm.d(), pt.distortion)?.rate],
            Quantity::Rd => vec![rate_distortion(sm.pu(), sm.d(), pt.distortion)?],
            Quantity::Saturation => pair(saturation_key_rates(sm, pt.lambda()?, pt.distortion, pt.q)?),
            Quantity::ZeroKey => pair(zero_key_equivocations(sm, pt.lambda()?, pt.distortion, pt.q)?),
            Quantity::SecrecyDistortion => {
                let s = secrecy_distortions(sm, pt.lambda()?, pt.q)?;
                vec![s.sys, s.gen]
            }
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub point: PointArgs,
    /// Quantity to tabulate
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// Independent variable
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Grid start (with --stop and --step; otherwise params.grids.<axis>)
    #[arg(long, requires_all = ["stop", "step"])]
    pub start: Option<f64>,
    #[arg(long, requires_all = ["start", "step"])]
    pub stop: Option<f64>,
    #[arg(long, requires_all = ["start", "stop"])]
    pub step: Option<f64>,
}

fn sweep_grid(args: &SweepArgs, m: &LoadedModel) -> CliResult<Vec<f64>> {
    if let (Some(start), Some(stop), Some(step)) = (args.start, args.stop, args.step) {
        return Grid { start, stop, step }.points();
    }
    let g = &m.file.params.grids;
    let grid = match args.axis {
        Axis::R => g.key_rate,
        Axis::D => g.distortion,
        Axis::Lambda => g.lambda,
        Axis::Q => g.q,
        Axis::RateFloor => g.rate_floor,
    };
    grid.ok_or_else(|| {
        CliError::Usage(format!(
            "no grid for axis {}: pass --start/--stop/--step or set params.grids.{}",
            args.axis.name(),
            args.axis.name()
        ))
    })?
    .points()
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    if !args.quantity.axes().contains(&args.axis) {
        let allowed: Vec<&str> = args.quantity.axes().iter().map(|a| a.name()).collect();
        return Err(CliError::Usage(format!(
            "quantity {} cannot be swept over {}; allowed axes: {}",
            args.quantity.to_possible_value().map_or_else(String::new, |v| v.get_name().to_string()),
            args.axis.name(),
            allowed.join(", ")
        )));
    }
    let m = model::load(&args.common.model)?;
    let grid = sweep_grid(args, &m)?;
    let base = Point::resolve(&args.point, &m);
    let results: Vec<CliResult<Vec<f64>>> =
        grid.par_iter().map(|&x| args.quantity.evaluate(&m, base.with(args.axis, x))).collect();

    let width = args.quantity.columns().len();
    let mut rows = Vec::with_capacity(grid.len());
    for (&x, r) in grid.iter().zip(results) {
        let mut row = vec![Cell::Num(x)];
        match r {
            Ok(values) => {
                row.extend(values.into_iter().map(Cell::Num));
                row.extend([Cell::Text("ok".into()), Cell::Empty]);
            }
            Err(CliError::Infeasible { code, .. }) => {
                row.extend(std::iter::repeat_n(Cell::Empty, width));
                row.extend([Cell::Text("infeasible".into()), Cell::Text(code.into())]);
            }
            Err(e) => return Err(e),
        }
        rows.push(row);
    }
    let mut columns = vec![args.axis.name().to_string()];
    columns.extend(args.quantity.columns().iter().map(|c| c.to_string()));
    columns.extend(["status".to_string(), "reason".to_string()]);
    let table = Table { columns, rows };
    let meta = Metadata::new("sweep", &m.sha256, args.common.seed, args.common.tol);
    emit(args.common.out.as_ref(), &table.render(&meta, format_or(&args.common, Format::Csv))?)
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub point: PointArgs,
    /// Source block length N
    #[arg(long = "source-block", short = 'N')]
    pub source_block: usize,
    /// Channel block length n
    #[arg(long = "channel-block", short = 'n')]
    pub channel_block: usize,
    /// Quantizer messages M (padded to a power of two)
    #[arg(long, short = 'M')]
    pub messages: usize,
    /// Codewords per sub-code M2
    #[arg(long = "subcode-size", default_value_t = 1)]
    pub subcode_size: usize,
    /// Pad length in bits; derived from λ, R, D, Q when absent
    #[arg(long = "key-bits")]
    pub key_bits: Option<u32>,
    /// Distortion target of the toy quantizer [default: D_max of the source]
    #[arg(long = "target-distortion")]
    pub target_distortion: Option<f64>,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let seed = args
        .common
        .seed
        .ok_or_else(|| CliError::Usage("simulate needs --seed (no implicit entropy source)".into()))?;
    let m = model::load(&args.common.model)?;
    let pt = Point::resolve(&args.point, &m);
    let (key_bits, plan) = match args.key_bits {
        Some(kb) => (kb, None),
        None => {
            let plan = key_plan(&m.model, pt.lambda()?, pt.key_rate, pt.distortion, pt.q, args.source_block)?;
            (plan.key_bits, Some(plan))
        }
    };
    let target = match args.target_distortion {
        Some(t) => t,
        None => max_distortion(m.model.pu(), m.model.d())?,
    };
    let cfg = SimConfig {
        source_block: args.source_block,
        channel_block: args.channel_block,
        messages: args.messages,
        subcode_size: args.subcode_size,
        key_bits,
        seed,
        px_star: None,
        target_distortion: target,
    };
    let report = SimSystem::from_config(m.model.clone(), &cfg)?.measure()?;
    let body = json!({ "config": cfg, "key_plan": plan, "report": report });
    finish(&args.common, &Metadata::new("simulate", &m.sha256, Some(seed), args.common.tol), body)
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub point: PointArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Better {
    Higher,
    Lower,
}

fn verdict(c: Comparison, better: Better, tol: f64) -> &'static str {
    if (c.sys - c.gen).abs() <= tol {
        "equal"
    } else if (c.sys > c.gen) == (better == Better::Higher) {
        "sys"
    } else {
        "gen"
    }
}

pub fn compare(args: &CompareArgs) -> CliResult<()> {
    let m = model::load(&args.common.model)?;
    let pt = Point::resolve(&args.point, &m);
    let lambda = pt.lambda()?;
    let tol = args.common.tol;
    let sm = &m.model;
    let criteria: [(&str, Better, CliResult<Comparison>); 4] = [
        ("full_equivocation", Better::Higher, Ok(full_equivocations(sm))),
        (
            "zero_key_equivocation",
            Better::Higher,
            zero_key_equivocations(sm, lambda, pt.distortion, pt.q).map_err(CliError::from),
        ),
        (
            "saturation_key_rate",
            Better::Lower,
            saturation_key_rates(sm, lambda, pt.distortion, pt.q).map_err(CliError::from),
        ),
        (
            "secrecy_distortion",
            Better::Lower,
            secrecy_distortions(sm, lambda, pt.q).map(|s| Comparison { sys: s.sys, gen: s.gen }).map_err(CliError::from),
        ),
    ];
    let mut rows = Vec::new();
    let mut first_infeasible = None;
    let mut flag = |name: &str, e: CliError, rows: &mut Vec<Vec<Cell>>, better: &str| -> CliResult<()> {
        match e {
            CliError::Infeasible { code, message } => {
                rows.push(vec![
                    Cell::Text(name.into()),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Text(better.into()),
                    Cell::Empty,
                    Cell::Text("infeasible".into()),
                    Cell::Text(code.into()),
                ]);
                first_infeasible.get_or_insert(CliError::Infeasible { code, message });
                Ok(())
            }
            other => Err(other),
        }
    };
    for (name, better, result) in criteria {
        let better_text = if better == Better::Higher { "higher" } else { "lower" };
        match result {
            Ok(c) => rows.push(vec![
                Cell::Text(name.into()),
                Cell::Num(c.sys),
                Cell::Num(c.gen),
                Cell::Text(better_text.into()),
                Cell::Text(verdict(c, better, tol).into()),
                Cell::Text("ok".into()),
                Cell::Empty,
            ]),
            Err(e) => flag(name, e, &mut rows, better_text)?,
        }
    }
    match equality_condition_check(sm, lambda, pt.distortion, pt.q) {
        Ok(eq) => rows.push(vec![
            Cell::Text("equality_condition".into()),
            Cell::Num(eq.lhs),
            Cell::Num(eq.rhs),
            Cell::Empty,
            Cell::Text(if eq.holds { "holds" } else { "fails" }.into()),
            Cell::Text("ok".into()),
            Cell::Empty,
        ]),
        Err(e) => flag("equality_condition", e.into(), &mut rows, "")?,
    }
    let table = Table {
        columns: ["criterion", "sys", "gen", "better", "verdict", "status", "reason"].map(String::from).to_vec(),
        rows,
    };
    let meta = Metadata::new("compare", &m.sha256, args.common.seed, tol);
    emit(args.common.out.as_ref(), &table.render(&meta, format_or(&args.common, Format::Json))?)?;
    match first_infeasible {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    /// exhaustive grid over P(A|U) for R_U|V(D)
    Wz,
    /// simplex grid over P_X for Γ(r, Q)
    Gamma,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum)]
    pub kind: OracleKind,
    /// Lattice spacing of the grid search
    #[arg(long = "grid-step", default_value_t = 0.02)]
    pub grid_step: f64,
}

pub fn oracle(args: &OracleArgs) -> CliResult<()> {
    let m = model::load(&args.common.model)?;
    let pt = Point::resolve(&args.point, &m);
    let sm = &m.model;
    let (kind, point, oracle_value, solver) = match args.kind {
        OracleKind::Wz => (
            "wz",
            json!({ "D": pt.distortion }),
            wz_oracle(sm.pu(), sm.ch_v(), sm.d(), pt.distortion, args.grid_step)?,
            wyner_ziv_rate(sm.pu(), sm.ch_v(), sm.d(), pt.distortion)?.rate,
        ),
        OracleKind::Gamma => (
            "gamma",
            json!({ "r": pt.rate_floor, "Q": pt.q }),
            gamma_grid_oracle(sm.coded(), pt.rate_floor, pt.q, args.grid_step)?.value,
            gamma(sm.coded(), pt.rate_floor, pt.q)?.value,
        ),
    };
    let body = json!({
        "kind": kind,
        "point": point,
        "grid_step": args.grid_step,
        "oracle": oracle_value,
        "solver": solver,
        "solver_minus_oracle": solver - oracle_value,
    });
    finish(&args.common, &Metadata::new("oracle", &m.sha256, args.common.seed, args.common.tol), body)
}
