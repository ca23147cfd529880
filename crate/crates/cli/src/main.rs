//! `nutriutil` command-line front end.
//!
//! Exit codes: 0 success, 1 validation errors, 2 input errors, 3 infeasible
//! optimization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nutriutil::indifference::{level_set_on, surface_csv, DEFAULT_GRID};
use nutriutil::utility::curve_csv;
use nutriutil::{
    curve_sample, equal_weights, evaluate_diet, indifference_area, max_utility_under_budget, min_cost_adequate_diet,
    mrs, BudgetOptions, ClampFloor, ConcreteFunctionSpec, Error, FoodTable, IntakeBundle, Measure, MrsResult,
    NutrientTable, ResolvedProfile, Sex, Status, SurfaceModel, UtilityParams, UtilitySurface,
};

#[derive(Parser, Debug)]
#[command(name = "nutriutil", version, about = "Threshold-based nutritional utility: evaluate, plot and optimize diets")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Nutrient table CSV; the bundled table is used when absent.
    #[arg(long, global = true, env = "NUTRIUTIL_TABLE", value_name = "PATH")]
    table: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    sex: Option<SexArg>,
    /// Segment I curvature exponent.
    #[arg(long, global = true, default_value_t = 2.0)]
    p: f64,
    /// Segment III curvature exponent.
    #[arg(long, global = true, default_value_t = 2.0)]
    q: f64,
    /// Segment III decay scale in mg; defaults to each nutrient's UL - RDA.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = ClampArg::Zero)]
    clamp: ClampArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SexArg {
    Men,
    Women,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ClampArg {
    Zero,
    None,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Rows,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Mincost,
    Budget,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the nutrient table and list findings.
    Validate,
    /// Score an intake file (`nutrient_id,amount,unit`).
    Eval {
        intake: PathBuf,
        /// Score only these nutrients, with equal weights.
        #[arg(long, value_delimiter = ',')]
        nutrients: Vec<String>,
    },
    /// Sample one nutrient's utility curve as `x,utility,marginal`.
    Curve {
        nutrient: String,
        /// Upper intake, in the nutrient's unit.
        #[arg(long)]
        extent: Option<f64>,
        /// Number of evenly spaced samples.
        #[arg(long, default_value = "101")]
        grid: String,
    },
    /// Sample the equal-weight utility surface of two nutrients as `x1,x2,value`.
    Surface {
        first: String,
        second: String,
        #[arg(long)]
        extent: Option<String>,
        #[arg(long, default_value = "256x256")]
        grid: String,
    },
    /// Report the indifference area of two or more nutrients.
    Area {
        #[arg(required = true, num_args = 1..)]
        nutrients: Vec<String>,
    },
    /// Marginal rate of substitution at a point.
    Mrs {
        first: String,
        second: String,
        /// Coordinates `x1,x2` in each nutrient's unit.
        #[arg(long)]
        point: String,
        /// Score a concrete function (e.g. `fluid-balance`) instead of the additive total.
        #[arg(long)]
        concrete: Option<String>,
    },
    /// Contour of the equal-weight surface at a utility level in (0, 1).
    Levelset {
        first: String,
        second: String,
        #[arg(long)]
        level: f64,
        #[arg(long)]
        extent: Option<String>,
        #[arg(long, default_value = "256x256")]
        grid: String,
    },
    /// Cheapest adequate diet, or best diet within a budget.
    Optimize {
        foods: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Mincost)]
        mode: Mode,
        #[arg(long)]
        budget: Option<f64>,
        /// Maximum servings of a food, `food_id=N`; repeatable.
        #[arg(long = "cap", value_name = "FOOD=N")]
        caps: Vec<String>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.common.out {
                Some(path) => std::fs::write(path, &out.text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(out.code),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let c = &cli.common;
    let table = match &c.table {
        Some(path) => NutrientTable::load(path)?,
        None => NutrientTable::bundled(),
    };
    let params = UtilityParams {
        p: c.p,
        q: c.q,
        lambda: c.lambda,
        clamp: match c.clamp {
            ClampArg::Zero => ClampFloor::ClampAtZero,
            ClampArg::None => ClampFloor::Unbounded,
        },
    };
    params.validate()?;
    // Geometry is the same picture for either sex up to thresholds; default to men.
    let geometry_sex = c.sex.map_or(Sex::Men, to_sex);
    let required_sex = || {
        c.sex
            .map(to_sex)
            .ok_or_else(|| input_error("--sex {men|women} is required: RDAs differ by sex"))
    };

    match &cli.command {
        Command::Validate => {
            let report = table.validate();
            Ok(Output {
                text: report.render(),
                code: if report.has_errors() { 1 } else { 0 },
            })
        }
        Command::Eval { intake, nutrients } => {
            let sex = required_sex()?;
            let bundle = IntakeBundle::load(intake, &table)?;
            let weights = if nutrients.is_empty() {
                None
            } else {
                Some(equal_weights(nutrients)?)
            };
            let report = evaluate_diet(&table, &params, &bundle, sex, weights.as_ref())?;
            Ok(Output::ok(match c.format {
                Format::Text => report.render_text(),
                Format::Rows => report.render_rows(),
            }))
        }
        Command::Curve { nutrient, extent, grid } => {
            let profile = table.profile_for(nutrient, geometry_sex)?;
            let n = parse_grid(grid)?.0;
            let x_max = extent.unwrap_or_else(|| default_extent(&profile));
            let samples = curve_sample(&profile, &params, x_max, n)?;
            let body = curve_csv(&samples);
            let rows = body.split_once('\n').map_or("", |(_, rest)| rest);
            Ok(Output::ok(format!("x,utility,marginal\n{rows}")))
        }
        Command::Surface {
            first,
            second,
            extent,
            grid,
        } => {
            let pair = pair(&table, first, second, geometry_sex)?;
            let extent = parse_extent(extent.as_deref(), &pair)?;
            let surface = UtilitySurface::new(pair, params, SurfaceModel::equal())?;
            Ok(Output::ok(surface_csv(&surface.grid(parse_grid(grid)?, extent)?)))
        }
        Command::Area { nutrients } => {
            let profiles = nutrients
                .iter()
                .map(|n| table.profile_for(n, geometry_sex))
                .collect::<Result<Vec<_>, _>>()?;
            let area = indifference_area(&profiles)?;
            let mut text = String::new();
            for (iv, p) in area.intervals.iter().zip(&profiles) {
                let hi = iv.hi.map_or("inf".to_string(), |h| format!("{h:.6}"));
                let _ = writeln!(text, "{} [{:.6}, {hi}] {}", iv.id, iv.lo, p.unit.as_str());
            }
            match area.measure {
                Measure::Finite(m) => {
                    let _ = writeln!(text, "measure {m:.6}");
                }
                Measure::Infinite => text.push_str("measure inf\n"),
            }
            Ok(Output::ok(text))
        }
        Command::Mrs {
            first,
            second,
            point,
            concrete,
        } => {
            let pair = pair(&table, first, second, geometry_sex)?;
            let model = match concrete {
                None => SurfaceModel::equal(),
                Some(function) => {
                    let spec = ConcreteFunctionSpec::builtin(function)?;
                    let contributor = pair.iter().position(|p| p.id == spec.nutrient).ok_or_else(|| {
                        input_error(format!("{} is served by {}, which is not in the pair", spec.function_id, spec.nutrient))
                    })?;
                    SurfaceModel::Concrete { contributor }
                }
            };
            let point = parse_point(point)?;
            let inside = indifference_area(&pair)?.contains(&point);
            let surface = UtilitySurface::new(pair, params, model)?;
            let report = mrs(&surface, point)?;
            let mut text = match report.result {
                MrsResult::PlateauUndefined if inside => "MRS: undefined (indifference area)\n".to_string(),
                MrsResult::PlateauUndefined => "MRS: undefined (flat region)\n".to_string(),
                MrsResult::NoTradeoff => "MRS: no trade-off (vertical)\n".to_string(),
                MrsResult::Rate(r) => format!("MRS: {r:.6}\n"),
            };
            for k in report.one_sided {
                let _ = writeln!(text, "note: {} sits on a breakpoint; right-hand derivative used", surface.profiles()[k].id);
            }
            Ok(Output::ok(text))
        }
        Command::Levelset {
            first,
            second,
            level,
            extent,
            grid,
        } => {
            let pair = pair(&table, first, second, geometry_sex)?;
            let extent = parse_extent(extent.as_deref(), &pair)?;
            let surface = UtilitySurface::new(pair, params, SurfaceModel::equal())?;
            let set = level_set_on(&surface, *level, parse_grid(grid)?, extent)?;
            Ok(Output::ok(set.to_csv(&surface)))
        }
        Command::Optimize {
            foods,
            mode,
            budget,
            caps,
        } => {
            let sex = required_sex()?;
            let foods = FoodTable::load(foods, &table)?;
            let solution = match mode {
                Mode::Mincost => min_cost_adequate_diet(&foods, &table, sex, &parse_caps(caps)?)?,
                Mode::Budget => {
                    if !caps.is_empty() {
                        return Err(input_error("--cap applies to --mode mincost only"));
                    }
                    let budget = budget.ok_or_else(|| input_error("--mode budget needs --budget"))?;
                    max_utility_under_budget(&foods, &table, &params, sex, budget, None, &BudgetOptions::default())?
                }
            };
            for note in &solution.notices {
                eprintln!("note: {note}");
            }
            let mut text = solution.render(&foods);
            let code = if solution.status == Status::Infeasible {
                let _ = writeln!(text, "violated,{}", solution.violated.join(";"));
                eprintln!("error: no diet meets every bound; violated: {}", solution.violated.join(", "));
                3
            } else {
                0
            };
            Ok(Output { text, code })
        }
    }
}

fn to_sex(s: SexArg) -> Sex {
    match s {
        SexArg::Men => Sex::Men,
        SexArg::Women => Sex::Women,
    }
}

fn pair(table: &NutrientTable, a: &str, b: &str, sex: Sex) -> Result<[ResolvedProfile; 2], Failure> {
    Ok([table.profile_for(a, sex)?, table.profile_for(b, sex)?])
}

/// Twice the UL, or three times the RDA without one.
fn default_extent(p: &ResolvedProfile) -> f64 {
    p.ul.map_or(3.0 * p.rda, |ul| 2.0 * ul)
}

fn parse_extent(arg: Option<&str>, pair: &[ResolvedProfile; 2]) -> Result<(f64, f64), Failure> {
    let Some(arg) = arg else {
        return Ok((default_extent(&pair[0]), default_extent(&pair[1])));
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| input_error(format!("--extent: `{s}` is not a number")))
    };
    match arg.split_once(',') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let e = parse(arg)?;
            Ok((e, e))
        }
    }
}

fn parse_point(arg: &str) -> Result<[f64; 2], Failure> {
    let bad = || input_error(format!("--point: `{arg}` is not x1,x2"));
    let (a, b) = arg.split_once(',').ok_or_else(bad)?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    Ok([parse(a)?, parse(b)?])
}

/// `N` or `NxM`.
fn parse_grid(arg: &str) -> Result<(usize, usize), Failure> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| input_error(format!("--grid: `{arg}` is not N or NxM")))
    };
    match arg.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None if arg.is_empty() => Ok(DEFAULT_GRID),
        None => {
            let n = parse(arg)?;
            Ok((n, n))
        }
    }
}

fn parse_caps(caps: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    caps.iter()
        .map(|c| {
            let (id, n) = c
                .split_once('=')
                .ok_or_else(|| input_error(format!("--cap `{c}`: expected FOOD=N")))?;
            let n = n
                .trim()
                .parse::<f64>()
                .map_err(|_| input_error(format!("--cap `{c}`: `{n}` is not a number")))?;
            Ok((id.trim().to_string(), n))
        })
        .collect()
}
