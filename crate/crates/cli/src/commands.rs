use crate::{parse, AdaptiveArgs, AuditArgs, Failure, MomentArgs, RandArgs, StaticArgs};
use anyhow::{anyhow, Context};
use polyce::adaptive::{run_adaptive, AdaptiveConfig, AdaptiveError};
use polyce::finite_ce::{
    static_discretization, static_sweep_csv, CeError, GridRule, PolyObjective,
};
use polyce::moments::{payoff_bounds, payoff_region_sketch, MomentError, RelaxationOrder};
use polyce::randgame::random_game;
use polyce::{min_epsilon, parse_game, PolynomialGame, SupportedDistribution};
use serde_json::Value;
use std::fs;
use std::path::Path;

type Outcome = Result<(), Failure>;

/// Writes to stdout, exiting quietly once the reader has gone away.
fn emit(args: std::fmt::Arguments) {
    use std::io::{ErrorKind, Write};
    if let Err(e) = std::io::stdout().lock().write_fmt(args) {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write output: {e}");
        std::process::exit(1);
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(format_args!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(format_args!("{}\n", format_args!($($t)*))) };
}

fn read_game(path: &Path) -> Result<PolynomialGame, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read game file {}", path.display()))
        .map_err(Failure::Input)?;
    parse_game(&text)
        .with_context(|| format!("in game file {}", path.display()))
        .map_err(Failure::Input)
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Input)
}

fn ce_failure(e: CeError) -> Failure {
    match e {
        CeError::Game(_) | CeError::ObjectiveShape { .. } | CeError::EmptyGrid => Failure::input(e),
        CeError::Conic(_) | CeError::Solver(_) => Failure::solver(e),
    }
}

fn adaptive_failure(e: AdaptiveError) -> Failure {
    match e {
        AdaptiveError::Config(_) | AdaptiveError::Game(_) => Failure::input(e),
        _ => Failure::solver(e),
    }
}

fn moment_failure(e: MomentError) -> Failure {
    match e {
        MomentError::Order { .. }
        | MomentError::Mismatch { .. }
        | MomentError::Directions(_)
        | MomentError::DirectionLength { .. }
        | MomentError::Game(_) => Failure::input(e),
        _ => Failure::solver(e),
    }
}

pub fn static_sweep(a: StaticArgs) -> Outcome {
    let game = read_game(&a.game)?;
    let ds = parse::int_list(&a.d).map_err(Failure::Input)?;
    let mut rows = Vec::with_capacity(ds.len());
    for d in ds {
        rows.push(
            static_discretization(&game, d, &PolyObjective::Feasibility, GridRule::Midpoints)
                .map_err(ce_failure)?,
        );
    }
    let csv = static_sweep_csv(&game, &rows);
    match a.out {
        Some(path) => {
            write(&path, &csv)?;
            let json = serde_json::to_string_pretty(&rows).expect("results serialize");
            write(&path.with_extension("json"), &json)
        }
        None => {
            out!("{csv}");
            Ok(())
        }
    }
}

pub fn adaptive(a: AdaptiveArgs) -> Outcome {
    let game = read_game(&a.game)?;
    let initial = parse::grids(&a.grid, game.num_players()).map_err(Failure::Input)?;
    let base = if a.degenerate {
        AdaptiveConfig {
            max_iter: 6,
            ..AdaptiveConfig::degenerate()
        }
    } else {
        AdaptiveConfig::default()
    };
    let config = AdaptiveConfig {
        alpha: a.alpha.unwrap_or(base.alpha),
        beta: a.beta.unwrap_or(base.beta),
        eps_stop: a.tol,
        max_iter: a.max_iter.unwrap_or(base.max_iter),
        ..base
    };
    let trace = run_adaptive(&game, initial, &config).map_err(adaptive_failure)?;
    out!("{}", trace.table(game.players()));
    let last = trace.last();
    outln!(
        "final distribution (audited eps = {:.3e}):",
        last.audited_epsilon
    );
    for (point, prob) in last.distribution.support() {
        if prob >= 1e-9 {
            let coords: Vec<String> = point.iter().map(|v| format!("{v:.6}")).collect();
            outln!("  ({})  {prob:.6}", coords.join(", "));
        }
    }
    if let Some(path) = a.out {
        write(
            &path,
            &serde_json::to_string_pretty(&trace).expect("trace serializes"),
        )?;
    }
    Ok(())
}

pub fn moments(a: MomentArgs) -> Outcome {
    let game = read_game(&a.game)?;
    let ds = parse::int_list(&a.d).map_err(Failure::Input)?;
    let mut boxes = Vec::new();
    let mut region = String::new();
    for d in ds {
        let d = u32::try_from(d).map_err(Failure::input)?;
        let order = match a.r {
            Some(r) => RelaxationOrder { d, r },
            None => RelaxationOrder::auto(&game, d),
        };
        boxes.push(payoff_bounds(&game, order).map_err(moment_failure)?);
        if let Some(k) = a.directions {
            let sketch = payoff_region_sketch(&game, order, k, a.seed).map_err(moment_failure)?;
            // one CSV for all orders, with the order as leading columns
            for (i, line) in sketch.to_csv().lines().enumerate() {
                if i == 0 {
                    if region.is_empty() {
                        region.push_str(&format!("d,r,{line}\n"));
                    }
                } else {
                    region.push_str(&format!("{},{},{line}\n", order.d, order.r));
                }
            }
        }
    }
    let json = serde_json::to_string_pretty(&boxes).expect("boxes serialize");
    match a.out {
        Some(dir) => {
            fs::create_dir_all(&dir)
                .with_context(|| format!("cannot create {}", dir.display()))
                .map_err(Failure::Input)?;
            write(&dir.join("boxes.json"), &json)?;
            if !region.is_empty() {
                write(&dir.join("region.csv"), &region)?;
            }
        }
        None => {
            outln!("{json}");
            out!("{region}");
        }
    }
    Ok(())
}

pub fn randgame(a: RandArgs) -> Outcome {
    if a.players == 0 {
        return Err(Failure::Input(anyhow!("--players must be at least 1")));
    }
    let json = random_game(a.players, a.degree, a.seed).to_json();
    match a.out {
        Some(path) => write(&path, &json),
        None => {
            outln!("{json}");
            Ok(())
        }
    }
}

/// Every object in the document that looks like a distribution, with a JSON
/// pointer to it.
fn find_distributions(v: &Value, at: String, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            if map.contains_key("grids") && map.contains_key("support") {
                out.push((at, v.clone()));
                return;
            }
            for (k, child) in map {
                find_distributions(child, format!("{at}/{k}"), out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                find_distributions(child, format!("{at}/{i}"), out);
            }
        }
        _ => {}
    }
}

pub fn audit(a: AuditArgs) -> Outcome {
    let game = read_game(&a.game)?;
    let text = fs::read_to_string(&a.dist)
        .with_context(|| format!("cannot read {}", a.dist.display()))
        .map_err(Failure::Input)?;
    let doc: Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not JSON", a.dist.display()))
        .map_err(Failure::Input)?;
    let mut found = Vec::new();
    find_distributions(&doc, String::new(), &mut found);
    if found.is_empty() {
        return Err(Failure::Input(anyhow!(
            "no distributions in {}",
            a.dist.display()
        )));
    }
    let mut header = vec!["source".to_string(), "epsilon".to_string()];
    header.extend(game.players().iter().map(|p| format!("eps_{p}")));
    outln!("{}", header.join(","));
    for (pointer, v) in found {
        let dist: SupportedDistribution = serde_json::from_value(v)
            .with_context(|| format!("distribution at '{pointer}'"))
            .map_err(Failure::Input)?;
        let report = min_epsilon(&game, &dist)
            .with_context(|| format!("distribution at '{pointer}'"))
            .map_err(Failure::Input)?;
        let per: Vec<String> = report
            .per_player
            .iter()
            .map(|e| format!("{e:.10e}"))
            .collect();
        let source = if pointer.is_empty() {
            "/".to_string()
        } else {
            pointer
        };
        outln!("{source},{:.10e},{}", report.epsilon, per.join(","));
    }
    Ok(())
}
