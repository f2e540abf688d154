use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::checks;
use super::config::RunConfig;
use super::csv::{num, Table};
use super::reference::{self, Block, GAMMAS};
use super::{CliError, Command};
use crate::copula::{GumbelParams, Name};
use crate::error::Error;
use crate::linalg::Vec2;
use crate::market::{MarketInputs, MarketParams};
use crate::recursion::{Cascade, Model};
use crate::verify::{simulate_expected_utility, Strategy};

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<String, CliError> {
    match command {
        Command::Solve => cmd_solve(cfg),
        Command::Table { id, compare } => cmd_table(cfg, *id, *compare),
        Command::Figure { id } => cmd_figure(cfg, *id),
        Command::Simulate { paths, antithetic } => cmd_simulate(cfg, *paths, *antithetic),
        Command::Check { paths } => checks::cmd_check(cfg, *paths),
    }
}

pub(crate) fn solver(stage: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::Solver(format!("{stage}: {e}"))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write(dir: &Path, name: &str, table: &Table) -> Result<String, CliError> {
    let path = dir.join(name);
    table
        .write(&path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(format!("wrote {}\n", path.display()))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<String, CliError> {
    let model = cfg.model()?;
    ensure_dir(&cfg.out_dir)?;
    let cascade = Cascade::solve(&model, cfg.steps).map_err(solver("cascade solve"))?;
    let nodes = cascade.grid.nodes();

    let mut y0 = Table::new(&["t", "y0"]);
    let mut pi0 = Table::new(&["t", "pi1", "pi2"]);
    let mut diag = Table::new(&["t", "d1", "d2"]);
    for (k, &t) in nodes.iter().enumerate() {
        y0.row(&[], &[t, cascade.y0.y[k]]);
        pi0.row(&[], &[t, cascade.y0.pi[k][0], cascade.y0.pi[k][1]]);
        diag.row(&[], &[t, cascade.diagonal.d1()[k], cascade.diagonal.d2()[k]]);
    }
    let mut out = String::new();
    out += &write(&cfg.out_dir, "y0.csv", &y0)?;
    out += &write(&cfg.out_dir, "pi0.csv", &pi0)?;
    out += &write(&cfg.out_dir, "diagonal.csv", &diag)?;
    let pi = cascade.pi0();
    let _ = writeln!(
        out,
        "Y0(0) = {}  pi(0) = ({}, {})",
        num(cascade.y0_at_origin()),
        num(pi[0]),
        num(pi[1])
    );
    Ok(out)
}

/// Model for a parameter block, other coefficients from the base config.
pub fn block_model(cfg: &RunConfig, a: [f64; 2], beta: f64, rho: f64, gamma: f64) -> Result<Model, CliError> {
    let market = MarketParams::new(MarketInputs {
        rho,
        gamma: [gamma, gamma],
        ..cfg.market
    })
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let copula = GumbelParams::new(a[0], a[1], beta).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(Model::new(market, copula, cfg.formula))
}

#[derive(Debug, Clone)]
pub struct BlockResult {
    pub block: Block,
    /// `π̂(0)` per γ column.
    pub pi: [Vec2; 5],
    pub merton: Vec2,
    pub survival_corr: f64,
}

/// Solves every (block, γ) cell of a table.
pub fn table_results(cfg: &RunConfig, id: u8) -> Result<Vec<BlockResult>, CliError> {
    let blocks = reference::table(id).ok_or_else(|| CliError::Validation(format!("no table {id}")))?;
    blocks
        .iter()
        .map(|block| {
            let cells: Vec<Vec2> = GAMMAS
                .par_iter()
                .map(|&g| {
                    let model = block_model(cfg, [block.a1, block.a2], block.beta, block.rho, g)?;
                    let c = Cascade::solve(&model, cfg.steps).map_err(solver(block.label))?;
                    Ok(c.pi0())
                })
                .collect::<Result<_, CliError>>()?;
            let model = block_model(cfg, [block.a1, block.a2], block.beta, block.rho, 0.0)?;
            Ok(BlockResult {
                block: *block,
                pi: [cells[0], cells[1], cells[2], cells[3], cells[4]],
                merton: model.market.merton_strategy().map_err(solver("merton strategy"))?,
                survival_corr: model
                    .copula
                    .survival_correlation(model.market.horizon())
                    .map_err(solver("survival correlation"))?,
            })
        })
        .collect()
}

pub fn cmd_table(cfg: &RunConfig, id: u8, compare: bool) -> Result<String, CliError> {
    ensure_dir(&cfg.out_dir)?;
    let results = table_results(cfg, id)?;
    let mut header = vec!["block", "source", "component", "rho_s"];
    let gamma_cols: Vec<String> = GAMMAS.iter().map(|g| format!("gamma={g}")).collect();
    header.extend(gamma_cols.iter().map(String::as_str));
    header.push("merton");
    let mut t = Table::new(&header);
    for r in &results {
        let b = &r.block;
        for (i, comp) in ["pi1", "pi2"].iter().enumerate() {
            let model: Vec<f64> = r.pi.iter().map(|p| p[i]).collect();
            let mut row = model.clone();
            row.push(r.merton[i]);
            t.row(&[b.label, "model", comp], &[&[r.survival_corr][..], &row].concat());
            if compare {
                let paper = if i == 0 { b.pi1 } else { b.pi2 };
                let mut prow = paper.to_vec();
                prow.push(b.merton);
                t.row(&[b.label, "paper", comp], &[&[b.survival_corr][..], &prow].concat());
                let dev: Vec<f64> = row.iter().zip(&prow).map(|(m, p)| (m - p).abs()).collect();
                t.row(
                    &[b.label, "abs_dev", comp],
                    &[&[(r.survival_corr - b.survival_corr).abs()][..], &dev].concat(),
                );
            }
        }
    }
    let mut out = write(&cfg.out_dir, &format!("table{id}.csv"), &t)?;
    out += t.as_str();
    Ok(out)
}

pub const FIGURE1_INTENSITIES: [f64; 3] = [0.01, 0.1, 0.3];
pub const FIGURE_DEFAULT_TIME: f64 = 0.6;

fn figure_gammas() -> Vec<f64> {
    (0..=15).map(|k| -0.5 + 0.1 * k as f64).map(|g| (g * 10.0).round() / 10.0).collect()
}

pub fn figure_table(cfg: &RunConfig, id: u8) -> Result<Table, CliError> {
    let mut t = Table::new(&["series", "x", "y"]);
    match id {
        1 => {
            let gammas = figure_gammas();
            for a in FIGURE1_INTENSITIES {
                let ys: Vec<f64> = gammas
                    .par_iter()
                    .map(|&g| {
                        let model = block_model(cfg, [a, a], 2.0, 0.0, g)?;
                        Ok(Cascade::solve(&model, cfg.steps).map_err(solver("figure 1"))?.pi0()[0])
                    })
                    .collect::<Result<_, CliError>>()?;
                let series = format!("a={a}");
                for (g, y) in gammas.iter().zip(ys) {
                    t.row(&[&series], &[*g, y]);
                }
            }
            let merton = block_model(cfg, [0.1, 0.1], 2.0, 0.0, 0.0)?
                .market
                .merton_strategy()
                .map_err(solver("merton strategy"))?;
            for g in gammas {
                t.row(&["merton"], &[g, merton[0]]);
            }
        }
        2 => {
            let curves: Vec<(f64, Cascade)> = GAMMAS
                .par_iter()
                .map(|&g| {
                    let model = block_model(cfg, [0.01, 0.01], 2.0, 0.0, g)?;
                    Ok((g, Cascade::solve(&model, cfg.steps).map_err(solver("figure 2"))?))
                })
                .collect::<Result<_, CliError>>()?;
            for (g, c) in curves {
                let series = format!("gamma={g}");
                for x in c.grid.nodes() {
                    let v = c.value_function(x, 0.0).map_err(solver("value function"))?;
                    t.row(&[&series], &[x, v]);
                }
            }
        }
        3 => {
            for g in [-0.5, -0.1] {
                let model = block_model(cfg, [0.01, 0.01], 2.0, 0.0, g)?;
                let c = Cascade::solve(&model, cfg.steps).map_err(solver("figure 3"))?;
                let path = c
                    .strategy_path(Some((Name::First, FIGURE_DEFAULT_TIME)))
                    .map_err(solver("strategy path"))?;
                for i in 0..2 {
                    let series = format!("gamma={g} pi{}", i + 1);
                    for (x, pi) in &path.pre {
                        t.row(&[&series], &[*x, pi[i]]);
                    }
                    for (x, pi) in &path.post.as_ref().expect("default scenario").points {
                        t.row(&[&series], &[*x, pi[i]]);
                    }
                }
            }
        }
        _ => return Err(CliError::Validation(format!("no figure {id}"))),
    }
    Ok(t)
}

pub fn cmd_figure(cfg: &RunConfig, id: u8) -> Result<String, CliError> {
    ensure_dir(&cfg.out_dir)?;
    let t = figure_table(cfg, id)?;
    write(&cfg.out_dir, &format!("figure{id}.csv"), &t)
}

pub fn cmd_simulate(cfg: &RunConfig, paths: Option<usize>, antithetic: bool) -> Result<String, CliError> {
    let model = cfg.model()?;
    ensure_dir(&cfg.out_dir)?;
    let mut sim = cfg.sim_config();
    if let Some(p) = paths {
        sim.paths = p;
    }
    sim.antithetic |= antithetic;
    sim.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    let cascade = Cascade::solve(&model, cfg.steps).map_err(solver("cascade solve"))?;
    let report = simulate_expected_utility(&model, Strategy::Cascade(&cascade), &sim)
        .map_err(solver("simulation"))?;
    let target = -(model.market.p() * cascade.y0_at_origin()).exp();

    let mut t = Table::new(&["quantity", "value"]);
    let rows: [(&str, f64); 10] = [
        ("paths", report.paths as f64),
        ("mean_utility", report.mean_utility),
        ("std_error", report.std_error),
        ("value_function", target),
        ("z_score", (report.mean_utility - target) / report.std_error),
        ("certainty_equivalent", report.certainty_equivalent),
        ("no_default", report.default_counts[0] as f64),
        ("one_default", report.default_counts[1] as f64),
        ("two_defaults", report.default_counts[2] as f64),
        ("failures", report.failures as f64),
    ];
    for (k, v) in rows {
        t.row(&[k], &[v]);
    }
    let mut out = write(&cfg.out_dir, "simulate.csv", &t)?;
    out += t.as_str();
    Ok(out)
}
