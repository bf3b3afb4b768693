//! The CLI subcommands as library calls: each takes a resolved config and
//! an output directory and writes its artifacts there.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde_json::{json, Value};
use twostep::actor_critic::TrainOutcome;
use twostep::numerics::Mat;

use crate::config::{ExperimentConfig, Mode};
use crate::experiment::{self, Step1Outcome};
use crate::output::{json_mat, json_num, json_vec, write_json, write_text, Cell, Table};

fn save_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    write_text(&out.join("config.toml"), &cfg.to_toml()?)
}

fn gain_json(s: &Step1Outcome) -> Value {
    let r = &s.report;
    json!({
        "seed": s.seed,
        "k": json_mat(r.k_final.matrix()),
        "p": json_mat(&r.p_final),
        "k_star": json_mat(s.k_star.matrix()),
        "p_star": json_mat(&s.p_star),
        "iterations": r.iterations,
        "converged": r.converged,
        "stabilizing": s.stabilizing,
        "p_changes": json_vec(&r.p_changes),
        "p_history_norms": json_vec(&r.p_history.iter().map(Mat::frobenius_norm).collect::<Vec<_>>()),
        "k_history": r.k_history.iter().map(|k| json_mat(k.matrix())).collect::<Vec<_>>(),
        "ranks": r.ranks,
    })
}

/// `gain.json`, `trajectory.csv` (angle under K₀, K and K*), `config.toml`.
pub fn step1(cfg: &ExperimentConfig, out: &Path) -> Result<Step1Outcome> {
    let s = experiment::run_step1(cfg, cfg.seed)?;
    write_json(&out.join("gain.json"), &gain_json(&s))?;

    let rollouts = [
        experiment::evaluate(cfg, Mode::K0Alone, s.k(), None)?,
        experiment::evaluate(cfg, Mode::KAlone, s.k(), None)?,
        experiment::evaluate(cfg, Mode::KAlone, &s.k_star, None)?,
    ];
    let mut table = Table::new(&["time", "psi_k0", "psi_k", "psi_k_star"]);
    let ts = cfg.step2.ts;
    for i in 0..rollouts[0].rollout.states.len() {
        table.push(&[
            Cell::Float(ts * i as f64),
            Cell::Float(rollouts[0].rollout.states[i][0]),
            Cell::Float(rollouts[1].rollout.states[i][0]),
            Cell::Float(rollouts[2].rollout.states[i][0]),
        ]);
    }
    table.write(&out.join("trajectory.csv"))?;
    save_config(cfg, out)?;
    Ok(s)
}

fn costs_table(outcome: &TrainOutcome<f64>) -> Table {
    let mut t = Table::new(&["episode", "cost", "steps", "penalized"]);
    for (e, r) in outcome.curve.iter().enumerate() {
        t.push(&[
            Cell::Int(e as u64),
            Cell::Float(r.cost_j),
            Cell::Int(r.steps_taken as u64),
            Cell::Int(r.terminated_by_penalty as u64),
        ]);
    }
    t
}

fn weights_json(mode: Mode, seed: u64, outcome: &TrainOutcome<f64>, eval_cost: f64) -> Value {
    json!({
        "mode": mode.name(),
        "seed": seed,
        "theta": json_vec(&outcome.theta),
        "w": json_mat(&outcome.w),
        "evaluation_cost": json_num(eval_cost),
    })
}

/// Reads the policy weights `W` back from a `weights.json`.
pub fn load_weights(path: &Path) -> Result<Mat<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text)?;
    let rows: Vec<Vec<f64>> = serde_json::from_value(v["w"].clone()).context("weights file has no `w` matrix")?;
    ensure!(!rows.is_empty(), "empty weight matrix in {}", path.display());
    Ok(Mat::from_rows(&rows))
}

pub struct Step2Artifacts {
    pub step1: Step1Outcome,
    pub outcome: TrainOutcome<f64>,
    pub evaluation_cost: f64,
}

/// `costs.csv`, `weights.json`, `config.toml`.
pub fn step2(cfg: &ExperimentConfig, mode: Mode, out: &Path) -> Result<Step2Artifacts> {
    if !mode.learns() {
        bail!("step2 needs a learning mode (k+rl, k0+rl or rl), got {mode}");
    }
    let s = experiment::run_step1(cfg, cfg.seed)?;
    let outcome = experiment::run_step2(cfg, mode, s.k(), cfg.seed)?;
    let eval = experiment::evaluate(cfg, mode, s.k(), Some(&outcome.w))?;
    costs_table(&outcome).write(&out.join("costs.csv"))?;
    write_json(&out.join("weights.json"), &weights_json(mode, cfg.seed, &outcome, eval.cost()))?;
    save_config(cfg, out)?;
    Ok(Step2Artifacts {
        step1: s,
        outcome,
        evaluation_cost: eval.cost(),
    })
}

/// Deterministic evaluation of one mode; learning modes need `weights`
/// or are trained first. Writes `eval.json` and the rollout.
pub fn eval(cfg: &ExperimentConfig, mode: Mode, weights: Option<&PathBuf>, out: &Path) -> Result<experiment::Evaluation> {
    let s = experiment::run_step1(cfg, cfg.seed)?;
    let w = match (mode.learns(), weights) {
        (false, _) => None,
        (true, Some(path)) => Some(load_weights(path)?),
        (true, None) => Some(experiment::run_step2(cfg, mode, s.k(), cfg.seed)?.w),
    };
    let e = experiment::evaluate(cfg, mode, s.k(), w.as_ref())?;
    write_json(
        &out.join("eval.json"),
        &json!({
            "mode": mode.name(),
            "cost": json_num(e.cost()),
            "success": e.success,
            "hit_penalty_boundary": e.rollout.hit_penalty_boundary,
            "final_state": json_vec(e.rollout.final_state()),
        }),
    )?;
    let n = e.rollout.states[0].len();
    let mut header: Vec<String> = vec!["time".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.push("u".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header);
    for (i, x) in e.rollout.states.iter().enumerate() {
        let mut cells = vec![Cell::Float(cfg.step2.ts * i as f64)];
        cells.extend(x.iter().map(|&v| Cell::Float(v)));
        cells.push(Cell::Float(e.rollout.inputs.get(i).map_or(f64::NAN, |u| u[0])));
        t.push(&cells);
    }
    t.write(&out.join("rollout.csv"))?;
    save_config(cfg, out)?;
    Ok(e)
}

/// `table3.csv` (mode, cost) plus the K+RL learning curve in `costs.csv`.
pub fn compare(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<(String, f64)>> {
    let art = step2(cfg, Mode::KRl, out)?;
    let rows = experiment::compare(cfg, &art.step1, &art.outcome)?;
    let mut t = Table::new(&["mode", "cost"]);
    for (mode, cost) in &rows {
        t.push(&[Cell::Text(mode), Cell::Float(*cost)]);
    }
    t.write(&out.join("table3.csv"))?;
    Ok(rows)
}

/// `sweep.csv` (mode, beta, sigma2, success_pct, improvement_pct) and
/// `sweep_runs.csv` with every run's seed and cost.
pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<experiment::SweepCell>> {
    let s = experiment::run_step1(cfg, cfg.seed)?;
    let cells = experiment::sweep(cfg, s.k())?;
    let mut summary = Table::new(&["mode", "beta", "sigma2", "success_pct", "improvement_pct"]);
    let mut runs = Table::new(&["mode", "beta", "sigma2", "run", "seed", "cost", "success", "improved", "diverged"]);
    for c in &cells {
        summary.push(&[
            Cell::Text(c.mode.name()),
            Cell::Float(c.beta),
            Cell::Float(c.sigma2),
            Cell::Float(c.success_pct()),
            Cell::Float(c.improvement_pct()),
        ]);
        for (i, r) in c.runs.iter().enumerate() {
            runs.push(&[
                Cell::Text(c.mode.name()),
                Cell::Float(c.beta),
                Cell::Float(c.sigma2),
                Cell::Int(i as u64),
                Cell::Int(r.seed),
                Cell::Float(r.cost),
                Cell::Int(r.success as u64),
                Cell::Int(r.improved as u64),
                Cell::Int(r.diverged as u64),
            ]);
        }
    }
    summary.write(&out.join("sweep.csv"))?;
    runs.write(&out.join("sweep_runs.csv"))?;
    save_config(cfg, out)?;
    Ok(cells)
}
