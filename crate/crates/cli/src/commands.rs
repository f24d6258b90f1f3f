//! One function per command. Each returns a JSON result, summary lines and a table.

use persuasion_core::advisor::{optimal_two_vps, optimal_vp_binary_with, optimal_vp_general, VpRecommendation};
use persuasion_core::agents::{pivotal_binary, pivotal_general, HierarchySpec};
use persuasion_core::binary_solver::{solve_binary, ReceiverRule};
use persuasion_core::exec::Execution;
use persuasion_core::experiment::{compose_chain, posteriors, Experiment};
use persuasion_core::general_solver::{player1_value, solve_general_uniform, solve_subgame_given_support, SubgameOutcome};
use persuasion_core::oracle::{
    build_grid, monte_carlo, monte_carlo_general, solve_general_grid, trace_consistent, GridGame, LinePosition,
    MonteCarloReport,
};
use persuasion_core::outcome::{BinaryOutcome, BinaryPrior, Prior};
use persuasion_core::Error as CoreError;
use serde_json::{json, Value};

use crate::config::{ingest, Command, HierarchyFile, RunConfig};
use crate::error::CliError;
use crate::format::{sig12, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    /// `{command, hierarchy, result}`; `hierarchy` re-ingests as a config file.
    pub json: Value,
    pub summary: Vec<(String, String)>,
    pub table: Table,
    /// Set by `compare` when the closed form is not among the oracle's outcomes.
    pub mismatch: Option<String>,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out: String = self.summary.iter().map(|(k, v)| format!("{k}: {v}\n")).collect();
        if !self.table.rows.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&self.table.to_text());
        }
        out
    }
}

struct Body {
    result: Value,
    summary: Vec<(String, String)>,
    table: Table,
    mismatch: Option<String>,
}

impl Body {
    fn new(result: Value, table: Table) -> Self {
        Self { result, summary: Vec::new(), table, mismatch: None }
    }

    fn note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.summary.push((key.into(), value.into()));
        self
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))
}

fn labels(h: &HierarchySpec) -> Vec<String> {
    h.senders.iter().chain(std::iter::once(&h.receiver)).map(|a| a.label.clone()).collect()
}

fn pair(o: &BinaryOutcome) -> String {
    format!("{{{}, {}}}", sig12(o.q0), sig12(o.q1))
}

fn values_table(h: &HierarchySpec, values: &[f64]) -> Table {
    let mut t = Table::new(&["agent", "value"]);
    for (label, v) in labels(h).into_iter().zip(values) {
        t.push(vec![label, sig12(*v)]);
    }
    t
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.check()?;
    let (h, file) = ingest(&cfg.config)?;
    let body = match cfg.command {
        Command::Classify => classify(&h)?,
        Command::Solve => solve(&h)?,
        Command::Oracle => oracle(&h, cfg.grid)?,
        Command::Compare => compare(&h, cfg.grid)?,
        Command::Vp => vp(&h, cfg.delta)?,
        Command::Simulate => simulate(&h, file.experiments.as_deref(), cfg.trials, cfg.seed)?,
        Command::Curve => curve(&h, cfg.grid)?,
    };
    let json = json!({
        "command": cfg.command,
        "hierarchy": HierarchyFile::from_hierarchy(&h),
        "result": body.result,
    });
    Ok(Report { command: cfg.command, json, summary: body.summary, table: body.table, mismatch: body.mismatch })
}

fn classify(h: &HierarchySpec) -> Result<Body, CliError> {
    let (senders, receiver) = h.classes()?;
    let mut t = Table::new(&["position", "agent", "kind", "threshold", "bias", "bias_magnitude"]);
    let classes: Vec<_> = senders.iter().chain(std::iter::once(&receiver)).collect();
    for (k, (label, c)) in labels(h).into_iter().zip(&classes).enumerate() {
        let position = if k == h.n() { "receiver".to_string() } else { (k + 1).to_string() };
        let kind = to_json(&c.kind)?.as_str().unwrap_or_default().to_string();
        let bias = c.bias.map_or("-".to_string(), |a| if a.is_one() { "1".into() } else { "0".into() });
        t.push(vec![
            position,
            label,
            kind,
            c.threshold.map_or("-".into(), sig12),
            bias,
            c.bias_magnitude.map_or("-".into(), sig12),
        ]);
    }
    let pivotal = if h.prior.is_uniform() { pivotal_general(h) } else { pivotal_binary(h) };
    let (piv_json, note) = match &pivotal {
        Ok(p) => (to_json(p)?, describe_pivots(&to_json(p)?)),
        Err(e) => (Value::Null, format!("unavailable ({e})")),
    };
    let result = json!({ "agents": to_json(&classes)?, "pivotal": piv_json });
    Ok(Body::new(result, t).note("pivotal", note))
}

fn describe_pivots(v: &Value) -> String {
    let mut parts = Vec::new();
    flatten("", v, &mut parts);
    parts.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Number(n) => out.push((prefix.into(), n.as_f64().map_or(n.to_string(), sig12))),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Null => out.push((prefix.into(), "-".into())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn solve(h: &HierarchySpec) -> Result<Body, CliError> {
    if h.prior.is_uniform() {
        let r = solve_general_uniform(h)?;
        let table = values_table(h, &r.values);
        let trace = to_json(&r.trace)?;
        Ok(Body::new(to_json(&r)?, table)
            .note("kind", to_json(&r.kind)?.as_str().unwrap_or_default())
            .note("support", pair(&r.support))
            .note("cut", r.cut.map_or("-".into(), sig12))
            .note("trace", describe_pivots(&trace))
            .note("efficient", r.efficient.to_string()))
    } else {
        let r = solve_binary(h)?;
        let table = values_table(h, &r.values);
        Ok(Body::new(to_json(&r)?, table)
            .note("kind", to_json(&r.kind)?.as_str().unwrap_or_default())
            .note("case", to_json(&r.case)?.as_str().unwrap_or_default())
            .note("support", pair(&r.support))
            .note("efficient", r.efficiency.efficient.to_string()))
    }
}

fn grid_game(h: &HierarchySpec, g: u32) -> Result<GridGame, CliError> {
    let grid = build_grid(h.prior, g)?;
    Ok(match h.prior {
        Prior::Binary { .. } => GridGame::binary(h, &grid, Execution::default())?,
        Prior::Uniform => GridGame::general(h, &grid, Execution::default())?,
    })
}

fn oracle(h: &HierarchySpec, g: u32) -> Result<Body, CliError> {
    let game = grid_game(h, g)?;
    let chain = game.chain();
    let idx = game.spe_indices();
    if idx.is_empty() {
        return Err(CoreError::EmptyGamma.into());
    }
    let names = labels(h);
    let mut header = vec!["q0", "q1", "w1"];
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&header);
    let mut outcomes = Vec::new();
    for &i in &idx {
        let o = game.grid().outcome(i);
        let values = game.values(i);
        let mut row = vec![sig12(o.q0), sig12(o.q1), sig12(o.w1)];
        row.extend(values.iter().map(|v| sig12(*v)));
        t.push(row);
        outcomes.push(json!({ "outcome": o, "values": values }));
    }
    let count = |set: &[bool]| set.iter().filter(|&&b| b).count();
    let levels: Vec<Value> = chain
        .levels
        .iter()
        .map(|l| json!({ "player": l.player, "members": count(&l.members), "informative": chain.informative(&l.members).len() }))
        .collect();
    let result = json!({
        "grid": g,
        "exact": game.is_exact(),
        "pairs": game.grid().pair_count(),
        "equilibria": outcomes,
        "player1_value": game.player1_value(),
        "gamma0": count(&chain.gamma0),
        "levels": levels,
        "gamma_tilde": count(&chain.gamma_tilde),
    });
    let sizes: Vec<String> = chain.levels.iter().map(|l| format!("{}:{}", l.player, count(&l.members))).collect();
    Ok(Body::new(result, t)
        .note("grid", g.to_string())
        .note("arithmetic", if game.is_exact() { "exact" } else { "float" })
        .note("level sizes", if sizes.is_empty() { "-".into() } else { sizes.join(" ") })
        .note("gamma_tilde", count(&chain.gamma_tilde).to_string()))
}

fn compare(h: &HierarchySpec, g: u32) -> Result<Body, CliError> {
    let mut t = Table::new(&["source", "q0", "q1", "note"]);
    let mut diff: Vec<String> = Vec::new();
    let result = if h.prior.is_uniform() {
        let closed = solve_general_uniform(h)?;
        let grid = solve_general_grid(h, g)?;
        let tol = 1.0 / f64::from(g) + 1e-12;
        let near = |o: &BinaryOutcome| {
            (o.q0 - closed.support.q0).abs() <= tol && (o.q1 - closed.support.q1).abs() <= tol
        };
        let matched = grid.outcomes.iter().zip(&grid.positions).find(|(o, _)| near(o));
        match matched {
            None => diff.push(format!("closed form {} is not within 1/{g} of any grid outcome", pair(&closed.support))),
            Some((o, pos)) if !trace_consistent(&closed, o, pos) => {
                diff.push(format!(
                "trace {} does not match the grid outcome's position ({})",
                describe_pivots(&to_json(&closed.trace)?),
                position_name(pos)
            ))
            }
            Some(_) => {}
        }
        t.push(vec!["closed_form".into(), sig12(closed.support.q0), sig12(closed.support.q1), describe_pivots(&to_json(&closed.trace)?)]);
        for (o, pos) in grid.outcomes.iter().zip(&grid.positions) {
            t.push(vec!["oracle".into(), sig12(o.q0), sig12(o.q1), position_name(pos).into()]);
        }
        json!({ "closed_form": closed, "oracle": grid, "diff": diff })
    } else {
        let closed = solve_binary(h)?;
        let game = grid_game(h, g)?;
        let spe = game.spe();
        if !spe.iter().any(|o| o.approx_eq(&closed.support, 1e-9)) {
            diff.push(format!("closed form {} is not among the oracle outcomes", pair(&closed.support)));
        }
        t.push(vec!["closed_form".into(), sig12(closed.support.q0), sig12(closed.support.q1), to_json(&closed.case)?.as_str().unwrap_or_default().to_string()]);
        for o in &spe {
            t.push(vec!["oracle".into(), sig12(o.q0), sig12(o.q1), String::new()]);
        }
        json!({ "closed_form": closed, "oracle": spe, "diff": diff })
    };
    let verdict = if diff.is_empty() { "match".to_string() } else { diff.join("; ") };
    let mut body = Body::new(result, t).note("grid", g.to_string()).note("verdict", verdict.clone());
    if !diff.is_empty() {
        body.mismatch = Some(verdict);
    }
    Ok(body)
}

fn position_name(pos: &LinePosition) -> &'static str {
    match (pos.on_line, pos.at_lower, pos.at_upper) {
        (false, _, _) => "off_line",
        (true, true, true) => "single_point",
        (true, true, false) => "at_lower",
        (true, false, true) => "at_upper",
        (true, false, false) => "interior",
    }
}

fn recommendation(r: Result<VpRecommendation, CoreError>) -> Result<(Value, Option<VpRecommendation>), CliError> {
    match r {
        Ok(rec) => Ok((to_json(&rec)?, Some(rec))),
        Err(CoreError::NoImprovement(why)) => Ok((json!({ "no_improvement": why }), None)),
        Err(e) => Err(e.into()),
    }
}

fn vp(h: &HierarchySpec, delta: Option<f64>) -> Result<Body, CliError> {
    let mut t = Table::new(&["rule", "agent", "kind", "threshold", "leans_toward_one", "before", "after", "receiver_gain"]);
    let mut push = |rec: &VpRecommendation| -> Result<(), CliError> {
        let rule = to_json(&rec.rule_fired)?.as_str().unwrap_or_default().to_string();
        for s in &rec.specs {
            t.push(vec![
                rule.clone(),
                s.agent.label.clone(),
                to_json(&s.kind)?.as_str().unwrap_or_default().to_string(),
                sig12(s.threshold),
                s.leans_toward_one.to_string(),
                {
                    let (a, b) = rec.before.support();
                    format!("{{{}, {}}}", sig12(a), sig12(b))
                },
                {
                    let (a, b) = rec.after.support();
                    format!("{{{}, {}}}", sig12(a), sig12(b))
                },
                sig12(rec.receiver_gain),
            ]);
        }
        Ok(())
    };
    let (result, summary) = if h.prior.is_uniform() {
        if delta.is_some() {
            return Err(CliError::Validation("--delta only applies to binary-state hierarchies".into()));
        }
        let (single, single_rec) = recommendation(optimal_vp_general(h))?;
        let (two, two_rec) = recommendation(optimal_two_vps(h))?;
        let mut summary = Vec::new();
        for (name, rec, v) in [("single", &single_rec, &single), ("pair", &two_rec, &two)] {
            match rec {
                Some(r) => push(r)?,
                None => summary.push((name.to_string(), format!("no improvement: {}", v["no_improvement"]))),
            }
        }
        if let Some(r) = &two_rec {
            summary.push(("order_independent".into(), format!("{:?}", r.order_independent)));
            summary.push(("third_copy_gain".into(), r.third_copy_gain.map_or("-".into(), sig12)));
        }
        (json!({ "single": single, "pair": two }), summary)
    } else {
        let (v, rec) = recommendation(optimal_vp_binary_with(h, delta))?;
        let mut summary = Vec::new();
        match &rec {
            Some(r) => {
                push(r)?;
                if let Some((lo, hi)) = r.specs[0].interval {
                    summary.push(("interval".to_string(), format!("({}, {})", sig12(lo), sig12(hi))));
                }
            }
            None => summary.push(("single".to_string(), format!("no improvement: {}", v["no_improvement"]))),
        }
        (v, summary)
    };
    let mut body = Body::new(result, t);
    body.summary = summary;
    Ok(body)
}

/// Exact expected payoffs when every sender plays the given experiment.
fn experiment_values(h: &HierarchySpec, p: f64, exps: &[Experiment]) -> Result<Vec<f64>, CliError> {
    let composed = compose_chain(exps)?;
    let post = posteriors(BinaryPrior::new(p)?, &composed)?;
    let rule = ReceiverRule::for_hierarchy(h);
    let agents: Vec<_> = h.senders.iter().chain(std::iter::once(&h.receiver)).collect();
    let mut values = vec![0.0; agents.len()];
    for (s, q) in post.iter().enumerate() {
        let Some(q) = *q else { continue };
        let mass = p * composed.get(1, s) + (1.0 - p) * composed.get(0, s);
        let a = rule.action(q);
        for (v, agent) in values.iter_mut().zip(&agents) {
            *v += mass * agent.utility.table().expected(q, a);
        }
    }
    Ok(values)
}

fn simulate(h: &HierarchySpec, given: Option<&[Experiment]>, trials: u64, seed: Option<u64>) -> Result<Body, CliError> {
    let exec = Execution::default();
    let (mc, analytic, source): (MonteCarloReport, Vec<f64>, &str) = match h.prior {
        Prior::Binary { p } => match given {
            Some(exps) => (monte_carlo(h, exps, trials, seed, exec)?, experiment_values(h, p, exps)?, "config experiments"),
            None => {
                let eq = solve_binary(h)?;
                let first = Experiment::from_outcome(&eq.support);
                let mut exps = vec![first.clone()];
                exps.extend((1..h.n()).map(|_| Experiment::identity(first.cols())));
                (monte_carlo(h, &exps, trials, seed, exec)?, eq.values, "equilibrium")
            }
        },
        Prior::Uniform => {
            if given.is_some() {
                return Err(CliError::Validation("experiments are only supported for binary-state hierarchies".into()));
            }
            let eq = solve_general_uniform(h)?;
            (monte_carlo_general(h, &eq.support, trials, seed, exec)?, eq.values, "equilibrium")
        }
    };
    let mut t = Table::new(&["agent", "analytic", "mean", "std_error", "z"]);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (est, exact) in mc.agents.iter().zip(&analytic) {
        let z = if est.std_error > 0.0 { (est.mean - exact) / est.std_error } else { 0.0 };
        worst = worst.max(z.abs());
        t.push(vec![est.label.clone(), sig12(*exact), sig12(est.mean), sig12(est.std_error), sig12(z)]);
        rows.push(json!({ "agent": est.label, "analytic": exact, "mean": est.mean, "std_error": est.std_error, "z": z }));
    }
    let result = json!({ "trials": mc.trials, "seed": mc.seed, "source": source, "agents": rows, "max_abs_z": worst });
    Ok(Body::new(result, t)
        .note("source", source)
        .note("trials", trials.to_string())
        .note("max |z|", sig12(worst)))
}

fn curve(h: &HierarchySpec, g: u32) -> Result<Body, CliError> {
    if !h.prior.is_uniform() {
        return Err(CliError::Validation("curve needs a uniform prior".into()));
    }
    let u1 = h.senders[0]
        .utility
        .linear()
        .ok_or_else(|| CliError::Validation("curve needs a linear payoff for player 1".into()))?;
    let mut t = Table::new(&["m0", "m1", "player1_value", "subgame_kind"]);
    let mut rows = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for k in 0..=g / 2 {
        let m0 = f64::from(k) / f64::from(g);
        let m1 = m0 + 0.5;
        let value = player1_value(m0, &u1);
        let kind = match solve_subgame_given_support(h, m0, m1) {
            Ok(SubgameOutcome::Supported { support }) if (support.q0 - m0).abs() <= 1e-12 && (support.q1 - m1).abs() <= 1e-12 => {
                "intact"
            }
            Ok(SubgameOutcome::Supported { .. }) => "garbled",
            Ok(SubgameOutcome::NoInfo) => "no_info",
            Err(_) => "infeasible",
        };
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((m0, value));
        }
        t.push(vec![sig12(m0), sig12(m1), sig12(value), kind.into()]);
        rows.push(json!({ "m0": m0, "m1": m1, "player1_value": value, "subgame_kind": kind }));
    }
    let (argmax, top) = best.expect("at least one row");
    let result = json!({ "grid": g, "argmax_m0": argmax, "max_value": top, "rows": rows });
    Ok(Body::new(result, t).note("argmax m0", sig12(argmax)).note("max player1_value", sig12(top)))
}
