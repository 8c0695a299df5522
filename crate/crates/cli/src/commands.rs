use std::path::Path;

use epicoord::epistemic::{common_p_belief, evident_ladder};
use epicoord::experiments::{
    compare, evaluate_on, human_agent_sweep, parse_grid, thomas_conditions, Condition, DataError, HumanData,
    StrategyKind,
};
use epicoord::game::{verify_equilibrium, EquilibriumReport, GameInstance};
use epicoord::oracle::fuzz;
use epicoord::rational::{self, format_ratio, Rational};
use epicoord::strategies::{LevelZero, PayoffParams};
use epicoord::worldmodel::{describe_partition, load_model_spec, State, WorldModel};
use epicoord::{Error, Player};
use serde_json::json;

use crate::render::{self, exact, Output};
use crate::{Command, Format, LevelZeroArg, ModelArgs, StrategyArg};

type Outcome = Result<Output, String>;

pub fn run(command: &Command, format: Option<Format>) -> Outcome {
    match command {
        Command::Partition { model, player } => partition(model, *player, format.unwrap_or(Format::Table)),
        Command::Pbelief {
            model,
            event,
            player,
            state,
        } => pbelief(model, event, *player, state, format.unwrap_or(Format::Table)),
        Command::Ladder { model, event } => ladder(model, event, format.unwrap_or(Format::Table)),
        Command::Act {
            model,
            strategy,
            k,
            payoffs,
            level_zero,
            event,
            player,
            state,
        } => {
            let request = ActRequest {
                strategy: *strategy,
                k: *k,
                payoffs,
                level_zero: *level_zero,
                event,
                player: *player,
                state,
            };
            act(model, &request, format.unwrap_or(Format::Table))
        }
        Command::Verify { model, payoffs } => verify(model, payoffs, format.unwrap_or(Format::Table)),
        Command::Compare { human, delta, payoffs } => {
            compare_cmd(human, delta.clone(), payoffs, format.unwrap_or(Format::Table))
        }
        Command::Sweep { human, grid, delta } => sweep(human, grid, delta.clone(), format.unwrap_or(Format::Csv)),
        Command::Fuzz { seeds, states } => fuzz_cmd(*seeds, *states as usize, format.unwrap_or(Format::Table)),
    }
}

fn err<E: Into<Error>>(e: E) -> String {
    e.into().to_string()
}

fn load_model(args: &ModelArgs) -> Result<WorldModel, String> {
    let spec = load_model_spec(&args.model, args.delta.clone()).map_err(err)?;
    WorldModel::build(spec).map_err(err)
}

fn state_index(model: &WorldModel, text: &str) -> Result<usize, String> {
    let state: State = text.parse().map_err(err)?;
    model.state_index(&state).map_err(err)
}

fn tuple_list(states: &[State]) -> String {
    let inner: Vec<String> = states.iter().map(State::to_string).collect();
    format!("[{}]", inner.join(","))
}

fn partition(args: &ModelArgs, player: Player, format: Format) -> Outcome {
    let model = load_model(args)?;
    let blocks = describe_partition(&model, player);
    let text = match format {
        Format::Table => blocks.iter().map(|b| tuple_list(b) + "\n").collect(),
        Format::Json => render::json(&json!({
            "player": player.index(),
            "blocks": blocks
                .iter()
                .map(|b| b.iter().map(State::to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = blocks
                .iter()
                .enumerate()
                .flat_map(|(k, b)| b.iter().map(move |s| vec![k.to_string(), s.to_string()]))
                .collect();
            render::csv(&["block", "state"], &rows)?
        }
    };
    Ok(Output::ok(text))
}

fn pbelief(args: &ModelArgs, event: &str, player: Player, state: &str, format: Format) -> Outcome {
    let model = load_model(args)?;
    let target = model.parse_event(event).map_err(err)?;
    let w = state_index(&model, state)?;
    let value = common_p_belief(model.structure(), &target, player, w).map_err(err)?;
    let text = match format {
        Format::Table => exact(&value) + "\n",
        Format::Json => render::json(&json!({
            "player": player.index(),
            "state": model.state(w).to_string(),
            "event": event,
            "common_p_belief": format_ratio(&value),
        }))?,
        Format::Csv => render::csv(&["common_p_belief"], &[vec![format_ratio(&value)]])?,
    };
    Ok(Output::ok(text))
}

fn ladder(args: &ModelArgs, event: &str, format: Format) -> Outcome {
    let model = load_model(args)?;
    let target = model.parse_event(event).map_err(err)?;
    let ladder = evident_ladder(model.structure(), &target).map_err(err)?;
    let rungs: Vec<(String, Vec<State>)> = ladder
        .rungs
        .iter()
        .map(|r| {
            let mut members: Vec<State> = r.event.iter().map(|w| model.state(w).clone()).collect();
            members.sort();
            (format_ratio(&r.level), members)
        })
        .collect();
    let text = match format {
        Format::Table => rungs
            .iter()
            .map(|(level, members)| format!("level={level}  members={}\n", tuple_list(members)))
            .collect(),
        Format::Json => render::json(
            &rungs
                .iter()
                .map(|(level, members)| {
                    json!({
                        "level": level,
                        "members": members.iter().map(State::to_string).collect::<Vec<_>>(),
                    })
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = rungs
                .iter()
                .enumerate()
                .flat_map(|(k, (level, members))| {
                    members
                        .iter()
                        .map(move |s| vec![k.to_string(), level.clone(), s.to_string()])
                })
                .collect();
            render::csv(&["rung", "level", "state"], &rows)?
        }
    };
    Ok(Output::ok(text))
}

struct ActRequest<'a> {
    strategy: StrategyArg,
    k: u32,
    payoffs: &'a PayoffParams,
    level_zero: LevelZeroArg,
    event: &'a str,
    player: Player,
    state: &'a str,
}

fn act(args: &ModelArgs, req: &ActRequest<'_>, format: Format) -> Outcome {
    let model = load_model(args)?;
    let target = model.parse_event(req.event).map_err(err)?;
    let w = state_index(&model, req.state)?;
    let kind = match req.strategy {
        StrategyArg::Rational => StrategyKind::RationalPBelief,
        StrategyArg::Matched => StrategyKind::MatchedPBelief,
        StrategyArg::Itermax => StrategyKind::IteratedMaximization(req.k),
        StrategyArg::Itermatch => StrategyKind::IteratedMatching(req.k),
        StrategyArg::Private => StrategyKind::PrivateHeuristic,
        StrategyArg::Pair => StrategyKind::PairHeuristic,
        StrategyArg::Cognitive => StrategyKind::Cognitive,
    };
    let level_zero = match req.level_zero {
        LevelZeroArg::Threshold => LevelZero::Threshold,
        LevelZeroArg::AlwaysA => LevelZero::AlwaysA,
        LevelZeroArg::Uniform => LevelZero::Uniform,
    };
    let prob_a = evaluate_on(kind, model.structure(), &target, req.payoffs, level_zero, req.player, w).map_err(err)?;
    let action = if !kind.is_pure() {
        None
    } else if prob_a == rational::one() {
        Some("A")
    } else if prob_a == rational::zero() {
        Some("B")
    } else {
        None
    };
    let text = match format {
        Format::Table => match action {
            Some(a) => format!("{a}\n"),
            None => exact(&prob_a) + "\n",
        },
        Format::Json => render::json(&json!({
            "strategy": kind.name(),
            "k": kind.level(),
            "player": req.player.index(),
            "state": model.state(w).to_string(),
            "action": action,
            "prob_a": format_ratio(&prob_a),
        }))?,
        Format::Csv => render::csv(
            &["strategy", "k", "action", "prob_a"],
            &[vec![
                kind.name().to_string(),
                kind.level().map(|k| k.to_string()).unwrap_or_default(),
                action.unwrap_or("").to_string(),
                format_ratio(&prob_a),
            ]],
        )?,
    };
    Ok(Output::ok(text))
}

fn verify(args: &ModelArgs, payoffs: &PayoffParams, format: Format) -> Outcome {
    let model = load_model(args)?;
    let game = GameInstance::from_model(&model, payoffs.clone());
    let report = verify_equilibrium(&game).map_err(err)?;
    let violations: Vec<Vec<String>> = match &report {
        EquilibriumReport::Checked { violations, .. } => violations
            .iter()
            .map(|v| {
                vec![
                    v.player.index().to_string(),
                    model.state(v.state).to_string(),
                    v.prescribed.to_string(),
                    format_ratio(&v.gap),
                ]
            })
            .collect(),
        EquilibriumReport::NotApplicable { .. } => Vec::new(),
    };
    let text = match format {
        Format::Table => {
            let mut out = format!("{}\n", report.label());
            match &report {
                EquilibriumReport::NotApplicable { reasons } => {
                    for r in reasons {
                        out.push_str(&format!("  {r}\n"));
                    }
                }
                EquilibriumReport::Checked { checked, .. } => {
                    out.push_str(&format!("checked {checked} (player, state) pairs\n"));
                    for v in &violations {
                        out.push_str(&format!(
                            "  player={} state={} prescribed={} gain={}\n",
                            v[0], v[1], v[2], v[3]
                        ));
                    }
                }
            }
            out
        }
        Format::Json => {
            let (checked, reasons) = match &report {
                EquilibriumReport::Checked { checked, .. } => (Some(*checked), Vec::new()),
                EquilibriumReport::NotApplicable { reasons } => (None, reasons.clone()),
            };
            render::json(&json!({
                "status": report.label(),
                "checked": checked,
                "reasons": reasons,
                "violations": violations
                    .iter()
                    .map(|v| json!({"player": v[0], "state": v[1], "prescribed": v[2], "gain": v[3]}))
                    .collect::<Vec<_>>(),
            }))?
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = violations
                .iter()
                .map(|v| {
                    std::iter::once(report.label().to_string())
                        .chain(v.iter().cloned())
                        .collect()
                })
                .collect();
            render::csv(&["status", "player", "state", "prescribed", "gain"], &rows)?
        }
    };
    Ok(Output {
        text,
        failed: report.label() == "FAIL",
    })
}

fn load_human(path: &Path) -> Result<HumanData, String> {
    HumanData::from_path(path).map_err(|e| match e {
        DataError::Io { .. } => e.to_string(),
        other => format!("{}: {other}", path.display()),
    })
}

fn delta_or_default(delta: Option<Rational>) -> Rational {
    delta.unwrap_or_else(|| rational::ratio(1, 4))
}

fn compare_cmd(human: &Path, delta: Option<Rational>, payoffs: &PayoffParams, format: Format) -> Outcome {
    let data = load_human(human)?;
    let conditions = thomas_conditions(delta_or_default(delta)).map_err(err)?;
    let rows = compare(&conditions, payoffs, &data).map_err(err)?;
    let header = ["model", "k", "private", "secondary", "tertiary", "common", "mse"];
    let text = match format {
        Format::Json => render::json(&rows)?,
        Format::Table | Format::Csv => {
            let cell = |r: &Rational| match format {
                Format::Table => exact(r),
                _ => format_ratio(r),
            };
            let mut lines: Vec<Vec<String>> = rows
                .iter()
                .map(|row| {
                    let mut line = vec![
                        row.table.model.clone(),
                        row.table.level.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                    ];
                    line.extend(Condition::ALL.iter().map(|&c| cell(row.table.get(c))));
                    line.push(cell(&row.mse));
                    line
                })
                .collect();
            if format == Format::Table {
                let mut observed = vec!["human".to_string(), "-".to_string()];
                observed.extend(Condition::ALL.iter().map(|&c| cell(data.prob_a(c))));
                observed.push("-".into());
                lines.push(observed);
                render::table(&header, &lines)
            } else {
                for line in &mut lines {
                    if line[1] == "-" {
                        line[1].clear();
                    }
                }
                render::csv(&header, &lines)?
            }
        }
    };
    Ok(Output::ok(text))
}

fn sweep(human: &Path, grid: &str, delta: Option<Rational>, format: Format) -> Outcome {
    let data = load_human(human)?;
    let grid = parse_grid(grid).map_err(err)?;
    let conditions = thomas_conditions(delta_or_default(delta)).map_err(err)?;
    let result = human_agent_sweep(&grid, &conditions, &data).map_err(err)?;
    let text = match format {
        Format::Csv => result.to_csv(),
        Format::Json => render::json(&result.rows)?,
        Format::Table => {
            let rows: Vec<Vec<String>> = result
                .rows
                .iter()
                .map(|r| vec![exact(&r.p_star), r.strategy.clone(), exact(&r.marginal_value)])
                .collect();
            render::table(&["p_star", "strategy", "marginal_value"], &rows)
        }
    };
    Ok(Output::ok(text))
}

fn fuzz_cmd(seeds: u64, states: usize, format: Format) -> Outcome {
    let report = fuzz(seeds, states).map_err(err)?;
    let failed = report.counterexample.is_some();
    let text = match format {
        Format::Json => render::json(&report)?,
        Format::Csv => render::csv(
            &["instances", "comparisons", "counterexample_seed"],
            &[vec![
                report.instances.to_string(),
                report.comparisons.to_string(),
                report
                    .counterexample
                    .as_ref()
                    .map(|c| c.seed.to_string())
                    .unwrap_or_default(),
            ]],
        )?,
        Format::Table => match &report.counterexample {
            None => format!(
                "agreement on {} instances ({} comparisons)\n",
                report.instances, report.comparisons
            ),
            Some(c) => format!(
                "disagreement at seed {} (player {}, state {}): algorithm {}, exhaustive {}, candidate {}\n{}",
                c.seed,
                c.player,
                c.state,
                format_ratio(&c.algorithm),
                format_ratio(&c.exhaustive),
                format_ratio(&c.candidate),
                render::json(&c.structure)?
            ),
        },
    };
    Ok(Output { text, failed })
}
