use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde_json::{json, Value};

use schelling_core::dynamics::{convergence_bound, run_dynamics, MovePolicy};
use schelling_core::game::social_welfare;
use schelling_core::instances::{
    gen_family, gen_random, pad_types, random_assignment, reduce_clique_equilibrium_layout, reduce_clique_welfare,
    reduce_hamiltonian, ExternalGraph, FamilySpec, PadKind, RandomFriendship, RandomSpec, RandomTopology,
};
use schelling_core::search::{
    equilibrium_exists, find_all_equilibria, optimal_welfare, welfare_summary, RatioResult, SearchConfig,
};
use schelling_core::treedp::{tree_decide_equilibrium, tree_max_welfare_equilibrium, tree_optimal_assignment};
use schelling_core::{Assignment, GameInstance, Rational, UtilityModel};

use crate::document::{read_instance, write_instance, InstanceDocument};
use crate::trace::{outcome_name, parse_start, positions, render_trace};
use crate::args::{Cli, Command, Family, GenArgs, PadArg, PolicyArg, RatioKind, SolveMethod, WelfareMethod};

pub const FOUND: u8 = 0;
pub const ABSENT: u8 = 1;
pub const INVALID: u8 = 2;
pub const INCONCLUSIVE: u8 = 3;

/// Text lines, a JSON object and an exit code.
pub struct Report {
    pub code: u8,
    pub lines: Vec<String>,
    pub json: Value,
}

impl Report {
    fn new(code: u8, lines: Vec<String>, json: Value) -> Self {
        Report { code, lines, json }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let config = SearchConfig { budget: cli.budget };
    match &cli.command {
        Command::Validate { path } => validate(path),
        Command::Gen(args) => generate(cli, args),
        Command::Solve {
            path,
            method,
            policy,
            max_steps,
        } => solve(cli, &load(path)?, *method, *policy, *max_steps, &config),
        Command::Equilibria { path } => equilibria(&load(path)?, &config),
        Command::Welfare {
            path,
            method,
            best_equilibrium,
        } => welfare(&load(path)?, *method, *best_equilibrium, &config),
        Command::Ratio { path, which } => ratio(&load(path)?, *which, &config),
        Command::Dynamics {
            path,
            start,
            policy,
            max_steps,
        } => dynamics(cli, &load(path)?, start, *policy, *max_steps),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Reads and validates an instance file.
fn load(path: &Path) -> Result<GameInstance> {
    let instance = read_instance(&read(path)?)?;
    if let Err(issues) = instance.validate() {
        let text: Vec<String> = issues.iter().map(ToString::to_string).collect();
        bail!("invalid instance: {}", text.join("; "));
    }
    Ok(instance)
}

fn write_output(cli: &Cli, text: &str) -> Result<()> {
    if let Some(path) = &cli.out {
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn policy(arg: PolicyArg) -> MovePolicy {
    match arg {
        PolicyArg::Best => MovePolicy::BestImprovement,
        PolicyArg::First => MovePolicy::FirstImprovement,
    }
}

fn validate(path: &Path) -> Result<Report> {
    let instance = read_instance(&read(path)?)?;
    Ok(match instance.validate() {
        Ok(()) => Report::new(FOUND, vec!["ok".into()], json!({ "valid": true })),
        Err(issues) => {
            let lines = issues.iter().map(ToString::to_string).collect();
            let items: Vec<Value> = issues
                .iter()
                .map(|i| json!({ "code": i.code(), "message": i.to_string() }))
                .collect();
            Report::new(INVALID, lines, json!({ "valid": false, "issues": items }))
        }
    })
}

fn assignment_json(instance: &GameInstance, assignment: &Assignment) -> Value {
    json!({
        "positions": assignment.positions(),
        "welfare": social_welfare(instance, assignment).to_string(),
    })
}

fn assignment_lines(label: &str, instance: &GameInstance, assignment: &Assignment) -> Vec<String> {
    vec![
        format!("{label} {}", social_welfare(instance, assignment)),
        format!("positions {}", positions(assignment)),
    ]
}

fn solve(
    cli: &Cli,
    instance: &GameInstance,
    method: SolveMethod,
    policy_arg: PolicyArg,
    max_steps: Option<usize>,
    config: &SearchConfig,
) -> Result<Report> {
    let found = match method {
        SolveMethod::Brute => equilibrium_exists(instance, config)?,
        SolveMethod::Treedp => tree_decide_equilibrium(instance)?,
        SolveMethod::Dynamics => {
            let start = random_assignment(instance, cli.seed)?;
            let limit = max_steps.unwrap_or_else(|| default_steps(instance));
            let trace = run_dynamics(instance, &start, policy(policy_arg), limit);
            if !trace.outcome.converged() {
                return Ok(Report::new(
                    INCONCLUSIVE,
                    vec![format!("inconclusive step-limit after {} steps", trace.steps.len())],
                    json!({ "result": "inconclusive", "steps": trace.steps.len() }),
                ));
            }
            Some(trace.outcome.assignment().clone())
        }
    };
    Ok(match found {
        Some(assignment) => {
            let mut lines = vec!["equilibrium".to_string()];
            lines.extend(assignment_lines("welfare", instance, &assignment));
            Report::new(
                FOUND,
                lines,
                json!({ "result": "equilibrium", "equilibrium": assignment_json(instance, &assignment) }),
            )
        }
        None => Report::new(ABSENT, vec!["no-equilibrium".into()], json!({ "result": "no-equilibrium" })),
    })
}

fn default_steps(instance: &GameInstance) -> usize {
    convergence_bound(instance).unwrap_or(10_000)
}

fn equilibria(instance: &GameInstance, config: &SearchConfig) -> Result<Report> {
    let all = find_all_equilibria(instance, config)?;
    let mut lines = vec![format!("equilibria {}", all.len())];
    lines.extend(all.iter().map(|(a, w)| format!("welfare {w} positions {}", positions(a))));
    let items: Vec<Value> = all.iter().map(|(a, _)| assignment_json(instance, a)).collect();
    let code = if all.is_empty() { ABSENT } else { FOUND };
    Ok(Report::new(code, lines, json!({ "count": all.len(), "equilibria": items })))
}

fn welfare(
    instance: &GameInstance,
    method: WelfareMethod,
    best_equilibrium: bool,
    config: &SearchConfig,
) -> Result<Report> {
    let label = if best_equilibrium { "best-equilibrium" } else { "optimum" };
    let result = match (method, best_equilibrium) {
        (WelfareMethod::Brute, false) => Some(optimal_welfare(instance, config)?),
        (WelfareMethod::Treedp, false) => Some(tree_optimal_assignment(instance)?),
        (WelfareMethod::Brute, true) => welfare_summary(instance, config)?.best_equilibrium,
        (WelfareMethod::Treedp, true) => tree_max_welfare_equilibrium(instance)?,
    };
    Ok(match result {
        Some((assignment, _)) => Report::new(
            FOUND,
            assignment_lines(label, instance, &assignment),
            json!({ label: assignment_json(instance, &assignment) }),
        ),
        None => Report::new(ABSENT, vec!["no-equilibrium".into()], json!({ "result": "no-equilibrium" })),
    })
}

fn ratio(instance: &GameInstance, which: RatioKind, config: &SearchConfig) -> Result<Report> {
    let summary = welfare_summary(instance, config)?;
    let (name, value, witness) = match which {
        RatioKind::Poa => ("poa", summary.price_of_anarchy(), &summary.worst_equilibrium),
        RatioKind::Pos => ("pos", summary.price_of_stability(), &summary.best_equilibrium),
    };
    let code = match value {
        RatioResult::Value(_) | RatioResult::Unbounded => FOUND,
        RatioResult::NoEquilibrium => ABSENT,
        RatioResult::UndefinedZeroOptimum => INCONCLUSIVE,
    };
    let mut lines = vec![format!("{name} {value}"), format!("equilibria {}", summary.equilibrium_count)];
    lines.extend(assignment_lines("optimum", instance, &summary.optimum.0));
    let mut report = json!({
        name: value.to_string(),
        "equilibria": summary.equilibrium_count,
        "optimum": assignment_json(instance, &summary.optimum.0),
    });
    if let Some((a, _)) = witness {
        let label = if which == RatioKind::Poa { "worst-equilibrium" } else { "best-equilibrium" };
        lines.extend(assignment_lines(label, instance, a));
        report[label] = assignment_json(instance, a);
    }
    Ok(Report::new(code, lines, report))
}

fn dynamics(
    cli: &Cli,
    instance: &GameInstance,
    start: &str,
    policy_arg: PolicyArg,
    max_steps: Option<usize>,
) -> Result<Report> {
    let start = match start.strip_prefix("random:") {
        Some(seed) => {
            let seed: u64 = seed.parse().with_context(|| format!("bad seed {seed:?}"))?;
            random_assignment(instance, seed)?
        }
        None => parse_start(instance, &read(Path::new(start))?)?,
    };
    let limit = max_steps.unwrap_or_else(|| default_steps(instance));
    let policy = policy(policy_arg);
    let trace = run_dynamics(instance, &start, policy, limit);
    let text = render_trace(&start, policy, &trace);
    let code = if trace.outcome.converged() { FOUND } else { INCONCLUSIVE };
    let summary = format!("outcome {} steps {}", outcome_name(&trace.outcome), trace.steps.len());
    let lines = if cli.out.is_some() {
        write_output(cli, &text)?;
        vec![summary]
    } else {
        text.lines().map(String::from).collect()
    };
    Ok(Report::new(
        code,
        lines,
        json!({
            "outcome": outcome_name(&trace.outcome),
            "steps": trace.steps.len(),
            "final": trace.outcome.assignment().positions(),
        }),
    ))
}

fn family_name(family: Family) -> String {
    family.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn need<T: Copy>(value: Option<T>, flag: &str, family: Family) -> Result<T> {
    value.with_context(|| format!("{} needs --{flag}", family_name(family)))
}

fn parse_rational(text: &str, flag: &str) -> Result<Rational> {
    text.parse::<Rational>().map_err(|e| anyhow::anyhow!("--{flag}: {e}"))
}

fn parse_model(text: &str) -> Result<UtilityModel> {
    let mut parts = text.split(':');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("fractional"), None, _, _) => Ok(UtilityModel::Fractional),
        (Some("modified"), None, _, _) => Ok(UtilityModel::ModifiedFractional),
        (Some("linear"), Some(a), Some(b), None) => Ok(UtilityModel::Linear {
            alpha: parse_rational(a, "model")?,
            beta: parse_rational(b, "model")?,
        }),
        _ => bail!("--model must be fractional, modified or linear:ALPHA:BETA, got {text:?}"),
    }
}

fn parse_topology(text: &str) -> Result<RandomTopology> {
    Ok(match text {
        "tree" => RandomTopology::Tree,
        "path" => RandomTopology::Path,
        "ring" => RandomTopology::Ring,
        "star" => RandomTopology::Star,
        other => match other.strip_prefix("gnp:") {
            Some(p) => RandomTopology::Gnp {
                edge_prob: parse_rational(p, "topology")?,
            },
            None => bail!("unknown topology {other:?}"),
        },
    })
}

fn load_graph(args: &GenArgs) -> Result<ExternalGraph> {
    let path = args.graph.as_deref().context("reductions need --graph")?;
    Ok(ExternalGraph::parse(&read(path)?)?)
}

fn generate(cli: &Cli, args: &GenArgs) -> Result<Report> {
    let family = args.family;
    let sizes = || -> Result<Vec<usize>> {
        if args.types.is_empty() {
            bail!("{} needs --types", family_name(family));
        }
        Ok(args.types.clone())
    };
    let mut extra = Vec::new();
    let spec = match family {
        Family::Star => Some(FamilySpec::Star {
            leaves: need(args.leaves, "leaves", family)?,
            type_sizes: sizes()?,
        }),
        Family::Path => Some(FamilySpec::Path {
            nodes: need(args.nodes, "nodes", family)?,
            type_sizes: sizes()?,
        }),
        Family::Ring => Some(FamilySpec::Ring {
            nodes: need(args.nodes, "nodes", family)?,
            type_sizes: sizes()?,
        }),
        Family::NonexistenceTree => Some(FamilySpec::NonexistenceTree {
            k: need(args.k, "k", family)?,
        }),
        Family::PoaCliques => Some(FamilySpec::PoaCliques {
            k: need(args.k, "k", family)?,
            l: need(args.l, "l", family)?,
        }),
        Family::PoaStubbornCliques => Some(FamilySpec::PoaStubbornCliques {
            k: need(args.k, "k", family)?,
        }),
        Family::PoaStarStubborn => Some(FamilySpec::PoaStarStubborn {
            k: need(args.k, "k", family)?,
            l: need(args.l, "l", family)?,
        }),
        Family::PoaStarTwoPerType => Some(FamilySpec::PoaStarTwoPerType {
            k: need(args.k, "k", family)?,
            n: need(args.n, "n", family)?,
        }),
        Family::PosUnbounded => Some(FamilySpec::PosUnbounded {
            eps: parse_rational(args.eps.as_deref().context("pos-unbounded needs --eps")?, "eps")?,
        }),
        Family::PosThree => Some(FamilySpec::PosThree {
            x: need(args.x, "x", family)?,
        }),
        Family::PosThirtyFourOver33 => Some(FamilySpec::PosThirtyFourOver33),
        _ => None,
    };
    let mut instance = match (&spec, family) {
        (Some(spec), _) => {
            extra.push(format!("family {spec}"));
            gen_family(spec)?
        }
        (None, Family::ReduceClique) => {
            let (instance, layout) = reduce_clique_equilibrium_layout(&load_graph(args)?, need(args.s, "s", family)?)?;
            let reds = layout
                .triad
                .iter()
                .filter(|&&v| instance.pinned_at(v).and_then(|a| instance.type_of(a)) == Some(0))
                .count();
            extra.push("family reduce-clique".into());
            extra.push(format!(
                "gadget {} nodes: {} red and {} blue",
                layout.triad.len(),
                reds,
                layout.triad.len() - reds
            ));
            instance
        }
        (None, Family::ReduceCliqueWelfare) => {
            let reduction = reduce_clique_welfare(&load_graph(args)?, need(args.s, "s", family)?)?;
            extra.push("family reduce-clique-welfare".into());
            extra.push(format!("target {}", reduction.target));
            reduction.instance
        }
        (None, Family::ReduceHamiltonian) => {
            let reduction = reduce_hamiltonian(&load_graph(args)?)?;
            extra.push("family reduce-hamiltonian".into());
            extra.push(format!("target {}", reduction.target));
            reduction.instance
        }
        (None, _) => {
            let mut spec = RandomSpec::new(
                need(args.nodes, "nodes", family)?,
                parse_topology(&args.topology)?,
                sizes()?,
                cli.seed,
            );
            if !args.stubborn.is_empty() {
                spec.stubborn_per_type = args.stubborn.clone();
            }
            if let Some(p) = &args.social {
                spec.friendship = RandomFriendship::Social {
                    edge_prob: parse_rational(p, "social")?,
                };
            }
            spec.connected = args.connected;
            extra.push(format!("family random(seed={})", cli.seed));
            gen_random(&spec)?
        }
    };
    if let Some(count) = args.pad {
        let kind = match args.pad_kind {
            PadArg::Strategic => PadKind::Strategic,
            PadArg::Stubborn => PadKind::Stubborn,
        };
        instance = pad_types(&instance, count, kind)?;
        extra.push(format!("padded {count}"));
    }
    if let Some(model) = &args.model {
        instance = instance.with_utility(parse_model(model)?);
    }

    let text = write_instance(&instance);
    let mut lines = extra;
    lines.extend(summary(&instance));
    let document = serde_json::to_value(InstanceDocument::from_instance(&instance))?;
    if cli.out.is_some() {
        write_output(cli, &text)?;
    } else if !cli.json {
        lines = text.lines().map(String::from).collect();
    }
    Ok(Report::new(FOUND, lines, json!({ "summary": summary(&instance), "instance": document })))
}

/// Node, edge and agent counts per type plus stubborn pins.
pub fn summary(instance: &GameInstance) -> Vec<String> {
    let n = instance.agent_count();
    let stubborn: Vec<usize> = instance.stubborn_agents().collect();
    let mut lines = vec![
        format!("nodes {}", instance.node_count()),
        format!("edges {}", instance.topology().edges().len()),
        format!("agents {n} strategic {} stubborn {}", n - stubborn.len(), stubborn.len()),
    ];
    match instance.type_count() {
        Some(k) => {
            for t in 0..k {
                let of_type = |a: &usize| instance.type_of(*a) == Some(t);
                let total = (0..n).filter(of_type).count();
                let pinned = stubborn.iter().filter(|a| of_type(a)).count();
                lines.push(format!("type {t} strategic {} stubborn {pinned}", total - pinned));
            }
        }
        None => {
            if let schelling_core::FriendshipSpec::Social { edges } = instance.friendship() {
                lines.push(format!("social edges {}", edges.len()));
            }
        }
    }
    let pins: Vec<String> = stubborn
        .iter()
        .map(|&a| format!("{a}@{}", instance.pin(a).expect("stubborn")))
        .collect();
    lines.push(if pins.is_empty() {
        "pins none".into()
    } else {
        format!("pins {}", pins.join(" "))
    });
    lines
}
