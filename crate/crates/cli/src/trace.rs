//! Plain-text dynamics traces and start-assignment files.
//!
//! A trace has one line per move with a fixed field order, so two traces
//! can be compared with `diff`:
//!
//! ```text
//! policy best
//! start 4 0 2
//! step 1 agent 0 from 4 to 1 utility 0 -> 1/2 potential 8/3 -> 3
//! outcome converged steps 1
//! final 1 0 2
//! ```

use anyhow::{bail, Context, Result};

use schelling_core::dynamics::{DynamicsTrace, MovePolicy, Outcome};
use schelling_core::{Assignment, GameInstance, Rational};

pub fn policy_name(policy: MovePolicy) -> &'static str {
    match policy {
        MovePolicy::BestImprovement => "best",
        MovePolicy::FirstImprovement => "first",
    }
}

pub fn outcome_name(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Converged(_) => "converged",
        Outcome::StepLimit(_) => "step-limit",
    }
}

pub fn positions(assignment: &Assignment) -> String {
    let nodes: Vec<String> = assignment.positions().iter().map(ToString::to_string).collect();
    nodes.join(" ")
}

fn potential(value: Option<Rational>) -> String {
    value.map_or_else(|| "-".to_string(), |r| r.to_string())
}

pub fn render_trace(start: &Assignment, policy: MovePolicy, trace: &DynamicsTrace) -> String {
    let mut out = format!("policy {}\nstart {}\n", policy_name(policy), positions(start));
    for (i, step) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "step {} agent {} from {} to {} utility {} -> {} potential {} -> {}\n",
            i + 1,
            step.agent,
            step.from,
            step.to,
            step.old_utility,
            step.new_utility,
            potential(step.potential_before),
            potential(step.potential_after),
        ));
    }
    out.push_str(&format!(
        "outcome {} steps {}\nfinal {}\n",
        outcome_name(&trace.outcome),
        trace.steps.len(),
        positions(trace.outcome.assignment())
    ));
    out
}

/// Node ids of agents `0, 1, ...` separated by whitespace; `#` starts a
/// comment.
pub fn parse_start(instance: &GameInstance, text: &str) -> Result<Assignment> {
    let mut nodes = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            nodes.push(token.parse::<usize>().with_context(|| format!("bad node id {token:?}"))?);
        }
    }
    if nodes.len() != instance.agent_count() {
        bail!("start lists {} nodes for {} agents", nodes.len(), instance.agent_count());
    }
    Assignment::new(instance, nodes).context("invalid start assignment")
}

#[cfg(test)]
mod tests {
    use super::*;
    use schelling_core::dynamics::run_dynamics;
    use schelling_core::instances::{gen_family, FamilySpec};

    #[test]
    fn trace_lines_and_start_files() {
        let inst = gen_family(&FamilySpec::Path {
            nodes: 4,
            type_sizes: vec![1, 1],
        })
        .unwrap();
        let start = parse_start(&inst, "# two agents\n0\n3 # far end\n").unwrap();
        let trace = run_dynamics(&inst, &start, MovePolicy::BestImprovement, 10);
        let text = render_trace(&start, MovePolicy::BestImprovement, &trace);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "policy best");
        assert_eq!(lines[1], "start 0 3");
        assert_eq!(lines.len(), trace.steps.len() + 4);
        assert!(lines[lines.len() - 2].starts_with("outcome converged steps"));
        assert!(parse_start(&inst, "0").is_err());
        assert!(parse_start(&inst, "0 0").is_err());
        assert!(parse_start(&inst, "0 x").is_err());
    }
}
