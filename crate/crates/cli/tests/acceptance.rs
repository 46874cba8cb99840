//! Acceptance suite: one test per criterion, each printing a single
//! `[PASS]` or `[FAIL]` line to stderr before asserting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use schelling_cli::document::{read_instance, write_instance};
use schelling_core::dynamics::{
    construct_equilibrium_simple, potential, run_dynamics, MovePolicy, PotentialKind,
};
use schelling_core::game::{is_equilibrium, social_welfare, utility};
use schelling_core::instances::{
    gen_family, gen_random, random_assignment, reduce_clique_equilibrium_layout, reduce_clique_welfare,
    reduce_hamiltonian, ExternalGraph, FamilySpec, RandomFriendship, RandomSpec, RandomTopology,
};
use schelling_core::search::{assignment_count, find_all_equilibria, welfare_summary, RatioResult, SearchConfig};
use schelling_core::treedp::{tree_decide_equilibrium, tree_max_welfare_equilibrium, tree_optimal_assignment};
use schelling_core::{Assignment, GameInstance, Rational, UtilityModel};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// Collects failed sub-checks and reports the criterion on one line.
struct Criterion {
    name: &'static str,
    checks: usize,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, checks: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, label: &str, got: T, want: T) {
        let ok = got == want;
        self.check(ok, || format!("{label}: got {got:?}, want {want:?}"));
    }

    fn finish(self, summary: &str) {
        let line = if self.failures.is_empty() {
            format!("[PASS] {} {summary} ({} checks)\n", self.name, self.checks)
        } else {
            format!(
                "[FAIL] {} {summary}: {} of {} checks failed: {}\n",
                self.name,
                self.failures.len(),
                self.checks,
                self.failures.join("; ")
            )
        };
        // straight to stderr so the line survives output capture
        let _ = std::io::stderr().write_all(line.as_bytes());
        assert!(self.failures.is_empty(), "{}", line.trim_end());
    }
}

struct Run {
    code: i32,
    stdout: String,
    elapsed: Duration,
}

fn cli<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_schelling"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        elapsed: started.elapsed(),
    }
}

fn gen_to(dir: &Path, file: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(file);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let out = path.to_str().unwrap().to_string();
    let mut full: Vec<String> = full.into_iter().map(String::from).collect();
    full.push("--out".into());
    full.push(out);
    let run = cli(&full);
    assert_eq!(run.code, 0, "gen {args:?} failed: {}", run.stdout);
    path
}

fn load(path: &Path) -> GameInstance {
    read_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn summary(inst: &GameInstance) -> schelling_core::search::WelfareSummary {
    welfare_summary(inst, &SearchConfig::default()).expect("search fits the budget")
}

#[test]
fn ac01_nonexistence_tree() {
    let mut c = Criterion::new("AC1");
    let dir = tempfile::tempdir().unwrap();
    let k2 = gen_to(dir.path(), "k2.json", &["nonexistence-tree", "--k", "2"]);
    let inst = load(&k2);
    c.eq("k=2 exhaustive colourings", assignment_count(&inst), 2772);
    for method in ["brute", "treedp"] {
        let run = cli(["solve", k2.to_str().unwrap(), "--method", method]);
        c.eq(&format!("k=2 {method} exit"), run.code, 1);
        c.check(run.stdout.lines().next() == Some("no-equilibrium"), || {
            format!("k=2 {method} output {:?}", run.stdout)
        });
        c.check(run.elapsed < Duration::from_secs(1), || {
            format!("k=2 {method} took {:?}", run.elapsed)
        });
    }

    let k3 = gen_to(dir.path(), "k3.json", &["nonexistence-tree", "--k", "3"]);
    let inst3 = load(&k3);
    c.eq("k=3 agents", inst3.agent_count(), 21);
    c.eq("k=3 nodes", inst3.node_count(), 22);
    let run = cli(["solve", k3.to_str().unwrap(), "--method", "treedp"]);
    c.eq("k=3 treedp exit", run.code, 1);
    c.check(run.stdout.lines().next() == Some("no-equilibrium"), || {
        format!("k=3 treedp output {:?}", run.stdout)
    });
    c.finish("nonexistence tree has no equilibrium (brute and treedp at k=2, treedp at k=3)");
}

fn degree_two_or_star(seed: u64, topology: RandomTopology, nodes: usize) -> Option<GameInstance> {
    // one to three types, or a random social network over the agents
    let agents = 1 + (seed as usize * 7 + nodes) % (nodes - 1);
    let types = 1 + (seed as usize) % 3;
    if types > agents {
        return None;
    }
    let sizes: Vec<usize> = (0..types).map(|t| agents / types + usize::from(t < agents % types)).collect();
    let mut spec = RandomSpec::new(nodes, topology, sizes, seed);
    if seed % 3 == 0 {
        spec.friendship = RandomFriendship::Social { edge_prob: r(1 + (seed % 4) as i64, 5) };
    }
    gen_random(&spec).ok()
}

#[test]
fn ac02_existence_on_stars_paths_and_rings() {
    let mut c = Criterion::new("AC2");
    let third = r(1, 3);
    let mut cases = 0;
    let mut deltas = 0;
    let mut families: Vec<(RandomTopology, usize)> = Vec::new();
    families.extend((2..=8).map(|leaves| (RandomTopology::Star, leaves + 1)));
    families.extend((3..=8).map(|nodes| (RandomTopology::Path, nodes)));
    families.extend((3..=8).map(|nodes| (RandomTopology::Ring, nodes)));
    for (topology, nodes) in families {
        for seed in 0..10u64 {
            let Some(inst) = degree_two_or_star(seed, topology, nodes) else { continue };
            cases += 1;
            let label = format!("{topology:?} nodes={nodes} seed={seed}");
            match construct_equilibrium_simple(&inst) {
                Ok(eq) => c.check(is_equilibrium(&inst, &eq), || format!("{label}: constructed assignment is not stable")),
                Err(err) => c.check(false, || format!("{label}: construction failed: {err}")),
            }
            let bound = 3 * nodes + 1;
            let start = random_assignment(&inst, seed).unwrap();
            let trace = run_dynamics(&inst, &start, MovePolicy::BestImprovement, bound);
            c.check(trace.outcome.converged(), || format!("{label}: no convergence in {bound} steps"));
            if topology != RandomTopology::Star {
                for step in &trace.steps {
                    deltas += 1;
                    match (step.potential_before, step.potential_after) {
                        (Some(before), Some(after)) => c.check(after - before >= third, || {
                            format!("{label}: potential delta {}", after - before)
                        }),
                        _ => c.check(false, || format!("{label}: potential missing")),
                    }
                }
            }
        }
    }
    c.check(cases >= 100, || format!("only {cases} cases"));
    c.check(deltas > 0, || "no improving moves observed".into());

    let dir = tempfile::tempdir().unwrap();
    let star = gen_to(dir.path(), "star.json", &["star", "--leaves", "6", "--types", "2,3"]);
    let run = cli(["solve", star.to_str().unwrap(), "--method", "dynamics"]);
    c.eq("star dynamics solve exit", run.code, 0);
    c.finish(&format!("{cases} stars, paths and rings: constructions stable, dynamics within 3|V|+1, {deltas} potential deltas >= 1/3"));
}

#[test]
fn ac03_tree_program_matches_brute_force() {
    let mut c = Criterion::new("AC3");
    let mut cases = 0;
    for seed in 0..400u64 {
        let nodes = 4 + (seed as usize % 7);
        let types = 2 + (seed as usize / 7) % 2;
        if types >= nodes {
            continue;
        }
        let agents = (types + (seed as usize / 3) % (nodes - types)).min(7);
        let stubborn = if seed % 2 == 0 { 0 } else { 1 + seed as usize % 2 };
        let strategic = agents.saturating_sub(stubborn);
        if strategic < types || agents >= nodes {
            continue;
        }
        let sizes: Vec<usize> = (0..types).map(|t| strategic / types + usize::from(t < strategic % types)).collect();
        let mut spec = RandomSpec::new(nodes, RandomTopology::Tree, sizes, seed);
        spec.stubborn_per_type[0] = stubborn.div_ceil(2);
        spec.stubborn_per_type[1] = stubborn / 2;
        let inst = gen_random(&spec).unwrap();
        cases += 1;
        let label = format!("seed={seed} nodes={nodes} k={types} stubborn={stubborn}");
        let brute = summary(&inst);
        let exists = tree_decide_equilibrium(&inst).unwrap().is_some();
        c.check(exists == (brute.equilibrium_count > 0), || format!("{label}: existence {exists}"));
        let best = tree_max_welfare_equilibrium(&inst).unwrap().map(|e| e.1);
        c.check(best == brute.best_equilibrium.as_ref().map(|e| e.1), || {
            format!("{label}: best equilibrium {best:?} vs {:?}", brute.best_equilibrium.as_ref().map(|e| e.1))
        });
        let (_, opt) = tree_optimal_assignment(&inst).unwrap();
        c.check(opt == brute.optimum.1, || format!("{label}: optimum {opt} vs {}", brute.optimum.1));
        if cases == 240 {
            break;
        }
    }
    c.check(cases >= 200, || format!("only {cases} trees"));
    c.finish(&format!("{cases} random trees: existence, best equilibrium and optimum equal brute force"));
}

#[test]
fn ac04_clique_gadget() {
    let mut c = Criterion::new("AC4");
    let dir = tempfile::tempdir().unwrap();
    let k5 = ExternalGraph::complete(5).with_isolated(1);
    let k5_minus = ExternalGraph::complete(5).without_edge(0, 1).with_isolated(1);
    for (name, graph, want) in [("k5", &k5, 0), ("k5-minus-edge", &k5_minus, 1)] {
        let edges = dir.path().join(format!("{name}.txt"));
        std::fs::write(&edges, graph.to_edge_list()).unwrap();
        let inst = gen_to(
            dir.path(),
            &format!("{name}.json"),
            &["reduce-clique", "--graph", edges.to_str().unwrap(), "--s", "5"],
        );
        let loaded = load(&inst);
        c.eq(&format!("{name} placements"), assignment_count(&loaded), 792);
        let run = cli(["solve", inst.to_str().unwrap(), "--method", "brute"]);
        c.eq(&format!("{name} solve exit"), run.code, want);
    }

    let s = 5;
    let (inst, layout) = reduce_clique_equilibrium_layout(&k5, s).unwrap();
    // red agents on the clique, so x, y, z and the slots are all empty
    let mut node_of: Vec<usize> = (0..inst.agent_count()).map(|a| inst.pin(a).unwrap_or(0)).collect();
    for (agent, &v) in layout.graph[..s].iter().enumerate() {
        node_of[agent] = v;
    }
    let asg = Assignment::new(&inst, node_of).unwrap();
    let at = |a: &Assignment, node| utility(&inst, a, 0, node).unwrap();
    c.eq("slot", at(&asg, layout.slots[0]), r(1, 2) + r(1, 4 * s as i64));
    c.eq("z", at(&asg, layout.z), r(5, 12));
    c.eq("x with y empty", at(&asg, layout.x), r(1, 3));
    c.eq("y with x empty", at(&asg, layout.y), r(41, 121));
    let x_taken = asg.with_move(1, layout.x);
    c.eq("y with x red", at(&x_taken, layout.y), r(42, 122));
    c.finish("clique gadget: K5 stable, K5 minus an edge unstable, 792 placements, gadget utilities exact");
}

#[test]
fn ac05_welfare_gadgets() {
    let mut c = Criterion::new("AC5");
    let opt = |inst: &GameInstance| summary(inst).optimum.1;
    let k4 = reduce_clique_welfare(&ExternalGraph::complete(4), 4).unwrap();
    c.eq("clique K4 s=4 optimum", opt(&k4.instance), int(3));
    c.eq("clique K4 target", k4.target, int(3));
    let c5 = reduce_clique_welfare(&ExternalGraph::cycle(5), 3).unwrap();
    let w = opt(&c5.instance);
    c.check(w < int(2), || format!("clique C5 s=3 optimum {w} not below 2"));
    let c6 = reduce_hamiltonian(&ExternalGraph::cycle(6)).unwrap();
    c.eq("hamiltonian C6 optimum", opt(&c6.instance), int(6));
    let star = reduce_hamiltonian(&ExternalGraph::star(3)).unwrap();
    let w = opt(&star.instance);
    c.check(w < int(4), || format!("hamiltonian K13 optimum {w} not below 4"));
    c.finish("welfare gadgets: K4 reaches 3, C5 stays below 2, C6 reaches 6, K13 stays below 4");
}

#[test]
fn ac06_price_of_anarchy_table() {
    let mut c = Criterion::new("AC6");
    let cliques = summary(&gen_family(&FamilySpec::PoaCliques { k: 2, l: 2 }).unwrap());
    c.eq("cliques(2,2) optimum", cliques.optimum.1, int(12));
    c.eq("cliques(2,2) worst equilibrium", cliques.worst_equilibrium.as_ref().map(|e| e.1), Some(int(8)));
    c.eq("cliques(2,2) PoA", cliques.price_of_anarchy(), RatioResult::Value(r(3, 2)));
    let dir = tempfile::tempdir().unwrap();
    let file = gen_to(dir.path(), "cliques.json", &["poa-cliques", "--k", "2", "--l", "2"]);
    let run = cli(["ratio", file.to_str().unwrap(), "poa"]);
    c.check(run.stdout.lines().next() == Some("poa 3/2"), || {
        format!("cli ratio printed {:?}", run.stdout.lines().next())
    });

    let star = summary(&gen_family(&FamilySpec::Star { leaves: 3, type_sizes: vec![2, 1] }).unwrap());
    c.eq("star (2,1) PoA", star.price_of_anarchy(), RatioResult::Unbounded);

    let stubborn_star = summary(&gen_family(&FamilySpec::PoaStarStubborn { k: 2, l: 3 }).unwrap());
    c.eq("stubborn star PoA", stubborn_star.price_of_anarchy(), RatioResult::Value(int(6)));
    if let RatioResult::Value(poa) = stubborn_star.price_of_anarchy() {
        c.check(poa >= int(4), || format!("stubborn star PoA {poa} below n-k"));
    }

    let fig3 = summary(&gen_family(&FamilySpec::PoaStubbornCliques { k: 3 }).unwrap());
    c.eq("stubborn cliques k=3 PoA", fig3.price_of_anarchy(), RatioResult::Value(int(3)));
    c.finish("price of anarchy table: cliques 3/2, star unbounded, stubborn star 6, stubborn cliques 3");
}

#[test]
fn ac07_price_of_stability_table() {
    let mut c = Criterion::new("AC7");
    for eps in [r(1, 2), r(1, 4)] {
        let s = summary(&gen_family(&FamilySpec::PosUnbounded { eps }).unwrap());
        let want = Rational::one() / eps + r(1, 2);
        c.eq(&format!("unbounded eps={eps} PoS"), s.price_of_stability(), RatioResult::Value(want));
    }
    for x in 1..=3i64 {
        let s = summary(&gen_family(&FamilySpec::PosThree { x: x as usize }).unwrap());
        let want = r(3 * (2 * x + 1), 2 * (x + 1));
        c.eq(&format!("three x={x} PoS"), s.price_of_stability(), RatioResult::Value(want));
    }
    let inst = gen_family(&FamilySpec::PosThirtyFourOver33).unwrap();
    let s = summary(&inst);
    c.eq("34/33 best equilibrium", s.best_equilibrium.as_ref().map(|e| e.1), Some(r(33, 4)));
    c.eq("34/33 optimum", s.optimum.1, r(34, 4));
    c.eq("34/33 PoS", s.price_of_stability(), RatioResult::Value(r(34, 33)));
    let eqs = find_all_equilibria(&inst, &SearchConfig::default()).unwrap();
    c.check(eqs.iter().any(|(_, w)| *w == r(97, 12)), || "no equilibrium with welfare 97/12".into());
    c.finish("price of stability table: 1/eps + 1/2, 3(2x+1)/(2(x+1)) and the 34/33 instance");
}

/// Connected stubborn-free typed instance with at least two agents per type.
fn lower_bound_instance(seed: u64, sizes: Vec<usize>, stubborn: usize) -> Option<GameInstance> {
    let agents: usize = sizes.iter().sum::<usize>() + stubborn * sizes.len();
    let nodes = agents + 1 + (seed as usize % 3);
    let topology = match seed % 3 {
        0 => RandomTopology::Tree,
        1 => RandomTopology::Gnp { edge_prob: r(2, 5) },
        _ => RandomTopology::Gnp { edge_prob: r(3, 5) },
    };
    let mut spec = RandomSpec::new(nodes, topology, sizes, seed);
    spec.stubborn_per_type = vec![stubborn; spec.strategic_per_type.len()];
    spec.connected = true;
    gen_random(&spec).ok()
}

#[test]
fn ac08_equilibrium_welfare_lower_bounds() {
    let mut c = Criterion::new("AC8");
    let mut instances = [0usize; 3];
    let mut equilibria = 0usize;
    for seed in 0..120u64 {
        // two or more agents per type, sizes may differ
        let sizes = vec![2 + seed as usize % 2, 2 + (seed as usize / 2) % 2];
        if let Some(inst) = lower_bound_instance(seed, sizes, 0) {
            instances[0] += 1;
            for (a, w) in find_all_equilibria(&inst, &SearchConfig::default()).unwrap() {
                equilibria += 1;
                c.check(w >= Rational::one(), || format!("seed {seed}: equilibrium {a:?} has SW {w} < 1"));
            }
        }

        // equal type sizes
        let k = 2 + seed as usize % 2;
        let per = if k == 2 { 2 + (seed as usize / 2) % 2 } else { 2 };
        if let Some(inst) = lower_bound_instance(seed, vec![per; k], 0) {
            instances[1] += 1;
            let bound = int(per as i64 - 1);
            for (a, w) in find_all_equilibria(&inst, &SearchConfig::default()).unwrap() {
                equilibria += 1;
                c.check(w >= bound, || format!("seed {seed}: equal sizes {a:?} has SW {w} < {bound}"));
            }
        }

        // t strategic and l stubborn per type
        let t = 1 + seed as usize % 3;
        let l = (seed as usize / 3) % 3;
        if let Some(inst) = lower_bound_instance(seed, vec![t; 2], l) {
            instances[2] += 1;
            let bound = int(t as i64 - 1);
            for (a, w) in find_all_equilibria(&inst, &SearchConfig::default()).unwrap() {
                equilibria += 1;
                c.check(w >= bound, || format!("seed {seed}: t={t} l={l} {a:?} has SW {w} < {bound}"));
            }
        }
    }
    for (i, &count) in instances.iter().enumerate() {
        c.check(count >= 100, || format!("family {i} has only {count} instances"));
    }
    c.finish(&format!(
        "{} connected instances, {equilibria} equilibria: SW >= 1, >= n/k - 1 and >= t - 1",
        instances.iter().sum::<usize>()
    ));
}

#[test]
fn ac09_linear_utilities() {
    let mut c = Criterion::new("AC9");
    let two = int(2);
    let mut cases = 0;
    let mut steps = 0;
    for seed in 0..120u64 {
        let nodes = 5 + seed as usize % 3;
        let stubborn = seed % 2 == 1;
        let mut spec = RandomSpec::new(nodes, RandomTopology::Gnp { edge_prob: r(1, 2) }, vec![2, 1 + seed as usize % 2], seed);
        if stubborn {
            spec.stubborn_per_type = vec![0, 1];
        }
        spec.model = UtilityModel::Linear { alpha: r(1 + seed as i64 % 3, 2), beta: r(seed as i64 % 4, 3) };
        if seed % 4 >= 2 {
            spec.friendship = RandomFriendship::Social { edge_prob: r(1, 2) };
        }
        let Ok(inst) = gen_random(&spec) else { continue };
        cases += 1;
        let label = format!("seed {seed}");
        let start = random_assignment(&inst, seed).unwrap();
        let trace = run_dynamics(&inst, &start, MovePolicy::BestImprovement, 10_000);
        c.check(trace.outcome.converged(), || format!("{label}: dynamics did not converge"));
        let mut current = start;
        for step in &trace.steps {
            steps += 1;
            let next = current.with_move(step.agent, step.to);
            let delta = potential(&inst, &next, PotentialKind::Linear) - potential(&inst, &current, PotentialKind::Linear);
            let gain = step.new_utility - step.old_utility;
            c.check(delta == two * gain, || format!("{label}: potential moved {delta} for gain {gain}"));
            current = next;
        }
        if !stubborn {
            let s = summary(&inst);
            let best = s.best_equilibrium.as_ref().map(|e| e.1);
            c.check(best == Some(s.optimum.1), || format!("{label}: best equilibrium {best:?} vs optimum {}", s.optimum.1));
            if let Some((eq, _)) = &s.best_equilibrium {
                c.eq(&format!("{label} witness welfare"), social_welfare(&inst, eq), s.optimum.1);
            }
        }
    }
    c.check(cases >= 100, || format!("only {cases} instances"));
    c.finish(&format!("{cases} linear instances, {steps} moves: convergence, potential = 2x gain, PoS 1 without stubborn agents"));
}

#[test]
fn ac10_determinism_and_round_trip() {
    let mut c = Criterion::new("AC10");
    let runs: Vec<Vec<&str>> = vec![
        vec!["random", "--nodes", "9", "--types", "2,3", "--stubborn", "1,0", "--topology", "gnp:1/2", "--seed", "7"],
        vec!["random", "--nodes", "8", "--types", "2,2", "--social", "1/3", "--topology", "tree", "--seed", "11"],
        vec!["random", "--nodes", "7", "--types", "3,2", "--model", "linear:1:1/2", "--topology", "ring", "--seed", "3"],
        vec!["nonexistence-tree", "--k", "2"],
        vec!["poa-cliques", "--k", "2", "--l", "2"],
        vec!["pos-unbounded", "--eps", "1/4"],
        vec!["pos-34-33"],
    ];
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    for (i, args) in runs.iter().enumerate() {
        let name = format!("{i}.json");
        let a = gen_to(first.path(), &name, args);
        let b = gen_to(second.path(), &name, args);
        let (a_bytes, b_bytes) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        c.check(a_bytes == b_bytes, || format!("gen {args:?} differs between runs"));
        let text = String::from_utf8(a_bytes).unwrap();
        let reread = write_instance(&load(&a));
        c.check(reread == text, || format!("gen {args:?} does not round-trip"));

        let traces: Vec<Vec<u8>> = [&first, &second]
            .iter()
            .map(|dir| {
                let out = dir.path().join(format!("{i}.trace"));
                let run = cli(["dynamics", a.to_str().unwrap(), "--start", "random:5", "--max-steps", "200", "--out", out.to_str().unwrap()]);
                assert!(run.code == 0 || run.code == 3, "dynamics exit {}", run.code);
                std::fs::read(out).unwrap()
            })
            .collect();
        c.check(!traces[0].is_empty() && traces[0] == traces[1], || format!("trace for {args:?} differs between runs"));
    }
    c.finish(&format!("{} generated files and traces byte-identical across runs and round-trip", runs.len()));
}
