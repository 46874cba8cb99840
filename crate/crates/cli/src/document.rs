//! JSON instance documents.
//!
//! Keys are written in sorted order, edge and agent lists in canonical
//! order, and rationals as reduced `"p/q"` strings, so equal instances
//! always serialize to identical bytes.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use schelling_core::{AgentKind, FriendshipSpec, GameInstance, Rational, Topology, UtilityModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub mode: Mode,
    pub topology: TopologyDoc,
    pub agents: Vec<AgentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub social_edges: Option<Vec<[usize; 2]>>,
    pub utility: UtilityDoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Typed,
    Social,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDoc {
    pub node_count: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDoc {
    Strategic,
    Stubborn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub id: usize,
    pub kind: KindDoc,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub ty: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelDoc {
    Fractional,
    Modified,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityDoc {
    pub model: ModelDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
}

/// Always `p/q`, even for integers.
pub fn ratio_string(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn pair((a, b): (usize, usize)) -> [usize; 2] {
    [a.min(b), a.max(b)]
}

impl InstanceDocument {
    pub fn from_instance(instance: &GameInstance) -> Self {
        let topology = instance.topology();
        let mut edges: Vec<[usize; 2]> = topology.edges().iter().copied().map(pair).collect();
        edges.sort_unstable();
        let (mode, social_edges) = match instance.friendship() {
            FriendshipSpec::Typed { .. } => (Mode::Typed, None),
            FriendshipSpec::Social { edges } => {
                let mut list: Vec<[usize; 2]> = edges.iter().copied().map(pair).collect();
                list.sort_unstable();
                list.dedup();
                (Mode::Social, Some(list))
            }
        };
        let agents = (0..instance.agent_count())
            .map(|id| {
                let (kind, node) = match instance.kind(id) {
                    AgentKind::Strategic => (KindDoc::Strategic, None),
                    AgentKind::Stubborn(node) => (KindDoc::Stubborn, Some(node)),
                };
                AgentDoc {
                    id,
                    kind,
                    ty: instance.type_of(id),
                    node,
                }
            })
            .collect();
        let utility = match instance.utility_model() {
            UtilityModel::Fractional => UtilityDoc {
                model: ModelDoc::Fractional,
                alpha: None,
                beta: None,
            },
            UtilityModel::ModifiedFractional => UtilityDoc {
                model: ModelDoc::Modified,
                alpha: None,
                beta: None,
            },
            UtilityModel::Linear { alpha, beta } => UtilityDoc {
                model: ModelDoc::Linear,
                alpha: Some(ratio_string(alpha)),
                beta: Some(ratio_string(beta)),
            },
        };
        InstanceDocument {
            mode,
            topology: TopologyDoc {
                node_count: topology.node_count(),
                edges,
            },
            agents,
            social_edges,
            utility,
        }
    }

    /// Structural decoding only; game invariants are left to
    /// [`GameInstance::validate`].
    pub fn to_instance(&self) -> Result<GameInstance> {
        let mut agents: Vec<&AgentDoc> = self.agents.iter().collect();
        agents.sort_by_key(|a| a.id);
        for (expected, agent) in agents.iter().enumerate() {
            if agent.id != expected {
                bail!("agent ids must be 0..{} without gaps or repeats", agents.len());
            }
        }
        let mut kinds = Vec::with_capacity(agents.len());
        for agent in &agents {
            kinds.push(match (agent.kind, agent.node) {
                (KindDoc::Strategic, None) => AgentKind::Strategic,
                (KindDoc::Stubborn, Some(node)) => AgentKind::Stubborn(node),
                (KindDoc::Strategic, Some(_)) => bail!("strategic agent {} has a node", agent.id),
                (KindDoc::Stubborn, None) => bail!("stubborn agent {} has no node", agent.id),
            });
        }
        let friendship = match self.mode {
            Mode::Typed => {
                if self.social_edges.is_some() {
                    bail!("typed documents carry no social_edges");
                }
                let types = agents
                    .iter()
                    .map(|a| a.ty.with_context(|| format!("agent {} has no type", a.id)))
                    .collect::<Result<Vec<_>>>()?;
                FriendshipSpec::typed(types)
            }
            Mode::Social => {
                if let Some(agent) = agents.iter().find(|a| a.ty.is_some()) {
                    bail!("social documents carry no types (agent {})", agent.id);
                }
                let edges = self.social_edges.as_deref().context("social documents need social_edges")?;
                FriendshipSpec::social(edges.iter().map(|&[a, b]| (a, b)))
            }
        };
        let weight = |field: &Option<String>, name: &str| -> Result<Rational> {
            let text = field.as_deref().with_context(|| format!("linear utility needs {name}"))?;
            text.parse::<Rational>().map_err(|e| anyhow::anyhow!("{name}: {e}"))
        };
        let utility = match self.utility.model {
            ModelDoc::Linear => UtilityModel::Linear {
                alpha: weight(&self.utility.alpha, "alpha")?,
                beta: weight(&self.utility.beta, "beta")?,
            },
            other => {
                if self.utility.alpha.is_some() || self.utility.beta.is_some() {
                    bail!("alpha and beta only apply to the linear model");
                }
                if other == ModelDoc::Fractional {
                    UtilityModel::Fractional
                } else {
                    UtilityModel::ModifiedFractional
                }
            }
        };
        let topology = Topology::new(self.topology.node_count, self.topology.edges.iter().map(|&[u, v]| (u, v)));
        Ok(GameInstance::new(topology, kinds, friendship, utility))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed instance document")
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("documents always serialize");
        let mut text = serde_json::to_string_pretty(&value).expect("values always serialize");
        text.push('\n');
        text
    }
}

pub fn write_instance(instance: &GameInstance) -> String {
    InstanceDocument::from_instance(instance).to_json()
}

pub fn read_instance(text: &str) -> Result<GameInstance> {
    InstanceDocument::parse(text)?.to_instance()
}
