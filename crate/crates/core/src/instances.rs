//! Auction instances: the star/line lower-bound family, random instances, and
//! the JSON file format.
//!
//! ```json
//! {"m": 5, "players": [
//!   {"name": "p1", "kind": "vertex_cover", "edges": [[1,5],[2,5],[3,5],[4,5]]},
//!   {"name": "p2", "kind": "additive", "weights": [1,0,2,0,1]}
//! ]}
//! ```
//!
//! Items are 1-indexed. Player order is the preference order of the
//! lowest-index tie rule.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::valuations::{AdditiveValuation, Graph, PlayerValuation, Valuation, VertexCoverValuation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Player {
    pub name: String,
    pub valuation: PlayerValuation,
}

impl Player {
    pub fn new(name: impl Into<String>, valuation: impl Into<PlayerValuation>) -> Self {
        Player {
            name: name.into(),
            valuation: valuation.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    m: usize,
    players: Vec<Player>,
}

impl Instance {
    pub fn new(m: usize, players: Vec<Player>) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("an instance needs at least one item"));
        }
        if players.is_empty() {
            return Err(Error::input("an instance needs at least one player"));
        }
        for p in &players {
            let pm = p.valuation.item_count();
            if pm != m {
                return Err(Error::input(format!(
                    "player {:?} is defined over {pm} items, instance has {m}",
                    p.name
                )));
            }
        }
        Ok(Instance { m, players })
    }

    /// Vertex cover players only, named `p1`, `p2`, ...
    pub fn from_graphs(m: usize, graphs: impl IntoIterator<Item = Graph>) -> Result<Self> {
        let players = graphs
            .into_iter()
            .enumerate()
            .map(|(i, g)| Player::new(format!("p{}", i + 1), VertexCoverValuation::new(g)))
            .collect();
        Instance::new(m, players)
    }

    pub fn item_count(&self) -> usize {
        self.m
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn valuation(&self, player: usize) -> &PlayerValuation {
        &self.players[player].valuation
    }

    pub fn is_vertex_cover(&self) -> bool {
        self.players
            .iter()
            .all(|p| matches!(p.valuation, PlayerValuation::VertexCover(_)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.try_into()
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON encoding.
    pub fn content_hash(&self) -> String {
        let compact = serde_json::to_vec(&InstanceFile::from(self)).expect("instance serializes");
        let digest = Sha256::digest(&compact);
        hex::encode(&digest[..8])
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    Instance::from_json(&fs::read_to_string(path)?)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = instance.to_json();
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    m: usize,
    players: Vec<PlayerFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PlayerFile {
    VertexCover {
        #[serde(default)]
        name: Option<String>,
        edges: Vec<[usize; 2]>,
    },
    Additive {
        #[serde(default)]
        name: Option<String>,
        weights: Vec<u64>,
    },
}

impl From<&Instance> for InstanceFile {
    fn from(instance: &Instance) -> Self {
        let players = instance
            .players
            .iter()
            .map(|p| match &p.valuation {
                PlayerValuation::VertexCover(v) => PlayerFile::VertexCover {
                    name: Some(p.name.clone()),
                    edges: v.graph().edges().iter().map(|&(a, b)| [a, b]).collect(),
                },
                PlayerValuation::Additive(v) => PlayerFile::Additive {
                    name: Some(p.name.clone()),
                    weights: v.weights().to_vec(),
                },
            })
            .collect();
        InstanceFile {
            m: instance.m,
            players,
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let m = file.m;
        let players = file
            .players
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let default_name = || format!("p{}", i + 1);
                match p {
                    PlayerFile::VertexCover { name, edges } => {
                        let name = name.unwrap_or_else(default_name);
                        let graph = Graph::new(m, edges.into_iter().map(|[a, b]| (a, b)))
                            .map_err(|e| Error::input(format!("player {name:?}: {e}")))?;
                        Ok(Player::new(name, VertexCoverValuation::new(graph)))
                    }
                    PlayerFile::Additive { name, weights } => {
                        let name = name.unwrap_or_else(default_name);
                        if weights.len() != m {
                            return Err(Error::input(format!(
                                "player {name:?}: {} weights for {m} items",
                                weights.len()
                            )));
                        }
                        Ok(Player::new(name, AdditiveValuation::new(weights)))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(m, players)
    }
}

/// Three players over `m` items (odd, at least 5): a star centred on `m`,
/// the matching `(1,2), (3,4), ..., (m-2,m-1)`, and the matching
/// `(2,3), (4,5), ..., (m-3,m-2)`.
pub fn paper_lower_bound_instance(m: usize) -> Result<Instance> {
    if m < 5 || m % 2 == 0 {
        return Err(Error::input(format!(
            "the lower-bound family needs an odd m >= 5, got {m}"
        )));
    }
    let star = Graph::new(m, (1..m).map(|j| (j, m)))?;
    let odd_pairs = Graph::new(m, (1..m - 1).step_by(2).map(|j| (j, j + 1)))?;
    let even_pairs = Graph::new(m, (2..m - 2).step_by(2).map(|j| (j, j + 1)))?;
    Instance::from_graphs(m, [star, odd_pairs, even_pairs])
}

/// `n` independent Erdős–Rényi graphs `G(m, p)`. Pairs are drawn in the
/// order player, then `a`, then `b > a` from a ChaCha8 stream seeded with
/// `seed`.
pub fn random_instance(n: usize, m: usize, edge_prob: f64, seed: u64) -> Result<Instance> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::input(format!(
            "edge probability must lie in [0, 1], got {edge_prob}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs = (0..n)
        .map(|_| {
            let mut edges = Vec::new();
            for a in 1..=m {
                for b in a + 1..=m {
                    if rng.gen_bool(edge_prob) {
                        edges.push((a, b));
                    }
                }
            }
            Graph::new(m, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::from_graphs(m, graphs)
}
