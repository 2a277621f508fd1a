//! Seeded instance families and the shipped demo topologies.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netgraph::{Network, NetworkBuilder, NodeId};

const COUNTEREXAMPLE: &str = include_str!("../data/counterexample_3s3t.json");
const COUNTEREXAMPLE_PLUS: &str = include_str!("../data/counterexample_3s3t_plus.json");

/// Three sources, three terminals, one path per pair, no code delivering
/// the sum: two relays each see two sources and share terminal `t3`.
pub fn counterexample_3s3t() -> Network {
    Network::from_json(COUNTEREXAMPLE).expect("shipped topology parses")
}

/// The same topology with an extra `s2 -> t3` edge; a code exists.
pub fn counterexample_3s3t_plus() -> Network {
    Network::from_json(COUNTEREXAMPLE_PLUS).expect("shipped topology parses")
}

/// Shape of [`random_dag`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DagShape {
    pub sources: usize,
    pub terminals: usize,
    /// Upper bound on the total node count.
    pub max_nodes: usize,
    /// Routes laid per source/terminal pair; each uses fresh edges, so the
    /// pair has at least this many edge-disjoint paths.
    pub routes: usize,
    /// Extra random forward edges among internal nodes.
    pub extra_edges: usize,
    /// Probability that an extra edge gets capacity 2.
    pub wide_edges: f64,
}

impl DagShape {
    pub fn new(sources: usize, terminals: usize) -> Self {
        DagShape { sources, terminals, max_nodes: 40, routes: 1, extra_edges: 8, wide_edges: 0.0 }
    }
}

/// Random DAG: every pair gets `routes` routes through increasing internal
/// nodes, plus extra forward edges. Sources have no in-edges and terminals
/// no out-edges.
pub fn random_dag(shape: DagShape, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixed = shape.sources + shape.terminals;
    let room = shape.max_nodes.saturating_sub(fixed).max(1);
    let internal = rng.gen_range(1..=room);
    let mut b = NetworkBuilder::new();
    let sources: Vec<NodeId> = (1..=shape.sources).map(|i| b.source(i)).collect();
    let mids: Vec<NodeId> = (0..internal).map(|_| b.fresh()).collect();
    let terminals: Vec<NodeId> = (1..=shape.terminals).map(|j| b.terminal(j)).collect();
    for &s in &sources {
        for &t in &terminals {
            for _ in 0..shape.routes {
                let hops = rng.gen_range(0..=internal.min(3));
                let mut via: Vec<usize> = (0..internal).collect::<Vec<_>>().choose_multiple(&mut rng, hops).copied().collect();
                via.sort_unstable();
                let mut cur = s;
                for k in via {
                    b.edge(cur, mids[k]);
                    cur = mids[k];
                }
                b.edge(cur, t);
            }
        }
    }
    for _ in 0..shape.extra_edges {
        if internal < 2 {
            break;
        }
        let u = rng.gen_range(0..internal - 1);
        let v = rng.gen_range(u + 1..internal);
        let cap = if rng.gen_bool(shape.wide_edges) { 2 } else { 1 };
        b.edge_with_capacity(mids[u], mids[v], cap);
    }
    b.build().expect("forward edges form a DAG")
}

/// Sub-network in which the listed sources merge into one spine that then
/// splits towards the listed terminals; internal degrees stay at most 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Zero-based source indices.
    pub sources: Vec<usize>,
    /// Zero-based terminal indices.
    pub terminals: Vec<usize>,
}

impl Block {
    pub fn new(sources: &[usize], terminals: &[usize]) -> Self {
        Block { sources: sources.to_vec(), terminals: terminals.to_vec() }
    }
}

/// Builds a three-source, three-terminal network from disjoint blocks.
/// `subdivide[k]` pads every edge of block `k` with that many relay nodes.
pub fn from_blocks(blocks: &[Block], subdivide: &[usize]) -> Network {
    let mut b = NetworkBuilder::new();
    let s: Vec<NodeId> = (1..=3).map(|i| b.source(i)).collect();
    let t: Vec<NodeId> = (1..=3).map(|j| b.terminal(j)).collect();
    for (k, block) in blocks.iter().enumerate() {
        let pad = subdivide.get(k).copied().unwrap_or(0);
        let link = |b: &mut NetworkBuilder, u: NodeId, v: NodeId| {
            b.chain(u, v, pad);
        };
        if block.sources.len() == 1 && block.terminals.len() == 1 {
            link(&mut b, s[block.sources[0]], t[block.terminals[0]]);
            continue;
        }
        let mut spine = s[block.sources[0]];
        for &i in &block.sources[1..] {
            let m = b.fresh();
            link(&mut b, spine, m);
            link(&mut b, s[i], m);
            spine = m;
        }
        let (last, init) = block.terminals.split_last().expect("block has a terminal");
        for &j in init {
            let y = b.fresh();
            link(&mut b, spine, y);
            link(&mut b, y, t[j]);
            spine = y;
        }
        link(&mut b, spine, t[*last]);
    }
    b.build().expect("blocks form a DAG")
}

/// Recipes for structured three-source, three-terminal instances. Each
/// yields two vertex-disjoint paths per pair; the recipe names the branch it
/// is designed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Case0,
    Case1,
    Case2,
    NoColors,
    OneColor,
    ThreeColors033,
    ThreeColors222(usize),
    ThreeColors123,
    ManyColors,
    TwoSameTerminals,
    TwoSameSources,
    TwoColorsGreedy,
    TwoColorsRandom,
}

impl Family {
    pub const ALL: [Family; 15] = [
        Family::Case0,
        Family::Case1,
        Family::Case2,
        Family::NoColors,
        Family::OneColor,
        Family::ThreeColors033,
        Family::ThreeColors222(1),
        Family::ThreeColors222(2),
        Family::ThreeColors222(3),
        Family::ThreeColors123,
        Family::ManyColors,
        Family::TwoSameTerminals,
        Family::TwoSameSources,
        Family::TwoColorsGreedy,
        Family::TwoColorsRandom,
    ];

    fn colors(self) -> Vec<Block> {
        let c = |s: [usize; 2], t: [usize; 2]| Block::new(&s, &t);
        match self {
            Family::Case0 => vec![Block::new(&[0, 1, 2], &[0, 1, 2])],
            Family::Case1 => vec![Block::new(&[1, 2], &[0, 1, 2])],
            Family::Case2 => vec![Block::new(&[0, 1, 2], &[0, 1])],
            Family::NoColors => vec![],
            Family::OneColor => vec![c([0, 1], [0, 1])],
            Family::ThreeColors033 => vec![c([0, 1], [0, 1]), c([1, 2], [0, 1]), c([0, 2], [0, 1])],
            Family::ThreeColors222(1) => vec![c([0, 1], [0, 1]), c([0, 1], [1, 2]), c([0, 1], [0, 2])],
            Family::ThreeColors222(2) => vec![c([0, 1], [0, 1]), c([0, 1], [1, 2]), c([1, 2], [0, 2])],
            Family::ThreeColors222(_) => vec![c([0, 1], [0, 1]), c([1, 2], [1, 2]), c([0, 2], [0, 2])],
            Family::ThreeColors123 => vec![c([0, 1], [0, 1]), c([1, 2], [0, 1]), c([1, 2], [0, 2])],
            Family::ManyColors => vec![c([0, 1], [0, 1]), c([1, 2], [0, 1]), c([0, 2], [0, 2]), c([0, 1], [1, 2])],
            Family::TwoSameTerminals => vec![c([0, 1], [0, 1]), c([1, 2], [0, 1])],
            Family::TwoSameSources => vec![c([0, 1], [0, 1]), c([0, 1], [1, 2])],
            Family::TwoColorsGreedy | Family::TwoColorsRandom => vec![c([0, 1], [0, 1]), c([1, 2], [1, 2])],
        }
    }
}

/// The two-color fixture with no singleton leaves between the private
/// sources and the shared terminal, so only a random code works.
pub fn two_color_random_fixture() -> Network {
    let c = |s: [usize; 2], t: [usize; 2]| Block::new(&s, &t);
    let blocks = [
        c([0, 1], [0, 1]),
        c([0, 1], [0, 1]),
        c([1, 2], [1, 2]),
        c([1, 2], [1, 2]),
        Block::new(&[0], &[2]),
        Block::new(&[0], &[2]),
        Block::new(&[2], &[0]),
        Block::new(&[2], &[0]),
    ];
    from_blocks(&blocks, &[])
}

fn permute(blocks: &mut [Block], sp: &[usize], tp: &[usize]) {
    for b in blocks {
        for s in &mut b.sources {
            *s = sp[*s];
        }
        for t in &mut b.terminals {
            *t = tp[*t];
        }
    }
}

/// A structured instance of `family`: its core blocks, filler blocks that
/// top every pair up to two disjoint paths, random relays and a random
/// relabeling of sources and terminals.
pub fn structured_3s3t(family: Family, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = family.colors();
    if family == Family::TwoColorsRandom {
        let mut count = [[0usize; 3]; 3];
        for b in &blocks {
            for &i in &b.sources {
                for &j in &b.terminals {
                    count[i][j] += 1;
                }
            }
        }
        blocks.extend(blocks.clone());
        for i in 0..3 {
            for j in 0..3 {
                for _ in count[i][j] * 2..2 {
                    blocks.push(Block::new(&[i], &[j]));
                }
            }
        }
    } else {
        // Filler from singletons; a source fans out to a random terminal set.
        let mut count = [[0usize; 3]; 3];
        for b in &blocks {
            for &i in &b.sources {
                for &j in &b.terminals {
                    count[i][j] += 1;
                }
            }
        }
        for i in 0..3 {
            while count[i].iter().any(|&c| c < 2) {
                let mut ts: Vec<usize> = (0..3).filter(|&j| count[i][j] < 2 || rng.gen_bool(0.3)).collect();
                ts.shuffle(&mut rng);
                for &j in &ts {
                    count[i][j] += 1;
                }
                blocks.push(Block::new(&[i], &ts));
            }
        }
    }
    let mut sp = vec![0, 1, 2];
    let mut tp = vec![0, 1, 2];
    sp.shuffle(&mut rng);
    tp.shuffle(&mut rng);
    permute(&mut blocks, &sp, &tp);
    blocks.shuffle(&mut rng);
    let pads: Vec<usize> = blocks.iter().map(|_| if rng.gen_bool(0.3) { rng.gen_range(1..=2) } else { 0 }).collect();
    from_blocks(&blocks, &pads)
}
