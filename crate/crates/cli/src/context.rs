//! Shared plumbing: graph loading, measure construction, provenance headers.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use agp_core::graph::CSR_MAGIC;
use agp_core::{select_level_count, Exponents, Graph, Layout, Measure, NodeId, SparseSignal};

use crate::args::{GraphArgs, MeasureArgs, MeasureKind, SignalArgs};

/// A flag combination clap cannot reject on its own. Exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Loads a CSR file (with its `.map` sidecar if present) or an edge list.
pub fn load_graph(args: &GraphArgs, layout: Layout) -> Result<Graph> {
    load_graph_path(&args.graph, layout, args.self_loops)
}

pub fn load_graph_path(path: &Path, layout: Layout, self_loops: bool) -> Result<Graph> {
    if is_csr(path)? {
        let mut g = Graph::read_csr(path).with_context(|| format!("reading {}", path.display()))?;
        if g.layout() != layout {
            bail!("{} stores a {:?} graph, this command needs {:?}", path.display(), g.layout(), layout);
        }
        let map = path.with_extension("map");
        if map.exists() {
            let labels = Graph::read_mapping(&map).with_context(|| format!("reading {}", map.display()))?;
            g = g.with_labels(labels)?;
        }
        Ok(g)
    } else {
        agp_core::graph::load_edge_list(path, layout, self_loops)
            .with_context(|| format!("reading {}", path.display()))
    }
}

pub fn is_csr(path: &Path) -> Result<bool> {
    let mut head = [0u8; 8];
    let mut file = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut got = 0;
    while got < head.len() {
        match file.read(&mut head[got..])? {
            0 => break,
            k => got += k,
        }
    }
    Ok(got == head.len() && &head == CSR_MAGIC)
}

pub fn layout_for(directed: bool, kind: Option<MeasureKind>) -> Layout {
    match (directed, kind) {
        (false, _) => Layout::Undirected,
        (true, Some(MeasureKind::SingleTargetPpr)) => Layout::DirectedReverse,
        (true, _) => Layout::DirectedForward,
    }
}

pub fn build_measure(args: &MeasureArgs) -> Result<Measure> {
    let m = match args.measure {
        MeasureKind::Transition => Measure::Transition { hops: args.hops },
        MeasureKind::Pagerank => Measure::PageRank { alpha: args.alpha },
        MeasureKind::Ppr => Measure::Ppr { alpha: args.alpha },
        MeasureKind::SingleTargetPpr => Measure::SingleTargetPpr { alpha: args.alpha },
        MeasureKind::Hkpr => Measure::Hkpr { t: args.t },
        MeasureKind::Katz => {
            let Some(beta) = args.beta else { return Err(usage("--measure katz needs --beta")) };
            Measure::Katz { beta, lambda1: args.lambda1 }
        }
        MeasureKind::Custom => {
            if args.weights.is_empty() {
                return Err(usage("--measure custom needs --weights"));
            }
            Measure::Custom { weights: args.weights.clone() }
        }
    };
    m.validate()?;
    Ok(m)
}

pub fn exponents(args: &MeasureArgs, default: Exponents) -> Result<Exponents> {
    let e = Exponents::new(args.a.unwrap_or(default.a), args.b.unwrap_or(default.b));
    e.validate()?;
    Ok(e)
}

/// Explicit `--levels`, else the custom weight count, else `fallback`.
pub fn levels(args: &MeasureArgs, measure: &Measure, fallback: impl FnOnce() -> Result<usize>) -> Result<usize> {
    if let Some(l) = args.levels {
        return Ok(l);
    }
    match measure {
        Measure::Custom { weights } => Ok(weights.len() - 1),
        _ => fallback(),
    }
}

pub fn levels_for_delta(measure: &Measure, delta: f64) -> Result<usize> {
    Ok(select_level_count(measure, delta)?)
}

pub fn node(g: &Graph, label: u32) -> Result<NodeId> {
    g.node_of(label).with_context(|| format!("node {label} is not in the graph"))
}

/// The propagation input and the factor its result must be multiplied by.
pub struct Signal {
    pub x: SparseSignal,
    pub scale: f64,
}

/// `normalize` shrinks signal files with l1 norm above one to unit norm.
pub fn build_signal(g: &Graph, args: &SignalArgs, normalize: bool) -> Result<Signal> {
    if let Some(s) = args.source {
        return Ok(Signal { x: SparseSignal::one_hot(node(g, s)?), scale: 1.0 });
    }
    if args.uniform {
        return Ok(Signal { x: SparseSignal::uniform(g.n()), scale: 1.0 });
    }
    let path = args.signal.as_ref().expect("clap enforces one signal source");
    let raw = agp_core::io::read_vector_file(path).with_context(|| format!("reading {}", path.display()))?;
    let mut entries = Vec::with_capacity(raw.len());
    for (label, v) in raw {
        if !(v.is_finite() && v >= 0.0) {
            bail!("signal value {v} at node {label} must be finite and nonnegative");
        }
        let label = u32::try_from(label).with_context(|| format!("node id {label} out of range"))?;
        if v > 0.0 {
            entries.push((node(g, label)?, v));
        }
    }
    let x = SparseSignal::new(entries);
    let norm = x.l1_norm();
    if normalize && norm > 1.0 {
        let entries = x.entries().iter().map(|&(u, v)| (u, v / norm)).collect();
        return Ok(Signal { x: SparseSignal::new(entries), scale: norm });
    }
    Ok(Signal { x, scale: 1.0 })
}

/// SHA-256 over the layout, offsets, neighbour array and labels.
pub fn graph_hash(g: &Graph) -> String {
    let mut h = Sha256::new();
    h.update([match g.layout() {
        Layout::Undirected => 0u8,
        Layout::DirectedForward => 1,
        Layout::DirectedReverse => 2,
    }]);
    for &o in g.offsets() {
        h.update((o as u64).to_le_bytes());
    }
    for &v in g.neighbor_array() {
        h.update(v.to_le_bytes());
    }
    if let Some(labels) = g.labels() {
        for &l in labels {
            h.update(l.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Default, Serialize)]
pub struct RunProvenance {
    pub command: String,
    pub graph_hash: Option<String>,
    pub measure: Option<Measure>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub engine: Option<&'static str>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub levels: Option<usize>,
    pub seed: Option<u64>,
    pub push_count: Option<u64>,
    pub dropped_mass: Option<f64>,
    pub signal_scale: Option<f64>,
    pub wall_time: f64,
}

impl RunProvenance {
    pub fn start() -> (RunProvenance, Instant) {
        let command = std::env::args().collect::<Vec<_>>().join(" ");
        (RunProvenance { command, ..Default::default() }, Instant::now())
    }

    pub fn with_graph(mut self, g: &Graph) -> RunProvenance {
        self.graph_hash = Some(graph_hash(g));
        self
    }

    pub fn with_measure(mut self, m: &Measure, e: Exponents) -> RunProvenance {
        self.measure = Some(m.clone());
        self.a = Some(e.a);
        self.b = Some(e.b);
        self
    }

    /// `key: value` lines, JSON-encoded values, absent fields skipped.
    pub fn header(&self) -> Vec<String> {
        let value = serde_json::to_value(self).expect("provenance serializes");
        let serde_json::Value::Object(map) = value else { unreachable!() };
        map.into_iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => format!("{k}: {s}"),
                v => format!("{k}: {v}"),
            })
            .collect()
    }
}

/// Reads a `key: value` entry from a provenance header.
pub fn header_value<'a>(header: &'a [String], key: &str) -> Option<&'a str> {
    header.iter().find_map(|line| {
        let (k, v) = line.split_once(':')?;
        (k.trim() == key).then(|| v.trim())
    })
}
