//! Immutable CSR graph with degree-sorted push lists.
//!
//! Every node `u` owns a *push list*: the nodes that receive residue when `u`
//! is processed. For undirected graphs this is the neighbour set. For directed
//! graphs it is the out-neighbour set ([`Layout::DirectedForward`], used by
//! source-style measures on `A^T`) or the in-neighbour set
//! ([`Layout::DirectedReverse`], used by single-target PPR on `A`). In both
//! directed layouts `degree(u)` is the out-degree.
//!
//! Each push list is sorted ascending by the degree of its entries, and split
//! into runs whose degrees fall in `[2^k, 2^(k+1))`. Group `k = 0` also holds
//! degree-0 entries, which only occur in directed graphs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use crate::error::{AgpError, Result};

pub type NodeId = u32;

pub const CSR_MAGIC: &[u8; 8] = b"AGPCSR1\0";
const FLAG_DIRECTED: u64 = 1;
const FLAG_REVERSE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    Undirected,
    /// Push lists hold out-neighbours.
    DirectedForward,
    /// Push lists hold in-neighbours.
    DirectedReverse,
}

impl Layout {
    pub fn is_directed(self) -> bool {
        !matches!(self, Layout::Undirected)
    }
}

/// A run of a push list whose entry degrees lie in `[2^k, 2^(k+1))`.
///
/// `start..end` index into the global neighbour array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeGroup {
    pub k: u32,
    pub start: usize,
    pub end: usize,
}

impl DegreeGroup {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Work counters collected while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Elementary steps over edges, nodes and counting-sort buckets.
    pub touches: usize,
}

#[derive(Debug, Clone)]
pub struct Graph {
    layout: Layout,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    degrees: Vec<u32>,
    group_offsets: Vec<usize>,
    groups: Vec<DegreeGroup>,
    /// Original id of each dense node, present only when ids were remapped.
    labels: Option<Vec<u32>>,
}

/// Degree class of `d`: `floor(log2 d)`, with degree 0 folded into class 0.
#[inline]
pub fn degree_class(d: u32) -> u32 {
    31 - d.max(1).leading_zeros()
}

impl Graph {
    /// Builds a graph over dense ids `0..n` from an edge list.
    pub fn from_edges(
        n: usize,
        edges: &[(NodeId, NodeId)],
        layout: Layout,
        add_self_loops: bool,
    ) -> Result<Graph> {
        Self::from_edges_with_stats(n, edges, layout, add_self_loops).map(|(g, _)| g)
    }

    /// Counting-sort construction: every `(owner, target)` entry is keyed by
    /// the target's degree, bucket-sorted, then scattered into its owner's
    /// slice. The scatter is stable, so each slice ends up degree-sorted.
    pub fn from_edges_with_stats(
        n: usize,
        edges: &[(NodeId, NodeId)],
        layout: Layout,
        add_self_loops: bool,
    ) -> Result<(Graph, BuildStats)> {
        if n > u32::MAX as usize {
            return Err(AgpError::Capacity(format!("{n} nodes exceed the u32 id space")));
        }
        let mut touches = 0usize;
        let loops = if add_self_loops { n } else { 0 };
        let mut entries: Vec<(NodeId, NodeId)> = Vec::with_capacity(2 * edges.len() + loops);
        let mut degrees = vec![0u64; n];
        let self_loops = (0..n as NodeId).filter(|_| add_self_loops).map(|u| (u, u));
        for (u, v) in edges.iter().copied().chain(self_loops) {
            touches += 1;
            if u as usize >= n || v as usize >= n {
                return Err(AgpError::Capacity(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            match layout {
                Layout::Undirected => {
                    entries.push((u, v));
                    degrees[u as usize] += 1;
                    if u != v {
                        entries.push((v, u));
                        degrees[v as usize] += 1;
                    }
                }
                Layout::DirectedForward => {
                    entries.push((u, v));
                    degrees[u as usize] += 1;
                }
                Layout::DirectedReverse => {
                    entries.push((v, u));
                    degrees[u as usize] += 1;
                }
            }
        }
        let max_degree = degrees.iter().copied().max().unwrap_or(0);
        if max_degree > u32::MAX as u64 {
            return Err(AgpError::Capacity(format!("degree {max_degree} exceeds u32")));
        }
        let degrees: Vec<u32> = degrees.into_iter().map(|d| d as u32).collect();
        touches += n;

        // Counting sort of entries by the degree of their target.
        let mut bucket = vec![0usize; max_degree as usize + 2];
        for &(_, v) in &entries {
            bucket[degrees[v as usize] as usize + 1] += 1;
            touches += 1;
        }
        for key in 1..bucket.len() {
            bucket[key] += bucket[key - 1];
            touches += 1;
        }
        let mut by_degree = vec![(0, 0); entries.len()];
        for &(u, v) in &entries {
            let slot = &mut bucket[degrees[v as usize] as usize];
            by_degree[*slot] = (u, v);
            *slot += 1;
            touches += 1;
        }
        drop(entries);

        // Stable scatter into per-owner slices.
        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &by_degree {
            offsets[u as usize + 1] += 1;
            touches += 1;
        }
        for u in 0..n {
            offsets[u + 1] += offsets[u];
            touches += 1;
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0 as NodeId; by_degree.len()];
        for &(u, v) in &by_degree {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            touches += 1;
        }

        let (group_offsets, groups) = build_groups(&offsets, &neighbors, &degrees);
        touches += neighbors.len() + n;

        let graph = Graph {
            layout,
            offsets,
            neighbors,
            degrees,
            group_offsets,
            groups,
            labels: None,
        };
        Ok((graph, BuildStats { touches }))
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn is_directed(&self) -> bool {
        self.layout.is_directed()
    }

    /// Node count.
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Stored adjacency entries (both orientations for undirected edges).
    pub fn m(&self) -> usize {
        self.neighbors.len()
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> u32 {
        self.degrees[u as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// The flattened neighbour array; index with [`Graph::push_range`].
    pub fn neighbor_array(&self) -> &[NodeId] {
        &self.neighbors
    }

    #[inline]
    pub fn push_range(&self, u: NodeId) -> Range<usize> {
        self.offsets[u as usize]..self.offsets[u as usize + 1]
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[self.push_range(u)]
    }

    #[inline]
    pub fn groups(&self, u: NodeId) -> &[DegreeGroup] {
        &self.groups[self.group_offsets[u as usize]..self.group_offsets[u as usize + 1]]
    }

    /// Maximal prefix of `u`'s push list whose degrees are all `<= degree_cap`.
    ///
    /// Returned as an absolute range into [`Graph::neighbor_array`].
    pub fn neighbor_prefix_below(&self, u: NodeId, degree_cap: f64) -> Range<usize> {
        let range = self.push_range(u);
        let slice = &self.neighbors[range.clone()];
        let len = slice.partition_point(|&v| (self.degrees[v as usize] as f64) <= degree_cap);
        range.start..range.start + len
    }

    /// Original id of dense node `u`.
    pub fn label(&self, u: NodeId) -> u32 {
        match &self.labels {
            Some(labels) => labels[u as usize],
            None => u,
        }
    }

    /// Dense node carrying original id `label`.
    pub fn node_of(&self, label: u32) -> Option<NodeId> {
        match &self.labels {
            Some(labels) => labels.binary_search(&label).ok().map(|i| i as NodeId),
            None => ((label as usize) < self.n()).then_some(label),
        }
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Attaches original ids. `labels` must be strictly increasing and of length `n`.
    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Graph> {
        if labels.len() != self.n() {
            return Err(AgpError::Shape(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n()
            )));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AgpError::Format("labels must be strictly increasing".into()));
        }
        let identity = labels.iter().enumerate().all(|(i, &l)| i as u32 == l);
        self.labels = (!identity).then_some(labels);
        Ok(self)
    }

    pub fn write_csr(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        let mut flags = 0;
        if self.is_directed() {
            flags |= FLAG_DIRECTED;
        }
        if self.layout == Layout::DirectedReverse {
            flags |= FLAG_REVERSE;
        }
        out.write_all(CSR_MAGIC)?;
        for word in [self.n() as u64, self.m() as u64, flags] {
            out.write_all(&word.to_le_bytes())?;
        }
        for &o in &self.offsets {
            out.write_all(&(o as u64).to_le_bytes())?;
        }
        for &v in &self.neighbors {
            out.write_all(&v.to_le_bytes())?;
        }
        for &d in &self.degrees {
            out.write_all(&d.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a binary CSR cache, validating every structural invariant.
    pub fn read_csr(path: impl AsRef<Path>) -> Result<Graph> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = ByteCursor { bytes: &bytes, pos: 0 };
        if cur.take(8)? != CSR_MAGIC {
            return Err(AgpError::Format("missing AGPCSR1 magic".into()));
        }
        let n = cur.u64()? as usize;
        let m = cur.u64()? as usize;
        let flags = cur.u64()?;
        let layout = match (flags & FLAG_DIRECTED != 0, flags & FLAG_REVERSE != 0) {
            (false, false) => Layout::Undirected,
            (true, false) => Layout::DirectedForward,
            (true, true) => Layout::DirectedReverse,
            (false, true) => return Err(AgpError::Format("reverse flag on undirected graph".into())),
        };
        if n > u32::MAX as usize {
            return Err(AgpError::Capacity(format!("{n} nodes exceed the u32 id space")));
        }
        let expected = 8 * (n as u128 + 1) + 4 * m as u128 + 4 * n as u128;
        if (bytes.len() - cur.pos) as u128 != expected {
            return Err(AgpError::Format(format!(
                "payload is {} bytes, expected {expected}",
                bytes.len() - cur.pos
            )));
        }
        let offsets = (0..=n).map(|_| cur.u64().map(|o| o as usize)).collect::<Result<Vec<_>>>()?;
        let neighbors = (0..m).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
        let degrees = (0..n).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;

        if offsets[0] != 0 || offsets[n] != m || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(AgpError::Format("offsets are not a valid CSR index".into()));
        }
        if neighbors.iter().any(|&v| v as usize >= n) {
            return Err(AgpError::Format("neighbour id out of range".into()));
        }
        let mut recount = vec![0u32; n];
        for u in 0..n {
            let slice = &neighbors[offsets[u]..offsets[u + 1]];
            match layout {
                Layout::Undirected | Layout::DirectedForward => recount[u] = slice.len() as u32,
                Layout::DirectedReverse => slice.iter().for_each(|&v| recount[v as usize] += 1),
            }
            if slice
                .windows(2)
                .any(|w| degrees[w[0] as usize] > degrees[w[1] as usize])
            {
                return Err(AgpError::Format(format!("push list of node {u} is not degree-sorted")));
            }
        }
        if recount != degrees {
            return Err(AgpError::Format("stored degrees disagree with adjacency".into()));
        }
        let (group_offsets, groups) = build_groups(&offsets, &neighbors, &degrees);
        Ok(Graph {
            layout,
            offsets,
            neighbors,
            degrees,
            group_offsets,
            groups,
            labels: None,
        })
    }

    /// Writes `dense original` lines, one per node.
    pub fn write_mapping(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for u in 0..self.n() as NodeId {
            writeln!(out, "{u} {}", self.label(u))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_mapping(path: impl AsRef<Path>) -> Result<Vec<u32>> {
        let reader = BufReader::new(File::open(path)?);
        let mut labels = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut parts = line.split_whitespace();
            let parsed = match (parts.next(), parts.next(), parts.next()) {
                (Some(d), Some(o), None) => d.parse::<usize>().ok().zip(o.parse::<u32>().ok()),
                _ => None,
            };
            match parsed {
                Some((dense, original)) if dense == labels.len() => labels.push(original),
                _ => {
                    return Err(AgpError::Parse {
                        line: i + 1,
                        message: format!("bad mapping entry {line:?}"),
                    })
                }
            }
        }
        Ok(labels)
    }
}

fn build_groups(
    offsets: &[usize],
    neighbors: &[NodeId],
    degrees: &[u32],
) -> (Vec<usize>, Vec<DegreeGroup>) {
    let n = offsets.len() - 1;
    let mut group_offsets = Vec::with_capacity(n + 1);
    let mut groups = Vec::new();
    group_offsets.push(0);
    for u in 0..n {
        let (lo, hi) = (offsets[u], offsets[u + 1]);
        let mut start = lo;
        while start < hi {
            let k = degree_class(degrees[neighbors[start] as usize]);
            let mut end = start + 1;
            while end < hi && degree_class(degrees[neighbors[end] as usize]) == k {
                end += 1;
            }
            groups.push(DegreeGroup { k, start, end });
            start = end;
        }
        group_offsets.push(groups.len());
    }
    (group_offsets, groups)
}

struct ByteCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteCursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(AgpError::Format("unexpected end of file".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

/// Parses a whitespace-separated edge list. Ids are remapped to dense
/// `0..n` in ascending order of original id; the graph keeps the mapping.
pub fn load_edge_list(path: impl AsRef<Path>, layout: Layout, add_self_loops: bool) -> Result<Graph> {
    let reader = BufReader::new(File::open(path)?);
    parse_edge_list(reader, layout, add_self_loops)
}

pub fn parse_edge_list(reader: impl BufRead, layout: Layout, add_self_loops: bool) -> Result<Graph> {
    let mut raw: Vec<(u32, u32)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(AgpError::Parse {
                line: i + 1,
                message: format!("expected two node ids, got {trimmed:?}"),
            });
        };
        raw.push((parse_id(a, i + 1)?, parse_id(b, i + 1)?));
    }
    if raw.is_empty() {
        return Err(AgpError::EmptyGraph);
    }

    let mut ids: Vec<u32> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let n = ids.len();
    let dense = |id: u32| ids.binary_search(&id).expect("id collected above") as NodeId;
    let identity = *ids.last().expect("nonempty") as usize == n - 1;
    let edges: Vec<(NodeId, NodeId)> = if identity {
        raw
    } else {
        raw.iter().map(|&(a, b)| (dense(a), dense(b))).collect()
    };
    Graph::from_edges(n, &edges, layout, add_self_loops)?.with_labels(ids)
}

fn parse_id(token: &str, line: usize) -> Result<u32> {
    let value: u64 = token.parse().map_err(|_| AgpError::Parse {
        line,
        message: format!("{token:?} is not a nonnegative integer"),
    })?;
    u32::try_from(value)
        .map_err(|_| AgpError::Capacity(format!("node id {value} at line {line} is >= 2^32")))
}
