//! Building-level and dataset-level statistics over records.

use crate::geom::ROOM_LABELS;
use crate::records::{Adjacency, BuildingRecord};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Lower bucket edges of the distinct-buildings-per-exterior histogram; a
/// final edge closes the last bucket and larger values go to an overflow
/// bucket.
pub const DEFAULT_BUCKET_EDGES: [u64; 7] = [1, 5, 10, 100, 1000, 10_000, 17_161];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub floors: usize,
}

pub fn edge_count(adj: &Adjacency) -> usize {
    adj.iter().flatten().map(|&v| v as usize).sum::<usize>() / 2
}

pub fn graph_stats(r: &BuildingRecord) -> GraphStats {
    GraphStats { nodes: r.final_building_points.len(), edges: edge_count(&r.final_building_adj), floors: r.floorplan_id_list.len() }
}

/// Opening outlines in a stream, as the cycle rank `E - V + C` of its
/// graph. Each opening is a closed loop, so this holds whatever the loops'
/// orientation and when two of them share corners.
pub fn opening_count(adj: &Adjacency) -> usize {
    let n = adj.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for (i, row) in adj.iter().enumerate() {
        for (j, _) in row.iter().enumerate().skip(i + 1).filter(|(_, &v)| v != 0) {
            let (a, b) = (root(&mut parent, i), root(&mut parent, j));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
    }
    (edge_count(adj) + components).saturating_sub(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<u64>,
    /// `counts[k]` covers `[edges[k], edges[k + 1])`; the last entry counts
    /// values at or above the final edge.
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(edges: &[u64]) -> Self {
        Self { edges: edges.to_vec(), counts: vec![0; edges.len()] }
    }

    pub fn add(&mut self, value: u64) {
        if let Some(k) = self.edges.windows(2).position(|w| value >= w[0] && value < w[1]) {
            self.counts[k] += 1;
        } else if self.edges.last().is_some_and(|&e| value >= e) {
            *self.counts.last_mut().expect("nonempty") += 1;
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.edges.windows(2).map(|w| format!("{}-{}", w[0], w[1] - 1)).collect();
        if let Some(e) = self.edges.last() {
            out.push(format!(">={e}"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub buildings: usize,
    pub per_building: Vec<GraphStats>,
    /// Room count per room type ID.
    pub room_counts: BTreeMap<u8, u64>,
    /// Share of all rooms per room type ID.
    pub room_shares: BTreeMap<u8, f64>,
    pub rooms: u64,
    pub doors: u64,
    pub windows: u64,
    /// Rooms plus door and window segments.
    pub labeled_elements: u64,
    /// Buildings per exterior key.
    pub per_exterior: BTreeMap<String, u64>,
    pub histogram: Histogram,
    pub node_min: usize,
    pub node_max: usize,
    pub node_median: f64,
    pub node_std: f64,
}

fn median(sorted: &[usize]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) as f64,
    }
}

/// Summary over `(exterior key, record)` pairs; the key groups buildings
/// generated from one exterior.
pub fn dataset_summary<'a>(records: impl IntoIterator<Item = (&'a str, &'a BuildingRecord)>, bucket_edges: &[u64]) -> DatasetSummary {
    let mut per_building = Vec::new();
    let mut room_counts: BTreeMap<u8, u64> = ROOM_LABELS.iter().map(|l| (l.id(), 0)).collect();
    let (mut doors, mut windows) = (0u64, 0u64);
    let mut per_exterior: BTreeMap<String, u64> = BTreeMap::new();
    for (key, r) in records {
        per_building.push(graph_stats(r));
        for (id, loops) in &r.final_room_type_dict {
            if let Ok(id) = id.parse::<u8>() {
                *room_counts.entry(id).or_default() += loops.len() as u64;
            }
        }
        doors += opening_count(&r.final_door_adj) as u64;
        windows += opening_count(&r.final_window_adj) as u64;
        *per_exterior.entry(key.to_string()).or_default() += 1;
    }
    let rooms: u64 = room_counts.values().sum();
    let room_shares = room_counts.iter().map(|(&k, &c)| (k, if rooms == 0 { 0.0 } else { c as f64 / rooms as f64 })).collect();
    let mut histogram = Histogram::new(bucket_edges);
    for &n in per_exterior.values() {
        histogram.add(n);
    }
    let mut nodes: Vec<usize> = per_building.iter().map(|g| g.nodes).collect();
    nodes.sort_unstable();
    let mean = if nodes.is_empty() { 0.0 } else { nodes.iter().sum::<usize>() as f64 / nodes.len() as f64 };
    let var = if nodes.len() < 2 { 0.0 } else { nodes.iter().map(|&n| (n as f64 - mean).powi(2)).sum::<f64>() / (nodes.len() - 1) as f64 };
    DatasetSummary {
        buildings: per_building.len(),
        room_counts,
        room_shares,
        rooms,
        doors,
        windows,
        labeled_elements: rooms + doors + windows,
        per_exterior,
        histogram,
        node_min: nodes.first().copied().unwrap_or(0),
        node_max: nodes.last().copied().unwrap_or(0),
        node_median: median(&nodes),
        node_std: var.sqrt(),
        per_building,
    }
}

impl DatasetSummary {
    /// One CSV row per building: `index,nodes,edges,floors`.
    pub fn buildings_csv(&self) -> String {
        let mut s = String::from("index,nodes,edges,floors\n");
        for (i, g) in self.per_building.iter().enumerate() {
            s.push_str(&format!("{i},{},{},{}\n", g.nodes, g.edges, g.floors));
        }
        s
    }
}
