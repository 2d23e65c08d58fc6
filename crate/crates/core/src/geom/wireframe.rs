use super::{face_normal, GeomError, Point3, EPS_MERGE, EPS_PLANE};
use std::collections::{BTreeSet, HashMap};

/// Deduplicating point store: inserting a point within `eps` of an existing
/// one returns the existing index. A lattice pool also rounds coordinates
/// onto the storage lattice before lookup.
#[derive(Debug, Clone)]
pub struct NodePool {
    eps: f64,
    lattice: bool,
    points: Vec<Point3>,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl Default for NodePool {
    fn default() -> Self {
        Self::new(EPS_MERGE)
    }
}

impl NodePool {
    pub fn new(eps: f64) -> Self {
        Self { eps, lattice: false, points: Vec::new(), cells: HashMap::new() }
    }

    /// Pool whose stored points lie on the 1 µm storage lattice.
    pub fn on_lattice(eps: f64) -> Self {
        Self { lattice: true, ..Self::new(eps) }
    }

    fn prepare(&self, p: Point3) -> Point3 {
        if self.lattice {
            p.quantized()
        } else {
            p
        }
    }

    fn cell(&self, p: Point3) -> (i64, i64, i64) {
        (
            (p.x / self.eps).floor() as i64,
            (p.y / self.eps).floor() as i64,
            (p.z / self.eps).floor() as i64,
        )
    }

    /// Index of the closest existing point within `eps`, if any.
    pub fn find(&self, p: Point3) -> Option<usize> {
        let q = self.prepare(p);
        let (cx, cy, cz) = self.cell(q);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &i in ids {
                            let d = self.points[i].dist(q);
                            if d <= self.eps && best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }

    pub fn insert(&mut self, p: Point3) -> usize {
        if let Some(i) = self.find(p) {
            return i;
        }
        let q = self.prepare(p);
        let i = self.points.len();
        self.points.push(q);
        let c = self.cell(q);
        self.cells.entry(c).or_default().push(i);
        i
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }
}

/// 3D points with symmetric, loop-free connectivity and optional planar faces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WireframeGraph {
    points: Vec<Point3>,
    edges: BTreeSet<(usize, usize)>,
    faces: Option<Vec<Vec<usize>>>,
}

fn norm_edge(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl WireframeGraph {
    pub fn new(
        points: Vec<Point3>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        faces: Option<Vec<Vec<usize>>>,
    ) -> Result<Self, GeomError> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let n = points.len();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for i in [a, b] {
                if i >= n {
                    return Err(GeomError::IndexOutOfRange { index: i, len: n });
                }
            }
            if a == b {
                return Err(GeomError::AdjacencySelfLoop(a));
            }
            set.insert(norm_edge(a, b));
        }
        if let Some(fs) = &faces {
            for f in fs {
                if let Some(&i) = f.iter().find(|&&i| i >= n) {
                    return Err(GeomError::IndexOutOfRange { index: i, len: n });
                }
            }
        }
        Ok(Self { points, edges: set, faces })
    }

    /// Reads a dense 0/1 adjacency matrix, checking shape, symmetry and diagonal.
    pub fn from_adjacency(points: Vec<Point3>, adj: &[Vec<u8>]) -> Result<Self, GeomError> {
        let n = points.len();
        check_adjacency(adj, n)?;
        let mut edges = Vec::new();
        for (i, row) in adj.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if v == 1 {
                    edges.push((i, j));
                }
            }
        }
        Self::new(points, edges, None)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn faces(&self) -> Option<&[Vec<usize>]> {
        self.faces.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&norm_edge(a, b))
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.points.len();
        let mut m = vec![vec![0u8; n]; n];
        for &(a, b) in &self.edges {
            m[a][b] = 1;
            m[b][a] = 1;
        }
        m
    }

    /// First pair of distinct points closer than `eps`, if any.
    pub fn find_close_pair(&self, eps: f64) -> Option<(usize, usize)> {
        close_pair(&self.points, eps)
    }

    /// Checks node uniqueness and face planarity.
    pub fn check_invariants(&self) -> Result<(), GeomError> {
        if let Some((i, j)) = self.find_close_pair(EPS_MERGE) {
            return Err(GeomError::DuplicateNodes(i, j));
        }
        if let Some(fs) = &self.faces {
            for f in fs {
                let pts: Vec<Point3> = f.iter().map(|&i| self.points[i]).collect();
                let normal = face_normal(&pts).ok_or(GeomError::DegenerateFace)?;
                let c = pts[0];
                for (k, p) in pts.iter().enumerate() {
                    let d = (*p - c).dot(normal).abs();
                    if d > EPS_PLANE {
                        return Err(GeomError::NonPlanar { index: f[k], distance: d });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Validates a dense adjacency matrix for `n` points.
pub(crate) fn check_adjacency(adj: &[Vec<u8>], n: usize) -> Result<(), GeomError> {
    if adj.len() != n {
        return Err(GeomError::AdjacencyShape { rows: adj.len(), cols: adj.first().map_or(0, |r| r.len()), n });
    }
    for row in adj {
        if row.len() != n {
            return Err(GeomError::AdjacencyShape { rows: adj.len(), cols: row.len(), n });
        }
    }
    for i in 0..n {
        if adj[i][i] != 0 {
            return Err(GeomError::AdjacencySelfLoop(i));
        }
        for j in 0..n {
            if adj[i][j] > 1 {
                return Err(GeomError::AdjacencyValue(i, j));
            }
            if adj[i][j] != adj[j][i] {
                return Err(GeomError::AdjacencyAsymmetric(i, j));
            }
        }
    }
    Ok(())
}

/// First pair (by index order) of points within `eps` of each other.
pub(crate) fn close_pair(points: &[Point3], eps: f64) -> Option<(usize, usize)> {
    let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: &Point3| ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64, (p.z / eps).floor() as i64);
    let mut best: Option<(usize, usize)> = None;
    for (j, p) in points.iter().enumerate() {
        let (cx, cy, cz) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &i in ids {
                            if points[i].dist(*p) <= eps && best.is_none_or(|b| (i, j) < b) {
                                best = Some((i, j));
                            }
                        }
                    }
                }
            }
        }
        cells.entry((cx, cy, cz)).or_default().push(j);
    }
    best
}

/// Incrementally builds a deduplicated wireframe.
#[derive(Debug, Clone, Default)]
pub struct WireframeBuilder {
    pool: NodePool,
    edges: BTreeSet<(usize, usize)>,
    faces: Vec<Vec<usize>>,
}

impl WireframeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder whose points are rounded onto the storage lattice.
    pub fn on_lattice() -> Self {
        Self { pool: NodePool::on_lattice(EPS_MERGE), ..Self::default() }
    }

    pub fn point(&mut self, p: Point3) -> usize {
        self.pool.insert(p)
    }

    pub fn edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.edges.insert(norm_edge(a, b));
        }
    }

    pub fn segment(&mut self, a: Point3, b: Point3) -> (usize, usize) {
        let (i, j) = (self.point(a), self.point(b));
        self.edge(i, j);
        (i, j)
    }

    /// Adds a closed loop of edges and returns its vertex indices.
    pub fn closed_loop(&mut self, pts: &[Point3]) -> Vec<usize> {
        let ids: Vec<usize> = pts.iter().map(|&p| self.point(p)).collect();
        for k in 0..ids.len() {
            self.edge(ids[k], ids[(k + 1) % ids.len()]);
        }
        ids
    }

    /// Adds a face loop (and its boundary edges); returns the face index.
    pub fn face(&mut self, pts: &[Point3]) -> usize {
        let mut ids = self.closed_loop(pts);
        ids.dedup();
        while ids.len() > 1 && ids[0] == ids[ids.len() - 1] {
            ids.pop();
        }
        self.faces.push(ids);
        self.faces.len() - 1
    }

    pub fn points(&self) -> &[Point3] {
        self.pool.points()
    }

    pub fn build(self, with_faces: bool) -> WireframeGraph {
        WireframeGraph {
            points: self.pool.into_points(),
            edges: self.edges,
            faces: with_faces.then_some(self.faces),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_merges_within_tolerance() {
        let mut pool = NodePool::default();
        let a = pool.insert(Point3::new(1.0, 2.0, 3.0));
        let b = pool.insert(Point3::new(1.0 + 0.5 * EPS_MERGE, 2.0, 3.0));
        let c = pool.insert(Point3::new(1.0 + 2.0 * EPS_MERGE, 2.0, 3.0));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn adjacency_validation() {
        let pts = vec![Point3::default(), Point3::new(1.0, 0.0, 0.0)];
        assert!(WireframeGraph::from_adjacency(pts.clone(), &[vec![0, 1], vec![1, 0]]).is_ok());
        assert_eq!(
            WireframeGraph::from_adjacency(pts.clone(), &[vec![0, 1], vec![0, 0]]),
            Err(GeomError::AdjacencyAsymmetric(0, 1))
        );
        assert_eq!(
            WireframeGraph::from_adjacency(pts.clone(), &[vec![1, 0], vec![0, 0]]),
            Err(GeomError::AdjacencySelfLoop(0))
        );
        assert!(matches!(
            WireframeGraph::from_adjacency(pts, &[vec![0], vec![0]]),
            Err(GeomError::AdjacencyShape { .. })
        ));
    }

    #[test]
    fn matrix_roundtrip() {
        let pts = vec![Point3::default(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        let g = WireframeGraph::new(pts.clone(), [(0, 1), (2, 1)], None).unwrap();
        let m = g.adjacency_matrix();
        assert_eq!(WireframeGraph::from_adjacency(pts, &m).unwrap(), g);
    }

    #[test]
    fn close_pair_detection() {
        let pts = vec![
            Point3::default(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.5 * EPS_MERGE),
        ];
        assert_eq!(close_pair(&pts, EPS_MERGE), Some((1, 2)));
        let spaced = vec![Point3::default(), Point3::new(2.0 * EPS_MERGE, 0.0, 0.0)];
        assert_eq!(close_pair(&spaced, EPS_MERGE), None);
    }
}
