use nalgebra::{Point3, Vector3};

use super::triangle::closest_point_unchecked;
use crate::error::{Error, Result};
use crate::geometry::TriMesh;

pub const DEFAULT_LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Point3::from(Vector3::repeat(f64::INFINITY)),
            max: Point3::from(Vector3::repeat(f64::NEG_INFINITY)),
        }
    }

    fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|k| self.min[k] <= p[k] && p[k] <= self.max[k])
    }

    /// Squared distance from `p` to the box (0 inside).
    #[inline]
    pub fn distance_squared(&self, p: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = p[k];
            let excess = if v < self.min[k] {
                self.min[k] - v
            } else if v > self.max[k] {
                v - self.max[k]
            } else {
                0.0
            };
            d2 += excess * excess;
        }
        d2
    }

    fn longest_axis(&self) -> usize {
        let e = self.max - self.min;
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPointResult {
    pub distance: f64,
    pub point: Point3<f64>,
    /// Index into the source mesh's triangle list.
    pub triangle_id: usize,
}

/// Bounding-volume hierarchy over the non-degenerate triangles of a mesh,
/// answering exact closest-point queries.
///
/// Built by recursive median split along the longest axis of each node's
/// box. Immutable once built, so a shared reference can serve queries from
/// many threads.
#[derive(Debug, Clone)]
pub struct SurfaceIndex {
    nodes: Vec<Node>,
    /// Triangle corners in leaf order.
    corners: Vec<[Point3<f64>; 3]>,
    /// Source triangle id per entry of `corners`.
    ids: Vec<usize>,
    leaf_size: usize,
    mesh_triangles: usize,
}

struct Item {
    id: usize,
    centroid: Point3<f64>,
}

impl SurfaceIndex {
    pub fn build(mesh: &TriMesh) -> Result<Self> {
        Self::with_leaf_size(mesh, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(mesh: &TriMesh, leaf_size: usize) -> Result<Self> {
        if leaf_size == 0 {
            return Err(Error::InvalidArgument("leaf size must be positive".into()));
        }
        let mut items: Vec<Item> = (0..mesh.triangle_count())
            .filter(|&t| !mesh.is_degenerate(t))
            .map(|t| {
                let [a, b, c] = mesh.triangle_points(t);
                Item {
                    id: t,
                    centroid: Point3::from((a.coords + b.coords + c.coords) / 3.0),
                }
            })
            .collect();
        if items.is_empty() {
            return Err(Error::NoSurface);
        }
        let mut index = SurfaceIndex {
            nodes: Vec::with_capacity(2 * items.len() / leaf_size + 1),
            corners: Vec::with_capacity(items.len()),
            ids: Vec::with_capacity(items.len()),
            leaf_size,
            mesh_triangles: mesh.triangle_count(),
        };
        index.build_node(mesh, &mut items);
        Ok(index)
    }

    fn build_node(&mut self, mesh: &TriMesh, items: &mut [Item]) -> usize {
        let mut bounds = Aabb::empty();
        for item in items.iter() {
            for p in mesh.triangle_points(item.id) {
                bounds.grow(&p);
            }
        }
        let slot = self.nodes.len();
        self.nodes.push(Node {
            bounds,
            kind: NodeKind::Leaf { start: 0, end: 0 },
        });
        if items.len() <= self.leaf_size {
            let start = self.corners.len();
            for item in items.iter() {
                self.corners.push(mesh.triangle_points(item.id));
                self.ids.push(item.id);
            }
            self.nodes[slot].kind = NodeKind::Leaf {
                start,
                end: self.corners.len(),
            };
            return slot;
        }
        let axis = bounds.longest_axis();
        let mid = items.len() / 2;
        items.select_nth_unstable_by(mid, |a, b| {
            a.centroid[axis]
                .total_cmp(&b.centroid[axis])
                .then(a.id.cmp(&b.id))
        });
        let (lo, hi) = items.split_at_mut(mid);
        let left = self.build_node(mesh, lo);
        let right = self.build_node(mesh, hi);
        self.nodes[slot].kind = NodeKind::Inner { left, right };
        slot
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    /// Number of triangles in the source mesh, degenerate ones included.
    pub fn mesh_triangle_count(&self) -> usize {
        self.mesh_triangles
    }

    /// Number of indexed (non-degenerate) triangles.
    pub fn indexed_triangle_count(&self) -> usize {
        self.ids.len()
    }

    pub fn root_bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    /// Triangle ids held by each leaf, in traversal order.
    pub fn leaves(&self) -> Vec<&[usize]> {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Leaf { start, end } => Some(&self.ids[start..end]),
                NodeKind::Inner { .. } => None,
            })
            .collect()
    }

    /// Checks that every node's box contains all vertices of the
    /// triangles below it.
    pub fn bounds_are_nested(&self) -> bool {
        self.check_subtree(0).is_some()
    }

    /// Returns the corner range covered by `node` if every corner in it lies
    /// inside the node's box. Subtrees occupy contiguous ranges because
    /// leaves are emitted in depth-first order.
    fn check_subtree(&self, node: usize) -> Option<(usize, usize)> {
        let n = &self.nodes[node];
        let (start, end) = match n.kind {
            NodeKind::Leaf { start, end } => (start, end),
            NodeKind::Inner { left, right } => {
                let (ls, le) = self.check_subtree(left)?;
                let (rs, re) = self.check_subtree(right)?;
                if le != rs {
                    return None;
                }
                (ls, re)
            }
        };
        self.corners[start..end]
            .iter()
            .flatten()
            .all(|p| n.bounds.contains(p))
            .then_some((start, end))
    }

    /// Exact closest point on the indexed surface.
    pub fn query_closest(&self, p: &Point3<f64>) -> ClosestPointResult {
        self.query_closest_counted(p).0
    }

    /// Like [`query_closest`](Self::query_closest), also returning the
    /// number of point-triangle evaluations performed.
    pub fn query_closest_counted(&self, p: &Point3<f64>) -> (ClosestPointResult, usize) {
        let mut best_d2 = f64::INFINITY;
        let mut best = ClosestPointResult {
            distance: f64::INFINITY,
            point: *p,
            triangle_id: usize::MAX,
        };
        let mut evaluated = 0;
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(64);
        stack.push((0, self.nodes[0].bounds.distance_squared(p)));
        while let Some((node, box_d2)) = stack.pop() {
            // Equal distances are still visited so the lowest-id tie wins.
            if box_d2 > best_d2 {
                continue;
            }
            match self.nodes[node].kind {
                NodeKind::Leaf { start, end } => {
                    for k in start..end {
                        let [a, b, c] = &self.corners[k];
                        let q = closest_point_unchecked(p, a, b, c);
                        let d2 = (q - p).norm_squared();
                        evaluated += 1;
                        let id = self.ids[k];
                        if d2 < best_d2 || (d2 == best_d2 && id < best.triangle_id) {
                            best_d2 = d2;
                            best.point = q;
                            best.triangle_id = id;
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left].bounds.distance_squared(p);
                    let dr = self.nodes[right].bounds.distance_squared(p);
                    // Nearer child is popped first.
                    if dl <= dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        best.distance = best_d2.sqrt();
        (best, evaluated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> TriMesh {
        let v = (0..8)
            .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let t = vec![
            [0, 2, 1], [1, 2, 3], [4, 5, 6], [5, 7, 6],
            [0, 1, 4], [1, 5, 4], [2, 6, 3], [3, 6, 7],
            [0, 4, 2], [2, 4, 6], [1, 3, 5], [3, 7, 5],
        ];
        TriMesh::new(v, t).unwrap()
    }

    #[test]
    fn single_triangle_single_leaf() {
        let mesh = TriMesh::new(
            vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let index = SurfaceIndex::build(&mesh).unwrap();
        assert_eq!(index.leaves(), vec![&[0usize][..]]);
    }

    #[test]
    fn cube_root_box_and_query() {
        let index = SurfaceIndex::build(&cube()).unwrap();
        let root = index.root_bounds();
        assert_eq!(root.min, Point3::origin());
        assert_eq!(root.max, Point3::new(1.0, 1.0, 1.0));
        assert!(index.bounds_are_nested());

        let r = index.query_closest(&Point3::new(0.5, 0.5, 2.0));
        assert!((r.distance - 1.0).abs() < 1e-12);
        assert!((r.point - Point3::new(0.5, 0.5, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn query_at_vertex_is_zero() {
        let index = SurfaceIndex::build(&cube()).unwrap();
        let r = index.query_closest(&Point3::new(1.0, 1.0, 1.0));
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.point, Point3::new(1.0, 1.0, 1.0));
        // Lowest id among the triangles sharing that corner.
        assert_eq!(r.triangle_id, 3);
    }

    #[test]
    fn surfaceless_mesh_rejected() {
        let flat = TriMesh::new(
            vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(SurfaceIndex::build(&flat), Err(Error::NoSurface)));
        let empty = TriMesh::from_points(vec![Point3::origin()]).unwrap();
        assert!(matches!(SurfaceIndex::build(&empty), Err(Error::NoSurface)));
    }

    #[test]
    fn degenerate_triangles_skipped() {
        let mut v = cube().vertices().to_vec();
        v.push(Point3::new(0.5, 0.0, 0.0));
        let mut t = cube().triangles().to_vec();
        t.push([0, 1, 8]);
        let mesh = TriMesh::new(v, t).unwrap();
        let index = SurfaceIndex::build(&mesh).unwrap();
        assert_eq!(index.indexed_triangle_count(), 12);
        assert_eq!(index.mesh_triangle_count(), 13);
    }
}
