//! Axis-aligned bounding box trees over tets and the pairwise broad phase.
//!
//! Trees are built in the body frame by median split on the longest axis of
//! each node's box. A query between two bodies re-wraps B's boxes in A's
//! frame, so the candidate list is a superset of the truly overlapping pairs.

use nalgebra::{Isometry3, Point3, Vector3};

use crate::mesh::TetMesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point3::from(Vector3::repeat(f64::INFINITY)),
            max: Point3::from(Vector3::repeat(f64::NEG_INFINITY)),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3<f64>>) -> Self {
        points.into_iter().fold(Self::empty(), |b, p| Self { min: b.min.inf(p), max: b.max.sup(p) })
    }

    pub fn union(&self, other: &Self) -> Self {
        Self { min: self.min.inf(&other.min), max: self.max.sup(&other.max) }
    }

    pub fn contains(&self, other: &Self) -> bool {
        (0..3).all(|a| self.min[a] <= other.min[a] && other.max[a] <= self.max[a])
    }

    pub fn contains_point(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    pub fn intersects(&self, other: &Self) -> bool {
        (0..3).all(|a| self.min[a] <= other.max[a] && other.min[a] <= self.max[a])
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn half_extents(&self) -> Vector3<f64> {
        (self.max - self.min) * 0.5
    }

    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        d.x * d.y * d.z
    }

    pub fn longest_axis(&self) -> usize {
        let d = self.max - self.min;
        d.imax()
    }

    /// Box enclosing this box after a rigid transform.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        let rot = iso.rotation.to_rotation_matrix().into_inner();
        let center = iso * self.center();
        let half = rot.abs() * self.half_extents();
        // Rounding in the rotation can shave the last ulp off a face.
        let pad = Vector3::repeat(1e-12 * (half.max() + center.coords.amax()));
        Self { min: center - half - pad, max: center + half + pad }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BvhNodeKind {
    Leaf { tet: usize },
    Internal { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvhNode {
    pub aabb: Aabb,
    pub kind: BvhNodeKind,
}

/// Binary tree of boxes; node 0 is the root and leaves reference tets.
#[derive(Debug, Clone, PartialEq)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    depth: usize,
    leaves: usize,
}

impl Bvh {
    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn root(&self) -> &BvhNode {
        &self.nodes[0]
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }
}

pub fn build_bvh(mesh: &TetMesh) -> Bvh {
    let boxes: Vec<Aabb> =
        (0..mesh.tet_count()).map(|t| Aabb::from_points(&mesh.tet_corners(t))).collect();
    let centroids: Vec<Point3<f64>> = (0..mesh.tet_count()).map(|t| mesh.tet_centroid(t)).collect();
    let mut order: Vec<usize> = (0..mesh.tet_count()).collect();
    let mut nodes = Vec::with_capacity(2 * order.len());
    let depth = build_node(&mut nodes, &mut order, &boxes, &centroids);
    Bvh { nodes, depth, leaves: boxes.len() }
}

fn build_node(
    nodes: &mut Vec<BvhNode>,
    tets: &mut [usize],
    boxes: &[Aabb],
    centroids: &[Point3<f64>],
) -> usize {
    let aabb = tets.iter().fold(Aabb::empty(), |b, &t| b.union(&boxes[t]));
    let index = nodes.len();
    if let [tet] = tets {
        nodes.push(BvhNode { aabb, kind: BvhNodeKind::Leaf { tet: *tet } });
        return 0;
    }
    nodes.push(BvhNode { aabb, kind: BvhNodeKind::Leaf { tet: usize::MAX } });
    let axis = aabb.longest_axis();
    tets.sort_by(|&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b)));
    let (lo, hi) = tets.split_at_mut(tets.len() / 2);
    let left = nodes.len();
    let dl = build_node(nodes, lo, boxes, centroids);
    let right = nodes.len();
    let dr = build_node(nodes, hi, boxes, centroids);
    nodes[index].kind = BvhNodeKind::Internal { left, right };
    1 + dl.max(dr)
}

/// Work counters for one broad-phase query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BroadPhaseStats {
    /// Box-pair overlap tests performed.
    pub node_visits: usize,
    pub candidates: usize,
}

/// Candidate tet pairs `(tet of A, tet of B)`, sorted.
pub fn broad_phase(
    bvh_a: &Bvh,
    pose_a: &Isometry3<f64>,
    bvh_b: &Bvh,
    pose_b: &Isometry3<f64>,
) -> Vec<(usize, usize)> {
    broad_phase_with_stats(bvh_a, pose_a, bvh_b, pose_b).0
}

pub fn broad_phase_with_stats(
    bvh_a: &Bvh,
    pose_a: &Isometry3<f64>,
    bvh_b: &Bvh,
    pose_b: &Isometry3<f64>,
) -> (Vec<(usize, usize)>, BroadPhaseStats) {
    let b_in_a = pose_a.inverse() * pose_b;
    let mut stats = BroadPhaseStats::default();
    let mut pairs = Vec::new();
    let mut stack = vec![(0usize, 0usize)];
    while let Some((ia, ib)) = stack.pop() {
        let na = &bvh_a.nodes[ia];
        let nb = &bvh_b.nodes[ib];
        let box_b = nb.aabb.transformed(&b_in_a);
        stats.node_visits += 1;
        if !na.aabb.intersects(&box_b) {
            continue;
        }
        match (na.kind, nb.kind) {
            (BvhNodeKind::Leaf { tet: ta }, BvhNodeKind::Leaf { tet: tb }) => pairs.push((ta, tb)),
            (BvhNodeKind::Internal { left, right }, BvhNodeKind::Leaf { .. }) => {
                stack.push((right, ib));
                stack.push((left, ib));
            }
            (BvhNodeKind::Leaf { .. }, BvhNodeKind::Internal { left, right }) => {
                stack.push((ia, right));
                stack.push((ia, left));
            }
            (
                BvhNodeKind::Internal { left: al, right: ar },
                BvhNodeKind::Internal { left: bl, right: br },
            ) => {
                if na.aabb.volume() >= box_b.volume() {
                    stack.push((ar, ib));
                    stack.push((al, ib));
                } else {
                    stack.push((ia, br));
                    stack.push((ia, bl));
                }
            }
        }
    }
    pairs.sort_unstable();
    stats.candidates = pairs.len();
    (pairs, stats)
}
