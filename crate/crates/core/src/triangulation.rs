//! Delaunay triangulation of bin centroids.
//!
//! Points are inserted in lexicographic `(x, y, index)` order, each new point
//! being joined to the hull edges it sees, and non-Delaunay edges are flipped
//! away as they appear. Orientation and in-circle signs come from adaptive
//! exact predicates. Cocircular quadruples, which lattice centroids produce
//! constantly, are resolved by symbolically raising each point's lifted
//! height by `eps^(rank+1)`, where `rank` is its position in the sort order.
//! The result is the unique Delaunay triangulation of that perturbed set, so
//! it does not depend on insertion details.

use std::cmp::Ordering;
use std::collections::HashMap;

use robust::Coord;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EdgeList {
    /// Unordered neighbour pairs `[a, b]` with `a < b`, sorted.
    pub edges: Vec<[usize; 2]>,
    /// Counter-clockwise triangles, each rotated to start at its smallest index, sorted.
    pub triangles: Vec<[usize; 3]>,
    /// Convex hull vertices in counter-clockwise order, collinear boundary points included.
    pub hull: Vec<usize>,
    /// Set when every point lies on one line and only a path could be formed.
    pub degenerate: bool,
}

impl EdgeList {
    fn from_triangles(mut triangles: Vec<[usize; 3]>, hull: Vec<usize>) -> Self {
        for t in &mut triangles {
            let k = (0..3).min_by_key(|&k| t[k]).unwrap();
            t.rotate_left(k);
        }
        triangles.sort_unstable();
        let mut edges: Vec<[usize; 2]> = triangles
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
            .map(|[a, b]| [a.min(b), a.max(b)])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self {
            edges,
            triangles,
            hull,
            degenerate: false,
        }
    }

    fn path(order: &[usize]) -> Self {
        let mut edges: Vec<[usize; 2]> = order
            .windows(2)
            .map(|w| [w[0].min(w[1]), w[0].max(w[1])])
            .collect();
        edges.sort_unstable();
        Self {
            edges,
            triangles: Vec::new(),
            hull: order.to_vec(),
            degenerate: true,
        }
    }
}

#[inline]
fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn orient(pts: &[[f64; 2]], a: usize, b: usize, c: usize) -> f64 {
    robust::orient2d(coord(pts[a]), coord(pts[b]), coord(pts[c]))
}

fn lexicographic(pts: &[[f64; 2]], i: usize, j: usize) -> Ordering {
    pts[i][0]
        .total_cmp(&pts[j][0])
        .then(pts[i][1].total_cmp(&pts[j][1]))
        .then(i.cmp(&j))
}

struct Builder<'a> {
    pts: &'a [[f64; 2]],
    rank: Vec<usize>,
    triangles: Vec<[usize; 3]>,
    /// Directed edge -> triangle that has it as a counter-clockwise side.
    owner: HashMap<(usize, usize), usize>,
    hull: Vec<usize>,
    pending: Vec<(usize, usize)>,
}

impl<'a> Builder<'a> {
    /// Whether `d` lies strictly inside the circle through counter-clockwise `a, b, c`,
    /// with ties settled by the symbolic height perturbation.
    fn in_circle(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let pts = self.pts;
        let det = robust::incircle(coord(pts[a]), coord(pts[b]), coord(pts[c]), coord(pts[d]));
        if det != 0.0 {
            return det > 0.0;
        }
        // d(det)/d(height) for each of the four points.
        let mut terms = [
            (self.rank[a], orient(pts, b, c, d)),
            (self.rank[b], orient(pts, c, a, d)),
            (self.rank[c], orient(pts, a, b, d)),
            (self.rank[d], -orient(pts, a, b, c)),
        ];
        terms.sort_unstable_by_key(|t| t.0);
        terms
            .iter()
            .find(|t| t.1 != 0.0)
            .is_some_and(|t| t.1 > 0.0)
    }

    fn add_triangle(&mut self, t: [usize; 3]) {
        let id = self.triangles.len();
        self.triangles.push(t);
        self.claim(id);
    }

    fn claim(&mut self, id: usize) {
        let [a, b, c] = self.triangles[id];
        for e in [(a, b), (b, c), (c, a)] {
            self.owner.insert(e, id);
        }
    }

    fn legalize(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (Some(&t1), Some(&t2)) = (self.owner.get(&(a, b)), self.owner.get(&(b, a))) else {
                continue;
            };
            let c = third(self.triangles[t1], a, b);
            let d = third(self.triangles[t2], b, a);
            if !self.in_circle(a, b, c, d) {
                continue;
            }
            self.owner.remove(&(a, b));
            self.owner.remove(&(b, a));
            self.triangles[t1] = [d, b, c];
            self.triangles[t2] = [c, a, d];
            self.claim(t1);
            self.claim(t2);
            self.pending.extend([(b, c), (c, a), (a, d), (d, b)]);
        }
    }

    /// Joins `p` to every hull edge it sees strictly from outside.
    fn insert(&mut self, p: usize) {
        let h = self.hull.len();
        let visible: Vec<bool> = (0..h)
            .map(|i| orient(self.pts, self.hull[i], self.hull[(i + 1) % h], p) < 0.0)
            .collect();
        // rotate so that the visible run does not wrap around
        let start = (0..h)
            .find(|&i| visible[i] && !visible[(i + h - 1) % h])
            .expect("a point beyond the hull sees at least one edge");
        self.hull.rotate_left(start);
        let run = visible[start..]
            .iter()
            .chain(&visible[..start])
            .take_while(|&&v| v)
            .count();
        for i in 0..run {
            let (u, v) = (self.hull[i], self.hull[i + 1]);
            self.add_triangle([v, u, p]);
            self.pending.push((u, v));
        }
        self.legalize();
        let mut hull = Vec::with_capacity(h + 1 - run.saturating_sub(1));
        hull.push(self.hull[0]);
        hull.push(p);
        hull.extend_from_slice(&self.hull[run..]);
        self.hull = hull;
    }
}

fn third(t: [usize; 3], a: usize, b: usize) -> usize {
    for k in 0..3 {
        if t[k] == a && t[(k + 1) % 3] == b {
            return t[(k + 2) % 3];
        }
    }
    unreachable!("edge ({a}, {b}) is not a side of {t:?}")
}

/// Delaunay triangulation of at least three distinct points.
///
/// When every point is collinear the result is the path through the points in
/// sorted order with `degenerate` set.
pub fn triangulate(points: &[[f64; 2]]) -> Result<EdgeList> {
    let m = points.len();
    if m < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: m });
    }
    for (row, p) in points.iter().enumerate() {
        for (column, v) in p.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, column });
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&i, &j| lexicographic(points, i, j));
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(Error::DuplicatePoint {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
            });
        }
    }
    let mut rank = vec![0; m];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    let Some(k) = (2..m).find(|&k| orient(points, order[0], order[1], order[k]) != 0.0) else {
        return Ok(EdgeList::path(&order));
    };

    let mut builder = Builder {
        pts: points,
        rank,
        triangles: Vec::with_capacity(2 * m),
        owner: HashMap::with_capacity(6 * m),
        hull: Vec::new(),
        pending: Vec::new(),
    };

    // fan from the first non-collinear point over the collinear prefix
    let apex = order[k];
    let chain = &order[..k];
    if orient(points, chain[0], chain[1], apex) > 0.0 {
        for w in chain.windows(2) {
            builder.add_triangle([w[0], w[1], apex]);
        }
        builder.hull = chain.to_vec();
    } else {
        for w in chain.windows(2) {
            builder.add_triangle([w[1], w[0], apex]);
        }
        builder.hull = chain.iter().rev().copied().collect();
    }
    builder.hull.push(apex);
    builder.pending.extend(
        builder
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .collect::<Vec<_>>(),
    );
    builder.legalize();

    for &p in &order[k + 1..] {
        builder.insert(p);
    }

    let hull = canonical_hull(builder.hull);
    Ok(EdgeList::from_triangles(builder.triangles, hull))
}

/// Rotates a cyclic hull so it starts at its smallest index.
fn canonical_hull(mut hull: Vec<usize>) -> Vec<usize> {
    if let Some(k) = (0..hull.len()).min_by_key(|&k| hull[k]) {
        hull.rotate_left(k);
    }
    hull
}

/// Neighbour edges for any number of model centroids.
///
/// One centroid has no edges and two are joined directly; larger sets are
/// triangulated.
pub fn neighbor_edges(points: &[[f64; 2]]) -> Result<EdgeList> {
    match points.len() {
        0 => Err(Error::EmptyBinning),
        1 => Ok(EdgeList {
            hull: vec![0],
            ..EdgeList::default()
        }),
        2 => {
            if points[0] == points[1] {
                return Err(Error::DuplicatePoint { first: 0, second: 1 });
            }
            Ok(EdgeList {
                edges: vec![[0, 1]],
                triangles: Vec::new(),
                hull: vec![0, 1],
                degenerate: true,
            })
        }
        _ => triangulate(points),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area2(pts: &[[f64; 2]], t: [usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| pts[i]);
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }

    #[test]
    fn single_triangle() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let t = triangulate(&pts).unwrap();
        assert_eq!(t.triangles, vec![[0, 1, 2]]);
        assert_eq!(t.edges, vec![[0, 1], [0, 2], [1, 2]]);
        assert!(!t.degenerate);
    }

    #[test]
    fn square_picks_one_diagonal_deterministically() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let t = triangulate(&pts).unwrap();
        assert_eq!(t.triangles.len(), 2);
        assert_eq!(t.edges.len(), 5);
        // same answer for every input order
        let perms: [[usize; 4]; 3] = [[3, 2, 1, 0], [2, 0, 3, 1], [1, 3, 0, 2]];
        let diagonal = |t: &EdgeList, names: &[usize]| {
            let mut d: Vec<[usize; 2]> = t
                .edges
                .iter()
                .map(|e| {
                    let (a, b) = (names[e[0]], names[e[1]]);
                    [a.min(b), a.max(b)]
                })
                .filter(|e| e == &[0, 2] || e == &[1, 3])
                .collect();
            d.sort();
            d
        };
        let base = diagonal(&t, &[0, 1, 2, 3]);
        assert_eq!(base.len(), 1);
        for perm in perms {
            let shuffled: Vec<[f64; 2]> = perm.iter().map(|&i| pts[i]).collect();
            let t2 = triangulate(&shuffled).unwrap();
            assert_eq!(diagonal(&t2, &perm), base);
        }
    }

    #[test]
    fn collinear_points_form_a_path() {
        let pts = [[2.0, 2.0], [0.0, 0.0], [1.0, 1.0], [3.0, 3.0]];
        let t = triangulate(&pts).unwrap();
        assert!(t.degenerate);
        assert!(t.triangles.is_empty());
        assert_eq!(t.edges, vec![[0, 2], [0, 3], [1, 2]]);
    }

    #[test]
    fn collinear_prefix_then_apex() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [1.5, -1.0]];
        let t = triangulate(&pts).unwrap();
        assert_eq!(t.triangles.len(), 3);
        assert_eq!(t.hull.len(), 5);
        for &tri in &t.triangles {
            assert!(area2(&pts, tri) > 0.0);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            triangulate(&[[0.0, 0.0], [1.0, 1.0]]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            triangulate(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]),
            Err(Error::DuplicatePoint { first: 0, second: 2 })
        ));
    }

    #[test]
    fn small_neighbor_sets() {
        assert!(neighbor_edges(&[[0.0, 0.0]]).unwrap().edges.is_empty());
        assert_eq!(neighbor_edges(&[[0.0, 0.0], [1.0, 0.0]]).unwrap().edges, vec![[0, 1]]);
        assert!(neighbor_edges(&[]).is_err());
    }

    #[test]
    fn regular_lattice_has_euler_counts() {
        let mut pts = Vec::new();
        for r in 0..7 {
            for c in 0..9 {
                let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
                pts.push([c as f64 + shift, r as f64 * 3f64.sqrt() / 2.0]);
            }
        }
        let t = triangulate(&pts).unwrap();
        let (m, h) = (pts.len(), t.hull.len());
        assert_eq!(t.triangles.len(), 2 * m - 2 - h);
        assert_eq!(t.edges.len(), 3 * m - 3 - h);
        let total: f64 = t.triangles.iter().map(|&tri| area2(&pts, tri)).sum();
        assert!(t.triangles.iter().all(|&tri| area2(&pts, tri) > 0.0));
        assert!(total > 0.0);
    }
}
