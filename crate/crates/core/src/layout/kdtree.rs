//! Monopole Barnes–Hut approximation of the all-pairs repulsion over a 2D kd-tree.

use crate::geom::Vec2;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    min: Vec2,
    max: Vec2,
    center_of_mass: Vec2,
    mass: f64,
    /// Leaf: `items[start..end]`. Inner: children at `left` and `left + 1 ..`.
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Spatial tree over a frozen set of positions.
#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    items: Vec<usize>,
    points: Vec<Vec2>,
}

impl KdTree {
    pub fn build(points: &[Vec2]) -> KdTree {
        let mut tree = KdTree {
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
            items: (0..points.len()).collect(),
            points: points.to_vec(),
        };
        if !points.is_empty() {
            tree.build_node(0, points.len());
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let idx = self.nodes.len();
        let slice = &self.items[start..end];
        let mut min = self.points[slice[0]];
        let mut max = min;
        let mut sum = Vec2::ZERO;
        for &i in slice {
            let p = self.points[i];
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
            sum += p;
        }
        let mass = slice.len() as f64;
        self.nodes.push(Node {
            min,
            max,
            center_of_mass: sum / mass,
            mass,
            start,
            end,
            children: None,
        });
        if end - start > LEAF_SIZE {
            let split_x = max.x - min.x >= max.y - min.y;
            let mid = start + (end - start) / 2;
            let pts = &self.points;
            self.items[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                let (ka, kb) = if split_x {
                    (pts[a].x, pts[b].x)
                } else {
                    (pts[a].y, pts[b].y)
                };
                ka.total_cmp(&kb).then(a.cmp(&b))
            });
            let l = self.build_node(start, mid);
            let r = self.build_node(mid, end);
            self.nodes[idx].children = Some((l, r));
        }
        idx
    }

    /// Sum of `kernel(v - source, weight)` over all points except `skip`,
    /// treating cells whose extent is below `theta` times their distance as
    /// single point charges at their center of mass.
    pub fn accumulate<F>(&self, v: Vec2, skip: usize, theta: f64, kernel: F) -> Vec2
    where
        F: Fn(Vec2, f64) -> Vec2,
    {
        let mut total = Vec2::ZERO;
        if self.nodes.is_empty() {
            return total;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let inside = v.x >= node.min.x && v.x <= node.max.x && v.y >= node.min.y && v.y <= node.max.y;
            if !inside {
                let size = (node.max.x - node.min.x).max(node.max.y - node.min.y);
                let d = (v - node.center_of_mass).norm();
                if size < theta * d {
                    total += kernel(v - node.center_of_mass, node.mass);
                    continue;
                }
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => {
                    for &i in &self.items[node.start..node.end] {
                        if i != skip {
                            total += kernel(v - self.points[i], 1.0);
                        }
                    }
                }
            }
        }
        total
    }
}
