//! Exact nearest-neighbor search over low-dimensional point sets.
//!
//! Median-split KD-tree with leaf buckets. Queries are exact: subtrees are
//! pruned only when the splitting plane is strictly farther than the current
//! best, so equal-distance points are always visited and the smallest index
//! wins ties.

const LEAF_SIZE: usize = 8;

enum Node {
    Split {
        dim: u16,
        value: f32,
        left: u32,
        right: u32,
    },
    Leaf {
        start: u32,
        end: u32,
    },
}

pub struct KdTree {
    dim: usize,
    points: Vec<f32>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: u32,
}

impl KdTree {
    /// Builds a tree over the given points; each point's index is its
    /// position in the iteration order.
    pub fn build<'a, I>(dim: usize, points: I) -> KdTree
    where
        I: IntoIterator<Item = &'a [f32]>,
    {
        let mut flat = Vec::new();
        for p in points {
            debug_assert_eq!(p.len(), dim);
            flat.extend_from_slice(p);
        }
        let count = flat.len().checked_div(dim).unwrap_or(0);
        let mut tree = KdTree {
            dim,
            points: flat,
            order: (0..count as u32).collect(),
            nodes: Vec::new(),
            root: 0,
        };
        if count > 0 {
            tree.root = tree.build_range(0, count);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn point(&self, id: u32) -> &[f32] {
        let id = id as usize;
        &self.points[id * self.dim..(id + 1) * self.dim]
    }

    fn build_range(&mut self, start: usize, end: usize) -> u32 {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: start as u32,
                end: end as u32,
            });
            return (self.nodes.len() - 1) as u32;
        }
        // Split on the axis with the widest spread in this range.
        let mut split_dim = 0usize;
        let mut best_spread = -1.0f32;
        for d in 0..self.dim {
            let mut lo = f32::INFINITY;
            let mut hi = f32::NEG_INFINITY;
            for &id in &self.order[start..end] {
                let v = self.point(id)[d];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let spread = hi - lo;
            if spread > best_spread {
                best_spread = spread;
                split_dim = d;
            }
        }
        let mid = (start + end) / 2;
        {
            let dim = split_dim;
            let points = &self.points;
            let stride = self.dim;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                let va = points[a as usize * stride + dim];
                let vb = points[b as usize * stride + dim];
                va.total_cmp(&vb).then(a.cmp(&b))
            });
        }
        let split_value = self.point(self.order[mid])[split_dim];
        let left = self.build_range(start, mid);
        let right = self.build_range(mid, end);
        self.nodes.push(Node::Split {
            dim: split_dim as u16,
            value: split_value,
            left,
            right,
        });
        (self.nodes.len() - 1) as u32
    }

    /// Exact nearest neighbor of `query`: returns `(index, squared
    /// distance)`, preferring the smaller index on exact distance ties.
    pub fn nearest(&self, query: &[f32]) -> (u32, f32) {
        debug_assert_eq!(query.len(), self.dim);
        debug_assert!(!self.is_empty());
        let mut best = (u32::MAX, f32::INFINITY);
        self.search(self.root, query, &mut best);
        best
    }

    fn search(&self, node: u32, query: &[f32], best: &mut (u32, f32)) {
        match &self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &id in &self.order[*start as usize..*end as usize] {
                    let p = self.point(id);
                    let mut d2 = 0.0f32;
                    for (a, b) in query.iter().zip(p) {
                        let diff = a - b;
                        d2 += diff * diff;
                    }
                    if d2 < best.1 || (d2 == best.1 && id < best.0) {
                        *best = (id, d2);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let delta = query[*dim as usize] - value;
                let (near, far) = if delta < 0.0 {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, query, best);
                if delta * delta <= best.1 {
                    self.search(far, query, best);
                }
            }
        }
    }
}
