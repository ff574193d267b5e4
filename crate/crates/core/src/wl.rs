//! Weisfeiler-Lehman color refinement and the structural upper bound on
//! alignment accuracy.
//!
//! Nodes that 1-WL cannot distinguish form equivalence classes; no
//! structure-only aligner can do better than picking the right class, so the
//! ratio of classes to nodes bounds achievable accuracy from above.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::graph::Graph;

/// Stable coloring produced by 1-WL refinement. Color ids are dense in
/// `[0, class_count)`, canonicalized by first appearance in node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorAssignment {
    colors: Vec<u32>,
    class_count: usize,
    rounds: usize,
}

impl ColorAssignment {
    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color(&self, node: usize) -> u32 {
        self.colors[node]
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Number of refinement rounds applied before the partition stopped
    /// changing.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Sizes of the equivalence classes, indexed by color id.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.class_count];
        for &c in &self.colors {
            sizes[c as usize] += 1;
        }
        sizes
    }
}

/// Runs 1-WL color refinement from a uniform initial coloring to a fixed
/// point. Each round relabels every node by its current color together with
/// the sorted multiset of its neighbors' colors; labels are compressed to
/// dense ids per round.
pub fn wl_refine(graph: &Graph) -> ColorAssignment {
    let n = graph.node_count();
    if n == 0 {
        return ColorAssignment {
            colors: Vec::new(),
            class_count: 0,
            rounds: 0,
        };
    }
    let mut colors = vec![0u32; n];
    let mut class_count = 1usize;
    let mut rounds = 0usize;

    // Refinement only splits classes, so the class count strictly grows
    // until the partition is stable; n rounds always suffice.
    for _ in 0..n {
        let signatures: Vec<(u32, Vec<u32>)> = (0..n)
            .into_par_iter()
            .map(|v| {
                let mut neighbor_colors: Vec<u32> = graph
                    .neighbors(v)
                    .iter()
                    .map(|&u| colors[u as usize])
                    .collect();
                neighbor_colors.sort_unstable();
                (colors[v], neighbor_colors)
            })
            .collect();

        let mut dictionary: HashMap<&(u32, Vec<u32>), u32> = HashMap::new();
        let mut next = vec![0u32; n];
        for (v, sig) in signatures.iter().enumerate() {
            let fresh = dictionary.len() as u32;
            let id = *dictionary.entry(sig).or_insert(fresh);
            next[v] = id;
        }
        let new_count = dictionary.len();
        if new_count == class_count {
            break;
        }
        colors = next;
        class_count = new_count;
        rounds += 1;
    }

    ColorAssignment {
        colors,
        class_count,
        rounds,
    }
}

/// Theoretical upper bound on structure-only alignment accuracy for a graph
/// pair: the smaller of the two class-to-node ratios.
pub fn tub(source: &Graph, target: &Graph) -> f64 {
    let bound = |g: &Graph| {
        if g.node_count() == 0 {
            return 0.0;
        }
        wl_refine(g).class_count() as f64 / g.node_count() as f64
    };
    bound(source).min(bound(target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_has_two_classes() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let c = wl_refine(&g);
        assert_eq!(c.class_count(), 2);
        assert_eq!(c.color(1), c.color(2));
        assert_eq!(c.color(2), c.color(3));
        assert_ne!(c.color(0), c.color(1));
    }

    #[test]
    fn path_three_has_two_classes() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let c = wl_refine(&g);
        assert_eq!(c.class_count(), 2);
        assert_eq!(c.color(0), c.color(2));
    }

    #[test]
    fn path_five_has_three_classes() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let c = wl_refine(&g);
        assert_eq!(c.class_count(), 3);
        assert_eq!(c.color(0), c.color(4));
        assert_eq!(c.color(1), c.color(3));
    }

    /// Orbit partition under the full automorphism group, by exhaustive
    /// permutation search. Usable up to ~8 nodes.
    fn automorphism_orbits(g: &Graph) -> Vec<usize> {
        let n = g.node_count();
        let edge_set: std::collections::HashSet<(u32, u32)> = g.edges().iter().copied().collect();
        let mut orbit: Vec<usize> = (0..n).collect();
        fn find(orbit: &mut Vec<usize>, v: usize) -> usize {
            if orbit[v] == v {
                v
            } else {
                let root = find(orbit, orbit[v]);
                orbit[v] = root;
                root
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let preserves = g.edges().iter().all(|&(u, v)| {
                let (a, b) = (perm[u as usize] as u32, perm[v as usize] as u32);
                edge_set.contains(&(a.min(b), a.max(b)))
            });
            if preserves {
                for (v, &image) in perm.iter().enumerate() {
                    let (a, b) = (find(&mut orbit, v), find(&mut orbit, image));
                    if a != b {
                        orbit[a] = b;
                    }
                }
            }
            // Next lexicographic permutation.
            let Some(i) = (0..n.saturating_sub(1))
                .rev()
                .find(|&i| perm[i] < perm[i + 1])
            else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
        (0..n).map(|v| find(&mut orbit, v)).collect()
    }

    fn partitions_equal(colors: &[u32], orbits: &[usize]) -> bool {
        let n = colors.len();
        (0..n).all(|a| (a + 1..n).all(|b| (colors[a] == colors[b]) == (orbits[a] == orbits[b])))
    }

    #[test]
    fn classes_match_automorphism_orbits_on_friendly_instances() {
        let instances = [
            // Rigid: path of six with a chord; every node is unique.
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 3)]).unwrap(),
            // Star: center vs leaves.
            Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap(),
            // Path of five: three mirror classes.
            Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap(),
            // One nontrivial twin pair.
            Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (1, 4), (3, 4), (2, 4)]).unwrap(),
        ];
        for g in &instances {
            let c = wl_refine(g);
            let orbits = automorphism_orbits(g);
            assert!(
                partitions_equal(c.colors(), &orbits),
                "WL classes {:?} vs orbits {:?}",
                c.colors(),
                orbits
            );
        }
    }

    #[test]
    fn refinement_is_isomorphism_invariant() {
        let edges = [(0usize, 1usize), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4)];
        let g = Graph::from_edges(5, &edges).unwrap();
        // Relabel through the permutation 0->3, 1->0, 2->4, 3->1, 4->2.
        let perm = [3usize, 0, 4, 1, 2];
        let permuted: Vec<(usize, usize)> =
            edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let h = Graph::from_edges(5, &permuted).unwrap();
        let cg = wl_refine(&g);
        let ch = wl_refine(&h);
        assert_eq!(cg.class_count(), ch.class_count());
        let mut sg = cg.class_sizes();
        let mut sh = ch.class_sizes();
        sg.sort_unstable();
        sh.sort_unstable();
        assert_eq!(sg, sh);
        // Corresponding nodes land in classes of equal size.
        for (v, &image) in perm.iter().enumerate() {
            let size_g = cg.class_sizes()[cg.color(v) as usize];
            let size_h = ch.class_sizes()[ch.color(image) as usize];
            assert_eq!(size_g, size_h);
        }
    }

    #[test]
    fn refinement_is_stable_under_one_more_round() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)])
            .unwrap();
        let c = wl_refine(&g);
        // Re-refining the colored graph by hand must not split any class.
        let mut signatures: Vec<(u32, Vec<u32>)> = Vec::new();
        for v in 0..g.node_count() {
            let mut nc: Vec<u32> = g
                .neighbors(v)
                .iter()
                .map(|&u| c.color(u as usize))
                .collect();
            nc.sort_unstable();
            signatures.push((c.color(v), nc));
        }
        let mut unique = signatures.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), c.class_count());
    }

    #[test]
    fn tub_of_fig_pair_style_graphs() {
        // 4 nodes / 3 classes: triangle with a pendant node.
        let gs = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (0, 3)]).unwrap();
        assert_eq!(wl_refine(&gs).class_count(), 3);
        // 5 nodes / 3 classes: path of five.
        let gt = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(wl_refine(&gt).class_count(), 3);
        assert_eq!(tub(&gs, &gt), 0.6);
    }

    #[test]
    fn tub_of_identical_graphs_is_class_ratio() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(tub(&g, &g), 0.5);
    }
}
