//! Euclidean minimum spanning tree and sink orientation.

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::geom::{distance, Link, Point};
use crate::logdomain::LogScalar;

#[derive(Debug, Error, PartialEq)]
pub enum MstError {
    #[error("pointset contains duplicate points")]
    DuplicatePoints,
    #[error("at least 2 points are required")]
    TooFewPoints,
    #[error("sink index is not a tree node")]
    SinkNotInTree,
}

/// An undirected spanning tree over point indices, with a designated root.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

impl Tree {
    pub fn total_weight(&self, points: &[Point]) -> LogScalar {
        self.edges.iter().map(|&(a, b)| distance(points[a], points[b])).sum()
    }
}

// Prim step: best candidate is the smallest (distance, index) pair, so ties
// break deterministically by point index.
fn argmin_candidate(best: &[(LogScalar, usize)], in_tree: &[bool]) -> usize {
    let fold = |acc: Option<usize>, j: usize| -> Option<usize> {
        if in_tree[j] {
            return acc;
        }
        match acc {
            None => Some(j),
            Some(k) => {
                if (best[j].0, j) < (best[k].0, k) {
                    Some(j)
                } else {
                    Some(k)
                }
            }
        }
    };

    #[cfg(feature = "parallel")]
    {
        if best.len() >= 2048 {
            return (0..best.len())
                .into_par_iter()
                .fold(|| None, |acc, j| fold(acc, j))
                .reduce(
                    || None,
                    |a, b| match (a, b) {
                        (None, x) | (x, None) => x,
                        (Some(j), Some(k)) => {
                            if (best[j].0, j) < (best[k].0, k) {
                                Some(j)
                            } else {
                                Some(k)
                            }
                        }
                    },
                )
                .expect("some point is outside the tree");
        }
    }
    (0..best.len()).fold(None, fold).expect("some point is outside the tree")
}

/// O(n^2) Prim over the complete graph with exact log-domain weights.
///
/// Ties are broken by point index, so the result is deterministic even for
/// degenerate pointsets. For collinear inputs the edges come out as exactly
/// the consecutive pairs.
pub fn euclidean_mst(points: &[Point]) -> Result<Tree, MstError> {
    euclidean_mst_impl(points, true)
}

/// Sequential reference implementation of [`euclidean_mst`].
pub fn euclidean_mst_seq(points: &[Point]) -> Result<Tree, MstError> {
    euclidean_mst_impl(points, false)
}

fn euclidean_mst_impl(points: &[Point], parallel: bool) -> Result<Tree, MstError> {
    let n = points.len();
    if n < 2 {
        return Err(MstError::TooFewPoints);
    }
    if let Some(xy) = crate::geom::native_points(points) {
        return euclidean_mst_native(points, &xy, parallel);
    }

    let mut in_tree = vec![false; n];
    // (best distance into the tree, tree endpoint achieving it)
    let mut best: Vec<(LogScalar, usize)> = (0..n).map(|_| (LogScalar::ZERO, 0)).collect();
    in_tree[0] = true;

    let relax = |best: &mut Vec<(LogScalar, usize)>, in_tree: &[bool], u: usize| {
        let pu = points[u];
        let update = |(j, slot): (usize, &mut (LogScalar, usize))| {
            if in_tree[j] {
                return;
            }
            let d = distance(pu, points[j]);
            if d < slot.0 || (d == slot.0 && u < slot.1) {
                *slot = (d, u);
            }
        };
        #[cfg(feature = "parallel")]
        {
            if parallel && best.len() >= 2048 {
                best.par_iter_mut().enumerate().for_each(|(j, slot)| update((j, slot)));
                return;
            }
        }
        let _ = parallel;
        best.iter_mut().enumerate().for_each(update);
    };

    for j in 1..n {
        best[j] = (distance(points[0], points[j]), 0);
        if best[j].0.is_zero() {
            return Err(MstError::DuplicatePoints);
        }
    }

    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let u = argmin_candidate(&best, &in_tree);
        if best[u].0.is_zero() {
            return Err(MstError::DuplicatePoints);
        }
        let parent = best[u].1;
        edges.push((parent.min(u), parent.max(u)));
        in_tree[u] = true;
        relax(&mut best, &in_tree, u);
    }

    edges.sort_unstable();
    Ok(Tree { edges, root: 0 })
}

// Same Prim, squared f64 distances; zero candidates are re-checked exactly
// before being declared duplicates.
fn euclidean_mst_native(
    points: &[Point],
    xy: &[(f64, f64)],
    parallel: bool,
) -> Result<Tree, MstError> {
    let n = xy.len();
    let mut in_tree = vec![false; n];
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); n];
    in_tree[0] = true;

    let relax = |best: &mut Vec<(f64, usize)>, in_tree: &[bool], u: usize| {
        let (ux, uy) = xy[u];
        let update = |(j, slot): (usize, &mut (f64, usize))| {
            if in_tree[j] {
                return;
            }
            let d2 = crate::geom::dist2(ux, uy, xy[j].0, xy[j].1);
            if d2 < slot.0 || (d2 == slot.0 && u < slot.1) {
                *slot = (d2, u);
            }
        };
        #[cfg(feature = "parallel")]
        {
            if parallel && best.len() >= 2048 {
                best.par_iter_mut().enumerate().for_each(|(j, slot)| update((j, slot)));
                return;
            }
        }
        let _ = parallel;
        best.iter_mut().enumerate().for_each(update);
    };

    for j in 1..n {
        best[j] = (crate::geom::dist2(xy[0].0, xy[0].1, xy[j].0, xy[j].1), 0);
    }

    let argmin = |best: &[(f64, usize)], in_tree: &[bool]| -> usize {
        let mut arg = usize::MAX;
        for j in 0..best.len() {
            if !in_tree[j] && (arg == usize::MAX || (best[j].0, j) < (best[arg].0, arg)) {
                arg = j;
            }
        }
        arg
    };

    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let u = argmin(&best, &in_tree);
        if best[u].0 == 0.0 && distance(points[u], points[best[u].1]).is_zero() {
            return Err(MstError::DuplicatePoints);
        }
        let parent = best[u].1;
        edges.push((parent.min(u), parent.max(u)));
        in_tree[u] = true;
        relax(&mut best, &in_tree, u);
    }

    edges.sort_unstable();
    Ok(Tree { edges, root: 0 })
}

/// Orient every tree edge towards `sink`: each non-sink node gets exactly one
/// outgoing link, pointing at its parent on the path to the sink. Link ids
/// run over non-sink nodes in increasing node order.
pub fn orient_to_sink(tree: &Tree, sink: usize, points: &[Point]) -> Result<Vec<Link>, MstError> {
    let n = points.len();
    if sink >= n {
        return Err(MstError::SinkNotInTree);
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &tree.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![usize::MAX; n];
    let mut stack = vec![sink];
    parent[sink] = sink;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    if parent.iter().any(|&p| p == usize::MAX) {
        return Err(MstError::SinkNotInTree);
    }

    let mut links = Vec::with_capacity(n - 1);
    for v in 0..n {
        if v == sink {
            continue;
        }
        let id = links.len();
        links.push(
            Link::new(id, points[v], points[parent[v]]).expect("tree edges have positive length"),
        );
    }
    Ok(links)
}

/// Node indices (sender, receiver) in the same order as [`orient_to_sink`].
pub fn oriented_index_pairs(tree: &Tree, sink: usize, n: usize) -> Result<Vec<(usize, usize)>, MstError> {
    if sink >= n {
        return Err(MstError::SinkNotInTree);
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &tree.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![usize::MAX; n];
    let mut stack = vec![sink];
    parent[sink] = sink;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    if parent.iter().any(|&p| p == usize::MAX) {
        return Err(MstError::SinkNotInTree);
    }
    Ok((0..n).filter(|&v| v != sink).map(|v| (v, parent[v])).collect())
}
