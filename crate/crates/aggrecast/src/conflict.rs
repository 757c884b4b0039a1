//! The family of conflict graphs G_f over link sets.
//!
//! Two links are f-independent when d(i,j)/l_min > f(l_max/l_min) for a
//! positive non-decreasing sub-linear f, and f-conflicting otherwise. Three
//! instantiations are used by the schedulers: a constant f, a power f for
//! oblivious power schemes, and a log-power f for arbitrary power control.
//! The predicate only sees ratios, so everything evaluates in the log domain.

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::geom::{link_distance, Link};
use crate::logdomain::LogScalar;

#[derive(Debug, Error, PartialEq)]
pub enum ConflictError {
    #[error("invalid conflict spec: {0}")]
    InvalidSpec(String),
}

/// Which sub-linear f the conflict predicate uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConflictSpec {
    /// f(x) = gamma
    Const { gamma: f64 },
    /// f(x) = gamma * x^delta, delta in (0,1)
    Power { gamma: f64, delta: f64 },
    /// f(x) = gamma * max(1, (ln x)^(2/(alpha-2)))
    Log { gamma: f64, alpha: f64 },
}

impl ConflictSpec {
    pub fn constant(gamma: f64) -> Result<Self, ConflictError> {
        if gamma > 0.0 {
            Ok(ConflictSpec::Const { gamma })
        } else {
            Err(ConflictError::InvalidSpec(format!("gamma must be > 0, got {gamma}")))
        }
    }

    pub fn power(gamma: f64, delta: f64) -> Result<Self, ConflictError> {
        if !(gamma > 0.0) {
            return Err(ConflictError::InvalidSpec(format!("gamma must be > 0, got {gamma}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ConflictError::InvalidSpec(format!("delta must lie in (0,1), got {delta}")));
        }
        Ok(ConflictSpec::Power { gamma, delta })
    }

    pub fn log(gamma: f64, alpha: f64) -> Result<Self, ConflictError> {
        if !(gamma > 0.0) {
            return Err(ConflictError::InvalidSpec(format!("gamma must be > 0, got {gamma}")));
        }
        if !(alpha > 2.0) {
            return Err(ConflictError::InvalidSpec(format!("alpha must be > 2, got {alpha}")));
        }
        Ok(ConflictSpec::Log { gamma, alpha })
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            ConflictSpec::Const { gamma }
            | ConflictSpec::Power { gamma, .. }
            | ConflictSpec::Log { gamma, .. } => gamma,
        }
    }

    /// The same spec with gamma replaced.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        match *self {
            ConflictSpec::Const { .. } => ConflictSpec::Const { gamma },
            ConflictSpec::Power { delta, .. } => ConflictSpec::Power { gamma, delta },
            ConflictSpec::Log { alpha, .. } => ConflictSpec::Log { gamma, alpha },
        }
    }
}

/// Evaluate f at a length ratio x >= 1 (log-domain argument and result).
pub fn f_value(spec: &ConflictSpec, x: LogScalar) -> LogScalar {
    debug_assert!(x >= LogScalar::ONE, "f is defined on [1, inf)");
    match *spec {
        ConflictSpec::Const { gamma } => LogScalar::from_value(gamma),
        ConflictSpec::Power { gamma, delta } => {
            LogScalar::from_value(gamma) * x.powf(delta)
        }
        ConflictSpec::Log { gamma, alpha } => {
            let lx = x.ln();
            let clamped = if lx <= 1.0 { 1.0 } else { lx.powf(2.0 / (alpha - 2.0)) };
            LogScalar::from_value(gamma * clamped)
        }
    }
}

/// The f-conflict predicate: NOT (d(i,j)/l_min > f(l_max/l_min)).
pub fn is_conflicting(i: &Link, j: &Link, spec: &ConflictSpec) -> bool {
    debug_assert!(i.id != j.id, "conflict predicate is only defined for distinct links");
    let l_min = i.length.min(j.length);
    let l_max = i.length.max(j.length);
    let d = link_distance(i, j);
    let threshold = l_min * f_value(spec, l_max / l_min);
    d <= threshold
}

const DENSE_LIMIT: usize = 1 << 14;

#[derive(Clone, Debug)]
enum Adjacency {
    /// One bitset row per vertex.
    Dense { words_per_row: usize, bits: Vec<u64> },
    /// Sorted neighbor lists.
    Sparse(Vec<Vec<u32>>),
}

/// Symmetric, irreflexive conflict relation over a fixed link set.
#[derive(Clone, Debug)]
pub struct ConflictGraph {
    n: usize,
    spec: Option<ConflictSpec>,
    adj: Adjacency,
    degrees: Vec<u32>,
}

impl ConflictGraph {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The f the graph was built from; `None` for designated edge lists.
    pub fn spec(&self) -> Option<&ConflictSpec> {
        self.spec.as_ref()
    }

    /// A graph given directly by its edges (protocol-style designated
    /// conflict relations).
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a < n && b < n && a != b, "bad designated edge ({a},{b})");
            rows[a].push(b as u32);
            rows[b].push(a as u32);
        }
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
        }
        let degrees = rows.iter().map(|r| r.len() as u32).collect();
        ConflictGraph { n, spec: None, adj: Adjacency::Sparse(rows), degrees }
    }

    pub fn conflicting(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        match &self.adj {
            Adjacency::Dense { words_per_row, bits } => {
                bits[i * words_per_row + j / 64] >> (j % 64) & 1 == 1
            }
            Adjacency::Sparse(rows) => rows[i].binary_search(&(j as u32)).is_ok(),
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i] as usize
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        match &self.adj {
            Adjacency::Dense { words_per_row, bits } => {
                let row = &bits[i * words_per_row..(i + 1) * words_per_row];
                let mut out = Vec::with_capacity(self.degrees[i] as usize);
                for (w, &word) in row.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let b = word.trailing_zeros() as usize;
                        out.push(w * 64 + b);
                        word &= word - 1;
                    }
                }
                out
            }
            Adjacency::Sparse(rows) => rows[i].iter().map(|&j| j as usize).collect(),
        }
    }

    pub fn num_edges(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).sum::<usize>() / 2
    }

    /// All edges (i < j), for export.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for i in 0..self.n {
            for j in self.neighbors(i) {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// True when `set` is pairwise non-conflicting.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        for (k, &i) in set.iter().enumerate() {
            for &j in &set[k + 1..] {
                if self.conflicting(i, j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Build G_f(L) by an O(n^2) pair scan, parallel over rows when the
/// `parallel` feature is on.
pub fn build_conflict_graph(links: &[Link], spec: &ConflictSpec) -> ConflictGraph {
    build_impl(links, spec, true)
}

/// Sequential reference implementation of [`build_conflict_graph`].
pub fn build_conflict_graph_seq(links: &[Link], spec: &ConflictSpec) -> ConflictGraph {
    build_impl(links, spec, false)
}

fn build_impl(links: &[Link], spec: &ConflictSpec, parallel: bool) -> ConflictGraph {
    let n = links.len();
    let native = crate::geom::native_links(links);
    let predicate = |i: usize, j: usize| -> bool {
        match &native {
            Some(nat) => native_conflicting(&nat[i], &nat[j], spec),
            None => is_conflicting(&links[i], &links[j], spec),
        }
    };
    if n <= DENSE_LIMIT {
        let words_per_row = n.div_ceil(64);
        let build_row = |i: usize| -> (Vec<u64>, u32) {
            let mut row = vec![0u64; words_per_row];
            let mut deg = 0u32;
            for j in 0..n {
                if j != i && predicate(i, j) {
                    row[j / 64] |= 1 << (j % 64);
                    deg += 1;
                }
            }
            (row, deg)
        };
        let rows: Vec<(Vec<u64>, u32)> = run_rows(n, parallel, build_row);
        let mut bits = Vec::with_capacity(n * words_per_row);
        let mut degrees = Vec::with_capacity(n);
        for (row, deg) in rows {
            bits.extend_from_slice(&row);
            degrees.push(deg);
        }
        ConflictGraph { n, spec: Some(*spec), adj: Adjacency::Dense { words_per_row, bits }, degrees }
    } else {
        let build_row = |i: usize| -> Vec<u32> {
            (0..n).filter(|&j| j != i && predicate(i, j)).map(|j| j as u32).collect()
        };
        let rows: Vec<Vec<u32>> = run_rows(n, parallel, build_row);
        let degrees = rows.iter().map(|r| r.len() as u32).collect();
        ConflictGraph { n, spec: Some(*spec), adj: Adjacency::Sparse(rows), degrees }
    }
}

/// The same predicate as [`is_conflicting`] over pre-projected f64 links;
/// squared distances avoid the sqrt and the constant case avoids logs
/// entirely.
fn native_conflicting(a: &crate::geom::NativeLink, b: &crate::geom::NativeLink, spec: &ConflictSpec) -> bool {
    let d2 = crate::geom::native_link_dist2(a, b);
    let (lmin2, ln_min, ln_max) = if (a.len2, a.ln_len) <= (b.len2, b.ln_len) {
        (a.len2, a.ln_len, b.ln_len)
    } else {
        (b.len2, b.ln_len, a.ln_len)
    };
    match *spec {
        ConflictSpec::Const { gamma } => d2 <= gamma * gamma * lmin2,
        ConflictSpec::Power { gamma, delta } => {
            // compare in logs so huge length ratios cannot overflow
            d2.ln() <= 2.0 * (ln_min + gamma.ln() + delta * (ln_max - ln_min))
        }
        ConflictSpec::Log { gamma, alpha } => {
            let r = ln_max - ln_min;
            let f_ln = gamma.ln() + if r <= 1.0 { 0.0 } else { (2.0 / (alpha - 2.0)) * r.ln() };
            d2.ln() <= 2.0 * (ln_min + f_ln)
        }
    }
}

fn run_rows<T: Send>(n: usize, parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if parallel && n >= 64 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}
