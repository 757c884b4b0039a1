//! Planar points, directed links and the model parameters shared by every
//! other module.

use thiserror::Error;

use crate::logdomain::{log_sum_exp, LogScalar, SignedLog};

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("link sender and receiver coincide")]
    ZeroLengthLink,
    #[error("sender of interfering link coincides with receiver of victim link")]
    CoLocated,
    #[error("diversity of an empty set is undefined")]
    EmptySet,
}

/// A point of the plane with signed log-magnitude coordinates.
///
/// `y` stays exactly zero for line instances.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Point {
    pub x: SignedLog,
    pub y: SignedLog,
}

impl Point {
    pub fn new(x: SignedLog, y: SignedLog) -> Self {
        Point { x, y }
    }

    pub fn from_f64(x: f64, y: f64) -> Self {
        Point { x: SignedLog::from_f64(x), y: SignedLog::from_f64(y) }
    }

    /// A point on the x-axis.
    pub fn on_line(x: SignedLog) -> Self {
        Point { x, y: SignedLog::ZERO }
    }
}

// Quadratic-time algorithms (MST, conflict scans, refinement) take a native
// f64 shortcut when every magnitude fits comfortably: squared distances and
// length ratios then stay within f64 range, and the decisions agree with the
// log-domain path up to rounding. The exact log-domain path remains the
// reference and is always used for SINR verification.
const NATIVE_LN_LIMIT: f64 = 230.0;

pub(crate) fn native_xy(p: Point) -> Option<(f64, f64)> {
    let ok = |c: crate::logdomain::SignedLog| c.is_zero() || c.abs().ln().abs() <= NATIVE_LN_LIMIT;
    if ok(p.x) && ok(p.y) {
        Some((p.x.to_f64(), p.y.to_f64()))
    } else {
        None
    }
}

pub(crate) fn native_points(points: &[Point]) -> Option<Vec<(f64, f64)>> {
    points.iter().map(|&p| native_xy(p)).collect()
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct NativeLink {
    pub sx: f64,
    pub sy: f64,
    pub rx: f64,
    pub ry: f64,
    pub len2: f64,
    pub ln_len: f64,
}

pub(crate) fn native_links(links: &[Link]) -> Option<Vec<NativeLink>> {
    links
        .iter()
        .map(|l| {
            if l.length.ln().abs() > NATIVE_LN_LIMIT {
                return None;
            }
            let (sx, sy) = native_xy(l.sender)?;
            let (rx, ry) = native_xy(l.receiver)?;
            let len = l.length.to_f64();
            Some(NativeLink { sx, sy, rx, ry, len2: len * len, ln_len: l.length.ln() })
        })
        .collect()
}

#[inline]
pub(crate) fn dist2(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let dx = ax - bx;
    let dy = ay - by;
    dx * dx + dy * dy
}

/// Squared minimum distance between the nodes of two native links.
#[inline]
pub(crate) fn native_link_dist2(a: &NativeLink, b: &NativeLink) -> f64 {
    dist2(a.sx, a.sy, b.sx, b.sy)
        .min(dist2(a.sx, a.sy, b.rx, b.ry))
        .min(dist2(a.rx, a.ry, b.sx, b.sy))
        .min(dist2(a.rx, a.ry, b.rx, b.ry))
}

/// Euclidean distance, computed entirely in the log domain.
pub fn distance(p: Point, q: Point) -> LogScalar {
    let dx = p.x.sub(q.x).abs();
    let dy = p.y.sub(q.y).abs();
    if dy.is_zero() {
        return dx;
    }
    if dx.is_zero() {
        return dy;
    }
    // sqrt(dx^2 + dy^2)
    LogScalar::from_ln(0.5 * log_sum_exp(2.0 * dx.ln(), 2.0 * dy.ln()))
}

/// A directed communication link from `sender` to `receiver`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Link {
    pub id: usize,
    pub sender: Point,
    pub receiver: Point,
    pub length: LogScalar,
}

impl Link {
    pub fn new(id: usize, sender: Point, receiver: Point) -> Result<Self, GeomError> {
        let length = distance(sender, receiver);
        if length.is_zero() {
            return Err(GeomError::ZeroLengthLink);
        }
        Ok(Link { id, sender, receiver, length })
    }

    /// The same link pointing the other way.
    pub fn reversed(self) -> Self {
        Link { id: self.id, sender: self.receiver, receiver: self.sender, length: self.length }
    }
}

/// Minimum distance between the nodes of two links: the min over the four
/// endpoint pairs. Zero when the links share a node.
pub fn link_distance(i: &Link, j: &Link) -> LogScalar {
    distance(i.sender, j.sender)
        .min(distance(i.sender, j.receiver))
        .min(distance(i.receiver, j.sender))
        .min(distance(i.receiver, j.receiver))
}

/// The directed sender-to-receiver distance d(s_j, r_i), the denominator of
/// the interference link j imposes on link i.
pub fn directed_sender_distance(j: &Link, i: &Link) -> Result<LogScalar, GeomError> {
    let d = distance(j.sender, i.receiver);
    if d.is_zero() {
        return Err(GeomError::CoLocated);
    }
    Ok(d)
}

/// Which pairwise ratio a diversity statistic ranges over.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiversityVariant {
    /// Furthest over closest distance between nodes.
    Node,
    /// Longest over shortest link length.
    Link,
}

/// Ratio of the longest to the shortest link length in `links`.
pub fn link_length_diversity(links: &[Link]) -> Result<LogScalar, GeomError> {
    if links.is_empty() {
        return Err(GeomError::EmptySet);
    }
    let mut lo = links[0].length;
    let mut hi = links[0].length;
    for l in &links[1..] {
        lo = lo.min(l.length);
        hi = hi.max(l.length);
    }
    Ok(hi / lo)
}

/// Ratio of the furthest to the closest pairwise distance among `points`.
pub fn node_length_diversity(points: &[Point]) -> Result<LogScalar, GeomError> {
    if points.len() < 2 {
        return Err(GeomError::EmptySet);
    }
    if let Some(xy) = native_points(points) {
        let mut lo2 = f64::INFINITY;
        let mut hi2 = 0.0f64;
        for a in 0..xy.len() {
            for b in (a + 1)..xy.len() {
                let d2 = dist2(xy[a].0, xy[a].1, xy[b].0, xy[b].1);
                lo2 = lo2.min(d2);
                hi2 = hi2.max(d2);
            }
        }
        assert!(lo2 > 0.0, "duplicate points have zero pairwise distance");
        return Ok(LogScalar::from_ln(0.5 * (hi2.ln() - lo2.ln())));
    }
    let mut lo = LogScalar::ZERO;
    let mut hi = LogScalar::ZERO;
    let mut first = true;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let d = distance(points[a], points[b]);
            if first {
                lo = d;
                hi = d;
                first = false;
            } else {
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
    }
    assert!(!lo.is_zero(), "duplicate points have zero pairwise distance");
    Ok(hi / lo)
}

/// Physical-model parameters: path loss alpha, SINR threshold beta, ambient
/// noise, interference-limited slack epsilon, and the oblivious exponent tau.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub noise: LogScalar,
    pub epsilon: f64,
    pub tau: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: 3.0,
            beta: 1.0,
            noise: LogScalar::ZERO,
            epsilon: 0.5,
            tau: 0.5,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 2.0) {
            return Err(format!("alpha must be > 2, got {}", self.alpha));
        }
        if !(self.beta > 0.0) {
            return Err(format!("beta must be > 0, got {}", self.beta));
        }
        if !(self.epsilon > 0.0) {
            return Err(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(format!("tau must lie in (0,1), got {}", self.tau));
        }
        Ok(())
    }

    /// min(tau, 1 - tau), the exponent the chain constructions grow by.
    pub fn tau_prime(&self) -> f64 {
        self.tau.min(1.0 - self.tau)
    }
}
