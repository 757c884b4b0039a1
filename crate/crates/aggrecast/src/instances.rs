//! Generators for random and adversarial instances, including exact
//! log-domain reconstructions of the lower-bound pointsets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{Link, ModelParams, Point};
use crate::logdomain::{LogScalar, SignedLog};
use crate::sinr::{is_p_feasible, PowerAssignment};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("x too small: {0}")]
    XTooSmall(String),
    #[error("tau = {0} outside the supported range")]
    TauOutOfRange(f64),
    #[error("depth {requested} exceeds the cap of {cap}: the pointset would explode ({points} points)")]
    DepthTooLarge { requested: usize, cap: usize, points: u64 },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

/// A pointset plus a directed link set and model parameters. Trees are
/// built downstream unless the construction designates one.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub label: String,
    pub params: ModelParams,
    pub points: Vec<Point>,
    /// Directed (sender, receiver) point indices; link id = position.
    pub links: Vec<(usize, usize)>,
    /// A non-MST spanning tree the construction wants scheduled.
    pub designated_tree: Option<Vec<(usize, usize)>>,
    /// A protocol-style conflict relation over `links`, as index pairs.
    pub designated_conflicts: Option<Vec<(usize, usize)>>,
}

impl Instance {
    pub fn validate(&self) -> Result<(), GenError> {
        self.params.validate().map_err(GenError::InvalidParams)?;
        let n = self.points.len();
        for (a, pa) in self.points.iter().enumerate() {
            for pb in self.points.iter().skip(a + 1) {
                if pa == pb {
                    return Err(GenError::InvalidParams(format!("duplicate point at index {a}")));
                }
            }
        }
        let check = |pairs: &[(usize, usize)]| -> Result<(), GenError> {
            for &(s, r) in pairs {
                if s >= n || r >= n || s == r {
                    return Err(GenError::InvalidParams(format!("bad link ({s},{r})")));
                }
            }
            Ok(())
        };
        check(&self.links)?;
        if let Some(t) = &self.designated_tree {
            check(t)?;
        }
        Ok(())
    }

    pub fn link_objects_of(&self, pairs: &[(usize, usize)]) -> Vec<Link> {
        pairs
            .iter()
            .enumerate()
            .map(|(id, &(s, r))| {
                Link::new(id, self.points[s], self.points[r]).expect("validated links")
            })
            .collect()
    }

    pub fn link_objects(&self) -> Vec<Link> {
        self.link_objects_of(&self.links)
    }

    pub fn designated_tree_links(&self) -> Option<Vec<Link>> {
        self.designated_tree.as_ref().map(|t| self.link_objects_of(t))
    }
}

/// n points i.i.d. uniform in the axis-aligned square of the given side.
pub fn gen_uniform(n: usize, side: LogScalar, seed: u64) -> Result<Instance, GenError> {
    if n < 2 {
        return Err(GenError::InvalidParams(format!("n must be >= 2, got {n}")));
    }
    if side.is_zero() {
        return Err(GenError::InvalidParams("side must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let u: f64 = rng.gen();
        let v: f64 = rng.gen();
        let p = Point::new(
            SignedLog::positive(LogScalar::from_value(u) * side),
            SignedLog::positive(LogScalar::from_value(v) * side),
        );
        // duplicates have probability ~0 but would poison the MST
        if !points.contains(&p) {
            points.push(p);
        }
    }
    Ok(Instance {
        label: format!("uniform(n={n},seed={seed})"),
        params: ModelParams::default(),
        points,
        links: Vec::new(),
        designated_tree: None,
        designated_conflicts: None,
    })
}

/// Rejection-sampled uniform points in a disk of the given radius.
pub fn gen_uniform_disk(n: usize, radius: LogScalar, seed: u64) -> Result<Instance, GenError> {
    if n < 2 {
        return Err(GenError::InvalidParams(format!("n must be >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let u: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let v: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        if u * u + v * v > 1.0 {
            continue;
        }
        let p = Point::new(
            SignedLog::from_f64(u).scale(radius),
            SignedLog::from_f64(v).scale(radius),
        );
        if !points.contains(&p) {
            points.push(p);
        }
    }
    let mut inst = gen_uniform(2, LogScalar::ONE, seed)?;
    inst.label = format!("uniform-disk(n={n},seed={seed})");
    inst.points = points;
    Ok(inst)
}

/// Smallest admissible x for the doubly-exponential chain:
/// max(2, (2 / beta^(1/alpha))^(1/tau')).
pub fn chain_x_lower_bound(tau: f64, params: &ModelParams) -> f64 {
    let tau_prime = tau.min(1.0 - tau);
    let b = 2.0 / params.beta.powf(1.0 / params.alpha);
    2.0f64.max(b.powf(1.0 / tau_prime))
}

fn chain_points(n: usize, tau_prime: f64, x: f64) -> Vec<Point> {
    let ln_x = x.ln();
    let mut points = Vec::with_capacity(n);
    let mut pos = SignedLog::ZERO;
    points.push(Point::on_line(pos));
    for t in 1..n {
        let gap = LogScalar::from_ln((1.0 / tau_prime).powi(t as i32) * ln_x);
        pos = pos.add(SignedLog::positive(gap));
        points.push(Point::on_line(pos));
    }
    points
}

/// Collinear points with consecutive gaps x^((tau')^-t), t = 1..n-1, where
/// tau' = min(tau, 1-tau). No two directed links over these points are
/// simultaneously P_tau-feasible once x clears [`chain_x_lower_bound`].
pub fn gen_doubly_exp_chain(n: usize, tau: f64, x: f64) -> Result<Instance, GenError> {
    let mut params = ModelParams::default();
    params.tau = tau;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(GenError::TauOutOfRange(tau));
    }
    if n < 2 {
        return Err(GenError::InvalidParams(format!("n must be >= 2, got {n}")));
    }
    let bound = chain_x_lower_bound(tau, &params);
    if x <= bound {
        return Err(GenError::XTooSmall(format!(
            "chain requires x > max(2, (2/beta^(1/alpha))^(1/tau')) = {bound}, got {x}"
        )));
    }
    Ok(gen_doubly_exp_chain_unchecked(n, tau, x))
}

/// The chain pointset without the x bound check, for probing how the
/// pairwise-infeasibility property degrades below the bound.
pub fn gen_doubly_exp_chain_unchecked(n: usize, tau: f64, x: f64) -> Instance {
    let mut params = ModelParams::default();
    params.tau = tau;
    Instance {
        label: format!("chain(n={n},tau={tau},x={x})"),
        params,
        points: chain_points(n, tau.min(1.0 - tau), x),
        links: Vec::new(),
        designated_tree: None,
        designated_conflicts: None,
    }
}

/// The five-node example network: sensors a, b feed c, d which feed the
/// sink, links conflicting exactly when they share an endpoint. Coordinates
/// are chosen so the tree is the unique MST.
pub fn gen_fig1_example() -> Instance {
    // indices: 0 = a, 1 = b, 2 = c, 3 = d, 4 = sink
    let points = vec![
        Point::from_f64(-2.2, 1.0),
        Point::from_f64(-2.2, -1.0),
        Point::from_f64(-1.0, 1.0),
        Point::from_f64(-1.0, -1.0),
        Point::from_f64(0.0, 0.0),
    ];
    let links = vec![(0, 2), (1, 3), (2, 4), (3, 4)];
    let conflicts = vec![(0, 2), (1, 3), (2, 3)];
    Instance {
        label: "fig1".into(),
        params: ModelParams::default(),
        points,
        links: links.clone(),
        designated_tree: Some(links),
        designated_conflicts: Some(conflicts),
    }
}

/// Per-level metadata of the recursive lower-bound construction.
#[derive(Clone, Copy, Debug)]
pub struct LowerBoundLevel {
    pub depth: usize,
    pub n_points: usize,
    /// Copies of the previous level concatenated at this level (1 at depth 1).
    pub k_copies: u64,
    /// ln of rho(R) = min over links of (l_i / dhat_i)^alpha.
    pub rho_ln: f64,
    /// ln of the link-length diversity (longest gap over shortest gap).
    pub delta_ln: f64,
}

/// Output of [`gen_mst_lowerbound`]: the instance plus the per-level
/// rho, k and diversity values the construction is built from.
///
/// The consecutive gaps are the construction's exact representation; explicit
/// positions are prefix sums of the form "tower + 1" which a log-f64
/// coordinate cannot resolve once the diversity passes ~e^36, so deep levels
/// materialize with collapsed points and `points_exact` false. All checkable
/// inequalities evaluate from the gaps.
#[derive(Clone, Debug)]
pub struct LowerBoundConstruction {
    pub instance: Instance,
    pub levels: Vec<LowerBoundLevel>,
    /// Consecutive MST gaps, left to right; gap 0 is the long link.
    pub gaps: Vec<LogScalar>,
    /// Whether the materialized points resolve every gap.
    pub points_exact: bool,
}

const LOWERBOUND_DEPTH_CAP: usize = 4;
const LOWERBOUND_POINT_CAP: u64 = 400_000;

fn rho_of_gaps(gaps: &[LogScalar], alpha: f64) -> f64 {
    // dhat of gap i is the distance from its right endpoint to the leftmost
    // point, i.e. the prefix sum through i
    let mut prefix = LogScalar::ZERO;
    let mut rho = f64::INFINITY;
    for &g in gaps {
        prefix = prefix + g;
        rho = rho.min(alpha * (g.ln() - prefix.ln()));
    }
    rho
}

fn delta_of_gaps(gaps: &[LogScalar]) -> f64 {
    let lo = gaps.iter().min().unwrap();
    let hi = gaps.iter().max().unwrap();
    hi.ln() - lo.ln()
}

/// The recursive collinear family whose MST needs ever more slots: level 1 is
/// two nodes at distance 1; level t+1 concatenates k = ceil(c/rho(R_t))
/// scaled copies of level t (copy s scaled so its longest link equals the
/// diameter of the copies before it) and prepends a long link spanning the
/// whole concatenation.
pub fn gen_mst_lowerbound(depth: usize, c: f64) -> Result<LowerBoundConstruction, GenError> {
    if depth < 1 {
        return Err(GenError::InvalidParams("depth must be >= 1".into()));
    }
    if depth > LOWERBOUND_DEPTH_CAP {
        return Err(GenError::DepthTooLarge {
            requested: depth,
            cap: LOWERBOUND_DEPTH_CAP,
            points: u64::MAX,
        });
    }
    if !(c > 0.0) {
        return Err(GenError::InvalidParams(format!("c must be positive, got {c}")));
    }
    let params = ModelParams::default();
    let alpha = params.alpha;

    // a level is its list of consecutive gaps, left to right
    let mut gaps: Vec<LogScalar> = vec![LogScalar::ONE];
    let mut levels = vec![LowerBoundLevel {
        depth: 1,
        n_points: 2,
        k_copies: 1,
        rho_ln: rho_of_gaps(&gaps, alpha),
        delta_ln: 0.0,
    }];

    for t in 2..=depth {
        let rho_ln = levels.last().unwrap().rho_ln;
        let k_float = c * (-rho_ln).exp();
        if !(k_float >= 2.0) {
            return Err(GenError::InvalidParams(format!(
                "c = {c} gives k = {k_float:.3} < 2 at depth {t}; pick a larger c"
            )));
        }
        if k_float > LOWERBOUND_POINT_CAP as f64 {
            return Err(GenError::DepthTooLarge {
                requested: depth,
                cap: LOWERBOUND_DEPTH_CAP,
                points: u64::MAX,
            });
        }
        let k = k_float.ceil() as u64;
        let projected = k
            .checked_mul(gaps.len() as u64)
            .and_then(|p| p.checked_add(2))
            .unwrap_or(u64::MAX);
        if projected > LOWERBOUND_POINT_CAP {
            return Err(GenError::DepthTooLarge {
                requested: depth,
                cap: LOWERBOUND_DEPTH_CAP,
                points: projected,
            });
        }

        let max_gap = *gaps.iter().max().unwrap();
        let base_diam: LogScalar = gaps.iter().copied().sum();
        let mut joined: Vec<LogScalar> = Vec::with_capacity((k as usize) * gaps.len() + 1);
        // copy 1 is identical
        joined.extend_from_slice(&gaps);
        let mut extent = base_diam;
        for _s in 2..=k {
            let scale = extent / max_gap;
            for &g in &gaps {
                joined.push(g * scale);
            }
            extent = extent + base_diam * scale;
        }
        // the long link G spans the concatenation and sits leftmost
        let mut next = Vec::with_capacity(joined.len() + 1);
        next.push(extent);
        next.extend(joined);
        gaps = next;
        levels.push(LowerBoundLevel {
            depth: t,
            n_points: gaps.len() + 1,
            k_copies: k,
            rho_ln: rho_of_gaps(&gaps, alpha),
            delta_ln: delta_of_gaps(&gaps),
        });
    }

    let mut pos = SignedLog::ZERO;
    let mut points = Vec::with_capacity(gaps.len() + 1);
    let mut points_exact = true;
    points.push(Point::on_line(pos));
    for &g in &gaps {
        let next = pos.add(SignedLog::positive(g));
        if next == pos {
            points_exact = false;
        }
        pos = next;
        points.push(Point::on_line(pos));
    }

    Ok(LowerBoundConstruction {
        instance: Instance {
            label: format!("mst-hard(depth={depth},c={c})"),
            params,
            points,
            links: Vec::new(),
            designated_tree: None,
            designated_conflicts: None,
        },
        levels,
        gaps,
        points_exact,
    })
}

/// Output of [`gen_suboptimal_mst`]: the designated tree splits into the
/// long-link slot and the connector slot, and `e_points` are the receiver
/// nodes whose consecutive gaps form the embedded doubly-exponential chain.
#[derive(Clone, Debug)]
pub struct SuboptimalMst {
    pub instance: Instance,
    /// Link ids (within the designated tree) of the long links.
    pub long_slot: Vec<usize>,
    /// Link ids of the connector links.
    pub connector_slot: Vec<usize>,
    /// Point indices of the receiver chain r_1 .. r_m.
    pub e_points: Vec<usize>,
    /// 1 - 4t + 4t^2 - 3t^3 + t^4 at t = min(tau, 1-tau); positive values
    /// make the connector interferences decay for every large x.
    pub gamma_decay: f64,
}

/// Raw relative interference ln I_{P_tau}(j, i) between directed links given
/// as (sender, receiver) points; +inf when co-located.
fn rel_ln(
    j: (Point, Point),
    i: (Point, Point),
    tau: f64,
    alpha: f64,
) -> f64 {
    use crate::geom::distance;
    let d = distance(j.0, i.1);
    if d.is_zero() {
        return f64::INFINITY;
    }
    let lj = distance(j.0, j.1);
    let li = distance(i.0, i.1);
    tau * alpha * lj.ln() + (1.0 - tau) * alpha * li.ln() - alpha * d.ln()
}

/// The family of line networks whose designated (non-MST) spanning tree is
/// schedulable in two slots while the MST of the same points needs one slot
/// per chain link.
///
/// Segment k carries a long link of length L_k (L_1 = x, L_{k+1} =
/// L_k^(1/t')) pointing right, and consecutive segments are joined by a
/// leftward connector of length L_{k+1}^t' * L_k^(1 - t' + t'^2), where t' =
/// min(tau, 1-tau). For tau >= 3/5 every link direction is reversed. The
/// SINR threshold beta is chosen per instance so that both designated slots
/// verify while every pair of links over the receiver chain stays
/// infeasible; the generator validates all of the construction's
/// inequalities numerically and names the first one that fails.
pub fn gen_suboptimal_mst(tau: f64, x: f64, segments: usize) -> Result<SuboptimalMst, GenError> {
    let reversed = if tau >= 0.6 && tau < 1.0 {
        true
    } else if tau > 0.0 && tau <= 0.4 {
        false
    } else {
        return Err(GenError::TauOutOfRange(tau));
    };
    if segments < 2 {
        return Err(GenError::InvalidParams("segments must be >= 2".into()));
    }
    if !(x > 1.0) {
        return Err(GenError::XTooSmall(format!("x must exceed 1, got {x}")));
    }
    let t_prime = tau.min(1.0 - tau);
    let m = segments;
    let alpha = ModelParams::default().alpha;

    // long lengths L_k and connectors C_k in the log domain
    let ln_x = x.ln();
    let long_ln: Vec<f64> = (0..m).map(|k| ln_x / t_prime.powi(k as i32)).collect();
    let conn_ln: Vec<f64> = (0..m - 1)
        .map(|k| t_prime * long_ln[k + 1] + (1.0 - t_prime + t_prime * t_prime) * long_ln[k])
        .collect();
    let long: Vec<LogScalar> = long_ln.iter().map(|&l| LogScalar::from_ln(l)).collect();
    let conn: Vec<LogScalar> = conn_ln.iter().map(|&l| LogScalar::from_ln(l)).collect();

    // construction inequalities, checked before any geometry is laid out
    for k in 0..m - 1 {
        if !(conn[k] < long[k + 1].powf(1.0) / LogScalar::from_value(2.0)) {
            return Err(GenError::XTooSmall(format!(
                "connector C_{} >= L_{}/2, so the chain gap e_{} <= L_{}/2",
                k + 1,
                k + 2,
                k + 1,
                k + 2
            )));
        }
    }
    for k in 0..m.saturating_sub(2) {
        if !(long[k + 1] < conn[k + 1] / LogScalar::from_value(2.0)) {
            return Err(GenError::XTooSmall(format!(
                "L_{} >= C_{}/2, so the sender gap d_{} <= C_{}/2",
                k + 2,
                k + 2,
                k + 1,
                k + 2
            )));
        }
    }
    // e_k = L_{k+1} - C_k must dominate the sum of the earlier gaps
    let e: Vec<LogScalar> =
        (0..m - 1).map(|k| long[k + 1].checked_sub(conn[k]).unwrap()).collect();
    let mut e_prefix = LogScalar::ZERO;
    for k in 0..m - 1 {
        if k > 0 && !(e[k] > e_prefix) {
            return Err(GenError::XTooSmall(format!(
                "chain gap e_{} does not dominate the earlier gaps",
                k + 1
            )));
        }
        e_prefix = e_prefix + e[k];
    }

    // positions: r_1 = C_1, s_1 = r_1 - L_1, s_2 = 0,
    // s_{k+1} = r_k - C_k, r_{k+1} = s_{k+1} + L_{k+1}
    let mut sender = vec![SignedLog::ZERO; m];
    let mut receiver = vec![SignedLog::ZERO; m];
    receiver[0] = SignedLog::positive(conn[0]);
    sender[0] = receiver[0].sub(SignedLog::positive(long[0]));
    sender[1] = SignedLog::ZERO;
    receiver[1] = SignedLog::positive(long[1]);
    for k in 1..m - 1 {
        sender[k + 1] = receiver[k].sub(SignedLog::positive(conn[k]));
        receiver[k + 1] = sender[k + 1].add(SignedLog::positive(long[k + 1]));
    }

    // points in segment order: s_1, r_1, s_2, r_2, ...
    let mut points = Vec::with_capacity(2 * m);
    for k in 0..m {
        points.push(Point::on_line(sender[k]));
        points.push(Point::on_line(receiver[k]));
    }
    let s_idx = |k: usize| 2 * k;
    let r_idx = |k: usize| 2 * k + 1;

    // designated tree: long links then connectors r_k -> s_{k+1}
    let mut tree: Vec<(usize, usize)> = (0..m).map(|k| (s_idx(k), r_idx(k))).collect();
    tree.extend((0..m - 1).map(|k| (r_idx(k), s_idx(k + 1))));
    if reversed {
        tree = tree.into_iter().map(|(s, r)| (r, s)).collect();
    }
    let long_slot: Vec<usize> = (0..m).collect();
    let connector_slot: Vec<usize> = (m..2 * m - 1).collect();
    let e_points: Vec<usize> = (0..m).map(r_idx).collect();

    let g = t_prime;
    let gamma_decay = 1.0 - 4.0 * g + 4.0 * g * g - 3.0 * g * g * g + g * g * g * g;

    // pick beta from the actual numbers: every designated-slot interference
    // sum must clear 1/beta while every directed pair over the receiver
    // chain must exceed it
    let link_pts: Vec<(Point, Point)> =
        tree.iter().map(|&(s, r)| (points[s], points[r])).collect();
    let slot_max_ln = |slot: &[usize]| -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &i in slot {
            let mut total = f64::NEG_INFINITY;
            for &j in slot {
                if i != j {
                    total = crate::logdomain::log_sum_exp(
                        total,
                        rel_ln(link_pts[j], link_pts[i], tau, alpha),
                    );
                }
            }
            worst = worst.max(total);
        }
        worst
    };
    let feasible_need_ln = slot_max_ln(&long_slot).max(slot_max_ln(&connector_slot));

    // weakest node-disjoint directed pair over the receiver chain; pairs
    // sharing a node never co-schedule and do not constrain beta
    let chain_pts: Vec<Point> = e_points.iter().map(|&i| points[i]).collect();
    let mut infeasible_cap_ln = f64::INFINITY;
    let cn = chain_pts.len();
    let mut chain_links: Vec<(usize, usize)> = Vec::new();
    for a in 0..cn {
        for b in 0..cn {
            if a != b {
                chain_links.push((a, b));
            }
        }
    }
    for a in 0..chain_links.len() {
        for b in (a + 1)..chain_links.len() {
            let (la, lb) = (chain_links[a], chain_links[b]);
            if la.0 == lb.0 || la.0 == lb.1 || la.1 == lb.0 || la.1 == lb.1 {
                continue;
            }
            let pa = (chain_pts[la.0], chain_pts[la.1]);
            let pb = (chain_pts[lb.0], chain_pts[lb.1]);
            let hit = rel_ln(pa, pb, tau, alpha).max(rel_ln(pb, pa, tau, alpha));
            infeasible_cap_ln = infeasible_cap_ln.min(hit);
        }
    }

    let margin = std::f64::consts::LN_2;
    if feasible_need_ln + 2.0 * margin > infeasible_cap_ln {
        return Err(GenError::XTooSmall(format!(
            "no beta separates the designated slots (max interference e^{feasible_need_ln:.3}) \
             from the chain pairs (weakest pair e^{infeasible_cap_ln:.3}); increase x"
        )));
    }
    let ln_inv_beta = if feasible_need_ln + margin <= 0.0 && infeasible_cap_ln - margin >= 0.0 {
        0.0 // beta = 1 fits the window
    } else if infeasible_cap_ln.is_infinite() {
        feasible_need_ln + 2.0 * margin
    } else {
        0.5 * (feasible_need_ln + infeasible_cap_ln)
    };

    let mut params = ModelParams::default();
    params.tau = tau;
    params.beta = (-ln_inv_beta).exp();

    let instance = Instance {
        label: format!("mst-subopt(tau={tau},x={x},segments={segments})"),
        params,
        points,
        links: tree.clone(),
        designated_tree: Some(tree),
        designated_conflicts: None,
    };

    // final guarantee: both slots verify under P_tau with the chosen beta
    let tree_links = instance.designated_tree_links().unwrap();
    let power = PowerAssignment::oblivious(tau);
    for (name, slot) in [("long", &long_slot), ("connector", &connector_slot)] {
        let subset: Vec<Link> = slot.iter().map(|&i| tree_links[i]).collect();
        let rep = is_p_feasible(&subset, &power, &params).expect("zero-noise check cannot fail");
        if !rep.feasible {
            return Err(GenError::XTooSmall(format!(
                "{name} slot fails P_tau feasibility at the chosen beta; increase x"
            )));
        }
    }

    Ok(SuboptimalMst { instance, long_slot, connector_slot, e_points, gamma_decay })
}
