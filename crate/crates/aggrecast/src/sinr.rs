//! Physical-model feasibility: power schemes, SINR checks, the
//! arbitrary-power feasibility oracle, and the additive interference
//! operator used by the tree-sparsity arguments.
//!
//! All interference quantities are formed in the log domain; a set over a
//! doubly-exponential chain has relative interferences around e^(+-10^4),
//! which only the log representation survives.

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::geom::{distance, link_distance, Link, ModelParams, Point};
use crate::logdomain::{log_sum_exp, LogScalar};

#[derive(Debug, Error, PartialEq)]
pub enum SinrError {
    #[error("sender of interfering link coincides with receiver of victim link")]
    CoLocated,
    #[error("arbitrary-power feasibility requires the interference-limited regime (N = 0)")]
    NoiseUnsupported,
    #[error("interference-limited precondition violated: P({0}) < (1+eps) * beta * N * l^alpha")]
    NotInterferenceLimited(usize),
    #[error("explicit power vector has {got} entries for a set of {want} links")]
    PowerLengthMismatch { got: usize, want: usize },
}

/// Spectral-radius tolerance around the feasibility boundary.
pub const RHO_TOL: f64 = 1e-9;

/// How sender powers are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum PowerAssignment {
    /// P(i) = scale * l_i^(tau * alpha); depends only on the link's own length.
    Oblivious { tau: f64, scale: LogScalar },
    /// One positive power per link, aligned with the set order.
    Explicit(Vec<LogScalar>),
}

impl PowerAssignment {
    pub fn oblivious(tau: f64) -> Self {
        PowerAssignment::Oblivious { tau, scale: LogScalar::ONE }
    }

    /// Power of the link at position `pos` in the set.
    pub fn power(&self, pos: usize, link: &Link, alpha: f64) -> LogScalar {
        match self {
            PowerAssignment::Oblivious { tau, scale } => *scale * link.length.powf(tau * alpha),
            PowerAssignment::Explicit(p) => p[pos],
        }
    }
}

/// Relative interference of link `j` on link `i` under `p`:
/// I_P(j,i) = P(j) l_i^alpha / (P(i) d_ji^alpha), with positions giving the
/// power lookups. I_P(i,i) is defined as zero.
pub fn relative_interference(
    j: (usize, &Link),
    i: (usize, &Link),
    p: &PowerAssignment,
    params: &ModelParams,
) -> Result<LogScalar, SinrError> {
    if j.0 == i.0 {
        return Ok(LogScalar::ZERO);
    }
    let d_ji = distance(j.1.sender, i.1.receiver);
    if d_ji.is_zero() {
        return Err(SinrError::CoLocated);
    }
    let pj = p.power(j.0, j.1, params.alpha);
    let pi = p.power(i.0, i.1, params.alpha);
    Ok(pj * i.1.length.powf(params.alpha) / (pi * d_ji.powf(params.alpha)))
}

/// Per-link outcome of a feasibility check.
#[derive(Clone, Debug)]
pub struct LinkMargin {
    pub link_id: usize,
    /// ln of the total normalized interference (plus noise share), +inf when
    /// a co-located pair makes it unbounded.
    pub interference_ln: f64,
    /// 1/beta minus the total, in linear scale; -inf when the total overflows.
    pub slack: f64,
}

/// Outcome of a slot feasibility check.
#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub per_link: Vec<LinkMargin>,
    /// Log powers supporting the set, when the arbitrary-power oracle found one.
    pub witness_power: Option<Vec<LogScalar>>,
    /// ln of the spectral radius of the normalized gain matrix (arbitrary mode).
    pub spectral_radius_ln: Option<f64>,
    /// Set when the spectral radius fell within RHO_TOL of 1.
    pub boundary: bool,
}

impl FeasibilityReport {
    fn empty(feasible: bool) -> Self {
        FeasibilityReport {
            feasible,
            per_link: Vec::new(),
            witness_power: None,
            spectral_radius_ln: None,
            boundary: false,
        }
    }
}

fn slack_from_total(total_ln: f64, beta: f64) -> f64 {
    let inv_beta = beta.recip();
    if total_ln == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let total = total_ln.exp();
    if total.is_infinite() {
        f64::NEG_INFINITY
    } else {
        inv_beta - total
    }
}

/// Is `set` simultaneously successful under the fixed power assignment `p`?
///
/// Checks the SINR condition for every link; with positive noise the
/// interference-limited precondition P(i) >= (1+eps) beta N l_i^alpha is
/// validated first.
pub fn is_p_feasible(
    set: &[Link],
    p: &PowerAssignment,
    params: &ModelParams,
) -> Result<FeasibilityReport, SinrError> {
    if let PowerAssignment::Explicit(v) = p {
        if v.len() != set.len() {
            return Err(SinrError::PowerLengthMismatch { got: v.len(), want: set.len() });
        }
    }
    if set.is_empty() {
        return Ok(FeasibilityReport::empty(true));
    }
    let alpha = params.alpha;
    let ln_inv_beta = -params.beta.ln();

    if !params.noise.is_zero() {
        let floor = LogScalar::from_value((1.0 + params.epsilon) * params.beta) * params.noise;
        for (pos, link) in set.iter().enumerate() {
            if p.power(pos, link, alpha) < floor * link.length.powf(alpha) {
                return Err(SinrError::NotInterferenceLimited(link.id));
            }
        }
    }

    let mut per_link = Vec::with_capacity(set.len());
    let mut feasible = true;
    for (i, victim) in set.iter().enumerate() {
        let mut total_ln = f64::NEG_INFINITY;
        for (j, source) in set.iter().enumerate() {
            if i == j {
                continue;
            }
            match relative_interference((j, source), (i, victim), p, params) {
                Ok(v) => total_ln = log_sum_exp(total_ln, v.ln()),
                Err(SinrError::CoLocated) => {
                    total_ln = f64::INFINITY;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !params.noise.is_zero() {
            // noise contributes N * l_i^alpha / P(i) to the normalized total
            let share = params.noise * victim.length.powf(alpha) / p.power(i, victim, alpha);
            total_ln = log_sum_exp(total_ln, share.ln());
        }
        if total_ln > ln_inv_beta {
            feasible = false;
        }
        per_link.push(LinkMargin {
            link_id: victim.id,
            interference_ln: total_ln,
            slack: slack_from_total(total_ln, params.beta),
        });
    }

    Ok(FeasibilityReport { feasible, per_link, witness_power: None, spectral_radius_ln: None, boundary: false })
}

/// Is `set` feasible under *some* power assignment?
///
/// Builds the normalized gain matrix M[i][j] = beta l_i^alpha / d_ji^alpha
/// (zero diagonal) and decides by its Perron root: feasible iff rho(M) < 1,
/// with the boundary band [1 - tol, 1 + tol] conservatively classified
/// infeasible. The Perron vector doubles as the witness power assignment.
/// Requires N = 0.
pub fn is_feasible_arbitrary(
    set: &[Link],
    params: &ModelParams,
) -> Result<FeasibilityReport, SinrError> {
    if !params.noise.is_zero() {
        return Err(SinrError::NoiseUnsupported);
    }
    let n = set.len();
    if n <= 1 {
        let mut rep = FeasibilityReport::empty(true);
        rep.spectral_radius_ln = Some(f64::NEG_INFINITY);
        rep.witness_power = Some(vec![LogScalar::ONE; n]);
        rep.per_link = set
            .iter()
            .map(|l| LinkMargin {
                link_id: l.id,
                interference_ln: f64::NEG_INFINITY,
                slack: params.beta.recip(),
            })
            .collect();
        return Ok(rep);
    }

    let alpha = params.alpha;
    let ln_beta = params.beta.ln();
    // log-domain gain matrix, +inf marking a co-located pair
    let mut m = vec![f64::NEG_INFINITY; n * n];
    let mut co_located = false;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = distance(set[j].sender, set[i].receiver);
            if d.is_zero() {
                co_located = true;
            } else {
                m[i * n + j] = ln_beta + alpha * (set[i].length.ln() - d.ln());
            }
        }
    }
    if co_located {
        let mut rep = FeasibilityReport::empty(false);
        rep.spectral_radius_ln = Some(f64::INFINITY);
        rep.per_link = set
            .iter()
            .map(|l| LinkMargin { link_id: l.id, interference_ln: f64::INFINITY, slack: f64::NEG_INFINITY })
            .collect();
        return Ok(rep);
    }

    // Power iteration on M + I with Collatz-Wielandt bounds. The diagonal
    // shift makes the iteration matrix primitive (plain power iteration on a
    // 2x2 antidiagonal gain matrix oscillates with period 2 and its bounds
    // never tighten); the Perron root just shifts by one and the vector is
    // unchanged. At every step the componentwise ratios bracket the root,
    // so the loop stops as soon as the bracket clears the feasibility
    // boundary, and a feasible exit certifies the witness outright (every
    // ratio below 1). Entries within a common f64 range iterate in linear
    // arithmetic; adversarial instances whose entries span e^(thousands)
    // take the exact log-sum-exp path.
    let feasible_exit = (1.0 - RHO_TOL).ln();
    let infeasible_exit = RHO_TOL.ln_1p();
    let finite: Vec<f64> = m.iter().copied().filter(|v| v.is_finite()).collect();
    let spread = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - finite.iter().copied().fold(f64::INFINITY, f64::min);

    let (mut rho_lo, mut rho_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut v_ln = vec![0.0f64; n];
    if spread <= 600.0 {
        let shift = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = shift.exp(); // (M + I) v in units of e^shift needs I/scale
        let a: Vec<f64> =
            m.iter().map(|&e| if e.is_finite() { (e - shift).exp() } else { 0.0 }).collect();
        let mut v = vec![1.0f64; n];
        let mut w = vec![0.0f64; n];
        for _ in 0..1000 {
            for i in 0..n {
                let mut acc = v[i] / scale;
                for j in 0..n {
                    acc += a[i * n + j] * v[j];
                }
                w[i] = acc;
            }
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for i in 0..n {
                // ratio brackets (rho + 1)/scale; peel the shift back off
                let r = w[i] / v[i] - 1.0 / scale;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            (rho_lo, rho_hi) = (lo.max(0.0).ln() + shift, hi.ln() + shift);
            let norm = w.iter().copied().fold(0.0f64, f64::max);
            for i in 0..n {
                v[i] = w[i] / norm;
            }
            if rho_hi < feasible_exit
                || rho_lo > infeasible_exit
                || rho_hi - rho_lo <= 1e-12 * rho_hi.abs().max(1.0)
            {
                break;
            }
        }
        for i in 0..n {
            v_ln[i] = v[i].ln();
        }
    } else {
        let mut v = vec![0.0f64; n];
        for _ in 0..1000 {
            let mut w = vec![f64::NEG_INFINITY; n];
            for i in 0..n {
                let mut acc = v[i]; // the +I term
                for j in 0..n {
                    if i != j {
                        acc = log_sum_exp(acc, m[i * n + j] + v[j]);
                    }
                }
                w[i] = acc;
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                // lambda brackets ln(1 + rho); invert through expm1
                let lambda = w[i] - v[i];
                let r = if lambda > 30.0 { lambda } else { f64::exp_m1(lambda).ln() };
                lo = lo.min(r);
                hi = hi.max(r);
            }
            (rho_lo, rho_hi) = (lo, hi);
            let shift = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for i in 0..n {
                v[i] = w[i] - shift;
            }
            if rho_hi < feasible_exit
                || rho_lo > infeasible_exit
                || rho_hi - rho_lo <= 1e-12 * rho_hi.abs().max(1.0)
            {
                break;
            }
        }
        v_ln = v;
    }

    // early feasible exits can leave the lower bound at -inf; report the
    // certified upper bound then
    let rho_ln =
        if rho_lo == f64::NEG_INFINITY { rho_hi } else { 0.5 * (rho_lo + rho_hi) };
    let feasible = rho_hi < feasible_exit;
    let boundary = !feasible && rho_lo <= infeasible_exit;
    let v = v_ln;
    let witness: Vec<LogScalar> = v.iter().map(|&ln| LogScalar::from_ln(ln)).collect();
    // per-link normalized interference under the witness: (M p)_i / (beta p_i)
    let per_link = (0..n)
        .map(|i| {
            let mut acc = f64::NEG_INFINITY;
            for j in 0..n {
                if i != j {
                    acc = log_sum_exp(acc, m[i * n + j] + witness[j].ln());
                }
            }
            let total_ln = acc - witness[i].ln() - ln_beta;
            LinkMargin {
                link_id: set[i].id,
                interference_ln: total_ln,
                slack: slack_from_total(total_ln, params.beta),
            }
        })
        .collect();

    Ok(FeasibilityReport {
        feasible,
        per_link,
        witness_power: if feasible { Some(witness) } else { None },
        spectral_radius_ln: Some(rho_ln),
        boundary,
    })
}

/// The additive interference operator I(j,i) = min(1, l_j^alpha / d(i,j)^alpha),
/// with the cap engaging at shared endpoints (d = 0).
pub fn interference_i(j: &Link, i: &Link, alpha: f64) -> LogScalar {
    let d = link_distance(i, j);
    if d.is_zero() {
        return LogScalar::ONE;
    }
    LogScalar::ONE.min((j.length / d).powf(alpha))
}

fn native_i_term(j: &crate::geom::NativeLink, d2: f64, alpha: f64) -> f64 {
    if j.len2 >= d2 {
        1.0
    } else {
        (j.len2 / d2).powf(alpha / 2.0)
    }
}

/// Per-link I(i, T_i^+): the interference a link sends into the longer part
/// of the tree. Small values witness the MST sparsity property.
pub fn mst_sparsity_check(tree: &[Link], alpha: f64) -> Vec<f64> {
    let native = crate::geom::native_links(tree);
    tree.iter()
        .enumerate()
        .map(|(pi, i)| {
            tree.iter()
                .enumerate()
                .filter(|(_, j)| j.id != i.id && (j.length, j.id) > (i.length, i.id))
                .map(|(pj, j)| match &native {
                    Some(nat) => {
                        let d2 = crate::geom::native_link_dist2(&nat[pi], &nat[pj]);
                        native_i_term(&nat[pi], d2, alpha)
                    }
                    None => interference_i(i, j, alpha).to_f64(),
                })
                .sum()
        })
        .collect()
}

/// Per-link I(S_i^-, i): the interference a link receives from shorter links.
pub fn downlink_interference_check(set: &[Link], alpha: f64) -> Vec<f64> {
    let native = crate::geom::native_links(set);
    set.iter()
        .enumerate()
        .map(|(pi, i)| {
            set.iter()
                .enumerate()
                .filter(|(_, j)| j.id != i.id && (j.length, j.id) < (i.length, i.id))
                .map(|(pj, j)| match &native {
                    Some(nat) => {
                        let d2 = crate::geom::native_link_dist2(&nat[pi], &nat[pj]);
                        native_i_term(&nat[pj], d2, alpha)
                    }
                    None => interference_i(j, i, alpha).to_f64(),
                })
                .sum()
        })
        .collect()
}

/// A pair of directed links over a pointset, as (sender, receiver) indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectedPair {
    pub first: (usize, usize),
    pub second: (usize, usize),
}

/// Outcome of the exhaustive pairwise oblivious-feasibility scan.
#[derive(Clone, Debug)]
pub struct PairwiseScan {
    pub all_infeasible: bool,
    /// A simultaneously P_tau-feasible pair, when one exists.
    pub counterexample: Option<DirectedPair>,
    pub pairs_checked: u64,
}

/// Check that no two distinct directed links formable on `points` are
/// simultaneously P_tau-feasible. Exhaustive over all O(n^4) pairs.
///
/// Pairs that share a node are never co-schedulable (a node handles one
/// packet per slot) and count as infeasible without an SINR test; the
/// shared-node cases are exactly the ones the SINR margin degenerates to
/// the feasibility boundary on.
pub fn verify_pairwise_infeasible(points: &[Point], tau: f64, params: &ModelParams) -> PairwiseScan {
    let alpha = params.alpha;
    let ln_inv_beta = -params.beta.ln();
    let n = points.len();
    let mut links = Vec::with_capacity(n * (n - 1));
    for s in 0..n {
        for r in 0..n {
            if s != r {
                links.push((s, r, distance(points[s], points[r])));
            }
        }
    }

    // I_{P_tau}(a, b) <= 1/beta, in logs; +inf when co-located
    let rel = |a: &(usize, usize, LogScalar), b: &(usize, usize, LogScalar)| -> f64 {
        if a.0 == b.1 {
            return f64::INFINITY;
        }
        let d = distance(points[a.0], points[b.1]);
        tau * alpha * a.2.ln() + (1.0 - tau) * alpha * b.2.ln() - alpha * d.ln()
    };

    let feasible_pair = |i: usize, j: usize| -> bool {
        let (a, b) = (&links[i], &links[j]);
        if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
            return false;
        }
        rel(a, b) <= ln_inv_beta && rel(b, a) <= ln_inv_beta
    };

    let m = links.len();
    let total = (m * (m - 1) / 2) as u64;
    let found: Option<(usize, usize)> = {
        #[cfg(feature = "parallel")]
        {
            (0..m)
                .into_par_iter()
                .find_map_first(|i| (i + 1..m).find(|&j| feasible_pair(i, j)).map(|j| (i, j)))
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..m).find_map(|i| (i + 1..m).find(|&j| feasible_pair(i, j)).map(|j| (i, j)))
        }
    };

    PairwiseScan {
        all_infeasible: found.is_none(),
        counterexample: found.map(|(i, j)| DirectedPair {
            first: (links[i].0, links[i].1),
            second: (links[j].0, links[j].1),
        }),
        pairs_checked: total,
    }
}
