//! Ground truth for small instances.
//!
//! [`brute_force_uq`] finds `U_q`, the fewest rows of any matrix over GF(q)
//! satisfying S-1. S-1 is unchanged by invertible row operations and by
//! scaling columns, so each column only matters as a projective point and
//! the search may fix a canonical basis: a column either lies in the span
//! of the earlier columns or is the next unit vector `e_{d+1}`. Columns are
//! assigned in packet order, and a branch is cut as soon as the assigned
//! part of some Wants set is dependent.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::gf::Field;
use crate::model::{PacketSet, WantsCollection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("row limit {limit} exceeds K = {packets}")]
    LimitAboveK { limit: usize, packets: usize },
}

/// Search nodes the oracle may visit before giving up.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqOutcome {
    /// `U_q` itself.
    Optimal(usize),
    /// No solution has at most `u_max` rows.
    AboveLimit,
    /// The node budget ran out; nothing is claimed.
    Infeasible,
}

/// Nonzero vectors of GF(q)^dim whose first nonzero entry is 1, padded
/// with zeros to `len`.
fn projective_points(field: &Field, dim: usize, len: usize) -> Vec<Vec<u8>> {
    let q = field.order() as usize;
    let total = q.pow(dim as u32);
    (1..total)
        .map(|mut code| {
            let mut v = vec![0u8; len];
            for x in v.iter_mut().take(dim) {
                *x = (code % q) as u8;
                code /= q;
            }
            v
        })
        .filter(|v| v.iter().find(|&&x| x != 0) == Some(&1))
        .collect()
}

struct Search<'a> {
    field: &'a Field,
    rows: usize,
    /// Packets to assign, ascending.
    order: Vec<usize>,
    /// For each position in `order`, the Wants sets containing that packet,
    /// restricted to packets assigned so far.
    checks: Vec<Vec<PacketSet>>,
    /// `points[d]`: projective points of the span of `e_1..e_d`.
    points: Vec<Vec<Vec<u8>>>,
    columns: Vec<Vec<u8>>,
    budget: u64,
    visited: u64,
}

impl Search<'_> {
    fn independent(&self, set: PacketSet) -> bool {
        let width = set.len();
        let mut buf: Vec<u8> = Vec::with_capacity(self.rows * width);
        for r in 0..self.rows {
            buf.extend(set.iter().map(|p| self.columns[p][r]));
        }
        rank(self.field, &mut buf, self.rows, width) == width
    }

    /// Depth-first over positions of `order`; `dim` is the span dimension
    /// of the columns placed so far. `None` means the budget ran out.
    fn extend(&mut self, pos: usize, dim: usize) -> Option<bool> {
        if pos == self.order.len() {
            return Some(true);
        }
        let packet = self.order[pos];
        let mut candidates: Vec<Vec<u8>> = self.points[dim].clone();
        if dim < self.rows {
            let mut unit = vec![0u8; self.rows];
            unit[dim] = 1;
            candidates.push(unit);
        }
        for column in candidates {
            self.visited += 1;
            if self.visited > self.budget {
                return None;
            }
            let next_dim = if column.get(dim).copied().unwrap_or(0) != 0 { dim + 1 } else { dim };
            self.columns[packet] = column;
            let ok = self.checks[pos].iter().all(|&s| self.independent(s));
            if ok && self.extend(pos + 1, next_dim)? {
                return Some(true);
            }
        }
        Some(false)
    }
}

fn rank(field: &Field, buf: &mut [u8], height: usize, width: usize) -> usize {
    let mut lead = 0;
    for col in 0..width {
        let Some(p) = (lead..height).find(|&r| buf[r * width + col] != 0) else {
            continue;
        };
        for j in 0..width {
            buf.swap(p * width + j, lead * width + j);
        }
        let inv = field.inv_raw(buf[lead * width + col]);
        for r in lead + 1..height {
            let factor = field.mul_raw(buf[r * width + col], inv);
            if factor != 0 {
                for j in col..width {
                    let s = field.mul_raw(factor, buf[lead * width + j]);
                    buf[r * width + j] = field.sub_raw(buf[r * width + j], s);
                }
            }
        }
        lead += 1;
        if lead == height {
            break;
        }
    }
    lead
}

/// Whether some `rows×K` matrix over `field` satisfies S-1 for `wants`.
/// `None` when the budget runs out first.
fn exists_solution(
    wants: &WantsCollection,
    field: &Field,
    rows: usize,
    budget: u64,
    visited: &mut u64,
) -> Option<bool> {
    let wanted = wants.wanted();
    let order: Vec<usize> = wanted.iter().collect();
    let checks = order
        .iter()
        .map(|&p| {
            let upto = PacketSet::prefix(p + 1);
            let mut sets: Vec<PacketSet> = Vec::new();
            for &w in wants.sets() {
                let s = w.intersection(upto);
                if w.contains(p) && s.len() > 1 && !sets.contains(&s) {
                    sets.push(s);
                }
            }
            sets
        })
        .collect();
    let points = (0..=rows).map(|d| projective_points(field, d, rows)).collect();
    let mut search = Search {
        field,
        rows,
        order,
        checks,
        points,
        columns: vec![Vec::new(); wants.packets()],
        budget: budget.saturating_sub(*visited),
        visited: 0,
    };
    let found = search.extend(0, 0);
    *visited += search.visited;
    found
}

/// Smallest `U` in `[ŵ, u_max]` admitting an S-1 matrix over `field`.
///
/// Columns of packets nobody wants are pinned to zero. The identity on the
/// wanted packets is always a solution, so `U_q` never exceeds their count
/// and that case needs no search. The node budget is shared across all
/// row counts tried.
pub fn brute_force_uq(
    wants: &WantsCollection,
    field: &Field,
    u_max: usize,
    budget: u64,
) -> Result<UqOutcome, OracleError> {
    if u_max > wants.packets() {
        return Err(OracleError::LimitAboveK { limit: u_max, packets: wants.packets() });
    }
    let lower = wants.max_wants();
    let wanted = wants.wanted().len();
    let mut visited = 0;
    for rows in lower..=u_max {
        if rows >= wanted {
            return Ok(UqOutcome::Optimal(rows));
        }
        match exists_solution(wants, field, rows, budget, &mut visited) {
            None => return Ok(UqOutcome::Infeasible),
            Some(true) => return Ok(UqOutcome::Optimal(rows)),
            Some(false) => {}
        }
    }
    Ok(UqOutcome::AboveLimit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representability {
    Yes,
    No,
    Unknown,
}

/// Whether the uniform matroid `U^r_K` is representable over GF(q), from the
/// known classification for `r <= 5`. `K <= r` is always representable.
pub fn uniform_representable(r: usize, k: usize, q: u32) -> Representability {
    use Representability::*;
    if r == 0 || k <= r {
        return Yes;
    }
    let q = q as usize;
    let max_k = match r {
        1 => return Yes,
        2 => q + 1,
        3 if q.is_multiple_of(2) => q + 2,
        3 => q + 1,
        4 if q <= 3 => 5,
        4 => q + 1,
        5 if q <= 4 => 6,
        5 => q + 1,
        _ => return Unknown,
    };
    if k <= max_k {
        Yes
    } else {
        No
    }
}

/// Exhaustive check for four pairwise independent vectors in GF(q)², i.e.
/// whether `U^2_4` is representable over GF(q).
pub fn exhaustive_u24_check(field: &Field) -> bool {
    let q = field.order() as u8;
    let vectors: Vec<(u8, u8)> = (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).skip(1).collect();
    let independent = |u: (u8, u8), v: (u8, u8)| {
        let det = field.sub_raw(field.mul_raw(u.0, v.1), field.mul_raw(u.1, v.0));
        det != 0
    };
    let n = vectors.len();
    for a in 0..n {
        for b in a + 1..n {
            if !independent(vectors[a], vectors[b]) {
                continue;
            }
            for c in b + 1..n {
                if !independent(vectors[a], vectors[c]) || !independent(vectors[b], vectors[c]) {
                    continue;
                }
                for d in c + 1..n {
                    if [a, b, c].iter().all(|&x| independent(vectors[x], vectors[d])) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Where an algorithm's row count `U` stands relative to `ŵ` and `U_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    /// `U = ŵ`.
    Perfect,
    /// A perfect solution exists (`U_q = ŵ`) but `U > ŵ`.
    MissedPerfect,
    /// No perfect solution exists and `U = U_q`.
    NoPerfect,
    /// `U > U_q > ŵ`.
    Suboptimal,
    /// `U_q` unavailable, or `U` below `U_q` (not a solution).
    Unknown,
}

impl CaseLabel {
    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::Perfect => "case1",
            CaseLabel::MissedPerfect => "case2",
            CaseLabel::NoPerfect => "case3",
            CaseLabel::Suboptimal => "case4",
            CaseLabel::Unknown => "unknown",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Labels `U` given `ŵ` and, when the case needs it, `U_q`.
pub fn label_case(u: usize, max_wants: usize, uq: Option<usize>) -> CaseLabel {
    if u == max_wants {
        return CaseLabel::Perfect;
    }
    match uq {
        Some(uq) if u > max_wants && uq == max_wants => CaseLabel::MissedPerfect,
        Some(uq) if uq > max_wants && u == uq => CaseLabel::NoPerfect,
        Some(uq) if uq > max_wants && u > uq => CaseLabel::Suboptimal,
        _ => CaseLabel::Unknown,
    }
}

/// Runs the oracle only when `U > ŵ`.
pub fn classify(u: usize, wants: &WantsCollection, field: &Field, budget: u64) -> CaseLabel {
    let max_wants = wants.max_wants();
    if u == max_wants {
        return CaseLabel::Perfect;
    }
    let uq = match brute_force_uq(wants, field, wants.packets(), budget) {
        Ok(UqOutcome::Optimal(uq)) => Some(uq),
        _ => None,
    };
    label_case(u, max_wants, uq)
}
