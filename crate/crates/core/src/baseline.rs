//! Systematic RLNC baseline for the coded phase: the sender keeps
//! broadcasting rows with i.i.d. uniform coefficients until a stopping rule
//! is met. All-zero rows are possible and count as transmissions.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf::Field;
use crate::linalg::{CodingMatrix, RowBasis};
use crate::model::WantsCollection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StoppingRule {
    /// Stop once every receiver's Wants columns have full rank, so every
    /// receiver can decode. Equivalent to reaching rank `w_n` on each
    /// receiver's own columns.
    Decodable,
    /// Stop once the whole `U×K` matrix has rank `ŵ`. Does not guarantee
    /// that any receiver can decode.
    GlobalRank,
}

impl StoppingRule {
    pub fn name(self) -> &'static str {
        match self {
            StoppingRule::Decodable => "decodable",
            StoppingRule::GlobalRank => "global",
        }
    }
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StoppingRule {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decodable" => Ok(StoppingRule::Decodable),
            "global" => Ok(StoppingRule::GlobalRank),
            _ => Err(UnknownRule),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownRule;

impl fmt::Display for UnknownRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of: decodable, global")
    }
}

impl core::error::Error for UnknownRule {}

#[derive(Debug, Clone)]
pub struct RlncRun {
    pub rule: StoppingRule,
    pub seed: u64,
    /// `ŵ` of the instance.
    pub target_rank: usize,
    /// `U`, the number of rows drawn.
    pub transmissions: usize,
    pub matrix: CodingMatrix,
}

/// Draws uniform rows from a ChaCha8 stream seeded with `seed` until `rule`
/// is satisfied. `ŵ = 0` stops before the first draw.
pub fn run_rlnc(wants: &WantsCollection, field: &Field, rule: StoppingRule, seed: u64) -> RlncRun {
    let k = wants.packets();
    let target = wants.max_wants();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = CodingMatrix::zeros(field.clone(), 0, k);
    let q = field.order();

    let mut global = RowBasis::new(field.clone(), k);
    // Per-receiver bases over that receiver's Wants columns.
    let mut receivers: Vec<(Vec<usize>, RowBasis)> = wants
        .sets()
        .iter()
        .filter(|w| !w.is_empty())
        .map(|w| (w.iter().collect(), RowBasis::new(field.clone(), w.len())))
        .collect();
    let mut pending = receivers.len();

    let done = |global: &RowBasis, pending: usize| match rule {
        StoppingRule::GlobalRank => global.rank() >= target,
        StoppingRule::Decodable => pending == 0,
    };

    let mut row: Vec<u8> = Vec::with_capacity(k);
    let mut projected: Vec<u8> = Vec::with_capacity(k);
    while !done(&global, pending) {
        row.clear();
        row.extend((0..k).map(|_| rng.gen_range(0..q) as u8));
        matrix.push_row(&row).expect("row width is K and values < q");
        match rule {
            StoppingRule::GlobalRank => {
                global.insert(&row);
            }
            StoppingRule::Decodable => {
                for (cols, basis) in receivers.iter_mut() {
                    if basis.rank() == cols.len() {
                        continue;
                    }
                    projected.clear();
                    projected.extend(cols.iter().map(|&c| row[c]));
                    if basis.insert(&projected) && basis.rank() == cols.len() {
                        pending -= 1;
                    }
                }
            }
        }
    }
    RlncRun { rule, seed, target_rank: target, transmissions: matrix.rows(), matrix }
}
