//! Reception instances: the state feedback matrix (SFM) and the Wants sets
//! derived from it.
//!
//! Packet and receiver indices are 0-based here. File formats and
//! human-readable output use the 1-based `p1..pK` naming; the conversion
//! happens at that boundary.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Packets per block supported by the `PacketSet` bitmask.
pub const MAX_PACKETS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("instance needs at least one receiver and one packet (got N={receivers}, K={packets})")]
    EmptyDimension { receivers: usize, packets: usize },
    #[error("K={0} exceeds the supported maximum of {MAX_PACKETS} packets")]
    TooManyPackets(usize),
    #[error("erasure probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("row {row} has {found} entries, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("entry ({row}, {col}) is {value}, expected 0 or 1")]
    NotBinary { row: usize, col: usize, value: u8 },
    #[error("packet index {packet} is outside 0..{packets}")]
    PacketOutOfRange { packet: usize, packets: usize },
}

/// A set of packet indices `< 64`, stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PacketSet(u64);

impl PacketSet {
    pub const EMPTY: PacketSet = PacketSet(0);

    pub fn from_bits(bits: u64) -> Self {
        PacketSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(packet: usize) -> Self {
        PacketSet(1 << packet)
    }

    /// `{0, 1, .., len - 1}`.
    pub fn prefix(len: usize) -> Self {
        if len >= 64 {
            PacketSet(u64::MAX)
        } else {
            PacketSet((1u64 << len) - 1)
        }
    }

    pub fn contains(self, packet: usize) -> bool {
        packet < 64 && self.0 >> packet & 1 == 1
    }

    pub fn insert(&mut self, packet: usize) {
        self.0 |= 1 << packet;
    }

    pub fn remove(&mut self, packet: usize) {
        self.0 &= !(1 << packet);
    }

    pub fn with(self, packet: usize) -> Self {
        PacketSet(self.0 | 1 << packet)
    }

    pub fn without(self, packet: usize) -> Self {
        PacketSet(self.0 & !(1 << packet))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        PacketSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        PacketSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Largest index in the set.
    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }
}

impl FromIterator<usize> for PacketSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(PacketSet::EMPTY, PacketSet::with)
    }
}

/// Prints 1-based packet names, e.g. `{p1,p3}`.
impl fmt::Display for PacketSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "p{}", p + 1)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for PacketSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn check_packets(packets: usize) -> Result<(), ModelError> {
    if packets > MAX_PACKETS {
        return Err(ModelError::TooManyPackets(packets));
    }
    Ok(())
}

/// An N×K state feedback matrix: entry `(n, k)` is set when receiver `n`
/// lost packet `k` during the systematic phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptionInstance {
    packets: usize,
    lost: Vec<PacketSet>,
}

impl ReceptionInstance {
    /// Builds an instance from 0/1 rows, one per receiver.
    pub fn from_rows<R: AsRef<[u8]>>(packets: usize, rows: &[R]) -> Result<Self, ModelError> {
        if rows.is_empty() || packets == 0 {
            return Err(ModelError::EmptyDimension { receivers: rows.len(), packets });
        }
        check_packets(packets)?;
        let mut lost = Vec::with_capacity(rows.len());
        for (row, entries) in rows.iter().enumerate() {
            let entries = entries.as_ref();
            if entries.len() != packets {
                return Err(ModelError::RowLength { row, expected: packets, found: entries.len() });
            }
            let mut set = PacketSet::EMPTY;
            for (col, &value) in entries.iter().enumerate() {
                match value {
                    0 => {}
                    1 => set.insert(col),
                    _ => return Err(ModelError::NotBinary { row, col, value }),
                }
            }
            lost.push(set);
        }
        Ok(ReceptionInstance { packets, lost })
    }

    pub fn receivers(&self) -> usize {
        self.lost.len()
    }

    pub fn packets(&self) -> usize {
        self.packets
    }

    /// `a_{n,k}`.
    pub fn lost(&self, receiver: usize, packet: usize) -> bool {
        self.lost[receiver].contains(packet)
    }

    /// The SFM as 0/1 rows.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.lost.iter().map(|set| (0..self.packets).map(|k| set.contains(k) as u8).collect()).collect()
    }

    pub fn wants(&self) -> WantsCollection {
        WantsCollection { packets: self.packets, sets: self.lost.clone() }
    }
}

/// The Wants sets `W_1..W_N` of a reception instance over `K` packets.
///
/// Receivers with empty Wants sets are kept so that `N` stays fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WantsCollection {
    packets: usize,
    sets: Vec<PacketSet>,
}

impl WantsCollection {
    pub fn new(packets: usize, sets: Vec<PacketSet>) -> Result<Self, ModelError> {
        check_packets(packets)?;
        let range = PacketSet::prefix(packets);
        for set in &sets {
            if !set.is_subset(range) {
                let packet = set.intersection(PacketSet::from_bits(!range.bits())).iter().next();
                return Err(ModelError::PacketOutOfRange { packet: packet.unwrap_or(0), packets });
            }
        }
        Ok(WantsCollection { packets, sets })
    }

    /// Convenience constructor from 0-based index lists.
    pub fn from_indices<S: AsRef<[usize]>>(packets: usize, sets: &[S]) -> Result<Self, ModelError> {
        check_packets(packets)?;
        let mut out = Vec::with_capacity(sets.len());
        for set in sets {
            let mut s = PacketSet::EMPTY;
            for &p in set.as_ref() {
                if p >= packets {
                    return Err(ModelError::PacketOutOfRange { packet: p, packets });
                }
                s.insert(p);
            }
            out.push(s);
        }
        Ok(WantsCollection { packets, sets: out })
    }

    pub fn packets(&self) -> usize {
        self.packets
    }

    pub fn receivers(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[PacketSet] {
        &self.sets
    }

    pub fn get(&self, receiver: usize) -> PacketSet {
        self.sets[receiver]
    }

    /// `ŵ`, the largest Wants set size; 0 when every set is empty.
    pub fn max_wants(&self) -> usize {
        self.sets.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Packets wanted by at least one receiver.
    pub fn wanted(&self) -> PacketSet {
        self.sets.iter().fold(PacketSet::EMPTY, |acc, &s| acc.union(s))
    }

    /// Rebuilds the SFM. Fails only for a collection with no receivers,
    /// which has no SFM.
    pub fn to_instance(&self) -> Result<ReceptionInstance, ModelError> {
        if self.sets.is_empty() || self.packets == 0 {
            return Err(ModelError::EmptyDimension { receivers: self.sets.len(), packets: self.packets });
        }
        Ok(ReceptionInstance { packets: self.packets, lost: self.sets.clone() })
    }
}

/// Draws an SFM with every entry an independent Bernoulli(`pe`) loss.
///
/// The stream is ChaCha8 seeded from `seed` and consumed row-major, so a
/// seed always reproduces the same instance.
pub fn sample_instance(receivers: usize, packets: usize, pe: f64, seed: u64) -> Result<ReceptionInstance, ModelError> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(ModelError::ProbabilityOutOfRange(pe));
    }
    if receivers == 0 || packets == 0 {
        return Err(ModelError::EmptyDimension { receivers, packets });
    }
    check_packets(packets)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lost = (0..receivers).map(|_| (0..packets).filter(|_| rng.gen_bool(pe)).collect()).collect();
    Ok(ReceptionInstance { packets, lost })
}

/// Derives an independent seed for sub-stream `stream` of `master`
/// (SplitMix64 finalizer applied to a golden-ratio step).
pub fn split_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
