//! Coding matrices over GF(q), exact rank, and the solution conditions.
//!
//! A `U×K` coding matrix `C` is a solution for a Wants collection when
//!
//! * **S-1**: for every receiver `n`, the columns of `C` indexed by `W_n`
//!   are linearly independent, i.e. `rank(C[:, W_n]) = |W_n|`;
//! * **S-2**: deleting any single row breaks S-1 for some receiver.
//!
//! Gaussian elimination pivots on the first nonzero entry, scanning
//! columns left to right.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::gf::{Field, FieldElement, GfError};
use crate::model::{PacketSet, WantsCollection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("column {column} is outside 0..{cols}")]
    ColumnOutOfRange { column: usize, cols: usize },
    #[error("row {row} is outside 0..{rows}")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("matrix has {matrix} columns but the Wants collection has {wants} packets")]
    DimensionMismatch { matrix: usize, wants: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("payload {index} has length {found}, expected {expected}")]
    PayloadLength { index: usize, expected: usize, found: usize },
    #[error("matrix does not satisfy S-1 for receiver {receiver}")]
    NotDecodable { receiver: usize },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A `U×K` matrix over `field`, stored row-major as encoded element values.
#[derive(Clone, PartialEq, Eq)]
pub struct CodingMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl fmt::Debug for CodingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CodingMatrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl CodingMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        CodingMatrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, size: usize) -> Self {
        let mut m = Self::zeros(field, size, size);
        for i in 0..size {
            m.data[i * size + i] = 1;
        }
        m
    }

    /// Row-major encoded values; each must be `< q`.
    pub fn from_values(field: Field, rows: usize, cols: usize, values: Vec<u8>) -> Result<Self, LinalgError> {
        if values.len() != rows * cols {
            return Err(LinalgError::EntryCount { expected: rows * cols, found: values.len() });
        }
        if let Some(&bad) = values.iter().find(|&&v| v as u32 >= field.order()) {
            return Err(GfError::OutOfRange { value: bad as u32, order: field.order() }.into());
        }
        Ok(CodingMatrix { field, rows, cols, data: values })
    }

    pub fn from_rows<R: AsRef<[u8]>>(field: Field, cols: usize, rows: &[R]) -> Result<Self, LinalgError> {
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(LinalgError::EntryCount { expected: cols, found: row.len() });
            }
            values.extend_from_slice(row);
        }
        Self::from_values(field, rows.len(), cols, values)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn value(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        // Stored values are always valid elements.
        self.field.element(self.value(r, c) as u32).expect("stored value in range")
    }

    pub fn set(&mut self, r: usize, c: usize, value: FieldElement) -> Result<(), LinalgError> {
        if r >= self.rows {
            return Err(LinalgError::RowOutOfRange { row: r, rows: self.rows });
        }
        if c >= self.cols {
            return Err(LinalgError::ColumnOutOfRange { column: c, cols: self.cols });
        }
        let v = self.field.add(self.field.zero(), value)?;
        self.data[r * self.cols + c] = v.value();
        Ok(())
    }

    pub(crate) fn set_raw(&mut self, r: usize, c: usize, value: u8) {
        self.data[r * self.cols + c] = value;
    }

    pub fn push_row(&mut self, row: &[u8]) -> Result<(), LinalgError> {
        if row.len() != self.cols {
            return Err(LinalgError::EntryCount { expected: self.cols, found: row.len() });
        }
        if let Some(&bad) = row.iter().find(|&&v| v as u32 >= self.field.order()) {
            return Err(GfError::OutOfRange { value: bad as u32, order: self.field.order() }.into());
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// Copy of the matrix keeping only `keep` rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &r in keep {
            if r >= self.rows {
                return Err(LinalgError::RowOutOfRange { row: r, rows: self.rows });
            }
            data.extend_from_slice(self.row(r));
        }
        Ok(CodingMatrix { field: self.field.clone(), rows: keep.len(), cols: self.cols, data })
    }

    pub fn without_row(&self, r: usize) -> Result<Self, LinalgError> {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| i != r).collect();
        if r >= self.rows {
            return Err(LinalgError::RowOutOfRange { row: r, rows: self.rows });
        }
        self.select_rows(&keep)
    }

    fn check_columns(&self, columns: PacketSet) -> Result<(), LinalgError> {
        match columns.max() {
            Some(c) if c >= self.cols => Err(LinalgError::ColumnOutOfRange { column: c, cols: self.cols }),
            _ => Ok(()),
        }
    }

    /// Rank over GF(q) of the selected columns (all columns for `None`).
    pub fn rank(&self, columns: Option<PacketSet>) -> Result<usize, LinalgError> {
        let columns = columns.unwrap_or(PacketSet::prefix(self.cols));
        self.check_columns(columns)?;
        Ok(self.rank_of(columns, None))
    }

    /// Rank of `columns` over the rows other than `skip_row`.
    pub(crate) fn rank_of(&self, columns: PacketSet, skip_row: Option<usize>) -> usize {
        let width = columns.len();
        if width == 0 {
            return 0;
        }
        let mut buf = Vec::with_capacity(self.rows * width);
        for r in (0..self.rows).filter(|&r| Some(r) != skip_row) {
            let row = self.row(r);
            buf.extend(columns.iter().map(|c| row[c]));
        }
        let height = buf.len() / width;
        row_echelon(&self.field, &mut buf, height, width).len()
    }

    fn s1_holds(&self, wants: &WantsCollection, skip_row: Option<usize>) -> bool {
        wants.sets().iter().all(|&w| self.rank_of(w, skip_row) == w.len())
    }

    fn check_wants(&self, wants: &WantsCollection) -> Result<(), LinalgError> {
        if wants.packets() != self.cols {
            return Err(LinalgError::DimensionMismatch { matrix: self.cols, wants: wants.packets() });
        }
        Ok(())
    }

    /// Checks S-1 per receiver and S-2 by deleting each row in turn.
    pub fn verify_solution(&self, wants: &WantsCollection) -> Result<SolutionVerdict, LinalgError> {
        self.check_wants(wants)?;
        let s1_failures: Vec<RankShortfall> = wants
            .sets()
            .iter()
            .enumerate()
            .filter_map(|(receiver, &w)| {
                let rank = self.rank_of(w, None);
                (rank < w.len()).then_some(RankShortfall { receiver, rank, required: w.len() })
            })
            .collect();
        let removable_rows = (0..self.rows).filter(|&r| self.s1_holds(wants, Some(r))).collect();
        Ok(SolutionVerdict { s1_failures, removable_rows })
    }

    /// Greedily deletes rows, lowest index first, while S-1 keeps holding.
    ///
    /// One pass is enough: a row that was needed when it was tested stays
    /// needed after later deletions, since deleting rows never raises rank.
    pub fn prune_rows(&self, wants: &WantsCollection) -> Result<CodingMatrix, LinalgError> {
        self.check_wants(wants)?;
        if let Some(receiver) = wants.sets().iter().position(|&w| self.rank_of(w, None) < w.len()) {
            return Err(LinalgError::NotDecodable { receiver });
        }
        let mut current = self.clone();
        let mut r = 0;
        while r < current.rows {
            if current.s1_holds(wants, Some(r)) {
                current = current.without_row(r)?;
            } else {
                r += 1;
            }
        }
        Ok(current)
    }

    /// Packets of `wanted` that a receiver holding the rows in `received`
    /// can solve for. Packets outside `wanted` are treated as known and
    /// moved to the right-hand side, so only the `wanted` columns matter.
    pub fn decodable(&self, received: &[usize], wanted: PacketSet) -> Result<PacketSet, LinalgError> {
        self.check_columns(wanted)?;
        let sub = self.select_rows(received)?;
        let cols: Vec<usize> = wanted.iter().collect();
        let width = cols.len();
        let mut buf: Vec<u8> = Vec::with_capacity(sub.rows * width);
        for r in 0..sub.rows {
            buf.extend(cols.iter().map(|&c| sub.value(r, c)));
        }
        let pivots = reduced_row_echelon(&self.field, &mut buf, sub.rows, width, 0);
        Ok(determined(&buf, width, width, &pivots).map(|i| cols[i]).collect())
    }

    /// Solves for the wanted packets' payloads.
    ///
    /// `payload` is asked for the payload of each received coded packet
    /// (`Symbol::Coded(row)`) and of each side-information packet the
    /// receiver already holds (`Symbol::Known(packet)`, for every packet
    /// outside `wanted` with a nonzero coefficient in a received row). All
    /// payloads must share one length. Returns the determined packets in
    /// ascending order with their recovered payloads.
    pub fn decode<F>(
        &self,
        received: &[usize],
        wanted: PacketSet,
        mut payload: F,
    ) -> Result<Vec<(usize, Vec<u8>)>, LinalgError>
    where
        F: FnMut(Symbol) -> Vec<u8>,
    {
        self.check_columns(wanted)?;
        let sub = self.select_rows(received)?;
        let f = &self.field;
        let cols: Vec<usize> = wanted.iter().collect();
        let width = cols.len();

        let mut rhs: Vec<Vec<u8>> = Vec::with_capacity(sub.rows);
        let mut len = None;
        let mut check_len = |index: usize, p: &Vec<u8>| -> Result<(), LinalgError> {
            match len {
                None => {
                    len = Some(p.len());
                    Ok(())
                }
                Some(expected) if expected != p.len() => {
                    Err(LinalgError::PayloadLength { index, expected, found: p.len() })
                }
                Some(_) => Ok(()),
            }
        };
        let mut known: Vec<Option<Vec<u8>>> = vec![None; self.cols];
        for (i, &row) in received.iter().enumerate() {
            let mut y = payload(Symbol::Coded(row));
            check_len(row, &y)?;
            for k in (0..self.cols).filter(|&k| !wanted.contains(k)) {
                let c = sub.value(i, k);
                if c == 0 {
                    continue;
                }
                if known[k].is_none() {
                    let x = payload(Symbol::Known(k));
                    check_len(k, &x)?;
                    known[k] = Some(x);
                }
                let x = known[k].as_ref().expect("filled above");
                for (yj, &xj) in y.iter_mut().zip(x) {
                    *yj = f.sub_raw(*yj, f.mul_raw(c, xj));
                }
            }
            rhs.push(y);
        }

        // Augment: [wanted columns | payload symbols].
        let plen = len.unwrap_or(0);
        let total = width + plen;
        let mut buf: Vec<u8> = Vec::with_capacity(sub.rows * total);
        for (i, y) in rhs.iter().enumerate() {
            buf.extend(cols.iter().map(|&c| sub.value(i, c)));
            buf.extend_from_slice(y);
        }
        let pivots = reduced_row_echelon(f, &mut buf, sub.rows, total, width);
        let out = determined(&buf, total, width, &pivots)
            .map(|i| {
                let r = pivots.iter().position(|&(_, c)| c == i).expect("pivot column");
                let start = pivots[r].0 * total + width;
                (cols[i], buf[start..start + plen].to_vec())
            })
            .collect();
        Ok(out)
    }
}

/// A payload request issued by [`CodingMatrix::decode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    /// The coded packet sent as row `u` of the matrix.
    Coded(usize),
    /// A source packet the receiver already holds.
    Known(usize),
}

/// Receiver `receiver` sees rank `rank` on its Wants columns but needs `required`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankShortfall {
    pub receiver: usize,
    pub rank: usize,
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionVerdict {
    pub s1_failures: Vec<RankShortfall>,
    /// Rows whose deletion leaves S-1 intact.
    pub removable_rows: Vec<usize>,
}

impl SolutionVerdict {
    pub fn s1_ok(&self) -> bool {
        self.s1_failures.is_empty()
    }

    pub fn s2_ok(&self) -> bool {
        self.removable_rows.is_empty()
    }

    pub fn is_solution(&self) -> bool {
        self.s1_ok() && self.s2_ok()
    }
}

/// In-place row echelon form of a `height×width` row-major buffer.
/// Returns the pivots as `(row, column)`.
fn row_echelon(f: &Field, buf: &mut [u8], height: usize, width: usize) -> Vec<(usize, usize)> {
    eliminate(f, buf, height, width, width, false)
}

/// Reduced row echelon form, pivoting only within the first `pivot_cols`
/// columns (`0` means all). Pivot rows are normalized to a leading 1.
fn reduced_row_echelon(
    f: &Field,
    buf: &mut [u8],
    height: usize,
    width: usize,
    pivot_cols: usize,
) -> Vec<(usize, usize)> {
    let pivot_cols = if pivot_cols == 0 { width } else { pivot_cols };
    eliminate(f, buf, height, width, pivot_cols, true)
}

fn eliminate(
    f: &Field,
    buf: &mut [u8],
    height: usize,
    width: usize,
    pivot_cols: usize,
    reduced: bool,
) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut lead = 0;
    for col in 0..pivot_cols {
        if lead == height {
            break;
        }
        let Some(p) = (lead..height).find(|&r| buf[r * width + col] != 0) else {
            continue;
        };
        if p != lead {
            for j in 0..width {
                buf.swap(p * width + j, lead * width + j);
            }
        }
        let inv = f.inv_raw(buf[lead * width + col]);
        if reduced {
            for j in col..width {
                buf[lead * width + j] = f.mul_raw(buf[lead * width + j], inv);
            }
        }
        let start = if reduced { 0 } else { lead + 1 };
        for r in start..height {
            if r == lead {
                continue;
            }
            let entry = buf[r * width + col];
            if entry == 0 {
                continue;
            }
            // row_r -= factor * row_lead
            let factor = if reduced { entry } else { f.mul_raw(entry, inv) };
            for j in col..width {
                let sub = f.mul_raw(factor, buf[lead * width + j]);
                buf[r * width + j] = f.sub_raw(buf[r * width + j], sub);
            }
        }
        pivots.push((lead, col));
        lead += 1;
    }
    pivots
}

/// Columns whose unknown is pinned down by an RREF: a pivot column whose
/// pivot row has no other nonzero entry among the first `coeff_cols`
/// columns.
fn determined<'a>(
    buf: &'a [u8],
    row_width: usize,
    coeff_cols: usize,
    pivots: &'a [(usize, usize)],
) -> impl Iterator<Item = usize> + 'a {
    pivots.iter().filter_map(move |&(r, c)| {
        let row = &buf[r * row_width..r * row_width + coeff_cols];
        row.iter().enumerate().all(|(j, &v)| j == c || v == 0).then_some(c)
    })
}

/// Incrementally maintained row basis in echelon form, used to track rank
/// as random rows arrive.
#[derive(Debug, Clone)]
pub struct RowBasis {
    field: Field,
    width: usize,
    /// Reduced rows with their pivot column; leading entry is 1.
    rows: Vec<(usize, Vec<u8>)>,
}

impl RowBasis {
    pub fn new(field: Field, width: usize) -> Self {
        RowBasis { field, width, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the basis; returns true if it raised the rank.
    pub fn insert(&mut self, row: &[u8]) -> bool {
        assert_eq!(row.len(), self.width, "row width");
        let f = &self.field;
        let mut v = row.to_vec();
        for (pivot, basis) in &self.rows {
            let c = v[*pivot];
            if c != 0 {
                for j in *pivot..self.width {
                    v[j] = f.sub_raw(v[j], f.mul_raw(c, basis[j]));
                }
            }
        }
        let Some(pivot) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv_raw(v[pivot]);
        for x in v.iter_mut().skip(pivot) {
            *x = f.mul_raw(*x, inv);
        }
        // Keep earlier rows free of the new pivot so later reductions in
        // ascending order stay valid.
        for (_, basis) in self.rows.iter_mut() {
            let c = basis[pivot];
            if c != 0 {
                for j in pivot..self.width {
                    basis[j] = f.sub_raw(basis[j], f.mul_raw(c, v[j]));
                }
            }
        }
        self.rows.push((pivot, v));
        true
    }
}
