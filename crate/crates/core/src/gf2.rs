//! Bit-packed linear algebra over GF(2).
//!
//! Everything downstream (decoding matrices, transfer matrices, banded
//! samples) lives in [`BitMatrix`]. Rows are packed 64 entries per word;
//! all elimination is row-wise, so no column-major access path exists.

use rand::Rng;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A bit-packed GF(2) row vector. Used both for global and local encoding
/// vectors (the length is k, α, or n depending on context).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GEVector {
    len: usize,
    words: Vec<u64>,
}

impl GEVector {
    pub fn zero(len: usize) -> Self {
        GEVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Unit vector with a one at `pos` (0-based).
    pub fn unit(len: usize, pos: usize) -> Self {
        let mut v = Self::zero(len);
        v.set(pos, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &GEVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// 0-based indices of the nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Packet contents: a fixed-length byte string. Payload arithmetic is
/// bytewise XOR, the vector-space addition over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload(pub Vec<u8>);

impl Payload {
    pub fn zero(len: usize) -> Self {
        Payload(vec![0; len])
    }

    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut bytes = vec![0u8; len];
        rng.fill(&mut bytes[..]);
        Payload(bytes)
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Payload) {
        debug_assert_eq!(self.0.len(), other.0.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Errors from the extended-system solver.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: matrix has {rows} rows but {payloads} payloads were given")]
    DimensionMismatch { rows: usize, payloads: usize },
    #[error("payload lengths differ")]
    PayloadLengthMismatch,
}

/// Bit-packed matrix over GF(2), row-major.
///
/// Padding bits beyond `n_cols` in each row are kept at zero; every
/// mutating entry point preserves that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<GEVector>,
}

impl BitMatrix {
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        BitMatrix {
            n_rows,
            n_cols,
            rows: vec![GEVector::zero(n_cols); n_rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<GEVector>, n_cols: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == n_cols));
        BitMatrix {
            n_rows: rows.len(),
            n_cols,
            rows,
        }
    }

    /// Build from 0/1 entries, row-major. Test and FFI convenience.
    pub fn from_entries(n_rows: usize, n_cols: usize, entries: &[u8]) -> Self {
        assert_eq!(entries.len(), n_rows * n_cols);
        let mut m = Self::zero(n_rows, n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                if entries[r * n_cols + c] != 0 {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Every entry independently uniform on {0,1}; deterministic given the
    /// generator state.
    pub fn random(n_rows: usize, n_cols: usize, rng: &mut impl Rng) -> Self {
        let mut m = Self::zero(n_rows, n_cols);
        let full_words = n_cols / WORD_BITS;
        let tail_bits = n_cols % WORD_BITS;
        for row in &mut m.rows {
            for w in 0..full_words {
                row.words[w] = rng.gen::<u64>();
            }
            if tail_bits > 0 {
                row.words[full_words] = rng.gen::<u64>() & ((1u64 << tail_bits) - 1);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn row(&self, r: usize) -> &GEVector {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[GEVector] {
        &self.rows
    }

    pub fn push_row(&mut self, row: GEVector) {
        debug_assert_eq!(row.len(), self.n_cols);
        self.rows.push(row);
        self.n_rows += 1;
    }

    /// Column-sliced copy: keeps `cols` (0-based) in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zero(self.n_rows, cols.len());
        for r in 0..self.n_rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        rank_in_place(&mut rows, self.n_cols)
    }
}

/// Forward elimination on owned rows; returns the rank. The rows are left
/// in (non-reduced) echelon order.
fn rank_in_place(rows: &mut [GEVector], n_cols: usize) -> usize {
    let n_rows = rows.len();
    let mut rank = 0;
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail {
            if row.get(col) {
                row.xor_assign(pivot_row);
            }
        }
        rank += 1;
    }
    rank
}

/// Result of reduced row-echelon form: zero rows removed, rows ordered by
/// pivot column, so equal row spaces produce equal `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: BitMatrix,
    /// 0-based pivot columns, ascending; `pivots.len()` is the rank.
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan elimination to canonical RREF.
pub fn rref(m: &BitMatrix) -> Rref {
    let mut rows = m.rows.clone();
    let n_rows = rows.len();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..m.n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        // Clear the pivot column everywhere else (Jordan step).
        for r in 0..n_rows {
            if r != rank && rows[r].get(col) {
                let (a, b) = if r < rank {
                    let (lo, hi) = rows.split_at_mut(rank);
                    (&mut lo[r], &hi[0])
                } else {
                    let (lo, hi) = rows.split_at_mut(r);
                    (&mut hi[0], &lo[rank])
                };
                a.xor_assign(b);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    Rref {
        matrix: BitMatrix::from_rows(rows, m.n_cols),
        pivots,
    }
}

/// Solve `Q · X = Y` for `X` where payload addition is bytewise XOR.
///
/// Returns `None` when `rank(Q) < Q.n_cols` (the system is not uniquely
/// solvable).
pub fn solve_extended(q: &BitMatrix, y: &[Payload]) -> Result<Option<Vec<Payload>>, Gf2Error> {
    if y.len() != q.n_rows {
        return Err(Gf2Error::DimensionMismatch {
            rows: q.n_rows,
            payloads: y.len(),
        });
    }
    let payload_len = y.first().map_or(0, Payload::len);
    if y.iter().any(|p| p.len() != payload_len) {
        return Err(Gf2Error::PayloadLengthMismatch);
    }

    // Gauss-Jordan on the extended system [Q | Y], mirroring row ops on
    // the payload column.
    let mut rows = q.rows.clone();
    let mut payloads = y.to_vec();
    let n_rows = rows.len();
    let mut pivot_row_of_col = vec![usize::MAX; q.n_cols];
    let mut rank = 0;
    for col in 0..q.n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        payloads.swap(rank, pivot);
        for r in 0..n_rows {
            if r != rank && rows[r].get(col) {
                let pivot_vec = rows[rank].clone();
                let pivot_payload = payloads[rank].clone();
                rows[r].xor_assign(&pivot_vec);
                payloads[r].xor_assign(&pivot_payload);
            }
        }
        pivot_row_of_col[col] = rank;
        rank += 1;
    }
    if rank < q.n_cols {
        return Ok(None);
    }
    let x = (0..q.n_cols)
        .map(|col| payloads[pivot_row_of_col[col]].clone())
        .collect();
    Ok(Some(x))
}

/// Columns `j` (0-based) whose standard basis vector lies in the row space
/// of `Q`: exactly those with an RREF row supported on `{j}` alone.
pub fn recoverable_columns(q: &BitMatrix) -> Vec<usize> {
    let reduced = rref(q);
    let mut out = Vec::new();
    for (i, &pivot_col) in reduced.pivots.iter().enumerate() {
        let row = reduced.matrix.row(i);
        // Pivot is set by construction; recoverable iff it is the only one.
        let only_pivot = row
            .words()
            .iter()
            .enumerate()
            .all(|(w, &bits)| bits == unit_word(pivot_col, w));
        if only_pivot {
            out.push(pivot_col);
        }
    }
    out
}

#[inline]
fn unit_word(bit: usize, word_index: usize) -> u64 {
    if bit / WORD_BITS == word_index {
        1u64 << (bit % WORD_BITS)
    } else {
        0
    }
}
