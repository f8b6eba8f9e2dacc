//! Sparse LU factorization of a basis matrix with partial pivoting,
//! used for the forward (`ftran`) and transposed (`btran`) solves of the
//! revised simplex method.
//!
//! The factorization is left-looking with a dense accumulator: columns
//! are processed in increasing-nonzero order, each is solved against the
//! L computed so far (a sparse triangular solve driven by a min-heap of
//! reachable pivot positions), and the pivot is the largest remaining
//! entry by magnitude. Columns that vanish numerically are rejected and
//! replaced by unit columns on the leftover rows, which repairs a
//! singular basis and reports the substitutions to the caller.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// LU factors of one m-by-m basis matrix.
///
/// Internally everything is indexed by *position* (the order pivots were
/// chosen), with maps back to original row indices and to the basis slot
/// each column came from.
#[derive(Debug, Clone)]
pub struct LuFactors {
    m: usize,
    /// Below-diagonal L entries per position: `(original_row, value)`.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Above-diagonal U entries per position: `(earlier_position, value)`.
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
    /// position -> original row chosen as pivot
    pivot_row: Vec<usize>,
    /// position -> basis slot whose column landed there
    slot_of_pos: Vec<usize>,
    /// `(slot, row)` pairs where a dependent column was replaced by the
    /// unit column of `row`
    repaired: Vec<(usize, usize)>,
    nnz: usize,
}

impl LuFactors {
    /// Factorize the matrix whose `slot`-th column is `cols[slot]`
    /// (entries `(row, value)`, rows unordered but distinct). Entries
    /// smaller than `tol` are never accepted as pivots.
    pub fn factorize(cols: &[Vec<(usize, f64)>], tol: f64) -> LuFactors {
        let m = cols.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&s| cols[s].len());

        let mut l_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut u_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut u_diag: Vec<f64> = Vec::with_capacity(m);
        let mut pivot_row: Vec<usize> = Vec::with_capacity(m);
        let mut slot_of_pos: Vec<usize> = Vec::with_capacity(m);
        let mut pos_of_row = vec![usize::MAX; m];
        let mut deferred: Vec<usize> = Vec::new();

        let mut v = vec![0.0f64; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();

        for &slot in &order {
            touched.clear();
            heap.clear();
            for &(r, val) in &cols[slot] {
                v[r] = val;
                touched.push(r);
                if pos_of_row[r] != usize::MAX {
                    heap.push(Reverse(pos_of_row[r]));
                }
            }
            // sparse lower triangular solve against the pivots found so far
            let mut u_col: Vec<(usize, f64)> = Vec::new();
            let mut prev = usize::MAX;
            while let Some(Reverse(p)) = heap.pop() {
                if p == prev {
                    continue;
                }
                prev = p;
                let pr = pivot_row[p];
                let t = v[pr];
                v[pr] = 0.0;
                if t != 0.0 {
                    u_col.push((p, t));
                    for &(r, lv) in &l_cols[p] {
                        debug_assert!(
                            pos_of_row[r] == usize::MAX || pos_of_row[r] > p,
                            "fill touches already-processed position"
                        );
                        if v[r] == 0.0 {
                            touched.push(r);
                            if pos_of_row[r] != usize::MAX {
                                heap.push(Reverse(pos_of_row[r]));
                            }
                        }
                        v[r] -= lv * t;
                    }
                }
            }
            // partial pivoting over the rows not yet assigned
            let mut best = usize::MAX;
            let mut best_abs = tol;
            for &r in &touched {
                if pos_of_row[r] == usize::MAX && v[r].abs() > best_abs {
                    best = r;
                    best_abs = v[r].abs();
                }
            }
            if best == usize::MAX {
                for &r in &touched {
                    v[r] = 0.0;
                }
                deferred.push(slot);
                continue;
            }
            let piv = v[best];
            let mut l_col: Vec<(usize, f64)> = Vec::new();
            // consume values while building so rows listed twice in
            // `touched` (zeroed by cancellation, then refilled) cannot
            // produce duplicate L entries
            for &r in &touched {
                if r != best && pos_of_row[r] == usize::MAX && v[r] != 0.0 {
                    l_col.push((r, v[r] / piv));
                }
                v[r] = 0.0;
            }
            let k = pivot_row.len();
            pos_of_row[best] = k;
            pivot_row.push(best);
            slot_of_pos.push(slot);
            u_diag.push(piv);
            u_cols.push(u_col);
            l_cols.push(l_col);
        }

        // repair: pair every rejected column with a leftover row
        let mut repaired = Vec::new();
        if !deferred.is_empty() {
            let mut leftover: Vec<usize> =
                (0..m).filter(|&r| pos_of_row[r] == usize::MAX).collect();
            debug_assert_eq!(leftover.len(), deferred.len());
            for &slot in &deferred {
                let r = leftover.pop().expect("row available for every rejected column");
                pos_of_row[r] = pivot_row.len();
                pivot_row.push(r);
                slot_of_pos.push(slot);
                u_diag.push(1.0);
                u_cols.push(Vec::new());
                l_cols.push(Vec::new());
                repaired.push((slot, r));
            }
        }

        let nnz = m
            + l_cols.iter().map(Vec::len).sum::<usize>()
            + u_cols.iter().map(Vec::len).sum::<usize>();
        LuFactors {
            m,
            l_cols,
            u_cols,
            u_diag,
            pivot_row,
            slot_of_pos,
            repaired,
            nnz,
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Stored entries in L and U, including diagonals.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Basis slots whose columns were numerically dependent, with the
    /// row whose unit column substituted for each.
    pub fn repaired_slots(&self) -> &[(usize, usize)] {
        &self.repaired
    }

    /// Solve `B x = b` with `b` indexed by original row; the result is
    /// indexed by basis slot.
    pub fn ftran(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.m);
        let mut v = b.to_vec();
        let mut y = vec![0.0f64; self.m];
        for p in 0..self.m {
            let t = v[self.pivot_row[p]];
            if t != 0.0 {
                y[p] = t;
                for &(r, lv) in &self.l_cols[p] {
                    v[r] -= lv * t;
                }
            }
        }
        for p in (0..self.m).rev() {
            let t = y[p] / self.u_diag[p];
            y[p] = t;
            if t != 0.0 {
                for &(pp, uv) in &self.u_cols[p] {
                    y[pp] -= uv * t;
                }
            }
        }
        let mut x = vec![0.0f64; self.m];
        for p in 0..self.m {
            x[self.slot_of_pos[p]] = y[p];
        }
        x
    }

    /// Solve `B^T y = c` with `c` indexed by basis slot; the result is
    /// indexed by original row.
    pub fn btran(&self, c: &[f64]) -> Vec<f64> {
        debug_assert_eq!(c.len(), self.m);
        let mut z = vec![0.0f64; self.m];
        for p in 0..self.m {
            let mut s = c[self.slot_of_pos[p]];
            for &(pp, uv) in &self.u_cols[p] {
                s -= uv * z[pp];
            }
            z[p] = s / self.u_diag[p];
        }
        let mut y = vec![0.0f64; self.m];
        for p in (0..self.m).rev() {
            let mut s = z[p];
            for &(r, lv) in &self.l_cols[p] {
                s -= lv * y[r];
            }
            y[self.pivot_row[p]] = s;
        }
        y
    }
}
