//! Matrices of polynomials and their rank over the fraction field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::Field;
use super::poly::MPoly;
use crate::error::{Error, Result};

/// Half-width of the integer box evaluation points are drawn from.
const EVAL_BOX: i64 = 1 << 24;

/// Rectangular matrix with polynomial entries sharing one ring.
#[derive(Clone, PartialEq, Debug)]
pub struct FFMatrix<C> {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<MPoly<C>>,
}

impl<C: Field> FFMatrix<C> {
    pub fn new(nvars: usize, rows: Vec<Vec<MPoly<C>>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::Precondition("ragged matrix rows".into()));
            }
            for e in row {
                if e.nvars() != nvars {
                    return Err(Error::NvarsMismatch(nvars, e.nvars()));
                }
                entries.push(e);
            }
        }
        Ok(FFMatrix {
            rows: nrows,
            cols: ncols,
            nvars,
            entries,
        })
    }

    pub fn zeros(nvars: usize, rows: usize, cols: usize) -> Self {
        FFMatrix {
            rows,
            cols,
            nvars,
            entries: vec![MPoly::zero(nvars); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &MPoly<C> {
        &self.entries[r * self.cols + c]
    }

    /// Matrix of scalars obtained by evaluating every entry at `point`.
    pub fn eval(&self, point: &[C]) -> Result<Vec<Vec<C>>> {
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = (0..self.cols)
                .map(|c| self.get(r, c).eval(point))
                .collect::<Result<Vec<_>>>()?;
            out.push(row);
        }
        Ok(out)
    }

    /// Rank over the field of fractions.
    ///
    /// A numeric rank at an evaluation point never exceeds the symbolic
    /// rank, so a full-rank evaluation is a certificate. Anything short of
    /// full rank is settled by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let full = self.rows.min(self.cols);
        if full == 0 {
            return 0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (self.rows * 31 + self.cols) as u64);
        for _ in 0..2 {
            let point: Vec<C> = (0..self.nvars)
                .map(|_| C::from_i64(rng.gen_range(-EVAL_BOX..=EVAL_BOX)))
                .collect();
            let numeric = self.eval(&point).expect("point has matching arity");
            if scalar_rank(numeric) == full {
                return full;
            }
        }
        self.rank_bareiss()
    }

    /// Exact rank by Bareiss elimination with full pivoting.
    pub fn rank_bareiss(&self) -> usize {
        let mut a: Vec<Vec<MPoly<C>>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).clone()).collect())
            .collect();
        let mut prev = MPoly::one(self.nvars);
        let mut rank = 0;
        for k in 0..self.rows.min(self.cols) {
            // Smallest nonzero entry as pivot keeps intermediate growth down.
            let pivot = (k..self.rows)
                .flat_map(|i| (k..self.cols).map(move |j| (i, j)))
                .filter(|&(i, j)| !a[i][j].is_zero())
                .min_by_key(|&(i, j)| (a[i][j].num_terms(), a[i][j].total_degree()));
            let Some((pi, pj)) = pivot else { break };
            a.swap(k, pi);
            if pj != k {
                for row in a.iter_mut() {
                    row.swap(k, pj);
                }
            }
            for i in k + 1..self.rows {
                for j in k + 1..self.cols {
                    let t = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = t.div_exact(&prev).expect("Bareiss division is exact");
                }
                a[i][k] = MPoly::zero(self.nvars);
            }
            prev = a[k][k].clone();
            rank += 1;
        }
        rank
    }
}

/// Rank of a scalar matrix by Gaussian elimination.
pub fn scalar_rank<C: Field>(mut m: Vec<Vec<C>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][c].inv();
        for r in rank + 1..rows {
            if m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone() * inv.clone();
            for k in c..cols {
                let t = m[rank][k].clone() * f.clone();
                m[r][k] = m[r][k].clone() - t;
            }
        }
        rank += 1;
    }
    rank
}

/// Checked entry point: rank of `m` over the fraction field.
pub fn matrix_rank_ff<C: Field>(m: &FFMatrix<C>) -> usize {
    m.rank()
}
