//! Sparse row storage and a direct solver for layered systems.
//!
//! Every operator in this crate moves at most one layer per step, so the
//! absorbing linear systems are block tridiagonal once states are ordered
//! layer by layer. [`LayeredSystem`] eliminates those blocks exactly (block
//! Thomas algorithm with dense pivoted LU inside each block), which works
//! unchanged in rational arithmetic.

use std::collections::BTreeMap;

use crate::value::Value;
use crate::{Error, Result};

pub type SparseRow<T> = Vec<(usize, T)>;

/// Row-major sparse matrix whose states carry a layer label.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: Vec<SparseRow<T>>,
    layer: Vec<usize>,
}

impl<T: Value> SparseMatrix<T> {
    pub fn new(rows: Vec<SparseRow<T>>, layer: Vec<usize>) -> Result<Self> {
        if rows.len() != layer.len() {
            return Err(Error::Shape {
                what: "layer labels",
                expected: rows.len(),
                found: layer.len(),
            });
        }
        let n = rows.len();
        for row in &rows {
            if let Some((j, _)) = row.iter().find(|(j, _)| *j >= n) {
                return Err(Error::Shape {
                    what: "column index",
                    expected: n,
                    found: *j,
                });
            }
        }
        Ok(SparseMatrix { rows, layer })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseRow<T>] {
        &self.rows
    }

    pub fn layer(&self, i: usize) -> usize {
        self.layer[i]
    }

    pub fn layers(&self) -> &[usize] {
        &self.layer
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .iter()
            .filter(|(c, _)| *c == j)
            .fold(T::zero(), |acc, (_, v)| acc + v.clone())
    }

    pub fn row_sum(&self, i: usize) -> T {
        crate::value::sum(self.rows[i].iter().map(|(_, v)| v))
    }

    /// `v ↦ v A` for a sparse row vector.
    pub fn left_mul(&self, v: &BTreeMap<usize, T>) -> BTreeMap<usize, T> {
        let mut out = BTreeMap::new();
        for (i, vi) in v {
            if vi.is_zero() {
                continue;
            }
            for (j, a) in &self.rows[*i] {
                let e = out.entry(*j).or_insert_with(T::zero);
                *e = e.clone() + vi.clone() * a.clone();
            }
        }
        out
    }

    pub fn map<U: Value>(&self, f: impl Fn(&T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|(j, v)| (*j, f(v))).collect())
                .collect(),
            layer: self.layer.clone(),
        }
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [SparseRow<T>] {
        &mut self.rows
    }
}

/// Square system `M x = b` over states ordered by non-decreasing layer, with
/// couplings only between equal or adjacent layers.
pub struct LayeredSystem<T> {
    /// `starts[l]..starts[l+1]` are the unknowns of layer `l`.
    starts: Vec<usize>,
    entries: Vec<BTreeMap<usize, T>>,
}

impl<T: Value> LayeredSystem<T> {
    /// `layer_of[i]` must be non-decreasing; layers are relabelled to be
    /// contiguous from zero.
    pub fn new(layer_of: &[usize]) -> Result<Self> {
        let mut starts = vec![0];
        for i in 1..layer_of.len() {
            if layer_of[i] < layer_of[i - 1] {
                return Err(Error::Solver("unknowns are not ordered by layer".into()));
            }
            if layer_of[i] != layer_of[i - 1] {
                starts.push(i);
            }
        }
        starts.push(layer_of.len());
        Ok(LayeredSystem {
            starts,
            entries: vec![BTreeMap::new(); layer_of.len()],
        })
    }

    pub fn add(&mut self, row: usize, col: usize, v: T) {
        let e = self.entries[row].entry(col).or_insert_with(T::zero);
        *e = e.clone() + v;
    }

    fn block_of(&self, i: usize) -> usize {
        self.starts.partition_point(|&s| s <= i) - 1
    }

    fn dense_block(&self, row_block: usize, col_block: usize) -> Result<Vec<Vec<T>>> {
        let (r0, r1) = (self.starts[row_block], self.starts[row_block + 1]);
        let (c0, c1) = (self.starts[col_block], self.starts[col_block + 1]);
        let mut block = vec![vec![T::zero(); c1 - c0]; r1 - r0];
        for (bi, row) in self.entries[r0..r1].iter().enumerate() {
            for (c, v) in row.range(c0..c1) {
                block[bi][c - c0] = v.clone();
            }
        }
        Ok(block)
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.entries.len();
        if rhs.len() != n {
            return Err(Error::Shape {
                what: "right-hand side",
                expected: n,
                found: rhs.len(),
            });
        }
        for (i, row) in self.entries.iter().enumerate() {
            let bi = self.block_of(i);
            if let Some(&c) = row.keys().find(|&&c| self.block_of(c).abs_diff(bi) > 1) {
                return Err(Error::Solver(format!(
                    "coupling between unknowns {i} and {c} skips a layer"
                )));
            }
        }
        let nb = self.starts.len() - 1;

        // forward sweep: C_l = S_l⁻¹ U_l, d_l = S_l⁻¹ (b_l − L_l d_{l−1})
        let mut c_blocks: Vec<Vec<Vec<T>>> = Vec::with_capacity(nb);
        let mut d_blocks: Vec<Vec<T>> = Vec::with_capacity(nb);
        for l in 0..nb {
            let mut s = self.dense_block(l, l)?;
            let mut b: Vec<T> = rhs[self.starts[l]..self.starts[l + 1]].to_vec();
            if l > 0 {
                let lower = self.dense_block(l, l - 1)?;
                let prev_c = &c_blocks[l - 1];
                let prev_d = &d_blocks[l - 1];
                for (i, lrow) in lower.iter().enumerate() {
                    for (k, lv) in lrow.iter().enumerate() {
                        if lv.is_zero() {
                            continue;
                        }
                        for (j, cv) in prev_c[k].iter().enumerate() {
                            s[i][j] = s[i][j].clone() - lv.clone() * cv.clone();
                        }
                        b[i] = b[i].clone() - lv.clone() * prev_d[k].clone();
                    }
                }
            }
            let upper = if l + 1 < nb {
                self.dense_block(l, l + 1)?
            } else {
                vec![Vec::new(); s.len()]
            };
            let (c, d) = dense_solve(s, upper, b)?;
            c_blocks.push(c);
            d_blocks.push(d);
        }

        // back substitution: x_l = d_l − C_l x_{l+1}
        let mut x = vec![T::zero(); n];
        for l in (0..nb).rev() {
            let base = self.starts[l];
            for (i, di) in d_blocks[l].iter().enumerate() {
                let mut v = di.clone();
                if l + 1 < nb {
                    let next = self.starts[l + 1];
                    for (j, cv) in c_blocks[l][i].iter().enumerate() {
                        v = v - cv.clone() * x[next + j].clone();
                    }
                }
                x[base + i] = v;
            }
        }
        Ok(x)
    }
}

/// Solves `S [C | d] = [U | b]` by Gaussian elimination with partial pivoting.
fn dense_solve<T: Value>(
    mut s: Vec<Vec<T>>,
    mut u: Vec<Vec<T>>,
    mut b: Vec<T>,
) -> Result<(Vec<Vec<T>>, Vec<T>)> {
    let n = s.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                s[i][col]
                    .abs()
                    .partial_cmp(&s[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or_else(|| Error::Solver("empty block".into()))?;
        if s[pivot][col].is_zero() || (!T::EXACT && s[pivot][col].abs().to_f64() < 1e-300) {
            return Err(Error::Solver(format!("singular block at column {col}")));
        }
        s.swap(col, pivot);
        u.swap(col, pivot);
        b.swap(col, pivot);
        let p = s[col][col].clone();
        for row in col + 1..n {
            if s[row][col].is_zero() {
                continue;
            }
            let f = s[row][col].clone() / p.clone();
            for k in col..n {
                s[row][k] = s[row][k].clone() - f.clone() * s[col][k].clone();
            }
            for k in 0..u[row].len() {
                u[row][k] = u[row][k].clone() - f.clone() * u[col][k].clone();
            }
            b[row] = b[row].clone() - f.clone() * b[col].clone();
        }
    }
    for col in (0..n).rev() {
        let p = s[col][col].clone();
        for k in 0..u[col].len() {
            u[col][k] = u[col][k].clone() / p.clone();
        }
        b[col] = b[col].clone() / p.clone();
        for row in 0..col {
            if s[row][col].is_zero() {
                continue;
            }
            let f = s[row][col].clone();
            for k in 0..u[row].len() {
                u[row][k] = u[row][k].clone() - f.clone() * u[col][k].clone();
            }
            b[row] = b[row].clone() - f.clone() * b[col].clone();
        }
    }
    Ok((u, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;

    fn dense_reference(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let (c, d) = dense_solve(a.to_vec(), vec![Vec::new(); a.len()], b.to_vec()).unwrap();
        assert!(c.iter().all(|r| r.is_empty()));
        d
    }

    #[test]
    fn block_solve_matches_dense_elimination() {
        // layers of sizes 1, 3, 2 with adjacent couplings
        let layers = [0, 1, 1, 1, 2, 2];
        let mut a = vec![vec![0.0; 6]; 6];
        let mut sys = LayeredSystem::new(&layers).unwrap();
        let mut seed = 7u64;
        for i in 0..6 {
            for j in 0..6 {
                if layers[i].abs_diff(layers[j]) <= 1 {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let v = ((seed >> 33) % 1000) as f64 / 1000.0 - 0.5;
                    let v = if i == j { v + 4.0 } else { v };
                    a[i][j] = v;
                    sys.add(i, j, v);
                }
            }
        }
        let b = [1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
        let x = sys.solve(&b).unwrap();
        let reference = dense_reference(&a, &b);
        for (u, v) in x.iter().zip(&reference) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_tridiagonal_solve() {
        // 2x - y = 1, -x + 2y - z = 0, -y + 2z = 1  =>  x = y = z = 1
        let mut sys = LayeredSystem::<BigRational>::new(&[0, 1, 2]).unwrap();
        let two = BigRational::ratio(2, 1);
        let m1 = BigRational::ratio(-1, 1);
        for i in 0..3 {
            sys.add(i, i, two.clone());
        }
        for i in 0..2 {
            sys.add(i, i + 1, m1.clone());
            sys.add(i + 1, i, m1.clone());
        }
        let one = BigRational::ratio(1, 1);
        let x = sys
            .solve(&[one.clone(), BigRational::ratio(0, 1), one.clone()])
            .unwrap();
        assert!(x.iter().all(|v| *v == one));
    }

    #[test]
    fn detects_singular_and_skipping_systems() {
        let mut sys = LayeredSystem::<f64>::new(&[0, 1]).unwrap();
        sys.add(0, 0, 1.0);
        sys.add(0, 1, 1.0);
        sys.add(1, 0, 1.0);
        sys.add(1, 1, 1.0);
        assert!(matches!(sys.solve(&[1.0, 1.0]), Err(Error::Solver(_))));

        let mut sys = LayeredSystem::<f64>::new(&[0, 1, 2]).unwrap();
        for i in 0..3 {
            sys.add(i, i, 1.0);
        }
        sys.add(0, 2, 1.0);
        assert!(matches!(sys.solve(&[1.0; 3]), Err(Error::Solver(_))));
        assert!(LayeredSystem::<f64>::new(&[1, 0]).is_err());
    }
}
