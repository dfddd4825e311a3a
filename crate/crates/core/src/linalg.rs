//! Dense linear algebra over a [`FieldSpec`]: row reduction, rank, null
//! spaces and small matrix products. Matrices are row-major `Vec<Vec<u32>>`
//! of field codes; they are tiny (at most 10 columns) so nothing clever.

use crate::ff::FieldSpec;

/// Output of [`rref`]: the nonzero rows of the reduced row echelon form
/// together with their pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub rows: Vec<Vec<u32>>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Reduced row echelon form. Zero rows are dropped.
pub fn rref(field: &FieldSpec, rows: &[Vec<u32>], ncols: usize) -> Echelon {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(found) = (r..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(r, found);
        let scale = field.inv(m[r][col]).expect("pivot is nonzero");
        for v in m[r].iter_mut() {
            *v = field.mul(*v, scale);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(factor, y));
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    Echelon { rows: m, pivots }
}

pub fn rank(field: &FieldSpec, rows: &[Vec<u32>], ncols: usize) -> usize {
    rref(field, rows, ncols).rank()
}

/// Basis of `{x : M x = 0}`. Each basis vector carries a 1 in its own free
/// column and 0 in the other free columns, so the basis is already in
/// echelon form with respect to the free variables.
pub fn null_space(field: &FieldSpec, rows: &[Vec<u32>], ncols: usize) -> Vec<Vec<u32>> {
    let ech = rref(field, rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !ech.pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u32; ncols];
            v[fc] = 1;
            for (row, &pc) in ech.rows.iter().zip(&ech.pivots) {
                v[pc] = field.neg(row[fc]);
            }
            v
        })
        .collect()
}

pub fn mat_mul(field: &FieldSpec, a: &[Vec<u32>], b: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(0, |acc, k| field.add(acc, field.mul(row[k], b[k][j]))))
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn identity(n: usize) -> Vec<Vec<u32>> {
    (0..n).map(|i| (0..n).map(|j| u32::from(i == j)).collect()).collect()
}

pub fn dot(field: &FieldSpec, a: &[u32], b: &[u32]) -> u32 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}
