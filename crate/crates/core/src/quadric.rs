//! Symmetric bilinear forms `<x, y> = x^T M y` and their quadratic forms
//! `Q(x) = <x, x>`: congruence diagonalization, exhaustive level-set counts,
//! the Gauss-sum expansion of those counts, null vectors and restriction.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::FieldSpec;
use crate::linalg;

/// Largest `q^n` that exhaustive counting will walk.
pub const MAX_EXHAUSTIVE: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    field: FieldSpec,
    matrix: Vec<Vec<u32>>,
    // Diagonal of A^T M A; nonzero entries first.
    diagonal: Vec<u32>,
    change_of_basis: Vec<Vec<u32>>,
    rank: usize,
}

impl Serialize for QuadraticForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

/// Congruence `A^T M A = diag(d)` with `A` invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub diagonal: Vec<u32>,
    pub change_of_basis: Vec<Vec<u32>>,
}

impl NormalForm {
    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|&&d| d != 0).count()
    }

    /// The nonzero diagonal entries `alpha_1 .. alpha_k`.
    pub fn alphas(&self) -> Vec<u32> {
        self.diagonal.iter().copied().filter(|&d| d != 0).collect()
    }
}

fn check_square_symmetric(field: &FieldSpec, m: &[Vec<u32>]) -> Result<usize> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::Usage("form matrix must be square and nonempty".into()));
    }
    if m.iter().flatten().any(|&c| c >= field.q()) {
        return Err(Error::Usage("form matrix entries must be field codes".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return Err(Error::Usage(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(n)
}

/// Symmetric Gaussian elimination. Pivots on the first nonzero diagonal
/// entry; when the remaining diagonal vanishes, `e_j -> e_j + e_k` turns a
/// nonzero off-diagonal entry `m_jk` into the diagonal entry `2 m_jk`.
pub fn normal_form(field: &FieldSpec, m: &[Vec<u32>]) -> Result<NormalForm> {
    let n = check_square_symmetric(field, m)?;
    let mut w = m.to_vec();
    let mut a = linalg::identity(n);

    // New basis vector j := old j + c * old k.
    let add_multiple = |w: &mut Vec<Vec<u32>>, a: &mut Vec<Vec<u32>>, j: usize, k: usize, c: u32| {
        for i in 0..n {
            w[j][i] = field.add(w[j][i], field.mul(c, w[k][i]));
        }
        for row in w.iter_mut() {
            row[j] = field.add(row[j], field.mul(c, row[k]));
        }
        for row in a.iter_mut() {
            row[j] = field.add(row[j], field.mul(c, row[k]));
        }
    };
    let swap = |w: &mut Vec<Vec<u32>>, a: &mut Vec<Vec<u32>>, i: usize, j: usize| {
        w.swap(i, j);
        for row in w.iter_mut() {
            row.swap(i, j);
        }
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    };

    for i in 0..n {
        let pivot = match (i..n).find(|&j| w[j][j] != 0) {
            Some(j) => j,
            None => {
                let off = (i..n).flat_map(|j| (i..n).map(move |k| (j, k))).find(|&(j, k)| j != k && w[j][k] != 0);
                let Some((j, k)) = off else { break };
                add_multiple(&mut w, &mut a, j, k, 1);
                j
            }
        };
        swap(&mut w, &mut a, i, pivot);
        let d_inv = field.inv(w[i][i]).expect("pivot is nonzero");
        for r in i + 1..n {
            if w[r][i] != 0 {
                let c = field.neg(field.mul(w[r][i], d_inv));
                add_multiple(&mut w, &mut a, r, i, c);
            }
        }
    }

    let diagonal: Vec<u32> = (0..n).map(|i| w[i][i]).collect();
    debug_assert!((0..n).all(|i| (0..n).all(|j| i == j || w[i][j] == 0)));
    Ok(NormalForm { diagonal, change_of_basis: a })
}

/// `A^T M A`.
pub fn congruent(field: &FieldSpec, m: &[Vec<u32>], a: &[Vec<u32>]) -> Vec<Vec<u32>> {
    linalg::mat_mul(field, &linalg::mat_mul(field, &linalg::transpose(a), m), a)
}

impl QuadraticForm {
    pub fn new(field: FieldSpec, matrix: Vec<Vec<u32>>) -> Result<Self> {
        let nf = normal_form(&field, &matrix)?;
        let d = congruent(&field, &matrix, &nf.change_of_basis);
        let n = matrix.len();
        let diagonal_ok = (0..n).all(|i| (0..n).all(|j| d[i][j] == if i == j { nf.diagonal[i] } else { 0 }));
        if !diagonal_ok || linalg::rank(&field, &nf.change_of_basis, n) != n {
            return Err(Error::Internal("normal form failed its congruence check".into()));
        }
        let rank = nf.rank();
        Ok(QuadraticForm {
            field,
            matrix,
            diagonal: nf.diagonal,
            change_of_basis: nf.change_of_basis,
            rank,
        })
    }

    /// `sum_i d_i x_i^2`.
    pub fn diagonal(field: FieldSpec, entries: &[u32]) -> Result<Self> {
        let n = entries.len();
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { entries[i] } else { 0 }).collect()).collect();
        Self::new(field, matrix)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<u32>] {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank == self.dim()
    }

    pub fn normal_form(&self) -> NormalForm {
        NormalForm { diagonal: self.diagonal.clone(), change_of_basis: self.change_of_basis.clone() }
    }

    pub fn alphas(&self) -> Vec<u32> {
        self.diagonal.iter().copied().filter(|&d| d != 0).collect()
    }

    pub fn bilinear(&self, x: &[u32], y: &[u32]) -> u32 {
        let f = &self.field;
        self.matrix
            .iter()
            .zip(x)
            .fold(0, |acc, (row, &xi)| if xi == 0 { acc } else { f.add(acc, f.mul(xi, linalg::dot(f, row, y))) })
    }

    #[inline]
    pub fn eval(&self, x: &[u32]) -> u32 {
        self.bilinear(x, x)
    }

    fn check_exhaustive(&self) -> Result<u64> {
        let total = (self.field.q() as u64)
            .checked_pow(self.dim() as u32)
            .filter(|&t| t <= MAX_EXHAUSTIVE)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "q^n = {}^{} exceeds the exhaustive cap {MAX_EXHAUSTIVE}",
                    self.field.q(),
                    self.dim()
                ))
            })?;
        Ok(total)
    }

    /// Calls `visit` on every vector of `F^n` in lexicographic order.
    fn for_each_vector(&self, mut visit: impl FnMut(&[u32])) -> Result<()> {
        let total = self.check_exhaustive()?;
        let n = self.dim();
        let q = self.field.q();
        let mut x = vec![0u32; n];
        for _ in 0..total {
            visit(&x);
            for i in (0..n).rev() {
                x[i] += 1;
                if x[i] < q {
                    break;
                }
                x[i] = 0;
            }
        }
        Ok(())
    }

    /// `|{x : Q(x) = v}|` for every `v`, indexed by the code of `v`.
    pub fn level_set_histogram(&self) -> Result<Vec<u64>> {
        let mut hist = vec![0u64; self.field.q() as usize];
        self.for_each_vector(|x| hist[self.eval(x) as usize] += 1)?;
        Ok(hist)
    }

    /// Exhaustive `|{x in F^n : Q(x) = v}|`.
    pub fn level_set_count(&self, v: u32) -> Result<u64> {
        let mut count = 0;
        self.for_each_vector(|x| count += u64::from(self.eval(x) == v))?;
        Ok(count)
    }

    /// `(1/q) sum_y e(-v y) prod_i S(d_i y)`, with `d` the normal-form
    /// diagonal. Equal to the exact level-set count up to rounding.
    pub fn gauss_estimate(&self, v: u32) -> Result<Complex64> {
        let f = &self.field;
        if !f.is_prime_field() {
            return Err(Error::Unsupported("Gauss-sum estimates need a prime field".into()));
        }
        let q = f.q();
        let gauss: Vec<Complex64> = (0..q).map(|y| f.gauss_sum_raw(y)).collect();
        let total: Complex64 = (0..q)
            .map(|y| {
                let prod: Complex64 = self.diagonal.iter().map(|&d| gauss[f.mul(d, y) as usize]).product();
                f.character(f.neg(f.mul(v, y))) * prod
            })
            .sum();
        Ok(total / q as f64)
    }

    /// All nonzero `x` with `Q(x) = 0`, in lexicographic order.
    pub fn null_vectors(&self) -> Result<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        self.for_each_vector(|x| {
            if x.iter().any(|&c| c != 0) && self.eval(x) == 0 {
                out.push(x.to_vec());
            }
        })?;
        Ok(out)
    }

    /// Basis of `v^perp = {x : <x, v> = 0}`.
    pub fn perp(&self, v: &[u32]) -> Vec<Vec<u32>> {
        let f = &self.field;
        let mv: Vec<u32> = self.matrix.iter().map(|row| linalg::dot(f, row, v)).collect();
        linalg::null_space(f, &[mv], self.dim())
    }

    /// Gram matrix of the form on the given (independent) directions.
    pub fn restrict(&self, dirs: &[Vec<u32>]) -> Result<QuadraticForm> {
        let n = self.dim();
        if dirs.is_empty() || dirs.iter().any(|d| d.len() != n) {
            return Err(Error::Usage(format!("restriction needs nonempty vectors of length {n}")));
        }
        if linalg::rank(&self.field, dirs, n) != dirs.len() {
            return Err(Error::Usage("restriction directions are linearly dependent".into()));
        }
        let gram = dirs.iter().map(|a| dirs.iter().map(|b| self.bilinear(a, b)).collect()).collect();
        QuadraticForm::new(self.field, gram)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn identity_is_its_own_normal_form() {
        let q = QuadraticForm::diagonal(f(3), &[1, 1, 1, 1]).unwrap();
        let nf = q.normal_form();
        assert_eq!(nf.diagonal, vec![1, 1, 1, 1]);
        assert_eq!(nf.change_of_basis, linalg::identity(4));
    }

    #[test]
    fn hyperbolic_plane_diagonalizes() {
        let field = f(3);
        let m = vec![vec![0, 1], vec![1, 0]];
        let nf = normal_form(&field, &m).unwrap();
        assert_eq!(nf.rank(), 2);
        let d = congruent(&field, &m, &nf.change_of_basis);
        assert_eq!(d[0][1], 0);
        assert_eq!(d[1][0], 0);
        assert_eq!(vec![d[0][0], d[1][1]], nf.diagonal);
        assert_eq!(linalg::rank(&field, &nf.change_of_basis, 2), 2);
    }

    #[test]
    fn zero_form_has_rank_zero() {
        let q = QuadraticForm::new(f(3), vec![vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(q.rank(), 0);
        assert!(q.alphas().is_empty());
        assert_eq!(q.null_vectors().unwrap().len(), 8);
    }

    #[test]
    fn rejects_non_symmetric() {
        assert!(matches!(QuadraticForm::new(f(5), vec![vec![1, 2], vec![3, 1]]), Err(Error::Usage(_))));
    }

    #[test]
    fn small_level_set_counts() {
        assert_eq!(QuadraticForm::diagonal(f(5), &[1]).unwrap().level_set_count(0).unwrap(), 1);
        assert_eq!(QuadraticForm::diagonal(f(3), &[1, 1, 1]).unwrap().level_set_count(1).unwrap(), 6);
        assert_eq!(QuadraticForm::diagonal(f(3), &[1, 1, 1, 1]).unwrap().level_set_count(1).unwrap(), 24);
    }

    #[test]
    fn null_vector_counts() {
        let q = QuadraticForm::diagonal(f(3), &[1, 1, 1, 1]).unwrap();
        assert_eq!(q.null_vectors().unwrap().len(), 32);
        assert_eq!(q.level_set_count(0).unwrap(), 33);
        // 2 = -1 mod 3, so x^2 + 2y^2 = (x - y)(x + y): four null vectors.
        assert_eq!(QuadraticForm::diagonal(f(3), &[1, 2]).unwrap().null_vectors().unwrap().len(), 4);
        // -1 is a non-square mod 3: x^2 + y^2 is anisotropic.
        assert!(QuadraticForm::diagonal(f(3), &[1, 1]).unwrap().null_vectors().unwrap().is_empty());
    }

    #[test]
    fn restriction_examples() {
        let q = QuadraticForm::diagonal(f(3), &[1, 1, 1, 1]).unwrap();
        let r = q.restrict(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        assert_eq!(r.matrix(), &[vec![1, 0], vec![0, 1]]);
        let full = q.restrict(&linalg::identity(4)).unwrap();
        assert_eq!(full, q);
        assert!(matches!(q.restrict(&[vec![1, 0, 0, 0], vec![2, 0, 0, 0]]), Err(Error::Usage(_))));
    }

    #[test]
    fn restriction_to_perp_of_null_vector_has_rank_two() {
        // v lies in v^perp and pairs to zero with all of it, so the
        // restriction always has v in its radical.
        let q = QuadraticForm::diagonal(f(3), &[1, 1, 1, 1]).unwrap();
        for v in q.null_vectors().unwrap() {
            let basis = q.perp(&v);
            assert_eq!(basis.len(), 3);
            assert_eq!(q.restrict(&basis).unwrap().rank(), 2);
        }
    }

    #[test]
    fn gauss_identity_matches_exhaustive_counts() {
        for p in [3u32, 5, 7] {
            let field = f(p);
            let s = crate::ff::least_non_residue(p);
            for entries in [vec![1], vec![1, s], vec![1, 1, 0], vec![1, 1, s], vec![s, 1, 1, 1], vec![1, 0, s, 0]] {
                let q = QuadraticForm::diagonal(field, &entries).unwrap();
                let hist = q.level_set_histogram().unwrap();
                for v in 0..p {
                    let est = q.gauss_estimate(v).unwrap();
                    assert!((est.re - hist[v as usize] as f64).abs() < 1e-4, "p={p} {entries:?} v={v}");
                    assert!(est.im.abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn exhaustive_cap() {
        let q = QuadraticForm::diagonal(f(13), &[1; 6]).unwrap();
        assert!(matches!(q.level_set_count(0), Err(Error::Resource(_))));
    }
}
