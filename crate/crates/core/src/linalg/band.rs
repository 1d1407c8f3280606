use crate::{Error, Result, Scalar};

use super::{bandwidth, reverse_cuthill_mckee, CsrMatrix, Permutation};

/// Banded Cholesky factor `P A P^T = L L^T` of a real SPD matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    perm: Permutation,
    // row i holds L[i][i-bw..=i] at offsets 0..=bw (offset = j + bw - i)
    rows: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Permutation) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Solver("Cholesky needs a square matrix".into()));
        }
        let bw = bandwidth(a, &perm);
        let w = bw + 1;
        let mut rows = vec![0.0; n * w];
        for (i, j, v) in a.iter() {
            let (pi, pj) = (perm.old_to_new[i], perm.old_to_new[j]);
            if pj <= pi {
                rows[pi * w + pj + bw - pi] += v;
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = rows[i * w + j + bw - i];
                for k in klo..j {
                    s -= rows[i * w + k + bw - i] * rows[j * w + k + bw - j];
                }
                if j < i {
                    rows[i * w + j + bw - i] = s / rows[j * w + bw];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::Solver(format!(
                            "matrix not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    rows[i * w + bw] = s.sqrt();
                }
            }
        }
        Ok(BandCholesky { n, bw, perm, rows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn solve<T: Scalar>(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y: Vec<T> = self.perm.new_to_old.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= y[k] * self.rows[i * w + k + bw - i];
            }
            y[i] = s * (1.0 / self.rows[i * w + bw]);
        }
        for i in (0..n).rev() {
            let yi = y[i] * (1.0 / self.rows[i * w + bw]);
            y[i] = yi;
            let lo = i.saturating_sub(bw);
            for k in lo..i {
                let l = self.rows[i * w + k + bw - i];
                y[k] -= yi * l;
            }
        }
        let mut x = vec![T::zero(); n];
        for (k, &o) in self.perm.new_to_old.iter().enumerate() {
            x[o] = y[k];
        }
        x
    }
}

/// Banded LU with partial pivoting, `P A P^T` reordered by RCM first.
///
/// Row `i` stores columns `i-kl ..= i+kl+ku` (fill from pivoting included).
/// Multipliers of step `i` stay in the rows they were computed in; row swaps
/// at later steps only touch the trailing columns, so solves apply pivots
/// and eliminations interleaved, step by step.
#[derive(Debug, Clone)]
pub struct BandLu<T: Scalar> {
    n: usize,
    kl: usize,
    ku: usize,
    perm: Permutation,
    pivots: Vec<usize>,
    rows: Vec<T>,
}

impl<T: Scalar> BandLu<T> {
    /// Factor `sum_t c_t A_t` for matrices sharing one sparsity pattern.
    pub fn factor_combination(terms: &[(T, &CsrMatrix)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Solver("empty linear combination".into()))?
            .1;
        let perm = reverse_cuthill_mckee(first);
        Self::factor_combination_with(terms, perm)
    }

    pub fn factor_combination_with(terms: &[(T, &CsrMatrix)], perm: Permutation) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Solver("empty linear combination".into()))?
            .1;
        let n = first.nrows();
        let bw = terms.iter().map(|(_, a)| bandwidth(a, &perm)).max().unwrap_or(0);
        let (kl, ku) = (bw, bw);
        let w = 2 * kl + ku + 1;
        let mut rows = vec![T::zero(); n * w];
        for &(c, a) in terms {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::Solver("dimension mismatch in linear combination".into()));
            }
            for (i, j, v) in a.iter() {
                let (pi, pj) = (perm.old_to_new[i], perm.old_to_new[j]);
                rows[pi * w + pj + kl - pi] += c * v;
            }
        }
        let mut pivots = vec![0; n];
        let at = |r: usize, c: usize| r * w + c + kl - r;
        for i in 0..n {
            let last_row = (i + kl).min(n - 1);
            let last_col = (i + kl + ku).min(n - 1);
            let mut p = i;
            let mut best = rows[at(i, i)].modulus();
            for r in i + 1..=last_row {
                let m = rows[at(r, i)].modulus();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if !(best > 0.0) {
                return Err(Error::Solver(format!("singular matrix at step {i}")));
            }
            pivots[i] = p;
            if p != i {
                for c in i..=last_col {
                    rows.swap(at(i, c), at(p, c));
                }
            }
            let inv = T::one() / rows[at(i, i)];
            for r in i + 1..=last_row {
                let l = rows[at(r, i)] * inv;
                rows[at(r, i)] = l;
                if l == T::zero() {
                    continue;
                }
                for c in i + 1..=last_col {
                    let u = rows[at(i, c)];
                    rows[at(r, c)] -= l * u;
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            perm,
            pivots,
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = 2 * kl + ku + 1;
        let at = |r: usize, c: usize| r * w + c + kl - r;
        let mut y: Vec<T> = self.perm.new_to_old.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            y.swap(i, self.pivots[i]);
            let yi = y[i];
            for r in i + 1..=(i + kl).min(n.saturating_sub(1)) {
                y[r] -= self.rows[at(r, i)] * yi;
            }
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for c in i + 1..=(i + kl + ku).min(n - 1) {
                s -= self.rows[at(i, c)] * y[c];
            }
            y[i] = s / self.rows[at(i, i)];
        }
        let mut x = vec![T::zero(); n];
        for (k, &o) in self.perm.new_to_old.iter().enumerate() {
            x[o] = y[k];
        }
        x
    }
}
