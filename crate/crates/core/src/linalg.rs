//! Small dense real linear algebra used by the constraint handling, the LP and
//! the Newton solver. Matrices are row-major `Vec<f64>`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves the square system `a·x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` for a (numerically) singular matrix.
pub fn solve(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = norm_inf(a).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        let d = m[col * n + col];
        for row in (col + 1)..n {
            let f = m[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in (col + 1)..n {
            acc -= m[col * n + k] * x[k];
        }
        x[col] = acc / m[col * n + col];
    }
    Some(x)
}

/// Outcome of orthogonalizing a list of affine equations `rowᵢ·x = rhsᵢ`.
#[derive(Debug, Clone)]
pub struct RowReduction {
    /// Indices of the rows kept as linearly independent, in input order.
    pub independent: Vec<usize>,
    /// Indices of dependent rows whose right-hand side agreed with the others.
    pub redundant: Vec<usize>,
    /// Indices of dependent rows whose right-hand side contradicts the others.
    pub inconsistent: Vec<usize>,
    /// Orthonormal basis of the row space (one vector per independent row).
    pub basis: Vec<Vec<f64>>,
    /// Right-hand side expressed in `basis`.
    pub basis_rhs: Vec<f64>,
}

impl RowReduction {
    pub fn rank(&self) -> usize {
        self.independent.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.inconsistent.is_empty()
    }

    /// Minimum-norm solution of the independent equations.
    pub fn particular_solution(&self, dim: usize) -> Vec<f64> {
        let mut x = vec![0.0; dim];
        for (q, &c) in self.basis.iter().zip(&self.basis_rhs) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += c * qi;
            }
        }
        x
    }

    /// Orthonormal basis of the null space of the row space.
    pub fn null_space(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut all: Vec<Vec<f64>> = self.basis.clone();
        let mut null = Vec::new();
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            for _ in 0..2 {
                for q in &all {
                    let c = dot(&e, q);
                    for (ei, qi) in e.iter_mut().zip(q) {
                        *ei -= c * qi;
                    }
                }
            }
            let n = norm(&e);
            if n > 1e-8 {
                e.iter_mut().for_each(|v| *v /= n);
                all.push(e.clone());
                null.push(e);
            }
            if all.len() == dim {
                break;
            }
        }
        null
    }
}

/// Modified Gram-Schmidt over the augmented rows `[row | rhs]`.
///
/// A row is dependent when its residual norm falls to `pivot` times its
/// original norm. A dependent row is inconsistent when its residual
/// right-hand side exceeds `consistency·(1 + |rhs|)`.
pub fn reduce_rows(rows: &[Vec<f64>], rhs: &[f64], pivot: f64, consistency: f64) -> RowReduction {
    let mut out = RowReduction {
        independent: Vec::new(),
        redundant: Vec::new(),
        inconsistent: Vec::new(),
        basis: Vec::new(),
        basis_rhs: Vec::new(),
    };
    for (idx, (row, &r)) in rows.iter().zip(rhs).enumerate() {
        let original = norm(row);
        let mut v = row.clone();
        let mut t = r;
        for _ in 0..2 {
            for (q, &qr) in out.basis.iter().zip(&out.basis_rhs) {
                let c = dot(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
                t -= c * qr;
            }
        }
        let residual = norm(&v);
        if original == 0.0 || residual <= pivot * original {
            let scale = if original == 0.0 { 1.0 } else { original };
            if t.abs() > consistency * (1.0 + r.abs()) * scale.max(1.0) {
                out.inconsistent.push(idx);
            } else {
                out.redundant.push(idx);
            }
        } else {
            v.iter_mut().for_each(|x| *x /= residual);
            out.basis.push(v);
            out.basis_rhs.push(t / residual);
            out.independent.push(idx);
        }
    }
    out
}
