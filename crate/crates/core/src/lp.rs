//! Dense two-phase simplex method for `min c·x  s.t.  A·x = b, x ≥ 0`.
//!
//! Pivoting follows Bland's rule (lowest eligible index enters, lowest basic
//! index leaves on ratio ties), so the method terminates on degenerate
//! problems. Instances here are small: mixing weights over a handful of
//! vertices.

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    /// Phase I ended with a positive artificial sum.
    Infeasible {
        residual: f64,
    },
    Unbounded,
}

impl LpOutcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

/// An equality-form linear program.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols` constraint matrix.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        for k in 0..w {
            self.t[r * w + k] /= p;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..w {
                self.t[i * w + k] -= f * self.t[r * w + k];
            }
        }
        self.basis[r] = c;
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        self.t.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.m -= 1;
    }

    /// Runs Bland-rule simplex minimizing `cost` over the allowed columns.
    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> bool {
        loop {
            // reduced costs: c_j - c_B · column_j
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for i in 0..self.m {
                    rc -= cost[self.basis[i]] * self.at(i, j);
                }
                if rc < -PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, j);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leaving {
                Some((i, _)) => self.pivot(i, j),
                None => return false,
            }
        }
    }
}

impl LinearProgram {
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), rows * cols, "constraint matrix shape");
        assert_eq!(b.len(), rows, "right-hand side length");
        Self { rows, cols, a, b }
    }

    /// Phase I only: any feasible point, or the infeasibility residual.
    pub fn feasible_point(&self, tol: f64) -> LpOutcome {
        self.minimize(&vec![0.0; self.cols], tol)
    }

    /// Minimizes `cost·x`. `tol` bounds the phase-I artificial sum accepted as
    /// feasible.
    pub fn minimize(&self, cost: &[f64], tol: f64) -> LpOutcome {
        assert_eq!(cost.len(), self.cols, "cost length");
        let (m, n) = (self.rows, self.cols);
        let width = n + m + 1;
        let mut t = vec![0.0; m * width];
        for i in 0..m {
            let sign = if self.b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i * width + j] = sign * self.a[i * n + j];
            }
            t[i * width + n + i] = 1.0;
            t[i * width + width - 1] = sign * self.b[i];
        }
        let mut tab = Tableau {
            m,
            width,
            t,
            basis: (n..n + m).collect(),
        };

        let mut phase1 = vec![0.0; n + m];
        phase1[n..].iter_mut().for_each(|c| *c = 1.0);
        tab.optimize(&phase1, n + m);
        let residual: f64 = (0..tab.m)
            .filter(|&i| tab.basis[i] >= n)
            .map(|i| tab.rhs(i).abs())
            .sum();
        if residual > tol {
            return LpOutcome::Infeasible { residual };
        }

        // Drive remaining artificials out; drop rows that are redundant.
        let mut r = 0;
        while r < tab.m {
            if tab.basis[r] >= n {
                let col = (0..n).find(|&j| tab.at(r, j).abs() > 1e-9);
                match col {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => tab.remove_row(r),
                }
            } else {
                r += 1;
            }
        }

        let mut phase2 = cost.to_vec();
        phase2.extend(std::iter::repeat_n(0.0, m));
        if !tab.optimize(&phase2, n) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; n];
        for i in 0..tab.m {
            if tab.basis[i] < n {
                x[tab.basis[i]] = tab.rhs(i).max(0.0);
            }
        }
        let objective = x.iter().zip(cost).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, objective }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_point() {
        // x + y = 1, y = 0.3
        let lp = LinearProgram::new(2, 2, vec![1.0, 1.0, 0.0, 1.0], vec![1.0, 0.3]);
        let x = lp.feasible_point(1e-8);
        let x = x.solution().unwrap();
        assert!((x[0] - 0.7).abs() < 1e-14 && (x[1] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn detects_infeasible() {
        let lp = LinearProgram::new(2, 2, vec![1.0, 1.0, 0.0, 1.0], vec![1.0, 2.0]);
        assert!(matches!(lp.feasible_point(1e-8), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn optimizes_over_simplex_slice() {
        // p on the 3-simplex with p1 + 2 p2 = 1; maximize p0
        let lp = LinearProgram::new(2, 3, vec![1.0, 1.0, 1.0, 0.0, 1.0, 2.0], vec![1.0, 1.0]);
        match lp.minimize(&[-1.0, 0.0, 0.0], 1e-8) {
            LpOutcome::Optimal { x, objective } => {
                assert!((objective + 0.5).abs() < 1e-14);
                assert!((x[0] - 0.5).abs() < 1e-14 && (x[2] - 0.5).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let lp = LinearProgram::new(2, 2, vec![1.0, 1.0, 2.0, 2.0], vec![1.0, 2.0]);
        match lp.minimize(&[1.0, 0.0], 1e-8) {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, vec![0.0, 1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbounded() {
        let lp = LinearProgram::new(1, 2, vec![1.0, -1.0], vec![0.0]);
        assert_eq!(lp.minimize(&[-1.0, 0.0], 1e-8), LpOutcome::Unbounded);
    }
}
