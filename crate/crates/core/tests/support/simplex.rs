//! Dense two-phase simplex with Bland's rule, for small reference problems.

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub num_vars: usize,
    pub cost: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl Lp {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, cost: vec![0.0; num_vars], rows: Vec::new() }
    }

    pub fn add(&mut self, coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { coefs, sense, rhs });
    }

    /// Minimizes `cost . x` subject to the rows and `x >= 0`.
    pub fn solve(&self) -> LpResult {
        let m = self.rows.len();
        let nv = self.num_vars;
        let slacks = self.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let width = nv + slacks + m;
        let art0 = nv + slacks;
        // Tableau rows: constraint rows, then the objective row; last column is the rhs.
        let mut t = vec![vec![0.0; width + 1]; m + 1];
        let mut basis = vec![0usize; m];
        let mut slack = nv;
        for (r, row) in self.rows.iter().enumerate() {
            let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            for &(j, a) in &row.coefs {
                t[r][j] += sign * a;
            }
            match row.sense {
                Sense::Le => {
                    t[r][slack] = sign;
                    slack += 1;
                }
                Sense::Ge => {
                    t[r][slack] = -sign;
                    slack += 1;
                }
                Sense::Eq => {}
            }
            t[r][art0 + r] = 1.0;
            t[r][width] = sign * row.rhs;
            basis[r] = art0 + r;
        }

        // Phase 1: minimize the sum of artificials.
        let mut phase1 = vec![0.0; width];
        phase1[art0..].iter_mut().for_each(|c| *c = 1.0);
        set_objective(&mut t, &basis, &phase1);
        if !pivot_loop(&mut t, &mut basis, width) {
            return LpResult::Unbounded;
        }
        if -t[m][width] > 1e-7 {
            return LpResult::Infeasible;
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..m {
            if basis[r] >= art0 {
                if let Some(j) = (0..art0).find(|&j| t[r][j].abs() > EPS) {
                    pivot(&mut t, &mut basis, r, j);
                }
            }
        }
        // Phase 2: artificial columns are frozen at zero.
        for row in t.iter_mut() {
            row[art0..width].iter_mut().for_each(|x| *x = 0.0);
        }
        let mut phase2 = vec![0.0; width];
        phase2[..nv].copy_from_slice(&self.cost);
        set_objective(&mut t, &basis, &phase2);
        if !pivot_loop(&mut t, &mut basis, art0) {
            return LpResult::Unbounded;
        }
        let mut x = vec![0.0; nv];
        for (r, &b) in basis.iter().enumerate() {
            if b < nv {
                x[b] = t[r][width];
            }
        }
        let value = self.cost.iter().zip(&x).map(|(c, x)| c * x).sum();
        LpResult::Optimal { value, x }
    }
}

fn set_objective(t: &mut [Vec<f64>], basis: &[usize], cost: &[f64]) {
    let m = basis.len();
    let width = cost.len();
    for j in 0..=width {
        t[m][j] = if j < width { cost[j] } else { 0.0 };
    }
    for r in 0..m {
        let cb = cost[basis[r]];
        if cb != 0.0 {
            for j in 0..=width {
                t[m][j] -= cb * t[r][j];
            }
        }
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    t[r].iter_mut().for_each(|x| *x /= p);
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
    }
    basis[r] = c;
}

/// Bland's rule over the first `cols` columns. Returns false when unbounded.
fn pivot_loop(t: &mut [Vec<f64>], basis: &mut [usize], cols: usize) -> bool {
    let m = basis.len();
    let rhs = t[0].len() - 1;
    loop {
        let Some(c) = (0..cols).find(|&j| t[m][j] < -EPS) else {
            return true;
        };
        let mut best: Option<(f64, usize)> = None;
        for r in 0..m {
            if t[r][c] > EPS {
                let ratio = t[r][rhs] / t[r][c];
                best = match best {
                    Some((b, br)) if ratio > b + EPS || (ratio > b - EPS && basis[r] > basis[br]) => Some((b, br)),
                    _ => Some((ratio, r)),
                };
            }
        }
        let Some((_, r)) = best else {
            return false;
        };
        pivot(t, basis, r, c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18.
        let mut lp = Lp::new(2);
        lp.cost = vec![-3.0, -5.0];
        lp.add(vec![(0, 1.0)], Sense::Le, 4.0);
        lp.add(vec![(1, 2.0)], Sense::Le, 12.0);
        lp.add(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        match lp.solve() {
            LpResult::Optimal { value, x } => {
                assert!((value + 36.0).abs() < 1e-9);
                assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_infeasibility() {
        let mut lp = Lp::new(2);
        lp.cost = vec![1.0, 2.0];
        lp.add(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0);
        lp.add(vec![(1, 1.0)], Sense::Ge, 0.25);
        assert!(matches!(lp.solve(), LpResult::Optimal { value, .. } if (value - 1.25).abs() < 1e-9));
        lp.add(vec![(0, 1.0)], Sense::Ge, 2.0);
        assert_eq!(lp.solve(), LpResult::Infeasible);
    }
}
