//! Dense two-phase simplex with Bland's rule.
//!
//! Only meant for tiny programs (tens of variables) that serve as oracles
//! for the closed-form routines elsewhere in the crate. Infeasibility is
//! reported with a Farkas certificate `y` for the standard form
//! `{x >= 0 : Ax = b}`: `yᵀA >= 0` and `yᵀb < 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Absolute pivot tolerance.
pub const PIVOT_TOL: f64 = 1e-10;

/// `min cᵀx  s.t.  Ax = b,  lower <= x <= upper` (bounds may be infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    eq_matrix: Vec<f64>,
    eq_rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// `eq_matrix` is row-major with `eq_rhs.len()` rows and
    /// `objective.len()` columns.
    pub fn new(
        objective: Vec<f64>,
        eq_matrix: Vec<f64>,
        eq_rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = objective.len();
        let m = eq_rhs.len();
        if eq_matrix.len() != m * n || lower.len() != n || upper.len() != n {
            return Err(Error::ShapeMismatch {
                expected: (m, n),
                found: (eq_matrix.len(), lower.len().min(upper.len())),
            });
        }
        if objective.iter().chain(&eq_matrix).chain(&eq_rhs).any(|v| !v.is_finite()) {
            return Err(Error::param("objective, matrix and rhs must be finite"));
        }
        if lower.iter().any(|l| l.is_nan() || *l == f64::INFINITY)
            || upper.iter().any(|u| u.is_nan() || *u == f64::NEG_INFINITY)
        {
            return Err(Error::param("invalid variable bounds"));
        }
        Ok(Self {
            objective,
            eq_matrix,
            eq_rhs,
            lower,
            upper,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rhs.len()
    }

    /// Rewrites the program over nonnegative variables.
    ///
    /// The first `num_rows()` standard rows are the original equalities in
    /// order; one extra row `x' + s = upper - lower` follows for every
    /// variable with two finite bounds.
    pub fn to_standard_form(&self) -> StandardForm {
        let n = self.num_vars();
        let m = self.num_rows();
        let mut maps = Vec::with_capacity(n);
        let mut ncols = 0;
        let mut boxed = Vec::new();
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            let map = match (l.is_finite(), u.is_finite()) {
                (true, true) => {
                    boxed.push((j, ncols, ncols + 1, u - l));
                    ncols += 2;
                    VarMap::Shifted { col: ncols - 2, offset: l }
                }
                (true, false) => {
                    ncols += 1;
                    VarMap::Shifted { col: ncols - 1, offset: l }
                }
                (false, true) => {
                    ncols += 1;
                    VarMap::Reflected { col: ncols - 1, offset: u }
                }
                (false, false) => {
                    ncols += 2;
                    VarMap::Split { pos: ncols - 2, neg: ncols - 1 }
                }
            };
            maps.push(map);
        }
        let rows = m + boxed.len();
        let mut matrix = vec![0.0; rows * ncols];
        let mut rhs = vec![0.0; rows];
        let mut cost = vec![0.0; ncols];
        let mut cost_offset = 0.0;
        for i in 0..m {
            rhs[i] = self.eq_rhs[i];
        }
        for (j, map) in maps.iter().enumerate() {
            let c = self.objective[j];
            match *map {
                VarMap::Shifted { col, offset } => {
                    cost[col] = c;
                    cost_offset += c * offset;
                    for i in 0..m {
                        let a = self.eq_matrix[i * n + j];
                        matrix[i * ncols + col] = a;
                        rhs[i] -= a * offset;
                    }
                }
                VarMap::Reflected { col, offset } => {
                    cost[col] = -c;
                    cost_offset += c * offset;
                    for i in 0..m {
                        let a = self.eq_matrix[i * n + j];
                        matrix[i * ncols + col] = -a;
                        rhs[i] -= a * offset;
                    }
                }
                VarMap::Split { pos, neg } => {
                    cost[pos] = c;
                    cost[neg] = -c;
                    for i in 0..m {
                        let a = self.eq_matrix[i * n + j];
                        matrix[i * ncols + pos] = a;
                        matrix[i * ncols + neg] = -a;
                    }
                }
            }
        }
        for (k, &(_, col, slack, width)) in boxed.iter().enumerate() {
            let i = m + k;
            matrix[i * ncols + col] = 1.0;
            matrix[i * ncols + slack] = 1.0;
            rhs[i] = width;
        }
        StandardForm {
            rows,
            cols: ncols,
            matrix,
            rhs,
            cost,
            cost_offset,
            maps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarMap {
    Shifted { col: usize, offset: f64 },
    Reflected { col: usize, offset: f64 },
    Split { pos: usize, neg: usize },
}

/// `min costᵀx  s.t.  matrix · x = rhs,  x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub matrix: Vec<f64>,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
    cost_offset: f64,
    maps: Vec<VarMap>,
}

impl StandardForm {
    /// A program that is already in standard form.
    pub fn new(rows: usize, cols: usize, matrix: Vec<f64>, rhs: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        if matrix.len() != rows * cols || rhs.len() != rows || cost.len() != cols {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                found: (rhs.len(), cost.len()),
            });
        }
        if matrix.iter().chain(&rhs).chain(&cost).any(|v| !v.is_finite()) {
            return Err(Error::param("standard form must be finite"));
        }
        let maps = (0..cols).map(|col| VarMap::Shifted { col, offset: 0.0 }).collect();
        Ok(Self {
            rows,
            cols,
            matrix,
            rhs,
            cost,
            cost_offset: 0.0,
            maps,
        })
    }

    fn recover(&self, z: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, offset } => offset + z[col],
                VarMap::Reflected { col, offset } => offset - z[col],
                VarMap::Split { pos, neg } => z[pos] - z[neg],
            })
            .collect()
    }

    /// Checks `yᵀA >= -tol` componentwise and `yᵀb < 0`.
    pub fn is_farkas_certificate(&self, y: &[f64], tol: f64) -> bool {
        if y.len() != self.rows {
            return false;
        }
        let yb: f64 = y.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        let scale = 1.0 + y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        (0..self.cols).all(|j| {
            let s: f64 = (0..self.rows).map(|i| y[i] * self.matrix[i * self.cols + j]).sum();
            s >= -tol * scale
        }) && yb < 0.0
    }
}

/// Farkas-type proof of infeasibility for the standard form.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InfeasibilityCertificate {
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible(InfeasibilityCertificate),
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible(_))
    }
}

/// Solves a bounded-variable program.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    solve_lp_with_stats(lp).map(|(o, _)| o)
}

/// As [`solve_lp`], also returning the number of simplex pivots.
pub fn solve_lp_with_stats(lp: &LinearProgram) -> Result<(LpOutcome, usize)> {
    let sf = lp.to_standard_form();
    let (outcome, iterations) = solve_standard_with_stats(&sf)?;
    let outcome = match outcome {
        LpOutcome::Optimal { x, .. } => {
            let x = sf.recover(&x);
            let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
            LpOutcome::Optimal { x, value }
        }
        other => other,
    };
    Ok((outcome, iterations))
}

/// Solves a program given directly in standard form.
pub fn solve_standard(sf: &StandardForm) -> Result<LpOutcome> {
    solve_standard_with_stats(sf).map(|(o, _)| o)
}

pub fn solve_standard_with_stats(sf: &StandardForm) -> Result<(LpOutcome, usize)> {
    let mut t = Tableau::new(sf);
    t.phase_one()?;
    let infeasibility = t.objective_value();
    let bscale = 1.0 + sf.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if infeasibility > 1e-9 * bscale {
        let y = t.phase_one_certificate();
        if !sf.is_farkas_certificate(&y, 1e-9) {
            return Err(Error::Numerical(
                "phase one produced an invalid infeasibility certificate".into(),
            ));
        }
        return Ok((LpOutcome::Infeasible(InfeasibilityCertificate { y }), t.iterations));
    }
    t.drive_out_artificials();
    if !t.phase_two(&sf.cost)? {
        return Ok((LpOutcome::Unbounded, t.iterations));
    }
    let x = t.primal();
    let value = x.iter().zip(&sf.cost).map(|(a, b)| a * b).sum::<f64>() + sf.cost_offset;
    Ok((LpOutcome::Optimal { x, value }, t.iterations))
}

/// Full tableau: `rows` constraint rows plus the reduced-cost row; columns
/// are the structural variables, one artificial per row, and the rhs.
struct Tableau {
    rows: usize,
    structural: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    sign: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let (m, n) = (sf.rows, sf.cols);
        let width = n + m + 1;
        let mut data = vec![0.0; (m + 1) * width];
        let mut sign = vec![1.0; m];
        for i in 0..m {
            let s = if sf.rhs[i] < 0.0 { -1.0 } else { 1.0 };
            sign[i] = s;
            for j in 0..n {
                data[i * width + j] = s * sf.matrix[i * n + j];
            }
            data[i * width + n + i] = 1.0;
            data[i * width + width - 1] = s * sf.rhs[i];
        }
        // phase-one reduced costs: -(column sums) for structural columns
        for j in 0..n {
            data[m * width + j] = -(0..m).map(|i| data[i * width + j]).sum::<f64>();
        }
        data[m * width + width - 1] = -(0..m).map(|i| data[i * width + width - 1]).sum::<f64>();
        Self {
            rows: m,
            structural: n,
            width,
            data,
            basis: (n..n + m).collect(),
            sign,
            iterations: 0,
            max_iterations: 200 * (m + n) + 1000,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn objective_value(&self) -> f64 {
        -self.at(self.rows, self.width - 1)
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let piv = self.data[p * w + q];
        for j in 0..w {
            self.data[p * w + j] /= piv;
        }
        self.data[p * w + q] = 1.0;
        for i in 0..=self.rows {
            if i == p {
                continue;
            }
            let factor = self.data[i * w + q];
            if factor == 0.0 {
                continue;
            }
            for j in 0..w {
                self.data[i * w + j] -= factor * self.data[p * w + j];
            }
            self.data[i * w + q] = 0.0;
        }
        for i in 0..self.rows {
            let r = i * w + w - 1;
            if self.data[r] < 0.0 && self.data[r] > -PIVOT_TOL {
                self.data[r] = 0.0;
            }
        }
        self.basis[p] = q;
        self.iterations += 1;
    }

    /// Runs Bland's rule over columns `0..limit`. Returns false when unbounded.
    fn run(&mut self, limit: usize) -> Result<bool> {
        loop {
            if self.iterations > self.max_iterations {
                return Err(Error::Numerical("simplex iteration limit reached".into()));
            }
            let Some(q) = (0..limit).find(|&j| self.at(self.rows, j) < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, q);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (tie && self.basis[i] < self.basis[k]) || (!tie && ratio < best) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            let Some((p, _)) = leave else {
                return Ok(false);
            };
            self.pivot(p, q);
        }
    }

    fn phase_one(&mut self) -> Result<()> {
        let limit = self.structural + self.rows;
        self.run(limit).map(|_| ())
    }

    /// Certificate for the original (unsigned) rows.
    fn phase_one_certificate(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let dual = 1.0 - self.at(self.rows, self.structural + i);
                -self.sign[i] * dual
            })
            .collect()
    }

    fn drive_out_artificials(&mut self) {
        for i in 0..self.rows {
            if self.basis[i] < self.structural {
                continue;
            }
            let candidate = (0..self.structural)
                .filter(|&j| !self.basis.contains(&j))
                .find(|&j| self.at(i, j).abs() > PIVOT_TOL);
            if let Some(j) = candidate {
                self.pivot(i, j);
            }
        }
    }

    fn phase_two(&mut self, cost: &[f64]) -> Result<bool> {
        let (m, n, w) = (self.rows, self.structural, self.width);
        for j in 0..w {
            let cj = if j < n { cost[j] } else { 0.0 };
            let cb: f64 = (0..m)
                .map(|i| {
                    let b = self.basis[i];
                    if b < n { cost[b] * self.at(i, j) } else { 0.0 }
                })
                .sum();
            self.data[m * w + j] = if j == w - 1 { -cb } else { cj - cb };
        }
        self.run(n)
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.structural];
        for i in 0..self.rows {
            let b = self.basis[i];
            if b < self.structural {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_variable_equality() {
        let lp = LinearProgram::new(vec![1.0], vec![1.0], vec![1.0], vec![0.0], vec![2.0]).unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] - 1.0).abs() <= 1e-12);
                assert!((value - 1.0).abs() <= 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn box_caps_the_sum() {
        let lp = LinearProgram::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![3.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let sf = lp.to_standard_form();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Infeasible(cert) => {
                assert_eq!(cert.y.len(), 3);
                assert!(sf.is_farkas_certificate(&cert.y, 1e-12));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn crossed_bounds_are_infeasible() {
        let lp = LinearProgram::new(vec![0.0], vec![], vec![], vec![1.0], vec![0.0]).unwrap();
        assert!(!solve_lp(&lp).unwrap().is_feasible());
    }

    #[test]
    fn detects_unbounded() {
        // min -x1 s.t. x1 - x2 = 0, x >= 0
        let lp = LinearProgram::new(
            vec![-1.0, 0.0],
            vec![1.0, -1.0],
            vec![0.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn free_and_reflected_variables() {
        // min x - y s.t. x + y = 1, x free, y <= 3  -> x = -2, y = 3, value -5
        let lp = LinearProgram::new(
            vec![1.0, -1.0],
            vec![1.0, 1.0],
            vec![1.0],
            vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            vec![f64::INFINITY, 3.0],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] + 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
                assert!((value + 5.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's degenerate program; the textbook Dantzig rule cycles here.
        let matrix = vec![
            1.0, 0.0, 0.0, 0.25, -8.0, -1.0, 9.0, //
            0.0, 1.0, 0.0, 0.5, -12.0, -0.5, 3.0, //
            0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0,
        ];
        let sf = StandardForm::new(
            3,
            7,
            matrix,
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, -0.75, 20.0, -0.5, 6.0],
        )
        .unwrap();
        let (outcome, iterations) = solve_standard_with_stats(&sf).unwrap();
        match outcome {
            LpOutcome::Optimal { value, .. } => assert!((value + 1.25).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(iterations <= 20, "{iterations}");
    }

    /// Minimum over all vertices of `{Ax = b, l <= x <= u}` found by fixing
    /// `n - m` variables at a bound and solving for the rest.
    fn vertex_enumeration(n: usize, m: usize, a: &[f64], b: &[f64], c: &[f64], l: &[f64], u: &[f64]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for free_mask in 0u32..(1 << n) {
            if free_mask.count_ones() as usize != m {
                continue;
            }
            let free: Vec<usize> = (0..n).filter(|j| free_mask & (1 << j) != 0).collect();
            let fixed: Vec<usize> = (0..n).filter(|j| free_mask & (1 << j) == 0).collect();
            for bound_mask in 0u32..(1 << fixed.len()) {
                let mut x = vec![0.0; n];
                for (k, &j) in fixed.iter().enumerate() {
                    x[j] = if bound_mask & (1 << k) != 0 { u[j] } else { l[j] };
                }
                // Gaussian elimination on the m x m free block.
                let mut mat = vec![0.0; m * (m + 1)];
                for i in 0..m {
                    let mut rhs = b[i];
                    for &j in &fixed {
                        rhs -= a[i * n + j] * x[j];
                    }
                    for (k, &j) in free.iter().enumerate() {
                        mat[i * (m + 1) + k] = a[i * n + j];
                    }
                    mat[i * (m + 1) + m] = rhs;
                }
                let mut singular = false;
                for col in 0..m {
                    let piv = (col..m)
                        .max_by(|&p, &q| mat[p * (m + 1) + col].abs().total_cmp(&mat[q * (m + 1) + col].abs()))
                        .unwrap();
                    if mat[piv * (m + 1) + col].abs() < 1e-12 {
                        singular = true;
                        break;
                    }
                    for k in 0..=m {
                        mat.swap(col * (m + 1) + k, piv * (m + 1) + k);
                    }
                    for r in 0..m {
                        if r != col {
                            let f = mat[r * (m + 1) + col] / mat[col * (m + 1) + col];
                            for k in 0..=m {
                                mat[r * (m + 1) + k] -= f * mat[col * (m + 1) + k];
                            }
                        }
                    }
                }
                if singular {
                    continue;
                }
                for (k, &j) in free.iter().enumerate() {
                    x[j] = mat[k * (m + 1) + m] / mat[k * (m + 1) + k];
                }
                if (0..n).all(|j| x[j] >= l[j] - 1e-9 && x[j] <= u[j] + 1e-9) {
                    let v: f64 = (0..n).map(|j| c[j] * x[j]).sum();
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
        best
    }

    #[test]
    fn random_programs_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..300 {
            let n = rng.random_range(2..=7usize);
            let m = rng.random_range(1..=n.min(3));
            let a: Vec<f64> = (0..m * n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let l: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..0.5)).collect();
            let u: Vec<f64> = l.iter().map(|li| li + rng.random_range(0.1..2.0)).collect();
            // make feasible by construction
            let x0: Vec<f64> = l.iter().zip(&u).map(|(lo, hi)| rng.random_range(*lo..*hi)).collect();
            let b: Vec<f64> = (0..m).map(|i| (0..n).map(|j| a[i * n + j] * x0[j]).sum()).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lp = LinearProgram::new(c.clone(), a.clone(), b.clone(), l.clone(), u.clone()).unwrap();
            let expected = vertex_enumeration(n, m, &a, &b, &c, &l, &u).unwrap();
            match solve_lp(&lp).unwrap() {
                LpOutcome::Optimal { x, value } => {
                    assert!((value - expected).abs() <= 1e-8, "{value} vs {expected}");
                    for i in 0..m {
                        let r: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum::<f64>() - b[i];
                        assert!(r.abs() <= 1e-9);
                    }
                    assert!((0..n).all(|j| x[j] >= l[j] - 1e-9 && x[j] <= u[j] + 1e-9));
                    checked += 1;
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        assert_eq!(checked, 300);
    }

    #[test]
    fn random_infeasible_programs_carry_valid_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut infeasible = 0;
        for _ in 0..300 {
            let n = rng.random_range(2..=6usize);
            let m = rng.random_range(1..=3usize);
            let a: Vec<f64> = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
            let lp = LinearProgram::new(vec![0.0; n], a, b, vec![0.0; n], vec![1.0; n]).unwrap();
            let sf = lp.to_standard_form();
            if let LpOutcome::Infeasible(cert) = solve_lp(&lp).unwrap() {
                assert!(sf.is_farkas_certificate(&cert.y, 1e-9));
                infeasible += 1;
            }
        }
        assert!(infeasible > 20);
    }
}
