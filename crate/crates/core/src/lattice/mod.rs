//! Feasible sets defined by order intervals.
//!
//! - `U = {u >= 0 : A^l u <= f^u, A^u u >= f^l}` ([`member_u`]);
//! - the norm-based set `U_{h,δ} = {u : ‖A_h u - f_δ‖ <= δ + h‖u‖}`
//!   ([`member_u_norm`]);
//! - `U*`, the points explained exactly by some `(A, f)` inside the
//!   intervals, which coincides with `U` ([`construct_witness`]);
//! - `U**`, the same with the extra constraint `Av = g`
//!   ([`member_ustarstar`], checked against [`farkas_oracle`]).

mod sampler;
mod ustarstar;

use alloc::format;
use alloc::vec::Vec;

pub use sampler::{classify_grid, classify_point, fig1_problem, sample_feasible_set_2d, Region, SamplePoint};
pub use ustarstar::{
    farkas_check, farkas_oracle, member_ustarstar, phi, psi, ustarstar_row, FarkasCertificate, FarkasOutcome,
    MembershipReport, RowInstance, RowVerdict,
};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::math;
use crate::operators::{BoundedData, IntervalOperator, MidpointRepresentation};
use crate::sparse::SparseMatrix;

/// Absolute tolerance for inequality slacks and for `φ_min`, `ψ_min`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Known linear constraint `Av = g` on the unknown operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SideConstraint {
    pub v: ImageGrid,
    pub g: ImageGrid,
}

/// Operator and data intervals, optionally with a side constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    op: IntervalOperator,
    data: BoundedData,
    side: Option<SideConstraint>,
}

impl FeasibilityProblem {
    pub fn new(op: IntervalOperator, data: BoundedData) -> Result<Self> {
        let (m, _) = op.shape();
        if data.len() != m {
            return Err(Error::ShapeMismatch {
                expected: (m, 1),
                found: (data.len(), 1),
            });
        }
        Ok(Self { op, data, side: None })
    }

    /// Attaches `Av = g`; requires `v >= 0` and `A^l v <= g <= A^u v`.
    pub fn with_side_constraint(mut self, v: ImageGrid, g: ImageGrid) -> Result<Self> {
        let (m, n) = self.op.shape();
        if v.len() != n || g.len() != m {
            return Err(Error::ShapeMismatch {
                expected: (n, m),
                found: (v.len(), g.len()),
            });
        }
        if v.values().iter().any(|x| *x < 0.0) {
            return Err(Error::param("side-constraint vector v must be nonnegative"));
        }
        let lo = self.op.lower().mul_vec(v.values())?;
        let hi = self.op.upper().mul_vec(v.values())?;
        for (i, ((l, h), gi)) in lo.iter().zip(&hi).zip(g.values()).enumerate() {
            let tol = DEFAULT_TOL * (1.0 + gi.abs());
            if *gi < l - tol || *gi > h + tol {
                return Err(Error::InfeasibleRow { row: i });
            }
        }
        self.side = Some(SideConstraint { v, g });
        Ok(self)
    }

    pub fn op(&self) -> &IntervalOperator {
        &self.op
    }

    pub fn data(&self) -> &BoundedData {
        &self.data
    }

    pub fn side_constraint(&self) -> Option<&SideConstraint> {
        self.side.as_ref()
    }

    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.op.shape().1
    }

    fn check_point(&self, u: &ImageGrid) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: (self.dim(), 1),
                found: (u.len(), 1),
            });
        }
        Ok(())
    }
}

/// Slacks of the three defining inequalities of `U`; each is `>= 0` when
/// the corresponding constraint holds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MembershipU {
    pub member: bool,
    /// `u`
    pub nonnegativity: Vec<f64>,
    /// `f^u - A^l u`
    pub upper_slack: Vec<f64>,
    /// `A^u u - f^l`
    pub lower_slack: Vec<f64>,
}

impl MembershipU {
    /// Largest violation over all constraints (0 when feasible).
    pub fn max_violation(&self) -> f64 {
        self.nonnegativity
            .iter()
            .chain(&self.upper_slack)
            .chain(&self.lower_slack)
            .fold(0.0_f64, |m, s| m.max(-s))
    }
}

/// Membership in `U` with absolute tolerance `tol`.
pub fn member_u(u: &ImageGrid, problem: &FeasibilityProblem, tol: f64) -> Result<MembershipU> {
    problem.check_point(u)?;
    let lo = problem.op.lower().mul_vec(u.values())?;
    let hi = problem.op.upper().mul_vec(u.values())?;
    let upper_slack: Vec<f64> = problem
        .data
        .upper()
        .values()
        .iter()
        .zip(&lo)
        .map(|(fu, al)| fu - al)
        .collect();
    let lower_slack: Vec<f64> = hi
        .iter()
        .zip(problem.data.lower().values())
        .map(|(au, fl)| au - fl)
        .collect();
    let nonnegativity = u.values().to_vec();
    let member = nonnegativity
        .iter()
        .chain(&upper_slack)
        .chain(&lower_slack)
        .all(|s| *s >= -tol);
    Ok(MembershipU {
        member,
        nonnegativity,
        upper_slack,
        lower_slack,
    })
}

/// Membership in the norm-based set `‖A_h u - f_δ‖∞ <= δ + h‖u‖∞ + tol`.
pub fn member_u_norm(u: &ImageGrid, rep: &MidpointRepresentation, tol: f64) -> Result<bool> {
    if u.len() != rep.operator.ncols() {
        return Err(Error::ShapeMismatch {
            expected: (rep.operator.ncols(), 1),
            found: (u.len(), 1),
        });
    }
    let au = rep.operator.mul_vec(u.values())?;
    let residual = au
        .iter()
        .zip(rep.data.values())
        .fold(0.0_f64, |m, (a, f)| m.max((a - f).abs()));
    Ok(residual <= rep.data_radius + rep.operator_radius * math::norm_inf(u.values()) + tol)
}

/// A concrete `(A, f)` inside the intervals with `Au = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPair {
    /// Per-row convex weight: row `t` of `A` is `(1 - α_t) A^l_t + α_t A^u_t`.
    pub alpha: Vec<f64>,
    pub realized_operator: SparseMatrix,
    pub realized_data: ImageGrid,
}

impl WitnessPair {
    /// Largest violation of `A^l <= A <= A^u`, `f^l <= f <= f^u` and `Au = f`.
    pub fn max_violation(&self, u: &ImageGrid, problem: &FeasibilityProblem) -> Result<f64> {
        let op = problem.op();
        let a = &self.realized_operator;
        let box_lo = op.lower().zip_union(a, |l, x| l - x)?;
        let box_hi = a.zip_union(op.upper(), |x, h| x - h)?;
        let mut worst = box_lo
            .values()
            .iter()
            .chain(box_hi.values())
            .fold(0.0_f64, |m, v| m.max(*v));
        let f = self.realized_data.values();
        for ((fi, fl), fu) in f
            .iter()
            .zip(problem.data().lower().values())
            .zip(problem.data().upper().values())
        {
            worst = worst.max(fl - fi).max(fi - fu);
        }
        let au = a.mul_vec(u.values())?;
        for (x, y) in au.iter().zip(f) {
            worst = worst.max((x - y).abs());
        }
        Ok(worst)
    }
}

/// Builds a witness `(A, f)` for `u ∈ U` (checked with zero tolerance).
pub fn construct_witness(u: &ImageGrid, problem: &FeasibilityProblem) -> Result<WitnessPair> {
    construct_witness_with_tol(u, problem, 0.0)
}

/// As [`construct_witness`], accepting points that satisfy the defining
/// inequalities of `U` up to `tol`.
pub fn construct_witness_with_tol(u: &ImageGrid, problem: &FeasibilityProblem, tol: f64) -> Result<WitnessPair> {
    let membership = member_u(u, problem, tol)?;
    if !membership.member {
        return Err(Error::NotInFeasibleSet(format!(
            "constraint violated by {:e}",
            membership.max_violation()
        )));
    }
    let op = problem.op();
    let lo = op.lower().mul_vec(u.values())?;
    let hi = op.upper().mul_vec(u.values())?;
    let alpha: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .zip(problem.data().lower().values())
        .map(|((l, h), fl)| {
            let spread = h - l;
            if spread == 0.0 {
                0.0
            } else {
                ((fl - l) / spread).clamp(0.0, 1.0)
            }
        })
        .collect();

    let lower = op.lower();
    let upper = op.upper();
    // lower and upper share one pattern, so values can be blended in place.
    let mut values = Vec::with_capacity(lower.nnz());
    for (t, &a) in alpha.iter().enumerate() {
        let (_, lv) = lower.row(t);
        let (_, uv) = upper.row(t);
        values.extend(lv.iter().zip(uv).map(|(l, h)| (1.0 - a) * l + a * h));
    }
    let realized_operator = SparseMatrix::from_csr(
        lower.nrows(),
        lower.ncols(),
        lower.row_offsets().to_vec(),
        lower.col_indices().to_vec(),
        values,
    )?;
    let f = realized_operator.mul_vec(u.values())?;
    let realized_data = problem.data().lower().with_values(f)?;
    Ok(WitnessPair {
        alpha,
        realized_operator,
        realized_data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{data_bounds, midpoint_representation};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(m: usize, n: usize, v: &[f64]) -> SparseMatrix {
        SparseMatrix::from_dense(m, n, v).unwrap()
    }

    fn random_problem(rng: &mut ChaCha8Rng, m: usize, n: usize, width: f64) -> (FeasibilityProblem, Vec<f64>) {
        let lo: Vec<f64> = (0..m * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.0..width)).collect();
        let op = IntervalOperator::new(dense(m, n, &lo), dense(m, n, &hi)).unwrap();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let f = op.lower().zip_union(op.upper(), |l, h| 0.5 * (l + h)).unwrap().mul_vec(&u).unwrap();
        let f = ImageGrid::from_signal(f).unwrap();
        let data = data_bounds(&f, rng.random_range(0.0..0.5)).unwrap();
        (FeasibilityProblem::new(op, data).unwrap(), u)
    }

    #[test]
    fn exact_setup_is_member() {
        let a = dense(2, 2, &[0.7, 0.3, 0.2, 0.8]);
        let u = ImageGrid::from_signal(vec![3.0, 1.0]).unwrap();
        let f = ImageGrid::from_signal(a.mul_vec(u.values()).unwrap()).unwrap();
        let p = FeasibilityProblem::new(IntervalOperator::exact(a), BoundedData::exact(f)).unwrap();
        assert!(member_u(&u, &p, 0.0).unwrap().member);
        let neg = ImageGrid::from_signal(vec![3.0, -1e-12]).unwrap();
        assert!(!member_u(&neg, &p, 0.0).unwrap().member);
    }

    #[test]
    fn member_u_rejects_shape_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (p, _) = random_problem(&mut rng, 3, 3, 0.5);
        let u = ImageGrid::from_signal(vec![1.0; 4]).unwrap();
        assert!(matches!(member_u(&u, &p, 0.0), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn member_u_agrees_with_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (p, _) = random_problem(&mut rng, 5, 5, 0.4);
        let (lo, hi) = (p.op().lower().to_dense(), p.op().upper().to_dense());
        let (fl, fu) = (p.data().lower().values().to_vec(), p.data().upper().values().to_vec());
        let mut members = 0;
        for _ in 0..1000 {
            let u: Vec<f64> = (0..5).map(|_| rng.random_range(-0.2..4.0)).collect();
            let mut expected = u.iter().all(|x| *x >= 0.0);
            for i in 0..5 {
                let (mut l, mut h) = (0.0, 0.0);
                for j in 0..5 {
                    l += lo[i * 5 + j] * u[j];
                    h += hi[i * 5 + j] * u[j];
                }
                expected &= l <= fu[i] && h >= fl[i];
            }
            let got = member_u(&ImageGrid::from_signal(u).unwrap(), &p, 0.0).unwrap().member;
            assert_eq!(got, expected);
            members += expected as usize;
        }
        assert!(members > 0);
    }

    #[test]
    fn norm_set_one_by_one() {
        let rep = MidpointRepresentation {
            operator: dense(1, 1, &[1.0]),
            data: ImageGrid::from_signal(vec![0.0]).unwrap(),
            operator_radius: 0.0,
            data_radius: 1.0,
        };
        assert!(!member_u_norm(&ImageGrid::from_signal(vec![2.0]).unwrap(), &rep, 0.0).unwrap());
        assert!(member_u_norm(&ImageGrid::from_signal(vec![1.0]).unwrap(), &rep, 0.0).unwrap());
    }

    #[test]
    fn norm_set_exact_solution() {
        let a = dense(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let u = ImageGrid::from_signal(vec![1.0, 2.0]).unwrap();
        let f = ImageGrid::from_signal(a.mul_vec(u.values()).unwrap()).unwrap();
        let rep = midpoint_representation(&IntervalOperator::exact(a), &BoundedData::exact(f)).unwrap();
        assert!(member_u_norm(&u, &rep, 0.0).unwrap());
    }

    #[test]
    fn witness_for_degenerate_operator() {
        let a = dense(2, 2, &[0.7, 0.3, 0.2, 0.8]);
        let u = ImageGrid::from_signal(vec![3.0, 1.0]).unwrap();
        let f = ImageGrid::from_signal(a.mul_vec(u.values()).unwrap()).unwrap();
        let p = FeasibilityProblem::new(IntervalOperator::exact(a.clone()), data_bounds(&f, 0.1).unwrap()).unwrap();
        let w = construct_witness(&u, &p).unwrap();
        assert_eq!(w.alpha, vec![0.0, 0.0]);
        assert_eq!(w.realized_operator, a);
        assert_eq!(w.realized_data, f);
    }

    #[test]
    fn witness_exact_data_alpha_is_unique_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let (p, u) = random_problem(&mut rng, 4, 3, 0.5);
            let f = p.data().point().unwrap().clone();
            let p = FeasibilityProblem::new(p.op().clone(), BoundedData::exact(f.clone())).unwrap();
            let u = ImageGrid::from_signal(u).unwrap();
            let w = construct_witness(&u, &p).unwrap();
            let lo = p.op().lower().mul_vec(u.values()).unwrap();
            let hi = p.op().upper().mul_vec(u.values()).unwrap();
            for t in 0..4 {
                let expected = (f.values()[t] - lo[t]) / (hi[t] - lo[t]);
                assert!((w.alpha[t] - expected).abs() <= 1e-12);
            }
            assert!(w.max_violation(&u, &p).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn witness_rejects_points_outside_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (p, _) = random_problem(&mut rng, 3, 3, 0.5);
        let u = ImageGrid::from_signal(vec![100.0; 3]).unwrap();
        assert!(matches!(construct_witness(&u, &p), Err(Error::NotInFeasibleSet(_))));
    }

    #[test]
    fn witness_invariants_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut built = 0;
        while built < 1000 {
            let (p, _) = random_problem(&mut rng, 8, 8, 0.6);
            let u = ImageGrid::from_signal((0..8).map(|_| rng.random_range(0.0..5.0)).collect()).unwrap();
            if !member_u(&u, &p, 0.0).unwrap().member {
                continue;
            }
            let w = construct_witness(&u, &p).unwrap();
            assert!(w.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
            assert!(w.max_violation(&u, &p).unwrap() <= 1e-10);
            built += 1;
        }
    }

    #[test]
    fn side_constraint_validation() {
        let lo = dense(1, 2, &[0.2, 0.3]);
        let hi = dense(1, 2, &[0.6, 0.7]);
        let op = IntervalOperator::new(lo, hi).unwrap();
        let data = BoundedData::exact(ImageGrid::from_signal(vec![1.0]).unwrap());
        let p = FeasibilityProblem::new(op, data).unwrap();
        let v = ImageGrid::from_signal(vec![1.0, 1.0]).unwrap();
        assert!(p.clone().with_side_constraint(v.clone(), ImageGrid::from_signal(vec![1.0]).unwrap()).is_ok());
        assert_eq!(
            p.with_side_constraint(v, ImageGrid::from_signal(vec![2.0]).unwrap()),
            Err(Error::InfeasibleRow { row: 0 })
        );
    }
}
