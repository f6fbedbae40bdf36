//! Closed-form membership test for `U**` (exact data `f^l = f^u = f`) and
//! the LP feasibility oracle it is checked against.
//!
//! For one output row, write every admissible row of `A` as
//! `a_j = (1 - α_j) a^l_j + α_j a^u_j` with `α ∈ [0, 1]^n`. The point `u`
//! belongs to `U**` iff, for every row, the two equalities
//! `Σ a_j u_j = f` and `Σ a_j v_j = g` admit such an `α`. Sorting the
//! columns by `u_j / v_j`, this is equivalent to the minima of two convex
//! piecewise-linear functions `φ` and `ψ` being nonnegative; both minima
//! are attained at a breakpoint located by a prefix-sum scan.

use alloc::vec;
use alloc::vec::Vec;

use super::{member_u, FeasibilityProblem, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::lp::{self, LpOutcome, StandardForm};

/// One output row of a `U**` query, restricted to the stored columns.
#[derive(Debug, Clone, Copy)]
pub struct RowInstance<'a> {
    pub u: &'a [f64],
    pub v: &'a [f64],
    pub a_l: &'a [f64],
    pub a_u: &'a [f64],
    pub f: f64,
    pub g: f64,
}

impl RowInstance<'_> {
    fn len(&self) -> usize {
        self.u.len()
    }

    /// Column order by ascending `u_j / v_j`, ties by original index.
    fn sorted_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| {
            (self.u[i] / self.v[i])
                .total_cmp(&(self.u[j] / self.v[j]))
                .then(i.cmp(&j))
        });
        order
    }
}

/// `φ(z) = Σ_j (z v_j - u_j) {a^u_j if u_j/v_j <= z, else a^l_j} + f - g z`.
pub fn phi(row: &RowInstance<'_>, z: f64) -> f64 {
    let mut s = row.f - row.g * z;
    for j in 0..row.len() {
        let coef = if row.u[j] / row.v[j] <= z { row.a_u[j] } else { row.a_l[j] };
        s += (z * row.v[j] - row.u[j]) * coef;
    }
    s
}

/// `ψ(z) = Σ_j (u_j - z v_j) {a^u_j if u_j/v_j >= z, else a^l_j} + g z - f`.
pub fn psi(row: &RowInstance<'_>, z: f64) -> f64 {
    let mut s = row.g * z - row.f;
    for j in 0..row.len() {
        let coef = if row.u[j] / row.v[j] >= z { row.a_u[j] } else { row.a_l[j] };
        s += (row.u[j] - z * row.v[j]) * coef;
    }
    s
}

/// Minimisers and minima of `φ` and `ψ` for one row.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RowVerdict {
    /// Column (original index) whose ratio `u_k/v_k` minimises `φ`.
    pub k_star: usize,
    pub phi_min: f64,
    /// Column (original index) whose ratio minimises `ψ`.
    pub k_star_star: usize,
    pub psi_min: f64,
}

impl RowVerdict {
    pub fn is_member(&self, tol: f64) -> bool {
        self.phi_min >= -tol && self.psi_min >= -tol
    }
}

/// Evaluates the closed-form conditions for one row. Requires `v > 0`.
pub fn ustarstar_row(row: &RowInstance<'_>) -> Result<RowVerdict> {
    let n = row.len();
    if row.v.len() != n || row.a_l.len() != n || row.a_u.len() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, 1),
            found: (row.v.len(), row.a_l.len()),
        });
    }
    if n == 0 {
        return Err(Error::UnsupportedInput("empty row".into()));
    }
    if let Some(j) = row.v.iter().position(|x| !(*x > 0.0)) {
        return Err(Error::UnsupportedInput(alloc::format!(
            "v has a non-positive component at column {j}"
        )));
    }
    let order = row.sorted_order();

    // φ slope right of the k-th breakpoint:
    //   Σ_{j<=k} a^u_j v_j + Σ_{j>k} a^l_j v_j - g   (non-decreasing in k)
    let mut slope = row.a_l.iter().zip(row.v).map(|(a, v)| a * v).sum::<f64>() - row.g;
    let mut k_phi = n - 1;
    for (pos, &j) in order.iter().enumerate() {
        slope += (row.a_u[j] - row.a_l[j]) * row.v[j];
        if slope >= 0.0 {
            k_phi = pos;
            break;
        }
    }
    // ψ slope magnitude right of the k-th breakpoint:
    //   Σ_{j<=k} a^l_j v_j + Σ_{j>k} a^u_j v_j - g   (non-increasing in k)
    let mut slope = row.a_u.iter().zip(row.v).map(|(a, v)| a * v).sum::<f64>() - row.g;
    let mut k_psi = n - 1;
    for (pos, &j) in order.iter().enumerate() {
        slope -= (row.a_u[j] - row.a_l[j]) * row.v[j];
        if slope <= 0.0 {
            k_psi = pos;
            break;
        }
    }

    let k_star = order[k_phi];
    let k_star_star = order[k_psi];
    Ok(RowVerdict {
        k_star,
        phi_min: phi(row, row.u[k_star] / row.v[k_star]),
        k_star_star,
        psi_min: psi(row, row.u[k_star_star] / row.v[k_star_star]),
    })
}

/// Result of the closed-form `U**` test over all rows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MembershipReport {
    pub member: bool,
    /// `k*` of the row with the smallest `φ_min`.
    pub k_star: usize,
    /// Smallest `φ_min` over all rows.
    pub phi_min: f64,
    /// `k**` of the row with the smallest `ψ_min`.
    pub k_star_star: usize,
    /// Smallest `ψ_min` over all rows.
    pub psi_min: f64,
    pub failing_rows: Vec<usize>,
    pub rows: Vec<RowVerdict>,
}

/// Closed-form membership in `U**`.
///
/// Requires a side constraint with `v > 0`, exact data (`f^l = f^u`) and
/// `u ∈ U` (checked with [`DEFAULT_TOL`]).
pub fn member_ustarstar(u: &ImageGrid, problem: &FeasibilityProblem) -> Result<MembershipReport> {
    let side = problem
        .side_constraint()
        .ok_or_else(|| Error::UnsupportedInput("U** needs a side constraint Av = g".into()))?;
    if !problem.data().is_degenerate() {
        return Err(Error::UnsupportedInput("U** test needs exact data f^l = f^u".into()));
    }
    if let Some(j) = side.v.values().iter().position(|x| !(*x > 0.0)) {
        return Err(Error::UnsupportedInput(alloc::format!(
            "v has a non-positive component at index {j}"
        )));
    }
    let membership = member_u(u, problem, DEFAULT_TOL)?;
    if !membership.member {
        return Err(Error::NotInFeasibleSet(alloc::format!(
            "violation {:e}",
            membership.max_violation()
        )));
    }

    let lower = problem.op().lower();
    let upper = problem.op().upper();
    let f = problem.data().lower().values();
    let g = side.g.values();
    let (uu, vv) = (u.values(), side.v.values());

    let mut rows = Vec::with_capacity(lower.nrows());
    let mut failing_rows = Vec::new();
    let (mut us, mut vs) = (Vec::new(), Vec::new());
    for i in 0..lower.nrows() {
        let (cols, al) = lower.row(i);
        let (_, au) = upper.row(i);
        us.clear();
        vs.clear();
        us.extend(cols.iter().map(|&c| uu[c]));
        vs.extend(cols.iter().map(|&c| vv[c]));
        let verdict = if cols.is_empty() {
            // A zero row can only reproduce f = 0 and g = 0.
            let ok = f[i].abs() <= DEFAULT_TOL && g[i].abs() <= DEFAULT_TOL;
            let val = if ok { 0.0 } else { -f[i].abs().max(g[i].abs()) };
            RowVerdict { k_star: 0, phi_min: val, k_star_star: 0, psi_min: val }
        } else {
            let row = RowInstance { u: &us, v: &vs, a_l: al, a_u: au, f: f[i], g: g[i] };
            let mut v = ustarstar_row(&row)?;
            v.k_star = cols[v.k_star];
            v.k_star_star = cols[v.k_star_star];
            v
        };
        if !verdict.is_member(DEFAULT_TOL) {
            failing_rows.push(i);
        }
        rows.push(verdict);
    }
    let worst_phi = rows
        .iter()
        .min_by(|a, b| a.phi_min.total_cmp(&b.phi_min))
        .copied()
        .unwrap_or(RowVerdict { k_star: 0, phi_min: 0.0, k_star_star: 0, psi_min: 0.0 });
    let worst_psi = rows
        .iter()
        .min_by(|a, b| a.psi_min.total_cmp(&b.psi_min))
        .copied()
        .unwrap_or(worst_phi);
    Ok(MembershipReport {
        member: failing_rows.is_empty(),
        k_star: worst_phi.k_star,
        phi_min: worst_phi.phi_min,
        k_star_star: worst_psi.k_star_star,
        psi_min: worst_psi.psi_min,
        failing_rows,
        rows,
    })
}

/// Farkas certificate `y = (y_1, .., y_4, y_5, .., y_{n+4})` for the
/// combined `α`/`β` system.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
}

impl FarkasCertificate {
    /// `(y_1 - y_2)(y_3 - y_4)`, negative for every valid certificate.
    pub fn sign_product(&self) -> f64 {
        (self.y[0] - self.y[1]) * (self.y[2] - self.y[3])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarkasOutcome {
    pub feasible: bool,
    pub certificate: Option<FarkasCertificate>,
    /// The standard-form system that was solved.
    pub system: StandardForm,
}

/// Builds the combined system over `(α, β) >= 0`:
///
/// ```text
/// [ D_u  0  ] [α]   [ f - Σ a^l u ]
/// [ 0   D_u ] [β] = [ Σ a^u u - f ]
/// [ D_v  0  ]       [ g - Σ a^l v ]
/// [ 0   D_v ]       [ Σ a^u v - g ]
/// [ I    I  ]       [ 1 ... 1     ]
/// ```
///
/// with `D_u = ((a^u_j - a^l_j) u_j)_j` and `D_v` likewise, and decides it
/// with phase one of the simplex method.
pub fn farkas_check(u: &[f64], v: &[f64], a_l: &[f64], a_u: &[f64], f: f64, g: f64) -> Result<FarkasOutcome> {
    let n = u.len();
    if v.len() != n || a_l.len() != n || a_u.len() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, 1),
            found: (v.len(), a_l.len()),
        });
    }
    let rows = n + 4;
    let cols = 2 * n;
    let mut matrix = vec![0.0; rows * cols];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for j in 0..n {
        let d = a_u[j] - a_l[j];
        matrix[j] = d * u[j];
        matrix[cols + n + j] = d * u[j];
        matrix[2 * cols + j] = d * v[j];
        matrix[3 * cols + n + j] = d * v[j];
        matrix[(4 + j) * cols + j] = 1.0;
        matrix[(4 + j) * cols + n + j] = 1.0;
    }
    let mut rhs = vec![1.0; rows];
    rhs[0] = f - dot(a_l, u);
    rhs[1] = dot(a_u, u) - f;
    rhs[2] = g - dot(a_l, v);
    rhs[3] = dot(a_u, v) - g;
    let system = StandardForm::new(rows, cols, matrix, rhs, vec![0.0; cols])?;
    let outcome = lp::solve_standard(&system)?;
    let (feasible, certificate) = match outcome {
        LpOutcome::Infeasible(cert) => (false, Some(FarkasCertificate { y: cert.y })),
        _ => (true, None),
    };
    Ok(FarkasOutcome {
        feasible,
        certificate,
        system,
    })
}

/// Whether some `α ∈ [0, 1]^n` satisfies both row equalities.
pub fn farkas_oracle(u: &[f64], v: &[f64], a_l: &[f64], a_u: &[f64], f: f64, g: f64) -> Result<bool> {
    farkas_check(u, v, a_l, a_u, f, g).map(|o| o.feasible)
}
