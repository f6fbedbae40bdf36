//! Oracles and generators shared by the integration tests.

#![allow(dead_code)]

use orderbound::lattice::FeasibilityProblem;
use orderbound::lp::{solve_lp, LinearProgram, LpOutcome};
use orderbound::operators::{data_bounds, IntervalOperator};
use orderbound::{ImageGrid, SparseMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `min Σ|u_{i+1} - u_i|` over `u >= 0, A^l u <= f^u, A^u u >= f^l` as an LP.
///
/// Variables: `u` (n), `p`, `q` (n-1 each) with `u_{i+1} - u_i = p_i - q_i`,
/// and slacks `s`, `t` (m each) with `A^l u + s = f^u`, `A^u u - t = f^l`.
pub fn tv_lp_value(problem: &FeasibilityProblem) -> Option<f64> {
    let (m, n) = problem.op().shape();
    let (al, au) = (problem.op().lower().to_dense(), problem.op().upper().to_dense());
    let (fl, fu) = (problem.data().lower().values(), problem.data().upper().values());
    let vars = n + 2 * (n - 1) + 2 * m;
    let rows = (n - 1) + 2 * m;
    let mut a = vec![0.0; rows * vars];
    let mut b = vec![0.0; rows];
    let (p0, q0, s0, t0) = (n, 2 * n - 1, 3 * n - 2, 3 * n - 2 + m);
    for i in 0..n - 1 {
        a[i * vars + i + 1] = 1.0;
        a[i * vars + i] = -1.0;
        a[i * vars + p0 + i] = -1.0;
        a[i * vars + q0 + i] = 1.0;
    }
    for i in 0..m {
        let r = n - 1 + i;
        a[r * vars..r * vars + n].copy_from_slice(&al[i * n..(i + 1) * n]);
        a[r * vars + s0 + i] = 1.0;
        b[r] = fu[i];
        let r = n - 1 + m + i;
        a[r * vars..r * vars + n].copy_from_slice(&au[i * n..(i + 1) * n]);
        a[r * vars + t0 + i] = -1.0;
        b[r] = fl[i];
    }
    let mut c = vec![0.0; vars];
    c[p0..s0].iter_mut().for_each(|v| *v = 1.0);
    let lp = LinearProgram::new(c, a, b, vec![0.0; vars], vec![f64::INFINITY; vars]).ok()?;
    match solve_lp(&lp).ok()? {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

/// A random blur-like interval problem on `n` samples whose data come from a
/// random piecewise-constant signal, so that `U` is nonempty.
pub fn random_tv_instance(rng: &mut ChaCha8Rng, n: usize) -> FeasibilityProblem {
    let mut triplets = Vec::new();
    let mut upper = Vec::new();
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            let base = if i == j { rng.random_range(0.5..0.8) } else { rng.random_range(0.05..0.2) };
            let w = rng.random_range(0.0..0.1);
            triplets.push((i, j, base));
            upper.push((i, j, base + w));
        }
    }
    let lo = SparseMatrix::from_triplets(n, n, triplets).unwrap();
    let hi = SparseMatrix::from_triplets(n, n, upper).unwrap();
    let op = IntervalOperator::new(lo, hi).unwrap();
    let mut u = Vec::with_capacity(n);
    let mut level = rng.random_range(0.0..10.0);
    for _ in 0..n {
        if rng.random_bool(0.25) {
            level = rng.random_range(0.0..10.0);
        }
        u.push(level);
    }
    let mid = op.lower().zip_union(op.upper(), |l, h| 0.5 * (l + h)).unwrap();
    let f = ImageGrid::from_signal(mid.mul_vec(&u).unwrap()).unwrap();
    FeasibilityProblem::new(op, data_bounds(&f, rng.random_range(0.05..0.5)).unwrap()).unwrap()
}

/// A random interval problem with `A^l >= 0` and a point of `U`, found by
/// rejection sampling around a point that explains the midpoint data.
pub fn random_problem_with_member(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (FeasibilityProblem, ImageGrid) {
    loop {
        let lo: Vec<f64> = (0..m * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.0..0.5)).collect();
        let op = IntervalOperator::new(
            SparseMatrix::from_dense(m, n, &lo).unwrap(),
            SparseMatrix::from_dense(m, n, &hi).unwrap(),
        )
        .unwrap();
        let centre: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let mid = op.lower().zip_union(op.upper(), |l, h| 0.5 * (l + h)).unwrap();
        let f = ImageGrid::from_signal(mid.mul_vec(&centre).unwrap()).unwrap();
        let problem = FeasibilityProblem::new(op, data_bounds(&f, rng.random_range(0.0..1.0)).unwrap()).unwrap();
        for _ in 0..200 {
            let u: Vec<f64> = centre.iter().map(|c| (c + rng.random_range(-1.0..1.0)).max(0.0)).collect();
            let u = ImageGrid::from_signal(u).unwrap();
            if orderbound::lattice::member_u(&u, &problem, 0.0).unwrap().member {
                return (problem, u);
            }
        }
    }
}
