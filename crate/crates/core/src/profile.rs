//! Degree-one vortex profile: the modulus `w(r)` solving
//!
//! ```text
//! w'' + w'/r - w/r^2 + (1 - w^2) w = 0,   w(0) = 0,  w(r) -> 1 as r -> inf,
//! ```
//!
//! solved by shooting on the origin slope followed by a Newton polish of a
//! 4th-order collocation system on a graded grid. Evaluation serves `w` and
//! its derivatives up to order four everywhere: interpolation on the grid,
//! a Frobenius series near the origin and the far-field tail `1 - 1/(2 r^2)`
//! beyond the grid.

use crate::error::{Error, Result};
use crate::numerics::{dopri5, fornberg_weights};

/// Graded radial grid: uniform near the core, geometric beyond `r = 2`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub r_max: f64,
}

impl RadialGrid {
    /// Uniform step `0.01 / 2^refine` on [0, 2], geometric ratio
    /// `1.02^(1/2^refine)` beyond, last node exactly `r_max`.
    pub fn graded(r_max: f64, refine: u32) -> Self {
        assert!(r_max >= 4.0);
        let scale = (1u64 << refine) as f64;
        let h0 = 0.01 / scale;
        let ratio = 1.02f64.powf(1.0 / scale);
        let mut nodes = Vec::new();
        let n_uniform = (2.0 / h0).round() as usize;
        for i in 0..=n_uniform {
            nodes.push(i as f64 * h0);
        }
        let mut h = h0;
        let mut r = 2.0;
        loop {
            h *= ratio;
            r += h;
            if r >= r_max - 0.25 * h {
                nodes.push(r_max);
                break;
            }
            nodes.push(r);
        }
        RadialGrid { nodes, r_max }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the cell [nodes[i], nodes[i+1]] containing `r` (clamped).
    pub fn cell_of(&self, r: f64) -> usize {
        let n = self.nodes.len();
        if r <= self.nodes[0] {
            return 0;
        }
        if r >= self.nodes[n - 1] {
            return n - 2;
        }
        // Uniform region admits direct indexing.
        let h0 = self.nodes[1] - self.nodes[0];
        let n_uniform = (2.0 / h0).round() as usize;
        if r < 2.0 {
            return ((r / h0) as usize).min(n_uniform - 1);
        }
        let mut lo = n_uniform;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.nodes[mid] <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Tabulated vortex modulus with first derivative and the origin slope.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    /// `a = lim_{r->0} w(r)/r`, determined by the solve.
    pub shooting_slope: f64,
    /// Residual tolerance the collocation was verified against.
    pub tol: f64,
}

/// Right-hand side of the profile ODE as a first-order system (w, w').
fn profile_ode(r: f64, y: &[f64]) -> Vec<f64> {
    let (w, dw) = (y[0], y[1]);
    vec![dw, -dw / r + w / (r * r) - (1.0 - w * w) * w]
}

/// Series start near the origin: w = a r + c3 r^3 + c5 r^5.
fn series_coeffs(a: f64) -> (f64, f64) {
    let c3 = -a / 8.0;
    let c5 = (a * a * a - c3) / 24.0;
    (c3, c5)
}

fn series_eval(a: f64, r: f64) -> (f64, f64) {
    let (c3, c5) = series_coeffs(a);
    let w = a * r + c3 * r.powi(3) + c5 * r.powi(5);
    let dw = a + 3.0 * c3 * r * r + 5.0 * c5 * r.powi(4);
    (w, dw)
}

enum Shot {
    Over,
    Under,
}

/// Integrate from the series start and classify the slope guess.
fn classify_slope<F>(a: f64, r_end: f64, integrate: F) -> Shot
where
    F: Fn(f64, [f64; 2], f64) -> Vec<(f64, f64, f64)>,
{
    let r0 = 1e-3;
    let (w0, dw0) = series_eval(a, r0);
    let path = integrate(r0, [w0, dw0], r_end);
    for &(_, w, dw) in &path {
        if w > 1.0 + 1e-12 {
            return Shot::Over;
        }
        if dw < -1e-12 {
            return Shot::Under;
        }
    }
    let (_, w_end, _) = *path.last().unwrap();
    if w_end > 1.0 - 0.5 / (r_end * r_end) {
        Shot::Over
    } else {
        Shot::Under
    }
}

/// Bisection on the origin slope with a caller-supplied integrator.
fn bisect_slope<F>(r_end: f64, integrate: F) -> f64
where
    F: Fn(f64, [f64; 2], f64) -> Vec<(f64, f64, f64)>,
{
    let (mut lo, mut hi) = (0.1, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match classify_slope(mid, r_end, &integrate) {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn dopri_integrate(r0: f64, y0: [f64; 2], r_end: f64) -> Vec<(f64, f64, f64)> {
    let mut path = Vec::new();
    dopri5(
        &profile_ode,
        r0,
        r_end,
        &y0,
        1e-12,
        1e-14,
        &mut |r, y: &[f64]| path.push((r, y[0], y[1])),
    );
    path
}

/// Independent shooting oracle: fixed-step RK4 bisection on the slope.
///
/// Deliberately separate from the production path (adaptive integrator +
/// collocation); used by tests to cross-validate `shooting_slope`.
pub fn shooting_slope_oracle(r_end: f64, h: f64) -> f64 {
    let rk4_path = move |r0: f64, y0: [f64; 2], r1: f64| {
        let mut out = Vec::new();
        let mut y = vec![y0[0], y0[1]];
        let n = ((r1 - r0) / h).ceil() as usize;
        let h = (r1 - r0) / n as f64;
        let mut r = r0;
        out.push((r, y[0], y[1]));
        for _ in 0..n {
            y = crate::numerics::rk4_step(&profile_ode, r, &y, h);
            r += h;
            out.push((r, y[0], y[1]));
        }
        out
    };
    bisect_slope(r_end, rk4_path)
}

/// Stencil of node indices used for the FD residual at interior node `i`.
fn stencil(i: usize, n: usize) -> std::ops::Range<usize> {
    const HALF: usize = 3; // 7-point stencil
    let lo = i.saturating_sub(HALF).min(n - (2 * HALF + 1));
    lo..lo + 2 * HALF + 1
}

/// Discrete ODE residual at every interior node from tabulated values.
pub fn collocation_residual(grid: &RadialGrid, w: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut res = vec![0.0; n];
    for i in 1..n - 1 {
        let idx = stencil(i, n);
        let nodes: Vec<f64> = idx.clone().map(|j| grid.nodes[j]).collect();
        let wts = fornberg_weights(grid.nodes[i], &nodes, 2);
        let r = grid.nodes[i];
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for (k, j) in idx.enumerate() {
            d1 += wts[1][k] * w[j];
            d2 += wts[2][k] * w[j];
        }
        let wi = w[i];
        res[i] = d2 + d1 / r - wi / (r * r) + (1.0 - wi * wi) * wi;
    }
    res
}

/// Solve the profile problem on `[0, r_max]`.
pub fn solve_profile(r_max: f64, tol: f64) -> Result<RadialProfile> {
    solve_profile_refined(r_max, tol, 0)
}

/// Same as [`solve_profile`] with grid refinement (node count doubles per level).
pub fn solve_profile_refined(r_max: f64, tol: f64, refine: u32) -> Result<RadialProfile> {
    if r_max < 40.0 {
        return Err(Error::InvalidConfig(format!(
            "profile r_max must be >= 40, got {r_max}"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidConfig("profile tol must be positive".into()));
    }

    // Stage 1: shooting for the slope and an initial guess.
    let r_shoot = 20.0f64.min(r_max);
    let a = bisect_slope(r_shoot, dopri_integrate);
    let path = {
        let r0 = 1e-3;
        let (w0, dw0) = series_eval(a, r0);
        dopri_integrate(r0, [w0, dw0], r_shoot)
    };

    let grid = RadialGrid::graded(r_max, refine);
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let r = grid.nodes[i];
        w[i] = if r <= 0.05 {
            series_eval(a, r).0
        } else if r < r_shoot - 0.5 {
            // Linear interpolation of the shot path is enough as a guess.
            let k = path.partition_point(|p| p.0 < r).min(path.len() - 1).max(1);
            let (r0, w0, _) = path[k - 1];
            let (r1, w1, _) = path[k];
            w0 + (w1 - w0) * (r - r0) / (r1 - r0)
        } else {
            1.0 - 0.5 / (r * r)
        };
    }
    w[n - 1] = 1.0 - 0.5 / (r_max * r_max);

    // Stage 2: Newton on the collocation system (interior unknowns).
    let mut converged = false;
    for _ in 0..30 {
        let res = collocation_residual(&grid, &w);
        let maxres = res.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if maxres < tol * 1e-3 {
            converged = true;
            break;
        }
        // Dense Jacobian over interior unknowns.
        let m = n - 2;
        let mut jac = vec![0.0; m * m];
        for i in 1..n - 1 {
            let idx = stencil(i, n);
            let nodes: Vec<f64> = idx.clone().map(|j| grid.nodes[j]).collect();
            let wts = fornberg_weights(grid.nodes[i], &nodes, 2);
            let r = grid.nodes[i];
            for (k, j) in idx.enumerate() {
                if j == 0 || j == n - 1 {
                    continue;
                }
                jac[(i - 1) * m + (j - 1)] += wts[2][k] + wts[1][k] / r;
            }
            jac[(i - 1) * m + (i - 1)] += -1.0 / (r * r) + 1.0 - 3.0 * w[i] * w[i];
        }
        let rhs: Vec<f64> = res[1..n - 1].iter().map(|&x| -x).collect();
        let delta = solve_dense(&mut jac, rhs, m)?;
        for i in 1..n - 1 {
            w[i] += delta[i - 1];
        }
    }
    if !converged {
        let res = collocation_residual(&grid, &w);
        let maxres = res.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if maxres >= tol {
            return Err(Error::ProfileNoConvergence(format!(
                "max residual {maxres:.3e} after Newton; tol {tol:.3e} (grid too coarse?)"
            )));
        }
    }

    // First derivative at nodes by the same high-order stencils.
    let mut dw = vec![0.0; n];
    for i in 0..n {
        let idx = stencil(i.clamp(1, n - 2), n);
        let nodes: Vec<f64> = idx.clone().map(|j| grid.nodes[j]).collect();
        let wts = fornberg_weights(grid.nodes[i], &nodes, 1);
        for (k, j) in idx.enumerate() {
            dw[i] += wts[1][k] * w[j];
        }
    }

    let slope = dw[0];
    Ok(RadialProfile {
        grid,
        w,
        dw,
        shooting_slope: slope,
        tol,
    })
}

/// Dense linear solve with partial pivoting (consumes the matrix).
fn solve_dense(a: &mut [f64], mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return Err(Error::ProfileNoConvergence("singular Jacobian".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(b)
}

impl RadialProfile {
    /// Evaluate `w` or one of its derivatives (orders 0..=4) at any `r >= 0`.
    ///
    /// Total function: interpolation inside the grid, far-field tail beyond,
    /// Frobenius series for high orders near the origin.
    pub fn eval_w(&self, r: f64, order: usize) -> f64 {
        assert!(order <= 4, "derivative order must be 0..=4");
        assert!(r >= 0.0, "radius must be nonnegative");
        let r_max = self.grid.r_max;
        if r > r_max {
            return far_field(r, order);
        }
        let a = self.shooting_slope;
        if r < 0.04 {
            return series_deriv(a, r, order);
        }
        let (w, dw) = self.interp(r);
        match order {
            0 => w,
            1 => dw,
            _ => ode_recursion(r, w, dw, order),
        }
    }

    /// Quintic Hermite interpolation of (w, w') using nodal (w, w', w'').
    fn interp(&self, r: f64) -> (f64, f64) {
        let i = self.grid.cell_of(r);
        let (r0, r1) = (self.grid.nodes[i], self.grid.nodes[i + 1]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        let (w0, w1) = (self.w[i], self.w[i + 1]);
        let (d0, d1) = (self.dw[i] * h, self.dw[i + 1] * h);
        let s0 = ode_w2(r0.max(1e-12), self.w[i], self.dw[i]) * h * h;
        let s1 = ode_w2(r1, self.w[i + 1], self.dw[i + 1]) * h * h;

        // Quintic Hermite basis in t.
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
        let val = h00 * w0 + h10 * d0 + h20 * s0 + h01 * w1 + h11 * d1 + h21 * s1;

        let g00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let g10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let g20 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let g01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
        let g11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let g21 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        let der = (g00 * w0 + g10 * d0 + g20 * s0 + g01 * w1 + g11 * d1 + g21 * s1) / h;
        (val, der)
    }

    /// Max discrete ODE residual over interior nodes.
    pub fn max_residual(&self) -> f64 {
        collocation_residual(&self.grid, &self.w)
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

/// w'' from the ODE given (r, w, w').
fn ode_w2(r: f64, w: f64, dw: f64) -> f64 {
    -dw / r + w / (r * r) - (1.0 - w * w) * w
}

/// Higher derivatives by differentiating the ODE.
fn ode_recursion(r: f64, w: f64, dw: f64, order: usize) -> f64 {
    let w2 = ode_w2(r, w, dw);
    if order == 2 {
        return w2;
    }
    let w3 = -w2 / r + 2.0 * dw / (r * r) - 2.0 * w / (r * r * r) - dw + 3.0 * w * w * dw;
    if order == 3 {
        return w3;
    }
    -w3 / r + 3.0 * w2 / (r * r) - 6.0 * dw / (r * r * r) + 6.0 * w / (r * r * r * r) - w2
        + 3.0 * w * w * w2
        + 6.0 * w * dw * dw
}

/// Far-field asymptotics w = 1 - 1/(2 r^2) and its derivatives, following
/// the (-1)^(l+1) (l+1)!/2 r^(-l-2) law.
fn far_field(r: f64, order: usize) -> f64 {
    match order {
        0 => 1.0 - 0.5 / (r * r),
        l => {
            let fact: f64 = (1..=l as u64 + 1).map(|k| k as f64).product();
            let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
            sign * fact / 2.0 * r.powi(-(l as i32) - 2)
        }
    }
}

/// Series derivatives near the origin.
fn series_deriv(a: f64, r: f64, order: usize) -> f64 {
    let (c3, c5) = series_coeffs(a);
    match order {
        0 => a * r + c3 * r.powi(3) + c5 * r.powi(5),
        1 => a + 3.0 * c3 * r * r + 5.0 * c5 * r.powi(4),
        2 => 6.0 * c3 * r + 20.0 * c5 * r.powi(3),
        3 => 6.0 * c3 + 60.0 * c5 * r * r,
        _ => 120.0 * c5 * r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> RadialProfile {
        solve_profile(40.0, 1e-10).expect("profile solve")
    }

    #[test]
    fn boundary_values() {
        let p = profile();
        assert_eq!(p.eval_w(0.0, 0), 0.0);
        assert!((p.eval_w(1e6, 0) - 1.0).abs() < 1e-12);
        assert!(p.shooting_slope > 0.0);
    }

    #[test]
    fn ode_residual_below_tolerance() {
        let p = profile();
        assert!(p.max_residual() < 1e-10, "residual {}", p.max_residual());
    }

    #[test]
    fn monotone_increasing() {
        let p = profile();
        let mut prev = -1.0;
        for i in 0..400 {
            let r = i as f64 * 0.1;
            let w = p.eval_w(r, 0);
            assert!(w > prev, "w not increasing at r={r}");
            assert!((0.0..1.0 + 1e-12).contains(&w));
            prev = w;
        }
    }

    #[test]
    fn far_field_tail_constant() {
        let p = profile();
        // sup over [10, 30] of r^4 |w - (1 - 1/(2 r^2))| stays O(1).
        let mut sup: f64 = 0.0;
        let mut r = 10.0;
        while r <= 30.0 {
            let dev = (p.eval_w(r, 0) - (1.0 - 0.5 / (r * r))).abs() * r.powi(4);
            sup = sup.max(dev);
            r += 0.25;
        }
        assert!(sup < 10.0, "tail constant {sup}");
        // The value at r=20 obeys the fitted C / r^4 envelope.
        let dev20 = (p.eval_w(20.0, 0) - (1.0 - 1.0 / 800.0)).abs();
        assert!(dev20 <= sup / 20.0f64.powi(4) * (1.0 + 1e-9));
    }

    #[test]
    fn slope_matches_independent_rk4_bisection() {
        let p = profile();
        let oracle = shooting_slope_oracle(15.0, 2e-4);
        assert!(
            (p.shooting_slope - oracle).abs() < 1e-6,
            "slope {} vs oracle {}",
            p.shooting_slope,
            oracle
        );
    }

    #[test]
    fn first_derivative_follows_inverse_cube_law() {
        let p = profile();
        let d15 = p.eval_w(15.0, 1);
        let d30 = p.eval_w(30.0, 1);
        assert!(d15 > 0.0);
        let ratio = d15 / d30;
        assert!((ratio - 8.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn derivative_recursion_consistent_with_fd() {
        let p = profile();
        for &r in &[0.5, 1.0, 3.0, 8.0] {
            let h = 1e-4;
            let fd2 = (p.eval_w(r + h, 1) - p.eval_w(r - h, 1)) / (2.0 * h);
            assert!(
                (fd2 - p.eval_w(r, 2)).abs() < 1e-5,
                "w'' mismatch at r={r}: fd {fd2} vs {}",
                p.eval_w(r, 2)
            );
            let fd3 = (p.eval_w(r + h, 2) - p.eval_w(r - h, 2)) / (2.0 * h);
            assert!((fd3 - p.eval_w(r, 3)).abs() < 1e-4);
        }
    }

    #[test]
    fn grid_refinement_stable() {
        let coarse = profile();
        let fine = solve_profile_refined(40.0, 1e-10, 1).expect("refined solve");
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let r = 0.05 + i as f64 * 0.39;
            worst = worst.max((coarse.eval_w(r, 0) - fine.eval_w(r, 0)).abs());
        }
        assert!(worst < 1e-7, "refinement drift {worst}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(solve_profile(10.0, 1e-8).is_err());
        assert!(solve_profile(40.0, -1.0).is_err());
    }
}
