//! Multi-vortex product ansatz and its first error.
//!
//! The ansatz around prescribed points is the product of translated
//! degree-one vortices, `U(y) = prod_j W(y - xi_j/eps)^(d_j)` (conjugate for
//! `d_j = -1`), expressed in the rescaled variable `y = x/eps`. Its residual
//! under `S(u) = eps^2 i u_t + Lap_y u + (1 - |u|^2) u` factors exactly as
//! `S(U) = i U (R1 + i R2)` with
//!
//! ```text
//! R1 = sum_j (grad w_j / w_j) . (-eps xi_j') + 2 sum_j sum_{k!=j} (grad w_j / w_j) . d_k grad theta_k
//! R2 = sum_j d_j grad theta_j . (-eps xi_j')  + sum_j sum_{k!=j} d_j d_k grad theta_j . grad theta_k
//!      - (1 - prod_j w_j^2 - sum_j (1 - w_j^2)) - sum_j sum_{k!=j} (grad w_j / w_j).(grad w_k / w_k)
//! ```
//!
//! Both routes are implemented independently: the exact term-by-term R1/R2
//! evaluation, and a direct residual with a high-order finite-difference
//! Laplacian plus the analytic time derivative through moving centers. Their
//! agreement off-core is the primary consistency oracle of the crate.

use crate::error::{Error, Result};
use crate::numerics::{wrap_angle, Vec2};
use crate::profile::RadialProfile;
use crate::vortex::VortexConfig;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Frame tag for sampled fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    PhysicalX,
    RescaledY,
}

/// Complex samples on a uniform square grid, row-major, node (i, j) at
/// `(-L/2 + i L/N, -L/2 + j L/N)` with the first index along x.
#[derive(Debug, Clone)]
pub struct ComplexField2D {
    pub side: f64,
    pub n: usize,
    pub samples: Array2<Complex64>,
    pub frame: Frame,
    pub epsilon: f64,
}

impl ComplexField2D {
    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn coord(&self, i: usize, j: usize) -> Vec2 {
        let h = self.spacing();
        Vec2::new(-0.5 * self.side + i as f64 * h, -0.5 * self.side + j as f64 * h)
    }

    /// Winding number of the sampled phase along the circle of given center
    /// and radius, by summed wrapped phase increments of bilinearly
    /// interpolated values.
    pub fn winding_number(&self, center: Vec2, radius: f64, samples: usize) -> i32 {
        let mut total = 0.0;
        let mut prev = self.bilinear(center + Vec2::new(radius, 0.0)).arg();
        for k in 1..=samples {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            let p = center + Vec2::new(radius * ang.cos(), radius * ang.sin());
            let phase = self.bilinear(p).arg();
            total += wrap_angle(phase - prev);
            prev = phase;
        }
        (total / (2.0 * std::f64::consts::PI)).round() as i32
    }

    /// Bilinear interpolation with periodic wrapping.
    pub fn bilinear(&self, p: Vec2) -> Complex64 {
        let n = self.n;
        let h = self.spacing();
        let fx = (p.x + 0.5 * self.side) / h;
        let fy = (p.y + 0.5 * self.side) / h;
        let i0 = fx.floor() as i64;
        let j0 = fy.floor() as i64;
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let wrap = |k: i64| -> usize { k.rem_euclid(n as i64) as usize };
        let v00 = self.samples[[wrap(i0), wrap(j0)]];
        let v10 = self.samples[[wrap(i0 + 1), wrap(j0)]];
        let v01 = self.samples[[wrap(i0), wrap(j0 + 1)]];
        let v11 = self.samples[[wrap(i0 + 1), wrap(j0 + 1)]];
        v00 * ((1.0 - tx) * (1.0 - ty))
            + v10 * (tx * (1.0 - ty))
            + v01 * ((1.0 - tx) * ty)
            + v11 * (tx * ty)
    }
}

/// The residual factor fields R1, R2 on a grid, with the excluded-node mask
/// (nodes within one cell of a vortex center, where 1/r weights blow up).
#[derive(Debug, Clone)]
pub struct ResidualDecomposition {
    pub r1: Array2<f64>,
    pub r2: Array2<f64>,
    pub mask: Array2<bool>,
    pub side: f64,
    pub n: usize,
    pub epsilon: f64,
}

impl ResidualDecomposition {
    /// Sup of |R1 + i R2| over unmasked nodes.
    pub fn sup_unmasked(&self) -> f64 {
        let mut sup: f64 = 0.0;
        for ((idx, &r1), &r2) in self.r1.indexed_iter().zip(self.r2.iter()) {
            if !self.mask[idx] {
                sup = sup.max((r1 * r1 + r2 * r2).sqrt());
            }
        }
        sup
    }
}

/// Separation scale: a quarter of the minimal pairwise distance.
pub fn delta_of_config(config: &VortexConfig) -> f64 {
    0.25 * config.min_pair_distance()
}

/// Pointwise evaluator for the product ansatz and its residual.
///
/// Holds centers in the rescaled frame and the scaled velocities
/// `eps xi_j'`; accepts any vortex count n >= 1 (a single vortex is the
/// exact steady solution and a useful null case).
pub struct AnsatzContext<'a> {
    pub profile: &'a RadialProfile,
    pub centers: Vec<Vec2>,
    pub degrees: Vec<i8>,
    pub eps_vel: Vec<Vec2>,
    pub epsilon: f64,
}

/// Per-vortex local data at an evaluation point.
struct VortexLocal {
    w: f64,
    /// grad w_j / w_j (radial direction times w'/w).
    grad_w_over_w: Vec2,
    /// grad theta_j = perp(y - c_j)/|y - c_j|^2.
    grad_theta: Vec2,
    theta: f64,
    r: f64,
}

impl<'a> AnsatzContext<'a> {
    pub fn new(
        profile: &'a RadialProfile,
        positions_phys: &[Vec2],
        degrees: &[i8],
        velocities_phys: &[Vec2],
        epsilon: f64,
    ) -> Self {
        assert_eq!(positions_phys.len(), degrees.len());
        assert_eq!(positions_phys.len(), velocities_phys.len());
        AnsatzContext {
            profile,
            centers: positions_phys.iter().map(|&p| p / epsilon).collect(),
            degrees: degrees.to_vec(),
            eps_vel: velocities_phys.iter().map(|&v| v * epsilon).collect(),
            epsilon,
        }
    }

    pub fn from_config(
        profile: &'a RadialProfile,
        config: &VortexConfig,
        velocities_phys: &[Vec2],
    ) -> Self {
        Self::new(
            profile,
            &config.positions,
            &config.degrees,
            velocities_phys,
            config.epsilon,
        )
    }

    fn locals(&self, y: Vec2) -> Vec<VortexLocal> {
        self.centers
            .iter()
            .map(|&c| {
                let dy = y - c;
                let r = dy.norm();
                let w = self.profile.eval_w(r, 0);
                let dw = self.profile.eval_w(r, 1);
                let (e_r, grad_theta) = if r > 0.0 {
                    (dy / r, dy.perp() / (r * r))
                } else {
                    (Vec2::ZERO, Vec2::ZERO)
                };
                VortexLocal {
                    w,
                    grad_w_over_w: if w > 0.0 { e_r * (dw / w) } else { Vec2::ZERO },
                    grad_theta,
                    theta: dy.angle(),
                    r,
                }
            })
            .collect()
    }

    /// U(y): product of vortex factors.
    pub fn u_value(&self, y: Vec2) -> Complex64 {
        let locs = self.locals(y);
        let mut modulus = 1.0;
        let mut phase = 0.0;
        for (loc, &d) in locs.iter().zip(&self.degrees) {
            modulus *= loc.w;
            phase += d as f64 * loc.theta;
        }
        Complex64::from_polar(modulus, phase)
    }

    /// Exact (R1, R2) per the first-error factorization.
    ///
    /// Returns None at a vortex center, where the 1/r factors are singular.
    pub fn r1_r2(&self, y: Vec2) -> Option<(f64, f64)> {
        let locs = self.locals(y);
        if locs.iter().any(|l| l.r == 0.0) {
            return None;
        }
        let n = locs.len();
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        for j in 0..n {
            r1 += locs[j].grad_w_over_w.dot(-self.eps_vel[j]);
            r2 += self.degrees[j] as f64 * locs[j].grad_theta.dot(-self.eps_vel[j]);
            for k in 0..n {
                if k == j {
                    continue;
                }
                r1 += 2.0
                    * self.degrees[k] as f64
                    * locs[j].grad_w_over_w.dot(locs[k].grad_theta);
                r2 += (self.degrees[j] * self.degrees[k]) as f64
                    * locs[j].grad_theta.dot(locs[k].grad_theta);
                if k > j {
                    r2 -= 2.0 * locs[j].grad_w_over_w.dot(locs[k].grad_w_over_w);
                }
            }
        }
        // 1 - prod w^2 - sum (1 - w^2) = -(e2 - e3 + e4 - ...) in the
        // variables u_k = 1 - w_k^2; the symmetric-polynomial form avoids
        // catastrophic cancellation in the far field.
        let us: Vec<f64> = locs.iter().map(|l| 1.0 - l.w * l.w).collect();
        r2 -= -alternating_elementary_tail(&us);
        Some((r1, r2))
    }

    /// S(U) at a point given the Laplacian of U there (the nonlocal piece).
    fn s_from_laplacian(&self, y: Vec2, u: Complex64, lap_u: Complex64) -> Complex64 {
        let locs = self.locals(y);
        // eps^2 i dU/dt = i U sum_j [ (grad w_j/w_j) + i d_j grad theta_j ] . (-eps xi_j')
        let mut dot = Complex64::new(0.0, 0.0);
        for (j, loc) in locs.iter().enumerate() {
            let v = -self.eps_vel[j];
            dot += Complex64::new(loc.grad_w_over_w.dot(v), loc.grad_theta.dot(v) * self.degrees[j] as f64);
        }
        let time_term = Complex64::new(0.0, 1.0) * u * dot;
        let mod2 = u.norm_sqr();
        time_term + lap_u + (1.0 - mod2) * u
    }

    /// Leading mode-1 factor of the near-core expansions at vortex j:
    /// the velocity mismatch `-xi_j' + 2 sum_k d_k (xi_j - xi_k)^perp / |..|^2`
    /// in physical units (zero for Kirchhoff-consistent velocities).
    pub fn velocity_mismatch(&self, j: usize) -> Vec2 {
        let mut b = -self.eps_vel[j] / self.epsilon;
        for k in 0..self.centers.len() {
            if k == j {
                continue;
            }
            let diff = (self.centers[j] - self.centers[k]) * self.epsilon;
            b += diff.perp() * (2.0 * self.degrees[k] as f64 / diff.norm_sq());
        }
        b
    }

    /// Closed-form mode-2 coefficients of the near-core error at vortex j:
    /// `R_j1 = -2 eps^2 (w' r / w) sum_k d_k sin(2(theta - q_jk)) / l_jk^2`
    /// as (cos 2theta, sin 2theta) coefficients, and the matching mode-2
    /// part of R_j2. Returned as ((a1, b1), (a2, b2)) with f = a cos + b sin.
    pub fn mode2_closed_form(&self, j: usize, r: f64) -> ((f64, f64), (f64, f64)) {
        let wr = self.profile.eval_w(r, 0);
        let dwr = self.profile.eval_w(r, 1);
        let radial = dwr * r / wr;
        let eps2 = self.epsilon * self.epsilon;
        let (mut sc, mut ss) = (0.0, 0.0);
        for k in 0..self.centers.len() {
            if k == j {
                continue;
            }
            let diff = (self.centers[j] - self.centers[k]) * self.epsilon;
            let q = diff.angle();
            let a_k = 2.0 * eps2 * self.degrees[k] as f64 / diff.norm_sq();
            sc += a_k * (2.0 * q).cos();
            ss += a_k * (2.0 * q).sin();
        }
        // R_j1 = -(w'r/w) [sc sin 2t - ss cos 2t]
        let r1_cos = radial * ss;
        let r1_sin = -radial * sc;
        // mode-2 part of R_j2 = -d_j [sc cos 2t + ss sin 2t]
        let dj = self.degrees[j] as f64;
        let r2_cos = -dj * sc;
        let r2_sin = -dj * ss;
        ((r1_cos, r1_sin), (r2_cos, r2_sin))
    }
}

/// `e2 - e3 + e4 - ...` for the elementary symmetric polynomials of `us`.
fn alternating_elementary_tail(us: &[f64]) -> f64 {
    // Coefficients of prod (1 + u_k x): c[m] = e_m.
    let mut c = vec![0.0; us.len() + 1];
    c[0] = 1.0;
    for (k, &u) in us.iter().enumerate() {
        for m in (1..=k + 1).rev() {
            c[m] += u * c[m - 1];
        }
    }
    let mut acc = 0.0;
    let mut sign = 1.0;
    for cm in c.iter().skip(2) {
        acc += sign * cm;
        sign = -sign;
    }
    acc
}

/// Check that all vortices sit inside the sampling box with the core margin
/// (40 core radii in the rescaled frame).
fn check_margins(centers: &[Vec2], side_y: f64) -> Result<()> {
    const MARGIN_Y: f64 = 40.0;
    for (idx, c) in centers.iter().enumerate() {
        let half = 0.5 * side_y;
        if c.x.abs() > half - MARGIN_Y || c.y.abs() > half - MARGIN_Y {
            return Err(Error::VortexOutsideBox {
                index: idx,
                margin: MARGIN_Y,
                side: side_y,
            });
        }
    }
    Ok(())
}

/// Sample the product ansatz on an N x N grid over a physical box of side
/// `side_phys`; the field is produced in the rescaled frame (side/eps).
pub fn build_ansatz(
    profile: &RadialProfile,
    config: &VortexConfig,
    side_phys: f64,
    n: usize,
) -> Result<ComplexField2D> {
    config.validate()?;
    let ctx = AnsatzContext::from_config(profile, config, &vec![Vec2::ZERO; config.len()]);
    let side_y = side_phys / config.epsilon;
    check_margins(&ctx.centers, side_y)?;
    let h = side_y / n as f64;
    let mut samples = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = -0.5 * side_y + i as f64 * h;
            (0..n)
                .map(|j| {
                    let y = -0.5 * side_y + j as f64 * h;
                    ctx.u_value(Vec2::new(x, y))
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            samples[[i, j]] = v;
        }
    }
    Ok(ComplexField2D {
        side: side_y,
        n,
        samples,
        frame: Frame::RescaledY,
        epsilon: config.epsilon,
    })
}

/// Evaluate R1 and R2 term by term on a grid (rescaled frame, box of side
/// `side_phys / eps`), masking nodes within one cell of a vortex center.
pub fn residual_r1r2(
    profile: &RadialProfile,
    config: &VortexConfig,
    velocities: &[Vec2],
    side_phys: f64,
    n: usize,
) -> Result<ResidualDecomposition> {
    config.validate()?;
    let ctx = AnsatzContext::from_config(profile, config, velocities);
    let side_y = side_phys / config.epsilon;
    check_margins(&ctx.centers, side_y)?;
    let h = side_y / n as f64;
    let origin = -0.5 * side_y;

    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<bool>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = origin + i as f64 * h;
            let mut r1 = vec![0.0; n];
            let mut r2 = vec![0.0; n];
            let mut mask = vec![false; n];
            for j in 0..n {
                let y = Vec2::new(x, origin + j as f64 * h);
                let near_core = ctx
                    .centers
                    .iter()
                    .any(|&c| (y - c).norm() <= h * std::f64::consts::SQRT_2);
                if near_core {
                    mask[j] = true;
                    continue;
                }
                let (a, b) = ctx.r1_r2(y).expect("off-core point");
                r1[j] = a;
                r2[j] = b;
            }
            (r1, r2, mask)
        })
        .collect();

    let mut r1 = Array2::zeros((n, n));
    let mut r2 = Array2::zeros((n, n));
    let mut mask = Array2::from_elem((n, n), false);
    for (i, (a, b, m)) in rows.into_iter().enumerate() {
        for j in 0..n {
            r1[[i, j]] = a[j];
            r2[[i, j]] = b[j];
            mask[[i, j]] = m[j];
        }
    }
    Ok(ResidualDecomposition {
        r1,
        r2,
        mask,
        side: side_y,
        n,
        epsilon: config.epsilon,
    })
}

/// 6th-order central second-derivative stencil.
const D2_STENCIL: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    1.5,
    -49.0 / 18.0,
    1.5,
    -3.0 / 20.0,
    1.0 / 90.0,
];
const D2_HALF: usize = 3;

/// Direct residual S(U) by high-order FD Laplacian plus analytic time term.
///
/// Returns the residual field and the validity mask: stencil-width boundary
/// skirt and near-core nodes are excluded (reported, never silent).
pub fn residual_direct(
    profile: &RadialProfile,
    config: &VortexConfig,
    velocities: &[Vec2],
    side_phys: f64,
    n: usize,
) -> Result<(Array2<Complex64>, Array2<bool>)> {
    config.validate()?;
    let side_y = side_phys / config.epsilon;
    let h = side_y / n as f64;
    if h > 0.130 {
        return Err(Error::UnderResolved(format!(
            "spacing {h:.3} core radii exceeds 1/8: raise N past {}",
            (side_y * 8.0).ceil()
        )));
    }
    let ctx = AnsatzContext::from_config(profile, config, velocities);
    check_margins(&ctx.centers, side_y)?;
    let origin = -0.5 * side_y;

    // Sample U once.
    let mut u = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    let urows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = origin + i as f64 * h;
            (0..n)
                .map(|j| ctx.u_value(Vec2::new(x, origin + j as f64 * h)))
                .collect()
        })
        .collect();
    for (i, row) in urows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            u[[i, j]] = v;
        }
    }

    let skirt = D2_HALF;
    let mut out = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    let mut mask = Array2::from_elem((n, n), true);
    let inv_h2 = 1.0 / (h * h);
    let rows: Vec<(usize, Vec<Complex64>, Vec<bool>)> = (skirt..n - skirt)
        .into_par_iter()
        .map(|i| {
            let x = origin + i as f64 * h;
            let mut vals = vec![Complex64::new(0.0, 0.0); n];
            let mut ok = vec![false; n];
            for j in skirt..n - skirt {
                let y = Vec2::new(x, origin + j as f64 * h);
                if ctx.centers.iter().any(|&c| (y - c).norm() <= 1.0) {
                    continue; // singular 1/r weights live here; keep masked
                }
                let mut lap = Complex64::new(0.0, 0.0);
                for (s, &c) in D2_STENCIL.iter().enumerate() {
                    let off = s as isize - D2_HALF as isize;
                    lap += c * (u[[(i as isize + off) as usize, j]] + u[[i, (j as isize + off) as usize]]);
                }
                lap *= inv_h2;
                vals[j] = ctx.s_from_laplacian(y, u[[i, j]], lap);
                ok[j] = true;
            }
            (i, vals, ok)
        })
        .collect();
    for (i, vals, ok) in rows {
        for j in 0..n {
            out[[i, j]] = vals[j];
            mask[[i, j]] = !ok[j];
        }
    }
    Ok((out, mask))
}

/// Angular spectrum of the near-core error on the circle |y_j| = r, after
/// subtracting the mode-1 leading term driven by the velocity mismatch.
///
/// Returns per-mode (cos, sin) coefficients for the R1 part and the R2 part,
/// up to `modes` inclusive.
pub struct ModeSpectrum {
    pub r1_cos: Vec<f64>,
    pub r1_sin: Vec<f64>,
    pub r2_cos: Vec<f64>,
    pub r2_sin: Vec<f64>,
}

impl ModeSpectrum {
    pub fn r1_amplitude(&self, m: usize) -> f64 {
        (self.r1_cos[m].powi(2) + self.r1_sin[m].powi(2)).sqrt()
    }
    pub fn r2_amplitude(&self, m: usize) -> f64 {
        (self.r2_cos[m].powi(2) + self.r2_sin[m].powi(2)).sqrt()
    }
}

pub fn mode_expand_near(
    ctx: &AnsatzContext,
    j: usize,
    r: f64,
    modes: usize,
) -> Result<ModeSpectrum> {
    // The probe must stay in the near region of vortex j.
    let delta_y = ctx
        .centers
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &c)| (c - ctx.centers[j]).norm())
        .fold(f64::INFINITY, f64::min)
        * 0.25;
    if r > delta_y {
        return Err(Error::InvalidConfig(format!(
            "probe radius {r} beyond the separation scale {delta_y:.3}"
        )));
    }
    let n_samples = (8 * (modes + 1)).next_power_of_two().max(256);
    let mismatch = ctx.velocity_mismatch(j);
    let center = ctx.centers[j];
    let w = ctx.profile.eval_w(r, 0);
    let dw = ctx.profile.eval_w(r, 1);
    let dj = ctx.degrees[j] as f64;

    let mut f1 = vec![0.0; n_samples];
    let mut f2 = vec![0.0; n_samples];
    for (s, (v1, v2)) in f1.iter_mut().zip(f2.iter_mut()).enumerate() {
        let th = 2.0 * std::f64::consts::PI * s as f64 / n_samples as f64;
        let e_r = Vec2::new(th.cos(), th.sin());
        let y = center + e_r * r;
        let (r1, r2) = ctx.r1_r2(y).expect("probe circle off-core");
        // Subtract the mode-1 leading terms of the near-core expansion.
        let lead1 = ctx.epsilon * (dw / w) * e_r.dot(mismatch);
        let lead2 = ctx.epsilon * dj * (e_r.perp() / r).dot(mismatch);
        *v1 = r1 - lead1;
        *v2 = r2 - lead2;
    }

    let project = |f: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut cos_c = vec![0.0; modes + 1];
        let mut sin_c = vec![0.0; modes + 1];
        let nn = f.len() as f64;
        for (m, (cc, sc)) in cos_c.iter_mut().zip(sin_c.iter_mut()).enumerate() {
            let mut ac = 0.0;
            let mut as_ = 0.0;
            for (s, &v) in f.iter().enumerate() {
                let th = 2.0 * std::f64::consts::PI * (s as f64) * (m as f64) / nn;
                ac += v * th.cos();
                as_ += v * th.sin();
            }
            let norm = if m == 0 { 1.0 / nn } else { 2.0 / nn };
            *cc = ac * norm;
            *sc = as_ * norm;
        }
        (cos_c, sin_c)
    };
    let (r1_cos, r1_sin) = project(&f1);
    let (r2_cos, r2_sin) = project(&f2);
    Ok(ModeSpectrum {
        r1_cos,
        r1_sin,
        r2_cos,
        r2_sin,
    })
}

/// Both trigonometric expansion identities truncated at M terms; returns the
/// two absolute residuals. Requires |y| < |zeta|.
pub fn trig_identity_check(y: Vec2, zeta: Vec2, truncation: usize) -> (f64, f64) {
    let lhs_vec = {
        let s = y + zeta;
        s.perp() / s.norm_sq() - zeta.perp() / zeta.norm_sq()
    };
    let lhs1 = y.dot(lhs_vec);
    let lhs2 = y.perp().dot(lhs_vec);
    let rho = y.norm() / zeta.norm();
    let phase = y.angle() - zeta.angle();
    let mut rhs1 = 0.0;
    let mut rhs2 = 0.0;
    for m in 2..=truncation {
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        let amp = sign * rho.powi(m as i32);
        rhs1 += amp * (m as f64 * phase).sin();
        rhs2 += amp * (m as f64 * phase).cos();
    }
    // The identities carry 1/|zeta| scaling on both sides once y is not a
    // unit vector; the series as stated multiplies |y|^m / |zeta|^m, and the
    // left sides are dimensionless combinations already.
    ((lhs1 - rhs1).abs(), (lhs2 - rhs2).abs())
}

/// Winding number of the analytic ansatz phase on a circle (pointwise, no
/// grid): discrete sum of wrapped phase increments over `samples` arcs.
pub fn winding_number_pointwise(
    ctx: &AnsatzContext,
    center: Vec2,
    radius: f64,
    samples: usize,
) -> i32 {
    let mut total = 0.0;
    let mut prev = ctx.u_value(center + Vec2::new(radius, 0.0)).arg();
    for k in 1..=samples {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let p = center + Vec2::new(radius * ang.cos(), radius * ang.sin());
        let phase = ctx.u_value(p).arg();
        total += wrap_angle(phase - prev);
        prev = phase;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}
