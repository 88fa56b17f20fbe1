//! Helmholtz-Kirchhoff point-vortex dynamics:
//!
//! ```text
//! xi_j' = 2 sum_{k != j} d_k (xi_j - xi_k)^perp / |xi_j - xi_k|^2
//! ```
//!
//! with Hamiltonian `K = 2 sum_{j != k} d_j d_k log |xi_j - xi_k|` (ordered
//! pairs) and conserved signed centroid `sum_j d_j xi_j`. Integration is
//! classic fixed-step RK4 with a per-step collision guard at `4 eps`.

use crate::error::{Error, Result};
use crate::numerics::Vec2;
use serde::{Deserialize, Serialize};

/// Minimum pairwise distance below which the right-hand side refuses to
/// evaluate regardless of eps.
const COINCIDENCE_GUARD: f64 = 1e-10;

/// Positions, degrees and core size of an n-vortex configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VortexConfig {
    pub positions: Vec<Vec2>,
    pub degrees: Vec<i8>,
    pub epsilon: f64,
}

impl VortexConfig {
    pub fn new(positions: Vec<Vec2>, degrees: Vec<i8>, epsilon: f64) -> Result<Self> {
        let cfg = VortexConfig {
            positions,
            degrees,
            epsilon,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.len() != self.degrees.len() {
            return Err(Error::InvalidConfig(format!(
                "{} positions but {} degrees",
                self.positions.len(),
                self.degrees.len()
            )));
        }
        if self.positions.len() < 2 {
            return Err(Error::InvalidConfig("need at least 2 vortices".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        if self.degrees.iter().any(|&d| d != 1 && d != -1) {
            return Err(Error::InvalidConfig("degrees must be +1 or -1".into()));
        }
        if !self.positions.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("vortex position".into()));
        }
        let dmin = self.min_pair_distance();
        if dmin <= COINCIDENCE_GUARD {
            return Err(Error::Collision {
                dist: dmin,
                guard: COINCIDENCE_GUARD,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn min_pair_distance(&self) -> f64 {
        let n = self.positions.len();
        let mut dmin = f64::INFINITY;
        for j in 0..n {
            for k in j + 1..n {
                dmin = dmin.min((self.positions[j] - self.positions[k]).norm());
            }
        }
        dmin
    }

    pub fn total_degree(&self) -> i32 {
        self.degrees.iter().map(|&d| d as i32).sum()
    }

    /// Signed centroid `sum_j d_j xi_j`, a conserved quantity of the flow.
    pub fn signed_centroid(&self) -> Vec2 {
        self.positions
            .iter()
            .zip(&self.degrees)
            .fold(Vec2::ZERO, |acc, (&p, &d)| acc + p * d as f64)
    }

    pub fn with_positions(&self, positions: Vec<Vec2>) -> VortexConfig {
        VortexConfig {
            positions,
            degrees: self.degrees.clone(),
            epsilon: self.epsilon,
        }
    }
}

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Kirchhoff,
    Corrected,
    TrackedFromGpe,
}

/// Per-sample conserved-quantity diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Diagnostics {
    pub hamiltonian: f64,
    pub signed_centroid: Vec2,
    pub min_distance: f64,
}

/// Time series of vortex positions with diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Vec2>>,
    pub diagnostics: Vec<Diagnostics>,
    pub degrees: Vec<i8>,
    pub epsilon: f64,
    pub provenance: Provenance,
}

impl Trajectory {
    pub fn config_at(&self, idx: usize) -> VortexConfig {
        VortexConfig {
            positions: self.states[idx].clone(),
            degrees: self.degrees.clone(),
            epsilon: self.epsilon,
        }
    }

    /// Positions at arbitrary time by cubic Hermite interpolation, using the
    /// Kirchhoff velocities at the bracketing samples.
    pub fn positions_at(&self, t: f64) -> Vec<Vec2> {
        let times = &self.times;
        let n = times.len();
        if t <= times[0] {
            return self.states[0].clone();
        }
        if t >= times[n - 1] {
            return self.states[n - 1].clone();
        }
        let i = times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (times[i], times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let nv = self.degrees.len();
        let v0 = kirchhoff_rhs(&self.config_at(i)).unwrap_or_else(|_| vec![Vec2::ZERO; nv]);
        let v1 = kirchhoff_rhs(&self.config_at(i + 1)).unwrap_or_else(|_| vec![Vec2::ZERO; nv]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        self.states[i]
            .iter()
            .zip(&self.states[i + 1])
            .zip(v0.iter().zip(&v1))
            .map(|((&p0, &p1), (&w0, &w1))| p0 * h00 + w0 * (h10 * h) + p1 * h01 + w1 * (h11 * h))
            .collect()
    }

    /// Min pairwise distance over the whole trajectory.
    pub fn min_distance(&self) -> f64 {
        self.diagnostics
            .iter()
            .fold(f64::INFINITY, |m, d| m.min(d.min_distance))
    }

    /// Separation parameter `delta`: a quarter of the minimal pairwise
    /// distance attained along the trajectory.
    pub fn delta(&self) -> f64 {
        0.25 * self.min_distance()
    }
}

/// Kirchhoff velocities of all vortices.
pub fn kirchhoff_rhs(config: &VortexConfig) -> Result<Vec<Vec2>> {
    let n = config.len();
    let mut vel = vec![Vec2::ZERO; n];
    for j in 0..n {
        for k in 0..n {
            if k == j {
                continue;
            }
            let diff = config.positions[j] - config.positions[k];
            let d2 = diff.norm_sq();
            if d2 <= COINCIDENCE_GUARD * COINCIDENCE_GUARD {
                return Err(Error::Collision {
                    dist: d2.sqrt(),
                    guard: COINCIDENCE_GUARD,
                });
            }
            vel[j] += diff.perp() * (2.0 * config.degrees[k] as f64 / d2);
        }
    }
    Ok(vel)
}

/// Accelerations obtained by differentiating the Kirchhoff law along its own
/// flow: `d/dt [u^perp/|u|^2] = udot^perp/|u|^2 - 2 (u . udot) u^perp/|u|^4`.
pub fn kirchhoff_accel(config: &VortexConfig) -> Result<Vec<Vec2>> {
    let vel = kirchhoff_rhs(config)?;
    let n = config.len();
    let mut acc = vec![Vec2::ZERO; n];
    for j in 0..n {
        for k in 0..n {
            if k == j {
                continue;
            }
            let u = config.positions[j] - config.positions[k];
            let du = vel[j] - vel[k];
            let d2 = u.norm_sq();
            let dk = 2.0 * config.degrees[k] as f64;
            acc[j] += (du.perp() / d2 - u.perp() * (2.0 * u.dot(du) / (d2 * d2))) * dk;
        }
    }
    Ok(acc)
}

/// Hamiltonian `K = 2 sum_{j != k} d_j d_k log |xi_j - xi_k|` (ordered pairs).
pub fn hamiltonian(config: &VortexConfig) -> Result<f64> {
    let n = config.len();
    let mut k_sum = 0.0;
    for j in 0..n {
        for k in 0..n {
            if k == j {
                continue;
            }
            let d = (config.positions[j] - config.positions[k]).norm();
            if d <= COINCIDENCE_GUARD {
                return Err(Error::Collision {
                    dist: d,
                    guard: COINCIDENCE_GUARD,
                });
            }
            k_sum += 2.0 * (config.degrees[j] * config.degrees[k]) as f64 * d.ln();
        }
    }
    Ok(k_sum)
}

/// Gradient of K with respect to `xi_j` by central differences.
pub fn hamiltonian_grad_fd(config: &VortexConfig, j: usize, h: f64) -> Result<Vec2> {
    let mut gx = config.clone();
    let mut out = Vec2::ZERO;
    for axis in 0..2 {
        let orig = config.positions[j];
        let delta = if axis == 0 {
            Vec2::new(h, 0.0)
        } else {
            Vec2::new(0.0, h)
        };
        gx.positions[j] = orig + delta;
        let kp = hamiltonian(&gx)?;
        gx.positions[j] = orig - delta;
        let km = hamiltonian(&gx)?;
        gx.positions[j] = orig;
        let d = (kp - km) / (2.0 * h);
        if axis == 0 {
            out.x = d;
        } else {
            out.y = d;
        }
    }
    Ok(out)
}

fn diagnostics(config: &VortexConfig) -> Result<Diagnostics> {
    Ok(Diagnostics {
        hamiltonian: hamiltonian(config)?,
        signed_centroid: config.signed_centroid(),
        min_distance: config.min_pair_distance(),
    })
}

/// Integrate the Kirchhoff system with fixed-step RK4.
///
/// Fails with a collision error as soon as the minimum pairwise distance
/// drops below `4 eps` (the separation scale of the reduced dynamics).
pub fn integrate(config: &VortexConfig, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_forced(config, t_end, dt, None)
}

/// Kirchhoff integration with an optional additive velocity forcing
/// `g(j, t)`; `None` reproduces the plain system exactly (no term is added).
pub fn integrate_forced(
    config: &VortexConfig,
    t_end: f64,
    dt: f64,
    forcing: Option<&dyn Fn(usize, f64) -> Vec2>,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidConfig("need dt > 0 and t_end > 0".into()));
    }
    config.validate()?;
    let guard = 4.0 * config.epsilon;
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let dt = t_end / n_steps as f64;

    let mut positions = config.positions.clone();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut diags = Vec::with_capacity(n_steps + 1);

    times.push(0.0);
    states.push(positions.clone());
    diags.push(diagnostics(config)?);

    let rhs = |t: f64, pos: &[Vec2]| -> Result<Vec<Vec2>> {
        let cfg = config.with_positions(pos.to_vec());
        let mut v = kirchhoff_rhs(&cfg)?;
        if let Some(g) = forcing {
            for (j, vj) in v.iter_mut().enumerate() {
                *vj += g(j, t);
            }
        }
        Ok(v)
    };

    for step in 0..n_steps {
        let t = step as f64 * dt;
        let k1 = rhs(t, &positions)?;
        let p2: Vec<Vec2> = positions
            .iter()
            .zip(&k1)
            .map(|(&p, &v)| p + v * (0.5 * dt))
            .collect();
        let k2 = rhs(t + 0.5 * dt, &p2)?;
        let p3: Vec<Vec2> = positions
            .iter()
            .zip(&k2)
            .map(|(&p, &v)| p + v * (0.5 * dt))
            .collect();
        let k3 = rhs(t + 0.5 * dt, &p3)?;
        let p4: Vec<Vec2> = positions
            .iter()
            .zip(&k3)
            .map(|(&p, &v)| p + v * dt)
            .collect();
        let k4 = rhs(t + dt, &p4)?;
        for j in 0..positions.len() {
            positions[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0);
        }
        let current = config.with_positions(positions.clone());
        let dmin = current.min_pair_distance();
        if dmin < guard {
            return Err(Error::Collision { dist: dmin, guard });
        }
        times.push((step + 1) as f64 * dt);
        states.push(positions.clone());
        diags.push(diagnostics(&current)?);
    }

    Ok(Trajectory {
        times,
        states,
        diagnostics: diags,
        degrees: config.degrees.clone(),
        epsilon: config.epsilon,
        provenance: Provenance::Kirchhoff,
    })
}

/// A translating dipole: degrees (+1, -1) at (0, l/2), (0, -l/2).
pub fn dipole(l: f64, epsilon: f64) -> VortexConfig {
    VortexConfig {
        positions: vec![Vec2::new(0.0, 0.5 * l), Vec2::new(0.0, -0.5 * l)],
        degrees: vec![1, -1],
        epsilon,
    }
}

/// A co-rotating same-sign pair at (-l/2, 0), (l/2, 0).
pub fn same_sign_pair(l: f64, epsilon: f64) -> VortexConfig {
    VortexConfig {
        positions: vec![Vec2::new(-0.5 * l, 0.0), Vec2::new(0.5 * l, 0.0)],
        degrees: vec![1, 1],
        epsilon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_config(seed: u64, n: usize) -> VortexConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let positions: Vec<Vec2> = (0..n)
                .map(|_| Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            let degrees: Vec<i8> = (0..n)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let cfg = VortexConfig {
                positions,
                degrees,
                epsilon: 0.01,
            };
            if cfg.min_pair_distance() > 0.5 {
                return cfg;
            }
        }
    }

    #[test]
    fn dipole_translates_uniformly() {
        let l = 0.8;
        let cfg = dipole(l, 0.01);
        let v = kirchhoff_rhs(&cfg).unwrap();
        for vj in v {
            assert!((vj.x - 2.0 / l).abs() < 1e-14);
            assert!(vj.y.abs() < 1e-14);
        }
        // Uniform translation means zero acceleration.
        let acc = kirchhoff_accel(&cfg).unwrap();
        for a in acc {
            assert!(a.norm() < 1e-13);
        }
    }

    #[test]
    fn same_sign_pair_rotates_rigidly() {
        let l = 2.0;
        let cfg = same_sign_pair(l, 0.01);
        let v = kirchhoff_rhs(&cfg).unwrap();
        // omega = 4 / l^2; speed omega * l/2.
        let omega = 4.0 / (l * l);
        assert!((v[1].y - omega * 0.5 * l).abs() < 1e-14);
        assert!((v[0].y + omega * 0.5 * l).abs() < 1e-14);
        assert!(v[0].x.abs() < 1e-14 && v[1].x.abs() < 1e-14);
    }

    #[test]
    fn rhs_matches_brute_force_reevaluation() {
        let cfg = random_config(7, 4);
        let v = kirchhoff_rhs(&cfg).unwrap();
        // Independent double-loop evaluation, different accumulation order.
        for j in 0..4 {
            let mut expect = Vec2::ZERO;
            for k in (0..4).rev() {
                if k == j {
                    continue;
                }
                let dx = cfg.positions[j].x - cfg.positions[k].x;
                let dy = cfg.positions[j].y - cfg.positions[k].y;
                let d2 = dx * dx + dy * dy;
                expect.x += 2.0 * cfg.degrees[k] as f64 * (-dy) / d2;
                expect.y += 2.0 * cfg.degrees[k] as f64 * dx / d2;
            }
            assert!((v[j] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn kirchhoff_accel_matches_finite_differences() {
        let cfg = random_config(13, 4);
        let acc = kirchhoff_accel(&cfg).unwrap();
        let h = 1e-6;
        let fwd = integrate(&cfg, h, h).unwrap();
        let cfg_f = fwd.config_at(1);
        let v0 = kirchhoff_rhs(&cfg).unwrap();
        let v1 = kirchhoff_rhs(&cfg_f).unwrap();
        for j in 0..cfg.len() {
            let fd = (v1[j] - v0[j]) / h;
            assert!(
                (fd - acc[j]).norm() < 1e-4 * (1.0 + acc[j].norm()),
                "vortex {j}: fd {fd:?} vs analytic {:?}",
                acc[j]
            );
        }
    }

    #[test]
    fn hamiltonian_special_values() {
        // Two vortices at distance 1: K = 0 for any degrees.
        let mut cfg = dipole(1.0, 0.01);
        assert!(hamiltonian(&cfg).unwrap().abs() < 1e-14);
        // Dipole at distance l: two ordered pairs, K = -4 log l.
        let l = 2.5;
        cfg = dipole(l, 0.01);
        assert!((hamiltonian(&cfg).unwrap() + 4.0 * l.ln()).abs() < 1e-13);
    }

    #[test]
    fn gradient_identity_against_rhs() {
        // With the ordered-pair K, the exact identity is
        // xi_j' = 0.5 d_j (grad_{xi_j} K)^perp.
        for seed in [1u64, 2, 3] {
            let cfg = random_config(seed, 4);
            let v = kirchhoff_rhs(&cfg).unwrap();
            for j in 0..cfg.len() {
                let grad = hamiltonian_grad_fd(&cfg, j, 1e-6).unwrap();
                let from_k = grad.perp() * (0.5 * cfg.degrees[j] as f64);
                assert!(
                    (v[j] - from_k).norm() < 1e-6,
                    "seed {seed} vortex {j}: {v:?} vs {from_k:?}"
                );
            }
        }
    }

    #[test]
    fn dipole_translation_integrated() {
        let cfg = dipole(1.0, 0.01);
        let traj = integrate(&cfg, 1.0, 1e-3).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - (cfg.positions[0] + Vec2::new(2.0, 0.0))).norm() < 1e-8);
        assert!((last[1] - (cfg.positions[1] + Vec2::new(2.0, 0.0))).norm() < 1e-8);
    }

    #[test]
    fn same_sign_pair_period() {
        // Period pi l^2 / 2 = 2 pi for l = 2.
        let cfg = same_sign_pair(2.0, 0.01);
        let period = std::f64::consts::PI * 2.0;
        let traj = integrate(&cfg, period, 1e-3).unwrap();
        let last = traj.states.last().unwrap();
        for j in 0..2 {
            assert!(
                (last[j] - cfg.positions[j]).norm() < 1e-6,
                "vortex {j} displaced {:?}",
                last[j] - cfg.positions[j]
            );
        }
    }

    #[test]
    fn conserved_quantities_drift() {
        let cfg = random_config(11, 4);
        let traj = integrate(&cfg, 2.0, 1e-3).unwrap();
        let k0 = traj.diagnostics[0].hamiltonian;
        let c0 = traj.diagnostics[0].signed_centroid;
        for d in &traj.diagnostics {
            assert!((d.hamiltonian - k0).abs() < 1e-8 * k0.abs().max(1.0));
            assert!((d.signed_centroid - c0).norm() < 1e-10);
        }
    }

    #[test]
    fn rk4_order_from_dt_halving() {
        let cfg = random_config(3, 3);
        let t_end = 0.5;
        let run = |dt: f64| {
            integrate(&cfg, t_end, dt)
                .unwrap()
                .states
                .last()
                .unwrap()
                .clone()
        };
        let fine = run(1e-4);
        let err = |states: &Vec<Vec2>| -> f64 {
            states
                .iter()
                .zip(&fine)
                .map(|(a, b)| (*a - *b).norm())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(&run(4e-3));
        let e2 = err(&run(2e-3));
        let order = (e1 / e2).log2();
        assert!(
            (3.5..4.6).contains(&order),
            "measured RK4 order {order} (e1={e1:.3e}, e2={e2:.3e})"
        );
    }

    #[test]
    fn collision_guard_fires() {
        // Start closer than the 4 eps guard: the first step must abort.
        let cfg = dipole(0.5, 0.2);
        let err = integrate(&cfg, 1.0, 1e-3);
        assert!(matches!(err, Err(Error::Collision { .. })));
    }

    #[test]
    fn trajectory_interpolation_consistent() {
        let cfg = random_config(5, 3);
        let traj = integrate(&cfg, 1.0, 1e-2).unwrap();
        let dense = integrate(&cfg, 1.0, 1e-4).unwrap();
        let probe = 0.4567;
        let interp = traj.positions_at(probe);
        let idx = (probe / 1e-4).round() as usize;
        for j in 0..3 {
            assert!((interp[j] - dense.states[idx][j]).norm() < 1e-6);
        }
    }
}
