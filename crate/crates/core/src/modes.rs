//! Mode-by-mode inversion of the linearized operator around the degree-one
//! vortex.
//!
//! Writing perturbations as `phi = i W psi` and expanding `psi` in angular
//! Fourier modes reduces the linearized problem to radial ODE systems
//!
//! ```text
//! Psi'' + (2 w'/w + 1/r) Psi' - (1/r^2) [[k^2, 2k], [2k, k^2 + 2 w^2 r^2]] Psi = h
//! ```
//!
//! for `k >= 1` (two parity classes), and decoupled scalar equations at
//! `k = 0`. Homogeneous bases are built numerically from seeded integration:
//! exponentially growing directions forward, the decaying one backward, and
//! the polynomial ones with a per-step projection that strips exponential
//! contamination using the conserved bilinear pairing
//! `B(u, v) = w^2 r (u . v' - v . u')`. Inhomogeneous solves use variation
//! of parameters with integration limits anchored so the solution stays
//! bounded at the origin and grows as slowly as possible at infinity.

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;
use crate::profile::RadialProfile;
use crate::vortex::VortexConfig;
use num_complex::Complex64;

/// A scalar radial function tabulated with derivatives (cubic Hermite eval).
#[derive(Debug, Clone)]
pub struct RadialFn {
    pub rs: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

impl RadialFn {
    pub fn zero(rs: Vec<f64>) -> Self {
        let n = rs.len();
        RadialFn {
            rs,
            v: vec![0.0; n],
            dv: vec![0.0; n],
        }
    }

    fn cell_of(&self, r: f64) -> usize {
        let n = self.rs.len();
        if r <= self.rs[0] {
            return 0;
        }
        if r >= self.rs[n - 1] {
            return n - 2;
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.rs[mid] <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_with_deriv(r).0
    }

    pub fn eval_deriv(&self, r: f64) -> f64 {
        self.eval_with_deriv(r).1
    }

    pub fn eval_with_deriv(&self, r: f64) -> (f64, f64) {
        let i = self.cell_of(r);
        let (r0, r1) = (self.rs[i], self.rs[i + 1]);
        let h = r1 - r0;
        let t = ((r - r0) / h).clamp(0.0, 1.0);
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let (m0, m1) = (self.dv[i] * h, self.dv[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let val = h00 * v0 + h10 * m0 + h01 * v1 + h11 * m1;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * t2 - 2.0 * t;
        let der = (d00 * v0 + d10 * m0 + d01 * v1 + d11 * m1) / h;
        (val, der)
    }

    pub fn sup(&self) -> f64 {
        self.v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

/// A two-component radial function (one Fourier mode of a perturbation).
///
/// Basis elements additionally carry their exact values at the quadrature
/// points of the node mesh (`qa`, `qb`), recorded during integration so the
/// coefficient integrals never interpolate a singular function.
#[derive(Debug, Clone)]
pub struct VecFn {
    pub rs: Vec<f64>,
    pub a: RadialFn,
    pub b: RadialFn,
    qa: Vec<f64>,
    qb: Vec<f64>,
}

impl VecFn {
    fn from_states(rs: &[f64], states: &[[f64; 4]], qstates: &[[f64; 2]]) -> Self {
        VecFn {
            rs: rs.to_vec(),
            a: RadialFn {
                rs: rs.to_vec(),
                v: states.iter().map(|s| s[0]).collect(),
                dv: states.iter().map(|s| s[2]).collect(),
            },
            b: RadialFn {
                rs: rs.to_vec(),
                v: states.iter().map(|s| s[1]).collect(),
                dv: states.iter().map(|s| s[3]).collect(),
            },
            qa: qstates.iter().map(|s| s[0]).collect(),
            qb: qstates.iter().map(|s| s[1]).collect(),
        }
    }

    pub fn eval(&self, r: f64) -> (f64, f64) {
        (self.a.eval(r), self.b.eval(r))
    }

    fn state_at(&self, i: usize) -> [f64; 4] {
        [self.a.v[i], self.b.v[i], self.a.dv[i], self.b.dv[i]]
    }
}

/// Parity class of a coupled mode (which trigonometric pattern it multiplies).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Nu1,
    Nu2,
}

/// One Fourier mode of a perturbation: the radial pair (Psi1, Psi2).
#[derive(Debug, Clone)]
pub struct ModeFunction {
    pub k: usize,
    pub parity: Option<Parity>,
    pub psi1: RadialFn,
    pub psi2: RadialFn,
}

/// Homogeneous basis of the coupled system for one k >= 1.
///
/// `sigma` is +1 for the operator around the degree +1 vortex and -1 for the
/// conjugate-flipped variant (off-diagonal coupling negated).
#[derive(Debug)]
pub struct CoupledBasis {
    pub k: usize,
    pub sigma: f64,
    /// z1 ~ r^-k at both ends, z2 ~ r^(k-2) -> r^k, z3 ~ r^k -> exp growth,
    /// z4 ~ r^(-2-k) -> exp decay.
    pub z: [VecFn; 4],
    /// Constant pairing matrix B(z_a, z_b) after normalization.
    pub pairings: [[f64; 4]; 4],
}

/// Homogeneous pair for the k = 0 imaginary-part equation.
#[derive(Debug)]
pub struct Mode0Basis {
    /// Bounded at the origin, grows like exp(+sqrt(2) r).
    pub z1: RadialFn,
    /// ~ r^-2 at the origin, decays like r^(-1/2) exp(-sqrt(2) r).
    pub z2: RadialFn,
    /// w^2 r (z1 z2' - z2 z1') after normalization (target +1, the sign the
    /// scalar representation formula inverts with).
    pub wronskian: f64,
    /// Values at the quadrature points of the node mesh.
    z1_q: Vec<f64>,
    z2_q: Vec<f64>,
}

/// Either flavour, as returned by [`homogeneous_basis`].
#[derive(Debug)]
pub enum HomogeneousBasis {
    Mode0(Mode0Basis),
    Coupled(CoupledBasis),
}

const R_START: f64 = 0.01;

/// Radial node set for mode functions: profile grid without the origin,
/// capped at 40 (exponential tails are numerically dead well before).
fn mode_nodes(profile: &RadialProfile) -> Vec<f64> {
    profile
        .grid
        .nodes
        .iter()
        .copied()
        .filter(|&r| r >= R_START * 0.999 && r <= 40.0 + 1e-9)
        .collect()
}

/// Gauss-6 quadrature points and weights for every node cell.
struct QuadMesh {
    nodes: Vec<f64>,
    /// 6 points per cell, cell-major.
    qx: Vec<f64>,
    qw: Vec<f64>,
}

fn quad_mesh(nodes: &[f64]) -> QuadMesh {
    let (gx, gw) = gauss_legendre(6);
    let mut qx = Vec::with_capacity(6 * (nodes.len() - 1));
    let mut qw = Vec::with_capacity(qx.capacity());
    for c in 0..nodes.len() - 1 {
        let mid = 0.5 * (nodes[c] + nodes[c + 1]);
        let half = 0.5 * (nodes[c + 1] - nodes[c]);
        for (x, w) in gx.iter().zip(&gw) {
            qx.push(mid + half * x);
            qw.push(w * half);
        }
    }
    QuadMesh {
        nodes: nodes.to_vec(),
        qx,
        qw,
    }
}

impl QuadMesh {
    fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Per-cell integrals of a function tabulated at the Gauss points.
    fn cell_integrals(&self, fq: &[f64]) -> Vec<f64> {
        (0..self.n_cells())
            .map(|c| {
                (0..6)
                    .map(|g| self.qw[6 * c + g] * fq[6 * c + g])
                    .sum()
            })
            .collect()
    }
}

/// Prefix sums at nodes: out[i] = sum of cells before node i.
fn prefix_sums(cells: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cells.len() + 1];
    for (i, &c) in cells.iter().enumerate() {
        out[i + 1] = out[i] + c;
    }
    out
}

/// Suffix sums at nodes: out[i] = sum of cells at or after node i (plus tail).
fn suffix_sums(cells: &[f64], tail: f64) -> Vec<f64> {
    let mut out = vec![tail; cells.len() + 1];
    for i in (0..cells.len()).rev() {
        out[i] = out[i + 1] + cells[i];
    }
    out
}

/// RHS of the coupled first-order system, state [p1, p2, p1', p2'].
fn coupled_rhs(profile: &RadialProfile, k: f64, sigma: f64, r: f64, s: &[f64]) -> Vec<f64> {
    let w = profile.eval_w(r, 0);
    let dw = profile.eval_w(r, 1);
    let pcoef = 2.0 * dw / w + 1.0 / r;
    let m11 = k * k;
    let m12 = sigma * 2.0 * k;
    let m22 = k * k + 2.0 * w * w * r * r;
    let inv_r2 = 1.0 / (r * r);
    vec![
        s[2],
        s[3],
        -pcoef * s[2] + inv_r2 * (m11 * s[0] + m12 * s[1]),
        -pcoef * s[3] + inv_r2 * (m12 * s[0] + m22 * s[1]),
    ]
}

/// RHS of the k = 0 imaginary-part equation, state [p, p'].
fn mode0_imag_rhs(profile: &RadialProfile, r: f64, s: &[f64]) -> Vec<f64> {
    let w = profile.eval_w(r, 0);
    let dw = profile.eval_w(r, 1);
    vec![s[1], -(2.0 * dw / w + 1.0 / r) * s[1] + 2.0 * w * w * s[0]]
}

/// Bilinear pairing B(u, v) = w^2 r (u . v' - v . u') at a state pair.
fn pairing(profile: &RadialProfile, r: f64, u: &[f64; 4], v: &[f64; 4]) -> f64 {
    let w = profile.eval_w(r, 0);
    w * w * r * (u[0] * v[2] + u[1] * v[3] - v[0] * u[2] - v[1] * u[3])
}

/// Integrate the coupled system between consecutive nodes, storing full
/// states at nodes and (value) states at the quadrature points.
fn integrate_nodes(
    profile: &RadialProfile,
    k: f64,
    sigma: f64,
    mesh: &QuadMesh,
    seed: [f64; 4],
    forward: bool,
    // Projection target: subtract proj_dir scaled so pairing with probe -> 0.
    mut project: Option<(&VecFn, &VecFn)>, // (probe, direction)
) -> (Vec<[f64; 4]>, Vec<[f64; 2]>) {
    let nodes = &mesh.nodes;
    let n = nodes.len();
    let mut states = vec![[0.0; 4]; n];
    let mut qstates = vec![[0.0; 2]; mesh.qx.len()];
    let rhs = |r: f64, s: &[f64]| coupled_rhs(profile, k, sigma, r, s);
    let cells: Vec<usize> = (0..n - 1).collect();
    let order: Vec<usize> = if forward {
        cells
    } else {
        cells.into_iter().rev().collect()
    };
    let mut y = seed.to_vec();
    if forward {
        states[0] = seed;
    } else {
        states[n - 1] = seed;
    }
    let mut since_projection = 0.0;
    for &c in &order {
        // Stops inside the cell: the 6 Gauss points in sweep order.
        let (start, end, gs): (f64, f64, Vec<usize>) = if forward {
            (nodes[c], nodes[c + 1], (0..6).collect())
        } else {
            (nodes[c + 1], nodes[c], (0..6).rev().collect())
        };
        let mut from = start;
        for g in gs {
            let to = mesh.qx[6 * c + g];
            y = crate::numerics::dopri5(&rhs, from, to, &y, 1e-11, 1e-14, &mut |_, _| {});
            qstates[6 * c + g] = [y[0], y[1]];
            from = to;
        }
        y = crate::numerics::dopri5(&rhs, from, end, &y, 1e-11, 1e-14, &mut |_, _| {});
        let i = if forward { c + 1 } else { c };
        since_projection += (end - start).abs();
        if let Some((probe, dir)) = project.as_mut() {
            if since_projection > 0.5 {
                let cur: [f64; 4] = [y[0], y[1], y[2], y[3]];
                let pst = probe.state_at(i);
                let d = dir.state_at(i);
                let denom = pairing(profile, nodes[i], &d, &pst);
                if denom.abs() > 0.0 {
                    let coef = pairing(profile, nodes[i], &cur, &pst) / denom;
                    for comp in 0..4 {
                        y[comp] -= coef * d[comp];
                    }
                    // The projection also shifts the already-recorded Gauss
                    // values of this cell; the correction there is the same
                    // combination evaluated at those points.
                    for g in 0..6 {
                        qstates[6 * c + g][0] -= coef * dir.qa[6 * c + g];
                        qstates[6 * c + g][1] -= coef * dir.qb[6 * c + g];
                    }
                }
                since_projection = 0.0;
            }
        }
        states[i] = [y[0], y[1], y[2], y[3]];
    }
    (states, qstates)
}

/// Polynomial far-field seed (two-term) for the branch r^s with s = +-k:
/// Psi1 = r^s (1 + alpha/r^2), Psi2 = -k r^(s-2) (1 + gamma/r^2).
fn poly_seed_far(k: f64, s: f64, r: f64) -> [f64; 4] {
    let alpha = -2.0 * (s + k * k) / ((s - 2.0) * (s - 2.0) - k * k);
    let beta = -k;
    let gamma = if beta != 0.0 {
        (beta * ((s - 2.0) * (s - 2.0) - k * k + 2.0) - 2.0 * k * alpha) / (2.0 * beta)
    } else {
        0.0
    };
    let p1 = r.powf(s) * (1.0 + alpha / (r * r));
    let dp1 = s * r.powf(s - 1.0) + (s - 2.0) * alpha * r.powf(s - 3.0);
    let p2 = beta * r.powf(s - 2.0) * (1.0 + gamma / (r * r));
    let dp2 = beta * ((s - 2.0) * r.powf(s - 3.0) + (s - 4.0) * gamma * r.powf(s - 5.0));
    [p1, p2, dp1, dp2]
}

/// Decaying exponential seed at large r (two-term):
/// Psi2 = e^(-sqrt2 r) r^(-1/2) (1 + b1/r), Psi1 = k e^(-sqrt2 r) r^(-5/2).
fn exp_decay_seed(k: f64, r: f64) -> [f64; 4] {
    let s2 = std::f64::consts::SQRT_2;
    let b1 = (12.0 * k * k - 9.0) / (8.0 * s2);
    let e = (-s2 * r).exp();
    let p2 = e * r.powf(-0.5) * (1.0 + b1 / r);
    let dp2 = e * (-s2 * r.powf(-0.5) * (1.0 + b1 / r)
        + (-0.5 * r.powf(-1.5) - 1.5 * b1 * r.powf(-2.5)));
    let p1 = k * e * r.powf(-2.5);
    let dp1 = k * e * (-s2 * r.powf(-2.5) - 2.5 * r.powf(-3.5));
    [p1, p2, dp1, dp2]
}

/// Frobenius seed at small r for the branch r^s with eigenvector (1, q).
fn frobenius_seed(s: f64, q: f64, r: f64) -> [f64; 4] {
    [
        r.powf(s),
        q * r.powf(s),
        s * r.powf(s - 1.0),
        q * s * r.powf(s - 1.0),
    ]
}

/// Build the homogeneous basis for mode `k` of the sigma-variant operator.
pub fn coupled_basis(profile: &RadialProfile, k: usize, sigma: f64) -> Result<CoupledBasis> {
    if k == 0 {
        return Err(Error::InvalidConfig("use mode0_basis for k = 0".into()));
    }
    let nodes = mode_nodes(profile);
    let mesh = quad_mesh(&nodes);
    let r0 = nodes[0];
    let r_max = *nodes.last().unwrap();
    let kf = k as f64;
    // Small-r eigenvectors: (1, sigma) for exponents {k, -k-2},
    // (1, -sigma) for exponents {k-2, -k}.
    let (z3_states, z3_q) = integrate_nodes(
        profile,
        kf,
        sigma,
        &mesh,
        frobenius_seed(kf, sigma, r0),
        true,
        None,
    );
    let z3 = VecFn::from_states(&nodes, &z3_states, &z3_q);
    let (z4_states, z4_q) = integrate_nodes(
        profile,
        kf,
        sigma,
        &mesh,
        {
            let mut s = exp_decay_seed(kf, r_max);
            if sigma < 0.0 {
                s[0] = -s[0];
                s[2] = -s[2];
            }
            s
        },
        false,
        None,
    );
    let z4 = VecFn::from_states(&nodes, &z4_states, &z4_q);

    // z1 ~ r^-k at both ends: backward from the polynomial far seed,
    // projecting out the backward-growing decaying-exponential direction
    // (pairing against z3 isolates the z4 content).
    let z1 = if k == 1 {
        // Explicit kernel element: (1/r, -w'/w) (sign of the second
        // component follows the operator variant).
        let kernel = |r: f64| -> [f64; 4] {
            let w = profile.eval_w(r, 0);
            let dw = profile.eval_w(r, 1);
            let d2w = profile.eval_w(r, 2);
            let f = -dw / w;
            let df = -(d2w * w - dw * dw) / (w * w);
            [1.0 / r, sigma * f, -1.0 / (r * r), sigma * df]
        };
        let states: Vec<[f64; 4]> = nodes.iter().map(|&r| kernel(r)).collect();
        let qstates: Vec<[f64; 2]> = mesh
            .qx
            .iter()
            .map(|&r| {
                let st = kernel(r);
                [st[0], st[1]]
            })
            .collect();
        VecFn::from_states(&nodes, &states, &qstates)
    } else {
        let (states, qstates) = integrate_nodes(
            profile,
            kf,
            sigma,
            &mesh,
            {
                let mut s = poly_seed_far(kf, -kf, r_max);
                if sigma < 0.0 {
                    s[1] = -s[1];
                    s[3] = -s[3];
                }
                s
            },
            false,
            Some((&z3, &z4)),
        );
        VecFn::from_states(&nodes, &states, &qstates)
    };

    // z2 ~ r^(k-2) at 0, r^k at infinity. For k >= 2 the forward direction
    // keeps every contamination subdominant (exponentials are projected
    // away); k = 1 goes backward from the polynomial seed, with a harmless
    // z1 admixture left undetermined.
    let (z2_states, z2_q) = if k >= 2 {
        integrate_nodes(
            profile,
            kf,
            sigma,
            &mesh,
            frobenius_seed(kf - 2.0, -sigma, r0),
            true,
            Some((&z4, &z3)),
        )
    } else {
        integrate_nodes(
            profile,
            kf,
            sigma,
            &mesh,
            {
                let mut s = poly_seed_far(kf, kf, r_max);
                if sigma < 0.0 {
                    s[1] = -s[1];
                    s[3] = -s[3];
                }
                s
            },
            false,
            Some((&z3, &z4)),
        )
    };
    let mut z2 = VecFn::from_states(&nodes, &z2_states, &z2_q);

    // Canonical normalization: B(z1, z2) = -1 and B(z3, z4) = -1.
    let mid = nodes.len() / 2;
    let r_mid = nodes[mid];
    let b12 = pairing(profile, r_mid, &z1.state_at(mid), &z2.state_at(mid));
    let b34 = pairing(profile, r_mid, &z3.state_at(mid), &z4.state_at(mid));
    if b12.abs() < 1e-300 || b34.abs() < 1e-300 {
        return Err(Error::BasisConstruction {
            k,
            reason: "degenerate pairing".into(),
        });
    }
    let scale_fn = |f: &mut VecFn, s: f64| {
        for v in f
            .a
            .v
            .iter_mut()
            .chain(f.a.dv.iter_mut())
            .chain(f.qa.iter_mut())
        {
            *v *= s;
        }
        for v in f
            .b
            .v
            .iter_mut()
            .chain(f.b.dv.iter_mut())
            .chain(f.qb.iter_mut())
        {
            *v *= s;
        }
    };
    scale_fn(&mut z2, -1.0 / b12);
    let mut z4 = z4;
    scale_fn(&mut z4, -1.0 / b34);

    let z = [z1, z2, z3, z4];
    // Constancy of the pairings doubles as a contamination check.
    let probes = [nodes.len() / 4, nodes.len() / 2, 3 * nodes.len() / 4];
    let mut pairings = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            pairings[a][b] = pairing(
                profile,
                nodes[probes[1]],
                &z[a].state_at(probes[1]),
                &z[b].state_at(probes[1]),
            );
        }
    }
    for &(a, b, target) in &[(0usize, 1usize, -1.0), (2, 3, -1.0)] {
        for &pr in &probes {
            let v = pairing(profile, nodes[pr], &z[a].state_at(pr), &z[b].state_at(pr));
            if (v - target).abs() > 1e-5 {
                return Err(Error::BasisConstruction {
                    k,
                    reason: format!(
                        "pairing B(z{},z{}) drifted to {v:.6} at r={:.2} (contamination)",
                        a + 1,
                        b + 1,
                        nodes[pr]
                    ),
                });
            }
        }
    }
    Ok(CoupledBasis {
        k,
        sigma,
        z,
        pairings,
    })
}

/// Build the k = 0 imaginary-part basis (z_{1,0} grows, z_{2,0} decays).
pub fn mode0_basis(profile: &RadialProfile) -> Result<Mode0Basis> {
    let nodes = mode_nodes(profile);
    let mesh = quad_mesh(&nodes);
    let r0 = nodes[0];
    let r_max = *nodes.last().unwrap();
    let a = profile.shooting_slope;
    let rhs = |r: f64, s: &[f64]| mode0_imag_rhs(profile, r, s);

    // Scalar sweep helper recording node states and Gauss values.
    let sweep = |seed: [f64; 2], forward: bool| -> (Vec<[f64; 2]>, Vec<f64>) {
        let n = nodes.len();
        let mut states = vec![[0.0f64; 2]; n];
        let mut qv = vec![0.0f64; mesh.qx.len()];
        let mut y = vec![seed[0], seed[1]];
        let cells: Vec<usize> = if forward {
            (0..n - 1).collect()
        } else {
            (0..n - 1).rev().collect()
        };
        if forward {
            states[0] = seed;
        } else {
            states[n - 1] = seed;
        }
        for &c in &cells {
            let (start, end, gs): (f64, f64, Vec<usize>) = if forward {
                (nodes[c], nodes[c + 1], (0..6).collect())
            } else {
                (nodes[c + 1], nodes[c], (0..6).rev().collect())
            };
            let mut from = start;
            for g in gs {
                let to = mesh.qx[6 * c + g];
                y = crate::numerics::dopri5(&rhs, from, to, &y, 1e-11, 1e-14, &mut |_, _| {});
                qv[6 * c + g] = y[0];
                from = to;
            }
            y = crate::numerics::dopri5(&rhs, from, end, &y, 1e-11, 1e-14, &mut |_, _| {});
            states[if forward { c + 1 } else { c }] = [y[0], y[1]];
        }
        (states, qv)
    };

    // z1: bounded at the origin, 1 + a^2 r^4 / 12 + ...
    let (states1, q1) = sweep(
        [1.0 + a * a * r0.powi(4) / 12.0, a * a * r0.powi(3) / 3.0],
        true,
    );

    // z2: backward from the decaying seed.
    let s2 = std::f64::consts::SQRT_2;
    let b1 = -9.0 / (8.0 * s2);
    let e = (-s2 * r_max).exp();
    let (states2, q2) = sweep(
        [
            e * r_max.powf(-0.5) * (1.0 + b1 / r_max),
            e * (-s2 * r_max.powf(-0.5) * (1.0 + b1 / r_max) - 0.5 * r_max.powf(-1.5)
                - 1.5 * b1 * r_max.powf(-2.5)),
        ],
        false,
    );

    let mk = |st: &Vec<[f64; 2]>| RadialFn {
        rs: nodes.clone(),
        v: st.iter().map(|s| s[0]).collect(),
        dv: st.iter().map(|s| s[1]).collect(),
    };
    let z1 = mk(&states1);
    let mut z2 = mk(&states2);
    let mut z2_q = q2;

    let mid = nodes.len() / 2;
    let r_mid = nodes[mid];
    let w = profile.eval_w(r_mid, 0);
    let wr = w * w * r_mid * (z1.v[mid] * z2.dv[mid] - z2.v[mid] * z1.dv[mid]);
    if wr.abs() < 1e-300 {
        return Err(Error::BasisConstruction {
            k: 0,
            reason: "degenerate Wronskian".into(),
        });
    }
    let s = 1.0 / wr;
    for v in z2.v.iter_mut().chain(z2.dv.iter_mut()).chain(z2_q.iter_mut()) {
        *v *= s;
    }
    Ok(Mode0Basis {
        z1,
        z2,
        wronskian: 1.0,
        z1_q: q1,
        z2_q,
    })
}

/// Dispatch on k.
pub fn homogeneous_basis(profile: &RadialProfile, k: usize) -> Result<HomogeneousBasis> {
    if k == 0 {
        Ok(HomogeneousBasis::Mode0(mode0_basis(profile)?))
    } else {
        Ok(HomogeneousBasis::Coupled(coupled_basis(profile, k, 1.0)?))
    }
}

/// Cumulative integral of `f` over the node cells by 6-point Gauss rules;
/// `cum[i]` approximates the integral from nodes[0] to nodes[i].
fn cumulative_integral(nodes: &[f64], f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let (gx, gw) = gauss_legendre(6);
    let mut cum = vec![0.0; nodes.len()];
    for i in 0..nodes.len() - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            s += w * f(mid + half * x);
        }
        cum[i + 1] = cum[i] + s * half;
    }
    cum
}

/// Estimate the tail of the integral beyond the cut radius from a power-law
/// fit of the integrand at the last quadrature points; errors if it grows.
fn tail_estimate(mesh: &QuadMesh, g: &[f64]) -> Result<f64> {
    let m = g.len();
    let r1 = mesh.qx[m - 24];
    let r2 = mesh.qx[m - 1];
    let f1 = g[m - 24].abs();
    let f2 = g[m - 1].abs();
    if f2 < 1e-300 {
        return Ok(0.0);
    }
    let p = (f1 / f2).ln() / (r2 / r1).ln();
    if p <= 1.0 + 1e-6 {
        return Err(Error::DivergentIntegral(format!(
            "integrand decays like r^-{p:.2} at the cut radius"
        )));
    }
    // Signed tail following the sign of the last samples.
    Ok(g[m - 1].signum() * f2 * r2 / (p - 1.0))
}

/// Integration anchors/// Integration anchors for the variation-of-parameters coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Anchor {
    Origin,
    Infinity,
}

/// Solve the k = 0 real-part equation with both antiderivatives anchored at
/// the origin (bounded solution):
/// `Psi1(r) = int_0^r ds/(w^2 s) int_0^s w^2 t h1(t) dt`.
pub fn solve_mode0_real(
    profile: &RadialProfile,
    h1: &dyn Fn(f64) -> f64,
) -> Result<RadialFn> {
    let nodes = mode_nodes(profile);
    let inner = cumulative_integral(&nodes, &|t| {
        let w = profile.eval_w(t, 0);
        w * w * t * h1(t)
    });
    // Near-origin contribution from (0, r0]: w^2 t h ~ a^2 t^3 h(0).
    let a = profile.shooting_slope;
    let inner0 = a * a * nodes[0].powi(4) * h1(nodes[0]) / 4.0;
    let inner_fn = RadialFn {
        rs: nodes.clone(),
        v: inner.iter().map(|c| c + inner0).collect(),
        dv: nodes
            .iter()
            .map(|&t| {
                let w = profile.eval_w(t, 0);
                w * w * t * h1(t)
            })
            .collect(),
    };
    let integrand = |s: f64| -> f64 {
        let w = profile.eval_w(s, 0);
        inner_fn.eval(s) / (w * w * s)
    };
    let outer = cumulative_integral(&nodes, &integrand);
    let outer0 = {
        // inner ~ a^2 s^4 h(0)/4, so inner/(w^2 s) ~ s h(0)/4 near zero.
        h1(0.0) * nodes[0] * nodes[0] / 8.0
    };
    Ok(RadialFn {
        rs: nodes.clone(),
        v: outer.iter().map(|c| c + outer0).collect(),
        dv: nodes.iter().map(|&s| integrand(s)).collect(),
    })
}

/// Solve the k = 0 imaginary-part equation with the bounded/decaying limit
/// convention:
/// `Psi2(r) = z1(r) int_r^inf w^2 s h2 z2 ds + z2(r) int_0^r w^2 s h2 z1 ds`.
pub fn solve_mode0_imag(
    profile: &RadialProfile,
    basis: &Mode0Basis,
    h2: &dyn Fn(f64) -> f64,
) -> Result<RadialFn> {
    let nodes = basis.z1.rs.clone();
    let mesh = quad_mesh(&nodes);
    let wq: Vec<f64> = mesh
        .qx
        .iter()
        .map(|&s| {
            let w = profile.eval_w(s, 0);
            w * w * s * h2(s)
        })
        .collect();
    let g2: Vec<f64> = wq
        .iter()
        .zip(&basis.z2_q)
        .map(|(&a, &z)| a * z)
        .collect();
    let g1: Vec<f64> = wq
        .iter()
        .zip(&basis.z1_q)
        .map(|(&a, &z)| a * z)
        .collect();
    // Outward integral by suffix sums (the integrand is exponentially dead
    // at the cut radius); inward by prefix sums.
    let i_out = suffix_sums(&mesh.cell_integrals(&g2), 0.0);
    let i_in = prefix_sums(&mesh.cell_integrals(&g1));
    let n = nodes.len();
    let mut v = vec![0.0; n];
    let mut dv = vec![0.0; n];
    for i in 0..n {
        let (z1v, z1d) = (basis.z1.v[i], basis.z1.dv[i]);
        let (z2v, z2d) = (basis.z2.v[i], basis.z2.dv[i]);
        v[i] = z1v * i_out[i] + z2v * i_in[i];
        // The Wronskian terms cancel: Psi' = z1' I_out + z2' I_in.
        dv[i] = z1d * i_out[i] + z2d * i_in[i];
    }
    Ok(RadialFn { rs: nodes, v, dv })
}

/// Variation-of-parameters solve of the coupled system for one mode.
///
/// Limits follow the bounded-at-origin convention: coefficients multiplying
/// functions singular at 0 are anchored there, the ones multiplying growing
/// functions are anchored at infinity; for k = 1 the slow-decay weight makes
/// the z2 coefficient integrate from the origin instead.
pub fn solve_mode_k(
    profile: &RadialProfile,
    basis: &CoupledBasis,
    h: &dyn Fn(f64) -> (f64, f64),
) -> Result<ModeFunction> {
    let nodes = basis.z[0].rs.clone();
    let mesh = quad_mesh(&nodes);
    // w^2 s (h . z_a) at the quadrature points, per basis element.
    let hq: Vec<(f64, f64)> = mesh.qx.iter().map(|&s| h(s)).collect();
    let wq: Vec<f64> = mesh
        .qx
        .iter()
        .map(|&s| {
            let w = profile.eval_w(s, 0);
            w * w * s
        })
        .collect();
    let dots: Vec<Vec<f64>> = (0..4)
        .map(|a| {
            let z = &basis.z[a];
            (0..mesh.qx.len())
                .map(|q| wq[q] * (hq[q].0 * z.qa[q] + hq[q].1 * z.qb[q]))
                .collect()
        })
        .collect();

    let anchors = [
        Anchor::Origin,
        if basis.k == 1 {
            Anchor::Origin
        } else {
            Anchor::Infinity
        },
        Anchor::Infinity,
        Anchor::Origin,
    ];
    // c_a pairs with the symplectic dual and carries the representation
    // formula sign: c1 ~ +(h.z2), c2 ~ -(h.z1), c3 ~ +(h.z4), c4 ~ -(h.z3).
    let pair_of = [1usize, 0, 3, 2];
    let sign_of = [1.0, -1.0, 1.0, -1.0];

    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(4);
    for a in 0..4 {
        let g = &dots[pair_of[a]];
        let cells = mesh.cell_integrals(g);
        let col: Vec<f64> = match anchors[a] {
            Anchor::Origin => prefix_sums(&cells)
                .into_iter()
                .map(|c| sign_of[a] * c)
                .collect(),
            Anchor::Infinity => {
                let tail = tail_estimate(&mesh, g)?;
                let suffix = suffix_sums(&cells, tail);
                let scale = suffix[0].abs().max(1e-300);
                if tail.abs() > 0.01 * scale && tail.abs() > 1e-12 {
                    return Err(Error::Quadrature(format!(
                        "tail truncation {tail:.3e} exceeds 1% of coefficient integral {scale:.3e}"
                    )));
                }
                suffix.into_iter().map(|c| -sign_of[a] * c).collect()
            }
        };
        coeffs.push(col);
    }

    let n = nodes.len();
    let mut p1 = vec![0.0; n];
    let mut p2 = vec![0.0; n];
    let mut dp1 = vec![0.0; n];
    let mut dp2 = vec![0.0; n];
    for i in 0..n {
        for a in 0..4 {
            let st = basis.z[a].state_at(i);
            p1[i] += coeffs[a][i] * st[0];
            p2[i] += coeffs[a][i] * st[1];
            dp1[i] += coeffs[a][i] * st[2];
            dp2[i] += coeffs[a][i] * st[3];
        }
    }
    Ok(ModeFunction {
        k: basis.k,
        parity: None,
        psi1: RadialFn {
            rs: nodes.clone(),
            v: p1,
            dv: dp1,
        },
        psi2: RadialFn {
            rs: nodes,
            v: p2,
            dv: dp2,
        },
    })
}

/// Second derivative at the node nearest/// Second derivative at the node nearest `r` by a 7-point Fornberg stencil
/// applied to the stored first-derivative table; returns (node radius, d2).
fn nodal_d2(f: &RadialFn, r: f64) -> (f64, usize, f64) {
    let n = f.rs.len();
    let mut i = f.cell_of(r);
    if (f.rs[i + 1] - r).abs() < (r - f.rs[i]).abs() {
        i += 1;
    }
    let lo = i.saturating_sub(3).min(n - 7);
    let nodes = &f.rs[lo..lo + 7];
    let w = crate::numerics::fornberg_weights(f.rs[i], nodes, 1);
    let mut d2 = 0.0;
    for (s, &wgt) in w[1].iter().enumerate() {
        d2 += wgt * f.dv[lo + s];
    }
    (f.rs[i], i, d2)
}

/// Apply the coupled mode operator to a tabulated pair at the node nearest
/// `r` (high-order differences of the stored derivative tables); used as the
/// inversion oracle. Returns the operator value pair.
pub fn apply_coupled_operator(
    profile: &RadialProfile,
    k: usize,
    sigma: f64,
    f: &ModeFunction,
    r: f64,
) -> (f64, f64, f64) {
    let (rn, i, d2a) = nodal_d2(&f.psi1, r);
    let (_, _, d2b) = nodal_d2(&f.psi2, r);
    let w = profile.eval_w(rn, 0);
    let dw = profile.eval_w(rn, 1);
    let p = 2.0 * dw / w + 1.0 / rn;
    let kf = k as f64;
    let m11 = kf * kf;
    let m12 = sigma * 2.0 * kf;
    let m22 = kf * kf + 2.0 * w * w * rn * rn;
    let (v1, d1) = (f.psi1.v[i], f.psi1.dv[i]);
    let (v2, d2v) = (f.psi2.v[i], f.psi2.dv[i]);
    let lhs1 = d2a + p * d1 - (m11 * v1 + m12 * v2) / (rn * rn);
    let lhs2 = d2b + p * d2v - (m12 * v1 + m22 * v2) / (rn * rn);
    (rn, lhs1, lhs2)
}

/// Same for the two k = 0 scalar operators, at the node nearest `r`.
pub fn apply_mode0_operator(
    profile: &RadialProfile,
    imaginary_part: bool,
    f: &RadialFn,
    r: f64,
) -> (f64, f64) {
    let (rn, i, d2) = nodal_d2(f, r);
    let w = profile.eval_w(rn, 0);
    let dw = profile.eval_w(rn, 1);
    let p = 2.0 * dw / w + 1.0 / rn;
    let mass = if imaginary_part { 2.0 * w * w } else { 0.0 };
    (rn, d2 + p * f.dv[i] - mass * f.v[i])
}

/// The first inner correction at vortex j: the bounded solution of
/// `Ltilde_j[psi] = -(R_j1 + i R_j2)` assembled from the closed-form mode-2
/// data and the measured mode-0 radial average of R_j2.
pub struct InnerCorrection {
    pub vortex: usize,
    pub degree: i8,
    pub epsilon: f64,
    /// Imaginary radial part (mode 0).
    pub mode0: RadialFn,
    /// Radial profiles of the mode-2 block: the solve against the common
    /// radial right-hand side G = (w' r / w, -1).
    pub mode2: ModeFunction,
    /// Angular coefficients: S_c = sum_k a_k cos 2q_jk, S_s = likewise sin.
    pub s_cos: f64,
    pub s_sin: f64,
}

impl InnerCorrection {
    /// Value of psi at offset y from the vortex centre (rescaled frame).
    pub fn eval(&self, y_rel: crate::numerics::Vec2) -> Complex64 {
        let r = y_rel.norm().max(R_START);
        let th = y_rel.angle();
        let (c2, s2v) = ((2.0 * th).cos(), (2.0 * th).sin());
        let g1 = self.mode2.psi1.eval(r);
        let g2 = self.mode2.psi2.eval(r);
        let dj = self.degree as f64;
        // Real part: Psi_G1 (Sc sin2t - Ss cos2t); imaginary mode-2 part
        // carries the conjugate flip through d_j, mode 0 is degree-neutral.
        let re = g1 * (self.s_cos * s2v - self.s_sin * c2);
        let im = dj * (-g2) * (self.s_cos * c2 + self.s_sin * s2v) + self.mode0.eval(r);
        Complex64::new(re, im)
    }

    /// Gradient of (Re psi, Im psi) at the offset point: returns
    /// (d Re/dx, d Re/dy, d Im/dx, d Im/dy).
    pub fn grad(&self, y_rel: crate::numerics::Vec2) -> [f64; 4] {
        let r = y_rel.norm().max(R_START);
        let th = y_rel.angle();
        let (c2, s2v) = ((2.0 * th).cos(), (2.0 * th).sin());
        let e_r = y_rel / r;
        let e_t = e_r.perp();
        let (g1, dg1) = self.mode2.psi1.eval_with_deriv(r);
        let (g2, dg2) = self.mode2.psi2.eval_with_deriv(r);
        let (m0, dm0) = self.mode0.eval_with_deriv(r);
        let _ = m0;
        let dj = self.degree as f64;
        let ang_re = self.s_cos * s2v - self.s_sin * c2;
        let dang_re = 2.0 * (self.s_cos * c2 + self.s_sin * s2v);
        let ang_im = -(self.s_cos * c2 + self.s_sin * s2v);
        let dang_im = 2.0 * (self.s_cos * s2v - self.s_sin * c2);
        let grad_re = e_r * (dg1 * ang_re) + e_t * (g1 * dang_re / r);
        let grad_im =
            e_r * (dj * dg2 * ang_im + dm0) + e_t * (dj * g2 * dang_im / r);
        [grad_re.x, grad_re.y, grad_im.x, grad_im.y]
    }

    pub fn sup(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, &r) in self.mode2.psi1.rs.iter().enumerate() {
            let amp2 = (self.s_cos * self.s_cos + self.s_sin * self.s_sin).sqrt();
            let re = amp2 * self.mode2.psi1.v[i].abs();
            let im = amp2 * self.mode2.psi2.v[i].abs() + self.mode0.eval(r).abs();
            m = m.max((re * re + im * im).sqrt());
        }
        m
    }
}

/// Measured mode-0 radial average of R2 around vortex j.
pub fn mode0_average_of_r2(
    ctx: &crate::ansatz::AnsatzContext,
    j: usize,
    r: f64,
    samples: usize,
) -> f64 {
    let center = ctx.centers[j];
    let mut acc = 0.0;
    for s in 0..samples {
        let th = 2.0 * std::f64::consts::PI * s as f64 / samples as f64;
        let y = center + crate::numerics::Vec2::new(r * th.cos(), r * th.sin());
        let (_, r2) = ctx.r1_r2(y).expect("probe circle off-core");
        acc += r2;
    }
    acc / samples as f64
}

/// Build the first inner correction for vortex j of a Kirchhoff-consistent
/// configuration.
pub fn first_inner_correction(
    profile: &RadialProfile,
    config: &VortexConfig,
    velocities: &[crate::numerics::Vec2],
    j: usize,
) -> Result<InnerCorrection> {
    let eps = config.epsilon;
    let dj = config.degrees[j];
    let sigma = dj as f64;
    let ctx = crate::ansatz::AnsatzContext::from_config(profile, config, velocities);

    // Angular coefficients of the mode-2 data.
    let (mut s_cos, mut s_sin) = (0.0, 0.0);
    for k in 0..config.len() {
        if k == j {
            continue;
        }
        let diff = config.positions[j] - config.positions[k];
        let q = diff.angle();
        let a_k = 2.0 * eps * eps * config.degrees[k] as f64 / diff.norm_sq();
        s_cos += a_k * (2.0 * q).cos();
        s_sin += a_k * (2.0 * q).sin();
    }

    // Mode 2: one radial solve against G = (w' r / w, -1); the sign
    // conventions for sigma = -1 ride on the flipped basis.
    let basis = coupled_basis(profile, 2, sigma)?;
    let g = |r: f64| -> (f64, f64) {
        let w = profile.eval_w(r, 0);
        let dw = profile.eval_w(r, 1);
        (dw * r / w, -1.0)
    };
    let mode2 = solve_mode_k(profile, &basis, &g)?;

    // Mode 0: measured radial average of R2, cut off at the separation
    // scale, solved with the bounded/decaying limit convention.
    let m0b = mode0_basis(profile)?;
    let delta_y = crate::ansatz::delta_of_config(config) / eps;
    let nodes = mode_nodes(profile);
    let r0_tab: Vec<f64> = nodes
        .iter()
        .map(|&r| {
            if r > 2.0 * delta_y {
                return 0.0;
            }
            let cut = 1.0 - crate::numerics::smoothstep((r - delta_y) / delta_y);
            if cut == 0.0 {
                0.0
            } else {
                cut * mode0_average_of_r2(&ctx, j, r, 64)
            }
        })
        .collect();
    let r0_fn = RadialFn {
        rs: nodes.clone(),
        v: r0_tab,
        dv: vec![0.0; nodes.len()],
    };
    // dv unused by nearest-value quadrature below; rebuild with slopes.
    let r0_interp = {
        let mut dv = vec![0.0; nodes.len()];
        for i in 1..nodes.len() - 1 {
            dv[i] = (r0_fn.v[i + 1] - r0_fn.v[i - 1]) / (nodes[i + 1] - nodes[i - 1]);
        }
        RadialFn {
            rs: nodes.clone(),
            v: r0_fn.v.clone(),
            dv,
        }
    };
    let mode0 = solve_mode0_imag(profile, &m0b, &|r| -r0_interp.eval(r))?;

    Ok(InnerCorrection {
        vortex: j,
        degree: dj,
        epsilon: eps,
        mode0,
        mode2,
        s_cos,
        s_sin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::solve_profile;
    use crate::vortex::{dipole, kirchhoff_rhs};
    use std::sync::OnceLock;

    fn profile() -> &'static RadialProfile {
        static P: OnceLock<RadialProfile> = OnceLock::new();
        P.get_or_init(|| solve_profile(40.0, 1e-10).unwrap())
    }

    #[test]
    fn explicit_kernel_element_satisfies_system() {
        // z_{1,1} = (1/r, -w'/w) has residual < 1e-8 on [0.1, 30].
        let p = profile();
        let basis = coupled_basis(p, 1, 1.0).unwrap();
        let z1 = &basis.z[0];
        let f = ModeFunction {
            k: 1,
            parity: None,
            psi1: z1.a.clone(),
            psi2: z1.b.clone(),
        };
        let mut r = 0.1;
        while r <= 30.0 {
            let (_, l1, l2) = apply_coupled_operator(p, 1, 1.0, &f, r);
            assert!(
                l1.abs() < 1e-8 && l2.abs() < 1e-8,
                "residual ({l1:.2e}, {l2:.2e}) at r={r}"
            );
            r += 0.7;
        }
    }

    #[test]
    fn mode0_decaying_solution_has_sqrt2_log_derivative() {
        let p = profile();
        let b = mode0_basis(p).unwrap();
        let (v, d) = b.z2.eval_with_deriv(10.0);
        let logd = d / v;
        assert!(
            (logd + std::f64::consts::SQRT_2).abs() < 0.05 * std::f64::consts::SQRT_2,
            "log-derivative {logd}"
        );
        // And z1 grows like exp(+sqrt2 r).
        let (v1, d1) = b.z1.eval_with_deriv(10.0);
        assert!((d1 / v1 - std::f64::consts::SQRT_2).abs() < 0.1);
    }

    #[test]
    fn k2_basis_asymptotic_exponents() {
        let p = profile();
        let b = coupled_basis(p, 2, 1.0).unwrap();
        let slope = |f: &RadialFn, r1: f64, r2: f64| -> f64 {
            (f.eval(r2).abs() / f.eval(r1).abs()).ln() / (r2 / r1).ln()
        };
        // z2 ~ r^0 at small r, ~ r^2 at large r (first component).
        let s_small = slope(&b.z[1].a, 0.02, 0.2);
        let s_large = slope(&b.z[1].a, 15.0, 25.0);
        assert!(s_small.abs() < 0.1, "z2 small-r exponent {s_small}");
        assert!((s_large - 2.0).abs() < 0.1, "z2 large-r exponent {s_large}");
        // z1 ~ r^-2 at both ends.
        let s1_small = slope(&b.z[0].a, 0.02, 0.2);
        let s1_large = slope(&b.z[0].a, 15.0, 25.0);
        assert!((s1_small + 2.0).abs() < 0.1, "z1 small-r exponent {s1_small}");
        assert!((s1_large + 2.0).abs() < 0.1, "z1 large-r exponent {s1_large}");
        // z4 ~ r^(-2-k) at small r; exponential decay at large r.
        let s4_small = slope(&b.z[3].b, 0.02, 0.2);
        assert!((s4_small + 4.0).abs() < 0.15, "z4 second-component small-r {s4_small}");
        let (v, d) = b.z[3].b.eval_with_deriv(12.0);
        assert!((d / v + std::f64::consts::SQRT_2).abs() < 0.1);
        // z3 ~ r^k at small r; exponential growth at large r.
        let s3_small = slope(&b.z[2].a, 0.02, 0.2);
        assert!((s3_small - 2.0).abs() < 0.1, "z3 small-r exponent {s3_small}");
    }

    #[test]
    fn pairings_are_canonical() {
        let p = profile();
        let b = coupled_basis(p, 2, 1.0).unwrap();
        let want = [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        for a in 0..4 {
            for c in 0..4 {
                assert!(
                    (b.pairings[a][c] - want[a][c]).abs() < 1e-6,
                    "B[{a}][{c}] = {}",
                    b.pairings[a][c]
                );
            }
        }
    }

    #[test]
    fn mode0_real_manufactured_solution() {
        // Psi = r^2/(1+r^2): apply the operator analytically, solve, compare.
        let p = profile();
        let h1 = |r: f64| -> f64 {
            let u = 1.0 + r * r;
            let psi_d = 2.0 * r / (u * u);
            let psi_dd = (2.0 * u - 8.0 * r * r) / (u * u * u);
            let w = p.eval_w(r, 0);
            let dw = p.eval_w(r, 1);
            psi_dd + (2.0 * dw / w + 1.0 / r) * psi_d
        };
        let sol = solve_mode0_real(p, &h1).unwrap();
        let mut worst: f64 = 0.0;
        let mut r = 0.05;
        while r < 35.0 {
            let expect = r * r / (1.0 + r * r);
            worst = worst.max((sol.eval(r) - expect).abs());
            r += 0.37;
        }
        assert!(worst < 1e-6, "mode0 real manufactured error {worst:.3e}");
    }

    #[test]
    fn mode0_real_zero_rhs_gives_zero() {
        let p = profile();
        let sol = solve_mode0_real(p, &|_| 0.0).unwrap();
        assert!(sol.sup() == 0.0);
    }

    #[test]
    fn mode0_real_compact_rhs_constant_beyond_support() {
        // The bounded solution satisfies w^2 r Psi' = int_0^r w^2 t h dt, so
        // it is constant beyond the support exactly when the weighted mean
        // of h vanishes; build h as an exact weighted derivative.
        let p = profile();
        let h1 = |r: f64| -> f64 {
            if (1.0..2.0).contains(&r) {
                let u = r - 1.0;
                let v = 2.0 - r;
                // d/dr [u^3 v^3] / (w^2 r)
                let d = 3.0 * u * u * v * v * (v - u);
                let w = p.eval_w(r, 0);
                d / (w * w * r)
            } else {
                0.0
            }
        };
        let sol = solve_mode0_real(p, &h1).unwrap();
        let v3 = sol.eval(3.0);
        let v25 = sol.eval(25.0);
        assert!(v3.abs() > 1e-4, "plateau value {v3:.3e}");
        assert!(
            (v25 - v3).abs() < 1e-8 * v3.abs(),
            "not constant beyond support: {v3} vs {v25}"
        );
        // Independent oracle: direct ODE integration from rest at r = 0.5.
        let rhs = |r: f64, s: &[f64]| -> Vec<f64> {
            let w = p.eval_w(r, 0);
            let dw = p.eval_w(r, 1);
            vec![s[1], h1(r) - (2.0 * dw / w + 1.0 / r) * s[1]]
        };
        let y = crate::numerics::dopri5(&rhs, 0.5, 3.0, &[0.0, 0.0], 1e-12, 1e-14, &mut |_, _| {});
        assert!(
            (y[0] - v3).abs() < 1e-8,
            "direct integration {} vs representation {v3}",
            y[0]
        );
    }

    #[test]
    fn mode0_imag_manufactured_solution() {
        // Psi = exp(-r^2).
        let p = profile();
        let b = mode0_basis(p).unwrap();
        let h2 = |r: f64| -> f64 {
            let e = (-r * r).exp();
            let psi_d = -2.0 * r * e;
            let psi_dd = (4.0 * r * r - 2.0) * e;
            let w = p.eval_w(r, 0);
            let dw = p.eval_w(r, 1);
            psi_dd + (2.0 * dw / w + 1.0 / r) * psi_d - 2.0 * w * w * e
        };
        let sol = solve_mode0_imag(p, &b, &h2).unwrap();
        let mut worst: f64 = 0.0;
        let mut r = 0.05;
        while r < 10.0 {
            worst = worst.max((sol.eval(r) - (-r * r).exp()).abs());
            r += 0.17;
        }
        assert!(worst < 1e-6, "mode0 imag manufactured error {worst:.3e}");
    }

    #[test]
    fn mode0_imag_compact_rhs_decays_exponentially() {
        let p = profile();
        let b = mode0_basis(p).unwrap();
        let bump = |r: f64| -> f64 {
            if (1.0..2.0).contains(&r) {
                let t = (r - 1.0) * (2.0 - r);
                t * t
            } else {
                0.0
            }
        };
        let sol = solve_mode0_imag(p, &b, &bump).unwrap();
        let (v, d) = sol.eval_with_deriv(8.0);
        assert!((d / v + std::f64::consts::SQRT_2).abs() < 0.1);
    }

    #[test]
    fn coupled_solve_zero_rhs_gives_zero() {
        let p = profile();
        let b = coupled_basis(p, 2, 1.0).unwrap();
        let sol = solve_mode_k(p, &b, &|_| (0.0, 0.0)).unwrap();
        assert!(sol.psi1.sup() == 0.0 && sol.psi2.sup() == 0.0);
    }

    #[test]
    fn coupled_solve_operator_oracle() {
        // Solve with a decaying smooth rhs, then apply the operator by
        // finite differences and recover the rhs.
        let p = profile();
        let b = coupled_basis(p, 2, 1.0).unwrap();
        let h = |r: f64| -> (f64, f64) {
            let u = 1.0 + r * r;
            (r * r / (u * u), -1.0 / u)
        };
        let sol = solve_mode_k(p, &b, &h).unwrap();
        let mut r = 0.2;
        let mut worst: f64 = 0.0;
        while r < 25.0 {
            let (rn, l1, l2) = apply_coupled_operator(p, 2, 1.0, &sol, r);
            let (h1, h2) = h(rn);
            worst = worst.max((l1 - h1).abs().max((l2 - h2).abs()));
            r += 0.61;
        }
        assert!(worst < 1e-5, "operator oracle misfit {worst:.3e}");
        // Bounded at the origin and modest at infinity.
        assert!(sol.psi1.eval(0.011).abs() < 10.0);
        assert!(sol.psi1.eval(39.0).abs() < 10.0);
    }

    #[test]
    fn k1_solve_uses_origin_anchor() {
        let p = profile();
        let b = coupled_basis(p, 1, 1.0).unwrap();
        let h = |r: f64| -> (f64, f64) {
            let u = 1.0 + r * r;
            (1.0 / (u * u), r / (u * u))
        };
        let sol = solve_mode_k(p, &b, &h).unwrap();
        let mut r = 0.2;
        let mut worst: f64 = 0.0;
        while r < 20.0 {
            let (rn, l1, l2) = apply_coupled_operator(p, 1, 1.0, &sol, r);
            let (h1, h2) = h(rn);
            worst = worst.max((l1 - h1).abs().max((l2 - h2).abs()));
            r += 0.61;
        }
        assert!(worst < 1e-5, "k=1 oracle misfit {worst:.3e}");
    }

    #[test]
    fn inner_correction_scale_and_residual() {
        let p = profile();
        let mut sups = Vec::new();
        for &eps in &[0.1, 0.05] {
            let cfg = dipole(1.0, eps);
            let vel = kirchhoff_rhs(&cfg).unwrap();
            let corr = first_inner_correction(p, &cfg, &vel, 0).unwrap();
            sups.push(corr.sup());

            // Residual oracle on the mode-2 block: L(psi) = G for the
            // common radial solve.
            let mut r = 0.1;
            let delta_y = crate::ansatz::delta_of_config(&cfg) / eps;
            let mut worst: f64 = 0.0;
            while r <= delta_y.min(30.0) {
                let (rn, l1, l2) = apply_coupled_operator(p, 2, 1.0, &corr.mode2, r);
                let w = p.eval_w(rn, 0);
                let dw = p.eval_w(rn, 1);
                worst = worst
                    .max((l1 - dw * rn / w).abs())
                    .max((l2 + 1.0).abs());
                r += 0.13;
            }
            assert!(worst < 1e-5, "inner residual {worst:.3e} at eps={eps}");
        }
        // sup |psi^(1,1)| <= C eps^2 with stable C.
        let c0 = sups[0] / (0.1f64).powi(2);
        let c1 = sups[1] / (0.05f64).powi(2);
        assert!(
            (c0 / c1 - 1.0).abs() < 0.5,
            "C unstable: {c0:.3} vs {c1:.3}"
        );
    }

    #[test]
    fn single_vortex_correction_vanishes() {
        let p = profile();
        // A single vortex has no neighbours: S_c = S_s = 0 and the measured
        // mode-0 average of R2 vanishes, so psi^(1,1) = 0.
        let ctx = crate::ansatz::AnsatzContext::new(
            p,
            &[crate::numerics::Vec2::ZERO],
            &[1],
            &[crate::numerics::Vec2::ZERO],
            0.05,
        );
        for &r in &[0.5, 2.0, 5.0] {
            let avg = mode0_average_of_r2(&ctx, 0, r, 64);
            assert!(avg.abs() < 1e-10, "mode0 average {avg:.3e}");
        }
    }

    #[test]
    fn conjugate_symmetry_of_solves() {
        // Solving the flipped system with conjugated data equals the
        // conjugate of the plus solve: for the radial blocks this means the
        // sigma = -1 solve with (h1, -h2) equals (psi1, -psi2).
        let p = profile();
        let bp = coupled_basis(p, 2, 1.0).unwrap();
        let bm = coupled_basis(p, 2, -1.0).unwrap();
        let h = |r: f64| -> (f64, f64) {
            let u = 1.0 + r * r;
            (r / (u * u), -1.0 / u)
        };
        let hm = |r: f64| -> (f64, f64) {
            let (a, b) = h(r);
            (a, -b)
        };
        let sp = solve_mode_k(p, &bp, &h).unwrap();
        let sm = solve_mode_k(p, &bm, &hm).unwrap();
        let mut r = 0.1;
        let mut worst: f64 = 0.0;
        while r < 30.0 {
            worst = worst.max((sp.psi1.eval(r) - sm.psi1.eval(r)).abs());
            worst = worst.max((sp.psi2.eval(r) + sm.psi2.eval(r)).abs());
            r += 0.83;
        }
        assert!(worst < 1e-7, "conjugate asymmetry {worst:.3e}");
    }

    #[test]
    fn kernel_functions_project_to_homogeneous_solutions() {
        // iW: mode 0 with (Psi1, Psi2) = (1, 0): the real constant solves the
        // mode-0 real equation trivially. The translations dW/dy1, dW/dy2
        // project to mode 1 with radial pair (1/r, -w'/w) = z_{1,1}; checked
        // in explicit_kernel_element_satisfies_system. Here: constants.
        let p = profile();
        let c = RadialFn {
            rs: mode_nodes(p),
            v: vec![1.0; mode_nodes(p).len()],
            dv: vec![0.0; mode_nodes(p).len()],
        };
        for &r in &[0.5, 3.0, 11.0] {
            let (_, res) = apply_mode0_operator(p, false, &c, r);
            assert!(res.abs() < 1e-9);
        }
    }
}
