use gpvortex_core::ansatz::*;
use gpvortex_core::numerics::Vec2;
use gpvortex_core::profile::solve_profile;
use gpvortex_core::vortex::{dipole, kirchhoff_rhs, VortexConfig};
use num_complex::Complex64;

fn main() {
    let p = solve_profile(40.0, 1e-10).unwrap();
    let cfg = dipole(1.0, 0.05);
    let vel = vec![Vec2::new(0.7, -0.3), Vec2::new(-0.2, 1.1)];
    let side = 5.5;
    for &n in &[880usize, 1760] {
        let (s_direct, mask) = residual_direct(&p, &cfg, &vel, side, n).unwrap();
        let dec = residual_r1r2(&p, &cfg, &vel, side, n).unwrap();
        let ctx = AnsatzContext::from_config(&p, &cfg, &vel);
        let h = dec.side / n as f64;
        let origin = -0.5 * dec.side;
        let mut worst = 0.0f64;
        let mut worst_pos = Vec2::ZERO;
        let mut worst_r = 0.0;
        for i in 0..n {
            for j in 0..n {
                if mask[[i, j]] || dec.mask[[i, j]] { continue; }
                let y = Vec2::new(origin + i as f64 * h, origin + j as f64 * h);
                let rmin = ctx.centers.iter().map(|&c| (y - c).norm()).fold(f64::INFINITY, f64::min);
                if rmin < 3.0 { continue; }
                let u = ctx.u_value(y);
                let recon = Complex64::new(0.0, 1.0) * u * Complex64::new(dec.r1[[i, j]], dec.r2[[i, j]]);
                let d = (s_direct[[i, j]] - recon).norm();
                if d > worst { worst = d; worst_pos = y; worst_r = rmin; }
            }
        }
        println!("n={n}: worst {worst:.3e} at ({:.2},{:.2}) rmin={:.2}", worst_pos.x, worst_pos.y, worst_r);
    }
    // mode purity numbers
    let eps = 0.01;
    let cfg = VortexConfig::new(
        vec![Vec2::new(0.3, 0.4), Vec2::new(-0.8, 0.1), Vec2::new(0.2, -0.9)],
        vec![1, -1, 1], eps).unwrap();
    let vel = kirchhoff_rhs(&cfg).unwrap();
    let ctx = AnsatzContext::from_config(&p, &cfg, &vel);
    for &r in &[0.5, 1.5] {
        let spec = mode_expand_near(&ctx, 0, r, 8).unwrap();
        println!("r={r}:");
        for m in 0..=8 {
            println!("  m={m}: R1 {:.3e}  R2 {:.3e}", spec.r1_amplitude(m), spec.r2_amplitude(m));
        }
        let ((c1, s1), (c2, s2)) = ctx.mode2_closed_form(0, r);
        println!("  closed R1 ({:.6e},{:.6e}) measured ({:.6e},{:.6e})", c1, s1, spec.r1_cos[2], spec.r1_sin[2]);
        println!("  closed R2 ({:.6e},{:.6e}) measured ({:.6e},{:.6e})", c2, s2, spec.r2_cos[2], spec.r2_sin[2]);
    }
}
