use gpvortex_core::modes::*;
use gpvortex_core::profile::solve_profile;

fn main() {
    let p = solve_profile(40.0, 1e-10).unwrap();
    // mode0 imag manufactured: error profile vs r
    let b = mode0_basis(&p).unwrap();
    let h2 = |r: f64| -> f64 {
        let e = (-r * r).exp();
        let psi_d = -2.0 * r * e;
        let psi_dd = (4.0 * r * r - 2.0) * e;
        let w = p.eval_w(r, 0);
        let dw = p.eval_w(r, 1);
        psi_dd + (2.0 * dw / w + 1.0 / r) * psi_d - 2.0 * w * w * e
    };
    let sol = solve_mode0_imag(&p, &b, &h2).unwrap();
    for &r in &[0.011, 0.05, 0.1, 0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
        let e = sol.eval(r) - (-r * r as f64).exp();
        println!("r={r}: err {:.3e}", e);
    }

    // Manufactured COUPLED solution (no FD): Psi = (exp(-r^2), r^2 exp(-r^2))
    let man = |r: f64| -> (f64, f64) { ((-r * r as f64).exp(), r * r * (-r * r as f64).exp()) };
    let man_d = |r: f64| -> (f64, f64) {
        let e = (-r * r as f64).exp();
        (-2.0 * r * e, (2.0 * r - 2.0 * r * r * r) * e)
    };
    let man_dd = |r: f64| -> (f64, f64) {
        let e = (-r * r as f64).exp();
        (
            (4.0 * r * r - 2.0) * e,
            (2.0 - 10.0 * r * r + 4.0 * r.powi(4)) * e,
        )
    };
    let k = 2.0f64;
    let h = |r: f64| -> (f64, f64) {
        let w = p.eval_w(r, 0);
        let dw = p.eval_w(r, 1);
        let pc = 2.0 * dw / w + 1.0 / r;
        let (v1, v2) = man(r);
        let (d1, d2) = man_d(r);
        let (dd1, dd2) = man_dd(r);
        let m11 = k * k;
        let m12 = 2.0 * k;
        let m22 = k * k + 2.0 * w * w * r * r;
        (
            dd1 + pc * d1 - (m11 * v1 + m12 * v2) / (r * r),
            dd2 + pc * d2 - (m12 * v1 + m22 * v2) / (r * r),
        )
    };
    let bk = coupled_basis(&p, 2, 1.0).unwrap();
    let solk = solve_mode_k(&p, &bk, &h).unwrap();
    println!("coupled manufactured:");
    for &r in &[0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let (m1, m2) = man(r);
        println!(
            "r={r}: sol ({:.6e},{:.6e}) man ({:.6e},{:.6e})",
            solk.psi1.eval(r), solk.psi2.eval(r), m1, m2
        );
    }
}
