use gpvortex_core::modes::*;
use gpvortex_core::profile::solve_profile;

fn main() {
    let p = solve_profile(40.0, 1e-10).unwrap();

    // mode0 imag manufactured
    let b = mode0_basis(&p).unwrap();
    println!("z1(5) = {:.6e}, z2(5) = {:.6e}", b.z1.eval(5.0), b.z2.eval(5.0));
    println!("z1(0.011) = {:.6e}, z2(0.011) = {:.6e}", b.z1.eval(0.011), b.z2.eval(0.011));
    let h2 = |r: f64| -> f64 {
        let e = (-r * r).exp();
        let psi_d = -2.0 * r * e;
        let psi_dd = (4.0 * r * r - 2.0) * e;
        let w = p.eval_w(r, 0);
        let dw = p.eval_w(r, 1);
        psi_dd + (2.0 * dw / w + 1.0 / r) * psi_d - 2.0 * w * w * e
    };
    let sol = solve_mode0_imag(&p, &b, &h2).unwrap();
    for &r in &[0.05, 0.3, 1.0, 2.0, 4.0] {
        println!("r={r}: sol {:.6e} expect {:.6e} ratio {:.4}", sol.eval(r), (-r*r as f64).exp(), sol.eval(r)/(-r*r as f64).exp());
    }

    // mode0 real compact
    let bump = |r: f64| -> f64 {
        if (1.0..2.0).contains(&r) { let t = (r - 1.0) * (2.0 - r); t * t } else { 0.0 }
    };
    let solr = solve_mode0_real(&p, &bump).unwrap();
    for &r in &[0.5, 3.0, 10.0, 20.0, 35.0] {
        println!("real compact r={r}: {:.8e}", solr.eval(r));
    }

    // k2 exponents
    let bk = coupled_basis(&p, 2, 1.0).unwrap();
    let slope = |f: &RadialFn, r1: f64, r2: f64| -> f64 {
        (f.eval(r2).abs() / f.eval(r1).abs()).ln() / (r2 / r1 as f64).ln()
    };
    println!("z1.a: small {:.3} large {:.3}", slope(&bk.z[0].a, 0.02, 0.2), slope(&bk.z[0].a, 15.0, 25.0));
    println!("z2.a: small {:.3} large {:.3}", slope(&bk.z[1].a, 0.02, 0.2), slope(&bk.z[1].a, 15.0, 25.0));
    println!("z3.a: small {:.3}", slope(&bk.z[2].a, 0.02, 0.2));
    println!("z4.b: small {:.3}", slope(&bk.z[3].b, 0.02, 0.2));
    println!("pairings:");
    for a in 0..4 { println!("  {:?}", bk.pairings[a]); }
    println!("z1.a vals at 0.02,0.2,15,25: {:.3e} {:.3e} {:.3e} {:.3e}", bk.z[0].a.eval(0.02), bk.z[0].a.eval(0.2), bk.z[0].a.eval(15.0), bk.z[0].a.eval(25.0));
    println!("z2.a vals: {:.3e} {:.3e} {:.3e} {:.3e}", bk.z[1].a.eval(0.02), bk.z[1].a.eval(0.2), bk.z[1].a.eval(15.0), bk.z[1].a.eval(25.0));
}
