use gpvortex_core::modes::*;
use gpvortex_core::profile::solve_profile;

fn main() {
    let p = solve_profile(40.0, 1e-10).unwrap();
    let bk = coupled_basis(&p, 2, 1.0).unwrap();
    // Does each basis element satisfy the homogeneous system?
    for (name, idx) in [("z1", 0usize), ("z2", 1), ("z3", 2), ("z4", 3)] {
        let f = ModeFunction {
            k: 2, parity: None,
            psi1: bk.z[idx].a.clone(),
            psi2: bk.z[idx].b.clone(),
        };
        for &r in &[0.5, 2.0, 10.0] {
            let (rn, l1, l2) = apply_coupled_operator(&p, 2, 1.0, &f, r);
            let (v1, _v2) = bk.z[idx].eval(rn);
            println!("{name} at r={rn:.3}: residual ({:.2e}, {:.2e}), value {:.3e}", l1, l2, v1);
        }
    }
}
