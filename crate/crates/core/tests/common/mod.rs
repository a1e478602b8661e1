#![allow(dead_code)]

use nalgebra::Matrix4;
use qubit_relax::model::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `A A† / tr(A A†)` for a random complex `A`: a full-rank density matrix.
pub fn random_density(rng: &mut StdRng) -> Matrix4<C64> {
    let a = Matrix4::<C64>::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let rho = a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Adaptive Dormand–Prince 5(4) integration of `dy/dt = f(y)` on 4×4
/// complex matrices.
pub fn dopri5<F>(f: F, y0: Matrix4<C64>, t_end: f64, rtol: f64, atol: f64) -> Matrix4<C64>
where
    F: Fn(&Matrix4<C64>) -> Matrix4<C64>,
{
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut t: f64 = 0.0;
    let mut y = y0;
    let mut h: f64 = 1e-3;
    let mut k1 = f(&y);
    while t < t_end {
        h = h.min(t_end - t);
        let mut k = [k1; 7];
        for s in 0..6 {
            let mut ys = y;
            for (j, c) in C[s].iter().enumerate().take(s + 1) {
                ys += k[j] * C64::new(h * c, 0.0);
            }
            k[s + 1] = f(&ys);
        }
        let mut y_new = y;
        for (j, c) in C[5].iter().enumerate() {
            y_new += k[j] * C64::new(h * c, 0.0);
        }
        let mut err = Matrix4::<C64>::zeros();
        for (j, e) in E.iter().enumerate() {
            err += k[j] * C64::new(h * e, 0.0);
        }
        let mut norm = 0.0f64;
        for (e, (a, b)) in err.iter().zip(y.iter().zip(y_new.iter())) {
            let scale = atol + rtol * a.norm().max(b.norm());
            norm = norm.max(e.norm() / scale);
        }
        if norm <= 1.0 {
            t += h;
            y = y_new;
            k1 = k[6];
        }
        let factor = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    y
}
