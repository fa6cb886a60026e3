//! Space-time residuals of the weak formulation for test functions
//! `chi(t) psi(x)`.
//!
//! `chi(t) = 1 - s(t/T)` with `s` the quintic smoothstep vanishes with two
//! derivatives at `t = T`. The time integrals use product integration:
//! the sampled data are interpolated by piecewise quartics on groups of
//! four frame intervals and integrated exactly against `chi` and `chi'`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{NskError, Result};
use crate::fields::{Grid, ScalarField, Trajectory};
use crate::operators::{
    korteweg_divergence, pressure_gradient_factorized, quantum_tensor, viscous_stress, PowerLaw,
};
use crate::solver::{velocity_from, State};

/// Band-limited trigonometric polynomial `sum a cos(2 pi k.x) + b sin(2 pi k.x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigTest {
    pub modes: Vec<([i64; 3], f64, f64)>,
}

impl TrigTest {
    pub fn field(&self, grid: &Grid) -> ScalarField {
        let d = grid.dim();
        ScalarField::from_fn(grid, |x| {
            self.modes
                .iter()
                .map(|(k, a, b)| {
                    let ph: f64 = (0..d).map(|i| k[i] as f64 * x[i]).sum::<f64>() * std::f64::consts::TAU;
                    a * ph.cos() + b * ph.sin()
                })
                .sum()
        })
        .named("psi")
    }
}

/// `count` random test functions with wavenumbers `|k_i| <= 3`, seeded.
pub fn test_battery(dim: usize, count: usize, seed: u64) -> Vec<TrigTest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let modes = (0..4)
                .map(|_| {
                    let mut k = [0i64; 3];
                    for ki in k.iter_mut().take(dim) {
                        *ki = rng.gen_range(-3..=3);
                    }
                    (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
                .collect();
            TrigTest { modes }
        })
        .collect()
}

fn chi(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    1.0 - s * s * s * (10.0 + s * (6.0 * s - 15.0))
}

fn chi_prime(s: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    -30.0 * s * s * (s - 1.0) * (s - 1.0)
}

/// Interpolation degree of the product-integration panels.
const PANEL: usize = 4;

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Weights `w_k` with `int_{t_0}^{t_N} f(t) a(t) dt ~ sum w_k a(t_k)`.
pub fn product_weights(times: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    let deg = PANEL.min(n - 1);
    let mut i = 0;
    while i + 1 < n {
        let end = (i + deg).min(n - 1);
        // a short last panel still interpolates through the last deg+1 nodes
        let first = end - deg;
        let nodes: Vec<usize> = (first..=end).collect();
        let (a, b) = (times[i], times[end]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for &(xi, wi) in &GAUSS5 {
            let t = mid + half * xi;
            let ft = f(t) * wi * half;
            for &nj in &nodes {
                let mut l = 1.0;
                for &nm in &nodes {
                    if nm != nj {
                        l *= (t - times[nm]) / (times[nj] - times[nm]);
                    }
                }
                w[nj] += ft * l;
            }
        }
        i = end;
    }
    w
}

struct TimeWeights {
    chi0: f64,
    chi: Vec<f64>,
    chi_dot: Vec<f64>,
}

fn time_weights(traj: &Trajectory<State>) -> Result<TimeWeights> {
    if traj.len() < 2 {
        return Err(NskError::InvalidParameter("weak residuals need at least two frames".into()));
    }
    let times = traj.times();
    let (t0, t1) = (times[0], *times.last().unwrap());
    let len = t1 - t0;
    Ok(TimeWeights {
        chi0: chi(0.0),
        chi: product_weights(&times, |t| chi((t - t0) / len)),
        chi_dot: product_weights(&times, |t| chi_prime((t - t0) / len) / len),
    })
}

/// `|int rho0 phi(0) + int int rho phi_t + m . grad phi|`.
pub fn weak_residual_continuity(traj: &Trajectory<State>, psi: &ScalarField) -> Result<f64> {
    let tw = time_weights(traj)?;
    let gpsi = psi.grad();
    let mut r = tw.chi0 * traj.frame(0).rho.dot(psi);
    for (k, s) in traj.frames().iter().enumerate() {
        r += tw.chi_dot[k] * s.rho.dot(psi) + tw.chi[k] * s.m.dot(&gpsi).integrate();
    }
    Ok(r.abs())
}

fn is_unit(law: &PowerLaw) -> bool {
    law.c == 1.0 && law.a == 0.0
}

/// Spatial integral multiplying `chi(t)` in the momentum identity for
/// component `l`.
fn momentum_flux(s: &State, psi: &ScalarField, gpsi: &crate::fields::VectorField, l: usize, floor: f64) -> Result<f64> {
    let p = &s.params;
    let rho = &s.rho;
    let u = velocity_from(s, Some(floor));
    let d = s.grid().dim();
    let ml = s.m.component(l);
    let mut acc = (ml * &u.dot(gpsi)).integrate();
    let stress = viscous_stress(rho, &u, &p.coefficients)?;
    for j in 0..d {
        acc -= stress.get(l, j).dot(gpsi.component(j));
    }
    if p.epsilon > 0.0 {
        let w = (rho * &u.norm_sq()).map(|v| p.epsilon * (v + 1.0));
        acc -= (&(&w * u.component(l)) * psi).integrate();
        let q = quantum_tensor(rho)?;
        for j in 0..d {
            acc -= p.epsilon * q.get(l, j).dot(gpsi.component(j));
        }
    }
    acc -= pressure_gradient_factorized(rho, p.gamma)?.component(l).dot(psi);
    if is_unit(&p.coefficients.k) {
        let lap = rho.laplacian();
        acc -= (&(&rho.partial(l) * &lap) * psi).integrate();
        acc -= (&(rho * &lap) * gpsi.component(l)).integrate();
    } else {
        acc += korteweg_divergence(rho, &p.coefficients)?.component(l).dot(psi);
    }
    Ok(acc)
}

/// Absolute residual of the momentum identity for component `l`.
pub fn weak_residual_momentum(traj: &Trajectory<State>, psi: &ScalarField, l: usize, floor: Option<f64>) -> Result<f64> {
    let tw = time_weights(traj)?;
    let first = traj.frame(0);
    if l >= first.grid().dim() {
        return Err(NskError::InvalidParameter(format!("component {l} out of range")));
    }
    let floor = floor.unwrap_or_else(|| crate::solver::default_floor(&first.rho));
    let gpsi = psi.grad();
    let mut r = tw.chi0 * first.m.component(l).dot(psi);
    for (k, s) in traj.frames().iter().enumerate() {
        r += tw.chi_dot[k] * s.m.component(l).dot(psi);
        if tw.chi[k] != 0.0 {
            r += tw.chi[k] * momentum_flux(s, psi, &gpsi, l, floor)?;
        }
    }
    Ok(r.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::VectorField;
    use crate::operators::{CoefficientSet, PhysicsParams};

    #[test]
    fn product_weights_integrate_polynomials() {
        let times: Vec<f64> = (0..=7).map(|k| k as f64 * 0.125).collect();
        // a(t) = t^4 is reproduced exactly on quartic panels, including the
        // short last panel of the eight-frame grid
        for len in [5, 7, 8] {
            let t_end = times[len - 1];
            let w = product_weights(&times[..len], |t| chi(t / t_end));
            let approx: f64 = w.iter().zip(&times).map(|(w, t)| w * t.powi(4)).sum();
            // exact int_0^T chi(t/T) t^4 dt = T^5 int_0^1 (1 - 10s^3 + 15s^4 - 6s^5) s^4 ds
            let exact = t_end.powi(5) * (1.0 / 5.0 - 10.0 / 8.0 + 15.0 / 9.0 - 6.0 / 10.0);
            assert!((approx - exact).abs() < 1e-15, "{len}: {approx} {exact}");
        }
        let w = product_weights(&times, |_| 1.0);
        assert!((w.iter().sum::<f64>() - 0.875).abs() < 1e-15);
        let w = product_weights(&times[..2], |_| 1.0);
        assert!((w[0] - 0.0625).abs() < 1e-16 && (w[1] - 0.0625).abs() < 1e-16);
    }

    #[test]
    fn chi_support() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(1.0), 0.0);
        assert_eq!(chi_prime(1.0), 0.0);
        assert_eq!(chi_prime(0.0), 0.0);
    }

    #[test]
    fn equilibrium_and_zero_test_function() {
        let g = Grid::new(2, 16).unwrap();
        let p = PhysicsParams::new(2.0, 0.1, CoefficientSet::paper()).unwrap();
        let frames: Vec<State> = (0..5)
            .map(|k| {
                let mut s = State::new(ScalarField::constant(&g, 1.3), VectorField::zeros(&g), 0.0, p).unwrap();
                s.time = 0.1 * k as f64;
                s
            })
            .collect();
        let traj = Trajectory::new(0.0, 0.1, frames).unwrap();
        for t in test_battery(2, 10, 1) {
            let psi = t.field(&g);
            assert!(weak_residual_continuity(&traj, &psi).unwrap() <= 1e-12);
            for l in 0..2 {
                assert!(weak_residual_momentum(&traj, &psi, l, None).unwrap() <= 1e-12);
            }
        }
        let zero = ScalarField::zeros(&g);
        assert_eq!(weak_residual_continuity(&traj, &zero).unwrap(), 0.0);
        assert_eq!(weak_residual_momentum(&traj, &zero, 0, None).unwrap(), 0.0);
    }

    #[test]
    fn battery_is_deterministic() {
        assert_eq!(test_battery(3, 10, 42), test_battery(3, 10, 42));
        assert_ne!(test_battery(3, 10, 42), test_battery(3, 10, 43));
    }
}
