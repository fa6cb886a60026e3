//! Exact linearization about `(rho_bar, 0)` in Fourier space.
//!
//! Per wavevector `q` the momentum splits into its longitudinal part
//! `a = q_hat . m_hat` and a transverse remainder. With `p = gamma
//! rho_bar^(gamma-1)`, `c = rho_bar k(rho_bar) + eps/2`:
//!
//! ```text
//! rho' = -i|q| a
//! a'   = -i(p|q| + c|q|^3) rho - (nu_L |q|^2 + eps/rho_bar) a
//! m_T' = -(nu_T |q|^2 + eps/rho_bar) m_T
//! ```
//!
//! with `nu_L = (h + g)/rho_bar`, `nu_T = h/(2 rho_bar)` at `rho_bar`.

use num_complex::Complex64;

use crate::fields::Grid;
use crate::operators::PhysicsParams;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Density and momentum spectra.
#[derive(Clone, Debug)]
pub struct SpecState {
    pub rho: Vec<C>,
    pub m: Vec<Vec<C>>,
}

impl SpecState {
    pub fn zeros_like(other: &SpecState) -> Self {
        Self {
            rho: vec![ZERO; other.rho.len()],
            m: other.m.iter().map(|c| vec![ZERO; c.len()]).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SpecState) -> SpecState {
        let f = |a: &[C], b: &[C]| a.iter().zip(b).map(|(x, y)| x + y * s).collect::<Vec<_>>();
        SpecState {
            rho: f(&self.rho, &other.rho),
            m: self.m.iter().zip(&other.m).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> SpecState {
        SpecState {
            rho: self.rho.iter().map(|x| x * s).collect(),
            m: self.m.iter().map(|c| c.iter().map(|x| x * s).collect()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Mode {
    qhat: [f64; 3],
    /// 2x2 longitudinal block, row-major, acting on `(rho, a)`.
    long: [C; 4],
    /// Transverse factor (generator or exponential).
    trans: C,
}

/// Linear operator (or its exponential) as a per-mode table.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    dim: usize,
    modes: Vec<Option<Mode>>,
}

impl LinearOperator {
    /// Generator of the linearization on the retained band; modes outside
    /// the band map to zero.
    pub fn new(grid: &Grid, params: &PhysicsParams, rho_bar: f64) -> Self {
        let c = &params.coefficients;
        let p = params.gamma * rho_bar.powf(params.gamma - 1.0);
        let cap = rho_bar * c.k.eval(rho_bar) + 0.5 * params.epsilon;
        let h = c.h.eval(rho_bar);
        let g = c.g.eval(rho_bar);
        let nu_l = (h + g) / rho_bar;
        let nu_t = h / (2.0 * rho_bar);
        let damp = params.epsilon / rho_bar;
        let d = grid.dim();
        let modes = (0..grid.len())
            .map(|flat| {
                if !grid.retained(flat) {
                    return None;
                }
                let idx = grid.multi_index(flat);
                let mut q = [0.0; 3];
                for a in 0..d {
                    q[a] = grid.odd_wavenumber(idx[a]);
                }
                let q2: f64 = q.iter().map(|v| v * v).sum();
                let qn = q2.sqrt();
                let qhat = if qn > 0.0 {
                    [q[0] / qn, q[1] / qn, q[2] / qn]
                } else {
                    [0.0; 3]
                };
                let w = p * qn + cap * qn * q2;
                Some(Mode {
                    qhat,
                    long: [
                        ZERO,
                        C::new(0.0, -qn),
                        C::new(0.0, -w),
                        C::new(-(nu_l * q2 + damp), 0.0),
                    ],
                    trans: C::new(-(nu_t * q2 + damp), 0.0),
                })
            })
            .collect();
        Self { dim: d, modes }
    }

    /// The zero operator (used by the explicit scheme).
    pub fn zero(grid: &Grid) -> Self {
        Self {
            dim: grid.dim(),
            modes: (0..grid.len())
                .map(|f| {
                    grid.retained(f).then_some(Mode {
                        qhat: [0.0; 3],
                        long: [ZERO; 4],
                        trans: ZERO,
                    })
                })
                .collect(),
        }
    }

    /// `exp(h L)` with the same layout.
    pub fn exponential(&self, h: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                m.map(|mode| {
                    let qzero = mode.qhat.iter().all(|v| *v == 0.0);
                    let long = if qzero {
                        // mean mode: rho fixed, momentum decays like m_T
                        [C::new(1.0, 0.0), ZERO, ZERO, (mode.trans * h).exp()]
                    } else {
                        expm2(mode.long, h)
                    };
                    Mode {
                        qhat: mode.qhat,
                        long,
                        trans: (mode.trans * h).exp(),
                    }
                })
            })
            .collect();
        Self { dim: self.dim, modes }
    }

    /// Apply the per-mode table to a spectral state.
    pub fn apply(&self, s: &SpecState) -> SpecState {
        let mut out = SpecState::zeros_like(s);
        let d = self.dim;
        for (i, mode) in self.modes.iter().enumerate() {
            let Some(mode) = mode else { continue };
            let qzero = mode.qhat.iter().all(|v| *v == 0.0);
            if qzero {
                out.rho[i] = mode.long[0] * s.rho[i];
                for a in 0..d {
                    out.m[a][i] = mode.long[3] * s.m[a][i];
                }
                continue;
            }
            let mut a_long = ZERO;
            for a in 0..d {
                a_long += s.m[a][i] * mode.qhat[a];
            }
            let r = s.rho[i];
            out.rho[i] = mode.long[0] * r + mode.long[1] * a_long;
            let a_new = mode.long[2] * r + mode.long[3] * a_long;
            for a in 0..d {
                let transverse = s.m[a][i] - a_long * mode.qhat[a];
                out.m[a][i] = transverse * mode.trans + a_new * mode.qhat[a];
            }
        }
        out
    }
}

/// `exp(h M)` for a 2x2 complex matrix via the shifted hyperbolic form
/// `e^{h s} [cosh(h D) I + sinh(h D)/D (M - s I)]`, `s = tr/2`,
/// `D^2 = s^2 - det`.
fn expm2(m: [C; 4], h: f64) -> [C; 4] {
    let s = (m[0] + m[3]) * 0.5;
    let det = m[0] * m[3] - m[1] * m[2];
    let disc = (s * s - det).sqrt();
    let z = disc * h;
    let (ch, sh_over) = if z.norm() < 1e-4 {
        let z2 = z * z;
        (
            C::new(1.0, 0.0) + z2 * 0.5 + z2 * z2 / 24.0,
            (C::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0) * h,
        )
    } else {
        (z.cosh(), z.sinh() / disc)
    };
    let e = (s * h).exp();
    [
        e * (ch + sh_over * (m[0] - s)),
        e * sh_over * m[1],
        e * sh_over * m[2],
        e * (ch + sh_over * (m[3] - s)),
    ]
}
