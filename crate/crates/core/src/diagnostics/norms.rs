use serde::Serialize;

use crate::fields::Trajectory;
use crate::solver::{velocity_from, State};

/// How a spatial norm is aggregated in time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TimeNorm {
    Sup,
    Lp(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSpec {
    pub name: &'static str,
    /// Which family of bounds the norm belongs to.
    pub group: &'static str,
    pub time: TimeNorm,
}

const fn spec(name: &'static str, group: &'static str, time: TimeNorm) -> NormSpec {
    NormSpec { name, group, time }
}

/// Every tabulated norm. Groups: `energy` (uniform energy/BD bounds),
/// `integrability` (interpolated density bounds), `momentum`, `time`
/// (time derivative of the density) and `eps` (regularization-weighted).
pub const NORMS: &[NormSpec] = &[
    spec("sqrt_rho_u_L2", "energy", TimeNorm::Sup),
    spec("grad_rho_L2", "energy", TimeNorm::Sup),
    spec("rho_L1", "energy", TimeNorm::Sup),
    spec("rho_Lgamma", "energy", TimeNorm::Sup),
    spec("T_L2", "energy", TimeNorm::Lp(2.0)),
    spec("grad_rho_gamma_half_L2", "energy", TimeNorm::Lp(2.0)),
    spec("lap_rho_L2", "energy", TimeNorm::Lp(2.0)),
    spec("grad_sqrt_rho_L2", "energy", TimeNorm::Sup),
    spec("rho_Linf", "integrability", TimeNorm::Lp(2.0)),
    spec("grad_rho_L10/3", "integrability", TimeNorm::Lp(10.0 / 3.0)),
    spec("rho_gamma_half_L10/3", "integrability", TimeNorm::Lp(10.0 / 3.0)),
    spec("rho_u_L2", "momentum", TimeNorm::Lp(2.0)),
    spec("grad_rho_u_L1", "momentum", TimeNorm::Lp(2.0)),
    spec("dt_rho_L1", "time", TimeNorm::Lp(2.0)),
    spec("eps_hess_sqrt_rho_L2", "eps", TimeNorm::Lp(2.0)),
    spec("eps_grad_rho_quarter_L4", "eps", TimeNorm::Lp(4.0)),
    spec("eps_rho_quarter_u_L4", "eps", TimeNorm::Lp(4.0)),
    spec("eps_u_L2", "eps", TimeNorm::Lp(2.0)),
];

/// Spatial norms of one state, ordered as [`NORMS`].
pub fn instant_norms(state: &State, floor: f64) -> Vec<f64> {
    let p = &state.params;
    let rho = &state.rho;
    let eps = p.epsilon;
    let u = velocity_from(state, Some(floor));
    let sqrt_rho = rho.map(f64::sqrt);
    let t = super::tensor_t(state, Some(floor));
    let grad_rho = rho.grad();
    let m = &state.m;
    let grad_m_l1 = m.gradient().frobenius_sq().map(f64::sqrt).lp_norm(1.0);
    let rho_quarter = rho.map(|r| r.powf(0.25));
    vec![
        u.times(&sqrt_rho).lp_norm(2.0),
        grad_rho.lp_norm(2.0),
        rho.lp_norm(1.0),
        rho.lp_norm(p.gamma),
        t.lp_norm(2.0),
        rho.map(|r| r.powf(p.gamma / 2.0)).grad().lp_norm(2.0),
        rho.laplacian().lp_norm(2.0),
        sqrt_rho.grad().lp_norm(2.0),
        rho.lp_norm(f64::INFINITY),
        grad_rho.lp_norm(10.0 / 3.0),
        rho.map(|r| r.powf(p.gamma / 2.0)).lp_norm(10.0 / 3.0),
        m.lp_norm(2.0),
        grad_m_l1,
        m.div().lp_norm(1.0),
        eps.sqrt() * sqrt_rho.hessian().lp_norm(2.0),
        eps.powf(0.25) * rho_quarter.grad().lp_norm(4.0),
        eps.powf(0.25) * u.times(&rho_quarter).lp_norm(4.0),
        eps.sqrt() * u.lp_norm(2.0),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub name: &'static str,
    pub group: &'static str,
    pub value: f64,
}

/// Aggregate spatial norms in time; `L^p_t` uses the trapezoid rule over
/// the frames.
pub fn aggregate(times: &[f64], series: &[Vec<f64>]) -> Vec<NormRow> {
    NORMS
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let vals: Vec<f64> = series.iter().map(|v| v[i]).collect();
            let value = match s.time {
                TimeNorm::Sup => vals.iter().fold(0.0, |a: f64, v| a.max(*v)),
                TimeNorm::Lp(p) => {
                    let mut acc = 0.0;
                    for k in 1..vals.len() {
                        acc += 0.5 * (times[k] - times[k - 1]) * (vals[k].powf(p) + vals[k - 1].powf(p));
                    }
                    acc.powf(1.0 / p)
                }
            };
            NormRow {
                name: s.name,
                group: s.group,
                value,
            }
        })
        .collect()
}

/// One row per tabulated norm over the whole trajectory.
pub fn norm_table(traj: &Trajectory<State>, floor: f64) -> Vec<NormRow> {
    let series: Vec<Vec<f64>> = traj.frames().iter().map(|s| instant_norms(s, floor)).collect();
    aggregate(&traj.times(), &series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, ScalarField, VectorField};
    use crate::operators::{CoefficientSet, PhysicsParams};

    #[test]
    fn constant_state_table() {
        let g = Grid::new(2, 16).unwrap();
        let p = PhysicsParams::new(2.0, 0.1, CoefficientSet::paper()).unwrap();
        let s = State::new(ScalarField::constant(&g, 2.0), VectorField::zeros(&g), 0.0, p).unwrap();
        let mut s1 = s.clone();
        s1.time = 0.5;
        let traj = Trajectory::new(0.0, 0.5, vec![s, s1]).unwrap();
        let rows = norm_table(&traj, 1e-10);
        let get = |n: &str| rows.iter().find(|r| r.name == n).unwrap().value;
        for n in ["sqrt_rho_u_L2", "T_L2", "rho_u_L2", "eps_u_L2", "eps_rho_quarter_u_L4", "grad_rho_L2"] {
            assert_eq!(get(n), 0.0, "{n}");
        }
        assert!((get("rho_L1") - 2.0).abs() < 1e-14);
        assert!((get("rho_Lgamma") - 2.0).abs() < 1e-14);
        // (int_0^0.5 4 dt)^{1/2}
        assert!((get("rho_Linf") - 2f64.sqrt()).abs() < 1e-14);
        assert!((get("rho_gamma_half_L10/3") - 2f64 * 0.5f64.powf(0.3)).abs() < 1e-13);
    }

    #[test]
    fn monotone_under_truncation() {
        let times = [0.0, 0.1, 0.2, 0.3];
        let series: Vec<Vec<f64>> = (0..4).map(|k| vec![1.0 + k as f64; NORMS.len()]).collect();
        let full = aggregate(&times, &series);
        let part = aggregate(&times[..3], &series[..3]);
        for (a, b) in part.iter().zip(&full) {
            assert!(a.value <= b.value);
        }
    }
}
