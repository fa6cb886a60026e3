//! Truncation functions used by the renormalized energy argument: the bump
//! `bar_beta`, its antiderivative `tilde_beta`, the product truncations
//! `beta_l`, `beta_hat`, `bar_beta_lambda` and the density cutoff `phi_m`.

use serde::Serialize;

use crate::error::{NskError, Result};
use crate::fields::{ScalarField, VectorField};

/// Maximum of the smoothstep derivative `s'(t) = 30 t^2 (t-1)^2`.
pub const SMOOTHSTEP_D1_MAX: f64 = 1.875;

/// `tilde_beta(z)` for `|z| >= 2`.
pub const TILDE_MAX: f64 = 1.5;

fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        t3 * (10.0 + t * (6.0 * t - 15.0)),
        30.0 * t2 * (t - 1.0) * (t - 1.0),
        60.0 * t * (2.0 * t - 1.0) * (t - 1.0),
    )
}

/// The C^2 even bump: 1 on `[-1,1]`, `1 - s(|z|-1)` on `1 < |z| < 2`, 0
/// beyond, with `s` the quintic smoothstep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BumpProfile;

impl BumpProfile {
    /// `max |s''| = 10/sqrt(3)`, attained at `t = (1 - 1/sqrt(3))/2`.
    pub fn d2_max(&self) -> f64 {
        10.0 / 3f64.sqrt()
    }

    pub fn d1_max(&self) -> f64 {
        SMOOTHSTEP_D1_MAX
    }

    /// `K = max(|bar|_inf, |bar'|_inf, |bar''|_inf)`.
    pub fn k_norm(&self) -> f64 {
        1f64.max(self.d1_max()).max(self.d2_max())
    }

    pub fn tilde_max(&self) -> f64 {
        TILDE_MAX
    }

    pub fn bar(&self, z: f64) -> f64 {
        self.bar_jet(z).0
    }

    /// Value, first and second derivative of the bump.
    pub fn bar_jet(&self, z: f64) -> (f64, f64, f64) {
        let a = z.abs();
        if a <= 1.0 {
            (1.0, 0.0, 0.0)
        } else if a < 2.0 {
            let (s, s1, s2) = smoothstep(a - 1.0);
            (1.0 - s, -s1 * z.signum(), -s2)
        } else {
            (0.0, 0.0, 0.0)
        }
    }

    /// `tilde_beta(z) = int_0^z bar`.
    pub fn tilde(&self, z: f64) -> f64 {
        let a = z.abs();
        let v = if a <= 1.0 {
            a
        } else if a < 2.0 {
            let t = a - 1.0;
            let t4 = t * t * t * t;
            a - t4 * (t * t - 3.0 * t + 2.5)
        } else {
            TILDE_MAX
        };
        v.copysign(z)
    }
}

/// Value, gradient and Hessian of a function of `y` in `R^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub dim: usize,
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl Jet {
    pub fn grad_norm(&self) -> f64 {
        self.grad[..self.dim].iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn hess_norm(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                s += self.hess[a][b] * self.hess[a][b];
            }
        }
        s.sqrt()
    }
}

/// Jet of a product `prod_j F_j(y_j)` from per-axis jets.
fn product_jet(factors: &[(f64, f64, f64)]) -> Jet {
    let d = factors.len();
    let others = |skip: &[usize]| -> f64 {
        factors
            .iter()
            .enumerate()
            .filter(|(j, _)| !skip.contains(j))
            .map(|(_, f)| f.0)
            .product()
    };
    let mut jet = Jet {
        dim: d,
        value: others(&[]),
        grad: [0.0; 3],
        hess: [[0.0; 3]; 3],
    };
    for a in 0..d {
        jet.grad[a] = factors[a].1 * others(&[a]);
        jet.hess[a][a] = factors[a].2 * others(&[a]);
        for b in 0..a {
            let v = factors[a].1 * factors[b].1 * others(&[a, b]);
            jet.hess[a][b] = v;
            jet.hess[b][a] = v;
        }
    }
    jet
}

/// `beta_delta^l(y) = tilde(delta y_l)/delta * prod_{j != l} bar(delta y_j)`.
pub fn beta_l(y: &[f64], l: usize, delta: f64, profile: &BumpProfile) -> Jet {
    let factors: Vec<(f64, f64, f64)> = y
        .iter()
        .enumerate()
        .map(|(j, &yj)| {
            let z = delta * yj;
            let (b, b1, b2) = profile.bar_jet(z);
            if j == l {
                (profile.tilde(z) / delta, b, delta * b1)
            } else {
                (b, delta * b1, delta * delta * b2)
            }
        })
        .collect();
    product_jet(&factors)
}

/// `beta_hat_delta(y) = prod_j bar(delta y_j)`.
pub fn beta_hat(y: &[f64], delta: f64, profile: &BumpProfile) -> Jet {
    let factors: Vec<(f64, f64, f64)> = y
        .iter()
        .map(|&yj| {
            let (b, b1, b2) = profile.bar_jet(delta * yj);
            (b, delta * b1, delta * delta * b2)
        })
        .collect();
    product_jet(&factors)
}

/// `bar_beta_lambda(s) = bar(lambda s)` and its derivative in `s`.
pub fn beta_bar(s: f64, lambda: f64, profile: &BumpProfile) -> (f64, f64) {
    let (b, b1, _) = profile.bar_jet(lambda * s);
    (b, lambda * b1)
}

/// Piecewise-linear cutoff `phi_m` and its left derivative.
pub fn phi_m(y: f64, m: f64) -> (f64, f64) {
    let lo = 0.5 / m;
    if y <= lo {
        (0.0, 0.0)
    } else if y <= 1.0 / m {
        (2.0 * m * y - 1.0, 2.0 * m)
    } else if y <= m {
        (1.0, 0.0)
    } else if y <= 2.0 * m {
        (2.0 - y / m, -1.0 / m)
    } else {
        (0.0, 0.0)
    }
}

/// Truncation parameters `delta`, `lambda` and the cutoff index `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationParams {
    pub delta: f64,
    pub lambda: f64,
    pub m_cutoff: f64,
    pub profile: BumpProfile,
    /// Set when `delta = lambda^alpha`.
    pub alpha: Option<f64>,
}

impl TruncationParams {
    pub fn new(delta: f64, lambda: f64, m_cutoff: f64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("lambda", lambda)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NskError::InvalidParameter(format!("{name} must be positive (got {v})")));
            }
        }
        if !(m_cutoff >= 1.0 && m_cutoff.is_finite()) {
            return Err(NskError::InvalidParameter(format!("m must be at least 1 (got {m_cutoff})")));
        }
        Ok(Self {
            delta,
            lambda,
            m_cutoff,
            profile: BumpProfile,
            alpha: None,
        })
    }

    /// `delta = lambda^alpha` with `alpha` in `(1/2, 1)`.
    pub fn alpha_linked(lambda: f64, alpha: f64, m_cutoff: f64) -> Result<Self> {
        if !(alpha > 0.5 && alpha < 1.0) {
            return Err(NskError::InvalidParameter(format!(
                "alpha must lie in (1/2, 1) (got {alpha})"
            )));
        }
        let mut p = Self::new(lambda.powf(alpha), lambda, m_cutoff)?;
        p.alpha = Some(alpha);
        Ok(p)
    }
}

pub fn lift_beta_bar(s: &ScalarField, lambda: f64, profile: &BumpProfile) -> ScalarField {
    s.map(|v| beta_bar(v, lambda, profile).0)
}

pub fn lift_phi_m(rho: &ScalarField, m: f64) -> ScalarField {
    rho.map(|v| phi_m(v, m).0)
}

fn lift_vector(u: &VectorField, f: impl Fn(&[f64]) -> f64) -> ScalarField {
    let d = u.dim();
    let n = u.grid().len();
    let mut out = Vec::with_capacity(n);
    let mut y = [0.0; 3];
    for i in 0..n {
        for (a, slot) in y.iter_mut().enumerate().take(d) {
            *slot = u.component(a).values()[i];
        }
        out.push(f(&y[..d]));
    }
    ScalarField::new(u.grid(), out, "lift").expect("truncations are finite on finite input")
}

pub fn lift_beta_l(u: &VectorField, l: usize, delta: f64, profile: &BumpProfile) -> ScalarField {
    lift_vector(u, |y| beta_l(y, l, delta, profile).value)
}

pub fn lift_beta_hat(u: &VectorField, delta: f64, profile: &BumpProfile) -> ScalarField {
    lift_vector(u, |y| beta_hat(y, delta, profile).value)
}

/// One line of the bound suite.
#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub name: &'static str,
    pub param: f64,
    pub measured: f64,
    pub certified: f64,
    pub pass: bool,
}

/// Certified constants derived from the profile for dimension `d`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundConstants {
    /// `|beta_l| <= c0 / delta`.
    pub c0: f64,
    /// `|grad beta_l| <= c1`.
    pub c1: f64,
    /// `|hess beta_l| <= c2 delta` (Frobenius).
    pub c2: f64,
    /// `|grad beta_hat| <= c_hat1 delta`.
    pub c_hat1: f64,
    /// `|y| beta_hat <= c_hat_y / delta`.
    pub c_hat_y: f64,
    /// `sqrt|s| bar_lambda(s) <= c_bel / sqrt(lambda)`.
    pub c_bel: f64,
    /// `|bar_lambda'| <= c_bel1 lambda`.
    pub c_bel1: f64,
    /// `|y phi_m'(y)| <= c_phi`.
    pub c_phi: f64,
}

impl BoundConstants {
    pub fn for_profile(profile: &BumpProfile, dim: usize) -> Self {
        let t = profile.tilde_max();
        let b1 = profile.d1_max();
        let b2 = profile.d2_max();
        let others = (dim - 1) as f64;
        // Hessian entries: ll and lj carry one bar', jj carries tilde*bar'',
        // jk carries tilde*bar'^2.
        let cross = if dim == 3 { 2.0 } else { 0.0 };
        let c2 = (b1 * b1 + 2.0 * others * b1 * b1 + others * (t * b2).powi(2) + cross * (t * b1 * b1).powi(2)).sqrt();
        Self {
            c0: t,
            c1: (1.0 + others * (t * b1).powi(2)).sqrt(),
            c2,
            c_hat1: (dim as f64).sqrt() * b1,
            c_hat_y: 2.0 * (dim as f64).sqrt(),
            c_bel: 2f64.sqrt(),
            c_bel1: b1,
            c_phi: 2.0,
        }
    }
}

/// Deterministic sample points in `[-width, width]^d`, about `count` total.
fn sample_cube(dim: usize, count: usize, width: f64) -> Vec<[f64; 3]> {
    let per = ((count as f64).powf(1.0 / dim as f64).ceil() as usize).max(2);
    let total = per.pow(dim as u32);
    (0..total)
        .map(|mut i| {
            let mut p = [0.0; 3];
            for slot in p.iter_mut().take(dim) {
                let k = i % per;
                i /= per;
                *slot = -width + 2.0 * width * k as f64 / (per - 1) as f64;
            }
            p
        })
        .collect()
}

fn row(name: &'static str, param: f64, measured: f64, certified: f64) -> BoundRow {
    BoundRow {
        name,
        param,
        measured,
        certified,
        pass: measured <= certified * (1.0 + 1e-12),
    }
}

/// Measure every truncation bound by dense sampling for
/// `delta, lambda in {2^0, ..., 2^-max_exp}`.
pub fn run_bound_suite(dim: usize, max_exp: u32, samples: usize) -> Vec<BoundRow> {
    let profile = BumpProfile;
    let c = BoundConstants::for_profile(&profile, dim);
    let mut rows = Vec::new();
    let unit = sample_cube(dim, samples, 2.5);
    for e in 0..=max_exp {
        let delta = 2f64.powi(-(e as i32));
        let (mut s0, mut s1, mut s2) = (0.0f64, 0.0f64, 0.0f64);
        let (mut h0, mut h1, mut hy) = (0.0f64, 0.0f64, 0.0f64);
        for z in &unit {
            let y: Vec<f64> = z[..dim].iter().map(|v| v / delta).collect();
            for l in 0..dim {
                let j = beta_l(&y, l, delta, &profile);
                s0 = s0.max(j.value.abs());
                s1 = s1.max(j.grad_norm());
                s2 = s2.max(j.hess_norm());
            }
            let h = beta_hat(&y, delta, &profile);
            let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            h0 = h0.max(h.value.abs());
            h1 = h1.max(h.grad_norm());
            hy = hy.max(ynorm * h.value);
        }
        rows.push(row("beta_l_sup_times_delta", delta, s0 * delta, c.c0));
        rows.push(row("beta_l_grad_sup", delta, s1, c.c1));
        rows.push(row("beta_l_hess_sup_over_delta", delta, s2 / delta, c.c2));
        rows.push(row("beta_hat_sup", delta, h0, 1.0));
        rows.push(row("beta_hat_grad_sup_over_delta", delta, h1 / delta, c.c_hat1));
        rows.push(row("y_beta_hat_sup_times_delta", delta, hy * delta, c.c_hat_y));

        let lambda = delta;
        let (mut b0, mut b1) = (0.0f64, 0.0f64);
        for i in 0..samples {
            let s = -2.5 / lambda + 5.0 / lambda * i as f64 / (samples - 1) as f64;
            let (v, dv) = beta_bar(s, lambda, &profile);
            b0 = b0.max(s.abs().sqrt() * v);
            b1 = b1.max(dv.abs());
        }
        rows.push(row("sqrt_s_beta_bar_times_sqrt_lambda", lambda, b0 * lambda.sqrt(), c.c_bel));
        rows.push(row("beta_bar_deriv_over_lambda", lambda, b1 / lambda, c.c_bel1));
    }
    for m in [1.0, 2.0, 4.0, 16.0, 64.0, 1024.0] {
        let (mut yp, mut sup) = (0.0f64, 0.0f64);
        for i in 0..samples {
            let y = 3.0 * m * i as f64 / (samples - 1) as f64;
            let (v, dv) = phi_m(y, m);
            yp = yp.max((y * dv).abs());
            sup = sup.max(v.abs());
        }
        rows.push(row("y_phi_m_deriv_sup", m, yp, c.c_phi));
        rows.push(row("phi_m_sup", m, sup, 1.0));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: BumpProfile = BumpProfile;

    #[test]
    fn profile_shape() {
        assert_eq!(P.bar(0.3), 1.0);
        assert_eq!(P.bar(-1.0), 1.0);
        assert_eq!(P.bar(2.0), 0.0);
        assert_eq!(P.bar(-3.0), 0.0);
        assert!((P.bar(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(P.tilde(0.7), 0.7);
        assert_eq!(P.tilde(-0.7), -0.7);
        assert!((P.tilde(2.0) - 1.5).abs() < 1e-15);
        assert_eq!(P.tilde(5.0), 1.5);
        // K from the quintic
        assert!((P.k_norm() - 5.773502691896258).abs() < 1e-12);
    }

    #[test]
    fn tilde_is_antiderivative_of_bar() {
        // composite Simpson on [0, z]
        for z in [0.5, 1.2, 1.7, 2.0, 2.6] {
            let n = 2000;
            let h = z / n as f64;
            let mut s = P.bar(0.0) + P.bar(z);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * P.bar(i as f64 * h);
            }
            assert!((s * h / 3.0 - P.tilde(z)).abs() < 1e-9);
        }
    }

    #[test]
    fn beta_l_plateau_is_identity() {
        let delta = 0.125;
        for y in [[3.0, -7.9, 8.0], [0.0, 0.0, 0.0], [-8.0, 1.0, 2.0]] {
            for l in 0..3 {
                assert_eq!(beta_l(&y, l, delta, &P).value, y[l]);
            }
        }
        assert_eq!(beta_hat(&[0.0, 0.0], 1.0, &P).value, 1.0);
        assert_eq!(beta_bar(0.0, 3.0, &P).0, 1.0);
    }

    #[test]
    fn phi_m_examples() {
        assert_eq!(phi_m(1.0, 4.0).0, 1.0);
        assert_eq!(phi_m(1.0 / 8.0, 4.0).0, 0.0);
        assert!((phi_m(6.0, 4.0).0 - 0.5).abs() < 1e-15);
        assert_eq!(phi_m(0.0, 4.0), (0.0, 0.0));
        // left derivative at the kinks
        assert_eq!(phi_m(0.25, 4.0).1, 8.0);
        assert_eq!(phi_m(4.0, 4.0).1, 0.0);
        assert_eq!(phi_m(8.0, 4.0).1, -0.25);
    }

    #[test]
    fn phi_m_tends_to_one() {
        for y in [1e-3, 0.5, 3.0, 1e3] {
            let mut m = 1.0;
            while m < 1e5 {
                m *= 2.0;
            }
            assert_eq!(phi_m(y, m).0, 1.0);
        }
    }

    #[test]
    fn bound_suite_passes() {
        for dim in 1..=3 {
            let rows = run_bound_suite(dim, 10, 20_000);
            for r in &rows {
                assert!(r.pass, "{dim}D {} at {}: {} > {}", r.name, r.param, r.measured, r.certified);
            }
        }
    }

    #[test]
    fn convergence_is_monotone_and_exact() {
        let y = [3.3, -1.7, 0.4];
        let mut prev = f64::INFINITY;
        let mut prev_hat = f64::INFINITY;
        let mut prev_bar = f64::INFINITY;
        for k in 0..12 {
            let delta = 2f64.powi(-k);
            let e = (beta_l(&y, 0, delta, &P).value - y[0]).abs();
            let eh = (beta_hat(&y, delta, &P).value - 1.0).abs();
            let eb = (beta_bar(y[0], delta, &P).0 - 1.0).abs();
            assert!(e <= prev && eh <= prev_hat && eb <= prev_bar);
            prev = e;
            prev_hat = eh;
            prev_bar = eb;
        }
        assert_eq!(prev, 0.0);
        assert_eq!(prev_hat, 0.0);
        assert_eq!(prev_bar, 0.0);
    }

    #[test]
    fn lifts() {
        let g = crate::fields::Grid::new(2, 8).unwrap();
        let zero = ScalarField::zeros(&g);
        assert_eq!(lift_beta_bar(&zero, 0.5, &P).min(), 1.0);
        let u = VectorField::from_fn(&g, |x| vec![x[0] - 0.5, 2.0 * x[1]]);
        let b = lift_beta_l(&u, 1, 0.25, &P);
        assert_eq!(b.values(), u.component(1).values());
        assert_eq!(lift_phi_m(&ScalarField::constant(&g, 1.0), 2.0).min(), 1.0);
    }

    fn fd_check(y: [f64; 3], l: usize, delta: f64) -> std::result::Result<(), TestCaseError> {
        let h = 1e-5 / delta;
        let j = beta_l(&y, l, delta, &P);
        for a in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[a] += h;
            ym[a] -= h;
            let jp = beta_l(&yp, l, delta, &P);
            let jm = beta_l(&ym, l, delta, &P);
            let g = (jp.value - jm.value) / (2.0 * h);
            prop_assert!((g - j.grad[a]).abs() <= 1e-6 * j.grad_norm().max(1.0));
            for b in 0..3 {
                let hb = (jp.grad[b] - jm.grad[b]) / (2.0 * h);
                prop_assert!((hb - j.hess[a][b]).abs() <= 1e-6 * delta.max(j.hess_norm()));
            }
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(
            z in prop::array::uniform3(-2.4f64..2.4),
            l in 0usize..3,
            e in 0i32..6,
        ) {
            // stay away from the seams at |z| = 1, 2
            prop_assume!(z.iter().all(|v| (v.abs() - 1.0).abs() > 1e-3 && (v.abs() - 2.0).abs() > 1e-3));
            let delta = 2f64.powi(-e);
            let y = [z[0] / delta, z[1] / delta, z[2] / delta];
            fd_check(y, l, delta)?;
        }

        #[test]
        fn truncations_stay_bounded(y in prop::array::uniform3(-1e6f64..1e6), e in 0i32..11) {
            let delta = 2f64.powi(-e);
            for l in 0..3 {
                let v = beta_l(&y, l, delta, &P).value;
                prop_assert!(v.is_finite() && v.abs() <= 1.5 / delta);
            }
            let h = beta_hat(&y, delta, &P).value;
            prop_assert!((0.0..=1.0).contains(&h));
            let (p, _) = phi_m(y[0].abs(), 1.0 + e as f64);
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
