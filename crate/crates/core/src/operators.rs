//! Momentum right-hand-side pieces: pressure, viscous stress, Korteweg
//! capillarity, the quantum (Bohm) correction and drag.

use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};
use crate::fields::{ScalarField, TensorField, VectorField};

/// Negative density entries above `-NEGATIVE_TOLERANCE` are clamped to 0.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

const SYMBOLIC_TOL: f64 = 1e-12;

/// Coefficient law `c * rho^a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub c: f64,
    pub a: f64,
}

impl PowerLaw {
    pub const fn new(c: f64, a: f64) -> Self {
        Self { c, a }
    }

    pub const fn zero() -> Self {
        Self { c: 0.0, a: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0.0
    }

    pub fn eval(&self, rho: f64) -> f64 {
        if self.c == 0.0 {
            0.0
        } else if self.a == 0.0 {
            self.c
        } else {
            self.c * rho.powf(self.a)
        }
    }

    pub fn derivative(&self) -> PowerLaw {
        if self.a == 0.0 {
            PowerLaw::zero()
        } else {
            PowerLaw::new(self.c * self.a, self.a - 1.0)
        }
    }

    /// `rho * f'(rho) - f(rho)`, again a power law.
    pub fn bd_partner(&self) -> PowerLaw {
        PowerLaw::new(self.c * (self.a - 1.0), self.a)
    }

    fn same_as(&self, other: &PowerLaw) -> bool {
        let both_zero = self.c.abs() < SYMBOLIC_TOL && other.c.abs() < SYMBOLIC_TOL;
        both_zero || ((self.c - other.c).abs() < SYMBOLIC_TOL && (self.a - other.a).abs() < SYMBOLIC_TOL)
    }

    /// Evaluate on a field; a negative exponent needs `rho > 0` everywhere.
    pub fn apply(&self, law: &'static str, rho: &ScalarField) -> Result<ScalarField> {
        if self.c != 0.0 && self.a < 0.0 && rho.min() <= 0.0 {
            return Err(NskError::SingularCoefficient {
                law,
                exponent: self.a,
            });
        }
        Ok(rho.map(|r| self.eval(r)).named(law))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Paper,
    Quantum,
    Custom,
}

/// Viscosity laws `h`, `g` and capillarity law `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub preset: Preset,
    pub h: PowerLaw,
    pub g: PowerLaw,
    pub k: PowerLaw,
}

impl CoefficientSet {
    /// `h = rho`, `g = 0`, `k = 1`.
    pub fn paper() -> Self {
        Self {
            preset: Preset::Paper,
            h: PowerLaw::new(1.0, 1.0),
            g: PowerLaw::zero(),
            k: PowerLaw::new(1.0, 0.0),
        }
    }

    /// `h = rho`, `g = 0`, `k = 1/rho`.
    pub fn quantum() -> Self {
        Self {
            preset: Preset::Quantum,
            h: PowerLaw::new(1.0, 1.0),
            g: PowerLaw::zero(),
            k: PowerLaw::new(1.0, -1.0),
        }
    }

    pub fn custom(h: PowerLaw, g: PowerLaw, k: PowerLaw) -> Result<Self> {
        if h.c < 0.0 || k.c < 0.0 {
            return Err(NskError::InvalidParameter(
                "h and k laws need a nonnegative prefactor".into(),
            ));
        }
        for (name, law) in [("h", h), ("g", g), ("k", k)] {
            if !(law.c.is_finite() && law.a.is_finite()) {
                return Err(NskError::InvalidParameter(format!("{name} law is not finite")));
            }
        }
        Ok(Self {
            preset: Preset::Custom,
            h,
            g,
            k,
        })
    }

    /// `g = rho h' - h`, decided on the exponents and prefactors.
    pub fn bd_compatible(&self) -> bool {
        self.g.same_as(&self.h.bd_partner())
    }

    /// `k = h'^2 / rho`, decided on the exponents and prefactors.
    pub fn satisfies_relation(&self) -> bool {
        let hp = self.h.derivative();
        let rhs = PowerLaw::new(hp.c * hp.c, 2.0 * hp.a - 1.0);
        self.k.same_as(&rhs)
    }

    /// Check `h >= 0` and `h + 3g >= 0` on samples of `[lo, hi]`.
    pub fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        let lo = lo.max(0.0);
        let samples = 257;
        for i in 0..samples {
            let r = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            if r == 0.0 && (self.h.a < 0.0 || self.g.a < 0.0) {
                continue;
            }
            let h = self.h.eval(r);
            let g = self.g.eval(r);
            if h < 0.0 || h + 3.0 * g < -1e-14 * h.abs().max(1.0) {
                return Err(NskError::InvalidParameter(format!(
                    "viscosity laws violate h >= 0, h + 3g >= 0 at rho = {r:e}"
                )));
            }
        }
        Ok(())
    }
}

/// Adiabatic exponent, regularization strength and coefficient laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub gamma: f64,
    pub epsilon: f64,
    pub coefficients: CoefficientSet,
}

impl PhysicsParams {
    pub fn new(gamma: f64, epsilon: f64, coefficients: CoefficientSet) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(NskError::InvalidParameter(format!("gamma must exceed 1 (got {gamma})")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(NskError::InvalidParameter(format!(
                "epsilon must be nonnegative (got {epsilon})"
            )));
        }
        Ok(Self {
            gamma,
            epsilon,
            coefficients,
        })
    }
}

/// Clamp tiny negative round-off to zero; reject genuinely negative density.
pub fn checked_density(rho: &ScalarField) -> Result<ScalarField> {
    let min = rho.min();
    if min < -NEGATIVE_TOLERANCE {
        return Err(NskError::NegativeDensity { min });
    }
    Ok(rho.map(|r| r.max(0.0)))
}

/// Require `rho >= floor > 0` everywhere.
pub fn require_floor(rho: &ScalarField, floor: f64) -> Result<()> {
    match rho.values().iter().position(|&r| r < floor) {
        Some(index) => Err(NskError::VacuumViolation {
            value: rho.values()[index],
            index,
            floor,
        }),
        None => Ok(()),
    }
}

/// `grad rho^gamma`.
pub fn pressure_gradient(rho: &ScalarField, gamma: f64) -> Result<VectorField> {
    let rho = checked_density(rho)?;
    Ok(rho.map(|r| r.powf(gamma)).grad())
}

/// `2 rho^{gamma/2} grad rho^{gamma/2}`, the weak-form factorization.
pub fn pressure_gradient_factorized(rho: &ScalarField, gamma: f64) -> Result<VectorField> {
    let rho = checked_density(rho)?;
    let half = rho.map(|r| r.powf(gamma / 2.0));
    Ok(half.grad().times(&half).scaled(2.0))
}

/// `S = h(rho) Du + g(rho) (div u) I`.
pub fn viscous_stress(rho: &ScalarField, u: &VectorField, coef: &CoefficientSet) -> Result<TensorField> {
    let h = coef.h.apply("h", rho)?;
    let mut s = u.sym_grad().times(&h);
    if !coef.g.is_zero() {
        let g = coef.g.apply("g", rho)?;
        s = s.add(&TensorField::isotropic(&(&g * &u.div())));
    }
    Ok(s)
}

/// `div S`.
pub fn viscous_divergence(rho: &ScalarField, u: &VectorField, coef: &CoefficientSet) -> Result<VectorField> {
    Ok(viscous_stress(rho, u, coef)?.div())
}

/// `grad(rho div(k grad rho) - (rho k' - k)|grad rho|^2 / 2) - div(k grad rho (x) grad rho)`.
pub fn korteweg_divergence(rho: &ScalarField, coef: &CoefficientSet) -> Result<VectorField> {
    let k = coef.k.apply("k", rho)?;
    let kp = coef.k.derivative().apply("k'", rho)?;
    let gr = rho.grad();
    let kgr = gr.times(&k);
    let weight = &(rho * &kp) - &k;
    let scalar = &(rho * &kgr.div()) - &(&weight * &gr.norm_sq()).scaled(0.5);
    let tensor = kgr.outer(&gr);
    Ok(scalar.grad().sub(&tensor.div()))
}

/// `rho grad Lap rho`.
pub fn capillarity_simple(rho: &ScalarField) -> VectorField {
    rho.laplacian().grad().times(rho)
}

/// `-int (Lap rho grad rho . psi + rho Lap rho div psi)`, which equals
/// `int rho grad Lap rho . psi` after one integration by parts.
pub fn capillarity_weak_pairing(rho: &ScalarField, psi: &VectorField) -> f64 {
    let lap = rho.laplacian();
    let a = &lap * &rho.grad().dot(psi);
    let b = &(rho * &lap) * &psi.div();
    -(&a + &b).integrate()
}

/// `eps rho grad(Lap sqrt(rho) / sqrt(rho))`; needs `rho >= floor > 0`.
pub fn quantum_correction(rho: &ScalarField, epsilon: f64, floor: f64) -> Result<VectorField> {
    if epsilon == 0.0 {
        return Ok(VectorField::zeros(rho.grid()));
    }
    if !(floor > 0.0) {
        return Err(NskError::InvalidParameter("Bohm potential needs a positive floor".into()));
    }
    require_floor(rho, floor)?;
    let s = rho.map(f64::sqrt);
    let q = s.laplacian().zip_map(&s, |l, s| l / s);
    Ok(q.grad().times(rho).scaled(epsilon))
}

/// `sqrt(rho) Hess sqrt(rho) - grad sqrt(rho) (x) grad sqrt(rho)`.
pub fn quantum_tensor(rho: &ScalarField) -> Result<TensorField> {
    let s = checked_density(rho)?.map(f64::sqrt);
    let gs = s.grad();
    Ok(s.hessian().times(&s).sub(&gs.outer(&gs)))
}

/// `eps div(quantum_tensor)`, the conservative form of the Bohm force.
pub fn quantum_correction_divergence_form(rho: &ScalarField, epsilon: f64) -> Result<VectorField> {
    if epsilon == 0.0 {
        return Ok(VectorField::zeros(rho.grid()));
    }
    Ok(quantum_tensor(rho)?.div().scaled(epsilon))
}

/// `eps (rho |u|^2 + 1) u`, the drag on the left-hand side.
pub fn drag_terms(rho: &ScalarField, u: &VectorField, epsilon: f64) -> VectorField {
    if epsilon == 0.0 {
        return VectorField::zeros(rho.grid());
    }
    let w = (rho * &u.norm_sq()).map(|v| epsilon * (v + 1.0));
    u.times(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: &VectorField, b: &VectorField) -> f64 {
        a.sub(b).lp_norm(2.0) / b.lp_norm(2.0).max(1e-300)
    }

    fn sin1(g: &Grid, c: f64, a: f64) -> ScalarField {
        ScalarField::from_fn(g, |x| c + a * (2.0 * PI * x[0]).sin())
    }

    #[test]
    fn presets_flags() {
        let p = CoefficientSet::paper();
        assert!(p.bd_compatible());
        assert!(!p.satisfies_relation());
        let q = CoefficientSet::quantum();
        assert!(q.bd_compatible());
        assert!(q.satisfies_relation());
        let c = CoefficientSet::custom(PowerLaw::new(1.0, 2.0), PowerLaw::new(1.0, 2.0), PowerLaw::new(4.0, 1.0)).unwrap();
        assert!(c.bd_compatible());
        assert!(c.satisfies_relation());
        let bad = CoefficientSet::custom(PowerLaw::new(1.0, 0.5), PowerLaw::new(-1.0, 0.5), PowerLaw::zero()).unwrap();
        assert!(bad.check_range(0.0, 2.0).is_err());
        assert!(p.check_range(0.0, 10.0).is_ok());
        assert!(PhysicsParams::new(1.0, 0.0, p).is_err());
        assert!(PhysicsParams::new(2.0, -1.0, p).is_err());
    }

    #[test]
    fn constant_inputs_vanish() {
        let g = Grid::new(2, 16).unwrap();
        let rho = ScalarField::constant(&g, 1.3);
        let u = VectorField::constant(&g, &[0.4, -1.0]);
        let p = CoefficientSet::paper();
        assert!(pressure_gradient(&rho, 2.0).unwrap().max_abs() < 1e-12);
        assert!(viscous_divergence(&rho, &u, &p).unwrap().max_abs() < 1e-12);
        assert!(korteweg_divergence(&rho, &p).unwrap().max_abs() < 1e-12);
        assert!(korteweg_divergence(&rho, &CoefficientSet::quantum()).unwrap().max_abs() < 1e-12);
        assert!(capillarity_simple(&rho).max_abs() < 1e-12);
        assert!(quantum_correction(&rho, 0.3, 1e-8).unwrap().max_abs() < 1e-12);
        assert_eq!(quantum_correction(&rho, 0.0, 1e-8).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn pressure_matches_symbolic_and_factorized() {
        let g = Grid::new(1, 64).unwrap();
        let rho = sin1(&g, 1.0, 0.1);
        let exact = VectorField::from_fn(&g, |x| {
            let r = 1.0 + 0.1 * (2.0 * PI * x[0]).sin();
            vec![2.0 * r * 0.1 * 2.0 * PI * (2.0 * PI * x[0]).cos()]
        });
        assert!(rel(&pressure_gradient(&rho, 2.0).unwrap(), &exact) < 1e-9);

        let g3 = Grid::new(3, 16).unwrap();
        let r = ScalarField::from_fn(&g3, |x| {
            1.5 + 0.3 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin() + 0.2 * (2.0 * PI * x[2]).sin()
        });
        let a = pressure_gradient(&r, 1.5).unwrap();
        let b = pressure_gradient_factorized(&r, 1.5).unwrap();
        assert!(rel(&a, &b) < 1e-8);
    }

    #[test]
    fn negative_density_is_rejected_or_clamped() {
        let g = Grid::new(1, 8).unwrap();
        let mut v = vec![1.0; 8];
        v[2] = -1e-14;
        let ok = ScalarField::new(&g, v.clone(), "rho").unwrap();
        assert!(pressure_gradient(&ok, 2.0).is_ok());
        v[2] = -1e-3;
        let bad = ScalarField::new(&g, v, "rho").unwrap();
        let err = pressure_gradient(&bad, 2.0).unwrap_err();
        assert!(err.to_string().contains("-1e-3"));
    }

    #[test]
    fn viscous_shear_matches_symbolic() {
        let g = Grid::new(3, 16).unwrap();
        let rho = ScalarField::constant(&g, 1.0);
        let u = VectorField::from_fn(&g, |x| vec![(2.0 * PI * x[1]).sin(), 0.0, 0.0]);
        let got = viscous_divergence(&rho, &u, &CoefficientSet::paper()).unwrap();
        // div(Du) = (Lap u + grad div u) / 2
        let exact = VectorField::from_fn(&g, |x| vec![-2.0 * PI * PI * (2.0 * PI * x[1]).sin(), 0.0, 0.0]);
        assert!(rel(&got, &exact) < 1e-10);
    }

    #[test]
    fn isolated_g_term_is_grad_lap() {
        let g = Grid::new(2, 32).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos());
        let u = f.grad();
        let coef = CoefficientSet::custom(PowerLaw::zero(), PowerLaw::new(1.0, 0.0), PowerLaw::zero()).unwrap();
        let rho = ScalarField::constant(&g, 1.0);
        let got = viscous_divergence(&rho, &u, &coef).unwrap();
        assert!(rel(&got, &f.laplacian().grad()) < 1e-9);
    }

    #[test]
    fn korteweg_unit_k_is_simple_capillarity() {
        let g = Grid::new(2, 32).unwrap();
        let rho = ScalarField::from_fn(&g, |x| 2.0 + 0.5 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
        let a = korteweg_divergence(&rho, &CoefficientSet::paper()).unwrap();
        assert!(rel(&a, &capillarity_simple(&rho)) < 1e-8);
    }

    #[test]
    fn korteweg_quantum_is_bohm_form() {
        let g = Grid::new(1, 128).unwrap();
        let rho = sin1(&g, 2.0, 1.0);
        let a = korteweg_divergence(&rho, &CoefficientSet::quantum()).unwrap();
        let b = quantum_correction(&rho, 2.0, 1e-6).unwrap();
        assert!(rel(&a, &b) < 1e-6);
    }

    #[test]
    fn quantum_forms_agree_and_floor_is_enforced() {
        let g = Grid::new(1, 128).unwrap();
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).cos());
        let a = quantum_correction(&rho, 0.7, 1e-8).unwrap();
        let b = quantum_correction_divergence_form(&rho, 0.7).unwrap();
        assert!(rel(&a, &b) < 1e-6);
        let low = sin1(&g, 1.0, 1.0);
        let err = quantum_correction(&low, 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, NskError::VacuumViolation { .. }));
    }

    #[test]
    fn weak_capillarity_pairing() {
        let g = Grid::new(2, 32).unwrap();
        let rho = ScalarField::from_fn(&g, |x| 1.5 + 0.4 * (2.0 * PI * x[0]).cos() + 0.2 * (2.0 * PI * x[1]).sin());
        let psi = VectorField::from_fn(&g, |x| vec![(2.0 * PI * x[1]).cos(), (2.0 * PI * (x[0] + x[1])).sin()]);
        let strong = capillarity_simple(&rho).dot(&psi).integrate();
        assert!((strong - capillarity_weak_pairing(&rho, &psi)).abs() < 1e-8);
    }

    #[test]
    fn drag_formula() {
        let g = Grid::new(3, 8).unwrap();
        let rho = ScalarField::constant(&g, 1.0);
        let u = VectorField::constant(&g, &[1.0, 0.0, 0.0]);
        let d = drag_terms(&rho, &u, 0.25);
        assert!((d.component(0).values()[5] - 0.5).abs() < 1e-15);
        assert_eq!(drag_terms(&rho, &u, 0.0).max_abs(), 0.0);
        assert_eq!(drag_terms(&rho, &VectorField::zeros(&g), 0.3).max_abs(), 0.0);
    }

    #[test]
    fn singular_law_at_vacuum_errors() {
        let g = Grid::new(1, 8).unwrap();
        let rho = ScalarField::from_fn(&g, |x| x[0]);
        let err = korteweg_divergence(&rho, &CoefficientSet::quantum()).unwrap_err();
        assert!(matches!(err, NskError::SingularCoefficient { .. }));
    }

    fn band_limited(g: &Grid, coeffs: &[(f64, f64)]) -> ScalarField {
        ScalarField::from_fn(g, |x| {
            let mut v = 3.0;
            for (j, (a, b)) in coeffs.iter().enumerate() {
                let k = (j / 2 + 1) as f64;
                let phase = 2.0 * PI * k * if j % 2 == 0 { x[0] } else { x[0] + x[1] };
                v += a * phase.cos() + b * phase.sin();
            }
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn korteweg_unit_k_matches_randomized(coeffs in prop::collection::vec((-0.25f64..0.25, -0.25f64..0.25), 1..6)) {
            let g = Grid::new(2, 32).unwrap();
            let rho = band_limited(&g, &coeffs);
            let a = korteweg_divergence(&rho, &CoefficientSet::paper()).unwrap();
            let b = capillarity_simple(&rho);
            prop_assert!(a.sub(&b).lp_norm(2.0) <= 1e-8 * b.lp_norm(2.0).max(1.0));
        }

        #[test]
        fn divergence_forms_have_zero_mean(coeffs in prop::collection::vec((-0.25f64..0.25, -0.25f64..0.25), 1..6)) {
            let g = Grid::new(2, 32).unwrap();
            let rho = band_limited(&g, &coeffs);
            let u = VectorField::from_fn(&g, |x| vec![(2.0 * PI * x[1]).sin() + coeffs[0].0, (2.0 * PI * x[0]).cos()]);
            for c in [CoefficientSet::paper(), CoefficientSet::quantum()] {
                for m in viscous_divergence(&rho, &u, &c).unwrap().integrate() {
                    prop_assert!(m.abs() < 1e-10);
                }
                for m in korteweg_divergence(&rho, &c).unwrap().integrate() {
                    prop_assert!(m.abs() < 1e-10);
                }
            }
        }
    }
}
