use super::{velocity_of, State};
use crate::error::{NskError, Result};
use crate::fields::{ScalarField, VectorField};
use crate::operators::{
    drag_terms, korteweg_divergence, pressure_gradient, quantum_correction_divergence_form,
    viscous_divergence,
};

/// Magnitude above which a tendency counts as blown up.
pub const BLOWUP_MAGNITUDE: f64 = 1e100;

/// Every right-hand-side contribution, kept separately for diagnostics.
#[derive(Clone, Debug)]
pub struct RhsTerms {
    /// `-div m`.
    pub drho: ScalarField,
    /// `-div(m (x) u)`.
    pub convection: VectorField,
    /// `div S`.
    pub viscous: VectorField,
    /// `-grad rho^gamma`.
    pub pressure: VectorField,
    /// `-eps (rho |u|^2 + 1) u`.
    pub drag: VectorField,
    /// `div K`.
    pub korteweg: VectorField,
    /// `eps div(sqrt(rho) Hess sqrt(rho) - grad sqrt(rho) (x) grad sqrt(rho))`.
    pub bohm: VectorField,
}

impl RhsTerms {
    pub fn momentum(&self) -> VectorField {
        self.convection
            .add(&self.viscous)
            .add(&self.pressure)
            .add(&self.drag)
            .add(&self.korteweg)
            .add(&self.bohm)
    }

    pub fn named_terms(&self) -> [(&'static str, &VectorField); 6] {
        [
            ("convection", &self.convection),
            ("viscous", &self.viscous),
            ("pressure", &self.pressure),
            ("drag", &self.drag),
            ("korteweg", &self.korteweg),
            ("bohm", &self.bohm),
        ]
    }

    /// First term that is non-finite or exceeds [`BLOWUP_MAGNITUDE`].
    pub fn check(&self, stage: usize) -> Result<()> {
        let rho_mag = self.drho.max_abs();
        if !rho_mag.is_finite() || rho_mag > BLOWUP_MAGNITUDE || self.drho.check_finite().is_err() {
            return Err(NskError::BlowUp {
                stage,
                term: "continuity".into(),
                magnitude: rho_mag,
            });
        }
        for (name, f) in self.named_terms() {
            let mag = f.max_abs();
            if !mag.is_finite() || mag > BLOWUP_MAGNITUDE || f.check_finite().is_err() {
                return Err(NskError::BlowUp {
                    stage,
                    term: name.into(),
                    magnitude: mag,
                });
            }
        }
        Ok(())
    }
}

/// Assemble all terms at `state` with velocity floor `floor`.
pub fn rhs(state: &State, floor: f64) -> Result<RhsTerms> {
    let p = &state.params;
    let rho = &state.rho;
    let u = velocity_of(rho, &state.m, floor);
    Ok(RhsTerms {
        drho: -&state.m.div(),
        convection: state.m.outer(&u).div().scaled(-1.0),
        viscous: viscous_divergence(rho, &u, &p.coefficients)?,
        pressure: pressure_gradient(rho, p.gamma)?.scaled(-1.0),
        drag: drag_terms(rho, &u, p.epsilon).scaled(-1.0),
        korteweg: korteweg_divergence(rho, &p.coefficients)?,
        bohm: quantum_correction_divergence_form(rho, p.epsilon)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::operators::{CoefficientSet, PhysicsParams};
    use std::f64::consts::PI;

    #[test]
    fn equilibrium_has_zero_tendency() {
        let g = Grid::new(2, 16).unwrap();
        let p = PhysicsParams::new(2.0, 0.1, CoefficientSet::paper()).unwrap();
        let s = State::new(ScalarField::constant(&g, 1.7), VectorField::zeros(&g), 0.0, p).unwrap();
        let t = rhs(&s, 1e-12).unwrap();
        assert!(t.drho.max_abs() < 1e-13);
        assert!(t.momentum().max_abs() < 1e-12);
    }

    #[test]
    fn shear_terms_match_symbolic() {
        let g = Grid::new(2, 32).unwrap();
        let p = PhysicsParams::new(2.0, 0.0, CoefficientSet::paper()).unwrap();
        let u = VectorField::from_fn(&g, |x| vec![(2.0 * PI * x[1]).sin(), 0.0]);
        let s = State::from_velocity(ScalarField::constant(&g, 1.0), &u, 0.0, p).unwrap();
        let t = rhs(&s, 1e-12).unwrap();
        // div(u (x) u) vanishes for a shear flow; div(Du) = Lap u / 2
        assert!(t.convection.max_abs() < 1e-12);
        let visc = VectorField::from_fn(&g, |x| vec![-2.0 * PI * PI * (2.0 * PI * x[1]).sin(), 0.0]);
        assert!(t.viscous.sub(&visc).lp_norm(2.0) <= 1e-8 * visc.lp_norm(2.0));
        assert!(t.momentum().sub(&visc).lp_norm(2.0) <= 1e-8 * visc.lp_norm(2.0));
        assert!(t.drho.max_abs() < 1e-12);
    }
}
