//! Interchangeable ways of computing the reduced propagator `ln K_red`.

use super::{correction_term, prefactor, riccati_reduced_propagator};
use crate::dynamics::Trajectory;
use crate::family::FamilyDescriptor;
use crate::hamiltonian::OperatorPolynomial;
use crate::{Error, Result};
use num_complex::Complex64 as C64;

pub trait ReducedPropagatorRoute: Send + Sync {
    fn name(&self) -> &str;
    fn ln_kred(&self, fam: &FamilyDescriptor, poly: &OperatorPolynomial, traj: &Trajectory) -> Result<C64>;
}

/// `ln C + 1/4 int tr[R22 - R11] dt` from the tangent matrix.
pub struct TangentRoute;

impl ReducedPropagatorRoute for TangentRoute {
    fn name(&self) -> &str {
        "tangent"
    }
    fn ln_kred(&self, _: &FamilyDescriptor, _: &OperatorPolynomial, traj: &Trajectory) -> Result<C64> {
        Ok(prefactor(traj)? + correction_term(traj))
    }
}

/// `ln C - 1/2 int tr[xi B] dt` with `B` from metric derivatives.
pub struct TraceRoute;

impl ReducedPropagatorRoute for TraceRoute {
    fn name(&self) -> &str {
        "trace"
    }
    fn ln_kred(&self, _: &FamilyDescriptor, _: &OperatorPolynomial, traj: &Trajectory) -> Result<C64> {
        Ok(prefactor(traj)? - 0.5 * traj.final_quadratures().tr_xi_b)
    }
}

/// `1/2 int tr[Atil G11] dt` from the Riccati equation.
pub struct RiccatiRoute {
    pub tol: f64,
}

impl ReducedPropagatorRoute for RiccatiRoute {
    fn name(&self) -> &str {
        "riccati"
    }
    fn ln_kred(&self, fam: &FamilyDescriptor, poly: &OperatorPolynomial, traj: &Trajectory) -> Result<C64> {
        Ok(riccati_reduced_propagator(fam, poly, traj, self.tol)?.ln_kred)
    }
}

pub struct RouteRegistry {
    routes: Vec<Box<dyn ReducedPropagatorRoute>>,
}

impl RouteRegistry {
    pub fn with_defaults() -> Self {
        RouteRegistry {
            routes: vec![Box::new(TangentRoute), Box::new(TraceRoute), Box::new(RiccatiRoute { tol: 1e-12 })],
        }
    }

    pub fn register(&mut self, route: Box<dyn ReducedPropagatorRoute>) {
        self.routes.retain(|r| r.name() != route.name());
        self.routes.push(route);
    }

    pub fn names(&self) -> Vec<&str> {
        self.routes.iter().map(|r| r.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn ReducedPropagatorRoute> {
        self.routes
            .iter()
            .find(|r| r.name() == name)
            .map(|r| r.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }
}
