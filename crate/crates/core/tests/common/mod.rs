//! Manufactured solution shared by the benchmark tests.

#![allow(dead_code)]

use pielm_core::fdm::{solve_fdm_with_load, FdmConfig};
use pielm_core::physics::{BoundaryCondition, PileSoilProblem};

/// w*(z) = s·pⁿ with p = z(L − z)/L², and its derivatives up to fourth order.
pub struct Manufactured {
    length: f64,
    scale: f64,
    power: i32,
}

impl Manufactured {
    pub fn for_bc(bc: BoundaryCondition, length: f64) -> Self {
        // n = 2 clamps both ends; n = 4 also zeroes w'' and w''' at each end.
        let power = if bc == BoundaryCondition::FixedFixed { 2 } else { 4 };
        Self {
            length,
            scale: 1e-2,
            power,
        }
    }

    fn p(&self, z: f64) -> (f64, f64, f64) {
        let l2 = self.length * self.length;
        (z * (self.length - z) / l2, (self.length - 2.0 * z) / l2, -2.0 / l2)
    }

    pub fn w(&self, z: f64) -> f64 {
        self.scale * self.p(z).0.powi(self.power)
    }

    pub fn w2(&self, z: f64) -> f64 {
        let (p, p1, p2) = self.p(z);
        let n = self.power as f64;
        self.scale * n * ((n - 1.0) * p.powi(self.power - 2) * p1 * p1 + p.powi(self.power - 1) * p2)
    }

    pub fn w4(&self, z: f64) -> f64 {
        let (p, p1, p2) = self.p(z);
        let n = self.power as f64;
        let pw = |k: i32| if self.power - k < 0 { 0.0 } else { p.powi(self.power - k) };
        self.scale
            * n
            * (n - 1.0)
            * ((n - 2.0) * (n - 3.0) * pw(4) * p1.powi(4) + 6.0 * (n - 2.0) * pw(3) * p1 * p1 * p2 + 3.0 * pw(2) * p2 * p2)
    }

    /// f* = (EI/D)·w'''' − G·w'' + k·w.
    fn load(&self, problem: &PileSoilProblem, z: f64) -> f64 {
        let ei = problem.pile.bending_stiffness();
        let d = problem.pile.diameter();
        ei / d * self.w4(z) - problem.shear_layer_modulus() * self.w2(z)
            + problem.subgrade_modulus(z).unwrap() * self.w(z)
    }
}

/// Largest nodal deflection error relative to the peak of w*.
pub fn max_error(problem: &PileSoilProblem, exact: &Manufactured, nf: usize) -> f64 {
    let sol = solve_fdm_with_load(problem, &FdmConfig::new(nf).unwrap(), |z| exact.load(problem, z)).unwrap();
    let peak = sol.z.iter().fold(0.0f64, |m, &z| m.max(exact.w(z).abs()));
    sol.z
        .iter()
        .zip(&sol.w)
        .map(|(&z, w)| (w - exact.w(z)).abs())
        .fold(0.0, f64::max)
        / peak
}
