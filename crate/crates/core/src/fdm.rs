//! Finite-difference benchmark for the pile equation.
//!
//! Real nodes are j = 0..=Nf at z_j = j·l with l = L/Nf. The central stencil
//! at node j reaches the virtual nodes −2, −1, Nf+1 and Nf+2, which are
//! eliminated with central-difference forms of the end conditions:
//!
//! * free end (w'' = w''' = 0): w₋₁ = 2w₀ − w₁, w₋₂ = 4w₀ − 4w₁ + w₂
//! * fixed end (w = w' = 0): the node row becomes w₀ = 0 and w₋₁ = w₁
//!
//! and mirrored at the tip. At a fixed end w₋₂ only enters the equation of the
//! end node itself, so it is recovered from that equation after the solve and
//! used for the end shear force.

use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::pielm::{MonitoredDataset, Observation};
use crate::physics::PileSoilProblem;
use crate::profile::ResponseProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdmConfig {
    /// Number of segments Nf; the grid has Nf + 1 real nodes.
    pub segments: usize,
}

impl Default for FdmConfig {
    fn default() -> Self {
        Self { segments: 2000 }
    }
}

impl FdmConfig {
    pub fn new(segments: usize) -> Result<Self> {
        let config = Self { segments };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments < 8 {
            return Err(Error::param(
                "fdm.nf",
                format!("{} segments given, at least 8 required", self.segments),
            ));
        }
        Ok(())
    }
}

/// Pentadiagonal system `K·w = f` over the real nodes.
#[derive(Debug, Clone)]
pub struct FdmSystem {
    pub matrix: BandedMatrix,
    pub rhs: Vec<f64>,
    pub segment_length: f64,
}

/// Nodal benchmark response.
#[derive(Debug, Clone, PartialEq)]
pub struct FdmSolution {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub theta: Vec<f64>,
    pub moment: Vec<f64>,
    pub shear: Vec<f64>,
    pub segment_length: f64,
}

/// Per-node stencil: `[c2, c1, c0, c1, c2]` on w_{j−2..=j+2}.
struct Stencil {
    a: f64,
    g: f64,
}

impl Stencil {
    fn new(problem: &PileSoilProblem, l: f64) -> Self {
        let ei = problem.pile.bending_stiffness();
        let d = problem.pile.diameter();
        Self {
            a: ei / (d * l.powi(4)),
            g: problem.shear_layer_modulus() / (l * l),
        }
    }

    fn coefficients(&self, k: f64) -> [f64; 5] {
        let (a, g) = (self.a, self.g);
        let c1 = -4.0 * a - g;
        [a, c1, 6.0 * a + 2.0 * g + k, c1, a]
    }
}

/// L·j/Nf, exact at both ends.
fn node_depth(length: f64, n: usize, j: usize) -> f64 {
    length * j as f64 / n as f64
}

/// Real-node expansion of the value at (possibly virtual) node `m`.
fn expand(m: isize, n: usize, top_fixed: bool, tip_fixed: bool) -> Vec<(usize, f64)> {
    let last = n as isize;
    match m {
        -1 if top_fixed => vec![(1, 1.0)],
        -1 => vec![(0, 2.0), (1, -1.0)],
        -2 => vec![(0, 4.0), (1, -4.0), (2, 1.0)],
        m if m == last + 1 && tip_fixed => vec![(n - 1, 1.0)],
        m if m == last + 1 => vec![(n, 2.0), (n - 1, -1.0)],
        m if m == last + 2 => vec![(n, 4.0), (n - 1, -4.0), (n - 2, 1.0)],
        m => vec![(m as usize, 1.0)],
    }
}

/// Assembles the system with the tunnelling load of `problem`.
pub fn assemble_fdm(problem: &PileSoilProblem, config: &FdmConfig) -> Result<FdmSystem> {
    assemble_fdm_with_load(problem, config, |z| problem.external_load_unchecked(z))
}

/// Assembles the system with a caller-supplied load `f(z)`.
pub fn assemble_fdm_with_load(
    problem: &PileSoilProblem,
    config: &FdmConfig,
    load: impl Fn(f64) -> f64,
) -> Result<FdmSystem> {
    config.validate()?;
    let n = config.segments;
    let length = problem.length();
    let l = length / n as f64;
    let stencil = Stencil::new(problem, l);
    let (top_fixed, tip_fixed) = (problem.bc.top_fixed(), problem.bc.tip_fixed());
    let is_fixed = |j: usize| (j == 0 && top_fixed) || (j == n && tip_fixed);

    let mut matrix = BandedMatrix::zeros(n + 1, 2, 2);
    let mut rhs = vec![0.0; n + 1];
    for j in 0..=n {
        if is_fixed(j) {
            // Scaled like the stencil so pivoting is not distorted.
            matrix.add(j, j, stencil.a);
            continue;
        }
        let z = node_depth(length, n, j);
        let coeffs = stencil.coefficients(problem.subgrade_modulus_unchecked(z));
        for (offset, c) in (-2isize..=2).zip(coeffs) {
            for (col, weight) in expand(j as isize + offset, n, top_fixed, tip_fixed) {
                // Known zero at a restrained node: its column stays empty.
                if !is_fixed(col) {
                    matrix.add(j, col, c * weight);
                }
            }
        }
        rhs[j] = load(z);
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("finite-difference load contains non-finite values".into()));
    }
    Ok(FdmSystem {
        matrix,
        rhs,
        segment_length: l,
    })
}

/// Solves the benchmark with the tunnelling load of `problem`.
pub fn solve_fdm(problem: &PileSoilProblem, config: &FdmConfig) -> Result<FdmSolution> {
    solve_fdm_with_load(problem, config, |z| problem.external_load_unchecked(z))
}

/// Solves the benchmark for a caller-supplied load `f(z)`.
pub fn solve_fdm_with_load(
    problem: &PileSoilProblem,
    config: &FdmConfig,
    load: impl Fn(f64) -> f64,
) -> Result<FdmSolution> {
    let system = assemble_fdm_with_load(problem, config, &load)?;
    let w = system.matrix.solve(&system.rhs)?;
    Ok(recover_forces(problem, config.segments, system.segment_length, &w, load))
}

fn recover_forces(
    problem: &PileSoilProblem,
    n: usize,
    l: f64,
    w: &[f64],
    load: impl Fn(f64) -> f64,
) -> FdmSolution {
    let (top_fixed, tip_fixed) = (problem.bc.top_fixed(), problem.bc.tip_fixed());
    let stencil = Stencil::new(problem, l);
    let value = |m: isize| -> f64 {
        expand(m, n, top_fixed, tip_fixed)
            .into_iter()
            .map(|(col, weight)| weight * w[col])
            .sum()
    };

    // ext[j + 2] = w_j for j = −2..=Nf+2.
    let mut ext: Vec<f64> = (-2..=n as isize + 2).map(value).collect();
    if top_fixed {
        let [c2, c1, c0, _, _] = stencil.coefficients(problem.subgrade_modulus_unchecked(0.0));
        ext[0] = (load(0.0) - c1 * (ext[1] + ext[3]) - c0 * ext[2] - c2 * ext[4]) / c2;
    }
    if tip_fixed {
        let length = problem.length();
        let [c2, c1, c0, _, _] = stencil.coefficients(problem.subgrade_modulus_unchecked(length));
        let e = n + 2;
        ext[e + 2] = (load(length) - c1 * (ext[e - 1] + ext[e + 1]) - c0 * ext[e] - c2 * ext[e - 2]) / c2;
    }

    let ei = problem.pile.bending_stiffness();
    let mut solution = FdmSolution {
        z: Vec::with_capacity(n + 1),
        w: w.to_vec(),
        theta: Vec::with_capacity(n + 1),
        moment: Vec::with_capacity(n + 1),
        shear: Vec::with_capacity(n + 1),
        segment_length: l,
    };
    for j in 0..=n {
        let e = j + 2;
        solution.z.push(node_depth(problem.length(), n, j));
        solution.theta.push((ext[e + 1] - ext[e - 1]) / (2.0 * l));
        solution.moment.push(ei * (ext[e + 1] - 2.0 * ext[e] + ext[e - 1]) / (l * l));
        solution
            .shear
            .push(ei * (ext[e + 2] - 2.0 * ext[e + 1] + 2.0 * ext[e - 1] - ext[e - 2]) / (2.0 * l.powi(3)));
    }
    solution
}

impl FdmSolution {
    pub fn node_count(&self) -> usize {
        self.z.len()
    }

    pub fn length(&self) -> f64 {
        self.z.last().copied().unwrap_or(0.0)
    }

    pub fn to_profile(&self) -> ResponseProfile {
        let mut profile = ResponseProfile::with_capacity(self.z.len());
        for j in 0..self.z.len() {
            profile.push(self.z[j], self.w[j], self.theta[j], self.moment[j], self.shear[j]);
        }
        profile
    }

    /// Deflection at `depth` by linear interpolation between nodes.
    pub fn deflection_at(&self, depth: f64) -> Result<f64> {
        let length = self.length();
        if !(0.0..=length).contains(&depth) {
            return Err(Error::Domain {
                what: "observation depth",
                value: depth,
                min: 0.0,
                max: length,
            });
        }
        let n = self.z.len() - 1;
        let s = depth * n as f64 / length;
        let j = (s.floor() as usize).min(n - 1);
        let t = s - j as f64;
        if t == 0.0 {
            return Ok(self.w[j]);
        }
        Ok((1.0 - t) * self.w[j] + t * self.w[j + 1])
    }
}

/// Pseudo-observations of the benchmark deflection at the given depths.
pub fn sample_pseudo_observations(solution: &FdmSolution, depths: &[f64]) -> Result<MonitoredDataset> {
    let entries = depths
        .iter()
        .map(|&depth| {
            Ok(Observation {
                depth,
                deflection: solution.deflection_at(depth)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MonitoredDataset::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::BoundaryCondition;

    fn reference(bc: BoundaryCondition) -> PileSoilProblem {
        PileSoilProblem::reference(bc, 0.01)
    }

    #[test]
    fn interior_row_matches_stencil() {
        let p = reference(BoundaryCondition::FreeFree);
        let sys = assemble_fdm(&p, &FdmConfig::new(100).unwrap()).unwrap();
        let l = sys.segment_length;
        let a = p.pile.bending_stiffness() / p.pile.diameter() / l.powi(4);
        let g = p.shear_layer_modulus() / (l * l);
        let k = p.subgrade_modulus(50.0 * l).unwrap();
        let row: Vec<f64> = (48..=52).map(|c| sys.matrix.get(50, c)).collect();
        let expected = [a, -4.0 * a - g, 6.0 * a + 2.0 * g + k, -4.0 * a - g, a];
        for (x, y) in row.iter().zip(expected) {
            assert!((x - y).abs() <= 1e-12 * y.abs(), "{x} vs {y}");
        }
        assert_eq!(sys.matrix.get(50, 47), 0.0);
        assert_eq!(sys.matrix.get(50, 53), 0.0);
        assert!((sys.rhs[50] - p.external_load(50.0 * l).unwrap()).abs() < 1e-12 * sys.rhs[50].abs());
    }

    #[test]
    fn too_few_segments_rejected() {
        assert!(FdmConfig::new(7).is_err());
        assert!(FdmConfig::new(8).is_ok());
    }

    #[test]
    fn zero_volume_loss_gives_zero_response() {
        for bc in BoundaryCondition::ALL {
            let p = PileSoilProblem::reference(bc, 0.0);
            let cfg = FdmConfig::new(64).unwrap();
            assert!(assemble_fdm(&p, &cfg).unwrap().rhs.iter().all(|&f| f == 0.0));
            let s = solve_fdm(&p, &cfg).unwrap();
            for v in s.w.iter().chain(&s.moment).chain(&s.shear) {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn fixed_ends_are_exactly_zero() {
        let s = solve_fdm(&reference(BoundaryCondition::FixedFixed), &FdmConfig::new(200).unwrap()).unwrap();
        assert_eq!(s.w[0], 0.0);
        assert_eq!(s.w[200], 0.0);
        let s = solve_fdm(&reference(BoundaryCondition::FreeTopFixedTip), &FdmConfig::new(200).unwrap()).unwrap();
        assert_eq!(s.w[200], 0.0);
        assert_ne!(s.w[0], 0.0);
    }

    #[test]
    fn free_end_moment_vanishes() {
        let s = solve_fdm(&reference(BoundaryCondition::FreeFree), &FdmConfig::new(200).unwrap()).unwrap();
        let scale = s.moment.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(s.moment[0].abs() <= 1e-9 * scale);
        assert!(s.moment[200].abs() <= 1e-9 * scale);
    }

    #[test]
    fn interpolation_at_and_between_nodes() {
        let s = solve_fdm(&reference(BoundaryCondition::FreeFree), &FdmConfig::new(100).unwrap()).unwrap();
        let l = s.segment_length;
        assert_eq!(s.deflection_at(37.0 * l).unwrap(), s.w[37]);
        assert_eq!(s.deflection_at(s.length()).unwrap(), s.w[100]);
        let mid = s.deflection_at(37.5 * l).unwrap();
        assert!((mid - 0.5 * (s.w[37] + s.w[38])).abs() <= 1e-15 * mid.abs());
        assert!(sample_pseudo_observations(&s, &[-0.1]).is_err());
        assert!(sample_pseudo_observations(&s, &[s.length() + 0.1]).is_err());
    }
}
