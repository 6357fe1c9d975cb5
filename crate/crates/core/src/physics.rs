//! Pile, soil and tunnel description plus the closed-form inputs of the
//! beam-on-Pasternak-foundation model:
//!
//! ```text
//! EI w'''' - G D w'' + k(z) D w = D f(z),    f(z) = k(z) u(z) - G u''(z)
//! ```
//!
//! Units are SI. `k` is reported in N/m³ so that `k·D·w` and `D·f` are forces
//! per unit pile length, which closes the equation dimensionally.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shear-layer thickness as a multiple of the pile diameter when not given.
pub const DEFAULT_SHEAR_LAYER_FACTOR: f64 = 11.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PileProperties {
    elastic_modulus: f64,
    diameter: f64,
    length: f64,
}

impl PileProperties {
    pub fn new(elastic_modulus: f64, diameter: f64, length: f64) -> Result<Self> {
        positive("pile.E", elastic_modulus)?;
        positive("pile.D", diameter)?;
        positive("pile.L", length)?;
        if length <= diameter {
            return Err(Error::param(
                "pile.L",
                format!("length {length} m must exceed the diameter {diameter} m"),
            ));
        }
        Ok(Self {
            elastic_modulus,
            diameter,
            length,
        })
    }

    pub fn elastic_modulus(&self) -> f64 {
        self.elastic_modulus
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Second moment of area of the solid circular section, πD⁴/64.
    pub fn second_moment(&self) -> f64 {
        PI * self.diameter.powi(4) / 64.0
    }

    pub fn bending_stiffness(&self) -> f64 {
        self.elastic_modulus * self.second_moment()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilProperties {
    elastic_modulus: f64,
    poisson_ratio: f64,
    shear_layer_thickness: f64,
}

impl SoilProperties {
    pub fn new(elastic_modulus: f64, poisson_ratio: f64, shear_layer_thickness: f64) -> Result<Self> {
        positive("soil.Es", elastic_modulus)?;
        if !(0.0..=0.5).contains(&poisson_ratio) {
            return Err(Error::param(
                "soil.nu_s",
                format!("Poisson's ratio {poisson_ratio} must lie in [0, 0.5]"),
            ));
        }
        positive("soil.t", shear_layer_thickness)?;
        Ok(Self {
            elastic_modulus,
            poisson_ratio,
            shear_layer_thickness,
        })
    }

    /// Soil with the shear-layer thickness defaulted to 11 pile diameters.
    pub fn with_default_thickness(
        elastic_modulus: f64,
        poisson_ratio: f64,
        pile_diameter: f64,
    ) -> Result<Self> {
        Self::new(
            elastic_modulus,
            poisson_ratio,
            DEFAULT_SHEAR_LAYER_FACTOR * pile_diameter,
        )
    }

    pub fn elastic_modulus(&self) -> f64 {
        self.elastic_modulus
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.poisson_ratio
    }

    pub fn shear_layer_thickness(&self) -> f64 {
        self.shear_layer_thickness
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelGeometry {
    axis_depth: f64,
    radius: f64,
    offset: f64,
    volume_loss: f64,
}

impl TunnelGeometry {
    /// `offset` is the horizontal tunnel-to-pile distance x0 and may be negative;
    /// `volume_loss` is a fraction (0.01 for 1 %).
    pub fn new(axis_depth: f64, radius: f64, offset: f64, volume_loss: f64) -> Result<Self> {
        positive("tunnel.R", radius)?;
        if !(axis_depth > radius) || !axis_depth.is_finite() {
            return Err(Error::param(
                "tunnel.H",
                format!("axis depth {axis_depth} m must exceed the radius {radius} m"),
            ));
        }
        if !offset.is_finite() {
            return Err(Error::param("tunnel.x0", "must be finite"));
        }
        if !(volume_loss >= 0.0) || !volume_loss.is_finite() {
            return Err(Error::param(
                "tunnel.epsilon",
                format!("volume loss {volume_loss} must be a finite, non-negative fraction"),
            ));
        }
        Ok(Self {
            axis_depth,
            radius,
            offset,
            volume_loss,
        })
    }

    pub fn axis_depth(&self) -> f64 {
        self.axis_depth
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn volume_loss(&self) -> f64 {
        self.volume_loss
    }

    pub fn with_volume_loss(self, volume_loss: f64) -> Result<Self> {
        Self::new(self.axis_depth, self.radius, self.offset, volume_loss)
    }

    pub fn with_offset(self, offset: f64) -> Result<Self> {
        Self::new(self.axis_depth, self.radius, offset, self.volume_loss)
    }
}

/// End restraint of the pile: top is `z = 0`, tip is `z = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// M = Q = 0 at both ends.
    FreeFree,
    /// w = θ = 0 at both ends.
    FixedFixed,
    /// M = Q = 0 at the top, w = θ = 0 at the tip.
    FreeTopFixedTip,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 3] = [
        BoundaryCondition::FreeFree,
        BoundaryCondition::FixedFixed,
        BoundaryCondition::FreeTopFixedTip,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryCondition::FreeFree => "free_free",
            BoundaryCondition::FixedFixed => "fixed_fixed",
            BoundaryCondition::FreeTopFixedTip => "free_top_fixed_tip",
        }
    }

    pub fn top_fixed(&self) -> bool {
        matches!(self, BoundaryCondition::FixedFixed)
    }

    pub fn tip_fixed(&self) -> bool {
        !matches!(self, BoundaryCondition::FreeFree)
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundaryCondition::ALL
            .into_iter()
            .find(|bc| bc.as_str() == s)
            .ok_or_else(|| {
                Error::param(
                    "bc",
                    format!("unknown boundary condition `{s}` (expected free_free, fixed_fixed or free_top_fixed_tip)"),
                )
            })
    }
}

/// Complete soil-pile-tunnel scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PileSoilProblem {
    pub pile: PileProperties,
    pub soil: SoilProperties,
    pub tunnel: TunnelGeometry,
    pub bc: BoundaryCondition,
}

impl PileSoilProblem {
    pub fn new(
        pile: PileProperties,
        soil: SoilProperties,
        tunnel: TunnelGeometry,
        bc: BoundaryCondition,
    ) -> Self {
        Self {
            pile,
            soil,
            tunnel,
            bc,
        }
    }

    /// Single pile next to a tunnel after Xu & Poulos (2001): a 25 m long,
    /// 0.5 m diameter concrete pile (E = 30 GPa) in soil with Es = 24 MPa and
    /// ν = 0.5, tunnel axis at 20 m, R = 3 m, x0 = 4.5 m.
    pub fn reference(bc: BoundaryCondition, volume_loss: f64) -> Self {
        let pile = PileProperties::new(30e9, 0.5, 25.0).expect("valid reference pile");
        let soil = SoilProperties::with_default_thickness(24e6, 0.5, 0.5).expect("valid reference soil");
        let tunnel = TunnelGeometry::new(20.0, 3.0, 4.5, volume_loss).expect("valid reference tunnel");
        Self::new(pile, soil, tunnel, bc)
    }

    pub fn length(&self) -> f64 {
        self.pile.length()
    }

    pub fn with_bc(mut self, bc: BoundaryCondition) -> Self {
        self.bc = bc;
        self
    }

    pub fn with_volume_loss(mut self, volume_loss: f64) -> Result<Self> {
        self.tunnel = self.tunnel.with_volume_loss(volume_loss)?;
        Ok(self)
    }

    fn check_depth(&self, z: f64) -> Result<()> {
        let l = self.length();
        if (0.0..=l).contains(&z) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "depth z",
                value: z,
                min: 0.0,
                max: l,
            })
        }
    }

    /// Depth-dependent subgrade reaction modulus k(z).
    pub fn subgrade_modulus(&self, z: f64) -> Result<f64> {
        self.check_depth(z)?;
        Ok(self.subgrade_modulus_unchecked(z))
    }

    pub(crate) fn subgrade_modulus_unchecked(&self, z: f64) -> f64 {
        let es = self.soil.elastic_modulus();
        let nu = self.soil.poisson_ratio();
        let d = self.pile.diameter();
        let relative = (es * d.powi(4) / self.pile.bending_stiffness()).powf(0.125);
        3.08 / depth_factor(z / d) * es / (1.0 - nu * nu) * relative
    }

    /// Modulus of the Pasternak shear layer, G = Es·t / (6(1 + ν)).
    pub fn shear_layer_modulus(&self) -> f64 {
        self.soil.elastic_modulus() * self.soil.shear_layer_thickness()
            / (6.0 * (1.0 + self.soil.poisson_ratio()))
    }

    /// Free-field lateral soil displacement at the pile axis (Loganathan & Poulos).
    /// Defined for every depth; negative values point towards the tunnel for x0 > 0.
    pub fn soil_displacement(&self, z: f64) -> f64 {
        self.ground_movement().value(z)
    }

    /// d²u/dz² of [`Self::soil_displacement`].
    pub fn soil_displacement_curvature(&self, z: f64) -> Result<f64> {
        self.check_depth(z)?;
        Ok(self.ground_movement().curvature(z))
    }

    /// External load f(z) = k(z)·u(z) − G·u''(z).
    pub fn external_load(&self, z: f64) -> Result<f64> {
        self.check_depth(z)?;
        Ok(self.external_load_unchecked(z))
    }

    pub(crate) fn external_load_unchecked(&self, z: f64) -> f64 {
        let movement = self.ground_movement();
        self.subgrade_modulus_unchecked(z) * movement.value(z)
            - self.shear_layer_modulus() * movement.curvature(z)
    }

    fn ground_movement(&self) -> GroundMovement {
        GroundMovement {
            amplitude: -self.tunnel.volume_loss() * self.tunnel.radius().powi(2) * self.tunnel.offset(),
            offset: self.tunnel.offset(),
            depth: self.tunnel.axis_depth(),
            image_weight: 3.0 - 4.0 * self.soil.poisson_ratio(),
            lateral_decay: 1.38 * self.tunnel.offset().powi(2)
                / (self.tunnel.axis_depth() + self.tunnel.radius()).powi(2),
            depth_decay: 0.69 / self.tunnel.axis_depth().powi(2),
        }
    }
}

/// η(z/D): 2.18 down to half a diameter, then 1 + 1/(1.7 z/D).
fn depth_factor(relative_depth: f64) -> f64 {
    if relative_depth <= 0.5 {
        2.18
    } else {
        1.0 + 1.0 / (1.7 * relative_depth)
    }
}

/// u(z) = A·S(z)·E(z) with
/// S = 1/(x²+(H−z)²) + c/(x²+(H+z)²) and E = exp(−a − b z²).
struct GroundMovement {
    amplitude: f64,
    offset: f64,
    depth: f64,
    image_weight: f64,
    lateral_decay: f64,
    depth_decay: f64,
}

impl GroundMovement {
    fn value(&self, z: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let (s, _, _) = self.source_terms(z);
        let (e, _, _) = self.envelope(z);
        self.amplitude * s * e
    }

    fn curvature(&self, z: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let (s, ds, dds) = self.source_terms(z);
        let (e, de, dde) = self.envelope(z);
        self.amplitude * (dds * e + 2.0 * ds * de + s * dde)
    }

    /// S and its first two z-derivatives.
    fn source_terms(&self, z: f64) -> (f64, f64, f64) {
        let x2 = self.offset * self.offset;
        let p = self.depth - z;
        let q = self.depth + z;
        let d1 = x2 + p * p;
        let d2 = x2 + q * q;
        let c = self.image_weight;
        let s = 1.0 / d1 + c / d2;
        let ds = 2.0 * p / (d1 * d1) - 2.0 * c * q / (d2 * d2);
        let dds = (-2.0 / (d1 * d1) + 8.0 * p * p / (d1 * d1 * d1))
            + c * (-2.0 / (d2 * d2) + 8.0 * q * q / (d2 * d2 * d2));
        (s, ds, dds)
    }

    fn envelope(&self, z: f64) -> (f64, f64, f64) {
        let b = self.depth_decay;
        let e = (-(self.lateral_decay + b * z * z)).exp();
        (e, -2.0 * b * z * e, (4.0 * b * b * z * z - 2.0 * b) * e)
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("{value} must be positive and finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> PileSoilProblem {
        PileSoilProblem::reference(BoundaryCondition::FreeFree, 0.01)
    }

    /// Standalone evaluation of u(z) written straight from the closed form.
    fn loganathan(z: f64, eps: f64, r: f64, x: f64, h: f64, nu: f64) -> f64 {
        -eps * r * r
            * x
            * (1.0 / (x * x + (h - z).powi(2)) + (3.0 - 4.0 * nu) / (x * x + (h + z).powi(2)))
            * (-(1.38 * x * x / (h + r).powi(2) + 0.69 * z * z / (h * h))).exp()
    }

    /// Central second difference with steps h and h/2, one Richardson level.
    fn richardson_curvature(f: impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
        let d = |h: f64| (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    #[test]
    fn second_moment_is_exact() {
        let pile = PileProperties::new(30e9, 0.5, 25.0).unwrap();
        let expected = PI * 0.5f64.powi(4) / 64.0;
        assert!((pile.second_moment() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn rejects_invalid_components() {
        assert!(PileProperties::new(30e9, 0.5, 0.4).is_err());
        assert!(PileProperties::new(-1.0, 0.5, 25.0).is_err());
        assert!(SoilProperties::new(24e6, 0.6, 5.5).is_err());
        assert!(SoilProperties::new(24e6, 0.5, 0.0).is_err());
        assert!(TunnelGeometry::new(3.0, 3.0, 4.5, 0.01).is_err());
        assert!(TunnelGeometry::new(20.0, 3.0, 4.5, -0.01).is_err());
        assert!("pinned".parse::<BoundaryCondition>().is_err());
        assert_eq!(
            "free_top_fixed_tip".parse::<BoundaryCondition>().unwrap(),
            BoundaryCondition::FreeTopFixedTip
        );
    }

    #[test]
    fn subgrade_modulus_branches() {
        let p = reference();
        let es = 24e6;
        let ei = 30e9 * PI * 0.5f64.powi(4) / 64.0;
        let far = 3.08 * es / (1.0 - 0.25) * (es * 0.5f64.powi(4) / ei).powf(0.125);
        // z/D = 0.5 sits on the first branch.
        let k_half = p.subgrade_modulus(0.25).unwrap();
        assert!((k_half - far / 2.18).abs() <= 1e-12 * far);
        // Deep limit: η → 1.
        let deep = p.subgrade_modulus(25.0).unwrap();
        let eta = 1.0 + 1.0 / (1.7 * 50.0);
        assert!((deep - far / eta).abs() <= 1e-12 * far);
        assert!(p.subgrade_modulus(-0.1).is_err());
        assert!(p.subgrade_modulus(25.1).is_err());
    }

    #[test]
    fn subgrade_modulus_hand_value() {
        // E = 30 GPa, Es = 24 MPa, ν = 0.5, D = 0.5 m, z = 10 m, evaluated
        // separately in double precision:
        //   Es·D⁴/(EI) = 0.016297466172610083, its 8th root = 0.5977437048561874
        //   η = 1.0294117647058822, k = 57230373.27775082
        let k = reference().subgrade_modulus(10.0).unwrap();
        assert!((k - 57230373.27775082).abs() <= 1e-12 * k);
    }

    #[test]
    fn depth_factor_nearly_continuous() {
        let p = reference();
        let d = 0.5;
        let delta = 1e-9;
        let below = p.subgrade_modulus(0.5 * d - delta).unwrap();
        let above = p.subgrade_modulus(0.5 * d + delta).unwrap();
        let at = p.subgrade_modulus(0.5 * d).unwrap();
        assert!((below - above).abs() / at <= 0.005);
    }

    #[test]
    fn shear_layer_modulus_values() {
        let g = reference().shear_layer_modulus();
        assert!((g - 24e6 * 5.5 / 9.0).abs() <= 1e-9 * g);
        let soil = SoilProperties::new(24e6, 0.0, 5.5).unwrap();
        let p = PileSoilProblem { soil, ..reference() };
        assert!((p.shear_layer_modulus() - 24e6 * 5.5 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn soil_displacement_matches_closed_form() {
        let p = reference();
        for z in [0.0, 5.0, 17.3, 20.0, 25.0] {
            let expected = loganathan(z, 0.01, 3.0, 4.5, 20.0, 0.5);
            let u = p.soil_displacement(z);
            assert!((u - expected).abs() <= 1e-14 * expected.abs().max(1e-12), "z={z}");
        }
        // Independent evaluation at z = H = 20 m.
        let u20 = p.soil_displacement(20.0);
        assert!((u20 + 0.009634272583269165).abs() <= 1e-14);
        // 40-digit numerical differentiation of the same expression.
        let c20 = p.soil_displacement_curvature(20.0).unwrap();
        assert!((c20 - 9.259136638852719e-4).abs() <= 1e-12 * c20.abs());
    }

    #[test]
    fn soil_displacement_vanishes_without_offset_or_loss() {
        let p = reference();
        let centred = PileSoilProblem {
            tunnel: p.tunnel.with_offset(0.0).unwrap(),
            ..p
        };
        let no_loss = p.with_volume_loss(0.0).unwrap();
        for z in [0.0, 10.0, 20.0, 25.0] {
            assert_eq!(centred.soil_displacement(z), 0.0);
            assert_eq!(centred.soil_displacement_curvature(z).unwrap(), 0.0);
            assert_eq!(centred.external_load(z).unwrap(), 0.0);
            assert_eq!(no_loss.soil_displacement(z), 0.0);
            assert_eq!(no_loss.soil_displacement_curvature(z).unwrap(), 0.0);
            assert_eq!(no_loss.external_load(z).unwrap(), 0.0);
        }
    }

    #[test]
    fn curvature_matches_richardson_oracle() {
        let p = reference();
        let u = |z: f64| loganathan(z, 0.01, 3.0, 4.5, 20.0, 0.5);
        let scale = (0..=250)
            .map(|i| p.soil_displacement_curvature(i as f64 * 0.1).unwrap().abs())
            .fold(0.0, f64::max);
        for i in 0..50 {
            // Deterministic spread of depths inside [0.05, 24.95].
            let z = 0.05 + 24.9 * ((i as f64 * 0.618_033_988_749_895) % 1.0);
            let oracle = richardson_curvature(u, z, 2e-2);
            let got = p.soil_displacement_curvature(z).unwrap();
            let tol = 1e-6 * got.abs().max(1e-3 * scale);
            assert!((got - oracle).abs() <= tol, "z={z}: {got} vs {oracle}");
        }
    }

    #[test]
    fn external_load_composes_oracles() {
        let p = reference();
        let z = 20.0;
        let u = |z: f64| loganathan(z, 0.01, 3.0, 4.5, 20.0, 0.5);
        let expected = p.subgrade_modulus(z).unwrap() * u(z)
            - p.shear_layer_modulus() * richardson_curvature(u, z, 2e-2);
        let f = p.external_load(z).unwrap();
        assert!((f - expected).abs() <= 1e-6 * f.abs(), "{f} vs {expected}");
    }
}
