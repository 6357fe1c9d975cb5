//! Hard-constraint embeddings of the boundary conditions.
//!
//! Each of the four first-order fields (w, θ, M̄ = M/EI, Q̄ = Q/EI) is the raw
//! network output `h(z̃)·β` plus a correction that is linear in z̃ and built
//! from the end values `h(0)·β` and `h(1)·β`. The correction makes the field
//! vanish at the restrained ends for every β, so no boundary rows enter the
//! loss system.

use crate::physics::BoundaryCondition;

/// One of the four outputs of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Deflection,
    Rotation,
    /// Normalised bending moment M/EI.
    Moment,
    /// Normalised shear force Q/EI.
    Shear,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::Deflection, Field::Rotation, Field::Moment, Field::Shear];

    /// Position of the field's output weights in β.
    pub fn index(self) -> usize {
        match self {
            Field::Deflection => 0,
            Field::Rotation => 1,
            Field::Moment => 2,
            Field::Shear => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Deflection => "w",
            Field::Rotation => "theta",
            Field::Moment => "M_over_EI",
            Field::Shear => "Q_over_EI",
        }
    }
}

/// How a raw output is corrected to satisfy its end conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// No restraint on this field.
    Identity,
    /// `h(z̃) + (z̃ − 1)·h(0) − z̃·h(1)`: zero at both ends.
    VanishBothEnds,
    /// `h(z̃) − h(0)`: zero at the top.
    VanishAtTop,
    /// `h(z̃) − h(1)`: zero at the tip.
    VanishAtTip,
}

impl Embedding {
    pub fn for_field(bc: BoundaryCondition, field: Field) -> Self {
        use BoundaryCondition::*;
        use Field::*;
        match (bc, field) {
            (FreeFree, Deflection | Rotation) => Embedding::Identity,
            (FreeFree, Moment | Shear) => Embedding::VanishBothEnds,
            (FixedFixed, Deflection | Rotation) => Embedding::VanishBothEnds,
            (FixedFixed, Moment | Shear) => Embedding::Identity,
            (FreeTopFixedTip, Deflection | Rotation) => Embedding::VanishAtTip,
            (FreeTopFixedTip, Moment | Shear) => Embedding::VanishAtTop,
        }
    }

    /// Weights `(a, b)` on `h(0)` and `h(1)` in the field value at z̃.
    pub fn end_weights(self, zt: f64) -> (f64, f64) {
        match self {
            Embedding::Identity => (0.0, 0.0),
            Embedding::VanishBothEnds => (zt - 1.0, -zt),
            Embedding::VanishAtTop => (-1.0, 0.0),
            Embedding::VanishAtTip => (0.0, -1.0),
        }
    }

    /// d/dz̃ of [`Self::end_weights`].
    pub fn end_weight_slopes(self) -> (f64, f64) {
        match self {
            Embedding::VanishBothEnds => (1.0, -1.0),
            _ => (0.0, 0.0),
        }
    }

    pub(crate) fn value_row_into(self, raw: &[f64], top: &[f64], tip: &[f64], zt: f64, out: &mut [f64]) {
        let (a, b) = self.end_weights(zt);
        combine(raw, top, tip, a, b, out);
    }

    pub(crate) fn derivative_row_into(self, raw_derivative: &[f64], top: &[f64], tip: &[f64], out: &mut [f64]) {
        let (a, b) = self.end_weight_slopes();
        combine(raw_derivative, top, tip, a, b, out);
    }
}

fn combine(raw: &[f64], top: &[f64], tip: &[f64], a: f64, b: f64, out: &mut [f64]) {
    if a == 0.0 && b == 0.0 {
        out.copy_from_slice(raw);
        return;
    }
    for (((o, &h), &h0), &h1) in out.iter_mut().zip(raw).zip(top).zip(tip) {
        *o = h + a * h0 + b * h1;
    }
}

/// Coefficient row `r` such that the constrained field at z̃ equals `r·β_field`.
///
/// `raw` is the feature row at z̃, `top` and `tip` the feature rows at 0 and 1.
pub fn constrained_value(
    field: Field,
    bc: BoundaryCondition,
    raw: &[f64],
    top: &[f64],
    tip: &[f64],
    zt: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    Embedding::for_field(bc, field).value_row_into(raw, top, tip, zt, &mut out);
    out
}

/// Coefficient row of d/dz̃ of the constrained field; `raw_derivative` is the
/// feature-derivative row at z̃.
pub fn constrained_derivative(
    field: Field,
    bc: BoundaryCondition,
    raw_derivative: &[f64],
    top: &[f64],
    tip: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; raw_derivative.len()];
    Embedding::for_field(bc, field).derivative_row_into(raw_derivative, top, tip, &mut out);
    out
}
