//! Material description: interface type plus roughness profile.

use crate::fresnel::{fresnel_conductor, fresnel_dielectric, ConductorIor, DielectricIor};
use crate::microfacet::RoughnessProfile;
use crate::path::Side;
use crate::spectrum::Rgb;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interface {
    /// Opaque reflector. With `unit_fresnel` the Fresnel factor is forced to
    /// one (white furnace configuration).
    Conductor { ior: ConductorIor, unit_fresnel: bool },
    /// Transmissive interface between the exterior (index 1) and the interior.
    Dielectric(DielectricIor),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    pub interface: Interface,
    pub roughness: RoughnessProfile,
}

impl MaterialSpec {
    pub fn conductor(ior: ConductorIor, roughness: RoughnessProfile) -> Self {
        MaterialSpec { interface: Interface::Conductor { ior, unit_fresnel: false }, roughness }
    }

    /// Conductor with `F = 1`, for furnace tests.
    pub fn white_conductor(roughness: RoughnessProfile) -> Self {
        MaterialSpec {
            interface: Interface::Conductor { ior: ConductorIor::ALUMINUM, unit_fresnel: true },
            roughness,
        }
    }

    pub fn dielectric(eta: f64, roughness: RoughnessProfile) -> Self {
        MaterialSpec { interface: Interface::Dielectric(DielectricIor { eta }), roughness }
    }

    pub fn is_dielectric(&self) -> bool {
        matches!(self.interface, Interface::Dielectric(_))
    }

    /// Index-matched dielectric: light passes straight through and the BSDF
    /// is a delta the evaluators cannot represent.
    pub fn is_pass_through(&self) -> bool {
        matches!(self.interface, Interface::Dielectric(ior) if ior.eta == 1.0)
    }

    /// Index of refraction of the medium on `side`.
    pub fn eta(&self, side: Side) -> f64 {
        match (self.interface, side) {
            (Interface::Dielectric(ior), Side::Inside) => ior.eta,
            _ => 1.0,
        }
    }

    /// Medium a query direction pointing away from the surface belongs to.
    pub fn side_of(&self, omega: crate::geometry::Vec3) -> Side {
        if self.is_dielectric() && omega.z < 0.0 {
            Side::Inside
        } else {
            Side::Outside
        }
    }

    /// Conductor reflectance at `cos` (incident direction vs. facet normal).
    pub(crate) fn conductor_fresnel(&self, cos: f64) -> Rgb {
        match self.interface {
            Interface::Conductor { unit_fresnel: true, .. } => Rgb::ONE,
            Interface::Conductor { ior, .. } => fresnel_conductor(cos, &ior),
            Interface::Dielectric(_) => Rgb::ZERO,
        }
    }

    /// Dielectric reflectance for light arriving from `from` at `cos` to the
    /// facet normal facing that side.
    pub(crate) fn dielectric_fresnel(&self, cos: f64, from: Side) -> f64 {
        match self.interface {
            Interface::Dielectric(ior) => {
                let signed = if from == Side::Outside { cos } else { -cos };
                fresnel_dielectric(signed, ior)
            }
            Interface::Conductor { .. } => 1.0,
        }
    }
}
