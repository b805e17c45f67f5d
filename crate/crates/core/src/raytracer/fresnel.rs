use num_complex::Complex64;

use crate::scene::Material;
use crate::units::VACUUM_PERMITTIVITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarization {
    /// Electric field perpendicular to the plane of incidence.
    #[default]
    Te,
    /// Electric field in the plane of incidence.
    Tm,
}

/// Complex relative permittivity εr − jσ/(2π f ε0).
pub fn complex_permittivity(material: &Material, carrier_hz: f64) -> Complex64 {
    Complex64::new(
        material.relative_permittivity,
        -material.conductivity / (2.0 * std::f64::consts::PI * carrier_hz * VACUUM_PERMITTIVITY),
    )
}

/// Fresnel reflection coefficient for a wave in air hitting a half-space of
/// `material`. `incidence_angle` is measured from the surface normal.
pub fn fresnel_reflection(
    material: &Material,
    incidence_angle: f64,
    carrier_hz: f64,
    polarization: Polarization,
) -> Complex64 {
    if material.pec {
        return match polarization {
            Polarization::Te => Complex64::new(-1.0, 0.0),
            Polarization::Tm => Complex64::new(1.0, 0.0),
        };
    }
    let eps = complex_permittivity(material, carrier_hz);
    let (sin, cos) = incidence_angle.sin_cos();
    let root = (eps - sin * sin).sqrt();
    match polarization {
        Polarization::Te => (cos - root) / (cos + root),
        Polarization::Tm => (eps * cos - root) / (eps * cos + root),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn pec_is_minus_one() {
        for angle in [0.0, 0.3, 1.2, FRAC_PI_2 - 1e-3] {
            let g = fresnel_reflection(&Material::pec("metal"), angle, 28e9, Polarization::Te);
            assert_eq!(g, Complex64::new(-1.0, 0.0));
        }
    }

    #[test]
    fn no_contrast_no_reflection() {
        let vacuum = Material::dielectric("vacuum", 1.0, 0.0, 0.0);
        for angle in [0.0, 0.7, 1.4] {
            for pol in [Polarization::Te, Polarization::Tm] {
                assert!(fresnel_reflection(&vacuum, angle, 28e9, pol).norm() < 1e-15);
            }
        }
    }

    /// |Γ| at normal incidence for concrete at 28 GHz. Golden value from a
    /// separate evaluation of |(√ε − 1)/(√ε + 1)| with
    /// ε = 15 − j·0.015/(2π·28e9·ε0) = 15 − j·0.0096295198:
    /// √ε = 3.8729835457 − j·0.0012431656, giving |Γ| = 0.5895738605.
    #[test]
    fn concrete_normal_incidence_golden() {
        let g = fresnel_reflection(&Material::concrete(), 0.0, 28e9, Polarization::Te);
        assert!((g.norm() - CONCRETE_28GHZ_NORMAL).abs() < 1e-8, "{}", g.norm());
        // TE at normal incidence carries the minus sign.
        assert!(g.re < 0.0);
    }

    const CONCRETE_28GHZ_NORMAL: f64 = 0.589_573_860_5;

    #[test]
    fn grazing_limit_approaches_total_reflection() {
        let g = fresnel_reflection(&Material::concrete(), FRAC_PI_2 - 1e-6, 28e9, Polarization::Te);
        assert!(g.norm() > 0.999);
    }

    proptest::proptest! {
        #[test]
        fn magnitude_never_exceeds_one(
            eps in 1.0f64..80.0,
            sigma in 0.0f64..10.0,
            angle in 0.0f64..1.57,
            f in 1e9f64..1e11,
        ) {
            let m = Material::dielectric("m", eps, sigma, 0.0);
            for pol in [Polarization::Te, Polarization::Tm] {
                proptest::prop_assert!(fresnel_reflection(&m, angle, f, pol).norm() <= 1.0 + 1e-12);
            }
        }
    }
}
