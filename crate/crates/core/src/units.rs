//! Units and frequency conversions.
//!
//! All internal angular frequencies are in rad/ps, delays in ps, crystal
//! lengths in mm and group-delay mismatches in ps/mm, so that every product
//! appearing in the physics is order one. External inputs tagged `THz` are
//! interpreted as ordinary frequency and multiplied by 2π on ingestion;
//! inputs tagged `nm` are vacuum wavelengths converted via ω = 2πc/λ.

use serde::{Deserialize, Serialize};

use crate::error::UnitError;

/// Speed of light in nm/ps (equivalently µm/ns, m/µs).
pub const C_NM_PER_PS: f64 = 299_792.458;

/// An angular frequency in rad/ps.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    /// Wrap a raw rad/ps value.
    pub fn from_rad_per_ps(value: f64) -> Self {
        AngularFrequency(value)
    }

    /// Interpret an ordinary frequency in THz (×2π).
    pub fn from_terahertz(value: f64) -> Self {
        AngularFrequency(2.0 * std::f64::consts::PI * value)
    }

    /// Convert a vacuum wavelength in nm.
    pub fn from_wavelength_nm(lambda_nm: f64) -> Self {
        AngularFrequency(2.0 * std::f64::consts::PI * C_NM_PER_PS / lambda_nm)
    }

    pub fn rad_per_ps(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

/// A relative delay in ps.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Delay(f64);

impl Delay {
    pub fn from_ps(value: f64) -> Self {
        Delay(value)
    }

    pub fn ps(self) -> f64 {
        self.0
    }
}

/// Pump amplitude standard deviation in rad/ps from a wavelength-domain
/// intensity FWHM: σ = (2πc·Δλ/λ²) / (2√(2 ln 2)).
pub fn sigma_from_fwhm_nm(center_nm: f64, fwhm_nm: f64) -> f64 {
    let fwhm_rad_per_ps = 2.0 * std::f64::consts::PI * C_NM_PER_PS * fwhm_nm / (center_nm * center_nm);
    fwhm_rad_per_ps / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// A number with a mandatory unit tag, as written in configuration files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    /// Resolve to an angular frequency. Accepts `rad_per_ps`, `THz` and `nm`.
    pub fn as_angular_frequency(&self) -> Result<AngularFrequency, UnitError> {
        match self.unit.as_str() {
            "rad_per_ps" => Ok(AngularFrequency::from_rad_per_ps(self.value)),
            "THz" => Ok(AngularFrequency::from_terahertz(self.value)),
            "nm" => {
                if self.value <= 0.0 {
                    return Err(UnitError::NonPositiveWavelength(self.value));
                }
                Ok(AngularFrequency::from_wavelength_nm(self.value))
            }
            other => Err(UnitError::UnknownFrequencyUnit(other.to_string())),
        }
    }

    /// Resolve to a frequency width (σ, Δω). Wavelengths are not accepted
    /// because a width in nm is ambiguous without a carrier.
    pub fn as_frequency_width(&self) -> Result<f64, UnitError> {
        match self.unit.as_str() {
            "rad_per_ps" => Ok(self.value),
            "THz" => Ok(2.0 * std::f64::consts::PI * self.value),
            other => Err(UnitError::UnknownWidthUnit(other.to_string())),
        }
    }
}
