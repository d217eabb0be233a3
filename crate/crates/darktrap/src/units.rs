//! Physical constants and unit conversions.
//!
//! Everything inside the crate is strict SI: meters, kilograms, seconds,
//! angular frequencies in rad/s, energies in joules. Configuration files use
//! the convenience units common in the lab (kHz for frequencies over 2π,
//! pm/nm for lengths, K/s for heating rates as Ė/k_B, mbar for pressure,
//! µs for times) and are converted here, at the boundary, and nowhere else.
//!
//! | config key suffix | unit          | internal                  |
//! |-------------------|---------------|---------------------------|
//! | `_khz`            | kHz (f = ω/2π)| rad/s                     |
//! | `_pm` / `_nm`     | pm / nm       | m                         |
//! | `_us`             | µs            | s                         |
//! | `_k_per_s`        | K/s (Ė/k_B)   | J/s                       |
//! | `_mbar`           | mbar          | Pa                        |
//! | `_fg`             | fg            | kg                        |
//! | `_deg`            | degrees       | rad                       |

use std::f64::consts::PI;

/// Reduced Planck constant, J·s (CODATA).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Frequency in kHz (ordinary frequency) to angular frequency in rad/s.
pub fn khz_to_rad_per_s(f_khz: f64) -> f64 {
    2.0 * PI * f_khz * 1e3
}

/// Angular frequency in rad/s to ordinary frequency in kHz.
pub fn rad_per_s_to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

pub fn pm_to_m(x: f64) -> f64 {
    x * 1e-12
}

pub fn nm_to_m(x: f64) -> f64 {
    x * 1e-9
}

pub fn us_to_s(t: f64) -> f64 {
    t * 1e-6
}

/// Heating rate quoted as Ė/k_B in K/s to Ė in J/s.
pub fn k_per_s_to_j_per_s(rate: f64) -> f64 {
    rate * K_B
}

pub fn mbar_to_pa(p: f64) -> f64 {
    p * 100.0
}

pub fn fg_to_kg(m: f64) -> f64 {
    m * 1e-18
}

pub fn deg_to_rad(a: f64) -> f64 {
    a * PI / 180.0
}
