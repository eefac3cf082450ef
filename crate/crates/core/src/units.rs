//! Unit conventions.
//!
//! Everything inside the crate runs with ħ = 1: energies are angular
//! frequencies in rad/s and times are seconds. Input files carry
//! frequencies in Hz, so the only conversions needed are the two below.

use core::f64::consts::TAU;

/// The global unit convention. Carries no state; it exists so callers can
/// name the convention explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UnitConvention;

impl UnitConvention {
    pub const HBAR: f64 = 1.0;

    /// Hz to rad/s.
    #[inline]
    pub fn angular(hz: f64) -> f64 {
        hz * TAU
    }

    /// rad/s to Hz.
    #[inline]
    pub fn hz(angular: f64) -> f64 {
        angular / TAU
    }

    /// One full relative-precession period `2πħ/Δ` for an angular
    /// frequency difference `Δ`.
    #[inline]
    pub fn period(angular: f64) -> f64 {
        TAU * Self::HBAR / angular
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn period_of_1408_hz() {
        let p = UnitConvention::period(UnitConvention::angular(1408.0));
        assert!((p - 1.0 / 1408.0).abs() < 1e-18);
    }

    proptest! {
        #[test]
        fn hz_round_trip(hz in -1e6f64..1e6) {
            let back = UnitConvention::hz(UnitConvention::angular(hz));
            prop_assert!((back - hz).abs() <= 2.0 * f64::EPSILON * hz.abs());
        }
    }
}
