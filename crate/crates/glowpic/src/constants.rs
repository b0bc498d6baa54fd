//! Physical constants (CODATA 2018) and derived electron kinematics.

/// Elementary charge [C].
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Electron mass [kg].
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Mass of an argon atom [kg].
pub const ARGON_MASS: f64 = 6.633_520_9e-26;

/// eV to Joule conversion factor.
pub const EV_TO_J: f64 = ELEMENTARY_CHARGE;

/// The constants the solver actually computes with.
///
/// Defaults are the CODATA values above; they are overridable from the
/// config file so tests can use round numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConstants {
    pub electron_mass: f64,
    pub elementary_charge: f64,
    pub epsilon0: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            electron_mass: ELECTRON_MASS,
            elementary_charge: ELEMENTARY_CHARGE,
            epsilon0: EPSILON_0,
        }
    }
}

impl PhysConstants {
    /// Electron charge-to-mass ratio with sign, `-e/m_e` [C/kg].
    #[inline]
    pub fn q_over_m(&self) -> f64 {
        -self.elementary_charge / self.electron_mass
    }

    /// Kinetic energy of an electron with velocity `v` [eV].
    #[inline]
    pub fn energy_ev(&self, v: [f64; 3]) -> f64 {
        let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        0.5 * self.electron_mass * v2 / self.elementary_charge
    }

    /// Electron speed corresponding to a kinetic energy in eV [m/s].
    #[inline]
    pub fn speed_from_ev(&self, energy_ev: f64) -> f64 {
        (2.0 * energy_ev.max(0.0) * self.elementary_charge / self.electron_mass).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_speed_round_trip() {
        let c = PhysConstants::default();
        let eps = 4.25;
        let s = c.speed_from_ev(eps);
        let back = c.energy_ev([s, 0.0, 0.0]);
        assert!((back - eps).abs() < 1e-12 * eps);
    }

    #[test]
    fn one_ev_electron_speed() {
        // v = sqrt(2 * e / m_e) ~ 5.931e5 m/s
        let c = PhysConstants::default();
        let v = c.speed_from_ev(1.0);
        assert!((v - 5.930_969e5).abs() < 1e0);
    }
}
