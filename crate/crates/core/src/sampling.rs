//! Seeded random states and directions for identity checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gas::{ConservState2, ConservState3, GasModel};
use crate::jacobians::Direction;

/// Deterministic generator of flow states and directions.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    gas: GasModel<f64>,
}

/// States within this distance of `M = 1` are rejected by [`Sampler::supersonic`].
pub const SONIC_EXCLUSION: f64 = 1e-6;

impl Sampler {
    pub fn new(seed: u64, gas: GasModel<f64>) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            gas,
        }
    }

    pub fn gas(&self) -> &GasModel<f64> {
        &self.gas
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    fn rho_c(&mut self) -> (f64, f64) {
        (self.uniform(0.5, 2.0), self.uniform(0.3, 2.0))
    }

    /// Any moving state: velocity components in `[-3, 3]`.
    pub fn generic(&mut self) -> ConservState2<f64> {
        let (rho, c) = self.rho_c();
        loop {
            let (u, v) = (self.uniform(-3.0, 3.0), self.uniform(-3.0, 3.0));
            if u.hypot(v) > 1e-3 {
                return ConservState2::from_primitive(
                    rho,
                    u,
                    v,
                    rho * c * c / self.gas.gamma(),
                    &self.gas,
                );
            }
        }
    }

    /// Supersonic state `M in (1, 4)` with its flow angle.
    pub fn supersonic(&mut self) -> (ConservState2<f64>, f64) {
        let (rho, c) = self.rho_c();
        let mach = loop {
            let m = self.uniform(1.0, 4.0);
            if m - 1.0 >= SONIC_EXCLUSION {
                break m;
            }
        };
        let phi = self.uniform(-std::f64::consts::PI, std::f64::consts::PI);
        (ConservState2::from_mach(rho, c, mach, phi, &self.gas), phi)
    }

    pub fn direction(&mut self) -> Direction<f64> {
        Direction::from_angle(self.uniform(0.0, std::f64::consts::TAU))
    }

    /// Direction with `|dx| >= min_dx`, for slope-based formulas.
    pub fn direction_with_dx(&mut self, min_dx: f64) -> Direction<f64> {
        loop {
            let d = self.direction();
            if d.dx().abs() >= min_dx {
                return d;
            }
        }
    }

    pub fn state3(&mut self) -> ConservState3<f64> {
        let (rho, c) = self.rho_c();
        let (u, v, w) = (
            self.uniform(-3.0, 3.0),
            self.uniform(-3.0, 3.0),
            self.uniform(-3.0, 3.0),
        );
        ConservState3::from_primitive(rho, u, v, w, rho * c * c / self.gas.gamma(), &self.gas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let g = GasModel::diatomic();
        let mut a = Sampler::new(7, g);
        let mut b = Sampler::new(7, g);
        for _ in 0..20 {
            assert_eq!(a.generic(), b.generic());
            assert_eq!(a.supersonic(), b.supersonic());
        }
    }

    #[test]
    fn supersonic_states_are_supersonic() {
        let g = GasModel::diatomic();
        let mut s = Sampler::new(1, g);
        for _ in 0..200 {
            let (st, phi) = s.supersonic();
            let p = st.primitive(&g).unwrap();
            assert!(p.mach > 1.0 + SONIC_EXCLUSION * 0.5 && p.mach < 4.0);
            assert!((p.phi - phi).sin().abs() < 1e-12);
        }
        assert!(s.direction_with_dx(0.5).dx().abs() >= 0.5);
    }
}
