//! Perfect-gas thermodynamics and the classical characteristic quantities of
//! supersonic flow (Mach angle, Prandtl–Meyer function, Riemann invariants).
//!
//! All angles are radians.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Calorically perfect gas with constant ratio of specific heats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel<T> {
    gamma: T,
}

impl<T: Real> GasModel<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gamma must be > 1, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// Diatomic perfect gas, gamma = 7/5.
    pub fn diatomic() -> Self {
        Self { gamma: T::of(1.4) }
    }

    #[inline]
    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// gamma - 1
    #[inline]
    pub fn gamma1(&self) -> T {
        self.gamma - T::one()
    }
}

impl<T: Real> Default for GasModel<T> {
    fn default() -> Self {
        Self::diatomic()
    }
}

/// Conservative 2D state `(rho, rho u, rho v, rho E)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservState2<T> {
    pub rho: T,
    pub rho_u: T,
    pub rho_v: T,
    pub rho_e: T,
}

/// Conservative 3D state `(rho, rho u, rho v, rho w, rho E)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservState3<T> {
    pub rho: T,
    pub rho_u: T,
    pub rho_v: T,
    pub rho_w: T,
    pub rho_e: T,
}

/// Primitive and derived quantities of a 2D state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive2<T> {
    pub rho: T,
    pub u: T,
    pub v: T,
    pub p: T,
    /// Speed of sound.
    pub c: T,
    pub mach: T,
    /// Total enthalpy `c^2/(gamma-1) + Ec`.
    pub h: T,
    /// Kinetic energy per unit mass.
    pub ec: T,
    /// Flow angle `atan2(v, u)`; zero for a stagnant state.
    pub phi: T,
    /// Mach angle `asin(1/M)`, present iff `M >= 1`.
    pub beta: Option<T>,
    /// Zero velocity: `phi` carries no information.
    pub stagnant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive3<T> {
    pub rho: T,
    pub u: T,
    pub v: T,
    pub w: T,
    pub p: T,
    pub c: T,
    pub mach: T,
    pub h: T,
    pub ec: T,
}

fn non_physical<T: Real>(rho: T, p: T) -> Error {
    Error::NonPhysicalState {
        rho: rho.to_f64().unwrap_or(f64::NAN),
        p: p.to_f64().unwrap_or(f64::NAN),
    }
}

impl<T: Real> ConservState2<T> {
    pub fn new(rho: T, rho_u: T, rho_v: T, rho_e: T) -> Self {
        Self {
            rho,
            rho_u,
            rho_v,
            rho_e,
        }
    }

    pub fn from_primitive(rho: T, u: T, v: T, p: T, gas: &GasModel<T>) -> Self {
        let ec = T::half() * (u * u + v * v);
        Self {
            rho,
            rho_u: rho * u,
            rho_v: rho * v,
            rho_e: p / gas.gamma1() + rho * ec,
        }
    }

    /// State with density `rho`, sound speed `c`, Mach number `mach` and flow angle `phi`.
    pub fn from_mach(rho: T, c: T, mach: T, phi: T, gas: &GasModel<T>) -> Self {
        let q = mach * c;
        let p = rho * c * c / gas.gamma();
        Self::from_primitive(rho, q * phi.cos(), q * phi.sin(), p, gas)
    }

    pub fn pressure(&self, gas: &GasModel<T>) -> T {
        gas.gamma1()
            * (self.rho_e
                - T::half() * (self.rho_u * self.rho_u + self.rho_v * self.rho_v) / self.rho)
    }

    pub fn primitive(&self, gas: &GasModel<T>) -> Result<Primitive2<T>> {
        primitive_from_conservative(self, gas)
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.rho, self.rho_u, self.rho_v, self.rho_e]
    }

    pub fn from_array(q: [T; 4]) -> Self {
        Self::new(q[0], q[1], q[2], q[3])
    }
}

impl<T: Real> ConservState3<T> {
    pub fn from_primitive(rho: T, u: T, v: T, w: T, p: T, gas: &GasModel<T>) -> Self {
        let ec = T::half() * (u * u + v * v + w * w);
        Self {
            rho,
            rho_u: rho * u,
            rho_v: rho * v,
            rho_w: rho * w,
            rho_e: p / gas.gamma1() + rho * ec,
        }
    }

    pub fn as_array(&self) -> [T; 5] {
        [self.rho, self.rho_u, self.rho_v, self.rho_w, self.rho_e]
    }

    pub fn from_array(q: [T; 5]) -> Self {
        Self {
            rho: q[0],
            rho_u: q[1],
            rho_v: q[2],
            rho_w: q[3],
            rho_e: q[4],
        }
    }

    pub fn primitive(&self, gas: &GasModel<T>) -> Result<Primitive3<T>> {
        let rho = self.rho;
        if !(rho > T::zero()) {
            return Err(non_physical(rho, T::nan()));
        }
        let (u, v, w) = (self.rho_u / rho, self.rho_v / rho, self.rho_w / rho);
        let ec = T::half() * (u * u + v * v + w * w);
        let p = gas.gamma1() * (self.rho_e - rho * ec);
        if !(p > T::zero()) || !p.is_finite() {
            return Err(non_physical(rho, p));
        }
        let c = (gas.gamma() * p / rho).sqrt();
        let h = c * c / gas.gamma1() + ec;
        Ok(Primitive3 {
            rho,
            u,
            v,
            w,
            p,
            c,
            mach: (T::two() * ec).sqrt() / c,
            h,
            ec,
        })
    }
}

/// Primitive variables, sound speed, Mach number, enthalpy and angles of a
/// conservative state.
pub fn primitive_from_conservative<T: Real>(
    state: &ConservState2<T>,
    gas: &GasModel<T>,
) -> Result<Primitive2<T>> {
    let rho = state.rho;
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(non_physical(rho, T::nan()));
    }
    let u = state.rho_u / rho;
    let v = state.rho_v / rho;
    let ec = T::half() * (u * u + v * v);
    let p = gas.gamma1() * (state.rho_e - rho * ec);
    if !(p > T::zero()) || !p.is_finite() {
        return Err(non_physical(rho, p));
    }
    let c = (gas.gamma() * p / rho).sqrt();
    let speed = u.hypot(v);
    let mach = speed / c;
    let stagnant = speed == T::zero();
    let phi = if stagnant { T::zero() } else { v.atan2(u) };
    let beta = if mach >= T::one() {
        Some((T::one() / mach).asin())
    } else {
        None
    };
    Ok(Primitive2 {
        rho,
        u,
        v,
        p,
        c,
        mach,
        h: c * c / gas.gamma1() + ec,
        ec,
        phi,
        beta,
        stagnant,
    })
}

/// Prandtl–Meyer function nu(M) for `M >= 1`.
pub fn prandtl_meyer<T: Real>(mach: T, gas: &GasModel<T>) -> Result<T> {
    if !(mach >= T::one()) {
        return Err(Error::SubsonicInput {
            mach: mach.to_f64().unwrap_or(f64::NAN),
        });
    }
    let g = gas.gamma();
    let ratio = (g + T::one()) / (g - T::one());
    let m2 = mach * mach - T::one();
    Ok(ratio.sqrt() * (m2 / ratio).sqrt().atan() - m2.sqrt().atan())
}

/// Riemann invariants `(k_plus, k_minus) = (phi - nu(M), phi + nu(M))`,
/// constant along C+ and C- respectively in homentropic irrotational flow.
pub fn riemann_invariants<T: Real>(state: &ConservState2<T>, gas: &GasModel<T>) -> Result<(T, T)> {
    let prim = primitive_from_conservative(state, gas)?;
    let nu = prandtl_meyer(prim.mach, gas)?;
    Ok((prim.phi - nu, prim.phi + nu))
}

/// Euler fluxes `(F_x, F_y)` of a 2D state.
pub fn fluxes_2d<T: Real>(state: &ConservState2<T>, gas: &GasModel<T>) -> ([T; 4], [T; 4]) {
    let rho = state.rho;
    let (u, v) = (state.rho_u / rho, state.rho_v / rho);
    let p = state.pressure(gas);
    let h = (state.rho_e + p) / rho;
    (
        [
            state.rho_u,
            state.rho_u * u + p,
            state.rho_u * v,
            state.rho_u * h,
        ],
        [
            state.rho_v,
            state.rho_v * u,
            state.rho_v * v + p,
            state.rho_v * h,
        ],
    )
}

/// Euler fluxes `(F_x, F_y, F_z)` of a 3D state.
pub fn fluxes_3d<T: Real>(state: &ConservState3<T>, gas: &GasModel<T>) -> [[T; 5]; 3] {
    let rho = state.rho;
    let vel = [state.rho_u / rho, state.rho_v / rho, state.rho_w / rho];
    let mom = [state.rho_u, state.rho_v, state.rho_w];
    let ec = T::half() * (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]);
    let p = GasModel::gamma1(gas) * (state.rho_e - rho * ec);
    let h = (state.rho_e + p) / rho;
    let mut f = [[T::zero(); 5]; 3];
    for d in 0..3 {
        f[d][0] = mom[d];
        for k in 0..3 {
            f[d][k + 1] = mom[d] * vel[k];
        }
        f[d][d + 1] = f[d][d + 1] + p;
        f[d][4] = mom[d] * h;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gas() -> GasModel<f64> {
        GasModel::diatomic()
    }

    #[test]
    fn supersonic_example_state() {
        let g = gas();
        let s = ConservState2::from_primitive(1.0, 2.0, 0.0, 1.0 / 1.4, &g);
        let p = primitive_from_conservative(&s, &g).unwrap();
        assert!((p.c - 1.0).abs() < 1e-15);
        assert!((p.mach - 2.0).abs() < 1e-15);
        assert!((p.ec - 2.0).abs() < 1e-15);
        assert!((p.h - 4.5).abs() < 1e-14);
        assert!((p.beta.unwrap() - PI / 6.0).abs() < 1e-15);
        assert!(!p.stagnant);
    }

    #[test]
    fn stagnant_state_has_zero_angle() {
        let g = gas();
        let s = ConservState2::from_primitive(1.0, 0.0, 0.0, 1.0, &g);
        let p = s.primitive(&g).unwrap();
        assert_eq!(p.mach, 0.0);
        assert_eq!(p.ec, 0.0);
        assert_eq!(p.phi, 0.0);
        assert!(p.stagnant);
        assert!(p.beta.is_none());
        assert!((p.h - p.c * p.c / 0.4).abs() < 1e-14);
    }

    #[test]
    fn rotated_state_has_right_angle() {
        let g = gas();
        let s = ConservState2::from_primitive(1.0, 0.0, 2.0, 1.0 / 1.4, &g);
        let p = s.primitive(&g).unwrap();
        assert!((p.mach - 2.0).abs() < 1e-15);
        assert!((p.phi - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn non_physical_states_rejected() {
        let g = gas();
        assert!(matches!(
            ConservState2::new(0.0, 0.0, 0.0, 1.0).primitive(&g),
            Err(Error::NonPhysicalState { .. })
        ));
        assert!(matches!(
            ConservState2::new(1.0, 3.0, 0.0, 1.0).primitive(&g),
            Err(Error::NonPhysicalState { .. })
        ));
        assert!(GasModel::new(1.0).is_err());
    }

    #[test]
    fn prandtl_meyer_values() {
        let g = gas();
        assert_eq!(prandtl_meyer(1.0, &g).unwrap(), 0.0);
        // 30-digit reference evaluation of the closed form
        assert!((prandtl_meyer(2.0, &g).unwrap() - 0.460_413_682_082_694_73).abs() < 1e-15);
        assert!(
            (prandtl_meyer(2.0, &g).unwrap().to_degrees() - 26.379_760_813_416_457).abs() < 1e-12
        );
        assert!((prandtl_meyer(1.5, &g).unwrap() - 0.207_785_092_164_098_17).abs() < 1e-15);
        let limit = (6.0f64.sqrt() - 1.0) * PI / 2.0;
        assert!((prandtl_meyer(1e9, &g).unwrap() - limit).abs() < 1e-8);
        assert!(matches!(
            prandtl_meyer(0.9, &g),
            Err(Error::SubsonicInput { .. })
        ));
    }

    #[test]
    fn prandtl_meyer_in_single_precision() {
        let g = GasModel::<f32>::diatomic();
        assert!((prandtl_meyer(2.0f32, &g).unwrap() - 0.460_413_7).abs() < 1e-6);
    }

    #[test]
    fn riemann_invariants_values() {
        let g = gas();
        let sonic = ConservState2::from_mach(1.0, 1.0, 1.0, 0.3, &g);
        let (kp, km) = riemann_invariants(&sonic, &g).unwrap();
        assert!((kp - 0.3).abs() < 1e-7 && (km - 0.3).abs() < 1e-7);

        let m2 = ConservState2::from_mach(1.0, 1.0, 2.0, 0.0, &g);
        let (kp, km) = riemann_invariants(&m2, &g).unwrap();
        assert!((kp + 0.460_413_682_082_694_73).abs() < 1e-14);
        assert!((km - 0.460_413_682_082_694_73).abs() < 1e-14);

        let alpha = 1.0f64.to_radians();
        let free = ConservState2::from_mach(1.0, 1.0, 1.5, alpha, &g);
        let (kp, km) = riemann_invariants(&free, &g).unwrap();
        assert!((kp - (-0.190_331_799_644_154_87)).abs() < 1e-14);
        assert!((km - 0.225_238_384_684_041_47).abs() < 1e-14);

        let sub = ConservState2::from_mach(1.0, 1.0, 0.5, 0.0, &g);
        assert!(matches!(
            riemann_invariants(&sub, &g),
            Err(Error::SubsonicInput { .. })
        ));
    }
}
