//! Transposed flux Jacobians, the characteristic determinant of the adjoint
//! system and the precalculated cofactor coefficients of its expansions.

use crate::error::{Error, Result};
use crate::gas::{ConservState2, ConservState3, GasModel};
use crate::linalg::{Mat4, Mat5, Mat8};
use crate::scalar::Real;

/// Unit displacement direction `(dx, dy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<T> {
    dx: T,
    dy: T,
}

impl<T: Real> Direction<T> {
    /// Normalizes `(dx, dy)`; the zero vector is rejected.
    pub fn new(dx: T, dy: T) -> Result<Self> {
        let n = dx.hypot(dy);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::DegenerateDirection(
                "zero or non-finite displacement",
            ));
        }
        Ok(Self {
            dx: dx / n,
            dy: dy / n,
        })
    }

    /// Unit vector at angle `theta`; components below machine epsilon are
    /// snapped to zero so axis-aligned angles give exact axis vectors.
    pub fn from_angle(theta: T) -> Self {
        let snap = |v: T| if v.abs() < T::epsilon() { T::zero() } else { v };
        let (dx, dy) = (snap(theta.cos()), snap(theta.sin()));
        let n = dx.hypot(dy);
        Self {
            dx: dx / n,
            dy: dy / n,
        }
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.dx
    }

    #[inline]
    pub fn dy(&self) -> T {
        self.dy
    }

    pub fn angle(&self) -> T {
        self.dy.atan2(self.dx)
    }

    /// `dy/dx`, absent for a vertical direction.
    pub fn slope(&self) -> Option<T> {
        if self.dx == T::zero() {
            None
        } else {
            Some(self.dy / self.dx)
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

/// Transposed Jacobians `(A^T, B^T)` of the 2D Euler fluxes.
pub fn jacobian_transpose_2d<T: Real>(
    state: &ConservState2<T>,
    gas: &GasModel<T>,
) -> Result<(Mat4<T>, Mat4<T>)> {
    let p = state.primitive(gas)?;
    Ok(jacobians_from_velocity(p.u, p.v, p.ec, p.h, gas))
}

pub(crate) fn jacobians_from_velocity<T: Real>(
    u: T,
    v: T,
    ec: T,
    h: T,
    gas: &GasModel<T>,
) -> (Mat4<T>, Mat4<T>) {
    let g = gas.gamma();
    let g1 = gas.gamma1();
    let (z, one, three) = (T::zero(), T::one(), T::of(3.0));
    let a = [
        [z, g1 * ec - u * u, -u * v, (g1 * ec - h) * u],
        [one, (three - g) * u, v, h - g1 * u * u],
        [z, -g1 * v, u, -g1 * u * v],
        [z, g1, z, g * u],
    ];
    let b = [
        [z, -u * v, g1 * ec - v * v, (g1 * ec - h) * v],
        [z, v, -g1 * u, -g1 * u * v],
        [one, u, (three - g) * v, h - g1 * v * v],
        [z, z, g1, g * v],
    ];
    (a, b)
}

/// Transposed Jacobians `[A^T, B^T, C^T]` of the 3D Euler fluxes.
pub fn jacobian_transpose_3d<T: Real>(
    state: &ConservState3<T>,
    gas: &GasModel<T>,
) -> Result<[Mat5<T>; 3]> {
    let p = state.primitive(gas)?;
    let (u, v, w, ec, h) = (p.u, p.v, p.w, p.ec, p.h);
    let g = gas.gamma();
    let g1 = gas.gamma1();
    let (z, one, three) = (T::zero(), T::one(), T::of(3.0));
    let a = [
        [z, g1 * ec - u * u, -u * v, -u * w, (g1 * ec - h) * u],
        [one, (three - g) * u, v, w, h - g1 * u * u],
        [z, -g1 * v, u, z, -g1 * u * v],
        [z, -g1 * w, z, u, -g1 * u * w],
        [z, g1, z, z, g * u],
    ];
    let b = [
        [z, -u * v, g1 * ec - v * v, -v * w, (g1 * ec - h) * v],
        [z, v, -g1 * u, z, -g1 * u * v],
        [one, u, (three - g) * v, w, h - g1 * v * v],
        [z, z, -g1 * w, v, -g1 * v * w],
        [z, z, g1, z, g * v],
    ];
    let c = [
        [z, -u * w, -v * w, g1 * ec - w * w, (g1 * ec - h) * w],
        [z, w, z, -g1 * u, -g1 * u * w],
        [z, z, w, -g1 * v, -g1 * v * w],
        [one, u, v, (three - g) * w, h - g1 * w * w],
        [z, z, z, g1, g * w],
    ];
    Ok([a, b, c])
}

/// The 8x8 system `[[dx I, dy I], [-A^T, -B^T]]` acting on `(dpsi/dx, dpsi/dy)`.
pub fn system_matrix_8<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<Mat8<T>> {
    let (a, b) = jacobian_transpose_2d(state, gas)?;
    let mut m = [[T::zero(); 8]; 8];
    for i in 0..4 {
        m[i][i] = dir.dx;
        m[i][4 + i] = dir.dy;
        for j in 0..4 {
            m[4 + i][j] = -a[i][j];
            m[4 + i][4 + j] = -b[i][j];
        }
    }
    Ok(m)
}

/// Determinant of the 8x8 system by LU, and its closed-form factorization
/// `(-v dx + u dy)^2 ((-v dx + u dy)^2 - c^2 ds^2)`.
pub fn characteristic_determinant<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<(T, T)> {
    let m = system_matrix_8(state, dir, gas)?;
    let p = state.primitive(gas)?;
    let k = -p.v * dir.dx + p.u * dir.dy;
    let ds2 = dir.dx * dir.dx + dir.dy * dir.dy;
    Ok((
        crate::linalg::determinant(m),
        k * k * (k * k - p.c * p.c * ds2),
    ))
}

/// Cofactor coefficients `C^l_{mx}`, `C^l_{my}` (or their factored versions).
///
/// `x[m][l]` holds `C^{l+1}_{(m+1)x}`; use [`CoeffTable::cx`] / [`CoeffTable::cy`]
/// for one-based access.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffTable<T> {
    pub x: Mat4<T>,
    pub y: Mat4<T>,
    /// `u t - v`
    pub kappa: T,
    pub slope: Option<T>,
    /// True when the common `kappa dx` factor has been divided out.
    pub factored: bool,
}

impl<T: Real> CoeffTable<T> {
    /// `C^l_{mx}`, one-based.
    pub fn cx(&self, m: usize, l: usize) -> T {
        self.x[m - 1][l - 1]
    }

    /// `C^l_{my}`, one-based.
    pub fn cy(&self, m: usize, l: usize) -> T {
        self.y[m - 1][l - 1]
    }

    fn scaled(mut self, f: T) -> Self {
        for row in self.x.iter_mut().chain(self.y.iter_mut()) {
            for v in row.iter_mut() {
                *v = *v * f;
            }
        }
        self
    }
}

/// Coefficients with the `kappa dx` factor removed; finite along streamtraces.
pub fn coefficient_table_factored<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<CoeffTable<T>> {
    let p = state.primitive(gas)?;
    factored_from_velocity(p.u, p.v, p.ec, p.h, dir, gas)
}

pub(crate) fn factored_from_velocity<T: Real>(
    u: T,
    v: T,
    ec: T,
    h: T,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<CoeffTable<T>> {
    let (dx, dy) = (dir.dx, dir.dy);
    if dx == T::zero() {
        return Err(Error::DegenerateDirection(
            "dx = 0: expand along dy instead",
        ));
    }
    let g = gas.gamma();
    let g1 = gas.gamma1();
    let one = T::one();
    let two = T::two();
    let t = dy / dx;
    let kappa = u * t - v;
    let q = u * u + v * v;
    let w = u + v * t;
    let t2 = t * t;

    let q2 = g1 * h + g1 * ec + g * v * kappa;
    let p2 = g1 * u * u * v - u * v * v * t + g * v * v * v - g1 * (u * t + v) * (ec + h);
    let q3 = t * g1 * h + t * g1 * ec - g * u * kappa;
    let p3 =
        (g + one) * u * u * v - t * g1 * u * v * v + (v + u * t) * (g1 * ec + g1 * h - g * u * u);
    let r1 =
        (two * t * u + (t2 - one) * v) * q2 - w * (g1 * t * h + g1 * u * kappa + g * v * kappa * t);
    let r3 = (t * v * v - u * kappa) * (-g1 * u + (g + one) * t * v)
        - (u * t - (one + two * t2) * v) * (g1 * ec + g1 * h - g * v * v);
    let r4x = (g1 + g * t2) * u * u * v - two * u * v * v * t
        + g1 * h * kappa
        + (g + g1 * t2) * v * v * v
        - g1 * v * (one + t2) * ec;
    let r4y = (g1 + g * t2) * u * u * u - two * u * u * v * t - g1 * t * kappa * h
        + (g + g1 * t2) * u * v * v
        - g1 * u * (one + t2) * ec;
    let r2y = (v * kappa + u * u) * (v * t - (g1 + g * t2) * u) - (v * t - (two + t2) * u) * q2;

    let xx = dx * dx;
    let xy = dx * dy;
    let x = [
        [
            -xx * r1,
            xy * g1 * q * h,
            -xy * g1 * t * q * h,
            xy * g1 * w * h * h,
        ],
        [-xy * q2, -xx * p2, xy * p2, xy * h * q2],
        [xy * q3, -xy * p3, xx * r3, -xy * h * q3],
        [xy * g1 * w, -xy * g1 * q, xy * g1 * t * q, -xx * r4x],
    ];
    let y = [
        [
            xx * r4y,
            -xx * g1 * q * h,
            xx * g1 * t * q * h,
            -xx * g1 * w * h * h,
        ],
        [xx * q2, -xx * r2y, -xx * p2, -xx * h * q2],
        [-xx * q3, xx * p3, -xx * t * p3, xx * h * q3],
        [-xx * g1 * w, xx * g1 * q, -xx * g1 * t * q, xx * r4y],
    ];
    let table = CoeffTable {
        x,
        y,
        kappa,
        slope: Some(t),
        factored: true,
    };
    if table
        .x
        .iter()
        .chain(&table.y)
        .flatten()
        .any(|v| !v.is_finite())
    {
        return Err(Error::DegenerateDirection("non-finite coefficient"));
    }
    Ok(table)
}

/// Closed-form cofactor coefficients `C^l_{mx}`, `C^l_{my}`.
pub fn coefficient_table<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<CoeffTable<T>> {
    let f = coefficient_table_factored(state, dir, gas)?;
    let k = f.kappa * dir.dx;
    Ok(CoeffTable {
        factored: false,
        ..f.scaled(k)
    })
}

/// Left null vectors of `A sin(mu) - B cos(mu)` for `mu = alpha, alpha + beta, alpha - beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeftEigenvectors<T> {
    pub alpha: [T; 4],
    pub alpha_plus_beta: [T; 4],
    pub alpha_minus_beta: [T; 4],
    /// The three angles, same order.
    pub angles: [T; 3],
}

/// Left eigenvectors of a uniform supersonic state whose flow angle is `alpha`.
pub fn left_eigenvectors<T: Real>(
    state: &ConservState2<T>,
    alpha: T,
    gas: &GasModel<T>,
) -> Result<LeftEigenvectors<T>> {
    let p = state.primitive(gas)?;
    let beta = match p.beta {
        Some(b) if p.mach > T::one() => b,
        _ => {
            return Err(Error::SubsonicInput {
                mach: p.mach.to_f64().unwrap_or(f64::NAN),
            })
        }
    };
    let tol = T::epsilon().sqrt() * T::of(10.0);
    let mismatch = (p.phi - alpha)
        .sin()
        .abs()
        .max(T::one() - (p.phi - alpha).cos());
    if mismatch > tol {
        return Err(Error::InvalidArgument(format!(
            "flow angle {} differs from alpha {}",
            p.phi, alpha
        )));
    }
    let (rho, c, u, v) = (p.rho, p.c, p.u, p.v);
    let g1 = gas.gamma1();
    let one = T::one();
    let m2 = p.mach * p.mach;
    let head = c / rho * (one + g1 * T::half() * m2);
    let tail = g1 / (rho * c);
    let (am, ap) = (alpha - beta, alpha + beta);
    let minus = [
        head,
        (am.sin() - g1 * u / c) / rho,
        (-am.cos() - g1 * v / c) / rho,
        tail,
    ];
    let plus = [
        head,
        -(ap.sin() + g1 * u / c) / rho,
        -(-ap.cos() + g1 * v / c) / rho,
        tail,
    ];
    let d = alpha.cos() * u + alpha.sin() * v;
    let c2 = c * c;
    let stream = [
        -one - g1 * T::half() * m2,
        g1 * u / c2 + T::two() * alpha.cos() / d,
        g1 * v / c2 + T::two() * alpha.sin() / d,
        -g1 / c2,
    ];
    Ok(LeftEigenvectors {
        alpha: stream,
        alpha_plus_beta: plus,
        alpha_minus_beta: minus,
        angles: [alpha, ap, am],
    })
}
