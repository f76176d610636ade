//! Characteristic directions, the differential forms attached to each
//! direction and the ODE residuals along S and C+/C- curves.

use crate::error::{Error, Result};
use crate::gas::{ConservState2, GasModel, Primitive2};
use crate::jacobians::{factored_from_velocity, CoeffTable, Direction};
use crate::linalg;
use crate::scalar::Real;

/// Default relative singular-value threshold for [`form_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Local directions of the three characteristic families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharDirections<T> {
    /// Streamtrace direction, parallel to the velocity.
    pub s_dir: Direction<T>,
    /// Direction at angle `phi + beta`.
    pub c_plus_dir: Option<Direction<T>>,
    /// Direction at angle `phi - beta`.
    pub c_minus_dir: Option<Direction<T>>,
    pub t_plus: Option<T>,
    pub t_minus: Option<T>,
}

/// Derivatives `dpsi_i/ds` along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdjointRate<T> {
    pub dpsi_ds: [T; 4],
}

impl<T: Real> AdjointRate<T> {
    pub fn new(dpsi_ds: [T; 4]) -> Self {
        Self { dpsi_ds }
    }
}

/// A residual and the four terms it is the sum of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormResidual<T> {
    pub total: T,
    pub subparts: [T; 4],
}

impl<T: Real> FormResidual<T> {
    pub fn from_subparts(subparts: [T; 4]) -> Self {
        let total = subparts[0] + subparts[1] + subparts[2] + subparts[3];
        Self { total, subparts }
    }

    pub fn max_abs_subpart(&self) -> T {
        linalg::max_abs(self.subparts)
    }
}

pub fn characteristic_directions<T: Real>(
    state: &ConservState2<T>,
    gas: &GasModel<T>,
) -> Result<CharDirections<T>> {
    let p = state.primitive(gas)?;
    directions_from_primitive(&p)
}

pub(crate) fn directions_from_primitive<T: Real>(p: &Primitive2<T>) -> Result<CharDirections<T>> {
    if p.stagnant {
        return Err(Error::StagnantState);
    }
    let s_dir = Direction::new(p.u, p.v)?;
    let c_plus_dir = p.beta.map(|b| Direction::from_angle(p.phi + b));
    let c_minus_dir = p.beta.map(|b| Direction::from_angle(p.phi - b));
    Ok(CharDirections {
        s_dir,
        c_plus_dir,
        c_minus_dir,
        t_plus: c_plus_dir.and_then(|d| d.slope()),
        t_minus: c_minus_dir.and_then(|d| d.slope()),
    })
}

/// Residuals of the two streamtrace ODEs:
/// `Ec psi1' + H u psi2' + H v psi3' + H^2 psi4'` and `psi1' + u psi2' + v psi3' + Ec psi4'`.
pub fn streamtrace_residuals<T: Real>(
    state: &ConservState2<T>,
    rate: &AdjointRate<T>,
    gas: &GasModel<T>,
) -> Result<(FormResidual<T>, FormResidual<T>)> {
    let p = state.primitive(gas)?;
    Ok(streamtrace_residuals_prim(&p, rate))
}

pub(crate) fn streamtrace_residuals_prim<T: Real>(
    p: &Primitive2<T>,
    rate: &AdjointRate<T>,
) -> (FormResidual<T>, FormResidual<T>) {
    let r = rate.dpsi_ds;
    let (u, v, h, ec) = (p.u, p.v, p.h, p.ec);
    (
        FormResidual::from_subparts([ec * r[0], h * u * r[1], h * v * r[2], h * h * r[3]]),
        FormResidual::from_subparts([r[0], u * r[1], v * r[2], ec * r[3]]),
    )
}

/// Residual of the C+/C- ODE written homogeneously in the direction `(xi, eta)`:
/// `(u xi + v eta) psi1' + q xi psi2' + q eta psi3' + H (u xi + v eta) psi4'`, `q = u^2 + v^2`.
pub fn characteristic_residual<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    rate: &AdjointRate<T>,
    gas: &GasModel<T>,
) -> Result<FormResidual<T>> {
    let p = state.primitive(gas)?;
    Ok(characteristic_residual_prim(&p, dir, rate))
}

pub(crate) fn characteristic_residual_prim<T: Real>(
    p: &Primitive2<T>,
    dir: &Direction<T>,
    rate: &AdjointRate<T>,
) -> FormResidual<T> {
    let r = rate.dpsi_ds;
    let (xi, eta) = (dir.dx(), dir.dy());
    let w = p.u * xi + p.v * eta;
    let q = p.u * p.u + p.v * p.v;
    FormResidual::from_subparts([w * r[0], q * xi * r[1], q * eta * r[2], p.h * w * r[3]])
}

/// Coefficient vector on `(dpsi1..dpsi4)` of form `m` (zero-based) of a table,
/// `[C^1, -C^2, C^3, -C^4]`.
pub fn form_row<T: Real>(coeffs: &[T; 4]) -> [T; 4] {
    [coeffs[0], -coeffs[1], coeffs[2], -coeffs[3]]
}

/// The eight differential forms as rows of an 8x4 matrix: rows 0..4 are the
/// x forms `m = 1..4`, rows 4..8 the y forms. Built from the factored
/// coefficients; when `|dx| < |dy|` the table is evaluated with the axes
/// swapped so vertical directions need no special casing. Each row is defined
/// up to a nonzero factor.
pub fn form_matrix<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<[[T; 4]; 8]> {
    let p = state.primitive(gas)?;
    form_matrix_prim(&p, dir, gas)
}

pub(crate) fn form_matrix_prim<T: Real>(
    p: &Primitive2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<[[T; 4]; 8]> {
    if dir.dx().abs() >= dir.dy().abs() {
        form_matrix_direct(p, dir, gas)
    } else {
        form_matrix_swapped(p, dir, gas)
    }
}

fn assemble<T: Real>(table: &CoeffTable<T>) -> [[T; 4]; 8] {
    let mut out = [[T::zero(); 4]; 8];
    for m in 0..4 {
        out[m] = form_row(&table.x[m]);
        out[4 + m] = form_row(&table.y[m]);
    }
    out
}

pub(crate) fn form_matrix_direct<T: Real>(
    p: &Primitive2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<[[T; 4]; 8]> {
    Ok(assemble(&factored_from_velocity(
        p.u, p.v, p.ec, p.h, dir, gas,
    )?))
}

/// Evaluates the table for the mirrored problem `(x, y, u, v) -> (y, x, v, u)`,
/// then maps each form back: an x form of the mirror is a y form of the
/// original and `psi2`, `psi3` trade places.
pub(crate) fn form_matrix_swapped<T: Real>(
    p: &Primitive2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
) -> Result<[[T; 4]; 8]> {
    let mirrored_dir = Direction::new(dir.dy(), dir.dx())?;
    let rows = assemble(&factored_from_velocity(
        p.v,
        p.u,
        p.ec,
        p.h,
        &mirrored_dir,
        gas,
    )?);
    let sigma = [0usize, 2, 1, 3];
    let mut out = [[T::zero(); 4]; 8];
    for m in 0..4 {
        let target = sigma[m];
        for l in 0..4 {
            out[4 + target][sigma[l]] = rows[m][l];
            out[target][sigma[l]] = rows[4 + m][l];
        }
    }
    Ok(out)
}

/// Numeric rank of the form matrix.
pub fn form_rank<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
    rel_tol: T,
) -> Result<usize> {
    Ok(linalg::numeric_rank(
        &form_matrix(state, dir, gas)?,
        rel_tol,
    ))
}

/// Orthonormal basis of the rates annihilated by every form of `dir`.
pub fn form_null_space<T: Real>(
    state: &ConservState2<T>,
    dir: &Direction<T>,
    gas: &GasModel<T>,
    rel_tol: T,
) -> Result<Vec<[T; 4]>> {
    Ok(linalg::null_space(&form_matrix(state, dir, gas)?, rel_tol))
}

/// Relative residual of `gamma1 (1+t^2) H = gamma1 (1+t^2) Ec + (t u - v)^2`.
pub fn degree_two_residual<T: Real>(
    state: &ConservState2<T>,
    t: T,
    gas: &GasModel<T>,
) -> Result<T> {
    let p = state.primitive(gas)?;
    let g1 = gas.gamma1();
    let s = T::one() + t * t;
    let k = t * p.u - p.v;
    let lhs = g1 * s * p.h;
    Ok((lhs - g1 * s * p.ec - k * k).abs() / T::one().max(lhs.abs()))
}
