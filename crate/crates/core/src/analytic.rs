//! Closed-form adjoint fields of a uniform supersonic flow ("stripe" fields),
//! the quantities that stay constant along each family of curves, and the
//! three-dimensional streamtrace combinations.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::forms::{characteristic_residual_prim, directions_from_primitive, AdjointRate};
use crate::gas::{ConservState2, ConservState3, GasModel};
use crate::jacobians::{
    jacobian_transpose_2d, jacobian_transpose_3d, left_eigenvectors, LeftEigenvectors,
};
use crate::linalg::{max_abs, vec_mat};
use crate::scalar::Real;
use crate::tracer::Curve;

/// Piecewise-linear function given by a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Real> Profile<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::InvalidArgument(
                "profile needs at least two (x, y) pairs".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "profile abscissae must be finite and increasing".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    /// Identically zero on `[lo, hi]`.
    pub fn zero(lo: T, hi: T) -> Self {
        Self {
            xs: vec![lo, hi],
            ys: vec![T::zero(); 2],
        }
    }

    /// Hat of the given height supported on `[center - width/2, center + width/2]`,
    /// zero elsewhere on `[lo, hi]`.
    pub fn hat(center: T, width: T, height: T, lo: T, hi: T) -> Result<Self> {
        let half = width * T::half();
        let z = T::zero();
        Self::new(
            vec![lo, center - half, center, center + half, hi],
            vec![z, z, height, z, z],
        )
    }

    pub fn domain(&self) -> (T, T) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn segment(&self, v: T) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(v >= lo && v <= hi) {
            let f = |t: T| t.to_f64().unwrap_or(f64::NAN);
            return Err(Error::OutOfProfileDomain {
                value: f(v),
                lo: f(lo),
                hi: f(hi),
            });
        }
        let k = self.xs.partition_point(|&x| x <= v);
        Ok(k.clamp(1, self.xs.len() - 1) - 1)
    }

    pub fn eval(&self, v: T) -> Result<T> {
        let k = self.segment(v)?;
        let (x0, x1, y0, y1) = (self.xs[k], self.xs[k + 1], self.ys[k], self.ys[k + 1]);
        Ok(y0 + (y1 - y0) * (v - x0) / (x1 - x0))
    }

    /// Slope of the segment containing `v` (the right one at a breakpoint).
    pub fn derivative(&self, v: T) -> Result<T> {
        let k = self.segment(v)?;
        Ok((self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k]))
    }

    /// Abscissae where the slope changes.
    pub fn breakpoints(&self) -> &[T] {
        &self.xs
    }
}

/// Adjoint field `sum_mu phi_mu(x sin mu - y cos mu) lambda^mu` over
/// `mu = alpha, alpha + beta, alpha - beta` in a uniform supersonic flow.
#[derive(Debug, Clone)]
pub struct StripeField<T> {
    pub gas: GasModel<T>,
    pub mach: T,
    pub alpha: T,
    pub rho: T,
    pub c: T,
    /// Profiles for `alpha`, `alpha + beta`, `alpha - beta`.
    pub profiles: [Profile<T>; 3],
    state: ConservState2<T>,
    eig: LeftEigenvectors<T>,
}

impl<T: Real> StripeField<T> {
    pub fn new(
        gas: GasModel<T>,
        mach: T,
        alpha: T,
        rho: T,
        c: T,
        profiles: [Profile<T>; 3],
    ) -> Result<Self> {
        if !(mach > T::one()) {
            return Err(Error::SubsonicInput {
                mach: mach.to_f64().unwrap_or(f64::NAN),
            });
        }
        let state = ConservState2::from_mach(rho, c, mach, alpha, &gas);
        let eig = left_eigenvectors(&state, alpha, &gas)?;
        Ok(Self {
            gas,
            mach,
            alpha,
            rho,
            c,
            profiles,
            state,
            eig,
        })
    }

    /// Unit-density, unit-sound-speed field with three staggered hats of
    /// height 1 and width 0.5 centred at 0, 0.05 and -0.05.
    pub fn demo(mach: T, alpha: T) -> Result<Self> {
        let (lo, hi) = (T::of(-100.0), T::of(100.0));
        let hat = |c: f64| Profile::hat(T::of(c), T::half(), T::one(), lo, hi);
        Self::new(
            GasModel::diatomic(),
            mach,
            alpha,
            T::one(),
            T::one(),
            [hat(0.0)?, hat(0.05)?, hat(-0.05)?],
        )
    }

    pub fn state(&self) -> ConservState2<T> {
        self.state
    }

    pub fn eigenvectors(&self) -> &LeftEigenvectors<T> {
        &self.eig
    }

    pub fn beta(&self) -> T {
        (T::one() / self.mach).asin()
    }

    /// `[alpha, alpha + beta, alpha - beta]`.
    pub fn angles(&self) -> [T; 3] {
        self.eig.angles
    }

    fn vectors(&self) -> [[T; 4]; 3] {
        [
            self.eig.alpha,
            self.eig.alpha_plus_beta,
            self.eig.alpha_minus_beta,
        ]
    }

    /// Start points of one S, one C+ and one C- curve for the [`demo`](Self::demo)
    /// field. Each lies on a line inside a linear piece of its own profile,
    /// downstream of the origin so that tracing against the flow crosses the
    /// overlap of the three stripes.
    pub fn demo_starts(&self) -> [(crate::tracer::Family, (T, T)); 3] {
        use crate::tracer::Family;
        let [a, ap, am] = self.angles();
        let at = |mu: T, xi: f64, d: f64| {
            let (xi, d) = (T::of(xi), T::of(d));
            (d * mu.cos() + xi * mu.sin(), d * mu.sin() - xi * mu.cos())
        };
        [
            (Family::S, at(a, -0.1, 1.0)),
            (Family::CPlus, at(ap, 0.175, 0.3)),
            (Family::CMinus, at(am, -0.175, 0.3)),
        ]
    }

    /// Coordinate across the stripe of angle `mu`; constant along lines of that angle.
    pub fn stripe_coordinate(mu: T, x: T, y: T) -> T {
        x * mu.sin() - y * mu.cos()
    }

    pub fn stripe_adjoint(&self, x: T, y: T) -> Result<[T; 4]> {
        let mut psi = [T::zero(); 4];
        for ((mu, prof), lam) in self.angles().iter().zip(&self.profiles).zip(self.vectors()) {
            let a = prof.eval(Self::stripe_coordinate(*mu, x, y))?;
            for (p, l) in psi.iter_mut().zip(lam) {
                *p = *p + a * l;
            }
        }
        Ok(psi)
    }

    /// `(dpsi/dx, dpsi/dy)` within smooth profile regions.
    pub fn stripe_gradient(&self, x: T, y: T) -> Result<([T; 4], [T; 4])> {
        let mut gx = [T::zero(); 4];
        let mut gy = [T::zero(); 4];
        for ((mu, prof), lam) in self.angles().iter().zip(&self.profiles).zip(self.vectors()) {
            let d = prof.derivative(Self::stripe_coordinate(*mu, x, y))?;
            for k in 0..4 {
                gx[k] = gx[k] + d * mu.sin() * lam[k];
                gy[k] = gy[k] - d * mu.cos() * lam[k];
            }
        }
        Ok((gx, gy))
    }

    /// Max-norm of `-A^T dpsi/dx - B^T dpsi/dy` and the scale
    /// `max|A^T| * max|grad psi|` it should be compared to.
    pub fn pde_residual(&self, x: T, y: T) -> Result<(T, T)> {
        let (gx, gy) = self.stripe_gradient(x, y)?;
        let (a, b) = jacobian_transpose_2d(&self.state, &self.gas)?;
        let mut r = [T::zero(); 4];
        for i in 0..4 {
            for j in 0..4 {
                r[i] = r[i] - a[i][j] * gx[j] - b[i][j] * gy[j];
            }
        }
        let scale =
            max_abs(a.iter().chain(&b).flatten().copied()) * max_abs(gx.iter().chain(&gy).copied());
        Ok((max_abs(r), scale))
    }

    /// `u sin(a) - v cos(a)`, `u sin(a-b) - v cos(a-b) + c`, `u sin(a+b) - v cos(a+b) - c`.
    pub fn null_eigenvalue_residuals(&self) -> [T; 3] {
        let p = self.state.primitive(&self.gas).expect("validated state");
        let [a, ap, am] = self.angles();
        let f = |mu: T| p.u * mu.sin() - p.v * mu.cos();
        [f(a), f(am) + p.c, f(ap) - p.c]
    }
}

/// Axis-aligned box `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn square(half: f64) -> Self {
        Self {
            x_min: -half,
            x_max: half,
            y_min: -half,
            y_max: half,
        }
    }
}

/// Cartesian `ni x nj` grid over `bbox` carrying the uniform flow and the
/// stripe adjoint at its nodes.
pub fn stripe_grid(
    field: &StripeField<f64>,
    bbox: BBox,
    ni: usize,
    nj: usize,
) -> Result<FieldGrid> {
    if ni < 2 || nj < 2 || !(bbox.x_max > bbox.x_min) || !(bbox.y_max > bbox.y_min) {
        return Err(Error::InvalidArgument(
            "grid needs ni, nj >= 2 and a non-empty box".into(),
        ));
    }
    let n = ni * nj;
    let (mut x, mut y, mut adj) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for j in 0..nj {
        let yj = bbox.y_min + (bbox.y_max - bbox.y_min) * j as f64 / (nj - 1) as f64;
        for i in 0..ni {
            let xi = bbox.x_min + (bbox.x_max - bbox.x_min) * i as f64 / (ni - 1) as f64;
            x.push(xi);
            y.push(yj);
            adj.push(field.stripe_adjoint(xi, yj)?);
        }
    }
    FieldGrid::new(
        ni,
        nj,
        field.gas,
        false,
        x,
        y,
        vec![field.state(); n],
        Some(adj),
    )
}

/// Writes [`stripe_grid`] to `path`.
pub fn emit_stripe_grid(
    field: &StripeField<f64>,
    bbox: BBox,
    ni: usize,
    nj: usize,
    path: impl AsRef<Path>,
) -> Result<FieldGrid> {
    let grid = stripe_grid(field, bbox, ni, nj)?;
    grid.save(path)?;
    Ok(grid)
}

/// Values along a curve of the functions whose `s`-derivatives are the
/// streamtrace and C+/C- residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSamples {
    pub s: Vec<f64>,
    /// `Ec psi1 + H u psi2 + H v psi3 + H^2 psi4`
    pub s1: Vec<f64>,
    /// `psi1 + u psi2 + v psi3 + Ec psi4`
    pub s2: Vec<f64>,
    /// `(u xi + v eta) psi1 + q xi psi2 + q eta psi3 + H (u xi + v eta) psi4`
    /// with `(xi, eta)` the unit C+ direction; absent where subsonic.
    pub cplus: Vec<Option<f64>>,
    pub cminus: Vec<Option<f64>>,
}

pub fn gamma_along(curve: &Curve) -> Result<GammaSamples> {
    if !curve.has_adjoint() {
        return Err(Error::MissingAdjoint);
    }
    let mut out = GammaSamples {
        s: Vec::new(),
        s1: Vec::new(),
        s2: Vec::new(),
        cplus: Vec::new(),
        cminus: Vec::new(),
    };
    for (pt, smp) in curve.points.iter().zip(&curve.samples) {
        let psi = smp.adjoint.unwrap();
        let p = smp.state.primitive(&curve.gas)?;
        let as_rate = AdjointRate::new(psi);
        let (g1, g2) = crate::forms::streamtrace_residuals_prim(&p, &as_rate);
        let dirs = directions_from_primitive(&p)?;
        let gc = |d: Option<crate::jacobians::Direction<f64>>| {
            d.map(|d| characteristic_residual_prim(&p, &d, &as_rate).total)
        };
        out.s.push(pt.s);
        out.s1.push(g1.total);
        out.s2.push(g2.total);
        out.cplus.push(gc(dirs.c_plus_dir));
        out.cminus.push(gc(dirs.c_minus_dir));
    }
    Ok(out)
}

/// `(max - min) / max(|max|, |min|)`, zero for an all-zero series.
pub fn relative_spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let scale = hi.abs().max(lo.abs());
    if values.is_empty() || scale == 0.0 {
        0.0
    } else {
        (hi - lo) / scale
    }
}

/// Row combinations of the 3D transposed Jacobians and their expected patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combination3d<T> {
    /// `[1, u, v, w, Ec] . [A^T | B^T | C^T]`
    pub r2: [[T; 5]; 3],
    /// `[2Ec - H, u Ec, v Ec, w Ec, Ec H] . [A^T | B^T | C^T]`
    pub r1: [[T; 5]; 3],
    pub pattern_r2: [[T; 5]; 3],
    pub pattern_r1: [[T; 5]; 3],
}

pub fn combination_3d<T: Real>(
    state: &ConservState3<T>,
    gas: &GasModel<T>,
) -> Result<Combination3d<T>> {
    let mats = jacobian_transpose_3d(state, gas)?;
    let p = state.primitive(gas)?;
    let (u, v, w, ec, h) = (p.u, p.v, p.w, p.ec, p.h);
    let k2 = [T::one(), u, v, w, ec];
    let k1 = [T::two() * ec - h, u * ec, v * ec, w * ec, ec * h];
    let vel = [u, v, w];
    let base2 = [T::one(), u, v, w, ec];
    let base1 = [ec, u * h, v * h, w * h, h * h];
    let scale = |b: [T; 5], s: T| b.map(|x| x * s);
    Ok(Combination3d {
        r2: mats.map(|m| vec_mat(&k2, &m)),
        r1: mats.map(|m| vec_mat(&k1, &m)),
        pattern_r2: vel.map(|s| scale(base2, s)),
        pattern_r1: vel.map(|s| scale(base1, s)),
    })
}

/// Residuals of the two 3D streamtrace combinations against their patterns,
/// with the pattern max-norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamIdentity3d<T> {
    pub residual_r2: T,
    pub residual_r1: T,
    pub pattern_norm_r2: T,
    pub pattern_norm_r1: T,
}

pub fn verify_3d_streamtrace_identity<T: Real>(
    state: &ConservState3<T>,
    gas: &GasModel<T>,
) -> Result<StreamIdentity3d<T>> {
    let c = combination_3d(state, gas)?;
    let diff = |a: &[[T; 5]; 3], b: &[[T; 5]; 3]| {
        max_abs(
            a.iter()
                .flatten()
                .zip(b.iter().flatten())
                .map(|(x, y)| *x - *y),
        )
    };
    Ok(StreamIdentity3d {
        residual_r2: diff(&c.r2, &c.pattern_r2),
        residual_r1: diff(&c.r1, &c.pattern_r1),
        pattern_norm_r2: max_abs(c.pattern_r2.iter().flatten().copied()),
        pattern_norm_r1: max_abs(c.pattern_r1.iter().flatten().copied()),
    })
}

/// Rows of `[A^T | B^T]` combinations, one per Jacobian.
pub type RowPair<T> = [[T; 4]; 2];

/// 2D counterpart of [`combination_3d`]: `[1, u, v, Ec]` and
/// `[2Ec - H, u Ec, v Ec, Ec H]` applied to `[A^T | B^T]`.
pub fn combination_2d<T: Real>(
    state: &ConservState2<T>,
    gas: &GasModel<T>,
) -> Result<(RowPair<T>, RowPair<T>)> {
    let (a, b) = jacobian_transpose_2d(state, gas)?;
    let p = state.primitive(gas)?;
    let k2 = [T::one(), p.u, p.v, p.ec];
    let k1 = [T::two() * p.ec - p.h, p.u * p.ec, p.v * p.ec, p.ec * p.h];
    Ok((
        [vec_mat(&k2, &a), vec_mat(&k2, &b)],
        [vec_mat(&k1, &a), vec_mat(&k1, &b)],
    ))
}
