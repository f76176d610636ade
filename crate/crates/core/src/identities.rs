//! Randomized numerical checks of the algebraic identities satisfied by the
//! Jacobians, cofactor coefficients, differential forms and eigenvectors.

use crate::analytic::{
    combination_2d, combination_3d, verify_3d_streamtrace_identity, Profile, StripeField,
};
use crate::error::Result;
use crate::forms::{
    characteristic_directions, degree_two_residual, form_null_space, form_rank,
    streamtrace_residuals, AdjointRate, DEFAULT_RANK_TOL,
};
use crate::gas::{fluxes_2d, fluxes_3d, ConservState2, ConservState3, GasModel};
use crate::jacobians::{
    characteristic_determinant, coefficient_table, coefficient_table_factored,
    jacobian_transpose_2d, jacobian_transpose_3d, left_eigenvectors, system_matrix_8, CoeffTable,
    Direction,
};
use crate::linalg::{max_abs, minor_determinant, transpose, vec_mat};
use crate::sampling::Sampler;

/// Deliberate corruption used to check that the suite detects errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flips the sign of `C^2_{1x}` in every coefficient table.
    FlipC21x,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 1000,
            fault: None,
        }
    }
}

/// Outcome of one identity over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub description: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Sampling context handed to every identity.
pub struct Ctx {
    pub rng: Sampler,
    pub fault: Option<Fault>,
}

impl Ctx {
    fn corrupt(&self, mut t: CoeffTable<f64>) -> CoeffTable<f64> {
        if self.fault == Some(Fault::FlipC21x) {
            t.x[0][1] = -t.x[0][1];
        }
        t
    }

    pub fn table(&self, s: &ConservState2<f64>, d: &Direction<f64>) -> Result<CoeffTable<f64>> {
        Ok(self.corrupt(coefficient_table(s, d, self.rng.gas())?))
    }

    pub fn factored(&self, s: &ConservState2<f64>, d: &Direction<f64>) -> Result<CoeffTable<f64>> {
        Ok(self.corrupt(coefficient_table_factored(s, d, self.rng.gas())?))
    }

    fn gas(&self) -> GasModel<f64> {
        *self.rng.gas()
    }
}

type Check = fn(&mut Ctx) -> Result<f64>;

/// Same-form relations `C^a_m = f C^b_m` that hold for every direction:
/// `(axis is y, m, a, b, factor)` with factor 0 = `-t`, 1 = `-H`.
const IN_FORM: [(bool, usize, usize, usize, u8); 10] = [
    (false, 1, 3, 2, 0),
    (false, 2, 4, 1, 1),
    (false, 2, 3, 2, 0),
    (false, 3, 4, 1, 1),
    (false, 4, 3, 2, 0),
    (true, 1, 3, 2, 0),
    (true, 2, 4, 1, 1),
    (true, 3, 4, 1, 1),
    (true, 3, 3, 2, 0),
    (true, 4, 3, 2, 0),
];

fn in_form(ctx: &mut Ctx, y_axis: bool) -> Result<f64> {
    let s = ctx.rng.generic();
    let d = ctx.rng.direction_with_dx(0.05);
    let c = ctx.table(&s, &d)?;
    let h = s.primitive(&ctx.gas())?.h;
    let t = d.slope().unwrap();
    let mut err: f64 = 0.0;
    for &(axis, m, a, b, f) in IN_FORM.iter().filter(|r| r.0 == y_axis) {
        let get = |l| if axis { c.cy(m, l) } else { c.cx(m, l) };
        let factor = if f == 0 { -t } else { -h };
        err = err.max(rel(get(a), factor * get(b)));
    }
    Ok(err)
}

fn xy_row(ctx: &mut Ctx, m: usize) -> Result<f64> {
    let s = ctx.rng.generic();
    let d = ctx.rng.direction_with_dx(0.05);
    let c = ctx.table(&s, &d)?;
    let t = d.slope().unwrap();
    Ok((1..=4)
        .filter(|&l| l != m)
        .map(|l| rel(c.cx(m, l), -t * c.cy(m, l)))
        .fold(0.0, f64::max))
}

fn random_stripe(ctx: &mut Ctx) -> Result<StripeField<f64>> {
    let (s, phi) = ctx.rng.supersonic();
    let g = ctx.gas();
    let p = s.primitive(&g)?;
    let hat = |c: f64| Profile::hat(c, 0.5, 1.0, -100.0, 100.0);
    StripeField::new(
        g,
        p.mach,
        phi,
        p.rho,
        p.c,
        [hat(0.0)?, hat(0.05)?, hat(-0.05)?],
    )
}

fn suite() -> Vec<(&'static str, &'static str, f64, Check)> {
    vec![
        (
            "jacobian_finite_difference_2d",
            "A^T, B^T against central differences of the 2D fluxes",
            1e-6,
            |ctx| {
                let s = ctx.rng.generic();
                let g = ctx.gas();
                let (a, b) = jacobian_transpose_2d(&s, &g)?;
                let q = s.as_array();
                let h = 1e-6 * q.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut err: f64 = 0.0;
                for k in 0..4 {
                    let (mut qp, mut qm) = (q, q);
                    qp[k] += h;
                    qm[k] -= h;
                    let (fp, gp) = fluxes_2d(&ConservState2::from_array(qp), &g);
                    let (fm, gm) = fluxes_2d(&ConservState2::from_array(qm), &g);
                    for i in 0..4 {
                        err = err.max(rel((fp[i] - fm[i]) / (2.0 * h), a[k][i]));
                        err = err.max(rel((gp[i] - gm[i]) / (2.0 * h), b[k][i]));
                    }
                }
                Ok(err)
            },
        ),
        (
            "jacobian_finite_difference_3d",
            "A^T, B^T, C^T against central differences of the 3D fluxes",
            1e-6,
            |ctx| {
                let s = ctx.rng.state3();
                let g = ctx.gas();
                let m = jacobian_transpose_3d(&s, &g)?;
                let q = s.as_array();
                let h = 1e-6 * q.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut err: f64 = 0.0;
                for k in 0..5 {
                    let (mut qp, mut qm) = (q, q);
                    qp[k] += h;
                    qm[k] -= h;
                    let fp = fluxes_3d(&ConservState3::from_array(qp), &g);
                    let fm = fluxes_3d(&ConservState3::from_array(qm), &g);
                    for d in 0..3 {
                        for i in 0..5 {
                            err = err.max(rel((fp[d][i] - fm[d][i]) / (2.0 * h), m[d][k][i]));
                        }
                    }
                }
                Ok(err)
            },
        ),
        (
            "determinant_factorization",
            "LU determinant of the 8x8 system against (-v dx + u dy)^2 ((-v dx + u dy)^2 - c^2)",
            1e-10,
            |ctx| {
                let s = ctx.rng.generic();
                let d = ctx.rng.direction();
                let (det, fac) = characteristic_determinant(&s, &d, &ctx.gas())?;
                Ok(rel(det, fac))
            },
        ),
        (
            "closed_form_vs_minor",
            "all 32 closed-form coefficients against their 7x7 minors",
            1e-9,
            |ctx| {
                let s = ctx.rng.generic();
                let d = ctx.rng.direction_with_dx(0.05);
                let m = system_matrix_8(&s, &d, &ctx.gas())?;
                let c = ctx.table(&s, &d)?;
                let mut err: f64 = 0.0;
                for mi in 0..4 {
                    for l in 0..4 {
                        err = err.max(rel(c.x[mi][l], minor_determinant(&m, l, mi)));
                        err = err.max(rel(c.y[mi][l], minor_determinant(&m, l, 4 + mi)));
                    }
                }
                Ok(err)
            },
        ),
        (
            "in_form_x",
            "relations between coefficients of the same x form (H and -t factors)",
            1e-10,
            |ctx| in_form(ctx, false),
        ),
        (
            "in_form_y",
            "relations between coefficients of the same y form (H and -t factors)",
            1e-10,
            |ctx| in_form(ctx, true),
        ),
        (
            "xy_proportional_row1",
            "C^l_1x = -t C^l_1y, l = 2, 3, 4",
            1e-10,
            |ctx| xy_row(ctx, 1),
        ),
        (
            "xy_proportional_row2",
            "C^l_2x = -t C^l_2y, l = 1, 3, 4",
            1e-10,
            |ctx| xy_row(ctx, 2),
        ),
        (
            "xy_proportional_row3",
            "C^l_3x = -t C^l_3y, l = 1, 2, 4",
            1e-10,
            |ctx| xy_row(ctx, 3),
        ),
        (
            "xy_proportional_row4",
            "C^l_4x = -t C^l_4y, l = 1, 2, 3",
            1e-10,
            |ctx| xy_row(ctx, 4),
        ),
        (
            "diagonal_equal",
            "C^1_1x = C^4_4x and C^1_1y = C^4_4y",
            1e-10,
            |ctx| {
                let s = ctx.rng.generic();
                let d = ctx.rng.direction_with_dx(0.05);
                let c = ctx.table(&s, &d)?;
                Ok(rel(c.cx(1, 1), c.cx(4, 4)).max(rel(c.cy(1, 1), c.cy(4, 4))))
            },
        ),
        (
            "streamtrace_xy_proportional",
            "factored coefficients along the streamtrace: every x entry is -t times the y entry",
            1e-10,
            |ctx| {
                let s = ctx.rng.generic();
                let d = characteristic_directions(&s, &ctx.gas())?.s_dir;
                if d.dx().abs() < 0.05 {
                    return Ok(0.0);
                }
                let c = ctx.factored(&s, &d)?;
                let t = d.slope().unwrap();
                let mut err: f64 = 0.0;
                for m in 1..=4 {
                    for l in 1..=4 {
                        err = err.max(rel(c.cx(m, l), -t * c.cy(m, l)));
                    }
                }
                Ok(err)
            },
        ),
        (
            "row_expansion",
            "dx C^m_mx + dy C^m_my equals the determinant for m = 1..4",
            1e-10,
            |ctx| {
                let s = ctx.rng.generic();
                let d = ctx.rng.direction_with_dx(0.05);
                let c = ctx.table(&s, &d)?;
                let (det, _) = characteristic_determinant(&s, &d, &ctx.gas())?;
                Ok((1..=4)
                    .map(|m| rel(d.dx() * c.cx(m, m) + d.dy() * c.cy(m, m), det))
                    .fold(0.0, f64::max))
            },
        ),
        (
            "degree_two",
            "gamma1 (1+t^2) H = gamma1 (1+t^2) Ec + (t u - v)^2 at t+ and t-",
            1e-10,
            |ctx| {
                let (s, _) = ctx.rng.supersonic();
                let g = ctx.gas();
                let d = characteristic_directions(&s, &g)?;
                let mut err: f64 = 0.0;
                for t in [d.t_plus, d.t_minus]
                    .into_iter()
                    .flatten()
                    .filter(|t| t.abs() < 20.0)
                {
                    err = err.max(degree_two_residual(&s, t, &g)?);
                }
                Ok(err)
            },
        ),
        (
            "cpm_condition",
            "y forms 1 and 4 proportional with ratio -H along C+ and C-",
            1e-10,
            |ctx| {
                let (s, _) = ctx.rng.supersonic();
                let g = ctx.gas();
                let h = s.primitive(&g)?.h;
                let dirs = characteristic_directions(&s, &g)?;
                let mut err: f64 = 0.0;
                for d in [dirs.c_plus_dir, dirs.c_minus_dir]
                    .into_iter()
                    .flatten()
                    .filter(|d| d.dx().abs() >= 0.05)
                {
                    let c = ctx.factored(&s, &d)?;
                    err = err
                        .max(rel(c.cy(1, 1), -h * c.cy(4, 1)))
                        .max(rel(c.cy(1, 4), -h * c.cy(4, 4)));
                }
                Ok(err)
            },
        ),
        (
            "rank_streamtrace",
            "form matrix has numeric rank 2 along streamtraces (count of failures)",
            0.0,
            |ctx| {
                let (s, _) = ctx.rng.supersonic();
                let g = ctx.gas();
                let d = characteristic_directions(&s, &g)?.s_dir;
                Ok(f64::from(form_rank(&s, &d, &g, DEFAULT_RANK_TOL)? != 2))
            },
        ),
        (
            "rank_characteristic",
            "form matrix has numeric rank 1 along C+ and C- (count of failures)",
            0.0,
            |ctx| {
                let (s, _) = ctx.rng.supersonic();
                let g = ctx.gas();
                let d = characteristic_directions(&s, &g)?;
                let mut bad = 0.0;
                for dir in [d.c_plus_dir, d.c_minus_dir].into_iter().flatten() {
                    bad += f64::from(form_rank(&s, &dir, &g, DEFAULT_RANK_TOL)? != 1);
                }
                Ok(bad)
            },
        ),
        (
            "rank_generic",
            "form matrix has numeric rank >= 3 for random directions (count of failures)",
            0.0,
            |ctx| {
                let (s, _) = ctx.rng.supersonic();
                let d = ctx.rng.direction();
                Ok(f64::from(
                    form_rank(&s, &d, &ctx.gas(), DEFAULT_RANK_TOL)? < 3,
                ))
            },
        ),
        (
            "streamtrace_null_space",
            "both streamtrace residuals vanish on the null space of the streamtrace forms",
            1e-12,
            |ctx| {
                let (s, _) = ctx.rng.supersonic();
                let g = ctx.gas();
                let d = characteristic_directions(&s, &g)?.s_dir;
                let mut err: f64 = 0.0;
                for n in form_null_space(&s, &d, &g, DEFAULT_RANK_TOL)? {
                    let (r1, r2) = streamtrace_residuals(&s, &AdjointRate::new(n), &g)?;
                    err = err
                        .max(r1.total.abs() / r1.max_abs_subpart())
                        .max(r2.total.abs() / r2.max_abs_subpart());
                }
                Ok(err)
            },
        ),
        (
            "eigenvector_null",
            "lambda^mu (A sin mu - B cos mu) = 0 for the three left eigenvectors",
            1e-10,
            |ctx| {
                let (s, phi) = ctx.rng.supersonic();
                let g = ctx.gas();
                let e = left_eigenvectors(&s, phi, &g)?;
                let (at, bt) = jacobian_transpose_2d(&s, &g)?;
                let (a, b) = (transpose(&at), transpose(&bt));
                let mut err: f64 = 0.0;
                for (lam, mu) in [e.alpha, e.alpha_plus_beta, e.alpha_minus_beta]
                    .iter()
                    .zip(e.angles)
                {
                    let mut k = [[0.0; 4]; 4];
                    for i in 0..4 {
                        for j in 0..4 {
                            k[i][j] = a[i][j] * mu.sin() - b[i][j] * mu.cos();
                        }
                    }
                    let scale = (max_abs(*lam) * max_abs(k.iter().flatten().copied())).max(1.0);
                    err = err.max(max_abs(vec_mat(lam, &k)) / scale);
                }
                Ok(err)
            },
        ),
        (
            "eigenvector_h_ratio",
            "first component equals H times the fourth for the three left eigenvectors",
            1e-10,
            |ctx| {
                let (s, phi) = ctx.rng.supersonic();
                let g = ctx.gas();
                let h = s.primitive(&g)?.h;
                let e = left_eigenvectors(&s, phi, &g)?;
                Ok([e.alpha, e.alpha_plus_beta, e.alpha_minus_beta]
                    .iter()
                    .map(|l| rel(l[0], h * l[3]))
                    .fold(0.0, f64::max))
            },
        ),
        (
            "combination_3d",
            "3D row combinations reproduce the streamtrace patterns",
            1e-12,
            |ctx| {
                let s = ctx.rng.state3();
                let id = verify_3d_streamtrace_identity(&s, &ctx.gas())?;
                Ok((id.residual_r2 / id.pattern_norm_r2).max(id.residual_r1 / id.pattern_norm_r1))
            },
        ),
        (
            "reduction_3d",
            "at w = 0 the 3D combinations restricted to 2D indices equal the 2D ones",
            1e-12,
            |ctx| {
                let s3 = ctx.rng.state3();
                let g = ctx.gas();
                let p = s3.primitive(&g)?;
                let flat = ConservState3::from_primitive(p.rho, p.u, p.v, 0.0, p.p, &g);
                let c3 = combination_3d(&flat, &g)?;
                let s2 = ConservState2::from_primitive(p.rho, p.u, p.v, p.p, &g);
                let (k2, k1) = combination_2d(&s2, &g)?;
                let idx = [0, 1, 2, 4];
                let mut err: f64 = 0.0;
                let scale = max_abs(c3.pattern_r1.iter().flatten().copied()).max(1.0);
                for d in 0..2 {
                    for (k, &i) in idx.iter().enumerate() {
                        err = err
                            .max((c3.r2[d][i] - k2[d][k]).abs() / scale)
                            .max((c3.r1[d][i] - k1[d][k]).abs() / scale);
                    }
                }
                Ok(err)
            },
        ),
        (
            "stripe_adjoint_pde",
            "analytic stripe fields satisfy -A^T psi_x - B^T psi_y = 0",
            1e-10,
            |ctx| {
                let f = random_stripe(ctx)?;
                let (x, y) = (ctx.rng.uniform(-0.3, 0.3), ctx.rng.uniform(-0.3, 0.3));
                let (r, scale) = f.pde_residual(x, y)?;
                Ok(r / scale.max(f64::MIN_POSITIVE))
            },
        ),
        (
            "stripe_null_eigenvalues",
            "u sin mu - v cos mu equals 0, -c, +c for mu = alpha, alpha - beta, alpha + beta",
            1e-12,
            |ctx| {
                let f = random_stripe(ctx)?;
                Ok(max_abs(f.null_eigenvalue_residuals()) / f.c.max(1.0))
            },
        ),
    ]
}

/// Names of the identities in suite order.
pub fn identity_names() -> Vec<&'static str> {
    suite().into_iter().map(|e| e.0).collect()
}

/// Runs every identity on `samples` random draws. Each identity has its own
/// random stream derived from the seed, so results do not depend on order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<IdentityCheck>> {
    run_selected(cfg, |_| true)
}

pub fn run_selected(
    cfg: &SuiteConfig,
    select: impl Fn(&str) -> bool,
) -> Result<Vec<IdentityCheck>> {
    let gas = GasModel::diatomic();
    let mut out = Vec::new();
    for (k, (name, description, tolerance, check)) in suite().into_iter().enumerate() {
        if !select(name) {
            continue;
        }
        let stream = cfg
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(k as u64);
        let mut ctx = Ctx {
            rng: Sampler::new(stream, gas),
            fault: cfg.fault,
        };
        let mut max_error: f64 = 0.0;
        for _ in 0..cfg.samples {
            let e = check(&mut ctx)?;
            max_error = if e.is_nan() {
                f64::INFINITY
            } else {
                max_error.max(e)
            };
        }
        out.push(IdentityCheck {
            name,
            description,
            max_error,
            tolerance,
            samples: cfg.samples,
        });
    }
    Ok(out)
}
