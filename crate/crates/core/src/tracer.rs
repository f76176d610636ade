//! Integration of streamtraces and C+/C- curves through a [`FlowField`].

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{Adjoint2, FlowField, SamplePoint};
use crate::forms::{directions_from_primitive, AdjointRate};
use crate::gas::GasModel;

const MAX_HALVINGS: u32 = 4;

/// Characteristic family of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    S,
    CPlus,
    CMinus,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::S => "s",
            Family::CPlus => "cplus",
            Family::CMinus => "cminus",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(Family::S),
            "cplus" | "c+" => Ok(Family::CPlus),
            "cminus" | "c-" => Ok(Family::CMinus),
            _ => Err(Error::InvalidArgument(format!("unknown family `{s}`"))),
        }
    }
}

/// Orientation of the traversal relative to the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sense {
    WithFlow,
    #[default]
    AgainstFlow,
}

/// Why tracing stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    OutOfDomain,
    SubsonicReached,
    MaxLength,
    StepFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::OutOfDomain => "out_of_domain",
            Termination::SubsonicReached => "subsonic_reached",
            Termination::MaxLength => "max_length",
            Termination::StepFailure => "step_failure",
        })
    }
}

/// Disk `(cx, cy, r)` outside of which tracing stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Disk {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.cx).hypot(y - self.cy) <= self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    /// Nominal arc length per step.
    pub step: f64,
    pub max_length: f64,
    pub radius_limit: Option<Disk>,
    pub sense: Sense,
    /// Samples where `|drho/ds| / rho` exceeds this are flagged as near a shock.
    pub shock_threshold: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            step: 1e-2,
            max_length: 10.0,
            radius_limit: None,
            sense: Sense::AgainstFlow,
            shock_threshold: 20.0,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.max_length > self.step) {
            return Err(Error::InvalidArgument(format!(
                "max length {} must exceed step {}",
                self.max_length, self.step
            )));
        }
        if let Some(d) = self.radius_limit {
            if !(d.r > 0.0) {
                return Err(Error::InvalidArgument(
                    "clip radius must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    /// Accumulated chord length from the start.
    pub s: f64,
}

/// A traced curve with the flow (and adjoint) data sampled at its points.
#[derive(Debug, Clone)]
pub struct Curve {
    pub family: Family,
    pub points: Vec<CurvePoint>,
    pub samples: Vec<SamplePoint>,
    pub shock_flags: Vec<bool>,
    pub termination: Termination,
    pub gas: GasModel<f64>,
    pub clip: Option<Disk>,
    pub step: f64,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_adjoint(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|p| p.adjoint.is_some())
    }

    pub fn length(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.s)
    }

    /// Writes the curve as CSV with columns
    /// `s,x,y,rho,rho_u,rho_v,rho_E,M,psi1,psi2,psi3,psi4,shock_flag`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.into());
        out.write_record([
            "s",
            "x",
            "y",
            "rho",
            "rho_u",
            "rho_v",
            "rho_E",
            "M",
            "psi1",
            "psi2",
            "psi3",
            "psi4",
            "shock_flag",
        ])
        .map_err(io)?;
        for ((p, smp), flag) in self.points.iter().zip(&self.samples).zip(&self.shock_flags) {
            let st = smp.state;
            let mach = st.primitive(&self.gas).map_or(f64::NAN, |q| q.mach);
            let mut rec: Vec<String> = [p.s, p.x, p.y, st.rho, st.rho_u, st.rho_v, st.rho_e, mach]
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            match smp.adjoint {
                Some(a) => rec.extend(a.iter().map(|v| format!("{v:.16e}"))),
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
            rec.push(u8::from(*flag).to_string());
            out.write_record(&rec).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

enum Probe {
    Ok(SamplePoint, [f64; 2]),
    Fail(Termination),
}

/// Unit tangent of `family` at `(x, y)`, sign-aligned with `prev`.
fn probe<F: FlowField + ?Sized>(
    field: &F,
    family: Family,
    x: f64,
    y: f64,
    hint: Option<(usize, usize)>,
    prev: [f64; 2],
    clip: Option<Disk>,
) -> Probe {
    if clip.is_some_and(|d| !d.contains(x, y)) {
        return Probe::Fail(Termination::OutOfDomain);
    }
    let smp = match field.sample_at(x, y, hint) {
        Ok(s) => s,
        Err(Error::OutOfDomain { .. }) => return Probe::Fail(Termination::OutOfDomain),
        Err(_) => return Probe::Fail(Termination::StepFailure),
    };
    let Ok(prim) = smp.state.primitive(field.gas()) else {
        return Probe::Fail(Termination::StepFailure);
    };
    if family != Family::S && prim.mach < 1.0 {
        return Probe::Fail(Termination::SubsonicReached);
    }
    let Ok(dirs) = directions_from_primitive(&prim) else {
        return Probe::Fail(Termination::StepFailure);
    };
    let d = match family {
        Family::S => Some(dirs.s_dir),
        Family::CPlus => dirs.c_plus_dir,
        Family::CMinus => dirs.c_minus_dir,
    };
    let Some(d) = d else {
        return Probe::Fail(Termination::SubsonicReached);
    };
    let mut t = [d.dx(), d.dy()];
    if t[0] * prev[0] + t[1] * prev[1] < 0.0 {
        t = [-t[0], -t[1]];
    }
    Probe::Ok(smp, t)
}

/// Traces a curve of `family` from `start` with classical RK4 on the unit
/// tangent field.
pub fn trace<F: FlowField + ?Sized>(
    field: &F,
    start: (f64, f64),
    family: Family,
    cfg: &TraceConfig,
) -> Result<Curve> {
    cfg.validate()?;
    let (x0, y0) = start;
    let outside = || Error::OutOfDomainAtStart { x: x0, y: y0 };
    if cfg.radius_limit.is_some_and(|d| !d.contains(x0, y0)) {
        return Err(outside());
    }
    let first = field.sample_at(x0, y0, None).map_err(|e| match e {
        Error::OutOfDomain { .. } => outside(),
        other => other,
    })?;
    let prim = first.state.primitive(field.gas())?;
    if family != Family::S && prim.mach < 1.0 {
        return Err(Error::SubsonicAtStart { mach: prim.mach });
    }
    let dirs = directions_from_primitive(&prim)?;
    let d = match family {
        Family::S => dirs.s_dir,
        Family::CPlus => dirs.c_plus_dir.expect("supersonic"),
        Family::CMinus => dirs.c_minus_dir.expect("supersonic"),
    };
    let sign = match cfg.sense {
        Sense::WithFlow => 1.0,
        Sense::AgainstFlow => -1.0,
    };
    let mut tangent = [sign * d.dx(), sign * d.dy()];

    let mut points = vec![CurvePoint {
        x: x0,
        y: y0,
        s: 0.0,
    }];
    let mut samples = vec![first];
    let mut param = 0.0;
    let (mut x, mut y) = (x0, y0);
    let mut hint = Some(first.cell);
    let termination = loop {
        let remaining = cfg.max_length - param;
        if remaining <= 1e-9 * cfg.step {
            break Termination::MaxLength;
        }
        let mut h = cfg.step.min(remaining);
        let mut failure = Termination::StepFailure;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            match rk4_step(field, family, x, y, h, tangent, hint, cfg.radius_limit) {
                Ok(res) => {
                    accepted = Some(res);
                    break;
                }
                Err(kind) => {
                    failure = kind;
                    h *= 0.5;
                }
            }
        }
        let Some((nx, ny, smp, t)) = accepted else {
            if points.len() == 1 && failure == Termination::StepFailure {
                return Err(Error::StepFailure { x, y });
            }
            break failure;
        };
        param += h;
        let s = points.last().unwrap().s + (nx - x).hypot(ny - y);
        points.push(CurvePoint { x: nx, y: ny, s });
        samples.push(smp);
        hint = Some(smp.cell);
        tangent = t;
        x = nx;
        y = ny;
    };
    let shock_flags = shock_flags(&points, &samples, cfg.shock_threshold);
    Ok(Curve {
        family,
        points,
        samples,
        shock_flags,
        termination,
        gas: *field.gas(),
        clip: cfg.radius_limit,
        step: cfg.step,
    })
}

type StepResult = (f64, f64, SamplePoint, [f64; 2]);

#[allow(clippy::too_many_arguments)]
fn rk4_step<F: FlowField + ?Sized>(
    field: &F,
    family: Family,
    x: f64,
    y: f64,
    h: f64,
    prev: [f64; 2],
    hint: Option<(usize, usize)>,
    clip: Option<Disk>,
) -> std::result::Result<StepResult, Termination> {
    let eval =
        |px: f64, py: f64, align: [f64; 2]| match probe(field, family, px, py, hint, align, clip) {
            Probe::Ok(s, t) => Ok((s, t)),
            Probe::Fail(k) => Err(k),
        };
    let (_, k1) = eval(x, y, prev)?;
    let (_, k2) = eval(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], k1)?;
    let (_, k3) = eval(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], k2)?;
    let (_, k4) = eval(x + h * k3[0], y + h * k3[1], k3)?;
    let nx = x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    let ny = y + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    let (smp, t) = eval(nx, ny, k4)?;
    Ok((nx, ny, smp, t))
}

fn shock_flags(points: &[CurvePoint], samples: &[SamplePoint], threshold: f64) -> Vec<bool> {
    let n = points.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                return false;
            }
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let ds = points[b].s - points[a].s;
            if ds <= 0.0 {
                return false;
            }
            let grad = (samples[b].state.rho - samples[a].state.rho) / ds;
            grad.abs() / samples[i].state.rho > threshold
        })
        .collect()
}

/// Second-order three-point derivative on a nonuniform grid, written on
/// differences from the base point `i` so constants differentiate to zero:
/// `f'(s_i) = w0 (f[k0] - f[i]) + w1 (f[k1] - f[i])`.
fn three_point_weights(s: &[f64], i: usize) -> ([usize; 2], [f64; 2]) {
    let n = s.len();
    if i == 0 {
        let (h1, h2) = (s[1] - s[0], s[2] - s[1]);
        ([1, 2], [(h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))])
    } else if i == n - 1 {
        let (h1, h2) = (s[n - 2] - s[n - 3], s[n - 1] - s[n - 2]);
        (
            [n - 3, n - 2],
            [h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2)],
        )
    } else {
        let (h1, h2) = (s[i] - s[i - 1], s[i + 1] - s[i]);
        (
            [i - 1, i + 1],
            [-h2 / (h1 * (h1 + h2)), h1 / (h2 * (h1 + h2))],
        )
    }
}

/// `dpsi/ds` at every curve point.
pub fn resample_adjoint_rates(curve: &Curve) -> Result<Vec<AdjointRate<f64>>> {
    if !curve.has_adjoint() {
        return Err(Error::MissingAdjoint);
    }
    if curve.len() < 3 {
        return Err(Error::TooFewPoints { n: curve.len() });
    }
    let s: Vec<f64> = curve.points.iter().map(|p| p.s).collect();
    let psi: Vec<Adjoint2> = curve.samples.iter().map(|p| p.adjoint.unwrap()).collect();
    Ok((0..s.len())
        .map(|i| {
            let (idx, w) = three_point_weights(&s, i);
            let mut r = [0.0; 4];
            for (k, wk) in idx.iter().zip(w) {
                for ((rv, pv), base) in r.iter_mut().zip(psi[*k]).zip(psi[i]) {
                    *rv += wk * (pv - base);
                }
            }
            AdjointRate::new(r)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnField;
    use crate::gas::ConservState2;

    fn uniform(mach: f64, phi: f64, half: f64) -> impl FlowField {
        let gas = GasModel::diatomic();
        let s = ConservState2::from_mach(1.0, 1.0, mach, phi, &gas);
        FnField {
            gas,
            state: move |_, _| s,
            adjoint: Some(|x: f64, y: f64| [x, y, 1.0, x + 2.0 * y]),
            domain: Box::new(move |x: f64, y: f64| x.abs() <= half && y.abs() <= half),
        }
    }

    #[test]
    fn uniform_streamtrace_goes_upstream() {
        let f = uniform(2.0, 0.0, 1.0);
        let cfg = TraceConfig {
            step: 0.05,
            max_length: 10.0,
            ..Default::default()
        };
        let c = trace(&f, (0.0, 0.0), Family::S, &cfg).unwrap();
        assert_eq!(c.termination, Termination::OutOfDomain);
        let last = c.points.last().unwrap();
        assert!(last.x < -0.99 && last.x >= -1.0);
        assert!(c.points.iter().all(|p| p.y.abs() <= 1e-10));
        assert!(c
            .points
            .windows(2)
            .all(|w| w[1].s > w[0].s && w[1].s - w[0].s <= 1.5 * cfg.step));
    }

    #[test]
    fn characteristic_slope_for_root_two() {
        let f = uniform(2.0f64.sqrt(), 0.0, 1.0);
        let cfg = TraceConfig {
            step: 0.1,
            max_length: 0.5,
            sense: Sense::WithFlow,
            ..Default::default()
        };
        let c = trace(&f, (0.0, 0.0), Family::CPlus, &cfg).unwrap();
        assert_eq!(c.termination, Termination::MaxLength);
        for p in &c.points {
            assert!((p.y - p.x).abs() < 1e-14);
        }
        assert!((c.length() - 0.5).abs() < 1e-14);
        let m = trace(&f, (0.0, 0.0), Family::CMinus, &cfg).unwrap();
        assert!(m.points.iter().all(|p| (p.y + p.x).abs() < 1e-14));
    }

    #[test]
    fn start_errors() {
        let f = uniform(0.8, 0.0, 1.0);
        let cfg = TraceConfig::default();
        assert!(matches!(
            trace(&f, (2.0, 0.0), Family::S, &cfg),
            Err(Error::OutOfDomainAtStart { .. })
        ));
        assert!(matches!(
            trace(&f, (0.0, 0.0), Family::CPlus, &cfg),
            Err(Error::SubsonicAtStart { .. })
        ));
        let clip = TraceConfig {
            radius_limit: Some(Disk {
                cx: 0.5,
                cy: 0.0,
                r: 0.1,
            }),
            ..cfg
        };
        assert!(matches!(
            trace(&f, (0.0, 0.0), Family::S, &clip),
            Err(Error::OutOfDomainAtStart { .. })
        ));
        let bad = TraceConfig {
            step: 0.0,
            ..TraceConfig::default()
        };
        assert!(trace(&f, (0.0, 0.0), Family::S, &bad).is_err());
    }

    #[test]
    fn disk_clip_stops_curve() {
        let f = uniform(2.0, 0.0, 1.0);
        let cfg = TraceConfig {
            step: 0.01,
            radius_limit: Some(Disk {
                cx: 0.0,
                cy: 0.0,
                r: 0.5,
            }),
            ..Default::default()
        };
        let c = trace(&f, (0.0, 0.0), Family::S, &cfg).unwrap();
        let last = c.points.last().unwrap();
        assert!(last.x <= -0.5 + 0.01 / 16.0 + 1e-12 && last.x > -0.5);
        assert_eq!(c.clip, cfg.radius_limit);
    }

    #[test]
    fn rates_of_linear_adjoint() {
        let f = uniform(2.0, 0.0, 1.0);
        let cfg = TraceConfig {
            step: 0.1,
            max_length: 1.0,
            sense: Sense::WithFlow,
            ..Default::default()
        };
        let c = trace(&f, (-0.5, 0.0), Family::S, &cfg).unwrap();
        let r = resample_adjoint_rates(&c).unwrap();
        for rate in r {
            let d = rate.dpsi_ds;
            assert!(
                (d[0] - 1.0).abs() < 1e-12
                    && d[1].abs() < 1e-12
                    && d[2].abs() < 1e-12
                    && (d[3] - 1.0).abs() < 1e-12
            );
        }
    }

    #[test]
    fn nonuniform_weights_exact_on_quadratics() {
        let s = [0.0, 0.1, 0.25, 0.3, 0.55];
        let f = |t: f64| 3.0 * t * t - t + 2.0;
        for i in 0..s.len() {
            let (idx, w) = three_point_weights(&s, i);
            let d: f64 = idx
                .iter()
                .zip(w)
                .map(|(&k, wk)| wk * (f(s[k]) - f(s[i])))
                .sum();
            assert!((d - (6.0 * s[i] - 1.0)).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn family_names_parse() {
        assert_eq!("cplus".parse::<Family>().unwrap(), Family::CPlus);
        assert_eq!(Family::CMinus.to_string(), "cminus");
        assert!("q".parse::<Family>().is_err());
    }
}
