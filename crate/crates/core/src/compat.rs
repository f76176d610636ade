//! Compatibility integrals along traced curves and their reports.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forms::{
    characteristic_residual_prim, directions_from_primitive, streamtrace_residuals_prim,
};
use crate::tracer::{resample_adjoint_rates, Curve, Disk, Family};

/// Which compatibility relation is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompatKind {
    /// `Ec psi1' + H u psi2' + H v psi3' + H^2 psi4'` along S.
    S1,
    /// `psi1' + u psi2' + v psi3' + Ec psi4'` along S.
    S2,
    CPlus,
    CMinus,
}

impl CompatKind {
    pub fn family(&self) -> Family {
        match self {
            CompatKind::S1 | CompatKind::S2 => Family::S,
            CompatKind::CPlus => Family::CPlus,
            CompatKind::CMinus => Family::CMinus,
        }
    }

    /// The kinds that apply to curves of `family`.
    pub fn for_family(family: Family) -> &'static [CompatKind] {
        match family {
            Family::S => &[CompatKind::S1, CompatKind::S2],
            Family::CPlus => &[CompatKind::CPlus],
            Family::CMinus => &[CompatKind::CMinus],
        }
    }
}

impl fmt::Display for CompatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompatKind::S1 => "s1",
            CompatKind::S2 => "s2",
            CompatKind::CPlus => "cplus",
            CompatKind::CMinus => "cminus",
        })
    }
}

impl FromStr for CompatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(CompatKind::S1),
            "s2" => Ok(CompatKind::S2),
            "cplus" | "c+" => Ok(CompatKind::CPlus),
            "cminus" | "c-" => Ok(CompatKind::CMinus),
            _ => Err(Error::InvalidArgument(format!(
                "unknown integral kind `{s}`"
            ))),
        }
    }
}

/// Integral of a compatibility relation along a curve.
///
/// `ratio` is `max_s |K(s)| / max_abs_subpart`, where `max_abs_subpart` is the
/// largest `|subpart_i(s)|` over the whole curve; `total_ratio` uses the
/// endpoint `|K_total|` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub family: Family,
    pub kind: CompatKind,
    pub k_total: f64,
    pub subpart_totals: [f64; 4],
    pub s: Vec<f64>,
    pub k_cum: Vec<f64>,
    pub sub_cum: Vec<[f64; 4]>,
    pub max_abs_subpart: f64,
    pub ratio: f64,
    pub total_ratio: f64,
    pub clip: Option<Disk>,
}

fn sum4(v: &[f64; 4]) -> f64 {
    v[0] + v[1] + v[2] + v[3]
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Integrand subparts at every curve point: coefficient times `dpsi/ds`.
/// C+/C- use the direction-homogeneous form with the local characteristic
/// direction at angle `phi +/- beta`.
pub fn integrands(curve: &Curve, kind: CompatKind) -> Result<Vec<[f64; 4]>> {
    if kind.family() != curve.family {
        return Err(Error::FamilyMismatch {
            family: curve.family.to_string(),
            kind: kind.to_string(),
        });
    }
    if !curve.has_adjoint() {
        return Err(Error::MissingAdjoint);
    }
    let rates = resample_adjoint_rates(curve)?;
    curve
        .samples
        .iter()
        .zip(&rates)
        .map(|(smp, rate)| {
            let prim = smp.state.primitive(&curve.gas)?;
            Ok(match kind {
                CompatKind::S1 => streamtrace_residuals_prim(&prim, rate).0.subparts,
                CompatKind::S2 => streamtrace_residuals_prim(&prim, rate).1.subparts,
                CompatKind::CPlus | CompatKind::CMinus => {
                    let dirs = directions_from_primitive(&prim)?;
                    let dir = if kind == CompatKind::CPlus {
                        dirs.c_plus_dir
                    } else {
                        dirs.c_minus_dir
                    };
                    let dir = dir.ok_or(Error::SubsonicInput { mach: prim.mach })?;
                    characteristic_residual_prim(&prim, &dir, rate).subparts
                }
            })
        })
        .collect()
}

/// Trapezoidal integration of each subpart along the curve.
pub fn k_integrals(curve: &Curve, kind: CompatKind) -> Result<CompatReport> {
    let f = integrands(curve, kind)?;
    let s: Vec<f64> = curve.points.iter().map(|p| p.s).collect();
    let mut sub_cum = Vec::with_capacity(s.len());
    let mut acc = [0.0; 4];
    sub_cum.push(acc);
    for k in 1..s.len() {
        let ds = s[k] - s[k - 1];
        for i in 0..4 {
            acc[i] += 0.5 * ds * (f[k - 1][i] + f[k][i]);
        }
        sub_cum.push(acc);
    }
    let k_cum: Vec<f64> = sub_cum.iter().map(sum4).collect();
    let subpart_totals = *sub_cum.last().unwrap();
    let k_total = *k_cum.last().unwrap();
    let max_abs_subpart = sub_cum.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_k = k_cum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(CompatReport {
        family: curve.family,
        kind,
        k_total,
        subpart_totals,
        ratio: safe_ratio(max_k, max_abs_subpart),
        total_ratio: safe_ratio(k_total.abs(), max_abs_subpart),
        max_abs_subpart,
        s,
        k_cum,
        sub_cum,
        clip: curve.clip,
    })
}

impl CompatReport {
    /// Writes a `#` header block with the totals, then CSV columns
    /// `s,K_cum,sub1_cum,sub2_cum,sub3_cum,sub4_cum`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let t = &self.subpart_totals;
        writeln!(w, "# kind={}", self.kind)?;
        writeln!(w, "# family={}", self.family)?;
        writeln!(w, "# k_total={:.16e}", self.k_total)?;
        writeln!(
            w,
            "# subpart_totals={:.16e},{:.16e},{:.16e},{:.16e}",
            t[0], t[1], t[2], t[3]
        )?;
        writeln!(w, "# max_abs_subpart={:.16e}", self.max_abs_subpart)?;
        writeln!(w, "# ratio={:.16e}", self.ratio)?;
        writeln!(w, "# total_ratio={:.16e}", self.total_ratio)?;
        match self.clip {
            Some(d) => writeln!(w, "# clip={:.16e},{:.16e},{:.16e}", d.cx, d.cy, d.r)?,
            None => writeln!(w, "# clip=none")?,
        }
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.into());
        out.write_record(["s", "K_cum", "sub1_cum", "sub2_cum", "sub3_cum", "sub4_cum"])
            .map_err(io)?;
        for ((s, k), c) in self.s.iter().zip(&self.k_cum).zip(&self.sub_cum) {
            let rec = [*s, *k, c[0], c[1], c[2], c[3]].map(|v| format!("{v:.16e}"));
            out.write_record(&rec).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut header = Vec::new();
        let mut body = String::new();
        for (n, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            match line.strip_prefix("# ") {
                Some(rest) => {
                    let (k, v) = rest
                        .split_once('=')
                        .ok_or_else(|| fmt_err(n + 1, "expected key=value"))?;
                    header.push((n + 1, k.to_string(), v.to_string()));
                }
                None => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let get = |key: &str| {
            header
                .iter()
                .find(|h| h.1 == key)
                .ok_or_else(|| fmt_err(1, &format!("missing `{key}`")))
        };
        let num = |key: &str| -> Result<f64> {
            let (line, _, v) = get(key)?;
            v.parse()
                .map_err(|_| fmt_err(*line, &format!("bad number for `{key}`")))
        };
        let (kline, _, kind) = get("kind")?;
        let kind: CompatKind = kind.parse().map_err(|_| fmt_err(*kline, "bad kind"))?;
        let (fline, _, family) = get("family")?;
        let family: Family = family.parse().map_err(|_| fmt_err(*fline, "bad family"))?;
        let (tline, _, totals) = get("subpart_totals")?;
        let parts: Vec<f64> = totals
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| fmt_err(*tline, "bad totals"))?;
        let subpart_totals: [f64; 4] = parts
            .try_into()
            .map_err(|_| fmt_err(*tline, "expected four totals"))?;
        let (cline, _, clip) = get("clip")?;
        let clip = if clip == "none" {
            None
        } else {
            let c: Vec<f64> = clip
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fmt_err(*cline, "bad clip"))?;
            match c[..] {
                [cx, cy, r] => Some(Disk { cx, cy, r }),
                _ => return Err(fmt_err(*cline, "clip needs three values")),
            }
        };
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let (mut s, mut k_cum, mut sub_cum) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                fmt_err(
                    e.position().map_or(0, |p| p.line() as usize),
                    &e.to_string(),
                )
            })?;
            let v: Vec<f64> = rec
                .iter()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fmt_err(0, "bad number in table"))?;
            if v.len() != 6 {
                return Err(fmt_err(0, "expected six columns"));
            }
            s.push(v[0]);
            k_cum.push(v[1]);
            sub_cum.push([v[2], v[3], v[4], v[5]]);
        }
        Ok(Self {
            family,
            kind,
            k_total: num("k_total")?,
            subpart_totals,
            s,
            k_cum,
            sub_cum,
            max_abs_subpart: num("max_abs_subpart")?,
            ratio: num("ratio")?,
            total_ratio: num("total_ratio")?,
            clip,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

fn fmt_err(line: usize, message: &str) -> Error {
    Error::Format {
        line,
        column: 1,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnField;
    use crate::gas::{ConservState2, GasModel};
    use crate::tracer::{trace, TraceConfig};

    fn curve(adjoint: fn(f64, f64) -> [f64; 4], family: Family) -> Curve {
        let gas = GasModel::diatomic();
        let st = ConservState2::from_mach(1.0, 1.0, 2.0, 0.1, &gas);
        let f = FnField {
            gas,
            state: move |_, _| st,
            adjoint: Some(adjoint),
            domain: Box::new(|x: f64, y: f64| x.abs() < 2.0 && y.abs() < 2.0),
        };
        let cfg = TraceConfig {
            step: 0.05,
            max_length: 1.0,
            ..Default::default()
        };
        trace(&f, (0.3, 0.2), family, &cfg).unwrap()
    }

    #[test]
    fn constant_adjoint_gives_zero() {
        let c = curve(|_, _| [1.0, 2.0, 3.0, 4.0], Family::S);
        let r = k_integrals(&c, CompatKind::S1).unwrap();
        assert_eq!(r.k_total, 0.0);
        assert_eq!(r.subpart_totals, [0.0; 4]);
        assert_eq!((r.ratio, r.total_ratio), (0.0, 0.0));
    }

    #[test]
    fn totals_are_consistent() {
        let c = curve(|x, y| [x * x, y, x * y, 1.0 + x], Family::CPlus);
        let r = k_integrals(&c, CompatKind::CPlus).unwrap();
        assert_eq!(r.k_total, sum4(&r.subpart_totals));
        assert_eq!(*r.sub_cum.last().unwrap(), r.subpart_totals);
        assert!(r.ratio >= r.total_ratio);
        assert!(matches!(
            k_integrals(&c, CompatKind::S1),
            Err(Error::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn report_round_trip() {
        let c = curve(|x, y| [x.sin(), y, x * y, 1.0 + x], Family::S);
        let r = k_integrals(&c, CompatKind::S2).unwrap();
        let mut buf = Vec::new();
        r.write_to(&mut buf).unwrap();
        let back = CompatReport::read_from(&buf[..]).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn kind_names() {
        assert_eq!("S1".parse::<CompatKind>().unwrap(), CompatKind::S1);
        assert_eq!(CompatKind::CMinus.family(), Family::CMinus);
        assert!("x".parse::<CompatKind>().is_err());
    }
}
