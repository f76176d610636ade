//! Structured-grid flow and adjoint fields: the `ADJCHAR-FIELD` text format,
//! bilinear sampling and a CSV importer.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gas::{ConservState2, GasModel};

/// Adjoint vector `(psi1, psi2, psi3, psi4)`.
pub type Adjoint2 = [f64; 4];

const MAGIC: &str = "ADJCHAR-FIELD 1";
const INSIDE_TOL: f64 = 1e-12;

/// Flow state (and adjoint, if present) interpolated at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub state: ConservState2<f64>,
    pub adjoint: Option<Adjoint2>,
    /// Cell `(ci, cj)`; analytic fields report `(0, 0)`.
    pub cell: (usize, usize),
    /// Local coordinates in the cell, in `[0, 1]^2`.
    pub local: (f64, f64),
}

/// Anything a curve can be traced through.
pub trait FlowField {
    fn gas(&self) -> &GasModel<f64>;
    fn has_adjoint(&self) -> bool;
    /// Interpolated data at `(x, y)`; `hint` is the cell of a nearby previous query.
    fn sample_at(&self, x: f64, y: f64, hint: Option<(usize, usize)>) -> Result<SamplePoint>;
}

/// A field given by closures, for analytic test cases.
pub struct FnField<S, A> {
    pub gas: GasModel<f64>,
    pub state: S,
    pub adjoint: Option<A>,
    /// Points outside this predicate are reported as `OutOfDomain`.
    pub domain: Box<dyn Fn(f64, f64) -> bool + Send + Sync>,
}

impl<S, A> FlowField for FnField<S, A>
where
    S: Fn(f64, f64) -> ConservState2<f64>,
    A: Fn(f64, f64) -> Adjoint2,
{
    fn gas(&self) -> &GasModel<f64> {
        &self.gas
    }

    fn has_adjoint(&self) -> bool {
        self.adjoint.is_some()
    }

    fn sample_at(&self, x: f64, y: f64, _hint: Option<(usize, usize)>) -> Result<SamplePoint> {
        if !(self.domain)(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        Ok(SamplePoint {
            state: (self.state)(x, y),
            adjoint: self.adjoint.as_ref().map(|a| a(x, y)),
            cell: (0, 0),
            local: (0.0, 0.0),
        })
    }
}

#[derive(Debug, Clone)]
struct BucketIndex {
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

/// Flow (and optionally adjoint) data at the nodes of a structured grid.
/// Node `(i, j)` is stored at `j * ni + i`.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    ni: usize,
    nj: usize,
    gas: GasModel<f64>,
    periodic_i: bool,
    x: Vec<f64>,
    y: Vec<f64>,
    states: Vec<ConservState2<f64>>,
    adjoint: Option<Vec<Adjoint2>>,
    collapsed: Vec<bool>,
    index: BucketIndex,
}

impl FieldGrid {
    /// Builds and validates a grid.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ni: usize,
        nj: usize,
        gas: GasModel<f64>,
        periodic_i: bool,
        x: Vec<f64>,
        y: Vec<f64>,
        states: Vec<ConservState2<f64>>,
        adjoint: Option<Vec<Adjoint2>>,
    ) -> Result<Self> {
        if ni < 2 || nj < 2 || (periodic_i && ni < 3) {
            return Err(Error::InvalidArgument(format!(
                "grid dimensions {ni} x {nj} too small"
            )));
        }
        let n = ni * nj;
        for len in [x.len(), y.len(), states.len()]
            .into_iter()
            .chain(adjoint.as_ref().map(Vec::len))
        {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        for (node, s) in states.iter().enumerate() {
            if let Err(Error::NonPhysicalState { rho, p }) = s.primitive(&gas) {
                return Err(Error::NonPhysicalNode {
                    node,
                    i: node % ni,
                    j: node / ni,
                    rho,
                    p,
                });
            }
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite node coordinate".into()));
        }
        let mut grid = Self {
            ni,
            nj,
            gas,
            periodic_i,
            x,
            y,
            states,
            adjoint,
            collapsed: Vec::new(),
            index: BucketIndex {
                x0: 0.0,
                y0: 0.0,
                hx: 1.0,
                hy: 1.0,
                nx: 0,
                ny: 0,
                cells: Vec::new(),
            },
        };
        grid.flag_collapsed();
        grid.build_index();
        Ok(grid)
    }

    pub fn ni(&self) -> usize {
        self.ni
    }

    pub fn nj(&self) -> usize {
        self.nj
    }

    pub fn periodic_i(&self) -> bool {
        self.periodic_i
    }

    /// Number of cells along i (wraps when periodic) and j.
    pub fn cell_dims(&self) -> (usize, usize) {
        (
            if self.periodic_i {
                self.ni
            } else {
                self.ni - 1
            },
            self.nj - 1,
        )
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.ni + i
    }

    pub fn xy(&self, node: usize) -> (f64, f64) {
        (self.x[node], self.y[node])
    }

    pub fn state(&self, node: usize) -> ConservState2<f64> {
        self.states[node]
    }

    pub fn adjoint(&self) -> Option<&[Adjoint2]> {
        self.adjoint.as_deref()
    }

    pub fn adjoint_mut(&mut self) -> Option<&mut [Adjoint2]> {
        self.adjoint.as_deref_mut()
    }

    pub fn is_collapsed(&self, ci: usize, cj: usize) -> bool {
        self.collapsed[cj * self.cell_dims().0 + ci]
    }

    pub fn collapsed_count(&self) -> usize {
        self.collapsed.iter().filter(|&&c| c).count()
    }

    fn corners(&self, ci: usize, cj: usize) -> [usize; 4] {
        let i1 = (ci + 1) % self.ni;
        [
            self.node(ci, cj),
            self.node(i1, cj),
            self.node(i1, cj + 1),
            self.node(ci, cj + 1),
        ]
    }

    fn corner_xy(&self, ci: usize, cj: usize) -> [(f64, f64); 4] {
        self.corners(ci, cj).map(|n| (self.x[n], self.y[n]))
    }

    /// Twice the signed area of each cell's corner triangles decides its
    /// orientation; cells disagreeing with the grid's dominant orientation, or
    /// with vanishing corner Jacobians, are flagged.
    fn flag_collapsed(&mut self) {
        let (nci, ncj) = self.cell_dims();
        let jac: Vec<[f64; 4]> = (0..ncj)
            .flat_map(|cj| (0..nci).map(move |ci| (ci, cj)))
            .map(|(ci, cj)| {
                let p = self.corner_xy(ci, cj);
                let mut out = [0.0; 4];
                for k in 0..4 {
                    let (a, b, c) = (p[(k + 3) % 4], p[k], p[(k + 1) % 4]);
                    out[k] = (c.0 - b.0) * (a.1 - b.1) - (c.1 - b.1) * (a.0 - b.0);
                }
                out
            })
            .collect();
        let total: f64 = jac.iter().map(|j| j.iter().sum::<f64>()).sum();
        let sign = if total < 0.0 { -1.0 } else { 1.0 };
        let scale = jac.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = 1e-14 * scale;
        self.collapsed = jac
            .iter()
            .map(|j| j.iter().any(|&v| sign * v <= floor))
            .collect();
    }

    fn build_index(&mut self) {
        let (nci, ncj) = self.cell_dims();
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for (&x, &y) in self.x.iter().zip(&self.y) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let ncell = nci * ncj;
        let nb = ((ncell as f64).sqrt() / 2.0).ceil().clamp(1.0, 512.0) as usize;
        let hx = ((x1 - x0) / nb as f64).max(f64::MIN_POSITIVE);
        let hy = ((y1 - y0) / nb as f64).max(f64::MIN_POSITIVE);
        let mut cells = vec![Vec::new(); nb * nb];
        let bucket =
            |v: f64, lo: f64, h: f64| (((v - lo) / h).floor().max(0.0) as usize).min(nb - 1);
        for cj in 0..ncj {
            for ci in 0..nci {
                let p = self.corner_xy(ci, cj);
                let (bx0, bx1) = p
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| {
                        (a.min(q.0), b.max(q.0))
                    });
                let (by0, by1) = p
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| {
                        (a.min(q.1), b.max(q.1))
                    });
                let pad_x = INSIDE_TOL * (bx1 - bx0).max(1.0);
                let pad_y = INSIDE_TOL * (by1 - by0).max(1.0);
                for by in bucket(by0 - pad_y, y0, hy)..=bucket(by1 + pad_y, y0, hy) {
                    for bx in bucket(bx0 - pad_x, x0, hx)..=bucket(bx1 + pad_x, x0, hx) {
                        cells[by * nb + bx].push((cj * nci + ci) as u32);
                    }
                }
            }
        }
        self.index = BucketIndex {
            x0,
            y0,
            hx,
            hy,
            nx: nb,
            ny: nb,
            cells,
        };
    }

    /// Local coordinates of `(x, y)` in cell `(ci, cj)` by Newton iteration on
    /// the bilinear map. `None` if the iteration does not converge.
    pub fn local_coords(&self, ci: usize, cj: usize, x: f64, y: f64) -> Option<(f64, f64)> {
        let p = self.corner_xy(ci, cj);
        let (mut xi, mut eta) = (0.5, 0.5);
        for _ in 0..30 {
            let w = [
                (1.0 - xi) * (1.0 - eta),
                xi * (1.0 - eta),
                xi * eta,
                (1.0 - xi) * eta,
            ];
            let fx = w.iter().zip(&p).map(|(w, q)| w * q.0).sum::<f64>() - x;
            let fy = w.iter().zip(&p).map(|(w, q)| w * q.1).sum::<f64>() - y;
            let dxi = [-(1.0 - eta), 1.0 - eta, eta, -eta];
            let deta = [-(1.0 - xi), -xi, xi, 1.0 - xi];
            let a = dxi.iter().zip(&p).map(|(w, q)| w * q.0).sum::<f64>();
            let b = deta.iter().zip(&p).map(|(w, q)| w * q.0).sum::<f64>();
            let c = dxi.iter().zip(&p).map(|(w, q)| w * q.1).sum::<f64>();
            let d = deta.iter().zip(&p).map(|(w, q)| w * q.1).sum::<f64>();
            let det = a * d - b * c;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let sx = (d * fx - b * fy) / det;
            let sy = (-c * fx + a * fy) / det;
            xi -= sx;
            eta -= sy;
            if !(xi.is_finite() && eta.is_finite()) || xi.abs() > 1e6 || eta.abs() > 1e6 {
                return None;
            }
            if sx.abs().max(sy.abs()) < 1e-15 {
                break;
            }
        }
        Some((xi, eta))
    }

    fn inside(local: (f64, f64)) -> bool {
        let r = -INSIDE_TOL..=1.0 + INSIDE_TOL;
        r.contains(&local.0) && r.contains(&local.1)
    }

    fn try_cell(&self, ci: usize, cj: usize, x: f64, y: f64) -> Option<(f64, f64)> {
        if self.is_collapsed(ci, cj) {
            return None;
        }
        self.local_coords(ci, cj, x, y).filter(|&l| Self::inside(l))
    }

    /// Finds the cell containing `(x, y)` by walking from `hint`.
    pub fn walk(
        &self,
        x: f64,
        y: f64,
        hint: (usize, usize),
    ) -> Option<((usize, usize), (f64, f64))> {
        let (nci, ncj) = self.cell_dims();
        let (mut ci, mut cj) = (hint.0.min(nci - 1), hint.1.min(ncj - 1));
        for _ in 0..(nci + ncj + 8) {
            if self.is_collapsed(ci, cj) {
                return None;
            }
            let (xi, eta) = self.local_coords(ci, cj, x, y)?;
            if Self::inside((xi, eta)) {
                return Some(((ci, cj), (xi, eta)));
            }
            let step = |v: f64| {
                if v < -INSIDE_TOL {
                    -1i64
                } else if v > 1.0 + INSIDE_TOL {
                    1
                } else {
                    0
                }
            };
            // Steps across a non-periodic boundary are dropped so the walk
            // can slide along curved boundaries.
            let mut ni = ci as i64 + step(xi);
            let mut nj = cj as i64 + step(eta);
            if nj < 0 || nj >= ncj as i64 {
                nj = cj as i64;
            }
            if self.periodic_i {
                ni = ni.rem_euclid(nci as i64);
            } else if ni < 0 || ni >= nci as i64 {
                ni = ci as i64;
            }
            if (ni as usize, nj as usize) == (ci, cj) {
                return None;
            }
            ci = ni as usize;
            cj = nj as usize;
        }
        None
    }

    /// Finds the cell containing `(x, y)` through the bucket index; the
    /// lowest-numbered containing cell wins.
    pub fn global_search(&self, x: f64, y: f64) -> Option<((usize, usize), (f64, f64))> {
        let ix = &self.index;
        let bx = ((x - ix.x0) / ix.hx).floor();
        let by = ((y - ix.y0) / ix.hy).floor();
        let clamp = |b: f64, n: usize, v: f64, lo: f64, h: f64| {
            if b >= 0.0 && (b as usize) < n {
                Some(b as usize)
            } else if (v - lo - n as f64 * h).abs() <= INSIDE_TOL * h.max(1.0)
                || (v - lo).abs() <= INSIDE_TOL * h.max(1.0)
            {
                Some(if b < 0.0 { 0 } else { n - 1 })
            } else {
                None
            }
        };
        let bx = clamp(bx, ix.nx, x, ix.x0, ix.hx)?;
        let by = clamp(by, ix.ny, y, ix.y0, ix.hy)?;
        let nci = self.cell_dims().0;
        let bucket = &ix.cells[by * ix.nx + bx];
        let cell = |c: u32| (c as usize % nci, c as usize / nci);
        bucket
            .iter()
            .find_map(|&c| {
                let (ci, cj) = cell(c);
                self.try_cell(ci, cj, x, y).map(|l| ((ci, cj), l))
            })
            .or_else(|| {
                bucket
                    .iter()
                    .map(|&c| cell(c))
                    .filter(|&(ci, cj)| {
                        self.is_collapsed(ci, cj) && self.polygon_contains(ci, cj, x, y)
                    })
                    .find_map(|(ci, cj)| self.resolve_collapsed(ci, cj, x, y))
            })
    }

    fn polygon_contains(&self, ci: usize, cj: usize, x: f64, y: f64) -> bool {
        let p = self.corner_xy(ci, cj);
        let mut inside = false;
        for k in 0..4 {
            let (a, b) = (p[k], p[(k + 1) % 4]);
            if (a.1 > y) != (b.1 > y) && x < a.0 + (y - a.1) * (b.0 - a.0) / (b.1 - a.1) {
                inside = !inside;
            }
        }
        inside
    }

    /// Local coordinates of `(x, y)` in the non-collapsed edge neighbour of
    /// `(ci, cj)` whose unit square it lies closest to.
    fn resolve_collapsed(
        &self,
        ci: usize,
        cj: usize,
        x: f64,
        y: f64,
    ) -> Option<((usize, usize), (f64, f64))> {
        let (nci, ncj) = self.cell_dims();
        let (ci, cj, nci_i, ncj_i) = (ci as i64, cj as i64, nci as i64, ncj as i64);
        let outside = |(xi, eta): (f64, f64)| 0f64.max(-xi).max(xi - 1.0).max(-eta).max(eta - 1.0);
        [(ci - 1, cj), (ci + 1, cj), (ci, cj - 1), (ci, cj + 1)]
            .into_iter()
            .filter_map(|(i, j)| {
                if j < 0 || j >= ncj_i {
                    return None;
                }
                let i = if self.periodic_i {
                    i.rem_euclid(nci_i)
                } else if i < 0 || i >= nci_i {
                    return None;
                } else {
                    i
                };
                let (i, j) = (i as usize, j as usize);
                if self.is_collapsed(i, j) {
                    return None;
                }
                self.local_coords(i, j, x, y).map(|l| ((i, j), l))
            })
            .min_by(|a, b| outside(a.1).total_cmp(&outside(b.1)))
    }

    /// Bilinear interpolation of conservative variables and adjoint at `(x, y)`.
    pub fn sample(&self, x: f64, y: f64, hint: Option<(usize, usize)>) -> Result<SamplePoint> {
        let found = hint
            .and_then(|h| self.walk(x, y, h))
            .or_else(|| self.global_search(x, y));
        let ((ci, cj), (xi, eta)) = found.ok_or(Error::OutOfDomain { x, y })?;
        let (xi, eta) = (xi.clamp(0.0, 1.0), eta.clamp(0.0, 1.0));
        Ok(self.interpolate(ci, cj, xi, eta))
    }

    fn interpolate(&self, ci: usize, cj: usize, xi: f64, eta: f64) -> SamplePoint {
        let c = self.corners(ci, cj);
        let w = [
            (1.0 - xi) * (1.0 - eta),
            xi * (1.0 - eta),
            xi * eta,
            (1.0 - xi) * eta,
        ];
        let mut q = [0.0; 4];
        for (wk, &n) in w.iter().zip(&c) {
            for (qv, sv) in q.iter_mut().zip(self.states[n].as_array()) {
                *qv += wk * sv;
            }
        }
        let adjoint = self.adjoint.as_ref().map(|a| {
            let mut psi = [0.0; 4];
            for (wk, &n) in w.iter().zip(&c) {
                for (pv, av) in psi.iter_mut().zip(a[n]) {
                    *pv += wk * av;
                }
            }
            psi
        });
        SamplePoint {
            state: ConservState2::from_array(q),
            adjoint,
            cell: (ci, cj),
            local: (xi, eta),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(
            w,
            "{} {} {} {} {}",
            self.ni,
            self.nj,
            self.gas.gamma(),
            u8::from(self.periodic_i),
            u8::from(self.adjoint.is_some())
        )?;
        for n in 0..self.ni * self.nj {
            let s = self.states[n];
            write!(
                w,
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                self.x[n], self.y[n], s.rho, s.rho_u, s.rho_v, s.rho_e
            )?;
            if let Some(a) = &self.adjoint {
                let p = a[n];
                write!(
                    w,
                    " {:.16e} {:.16e} {:.16e} {:.16e}",
                    p[0], p[1], p[2], p[3]
                )?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let mut next =
            || -> Result<Option<String>> { lines.next().transpose().map_err(Error::from) };
        let magic = next()?.ok_or_else(|| fmt_err(1, 1, "empty file"))?;
        if magic.trim_end() != MAGIC {
            return Err(fmt_err(1, 1, format!("expected `{MAGIC}`")));
        }
        let header = next()?.ok_or_else(|| fmt_err(2, 1, "missing dimension line"))?;
        let toks = tokens(&header);
        if toks.len() != 5 {
            return Err(fmt_err(
                2,
                toks.get(5).map_or(header.len() + 1, |t| t.0),
                "expected `ni nj gamma periodic_i adjoint_present`",
            ));
        }
        let ni: usize = parse_tok(&toks[0], 2)?;
        let nj: usize = parse_tok(&toks[1], 2)?;
        let gamma: f64 = parse_tok(&toks[2], 2)?;
        let periodic = parse_flag(&toks[3], 2)?;
        let has_adj = parse_flag(&toks[4], 2)?;
        if ni < 2 || nj < 2 {
            return Err(fmt_err(2, toks[0].0, "ni and nj must be at least 2"));
        }
        let gas = GasModel::new(gamma).map_err(|_| fmt_err(2, toks[2].0, "gamma must be > 1"))?;
        let n = ni * nj;
        let width = if has_adj { 10 } else { 6 };
        let (mut x, mut y, mut states) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        let mut adjoint = has_adj.then(|| Vec::with_capacity(n));
        let mut count = 0;
        let mut lineno = 2;
        while let Some(line) = next()? {
            lineno += 1;
            if line.trim().is_empty() {
                continue;
            }
            count += 1;
            if count > n {
                continue;
            }
            let toks = tokens(&line);
            if toks.len() != width {
                let col = toks.get(width).map_or(line.len() + 1, |t| t.0);
                return Err(fmt_err(
                    lineno,
                    col,
                    format!("expected {width} fields, found {}", toks.len()),
                ));
            }
            let mut v = [0.0; 10];
            for (k, t) in toks.iter().enumerate() {
                v[k] = parse_tok(t, lineno)?;
            }
            x.push(v[0]);
            y.push(v[1]);
            states.push(ConservState2::new(v[2], v[3], v[4], v[5]));
            if let Some(a) = adjoint.as_mut() {
                a.push([v[6], v[7], v[8], v[9]]);
            }
        }
        if count != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: count,
            });
        }
        Self::new(ni, nj, gas, periodic, x, y, states, adjoint)
    }

    /// Builds a grid from a CSV table with a header naming the columns
    /// `x, y, rho, rho_u, rho_v, rho_E`, optionally `psi1..psi4` and `i, j`.
    /// Without `i, j` columns rows are taken in node order and `dims` is required.
    pub fn from_csv<R: Read>(
        reader: R,
        dims: Option<(usize, usize)>,
        gas: GasModel<f64>,
        periodic_i: bool,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_err(&e))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let required = ["x", "y", "rho", "rho_u", "rho_v", "rho_E"];
        let mut idx = [0usize; 6];
        for (k, name) in required.iter().enumerate() {
            idx[k] = col(name).ok_or_else(|| fmt_err(1, 1, format!("missing column `{name}`")))?;
        }
        let psi: Vec<Option<usize>> = ["psi1", "psi2", "psi3", "psi4"]
            .iter()
            .map(|n| col(n))
            .collect();
        let has_adj = psi.iter().any(Option::is_some);
        if has_adj && psi.iter().any(Option::is_none) {
            return Err(fmt_err(1, 1, "adjoint columns must be all of psi1..psi4"));
        }
        let ij = col("i").zip(col("j"));
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(&e))?;
            let line = k + 2;
            let get = |c: usize| -> Result<f64> {
                let s = rec
                    .get(c)
                    .ok_or_else(|| fmt_err(line, c + 1, "missing field"))?;
                s.parse()
                    .map_err(|_| fmt_err(line, c + 1, format!("not a number: `{s}`")))
            };
            let mut v = [0.0; 10];
            for (slot, &c) in idx.iter().enumerate() {
                v[slot] = get(c)?;
            }
            if has_adj {
                for (slot, c) in psi.iter().enumerate() {
                    v[6 + slot] = get(c.unwrap())?;
                }
            }
            let pos = match ij {
                Some((ci, cj)) => Some((get(ci)? as usize, get(cj)? as usize)),
                None => None,
            };
            rows.push((pos, v));
        }
        let (ni, nj) = match (dims, ij) {
            (Some(d), _) => d,
            (None, Some(_)) => rows.iter().fold((0, 0), |(a, b), (p, _)| {
                let (i, j) = p.unwrap();
                (a.max(i + 1), b.max(j + 1))
            }),
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "CSV without i,j columns needs explicit dimensions".into(),
                ))
            }
        };
        let n = ni * nj;
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let mut slots: Vec<Option<[f64; 10]>> = vec![None; n];
        for (k, (pos, v)) in rows.into_iter().enumerate() {
            let node = match pos {
                Some((i, j)) if i < ni && j < nj => j * ni + i,
                Some((i, j)) => {
                    return Err(Error::InvalidArgument(format!(
                        "row {} has index ({i}, {j}) outside {ni} x {nj}",
                        k + 2
                    )))
                }
                None => k,
            };
            if slots[node].replace(v).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "node ({}, {}) given twice",
                    node % ni,
                    node / ni
                )));
            }
        }
        let vals: Vec<[f64; 10]> = slots
            .into_iter()
            .map(|s| s.expect("all slots filled"))
            .collect();
        Self::new(
            ni,
            nj,
            gas,
            periodic_i,
            vals.iter().map(|v| v[0]).collect(),
            vals.iter().map(|v| v[1]).collect(),
            vals.iter()
                .map(|v| ConservState2::new(v[2], v[3], v[4], v[5]))
                .collect(),
            has_adj.then(|| vals.iter().map(|v| [v[6], v[7], v[8], v[9]]).collect()),
        )
    }
}

impl FlowField for FieldGrid {
    fn gas(&self) -> &GasModel<f64> {
        &self.gas
    }

    fn has_adjoint(&self) -> bool {
        self.adjoint.is_some()
    }

    fn sample_at(&self, x: f64, y: f64, hint: Option<(usize, usize)>) -> Result<SamplePoint> {
        self.sample(x, y, hint)
    }
}

fn fmt_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        column,
        message: message.into(),
    }
}

fn csv_err(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    fmt_err(line, 1, e.to_string())
}

/// Whitespace-separated tokens with their one-based character columns.
fn tokens(line: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur: Option<(usize, String)> = None;
    for (k, ch) in line.chars().enumerate() {
        if ch.is_whitespace() {
            if let Some(t) = cur.take() {
                out.push(t);
            }
        } else {
            cur.get_or_insert_with(|| (k + 1, String::new())).1.push(ch);
        }
    }
    out.extend(cur);
    out
}

fn parse_tok<F: std::str::FromStr>(tok: &(usize, String), line: usize) -> Result<F> {
    tok.1
        .parse()
        .map_err(|_| fmt_err(line, tok.0, format!("cannot parse `{}`", tok.1)))
}

fn parse_flag(tok: &(usize, String), line: usize) -> Result<bool> {
    match tok.1.as_str() {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(fmt_err(
            line,
            tok.0,
            format!("expected 0 or 1, found `{}`", tok.1),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(ni: usize, nj: usize, adjoint: bool) -> FieldGrid {
        let gas = GasModel::diatomic();
        let s = ConservState2::from_mach(1.0, 1.0, 2.0, 0.0, &gas);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for j in 0..nj {
            for i in 0..ni {
                x.push(i as f64);
                y.push(j as f64 * 0.5);
            }
        }
        let adj = adjoint.then(|| {
            x.iter()
                .zip(&y)
                .map(|(&a, &b)| [a, b, a + b, 1.0])
                .collect()
        });
        FieldGrid::new(ni, nj, gas, false, x, y, vec![s; ni * nj], adj).unwrap()
    }

    #[test]
    fn tokens_report_columns() {
        let t = tokens("  ab c\tdd");
        assert_eq!(t, vec![(3, "ab".into()), (6, "c".into()), (8, "dd".into())]);
    }

    #[test]
    fn minimal_file_round_trip() {
        let g = uniform(2, 2, false);
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("ADJCHAR-FIELD 1\n2 2 1.4 0 0\n"));
        let back = FieldGrid::read_from(&buf[..]).unwrap();
        assert!(back.adjoint().is_none());
        assert_eq!(back.x, g.x);
        assert_eq!(back.states, g.states);
    }

    #[test]
    fn nodal_and_linear_exactness() {
        let g = uniform(4, 3, true);
        let p = g.sample(2.0, 0.5, None).unwrap();
        assert_eq!(p.adjoint.unwrap(), [2.0, 0.5, 2.5, 1.0]);
        let p = g.sample(1.5, 0.25, Some((0, 0))).unwrap();
        let a = p.adjoint.unwrap();
        assert!(
            (a[0] - 1.5).abs() < 1e-14
                && (a[1] - 0.25).abs() < 1e-14
                && (a[2] - 1.75).abs() < 1e-14
        );
        assert!(matches!(
            g.sample(3.5, 0.0, None),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            g.sample(1.0, -0.1, Some((1, 1))),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn format_errors_locate_token() {
        let bad = "ADJCHAR-FIELD 1\n2 2 1.4 0 0\n0 0 1 2 0 4.5\n1 0 1 2 x 4.5\n";
        match FieldGrid::read_from(bad.as_bytes()) {
            Err(Error::Format { line, column, .. }) => assert_eq!((line, column), (4, 9)),
            other => panic!("{other:?}"),
        }
        let short = "ADJCHAR-FIELD 1\n2 2 1.4 0 0\n0 0 1 2 0 4.5\n";
        assert!(matches!(
            FieldGrid::read_from(short.as_bytes()),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 1
            })
        ));
        assert!(matches!(
            FieldGrid::read_from("HELLO\n".as_bytes()),
            Err(Error::Format { line: 1, .. })
        ));
    }

    #[test]
    fn zero_density_names_node() {
        let text = "ADJCHAR-FIELD 1\n2 2 1.4 0 0\n0 0 1 2 0 4.5\n1 0 1 2 0 4.5\n0 1 0 2 0 4.5\n1 1 1 2 0 4.5\n";
        match FieldGrid::read_from(text.as_bytes()) {
            Err(Error::NonPhysicalNode { node, i, j, .. }) => assert_eq!((node, i, j), (2, 0, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_with_indices() {
        let csv = "i,j,x,y,rho,rho_u,rho_v,rho_E\n1,0,1,0,1,2,0,4.5\n0,0,0,0,1,2,0,4.5\n0,1,0,1,1,2,0,4.5\n1,1,1,1,1,2,0,4.5\n";
        let g = FieldGrid::from_csv(csv.as_bytes(), None, GasModel::diatomic(), false).unwrap();
        assert_eq!((g.ni(), g.nj()), (2, 2));
        assert_eq!(g.xy(1), (1.0, 0.0));
        let no_dims = "x,y,rho,rho_u,rho_v,rho_E\n0,0,1,2,0,4.5\n";
        assert!(
            FieldGrid::from_csv(no_dims.as_bytes(), None, GasModel::diatomic(), false).is_err()
        );
    }
}
