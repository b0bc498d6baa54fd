//! Collision cross-section tables and certified piecewise fits.
//!
//! Tabulated cross sections are ingested from a plain-text format (see
//! [`XsecTable::parse`]) and replaced by piecewise polynomial
//! approximations whose maximum relative error against the table's
//! reference interpolation is certified to stay under a bound (2% by
//! default) on a 10x refined verification grid. The reference model
//! between knots is log-log linear, the usual choice for data spanning
//! several decades; intervals touching zero values fall back to plain
//! linear interpolation.

use crate::error::{Error, Result};

/// Maximum number of pieces the fitter will try before falling back to the
/// exact per-interval representation.
const MAX_PIECES: usize = 1024;

/// Verification samples inserted per knot interval.
const REFINE: usize = 10;

/// A validated tabulated cross section.
#[derive(Debug, Clone, PartialEq)]
pub struct XsecTable {
    pub species: String,
    pub process: String,
    pub threshold_ev: f64,
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl XsecTable {
    /// Parse the fixture format: `#` comments, header lines `SPECIES`,
    /// `PROCESS`, `THRESHOLD <eV>`, then whitespace-separated
    /// `energy sigma` rows (eV, m^2).
    pub fn parse(text: &str) -> Result<Self> {
        let mut species = None;
        let mut process = None;
        let mut threshold = None;
        let mut knots = Vec::new();
        let mut values = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let first = tokens.next().unwrap();
            match first {
                "SPECIES" => {
                    species = Some(tokens.collect::<Vec<_>>().join(" "));
                }
                "PROCESS" => {
                    process = Some(tokens.collect::<Vec<_>>().join(" "));
                }
                "THRESHOLD" => {
                    let v = tokens.next().ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: "THRESHOLD needs a value".into(),
                    })?;
                    threshold = Some(parse_f64(v, line_no)?);
                }
                _ => {
                    let energy = parse_f64(first, line_no)?;
                    let sigma_tok = tokens.next().ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: "data row needs two columns (energy sigma)".into(),
                    })?;
                    let sigma = parse_f64(sigma_tok, line_no)?;
                    if tokens.next().is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "data row has more than two columns".into(),
                        });
                    }
                    knots.push(energy);
                    values.push(sigma);
                }
            }
        }

        let table = XsecTable {
            species: species.unwrap_or_default(),
            process: process.unwrap_or_default(),
            threshold_ev: threshold.ok_or_else(|| Error::Parse {
                line: 0,
                message: "missing THRESHOLD header".into(),
            })?,
            knots,
            values,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if self.knots.len() < 2 {
            return Err(Error::Validation("need at least 2 knots".into()));
        }
        if self.threshold_ev < 0.0 {
            return Err(Error::Validation("threshold must be >= 0".into()));
        }
        for w in self.knots.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Validation(format!(
                    "energies must be strictly ascending ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for (&e, &s) in self.knots.iter().zip(&self.values) {
            if s < 0.0 || !s.is_finite() {
                return Err(Error::Validation(format!("sigma({e}) = {s} is invalid")));
            }
            if e < self.threshold_ev && s != 0.0 {
                return Err(Error::Validation(format!(
                    "sigma({e}) = {s} nonzero below threshold {}",
                    self.threshold_ev
                )));
            }
        }
        Ok(())
    }

    /// Reference interpolation of the table: log-log linear between knots,
    /// linear on intervals touching zero, zero below threshold, clamped to
    /// the end values outside the knot range.
    pub fn reference(&self, energy_ev: f64) -> f64 {
        if energy_ev < self.threshold_ev {
            return 0.0;
        }
        let n = self.knots.len();
        if energy_ev <= self.knots[0] {
            return self.values[0];
        }
        if energy_ev >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let i = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&energy_ev).unwrap())
        {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let (e0, e1) = (self.knots[i], self.knots[i + 1]);
        let (s0, s1) = (self.values[i], self.values[i + 1]);
        if s0 > 0.0 && s1 > 0.0 && e0 > 0.0 {
            let t = (energy_ev.ln() - e0.ln()) / (e1.ln() - e0.ln());
            (s0.ln() + t * (s1.ln() - s0.ln())).exp()
        } else {
            let t = (energy_ev - e0) / (e1 - e0);
            s0 + t * (s1 - s0)
        }
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {tok:?}"),
    })
}

/// How the fitted body of the cross section is represented.
#[derive(Debug, Clone, PartialEq)]
enum Body {
    /// One polynomial in plain energy covering the whole body range.
    Poly([f64; 4]),
    /// Cubics in `ln(energy)` on a uniform-in-log breakpoint grid;
    /// `sigma = exp(poly(ln e - piece origin))`.
    LogGrid {
        ln_e0: f64,
        dln: f64,
        coeffs: Vec<[f64; 4]>,
    },
    /// The reference interpolation itself (fallback; exact by definition).
    Exact,
}

/// Certified piecewise approximation of a cross section.
///
/// Evaluation is zero below threshold, clamps to the last tabulated value
/// above the knot range, and never returns a negative area.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseXsec {
    threshold_ev: f64,
    body_start: f64,
    e_last: f64,
    sigma_last: f64,
    /// Exact (reference) segments below `body_start`, where the table
    /// rises from zero and relative-error fitting is ill-posed.
    head: XsecTable,
    body: Body,
    /// Max relative error observed on the refined verification grid.
    pub certified_rel_err: f64,
    /// Number of polynomial pieces in the body (0 for the exact fallback).
    pub pieces: usize,
}

impl PiecewiseXsec {
    pub fn threshold_ev(&self) -> f64 {
        self.threshold_ev
    }

    /// Highest tabulated energy.
    pub fn e_last(&self) -> f64 {
        self.e_last
    }

    /// Evaluate the fitted cross section [m^2].
    #[inline]
    pub fn eval(&self, energy_ev: f64) -> f64 {
        if energy_ev < self.threshold_ev {
            return 0.0;
        }
        if energy_ev >= self.e_last {
            return self.sigma_last;
        }
        if energy_ev < self.body_start {
            return self.head.reference(energy_ev);
        }
        match &self.body {
            Body::Poly(c) => {
                let x = energy_ev;
                (c[0] + x * (c[1] + x * (c[2] + x * c[3]))).max(0.0)
            }
            Body::LogGrid { ln_e0, dln, coeffs } => {
                let t = energy_ev.ln();
                let idx = (((t - ln_e0) / dln) as usize).min(coeffs.len() - 1);
                let u = t - (ln_e0 + idx as f64 * dln);
                let c = coeffs[idx];
                (c[0] + u * (c[1] + u * (c[2] + u * c[3]))).exp()
            }
            Body::Exact => self.head.reference(energy_ev),
        }
    }
}

/// Free-function form of [`PiecewiseXsec::eval`].
#[inline]
pub fn eval_sigma(xsec: &PiecewiseXsec, energy_ev: f64) -> f64 {
    xsec.eval(energy_ev)
}

/// Fit a certified piecewise approximation of `table`.
///
/// Tries a single polynomial in plain energy first, then log-log cubics on
/// successively finer uniform-in-log grids. If the bound is still not met
/// at [`MAX_PIECES`], falls back to the exact per-interval interpolation,
/// which satisfies the bound by definition.
pub fn fit_piecewise(table: &XsecTable, max_rel_err: f64) -> PiecewiseXsec {
    let n = table.knots.len();
    let e_last = table.knots[n - 1];
    let sigma_last = table.values[n - 1];

    // First strictly positive knot with positive energy: fitting in
    // relative error is only meaningful from there on.
    let body_ix = table
        .knots
        .iter()
        .zip(&table.values)
        .position(|(&e, &s)| s > 0.0 && e > 0.0);

    let make = |body_start: f64, body: Body, pieces: usize| PiecewiseXsec {
        threshold_ev: table.threshold_ev,
        body_start,
        e_last,
        sigma_last,
        head: table.clone(),
        body,
        certified_rel_err: 0.0,
        pieces,
    };

    let Some(body_ix) = body_ix else {
        // Degenerate all-zero table.
        let mut fit = make(e_last, Body::Exact, 0);
        fit.certified_rel_err = 0.0;
        return fit;
    };
    let body_start = table.knots[body_ix];

    // Single polynomial over the whole range (covers constant and
    // low-order tables exactly).
    if body_ix == 0 {
        for degree in 0..=3usize {
            let coeffs = fit_poly_plain(&table.knots, &table.values, degree);
            let cand = make(body_start, Body::Poly(coeffs), 1);
            if let Some(err) = certify(&cand, table, max_rel_err) {
                let mut fit = cand;
                fit.certified_rel_err = err;
                return fit;
            }
        }
    }

    // Uniform-in-log cubic grid over the body.
    let ln_a = body_start.ln();
    let ln_b = e_last.ln();
    let mut pieces = 8usize;
    while pieces <= MAX_PIECES {
        let dln = (ln_b - ln_a) / pieces as f64;
        let mut coeffs = Vec::with_capacity(pieces);
        for p in 0..pieces {
            let t0 = ln_a + p as f64 * dln;
            coeffs.push(fit_piece_loglog(table, t0, dln));
        }
        let cand = make(
            body_start,
            Body::LogGrid {
                ln_e0: ln_a,
                dln,
                coeffs,
            },
            pieces,
        );
        if let Some(err) = certify(&cand, table, max_rel_err) {
            let mut fit = cand;
            fit.certified_rel_err = err;
            return fit;
        }
        pieces *= 2;
    }

    // Exact fallback.
    make(body_start, Body::Exact, 0)
}

/// Least-squares cubic in `u = ln(e) - t0` against `ln(reference)` sampled
/// across one log-grid piece.
fn fit_piece_loglog(table: &XsecTable, t0: f64, dln: f64) -> [f64; 4] {
    const SAMPLES: usize = 12;
    let mut us = [0.0; SAMPLES];
    let mut ys = [0.0; SAMPLES];
    for (k, (u, y)) in us.iter_mut().zip(ys.iter_mut()).enumerate() {
        *u = dln * k as f64 / (SAMPLES - 1) as f64;
        let e = (t0 + *u).exp();
        *y = table.reference(e).max(1e-300).ln();
    }
    lsq_poly(&us, &ys, 3)
}

fn fit_poly_plain(xs: &[f64], ys: &[f64], degree: usize) -> [f64; 4] {
    lsq_poly(xs, ys, degree)
}

/// Weighted-free least squares polynomial fit via normal equations.
fn lsq_poly(xs: &[f64], ys: &[f64], degree: usize) -> [f64; 4] {
    let d = degree.min(3);
    let m = d + 1;
    // Scale x for conditioning.
    let xmax = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
    let mut ata = [[0.0f64; 4]; 4];
    let mut atb = [0.0f64; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let xs_ = x / xmax;
        let mut basis = [1.0, 0.0, 0.0, 0.0];
        for k in 1..m {
            basis[k] = basis[k - 1] * xs_;
        }
        for i in 0..m {
            atb[i] += basis[i] * y;
            for j in 0..m {
                ata[i][j] += basis[i] * basis[j];
            }
        }
    }
    let sol = solve_small(&mut ata, &mut atb, m);
    let mut out = [0.0; 4];
    let mut scale = 1.0;
    for k in 0..m {
        out[k] = sol[k] / scale;
        scale *= xmax;
    }
    out
}

/// Gaussian elimination with partial pivoting for systems up to 4x4.
fn solve_small(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], m: usize) -> [f64; 4] {
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        if p == 0.0 {
            continue;
        }
        for r in col + 1..m {
            let f = a[r][col] / p;
            for c in col..m {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for col in (0..m).rev() {
        let mut s = b[col];
        for c in col + 1..m {
            s -= a[col][c] * x[c];
        }
        x[col] = if a[col][col] != 0.0 { s / a[col][col] } else { 0.0 };
    }
    x
}

/// Check the candidate on the 10x refined grid; returns the observed max
/// relative error if it passes the bound.
fn certify(fit: &PiecewiseXsec, table: &XsecTable, max_rel_err: f64) -> Option<f64> {
    let mut worst: f64 = 0.0;
    for w in table.knots.windows(2) {
        let (e0, e1) = (w[0], w[1]);
        for k in 0..=REFINE {
            let e = if e0 > 0.0 {
                // geometric refinement matches the log-log reference
                (e0.ln() + (e1.ln() - e0.ln()) * k as f64 / REFINE as f64).exp()
            } else {
                e0 + (e1 - e0) * k as f64 / REFINE as f64
            };
            let reference = table.reference(e);
            if reference <= 0.0 {
                continue;
            }
            let got = fit.eval(e);
            let rel = (got - reference).abs() / reference;
            if rel > max_rel_err {
                return None;
            }
            worst = worst.max(rel);
        }
    }
    Some(worst)
}
