//! Empirical sweeps: compute Kloosterman sums or diagonal Poincaré
//! coefficients over a parameter grid, divide by the matching theoretical
//! bound and fit `log(ratio)` against `log(c)` (or `log(D)`).
//!
//! A bound of the right shape leaves the ratio bounded, so the fitted slope
//! should be near zero. The fits are diagnostics: the bounds carry unknown
//! constants and nothing here certifies them.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{in_jacobi_range, theorem4_bound, RangeMode};
use crate::error::{Error, Result};
use crate::forms::{HalfIntegralMatrix, JacobiDatum};
use crate::kloosterman::{kloosterman_pm, lemma32_bound, EvalConfig};
use crate::poincare::diagonal_coefficient_permissive;

/// Grid description, read from JSON such as
/// `{"g": 1, "k": 12, "m": {"g": 1, "twice_m": [[2]]}, "n_range": [1, 5], "r_values": [[0], [1]], "c_range": [1, 60]}`.
///
/// For Kloosterman sweeps every `c` in `c_range` is a row; coefficient
/// sweeps truncate at `c_range[1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFamily {
    pub g: usize,
    pub k: u32,
    pub m: HalfIntegralMatrix,
    pub n_range: [i64; 2],
    pub r_values: Vec<Vec<i64>>,
    pub c_range: [u64; 2],
    /// Sign of `H^±`; Kloosterman sweeps only.
    #[serde(default = "default_sign")]
    pub sign: i8,
}

fn default_sign() -> i8 {
    1
}

impl SweepFamily {
    pub fn from_json(s: &str) -> Result<Self> {
        let f: SweepFamily = serde_json::from_str(s).map_err(|e| Error::invalid(format!("sweep spec: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.dim() != self.g {
            return Err(Error::invalid(format!("m is {0}x{0} but g = {1}", self.m.dim(), self.g)));
        }
        if self.n_range[0] > self.n_range[1] || self.c_range[0] > self.c_range[1] || self.c_range[0] == 0 {
            return Err(Error::invalid("ranges must be [lo, hi] with lo ≤ hi and c ≥ 1"));
        }
        if let Some(r) = self.r_values.iter().find(|r| r.len() != self.g) {
            return Err(Error::invalid(format!("r = {r:?} does not have length g = {}", self.g)));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::invalid("sign must be 1 or -1"));
        }
        Ok(())
    }

    /// The `(n, r)` pairs with positive discriminant, in grid order.
    pub fn data(&self) -> Vec<JacobiDatum> {
        let mut out = Vec::new();
        for n in self.n_range[0]..=self.n_range[1] {
            for r in &self.r_values {
                if let Ok(d) = JacobiDatum::new(n, r.clone(), self.m.clone()) {
                    out.push(d);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// `|H^±_{m,c}(n, r)|` against `(D, c) c^{(g+1)/2} det(2m)^{1/2}`; regressed on `c`.
    Kloosterman,
    /// `|b_{n,r}|` against the Poincaré coefficient bound; regressed on `D`.
    Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: i64,
    pub r: Vec<i64>,
    pub c: u64,
    pub discriminant: u64,
    pub magnitude: f64,
    pub abs_error: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Ordinary least squares `y ≈ slope · x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl Regression {
    /// Returns `None` for an empty sample. A sample with no spread in `x`
    /// gets slope 0 and the mean as intercept.
    pub fn fit(points: &[(f64, f64)]) -> Option<Regression> {
        if points.is_empty() {
            return None;
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let r_squared = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
        Some(Regression { slope, intercept: my - slope * mx, r_squared, points: points.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub family: SweepFamily,
    pub rows: Vec<SweepRow>,
    /// `log(ratio)` against `log(c)` or `log(D)`, over rows with nonzero magnitude.
    pub regression: Option<Regression>,
    /// `log(magnitude)` against the same abscissa.
    pub magnitude_regression: Option<Regression>,
    pub max_ratio: f64,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Summary<'a> {
    kind: SweepKind,
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    max_ratio: f64,
    magnitude_slope: Option<f64>,
    rows: usize,
    fitted_rows: usize,
    warnings: &'a [String],
}

impl SweepReport {
    fn abscissa(&self, row: &SweepRow) -> f64 {
        match self.kind {
            SweepKind::Kloosterman => row.c as f64,
            SweepKind::Coefficient => row.discriminant as f64,
        }
    }

    /// Rows whose magnitude is distinguishable from zero.
    pub fn fitted_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.magnitude > r.abs_error && r.magnitude > 0.0)
    }

    fn fit(&mut self) {
        let ratio: Vec<(f64, f64)> =
            self.fitted_rows().map(|r| (self.abscissa(r).ln(), r.ratio.ln())).collect();
        let magnitude: Vec<(f64, f64)> =
            self.fitted_rows().map(|r| (self.abscissa(r).ln(), r.magnitude.ln())).collect();
        self.regression = Regression::fit(&ratio);
        self.magnitude_regression = Regression::fit(&magnitude);
        self.max_ratio = self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    }

    /// `{slope, intercept, r_squared, max_ratio, …}`.
    pub fn summary_json(&self) -> serde_json::Value {
        let s = Summary {
            kind: self.kind,
            slope: self.regression.map(|r| r.slope),
            intercept: self.regression.map(|r| r.intercept),
            r_squared: self.regression.map(|r| r.r_squared),
            max_ratio: self.max_ratio,
            magnitude_slope: self.magnitude_regression.map(|r| r.slope),
            rows: self.rows.len(),
            fitted_rows: self.regression.map_or(0, |r| r.points),
            warnings: &self.warnings,
        };
        serde_json::to_value(s).expect("summary serializes")
    }

    /// One line per row: `g,k,sign,n,r,c,D,magnitude,bound,ratio`, with `r`
    /// written as a JSON array.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::invalid(format!("writing CSV: {e}"));
        w.write_record(["g", "k", "sign", "n", "r", "c", "D", "magnitude", "bound", "ratio"]).map_err(io)?;
        for row in &self.rows {
            w.write_record([
                self.family.g.to_string(),
                self.family.k.to_string(),
                self.family.sign.to_string(),
                row.n.to_string(),
                serde_json::to_string(&row.r).expect("vector serializes"),
                row.c.to_string(),
                row.discriminant.to_string(),
                format!("{:e}", row.magnitude),
                format!("{:e}", row.bound),
                format!("{:e}", row.ratio),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("writing CSV: {e}")))
    }

    /// Multiplies every magnitude (and so every ratio) by `s > 0` and refits.
    pub fn rescaled(&self, s: f64) -> SweepReport {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.magnitude *= s;
            r.abs_error *= s;
            r.ratio = r.magnitude / r.bound;
        }
        out.fit();
        out
    }
}

/// Bound used for coefficient sweeps. Inside `(g+3)/2 < k < g` this is the
/// Poincaré coefficient bound at `ε = 0`. For `k > g + 1` the middle range
/// of the `c`-sum converges on its own, the split point is not needed and
/// the bound collapses to `1 + D^{g/2} det(2m)^{−(g+1)/2}`.
pub fn coefficient_bound(g: usize, k: u32, det2m: u64, d: u64) -> Result<f64> {
    let gu = g as u32;
    if in_jacobi_range(gu, k) {
        return Ok(theorem4_bound(gu, k, det2m, d, 0.0, RangeMode::Strict)?.value);
    }
    if k > gu + 1 {
        let g = g as f64;
        return Ok(1.0 + (d as f64).powf(g / 2.0) / (det2m as f64).powf((g + 1.0) / 2.0));
    }
    Err(Error::OutOfRange(format!(
        "no coefficient bound for (g, k) = ({g}, {k}); need (g+3)/2 < k < g or k > g + 1"
    )))
}

/// Runs the sweep. Rows are computed in parallel and reported in grid order
/// `(n, r, c)`.
pub fn empirical_exponent_sweep(family: &SweepFamily, kind: SweepKind, cfg: &EvalConfig) -> Result<SweepReport> {
    family.validate()?;
    let max_g = match kind {
        SweepKind::Kloosterman => 3,
        SweepKind::Coefficient => 2,
    };
    if family.g > max_g {
        return Err(Error::invalid(format!("{kind:?} sweeps support g ≤ {max_g}")));
    }
    let data = family.data();
    let det2m = u64::try_from(family.m.det_twice()).map_err(|_| Error::invalid("det(2m) out of range"))?;
    let mut warnings = Vec::new();
    let rows: Vec<SweepRow> = match kind {
        SweepKind::Kloosterman => {
            let jobs: Vec<(&JacobiDatum, u64)> =
                data.iter().flat_map(|d| (family.c_range[0]..=family.c_range[1]).map(move |c| (d, c))).collect();
            jobs.par_iter()
                .map(|(datum, c)| {
                    let disc = datum.discriminant() as u64;
                    let h = kloosterman_pm(&family.m, *c, datum.n, &datum.r, family.sign, cfg)?;
                    let bound = lemma32_bound(&family.m, *c, disc);
                    Ok(row(datum, *c, disc, h.norm(), h.abs_error, bound))
                })
                .collect::<Result<_>>()?
        }
        SweepKind::Coefficient => {
            let c_max = family.c_range[1];
            let results: Vec<(SweepRow, Vec<String>)> = data
                .par_iter()
                .map(|datum| {
                    let disc = datum.discriminant() as u64;
                    let b = diagonal_coefficient_permissive(family.k, datum, c_max, cfg)?;
                    let bound = coefficient_bound(family.g, family.k, det2m, disc)?;
                    Ok((row(datum, c_max, disc, b.value.norm(), b.value.abs_error, bound), b.warnings))
                })
                .collect::<Result<_>>()?;
            let mut rows = Vec::with_capacity(results.len());
            for (r, w) in results {
                for w in w {
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                }
                rows.push(r);
            }
            rows
        }
    };
    let mut report = SweepReport {
        kind,
        family: family.clone(),
        rows,
        regression: None,
        magnitude_regression: None,
        max_ratio: 0.0,
        warnings,
    };
    report.rows.sort_by(|a, b| (a.n, &a.r, a.c).cmp(&(b.n, &b.r, b.c)));
    report.fit();
    if report.regression.is_none() {
        report.warnings.push("no row has a nonzero magnitude; regression skipped".into());
    }
    Ok(report)
}

fn row(datum: &JacobiDatum, c: u64, disc: u64, magnitude: f64, abs_error: f64, bound: f64) -> SweepRow {
    SweepRow { n: datum.n, r: datum.r.clone(), c, discriminant: disc, magnitude, abs_error, bound, ratio: magnitude / bound }
}
