//! Susceptibility ingestion and Bleaney-Bowers least-squares fitting.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    bleaney_bowers_chi, bleaney_bowers_factors, coherence_from_chi, coherence_longitudinal, SusceptibilityPoint,
    SusceptibilityUnit,
};
use crate::quantum::DimerParams;
use crate::table::{Metadata, SweepTable};

/// Minimum number of samples accepted for a two-parameter fit.
pub const MIN_FIT_POINTS: usize = 8;

/// Exact header required on susceptibility CSV files.
pub const SERIES_HEADER: [&str; 2] = ["T_kelvin", "chi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilitySeries {
    pub sample_id: String,
    pub unit: SusceptibilityUnit,
    points: Vec<SusceptibilityPoint>,
}

impl SusceptibilitySeries {
    /// Builds a series from (T, chi) pairs; temperatures must strictly increase.
    pub fn new(sample_id: impl Into<String>, unit: SusceptibilityUnit, samples: &[(f64, f64)]) -> Result<Self> {
        let sample_id = sample_id.into();
        let mut points = Vec::with_capacity(samples.len());
        for (i, &(t, chi)) in samples.iter().enumerate() {
            let point = SusceptibilityPoint::new(t, chi, unit)
                .map_err(|e| Error::parse(&sample_id, format!("row {}: {e}", i + 1)))?;
            if let Some(prev) = points.last().map(|p: &SusceptibilityPoint| p.temperature) {
                if t <= prev {
                    return Err(Error::parse(
                        &sample_id,
                        format!("row {}: temperatures not increasing", i + 1),
                    ));
                }
            }
            points.push(point);
        }
        Ok(SusceptibilitySeries {
            sample_id,
            unit,
            points,
        })
    }

    pub fn points(&self) -> &[SusceptibilityPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Noise-free Bleaney-Bowers samples on the given temperatures.
pub fn synthetic_series(
    j_over_kb: f64,
    g: f64,
    temperatures: &[f64],
    unit: SusceptibilityUnit,
) -> Result<SusceptibilitySeries> {
    let samples = temperatures
        .iter()
        .map(|&t| bleaney_bowers_chi(j_over_kb, g, t, 1.0, unit).map(|p| (t, p.chi)))
        .collect::<Result<Vec<_>>>()?;
    SusceptibilitySeries::new("synthetic", unit, &samples)
}

/// Parses the `T_kelvin,chi` CSV dialect. `#` lines are comments.
pub fn read_series<R: Read>(input: R, sample_id: &str, unit: SusceptibilityUnit) -> Result<SusceptibilitySeries> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::parse(sample_id, format!("header: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != SERIES_HEADER {
        return Err(Error::parse(
            sample_id,
            format!(
                "malformed header {:?}, expected \"T_kelvin,chi\"",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::parse(sample_id, format!("row {row}: {e}")))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::parse(
                sample_id,
                format!("row {row} (line {line}): expected 2 fields, found {}", record.len()),
            ));
        }
        let mut values = [0.0; 2];
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(
                    sample_id,
                    format!("row {row} (line {line}): cannot parse {field:?} as a number"),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    sample_id,
                    format!("row {row} (line {line}): non-finite value {field:?}"),
                ));
            }
            values[k] = v;
        }
        samples.push((values[0], values[1]));
    }
    if samples.len() < MIN_FIT_POINTS {
        return Err(Error::parse(
            sample_id,
            format!("{} rows, at least {MIN_FIT_POINTS} required", samples.len()),
        ));
    }
    SusceptibilitySeries::new(sample_id, unit, &samples)
}

pub fn load_series(path: &Path, unit: SusceptibilityUnit) -> Result<SusceptibilitySeries> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_series(file, &id, unit).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Starting (J/k_B, g); derived from the data when absent.
    pub init: Option<(f64, f64)>,
    /// Moles of dimers the susceptibility refers to.
    pub n_moles: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            init: None,
            n_moles: 1.0,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub j_over_kb: f64,
    pub g: f64,
    /// Residual sum of squares in input units squared.
    pub rss: f64,
    pub stderr_j: f64,
    pub stderr_g: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_moles: f64,
    /// Objective after the initial guess and after every accepted step.
    pub rss_history: Vec<f64>,
}

/// Bleaney-Bowers susceptibility and its partial derivatives in (J, g).
///
/// `amplitude` is n N_A mu_B^2 / k_B in the data's units.
pub fn model_with_jacobian(temperature: f64, j_over_kb: f64, g: f64, amplitude: f64) -> (f64, [f64; 2]) {
    let (f, s) = bleaney_bowers_factors(j_over_kb / temperature);
    let chi = 2.0 * amplitude * g * g / temperature * f;
    (chi, [chi * s / temperature, 2.0 * chi / g])
}

/// Initial J from inverting the correlation of the coldest sample with g = 2.
fn default_init(series: &SusceptibilitySeries, n_moles: f64) -> (f64, f64) {
    let g0 = 2.0;
    let p = series.points()[0];
    let c = 2.0 * p.temperature * p.chi / (n_moles * p.unit.curie_constant() * g0 * g0) - 1.0;
    let c = c.clamp(-1.0 + 1e-9, 1.0 / 3.0 - 1e-3);
    let y = (1.0 - 3.0 * c) / (1.0 + c);
    (-p.temperature * y.ln(), g0)
}

struct Problem<'a> {
    temps: Vec<f64>,
    data: &'a [f64],
    amplitude: f64,
}

impl Problem<'_> {
    /// Residuals (model - data) and Jacobian rows; None when the model is not finite.
    fn evaluate(&self, p: [f64; 2]) -> Option<(Vec<f64>, Vec<[f64; 2]>, f64)> {
        let mut residuals = Vec::with_capacity(self.data.len());
        let mut jac = Vec::with_capacity(self.data.len());
        for (&t, &y) in self.temps.iter().zip(self.data) {
            let (m, d) = model_with_jacobian(t, p[0], p[1], self.amplitude);
            residuals.push(m - y);
            jac.push(d);
        }
        let rss: f64 = residuals.iter().map(|r| r * r).sum();
        rss.is_finite().then_some((residuals, jac, rss))
    }
}

fn normal_equations(residuals: &[f64], jac: &[[f64; 2]]) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut a = [[0.0; 2]; 2];
    let mut grad = [0.0; 2];
    for (r, row) in residuals.iter().zip(jac) {
        for i in 0..2 {
            grad[i] += row[i] * r;
            for j in 0..2 {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    (a, grad)
}

fn is_singular(a: &[[f64; 2]; 2]) -> bool {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    !(a[0][0] > 0.0 && a[1][1] > 0.0 && det > 1e-14 * a[0][0] * a[1][1])
}

fn is_small_step(step: [f64; 2], p: [f64; 2]) -> bool {
    step.iter()
        .zip(p.iter())
        .all(|(d, v)| d.abs() <= 1e-10 * (v.abs() + 1e-8))
}

fn solve2(a: &[[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}

/// Least-squares fit of (J/k_B, g) by Levenberg-Marquardt damped Gauss-Newton.
///
/// Residuals are internally divided by the largest |chi| so the stopping
/// rules do not depend on the susceptibility unit. Stops when the relative
/// parameter step drops below 1e-10, the scaled gradient norm below 1e-12,
/// or no damping level can reduce the objective any further. Every accepted
/// step lowers the objective except a final sub-tolerance step, which may
/// change it at rounding level only.
pub fn fit_bleaney_bowers(series: &SusceptibilitySeries, options: &FitOptions) -> Result<FitResult> {
    if series.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParameter(format!(
            "{} points, at least {MIN_FIT_POINTS} required for a fit",
            series.len()
        )));
    }
    if !(options.n_moles.is_finite() && options.n_moles > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "n_moles must be positive, got {}",
            options.n_moles
        )));
    }
    let scale = series.points().iter().fold(0.0_f64, |m, p| m.max(p.chi.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidParameter("all susceptibilities are zero".into()));
    }
    let data: Vec<f64> = series.points().iter().map(|p| p.chi / scale).collect();
    let problem = Problem {
        temps: series.points().iter().map(|p| p.temperature).collect(),
        data: &data,
        amplitude: options.n_moles * series.unit.curie_constant() / scale,
    };

    let (j0, g0) = options.init.unwrap_or_else(|| default_init(series, options.n_moles));
    DimerParams::new(j0, g0, 1.0, 0.0)?;
    let mut p = [j0, g0];
    let (mut residuals, mut jac, mut rss) = problem
        .evaluate(p)
        .ok_or_else(|| Error::InvalidParameter(format!("model not finite at initial guess ({j0}, {g0})")))?;
    let (a0, _) = normal_equations(&residuals, &jac);
    if is_singular(&a0) {
        return Err(Error::DegenerateFit { j_over_kb: j0, g: g0 });
    }

    let mut history = vec![rss * scale * scale];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let (a, grad) = normal_equations(&residuals, &jac);
        if (grad[0] * grad[0] + grad[1] * grad[1]).sqrt() < 1e-12 {
            converged = true;
            break;
        }
        let mut accepted = None;
        let mut first_attempt = true;
        while lambda < 1e30 {
            let damped = [[a[0][0] * (1.0 + lambda), a[0][1]], [a[1][0], a[1][1] * (1.0 + lambda)]];
            let step = solve2(&damped, [-grad[0], -grad[1]]).ok_or(Error::DegenerateFit {
                j_over_kb: p[0],
                g: p[1],
            })?;
            let candidate = [p[0] + step[0], p[1] + step[1]];
            // Near the optimum the objective is flat to rounding long before the
            // step is, so a tiny lightly damped step is taken without the descent test.
            if first_attempt && is_small_step(step, candidate) && candidate[1] > 0.0 {
                if let Some(eval) = problem.evaluate(candidate) {
                    accepted = Some((candidate, step, eval));
                    break;
                }
            }
            first_attempt = false;
            if candidate[1] > 0.0 {
                if let Some(eval) = problem.evaluate(candidate) {
                    if eval.2 < rss {
                        accepted = Some((candidate, step, eval));
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        let Some((candidate, step, (r, jc, new_rss))) = accepted else {
            // no damping level lowers the objective: stationary to rounding
            converged = true;
            break;
        };
        p = candidate;
        residuals = r;
        jac = jc;
        rss = new_rss;
        history.push(rss * scale * scale);
        lambda = (lambda / 10.0).max(1e-15);
        if is_small_step(step, p) {
            converged = true;
            break;
        }
    }

    let (a, _) = normal_equations(&residuals, &jac);
    let dof = (series.len() - 2) as f64;
    let variance = rss / dof;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let (stderr_j, stderr_g) = if det > 0.0 {
        ((variance * a[1][1] / det).sqrt(), (variance * a[0][0] / det).sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };

    Ok(FitResult {
        j_over_kb: p[0],
        g: p[1],
        rss: rss * scale * scale,
        stderr_j,
        stderr_g,
        iterations,
        converged,
        n_moles: options.n_moles,
        rss_history: history,
    })
}

/// Per-point coherence from the raw data next to the fitted curve.
///
/// Points whose correlation falls outside the physical range are kept and
/// flagged `unphysical` with NaN experimental values.
pub fn coherence_series(series: &SusceptibilitySeries, fit: &FitResult) -> Result<SweepTable> {
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        });
    }
    let metadata = Metadata::now(vec![
        ("sample_id".into(), series.sample_id.clone()),
        ("j_over_kb".into(), fit.j_over_kb.to_string()),
        ("g".into(), fit.g.to_string()),
        ("n_moles".into(), fit.n_moles.to_string()),
    ]);
    let mut table = SweepTable::new(
        vec![
            "temperature_k".into(),
            "c_experimental".into(),
            "c_theoretical".into(),
            "residual".into(),
        ],
        vec!["flag".into()],
        metadata,
    );
    for point in series.points() {
        let params = DimerParams::new(fit.j_over_kb, fit.g, point.temperature, 0.0)?;
        let theory = coherence_longitudinal(&params).value;
        match coherence_from_chi(point, fit.g, fit.n_moles) {
            Ok(c) => table.push(
                vec![point.temperature, c.value, theory, c.value - theory],
                vec![String::new()],
            )?,
            Err(Error::UnphysicalPoint { .. }) => table.push(
                vec![point.temperature, f64::NAN, theory, f64::NAN],
                vec!["unphysical".into()],
            )?,
            Err(e) => return Err(e),
        }
    }
    Ok(table)
}
