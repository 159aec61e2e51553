//! Parameter sweeps over temperature, field and pressure.
//!
//! Every row carries the closed-form coherence next to the exact
//! diagonalization value, and a sweep fails if the two ever disagree by
//! more than [`ORACLE_TOLERANCE`].

use std::fs::File;
use std::io::Read;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{coherence, oracle_coherence, partition_function};
use crate::quantum::{build_hamiltonian, classify_ground_state, Basis, DimerParams};
use crate::table::{Metadata, SweepTable};

pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Exact header required on pressure table CSV files.
pub const PRESSURE_HEADER: [&str; 2] = ["P_GPa", "J_kelvin"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Temperature,
    /// Field along z, coherence in the parallel (S_z) basis.
    FieldLongitudinal,
    /// Field along z, coherence in the perpendicular (S_x) basis.
    FieldTransverse,
    Pressure,
}

/// Inclusive, evenly spaced grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidParameter(format!(
                "range requires min < max, got [{min}, {max}]"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "range requires at least 2 steps, got {steps}"
            )));
        }
        Ok(GridRange { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * i as f64 / last
                }
            })
            .collect()
    }
}

/// Exchange constant versus hydrostatic pressure, interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureTable {
    pub source: String,
    rows: Vec<(f64, f64)>,
}

impl PressureTable {
    pub fn new(source: impl Into<String>, rows: Vec<(f64, f64)>) -> Result<Self> {
        let source = source.into();
        if rows.len() < 2 {
            return Err(Error::parse(
                &source,
                format!("{} rows, at least 2 required", rows.len()),
            ));
        }
        for (i, &(p, j)) in rows.iter().enumerate() {
            if !(p.is_finite() && j.is_finite()) {
                return Err(Error::parse(&source, format!("row {}: non-finite value", i + 1)));
            }
            if i > 0 && p <= rows[i - 1].0 {
                return Err(Error::parse(
                    &source,
                    format!("row {}: pressures not increasing", i + 1),
                ));
            }
        }
        Ok(PressureTable { source, rows })
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn range(&self) -> (f64, f64) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].0)
    }

    /// Pressures where the interpolated J changes sign.
    pub fn zero_crossings(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .filter_map(|w| {
                let ((p0, j0), (p1, j1)) = (w[0], w[1]);
                if j0 == 0.0 {
                    Some(p0)
                } else if j0 * j1 < 0.0 {
                    Some(p0 - j0 * (p1 - p0) / (j1 - j0))
                } else {
                    None
                }
            })
            .collect()
    }
}

pub fn read_pressure_table<R: Read>(input: R, source: &str) -> Result<PressureTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::parse(source, format!("header: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != PRESSURE_HEADER {
        return Err(Error::parse(source, "malformed header, expected \"P_GPa,J_kelvin\""));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(source, format!("row {}: {e}", i + 1)))?;
        let parse = |k: usize| -> Result<f64> {
            let field = record.get(k).unwrap_or("");
            field
                .parse()
                .map_err(|_| Error::parse(source, format!("row {}: cannot parse {field:?} as a number", i + 1)))
        };
        rows.push((parse(0)?, parse(1)?));
    }
    PressureTable::new(source, rows)
}

pub fn load_pressure_table(path: &Path) -> Result<PressureTable> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_pressure_table(file, &path.display().to_string())
}

/// Piecewise-linear J/k_B at `pressure`; exact at the nodes.
pub fn pressure_to_j(table: &PressureTable, pressure: f64) -> Result<f64> {
    let (min, max) = table.range();
    if !(pressure >= min && pressure <= max) {
        return Err(Error::Extrapolation { pressure, min, max });
    }
    let rows = table.rows();
    let k = rows.partition_point(|&(p, _)| p < pressure);
    if k < rows.len() && rows[k].0 == pressure {
        return Ok(rows[k].1);
    }
    let (p0, j0) = rows[k - 1];
    let (p1, j1) = rows[k];
    let t = (pressure - p0) / (p1 - p0);
    Ok(j0 + t * (j1 - j0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Kelvin, tesla or GPa depending on `variable`.
    pub range: GridRange,
    pub fixed: DimerParams,
    /// Reference basis for temperature and pressure sweeps; field sweeps
    /// take theirs from the variable.
    pub basis: Basis,
    /// Required for pressure sweeps.
    pub pressure_table: Option<PressureTable>,
    /// Temperature grid crossed with each pressure; the fixed temperature
    /// alone when absent.
    pub temperatures: Option<GridRange>,
}

impl SweepSpec {
    pub fn effective_basis(&self) -> Basis {
        match self.variable {
            SweepVariable::FieldLongitudinal => Basis::Sz,
            SweepVariable::FieldTransverse => Basis::Sx,
            _ => self.basis,
        }
    }
}

/// Leading `pressure_gpa` column, present only in pressure sweeps.
pub const PRESSURE_COLUMN: &str = "pressure_gpa";

pub const SWEEP_COLUMNS: [&str; 6] = [
    "j_over_kb",
    "temperature_k",
    "b_tesla",
    "coherence",
    "coherence_oracle",
    "partition_function",
];

pub const SWEEP_TEXT_COLUMNS: [&str; 2] = ["ground_state", "regime"];

fn regime(j_over_kb: f64) -> &'static str {
    if j_over_kb < 0.0 {
        "antiferromagnetic"
    } else if j_over_kb > 0.0 {
        "ferromagnetic"
    } else {
        "uncoupled"
    }
}

struct GridPoint {
    pressure: Option<f64>,
    params: DimerParams,
}

fn evaluate(point: &GridPoint, basis: Basis) -> Result<(Vec<f64>, Vec<String>)> {
    let p = &point.params;
    let closed = coherence(p, basis).value;
    let oracle = oracle_coherence(p, basis)?.value;
    let gap = (closed - oracle).abs();
    if gap.is_nan() || gap >= ORACLE_TOLERANCE {
        return Err(Error::OracleMismatch {
            closed_form: closed,
            oracle,
            context: format!(
                "J/k_B = {}, T = {}, B = {}, basis {basis}",
                p.j_over_kb(),
                p.temperature(),
                p.b_field()
            ),
        });
    }
    let z = partition_function(p)?;
    let ground = classify_ground_state(&build_hamiltonian(p));
    let mut values = Vec::with_capacity(SWEEP_COLUMNS.len() + 1);
    values.extend(point.pressure);
    values.extend([p.j_over_kb(), p.temperature(), p.b_field(), closed, oracle, z]);
    Ok((
        values,
        vec![ground.label().to_string(), regime(p.j_over_kb()).to_string()],
    ))
}

fn grid(spec: &SweepSpec) -> Result<Vec<GridPoint>> {
    let fixed = spec.fixed;
    let values = spec.range.values();
    let simple = |params: Result<DimerParams>| params.map(|params| GridPoint { pressure: None, params });
    match spec.variable {
        SweepVariable::Temperature => values.iter().map(|&t| simple(fixed.with_temperature(t))).collect(),
        SweepVariable::FieldLongitudinal | SweepVariable::FieldTransverse => {
            values.iter().map(|&b| simple(fixed.with_field(b))).collect()
        }
        SweepVariable::Pressure => {
            let table = spec
                .pressure_table
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("pressure sweep requires a pressure table".into()))?;
            let temps = spec
                .temperatures
                .map(|r| r.values())
                .unwrap_or_else(|| vec![fixed.temperature()]);
            let mut points = Vec::with_capacity(values.len() * temps.len());
            for &pressure in &values {
                let j = pressure_to_j(table, pressure)?;
                for &t in &temps {
                    points.push(GridPoint {
                        pressure: Some(pressure),
                        params: DimerParams::new(j, fixed.g(), t, fixed.b_field())?,
                    });
                }
            }
            Ok(points)
        }
    }
}

fn describe(spec: &SweepSpec) -> Vec<(String, String)> {
    let mut params = vec![
        ("variable".to_string(), format!("{:?}", spec.variable)),
        (
            "range".to_string(),
            format!("{}..{} x{}", spec.range.min, spec.range.max, spec.range.steps),
        ),
        ("basis".to_string(), spec.effective_basis().to_string()),
        ("j_over_kb".to_string(), spec.fixed.j_over_kb().to_string()),
        ("g".to_string(), spec.fixed.g().to_string()),
        ("temperature_k".to_string(), spec.fixed.temperature().to_string()),
        ("b_tesla".to_string(), spec.fixed.b_field().to_string()),
    ];
    if let Some(t) = &spec.temperatures {
        params.push(("temperatures".to_string(), format!("{}..{} x{}", t.min, t.max, t.steps)));
    }
    if let Some(table) = &spec.pressure_table {
        params.push(("pressure_table".to_string(), table.source.clone()));
    }
    params
}

/// Evaluates the sweep; rows come out in grid order regardless of threading.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let basis = spec.effective_basis();
    let points = grid(spec)?;

    #[cfg(feature = "parallel")]
    let rows: Vec<_> = points.par_iter().map(|p| evaluate(p, basis)).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = points.iter().map(|p| evaluate(p, basis)).collect::<Result<_>>()?;

    let mut columns = Vec::with_capacity(SWEEP_COLUMNS.len() + 1);
    if spec.variable == SweepVariable::Pressure {
        columns.push(PRESSURE_COLUMN.to_string());
    }
    columns.extend(SWEEP_COLUMNS.iter().map(|s| s.to_string()));
    let mut table = SweepTable::new(
        columns,
        SWEEP_TEXT_COLUMNS.iter().map(|s| s.to_string()).collect(),
        Metadata::now(describe(spec)),
    );
    for (values, text) in rows {
        table.push(values, text)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(t: f64, b: f64) -> DimerParams {
        DimerParams::new(-2.86, 2.0, t, b).unwrap()
    }

    fn table() -> PressureTable {
        PressureTable::new("test", vec![(0.0, -2.86), (1.0, -1.5), (2.0, 0.5), (3.0, 1.0)]).unwrap()
    }

    #[test]
    fn grid_range_validation_and_values() {
        assert!(GridRange::new(1.0, 1.0, 5).is_err());
        assert!(GridRange::new(0.0, 1.0, 1).is_err());
        let v = GridRange::new(0.0, 1.0, 5).unwrap().values();
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_linear_between() {
        let t = table();
        for &(p, j) in t.rows() {
            assert_eq!(pressure_to_j(&t, p).unwrap(), j);
        }
        assert_eq!(pressure_to_j(&t, 0.5).unwrap(), 0.5 * (-2.86 + -1.5));
        assert!(matches!(pressure_to_j(&t, 3.5), Err(Error::Extrapolation { .. })));
        assert!(matches!(pressure_to_j(&t, -0.1), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn zero_crossing_interpolates_to_zero() {
        let t = table();
        let crossings = t.zero_crossings();
        assert_eq!(crossings.len(), 1);
        // root of the segment (1, -1.5) -> (2, 0.5)
        assert!((crossings[0] - 1.75).abs() < 1e-15);
        assert!(pressure_to_j(&t, crossings[0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pressure_table_validation() {
        assert!(PressureTable::new("x", vec![(0.0, 1.0)]).is_err());
        assert!(PressureTable::new("x", vec![(1.0, 1.0), (0.5, 1.0)]).is_err());
        let err = read_pressure_table("P,J\n0,1\n1,2\n".as_bytes(), "x").unwrap_err();
        assert!(err.to_string().contains("malformed header"));
        let t = read_pressure_table("# comment\nP_GPa,J_kelvin\n0,-2.86\n2,1.0\n".as_bytes(), "x").unwrap();
        assert_eq!(t.rows().len(), 2);
    }

    #[test]
    fn temperature_sweep_decreases_from_two_kelvin() {
        let spec = SweepSpec {
            variable: SweepVariable::Temperature,
            range: GridRange::new(2.0, 350.0, 100).unwrap(),
            fixed: fixed(1.0, 0.0),
            basis: Basis::Sz,
            pressure_table: None,
            temperatures: None,
        };
        let t = run_sweep(&spec).unwrap();
        let c = t.column("coherence").unwrap();
        assert_eq!(c.len(), 100);
        // c(2 K) = (1 - e^{1.43}) / (3 + e^{1.43})
        assert!((c[0] - 0.442_795_986_701_824_8).abs() < 1e-12);
        assert!(c.windows(2).all(|w| w[1] < w[0]));
        assert!(*c.last().unwrap() < 0.01);
    }

    #[test]
    fn low_temperature_field_sweeps_step_at_critical_field() {
        for (variable, below, above) in [
            (SweepVariable::FieldLongitudinal, 1.0, 0.0),
            (SweepVariable::FieldTransverse, 1.0, 3.0),
        ] {
            let spec = SweepSpec {
                variable,
                range: GridRange::new(0.0, 4.0, 81).unwrap(),
                fixed: fixed(0.05, 0.0),
                basis: Basis::Sz,
                pressure_table: None,
                temperatures: None,
            };
            let t = run_sweep(&spec).unwrap();
            let b = t.column("b_tesla").unwrap();
            let c = t.column("coherence").unwrap();
            for (bi, ci) in b.iter().zip(&c) {
                if *bi < 1.9 {
                    assert!((ci - below).abs() < 1e-3, "B={bi} C={ci}");
                } else if *bi > 2.4 {
                    assert!((ci - above).abs() < 1e-3, "B={bi} C={ci}");
                }
            }
            let gs = t.text_column("ground_state").unwrap();
            assert_eq!(gs[0], "singlet");
            assert_eq!(*gs.last().unwrap(), "polarized");
        }
    }

    #[test]
    fn pressure_sweep_marks_ferromagnetic_rows() {
        let spec = SweepSpec {
            variable: SweepVariable::Pressure,
            range: GridRange::new(0.0, 3.0, 7).unwrap(),
            fixed: fixed(1.0, 0.0),
            basis: Basis::Sz,
            pressure_table: Some(table()),
            temperatures: Some(GridRange::new(1.0, 10.0, 4).unwrap()),
        };
        let t = run_sweep(&spec).unwrap();
        assert_eq!(t.len(), 28);
        let regimes = t.text_column("regime").unwrap();
        let j = t.column("j_over_kb").unwrap();
        for (r, j) in regimes.iter().zip(&j) {
            assert_eq!(*r == "ferromagnetic", *j > 0.0);
        }
        assert!(regimes.contains(&"ferromagnetic"));
    }

    #[test]
    fn pressure_sweep_needs_table_and_range() {
        let mut spec = SweepSpec {
            variable: SweepVariable::Pressure,
            range: GridRange::new(0.0, 4.0, 3).unwrap(),
            fixed: fixed(1.0, 0.0),
            basis: Basis::Sz,
            pressure_table: None,
            temperatures: None,
        };
        assert!(matches!(run_sweep(&spec), Err(Error::InvalidParameter(_))));
        spec.pressure_table = Some(table());
        assert!(matches!(run_sweep(&spec), Err(Error::Extrapolation { .. })));
    }
}
