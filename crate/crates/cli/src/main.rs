//! `spindimer` command-line front end.
//!
//! Exit status: 0 success, 2 usage error, 3 data error, 4 numeric failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spindimer::constants::{self, oersted_to_tesla};
use spindimer::fitting::{coherence_series, fit_bleaney_bowers, load_series, FitOptions, FitResult};
use spindimer::models::{critical_field, SusceptibilityUnit};
use spindimer::sweep::{load_pressure_table, run_sweep, GridRange, SweepSpec, SweepVariable};
use spindimer::table::{Format, SweepTable};
use spindimer::{Basis, DimerParams, Error, ErrorClass};

/// Environment variable naming the directory for output files when `--out` is absent.
const OUT_DIR_ENV: &str = "SPINDIMER_OUT_DIR";

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "spindimer",
    about = "Thermal coherence of spin-1/2 Heisenberg dimers",
    disable_version_flag = true
)]
struct Cli {
    /// Print the version and the pinned physical constants
    #[arg(short = 'V', long)]
    version: bool,

    /// Output format for tables
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv, global = true)]
    format: OutputFormat,

    /// Output file; defaults to $SPINDIMER_OUT_DIR/<name> or stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BasisArg {
    Z,
    X,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Z => Basis::Sz,
            BasisArg::X => Basis::Sx,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FieldUnit {
    Tesla,
    Oe,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChiUnit {
    /// emu/mol (CGS)
    Emu,
    /// m^3/mol (SI)
    Si,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit J/k_B and g to a susceptibility CSV (`T_kelvin,chi`) and tabulate the coherence
    Fit(FitArgs),
    /// Tabulate coherence over temperature, field or pressure
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
    /// Field at which the singlet ground state gives way to |00>
    CriticalField(CriticalArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    csv: PathBuf,
    #[arg(long, value_enum, default_value_t = ChiUnit::Emu)]
    unit: ChiUnit,
    /// Initial J/k_B in kelvin
    #[arg(long, allow_hyphen_values = true, requires = "g0")]
    j0: Option<f64>,
    /// Initial g
    #[arg(long, requires = "j0")]
    g0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    n_moles: f64,
}

#[derive(Args, Debug)]
struct CriticalArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.86)]
    j_kelvin: f64,
    #[arg(long, default_value_t = 2.0)]
    g: f64,
    /// Report the relative deviation from this value in Oe
    #[arg(long)]
    reference_oe: Option<f64>,
}

#[derive(Args, Debug)]
struct DimerArgs {
    /// Exchange constant J/k_B in kelvin (negative: antiferromagnetic)
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.86)]
    j_kelvin: f64,
    #[arg(long, default_value_t = 2.0)]
    g: f64,
    /// Reference basis: z (parallel to the field) or x (perpendicular)
    #[arg(long, value_enum, default_value_t = BasisArg::Z)]
    basis: BasisArg,
    /// Applied field along z in tesla
    #[arg(long, conflicts_with = "b_oe", allow_hyphen_values = true)]
    b_tesla: Option<f64>,
    /// Applied field along z in oersted
    #[arg(long, allow_hyphen_values = true)]
    b_oe: Option<f64>,
}

impl DimerArgs {
    fn field_tesla(&self) -> f64 {
        match (self.b_tesla, self.b_oe) {
            (Some(t), _) => t,
            (None, Some(oe)) => oersted_to_tesla(oe),
            (None, None) => 0.0,
        }
    }

    fn params(&self, temperature: f64) -> spindimer::Result<DimerParams> {
        DimerParams::new(self.j_kelvin, self.g, temperature, self.field_tesla())
    }
}

#[derive(Args, Debug)]
struct TempRange {
    #[arg(long, default_value_t = 2.0)]
    t_min: f64,
    #[arg(long, default_value_t = 350.0)]
    t_max: f64,
    #[arg(long, default_value_t = 100)]
    t_steps: usize,
}

impl TempRange {
    fn grid(&self) -> spindimer::Result<GridRange> {
        GridRange::new(self.t_min, self.t_max, self.t_steps)
    }
}

#[derive(Subcommand, Debug)]
enum SweepKind {
    /// Coherence versus temperature at fixed field
    Temp {
        #[command(flatten)]
        dimer: DimerArgs,
        #[command(flatten)]
        range: TempRange,
    },
    /// Coherence versus field at fixed temperature
    Field {
        #[command(flatten)]
        dimer: DimerArgs,
        #[arg(long, default_value_t = 1.0)]
        t_kelvin: f64,
        #[arg(long, default_value_t = 0.0)]
        b_min: f64,
        #[arg(long, default_value_t = 10.0)]
        b_max: f64,
        #[arg(long, default_value_t = 101)]
        b_steps: usize,
        /// Unit of --b-min/--b-max
        #[arg(long, value_enum, default_value_t = FieldUnit::Tesla)]
        field_unit: FieldUnit,
    },
    /// Coherence versus temperature for a range of pressures, J from a `P_GPa,J_kelvin` table
    Pressure {
        #[command(flatten)]
        dimer: DimerArgs,
        #[command(flatten)]
        range: TempRange,
        #[arg(long)]
        pressure_table: PathBuf,
        /// Defaults to the first table pressure
        #[arg(long)]
        p_min: Option<f64>,
        /// Defaults to the last table pressure
        #[arg(long)]
        p_max: Option<f64>,
        #[arg(long, default_value_t = 5)]
        p_steps: usize,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err.class() {
        ErrorClass::Usage => EXIT_USAGE,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Numeric => EXIT_NUMERIC,
    }
}

fn output_path(out: Option<&Path>, name: &str, format: Format) -> Option<PathBuf> {
    if let Some(path) = out {
        return Some(path.to_path_buf());
    }
    std::env::var_os(OUT_DIR_ENV).map(|dir| Path::new(&dir).join(format!("{name}.{}", format.extension())))
}

fn write_table(table: &SweepTable, cli: &Cli, name: &str) -> spindimer::Result<()> {
    let format = Format::from(cli.format);
    match output_path(cli.out.as_deref(), name, format) {
        Some(path) => spindimer::table::emit(table, format, &path),
        None => {
            let body = table.to_string(format)?;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn sweep_spec(kind: &SweepKind) -> spindimer::Result<(SweepSpec, &'static str)> {
    match kind {
        SweepKind::Temp { dimer, range } => Ok((
            SweepSpec {
                variable: SweepVariable::Temperature,
                range: range.grid()?,
                fixed: dimer.params(range.t_min.max(f64::MIN_POSITIVE))?,
                basis: dimer.basis.into(),
                pressure_table: None,
                temperatures: None,
            },
            "sweep_temperature",
        )),
        SweepKind::Field {
            dimer,
            t_kelvin,
            b_min,
            b_max,
            b_steps,
            field_unit,
        } => {
            let to_tesla = |b: f64| match field_unit {
                FieldUnit::Tesla => b,
                FieldUnit::Oe => oersted_to_tesla(b),
            };
            let (variable, name) = match Basis::from(dimer.basis) {
                Basis::Sz => (SweepVariable::FieldLongitudinal, "sweep_field_z"),
                Basis::Sx => (SweepVariable::FieldTransverse, "sweep_field_x"),
            };
            Ok((
                SweepSpec {
                    variable,
                    range: GridRange::new(to_tesla(*b_min), to_tesla(*b_max), *b_steps)?,
                    fixed: dimer.params(*t_kelvin)?,
                    basis: dimer.basis.into(),
                    pressure_table: None,
                    temperatures: None,
                },
                name,
            ))
        }
        SweepKind::Pressure {
            dimer,
            range,
            pressure_table,
            p_min,
            p_max,
            p_steps,
        } => {
            let table = load_pressure_table(pressure_table)?;
            let (lo, hi) = table.range();
            Ok((
                SweepSpec {
                    variable: SweepVariable::Pressure,
                    range: GridRange::new(p_min.unwrap_or(lo), p_max.unwrap_or(hi), *p_steps)?,
                    fixed: dimer.params(range.t_min.max(f64::MIN_POSITIVE))?,
                    basis: dimer.basis.into(),
                    pressure_table: Some(table),
                    temperatures: Some(range.grid()?),
                },
                "sweep_pressure",
            ))
        }
    }
}

fn print_fit_summary(fit: &FitResult) {
    eprintln!("j_over_kb = {} +/- {} K", fit.j_over_kb, fit.stderr_j);
    eprintln!("g = {} +/- {}", fit.g, fit.stderr_g);
    eprintln!("rss = {:e}", fit.rss);
    eprintln!("iterations = {}", fit.iterations);
    eprintln!("converged = {}", fit.converged);
}

fn run(cli: &Cli) -> spindimer::Result<()> {
    let Some(command) = &cli.command else {
        return Err(Error::InvalidParameter("a subcommand is required (see --help)".into()));
    };
    match command {
        Command::CriticalField(args) => {
            let bc = critical_field(args.j_kelvin, args.g)?;
            if bc.disagreement() >= 1e-9 {
                return Err(Error::OracleMismatch {
                    closed_form: bc.closed_form,
                    oracle: bc.bisection,
                    context: "critical field bisection".into(),
                });
            }
            let deviation = args.reference_oe.map(|r| (bc.oersted() - r) / r);
            match cli.format {
                OutputFormat::Csv => {
                    println!("j_over_kb = {} K", args.j_kelvin);
                    println!("g = {}", args.g);
                    println!("critical_field_tesla = {}", bc.tesla());
                    println!("critical_field_oe = {}", bc.oersted());
                    println!("bisection_tesla = {}", bc.bisection);
                    println!("disagreement_tesla = {:e}", bc.disagreement());
                    if let Some(d) = deviation {
                        println!("relative_deviation = {d:e}");
                    }
                }
                OutputFormat::Json => {
                    let doc = serde_json::json!({
                        "j_over_kb": args.j_kelvin,
                        "g": args.g,
                        "critical_field_tesla": bc.tesla(),
                        "critical_field_oe": bc.oersted(),
                        "bisection_tesla": bc.bisection,
                        "disagreement_tesla": bc.disagreement(),
                        "relative_deviation": deviation,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
            Ok(())
        }
        Command::Fit(args) => {
            let unit = match args.unit {
                ChiUnit::Emu => SusceptibilityUnit::EmuPerMol,
                ChiUnit::Si => SusceptibilityUnit::SiM3PerMol,
            };
            let series = load_series(&args.csv, unit)?;
            let options = FitOptions {
                init: args.j0.zip(args.g0),
                n_moles: args.n_moles,
                ..FitOptions::default()
            };
            let fit = fit_bleaney_bowers(&series, &options)?;
            print_fit_summary(&fit);
            let mut table = coherence_series(&series, &fit)?;
            table
                .metadata
                .parameters
                .push(("stderr_j".into(), fit.stderr_j.to_string()));
            table
                .metadata
                .parameters
                .push(("stderr_g".into(), fit.stderr_g.to_string()));
            table.metadata.parameters.push(("rss".into(), fit.rss.to_string()));
            write_table(&table, cli, "fit_coherence")
        }
        Command::Sweep { kind } => {
            let (spec, name) = sweep_spec(kind)?;
            let table = run_sweep(&spec)?;
            write_table(&table, cli, name)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        println!("spindimer {}", env!("CARGO_PKG_VERSION"));
        println!("{}", constants::describe());
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
