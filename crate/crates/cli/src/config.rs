//! Configuration resolution: flags, optional TOML file, built-in defaults.
//!
//! A config file is flat TOML: an optional top-level `command` and
//! `output-dir`, plus one table per command holding that command's
//! parameters under the same kebab-case names as the flags. Values given on
//! the command line override file values field by field; built-in defaults
//! fill whatever remains. Unknown keys — top-level or inside a section —
//! are rejected with the offending key named.
//!
//! [`dump`] writes the fully resolved configuration back to TOML. Parsing a
//! dump resolves to the identical configuration, so a dumped file re-dumps
//! byte-identically and reruns reproduce the original artifacts exactly.
//! Parameters whose defaults are derived at run time (for example a horizon
//! sized from the computed rattling coefficient) stay absent in the dump;
//! the derivation itself is deterministic.

use std::fs;
use std::path::{Path, PathBuf};

use rattling::lattice2d::LatticeKind;
use toml::value::{Table, Value};

use crate::output;
use crate::CliError;

/// Names of all config-file sections, in dispatch order.
const COMMANDS: &[&str] = &[
    "solve-a",
    "green",
    "verify",
    "simulate1d",
    "simulate2d",
    "slowfast",
    "transverse",
    "relay",
    "analyze",
    "reproduce",
];

/// A value that can cross the TOML boundary in both directions.
trait TomlScalar: Sized {
    fn from_toml(value: &Value, key: &str, section: &str) -> Result<Self, CliError>;
    fn to_toml(&self) -> Value;
}

impl TomlScalar for f64 {
    fn from_toml(value: &Value, key: &str, section: &str) -> Result<Self, CliError> {
        match value {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(CliError::Usage(format!(
                "key `{key}` in section [{section}] must be a number"
            ))),
        }
    }

    fn to_toml(&self) -> Value {
        Value::Float(*self)
    }
}

impl TomlScalar for usize {
    fn from_toml(value: &Value, key: &str, section: &str) -> Result<Self, CliError> {
        match value {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            _ => Err(CliError::Usage(format!(
                "key `{key}` in section [{section}] must be a non-negative integer"
            ))),
        }
    }

    fn to_toml(&self) -> Value {
        Value::Integer(*self as i64)
    }
}

impl TomlScalar for i64 {
    fn from_toml(value: &Value, key: &str, section: &str) -> Result<Self, CliError> {
        match value {
            Value::Integer(i) => Ok(*i),
            _ => Err(CliError::Usage(format!(
                "key `{key}` in section [{section}] must be an integer"
            ))),
        }
    }

    fn to_toml(&self) -> Value {
        Value::Integer(*self)
    }
}

impl TomlScalar for String {
    fn from_toml(value: &Value, key: &str, section: &str) -> Result<Self, CliError> {
        match value {
            Value::String(s) => Ok(s.clone()),
            _ => Err(CliError::Usage(format!(
                "key `{key}` in section [{section}] must be a string"
            ))),
        }
    }

    fn to_toml(&self) -> Value {
        Value::String(self.clone())
    }
}

impl TomlScalar for Vec<f64> {
    fn from_toml(value: &Value, key: &str, section: &str) -> Result<Self, CliError> {
        match value {
            Value::Array(items) => items
                .iter()
                .map(|v| f64::from_toml(v, key, section))
                .collect(),
            _ => Err(CliError::Usage(format!(
                "key `{key}` in section [{section}] must be an array of numbers"
            ))),
        }
    }

    fn to_toml(&self) -> Value {
        Value::Array(self.iter().map(|v| Value::Float(*v)).collect())
    }
}

fn check_keys(table: &Table, allowed: &[&str], section: &str) -> Result<(), CliError> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown key `{key}` in section [{section}] (expected one of: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn get<T: TomlScalar>(table: &Table, key: &str, section: &str) -> Result<Option<T>, CliError> {
    table.get(key).map(|v| T::from_toml(v, key, section)).transpose()
}

/// Defines one config-file section: a struct of optional fields with TOML
/// parsing, deterministic dumping, and field-wise fallback merging.
macro_rules! section {
    ($name:ident, $section:literal { $($field:ident : $ty:ty = $key:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Default, PartialEq)]
        pub struct $name {
            $(pub $field: Option<$ty>,)+
        }

        impl $name {
            const KEYS: &'static [&'static str] = &[$($key),+];

            fn from_table(table: &Table) -> Result<Self, CliError> {
                check_keys(table, Self::KEYS, $section)?;
                Ok(Self {
                    $($field: get(table, $key, $section)?,)+
                })
            }

            /// Render the present fields as `key = value` lines in declared
            /// key order.
            fn dump_lines(&self) -> String {
                let mut out = String::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push_str(&format!("{} = {}\n", $key, v.to_toml()));
                    }
                )+
                out
            }

            /// Keep own values, filling gaps from `fallback`.
            fn or(self, fallback: Self) -> Self {
                Self {
                    $($field: self.$field.or(fallback.$field),)+
                }
            }
        }
    };
}

section!(SolveASection, "solve-a" {
    c: f64 = "c",
    h1: f64 = "h1",
});

section!(GreenSection, "green" {
    t: Vec<f64> = "t",
    n_max: usize = "n-max",
});

section!(VerifySection, "verify" {
    c: f64 = "c",
    h1: f64 = "h1",
    h_m1: f64 = "h-m1",
    n0: usize = "n0",
    e_bound: f64 = "e-bound",
    n: usize = "n",
    t_end: f64 = "t-end",
});

section!(Simulate1dSection, "simulate1d" {
    c: f64 = "c",
    h1: f64 = "h1",
    h_m1: f64 = "h-m1",
    n: usize = "n",
    t_end: f64 = "t-end",
    snapshots: usize = "snapshots",
});

section!(Simulate2dSection, "simulate2d" {
    c: f64 = "c",
    h1: f64 = "h1",
    h_m1: f64 = "h-m1",
    kind: String = "kind",
    radius: usize = "radius",
    t_end: f64 = "t-end",
    map_time: f64 = "map-time",
});

section!(SlowfastSection, "slowfast" {
    delta: f64 = "delta",
    c: f64 = "c",
    l: f64 = "l",
    dx: f64 = "dx",
    t_end: f64 = "t-end",
    nonlinearity: String = "nonlinearity",
    v0: f64 = "v0",
    perturb: f64 = "perturb",
    snapshots: Vec<f64> = "snapshots",
    defect_tol: f64 = "defect-tol",
});

section!(TransverseSection, "transverse" {
    phi: String = "phi",
    bbar: f64 = "bbar",
    alpha: f64 = "alpha",
    beta: f64 = "beta",
    h1: f64 = "h1",
    h_m1: f64 = "h-m1",
    t_end: f64 = "t-end",
    cells: usize = "cells",
    steps: usize = "steps",
    tol_fp: f64 = "tol-fp",
    max_iter: usize = "max-iter",
});

section!(RelaySection, "relay" {
    input: String = "input",
    beta: f64 = "beta",
    alpha: f64 = "alpha",
    xi0: i64 = "xi0",
    variant: String = "variant",
});

section!(AnalyzeSection, "analyze" {
    records: String = "records",
    h1: f64 = "h1",
    h_m1: f64 = "h-m1",
    tail_start: i64 = "tail-start",
    j_min: usize = "j-min",
    j_max: usize = "j-max",
    a_hint: f64 = "a-hint",
});

section!(ReproduceSection, "reproduce" {
    figure: String = "figure",
});

/// One section of any command, as parsed from the command line.
pub enum AnySection {
    SolveA(SolveASection),
    Green(GreenSection),
    Verify(VerifySection),
    Simulate1d(Simulate1dSection),
    Simulate2d(Simulate2dSection),
    Slowfast(SlowfastSection),
    Transverse(TransverseSection),
    Relay(RelaySection),
    Analyze(AnalyzeSection),
    Reproduce(ReproduceSection),
}

/// A parsed config file: optional command and output directory, plus one
/// optional section per command.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub output_dir: Option<String>,
    pub solve_a: SolveASection,
    pub green: GreenSection,
    pub verify: VerifySection,
    pub simulate1d: Simulate1dSection,
    pub simulate2d: Simulate2dSection,
    pub slowfast: SlowfastSection,
    pub transverse: TransverseSection,
    pub relay: RelaySection,
    pub analyze: AnalyzeSection,
    pub reproduce: ReproduceSection,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Io(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let root: Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("config file is not valid TOML: {e}")))?;
        let mut cfg = ConfigFile::default();
        for (key, value) in &root {
            match key.as_str() {
                "command" => {
                    let name = String::from_toml(value, "command", "top level")?;
                    if !COMMANDS.contains(&name.as_str()) {
                        return Err(CliError::Usage(format!(
                            "unknown command `{name}` in the config file (expected one of: {})",
                            COMMANDS.join(", ")
                        )));
                    }
                    cfg.command = Some(name);
                }
                "output-dir" => {
                    cfg.output_dir = Some(String::from_toml(value, "output-dir", "top level")?);
                }
                name if COMMANDS.contains(&name) => {
                    let table = value.as_table().ok_or_else(|| {
                        CliError::Usage(format!("`[{name}]` in the config file must be a table"))
                    })?;
                    match name {
                        "solve-a" => cfg.solve_a = SolveASection::from_table(table)?,
                        "green" => cfg.green = GreenSection::from_table(table)?,
                        "verify" => cfg.verify = VerifySection::from_table(table)?,
                        "simulate1d" => cfg.simulate1d = Simulate1dSection::from_table(table)?,
                        "simulate2d" => cfg.simulate2d = Simulate2dSection::from_table(table)?,
                        "slowfast" => cfg.slowfast = SlowfastSection::from_table(table)?,
                        "transverse" => cfg.transverse = TransverseSection::from_table(table)?,
                        "relay" => cfg.relay = RelaySection::from_table(table)?,
                        "analyze" => cfg.analyze = AnalyzeSection::from_table(table)?,
                        "reproduce" => cfg.reproduce = ReproduceSection::from_table(table)?,
                        _ => unreachable!(),
                    }
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown top-level key `{other}` in the config file (expected `command`, \
                         `output-dir`, or a command section)"
                    )));
                }
            }
        }
        Ok(cfg)
    }
}

/// Relay response variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayVariant {
    Relay,
    Alt,
}

impl RelayVariant {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "relay" => Ok(RelayVariant::Relay),
            "alt" => Ok(RelayVariant::Alt),
            other => Err(CliError::Usage(format!(
                "unknown relay variant `{other}` (expected relay or alt)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelayVariant::Relay => "relay",
            RelayVariant::Alt => "alt",
        }
    }
}

/// Fast-variable nonlinearity for the slow-fast system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Cubic,
    ReflectedCubic,
}

impl Nonlinearity {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "cubic" => Ok(Nonlinearity::Cubic),
            "reflected-cubic" => Ok(Nonlinearity::ReflectedCubic),
            other => Err(CliError::Usage(format!(
                "unknown nonlinearity `{other}` (expected cubic or reflected-cubic)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::Cubic => "cubic",
            Nonlinearity::ReflectedCubic => "reflected-cubic",
        }
    }
}

/// A bundled figure recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig7,
    Fig8,
    Fig9,
    Fig10,
}

impl Figure {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "fig7" => Ok(Figure::Fig7),
            "fig8" => Ok(Figure::Fig8),
            "fig9" => Ok(Figure::Fig9),
            "fig10" => Ok(Figure::Fig10),
            other => Err(CliError::Usage(format!(
                "unknown figure `{other}` (expected fig7, fig8, fig9, or fig10)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
            Figure::Fig10 => "fig10",
        }
    }
}

fn parse_kind(s: &str) -> Result<LatticeKind, CliError> {
    match s {
        "square" => Ok(LatticeKind::Square),
        "triangular" => Ok(LatticeKind::Triangular),
        other => Err(CliError::Usage(format!(
            "unknown lattice kind `{other}` (expected square or triangular)"
        ))),
    }
}

pub fn kind_name(kind: LatticeKind) -> &'static str {
    match kind {
        LatticeKind::Square => "square",
        LatticeKind::Triangular => "triangular",
    }
}

/// A fully resolved run: typed command parameters plus the output directory.
#[derive(Debug)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub command: CommandConfig,
}

/// Typed parameters for one command. Optional fields keep run-time-derived
/// defaults (horizons sized from computed coefficients, data-driven
/// windows); everything else is concrete after resolution.
#[derive(Debug)]
pub enum CommandConfig {
    SolveA {
        c: f64,
        h1: f64,
    },
    Green {
        t: Vec<f64>,
        n_max: usize,
    },
    Verify {
        c: f64,
        h1: f64,
        h_m1: f64,
        n0: usize,
        e_bound: f64,
        n: Option<usize>,
        t_end: Option<f64>,
    },
    Simulate1d {
        c: f64,
        h1: f64,
        h_m1: f64,
        n: usize,
        t_end: f64,
        snapshots: Option<usize>,
    },
    Simulate2d {
        c: f64,
        h1: f64,
        h_m1: f64,
        kind: LatticeKind,
        radius: u32,
        t_end: f64,
        map_time: Option<f64>,
    },
    Slowfast {
        delta: f64,
        c: f64,
        l: f64,
        dx: f64,
        t_end: f64,
        nonlinearity: Nonlinearity,
        v0: Option<f64>,
        perturb: Option<f64>,
        snapshots: Option<Vec<f64>>,
        defect_tol: f64,
    },
    Transverse {
        phi: PathBuf,
        bbar: f64,
        alpha: f64,
        beta: f64,
        h1: f64,
        h_m1: f64,
        t_end: f64,
        cells: usize,
        steps: Option<usize>,
        tol_fp: f64,
        max_iter: usize,
    },
    Relay {
        input: PathBuf,
        beta: f64,
        alpha: Option<f64>,
        xi0: i8,
        variant: RelayVariant,
    },
    Analyze {
        records: PathBuf,
        h1: f64,
        h_m1: f64,
        tail_start: i64,
        j_min: Option<usize>,
        j_max: Option<usize>,
        a_hint: Option<f64>,
    },
    Reproduce {
        figure: Figure,
    },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::SolveA { .. } => "solve-a",
            CommandConfig::Green { .. } => "green",
            CommandConfig::Verify { .. } => "verify",
            CommandConfig::Simulate1d { .. } => "simulate1d",
            CommandConfig::Simulate2d { .. } => "simulate2d",
            CommandConfig::Slowfast { .. } => "slowfast",
            CommandConfig::Transverse { .. } => "transverse",
            CommandConfig::Relay { .. } => "relay",
            CommandConfig::Analyze { .. } => "analyze",
            CommandConfig::Reproduce { .. } => "reproduce",
        }
    }
}

fn req<T>(value: Option<T>, cmd: &str, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Usage(format!(
            "missing required parameter `{key}` for `{cmd}` (pass --{key} or set `{key}` \
             in the [{cmd}] section of the config file)"
        ))
    })
}

/// Merge command-line values over file values and fill defaults, producing
/// the resolved run configuration.
pub fn resolve(
    cli_parts: Option<(&'static str, AnySection)>,
    output_dir_flag: Option<PathBuf>,
    file: ConfigFile,
) -> Result<RunConfig, CliError> {
    let (name, cli_section) = match cli_parts {
        Some((name, section)) => (name.to_string(), Some(section)),
        None => {
            let name = file.command.clone().ok_or_else(|| {
                CliError::Usage(
                    "no command given: pass a subcommand or set `command` in the config file"
                        .to_string(),
                )
            })?;
            (name, None)
        }
    };

    let output_dir = output_dir_flag
        .or_else(|| std::env::var("RATTLING_OUTPUT_DIR").ok().map(PathBuf::from))
        .or_else(|| file.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let command = match name.as_str() {
        "solve-a" => {
            let cli_s = match cli_section {
                Some(AnySection::SolveA(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.solve_a);
            CommandConfig::SolveA {
                c: req(s.c, "solve-a", "c")?,
                h1: req(s.h1, "solve-a", "h1")?,
            }
        }
        "green" => {
            let cli_s = match cli_section {
                Some(AnySection::Green(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.green);
            CommandConfig::Green {
                t: req(s.t, "green", "t")?,
                n_max: s.n_max.unwrap_or(50),
            }
        }
        "verify" => {
            let cli_s = match cli_section {
                Some(AnySection::Verify(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.verify);
            CommandConfig::Verify {
                c: req(s.c, "verify", "c")?,
                h1: req(s.h1, "verify", "h1")?,
                h_m1: s.h_m1.unwrap_or(0.0),
                n0: req(s.n0, "verify", "n0")?,
                e_bound: s.e_bound.unwrap_or(1.0),
                n: s.n,
                t_end: s.t_end,
            }
        }
        "simulate1d" => {
            let cli_s = match cli_section {
                Some(AnySection::Simulate1d(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.simulate1d);
            CommandConfig::Simulate1d {
                c: req(s.c, "simulate1d", "c")?,
                h1: req(s.h1, "simulate1d", "h1")?,
                h_m1: s.h_m1.unwrap_or(0.0),
                n: req(s.n, "simulate1d", "n")?,
                t_end: req(s.t_end, "simulate1d", "t-end")?,
                snapshots: s.snapshots,
            }
        }
        "simulate2d" => {
            let cli_s = match cli_section {
                Some(AnySection::Simulate2d(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.simulate2d);
            let radius = req(s.radius, "simulate2d", "radius")?;
            let radius = u32::try_from(radius).map_err(|_| {
                CliError::Usage(format!("radius {radius} is out of range"))
            })?;
            CommandConfig::Simulate2d {
                c: req(s.c, "simulate2d", "c")?,
                h1: req(s.h1, "simulate2d", "h1")?,
                h_m1: s.h_m1.unwrap_or(0.0),
                kind: parse_kind(&req(s.kind, "simulate2d", "kind")?)?,
                radius,
                t_end: req(s.t_end, "simulate2d", "t-end")?,
                map_time: s.map_time,
            }
        }
        "slowfast" => {
            let cli_s = match cli_section {
                Some(AnySection::Slowfast(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.slowfast);
            CommandConfig::Slowfast {
                delta: req(s.delta, "slowfast", "delta")?,
                c: req(s.c, "slowfast", "c")?,
                l: req(s.l, "slowfast", "l")?,
                dx: req(s.dx, "slowfast", "dx")?,
                t_end: req(s.t_end, "slowfast", "t-end")?,
                nonlinearity: match s.nonlinearity {
                    Some(name) => Nonlinearity::parse(&name)?,
                    None => Nonlinearity::Cubic,
                },
                v0: s.v0,
                perturb: s.perturb,
                snapshots: s.snapshots,
                defect_tol: s.defect_tol.unwrap_or(1e-2),
            }
        }
        "transverse" => {
            let cli_s = match cli_section {
                Some(AnySection::Transverse(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.transverse);
            CommandConfig::Transverse {
                phi: PathBuf::from(req(s.phi, "transverse", "phi")?),
                bbar: req(s.bbar, "transverse", "bbar")?,
                alpha: req(s.alpha, "transverse", "alpha")?,
                beta: req(s.beta, "transverse", "beta")?,
                h1: req(s.h1, "transverse", "h1")?,
                h_m1: req(s.h_m1, "transverse", "h-m1")?,
                t_end: req(s.t_end, "transverse", "t-end")?,
                cells: s.cells.unwrap_or(2000),
                steps: s.steps,
                tol_fp: s.tol_fp.unwrap_or(1e-6),
                max_iter: s.max_iter.unwrap_or(60),
            }
        }
        "relay" => {
            let cli_s = match cli_section {
                Some(AnySection::Relay(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.relay);
            let xi0 = s.xi0.unwrap_or(1);
            if xi0 != 1 && xi0 != -1 {
                return Err(CliError::Usage(format!(
                    "xi0 must be 1 or -1, got {xi0}"
                )));
            }
            CommandConfig::Relay {
                input: PathBuf::from(req(s.input, "relay", "input")?),
                beta: req(s.beta, "relay", "beta")?,
                alpha: s.alpha,
                xi0: xi0 as i8,
                variant: match s.variant {
                    Some(name) => RelayVariant::parse(&name)?,
                    None => RelayVariant::Relay,
                },
            }
        }
        "analyze" => {
            let cli_s = match cli_section {
                Some(AnySection::Analyze(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.analyze);
            CommandConfig::Analyze {
                records: PathBuf::from(req(s.records, "analyze", "records")?),
                h1: req(s.h1, "analyze", "h1")?,
                h_m1: req(s.h_m1, "analyze", "h-m1")?,
                tail_start: s.tail_start.unwrap_or(10),
                j_min: s.j_min,
                j_max: s.j_max,
                a_hint: s.a_hint,
            }
        }
        "reproduce" => {
            let cli_s = match cli_section {
                Some(AnySection::Reproduce(s)) => s,
                None => Default::default(),
                _ => unreachable!(),
            };
            let s = cli_s.or(file.reproduce);
            CommandConfig::Reproduce {
                figure: Figure::parse(&req(s.figure, "reproduce", "figure")?)?,
            }
        }
        other => {
            return Err(CliError::Usage(format!("unknown command `{other}`")));
        }
    };

    Ok(RunConfig { output_dir, command })
}

/// Encode a resolved command back into its config-file section.
fn encode(command: &CommandConfig) -> String {
    match command {
        CommandConfig::SolveA { c, h1 } => SolveASection {
            c: Some(*c),
            h1: Some(*h1),
        }
        .dump_lines(),
        CommandConfig::Green { t, n_max } => GreenSection {
            t: Some(t.clone()),
            n_max: Some(*n_max),
        }
        .dump_lines(),
        CommandConfig::Verify {
            c,
            h1,
            h_m1,
            n0,
            e_bound,
            n,
            t_end,
        } => VerifySection {
            c: Some(*c),
            h1: Some(*h1),
            h_m1: Some(*h_m1),
            n0: Some(*n0),
            e_bound: Some(*e_bound),
            n: *n,
            t_end: *t_end,
        }
        .dump_lines(),
        CommandConfig::Simulate1d {
            c,
            h1,
            h_m1,
            n,
            t_end,
            snapshots,
        } => Simulate1dSection {
            c: Some(*c),
            h1: Some(*h1),
            h_m1: Some(*h_m1),
            n: Some(*n),
            t_end: Some(*t_end),
            snapshots: *snapshots,
        }
        .dump_lines(),
        CommandConfig::Simulate2d {
            c,
            h1,
            h_m1,
            kind,
            radius,
            t_end,
            map_time,
        } => Simulate2dSection {
            c: Some(*c),
            h1: Some(*h1),
            h_m1: Some(*h_m1),
            kind: Some(kind_name(*kind).to_string()),
            radius: Some(*radius as usize),
            t_end: Some(*t_end),
            map_time: *map_time,
        }
        .dump_lines(),
        CommandConfig::Slowfast {
            delta,
            c,
            l,
            dx,
            t_end,
            nonlinearity,
            v0,
            perturb,
            snapshots,
            defect_tol,
        } => SlowfastSection {
            delta: Some(*delta),
            c: Some(*c),
            l: Some(*l),
            dx: Some(*dx),
            t_end: Some(*t_end),
            nonlinearity: Some(nonlinearity.name().to_string()),
            v0: *v0,
            perturb: *perturb,
            snapshots: snapshots.clone(),
            defect_tol: Some(*defect_tol),
        }
        .dump_lines(),
        CommandConfig::Transverse {
            phi,
            bbar,
            alpha,
            beta,
            h1,
            h_m1,
            t_end,
            cells,
            steps,
            tol_fp,
            max_iter,
        } => TransverseSection {
            phi: Some(phi.display().to_string()),
            bbar: Some(*bbar),
            alpha: Some(*alpha),
            beta: Some(*beta),
            h1: Some(*h1),
            h_m1: Some(*h_m1),
            t_end: Some(*t_end),
            cells: Some(*cells),
            steps: *steps,
            tol_fp: Some(*tol_fp),
            max_iter: Some(*max_iter),
        }
        .dump_lines(),
        CommandConfig::Relay {
            input,
            beta,
            alpha,
            xi0,
            variant,
        } => RelaySection {
            input: Some(input.display().to_string()),
            beta: Some(*beta),
            alpha: *alpha,
            xi0: Some(*xi0 as i64),
            variant: Some(variant.name().to_string()),
        }
        .dump_lines(),
        CommandConfig::Analyze {
            records,
            h1,
            h_m1,
            tail_start,
            j_min,
            j_max,
            a_hint,
        } => AnalyzeSection {
            records: Some(records.display().to_string()),
            h1: Some(*h1),
            h_m1: Some(*h_m1),
            tail_start: Some(*tail_start),
            j_min: *j_min,
            j_max: *j_max,
            a_hint: *a_hint,
        }
        .dump_lines(),
        CommandConfig::Reproduce { figure } => ReproduceSection {
            figure: Some(figure.name().to_string()),
        }
        .dump_lines(),
    }
}

/// Write the resolved configuration as a TOML file that parses back to the
/// same resolution.
pub fn dump(run: &RunConfig, path: &Path) -> Result<(), CliError> {
    let name = run.command.name();
    let mut text = String::new();
    text.push_str(&format!("command = {}\n", Value::String(name.to_string())));
    text.push_str(&format!(
        "output-dir = {}\n",
        Value::String(run.output_dir.display().to_string())
    ));
    text.push('\n');
    text.push_str(&format!("[{name}]\n"));
    text.push_str(&encode(&run.command));
    output::write_atomic_path(path, &text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = ConfigFile::parse("[solve-a]\ncc = 0.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`cc`"), "message should name the key: {msg}");
        assert!(msg.contains("[solve-a]"), "message should name the section: {msg}");
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let err = ConfigFile::parse("commandd = \"green\"\n").unwrap_err();
        assert!(err.to_string().contains("`commandd`"));
    }

    #[test]
    fn flag_values_override_file_values() {
        let file = ConfigFile::parse("[solve-a]\nc = 0.5\nh1 = 2.0\n").unwrap();
        let cli = SolveASection {
            c: None,
            h1: Some(2.5),
        };
        let merged = cli.or(file.solve_a);
        assert_eq!(merged.c, Some(0.5));
        assert_eq!(merged.h1, Some(2.5));
    }

    #[test]
    fn integer_literals_are_accepted_for_floats() {
        let file = ConfigFile::parse("[solve-a]\nc = 1\nh1 = 3\n").unwrap();
        assert_eq!(file.solve_a.c, Some(1.0));
        assert_eq!(file.solve_a.h1, Some(3.0));
    }

    #[test]
    fn missing_required_parameter_names_flag_and_section() {
        let err = resolve(
            Some(("solve-a", AnySection::SolveA(Default::default()))),
            Some(PathBuf::from(".")),
            ConfigFile::default(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("--c") && msg.contains("[solve-a]"), "{msg}");
    }
}
