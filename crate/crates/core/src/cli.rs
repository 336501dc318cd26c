//! Experiment configs, orchestration and deterministic output.
//!
//! Configs are line-oriented:
//!
//! ```text
//! # comment
//! [domain]
//! kind = disk
//! radius = 1.0
//! nr = 64
//! ntheta = 128
//! ```
//!
//! Sections are `[domain] [physics] [gauge] [bc] [solver] [sweep] [output]`.
//! Unknown sections or keys and repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::boundary::BcKind;
use crate::error::{Error, Result};
use crate::gauge::{PhysicalParams, PotentialSpec};
use crate::geometry::GridKind;
use crate::selfadjoint1d::{interval_spectrum, Interval, IntervalBc, UnitaryBC};
use crate::spectral::{
    convergence_study, flux_sweep, gauge_cross_check, robin_sweep, theta_family, BcSpec, Domain, Method,
    Problem, Spectrum, SweepDiagnostics, SweepResult,
};
use crate::C64;

const SECTIONS: &[(&str, &[&str])] = &[
    ("domain", &["kind", "a", "b", "nx", "ny", "radius", "r_in", "r_out", "nr", "ntheta", "length", "n"]),
    ("physics", &["hbar", "e", "m"]),
    ("gauge", &["kind", "b", "phi", "compare"]),
    ("bc", &["family", "alpha", "beta", "u"]),
    ("solver", &["method", "k", "tol", "seed"]),
    ("sweep", &["parameter", "values", "reference"]),
    ("output", &["directory", "formats"]),
];

/// Boundary condition of a config: a planar family or an interval unitary.
#[derive(Clone, Debug, PartialEq)]
pub enum BcChoice {
    Family(BcSpec),
    Unitary(UnitaryBC),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    Phi,
    Alpha,
    Resolution,
    Theta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub reference: Option<Vec<f64>>,
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: String,
    pub domain: Domain,
    pub params: PhysicalParams,
    pub potential: PotentialSpec,
    /// Second gauge for a covariance check.
    pub compare: Option<PotentialSpec>,
    pub bc: BcChoice,
    pub method: Method,
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub sweep: Option<SweepConfig>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// The planar or interval problem without sweep settings.
    pub fn problem(&self) -> Problem {
        let bc = match &self.bc {
            BcChoice::Family(b) => *b,
            BcChoice::Unitary(_) => BcSpec::dirichlet(),
        };
        Problem {
            params: self.params,
            k: self.k,
            method: self.method,
            tol: self.tol,
            seed: self.seed,
            ..Problem::new(self.domain, self.potential.clone(), bc)
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Raw {
    entries: BTreeMap<(String, String), Entry>,
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn lex(text: &str) -> Result<Raw> {
    let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(name) = l.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line, format!("malformed section header '{l}'")))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(cfg_err(line, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = l
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected 'key = value', got '{l}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section
            .as_deref()
            .ok_or_else(|| cfg_err(line, format!("key '{key}' appears before any section")))?;
        let known = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !known.contains(&key) {
            return Err(cfg_err(line, format!("unknown key '{key}' in [{sec}]")));
        }
        // an empty sweep is allowed and yields header-only tables
        if value.is_empty() && !(sec == "sweep" && key == "values") {
            return Err(cfg_err(line, format!("key '{key}' has no value")));
        }
        let id = (sec.to_string(), key.to_string());
        if let Some(prev) = entries.get(&id) {
            return Err(cfg_err(
                line,
                format!("duplicate key '{key}' in [{sec}] (lines {} and {line})", prev.line),
            ));
        }
        entries.insert(id, Entry { value: value.to_string(), line });
    }
    Ok(Raw { entries })
}

impl Raw {
    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn has_section(&self, sec: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == sec)
    }

    fn line_of(&self, sec: &str) -> usize {
        self.entries
            .iter()
            .filter(|((s, _), _)| s == sec)
            .map(|(_, e)| e.line)
            .min()
            .unwrap_or(0)
    }

    fn str(&self, sec: &str, key: &str) -> Option<(&str, usize)> {
        self.get(sec, key).map(|e| (e.value.as_str(), e.line))
    }

    fn float(&self, sec: &str, key: &str) -> Result<Option<f64>> {
        match self.get(sec, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| cfg_err(e.line, format!("'{key}' must be a finite number, got '{}'", e.value))),
        }
    }

    fn req_float(&self, sec: &str, key: &str) -> Result<f64> {
        self.float(sec, key)?
            .ok_or_else(|| cfg_err(self.line_of(sec), format!("[{sec}] needs '{key}'")))
    }

    fn int(&self, sec: &str, key: &str) -> Result<Option<usize>> {
        match self.get(sec, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| cfg_err(e.line, format!("'{key}' must be a non-negative integer, got '{}'", e.value))),
        }
    }

    fn req_int(&self, sec: &str, key: &str) -> Result<usize> {
        self.int(sec, key)?
            .ok_or_else(|| cfg_err(self.line_of(sec), format!("[{sec}] needs '{key}'")))
    }

    fn list(&self, sec: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(sec, key) {
            None => Ok(None),
            Some(e) if e.value.is_empty() => Ok(Some(Vec::new())),
            Some(e) => e
                .value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| cfg_err(e.line, format!("'{key}' holds a non-numeric entry '{}'", v.trim())))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }
}

fn parse_domain(raw: &Raw) -> Result<Domain> {
    let (kind, line) = raw
        .str("domain", "kind")
        .ok_or_else(|| cfg_err(raw.line_of("domain"), "[domain] needs 'kind'"))?;
    let allowed: &[&str] = match kind {
        "rectangle" => &["kind", "a", "b", "nx", "ny"],
        "disk" => &["kind", "radius", "nr", "ntheta"],
        "annulus" => &["kind", "r_in", "r_out", "nr", "ntheta"],
        "interval" => &["kind", "length", "n"],
        other => return Err(cfg_err(line, format!("unknown domain kind '{other}'"))),
    };
    for ((s, k), e) in &raw.entries {
        if s == "domain" && !allowed.contains(&k.as_str()) {
            return Err(cfg_err(e.line, format!("key '{k}' does not apply to a {kind} domain")));
        }
    }
    let d = match kind {
        "rectangle" => Domain::Grid(GridKind::Rectangle {
            a: raw.req_float("domain", "a")?,
            b: raw.req_float("domain", "b")?,
            nx: raw.req_int("domain", "nx")?,
            ny: raw.req_int("domain", "ny")?,
        }),
        "disk" => Domain::Grid(GridKind::Disk {
            radius: raw.req_float("domain", "radius")?,
            nr: raw.req_int("domain", "nr")?,
            ntheta: raw.req_int("domain", "ntheta")?,
        }),
        "annulus" => Domain::Grid(GridKind::Annulus {
            r_in: raw.req_float("domain", "r_in")?,
            r_out: raw.req_float("domain", "r_out")?,
            nr: raw.req_int("domain", "nr")?,
            ntheta: raw.req_int("domain", "ntheta")?,
        }),
        _ => Domain::Interval {
            length: raw.req_float("domain", "length")?,
            n: raw.req_int("domain", "n")?,
        },
    };
    // shape checks up front, so `check` catches them
    match d {
        Domain::Grid(k) => {
            crate::geometry::build(k).map_err(|e| cfg_err(line, e.to_string()))?;
        }
        Domain::Interval { length, n } => {
            Interval::new(length, n).map_err(|e| cfg_err(line, e.to_string()))?;
        }
    }
    Ok(d)
}

fn gauge_named(name: &str, b: Option<f64>, phi: Option<f64>, line: usize) -> Result<PotentialSpec> {
    let need_b = || b.ok_or_else(|| cfg_err(line, format!("gauge '{name}' needs 'b'")));
    let need_phi = || phi.ok_or_else(|| cfg_err(line, format!("gauge '{name}' needs 'phi'")));
    Ok(match name {
        "zero" => PotentialSpec::Zero,
        "landau" => PotentialSpec::Landau { b: need_b()? },
        "symmetric" => PotentialSpec::Symmetric { b: need_b()? },
        "ab" => PotentialSpec::AharonovBohm { phi: need_phi()? },
        "sum" => PotentialSpec::sum([PotentialSpec::Landau { b: need_b()? }, PotentialSpec::AharonovBohm { phi: need_phi()? }]),
        other => return Err(cfg_err(line, format!("unknown gauge '{other}'"))),
    })
}

fn parse_unitary(text: &str, line: usize) -> Result<UnitaryBC> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| cfg_err(line, format!("'u' holds a non-numeric entry '{}'", x.trim()))))
        .collect::<Result<_>>()?;
    if v.len() != 8 {
        return Err(cfg_err(line, format!("'u' needs 8 numbers (re, im of u11 u12 u21 u22), got {}", v.len())));
    }
    let m = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5]), C64::new(v[6], v[7])],
    );
    UnitaryBC::new(m).map_err(|e| cfg_err(line, e.to_string()))
}

/// Parses and validates a config; defaults are `hbar = e = m = 1`,
/// `tol = 1e-9`, `method = iterative`, `k = 1`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw = lex(text)?;
    let domain = parse_domain(&raw)?;
    let is_interval = matches!(domain, Domain::Interval { .. });
    let is_annulus = matches!(domain, Domain::Grid(GridKind::Annulus { .. }));

    let params = PhysicalParams::new(
        raw.float("physics", "hbar")?.unwrap_or(1.0),
        raw.float("physics", "e")?.unwrap_or(1.0),
        raw.float("physics", "m")?.unwrap_or(1.0),
    )
    .map_err(|e| cfg_err(raw.line_of("physics"), e.to_string()))?;

    let (gkind, gline) = raw.str("gauge", "kind").unwrap_or(("zero", 0));
    let (b, phi) = (raw.float("gauge", "b")?, raw.float("gauge", "phi")?);
    let potential = gauge_named(gkind, b, phi, gline)?;
    if potential.has_aharonov_bohm() && !is_annulus {
        return Err(cfg_err(gline, "AB requires annulus: a flux line must sit inside a hole"));
    }
    if is_interval && potential != PotentialSpec::Zero {
        return Err(cfg_err(gline, "interval experiments take kind = zero in [gauge]"));
    }
    let compare = match raw.str("gauge", "compare") {
        None => None,
        Some((name, line)) => {
            let p = gauge_named(name, b, phi, line)?;
            if p.has_aharonov_bohm() && !is_annulus {
                return Err(cfg_err(line, "AB requires annulus: a flux line must sit inside a hole"));
            }
            if is_interval {
                return Err(cfg_err(line, "gauge comparison needs a planar domain"));
            }
            Some(p)
        }
    };

    let (family, fline) = raw.str("bc", "family").unwrap_or(("dirichlet", 0));
    let alpha = raw.float("bc", "alpha")?;
    let beta = raw.float("bc", "beta")?;
    let bc = match family {
        "dirichlet" => BcChoice::Family(BcSpec::dirichlet()),
        "neumann" => BcChoice::Family(BcSpec::neumann()),
        "robin" => BcChoice::Family(BcSpec::robin(
            alpha.ok_or_else(|| cfg_err(fline, "robin needs 'alpha'"))?,
        )),
        "chiral" => {
            if is_interval {
                return Err(cfg_err(fline, "chiral conditions need a closed boundary curve"));
            }
            BcChoice::Family(BcSpec::chiral(
                alpha.unwrap_or(0.0),
                beta.ok_or_else(|| cfg_err(fline, "chiral needs 'beta'"))?,
            ))
        }
        "unitary" => {
            if !is_interval {
                return Err(cfg_err(fline, "unitary conditions apply to interval domains"));
            }
            let (u, line) = raw.str("bc", "u").ok_or_else(|| cfg_err(fline, "unitary needs 'u'"))?;
            BcChoice::Unitary(parse_unitary(u, line)?)
        }
        other => return Err(cfg_err(fline, format!("unknown boundary family '{other}'"))),
    };
    if let Some(e) = raw.get("bc", "u") {
        if family != "unitary" {
            return Err(cfg_err(e.line, "'u' only applies to family = unitary"));
        }
    }

    let method = match raw.str("solver", "method") {
        None => Method::Iterative,
        Some((m, line)) => m.parse().map_err(|e: Error| cfg_err(line, e.to_string()))?,
    };
    let k = raw.int("solver", "k")?.unwrap_or(1);
    if k == 0 {
        return Err(cfg_err(raw.get("solver", "k").map(|e| e.line).unwrap_or(0), "k must be at least 1"));
    }
    let tol = raw.float("solver", "tol")?.unwrap_or(1e-9);
    if !(tol > 0.0) {
        return Err(cfg_err(raw.get("solver", "tol").map(|e| e.line).unwrap_or(0), "tol must be positive"));
    }
    let seed = match raw.get("solver", "seed") {
        None => Problem::new(domain, PotentialSpec::Zero, BcSpec::dirichlet()).seed,
        Some(e) => e.value.parse().map_err(|_| cfg_err(e.line, "seed must be an unsigned integer"))?,
    };

    let sweep = if raw.has_section("sweep") {
        let (p, pline) = raw
            .str("sweep", "parameter")
            .ok_or_else(|| cfg_err(raw.line_of("sweep"), "[sweep] needs 'parameter'"))?;
        let parameter = match p {
            "phi" => SweepParameter::Phi,
            "alpha" => SweepParameter::Alpha,
            "resolution" => SweepParameter::Resolution,
            "theta" => SweepParameter::Theta,
            other => return Err(cfg_err(pline, format!("unknown sweep parameter '{other}'"))),
        };
        let values = raw.list("sweep", "values")?.unwrap_or_default();
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(cfg_err(raw.get("sweep", "values").map(|e| e.line).unwrap_or(pline), "sweep values must be strictly increasing"));
        }
        let reference = raw.list("sweep", "reference")?;
        match parameter {
            SweepParameter::Phi if !is_annulus => return Err(cfg_err(pline, "AB requires annulus: flux sweeps need an annulus domain")),
            SweepParameter::Alpha if !matches!(bc, BcChoice::Family(BcSpec { kind: BcKind::Robin, .. })) => {
                return Err(cfg_err(pline, "alpha sweeps need family = robin"))
            }
            SweepParameter::Theta if !is_interval => return Err(cfg_err(pline, "theta sweeps need an interval domain")),
            SweepParameter::Resolution => {
                if values.len() < 3 || values.iter().any(|v| v.fract() != 0.0 || *v < 4.0) {
                    return Err(cfg_err(pline, "resolution sweeps need at least three integer resolutions"));
                }
            }
            _ => {}
        }
        if reference.is_some() && parameter != SweepParameter::Resolution {
            return Err(cfg_err(raw.get("sweep", "reference").map(|e| e.line).unwrap_or(pline), "'reference' applies to resolution sweeps"));
        }
        if compare.is_some() {
            return Err(cfg_err(pline, "a gauge comparison cannot be combined with a sweep"));
        }
        Some(SweepConfig { parameter, values, reference })
    } else {
        None
    };
    if is_interval && matches!(bc, BcChoice::Unitary(_)) && sweep.as_ref().is_some_and(|s| s.parameter != SweepParameter::Theta) {
        return Err(cfg_err(fline, "unitary interval conditions only combine with theta sweeps"));
    }

    let output_dir = PathBuf::from(raw.str("output", "directory").map(|s| s.0).unwrap_or("out"));
    if let Some((f, line)) = raw.str("output", "formats") {
        for fmt in f.split(',').map(str::trim) {
            if fmt != "csv" {
                return Err(cfg_err(line, format!("unsupported output format '{fmt}' (only csv)")));
            }
        }
    }

    Ok(ExperimentConfig {
        source: text.to_string(),
        domain,
        params,
        potential,
        compare,
        bc,
        method,
        k,
        tol,
        seed,
        sweep,
        output_dir,
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&fs::read_to_string(path)?)
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // 17 significant digits round-trip every double
            Cell::Float(f) => format!("{f:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `table` through a temporary file and a rename.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    write_atomic(path, &table.render())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub status: Status,
    pub error: Option<String>,
    pub experiment: String,
    pub config: String,
    pub version: String,
    pub grid_hash: Option<u64>,
    pub tol: Option<f64>,
    pub wall_clock: f64,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    fn failed(config: &str, error: String) -> Self {
        Self {
            status: Status::Failed,
            error: Some(error),
            experiment: "none".into(),
            config: config.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            grid_hash: None,
            tol: None,
            wall_clock: 0.0,
            checks: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Passed
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let status = if self.passed() { "passed" } else { "failed" };
        let _ = writeln!(s, "status = {status}");
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error = {}", e.replace('\n', " "));
        }
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "version = {}", self.version);
        if let Some(h) = self.grid_hash {
            let _ = writeln!(s, "grid_hash = {h:016x}");
        }
        if let Some(t) = self.tol {
            let _ = writeln!(s, "tol = {t:.16e}");
        }
        let _ = writeln!(s, "wall_clock_seconds = {:.3}", self.wall_clock);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "check.{} = {} (value {:.16e}, limit {:.16e})",
                c.name,
                if c.passed { "pass" } else { "fail" },
                c.value,
                c.limit
            );
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "artifact = {a}");
        }
        s.push_str("[config]\n");
        for l in self.config.lines() {
            let _ = writeln!(s, "  {l}");
        }
        s
    }
}

pub fn emit_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    write_atomic(path, &manifest.render())
}

struct Outcome {
    experiment: &'static str,
    grid_hash: Option<u64>,
    checks: Vec<Check>,
    tables: Vec<(&'static str, Table)>,
}

fn check(name: &str, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        passed: value <= limit,
        value,
        limit,
    }
}

fn flag(name: &str, ok: bool) -> Check {
    Check {
        name: name.into(),
        passed: ok,
        value: if ok { 0.0 } else { 1.0 },
        limit: 0.0,
    }
}

fn spectrum_rows(table: &mut Table, param: f64, s: &Spectrum) {
    for (i, (l, r)) in s.values.iter().zip(&s.residuals).enumerate() {
        table.push(vec![Cell::Float(param), Cell::Int(i as i64 + 1), Cell::Float(*l), Cell::Float(*r)]);
    }
}

fn eigen_table() -> Table {
    Table::new(&["param_value", "index", "lambda", "residual"])
}

fn spectrum_checks(s: &Spectrum, tol: f64) -> Vec<Check> {
    let worst = s
        .values
        .iter()
        .zip(&s.residuals)
        .map(|(l, r)| r / l.abs().max(1.0))
        .fold(0.0, f64::max);
    vec![check("residual", worst, tol.max(s.residual_floor)), check("imaginary_part", s.max_imag, 1e-9)]
}

fn sweep_tables(r: &SweepResult) -> (Table, Table) {
    let mut e = eigen_table();
    let k = r.spectra.first().map(|s| s.len()).unwrap_or(0);
    let mut header = vec!["param_value".to_string()];
    header.extend((1..=k).map(|i| format!("lambda_{i}")));
    let mut wide = Table {
        header,
        rows: Vec::new(),
    };
    for (v, s) in r.values.iter().zip(&r.spectra) {
        spectrum_rows(&mut e, *v, s);
        let mut row = vec![Cell::Float(*v)];
        row.extend(s.values.iter().map(|l| Cell::Float(*l)));
        wide.push(row);
    }
    (e, wide)
}

fn grid_hash(cfg: &ExperimentConfig) -> Option<u64> {
    cfg.problem().grid().ok().map(|g| g.hash())
}

fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem = cfg.problem();
    let hash = grid_hash(cfg);
    if let Some(a2) = &cfg.compare {
        let r = gauge_cross_check(&problem, a2)?;
        let mut t = eigen_table();
        spectrum_rows(&mut t, 0.0, &r.original);
        spectrum_rows(&mut t, 1.0, &r.transformed);
        let mut checks = spectrum_checks(&r.original, cfg.tol);
        checks.push(check("gauge_spectral_discrepancy", r.max_spectral_difference, 1e-9));
        checks.push(check("gauge_entrywise_defect", r.entrywise_defect, 1e-13));
        return Ok(Outcome {
            experiment: "gauge_covariance",
            grid_hash: hash,
            checks,
            tables: vec![("eigenvalues.csv", t)],
        });
    }
    match (&cfg.sweep, &cfg.bc) {
        (None, BcChoice::Unitary(u)) => {
            let Domain::Interval { length, n } = cfg.domain else { unreachable!() };
            let zero = |_: f64| 0.0;
            let s = interval_spectrum(&IntervalBc::Unitary(u.clone()), &zero, Interval::new(length, n)?, cfg.k, cfg.params)?;
            let mut t = eigen_table();
            spectrum_rows(&mut t, 0.0, &s);
            Ok(Outcome {
                experiment: "interval_unitary",
                grid_hash: None,
                checks: spectrum_checks(&s, cfg.tol),
                tables: vec![("eigenvalues.csv", t)],
            })
        }
        (None, BcChoice::Family(bc)) => {
            let s = problem.solve()?;
            let mut t = eigen_table();
            spectrum_rows(&mut t, 0.0, &s);
            let mut checks = spectrum_checks(&s, cfg.tol);
            if matches!(bc.kind, BcKind::Dirichlet | BcKind::Neumann) {
                let other = if bc.kind == BcKind::Dirichlet { BcSpec::neumann() } else { BcSpec::dirichlet() };
                let o = problem.clone().with_bc(other).solve()?;
                let (d, nm) = if bc.kind == BcKind::Dirichlet { (&s, &o) } else { (&o, &s) };
                let gap = d.values.iter().zip(&nm.values).map(|(a, b)| b - a).fold(f64::NEG_INFINITY, f64::max);
                checks.push(check("dirichlet_above_neumann", gap, 1e-9));
            }
            Ok(Outcome {
                experiment: "single_solve",
                grid_hash: hash,
                checks,
                tables: vec![("eigenvalues.csv", t)],
            })
        }
        (Some(sw), _) => match sw.parameter {
            SweepParameter::Phi => {
                let r = flux_sweep(&problem, &sw.values)?;
                let (e, wide) = sweep_tables(&r);
                let mut checks = Vec::new();
                if let SweepDiagnostics::Flux { periodicity_error } = &r.diagnostics {
                    checks.push(check("flux_periodicity", periodicity_error.iter().cloned().fold(0.0, f64::max), 1e-9));
                }
                Ok(Outcome {
                    experiment: "flux_sweep",
                    grid_hash: hash,
                    checks,
                    tables: vec![("eigenvalues.csv", e), ("sweep.csv", wide)],
                })
            }
            SweepParameter::Alpha => {
                let r = robin_sweep(&problem, &sw.values)?;
                let (e, wide) = sweep_tables(&r);
                let mut checks = Vec::new();
                if let SweepDiagnostics::Robin { nonincreasing, neumann_identical, .. } = &r.diagnostics {
                    checks.push(flag("robin_nonincreasing", *nonincreasing));
                    if let Some(id) = neumann_identical {
                        checks.push(flag("robin_zero_is_neumann", *id));
                    }
                }
                Ok(Outcome {
                    experiment: "robin_sweep",
                    grid_hash: hash,
                    checks,
                    tables: vec![("eigenvalues.csv", e), ("sweep.csv", wide)],
                })
            }
            SweepParameter::Theta => {
                let Domain::Interval { length, n } = cfg.domain else { unreachable!() };
                let r = theta_family(&sw.values, Interval::new(length, n)?, cfg.k, cfg.params)?;
                let (e, wide) = sweep_tables(&r);
                let worst_imag = r.spectra.iter().map(|s| s.max_imag).fold(0.0, f64::max);
                Ok(Outcome {
                    experiment: "theta_family",
                    grid_hash: None,
                    checks: vec![check("imaginary_part", worst_imag, 1e-9)],
                    tables: vec![("eigenvalues.csv", e), ("sweep.csv", wide)],
                })
            }
            SweepParameter::Resolution => {
                let res: Vec<usize> = sw.values.iter().map(|v| *v as usize).collect();
                let base = problem.with_resolution(res[0]);
                let table = convergence_study(&base, &res, sw.reference.as_deref())?;
                let mut t = Table::new(&["resolution", "index", "lambda", "error", "order"]);
                let mut worst: f64 = 0.0;
                for (r, n) in table.resolutions.iter().enumerate() {
                    for level in 0..cfg.k {
                        let err = table.errors.as_ref().map(|e| e[r][level]).unwrap_or(f64::NAN);
                        // an order is attached to the finer end of its pair or triple
                        let lag = if table.errors.is_some() { 1 } else { 2 };
                        let order = if r >= lag { table.orders[level][r - lag] } else { f64::NAN };
                        if order.is_finite() {
                            worst = worst.max((order - 2.0).abs());
                        }
                        t.push(vec![
                            Cell::Int(*n as i64),
                            Cell::Int(level as i64 + 1),
                            Cell::Float(table.eigenvalues[r][level]),
                            Cell::Float(err),
                            Cell::Float(order),
                        ]);
                    }
                }
                Ok(Outcome {
                    experiment: "convergence_study",
                    grid_hash: hash,
                    checks: vec![check("order_deviation_from_2", worst, 0.3)],
                    tables: vec![("convergence.csv", t)],
                })
            }
        },
    }
}

/// Runs an experiment and writes its tables and `manifest.txt` under
/// `out` (or the configured directory). The manifest is written even when
/// the experiment fails.
pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunManifest> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    let start = Instant::now();
    let mut manifest = RunManifest::failed(&cfg.source, String::new());
    manifest.tol = Some(cfg.tol);
    manifest.grid_hash = grid_hash(cfg);
    match execute(cfg) {
        Ok(o) => {
            for (name, t) in &o.tables {
                emit_csv(t, &dir.join(name))?;
                manifest.artifacts.push(name.to_string());
            }
            manifest.experiment = o.experiment.into();
            manifest.grid_hash = o.grid_hash;
            manifest.status = if o.checks.iter().all(|c| c.passed) { Status::Passed } else { Status::Failed };
            manifest.error = (!manifest.passed()).then(|| "property check failed".to_string());
            manifest.checks = o.checks;
        }
        Err(e) => manifest.error = Some(e.to_string()),
    }
    manifest.wall_clock = start.elapsed().as_secs_f64();
    emit_manifest(&manifest, &dir.join("manifest.txt"))?;
    Ok(manifest)
}

/// Parses the file at `path` and runs it; parse failures produce a failed
/// manifest in `out` (default `out`).
pub fn run_file(path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<RunManifest> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let m = RunManifest::failed("", format!("cannot read {}: {e}", path.display()));
            emit_manifest(&m, &out.unwrap_or(Path::new("out")).join("manifest.txt"))?;
            return Ok(m);
        }
    };
    match parse_config(&text) {
        Ok(mut cfg) => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            run(&cfg, out)
        }
        Err(e) => {
            let m = RunManifest::failed(&text, e.to_string());
            emit_manifest(&m, &out.unwrap_or(Path::new("out")).join("manifest.txt"))?;
            Ok(m)
        }
    }
}

/// Lowest eigenvalues for `U = e^{i theta} I` across `thetas`, or for an
/// explicit unitary, as an `eigenvalues.csv` table.
pub fn sae1d_table(
    thetas: &[f64],
    unitary: Option<&UnitaryBC>,
    interval: Interval,
    k: usize,
    params: PhysicalParams,
) -> Result<Table> {
    let mut t = eigen_table();
    match unitary {
        Some(u) => {
            let zero = |_: f64| 0.0;
            let s = interval_spectrum(&IntervalBc::Unitary(u.clone()), &zero, interval, k, params)?;
            spectrum_rows(&mut t, 0.0, &s);
        }
        None => {
            let r = theta_family(thetas, interval, k, params)?;
            for (v, s) in r.values.iter().zip(&r.spectra) {
                spectrum_rows(&mut t, *v, s);
            }
        }
    }
    Ok(t)
}

/// Parses `re,im,...` for the four entries of a 2x2 unitary, row-major.
pub fn parse_unitary_record(text: &str) -> Result<UnitaryBC> {
    parse_unitary(text, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "[domain]\nkind = rectangle\na = 1\nb = 1\nnx = 16\nny = 16\n";

    #[test]
    fn defaults_are_filled() {
        let c = parse_config(SQUARE).unwrap();
        assert_eq!(c.params, PhysicalParams::default());
        assert_eq!(c.tol, 1e-9);
        assert_eq!(c.method, Method::Iterative);
        assert_eq!(c.bc, BcChoice::Family(BcSpec::dirichlet()));
    }

    #[test]
    fn ab_on_disk_is_rejected() {
        let text = "[domain]\nkind = disk\nradius = 1\nnr = 8\nntheta = 16\n[gauge]\nkind = ab\nphi = 1\n";
        let e = parse_config(text).unwrap_err().to_string();
        assert!(e.contains("AB requires annulus"), "{e}");
        assert!(e.contains("line 7"), "{e}");
    }

    #[test]
    fn duplicates_name_both_lines() {
        let e = parse_config(&format!("{SQUARE}[solver]\nk = 2\nk = 3\n")).unwrap_err().to_string();
        assert!(e.contains("lines 8 and 9"), "{e}");
    }

    #[test]
    fn unknown_keys_fail() {
        assert!(parse_config(&format!("{SQUARE}[solver]\nkk = 2\n")).is_err());
        assert!(parse_config(&format!("{SQUARE}[extra]\n")).is_err());
        assert!(parse_config("[domain]\nkind = disk\nradius = 1\nnr = 8\nntheta = 16\nnx = 4\n").is_err());
    }

    #[test]
    fn floats_keep_17_digits() {
        assert_eq!(Cell::Float(0.1).render(), "1.0000000000000001e-1");
        let mut t = Table::new(&["a", "b"]);
        assert_eq!(t.render(), "a,b\n");
        t.push(vec![Cell::Int(1), Cell::Float(2.0)]);
        assert_eq!(t.render(), "a,b\n1,2.0000000000000000e0\n");
    }

    #[test]
    fn unitary_record() {
        let u = parse_unitary_record("1,0, 0,0, 0,0, -1,0").unwrap();
        assert_eq!(u.matrix()[(1, 1)], C64::new(-1.0, 0.0));
        assert!(parse_unitary_record("2,0,0,0,0,0,1,0").is_err());
    }
}
