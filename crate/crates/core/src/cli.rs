//! Run configuration, presets and result emission.
//!
//! Configs are flat `key = value` files with `#` comments. A `preset` key
//! selects the defaults (wherever it appears); every other key overrides
//! them. An empty file resolves to the `table2` preset.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::beamforming::DesignKind;
use crate::channel::ScenarioGeometry;
use crate::error::{Error, Result};
use crate::experiment::{
    sweep, ExponentGrid, MinElementPoint, MonteCarloResult, SweepOutput, SweepSpec,
};

pub const DEFAULT_DROPS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Table2,
    Fig2,
    Fig3,
    Fig4,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Table2 => "table2",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table2" => Ok(Preset::Table2),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            other => Err(format!(
                "unknown preset `{other}` (expected table2, fig2, fig3 or fig4)"
            )),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub geometry: ScenarioGeometry,
    pub designs: Vec<DesignKind>,
    pub elements: Vec<usize>,
    pub power_dbm: Vec<f64>,
    pub drops: u64,
    pub seed: u64,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Only used by the `fig2` preset.
    pub alpha3_grid: Vec<f64>,
    pub alpha4_grid: Vec<f64>,
}

impl RunConfig {
    pub fn from_preset(preset: Preset) -> Self {
        let fig2 = SweepSpec::fig2();
        let grid = fig2.exponent_grid.unwrap_or_default();
        let mut cfg = Self {
            preset,
            geometry: ScenarioGeometry::table2(),
            designs: vec![DesignKind::Ssecb],
            elements: vec![27, 54],
            power_dbm: SweepSpec::power_range(-60.0, -10.0, 5.0),
            drops: DEFAULT_DROPS,
            seed: DEFAULT_SEED,
            out: None,
            format: OutputFormat::Csv,
            alpha3_grid: grid.alpha3,
            alpha4_grid: grid.alpha4,
        };
        match preset {
            Preset::Table2 | Preset::Fig2 => {}
            Preset::Fig3 => {
                let s = SweepSpec::fig3(DEFAULT_DROPS, DEFAULT_SEED);
                cfg.designs = s.designs;
                cfg.elements = s.elements;
                cfg.power_dbm = s.power_dbm;
            }
            Preset::Fig4 => {
                let s = SweepSpec::fig4(DEFAULT_DROPS, DEFAULT_SEED);
                cfg.designs = s.designs;
                cfg.elements = s.elements;
                cfg.power_dbm = s.power_dbm;
            }
        }
        cfg
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            designs: self.designs.clone(),
            elements: self.elements.clone(),
            power_dbm: self.power_dbm.clone(),
            exponent_grid: (self.preset == Preset::Fig2).then(|| ExponentGrid {
                alpha2: Vec::new(),
                alpha3: self.alpha3_grid.clone(),
                alpha4: self.alpha4_grid.clone(),
            }),
            drops: self.drops,
            master_seed: self.seed,
        }
    }

    /// Serializes every key explicitly; `parse_config` of the result yields
    /// an equal config.
    pub fn to_config_text(&self) -> String {
        let g = &self.geometry;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("preset", self.preset.to_string());
        put("design", join(&self.designs));
        put("elements", join(&self.elements));
        put("power_dbm", join(&self.power_dbm));
        put("drops", self.drops.to_string());
        put("seed", self.seed.to_string());
        if let Some(out) = &self.out {
            put("out", out.display().to_string());
        }
        put("format", self.format.to_string());
        put("alpha3_grid", join(&self.alpha3_grid));
        put("alpha4_grid", join(&self.alpha4_grid));
        for (k, v) in geometry_fields(g) {
            put(k, v.to_string());
        }
        s
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_preset(Preset::Table2)
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn geometry_fields(g: &ScenarioGeometry) -> [(&'static str, f64); 17] {
    [
        ("d_bs_ccu", g.d_bs_ccu),
        ("d_bs_ceu", g.d_bs_ceu),
        ("d_bs_ris", g.d_bs_ris),
        ("d_ris_ceu", g.d_ris_ceu),
        ("d_ris_ccu", g.d_ris_ccu),
        ("d_bs_other_ccu", g.d_bs_other_ccu),
        ("d_bs_other_ceu", g.d_bs_other_ceu),
        ("alpha1", g.alpha1),
        ("alpha2", g.alpha2),
        ("alpha3_c", g.alpha3_c),
        ("alpha3_e", g.alpha3_e),
        ("alpha4", g.alpha4),
        ("k1", g.k1),
        ("k2", g.k2),
        ("bandwidth_hz", g.bandwidth_hz),
        ("gamma_c_sq", g.gamma_c_sq),
        ("gamma_e_sq", g.gamma_e_sq),
    ]
}

fn geometry_field<'a>(g: &'a mut ScenarioGeometry, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "d_bs_ccu" => &mut g.d_bs_ccu,
        "d_bs_ceu" => &mut g.d_bs_ceu,
        "d_bs_ris" => &mut g.d_bs_ris,
        "d_ris_ceu" => &mut g.d_ris_ceu,
        "d_ris_ccu" => &mut g.d_ris_ccu,
        "d_bs_other_ccu" => &mut g.d_bs_other_ccu,
        "d_bs_other_ceu" => &mut g.d_bs_other_ceu,
        "alpha1" => &mut g.alpha1,
        "alpha2" => &mut g.alpha2,
        "alpha3_c" => &mut g.alpha3_c,
        "alpha3_e" => &mut g.alpha3_e,
        "alpha4" => &mut g.alpha4,
        "k1" => &mut g.k1,
        "k2" => &mut g.k2,
        "bandwidth_hz" => &mut g.bandwidth_hz,
        "gamma_c_sq" => &mut g.gamma_c_sq,
        "gamma_e_sq" => &mut g.gamma_e_sq,
        _ => return None,
    })
}

fn parse_scalar<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| format!("cannot parse `{}`: {e}", s.trim()))
}

/// `a, b, c` or an inclusive `start:stop:step` range.
pub fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (
                parse_scalar::<f64>(start)?,
                parse_scalar::<f64>(stop)?,
                parse_scalar::<f64>(step)?,
            );
            if !(step > 0.0) || stop < start {
                return Err(format!("range `{s}` needs step > 0 and stop >= start"));
            }
            SweepSpec::power_range(start, stop, step)
        }
        [_] => s
            .split(',')
            .map(parse_scalar::<f64>)
            .collect::<std::result::Result<_, _>>()?,
        _ => return Err(format!("expected a list or start:stop:step, got `{s}`")),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(format!("list `{s}` must hold finite values"));
    }
    Ok(values)
}

pub fn parse_usize_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (
                parse_scalar::<usize>(start)?,
                parse_scalar::<usize>(stop)?,
                parse_scalar::<usize>(step)?,
            );
            if step == 0 || stop < start {
                return Err(format!("range `{s}` needs step > 0 and stop >= start"));
            }
            Ok((start..=stop).step_by(step).collect())
        }
        [_] => s.split(',').map(parse_scalar::<usize>).collect(),
        _ => Err(format!("expected a list or start:stop:step, got `{s}`")),
    }
}

pub fn parse_design_list(s: &str) -> std::result::Result<Vec<DesignKind>, String> {
    s.split(',').map(str::parse).collect()
}

/// Parses a config file; the preset comes from the text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_preset(text, None)
}

/// Parses a config file, letting `preset` take precedence over any
/// `preset` key in the text.
pub fn parse_config_with_preset(text: &str, preset: Option<Preset>) -> Result<RunConfig> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(line_no, line, "expected `key = value`"))?;
        entries.push((line_no, key.trim().to_string(), value.trim().to_string()));
    }

    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, key, _) in &entries {
        if let Some(first) = seen.insert(key.clone(), *line) {
            return Err(Error::config(
                *line,
                key,
                format!("duplicate key (first set on line {first})"),
            ));
        }
    }

    let text_preset = entries
        .iter()
        .find(|(_, k, _)| k == "preset")
        .map(|(line, k, v)| v.parse::<Preset>().map_err(|e| Error::config(*line, k, e)))
        .transpose()?;
    let mut cfg = RunConfig::from_preset(preset.or(text_preset).unwrap_or(Preset::Table2));

    for (line, key, value) in &entries {
        let err = |msg: String| Error::config(*line, key, msg);
        match key.as_str() {
            "preset" => {}
            "design" => cfg.designs = parse_design_list(value).map_err(err)?,
            "elements" => cfg.elements = parse_usize_list(value).map_err(err)?,
            "power_dbm" => cfg.power_dbm = parse_f64_list(value).map_err(err)?,
            "drops" => cfg.drops = parse_scalar(value).map_err(err)?,
            "seed" => cfg.seed = parse_scalar(value).map_err(err)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            "format" => cfg.format = value.parse().map_err(err)?,
            "alpha3_grid" => cfg.alpha3_grid = parse_f64_list(value).map_err(err)?,
            "alpha4_grid" => cfg.alpha4_grid = parse_f64_list(value).map_err(err)?,
            k => match geometry_field(&mut cfg.geometry, k) {
                Some(slot) => *slot = parse_scalar(value).map_err(err)?,
                None => return Err(err("unknown key".into())),
            },
        }
    }

    let line_of = |key: &str| seen.get(key).copied().unwrap_or(0);
    validate(&cfg, &line_of)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig, line_of: &dyn Fn(&str) -> usize) -> Result<()> {
    let fail = |key: &str, msg: String| Error::config(line_of(key), key, msg);
    let g = &cfg.geometry;

    for (key, v) in geometry_fields(g) {
        if !v.is_finite() {
            return Err(fail(key, format!("{v} is not finite")));
        }
    }
    for (key, d) in g.distances() {
        if d <= 0.0 {
            return Err(fail(key, format!("distance must be positive, got {d}")));
        }
    }
    for (key, a) in g.exponents() {
        if a <= 0.0 {
            return Err(fail(key, format!("exponent must be positive, got {a}")));
        }
    }
    for (key, k) in [("k1", g.k1), ("k2", g.k2)] {
        if k < 0.0 {
            return Err(fail(
                key,
                format!("Rician factor must be non-negative, got {k}"),
            ));
        }
    }
    if g.bandwidth_hz <= 0.0 {
        return Err(fail("bandwidth_hz", "bandwidth must be positive".into()));
    }
    // report an allocation problem against whichever factor was set last
    let alloc_key = if line_of("gamma_c_sq") > line_of("gamma_e_sq") {
        "gamma_c_sq"
    } else {
        "gamma_e_sq"
    };
    for (key, v) in [("gamma_c_sq", g.gamma_c_sq), ("gamma_e_sq", g.gamma_e_sq)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(fail(
                key,
                format!("allocation factor must lie in (0, 1), got {v}"),
            ));
        }
    }
    if (g.gamma_c_sq + g.gamma_e_sq - 1.0).abs() > 1e-9 {
        return Err(fail(
            alloc_key,
            format!(
                "gamma_c_sq + gamma_e_sq must equal 1, got {}",
                g.gamma_c_sq + g.gamma_e_sq
            ),
        ));
    }
    if g.gamma_e_sq <= g.gamma_c_sq {
        return Err(fail(alloc_key, "gamma_e_sq must exceed gamma_c_sq".into()));
    }

    if cfg.drops == 0 {
        return Err(fail("drops", "at least one drop is required".into()));
    }
    if cfg.designs.is_empty() {
        return Err(fail("design", "no design requested".into()));
    }
    if cfg.elements.is_empty() {
        return Err(fail("elements", "no element count requested".into()));
    }
    let min_l = if cfg.designs.iter().any(|d| d.cancels()) {
        2
    } else {
        1
    };
    if let Some(l) = cfg.elements.iter().find(|&&l| l < min_l) {
        return Err(fail(
            "elements",
            format!("{l} elements is too few (need at least {min_l})"),
        ));
    }
    if cfg.power_dbm.is_empty() {
        return Err(fail("power_dbm", "no transmit power requested".into()));
    }
    Ok(())
}

/// One CSV/JSON row of a Monte-Carlo sweep.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RateRow {
    pub design: String,
    #[serde(rename = "L")]
    pub elements: usize,
    pub p_dbm: f64,
    pub user: String,
    pub rate_mean: f64,
    pub rate_stderr: f64,
    pub feasible_fraction: f64,
    pub drops: u64,
    pub seed: u64,
}

/// One row of the minimal-element map.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MinElementRow {
    pub alpha3: f64,
    pub alpha4: f64,
    pub min_elements: u64,
}

pub fn rate_rows(result: &MonteCarloResult) -> Vec<RateRow> {
    result
        .points
        .iter()
        .flat_map(|p| {
            crate::channel::User::ALL.map(|u| RateRow {
                design: p.design.to_string(),
                elements: p.elements,
                p_dbm: p.p_dbm,
                user: u.to_string(),
                rate_mean: p.user(u).mean_rate,
                rate_stderr: p.user(u).std_error,
                feasible_fraction: p.feasible_fraction,
                drops: p.drops,
                seed: p.seed,
            })
        })
        .collect()
}

pub fn min_element_rows(points: &[MinElementPoint]) -> Vec<MinElementRow> {
    points
        .iter()
        .map(|p| MinElementRow {
            alpha3: p.alpha3_c,
            alpha4: p.alpha4,
            min_elements: p.min_elements,
        })
        .collect()
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], format: OutputFormat, mut w: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut wtr = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            for row in rows {
                wtr.serialize(row)?;
            }
            wtr.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes `output` to `path`, or stdout when `path` is `None`.
pub fn emit_results(output: &SweepOutput, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match output {
        SweepOutput::Rates(r) => write_rows(&rate_rows(r), format, sink),
        SweepOutput::MinElements(p) => write_rows(&min_element_rows(p), format, sink),
    }
}

/// Renders `output` in memory.
pub fn render_results(output: &SweepOutput, format: OutputFormat) -> Result<String> {
    let mut buf = Vec::new();
    match output {
        SweepOutput::Rates(r) => write_rows(&rate_rows(r), format, &mut buf)?,
        SweepOutput::MinElements(p) => write_rows(&min_element_rows(p), format, &mut buf)?,
    }
    Ok(String::from_utf8(buf).expect("serializers emit UTF-8"))
}

pub fn execute(config: &RunConfig) -> Result<SweepOutput> {
    for name in config.geometry.validate()? {
        eprintln!("warning: {name} is below 2, which is unusual for a path-loss exponent");
    }
    let output = sweep(&config.sweep_spec(), &config.geometry)?;
    emit_results(&output, config.format, config.out.as_deref())?;
    Ok(output)
}

/// Runs a config and maps the outcome onto the process exit code:
/// 0 success, 1 configuration error, 2 runtime error.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Domain(_) => 1,
        _ => 2,
    }
}
