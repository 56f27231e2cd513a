//! Line-oriented `key = value` configuration for sweeps.
//!
//! Every physical quantity is a bare SI number. `#` starts a comment. Keys
//! that are absent fall back to the reference configuration of
//! [`SystemParams::default`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::constants::GAMMA_ADLER;
use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::estimation::Parameter;
use crate::squeezing::DeltaPlacement;

/// Quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Gamma,
    DeltaDetuning,
    Mass,
    OmegaM,
    Temperature,
    Tau,
    SqueezeDelta,
}

impl Axis {
    pub const ALL: [Axis; 7] =
        [Axis::Gamma, Axis::DeltaDetuning, Axis::Mass, Axis::OmegaM, Axis::Temperature, Axis::Tau, Axis::SqueezeDelta];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Gamma => "gamma",
            Axis::DeltaDetuning => "delta_detuning",
            Axis::Mass => "mass",
            Axis::OmegaM => "omega_m",
            Axis::Temperature => "temperature",
            Axis::Tau => "tau",
            Axis::SqueezeDelta => "squeeze_delta",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Axis::Gamma => "m^3/s",
            Axis::DeltaDetuning | Axis::OmegaM => "rad/s",
            Axis::Mass => "kg",
            Axis::Temperature => "K",
            Axis::Tau | Axis::SqueezeDelta => "1",
        }
    }
}

impl FromStr for Axis {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Axis::ALL.into_iter().find(|a| a.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

/// Homodyne angle requested for an output column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HomodyneAngle {
    Fixed(f64),
    /// The best angle for each row.
    Optimal,
}

impl fmt::Display for HomodyneAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomodyneAngle::Fixed(t) => write!(f, "{t}"),
            HomodyneAngle::Optimal => f.write_str("opt"),
        }
    }
}

/// One requested output column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Output {
    QfiMech,
    QfiOpt,
    FiHomodyne(HomodyneAngle),
    FiHeterodyne,
    SnrMech,
    SnrOpt,
    SnrHomodyne(HomodyneAngle),
    HybridFi,
    HybridQfi,
    TauOpt,
    SqueezeQfi,
    SqueezeQfiUnsqueezed,
    SqueezeFi,
    SqueezeFiUnsqueezed,
}

impl Output {
    pub fn is_squeeze(self) -> bool {
        matches!(self, Output::SqueezeQfi | Output::SqueezeQfiUnsqueezed | Output::SqueezeFi | Output::SqueezeFiUnsqueezed)
    }

    pub fn squeeze_columns() -> Vec<Output> {
        vec![Output::SqueezeQfiUnsqueezed, Output::SqueezeQfi, Output::SqueezeFiUnsqueezed, Output::SqueezeFi]
    }

    pub fn hybrid_columns() -> Vec<Output> {
        vec![Output::HybridFi, Output::HybridQfi, Output::TauOpt]
    }

    fn parse(token: &str) -> std::result::Result<Self, String> {
        let angle = |inner: &str| -> std::result::Result<HomodyneAngle, String> {
            if inner == "opt" {
                return Ok(HomodyneAngle::Optimal);
            }
            inner.parse::<f64>().ok().filter(|t| t.is_finite()).map(HomodyneAngle::Fixed).ok_or(format!("bad homodyne angle `{inner}`"))
        };
        let homodyne = |prefix: &str| -> Option<std::result::Result<HomodyneAngle, String>> {
            let rest = token.strip_prefix(prefix)?;
            if rest.is_empty() {
                return Some(Err(format!("`{prefix}` needs an angle, e.g. {prefix}(0.0) or {prefix}(opt)")));
            }
            Some(rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or(format!("malformed `{token}`")).and_then(angle))
        };
        if let Some(a) = homodyne("fi_homodyne") {
            return a.map(Output::FiHomodyne);
        }
        if let Some(a) = homodyne("snr_homodyne") {
            return a.map(Output::SnrHomodyne);
        }
        Ok(match token {
            "qfi_mech" => Output::QfiMech,
            "qfi_opt" => Output::QfiOpt,
            "fi_heterodyne" => Output::FiHeterodyne,
            "snr_mech" => Output::SnrMech,
            "snr_opt" => Output::SnrOpt,
            "hybrid_fi" => Output::HybridFi,
            "hybrid_qfi" => Output::HybridQfi,
            "tau_opt" => Output::TauOpt,
            "squeeze_qfi" => Output::SqueezeQfi,
            "squeeze_qfi_unsqueezed" => Output::SqueezeQfiUnsqueezed,
            "squeeze_fi" => Output::SqueezeFi,
            "squeeze_fi_unsqueezed" => Output::SqueezeFiUnsqueezed,
            other => return Err(format!("unknown output `{other}`")),
        })
    }
}

/// How the mechanical damping is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    /// γ_m = ω_m / Q, following ω_m along a sweep.
    Quality(f64),
    /// A fixed rate in rad/s.
    Rate(f64),
}

/// The squeezing toy model's settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSettings {
    /// Total mean occupation of the squeezed state at δ = 0.
    pub n_total: f64,
    pub s: f64,
    pub placement: DeltaPlacement,
}

/// Sweep range; unset entries take axis-dependent defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RangeSpec {
    pub scale: Option<Scale>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// System parameters with γ_m and Δ already resolved.
    pub base: SystemParams,
    pub damping: Damping,
    /// Detuning in units of κ when no absolute detuning was given.
    pub delta_over_kappa: Option<f64>,
    /// Collapse coupling used off the γ axis (m³/s).
    pub gamma: f64,
    /// Direct Λ (rad/s), bypassing the sphere conversion.
    pub lambda: Option<f64>,
    pub axis: Axis,
    pub range: RangeSpec,
    pub outputs: Vec<Output>,
    /// Parameter that Fisher columns refer to.
    pub estimate: Parameter,
    pub squeeze: SqueezeSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let base = SystemParams::default();
        Self {
            base,
            damping: Damping::Quality(1e5),
            delta_over_kappa: Some(5.0),
            gamma: GAMMA_ADLER,
            lambda: None,
            axis: Axis::Gamma,
            range: RangeSpec::default(),
            outputs: vec![Output::QfiMech],
            estimate: Parameter::Lambda,
            squeeze: SqueezeSettings { n_total: 100.0, s: 2.95, placement: DeltaPlacement::TotalOccupation },
        }
    }
}

impl SweepConfig {
    /// System parameters after replacing one swept quantity, keeping damping
    /// and detuning rules intact.
    pub fn params_with(&self, axis: Axis, value: f64) -> SystemParams {
        let mut p = self.base;
        match axis {
            Axis::DeltaDetuning => p.delta = value,
            Axis::Mass => p.mass = value,
            Axis::OmegaM => p.omega_m = value,
            Axis::Temperature => p.temperature = value,
            Axis::Gamma | Axis::Tau | Axis::SqueezeDelta => {}
        }
        if let Damping::Quality(q) = self.damping {
            p.gamma_m = p.omega_m / q;
        }
        p
    }

    /// The same configuration sweeping `axis` instead, with the range reset
    /// to that axis' defaults when the axis changes.
    pub fn with_axis(&self, axis: Axis, outputs: Vec<Output>) -> Self {
        let range = if axis == self.axis { self.range } else { RangeSpec { points: self.range.points, ..RangeSpec::default() } };
        Self { axis, range, outputs, ..self.clone() }
    }
}

/// Raw `key → (value, line)` view of a config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigDoc {
    entries: BTreeMap<String, (String, usize)>,
}

const KEYS: &[&str] = &[
    "mass",
    "omega_m",
    "gamma_m",
    "mechanical_q",
    "kappa",
    "delta",
    "cavity_length",
    "laser_power",
    "laser_wavelength",
    "temperature",
    "r_c",
    "material_density",
    "gamma",
    "lambda",
    "sweep_axis",
    "scale",
    "min",
    "max",
    "points",
    "outputs",
    "estimate",
    "squeeze_n_total",
    "squeeze_s",
    "squeeze_placement",
];

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::ParseError { line, message };
            let (key, value) = content.split_once('=').ok_or_else(|| parse_err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(parse_err(format!("unknown key `{key}`")));
            }
            if value.is_empty() && key != "outputs" {
                return Err(parse_err(format!("missing value for `{key}`")));
            }
            if let Some((_, first)) = doc.entries.get(key) {
                return Err(parse_err(format!("duplicate key `{key}` (first set on line {first})")));
            }
            doc.entries.insert(key.to_string(), (value.to_string(), line));
        }
        Ok(doc)
    }

    /// Applies a command-line `key=value` override, replacing any file value.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::ValidationError {
            key: assignment.to_string(),
            message: "override must look like key=value".into(),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::ValidationError { key: key.into(), message: "unknown key".into() });
        }
        self.entries.insert(key.to_string(), (value.trim().to_string(), 0));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::ValidationError {
                    key: key.into(),
                    message: format!("`{v}` is not a finite number"),
                })
            })
            .transpose()
    }

    pub fn into_config(self) -> Result<SweepConfig> {
        let invalid = |key: &str, message: String| Error::ValidationError { key: key.into(), message };
        let mut cfg = SweepConfig::default();
        let p = &mut cfg.base;
        for (key, slot) in [
            ("mass", &mut p.mass),
            ("omega_m", &mut p.omega_m),
            ("kappa", &mut p.kappa),
            ("cavity_length", &mut p.cavity_length),
            ("laser_power", &mut p.laser_power),
            ("laser_wavelength", &mut p.laser_wavelength),
            ("temperature", &mut p.temperature),
            ("r_c", &mut p.r_c),
            ("material_density", &mut p.material_density),
        ] {
            if let Some(v) = self.number(key)? {
                *slot = v;
            }
        }
        match (self.number("gamma_m")?, self.number("mechanical_q")?) {
            (Some(_), Some(_)) => return Err(invalid("mechanical_q", "conflicts with gamma_m; give one of them".into())),
            (Some(g), None) => cfg.damping = Damping::Rate(g),
            (None, Some(q)) if q > 0.0 => cfg.damping = Damping::Quality(q),
            (None, Some(q)) => return Err(invalid("mechanical_q", format!("must be positive, got {q}"))),
            (None, None) => {}
        }
        cfg.base.gamma_m = match cfg.damping {
            Damping::Rate(g) => g,
            Damping::Quality(q) => cfg.base.omega_m / q,
        };
        if let Some(d) = self.number("delta")? {
            cfg.delta_over_kappa = None;
            cfg.base.delta = d;
        } else if let Some(r) = cfg.delta_over_kappa {
            cfg.base.delta = r * cfg.base.kappa;
        }
        cfg.base.validate()?;

        if let Some(g) = self.number("gamma")? {
            if g < 0.0 {
                return Err(invalid("gamma", format!("must be non-negative, got {g}")));
            }
            cfg.gamma = g;
        }
        if let Some(l) = self.number("lambda")? {
            if l < 0.0 {
                return Err(invalid("lambda", format!("must be non-negative, got {l}")));
            }
            cfg.lambda = Some(l);
        }
        if let Some(a) = self.get("sweep_axis") {
            cfg.axis = a.parse().map_err(|_| invalid("sweep_axis", format!("unknown axis `{a}`")))?;
        }
        if cfg.axis == Axis::Gamma && cfg.lambda.is_some() {
            return Err(invalid("lambda", "cannot fix Λ while sweeping gamma".into()));
        }
        cfg.range.scale = match self.get("scale") {
            None => None,
            Some("linear") => Some(Scale::Linear),
            Some("log10") => Some(Scale::Log10),
            Some(other) => return Err(invalid("scale", format!("expected linear or log10, got `{other}`"))),
        };
        cfg.range.min = self.number("min")?;
        cfg.range.max = self.number("max")?;
        if let Some(v) = self.get("points") {
            let n: usize = v.parse().map_err(|_| invalid("points", format!("`{v}` is not a positive integer")))?;
            if n < 2 {
                return Err(invalid("points", format!("need at least 2 points, got {n}")));
            }
            cfg.range.points = Some(n);
        }
        if let (Some(lo), Some(hi)) = (cfg.range.min, cfg.range.max) {
            if !(lo < hi) {
                return Err(invalid("max", format!("min {lo} must be below max {hi}")));
            }
        }
        if cfg.range.scale == Some(Scale::Log10) && cfg.range.min.is_some_and(|m| m <= 0.0) {
            return Err(invalid("min", "log10 scale needs a positive minimum".into()));
        }

        if let Some(list) = self.get("outputs") {
            cfg.outputs = split_outputs(list)
                .into_iter()
                .filter(|t| !t.is_empty())
                .map(|t| Output::parse(&t).map_err(|m| invalid("outputs", m)))
                .collect::<Result<_>>()?;
        } else if cfg.axis == Axis::SqueezeDelta {
            cfg.outputs = Output::squeeze_columns();
        } else if cfg.axis == Axis::Tau {
            cfg.outputs = Output::hybrid_columns();
        }
        let squeeze_axis = cfg.axis == Axis::SqueezeDelta;
        if let Some(o) = cfg.outputs.iter().find(|o| o.is_squeeze() != squeeze_axis) {
            let message = if squeeze_axis {
                format!("{o:?} is not available on the squeeze_delta axis")
            } else {
                format!("{o:?} needs sweep_axis = squeeze_delta")
            };
            return Err(invalid("outputs", message));
        }

        cfg.estimate = match self.get("estimate") {
            None | Some("lambda") => Parameter::Lambda,
            Some("gamma") => {
                if cfg.lambda.is_some() {
                    return Err(invalid("estimate", "a fixed lambda has no γ conversion".into()));
                }
                Parameter::Gamma
            }
            Some(other) => return Err(invalid("estimate", format!("expected lambda or gamma, got `{other}`"))),
        };

        if let Some(n) = self.number("squeeze_n_total")? {
            cfg.squeeze.n_total = n;
        }
        if let Some(s) = self.number("squeeze_s")? {
            cfg.squeeze.s = s;
        }
        cfg.squeeze.placement = match self.get("squeeze_placement") {
            None | Some("total") => DeltaPlacement::TotalOccupation,
            Some("pre") => DeltaPlacement::PreSqueezing,
            Some(other) => return Err(invalid("squeeze_placement", format!("expected total or pre, got `{other}`"))),
        };
        crate::squeezing::SqueezeParams::from_total_occupation(cfg.squeeze.n_total, cfg.squeeze.s, 0.0, cfg.squeeze.placement)
            .map_err(|e| match e {
                Error::ValidationError { message, .. } => invalid("squeeze_s", message),
                other => other,
            })?;
        Ok(cfg)
    }
}

/// Splits a comma list, keeping commas inside parentheses.
fn split_outputs(list: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut depth = 0usize;
    for c in list.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(String::new());
                continue;
            }
            _ => {}
        }
        if !c.is_whitespace() {
            out.last_mut().unwrap().push(c);
        }
    }
    out
}

/// Parses and validates a config file.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    ConfigDoc::parse(text)?.into_config()
}

/// Parses a config file, then applies `key=value` overrides in order.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<SweepConfig> {
    let mut doc = ConfigDoc::parse(text)?;
    for o in overrides {
        doc.set(o)?;
    }
    doc.into_config()
}
