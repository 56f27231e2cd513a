//! Parameter sweeps producing CSV tables.
//!
//! Each grid point is evaluated independently on a bounded thread pool and
//! the rows are gathered back in grid order, so the output does not depend
//! on the degree of parallelism.

pub mod config;
pub mod csv;

use rayon::prelude::*;

pub use self::config::{parse_config, parse_config_with_overrides, Axis, HomodyneAngle, Output, Scale, SweepConfig};
pub use self::csv::{emit_csv, Cell, Row, SweepResult};

use crate::csl::{lambda_from_gamma, lambda_per_gamma};
use crate::dynamics::{mech_coefficients, SteadyState, SystemParams};
use crate::error::{Error, Result};
use crate::estimation::{best_homodyne, fisher_gaussian, qfi_single_mode, MeasurementSpec, Parameter};
use crate::hybrid::{fi_population, optimal_time, qfi_qubit, HybridProbe, QubitPrep};
use crate::squeezing::{delta_row, DeltaRow, SqueezeParams};

const DEFAULT_POINTS: usize = 49;

/// The axis values a configuration will visit.
pub fn axis_grid(cfg: &SweepConfig) -> Result<Vec<f64>> {
    let invalid = |key: &str, message: String| Error::ValidationError { key: key.into(), message };
    let (lo, hi) = match cfg.axis {
        Axis::Gamma => (1e-36, 1e-24),
        Axis::DeltaDetuning => (0.2 * cfg.base.kappa, 10.0 * cfg.base.kappa),
        Axis::Mass => (5e-12, 5e-10),
        Axis::OmegaM => (0.5 * cfg.base.omega_m, 10.0 * cfg.base.omega_m),
        Axis::Temperature => (1e-4, 1.0),
        Axis::Tau => {
            let c = mech_coefficients(&cfg.base)?;
            let t = optimal_time(c.alpha1, c.beta1, base_lambda(cfg, &cfg.base)?)?;
            (0.1 * t, 10.0 * t)
        }
        Axis::SqueezeDelta => (1e-3, 1e3),
    };
    let min = cfg.range.min.unwrap_or(lo);
    let max = cfg.range.max.unwrap_or(hi);
    let n = cfg.range.points.unwrap_or(DEFAULT_POINTS);
    if !(min < max) {
        return Err(invalid("max", format!("min {min} must be below max {max}")));
    }
    let lower_bound_ok = match cfg.axis {
        Axis::Gamma | Axis::SqueezeDelta => min >= 0.0,
        Axis::DeltaDetuning => true,
        _ => min > 0.0,
    };
    if !lower_bound_ok {
        return Err(invalid("min", format!("{min} is outside the domain of {}", cfg.axis.name())));
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    let mut grid: Vec<f64> = match cfg.range.scale.unwrap_or(Scale::Log10) {
        Scale::Linear => (0..n).map(|i| min + (max - min) * t(i)).collect(),
        Scale::Log10 => {
            if min <= 0.0 {
                return Err(invalid("min", "log10 scale needs a positive minimum".into()));
            }
            let (a, b) = (min.log10(), max.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * t(i))).collect()
        }
    };
    grid[0] = min;
    grid[n - 1] = max;
    Ok(grid)
}

fn base_lambda(cfg: &SweepConfig, p: &SystemParams) -> Result<f64> {
    match cfg.lambda {
        Some(l) => Ok(l),
        None => lambda_from_gamma(p, cfg.gamma),
    }
}

/// Column header for an output, with units in parentheses.
pub fn column_label(output: Output, estimate: Parameter) -> String {
    let fisher = match estimate {
        Parameter::Gamma => "s^2/m^6",
        _ => "s^2",
    };
    match output {
        Output::QfiMech => format!("qfi_mech ({fisher})"),
        Output::QfiOpt => format!("qfi_opt ({fisher})"),
        Output::FiHomodyne(a) => format!("fi_homodyne({a}) ({fisher})"),
        Output::FiHeterodyne => format!("fi_heterodyne ({fisher})"),
        Output::SnrMech => "snr_mech (1)".into(),
        Output::SnrOpt => "snr_opt (1)".into(),
        Output::SnrHomodyne(a) => format!("snr_homodyne({a}) (1)"),
        Output::HybridFi => format!("hybrid_fi ({fisher})"),
        Output::HybridQfi => format!("hybrid_qfi ({fisher})"),
        Output::TauOpt => "tau_opt (1)".into(),
        Output::SqueezeQfi => "squeeze_qfi (1)".into(),
        Output::SqueezeQfiUnsqueezed => "squeeze_qfi_unsqueezed (1)".into(),
        Output::SqueezeFi => "squeeze_fi (1)".into(),
        Output::SqueezeFiUnsqueezed => "squeeze_fi_unsqueezed (1)".into(),
    }
}

/// Lazily computed per-row quantities shared between columns.
struct RowContext<'a> {
    cfg: &'a SweepConfig,
    axis_value: f64,
    params: Result<SystemParams>,
    lambda: Result<f64>,
    steady: Option<Result<SteadyState>>,
    squeeze: Option<Result<DeltaRow>>,
}

impl<'a> RowContext<'a> {
    fn new(cfg: &'a SweepConfig, x: f64) -> Self {
        let p = cfg.params_with(cfg.axis, x);
        let params = p.validate().map(|_| p);
        let lambda = params.clone().and_then(|p| match cfg.axis {
            Axis::Gamma => lambda_from_gamma(&p, x),
            _ => base_lambda(cfg, &p),
        });
        Self { cfg, axis_value: x, params, lambda, steady: None, squeeze: None }
    }

    fn steady(&mut self) -> Result<SteadyState> {
        if self.steady.is_none() {
            let (p, l) = (self.params.clone(), self.lambda.clone());
            self.steady = Some(p.and_then(|p| SteadyState::solve(&p, l?)));
        }
        self.steady.clone().unwrap()
    }

    fn squeeze(&mut self) -> Result<DeltaRow> {
        if self.squeeze.is_none() {
            let s = self.cfg.squeeze;
            self.squeeze = Some(
                SqueezeParams::from_total_occupation(s.n_total, s.s, 0.0, s.placement).and_then(|b| delta_row(&b, self.axis_value)),
            );
        }
        self.squeeze.clone().unwrap()
    }

    /// Multiplier taking a Λ-information to the configured parameter.
    fn fisher_scale(&self) -> Result<f64> {
        match self.cfg.estimate {
            Parameter::Gamma => Ok(lambda_per_gamma(self.params.as_ref().map_err(Clone::clone)?)?.powi(2)),
            _ => Ok(1.0),
        }
    }

    fn homodyne(&mut self, angle: HomodyneAngle) -> Result<f64> {
        let (sigma, dsigma) = self.steady()?.light();
        match angle {
            HomodyneAngle::Fixed(theta) => Ok(fisher_gaussian(&sigma, &dsigma, &MeasurementSpec::homodyne(theta))?.value),
            HomodyneAngle::Optimal => Ok(best_homodyne(&sigma, &dsigma)?.1.value),
        }
    }

    fn hybrid(&mut self) -> Result<(HybridProbe, f64, f64)> {
        let p = self.params.clone()?;
        let lambda = self.lambda.clone()?;
        let c = mech_coefficients(&p)?;
        let tau_opt = optimal_time(c.alpha1, c.beta1, lambda)?;
        let tau = if self.cfg.axis == Axis::Tau { self.axis_value } else { tau_opt };
        Ok((HybridProbe { prep: QubitPrep::ground(), tau, alpha1: c.alpha1, beta1: c.beta1 }, lambda, tau_opt))
    }

    fn evaluate(&mut self, output: Output) -> Result<f64> {
        Ok(match output {
            Output::QfiMech => {
                let (s, d) = self.steady()?.mech();
                qfi_single_mode(&s, &d)?.value * self.fisher_scale()?
            }
            Output::QfiOpt => {
                let (s, d) = self.steady()?.light();
                qfi_single_mode(&s, &d)?.value * self.fisher_scale()?
            }
            Output::FiHomodyne(a) => self.homodyne(a)? * self.fisher_scale()?,
            Output::FiHeterodyne => {
                let (s, d) = self.steady()?.light();
                fisher_gaussian(&s, &d, &MeasurementSpec::heterodyne())?.value * self.fisher_scale()?
            }
            Output::SnrMech => {
                let (s, d) = self.steady()?.mech();
                self.lambda.clone()?.powi(2) * qfi_single_mode(&s, &d)?.value
            }
            Output::SnrOpt => {
                let (s, d) = self.steady()?.light();
                self.lambda.clone()?.powi(2) * qfi_single_mode(&s, &d)?.value
            }
            Output::SnrHomodyne(a) => self.lambda.clone()?.powi(2) * self.homodyne(a)?,
            Output::HybridFi => {
                let (h, l, _) = self.hybrid()?;
                fi_population(&h.prep, h.tau, h.alpha1, h.beta1, l)?.fisher.value * self.fisher_scale()?
            }
            Output::HybridQfi => {
                let (h, l, _) = self.hybrid()?;
                qfi_qubit(&h, l)?.value * self.fisher_scale()?
            }
            Output::TauOpt => self.hybrid()?.2,
            Output::SqueezeQfi => self.squeeze()?.qfi_squeezed,
            Output::SqueezeQfiUnsqueezed => self.squeeze()?.qfi_unsqueezed,
            Output::SqueezeFi => self.squeeze()?.fi_squeezed,
            Output::SqueezeFiUnsqueezed => self.squeeze()?.fi_unsqueezed,
        })
    }
}

fn evaluate_row(cfg: &SweepConfig, x: f64) -> Row {
    let mut ctx = RowContext::new(cfg, x);
    let cells = cfg.outputs.iter().map(|&o| Cell::from_result(ctx.evaluate(o))).collect();
    Row { axis: x, lambda: Cell::from_result(ctx.lambda.clone()), cells }
}

/// Runs a sweep on `jobs` worker threads (all cores when `None`).
pub fn run_sweep(cfg: &SweepConfig, jobs: Option<usize>) -> Result<SweepResult> {
    let grid = axis_grid(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::ValidationError { key: "jobs".into(), message: e.to_string() })?;
    let rows = pool.install(|| grid.par_iter().map(|&x| evaluate_row(cfg, x)).collect());
    Ok(SweepResult {
        axis_label: format!("{} ({})", cfg.axis.name(), cfg.axis.unit()),
        columns: cfg.outputs.iter().map(|&o| column_label(o, cfg.estimate)).collect(),
        rows,
    })
}
