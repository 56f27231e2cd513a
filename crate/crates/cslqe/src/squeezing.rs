//! Single-oscillator toy model: a squeezed thermal state whose occupation is
//! shifted by a small CSL-like amount δ, and how squeezing trades quantum
//! Fisher information against what local Gaussian measurements can extract.

use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{fisher_gaussian, homodyne_variance, qfi_single_mode, FisherResult, MeasurementSpec, Parameter, Squeezing};

/// Where the extra occupation δ enters the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaPlacement {
    /// δ heats the oscillator before squeezing:
    /// σ = (n_th + δ + ½)·diag(e^{2s}, e^{−2s}).
    ///
    /// The squeeze is then a δ-independent symplectic map, so every
    /// information measure is independent of `s`.
    PreSqueezing,
    /// δ adds to the total mean occupation n̄ = n_th cosh 2s + sinh²s,
    /// i.e. the thermal part grows by δ / cosh 2s.
    TotalOccupation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    /// Thermal occupation before squeezing.
    pub n_th: f64,
    /// Squeezing parameter; positive values squeeze the momentum quadrature.
    pub s: f64,
    /// Additive occupation being estimated.
    pub delta: f64,
    pub placement: DeltaPlacement,
}

impl SqueezeParams {
    pub fn new(n_th: f64, s: f64, delta: f64, placement: DeltaPlacement) -> Result<Self> {
        let bad = |key: &str, message: String| Err(Error::ValidationError { key: key.into(), message });
        if !(n_th >= 0.0 && n_th.is_finite()) {
            return bad("n_th", format!("must be finite and non-negative, got {n_th}"));
        }
        if !s.is_finite() {
            return bad("s", format!("must be finite, got {s}"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return bad("delta", format!("must be finite and non-negative, got {delta}"));
        }
        Ok(Self { n_th, s, delta, placement })
    }

    /// Parameters whose total mean occupation at δ = 0 equals `n_total`.
    pub fn from_total_occupation(n_total: f64, s: f64, delta: f64, placement: DeltaPlacement) -> Result<Self> {
        let n_th = (n_total - s.sinh().powi(2)) / (2.0 * s).cosh();
        if n_th < 0.0 {
            return Err(Error::ValidationError {
                key: "s".into(),
                message: format!("squeezing alone exceeds the total occupation {n_total}"),
            });
        }
        Self::new(n_th, s, delta, placement)
    }

    /// Thermal occupation entering the covariance, δ included.
    pub fn effective_thermal(&self) -> f64 {
        self.n_th + self.delta * self.delta_weight()
    }

    fn delta_weight(&self) -> f64 {
        match self.placement {
            DeltaPlacement::PreSqueezing => 1.0,
            DeltaPlacement::TotalOccupation => 1.0 / (2.0 * self.s).cosh(),
        }
    }

    /// Mean occupation (tr σ − 1)/2.
    pub fn mean_occupation(&self) -> f64 {
        0.5 * (squeezed_thermal_cov(self).trace() - 1.0)
    }

    /// The same setup with squeezing `s`, keeping the thermal occupation for
    /// [`DeltaPlacement::PreSqueezing`] and the total occupation otherwise.
    pub fn with_squeezing(&self, s: f64) -> Result<Self> {
        match self.placement {
            DeltaPlacement::PreSqueezing => Self::new(self.n_th, s, self.delta, self.placement),
            DeltaPlacement::TotalOccupation => {
                let base = Self { delta: 0.0, ..*self }.mean_occupation();
                Self::from_total_occupation(base, s, self.delta, self.placement)
            }
        }
    }
}

fn squeeze_diag(s: f64) -> Matrix2<f64> {
    Matrix2::new((2.0 * s).exp(), 0.0, 0.0, (-2.0 * s).exp())
}

/// Covariance of the squeezed thermal state.
pub fn squeezed_thermal_cov(p: &SqueezeParams) -> Matrix2<f64> {
    squeeze_diag(p.s) * (p.effective_thermal() + 0.5)
}

/// ∂σ/∂δ.
pub fn dsigma_ddelta(p: &SqueezeParams) -> Matrix2<f64> {
    squeeze_diag(p.s) * p.delta_weight()
}

/// Quantum Fisher information for δ.
pub fn qfi_delta(p: &SqueezeParams) -> Result<FisherResult> {
    Ok(qfi_single_mode(&squeezed_thermal_cov(p), &dsigma_ddelta(p))?.relabel(Parameter::Occupation))
}

const TIE: f64 = 1e-12;

struct Search<'a> {
    sigma: &'a Matrix2<f64>,
    dsigma: Matrix2<f64>,
    best: Option<(MeasurementSpec, f64)>,
}

impl Search<'_> {
    fn offer(&mut self, spec: MeasurementSpec) {
        let Ok(f) = fisher_gaussian(self.sigma, &self.dsigma, &spec) else { return };
        let v = f.value;
        let replace = match &self.best {
            None => true,
            Some((incumbent, best)) => {
                if v > best * (1.0 + TIE) {
                    true
                } else if v >= best * (1.0 - TIE) {
                    // Equal information: prefer reading out the quieter quadrature.
                    homodyne_variance(self.sigma, spec.theta)
                        < homodyne_variance(self.sigma, incumbent.theta) * (1.0 - TIE)
                } else {
                    false
                }
            }
        };
        if replace {
            self.best = Some((spec, v));
        }
    }
}

/// Best local Gaussian measurement of δ, over homodyne and finite squeezing
/// `l ∈ [10⁻³, 10³]` at all angles, with one round of tenfold refinement.
pub fn optimize_gaussian_meas(p: &SqueezeParams) -> Result<(MeasurementSpec, FisherResult)> {
    let pi = std::f64::consts::PI;
    let sigma = squeezed_thermal_cov(p);
    let mut search = Search { sigma: &sigma, dsigma: dsigma_ddelta(p), best: None };

    const L_POINTS: usize = 61;
    const THETA_POINTS: usize = 91;
    let dlog = 6.0 / (L_POINTS - 1) as f64;
    let dtheta = pi / THETA_POINTS as f64;
    let thetas = |center: f64, half: f64, n: usize| (0..n).map(move |k| center - half + 2.0 * half * k as f64 / (n - 1) as f64);

    for j in 0..THETA_POINTS {
        search.offer(MeasurementSpec::homodyne(j as f64 * dtheta));
    }
    for i in 0..L_POINTS {
        let l = 10f64.powf(-3.0 + i as f64 * dlog);
        for j in 0..THETA_POINTS {
            search.offer(MeasurementSpec::new(l, j as f64 * dtheta)?);
        }
    }

    let (coarse, _) = search.best.ok_or(Error::SingularMeasCov)?;
    match coarse.l {
        Squeezing::Homodyne => {
            for t in thetas(coarse.theta, dtheta, 21) {
                search.offer(MeasurementSpec::homodyne(t));
            }
        }
        Squeezing::Finite(l) => {
            let x0 = l.log10();
            for k in 0..21 {
                let x = (x0 - dlog + 2.0 * dlog * k as f64 / 20.0).clamp(-3.0, 3.0);
                for t in thetas(coarse.theta, dtheta, 21) {
                    search.offer(MeasurementSpec::new(10f64.powf(x), t)?);
                }
            }
        }
    }
    let (spec, value) = search.best.ok_or(Error::SingularMeasCov)?;
    Ok((spec, FisherResult::new(value, Parameter::Occupation)))
}

/// One δ grid point of the squeezed/unsqueezed comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRow {
    pub delta: f64,
    pub qfi_unsqueezed: f64,
    pub qfi_squeezed: f64,
    pub fi_unsqueezed: f64,
    pub fi_squeezed: f64,
}

/// QFI and best Gaussian FI at one δ, for `base` and for the same setup
/// without squeezing.
pub fn delta_row(base: &SqueezeParams, delta: f64) -> Result<DeltaRow> {
    let sq = SqueezeParams::new(base.n_th, base.s, delta, base.placement)?;
    let flat = base.with_squeezing(0.0)?;
    let un = SqueezeParams::new(flat.n_th, 0.0, delta, flat.placement)?;
    Ok(DeltaRow {
        delta,
        qfi_unsqueezed: qfi_delta(&un)?.value,
        qfi_squeezed: qfi_delta(&sq)?.value,
        fi_unsqueezed: optimize_gaussian_meas(&un)?.1.value,
        fi_squeezed: optimize_gaussian_meas(&sq)?.1.value,
    })
}

/// [`delta_row`] along an ascending δ grid. Rows are computed in parallel
/// and returned in grid order.
pub fn sweep_delta(base: &SqueezeParams, delta_grid: &[f64]) -> Result<Vec<DeltaRow>> {
    if delta_grid.is_empty() || delta_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::ValidationError { key: "delta".into(), message: "grid must be nonempty and ascending".into() });
    }
    delta_grid.par_iter().map(|&delta| delta_row(base, delta)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    use DeltaPlacement::{PreSqueezing, TotalOccupation};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn fig4(delta: f64) -> SqueezeParams {
        SqueezeParams::from_total_occupation(100.0, 2.95, delta, TotalOccupation).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let p = SqueezeParams::new(3.0, 0.0, 0.25, PreSqueezing).unwrap();
        assert_eq!(squeezed_thermal_cov(&p), Matrix2::identity() * 3.75);
        let det0 = squeezed_thermal_cov(&p).determinant();
        for s in [-2.0, 0.3, 1.7] {
            let q = SqueezeParams { s, ..p };
            assert!(rel(squeezed_thermal_cov(&q).determinant(), det0) < 1e-13);
        }
        let big = SqueezeParams::new(100.0, 2.95, 0.0, PreSqueezing).unwrap();
        let expect = 100.0 * 5.9f64.cosh() + 2.95f64.sinh().powi(2);
        assert!(rel(big.mean_occupation(), expect) < 1e-13);

        let total = fig4(0.0);
        assert!(rel(total.mean_occupation(), 100.0) < 1e-13);
        assert!(rel(fig4(2.0).mean_occupation(), 102.0) < 1e-13);
        assert!(total.n_th > 0.0 && total.n_th < 0.06);
        assert!(SqueezeParams::from_total_occupation(1.0, 3.0, 0.0, TotalOccupation).is_err());
        assert!(SqueezeParams::new(-1.0, 0.0, 0.0, PreSqueezing).is_err());
    }

    #[test]
    fn qfi_examples() {
        for n in [0.5, 1.0, 10.0, 100.0] {
            let p = SqueezeParams::new(n - 0.25, 0.0, 0.25, PreSqueezing).unwrap();
            assert!(rel(qfi_delta(&p).unwrap().value, 1.0 / (n * (n + 1.0))) < 1e-12);
        }
        let p = SqueezeParams::new(4.0, 1.3, 0.5, TotalOccupation).unwrap();
        let mirrored = SqueezeParams { s: -1.3, ..p };
        assert!(rel(qfi_delta(&p).unwrap().value, qfi_delta(&mirrored).unwrap().value) < 1e-12);
        assert_eq!(qfi_delta(&p).unwrap().parameter, Parameter::Occupation);

        assert!(qfi_delta(&fig4(0.1)).unwrap().value > qfi_delta(&fig4(0.1).with_squeezing(0.0).unwrap()).unwrap().value);
        let pre = SqueezeParams::new(100.0, 2.95, 0.1, PreSqueezing).unwrap();
        let pre0 = pre.with_squeezing(0.0).unwrap();
        assert!(rel(qfi_delta(&pre).unwrap().value, qfi_delta(&pre0).unwrap().value) < 1e-10);
    }

    #[test]
    fn unsqueezed_optimum_is_heterodyne() {
        for (n_th, delta) in [(100.0, 0.0), (3.0, 1.5), (0.5, 0.3)] {
            let p = SqueezeParams::new(n_th, 0.0, delta, TotalOccupation).unwrap();
            let (spec, fi) = optimize_gaussian_meas(&p).unwrap();
            assert_eq!(spec.l, Squeezing::Finite(1.0));
            let n = n_th + delta;
            assert!(rel(fi.value, 1.0 / (n + 1.0).powi(2)) < 1e-12);
        }
        // Below n = 1/√2 the homodyne value 1/(2(n+½)²) overtakes heterodyne.
        let cold = SqueezeParams::new(0.2, 0.0, 0.0, PreSqueezing).unwrap();
        let (spec, fi) = optimize_gaussian_meas(&cold).unwrap();
        assert!(spec.is_homodyne());
        assert!(rel(fi.value, 1.0 / (2.0 * 0.7f64.powi(2))) < 1e-12);
    }

    #[test]
    fn squeezed_optimum_is_homodyne_on_squeezed_quadrature() {
        let p = fig4(0.0);
        let (spec, fi) = optimize_gaussian_meas(&p).unwrap();
        assert!(spec.is_homodyne());
        assert!((spec.theta - PI / 2.0).abs() < 1e-9, "{spec:?}");
        let unsq = optimize_gaussian_meas(&p.with_squeezing(0.0).unwrap()).unwrap().1;
        assert!(fi.value < unsq.value);
    }

    #[test]
    fn optimum_beats_random_probes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for p in [fig4(0.3), SqueezeParams::new(2.0, 0.7, 0.1, PreSqueezing).unwrap()] {
            let sigma = squeezed_thermal_cov(&p);
            let dsigma = dsigma_ddelta(&p);
            let best = optimize_gaussian_meas(&p).unwrap().1.value;
            for _ in 0..200 {
                let spec = MeasurementSpec::new(10f64.powf(rng.gen_range(-3.0..3.0)), rng.gen_range(0.0..PI)).unwrap();
                assert!(fisher_gaussian(&sigma, &dsigma, &spec).unwrap().value <= best * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sweep_plateau_and_knee() {
        let grid: Vec<f64> = (0..25).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)).collect();
        let rows = sweep_delta(&fig4(0.0), &grid).unwrap();
        assert_eq!(rows.len(), grid.len());
        for r in &rows {
            assert!(r.fi_unsqueezed <= r.qfi_unsqueezed * (1.0 + 1e-9));
            assert!(r.fi_squeezed <= r.qfi_squeezed * (1.0 + 1e-9));
            let n = 100.0 + r.delta;
            assert!(rel(r.fi_unsqueezed / r.qfi_unsqueezed, n / (n + 1.0)) < 1e-9);
        }
        let plateau: Vec<_> = rows.iter().filter(|r| r.delta < 0.1).collect();
        for r in &plateau {
            assert!(rel(r.qfi_unsqueezed, plateau[0].qfi_unsqueezed) < 0.01);
            assert!(rel(r.qfi_squeezed, plateau[0].qfi_squeezed) < 0.01);
            assert!(r.fi_squeezed < r.fi_unsqueezed);
        }
        assert!(rows.last().unwrap().qfi_unsqueezed < 0.5 * rows[0].qfi_unsqueezed);
        assert!(sweep_delta(&fig4(0.0), &[1.0, 0.5]).is_err());
    }

    proptest! {
        #[test]
        fn cramer_rao(n_th in 0.01f64..200.0, s in -3.0f64..3.0, delta in 0.0f64..50.0,
                      l in -3.0f64..3.0, theta in 0.0..PI, total in proptest::bool::ANY) {
            let placement = if total { TotalOccupation } else { PreSqueezing };
            let p = SqueezeParams::new(n_th, s, delta, placement).unwrap();
            let q = qfi_delta(&p).unwrap().value;
            let sigma = squeezed_thermal_cov(&p);
            let ds = dsigma_ddelta(&p);
            for spec in [MeasurementSpec::new(10f64.powf(l), theta).unwrap(), MeasurementSpec::homodyne(theta)] {
                prop_assert!(fisher_gaussian(&sigma, &ds, &spec).unwrap().value <= q * (1.0 + 1e-9));
            }
        }

        #[test]
        fn qfi_non_increasing_in_delta(n_th in 0.0f64..200.0, s in -3.0f64..3.0, d in 1e-3f64..50.0, step in 1e-3f64..10.0) {
            for placement in [PreSqueezing, TotalOccupation] {
                let a = SqueezeParams::new(n_th, s, d, placement).unwrap();
                let b = SqueezeParams { delta: d + step, ..a };
                prop_assert!(qfi_delta(&b).unwrap().value <= qfi_delta(&a).unwrap().value * (1.0 + 1e-12));
            }
        }
    }
}
