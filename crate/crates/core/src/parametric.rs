//! Reference parametric Archimedean families (Clayton, Frank, Gumbel), the
//! Kendall-tau maps, and synthetic data generation.
//!
//! Sampling uses conditional-distribution inversion: draw `u` and `w`
//! uniformly and solve `dC(u, v)/du = w` for `v` by bracketed root finding,
//! which is family-agnostic and exact up to the root tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::data::{DataError, ObservationSet};
use crate::generator::{Generator, GeneratorError};
use crate::numerics::{brent_root, integrate_adaptive, RootError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Clayton,
    Frank,
    Gumbel,
}

impl Family {
    /// Valid dependence-parameter range for the generator we implement.
    ///
    /// Clayton and Frank exclude 0; the Gumbel generator requires
    /// `theta >= 1` even though the source table prints a wider range.
    pub fn theta_valid(self, theta: f64) -> bool {
        if !theta.is_finite() {
            return false;
        }
        match self {
            Family::Clayton => theta >= -1.0 && theta != 0.0,
            Family::Frank => theta != 0.0,
            Family::Gumbel => theta >= 1.0,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Clayton => write!(f, "clayton"),
            Family::Frank => write!(f, "frank"),
            Family::Gumbel => write!(f, "gumbel"),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum ParametricError {
    #[error("theta {theta} outside the valid range of the {family} family")]
    InvalidTheta { family: Family, theta: f64 },
    #[error("tau {0} outside (0, 1)")]
    InvalidTau(f64),
    #[error("tau inversion failed: {0}")]
    Root(#[from] RootError),
    #[error("sampling requires n >= 1")]
    EmptySample,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// A parametric family member exposing the generator bundle
/// (`phi`, `phi'`, `lambda`, `phi^{-1}`) in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricGenerator {
    family: Family,
    theta: f64,
}

/// Closed-form generator bundle per the reference table.
pub fn make_reference(family: Family, theta: f64) -> Result<ParametricGenerator, ParametricError> {
    if !family.theta_valid(theta) {
        return Err(ParametricError::InvalidTheta { family, theta });
    }
    Ok(ParametricGenerator { family, theta })
}

impl ParametricGenerator {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `phi^{-1}(x)` in closed form.
    pub fn phi_inverse(&self, x: f64) -> f64 {
        let th = self.theta;
        match self.family {
            Family::Clayton => (-(th * x).ln_1p() / th).exp(),
            Family::Frank => -(((-x).exp() * (-th).exp_m1()).ln_1p()) / th,
            Family::Gumbel => (-x.powf(1.0 / th)).exp(),
        }
    }

    /// `dC(u, v)/du`, the conditional distribution of `v` given `u`.
    pub fn partial_u(&self, u: f64, v: f64) -> f64 {
        let th = self.theta;
        match self.family {
            Family::Clayton => {
                let t = u.powf(-th) + v.powf(-th) - 1.0;
                u.powf(-th - 1.0) * t.powf(-1.0 / th - 1.0)
            }
            Family::Frank => {
                let p = (-th * u).exp_m1();
                let q = (-th * v).exp_m1();
                let r = (-th).exp_m1();
                (-th * u).exp() * q / (r + p * q)
            }
            Family::Gumbel => {
                let a = (-u.ln()).powf(th);
                let b = (-v.ln()).powf(th);
                let t = a + b;
                let c = (-t.powf(1.0 / th)).exp();
                c * t.powf(1.0 / th - 1.0) * (-u.ln()).powf(th - 1.0) / u
            }
        }
    }
}

impl Generator for ParametricGenerator {
    fn log_phi(&self, u: f64) -> f64 {
        let th = self.theta;
        match self.family {
            Family::Clayton => ((-th * u.ln()).exp_m1() / th).ln(),
            Family::Frank => (-((-th * u).exp_m1() / (-th).exp_m1()).ln()).ln(),
            Family::Gumbel => th * (-u.ln()).ln(),
        }
    }

    fn lambda(&self, u: f64) -> f64 {
        let th = self.theta;
        match self.family {
            Family::Clayton => (u.powf(th + 1.0) - u) / th,
            Family::Frank => {
                let p = (-th * u).exp_m1();
                let r = (-th).exp_m1();
                -(p / r).ln() * p / (th * (-th * u).exp())
            }
            Family::Gumbel => u * u.ln() / th,
        }
    }

    fn invert_log_phi(&self, log_x: f64, _u0: f64) -> Result<f64, GeneratorError> {
        Ok(self.phi_inverse(log_x.exp()))
    }
}

/// Kendall's tau as a function of the dependence parameter.
///
/// Frank needs the Debye-type integral `int_0^theta t/(e^t - 1) dt`,
/// evaluated adaptively to 1e-12.
pub fn tau_of_theta(family: Family, theta: f64) -> Result<f64, ParametricError> {
    if !family.theta_valid(theta) {
        return Err(ParametricError::InvalidTheta { family, theta });
    }
    Ok(match family {
        Family::Clayton => theta / (theta + 2.0),
        Family::Gumbel => (theta - 1.0) / theta,
        Family::Frank => {
            if theta < 0.0 {
                return Ok(-tau_of_theta(family, -theta)?);
            }
            let mut integrand = |t: f64| {
                if t.abs() < 1e-12 {
                    1.0
                } else {
                    t / t.exp_m1()
                }
            };
            let debye = integrate_adaptive(&mut integrand, 0.0, theta, 1e-12) / theta;
            1.0 - 4.0 / theta * (1.0 - debye)
        }
    })
}

/// Invert the tau map by bracketed root finding to `|f| <= 1e-10`.
pub fn theta_of_tau(family: Family, tau: f64) -> Result<f64, ParametricError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(ParametricError::InvalidTau(tau));
    }
    let (lo, hi) = match family {
        Family::Clayton => (1e-9, 2000.0),
        Family::Frank => (1e-9, 2000.0),
        Family::Gumbel => (1.0, 2000.0),
    };
    let theta = brent_root(
        |th| tau_of_theta(family, th).unwrap_or(f64::NAN) - tau,
        lo,
        hi,
        1e-13,
        1e-10,
    )?;
    Ok(theta)
}

/// How Kendall's tau depends on the covariate in synthetic designs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum TauFunction {
    /// Covariate-free dependence.
    Constant(f64),
    /// `tau(x) = 0.5 + 0.3 sin(1.6 pi x^1.5)`, oscillating between 0.2
    /// and 0.8.
    Sine,
}

impl TauFunction {
    pub fn tau(&self, x: f64) -> f64 {
        match self {
            TauFunction::Constant(t) => *t,
            TauFunction::Sine => 0.5 + 0.3 * (1.6 * std::f64::consts::PI * x.powf(1.5)).sin(),
        }
    }

    pub fn needs_covariate(&self) -> bool {
        matches!(self, TauFunction::Sine)
    }
}

fn open_unit(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

/// Draw one `v` given `u` by inverting the conditional distribution.
fn conditional_draw(gen: &ParametricGenerator, u: f64, w: f64) -> f64 {
    brent_root(
        |v| gen.partial_u(u, v) - w,
        1e-12,
        1.0 - 1e-12,
        1e-12,
        1e-10,
    )
    .unwrap_or(w)
    .clamp(1e-12, 1.0 - 1e-12)
}

/// Generate `n` pairs with uniform margins and the family's dependence.
///
/// Constant tau fixes one parameter for the whole sample; the sine design
/// draws `x_i ~ U(0,1)` and uses `theta(tau(x_i))` per pair. Deterministic
/// given the seed.
pub fn sample_data(
    family: Family,
    tau_fn: &TauFunction,
    n: usize,
    seed: u64,
) -> Result<ObservationSet, ParametricError> {
    if n == 0 {
        return Err(ParametricError::EmptySample);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    match tau_fn {
        TauFunction::Constant(tau) => {
            let independent = tau.abs() < 1e-12;
            let gen = if independent {
                None
            } else {
                if !(*tau > 0.0 && *tau < 1.0) {
                    return Err(ParametricError::InvalidTau(*tau));
                }
                Some(make_reference(family, theta_of_tau(family, *tau)?)?)
            };
            for _ in 0..n {
                let ui = open_unit(&mut rng);
                let w = open_unit(&mut rng);
                let vi = match &gen {
                    // At independence the conditional distribution is uniform.
                    None => w,
                    Some(g) => conditional_draw(g, ui, w),
                };
                u.push(ui);
                v.push(vi);
            }
            Ok(ObservationSet::new(u, v, None)?)
        }
        TauFunction::Sine => {
            let mut xs = Vec::with_capacity(n);
            for _ in 0..n {
                let x = open_unit(&mut rng);
                let ui = open_unit(&mut rng);
                let w = open_unit(&mut rng);
                let gen = make_reference(family, theta_of_tau(family, tau_fn.tau(x))?)?;
                u.push(ui);
                v.push(conditional_draw(&gen, ui, w));
                xs.push(vec![x]);
            }
            Ok(ObservationSet::new(u, v, Some(xs))?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::empirical_kendall_tau;
    use approx::assert_abs_diff_eq;

    /// Test-local Debye integral via adaptive Simpson, independent of the
    /// production quadrature.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let left = (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
        let right = (b - m) / 6.0 * (f(m) + 4.0 * f(0.5 * (m + b)) + f(b));
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
        }
    }

    fn frank_tau_oracle(theta: f64) -> f64 {
        let integrand = |t: f64| if t < 1e-10 { 1.0 } else { t / t.exp_m1() };
        let debye = simpson(&integrand, 0.0, theta, 1e-13, 40) / theta;
        1.0 - 4.0 / theta * (1.0 - debye)
    }

    #[test]
    fn reference_lambda_values_match_published_table() {
        // Clayton at tau = 0.15 (theta = 2 tau / (1 - tau)).
        let clayton = make_reference(Family::Clayton, 2.0 * 0.15 / 0.85).unwrap();
        assert_abs_diff_eq!(clayton.lambda(0.5), -0.307, epsilon = 5e-4);
        // Gumbel at tau = 0.30 (theta = 1 / (1 - tau)).
        let gumbel = make_reference(Family::Gumbel, 1.0 / 0.7).unwrap();
        assert_abs_diff_eq!(gumbel.lambda(0.5), -0.243, epsilon = 5e-4);
        // Gumbel at theta = 1 is independence: lambda = u log u.
        let indep = make_reference(Family::Gumbel, 1.0).unwrap();
        for &u in &[0.1, 0.5, 0.9] {
            assert_abs_diff_eq!(indep.lambda(u), u * u.ln(), epsilon = 1e-14);
        }
    }

    #[test]
    fn generator_bundle_is_internally_consistent() {
        for (fam, th) in [
            (Family::Clayton, 0.8),
            (Family::Frank, 4.0),
            (Family::Gumbel, 1.7),
        ] {
            let gen = make_reference(fam, th).unwrap();
            for &u in &[0.05, 0.3, 0.6, 0.95] {
                // phi_inverse inverts phi.
                let x = gen.phi(u);
                assert_abs_diff_eq!(gen.phi_inverse(x), u, epsilon = 1e-10);
                // lambda = phi / phi' with phi' from finite differences.
                let h = 1e-6 * u.min(1.0 - u);
                let fd = (gen.phi(u + h) - gen.phi(u - h)) / (2.0 * h);
                assert!((gen.lambda(u) - gen.phi(u) / fd).abs() < 1e-6 * gen.lambda(u).abs());
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(make_reference(Family::Gumbel, 0.8).is_err());
        assert!(make_reference(Family::Clayton, 0.0).is_err());
        assert!(make_reference(Family::Frank, 0.0).is_err());
        assert!(make_reference(Family::Clayton, -2.0).is_err());
        assert!(theta_of_tau(Family::Frank, 0.0).is_err());
        assert!(theta_of_tau(Family::Clayton, 1.0).is_err());
    }

    #[test]
    fn tau_map_reference_points() {
        assert_abs_diff_eq!(tau_of_theta(Family::Clayton, 2.0).unwrap(), 0.5);
        assert_abs_diff_eq!(tau_of_theta(Family::Gumbel, 1.0).unwrap(), 0.0);
        // Frank inversion against the test-local bisection oracle.
        let theta = theta_of_tau(Family::Frank, 0.30).unwrap();
        let mut lo = 1e-6;
        let mut hi = 50.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if frank_tau_oracle(mid) < 0.30 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(theta, 0.5 * (lo + hi), epsilon = 1e-8);
    }

    #[test]
    fn tau_theta_roundtrip_over_parameter_grid() {
        let grids = [
            (Family::Clayton, vec![0.2, 0.5, 1.0, 2.0, 5.0, 9.0]),
            (Family::Frank, vec![0.5, 1.0, 3.0, 7.0, 15.0]),
            (Family::Gumbel, vec![1.05, 1.3, 1.9, 3.0, 5.0]),
        ];
        for (fam, thetas) in grids {
            for th in thetas {
                let tau = tau_of_theta(fam, th).unwrap();
                let back = theta_of_tau(fam, tau).unwrap();
                assert_abs_diff_eq!(back, th, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn sine_tau_function_oscillates_between_point_two_and_point_eight() {
        let f = TauFunction::Sine;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let t = f.tau(i as f64 / 1000.0);
            assert!((0.2..=0.8).contains(&t));
            min = min.min(t);
            max = max.max(t);
        }
        assert!(min < 0.21 && max > 0.79);
        assert_abs_diff_eq!(f.tau(0.0), 0.5);
    }

    #[test]
    fn sampler_is_deterministic_and_matches_target_tau() {
        let a = sample_data(Family::Clayton, &TauFunction::Constant(0.5), 2000, 1).unwrap();
        let b = sample_data(Family::Clayton, &TauFunction::Constant(0.5), 2000, 1).unwrap();
        assert_eq!(a, b);
        let tau_hat = empirical_kendall_tau(a.u(), a.v());
        assert!((tau_hat - 0.5).abs() < 0.04, "tau_hat = {tau_hat}");
    }

    #[test]
    fn sine_design_tracks_local_tau() {
        let data = sample_data(Family::Frank, &TauFunction::Sine, 2000, 7).unwrap();
        assert_eq!(data.covariate_dim(), 1);
        let mut u_window = Vec::new();
        let mut v_window = Vec::new();
        for i in 0..data.len() {
            let x = data.covariates(i)[0];
            if (0.2..=0.3).contains(&x) {
                u_window.push(data.u()[i]);
                v_window.push(data.v()[i]);
            }
        }
        assert!(u_window.len() > 100);
        let local = empirical_kendall_tau(&u_window, &v_window);
        let expected = TauFunction::Sine.tau(0.25);
        assert!(
            (local - expected).abs() < 0.1,
            "local tau {local} vs {expected}"
        );
    }

    #[test]
    fn sampled_margins_are_uniform_by_ks_test() {
        for fam in [Family::Clayton, Family::Frank, Family::Gumbel] {
            let data = sample_data(fam, &TauFunction::Constant(0.3), 2000, 11).unwrap();
            for margin in [data.u(), data.v()] {
                let mut sorted = margin.to_vec();
                sorted.sort_by(f64::total_cmp);
                let n = sorted.len() as f64;
                let mut ks: f64 = 0.0;
                for (i, &s) in sorted.iter().enumerate() {
                    let ecdf_hi = (i + 1) as f64 / n;
                    let ecdf_lo = i as f64 / n;
                    ks = ks.max((ecdf_hi - s).abs()).max((s - ecdf_lo).abs());
                }
                // 1% critical value of the one-sample KS statistic.
                assert!(ks < 1.63 / n.sqrt(), "{fam}: ks = {ks}");
            }
        }
    }

    #[test]
    fn empirical_copula_matches_closed_form_on_grid() {
        for (fam, tau) in [
            (Family::Clayton, 0.3),
            (Family::Frank, 0.45),
            (Family::Gumbel, 0.3),
        ] {
            let data = sample_data(fam, &TauFunction::Constant(tau), 50_000, 5).unwrap();
            let gen = make_reference(fam, theta_of_tau(fam, tau).unwrap()).unwrap();
            let n = data.len() as f64;
            let mut worst: f64 = 0.0;
            for i in 1..20 {
                for j in 1..20 {
                    let (gu, gv) = (i as f64 / 20.0, j as f64 / 20.0);
                    let count = data
                        .u()
                        .iter()
                        .zip(data.v())
                        .filter(|&(&a, &b)| a <= gu && b <= gv)
                        .count();
                    let exact = gen.phi_inverse(gen.phi(gu) + gen.phi(gv));
                    worst = worst.max((count as f64 / n - exact).abs());
                }
            }
            assert!(worst < 0.01, "{fam}: sup-norm {worst}");
        }
    }

    #[test]
    fn independence_sampling_is_supported_for_any_family() {
        let data = sample_data(Family::Clayton, &TauFunction::Constant(0.0), 500, 3).unwrap();
        let tau_hat = empirical_kendall_tau(data.u(), data.v());
        assert!(tau_hat.abs() < 0.08);
    }
}
