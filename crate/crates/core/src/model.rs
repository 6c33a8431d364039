//! The balance law `u_t + f(u)_x = g(u)`, the reference Riemann shock and
//! the pointwise admissibility predicates (equilibrium, spectral, Lax,
//! Oleinik, genuine nonlinearity).

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Default tolerance for `|g(u)| ~ 0` at an endstate.
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
/// Default number of interior chord samples in the Oleinik check.
pub const OLEINIK_SAMPLES: usize = 257;

/// Flux and source of a scalar balance law, both polynomial.
///
/// Derivatives are differentiated exactly from the coefficients once, at
/// construction.
#[derive(Debug, Clone)]
pub struct ScalarLaw {
    flux: Poly,
    dflux: Poly,
    d2flux: Poly,
    source: Poly,
    dsource: Poly,
    description: String,
}

impl ScalarLaw {
    pub fn new(flux: Poly, source: Poly, description: impl Into<String>) -> Self {
        let dflux = flux.derivative();
        let d2flux = dflux.derivative();
        let dsource = source.derivative();
        ScalarLaw {
            flux,
            dflux,
            d2flux,
            source,
            dsource,
            description: description.into(),
        }
    }

    /// Burgers flux `u^2/2` with the given source.
    pub fn burgers(source: Poly) -> Self {
        ScalarLaw::new(burgers_flux(), source, "burgers")
    }

    /// Burgers flux with the bistable source `u - u^3`.
    pub fn burgers_bistable() -> Self {
        ScalarLaw::new(burgers_flux(), bistable_source(), "burgers/bistable")
    }

    /// Same flux, different source.
    pub fn with_source(&self, source: Poly, description: impl Into<String>) -> Self {
        ScalarLaw::new(self.flux.clone(), source, description)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn flux(&self) -> &Poly {
        &self.flux
    }

    pub fn source(&self) -> &Poly {
        &self.source
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.flux.eval(u)
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        self.dflux.eval(u)
    }

    #[inline]
    pub fn d2f(&self, u: f64) -> f64 {
        self.d2flux.eval(u)
    }

    #[inline]
    pub fn g(&self, u: f64) -> f64 {
        self.source.eval(u)
    }

    #[inline]
    pub fn dg(&self, u: f64) -> f64 {
        self.dsource.eval(u)
    }

    /// `max |f'|` over the value range `[lo, hi]`.
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        let (a, b) = self.dflux.range_on(lo.min(hi), lo.max(hi));
        a.abs().max(b.abs())
    }

    /// Range of `f'` over `[lo, hi]`.
    pub fn speed_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.dflux.range_on(lo.min(hi), lo.max(hi))
    }

    /// Sign of `f''` if it is strictly single-signed on `[lo, hi]`.
    pub fn convexity_sign(&self, lo: f64, hi: f64) -> Option<f64> {
        let (a, b) = self.d2flux.range_on(lo.min(hi), lo.max(hi));
        if a > 0.0 {
            Some(1.0)
        } else if b < 0.0 {
            Some(-1.0)
        } else {
            None
        }
    }
}

pub fn burgers_flux() -> Poly {
    Poly::new(vec![0.0, 0.0, 0.5])
}

pub fn cubic_flux() -> Poly {
    Poly::new(vec![0.0, 0.0, 0.0, 1.0 / 3.0])
}

pub fn bistable_source() -> Poly {
    Poly::new(vec![0.0, 1.0, 0.0, -1.0])
}

/// `-beta (u - center)`.
pub fn linear_source(beta: f64, center: f64) -> Poly {
    Poly::new(vec![beta * center, -beta])
}

/// A Riemann shock `u_minus | u_plus` travelling at its Rankine-Hugoniot
/// speed from `psi0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannShockSpec {
    pub u_minus: f64,
    pub u_plus: f64,
    pub sigma: f64,
    pub psi0: f64,
}

impl RiemannShockSpec {
    pub fn new(law: &ScalarLaw, u_minus: f64, u_plus: f64, psi0: f64) -> Result<Self> {
        let sigma = shock_speed(law, u_minus, u_plus)?;
        Ok(RiemannShockSpec {
            u_minus,
            u_plus,
            sigma,
            psi0,
        })
    }

    /// Profile value at `x` for time `t` (left state at the interface).
    pub fn profile(&self, t: f64, x: f64) -> f64 {
        if x <= self.psi0 + self.sigma * t {
            self.u_minus
        } else {
            self.u_plus
        }
    }
}

/// Rankine-Hugoniot speed `(f(u+) - f(u-)) / (u+ - u-)`.
pub fn shock_speed(law: &ScalarLaw, u_minus: f64, u_plus: f64) -> Result<f64> {
    if u_plus == u_minus {
        return Err(Error::Domain(format!(
            "shock speed undefined for equal endstates {u_minus}"
        )));
    }
    Ok((law.f(u_plus) - law.f(u_minus)) / (u_plus - u_minus))
}

/// Integral mean of `f'` between `a` and `b`.
///
/// For polynomial fluxes this is evaluated in closed form, which is exact
/// at `a == b` and continuous through it, so no small-gap switch is needed.
pub fn slope(law: &ScalarLaw, a: f64, b: f64) -> f64 {
    law.flux().mean_derivative(a, b)
}

/// `s_f(a, m) - s_f(b, m)` with `m = tau a + (1 - tau) b`.
pub fn chord_gap(law: &ScalarLaw, a: f64, b: f64, tau: f64) -> f64 {
    let m = tau * a + (1.0 - tau) * b;
    slope(law, a, m) - slope(law, b, m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCheck {
    pub g_value: f64,
    pub g_prime: f64,
    pub stable: bool,
}

pub fn check_equilibrium(law: &ScalarLaw, u: f64, tol: f64) -> EquilibriumCheck {
    let g_value = law.g(u);
    let g_prime = law.dg(u);
    EquilibriumCheck {
        g_value,
        g_prime,
        stable: g_value.abs() <= tol && g_prime < 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxCheck {
    pub ok: bool,
    /// `f'(u_left) - speed`
    pub left_margin: f64,
    /// `speed - f'(u_right)`
    pub right_margin: f64,
}

pub fn check_lax(law: &ScalarLaw, u_left: f64, u_right: f64, speed: f64) -> LaxCheck {
    let left_margin = law.df(u_left) - speed;
    let right_margin = speed - law.df(u_right);
    LaxCheck {
        ok: left_margin > 0.0 && right_margin > 0.0,
        left_margin,
        right_margin,
    }
}

/// Outcome of the Oleinik (chord) admissibility check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OleinikCheck {
    pub passed: bool,
    /// `sigma - f'(u+)`
    pub right_speed_margin: f64,
    /// `f'(u-) - sigma`
    pub left_speed_margin: f64,
    /// Minimum of the chord gap `S_f(u-, u+, tau)` over the interior samples.
    pub chord_margin: f64,
    pub chord_argmin_tau: f64,
    /// `min(s_f(u-, m) - sigma, sigma - s_f(u+, m))` at `tau = 1/2`.
    pub midpoint_margin: f64,
    /// `f''` is single-signed between the endstates with the orientation
    /// that makes the chord inequality hold for every `tau`.
    pub convexity_certified: bool,
}

impl OleinikCheck {
    /// Smallest of the three margins.
    pub fn worst_margin(&self) -> f64 {
        self.right_speed_margin
            .min(self.left_speed_margin)
            .min(self.chord_margin)
    }
}

pub fn check_oleinik(
    law: &ScalarLaw,
    shock: &RiemannShockSpec,
    n_samples: usize,
) -> Result<OleinikCheck> {
    if n_samples < 2 {
        return Err(Error::Parameter(format!(
            "oleinik check needs at least 2 samples, got {n_samples}"
        )));
    }
    let (um, up, sigma) = (shock.u_minus, shock.u_plus, shock.sigma);
    let right_speed_margin = sigma - law.df(up);
    let left_speed_margin = law.df(um) - sigma;

    let mut chord_margin = f64::INFINITY;
    let mut chord_argmin_tau = 0.5;
    for k in 1..=n_samples {
        let tau = k as f64 / (n_samples + 1) as f64;
        let gap = chord_gap(law, um, up, tau);
        if gap < chord_margin {
            chord_margin = gap;
            chord_argmin_tau = tau;
        }
    }

    let m = 0.5 * (um + up);
    let midpoint_margin = (slope(law, um, m) - sigma).min(sigma - slope(law, up, m));

    let convexity_certified = match law.convexity_sign(um, up) {
        Some(s) => s * (um - up) > 0.0,
        None => false,
    };

    Ok(OleinikCheck {
        passed: right_speed_margin > 0.0 && left_speed_margin > 0.0 && chord_margin > 0.0,
        right_speed_margin,
        left_speed_margin,
        chord_margin,
        chord_argmin_tau,
        midpoint_margin,
        convexity_certified,
    })
}

/// Per-endstate verdicts with their margins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndstateVerdict {
    pub equilibrium_ok: bool,
    /// `tol - |g(u)|`
    pub equilibrium_margin: f64,
    pub spectral_ok: bool,
    /// `-g'(u)`
    pub spectral_margin: f64,
    pub gnl_ok: bool,
    /// `|f''(u)|`
    pub gnl_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub minus: EndstateVerdict,
    pub plus: EndstateVerdict,
    pub oleinik: OleinikCheck,
}

impl AdmissibilityReport {
    pub fn all_ok(&self) -> bool {
        let side = |v: &EndstateVerdict| v.equilibrium_ok && v.spectral_ok && v.gnl_ok;
        side(&self.minus) && side(&self.plus) && self.oleinik.passed
    }
}

fn endstate_verdict(law: &ScalarLaw, u: f64, tol: f64) -> EndstateVerdict {
    let eq = check_equilibrium(law, u, tol);
    let equilibrium_margin = tol - eq.g_value.abs();
    let gnl_margin = law.d2f(u).abs();
    EndstateVerdict {
        equilibrium_ok: equilibrium_margin > 0.0,
        equilibrium_margin,
        spectral_ok: eq.g_prime < 0.0,
        spectral_margin: -eq.g_prime,
        gnl_ok: gnl_margin > 0.0,
        gnl_margin,
    }
}

/// Runs every admissibility and stability predicate on a Riemann shock.
pub fn admissibility(
    law: &ScalarLaw,
    shock: &RiemannShockSpec,
    tol: f64,
    n_samples: usize,
) -> Result<AdmissibilityReport> {
    Ok(AdmissibilityReport {
        minus: endstate_verdict(law, shock.u_minus, tol),
        plus: endstate_verdict(law, shock.u_plus, tol),
        oleinik: check_oleinik(law, shock, n_samples)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers() -> ScalarLaw {
        ScalarLaw::burgers_bistable()
    }

    fn cubic() -> ScalarLaw {
        ScalarLaw::new(cubic_flux(), Poly::zero(), "cubic")
    }

    #[test]
    fn shock_speed_examples() {
        assert_eq!(shock_speed(&burgers(), 1.0, -1.0).unwrap(), 0.0);
        assert_eq!(shock_speed(&burgers(), 2.0, 0.0).unwrap(), 1.0);
        assert!((shock_speed(&cubic(), 1.0, -1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            shock_speed(&burgers(), 0.5, 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn slope_examples() {
        assert_eq!(slope(&burgers(), 1.0, -1.0), 0.0);
        assert_eq!(slope(&burgers(), 2.0, 2.0), 2.0);
        assert!((slope(&cubic(), 0.0, 3.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn slope_is_continuous_through_the_diagonal() {
        let law = cubic();
        let a = 0.7;
        for &h in &[1e-7, 1e-8, 1e-9] {
            let taylor = law.df(a + 0.5 * h) + 2.0 / 24.0 * h * h;
            assert!((slope(&law, a, a + h) - taylor).abs() < 1e-10);
        }
    }

    #[test]
    fn chord_gap_examples() {
        assert_eq!(chord_gap(&burgers(), 1.0, -1.0, 0.5), 1.0);
        for tau in [0.0, 0.3, 1.0] {
            assert_eq!(chord_gap(&cubic(), 0.4, 0.4, tau), 0.0);
        }
        assert!((chord_gap(&cubic(), 1.0, -1.0, 0.0) + 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_examples() {
        let law = burgers();
        let stable = check_equilibrium(&law, 1.0, EQUILIBRIUM_TOL);
        assert_eq!((stable.g_value, stable.g_prime, stable.stable), (0.0, -2.0, true));
        let unstable = check_equilibrium(&law, 0.0, EQUILIBRIUM_TOL);
        assert_eq!((unstable.g_value, unstable.g_prime, unstable.stable), (0.0, 1.0, false));
        let flat = check_equilibrium(&ScalarLaw::burgers(Poly::zero()), 5.0, EQUILIBRIUM_TOL);
        assert_eq!((flat.g_value, flat.g_prime, flat.stable), (0.0, 0.0, false));
    }

    #[test]
    fn oleinik_examples() {
        let law = burgers();
        let shock = RiemannShockSpec::new(&law, 1.0, -1.0, 0.0).unwrap();
        let ol = check_oleinik(&law, &shock, OLEINIK_SAMPLES).unwrap();
        assert!(ol.passed && ol.convexity_certified);
        assert!((ol.midpoint_margin - 0.5).abs() < 1e-15);
        assert!((ol.chord_margin - 1.0).abs() < 1e-15);

        let rarefaction = RiemannShockSpec::new(&law, -1.0, 1.0, 0.0).unwrap();
        let ol = check_oleinik(&law, &rarefaction, OLEINIK_SAMPLES).unwrap();
        assert!(!ol.passed);
        assert!(ol.right_speed_margin < 0.0 && ol.left_speed_margin < 0.0);

        let law = cubic();
        let shock = RiemannShockSpec::new(&law, 1.0, -1.0, 0.0).unwrap();
        let ol = check_oleinik(&law, &shock, OLEINIK_SAMPLES).unwrap();
        assert!(!ol.passed);
        assert!((ol.right_speed_margin - (1.0 / 3.0 - 1.0)).abs() < 1e-14);

        assert!(check_oleinik(&law, &shock, 1).is_err());
    }

    #[test]
    fn lax_examples() {
        let law = burgers();
        let c = check_lax(&law, 1.0, -1.0, 0.0);
        assert!(c.ok && c.left_margin == 1.0 && c.right_margin == 1.0);
        let c = check_lax(&law, 1.0, 0.8, 0.9);
        assert!(c.ok);
        assert!((c.left_margin - 0.1).abs() < 1e-15 && (c.right_margin - 0.1).abs() < 1e-15);
        assert!(!check_lax(&law, -1.0, 1.0, 0.0).ok);
    }

    #[test]
    fn admissibility_of_reference_shock() {
        let law = burgers();
        let shock = RiemannShockSpec::new(&law, 1.0, -1.0, 0.0).unwrap();
        let rep = admissibility(&law, &shock, EQUILIBRIUM_TOL, OLEINIK_SAMPLES).unwrap();
        assert!(rep.all_ok());
        for v in [rep.minus, rep.plus] {
            assert!(v.equilibrium_margin > 0.0 && v.spectral_margin == 2.0 && v.gnl_margin == 1.0);
        }
        let off = RiemannShockSpec::new(&law, 0.5, -1.0, 0.0).unwrap();
        let rep = admissibility(&law, &off, EQUILIBRIUM_TOL, OLEINIK_SAMPLES).unwrap();
        assert!(!rep.minus.equilibrium_ok && !rep.all_ok());
    }

    #[test]
    fn reference_shock_sigma_is_divided_difference() {
        let law = ScalarLaw::new(Poly::new(vec![0.1, 0.2, -0.3, 0.05]), Poly::zero(), "p");
        let s = RiemannShockSpec::new(&law, 1.3, -0.4, 2.0).unwrap();
        let dd = (law.f(-0.4) - law.f(1.3)) / (-0.4 - 1.3);
        assert!((s.sigma - dd).abs() < 1e-12);
        assert_eq!(s.profile(0.0, 1.9), 1.3);
        assert_eq!(s.profile(0.0, 2.1), -0.4);
    }
}
