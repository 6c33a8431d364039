//! C¹ extension of one-sided data to the whole line.
//!
//! Right-sided data `v0` on `(anchor, inf)` is continued to the left by
//!
//! ```text
//! v0(a+) + (r + r^2 / (2 delta)) v0'(a+)    for -delta < r <= 0
//! v0(a+) - (delta / 2) v0'(a+)              for r <= -delta
//! ```
//!
//! with `r = x - anchor` and
//! `delta = 2 (C0 - 1) |v0|_inf / max(1, |v0'(a+)|)`. The blend derivative is
//! `(1 + r / delta) v0'(a+)`, a convex combination of `0` and the boundary
//! slope, so the sup norm grows at most by `C0` while every one-signed
//! derivative bound is inherited. Left-sided data are mirrored.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Whole-line (or half-line) scalar data with an exact derivative.
pub trait Profile: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
}

impl<P: Profile + ?Sized> Profile for Arc<P> {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (**self).slope(x)
    }
}

/// Built-in perturbation shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Constant(f64),
    Sech { amplitude: f64, width: f64, center: f64 },
    Gaussian { amplitude: f64, width: f64, center: f64 },
    Sine { amplitude: f64, width: f64, center: f64 },
    Tanh { amplitude: f64, width: f64, center: f64 },
    Spline(HermiteSpline),
}

impl Profile for Shape {
    fn value(&self, x: f64) -> f64 {
        match self {
            Shape::Constant(c) => *c,
            Shape::Sech { amplitude, width, center } => {
                amplitude / ((x - center) / width).cosh()
            }
            Shape::Gaussian { amplitude, width, center } => {
                let z = (x - center) / width;
                amplitude * (-z * z).exp()
            }
            Shape::Sine { amplitude, width, center } => amplitude * ((x - center) / width).sin(),
            Shape::Tanh { amplitude, width, center } => amplitude * ((x - center) / width).tanh(),
            Shape::Spline(s) => s.value(x),
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match self {
            Shape::Constant(_) => 0.0,
            Shape::Sech { amplitude, width, center } => {
                let z = (x - center) / width;
                -amplitude / width * z.tanh() / z.cosh()
            }
            Shape::Gaussian { amplitude, width, center } => {
                let z = (x - center) / width;
                -2.0 * z / width * amplitude * (-z * z).exp()
            }
            Shape::Sine { amplitude, width, center } => {
                amplitude / width * ((x - center) / width).cos()
            }
            Shape::Tanh { amplitude, width, center } => {
                let c = ((x - center) / width).cosh();
                amplitude / width / (c * c)
            }
            Shape::Spline(s) => s.slope(x),
        }
    }
}

/// Piecewise cubic Hermite interpolant, held constant outside its knots.
///
/// The end slopes should vanish for the result to be C¹ on the whole line.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() || knots.len() != slopes.len() {
            return Err(Error::Parameter(
                "spline needs at least two knots with matching values and slopes".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("spline knots must increase strictly".into()));
        }
        Ok(HermiteSpline { knots, values, slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let n = self.knots.len();
        if x <= self.knots[0] || x >= self.knots[n - 1] {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= x) - 1)
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.knots.len();
        match self.locate(x) {
            None if x <= self.knots[0] => self.values[0],
            None => self.values[n - 1],
            Some(i) => {
                let h = self.knots[i + 1] - self.knots[i];
                let s = (x - self.knots[i]) / h;
                hermite(s, h, self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1]).0
            }
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => 0.0,
            Some(i) => {
                let h = self.knots[i + 1] - self.knots[i];
                let s = (x - self.knots[i]) / h;
                hermite(s, h, self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1]).1
            }
        }
    }
}

/// Cubic Hermite value and derivative at local coordinate `s` in `[0, 1]`.
#[inline]
pub(crate) fn hermite(s: f64, h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    let deriv = (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1;
    (value, deriv)
}

/// Profile from a pair of closures.
pub struct FnProfile<V, D> {
    value: V,
    slope: D,
}

impl<V, D> FnProfile<V, D>
where
    V: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(value: V, slope: D) -> Self {
        FnProfile { value, slope }
    }
}

impl<V, D> fmt::Debug for FnProfile<V, D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnProfile")
    }
}

impl<V, D> Profile for FnProfile<V, D>
where
    V: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (self.slope)(x)
    }
}

/// `base + inner(x)`: a perturbation placed on a constant state.
#[derive(Debug, Clone)]
pub struct Shifted<P> {
    pub base: f64,
    pub inner: P,
}

impl<P: Profile> Profile for Shifted<P> {
    fn value(&self, x: f64) -> f64 {
        self.base + self.inner.value(x)
    }
    fn slope(&self, x: f64) -> f64 {
        self.inner.slope(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Data live on `(-inf, anchor)`.
    Left,
    /// Data live on `(anchor, inf)`.
    Right,
}

/// Sup of the negative part, positive part and absolute value of a slope.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlopeBounds {
    pub neg: f64,
    pub pos: f64,
    pub sup: f64,
}

impl SlopeBounds {
    fn absorb(&mut self, s: f64) {
        self.neg = self.neg.max(-s);
        self.pos = self.pos.max(s);
        self.sup = self.sup.max(s.abs());
    }
}

/// Default one-sided sampling reach and density for norm estimates.
pub const NORM_SAMPLING_EXTENT: f64 = 64.0;
pub const NORM_SAMPLES: usize = 65_537;

/// One-sided data with its boundary trace and norm summaries.
#[derive(Debug, Clone)]
pub struct HalfLineData {
    pub side: Side,
    pub anchor: f64,
    pub boundary_value: f64,
    pub boundary_slope: f64,
    pub sup_norm: f64,
    pub slope_bounds: SlopeBounds,
    shape: Arc<dyn Profile>,
}

impl HalfLineData {
    pub fn new(side: Side, anchor: f64, shape: Arc<dyn Profile>) -> Self {
        HalfLineData::sampled(side, anchor, shape, NORM_SAMPLING_EXTENT, NORM_SAMPLES)
    }

    /// Norms are estimated on `n` uniform points of `[anchor, anchor + extent]`
    /// (mirrored for left data), the boundary point included.
    pub fn sampled(side: Side, anchor: f64, shape: Arc<dyn Profile>, extent: f64, n: usize) -> Self {
        let dir = match side {
            Side::Left => -1.0,
            Side::Right => 1.0,
        };
        let n = n.max(2);
        let mut sup_norm: f64 = 0.0;
        let mut slope_bounds = SlopeBounds::default();
        for k in 0..n {
            let x = anchor + dir * extent * k as f64 / (n - 1) as f64;
            sup_norm = sup_norm.max(shape.value(x).abs());
            slope_bounds.absorb(shape.slope(x));
        }
        HalfLineData {
            side,
            anchor,
            boundary_value: shape.value(anchor),
            boundary_slope: shape.slope(anchor),
            sup_norm,
            slope_bounds,
            shape,
        }
    }

    pub fn shape(&self) -> &Arc<dyn Profile> {
        &self.shape
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.side {
            Side::Left => x < self.anchor,
            Side::Right => x > self.anchor,
        }
    }
}

/// Quadratic blend that flattens out over `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blend {
    pub anchor: f64,
    pub value: f64,
    pub slope: f64,
    pub delta: f64,
}

impl Blend {
    /// Continuation to the left of right-sided data.
    fn leftward(&self, x: f64) -> (f64, f64) {
        let r = x - self.anchor;
        if self.delta == 0.0 {
            return (self.value, 0.0);
        }
        if r <= -self.delta {
            (self.value - 0.5 * self.delta * self.slope, 0.0)
        } else {
            (
                self.value + (r + 0.5 * r * r / self.delta) * self.slope,
                (1.0 + r / self.delta) * self.slope,
            )
        }
    }

    /// Continuation to the right of left-sided data.
    fn rightward(&self, x: f64) -> (f64, f64) {
        let r = x - self.anchor;
        if self.delta == 0.0 {
            return (self.value, 0.0);
        }
        if r >= self.delta {
            (self.value + 0.5 * self.delta * self.slope, 0.0)
        } else {
            (
                self.value + (r - 0.5 * r * r / self.delta) * self.slope,
                (1.0 - r / self.delta) * self.slope,
            )
        }
    }
}

/// Whole-line data agreeing with the source data on its domain.
#[derive(Debug, Clone)]
pub struct ExtendedData {
    shape: Arc<dyn Profile>,
    /// Continuation for `x <= anchor` of data living to the right.
    lower: Option<Blend>,
    /// Continuation for `x >= anchor` of data living to the left.
    upper: Option<Blend>,
    pub amplification: f64,
    /// Largest blend width in use.
    pub delta: f64,
    /// Whether a blend width was clipped by the cap.
    pub delta_capped: bool,
}

impl ExtendedData {
    pub fn lower_blend(&self) -> Option<&Blend> {
        self.lower.as_ref()
    }

    pub fn upper_blend(&self) -> Option<&Blend> {
        self.upper.as_ref()
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        if let Some(b) = &self.lower {
            if x <= b.anchor {
                return b.leftward(x);
            }
        }
        if let Some(b) = &self.upper {
            if x >= b.anchor {
                return b.rightward(x);
            }
        }
        (self.shape.value(x), self.shape.slope(x))
    }
}

impl Profile for ExtendedData {
    fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }
    fn slope(&self, x: f64) -> f64 {
        self.eval(x).1
    }
}

fn check_amplification(amplification: f64) -> Result<()> {
    if !(amplification > 1.0) || !amplification.is_finite() {
        return Err(Error::Parameter(format!(
            "amplification must be finite and > 1, got {amplification}"
        )));
    }
    Ok(())
}

/// Blend width for the given sup norm and boundary slope, with the cap
/// `10 max(1, sup)` applied. Returns `(delta, capped)`.
pub fn blend_width(amplification: f64, sup_norm: f64, boundary_slope: f64) -> (f64, bool) {
    if sup_norm == 0.0 {
        return (0.0, false);
    }
    let delta = 2.0 * (amplification - 1.0) * sup_norm / boundary_slope.abs().max(1.0);
    let cap = 10.0 * sup_norm.max(1.0);
    if delta > cap {
        (cap, true)
    } else {
        (delta, false)
    }
}

pub fn extend_half_line(data: &HalfLineData, amplification: f64) -> Result<ExtendedData> {
    check_amplification(amplification)?;
    if !data.sup_norm.is_finite() || !data.boundary_slope.is_finite() || !data.boundary_value.is_finite() {
        return Err(Error::Parameter("half-line data must have finite norms".into()));
    }
    let (delta, delta_capped) = blend_width(amplification, data.sup_norm, data.boundary_slope);
    let blend = Blend {
        anchor: data.anchor,
        value: data.boundary_value,
        slope: data.boundary_slope,
        delta,
    };
    let (lower, upper) = match data.side {
        Side::Right => (Some(blend), None),
        Side::Left => (None, Some(blend)),
    };
    Ok(ExtendedData {
        shape: data.shape.clone(),
        lower,
        upper,
        amplification,
        delta,
        delta_capped,
    })
}

/// Extends data living on `(lo, hi)` past both ends; the interval sup norm
/// sets both blend widths.
pub fn extend_interval(
    lo: f64,
    hi: f64,
    shape: Arc<dyn Profile>,
    amplification: f64,
) -> Result<ExtendedData> {
    check_amplification(amplification)?;
    if !(lo < hi) {
        return Err(Error::Parameter(format!("empty interval ({lo}, {hi})")));
    }
    let n = NORM_SAMPLES;
    let mut sup_norm: f64 = 0.0;
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        sup_norm = sup_norm.max(shape.value(x).abs());
    }
    let make = |anchor: f64| {
        let slope = shape.slope(anchor);
        let (delta, capped) = blend_width(amplification, sup_norm, slope);
        (
            Blend {
                anchor,
                value: shape.value(anchor),
                slope,
                delta,
            },
            capped,
        )
    };
    let (lower, cap_lo) = make(lo);
    let (upper, cap_hi) = make(hi);
    Ok(ExtendedData {
        delta: lower.delta.max(upper.delta),
        shape,
        lower: Some(lower),
        upper: Some(upper),
        amplification,
        delta_capped: cap_lo || cap_hi,
    })
}
