//! The double scroll vector field, its equilibria and event-accurate
//! integration to control-plane crossings.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::section::{Plane, SectionGeometry};

/// A point of the double scroll phase space together with its time stamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub v_c1: f64,
    pub v_c2: f64,
    pub i_l: f64,
    pub t: f64,
}

impl State {
    pub const fn new(v_c1: f64, v_c2: f64, i_l: f64) -> Self {
        Self {
            v_c1,
            v_c2,
            i_l,
            t: 0.0,
        }
    }

    pub fn from_array(x: [f64; 3], t: f64) -> Self {
        Self {
            v_c1: x[0],
            v_c2: x[1],
            i_l: x[2],
            t,
        }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.v_c1, self.v_c2, self.i_l]
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.v_c1.is_finite() && self.v_c2.is_finite() && self.i_l.is_finite() && self.t.is_finite()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.to_array())
    }

    /// Euclidean distance in phase space, ignoring time.
    pub fn distance(&self, other: &State) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
    }
}

pub(crate) fn norm(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// An autonomous three-dimensional flow.
///
/// Only the double scroll is shipped, but the integrator and the Lyapunov
/// estimators are written against this trait so other flows can be plugged in.
pub trait VectorField {
    fn eval(&self, x: &[f64; 3]) -> [f64; 3];
}

impl<F: Fn(&[f64; 3]) -> [f64; 3]> VectorField for F {
    fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        self(x)
    }
}

/// Chua's circuit in the double scroll regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleScroll {
    c1: f64,
    c2: f64,
    inductance: f64,
    conductance: f64,
    m0: f64,
    m1: f64,
    breakpoint: f64,
}

impl DoubleScroll {
    pub fn new(cfg: &SystemConfig) -> Self {
        Self {
            c1: cfg.c1,
            c2: cfg.c2,
            inductance: cfg.inductance,
            conductance: cfg.conductance,
            m0: cfg.m0,
            m1: cfg.m1,
            breakpoint: cfg.breakpoint,
        }
    }

    /// Piecewise-linear nonlinear resistor characteristic.
    #[inline]
    pub fn g(&self, v: f64) -> f64 {
        let bp = self.breakpoint;
        if v >= bp {
            self.m0 * (v - bp) + self.m1 * bp
        } else if v <= -bp {
            self.m0 * (v + bp) - self.m1 * bp
        } else {
            self.m1 * v
        }
    }
}

impl VectorField for DoubleScroll {
    #[inline]
    fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let [v1, v2, i] = *x;
        [
            (self.conductance * (v2 - v1) - self.g(v1)) / self.c1,
            (self.conductance * (v1 - v2) + i) / self.c2,
            -v2 / self.inductance,
        ]
    }
}

pub fn g_piecewise(v: f64, cfg: &SystemConfig) -> f64 {
    DoubleScroll::new(cfg).g(v)
}

/// Time derivative of `s`, returned as a state whose `t` component is 1.
pub fn vector_field(s: &State, cfg: &SystemConfig) -> State {
    let d = DoubleScroll::new(cfg).eval(&s.to_array());
    State::from_array(d, 1.0)
}

/// The origin and the symmetric pair of outer-branch fixed points.
pub fn equilibria(cfg: &SystemConfig) -> Result<Vec<State>> {
    let g = cfg.conductance;
    if cfg.m1 + g == 0.0 {
        return Err(Error::DegenerateParameters(
            "inner branch slope m1 equals -G: a continuum of equilibria".into(),
        ));
    }
    if cfg.m0 + g == 0.0 {
        return Err(Error::DegenerateParameters(
            "outer branch slope m0 equals -G: no isolated outer equilibrium".into(),
        ));
    }
    // -G v = m0 (v - Bp) + m1 Bp on the right branch.
    let v = cfg.breakpoint * (cfg.m0 - cfg.m1) / (cfg.m0 + g);
    if !v.is_finite() || v < cfg.breakpoint {
        return Err(Error::DegenerateParameters(format!(
            "outer branch root v = {v} lies outside its branch"
        )));
    }
    Ok(vec![
        State::new(0.0, 0.0, 0.0),
        State::new(v, 0.0, -g * v),
        State::new(-v, 0.0, g * v),
    ])
}

/// One classical fourth-order Runge-Kutta step.
#[inline]
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, x: &[f64; 3], h: f64) -> [f64; 3] {
    let add = |a: &[f64; 3], k: &[f64; 3], s: f64| [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2]];
    let k1 = field.eval(x);
    let k2 = field.eval(&add(x, &k1, 0.5 * h));
    let k3 = field.eval(&add(x, &k2, 0.5 * h));
    let k4 = field.eval(&add(x, &k3, h));
    let mut out = *x;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Advances `x` by `duration` with fixed steps of at most `h`.
pub fn integrate_for<F: VectorField + ?Sized>(field: &F, x: &[f64; 3], duration: f64, h: f64) -> [f64; 3] {
    let steps = (duration / h).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let mut y = *x;
    for _ in 0..steps {
        y = rk4_step(field, &y, dt);
    }
    y
}

/// A directional intersection with one of the two control planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub state: State,
    pub plane: Plane,
}

/// Integrates from `s` to the first directional crossing of either control plane.
pub fn integrate_to_crossing(s: &State, cfg: &SystemConfig, geometry: &SectionGeometry) -> Result<Crossing> {
    integrate_to_crossing_traced(s, cfg, geometry, |_| {})
}

/// Like [`integrate_to_crossing`], reporting every accepted integrator step
/// (and finally the refined crossing state) to `observe`.
pub fn integrate_to_crossing_traced(
    s: &State,
    cfg: &SystemConfig,
    geometry: &SectionGeometry,
    mut observe: impl FnMut(&State),
) -> Result<Crossing> {
    let field = DoubleScroll::new(cfg);
    let h = cfg.step_size;
    let mut x = s.to_array();
    let t0 = s.t;
    let mut elapsed = 0.0;
    check_bound(&x, cfg.blowup_bound)?;
    observe(s);
    while elapsed <= cfg.max_crossing_time {
        let y = rk4_step(&field, &x, h);
        check_bound(&y, cfg.blowup_bound)?;
        for plane in Plane::BOTH {
            let before = geometry.signed_offset(plane, &x);
            let after = geometry.signed_offset(plane, &y);
            if before < 0.0 && after >= 0.0 && (geometry.on_side(plane, &x) || geometry.on_side(plane, &y)) {
                let (dt, z) = refine(&field, &x, h, cfg.crossing_tolerance, |p| geometry.signed_offset(plane, p));
                if geometry.on_side(plane, &z) {
                    let state = State::from_array(z, t0 + elapsed + dt);
                    observe(&state);
                    return Ok(Crossing { state, plane });
                }
            }
        }
        x = y;
        elapsed += h;
        observe(&State::from_array(x, t0 + elapsed));
    }
    Err(Error::CrossingTimeout {
        max_time: cfg.max_crossing_time,
    })
}

fn check_bound(x: &[f64; 3], bound: f64) -> Result<()> {
    let n = norm(x);
    if !n.is_finite() || n > bound {
        return Err(Error::NumericalBlowup { norm: n, bound });
    }
    Ok(())
}

/// Bisection on the sub-step length until the section offset of the
/// post-crossing end lies within `tol`. Returns the sub-step and the point.
fn refine<F: VectorField>(
    field: &F,
    x: &[f64; 3],
    h: f64,
    tol: f64,
    offset: impl Fn(&[f64; 3]) -> f64,
) -> (f64, [f64; 3]) {
    let mut lo = 0.0;
    let mut hi = h;
    let mut y_hi = rk4_step(field, x, h);
    for _ in 0..200 {
        if offset(&y_hi) <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y_mid = rk4_step(field, x, mid);
        if offset(&y_mid) >= 0.0 {
            hi = mid;
            y_hi = y_mid;
        } else {
            lo = mid;
        }
    }
    (hi, y_hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SystemConfig {
        SystemConfig::default()
    }

    #[test]
    fn g_values() {
        let c = cfg();
        assert_eq!(g_piecewise(0.0, &c), 0.0);
        assert!((g_piecewise(1.0, &c) + 0.8).abs() < 1e-15);
        assert!((g_piecewise(2.0, &c) + 1.3).abs() < 1e-15);
        assert!((g_piecewise(-2.0, &c) - 1.3).abs() < 1e-15);
        assert!((g_piecewise(-1.0, &c) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn g_is_continuous_at_breakpoints() {
        let c = cfg();
        for bp in [-1.0, 1.0] {
            let l = g_piecewise(bp - 1e-12, &c);
            let r = g_piecewise(bp + 1e-12, &c);
            assert!((l - r).abs() < 1e-11);
        }
    }

    #[test]
    fn vector_field_examples() {
        let c = cfg();
        let z = vector_field(&State::new(0.0, 0.0, 0.0), &c);
        assert_eq!(z.to_array(), [0.0, 0.0, 0.0]);

        let eq = vector_field(&State::new(1.5, 0.0, -1.05), &c);
        assert!(norm(&eq.to_array()) < 1e-12);

        // ((0.7 * (0 - 1) - (-0.8)) * 9, 0.7 * 1, 0)
        let d = vector_field(&State::new(1.0, 0.0, 0.0), &c).to_array();
        assert!((d[0] - 0.9).abs() < 1e-12);
        assert!((d[1] - 0.7).abs() < 1e-12);
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn equilibria_default() {
        let c = cfg();
        let eqs = equilibria(&c).unwrap();
        let expected = [[0.0, 0.0, 0.0], [1.5, 0.0, -1.05], [-1.5, 0.0, 1.05]];
        assert_eq!(eqs.len(), 3);
        for (e, x) in eqs.iter().zip(expected) {
            let a = e.to_array();
            for i in 0..3 {
                assert!((a[i] - x[i]).abs() < 1e-12, "{a:?} vs {x:?}");
            }
            assert!(vector_field(e, &c).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_outer_slope() {
        let mut c = cfg();
        c.m0 = -c.conductance;
        assert!(matches!(equilibria(&c), Err(Error::DegenerateParameters(_))));
        let mut c = cfg();
        c.m1 = -c.conductance;
        assert!(matches!(equilibria(&c), Err(Error::DegenerateParameters(_))));
    }

    #[test]
    fn rk4_is_exact_enough_on_linear_decay() {
        let decay = |x: &[f64; 3]| [-x[0], -x[1], -x[2]];
        let y = integrate_for(&decay, &[1.0, 2.0, 3.0], 1.0, 0.01);
        let e = (-1.0f64).exp();
        for (k, v) in y.iter().enumerate() {
            assert!((v - (k as f64 + 1.0) * e).abs() < 1e-9);
        }
    }
}
