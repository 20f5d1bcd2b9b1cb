//! Direct simulation of the piecewise perturbed systems and the energy
//! displacement after one turn around the switching line `y = 0`.
//!
//! Every family is integrated in the chart where `H = A(x) + C(x) y²`. The
//! unperturbed field is `(H_y, −H_x)`, reversed for the parabolic family, so
//! the upper arc always runs from `A` to `B` and the first-order energy change
//! per turn is `ε M(h)`.

mod dop853;
mod tableau;

pub use dop853::{DenseStep, Dop853, StepStats, Tolerances};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::family::{AnnulusId, FamilyCase, FamilyError, FamilyKind};
use crate::oval::{Curve, OvalError};
use crate::perturbation::{Component, PerturbationSpec, Side};
use crate::scalar::rational_to_f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("more than {0} switching events")]
    EventStall(usize),
    #[error("state norm exceeded {0:e}")]
    Blowup(f64),
    #[error("no return to the switching line before t = {0}")]
    NoReturn(f64),
    #[error("|eps| = {0} is outside the supported range")]
    EpsOutOfRange(f64),
    #[error("the orbit through h = {0} left the annulus")]
    Escaped(f64),
    #[error("start point is critical")]
    CriticalStart,
    #[error(transparent)]
    Oval(#[from] OvalError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeSettings {
    pub rtol: f64,
    pub atol: f64,
    pub max_events: usize,
    pub blowup: f64,
    /// Root tolerance for switching events, in `t`.
    pub event_tol: f64,
    /// Upper bound on the integration time of one half turn.
    pub half_turn_time: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings { rtol: 1e-12, atol: 1e-12, max_events: 1_000_000, blowup: 1e6, event_tol: 1e-12, half_turn_time: 1e4 }
    }
}

type Terms = Vec<(i32, i32, f64)>;

/// The two smooth fields and their switching rule.
#[derive(Clone, Debug)]
pub struct PiecewiseSystem {
    a: [f64; 4],
    c: [f64; 2],
    orientation: f64,
    eps: f64,
    plus: (Terms, Terms),
    minus: (Terms, Terms),
}

fn terms(pert: &PerturbationSpec, side: Side, comp: Component) -> Terms {
    pert.map(side, comp).iter().map(|(&(i, j), c)| (i as i32, j as i32, rational_to_f64(c))).collect()
}

fn poly2(t: &Terms, x: f64, y: f64) -> f64 {
    t.iter().map(|&(i, j, c)| c * x.powi(i) * y.powi(j)).sum()
}

impl PiecewiseSystem {
    pub fn new(case: &FamilyCase, pert: &PerturbationSpec, eps: f64) -> Self {
        let ap = case.a_poly();
        let cp = case.c_poly();
        let a = std::array::from_fn(|k| rational_to_f64(&ap.coeff(k)));
        let c = std::array::from_fn(|k| rational_to_f64(&cp.coeff(k)));
        let orientation = if case.kind() == FamilyKind::ParabolicSegment { -1.0 } else { 1.0 };
        PiecewiseSystem {
            a,
            c,
            orientation,
            eps,
            plus: (terms(pert, Side::Plus, Component::P), terms(pert, Side::Plus, Component::Q)),
            minus: (terms(pert, Side::Minus, Component::P), terms(pert, Side::Minus, Component::Q)),
        }
    }

    pub fn hamiltonian(&self, x: f64, y: f64) -> f64 {
        let a = &self.a;
        ((a[3] * x + a[2]) * x + a[1]) * x + a[0] + (self.c[0] + self.c[1] * x) * y * y
    }

    /// `(H_x, H_y)`.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let a = &self.a;
        let hx = (3.0 * a[3] * x + 2.0 * a[2]) * x + a[1] + self.c[1] * y * y;
        let hy = 2.0 * (self.c[0] + self.c[1] * x) * y;
        (hx, hy)
    }

    /// Field of the branch on `side` (`+1` for `y > 0`, `−1` for `y < 0`).
    pub fn field(&self, side: f64, x: f64, y: f64) -> [f64; 2] {
        let (hx, hy) = self.gradient(x, y);
        let (p, q) = if side > 0.0 { &self.plus } else { &self.minus };
        [
            self.orientation * hy + self.eps * poly2(p, x, y),
            -self.orientation * hx + self.eps * poly2(q, x, y),
        ]
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    /// `(t, x, y)` at every accepted step.
    pub samples: Vec<(f64, f64, f64)>,
    /// `(t, x)` at each crossing of `y = 0`.
    pub events: Vec<(f64, f64)>,
    pub stats: StepStats,
}

/// Integrates with branch switching until `stop` returns true for the number
/// of events seen so far, or `t_max` is reached.
fn integrate(
    sys: &PiecewiseSystem,
    start: (f64, f64),
    t_max: f64,
    settings: &OdeSettings,
    stop_after_events: Option<usize>,
) -> Result<Trajectory, OdeError> {
    let (x0, y0) = start;
    let mut side = if y0 != 0.0 {
        y0.signum()
    } else {
        // On the line the branch is chosen by the direction the orbit leaves it.
        let up = sys.field(1.0, x0, 0.0)[1];
        let down = sys.field(-1.0, x0, 0.0)[1];
        if up > 0.0 {
            1.0
        } else if down < 0.0 {
            -1.0
        } else {
            return Err(OdeError::CriticalStart);
        }
    };
    let tol = Tolerances { rtol: settings.rtol, atol: settings.atol };
    let mut f = |_t: f64, y: &[f64; 2]| sys.field(side, y[0], y[1]);
    let mut stepper = Dop853::new(&mut f, 0.0, [x0, y0], tol);
    let mut traj = Trajectory { samples: vec![(0.0, x0, y0)], ..Default::default() };
    while stepper.t < t_max {
        let dense = {
            let mut f = |_t: f64, y: &[f64; 2]| sys.field(side, y[0], y[1]);
            stepper.step(&mut f, t_max - stepper.t)
        };
        let [x, y] = dense.y_new;
        if x.hypot(y) > settings.blowup {
            return Err(OdeError::Blowup(settings.blowup));
        }
        if y * side < 0.0 {
            let te = locate_crossing(&dense, side, settings.event_tol);
            let xe = dense.eval(te)[0];
            traj.events.push((te, xe));
            traj.samples.push((te, xe, 0.0));
            if traj.events.len() > settings.max_events {
                return Err(OdeError::EventStall(settings.max_events));
            }
            side = -side;
            let mut f = |_t: f64, y: &[f64; 2]| sys.field(side, y[0], y[1]);
            stepper.reset(&mut f, te, [xe, 0.0]);
            if stop_after_events == Some(traj.events.len()) {
                break;
            }
        } else {
            traj.samples.push((dense.t_new, x, y));
        }
    }
    traj.stats = stepper.stats;
    Ok(traj)
}

/// Root of `y(t)` on the dense output, bracketed by the step.
fn locate_crossing(d: &DenseStep<2>, side: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (d.t_old, d.t_new);
    let g = |t: f64| d.eval(t)[1] * side;
    // The step starts on the active side (or exactly on the line after a switch).
    let mut glo = g(lo);
    if glo < 0.0 {
        glo = 0.0;
    }
    let ghi = g(hi);
    // Regula falsi (Illinois) with a bisection safeguard.
    let (mut fa, mut fb) = (glo.max(f64::MIN_POSITIVE), ghi);
    let mut last = 0;
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + hi.abs()) {
            break;
        }
        let mut m = hi - fb * (hi - lo) / (fb - fa);
        if !(m > lo && m < hi) {
            m = 0.5 * (lo + hi);
        }
        let fm = g(m);
        if fm > 0.0 {
            lo = m;
            fa = fm;
            if last == -1 {
                fb *= 0.5;
            }
            last = -1;
        } else {
            hi = m;
            fb = fm;
            if last == 1 {
                fa *= 0.5;
            }
            last = 1;
        }
    }
    hi
}

pub fn flow_piecewise(
    case: &FamilyCase,
    pert: &PerturbationSpec,
    eps: f64,
    start: (f64, f64),
    t_max: f64,
    settings: &OdeSettings,
) -> Result<Trajectory, OdeError> {
    if eps.abs() > 0.05 {
        return Err(OdeError::EpsOutOfRange(eps));
    }
    let sys = PiecewiseSystem::new(case, pert, eps);
    let (hx, hy) = sys.gradient(start.0, start.1);
    if hx.hypot(hy) < 1e-13 {
        return Err(OdeError::CriticalStart);
    }
    integrate(&sys, start, t_max, settings, None)
}

/// `H(end) − h` after one full piecewise turn from `(x_A(h), 0)`.
pub fn displacement_map(
    case: &FamilyCase,
    annulus: AnnulusId,
    pert: &PerturbationSpec,
    eps: f64,
    h: f64,
    settings: &OdeSettings,
) -> Result<f64, OdeError> {
    if eps.abs() > 0.05 {
        return Err(OdeError::EpsOutOfRange(eps));
    }
    let curve = Curve::<f64>::new(case, annulus)?;
    let ends = curve.endpoints(h)?;
    let sys = PiecewiseSystem::new(case, pert, eps);
    let start = (ends.x_a, 0.0);
    // Orbits inside the annulus return in bounded time.
    let traj = match integrate(&sys, start, 2.0 * settings.half_turn_time, settings, Some(2)) {
        Err(OdeError::Blowup(_)) => return Err(OdeError::Escaped(h)),
        r => r?,
    };
    let Some(&(_, x_end)) = traj.events.get(1) else {
        return Err(if eps == 0.0 { OdeError::NoReturn(2.0 * settings.half_turn_time) } else { OdeError::Escaped(h) });
    };
    let h_end = sys.hamiltonian(x_end, 0.0);
    let (lo, hi) = curve.bounds();
    if !(h_end > lo && h_end < hi) {
        return Err(OdeError::Escaped(h));
    }
    let back = curve.endpoints(h_end)?;
    if (x_end - back.x_a).abs() > (x_end - back.x_b).abs() {
        return Err(OdeError::Escaped(h));
    }
    Ok(h_end - sys.hamiltonian(start.0, 0.0))
}

/// Energies where the displacement changes sign on a uniform grid that keeps
/// `0.05·length` away from both ends of the annulus, refined by bisection.
/// Grid points whose orbit escapes the annulus are gaps: no bracket spans them.
pub fn detect_limit_cycles(
    case: &FamilyCase,
    pert: &PerturbationSpec,
    eps: f64,
    annulus: AnnulusId,
    grid: usize,
    settings: &OdeSettings,
) -> Result<Vec<f64>, OdeError> {
    let iv = case.annulus(annulus)?;
    let (lo, hi) = (iv.lo::<f64>(), iv.hi::<f64>());
    let margin = 0.05 * (hi - lo);
    let (a, b) = (lo + margin, hi - margin);
    let n = grid.max(2);
    let hs: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect();
    let disp = |h: f64| displacement_map(case, annulus, pert, eps, h, settings);
    let vals: Vec<Option<f64>> = hs
        .par_iter()
        .map(|&h| match disp(h) {
            Ok(d) => Ok(Some(d)),
            Err(OdeError::Escaped(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for k in 0..n - 1 {
        let (Some(v0), Some(v1)) = (vals[k], vals[k + 1]) else { continue };
        if v0 == 0.0 {
            out.push(hs[k]);
            continue;
        }
        if v0 * v1 < 0.0 {
            let (mut l, mut r, mut fl) = (hs[k], hs[k + 1], v0);
            for _ in 0..40 {
                if r - l < 1e-9 * (b - a) {
                    break;
                }
                let m = 0.5 * (l + r);
                let Ok(fm) = disp(m) else { break };
                if fm * fl > 0.0 {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            out.push(0.5 * (l + r));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn unperturbed_parabolic_reaches_the_right_endpoint() {
        let case = FamilyCase::parabolic();
        let pert = PerturbationSpec::zero(2);
        let ends = Curve::<f64>::new(&case, AnnulusId::Sole).unwrap().endpoints(-1.0).unwrap();
        let sys = PiecewiseSystem::new(&case, &pert, 0.0);
        let traj = integrate(&sys, (ends.x_a, 0.0), 1e4, &OdeSettings::default(), Some(1)).unwrap();
        assert!((traj.events[0].1 - (2.0 + 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn closed_orbits_without_perturbation() {
        let pert = PerturbationSpec::zero(3);
        for case in [FamilyCase::elliptic(int(1)).unwrap(), FamilyCase::parabolic(), FamilyCase::triangle()] {
            let an = case.primary_annulus();
            for h in an.interior_grid::<f64>(4, 0.0) {
                let d = displacement_map(&case, an.id, &pert, 0.0, h, &OdeSettings::default()).unwrap();
                assert!(d.abs() < 1e-8, "{} h={h} d={d}", case.label());
            }
        }
    }

    #[test]
    fn positive_melnikov_gives_positive_displacement() {
        for case in [FamilyCase::elliptic(int(1)).unwrap(), FamilyCase::parabolic(), FamilyCase::triangle()] {
            let an = case.primary_annulus();
            let pert = PerturbationSpec::zero(2).with(Side::Plus, Component::Q, 0, 0, int(1));
            for h in an.interior_grid::<f64>(3, 0.05 * an.length::<f64>()) {
                let d = displacement_map(&case, an.id, &pert, 1e-3, h, &OdeSettings::default()).unwrap();
                assert!(d > 0.0, "{} h={h} d={d}", case.label());
            }
        }
    }
}
