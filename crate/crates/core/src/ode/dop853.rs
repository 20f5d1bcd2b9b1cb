//! Adaptive Dormand-Prince 8(5,3) stepper with 7th-order dense output.

use super::tableau::{A, B, C, D, E3, E5, INTERPOLATOR_POWER, N_STAGES, N_STAGES_EXTENDED};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// One accepted step with its continuous extension.
#[derive(Clone, Debug)]
pub struct DenseStep<const N: usize> {
    pub t_old: f64,
    pub t_new: f64,
    pub y_old: [f64; N],
    pub y_new: [f64; N],
    f: [[f64; N]; INTERPOLATOR_POWER],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t_new - self.t_old;
        let x = (t - self.t_old) / h;
        let mut y = [0.0; N];
        for (i, f) in self.f.iter().rev().enumerate() {
            for k in 0..N {
                y[k] += f[k];
                y[k] *= if i % 2 == 0 { x } else { 1.0 - x };
            }
        }
        for k in 0..N {
            y[k] += self.y_old[k];
        }
        y
    }
}

/// State of an integration in progress.
pub struct Dop853<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    f: [f64; N],
    h: f64,
    tol: Tolerances,
    pub stats: StepStats,
}

fn axpy<const N: usize>(y: &[f64; N], k: &[[f64; N]], w: &[f64], h: f64) -> [f64; N] {
    let mut out = *y;
    for (kk, &ww) in k.iter().zip(w) {
        if ww != 0.0 {
            for i in 0..N {
                out[i] += h * ww * kk[i];
            }
        }
    }
    out
}

impl<const N: usize> Dop853<N> {
    pub fn new<F: FnMut(f64, &[f64; N]) -> [f64; N]>(fun: &mut F, t0: f64, y0: [f64; N], tol: Tolerances) -> Self {
        let f0 = fun(t0, &y0);
        let mut s = Dop853 { t: t0, y: y0, f: f0, h: 0.0, tol, stats: StepStats { evaluations: 1, ..Default::default() } };
        s.h = s.initial_step(fun);
        s
    }

    /// Restarts from a new state (after a switch) keeping the step size.
    pub fn reset<F: FnMut(f64, &[f64; N]) -> [f64; N]>(&mut self, fun: &mut F, t: f64, y: [f64; N]) {
        self.t = t;
        self.y = y;
        self.f = fun(t, &y);
        self.stats.evaluations += 1;
    }

    fn norm(&self, v: &[f64; N], scale: &[f64; N]) -> f64 {
        (v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt()
    }

    fn initial_step<F: FnMut(f64, &[f64; N]) -> [f64; N]>(&mut self, fun: &mut F) -> f64 {
        let scale: [f64; N] = std::array::from_fn(|i| self.tol.atol + self.y[i].abs() * self.tol.rtol);
        let d0 = self.norm(&self.y, &scale);
        let d1 = self.norm(&self.f, &scale);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: [f64; N] = std::array::from_fn(|i| self.y[i] + h0 * self.f[i]);
        let f1 = fun(self.t + h0, &y1);
        self.stats.evaluations += 1;
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - self.f[i]);
        let d2 = self.norm(&diff, &scale) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1)
    }

    /// Takes one accepted step of at most `h_max`, returning its dense output.
    pub fn step<F: FnMut(f64, &[f64; N]) -> [f64; N]>(&mut self, fun: &mut F, h_max: f64) -> DenseStep<N> {
        let mut rejected = false;
        loop {
            let h = self.h.min(h_max);
            let mut k = [[0.0; N]; N_STAGES_EXTENDED];
            k[0] = self.f;
            for s in 1..N_STAGES {
                let ys = axpy(&self.y, &k[..s], &A[s][..s], h);
                k[s] = fun(self.t + C[s] * h, &ys);
            }
            let y_new = axpy(&self.y, &k[..N_STAGES], &B, h);
            let f_new = fun(self.t + h, &y_new);
            k[N_STAGES] = f_new;
            self.stats.evaluations += N_STAGES;
            let scale: [f64; N] =
                std::array::from_fn(|i| self.tol.atol + self.y[i].abs().max(y_new[i].abs()) * self.tol.rtol);
            let mut e5 = 0.0;
            let mut e3 = 0.0;
            for i in 0..N {
                let mut a5 = 0.0;
                let mut a3 = 0.0;
                for s in 0..=N_STAGES {
                    a5 += k[s][i] * E5[s];
                    a3 += k[s][i] * E3[s];
                }
                e5 += (a5 / scale[i]).powi(2);
                e3 += (a3 / scale[i]).powi(2);
            }
            let denom = e5 + 0.01 * e3;
            let err = if denom > 0.0 { h.abs() * e5 / (denom * N as f64).sqrt() } else { 0.0 };
            if err < 1.0 {
                let mut factor = if err == 0.0 { MAX_FACTOR } else { MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT)) };
                if rejected {
                    factor = factor.min(1.0);
                }
                for s in N_STAGES + 1..N_STAGES_EXTENDED {
                    let ys = axpy(&self.y, &k[..s], &A[s][..s], h);
                    k[s] = fun(self.t + C[s] * h, &ys);
                }
                self.stats.evaluations += N_STAGES_EXTENDED - N_STAGES - 1;
                let mut f = [[0.0; N]; INTERPOLATOR_POWER];
                for i in 0..N {
                    let dy = y_new[i] - self.y[i];
                    f[0][i] = dy;
                    f[1][i] = h * self.f[i] - dy;
                    f[2][i] = 2.0 * dy - h * (f_new[i] + self.f[i]);
                    for (r, drow) in D.iter().enumerate() {
                        f[3 + r][i] = h * drow.iter().zip(&k).map(|(d, kk)| d * kk[i]).sum::<f64>();
                    }
                }
                let dense = DenseStep { t_old: self.t, t_new: self.t + h, y_old: self.y, y_new, f };
                self.t += h;
                self.y = y_new;
                self.f = f_new;
                self.h *= factor;
                self.stats.accepted += 1;
                return dense;
            }
            self.h *= MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
            self.stats.rejected += 1;
            rejected = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_full_period() {
        let mut f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let tol = Tolerances { rtol: 1e-12, atol: 1e-12 };
        let mut s = Dop853::new(&mut f, 0.0, [1.0, 0.0], tol);
        let period = 2.0 * std::f64::consts::PI;
        let mut mid = None;
        while s.t < period {
            let d = s.step(&mut f, period - s.t);
            if d.t_old <= 1.0 && d.t_new > 1.0 {
                mid = Some(d.eval(1.0));
            }
        }
        assert!((s.y[0] - 1.0).abs() < 1e-10 && s.y[1].abs() < 1e-10);
        let m = mid.unwrap();
        assert!((m[0] - 1f64.cos()).abs() < 1e-10 && (m[1] + 1f64.sin()).abs() < 1e-10);
    }
}
