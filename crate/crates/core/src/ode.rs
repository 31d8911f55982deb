//! Adaptive Dormand-Prince 5(4) integrator with dense output.
//!
//! The right-hand sides in this crate are smooth and non-stiff, so an
//! explicit embedded Runge-Kutta pair with the classical 4th-order dense
//! interpolant is the right tool. Integration can run forward or backward
//! in the independent variable.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const MAX_STEPS: usize = 4_000_000;

#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    r1: [f64; N],
    r2: [f64; N],
    r3: [f64; N],
    r4: [f64; N],
    r5: [f64; N],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.r1[i]
                + th * (self.r2[i] + th1 * (self.r3[i] + th * (self.r4[i] + th1 * self.r5[i])));
        }
        out
    }
}

/// Continuously evaluable solution of one initial value problem.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    segments: Vec<Segment<N>>,
    t_start: f64,
    t_end: f64,
    y_end: [f64; N],
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn y_end(&self) -> [f64; N] {
        self.y_end
    }

    /// Evaluate the interpolated solution. `t` is clamped to the solved span.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let forward = self.t_end >= self.t_start;
        let idx = self.segments.partition_point(|s| {
            if forward {
                s.t0 + s.h < t
            } else {
                s.t0 + s.h > t
            }
        });
        let idx = idx.min(self.segments.len() - 1);
        self.segments[idx].eval(t)
    }
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` (either direction) and
/// record dense output. Tolerances are applied per component with
/// `atol + rtol * |y|` scaling.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    rtol: f64,
    atol: f64,
) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    if span == 0.0 {
        return Ok(DenseSolution {
            segments: vec![Segment {
                t0,
                h: 1.0,
                r1: y0,
                r2: [0.0; N],
                r3: [0.0; N],
                r4: [0.0; N],
                r5: [0.0; N],
            }],
            t_start: t0,
            t_end: t1,
            y_end: y0,
        });
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = dir * (span / 100.0).min(1e-2).max(1e-10);
    let mut segments = Vec::new();

    for _ in 0..MAX_STEPS {
        if (t - t1).abs() < 1e-300 || dir * (t - t1) >= 0.0 {
            break;
        }
        if dir * (t + h - t1) > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::numeric("ode: step size underflow", h.abs()));
        }

        let mut yt = [0.0; N];
        for i in 0..N {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = f(t + C2 * h, &yt);
        for i in 0..N {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(t + C3 * h, &yt);
        for i in 0..N {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(t + C4 * h, &yt);
        for i in 0..N {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(t + C5 * h, &yt);
        for i in 0..N {
            yt[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(t + h, &yt);
        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let k7 = f(t + h, &y_new);

        // embedded error estimate
        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
            let r = e / scale;
            err_sq += r * r;
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // accept: build the dense interpolant for this step
            let mut seg = Segment {
                t0: t,
                h,
                r1: y,
                r2: [0.0; N],
                r3: [0.0; N],
                r4: [0.0; N],
                r5: [0.0; N],
            };
            for i in 0..N {
                let dy = y_new[i] - y[i];
                seg.r2[i] = dy;
                seg.r3[i] = h * k1[i] - dy;
                seg.r4[i] = dy - h * k7[i] - seg.r3[i];
                seg.r5[i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            segments.push(seg);
            t += h;
            y = y_new;
            k1 = k7;
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }

    if dir * (t - t1) < 0.0 {
        return Err(Error::numeric("ode: max step count exceeded", (t1 - t).abs()));
    }
    Ok(DenseSolution {
        segments,
        t_start: t0,
        t_end: t1,
        y_end: y,
    })
}
