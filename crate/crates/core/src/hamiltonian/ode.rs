#![allow(clippy::excessive_precision)]
//! Explicit Runge–Kutta integration of small real systems `y' = f(t, y)`.
//!
//! The adaptive driver is the Dormand–Prince 8(5,3) pair with Hairer's
//! error norm and step-size control. The fixed-step RK4 driver with one
//! Richardson extrapolation level exists to cross-check the adaptive result.

use crate::error::{Error, Result};

/// Tolerances and limits for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub safety: f64,
}

impl AdaptiveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 200_000,
            safety: 0.9,
        }
    }
}

/// Step statistics reported alongside the solution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

const C2: f64 = 0.526001519587677318785587544488e-1;
const C3: f64 = 0.789002279381515978178381316732e-1;
const C4: f64 = 0.118350341907227396726757197510;
const C5: f64 = 0.281649658092772603273242802490;
const C6: f64 = 0.333333333333333333333333333333;
const C7: f64 = 0.25;
const C8: f64 = 0.307692307692307692307692307692;
const C9: f64 = 0.651282051282051282051282051282;
const C10: f64 = 0.6;
const C11: f64 = 0.857142857142857142857142857142;

const A21: f64 = 5.26001519587677318785587544488e-2;
const A31: f64 = 1.97250569845378994544595329183e-2;
const A32: f64 = 5.91751709536136983633785987549e-2;
const A41: f64 = 2.95875854768068491816892993775e-2;
const A43: f64 = 8.87627564304205475450678981324e-2;
const A51: f64 = 2.41365134159266685502369798665e-1;
const A53: f64 = -8.84549479328286085344864962717e-1;
const A54: f64 = 9.24834003261792003115737966543e-1;
const A61: f64 = 3.7037037037037037037037037037e-2;
const A64: f64 = 1.70828608729473871279604482173e-1;
const A65: f64 = 1.25467687566822425016691814123e-1;
const A71: f64 = 3.7109375e-2;
const A74: f64 = 1.70252211019544039314978060272e-1;
const A75: f64 = 6.02165389804559606850219397283e-2;
const A76: f64 = -1.7578125e-2;
const A81: f64 = 3.70920001185047927108779319836e-2;
const A84: f64 = 1.70383925712239993810214054705e-1;
const A85: f64 = 1.07262030446373284651809199168e-1;
const A86: f64 = -1.53194377486244017527936158236e-2;
const A87: f64 = 8.27378916381402288758473766002e-3;
const A91: f64 = 6.24110958716075717114429577812e-1;
const A94: f64 = -3.36089262944694129406857109825;
const A95: f64 = -8.68219346841726006818189891453e-1;
const A96: f64 = 2.75920996994467083049415600797e1;
const A97: f64 = 2.01540675504778934086186788979e1;
const A98: f64 = -4.34898841810699588477366255144e1;
const A101: f64 = 4.77662536438264365890433908527e-1;
const A104: f64 = -2.48811461997166764192642586468;
const A105: f64 = -5.90290826836842996371446475743e-1;
const A106: f64 = 2.12300514481811942347288949897e1;
const A107: f64 = 1.52792336328824235832596922938e1;
const A108: f64 = -3.32882109689848629194453265587e1;
const A109: f64 = -2.03312017085086261358222928593e-2;
const A111: f64 = -9.3714243008598732571704021658e-1;
const A114: f64 = 5.18637242884406370830023853209;
const A115: f64 = 1.09143734899672957818500254654;
const A116: f64 = -8.14978701074692612513997267357;
const A117: f64 = -1.85200656599969598641566180701e1;
const A118: f64 = 2.27394870993505042818970056734e1;
const A119: f64 = 2.49360555267965238987089396762;
const A1110: f64 = -3.0467644718982195003823669022;
const A121: f64 = 2.27331014751653820792359768449;
const A124: f64 = -1.05344954667372501984066689879e1;
const A125: f64 = -2.00087205822486249909675718444;
const A126: f64 = -1.79589318631187989172765950534e1;
const A127: f64 = 2.79488845294199600508499808837e1;
const A128: f64 = -2.85899827713502369474065508674;
const A129: f64 = -8.87285693353062954433549289258;
const A1210: f64 = 1.23605671757943030647266201528e1;
const A1211: f64 = 6.43392746015763530355970484046e-1;

const B1: f64 = 5.42937341165687622380535766363e-2;
const B6: f64 = 4.45031289275240888144113950566;
const B7: f64 = 1.89151789931450038304281599044;
const B8: f64 = -5.8012039600105847814672114227;
const B9: f64 = 3.1116436695781989440891606237e-1;
const B10: f64 = -1.52160949662516078556178806805e-1;
const B11: f64 = 2.01365400804030348374776537501e-1;
const B12: f64 = 4.47106157277725905176885569043e-2;

const BHH1: f64 = 0.244094488188976377952755905512;
const BHH2: f64 = 0.733846688281611857341361741547;
const BHH3: f64 = 0.220588235294117647058823529412e-1;

const ER1: f64 = 0.1312004499419488073250102996e-1;
const ER6: f64 = -0.1225156446376204440720569753e1;
const ER7: f64 = -0.4957589496572501915214079952;
const ER8: f64 = 0.1664377182454986536961530415e1;
const ER9: f64 = -0.3503288487499736816886487290;
const ER10: f64 = 0.3341791187130174790297318841;
const ER11: f64 = 0.8192320648511571246570742613e-1;
const ER12: f64 = -0.2235530786388629525884427845e-1;

#[inline]
fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

struct Dop853Step<const N: usize> {
    y_new: [f64; N],
    /// Squared-sum error measures (5th order, 3rd order) before normalization.
    err5: f64,
    err3: f64,
    evals: usize,
}

fn dop853_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    opts: &AdaptiveOptions,
) -> Dop853Step<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &combo(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &combo(y, h, &[(A41, k1), (A43, &k3)]));
    let k5 = f(t + C5 * h, &combo(y, h, &[(A51, k1), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + C6 * h, &combo(y, h, &[(A61, k1), (A64, &k4), (A65, &k5)]));
    let k7 = f(
        t + C7 * h,
        &combo(y, h, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
    );
    let k8 = f(
        t + C8 * h,
        &combo(y, h, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]),
    );
    let k9 = f(
        t + C9 * h,
        &combo(
            y,
            h,
            &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)],
        ),
    );
    let k10 = f(
        t + C10 * h,
        &combo(
            y,
            h,
            &[
                (A101, k1),
                (A104, &k4),
                (A105, &k5),
                (A106, &k6),
                (A107, &k7),
                (A108, &k8),
                (A109, &k9),
            ],
        ),
    );
    let k11 = f(
        t + C11 * h,
        &combo(
            y,
            h,
            &[
                (A111, k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ],
        ),
    );
    let y12 = combo(
        y,
        h,
        &[
            (A121, k1),
            (A124, &k4),
            (A125, &k5),
            (A126, &k6),
            (A127, &k7),
            (A128, &k8),
            (A129, &k9),
            (A1210, &k10),
            (A1211, &k11),
        ],
    );
    let k12 = f(t + h, &y12);

    let mut y_new = [0.0; N];
    let mut err5 = 0.0;
    let mut err3 = 0.0;
    for i in 0..N {
        let incr = B1 * k1[i]
            + B6 * k6[i]
            + B7 * k7[i]
            + B8 * k8[i]
            + B9 * k9[i]
            + B10 * k10[i]
            + B11 * k11[i]
            + B12 * k12[i];
        y_new[i] = y[i] + h * incr;
        let sk = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        let e3 = incr - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
        let e5 = ER1 * k1[i]
            + ER6 * k6[i]
            + ER7 * k7[i]
            + ER8 * k8[i]
            + ER9 * k9[i]
            + ER10 * k10[i]
            + ER11 * k11[i]
            + ER12 * k12[i];
        err3 += (e3 / sk).powi(2);
        err5 += (e5 / sk).powi(2);
    }
    Dop853Step {
        y_new,
        err5,
        err3,
        evals: 11,
    }
}

fn initial_step<const N: usize, F>(
    f: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    opts: &AdaptiveOptions,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let scale = |i: usize| opts.atol + opts.rtol * y0[i].abs();
    let norm = |v: &[f64; N]| -> f64 {
        ((0..N).map(|i| (v[i] / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span.abs());
    let y1 = combo(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1).min(span.abs())
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` with the adaptive DOP853 pair.
pub fn integrate_adaptive<const N: usize, F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &AdaptiveOptions,
) -> Result<([f64; N], StepStats)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerances must be positive (rtol = {}, atol = {})",
            opts.rtol, opts.atol
        )));
    }
    let mut stats = StepStats::default();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((y0, stats));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evals += 1;
    let mut h = dir * initial_step(&f, t0, &y0, &k1, span, opts);
    stats.evals += 1;

    const EXPO: f64 = 1.0 / 8.0;
    const FAC_MIN: f64 = 1.0 / 6.0;
    const FAC_MAX: f64 = 1.0 / 0.333;
    let mut last = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        if (t + 1.01 * h - t1) * dir >= 0.0 {
            h = t1 - t;
            last = true;
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let step = dop853_step(&f, t, &y, &k1, h, opts);
        stats.evals += step.evals;
        let mut deno = step.err5 + 0.01 * step.err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * step.err5 * (1.0 / (deno * N as f64)).sqrt();
        if !err.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                reason: "non-finite error estimate".into(),
            });
        }
        let fac11 = err.powf(EXPO);
        let fac = FAC_MIN.max(FAC_MAX.min(fac11 / opts.safety));
        if err <= 1.0 {
            stats.accepted += 1;
            t += h;
            y = step.y_new;
            if last {
                return Ok((y, stats));
            }
            k1 = f(t, &y);
            stats.evals += 1;
            h /= fac;
        } else {
            stats.rejected += 1;
            last = false;
            h /= FAC_MAX.min(fac11 / opts.safety);
        }
    }
}

fn rk4_fixed<const N: usize, F>(f: &F, t0: f64, t1: f64, y0: [f64; N], steps: usize) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &combo(&y, h, &[(0.5, &k1)]));
        let k3 = f(t + 0.5 * h, &combo(&y, h, &[(0.5, &k2)]));
        let k4 = f(t + h, &combo(&y, h, &[(1.0, &k3)]));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Classical RK4 with `steps` and `2·steps` uniform steps, combined by one
/// Richardson level `(16·y_{h/2} − y_h)/15`.
pub fn integrate_richardson<const N: usize, F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    steps: usize,
) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let coarse = rk4_fixed(&f, t0, t1, y0, steps);
    let fine = rk4_fixed(&f, t0, t1, y0, 2 * steps);
    std::array::from_fn(|i| (16.0 * fine[i] - coarse[i]) / 15.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let (y, stats) =
            integrate_adaptive(oscillator, 0.0, 10.0, [1.0, 0.0], &AdaptiveOptions::default())
                .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-11, "{}", y[0] - 10f64.cos());
        assert!((y[1] + 10f64.sin()).abs() < 1e-11);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn backward_integration() {
        let (y, _) =
            integrate_adaptive(oscillator, PI, 0.0, [-1.0, 0.0], &AdaptiveOptions::default())
                .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11 && y[1].abs() < 1e-11);
    }

    #[test]
    fn time_dependent_scalar() {
        // y' = cos(t) y, y(0)=1 → exp(sin t)
        let (y, _) = integrate_adaptive(
            |t, y: &[f64; 1]| [t.cos() * y[0]],
            0.0,
            5.0,
            [1.0],
            &AdaptiveOptions::default(),
        )
        .unwrap();
        assert!((y[0] - 5f64.sin().exp()).abs() < 1e-11);
    }

    #[test]
    fn single_step_is_eighth_order() {
        // Local error of one step scales like h^9 for a smooth scalar problem.
        let f = |t: f64, y: &[f64; 1]| [y[0] * t.sin() + t.cos()];
        let exact = |h: f64| {
            let opts = AdaptiveOptions::with_tol(1e-14);
            integrate_adaptive(f, 0.0, h, [1.0], &opts).unwrap().0[0]
        };
        let opts = AdaptiveOptions::default();
        let one = |h: f64| {
            let k1 = f(0.0, &[1.0]);
            dop853_step(&f, 0.0, &[1.0], &k1, h, &opts).y_new[0]
        };
        let e1 = (one(0.4) - exact(0.4)).abs();
        let e2 = (one(0.2) - exact(0.2)).abs();
        let order = (e1 / e2).log2();
        assert!(order > 8.0, "observed local order {order}");
    }

    #[test]
    fn richardson_matches_closed_form() {
        let y = integrate_richardson(oscillator, 0.0, 2.0 * PI, [1.0, 0.0], 2048);
        assert!((y[0] - 1.0).abs() < 1e-12 && y[1].abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let opts = AdaptiveOptions::with_tol(0.0);
        assert!(integrate_adaptive(oscillator, 0.0, 1.0, [1.0, 0.0], &opts).is_err());
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        let opts = AdaptiveOptions {
            max_steps: 3,
            ..AdaptiveOptions::default()
        };
        let r = integrate_adaptive(oscillator, 0.0, 100.0, [1.0, 0.0], &opts);
        assert!(matches!(r, Err(Error::IntegrationFailure { .. })));
    }
}
