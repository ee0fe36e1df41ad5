//! Dormand–Prince 8(5,3) explicit Runge–Kutta with embedded error control.
//!
//! Steps are clipped so the integrator lands exactly on every requested
//! output time and on every coefficient breakpoint; no dense output is used.
//! Within a sub-interval `[lo, hi]` the right-hand side is evaluated with
//! [`Side::Left`] at `hi` and [`Side::Right`] elsewhere, so jumps are seen from
//! the correct side.

// Tableau constants are quoted at their published precision.
#![allow(clippy::excessive_precision)]

use crate::coefficients::Side;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853Config {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dop853Config {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dop853Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

const SAFE: f64 = 0.9;
const FACC1: f64 = 1.0 / 0.33;
const FACC2: f64 = 1.0 / 6.0;
const EXPO1: f64 = 1.0 / 8.0;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;
const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;
const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;
const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

/// Integrates `y' = f(t, side, y)` from `(t0, y0)` through `out_times`
/// (monotone in the direction of travel), stopping exactly at each
/// `breakpoints` entry crossed on the way. Returns the state at every output time.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    out_times: &[f64],
    breakpoints: &[f64],
    cfg: &Dop853Config,
) -> Result<(Vec<[f64; N]>, Dop853Stats)>
where
    F: FnMut(f64, Side, &[f64; N], &mut [f64; N]),
{
    let mut stats = Dop853Stats::default();
    let mut out = Vec::with_capacity(out_times.len());
    let Some(&t_last) = out_times.last() else {
        return Ok((out, stats));
    };
    let dir = if t_last >= t0 { 1.0 } else { -1.0 };
    let mut prev = t0;
    for &t in out_times {
        if (t - prev) * dir < 0.0 {
            return Err(Error::InvalidInput(format!(
                "output times must be monotone in the direction of integration (got {t} after {prev})"
            )));
        }
        prev = t;
    }

    // Stop points: output times and breakpoints strictly between t0 and t_last.
    let mut stops: Vec<f64> = out_times.to_vec();
    stops.extend(breakpoints.iter().copied().filter(|b| (b - t0) * dir > 0.0 && (t_last - b) * dir > 0.0));
    stops.sort_by(|a, b| (a * dir).partial_cmp(&(b * dir)).unwrap());
    stops.dedup();

    let mut t = t0;
    let mut y = y0;
    let mut h = 0.0;
    let mut out_iter = out_times.iter().peekable();
    while let Some(&&t_out) = out_iter.peek() {
        if t_out != t0 {
            break;
        }
        out.push(y);
        out_iter.next();
    }
    for &stop in &stops {
        if stop == t {
            while out_iter.peek() == Some(&&stop) {
                out.push(y);
                out_iter.next();
            }
            continue;
        }
        let hi = t.max(stop);
        let side = |s: f64| if s >= hi { Side::Left } else { Side::Right };
        let mut k1 = [0.0; N];
        f(t, side(t), &y, &mut k1);
        stats.evals += 1;
        if h == 0.0 {
            h = initial_step(&mut f, t, &y, &k1, dir, cfg, &side, &mut stats);
        }
        loop {
            let remaining = stop - t;
            if remaining * dir <= 0.0 {
                break;
            }
            let mut landing = false;
            let mut hh = dir * h.abs().min(cfg.h_max);
            if hh.abs() >= remaining.abs() * (1.0 - 1e-12) {
                hh = remaining;
                landing = true;
            }
            if hh.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t });
            }
            if stats.accepted + stats.rejected >= cfg.max_steps {
                return Err(Error::TooManySteps {
                    steps: stats.accepted + stats.rejected,
                    t,
                });
            }
            let t_new = if landing { stop } else { t + hh };
            let step = dop853_step(&mut f, t, &y, &k1, hh, t_new, cfg, &side);
            stats.evals += 11;
            let err = step.err;
            let fac11 = err.powf(EXPO1);
            let fac = FACC2.max(FACC1.min(fac11 / SAFE));
            if err <= 1.0 {
                stats.accepted += 1;
                y = step.y_new;
                t = t_new;
                f(t, side(t), &y, &mut k1);
                stats.evals += 1;
                let h_new = hh / fac;
                // A landing step may be artificially short; keep the larger proposal.
                h = if landing { h.abs().max(h_new.abs()) } else { h_new.abs() };
            } else {
                stats.rejected += 1;
                h = (hh / FACC1.min(fac11 / SAFE)).abs();
            }
        }
        while out_iter.peek() == Some(&&stop) {
            out.push(y);
            out_iter.next();
        }
    }
    Ok((out, stats))
}

struct StepResult<const N: usize> {
    y_new: [f64; N],
    err: f64,
}

#[allow(clippy::too_many_arguments)]
fn initial_step<const N: usize, F, S>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    dir: f64,
    cfg: &Dop853Config,
    side: &S,
    stats: &mut Dop853Stats,
) -> f64
where
    F: FnMut(f64, Side, &[f64; N], &mut [f64; N]),
    S: Fn(f64) -> Side,
{
    let sk: Vec<f64> = y.iter().map(|v| cfg.atol + cfg.rtol * v.abs()).collect();
    let dnf: f64 = k1.iter().zip(&sk).map(|(k, s)| (k / s).powi(2)).sum();
    let dny: f64 = y.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum();
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(cfg.h_max);
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y[i] + dir * h * k1[i];
    }
    let mut k2 = [0.0; N];
    f(t + dir * h, side(t + dir * h), &y1, &mut k2);
    stats.evals += 1;
    let der2 = k2
        .iter()
        .zip(k1)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        .sqrt()
        / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    (100.0 * h).min(h1).min(cfg.h_max)
}

#[allow(clippy::too_many_arguments)]
fn dop853_step<const N: usize, F, S>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    t_new: f64,
    cfg: &Dop853Config,
    side: &S,
) -> StepResult<N>
where
    F: FnMut(f64, Side, &[f64; N], &mut [f64; N]),
    S: Fn(f64) -> Side,
{
    let mut stage = |c: f64, terms: &[(f64, &[f64; N])], out: &mut [f64; N]| {
        let mut ys = *y;
        for (a, k) in terms {
            for i in 0..N {
                ys[i] += h * a * k[i];
            }
        }
        let ts = t + c * h;
        f(ts, side(ts), &ys, out);
    };
    let mut k2 = [0.0; N];
    let mut k3 = [0.0; N];
    let mut k4 = [0.0; N];
    let mut k5 = [0.0; N];
    let mut k6 = [0.0; N];
    let mut k7 = [0.0; N];
    let mut k8 = [0.0; N];
    let mut k9 = [0.0; N];
    let mut k10 = [0.0; N];
    let mut k11 = [0.0; N];
    let mut k12 = [0.0; N];
    stage(C2, &[(A21, k1)], &mut k2);
    stage(C3, &[(A31, k1), (A32, &k2)], &mut k3);
    stage(C4, &[(A41, k1), (A43, &k3)], &mut k4);
    stage(C5, &[(A51, k1), (A53, &k3), (A54, &k4)], &mut k5);
    stage(C6, &[(A61, k1), (A64, &k4), (A65, &k5)], &mut k6);
    stage(C7, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)], &mut k7);
    stage(C8, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)], &mut k8);
    stage(
        C9,
        &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)],
        &mut k9,
    );
    stage(
        C10,
        &[(A101, k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)],
        &mut k10,
    );
    stage(
        C11,
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
        &mut k11,
    );
    let mut yy1 = *y;
    for i in 0..N {
        yy1[i] += h
            * (A121 * k1[i]
                + A124 * k4[i]
                + A125 * k5[i]
                + A126 * k6[i]
                + A127 * k7[i]
                + A128 * k8[i]
                + A129 * k9[i]
                + A1210 * k10[i]
                + A1211 * k11[i]);
    }
    f(t_new, side(t_new), &yy1, &mut k12);

    let mut y_new = *y;
    let mut err = 0.0;
    let mut err2 = 0.0;
    for i in 0..N {
        let slope = B1 * k1[i] + B6 * k6[i] + B7 * k7[i] + B8 * k8[i] + B9 * k9[i] + B10 * k10[i] + B11 * k11[i] + B12 * k12[i];
        y_new[i] = y[i] + h * slope;
        let sk = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
        let e5 = slope - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
        err2 += (e5 / sk).powi(2);
        let e8 = ER1 * k1[i]
            + ER6 * k6[i]
            + ER7 * k7[i]
            + ER8 * k8[i]
            + ER9 * k9[i]
            + ER10 * k10[i]
            + ER11 * k11[i]
            + ER12 * k12[i];
        err += (e8 / sk).powi(2);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err * (1.0 / (deno * N as f64)).sqrt();
    StepResult { y_new, err }
}
