//! Adaptive Gauss–Kronrod quadrature and the modified Bessel function I₀.
//!
//! The integrator uses the 21-point Kronrod extension of the 10-point Gauss
//! rule with QUADPACK's error heuristic, and bisects the interval with the
//! largest error until the global tolerance is met. Integrands may return a
//! vector of values: alternating binomial sums need every term on the same
//! nodes, and sharing the nodes is also much cheaper than integrating each term
//! separately. Semi-infinite ranges are mapped onto [0, 1) with
//! x = a + t/(1 − t).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("no convergence after {intervals} subintervals (value {partial:e}, error {error:e})")]
    NotConverged {
        partial: f64,
        error: f64,
        intervals: usize,
    },
    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },
    #[error("invalid integration domain [{a}, {b}]")]
    InvalidDomain { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub const fn new(rel_tol: f64, abs_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            abs_tol,
            max_intervals: 2000,
        }
    }

    /// Tolerances for inner integrals, which feed outer integrands.
    pub const fn inner() -> Self {
        QuadOptions::new(1e-8, 1e-12)
    }

    /// Tolerances for outer expectations.
    pub const fn outer() -> Self {
        QuadOptions::new(1e-6, 1e-12)
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions::inner()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecEstimate {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_982_861_305_016,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
}

/// One 21-point Gauss–Kronrod panel over [a, b] for a vector integrand.
fn gk21<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Vec<f64>; 21]) -> Result<Panel, QuadError>
where
    F: FnMut(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for (i, slot) in buf.iter_mut().enumerate() {
        let x = if i < 10 {
            c - h * XGK[i]
        } else if i == 10 {
            c
        } else {
            c + h * XGK[20 - i]
        };
        slot.iter_mut().for_each(|v| *v = 0.0);
        f(x, slot);
        if slot.iter().any(|v| !v.is_finite()) {
            return Err(QuadError::NonFinite { at: x });
        }
    }
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for d in 0..dim {
        let node = |i: usize| buf[i][d];
        let mut kron = WGK[10] * node(10);
        let mut gauss = 0.0;
        let mut absk = WGK[10] * node(10).abs();
        for k in 0..10 {
            let pair = node(k) + node(20 - k);
            kron += WGK[k] * pair;
            absk += WGK[k] * (node(k).abs() + node(20 - k).abs());
            if k % 2 == 1 {
                gauss += WG[k / 2] * pair;
            }
        }
        let mean = 0.5 * kron;
        let mut asc = WGK[10] * (node(10) - mean).abs();
        for k in 0..10 {
            asc += WGK[k] * ((node(k) - mean).abs() + (node(20 - k) - mean).abs());
        }
        let value = kron * h;
        let resabs = absk * h.abs();
        let resasc = asc * h.abs();
        let mut err = ((kron - gauss) * h).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        values[d] = value;
        errors[d] = err;
    }
    Ok(Panel { a, b, values, errors })
}

/// Adaptive integration of a vector-valued integrand over [a, b].
///
/// `b` may be `f64::INFINITY`. `breaks` are interior points where the
/// integrand has kinks or jumps; they seed the initial partition. Every
/// component must satisfy `err ≤ max(abs_tol, rel_tol·|value|)`.
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<VecEstimate, QuadError>
where
    F: FnMut(f64, &mut [f64]),
{
    if a.is_nan() || b.is_nan() || a > b || a.is_infinite() {
        return Err(QuadError::InvalidDomain { a, b });
    }
    if a == b || dim == 0 {
        return Ok(VecEstimate {
            values: vec![0.0; dim],
            errors: vec![0.0; dim],
            evaluations: 0,
        });
    }
    if b.is_infinite() {
        // x = a + t/(1-t), dx = dt/(1-t)^2
        let mapped_breaks: Vec<f64> = breaks
            .iter()
            .filter(|&&x| x > a && x.is_finite())
            .map(|&x| (x - a) / (1.0 + x - a))
            .collect();
        let mapped = move |t: f64, out: &mut [f64]| {
            let s = 1.0 - t;
            if s <= 0.0 {
                return;
            }
            f(a + t / s, out);
            let jac = 1.0 / (s * s);
            out.iter_mut().for_each(|v| {
                if *v != 0.0 {
                    *v *= jac;
                }
            });
        };
        return integrate_finite(mapped, dim, 0.0, 1.0, &mapped_breaks, opts);
    }
    integrate_finite(f, dim, a, b, breaks, opts)
}

fn integrate_finite<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<VecEstimate, QuadError>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut buf: [Vec<f64>; 21] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut panels = Vec::new();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            panels.push(gk21(&mut f, w[0], w[1], dim, &mut buf)?);
        }
    }
    let mut evaluations = 21 * panels.len();

    loop {
        let mut total = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        for p in &panels {
            for d in 0..dim {
                total[d] += p.values[d];
                err[d] += p.errors[d];
            }
        }
        let tol: Vec<f64> = total
            .iter()
            .map(|v| opts.abs_tol.max(opts.rel_tol * v.abs()))
            .collect();
        if (0..dim).all(|d| err[d] <= tol[d]) {
            return Ok(VecEstimate {
                values: total,
                errors: err,
                evaluations,
            });
        }
        if panels.len() >= opts.max_intervals {
            let worst = (0..dim)
                .max_by(|&i, &j| (err[i] / tol[i]).total_cmp(&(err[j] / tol[j])))
                .unwrap_or(0);
            return Err(QuadError::NotConverged {
                partial: total[worst],
                error: err[worst],
                intervals: panels.len(),
            });
        }
        let score = |p: &Panel| {
            (0..dim)
                .map(|d| p.errors[d] / tol[d])
                .fold(0.0f64, f64::max)
        };
        let (idx, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, score(p)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("at least one panel");
        let worst = panels.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval can no longer be split in floating point.
            let d = (0..dim)
                .max_by(|&i, &j| (err[i] / tol[i]).total_cmp(&(err[j] / tol[j])))
                .unwrap_or(0);
            return Err(QuadError::NotConverged {
                partial: total[d],
                error: err[d],
                intervals: panels.len() + 1,
            });
        }
        panels.push(gk21(&mut f, worst.a, mid, dim, &mut buf)?);
        panels.push(gk21(&mut f, mid, worst.b, dim, &mut buf)?);
        evaluations += 42;
    }
}

/// Adaptive integration of a scalar integrand with optional breakpoints.
pub fn integrate_with_breaks<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<Estimate, QuadError>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out| out[0] = f(x), 1, a, b, breaks, opts)?;
    Ok(Estimate {
        value: r.values[0],
        error: r.errors[0],
        evaluations: r.evaluations,
    })
}

/// Adaptive integration of a scalar integrand over [a, b], `b` possibly infinite.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate, QuadError>
where
    F: FnMut(f64) -> f64,
{
    integrate_with_breaks(f, a, b, &[], opts)
}

/// ∫_a^b ∫_{lo(x)}^{hi(x)} f(x, y) dy dx. The inner integral runs with
/// `inner` tolerances; its failures abort the outer integral.
pub fn integrate_2d_nested<F, D>(
    mut f: F,
    a: f64,
    b: f64,
    mut inner_domain: D,
    outer: &QuadOptions,
    inner: &QuadOptions,
) -> Result<Estimate, QuadError>
where
    F: FnMut(f64, f64) -> f64,
    D: FnMut(f64) -> (f64, f64, Vec<f64>),
{
    let mut failure: Option<QuadError> = None;
    let res = integrate(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            let (lo, hi, breaks) = inner_domain(x);
            if !(hi > lo) {
                return 0.0;
            }
            match integrate_with_breaks(|y| f(x, y), lo, hi, &breaks, inner) {
                Ok(e) => e.value,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        a,
        b,
        outer,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    res
}

/// Neumaier-compensated sum, for alternating series whose terms cancel.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 20.0 {
        i0_series(x)
    } else {
        x.exp() * i0_asymptotic_scaled(x)
    }
}

/// e^{-x}·I₀(x), finite for every x ≥ 0.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x <= 20.0 {
        (-x).exp() * i0_series(x)
    } else {
        i0_asymptotic_scaled(x)
    }
}

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > f64::EPSILON * 1e-3 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn i0_asymptotic_scaled(x: f64) -> f64 {
    // e^{-x} I0(x) ~ (2πx)^{-1/2} Σ ((2k-1)!!)² / (k! (8x)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < f64::EPSILON * 1e-2 * sum {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tight() -> QuadOptions {
        QuadOptions::new(1e-10, 1e-14)
    }

    #[test]
    fn exponential_tail() {
        let r = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_normalization() {
        let r = integrate(|x| x * (-0.5 * x * x).exp(), 0.0, f64::INFINITY, &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &tight()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn rician_normalization_against_grid_sum() {
        let (sigma, w): (f64, f64) = (10.0, 15.0);
        let s2 = sigma * sigma;
        let pdf = |v: f64| (v / s2) * (-(v - w).powi(2) / (2.0 * s2)).exp() * bessel_i0_scaled(v * w / s2);
        let r = integrate(pdf, 0.0, f64::INFINITY, &tight()).unwrap();
        // Independent oracle: midpoint sum on a fine grid out to 20σ beyond w.
        let n = 400_000;
        let top = w + 20.0 * sigma;
        let h = top / n as f64;
        let grid: f64 = (0..n).map(|i| pdf((i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((grid - 1.0).abs() < 1e-8);
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let step = |x: f64| if x < 1.0 / 3.0 { 1.0 } else { 2.0 };
        let r = integrate_with_breaks(step, 0.0, 1.0, &[1.0 / 3.0], &tight()).unwrap();
        assert!((r.value - (1.0 / 3.0 + 4.0 / 3.0)).abs() < 1e-13);
        assert!(r.evaluations <= 42);
    }

    #[test]
    fn vector_components_share_nodes() {
        let r = integrate_vec(
            |x, out| {
                out[0] = (-x).exp();
                out[1] = (-2.0 * x).exp();
                out[2] = (-3.0 * x).exp();
            },
            3,
            0.0,
            f64::INFINITY,
            &[],
            &tight(),
        )
        .unwrap();
        for (k, v) in r.values.iter().enumerate() {
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn non_convergence_carries_partial_value() {
        let opts = QuadOptions {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_intervals: 4,
        };
        let err = integrate(|x: f64| (1.0 / x.sqrt()).sin() / x.sqrt(), 1e-12, 1.0, &opts).unwrap_err();
        match err {
            QuadError::NotConverged { partial, intervals, .. } => {
                assert!(partial.is_finite());
                assert_eq!(intervals, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &tight()).unwrap_err();
        assert!(matches!(err, QuadError::NonFinite { .. }));
    }

    #[test]
    fn nested_separable() {
        let r = integrate_2d_nested(
            |x, y| (-x).exp() * (-y).exp(),
            0.0,
            f64::INFINITY,
            |_| (0.0, f64::INFINITY, vec![]),
            &QuadOptions::outer(),
            &QuadOptions::inner(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nested_zero() {
        let r = integrate_2d_nested(
            |_, _| 0.0,
            0.0,
            1.0,
            |_| (0.0, 1.0, vec![]),
            &QuadOptions::outer(),
            &QuadOptions::inner(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn nested_rician_mixture_against_grid() {
        // w ~ Rayleigh(1), v | w ~ Rician(w, 1): total mass 1.
        let f = |w: f64, v: f64| {
            w * (-0.5 * w * w).exp() * v * (-0.5 * (v - w).powi(2)).exp() * bessel_i0_scaled(v * w)
        };
        let r = integrate_2d_nested(
            f,
            0.0,
            12.0,
            |w| ((w - 12.0).max(0.0), w + 12.0, vec![]),
            &QuadOptions::outer(),
            &QuadOptions::inner(),
        )
        .unwrap();
        let n = 1200;
        let h = 24.0 / n as f64;
        let mut grid = 0.0;
        for i in 0..n / 2 {
            let w = (i as f64 + 0.5) * h;
            for k in 0..n {
                let v = (k as f64 + 0.5) * h;
                grid += f(w, v);
            }
        }
        grid *= h * h;
        assert!((grid - 1.0).abs() < 1e-4);
        assert!((r.value - grid).abs() < 1e-4);
        assert!((r.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(v, 2.0);
    }

    #[test]
    fn bessel_reference_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-12);
        // I0(10) = 2815.716628466254
        assert!((bessel_i0(10.0) / 2_815.716_628_466_254 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_large_argument_is_scaled() {
        let s = bessel_i0_scaled(50.0);
        let leading = 1.0 / (2.0 * std::f64::consts::PI * 50.0).sqrt();
        assert!(s.is_finite());
        assert!((s / leading - 1.0).abs() < 5e-3);
        assert!(bessel_i0(50.0).is_finite());
        assert!(bessel_i0_scaled(800.0).is_finite());
        assert!(bessel_i0(800.0).is_infinite());
    }

    #[test]
    fn bessel_branches_agree_at_switch() {
        let below = (-20.0f64).exp() * i0_series(20.0);
        let above = i0_asymptotic_scaled(20.0);
        assert!((below / above - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn linearity(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, c in 0.1f64..4.0) {
            let opts = QuadOptions::new(1e-10, 1e-13);
            let f = |x: f64| (-c * x).exp();
            let g = |x: f64| x.sin() / (1.0 + x * x);
            let lhs = integrate(|x| alpha * f(x) + beta * g(x), 0.0, 5.0, &opts).unwrap().value;
            let rf = integrate(f, 0.0, 5.0, &opts).unwrap().value;
            let rg = integrate(g, 0.0, 5.0, &opts).unwrap().value;
            let tol = 2.0 * (1e-10 * (alpha.abs() * rf.abs() + beta.abs() * rg.abs()) + 1e-13);
            prop_assert!((lhs - alpha * rf - beta * rg).abs() <= tol.max(1e-12));
        }

        #[test]
        fn semi_infinite_matches_truncation(c in 0.05f64..2.0) {
            let opts = QuadOptions::new(1e-10, 1e-14);
            let inf = integrate(|x| (-c * x).exp(), 0.0, f64::INFINITY, &opts).unwrap().value;
            let trunc = integrate(|x| (-c * x).exp(), 0.0, 2000.0, &opts).unwrap().value;
            prop_assert!((inf - trunc).abs() <= 1e-8 * inf);
        }

        #[test]
        fn bessel_series_recurrence(x in 0.0f64..60.0) {
            // Scaled I0 is positive, nonincreasing, and above the leading asymptote.
            let s = bessel_i0_scaled(x);
            prop_assert!(s > 0.0 && s <= 1.0);
            prop_assert!(bessel_i0_scaled(x + 0.5) <= s);
        }
    }
}
