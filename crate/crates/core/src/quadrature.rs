//! Numerical integration helpers: globally adaptive 7/15-point
//! Gauss-Kronrod for smooth integrands, and composite Simpson for data
//! already sampled on a uniform grid.

#![allow(clippy::excessive_precision)]

// Kronrod abscissae on [0, 1]; the odd-indexed ones are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default relative tolerance for every internal quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const MAX_SUBDIVISIONS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    /// False when the subdivision budget ran out before the tolerance was met.
    pub converged: bool,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` until the estimated error is below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_error: 0.0,
            converged: true,
        };
    }
    let (v, e) = kronrod15(&mut f, a, b);
    // (lo, hi, value, error)
    let mut segments = vec![(a, b, v, e)];
    let mut total = v;
    let mut error = e;
    while error > abs_tol.max(rel_tol * total.abs()) {
        if !total.is_finite() || segments.len() >= MAX_SUBDIVISIONS {
            return QuadResult {
                value: total,
                abs_error: error,
                converged: false,
            };
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, v0, e0) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval can no longer be split in floating point
            segments.push((lo, hi, v0, 0.0));
            error -= e0;
            continue;
        }
        let (v1, e1) = kronrod15(&mut f, lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, hi);
        total += v1 + v2 - v0;
        error += e1 + e2 - e0;
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    // re-sum to shed the drift of incremental updates
    let value = segments.iter().map(|s| s.2).sum();
    QuadResult {
        value,
        abs_error: error.max(0.0),
        converged: true,
    }
}

/// Adaptive integration with the crate-wide default tolerance.
pub fn integrate_default<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> QuadResult {
    integrate(f, a, b, DEFAULT_REL_TOL, 1e-300)
}

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals is closed with Simpson's 3/8 rule on the last three.
pub fn simpson_uniform(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * dx * (values[0] + values[1]),
        3 => dx / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let (simpson_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                let t = 3.0 * dx / 8.0
                    * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
                (k, t)
            };
            let mut acc = values[0] + values[simpson_end];
            for (i, v) in values.iter().enumerate().take(simpson_end).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            dx / 3.0 * acc + tail
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate_default(|x| 3.0 * x * x, 0.0, 2.0);
        assert!((r.value - 8.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn oscillatory_and_peaked_integrands() {
        let r = integrate_default(|x: f64| x.sin(), 0.0, std::f64::consts::PI);
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate_default(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((r.value - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn reversed_and_empty_limits() {
        assert_eq!(integrate_default(|x| x, 1.0, 1.0).value, 0.0);
        let r = integrate_default(|x: f64| x.exp(), 1.0, 0.0);
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn simpson_handles_both_parities() {
        for n in [3usize, 4, 5, 10, 101, 102] {
            let dx = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| (i as f64 * dx).powi(3)).collect();
            assert!((simpson_uniform(&vals, dx) - 0.25).abs() < 1e-14, "n = {n}");
        }
    }
}
