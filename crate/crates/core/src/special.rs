//! Special functions: log-gamma, regularized incomplete gamma, and the
//! gamma and standard-normal quantiles.

use crate::error::{require_open_unit, Error, Result};

const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn check_shape(shape: f64) -> Result<()> {
    if shape.is_finite() && shape > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("gamma shape must be > 0, got {shape}")))
    }
}

/// Returns (P(a, x), Q(a, x)) computed together to avoid cancellation.
fn inc_gamma_pair(a: f64, x: f64) -> Result<(f64, f64)> {
    check_shape(a)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("incomplete gamma argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let p = (log_prefactor + lower_series(a, x)?.ln()).exp();
        Ok((p, 1.0 - p))
    } else {
        let q = (log_prefactor + upper_fraction(a, x)?.ln()).exp();
        Ok((1.0 - q, q))
    }
}

/// Σ xⁿ / (a(a+1)…(a+n)).
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            return Ok(sum);
        }
    }
    Err(Error::Numerical(format!("incomplete gamma series failed to converge (a={a}, x={x})")))
}

/// Continued fraction for Γ(a, x) e^x x^−a, modified Lentz.
fn upper_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(h);
        }
    }
    Err(Error::Numerical(format!("incomplete gamma fraction failed to converge (a={a}, x={x})")))
}

/// Regularized lower incomplete gamma P(shape, x).
pub fn reg_inc_gamma(shape: f64, x: f64) -> Result<f64> {
    inc_gamma_pair(shape, x).map(|(p, _)| p)
}

/// Regularized upper incomplete gamma Q(shape, x) = 1 − P(shape, x).
pub fn reg_inc_gamma_upper(shape: f64, x: f64) -> Result<f64> {
    inc_gamma_pair(shape, x).map(|(_, q)| q)
}

/// Gamma(shape, 1) density at x.
pub fn gamma_density(shape: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if shape == 1.0 && x == 0.0 { 1.0 } else { 0.0 };
    }
    ((shape - 1.0) * x.ln() - x - ln_gamma(shape)).exp()
}

/// x such that P(shape, x) = p.
pub fn gamma_quantile(shape: f64, p: f64) -> Result<f64> {
    check_shape(shape)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!("gamma quantile needs p in [0, 1), got {p}")));
    }
    invert_inc_gamma(shape, p, 1.0 - p)
}

/// x such that Q(shape, x) = q, accurate in the far upper tail.
pub fn gamma_quantile_upper(shape: f64, q: f64) -> Result<f64> {
    check_shape(shape)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("upper gamma quantile needs q in (0, 1], got {q}")));
    }
    invert_inc_gamma(shape, 1.0 - q, q)
}

/// Safeguarded Newton on a bisection bracket. `p + q = 1`; the residual is
/// taken in whichever tail is smaller.
fn invert_inc_gamma(shape: f64, p: f64, q: f64) -> Result<f64> {
    if p <= 0.0 {
        return Ok(0.0);
    }
    let use_upper = p > 0.5;
    let residual = |x: f64| -> Result<f64> {
        let (px, qx) = inc_gamma_pair(shape, x)?;
        Ok(if use_upper { q - qx } else { px - p })
    };

    // Wilson–Hilferty starting point.
    let z = normal_quantile(p.clamp(1e-300, 1.0 - 1e-16)).unwrap_or(0.0);
    let h = 1.0 / (9.0 * shape);
    let wh = shape * (1.0 - h + z * h.sqrt()).powi(3);
    let mut x = if wh.is_finite() && wh > 0.0 { wh } else { shape.max(1e-3) };

    let mut lo = 0.0;
    let mut hi = x.max(1.0);
    while residual(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical(format!("no bracket for gamma quantile (shape={shape}, p={p})")));
        }
    }
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }

    for _ in 0..500 {
        let f = residual(x)?;
        if f.abs() <= 1e-15 * p.min(q) {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(0.5 * (lo + hi));
        }
        let slope = gamma_density(shape, x);
        let newton = x - f / slope;
        x = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::Numerical(format!("gamma quantile did not converge (shape={shape}, p={p})")))
}

/// Inverse standard normal CDF (Wichura's AS 241, PPND16).
pub fn normal_quantile(p: f64) -> Result<f64> {
    require_open_unit("p", p)?;
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        let num = ((((((2_509.080_928_730_122_7 * r + 33_430.575_583_588_128) * r
            + 67_265.770_927_008_7)
            * r
            + 45_921.953_931_549_87)
            * r
            + 13_731.693_765_509_461)
            * r
            + 1_971.590_950_306_551_4)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_6;
        let den = ((((((5_226.495_278_852_546 * r + 28_729.085_735_721_943) * r
            + 39_307.895_800_092_71)
            * r
            + 21_213.794_301_586_596)
            * r
            + 5_394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return Ok(q * num / den);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_07)
            * r
            + 0.689_767_334_985_100_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_8e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_887_9)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ln_gamma_integers() {
        let mut fact = 1.0f64;
        for n in 1..30 {
            assert_abs_diff_eq!(ln_gamma(n as f64), fact.ln(), epsilon = 1e-12 * fact.ln().max(1.0));
            fact *= n as f64;
        }
        assert_abs_diff_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-14);
    }

    #[test]
    fn shape_one_closed_form() {
        for x in [0.01, 0.5, 1.0, 3.0, 20.0] {
            assert_abs_diff_eq!(reg_inc_gamma(1.0, x).unwrap(), 1.0 - (-x).exp(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(reg_inc_gamma(1.0, 1.0).unwrap(), 0.632_120_6, epsilon = 1e-7);
    }

    #[test]
    fn zero_argument() {
        for s in [0.3, 1.0, 131.0] {
            assert_eq!(reg_inc_gamma(s, 0.0).unwrap(), 0.0);
            assert_eq!(gamma_quantile(s, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn median_region_of_shape_131() {
        assert_abs_diff_eq!(reg_inc_gamma(131.0, 131.0).unwrap(), 0.5116, epsilon = 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(reg_inc_gamma(0.0, 1.0).is_err());
        assert!(reg_inc_gamma(1.0, -1.0).is_err());
        assert!(reg_inc_gamma(f64::NAN, 1.0).is_err());
        assert!(gamma_quantile(1.0, 1.0).is_err());
        assert!(gamma_quantile(1.0, -0.1).is_err());
        assert!(gamma_quantile(-2.0, 0.5).is_err());
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn quantile_inverts_shape_one() {
        let p = 1.0 - (-1.0f64).exp();
        assert_abs_diff_eq!(gamma_quantile(1.0, p).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quantile_of_shape_131_at_95() {
        let x = gamma_quantile(131.0, 0.95).unwrap();
        assert_abs_diff_eq!(x, 150.2, epsilon = 0.2);
    }

    #[test]
    fn quantile_round_trip_grid() {
        for s in [0.5, 1.0, 10.0, 131.0, 500.0] {
            for p in [1e-6, 0.05, 0.5, 0.95, 0.999] {
                let x = gamma_quantile(s, p).unwrap();
                assert_abs_diff_eq!(reg_inc_gamma(s, x).unwrap(), p, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn upper_quantile_far_tail() {
        let x = gamma_quantile_upper(5.0, 1e-20).unwrap();
        let q = reg_inc_gamma_upper(5.0, x).unwrap();
        assert!(((q - 1e-20) / 1e-20).abs() < 1e-9, "q = {q}");
    }

    #[test]
    fn normal_quantile_points() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(normal_quantile(0.95).unwrap(), 1.644_853_6, epsilon = 1e-7);
        assert_abs_diff_eq!(normal_quantile(0.975).unwrap(), 1.959_964_0, epsilon = 1e-7);
        assert_abs_diff_eq!(normal_quantile(0.025).unwrap(), -1.959_964_0, epsilon = 1e-7);
    }

    #[test]
    fn normal_quantile_matches_erfc_bisection() {
        use statrs::function::erf::erfc;
        let cdf = |x: f64| 0.5 * erfc(-x / std::f64::consts::SQRT_2);
        for p in [1e-12, 1e-6, 0.01, 0.2, 0.5, 0.7, 0.95, 0.99] {
            let (mut lo, mut hi) = (-40.0f64, 40.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert_abs_diff_eq!(normal_quantile(p).unwrap(), 0.5 * (lo + hi), epsilon = 1e-9);
        }
    }
}
