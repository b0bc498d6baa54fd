//! Small numerical helpers shared by the kernels.

/// Inverse CDF of the standard normal distribution (Wichura's PPND16).
///
/// Relative accuracy is about 1e-15 over (0, 1). Inputs are clamped away
/// from 0 and 1 so a uniform deviate that lands exactly on 0 stays finite.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const P_MIN: f64 = 1e-300;
    let p = p.clamp(P_MIN, 1.0 - f64::EPSILON / 2.0);
    let q = p - 0.5;

    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }

    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[inline]
fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Sample standard error helpers used by statistics-flavored tests and the
/// steady-state diagnostics.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with scipy.stats.norm.ppf (frozen).
    const CASES: &[(f64, f64)] = &[
        (1e-12, -7.034_483_825_301_131_3e0),
        (1e-6, -4.753_424_308_822_898_7e0),
        (0.0025, -2.807_033_768_343_804_2e0),
        (0.025, -1.959_963_984_540_054_5e0),
        (0.25, -6.744_897_501_960_817_1e-1),
        (0.5, 0.0),
        (0.6, 2.533_471_031_357_997_2e-1),
        (0.975, 1.959_963_984_540_054e0),
        (0.999999, 4.753_424_308_817_087_3e0),
    ];

    #[test]
    fn matches_reference_quantiles() {
        for &(p, want) in CASES {
            let got = inverse_normal_cdf(p);
            let tol = 1e-13 * want.abs().max(1.0);
            assert!(
                (got - want).abs() <= tol,
                "ppf({p}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn extreme_inputs_stay_finite() {
        assert!(inverse_normal_cdf(0.0).is_finite());
        assert!(inverse_normal_cdf(1.0).is_finite());
        assert!(inverse_normal_cdf(0.0) < -30.0);
    }

    #[test]
    fn is_odd_about_half() {
        for &p in &[0.01, 0.1, 0.3, 0.45] {
            let a = inverse_normal_cdf(p);
            let b = inverse_normal_cdf(1.0 - p);
            assert!((a + b).abs() < 1e-13);
        }
    }
}
