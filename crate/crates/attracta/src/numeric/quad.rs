//! Panel-based quadrature.
//!
//! Integrands here are compositions of smooth functions with piecewise
//! polynomial interpolants, so panels are split at the interpolant knots
//! first and an adaptive Gauss-Kronrod 7(15) rule handles whatever
//! smoothness is left inside each panel.

#![allow(clippy::excessive_precision)] // nodes keep the upstream tabulated digits

use crate::error::{Error, Result};

/// 15-point Kronrod abscissae on [-1, 1] (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// 7-point Gauss weights embedded in the rule above.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod weights.
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

/// One G7/K15 application on [a, b]. Returns (kronrod value, |K15 - G7|).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        res_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            // odd Kronrod indices carry the embedded Gauss nodes
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    (res_k * half, ((res_k - res_g) * half).abs())
}

/// Integrate `f` over [a, b], splitting first at the supplied knots (sorted or
/// not, duplicates fine), then bisecting panels adaptively until the summed
/// error estimate is below `abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    knots: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = vec![a, b];
    for &k in knots {
        if k > a && k < b {
            cuts.push(k);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + x.abs()));

    // A flood of knots (long trajectories) would blow up the panel count
    // without improving accuracy; adaptivity recovers any merged breaks.
    const MAX_PANELS: usize = 48;
    if cuts.len() > MAX_PANELS + 1 {
        let mut thinned = Vec::with_capacity(MAX_PANELS + 1);
        let step = (cuts.len() - 1) as f64 / MAX_PANELS as f64;
        for i in 0..=MAX_PANELS {
            thinned.push(cuts[(i as f64 * step).round() as usize]);
        }
        *thinned.last_mut().unwrap() = b;
        cuts = thinned;
    }

    let mut total = 0.0;
    let mut total_err = 0.0;
    let per_panel_tol = abs_tol / cuts.len().max(1) as f64;

    for w in cuts.windows(2) {
        let (v, e) = adaptive_panel(&mut f, w[0], w[1], per_panel_tol, 24)?;
        total += v;
        total_err += e;
    }
    if total_err > abs_tol.max(1e-12 * (1.0 + total.abs())) {
        return Err(Error::IntegrationAccuracy { defect: total_err });
    }
    Ok(total)
}

fn adaptive_panel<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Result<(f64, f64)> {
    let (v, e) = gk15(f, a, b);
    if e <= tol || depth == 0 || (b - a) < 1e-13 * (1.0 + a.abs()) {
        return Ok((v, e));
    }
    let m = 0.5 * (a + b);
    let (v1, e1) = adaptive_panel(f, a, m, 0.5 * tol, depth - 1)?;
    let (v2, e2) = adaptive_panel(f, m, b, 0.5 * tol, depth - 1)?;
    Ok((v1 + v2, e1 + e2))
}

/// 10-point Gauss-Legendre nodes on [-1, 1] (positive half) and weights.
const XGL10: [f64; 5] = [
    0.148_874_338_981_631_210_884_826_001_130,
    0.433_395_394_129_247_190_799_265_943_166,
    0.679_409_568_299_024_406_234_327_365_115,
    0.865_063_366_688_984_510_732_096_688_423,
    0.973_906_528_517_171_720_077_964_012_084,
];
const WGL10: [f64; 5] = [
    0.295_524_224_714_752_870_173_892_994_651,
    0.269_266_719_309_996_355_091_226_921_569,
    0.219_086_362_515_982_043_995_534_934_228,
    0.149_451_349_150_580_593_145_776_339_658,
    0.066_671_344_308_688_137_593_568_809_893,
];

/// Nodes and weights of a fixed panel-aligned GL10 rule over [a, b], split at
/// `knots`. Used for tensor (nested) integrals in the right-hand side where
/// the adaptive rule would be re-run once per outer node.
pub fn gl10_panel_nodes(a: f64, b: f64, knots: &[f64], out: &mut Vec<(f64, f64)>) {
    out.clear();
    if !(b > a) {
        return;
    }
    let mut cuts: Vec<f64> = vec![a, b];
    for &k in knots {
        if k > a && k < b {
            cuts.push(k);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + x.abs()));

    const MAX_PANELS: usize = 32;
    if cuts.len() > MAX_PANELS + 1 {
        let mut thinned = Vec::with_capacity(MAX_PANELS + 1);
        let step = (cuts.len() - 1) as f64 / MAX_PANELS as f64;
        for i in 0..=MAX_PANELS {
            thinned.push(cuts[(i as f64 * step).round() as usize]);
        }
        *thinned.last_mut().unwrap() = b;
        cuts = thinned;
    }

    for w in cuts.windows(2) {
        let center = 0.5 * (w[0] + w[1]);
        let half = 0.5 * (w[1] - w[0]);
        for j in 0..5 {
            out.push((center - half * XGL10[j], half * WGL10[j]));
            out.push((center + half * XGL10[j], half * WGL10[j]));
        }
    }
}
