//! Adaptive Gauss–Kronrod (7/15) integration used as ground truth for expectations.
//!
//! Deliberately unrelated to the trapezoid/Simpson rules in [`crate::grid`], so the
//! errors those rules make can be measured against it.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// Kronrod abscissae on [0, 1] half-interval, QUADPACK ordering: odd indices are Gauss nodes.
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

/// Tuning for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig<S> {
    pub abs_tol: S,
    pub max_subdivisions: usize,
}

impl<S: Scalar> Default for OracleConfig<S> {
    fn default() -> Self {
        Self {
            abs_tol: S::lit(1e-12).max(S::lit(64.0) * S::epsilon()),
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<S> {
    a: S,
    b: S,
    value: S,
    error: S,
}

fn kronrod15<S: Scalar, F: Fn(S) -> S>(f: &F, a: S, b: S) -> Panel<S> {
    let two = S::lit(2.0);
    let center = (a + b) / two;
    let half = (b - a) / two;
    let fc = f(center);
    let mut kronrod = fc * S::lit(WGK[7]);
    let mut gauss = fc * S::lit(WG[3]);
    for j in 0..7 {
        let dx = half * S::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + S::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + S::lit(WG[j / 2]) * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over the finite interval `[a, b]` to an absolute error estimate below
/// `cfg.abs_tol`, bisecting the panel with the largest error estimate until done.
pub fn integrate<S: Scalar, F: Fn(S) -> S>(f: F, a: S, b: S, cfg: &OracleConfig<S>) -> Result<S> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidParams(format!(
            "integration interval [{a}, {b}] must be finite and ordered"
        )));
    }
    if a == b {
        return Ok(S::zero());
    }
    let first = kronrod15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::NoConvergence { estimate: f64::INFINITY, subdivisions: 0 });
    }
    let mut panels = vec![first];
    let min_width = (b - a) * S::lit(1e3) * S::epsilon();
    let mut subdivisions = 0;
    loop {
        let total_err = panels.iter().fold(S::zero(), |acc, p| acc + p.error);
        if total_err <= cfg.abs_tol {
            // Sum in left-to-right order for reproducibility.
            panels.sort_by(|x, y| x.a.partial_cmp(&y.a).expect("finite panel bounds"));
            return Ok(panels.iter().fold(S::zero(), |acc, p| acc + p.value));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).expect("finite error"))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        if subdivisions >= cfg.max_subdivisions || p.b - p.a <= min_width {
            return Err(Error::NoConvergence { estimate: total_err.as_f64(), subdivisions });
        }
        let mid = (p.a + p.b) / S::lit(2.0);
        let left = kronrod15(&f, p.a, mid);
        let right = kronrod15(&f, mid, p.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::NoConvergence { estimate: f64::INFINITY, subdivisions });
        }
        panels.push(left);
        panels.push(right);
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let cfg = OracleConfig::default();
        let v = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &cfg).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn integrates_smooth_transcendental() {
        let cfg = OracleConfig::default();
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, &cfg).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let v = integrate(|x: f64| (std::f64::consts::PI * x).sin(), 0.0, 1.0, &cfg).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn refines_near_weak_singularity() {
        let cfg = OracleConfig::default();
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_on_nonintegrable() {
        let cfg = OracleConfig { abs_tol: 1e-12, max_subdivisions: 200 };
        let err = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &cfg).unwrap_err();
        assert_eq!(err.kind_name(), "NoConvergence");
    }

    #[test]
    fn degenerate_interval_is_zero() {
        assert_eq!(integrate(|x: f64| x, 1.0, 1.0, &OracleConfig::default()).unwrap(), 0.0);
    }
}
