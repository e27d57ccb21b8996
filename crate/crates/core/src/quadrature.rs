//! Adaptive Simpson quadrature with interval bisection.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, lit, Real};

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: u32 = 60;

struct Segment<T> {
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Fails with [`Error::Quadrature`] if some sub-interval still misses its
/// share of the tolerance after `max_depth` bisections.
pub fn adaptive_simpson<T, F>(f: &F, a: T, b: T, tol: T, max_depth: u32) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    if a == b {
        return Ok(T::zero());
    }
    let half: T = lit(0.5);
    let m = half * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let seg = Segment { a, b, fa, fm, fb, whole };
    recurse(f, seg, tol, max_depth).ok_or(Error::Quadrature {
        lo: as_f64(a),
        hi: as_f64(b),
        depth: max_depth,
    })
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

fn recurse<T, F>(f: &F, seg: Segment<T>, tol: T, depth: u32) -> Option<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let half: T = lit(0.5);
    let m = half * (seg.a + seg.b);
    let lm = half * (seg.a + m);
    let rm = half * (m + seg.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(seg.a, m, seg.fa, flm, seg.fm);
    let right = simpson(m, seg.b, seg.fm, frm, seg.fb);
    let delta = left + right - seg.whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= lit::<T>(15.0) * tol {
        return Some(left + right + delta / lit(15.0));
    }
    if depth == 0 || m <= seg.a || m >= seg.b {
        return None;
    }
    let l = Segment { a: seg.a, b: m, fa: seg.fa, fm: flm, fb: seg.fm, whole: left };
    let r = Segment { a: m, b: seg.b, fa: seg.fm, fm: frm, fb: seg.fb, whole: right };
    let sub_tol = tol * half;
    Some(recurse(f, l, sub_tol, depth - 1)? + recurse(f, r, sub_tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12, 20).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn arctan_identity() {
        let v = adaptive_simpson(&|t: f64| 1.0 / (1.0 + t * t), 0.0, 1.0, 1e-12, 60).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-11);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let r = adaptive_simpson(&|t: f64| (1.0 / t).sin() / t, 1e-8, 1.0, 1e-14, 4);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
