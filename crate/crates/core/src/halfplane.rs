//! Complex kernel: the upper-half-plane square root and the closed-form
//! Loewner maps for constant driving.

use crate::ComplexPoint;

const BIG: f64 = 1e300;
const TINY: f64 = 1e-300;
// exact powers of two used to rescale extreme arguments
const DOWN: f64 = 1.0 / (1u128 << 120) as f64 / (1u128 << 120) as f64; // 2^-240
const UP: f64 = (1u128 << 120) as f64 * (1u128 << 120) as f64; // 2^240
const HALF_DOWN: f64 = 1.0 / (1u128 << 120) as f64; // 2^-120
const HALF_UP: f64 = (1u128 << 120) as f64; // 2^120

/// Square root on the branch with nonnegative imaginary part.
///
/// Total: positive reals map to the nonnegative real root, negative reals
/// `-r` to `i sqrt(r)`. Arguments with components beyond `1e300` or below
/// `1e-300` are rescaled by an exact power of two first.
pub fn sqrt_h(w: ComplexPoint) -> ComplexPoint {
    let (a, b) = (w.re, w.im);
    if a == 0.0 && b == 0.0 {
        return ComplexPoint::new(0.0, 0.0);
    }
    let m = a.abs().max(b.abs());
    if m > BIG {
        return sqrt_h(w * DOWN) * HALF_UP;
    }
    if m < TINY {
        return sqrt_h(w * UP) * HALF_DOWN;
    }
    let mag = a.hypot(b);
    if a >= 0.0 {
        let r = ((mag + a) * 0.5).sqrt();
        let s = b / (2.0 * r);
        if s < 0.0 {
            ComplexPoint::new(-r, -s)
        } else {
            ComplexPoint::new(r, s.abs())
        }
    } else {
        let s = ((mag - a) * 0.5).sqrt();
        let r = b / (2.0 * s);
        ComplexPoint::new(r, s)
    }
}

/// Forward slit map `A + sqrt_h((z - A)^2 + 4t)`.
///
/// For `t > 0` this maps the half-plane minus the vertical slit of height
/// `2 sqrt(t)` above `A` onto the half-plane; `t = 0` is the identity.
pub fn slit_forward(z: ComplexPoint, a: f64, t: f64) -> ComplexPoint {
    if t == 0.0 {
        return z;
    }
    let d = z - a;
    sqrt_h(d * d + 4.0 * t) + a
}

/// Reverse slit map `A + sqrt_h((z - A)^2 - 4t)`: the reverse Loewner flow
/// with constant driving `A` run for time `t`.
///
/// Points that the forward map would swallow still land in the closed upper
/// half-plane through the branch choice of [`sqrt_h`].
pub fn slit_reverse(z: ComplexPoint, a: f64, t: f64) -> ComplexPoint {
    if t == 0.0 {
        return z;
    }
    let d = z - a;
    sqrt_h(d * d - 4.0 * t) + a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn close(a: ComplexPoint, b: ComplexPoint, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_h(c(-4.0, 0.0)), c(0.0, 2.0));
        assert!(close(sqrt_h(c(0.0, 2.0)), c(1.0, 1.0), 1e-15));
        assert!(close(sqrt_h(c(3.0, -4.0)), c(-2.0, 1.0), 1e-15));
        assert_eq!(sqrt_h(c(9.0, 0.0)), c(3.0, 0.0));
        assert_eq!(sqrt_h(c(0.0, 0.0)), c(0.0, 0.0));
        // negative zero imaginary part still selects the real root
        assert_eq!(sqrt_h(c(9.0, -0.0)).re, 3.0);
    }

    #[test]
    fn sqrt_extreme_magnitudes() {
        for &s in &[1e-310, 1e-200, 1e200, 1e305] {
            let w = c(-3.0 * s, 4.0 * s);
            let r = sqrt_h(w);
            assert!(r.im > 0.0);
            let rel = (r * r - w).norm() / w.norm();
            assert!(rel < 1e-15, "scale {s}: rel {rel}");
        }
    }

    #[test]
    fn slit_examples() {
        let i = c(0.0, 1.0);
        assert!(close(slit_forward(i, 0.0, 1.0), c(3f64.sqrt(), 0.0), 1e-15));
        assert_eq!(slit_forward(c(0.3, 0.2), 0.0, 0.0), c(0.3, 0.2));
        assert!(close(
            slit_forward(c(2.0, 1.0), 2.0, 1.0),
            c(2.0 + 3f64.sqrt(), 0.0),
            1e-15
        ));
        assert!(close(
            slit_reverse(c(3.0, 0.0), 0.0, 1.0),
            c(5f64.sqrt(), 0.0),
            1e-15
        ));
        assert!(close(slit_reverse(i, 0.0, 1.0), c(0.0, 5f64.sqrt()), 1e-15));
        assert_eq!(slit_reverse(c(0.3, 0.2), 1.0, 0.0), c(0.3, 0.2));
    }

    #[test]
    fn swallowed_points_stay_in_closed_half_plane() {
        // a point on the real segment under the slit
        let z = slit_reverse(c(0.5, 0.0), 0.0, 1.0);
        assert!(z.im >= 0.0);
    }

    proptest! {
        #[test]
        fn sqrt_has_nonnegative_imaginary_part(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let r = sqrt_h(c(re, im));
            prop_assert!(r.im >= 0.0);
        }

        #[test]
        fn reverse_flow_lifts_points(re in -5f64..5.0, im in 1e-3f64..5.0, a in -5f64..5.0, t in 1e-4f64..4.0) {
            let z = c(re, im);
            prop_assert!(slit_reverse(z, a, t).im > z.im);
        }

        #[test]
        fn square_root_dominates_height(re in -5f64..5.0, im in 0f64..5.0, a in 0f64..10.0) {
            let z = c(re, im);
            let w = sqrt_h(z * z - a);
            prop_assert!(w.im >= z.im * (1.0 - 1e-15));
        }
    }
}
