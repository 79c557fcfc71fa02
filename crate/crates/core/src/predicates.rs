//! Adaptive geometric predicates.
//!
//! Each predicate evaluates in `f64` first and trusts the sign only when the
//! result clears a forward error bound (Shewchuk's static bounds). Otherwise
//! the inputs are rescaled to integers with a common power-of-two exponent
//! and the determinant is evaluated exactly with big integers. Because the
//! determinants are homogeneous polynomials the common scale never changes
//! the sign.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Float, Signed, Zero};

use crate::geometry::Point;

const EPS: f64 = f64::EPSILON * 0.5;
const CCW_BOUND: f64 = (3.0 + 16.0 * EPS) * EPS;
const INCIRCLE_BOUND: f64 = (10.0 + 96.0 * EPS) * EPS;

/// Sign of the signed area of `(a, b, c)`: `Greater` when counter-clockwise.
pub fn orient2d(a: Point, b: Point, c: Point) -> Ordering {
    let left = (a.x - c.x) * (b.y - c.y);
    let right = (a.y - c.y) * (b.x - c.x);
    let det = left - right;
    let bound = CCW_BOUND * (left.abs() + right.abs());
    if det > bound {
        Ordering::Greater
    } else if -det > bound {
        Ordering::Less
    } else {
        orient2d_exact(a, b, c)
    }
}

/// `Greater` when `d` lies strictly inside the circle through the
/// counter-clockwise triangle `(a, b, c)`, `Equal` when cocircular.
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> Ordering {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let (bdxcdy, cdxbdy) = (bdx * cdy, cdx * bdy);
    let (cdxady, adxcdy) = (cdx * ady, adx * cdy);
    let (adxbdy, bdxady) = (adx * bdy, bdx * ady);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    let det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    let permanent = (bdxcdy.abs() + cdxbdy.abs()) * alift
        + (cdxady.abs() + adxcdy.abs()) * blift
        + (adxbdy.abs() + bdxady.abs()) * clift;
    let bound = INCIRCLE_BOUND * permanent;
    if det > bound {
        Ordering::Greater
    } else if -det > bound {
        Ordering::Less
    } else {
        incircle_exact(a, b, c, d)
    }
}

/// Sign of `(p - a) . (p - b)`. `Less` means `p` is strictly inside the
/// closed disk with diameter `ab`.
pub fn diametral(a: Point, b: Point, p: Point) -> Ordering {
    let t1 = (p.x - a.x) * (p.x - b.x);
    let t2 = (p.y - a.y) * (p.y - b.y);
    let dot = t1 + t2;
    let bound = CCW_BOUND * (t1.abs() + t2.abs());
    if dot > bound {
        Ordering::Greater
    } else if -dot > bound {
        Ordering::Less
    } else {
        diametral_exact(a, b, p)
    }
}

/// Converts finite floats to integers sharing one binary exponent.
fn scaled(values: &[f64]) -> Vec<BigInt> {
    let decoded: Vec<(u64, i16, i8)> = values.iter().map(|v| v.integer_decode()).collect();
    let emin = decoded.iter().filter(|(m, _, _)| *m != 0).map(|&(_, e, _)| e).min().unwrap_or(0);
    decoded
        .into_iter()
        .map(|(m, e, s)| {
            let v = BigInt::from(m) << ((e - emin) as usize);
            if s < 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}

fn sign(v: &BigInt) -> Ordering {
    if v.is_zero() {
        Ordering::Equal
    } else if v.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn orient2d_exact(a: Point, b: Point, c: Point) -> Ordering {
    let v = scaled(&[a.x, a.y, b.x, b.y, c.x, c.y]);
    let (ax, ay, bx, by, cx, cy) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
    let det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
    sign(&det)
}

fn incircle_exact(a: Point, b: Point, c: Point, d: Point) -> Ordering {
    let v = scaled(&[a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y]);
    let (adx, ady) = (&v[0] - &v[6], &v[1] - &v[7]);
    let (bdx, bdy) = (&v[2] - &v[6], &v[3] - &v[7]);
    let (cdx, cdy) = (&v[4] - &v[6], &v[5] - &v[7]);
    let alift = &adx * &adx + &ady * &ady;
    let blift = &bdx * &bdx + &bdy * &bdy;
    let clift = &cdx * &cdx + &cdy * &cdy;
    let det =
        alift * (&bdx * &cdy - &cdx * &bdy) + blift * (&cdx * &ady - &adx * &cdy) + clift * (&adx * &bdy - &bdx * &ady);
    sign(&det)
}

fn diametral_exact(a: Point, b: Point, p: Point) -> Ordering {
    let v = scaled(&[a.x, a.y, b.x, b.y, p.x, p.y]);
    let dot = (&v[4] - &v[0]) * (&v[4] - &v[2]) + (&v[5] - &v[1]) * (&v[5] - &v[3]);
    sign(&dot)
}
