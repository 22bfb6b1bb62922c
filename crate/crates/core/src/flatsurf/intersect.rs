use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::arith::floor_sum;
use super::connections::slit_curve;
use super::lattice::with_retries;
use super::SlitSurface;
use crate::error::{Error, Result};
use crate::interval::{rat_int, Interval, Rational};

/// A point with an enclosed abscissa and an integer ordinate.
type Vertex = (Interval, BigInt);

fn x_at(a: &Vertex, b: &Vertex, y: &BigInt) -> Interval {
    if y == &a.1 {
        return a.0.clone();
    }
    if y == &b.1 {
        return b.0.clone();
    }
    let slope = (&b.0 - &a.0).scale(&Rational::new(BigInt::one(), &b.1 - &a.1));
    &a.0 + &slope.scale(&rat_int(y - &a.1))
}

/// `ceil(x)` of a certified interval.
fn ceil_of(x: &Interval) -> Result<BigInt> {
    Ok(-(-x).floor_or_err("row end")?)
}

/// Integer points strictly inside the parallelogram `{ s a + t b : 0 < s, t < 1 }`.
///
/// Both vertices have integer ordinates; abscissae may be irrational. Every
/// floor taken along the way is certified, so the count is exact.
pub fn count_interior_points(a: &Vertex, b: &Vertex) -> Result<BigInt> {
    let far: Vertex = (&a.0 + &b.0, &a.1 + &b.1);
    count_with_far(a, b, far)
}

/// As [`count_interior_points`], with the fourth vertex `a + b` supplied so
/// that cancellations between `a` and `b` stay exact.
fn count_with_far(a: &Vertex, b: &Vertex, far: Vertex) -> Result<BigInt> {
    let cross = &(&a.0 * &Interval::from_int(b.1.clone())) - &(&b.0 * &Interval::from_int(a.1.clone()));
    match cross.sign() {
        Some(0) => return Ok(BigInt::zero()),
        None => return Err(Error::precision("cannot decide whether the parallelogram is degenerate")),
        _ => {}
    }
    let origin: Vertex = (Interval::zero(), BigInt::zero());
    let verts = [origin, a.clone(), far, b.clone()];
    let edges: Vec<(Vertex, Vertex)> = (0..4)
        .map(|i| (verts[i].clone(), verts[(i + 1) % 4].clone()))
        .filter(|(p, q)| p.1 != q.1)
        .map(|(p, q)| if p.1 < q.1 { (p, q) } else { (q, p) })
        .collect();
    let mut ys: Vec<BigInt> = verts.iter().map(|v| v.1.clone()).collect();
    ys.sort();
    ys.dedup();
    let mut total = BigInt::zero();
    for win in ys.windows(2) {
        let (ya, yb) = (&win[0], &win[1]);
        let rows = yb - ya - 1u32;
        if rows <= BigInt::zero() {
            continue;
        }
        let crossing: Vec<&(Vertex, Vertex)> = edges.iter().filter(|(p, q)| &p.1 <= ya && &q.1 >= yb).collect();
        if crossing.len() != 2 {
            return Err(Error::precision("parallelogram rows are not bounded by two edges"));
        }
        let y0 = ya + 1u32;
        let x0 = x_at(&crossing[0].0, &crossing[0].1, &y0);
        let x1 = x_at(&crossing[1].0, &crossing[1].1, &y0);
        let (left, right) = match x0.cmp_certified(&x1) {
            Some(std::cmp::Ordering::Less) => (crossing[0], crossing[1]),
            Some(std::cmp::Ordering::Greater) => (crossing[1], crossing[0]),
            _ => return Err(Error::precision("cannot order the two edges bounding a row band")),
        };
        let slope = |e: &(Vertex, Vertex)| (&e.1 .0 - &e.0 .0).scale(&Rational::new(BigInt::one(), &e.1 .1 - &e.0 .1));
        let l0 = x_at(&left.0, &left.1, &y0);
        let r0 = x_at(&right.0, &right.1, &y0);
        // sum over rows of ceil(R) - floor(L) - 1
        let sum_l = floor_sum(&rows, &slope(left), &l0)?;
        let sum_neg_r = floor_sum(&rows, &-slope(right), &-r0)?;
        total += -sum_neg_r - sum_l - &rows;
    }
    // rows through a vertex that is neither lowest nor highest
    let (ymin, ymax) = (ys.first().unwrap(), ys.last().unwrap());
    for y in ys.iter().filter(|y| *y != ymin && *y != ymax) {
        let xs: Vec<Interval> = edges.iter().filter(|(p, q)| &p.1 <= y && &q.1 >= y).map(|(p, q)| x_at(p, q, y)).collect();
        let left = xs.iter().skip(1).fold(xs[0].clone(), |acc, x| acc.min(x));
        let right = xs.iter().skip(1).fold(xs[0].clone(), |acc, x| acc.max(x));
        let count = ceil_of(&right)? - left.floor_or_err("row start")? - 1u32;
        if count > BigInt::zero() {
            total += count;
        }
    }
    Ok(total)
}

/// Geometric intersection number of the closed curves obtained by doubling
/// `zeta_j` and `zeta_k` across the two sheets.
///
/// Each interior crossing of the two segments on the torus lifts to one
/// crossing on each sheet, and the doubled curves also cross at both branch
/// points, where they pass transversally through the cone angle `4 pi`.
pub fn intersection_number(surface: &SlitSurface, j: u64, k: u64) -> Result<BigInt> {
    if j == 0 || k == 0 {
        return Err(Error::domain("slit curves are indexed from 1"));
    }
    if j == k {
        return Ok(BigInt::zero());
    }
    let (j, k) = (j.min(k), j.max(k));
    let base = surface.with_c(Rational::zero())?;
    let zj = slit_curve(&base, j)?.connection.coords;
    let zk = slit_curve(&base, k)?.connection.coords;
    let top = zj.1.bits().max(zk.1.bits()).max(zj.0.bits()).max(zk.0.bits()) as u32;
    let interior = with_retries(|extra| {
        let w = base.slit_width_bits(2 * top + 128 + extra)?;
        // crossings s A = t B + lambda, lambda in Z^2: lattice points inside the
        // parallelogram spanned by A and -B
        let a: Vertex = (&w + &Interval::from_int(zj.0.clone()), zj.1.clone());
        let b: Vertex = (-(&w + &Interval::from_int(zk.0.clone())), -zk.1.clone());
        let far: Vertex = (Interval::from_int(&zj.0 - &zk.0), &zj.1 - &zk.1);
        count_with_far(&a, &b, far)
    })?;
    Ok(interior * 2u32 + 2u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::ratio;
    use proptest::prelude::*;

    /// Enumerates the bounding box and tests membership exactly for the
    /// parallelogram spanned by `(a / d, ay)` and `(b / d, by)`.
    fn brute_interior(a: i128, ay: i128, b: i128, by: i128, d: i128) -> i64 {
        let det = a * by - b * ay;
        if det == 0 {
            return 0;
        }
        let xs = [0, a, a + b, b];
        let xmin = xs.iter().min().unwrap().div_euclid(d) - 1;
        let xmax = xs.iter().max().unwrap().div_euclid(d) + 1;
        let ys = [0, ay, ay + by, by];
        let (ymin, ymax) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
        let inside = |num: i128| if det > 0 { num > 0 && num < det } else { num < 0 && num > det };
        let mut count = 0;
        for x in xmin..=xmax {
            for y in ymin..=ymax {
                // (x, y) = s A + t B, scaled by d
                let s = x * d * by - b * y;
                let t = a * y - x * d * ay;
                if inside(s) && inside(t) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn unit_square_has_no_interior_points() {
        let a = (Interval::from_int(1), BigInt::zero());
        let b = (Interval::zero(), BigInt::one());
        assert_eq!(count_interior_points(&a, &b).unwrap(), BigInt::zero());
        let a = (Interval::from_int(3), BigInt::zero());
        let b = (Interval::zero(), BigInt::from(3));
        assert_eq!(count_interior_points(&a, &b).unwrap(), BigInt::from(4));
    }

    #[test]
    fn diagonal_self_pair_is_zero() {
        let x = SlitSurface::standard();
        assert_eq!(intersection_number(&x, 3, 3).unwrap(), BigInt::zero());
    }

    #[test]
    fn intersection_is_symmetric_and_positive() {
        let x = SlitSurface::standard();
        let a = intersection_number(&x, 1, 4).unwrap();
        assert!(a > BigInt::zero());
        assert_eq!(a, intersection_number(&x, 4, 1).unwrap());
    }

    #[test]
    fn stage_one_two_crossings_match_brute_force() {
        let x = SlitSurface::standard();
        let d: i128 = 1_000_000_000_000_000;
        let w = x.slit_width_bits(200).unwrap().mid();
        let wd: i128 = (w * rat_int(d)).round().to_integer().try_into().unwrap();
        let z2 = slit_curve(&x, 2).unwrap().connection.coords;
        let (m2, n2): (i128, i128) = (z2.0.try_into().unwrap(), z2.1.try_into().unwrap());
        // zeta_1 = (w, 0); zeta_2 = (m2 + w, n2)
        let brute = brute_interior(wd, 0, -(m2 * d + wd), -n2, d);
        assert_eq!(intersection_number(&x, 1, 2).unwrap(), BigInt::from(2 * brute + 2));
    }

    proptest! {
        #[test]
        fn interior_count_matches_enumeration(
            ax in -100i64..100, ay in -12i64..12, bx in -700i64..700, by in -12i64..12,
        ) {
            // abscissae with large prime denominators never hit integers in the box
            let axr = ratio(ax * 997 + 1, 997);
            let bxr = ratio(bx * 991 + 3, 991) / rat_int(7);
            let got = count_interior_points(
                &(Interval::exact(axr), BigInt::from(ay)),
                &(Interval::exact(bxr), BigInt::from(by)),
            ).unwrap();
            let d = 997 * 6937;
            let a = (ax as i128 * 997 + 1) * 6937;
            let b = (bx as i128 * 991 + 3) * 997;
            prop_assert_eq!(got, BigInt::from(brute_interior(a, ay as i128, b, by as i128, d)));
        }
    }
}
