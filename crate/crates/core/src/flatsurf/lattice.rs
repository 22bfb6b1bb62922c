use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{FlowTime, PlanarVector, SlitSurface};
use crate::cfrac::ContinuedFraction;
use crate::error::{Error, Result};
use crate::interval::{rat_int, Interval, Rational};

/// Integer coordinates `(m, n)` of the lattice vector `m (1,0) + n (-alpha,1)`.
pub type Coords = (BigInt, BigInt);

/// The lattice `g_t (Z (1,0) + Z (-alpha, 1))` with `alpha` known to an enclosure.
#[derive(Debug, Clone)]
pub struct ShearedLattice {
    pub alpha: Interval,
    /// Convergent depth of the enclosure, when it came from `shear_lattice`.
    pub depth: Option<u64>,
    pub time: FlowTime,
    stretch: Interval,
    shrink: Interval,
}

pub fn shear_lattice(cf: &ContinuedFraction, depth: u64) -> Result<ShearedLattice> {
    let alpha = cf.enclose_alpha(depth)?;
    let mut l = ShearedLattice::with_alpha(alpha);
    l.depth = Some(depth);
    Ok(l)
}

impl ShearedLattice {
    pub fn with_alpha(alpha: Interval) -> Self {
        ShearedLattice {
            alpha,
            depth: None,
            time: FlowTime::zero(),
            stretch: Interval::one(),
            shrink: Interval::one(),
        }
    }

    /// `Z^2` itself.
    pub fn square() -> Self {
        ShearedLattice::with_alpha(Interval::zero())
    }

    pub fn flow(&self, t: &FlowTime) -> ShearedLattice {
        let time = self.time.compose(t);
        let (stretch, shrink) = time.factors();
        ShearedLattice { alpha: self.alpha.clone(), depth: self.depth, time, stretch, shrink }
    }

    pub fn vector(&self, m: &BigInt, n: &BigInt) -> PlanarVector {
        self.coset_vector(&Interval::from_int(m.clone()), n)
    }

    /// The vector with lattice coordinates `(u, n)`, `u` real.
    pub fn coset_vector(&self, u: &Interval, n: &BigInt) -> PlanarVector {
        SlitSurface::embed(u, n, &self.alpha, &self.stretch, &self.shrink)
    }

    pub fn basis(&self) -> [PlanarVector; 2] {
        [self.vector(&BigInt::one(), &BigInt::zero()), self.vector(&BigInt::zero(), &BigInt::one())]
    }

    pub fn determinant(&self) -> Interval {
        let [u, v] = self.basis();
        u.cross(&v)
    }

    /// Exact model lattice at the midpoints of the enclosures.
    fn model(&self) -> Model {
        let s = self.stretch.mid();
        Model { alpha: self.alpha.mid(), s_inv: s.recip(), s }
    }
}

struct Model {
    alpha: Rational,
    s: Rational,
    s_inv: Rational,
}

impl Model {
    fn vec(&self, c: &Coords) -> (Rational, Rational) {
        let n = rat_int(c.1.clone());
        ((rat_int(c.0.clone()) - &n * &self.alpha) * &self.s, n * &self.s_inv)
    }

    fn norm(&self, c: &Coords) -> Rational {
        let (x, y) = self.vec(c);
        &x * &x + &y * &y
    }

    fn dot(&self, a: &Coords, b: &Coords) -> Rational {
        let (x1, y1) = self.vec(a);
        let (x2, y2) = self.vec(b);
        x1 * x2 + y1 * y2
    }
}

fn sub_mul(a: &Coords, mu: &BigInt, b: &Coords) -> Coords {
    (&a.0 - mu * &b.0, &a.1 - mu * &b.1)
}

/// Lagrange-Gauss reduced basis: `|w1| <= |w2|` and `2 |<w1, w2>| <= |w1|^2`.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    pub coords: [Coords; 2],
    pub vectors: [PlanarVector; 2],
    pub norms: [Interval; 2],
}

impl ReducedBasis {
    pub fn systole(&self, bits: u32) -> Interval {
        self.norms[0].sqrt(bits).expect("nonnegative")
    }

    /// `m_1 n_2 - m_2 n_1`
    pub fn coords_determinant(&self) -> BigInt {
        let [a, b] = &self.coords;
        &a.0 * &b.1 - &a.1 * &b.0
    }
}

pub fn reduce_basis(lattice: &ShearedLattice) -> Result<ReducedBasis> {
    let model = lattice.model();
    let mut b1: Coords = (BigInt::one(), BigInt::zero());
    let mut b2: Coords = (BigInt::zero(), BigInt::one());
    if model.norm(&b1) > model.norm(&b2) {
        std::mem::swap(&mut b1, &mut b2);
    }
    loop {
        let mu = (model.dot(&b1, &b2) / model.norm(&b1)).round().to_integer();
        b2 = sub_mul(&b2, &mu, &b1);
        if model.norm(&b2) >= model.norm(&b1) {
            break;
        }
        std::mem::swap(&mut b1, &mut b2);
    }
    let v1 = lattice.vector(&b1.0, &b1.1);
    let v2 = lattice.vector(&b2.0, &b2.1);
    let n1 = v1.length_squared();
    let n2 = v2.length_squared();
    let d = v1.dot(&v2).abs().scale(&rat_int(2));
    if !(d.hi() <= n1.lo() && n1.hi() <= n2.lo()) {
        return Err(Error::precision("alpha enclosure too wide to certify the reduced basis"));
    }
    Ok(ReducedBasis { coords: [b1, b2], vectors: [v1, v2], norms: [n1, n2] })
}

/// `sqrt(x) <= (x + 1) / 2`
fn sqrt_upper(x: &Rational) -> Rational {
    (x + Rational::one()) / rat_int(2)
}

/// Coordinates `(m, n)` of every vector `(m + offset, n)` of length possibly
/// at most `bound`, found by a box search in the reduced basis.
pub(crate) fn box_search(
    lattice: &ShearedLattice,
    red: &ReducedBasis,
    offset: &Interval,
    bound: &Rational,
) -> Vec<(Coords, PlanarVector, Interval)> {
    let model = lattice.model();
    let [c1, c2] = &red.coords;
    let (x1, y1) = model.vec(c1);
    let (x2, y2) = model.vec(c2);
    let det = &x1 * &y2 - &y1 * &x2;
    let ox = offset.mid() * &model.s;
    // coefficients of -o in the basis: solve i w1 + j w2 = (-ox, 0)
    let ci = (-&ox * &y2) / &det;
    let cj = (&ox * &y1) / &det;
    let adet = det.abs();
    let ri = bound * sqrt_upper(&model.norm(c2)) / &adet;
    let rj = bound * sqrt_upper(&model.norm(c1)) / &adet;
    let lo_i: BigInt = (&ci - &ri).floor().to_integer() - 1;
    let hi_i: BigInt = (&ci + &ri).ceil().to_integer() + 1;
    let lo_j: BigInt = (&cj - &rj).floor().to_integer() - 1;
    let hi_j: BigInt = (&cj + &rj).ceil().to_integer() + 1;
    let bound2 = bound * bound;
    let mut out = Vec::new();
    let mut i = lo_i;
    while i <= hi_i {
        let mut j = lo_j.clone();
        while j <= hi_j {
            let m = &i * &c1.0 + &j * &c2.0;
            let n = &i * &c1.1 + &j * &c2.1;
            let u = offset + &Interval::from_int(m.clone());
            let v = lattice.coset_vector(&u, &n);
            let len2 = v.length_squared();
            if len2.lo() <= &bound2 {
                out.push(((m, n), v, len2));
            }
            j += 1;
        }
        i += 1;
    }
    out
}

/// Index of the certified minimum of `len2`, ties between equal exact values
/// broken by position.
pub(crate) fn certified_min(len2: &[Interval]) -> Result<usize> {
    if len2.is_empty() {
        return Err(Error::precision("no candidates to minimise over"));
    }
    let best = (0..len2.len()).min_by(|&a, &b| len2[a].mid().cmp(&len2[b].mid()).then(a.cmp(&b))).unwrap();
    for (j, l) in len2.iter().enumerate() {
        if j == best {
            continue;
        }
        let separated = len2[best].hi() < l.lo();
        let tied = len2[best].is_exact() && l.is_exact() && len2[best] == *l;
        if !(separated || tied) {
            return Err(Error::precision("two candidate lengths cannot be separated"));
        }
    }
    Ok(best)
}

/// Systoles of the two torus pieces and the shortest loop at a branch point.
#[derive(Debug, Clone)]
pub struct SystoleReport {
    pub time: FlowTime,
    pub lattice_systole: Interval,
    pub shortest_vector: Coords,
    pub plus: Interval,
    pub minus: Interval,
    /// Shortest saddle connection from a branch point to itself.
    pub branch_loop: Interval,
    pub branch_loop_vector: Coords,
}

impl SystoleReport {
    pub fn min(&self) -> Interval {
        self.lattice_systole.min(&self.branch_loop)
    }
}

/// Lattice at time `t` with `alpha` enclosed finely enough for stretch factors
/// up to `e^t`.
pub(crate) fn lattice_at(surface: &SlitSurface, t: &FlowTime, extra: u32) -> Result<ShearedLattice> {
    let (s, _) = t.factors();
    let s_int = s.hi().ceil().to_integer().max(BigInt::one());
    let bits = SlitSurface::working_bits(&s_int, &s_int, extra);
    let alpha = surface.alpha_bits(bits)?;
    Ok(ShearedLattice::with_alpha(alpha).flow(t))
}

pub(crate) fn with_retries<T>(mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
    let mut extra = 0;
    loop {
        match f(extra) {
            Err(Error::Precision(_)) if extra < 384 => extra = extra * 2 + 64,
            r => return r,
        }
    }
}

pub fn systole(surface: &SlitSurface, t: &FlowTime) -> Result<SystoleReport> {
    with_retries(|extra| systole_at(surface, t, extra))
}

fn systole_at(surface: &SlitSurface, t: &FlowTime, extra: u32) -> Result<SystoleReport> {
    let bits = 128 + extra;
    let lattice = lattice_at(surface, t, extra)?;
    let red = reduce_basis(&lattice)?;
    let sys = red.systole(bits);
    // a branch loop is a primitive lattice vector that is not horizontal:
    // horizontal ones run into the other branch point along the slit line
    let bound = sqrt_upper(red.norms[0].hi()) + sqrt_upper(red.norms[1].hi());
    let cands: Vec<_> = box_search(&lattice, &red, &Interval::zero(), &bound)
        .into_iter()
        .filter(|((m, n), _, _)| n.is_positive() && m.gcd(n).is_one())
        .collect();
    let lens: Vec<Interval> = cands.iter().map(|c| c.2.clone()).collect();
    let best = certified_min(&lens)?;
    let mut shortest = red.coords[0].clone();
    if shortest.1.is_negative() || (shortest.1.is_zero() && shortest.0.is_negative()) {
        shortest = (-shortest.0, -shortest.1);
    }
    Ok(SystoleReport {
        time: t.clone(),
        plus: sys.clone(),
        minus: sys.clone(),
        lattice_systole: sys,
        shortest_vector: shortest,
        branch_loop: lens[best].sqrt(bits)?,
        branch_loop_vector: cands[best].0.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::ratio;

    /// Shortest nonzero vector of `diag(s, 1/s) (Z (1,0) + Z (-alpha, 1))` by
    /// exhaustive floating-point search over small coefficients.
    fn brute_shortest(alpha: f64, s: f64, r: i64) -> f64 {
        let mut best = f64::INFINITY;
        for m in -r..=r {
            for n in -r..=r {
                if m == 0 && n == 0 {
                    continue;
                }
                let x = s * (m as f64 - n as f64 * alpha);
                let y = n as f64 / s;
                best = best.min((x * x + y * y).sqrt());
            }
        }
        best
    }

    fn cf() -> ContinuedFraction {
        ContinuedFraction::squares()
    }

    #[test]
    fn shear_enclosures() {
        let l = shear_lattice(&cf(), 3).unwrap();
        let v = &l.basis()[1];
        assert_eq!(v.x, Interval::spanning(ratio(-37, 46), ratio(-596, 741)));
        let l1 = shear_lattice(&cf(), 1).unwrap();
        assert_eq!(l1.basis()[1].x, Interval::spanning(ratio(-1, 1), ratio(-4, 5)));
        for d in 1..8 {
            assert!(shear_lattice(&cf(), d).unwrap().determinant().contains(&Rational::one()));
        }
    }

    #[test]
    fn area_is_preserved_by_the_flow() {
        let l = shear_lattice(&cf(), 12).unwrap();
        for t in [FlowTime::log(ratio(46, 1)).unwrap(), FlowTime::Time(Interval::exact(ratio(-5, 2)))] {
            assert!(l.flow(&t).determinant().contains(&Rational::one()));
        }
    }

    #[test]
    fn square_lattice_systole_is_one() {
        let red = reduce_basis(&ShearedLattice::square()).unwrap();
        assert_eq!(red.norms[0], Interval::one());
        let a = reduce_basis(&ShearedLattice::square().flow(&FlowTime::log(ratio(3, 1)).unwrap())).unwrap();
        let b = reduce_basis(&ShearedLattice::square().flow(&FlowTime::log(ratio(1, 3)).unwrap())).unwrap();
        assert_eq!(a.norms[0], b.norms[0]);
    }

    #[test]
    fn sheared_lattice_at_zero() {
        let l = shear_lattice(&cf(), 10).unwrap();
        let red = reduce_basis(&l).unwrap();
        assert_eq!(red.coords[0].1, BigInt::zero());
        assert!(red.systole(64).contains(&Rational::one()));
        assert!((red.systole(64).to_f64() - brute_shortest(l.alpha.to_f64(), 1.0, 2)).abs() < 1e-12);
    }

    #[test]
    fn sheared_lattice_at_first_stage() {
        let l = shear_lattice(&cf(), 12).unwrap().flow(&FlowTime::log(ratio(46, 1)).unwrap());
        let red = reduce_basis(&l).unwrap();
        assert_eq!(red.coords_determinant().abs(), BigInt::one());
        let s = red.systole(64).to_f64();
        assert!((s - brute_shortest(l.alpha.to_f64(), 46.0, 60)).abs() < 1e-12);
        assert!(s > 0.9 && s < 1.1, "{s}");
    }

    #[test]
    fn reduction_spans_same_lattice() {
        for k in 1..=10u64 {
            let x = SlitSurface::standard();
            let t = x.stage_time(k).unwrap();
            let l = lattice_at(&x, &t, 0).unwrap();
            let red = reduce_basis(&l).unwrap();
            assert_eq!(red.coords_determinant().abs(), BigInt::one(), "k = {k}");
        }
    }

    #[test]
    fn systole_reports_at_stages() {
        let x = SlitSurface::standard();
        let r0 = systole(&x, &FlowTime::zero()).unwrap();
        assert!(r0.lattice_systole.contains(&Rational::one()));
        assert_eq!(r0.plus, r0.minus);
        let r1 = systole(&x, &x.stage_time(1).unwrap()).unwrap();
        assert!(r1.lattice_systole.lo() >= &ratio(9, 10));
        for k in 1..=8 {
            let r = systole(&x, &x.stage_time(k).unwrap()).unwrap();
            let v = r.lattice_systole.to_f64();
            assert!(v > 0.5 && v <= 1.0 + 1e-9, "k = {k}: {v}");
            assert!(r.branch_loop.lo() >= r.lattice_systole.lo());
        }
    }

    #[test]
    fn box_search_finds_all_short_vectors() {
        let l = shear_lattice(&cf(), 12).unwrap().flow(&FlowTime::log(ratio(46, 1)).unwrap());
        let red = reduce_basis(&l).unwrap();
        let bound = ratio(3, 1);
        let found = box_search(&l, &red, &Interval::zero(), &bound);
        let mut brute = 0;
        // y = n / 46 and x = 46 (m - n alpha) bound n by 138 and pin m near n alpha
        for n in -140i64..=140 {
            let centre = (n as f64 * 0.8025).round() as i64;
            for m in centre - 3..=centre + 3 {
                let v = l.vector(&BigInt::from(m), &BigInt::from(n));
                if v.length_squared().hi() <= &(&bound * &bound) {
                    brute += 1;
                }
            }
        }
        let certified = found.iter().filter(|c| c.2.hi() <= &(&bound * &bound)).count();
        assert_eq!(certified, brute);
    }
}
