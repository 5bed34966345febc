//! 2x2 matrices over `Z/p^m`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::residue::{Modulus, ResidueError, ResidueInt};

/// A 2x2 matrix whose four entries share one `(p, m)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: ResidueInt,
    pub b: ResidueInt,
    pub c: ResidueInt,
    pub d: ResidueInt,
}

impl Mat2 {
    pub fn new(a: ResidueInt, b: ResidueInt, c: ResidueInt, d: ResidueInt) -> Self {
        assert!(
            a.modulus() == b.modulus() && a.modulus() == c.modulus() && a.modulus() == d.modulus(),
            "matrix entries must share one modulus"
        );
        Mat2 { a, b, c, d }
    }

    pub fn from_u128(entries: [u128; 4], modulus: Modulus) -> Self {
        Mat2 {
            a: ResidueInt::new(entries[0], modulus),
            b: ResidueInt::new(entries[1], modulus),
            c: ResidueInt::new(entries[2], modulus),
            d: ResidueInt::new(entries[3], modulus),
        }
    }

    pub fn from_i128(entries: [i128; 4], modulus: Modulus) -> Self {
        Mat2 {
            a: ResidueInt::from_i128(entries[0], modulus),
            b: ResidueInt::from_i128(entries[1], modulus),
            c: ResidueInt::from_i128(entries[2], modulus),
            d: ResidueInt::from_i128(entries[3], modulus),
        }
    }

    pub fn identity(modulus: Modulus) -> Self {
        Mat2::from_u128([1, 0, 0, 1], modulus)
    }

    pub fn zero(modulus: Modulus) -> Self {
        Mat2::from_u128([0, 0, 0, 0], modulus)
    }

    pub fn diagonal(x: ResidueInt, y: ResidueInt) -> Self {
        let z = ResidueInt::zero(x.modulus());
        Mat2::new(x, z, z, y)
    }

    /// Companion matrix of `x^2 - t*x + d`.
    pub fn companion(t: ResidueInt, d: ResidueInt) -> Self {
        let m = t.modulus();
        Mat2::new(
            ResidueInt::zero(m),
            ResidueInt::one(m) * (-d),
            ResidueInt::one(m),
            t,
        )
    }

    pub fn modulus(&self) -> Modulus {
        self.a.modulus()
    }

    pub fn trace(&self) -> ResidueInt {
        self.a + self.d
    }

    pub fn det(&self) -> ResidueInt {
        self.a * self.d - self.b * self.c
    }

    /// `(trace, det)`: the characteristic polynomial is `x^2 - trace*x + det`.
    pub fn charpoly(&self) -> (ResidueInt, ResidueInt) {
        (self.trace(), self.det())
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2::identity(self.modulus())
    }

    pub fn is_invertible(&self) -> bool {
        self.det().is_unit()
    }

    pub fn inverse(&self) -> Result<Mat2, ResidueError> {
        let det_inv = self.det().inverse()?;
        Ok(Mat2::new(
            self.d * det_inv,
            -self.b * det_inv,
            -self.c * det_inv,
            self.a * det_inv,
        ))
    }

    pub fn pow(&self, mut exp: u128) -> Mat2 {
        let mut acc = Mat2::identity(self.modulus());
        let mut base = *self;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative order, searched up to `cap`. `None` when no power up to
    /// `cap` is the identity.
    pub fn order(&self, cap: u64) -> Option<u64> {
        let mut acc = Mat2::identity(self.modulus());
        for n in 1..=cap {
            acc = acc * *self;
            if acc.is_identity() {
                return Some(n);
            }
        }
        None
    }

    pub fn reduce(&self, m2: u32) -> Result<Mat2, ResidueError> {
        Ok(Mat2::new(
            self.a.reduce(m2)?,
            self.b.reduce(m2)?,
            self.c.reduce(m2)?,
            self.d.reduce(m2)?,
        ))
    }

    pub fn scale(&self, s: ResidueInt) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn conjugate_by(&self, h: &Mat2) -> Result<Mat2, ResidueError> {
        Ok(*h * *self * h.inverse()?)
    }

    pub fn entries(&self) -> [ResidueInt; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a + rhs.a,
            self.b + rhs.b,
            self.c + rhs.c,
            self.d + rhs.d,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a - rhs.a,
            self.b - rhs.b,
            self.c - rhs.c,
            self.d - rhs.d,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]] (mod {:?})",
            self.a,
            self.b,
            self.c,
            self.d,
            self.modulus()
        )
    }
}
