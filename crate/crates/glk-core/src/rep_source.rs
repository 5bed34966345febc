//! Frobenius data (trace, determinant mod `p^m`) at unramified primes,
//! produced from concrete residual-representation sources: elliptic curves
//! over `Q`, splitting fields of integer polynomials, and explicit tables.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{distinct_degree_factor, factor_degree_lcm, PolyOverFp};
use crate::residue::{is_prime_u64, Modulus, ResidueInt};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SourceError {
    #[error("curve has zero discriminant")]
    SingularCurve,
    #[error("{q} is a prime of bad reduction")]
    BadReduction { q: u64 },
    #[error("prime {q} exceeds the configured bound {bound}")]
    LimitExceeded { q: u64, bound: u64 },
    #[error("{q} is ramified for this source")]
    Ramified { q: u64 },
    #[error("{q} divides the polynomial discriminant")]
    RamifiedDiscriminant { q: u64 },
    #[error("source cannot produce this datum: {0}")]
    Unsupported(String),
    #[error("no table entry for prime {q}")]
    MissingEntry { q: u64 },
    #[error("table entry at q={q} violates det = q^k")]
    DeterminantMismatch { q: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial has rational root {0}, so it is not irreducible")]
    RationalRoot(i128),
    #[error("Hasse bound violated at q={q}: |{a}| > 2*sqrt(q)")]
    HasseViolation { q: u64, a: i64 },
    #[error("curve coefficients exceed the supported size")]
    CoefficientsTooLarge,
    #[error("discriminant has a cofactor too large to factor here")]
    DiscriminantNotFactorable,
}

/// Conjugacy-class data of Frobenius at an unramified prime `q`:
/// trace and determinant mod `p^m`, with `det = q^k` enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrobeniusDatum {
    pub q: u64,
    pub t: ResidueInt,
    pub d: ResidueInt,
    pub k: u32,
}

impl FrobeniusDatum {
    pub fn new(q: u64, t: ResidueInt, k: u32) -> Result<Self, SourceError> {
        if !is_prime_u64(q) {
            return Err(SourceError::NotPrime(q));
        }
        let d = ResidueInt::new(q as u128, t.modulus()).pow(k as u128);
        Ok(FrobeniusDatum { q, t, d, k })
    }

    /// Construct with an explicitly supplied determinant, re-checking the
    /// `d = q^k` invariant.
    pub fn with_det(q: u64, t: ResidueInt, d: ResidueInt, k: u32) -> Result<Self, SourceError> {
        let datum = FrobeniusDatum::new(q, t, k)?;
        if datum.d != d {
            return Err(SourceError::DeterminantMismatch { q });
        }
        Ok(datum)
    }

    pub fn modulus(&self) -> Modulus {
        self.t.modulus()
    }

    pub fn reduce(&self, m2: u32) -> FrobeniusDatum {
        FrobeniusDatum {
            q: self.q,
            t: self.t.reduce(m2).expect("reduce to lower precision"),
            d: self.d.reduce(m2).expect("reduce to lower precision"),
            k: self.k,
        }
    }
}

/// A curve in long Weierstrass form, the weight-2 source (`k = 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipticCurveSource {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
    discriminant: i128,
    conductor_support: BTreeSet<u64>,
    max_prime: u64,
}

pub const DEFAULT_MAX_PRIME: u64 = 1_000_000;

impl EllipticCurveSource {
    pub fn new(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Result<Self, SourceError> {
        // The discriminant is degree 7 in the coefficients; this cap keeps
        // the computation exact in 128 bits.
        for a in [a1, a2, a3, a4, a6] {
            if a.unsigned_abs() > 100_000 {
                return Err(SourceError::CoefficientsTooLarge);
            }
        }
        let (b2, b4, b6, b8) = b_invariants(a1, a2, a3, a4, a6);
        let discriminant = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
        if discriminant == 0 {
            return Err(SourceError::SingularCurve);
        }
        let conductor_support = prime_support(discriminant)?;
        Ok(EllipticCurveSource {
            a1,
            a2,
            a3,
            a4,
            a6,
            discriminant,
            conductor_support,
            max_prime: DEFAULT_MAX_PRIME,
        })
    }

    /// The curve `y^2 + y = x^3 - x` (conductor 37), whose mod-p
    /// representations are surjective for every prime p.
    pub fn curve_37a1() -> Self {
        EllipticCurveSource::new(0, 0, 1, -1, 0).expect("37a1 is nonsingular")
    }

    pub fn with_max_prime(mut self, bound: u64) -> Self {
        self.max_prime = bound;
        self
    }

    pub fn discriminant(&self) -> i128 {
        self.discriminant
    }

    pub fn conductor_support(&self) -> &BTreeSet<u64> {
        &self.conductor_support
    }

    pub fn has_good_reduction(&self, q: u64) -> bool {
        self.discriminant % q as i128 != 0
    }

    /// `a_q = q + 1 - #E(F_q)`, counting the point at infinity. Naive
    /// enumeration: direct point listing for q in {2, 3}, a quadratic-residue
    /// character sum on the completed short form otherwise.
    pub fn trace_of_frobenius(&self, q: u64) -> Result<i64, SourceError> {
        if !is_prime_u64(q) {
            return Err(SourceError::NotPrime(q));
        }
        if !self.has_good_reduction(q) {
            return Err(SourceError::BadReduction { q });
        }
        if q > self.max_prime {
            return Err(SourceError::LimitExceeded {
                q,
                bound: self.max_prime,
            });
        }
        let a = if q <= 3 {
            self.count_long_form(q)
        } else {
            self.count_short_form(q)
        };
        let hasse = 2.0 * (q as f64).sqrt();
        if (a.abs() as f64) > hasse + 1e-9 {
            return Err(SourceError::HasseViolation { q, a });
        }
        Ok(a)
    }

    fn count_long_form(&self, q: u64) -> i64 {
        let q = q as i64;
        let m = |x: i64| x.rem_euclid(q);
        let mut affine = 0i64;
        for x in 0..q {
            for y in 0..q {
                let lhs = m(y * y + self.a1 * x * y + self.a3 * y);
                let rhs = m(x * x * x + self.a2 * x * x + self.a4 * x + self.a6);
                if lhs == rhs {
                    affine += 1;
                }
            }
        }
        q + 1 - (affine + 1)
    }

    fn count_short_form(&self, q: u64) -> i64 {
        // Complete to y^2 = x^3 + A x + B; valid for char not in {2, 3}.
        let (b2, b4, b6, _) = b_invariants(self.a1, self.a2, self.a3, self.a4, self.a6);
        let c4 = b2 * b2 - 24 * b4;
        let c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
        let qi = q as i128;
        let a = (-27 * c4).rem_euclid(qi) as u64;
        let b = (-54 * c6).rem_euclid(qi) as u64;

        // chi[u] = 1 if u is a nonzero square, -1 if a non-square, 0 at 0.
        let mut chi = vec![-1i8; q as usize];
        chi[0] = 0;
        for x in 1..q {
            chi[((x as u128 * x as u128) % q as u128) as usize] = 1;
        }
        let mut sum = 0i64;
        let qq = q as u128;
        for x in 0..qq {
            let fx = ((x * x % qq) * x % qq + a as u128 * x % qq + b as u128) % qq;
            sum += chi[fx as usize] as i64;
        }
        -sum
    }
}

fn b_invariants(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> (i128, i128, i128, i128) {
    let (a1, a2, a3, a4, a6) = (a1 as i128, a2 as i128, a3 as i128, a4 as i128, a6 as i128);
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    (b2, b4, b6, b8)
}

fn prime_support(n: i128) -> Result<BTreeSet<u64>, SourceError> {
    let mut n = n.unsigned_abs();
    let mut out = BTreeSet::new();
    let mut d: u128 = 2;
    while d <= 1_000_000 && d * d <= n {
        if n.is_multiple_of(d) {
            out.insert(d as u64);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        // No factor up to 10^6 remains: below 10^12 the cofactor is prime;
        // above that, primality is decided only when it fits 64 bits.
        if n < 1_000_000_000_000 || (n <= u64::MAX as u128 && is_prime_u64(n as u64)) {
            out.insert(n as u64);
        } else {
            return Err(SourceError::DiscriminantNotFactorable);
        }
    }
    Ok(out)
}

/// Splitting field of a monic irreducible integer polynomial. Only the
/// Frobenius order (cycle type on the roots) is available; there is no
/// canonical 2-dimensional trace to extract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplittingFieldSource {
    coeffs: Vec<i128>, // ascending, monic
    discriminant: BigInt,
}

impl SplittingFieldSource {
    /// `coeffs` descending, leading term first, monic.
    pub fn new(coeffs_descending: &[i128]) -> Result<Self, SourceError> {
        assert!(
            coeffs_descending.first() == Some(&1),
            "polynomial must be monic"
        );
        let coeffs: Vec<i128> = coeffs_descending.iter().rev().copied().collect();
        // Spot-check irreducibility: no rational root among divisors of the
        // constant term.
        let c0 = coeffs[0];
        if c0 == 0 {
            return Err(SourceError::RationalRoot(0));
        }
        let mut d: i128 = 1;
        while d * d <= c0.abs() {
            if c0 % d == 0 {
                for cand in [d, -d, c0 / d, -(c0 / d)] {
                    if eval_int(&coeffs, cand) == BigInt::zero() {
                        return Err(SourceError::RationalRoot(cand));
                    }
                }
            }
            d += 1;
        }
        let discriminant = integer_discriminant(&coeffs);
        Ok(SplittingFieldSource {
            coeffs,
            discriminant,
        })
    }

    /// The degree-7 polynomial of Zeh-Marschke, whose splitting field has
    /// Galois group PSL_2(F_7) over the rationals.
    pub fn zeh_marschke() -> Self {
        SplittingFieldSource::new(&[1, -22, 141, -204, -428, 768, 320, -512])
            .expect("fixed polynomial is monic and has no rational root")
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    pub fn coefficients_descending(&self) -> Vec<i128> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn is_ramified(&self, q: u64) -> bool {
        (&self.discriminant % BigInt::from(q)).is_zero()
    }

    /// Order of Frobenius acting on the roots mod `q`: the lcm of the
    /// irreducible-factor degrees of the reduction.
    pub fn frobenius_order(&self, q: u64) -> Result<u64, SourceError> {
        if !is_prime_u64(q) {
            return Err(SourceError::NotPrime(q));
        }
        if self.is_ramified(q) {
            return Err(SourceError::RamifiedDiscriminant { q });
        }
        let f = PolyOverFp::new(q, &self.coeffs).expect("q prime");
        let degrees = distinct_degree_factor(&f).map_err(|_| {
            // Unramified primes give squarefree reductions; reaching this
            // would mean the discriminant computation is wrong.
            SourceError::RamifiedDiscriminant { q }
        })?;
        Ok(factor_degree_lcm(&degrees))
    }

    pub fn factor_degrees(&self, q: u64) -> Result<Vec<(usize, usize)>, SourceError> {
        if self.is_ramified(q) {
            return Err(SourceError::RamifiedDiscriminant { q });
        }
        let f = PolyOverFp::new(q, &self.coeffs).expect("q prime");
        distinct_degree_factor(&f).map_err(|_| SourceError::RamifiedDiscriminant { q })
    }
}

fn eval_int(coeffs_ascending: &[i128], x: i128) -> BigInt {
    let mut acc = BigInt::zero();
    let xb = BigInt::from(x);
    for &c in coeffs_ascending.iter().rev() {
        acc = acc * &xb + BigInt::from(c);
    }
    acc
}

/// Exact integer discriminant of a monic polynomial, via the resultant with
/// its derivative: disc(f) = (-1)^(n(n-1)/2) * Res(f, f').
fn integer_discriminant(coeffs_ascending: &[i128]) -> BigInt {
    let n = coeffs_ascending.len() - 1;
    let f: Vec<BigInt> = coeffs_ascending.iter().map(|&c| BigInt::from(c)).collect();
    let fp: Vec<BigInt> = coeffs_ascending
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| BigInt::from(c) * BigInt::from(i as i64))
        .collect();
    let res = resultant(&f, &fp);
    if (n * (n - 1) / 2) % 2 == 1 {
        -res
    } else {
        res
    }
}

/// Resultant via the Sylvester matrix, Bareiss fraction-free elimination.
fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let n = f.len() - 1;
    let m = g.len() - 1;
    let size = n + m;
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    for row in 0..m {
        for (j, c) in f.iter().rev().enumerate() {
            mat[row][row + j] = c.clone();
        }
    }
    for row in 0..n {
        for (j, c) in g.iter().rev().enumerate() {
            mat[m + row][row + j] = c.clone();
        }
    }
    // Bareiss: exact integer determinant without fractions.
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..size - 1 {
        if mat[k][k].is_zero() {
            let swap = (k + 1..size).find(|&r| !mat[r][k].is_zero());
            match swap {
                Some(r) => {
                    mat.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j];
                mat[i][j] = num / &prev;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }
    sign * mat[size - 1][size - 1].clone()
}

/// Explicit (trace, det) table, for injecting arbitrary Frobenius data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitFrobTable {
    pub p: u64,
    pub m: u32,
    pub k: u32,
    pub entries: BTreeMap<String, TableEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub t: u128,
    pub d: u128,
}

impl ExplicitFrobTable {
    pub fn new(p: u64, m: u32, k: u32) -> Self {
        ExplicitFrobTable {
            p,
            m,
            k,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, q: u64, t: u128) -> Result<(), SourceError> {
        let md = Modulus::new(self.p, self.m).map_err(|_| SourceError::NotPrime(self.p))?;
        let d = ResidueInt::new(q as u128, md).pow(self.k as u128);
        self.entries.insert(
            q.to_string(),
            TableEntry {
                t: t % md.value(),
                d: d.value(),
            },
        );
        Ok(())
    }

    pub fn lookup(&self, q: u64) -> Result<FrobeniusDatum, SourceError> {
        let md = Modulus::new(self.p, self.m).map_err(|_| SourceError::NotPrime(self.p))?;
        let entry = self
            .entries
            .get(&q.to_string())
            .ok_or(SourceError::MissingEntry { q })?;
        FrobeniusDatum::with_det(
            q,
            ResidueInt::new(entry.t, md),
            ResidueInt::new(entry.d, md),
            self.k,
        )
    }

    pub fn listed_primes(&self) -> Vec<u64> {
        let mut qs: Vec<u64> = self.entries.keys().filter_map(|s| s.parse().ok()).collect();
        qs.sort_unstable();
        qs
    }
}

/// Any producer of Frobenius data at unramified primes.
#[derive(Debug, Clone)]
pub enum RepresentationSource {
    Curve(EllipticCurveSource),
    SplittingField(SplittingFieldSource),
    Table(ExplicitFrobTable),
}

impl RepresentationSource {
    /// Trace/determinant datum at `q`, at precision `(p, m)` and weight `k`.
    pub fn frobenius_datum(
        &self,
        q: u64,
        p: u64,
        m: u32,
        k: u32,
    ) -> Result<FrobeniusDatum, SourceError> {
        if q == p {
            return Err(SourceError::Ramified { q });
        }
        let md = Modulus::new(p, m).map_err(|_| SourceError::NotPrime(p))?;
        match self {
            RepresentationSource::Curve(curve) => {
                if k != 1 {
                    return Err(SourceError::Unsupported(
                        "elliptic-curve sources have determinant weight k = 1".into(),
                    ));
                }
                if !curve.has_good_reduction(q) {
                    return Err(SourceError::Ramified { q });
                }
                let a = curve.trace_of_frobenius(q)?;
                FrobeniusDatum::new(q, ResidueInt::from_i128(a as i128, md), 1)
            }
            RepresentationSource::SplittingField(_) => Err(SourceError::Unsupported(
                "splitting-field sources expose only the Frobenius order".into(),
            )),
            RepresentationSource::Table(table) => {
                if table.p != p || table.m != m || table.k != k {
                    return Err(SourceError::Unsupported(format!(
                        "table carries (p, m, k) = ({}, {}, {})",
                        table.p, table.m, table.k
                    )));
                }
                table.lookup(q)
            }
        }
    }

    pub fn is_ramified(&self, q: u64) -> bool {
        match self {
            RepresentationSource::Curve(c) => !c.has_good_reduction(q),
            RepresentationSource::SplittingField(s) => s.is_ramified(q),
            RepresentationSource::Table(_) => false,
        }
    }
}
