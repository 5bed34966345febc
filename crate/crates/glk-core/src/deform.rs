//! Local versal deformations at nice primes, obstruction detection and
//! correction, the cocycle-twist operation on finitely presented
//! homomorphism models, and Teichmüller lifts.

use serde::Serialize;
use thiserror::Error;

use crate::mat2::Mat2;
use crate::residue::{Modulus, ResidueInt};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeformError {
    #[error("parameter product A*B is nonzero mod p^m")]
    RelationViolated,
    #[error("parameters must vanish mod p")]
    ParamsNotResidualllyTrivial,
    #[error("lift is not in versal normal form")]
    NotNormalForm,
    #[error("obstruction cannot be corrected: the class vanishes at Frobenius")]
    Uncorrectable,
    #[error("matrix order is divisible by p")]
    OrderDivisibleByP,
    #[error("cocycle identity fails on relation {0}")]
    NotACocycle(usize),
    #[error("value is not trace zero mod p")]
    NotTraceZero,
    #[error("generator count mismatch")]
    GeneratorMismatch,
    #[error("homomorphism violates relation {0}")]
    RelationNotSatisfied(usize),
}

/// Versal parameters `(A, B)` with the relation `A*B = 0` and both
/// parameters vanishing residually.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VersalParams {
    pub q: u64,
    pub a: ResidueInt,
    pub b: ResidueInt,
}

impl VersalParams {
    pub fn new(q: u64, a: ResidueInt, b: ResidueInt) -> Result<Self, DeformError> {
        assert_eq!(a.modulus(), b.modulus());
        let p = a.modulus().p() as u128;
        if !a.value().is_multiple_of(p) || !b.value().is_multiple_of(p) {
            return Err(DeformError::ParamsNotResidualllyTrivial);
        }
        if !(a * b).is_zero() {
            return Err(DeformError::RelationViolated);
        }
        Ok(VersalParams { q, a, b })
    }
}

/// A tame local lift at a nice prime `q`, in versal normal form up to a
/// stored unramified twist:
/// Frobenius to `diag(q(1+A), (1+A)^-1) * twist`, tame inertia to `[[1,B],[0,1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalLift {
    pub q: u64,
    pub sigma: Mat2,
    pub tau: Mat2,
    params: VersalParams,
    twist_unit: ResidueInt,
}

/// The tame relation: `sigma tau sigma^-1 = tau^q`.
pub fn tame_relation_holds(q: u64, sigma: &Mat2, tau: &Mat2) -> bool {
    let lhs = *sigma * *tau * sigma.inverse().expect("sigma invertible");
    let rhs = tau.pow(q as u128);
    lhs == rhs
}

/// Build the versal lift for parameters `(A, B)` at precision `m`.
pub fn versal_lift(
    q: u64,
    p: u64,
    m: u32,
    a_raw: u128,
    b_raw: u128,
) -> Result<LocalLift, DeformError> {
    let md = Modulus::new(p, m).expect("prime modulus");
    let a = ResidueInt::new(a_raw, md);
    let b = ResidueInt::new(b_raw, md);
    versal_lift_with_twist(q, a, b, ResidueInt::one(md))
}

/// Versal lift with an explicit unramified twist unit multiplying Frobenius.
pub fn versal_lift_with_twist(
    q: u64,
    a: ResidueInt,
    b: ResidueInt,
    twist_unit: ResidueInt,
) -> Result<LocalLift, DeformError> {
    let params = VersalParams::new(q, a, b)?;
    let md = a.modulus();
    let one = ResidueInt::one(md);
    let one_plus_a = one + a;
    let qr = ResidueInt::new(q as u128, md);
    let sigma = Mat2::diagonal(
        qr * one_plus_a,
        one_plus_a.inverse().expect("1+A is a unit"),
    )
    .scale(twist_unit);
    let tau = Mat2::new(one, b, ResidueInt::zero(md), one);
    debug_assert!(tame_relation_holds(q, &sigma, &tau));
    Ok(LocalLift {
        q,
        sigma,
        tau,
        params,
        twist_unit,
    })
}

impl LocalLift {
    /// Recover a lift from raw matrices: Frobenius diagonal, inertia
    /// upper-unipotent, and the tame relation must hold.
    pub fn from_matrices(q: u64, sigma: Mat2, tau: Mat2) -> Result<LocalLift, DeformError> {
        let md = sigma.modulus();
        let one = ResidueInt::one(md);
        if !sigma.b.is_zero() || !sigma.c.is_zero() {
            return Err(DeformError::NotNormalForm);
        }
        if !tau.c.is_zero() || tau.a != one || tau.d != one {
            return Err(DeformError::NotNormalForm);
        }
        if !tame_relation_holds(q, &sigma, &tau) {
            return Err(DeformError::RelationViolated);
        }
        // Normalize the twist: sigma = diag(q(1+A)u, u/(1+A)) determines
        // (1+A)^2 = sigma_11 / (q sigma_22); A = 0 mod p picks the root
        // congruent to 1.
        let qr = ResidueInt::new(q as u128, md);
        let ratio = sigma.a
            * (qr * sigma.d)
                .inverse()
                .map_err(|_| DeformError::NotNormalForm)?;
        let one_plus_a = sqrt_one_plus(ratio).ok_or(DeformError::NotNormalForm)?;
        let a = one_plus_a - one;
        let twist_unit = sigma.d * one_plus_a;
        let rebuilt = versal_lift_with_twist(q, a, tau.b, twist_unit)?;
        if rebuilt.sigma != sigma || rebuilt.tau != tau {
            return Err(DeformError::NotNormalForm);
        }
        Ok(rebuilt)
    }

    pub fn modulus(&self) -> Modulus {
        self.sigma.modulus()
    }

    pub fn a_coordinate(&self) -> ResidueInt {
        self.params.a
    }

    pub fn b_coordinate(&self) -> ResidueInt {
        self.params.b
    }

    pub fn twist_unit(&self) -> ResidueInt {
        self.twist_unit
    }

    /// Unobstructed means the `A`-coordinate vanishes: Frobenius is
    /// `diag(q, 1)` up to twist.
    pub fn is_unobstructed(&self) -> bool {
        self.params.a.is_zero()
    }

    /// Serializable snapshot for event logs.
    pub fn snapshot(&self) -> LiftSnapshot {
        LiftSnapshot {
            q: self.q,
            p: self.modulus().p(),
            m: self.modulus().precision(),
            a: self.params.a.value(),
            b: self.params.b.value(),
            twist_unit: self.twist_unit.value(),
            unobstructed: self.is_unobstructed(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LiftSnapshot {
    pub q: u64,
    pub p: u64,
    pub m: u32,
    pub a: u128,
    pub b: u128,
    pub twist_unit: u128,
    pub unobstructed: bool,
}

/// Square root of a unit congruent to 1 mod p, chosen congruent to 1 mod p,
/// by precision-doubling Newton steps. Returns None if the input is not
/// 1 mod p.
fn sqrt_one_plus(x: ResidueInt) -> Option<ResidueInt> {
    let md = x.modulus();
    let p = md.p() as u128;
    if x.value() % p != 1 {
        return None;
    }
    let one = ResidueInt::one(md);
    let two_inv = ResidueInt::new(2, md).inverse().ok()?;
    // y <- (y + x/y)/2 starting from 1; p is odd so convergence doubles.
    let mut y = one;
    for _ in 0..=md.precision() {
        let y_inv = y.inverse().ok()?;
        y = (y + x * y_inv) * two_inv;
    }
    if y * y == x {
        Some(y)
    } else {
        None
    }
}

/// Given a lift whose `A`-coordinate is `alpha * p^(m-1)` and a global class
/// with unramified Frobenius value `f_value != 0` at `q`, return the scalar
/// `beta` and the re-twisted lift with `A = 0`.
///
/// The sign convention is operational: `beta` is whatever zeroes the
/// coordinate, verified by re-running the unobstructedness test.
pub fn correct_obstruction(
    lift: &LocalLift,
    f_value: u64,
) -> Result<(u64, LocalLift), DeformError> {
    let md = lift.modulus();
    let p = md.p();
    let m = md.precision();
    let top = md.p_power(m - 1);
    let a_val = lift.params.a.value();
    if !a_val.is_multiple_of(top) {
        // Not a first-order obstruction; nothing the mod-p class can fix.
        return Err(DeformError::NotNormalForm);
    }
    let alpha = ((a_val / top) % p as u128) as u64;
    if alpha == 0 {
        return Ok((0, *lift));
    }
    if f_value.is_multiple_of(p) {
        return Err(DeformError::Uncorrectable);
    }
    // Twisting by beta * f * p^(m-1) moves A by beta * f_value * p^(m-1).
    let f_inv = mod_inverse(f_value % p, p);
    let beta = (p - alpha) * f_inv % p;
    let shift = ResidueInt::new(beta as u128 % p as u128 * top % md.value(), md)
        * ResidueInt::new(f_value as u128, md);
    let new_a = lift.params.a + shift;
    let corrected = versal_lift_with_twist(lift.q, new_a, lift.params.b, lift.twist_unit)?;
    if !corrected.is_unobstructed() {
        return Err(DeformError::Uncorrectable);
    }
    Ok((beta, corrected))
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b = a as u128 % p as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// A word in the generators of a finitely presented group: signed indices,
/// `+i` for generator `i-1`, `-i` for its inverse.
pub type Word = Vec<i32>;

/// Generators and relation words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub generator_count: usize,
    pub relations: Vec<Word>,
}

impl Presentation {
    /// Free on `n` generators: no relations.
    pub fn free(n: usize) -> Self {
        Presentation {
            generator_count: n,
            relations: vec![],
        }
    }

    /// The tame quotient at `q`: generators sigma, tau with
    /// `sigma tau sigma^-1 tau^-q = 1`.
    pub fn tame(q: u64) -> Self {
        let mut rel: Word = vec![1, 2, -1];
        for _ in 0..q {
            rel.push(-2);
        }
        Presentation {
            generator_count: 2,
            relations: vec![rel],
        }
    }
}

/// A homomorphism model: generator images in GL_2(Z/p^(m+1)) satisfying the
/// relations by evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomomorphismModel {
    pub presentation: Presentation,
    pub images: Vec<Mat2>,
}

impl HomomorphismModel {
    pub fn new(presentation: Presentation, images: Vec<Mat2>) -> Result<Self, DeformError> {
        if presentation.generator_count != images.len() {
            return Err(DeformError::GeneratorMismatch);
        }
        let model = HomomorphismModel {
            presentation,
            images,
        };
        for (i, rel) in model.presentation.relations.iter().enumerate() {
            if !model.evaluate_word(rel).is_identity() {
                return Err(DeformError::RelationNotSatisfied(i));
            }
        }
        Ok(model)
    }

    pub fn modulus(&self) -> Modulus {
        self.images[0].modulus()
    }

    pub fn evaluate_word(&self, word: &Word) -> Mat2 {
        let mut acc = Mat2::identity(self.modulus());
        for &letter in word {
            let idx = letter.unsigned_abs() as usize - 1;
            let g = if letter > 0 {
                self.images[idx]
            } else {
                self.images[idx].inverse().expect("generator invertible")
            };
            acc = acc * g;
        }
        acc
    }

    pub fn residual(&self) -> Vec<Mat2> {
        self.images
            .iter()
            .map(|g| g.reduce(1).expect("reduce to residual"))
            .collect()
    }
}

/// A 1-cochain on the model group with trace-zero values mod p, recorded on
/// generators; the Galois action is conjugation through the residual images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleModel {
    pub values: Vec<Mat2>,
}

impl CocycleModel {
    pub fn new(values: Vec<Mat2>) -> Result<Self, DeformError> {
        for v in &values {
            if !v.trace().is_zero() {
                return Err(DeformError::NotTraceZero);
            }
        }
        Ok(CocycleModel { values })
    }

    /// The coboundary of a trace-zero matrix: `g -> c - Ad(g)(c)`.
    pub fn coboundary(residual: &[Mat2], c: &Mat2) -> Result<Self, DeformError> {
        let values = residual
            .iter()
            .map(|g| {
                let ginv = g.inverse().expect("residual generator invertible");
                *c - (*g * *c * ginv)
            })
            .collect();
        CocycleModel::new(values)
    }

    pub fn zero(residual: &[Mat2]) -> Self {
        CocycleModel {
            values: residual.iter().map(|g| Mat2::zero(g.modulus())).collect(),
        }
    }

    pub fn add(&self, other: &CocycleModel) -> CocycleModel {
        CocycleModel {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| *x + *y)
                .collect(),
        }
    }

    /// Cocycle value accumulated along a word under
    /// `f(gh) = f(g) + Ad(g) f(h)`, with `f(g^-1) = -Ad(g^-1) f(g)`.
    pub fn accumulate(&self, residual: &[Mat2], word: &Word) -> Mat2 {
        let md = self.values[0].modulus();
        let mut g_acc = Mat2::identity(md);
        let mut f_acc = Mat2::zero(md);
        for &letter in word {
            let idx = letter.unsigned_abs() as usize - 1;
            let (g, f) = if letter > 0 {
                (residual[idx], self.values[idx])
            } else {
                let ginv = residual[idx].inverse().expect("invertible");
                (ginv, -(ginv * self.values[idx] * residual[idx]))
            };
            let acc_inv = g_acc.inverse().expect("accumulated word invertible");
            f_acc = f_acc + (g_acc * f * acc_inv);
            g_acc = g_acc * g;
        }
        f_acc
    }

    /// The cocycle identity holds on every relation word.
    pub fn is_valid_for(&self, residual: &[Mat2], presentation: &Presentation) -> bool {
        presentation.relations.iter().all(|rel| {
            self.accumulate(residual, rel)
                .entries()
                .iter()
                .all(|e| e.is_zero())
        })
    }
}

/// Twist a homomorphism model one level up: `g -> (I + p^m f(g)) rho(g)`,
/// where `rho` lands in GL_2(Z/p^(m+1)) and `f` has trace-zero values mod p.
///
/// For `f` a coboundary the result is conjugate to `rho`: the same
/// deformation. The determinant is unchanged.
pub fn twist(rho: &HomomorphismModel, f: &CocycleModel) -> Result<HomomorphismModel, DeformError> {
    let md = rho.modulus();
    assert!(md.precision() >= 2, "twisting needs precision at least 2");
    let m = md.precision() - 1;
    let residual = rho.residual();
    if f.values.len() != rho.images.len() {
        return Err(DeformError::GeneratorMismatch);
    }
    if let Some(bad) = rho.presentation.relations.iter().position(|rel| {
        !f.accumulate(&residual, rel)
            .entries()
            .iter()
            .all(|e| e.is_zero())
    }) {
        return Err(DeformError::NotACocycle(bad));
    }
    let top = md.p_power(m);
    let images = rho
        .images
        .iter()
        .zip(&f.values)
        .map(|(g, fv)| {
            let embedded = Mat2::from_u128(
                [
                    fv.a.value() * top % md.value(),
                    fv.b.value() * top % md.value(),
                    fv.c.value() * top % md.value(),
                    fv.d.value() * top % md.value(),
                ],
                md,
            );
            (Mat2::identity(md) + embedded) * *g
        })
        .collect();
    HomomorphismModel::new(rho.presentation.clone(), images)
}

/// The unique multiplicative lift of a matrix of order prime to p: the
/// stable value of iterated `p^e`-th powers of any entrywise lift, where
/// `e` is the order of `p` modulo the matrix order.
pub fn teichmuller_lift(g: &Mat2, m: u32) -> Result<Mat2, DeformError> {
    let md_low = g.modulus();
    assert_eq!(md_low.precision(), 1, "input lives mod p");
    let p = md_low.p();
    // Order in GL_2(F_p) divides (p^2 - 1)(p^2 - p).
    let cap = (p * p - 1) * (p * p - p);
    let order = g.order(cap).expect("order divides the group order");
    if order.is_multiple_of(p) {
        return Err(DeformError::OrderDivisibleByP);
    }
    let md = Modulus::new(p, m).expect("prime");
    let mut lift = Mat2::from_u128([g.a.value(), g.b.value(), g.c.value(), g.d.value()], md);
    // e = multiplicative order of p mod ord(g).
    let e = if order == 1 {
        1u32
    } else {
        let mut e = 1u32;
        let mut x = p % order;
        while x != 1 {
            x = x * p % order;
            e += 1;
        }
        e
    };
    let step = (p as u128).pow(e);
    for _ in 0..=m {
        let next = lift.pow(step);
        if next == lift {
            return Ok(lift);
        }
        lift = next;
    }
    // Convergence takes at most one step per precision level.
    unreachable!("iterated p-th powers failed to stabilize");
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Xor(u64);
    impl Xor {
        fn next(&mut self) -> u64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            self.0
        }
    }

    #[test]
    fn versal_basepoint() {
        let lift = versal_lift(3, 5, 2, 0, 0).unwrap();
        assert_eq!(
            lift.sigma,
            Mat2::from_u128([3, 0, 0, 1], Modulus::new(5, 2).unwrap())
        );
        assert!(lift.tau.is_identity());
        assert!(lift.is_unobstructed());
        assert!(tame_relation_holds(3, &lift.sigma, &lift.tau));
    }

    #[test]
    fn versal_with_ramification() {
        // A=0, B=5 at m=2: tau nontrivial unipotent, relation verified.
        let lift = versal_lift(3, 5, 2, 0, 5).unwrap();
        assert!(!lift.tau.is_identity());
        assert!(lift.is_unobstructed());
        let md = Modulus::new(5, 2).unwrap();
        // sigma tau sigma^-1 = [[1, 3*5*3^-1... ]] computed directly: diag(3,1) * [[1,5],[0,1]] * diag(3,1)^-1 = [[1,15],[0,1]] = tau^3.
        let conj = lift.sigma * lift.tau * lift.sigma.inverse().unwrap();
        assert_eq!(conj, Mat2::from_u128([1, 15, 0, 1], md));
        assert_eq!(conj, lift.tau.pow(3));
    }

    #[test]
    fn versal_relation_precision_dependence() {
        // A = B = 5: AB = 25, zero mod 25 but not mod 125.
        assert!(versal_lift(3, 5, 2, 5, 5).is_ok());
        assert_eq!(
            versal_lift(3, 5, 3, 5, 5),
            Err(DeformError::RelationViolated)
        );
        // Parameters must vanish mod p.
        assert_eq!(
            versal_lift(3, 5, 2, 1, 0),
            Err(DeformError::ParamsNotResidualllyTrivial)
        );
    }

    #[test]
    fn versal_relation_fuzz() {
        let mut rng = Xor(0xfeed_beef);
        let mut done = 0;
        while done < 200 {
            let p = [5u64, 7, 11][(rng.next() % 3) as usize];
            let m = 2 + (rng.next() % 3) as u32;
            let q_candidates = [2u64, 3, 13, 17, 23];
            let q = q_candidates[(rng.next() % 5) as usize];
            if q == p {
                continue;
            }
            let md = Modulus::new(p, m).unwrap();
            // Legal parameters: one of A, B zero, the other any multiple of p.
            let freebie = ResidueInt::new(rng.next() as u128 * p as u128 % md.value(), md);
            let zero = ResidueInt::zero(md);
            let (a, b) = if rng.next().is_multiple_of(2) {
                (freebie, zero)
            } else {
                (zero, freebie)
            };
            let lift = versal_lift_with_twist(q, a, b, ResidueInt::one(md)).unwrap();
            assert!(tame_relation_holds(q, &lift.sigma, &lift.tau));
            done += 1;
        }
    }

    #[test]
    fn from_matrices_round_trip() {
        let lift = versal_lift(3, 5, 3, 0, 25).unwrap();
        let rebuilt = LocalLift::from_matrices(3, lift.sigma, lift.tau).unwrap();
        assert_eq!(rebuilt, lift);
        assert!(rebuilt.is_unobstructed());

        // Non-diagonal Frobenius image is rejected.
        let md = Modulus::new(5, 2).unwrap();
        let bad_sigma = Mat2::from_u128([3, 1, 0, 1], md);
        let tau = Mat2::identity(md);
        assert_eq!(
            LocalLift::from_matrices(3, bad_sigma, tau),
            Err(DeformError::NotNormalForm)
        );
    }

    #[test]
    fn obstructed_lift_detected() {
        // sigma = diag(q(1 + alpha p^(m-1)), (1 + alpha p^(m-1))^-1), alpha != 0.
        let lift = versal_lift(3, 5, 2, 10, 0).unwrap();
        assert!(!lift.is_unobstructed());
        // A = 0, B arbitrary: unobstructed.
        let lift = versal_lift(3, 5, 2, 0, 20).unwrap();
        assert!(lift.is_unobstructed());
    }

    #[test]
    fn correct_obstruction_examples() {
        // alpha = 0: beta = 0 for any class value.
        let lift = versal_lift(3, 5, 2, 0, 0).unwrap();
        let (beta, fixed) = correct_obstruction(&lift, 4).unwrap();
        assert_eq!(beta, 0);
        assert_eq!(fixed, lift);

        // alpha = 2, f = 1, p = 5: beta = 3 zeroes the coordinate.
        let lift = versal_lift(3, 5, 2, 10, 0).unwrap();
        let (beta, fixed) = correct_obstruction(&lift, 1).unwrap();
        assert_eq!(beta, 3);
        assert!(fixed.is_unobstructed());

        // f = 0 with alpha != 0: nothing to adjust with.
        assert_eq!(
            correct_obstruction(&lift, 0),
            Err(DeformError::Uncorrectable)
        );
    }

    #[test]
    fn correct_obstruction_all_alpha_f() {
        for p in [5u64, 7] {
            for m in 2..=3u32 {
                for alpha in 1..p {
                    for f in 1..p {
                        let md = Modulus::new(p, m).unwrap();
                        let a_raw = alpha as u128 * md.p_power(m - 1);
                        let lift = versal_lift(2, p, m, a_raw, 0).unwrap();
                        assert!(!lift.is_unobstructed());
                        let (_, fixed) = correct_obstruction(&lift, f).unwrap();
                        assert!(
                            fixed.is_unobstructed(),
                            "p={} m={} alpha={} f={}",
                            p,
                            m,
                            alpha,
                            f
                        );
                    }
                }
            }
        }
    }

    fn random_invertible(rng: &mut Xor, md: Modulus) -> Mat2 {
        loop {
            let g = Mat2::from_u128(
                [
                    rng.next() as u128,
                    rng.next() as u128,
                    rng.next() as u128,
                    rng.next() as u128,
                ],
                md,
            );
            if g.is_invertible() {
                return g;
            }
        }
    }

    fn random_trace_zero(rng: &mut Xor, p: u64) -> Mat2 {
        let md = Modulus::new(p, 1).unwrap();
        let a = ResidueInt::new(rng.next() as u128, md);
        let b = ResidueInt::new(rng.next() as u128, md);
        let c = ResidueInt::new(rng.next() as u128, md);
        Mat2::new(a, b, c, -a)
    }

    #[test]
    fn twist_by_zero_is_identity_map() {
        let md = Modulus::new(5, 2).unwrap();
        let mut rng = Xor(0xc0ffee);
        let rho = HomomorphismModel::new(
            Presentation::free(2),
            vec![
                random_invertible(&mut rng, md),
                random_invertible(&mut rng, md),
            ],
        )
        .unwrap();
        let f = CocycleModel::zero(&rho.residual());
        let twisted = twist(&rho, &f).unwrap();
        assert_eq!(twisted.images, rho.images);
    }

    #[test]
    fn coboundary_twist_is_conjugation() {
        let mut rng = Xor(0xdead_beef);
        for p in [5u64, 7] {
            for m in 1..=3u32 {
                let md = Modulus::new(p, m + 1).unwrap();
                for _ in 0..10 {
                    let rho = HomomorphismModel::new(
                        Presentation::free(2),
                        vec![
                            random_invertible(&mut rng, md),
                            random_invertible(&mut rng, md),
                        ],
                    )
                    .unwrap();
                    let c = random_trace_zero(&mut rng, p);
                    let residual = rho.residual();
                    let f = CocycleModel::coboundary(&residual, &c).unwrap();
                    let twisted = twist(&rho, &f).unwrap();
                    // (I + p^m c) rho (I + p^m c)^-1 agrees with the twist.
                    let top = md.p_power(m);
                    let c_embedded = Mat2::from_u128(
                        [
                            c.a.value() * top % md.value(),
                            c.b.value() * top % md.value(),
                            c.c.value() * top % md.value(),
                            c.d.value() * top % md.value(),
                        ],
                        md,
                    );
                    let conjugator = Mat2::identity(md) + c_embedded;
                    for (img, orig) in twisted.images.iter().zip(&rho.images) {
                        assert_eq!(*img, orig.conjugate_by(&conjugator).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn twist_preserves_homomorphism_and_determinant() {
        // Tame models: rho = versal lift images, f solved on the relation.
        let mut rng = Xor(0x1717_2929);
        let mut done = 0;
        while done < 50 {
            let p = [5u64, 7][(rng.next() % 2) as usize];
            let m = 1 + (rng.next() % 3) as u32;
            let q = [2u64, 3, 13, 17][(rng.next() % 4) as usize];
            if q == p {
                continue;
            }
            let md = Modulus::new(p, m + 1).unwrap();
            let b_param = ResidueInt::new(rng.next() as u128 * p as u128 % md.value(), md);
            let lift =
                versal_lift_with_twist(q, ResidueInt::zero(md), b_param, ResidueInt::one(md))
                    .unwrap();
            let rho =
                HomomorphismModel::new(Presentation::tame(q), vec![lift.sigma, lift.tau]).unwrap();
            let residual = rho.residual();
            // Random valid cocycle: sample until the relation identity holds.
            let f = loop {
                let cand = CocycleModel::new(vec![
                    random_trace_zero(&mut rng, p),
                    random_trace_zero(&mut rng, p),
                ])
                .unwrap();
                if cand.is_valid_for(&residual, &rho.presentation) {
                    break cand;
                }
            };
            let twisted = twist(&rho, &f).unwrap();
            // Homomorphism property on the relation word is checked inside
            // HomomorphismModel::new; determinants must be unchanged.
            for (img, orig) in twisted.images.iter().zip(&rho.images) {
                assert_eq!(img.det(), orig.det());
            }
            // Twisted model agrees with rho one level down.
            for (img, orig) in twisted.images.iter().zip(&rho.images) {
                assert_eq!(img.reduce(m).unwrap(), orig.reduce(m).unwrap());
            }
            done += 1;
        }
    }

    #[test]
    fn twist_additivity() {
        let mut rng = Xor(0x4242_4242);
        let md = Modulus::new(5, 3).unwrap();
        let rho = HomomorphismModel::new(
            Presentation::free(2),
            vec![
                random_invertible(&mut rng, md),
                random_invertible(&mut rng, md),
            ],
        )
        .unwrap();
        for _ in 0..20 {
            let f1 = CocycleModel::new(vec![
                random_trace_zero(&mut rng, 5),
                random_trace_zero(&mut rng, 5),
            ])
            .unwrap();
            let f2 = CocycleModel::new(vec![
                random_trace_zero(&mut rng, 5),
                random_trace_zero(&mut rng, 5),
            ])
            .unwrap();
            let lhs = twist(&rho, &f1.add(&f2)).unwrap();
            let rhs = twist(&twist(&rho, &f1).unwrap(), &f2).unwrap();
            // First-order twists at the same level commute and add.
            assert_eq!(lhs.images, rhs.images);
        }
    }

    #[test]
    fn invalid_cocycle_rejected() {
        // On the tame group, a generic pair of values breaks the relation.
        let q = 3u64;
        let lift = versal_lift(q, 5, 2, 0, 0).unwrap();
        let rho =
            HomomorphismModel::new(Presentation::tame(q), vec![lift.sigma, lift.tau]).unwrap();
        let md1 = Modulus::new(5, 1).unwrap();
        let f = CocycleModel::new(vec![
            Mat2::from_u128([1, 0, 0, 4], md1),
            Mat2::from_u128([0, 1, 1, 0], md1),
        ])
        .unwrap();
        let residual = rho.residual();
        if !f.is_valid_for(&residual, &rho.presentation) {
            assert!(matches!(twist(&rho, &f), Err(DeformError::NotACocycle(0))));
        }
    }

    #[test]
    fn teichmuller_examples() {
        let md1 = Modulus::new(5, 1).unwrap();
        let g = Mat2::from_u128([2, 0, 0, 1], md1);
        let lifted = teichmuller_lift(&g, 2).unwrap();
        assert_eq!(
            lifted,
            Mat2::from_u128([7, 0, 0, 1], Modulus::new(5, 2).unwrap())
        );
        assert_eq!(lifted.order(100), Some(4));

        let id = Mat2::identity(md1);
        assert!(teichmuller_lift(&id, 3).unwrap().is_identity());

        let unipotent = Mat2::from_u128([1, 1, 0, 1], md1);
        assert_eq!(
            teichmuller_lift(&unipotent, 2),
            Err(DeformError::OrderDivisibleByP)
        );
    }

    #[test]
    fn teichmuller_round_trip_random() {
        let mut rng = Xor(0x7777_1234);
        for p in [5u64, 7] {
            let md1 = Modulus::new(p, 1).unwrap();
            let mut done = 0;
            while done < 50 {
                let g = random_invertible(&mut rng, md1);
                let order = g.order((p * p - 1) * (p * p - p)).unwrap();
                if order.is_multiple_of(p) {
                    continue;
                }
                done += 1;
                for m in 2..=3u32 {
                    let lifted = teichmuller_lift(&g, m).unwrap();
                    // Reduction recovers g; order is preserved exactly.
                    assert_eq!(lifted.reduce(1).unwrap(), g);
                    assert_eq!(lifted.order(10_000), Some(order));
                    assert!(lifted.pow(order as u128).is_identity());
                }
            }
        }
    }
}
