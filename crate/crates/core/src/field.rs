//! Exact prime-field arithmetic, prime search, and Lagrange interpolation.
//!
//! The modulus always fits a machine word; products go through 128-bit
//! intermediates, so no operation can overflow or round.

use crate::poly::UniPoly;
use crate::{Error, Result};

/// A prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    p: u64,
}

impl Field {
    /// Builds `F_p`, rejecting composite moduli.
    pub fn new(p: u64) -> Result<Field> {
        if is_prime(p) {
            Ok(Field { p })
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// The canonical element for an arbitrary signed integer.
    pub fn elt(&self, v: i128) -> Felt {
        let p = self.p as i128;
        Felt {
            value: (v.rem_euclid(p)) as u64,
            field: *self,
        }
    }

    pub fn zero(&self) -> Felt {
        Felt { value: 0, field: *self }
    }

    pub fn one(&self) -> Felt {
        self.elt(1)
    }

    // Raw-value arithmetic, used by the dense kernels (matrices, polynomial
    // coefficient maps) that store bare `u64`s next to a single Field.
    #[inline]
    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    #[inline]
    pub fn neg_raw(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn pow_raw(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv_raw(&self, a: u64) -> Result<u64> {
        if a % self.p == 0 {
            return Err(Error::DivisionByZero);
        }
        // p is prime, so a^(p-2) inverts a.
        Ok(self.pow_raw(a, self.p - 2))
    }

    /// Binomial coefficient mod p by the Pascal recurrence, valid in every
    /// characteristic (factorial quotients are not).
    pub fn binom_raw(&self, n: u32, k: u32) -> u64 {
        if k > n {
            return 0;
        }
        let k = k.min(n - k);
        // Row-by-row Pascal, keeping only one row.
        let mut row = vec![0u64; k as usize + 1];
        row[0] = 1 % self.p;
        for _ in 0..n {
            for j in (1..=k as usize).rev() {
                row[j] = self.add_raw(row[j], row[j - 1]);
            }
        }
        row[k as usize]
    }
}

/// An element of a prime field; operations panic on mixed fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Felt {
    value: u64,
    field: Field,
}

impl Felt {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(&self, exp: u64) -> Felt {
        Felt {
            value: self.field.pow_raw(self.value, exp),
            field: self.field,
        }
    }

    pub fn inv(&self) -> Result<Felt> {
        Ok(Felt {
            value: self.field.inv_raw(self.value)?,
            field: self.field,
        })
    }

    pub fn try_div(&self, rhs: Felt) -> Result<Felt> {
        check_same(self.field, rhs.field);
        Ok(*self * rhs.inv()?)
    }
}

fn check_same(a: Field, b: Field) {
    assert_eq!(
        a.p, b.p,
        "elements of different fields combined (F_{} vs F_{})",
        a.p, b.p
    );
}

impl std::ops::Add for Felt {
    type Output = Felt;
    fn add(self, rhs: Felt) -> Felt {
        check_same(self.field, rhs.field);
        Felt {
            value: self.field.add_raw(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl std::ops::Sub for Felt {
    type Output = Felt;
    fn sub(self, rhs: Felt) -> Felt {
        check_same(self.field, rhs.field);
        Felt {
            value: self.field.sub_raw(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl std::ops::Mul for Felt {
    type Output = Felt;
    fn mul(self, rhs: Felt) -> Felt {
        check_same(self.field, rhs.field);
        Felt {
            value: self.field.mul_raw(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl std::ops::Neg for Felt {
    type Output = Felt;
    fn neg(self) -> Felt {
        Felt {
            value: self.field.neg_raw(self.value),
            field: self.field,
        }
    }
}

impl std::fmt::Display for Felt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Deterministic trial division; desk-scale moduli make this exact and cheap.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map(|s| s <= n).unwrap_or(false) {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Least prime `>= bound`.
pub fn smallest_prime_at_least(bound: u64) -> u64 {
    let mut n = bound.max(2);
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// The Lagrange indicator `L_k` through the given distinct points:
/// `L_k(points[j]) = 1` if `j == k`, else `0`.
pub fn lagrange_indicator(points: &[Felt], k: usize) -> Result<UniPoly> {
    assert!(k < points.len(), "index {} out of range", k);
    let field = points[k].field();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoints);
            }
        }
    }
    let mut num = UniPoly::constant(field, field.one());
    let mut denom = field.one();
    for (j, &pt) in points.iter().enumerate() {
        if j == k {
            continue;
        }
        // num *= (z - pt); denom *= (points[k] - pt)
        num = num.mul(&UniPoly::from_coeffs(field, vec![(-pt).value(), 1]));
        denom = denom * (points[k] - pt);
    }
    Ok(num.scale(denom.inv()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_field_rejects_composites() {
        assert!(Field::new(7).is_ok());
        assert!(matches!(Field::new(6), Err(Error::NotPrime(6))));
        assert!(Field::new(101).is_ok());
        assert!(matches!(Field::new(1), Err(Error::NotPrime(1))));
        assert!(matches!(Field::new(0), Err(Error::NotPrime(0))));
    }

    #[test]
    fn arithmetic_mod_7() {
        let f = Field::new(7).unwrap();
        assert_eq!((f.elt(3) * f.elt(5)).value(), 1);
        assert_eq!((f.elt(2) + f.elt(6)).value(), 1);
        assert_eq!((f.elt(2) - f.elt(5)).value(), 4);
        assert_eq!(f.elt(2).pow(5).value(), 4);
        assert!(f.zero().inv().is_err());
    }

    #[test]
    fn pow_matches_naive_multiplication() {
        let f = Field::new(101).unwrap();
        for base in 0..20u64 {
            let mut acc = f.one();
            for exp in 0..12u64 {
                assert_eq!(f.elt(base as i128).pow(exp), acc);
                acc = acc * f.elt(base as i128);
            }
        }
    }

    #[test]
    fn inverses() {
        for p in [2u64, 3, 7, 101] {
            let f = Field::new(p).unwrap();
            for a in 1..p {
                let a = f.elt(a as i128);
                assert_eq!(a * a.inv().unwrap(), f.one());
            }
        }
    }

    #[test]
    fn prime_search() {
        assert_eq!(smallest_prime_at_least(2), 2);
        assert_eq!(smallest_prime_at_least(10), 11);
        assert_eq!(smallest_prime_at_least(1000), 1009);
        // trial-division oracle on the result
        let q = smallest_prime_at_least(1000);
        assert!(q >= 1000);
        assert!((2..q).take_while(|d| d * d <= q).all(|d| q % d != 0));
    }

    #[test]
    fn binomials_match_pascal_table() {
        let f = Field::new(101).unwrap();
        let mut table = vec![vec![0u64; 13]; 13];
        for n in 0..13 {
            table[n][0] = 1;
            for k in 1..=n {
                table[n][k] = (table[n - 1][k - 1] + table[n - 1][k]) % 101;
            }
        }
        for n in 0..13u32 {
            for k in 0..13u32 {
                assert_eq!(f.binom_raw(n, k), table[n as usize][k as usize]);
            }
        }
        // characteristic 2: binom(2,1) = 2 = 0
        let f2 = Field::new(2).unwrap();
        assert_eq!(f2.binom_raw(2, 1), 0);
        assert_eq!(f2.binom_raw(2, 2), 1);
    }

    #[test]
    fn lagrange_delta_property() {
        let f = Field::new(7).unwrap();
        let pts: Vec<Felt> = (0..4).map(|i| f.elt(i)).collect();
        for k in 0..pts.len() {
            let l = lagrange_indicator(&pts, k).unwrap();
            for (j, &pt) in pts.iter().enumerate() {
                let want = if j == k { f.one() } else { f.zero() };
                assert_eq!(l.eval(pt), want);
            }
        }
        // points (0,1), k=1 gives the polynomial z
        let pts = vec![f.elt(0), f.elt(1)];
        let l = lagrange_indicator(&pts, 1).unwrap();
        assert_eq!(l.coeffs(), &[0, 1]);
    }

    #[test]
    fn lagrange_rejects_duplicates() {
        let f = Field::new(7).unwrap();
        let pts = vec![f.elt(1), f.elt(1)];
        assert!(lagrange_indicator(&pts, 0).is_err());
    }
}
