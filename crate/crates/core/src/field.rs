//! Finite fields `𝔽_q`, `q = p^k ≤ 10⁴`, in Zech-logarithm representation.
//!
//! Extension fields are built from an explicit monic irreducible polynomial;
//! by default the least one in the base-`p` encoding of its coefficients.
//! Elements are stored as discrete logarithms to a fixed primitive element,
//! so multiplication is an addition of exponents and addition goes through
//! the Zech table `Z(n) = log(1 + gⁿ)`.

use serde::{Deserialize, Serialize};

use crate::arith::prime_power;
use crate::error::{Error, Result};

/// Largest field size supported by the point-count enumeration.
pub const FIELD_CEILING: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteFieldSpec {
    pub p: u64,
    pub k: u32,
    pub q: u64,
}

/// A field element: its discrete logarithm, or `q − 1` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct El(u32);

#[derive(Debug, Clone)]
pub struct FiniteField {
    spec: FiniteFieldSpec,
    /// Coefficients of the defining polynomial, constant term first, monic.
    modulus: Vec<u64>,
    /// `exp[i]` is the base-`p` encoding of `gⁱ`.
    exp: Vec<u32>,
    /// Inverse of `exp`; `log[0]` is the zero sentinel.
    log: Vec<u32>,
    zech: Vec<u32>,
}

fn poly_from_int(mut n: u64, p: u64, k: u32) -> Vec<u64> {
    (0..k)
        .map(|_| {
            let c = n % p;
            n /= p;
            c
        })
        .collect()
}

fn poly_to_int(coeffs: &[u64], p: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// `a · b mod modulus` over `𝔽_p`; inputs have degree `< k`.
fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (k..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &m) in modulus[..k].iter().enumerate() {
            let t = deg - k + i;
            prod[t] = (prod[t] + (p - c) * m) % p;
        }
    }
    prod.truncate(k);
    prod
}

/// Remainder of `f` modulo the monic polynomial `g` (constant term first).
fn poly_rem(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        for (i, &gi) in g.iter().enumerate() {
            r[shift + i] = (r[shift + i] + (p - c) * gi) % p;
        }
        r.pop();
        while r.last() == Some(&0) && r.len() > dg {
            r.pop();
        }
    }
    r
}

/// Trial division by every monic polynomial of degree `1..=k/2`.
pub fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let k = modulus.len() - 1;
    if k == 0 || modulus[k] != 1 {
        return false;
    }
    for d in 1..=k / 2 {
        for tail in 0..p.pow(d as u32) {
            let mut g = poly_from_int(tail, p, d as u32);
            g.push(1);
            if poly_rem(modulus, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Least monic irreducible polynomial of degree `k` over `𝔽_p`.
pub fn least_irreducible(p: u64, k: u32) -> Vec<u64> {
    (0..p.pow(k))
        .map(|tail| {
            let mut f = poly_from_int(tail, p, k);
            f.push(1);
            f
        })
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

impl FiniteField {
    pub fn new(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or(Error::InvalidField(q))?;
        Self::with_modulus(p, least_irreducible(p, k))
    }

    /// Builds `𝔽_p[x]/(modulus)`; `modulus` is monic, constant term first.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        let k = (modulus.len() - 1) as u32;
        if prime_power(p) != Some((p, 1)) || !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(p.saturating_pow(k)));
        }
        let q = p.pow(k);
        if q > FIELD_CEILING {
            return Err(Error::FieldTooLarge { q, ceiling: FIELD_CEILING });
        }
        let order = q - 1;
        let factors = crate::arith::prime_factors(order);
        let pow = |base: &[u64], mut e: u64| {
            let mut acc = poly_from_int(1, p, k);
            let mut b = base.to_vec();
            while e > 0 {
                if e & 1 == 1 {
                    acc = poly_mulmod(&acc, &b, &modulus, p);
                }
                b = poly_mulmod(&b, &b, &modulus, p);
                e >>= 1;
            }
            poly_to_int(&acc, p)
        };
        let generator = (1..q)
            .map(|n| poly_from_int(n, p, k))
            .find(|g| factors.iter().all(|&r| pow(g, order / r) != 1))
            .expect("the multiplicative group is cyclic");

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![order as u32; q as usize];
        let mut cur = poly_from_int(1, p, k);
        for i in 0..order {
            let v = poly_to_int(&cur, p);
            exp.push(v as u32);
            log[v as usize] = i as u32;
            cur = poly_mulmod(&cur, &generator, &modulus, p);
        }
        let mut field = Self {
            spec: FiniteFieldSpec { p, k, q },
            modulus,
            exp,
            log,
            zech: Vec::new(),
        };
        let one = poly_from_int(1, p, k);
        field.zech = (0..order as usize)
            .map(|i| {
                let g = poly_from_int(field.exp[i] as u64, p, k);
                let sum: Vec<u64> = g.iter().zip(&one).map(|(a, b)| (a + b) % p).collect();
                field.log[poly_to_int(&sum, p) as usize]
            })
            .collect();
        Ok(field)
    }

    pub fn spec(&self) -> FiniteFieldSpec {
        self.spec
    }

    pub fn q(&self) -> u64 {
        self.spec.q
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    fn order(&self) -> u32 {
        (self.spec.q - 1) as u32
    }

    pub fn zero(&self) -> El {
        El(self.order())
    }

    pub fn one(&self) -> El {
        El(0)
    }

    pub fn is_zero(&self, x: El) -> bool {
        x.0 == self.order()
    }

    /// Element with base-`p` encoding `n` (so `from_int(a)` for `a < p` is the prime-field residue).
    pub fn from_int(&self, n: u64) -> El {
        El(self.log[(n % self.spec.q) as usize])
    }

    pub fn from_i64(&self, n: i64) -> El {
        self.from_int(n.rem_euclid(self.spec.p as i64) as u64)
    }

    pub fn to_int(&self, x: El) -> u64 {
        if self.is_zero(x) {
            0
        } else {
            self.exp[x.0 as usize] as u64
        }
    }

    /// `gⁱ` for the fixed primitive element `g`.
    pub fn gen_pow(&self, i: u64) -> El {
        El((i % self.order() as u64) as u32)
    }

    /// Discrete logarithm of a nonzero element.
    pub fn log_of(&self, x: El) -> Option<u32> {
        (!self.is_zero(x)).then_some(x.0)
    }

    pub fn add(&self, x: El, y: El) -> El {
        if self.is_zero(x) {
            return y;
        }
        if self.is_zero(y) {
            return x;
        }
        let n = self.order();
        let d = (y.0 + n - x.0) % n;
        let z = self.zech[d as usize];
        if z == n {
            self.zero()
        } else {
            El((x.0 + z) % n)
        }
    }

    pub fn neg(&self, x: El) -> El {
        if self.is_zero(x) || self.spec.p == 2 {
            return x;
        }
        El((x.0 + self.order() / 2) % self.order())
    }

    pub fn sub(&self, x: El, y: El) -> El {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: El, y: El) -> El {
        if self.is_zero(x) || self.is_zero(y) {
            return self.zero();
        }
        El((x.0 + y.0) % self.order())
    }

    pub fn inv(&self, x: El) -> Option<El> {
        (!self.is_zero(x)).then(|| El((self.order() - x.0) % self.order()))
    }

    pub fn div(&self, x: El, y: El) -> Option<El> {
        self.inv(y).map(|yi| self.mul(x, yi))
    }

    pub fn pow(&self, x: El, e: i64) -> El {
        if self.is_zero(x) {
            return if e == 0 { self.one() } else { self.zero() };
        }
        let n = self.order() as i64;
        El(((x.0 as i64 * e).rem_euclid(n)) as u32)
    }

    /// Multiplies by a small integer.
    pub fn scale(&self, c: i64, x: El) -> El {
        self.mul(self.from_i64(c), x)
    }

    pub fn is_square(&self, x: El) -> bool {
        self.is_zero(x) || self.spec.p == 2 || x.0 % 2 == 0
    }

    pub fn sqrt(&self, x: El) -> Option<El> {
        if self.is_zero(x) {
            return Some(x);
        }
        if self.spec.p == 2 {
            let n = self.order();
            // squaring is a bijection; halve the exponent modulo the odd order
            let half = (x.0 as u64 * ((n as u64 + 1) / 2)) % n as u64;
            return Some(El(half as u32));
        }
        (x.0 % 2 == 0).then_some(El(x.0 / 2))
    }

    /// Quadratic character: `1`, `−1`, or `0`.
    pub fn chi(&self, x: El) -> i64 {
        if self.is_zero(x) {
            0
        } else if x.0 % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All elements in increasing base-`p` encoding.
    pub fn elements(&self) -> impl Iterator<Item = El> + '_ {
        (0..self.spec.q).map(|n| self.from_int(n))
    }

    /// A fixed non-square (odd characteristic).
    pub fn non_square(&self) -> El {
        self.gen_pow(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_irreducibles() {
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]); // x² + 1
        assert_eq!(least_irreducible(2, 3), vec![1, 1, 0, 1]); // x³ + x + 1
        assert!(!is_irreducible(&[2, 0, 1], 3)); // x² + 2 = (x+1)(x+2)
    }

    #[test]
    fn field_axioms_small() {
        for q in [2, 3, 4, 5, 8, 9, 25, 27, 49, 81] {
            let f = FiniteField::new(q).unwrap();
            let els: Vec<El> = f.elements().collect();
            assert_eq!(els.len() as u64, q);
            let mut ints: Vec<u64> = els.iter().map(|&x| f.to_int(x)).collect();
            ints.sort_unstable();
            ints.dedup();
            assert_eq!(ints.len() as u64, q);
            for &x in &els {
                assert_eq!(f.add(x, f.neg(x)), f.zero());
                if !f.is_zero(x) {
                    assert_eq!(f.mul(x, f.inv(x).unwrap()), f.one());
                }
                for &y in els.iter().step_by(3) {
                    assert_eq!(f.add(x, y), f.add(y, x));
                    for &z in els.iter().step_by(7) {
                        assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
                    }
                }
            }
            // characteristic
            let p_times_one = (0..f.p()).fold(f.zero(), |acc, _| acc_add(&f, acc));
            assert_eq!(p_times_one, f.zero());
        }
    }

    fn acc_add(f: &FiniteField, acc: El) -> El {
        f.add(acc, f.one())
    }

    #[test]
    fn square_roots() {
        let f = FiniteField::new(49).unwrap();
        for x in f.elements() {
            let s = f.mul(x, x);
            assert!(f.is_square(s));
            let r = f.sqrt(s).unwrap();
            assert_eq!(f.mul(r, r), s);
        }
        assert!(!f.is_square(f.non_square()));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(FiniteField::new(12).is_err());
        assert!(matches!(FiniteField::new(10_007), Err(Error::FieldTooLarge { .. })));
        assert!(FiniteField::with_modulus(3, vec![2, 0, 1]).is_err());
    }
}
