//! Small integer and rational helpers shared by every module.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;

/// Exact rational used for every bound, order of vanishing and phase.
pub type Rational = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Non-negative residue of `a` modulo `m`.
pub fn modp(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

/// Distinct prime divisors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    out.sort_unstable();
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == [n]
}

/// Returns `(p, k)` when `q = p^k` for a prime `p`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let ps = prime_factors(q);
    if ps.len() != 1 {
        return None;
    }
    let p = ps[0];
    let mut k = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        k += 1;
    }
    Some((p, k))
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

pub fn ceil_rat(x: Rational) -> i64 {
    x.ceil().to_integer()
}

pub fn floor_rat(x: Rational) -> i64 {
    x.floor().to_integer()
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: Rational) -> Rational {
    x - x.floor()
}

/// Second Bernoulli polynomial `x^2 - x + 1/6`.
pub fn bernoulli2(x: Rational) -> Rational {
    x * x - x + rat(1, 6)
}

/// Sawtooth `((x))`: `x - floor(x) - 1/2` off the integers, zero on them.
fn sawtooth(x: Rational) -> Rational {
    if x.is_integer() {
        Rational::zero()
    } else {
        frac(x) - rat(1, 2)
    }
}

/// Dedekind sum `s(h, k)` for `k > 0`, evaluated by reciprocity.
pub fn dedekind_sum(h: i64, k: i64) -> Rational {
    assert!(k > 0, "dedekind_sum needs a positive modulus");
    let h = h.rem_euclid(k);
    if h == 0 || k == 1 {
        return Rational::zero();
    }
    debug_assert_eq!(gcd(h, k), 1);
    // s(h,k) + s(k,h) = (h/k + k/h + 1/(hk)) / 12 - 1/4
    let recip = (rat(h, k) + rat(k, h) + rat(1, h * k)) / 12 - rat(1, 4);
    recip - dedekind_sum(k, h)
}

/// Direct evaluation of the Dedekind sum; quadratic-free but linear in `k`.
pub fn dedekind_sum_naive(h: i64, k: i64) -> Rational {
    (1..k)
        .map(|i| sawtooth(rat(i, k)) * sawtooth(rat(h * i, k)))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Parses `"p/q"`, `"p"` or a decimal-free integer into a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| rat(n, d))
        }
        None => s.parse::<i64>().ok().map(int),
    }
}

pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub(crate) mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Rational::from_integer(n)),
            Raw::Text(t) => parse_rational(&t).ok_or_else(|| D::Error::custom(format!("bad rational {t:?}"))),
        }
    }
}

pub(crate) mod serde_rational_vec {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_rational(t).ok_or_else(|| D::Error::custom(format!("bad rational {t:?}"))))
            .collect()
    }
}
