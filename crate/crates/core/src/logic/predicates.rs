//! Numerical predicates and their registry.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Oracle = Arc<dyn Fn(&[BigInt]) -> Result<bool> + Send + Sync>;

/// A named decision procedure over integer tuples.
#[derive(Clone)]
pub struct NumericPredicate {
    pub name: String,
    pub arity: usize,
    oracle: Oracle,
}

impl fmt::Debug for NumericPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumericPredicate({}/{})", self.name, self.arity)
    }
}

impl NumericPredicate {
    pub fn new(name: impl Into<String>, arity: usize, oracle: Oracle) -> Self {
        NumericPredicate {
            name: name.into(),
            arity,
            oracle,
        }
    }

    pub fn call(&self, args: &[BigInt]) -> Result<bool> {
        if args.len() != self.arity {
            return Err(Error::Arity {
                name: self.name.clone(),
                expected: self.arity,
                found: args.len(),
            });
        }
        (self.oracle)(args)
    }
}

/// Predicate collection; read-only during evaluation.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    preds: BTreeMap<String, NumericPredicate>,
}

impl Registry {
    /// An empty registry (no predicates at all).
    pub fn empty() -> Self {
        Self::default()
    }

    /// `geq1`, `eq`, `leq` and `prime`.
    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register("geq1", 1, Arc::new(|a: &[BigInt]| Ok(a[0] >= BigInt::one())));
        r.register("eq", 2, Arc::new(|a: &[BigInt]| Ok(a[0] == a[1])));
        r.register("leq", 2, Arc::new(|a: &[BigInt]| Ok(a[0] <= a[1])));
        r.register("prime", 1, Arc::new(|a: &[BigInt]| Ok(is_prime(&a[0]))));
        r
    }

    pub fn register(&mut self, name: impl Into<String>, arity: usize, oracle: Oracle) {
        let name = name.into();
        self.preds
            .insert(name.clone(), NumericPredicate::new(name, arity, oracle));
    }

    pub fn get(&self, name: &str) -> Option<&NumericPredicate> {
        self.preds.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.preds.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.preds.keys().map(String::as_str)
    }

    pub fn call(&self, name: &str, args: &[BigInt]) -> Result<bool> {
        self.get(name)
            .ok_or_else(|| Error::UnknownPredicate(name.to_string()))?
            .call(args)
    }
}

/// Primality. Deterministic Miller-Rabin for values below 2^64, and the
/// first twenty prime bases above that.
pub fn is_prime(n: &BigInt) -> bool {
    if n.is_negative() || n < &BigInt::from(2) {
        return false;
    }
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    const BASES: [u32; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    for &p in &BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for &a in &BASES {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x).mod_floor(n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn prime_matches_trial_division() {
        for n in 0..5000u64 {
            assert_eq!(is_prime(&BigInt::from(n)), trial(n), "n = {n}");
        }
        assert!(!is_prime(&BigInt::from(-7)));
        // Carmichael numbers
        for c in [561u64, 1105, 1729, 2465, 2821, 6601, 8911] {
            assert!(!is_prime(&BigInt::from(c)));
        }
        let m61 = (BigInt::one() << 61) - 1;
        assert!(is_prime(&m61));
        let m89 = (BigInt::one() << 89) - 1;
        assert!(is_prime(&m89));
        assert!(!is_prime(&(&m89 * &m61)));
    }

    #[test]
    fn builtin_semantics() {
        let r = Registry::builtin();
        let i = |v: i64| BigInt::from(v);
        assert!(r.call("geq1", &[i(1)]).unwrap());
        assert!(!r.call("geq1", &[i(0)]).unwrap());
        assert!(!r.call("geq1", &[i(-3)]).unwrap());
        assert!(r.call("eq", &[i(4), i(4)]).unwrap());
        assert!(!r.call("eq", &[i(4), i(5)]).unwrap());
        assert!(r.call("leq", &[i(4), i(5)]).unwrap());
        assert!(!r.call("leq", &[i(6), i(5)]).unwrap());
        assert!(r.call("prime", &[i(7)]).unwrap());
        assert!(!r.call("prime", &[i(6)]).unwrap());
        assert!(matches!(r.call("nope", &[]), Err(Error::UnknownPredicate(_))));
        assert!(matches!(r.call("eq", &[i(1)]), Err(Error::Arity { .. })));
    }
}
