//! Exact arithmetic in GF(pᵉ) in a polynomial basis.
//!
//! An element is a coefficient vector (c₀, …, c_{e−1}) over ℤ_p, reduced
//! modulo a fixed monic irreducible polynomial of degree e. The modulus is the
//! irreducible whose lower-coefficient integer encoding c₀ + c₁p + … is
//! smallest, so two runs always build the identical field.
//!
//! Elements are totally ordered by their integer encoding
//! n = c₀ + c₁p + … + c_{e−1}pᵉ⁻¹, the same encoding used in every file
//! format. Fields small enough for the geometry layer (q ≤ 512) get full
//! add/mul lookup tables; larger fields fall back to direct polynomial
//! arithmetic.

use std::fmt;
use thiserror::Error;

/// Integer encoding of a field element; always `< q`.
pub type Code = u32;

const TABLE_LIMIT: u64 = 512;
const ORDER_LIMIT: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds the supported bound 2^16")]
    TooLarge { p: u64, e: u32 },
    #[error("division by zero")]
    DivideByZero,
}

/// An element of GF(pᵉ): its coefficient vector in the polynomial basis.
///
/// The `Ord` instance compares integer encodings, i.e. coefficient vectors
/// read from the most significant digit down.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coeffs: Vec<u32>,
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.coeffs.iter().rev().cmp(other.coeffs.iter().rev())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

struct Tables {
    add: Vec<Code>,
    mul: Vec<Code>,
    neg: Vec<Code>,
    inv: Vec<Code>, // inv[0] is a placeholder, never read
}

/// A concrete model of GF(pᵉ): the prime, the degree, and the monic
/// irreducible modulus, plus lookup tables for small orders.
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}
impl Eq for FieldSpec {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` divided by monic-leading `b`, coefficients mod p.
fn poly_rem(a: &[u32], b: &[u32], p: u64) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db] as u64, p);
    while r.len() > db {
        let k = r.len() - 1;
        let factor = r[k] * lead_inv % p;
        if factor != 0 {
            for i in 0..=db {
                let idx = k - db + i;
                r[idx] = (r[idx] + p - factor * b[i] as u64 % p) % p;
            }
        }
        r.pop();
    }
    while r.len() > 1 && *r.last().unwrap() == 0 {
        r.pop();
    }
    r.into_iter().map(|c| c as u32).collect()
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p is prime; Fermat
    mod_pow(a % p, p - 2, p)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Monic poly of degree `deg` whose lower coefficients encode `n` in base p.
fn monic_from_index(n: u64, deg: u32, p: u64) -> Vec<u32> {
    let mut c = Vec::with_capacity(deg as usize + 1);
    let mut n = n;
    for _ in 0..deg {
        c.push((n % p) as u32);
        n /= p;
    }
    c.push(1);
    c
}

/// Irreducibility over ℤ_p by exhaustive trial division: a monic polynomial of
/// degree e is reducible iff it has a monic divisor of degree 1..=e/2.
fn is_irreducible(poly: &[u32], p: u64) -> bool {
    let e = poly.len() - 1;
    if e == 1 {
        return true;
    }
    for d in 1..=e / 2 {
        let count = p.pow(d as u32);
        for n in 0..count {
            let divisor = monic_from_index(n, d as u32, p);
            let r = poly_rem(poly, &divisor, p);
            if r.len() == 1 && r[0] == 0 {
                return false;
            }
        }
    }
    true
}

/// Builds GF(pᵉ) with the canonical (encoding-least) monic irreducible
/// modulus. Deterministic across runs.
pub fn field_build(p: u64, e: u32) -> Result<FieldSpec, GfError> {
    if !is_prime(p) {
        return Err(GfError::NonPrime(p));
    }
    if e == 0 {
        return Err(GfError::ZeroDegree);
    }
    let q = p
        .checked_pow(e)
        .filter(|&q| q <= ORDER_LIMIT)
        .ok_or(GfError::TooLarge { p, e })?;
    let modulus = (0..q)
        .map(|n| monic_from_index(n, e, p))
        .find(|cand| is_irreducible(cand, p))
        .expect("an irreducible polynomial of every degree exists over GF(p)");
    let mut spec = FieldSpec {
        p: p as u32,
        e,
        q: q as u32,
        modulus,
        tables: None,
    };
    if q <= TABLE_LIMIT {
        spec.build_tables();
    }
    Ok(spec)
}

impl FieldSpec {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients c₀..c_e (monic, degree e).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        let mut neg = vec![0; q];
        for a in 0..q {
            for b in a..q {
                let s = self.add_raw(a as Code, b as Code);
                add[a * q + b] = s;
                add[b * q + a] = s;
                let m = self.mul_raw(a as Code, b as Code);
                mul[a * q + b] = m;
                mul[b * q + a] = m;
            }
        }
        for a in 0..q {
            neg[a] = self.neg_raw(a as Code);
        }
        let mut inv = vec![0; q];
        for a in 1..q {
            if inv[a] != 0 {
                continue;
            }
            for b in 1..q {
                if mul[a * q + b] == 1 {
                    inv[a] = b as Code;
                    inv[b] = a as Code;
                    break;
                }
            }
        }
        self.tables = Some(Tables { add, mul, neg, inv });
    }

    // ---- coefficient-vector <-> code ----

    pub fn decode(&self, code: Code) -> FieldElement {
        assert!(code < self.q, "element code {code} out of range");
        let mut coeffs = Vec::with_capacity(self.e as usize);
        let mut n = code;
        for _ in 0..self.e {
            coeffs.push(n % self.p);
            n /= self.p;
        }
        FieldElement { coeffs }
    }

    pub fn encode(&self, elt: &FieldElement) -> Code {
        debug_assert_eq!(elt.coeffs.len(), self.e as usize);
        let mut n = 0u64;
        for &c in elt.coeffs.iter().rev() {
            debug_assert!(c < self.p);
            n = n * self.p as u64 + c as u64;
        }
        n as Code
    }

    pub fn element(&self, code: u64) -> FieldElement {
        self.decode(code as Code)
    }

    pub fn zero(&self) -> FieldElement {
        self.decode(0)
    }

    pub fn one(&self) -> FieldElement {
        self.decode(1)
    }

    /// All elements in canonical (encoding) order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(|c| self.decode(c))
    }

    // ---- raw arithmetic on codes (no tables) ----

    fn add_raw(&self, a: Code, b: Code) -> Code {
        let (x, y) = (self.decode(a), self.decode(b));
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&u, &v)| (u + v) % self.p)
            .collect();
        self.encode(&FieldElement { coeffs })
    }

    fn neg_raw(&self, a: Code) -> Code {
        let x = self.decode(a);
        let coeffs = x.coeffs.iter().map(|&u| (self.p - u) % self.p).collect();
        self.encode(&FieldElement { coeffs })
    }

    fn mul_raw(&self, a: Code, b: Code) -> Code {
        let (x, y) = (self.decode(a), self.decode(b));
        let e = self.e as usize;
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &u) in x.coeffs.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (j, &v) in y.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u64 * v as u64) % p;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        let mut rem = poly_rem(&prod, &self.modulus, p);
        rem.resize(e, 0);
        self.encode(&FieldElement { coeffs: rem })
    }

    fn inv_raw(&self, a: Code) -> Code {
        debug_assert_ne!(a, 0);
        self.pow_code(a, self.q as u64 - 2)
    }

    fn pow_code(&self, a: Code, mut k: u64) -> Code {
        let mut base = a;
        let mut acc: Code = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mulc(acc, base);
            }
            base = self.mulc(base, base);
            k >>= 1;
        }
        acc
    }

    // ---- fast code-level ops (table-backed when available) ----

    #[inline]
    pub(crate) fn addc(&self, a: Code, b: Code) -> Code {
        match &self.tables {
            Some(t) => t.add[a as usize * self.q as usize + b as usize],
            None => self.add_raw(a, b),
        }
    }

    #[inline]
    pub(crate) fn subc(&self, a: Code, b: Code) -> Code {
        self.addc(a, self.negc(b))
    }

    #[inline]
    pub(crate) fn mulc(&self, a: Code, b: Code) -> Code {
        match &self.tables {
            Some(t) => t.mul[a as usize * self.q as usize + b as usize],
            None => self.mul_raw(a, b),
        }
    }

    #[inline]
    pub(crate) fn negc(&self, a: Code) -> Code {
        match &self.tables {
            Some(t) => t.neg[a as usize],
            None => self.neg_raw(a),
        }
    }

    #[inline]
    pub(crate) fn invc(&self, a: Code) -> Code {
        debug_assert_ne!(a, 0, "inverse of zero");
        match &self.tables {
            Some(t) => t.inv[a as usize],
            None => self.inv_raw(a),
        }
    }

    // ---- element-level arithmetic ----

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.decode(self.addc(self.encode(a), self.encode(b)))
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.decode(self.subc(self.encode(a), self.encode(b)))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.decode(self.mulc(self.encode(a), self.encode(b)))
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.decode(self.negc(self.encode(a)))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, GfError> {
        let c = self.encode(a);
        if c == 0 {
            return Err(GfError::DivideByZero);
        }
        Ok(self.decode(self.invc(c)))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, k: u64) -> FieldElement {
        self.decode(self.pow_code(self.encode(a), k))
    }

    /// The encoding-least pair (a, b) with t² + a·t + b irreducible over
    /// GF(q), i.e. with no root in the field. Such a pair exists for every q.
    pub fn irreducible_quadratic(&self) -> (FieldElement, FieldElement) {
        // In characteristic 2 squaring is bijective, so t² + b always has a
        // root; a = 0 can be skipped.
        let a_start = if self.p == 2 { 1 } else { 0 };
        for a in a_start..self.q {
            for b in 0..self.q {
                let rootless = (0..self.q).all(|x| {
                    let x2 = self.mulc(x, x);
                    self.addc(self.addc(x2, self.mulc(a, x)), b) != 0
                });
                if rootless {
                    return (self.decode(a), self.decode(b));
                }
            }
        }
        unreachable!("every finite field admits an irreducible quadratic");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_is_canonical() {
        assert_eq!(field_build(3, 1).unwrap().modulus(), &[0, 1]); // t
        assert_eq!(field_build(2, 2).unwrap().modulus(), &[1, 1, 1]); // t²+t+1
        assert_eq!(field_build(3, 2).unwrap().modulus(), &[1, 0, 1]); // t²+1
    }

    #[test]
    fn gf3_2_modulus_minimality_brute_force() {
        // independent scan over all 9 candidate coefficient pairs
        let p = 3u64;
        let mut first = None;
        for n in 0..9 {
            let cand = monic_from_index(n, 2, p);
            let has_root = (0..3).any(|x: u64| {
                (x * x % 3 + cand[1] as u64 * x % 3 + cand[0] as u64) % 3 == 0
            });
            if !has_root {
                first = Some(cand);
                break;
            }
        }
        assert_eq!(first.unwrap(), field_build(3, 2).unwrap().modulus());
    }

    #[test]
    fn arithmetic_examples() {
        let f3 = field_build(3, 1).unwrap();
        let two = f3.element(2);
        assert_eq!(f3.encode(&f3.mul(&two, &two)), 1); // 4 mod 3

        let f4 = field_build(2, 2).unwrap();
        let t = f4.element(2);
        assert_eq!(f4.encode(&f4.mul(&t, &t)), 3); // t² = t+1
    }

    #[test]
    fn identity_and_inverse_exhaustive_small_fields() {
        for (p, e) in [(2u64, 1u32), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1), (2, 4), (5, 2)] {
            let f = field_build(p, e).unwrap();
            let one = f.one();
            for a in f.elements() {
                assert_eq!(f.mul(&a, &one), a);
                if f.encode(&a) != 0 {
                    assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), one);
                }
                // Frobenius: a^q = a
                assert_eq!(f.pow(&a, f.q() as u64), a);
            }
        }
    }

    #[test]
    fn commutativity_and_associativity_gf9() {
        let f = field_build(3, 2).unwrap();
        let elts: Vec<_> = f.elements().collect();
        for a in &elts {
            for b in &elts {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in &elts {
                    assert_eq!(f.mul(&f.mul(a, b), c), f.mul(a, &f.mul(b, c)));
                    assert_eq!(f.add(&f.add(a, b), c), f.add(a, &f.add(b, c)));
                }
            }
        }
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let f = field_build(5, 1).unwrap();
        assert_eq!(
            f.div(&f.element(3), &f.zero()),
            Err(GfError::DivideByZero)
        );
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert_eq!(field_build(4, 1), Err(GfError::NonPrime(4)));
        assert_eq!(field_build(6, 2), Err(GfError::NonPrime(6)));
        assert_eq!(field_build(2, 0), Err(GfError::ZeroDegree));
        assert_eq!(field_build(2, 17), Err(GfError::TooLarge { p: 2, e: 17 }));
        assert!(field_build(2, 16).is_ok()); // 2^16 is the boundary
    }

    #[test]
    fn build_is_deterministic() {
        let a = field_build(5, 2).unwrap();
        let b = field_build(5, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.modulus(), b.modulus());
    }

    #[test]
    fn irreducible_quadratic_examples() {
        let f3 = field_build(3, 1).unwrap();
        let (a, b) = f3.irreducible_quadratic();
        assert_eq!((f3.encode(&a), f3.encode(&b)), (0, 1)); // t²+1

        let f2 = field_build(2, 1).unwrap();
        let (a, b) = f2.irreducible_quadratic();
        assert_eq!((f2.encode(&a), f2.encode(&b)), (1, 1)); // t²+t+1

        let f5 = field_build(5, 1).unwrap();
        let (a, b) = f5.irreducible_quadratic();
        assert_eq!((f5.encode(&a), f5.encode(&b)), (0, 2)); // t²+2
    }

    #[test]
    fn irreducible_quadratic_brute_force_oracle_q5() {
        // scan all 25 pairs in encoding order and take the first rootless one
        let f = field_build(5, 1).unwrap();
        let mut expect = None;
        'outer: for a in 0..5u32 {
            for b in 0..5u32 {
                if (0..5u32).all(|x| (x * x + a * x + b) % 5 != 0) {
                    expect = Some((a, b));
                    break 'outer;
                }
            }
        }
        let (a, b) = f.irreducible_quadratic();
        assert_eq!(expect.unwrap(), (f.encode(&a), f.encode(&b)));
    }

    #[test]
    fn element_order_matches_encoding() {
        let f = field_build(3, 2).unwrap();
        let elts: Vec<_> = f.elements().collect();
        for w in elts.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn tables_agree_with_raw_ops_gf8() {
        let f = field_build(2, 3).unwrap();
        assert!(f.tables.is_some());
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(f.addc(a, b), f.add_raw(a, b));
                assert_eq!(f.mulc(a, b), f.mul_raw(a, b));
            }
        }
    }
}
