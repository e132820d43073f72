//! Arithmetic in small finite fields GF(p^m).
//!
//! Elements are encoded as integers in `[0, q)`. For a prime field the
//! integer is the residue mod `p`; for an extension field it is the
//! coefficient vector of a polynomial of degree `< m`, read as base-`p`
//! digits with the constant term as the least significant digit. So in
//! GF(8) the value `6 = 0b110` is `x^2 + x`.
//!
//! Prime fields compute directly on residues. Extension fields build
//! log/antilog tables over a primitive element at construction.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Largest supported field order. Element values must fit in a `u8`.
pub const MAX_ORDER: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("field order {0} is not a prime power")]
    NotPrimePower(u32),
    #[error("field order {0} is outside the supported range 2..={MAX_ORDER}")]
    OrderOutOfRange(u32),
    #[error("no default reduction polynomial for GF({0})")]
    NoDefaultModulus(u32),
    #[error("polynomial {poly} is not monic of degree {degree} over GF({p})")]
    MalformedModulus { poly: u32, degree: u32, p: u32 },
    #[error("polynomial {0} is reducible")]
    ReducibleModulus(u32),
    #[error("prime field GF({0}) takes no reduction polynomial")]
    UnexpectedModulus(u32),
    #[error("value {value} is not an element of GF({order})")]
    OutOfRange { value: u32, order: u32 },
    #[error("operands belong to different fields (GF({left}) and GF({right}))")]
    FieldMismatch { left: u32, right: u32 },
    #[error("division by zero")]
    DivisionByZero,
}

/// An element of some `Field`, tagged with the order of the field that
/// produced it so that mixing fields is caught by the checked operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u8,
    order: u16,
}

impl FieldElement {
    pub fn value(self) -> u8 {
        self.value
    }

    pub fn order(self) -> u32 {
        self.order as u32
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[derive(Clone)]
struct LogTables {
    /// `exp[i] = g^i` for `i < 2(q-1)`, doubled so sums of logs need no reduction.
    exp: Vec<u8>,
    /// `log[a]` for `a != 0`; `log[0]` is unused.
    log: Vec<u8>,
}

/// The finite field GF(q), q = p^m.
///
/// Immutable after construction; cloning shares the lookup tables.
#[derive(Clone)]
pub struct Field {
    p: u32,
    m: u32,
    q: u32,
    modulus: Option<u32>,
    tables: Option<Arc<LogTables>>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Field");
        s.field("q", &self.q);
        if let Some(poly) = self.modulus {
            s.field("modulus", &poly);
        }
        s.finish()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// Default reduction polynomials, integer-encoded with the leading term.
fn default_modulus(q: u32) -> Option<u32> {
    match q {
        4 => Some(0b111),    // x^2 + x + 1
        8 => Some(0b1011),   // x^3 + x + 1
        9 => Some(10),       // x^2 + 1
        16 => Some(0b10011), // x^4 + x + 1
        _ => None,
    }
}

/// Splits `q` into `(p, m)` with `q = p^m`, if `q` is a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut m) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

/// Base-`p` digits of `v`, least significant first, padded to `len`.
fn digits(mut v: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = v % p;
        v /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `a` modulo the monic polynomial `b` over GF(p).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = r[r.len() - 1];
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &c) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - lead) * c) % p;
            }
        }
        r.pop();
    }
    r
}

/// Trial division by every monic polynomial of degree `1..=m/2`.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let m = poly.len() - 1;
    for d in 1..=m / 2 {
        let count = p.pow(d as u32);
        for low in 0..count {
            let mut divisor = digits(low, p, d);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// GF(q) with the default reduction polynomial when `q` is not prime.
    ///
    /// GF(4), GF(8), GF(9) and GF(16) use x²+x+1, x³+x+1, x²+1 and x⁴+x+1.
    /// Other extension fields take the smallest monic irreducible
    /// polynomial in the integer encoding.
    pub fn new(q: u32) -> Result<Self, GfError> {
        Self::with_modulus(q, None)
    }

    /// GF(q) with an explicit integer-encoded reduction polynomial
    /// (base-`p` digits including the leading coefficient, e.g. 11 for
    /// x³+x+1 over GF(2)).
    pub fn with_modulus(q: u32, modulus: Option<u32>) -> Result<Self, GfError> {
        if !(2..=MAX_ORDER).contains(&q) {
            return Err(GfError::OrderOutOfRange(q));
        }
        let (p, m) = prime_power(q).ok_or(GfError::NotPrimePower(q))?;
        if m == 1 {
            if modulus.is_some() {
                return Err(GfError::UnexpectedModulus(q));
            }
            return Ok(Field { p, m, q, modulus: None, tables: None });
        }
        let poly = match modulus {
            Some(poly) => {
                if !(q..2 * q).contains(&poly) {
                    return Err(GfError::MalformedModulus { poly, degree: m, p });
                }
                if !is_irreducible(&digits(poly, p, m as usize + 1), p) {
                    return Err(GfError::ReducibleModulus(poly));
                }
                poly
            }
            None => match default_modulus(q) {
                Some(poly) => poly,
                None => (q..2 * q)
                    .find(|&poly| is_irreducible(&digits(poly, p, m as usize + 1), p))
                    .ok_or(GfError::NoDefaultModulus(q))?,
            },
        };
        let mut field = Field { p, m, q, modulus: Some(poly), tables: None };
        field.tables = Some(Arc::new(field.build_tables()));
        Ok(field)
    }

    /// Polynomial multiplication mod the reduction polynomial. Only used
    /// while building the tables.
    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let (p, m) = (self.p, self.m as usize);
        let da = digits(a, p, m);
        let db = digits(b, p, m);
        let mut prod = vec![0; 2 * m - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let modulus = digits(self.modulus.unwrap_or(0), p, m + 1);
        undigits(&poly_rem(&prod, &modulus, p), p)
    }

    fn build_tables(&self) -> LogTables {
        let q = self.q;
        let n = (q - 1) as usize;
        let generator = (2..q)
            .find(|&g| {
                let mut x = g;
                let mut order = 1;
                while x != 1 {
                    x = self.slow_mul(x, g);
                    order += 1;
                }
                order == n
            })
            // A field with q = p^m, m > 1, always has a primitive element > 1.
            .expect("multiplicative group of a field is cyclic");
        let mut exp = vec![0u8; 2 * n];
        let mut log = vec![0u8; q as usize];
        let mut x = 1;
        for i in 0..n {
            exp[i] = x as u8;
            exp[i + n] = x as u8;
            log[x as usize] = i as u8;
            x = self.slow_mul(x, generator);
        }
        LogTables { exp, log }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Integer-encoded reduction polynomial; `None` for prime fields.
    pub fn modulus(&self) -> Option<u32> {
        self.modulus
    }

    fn wrap(&self, value: u8) -> FieldElement {
        FieldElement { value, order: self.q as u16 }
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    /// The additive inverse of 1: `1` in characteristic 2, `p - 1` otherwise.
    pub fn neg_one(&self) -> FieldElement {
        self.wrap(self.neg_raw(1))
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, GfError> {
        if value < self.q {
            Ok(self.wrap(value as u8))
        } else {
            Err(GfError::OutOfRange { value, order: self.q })
        }
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |v| self.wrap(v as u8))
    }

    fn check(&self, a: FieldElement) -> Result<u8, GfError> {
        if a.order() != self.q {
            return Err(GfError::FieldMismatch { left: a.order(), right: self.q });
        }
        Ok(a.value)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.wrap(self.add_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.wrap(self.sub_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.wrap(self.neg_raw(self.check(a)?)))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.wrap(self.mul_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        match self.check(a)? {
            0 => Err(GfError::DivisionByZero),
            v => Ok(self.wrap(self.inv_raw(v))),
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        let inv = self.inv(b)?;
        self.mul(a, inv)
    }

    pub fn pow(&self, a: FieldElement, exp: u32) -> Result<FieldElement, GfError> {
        Ok(self.wrap(self.pow_raw(self.check(a)?, exp)))
    }

    // Unchecked arithmetic on encoded values. Callers guarantee every
    // operand is `< q`; matrices use these in their inner loops.

    #[inline]
    pub fn add_raw(&self, a: u8, b: u8) -> u8 {
        if self.p == 2 {
            return a ^ b;
        }
        if self.m == 1 {
            return ((a as u32 + b as u32) % self.p) as u8;
        }
        self.digitwise(a, b, |x, y| (x + y) % self.p)
    }

    #[inline]
    pub fn neg_raw(&self, a: u8) -> u8 {
        if self.p == 2 {
            return a;
        }
        if self.m == 1 {
            return ((self.p - a as u32) % self.p) as u8;
        }
        self.digitwise(0, a, |_, y| (self.p - y) % self.p)
    }

    #[inline]
    pub fn sub_raw(&self, a: u8, b: u8) -> u8 {
        self.add_raw(a, self.neg_raw(b))
    }

    fn digitwise(&self, a: u8, b: u8, op: impl Fn(u32, u32) -> u32) -> u8 {
        let (mut a, mut b) = (a as u32, b as u32);
        let (mut out, mut place) = (0, 1);
        for _ in 0..self.m {
            out += op(a % self.p, b % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out as u8
    }

    #[inline]
    pub fn mul_raw(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.tables {
            None => ((a as u32 * b as u32) % self.p) as u8,
            Some(t) => t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize],
        }
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv_raw(&self, a: u8) -> u8 {
        assert!(a != 0, "inverse of zero");
        match &self.tables {
            None => self.pow_raw(a, self.p - 2),
            Some(t) => {
                let n = (self.q - 1) as usize;
                t.exp[(n - t.log[a as usize] as usize) % n]
            }
        }
    }

    pub fn pow_raw(&self, a: u8, mut exp: u32) -> u8 {
        let (mut base, mut acc) = (a, 1u8);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }
}
