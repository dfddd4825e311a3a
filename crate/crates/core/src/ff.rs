//! Exact arithmetic in odd prime fields `F_p` and quadratic extensions
//! `GF(p^2)`, with the additive character and quadratic Gauss sums of `F_p`.
//!
//! Elements are stored as canonical integer codes in `[0, q)`: for `F_p` the
//! code is the residue itself, for `GF(p^2) = F_p[t]/(t^2 + m1 t + m0)` the
//! element `c0 + c1 t` has code `c0 + c1 * p`. Every operation returns a
//! reduced code, so element equality is integer equality. The geometry
//! kernels work directly on codes through [`FieldSpec`]; [`FieldElement`] is
//! the checked, self-describing wrapper.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest characteristic accepted. Keeps every product of two residues
/// inside `u64` with room to spare.
pub const MAX_CHARACTERISTIC: u32 = 1 << 20;

/// A finite field of odd characteristic and degree 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u32,
    degree: u8,
    // Monic modulus t^2 + modulus[1] t + modulus[0]; zero for prime fields.
    modulus: [u32; 2],
    q: u32,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Least quadratic non-residue modulo an odd prime.
pub fn least_non_residue(p: u32) -> u32 {
    (2..p)
        .find(|&s| pow_mod(s as u64, ((p - 1) / 2) as u64, p as u64) == (p - 1) as u64)
        .expect("every odd prime has a non-residue")
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

impl FieldSpec {
    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<Self> {
        Self::check_characteristic(p)?;
        Ok(FieldSpec { p, degree: 1, modulus: [0, 0], q: p })
    }

    /// `GF(p^2)` with the default modulus `t^2 - s`, `s` the least
    /// quadratic non-residue mod `p`.
    pub fn quadratic(p: u32) -> Result<Self> {
        Self::check_characteristic(p)?;
        let s = least_non_residue(p);
        Self::with_modulus(p, [p - s, 0])
    }

    /// `GF(p^2)` with modulus `t^2 + c1 t + c0`, given as `[c0, c1]`.
    pub fn with_modulus(p: u32, modulus: [u32; 2]) -> Result<Self> {
        Self::check_characteristic(p)?;
        if modulus[0] >= p || modulus[1] >= p {
            return Err(Error::Usage(format!(
                "modulus coefficients {modulus:?} are not reduced mod {p}"
            )));
        }
        let (c0, c1, pp) = (modulus[0] as u64, modulus[1] as u64, p as u64);
        if let Some(root) = (0..pp).find(|&x| (x * x + c1 * x + c0) % pp == 0) {
            return Err(Error::Usage(format!(
                "t^2 + {c1} t + {c0} has the root {root} in F_{p}"
            )));
        }
        let q = p
            .checked_mul(p)
            .filter(|&q| q <= MAX_CHARACTERISTIC)
            .ok_or_else(|| Error::Resource(format!("GF({p}^2) exceeds the supported field size")))?;
        Ok(FieldSpec { p, degree: 2, modulus, q })
    }

    fn check_characteristic(p: u32) -> Result<()> {
        if p == 2 || !is_prime(p) {
            return Err(Error::Usage(format!("characteristic must be an odd prime, got {p}")));
        }
        if p > MAX_CHARACTERISTIC {
            return Err(Error::Resource(format!(
                "characteristic {p} exceeds {MAX_CHARACTERISTIC}"
            )));
        }
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    /// Number of field elements.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// `[c0, c1]` of the modulus `t^2 + c1 t + c0`, or `None` for `F_p`.
    pub fn modulus(&self) -> Option<[u32; 2]> {
        (self.degree == 2).then_some(self.modulus)
    }

    pub fn is_prime_field(&self) -> bool {
        self.degree == 1
    }

    /// Code of the integer `n` reduced into the prime subfield.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    /// Code of `c0 + c1 t`.
    pub fn from_coords(&self, c0: u32, c1: u32) -> u32 {
        debug_assert!(c0 < self.p && c1 < self.p);
        if self.degree == 1 {
            c0
        } else {
            c0 + c1 * self.p
        }
    }

    /// `[c0, c1]` such that the element is `c0 + c1 t`.
    pub fn coords(&self, a: u32) -> [u32; 2] {
        if self.degree == 1 {
            [a, 0]
        } else {
            [a % self.p, a / self.p]
        }
    }

    /// Checked construction of an element from 1 or 2 residues.
    pub fn element(&self, coords: &[u32]) -> Result<FieldElement> {
        if coords.len() != self.degree as usize {
            return Err(Error::Usage(format!(
                "expected {} coordinates, got {}",
                self.degree,
                coords.len()
            )));
        }
        if coords.iter().any(|&c| c >= self.p) {
            return Err(Error::Usage(format!("coordinates {coords:?} not reduced mod {}", self.p)));
        }
        let code = self.from_coords(coords[0], coords.get(1).copied().unwrap_or(0));
        Ok(FieldElement { spec: *self, code })
    }

    /// Wraps a raw code; fails if it is out of range.
    pub fn wrap(&self, code: u32) -> Result<FieldElement> {
        if code >= self.q {
            return Err(Error::Usage(format!("code {code} out of range for a field of size {}", self.q)));
        }
        Ok(FieldElement { spec: *self, code })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.p;
        if self.degree == 1 {
            let s = a + b;
            if s >= p {
                s - p
            } else {
                s
            }
        } else {
            let (a0, a1) = (a % p, a / p);
            let (b0, b1) = (b % p, b / p);
            (a0 + b0) % p + ((a1 + b1) % p) * p
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let p = self.p;
        if self.degree == 1 {
            if a == 0 {
                0
            } else {
                p - a
            }
        } else {
            let (a0, a1) = (a % p, a / p);
            (p - a0) % p + ((p - a1) % p) * p
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        if self.degree == 1 {
            ((a as u64 * b as u64) % p) as u32
        } else {
            let (a0, a1) = (a as u64 % p, a as u64 / p);
            let (b0, b1) = (b as u64 % p, b as u64 / p);
            let (m0, m1) = (self.modulus[0] as u64, self.modulus[1] as u64);
            // t^2 = -m1 t - m0
            let hi = a1 * b1 % p;
            let c0 = (a0 * b0 + (p - m0) * hi) % p;
            let c1 = (a0 * b1 + a1 * b0 + (p - m1) * hi) % p;
            (c0 + c1 * p) as u32
        }
    }

    pub fn pow(&self, a: u32, mut exp: u64) -> u32 {
        let mut acc = self.one();
        let mut base = a;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.pow(a, self.q as u64 - 2))
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn one(&self) -> u32 {
        1
    }

    /// The p-power Frobenius, i.e. the involution fixing the prime subfield.
    /// Identity on prime fields.
    pub fn frobenius(&self, a: u32) -> u32 {
        if self.degree == 1 {
            a
        } else {
            self.pow(a, self.p as u64)
        }
    }

    /// `(z - conj z) / 2`.
    pub fn imaginary(&self, a: u32) -> u32 {
        let two_inv = self.inv(self.from_int(2)).expect("odd characteristic");
        self.mul(self.sub(a, self.frobenius(a)), two_inv)
    }

    /// Quadratic character on a prime-field code: 1, -1 or 0.
    pub fn legendre(&self, a: u32) -> i32 {
        debug_assert!(self.degree == 1);
        if a == 0 {
            return 0;
        }
        if self.pow(a, ((self.p - 1) / 2) as u64) == 1 {
            1
        } else {
            -1
        }
    }

    /// `exp(2 pi i x / p)` for a prime-field code; no degree check.
    #[inline]
    pub fn character(&self, x: u32) -> Complex64 {
        Complex64::from_polar(1.0, TAU * x as f64 / self.p as f64)
    }

    /// `S(y) = sum_x e(y x^2)` over the prime field; no degree check.
    pub fn gauss_sum_raw(&self, y: u32) -> Complex64 {
        (0..self.p).map(|x| self.character(self.mul(y, self.mul(x, x)))).sum()
    }

    fn require_prime(&self, what: &str) -> Result<()> {
        if self.degree != 1 {
            return Err(Error::Unsupported(format!("{what} is only defined over prime fields")));
        }
        Ok(())
    }

    /// Checked additive character.
    pub fn char_e(&self, x: u32) -> Result<Complex64> {
        self.require_prime("the additive character")?;
        Ok(self.character(x))
    }

    /// Checked Gauss sum.
    pub fn gauss_sum(&self, y: u32) -> Result<Complex64> {
        self.require_prime("the Gauss sum")?;
        Ok(self.gauss_sum_raw(y))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "GF({}^2)[t^2+{}t+{}]", self.p, self.modulus[1], self.modulus[0])
        }
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("FieldSpec", 3)?;
        s.serialize_field("p", &self.p)?;
        s.serialize_field("degree", &self.degree)?;
        s.serialize_field("modulus", &self.modulus())?;
        s.end()
    }
}

/// A field element bundled with its field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    code: u32,
}

impl FieldElement {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    /// Residue coordinates; one entry for `F_p`, two for `GF(p^2)`.
    pub fn coordinates(&self) -> Vec<u32> {
        let c = self.spec.coords(self.code);
        c[..self.spec.degree as usize].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    fn same_field(&self, other: &FieldElement) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Usage(format!(
                "operands live in different fields: {} vs {}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }

    fn with(&self, code: u32) -> FieldElement {
        FieldElement { spec: self.spec, code }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.spec.add(self.code, other.code)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.spec.sub(self.code, other.code)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.spec.mul(self.code, other.code)))
    }

    pub fn neg(&self) -> FieldElement {
        self.with(self.spec.neg(self.code))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        self.spec.inv(self.code).map(|c| self.with(c)).ok_or(Error::DivisionByZero)
    }

    pub fn pow(&self, exp: u64) -> FieldElement {
        self.with(self.spec.pow(self.code, exp))
    }

    /// Conjugate `z -> z^p`; requires a quadratic extension.
    pub fn conj(&self) -> Result<FieldElement> {
        self.require_extension("conjugation")?;
        Ok(self.with(self.spec.frobenius(self.code)))
    }

    /// `Im(z) = (z - conj z)/2`; zero exactly on the prime subfield.
    pub fn im(&self) -> Result<FieldElement> {
        self.require_extension("Im")?;
        Ok(self.with(self.spec.imaginary(self.code)))
    }

    fn require_extension(&self, what: &str) -> Result<()> {
        if self.spec.degree != 2 {
            return Err(Error::Usage(format!("{what} needs a quadratic extension, got {}", self.spec)));
        }
        Ok(())
    }

    pub fn char_e(&self) -> Result<Complex64> {
        self.spec.char_e(self.code)
    }

    pub fn gauss_sum(&self) -> Result<Complex64> {
        self.spec.gauss_sum(self.code)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [c0, c1] = self.spec.coords(self.code);
        if self.spec.degree == 1 || c1 == 0 {
            write!(f, "{c0}")
        } else if c0 == 0 {
            write!(f, "{c1}t")
        } else {
            write!(f, "{c0}+{c1}t")
        }
    }
}
