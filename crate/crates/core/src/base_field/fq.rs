//! Arithmetic in the residue field F_q, q = p^f.
//!
//! Elements are coordinate vectors with respect to the power basis of a
//! fixed monic polynomial of degree f over F_p, packed as base-p digits
//! into a `u32`. The polynomial is chosen deterministically per (p, f):
//! candidates x^f + c_{f-1} x^{f-1} + ... + c_0 are enumerated in
//! ascending order of the integer sum(c_i p^i) and the first one whose
//! root generates the full multiplicative group is kept. That choice is
//! recorded in all emitted spec files so runs are reproducible, and it
//! makes `w` (the basis root) a generator, so multiplication runs off
//! discrete log tables.

use crate::error::{Error, Result};

/// Largest supported field size. Tables are O(q); this is a desk-scale
/// library and the ceiling is deliberate.
pub const MAX_Q: u64 = 1 << 16;

/// Element of F_q as packed base-p digits; `FqElement(0)` is zero.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct FqElement(pub(crate) u32);

impl FqElement {
    pub const ZERO: FqElement = FqElement(0);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Packed index in [0, q).
    pub fn index(self) -> u32 {
        self.0
    }
}

/// Shared arithmetic context for one (p, f).
pub struct FqCtx {
    p: u64,
    f: usize,
    q: u64,
    /// Low coefficients c_0..c_{f-1} of the chosen monic polynomial.
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u8>,
    /// wp_root[c] = first y (in index order) with y^p - y = c, or u32::MAX.
    wp_root: Vec<u32>,
    /// Digit vectors of w^0 .. w^{2f-2}, for plane-based convolution.
    wpow: Vec<Vec<u64>>,
}

const NO_ROOT: u32 = u32::MAX;

impl FqCtx {
    pub fn new(p: u64, f: usize) -> Result<FqCtx> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("p = {p} is not prime")));
        }
        if f == 0 {
            return Err(Error::InvalidInput("f must be positive".into()));
        }
        let q = p
            .checked_pow(f as u32)
            .filter(|&q| q <= MAX_Q)
            .ok_or_else(|| Error::InvalidInput(format!("q = {p}^{f} exceeds {MAX_Q}")))?;

        let (modulus, exp) = find_generator_polynomial(p, f, q).ok_or_else(|| {
            Error::InvalidInput(format!("no generator polynomial found for p={p}, f={f}"))
        })?;

        let mut log = vec![0u32; q as usize];
        for (k, &a) in exp.iter().enumerate() {
            log[a as usize] = k as u32;
        }

        let mut ctx = FqCtx {
            p,
            f,
            q,
            modulus,
            exp,
            log,
            trace: Vec::new(),
            wp_root: Vec::new(),
            wpow: Vec::new(),
        };
        ctx.trace = (0..q as u32)
            .map(|a| ctx.trace_slow(FqElement(a)))
            .collect();
        let mut wp_root = vec![NO_ROOT; q as usize];
        for y in 0..q as u32 {
            let c = ctx.sub(ctx.frobenius(FqElement(y)), FqElement(y));
            if wp_root[c.0 as usize] == NO_ROOT {
                wp_root[c.0 as usize] = y;
            }
        }
        ctx.wp_root = wp_root;
        ctx.wpow = ctx.w_power_digits_slow();
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Low coefficients c_0..c_{f-1} of the defining polynomial.
    pub fn modulus_coeffs(&self) -> &[u64] {
        &self.modulus
    }

    /// Digit d (coordinate of w^d) of a packed element.
    #[inline]
    pub fn digit(&self, a: FqElement, d: usize) -> u64 {
        let mut x = a.0 as u64;
        for _ in 0..d {
            x /= self.p;
        }
        x % self.p
    }

    /// Reduction of w^k (k < 2f - 1) to digit vectors, for plane-based
    /// convolution.
    #[inline]
    pub(crate) fn w_power_digits(&self) -> &[Vec<u64>] {
        &self.wpow
    }

    fn w_power_digits_slow(&self) -> Vec<Vec<u64>> {
        if self.f == 1 {
            return vec![vec![1]];
        }
        let w = FqElement(self.p as u32);
        let mut out = Vec::with_capacity(2 * self.f - 1);
        let mut cur = self.one();
        for _ in 0..(2 * self.f - 1) {
            out.push(self.digits(cur));
            cur = self.mul(cur, w);
        }
        out
    }

    /// The recorded defining polynomial, e.g. `x^2+x+1`.
    pub fn modulus_string(&self) -> String {
        let mut parts = vec![format!("x^{}", self.f)];
        for i in (0..self.f).rev() {
            let c = self.modulus[i];
            if c == 0 {
                continue;
            }
            let part = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}*x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}*x^{i}"),
            };
            parts.push(part);
        }
        let s = parts.join("+");
        if self.f == 1 {
            s.replace("x^1", "x")
        } else {
            s
        }
    }

    pub fn digits(&self, a: FqElement) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.f);
        let mut x = a.0 as u64;
        for _ in 0..self.f {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    pub fn from_digits(&self, digits: &[u64]) -> FqElement {
        debug_assert!(digits.len() <= self.f);
        let mut x = 0u64;
        for &d in digits.iter().rev() {
            debug_assert!(d < self.p);
            x = x * self.p + d;
        }
        FqElement(x as u32)
    }

    /// Embedding of an integer, i.e. m mod p times the identity.
    pub fn from_u64(&self, m: u64) -> FqElement {
        FqElement((m % self.p) as u32)
    }

    pub fn one(&self) -> FqElement {
        FqElement(1)
    }

    /// The basis root `w` (equals the packed index p for f > 1; for f = 1
    /// it is the recorded generator of F_p^*).
    pub fn generator(&self) -> FqElement {
        if self.f == 1 {
            // root of x + c_0 is -c_0
            let c0 = self.modulus[0];
            FqElement(((self.p - c0) % self.p) as u32)
        } else {
            FqElement(self.p as u32)
        }
    }

    pub fn add(&self, a: FqElement, b: FqElement) -> FqElement {
        if self.p == 2 {
            return FqElement(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        let mut out = 0u64;
        let mut scale = 1u64;
        for _ in 0..self.f {
            out += ((x % self.p + y % self.p) % self.p) * scale;
            x /= self.p;
            y /= self.p;
            scale *= self.p;
        }
        FqElement(out as u32)
    }

    pub fn neg(&self, a: FqElement) -> FqElement {
        if self.p == 2 {
            return a;
        }
        let mut x = a.0 as u64;
        let mut out = 0u64;
        let mut scale = 1u64;
        for _ in 0..self.f {
            out += ((self.p - x % self.p) % self.p) * scale;
            x /= self.p;
            scale *= self.p;
        }
        FqElement(out as u32)
    }

    pub fn sub(&self, a: FqElement, b: FqElement) -> FqElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElement, b: FqElement) -> FqElement {
        if a.is_zero() || b.is_zero() {
            return FqElement::ZERO;
        }
        let m = self.q - 1;
        let k = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % m;
        FqElement(self.exp[k as usize])
    }

    pub fn inv(&self, a: FqElement) -> Result<FqElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = self.q - 1;
        let k = (m - self.log[a.0 as usize] as u64) % m;
        Ok(FqElement(self.exp[k as usize]))
    }

    pub fn pow(&self, a: FqElement, e: u64) -> FqElement {
        if a.is_zero() {
            return if e == 0 { self.one() } else { FqElement::ZERO };
        }
        let m = self.q - 1;
        let k = (self.log[a.0 as usize] as u128 * e as u128 % m as u128) as u64;
        FqElement(self.exp[k as usize])
    }

    /// Frobenius a -> a^p.
    pub fn frobenius(&self, a: FqElement) -> FqElement {
        self.pow(a, self.p)
    }

    /// phi^k, i.e. a -> a^{p^k}; k is reduced mod f.
    pub fn frobenius_k(&self, a: FqElement, k: u64) -> FqElement {
        let k = (k % self.f as u64) as u32;
        let mut e = 1u64;
        for _ in 0..k {
            e *= self.p;
        }
        self.pow(a, e)
    }

    /// Inverse Frobenius iterated k times (exists: F_q is perfect).
    pub fn frobenius_inv_k(&self, a: FqElement, k: u64) -> FqElement {
        let f = self.f as u64;
        let k = k % f;
        self.frobenius_k(a, (f - k) % f)
    }

    /// Absolute trace to F_p, returned as a residue in [0, p).
    pub fn trace(&self, a: FqElement) -> u64 {
        self.trace[a.0 as usize] as u64
    }

    fn trace_slow(&self, a: FqElement) -> u8 {
        let mut acc = FqElement::ZERO;
        let mut cur = a;
        for _ in 0..self.f {
            acc = self.add(acc, cur);
            cur = self.frobenius(cur);
        }
        debug_assert!(acc.0 < self.p as u32);
        acc.0 as u8
    }

    /// First root (in index order) of x^p - x = c, if the trace vanishes.
    pub fn solve_wp(&self, c: FqElement) -> Result<FqElement> {
        let y = self.wp_root[c.0 as usize];
        if y == NO_ROOT {
            Err(Error::NoSolution)
        } else {
            Ok(FqElement(y))
        }
    }

    /// F_p-rank of a set of elements viewed as vectors in F_p^f.
    pub fn fp_rank(&self, elems: &[FqElement]) -> usize {
        let mut rows: Vec<Vec<u64>> = elems.iter().map(|&e| self.digits(e)).collect();
        let mut rank = 0;
        for col in 0..self.f {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = mod_inv(rows[rank][col], self.p);
            for r in 0..rows.len() {
                if r != rank && rows[r][col] != 0 {
                    let factor = rows[r][col] * inv % self.p;
                    for c in col..self.f {
                        let sub = factor * rows[rank][c] % self.p;
                        rows[r][c] = (rows[r][c] + self.p - sub) % self.p;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    /// Render an element as a polynomial in `w`, e.g. `w^2+2*w+1`.
    pub fn format_element(&self, a: FqElement) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let digits = self.digits(a);
        let mut parts = Vec::new();
        for i in (0..self.f).rev() {
            let c = digits[i];
            if c == 0 {
                continue;
            }
            let part = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "w".to_string(),
                (1, c) => format!("{c}*w"),
                (i, 1) => format!("w^{i}"),
                (i, c) => format!("{c}*w^{i}"),
            };
            parts.push(part);
        }
        parts.join("+")
    }

    /// Comma-separated residues c_0,...,c_{f-1} (machine-readable form).
    pub fn format_residues(&self, a: FqElement) -> String {
        self.digits(a)
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn iter_elements(&self) -> impl Iterator<Item = FqElement> {
        (0..self.q as u32).map(FqElement)
    }

    pub fn random_element(&self, rng: &mut dyn rand::RngCore) -> FqElement {
        FqElement((rng.next_u64() % self.q) as u32)
    }

    pub fn random_nonzero(&self, rng: &mut dyn rand::RngCore) -> FqElement {
        FqElement(1 + (rng.next_u64() % (self.q - 1)) as u32)
    }
}

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

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Multiply a packed residue by x modulo x^f + sum(c_i x^i) over F_p.
fn mul_by_x(a: u32, p: u64, f: usize, modulus: &[u64], q: u64) -> u32 {
    let mut digits = vec![0u64; f + 1];
    let mut x = a as u64;
    for d in digits.iter_mut().take(f) {
        *d = x % p;
        x /= p;
    }
    digits.rotate_right(1);
    let top = digits[f];
    if top != 0 {
        for i in 0..f {
            digits[i] = (digits[i] + (p - top * modulus[i] % p)) % p;
        }
    }
    let mut out = 0u64;
    for i in (0..f).rev() {
        out = out * p + digits[i];
    }
    debug_assert!(out < q);
    out as u32
}

/// Deterministic search for the defining polynomial: first candidate (in
/// ascending packed order of its low coefficients) whose root has
/// multiplicative order q - 1. Returns the coefficients and the exp table.
fn find_generator_polynomial(p: u64, f: usize, q: u64) -> Option<(Vec<u64>, Vec<u32>)> {
    for packed in 0..q {
        let mut modulus = vec![0u64; f];
        let mut x = packed;
        for m in modulus.iter_mut() {
            *m = x % p;
            x /= p;
        }
        if modulus[0] == 0 {
            continue; // x divides the candidate
        }
        // Walk powers of x; order q-1 certifies both irreducibility and
        // primitivity (the powers then exhaust all nonzero residues).
        let x_packed = if f == 1 {
            ((p - modulus[0]) % p) as u32
        } else {
            p as u32
        };
        let mut exp = vec![0u32; (q - 1) as usize];
        exp[0] = 1;
        let mut cur = 1u32;
        let mut order = 0u64;
        for k in 1..q {
            cur = if f == 1 {
                (cur as u64 * x_packed as u64 % p) as u32
            } else {
                mul_by_x(cur, p, f, &modulus, q)
            };
            if cur == 0 {
                break;
            }
            if cur == 1 {
                order = k;
                break;
            }
            if k < q - 1 {
                exp[k as usize] = cur;
            }
        }
        if order == q - 1 {
            return Some((modulus, exp));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_moduli() {
        let f4 = FqCtx::new(2, 2).unwrap();
        assert_eq!(f4.modulus_string(), "x^2+x+1");
        let f9 = FqCtx::new(3, 2).unwrap();
        assert_eq!(f9.modulus_string(), "x^2+x+2");
        let f2 = FqCtx::new(2, 1).unwrap();
        assert_eq!(f2.modulus_string(), "x+1");
        let f5 = FqCtx::new(5, 1).unwrap();
        // root of x + 2 is 3, the smallest c with p - c a generator of F_5^*
        assert_eq!(f5.modulus_string(), "x+2");
        assert_eq!(f5.generator(), FqElement(3));
    }

    #[test]
    fn f4_arithmetic() {
        let f4 = FqCtx::new(2, 2).unwrap();
        let w = f4.generator();
        // w^2 = w + 1
        assert_eq!(f4.mul(w, w), f4.add(w, f4.one()));
        // w^3 = 1
        assert_eq!(f4.pow(w, 3), f4.one());
        // Frobenius round-trips through its inverse
        for a in f4.iter_elements() {
            assert_eq!(f4.frobenius_inv_k(f4.frobenius(a), 1), a);
        }
    }

    #[test]
    fn field_axioms_exhaustive_f9() {
        let f9 = FqCtx::new(3, 2).unwrap();
        for a in f9.iter_elements() {
            for b in f9.iter_elements() {
                assert_eq!(f9.add(a, b), f9.add(b, a));
                assert_eq!(f9.mul(a, b), f9.mul(b, a));
                for c in f9.iter_elements() {
                    assert_eq!(f9.mul(a, f9.add(b, c)), f9.add(f9.mul(a, b), f9.mul(a, c)));
                }
            }
            if !a.is_zero() {
                assert_eq!(f9.mul(a, f9.inv(a).unwrap()), f9.one());
            }
        }
    }

    #[test]
    fn trace_and_wp_roots() {
        // F_2: x^2 - x = 1 has no solution
        let f2 = FqCtx::new(2, 1).unwrap();
        assert_eq!(f2.solve_wp(f2.one()), Err(Error::NoSolution));
        assert_eq!(f2.solve_wp(FqElement::ZERO).unwrap(), FqElement::ZERO);

        // F_4: w^2 - w = 1, and w is the first root in index order
        let f4 = FqCtx::new(2, 2).unwrap();
        let w = f4.generator();
        let r = f4.solve_wp(f4.one()).unwrap();
        assert_eq!(r, w);
        assert_eq!(f4.sub(f4.frobenius(r), r), f4.one());

        // solutions exist exactly when the trace vanishes
        let f9 = FqCtx::new(3, 2).unwrap();
        for c in f9.iter_elements() {
            let has = f9.solve_wp(c).is_ok();
            assert_eq!(has, f9.trace(c) == 0);
            if let Ok(y) = f9.solve_wp(c) {
                assert_eq!(f9.sub(f9.frobenius(y), y), c);
            }
        }
    }

    #[test]
    fn fp_rank_detects_dependence() {
        let f4 = FqCtx::new(2, 2).unwrap();
        let w = f4.generator();
        assert_eq!(f4.fp_rank(&[f4.one(), w]), 2);
        assert_eq!(f4.fp_rank(&[f4.one(), f4.one()]), 1);
        assert_eq!(f4.fp_rank(&[f4.one(), w, f4.add(f4.one(), w)]), 2);
    }

    #[test]
    fn frobenius_is_additive() {
        let f9 = FqCtx::new(3, 2).unwrap();
        for a in f9.iter_elements() {
            for b in f9.iter_elements() {
                assert_eq!(
                    f9.frobenius(f9.add(a, b)),
                    f9.add(f9.frobenius(a), f9.frobenius(b))
                );
            }
        }
    }
}
