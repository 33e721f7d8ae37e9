//! Truncated Laurent series over F_q: the base field K = F_q((t)).
//!
//! A series stores a dense coefficient window starting at `lo` together
//! with an absolute precision bound `prec`: coefficients at exponents at
//! or beyond `prec` are unknown, coefficients inside the window but past
//! the stored vector are known zero. `prec == i64::MAX` marks an exact
//! value. Every operation propagates `prec` pessimistically, so a stored
//! coefficient always equals the true coefficient of the underlying
//! exact value. A series whose stored window is all zero is "zero to
//! working precision" — a distinct state, not valuation infinity — and
//! `valuation` reports it as an error that callers must branch on.

use std::sync::Arc;

use crate::base_field::fq::{FqCtx, FqElement};
use crate::error::{Error, Result};

pub const EXACT: i64 = i64::MAX;

/// Shared context: the coefficient field plus the working relative
/// precision used whenever an operation (inversion, window capping)
/// must introduce a truncation.
pub struct SeriesCtx {
    pub fq: FqCtx,
    pub rel_prec: i64,
}

impl std::fmt::Debug for SeriesCtx {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            fm,
            "SeriesCtx(p={}, f={}, rel_prec={})",
            self.fq.p(),
            self.fq.f(),
            self.rel_prec
        )
    }
}

impl SeriesCtx {
    pub fn new(p: u64, f: usize, rel_prec: i64) -> Result<Arc<SeriesCtx>> {
        if rel_prec < 8 {
            return Err(Error::InvalidInput(format!(
                "relative precision {rel_prec} too small (need >= 8)"
            )));
        }
        Ok(Arc::new(SeriesCtx {
            fq: FqCtx::new(p, f)?,
            rel_prec,
        }))
    }

    pub fn p(&self) -> u64 {
        self.fq.p()
    }
}

#[derive(Clone)]
pub struct LaurentSeries {
    ctx: Arc<SeriesCtx>,
    lo: i64,
    coeffs: Vec<FqElement>,
    prec: i64,
}

fn sat_add(a: i64, b: i64) -> i64 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a.saturating_add(b)
    }
}

/// Truncated convolution over F_q by F_p-digit planes: one u64
/// multiply-accumulate pass per (d, e) digit pair, a single reduction mod
/// p at the end, and a recombination of w^{d+e} through the defining
/// polynomial. Digit products are < p^2 <= 49 and spans stay well under
/// 2^20, so the accumulators cannot overflow.
fn convolve(
    ctx: &SeriesCtx,
    a: &[FqElement],
    b: &[FqElement],
    span: usize,
) -> Vec<FqElement> {
    let fq = &ctx.fq;
    let p = fq.p();
    let f = fq.f();
    let la = a.len().min(span);
    let lb = b.len().min(span);
    let mut planes = vec![vec![0u64; span]; 2 * f - 1];
    let mut a_dig = vec![0u64; la];
    let mut b_dig = vec![0u64; lb];
    for d in 0..f {
        for (i, &x) in a.iter().take(la).enumerate() {
            a_dig[i] = fq.digit(x, d);
        }
        for e in 0..f {
            for (j, &y) in b.iter().take(lb).enumerate() {
                b_dig[j] = fq.digit(y, e);
            }
            let plane = &mut planes[d + e];
            for (i, &ad) in a_dig.iter().enumerate() {
                if ad == 0 {
                    continue;
                }
                let top = (span - i).min(lb);
                for (slot, &bd) in plane[i..i + top].iter_mut().zip(&b_dig[..top]) {
                    *slot += ad * bd;
                }
            }
        }
    }
    let wpow = fq.w_power_digits();
    let mut out = vec![FqElement::ZERO; span];
    let mut digits = vec![0u64; f];
    for (k, slot) in out.iter_mut().enumerate() {
        for d in digits.iter_mut() {
            *d = 0;
        }
        for (deg, plane) in planes.iter().enumerate() {
            let c = plane[k] % p;
            if c == 0 {
                continue;
            }
            for (d, &wd) in wpow[deg].iter().enumerate() {
                digits[d] = (digits[d] + c * wd) % p;
            }
        }
        *slot = fq.from_digits(&digits);
    }
    out
}

impl LaurentSeries {
    fn build(ctx: Arc<SeriesCtx>, lo: i64, coeffs: Vec<FqElement>, prec: i64, cap: bool) -> Self {
        let mut s = LaurentSeries {
            ctx,
            lo,
            coeffs,
            prec,
        };
        s.normalize(cap);
        s
    }

    fn normalize(&mut self, cap: bool) {
        // cut at precision
        if self.prec != EXACT {
            let keep = self.prec.saturating_sub(self.lo).max(0);
            if (self.coeffs.len() as i64) > keep {
                self.coeffs.truncate(keep as usize);
            }
        }
        // trim leading zeros
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i64;
        }
        // trim trailing zeros
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        // cap the stored span at the working window
        if cap {
            let w = self.ctx.rel_prec;
            if (self.coeffs.len() as i64) > w {
                self.coeffs.truncate(w as usize);
                self.prec = self.prec.min(self.lo + w);
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }
        if self.coeffs.is_empty() {
            self.lo = 0;
        }
    }

    pub fn ctx(&self) -> &Arc<SeriesCtx> {
        &self.ctx
    }

    pub fn zero(ctx: &Arc<SeriesCtx>) -> Self {
        LaurentSeries {
            ctx: ctx.clone(),
            lo: 0,
            coeffs: Vec::new(),
            prec: EXACT,
        }
    }

    pub fn zero_to_prec(ctx: &Arc<SeriesCtx>, prec: i64) -> Self {
        LaurentSeries {
            ctx: ctx.clone(),
            lo: 0,
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn one(ctx: &Arc<SeriesCtx>) -> Self {
        Self::monomial(ctx, ctx.fq.one(), 0)
    }

    pub fn constant(ctx: &Arc<SeriesCtx>, c: FqElement) -> Self {
        Self::monomial(ctx, c, 0)
    }

    pub fn monomial(ctx: &Arc<SeriesCtx>, c: FqElement, k: i64) -> Self {
        Self::build(ctx.clone(), k, vec![c], EXACT, false)
    }

    /// Exact series from (exponent, coefficient) terms.
    pub fn from_terms(ctx: &Arc<SeriesCtx>, terms: &[(i64, FqElement)]) -> Self {
        if terms.is_empty() {
            return Self::zero(ctx);
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![FqElement::ZERO; (hi - lo + 1) as usize];
        for &(k, c) in terms {
            coeffs[(k - lo) as usize] = ctx.fq.add(coeffs[(k - lo) as usize], c);
        }
        Self::build(ctx.clone(), lo, coeffs, EXACT, false)
    }

    /// Stored nonzero terms in ascending exponent order.
    pub fn terms(&self) -> Vec<(i64, FqElement)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| (self.lo + i as i64, c))
            .collect()
    }

    pub fn abs_precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// Zero on the whole certified window (includes exact zero).
    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec == EXACT
    }

    /// Exponent of the first certified-nonzero coefficient.
    pub fn valuation(&self) -> Result<i64> {
        if self.coeffs.is_empty() {
            Err(Error::NonzeroUndetectable {
                precision: self.prec,
            })
        } else {
            Ok(self.lo)
        }
    }

    /// Lower bound on the valuation (equals `prec` for window-zero series).
    pub fn valuation_lower_bound(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.prec
        } else {
            self.lo
        }
    }

    pub fn leading_coeff(&self) -> Result<FqElement> {
        self.valuation().map(|_| self.coeffs[0])
    }

    /// Coefficient at exponent k; `None` when k is beyond the precision.
    pub fn coeff(&self, k: i64) -> Option<FqElement> {
        if k >= self.prec {
            return None;
        }
        if k < self.lo || k >= self.lo + self.coeffs.len() as i64 {
            Some(FqElement::ZERO)
        } else {
            Some(self.coeffs[(k - self.lo) as usize])
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert!(Arc::ptr_eq(&self.ctx, &other.ctx));
        let prec = self.prec.min(other.prec);
        if self.coeffs.is_empty() && other.coeffs.is_empty() {
            return Self::zero_to_prec(&self.ctx, prec);
        }
        let lo = match (self.coeffs.is_empty(), other.coeffs.is_empty()) {
            (true, false) => other.lo,
            (false, true) => self.lo,
            _ => self.lo.min(other.lo),
        };
        let hi_a = self.lo + self.coeffs.len() as i64;
        let hi_b = other.lo + other.coeffs.len() as i64;
        let hi = hi_a.max(hi_b).min(prec);
        if hi <= lo {
            return Self::zero_to_prec(&self.ctx, prec);
        }
        let mut coeffs = vec![FqElement::ZERO; (hi - lo) as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.lo + i as i64;
            if k < hi {
                coeffs[(k - lo) as usize] = c;
            }
        }
        let fq = &self.ctx.fq;
        for (i, &c) in other.coeffs.iter().enumerate() {
            let k = other.lo + i as i64;
            if k < hi {
                let slot = &mut coeffs[(k - lo) as usize];
                *slot = fq.add(*slot, c);
            }
        }
        Self::build(self.ctx.clone(), lo, coeffs, prec, true)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|&c| self.ctx.fq.neg(c)).collect();
        LaurentSeries {
            ctx: self.ctx.clone(),
            lo: self.lo,
            coeffs,
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert!(Arc::ptr_eq(&self.ctx, &other.ctx));
        let prec = sat_add(self.prec, other.valuation_lower_bound())
            .min(sat_add(other.prec, self.valuation_lower_bound()));
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero_to_prec(&self.ctx, prec);
        }
        let lo = self.lo + other.lo;
        let span = (self.coeffs.len() + other.coeffs.len() - 1) as i64;
        let span = if prec == EXACT {
            span
        } else {
            span.min(prec - lo).max(0)
        };
        if span == 0 {
            return Self::zero_to_prec(&self.ctx, prec);
        }
        let coeffs = convolve(&self.ctx, &self.coeffs, &other.coeffs, span as usize);
        Self::build(self.ctx.clone(), lo, coeffs, prec, true)
    }

    pub fn mul_fq(&self, c: FqElement) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        let fq = &self.ctx.fq;
        let coeffs = self.coeffs.iter().map(|&a| fq.mul(a, c)).collect();
        LaurentSeries {
            ctx: self.ctx.clone(),
            lo: self.lo,
            coeffs,
            prec: self.prec,
        }
    }

    /// Multiply by the exact monomial c * t^k.
    pub fn mul_monomial(&self, c: FqElement, k: i64) -> Self {
        let mut s = self.mul_fq(c);
        if !s.coeffs.is_empty() {
            s.lo += k;
        }
        s.prec = sat_add(s.prec, k);
        s
    }

    /// phi^k: coefficients to the p^k, exponents scaled by p^k.
    pub fn phi(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let p = self.ctx.fq.p();
        let scale = (p as i64)
            .checked_pow(k)
            .expect("phi exponent scale overflow");
        let prec = if self.prec == EXACT {
            EXACT
        } else {
            self.prec.saturating_mul(scale)
        };
        if self.coeffs.is_empty() {
            return Self::zero_to_prec(&self.ctx, prec);
        }
        let fq = &self.ctx.fq;
        let span = (self.coeffs.len() as i64 - 1) * scale + 1;
        assert!(span <= 1 << 24, "phi span too large");
        let mut coeffs = vec![FqElement::ZERO; span as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[i * scale as usize] = fq.frobenius_k(c, k as u64);
            }
        }
        Self::build(self.ctx.clone(), self.lo * scale, coeffs, prec, false)
    }

    /// The additive map x -> x^p - x.
    pub fn wp(&self) -> Self {
        self.phi(1).sub(self)
    }

    /// Inverse with the same relative precision (a lone exact monomial
    /// inverts exactly).
    pub fn invert(&self) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(Error::DivisionByZero);
        }
        let v = self.lo;
        let c0 = self.coeffs[0];
        let c0inv = self.ctx.fq.inv(c0)?;
        if self.prec == EXACT && self.coeffs.len() == 1 {
            return Ok(Self::monomial(&self.ctx, c0inv, -v));
        }
        let rel = if self.prec == EXACT {
            self.ctx.rel_prec
        } else {
            (self.prec - v).min(self.ctx.rel_prec)
        };
        // u = tail / (c0 t^v), so self = c0 t^v (1 + u) with v(u) >= 1
        let mut u_coeffs = vec![FqElement::ZERO; (rel as usize).min(self.coeffs.len())];
        for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
            if (i as i64) < rel {
                u_coeffs[i] = self.ctx.fq.mul(c, c0inv);
            }
        }
        let u = Self::build(self.ctx.clone(), 0, u_coeffs, rel, false);
        // geometric series sum_{k} (-u)^k, truncated at t^rel
        let mut acc = Self::one(&self.ctx);
        let mut term = Self::one(&self.ctx);
        let neg_u = u.neg();
        loop {
            term = term.mul(&neg_u).truncate_at(rel);
            if term.coeffs.is_empty() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.mul_fq(c0inv).shift(-v).with_prec(-v + rel))
    }

    pub fn div(&self, den: &Self) -> Result<Self> {
        Ok(self.mul(&den.invert()?))
    }

    /// Integer power; negative exponents go through `invert`.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.invert()?.pow(-e);
        }
        let mut result = Self::one(&self.ctx);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    fn shift(&self, k: i64) -> Self {
        let mut s = self.clone();
        if !s.coeffs.is_empty() {
            s.lo += k;
        }
        s.prec = sat_add(s.prec, k);
        s
    }

    fn with_prec(mut self, prec: i64) -> Self {
        self.prec = self.prec.min(prec);
        self.normalize(false);
        self
    }

    /// Forget everything at exponents >= `prec`.
    pub fn truncate_at(&self, prec: i64) -> Self {
        self.clone().with_prec(prec)
    }

    /// Agreement of the two certified windows. With exact operands this
    /// is exact equality.
    pub fn eq_to_prec(&self, other: &Self) -> bool {
        let prec = self.prec.min(other.prec);
        let lo = match (self.coeffs.is_empty(), other.coeffs.is_empty()) {
            (true, true) => return true,
            (true, false) => other.lo,
            (false, true) => self.lo,
            (false, false) => self.lo.min(other.lo),
        };
        if lo >= prec {
            return true;
        }
        let hi_a = if self.coeffs.is_empty() {
            lo
        } else {
            self.lo + self.coeffs.len() as i64
        };
        let hi_b = if other.coeffs.is_empty() {
            lo
        } else {
            other.lo + other.coeffs.len() as i64
        };
        let hi = hi_a.max(hi_b).min(prec);
        for k in lo..hi {
            match (self.coeff(k), other.coeff(k)) {
                (Some(a), Some(b)) if a == b => {}
                _ => return false,
            }
        }
        true
    }

    /// Solve x^p - x = self, requiring a nonnegative valuation. The
    /// positive-valuation part always has the t-adically convergent root
    /// -(e + phi(e) + phi^2(e) + ...); a nonzero constant term needs a
    /// trace-zero root in F_q.
    pub fn solve_wp(&self) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Ok(Self::zero_to_prec(&self.ctx, self.prec));
        }
        if self.lo < 0 {
            return Err(Error::InvalidInput(format!(
                "solve_wp needs v >= 0, got {}",
                self.lo
            )));
        }
        let mut rest = self.clone();
        let mut root = Self::zero(&self.ctx);
        if self.lo == 0 {
            let c = self.coeffs[0];
            let y0 = self.ctx.fq.solve_wp(c)?;
            root = Self::constant(&self.ctx, y0);
            rest = rest.sub(&Self::constant(&self.ctx, c));
        }
        // rest now has v >= 1
        let prec = if rest.prec == EXACT {
            // the geometric phi-sum is infinite for inexact-free inputs;
            // cut at the working window past the valuation
            rest.valuation_lower_bound() + self.ctx.rel_prec
        } else {
            rest.prec
        };
        let mut acc = Self::zero(&self.ctx);
        let mut cur = rest.truncate_at(prec);
        while !cur.coeffs.is_empty() {
            acc = acc.add(&cur);
            cur = cur.phi(1).truncate_at(prec);
        }
        Ok(root.add(&acc.neg()).with_prec(prec))
    }

    /// Pretty canonical form, e.g. `1*t^-1 + (w+1)*t^2`.
    pub fn format(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let fq = &self.ctx.fq;
        let terms: Vec<String> = self
            .terms()
            .iter()
            .map(|&(k, c)| {
                let cs = fq.format_element(c);
                let atom = !cs.contains('+') && !cs.contains('*');
                if atom {
                    format!("{cs}*t^{k}")
                } else {
                    format!("({cs})*t^{k}")
                }
            })
            .collect();
        terms.join(" + ")
    }
}

impl PartialEq for LaurentSeries {
    /// Structural equality of (valuation window, coefficients, precision).
    fn eq(&self, other: &Self) -> bool {
        self.lo == other.lo && self.prec == other.prec && self.coeffs == other.coeffs
    }
}

impl std::fmt::Debug for LaurentSeries {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "{}", self.format())?;
        if self.prec != EXACT {
            write!(fm, " + O(t^{})", self.prec)?;
        }
        Ok(())
    }
}

/// Random exact series: nonzero leading coefficient at exponent `v`,
/// plus up to `extra` further terms within the next `spread` exponents.
pub fn random_series(
    ctx: &Arc<SeriesCtx>,
    v: i64,
    extra: usize,
    spread: i64,
    rng: &mut dyn rand::RngCore,
) -> LaurentSeries {
    let mut terms = vec![(v, ctx.fq.random_nonzero(rng))];
    for _ in 0..extra {
        let k = v + 1 + (rng.next_u64() % spread.max(1) as u64) as i64;
        terms.push((k, ctx.fq.random_element(rng)));
    }
    LaurentSeries::from_terms(ctx, &terms)
}
