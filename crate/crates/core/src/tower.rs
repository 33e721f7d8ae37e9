//! The tower L = K(x_0, ..., x_n) with x_i^p - x_i = phi^n(omega_i) beta
//! + eps_i, its Galois action, and the norm-based valuation oracle.
//!
//! Elements live in the monomial basis x_0^{e_0} ... x_n^{e_n} with
//! 0 <= e_i < p; the reduction x_i^p = x_i + w_i (w_i in K) is applied
//! eagerly during multiplication. Valuations in L are measured only via
//! the norm (v_L = v_K after a full conjugate product), never from the
//! scaffolding under test, so scaffold verification is non-circular.

use std::sync::Arc;

use crate::base_field::{FqElement, LaurentSeries, SeriesCtx};
use crate::error::{Error, Result, SpecViolation};

/// Packed group element / monomial index: digit i (base p) is the
/// exponent of sigma_i resp. x_i. Index 0 is the identity.
pub type GroupIndex = usize;

/// Defining data for a tower.
#[derive(Clone)]
pub struct TowerSpec {
    pub p: u64,
    pub f: usize,
    pub n: usize,
    pub precision: i64,
    pub beta: LaurentSeries,
    pub omegas: Vec<LaurentSeries>,
    pub epsilons: Vec<LaurentSeries>,
}

impl TowerSpec {
    pub fn ctx(&self) -> &Arc<SeriesCtx> {
        self.beta.ctx()
    }

    /// Rebuild the spec on a fresh context with a different working
    /// precision. The stored coefficient windows are reinterpreted as
    /// exact defining data (tails beyond a window sit at positive
    /// valuation and do not change the extension).
    pub fn reinterpret_at_precision(&self, precision: i64) -> Result<TowerSpec> {
        let ctx = SeriesCtx::new(self.p, self.f, precision)?;
        let conv = |s: &LaurentSeries| LaurentSeries::from_terms(&ctx, &s.terms());
        Ok(TowerSpec {
            p: self.p,
            f: self.f,
            n: self.n,
            precision,
            beta: conv(&self.beta),
            omegas: self.omegas.iter().map(&conv).collect(),
            epsilons: self.epsilons.iter().map(&conv).collect(),
        })
    }

    /// b = -v(beta).
    pub fn b(&self) -> Result<i64> {
        Ok(-self.beta.valuation()?)
    }

    /// Check every structural invariant, naming the violated clause.
    pub fn validate(&self) -> Result<()> {
        let ctx = self.ctx();
        if self.omegas.len() != self.n + 1 || self.epsilons.len() != self.n + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} omegas and epsilons, got {} and {}",
                self.n + 1,
                self.omegas.len(),
                self.epsilons.len()
            )));
        }
        let v_beta = self.beta.valuation()?;
        if v_beta >= 0 {
            return Err(Error::InvalidSpec(SpecViolation::BetaValuation {
                v: v_beta,
            }));
        }
        let b = -v_beta;
        if gcd(b as u64, self.p) != 1 {
            return Err(Error::InvalidSpec(SpecViolation::GcdViolated {
                b,
                p: self.p,
            }));
        }
        if !self.omegas[0].eq_to_prec(&LaurentSeries::one(ctx)) {
            return Err(Error::InvalidSpec(SpecViolation::OmegaZeroNotOne));
        }
        let mut vals = Vec::with_capacity(self.n + 1);
        for (i, omega) in self.omegas.iter().enumerate() {
            if omega.is_zero_to_prec() {
                return Err(Error::InvalidSpec(SpecViolation::FpDependence {
                    run_start: i,
                    run_end: i,
                }));
            }
            vals.push(omega.valuation()?);
        }
        if vals[0] != 0 {
            return Err(Error::InvalidSpec(SpecViolation::OmegaOrdering { i: 0 }));
        }
        for i in 1..=self.n {
            if vals[i] > vals[i - 1] {
                return Err(Error::InvalidSpec(SpecViolation::OmegaOrdering { i }));
            }
        }
        // runs of equal valuation must have F_p-independent leading residues
        let mut start = 0;
        while start <= self.n {
            let mut end = start;
            while end + 1 <= self.n && vals[end + 1] == vals[start] {
                end += 1;
            }
            if end > start {
                let leads: Vec<FqElement> = (start..=end)
                    .map(|i| self.omegas[i].leading_coeff().unwrap())
                    .collect();
                if ctx.fq.fp_rank(&leads) != leads.len() {
                    return Err(Error::InvalidSpec(SpecViolation::FpDependence {
                        run_start: start,
                        run_end: end,
                    }));
                }
            }
            start = end + 1;
        }
        if !self.epsilons[0].is_zero_to_prec() {
            return Err(Error::InvalidSpec(SpecViolation::EpsilonZeroNonzero));
        }
        let pn = (self.p as i64).pow(self.n as u32);
        for i in 1..=self.n {
            if self.epsilons[i].is_zero_to_prec() {
                continue;
            }
            let v = self.epsilons[i].valuation()?;
            let min_allowed = pn * vals[i] + v_beta;
            if v <= min_allowed {
                return Err(Error::InvalidSpec(SpecViolation::EpsilonTooLarge {
                    i,
                    v,
                    min_allowed,
                }));
            }
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) struct TowerInner {
    pub spec: TowerSpec,
    pub ctx: Arc<SeriesCtx>,
    pub degree: usize,
    /// w_i = phi^n(omega_i) beta + eps_i, the value of x_i^p - x_i.
    pub w: Vec<LaurentSeries>,
    /// Pascal's triangle mod p, binom[e][l] for e, l < p.
    binom: Vec<Vec<u64>>,
    /// Oracle valuations v_L(x_i), measured at build time.
    pub x_vals: Vec<i64>,
}

impl TowerInner {
    pub fn p(&self) -> usize {
        self.spec.p as usize
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn digit(&self, idx: usize, pos: usize) -> usize {
        let p = self.p();
        (idx / p.pow(pos as u32)) % p
    }

    pub fn digits(&self, idx: usize) -> Vec<u8> {
        (0..=self.n()).map(|i| self.digit(idx, i) as u8).collect()
    }

    pub fn from_digits(&self, digits: &[u8]) -> usize {
        let p = self.p();
        digits
            .iter()
            .rev()
            .fold(0usize, |acc, &d| acc * p + d as usize)
    }

    pub fn group_add(&self, a: usize, b: usize) -> usize {
        let p = self.p();
        let mut out = 0;
        let mut scale = 1;
        let (mut a, mut b) = (a, b);
        for _ in 0..=self.n() {
            out += (a % p + b % p) % p * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        out
    }
}

/// A validated tower handle. Cheap to clone.
#[derive(Clone)]
pub struct Tower {
    pub(crate) inner: Arc<TowerInner>,
}

/// Validate a spec and construct the tower; measures v_L(x_i) with the
/// norm oracle up front.
pub fn build_tower(spec: TowerSpec) -> Result<Tower> {
    spec.validate()?;
    let ctx = spec.ctx().clone();
    let p = spec.p;
    let n = spec.n;
    let degree = (p as usize)
        .checked_pow(n as u32 + 1)
        .filter(|&d| d <= 1 << 20)
        .ok_or_else(|| Error::InvalidInput("tower degree too large".into()))?;

    let w: Vec<LaurentSeries> = (0..=n)
        .map(|i| spec.omegas[i].phi(n as u32).mul(&spec.beta).add(&spec.epsilons[i]))
        .collect();

    let mut binom = vec![vec![0u64; p as usize]; p as usize];
    for e in 0..p as usize {
        binom[e][0] = 1;
        for l in 1..=e {
            binom[e][l] =
                (binom[e - 1][l - 1] + if l <= e - 1 { binom[e - 1][l] } else { 0 }) % p;
        }
    }

    let inner = TowerInner {
        spec,
        ctx,
        degree,
        w,
        binom,
        x_vals: Vec::new(),
    };
    // measure generator valuations with the oracle
    let probe = Tower {
        inner: Arc::new(inner),
    };
    let mut x_vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        x_vals.push(valuation_l(&probe.x(i))?);
    }
    let mut inner = Arc::try_unwrap(probe.inner)
        .ok()
        .expect("probe elements released");
    inner.x_vals = x_vals;
    Ok(Tower {
        inner: Arc::new(inner),
    })
}

impl Tower {
    pub fn spec(&self) -> &TowerSpec {
        &self.inner.spec
    }

    pub fn ctx(&self) -> &Arc<SeriesCtx> {
        &self.inner.ctx
    }

    pub fn p(&self) -> u64 {
        self.inner.spec.p
    }

    pub fn n(&self) -> usize {
        self.inner.spec.n
    }

    pub fn degree(&self) -> usize {
        self.inner.degree
    }

    /// v_L(x_i) as measured by the oracle at build time.
    pub fn x_valuation(&self, i: usize) -> i64 {
        self.inner.x_vals[i]
    }

    pub fn zero(&self) -> TowerElement {
        TowerElement {
            inner: self.inner.clone(),
            coeffs: vec![LaurentSeries::zero(&self.inner.ctx); self.inner.degree],
        }
    }

    pub fn one(&self) -> TowerElement {
        self.from_series(&LaurentSeries::one(&self.inner.ctx))
    }

    pub fn from_series(&self, s: &LaurentSeries) -> TowerElement {
        let mut e = self.zero();
        e.coeffs[0] = s.clone();
        e
    }

    /// Element with the given monomial-basis coefficients (slot k is the
    /// monomial with exponent digits of k).
    pub fn element_from_coeffs(&self, coeffs: Vec<LaurentSeries>) -> TowerElement {
        assert_eq!(coeffs.len(), self.inner.degree);
        TowerElement {
            inner: self.inner.clone(),
            coeffs,
        }
    }

    /// The generator x_i.
    pub fn x(&self, i: usize) -> TowerElement {
        let mut e = self.zero();
        let idx = (self.p() as usize).pow(i as u32);
        e.coeffs[idx] = LaurentSeries::one(&self.inner.ctx);
        e
    }

    pub fn group_digits(&self, g: GroupIndex) -> Vec<u8> {
        self.inner.digits(g)
    }

    pub fn group_from_digits(&self, d: &[u8]) -> GroupIndex {
        self.inner.from_digits(d)
    }

    pub fn group_add(&self, a: GroupIndex, b: GroupIndex) -> GroupIndex {
        self.inner.group_add(a, b)
    }

    /// sigma_i as a group index.
    pub fn sigma(&self, i: usize) -> GroupIndex {
        (self.p() as usize).pow(i as u32)
    }
}

/// Element of L in the monomial basis; slot k holds the coefficient of
/// the monomial with exponent digits of k.
#[derive(Clone)]
pub struct TowerElement {
    pub(crate) inner: Arc<TowerInner>,
    pub(crate) coeffs: Vec<LaurentSeries>,
}

impl TowerElement {
    pub fn tower(&self) -> Tower {
        Tower {
            inner: self.inner.clone(),
        }
    }

    pub fn coeff(&self, idx: usize) -> &LaurentSeries {
        &self.coeffs[idx]
    }

    pub fn coeffs(&self) -> &[LaurentSeries] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        TowerElement {
            inner: self.inner.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.sub(b))
            .collect();
        TowerElement {
            inner: self.inner.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Self {
        TowerElement {
            inner: self.inner.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn mul_series(&self, s: &LaurentSeries) -> Self {
        TowerElement {
            inner: self.inner.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let inner = &self.inner;
        let p = inner.p();
        let n = inner.n();
        let mut out = vec![LaurentSeries::zero(&inner.ctx); inner.degree];
        for (ia, ca) in self.coeffs.iter().enumerate() {
            if ca.is_exact_zero() {
                continue;
            }
            for (ib, cb) in other.coeffs.iter().enumerate() {
                if cb.is_exact_zero() {
                    continue;
                }
                let s = ca.mul(cb);
                // distribute over the reduction x_i^p = x_i + w_i
                let mut work: Vec<(usize, LaurentSeries)> = vec![(0, s)];
                let mut scale = 1usize;
                for pos in 0..=n {
                    let d = inner.digit(ia, pos) + inner.digit(ib, pos);
                    if d < p {
                        for item in work.iter_mut() {
                            item.0 += d * scale;
                        }
                    } else {
                        let mut split = Vec::with_capacity(work.len() * 2);
                        for (idx, ser) in work {
                            split.push((idx + (d - p + 1) * scale, ser.clone()));
                            split.push((idx + (d - p) * scale, ser.mul(&inner.w[pos])));
                        }
                        work = split;
                    }
                    scale *= p;
                }
                for (idx, ser) in work {
                    out[idx] = out[idx].add(&ser);
                }
            }
        }
        TowerElement {
            inner: self.inner.clone(),
            coeffs: out,
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        let tower = self.tower();
        let mut result = tower.one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// x -> x^p - x on tower elements.
    pub fn wp(&self) -> Self {
        self.pow(self.inner.p() as u64).sub(self)
    }

    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_to_prec())
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .all(|(a, b)| a.eq_to_prec(b))
    }

    /// True when only the constant monomial is (possibly) nonzero.
    pub fn is_constant_monomial(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero_to_prec())
    }

    pub fn format(&self) -> String {
        let inner = &self.inner;
        let mut parts = Vec::new();
        for (idx, c) in self.coeffs.iter().enumerate() {
            if c.is_zero_to_prec() {
                continue;
            }
            let mono: Vec<String> = (0..=inner.n())
                .filter_map(|i| match inner.digit(idx, i) {
                    0 => None,
                    1 => Some(format!("x{i}")),
                    d => Some(format!("x{i}^{d}")),
                })
                .collect();
            let coeff = c.format();
            if mono.is_empty() {
                parts.push(format!("({coeff})"));
            } else {
                parts.push(format!("({coeff})*{}", mono.join("*")));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl std::fmt::Debug for TowerElement {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "{}", self.format())
    }
}

/// Apply sigma_0^{a_0} ... sigma_n^{a_n} (digits of g), the K-algebra
/// automorphism with sigma_i x_i = x_i + 1 and sigma_i x_j = x_j.
pub fn apply_group_element(g: GroupIndex, e: &TowerElement) -> TowerElement {
    let inner = &e.inner;
    if g == 0 {
        return e.clone();
    }
    let p = inner.p();
    let n = inner.n();
    let fq = &inner.ctx.fq;
    let mut out = vec![LaurentSeries::zero(&inner.ctx); inner.degree];
    for (idx, c) in e.coeffs.iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        // expand prod_i (x_i + a_i)^{e_i}; constants live in F_p
        let mut work: Vec<(usize, u64)> = vec![(0, 1)];
        let mut scale = 1usize;
        for pos in 0..=n {
            let ei = inner.digit(idx, pos);
            let ai = inner.digit(g, pos) as u64;
            if ai == 0 || ei == 0 {
                for item in work.iter_mut() {
                    item.0 += ei * scale;
                }
            } else {
                // the l = e_i term always has constant 1, so precision
                // info from window-zero coefficients survives
                let mut split = Vec::with_capacity(work.len() * (ei + 1));
                for (base, cst) in work {
                    for l in 0..=ei {
                        let mut factor = inner.binom[ei][l];
                        // a_i^{e_i - l} mod p
                        for _ in 0..(ei - l) {
                            factor = factor * ai % p as u64;
                        }
                        let cst2 = cst * factor % p as u64;
                        if cst2 != 0 {
                            split.push((base + l * scale, cst2));
                        }
                    }
                }
                work = split;
            }
            scale *= p;
        }
        for (target, cst) in work {
            let term = if cst == 1 {
                c.clone()
            } else {
                c.mul_fq(fq.from_u64(cst))
            };
            out[target] = out[target].add(&term);
        }
    }
    TowerElement {
        inner: e.inner.clone(),
        coeffs: out,
    }
}

fn balanced_product(mut items: Vec<TowerElement>) -> TowerElement {
    debug_assert!(!items.is_empty());
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(a.mul(&b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().unwrap()
}

/// Norm down to K: the product of all p^{n+1} conjugates, evaluated one
/// cyclic layer at a time (a balanced regrouping of the same product).
/// After the sigma_i layer every monomial involving x_i must vanish to
/// working precision; the final constant coefficient is the norm.
pub fn norm(e: &TowerElement) -> Result<LaurentSeries> {
    let inner = &e.inner;
    let p = inner.p();
    let n = inner.n();
    let mut acc = e.clone();
    for i in (0..=n).rev() {
        let mut factors = vec![acc.clone()];
        let step = p.pow(i as u32);
        for a in 1..p {
            factors.push(apply_group_element(a * step, &acc));
        }
        acc = balanced_product(factors);
        for idx in 0..inner.degree {
            if inner.digit(idx, i) != 0 && !acc.coeffs[idx].is_zero_to_prec() {
                return Err(Error::PrecisionLoss(format!(
                    "conjugate product over layer {i} kept a nonzero x{i} component"
                )));
            }
        }
    }
    for idx in 1..inner.degree {
        if !acc.coeffs[idx].is_zero_to_prec() {
            return Err(Error::PrecisionLoss(
                "norm has a certified-nonzero non-constant component".into(),
            ));
        }
    }
    Ok(acc.coeffs[0].clone())
}

/// Plain balanced product over all conjugates in index order; cross-check
/// for `norm` (kept independent of the layer-by-layer route).
pub fn norm_naive(e: &TowerElement) -> Result<LaurentSeries> {
    let inner = &e.inner;
    let factors: Vec<TowerElement> = (0..inner.degree)
        .map(|g| apply_group_element(g, e))
        .collect();
    let prod = balanced_product(factors);
    for idx in 1..inner.degree {
        if !prod.coeffs[idx].is_zero_to_prec() {
            return Err(Error::PrecisionLoss(
                "norm has a certified-nonzero non-constant component".into(),
            ));
        }
    }
    Ok(prod.coeffs[0].clone())
}

/// v_L via the oracle: v_K of the norm (L/K is fully ramified).
pub fn valuation_l(e: &TowerElement) -> Result<i64> {
    norm(e)?.valuation()
}

/// Multiplicative inverse: the product of all nontrivial conjugates
/// divided by the norm.
pub fn invert(e: &TowerElement) -> Result<TowerElement> {
    let inner = &e.inner;
    let nrm = norm(e)?;
    let nrm_inv = nrm.invert()?;
    let factors: Vec<TowerElement> = (1..inner.degree)
        .map(|g| apply_group_element(g, e))
        .collect();
    Ok(balanced_product(factors).mul_series(&nrm_inv))
}

/// Binomial coefficient of a tower element: e(e-1)...(e-k+1)/k!, k < p.
pub fn binom_tower(e: &TowerElement, k: u64) -> Result<TowerElement> {
    let tower = e.tower();
    let p = tower.p();
    if k >= p {
        return Err(Error::InvalidInput(format!(
            "binomial lower index {k} must be < p = {p}"
        )));
    }
    let fq = &tower.ctx().fq;
    let mut prod = tower.one();
    for j in 0..k {
        let shift = tower.from_series(&LaurentSeries::constant(tower.ctx(), fq.from_u64(j)));
        prod = prod.mul(&e.sub(&shift));
    }
    let mut fact = 1u64;
    for j in 2..=k {
        fact = fact * j % p;
    }
    let inv = fq.inv(fq.from_u64(fact))?;
    Ok(prod.mul_series(&LaurentSeries::constant(tower.ctx(), inv)))
}

/// pi_L = t^a (X_n^{(n)})^c with a p^{n+1} - c b_n = 1, the minimal
/// nonnegative Bezout pair; gcd(b_n, p) = 1 guarantees solvability.
pub fn uniformizer(tower: &Tower, x_nn: &TowerElement, b_n: i64) -> Result<TowerElement> {
    let modulus = tower.degree() as i64;
    let c = mod_inverse(b_n.rem_euclid(modulus), modulus).ok_or_else(|| {
        Error::InvalidInput(format!("b_n = {b_n} not invertible mod {modulus}"))
    })?;
    let c = (modulus - c) % modulus; // c = -b_n^{-1} mod p^{n+1}
    let a = (1 + c * b_n) / modulus;
    debug_assert_eq!(a * modulus - c * b_n, 1);
    let t_a = LaurentSeries::monomial(tower.ctx(), tower.ctx().fq.one(), 1).pow(a)?;
    Ok(x_nn.pow(c as u64).mul_series(&t_a))
}

fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r.abs() != 1 {
        return None;
    }
    Some((old_s * old_r.signum()).rem_euclid(m))
}

/// A random unit of L: a random nonzero constant term plus, per
/// nonconstant monomial, an optional random coefficient shifted so the
/// term has strictly positive valuation. The constant term dominates, so
/// v_L = 0 is certified by the ultrametric inequality.
pub fn random_unit(tower: &Tower, rng: &mut dyn rand::RngCore) -> TowerElement {
    let ctx = tower.ctx();
    let deg = tower.degree() as i64;
    let mut unit = tower.from_series(&LaurentSeries::constant(ctx, ctx.fq.random_nonzero(rng)));
    for idx in 1..tower.degree() {
        if rng.next_u32() % 2 == 0 {
            continue;
        }
        let digits = tower.group_digits(idx);
        let v_mono: i64 = digits
            .iter()
            .enumerate()
            .map(|(i, &d)| d as i64 * tower.x_valuation(i))
            .sum();
        // smallest k with k deg + v_mono >= 1
        let k = (1 - v_mono).div_euclid(deg) + i64::from((1 - v_mono).rem_euclid(deg) != 0);
        let coeff = LaurentSeries::monomial(ctx, ctx.fq.random_nonzero(rng), k);
        let mut term = tower.zero();
        term.coeffs[idx] = coeff;
        unit = unit.add(&term);
    }
    unit
}

/// pi_L^v times a random unit; the result has v_L exactly v.
pub fn random_element_of_valuation(
    tower: &Tower,
    pi: &TowerElement,
    v: i64,
    rng: &mut dyn rand::RngCore,
) -> Result<TowerElement> {
    let unit = random_unit(tower, rng);
    let shift = if v >= 0 {
        pi.pow(v as u64)
    } else {
        invert(pi)?.pow((-v) as u64)
    };
    Ok(unit.mul(&shift))
}
