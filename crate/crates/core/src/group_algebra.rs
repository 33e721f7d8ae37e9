//! The group algebra K[G] for G = (Z/p)^{n+1}: dense coefficient maps
//! over group indices, binomial coefficients with series-valued top
//! argument, and truncated exponentiation of 1-units.
//!
//! Every element of the augmentation ideal is nilpotent of order p, so
//! U^{[A]} = sum_{i<p} binom(A, i) (U-1)^i is a well-defined "power"
//! with series exponent A; it inverts via A -> -A but does not
//! distribute over products.

use std::sync::Arc;

use crate::base_field::LaurentSeries;
use crate::error::{Error, Result};
use crate::tower::TowerInner;
use crate::tower::{apply_group_element, GroupIndex, Tower, TowerElement};

#[derive(Clone)]
pub struct GroupAlgebraElement {
    pub(crate) inner: Arc<TowerInner>,
    pub(crate) coeffs: Vec<LaurentSeries>,
}

impl GroupAlgebraElement {
    pub fn zero(tower: &Tower) -> Self {
        GroupAlgebraElement {
            inner: tower.inner.clone(),
            coeffs: vec![LaurentSeries::zero(tower.ctx()); tower.degree()],
        }
    }

    pub fn one(tower: &Tower) -> Self {
        let mut e = Self::zero(tower);
        e.coeffs[0] = LaurentSeries::one(tower.ctx());
        e
    }

    /// The group element sigma_0^{a_0} ... sigma_n^{a_n} as an algebra
    /// element.
    pub fn group_element(tower: &Tower, g: GroupIndex) -> Self {
        let mut e = Self::zero(tower);
        e.coeffs[g] = LaurentSeries::one(tower.ctx());
        e
    }

    pub fn sigma(tower: &Tower, i: usize) -> Self {
        Self::group_element(tower, tower.sigma(i))
    }

    fn tower(&self) -> Tower {
        Tower {
            inner: self.inner.clone(),
        }
    }

    pub fn coeff(&self, g: GroupIndex) -> &LaurentSeries {
        &self.coeffs[g]
    }

    pub fn add(&self, other: &Self) -> Self {
        GroupAlgebraElement {
            inner: self.inner.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GroupAlgebraElement {
            inner: self.inner.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn mul_series(&self, s: &LaurentSeries) -> Self {
        GroupAlgebraElement {
            inner: self.inner.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    /// Convolution product (G is abelian, so this is commutative).
    pub fn mul(&self, other: &Self) -> Self {
        let tower = self.tower();
        let mut out = Self::zero(&tower);
        for (ga, ca) in self.coeffs.iter().enumerate() {
            if ca.is_exact_zero() {
                continue;
            }
            for (gb, cb) in other.coeffs.iter().enumerate() {
                if cb.is_exact_zero() {
                    continue;
                }
                let g = self.inner.group_add(ga, gb);
                out.coeffs[g] = out.coeffs[g].add(&ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, e: u64) -> Self {
        let tower = self.tower();
        let mut result = Self::one(&tower);
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

    /// Sum of coefficients (image under the augmentation map).
    pub fn augmentation(&self) -> LaurentSeries {
        let mut acc = LaurentSeries::zero(&self.inner.ctx);
        for c in &self.coeffs {
            acc = acc.add(c);
        }
        acc
    }

    /// A 1-unit is 1 plus an element of the augmentation ideal.
    pub fn is_one_unit(&self) -> bool {
        self.augmentation()
            .sub(&LaurentSeries::one(&self.inner.ctx))
            .is_zero_to_prec()
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

    pub fn format(&self) -> String {
        let inner = &self.inner;
        let mut parts = Vec::new();
        for (g, c) in self.coeffs.iter().enumerate() {
            if c.is_zero_to_prec() {
                continue;
            }
            let mono: Vec<String> = (0..=inner.n())
                .filter_map(|i| match inner.digit(g, i) {
                    0 => None,
                    1 => Some(format!("s{i}")),
                    d => Some(format!("s{i}^{d}")),
                })
                .collect();
            if mono.is_empty() {
                parts.push(format!("({})", c.format()));
            } else {
                parts.push(format!("({})*{}", c.format(), mono.join("*")));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl std::fmt::Debug for GroupAlgebraElement {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "{}", self.format())
    }
}

/// binom(A, i) = A (A-1) ... (A-i+1) / i! for a series top argument;
/// needs i < p so i! is invertible.
pub fn binom_scalar(a: &LaurentSeries, i: u64) -> Result<LaurentSeries> {
    let ctx = a.ctx().clone();
    let p = ctx.fq.p();
    if i >= p {
        return Err(Error::InvalidInput(format!(
            "binomial lower index {i} must be < p = {p}"
        )));
    }
    let mut prod = LaurentSeries::one(&ctx);
    for j in 0..i {
        prod = prod.mul(&a.sub(&LaurentSeries::constant(&ctx, ctx.fq.from_u64(j))));
    }
    let mut fact = 1u64;
    for j in 2..=i {
        fact = fact * j % p;
    }
    let inv = ctx.fq.inv(ctx.fq.from_u64(fact))?;
    Ok(prod.mul_fq(inv))
}

/// Truncated exponentiation U^{[A]} = sum_{i=0}^{p-1} binom(A, i)(U-1)^i
/// for a 1-unit U and scalar A in K. The result is again a 1-unit.
pub fn truncated_exp(u: &GroupAlgebraElement, a: &LaurentSeries) -> Result<GroupAlgebraElement> {
    if !u.is_one_unit() {
        return Err(Error::NotOneUnit);
    }
    let tower = u.tower();
    let p = tower.p();
    let d = u.sub(&GroupAlgebraElement::one(&tower));
    let mut acc = GroupAlgebraElement::one(&tower);
    let mut dpow = GroupAlgebraElement::one(&tower);
    for i in 1..p {
        dpow = dpow.mul(&d);
        if dpow.is_zero_to_prec() {
            break;
        }
        acc = acc.add(&dpow.mul_series(&binom_scalar(a, i)?));
    }
    Ok(acc)
}

/// K-linear extension of the group action: sum of coeff * (g applied to e).
pub fn apply_algebra(theta: &GroupAlgebraElement, e: &TowerElement) -> TowerElement {
    let tower = theta.tower();
    let mut acc = tower.zero();
    for (g, c) in theta.coeffs.iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        acc = acc.add(&apply_group_element(g, e).mul_series(c));
    }
    acc
}
