//! Ramification break bookkeeping: formula-based lower/upper breaks,
//! first-principles breaks measured through the norm oracle, the
//! piecewise-linear conversion between the two numberings, and the error
//! term bound that fences the supported class of towers.

use crate::error::{Error, Result, SpecViolation};
use crate::tower::{apply_group_element, valuation_l, Tower, TowerElement, TowerSpec};

/// Lower breaks b_(i), upper breaks u_(i), and the jumps m_i they come
/// from. b_m is the largest lower break.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakData {
    pub p: u64,
    pub n: usize,
    pub b: i64,
    /// m_i = v(omega_{i-1}) - v(omega_i), indexed 1..=n (slot 0 unused).
    pub m: Vec<i64>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub b_m: i64,
}

impl BreakData {
    /// Distinct lower break values paired with the order of the
    /// ramification group at each: the group at value v is generated by
    /// the sigma_k with b_(k) >= v, so its order is p^{n+1-k0} for the
    /// first k0 attaining v.
    pub fn distinct_lower_with_orders(&self) -> Vec<(i64, u64)> {
        let mut out: Vec<(i64, u64)> = Vec::new();
        for (k, &b) in self.lower.iter().enumerate() {
            if out.last().map(|&(v, _)| v) != Some(b) {
                out.push((b, self.p.pow((self.n + 1 - k) as u32)));
            }
        }
        out
    }

    pub fn distinct_upper(&self) -> Vec<i64> {
        let mut out: Vec<i64> = Vec::new();
        for &u in &self.upper {
            if out.last() != Some(&u) {
                out.push(u);
            }
        }
        out
    }
}

/// Break numbers from the defining data:
/// m_i = v(omega_{i-1}) - v(omega_i),
/// b_(i) = b + p^n sum_{j<=i} p^j m_j,
/// u_(i) = b + p^n sum_{j<=i} m_j,
/// with the integrality congruences b_(i) = b_(n) mod p^{i+1} asserted.
pub fn breaks_from_spec(spec: &TowerSpec) -> Result<BreakData> {
    let p = spec.p;
    let n = spec.n;
    let b = spec.b()?;
    let mut m = vec![0i64];
    for i in 1..=n {
        m.push(spec.omegas[i - 1].valuation()? - spec.omegas[i].valuation()?);
    }
    let pn = (p as i64).pow(n as u32);
    let mut lower = Vec::with_capacity(n + 1);
    let mut upper = Vec::with_capacity(n + 1);
    let mut lower_sum = 0i64;
    let mut upper_sum = 0i64;
    for i in 0..=n {
        if i >= 1 {
            lower_sum += (p as i64).pow(i as u32) * m[i];
            upper_sum += m[i];
        }
        lower.push(b + pn * lower_sum);
        upper.push(b + pn * upper_sum);
    }
    let b_m = lower[n];
    for (i, &bi) in lower.iter().enumerate() {
        let modulus = (p as i64).pow(i as u32 + 1);
        if (bi - b_m).rem_euclid(modulus) != 0 {
            return Err(Error::LemmaViolation {
                check: "break_congruence",
                i,
                j: n,
                detail: format!("b_({i}) = {bi} != b_({n}) = {b_m} mod p^{}", i + 1),
            });
        }
        if (bi - lower[0]).rem_euclid(p as i64) != 0 {
            return Err(Error::LemmaViolation {
                check: "break_congruence",
                i,
                j: 0,
                detail: format!("{bi} != {} mod p", lower[0]),
            });
        }
    }
    Ok(BreakData {
        p,
        n,
        b,
        m,
        lower,
        upper,
        b_m,
    })
}

/// Which group elements to measure when reading breaks off the tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakCoverage {
    /// One representative per cyclic layer: the generators sigma_i.
    Generators,
    /// Every nonidentity element.
    Exhaustive,
}

/// First-principles breaks: v_L((sigma - 1) pi_L) - 1 measured with the
/// norm oracle. Returns the sorted distinct values with the number of
/// measured elements attaining each.
pub fn breaks_direct(
    tower: &Tower,
    pi: &TowerElement,
    coverage: BreakCoverage,
) -> Result<Vec<(i64, usize)>> {
    let elements: Vec<usize> = match coverage {
        BreakCoverage::Generators => (0..=tower.n()).map(|i| tower.sigma(i)).collect(),
        BreakCoverage::Exhaustive => (1..tower.degree()).collect(),
    };
    let mut values = Vec::with_capacity(elements.len());
    for g in elements {
        let moved = apply_group_element(g, pi).sub(pi);
        values.push(valuation_l(&moved)? - 1);
    }
    values.sort_unstable();
    let mut out: Vec<(i64, usize)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    Ok(out)
}

/// Lower -> upper conversion on (break, group order) knots: the slope of
/// the conversion map past a break b_k is |G_{b_{k+1}}| / |G_0|. All
/// divisions are asserted exact (integral upper breaks).
pub fn herbrand_lower_to_upper(pairs: &[(i64, u64)]) -> Result<Vec<i64>> {
    validate_knots(pairs)?;
    let g0 = pairs[0].1 as i128;
    let mut out = vec![pairs[0].0];
    for k in 1..pairs.len() {
        let num = (pairs[k].0 - pairs[k - 1].0) as i128 * pairs[k].1 as i128;
        if num % g0 != 0 {
            return Err(Error::InvalidInput(format!(
                "non-integral upper break: ({} - {}) * {} not divisible by {}",
                pairs[k].0,
                pairs[k - 1].0,
                pairs[k].1,
                g0
            )));
        }
        out.push(out[k - 1] + (num / g0) as i64);
    }
    Ok(out)
}

/// Inverse conversion: upper breaks back to lower, given the same group
/// orders.
pub fn herbrand_upper_to_lower(pairs: &[(i64, u64)]) -> Result<Vec<i64>> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no break knots".into()));
    }
    let g0 = pairs[0].1 as i128;
    let mut out = vec![pairs[0].0];
    for k in 1..pairs.len() {
        let num = (pairs[k].0 - pairs[k - 1].0) as i128 * g0;
        let den = pairs[k].1 as i128;
        if num % den != 0 {
            return Err(Error::InvalidInput(
                "non-integral lower break in inverse conversion".into(),
            ));
        }
        out.push(out[k - 1] + (num / den) as i64);
    }
    Ok(out)
}

fn validate_knots(pairs: &[(i64, u64)]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no break knots".into()));
    }
    for k in 1..pairs.len() {
        if pairs[k].0 <= pairs[k - 1].0 || pairs[k].1 >= pairs[k - 1].1 {
            return Err(Error::InvalidInput(
                "break knots must have strictly increasing breaks and decreasing orders".into(),
            ));
        }
    }
    Ok(())
}

/// Per-index report for the error term bound. The bound is the rational
/// rhs_num / p^n; the check is v(eps_i) * p^n > rhs_num.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub i: usize,
    pub eps_valuation: Option<i64>,
    pub rhs_num: i64,
    pub rhs_den: i64,
    pub pass: bool,
    /// When the bound forces v(eps_i) > 0, the error term is removable;
    /// this records that the series root of x^p - x = eps_i was found.
    pub reduced_to_zero: Option<bool>,
}

/// Check v(eps_i) > -b/p^n - sum_{j<=i} p^j m_j + sum_{j>i} (p^n - p^j) m_j
/// for 1 <= i <= n, cross-checked against the equivalent form
/// -b_(n)/p^n + u_(n) - u_(i). A violation rejects the spec.
pub fn check_error_bound(spec: &TowerSpec, breaks: &BreakData) -> Result<Vec<BoundReport>> {
    let p = spec.p as i64;
    let n = spec.n;
    let pn = p.pow(n as u32);
    let b = breaks.b;
    let mut reports = Vec::new();
    for i in 1..=n {
        let mut rhs = -b;
        for j in 1..=i {
            rhs -= pn * p.pow(j as u32) * breaks.m[j];
        }
        for j in i + 1..=n {
            rhs += (pn - p.pow(j as u32)) * pn * breaks.m[j];
        }
        // equivalent form in terms of ramification numbers
        let rhs_alt = -breaks.b_m + pn * (breaks.upper[n] - breaks.upper[i]);
        debug_assert_eq!(rhs, rhs_alt, "bound forms disagree at i = {i}");

        let eps = &spec.epsilons[i];
        let (pass, v, reduced) = if eps.is_zero_to_prec() {
            (true, None, None)
        } else {
            let v = eps.valuation()?;
            let pass = v * pn > rhs;
            let reduced = if pass && rhs >= 0 {
                // v > rhs >= 0 forces the error term to be removable
                Some(
                    eps.solve_wp()
                        .map(|y| y.wp().eq_to_prec(eps))
                        .unwrap_or(false),
                )
            } else {
                None
            };
            (pass, Some(v), reduced)
        };
        if !pass {
            return Err(Error::InvalidSpec(SpecViolation::BoundViolated { i }));
        }
        if reduced == Some(false) {
            return Err(Error::PrecisionLoss(format!(
                "error term {i} should be removable but the series root failed"
            )));
        }
        reports.push(BoundReport {
            i,
            eps_valuation: v,
            rhs_num: rhs,
            rhs_den: pn,
            pass,
            reduced_to_zero: reduced,
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_field::{LaurentSeries, SeriesCtx};
    use crate::tower::build_tower;

    fn ref1_spec() -> TowerSpec {
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let one = LaurentSeries::one(&ctx);
        let t_inv = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        TowerSpec {
            p: 2,
            f: 1,
            n: 1,
            precision: 128,
            beta: t_inv.clone(),
            omegas: vec![one, t_inv],
            epsilons: vec![LaurentSeries::zero(&ctx), LaurentSeries::zero(&ctx)],
        }
    }

    #[test]
    fn ref1_breaks() {
        let breaks = breaks_from_spec(&ref1_spec()).unwrap();
        assert_eq!(breaks.m[1..], [1]);
        assert_eq!(breaks.lower, vec![1, 5]);
        assert_eq!(breaks.upper, vec![1, 3]);
        assert_eq!(breaks.b_m, 5);
        assert_eq!(breaks.distinct_lower_with_orders(), vec![(1, 4), (5, 2)]);
    }

    #[test]
    fn degenerate_breaks() {
        // n = 0: single break b
        let ctx = SeriesCtx::new(3, 1, 64).unwrap();
        let spec = TowerSpec {
            p: 3,
            f: 1,
            n: 0,
            precision: 64,
            beta: LaurentSeries::monomial(&ctx, ctx.fq.one(), -2),
            omegas: vec![LaurentSeries::one(&ctx)],
            epsilons: vec![LaurentSeries::zero(&ctx)],
        };
        let breaks = breaks_from_spec(&spec).unwrap();
        assert_eq!(breaks.lower, vec![2]);
        assert_eq!(breaks.upper, vec![2]);
        // all m_i = 0: every break equals b
        let ctx = SeriesCtx::new(2, 2, 64).unwrap();
        let w = ctx.fq.generator();
        let spec = TowerSpec {
            p: 2,
            f: 2,
            n: 1,
            precision: 64,
            beta: LaurentSeries::monomial(&ctx, ctx.fq.one(), -1),
            omegas: vec![LaurentSeries::one(&ctx), LaurentSeries::constant(&ctx, w)],
            epsilons: vec![LaurentSeries::zero(&ctx), LaurentSeries::zero(&ctx)],
        };
        let breaks = breaks_from_spec(&spec).unwrap();
        assert_eq!(breaks.lower, vec![1, 1]);
        assert_eq!(breaks.upper, vec![1, 1]);
        assert_eq!(breaks.distinct_lower_with_orders(), vec![(1, 4)]);
    }

    #[test]
    fn herbrand_examples() {
        // single break: unchanged
        assert_eq!(herbrand_lower_to_upper(&[(3, 8)]).unwrap(), vec![3]);
        // REF1: lower (1, 5) with orders (4, 2) -> upper (1, 3)
        assert_eq!(
            herbrand_lower_to_upper(&[(1, 4), (5, 2)]).unwrap(),
            vec![1, 3]
        );
        // p = 3, n = 1, b = 1, m_1 = 1: lower (1, 10), orders (9, 3)
        // -> upper (1, 4), matching the formula 1 + 3 * 1
        assert_eq!(
            herbrand_lower_to_upper(&[(1, 9), (10, 3)]).unwrap(),
            vec![1, 4]
        );
        // p = 3, n = 2, b = 1, m = (1, 0): lower (1, 28), orders (27, 9)
        // -> upper (1, 10), matching the formula 1 + 9 * 1
        assert_eq!(
            herbrand_lower_to_upper(&[(1, 27), (28, 9)]).unwrap(),
            vec![1, 10]
        );
    }

    #[test]
    fn herbrand_round_trip() {
        let lower = [(1i64, 27u64), (28, 9), (55, 3)];
        let upper = herbrand_lower_to_upper(&lower).unwrap();
        let knots: Vec<(i64, u64)> = upper
            .iter()
            .zip(lower.iter())
            .map(|(&u, &(_, o))| (u, o))
            .collect();
        let back = herbrand_upper_to_lower(&knots).unwrap();
        assert_eq!(back, lower.iter().map(|&(b, _)| b).collect::<Vec<_>>());
    }

    #[test]
    fn breaks_direct_matches_formula_on_ref1() {
        let tower = build_tower(ref1_spec()).unwrap();
        let ctx = tower.ctx();
        let t_inv = LaurentSeries::monomial(ctx, ctx.fq.one(), -1);
        let x_nn = tower.x(1).sub(&tower.x(0).mul_series(&t_inv));
        let pi = crate::tower::uniformizer(&tower, &x_nn, 5).unwrap();
        let direct = breaks_direct(&tower, &pi, BreakCoverage::Generators).unwrap();
        assert_eq!(
            direct.iter().map(|&(v, _)| v).collect::<Vec<_>>(),
            vec![1, 5]
        );
        let all = breaks_direct(&tower, &pi, BreakCoverage::Exhaustive).unwrap();
        assert_eq!(all.iter().map(|&(v, _)| v).collect::<Vec<_>>(), vec![1, 5]);
        assert_eq!(all.iter().map(|&(_, c)| c).sum::<usize>(), 3);
    }

    #[test]
    fn breaks_direct_on_cyclic_prototype() {
        // p = 2, b = 1: the single break is 1
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let spec = TowerSpec {
            p: 2,
            f: 1,
            n: 0,
            precision: 128,
            beta: LaurentSeries::monomial(&ctx, ctx.fq.one(), -1),
            omegas: vec![LaurentSeries::one(&ctx)],
            epsilons: vec![LaurentSeries::zero(&ctx)],
        };
        let tower = build_tower(spec).unwrap();
        let pi = crate::tower::uniformizer(&tower, &tower.x(0), 1).unwrap();
        let direct = breaks_direct(&tower, &pi, BreakCoverage::Exhaustive).unwrap();
        assert_eq!(direct, vec![(1, 1)]);
    }

    #[test]
    fn error_bound_ref1_cases() {
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let mk = |eps_exp: Option<i64>| {
            let one = LaurentSeries::one(&ctx);
            let t_inv = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
            let eps = match eps_exp {
                Some(k) => LaurentSeries::monomial(&ctx, ctx.fq.one(), k),
                None => LaurentSeries::zero(&ctx),
            };
            TowerSpec {
                p: 2,
                f: 1,
                n: 1,
                precision: 128,
                beta: t_inv.clone(),
                omegas: vec![one, t_inv],
                epsilons: vec![LaurentSeries::zero(&ctx), eps],
            }
        };
        // eps = 0 passes
        let spec = mk(None);
        let breaks = breaks_from_spec(&spec).unwrap();
        assert!(check_error_bound(&spec, &breaks).is_ok());
        // eps = t^-2: bound is v > -5/2, so -2 passes
        let spec = mk(Some(-2));
        let reports = check_error_bound(&spec, &breaks).unwrap();
        assert_eq!(reports[0].rhs_num, -5);
        assert_eq!(reports[0].rhs_den, 2);
        assert!(reports[0].pass);
        // eps = t^-3 violates
        let spec = mk(Some(-3));
        assert!(matches!(
            check_error_bound(&spec, &breaks),
            Err(Error::InvalidSpec(SpecViolation::BoundViolated { i: 1 }))
        ));
    }
}
