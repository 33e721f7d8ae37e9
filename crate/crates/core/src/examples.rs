//! Executable constructions of the known (near) one-dimensional
//! families: the cyclic degree-p prototype, the truncated-exponentiation
//! identity checker on it, the biquadratic reduction, unit-root
//! extensions K(y) with y^q - y = beta, weakly ramified towers, and a
//! seeded generator of random valid specs for sweep testing.

use std::sync::Arc;

use crate::base_field::{FqElement, LaurentSeries, SeriesCtx};
use crate::error::{Error, Result};
use crate::scaffold::{verify_theorem, Scaffold, TheoremReport};
use crate::tower::{
    apply_group_element, binom_tower, build_tower, random_element_of_valuation, valuation_l,
    Tower, TowerElement, TowerSpec,
};

/// Degree-p cyclic tower: n = 0, omega = (1), no error term.
pub fn cyclic_spec(ctx: &Arc<SeriesCtx>, beta: LaurentSeries, precision: i64) -> TowerSpec {
    TowerSpec {
        p: ctx.fq.p(),
        f: ctx.fq.f(),
        n: 0,
        precision,
        beta,
        omegas: vec![LaurentSeries::one(ctx)],
        epsilons: vec![LaurentSeries::zero(ctx)],
    }
}

pub struct CyclicReport {
    pub tower: Tower,
    pub scaffold: Scaffold,
    /// Oracle valuation of the generator; must be -b.
    pub v_x: i64,
    /// Oracle valuation of binom(x-1, p-1); must be -(p-1) b.
    pub v_binom_top: i64,
    pub trials: Vec<TheoremReport>,
    pub all_pass: bool,
}

/// Build the cyclic prototype and verify its scaffold: v_L(x) = -b,
/// v_L(binom(x-1, p-1)) = -(p-1)b, and for random rho of valuation
/// congruent to b mod p the measured row valuations cover all residues.
pub fn cyclic_prototype(
    ctx: &Arc<SeriesCtx>,
    beta: LaurentSeries,
    trials: usize,
    rng: &mut dyn rand::RngCore,
) -> Result<CyclicReport> {
    let p = ctx.fq.p();
    let spec = cyclic_spec(ctx, beta, ctx.rel_prec);
    let b = spec.b()?;
    let tower = build_tower(spec)?;
    let scaffold = Scaffold::build(&tower)?;

    let v_x = valuation_l(&tower.x(0))?;
    if v_x != -b {
        return Err(Error::IdentityFailed(format!(
            "v_L(x) = {v_x}, expected {}",
            -b
        )));
    }
    let top = binom_tower(&tower.x(0).sub(&tower.one()), p - 1)?;
    let v_binom_top = valuation_l(&top)?;
    if v_binom_top != -(p as i64 - 1) * b {
        return Err(Error::IdentityFailed(format!(
            "v_L(binom(x-1, p-1)) = {v_binom_top}, expected {}",
            -(p as i64 - 1) * b
        )));
    }
    debug_assert_eq!((v_binom_top - b).rem_euclid(p as i64), 0);

    let mut reports = Vec::with_capacity(trials);
    for _ in 0..trials {
        let k = (rng.next_u32() % 4) as i64 - 1;
        let rho = random_element_of_valuation(&tower, &scaffold.pi, b + k * p as i64, rng)?;
        reports.push(verify_theorem(&tower, &scaffold, &rho)?);
    }
    let all_pass = reports.iter().all(|r| r.all_pass && r.coverage_complete);
    Ok(CyclicReport {
        tower,
        scaffold,
        v_x,
        v_binom_top,
        trials: reports,
        all_pass,
    })
}

/// sigma^{[A]} e = sum_{i<p} binom(A, i) (sigma - 1)^i e, the truncated
/// exponentiation of the prototype generator by a tower-valued exponent.
fn sigma_truncated_exp(tower: &Tower, a: &TowerElement, e: &TowerElement) -> Result<TowerElement> {
    let p = tower.p();
    let sigma = tower.sigma(0);
    let mut acc = tower.zero();
    let mut diff = e.clone();
    for i in 0..p {
        acc = acc.add(&binom_tower(a, i)?.mul(&diff));
        if i + 1 < p {
            diff = apply_group_element(sigma, &diff).sub(&diff);
        }
    }
    Ok(acc)
}

/// Check sigma^{[A]} binom(x-1, p-1) = binom(x-1+A, p-1) on the cyclic
/// prototype for one exponent A.
pub fn lemma21_check(tower: &Tower, a: &TowerElement) -> Result<()> {
    if tower.n() != 0 {
        return Err(Error::InvalidInput(
            "the identity checker runs on the cyclic prototype (n = 0)".into(),
        ));
    }
    let p = tower.p();
    let xm1 = tower.x(0).sub(&tower.one());
    let top = binom_tower(&xm1, p - 1)?;
    let lhs = sigma_truncated_exp(tower, a, &top)?;
    let rhs = binom_tower(&xm1.add(a), p - 1)?;
    if lhs.eq_to_prec(&rhs) {
        Ok(())
    } else {
        Err(Error::IdentityFailed(format!(
            "sigma^[A] binom(x-1,p-1) != binom(x-1+A,p-1) for A = {}",
            a.format()
        )))
    }
}

/// One reduction step: the mu_k that was subtracted (zero for a coset
/// adjustment of beta) and the tau left afterwards.
#[derive(Clone)]
pub struct ReductionStep {
    pub mu: LaurentSeries,
    pub tau: LaurentSeries,
}

/// Trace of a biquadratic reduction: tau valuations strictly increase
/// along `steps`; the run ends with tau = 0 or v(tau) = 0.
#[derive(Clone)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    pub mu: LaurentSeries,
    pub tau: LaurentSeries,
    /// beta after coset adjustments (the emitted spec's beta).
    pub beta: LaurentSeries,
}

/// Rewrite the biquadratic data (beta, beta_1) as a near one-dimensional
/// spec: find mu with beta = mu^2 beta_1 + tau, moving beta inside its
/// coset beta + K^wp so tau ends at 0 or at a unit, then emit
/// omega_1 = mu^{-1} and eps_1 = -tau mu^{-2}.
pub fn biquadratic_reduce(
    beta: &LaurentSeries,
    beta1: &LaurentSeries,
) -> Result<(TowerSpec, ReductionTrace)> {
    let ctx = beta.ctx().clone();
    if ctx.fq.p() != 2 {
        return Err(Error::InvalidInput("biquadratic reduction needs p = 2".into()));
    }
    let v_beta = beta.valuation()?;
    let v_beta1 = beta1.valuation()?;
    if v_beta >= 0 || v_beta1 >= 0 || v_beta % 2 == 0 || v_beta1 % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "need odd negative valuations, got v(beta) = {v_beta}, v(beta_1) = {v_beta1}"
        )));
    }
    if v_beta1 > v_beta {
        return Err(Error::InvalidInput(
            "need v(beta_1) <= v(beta); swap the inputs".into(),
        ));
    }

    let fq = &ctx.fq;
    let mut beta_cur = beta.clone();
    let mut mu = LaurentSeries::zero(&ctx);
    let mut tau = beta.clone();
    let mut steps: Vec<ReductionStep> = Vec::new();
    let max_iter = (2 * ctx.rel_prec + v_beta.unsigned_abs() as i64 + 16) as usize;

    for _ in 0..max_iter {
        if tau.is_zero_to_prec() {
            break;
        }
        let v = tau.valuation()?;
        if v > 0 || (v == 0 && fq.trace(tau.leading_coeff()?) == 0) {
            // tau lies in K^wp: fold it into beta's coset and finish
            let root = tau.solve_wp()?;
            debug_assert!(root.wp().eq_to_prec(&tau));
            beta_cur = beta_cur.sub(&tau);
            tau = LaurentSeries::zero(&ctx);
            break;
        }
        if v == 0 {
            break; // genuine unit error term
        }
        if v % 2 == 0 {
            // even negative leading term: strip it with a coset move
            let d = fq.frobenius_inv_k(tau.leading_coeff()?, 1);
            let adj = LaurentSeries::monomial(&ctx, d, v / 2).wp();
            beta_cur = beta_cur.sub(&adj);
            tau = tau.sub(&adj);
            steps.push(ReductionStep {
                mu: LaurentSeries::zero(&ctx),
                tau: tau.clone(),
            });
            continue;
        }
        // odd negative: subtract a square multiple of beta_1
        let lead = fq.mul(tau.leading_coeff()?, fq.inv(beta1.leading_coeff()?)?);
        let d = fq.frobenius_inv_k(lead, 1);
        let mu_k = LaurentSeries::monomial(&ctx, d, (v - v_beta1) / 2);
        mu = mu.add(&mu_k);
        tau = tau.sub(&mu_k.mul(&mu_k).mul(beta1));
        steps.push(ReductionStep {
            mu: mu_k,
            tau: tau.clone(),
        });
    }
    if !tau.is_zero_to_prec() && tau.valuation()? < 0 {
        return Err(Error::PrecisionLoss(
            "biquadratic reduction did not terminate within the working precision".into(),
        ));
    }

    let mu_inv = mu.invert().map_err(|_| {
        Error::InvalidInput("degenerate pair: mu vanished during reduction".into())
    })?;
    let eps1 = tau.neg().mul(&mu_inv).mul(&mu_inv);
    let spec = TowerSpec {
        p: 2,
        f: ctx.fq.f(),
        n: 1,
        precision: ctx.rel_prec,
        beta: beta_cur.clone(),
        omegas: vec![LaurentSeries::one(&ctx), mu_inv],
        epsilons: vec![LaurentSeries::zero(&ctx), eps1],
    };
    spec.validate().map_err(|e| match e {
        Error::InvalidSpec(v) => Error::InvalidInput(format!(
            "pair is not fully ramified biquadratic data: {v}"
        )),
        other => other,
    })?;
    let trace = ReductionTrace {
        steps,
        mu,
        tau,
        beta: beta_cur,
    };
    Ok((spec, trace))
}

/// Spec for K(y) with y^q - y = beta, q = p^f_sub, rewritten on the
/// generators x_i = sum_r phi^r(omega_i y): omega_i runs over the power
/// basis of F_{p^f_sub} inside F_{p^f}, and Omega_i is its inverse
/// Frobenius iterate. The defining identities x_i^p - x_i = omega_i beta
/// are verified in the quotient ring K[y]/(y^q - y - beta).
pub fn unit_root_extension(
    ctx: &Arc<SeriesCtx>,
    f_sub: usize,
    beta: LaurentSeries,
) -> Result<TowerSpec> {
    let fq = &ctx.fq;
    let p = fq.p();
    let f = fq.f();
    if f_sub == 0 || f % f_sub != 0 {
        return Err(Error::InvalidInput(format!(
            "subfield degree {f_sub} must divide f = {f}"
        )));
    }
    let v_beta = beta.valuation()?;
    if v_beta >= 0 || gcd(v_beta.unsigned_abs(), p) != 1 {
        return Err(Error::InvalidInput(
            "beta needs negative valuation prime to p".into(),
        ));
    }
    let n = f_sub - 1;

    // embed F_{p^f_sub}: first root (in index order) of its defining
    // polynomial inside F_{p^f}
    let sub_ctx = crate::base_field::FqCtx::new(p, f_sub)?;
    let sub_modulus = sub_ctx.modulus_coeffs().to_vec();
    let root = fq
        .iter_elements()
        .find(|&r| {
            let mut acc = fq.pow(r, f_sub as u64);
            for (i, &c) in sub_modulus.iter().enumerate() {
                let term = fq.mul(fq.from_u64(c), fq.pow(r, i as u64));
                acc = fq.add(acc, term);
            }
            acc.is_zero()
        })
        .ok_or_else(|| Error::InvalidInput("no subfield embedding found".into()))?;
    let omegas_f: Vec<FqElement> = (0..=n).map(|i| fq.pow(root, i as u64)).collect();

    // verify x_i^p - x_i = omega_i beta in K[y]/(y^q - y - beta)
    let q_sub = p.pow(f_sub as u32);
    let model = YModel {
        ctx: ctx.clone(),
        q: q_sub as usize,
        beta: beta.clone(),
    };
    for &w in &omegas_f {
        let mut term = model.monomial(w, 1); // omega * y
        let mut x = term.clone();
        for _ in 1..f_sub {
            term = model.phi(&term);
            x = model.add(&x, &term);
        }
        let lhs = model.sub(&model.phi_p(&x), &x);
        let rhs = model.constant(beta.mul_fq(w));
        if !model.eq(&lhs, &rhs) {
            return Err(Error::IdentityFailed(format!(
                "x^p - x != omega beta in the quotient model for omega = {}",
                fq.format_element(w)
            )));
        }
    }

    let spec = TowerSpec {
        p,
        f,
        n,
        precision: ctx.rel_prec,
        beta,
        omegas: omegas_f
            .iter()
            .map(|&w| LaurentSeries::constant(ctx, fq.frobenius_inv_k(w, n as u64)))
            .collect(),
        epsilons: vec![LaurentSeries::zero(ctx); n + 1],
    };
    spec.validate()?;
    Ok(spec)
}

/// Polynomials in y of degree < q over K, reduced by y^q = y + beta.
struct YModel {
    ctx: Arc<SeriesCtx>,
    q: usize,
    beta: LaurentSeries,
}

impl YModel {
    fn zero(&self) -> Vec<LaurentSeries> {
        vec![LaurentSeries::zero(&self.ctx); self.q]
    }

    fn constant(&self, c: LaurentSeries) -> Vec<LaurentSeries> {
        let mut v = self.zero();
        v[0] = c;
        v
    }

    fn monomial(&self, c: FqElement, k: usize) -> Vec<LaurentSeries> {
        let mut v = self.zero();
        v[k] = LaurentSeries::constant(&self.ctx, c);
        v
    }

    fn add(&self, a: &[LaurentSeries], b: &[LaurentSeries]) -> Vec<LaurentSeries> {
        a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
    }

    fn sub(&self, a: &[LaurentSeries], b: &[LaurentSeries]) -> Vec<LaurentSeries> {
        a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
    }

    /// Reduce a raw coefficient vector of any length via y^q = y + beta.
    fn reduce(&self, mut raw: Vec<LaurentSeries>) -> Vec<LaurentSeries> {
        while raw.len() > self.q {
            let top = raw.pop().unwrap();
            let k = raw.len() - self.q; // y^{q+k} = y^{k+1} + beta y^k
            raw[k + 1] = raw[k + 1].add(&top);
            raw[k] = raw[k].add(&top.mul(&self.beta));
        }
        raw.resize(self.q, LaurentSeries::zero(&self.ctx));
        raw
    }

    /// Frobenius phi on the model: phi on coefficients, exponents scaled
    /// by p, then reduced.
    fn phi(&self, a: &[LaurentSeries]) -> Vec<LaurentSeries> {
        let p = self.ctx.fq.p() as usize;
        let mut raw = vec![LaurentSeries::zero(&self.ctx); (self.q - 1) * p + 1];
        for (k, c) in a.iter().enumerate() {
            raw[k * p] = c.phi(1);
        }
        self.reduce(raw)
    }

    /// x -> x^p via repeated squaring-free direct power (p is small).
    fn phi_p(&self, a: &[LaurentSeries]) -> Vec<LaurentSeries> {
        self.phi(a)
    }

    fn eq(&self, a: &[LaurentSeries], b: &[LaurentSeries]) -> bool {
        a.iter().zip(b).all(|(x, y)| x.eq_to_prec(y))
    }
}

/// Spec with b = 1 and unit omegas: Omega_i = phi^{-n}(omega_i) for
/// F_p-independent units omega_i (default: the power basis 1, w, ...,
/// w^n), plus optional error terms of nonnegative valuation.
pub fn weakly_ramified_spec(
    ctx: &Arc<SeriesCtx>,
    n: usize,
    units: Option<Vec<FqElement>>,
    epsilons: Option<Vec<LaurentSeries>>,
) -> Result<TowerSpec> {
    let fq = &ctx.fq;
    let f = fq.f();
    let units = units.unwrap_or_else(|| {
        (0..=n)
            .map(|i| fq.pow(fq.generator(), i as u64))
            .collect()
    });
    if units.len() != n + 1 {
        return Err(Error::InvalidInput(format!(
            "need {} units, got {}",
            n + 1,
            units.len()
        )));
    }
    if units[0] != fq.one() {
        return Err(Error::InvalidInput("the first unit must be 1".into()));
    }
    if f < n + 1 || fq.fp_rank(&units) != n + 1 {
        return Err(Error::InvalidInput(
            "units must be F_p-independent (need f >= n + 1)".into(),
        ));
    }
    let epsilons = match epsilons {
        Some(eps) => {
            if eps.len() != n + 1 {
                return Err(Error::InvalidInput(format!(
                    "need {} epsilons, got {}",
                    n + 1,
                    eps.len()
                )));
            }
            for (i, e) in eps.iter().enumerate() {
                if e.is_zero_to_prec() {
                    continue;
                }
                if i == 0 {
                    return Err(Error::InvalidInput("epsilon_0 must be zero".into()));
                }
                if e.valuation()? < 0 {
                    return Err(Error::InvalidInput(format!(
                        "epsilon_{i} must have nonnegative valuation"
                    )));
                }
            }
            eps
        }
        None => vec![LaurentSeries::zero(ctx); n + 1],
    };
    let spec = TowerSpec {
        p: fq.p(),
        f,
        n,
        precision: ctx.rel_prec,
        beta: LaurentSeries::monomial(ctx, fq.one(), -1),
        omegas: units
            .iter()
            .map(|&w| LaurentSeries::constant(ctx, fq.frobenius_inv_k(w, n as u64)))
            .collect(),
        epsilons,
    };
    spec.validate()?;
    Ok(spec)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Bounds for the random spec generator.
#[derive(Debug, Clone)]
pub struct RandomSpecBounds {
    pub max_b: i64,
    pub max_m: i64,
}

impl Default for RandomSpecBounds {
    fn default() -> Self {
        RandomSpecBounds { max_b: 7, max_m: 2 }
    }
}

/// A random valid near one-dimensional spec: random b prime to p, random
/// jumps m_i, omegas with independent leading residues per
/// equal-valuation run (the residue field degree f is chosen to fit the
/// longest run), and error terms that sit exactly at the bound, strictly
/// inside it, or at zero.
pub fn random_near_spec(
    p: u64,
    n: usize,
    bounds: &RandomSpecBounds,
    rng: &mut dyn rand::RngCore,
) -> Result<TowerSpec> {
    let b = loop {
        let b = 1 + (rng.next_u64() % bounds.max_b as u64) as i64;
        if gcd(b as u64, p) == 1 {
            break b;
        }
    };
    let m: Vec<i64> = std::iter::once(0)
        .chain((1..=n).map(|_| (rng.next_u64() % (bounds.max_m as u64 + 1)) as i64))
        .collect();

    // runs of equal omega valuation end where m > 0
    let mut run_len = 1usize;
    let mut max_run = 1usize;
    for i in 1..=n {
        if m[i] == 0 {
            run_len += 1;
        } else {
            run_len = 1;
        }
        max_run = max_run.max(run_len);
    }
    let f = (max_run + (rng.next_u64() % 2) as usize).clamp(max_run, 4);

    // working precision: the deepest cancellations in scaffold-row norms
    // run to roughly (2/3) b_m coefficients past the valuation, so size
    // the window from the largest break with margin; callers retry at
    // double on starvation
    let pn = (p as i64).pow(n as u32);
    let b_m = b + pn * (1..=n).map(|i| (p as i64).pow(i as u32) * m[i]).sum::<i64>();
    let precision = (3 * b_m / 4 + 48).max(112);
    let ctx = SeriesCtx::new(p, f, precision)?;
    let fq = &ctx.fq;

    let mut omegas = vec![LaurentSeries::one(&ctx)];
    let mut run_pos = 0usize;
    let mut val = 0i64;
    for i in 1..=n {
        if m[i] == 0 {
            run_pos += 1;
        } else {
            run_pos = 0;
            val -= m[i];
        }
        let lead = fq.pow(fq.generator(), run_pos as u64);
        let mut terms = vec![(val, lead)];
        for _ in 0..rng.next_u64() % 3 {
            let k = val + 1 + (rng.next_u64() % 4) as i64;
            terms.push((k, fq.random_element(rng)));
        }
        omegas.push(LaurentSeries::from_terms(&ctx, &terms));
    }

    let mut beta_terms = vec![(-b, fq.random_nonzero(rng))];
    for _ in 0..rng.next_u64() % 3 {
        let k = -b + 1 + (rng.next_u64() % 4) as i64;
        beta_terms.push((k, fq.random_element(rng)));
    }
    let beta = LaurentSeries::from_terms(&ctx, &beta_terms);

    // error bound numerators over p^n, as in the bound check
    let mut epsilons = vec![LaurentSeries::zero(&ctx)];
    for i in 1..=n {
        let mut rhs = -b;
        for j in 1..=i {
            rhs -= pn * (p as i64).pow(j as u32) * m[j];
        }
        for j in i + 1..=n {
            rhs += (pn - (p as i64).pow(j as u32)) * pn * m[j];
        }
        let v_min = rhs.div_euclid(pn) + 1;
        let eps = match rng.next_u64() % 3 {
            0 => LaurentSeries::zero(&ctx),
            1 => LaurentSeries::monomial(&ctx, fq.random_nonzero(rng), v_min),
            _ => {
                let v = v_min + 1 + (rng.next_u64() % 4) as i64;
                let mut terms = vec![(v, fq.random_nonzero(rng))];
                if rng.next_u64() % 2 == 0 {
                    terms.push((v + 1 + (rng.next_u64() % 3) as i64, fq.random_element(rng)));
                }
                LaurentSeries::from_terms(&ctx, &terms)
            }
        };
        epsilons.push(eps);
    }

    let spec = TowerSpec {
        p,
        f,
        n,
        precision,
        beta,
        omegas,
        epsilons,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_field::random_series;
    use crate::group_algebra::binom_scalar;
    use crate::ramification::{breaks_from_spec, check_error_bound};
    use rand::{RngCore as _, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prototype_residue_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        // p = 2, beta = t^-1
        let ctx = SeriesCtx::new(2, 1, 96).unwrap();
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        let report = cyclic_prototype(&ctx, beta, 3, &mut rng).unwrap();
        assert!(report.all_pass);
        assert_eq!(report.v_x, -1);
        assert_eq!(report.v_binom_top, -1);
        // p = 3, beta = t^-2: residues {2, 1, 0}
        let ctx = SeriesCtx::new(3, 1, 96).unwrap();
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -2);
        let report = cyclic_prototype(&ctx, beta, 3, &mut rng).unwrap();
        assert!(report.all_pass);
        assert_eq!(report.v_x, -2);
        assert_eq!(report.v_binom_top, -4);
    }

    #[test]
    fn truncated_exp_identity_on_prototype() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for p in [2u64, 3] {
            let ctx = SeriesCtx::new(p, 1, 96).unwrap();
            let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
            let report = cyclic_prototype(&ctx, beta, 0, &mut rng).unwrap();
            let tower = &report.tower;
            // A = 0: both sides binom(x-1, p-1)
            lemma21_check(tower, &tower.zero()).unwrap();
            // A = 1: both sides binom(x, p-1)
            lemma21_check(tower, &tower.one()).unwrap();
            // random tower-valued exponents
            for _ in 0..5 {
                let mut a = tower.zero();
                for idx in 0..tower.degree() {
                    a.coeffs[idx] =
                        random_series(&ctx, -1 + (rng.next_u64() % 3) as i64, 2, 3, &mut rng);
                }
                lemma21_check(tower, &a).unwrap();
            }
        }
    }

    #[test]
    fn vandermonde_convolution_on_prototype() {
        // sum_i binom(A, i) binom(x-1, p-1-i) = binom(x-1+A, p-1) for A in K
        let mut rng = ChaCha8Rng::seed_from_u64(105);
        let ctx = SeriesCtx::new(3, 1, 96).unwrap();
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        let report = cyclic_prototype(&ctx, beta, 0, &mut rng).unwrap();
        let tower = &report.tower;
        let p = tower.p();
        let xm1 = tower.x(0).sub(&tower.one());
        for _ in 0..5 {
            let a = random_series(&ctx, -2 + (rng.next_u64() % 4) as i64, 2, 4, &mut rng);
            let mut lhs = tower.zero();
            for i in 0..p {
                let coeff = binom_scalar(&a, i).unwrap();
                lhs = lhs.add(&binom_tower(&xm1, p - 1 - i).unwrap().mul_series(&coeff));
            }
            let rhs = binom_tower(&xm1.add(&tower.from_series(&a)), p - 1).unwrap();
            assert!(lhs.eq_to_prec(&rhs));
        }
    }

    #[test]
    fn biquadratic_recovers_reference_tower() {
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        let beta1 = LaurentSeries::monomial(&ctx, ctx.fq.one(), -3);
        let (spec, trace) = biquadratic_reduce(&beta, &beta1).unwrap();
        // mu = t, tau = 0, omega_1 = t^-1
        assert!(trace.mu.eq_to_prec(&LaurentSeries::monomial(&ctx, ctx.fq.one(), 1)));
        assert!(trace.tau.is_zero_to_prec());
        assert!(spec.omegas[1].eq_to_prec(&LaurentSeries::monomial(&ctx, ctx.fq.one(), -1)));
        assert!(spec.epsilons[1].is_zero_to_prec());
        let breaks = breaks_from_spec(&spec).unwrap();
        assert_eq!(breaks.lower, vec![1, 5]);
    }

    #[test]
    fn biquadratic_rejects_degenerate_pairs() {
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        assert!(matches!(
            biquadratic_reduce(&beta, &beta),
            Err(Error::InvalidInput(_))
        ));
        // even valuation rejected
        let beta_even = LaurentSeries::monomial(&ctx, ctx.fq.one(), -2);
        assert!(biquadratic_reduce(&beta, &beta_even).is_err());
    }

    #[test]
    fn biquadratic_with_coset_adjustment() {
        // beta = t^-1, beta_1 = t^-3 + t^-1: one mu step leaves tau = t,
        // which folds into beta's coset, ending one-dimensional
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        let beta1 = LaurentSeries::from_terms(&ctx, &[(-3, ctx.fq.one()), (-1, ctx.fq.one())]);
        let (spec, trace) = biquadratic_reduce(&beta, &beta1).unwrap();
        assert!(trace.tau.is_zero_to_prec());
        // tau valuations strictly increase along the trace
        let mut last = i64::MIN;
        for step in &trace.steps {
            if step.tau.is_zero_to_prec() {
                break;
            }
            let v = step.tau.valuation().unwrap();
            assert!(v > last);
            last = v;
        }
        let breaks = breaks_from_spec(&spec).unwrap();
        assert!(check_error_bound(&spec, &breaks).is_ok());
    }

    #[test]
    fn unit_root_f4() {
        // p = 2, q_sub = 4: Omega = (1, w^2) with phi(w^2) = w
        let ctx = SeriesCtx::new(2, 2, 128).unwrap();
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        let spec = unit_root_extension(&ctx, 2, beta).unwrap();
        let w = ctx.fq.generator();
        let w2 = ctx.fq.mul(w, w);
        assert_eq!(spec.n, 1);
        assert!(spec.omegas[1].eq_to_prec(&LaurentSeries::constant(&ctx, w2)));
        // single break at b (all m_i = 0)
        let breaks = breaks_from_spec(&spec).unwrap();
        assert_eq!(breaks.lower, vec![1, 1]);
        // f_sub = 1 degenerates to the cyclic prototype
        let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        let spec = unit_root_extension(&ctx, 1, beta).unwrap();
        assert_eq!(spec.n, 0);
    }

    #[test]
    fn weakly_ramified_specs() {
        let ctx = SeriesCtx::new(2, 2, 96).unwrap();
        let spec = weakly_ramified_spec(&ctx, 1, None, None).unwrap();
        let breaks = breaks_from_spec(&spec).unwrap();
        assert_eq!(breaks.lower, vec![1, 1]);
        // dependent units are rejected
        let dep = vec![ctx.fq.one(), ctx.fq.one()];
        assert!(matches!(
            weakly_ramified_spec(&ctx, 1, Some(dep), None),
            Err(Error::InvalidInput(_))
        ));
        // error terms of nonnegative valuation are allowed
        let eps = vec![
            LaurentSeries::zero(&ctx),
            LaurentSeries::one(&ctx).add(&LaurentSeries::monomial(&ctx, ctx.fq.one(), 2)),
        ];
        let spec = weakly_ramified_spec(&ctx, 1, None, Some(eps)).unwrap();
        assert!(check_error_bound(&spec, &breaks_from_spec(&spec).unwrap()).is_ok());
    }

    #[test]
    fn random_specs_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let bounds = RandomSpecBounds::default();
        for (p, n) in [(2u64, 1usize), (2, 2), (3, 1), (3, 2)] {
            for _ in 0..10 {
                let spec = random_near_spec(p, n, &bounds, &mut rng).unwrap();
                let breaks = breaks_from_spec(&spec).unwrap();
                check_error_bound(&spec, &breaks).unwrap();
            }
        }
    }
}
