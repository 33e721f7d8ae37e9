//! The scaffolding pipeline: the omega triangle row reduction, the
//! matrices [Omega^phi] and [Delta], the X/B/E recursions with their
//! per-step valuation assertions, the Theta_(i) basis of K[G], the
//! normalizers alpha_j, and verification of every claimed valuation
//! against the norm oracle.

use rayon::prelude::*;

use crate::base_field::{LaurentSeries, SeriesCtx};
use crate::error::{Error, Result};
use crate::group_algebra::{apply_algebra, truncated_exp, GroupAlgebraElement};
use crate::ramification::{breaks_from_spec, check_error_bound, BoundReport, BreakData};
use crate::tower::{
    apply_group_element, binom_tower, uniformizer, valuation_l, Tower, TowerElement,
};
use std::sync::Arc;

/// The row-reduced triangle: entry (i, j) holds Omega_j^{(i)} for
/// i <= j <= n, with Omega_j^{(i)} = wp(Omega_j^{(i-1)}) / wp(Omega_i^{(i-1)})
/// and an exact 1 on the diagonal.
pub struct OmegaTriangle {
    pub n: usize,
    rows: Vec<Vec<LaurentSeries>>,
}

impl OmegaTriangle {
    /// Omega_j^{(i)}, valid for i <= j.
    pub fn entry(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.rows[i][j - i]
    }
}

/// Row-reduce the omegas. Every entry's valuation is checked against the
/// closed form -p^i sum_{k=i+1..j} m_k.
pub fn omega_reduce(omegas: &[LaurentSeries]) -> Result<OmegaTriangle> {
    let n = omegas.len() - 1;
    let ctx = omegas[0].ctx().clone();
    let p = ctx.fq.p() as i64;
    let mut m = vec![0i64];
    for i in 1..=n {
        m.push(omegas[i - 1].valuation()? - omegas[i].valuation()?);
    }
    let mut rows: Vec<Vec<LaurentSeries>> = vec![omegas.to_vec()];
    for i in 1..=n {
        let prev = &rows[i - 1];
        // prev[1] is Omega_i^{(i-1)} in row i-1's offset layout
        let den = prev[1].wp();
        let den_inv = den.invert().map_err(|_| Error::LemmaViolation {
            check: "triangle_valuation",
            i,
            j: i,
            detail: "wp(Omega_i^{(i-1)}) is zero to working precision".into(),
        })?;
        let mut row = vec![LaurentSeries::one(&ctx)];
        for j in i + 1..=n {
            row.push(prev[j - (i - 1)].wp().mul(&den_inv));
        }
        rows.push(row);
    }
    let triangle = OmegaTriangle { n, rows };
    for i in 0..=n {
        for j in i..=n {
            let expect: i64 = -(p.pow(i as u32)) * m[i + 1..=j].iter().sum::<i64>();
            let got = triangle
                .entry(i, j)
                .valuation()
                .map_err(|_| Error::LemmaViolation {
                    check: "triangle_valuation",
                    i,
                    j,
                    detail: "entry zero to working precision".into(),
                })?;
            if got != expect {
                return Err(Error::LemmaViolation {
                    check: "triangle_valuation",
                    i,
                    j,
                    detail: format!("v = {got}, closed form {expect}"),
                });
            }
        }
    }
    Ok(triangle)
}

/// Square matrix over K.
#[derive(Clone)]
pub struct Matrix {
    pub n: usize,
    entries: Vec<Vec<LaurentSeries>>,
}

impl Matrix {
    pub fn identity(ctx: &Arc<SeriesCtx>, n: usize) -> Matrix {
        let entries = (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| {
                        if i == j {
                            LaurentSeries::one(ctx)
                        } else {
                            LaurentSeries::zero(ctx)
                        }
                    })
                    .collect()
            })
            .collect();
        Matrix { n, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.entries[i][j]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let ctx = self.entries[0][0].ctx().clone();
        let entries = (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| {
                        let mut acc = LaurentSeries::zero(&ctx);
                        for k in 0..=n {
                            acc = acc.add(&self.entries[i][k].mul(&other.entries[k][j]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Matrix { n, entries }
    }

    pub fn eq_to_prec(&self, other: &Matrix) -> bool {
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(ra, rb)| ra.iter().zip(rb).all(|(a, b)| a.eq_to_prec(b)))
    }
}

/// [Omega^phi]: row i < n carries phi^{n-i-1} of the triangle row; row n
/// is the unit row (the formal inverse power there touches only 0 and 1).
pub fn omega_phi_matrix(triangle: &OmegaTriangle) -> Matrix {
    let n = triangle.n;
    let ctx = triangle.entry(0, 0).ctx().clone();
    let entries = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| {
                    if j < i {
                        LaurentSeries::zero(&ctx)
                    } else if i == n {
                        LaurentSeries::one(&ctx)
                    } else {
                        triangle.entry(i, j).phi((n - i - 1) as u32)
                    }
                })
                .collect()
        })
        .collect();
    Matrix { n, entries }
}

/// Exact inverse of a unipotent upper-triangular matrix by
/// back-substitution.
pub fn invert_unipotent(m: &Matrix) -> Result<Matrix> {
    let n = m.n;
    let ctx = m.entry(0, 0).ctx().clone();
    let one = LaurentSeries::one(&ctx);
    for i in 0..=n {
        if !m.entry(i, i).eq_to_prec(&one) {
            return Err(Error::InvalidInput(format!(
                "matrix is not unipotent at diagonal {i}"
            )));
        }
        for j in 0..i {
            if !m.entry(i, j).is_zero_to_prec() {
                return Err(Error::InvalidInput(format!(
                    "matrix is not upper-triangular at ({i}, {j})"
                )));
            }
        }
    }
    let mut inv = Matrix::identity(&ctx, n);
    for i in (0..=n).rev() {
        for j in i + 1..=n {
            let mut acc = LaurentSeries::zero(&ctx);
            for k in i + 1..=j {
                acc = acc.add(&m.entry(i, k).mul(inv.entry(k, j)));
            }
            inv.entries[i][j] = acc.neg();
        }
    }
    Ok(inv)
}

/// Output of the generator recursion.
pub struct XRecursion {
    /// X_j^{(j)} for j = 0..=n.
    pub x_diag: Vec<TowerElement>,
    /// B_i for i = 0..=n (B_0 = beta).
    pub b_list: Vec<TowerElement>,
    /// E_j^{(i)}; zero when j <= i.
    pub e_table: Vec<Vec<LaurentSeries>>,
}

/// Run X_j^{(i)} = X_j^{(i-1)} - phi^{n-i}(Omega_j^{(i-1)}) X_{i-1}^{(i-1)}
/// together with the B/E recursion, asserting at every step:
/// the wp identity wp(X_j^{(i)}) = phi^{n-i}(Omega_j^{(i)}) B_i + E_j^{(i)},
/// the error bound v(E_i^{(i-1)}) > -b_(i)/p^i, and finally the oracle
/// valuations v_L(X_j^{(j)}) = -p^{n-j} b_(j) and
/// v_L(B_i) = -p^{n+1-i} b_(i).
pub fn x_recursion(
    tower: &Tower,
    triangle: &OmegaTriangle,
    breaks: &BreakData,
) -> Result<XRecursion> {
    let n = tower.n();
    let p = tower.p() as i64;
    let ctx = tower.ctx().clone();
    let spec = tower.spec();

    let mut x_cur: Vec<TowerElement> = (0..=n).map(|j| tower.x(j)).collect();
    let mut e_cur: Vec<LaurentSeries> = spec.epsilons.clone();
    let mut x_diag = vec![x_cur[0].clone()];
    let mut b_list = vec![tower.from_series(&spec.beta)];
    let mut e_table = vec![e_cur.clone()];

    let check_wp =
        |i: usize, j: usize, x: &TowerElement, b: &TowerElement, e: &LaurentSeries| -> Result<()> {
            let lhs = x.wp();
            let rhs = b
                .mul_series(&triangle.entry(i, j).phi((n - i) as u32))
                .add(&tower.from_series(e));
            if lhs.eq_to_prec(&rhs) {
                Ok(())
            } else {
                Err(Error::LemmaViolation {
                    check: "wp_identity",
                    i,
                    j,
                    detail: "wp(X_j^{(i)}) != phi^{n-i}(Omega_j^{(i)}) B_i + E_j^{(i)}".into(),
                })
            }
        };

    for j in 0..=n {
        check_wp(0, j, &x_cur[j], &b_list[0], &e_cur[j])?;
    }

    for i in 1..=n {
        // error bound for E_i^{(i-1)} before it is consumed
        if !e_cur[i].is_zero_to_prec() {
            let v = e_cur[i].valuation()?;
            if v * p.pow(i as u32) <= -breaks.lower[i] {
                return Err(Error::LemmaViolation {
                    check: "error_term_bound",
                    i,
                    j: i,
                    detail: format!("v(E_{i}^{{({})}}) = {v} <= -b_({i})/p^{i}", i - 1),
                });
            }
        }
        // B_i = -phi^{n-i}(wp(Omega_i^{(i-1)})) X_{i-1}^{(i-1)} + E_i^{(i-1)}
        let w_pow = triangle.entry(i - 1, i).wp().phi((n - i) as u32);
        let b_i = x_diag[i - 1]
            .mul_series(&w_pow)
            .neg()
            .add(&tower.from_series(&e_cur[i]));

        let mut x_next = x_cur.clone();
        let mut e_next = e_cur.clone();
        for j in i..=n {
            x_next[j] = x_cur[j]
                .sub(&x_diag[i - 1].mul_series(&triangle.entry(i - 1, j).phi((n - i) as u32)));
            e_next[j] = if j == i {
                LaurentSeries::zero(&ctx)
            } else {
                e_cur[j].sub(&triangle.entry(i, j).phi((n - i) as u32).mul(&e_cur[i]))
            };
        }
        for j in i..=n {
            check_wp(i, j, &x_next[j], &b_i, &e_next[j])?;
        }
        // oracle check on B_i (it lies in K_{i-1}, index p^{n+1-i} in L)
        let vb = valuation_l(&b_i)?;
        let expect = -p.pow((n + 1 - i) as u32) * breaks.lower[i];
        if vb != expect {
            return Err(Error::LemmaViolation {
                check: "x_valuation",
                i,
                j: i,
                detail: format!("v_L(B_{i}) = {vb}, expected {expect}"),
            });
        }
        x_diag.push(x_next[i].clone());
        b_list.push(b_i);
        e_table.push(e_next.clone());
        x_cur = x_next;
        e_cur = e_next;
    }

    for (j, x) in x_diag.iter().enumerate() {
        let v = valuation_l(x)?;
        let expect = -p.pow((n - j) as u32) * breaks.lower[j];
        if v != expect {
            return Err(Error::LemmaViolation {
                check: "x_valuation",
                i: j,
                j,
                detail: format!("v_L(X_{j}^{{({j})}}) = {v}, expected {expect}"),
            });
        }
    }

    Ok(XRecursion {
        x_diag,
        b_list,
        e_table,
    })
}

/// Verify (sigma_i - 1) X_j^{(j)} is the base-field constant Delta_{i,j}
/// (zero for i > j) and return the measured matrix.
pub fn check_assumption1(
    tower: &Tower,
    x_diag: &[TowerElement],
    delta: &Matrix,
) -> Result<Matrix> {
    let n = tower.n();
    let mut entries = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = Vec::with_capacity(n + 1);
        for (j, x) in x_diag.iter().enumerate() {
            let moved = apply_group_element(tower.sigma(i), x).sub(x);
            if !moved.is_constant_monomial() {
                return Err(Error::AssumptionFailed {
                    i,
                    j,
                    detail: format!("not in K: {}", moved.format()),
                });
            }
            let c = moved.coeff(0).clone();
            let ok = if i <= j {
                c.eq_to_prec(delta.entry(i, j))
            } else {
                c.is_zero_to_prec()
            };
            if !ok {
                return Err(Error::AssumptionFailed {
                    i,
                    j,
                    detail: format!(
                        "measured {} but inverse matrix entry is {}",
                        c.format(),
                        delta.entry(i.min(j), j).format()
                    ),
                });
            }
            row.push(c);
        }
        entries.push(row);
    }
    Ok(Matrix { n, entries })
}

/// Theta_(0) = sigma_n;
/// Theta_(i) = sigma_{n-i} prod_{k<i} Theta_(k)^{[-Delta_{n-i,n-k}]}.
/// Each result is checked to be a 1-unit with (Theta - 1)^p = 0.
pub fn build_thetas(tower: &Tower, delta: &Matrix) -> Result<Vec<GroupAlgebraElement>> {
    let n = tower.n();
    let p = tower.p();
    let mut thetas: Vec<GroupAlgebraElement> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut acc = GroupAlgebraElement::sigma(tower, n - i);
        for (k, theta_k) in thetas.iter().enumerate().take(i) {
            acc = acc.mul(&truncated_exp(theta_k, &delta.entry(n - i, n - k).neg())?);
        }
        if !acc.is_one_unit() {
            return Err(Error::NotOneUnit);
        }
        let nil = acc.sub(&GroupAlgebraElement::one(tower)).pow(p);
        if !nil.is_zero_to_prec() {
            return Err(Error::IdentityFailed(format!(
                "(Theta_({i}) - 1)^p is not zero"
            )));
        }
        thetas.push(acc);
    }
    Ok(thetas)
}

/// alpha_j = t^{p^{n-j-1} sum_{i>j} p^i m_i}, cross-checked against the
/// equivalent exponent (b_(n) - b_(j)) / p^{j+1}.
pub fn scaffold_alphas(ctx: &Arc<SeriesCtx>, breaks: &BreakData) -> Vec<LaurentSeries> {
    let n = breaks.n;
    let p = breaks.p as i64;
    (0..=n)
        .map(|j| {
            let v = if j == n {
                0
            } else {
                p.pow((n - j - 1) as u32)
                    * (j + 1..=n)
                        .map(|i| p.pow(i as u32) * breaks.m[i])
                        .sum::<i64>()
            };
            let alt_num = breaks.b_m - breaks.lower[j];
            let alt_den = p.pow(j as u32 + 1);
            debug_assert_eq!(alt_num % alt_den, 0);
            debug_assert_eq!(v, alt_num / alt_den, "alpha exponent forms disagree");
            LaurentSeries::monomial(ctx, ctx.fq.one(), v)
        })
        .collect()
}

/// The Theorem's right-hand side v(rho) + sum a_s p^s b_m; rejects a rho
/// valuation outside the residue class b_m mod p^{n+1}.
pub fn predicted_valuation(a: &[u8], v_rho: i64, breaks: &BreakData) -> Result<i64> {
    let p = breaks.p as i64;
    let deg = p.pow(breaks.n as u32 + 1);
    if (v_rho - breaks.b_m).rem_euclid(deg) != 0 {
        return Err(Error::InvalidInput(format!(
            "v(rho) = {v_rho} is not congruent to b_m = {} mod {deg}",
            breaks.b_m
        )));
    }
    Ok(v_rho
        + a.iter()
            .enumerate()
            .map(|(s, &a_s)| a_s as i64 * p.pow(s as u32) * breaks.b_m)
            .sum::<i64>())
}

/// The complete scaffold for one tower.
pub struct Scaffold {
    pub breaks: BreakData,
    pub bound_reports: Vec<BoundReport>,
    pub triangle: OmegaTriangle,
    pub omega_phi: Matrix,
    pub delta: Matrix,
    pub x: XRecursion,
    /// Measured (sigma_i - 1) X_j^{(j)} constants (equals `delta` above
    /// the diagonal).
    pub assumption: Matrix,
    pub thetas: Vec<GroupAlgebraElement>,
    pub alphas: Vec<LaurentSeries>,
    /// The scaling constant making the canonical element land at b_m.
    pub script_a: LaurentSeries,
    /// A canonical element of valuation exactly b_m.
    pub canonical_rho: TowerElement,
    /// A uniformizer t^a (X_n^{(n)})^c of valuation 1.
    pub pi: TowerElement,
}

impl Scaffold {
    pub fn build(tower: &Tower) -> Result<Scaffold> {
        let spec = tower.spec();
        let breaks = breaks_from_spec(spec)?;
        let bound_reports = check_error_bound(spec, &breaks)?;
        let triangle = omega_reduce(&spec.omegas)?;
        let omega_phi = omega_phi_matrix(&triangle);
        let delta = invert_unipotent(&omega_phi)?;
        let ident = Matrix::identity(tower.ctx(), tower.n());
        if !omega_phi.mul(&delta).eq_to_prec(&ident) {
            return Err(Error::IdentityFailed("[Omega^phi] [Delta] != I".into()));
        }
        let x = x_recursion(tower, &triangle, &breaks)?;
        let assumption = check_assumption1(tower, &x.x_diag, &delta)?;
        let thetas = build_thetas(tower, &delta)?;
        let alphas = scaffold_alphas(tower.ctx(), &breaks);
        let (script_a, canonical_rho) = canonical_rho(tower, &x.x_diag, &alphas, &breaks)?;
        let pi = uniformizer(tower, &x.x_diag[tower.n()], breaks.b_m)?;
        Ok(Scaffold {
            breaks,
            bound_reports,
            triangle,
            omega_phi,
            delta,
            x,
            assumption,
            thetas,
            alphas,
            script_a,
            canonical_rho,
            pi,
        })
    }

    /// The operator prod_s alpha_{n-s}^{a_s} (Theta_(s) - 1)^{a_s}.
    pub fn theorem_operator(&self, tower: &Tower, a: &[u8]) -> GroupAlgebraElement {
        let n = tower.n();
        let one = GroupAlgebraElement::one(tower);
        let mut acc = one.clone();
        for (s, &a_s) in a.iter().enumerate() {
            if a_s == 0 {
                continue;
            }
            let nil = self.thetas[s].sub(&one).pow(a_s as u64);
            let alpha_pow = self.alphas[n - s].pow(a_s as i64).expect("monomial power");
            acc = acc.mul(&nil).mul_series(&alpha_pow);
        }
        acc
    }
}

/// The canonical element script_a * prod_j binom(X_j^{(j)}, p-1), built
/// so its valuation is exactly b_m.
pub fn canonical_rho(
    tower: &Tower,
    x_diag: &[TowerElement],
    alphas: &[LaurentSeries],
    breaks: &BreakData,
) -> Result<(LaurentSeries, TowerElement)> {
    let ctx = tower.ctx();
    let p = tower.p();
    let mut prod = tower.one();
    for x in x_diag {
        prod = prod.mul(&binom_tower(x, p - 1)?);
    }
    // script_a = t^{b_(n)} prod_j alpha_j^{-(p-1)}: all exact monomials
    let mut exponent = breaks.b_m;
    for alpha in alphas {
        exponent -= (p as i64 - 1) * alpha.valuation()?;
    }
    let script_a = LaurentSeries::monomial(ctx, ctx.fq.one(), exponent);
    Ok((script_a.clone(), prod.mul_series(&script_a)))
}

#[derive(Debug, Clone)]
pub struct TheoremRow {
    pub a: Vec<u8>,
    pub predicted: i64,
    pub measured: i64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub v_rho: i64,
    pub rows: Vec<TheoremRow>,
    /// The measured valuations cover all residues mod p^{n+1}.
    pub coverage_complete: bool,
    pub all_pass: bool,
}

impl TheoremReport {
    pub fn ensure_pass(&self) -> Result<()> {
        for row in &self.rows {
            if !row.pass {
                return Err(Error::Mismatch {
                    a: row.a.clone(),
                    expected: row.predicted,
                    got: row.measured,
                });
            }
        }
        if !self.coverage_complete {
            return Err(Error::IdentityFailed(
                "valuations do not cover all residue classes".into(),
            ));
        }
        Ok(())
    }
}

/// For every exponent vector a, apply the scaffold operator to rho,
/// measure the valuation with the norm oracle, and compare with the
/// predicted value. Rows are independent and evaluated in parallel.
pub fn verify_theorem(
    tower: &Tower,
    scaffold: &Scaffold,
    rho: &TowerElement,
) -> Result<TheoremReport> {
    let v_rho = valuation_l(rho)?;
    let deg = tower.degree();
    let rows: Result<Vec<TheoremRow>> = (0..deg)
        .into_par_iter()
        .map(|packed| {
            let a = tower.group_digits(packed);
            let predicted = predicted_valuation(&a, v_rho, &scaffold.breaks)?;
            let op = scaffold.theorem_operator(tower, &a);
            let measured = valuation_l(&apply_algebra(&op, rho))?;
            Ok(TheoremRow {
                a,
                predicted,
                measured,
                pass: predicted == measured,
            })
        })
        .collect();
    let rows = rows?;
    let mut seen = vec![false; deg];
    for row in &rows {
        seen[row.measured.rem_euclid(deg as i64) as usize] = true;
    }
    let coverage_complete = seen.iter().all(|&s| s);
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(TheoremReport {
        v_rho,
        rows,
        coverage_complete,
        all_pass,
    })
}

/// Decide whether the conjugates of rho form a K-basis of L, by Gaussian
/// elimination with valuation-aware pivoting on the coefficient matrix.
/// Exact zeros certify dependence; a window-zero (inexact) pivot column
/// is a precision failure.
pub fn normal_basis_check(tower: &Tower, rho: &TowerElement) -> Result<bool> {
    let deg = tower.degree();
    let mut m: Vec<Vec<LaurentSeries>> = (0..deg)
        .map(|g| apply_group_element(g, rho).coeffs)
        .collect();
    let mut row = 0;
    for col in 0..deg {
        let mut best: Option<(usize, i64)> = None;
        let mut inexact_zero = false;
        for (r, mr) in m.iter().enumerate().skip(row) {
            match mr[col].valuation() {
                Ok(v) => {
                    if best.is_none_or(|(_, bv)| v < bv) {
                        best = Some((r, v));
                    }
                }
                Err(_) => {
                    if !mr[col].is_exact_zero() {
                        inexact_zero = true;
                    }
                }
            }
        }
        let Some((pivot_row, _)) = best else {
            if inexact_zero {
                return Err(Error::PrecisionLoss(format!(
                    "pivot column {col} cannot be certified zero or nonzero"
                )));
            }
            // a fully exact-zero column in a square system: rank deficient
            return Ok(false);
        };
        m.swap(row, pivot_row);
        let pivot_inv = m[row][col].invert()?;
        let pivot_row_vals: Vec<LaurentSeries> = m[row][col..].to_vec();
        for r in row + 1..deg {
            if m[r][col].is_exact_zero() {
                continue;
            }
            let factor = m[r][col].mul(&pivot_inv);
            for (offset, pv) in pivot_row_vals.iter().enumerate() {
                m[r][col + offset] = m[r][col + offset].sub(&factor.mul(pv));
            }
        }
        row += 1;
        if row == deg {
            return Ok(true);
        }
    }
    Ok(row == deg)
}

/// Options for a full verification run.
#[derive(Debug, Clone)]
pub struct VerificationOptions {
    /// Number of random rho trials (the canonical element runs first and
    /// is not counted here).
    pub trials: usize,
    /// Measure every nonidentity group element when reading breaks off
    /// the tower, instead of one representative per layer.
    pub exhaustive_breaks: bool,
}

impl Default for VerificationOptions {
    fn default() -> Self {
        VerificationOptions {
            trials: 10,
            exhaustive_breaks: false,
        }
    }
}

/// Everything the pipeline can check about one tower, bundled for
/// reporting.
pub struct VerificationReport {
    pub scaffold: Scaffold,
    pub direct_breaks: Vec<(i64, usize)>,
    pub breaks_match: bool,
    pub herbrand_upper: Vec<i64>,
    pub herbrand_match: bool,
    pub herbrand_round_trip: bool,
    pub canonical_valuation: i64,
    /// Index 0 is the canonical element; the rest are random trials.
    pub theorem_reports: Vec<TheoremReport>,
    pub normal_basis_canonical: bool,
    pub all_pass: bool,
}

/// Build the scaffold and check every claim against the oracle: break
/// numbers (formula vs first principles vs the piecewise-linear
/// conversion), the canonical element's valuation, the scaffold rows for
/// the canonical element and `trials` random elements of admissible
/// valuation, and the normal-basis property at valuation b_m.
pub fn full_verification(
    tower: &Tower,
    opts: &VerificationOptions,
    rng: &mut dyn rand::RngCore,
) -> Result<VerificationReport> {
    use crate::ramification::{
        breaks_direct, herbrand_lower_to_upper, herbrand_upper_to_lower, BreakCoverage,
    };
    use crate::tower::random_unit;

    let scaffold = Scaffold::build(tower)?;
    let ctx = tower.ctx();

    let coverage = if opts.exhaustive_breaks {
        BreakCoverage::Exhaustive
    } else {
        BreakCoverage::Generators
    };
    let direct_breaks = breaks_direct(tower, &scaffold.pi, coverage)?;
    let formula_set: Vec<i64> = scaffold
        .breaks
        .distinct_lower_with_orders()
        .iter()
        .map(|&(v, _)| v)
        .collect();
    let direct_set: Vec<i64> = direct_breaks.iter().map(|&(v, _)| v).collect();
    let breaks_match = formula_set == direct_set;

    let knots = scaffold.breaks.distinct_lower_with_orders();
    let herbrand_upper = herbrand_lower_to_upper(&knots)?;
    let herbrand_match = herbrand_upper == scaffold.breaks.distinct_upper();
    let upper_knots: Vec<(i64, u64)> = herbrand_upper
        .iter()
        .zip(knots.iter())
        .map(|(&u, &(_, o))| (u, o))
        .collect();
    let herbrand_round_trip = herbrand_upper_to_lower(&upper_knots)?
        == knots.iter().map(|&(b, _)| b).collect::<Vec<_>>();

    let canonical_valuation = valuation_l(&scaffold.canonical_rho)?;
    let mut theorem_reports = vec![verify_theorem(tower, &scaffold, &scaffold.canonical_rho)?];
    for _ in 0..opts.trials {
        // canonical * t^k * unit has valuation b_m + k p^{n+1}
        let k = (rng.next_u32() % 4) as i64 - 1;
        let shift = LaurentSeries::monomial(ctx, ctx.fq.one(), k);
        let rho = scaffold
            .canonical_rho
            .mul_series(&shift)
            .mul(&random_unit(tower, rng));
        theorem_reports.push(verify_theorem(tower, &scaffold, &rho)?);
    }
    let normal_basis_canonical = normal_basis_check(tower, &scaffold.canonical_rho)?;

    let all_pass = breaks_match
        && herbrand_match
        && herbrand_round_trip
        && canonical_valuation == scaffold.breaks.b_m
        && theorem_reports
            .iter()
            .all(|r| r.all_pass && r.coverage_complete)
        && normal_basis_canonical;

    Ok(VerificationReport {
        scaffold,
        direct_breaks,
        breaks_match,
        herbrand_upper,
        herbrand_match,
        herbrand_round_trip,
        canonical_valuation,
        theorem_reports,
        normal_basis_canonical,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_field::random_series;
    use crate::tower::{build_tower, random_element_of_valuation, TowerSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ref1() -> Tower {
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let one = LaurentSeries::one(&ctx);
        let t_inv = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        build_tower(TowerSpec {
            p: 2,
            f: 1,
            n: 1,
            precision: 128,
            beta: t_inv.clone(),
            omegas: vec![one, t_inv],
            epsilons: vec![LaurentSeries::zero(&ctx), LaurentSeries::zero(&ctx)],
        })
        .unwrap()
    }

    #[test]
    fn triangle_examples() {
        // n = 1, omegas (1, t^-1): diagonal row is exactly 1
        let ctx = SeriesCtx::new(2, 1, 64).unwrap();
        let one = LaurentSeries::one(&ctx);
        let t_inv = LaurentSeries::monomial(&ctx, ctx.fq.one(), -1);
        let tri = omega_reduce(&[one.clone(), t_inv.clone()]).unwrap();
        assert!(tri.entry(1, 1).eq_to_prec(&one));
        assert!(tri.entry(0, 1).eq_to_prec(&t_inv));

        // n = 2, p = 2, omegas (1, t^-1, t^-2):
        // Omega_2^{(1)} = wp(t^-2)/wp(t^-1) = t^-2 + t^-1, valuation -2
        let t_inv2 = LaurentSeries::monomial(&ctx, ctx.fq.one(), -2);
        let tri = omega_reduce(&[one.clone(), t_inv.clone(), t_inv2]).unwrap();
        let expect = LaurentSeries::from_terms(&ctx, &[(-2, ctx.fq.one()), (-1, ctx.fq.one())]);
        assert!(tri.entry(1, 2).eq_to_prec(&expect));
        assert_eq!(tri.entry(1, 2).valuation().unwrap(), -2);
    }

    #[test]
    fn unipotent_inverse_3x3() {
        // [[1,a,b],[0,1,c],[0,0,1]]^{-1} = [[1,-a,ac-b],[0,1,-c],[0,0,1]]
        let ctx = SeriesCtx::new(3, 1, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_series(&ctx, -2, 3, 4, &mut rng);
        let b = random_series(&ctx, -1, 3, 4, &mut rng);
        let c = random_series(&ctx, 0, 3, 4, &mut rng);
        let one = LaurentSeries::one(&ctx);
        let zero = LaurentSeries::zero(&ctx);
        let m = Matrix {
            n: 2,
            entries: vec![
                vec![one.clone(), a.clone(), b.clone()],
                vec![zero.clone(), one.clone(), c.clone()],
                vec![zero.clone(), zero.clone(), one.clone()],
            ],
        };
        let inv = invert_unipotent(&m).unwrap();
        assert!(inv.entry(0, 1).eq_to_prec(&a.neg()));
        assert!(inv.entry(0, 2).eq_to_prec(&a.mul(&c).sub(&b)));
        assert!(inv.entry(1, 2).eq_to_prec(&c.neg()));
        assert!(m.mul(&inv).eq_to_prec(&Matrix::identity(&ctx, 2)));
        // identity inverts to identity
        let id = Matrix::identity(&ctx, 2);
        assert!(invert_unipotent(&id).unwrap().eq_to_prec(&id));
    }

    #[test]
    fn ref1_matrices_and_thetas() {
        let tower = ref1();
        let ctx = tower.ctx();
        let sc = Scaffold::build(&tower).unwrap();
        let t_inv = LaurentSeries::monomial(ctx, ctx.fq.one(), -1);
        // [Omega^phi] = [[1, t^-1], [0, 1]] and Delta_{0,1} = t^-1 (char 2)
        assert!(sc.omega_phi.entry(0, 1).eq_to_prec(&t_inv));
        assert!(sc.delta.entry(0, 1).eq_to_prec(&t_inv));
        // alphas = (t^2, 1)
        assert_eq!(sc.alphas[0].valuation().unwrap(), 2);
        assert_eq!(sc.alphas[1].valuation().unwrap(), 0);
        // X_1^{(1)} = x_1 - t^-1 x_0 with v_L = -5
        let expect = tower.x(1).sub(&tower.x(0).mul_series(&t_inv));
        assert!(sc.x.x_diag[1].eq_to_prec(&expect));
        assert_eq!(valuation_l(&sc.x.x_diag[1]).unwrap(), -5);
        // Theta_(0) = sigma_1, Theta_(1) = sigma_0 (1 + t^-1 (sigma_1 - 1))
        assert!(sc.thetas[0].eq_to_prec(&GroupAlgebraElement::sigma(&tower, 1)));
        let s0 = GroupAlgebraElement::sigma(&tower, 0);
        let s1 = GroupAlgebraElement::sigma(&tower, 1);
        let one = GroupAlgebraElement::one(&tower);
        let expect_theta1 = s0.mul(&one.add(&s1.sub(&one).mul_series(&t_inv)));
        assert!(sc.thetas[1].eq_to_prec(&expect_theta1));
        // assumption matrix: (sigma_0 - 1) X_1^{(1)} = t^-1 = Delta_{0,1}
        assert!(sc.assumption.entry(0, 1).eq_to_prec(&t_inv));
        assert!(sc
            .assumption
            .entry(1, 1)
            .eq_to_prec(&LaurentSeries::one(ctx)));
        // canonical rho has valuation b_m = 5, pi has valuation 1
        assert_eq!(valuation_l(&sc.canonical_rho).unwrap(), 5);
        assert_eq!(valuation_l(&sc.pi).unwrap(), 1);
        // no error terms: the E table is identically zero
        assert!(sc
            .x
            .e_table
            .iter()
            .all(|row| row.iter().all(|e| e.is_zero_to_prec())));
        // X_0^{(0)} = x_0 and B_0 = beta
        assert!(sc.x.x_diag[0].eq_to_prec(&tower.x(0)));
        assert!(sc.x.b_list[0].eq_to_prec(&tower.from_series(&tower.spec().beta)));
    }

    #[test]
    fn thetas_degenerate_without_off_diagonal_entries() {
        // all Delta_{i,j} = 0 off the diagonal: Theta_(i) = sigma_{n-i}
        let tower = ref1();
        let id = Matrix::identity(tower.ctx(), tower.n());
        let thetas = build_thetas(&tower, &id).unwrap();
        for (i, theta) in thetas.iter().enumerate() {
            assert!(theta.eq_to_prec(&GroupAlgebraElement::sigma(&tower, tower.n() - i)));
        }
    }

    #[test]
    fn verify_theorem_rejects_wrong_residue_class() {
        let tower = ref1();
        let sc = Scaffold::build(&tower).unwrap();
        // v_L(x_0 * canonical) = -2 + 5 = 3, not congruent to 5 mod 4
        let rho = sc.canonical_rho.mul(&tower.x(0));
        assert!(matches!(
            verify_theorem(&tower, &sc, &rho),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn theta_action_on_binomials() {
        // Theta_(i) binom(X_j, p-1) = binom(X_j + [j = n-i], p-1)
        let tower = ref1();
        let sc = Scaffold::build(&tower).unwrap();
        let p = tower.p();
        let n = tower.n();
        for i in 0..=n {
            for j in 0..=n {
                let top = binom_tower(&sc.x.x_diag[j], p - 1).unwrap();
                let lhs = apply_algebra(&sc.thetas[i], &top);
                let rhs = if j == n - i {
                    binom_tower(&sc.x.x_diag[j].add(&tower.one()), p - 1).unwrap()
                } else {
                    top
                };
                assert!(lhs.eq_to_prec(&rhs), "i={i}, j={j}");
            }
        }
    }

    #[test]
    fn predicted_valuation_rows() {
        let tower = ref1();
        let sc = Scaffold::build(&tower).unwrap();
        assert_eq!(predicted_valuation(&[0, 0], 5, &sc.breaks).unwrap(), 5);
        assert_eq!(predicted_valuation(&[1, 0], 5, &sc.breaks).unwrap(), 10);
        assert_eq!(predicted_valuation(&[0, 1], 5, &sc.breaks).unwrap(), 15);
        assert_eq!(predicted_valuation(&[1, 1], 5, &sc.breaks).unwrap(), 20);
        // wrong residue class is rejected
        assert!(predicted_valuation(&[0, 0], 6, &sc.breaks).is_err());
    }

    #[test]
    fn ref1_theorem_rows() {
        let tower = ref1();
        let sc = Scaffold::build(&tower).unwrap();
        // canonical rho: v = 5, rows (5, 10, 15, 20), residues complete
        let report = verify_theorem(&tower, &sc, &sc.canonical_rho).unwrap();
        assert!(report.all_pass && report.coverage_complete);
        assert_eq!(
            report.rows.iter().map(|r| r.measured).collect::<Vec<_>>(),
            vec![5, 10, 15, 20]
        );
        // random rho of valuation 5 + 16k (the strict class mod 16)
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for k in [0i64, 1] {
            let rho = random_element_of_valuation(&tower, &sc.pi, 5 + 16 * k, &mut rng).unwrap();
            let report = verify_theorem(&tower, &sc, &rho).unwrap();
            report.ensure_pass().unwrap();
        }
    }

    #[test]
    fn normal_basis_cases() {
        let tower = ref1();
        // rho = 1: all conjugates equal, certified dependent
        assert!(!normal_basis_check(&tower, &tower.one()).unwrap());
        // canonical rho generates a normal basis
        let sc = Scaffold::build(&tower).unwrap();
        assert!(normal_basis_check(&tower, &sc.canonical_rho).unwrap());
        // p = 2 prototype: x with v_L(x) = -b = -1 = b mod 2 works
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let proto = build_tower(TowerSpec {
            p: 2,
            f: 1,
            n: 0,
            precision: 128,
            beta: LaurentSeries::monomial(&ctx, ctx.fq.one(), -1),
            omegas: vec![LaurentSeries::one(&ctx)],
            epsilons: vec![LaurentSeries::zero(&ctx)],
        })
        .unwrap();
        assert!(normal_basis_check(&proto, &proto.x(0)).unwrap());
        // p = 3 prototype: conjugates of x sum to zero, not a basis
        let ctx = SeriesCtx::new(3, 1, 128).unwrap();
        let proto3 = build_tower(TowerSpec {
            p: 3,
            f: 1,
            n: 0,
            precision: 128,
            beta: LaurentSeries::monomial(&ctx, ctx.fq.one(), -1),
            omegas: vec![LaurentSeries::one(&ctx)],
            epsilons: vec![LaurentSeries::zero(&ctx)],
        })
        .unwrap();
        assert!(!normal_basis_check(&proto3, &proto3.x(0)).unwrap());
    }
}
