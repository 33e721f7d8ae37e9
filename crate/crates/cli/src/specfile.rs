//! Line-oriented tower spec files and the series literal grammar.
//!
//! ```text
//! # tower spec
//! p 2
//! f 1
//! fq_modulus x+1
//! n 1
//! precision 128
//! beta 1*t^-1
//! omega 0 1*t^0
//! omega 1 1*t^-1
//! epsilon 0 0
//! epsilon 1 0
//! ```
//!
//! Series are sums of `c*t^k` terms with coefficients written in the
//! power basis of the recorded polynomial: `1`, `w`, `w^2`, or a
//! parenthesized polynomial like `(w^2+2*w+1)`. The zero series is `0`.
//! Emitting and re-parsing a spec yields identical bytes.

use std::collections::BTreeMap;
use std::sync::Arc;

use scaffold_core::base_field::{FqElement, LaurentSeries, SeriesCtx};
use scaffold_core::error::{Error, Result};
use scaffold_core::tower::TowerSpec;

pub const DEFAULT_PRECISION: i64 = 128;

/// Parse a coefficient polynomial in `w` (no parentheses), e.g.
/// `w^2+2*w+1`.
fn parse_coeff_poly(ctx: &SeriesCtx, s: &str) -> Result<FqElement> {
    let fq = &ctx.fq;
    let mut acc = FqElement::ZERO;
    for part in s.split('+') {
        let part = part.trim();
        if part.is_empty() {
            return Err(Error::InvalidInput(format!("empty term in '{s}'")));
        }
        let (c_str, w_str) = match part.split_once('*') {
            Some((c, w)) => (c.trim(), Some(w.trim())),
            None => {
                if part.starts_with('w') {
                    ("1", Some(part))
                } else {
                    (part, None)
                }
            }
        };
        let c: u64 = c_str
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad coefficient '{c_str}'")))?;
        let k = match w_str {
            None => 0u64,
            Some("w") => 1,
            Some(w) => {
                let exp = w.strip_prefix("w^").ok_or_else(|| {
                    Error::InvalidInput(format!("bad basis power '{w}'"))
                })?;
                exp.parse()
                    .map_err(|_| Error::InvalidInput(format!("bad basis power '{w}'")))?
            }
        };
        let term = fq.mul(fq.from_u64(c), fq.pow(fq.generator(), k));
        acc = fq.add(acc, term);
    }
    Ok(acc)
}

/// Parse a series literal in the canonical `c*t^k + ...` form.
pub fn parse_series(ctx: &Arc<SeriesCtx>, s: &str) -> Result<LaurentSeries> {
    let s = s.trim();
    if s == "0" {
        return Ok(LaurentSeries::zero(ctx));
    }
    // split on '+' at paren depth zero
    let mut terms = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::InvalidInput(format!("unbalanced parens in '{s}'")))?;
                cur.push(ch);
            }
            '+' if depth == 0 => {
                terms.push(cur.clone());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    terms.push(cur);

    let mut parsed = Vec::new();
    for term in terms {
        let term = term.trim();
        let pos = term
            .rfind("*t^")
            .ok_or_else(|| Error::InvalidInput(format!("term '{term}' is not c*t^k")))?;
        let (coeff_str, exp_str) = (&term[..pos], &term[pos + 3..]);
        let exp: i64 = exp_str
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad exponent '{exp_str}'")))?;
        let coeff_str = coeff_str.trim();
        let coeff = if let Some(inner) = coeff_str
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
        {
            parse_coeff_poly(ctx, inner)?
        } else {
            parse_coeff_poly(ctx, coeff_str)?
        };
        parsed.push((exp, coeff));
    }
    Ok(LaurentSeries::from_terms(ctx, &parsed))
}

/// Canonical text for one spec.
pub fn write_spec(spec: &TowerSpec) -> String {
    let ctx = spec.ctx();
    let mut out = String::new();
    out.push_str("# tower spec\n");
    out.push_str(&format!("p {}\n", spec.p));
    out.push_str(&format!("f {}\n", spec.f));
    out.push_str(&format!("fq_modulus {}\n", ctx.fq.modulus_string()));
    out.push_str(&format!("n {}\n", spec.n));
    out.push_str(&format!("precision {}\n", spec.precision));
    out.push_str(&format!("beta {}\n", spec.beta.format()));
    for (i, omega) in spec.omegas.iter().enumerate() {
        out.push_str(&format!("omega {i} {}\n", omega.format()));
    }
    for (i, eps) in spec.epsilons.iter().enumerate() {
        out.push_str(&format!("epsilon {i} {}\n", eps.format()));
    }
    out
}

/// Parse a spec file; `precision_override` replaces the file's value.
pub fn parse_spec(text: &str, precision_override: Option<i64>) -> Result<TowerSpec> {
    let mut scalars: BTreeMap<String, String> = BTreeMap::new();
    let mut omegas: BTreeMap<usize, String> = BTreeMap::new();
    let mut epsilons: BTreeMap<usize, String> = BTreeMap::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::InvalidInput(format!("bad line '{line}'")))?;
        let rest = rest.trim();
        match key {
            "omega" | "epsilon" => {
                let (idx_str, body) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| Error::InvalidInput(format!("bad line '{line}'")))?;
                let idx: usize = idx_str
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad index '{idx_str}'")))?;
                let map = if key == "omega" { &mut omegas } else { &mut epsilons };
                if map.insert(idx, body.trim().to_string()).is_some() {
                    return Err(Error::InvalidInput(format!("duplicate {key} {idx}")));
                }
            }
            _ => {
                if scalars.insert(key.to_string(), rest.to_string()).is_some() {
                    return Err(Error::InvalidInput(format!("duplicate key '{key}'")));
                }
            }
        }
    }
    let get = |k: &str| -> Result<&String> {
        scalars
            .get(k)
            .ok_or_else(|| Error::InvalidInput(format!("missing key '{k}'")))
    };
    let p: u64 = get("p")?
        .parse()
        .map_err(|_| Error::InvalidInput("bad p".into()))?;
    let f: usize = get("f")?
        .parse()
        .map_err(|_| Error::InvalidInput("bad f".into()))?;
    let n: usize = get("n")?
        .parse()
        .map_err(|_| Error::InvalidInput("bad n".into()))?;
    let precision = match precision_override {
        Some(v) => v,
        None => match scalars.get("precision") {
            Some(v) => v
                .parse()
                .map_err(|_| Error::InvalidInput("bad precision".into()))?,
            None => DEFAULT_PRECISION,
        },
    };
    let ctx = SeriesCtx::new(p, f, precision)?;
    if let Some(stated) = scalars.get("fq_modulus") {
        let actual = ctx.fq.modulus_string();
        if *stated != actual {
            return Err(Error::InvalidInput(format!(
                "fq_modulus mismatch: file says '{stated}', this build uses '{actual}'"
            )));
        }
    }
    let beta = parse_series(&ctx, get("beta")?)?;
    let mut omega_vec = Vec::with_capacity(n + 1);
    let mut eps_vec = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let o = omegas
            .get(&i)
            .ok_or_else(|| Error::InvalidInput(format!("missing omega {i}")))?;
        omega_vec.push(parse_series(&ctx, o)?);
        let e = epsilons
            .get(&i)
            .map(|s| s.as_str())
            .unwrap_or("0");
        eps_vec.push(parse_series(&ctx, e)?);
    }
    Ok(TowerSpec {
        p,
        f,
        n,
        precision,
        beta,
        omegas: omega_vec,
        epsilons: eps_vec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let ctx = SeriesCtx::new(2, 2, 64).unwrap();
        let w = ctx.fq.generator();
        let s = LaurentSeries::from_terms(
            &ctx,
            &[
                (-3, ctx.fq.one()),
                (0, ctx.fq.add(w, ctx.fq.one())),
                (2, w),
            ],
        );
        let text = s.format();
        let back = parse_series(&ctx, &text).unwrap();
        assert!(back.eq_to_prec(&s));
        assert_eq!(back.format(), text);
        assert!(parse_series(&ctx, "0").unwrap().is_exact_zero());
    }

    #[test]
    fn spec_round_trip() {
        let ctx = SeriesCtx::new(2, 1, 128).unwrap();
        let spec = TowerSpec {
            p: 2,
            f: 1,
            n: 1,
            precision: 128,
            beta: LaurentSeries::monomial(&ctx, ctx.fq.one(), -1),
            omegas: vec![
                LaurentSeries::one(&ctx),
                LaurentSeries::monomial(&ctx, ctx.fq.one(), -1),
            ],
            epsilons: vec![LaurentSeries::zero(&ctx), LaurentSeries::zero(&ctx)],
        };
        let text = write_spec(&spec);
        let parsed = parse_spec(&text, None).unwrap();
        assert_eq!(write_spec(&parsed), text);
        // rejects a modulus from a different build
        let tampered = text.replace("x+1", "x+5");
        assert!(parse_spec(&tampered, None).is_err());
    }
}
