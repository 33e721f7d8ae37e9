//! Report emission in two formats: aligned human tables and
//! machine-readable records (one `kind|k=v|...` line each, fields in a
//! fixed documented order). Identical inputs produce identical bytes.

use scaffold_core::ramification::BoundReport;
use scaffold_core::scaffold::{Matrix, Scaffold, TheoremReport, VerificationReport};
use scaffold_core::tower::{Tower, TowerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Records,
}

pub struct Emitter {
    pub format: Format,
    pub out: String,
}

impl Emitter {
    pub fn new(format: Format) -> Emitter {
        Emitter {
            format,
            out: String::new(),
        }
    }

    pub fn line(&mut self, s: String) {
        self.out.push_str(&s);
        self.out.push('\n');
    }

    pub fn meta(&mut self, command: &str, spec: &TowerSpec, extras: &[(&str, String)]) {
        let ctx = spec.ctx();
        match self.format {
            Format::Records => {
                let mut s = format!(
                    "meta|command={command}|p={}|f={}|n={}|fq_modulus={}|precision={}",
                    spec.p,
                    spec.f,
                    spec.n,
                    ctx.fq.modulus_string(),
                    spec.precision
                );
                for (k, v) in extras {
                    s.push_str(&format!("|{k}={v}"));
                }
                self.line(s);
            }
            Format::Table => {
                self.line(format!(
                    "{command}: p = {}, f = {} (modulus {}), n = {}, precision = {}",
                    spec.p,
                    spec.f,
                    ctx.fq.modulus_string(),
                    spec.n,
                    spec.precision
                ));
                for (k, v) in extras {
                    self.line(format!("  {k} = {v}"));
                }
            }
        }
    }

    pub fn bound_reports(&mut self, reports: &[BoundReport]) {
        for r in reports {
            let v = r
                .eps_valuation
                .map(|v| v.to_string())
                .unwrap_or_else(|| "-".into());
            let reduced = r
                .reduced_to_zero
                .map(|b| b.to_string())
                .unwrap_or_else(|| "-".into());
            match self.format {
                Format::Records => self.line(format!(
                    "bound|i={}|v_eps={v}|rhs={}/{}|pass={}|reduced={reduced}",
                    r.i, r.rhs_num, r.rhs_den, r.pass
                )),
                Format::Table => self.line(format!(
                    "  error term {}: v = {v}, bound rhs = {}/{}, pass = {}, removable = {reduced}",
                    r.i, r.rhs_num, r.rhs_den, r.pass
                )),
            }
        }
    }

    pub fn break_rows(&mut self, breaks: &scaffold_core::ramification::BreakData) {
        for i in 0..=breaks.n {
            let m = if i == 0 {
                "-".to_string()
            } else {
                breaks.m[i].to_string()
            };
            match self.format {
                Format::Records => self.line(format!(
                    "break|i={i}|lower={}|upper={}|m={m}|source=formula",
                    breaks.lower[i], breaks.upper[i]
                )),
                Format::Table => self.line(format!(
                    "  layer {i}: lower = {}, upper = {}, m = {m}  [formula]",
                    breaks.lower[i], breaks.upper[i]
                )),
            }
        }
    }

    pub fn direct_breaks(&mut self, direct: &[(i64, usize)], matches: bool) {
        for &(v, count) in direct {
            match self.format {
                Format::Records => {
                    self.line(format!("direct_break|value={v}|count={count}|source=oracle"))
                }
                Format::Table => {
                    self.line(format!("  measured break {v} ({count} elements)  [oracle]"))
                }
            }
        }
        match self.format {
            Format::Records => self.line(format!("direct_match|ok={matches}")),
            Format::Table => self.line(format!("  measured set matches formula: {matches}")),
        }
    }

    pub fn herbrand(&mut self, upper: &[i64], matches: bool, round_trip: bool) {
        let list = upper
            .iter()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join(",");
        match self.format {
            Format::Records => self.line(format!(
                "herbrand|upper={list}|match={matches}|round_trip={round_trip}"
            )),
            Format::Table => self.line(format!(
                "  conversion to upper numbering: {list} (matches formula: {matches}, round-trip: {round_trip})"
            )),
        }
    }

    pub fn matrix(&mut self, name: &str, m: &Matrix) {
        for i in 0..=m.n {
            match self.format {
                Format::Records => {
                    for j in 0..=m.n {
                        self.line(format!(
                            "matrix|name={name}|i={i}|j={j}|entry={}",
                            m.entry(i, j).format()
                        ));
                    }
                }
                Format::Table => {
                    let row = (0..=m.n)
                        .map(|j| m.entry(i, j).format())
                        .collect::<Vec<_>>()
                        .join(" | ");
                    self.line(format!("  {name}[{i}] = [ {row} ]"));
                }
            }
        }
    }

    pub fn scaffold(&mut self, tower: &Tower, sc: &Scaffold) {
        self.matrix("omega_phi", &sc.omega_phi);
        self.matrix("delta", &sc.delta);
        for (j, alpha) in sc.alphas.iter().enumerate() {
            match self.format {
                Format::Records => {
                    self.line(format!("alpha|j={j}|entry={}", alpha.format()))
                }
                Format::Table => self.line(format!("  alpha_{j} = {}", alpha.format())),
            }
        }
        for (i, theta) in sc.thetas.iter().enumerate() {
            for g in 0..tower.degree() {
                let c = theta.coeff(g);
                if c.is_zero_to_prec() {
                    continue;
                }
                let digits = tower
                    .group_digits(g)
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                match self.format {
                    Format::Records => self.line(format!(
                        "theta|i={i}|g={digits}|coeff={}",
                        c.format()
                    )),
                    Format::Table => {
                        self.line(format!("  Theta_({i})[sigma^({digits})] = {}", c.format()))
                    }
                }
            }
        }
    }

    pub fn theorem_report(&mut self, label: &str, tower: &Tower, report: &TheoremReport) {
        for row in &report.rows {
            let digits = row
                .a
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",");
            match self.format {
                Format::Records => self.line(format!(
                    "row|rho={label}|a={digits}|predicted={}|measured={}|pass={}|source=oracle",
                    row.predicted, row.measured, row.pass
                )),
                Format::Table => self.line(format!(
                    "  rho {label}, a = ({digits}): predicted {} measured {} [oracle] {}",
                    row.predicted,
                    row.measured,
                    if row.pass { "ok" } else { "MISMATCH" }
                )),
            }
        }
        let deg = tower.degree();
        match self.format {
            Format::Records => self.line(format!(
                "coverage|rho={label}|v_rho={}|complete={}",
                report.v_rho, report.coverage_complete
            )),
            Format::Table => self.line(format!(
                "  rho {label}: v = {}, residues mod {deg} complete: {}",
                report.v_rho, report.coverage_complete
            )),
        }
    }

    pub fn verification(&mut self, tower: &Tower, report: &VerificationReport) {
        self.bound_reports(&report.scaffold.bound_reports);
        self.break_rows(&report.scaffold.breaks);
        self.direct_breaks(&report.direct_breaks, report.breaks_match);
        self.herbrand(
            &report.herbrand_upper,
            report.herbrand_match,
            report.herbrand_round_trip,
        );
        match self.format {
            Format::Records => self.line(format!(
                "canonical|v={}|expected={}",
                report.canonical_valuation, report.scaffold.breaks.b_m
            )),
            Format::Table => self.line(format!(
                "  canonical element: v = {} (expected b_m = {})",
                report.canonical_valuation, report.scaffold.breaks.b_m
            )),
        }
        for (k, tr) in report.theorem_reports.iter().enumerate() {
            let label = if k == 0 {
                "canonical".to_string()
            } else {
                format!("{}", k - 1)
            };
            self.theorem_report(&label, tower, tr);
        }
        match self.format {
            Format::Records => self.line(format!(
                "normal_basis|element=canonical|result={}",
                report.normal_basis_canonical
            )),
            Format::Table => self.line(format!(
                "  canonical element generates a normal basis: {}",
                report.normal_basis_canonical
            )),
        }
    }

    pub fn summary(&mut self, all_pass: bool) {
        match self.format {
            Format::Records => self.line(format!("summary|all_pass={all_pass}")),
            Format::Table => self.line(format!(
                "result: {}",
                if all_pass { "all checks passed" } else { "CHECKS FAILED" }
            )),
        }
    }
}
