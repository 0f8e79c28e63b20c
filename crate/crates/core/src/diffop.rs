//! Graded differential operators in `t0, t1, ...` realized as term generators.
//!
//! An operator never materializes its infinite sum: for a given input
//! monomial it produces only the terms `c * t^mu * d_nu` that can act
//! nontrivially. `d_0` is kept symbolic and acts on the `Marker::T0` exponent,
//! so conjugation by `exp(s t0)` is the binomial substitution
//! `d_0 -> d_0 + s`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::ratseries::{binomial, int, rat, Caps, Marker, Monomial, Poly, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffOpError {
    #[error("L_i is defined for i >= -1, got {0}")]
    VirasoroIndex(i64),
    #[error("output cap {requested} needs input exact to {needed}, input cap is {available}")]
    InexactWindow {
        requested: i64,
        needed: i64,
        available: u32,
    },
}

/// `coeff * markers * t^mono * prod d_i^{ders[i]}`; index 0 in `ders` is `d_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffTerm {
    pub coeff: Rational,
    pub markers: Monomial,
    pub mono: Monomial,
    pub ders: Vec<(u32, u32)>,
}

impl DiffTerm {
    fn new(coeff: Rational, mono: Monomial, ders: &[u32]) -> Self {
        let mut d: Vec<(u32, u32)> = Vec::new();
        for &i in ders {
            match d.iter_mut().find(|(k, _)| *k == i) {
                Some(e) => e.1 += 1,
                None => d.push((i, 1)),
            }
        }
        d.sort_unstable();
        Self {
            coeff,
            markers: Monomial::one(),
            mono,
            ders: d,
        }
    }

    /// Grading shift `d(mu) - d(nu)`.
    pub fn shift(&self) -> i64 {
        self.mono.degree() as i64 - self.ders.iter().map(|&(i, e)| (i * e) as i64).sum::<i64>()
    }

    fn d0_power(&self) -> u32 {
        self.ders
            .iter()
            .find(|(i, _)| *i == 0)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    /// Acts on one monomial; `None` when a derivative kills it.
    pub fn act(&self, m: &Monomial) -> Option<(Monomial, Rational)> {
        let mut out = m.clone();
        let mut c = self.coeff.clone();
        for &(i, e) in &self.ders {
            for _ in 0..e {
                let k = out.exp(i);
                if k == 0 {
                    return None;
                }
                c *= int(k as i64);
                out = if i == 0 {
                    out.without_marker(Marker::T0)?
                } else {
                    out.without_var(i)?
                };
            }
        }
        Some((out.mul(&self.mono).mul(&self.markers), c))
    }
}

impl fmt::Display for DiffTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::ratseries::fmt_rat(&self.coeff))?;
        if self.markers != Monomial::one() {
            write!(f, "*{}", self.markers)?;
        }
        if self.mono != Monomial::one() {
            write!(f, "*{}", self.mono)?;
        }
        for &(i, e) in &self.ders {
            if e == 1 {
                write!(f, "*d{i}")?;
            } else {
                write!(f, "*d{i}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Which operator family a `DiffOp` generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    /// `sum_i (i+1) t_{i+1} d_i`.
    W0,
    /// Join part `1/2 sum (i+1)(j+1) t_{i+1} t_{j+1} d_{i+j}`.
    PPlus,
    /// Cut part `1/2 sum (k+l+2) t_{k+l+2} d_k d_l`.
    PMinus,
    /// `P+ + P-`.
    W1,
    /// `-d_{i+2} + sum_m m t_m d_{m+i} + sum_{k+l=i} d_k d_l`.
    Virasoro(i64),
    /// `-d_0 + 1`.
    Constraint,
}

/// Grading behaviour of an operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Grading {
    Homogeneous(i64),
    /// Distinct shifts present, increasing.
    Mixed(Vec<i64>),
}

impl Grading {
    pub fn min_shift(&self) -> i64 {
        match self {
            Grading::Homogeneous(g) => *g,
            Grading::Mixed(v) => v[0],
        }
    }
}

/// Operator description plus an optional conjugation shift
/// `s` (a weight-zero marker polynomial): `exp(-s t0) op exp(s t0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    pub kind: OpKind,
    shift: Vec<(Monomial, Rational)>,
}

impl DiffOp {
    pub fn w0() -> Self {
        Self::plain(OpKind::W0)
    }

    pub fn w1() -> Self {
        Self::plain(OpKind::W1)
    }

    pub fn p_plus() -> Self {
        Self::plain(OpKind::PPlus)
    }

    pub fn p_minus() -> Self {
        Self::plain(OpKind::PMinus)
    }

    /// `W1' = exp(-t0) W1 exp(t0)`.
    pub fn w1_prime() -> Self {
        conjugate_shift(&Self::w1(), &[(Monomial::one(), Rational::one())])
    }

    /// `W1` conjugated by `exp(t- t0)`.
    pub fn w1_marked() -> Self {
        conjugate_shift(&Self::w1(), &[(Monomial::marker_only(Marker::TMinus, 1), Rational::one())])
    }

    pub fn w0_prime() -> Self {
        conjugate_shift(&Self::w0(), &[(Monomial::one(), Rational::one())])
    }

    pub fn w0_marked() -> Self {
        conjugate_shift(&Self::w0(), &[(Monomial::marker_only(Marker::TMinus, 1), Rational::one())])
    }

    fn plain(kind: OpKind) -> Self {
        Self {
            kind,
            shift: Vec::new(),
        }
    }

    pub fn shift(&self) -> &[(Monomial, Rational)] {
        &self.shift
    }

    pub fn name(&self) -> String {
        let base = match self.kind {
            OpKind::W0 => "W0".to_string(),
            OpKind::PPlus => "P+".to_string(),
            OpKind::PMinus => "P-".to_string(),
            OpKind::W1 => "W1".to_string(),
            OpKind::Virasoro(i) => format!("L{i}"),
            OpKind::Constraint => "C".to_string(),
        };
        if self.shift.is_empty() {
            base
        } else {
            format!("{base}'")
        }
    }

    pub fn grading(&self) -> Grading {
        match self.kind {
            OpKind::W0 => Grading::Homogeneous(1),
            OpKind::PPlus | OpKind::PMinus | OpKind::W1 => Grading::Homogeneous(2),
            OpKind::Virasoro(i) => Grading::Mixed(vec![-(i + 2), -i]),
            OpKind::Constraint => Grading::Homogeneous(0),
        }
    }

    /// Highest output degree determined by an input exact through `input_cap`.
    pub fn exact_output_cap(&self, input_cap: u32) -> i64 {
        input_cap as i64 + self.grading().min_shift()
    }

    /// Unconjugated terms that can act nontrivially on `m`. `d_0` terms are
    /// always produced since conjugation turns them into lower-order terms.
    fn base_terms(&self, m: &Monomial) -> Vec<DiffTerm> {
        let mut idx: BTreeSet<u32> = m.exps().iter().map(|&(i, _)| i).collect();
        idx.insert(0);
        let mut out = Vec::new();
        let half = rat(1, 2);
        match self.kind {
            OpKind::W0 => {
                for &i in &idx {
                    out.push(DiffTerm::new(int(i as i64 + 1), Monomial::var(i + 1), &[i]));
                }
            }
            OpKind::PPlus | OpKind::PMinus | OpKind::W1 => {
                if self.kind != OpKind::PMinus {
                    for &k in &idx {
                        for a in 0..=k {
                            let b = k - a;
                            let c = &half * int(((a + 1) * (b + 1)) as i64);
                            let mono = Monomial::var(a + 1).mul(&Monomial::var(b + 1));
                            out.push(DiffTerm::new(c, mono, &[k]));
                        }
                    }
                }
                if self.kind != OpKind::PPlus {
                    for &k in &idx {
                        for &l in &idx {
                            let c = &half * int((k + l + 2) as i64);
                            out.push(DiffTerm::new(c, Monomial::var(k + l + 2), &[k, l]));
                        }
                    }
                }
            }
            OpKind::Virasoro(i) => {
                let top = i + 2;
                if top >= 0 && idx.contains(&(top as u32)) {
                    out.push(DiffTerm::new(int(-1), Monomial::one(), &[top as u32]));
                }
                for &target in &idx {
                    let mm = target as i64 - i;
                    if mm >= 1 {
                        out.push(DiffTerm::new(int(mm), Monomial::var(mm as u32), &[target]));
                    }
                }
                if i >= 0 {
                    for k in 0..=i {
                        let l = i - k;
                        if idx.contains(&(k as u32)) && idx.contains(&(l as u32)) {
                            out.push(DiffTerm::new(int(1), Monomial::one(), &[k as u32, l as u32]));
                        }
                    }
                }
            }
            OpKind::Constraint => {
                out.push(DiffTerm::new(int(-1), Monomial::one(), &[0]));
                out.push(DiffTerm::new(int(1), Monomial::one(), &[]));
            }
        }
        out
    }

    /// Terms (after conjugation) that can act nontrivially on `m`.
    pub fn terms_for(&self, m: &Monomial) -> Vec<DiffTerm> {
        let base = self.base_terms(m);
        if self.shift.is_empty() {
            return base;
        }
        let mut out = Vec::new();
        for t in base {
            let a = t.d0_power();
            if a == 0 {
                out.push(t);
                continue;
            }
            for b in 0..=a {
                let mut ders: Vec<(u32, u32)> = t.ders.iter().copied().filter(|(i, _)| *i != 0).collect();
                if b > 0 {
                    ders.insert(0, (0, b));
                }
                for (smono, sc) in shift_power(&self.shift, a - b) {
                    out.push(DiffTerm {
                        coeff: &t.coeff * binomial(a as i64, b as i64) * sc,
                        markers: t.markers.mul(&smono),
                        mono: t.mono.clone(),
                        ders: ders.clone(),
                    });
                }
            }
        }
        out
    }

    /// Image of a single monomial, exact and untruncated.
    pub fn apply_monomial(&self, m: &Monomial) -> Vec<(Monomial, Rational)> {
        self.terms_for(m)
            .iter()
            .filter_map(|t| t.act(m))
            .collect()
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        if !self.shift.is_empty() {
            let s: Vec<String> = self
                .shift
                .iter()
                .map(|(m, c)| format!("{}*{}", crate::ratseries::fmt_rat(c), m))
                .collect();
            write!(f, "[d0 -> d0 + {}]", s.join(" + "))?;
        }
        Ok(())
    }
}

/// `s^k` for a marker polynomial `s` given as terms.
fn shift_power(s: &[(Monomial, Rational)], k: u32) -> Vec<(Monomial, Rational)> {
    let mut acc: Vec<(Monomial, Rational)> = vec![(Monomial::one(), Rational::one())];
    for _ in 0..k {
        let mut next: Vec<(Monomial, Rational)> = Vec::new();
        for (am, ac) in &acc {
            for (sm, sc) in s {
                let m = am.mul(sm);
                let c = ac * sc;
                match next.iter_mut().find(|(k, _)| *k == m) {
                    Some(e) => e.1 += c,
                    None => next.push((m, c)),
                }
            }
        }
        next.retain(|(_, c)| !c.is_zero());
        acc = next;
    }
    acc
}

/// `exp(-s t0) op exp(s t0)`, i.e. `d_0 -> d_0 + s`. Shifts compose additively.
pub fn conjugate_shift(op: &DiffOp, s: &[(Monomial, Rational)]) -> DiffOp {
    let mut shift = op.shift.clone();
    for (m, c) in s {
        match shift.iter_mut().find(|(k, _)| k == m) {
            Some(e) => e.1 += c,
            None => shift.push((m.clone(), c.clone())),
        }
    }
    shift.retain(|(_, c)| !c.is_zero());
    DiffOp {
        kind: op.kind,
        shift,
    }
}

/// `L_i` for `i >= -1`.
pub fn virasoro_l(i: i64) -> Result<DiffOp, DiffOpError> {
    if i < -1 {
        return Err(DiffOpError::VirasoroIndex(i));
    }
    Ok(DiffOp::plain(OpKind::Virasoro(i)))
}

/// `C = -d_0 + 1`.
pub fn constraint_c() -> DiffOp {
    DiffOp::plain(OpKind::Constraint)
}

/// Applies `op` to `p`, keeping output degrees `<= cap_d`. The requested cap
/// must be determined by the input: `cap_d <= cap(p) + min shift`.
pub fn apply(op: &DiffOp, p: &Poly, cap_d: u32) -> Result<Poly, DiffOpError> {
    let needed = cap_d as i64 - op.grading().min_shift();
    if needed > p.caps().degree as i64 {
        return Err(DiffOpError::InexactWindow {
            requested: cap_d as i64,
            needed,
            available: p.caps().degree,
        });
    }
    let caps = Caps {
        degree: cap_d,
        ..p.caps()
    };
    let mut out = Poly::zero(caps);
    for (m, c) in p.terms() {
        for (om, oc) in op.apply_monomial(m) {
            out.add_term(om, oc * c);
        }
    }
    Ok(out)
}

/// Residual of a commutator identity on one basis monomial.
#[derive(Clone, Debug)]
pub struct Residual {
    pub input: Monomial,
    pub value: Vec<(Monomial, Rational)>,
}

#[derive(Clone, Debug)]
pub struct CommutatorReport {
    pub label: String,
    pub tested: usize,
    pub residuals: Vec<Residual>,
}

impl CommutatorReport {
    pub fn passed(&self) -> bool {
        self.residuals.is_empty()
    }
}

fn accumulate(acc: &mut Vec<(Monomial, Rational)>, items: Vec<(Monomial, Rational)>, scale: &Rational) {
    for (m, c) in items {
        let c = c * scale;
        match acc.iter_mut().find(|(k, _)| *k == m) {
            Some(e) => e.1 += c,
            None => acc.push((m, c)),
        }
    }
}

fn apply_terms(op: &DiffOp, p: &[(Monomial, Rational)]) -> Vec<(Monomial, Rational)> {
    let mut out = Vec::new();
    for (m, c) in p {
        accumulate(&mut out, op.apply_monomial(m), c);
    }
    out
}

/// Basis monomials `t0^k t^mu` with `d(mu) <= deg_cap`, parts `<= var_cap`,
/// `k <= t0_max`.
pub fn basis_monomials(deg_cap: u32, var_cap: u32, t0_max: u32) -> Vec<Monomial> {
    let mut parts_lists = Vec::new();
    fn rec(rem: u32, max_part: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        for p in (1..=max_part.min(rem)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    rec(deg_cap, var_cap, &mut Vec::new(), &mut parts_lists);
    let mut out = Vec::new();
    for parts in parts_lists {
        for k in 0..=t0_max {
            out.push(Monomial::from_parts(&parts).with_marker(Marker::T0, k));
        }
    }
    out.sort();
    out
}

/// Checks `a b - b a - scale * expect = 0` on every basis monomial.
pub fn commutator_check(
    a: &DiffOp,
    b: &DiffOp,
    expect: Option<&DiffOp>,
    scale: &Rational,
    deg_cap: u32,
    var_cap: u32,
    t0_max: u32,
) -> CommutatorReport {
    let basis = basis_monomials(deg_cap, var_cap, t0_max);
    let residuals: Vec<Residual> = basis
        .par_iter()
        .filter_map(|m| {
            let one = vec![(m.clone(), Rational::one())];
            let mut acc = Vec::new();
            accumulate(&mut acc, apply_terms(a, &apply_terms(b, &one)), &Rational::one());
            accumulate(&mut acc, apply_terms(b, &apply_terms(a, &one)), &-Rational::one());
            if let Some(e) = expect {
                accumulate(&mut acc, apply_terms(e, &one), &-scale.clone());
            }
            acc.retain(|(_, c)| !c.is_zero());
            if acc.is_empty() {
                None
            } else {
                acc.sort_by(|x, y| x.0.cmp(&y.0));
                Some(Residual {
                    input: m.clone(),
                    value: acc,
                })
            }
        })
        .collect();
    let label = match expect {
        Some(e) => format!("[{}, {}] = {}*{}", a.name(), b.name(), crate::ratseries::fmt_rat(scale), e.name()),
        None => format!("[{}, {}] = 0", a.name(), b.name()),
    };
    CommutatorReport {
        label,
        tested: basis.len(),
        residuals,
    }
}

/// Witt relations `[L_i, L_j] = (i - j) L_{i+j}` for `-1 <= i <= j <= j_max`.
pub fn witt_check(j_max: i64, deg_cap: u32, var_cap: u32, t0_max: u32) -> Vec<CommutatorReport> {
    let mut out = Vec::new();
    for i in -1..=j_max {
        for j in i..=j_max {
            let li = virasoro_l(i).expect("valid index");
            let lj = virasoro_l(j).expect("valid index");
            if i == j {
                out.push(commutator_check(&li, &lj, None, &Rational::zero(), deg_cap, var_cap, t0_max));
                continue;
            }
            let lij = virasoro_l(i + j).expect("valid index");
            out.push(commutator_check(&li, &lj, Some(&lij), &int(i - j), deg_cap, var_cap, t0_max));
        }
    }
    out
}

/// Zero check used by callers that only need a boolean.
pub fn is_zero_terms(v: &[(Monomial, Rational)]) -> bool {
    v.iter().all(|(_, c)| c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(&[u32], Rational)], cap: u32) -> Poly {
        Poly::from_terms(terms.iter().map(|(p, c)| (Monomial::from_parts(p), c.clone())), Caps::degree(cap))
    }

    #[test]
    fn w1_prime_on_vacuum() {
        let out = apply(&DiffOp::w1_prime(), &Poly::one(Caps::degree(2)), 4).unwrap();
        assert_eq!(out.to_string(), "t2 + 1/2*t1^2");
    }

    #[test]
    fn w0_on_t1() {
        let out = apply(&DiffOp::w0(), &poly(&[(&[1], int(1))], 4), 5).unwrap();
        assert_eq!(out.to_string(), "2*t2");
    }

    #[test]
    fn l0_contains_d0_squared() {
        let l0 = virasoro_l(0).unwrap();
        let t0sq = Monomial::marker_only(Marker::T0, 2);
        let img = l0.apply_monomial(&t0sq);
        assert!(img.iter().any(|(m, c)| *m == Monomial::one() && *c == int(2)));
    }

    #[test]
    fn rejects_low_index() {
        assert_eq!(virasoro_l(-2), Err(DiffOpError::VirasoroIndex(-2)));
    }

    #[test]
    fn inexact_window_is_rejected() {
        let p = Poly::one(Caps::degree(2));
        assert!(apply(&DiffOp::w1_prime(), &p, 5).is_err());
    }
}
