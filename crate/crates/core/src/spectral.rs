//! Laplace-transformed correlators, the loop equation, the cylinder identity on
//! the Zhukovsky cover `x = z + 1/z`, the residue recursion on the curve
//! `xy = y^2 + 1` with `y = 1/z`, and the substitution by the disc amplitude
//! that turns lattice-point counts into the `W*` series.
//!
//! Series in the Laplace variables are kept in `xi_i = 1/x_i`; series at
//! `z_i = infinity` in `w_i = 1/z_i`, with `xi = w / (1 + w^2)`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::enumerate::{self, EnumError};
use crate::opmatrix::compositions;
use crate::ratseries::{binomial, fmt_rat, int, solve_disc, LaurentSeries, Rational, RationalFn, UPoly};
use crate::report::Report;
use crate::tutte;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("type (g={g}, n={n}) is not stable")]
    Unstable { g: u32, n: u32 },
    #[error("type (g={g}, n={n}) is not supported by this check")]
    Unsupported { g: u32, n: u32 },
    #[error(transparent)]
    Enumeration(#[from] EnumError),
}

/// Multivariate series keyed by exponent vectors.
pub type MultiSeries = BTreeMap<Vec<u32>, Rational>;

fn add_into(s: &mut MultiSeries, key: Vec<u32>, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = s.entry(key.clone()).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        s.remove(&key);
    }
}

fn total(key: &[u32]) -> u32 {
    key.iter().sum()
}

fn series_mul(a: &MultiSeries, b: &MultiSeries, order: u32) -> MultiSeries {
    let mut out = MultiSeries::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let k: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            if total(&k) <= order {
                add_into(&mut out, k, ca * cb);
            }
        }
    }
    out
}

/// `W_{g,n}(x) = sum_alpha R~_{g,n}(alpha) prod x_i^-(alpha_i + 1)` for
/// labeled `alpha` with `sum alpha <= cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelatorSeries {
    pub g: u32,
    pub n: u32,
    pub cap: u32,
    coeffs: MultiSeries,
}

impl CorrelatorSeries {
    pub fn coeff(&self, alpha: &[u32]) -> Rational {
        self.coeffs.get(alpha).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &MultiSeries {
        &self.coeffs
    }

    /// The series in `xi_i = 1/x_i`, truncated at total degree `cap + n`.
    pub fn xi_series(&self) -> MultiSeries {
        self.coeffs
            .iter()
            .map(|(a, c)| (a.iter().map(|x| x + 1).collect(), c.clone()))
            .collect()
    }

    /// `W*`: coefficient `R~(alpha) / prod alpha_i` at `xi^alpha`, `alpha_i >= 1`.
    pub fn star(&self) -> MultiSeries {
        self.coeffs
            .iter()
            .filter(|(a, _)| a.iter().all(|&x| x > 0))
            .map(|(a, c)| {
                let p: u64 = a.iter().map(|&x| x as u64).product();
                (a.clone(), c / int(p as i64))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(a, c)| json!({"alpha": a, "value": fmt_rat(c)}))
            .collect();
        json!({"g": self.g, "n": self.n, "cap": self.cap, "coeffs": rows})
    }
}

pub fn laplace_w(g: u32, n: u32, cap: u32) -> CorrelatorSeries {
    let mut coeffs = MultiSeries::new();
    for s in (0..=cap).step_by(2) {
        for alpha in compositions(n as usize, s) {
            let v = tutte::r_tilde(g, n, &alpha);
            if !v.is_zero() {
                coeffs.insert(alpha, v);
            }
        }
    }
    CorrelatorSeries { g, n, cap, coeffs }
}

/// Residuals of the loop equation for `W_{g,n}` with `sum alpha <= cap`,
/// compared in `xi` up to total degree `cap + n - 1`.
pub fn loop_check(g: u32, n: u32, cap: u32) -> Report {
    let order = cap + n - 1;
    let mut cache: HashMap<(u32, u32), MultiSeries> = HashMap::new();
    let mut w = |g: u32, n: u32| -> MultiSeries {
        cache
            .entry((g, n))
            .or_insert_with(|| laplace_w(g, n, cap).xi_series())
            .clone()
    };
    let nn = n as usize;
    let mut lhs = MultiSeries::new();
    for (k, c) in w(g, n) {
        if k[0] == 0 {
            continue;
        }
        let mut key = k.clone();
        key[0] -= 1;
        if total(&key) <= order {
            add_into(&mut lhs, key, c);
        }
    }
    let mut rhs = MultiSeries::new();
    if g == 0 && n == 1 {
        add_into(&mut rhs, vec![0], Rational::one());
    }
    // Divided differences against each other variable, then d/dx_i.
    if n >= 2 {
        let lower = w(g, n - 1);
        for i in 1..nn {
            let rest: Vec<usize> = (1..nn).filter(|&j| j != i).collect();
            for (k, c) in &lower {
                let m = k[0];
                for p in 1..=m {
                    let q = m + 1 - p;
                    let mut key = vec![0; nn];
                    key[0] = p;
                    key[i] = q + 1;
                    for (s, &j) in rest.iter().enumerate() {
                        key[j] = k[s + 1];
                    }
                    if total(&key) <= order {
                        add_into(&mut rhs, key, c * int(q as i64));
                    }
                }
            }
        }
    }
    // Both first arguments at x_1.
    if g >= 1 {
        for (k, c) in w(g - 1, n + 1) {
            let mut key = vec![k[0] + k[1]];
            key.extend_from_slice(&k[2..]);
            if total(&key) <= order {
                add_into(&mut rhs, key, c);
            }
        }
    }
    // Products over splittings of genus and of the other variables.
    for g1 in 0..=g {
        for mask in 0u32..(1 << (nn - 1)) {
            let i1: Vec<usize> = (1..nn).filter(|&j| mask & (1 << (j - 1)) != 0).collect();
            let i2: Vec<usize> = (1..nn).filter(|&j| mask & (1 << (j - 1)) == 0).collect();
            let a = embed(&w(g1, i1.len() as u32 + 1), &i1, nn);
            let b = embed(&w(g - g1, i2.len() as u32 + 1), &i2, nn);
            for (k, c) in series_mul(&a, &b, order) {
                add_into(&mut rhs, k, c);
            }
        }
    }
    let mut report = Report::new(format!("loop equation (g={g}, n={n}, cap {cap})"));
    compare(&mut report, &lhs, &rhs, nn, order, "x1 W");
    report
}

/// Places the first variable at slot 0 and the others at `slots`.
fn embed(s: &MultiSeries, slots: &[usize], n: usize) -> MultiSeries {
    s.iter()
        .map(|(k, c)| {
            let mut key = vec![0; n];
            key[0] = k[0];
            for (t, &j) in slots.iter().enumerate() {
                key[j] = k[t + 1];
            }
            (key, c.clone())
        })
        .collect()
}

/// Compares every coefficient with `n` variables and total degree `<= order`.
fn compare(report: &mut Report, a: &MultiSeries, b: &MultiSeries, n: usize, order: u32, label: &str) {
    let outside = a.keys().chain(b.keys()).find(|k| total(k) > order);
    report.record(outside.map(|k| format!("{label}: term {k:?} outside the window")));
    for k in (0..=order).flat_map(|t| compositions(n, t)) {
        let k = &k;
        let x = a.get(k).cloned().unwrap_or_else(Rational::zero);
        let y = b.get(k).cloned().unwrap_or_else(Rational::zero);
        report.record((x != y).then(|| format!("{label} at {k:?}: {} vs {}", fmt_rat(&x), fmt_rat(&y))));
    }
}

/// Generalized binomial `C(p, m)` for any integer `p`.
fn gbinom(p: i64, m: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..m as i64 {
        acc = acc * int(p - i) / int(i + 1);
    }
    acc
}

/// Substitutes `xi_i = w_i / (1 + w_i^2)` and, if `with_dx`, multiplies by
/// `prod (1 - w_i^2)`; truncated at total `w`-degree `order`.
pub fn pull_back(s: &MultiSeries, n: usize, order: u32, with_dx: bool) -> MultiSeries {
    let mut out = MultiSeries::new();
    for (k, c) in s {
        if total(k) > order {
            continue;
        }
        let mut acc: MultiSeries = [(vec![0; n], c.clone())].into();
        for (slot, &e) in k.iter().enumerate() {
            let mut factor = MultiSeries::new();
            let mut j = 0;
            while e + 2 * j <= order {
                let mut key = vec![0; n];
                key[slot] = e + 2 * j;
                add_into(&mut factor, key, gbinom(-(e as i64), j));
                j += 1;
            }
            acc = series_mul(&acc, &factor, order);
        }
        for (key, v) in acc {
            add_into(&mut out, key, v);
        }
    }
    if with_dx {
        for slot in 0..n {
            let mut dx = MultiSeries::new();
            dx.insert(vec![0; n], Rational::one());
            let mut key = vec![0; n];
            key[slot] = 2;
            dx.insert(key, -Rational::one());
            out = series_mul(&out, &dx, order);
        }
    }
    out
}

/// `W_{0,2}(z1,z2) x'(z1) x'(z2) = 1/(z1 z2 - 1)^2` at `z_i = infinity` up to
/// total `w`-degree `order`, plus the polynomial identity behind
/// `omega_{0,2} = dz1 dz2 / (z1 - z2)^2`.
pub fn bergman_check(order: u32) -> Report {
    let mut report = Report::new(format!("cylinder identity (total order {order})"));
    let w02 = laplace_w(0, 2, order.saturating_sub(2)).xi_series();
    let lhs = pull_back(&w02, 2, order, true);
    let mut rhs = MultiSeries::new();
    let mut k = 0;
    while 2 * (k + 2) <= order {
        add_into(&mut rhs, vec![k + 2, k + 2], int(k as i64 + 1));
        k += 1;
    }
    compare(&mut report, &lhs, &rhs, 2, order, "W02 x' x'");
    // (z1 - z2)^2 + (z1^2 - 1)(z2^2 - 1) = (z1 z2 - 1)^2 as polynomials.
    let p = |terms: &[((u32, u32), i64)]| -> BTreeMap<(u32, u32), Rational> {
        terms.iter().map(|&(k, c)| (k, int(c))).collect()
    };
    let mul = |a: &BTreeMap<(u32, u32), Rational>, b: &BTreeMap<(u32, u32), Rational>| {
        let mut out: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for ((a1, a2), x) in a {
            for ((b1, b2), y) in b {
                *out.entry((a1 + b1, a2 + b2)).or_insert_with(Rational::zero) += x * y;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    };
    let diff = p(&[((1, 0), 1), ((0, 1), -1)]);
    let d1 = p(&[((2, 0), 1), ((0, 0), -1)]);
    let d2 = p(&[((0, 2), 1), ((0, 0), -1)]);
    let cross = p(&[((1, 1), 1), ((0, 0), -1)]);
    let mut sum = mul(&diff, &diff);
    for (k, c) in mul(&d1, &d2) {
        *sum.entry(k).or_insert_with(Rational::zero) += c;
    }
    sum.retain(|_, c| !c.is_zero());
    let target = mul(&cross, &cross);
    report.record((sum != target).then(|| "Bergman numerator identity fails".to_string()));
    report
}

/// Per-variable pole `(point, order)`; order 0 means the factor is 1.
pub type PoleKey = Vec<(i8, u32)>;
/// Linear combination of products of `1/(z_i - point)^order`.
pub type PolePoly = BTreeMap<PoleKey, Rational>;

fn pole_add(p: &mut PolePoly, k: PoleKey, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = p.entry(k.clone()).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        p.remove(&k);
    }
}

fn pole_mul(a: &PolePoly, b: &PolePoly) -> PolePoly {
    let mut out = PolePoly::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let key: PoleKey = ka
                .iter()
                .zip(kb)
                .map(|(&x, &y)| {
                    assert!(x.1 == 0 || y.1 == 0, "pole products in one variable");
                    if x.1 == 0 {
                        y
                    } else {
                        x
                    }
                })
                .collect();
            pole_add(&mut out, key, ca * cb);
        }
    }
    out
}

fn pole_const(c: Rational, n: usize) -> PolePoly {
    let mut p = PolePoly::new();
    pole_add(&mut p, vec![(0, 0); n], c);
    p
}

fn pole_single(slot: usize, point: i8, order: u32, c: Rational, n: usize) -> PolePoly {
    let mut key = vec![(0, 0); n];
    key[slot] = (point, order);
    let mut p = PolePoly::new();
    pole_add(&mut p, key, c);
    p
}

const EXACT: i64 = i64::MAX / 4;

/// Laurent series in `u = z - point` with `PolePoly` coefficients; terms with
/// exponent `>= prec` are unknown.
#[derive(Clone, Debug)]
struct USeries {
    val: i64,
    prec: i64,
    coeffs: Vec<PolePoly>,
}

impl USeries {
    fn zero() -> Self {
        Self {
            val: EXACT,
            prec: EXACT,
            coeffs: Vec::new(),
        }
    }

    fn from_fn(val: i64, prec: i64, n: usize, f: impl Fn(u32) -> PolePoly) -> Self {
        let len = (prec - val).max(0) as u32;
        let coeffs = (0..len).map(f).collect();
        let _ = n;
        Self { val, prec, coeffs }
    }

    fn scalar(val: i64, prec: i64, n: usize, f: impl Fn(u32) -> Rational) -> Self {
        Self::from_fn(val, prec, n, |m| pole_const(f(m), n))
    }

    fn monomial(c: PolePoly, exp: i64) -> Self {
        Self {
            val: exp,
            prec: EXACT,
            coeffs: vec![c],
        }
    }

    fn coeff(&self, e: i64) -> Option<&PolePoly> {
        if e < self.val {
            return None;
        }
        self.coeffs.get((e - self.val) as usize)
    }

    fn add(&self, o: &Self) -> Self {
        let val = self.val.min(o.val);
        let prec = self.prec.min(o.prec);
        if val >= prec {
            return Self { val, prec, coeffs: Vec::new() };
        }
        let end = |s: &Self| if s.coeffs.is_empty() { val } else { s.val + s.coeffs.len() as i64 };
        let top = end(self).max(end(o)).min(prec);
        let mut coeffs = Vec::new();
        for e in val..top {
            let mut c = self.coeff(e).cloned().unwrap_or_default();
            if let Some(x) = o.coeff(e) {
                for (k, v) in x {
                    pole_add(&mut c, k.clone(), v.clone());
                }
            }
            coeffs.push(c);
        }
        Self { val, prec, coeffs }
    }

    fn mul(&self, o: &Self) -> Self {
        let prec = self.prec.saturating_add(o.val).min(o.prec.saturating_add(self.val)).min(EXACT);
        let val = self.val + o.val;
        let len = (self.coeffs.len() + o.coeffs.len()).saturating_sub(1) as i64;
        let len = len.min((prec - val).max(0)) as usize;
        let mut coeffs = vec![PolePoly::new(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if b.is_empty() {
                    continue;
                }
                for (k, v) in pole_mul(a, b) {
                    pole_add(&mut coeffs[i + j], k, v);
                }
            }
        }
        Self { val, prec, coeffs }
    }

    fn pow(&self, k: u32, n: usize) -> Self {
        let mut acc = Self::monomial(pole_const(Rational::one(), n), 0);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `sum_m c(m) s^m` for `s` of valuation `>= 1`, with precision `<= prec`.
    fn compose(s: &Self, prec: i64, n: usize, c: impl Fn(u32) -> PolePoly) -> Self {
        assert!(s.val >= 1);
        let mut out = Self::zero();
        out.prec = prec;
        let mut power = Self::monomial(pole_const(Rational::one(), n), 0);
        let mut m = 0u32;
        while (m as i64) < prec {
            let term = power.mul(&Self::monomial(c(m), 0));
            out = out.add(&term);
            power = power.mul(s);
            m += 1;
        }
        out.val = out.val.min(0);
        out
    }
}

/// How a variable of an input differential is fed.
#[derive(Clone, Copy, Debug)]
enum Place {
    /// At the integration variable `z`.
    Direct,
    /// At `1/z`, with the pull-back factor `-1/z^2`.
    Sigma,
    /// At output variable `slot`.
    Slot(usize),
}

/// Expansions at `z = point + u` used by one residue computation.
struct Local {
    point: i8,
    n: usize,
    prec: i64,
    /// `v = 1/z - point`.
    v: USeries,
}

impl Local {
    fn new(point: i8, n: usize, prec: i64) -> Self {
        let e = int(point as i64);
        // v = -u / (1 + point u)
        let v = USeries::scalar(1, prec, n, |m| {
            let sign = if m % 2 == 0 { -Rational::one() } else { Rational::one() };
            sign * num_traits::pow(e.clone(), m as usize)
        });
        Self { point, n, prec, v }
    }

    fn eps(&self) -> Rational {
        int(self.point as i64)
    }

    /// `z^p`.
    fn z_pow(&self, p: i64) -> USeries {
        let e = self.eps();
        USeries::scalar(0, self.prec, self.n, |m| {
            gbinom(p, m) * num_traits::pow(e.clone(), ((p - m as i64).rem_euclid(2)) as usize)
        })
    }

    /// `(2 point + s)^-k` for `s` either `u` (None) or `v`.
    fn far_pole(&self, k: u32, via_v: bool) -> USeries {
        let two_e = int(2 * self.point as i64);
        let coeff = |m: u32| gbinom(-(k as i64), m) / num_traits::pow(two_e.clone(), (k + m) as usize);
        if via_v {
            USeries::compose(&self.v, self.prec, self.n, |m| pole_const(coeff(m), self.n))
        } else {
            USeries::scalar(0, self.prec, self.n, coeff)
        }
    }

    /// `1/(z - q)^k` or `1/(1/z - q)^k`.
    fn pole(&self, q: i8, k: u32, sigma: bool) -> USeries {
        if q == self.point {
            if sigma {
                // 1/v = -1/u - point
                let inv_v = USeries {
                    val: -1,
                    prec: EXACT,
                    coeffs: vec![pole_const(-Rational::one(), self.n), pole_const(-self.eps(), self.n)],
                };
                inv_v.pow(k, self.n)
            } else {
                USeries::monomial(pole_const(Rational::one(), self.n), -(k as i64))
            }
        } else {
            self.far_pole(k, sigma)
        }
    }

    /// Pull-back factor `-1/z^2`.
    fn jacobian(&self) -> USeries {
        let mut j = self.z_pow(-2);
        for c in j.coeffs.iter_mut() {
            *c = c.iter().map(|(k, v)| (k.clone(), -v)).collect();
        }
        j
    }

    /// `1/(z - z_j)^2` (or at `1/z`, with the pull-back factor) expanded at
    /// the point, coefficients in output slot `j`.
    fn bergman(&self, j: usize, sigma: bool) -> USeries {
        let point = self.point;
        let n = self.n;
        let c = move |m: u32| pole_single(j, point, m + 2, int(m as i64 + 1), n);
        if sigma {
            USeries::compose(&self.v, self.prec, n, c).mul(&self.jacobian())
        } else {
            USeries::from_fn(0, self.prec, n, c)
        }
    }

    /// An input differential with its variables placed.
    fn input(&self, omega: &PolePoly, places: &[Place]) -> USeries {
        let mut memo: HashMap<(i8, u32, bool), USeries> = HashMap::new();
        let mut out = USeries::zero();
        for (key, c) in omega {
            let mut rest = vec![(0i8, 0u32); self.n];
            let mut factors = Vec::new();
            for (s, &(q, k)) in key.iter().enumerate() {
                match places[s] {
                    Place::Slot(j) => rest[j] = (q, k),
                    Place::Direct | Place::Sigma if k == 0 => {}
                    Place::Direct => factors.push((q, k, false)),
                    Place::Sigma => factors.push((q, k, true)),
                }
            }
            let mut coeff = PolePoly::new();
            pole_add(&mut coeff, rest, c.clone());
            let mut term = USeries::monomial(coeff, 0);
            for f in factors {
                let s = memo.entry(f).or_insert_with(|| self.pole(f.0, f.1, f.2));
                term = term.mul(s);
            }
            out = out.add(&term);
        }
        for p in places {
            if matches!(p, Place::Sigma) {
                out = out.mul(&self.jacobian());
            }
        }
        out
    }

    /// `(1/(z - z_1) - 1/(1/z - z_1)) * (-z^3 / (z^2 - 1)^2)`.
    fn kernel(&self) -> USeries {
        let point = self.point;
        let n = self.n;
        let a = USeries::from_fn(0, self.prec, n, |m| pole_single(0, point, m + 1, -Rational::one(), n));
        let b = USeries::compose(&self.v, self.prec, n, |m| pole_single(0, point, m + 1, -Rational::one(), n));
        let neg_b = USeries {
            coeffs: b
                .coeffs
                .iter()
                .map(|c| c.iter().map(|(k, v)| (k.clone(), -v)).collect())
                .collect(),
            ..b
        };
        let bracket = a.add(&neg_b);
        let mut cube = self.z_pow(3);
        for c in cube.coeffs.iter_mut() {
            *c = c.iter().map(|(k, v)| (k.clone(), -v)).collect();
        }
        bracket
            .mul(&cube)
            .mul(&USeries::monomial(pole_const(Rational::one(), n), -2))
            .mul(&self.far_pole(2, false))
    }
}

/// Constant in front of the residue sum. The residue is taken in the
/// counterclockwise orientation and each ordered splitting is summed once.
pub fn kernel_normalization() -> Rational {
    Rational::new((-1).into(), 2.into())
}

/// `omega_{g,n} / (dz_1 ... dz_n)` for stable `(g, n)`, as a combination of
/// products of poles at `z_i = +-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaDifferential {
    pub g: u32,
    pub n: u32,
    terms: PolePoly,
}

impl OmegaDifferential {
    pub fn terms(&self) -> &PolePoly {
        &self.terms
    }

    /// Whether every term is a product of genuine poles at `+-1` in every
    /// variable.
    pub fn poles_confined(&self) -> bool {
        self.terms
            .keys()
            .all(|k| k.iter().all(|&(q, ord)| ord >= 1 && (q == 1 || q == -1)))
    }

    /// The one-variable rational function (only for `n = 1`).
    pub fn to_rational_fn(&self) -> Option<RationalFn> {
        if self.n != 1 {
            return None;
        }
        let mut acc = RationalFn::poly(UPoly::zero());
        for (k, c) in &self.terms {
            let (q, ord) = k[0];
            let den = UPoly::linear_root(&int(q as i64)).pow(ord);
            let term = RationalFn::new(UPoly::new(vec![c.clone()]), den).expect("nonzero denominator");
            acc = acc.add(&term);
        }
        Some(acc)
    }

    /// Expansion at `z_i = infinity` in `w_i = 1/z_i` up to total degree `order`.
    pub fn expand_at_infinity(&self, order: u32) -> MultiSeries {
        let n = self.n as usize;
        let mut out = MultiSeries::new();
        for (key, c) in &self.terms {
            let mut acc: MultiSeries = [(vec![0; n], c.clone())].into();
            for (slot, &(q, k)) in key.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                // 1/(z - q)^k = sum_m C(k + m - 1, m) q^m w^(k + m)
                let mut f = MultiSeries::new();
                let mut m = 0;
                while k + m <= order {
                    let mut e = vec![0; n];
                    e[slot] = k + m;
                    let sign = if q < 0 && m % 2 == 1 { -Rational::one() } else { Rational::one() };
                    add_into(&mut f, e, sign * binomial((k + m - 1) as i64, m as i64));
                    m += 1;
                }
                acc = series_mul(&acc, &f, order);
            }
            for (k, v) in acc {
                add_into(&mut out, k, v);
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let poles: Vec<Value> = k.iter().map(|&(q, o)| json!({"point": q, "order": o})).collect();
                json!({"poles": poles, "coeff": fmt_rat(c)})
            })
            .collect();
        json!({"g": self.g, "n": self.n, "terms": terms})
    }
}

/// Memoized residue recursion.
#[derive(Default)]
pub struct TrSolver {
    memo: HashMap<(u32, u32), PolePoly>,
}

impl TrSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn omega(&mut self, g: u32, n: u32) -> Result<OmegaDifferential, SpectralError> {
        if n == 0 || 2 * g + n <= 2 {
            return Err(SpectralError::Unstable { g, n });
        }
        let terms = self.terms(g, n);
        Ok(OmegaDifferential { g, n, terms })
    }

    fn terms(&mut self, g: u32, n: u32) -> PolePoly {
        if let Some(t) = self.memo.get(&(g, n)) {
            return t.clone();
        }
        let mut prec = 4;
        let t = loop {
            if let Some(t) = self.residues(g, n, prec) {
                break t;
            }
            prec *= 2;
        };
        self.memo.insert((g, n), t.clone());
        t
    }

    /// `None` when the working precision was insufficient.
    fn residues(&mut self, g: u32, n: u32, prec: i64) -> Option<PolePoly> {
        let nn = n as usize;
        let others: Vec<usize> = (1..nn).collect();
        let mut out = PolePoly::new();
        for point in [1i8, -1] {
            let loc = Local::new(point, nn, prec);
            let mut integrand = USeries::zero();
            if g >= 1 {
                let term = if g == 1 && n == 1 {
                    // Bergman kernel at (z, 1/z) with the pull-back: -1/(z^2 - 1)^2.
                    USeries::monomial(pole_const(-Rational::one(), nn), -2).mul(&loc.far_pole(2, false))
                } else {
                    let inner = self.terms(g - 1, n + 1);
                    let mut places = vec![Place::Direct, Place::Sigma];
                    places.extend(others.iter().map(|&j| Place::Slot(j)));
                    loc.input(&inner, &places)
                };
                integrand = integrand.add(&term);
            }
            for g1 in 0..=g {
                for mask in 0u32..(1 << others.len()) {
                    let i1: Vec<usize> = others.iter().copied().filter(|&j| mask & (1 << (j - 1)) != 0).collect();
                    let i2: Vec<usize> = others.iter().copied().filter(|&j| mask & (1 << (j - 1)) == 0).collect();
                    let g2 = g - g1;
                    if (g1 == 0 && i1.is_empty()) || (g2 == 0 && i2.is_empty()) {
                        continue;
                    }
                    let a = self.factor(&loc, g1, &i1, false);
                    let b = self.factor(&loc, g2, &i2, true);
                    integrand = integrand.add(&a.mul(&b));
                }
            }
            let full = loc.kernel().mul(&integrand);
            if full.prec <= -1 {
                return None;
            }
            if let Some(res) = full.coeff(-1) {
                for (k, v) in res {
                    pole_add(&mut out, k.clone(), v * kernel_normalization());
                }
            }
        }
        Some(out)
    }

    fn factor(&mut self, loc: &Local, g: u32, slots: &[usize], sigma: bool) -> USeries {
        if g == 0 && slots.len() == 1 {
            return loc.bergman(slots[0], sigma);
        }
        let inner = self.terms(g, slots.len() as u32 + 1);
        let mut places = vec![if sigma { Place::Sigma } else { Place::Direct }];
        places.extend(slots.iter().map(|&j| Place::Slot(j)));
        loc.input(&inner, &places)
    }
}

pub fn tr_omega(g: u32, n: u32) -> Result<OmegaDifferential, SpectralError> {
    TrSolver::new().omega(g, n)
}

/// Compares the residue recursion with the Laplace series of the counts at
/// `z_i = infinity` up to total `w`-degree `order`, and checks pole locations.
pub fn tr_check(g: u32, n: u32, order: u32) -> Result<Report, SpectralError> {
    let omega = tr_omega(g, n)?;
    let mut report = Report::new(format!("residue recursion vs counts (g={g}, n={n}, order {order})"));
    let from_counts = pull_back(&laplace_w(g, n, order.saturating_sub(n)).xi_series(), n as usize, order, true);
    compare(&mut report, &omega.expand_at_infinity(order), &from_counts, n as usize, order, "omega");
    report.record((!omega.poles_confined()).then(|| "terms outside the pole basis at +-1".to_string()));
    if let Some(f) = omega.to_rational_fn() {
        let (_, other) = f.poles_within(&[int(1), int(-1)]);
        report.record(other.then(|| "denominator has roots other than +-1".to_string()));
        let decays = f.num().degree().is_none_or(|d| d + 2 <= f.den().degree().unwrap_or(0));
        report.record((!decays).then(|| "not regular at infinity as a differential".to_string()));
    }
    Ok(report)
}

/// `u0 = x u` satisfies `u0^2 - x^2 u0 + x^2 = 0` with `u` the disc series, in
/// the window where `u` is exact.
pub fn u0_identity(order: i64) -> Report {
    let u = solve_disc(order + 2);
    let x = LaurentSeries::exact("x", [(-1, Rational::one())]);
    let u0 = u.mul(&x);
    let x2 = x.mul(&x);
    let lhs = u0.mul(&u0).sub(&x2.mul(&u0)).add(&x2);
    let mut report = Report::new(format!("tree series quadratic identity (order {order})"));
    let hi = lhs.hi().unwrap_or(order);
    for k in lhs.lo().min(-2)..=hi {
        let c = lhs.coeff(k);
        report.record((!c.is_zero()).then(|| format!("x^{}: {}", -k, fmt_rat(&c))));
    }
    report
}

/// `F_{g,n}(u(x)) = W*_{g,n}(x)` in `xi = 1/x` up to total degree `order`,
/// for `(g, n)` in `{(0,3), (1,1)}`.
pub fn norbury_substitution_check(g: u32, n: u32, order: u32) -> Result<Report, SpectralError> {
    if !matches!((g, n), (0, 3) | (1, 1)) {
        return Err(SpectralError::Unsupported { g, n });
    }
    let nn = n as usize;
    let u = solve_disc(order as i64);
    // Powers of u in one variable: powers[a][e] = [xi^e] u^a.
    let mut powers: Vec<Vec<Rational>> = vec![vec![Rational::zero(); order as usize + 1]];
    powers[0][0] = Rational::one();
    for a in 1..=order as usize {
        let mut next = vec![Rational::zero(); order as usize + 1];
        for (e, c) in powers[a - 1].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (k, uc) in u.coeffs() {
                let t = e + *k as usize;
                if t <= order as usize {
                    next[t] += c * uc;
                }
            }
        }
        powers.push(next);
    }
    let mut lhs = MultiSeries::new();
    for s in n..=order {
        for alpha in compositions(nn, s) {
            if alpha.contains(&0) {
                continue;
            }
            let nv = enumerate::norbury_n(g, n, &alpha)?;
            if nv.is_zero() {
                continue;
            }
            let mut acc: MultiSeries = [(vec![0; nn], nv)].into();
            for (slot, &a) in alpha.iter().enumerate() {
                let f: MultiSeries = powers[a as usize]
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(e, c)| {
                        let mut key = vec![0; nn];
                        key[slot] = e as u32;
                        (key, c.clone())
                    })
                    .collect();
                acc = series_mul(&acc, &f, order);
            }
            for (k, v) in acc {
                add_into(&mut lhs, k, v);
            }
        }
    }
    let rhs: MultiSeries = laplace_w(g, n, order)
        .star()
        .into_iter()
        .filter(|(k, _)| total(k) <= order)
        .collect();
    let mut report = Report::new(format!("lattice counts at the disc series vs W* (g={g}, n={n}, order {order})"));
    compare(&mut report, &lhs, &rhs, nn, order, "F(u)");
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_binomial() {
        assert_eq!(gbinom(-2, 3), int(-4));
        assert_eq!(gbinom(3, 2), int(3));
        assert_eq!(gbinom(2, 3), int(0));
    }

    #[test]
    fn kernel_bracket_is_anti_invariant() {
        let f = |z: Rational, z1: Rational| (z.clone() - &z1).recip() - (z.recip() - z1).recip();
        let z = Rational::new(3.into(), 7.into());
        let z1 = Rational::new(5.into(), 2.into());
        assert_eq!(f(z.clone(), z1.clone()), -f(z.recip(), z1));
    }

    #[test]
    fn disc_correlator_is_catalan() {
        let w = laplace_w(0, 1, 6);
        let vals: Vec<Rational> = (0..4).map(|k| w.coeff(&[2 * k])).collect();
        assert_eq!(vals, vec![int(1), int(1), int(2), int(5)]);
    }
}
