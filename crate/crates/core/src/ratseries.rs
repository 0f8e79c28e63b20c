//! Exact sparse polynomials in `t1, t2, ...` with weighted-degree truncation,
//! one-variable Laurent series in `1/x`, and dense univariate rational
//! functions.
//!
//! Variable `t_i` has weight `i`. Marker variables (`t-`, `q0`, `q1`, and the
//! explicit `t0` used when a full series is reconstructed) have weight zero and
//! carry their own exponent caps. Plain series never store `t0`: they are the
//! reduced representative of `exp(t0) * Z`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact coefficient domain.
pub type Rational = BigRational;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n!` as an exact rational.
pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    Rational::from_integer(acc)
}

/// Binomial coefficient `C(n, k)` for `0 <= k <= n`, zero otherwise.
pub fn binomial(n: i64, k: i64) -> Rational {
    if k < 0 || n < 0 || k > n {
        return Rational::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    Rational::from_integer(acc)
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_rat(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q`.
pub fn parse_rat(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("requested cap {requested} exceeds operand cap {available}")]
    CapViolation { requested: u32, available: u32 },
    #[error("exp needs a series with zero constant term")]
    ExpConstantTerm,
    #[error("log needs a series with constant term 1")]
    LogConstantTerm,
    #[error("series has weight-zero terms without a finite marker cap")]
    NotNilpotent,
    #[error("inner series must have strictly positive order in 1/x")]
    ZeroOrder,
    #[error("outer series has negative powers of the inner variable")]
    NegativePower,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
}

/// Weight-zero marker variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Marker {
    /// Counts negative boundaries (modified vacuum `exp(t- t0)`).
    TMinus,
    /// Counts bivalent vertices.
    Q0,
    /// Counts quadrivalent vertices.
    Q1,
    /// Explicit `t0`, only present after reconstruction of a full series.
    T0,
}

impl Marker {
    pub const ALL: [Marker; 4] = [Marker::TMinus, Marker::Q0, Marker::Q1, Marker::T0];

    fn slot(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            Marker::TMinus => "tm",
            Marker::Q0 => "q0",
            Marker::Q1 => "q1",
            Marker::T0 => "t0",
        }
    }
}

/// `t^mu` times a marker monomial. Exponent lists are sorted and zero-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<(u32, u32)>,
    markers: [u32; 4],
    deg: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds `prod t_i^e` from `(i, e)` pairs; repeated indices accumulate.
    ///
    /// # Panics
    /// Panics on index 0: `t0` is a marker, never a regular variable.
    pub fn from_exps(pairs: &[(u32, u32)]) -> Self {
        let mut m = Self::one();
        for &(i, e) in pairs {
            m = m.times_var(i, e);
        }
        m
    }

    /// Builds `t^mu` from a list of parts, e.g. `[2, 1, 1]` is `t1^2 t2`.
    pub fn from_parts(parts: &[u32]) -> Self {
        let mut m = Self::one();
        for &p in parts {
            m = m.times_var(p, 1);
        }
        m
    }

    pub fn var(i: u32) -> Self {
        Self::one().times_var(i, 1)
    }

    pub fn marker_only(m: Marker, e: u32) -> Self {
        Self::one().with_marker(m, e)
    }

    pub fn times_var(mut self, i: u32, e: u32) -> Self {
        assert!(i >= 1, "t0 is represented by Marker::T0");
        if e == 0 {
            return self;
        }
        match self.exps.binary_search_by_key(&i, |&(k, _)| k) {
            Ok(pos) => self.exps[pos].1 += e,
            Err(pos) => self.exps.insert(pos, (i, e)),
        }
        self.deg += i * e;
        self
    }

    pub fn with_marker(mut self, m: Marker, e: u32) -> Self {
        self.markers[m.slot()] += e;
        self
    }

    /// Removes one factor `t_i`; `None` if absent.
    pub fn without_var(&self, i: u32) -> Option<Self> {
        let pos = self.exps.binary_search_by_key(&i, |&(k, _)| k).ok()?;
        let mut out = self.clone();
        if out.exps[pos].1 == 1 {
            out.exps.remove(pos);
        } else {
            out.exps[pos].1 -= 1;
        }
        out.deg -= i;
        Some(out)
    }

    /// Removes one factor of marker `m`; `None` if absent.
    pub fn without_marker(&self, m: Marker) -> Option<Self> {
        if self.markers[m.slot()] == 0 {
            return None;
        }
        let mut out = self.clone();
        out.markers[m.slot()] -= 1;
        Some(out)
    }

    pub fn exp(&self, i: u32) -> u32 {
        if i == 0 {
            return self.markers[Marker::T0.slot()];
        }
        self.exps
            .binary_search_by_key(&i, |&(k, _)| k)
            .map(|p| self.exps[p].1)
            .unwrap_or(0)
    }

    pub fn marker(&self, m: Marker) -> u32 {
        self.markers[m.slot()]
    }

    /// The same monomial with marker `m` removed entirely.
    pub fn strip_marker(&self, m: Marker) -> Self {
        let mut out = self.clone();
        out.markers[m.slot()] = 0;
        out
    }

    /// Weighted degree `sum i * mu(i)`.
    pub fn degree(&self) -> u32 {
        self.deg
    }

    /// Number of parts `sum mu(i)`.
    pub fn n_parts(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    /// Largest variable index present (0 when constant).
    pub fn max_index(&self) -> u32 {
        self.exps.last().map(|&(i, _)| i).unwrap_or(0)
    }

    /// `(i, mu(i))` pairs, increasing in `i`.
    pub fn exps(&self) -> &[(u32, u32)] {
        &self.exps
    }

    /// Parts as a non-increasing list.
    pub fn parts(&self) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.n_parts() as usize);
        for &(i, e) in self.exps.iter().rev() {
            v.extend(std::iter::repeat_n(i, e as usize));
        }
        v
    }

    /// `mu! = prod mu(i)!` over regular variables.
    pub fn mu_factorial(&self) -> Rational {
        self.exps
            .iter()
            .fold(Rational::one(), |acc, &(_, e)| acc * factorial(e))
    }

    pub fn has_markers(&self) -> bool {
        self.markers.iter().any(|&e| e > 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for &(i, e) in &other.exps {
            out = out.times_var(i, e);
        }
        for m in Marker::ALL {
            out.markers[m.slot()] += other.markers[m.slot()];
        }
        out
    }

    fn fits(&self, caps: &Caps) -> bool {
        self.deg <= caps.degree
            && Marker::ALL
                .iter()
                .all(|m| self.markers[m.slot()] <= caps.markers[m.slot()])
    }
}

impl Ord for Monomial {
    /// Graded order: weighted degree first, then the exponent vector read from
    /// `t1` upwards (larger leading exponents later), then markers.
    fn cmp(&self, other: &Self) -> Ordering {
        self.deg
            .cmp(&other.deg)
            .then_with(|| {
                let mut a = self.exps.iter();
                let mut b = other.exps.iter();
                loop {
                    match (a.next(), b.next()) {
                        (None, None) => return Ordering::Equal,
                        (Some(_), None) => return Ordering::Greater,
                        (None, Some(_)) => return Ordering::Less,
                        (Some(&(i, e)), Some(&(j, f))) => {
                            if i != j {
                                return j.cmp(&i);
                            }
                            if e != f {
                                return e.cmp(&f);
                            }
                        }
                    }
                }
            })
            .then_with(|| self.markers.cmp(&other.markers))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors = Vec::new();
        for m in Marker::ALL {
            match self.markers[m.slot()] {
                0 => {}
                1 => factors.push(m.name().to_string()),
                e => factors.push(format!("{}^{}", m.name(), e)),
            }
        }
        for &(i, e) in &self.exps {
            if e == 1 {
                factors.push(format!("t{i}"));
            } else {
                factors.push(format!("t{i}^{e}"));
            }
        }
        if factors.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", factors.join("*"))
        }
    }
}

/// Truncation caps: maximal weighted degree and per-marker exponent caps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub degree: u32,
    pub markers: [u32; 4],
}

impl Caps {
    pub const UNBOUNDED: u32 = u32::MAX;

    pub fn degree(degree: u32) -> Self {
        Self {
            degree,
            markers: [Self::UNBOUNDED; 4],
        }
    }

    pub fn with_marker(mut self, m: Marker, cap: u32) -> Self {
        self.markers[m.slot()] = cap;
        self
    }

    pub fn marker_cap(&self, m: Marker) -> u32 {
        self.markers[m.slot()]
    }

    /// Componentwise minimum.
    pub fn meet(&self, other: &Caps) -> Caps {
        let mut markers = self.markers;
        for (a, b) in markers.iter_mut().zip(other.markers.iter()) {
            *a = (*a).min(*b);
        }
        Caps {
            degree: self.degree.min(other.degree),
            markers,
        }
    }
}

/// Sparse polynomial truncated to `caps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
    caps: Caps,
}

impl Poly {
    pub fn zero(caps: Caps) -> Self {
        Self {
            terms: BTreeMap::new(),
            caps,
        }
    }

    pub fn one(caps: Caps) -> Self {
        Self::constant(Rational::one(), caps)
    }

    pub fn constant(c: Rational, caps: Caps) -> Self {
        let mut p = Self::zero(caps);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn monomial(m: Monomial, c: Rational, caps: Caps) -> Self {
        let mut p = Self::zero(caps);
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(iter: I, caps: Caps) -> Self {
        let mut p = Self::zero(caps);
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// Adds `c * m`, dropping it when it falls outside the caps.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || !m.fits(&self.caps) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    /// Largest weighted degree present.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    /// Re-truncates to tighter caps.
    pub fn truncate(&self, caps: Caps) -> Self {
        let caps = self.caps.meet(&caps);
        Self::from_terms(
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())),
            caps,
        )
    }

    /// Weighted-degree-`w` component.
    pub fn component(&self, w: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.degree() == w)
                .map(|(m, c)| (m.clone(), c.clone())),
            self.caps,
        )
    }

    /// Terms with the given exponent of marker `m`, with that marker removed.
    pub fn marker_slice(&self, m: Marker, e: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(mono, _)| mono.marker(m) == e)
                .map(|(mono, c)| (mono.strip_marker(m), c.clone())),
            self.caps,
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.caps);
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x * c))
                .collect(),
            caps: self.caps,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self {
            terms: self.terms.clone(),
            caps: self.caps.meet(&other.caps),
        };
        if out.caps != self.caps {
            out = out.truncate(out.caps);
        }
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Product truncated at weighted degree `cap_d`; marker caps are the
    /// componentwise minimum of the operands'.
    pub fn mul(&self, other: &Self, cap_d: u32) -> Result<Self, SeriesError> {
        poly_mul(self, other, cap_d)
    }

    /// Multiplies every term by a monomial.
    pub fn times_monomial(&self, m: &Monomial, c: &Rational) -> Self {
        Self::from_terms(
            self.terms.iter().map(|(k, x)| (k.mul(m), x * c)),
            self.caps,
        )
    }

    /// Replaces caps without touching terms beyond dropping out-of-cap ones.
    pub fn with_caps(&self, caps: Caps) -> Self {
        Self::from_terms(
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())),
            caps,
        )
    }

    /// Multiplies by `exp(s * t0)` truncated at `t0^t0_cap`, turning a reduced
    /// series into the full one (with `t0` carried as `Marker::T0`).
    pub fn reconstruct_t0(&self, shift: &Poly, t0_cap: u32) -> Result<Self, SeriesError> {
        let caps = self.caps.with_marker(Marker::T0, t0_cap);
        let mut out = Poly::zero(caps);
        let mut power = Poly::one(caps);
        for k in 0..=t0_cap {
            let term = power
                .times_monomial(&Monomial::marker_only(Marker::T0, k), &factorial(k).recip());
            out = out.add(&poly_mul(&self.with_caps(caps), &term, caps.degree)?);
            power = poly_mul(&power, &shift.with_caps(caps), caps.degree)?;
        }
        Ok(out)
    }

    /// Substitutes marker `m := 1`, summing slices.
    pub fn forget_marker(&self, m: Marker) -> Self {
        let mut caps = self.caps;
        caps.markers[m.slot()] = Caps::UNBOUNDED;
        Self::from_terms(
            self.terms.iter().map(|(k, c)| (k.strip_marker(m), c.clone())),
            caps,
        )
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let is_one = m == &Monomial::one();
            if a.is_one() && !is_one {
                write!(f, "{m}")?;
            } else if is_one {
                write!(f, "{}", fmt_rat(&a))?;
            } else {
                write!(f, "{}*{m}", fmt_rat(&a))?;
            }
        }
        Ok(())
    }
}

/// Truncated product. Both operands must be exact at least to `cap_d`.
pub fn poly_mul(a: &Poly, b: &Poly, cap_d: u32) -> Result<Poly, SeriesError> {
    for p in [a, b] {
        if p.caps.degree < cap_d {
            return Err(SeriesError::CapViolation {
                requested: cap_d,
                available: p.caps.degree,
            });
        }
    }
    let mut caps = a.caps.meet(&b.caps);
    caps.degree = cap_d;
    let mut out = Poly::zero(caps);
    for (ma, ca) in &a.terms {
        if ma.degree() > cap_d {
            continue;
        }
        for (mb, cb) in &b.terms {
            if ma.degree() + mb.degree() > cap_d {
                continue;
            }
            out.add_term(ma.mul(mb), ca * cb);
        }
    }
    Ok(out)
}

/// Checks that repeated multiplication by `p` terminates under the caps.
fn check_nilpotent(p: &Poly) -> Result<(), SeriesError> {
    for m in p.terms.keys() {
        if m.degree() == 0 {
            let bounded = Marker::ALL
                .iter()
                .any(|&mk| m.marker(mk) > 0 && p.caps.marker_cap(mk) != Caps::UNBOUNDED);
            if !bounded {
                return Err(SeriesError::NotNilpotent);
            }
        }
    }
    Ok(())
}

/// `exp(p)` truncated at `cap_d`; `p` must have zero constant term.
pub fn poly_exp(p: &Poly, cap_d: u32) -> Result<Poly, SeriesError> {
    if !p.constant_term().is_zero() {
        return Err(SeriesError::ExpConstantTerm);
    }
    check_nilpotent(p)?;
    let p = p.truncate(Caps {
        degree: cap_d,
        ..p.caps
    });
    let mut out = Poly::one(p.caps);
    let mut power = Poly::one(p.caps);
    let mut k = 0u32;
    loop {
        k += 1;
        power = poly_mul(&power, &p, cap_d)?.scale(&int(k as i64).recip());
        if power.is_zero() {
            return Ok(out);
        }
        out = out.add(&power);
    }
}

/// `log(p)` truncated at `cap_d`; `p` must have constant term 1.
pub fn poly_log(p: &Poly, cap_d: u32) -> Result<Poly, SeriesError> {
    if !p.constant_term().is_one() {
        return Err(SeriesError::LogConstantTerm);
    }
    let p = p.truncate(Caps {
        degree: cap_d,
        ..p.caps
    });
    let r = p.sub(&Poly::one(p.caps));
    check_nilpotent(&r)?;
    let mut out = Poly::zero(p.caps);
    let mut power = Poly::one(p.caps);
    let mut k = 0i64;
    loop {
        k += 1;
        power = poly_mul(&power, &r, cap_d)?;
        if power.is_zero() {
            return Ok(out);
        }
        let sign = if k % 2 == 1 { int(1) } else { int(-1) };
        out = out.add(&power.scale(&(sign / int(k))));
    }
}

/// Series `sum c_k var^(-k)`.
///
/// Every exponent `k < lo` is known to vanish; coefficients are exact for
/// `k <= hi` (`hi == None` means the series is an exact finite sum).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    pub var: String,
    coeffs: BTreeMap<i64, Rational>,
    lo: i64,
    hi: Option<i64>,
}

impl LaurentSeries {
    /// Exact finite series from `(k, c)` pairs meaning `c * var^(-k)`.
    pub fn exact<I: IntoIterator<Item = (i64, Rational)>>(var: &str, iter: I) -> Self {
        let coeffs: BTreeMap<i64, Rational> =
            iter.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let lo = coeffs.keys().next().copied().unwrap_or(i64::MAX / 4);
        Self {
            var: var.to_string(),
            coeffs,
            lo,
            hi: None,
        }
    }

    /// Series known up to exponent `hi`, with all exponents below `lo` zero.
    pub fn windowed<I: IntoIterator<Item = (i64, Rational)>>(
        var: &str,
        iter: I,
        lo: i64,
        hi: i64,
    ) -> Self {
        let coeffs = iter
            .into_iter()
            .filter(|(k, c)| !c.is_zero() && *k >= lo && *k <= hi)
            .collect();
        Self {
            var: var.to_string(),
            coeffs,
            lo,
            hi: Some(hi),
        }
    }

    pub fn coeff(&self, k: i64) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&i64, &Rational)> {
        self.coeffs.iter()
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> Option<i64> {
        self.hi
    }

    /// Order in `1/var`: the smallest exponent with a possibly nonzero term.
    pub fn order(&self) -> i64 {
        self.lo
    }

    fn narrowed(mut self, hi: Option<i64>) -> Self {
        if let Some(h) = hi {
            self.coeffs.retain(|k, _| *k <= h);
        }
        self.hi = hi;
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let hi = min_opt(self.hi, other.hi);
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let e = coeffs.entry(*k).or_insert_with(Rational::zero);
            *e += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Self {
            var: self.var.clone(),
            coeffs,
            lo: self.lo.min(other.lo),
            hi,
        }
        .narrowed(hi)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        out.coeffs = self
            .coeffs
            .iter()
            .map(|(k, x)| (*k, x * c))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Multiplies by `var^p`, i.e. shifts exponents of `1/var` by `-p`.
    pub fn times_var_pow(&self, p: i64) -> Self {
        Self {
            var: self.var.clone(),
            coeffs: self.coeffs.iter().map(|(k, c)| (k - p, c.clone())).collect(),
            lo: self.lo - p,
            hi: self.hi.map(|h| h - p),
        }
    }

    /// Product with the window narrowed to what both factors determine.
    pub fn mul(&self, other: &Self) -> Self {
        laurent_mul(self, other)
    }

    /// Checks that every coefficient in the exact window vanishes.
    pub fn is_zero_in_window(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in &self.coeffs {
            parts.push(format!("{}*{}^{}", fmt_rat(c), self.var, -k));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        match self.hi {
            Some(h) => write!(f, "{} + O({}^{})", parts.join(" + "), self.var, -(h + 1)),
            None => write!(f, "{}", parts.join(" + ")),
        }
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Product of two Laurent series in `1/var`.
pub fn laurent_mul(a: &LaurentSeries, b: &LaurentSeries) -> LaurentSeries {
    let hi = min_opt(a.hi.map(|h| h + b.lo), b.hi.map(|h| h + a.lo));
    let mut coeffs: BTreeMap<i64, Rational> = BTreeMap::new();
    for (ka, ca) in &a.coeffs {
        for (kb, cb) in &b.coeffs {
            let k = ka + kb;
            if hi.is_some_and(|h| k > h) {
                continue;
            }
            *coeffs.entry(k).or_insert_with(Rational::zero) += ca * cb;
        }
    }
    coeffs.retain(|_, c| !c.is_zero());
    LaurentSeries {
        var: a.var.clone(),
        coeffs,
        lo: a.lo + b.lo,
        hi,
    }
}

/// `f(g(x))` for an exact polynomial `f` in the inner variable and `g` of
/// strictly positive order in `1/x`.
pub fn laurent_compose(f: &LaurentSeries, g: &LaurentSeries) -> Result<LaurentSeries, SeriesError> {
    if f.coeffs.keys().any(|&k| k > 0) {
        return Err(SeriesError::NegativePower);
    }
    if g.lo < 1 {
        return Err(SeriesError::ZeroOrder);
    }
    let max_pow = f.coeffs.keys().map(|&k| -k).max().unwrap_or(0);
    let mut out = LaurentSeries::exact(&g.var, std::iter::empty());
    out.lo = 0;
    let mut power = LaurentSeries::exact(&g.var, [(0, Rational::one())]);
    for j in 0..=max_pow {
        let c = f.coeff(-j);
        if !c.is_zero() {
            out = out.add(&power.scale(&c));
        }
        if j < max_pow {
            power = laurent_mul(&power, g);
        }
    }
    out.lo = out.coeffs.keys().next().copied().unwrap_or(out.lo).max(0);
    Ok(out)
}

/// The solution `u` in `x^-1 Q[[x^-2]]` of `u^2 - x u + 1 = 0`, exact through
/// `x^-cap`, by the fixed point `u <- (1 + u^2) / x`.
pub fn solve_disc(cap: i64) -> LaurentSeries {
    assert!(cap >= 1, "cap must be at least 1");
    let one = LaurentSeries::exact("x", [(0, Rational::one())]);
    let mut u = LaurentSeries::windowed("x", [(1, Rational::one())], 1, 1);
    while u.hi.unwrap_or(0) < cap {
        let sq = laurent_mul(&u, &u);
        u = one.add(&sq).times_var_pow(-1);
        let hi = u.hi.unwrap_or(cap).min(cap);
        u = u.narrowed(Some(hi));
        u.lo = 1;
    }
    u
}

/// Dense univariate polynomial, coefficient `k` at index `k`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UPoly(Vec<Rational>);

impl UPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Self(c)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn one() -> Self {
        Self(vec![Rational::one()])
    }

    /// `z - a`.
    pub fn linear_root(a: &Rational) -> Self {
        Self::new(vec![-a.clone(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Rational::zero();
        Self::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn divrem(&self, d: &Self) -> Result<(Self, Self), SeriesError> {
        if d.is_zero() {
            return Err(SeriesError::ZeroDivisor);
        }
        let mut r = self.0.clone();
        let dn = d.0.len();
        let lead = d.lead();
        if r.len() < dn {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![Rational::zero(); r.len() - dn + 1];
        for i in (0..q.len()).rev() {
            let c = &r[i + dn - 1] / &lead;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[i + j] -= &c * dj;
                }
            }
            q[i] = c;
        }
        Ok((Self::new(q), Self::new(r)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let l = a.lead();
            a.scale(&l.recip())
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Multiplicity of `a` as a root.
    pub fn root_multiplicity(&self, a: &Rational) -> usize {
        let lin = Self::linear_root(a);
        let mut p = self.clone();
        let mut k = 0;
        while !p.is_zero() {
            let (q, r) = p.divrem(&lin).expect("nonzero divisor");
            if !r.is_zero() {
                break;
            }
            p = q;
            k += 1;
        }
        k
    }

    /// `p(a + h)` as a polynomial in `h`.
    pub fn shift(&self, a: &Rational) -> Self {
        let mut out = Self::zero();
        let base = Self::new(vec![a.clone(), Rational::one()]);
        for c in self.0.iter().rev() {
            out = out.mul(&base).add(&Self::new(vec![c.clone()]));
        }
        out
    }
}

/// `num / den` in lowest terms with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFn {
    num: UPoly,
    den: UPoly,
}

impl RationalFn {
    pub fn new(num: UPoly, den: UPoly) -> Result<Self, SeriesError> {
        if den.is_zero() {
            return Err(SeriesError::ZeroDivisor);
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_zero() || g.degree() == Some(0) {
            (num, den)
        } else {
            (num.divrem(&g)?.0, den.divrem(&g)?.0)
        };
        if num.is_zero() {
            den = UPoly::one();
        }
        let l = den.lead();
        if !l.is_one() {
            num = num.scale(&l.recip());
            den = den.scale(&l.recip());
        }
        Ok(Self { num, den })
    }

    pub fn poly(p: UPoly) -> Self {
        Self {
            num: p,
            den: UPoly::one(),
        }
    }

    pub fn num(&self) -> &UPoly {
        &self.num
    }

    pub fn den(&self) -> &UPoly {
        &self.den
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
        .expect("nonzero denominators")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.num.scale(c), self.den.clone()).expect("nonzero denominator")
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero denominators")
    }

    pub fn div(&self, o: &Self) -> Result<Self, SeriesError> {
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    /// Laurent expansion at `z = a` in `h = z - a`: returns `(v, c)` with
    /// `f = sum_k c[k] h^(v + k)` for `k < len`.
    pub fn expand_at(&self, a: &Rational, len: usize) -> (i64, Vec<Rational>) {
        let n = self.num.shift(a);
        let d = self.den.shift(a);
        let vn = n.coeffs().iter().take_while(|c| c.is_zero()).count();
        let vd = d.coeffs().iter().take_while(|c| c.is_zero()).count();
        let n = &n.coeffs()[vn.min(n.coeffs().len())..];
        let d = &d.coeffs()[vd..];
        (vn as i64 - vd as i64, series_div(n, d, len))
    }

    /// Expansion at infinity in `w = 1/z`: `f = sum_k c[k] w^(v + k)`.
    pub fn expand_at_infinity(&self, len: usize) -> (i64, Vec<Rational>) {
        let rev = |p: &UPoly| -> Vec<Rational> { p.coeffs().iter().rev().cloned().collect() };
        let dn = self.num.degree().map_or(0, |d| d as i64);
        let dd = self.den.degree().unwrap_or(0) as i64;
        (dd - dn, series_div(&rev(&self.num), &rev(&self.den), len))
    }

    /// Multiplicity of each root of the denominator among the given points,
    /// and whether the denominator has any other root.
    pub fn poles_within(&self, points: &[Rational]) -> (Vec<usize>, bool) {
        let mut rest = self.den.clone();
        let mut mults = Vec::new();
        for p in points {
            let k = rest.root_multiplicity(p);
            let lin = UPoly::linear_root(p).pow(k as u32);
            rest = rest.divrem(&lin).expect("nonzero").0;
            mults.push(k);
        }
        (mults, rest.degree().is_some_and(|d| d > 0))
    }
}

/// First `len` coefficients of `n / d` as power series, `d[0] != 0`.
fn series_div(n: &[Rational], d: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(len);
    let inv = d[0].recip();
    for k in 0..len {
        let mut acc = n.get(k).cloned().unwrap_or_else(Rational::zero);
        for j in 1..=k.min(d.len().saturating_sub(1)) {
            acc -= &d[j] * &out[k - j];
        }
        out.push(acc * &inv);
    }
    out
}

/// Exact `n`-th Catalan number.
pub fn catalan(n: u32) -> Rational {
    binomial(2 * n as i64, n as i64) / int(n as i64 + 1)
}

/// Exact gcd helper for integer rationals.
pub fn int_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}
