//! Partition function `Z(q) = exp(q W1) exp(t0)` computed layer by layer,
//! together with its bivalent refinement `exp(q0 W0 + q1 W1)`, the connected
//! logarithm and extraction of automorphism-weighted counts.
//!
//! Every layer is stored in reduced form (the factor `exp(t0)`, or
//! `exp(t- t0)` when negative boundaries are marked, is implicit).

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::diffop::{self, DiffOp, DiffOpError};
use crate::ratseries::{
    int, poly_mul, Caps, Marker, Monomial, Poly, Rational, SeriesError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Operator(#[from] DiffOpError),
    #[error("layer (m={m}, d={d}) was not computed")]
    MissingLayer { m: u32, d: u32 },
    #[error("resolving n_minus needs a series computed with the t- marker")]
    MarkerDisabled,
    #[error("series layer 0 must equal 1")]
    BadVacuum,
}

/// What a `QSeries` holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// Layers `(m, d)`: `m` bivalent and `d` quadrivalent vertices' worth of
    /// Euler degree. Plain quadrivalent series only have `m = 0`.
    Graded,
    /// Layers indexed by the total `k = m + d` (stored at `(0, k)`).
    Diagonal,
    /// One-negative-boundary series with explicit `t0` in layer 0.
    OneBoundary,
}

/// Layered series; layer `(m, d)` has weighted degree `2d + m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    pub kind: SeriesKind,
    pub marked: bool,
    pub connected: bool,
    layers: BTreeMap<(u32, u32), Poly>,
}

impl QSeries {
    pub fn layer(&self, d: u32) -> Option<&Poly> {
        self.layers.get(&(0, d))
    }

    pub fn layer2(&self, m: u32, d: u32) -> Option<&Poly> {
        self.layers.get(&(m, d))
    }

    pub fn layers(&self) -> impl Iterator<Item = (&(u32, u32), &Poly)> {
        self.layers.iter()
    }

    pub fn d_max(&self) -> u32 {
        self.layers.keys().map(|&(_, d)| d).max().unwrap_or(0)
    }

    pub fn m_max(&self) -> u32 {
        self.layers.keys().map(|&(m, _)| m).max().unwrap_or(0)
    }

    /// Sum of all layers with `q0 = q1 = 1`, truncated at `cap`.
    pub fn total(&self, cap: u32) -> Poly {
        let caps = Caps::degree(cap);
        let mut out = Poly::zero(caps);
        for p in self.layers.values() {
            out = out.add(&p.with_caps(caps));
        }
        out
    }
}

fn layer_caps(m: u32, d: u32) -> Caps {
    Caps::degree(2 * d + m)
}

fn flow_ops(with_marker: bool) -> (DiffOp, DiffOp) {
    if with_marker {
        (DiffOp::w0_marked(), DiffOp::w1_marked())
    } else {
        (DiffOp::w0_prime(), DiffOp::w1_prime())
    }
}

fn step(op: &DiffOp, p: &Poly, k: u32, m: u32, d: u32) -> Result<Poly, PartitionError> {
    let caps = layer_caps(m, d);
    let img = diffop::apply(op, &p.with_caps(Caps { degree: caps.degree - op_shift(op), ..p.caps() }), caps.degree)?;
    Ok(img.scale(&int(k as i64).recip()).with_caps(caps))
}

fn op_shift(op: &DiffOp) -> u32 {
    op.grading().min_shift() as u32
}

/// `Z_0 = 1`, `(d+1) Z_{d+1} = W1' Z_d`, for `d <= d_max`.
pub fn partition_function(d_max: u32, with_marker: bool) -> QSeries {
    partition_function_bivalent(0, d_max, with_marker)
}

/// Which flow is run first when filling the `(m, d)` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowOrder {
    QuadFirst,
    BivalentFirst,
}

/// Bigraded layers for `m <= m_max`, `d <= d_max`.
pub fn partition_function_bivalent(m_max: u32, d_max: u32, with_marker: bool) -> QSeries {
    bivalent_with_order(m_max, d_max, with_marker, FlowOrder::QuadFirst)
}

pub fn bivalent_with_order(m_max: u32, d_max: u32, with_marker: bool, order: FlowOrder) -> QSeries {
    let (w0, w1) = flow_ops(with_marker);
    let mut layers = BTreeMap::new();
    layers.insert((0, 0), Poly::one(layer_caps(0, 0)));
    let expect = "operator caps are consistent by construction";
    match order {
        FlowOrder::QuadFirst => {
            for d in 1..=d_max {
                let prev = &layers[&(0, d - 1)];
                let next = step(&w1, prev, d, 0, d).expect(expect);
                layers.insert((0, d), next);
            }
            for d in 0..=d_max {
                for m in 1..=m_max {
                    let prev = &layers[&(m - 1, d)];
                    let next = step(&w0, prev, m, m, d).expect(expect);
                    layers.insert((m, d), next);
                }
            }
        }
        FlowOrder::BivalentFirst => {
            for m in 1..=m_max {
                let prev = &layers[&(m - 1, 0)];
                let next = step(&w0, prev, m, m, 0).expect(expect);
                layers.insert((m, 0), next);
            }
            for m in 0..=m_max {
                for d in 1..=d_max {
                    let prev = &layers[&(m, d - 1)];
                    let next = step(&w1, prev, d, m, d).expect(expect);
                    layers.insert((m, d), next);
                }
            }
        }
    }
    QSeries {
        kind: SeriesKind::Graded,
        marked: with_marker,
        connected: false,
        layers,
    }
}

/// Logarithm in the total grading `k = m + d`:
/// `k Z_(m,d) = sum k' C_(m',d') Z_(m-m',d-d')`.
pub fn connected(z: &QSeries) -> Result<QSeries, PartitionError> {
    let vac = z.layers.get(&(0, 0)).ok_or(PartitionError::MissingLayer { m: 0, d: 0 })?;
    if vac.len() != 1 || !vac.constant_term().is_one() {
        return Err(PartitionError::BadVacuum);
    }
    let mut c: BTreeMap<(u32, u32), Poly> = BTreeMap::new();
    c.insert((0, 0), Poly::zero(layer_caps(0, 0)));
    let keys: Vec<(u32, u32)> = {
        let mut k: Vec<_> = z.layers.keys().copied().filter(|&k| k != (0, 0)).collect();
        k.sort_by_key(|&(m, d)| (m + d, m, d));
        k
    };
    for &(m, d) in &keys {
        let caps = layer_caps(m, d);
        let total = m + d;
        let mut acc = z.layers[&(m, d)].clone();
        for (&(m1, d1), c1) in c.iter() {
            if (m1, d1) == (0, 0) || (m1, d1) == (m, d) || m1 > m || d1 > d {
                continue;
            }
            let rest = match z.layers.get(&(m - m1, d - d1)) {
                Some(r) => r,
                None => return Err(PartitionError::MissingLayer { m: m - m1, d: d - d1 }),
            };
            let prod = poly_mul(&c1.with_caps(caps), &rest.with_caps(caps), caps.degree)?;
            acc = acc.sub(&prod.scale(&(int((m1 + d1) as i64) / int(total as i64))));
        }
        c.insert((m, d), acc.with_caps(caps));
    }
    Ok(QSeries {
        kind: z.kind,
        marked: z.marked,
        connected: true,
        layers: c,
    })
}

/// Key of a weighted count `h_{g, n+, n-, m}(alpha)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountKey {
    pub g: u32,
    pub n_plus: u32,
    pub n_minus: u32,
    /// Positive-face perimeters, kept non-increasing.
    pub alpha: Vec<u32>,
    /// Bivalent vertices.
    pub m: u32,
}

impl CountKey {
    pub fn new(g: u32, n_plus: u32, n_minus: u32, alpha: &[u32]) -> Self {
        Self::bivalent(g, n_plus, n_minus, alpha, 0)
    }

    pub fn bivalent(g: u32, n_plus: u32, n_minus: u32, alpha: &[u32], m: u32) -> Self {
        let mut alpha = alpha.to_vec();
        alpha.sort_unstable_by(|a, b| b.cmp(a));
        Self {
            g,
            n_plus,
            n_minus,
            alpha,
            m,
        }
    }

    /// `2g - 2 + n+ + n-`, or `None` when negative.
    pub fn euler_degree(&self) -> Option<u32> {
        let e = 2 * self.g as i64 - 2 + self.n_plus as i64 + self.n_minus as i64;
        (e >= 0).then_some(e as u32)
    }

    pub fn is_stable(&self) -> bool {
        match self.euler_degree() {
            Some(0) => self.n_plus == 1 && self.n_minus == 1 && self.m >= 1,
            Some(_) => true,
            None => false,
        }
    }

    /// Stable, well-formed, and satisfying the edge-count identity.
    pub fn is_admissible(&self) -> bool {
        let Some(d) = self.euler_degree() else {
            return false;
        };
        self.is_stable()
            && self.alpha.len() == self.n_plus as usize
            && self.n_minus >= 1
            && self.alpha.iter().all(|&a| a > 0)
            && self.alpha.iter().sum::<u32>() == 2 * d + self.m
    }
}

/// `h = mu! [t^mu q^d t-^{n-}] C / prod alpha`; zero for inadmissible keys.
pub fn count(c: &QSeries, key: &CountKey) -> Result<Rational, PartitionError> {
    if !c.marked {
        return Err(PartitionError::MarkerDisabled);
    }
    if !key.is_admissible() {
        return Ok(Rational::zero());
    }
    let d = key.euler_degree().unwrap_or(0);
    let layer = c
        .layers
        .get(&(key.m, d))
        .ok_or(PartitionError::MissingLayer { m: key.m, d })?;
    let mono = Monomial::from_parts(&key.alpha).with_marker(Marker::TMinus, key.n_minus);
    let prod: u64 = key.alpha.iter().map(|&a| a as u64).product();
    Ok(mono.mu_factorial() * layer.coeff(&mono) / int(prod as i64))
}

/// Every nonzero count stored in a connected marked series.
pub fn count_table(c: &QSeries) -> Result<Vec<(CountKey, Rational)>, PartitionError> {
    if !c.marked {
        return Err(PartitionError::MarkerDisabled);
    }
    let mut out = Vec::new();
    for (&(m, d), layer) in &c.layers {
        for (mono, coef) in layer.terms() {
            let n_minus = mono.marker(Marker::TMinus);
            let n_plus = mono.n_parts();
            let twice_g = d as i64 - n_plus as i64 - n_minus as i64 + 2;
            if twice_g < 0 || twice_g % 2 != 0 {
                continue;
            }
            let key = CountKey::bivalent((twice_g / 2) as u32, n_plus, n_minus, &mono.parts(), m);
            let prod: u64 = key.alpha.iter().map(|&a| a as u64).product();
            out.push((key, mono.mu_factorial() * coef / int(prod as i64)));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Diagonal series `sum_{m+d=k} Z_(m,d)` for `k <= k_max`.
pub fn integral_points_series(k_max: u32, with_marker: bool) -> QSeries {
    let z = partition_function_bivalent(k_max, k_max, with_marker);
    diagonal(&z, k_max)
}

/// Diagonal specialization of a bigraded series.
pub fn diagonal(z: &QSeries, k_max: u32) -> QSeries {
    let mut layers = BTreeMap::new();
    for k in 0..=k_max {
        let caps = Caps::degree(2 * k);
        let mut acc = Poly::zero(caps);
        for m in 0..=k {
            if let Some(p) = z.layers.get(&(m, k - m)) {
                acc = acc.add(&p.with_caps(caps));
            }
        }
        layers.insert((0, k), acc);
    }
    QSeries {
        kind: SeriesKind::Diagonal,
        marked: z.marked,
        connected: z.connected,
        layers,
    }
}

/// Layers of `[t-^1]` of the marked full series: layer 0 is `t0`, layer
/// `d >= 1` is the `t-^1` slice of the reduced layer (its `t-^0` part is 1
/// only at `d = 0`).
pub fn z_one(d_max: u32) -> QSeries {
    let z = partition_function(d_max, true);
    let mut layers = BTreeMap::new();
    layers.insert(
        (0, 0),
        Poly::monomial(Monomial::marker_only(Marker::T0, 1), Rational::one(), layer_caps(0, 0)),
    );
    for d in 1..=d_max {
        layers.insert((0, d), z.layers[&(0, d)].marker_slice(Marker::TMinus, 1));
    }
    QSeries {
        kind: SeriesKind::OneBoundary,
        marked: false,
        connected: false,
        layers,
    }
}

/// Checks `(d+1) Z1_{d+1} = W1 Z1_d` with explicit `t0`.
pub fn z_one_flow_residuals(z1: &QSeries) -> Vec<(u32, Poly)> {
    let w1 = DiffOp::w1();
    let mut out = Vec::new();
    for d in 0..z1.d_max() {
        let cur = &z1.layers[&(0, d)];
        let next = &z1.layers[&(0, d + 1)];
        let caps = layer_caps(0, d + 1);
        let img = diffop::apply(&w1, &cur.with_caps(Caps::degree(2 * d)), caps.degree)
            .expect("caps match")
            .with_caps(caps);
        let res = img.sub(&next.scale(&int(d as i64 + 1)).with_caps(caps));
        if !res.is_zero() {
            out.push((d + 1, res));
        }
    }
    out
}

/// Residuals of `L_i` (conjugated by `exp(t0)`) on `sum_d Z_d` in each exact
/// output degree; empty when the constraint holds.
pub fn virasoro_residual(z: &QSeries, i: i64) -> Result<Vec<(u32, Poly)>, PartitionError> {
    let cap = 2 * z.d_max();
    let l = diffop::conjugate_shift(&diffop::virasoro_l(i)?, &[(Monomial::one(), Rational::one())]);
    let exact = l.exact_output_cap(cap);
    if exact < 0 {
        return Ok(Vec::new());
    }
    let img = diffop::apply(&l, &z.total(cap), exact as u32)?;
    let mut out = Vec::new();
    for w in 0..=exact as u32 {
        let comp = img.component(w);
        if !comp.is_zero() {
            out.push((w, comp));
        }
    }
    Ok(out)
}

/// Residual of the unconjugated `L_i` on the full series `exp(t0) sum_d Z_d`
/// reconstructed through `t0^t0_cap`. Only output terms with `t0` exponent
/// `<= t0_cap - 2` and exact degree are kept.
pub fn virasoro_full_residual(z: &QSeries, i: i64, t0_cap: u32) -> Result<Poly, PartitionError> {
    let cap = 2 * z.d_max();
    let full = z
        .total(cap)
        .reconstruct_t0(&Poly::one(Caps::degree(cap)), t0_cap)?;
    let l = diffop::virasoro_l(i)?;
    let exact = l.exact_output_cap(cap).max(0) as u32;
    let img = diffop::apply(&l, &full, exact)?;
    Ok(Poly::from_terms(
        img.terms()
            .filter(|(m, _)| m.marker(Marker::T0) + 2 <= t0_cap)
            .map(|(m, c)| (m.clone(), c.clone())),
        img.caps(),
    ))
}

/// `C = -d0 + 1` on the reconstructed full series, restricted to `t0`
/// exponents below the reconstruction cap.
pub fn constraint_residual(z: &QSeries, t0_cap: u32) -> Result<Poly, PartitionError> {
    let cap = 2 * z.d_max();
    let full = z
        .total(cap)
        .reconstruct_t0(&Poly::one(Caps::degree(cap)), t0_cap)?;
    let img = diffop::apply(&diffop::constraint_c(), &full, cap)?;
    Ok(Poly::from_terms(
        img.terms()
            .filter(|(m, _)| m.marker(Marker::T0) < t0_cap)
            .map(|(m, c)| (m.clone(), c.clone())),
        img.caps(),
    ))
}
