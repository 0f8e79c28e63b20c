//! Matrix coefficients of the kernels `K_{g,n+,n-}` from enumerated directed
//! maps and lattice counts, and the matrix-level checks built on them.
//!
//! An entry `K[a+|a-]` is the coefficient of `e_{a+}` in `K(e_{a-})` with
//! `e_a = prod L^{a_i} / a_i!`:
//! `K[a+|a-] = sum_R prod a+_i * P_R(a+ - a+(R) | a-) / (n-! #Aut R)`,
//! with all faces of `R` labeled. Nonzero entries have
//! `d(a+) = d(a-) + 2(2g - 2 + n+ + n-)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::enumerate::{self, CombMap, EnumError};
use crate::partition;
use crate::ratseries::{binomial, factorial, fmt_rat, int, Marker, Monomial, Rational};
use crate::report::Report;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpMatrixError {
    #[error("unstable type (g={g}, n+={n_plus}, n-={n_minus})")]
    Unstable { g: u32, n_plus: u32, n_minus: u32 },
    #[error(transparent)]
    Enumeration(#[from] EnumError),
}

/// Sparse block keyed by non-increasing multi-indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBlock {
    pub g: u32,
    pub n_plus: u32,
    pub n_minus: u32,
    /// Entries are complete for `d(a+) <= cap`.
    pub cap: u32,
    pub warning: Option<String>,
    entries: BTreeMap<(Vec<u32>, Vec<u32>), Rational>,
}

impl KernelBlock {
    pub fn euler_degree(&self) -> u32 {
        2 * self.g + self.n_plus + self.n_minus - 2
    }

    /// Entry for labeled multi-indices; `None` beyond the cap.
    pub fn entry(&self, a_plus: &[u32], a_minus: &[u32]) -> Option<Rational> {
        if a_plus.iter().sum::<u32>() > self.cap {
            return None;
        }
        let key = (sorted_desc(a_plus), sorted_desc(a_minus));
        Some(self.entries.get(&key).cloned().unwrap_or_else(Rational::zero))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Vec<u32>, Vec<u32>), &Rational)> {
        self.entries.iter()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|((p, m), v)| json!({"alpha_plus": p, "alpha_minus": m, "value": fmt_rat(v)}))
            .collect();
        json!({
            "g": self.g,
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "cap": self.cap,
            "entries": entries,
        })
    }
}

fn sorted_desc(a: &[u32]) -> Vec<u32> {
    let mut v = a.to_vec();
    v.sort_unstable_by(|x, y| y.cmp(x));
    v
}

/// Non-increasing tuples of length `n`, entries `>= min`, summing to `total`.
pub fn sorted_tuples(n: usize, min: u32, total: u32) -> Vec<Vec<u32>> {
    fn rec(left: usize, rem: u32, max: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let need = min * (left as u32 - 1);
        if rem < need + min {
            return;
        }
        for p in (min..=max.min(rem - need)).rev() {
            cur.push(p);
            rec(left - 1, rem - p, p, min, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, total, total, min, &mut Vec::new(), &mut out);
    out
}

/// All tuples of length `n` with entries `>= 0` summing to `total`.
pub fn compositions(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(left: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for p in 0..=rem {
            cur.push(p);
            rec(left - 1, rem - p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, total, &mut Vec::new(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

type Shape = (u32, u32, u32);
type Entries = BTreeMap<(Vec<u32>, Vec<u32>), Rational>;

/// Contributions of one labeled map to the sorted entries with
/// `d(a+) <= cap`.
fn map_contributions(map: &CombMap, n_plus: usize, n_minus: usize, d: u32, cap: u32) -> Entries {
    let faces = map.faces();
    let plus: Vec<u32> = faces.iter().filter(|f| f.sign > 0).map(|f| f.perimeter()).collect();
    let mut out = Entries::new();
    let plus_labels = permutations(n_plus);
    let minus_labels = permutations(n_minus);
    for total_plus in 2 * d..=cap {
        let total_minus = total_plus - 2 * d;
        for a_plus in sorted_tuples(n_plus, 1, total_plus) {
            for a_minus in sorted_tuples(n_minus, 0, total_minus) {
                let mut acc: u64 = 0;
                for lp in &plus_labels {
                    // Face f (in face order) carries label lp[f].
                    let beta: Option<Vec<u32>> = (0..n_plus)
                        .map(|f| a_plus[lp[f]].checked_sub(plus[f]))
                        .collect();
                    let Some(beta) = beta else { continue };
                    for lm in &minus_labels {
                        let target: Vec<u32> = (0..n_minus).map(|f| a_minus[lm[f]]).collect();
                        acc += enumerate::lattice_points(map, &beta, &target).expect("shapes match");
                    }
                }
                if acc > 0 {
                    let weight: u64 = a_plus.iter().map(|&a| a as u64).product();
                    *out.entry((a_plus.clone(), a_minus)).or_insert_with(Rational::zero) +=
                        int((acc * weight) as i64);
                }
            }
        }
    }
    out
}

/// Every block of Euler degree `d` (quadrivalent maps with `d` vertices),
/// complete for `d(a+) <= cap`.
pub fn blocks_of_degree(d: u32, cap: u32, budget: usize) -> Result<Vec<KernelBlock>, OpMatrixError> {
    let v4 = d as usize;
    if 4 * v4 > budget {
        return Err(EnumError::Budget {
            darts: 4 * v4,
            budget,
        }
        .into());
    }
    let tallies: BTreeMap<Shape, Entries> = enumerate::for_each_directed_map(
        v4,
        0,
        BTreeMap::new,
        |map, acc: &mut BTreeMap<Shape, Entries>| {
            if !map.is_connected() {
                return;
            }
            let Some((g, np, nm, _)) = enumerate::directed_shape(map) else { return };
            let contrib = map_contributions(map, np as usize, nm as usize, d, cap);
            let slot = acc.entry((g, np, nm)).or_default();
            for (k, v) in contrib {
                *slot.entry(k).or_insert_with(Rational::zero) += v;
            }
        },
        |mut a, b| {
            for (shape, entries) in b {
                let slot = a.entry(shape).or_default();
                for (k, v) in entries {
                    *slot.entry(k).or_insert_with(Rational::zero) += v;
                }
            }
            a
        },
    );
    let stab = enumerate::stabilizer_order(v4, 0);
    Ok(tallies
        .into_iter()
        .map(|((g, np, nm), entries)| {
            let norm = &stab * factorial(nm);
            KernelBlock {
                g,
                n_plus: np,
                n_minus: nm,
                cap,
                warning: None,
                entries: entries.into_iter().map(|(k, v)| (k, v / &norm)).collect(),
            }
        })
        .collect())
}

/// Block `K_{g,n+,n-}` complete for `d(a+) <= cap`.
pub fn kernel_block(g: u32, n_plus: u32, n_minus: u32, cap: u32) -> Result<KernelBlock, OpMatrixError> {
    let euler = 2 * g as i64 - 2 + n_plus as i64 + n_minus as i64;
    if euler <= 0 || n_plus == 0 || n_minus == 0 {
        return Err(OpMatrixError::Unstable { g, n_plus, n_minus });
    }
    let d = euler as u32;
    let empty = KernelBlock {
        g,
        n_plus,
        n_minus,
        cap,
        warning: None,
        entries: BTreeMap::new(),
    };
    if cap < 2 * d {
        return Ok(KernelBlock {
            warning: Some(format!("cap {cap} is below the minimal degree {}", 2 * d)),
            ..empty
        });
    }
    let blocks = blocks_of_degree(d, cap, enumerate::DEFAULT_DART_BUDGET)?;
    Ok(blocks
        .into_iter()
        .find(|b| (b.g, b.n_plus, b.n_minus) == (g, n_plus, n_minus))
        .unwrap_or(empty))
}

/// Normal-ordered symbol: `t^mu s^nu` stands for `t^mu d^nu`, with `s_k`
/// stored as variable `k + 1` of the second monomial.
pub type Symbol = BTreeMap<(Monomial, Monomial), Rational>;

fn s_weight(s: &Monomial) -> u32 {
    s.degree() - s.n_parts()
}

fn s_parts(nu: &[u32]) -> Monomial {
    let shifted: Vec<u32> = nu.iter().map(|&k| k + 1).collect();
    Monomial::from_parts(&shifted)
}

fn add_to(sym: &mut Symbol, key: (Monomial, Monomial), c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = sym.entry(key.clone()).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        sym.remove(&key);
    }
}

/// Symbol of a block: coefficient `K * n-! / (mu+! mu-!)` at `t^a+ s^a-`.
pub fn block_symbol(block: &KernelBlock) -> Symbol {
    let mut out = Symbol::new();
    for ((ap, am), v) in &block.entries {
        let t = Monomial::from_parts(ap);
        let s = s_parts(am);
        let c = v * factorial(block.n_minus) / (t.mu_factorial() * s.mu_factorial());
        add_to(&mut out, (t, s), c);
    }
    out
}

fn symbol_mul(a: &Symbol, b: &Symbol, s_cap: u32) -> Symbol {
    let mut out = Symbol::new();
    for ((ta, sa), ca) in a {
        for ((tb, sb), cb) in b {
            let s = sa.mul(sb);
            if s_weight(&s) > s_cap {
                continue;
            }
            add_to(&mut out, (ta.mul(tb), s), ca * cb);
        }
    }
    out
}

/// Layers `[q^d] exp(sum_k q^k C_k)` for `d <= connected.len()`, where
/// `connected[k-1] = C_k`.
pub fn exp_layers(connected: &[Symbol], s_cap: u32) -> Vec<Symbol> {
    let d_max = connected.len();
    let mut layers: Vec<Symbol> = vec![Symbol::new(); d_max + 1];
    add_to(&mut layers[0], (Monomial::one(), Monomial::one()), Rational::one());
    for d in 1..=d_max {
        let mut acc = Symbol::new();
        for k in 1..=d {
            let prod = symbol_mul(&connected[k - 1], &layers[d - k], s_cap);
            for (key, c) in prod {
                add_to(&mut acc, key, c * int(k as i64));
            }
        }
        layers[d] = acc
            .into_iter()
            .map(|(k, c)| (k, c / int(d as i64)))
            .collect();
    }
    layers
}

/// `W1(t, d_t + s)` applied to a symbol, truncated at `s`-weight `s_cap`.
pub fn w1_on_symbol(sym: &Symbol, s_cap: u32) -> Symbol {
    let half = Rational::new(1.into(), 2.into());
    let mut out = Symbol::new();
    for ((t, s), c) in sym {
        let room = s_cap - s_weight(s).min(s_cap);
        let max_t = t.max_index();
        let k_max = max_t.max(room);
        // Join part: 1/2 (a+1)(b+1) t_{a+1} t_{b+1} (d_k + s_k), k = a + b.
        for k in 0..=k_max {
            for (tt, ss, cc) in derivative_choices(t, s, &[k], room) {
                for a in 0..=k {
                    let b = k - a;
                    let mono = tt.mul(&Monomial::var(a + 1)).mul(&Monomial::var(b + 1));
                    let w = &half * int(((a + 1) * (b + 1)) as i64);
                    add_to(&mut out, (mono, ss.clone()), &cc * &w * c);
                }
            }
        }
        // Cut part: 1/2 (k+l+2) t_{k+l+2} (d_k + s_k)(d_l + s_l).
        for k in 0..=k_max {
            for l in 0..=k_max {
                for (tt, ss, cc) in derivative_choices(t, s, &[k, l], room) {
                    let mono = tt.mul(&Monomial::var(k + l + 2));
                    let w = &half * int((k + l + 2) as i64);
                    add_to(&mut out, (mono, ss.clone()), &cc * &w * c);
                }
            }
        }
    }
    out
}

/// Expands `prod_j (d_{k_j} + s_{k_j})` on `t^mu s^nu`, keeping results whose
/// added `s`-weight stays within `room`.
fn derivative_choices(t: &Monomial, s: &Monomial, ks: &[u32], room: u32) -> Vec<(Monomial, Monomial, Rational)> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << ks.len()) {
        let mut tt = t.clone();
        let mut ss = s.clone();
        let mut c = Rational::one();
        let mut added = 0;
        let mut ok = true;
        for (j, &k) in ks.iter().enumerate() {
            if mask & (1 << j) != 0 {
                ss = ss.times_var(k + 1, 1);
                added += k;
            } else {
                if k == 0 {
                    ok = false;
                    break;
                }
                let e = tt.exp(k);
                if e == 0 {
                    ok = false;
                    break;
                }
                c *= int(e as i64);
                tt = tt.without_var(k).expect("present");
            }
        }
        if ok && added <= room {
            out.push((tt, ss, c));
        }
    }
    out
}

/// Checks `d K_d = (W1 . K)_d` on symbols for `d <= d_max`, with `s`-weight
/// (the degree of the annihilation part) at most `s_cap`.
pub fn cutjoin_matrix_check(d_max: u32, s_cap: u32) -> Result<Report, OpMatrixError> {
    let connected = connected_symbols(d_max, s_cap)?;
    let layers = exp_layers(&connected, s_cap);
    let mut report = Report::new(format!("cut-and-join on kernel blocks (d <= {d_max}, s-weight <= {s_cap})"));
    for d in 1..=d_max as usize {
        let rhs = w1_on_symbol(&layers[d - 1], s_cap);
        let mut keys: Vec<&(Monomial, Monomial)> = rhs.keys().collect();
        keys.extend(layers[d].keys());
        keys.sort();
        keys.dedup();
        for key in keys {
            let lhs = layers[d].get(key).cloned().unwrap_or_else(Rational::zero) * int(d as i64);
            let r = rhs.get(key).cloned().unwrap_or_else(Rational::zero);
            report.record((lhs != r).then(|| {
                format!("d={d} t^{} d^{}: {} vs {}", key.0, key.1, fmt_rat(&lhs), fmt_rat(&r))
            }));
        }
    }
    Ok(report)
}

/// Connected symbols `C_1..C_{d_max}` from all blocks, complete for
/// `s`-weight `<= s_cap`.
pub fn connected_symbols(d_max: u32, s_cap: u32) -> Result<Vec<Symbol>, OpMatrixError> {
    (1..=d_max)
        .map(|d| {
            let blocks = blocks_of_degree(d, s_cap + 2 * d, enumerate::DEFAULT_DART_BUDGET)?;
            let mut c = Symbol::new();
            for b in &blocks {
                for (k, v) in block_symbol(b) {
                    add_to(&mut c, k, v);
                }
            }
            Ok(c)
        })
        .collect()
}

/// Applies the assembled operator of each degree to the vacuum
/// `exp(t- t0)` (so `s_0 -> t-`, `s_k -> 0`) and compares with the marked
/// partition layers.
pub fn vacuum_consistency(d_max: u32) -> Result<Report, OpMatrixError> {
    let connected = connected_symbols(d_max, 0)?;
    let layers = exp_layers(&connected, 0);
    let z = partition::partition_function(d_max, true);
    let mut report = Report::new(format!("kernel blocks on the vacuum vs partition layers (d <= {d_max})"));
    for (d, sym) in layers.iter().enumerate() {
        let mut from_blocks: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for ((t, s), c) in sym {
            let n0 = s.exp(1);
            if s.n_parts() != n0 {
                continue;
            }
            *from_blocks
                .entry(t.clone().with_marker(Marker::TMinus, n0))
                .or_insert_with(Rational::zero) += c;
        }
        let layer = z.layer(d as u32).expect("computed");
        let mut keys: Vec<Monomial> = from_blocks.keys().cloned().collect();
        keys.extend(layer.terms().map(|(m, _)| m.clone()));
        keys.sort();
        keys.dedup();
        for m in keys {
            let a = from_blocks.get(&m).cloned().unwrap_or_else(Rational::zero);
            let b = layer.coeff(&m);
            report.record((a != b).then(|| format!("d={d} {m}: {} vs {}", fmt_rat(&a), fmt_rat(&b))));
        }
    }
    Ok(report)
}

/// `(e_a, e_b) = (1/n!) prod C(a_i + b_i, a_i)`.
pub fn gram(a: &[u32], b: &[u32]) -> Rational {
    let prod = a
        .iter()
        .zip(b)
        .fold(Rational::one(), |acc, (&x, &y)| acc * binomial((x + y) as i64, x as i64));
    prod / factorial(a.len() as u32)
}

/// How block entries are read when checking adjointness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjointForm {
    /// The kernels `K` themselves.
    Kernel,
    /// Volumes `V = K / prod L+`: `V[c|b] = K[c+1|b] / prod (c_i + 1)`.
    Volume,
}

fn matrix_entry(block: &KernelBlock, form: AdjointForm, out: &[u32], inp: &[u32]) -> Option<Rational> {
    match form {
        AdjointForm::Kernel => block.entry(out, inp),
        AdjointForm::Volume => {
            let shifted: Vec<u32> = out.iter().map(|&c| c + 1).collect();
            let den: u64 = shifted.iter().map(|&c| c as u64).product();
            block.entry(&shifted, inp).map(|v| v / int(den as i64))
        }
    }
}

/// Checks `sum_c G+[a,c] M[c|b] = sum_e M'[e|a] G-[e,b]` for labeled
/// `a` (`n+` entries) and `b` (`n-` entries) with `d(a), d(b) <= cap`, where
/// `M` reads block `(g, n+, n-)` and `M'` block `(g, n-, n+)`.
pub fn adjoint_check(g: u32, n_plus: u32, n_minus: u32, cap: u32, form: AdjointForm) -> Result<Report, OpMatrixError> {
    let euler = 2 * g as i64 - 2 + n_plus as i64 + n_minus as i64;
    if euler <= 0 {
        return Err(OpMatrixError::Unstable { g, n_plus, n_minus });
    }
    let d = euler as u32;
    let shift = match form {
        AdjointForm::Kernel => 0,
        AdjointForm::Volume => 1,
    };
    // Output degrees reach cap + 2d (+ n for the volume shift).
    let need = cap + 2 * d + shift * n_plus.max(n_minus);
    let blocks = blocks_of_degree(d, need, enumerate::DEFAULT_DART_BUDGET)?;
    let find = |np: u32, nm: u32| -> KernelBlock {
        blocks
            .iter()
            .find(|b| (b.g, b.n_plus, b.n_minus) == (g, np, nm))
            .cloned()
            .unwrap_or(KernelBlock {
                g,
                n_plus: np,
                n_minus: nm,
                cap: need,
                warning: None,
                entries: BTreeMap::new(),
            })
    };
    let m = find(n_plus, n_minus);
    let mt = find(n_minus, n_plus);
    let out_degree = |inp: u32, n_out: u32| -> Option<u32> {
        let v = inp as i64 + 2 * d as i64 - (shift * n_out) as i64;
        (v >= 0).then_some(v as u32)
    };
    let mut report = Report::new(format!(
        "adjointness ({g},{n_plus},{n_minus}) vs ({g},{n_minus},{n_plus}), {:?} form, degree <= {cap}",
        form
    ));
    let pairs: Vec<(Vec<u32>, Vec<u32>)> = (0..=cap)
        .flat_map(|da| compositions(n_plus as usize, da))
        .flat_map(|a| {
            (0..=cap)
                .flat_map(|db| compositions(n_minus as usize, db))
                .map(move |b| (a.clone(), b))
        })
        .collect();
    let results: Vec<Option<String>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let db: u32 = b.iter().sum();
            let da: u32 = a.iter().sum();
            let mut lhs = Rational::zero();
            if let Some(dc) = out_degree(db, n_plus) {
                for c in compositions(n_plus as usize, dc) {
                    let v = matrix_entry(&m, form, &c, b).expect("within cap");
                    if !v.is_zero() {
                        lhs += gram(a, &c) * v;
                    }
                }
            }
            let mut rhs = Rational::zero();
            if let Some(de) = out_degree(da, n_minus) {
                for e in compositions(n_minus as usize, de) {
                    let v = matrix_entry(&mt, form, &e, a).expect("within cap");
                    if !v.is_zero() {
                        rhs += v * gram(&e, b);
                    }
                }
            }
            (lhs != rhs).then(|| format!("a={a:?} b={b:?}: {} vs {}", fmt_rat(&lhs), fmt_rat(&rhs)))
        })
        .collect();
    for r in results {
        report.record(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_helpers() {
        assert_eq!(sorted_tuples(2, 1, 4), vec![vec![3, 1], vec![2, 2]]);
        assert_eq!(compositions(2, 2).len(), 3);
        assert_eq!(compositions(0, 0), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn gram_of_units() {
        assert_eq!(gram(&[0], &[0]), int(1));
        assert_eq!(gram(&[1, 1], &[1, 0]), int(1));
    }

    #[test]
    fn low_cap_gives_empty_block() {
        let b = kernel_block(0, 2, 1, 1).unwrap();
        assert!(b.warning.is_some());
        assert_eq!(b.entries().count(), 0);
    }

    #[test]
    fn unstable_type_is_rejected() {
        assert!(kernel_block(0, 1, 1, 4).is_err());
    }
}
