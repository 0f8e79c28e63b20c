//! Brute-force ground truth over permutation data.
//!
//! A map on darts `0..N` is a vertex rotation `s0` and an edge involution
//! `s1`; faces are orbits of `s0 . s1` (apply `s1` first). Directed maps carry
//! a sign per dart alternating along `s0` and `s1`. Weighted counts use the
//! orbit-stabilizer quotient: `s0` is fixed to a canonical representative and
//! the sum over `s1` is divided by the order of the subgroup of the
//! centralizer of `s0` that preserves the signs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::partition::CountKey;
use crate::ratseries::{factorial, int, Rational};

/// Default dart budget for exhaustive enumeration.
pub const DEFAULT_DART_BUDGET: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("{darts} darts exceed the enumeration budget of {budget}")]
    Budget { darts: usize, budget: usize },
    #[error("lattice counts are only available for (g, n) with 2g - 2 + n in {{1, 2}}, got ({g}, {n})")]
    UnsupportedType { g: u32, n: u32 },
    #[error("target vector has {got} entries, map has {expected} faces of that sign")]
    TargetShape { expected: usize, got: usize },
}

/// One face: its darts in cyclic order and its sign (0 for undirected maps).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub darts: Vec<usize>,
    pub sign: i8,
}

impl Face {
    pub fn perimeter(&self) -> u32 {
        self.darts.len() as u32
    }
}

/// Permutation data of a (possibly directed) map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombMap {
    pub s0: Vec<usize>,
    pub s1: Vec<usize>,
    /// Dart signs `+1` / `-1`; empty for undirected maps.
    pub eps: Vec<i8>,
}

impl CombMap {
    pub fn n_darts(&self) -> usize {
        self.s0.len()
    }

    /// `s2 = (s0 . s1)^-1`, so that `s0 s1 s2 = id`.
    pub fn s2(&self) -> Vec<usize> {
        let n = self.n_darts();
        let mut out = vec![0; n];
        for x in 0..n {
            out[self.s0[self.s1[x]]] = x;
        }
        out
    }

    fn orbits(perm: &[usize]) -> Vec<Vec<usize>> {
        let n = perm.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cyc.push(x);
                x = perm[x];
            }
            out.push(cyc);
        }
        out
    }

    pub fn vertices(&self) -> Vec<Vec<usize>> {
        Self::orbits(&self.s0)
    }

    pub fn n_edges(&self) -> usize {
        self.n_darts() / 2
    }

    /// Faces ordered by smallest dart.
    pub fn faces(&self) -> Vec<Face> {
        let phi: Vec<usize> = (0..self.n_darts()).map(|x| self.s0[self.s1[x]]).collect();
        Self::orbits(&phi)
            .into_iter()
            .map(|darts| {
                let sign = self.eps.get(darts[0]).copied().unwrap_or(0);
                Face { darts, sign }
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_darts();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for y in [self.s0[x], self.s1[x]] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    /// Genus of a connected map from `V - E + F = 2 - 2g`.
    pub fn genus(&self) -> Option<u32> {
        let chi = self.vertices().len() as i64 - self.n_edges() as i64 + self.faces().len() as i64;
        let twice = 2 - chi;
        (twice >= 0 && twice % 2 == 0).then_some((twice / 2) as u32)
    }

    /// Checks the sign rules `eps . s0 = -eps`, `eps . s1 = -eps`.
    pub fn is_directed(&self) -> bool {
        self.eps.len() == self.n_darts()
            && (0..self.n_darts()).all(|x| {
                self.eps[self.s0[x]] == -self.eps[x] && self.eps[self.s1[x]] == -self.eps[x]
            })
    }

    /// One-line text form: dart count, `s0` cycles, `s1` pairs, face signs.
    pub fn to_line(&self) -> String {
        let cycles: Vec<String> = self
            .vertices()
            .iter()
            .map(|c| format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
            .collect();
        let pairs: Vec<String> = (0..self.n_darts())
            .filter(|&x| x < self.s1[x])
            .map(|x| format!("({} {})", x, self.s1[x]))
            .collect();
        let signs: String = self
            .faces()
            .iter()
            .map(|f| match f.sign {
                1 => '+',
                -1 => '-',
                _ => '0',
            })
            .collect();
        format!(
            "N={} s0={} s1={} faces={}",
            self.n_darts(),
            cycles.join(""),
            pairs.join(""),
            signs
        )
    }
}

impl fmt::Display for CombMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_line())
    }
}

/// Canonical `s0` with `v4` four-cycles followed by `v2` two-cycles, and the
/// sign vector `+` on even darts.
pub fn canonical_vertices(v4: usize, v2: usize) -> (Vec<usize>, Vec<i8>) {
    let n = 4 * v4 + 2 * v2;
    let mut s0 = vec![0; n];
    for v in 0..v4 {
        for k in 0..4 {
            s0[4 * v + k] = 4 * v + (k + 1) % 4;
        }
    }
    for w in 0..v2 {
        let a = 4 * v4 + 2 * w;
        s0[a] = a + 1;
        s0[a + 1] = a;
    }
    let eps = (0..n).map(|x| if x % 2 == 0 { 1 } else { -1 }).collect();
    (s0, eps)
}

/// Order of the sign-preserving centralizer of the canonical `s0`.
pub fn stabilizer_order(v4: usize, v2: usize) -> Rational {
    int(1i64 << v4) * factorial(v4 as u32) * factorial(v2 as u32)
}

/// Calls `f` with every bijection `0..n -> 0..n`, split in parallel on the
/// image of 0. Results of the workers are reduced with `merge`.
fn par_permutations<T, F, M>(n: usize, init: fn() -> T, f: F, merge: M) -> T
where
    T: Send,
    F: Fn(&[usize], &mut T) + Sync,
    M: Fn(T, T) -> T + Sync + Send,
{
    fn rec<T>(perm: &mut Vec<usize>, used: &mut [bool], n: usize, acc: &mut T, f: &(dyn Fn(&[usize], &mut T) + Sync)) {
        if perm.len() == n {
            f(perm, acc);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                perm.push(v);
                rec(perm, used, n, acc, f);
                perm.pop();
                used[v] = false;
            }
        }
    }
    if n == 0 {
        let mut acc = init();
        f(&[], &mut acc);
        return acc;
    }
    (0..n)
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            let mut used = vec![false; n];
            used[first] = true;
            let mut perm = vec![first];
            rec(&mut perm, &mut used, n, &mut acc, &f);
            acc
        })
        .reduce(init, merge)
}

/// Directed map with the canonical `s0` and the edge pairing
/// `2k <-> 2 sigma(k) + 1`.
pub fn directed_map(v4: usize, v2: usize, sigma: &[usize]) -> CombMap {
    let (s0, eps) = canonical_vertices(v4, v2);
    let mut s1 = vec![0; s0.len()];
    for (k, &j) in sigma.iter().enumerate() {
        s1[2 * k] = 2 * j + 1;
        s1[2 * j + 1] = 2 * k;
    }
    CombMap { s0, s1, eps }
}

/// Visits every directed map with the canonical `s0` (in parallel).
pub fn for_each_directed_map<T, F, M>(v4: usize, v2: usize, init: fn() -> T, f: F, merge: M) -> T
where
    T: Send,
    F: Fn(&CombMap, &mut T) + Sync,
    M: Fn(T, T) -> T + Sync + Send,
{
    let half = 2 * v4 + v2;
    par_permutations(half, init, |sigma, acc| f(&directed_map(v4, v2, sigma), acc), merge)
}

/// Shape of a directed map: `(g, n+, n-, positive perimeters non-increasing)`.
pub fn directed_shape(map: &CombMap) -> Option<(u32, u32, u32, Vec<u32>)> {
    let g = map.genus()?;
    let faces = map.faces();
    let mut plus: Vec<u32> = faces.iter().filter(|f| f.sign > 0).map(Face::perimeter).collect();
    plus.sort_unstable_by(|a, b| b.cmp(a));
    let n_minus = faces.iter().filter(|f| f.sign < 0).count() as u32;
    Some((g, plus.len() as u32, n_minus, plus))
}

/// Product of factorials of the multiplicities of the entries.
pub fn multiplicity_factorial(alpha: &[u32]) -> Rational {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for &a in alpha {
        *counts.entry(a).or_insert(0) += 1;
    }
    counts.values().fold(Rational::one(), |acc, &c| acc * factorial(c))
}

fn merge_counts(mut a: HashMap<(u32, u32, u32, Vec<u32>), u64>, b: HashMap<(u32, u32, u32, Vec<u32>), u64>) -> HashMap<(u32, u32, u32, Vec<u32>), u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// All weighted counts of connected directed maps with `v4` quadrivalent and
/// `v2` bivalent vertices, keyed by `CountKey` (with `m = v2`).
pub fn count_all(v4: usize, v2: usize, budget: usize) -> Result<BTreeMap<CountKey, Rational>, EnumError> {
    let darts = 4 * v4 + 2 * v2;
    if darts > budget {
        return Err(EnumError::Budget { darts, budget });
    }
    let tally = for_each_directed_map(
        v4,
        v2,
        HashMap::new,
        |map, acc: &mut HashMap<(u32, u32, u32, Vec<u32>), u64>| {
            if !map.is_connected() {
                return;
            }
            if let Some(shape) = directed_shape(map) {
                *acc.entry(shape).or_insert(0) += 1;
            }
        },
        merge_counts,
    );
    let stab = stabilizer_order(v4, v2);
    let mut out = BTreeMap::new();
    for ((g, np, nm, alpha), c) in tally {
        let key = CountKey::bivalent(g, np, nm, &alpha, v2 as u32);
        let v = int(c as i64) * multiplicity_factorial(&alpha) / &stab;
        out.insert(key, v);
    }
    Ok(out)
}

/// Enumeration request for `count_dessins`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumSpec {
    pub v4: usize,
    pub v2: usize,
    pub g: u32,
    pub n_plus: u32,
    pub n_minus: u32,
    pub alpha: Vec<u32>,
    pub connected_only: bool,
}

impl EnumSpec {
    pub fn new(v4: usize, v2: usize, g: u32, n_plus: u32, n_minus: u32, alpha: &[u32]) -> Self {
        Self {
            v4,
            v2,
            g,
            n_plus,
            n_minus,
            alpha: alpha.to_vec(),
            connected_only: true,
        }
    }
}

/// `sum 1/#Aut` over directed maps matching `spec`, positive faces labeled by
/// `alpha`. Disconnected maps are included when `connected_only` is off.
pub fn count_dessins(spec: &EnumSpec, budget: usize) -> Result<Rational, EnumError> {
    let darts = 4 * spec.v4 + 2 * spec.v2;
    if darts > budget {
        return Err(EnumError::Budget { darts, budget });
    }
    let edges = 2 * spec.v4 + spec.v2;
    if spec.alpha.iter().sum::<u32>() as usize != edges || spec.alpha.len() != spec.n_plus as usize {
        return Ok(Rational::zero());
    }
    let mut target = spec.alpha.clone();
    target.sort_unstable_by(|a, b| b.cmp(a));
    let chi_target = 2 - 2 * spec.g as i64;
    let hits: u64 = for_each_directed_map(
        spec.v4,
        spec.v2,
        || 0u64,
        |map, acc| {
            if spec.connected_only && !map.is_connected() {
                return;
            }
            let faces = map.faces();
            let chi = map.vertices().len() as i64 - map.n_edges() as i64 + faces.len() as i64;
            if chi != chi_target {
                return;
            }
            let mut plus: Vec<u32> = faces.iter().filter(|f| f.sign > 0).map(Face::perimeter).collect();
            plus.sort_unstable_by(|a, b| b.cmp(a));
            let nm = faces.iter().filter(|f| f.sign < 0).count() as u32;
            if nm == spec.n_minus && plus == target {
                *acc += 1;
            }
        },
        |a, b| a + b,
    );
    Ok(int(hits as i64) * multiplicity_factorial(&target) / stabilizer_order(spec.v4, spec.v2))
}

/// Sign-preserving centralizer of the canonical `s0`, as explicit dart maps.
pub fn stabilizer_elements(v4: usize, v2: usize) -> Vec<Vec<usize>> {
    let n = 4 * v4 + 2 * v2;
    let vperms = all_permutations(v4);
    let wperms = all_permutations(v2);
    let mut out = Vec::new();
    for vp in &vperms {
        for rot in 0..(1usize << v4) {
            for wp in &wperms {
                let mut g = vec![0; n];
                for v in 0..v4 {
                    let r = if rot & (1 << v) != 0 { 2 } else { 0 };
                    for k in 0..4 {
                        g[4 * v + k] = 4 * vp[v] + (k + r) % 4;
                    }
                }
                for w in 0..v2 {
                    for k in 0..2 {
                        g[4 * v4 + 2 * w + k] = 4 * v4 + 2 * wp[w] + k;
                    }
                }
                out.push(g);
            }
        }
    }
    out
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
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
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Same count as `count_dessins` (connected maps), computed by listing
/// isomorphism classes of face-labeled maps and their automorphism groups.
pub fn count_dessins_by_classes(spec: &EnumSpec, budget: usize) -> Result<Rational, EnumError> {
    let darts = 4 * spec.v4 + 2 * spec.v2;
    if darts > budget {
        return Err(EnumError::Budget { darts, budget });
    }
    let group = stabilizer_elements(spec.v4, spec.v2);
    let mut classes: BTreeSet<(Vec<usize>, Vec<u32>)> = BTreeSet::new();
    let mut target = spec.alpha.clone();
    target.sort_unstable_by(|a, b| b.cmp(a));
    for sigma in all_permutations(2 * spec.v4 + spec.v2) {
        let map = directed_map(spec.v4, spec.v2, &sigma);
        if !map.is_connected() || map.genus() != Some(spec.g) {
            continue;
        }
        let faces = map.faces();
        let plus: Vec<&Face> = faces.iter().filter(|f| f.sign > 0).collect();
        let nm = faces.iter().filter(|f| f.sign < 0).count() as u32;
        if nm != spec.n_minus || plus.len() != spec.alpha.len() {
            continue;
        }
        // Every assignment of labels 1..n+ to positive faces with matching perimeters.
        for labels in all_permutations(plus.len()) {
            if !labels
                .iter()
                .enumerate()
                .all(|(fi, &li)| plus[fi].perimeter() == spec.alpha[li])
            {
                continue;
            }
            let mut dart_label = vec![0u32; darts];
            for (fi, &li) in labels.iter().enumerate() {
                for &x in &plus[fi].darts {
                    dart_label[x] = li as u32 + 1;
                }
            }
            let canon = group
                .iter()
                .map(|g| transport(g, &map.s1, &dart_label))
                .min()
                .expect("group is nonempty");
            classes.insert(canon);
        }
    }
    let mut total = Rational::zero();
    for (s1, labels) in &classes {
        let aut = group
            .iter()
            .filter(|g| transport(g, s1, labels) == (s1.clone(), labels.clone()))
            .count();
        total += int(1) / int(aut as i64);
    }
    Ok(total)
}

fn transport(g: &[usize], s1: &[usize], labels: &[u32]) -> (Vec<usize>, Vec<u32>) {
    let n = g.len();
    let mut ns1 = vec![0; n];
    let mut nl = vec![0; n];
    for x in 0..n {
        ns1[g[x]] = g[s1[x]];
        nl[g[x]] = labels[x];
    }
    (ns1, nl)
}

/// Number of non-negative integer edge labelings of a directed map whose
/// positive (resp. negative) face sums equal `beta_plus` (resp. `beta_minus`),
/// faces of each sign taken in `faces()` order.
pub fn lattice_points(map: &CombMap, beta_plus: &[u32], beta_minus: &[u32]) -> Result<u64, EnumError> {
    let faces = map.faces();
    let mut face_of = vec![0usize; map.n_darts()];
    for (fi, f) in faces.iter().enumerate() {
        for &x in &f.darts {
            face_of[x] = fi;
        }
    }
    let plus: Vec<usize> = (0..faces.len()).filter(|&i| faces[i].sign > 0).collect();
    let minus: Vec<usize> = (0..faces.len()).filter(|&i| faces[i].sign < 0).collect();
    if plus.len() != beta_plus.len() {
        return Err(EnumError::TargetShape {
            expected: plus.len(),
            got: beta_plus.len(),
        });
    }
    if minus.len() != beta_minus.len() {
        return Err(EnumError::TargetShape {
            expected: minus.len(),
            got: beta_minus.len(),
        });
    }
    let mut target = vec![0i64; faces.len()];
    for (i, &f) in plus.iter().enumerate() {
        target[f] = beta_plus[i] as i64;
    }
    for (i, &f) in minus.iter().enumerate() {
        target[f] = beta_minus[i] as i64;
    }
    if beta_plus.iter().sum::<u32>() != beta_minus.iter().sum::<u32>() {
        return Ok(0);
    }
    // Each edge touches (face of its + dart, face of its - dart).
    let edges: Vec<(usize, usize)> = (0..map.n_darts())
        .filter(|&x| map.eps[x] > 0)
        .map(|x| (face_of[x], face_of[map.s1[x]]))
        .collect();
    Ok(count_face_sums(&edges, &mut target, 0, 0))
}

/// Counts assignments `x_e >= min` to edges `(a, b)` (each contributing to
/// faces `a` and `b`, possibly equal) with every face sum hitting its target.
fn count_face_sums(edges: &[(usize, usize)], remaining: &mut [i64], idx: usize, min: i64) -> u64 {
    if idx == edges.len() {
        return remaining.iter().all(|&r| r == 0) as u64;
    }
    let (a, b) = edges[idx];
    let last_a = !edges[idx + 1..].iter().any(|&(p, q)| p == a || q == a);
    let last_b = !edges[idx + 1..].iter().any(|&(p, q)| p == b || q == b);
    let hi = if a == b {
        remaining[a] / 2
    } else {
        remaining[a].min(remaining[b])
    };
    let mut total = 0;
    for v in min..=hi {
        remaining[a] -= v;
        remaining[b] -= v;
        if (!last_a || remaining[a] == 0) && (!last_b || remaining[b] == 0) {
            total += count_face_sums(edges, remaining, idx + 1, min);
        }
        remaining[a] += v;
        remaining[b] += v;
    }
    total
}

/// Fixed-point-free involutions on `0..n`.
fn involutions(n: usize) -> Vec<Vec<usize>> {
    fn rec(s: &mut Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        match s.iter().position(Option::is_none) {
            None => out.push(s.iter().map(|x| x.expect("filled")).collect()),
            Some(a) => {
                for b in a + 1..s.len() {
                    if s[b].is_none() {
                        s[a] = Some(b);
                        s[b] = Some(a);
                        rec(s, out);
                        s[a] = None;
                        s[b] = None;
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    if n.is_multiple_of(2) {
        rec(&mut vec![None; n], &mut out);
    }
    out
}

/// Partitions of `total` into exactly `parts` parts, each `>= min_part`.
fn partitions_into(total: u32, parts: u32, min_part: u32) -> Vec<Vec<u32>> {
    fn rec(rem: u32, left: u32, max: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let top = max.min(rem.saturating_sub(min * (left - 1)));
        for p in (min..=top).rev() {
            cur.push(p);
            rec(rem - p, left - 1, p, min, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, total, min_part, &mut Vec::new(), &mut out);
    out
}

/// `sum 1/#Aut` over ribbon graphs of type `(g, n)` with all vertex degrees
/// `>= 3` and positive integer edge lengths giving labeled boundary
/// perimeters `alpha`.
pub fn norbury_n(g: u32, n: u32, alpha: &[u32]) -> Result<Rational, EnumError> {
    let euler = 2 * g as i64 - 2 + n as i64;
    if n == 0 || !(1..=2).contains(&euler) {
        return Err(EnumError::UnsupportedType { g, n });
    }
    if alpha.len() != n as usize {
        return Ok(Rational::zero());
    }
    // V - E + n = 2 - 2g and 2E >= 3V give E <= 3 * euler.
    let mut total = Rational::zero();
    for e in 1..=(3 * euler) as u32 {
        let v = e as i64 - euler;
        if v < 1 {
            continue;
        }
        for degrees in partitions_into(2 * e, v as u32, 3) {
            total += norbury_for_degrees(g, n, &degrees, alpha);
        }
    }
    Ok(total)
}

fn norbury_for_degrees(g: u32, n: u32, degrees: &[u32], alpha: &[u32]) -> Rational {
    let darts: usize = degrees.iter().map(|&d| d as usize).sum();
    let mut s0 = vec![0; darts];
    let mut start = 0;
    for &d in degrees {
        let d = d as usize;
        for k in 0..d {
            s0[start + k] = start + (k + 1) % d;
        }
        start += d;
    }
    let mut centralizer = Rational::one();
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for &d in degrees {
        *counts.entry(d).or_insert(0) += 1;
    }
    for (&k, &m) in &counts {
        centralizer *= int((k as i64).pow(m)) * factorial(m);
    }
    let labelings = all_permutations(n as usize);
    let hits: u64 = involutions(darts)
        .par_iter()
        .map(|s1| {
            let map = CombMap {
                s0: s0.clone(),
                s1: s1.clone(),
                eps: Vec::new(),
            };
            if !map.is_connected() || map.genus() != Some(g) {
                return 0;
            }
            let faces = map.faces();
            if faces.len() != n as usize {
                return 0;
            }
            let mut face_of = vec![0usize; darts];
            for (fi, f) in faces.iter().enumerate() {
                for &x in &f.darts {
                    face_of[x] = fi;
                }
            }
            let edges: Vec<(usize, usize)> = (0..darts)
                .filter(|&x| x < s1[x])
                .map(|x| (face_of[x], face_of[s1[x]]))
                .collect();
            labelings
                .iter()
                .map(|lab| {
                    let mut remaining: Vec<i64> = (0..faces.len()).map(|f| alpha[lab[f]] as i64).collect();
                    count_face_sums(&edges, &mut remaining, 0, 1)
                })
                .sum::<u64>()
        })
        .sum();
    int(hits as i64) / centralizer
}
