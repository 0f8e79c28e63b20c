//! Tutte recursion for the connected counts `R~_{g,n}(alpha)` (summed over
//! the number of negative faces) and the partition-indexed recursion for the
//! non-connected counts.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::ratseries::{int, Rational};

/// Memo tables for both recursions.
#[derive(Default)]
pub struct TutteMemo {
    connected: HashMap<(u32, Vec<u32>), Rational>,
    disconnected: HashMap<Vec<u32>, Rational>,
}

impl TutteMemo {
    pub fn new() -> Self {
        Self::default()
    }

    /// `R~_{g,n}(alpha)` with `n = alpha.len()`.
    pub fn r_tilde(&mut self, g: i64, alpha: &[u32]) -> Rational {
        if g < 0 || alpha.is_empty() {
            return Rational::zero();
        }
        let mut key: Vec<u32> = alpha.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        if key.iter().sum::<u32>() % 2 == 1 {
            return Rational::zero();
        }
        if key.contains(&0) {
            let seed = g == 0 && key.len() == 1;
            return if seed { Rational::one() } else { Rational::zero() };
        }
        let g = g as u32;
        if let Some(v) = self.connected.get(&(g, key.clone())) {
            return v.clone();
        }
        let v = self.eval_connected(g, &key);
        self.connected.insert((g, key), v.clone());
        v
    }

    fn eval_connected(&mut self, g: u32, key: &[u32]) -> Rational {
        let first = key[0];
        let rest = &key[1..];
        let mut acc = Rational::zero();
        // Merge the active boundary with another one.
        for (p, &a) in rest.iter().enumerate() {
            let mut args = Vec::with_capacity(rest.len());
            args.push(a + first - 2);
            args.extend(rest.iter().enumerate().filter(|&(q, _)| q != p).map(|(_, &x)| x));
            acc += int(a as i64) * self.r_tilde(g as i64, &args);
        }
        if first < 2 {
            return acc;
        }
        for k in 0..=first - 2 {
            let l = first - 2 - k;
            // Genus reduction.
            let mut args = vec![k, l];
            args.extend_from_slice(rest);
            acc += self.r_tilde(g as i64 - 1, &args);
            // Splitting into two pieces, ordered, unstable discs included.
            let n_rest = rest.len();
            for mask in 0u32..(1 << n_rest) {
                let mut left = vec![k];
                let mut right = vec![l];
                for (q, &x) in rest.iter().enumerate() {
                    if mask & (1 << q) != 0 {
                        left.push(x);
                    } else {
                        right.push(x);
                    }
                }
                for g1 in 0..=g {
                    let a = self.r_tilde(g1 as i64, &left);
                    if a.is_zero() {
                        continue;
                    }
                    acc += a * self.r_tilde((g - g1) as i64, &right);
                }
            }
        }
        acc
    }

    /// Non-connected count for the partition with parts `parts` (order and
    /// zero parts are irrelevant).
    pub fn r_tilde_nc(&mut self, parts: &[u32]) -> Rational {
        let mut key: Vec<u32> = parts.iter().copied().filter(|&p| p > 0).collect();
        key.sort_unstable_by(|a, b| b.cmp(a));
        if key.is_empty() {
            return Rational::one();
        }
        if key.iter().sum::<u32>() % 2 == 1 {
            return Rational::zero();
        }
        if let Some(v) = self.disconnected.get(&key) {
            return v.clone();
        }
        let v = self.eval_disconnected(&key);
        self.disconnected.insert(key, v.clone());
        v
    }

    fn eval_disconnected(&mut self, key: &[u32]) -> Rational {
        let i = key[0];
        let rest = &key[1..];
        let mut acc = Rational::zero();
        // Merge: one term per other boundary, grouped by perimeter value.
        let mut seen: Vec<u32> = rest.to_vec();
        seen.dedup();
        for &j in &seen {
            let mult = rest.iter().filter(|&&x| x == j).count() as i64;
            let mut next: Vec<u32> = rest.to_vec();
            let pos = next.iter().position(|&x| x == j).expect("present");
            next.remove(pos);
            next.push(i + j - 2);
            acc += int(j as i64 * mult) * self.r_tilde_nc(&next);
        }
        if i >= 2 {
            for k in 0..=i - 2 {
                let mut next: Vec<u32> = rest.to_vec();
                next.push(k);
                next.push(i - 2 - k);
                acc += self.r_tilde_nc(&next);
            }
        }
        acc
    }
}

fn global() -> &'static Mutex<TutteMemo> {
    static MEMO: OnceLock<Mutex<TutteMemo>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(TutteMemo::new()))
}

/// `R~_{g,n}(alpha)`; zero when `alpha.len() != n`, for odd perimeter, and for
/// any zero entry other than the seed `R~_{0,1}(0) = 1`.
pub fn r_tilde(g: u32, n: u32, alpha: &[u32]) -> Rational {
    if alpha.len() != n as usize {
        return Rational::zero();
    }
    global()
        .lock()
        .expect("memo lock")
        .r_tilde(g as i64, alpha)
}

/// Non-connected count `R~(mu)` for a partition given as `(part, multiplicity)`
/// pairs; zero unless `d(mu) = 2d`.
pub fn r_tilde_nc(mu: &[(u32, u32)], d: u32) -> Rational {
    let weight: u32 = mu.iter().map(|&(i, e)| i * e).sum();
    if weight != 2 * d {
        return Rational::zero();
    }
    let parts: Vec<u32> = mu
        .iter()
        .flat_map(|&(i, e)| std::iter::repeat_n(i, e as usize))
        .collect();
    global().lock().expect("memo lock").r_tilde_nc(&parts)
}

/// Largest genus with a possibly nonzero `R~_{g,n}` at total perimeter `total`.
pub fn max_genus(n: u32, total: u32) -> u32 {
    // total = 2(2g - 2 + n + n-) with n- >= 1.
    let half = total as i64 / 2;
    ((half + 1 - n as i64) / 2).max(0) as u32
}

/// Non-connected count rebuilt from connected ones by summing over set
/// partitions of the labeled boundaries.
pub fn nc_from_connected(alpha: &[u32]) -> Rational {
    fn rec(remaining: &[u32], memo: &mut TutteMemo) -> Rational {
        if remaining.is_empty() {
            return Rational::one();
        }
        let first = remaining[0];
        let others = &remaining[1..];
        let mut acc = Rational::zero();
        for mask in 0u32..(1 << others.len()) {
            let mut block = vec![first];
            let mut rest = Vec::new();
            for (q, &x) in others.iter().enumerate() {
                if mask & (1 << q) != 0 {
                    block.push(x);
                } else {
                    rest.push(x);
                }
            }
            let total: u32 = block.iter().sum();
            let mut blk = Rational::zero();
            for g in 0..=max_genus(block.len() as u32, total) {
                blk += memo.r_tilde(g as i64, &block);
            }
            if blk.is_zero() {
                continue;
            }
            acc += blk * rec(&rest, memo);
        }
        acc
    }
    let positive: Vec<u32> = alpha.iter().copied().filter(|&a| a > 0).collect();
    let mut memo = global().lock().expect("memo lock");
    rec(&positive, &mut memo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_and_small_values() {
        assert_eq!(r_tilde(0, 1, &[0]), int(1));
        assert_eq!(r_tilde(0, 1, &[4]), int(2));
        assert_eq!(r_tilde(0, 1, &[3]), int(0));
        assert_eq!(r_tilde(0, 2, &[1, 1]), int(1));
        assert_eq!(r_tilde(0, 2, &[1, 0]), int(0));
    }

    #[test]
    fn non_connected_small_values() {
        assert_eq!(r_tilde_nc(&[], 0), int(1));
        assert_eq!(r_tilde_nc(&[(4, 1)], 2), int(3));
        assert_eq!(r_tilde_nc(&[(2, 2)], 2), int(3));
        assert_eq!(r_tilde_nc(&[(2, 1)], 2), int(0));
    }
}
