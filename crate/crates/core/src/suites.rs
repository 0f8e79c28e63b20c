//! Named verification suites shared by the acceptance tests and the CLI.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::diffop::{self, DiffOp};
use crate::enumerate::{self, EnumError};
use crate::opmatrix::{self, AdjointForm, OpMatrixError};
use crate::partition::{self, CountKey, FlowOrder, PartitionError};
use crate::ratseries::{fmt_rat, int, Monomial, Rational};
use crate::report::Report;
use crate::spectral::{self, SpectralError};
use crate::tutte;

pub const SUITE_NAMES: [&str; 12] = [
    "cutjoin", "witt", "virasoro", "tutte", "oracle", "opmatrix", "loop", "bergman", "tr", "norbury", "adjoint",
    "bivalent",
];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error(transparent)]
    OpMatrix(#[from] OpMatrixError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl SuiteError {
    /// Whether the failure comes from an exhausted resource budget.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            SuiteError::Enumeration(EnumError::Budget { .. })
                | SuiteError::OpMatrix(OpMatrixError::Enumeration(EnumError::Budget { .. }))
        )
    }
}

/// Window sizes used by the suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    /// Largest Euler degree of the partition layers.
    pub d_max: u32,
    /// Weighted-degree cap of the operator basis.
    pub deg_cap: u32,
    /// Largest variable index of the operator basis.
    pub var_cap: u32,
    /// Perimeter cap of correlators and block entries.
    pub cap: u32,
    /// Dart budget of the enumeration.
    pub n_budget: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            d_max: 4,
            deg_cap: 10,
            var_cap: 12,
            cap: 8,
            n_budget: enumerate::DEFAULT_DART_BUDGET,
        }
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    match name {
        "cutjoin" => cutjoin(cfg.d_max),
        "witt" => Ok(witt(cfg.deg_cap, cfg.var_cap)),
        "virasoro" => virasoro(cfg.d_max),
        "tutte" => tutte_agreement(cfg.d_max),
        "oracle" => oracle(cfg.d_max, cfg.n_budget),
        "opmatrix" => opmatrix_suite(cfg.d_max.min(2), cfg.n_budget),
        "loop" => Ok(loops(cfg.cap)),
        "bergman" => Ok(spectral::bergman_check(cfg.cap + 2)),
        "tr" => tr(cfg.cap + 2),
        "norbury" => norbury(),
        "adjoint" => adjoint(cfg.cap.min(6)),
        "bivalent" => bivalent(cfg.n_budget.min(12)),
        other => Err(SuiteError::Unknown(other.to_string())),
    }
}

fn poly_residual(label: &str, p: &crate::ratseries::Poly) -> Option<String> {
    (!p.is_zero()).then(|| format!("{label}: {p}"))
}

/// `(d+1) Z_{d+1} = W1' Z_d` on the reduced layers and `(d+1) Z1_{d+1} = W1 Z1_d`.
pub fn cutjoin(d_max: u32) -> Result<Report, SuiteError> {
    let z = partition::partition_function(d_max, false);
    let mut report = Report::new(format!("cut-and-join flow (d <= {d_max})"));
    let w1 = DiffOp::w1_prime();
    for d in 0..d_max {
        let cur = z.layer(d).expect("computed");
        let next = z.layer(d + 1).expect("computed");
        let img = diffop::apply(&w1, cur, 2 * d + 2).map_err(PartitionError::from)?;
        let res = img.sub(&next.scale(&int(d as i64 + 1)));
        report.record(poly_residual(&format!("layer {}", d + 1), &res));
    }
    for (d, res) in partition::z_one_flow_residuals(&partition::z_one(d_max)) {
        report.record(poly_residual(&format!("one-boundary layer {d}"), &res));
    }
    report.checked += d_max as usize;
    Ok(report)
}

pub fn witt(deg_cap: u32, var_cap: u32) -> Report {
    let mut report = Report::new(format!("Witt bracket (degree <= {deg_cap}, index <= {var_cap})"));
    for r in diffop::witt_check(4, deg_cap, var_cap, 2) {
        report.checked += r.tested;
        for res in r.residuals {
            report.residuals.push(format!("{} on {}", r.label, res.input));
        }
    }
    report
}

/// Conjugated `L_i`, `i = -1..6`, on the reduced series; `L_i` and `C` on the
/// series with `t0` restored.
pub fn virasoro(d_max: u32) -> Result<Report, SuiteError> {
    let z = partition::partition_function(d_max, false);
    let mut report = Report::new(format!("Virasoro constraints (d <= {d_max})"));
    for i in -1..=6 {
        let res = partition::virasoro_residual(&z, i)?;
        report.record((!res.is_empty()).then(|| format!("L_{i}: {} nonzero degrees", res.len())));
        let full = partition::virasoro_full_residual(&z, i, 4)?;
        report.record(poly_residual(&format!("L_{i} with t0"), &full));
    }
    report.record(poly_residual("C", &partition::constraint_residual(&z, 4)?));
    Ok(report)
}

/// Tutte recursion against the partition function, connected and not.
pub fn tutte_agreement(d_max: u32) -> Result<Report, SuiteError> {
    let mut report = Report::new(format!("Tutte recursions vs partition function (d <= {d_max})"));
    let marked = partition::partition_function(d_max, true);
    let c = partition::connected(&marked)?;
    let mut from_counts: BTreeMap<(u32, Vec<u32>), Rational> = BTreeMap::new();
    for (key, h) in partition::count_table(&c)? {
        if key.m != 0 {
            continue;
        }
        let prod: u64 = key.alpha.iter().map(|&a| a as u64).product();
        *from_counts.entry((key.g, key.alpha.clone())).or_insert_with(Rational::zero) += h * int(prod as i64);
    }
    for d in 1..=d_max {
        for n in 1..=2 * d {
            for alpha in opmatrix::sorted_tuples(n as usize, 1, 2 * d) {
                for g in 0..=tutte::max_genus(n, 2 * d) {
                    let a = tutte::r_tilde(g, n, &alpha);
                    let b = from_counts.get(&(g, alpha.clone())).cloned().unwrap_or_else(Rational::zero);
                    report.record(
                        (a != b).then(|| format!("g={g} alpha={alpha:?}: {} vs {}", fmt_rat(&a), fmt_rat(&b))),
                    );
                }
            }
        }
    }
    let plain = partition::partition_function(d_max, false);
    for d in 0..=d_max {
        let layer = plain.layer(d).expect("computed");
        for n in 0..=2 * d {
            for mu in opmatrix::sorted_tuples(n as usize, 1, 2 * d) {
                let mono = Monomial::from_parts(&mu);
                let from_layer = layer.coeff(&mono) * mono.mu_factorial();
                let pairs = multiplicities(&mu);
                let rec = tutte::r_tilde_nc(&pairs, d);
                let comb = tutte::nc_from_connected(&mu);
                report.record((from_layer != rec || rec != comb).then(|| {
                    format!("mu={mu:?}: layer {} recursion {} connected {}", fmt_rat(&from_layer), fmt_rat(&rec), fmt_rat(&comb))
                }));
            }
        }
    }
    Ok(report)
}

fn multiplicities(mu: &[u32]) -> Vec<(u32, u32)> {
    let mut m: BTreeMap<u32, u32> = BTreeMap::new();
    for &p in mu {
        *m.entry(p).or_insert(0) += 1;
    }
    m.into_iter().collect()
}

/// Enumerated counts against the partition function, both directions.
pub fn oracle(d_max: u32, budget: usize) -> Result<Report, SuiteError> {
    let mut report = Report::new(format!("enumeration vs partition function (d <= {d_max})"));
    let c = partition::connected(&partition::partition_function(d_max, true))?;
    let table = partition::count_table(&c)?;
    for v4 in 1..=d_max as usize {
        if 4 * v4 > budget {
            return Err(EnumError::Budget { darts: 4 * v4, budget }.into());
        }
        compare_counts(&mut report, &c, &table, v4, 0, budget)?;
    }
    Ok(report)
}

fn compare_counts(
    report: &mut Report,
    c: &partition::QSeries,
    table: &[(CountKey, Rational)],
    v4: usize,
    v2: usize,
    budget: usize,
) -> Result<(), SuiteError> {
    let enumerated = enumerate::count_all(v4, v2, budget)?;
    for (key, v) in &enumerated {
        let p = partition::count(c, key)?;
        report.record((&p != v).then(|| format!("{key:?}: enumeration {} partition {}", fmt_rat(v), fmt_rat(&p))));
    }
    let weight = (2 * v4 + v2) as u32;
    for (key, v) in table {
        if key.m == v2 as u32 && key.alpha.iter().sum::<u32>() == weight && !enumerated.contains_key(key) {
            report.record(Some(format!("{key:?}: partition {} not enumerated", fmt_rat(v))));
        }
    }
    Ok(())
}

/// Flow-order independence and enumeration with bivalent vertices.
pub fn bivalent(darts: usize) -> Result<Report, SuiteError> {
    let mut report = Report::new(format!("bivalent vertices (darts <= {darts})"));
    let d_max = (darts / 4) as u32;
    let m_max = (darts / 2) as u32;
    let a = partition::bivalent_with_order(m_max, d_max, true, FlowOrder::QuadFirst);
    let b = partition::bivalent_with_order(m_max, d_max, true, FlowOrder::BivalentFirst);
    for (k, p) in a.layers() {
        let q = b.layer2(k.0, k.1).cloned();
        report.record((Some(p) != q.as_ref()).then(|| format!("layer {k:?} depends on flow order")));
    }
    report.record(diffop::commutator_check(&DiffOp::w0(), &DiffOp::w1(), None, &Rational::zero(), 8, 8, 2)
        .residuals
        .first()
        .map(|r| format!("[W0, W1] on {}", r.input)));
    let c = partition::connected(&a)?;
    let table = partition::count_table(&c)?;
    for v4 in 0..=d_max as usize {
        for v2 in 1..=m_max as usize {
            if 4 * v4 + 2 * v2 <= darts {
                compare_counts(&mut report, &c, &table, v4, v2, darts)?;
            }
        }
    }
    Ok(report)
}

/// Block-level cut-and-join and vacuum consistency.
pub fn opmatrix_suite(d_max: u32, budget: usize) -> Result<Report, SuiteError> {
    if 4 * d_max as usize > budget {
        return Err(EnumError::Budget { darts: 4 * d_max as usize, budget }.into());
    }
    let mut report = opmatrix::cutjoin_matrix_check(d_max, 4)?;
    report.merge(opmatrix::vacuum_consistency(d_max)?);
    report.label = format!("kernel blocks (d <= {d_max})");
    Ok(report)
}

pub fn loops(cap: u32) -> Report {
    let mut report = Report::new(format!("loop equations (cap {cap})"));
    for (g, n) in [(0, 1), (0, 2), (1, 1), (0, 3)] {
        report.merge(spectral::loop_check(g, n, cap));
    }
    report
}

pub fn tr(order: u32) -> Result<Report, SuiteError> {
    let mut report = Report::new(format!("residue recursion (order {order})"));
    for (g, n) in [(1, 1), (0, 3)] {
        report.merge(spectral::tr_check(g, n, order)?);
    }
    Ok(report)
}

pub fn norbury() -> Result<Report, SuiteError> {
    let mut report = Report::new("lattice-count substitution");
    report.merge(spectral::norbury_substitution_check(1, 1, 9)?);
    report.merge(spectral::norbury_substitution_check(0, 3, 8)?);
    report.merge(spectral::u0_identity(12));
    Ok(report)
}

pub fn adjoint(cap: u32) -> Result<Report, SuiteError> {
    let mut report = Report::new(format!("Gram adjointness of volumes (cap {cap})"));
    for (g, np, nm) in [(0, 2, 1), (0, 2, 2), (1, 1, 1)] {
        report.merge(opmatrix::adjoint_check(g, np, nm, cap, AdjointForm::Volume)?);
    }
    Ok(report)
}
