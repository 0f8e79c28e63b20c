//! Acceptance criteria, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use dessin_core::diffop::{self, DiffOp};
use dessin_core::enumerate;
use dessin_core::opmatrix;
use dessin_core::partition::{self, CountKey, FlowOrder};
use dessin_core::ratseries::{catalan, fmt_rat, rat, solve_disc, Caps, Marker, Monomial, Poly, Rational};
use dessin_core::report::Report;
use dessin_core::spectral;
use dessin_core::suites;
use dessin_core::tutte;
use num_traits::Zero;

fn poly(terms: &[(&[u32], Rational)], cap: u32) -> Poly {
    Poly::from_terms(
        terms.iter().map(|(p, c)| (Monomial::from_parts(p), c.clone())),
        Caps::degree(cap),
    )
}

fn within(report: &mut Report, started: Instant, limit: Duration) {
    let took = started.elapsed();
    report.record((took > limit).then(|| format!("took {took:?}, limit {limit:?}")));
}

fn catalan_disc() -> Report {
    let started = Instant::now();
    let mut r = Report::new("Catalan disc amplitude by three routes");
    let c = partition::connected(&partition::partition_function(5, true)).unwrap();
    let disc = solve_disc(11);
    let seed = partition::z_one(0).layer(0).unwrap().coeff(&Monomial::marker_only(Marker::T0, 1));
    for k in 0..=5u32 {
        let expected = catalan(k);
        let from_series = if k == 0 {
            seed.clone()
        } else {
            let mut acc = Rational::zero();
            for n_minus in 1..=2 * k + 2 {
                acc += partition::count(&c, &CountKey::new(0, 1, n_minus, &[2 * k])).unwrap();
            }
            acc * rat(2 * k as i64, 1)
        };
        let from_tutte = tutte::r_tilde(0, 1, &[2 * k]);
        let from_disc = disc.coeff(2 * k as i64 + 1);
        r.record(
            (from_series != expected || from_tutte != expected || from_disc != expected).then(|| {
                format!(
                    "k={k}: series {} tutte {} disc {} catalan {}",
                    fmt_rat(&from_series),
                    fmt_rat(&from_tutte),
                    fmt_rat(&from_disc),
                    fmt_rat(&expected)
                )
            }),
        );
    }
    within(&mut r, started, Duration::from_secs(5));
    r
}

fn first_layers() -> Report {
    let started = Instant::now();
    let mut r = Report::new("first Cut-and-Join layers and their counts");
    let z = partition::partition_function(2, false);
    let z1 = poly(&[(&[2], rat(1, 1)), (&[1, 1], rat(1, 2))], 2);
    let z2 = poly(
        &[
            (&[1, 1, 1, 1], rat(1, 8)),
            (&[2, 1, 1], rat(3, 2)),
            (&[2, 2], rat(3, 2)),
            (&[3, 1], rat(3, 1)),
            (&[4], rat(3, 1)),
        ],
        4,
    );
    r.record((z.layer(1) != Some(&z1)).then(|| format!("Z1 = {}", z.layer(1).unwrap())));
    r.record((z.layer(2) != Some(&z2)).then(|| format!("Z2 = {}", z.layer(2).unwrap())));
    let c = partition::connected(&partition::partition_function(2, true)).unwrap();
    for v4 in 1..=2 {
        for (key, v) in enumerate::count_all(v4, 0, enumerate::DEFAULT_DART_BUDGET).unwrap() {
            let p = partition::count(&c, &key).unwrap();
            r.record((p != v).then(|| format!("{key:?}: {} vs {}", fmt_rat(&p), fmt_rat(&v))));
        }
    }
    within(&mut r, started, Duration::from_secs(5));
    r
}

fn oracle_equivalence() -> Report {
    let started = Instant::now();
    let mut r = suites::oracle(4, enumerate::DEFAULT_DART_BUDGET).unwrap();
    r.merge(suites::tutte_agreement(4).unwrap());
    r.merge(suites::bivalent(12).unwrap());
    r.label = "oracle equivalence of partition, Tutte and enumeration".into();
    within(&mut r, started, Duration::from_secs(300));
    r
}

fn witt_bracket() -> Report {
    suites::witt(10, 12)
}

fn virasoro_vanishing() -> Report {
    suites::virasoro(4).unwrap()
}

fn commuting_flows() -> Report {
    let mut r = Report::new("commuting flows");
    let c = diffop::commutator_check(&DiffOp::w0(), &DiffOp::w1(), None, &Rational::zero(), 10, 12, 2);
    r.checked += c.tested;
    r.residuals.extend(c.residuals.iter().map(|x| format!("[W0, W1] on {}", x.input)));
    let a = partition::bivalent_with_order(4, 4, true, FlowOrder::QuadFirst);
    let b = partition::bivalent_with_order(4, 4, true, FlowOrder::BivalentFirst);
    for (k, p) in a.layers() {
        r.record((b.layer2(k.0, k.1) != Some(p)).then(|| format!("layer {k:?} depends on flow order")));
    }
    r
}

fn matrix_cut_and_join() -> Report {
    opmatrix::cutjoin_matrix_check(2, 4).unwrap()
}

fn loop_equations() -> Report {
    suites::loops(8)
}

fn bergman() -> Report {
    spectral::bergman_check(10)
}

fn residue_recursion() -> Report {
    suites::tr(10).unwrap()
}

fn adjointness() -> Report {
    suites::adjoint(6).unwrap()
}

fn norbury() -> Report {
    suites::norbury().unwrap()
}

type Criterion = (&'static str, fn() -> Report);

fn main() {
    let started = Instant::now();
    let criteria: Vec<Criterion> = vec![
        ("catalan", catalan_disc),
        ("layers", first_layers),
        ("oracle", oracle_equivalence),
        ("witt", witt_bracket),
        ("virasoro", virasoro_vanishing),
        ("flows", commuting_flows),
        ("matrix cut-and-join", matrix_cut_and_join),
        ("loop", loop_equations),
        ("bergman", bergman),
        ("residues", residue_recursion),
        ("adjoint", adjointness),
        ("norbury", norbury),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let report = run();
        let status = if report.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {:>2} ({name}): {} checked, {} residuals, {:.2?}",
            i + 1,
            report.checked,
            report.residuals.len(),
            t.elapsed()
        );
        for res in report.residuals.iter().take(5) {
            println!("      {res}");
        }
        if !report.passed() {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed in {:.2?}", criteria.len() - failed, criteria.len(), started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
