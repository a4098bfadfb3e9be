//! Named verification batteries behind the `verify` subcommand: each suite
//! re-runs the defining identities of one module on fresh (seeded) data and
//! reports residuals against pinned tolerances.

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::chain::{additivity_check, homotopy_equivalence_residual};
use crate::linalg::{adjoint, log_det_perp, log_det_stieltjes_quadrature, log_det_via_stieltjes, zeta_finite};
use crate::models::{circle_model, equivariant_circle, interval_model, point_model, product_model, ActionKind};
use crate::samples;
use crate::zchain::{
    convention_sweep, integral_homology, integral_structure, smith_normal_form,
    structured_torsion,
};
use crate::zeta::{
    cheeger_mueller_defect, circle_analytic, dodziuk_patodi_table, interval_analytic, rho_an,
    IntervalSpectrum,
};
use crate::{Result, TorsionError};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn evaluate(suite: &'static str, name: &'static str, outcome: (f64, f64)) -> Self {
        let (residual, tolerance) = outcome;
        CheckResult {
            suite,
            name,
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        }
    }
}

pub const SUITES: [&str; 6] = [
    "linalg",
    "chain",
    "zchain",
    "manifold",
    "cheeger-mueller",
    "equivariant",
];

type Check = (&'static str, fn() -> (f64, f64));

/// Runs one suite (or `all`); work items run in parallel but the report
/// keeps the declaration order.
pub fn run_suite(suite: &str) -> Result<Vec<CheckResult>> {
    let names: Vec<&'static str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![SUITES[SUITES.iter().position(|s| *s == suite).unwrap()]]
    } else {
        return Err(TorsionError::InvalidParameter(format!(
            "unknown suite `{suite}` (expected one of linalg, chain, zchain, manifold, cheeger-mueller, equivariant, all)"
        )));
    };
    let mut jobs: Vec<(&'static str, Check)> = Vec::new();
    for name in names {
        for check in suite_checks(name) {
            jobs.push((name, check));
        }
    }
    Ok(jobs
        .into_par_iter()
        .map(|(suite, (name, f))| CheckResult::evaluate(suite, name, f()))
        .collect())
}

fn suite_checks(suite: &str) -> Vec<Check> {
    match suite {
        "linalg" => vec![
            ("stieltjes routes agree with the singular-value determinant", check_stieltjes_routes),
            ("finite zeta derivative matches the determinant", check_zeta_finite_derivative),
            ("determinant is invariant under taking adjoints", check_adjoint_symmetry),
        ],
        "chain" => vec![
            ("laplacian torsion route agrees on random complexes", check_laplacian_route),
            ("torsion is additive on short exact sequences", check_ses_additivity),
            ("torsion is additive under direct sums", check_direct_sum),
            ("homotopy equivalences satisfy the cone identity", check_homotopy_cone),
        ],
        "zchain" => vec![
            ("smith form reconstructs and divides", check_snf_reconstruction),
            ("contractible integer complexes have zero torsion", check_contractible_zero),
            ("integral structure matches the torsion-order oracle", check_torsion_order_oracle),
            ("moore complexes give the log of the order", check_moore_values),
            ("exactly one convention assignment passes", check_convention_uniqueness),
        ],
        "manifold" => vec![
            ("circle invariant is subdivision-independent and equals log volume", check_circle_invariance),
            ("interval invariant equals log volume", check_interval_value),
            ("torus invariant vanishes", check_torus_vanishes),
            ("product formula holds", check_product_formula),
            ("one-dimensional glueing formula holds", check_glueing),
            ("structure comparison residual vanishes on subdivisions", check_structure_dependence),
        ],
        "cheeger-mueller" => vec![
            ("analytic circle value is the log volume", check_analytic_circle),
            ("analytic interval value is log of twice the volume", check_analytic_interval),
            ("circle defect vanishes", check_circle_defect),
            ("interval defect vanishes with boundary correction", check_interval_defect),
            ("eigenvalue convergence is second order", check_dp_order),
        ],
        "equivariant" => vec![
            ("conjugation circle matches its closed forms", check_conjugation_values),
            ("antipodal circle matches its closed forms", check_antipodal_values),
            ("comparison identity closes on both actions", check_theorem_residual),
            ("free-action corollary holds", check_free_corollary),
            ("forgetting the action recovers the plain invariants", check_forgetting),
            ("isotypic dimensions are exact", check_isotypic_dims),
        ],
        _ => Vec::new(),
    }
}

fn check_stieltjes_routes() -> (f64, f64) {
    let mut rng = samples::rng(901);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let s = samples::random_space(&mut rng, 5);
        let t = samples::random_space(&mut rng, 4);
        let f = samples::random_map(&mut rng, &s, &t);
        let reference = 2.0 * log_det_perp(&f);
        worst = worst.max((log_det_via_stieltjes(&f) - reference).abs());
        worst = worst.max((log_det_stieltjes_quadrature(&f) - reference).abs());
    }
    (worst, 1e-6)
}

fn check_zeta_finite_derivative() -> (f64, f64) {
    let mut rng = samples::rng(902);
    let mut worst = 0.0_f64;
    for _ in 0..6 {
        let s = samples::random_space(&mut rng, 4);
        let t = samples::random_space(&mut rng, 4);
        let f = samples::random_map(&mut rng, &s, &t);
        let central = |h: f64| {
            (zeta_finite(&f, Complex64::new(h, 0.0)) - zeta_finite(&f, Complex64::new(-h, 0.0)))
                .re
                / (2.0 * h)
        };
        // Richardson step removes the h² truncation term
        let slope = (4.0 * central(5e-5) - central(1e-4)) / 3.0;
        worst = worst.max((slope + 2.0 * log_det_perp(&f)).abs());
    }
    (worst, 1e-6)
}

fn check_adjoint_symmetry() -> (f64, f64) {
    let mut rng = samples::rng(903);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let s = samples::random_space(&mut rng, 5);
        let t = samples::random_space(&mut rng, 3);
        let f = samples::random_map(&mut rng, &s, &t);
        worst = worst.max((log_det_perp(&adjoint(&f)) - log_det_perp(&f)).abs());
    }
    (worst, 1e-9)
}

fn check_laplacian_route() -> (f64, f64) {
    use rand::Rng;
    let mut rng = samples::rng(911);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let dims: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=6)).collect();
        let (cx, _) = samples::random_complex(&mut rng, 0, &dims);
        worst = worst.max((cx.torsion() - cx.torsion_via_laplacian()).abs());
    }
    (worst, 1e-9)
}

fn check_ses_additivity() -> (f64, f64) {
    let mut rng = samples::rng(912);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let ses = samples::random_ses(&mut rng, 0, &[3, 4, 3], &[2, 3, 2]);
        let (lhs, rhs) = additivity_check(&ses).expect("structures computable");
        worst = worst.max((lhs - rhs).abs());
    }
    (worst, 1e-8)
}

fn check_direct_sum() -> (f64, f64) {
    let mut rng = samples::rng(913);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let (a, _) = samples::random_complex(&mut rng, 0, &[3, 4, 2]);
        let (b, _) = samples::random_complex(&mut rng, 0, &[2, 3, 3]);
        let sum = a.direct_sum(&b);
        worst = worst.max((sum.torsion() - a.torsion() - b.torsion()).abs());
    }
    (worst, 1e-9)
}

fn check_homotopy_cone() -> (f64, f64) {
    let mut rng = samples::rng(914);
    let mut worst = 0.0_f64;
    for _ in 0..8 {
        let f = samples::random_homotopy_equivalence(&mut rng, 0, &[3, 4, 3], &[2, 5, 4]);
        worst = worst.max(homotopy_equivalence_residual(&f, 1.0).abs());
    }
    (worst, 1e-8)
}

fn check_snf_reconstruction() -> (f64, f64) {
    let mut rng = samples::rng(921);
    for _ in 0..15 {
        let a = samples::random_int_matrix(&mut rng, 4, 5, 6);
        let snf = smith_normal_form(&a);
        let reconstructed = snf.u.mul(&a).mul(&snf.v);
        if reconstructed != snf.d {
            return (1.0, 0.5);
        }
        // consecutive diagonal entries must divide
        let k = snf.d.rows().min(snf.d.cols());
        for i in 1..k {
            let prev = snf.d.get(i - 1, i - 1);
            let cur = snf.d.get(i, i);
            if !prev.is_zero() && !(cur.clone() % prev).is_zero() && !cur.is_zero() {
                return (1.0, 0.5);
            }
        }
    }
    (0.0, 0.5)
}

fn check_contractible_zero() -> (f64, f64) {
    let mut rng = samples::rng(922);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let c = samples::random_contractible_zcomplex(&mut rng);
        worst = worst.max(c.realify().torsion().abs());
    }
    (worst, 1e-7)
}

fn check_torsion_order_oracle() -> (f64, f64) {
    let mut rng = samples::rng(923);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let (c, _) = samples::random_torsion_zcomplex(&mut rng);
        let rho = structured_torsion(&c, &integral_structure(&c)).expect("integral structure");
        let oracle: f64 = integral_homology(&c)
            .iter()
            .map(|h| {
                let sign = if h.degree.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                sign * h.torsion_order().to_f64().expect("small order").ln()
            })
            .sum();
        worst = worst.max((rho - oracle).abs());
    }
    (worst, 1e-8)
}

fn check_moore_values() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for m in 2..=12u64 {
        let c = samples::moore_zcomplex(0, m);
        let rho = structured_torsion(&c, &integral_structure(&c)).expect("integral structure");
        worst = worst.max((rho - (m as f64).ln()).abs());
    }
    (worst, 1e-10)
}

fn check_convention_uniqueness() -> (f64, f64) {
    let passing = convention_sweep().iter().filter(|c| c.passes).count();
    (if passing == 1 { 0.0 } else { 1.0 }, 0.5)
}

fn check_circle_invariance() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.1, 1.0, std::f64::consts::E, 10.0] {
        for n in 3..=30 {
            let m = circle_model(n, mu).expect("circle model");
            let rho = crate::manifold::rho_top(&m).expect("closed orientable");
            worst = worst.max((rho - mu.ln()).abs());
        }
    }
    (worst, 1e-9)
}

fn check_interval_value() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.5, 1.0, 2.0] {
        for n in 1..=30 {
            let m = interval_model(n, mu).expect("interval model");
            let rho = crate::manifold::rho_top(&m).expect("anchored interval");
            worst = worst.max((rho - mu.ln()).abs());
        }
    }
    (worst, 1e-10)
}

fn check_torus_vanishes() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for (n1, n2, mu1, mu2) in [(3, 4, 1.0, 1.0), (4, 5, 2.0, 0.5), (5, 3, 3.0, 7.0)] {
        let torus = product_model(
            &circle_model(n1, mu1).expect("factor"),
            &circle_model(n2, mu2).expect("factor"),
        )
        .expect("torus product");
        worst = worst.max(crate::manifold::rho_top(&torus).expect("closed").abs());
    }
    (worst, 1e-9)
}

fn check_product_formula() -> (f64, f64) {
    let mut worst = 0.0_f64;
    let pairs = [
        (circle_model(4, 2.0).unwrap(), circle_model(5, 3.0).unwrap()),
        (circle_model(3, 0.5).unwrap(), point_model()),
        (circle_model(6, 4.0).unwrap(), circle_model(3, 1.0).unwrap()),
    ];
    for (x, y) in pairs {
        let (lhs, rhs) = crate::manifold::product_formula_check(&x, &y).expect("product");
        worst = worst.max((lhs - rhs).abs());
    }
    (worst, 1e-8)
}

fn check_glueing() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for (mu1, mu2) in [(1.0, 1.0), (2.0, 3.0), (0.5, 4.0)] {
        let report = crate::manifold::glueing_check_1d(mu1, mu2).expect("glueing data");
        worst = worst.max((report.lhs - report.rhs).abs());
    }
    (worst, 1e-8)
}

fn check_structure_dependence() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for (n, k, mu_c, mu_d) in [(4, 2, 1.0, 1.0), (3, 3, 2.0, 2.0), (5, 2, 0.5, 0.5)] {
        let r = crate::manifold::circle_structure_dependence_residual(n, k, mu_c, mu_d)
            .expect("subdivision comparison");
        worst = worst.max(r.abs());
    }
    (worst, 1e-8)
}

fn check_analytic_circle() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.1, 1.0, std::f64::consts::E, 10.0] {
        let model = circle_analytic(mu, 5).expect("analytic circle");
        worst = worst.max((rho_an(&model) - mu.ln()).abs());
    }
    (worst, 1e-12)
}

fn check_analytic_interval() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.5, 1.0, 3.0] {
        let model =
            interval_analytic(mu, 4, IntervalSpectrum::PaperValue).expect("analytic interval");
        worst = worst.max((rho_an(&model) - (2.0 * mu).ln()).abs());
    }
    (worst, 1e-12)
}

fn check_circle_defect() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.5, 1.0, 4.0] {
        let model = circle_analytic(mu, 7).expect("analytic circle");
        worst = worst.max(cheeger_mueller_defect(&model).expect("companion").abs());
    }
    (worst, 1e-9)
}

fn check_interval_defect() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.5, 1.0, 3.0] {
        let model =
            interval_analytic(mu, 5, IntervalSpectrum::PaperValue).expect("analytic interval");
        worst = worst.max(cheeger_mueller_defect(&model).expect("companion").abs());
    }
    (worst, 1e-12)
}

fn check_dp_order() -> (f64, f64) {
    let table = dodziuk_patodi_table(2.0 * std::f64::consts::PI, &[8, 16, 32, 64], 4)
        .expect("convergence table");
    let worst = table
        .orders
        .iter()
        .map(|(_, order)| (order - 2.0).abs())
        .fold(0.0, f64::max);
    (worst, 0.2)
}

fn check_conjugation_values() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.5, 2.0] {
        let m = equivariant_circle(ActionKind::Conjugation, 6, mu).expect("conjugation circle");
        let an = crate::equivariant::rho_an_g(&m).expect("analytic");
        let top = crate::equivariant::rho_top_g(&m).expect("topological");
        let pd = crate::equivariant::rho_pd_g(&m).expect("duality");
        worst = worst.max((an.trivial - mu.ln()).abs());
        worst = worst.max((an.sign - mu.ln()).abs());
        worst = worst.max((top.trivial - mu / 2.0).abs());
        worst = worst.max((top.sign - 2.0 * mu).abs());
        worst = worst.max((pd.trivial - 4.0).abs());
        worst = worst.max((pd.sign - 0.25).abs());
    }
    (worst, 1e-9)
}

fn check_antipodal_values() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for mu in [0.5, 2.0] {
        let m = equivariant_circle(ActionKind::Antipodal, 6, mu).expect("antipodal circle");
        let an = crate::equivariant::rho_an_g(&m).expect("analytic");
        let top = crate::equivariant::rho_top_g(&m).expect("topological");
        let pd = crate::equivariant::rho_pd_g(&m).expect("duality");
        worst = worst.max((an.trivial - mu.ln()).abs());
        worst = worst.max((an.sign - mu.ln()).abs());
        worst = worst.max((top.trivial - mu).abs());
        worst = worst.max((top.sign - mu).abs());
        worst = worst.max((pd.trivial - 1.0).abs());
        worst = worst.max((pd.sign - 1.0).abs());
    }
    (worst, 1e-9)
}

fn check_theorem_residual() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for kind in [ActionKind::Conjugation, ActionKind::Antipodal] {
        for mu in [0.5, 1.0, 5.0] {
            let m = equivariant_circle(kind, 8, mu).expect("equivariant circle");
            let report = crate::equivariant::theorem_check(&m).expect("all torsions");
            worst = worst.max(report.residual.max_abs());
        }
    }
    (worst, 1e-9)
}

fn check_free_corollary() -> (f64, f64) {
    let m = equivariant_circle(ActionKind::Antipodal, 10, 3.0).expect("antipodal circle");
    let pd = crate::equivariant::rho_pd_g(&m).expect("duality");
    let an = crate::equivariant::rho_an_g(&m).expect("analytic");
    let top = crate::equivariant::gamma1(&crate::equivariant::rho_top_g(&m).expect("topological"));
    let worst = crate::equivariant::gamma1(&pd)
        .max_abs()
        .max(an.sub(&top).max_abs());
    (worst, 1e-9)
}

fn check_forgetting() -> (f64, f64) {
    let mut worst = 0.0_f64;
    for kind in [ActionKind::Conjugation, ActionKind::Antipodal] {
        let mu = 2.0;
        let m = equivariant_circle(kind, 6, mu).expect("equivariant circle");
        let g1 = crate::equivariant::gamma1(&crate::equivariant::rho_top_g(&m).expect("topological"));
        worst = worst.max((0.5 * (g1.trivial + g1.sign) - mu.ln()).abs());
        let an = crate::equivariant::rho_an_g(&m).expect("analytic");
        worst = worst.max((0.5 * (an.trivial + an.sign) - mu.ln()).abs());
    }
    (worst, 1e-9)
}

fn check_isotypic_dims() -> (f64, f64) {
    for kind in [ActionKind::Conjugation, ActionKind::Antipodal] {
        for n in [4usize, 6, 8] {
            let m = equivariant_circle(kind, n, 1.0).expect("equivariant circle");
            let split = crate::equivariant::isotypic_decompose(&m).expect("involution");
            for d in 0..=1i64 {
                if split.trivial.dim(d) + split.sign.dim(d) != m.complex.dim(d) {
                    return (1.0, 0.5);
                }
            }
        }
    }
    (0.0, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        for suite in SUITES {
            let results = run_suite(suite).unwrap();
            assert!(!results.is_empty());
            for r in &results {
                assert!(
                    r.passed,
                    "{}/{}: residual {:.3e} over tolerance {:.3e}",
                    r.suite, r.name, r.residual, r.tolerance
                );
            }
        }
    }

    #[test]
    fn all_concatenates_in_canonical_order() {
        let all = run_suite("all").unwrap();
        let suites: Vec<&str> = all.iter().map(|r| r.suite).collect();
        let mut sorted_block_order: Vec<&str> = suites.clone();
        sorted_block_order.dedup();
        assert_eq!(sorted_block_order, SUITES.to_vec());
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope").is_err());
    }
}
