//! Volume-weighted harmonic homology structures on geometric cell models and
//! the torsion invariant they induce: subdivision-independent, equal to a
//! closed combinatorial formula on rational homology spheres, vanishing in
//! even dimensions, and compatible with products and one-dimensional
//! glueings.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::chain::{
    homology_class_coordinates, long_exact_homology_complex, ChainMap, HilbertChainComplex,
    LhsStructures, ShortExactSequence,
};
use crate::models::{
    circle_model, circle_subdivision_map, interval_model, product_block_layout, CellModel,
};
use crate::zchain::{
    hilbert_structured_torsion, integral_homology, integral_structure, structure_comparison_residual,
    BasedZChainComplex, HomologyStructure, StructureTag, TorsionConvention,
};
use crate::{Result, TorsionError};

/// Powers of the volume carried by the degree-0 and top-degree generator
/// norms of a closed model's harmonic structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicExponents {
    pub degree_zero: f64,
    pub top_degree: f64,
}

/// The interval's degree-0 generator norm is `vol^{ANCHOR}`; this pins the
/// manifold-with-boundary value at `ln vol` (see `harmonic_structure`).
pub const INTERVAL_ANCHOR_EXPONENT: f64 = -1.0;

/// Picks the unique assignment of `±1/2` volume exponents at degrees 0 and d
/// for which the circle invariant comes out as `ln vol` under the selected
/// torsion convention.  Both candidates are evaluated on a reference circle
/// of volume `e`, so the expected value is exactly 1.
pub fn harmonic_exponents() -> HarmonicExponents {
    static SELECTED: OnceLock<HarmonicExponents> = OnceLock::new();
    *SELECTED.get_or_init(|| {
        let reference = circle_model(5, std::f64::consts::E).expect("reference circle");
        let candidates = [
            HarmonicExponents { degree_zero: -0.5, top_degree: 0.5 },
            HarmonicExponents { degree_zero: 0.5, top_degree: -0.5 },
        ];
        let mut winner = None;
        for cand in candidates {
            let kappa = sphere_like_structure(&reference, cand).expect("reference structure");
            let rho = hilbert_structured_torsion(
                &reference.complex.realify(),
                &kappa,
                TorsionConvention::SELECTED,
            )
            .expect("reference torsion");
            if (rho - 1.0).abs() < 1e-9 {
                assert!(winner.is_none(), "both exponent assignments match the circle value");
                winner = Some(cand);
            }
        }
        winner.expect("no exponent assignment reproduces the circle value")
    })
}

/// Harmonic structure of a closed model whose free homology is rank one in
/// degrees 0 and d and zero elsewhere.
fn sphere_like_structure(m: &CellModel, exponents: HarmonicExponents) -> Result<HomologyStructure> {
    let d = m.metadata.dimension;
    let vol = m.metadata.volume;
    let integral = integral_structure(&m.complex);
    let mut degrees = BTreeMap::new();
    for (n, exponent) in [(0, exponents.degree_zero), (d, exponents.top_degree)] {
        let basis = integral
            .basis(n)
            .ok_or_else(|| {
                TorsionError::UnsupportedHomology(format!("{}: no generator at degree {n}", m.name))
            })?
            .clone();
        let gram = DMatrix::from_element(1, 1, vol.powf(2.0 * exponent));
        degrees.insert(n, (basis, gram));
    }
    HomologyStructure::new(StructureTag::Harmonic, degrees)
}

/// The volume-weighted harmonic structure `κ^harm` of a model.
///
/// Closed rational homology spheres get rank-one Grams `vol^{±1}` at degrees
/// 0 and d (exponents fixed by `harmonic_exponents`); products tensor the
/// factor structures; zero-dimensional models of unit volume get identity
/// Grams; the interval is anchored at a degree-0 Gram of `vol^{−2}`, which
/// defines its invariant as `ln vol`.
pub fn harmonic_structure(m: &CellModel) -> Result<HomologyStructure> {
    if m.factors.len() == 2 {
        return product_harmonic(m);
    }
    let homology = integral_homology(&m.complex);
    for h in &homology {
        if !h.torsion.is_empty() {
            return Err(TorsionError::UnsupportedHomology(format!(
                "{}: torsion of order {} in degree {}",
                m.name,
                h.torsion_order(),
                h.degree
            )));
        }
    }
    let rank = |n: i64| {
        homology
            .iter()
            .find(|h| h.degree == n)
            .map(|h| h.free_rank)
            .unwrap_or(0)
    };
    let d = m.metadata.dimension;
    let md = &m.metadata;

    if d == 0 && md.closed {
        // isolated points of unit volume: the cellular basis is already L²
        if (md.volume - 1.0).abs() > 1e-12 {
            return Err(TorsionError::UnsupportedHomology(format!(
                "{}: zero-dimensional models must have unit volume",
                m.name
            )));
        }
        let integral = integral_structure(&m.complex);
        let b = integral.rank(0);
        let basis = integral.basis(0).expect("degree-0 generators").clone();
        let mut degrees = BTreeMap::new();
        degrees.insert(0, (basis, DMatrix::identity(b, b)));
        return HomologyStructure::new(StructureTag::Harmonic, degrees);
    }

    let contractible = m
        .complex
        .degrees()
        .all(|n| rank(n) == if n == 0 { 1 } else { 0 });
    if !md.closed && d == 1 && contractible {
        // anchored interval: ‖generator of H₀‖ = vol^{−1}
        let integral = integral_structure(&m.complex);
        let basis = integral.basis(0).expect("degree-0 generator").clone();
        let gram = DMatrix::from_element(1, 1, md.volume.powf(2.0 * INTERVAL_ANCHOR_EXPONENT));
        let mut degrees = BTreeMap::new();
        degrees.insert(0, (basis, gram));
        return HomologyStructure::new(StructureTag::Harmonic, degrees);
    }

    let sphere_like = md.closed
        && md.orientable
        && d >= 1
        && m
            .complex
            .degrees()
            .all(|n| rank(n) == if n == 0 || n == d { 1 } else { 0 });
    if sphere_like {
        return sphere_like_structure(m, harmonic_exponents());
    }
    Err(TorsionError::UnsupportedHomology(format!(
        "{}: no harmonic structure rule for this homology pattern",
        m.name
    )))
}

/// Tensor transport of the factor structures onto a product model: the basis
/// of `H_n` is the set of tensor cycles `u ⊗ w` over `p + q = n`, with Gram
/// the Kronecker product of the factor Grams, blocks orthogonal.
fn product_harmonic(m: &CellModel) -> Result<HomologyStructure> {
    let (x, y) = (&m.factors[0], &m.factors[1]);
    let kx = harmonic_structure(x)?;
    let ky = harmonic_structure(y)?;
    let (cx, cy) = (&x.complex, &y.complex);
    let mut degrees = BTreeMap::new();
    let min = cx.min_degree() + cy.min_degree();
    let max = cx.max_degree() + cy.max_degree();
    for n in min..=max {
        let layout = product_block_layout(cx, cy, n);
        let total_dim: usize = layout.iter().map(|&(_, _, _, dx, dy)| dx * dy).sum();
        let total_rank: usize = layout
            .iter()
            .map(|&(p, q, _, _, _)| kx.rank(p) * ky.rank(q))
            .sum();
        if total_rank == 0 {
            continue;
        }
        let mut basis = DMatrix::zeros(total_dim, total_rank);
        let mut gram = DMatrix::zeros(total_rank, total_rank);
        let mut col = 0;
        for &(p, q, offset, dx, dy) in &layout {
            let (rp, rq) = (kx.rank(p), ky.rank(q));
            if rp * rq == 0 {
                continue;
            }
            let (bu, gu) = (kx.basis(p).unwrap(), kx.gram(p).unwrap());
            let (bw, gw) = (ky.basis(q).unwrap(), ky.gram(q).unwrap());
            for iu in 0..rp {
                for iw in 0..rq {
                    for a in 0..dx {
                        for b in 0..dy {
                            basis[(offset + a * dy + b, col + iu * rq + iw)] =
                                bu[(a, iu)] * bw[(b, iw)];
                        }
                    }
                }
            }
            let block = gu.kronecker(gw);
            gram.view_mut((col, col), (rp * rq, rp * rq)).copy_from(&block);
            col += rp * rq;
        }
        degrees.insert(n, (basis, gram));
    }
    HomologyStructure::new(StructureTag::Harmonic, degrees)
}

/// The subdivision-independent torsion invariant `ρ` of a geometric model
/// under its harmonic structure and the selected convention.
pub fn rho_top(m: &CellModel) -> Result<f64> {
    rho_top_with(m, TorsionConvention::SELECTED)
}

pub fn rho_top_with(m: &CellModel, convention: TorsionConvention) -> Result<f64> {
    let kappa = harmonic_structure(m)?;
    hilbert_structured_torsion(&m.complex.realify(), &kappa, convention)
}

/// Closed-form right-hand side for rational homology spheres:
/// `((1 − (−1)^d)/2)·ln vol + Σ (−1)^n ln |tors H_n|`.
pub fn rho_top_rhs_formula(d: i64, vol: f64, torsion_orders: &[(i64, BigInt)]) -> f64 {
    let prefactor = if d.rem_euclid(2) == 1 { 1.0 } else { 0.0 };
    let mut value = prefactor * vol.ln();
    for (n, order) in torsion_orders {
        let o = order.to_f64().expect("torsion order fits in f64");
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        value += sign * o.ln();
    }
    value
}

/// Exact torsion orders per degree, for feeding the closed formula.
pub fn torsion_orders(c: &BasedZChainComplex) -> Vec<(i64, BigInt)> {
    integral_homology(c)
        .iter()
        .filter(|h| !h.torsion.is_empty())
        .map(|h| (h.degree, h.torsion_order()))
        .collect()
}

/// Both sides of `ρ(X×Y) = χ(X)·ρ(Y) + χ(Y)·ρ(X)`.
pub fn product_formula_check(x: &CellModel, y: &CellModel) -> Result<(f64, f64)> {
    let product = crate::models::product_model(x, y)?;
    let lhs = rho_top(&product)?;
    let rhs = x.euler_characteristic() as f64 * rho_top(y)?
        + y.euler_characteristic() as f64 * rho_top(x)?;
    Ok((lhs, rhs))
}

/// How much a homotopy equivalence's contribution to the invariant is
/// captured by its induced maps on harmonic homology: the residual of
/// `ρ(D;κ_D) − ρ(C;κ_C) + Σ (−1)^n ln det⊥(H_n(f))` for the subdivision map
/// `S¹[n](μ_c) → S¹[nk](μ_d)`.
pub fn circle_structure_dependence_residual(
    n: usize,
    k: usize,
    mu_c: f64,
    mu_d: f64,
) -> Result<f64> {
    let f = circle_subdivision_map(n, k)?;
    let kc = harmonic_structure(&circle_model(n, mu_c)?)?;
    let kd = harmonic_structure(&circle_model(n * k, mu_d)?)?;
    structure_comparison_residual(&f, &kc, &kd)
}

#[derive(Clone, Debug)]
pub struct GlueingReport {
    /// invariant of the glued circle of volume μ₁+μ₂
    pub lhs: f64,
    /// ρ(M) + ρ(N) − ρ(∂M) + ρ(LES)
    pub rhs: f64,
    pub rho_piece_1: f64,
    pub rho_piece_2: f64,
    pub rho_boundary: f64,
    pub les_torsion: f64,
}

/// Glues two intervals of volumes `μ₁`, `μ₂` along their endpoints into a
/// circle and evaluates both sides of the cut-and-paste identity
/// `ρ(M ∪ N) = ρ(M) + ρ(N) − ρ(∂M) + ρ(LES)` with harmonic structures on
/// every homology group of the Mayer–Vietoris sequence.
pub fn glueing_check_1d(mu1: f64, mu2: f64) -> Result<GlueingReport> {
    glueing_check_1d_with(4, 5, mu1, mu2)
}

/// The same identity at explicit subdivision levels `n₁`, `n₂`.
pub fn glueing_check_1d_with(n1: usize, n2: usize, mu1: f64, mu2: f64) -> Result<GlueingReport> {
    if n1 < 1 || n2 < 1 {
        return Err(TorsionError::InvalidParameter("need n₁, n₂ ≥ 1".into()));
    }
    let m = interval_model(n1, mu1)?;
    let n_model = interval_model(n2, mu2)?;
    let mu = mu1 + mu2;
    let total_cells = n1 + n2;
    let x = circle_model(total_cells, mu)?;

    let rm = m.complex.realify();
    let rn = n_model.complex.realify();
    let rd = rm.direct_sum(&rn);
    let rx = x.complex.realify();

    // ∂M = S⁰: the two shared endpoints, unit-volume points
    let boundary = BasedZChainComplex::new(0, vec![2], vec![])?;
    let rb = boundary.realify();
    let kappa_b = {
        let integral = integral_structure(&boundary);
        let basis = integral.basis(0).unwrap().clone();
        let mut degrees = BTreeMap::new();
        degrees.insert(0, (basis, DMatrix::identity(2, 2)));
        HomologyStructure::new(StructureTag::Harmonic, degrees)?
    };
    let rho_boundary =
        hilbert_structured_torsion(&rb, &kappa_b, TorsionConvention::SELECTED)?;

    // Mayer–Vietoris inclusion a ↦ (a|_M, −a|_N): the first endpoint is
    // vertex 0 of both arcs, the second is M-vertex n₁ = N-vertex n₂.
    let dim_d0 = (n1 + 1) + (n2 + 1);
    let mut i0 = DMatrix::zeros(dim_d0, 2);
    i0[(0, 0)] = 1.0;
    i0[(n1 + 1, 0)] = -1.0;
    i0[(n1, 1)] = 1.0;
    i0[(n1 + 1 + n2, 1)] = -1.0;
    let incl = ChainMap::new(rb.clone(), rd.clone(), vec![i0])?;

    // projection onto the circle: M runs forward along edges 0..n₁, N runs
    // backward over the remaining arc (vertex j ↦ (n−j) mod n, edges reversed)
    let mut p0 = DMatrix::zeros(total_cells, dim_d0);
    for k in 0..=n1 {
        p0[(k % total_cells, k)] += 1.0;
    }
    for j in 0..=n2 {
        p0[((total_cells - j) % total_cells, n1 + 1 + j)] += 1.0;
    }
    let mut p1 = DMatrix::zeros(total_cells, n1 + n2);
    for k in 0..n1 {
        p1[(k, k)] = 1.0;
    }
    for j in 0..n2 {
        p1[(total_cells - 1 - j, n1 + j)] = -1.0;
    }
    let proj = ChainMap::new(rd.clone(), rx.clone(), vec![p0, p1])?;
    let ses = ShortExactSequence::new(incl, proj)?;

    // harmonic Grams on the long-exact-sequence entries, expressed in
    // harmonic-ONB coordinates of each complex
    let kappa_m = harmonic_structure(&m)?;
    let kappa_n = harmonic_structure(&n_model)?;
    let kappa_x = harmonic_structure(&x)?;

    let mut total = BTreeMap::new();
    let basis_d0 = {
        let bm = kappa_m.basis(0).unwrap();
        let bn = kappa_n.basis(0).unwrap();
        let mut b = DMatrix::zeros(dim_d0, 2);
        b.view_mut((0, 0), (n1 + 1, 1)).copy_from(bm);
        b.view_mut((n1 + 1, 1), (n2 + 1, 1)).copy_from(bn);
        b
    };
    let gram_d0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        kappa_m.gram(0).unwrap()[(0, 0)],
        kappa_n.gram(0).unwrap()[(0, 0)],
    ]));
    total.insert(0, onb_gram(&rd, 0, &basis_d0, &gram_d0)?);

    let mut quotient = BTreeMap::new();
    for n in [0_i64, 1] {
        quotient.insert(
            n,
            onb_gram(&rx, n, kappa_x.basis(n).unwrap(), kappa_x.gram(n).unwrap())?,
        );
    }
    // S⁰ keeps identity Grams, which is already the harmonic default
    let structures = LhsStructures::Custom {
        sub: BTreeMap::new(),
        total,
        quotient,
    };
    let les = long_exact_homology_complex(&ses, &structures, 1)?;
    let les_torsion = les.torsion();

    let rho_piece_1 = rho_top(&m)?;
    let rho_piece_2 = rho_top(&n_model)?;
    let lhs = rho_top(&x)?;
    let rhs = rho_piece_1 + rho_piece_2 - rho_boundary + les_torsion;
    Ok(GlueingReport {
        lhs,
        rhs,
        rho_piece_1,
        rho_piece_2,
        rho_boundary,
        les_torsion,
    })
}

/// Re-expresses a structure Gram in harmonic-ONB coordinates: if the class
/// matrix of `basis` in the ONB is `W`, the metric with `WᵀMW = G` is
/// `M = W^{−T} G W^{−1}`.
fn onb_gram(
    cx: &HilbertChainComplex,
    n: i64,
    basis: &DMatrix<f64>,
    gram: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let w = homology_class_coordinates(cx, n, basis);
    let w_inv = w.lu().try_inverse().ok_or_else(|| {
        TorsionError::InvalidParameter(format!("structure basis at degree {n} does not span"))
    })?;
    let m = w_inv.transpose() * gram * &w_inv;
    Ok(0.5 * (&m + m.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{moore_model, point_model, product_model};
    use approx::assert_relative_eq;

    #[test]
    fn exponent_selector_is_minus_half_at_degree_zero() {
        let e = harmonic_exponents();
        assert_eq!(e.degree_zero, -0.5);
        assert_eq!(e.top_degree, 0.5);
    }

    #[test]
    fn circle_invariant_is_log_volume_and_subdivision_free() {
        for mu in [0.1, 1.0, std::f64::consts::E, 10.0] {
            let values: Vec<f64> = (3..=30)
                .map(|n| rho_top(&circle_model(n, mu).unwrap()).unwrap())
                .collect();
            for v in &values {
                assert!((v - mu.ln()).abs() < 1e-9, "μ = {mu}: ρ = {v}");
            }
            let spread = values.iter().cloned().fold(f64::MIN, f64::max)
                - values.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1e-9, "μ = {mu}: spread = {spread}");
        }
    }

    #[test]
    fn interval_invariant_is_log_volume() {
        for mu in [0.5, 1.0, 3.0] {
            for n in 1..=30 {
                let rho = rho_top(&interval_model(n, mu).unwrap()).unwrap();
                assert!((rho - mu.ln()).abs() < 1e-10, "n = {n}, μ = {mu}: ρ = {rho}");
            }
        }
    }

    #[test]
    fn point_invariant_vanishes() {
        assert_relative_eq!(rho_top(&point_model()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn torsion_homology_is_rejected() {
        assert!(matches!(
            rho_top(&moore_model(5).unwrap()),
            Err(TorsionError::UnsupportedHomology(_))
        ));
    }

    #[test]
    fn closed_formula_matches_invariant_on_supported_models() {
        for (n, mu) in [(3, 0.25), (5, 1.0), (8, 7.5)] {
            let c = circle_model(n, mu).unwrap();
            let rhs = rho_top_rhs_formula(1, mu, &torsion_orders(&c.complex));
            assert!((rho_top(&c).unwrap() - rhs).abs() < 1e-9);
            assert_relative_eq!(rhs, mu.ln(), epsilon = 1e-12);
        }
        let t = product_model(
            &circle_model(3, 2.0).unwrap(),
            &circle_model(4, 0.5).unwrap(),
        )
        .unwrap();
        let rhs = rho_top_rhs_formula(2, 1.0, &torsion_orders(&t.complex));
        assert_relative_eq!(rhs, 0.0, epsilon = 1e-12);
        assert!((rho_top(&t).unwrap() - rhs).abs() < 1e-9);
    }

    #[test]
    fn closed_formula_spot_values() {
        assert_relative_eq!(rho_top_rhs_formula(1, 2.0, &[]), 2.0_f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(rho_top_rhs_formula(2, 9.0, &[]), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            rho_top_rhs_formula(3, 1.0, &[(1, BigInt::from(5))]),
            -(5.0_f64.ln()),
            epsilon = 1e-15
        );
    }

    #[test]
    fn even_dimensional_products_vanish() {
        for (a, b) in [(3, 4), (5, 3), (4, 4)] {
            let t = product_model(
                &circle_model(a, 1.7).unwrap(),
                &circle_model(b, 0.3).unwrap(),
            )
            .unwrap();
            let rho = rho_top(&t).unwrap();
            assert!(rho.abs() < 1e-9, "S¹[{a}]×S¹[{b}]: ρ = {rho}");
        }
    }

    #[test]
    fn product_formula_on_tori_and_cylinders() {
        let x = circle_model(3, 2.0).unwrap();
        let y = circle_model(5, 0.4).unwrap();
        let (lhs, rhs) = product_formula_check(&x, &y).unwrap();
        assert!(lhs.abs() < 1e-9 && rhs.abs() < 1e-12);

        let p = point_model();
        let (lhs, rhs) = product_formula_check(&x, &p).unwrap();
        assert_relative_eq!(lhs, 2.0_f64.ln(), epsilon = 1e-9);
        assert_relative_eq!(rhs, 2.0_f64.ln(), epsilon = 1e-12);

        // subdivision-refined second factor
        let y2 = circle_model(15, 0.4).unwrap();
        let (l1, r1) = product_formula_check(&x, &y2).unwrap();
        assert!((l1 - r1).abs() < 1e-8);
    }

    #[test]
    fn glueing_identity_on_interval_unions() {
        for (n1, n2, mu1, mu2) in [
            (1, 2, 0.5, 0.5),
            (4, 5, 0.5, 0.5),
            (3, 3, 2.0, 2.0),
            (2, 7, 0.3, 1.9),
            (6, 4, 10.0, 0.01),
        ] {
            let report = glueing_check_1d_with(n1, n2, mu1, mu2).unwrap();
            assert!(
                (report.lhs - report.rhs).abs() < 1e-8,
                "({n1},{n2},{mu1},{mu2}): lhs = {}, rhs = {}",
                report.lhs,
                report.rhs
            );
            assert_relative_eq!(report.lhs, (mu1 + mu2).ln(), epsilon = 1e-9);
            assert_relative_eq!(report.rho_boundary, 0.0, epsilon = 1e-12);
            // the sequence torsion carries exactly the volume mismatch
            assert_relative_eq!(
                report.les_torsion,
                (mu1 + mu2).ln() - mu1.ln() - mu2.ln(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn default_glueing_is_symmetric_and_tight() {
        let r = glueing_check_1d(0.5, 0.5).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-8);
        assert!(r.lhs.abs() < 1e-9);
        assert_relative_eq!(r.rho_piece_1, 0.5_f64.ln(), epsilon = 1e-10);
        assert_relative_eq!(r.rho_piece_2, 0.5_f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn invariant_difference_is_carried_by_induced_maps() {
        for (n, k, mu_c, mu_d) in [
            (3, 1, 1.0, 2.0),
            (4, 2, 0.5, 3.0),
            (5, 3, 2.0, 2.0),
            (6, 2, 0.1, 10.0),
        ] {
            let res = circle_structure_dependence_residual(n, k, mu_c, mu_d).unwrap();
            assert!(res.abs() < 1e-8, "({n},{k},{mu_c},{mu_d}): residual = {res}");
        }
    }

    #[test]
    fn harmonic_structure_grams_carry_volume_powers() {
        let c = circle_model(6, 4.0).unwrap();
        let kappa = harmonic_structure(&c).unwrap();
        assert_relative_eq!(kappa.gram(0).unwrap()[(0, 0)], 0.25, epsilon = 1e-12);
        assert_relative_eq!(kappa.gram(1).unwrap()[(0, 0)], 4.0, epsilon = 1e-12);

        let t = product_model(&circle_model(3, 2.0).unwrap(), &circle_model(3, 8.0).unwrap())
            .unwrap();
        let kt = harmonic_structure(&t).unwrap();
        assert_eq!(kt.rank(1), 2);
        let g1 = kt.gram(1).unwrap();
        // blocks ascend in the first factor's degree: [v⊗z₂] then [z₁⊗w]
        assert_relative_eq!(g1[(0, 0)], 8.0 / 2.0, epsilon = 1e-12);
        assert_relative_eq!(g1[(1, 1)], 2.0 / 8.0, epsilon = 1e-12);
        assert_relative_eq!(g1[(0, 1)], 0.0, epsilon = 1e-12);
    }
}
