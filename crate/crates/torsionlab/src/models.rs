//! Concrete cell models: subdivided intervals and circles, tensor products
//! (tori, squares), two-term multiplication complexes, and ℤ/2-equivariant
//! circle structures.  Every factory output carries exact integer boundary
//! matrices plus the geometric metadata (dimension, volume, boundary Euler
//! characteristic) the torsion pipelines consume.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::chain::ChainMap;
use crate::zchain::{BasedZChainComplex, IntMat};
use crate::{Result, TorsionError};

#[derive(Clone, Debug)]
pub struct ModelMetadata {
    pub dimension: i64,
    pub volume: f64,
    /// Euler characteristic of the boundary; 0 for closed models.
    pub boundary_euler: i64,
    pub orientable: bool,
    pub closed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionKind {
    Conjugation,
    Antipodal,
}

/// A ℤ/2-action on the cells: one signed permutation matrix per degree,
/// commuting with the boundary, squaring to the identity.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub order: usize,
    pub kind: ActionKind,
    /// generator matrices aligned with the complex's degree range
    pub generator: Vec<IntMat>,
}

#[derive(Clone, Debug)]
pub struct CellModel {
    pub name: String,
    pub complex: BasedZChainComplex,
    pub metadata: ModelMetadata,
    pub action: Option<GroupAction>,
    /// factors of a product model, in order; empty for primitive models
    pub factors: Vec<CellModel>,
}

impl CellModel {
    pub fn dim(&self, n: i64) -> usize {
        self.complex.dim(n)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.complex.euler_characteristic()
    }

    /// The generator matrix at degree `n` (identity permutation when the
    /// model carries no action).
    pub fn action_matrix(&self, n: i64) -> IntMat {
        match &self.action {
            Some(a) => {
                let k = (n - self.complex.min_degree()) as usize;
                a.generator
                    .get(k)
                    .cloned()
                    .unwrap_or_else(|| IntMat::identity(self.complex.dim(n)))
            }
            None => IntMat::identity(self.complex.dim(n)),
        }
    }
}

/// `I[n]`: `n` edges on `n+1` vertices, `∂e_j = v_{j+1} − v_j`, volume `μ`.
pub fn interval_model(n: usize, mu: f64) -> Result<CellModel> {
    if n < 1 {
        return Err(TorsionError::InvalidParameter("interval needs n ≥ 1".into()));
    }
    if !(mu > 0.0) {
        return Err(TorsionError::InvalidParameter("volume must be positive".into()));
    }
    let mut d1 = IntMat::zeros(n + 1, n);
    for j in 0..n {
        d1.set(j, j, BigInt::from(-1));
        d1.set(j + 1, j, BigInt::from(1));
    }
    let labels = vec![
        (0..=n).map(|i| format!("v{i}")).collect(),
        (0..n).map(|i| format!("e{i}")).collect(),
    ];
    let complex = BasedZChainComplex::with_labels(0, vec![n + 1, n], vec![d1], labels)?;
    Ok(CellModel {
        name: format!("interval[{n}]"),
        complex,
        metadata: ModelMetadata {
            dimension: 1,
            volume: mu,
            boundary_euler: 2,
            orientable: true,
            closed: false,
        },
        action: None,
        factors: Vec::new(),
    })
}

/// `S¹[n]`: cyclically oriented `n`-gon, `∂e_j = v_{j+1 mod n} − v_j`.
pub fn circle_model(n: usize, mu: f64) -> Result<CellModel> {
    if n < 3 {
        return Err(TorsionError::InvalidParameter("circle needs n ≥ 3".into()));
    }
    if !(mu > 0.0) {
        return Err(TorsionError::InvalidParameter("volume must be positive".into()));
    }
    let mut d1 = IntMat::zeros(n, n);
    for j in 0..n {
        d1.set(j, j, BigInt::from(-1));
        let head = (j + 1) % n;
        let cur = d1.get(head, j) + BigInt::from(1);
        d1.set(head, j, cur);
    }
    let labels = vec![
        (0..n).map(|i| format!("v{i}")).collect(),
        (0..n).map(|i| format!("e{i}")).collect(),
    ];
    let complex = BasedZChainComplex::with_labels(0, vec![n, n], vec![d1], labels)?;
    Ok(CellModel {
        name: format!("circle[{n}]"),
        complex,
        metadata: ModelMetadata {
            dimension: 1,
            volume: mu,
            boundary_euler: 0,
            orientable: true,
            closed: true,
        },
        action: None,
        factors: Vec::new(),
    })
}

/// A single vertex (closed zero-dimensional model, volume 1).
pub fn point_model() -> CellModel {
    let complex = BasedZChainComplex::with_labels(0, vec![1], vec![], vec![vec!["v0".into()]])
        .expect("one-cell complex");
    CellModel {
        name: "point".into(),
        complex,
        metadata: ModelMetadata {
            dimension: 0,
            volume: 1.0,
            boundary_euler: 0,
            orientable: true,
            closed: true,
        },
        action: None,
        factors: Vec::new(),
    }
}

/// The two-term complex `ℤ →(·m) ℤ` in degrees 1 → 0.
pub fn moore_model(m: u64) -> Result<CellModel> {
    if m < 2 {
        return Err(TorsionError::InvalidParameter("multiplication order must be ≥ 2".into()));
    }
    let mut d = IntMat::zeros(1, 1);
    d.set(0, 0, BigInt::from(m));
    let labels = vec![vec!["c0".into()], vec!["c1".into()]];
    let complex = BasedZChainComplex::with_labels(0, vec![1, 1], vec![d], labels)?;
    Ok(CellModel {
        name: format!("moore[{m}]"),
        complex,
        metadata: ModelMetadata {
            dimension: 1,
            volume: 1.0,
            boundary_euler: 0,
            orientable: false,
            closed: false,
        },
        action: None,
        factors: Vec::new(),
    })
}

/// The subdivision chain map `C(I[1]) → C(I[n])` on realifications:
/// endpoints to endpoints, the edge to the sum of all edges.
pub fn subdivision_map(n: usize) -> Result<ChainMap> {
    if n < 1 {
        return Err(TorsionError::InvalidParameter("subdivision needs n ≥ 1".into()));
    }
    Ok(crate::zchain::interval_subdivision_map(n))
}

/// The subdivision chain map `C(S¹[n]) → C(S¹[kn])`: vertex `i ↦ v_{ki}`,
/// edge `j ↦ e_{kj} + … + e_{kj+k−1}`.
pub fn circle_subdivision_map(n: usize, k: usize) -> Result<ChainMap> {
    if n < 3 || k < 1 {
        return Err(TorsionError::InvalidParameter("need n ≥ 3 and k ≥ 1".into()));
    }
    let coarse = circle_model(n, 1.0)?.complex.realify();
    let fine = circle_model(n * k, 1.0)?.complex.realify();
    let mut f0 = DMatrix::zeros(n * k, n);
    for i in 0..n {
        f0[(k * i, i)] = 1.0;
    }
    let mut f1 = DMatrix::zeros(n * k, n);
    for j in 0..n {
        for s in 0..k {
            f1[(k * j + s, j)] = 1.0;
        }
    }
    ChainMap::new(coarse, fine, vec![f0, f1])
}

/// Per-degree block layout of a tensor-product complex: for product degree
/// `n`, the list of `(p, q, offset, x_dim, y_dim)` with `p + q = n`, blocks
/// ascending in `p`, each block ordered x-major.
pub fn product_block_layout(
    x: &BasedZChainComplex,
    y: &BasedZChainComplex,
    n: i64,
) -> Vec<(i64, i64, usize, usize, usize)> {
    let mut layout = Vec::new();
    let mut offset = 0;
    for p in x.min_degree()..=x.max_degree() {
        let q = n - p;
        if q < y.min_degree() || q > y.max_degree() {
            continue;
        }
        let (dx, dy) = (x.dim(p), y.dim(q));
        if dx * dy == 0 {
            continue;
        }
        layout.push((p, q, offset, dx, dy));
        offset += dx * dy;
    }
    layout
}

/// Tensor product of cell models: cells are pairs, the boundary follows the
/// sign rule `∂(a⊗b) = ∂a⊗b + (−1)^{|a|} a⊗∂b`, volumes multiply,
/// dimensions add.
pub fn product_model(x: &CellModel, y: &CellModel) -> Result<CellModel> {
    let (cx, cy) = (&x.complex, &y.complex);
    let min = cx.min_degree() + cy.min_degree();
    let max = cx.max_degree() + cy.max_degree();
    let mut dims = Vec::new();
    let mut labels = Vec::new();
    for n in min..=max {
        let layout = product_block_layout(cx, cy, n);
        let total: usize = layout.iter().map(|&(_, _, _, dx, dy)| dx * dy).sum();
        dims.push(total);
        let mut degree_labels = Vec::with_capacity(total);
        for &(p, q, _, dx, dy) in &layout {
            for a in 0..dx {
                for b in 0..dy {
                    degree_labels.push(format!("{}.{}", cx.labels(p)[a], cy.labels(q)[b]));
                }
            }
        }
        labels.push(degree_labels);
    }
    let mut diffs = Vec::new();
    for n in min + 1..=max {
        let src = product_block_layout(cx, cy, n);
        let tgt = product_block_layout(cx, cy, n - 1);
        let rows: usize = tgt.iter().map(|&(_, _, _, dx, dy)| dx * dy).sum();
        let cols: usize = src.iter().map(|&(_, _, _, dx, dy)| dx * dy).sum();
        let mut m = IntMat::zeros(rows, cols);
        let tgt_offset = |p: i64| tgt.iter().find(|&&(tp, _, _, _, _)| tp == p).map(|&(_, _, o, _, dy)| (o, dy));
        for &(p, q, src_off, dx, dy) in &src {
            // ∂a ⊗ b lands in the (p−1, q) block
            if let Some((off, tdy)) = tgt_offset(p - 1) {
                debug_assert_eq!(tdy, dy);
                let bx = cx.boundary(p);
                for a in 0..dx {
                    for a2 in 0..bx.rows() {
                        let coeff = bx.get(a2, a);
                        if coeff.is_zero() {
                            continue;
                        }
                        for b in 0..dy {
                            let cur = m.get(off + a2 * dy + b, src_off + a * dy + b) + coeff;
                            m.set(off + a2 * dy + b, src_off + a * dy + b, cur);
                        }
                    }
                }
            }
            // (−1)^p a ⊗ ∂b lands in the (p, q−1) block
            if let Some((off, tdy)) = tgt_offset(p) {
                let by = cy.boundary(q);
                debug_assert_eq!(tdy, by.rows());
                let sign = BigInt::from(if p.rem_euclid(2) == 0 { 1 } else { -1 });
                for a in 0..dx {
                    for b in 0..dy {
                        for b2 in 0..by.rows() {
                            let coeff = by.get(b2, b) * &sign;
                            if coeff.is_zero() {
                                continue;
                            }
                            let cur = m.get(off + a * by.rows() + b2, src_off + a * dy + b) + coeff;
                            m.set(off + a * by.rows() + b2, src_off + a * dy + b, cur);
                        }
                    }
                }
            }
        }
        diffs.push(m);
    }
    let complex = BasedZChainComplex::with_labels(min, dims, diffs, labels)?;
    let (mx, my) = (&x.metadata, &y.metadata);
    // ∂(X×Y) = ∂X×Y ∪ X×∂Y glued along ∂X×∂Y
    let boundary_euler = mx.boundary_euler * euler_of(y) + euler_of(x) * my.boundary_euler
        - mx.boundary_euler * my.boundary_euler;
    Ok(CellModel {
        name: format!("{} x {}", x.name, y.name),
        complex,
        metadata: ModelMetadata {
            dimension: mx.dimension + my.dimension,
            volume: mx.volume * my.volume,
            boundary_euler,
            orientable: mx.orientable && my.orientable,
            closed: mx.closed && my.closed,
        },
        action: None,
        factors: vec![x.clone(), y.clone()],
    })
}

fn euler_of(m: &CellModel) -> i64 {
    m.complex.euler_characteristic()
}

/// `S¹[n]` with the ℤ/2-action: complex conjugation (vertex `i ↦ −i`,
/// edges reversed with a sign) or the antipodal rotation by `n/2`.
pub fn equivariant_circle(kind: ActionKind, n: usize, mu: f64) -> Result<CellModel> {
    if n % 2 != 0 {
        return Err(TorsionError::InvalidAction(format!(
            "the ℤ/2 circle actions need an even vertex count, got {n}"
        )));
    }
    let mut model = circle_model(n, mu)?;
    let mut g0 = IntMat::zeros(n, n);
    let mut g1 = IntMat::zeros(n, n);
    match kind {
        ActionKind::Conjugation => {
            // v_i ↦ v_{−i}; the arc [i, i+1] lands on [−i−1, −i] reversed
            for i in 0..n {
                g0.set((n - i) % n, i, BigInt::from(1));
            }
            for j in 0..n {
                g1.set(n - 1 - j, j, BigInt::from(-1));
            }
        }
        ActionKind::Antipodal => {
            for i in 0..n {
                g0.set((i + n / 2) % n, i, BigInt::from(1));
            }
            for j in 0..n {
                g1.set((j + n / 2) % n, j, BigInt::from(1));
            }
        }
    }
    let action = GroupAction {
        order: 2,
        kind,
        generator: vec![g0, g1],
    };
    validate_action(&model.complex, &action)?;
    model.name = format!(
        "{}-{}",
        model.name,
        match kind {
            ActionKind::Conjugation => "conj",
            ActionKind::Antipodal => "antipodal",
        }
    );
    model.action = Some(action);
    Ok(model)
}

/// Signed permutations, `g² = 1`, and exact commutation with the boundary.
pub(crate) fn validate_action(complex: &BasedZChainComplex, action: &GroupAction) -> Result<()> {
    if action.generator.len() != (complex.max_degree() - complex.min_degree() + 1) as usize {
        return Err(TorsionError::InvalidAction(
            "action must cover every degree".into(),
        ));
    }
    for (k, g) in action.generator.iter().enumerate() {
        let n = complex.min_degree() + k as i64;
        let d = complex.dim(n);
        if g.rows() != d || g.cols() != d {
            return Err(TorsionError::InvalidAction(format!(
                "generator at degree {n} is {}x{}, expected {d}x{d}",
                g.rows(),
                g.cols()
            )));
        }
        for j in 0..d {
            let nonzero: Vec<usize> = (0..d).filter(|&i| !g.get(i, j).is_zero()).collect();
            if nonzero.len() != 1 || g.get(nonzero[0], j).abs() != BigInt::from(1) {
                return Err(TorsionError::InvalidAction(format!(
                    "generator at degree {n} is not a signed permutation"
                )));
            }
        }
        if g.mul(g) != IntMat::identity(d) {
            return Err(TorsionError::InvalidAction(format!(
                "generator at degree {n} does not square to the identity"
            )));
        }
    }
    for n in complex.min_degree() + 1..=complex.max_degree() {
        let k = (n - complex.min_degree()) as usize;
        let d = complex.boundary(n);
        let lhs = action.generator[k - 1].mul(&d);
        let rhs = d.mul(&action.generator[k]);
        if lhs != rhs {
            return Err(TorsionError::InvalidAction(format!(
                "generator does not commute with the boundary at degree {n}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zchain::{integral_homology, smith_normal_form};
    use approx::assert_relative_eq;

    #[test]
    fn interval_boundary_at_n_equals_one() {
        let m = interval_model(1, 1.0).unwrap();
        let d = m.complex.boundary(1);
        assert_eq!(d.get(0, 0), &BigInt::from(-1));
        assert_eq!(d.get(1, 0), &BigInt::from(1));
    }

    #[test]
    fn interval_laplacian_determinant_is_n_plus_one() {
        for n in 1..=50 {
            let m = interval_model(n, 1.0).unwrap();
            let d1 = m.complex.boundary(1);
            let a = d1.transpose().mul(&d1);
            assert_eq!(a.determinant(), BigInt::from(n as i64 + 1), "n = {n}");
        }
    }

    #[test]
    fn interval_realified_torsion() {
        for n in 1..=30 {
            let m = interval_model(n, 1.0).unwrap();
            assert_relative_eq!(
                m.complex.realify().torsion(),
                ((n + 1) as f64).ln() / 2.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn circle_laplacian_nonzero_eigenvalue_product_is_n_squared() {
        // exact oracle: the sum of principal (n−1)-minors of Δ₁ equals the
        // product of the nonzero eigenvalues
        for n in 3..=12 {
            let m = circle_model(n, 1.0).unwrap();
            let d1 = m.complex.boundary(1);
            let lap = d1.transpose().mul(&d1);
            let mut sum = BigInt::zero();
            for drop in 0..n {
                let mut minor = IntMat::zeros(n - 1, n - 1);
                for i in 0..n - 1 {
                    for j in 0..n - 1 {
                        let si = i + usize::from(i >= drop);
                        let sj = j + usize::from(j >= drop);
                        minor.set(i, j, lap.get(si, sj).clone());
                    }
                }
                sum += minor.determinant();
            }
            assert_eq!(sum, BigInt::from((n * n) as i64), "n = {n}");
        }
    }

    #[test]
    fn circle_realified_torsion_is_log_n() {
        for n in 3..=30 {
            let m = circle_model(n, 1.0).unwrap();
            assert_relative_eq!(m.complex.realify().torsion(), (n as f64).ln(), epsilon = 1e-10);
        }
    }

    #[test]
    fn circle_boundary_columns_sum_to_zero() {
        let m = circle_model(7, 1.0).unwrap();
        let d = m.complex.boundary(1);
        for j in 0..7 {
            let sum: BigInt = (0..7).map(|i| d.get(i, j).clone()).sum();
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn subdivision_is_augmentation_preserving_with_zero_cone_torsion() {
        for n in 1..=8 {
            let f = subdivision_map(n).unwrap();
            // ε[n]∘C₀(f) = ε[1]: every degree-0 column sums to one
            let f0 = f.component(0);
            for j in 0..2 {
                assert_relative_eq!(f0.column(j).sum(), 1.0, epsilon = 0.0);
            }
            let tau = crate::chain::cone_torsion(&f);
            assert!(tau.abs() < 1e-10, "n = {n}: τ = {tau}");
            // H₀(f) is an isomorphism of rank-1 spaces
            assert_eq!(f.source().betti(0), 1);
            assert_eq!(f.target().betti(0), 1);
        }
    }

    #[test]
    fn circle_subdivision_commutes_and_has_zero_cone_torsion() {
        for (n, k) in [(3, 2), (4, 3), (5, 2)] {
            let f = circle_subdivision_map(n, k).unwrap();
            let tau = crate::chain::cone_torsion(&f);
            assert!(tau.abs() < 1e-9, "({n},{k}): τ = {tau}");
        }
    }

    #[test]
    fn torus_kuenneth_betti() {
        let s1 = circle_model(3, 1.0).unwrap();
        let s2 = circle_model(4, 1.0).unwrap();
        let t = product_model(&s1, &s2).unwrap();
        let r = t.complex.realify();
        assert_eq!((r.betti(0), r.betti(1), r.betti(2)), (1, 2, 1));
        assert_eq!(t.metadata.dimension, 2);
        assert!(t.metadata.closed);
        assert_eq!(t.metadata.boundary_euler, 0);
        // integral homology is torsion-free
        for h in integral_homology(&t.complex) {
            assert!(h.torsion.is_empty());
        }
    }

    #[test]
    fn square_product_is_contractible() {
        let i1 = interval_model(2, 1.0).unwrap();
        let i2 = interval_model(3, 1.0).unwrap();
        let sq = product_model(&i1, &i2).unwrap();
        let h = integral_homology(&sq.complex);
        assert_eq!(h[0].free_rank, 1);
        for hn in &h[1..] {
            assert_eq!(hn.free_rank, 0);
            assert!(hn.torsion.is_empty());
        }
        // boundary of the square is a circle
        assert_eq!(sq.metadata.boundary_euler, 0);
        assert!(!sq.metadata.closed);
    }

    #[test]
    fn product_with_point_is_the_factor() {
        let s1 = circle_model(5, 2.5).unwrap();
        let p = point_model();
        let prod = product_model(&s1, &p).unwrap();
        assert_eq!(prod.complex.dim(0), 5);
        assert_eq!(prod.complex.dim(1), 5);
        assert_relative_eq!(prod.metadata.volume, 2.5);
        assert_eq!(prod.metadata.dimension, 1);
    }

    #[test]
    fn moore_model_torsion_order() {
        let m = moore_model(5).unwrap();
        let h = integral_homology(&m.complex);
        assert_eq!(h[0].torsion, vec![BigInt::from(5)]);
        let snf = smith_normal_form(&m.complex.boundary(1));
        assert_eq!(snf.divisors(), vec![BigInt::from(5)]);
    }

    #[test]
    fn conjugation_action_shape() {
        for n in [4usize, 6, 8, 10, 12] {
            let m = equivariant_circle(ActionKind::Conjugation, n, 1.0).unwrap();
            let a = m.action.as_ref().unwrap();
            // exactly two fixed vertices, no fixed edges
            let fixed_v = (0..n).filter(|&i| a.generator[0].get(i, i) == &BigInt::from(1)).count();
            assert_eq!(fixed_v, 2, "n = {n}");
            let fixed_e = (0..n).filter(|&j| !a.generator[1].get(j, j).is_zero()).count();
            assert_eq!(fixed_e, 0, "n = {n}");
        }
    }

    #[test]
    fn antipodal_action_is_free_on_cells() {
        for n in [4usize, 6, 8, 10, 12] {
            let m = equivariant_circle(ActionKind::Antipodal, n, 1.0).unwrap();
            let a = m.action.as_ref().unwrap();
            for g in &a.generator {
                for i in 0..n {
                    assert!(g.get(i, i).is_zero(), "fixed cell at n = {n}");
                }
            }
        }
    }

    #[test]
    fn odd_circle_actions_are_rejected() {
        assert!(matches!(
            equivariant_circle(ActionKind::Antipodal, 5, 1.0),
            Err(TorsionError::InvalidAction(_))
        ));
        assert!(matches!(
            equivariant_circle(ActionKind::Conjugation, 7, 1.0),
            Err(TorsionError::InvalidAction(_))
        ));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(interval_model(0, 1.0).is_err());
        assert!(interval_model(3, 0.0).is_err());
        assert!(circle_model(2, 1.0).is_err());
        assert!(moore_model(1).is_err());
    }
}
