//! Operators between finite-dimensional real Hilbert spaces.
//!
//! A [`HilbertSpace`] is a distinguished basis together with the Gram matrix
//! of its inner products; a [`HilbertMap`] is a matrix between two such
//! spaces.  All spectral quantities (singular values, `det⊥`, spectral
//! density, finite zeta functions) are computed on the *Gram-orthonormalized*
//! matrix `B = L_Tᵀ · A · L_S^{-T}` where `G = L·Lᵀ` is the Cholesky
//! factorization of each Gram matrix, so they are intrinsic to the maps and
//! do not depend on the chosen bases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::tolerance::{self, is_zero_singular_value};
use crate::{Result, TorsionError};

/// Finite-dimensional real vector space with an inner product, presented by
/// the Gram matrix of a distinguished basis.
#[derive(Clone, Debug)]
pub struct HilbertSpace {
    gram: DMatrix<f64>,
    // gram = chol_l · chol_lᵀ with chol_l lower triangular
    chol_l: DMatrix<f64>,
    chol_l_inv: DMatrix<f64>,
}

impl HilbertSpace {
    /// Space with the given SPD Gram matrix.
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(TorsionError::GramNotPositiveDefinite(format!(
                "gram is {}x{}, not square",
                gram.nrows(),
                gram.ncols()
            )));
        }
        let n = gram.nrows();
        if n == 0 {
            return Ok(Self {
                gram,
                chol_l: DMatrix::zeros(0, 0),
                chol_l_inv: DMatrix::zeros(0, 0),
            });
        }
        let asym = (&gram - gram.transpose()).norm();
        if asym > 1e-10 * (1.0 + gram.norm()) {
            return Err(TorsionError::GramNotPositiveDefinite(format!(
                "asymmetry {asym:.3e}"
            )));
        }
        // symmetrize before factoring so round-off in the input cannot leak
        let sym = (&gram + gram.transpose()) * 0.5;
        let chol = nalgebra::linalg::Cholesky::new(sym).ok_or_else(|| {
            TorsionError::GramNotPositiveDefinite("Cholesky factorization failed".into())
        })?;
        let chol_l = chol.l();
        let chol_l_inv = chol_l
            .clone()
            .try_inverse()
            .ok_or_else(|| TorsionError::GramNotPositiveDefinite("singular Cholesky factor".into()))?;
        Ok(Self {
            gram,
            chol_l,
            chol_l_inv,
        })
    }

    /// Standard space: identity Gram.
    pub fn standard(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity gram is SPD")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Inner product of two coordinate vectors.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Orthogonal direct sum: block-diagonal Gram.
    pub fn direct_sum(&self, other: &HilbertSpace) -> HilbertSpace {
        let n = self.dim() + other.dim();
        let mut gram = DMatrix::zeros(n, n);
        gram.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.gram);
        gram.view_mut((self.dim(), self.dim()), (other.dim(), other.dim()))
            .copy_from(&other.gram);
        HilbertSpace::new(gram).expect("direct sum of SPD grams is SPD")
    }

    pub(crate) fn chol_l(&self) -> &DMatrix<f64> {
        &self.chol_l
    }

    pub(crate) fn chol_l_inv(&self) -> &DMatrix<f64> {
        &self.chol_l_inv
    }

    /// Columns of `m` rewritten in orthonormal coordinates (`u = Lᵀ x`).
    pub(crate) fn to_ortho(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol_l.transpose() * m
    }

    /// Inverse of [`Self::to_ortho`]: `x = L^{-T} u`.
    pub(crate) fn from_ortho(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol_l_inv.transpose() * m
    }

    /// Same dimension and Gram up to round-off.
    pub fn approx_eq(&self, other: &HilbertSpace) -> bool {
        self.dim() == other.dim()
            && (&self.gram - &other.gram).norm() <= 1e-9 * (1.0 + self.gram.norm())
    }
}

/// Linear map between Hilbert spaces: `matrix` is `target.dim × source.dim`
/// in the distinguished bases.
#[derive(Clone, Debug)]
pub struct HilbertMap {
    source: HilbertSpace,
    target: HilbertSpace,
    matrix: DMatrix<f64>,
}

impl HilbertMap {
    pub fn new(source: HilbertSpace, target: HilbertSpace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != target.dim() || matrix.ncols() != source.dim() {
            return Err(TorsionError::DimensionMismatch(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                target.dim(),
                source.dim()
            )));
        }
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Self {
            source: space.clone(),
            target: space.clone(),
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn zero(source: &HilbertSpace, target: &HilbertSpace) -> Self {
        let matrix = DMatrix::zeros(target.dim(), source.dim());
        Self {
            source: source.clone(),
            target: target.clone(),
            matrix,
        }
    }

    pub fn source(&self) -> &HilbertSpace {
        &self.source
    }

    pub fn target(&self) -> &HilbertSpace {
        &self.target
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &HilbertMap) -> Result<HilbertMap> {
        if !self.source.approx_eq(&other.target) {
            return Err(TorsionError::DimensionMismatch(
                "composition: inner spaces do not match".into(),
            ));
        }
        Ok(HilbertMap {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// Block-diagonal map between orthogonal direct sums.
    pub fn direct_sum(&self, other: &HilbertMap) -> HilbertMap {
        let source = self.source.direct_sum(&other.source);
        let target = self.target.direct_sum(&other.target);
        let mut matrix = DMatrix::zeros(target.dim(), source.dim());
        matrix
            .view_mut((0, 0), (self.target.dim(), self.source.dim()))
            .copy_from(&self.matrix);
        matrix
            .view_mut(
                (self.target.dim(), self.source.dim()),
                (other.target.dim(), other.source.dim()),
            )
            .copy_from(&other.matrix);
        HilbertMap {
            source,
            target,
            matrix,
        }
    }

    /// The map in orthonormal coordinates on both sides.
    pub fn ortho_matrix(&self) -> DMatrix<f64> {
        self.target.chol_l().transpose() * &self.matrix * self.source.chol_l_inv().transpose()
    }

    /// Rebuilds a map from its orthonormal-coordinate matrix.
    pub fn from_ortho(source: &HilbertSpace, target: &HilbertSpace, b: DMatrix<f64>) -> Self {
        let matrix = target.chol_l_inv().transpose() * b * source.chol_l().transpose();
        HilbertMap {
            source: source.clone(),
            target: target.clone(),
            matrix,
        }
    }

    /// All `source.dim()` singular values (descending), zero-padded when the
    /// target is smaller than the source.
    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.source.dim();
        let m = self.target.dim();
        if n == 0 {
            return Vec::new();
        }
        if m == 0 {
            return vec![0.0; n];
        }
        let sv = self.ortho_matrix().singular_values();
        let mut out: Vec<f64> = sv.iter().copied().collect();
        out.resize(n, 0.0);
        out.sort_by(|a, b| b.partial_cmp(a).unwrap());
        out
    }

    pub fn rank(&self) -> usize {
        let sv = self.singular_values();
        let smax = sv.first().copied().unwrap_or(0.0);
        sv.iter().filter(|&&s| !is_zero_singular_value(s, smax)).count()
    }

    pub fn kernel_dim(&self) -> usize {
        self.source.dim() - self.rank()
    }

    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }
}

/// Adjoint `f*`: the unique map with `⟨f v, w⟩ = ⟨v, f* w⟩`.
///
/// In coordinates: `matrix(f*) = G_source⁻¹ · matrix(f)ᵀ · G_target`.
pub fn adjoint(f: &HilbertMap) -> HilbertMap {
    let gs_inv_ft = f.source.chol_l_inv().transpose()
        * (f.source.chol_l_inv() * f.matrix.transpose());
    HilbertMap {
        source: f.target.clone(),
        target: f.source.clone(),
        matrix: gs_inv_ft * f.target.gram(),
    }
}

/// Modified determinant: the product of the nonzero singular values of the
/// orthonormalized matrix, i.e. `√(∏ nonzero eigenvalues of f*f)`; equals 1
/// for the zero map.
pub fn det_perp(f: &HilbertMap) -> f64 {
    let sv = f.singular_values();
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter()
        .filter(|&&s| !is_zero_singular_value(s, smax))
        .product()
}

/// `ln det⊥(f)`, summed in log space.
pub fn log_det_perp(f: &HilbertMap) -> f64 {
    let sv = f.singular_values();
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter()
        .filter(|&&s| !is_zero_singular_value(s, smax))
        .map(|s| s.ln())
        .sum()
}

/// Right-continuous counting function with finitely many jumps.
///
/// `jumps` holds `(location, cumulative value)` pairs with strictly
/// increasing locations; the value at `λ` is the cumulative value of the
/// largest jump location `≤ λ`, and 0 below the first jump.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    jumps: Vec<(f64, usize)>,
}

impl StepFunction {
    pub fn from_jumps(jumps: Vec<(f64, usize)>) -> Self {
        debug_assert!(jumps.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        Self { jumps }
    }

    pub fn jumps(&self) -> &[(f64, usize)] {
        &self.jumps
    }

    pub fn value_at(&self, lambda: f64) -> usize {
        self.jumps
            .iter()
            .take_while(|(loc, _)| *loc <= lambda)
            .last()
            .map(|(_, v)| *v)
            .unwrap_or(0)
    }

    /// Value at (and beyond) the last jump.
    pub fn terminal(&self) -> usize {
        self.jumps.last().map(|(_, v)| *v).unwrap_or(0)
    }

    /// Value at 0, i.e. the kernel dimension for a spectral density.
    pub fn kernel_dim(&self) -> usize {
        self.value_at(0.0)
    }
}

/// Spectral density function of `f`: counts singular values `≤ λ`.
///
/// The value at 0 is `dim ker f`; jumps sit at the distinct positive singular
/// values with heights equal to their multiplicities; the terminal value is
/// `dim source`.
pub fn spectral_density(f: &HilbertMap) -> StepFunction {
    let sv = f.singular_values();
    let smax = sv.first().copied().unwrap_or(0.0);
    let group_tol = tolerance::rank_eps() * smax.max(1.0);
    let mut positive: Vec<f64> = sv
        .iter()
        .copied()
        .filter(|&s| !is_zero_singular_value(s, smax))
        .collect();
    positive.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kernel = f.source.dim() - positive.len();

    let mut jumps = Vec::new();
    if kernel > 0 {
        jumps.push((0.0, kernel));
    }
    let mut cumulative = kernel;
    let mut i = 0;
    while i < positive.len() {
        // group singular values that agree up to the rank tolerance
        let mut j = i + 1;
        while j < positive.len() && positive[j] - positive[j - 1] <= group_tol {
            j += 1;
        }
        let location = positive[i..j].iter().sum::<f64>() / (j - i) as f64;
        cumulative += j - i;
        jumps.push((location, cumulative));
        i = j;
    }
    StepFunction::from_jumps(jumps)
}

/// Finite zeta function `ζ_f(s) = ∑ multiplicity(λ) · λ^{-s}` over the
/// positive eigenvalues `λ` of `f*f`.
pub fn zeta_finite(f: &HilbertMap, s: Complex64) -> Complex64 {
    let sv = f.singular_values();
    let smax = sv.first().copied().unwrap_or(0.0);
    let mut total = Complex64::new(0.0, 0.0);
    for &sigma in sv.iter().filter(|&&s0| !is_zero_singular_value(s0, smax)) {
        let lambda = sigma * sigma;
        total += (-s * lambda.ln()).exp();
    }
    total
}

/// `∫_{0+}^{∞} ln(λ) dF(f*f)(λ)` evaluated as the finite sum over the jump
/// locations of the spectral density of `f*f`; equals `2·ln det⊥(f)`.
pub fn log_det_via_stieltjes(f: &HilbertMap) -> f64 {
    let ff = adjoint(f).compose(f).expect("f*f is always composable");
    let density = spectral_density(&ff);
    let mut previous = 0;
    let mut total = 0.0;
    for &(location, cumulative) in density.jumps() {
        if location > 0.0 {
            total += (cumulative - previous) as f64 * location.ln();
        }
        previous = cumulative;
    }
    total
}

/// The same Stieltjes integral evaluated through integration by parts:
/// `ln(a)·(F(a) − F(0)) − ∫_{0+}^{a} (F(λ) − F(0))/λ dλ` with `a` the largest
/// jump location, the Lebesgue integral done by adaptive Simpson quadrature
/// with breakpoints at the jumps.  Independent of [`log_det_via_stieltjes`]
/// except for sharing the spectral density itself.
pub fn log_det_stieltjes_quadrature(f: &HilbertMap) -> f64 {
    let ff = adjoint(f).compose(f).expect("f*f is always composable");
    let density = spectral_density(&ff);
    let f0 = density.kernel_dim();
    let positive: Vec<(f64, usize)> = density
        .jumps()
        .iter()
        .copied()
        .filter(|(loc, _)| *loc > 0.0)
        .collect();
    let Some(&(a, fa)) = positive.last() else {
        return 0.0;
    };
    let first = positive[0].0;

    let integrand = |lambda: f64| (density.value_at(lambda) - f0) as f64 / lambda;
    let mut integral = 0.0;
    // below the first positive jump the integrand vanishes identically
    let mut left = first;
    for &(loc, _) in positive.iter().skip(1) {
        integral += adaptive_simpson(&integrand, left, loc, 1e-13, 64);
        left = loc;
    }
    a.ln() * (fa - f0) as f64 - integral
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, tol * 0.5, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, tol * 0.5, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, depth)
}

/// Trace of an endomorphism.  Basis-independent because source and target
/// carry the same basis.
pub fn trace(f: &HilbertMap) -> Result<f64> {
    if !f.source.approx_eq(&f.target) {
        return Err(TorsionError::DimensionMismatch(
            "trace requires an endomorphism".into(),
        ));
    }
    Ok(f.matrix.diagonal().sum())
}

/// `ln((f*f)^⊥)`: the endomorphism of the source acting as `ln λ` on each
/// positive eigenspace of `f*f` and as zero on the kernel.  Satisfies
/// `ln det⊥(f) = ½ · trace(log_operator(f))`.
pub fn log_operator(f: &HilbertMap) -> HilbertMap {
    let n = f.source.dim();
    if n == 0 || f.target.dim() == 0 {
        return HilbertMap::zero(&f.source, &f.source);
    }
    let svd = f.ortho_matrix().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut b_log = DMatrix::zeros(n, n);
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if !is_zero_singular_value(sigma, smax) {
            let v = v_t.row(i).transpose();
            b_log += (sigma * sigma).ln() * &v * v.transpose();
        }
    }
    HilbertMap::from_ortho(&f.source, &f.source, b_log)
}

/// ONB (in orthonormal coordinates of the target) of the image of `f`.
pub(crate) fn range_onb_ortho(f: &HilbertMap) -> DMatrix<f64> {
    let m = f.target.dim();
    if m == 0 || f.source.dim() == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = f.ortho_matrix().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| !is_zero_singular_value(svd.singular_values[i], smax))
        .collect();
    u.select_columns(&cols)
}

/// ONB (in orthonormal coordinates of the source) of the image of `f*`,
/// i.e. the orthogonal complement of `ker f`.
pub(crate) fn corange_onb_ortho(f: &HilbertMap) -> DMatrix<f64> {
    let n = f.source.dim();
    if n == 0 || f.target.dim() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = f.ortho_matrix().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| !is_zero_singular_value(svd.singular_values[i], smax))
        .collect();
    v_t.select_rows(&rows).transpose()
}

/// `ln det⊥` of a matrix between orthonormal coordinates (plain singular
/// values, no Gram correction).
pub(crate) fn log_det_perp_ortho(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter()
        .filter(|&&s| !is_zero_singular_value(s, smax))
        .map(|s| s.ln())
        .sum()
}

/// Moore–Penrose pseudo-inverse of an orthonormal-coordinate matrix, with
/// the crate-wide rank threshold.
pub(crate) fn pinv_ortho(b: &DMatrix<f64>) -> DMatrix<f64> {
    if b.nrows() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(b.ncols(), b.nrows());
    }
    let smax = b.clone().singular_values().iter().cloned().fold(0.0, f64::max);
    let eps = tolerance::rank_eps() * smax.max(1.0);
    b.clone()
        .pseudo_inverse(eps)
        .expect("pseudo-inverse of a finite matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn diag_map(entries: &[f64]) -> HilbertMap {
        let n = entries.len();
        let space = HilbertSpace::standard(n);
        let matrix = DMatrix::from_diagonal(&DVector::from_row_slice(entries));
        HilbertMap::new(space.clone(), space, matrix).unwrap()
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        let f = HilbertMap::identity(&HilbertSpace::standard(2));
        let fs = adjoint(&f);
        assert_relative_eq!(fs.matrix(), f.matrix(), epsilon = 1e-14);
    }

    #[test]
    fn adjoint_with_standard_grams_is_transpose() {
        let mut rng = samples::rng(11);
        let a = samples::random_matrix(&mut rng, 3, 5, 1.0);
        let f = HilbertMap::new(HilbertSpace::standard(5), HilbertSpace::standard(3), a.clone())
            .unwrap();
        assert_relative_eq!(adjoint(&f).matrix(), &a.transpose(), epsilon = 1e-12);
    }

    #[test]
    fn adjoint_satisfies_inner_product_identity() {
        let mut rng = samples::rng(12);
        let source = samples::random_space(&mut rng, 2);
        let target = samples::random_space(&mut rng, 3);
        let f = samples::random_map(&mut rng, &source, &target);
        let fs = adjoint(&f);
        for _ in 0..20 {
            let v = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let w = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let lhs = target.inner(&f.apply(&v), &w);
            let rhs = source.inner(&v, &fs.apply(&w));
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn det_perp_of_scalar_automorphism() {
        let f = diag_map(&[3.0]);
        assert_relative_eq!(det_perp(&f), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn det_perp_of_zero_map_is_one() {
        let f = HilbertMap::zero(&HilbertSpace::standard(3), &HilbertSpace::standard(2));
        assert_eq!(det_perp(&f), 1.0);
        // empty maps count as zero maps
        let e = HilbertMap::zero(&HilbertSpace::standard(0), &HilbertSpace::standard(0));
        assert_eq!(det_perp(&e), 1.0);
    }

    #[test]
    fn det_perp_matches_classical_determinant() {
        let mut rng = samples::rng(13);
        for _ in 0..10 {
            let a = samples::random_full_rank(&mut rng, 4, 4);
            let space = HilbertSpace::standard(4);
            let f = HilbertMap::new(space.clone(), space, a.clone()).unwrap();
            assert_relative_eq!(det_perp(&f), a.determinant().abs(), max_relative = 1e-10);
        }
    }

    #[test]
    fn det_perp_is_gram_independent_for_automorphisms() {
        // |det| of an automorphism does not see the inner product
        let mut rng = samples::rng(14);
        let a = samples::random_full_rank(&mut rng, 4, 4);
        let space = samples::random_space(&mut rng, 4);
        let f = HilbertMap::new(space.clone(), space, a.clone()).unwrap();
        assert_relative_eq!(det_perp(&f), a.determinant().abs(), max_relative = 1e-9);
    }

    #[test]
    fn multiplicativity_surjective_then_injective() {
        // Lemma: det⊥(g∘f) = det⊥(f)·det⊥(g) for f surjective, g injective
        let mut rng = samples::rng(15);
        for _ in 0..10 {
            let u = samples::random_space(&mut rng, 4);
            let v = samples::random_space(&mut rng, 2);
            let w = samples::random_space(&mut rng, 3);
            let f = HilbertMap::new(u.clone(), v.clone(), samples::random_full_rank(&mut rng, 2, 4))
                .unwrap();
            let g = HilbertMap::new(v, w, samples::random_full_rank(&mut rng, 3, 2)).unwrap();
            let gf = g.compose(&f).unwrap();
            assert_relative_eq!(
                det_perp(&gf),
                det_perp(&f) * det_perp(&g),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn block_triangular_with_surjective_and_injective_diagonal() {
        let mut rng = samples::rng(16);
        for _ in 0..10 {
            let (u1, u2) = (samples::random_space(&mut rng, 3), samples::random_space(&mut rng, 2));
            let (v1, v2) = (samples::random_space(&mut rng, 2), samples::random_space(&mut rng, 4));
            let a1 = samples::random_full_rank(&mut rng, 2, 3); // surjective
            let a2 = samples::random_full_rank(&mut rng, 4, 2); // injective
            let h = samples::random_matrix(&mut rng, 2, 2, 1.0);
            let source = u1.direct_sum(&u2);
            let target = v1.direct_sum(&v2);
            let mut block = DMatrix::zeros(6, 5);
            block.view_mut((0, 0), (2, 3)).copy_from(&a1);
            block.view_mut((0, 3), (2, 2)).copy_from(&h);
            block.view_mut((2, 3), (4, 2)).copy_from(&a2);
            let f = HilbertMap::new(source, target, block).unwrap();
            let f1 = HilbertMap::new(u1.clone(), v1.clone(), a1).unwrap();
            let f2 = HilbertMap::new(u2.clone(), v2.clone(), a2).unwrap();
            assert_relative_eq!(
                det_perp(&f),
                det_perp(&f1) * det_perp(&f2),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn det_perp_of_direct_sum_is_product() {
        let mut rng = samples::rng(17);
        let (s1, t1) = (samples::random_space(&mut rng, 3), samples::random_space(&mut rng, 2));
        let (s2, t2) = (samples::random_space(&mut rng, 2), samples::random_space(&mut rng, 4));
        let f1 = samples::random_map(&mut rng, &s1, &t1);
        let f2 = samples::random_map(&mut rng, &s2, &t2);
        assert_relative_eq!(
            det_perp(&f1.direct_sum(&f2)),
            det_perp(&f1) * det_perp(&f2),
            max_relative = 1e-9
        );
    }

    #[test]
    fn det_perp_of_adjoint_and_of_star_composite() {
        let mut rng = samples::rng(18);
        let (s, t) = (samples::random_space(&mut rng, 3), samples::random_space(&mut rng, 4));
        let f = samples::random_map(&mut rng, &s, &t);
        let fs = adjoint(&f);
        let ffs = fs.compose(&f).unwrap();
        let d = det_perp(&f);
        assert_relative_eq!(det_perp(&fs), d, max_relative = 1e-9);
        assert_relative_eq!(det_perp(&ffs).sqrt(), d, max_relative = 1e-9);
    }

    #[test]
    fn spectral_density_of_zero_map_is_constant_kernel() {
        let f = HilbertMap::zero(&HilbertSpace::standard(3), &HilbertSpace::standard(3));
        let d = spectral_density(&f);
        assert_eq!(d.jumps(), &[(0.0, 3)]);
        assert_eq!(d.value_at(100.0), 3);
    }

    #[test]
    fn spectral_density_of_diagonal_map() {
        let d = spectral_density(&diag_map(&[2.0, 5.0]));
        assert_eq!(d.kernel_dim(), 0);
        assert_eq!(d.value_at(1.9), 0);
        assert_eq!(d.value_at(2.0), 1);
        assert_eq!(d.value_at(4.9), 1);
        assert_eq!(d.value_at(5.0), 2);
        assert_eq!(d.terminal(), 2);
    }

    #[test]
    fn spectral_density_counts_singular_values() {
        // the sup over subspaces L with ‖f v‖ ≤ λ‖v‖ is realized by
        // thresholding singular values, which is what we compare against
        let mut rng = samples::rng(19);
        let source = samples::random_space(&mut rng, 5);
        let target = samples::random_space(&mut rng, 5);
        let f = samples::random_map(&mut rng, &source, &target);
        let d = spectral_density(&f);
        let sv = f.singular_values();
        assert_eq!(d.terminal(), 5);
        for &probe in &[0.0, 0.1, 0.5, 1.0, 2.0, 10.0] {
            let count = sv.iter().filter(|&&s| s <= probe + 1e-12).count();
            assert_eq!(d.value_at(probe), count, "at λ = {probe}");
        }
        // monotone non-decreasing by construction
        let values: Vec<usize> = d.jumps().iter().map(|&(_, v)| v).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zeta_finite_of_identity_counts_dimension() {
        let f = HilbertMap::identity(&HilbertSpace::standard(2));
        for s in [Complex64::new(0.0, 0.0), Complex64::new(2.5, 1.0)] {
            let z = zeta_finite(&f, s);
            assert_relative_eq!(z.re, 2.0, epsilon = 1e-12);
            assert_relative_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zeta_finite_of_scalar_two() {
        // f*f has the single eigenvalue 4
        let f = diag_map(&[2.0]);
        let s = Complex64::new(1.5, -0.5);
        let expected = (-s * 4.0_f64.ln()).exp();
        let z = zeta_finite(&f, s);
        assert_relative_eq!(z.re, expected.re, epsilon = 1e-12);
        assert_relative_eq!(z.im, expected.im, epsilon = 1e-12);
    }

    #[test]
    fn zeta_derivative_at_zero_gives_log_det() {
        // ln det⊥(f) = −½ ζ_f′(0), tested by central finite differences
        let mut rng = samples::rng(20);
        for _ in 0..5 {
            let source = samples::random_space(&mut rng, 4);
            let target = samples::random_space(&mut rng, 3);
            let f = samples::random_map(&mut rng, &source, &target);
            let h = 1e-5;
            let plus = zeta_finite(&f, Complex64::new(h, 0.0)).re;
            let minus = zeta_finite(&f, Complex64::new(-h, 0.0)).re;
            let derivative = (plus - minus) / (2.0 * h);
            assert_relative_eq!(log_det_perp(&f), -0.5 * derivative, epsilon = 1e-6);
        }
    }

    #[test]
    fn stieltjes_of_identity_is_zero() {
        let f = HilbertMap::identity(&HilbertSpace::standard(3));
        assert_relative_eq!(log_det_via_stieltjes(&f), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn stieltjes_jump_sum_on_diagonal_map() {
        let f = diag_map(&[2.0, 5.0]);
        let expected = 4.0_f64.ln() + 25.0_f64.ln();
        assert_relative_eq!(log_det_via_stieltjes(&f), expected, epsilon = 1e-10);
        assert_relative_eq!(
            log_det_via_stieltjes(&f),
            2.0 * (2.0_f64.ln() + 5.0_f64.ln()),
            epsilon = 1e-10
        );
    }

    #[test]
    fn stieltjes_routes_agree_and_match_det_perp() {
        let mut rng = samples::rng(21);
        for _ in 0..8 {
            let source = samples::random_space(&mut rng, 3);
            let target = samples::random_space(&mut rng, 4);
            let f = samples::random_map(&mut rng, &source, &target);
            let jump = log_det_via_stieltjes(&f);
            let quad = log_det_stieltjes_quadrature(&f);
            assert!((jump - quad).abs() < 1e-8, "jump {jump} vs quadrature {quad}");
            assert_relative_eq!(jump, 2.0 * log_det_perp(&f), epsilon = 1e-9);
        }
    }

    #[test]
    fn trace_of_identity_is_dimension() {
        for n in 0..5 {
            let f = HilbertMap::identity(&HilbertSpace::standard(n));
            assert_eq!(trace(&f).unwrap(), n as f64);
        }
    }

    #[test]
    fn trace_is_symmetric_under_composition_order() {
        let mut rng = samples::rng(22);
        let v = samples::random_space(&mut rng, 3);
        let w = samples::random_space(&mut rng, 4);
        let f = samples::random_map(&mut rng, &v, &w);
        let g = samples::random_map(&mut rng, &w, &v);
        let gf = trace(&g.compose(&f).unwrap()).unwrap();
        let fg = trace(&f.compose(&g).unwrap()).unwrap();
        assert_relative_eq!(gf, fg, epsilon = 1e-10);
    }

    #[test]
    fn trace_rejects_non_endomorphisms() {
        let f = HilbertMap::zero(&HilbertSpace::standard(2), &HilbertSpace::standard(3));
        assert!(trace(&f).is_err());
    }

    #[test]
    fn log_operator_trace_identity() {
        let mut rng = samples::rng(23);
        for _ in 0..5 {
            let source = samples::random_space(&mut rng, 4);
            let target = samples::random_space(&mut rng, 3);
            let f = samples::random_map(&mut rng, &source, &target);
            let lo = log_operator(&f);
            assert_relative_eq!(
                0.5 * trace(&lo).unwrap(),
                log_det_perp(&f),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn log_operator_vanishes_on_kernel() {
        // rank-1 map on ℝ²: kernel direction must map to zero
        let space = HilbertSpace::standard(2);
        let matrix = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = HilbertMap::new(space.clone(), space, matrix).unwrap();
        let lo = log_operator(&f);
        let kernel = DVector::from_row_slice(&[1.0, -1.0]);
        assert!(lo.apply(&kernel).norm() < 1e-12);
    }
}
