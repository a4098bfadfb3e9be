//! Deterministic random inputs for the property suites.
//!
//! Everything here is seeded ChaCha8, so verification runs and tests are
//! reproducible bit for bit.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::chain::{mapping_cone, ChainMap, HilbertChainComplex, ShortExactSequence};
use crate::linalg::{HilbertMap, HilbertSpace};
use crate::zchain::{BasedZChainComplex, HomologyStructure, IntMat, StructureTag};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

/// Well-conditioned SPD Gram matrix (eigenvalues bounded away from zero).
pub fn random_spd_gram(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, n, n, 1.0);
    &a * a.transpose() / (n.max(1) as f64) + DMatrix::identity(n, n) * 0.4
}

pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> HilbertSpace {
    HilbertSpace::new(random_spd_gram(rng, n)).expect("random gram is SPD")
}

pub fn random_map(rng: &mut ChaCha8Rng, source: &HilbertSpace, target: &HilbertSpace) -> HilbertMap {
    let m = random_matrix(rng, target.dim(), source.dim(), 1.0);
    HilbertMap::new(source.clone(), target.clone(), m).expect("dimensions match")
}

/// Random matrix of full rank min(rows, cols), with smallest singular value
/// bounded away from zero so rank decisions are unambiguous.
pub fn random_full_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let k = rows.min(cols);
    loop {
        let m = random_matrix(rng, rows, cols, 1.0);
        if k == 0 {
            return m;
        }
        let sv = m.clone().singular_values();
        if sv.iter().cloned().fold(f64::INFINITY, f64::min) > 0.15 {
            return m;
        }
    }
}

/// Random invertible square matrix with condition number under ~30, so
/// conjugating by it keeps rank decisions clean.
pub fn random_well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m = random_matrix(rng, n, n, 1.0) + DMatrix::identity(n, n) * 0.5;
        if n == 0 {
            return m;
        }
        let sv = m.clone().singular_values();
        let (max, min) = (
            sv.iter().cloned().fold(0.0, f64::max),
            sv.iter().cloned().fold(f64::INFINITY, f64::min),
        );
        if min > 0.2 && max / min < 30.0 {
            return m;
        }
    }
}

/// Random chain complex with the given degreewise dimensions and a Betti
/// oracle known by construction.
///
/// In model coordinates each space splits as `[a | h | b]`: the boundary
/// sends the `a` block of one degree isomorphically onto the `b` block of
/// the degree below and kills the rest, so `rank(c_n) = s_n` and
/// `b_n = d_n − s_n − s_{n+1}` exactly.  The model is then conjugated by
/// well-conditioned isomorphisms and given random SPD Grams, which changes
/// neither ranks nor Betti numbers.
pub fn random_complex(
    rng: &mut ChaCha8Rng,
    min_degree: i64,
    dims: &[usize],
) -> (HilbertChainComplex, Vec<usize>) {
    let m = dims.len();
    // s[k] = rank of the boundary leaving index k (degree min_degree + k)
    let mut s = vec![0usize; m + 1];
    for k in (1..m).rev() {
        let cap = (dims[k] - s[k + 1]).min(dims[k - 1]);
        s[k] = if cap == 0 { 0 } else { rng.gen_range(0..=cap) };
    }
    let betti: Vec<usize> = (0..m).map(|k| dims[k] - s[k] - s[k + 1]).collect();

    let t: Vec<DMatrix<f64>> = dims.iter().map(|&d| random_well_conditioned(rng, d)).collect();
    let t_inv: Vec<DMatrix<f64>> = t
        .iter()
        .map(|m| m.clone().try_inverse().expect("well-conditioned"))
        .collect();

    let spaces: Vec<HilbertSpace> = dims.iter().map(|&d| random_space(rng, d)).collect();
    let mut diffs = Vec::new();
    for k in 1..m {
        // model: rows (s[k−1] + betti[k−1]).. hold the b block of index k−1,
        // columns 0..s[k] hold the a block of index k
        let mut model = DMatrix::zeros(dims[k - 1], dims[k]);
        if s[k] > 0 {
            let block = random_well_conditioned(rng, s[k]);
            model
                .view_mut((s[k - 1] + betti[k - 1], 0), (s[k], s[k]))
                .copy_from(&block);
        }
        let matrix = &t[k - 1] * model * &t_inv[k];
        diffs.push(
            HilbertMap::new(spaces[k].clone(), spaces[k - 1].clone(), matrix)
                .expect("dimensions match"),
        );
    }
    let complex = HilbertChainComplex::new(min_degree, spaces, diffs)
        .expect("model differentials compose to zero");
    (complex, betti)
}

/// Random degreewise short exact sequence `0 → C → D → E → 0` whose middle
/// is an extension `D_n = C_n ⊕ E_n` with a twisting block
/// `h_n = c_n u_n − u_{n−1} e_n` (any choice of `u` satisfies `d∘d = 0`),
/// a random *coupled* SPD Gram on `D`, and the canonical block maps
/// `i = [I; 0]`, `p = [0 I]`.
pub fn random_ses(
    rng: &mut ChaCha8Rng,
    min_degree: i64,
    c_dims: &[usize],
    e_dims: &[usize],
) -> ShortExactSequence {
    assert_eq!(c_dims.len(), e_dims.len(), "degree ranges must agree");
    let m = c_dims.len();
    let (c, _) = random_complex(rng, min_degree, c_dims);
    let (e, _) = random_complex(rng, min_degree, e_dims);
    let u: Vec<DMatrix<f64>> = (0..m)
        .map(|k| random_matrix(rng, c_dims[k], e_dims[k], 0.6))
        .collect();

    let d_spaces: Vec<HilbertSpace> = (0..m)
        .map(|k| random_space(rng, c_dims[k] + e_dims[k]))
        .collect();
    let mut d_diffs = Vec::new();
    for k in 1..m {
        let n = min_degree + k as i64;
        let (rc, re) = (c_dims[k - 1], e_dims[k - 1]);
        let (sc, se) = (c_dims[k], e_dims[k]);
        let mut block = DMatrix::zeros(rc + re, sc + se);
        block.view_mut((0, 0), (rc, sc)).copy_from(c.boundary(n).matrix());
        let h = c.boundary(n).matrix() * &u[k] - &u[k - 1] * e.boundary(n).matrix();
        block.view_mut((0, sc), (rc, se)).copy_from(&h);
        block
            .view_mut((rc, sc), (re, se))
            .copy_from(e.boundary(n).matrix());
        d_diffs.push(
            HilbertMap::new(d_spaces[k].clone(), d_spaces[k - 1].clone(), block)
                .expect("dimensions match"),
        );
    }
    let d = HilbertChainComplex::new(min_degree, d_spaces, d_diffs)
        .expect("extension differential squares to zero");

    let incl_maps: Vec<DMatrix<f64>> = (0..m)
        .map(|k| {
            let mut m_ = DMatrix::zeros(c_dims[k] + e_dims[k], c_dims[k]);
            m_.view_mut((0, 0), (c_dims[k], c_dims[k]))
                .copy_from(&DMatrix::identity(c_dims[k], c_dims[k]));
            m_
        })
        .collect();
    let proj_maps: Vec<DMatrix<f64>> = (0..m)
        .map(|k| {
            let mut m_ = DMatrix::zeros(e_dims[k], c_dims[k] + e_dims[k]);
            m_.view_mut((0, c_dims[k]), (e_dims[k], e_dims[k]))
                .copy_from(&DMatrix::identity(e_dims[k], e_dims[k]));
            m_
        })
        .collect();
    let incl = ChainMap::new(c, d.clone(), incl_maps).expect("block inclusion is a chain map");
    let proj = ChainMap::new(d, e, proj_maps).expect("block projection is a chain map");
    ShortExactSequence::new(incl, proj).expect("block sequence is exact")
}

/// Conjugates a complex by random degreewise isomorphisms onto fresh random
/// Grams; returns the new complex together with the isomorphism (as a chain
/// map from `cx`).
pub fn conjugated_complex(
    rng: &mut ChaCha8Rng,
    cx: &HilbertChainComplex,
) -> (HilbertChainComplex, Vec<DMatrix<f64>>) {
    let phi: Vec<DMatrix<f64>> = cx
        .degrees()
        .map(|n| random_well_conditioned(rng, cx.dim(n)))
        .collect();
    let spaces: Vec<HilbertSpace> = cx.degrees().map(|n| random_space(rng, cx.dim(n))).collect();
    let mut diffs = Vec::new();
    for (k, n) in cx.degrees().skip(1).enumerate() {
        let inv = phi[k + 1].clone().try_inverse().expect("well-conditioned");
        let matrix = &phi[k] * cx.boundary(n).matrix() * inv;
        diffs.push(
            HilbertMap::new(spaces[k + 1].clone(), spaces[k].clone(), matrix)
                .expect("dimensions match"),
        );
    }
    let new = HilbertChainComplex::new(cx.min_degree(), spaces, diffs)
        .expect("conjugation preserves d∘d = 0");
    (new, phi)
}

/// Random homotopy equivalence: the source `C` is random, the target is a
/// conjugate of `C ⊕ cone(id_B)` for a random complex `B` (the cone of an
/// identity is contractible), and the map is the inclusion followed by the
/// conjugating isomorphism.
pub fn random_homotopy_equivalence(
    rng: &mut ChaCha8Rng,
    min_degree: i64,
    c_dims: &[usize],
    b_dims: &[usize],
) -> ChainMap {
    let (c, _) = random_complex(rng, min_degree, c_dims);
    let (b, _) = random_complex(rng, min_degree, b_dims);
    let cone = mapping_cone(&ChainMap::identity(&b));
    let sum = c.direct_sum(&cone);
    let (target, phi) = conjugated_complex(rng, &sum);
    let maps: Vec<DMatrix<f64>> = c
        .degrees()
        .map(|n| {
            let k = (n - sum.min_degree()) as usize;
            let mut incl = DMatrix::zeros(sum.dim(n), c.dim(n));
            incl.view_mut((0, 0), (c.dim(n), c.dim(n)))
                .copy_from(&DMatrix::identity(c.dim(n), c.dim(n)));
            &phi[k] * incl
        })
        .collect();
    ChainMap::new(c, target, maps).expect("composite of chain maps")
}

/// Random bijective chain map between contractible complexes: a cone of an
/// identity, mapped by a random isomorphism onto a conjugate with fresh
/// Grams.
pub fn random_bijective_contractible(
    rng: &mut ChaCha8Rng,
    min_degree: i64,
    b_dims: &[usize],
) -> ChainMap {
    let (b, _) = random_complex(rng, min_degree, b_dims);
    let cone = mapping_cone(&ChainMap::identity(&b));
    let (target, phi) = conjugated_complex(rng, &cone);
    ChainMap::new(cone, target, phi).expect("isomorphism is a chain map")
}

// -- integer-level generators ------------------------------------------------

pub fn random_int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> IntMat {
    let mut m = IntMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, BigInt::from(rng.gen_range(-bound..=bound)));
        }
    }
    m
}

/// Random unimodular integer matrix with its exact inverse, built from
/// elementary row operations (det = ±1 by construction).
pub fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> (IntMat, IntMat) {
    let mut p = IntMat::identity(n);
    let mut p_inv = IntMat::identity(n);
    if n < 2 {
        if n == 1 && rng.gen_bool(0.5) {
            p.negate_row(0);
            p_inv.negate_col(0);
        }
        return (p, p_inv);
    }
    for _ in 0..2 * n + 2 {
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n);
                while j == i {
                    j = rng.gen_range(0..n);
                }
                let k = BigInt::from(*[-2i64, -1, 1, 2].iter().nth(rng.gen_range(0..4)).unwrap());
                p.add_row(i, j, &k);
                p_inv.add_col(j, i, &(-k));
            }
            1 => {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                p.swap_rows(i, j);
                p_inv.swap_cols(i, j);
            }
            _ => {
                let i = rng.gen_range(0..n);
                p.negate_row(i);
                p_inv.negate_col(i);
            }
        }
    }
    (p, p_inv)
}

/// Like [`random_unimodular`] with fewer, smaller elementary operations;
/// keeps realified conditioning mild for float-sensitive identities.
pub fn random_unimodular_gentle(rng: &mut ChaCha8Rng, n: usize) -> (IntMat, IntMat) {
    let mut p = IntMat::identity(n);
    let mut p_inv = IntMat::identity(n);
    if n < 2 {
        return (p, p_inv);
    }
    for _ in 0..n + 1 {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let k = BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 });
        p.add_row(i, j, &k);
        p_inv.add_col(j, i, &(-k));
    }
    (p, p_inv)
}

/// `ℤ → ℤ` multiplication by `m`, in degrees `min_degree + 1 → min_degree`.
pub fn moore_zcomplex(min_degree: i64, m: u64) -> BasedZChainComplex {
    let mut d = IntMat::zeros(1, 1);
    d.set(0, 0, BigInt::from(m));
    BasedZChainComplex::new(min_degree, vec![1, 1], vec![d]).expect("two-term complex")
}

/// Expansion at `(k+1, k)`: one new generator in each of two adjacent
/// degrees, the upper mapped identically onto the lower.  Leaves homology
/// (and realified torsion) unchanged.
fn expand(c: &BasedZChainComplex, k: i64) -> BasedZChainComplex {
    let min = c.min_degree().min(k);
    let max = c.max_degree().max(k + 1);
    let dims: Vec<usize> = (min..=max)
        .map(|n| c.dim(n) + usize::from(n == k || n == k + 1))
        .collect();
    let mut diffs = Vec::new();
    for n in min + 1..=max {
        let old = c.boundary(n);
        let (mut rows, mut cols) = (old.rows(), old.cols());
        let mut m = IntMat::zeros(
            old.rows() + usize::from(n - 1 == k || n - 1 == k + 1),
            old.cols() + usize::from(n == k || n == k + 1),
        );
        for i in 0..old.rows() {
            for j in 0..old.cols() {
                m.set(i, j, old.get(i, j).clone());
            }
        }
        if n == k + 1 {
            // new upper generator maps onto the new lower generator
            m.set(rows, cols, BigInt::from(1));
            rows += 1;
            cols += 1;
        }
        let _ = (rows, cols);
        diffs.push(m);
    }
    BasedZChainComplex::new(min, dims, diffs).expect("expansion keeps ∂∂ = 0")
}

/// Unimodular change of the basis at degree `n`.
fn change_basis(c: &BasedZChainComplex, n: i64, p: &IntMat, p_inv: &IntMat) -> BasedZChainComplex {
    let dims: Vec<usize> = c.degrees().map(|d| c.dim(d)).collect();
    let mut diffs = Vec::new();
    for d in c.min_degree() + 1..=c.max_degree() {
        let old = c.boundary(d);
        let new = if d == n {
            old.mul(p)
        } else if d == n + 1 {
            p_inv.mul(&old)
        } else {
            old
        };
        diffs.push(new);
    }
    BasedZChainComplex::new(c.min_degree(), dims, diffs).expect("basis change keeps ∂∂ = 0")
}

/// Random scramble: a few expansions and unimodular basis changes.  Both
/// moves preserve homology and the realified torsion.
fn scramble(rng: &mut ChaCha8Rng, mut c: BasedZChainComplex, expansions: usize) -> BasedZChainComplex {
    let (lo, hi) = (c.min_degree(), c.max_degree());
    for _ in 0..expansions {
        let k = rng.gen_range(lo..hi.max(lo + 1));
        c = expand(&c, k);
    }
    for _ in 0..6 {
        let n = rng.gen_range(c.min_degree()..=c.max_degree());
        let (p, p_inv) = random_unimodular(rng, c.dim(n));
        c = change_basis(&c, n, &p, &p_inv);
    }
    c
}

/// Random contractible based free ℤ-complex: expansions of the empty
/// complex composed with unimodular basis changes.
pub fn random_contractible_zcomplex(rng: &mut ChaCha8Rng) -> BasedZChainComplex {
    let span = rng.gen_range(3..=4usize);
    let base = BasedZChainComplex::new(0, vec![0; span], vec![IntMat::zeros(0, 0); span - 1])
        .expect("empty complex");
    let expansions = rng.gen_range(3..=6);
    scramble(rng, base, expansions)
}

/// Random ℤ-complex with known torsion homology: a direct sum of
/// multiplication blocks (and occasionally a free generator), scrambled.
/// Returns the complex and the torsion orders by degree.
pub fn random_torsion_zcomplex(rng: &mut ChaCha8Rng) -> (BasedZChainComplex, Vec<(i64, u64)>) {
    let span = 4usize;
    let mut c = BasedZChainComplex::new(0, vec![0; span], vec![IntMat::zeros(0, 0); span - 1])
        .expect("empty complex");
    let mut oracle = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let degree = rng.gen_range(0..span as i64 - 1);
        let m = rng.gen_range(2..=30u64);
        c = c.direct_sum(&moore_zcomplex(degree, m));
        oracle.push((degree, m));
    }
    if rng.gen_bool(0.4) {
        let degree = rng.gen_range(0..span as i64);
        let free = BasedZChainComplex::new(degree, vec![1], vec![]).expect("one generator");
        c = c.direct_sum(&free);
    }
    let expansions = rng.gen_range(2..=4);
    (scramble(rng, c, expansions), oracle)
}

/// Random integral chain homotopy equivalence: the inclusion of `C` into a
/// unimodularly re-based `C ⊕ E` with `E` contractible.  Its mapping cone
/// is based free and contractible, so the realified cone torsion vanishes.
pub fn random_z_homotopy_equivalence(
    rng: &mut ChaCha8Rng,
) -> (BasedZChainComplex, BasedZChainComplex, ChainMap) {
    let (c, _) = random_torsion_zcomplex(rng);
    let e = random_contractible_zcomplex(rng);
    let sum = c.direct_sum(&e);
    let lo = sum.min_degree();
    let hi = sum.max_degree();
    // re-base every degree; track the inverses for the chain map
    let mut d = sum.clone();
    let mut comps: Vec<DMatrix<f64>> = Vec::new();
    let mut inverses: Vec<IntMat> = Vec::new();
    for n in lo..=hi {
        let (p, p_inv) = random_unimodular_gentle(rng, sum.dim(n));
        d = change_basis(&d, n, &p, &p_inv);
        inverses.push(p_inv);
    }
    for n in c.min_degree()..=c.max_degree().max(hi) {
        if n > hi {
            break;
        }
        let p_inv = &inverses[(n - lo) as usize];
        let mut incl = IntMat::zeros(sum.dim(n), c.dim(n));
        for i in 0..c.dim(n) {
            incl.set(i, i, BigInt::from(1));
        }
        comps.push(p_inv.mul(&incl).to_real());
    }
    let f = ChainMap::new(c.realify(), d.realify(), comps).expect("composite is a chain map");
    (c, d, f)
}

/// Arbitrary SPD homology structure: harmonic representatives mixed by a
/// random invertible map, perturbed by boundaries, with a random SPD Gram.
pub fn random_structure(rng: &mut ChaCha8Rng, cx: &HilbertChainComplex) -> HomologyStructure {
    let mut degrees = BTreeMap::new();
    for n in cx.degrees() {
        let b = cx.betti(n);
        let harmonic = cx.space(n).from_ortho(&cx.harmonic_onb_ortho(n));
        let mix = random_well_conditioned(rng, b);
        let exact = cx.boundary(n + 1).matrix() * random_matrix(rng, cx.dim(n + 1), b, 0.7);
        let basis = harmonic * mix + exact;
        degrees.insert(n, (basis, random_spd_gram(rng, b)));
    }
    HomologyStructure::new(StructureTag::Custom, degrees).expect("random grams are SPD")
}
