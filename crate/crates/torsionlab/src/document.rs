//! JSON interchange: chain complexes in and results out, with the record of
//! every convention the numbers depend on.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::linalg::{HilbertMap, HilbertSpace};
use crate::models::{ActionKind, CellModel, GroupAction};
use crate::zchain::{BasedZChainComplex, HomologyStructure, IntMat, StructureTag};
use crate::zeta::IntervalSpectrum;
use crate::{Result, TorsionError};

fn degree_key(n: i64) -> String {
    n.to_string()
}

fn parse_degree(key: &str) -> Result<i64> {
    key.parse::<i64>().map_err(|_| {
        TorsionError::InvalidParameter(format!("degree key `{key}` is not an integer"))
    })
}

/// Chain-complex interchange document.  Boundary and Gram matrices are
/// row-major flat lists; the explicit `dims` map fixes every shape.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComplexDocument {
    /// inclusive degree range `[lo, hi]`
    pub degrees: [i64; 2],
    pub dims: BTreeMap<String, usize>,
    /// `boundaries[n]`: the map `C_n → C_{n−1}`, shape `dims[n−1] × dims[n]`
    pub boundaries: BTreeMap<String, Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grams: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology_structure: Option<StructureDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionDocument>,
}

/// Per-degree SPD Gram matrices on the free homology generators, plus the
/// tag naming the structure family.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StructureDocument {
    pub tag: String,
    pub grams: BTreeMap<String, Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ActionDocument {
    pub order: usize,
    pub kind: String,
    /// signed permutation matrices, row-major, one per degree
    pub matrices: BTreeMap<String, Vec<i64>>,
}

impl ComplexDocument {
    pub fn from_zcomplex(c: &BasedZChainComplex) -> Self {
        let mut dims = BTreeMap::new();
        let mut boundaries = BTreeMap::new();
        for n in c.degrees() {
            dims.insert(degree_key(n), c.dim(n));
            if n > c.min_degree() {
                let b = c.boundary(n);
                let mut flat = Vec::with_capacity(b.rows() * b.cols());
                for i in 0..b.rows() {
                    for j in 0..b.cols() {
                        flat.push(b.get(i, j).to_i64().expect("cell coefficients are small"));
                    }
                }
                boundaries.insert(degree_key(n), flat);
            }
        }
        ComplexDocument {
            degrees: [c.min_degree(), c.max_degree()],
            dims,
            boundaries,
            grams: None,
            homology_structure: None,
            action: None,
        }
    }

    pub fn from_model(m: &CellModel) -> Self {
        let mut doc = Self::from_zcomplex(&m.complex);
        if let Some(action) = &m.action {
            let kind = match action.kind {
                ActionKind::Conjugation => "conjugation",
                ActionKind::Antipodal => "antipodal",
            };
            let mut matrices = BTreeMap::new();
            for n in m.complex.degrees() {
                let g = m.action_matrix(n);
                let mut flat = Vec::with_capacity(g.rows() * g.cols());
                for i in 0..g.rows() {
                    for j in 0..g.cols() {
                        flat.push(g.get(i, j).to_i64().expect("signed permutation entries"));
                    }
                }
                matrices.insert(degree_key(n), flat);
            }
            doc.action = Some(ActionDocument {
                order: action.order,
                kind: kind.to_string(),
                matrices,
            });
        }
        doc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ComplexDocument = serde_json::from_str(text)
            .map_err(|e| TorsionError::InvalidParameter(format!("document parse error: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    fn dim_at(&self, n: i64) -> usize {
        self.dims.get(&degree_key(n)).copied().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.degrees;
        if lo > hi {
            return Err(TorsionError::InvalidParameter(
                "degree range is empty".into(),
            ));
        }
        for key in self.dims.keys() {
            let n = parse_degree(key)?;
            if n < lo || n > hi {
                return Err(TorsionError::InvalidParameter(format!(
                    "dims key {n} outside the declared range [{lo}, {hi}]"
                )));
            }
        }
        for (key, flat) in &self.boundaries {
            let n = parse_degree(key)?;
            if n <= lo || n > hi {
                return Err(TorsionError::InvalidParameter(format!(
                    "boundary key {n} outside ({lo}, {hi}]"
                )));
            }
            let expect = self.dim_at(n - 1) * self.dim_at(n);
            if flat.len() != expect {
                return Err(TorsionError::InvalidParameter(format!(
                    "boundary at degree {n} has {} entries, expected {expect}",
                    flat.len()
                )));
            }
        }
        Ok(())
    }

    /// The integer chain complex; `∂∘∂ = 0` is re-checked by the constructor.
    pub fn to_zcomplex(&self) -> Result<BasedZChainComplex> {
        let [lo, hi] = self.degrees;
        let dims: Vec<usize> = (lo..=hi).map(|n| self.dim_at(n)).collect();
        let mut diffs = Vec::new();
        for n in lo + 1..=hi {
            let (rows, cols) = (self.dim_at(n - 1), self.dim_at(n));
            let mut m = IntMat::zeros(rows, cols);
            if let Some(flat) = self.boundaries.get(&degree_key(n)) {
                for i in 0..rows {
                    for j in 0..cols {
                        m.set(i, j, BigInt::from(flat[i * cols + j]));
                    }
                }
            }
            diffs.push(m);
        }
        let c = BasedZChainComplex::new(lo, dims, diffs)?;
        if let Some(action) = &self.action {
            self.group_action(&c, action)?;
        }
        Ok(c)
    }

    /// The Hilbert realization, with the document's Grams when present and
    /// the standard ones otherwise.
    pub fn to_hilbert(&self) -> Result<crate::chain::HilbertChainComplex> {
        let c = self.to_zcomplex()?;
        let [lo, hi] = self.degrees;
        let mut spaces = Vec::new();
        for n in lo..=hi {
            let d = self.dim_at(n);
            let space = match self.grams.as_ref().and_then(|g| g.get(&degree_key(n))) {
                Some(flat) => {
                    if flat.len() != d * d {
                        return Err(TorsionError::InvalidParameter(format!(
                            "gram at degree {n} has {} entries, expected {}",
                            flat.len(),
                            d * d
                        )));
                    }
                    HilbertSpace::new(DMatrix::from_row_slice(d, d, flat))?
                }
                None => HilbertSpace::standard(d),
            };
            spaces.push(space);
        }
        let mut diffs = Vec::new();
        for n in lo + 1..=hi {
            let k = (n - lo) as usize;
            diffs.push(HilbertMap::new(
                spaces[k].clone(),
                spaces[k - 1].clone(),
                c.boundary(n).to_real(),
            )?);
        }
        crate::chain::HilbertChainComplex::new(lo, spaces, diffs)
    }

    /// The document's homology structure over the complex's free generators.
    pub fn structure(&self, c: &BasedZChainComplex) -> Result<Option<HomologyStructure>> {
        let Some(sd) = &self.homology_structure else {
            return Ok(None);
        };
        let tag = match sd.tag.as_str() {
            "cellular" => StructureTag::Cellular,
            "integral" => StructureTag::Integral,
            "harmonic" => StructureTag::Harmonic,
            _ => StructureTag::Custom,
        };
        let integral = crate::zchain::integral_structure(c);
        let mut degrees = BTreeMap::new();
        for (key, flat) in &sd.grams {
            let n = parse_degree(key)?;
            let basis = integral.basis(n).ok_or_else(|| {
                TorsionError::InvalidParameter(format!(
                    "structure gram at degree {n} but homology there is trivial"
                ))
            })?;
            let r = basis.ncols();
            if flat.len() != r * r {
                return Err(TorsionError::InvalidParameter(format!(
                    "structure gram at degree {n} has {} entries, expected {}",
                    flat.len(),
                    r * r
                )));
            }
            degrees.insert(n, (basis.clone(), DMatrix::from_row_slice(r, r, flat)));
        }
        Ok(Some(HomologyStructure::new(tag, degrees)?))
    }

    fn group_action(&self, c: &BasedZChainComplex, doc: &ActionDocument) -> Result<GroupAction> {
        let kind = match doc.kind.as_str() {
            "conjugation" => ActionKind::Conjugation,
            "antipodal" => ActionKind::Antipodal,
            other => {
                return Err(TorsionError::InvalidParameter(format!(
                    "unknown action kind `{other}`"
                )))
            }
        };
        let [lo, hi] = self.degrees;
        let mut generator = Vec::new();
        for n in lo..=hi {
            let d = self.dim_at(n);
            let flat = doc.matrices.get(&degree_key(n)).ok_or_else(|| {
                TorsionError::InvalidParameter(format!("action matrix missing at degree {n}"))
            })?;
            if flat.len() != d * d {
                return Err(TorsionError::InvalidParameter(format!(
                    "action matrix at degree {n} has {} entries, expected {}",
                    flat.len(),
                    d * d
                )));
            }
            let mut g = IntMat::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    g.set(i, j, BigInt::from(flat[i * d + j]));
                }
            }
            generator.push(g);
        }
        let action = GroupAction { order: doc.order, kind, generator };
        crate::models::validate_action(c, &action)?;
        Ok(action)
    }
}

/// Every sign, direction, exponent, and tolerance the reported numbers
/// depend on; attached to each result so outputs are self-describing.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConventionRecord {
    pub rank_eps: f64,
    /// global sign of the structure-correction sum
    pub torsion_sign: i8,
    /// direction of the comparison map on each homology group
    pub torsion_direction: String,
    /// volume exponents of the harmonic Gram at degree 0 and the top degree
    pub harmonic_exponent_degree_zero: f64,
    pub harmonic_exponent_top_degree: f64,
    /// volume exponent anchoring the interval's degree-0 Gram
    pub interval_anchor_exponent: f64,
    /// degree offsets of the long-exact-sequence complexes
    pub les_offset_additivity: i64,
    pub les_offset_glueing: i64,
    /// coefficient sign of the duality term in the equivariant identity
    pub duality_sign: f64,
    /// eigenvalue multiplicity of the interval's 1-form spectrum
    pub interval_one_form_multiplicity: u32,
}

impl ConventionRecord {
    pub fn current() -> Self {
        let convention = crate::zchain::TorsionConvention::SELECTED;
        let exponents = crate::manifold::harmonic_exponents();
        ConventionRecord {
            rank_eps: crate::tolerance::rank_eps(),
            torsion_sign: convention.sign,
            torsion_direction: match convention.direction {
                crate::zchain::CorrectionDirection::StructureToCell => "structure-to-cell".into(),
                crate::zchain::CorrectionDirection::CellToStructure => "cell-to-structure".into(),
            },
            harmonic_exponent_degree_zero: exponents.degree_zero,
            harmonic_exponent_top_degree: exponents.top_degree,
            interval_anchor_exponent: crate::manifold::INTERVAL_ANCHOR_EXPONENT,
            les_offset_additivity: 0,
            les_offset_glueing: 1,
            duality_sign: crate::equivariant::pd_sign(),
            interval_one_form_multiplicity: IntervalSpectrum::PaperValue.multiplicity(),
        }
    }
}

/// One computed invariant with everything needed to reproduce it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultDocument {
    pub invariant: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub convention: ConventionRecord,
    pub version: String,
}

impl ResultDocument {
    pub fn new(invariant: &str, model: &str) -> Self {
        ResultDocument {
            invariant: invariant.to_string(),
            model: model.to_string(),
            parameters: BTreeMap::new(),
            values: BTreeMap::new(),
            convention: ConventionRecord::current(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: serde_json::Value) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn with_value(mut self, key: &str, value: serde_json::Value) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// 17 significant digits: enough for a lossless `f64` round-trip in the
/// text and CSV formats.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{circle_model, equivariant_circle, interval_model, moore_model};
    use crate::zchain::{integral_homology, structured_torsion};

    #[test]
    fn factory_models_round_trip_through_json() {
        let models = vec![
            interval_model(4, 1.0).unwrap(),
            circle_model(5, 2.0).unwrap(),
            moore_model(6).unwrap(),
            equivariant_circle(ActionKind::Conjugation, 6, 1.0).unwrap(),
            equivariant_circle(ActionKind::Antipodal, 4, 3.0).unwrap(),
        ];
        for m in models {
            let doc = ComplexDocument::from_model(&m);
            let text = doc.to_json();
            let back = ComplexDocument::from_json(&text).unwrap();
            assert_eq!(doc, back);
            let c = back.to_zcomplex().unwrap();
            // exact invariants must agree bit for bit
            assert_eq!(c.euler_characteristic(), m.complex.euler_characteristic());
            let h0 = integral_homology(&m.complex);
            let h1 = integral_homology(&c);
            assert_eq!(h0.len(), h1.len());
            for (a, b) in h0.iter().zip(h1.iter()) {
                assert_eq!(a.degree, b.degree);
                assert_eq!(a.free_rank, b.free_rank);
                assert_eq!(a.torsion, b.torsion);
            }
            // float invariants must agree to the last bit as well
            assert_eq!(
                c.realify().torsion().to_bits(),
                m.complex.realify().torsion().to_bits()
            );
        }
    }

    #[test]
    fn document_grams_feed_the_hilbert_realization() {
        let m = interval_model(2, 1.0).unwrap();
        let mut doc = ComplexDocument::from_model(&m);
        // scale the edge Gram by 4: each singular value of ∂₁ halves
        let d1 = m.complex.dim(1);
        let mut grams = BTreeMap::new();
        let mut flat = vec![0.0; d1 * d1];
        for i in 0..d1 {
            flat[i * d1 + i] = 4.0;
        }
        grams.insert("1".to_string(), flat);
        doc.grams = Some(grams);
        let plain = m.complex.realify().torsion();
        let scaled = doc.to_hilbert().unwrap().torsion();
        assert!((scaled - (plain - (d1 as f64) * 2.0_f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn structure_grams_attach_to_integral_generators() {
        let m = circle_model(4, 1.0).unwrap();
        let mut doc = ComplexDocument::from_model(&m);
        let mut grams = BTreeMap::new();
        grams.insert("0".to_string(), vec![1.0]);
        grams.insert("1".to_string(), vec![1.0]);
        doc.homology_structure = Some(StructureDocument {
            tag: "integral".to_string(),
            grams,
        });
        let c = doc.to_zcomplex().unwrap();
        let kappa = doc.structure(&c).unwrap().unwrap();
        let rho = structured_torsion(&c, &kappa).unwrap();
        let reference =
            structured_torsion(&m.complex, &crate::zchain::integral_structure(&m.complex))
                .unwrap();
        assert!((rho - reference).abs() < 1e-12);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        // boundary shape mismatch
        let bad = r#"{"degrees":[0,1],"dims":{"0":2,"1":1},"boundaries":{"1":[1,1,1]}}"#;
        assert!(ComplexDocument::from_json(bad).is_err());
        // non-composable boundaries
        let bad = r#"{"degrees":[0,2],"dims":{"0":1,"1":1,"2":1},"boundaries":{"1":[1],"2":[1]}}"#;
        let doc = ComplexDocument::from_json(bad).unwrap();
        assert!(doc.to_zcomplex().is_err());
        // action that does not commute with the boundary
        let bad = r#"{"degrees":[0,1],"dims":{"0":2,"1":1},"boundaries":{"1":[1,-1]},
            "action":{"order":2,"kind":"conjugation","matrices":{"0":[1,0,0,1],"1":[-1]}}}"#;
        let doc = ComplexDocument::from_json(bad).unwrap();
        assert!(doc.to_zcomplex().is_err());
    }

    #[test]
    fn convention_record_reports_the_selected_assignments() {
        let record = ConventionRecord::current();
        assert_eq!(record.torsion_sign, 1);
        assert_eq!(record.torsion_direction, "structure-to-cell");
        assert_eq!(record.harmonic_exponent_degree_zero, -0.5);
        assert_eq!(record.harmonic_exponent_top_degree, 0.5);
        assert_eq!(record.interval_anchor_exponent, -1.0);
        assert_eq!(record.duality_sign, 1.0);
        assert_eq!(record.interval_one_form_multiplicity, 2);
        assert_eq!(record.rank_eps, 1e-10);
    }

    #[test]
    fn result_documents_are_deterministic() {
        let make = || {
            ResultDocument::new("rho-top", "circle")
                .with_parameter("mu", serde_json::json!(2.0))
                .with_value("value", serde_json::json!(2.0_f64.ln()))
        };
        assert_eq!(make().to_json(), make().to_json());
    }

    #[test]
    fn float_formatting_round_trips() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, 2.0_f64.ln(), 1e-300] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
