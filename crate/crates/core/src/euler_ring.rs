//! Formal arithmetic in the Euler ring `U(G)`.
//!
//! Elements are finite integer combinations of generators `χ_G(G/H⁺)`, one per
//! conjugacy class label. Labels are opaque strings inside a named group
//! context; `"G"` always denotes the whole group, whose generator is the unit
//! `𝕀`. Products need a user-supplied multiplication table: structure
//! constants are never invented here.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of the full group; its generator is the ring unit.
pub const UNIT: &str = "G";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerElement {
    pub context: String,
    /// Zero coefficients are never stored.
    pub coefficients: BTreeMap<String, i64>,
}

impl EulerElement {
    pub fn zero(context: impl Into<String>) -> Self {
        EulerElement { context: context.into(), coefficients: BTreeMap::new() }
    }

    /// `a · 𝕀`.
    pub fn unit_multiple(context: impl Into<String>, a: i64) -> Self {
        Self::from_terms(context, [(UNIT, a)])
    }

    pub fn from_terms<'a>(
        context: impl Into<String>,
        terms: impl IntoIterator<Item = (&'a str, i64)>,
    ) -> Self {
        let mut e = Self::zero(context);
        for (label, c) in terms {
            e.add_term(label, c);
        }
        e
    }

    fn add_term(&mut self, label: &str, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.coefficients.entry(label.to_string()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.coefficients.remove(label);
        }
    }

    /// Restore canonical form after deserialisation.
    pub fn canonical(mut self) -> Self {
        self.coefficients.retain(|_, c| *c != 0);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficient(&self, label: &str) -> i64 {
        self.coefficients.get(label).copied().unwrap_or(0)
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = Self::zero(self.context.clone());
        for (l, c) in &self.coefficients {
            out.add_term(l, k * c);
        }
        out
    }

    /// Sum of all coefficients.
    pub fn coefficient_sum(&self) -> i64 {
        self.coefficients.values().sum()
    }

    fn check_context(&self, other: &EulerElement) -> Result<()> {
        if self.context != other.context {
            return Err(Error::ContextMismatch(self.context.clone(), other.context.clone()));
        }
        Ok(())
    }
}

pub fn add(e1: &EulerElement, e2: &EulerElement) -> Result<EulerElement> {
    e1.check_context(e2)?;
    let mut out = e1.clone();
    for (l, c) in &e2.coefficients {
        out.add_term(l, *c);
    }
    Ok(out)
}

/// Table of products `χ(G/K⁺) ⋆ χ(G/L⁺)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicationTable {
    pub context: String,
    pub labels: Vec<String>,
    entries: BTreeMap<(String, String), EulerElement>,
}

#[derive(Serialize, Deserialize)]
struct TableDocument {
    context: String,
    labels: Vec<String>,
    #[serde(default)]
    products: BTreeMap<String, BTreeMap<String, i64>>,
}

impl MultiplicationTable {
    /// Table with no non-unit products; enough for the trivial-group context.
    pub fn empty(context: impl Into<String>) -> Self {
        MultiplicationTable { context: context.into(), labels: vec![UNIT.into()], entries: BTreeMap::new() }
    }

    pub fn new(
        context: impl Into<String>,
        labels: Vec<String>,
        products: impl IntoIterator<Item = ((String, String), EulerElement)>,
    ) -> Result<Self> {
        let t = MultiplicationTable {
            context: context.into(),
            labels,
            entries: products.into_iter().map(|(k, v)| (k, v.canonical())).collect(),
        };
        t.validate()?;
        Ok(t)
    }

    /// Parse `{context, labels: [...], products: {"K|L": {label: int}}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDocument = serde_json::from_str(text)?;
        let mut products = Vec::new();
        for (key, terms) in doc.products {
            let (k, l) = key
                .split_once('|')
                .ok_or_else(|| Error::InvalidTable(format!("product key {key:?} is not of the form K|L")))?;
            let elem = EulerElement::from_terms(doc.context.clone(), terms.iter().map(|(a, b)| (a.as_str(), *b)));
            products.push(((k.trim().to_string(), l.trim().to_string()), elem));
        }
        Self::new(doc.context, doc.labels, products)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let products: BTreeMap<String, &BTreeMap<String, i64>> = self
            .entries
            .iter()
            .map(|((k, l), e)| (format!("{k}|{l}"), &e.coefficients))
            .collect();
        serde_json::json!({ "context": self.context, "labels": self.labels, "products": products })
    }

    fn validate(&self) -> Result<()> {
        if !self.labels.iter().any(|l| l == UNIT) {
            return Err(Error::InvalidTable(format!("label list must contain {UNIT:?}")));
        }
        let known = |l: &str| self.labels.iter().any(|x| x == l);
        for ((k, l), e) in &self.entries {
            if !known(k) || !known(l) {
                return Err(Error::InvalidTable(format!("product {k}|{l} uses an undeclared label")));
            }
            if e.context != self.context {
                return Err(Error::InvalidTable(format!("product {k}|{l} has foreign context")));
            }
            if let Some(bad) = e.coefficients.keys().find(|x| !known(x)) {
                return Err(Error::InvalidTable(format!("product {k}|{l} yields undeclared label {bad}")));
            }
            for (unit_side, other) in [(k, l), (l, k)] {
                if unit_side == UNIT {
                    let expect = EulerElement::from_terms(self.context.clone(), [(other.as_str(), 1)]);
                    if *e != expect {
                        return Err(Error::InvalidTable(format!("unit law violated by {k}|{l}")));
                    }
                }
            }
            if let Some(sym) = self.entries.get(&(l.clone(), k.clone())) {
                if sym != e {
                    return Err(Error::InvalidTable(format!("{k}|{l} and {l}|{k} disagree")));
                }
            }
        }
        Ok(())
    }

    fn product(&self, k: &str, l: &str) -> Result<EulerElement> {
        if k == UNIT {
            return Ok(EulerElement::from_terms(self.context.clone(), [(l, 1)]));
        }
        if l == UNIT {
            return Ok(EulerElement::from_terms(self.context.clone(), [(k, 1)]));
        }
        self.entries
            .get(&(k.to_string(), l.to_string()))
            .or_else(|| self.entries.get(&(l.to_string(), k.to_string())))
            .cloned()
            .ok_or_else(|| Error::TableIncomplete(k.to_string(), l.to_string()))
    }
}

/// Bilinear extension of the table.
pub fn star(e1: &EulerElement, e2: &EulerElement, table: &MultiplicationTable) -> Result<EulerElement> {
    e1.check_context(e2)?;
    if table.context != e1.context {
        return Err(Error::ContextMismatch(e1.context.clone(), table.context.clone()));
    }
    let mut out = EulerElement::zero(e1.context.clone());
    for (k, a) in &e1.coefficients {
        for (l, b) in &e2.coefficients {
            let p = table.product(k, l)?;
            for (m, c) in &p.coefficients {
                out.add_term(m, a * b * c);
            }
        }
    }
    Ok(out)
}

/// Transport an `H`-degree to `G`: `n_(K) = Σ m_j` over the `H`-classes mapped
/// to `(K)`. With `admissible = true` the class map must be injective.
pub fn push_forward(
    hdeg: &EulerElement,
    class_map: &BTreeMap<String, String>,
    target_context: &str,
    admissible: bool,
) -> Result<EulerElement> {
    if admissible {
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (h, g) in class_map {
            if let Some(prev) = seen.insert(g.as_str(), h.as_str()) {
                return Err(Error::ClassMap(format!(
                    "admissible pair requires an injective class map; {prev} and {h} both map to {g}"
                )));
            }
        }
    }
    let mut out = EulerElement::zero(target_context);
    for (h, c) in &hdeg.coefficients {
        let g = class_map
            .get(h)
            .ok_or_else(|| Error::ClassMap(format!("class {h} has no image")))?;
        out.add_term(g, *c);
    }
    Ok(out)
}

/// `Some(a)` iff `e = a · 𝕀` (the empty element gives `Some(0)`).
pub fn scalar_unit_test(e: &EulerElement) -> Option<i64> {
    match e.coefficients.len() {
        0 => Some(0),
        1 => e.coefficients.get(UNIT).copied(),
        _ => None,
    }
}

/// One isotypic block `V_{-Δ}(β)^{copies}` of a representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepBlock {
    pub beta: f64,
    pub copies: usize,
    pub dimension: usize,
    pub nontrivial: bool,
}

/// Direct sum of isotypic blocks, tracked by dimension and triviality only.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RepresentationDescriptor {
    pub blocks: Vec<RepBlock>,
    #[serde(rename = "dim")]
    pub total_dimension: usize,
}

impl RepresentationDescriptor {
    pub fn new(blocks: Vec<RepBlock>) -> Self {
        let total_dimension = blocks.iter().map(|b| b.copies * b.dimension).sum();
        RepresentationDescriptor { blocks, total_dimension }
    }

    pub fn trivial(dim: usize) -> Self {
        if dim == 0 {
            return Self::default();
        }
        Self::new(vec![RepBlock { beta: 0.0, copies: 1, dimension: dim, nontrivial: false }])
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.iter().all(|b| !b.nontrivial)
    }

    pub fn is_empty(&self) -> bool {
        self.total_dimension == 0
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::new(self.blocks.iter().chain(&other.blocks).cloned().collect())
    }
}

/// Unevaluated `∇-deg(-Id, B(V))` for a nontrivial `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinusIdAtom {
    pub rep: RepresentationDescriptor,
    pub invertible: bool,
    pub scalar_unit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "factor", rename_all = "kebab-case")]
pub enum DegreeFactor {
    Exact(EulerElement),
    DegMinusId(MinusIdAtom),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum SymbolicDegree {
    Exact(EulerElement),
    Product(Vec<DegreeFactor>),
}

/// `∇-deg(-Id, B(V))`: `(-1)^d · 𝕀` when `V` is trivial, an atom otherwise.
pub fn deg_minus_id(context: &str, rep: &RepresentationDescriptor) -> SymbolicDegree {
    if rep.is_trivial() {
        let sign = if rep.total_dimension % 2 == 0 { 1 } else { -1 };
        SymbolicDegree::Exact(EulerElement::unit_multiple(context, sign))
    } else {
        SymbolicDegree::Product(vec![DegreeFactor::DegMinusId(MinusIdAtom {
            rep: rep.clone(),
            invertible: true,
            scalar_unit: false,
        })])
    }
}

/// What is provable about a symbolic degree without structure constants.
enum Shape {
    Scalar(i64),
    /// `a · D` with `D` invertible and not a multiple of the unit.
    NonScalar(i64),
    General(EulerElement),
    Unknown,
}

fn shape(d: &SymbolicDegree) -> Shape {
    let factors: Vec<DegreeFactor> = match d {
        SymbolicDegree::Exact(e) => vec![DegreeFactor::Exact(e.clone())],
        SymbolicDegree::Product(f) => f.clone(),
    };
    let mut scalar = 1i64;
    let mut atom_rep = RepresentationDescriptor::default();
    let mut has_atom = false;
    let mut general: Option<EulerElement> = None;
    for f in &factors {
        match f {
            DegreeFactor::Exact(e) => match scalar_unit_test(e) {
                Some(a) => scalar *= a,
                None if general.is_none() => general = Some(e.clone()),
                None => return Shape::Unknown,
            },
            DegreeFactor::DegMinusId(a) => {
                // product formula: deg(-Id, V1) ⋆ deg(-Id, V2) = deg(-Id, V1 ⊕ V2)
                atom_rep = atom_rep.direct_sum(&a.rep);
                has_atom = true;
            }
        }
    }
    let atom_nontrivial = has_atom && !atom_rep.is_trivial();
    if !atom_nontrivial && has_atom && atom_rep.total_dimension % 2 == 1 {
        scalar = -scalar;
    }
    match (general, atom_nontrivial) {
        (Some(_), true) => Shape::Unknown,
        (Some(e), false) => Shape::General(e.scale(scalar)),
        (None, true) => Shape::NonScalar(scalar),
        (None, false) => Shape::Scalar(scalar),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomSide {
    AtomOnPlus,
    AtomOnMinus,
}

/// Decide `b_atom · D ≠ b_other · 𝕀`, where the atom side is chosen by `side`.
/// Returns `false` only when equality is provable.
pub fn product_decision(b_plus: i64, b_minus: i64, d: &SymbolicDegree, side: AtomSide) -> bool {
    let (atom_int, other_int) = match side {
        AtomSide::AtomOnPlus => (b_plus, b_minus),
        AtomSide::AtomOnMinus => (b_minus, b_plus),
    };
    match shape(d) {
        Shape::Scalar(a) => atom_int * a != other_int,
        // U(G) is torsion free, so k·D is a unit multiple only when k·D = 0
        Shape::NonScalar(a) => atom_int * a != 0 || other_int != 0,
        Shape::General(e) => {
            let lhs = e.scale(atom_int);
            lhs != EulerElement::unit_multiple(e.context.clone(), other_int)
        }
        Shape::Unknown => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(terms: &[(&str, i64)]) -> EulerElement {
        EulerElement::from_terms("G", terms.iter().copied())
    }

    #[test]
    fn add_examples() {
        assert_eq!(add(&el(&[("G", 1)]), &el(&[("G", 1)])).unwrap(), el(&[("G", 2)]));
        assert_eq!(add(&el(&[("G", 2), ("e", -1)]), &el(&[("e", 1)])).unwrap(), el(&[("G", 2)]));
        let x = el(&[("e", 4), ("Z2", -3)]);
        assert_eq!(add(&el(&[]), &x).unwrap(), x);
        let other = EulerElement::from_terms("H", [("G", 1)]);
        assert!(matches!(add(&x, &other), Err(Error::ContextMismatch(..))));
    }

    #[test]
    fn star_examples() {
        let table = MultiplicationTable::new(
            "G",
            vec!["G".into(), "e".into()],
            [(("e".to_string(), "e".to_string()), el(&[]))],
        )
        .unwrap();
        let x = el(&[("e", 2), ("G", -1)]);
        assert_eq!(star(&el(&[("G", 3)]), &x, &table).unwrap(), x.scale(3));
        assert_eq!(star(&el(&[("e", 1)]), &el(&[("e", 1)]), &table).unwrap(), el(&[]));
        let triv = MultiplicationTable::empty("G");
        assert_eq!(star(&el(&[("G", 3)]), &el(&[("G", -4)]), &triv).unwrap(), el(&[("G", -12)]));
    }

    #[test]
    fn star_reports_missing_pair() {
        let t = MultiplicationTable::new("G", vec!["G".into(), "e".into(), "Z2".into()], []).unwrap();
        let err = star(&el(&[("e", 1)]), &el(&[("Z2", 1)]), &t).unwrap_err();
        assert_eq!(err, Error::TableIncomplete("e".into(), "Z2".into()));
    }

    #[test]
    fn table_json_validation() {
        let ok = r#"{"context":"SO2","labels":["G","e"],"products":{"e|e":{"e":0},"G|e":{"e":1}}}"#;
        assert!(MultiplicationTable::from_json(ok).is_ok());
        let bad_unit = r#"{"context":"SO2","labels":["G","e"],"products":{"G|e":{"e":2}}}"#;
        assert!(matches!(MultiplicationTable::from_json(bad_unit), Err(Error::InvalidTable(_))));
        let bad_sym = r#"{"context":"c","labels":["G","a","b"],"products":{"a|b":{"a":1},"b|a":{"b":1}}}"#;
        assert!(matches!(MultiplicationTable::from_json(bad_sym), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn push_forward_examples() {
        let h = EulerElement::from_terms("H", [("e", 2), ("Z2", 1)]);
        let map: BTreeMap<String, String> =
            [("e", "e_G"), ("Z2", "Z2_G")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let g = push_forward(&h, &map, "G", true).unwrap();
        assert_eq!(g, EulerElement::from_terms("G", [("e_G", 2), ("Z2_G", 1)]));
        assert_eq!(g.coefficient_sum(), 3);

        let h = EulerElement::from_terms("H", [("a", 2), ("b", -2)]);
        let map: BTreeMap<String, String> =
            [("a", "K"), ("b", "K")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let g = push_forward(&h, &map, "G", false).unwrap();
        assert_eq!(g.coefficient("K"), 0);
        assert!(push_forward(&h, &map, "G", true).is_err());

        assert!(push_forward(&EulerElement::zero("H"), &map, "G", false).unwrap().is_zero());
    }

    #[test]
    fn scalar_unit_examples() {
        assert_eq!(scalar_unit_test(&el(&[("G", 5)])), Some(5));
        assert_eq!(scalar_unit_test(&el(&[("G", 1), ("e", 2)])), None);
        assert_eq!(scalar_unit_test(&el(&[])), Some(0));
        assert_eq!(scalar_unit_test(&el(&[("e", 1)])), None);
    }

    #[test]
    fn deg_minus_id_examples() {
        let d3 = deg_minus_id("H", &RepresentationDescriptor::trivial(3));
        assert_eq!(d3, SymbolicDegree::Exact(EulerElement::unit_multiple("H", -1)));
        let d2 = deg_minus_id("H", &RepresentationDescriptor::trivial(2));
        assert_eq!(d2, SymbolicDegree::Exact(EulerElement::unit_multiple("H", 1)));
        let rep = RepresentationDescriptor::new(vec![RepBlock { beta: 1.0, copies: 1, dimension: 2, nontrivial: true }]);
        match deg_minus_id("H", &rep) {
            SymbolicDegree::Product(f) => match &f[0] {
                DegreeFactor::DegMinusId(a) => assert!(!a.scalar_unit && a.invertible),
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn product_decision_rows() {
        let rep = RepresentationDescriptor::new(vec![RepBlock { beta: 1.0, copies: 1, dimension: 2, nontrivial: true }]);
        let d = deg_minus_id("H", &rep);
        assert!(product_decision(-1, -1, &d, AtomSide::AtomOnPlus));
        assert!(!product_decision(0, 0, &d, AtomSide::AtomOnPlus));
        assert!(product_decision(0, 2, &d, AtomSide::AtomOnPlus));
        // exact comparison for trivial representations
        let t = deg_minus_id("H", &RepresentationDescriptor::trivial(2));
        assert!(!product_decision(3, 3, &t, AtomSide::AtomOnMinus));
        let t = deg_minus_id("H", &RepresentationDescriptor::trivial(1));
        assert!(product_decision(3, 3, &t, AtomSide::AtomOnMinus));
    }
}
