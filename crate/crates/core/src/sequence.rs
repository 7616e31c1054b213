//! Pulse-sequence calculus: projection primitives, concatenation, cyclicity,
//! CPDD classes and the catalog of known uniform schemes.
//!
//! Pulse lists are stored in time order (first applied first). The
//! conventional text form lists them the other way round, last applied
//! leftmost, so `ZYZY` in text is the time-ordered list `[Y, Z, Y, Z]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{self, PauliAxis, Phase, PhasedPauli};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("a projection must act along X, Y or Z, not the identity")]
    IdentityProjection,
    #[error("a concatenation order must contain at least one projection")]
    EmptyOrder,
    #[error("a pulse sequence must contain at least one pulse")]
    Empty,
    #[error("half-repetition is undefined for odd length {0}")]
    OddLength(usize),
    #[error("sequence has no projection provenance; its class is undefined")]
    MissingProvenance,
    #[error("invalid pulse character '{ch}' at position {pos}")]
    InvalidPulse { ch: char, pos: usize },
    #[error("{name} level must be at least 1")]
    ZeroLevel { name: &'static str },
    #[error("{name} takes no parameter")]
    UnexpectedParameter { name: &'static str },
}

pub type Result<T> = std::result::Result<T, SequenceError>;

/// Per-axis projection counts `{n_x, n_y, n_z}` of a CPDD sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CpddClass {
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
}

impl CpddClass {
    pub const fn new(nx: u32, ny: u32, nz: u32) -> Self {
        CpddClass { nx, ny, nz }
    }

    /// Projection count along a spatial axis; zero for `I`.
    pub fn count(&self, axis: PauliAxis) -> u32 {
        match axis {
            PauliAxis::I => 0,
            PauliAxis::X => self.nx,
            PauliAxis::Y => self.ny,
            PauliAxis::Z => self.nz,
        }
    }

    pub fn total(&self) -> u32 {
        self.nx + self.ny + self.nz
    }

    /// Pulse count `K = 2^(n_x + n_y + n_z)`.
    ///
    /// Panics when the total reaches 64.
    pub fn pulse_count(&self) -> u64 {
        1u64.checked_shl(self.total()).filter(|&k| k != 0).expect("pulse count overflows u64")
    }

    /// Leading order `d_i` of the error term along `axis`: the number of
    /// projections along the two orthogonal axes.
    pub fn axis_order(&self, axis: PauliAxis) -> u32 {
        axis.orthogonal().iter().map(|&a| self.count(a)).sum()
    }

    /// Suppression order `N = min(n_y+n_z, n_x+n_z, n_x+n_y)`.
    pub fn suppression_order(&self) -> u32 {
        (self.ny + self.nz).min(self.nx + self.nz).min(self.nx + self.ny)
    }

    /// Canonical innermost-first projection order: all x, then y, then z.
    pub fn canonical_order(&self) -> Vec<PauliAxis> {
        std::iter::repeat_n(PauliAxis::X, self.nx as usize)
            .chain(std::iter::repeat_n(PauliAxis::Y, self.ny as usize))
            .chain(std::iter::repeat_n(PauliAxis::Z, self.nz as usize))
            .collect()
    }

    fn from_order(order: &[PauliAxis]) -> Self {
        let mut c = CpddClass::default();
        for a in order {
            match a {
                PauliAxis::X => c.nx += 1,
                PauliAxis::Y => c.ny += 1,
                PauliAxis::Z => c.nz += 1,
                PauliAxis::I => {}
            }
        }
        c
    }
}

impl fmt::Display for CpddClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.nx, self.ny, self.nz)
    }
}

/// Derived quantities of a class, matching `class_of`.
pub fn class_of(nx: u32, ny: u32, nz: u32) -> CpddClass {
    CpddClass::new(nx, ny, nz)
}

/// Uniform π-pulse sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PulseSequence {
    pulses: Vec<PhasedPauli>,
    /// Projection axes, innermost first.
    provenance: Option<Vec<PauliAxis>>,
}

impl PulseSequence {
    /// Arbitrary pulse list in time order, without provenance.
    pub fn new(pulses: Vec<PhasedPauli>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(SequenceError::Empty);
        }
        Ok(PulseSequence { pulses, provenance: None })
    }

    /// Parses the conventional text form (last-applied pulse leftmost).
    pub fn from_paper_order(text: &str) -> Result<Self> {
        let mut pulses = Vec::with_capacity(text.len());
        for (pos, ch) in text.char_indices() {
            let axis = PauliAxis::from_char(ch).ok_or(SequenceError::InvalidPulse { ch, pos })?;
            pulses.push(PhasedPauli::from(axis));
        }
        pulses.reverse();
        PulseSequence::new(pulses)
    }

    /// Time-ordered pulses with their accumulated phases.
    pub fn pulses(&self) -> &[PhasedPauli] {
        &self.pulses
    }

    pub fn axes(&self) -> Vec<PauliAxis> {
        self.pulses.iter().map(|p| p.axis()).collect()
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn provenance(&self) -> Option<&[PauliAxis]> {
        self.provenance.as_deref()
    }

    pub fn class(&self) -> Option<CpddClass> {
        self.provenance.as_deref().map(CpddClass::from_order)
    }

    pub fn suppression_order(&self) -> Option<u32> {
        self.class().map(|c| c.suppression_order())
    }

    /// Text form with the last-applied pulse leftmost. Phases are omitted.
    pub fn paper_order(&self) -> String {
        self.pulses.iter().rev().map(|p| p.axis().as_char()).collect()
    }

    /// Control propagator after the first `j` pulses, `P_j ⋯ P_1`.
    pub fn control_after(&self, j: usize) -> PhasedPauli {
        self.pulses[..j].iter().fold(PhasedPauli::IDENTITY, |acc, &p| p * acc)
    }

    /// Phase `φ` with `P_K ⋯ P_1 = φ·1`, if the sequence is cyclic.
    pub fn cyclic_phase(&self) -> Option<Phase> {
        let u = self.control_after(self.pulses.len());
        u.axis().is_identity().then(|| u.phase())
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic_phase().is_some()
    }

    /// Every odd site (1st, 3rd, … in time order) carries the same axis.
    pub fn check_odd_sites(&self) -> bool {
        let mut odd = self.pulses.iter().step_by(2).map(|p| p.axis());
        let first = odd.next();
        odd.all(|a| Some(a) == first)
    }

    /// First and second halves carry identical axes.
    pub fn check_half_repeat(&self) -> Result<bool> {
        let k = self.pulses.len();
        if !k.is_multiple_of(2) {
            return Err(SequenceError::OddLength(k));
        }
        let (a, b) = self.pulses.split_at(k / 2);
        Ok(a.iter().zip(b).all(|(p, q)| p.axis() == q.axis()))
    }

    pub fn summary(&self) -> SequenceSummary {
        let class = self.class();
        SequenceSummary {
            sequence: self.paper_order(),
            pulses: self.pulses.iter().map(|p| p.to_string()).collect(),
            provenance: self
                .provenance
                .as_ref()
                .map(|p| p.iter().map(|a| a.as_char().to_ascii_lowercase().to_string()).collect()),
            class,
            k: self.pulses.len(),
            n: class.map(|c| c.suppression_order()),
            cyclic: self.is_cyclic(),
        }
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.paper_order())
    }
}

/// JSON form of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSummary {
    /// Text form, last-applied pulse leftmost.
    pub sequence: String,
    /// Time-ordered pulses including phases.
    pub pulses: Vec<String>,
    /// Projection axes, innermost first.
    pub provenance: Option<Vec<String>>,
    pub class: Option<CpddClass>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub cyclic: bool,
}

/// Projection primitive `p_i = P_i P_i`.
pub fn projection(axis: PauliAxis) -> Result<PulseSequence> {
    if axis.is_identity() {
        return Err(SequenceError::IdentityProjection);
    }
    let p = PhasedPauli::from(axis);
    Ok(PulseSequence { pulses: vec![p, p], provenance: Some(vec![axis]) })
}

/// Concatenation `A[B]`: each pulse of `A` follows a full copy of `B` and is
/// fused (multiplied from the left) with the last pulse of that copy.
pub fn concat(a: &PulseSequence, b: &PulseSequence) -> PulseSequence {
    let kb = b.pulses.len();
    let (b_last, b_head) = b.pulses.split_last().expect("sequences are non-empty");
    let mut pulses = Vec::with_capacity(a.pulses.len() * kb);
    for &ap in &a.pulses {
        pulses.extend_from_slice(b_head);
        pulses.push(pauli::mul(ap, *b_last));
    }
    let provenance = match (&a.provenance, &b.provenance) {
        (Some(pa), Some(pb)) => Some(pb.iter().chain(pa).copied().collect()),
        _ => None,
    };
    PulseSequence { pulses, provenance }
}

/// Builds `p_{i_N}[p_{i_{N-1}}[… [p_{i_1}] …]]` from an innermost-first order.
pub fn cpdd_from_order(order: &[PauliAxis]) -> Result<PulseSequence> {
    let (first, rest) = order.split_first().ok_or(SequenceError::EmptyOrder)?;
    rest.iter().try_fold(projection(*first)?, |inner, &axis| Ok(concat(&projection(axis)?, &inner)))
}

/// Representative sequence of a class using the canonical order.
pub fn from_class(class: CpddClass) -> Result<PulseSequence> {
    cpdd_from_order(&class.canonical_order())
}

/// Same class: identical per-axis projection counts.
pub fn equivalent(a: &PulseSequence, b: &PulseSequence) -> Result<bool> {
    match (a.class(), b.class()) {
        (Some(ca), Some(cb)) => Ok(ca == cb),
        _ => Err(SequenceError::MissingProvenance),
    }
}

/// Minimum pulse count reaching suppression order `n`: `2^⌈3n/2⌉`.
///
/// `n = 0` returns 2, the single projection.
pub fn k_min(n: u32) -> u64 {
    if n == 0 {
        return 2;
    }
    1u64 << (3 * n).div_ceil(2)
}

/// Minimum-pulse class reaching order `k`.
pub fn oudd(k: u32) -> CpddClass {
    let m = k % 2;
    CpddClass::new((k - m) / 2, (k + m) / 2, (k + m) / 2)
}

/// PDD / XY4, `XYXY` (class `{0,1,1}`).
pub fn pdd() -> PulseSequence {
    cpdd_from_order(&[PauliAxis::Y, PauliAxis::Z]).expect("static order")
}

/// `CDD_1 = p_x[p_y]`, printed `ZYZY`.
pub fn cdd1() -> PulseSequence {
    cpdd_from_order(&[PauliAxis::Y, PauliAxis::X]).expect("static order")
}

/// `CDD_l = CDD_1[CDD_{l-1}]`, class `{0,l,l}`.
pub fn cdd(level: u32) -> Result<PulseSequence> {
    if level == 0 {
        return Err(SequenceError::ZeroLevel { name: "CDD" });
    }
    let base = cdd1();
    Ok((1..level).fold(base.clone(), |inner, _| concat(&base, &inner)))
}

/// `GA8_a = p_x[p_y[p_z]]`, printed `IZXZIZXZ`.
pub fn ga8a() -> PulseSequence {
    cpdd_from_order(&[PauliAxis::Z, PauliAxis::Y, PauliAxis::X]).expect("static order")
}

/// `Z(XYXY)Z(XYXY) = p_z[p_z[p_y]]`, class `{0,1,2}`.
pub fn ga8b() -> PulseSequence {
    cpdd_from_order(&[PauliAxis::Y, PauliAxis::Z, PauliAxis::Z]).expect("static order")
}

/// `GA8_l = GA8_a[GA8_{l-1}]`, class `{l,l,l}`.
pub fn ga8(level: u32) -> Result<PulseSequence> {
    if level == 0 {
        return Err(SequenceError::ZeroLevel { name: "GA8" });
    }
    let base = ga8a();
    Ok((1..level).fold(base.clone(), |inner, _| concat(&base, &inner)))
}

/// One row of the table of known schemes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub name: String,
    pub class: CpddClass,
    pub pattern: String,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "N")]
    pub n: u32,
}

impl CatalogRow {
    fn new(name: impl Into<String>, class: CpddClass, pattern: impl Into<String>) -> Self {
        CatalogRow {
            name: name.into(),
            class,
            pattern: pattern.into(),
            k: class.pulse_count(),
            n: class.suppression_order(),
        }
    }
}

/// Known schemes as CPDD classes, with `CDD_l` for `l ≤ max_cdd` and
/// `GA8_l` for `l ≤ max_ga8`. `K` and `N` are computed from the class.
pub fn catalog(max_cdd: u32, max_ga8: u32) -> Vec<CatalogRow> {
    let mut rows = vec![
        CatalogRow::new("Projection", CpddClass::new(0, 0, 1), "P_iP_i"),
        CatalogRow::new("PDD(CDD_1)", CpddClass::new(0, 1, 1), "P_iP_jP_iP_j"),
        CatalogRow::new("GA8_a", CpddClass::new(1, 1, 1), "IP_iP_jP_iIP_iP_jP_i"),
    ];
    for l in 1..=max_cdd {
        rows.push(CatalogRow::new(format!("CDD_{l}"), CpddClass::new(0, l, l), format!("CDD[CDD_{}]", l - 1)));
    }
    for l in 1..=max_ga8 {
        rows.push(CatalogRow::new(format!("GA8_{l}"), CpddClass::new(l, l, l), format!("GA8_a[GA8_{}]", l - 1)));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use PauliAxis::{I, X, Y, Z};

    fn seq(text: &str) -> PulseSequence {
        PulseSequence::from_paper_order(text).unwrap()
    }

    #[test]
    fn projection_examples() {
        let pz = projection(Z).unwrap();
        assert_eq!(pz.paper_order(), "ZZ");
        assert_eq!(pz.len(), 2);
        assert_eq!(pz.class(), Some(CpddClass::new(0, 0, 1)));
        assert_eq!(pz.suppression_order(), Some(0));
        assert_eq!(projection(X).unwrap().paper_order(), "XX");
        assert_eq!(projection(I), Err(SequenceError::IdentityProjection));
    }

    #[test]
    fn concat_worked_examples() {
        let px = projection(X).unwrap();
        let py = projection(Y).unwrap();
        let pz = projection(Z).unwrap();
        let c = concat(&px, &py);
        assert_eq!(c.paper_order(), "ZYZY");
        assert_eq!(c.axes(), vec![Y, Z, Y, Z]);
        assert_eq!(concat(&px, &concat(&py, &pz)).paper_order(), "IZXZIZXZ");
        assert_eq!(c.provenance(), Some(&[Y, X][..]));
    }

    #[test]
    fn concat_with_identity_block_is_neutral() {
        let a = seq("XYZYX");
        let one = seq("I");
        assert_eq!(concat(&a, &one).pulses(), a.pulses());
        assert_eq!(concat(&a, &one).provenance(), None);
    }

    #[test]
    fn concat_tracks_fused_phase() {
        // X applied after Y: X·Y = iZ.
        let c = concat(&projection(X).unwrap(), &projection(Y).unwrap());
        assert_eq!(c.pulses()[1], PhasedPauli::new(Phase::I, Z));
    }

    #[test]
    fn cyclicity_examples() {
        assert!(seq("XYXY").is_cyclic());
        assert!(!seq("X").is_cyclic());
        assert_eq!(seq("ZZ").cyclic_phase(), Some(Phase::ONE));
        let c = concat(&seq("XYXY"), &seq("ZZ"));
        assert!(c.is_cyclic());
    }

    #[test]
    fn class_examples() {
        let c = class_of(1, 1, 1);
        assert_eq!((c.pulse_count(), c.suppression_order()), (8, 2));
        let c = class_of(0, 2, 2);
        assert_eq!((c.pulse_count(), c.suppression_order()), (16, 2));
        assert_eq!(class_of(0, 1, 2).suppression_order(), 1);
        let c = class_of(0, 1, 2);
        assert_eq!([c.axis_order(X), c.axis_order(Y), c.axis_order(Z)], [3, 2, 1]);
    }

    #[test]
    fn cpdd_from_order_examples() {
        assert_eq!(cpdd_from_order(&[Z, Y, X]).unwrap().paper_order(), "IZXZIZXZ");
        assert_eq!(cpdd_from_order(&[Y, X]).unwrap().paper_order(), "ZYZY");
        assert_eq!(cpdd_from_order(&[Z]).unwrap().paper_order(), "ZZ");
        assert_eq!(cpdd_from_order(&[]), Err(SequenceError::EmptyOrder));
        assert_eq!(cpdd_from_order(&[X, I]), Err(SequenceError::IdentityProjection));
        let c = cpdd_from_order(&[X, Z, Z, Y]).unwrap().class().unwrap();
        assert_eq!(c, CpddClass::new(1, 1, 2));
    }

    #[test]
    fn k_min_examples() {
        let got: Vec<u64> = (1..=6).map(k_min).collect();
        assert_eq!(got, vec![4, 8, 32, 64, 256, 512]);
        assert_eq!(k_min(0), 2);
    }

    #[test]
    fn oudd_examples() {
        assert_eq!(oudd(1), CpddClass::new(0, 1, 1));
        assert_eq!(oudd(2), CpddClass::new(1, 1, 1));
        let c = oudd(5);
        assert_eq!(c, CpddClass::new(2, 3, 3));
        assert_eq!((c.pulse_count(), c.suppression_order()), (256, 5));
    }

    #[test]
    fn named_schemes() {
        assert_eq!(pdd().paper_order(), "XYXY");
        assert_eq!(cdd1().paper_order(), "ZYZY");
        assert_eq!(ga8a().paper_order(), "IZXZIZXZ");
        // Z(XYXY)Z(XYXY) with Z fused into the leftmost X of each block.
        let literal = concat(&seq("ZZ"), &seq("XYXY"));
        assert_eq!(ga8b().axes(), literal.axes());
        assert_eq!(ga8b().paper_order(), "YYXYYYXY");
        assert_eq!(ga8b().class(), Some(CpddClass::new(0, 1, 2)));
        assert_eq!(cdd(2).unwrap().len(), 16);
        // p_x[p_y] nests y inside x, so CDD_l lands in the permuted class {l,l,0}.
        assert_eq!(cdd(3).unwrap().class(), Some(CpddClass::new(3, 3, 0)));
        assert_eq!(cdd(3).unwrap().suppression_order(), Some(3));
        assert_eq!(ga8(2).unwrap().len(), 64);
        assert_eq!(ga8(2).unwrap().suppression_order(), Some(4));
        assert!(cdd(0).is_err());
    }

    #[test]
    fn catalog_rows() {
        let rows = catalog(4, 3);
        let find = |n: &str| rows.iter().find(|r| r.name == n).unwrap();
        assert_eq!((find("Projection").k, find("Projection").n), (2, 0));
        assert_eq!((find("PDD(CDD_1)").k, find("PDD(CDD_1)").n), (4, 1));
        assert_eq!(find("PDD(CDD_1)").pattern, "P_iP_jP_iP_j");
        assert_eq!((find("GA8_a").k, find("GA8_a").n), (8, 2));
        assert_eq!((find("GA8_2").k, find("GA8_2").n), (64, 4));
        assert_eq!((find("CDD_3").k, find("CDD_3").n), (64, 3));
    }

    #[test]
    fn structural_checks() {
        let ga = seq("IZXZIZXZ");
        assert!(ga.check_odd_sites());
        assert_eq!(ga.check_half_repeat(), Ok(true));
        assert!(seq("ZZ").check_odd_sites());
        assert_eq!(seq("ZZ").check_half_repeat(), Ok(true));
        assert_eq!(seq("XYZI").check_half_repeat(), Ok(false));
        assert_eq!(seq("XYZ").check_half_repeat(), Err(SequenceError::OddLength(3)));
        assert!(!seq("ZYZX").check_odd_sites());
    }

    #[test]
    fn equivalence_examples() {
        let a = cpdd_from_order(&[Z, Y, X]).unwrap();
        let b = cpdd_from_order(&[X, Y, Z]).unwrap();
        assert_eq!(equivalent(&a, &b), Ok(true));
        assert_eq!(equivalent(&projection(X).unwrap(), &projection(Y).unwrap()), Ok(false));
        assert_eq!(equivalent(&a, &a), Ok(true));
        assert_eq!(equivalent(&a, &seq("XYXY")), Err(SequenceError::MissingProvenance));
    }

    #[test]
    fn paper_order_parsing() {
        let s = seq("ZYZY");
        assert_eq!(s.axes(), vec![Y, Z, Y, Z]);
        assert_eq!(s.to_string(), "ZYZY");
        assert!(matches!(PulseSequence::from_paper_order("ZQ"), Err(SequenceError::InvalidPulse { ch: 'Q', pos: 1 })));
        assert_eq!(PulseSequence::from_paper_order(""), Err(SequenceError::Empty));
    }

    #[test]
    fn summary_json_fields() {
        let v = serde_json::to_value(cdd1().summary()).unwrap();
        assert_eq!(v["sequence"], "ZYZY");
        assert_eq!(v["K"], 4);
        assert_eq!(v["N"], 1);
        assert_eq!(v["class"]["ny"], 1);
        assert_eq!(v["provenance"], serde_json::json!(["y", "x"]));
        assert_eq!(v["pulses"][1], "iZ");
    }
}
