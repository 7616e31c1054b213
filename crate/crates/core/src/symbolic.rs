//! Exact average-Hamiltonian engine over free (noncommuting) bath symbols.
//!
//! An [`SbOperator`] is `Σ_μ σ_μ ⊗ poly_μ` with `μ ∈ {I, X, Y, Z}` and each
//! `poly_μ` a noncommutative polynomial in `B0, Bx, By, Bz` with exact
//! Gaussian-rational coefficients. Every term carries an integer power of the
//! pulse interval `τ_d`, so first-order Magnus terms stay symbolic in `τ_d`.
//!
//! Magnus convention: frames are taken in evolution order (interval `j`
//! evolves under `U_{j-1}† H U_{j-1}`, free evolution before each pulse), and
//! `H̄⁽¹⁾ = (−i τ_d / 2K) Σ_{j>k} [H_j, H_k]`. Checked against the principal
//! matrix logarithm of the simulated propagator, the convention factor is `+1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::pauli::{self, PauliAxis, PhasedPauli};
use crate::sequence::{self, PulseSequence, SequenceError};

/// Exact complex rational coefficient.
pub type Coeff = Complex<Rational64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("cannot average an empty list of frames")]
    NoFrames,
    #[error("projection axis must be X, Y or Z")]
    IdentityProjection,
    #[error("first operand must be a projection primitive P_jP_j")]
    NotProjection,
    #[error("inner sequence is not cyclic; the concatenation identity does not apply")]
    NotCyclic,
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

pub type Result<T> = std::result::Result<T, SymbolicError>;

/// Abstract bath operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BathSymbol {
    B0,
    Bx,
    By,
    Bz,
}

impl BathSymbol {
    pub const ALL: [BathSymbol; 4] = [BathSymbol::B0, BathSymbol::Bx, BathSymbol::By, BathSymbol::Bz];

    /// Bath operator coupled to `σ_axis` in the generic Hamiltonian.
    pub fn for_axis(axis: PauliAxis) -> BathSymbol {
        match axis {
            PauliAxis::I => BathSymbol::B0,
            PauliAxis::X => BathSymbol::Bx,
            PauliAxis::Y => BathSymbol::By,
            PauliAxis::Z => BathSymbol::Bz,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            BathSymbol::B0 => "B_0",
            BathSymbol::Bx => "B_x",
            BathSymbol::By => "B_y",
            BathSymbol::Bz => "B_z",
        }
    }
}

/// Ordered product of bath symbols; the empty word is the unit.
pub type BathWord = Vec<BathSymbol>;

/// A single monomial `τ_d^grade · word`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub grade: u32,
    pub word: BathWord,
}

impl Term {
    pub fn new(grade: u32, word: BathWord) -> Self {
        Term { grade, word }
    }
}

fn is_zero(c: &Coeff) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

fn rational(n: i64, d: i64) -> Coeff {
    Complex::new(Rational64::new(n, d), Rational64::zero())
}

fn phase_coeff(p: pauli::Phase) -> Coeff {
    let (re, im) = p.as_pair();
    Complex::new(Rational64::from_integer(re), Rational64::from_integer(im))
}

/// Noncommutative polynomial in bath symbols. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BathPoly {
    terms: BTreeMap<Term, Coeff>,
}

impl BathPoly {
    pub fn zero() -> Self {
        BathPoly::default()
    }

    pub fn symbol(s: BathSymbol) -> Self {
        let mut p = BathPoly::zero();
        p.add_term(Term::new(0, vec![s]), Coeff::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Coeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, grade: u32, word: &[BathSymbol]) -> Coeff {
        self.terms.get(&Term::new(grade, word.to_vec())).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn add_term(&mut self, term: Term, c: Coeff) {
        if is_zero(&c) {
            return;
        }
        match self.terms.entry(term) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if is_zero(o.get()) {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &BathPoly, s: &Coeff) {
        for (t, c) in &other.terms {
            self.add_term(t.clone(), c * s);
        }
    }

    pub fn scaled(&self, s: &Coeff) -> BathPoly {
        let mut out = BathPoly::zero();
        out.add_assign_scaled(self, s);
        out
    }

    pub fn add(&self, other: &BathPoly) -> BathPoly {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Coeff::one());
        out
    }

    pub fn sub(&self, other: &BathPoly) -> BathPoly {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-Coeff::one());
        out
    }

    /// Raises every term's `τ_d` power by `by`.
    pub fn shift_grade(&self, by: u32) -> BathPoly {
        BathPoly { terms: self.terms.iter().map(|(t, c)| (Term::new(t.grade + by, t.word.clone()), *c)).collect() }
    }

    /// Noncommutative product `self · other`.
    pub fn mul(&self, other: &BathPoly) -> BathPoly {
        let mut out = BathPoly::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                let mut word = ta.word.clone();
                word.extend_from_slice(&tb.word);
                out.add_term(Term::new(ta.grade + tb.grade, word), ca * cb);
            }
        }
        out
    }

    pub fn commutator(&self, other: &BathPoly) -> BathPoly {
        self.mul(other).sub(&other.mul(self))
    }

    /// Hermitian adjoint: reverse words, conjugate coefficients (symbols are Hermitian).
    pub fn adjoint(&self) -> BathPoly {
        let mut out = BathPoly::zero();
        for (t, c) in &self.terms {
            let word = t.word.iter().rev().copied().collect();
            out.add_term(Term::new(t.grade, word), c.conj());
        }
        out
    }

    pub fn max_grade(&self) -> Option<u32> {
        self.terms.keys().map(|t| t.grade).max()
    }

    fn entries(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(t, c)| TermJson {
                grade: t.grade,
                word: t.word.iter().map(|s| s.name().replace('_', "")).collect::<Vec<_>>().join(" "),
                re: c.re.to_string(),
                im: c.im.to_string(),
            })
            .collect()
    }
}

/// Splits a coefficient into a sign and a magnitude prefix; the prefix is
/// empty for unit magnitude.
fn fmt_coeff(c: &Coeff) -> (bool, String) {
    let (re, im) = (c.re, c.im);
    let magnitude = |v: Rational64, unit: &str| -> String {
        let v = v.abs();
        match (v.numer(), v.denom(), unit) {
            (1, 1, "") => String::new(),
            (1, 1, u) => u.to_string(),
            (n, 1, u) => format!("{n}{u}"),
            (1, d, "") => format!("1/{d}"),
            (1, d, u) => format!("{u}/{d}"),
            (n, d, u) => format!("{n}{u}/{d}"),
        }
    };
    match (re.is_zero(), im.is_zero()) {
        (_, true) => (re.is_negative(), magnitude(re, "")),
        (true, false) => (im.is_negative(), magnitude(im, "i")),
        (false, false) => {
            let sign = if im.is_negative() { "-" } else { "+" };
            (false, format!("({re}{sign}{})", magnitude(im, "i")))
        }
    }
}

fn fmt_word(word: &[BathSymbol]) -> String {
    if word.is_empty() {
        "1".to_string()
    } else {
        word.iter().map(|s| s.name()).collect()
    }
}

impl fmt::Display for BathPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut grades: BTreeMap<u32, Vec<(&Term, &Coeff)>> = BTreeMap::new();
        for (t, c) in &self.terms {
            grades.entry(t.grade).or_default().push((t, c));
        }
        let mut first = true;
        for (grade, terms) in grades {
            let mut body = String::new();
            for (i, (t, c)) in terms.iter().enumerate() {
                let (negative, cs) = fmt_coeff(c);
                let w = fmt_word(&t.word);
                let piece = if cs.is_empty() { w } else { format!("{cs} {w}") };
                body.push_str(match (i, negative) {
                    (0, false) => "",
                    (0, true) => "-",
                    (_, false) => " + ",
                    (_, true) => " - ",
                });
                body.push_str(&piece);
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match grade {
                0 => f.write_str(&body)?,
                1 => write!(f, "τ_d({body})")?,
                g => write!(f, "τ_d^{g}({body})")?,
            }
        }
        Ok(())
    }
}

/// `Σ_μ σ_μ ⊗ poly_μ`, components indexed by [`PauliAxis::index`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SbOperator {
    components: [BathPoly; 4],
}

impl SbOperator {
    pub fn zero() -> Self {
        SbOperator::default()
    }

    pub fn from_components(components: [BathPoly; 4]) -> Self {
        SbOperator { components }
    }

    pub fn component(&self, axis: PauliAxis) -> &BathPoly {
        &self.components[axis.index()]
    }

    pub fn component_mut(&mut self, axis: PauliAxis) -> &mut BathPoly {
        &mut self.components[axis.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(BathPoly::is_zero)
    }

    /// Axes with a nonzero component.
    pub fn support(&self) -> Vec<PauliAxis> {
        PauliAxis::ALL.into_iter().filter(|a| !self.component(*a).is_zero()).collect()
    }

    pub fn add(&self, other: &SbOperator) -> SbOperator {
        SbOperator { components: std::array::from_fn(|i| self.components[i].add(&other.components[i])) }
    }

    pub fn sub(&self, other: &SbOperator) -> SbOperator {
        SbOperator { components: std::array::from_fn(|i| self.components[i].sub(&other.components[i])) }
    }

    pub fn scaled(&self, s: &Coeff) -> SbOperator {
        SbOperator { components: std::array::from_fn(|i| self.components[i].scaled(s)) }
    }

    pub fn shift_grade(&self, by: u32) -> SbOperator {
        SbOperator { components: std::array::from_fn(|i| self.components[i].shift_grade(by)) }
    }

    /// `P† self P` for a pulse (phase irrelevant).
    pub fn conjugated_by(&self, p: PhasedPauli) -> SbOperator {
        let minus = -Coeff::one();
        SbOperator {
            components: std::array::from_fn(|i| {
                let mu = PauliAxis::ALL[i];
                if pauli::conj_sign(p.axis(), mu) < 0 {
                    self.components[i].scaled(&minus)
                } else {
                    self.components[i].clone()
                }
            }),
        }
    }

    /// Tensor product rule `(σ_a⊗P)(σ_b⊗Q) = (σ_a σ_b)⊗(PQ)`.
    pub fn mul(&self, other: &SbOperator) -> SbOperator {
        let mut out = SbOperator::zero();
        for a in PauliAxis::ALL {
            let pa = self.component(a);
            if pa.is_zero() {
                continue;
            }
            for b in PauliAxis::ALL {
                let pb = other.component(b);
                if pb.is_zero() {
                    continue;
                }
                let (phase, c) = a.compose(b);
                let prod = pa.mul(pb);
                out.components[c.index()].add_assign_scaled(&prod, &phase_coeff(phase));
            }
        }
        out
    }

    pub fn commutator(&self, other: &SbOperator) -> SbOperator {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn adjoint(&self) -> SbOperator {
        SbOperator { components: std::array::from_fn(|i| self.components[i].adjoint()) }
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint() == *self
    }

    /// Coefficient maps per component, for golden files.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, Vec<TermJson>> =
            PauliAxis::ALL.into_iter().map(|a| (a.to_string(), self.component(a).entries())).collect();
        serde_json::to_value(map).expect("serializable")
    }
}

#[derive(Serialize)]
struct TermJson {
    grade: u32,
    word: String,
    re: String,
    im: String,
}

impl fmt::Display for SbOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for a in PauliAxis::ALL {
            let p = self.component(a);
            if p.is_zero() {
                continue;
            }
            if !out.is_empty() {
                out.push_str(" + ");
            }
            let label = match a {
                PauliAxis::I => "1",
                PauliAxis::X => "σ_x",
                PauliAxis::Y => "σ_y",
                PauliAxis::Z => "σ_z",
            };
            let _ = write!(out, "{label}⊗[{p}]");
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// `1⊗B0 + σ_x⊗Bx + σ_y⊗By + σ_z⊗Bz` with the system Hamiltonian absorbed.
pub fn h0_generic() -> SbOperator {
    SbOperator { components: std::array::from_fn(|i| BathPoly::symbol(BathSymbol::ALL[i])) }
}

/// Frames `U_j† H U_j` for `j = 1..=K`, `U_j` the product of the first `j` pulses.
pub fn toggling_frames(seq: &PulseSequence, h: &SbOperator) -> Vec<SbOperator> {
    let mut u = PhasedPauli::IDENTITY;
    seq.pulses()
        .iter()
        .map(|&p| {
            u = p * u;
            h.conjugated_by(u)
        })
        .collect()
}

/// Frames in evolution order: interval `j` (`j = 1..=K`) sees `U_{j-1}† H U_{j-1}`.
///
/// For cyclic sequences this is [`toggling_frames`] rotated by one, since
/// `U_K` is a multiple of the identity.
pub fn interval_frames(seq: &PulseSequence, h: &SbOperator) -> Vec<SbOperator> {
    let mut u = PhasedPauli::IDENTITY;
    seq.pulses()
        .iter()
        .map(|&p| {
            let f = h.conjugated_by(u);
            u = p * u;
            f
        })
        .collect()
}

/// Zeroth-order average `(1/K) Σ_j H_j`.
pub fn avg_h0(frames: &[SbOperator]) -> Result<SbOperator> {
    if frames.is_empty() {
        return Err(SymbolicError::NoFrames);
    }
    let sum = frames.iter().fold(SbOperator::zero(), |acc, f| acc.add(f));
    Ok(sum.scaled(&rational(1, frames.len() as i64)))
}

/// First-order average `(−i τ_d / 2K) Σ_{j>k} [H_j, H_k]`, frames in time order.
///
/// The result carries one extra power of `τ_d` on every term.
pub fn avg_h1(frames: &[SbOperator]) -> Result<SbOperator> {
    if frames.is_empty() {
        return Err(SymbolicError::NoFrames);
    }
    let k = frames.len() as i64;
    let mut prefix = SbOperator::zero();
    let mut sum = SbOperator::zero();
    for f in frames {
        if !prefix.is_zero() {
            sum = sum.add(&f.commutator(&prefix));
        }
        prefix = prefix.add(f);
    }
    let scale = Complex::new(Rational64::zero(), Rational64::new(-1, 2 * k));
    Ok(sum.scaled(&scale).shift_grade(1))
}

/// Zeroth-order action of `p_axis`: keeps the identity and `axis` components.
pub fn project0(axis: PauliAxis, h: &SbOperator) -> Result<SbOperator> {
    if axis.is_identity() {
        return Err(SymbolicError::IdentityProjection);
    }
    Ok(SbOperator {
        components: std::array::from_fn(|i| {
            let mu = PauliAxis::ALL[i];
            if mu.is_identity() || mu == axis {
                h.components[i].clone()
            } else {
                BathPoly::zero()
            }
        }),
    })
}

/// Zeroth-order map of a whole sequence, `H ↦ avg_h0(toggling_frames(seq, H))`.
pub fn sequence_map0(seq: &PulseSequence, h: &SbOperator) -> SbOperator {
    avg_h0(&toggling_frames(seq, h)).expect("sequences are non-empty")
}

/// Checks `π_{A[B]} = π_B ∘ π_A` on the generic Hamiltonian, exactly.
pub fn verify_composition(a: &PulseSequence, b: &PulseSequence) -> Result<bool> {
    let axis = match a.pulses() {
        [p, q] if p.axis() == q.axis() && !p.axis().is_identity() => p.axis(),
        _ => return Err(SymbolicError::NotProjection),
    };
    if !b.is_cyclic() {
        return Err(SymbolicError::NotCyclic);
    }
    let h = h0_generic();
    let c = sequence::concat(a, b);
    let lhs = sequence_map0(&c, &h);
    let rhs = sequence_map0(b, &project0(axis, &h)?);
    Ok(lhs == rhs)
}
