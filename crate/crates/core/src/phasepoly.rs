//! Phase-polynomial representation of diagonal unitaries, and the IQP
//! circuit / IQP Bell-test structures built on it.
//!
//! A diagonal unitary on `n` qubits is stored as a list of [`PhaseTerm`]s.
//! A term with support `S` and angle `θ` multiplies the basis state `|y⟩` by
//! `e^{iθ}` iff `y_j = 1` for every `j ∈ S`, so the total phase is the
//! polynomial `φ(y) = Σ_S θ_S · Π_{j∈S} y_j`. Terms commute, which is what
//! makes the circuits "instantaneous": composition is term-list merging.

use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::{Error, Result};

/// One monomial of a phase polynomial: a nonempty set of qubits (as a bit
/// mask) and the phase applied when all of them are 1.
///
/// Support size 1 with angle θ is the gate `R(θ) = |0⟩⟨0| + e^{iθ}|1⟩⟨1|`;
/// support size 2 with angle π is the controlled-Z gate. Larger supports
/// (CCZ-style) are permitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseTerm {
    support: u64,
    angle: Angle,
}

impl PhaseTerm {
    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn angle(&self) -> Angle {
        self.angle
    }

    /// Qubit indices in the support, ascending.
    pub fn qubits(&self) -> Vec<usize> {
        (0..64).filter(|q| self.support >> q & 1 == 1).collect()
    }
}

/// Bit mask for a set of qubit indices. Panics on indices ≥ 64; range
/// checks against a register happen where the mask is used.
pub fn mask_of(qubits: &[usize]) -> u64 {
    qubits.iter().fold(0u64, |m, &q| {
        assert!(q < 64, "qubit index {q} too large for a 64-bit mask");
        m | 1 << q
    })
}

/// A diagonal unitary as a canonical phase polynomial.
///
/// Canonical form: terms sorted by support mask, one term per support, no
/// zero angles. `restrict` can leave behind a constant phase; it is kept in
/// `global_phase` rather than as an empty-support term, and never affects
/// any probability or correlator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalUnitary {
    n: usize,
    terms: Vec<PhaseTerm>,
    global_phase: Angle,
}

impl DiagonalUnitary {
    /// The identity on `n` qubits (empty polynomial).
    pub fn identity(n: usize) -> DiagonalUnitary {
        assert!(n <= 63, "register width limited to 63 qubits");
        DiagonalUnitary {
            n,
            terms: Vec::new(),
            global_phase: Angle::ZERO,
        }
    }

    /// Build from `(support mask, angle)` pairs; merges duplicate supports.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (u64, Angle)>) -> Result<DiagonalUnitary> {
        let mut u = DiagonalUnitary::identity(n);
        for (support, angle) in terms {
            u.add_term(support, angle)?;
        }
        Ok(u)
    }

    /// Add one term in place, keeping the canonical form.
    pub fn add_term(&mut self, support: u64, angle: Angle) -> Result<()> {
        if support == 0 {
            return Err(Error::EmptyMask);
        }
        if support >> self.n != 0 {
            return Err(Error::MaskOutOfRange { mask: support, n: self.n });
        }
        match self.terms.binary_search_by_key(&support, |t| t.support) {
            Ok(i) => {
                let merged = self.terms[i].angle + angle;
                if merged.is_zero() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].angle = merged;
                }
            }
            Err(i) => {
                if !angle.is_zero() {
                    self.terms.insert(i, PhaseTerm { support, angle });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PhaseTerm] {
        &self.terms
    }

    pub fn global_phase(&self) -> Angle {
        self.global_phase
    }

    pub(crate) fn with_global_phase(mut self, phase: Angle) -> DiagonalUnitary {
        self.global_phase = self.global_phase + phase;
        self
    }

    /// Exact phase `φ(y)` of the basis state `|y⟩`, reduced mod 2π.
    ///
    /// `y` must fit in `n` bits.
    pub fn phase_of(&self, y: u64) -> Result<Angle> {
        if y >> self.n != 0 {
            return Err(Error::BitLengthMismatch { value: y, n: self.n });
        }
        let mut total = self.global_phase;
        for t in &self.terms {
            if y & t.support == t.support {
                total = total + t.angle;
            }
        }
        Ok(total)
    }

    /// Product of two diagonal unitaries on the same register. Order is
    /// irrelevant: `phase_of` of the result is the sum of the factors'.
    pub fn compose(&self, other: &DiagonalUnitary) -> Result<DiagonalUnitary> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch { left: self.n, right: other.n });
        }
        let mut out = self.clone();
        for t in &other.terms {
            out.add_term(t.support, t.angle)?;
        }
        out.global_phase = out.global_phase + other.global_phase;
        Ok(out)
    }

    /// Fix one qubit's basis value and return the diagonal unitary on the
    /// remaining `n-1` qubits (supports reindexed downward).
    ///
    /// Writing `U = |0⟩⟨0|⊗V + |1⟩⟨1|⊗W` for the chosen qubit, `bit = 0`
    /// yields `V` and `bit = 1` yields `W`. A term supported only on the
    /// fixed qubit becomes a recorded global phase of the restriction.
    pub fn restrict(&self, qubit: usize, bit: bool) -> Result<DiagonalUnitary> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { index: qubit, n: self.n });
        }
        let low = (1u64 << qubit) - 1;
        let reindex = |mask: u64| (mask & low) | (mask >> (qubit + 1)) << qubit;
        let mut out = DiagonalUnitary::identity(self.n - 1);
        out.global_phase = self.global_phase;
        for t in &self.terms {
            if t.support >> qubit & 1 == 1 {
                if !bit {
                    continue; // control off: term drops
                }
                let support = reindex(t.support);
                if support == 0 {
                    out.global_phase = out.global_phase + t.angle;
                } else {
                    out.add_term(support, t.angle)?;
                }
            } else {
                out.add_term(reindex(t.support), t.angle)?;
            }
        }
        Ok(out)
    }
}

/// An IQP circuit: `|+⟩^⊗n`, a diagonal unitary, and a Pauli-X measurement
/// on a subset of the qubits. Unmeasured qubits are traced out of the
/// reported distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IQPCircuit {
    unitary: DiagonalUnitary,
    measured: u64,
}

impl IQPCircuit {
    /// Circuit measuring every qubit.
    pub fn measure_all(unitary: DiagonalUnitary) -> IQPCircuit {
        let measured = if unitary.n() == 0 { 0 } else { (1u64 << unitary.n()) - 1 };
        IQPCircuit { unitary, measured }
    }

    /// Circuit measuring the qubits in `measured`.
    pub fn with_measured(unitary: DiagonalUnitary, measured: u64) -> Result<IQPCircuit> {
        if measured >> unitary.n() != 0 {
            return Err(Error::MaskOutOfRange { mask: measured, n: unitary.n() });
        }
        Ok(IQPCircuit { unitary, measured })
    }

    pub fn n(&self) -> usize {
        self.unitary.n()
    }

    pub fn unitary(&self) -> &DiagonalUnitary {
        &self.unitary
    }

    pub fn measured(&self) -> u64 {
        self.measured
    }

    pub fn measures_all(&self) -> bool {
        self.measured.count_ones() as usize == self.n()
    }
}

/// An IQP Bell test: a family `{C_{n,x}}` where the realized unitary is the
/// fixed base composed with one single-qubit gate `R(θ_m)` per input bit
/// `x_m = 1`. Party `m`'s two measurement settings are "apply `R(θ_m)` or
/// not" before the X measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IQPBellTest {
    base: DiagonalUnitary,
    input_angles: Vec<Angle>,
}

impl IQPBellTest {
    pub fn new(base: DiagonalUnitary, input_angles: Vec<Angle>) -> Result<IQPBellTest> {
        if input_angles.len() != base.n() {
            return Err(Error::QubitCountMismatch { left: base.n(), right: input_angles.len() });
        }
        Ok(IQPBellTest { base, input_angles })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn base(&self) -> &DiagonalUnitary {
        &self.base
    }

    pub fn input_angles(&self) -> &[Angle] {
        &self.input_angles
    }

    /// The diagonal unitary realized at setting string `x`: the base
    /// composed with the term `({m}, θ_m)` for every m with `x_m = 1`.
    pub fn realize(&self, x: u64) -> Result<DiagonalUnitary> {
        if x >> self.n() != 0 {
            return Err(Error::BitLengthMismatch { value: x, n: self.n() });
        }
        let mut u = self.base.clone();
        for (m, &theta) in self.input_angles.iter().enumerate() {
            if x >> m & 1 == 1 {
                u.add_term(1 << m, theta)?;
            }
        }
        Ok(u)
    }
}

/// A parsed circuit file: plain circuit or Bell-test family, depending on
/// whether the file carries `input_angles`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedCircuit {
    Circuit(IQPCircuit),
    BellTest(IQPBellTest),
}

// --- circuit file format -----------------------------------------------
//
// UTF-8 JSON, angles in units of π:
// {
//   "n": 5,
//   "terms": [{"support": [0, 2], "angle": {"num": 1, "den": 1}}, ...],
//   "input_angles": [{"num": 0, "den": 1}, ...],   // optional: Bell test
//   "measured": [0, 1]                             // optional: default all
// }
// Unknown keys are rejected.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    n: usize,
    terms: Vec<TermFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_angles: Option<Vec<AngleFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    support: Vec<usize>,
    angle: AngleFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AngleFile {
    num: i64,
    den: i64,
}

impl AngleFile {
    fn to_angle(&self, context: &str) -> Result<Angle> {
        if self.den == 0 {
            return Err(Error::Format(format!("{context}: angle denominator must be nonzero")));
        }
        Angle::new(self.num, self.den)
    }
}

impl From<Angle> for AngleFile {
    fn from(a: Angle) -> AngleFile {
        AngleFile { num: a.numerator(), den: a.denominator() }
    }
}

/// Parse a circuit file. `input_angles` marks a Bell test; `measured` is
/// only meaningful for plain circuits.
pub fn parse_circuit(text: &str) -> Result<ParsedCircuit> {
    let file: CircuitFile = serde_json::from_str(text)?;
    if file.n == 0 || file.n > 63 {
        return Err(Error::Format(format!("n: must be between 1 and 63, got {}", file.n)));
    }
    let mut unitary = DiagonalUnitary::identity(file.n);
    for (i, term) in file.terms.iter().enumerate() {
        if term.support.is_empty() {
            return Err(Error::Format(format!("terms[{i}].support: must name at least one qubit")));
        }
        let mut mask = 0u64;
        for (j, &q) in term.support.iter().enumerate() {
            if q >= file.n {
                return Err(Error::Format(format!(
                    "terms[{i}].support[{j}]: qubit index {q} out of range for n={}",
                    file.n
                )));
            }
            mask |= 1 << q;
        }
        let angle = term.angle.to_angle(&format!("terms[{i}].angle"))?;
        unitary.add_term(mask, angle)?;
    }
    match file.input_angles {
        Some(angles) => {
            if file.measured.is_some() {
                return Err(Error::Format(
                    "measured: not allowed together with input_angles (a Bell test measures every qubit)".into(),
                ));
            }
            if angles.len() != file.n {
                return Err(Error::Format(format!(
                    "input_angles: expected {} entries, got {}",
                    file.n,
                    angles.len()
                )));
            }
            let angles = angles
                .iter()
                .enumerate()
                .map(|(i, a)| a.to_angle(&format!("input_angles[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(ParsedCircuit::BellTest(IQPBellTest::new(unitary, angles)?))
        }
        None => {
            let circuit = match file.measured {
                None => IQPCircuit::measure_all(unitary),
                Some(list) => {
                    let mut mask = 0u64;
                    for (i, &q) in list.iter().enumerate() {
                        if q >= file.n {
                            return Err(Error::Format(format!(
                                "measured[{i}]: qubit index {q} out of range for n={}",
                                file.n
                            )));
                        }
                        mask |= 1 << q;
                    }
                    IQPCircuit::with_measured(unitary, mask)?
                }
            };
            Ok(ParsedCircuit::Circuit(circuit))
        }
    }
}

/// Serialize back to the file format. `parse_circuit(serialize_circuit(c))`
/// is structurally the identity (the in-memory form is already canonical).
/// A restriction's recorded global phase is not part of the format and is
/// dropped; it is unobservable in any distribution or correlator.
pub fn serialize_circuit(circuit: &ParsedCircuit) -> String {
    let file = match circuit {
        ParsedCircuit::Circuit(c) => CircuitFile {
            n: c.n(),
            terms: term_files(c.unitary()),
            input_angles: None,
            measured: if c.measures_all() {
                None
            } else {
                Some((0..c.n()).filter(|q| c.measured() >> q & 1 == 1).collect())
            },
        },
        ParsedCircuit::BellTest(t) => CircuitFile {
            n: t.n(),
            terms: term_files(t.base()),
            input_angles: Some(t.input_angles().iter().map(|&a| a.into()).collect()),
            measured: None,
        },
    };
    serde_json::to_string_pretty(&file).expect("circuit file serialization cannot fail")
}

fn term_files(u: &DiagonalUnitary) -> Vec<TermFile> {
    u.terms()
        .iter()
        .map(|t| TermFile { support: t.qubits(), angle: t.angle().into() })
        .collect()
}
