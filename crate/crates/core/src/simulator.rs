//! Exact state-vector simulation of IQP circuits.
//!
//! An IQP circuit's X-basis outcome amplitudes are
//! `a_z = 2^{-n} Σ_y (-1)^{y·z} e^{iφ(y)}`, so a run is: fill the 2^n phase
//! vector (a subset-sum sweep, O(n·2^n)), exponentiate, and apply one fast
//! Walsh-Hadamard transform. Everything downstream — post-selection,
//! correlators, sampling — works on the resulting distribution.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::phasepoly::{DiagonalUnitary, IQPBellTest, IQPCircuit};

/// Default cap on the register width for full state-vector runs
/// (2^20 complex doubles = 16 MB).
pub const DEFAULT_QUBIT_CAP: usize = 20;

/// Hard ceiling for the overridable cap (2^24 amplitudes = 268 MB).
pub const MAX_QUBIT_CAP: usize = 24;

/// Probabilities below this floor are treated as zero when conditioning.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Unnormalized in-place Walsh-Hadamard transform, O(n·2^n) butterfly.
///
/// Applying it twice multiplies the input by the length.
pub fn fwht<T>(values: &mut [T]) -> Result<()>
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = values.len();
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len });
    }
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(h * 2) {
            for i in block..block + h {
                let (a, b) = (values[i], values[i + h]);
                values[i] = a + b;
                values[i + h] = a - b;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// Gather the bits of `z` selected by `mask` into the low bits, keeping
/// their order.
pub(crate) fn compress_bits(z: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut pos = 0;
    let mut m = mask;
    while m != 0 {
        let q = m.trailing_zeros();
        out |= (z >> q & 1) << pos;
        pos += 1;
        m &= m - 1;
    }
    out
}

/// A pure state on `n` qubits as 2^n complex amplitudes in the Z basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|+⟩^⊗n`, the IQP input state.
    pub fn plus_state(n: usize) -> StateVector {
        let size = 1usize << n;
        let amp = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
        StateVector { n, amps: vec![amp; size] }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len });
        }
        Ok(StateVector { n: len.trailing_zeros() as usize, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-10
    }

    /// Multiply in a diagonal unitary, including its recorded global phase.
    pub fn apply_diagonal(&mut self, u: &DiagonalUnitary) -> Result<()> {
        if u.n() != self.n {
            return Err(Error::QubitCountMismatch { left: self.n, right: u.n() });
        }
        for t in u.terms() {
            let support = t.support() as usize;
            let phasor = t.angle().phasor();
            for (y, amp) in self.amps.iter_mut().enumerate() {
                if y & support == support {
                    *amp *= phasor;
                }
            }
        }
        if !u.global_phase().is_zero() {
            let phasor = u.global_phase().phasor();
            for amp in &mut self.amps {
                *amp *= phasor;
            }
        }
        Ok(())
    }

    /// Measure one qubit in the X basis and keep the given outcome
    /// (`false` ↔ ⟨+|, `true` ↔ ⟨-|). Returns the normalized post-
    /// measurement state on the remaining qubits and the outcome
    /// probability.
    pub fn project_x(&self, qubit: usize, outcome: bool) -> Result<(StateVector, f64)> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { index: qubit, n: self.n });
        }
        let size = 1usize << (self.n - 1);
        let low = (1usize << qubit) - 1;
        let sign = if outcome { -1.0 } else { 1.0 };
        let mut amps = Vec::with_capacity(size);
        for rest in 0..size {
            let y0 = (rest & low) | (rest & !low) << 1;
            let y1 = y0 | 1 << qubit;
            amps.push((self.amps[y0] + sign * self.amps[y1]) / std::f64::consts::SQRT_2);
        }
        let mut state = StateVector { n: self.n - 1, amps };
        let prob = state.norm_sqr();
        if prob < PROBABILITY_FLOOR {
            return Err(Error::ImpossibleEvent { probability: prob });
        }
        let scale = 1.0 / prob.sqrt();
        for a in &mut state.amps {
            *a *= scale;
        }
        Ok((state, prob))
    }

    /// `|⟨self|other⟩|²`; insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch { left: self.n, right: other.n });
        }
        let dot: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(dot.norm_sqr())
    }

    /// Reduced density matrix of one qubit, `[[ρ00, ρ01], [ρ10, ρ11]]`.
    pub fn single_qubit_density(&self, qubit: usize) -> Result<[[Complex64; 2]; 2]> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { index: qubit, n: self.n });
        }
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        let low = (1usize << qubit) - 1;
        for rest in 0..1usize << (self.n - 1) {
            let base = (rest & low) | (rest & !low) << 1;
            let a = [self.amps[base], self.amps[base | 1 << qubit]];
            for (b, &ab) in a.iter().enumerate() {
                for (c, &ac) in a.iter().enumerate() {
                    rho[b][c] += ab * ac.conj();
                }
            }
        }
        Ok(rho)
    }
}

/// A probability distribution over `n`-bit outcome strings. Bit `i` of an
/// outcome index is the i-th smallest measured qubit.
///
/// `success_probability` is 1 for an unconditioned run and multiplies
/// through on every post-selection.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    n: usize,
    probs: Vec<f64>,
    success_probability: f64,
}

impl OutcomeDistribution {
    pub fn new(n: usize, mut probs: Vec<f64>, success_probability: f64) -> Result<OutcomeDistribution> {
        if probs.len() != 1 << n {
            return Err(Error::NotPowerOfTwo { len: probs.len() });
        }
        let mut total = 0.0;
        for p in &mut probs {
            if *p < 0.0 {
                debug_assert!(*p >= -PROBABILITY_FLOOR, "negative probability {p}");
                *p = 0.0;
            }
            total += *p;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sqr: total });
        }
        Ok(OutcomeDistribution { n, probs, success_probability })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, z: u64) -> f64 {
        self.probs[z as usize]
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    /// Condition on the masked bits taking the given values. The result
    /// still ranges over full outcome strings; `success_probability` picks
    /// up the probability of the event.
    pub fn postselect(&self, mask: u64, values: u64) -> Result<OutcomeDistribution> {
        if mask == 0 {
            return Err(Error::EmptyMask);
        }
        if mask >> self.n != 0 {
            return Err(Error::MaskOutOfRange { mask, n: self.n });
        }
        if values & !mask != 0 {
            return Err(Error::ConditionOutsideMask { mask, values });
        }
        let mut kept = 0.0;
        for (z, &p) in self.probs.iter().enumerate() {
            if z as u64 & mask == values && p >= PROBABILITY_FLOOR {
                kept += p;
            }
        }
        if kept < PROBABILITY_FLOOR {
            return Err(Error::ImpossibleEvent { probability: kept });
        }
        let probs = self
            .probs
            .iter()
            .enumerate()
            .map(|(z, &p)| {
                if z as u64 & mask == values && p >= PROBABILITY_FLOOR {
                    p / kept
                } else {
                    0.0
                }
            })
            .collect();
        OutcomeDistribution::new(self.n, probs, self.success_probability * kept)
    }

    /// Expectation of `(-1)^{z·mask}`: Pr(parity 0) − Pr(parity 1).
    pub fn parity_expectation(&self, mask: u64) -> Result<f64> {
        if mask == 0 {
            return Err(Error::EmptyMask);
        }
        if mask >> self.n != 0 {
            return Err(Error::MaskOutOfRange { mask, n: self.n });
        }
        let mut e = 0.0;
        for (z, &p) in self.probs.iter().enumerate() {
            if (z as u64 & mask).count_ones() % 2 == 0 {
                e += p;
            } else {
                e -= p;
            }
        }
        Ok(e)
    }

    /// Probability that the masked bits equal `values`.
    pub fn marginal_probability(&self, mask: u64, values: u64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(z, _)| z as u64 & mask == values)
            .map(|(_, &p)| p)
            .sum()
    }
}

/// Run an IQP circuit under the default qubit cap.
pub fn run_iqp(c: &IQPCircuit) -> Result<OutcomeDistribution> {
    run_iqp_with_cap(c, DEFAULT_QUBIT_CAP)
}

/// Run an IQP circuit with an explicit cap on the register width.
///
/// The unitary's recorded global phase is skipped: it cannot move any
/// outcome probability, so correlators are invariant under it exactly.
pub fn run_iqp_with_cap(c: &IQPCircuit, cap: usize) -> Result<OutcomeDistribution> {
    let n = c.n();
    if n > cap {
        return Err(Error::QubitCapExceeded { n, cap });
    }
    let size = 1usize << n;
    let mut phase = vec![0.0f64; size];
    for t in c.unitary().terms() {
        phase[t.support() as usize] += t.angle().radians();
    }
    // subset-sum sweep: phase[y] = Σ_{terms t ⊆ y} θ_t
    for bit in 0..n {
        let b = 1usize << bit;
        for y in 0..size {
            if y & b != 0 {
                phase[y] += phase[y ^ b];
            }
        }
    }
    let mut amps: Vec<Complex64> = phase.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    fwht(&mut amps)?;
    let scale = 1.0 / size as f64;
    let k = c.measured().count_ones() as usize;
    let mut probs = vec![0.0f64; 1 << k];
    for (z, a) in amps.iter().enumerate() {
        probs[compress_bits(z as u64, c.measured()) as usize] += (a * scale).norm_sqr();
    }
    OutcomeDistribution::new(k, probs, 1.0)
}

/// The parity mask `1_{n,k}`-style subset whose outcome parity defines the
/// reported bit of a Bell test. Never empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityMask {
    bits: u64,
}

impl ParityMask {
    pub fn new(bits: u64) -> Result<ParityMask> {
        if bits == 0 {
            return Err(Error::EmptyMask);
        }
        Ok(ParityMask { bits })
    }

    pub fn from_indices(qubits: &[usize]) -> Result<ParityMask> {
        Self::new(crate::phasepoly::mask_of(qubits))
    }

    /// Parity over all `n` outcomes (the full-correlation case).
    pub fn full(n: usize) -> ParityMask {
        ParityMask { bits: (1u64 << n) - 1 }
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_full(self, n: usize) -> bool {
        self.bits == (1u64 << n) - 1
    }

    /// Qubit indices in the mask, ascending.
    pub fn indices(self) -> Vec<usize> {
        (0..64).filter(|q| self.bits >> q & 1 == 1).collect()
    }
}

/// Correlation function `E(x) = Pr(z = 0|x) − Pr(z = 1|x)` where `z` is the
/// masked outcome parity of the Bell test run at settings `x`.
pub fn correlator(test: &IQPBellTest, x: u64, mask: ParityMask) -> Result<f64> {
    if mask.bits() >> test.n() != 0 {
        return Err(Error::MaskOutOfRange { mask: mask.bits(), n: test.n() });
    }
    let circuit = IQPCircuit::measure_all(test.realize(x)?);
    run_iqp(&circuit)?.parity_expectation(mask.bits())
}

/// The table of correlation values over all 2^n setting strings, indexed by
/// the integer value of `x` ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTable {
    n: usize,
    values: Vec<f64>,
}

impl CorrelatorTable {
    pub fn new(values: Vec<f64>) -> Result<CorrelatorTable> {
        let len = values.len();
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len });
        }
        for &v in &values {
            if v.abs() > 1.0 + 1e-10 {
                return Err(Error::Unsupported(format!("correlator value {v} outside [-1, 1]")));
            }
        }
        Ok(CorrelatorTable { n: len.trailing_zeros() as usize, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u64) -> f64 {
        self.values[x as usize]
    }
}

/// `correlator` across all 2^n settings, in ascending-`x` order.
pub fn correlator_table(test: &IQPBellTest, mask: ParityMask) -> Result<CorrelatorTable> {
    let mut values = Vec::with_capacity(1 << test.n());
    for x in 0..1u64 << test.n() {
        values.push(correlator(test, x, mask)?);
    }
    CorrelatorTable::new(values)
}

/// A reproducible sample from an outcome distribution.
#[derive(Clone, Debug)]
pub struct SampleStream {
    /// Identifier of the sampling algorithm, recorded in output metadata.
    pub algorithm: &'static str,
    pub seed: u64,
    pub n: usize,
    pub outcomes: Vec<u64>,
}

/// Draw `count` i.i.d. outcomes by inverse-CDF sampling with a ChaCha12
/// stream; identical seeds give identical streams.
pub fn sample(d: &OutcomeDistribution, seed: u64, count: usize) -> SampleStream {
    let mut cdf = Vec::with_capacity(d.probs.len());
    let mut acc = 0.0;
    for &p in &d.probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let outcomes = (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let idx = cdf.partition_point(|&c| c <= u).min(d.probs.len() - 1);
            idx as u64
        })
        .collect();
    SampleStream { algorithm: "inverse-cdf/chacha12", seed, n: d.n, outcomes }
}

/// Render an outcome as a bit string with qubit 0 leftmost.
pub fn bitstring(z: u64, n: usize) -> String {
    (0..n).map(|q| if z >> q & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn fwht_examples() {
        let mut delta = [1.0, 0.0, 0.0, 0.0];
        fwht(&mut delta).unwrap();
        assert_eq!(delta, [1.0, 1.0, 1.0, 1.0]);

        let mut constant = [1.0, 1.0, 1.0, 1.0];
        fwht(&mut constant).unwrap();
        assert_eq!(constant, [4.0, 0.0, 0.0, 0.0]);

        let mut bad = [1.0, 2.0, 3.0];
        assert!(matches!(fwht(&mut bad), Err(Error::NotPowerOfTwo { len: 3 })));
    }

    #[test]
    fn plus_state_measures_zero() {
        let c = IQPCircuit::measure_all(DiagonalUnitary::identity(3));
        let d = run_iqp(&c).unwrap();
        assert_abs_diff_eq!(d.probability(0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn z_gate_flips_to_minus() {
        let u = DiagonalUnitary::from_terms(1, [(1, Angle::PI)]).unwrap();
        let d = run_iqp(&IQPCircuit::measure_all(u)).unwrap();
        assert_abs_diff_eq!(d.probability(1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn marginalization_compacts_measured_bits() {
        // CZ on {0,1}, measure only qubit 1: uniform marginal
        let u = DiagonalUnitary::from_terms(2, [(0b11, Angle::PI)]).unwrap();
        let c = IQPCircuit::with_measured(u, 0b10).unwrap();
        let d = run_iqp(&c).unwrap();
        assert_eq!(d.n(), 1);
        assert_abs_diff_eq!(d.probability(0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probability(1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let c = IQPCircuit::measure_all(DiagonalUnitary::identity(21));
        assert!(matches!(run_iqp(&c), Err(Error::QubitCapExceeded { n: 21, cap: 20 })));
        assert!(run_iqp_with_cap(&c, 21).is_ok());
    }

    #[test]
    fn postselect_uniform_two_bits() {
        let d = OutcomeDistribution::new(2, vec![0.25; 4], 1.0).unwrap();
        let cond = d.postselect(0b01, 0b01).unwrap();
        assert_abs_diff_eq!(cond.success_probability(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cond.probability(0b01), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cond.probability(0b11), 0.5, epsilon = 1e-12);
        assert_eq!(cond.probability(0b00), 0.0);
        // conditioning on an event of probability 1 changes nothing
        let full = d.postselect(0b01, 0b01).unwrap().postselect(0b01, 0b01).unwrap();
        assert_abs_diff_eq!(full.success_probability(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn postselect_error_paths() {
        let d = OutcomeDistribution::new(1, vec![1.0, 0.0], 1.0).unwrap();
        assert!(matches!(d.postselect(0, 0), Err(Error::EmptyMask)));
        assert!(matches!(d.postselect(0b10, 0), Err(Error::MaskOutOfRange { .. })));
        assert!(matches!(d.postselect(0b1, 0b1), Err(Error::ImpossibleEvent { .. })));
        let d2 = OutcomeDistribution::new(2, vec![0.25; 4], 1.0).unwrap();
        assert!(matches!(d2.postselect(0b01, 0b10), Err(Error::ConditionOutsideMask { .. })));
    }

    #[test]
    fn parity_expectation_needs_mask() {
        let d = OutcomeDistribution::new(1, vec![1.0, 0.0], 1.0).unwrap();
        assert!(matches!(d.parity_expectation(0), Err(Error::EmptyMask)));
        assert_abs_diff_eq!(d.parity_expectation(1).unwrap(), 1.0);
    }

    #[test]
    fn sample_is_deterministic_and_respects_support() {
        let d = OutcomeDistribution::new(2, vec![0.0, 1.0, 0.0, 0.0], 1.0).unwrap();
        let s = sample(&d, 7, 100);
        assert!(s.outcomes.iter().all(|&z| z == 1));

        let d = OutcomeDistribution::new(2, vec![0.25; 4], 1.0).unwrap();
        let a = sample(&d, 42, 1000);
        let b = sample(&d, 42, 1000);
        assert_eq!(a.outcomes, b.outcomes);
        let c = sample(&d, 43, 1000);
        assert_ne!(a.outcomes, c.outcomes);
    }

    #[test]
    fn bitstring_puts_qubit_zero_first() {
        assert_eq!(bitstring(0b011, 4), "1100");
    }

    #[test]
    fn project_x_on_plus_state() {
        let s = StateVector::plus_state(2);
        let (rest, p) = s.project_x(0, false).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        assert_eq!(rest.n(), 1);
        // projecting onto the orthogonal outcome is impossible
        assert!(matches!(s.project_x(1, true), Err(Error::ImpossibleEvent { .. })));
    }

    proptest! {
        #[test]
        fn fwht_involution(seed in 0u64..200, exp in 0u32..8) {
            use rand::SeedableRng;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let len = 1usize << exp;
            let orig: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut v = orig.clone();
            fwht(&mut v).unwrap();
            fwht(&mut v).unwrap();
            for (a, b) in v.iter().zip(&orig) {
                prop_assert!((a - b * len as f64).abs() < 1e-9);
            }
        }

        #[test]
        fn postselect_preserves_normalization(seed in 0u64..200) {
            use rand::SeedableRng;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n = rng.gen_range(1usize..5);
            let raw: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let d = OutcomeDistribution::new(n, raw.iter().map(|p| p / total).collect(), 1.0).unwrap();
            let mask = rng.gen_range(1u64..(1 << n));
            let values = rng.gen_range(0..(1u64 << n)) & mask;
            if let Ok(cond) = d.postselect(mask, values) {
                let sum: f64 = cond.probabilities().iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-10);
                prop_assert!(cond.success_probability() <= 1.0 + 1e-12);
            }
        }
    }
}
