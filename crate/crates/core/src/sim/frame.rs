//! 64-lane Pauli-frame simulation: each bit of a word is an independent shot.

use rand::Rng;

use super::cycle::{CycleCircuit, Instr, NoiseClass};
use super::NoiseModel;
use crate::arch::QubitId;
use crate::circuit::Gate;

pub const LANES: usize = 64;

/// Pauli frame of 64 shots plus their measurement flips.
#[derive(Clone, Debug)]
pub struct Frame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
    pub rec: Vec<u64>,
}

impl Frame {
    pub fn new(num_qubits: usize, num_measurements: usize) -> Self {
        Frame {
            x: vec![0; num_qubits],
            z: vec![0; num_qubits],
            rec: Vec::with_capacity(num_measurements),
        }
    }

    pub fn gate(&mut self, g: &Gate) {
        match *g {
            Gate::Reset(q) => {
                self.x[q] = 0;
                self.z[q] = 0;
            }
            Gate::H(q) => std::mem::swap(&mut self.x[q], &mut self.z[q]),
            Gate::Cx(c, t) => {
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            Gate::Measure(q) => self.rec.push(self.x[q]),
        }
    }

    /// Applies Pauli `code` (1 = X, 2 = Y, 3 = Z) on `q` in the lanes of `mask`.
    pub fn pauli(&mut self, q: QubitId, code: u8, mask: u64) {
        if code == 1 || code == 2 {
            self.x[q] ^= mask;
        }
        if code == 2 || code == 3 {
            self.z[q] ^= mask;
        }
    }

    /// Parity of the listed records.
    pub fn parity(&self, records: &[usize]) -> u64 {
        records.iter().fold(0, |acc, &r| acc ^ self.rec[r])
    }
}

/// Independent Bernoulli(p) bits for 64 lanes by geometric gap sampling.
pub fn bernoulli_mask<R: Rng>(rng: &mut R, p: f64, ln_q: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return u64::MAX;
    }
    let mut mask = 0u64;
    let mut pos: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let gap = ((1.0 - u).ln() / ln_q).floor();
        if gap >= (LANES as u64 - pos) as f64 {
            return mask;
        }
        pos += gap as u64;
        mask |= 1 << pos;
        pos += 1;
        if pos >= LANES as u64 {
            return mask;
        }
    }
}

struct Rates {
    p: [f64; 2],
    ln_q: [f64; 2],
}

impl Rates {
    fn new(noise: &NoiseModel) -> Self {
        let p = [noise.p_gate, noise.p_idle];
        Rates { p, ln_q: p.map(|v| (1.0 - v).ln()) }
    }

    fn sample<R: Rng>(&self, rng: &mut R, class: NoiseClass) -> u64 {
        let i = match class {
            NoiseClass::Gate => 0,
            NoiseClass::Idle => 1,
        };
        bernoulli_mask(rng, self.p[i], self.ln_q[i])
    }
}

/// Runs one batch of 64 noisy shots.
pub fn sample_batch<R: Rng>(c: &CycleCircuit, noise: &NoiseModel, rng: &mut R) -> Frame {
    let rates = Rates::new(noise);
    let mut f = Frame::new(c.num_qubits, c.num_measurements);
    for ins in &c.instrs {
        match *ins {
            Instr::Gate(ref g) => f.gate(g),
            Instr::XFlip(q) => {
                let m = rates.sample(rng, NoiseClass::Gate);
                f.x[q] ^= m;
            }
            Instr::Dep1(q, class) => {
                let mut m = rates.sample(rng, class);
                while m != 0 {
                    let lane = m.trailing_zeros();
                    m &= m - 1;
                    f.pauli(q, rng.random_range(1..=3u8), 1 << lane);
                }
            }
            Instr::Dep2(a, b) => {
                let mut m = rates.sample(rng, NoiseClass::Gate);
                while m != 0 {
                    let lane = m.trailing_zeros();
                    m &= m - 1;
                    let r: u8 = rng.random_range(1..16);
                    f.pauli(a, r & 3, 1 << lane);
                    f.pauli(b, r >> 2, 1 << lane);
                }
            }
        }
    }
    f
}

/// A single fault: up to two Paulis applied right at noise instruction
/// `instr`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Injection {
    pub instr: usize,
    pub paulis: [(QubitId, u8); 2],
}

/// Runs the noiseless circuit with lane `i` carrying `faults[i]`.
pub fn inject(c: &CycleCircuit, faults: &[Injection]) -> Frame {
    assert!(faults.len() <= LANES);
    let mut order: Vec<usize> = (0..faults.len()).collect();
    order.sort_by_key(|&i| faults[i].instr);
    let mut next = 0;
    let mut f = Frame::new(c.num_qubits, c.num_measurements);
    for (idx, ins) in c.instrs.iter().enumerate() {
        if let Instr::Gate(ref g) = *ins {
            f.gate(g);
        }
        while next < order.len() && faults[order[next]].instr == idx {
            let lane = order[next];
            for (q, code) in faults[lane].paulis {
                if code != 0 {
                    f.pauli(q, code, 1 << lane);
                }
            }
            next += 1;
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocate::AllocationMode;
    use crate::arch::Architecture;
    use crate::driver::synth;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bernoulli_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [0.01, 0.2, 0.5] {
            let n = 20_000;
            let ones: u32 = (0..n).map(|_| bernoulli_mask(&mut rng, p, (1.0 - p).ln()).count_ones()).sum();
            let rate = ones as f64 / (n * LANES) as f64;
            let sigma = (p * (1.0 - p) / (n * LANES) as f64).sqrt();
            assert!((rate - p).abs() < 5.0 * sigma, "p {p} rate {rate}");
        }
        assert_eq!(bernoulli_mask(&mut rng, 0.0, 0.0), 0);
        assert_eq!(bernoulli_mask(&mut rng, 1.0, f64::NEG_INFINITY), u64::MAX);
    }

    #[test]
    fn clifford_propagation() {
        let mut f = Frame::new(2, 2);
        f.pauli(0, 1, 0b01);
        f.pauli(1, 3, 0b10);
        f.gate(&Gate::Cx(0, 1));
        assert_eq!((f.x[1], f.z[0]), (0b01, 0b10));
        f.gate(&Gate::H(0));
        assert_eq!((f.x[0], f.z[0]), (0b10, 0b01));
        f.gate(&Gate::Measure(1));
        f.gate(&Gate::Reset(1));
        assert_eq!((f.rec[0], f.x[1]), (0b01, 0));
    }

    #[test]
    fn noiseless_batch_has_no_flips() {
        let s = synth(Architecture::Square, 3, AllocationMode::Pair3).unwrap();
        let c = s.cycle_circuit(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = sample_batch(&c, &NoiseModel::noiseless(), &mut rng);
        assert_eq!(f.rec.len(), c.num_measurements);
        assert!(c.model.detectors.iter().all(|d| f.parity(&d.records) == 0));
        assert_eq!(f.parity(&c.model.observable), 0);
    }

    #[test]
    fn injection_lanes_are_independent() {
        let s = synth(Architecture::Square, 3, AllocationMode::Pair3).unwrap();
        let c = s.cycle_circuit(2).unwrap();
        let q = s.layout.data_qubits()[4];
        let first = c.instrs.iter().position(|i| matches!(i, Instr::Dep1(p, NoiseClass::Idle) if *p == q)).unwrap();
        let faults = [
            Injection { instr: first, paulis: [(q, 1), (q, 0)] },
            Injection { instr: first, paulis: [(q, 3), (q, 0)] },
        ];
        let f = inject(&c, &faults);
        let z_dets: Vec<bool> = c.model.detectors.iter().map(|d| f.parity(&d.records) & 1 == 1).collect();
        let x_dets: Vec<bool> = c.model.detectors.iter().map(|d| f.parity(&d.records) & 2 == 2).collect();
        // An X on the centre data qubit trips only Z-type checks, and vice versa.
        for (k, d) in c.model.detectors.iter().enumerate() {
            if z_dets[k] {
                assert!(d.z_class);
            }
            if x_dets[k] {
                assert!(!d.z_class);
            }
        }
        assert!(z_dets.iter().any(|&b| b) && x_dets.iter().any(|&b| b));
    }
}
