//! Gray-coded M-PSK modulation, minimum-distance demodulation and bit-error
//! counting.
//!
//! Constellation point `k` sits at phase `2*pi*k/M` (point 0 on the positive
//! real axis) and carries the Gray label `k ^ (k >> 1)`, most significant bit
//! first.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::channel::ComplexSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PskOrder {
    Bpsk,
    Qpsk,
    Psk8,
    Psk16,
}

impl PskOrder {
    pub const ALL: [PskOrder; 4] = [PskOrder::Bpsk, PskOrder::Qpsk, PskOrder::Psk8, PskOrder::Psk16];

    pub fn from_order(m: u32) -> Result<Self> {
        match m {
            2 => Ok(Self::Bpsk),
            4 => Ok(Self::Qpsk),
            8 => Ok(Self::Psk8),
            16 => Ok(Self::Psk16),
            _ => Err(Error::Parameter(format!("unsupported PSK order {m}"))),
        }
    }

    /// Constellation size `M`.
    pub fn order(self) -> u32 {
        1 << self.bits_per_symbol()
    }

    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Self::Bpsk => 1,
            Self::Qpsk => 2,
            Self::Psk8 => 3,
            Self::Psk16 => 4,
        }
    }

    /// Unit-energy point carrying the Gray label `label`.
    #[inline]
    pub fn point(self, label: u32) -> ComplexSample {
        let k = gray_decode(label & (self.order() - 1));
        phase_point(self.order(), k)
    }

    /// Gray label of the constellation point nearest to `z`.
    ///
    /// Exact ties between neighbouring points go to the smaller phase index.
    #[inline]
    pub fn decide(self, z: ComplexSample) -> u32 {
        let m = self.order();
        let sector = 2.0 * PI / m as f64;
        let t = z.im.atan2(z.re).rem_euclid(2.0 * PI) / sector;
        let mut k = (t - 0.5).ceil() as i64;
        if k >= m as i64 {
            k = 0;
        }
        if k == m as i64 - 1 && t == m as f64 - 0.5 {
            // boundary between the last point and point 0
            k = 0;
        }
        gray_encode(k as u32)
    }
}

impl fmt::Display for PskOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bpsk => "bpsk",
            Self::Qpsk => "qpsk",
            Self::Psk8 => "8psk",
            Self::Psk16 => "16psk",
        })
    }
}

impl FromStr for PskOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" | "2psk" | "2" => Ok(Self::Bpsk),
            "qpsk" | "4psk" | "4" => Ok(Self::Qpsk),
            "8psk" | "8" => Ok(Self::Psk8),
            "16psk" | "16" => Ok(Self::Psk16),
            other => Err(Error::Parameter(format!("unknown modulation '{other}'"))),
        }
    }
}

fn phase_point(m: u32, k: u32) -> ComplexSample {
    match (m, k) {
        // exact values on the axes
        (_, 0) => ComplexSample::new(1.0, 0.0),
        (2, 1) => ComplexSample::new(-1.0, 0.0),
        _ => ComplexSample::from_polar(1.0, 2.0 * PI * k as f64 / m as f64),
    }
}

pub fn gray_encode(k: u32) -> u32 {
    k ^ (k >> 1)
}

pub fn gray_decode(mut g: u32) -> u32 {
    let mut k = g;
    while g > 1 {
        g >>= 1;
        k ^= g;
    }
    k
}

/// A sequence of information bits, one `0`/`1` per entry.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Parameter(format!("bit {pos} is {} (expected 0 or 1)", bits[pos])));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<&str> for BitBlock {
    type Error = Error;

    fn try_from(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parameter(format!("invalid bit character '{c}'"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitBlock)
    }
}

pub fn modulate(bits: &BitBlock, order: PskOrder) -> Result<Vec<ComplexSample>> {
    let k = order.bits_per_symbol() as usize;
    if !bits.len().is_multiple_of(k) {
        return Err(Error::Framing(format!(
            "{} bits cannot be split into {k}-bit {order} symbols",
            bits.len()
        )));
    }
    Ok(bits
        .bits()
        .chunks_exact(k)
        .map(|chunk| order.point(chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32)))
        .collect())
}

pub fn demodulate(samples: &[ComplexSample], order: PskOrder) -> BitBlock {
    let k = order.bits_per_symbol();
    let mut bits = Vec::with_capacity(samples.len() * k as usize);
    for &z in samples {
        let label = order.decide(z);
        bits.extend((0..k).rev().map(|i| ((label >> i) & 1) as u8));
    }
    BitBlock(bits)
}

/// Hamming distance between two equally long blocks.
pub fn count_bit_errors(tx: &BitBlock, rx: &BitBlock) -> Result<usize> {
    if tx.len() != rx.len() {
        return Err(Error::Framing(format!("length mismatch: {} vs {} bits", tx.len(), rx.len())));
    }
    Ok(tx.bits().iter().zip(rx.bits()).filter(|(a, b)| a != b).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, stream};
    use rand::Rng;

    fn random_bits(n: usize, seed: u64) -> BitBlock {
        let mut rng = stream(seed, &[]);
        BitBlock::new((0..n).map(|_| rng.random_range(0..2u8)).collect()).unwrap()
    }

    #[test]
    fn bpsk_convention() {
        let s = modulate(&BitBlock::try_from("01").unwrap(), PskOrder::Bpsk).unwrap();
        assert_eq!(s[0], ComplexSample::new(1.0, 0.0));
        assert_eq!(s[1], ComplexSample::new(-1.0, 0.0));
    }

    #[test]
    fn qpsk_gray_neighbours() {
        let pts: Vec<_> = ["00", "01", "10", "11"]
            .iter()
            .map(|b| modulate(&BitBlock::try_from(*b).unwrap(), PskOrder::Qpsk).unwrap()[0])
            .collect();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!((pts[i] - pts[j]).norm() > 1e-9);
            }
        }
        // adjacency in phase order
        for k in 0..4u32 {
            let diff = gray_encode(k) ^ gray_encode((k + 1) % 4);
            assert_eq!(diff.count_ones(), 1);
        }
    }

    #[test]
    fn gray_adjacency_every_order() {
        for order in PskOrder::ALL {
            let m = order.order();
            for k in 0..m {
                let a = order.decide(phase_point(m, k));
                let b = order.decide(phase_point(m, (k + 1) % m));
                assert_eq!((a ^ b).count_ones(), 1, "{order} k={k}");
            }
        }
    }

    #[test]
    fn unit_modulus_and_unit_mean_energy() {
        for order in PskOrder::ALL {
            let m = order.order();
            let mut energy = 0.0;
            for label in 0..m {
                let p = order.point(label);
                assert!((p.norm() - 1.0).abs() < 1e-12);
                energy += p.norm_sqr();
            }
            assert!((energy / m as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn framing_error_on_ragged_block() {
        let bits = BitBlock::try_from("10110").unwrap();
        assert!(matches!(modulate(&bits, PskOrder::Qpsk), Err(Error::Framing(_))));
        assert!(BitBlock::new(vec![0, 2]).is_err());
    }

    #[test]
    fn noiseless_round_trip() {
        for order in PskOrder::ALL {
            let bits = random_bits(10_000 - 10_000 % order.bits_per_symbol() as usize, 99);
            let rx = demodulate(&modulate(&bits, order).unwrap(), order);
            assert_eq!(rx, bits, "{order}");
        }
    }

    #[test]
    fn bpsk_decision_by_real_part() {
        let rx = demodulate(&[ComplexSample::new(0.3, -0.9)], PskOrder::Bpsk);
        assert_eq!(rx.bits(), &[0]);
    }

    #[test]
    fn ties_go_to_smaller_index() {
        // BPSK boundary on the imaginary axis
        assert_eq!(PskOrder::Bpsk.decide(ComplexSample::new(0.0, 1.0)), 0);
        assert_eq!(PskOrder::Bpsk.decide(ComplexSample::new(0.0, -1.0)), 0);
        assert_eq!(PskOrder::Bpsk.decide(ComplexSample::new(0.0, 0.0)), 0);
        // QPSK boundary between points 0 and 1
        let z = ComplexSample::from_polar(1.0, PI / 4.0);
        assert_eq!(PskOrder::Qpsk.decide(z), gray_encode(0));
    }

    #[test]
    fn hamming_counts() {
        let a = BitBlock::try_from("01101001").unwrap();
        assert_eq!(count_bit_errors(&a, &a).unwrap(), 0);
        let comp = BitBlock::new(a.bits().iter().map(|b| 1 - b).collect()).unwrap();
        assert_eq!(count_bit_errors(&a, &comp).unwrap(), 8);
        let tx = BitBlock::try_from("0110").unwrap();
        let rx = BitBlock::try_from("0011").unwrap();
        assert_eq!(count_bit_errors(&tx, &rx).unwrap(), 2);
        assert!(matches!(count_bit_errors(&tx, &a), Err(Error::Framing(_))));
    }

    fn awgn_ber(order: PskOrder, snr: f64, n_bits: usize, seed: u64) -> f64 {
        let k = order.bits_per_symbol() as usize;
        let bits = random_bits(n_bits - n_bits % k, seed);
        let mut rng = stream(seed, &[1]);
        let rx: Vec<_> = modulate(&bits, order)
            .unwrap()
            .into_iter()
            .map(|s| s + complex_gaussian(&mut rng, 1.0 / snr))
            .collect();
        count_bit_errors(&bits, &demodulate(&rx, order)).unwrap() as f64 / bits.len() as f64
    }

    #[test]
    fn bpsk_awgn_matches_q_function() {
        // Q(sqrt(2)) = 0.5 erfc(1)
        let expected = 0.5 * statrs::function::erf::erfc(1.0);
        let ber = awgn_ber(PskOrder::Bpsk, 1.0, 1_000_000, 5);
        assert!((ber - expected).abs() < 0.002, "ber {ber} vs {expected}");
    }

    #[test]
    fn awgn_ber_grows_with_order() {
        let bers: Vec<f64> = PskOrder::ALL.iter().map(|&o| awgn_ber(o, 10.0, 1_000_000, 8)).collect();
        for w in bers.windows(2) {
            assert!(w[0] <= w[1], "{bers:?}");
        }
    }
}
