//! Randomizations of Sobol' nets.

use rand::Rng;

use super::{PointSet, SamplerKind, SamplerSpec, SobolNet};
use crate::error::Result;
use crate::seed::{self, mix64};

const STREAM_MATRIX: u64 = 0x4c4d_5300;
const STREAM_NUS: u64 = 0x4e55_5300;

/// Parity of the set bits.
#[inline]
fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

/// Left matrix scramble followed by a random digital shift.
///
/// For each dimension a random nonsingular lower-triangular binary matrix `L`
/// (unit diagonal, uniform bits below it) multiplies the generating matrix,
/// and the digits of every point are then XOR-ed with a uniform random shift.
pub fn randomize_lms(net: &SobolNet, seed: u64) -> Result<PointSet> {
    let s = net.dim();
    let bd = net.bit_depth();
    let digit_bit = |d: u32| 1u32 << (bd - 1 - d);
    let full = if bd == 32 { u32::MAX } else { (1u32 << bd) - 1 };

    let mut scrambled = Vec::with_capacity(s);
    let mut shifts = Vec::with_capacity(s);
    for j in 0..s {
        let mut rng = seed::rng(seed::derive_path(seed, &[STREAM_MATRIX, j as u64]));
        // Row d of L: uniform bits over digits 0..d, digit d itself set.
        let rows: Vec<u32> = (0..bd)
            .map(|d| {
                let above = !(digit_bit(d) - 1) & full;
                (rng.random::<u32>() & above & !digit_bit(d)) | digit_bit(d)
            })
            .collect();
        let cols = net
            .columns(j)
            .iter()
            .map(|&c| {
                rows.iter()
                    .enumerate()
                    .fold(0u32, |acc, (d, &row)| acc | (parity(row & c) * digit_bit(d as u32)))
            })
            .collect();
        scrambled.push(cols);
        shifts.push(rng.random::<u32>() & full);
    }

    let scale = 0.5f64.powi(bd as i32);
    let mut digits = net.digits_with(&scrambled);
    for row in digits.chunks_exact_mut(s) {
        for (d, shift) in row.iter_mut().zip(&shifts) {
            *d ^= shift;
        }
    }
    let points = digits.into_iter().map(|d| d as f64 * scale).collect();
    Ok(PointSet::from_parts(
        points,
        net.n(),
        SamplerSpec::new(SamplerKind::SobolLms, s, seed).with_bit_depth(bd),
        None,
    ))
}

/// Random bit attached to node `node` of the binary digit tree under `key`.
#[inline]
fn node_bit(key: u64, node: u64) -> u32 {
    (mix64(key ^ node.wrapping_mul(0xD6E8_FEB8_6659_FD93)) >> 63) as u32
}

/// Owen's nested uniform scramble of one coordinate's digits.
///
/// Digit `d` is flipped by a random bit owned by the tree node reached through
/// the original digits `0..d`, so every node carries an independent uniform
/// permutation of `{0, 1}`.
#[inline]
fn nested_scramble(key: u64, x: u32, bd: u32) -> u32 {
    let mut out = 0u32;
    for d in 0..bd {
        let prefix = if d == 0 { 0 } else { (x >> (bd - d)) as u64 };
        let node = (1u64 << d) | prefix;
        out |= (((x >> (bd - 1 - d)) & 1) ^ node_bit(key, node)) << (bd - 1 - d);
    }
    out
}

/// Nested uniform scramble to `bit_depth` digits; digits past that depth are
/// fresh uniform bits, keyed by the full-depth tree node.
pub fn randomize_nus(net: &SobolNet, seed: u64) -> Result<PointSet> {
    let s = net.dim();
    let bd = net.bit_depth();
    let tail_bits = 53 - bd;
    let scale = 0.5f64.powi(53);
    let keys: Vec<u64> = (0..s)
        .map(|j| seed::derive_path(seed, &[STREAM_NUS, j as u64]))
        .collect();

    let digits = net.digits();
    let mut points = Vec::with_capacity(digits.len());
    for row in digits.chunks_exact(s) {
        for (&x, &key) in row.iter().zip(&keys) {
            let y = nested_scramble(key, x, bd) as u64;
            let leaf = (1u64 << bd) | x as u64;
            let tail = mix64(mix64(key) ^ leaf) >> (64 - tail_bits);
            points.push(((y << tail_bits) | tail) as f64 * scale);
        }
    }
    Ok(PointSet::from_parts(
        points,
        net.n(),
        SamplerSpec::new(SamplerKind::SobolNus, s, seed).with_bit_depth(bd),
        None,
    ))
}
