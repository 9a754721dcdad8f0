//! Owen-scrambled Sobol points and the standard normals derived from them.

mod direction_numbers;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::special::norm_quantile;

pub use direction_numbers::MAX_DIMS;
use direction_numbers::SOBOL_TABLE;

const BITS: usize = 32;

/// Direction numbers `v_j = m_j · 2^(32−j)` for one Sobol coordinate.
fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = 1 << (BITS - 1 - j);
        }
        return v;
    }
    let (poly, m) = SOBOL_TABLE[dim];
    let s = (32 - poly.leading_zeros() - 1) as usize;
    for j in 0..s.min(BITS) {
        v[j] = m[j] << (BITS - 1 - j);
    }
    for j in s..BITS {
        let mut x = v[j - s] ^ (v[j - s] >> s);
        for t in 1..s {
            if (poly >> (s - t)) & 1 == 1 {
                x ^= v[j - t];
            }
        }
        v[j] = x;
    }
    v
}

/// Unscrambled 32-bit Sobol coordinate `dim` for indices `0..n` in Gray-code order.
pub fn sobol_coordinate(dim: usize, n: usize) -> Result<Vec<u32>> {
    if dim >= MAX_DIMS {
        return Err(Error::InvalidArgument(format!(
            "Sobol dimension {dim} exceeds the supported {MAX_DIMS}"
        )));
    }
    let v = directions(dim);
    Ok((0..n as u64)
        .map(|i| {
            let mut x = 0u32;
            let mut bits = i ^ (i >> 1);
            let mut j = 0;
            while bits != 0 {
                if bits & 1 == 1 {
                    x ^= v[j];
                }
                bits >>= 1;
                j += 1;
            }
            x
        })
        .collect())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit stream key from a root seed and labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// Laine–Karras style hash: a nested uniform scramble of reversed bits.
fn lk_hash(mut x: u32, seed: u32) -> u32 {
    x ^= x.wrapping_mul(0x3d20_adea);
    x = x.wrapping_add(seed);
    x = x.wrapping_mul((seed >> 16) | 1);
    x ^= x.wrapping_mul(0x0552_6c56);
    x ^= x.wrapping_mul(0x53a2_2864);
    x
}

fn owen_scramble(x: u32, seed: u32) -> u32 {
    lk_hash(x.reverse_bits(), seed).reverse_bits()
}

/// Scrambled coordinate `dim` of `n` Sobol points in the open unit interval.
pub fn scrambled_uniforms(dim: usize, n: usize, seed: u64, replicate: u64) -> Result<Vec<f64>> {
    let key = derive_seed(seed, &[replicate, dim as u64]) as u32;
    let raw = sobol_coordinate(dim, n)?;
    Ok(raw
        .into_iter()
        .map(|x| (owen_scramble(x, key) as f64 + 0.5) / 4_294_967_296.0)
        .collect())
}

type NormalKey = (u64, u64, usize, usize);

fn normal_cache() -> &'static Mutex<HashMap<NormalKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<NormalKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Entries kept before the memo is flushed.
const CACHE_LIMIT: usize = 512;

/// `Φ⁻¹` of [`scrambled_uniforms`], memoised per `(seed, replicate, dim, n)`.
pub fn scrambled_normals(dim: usize, n: usize, seed: u64, replicate: u64) -> Result<Arc<Vec<f64>>> {
    let key = (seed, replicate, dim, n);
    if let Some(hit) = normal_cache().lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let z: Vec<f64> = scrambled_uniforms(dim, n, seed, replicate)?
        .into_iter()
        .map(norm_quantile)
        .collect();
    let z = Arc::new(z);
    let mut cache = normal_cache().lock().expect("cache lock");
    if cache.len() >= CACHE_LIMIT {
        cache.clear();
    }
    cache.insert(key, Arc::clone(&z));
    Ok(z)
}
