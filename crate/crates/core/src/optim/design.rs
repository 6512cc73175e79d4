use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Bounds;
use crate::error::{invalid, Result};

/// Largest dimension supported by the embedded direction numbers.
pub const SOBOL_MAX_DIM: usize = 32;

const BITS: u32 = 32;

// Joe & Kuo (new-joe-kuo-6.21201) primitive polynomials, encoded with the
// leading and trailing bits, followed by the initial direction integers.
const DIRECTIONS: [(u32, &[u32]); SOBOL_MAX_DIM] = [
    (1, &[1]),
    (3, &[1]),
    (7, &[1, 3]),
    (11, &[1, 3, 1]),
    (13, &[1, 1, 1]),
    (19, &[1, 1, 3, 3]),
    (25, &[1, 3, 5, 13]),
    (37, &[1, 1, 5, 5, 17]),
    (41, &[1, 1, 5, 5, 5]),
    (47, &[1, 1, 7, 11, 19]),
    (55, &[1, 1, 5, 1, 1]),
    (59, &[1, 1, 1, 3, 11]),
    (61, &[1, 3, 5, 5, 31]),
    (67, &[1, 3, 3, 9, 7, 49]),
    (91, &[1, 1, 1, 15, 21, 21]),
    (97, &[1, 3, 1, 13, 27, 49]),
    (103, &[1, 1, 1, 15, 7, 5]),
    (109, &[1, 3, 1, 15, 13, 25]),
    (115, &[1, 1, 5, 5, 19, 61]),
    (131, &[1, 3, 7, 11, 23, 15, 103]),
    (137, &[1, 3, 7, 13, 13, 15, 69]),
    (143, &[1, 1, 3, 13, 7, 35, 63]),
    (145, &[1, 3, 5, 9, 1, 25, 53]),
    (157, &[1, 3, 1, 13, 9, 35, 107]),
    (167, &[1, 3, 1, 5, 27, 61, 31]),
    (171, &[1, 1, 5, 11, 19, 41, 61]),
    (185, &[1, 3, 5, 3, 3, 13, 69]),
    (191, &[1, 1, 7, 13, 1, 19, 1]),
    (193, &[1, 3, 7, 5, 13, 19, 59]),
    (203, &[1, 1, 3, 9, 25, 29, 41]),
    (211, &[1, 3, 5, 13, 23, 1, 55]),
    (213, &[1, 3, 7, 3, 13, 59, 17]),
];

fn direction_vectors(dim: usize) -> [u32; BITS as usize] {
    let mut v = [0u32; BITS as usize];
    if dim == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1 << (BITS as usize - 1 - i);
        }
        return v;
    }
    let (poly, init) = DIRECTIONS[dim];
    let degree = (32 - poly.leading_zeros() - 1) as usize;
    let mut m = [0u32; BITS as usize];
    m[..degree].copy_from_slice(&init[..degree]);
    for i in degree..BITS as usize {
        let mut next = m[i - degree] ^ (m[i - degree] << degree);
        for k in 1..degree {
            if (poly >> (degree - k)) & 1 == 1 {
                next ^= m[i - k] << k;
            }
        }
        m[i] = next;
    }
    for i in 0..BITS as usize {
        v[i] = m[i] << (BITS as usize - 1 - i);
    }
    v
}

fn sobol_raw(dim: usize, n: usize, shifts: Option<&[u32]>) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || dim > SOBOL_MAX_DIM {
        return invalid(format!("sobol dimension must be in 1..={SOBOL_MAX_DIM}, got {dim}"));
    }
    if n == 0 {
        return invalid("sobol sample size must be positive");
    }
    if n as u64 >= 1u64 << BITS {
        return invalid("sobol sample size exceeds 2^32");
    }
    let dirs: Vec<_> = (0..dim).map(direction_vectors).collect();
    let mut state = vec![0u32; dim];
    let scale = 1.0 / (1u64 << BITS) as f64;
    let mut out = Vec::with_capacity(n);
    // Index 0 is the origin and is skipped.
    for idx in 0..n {
        let c = (!(idx as u32)).trailing_zeros() as usize;
        for (s, dir) in state.iter_mut().zip(&dirs) {
            *s ^= dir[c];
        }
        let point = state
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let bits = shifts.map_or(*s, |sh| *s ^ sh[j]);
                bits as f64 * scale
            })
            .collect();
        out.push(point);
    }
    Ok(out)
}

/// First `n` unscrambled Sobol points in `[0, 1)^dim`, origin skipped.
pub fn sobol_unscrambled(dim: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    sobol_raw(dim, n, None)
}

/// Sobol points in `[0, 1)^dim` with a random digital shift drawn from `seed`.
pub fn sobol_sample(dim: usize, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<u32> = (0..dim).map(|_| rng.random()).collect();
    sobol_raw(dim, n, Some(&shifts))
}

/// Latin hypercube design with one point per stratum along every axis.
pub fn lhs_sample(bounds: &Bounds, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return invalid("latin hypercube size must be positive");
    }
    let d = bounds.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(&mut rng);
        for (p, s) in points.iter_mut().zip(&strata) {
            let u = (*s as f64 + rng.random::<f64>()) / n as f64;
            p[j] = bounds.lower()[j] + u * bounds.width(j);
        }
    }
    Ok(points)
}
