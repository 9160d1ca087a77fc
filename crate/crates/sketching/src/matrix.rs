//! Reproducible dense Gaussian projection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A dense `r × n` random projection whose entries are i.i.d. centered
/// Gaussians with standard deviation `1/√r`, so squared lengths are
/// preserved in expectation.
///
/// Each column is a pure function of `(seed, column index)`: a counter-mixed
/// seed keys a per-column generator, and the `i`-th draw of that stream is
/// entry `(i, column)`. Any entry is therefore reproducible from the seed
/// alone; the values are nonetheless materialized column-major at
/// construction so that column access is a plain slice borrow.
#[derive(Debug, Clone)]
pub struct SketchMatrix {
    nrows: usize,
    ncols: usize,
    seed: u64,
    /// Column-major entries: column `j` occupies `data[j·nrows..][..nrows]`.
    data: Vec<f64>,
}

/// SplitMix64 finalizer; bijective, so distinct column keys stay distinct.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SketchMatrix {
    /// Draws the `nrows × ncols` matrix determined by `seed`.
    pub fn new(nrows: usize, ncols: usize, seed: u64) -> Self {
        assert!(nrows >= 1, "projection needs at least one row");
        let scale = 1.0 / (nrows as f64).sqrt();
        let mut data = Vec::with_capacity(nrows * ncols);
        for j in 0..ncols {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ (j as u64)));
            for _ in 0..nrows {
                let g: f64 = StandardNormal.sample(&mut rng);
                data.push(g * scale);
            }
        }
        SketchMatrix {
            nrows,
            ncols,
            seed,
            data,
        }
    }

    /// Number of projection rows `r`.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of input coordinates `n`.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// The seed the entries were drawn from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Column `j` as a slice of length `nrows`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Single entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nrows + i]
    }

    /// Dense product with a full vector.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.ncols, "apply: dimension mismatch");
        let mut out = vec![0.0; self.nrows];
        for (j, &zj) in z.iter().enumerate() {
            if zj != 0.0 {
                self.add_scaled(&mut out, j, zj);
            }
        }
        out
    }

    /// Product with a vector given as sparse `(index, value)` pairs.
    pub fn apply_indexed<I>(&self, entries: I) -> Vec<f64>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut out = vec![0.0; self.nrows];
        for (j, zj) in entries {
            if zj != 0.0 {
                self.add_scaled(&mut out, j, zj);
            }
        }
        out
    }

    /// Adds `c` times column `j` into `out`.
    pub fn add_scaled(&self, out: &mut [f64], j: usize, c: f64) {
        for (o, &p) in out.iter_mut().zip(self.column(j)) {
            *o += c * p;
        }
    }
}
