//! Truncated GNS basis: the box `‖y‖_∞ ≤ M` sorted by `Δ_J` eigenvalue.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::clifford::SpacelikeReflection;
use crate::linalg::RMat;

/// Modes of the cutoff box in ascending `Δ_J` eigenvalue, ties broken lexicographically.
#[derive(Debug, Clone)]
pub struct ModeLattice {
    n: usize,
    cutoff: usize,
    /// Flat coordinates, `n` entries per mode, in sorted order.
    coords: Vec<i32>,
    /// `g^r(y, y)` per sorted position.
    norm_sq: Vec<f64>,
    /// `Δ_J` eigenvalue per sorted position.
    eigenvalues: Vec<f64>,
    /// Sorted position of each box index (mixed radix, first coordinate most significant).
    position: Vec<u32>,
    /// Number of leading modes inside the largest `g^r`-ball contained in the box.
    inscribed: usize,
    inscribed_radius: f64,
}

/// `√(1 + 4π² s)`.
pub fn delta_from_norm(norm_sq: f64) -> f64 {
    (1.0 + 4.0 * PI * PI * norm_sq).sqrt()
}

impl ModeLattice {
    pub fn new(reflection: &SpacelikeReflection, cutoff: usize) -> Self {
        let n = reflection.signature().n();
        let side = 2 * cutoff + 1;
        let count = side.pow(n as u32);
        let metric = reflection.riemannian_metric();
        let standard = metric == RMat::identity(n, n);

        let norm_of = |y: &[i32]| -> f64 {
            if standard {
                // integer arithmetic keeps ties exact
                y.iter().map(|&x| (x as i64) * (x as i64)).sum::<i64>() as f64
            } else {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += y[i] as f64 * metric[(i, j)] * y[j] as f64;
                    }
                }
                s
            }
        };

        let mut entries: Vec<(f64, Vec<i32>)> = (0..count)
            .into_par_iter()
            .map(|idx| {
                let y = box_coords(idx, n, cutoff);
                (norm_of(&y), y)
            })
            .collect();
        entries.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

        let mut coords = Vec::with_capacity(count * n);
        let mut norm_sq = Vec::with_capacity(count);
        let mut position = vec![0u32; count];
        for (pos, (s, y)) in entries.iter().enumerate() {
            position[box_index(y, cutoff)] = pos as u32;
            coords.extend_from_slice(y);
            norm_sq.push(*s);
        }
        let eigenvalues = norm_sq.iter().map(|&s| delta_from_norm(s)).collect();

        let inscribed_radius = inscribed_radius(&metric, cutoff);
        let bound = inscribed_radius * inscribed_radius;
        // tolerate roundoff on the ball boundary for the standard metric
        let slack = if standard { 1e-9 } else { 0.0 };
        let inscribed = norm_sq.partition_point(|&s| s <= bound + slack);

        Self {
            n,
            cutoff,
            coords,
            norm_sq,
            eigenvalues,
            position,
            inscribed,
            inscribed_radius,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.norm_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norm_sq.is_empty()
    }

    pub fn mode(&self, pos: usize) -> &[i32] {
        &self.coords[pos * self.n..(pos + 1) * self.n]
    }

    pub fn modes(&self) -> impl Iterator<Item = &[i32]> {
        self.coords.chunks_exact(self.n)
    }

    pub fn norm_sq(&self) -> &[f64] {
        &self.norm_sq
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Sorted position of `y`, or `None` outside the box.
    pub fn index_of(&self, y: &[i64]) -> Option<usize> {
        if y.len() != self.n || y.iter().any(|&x| x.unsigned_abs() as usize > self.cutoff) {
            return None;
        }
        let y32: Vec<i32> = y.iter().map(|&x| x as i32).collect();
        Some(self.position[box_index(&y32, self.cutoff)] as usize)
    }

    pub fn contains(&self, y: &[i64]) -> bool {
        self.index_of(y).is_some()
    }

    /// Number of leading sorted modes inside the inscribed `g^r`-ball.
    pub fn inscribed_count(&self) -> usize {
        self.inscribed
    }

    pub fn inscribed_radius(&self) -> f64 {
        self.inscribed_radius
    }
}

/// Largest `R` with `{g^r(y,y) ≤ R²} ⊆ [−M, M]^n`, i.e. `M / max_i √((G⁻¹)_ii)`.
fn inscribed_radius(metric: &RMat, cutoff: usize) -> f64 {
    let inv = metric.clone().try_inverse().expect("Riemannian metric is invertible");
    let worst = (0..metric.nrows()).map(|i| inv[(i, i)]).fold(0.0_f64, f64::max);
    cutoff as f64 / worst.sqrt()
}

fn box_coords(mut idx: usize, n: usize, cutoff: usize) -> Vec<i32> {
    let side = 2 * cutoff + 1;
    let mut y = vec![0i32; n];
    for slot in y.iter_mut().rev() {
        *slot = (idx % side) as i32 - cutoff as i32;
        idx /= side;
    }
    y
}

fn box_index(y: &[i32], cutoff: usize) -> usize {
    let side = 2 * cutoff + 1;
    y.iter().fold(0, |acc, &x| acc * side + (x + cutoff as i32) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{self, Signature};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn box_count_and_order() {
        let s = Signature::new(2, 1).unwrap();
        let l = ModeLattice::new(&s.standard_reflection(), 8);
        assert_eq!(l.len(), 289);
        assert_eq!(l.mode(0), &[0, 0]);
        assert_eq!(l.eigenvalues()[0], 1.0);
        assert!(l.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        // ties broken lexicographically
        assert_eq!(l.mode(1), &[-1, 0]);
        assert_eq!(l.mode(2), &[0, -1]);
    }

    #[test]
    fn index_round_trip() {
        let s = Signature::new(3, 1).unwrap();
        let l = ModeLattice::new(&s.standard_reflection(), 3);
        for pos in 0..l.len() {
            let y: Vec<i64> = l.mode(pos).iter().map(|&x| x as i64).collect();
            assert_eq!(l.index_of(&y), Some(pos));
        }
        assert_eq!(l.index_of(&[4, 0, 0]), None);
    }

    #[test]
    fn zero_cutoff_single_mode() {
        let s = Signature::new(2, 1).unwrap();
        let l = ModeLattice::new(&s.standard_reflection(), 0);
        assert_eq!(l.len(), 1);
        assert_eq!(l.eigenvalues(), &[1.0]);
    }

    #[test]
    fn inscribed_ball_standard() {
        let s = Signature::new(2, 0).unwrap();
        let l = ModeLattice::new(&s.standard_reflection(), 10);
        assert_eq!(l.inscribed_radius(), 10.0);
        let expected = l.modes().filter(|y| y.iter().map(|&x| x * x).sum::<i32>() <= 100).count();
        assert_eq!(l.inscribed_count(), expected);
    }

    #[test]
    fn inscribed_ball_fits_in_box() {
        let s = Signature::new(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = clifford::random_spacelike_reflection(s, &mut rng, 0.8);
        let m = 6;
        let l = ModeLattice::new(&r, m);
        // brute force: every lattice point of the ball, in a larger box, lies inside the cutoff box
        let big = 4 * m as i64;
        let bound = l.inscribed_radius().powi(2);
        for a in -big..=big {
            for b in -big..=big {
                for c in -big..=big {
                    let y = [a as f64, b as f64, c as f64];
                    if r.riemannian_norm_sq(&y) <= bound {
                        assert!(l.contains(&[a, b, c]));
                    }
                }
            }
        }
    }
}
