//! Compressed shift operators `P_M u(y) P_M` on the truncated GNS space.

use num_complex::Complex64;

use super::algebra::{Mode, Theta};
use super::lattice::ModeLattice;
use crate::linalg::CMat;

/// Sparse partial isometry: column `z` maps to `phase · e_target`, or to zero
/// when the shifted mode leaves the box. Acts as `u(y) ⊗ 1` on spinors.
#[derive(Debug, Clone)]
pub struct ShiftOperator {
    shift: Mode,
    /// Per sorted source position.
    images: Vec<Option<(usize, Complex64)>>,
}

impl ShiftOperator {
    /// `u(y) e_z = e^{iπθ(y, z)} e_{y+z}`, compressed to the box.
    pub fn new(lattice: &ModeLattice, theta: &Theta, y: &[i64]) -> Self {
        let images = lattice
            .modes()
            .map(|z| {
                let z: Mode = z.iter().map(|&x| x as i64).collect();
                let target: Mode = z.iter().zip(y).map(|(a, b)| a + b).collect();
                lattice.index_of(&target).map(|t| (t, theta.phase(y, &z)))
            })
            .collect();
        Self {
            shift: y.to_vec(),
            images,
        }
    }

    pub fn shift(&self) -> &[i64] {
        &self.shift
    }

    pub fn dim(&self) -> usize {
        self.images.len()
    }

    /// Target position and phase of source column `pos`.
    pub fn image(&self, pos: usize) -> Option<(usize, Complex64)> {
        self.images[pos]
    }

    /// Matrix element `⟨e_z, u(y) e_z⟩`; zero unless `y = 0`.
    pub fn diagonal(&self, pos: usize) -> Complex64 {
        match self.images[pos] {
            Some((t, phase)) if t == pos => phase,
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Apply to `ψ` stored as a `modes × spinor` matrix.
    pub fn apply(&self, psi: &CMat) -> CMat {
        assert_eq!(psi.nrows(), self.dim(), "state has the wrong number of modes");
        let mut out = CMat::zeros(psi.nrows(), psi.ncols());
        for (src, img) in self.images.iter().enumerate() {
            if let Some((t, phase)) = img {
                for c in 0..psi.ncols() {
                    out[(*t, c)] += phase * psi[(src, c)];
                }
            }
        }
        out
    }

    /// `self ∘ other` as a sparse operator.
    pub fn compose(&self, other: &Self) -> Self {
        let images = other
            .images
            .iter()
            .map(|img| {
                img.and_then(|(mid, p1)| self.images[mid].map(|(t, p2)| (t, p1 * p2)))
            })
            .collect();
        Self {
            shift: self.shift.iter().zip(&other.shift).map(|(a, b)| a + b).collect(),
            images,
        }
    }

    /// Positions whose image stays inside the box.
    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().enumerate().filter_map(|(i, x)| x.map(|_| i))
    }

    /// Number of basis vectors annihilated by the compression.
    pub fn boundary_defect(&self) -> usize {
        self.images.iter().filter(|x| x.is_none()).count()
    }

    /// Distance of `self` from the orthogonal projection onto the modes it
    /// keeps: the largest `|phase − 1|` over kept modes mapped to themselves,
    /// or `∞` if some kept mode is moved.
    pub fn projection_defect(&self) -> f64 {
        self.images
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.map(|(t, p)| if t == i { (p - 1.0).norm() } else { f64::INFINITY }))
            .fold(0.0, f64::max)
    }
}
