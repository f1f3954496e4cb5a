//! Plain 2×2 density-matrix versions of the purification, Hamiltonian and
//! dephasing operations.
//!
//! Nothing here touches [`crate::quat`]: the quaternion maps are checked against
//! these, so they must not share a code path. Production scans never call this.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermitian 2×2 matrix `[[rho00, rho01], [conj(rho01), rho11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub rho00: f64,
    pub rho01: Complex64,
    pub rho11: f64,
}

type Mat2 = [[Complex64; 2]; 2];

impl DensityMatrix {
    pub fn new(rho00: f64, rho01: Complex64, rho11: f64) -> Self {
        Self {
            rho00,
            rho01,
            rho11,
        }
    }

    /// `|ψ⟩⟨ψ|` for `|ψ⟩ ∝ z|0⟩ + |1⟩`.
    pub fn pure(z: Complex64) -> Self {
        let n = 1.0 + z.norm_sqr();
        Self::new(z.norm_sqr() / n, z / n, 1.0 / n)
    }

    /// `|0⟩⟨0|`, the `|z| → ∞` end of the Bloch chart.
    pub fn ground_zero() -> Self {
        Self::new(1.0, Complex64::new(0.0, 0.0), 0.0)
    }

    pub fn maximally_mixed() -> Self {
        Self::new(0.5, Complex64::new(0.0, 0.0), 0.5)
    }

    pub fn rho10(&self) -> Complex64 {
        self.rho01.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11
    }

    pub fn det(&self) -> f64 {
        self.rho00 * self.rho11 - self.rho01.norm_sqr()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.rho00 * self.rho00 + self.rho11 * self.rho11 + 2.0 * self.rho01.norm_sqr()
    }

    /// Trace one, non-negative diagonal, non-negative determinant; all up to `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol
            && self.rho00 >= -tol
            && self.rho11 >= -tol
            && self.det() >= -tol
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_entry_dist(&self, other: &Self) -> f64 {
        (self.rho00 - other.rho00)
            .abs()
            .max((self.rho11 - other.rho11).abs())
            .max((self.rho01 - other.rho01).norm())
    }

    fn to_mat(self) -> Mat2 {
        [
            [Complex64::new(self.rho00, 0.0), self.rho01],
            [self.rho10(), Complex64::new(self.rho11, 0.0)],
        ]
    }

    fn from_mat(m: &Mat2) -> Self {
        Self::new(m[0][0].re, m[0][1], m[1][1].re)
    }
}

fn matmul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn dagger(x: &Mat2) -> Mat2 {
    [
        [x[0][0].conj(), x[1][0].conj()],
        [x[0][1].conj(), x[1][1].conj()],
    ]
}

/// The evolution operator `[[e^{ıα}cos x, e^{ıφ}sin x], [−e^{−ıφ}sin x, e^{−ıα}cos x]]`.
pub fn evolution_matrix(alpha: f64, phi: f64, x: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = x.sin_cos();
    [
        [
            Complex64::from_polar(c, alpha),
            Complex64::from_polar(s, phi),
        ],
        [
            -Complex64::from_polar(s, -phi),
            Complex64::from_polar(c, -alpha),
        ],
    ]
}

/// Purification: entrywise square of `ρ`, renormalised to unit trace.
pub fn s_matrix(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d0 = rho.rho00 * rho.rho00;
    let d1 = rho.rho11 * rho.rho11;
    let tr = d0 + d1;
    if tr == 0.0 {
        return Err(Error::DegenerateState("entrywise square has zero trace"));
    }
    Ok(DensityMatrix::new(
        d0 / tr,
        rho.rho01 * rho.rho01 / tr,
        d1 / tr,
    ))
}

/// `U ρ U†` with `U = evolution_matrix(alpha, phi, x)`.
pub fn u_conj(rho: &DensityMatrix, alpha: f64, phi: f64, x: f64) -> DensityMatrix {
    let u = evolution_matrix(alpha, phi, x);
    let out = matmul(&matmul(&u, &rho.to_mat()), &dagger(&u));
    DensityMatrix::from_mat(&out)
}

/// Pure dephasing: off-diagonal scaled by `1 − β`, populations untouched.
pub fn d_matrix(rho: &DensityMatrix, beta: f64) -> DensityMatrix {
    DensityMatrix::new(rho.rho00, rho.rho01 * (1.0 - beta), rho.rho11)
}
