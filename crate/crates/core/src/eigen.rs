//! Hermitian eigensolvers for the Bloch problem.
//!
//! Two routes behind one contract:
//!
//! * a dense solver (LAPACK `zheev` via `ndarray-linalg`) for matrices up to
//!   a few thousand rows, used as the reference;
//! * a banded solver (`zhbtrd` band tridiagonalization + `dsterf` tridiagonal
//!   eigenvalues) that exploits the 7-diagonal structure of the plane-wave
//!   Hamiltonian. Eigenvalues only, which is all the band computations need.
//!
//! Both return every eigenvalue in ascending order. OpenBLAS is pinned to a
//! single thread on first use: parallelism lives at the k-point level, and
//! run-to-run determinism is part of the output contract.

use crate::error::{Error, Result};
use crate::scalar::Real;
use ndarray::Array2;
use ndarray_linalg::{EigValshInto, UPLO};
use num_complex::Complex;
use std::ffi::c_char;
use std::sync::Once;

static PIN_BLAS_THREADS: Once = Once::new();

extern "C" {
    fn openblas_set_num_threads(num: i32);
}

fn pin_blas_threads() {
    PIN_BLAS_THREADS.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}

/// Scalars with LAPACK-backed Hermitian eigensolvers (`f32`, `f64`).
pub trait EigScalar: Real {
    /// Eigenvalues (ascending) of a Hermitian band matrix in LAPACK
    /// lower-band storage: `ab` is `(kd+1) x n` column-major with
    /// `ab[i - j + j*(kd+1)] = A[i][j]` for `j <= i <= min(n-1, j+kd)`.
    /// `ab` is destroyed.
    fn banded_eigenvalues(n: usize, kd: usize, ab: &mut [Complex<Self>]) -> Result<Vec<Self>>;

    /// Eigenvalues (ascending) of a dense Hermitian matrix.
    fn dense_eigenvalues(a: Array2<Complex<Self>>) -> Result<Vec<Self>>;
}

macro_rules! impl_eig_scalar {
    ($s:ty, $hbtrd:ident, $sterf:ident) => {
        impl EigScalar for $s {
            fn banded_eigenvalues(n: usize, kd: usize, ab: &mut [Complex<Self>]) -> Result<Vec<Self>> {
                pin_blas_threads();
                let ldab = kd + 1;
                assert!(ab.len() >= ldab * n, "band storage too small");
                let mut d = vec![0 as $s; n];
                let mut e = vec![0 as $s; n.saturating_sub(1).max(1)];
                let mut work = vec![Complex::<$s>::default(); n.max(1)];
                let mut q = [Complex::<$s>::default(); 1];
                let mut info: i32 = 0;
                let (vect, uplo) = (b'N' as c_char, b'L' as c_char);
                let (n_i, kd_i, ldab_i, ldq_i) = (n as i32, kd as i32, ldab as i32, 1i32);
                unsafe {
                    lapack_sys::$hbtrd(
                        &vect,
                        &uplo,
                        &n_i,
                        &kd_i,
                        ab.as_mut_ptr().cast(),
                        &ldab_i,
                        d.as_mut_ptr(),
                        e.as_mut_ptr(),
                        q.as_mut_ptr().cast(),
                        &ldq_i,
                        work.as_mut_ptr().cast(),
                        &mut info,
                    );
                }
                if info != 0 {
                    return Err(Error::EigensolverFailure {
                        kx: 0.0,
                        ky: 0.0,
                        detail: format!("band tridiagonalization failed (info = {info})"),
                    });
                }
                unsafe {
                    lapack_sys::$sterf(&n_i, d.as_mut_ptr(), e.as_mut_ptr(), &mut info);
                }
                if info != 0 {
                    return Err(Error::EigensolverFailure {
                        kx: 0.0,
                        ky: 0.0,
                        detail: format!("tridiagonal eigensolver failed (info = {info})"),
                    });
                }
                Ok(d)
            }

            fn dense_eigenvalues(a: Array2<Complex<Self>>) -> Result<Vec<Self>> {
                pin_blas_threads();
                let vals = a.eigvalsh_into(UPLO::Lower).map_err(|e| Error::EigensolverFailure {
                    kx: 0.0,
                    ky: 0.0,
                    detail: e.to_string(),
                })?;
                Ok(vals.to_vec())
            }
        }
    };
}

impl_eig_scalar!(f64, zhbtrd_, dsterf_);
impl_eig_scalar!(f32, chbtrd_, ssterf_);
