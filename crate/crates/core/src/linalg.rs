//! Dense symmetric eigenproblems via the system LAPACK.

use ndarray::Array2;

use crate::error::{Error, Result};

extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
}

fn dsyevd(jobz: u8, n: usize, a: &mut [f64]) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let ni = n as i32;
    let mut w = vec![0.0; n];
    let mut info: i32 = 0;

    // workspace query
    let mut work_query = [0.0f64];
    let mut iwork_query = [0i32];
    let neg_one: i32 = -1;
    unsafe {
        dsyevd_(
            &jobz,
            b"L".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &neg_one,
            iwork_query.as_mut_ptr(),
            &neg_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigenConvergence(info));
    }
    let lwork = work_query[0] as i32;
    let liwork = iwork_query[0];
    let mut work = vec![0.0; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        dsyevd_(
            &jobz,
            b"L".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigenConvergence(info));
    }
    Ok(w)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending;
/// column j of `vectors` is the eigenvector of `values[j]`.
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

pub fn eigh(matrix: &Array2<f64>) -> Result<Eigh> {
    let n = square_dim(matrix)?;
    let mut a: Vec<f64> = matrix.iter().copied().collect();
    let values = dsyevd(b'V', n, &mut a)?;
    // LAPACK wrote Fortran-order eigenvector columns into `a`
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| a[j * n + i]);
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only (ascending).
pub fn eigvalsh(matrix: &Array2<f64>) -> Result<Vec<f64>> {
    let n = square_dim(matrix)?;
    let mut a: Vec<f64> = matrix.iter().copied().collect();
    dsyevd(b'N', n, &mut a)
}

/// Smallest eigenvalue and its eigenvector.
pub fn min_eigenpair(matrix: &Array2<f64>) -> Result<(f64, Vec<f64>)> {
    let decomp = eigh(matrix)?;
    let vec = decomp.vectors.column(0).to_vec();
    Ok((decomp.values[0], vec))
}

/// Spectral norm (largest |eigenvalue|) of a symmetric matrix.
pub fn spectral_norm(matrix: &Array2<f64>) -> Result<f64> {
    let w = eigvalsh(matrix)?;
    Ok(w.first().map(|v| v.abs()).unwrap_or(0.0).max(w.last().map(|v| v.abs()).unwrap_or(0.0)))
}

fn square_dim(matrix: &Array2<f64>) -> Result<usize> {
    let (r, c) = matrix.dim();
    if r != c {
        return Err(Error::Invalid(format!("matrix must be square (got {r}x{c})")));
    }
    Ok(r)
}
