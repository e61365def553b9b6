//! Pfaffian of real antisymmetric matrices.

use nalgebra::DMatrix;

/// Pfaffian by Parlett–Reid skew tridiagonalization with partial pivoting.
/// Returns 0 for odd dimension.
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "pfaffian needs a square matrix");
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = m.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry in column k below the diagonal
        let mut kp = k + 1;
        for i in k + 2..n {
            if a[(i, k)].abs() > a[(kp, k)].abs() {
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let piv = a[(k, k + 1)];
        if piv == 0.0 {
            return 0.0;
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / piv).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}
