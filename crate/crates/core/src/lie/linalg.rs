//! Dense matrix exponential and principal logarithm.

use nalgebra::DMatrix;

use super::LieError;

/// Stopping tolerance of the iterative parts.
pub const TOL: f64 = 1e-13;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn solve(lhs: DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    lhs.lu().solve(rhs)
}

/// `exp(A)` by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a / 2f64.powi(s);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let mut r = solve(&v - &u, &(&v + &u)).expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Errors unless every eigenvalue avoids the closed negative real axis.
pub fn check_log_domain(a: &DMatrix<f64>) -> Result<(), LieError> {
    let n = a.nrows();
    // Eigenvalues lie within ||A - I||_2 <= ||A - I||_F of 1.
    if (a - DMatrix::<f64>::identity(n, n)).norm() < 1.0 {
        return Ok(());
    }
    let scale = a.norm().max(1.0);
    for l in a.clone().complex_eigenvalues().iter() {
        if l.re <= 0.0 && l.im.abs() <= 1e-12 * scale {
            return Err(LieError::Domain(format!("eigenvalue {:.3e}{:+.3e}i on the closed negative real axis", l.re, l.im)));
        }
    }
    Ok(())
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrtm(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LieError> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or_else(|| LieError::Domain("singular square-root iterate".into()))?;
        let zi = z.clone().try_inverse().ok_or_else(|| LieError::Domain("singular square-root iterate".into()))?;
        let next = (&y + zi) * 0.5;
        z = (&z + yi) * 0.5;
        let change = (&next - &y).norm();
        y = next;
        if change <= TOL * y.norm() {
            return Ok(y);
        }
    }
    Err(LieError::Domain("square-root iteration did not converge".into()))
}

/// Principal logarithm by inverse scaling and squaring: square roots until
/// `A` is near `I`, then the series `log A = 2 Σ z^(2k+1) / (2k+1)` with
/// `z = (A - I)(A + I)^-1`.
pub fn logm(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LieError> {
    check_log_domain(a)?;
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut m = a.clone();
    let mut k = 0;
    while (&m - &id).norm() > 0.25 {
        if k == 60 {
            return Err(LieError::Domain("too many square roots".into()));
        }
        m = sqrtm(&m)?;
        k += 1;
    }
    let plus = (&m + &id).transpose();
    let z = solve(plus, &(&m - &id).transpose())
        .ok_or_else(|| LieError::Domain("A + I is singular".into()))?
        .transpose();
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z;
    for j in 1..200 {
        term = &term * &z2;
        let t = &term / (2 * j + 1) as f64;
        let size = t.norm();
        sum += t;
        if size <= TOL * sum.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(sum * 2f64.powi(k + 1))
}

/// `A^k` by repeated squaring.
pub fn powm(a: &DMatrix<f64>, mut k: u32) -> DMatrix<f64> {
    let n = a.nrows();
    let mut base = a.clone();
    let mut out = DMatrix::<f64>::identity(n, n);
    while k > 0 {
        if k & 1 == 1 {
            out = &out * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_diagonal_and_nilpotent() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -2.0, 10.0]));
        let e = expm(&d);
        for (i, v) in [1.0f64, -2.0, 10.0].iter().enumerate() {
            assert!((e[(i, i)] - v.exp()).abs() <= 1e-12 * v.exp());
        }
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let e = expm(&nil);
        assert!((e - DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn log_inverts_exp_near_identity() {
        let x = DMatrix::from_row_slice(3, 3, &[0.1, -0.3, 0.2, 0.05, 0.0, 0.4, -0.2, 0.1, -0.1]);
        let back = logm(&expm(&x)).unwrap();
        assert!((back - &x).norm() < 1e-12);
        let big = &x * 5.0;
        assert!((logm(&expm(&big)).unwrap() - big).norm() < 1e-10);
    }

    #[test]
    fn negative_eigenvalues_are_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(logm(&a), Err(LieError::Domain(_))));
        // Rotation by pi.
        let r = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        assert!(logm(&r).is_err());
    }

    #[test]
    fn powers() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(powm(&a, 17), DMatrix::from_row_slice(2, 2, &[1.0, 17.0, 0.0, 1.0]));
    }
}
