//! Matrix exponential for small dense matrices: degree-6 diagonal Pade with
//! scaling and squaring, plus the phi-function family needed by exponential
//! time differencing.

use nalgebra::{Matrix3, SMatrix};
use num_complex::Complex64;

/// Degree-6 diagonal Pade numerator coefficients.
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15_840.0,
    1.0 / 665_280.0,
];

/// Scaling-and-squaring matrix exponential with a degree-6 rational
/// approximant.
pub fn expm<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N>
where
    nalgebra::Const<N>: nalgebra::DimMin<nalgebra::Const<N>, Output = nalgebra::Const<N>>,
{
    // L1-style norm: max absolute column sum.
    let mut norm = 0.0f64;
    for j in 0..N {
        let col_sum: f64 = (0..N).map(|i| a[(i, j)].abs()).sum();
        norm = norm.max(col_sum);
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / (2.0f64.powi(squarings as i32));

    // p(A) and p(-A): even powers shared, odd powers flip sign.
    let mut even = SMatrix::<f64, N, N>::identity() * PADE6[0];
    let mut odd = SMatrix::<f64, N, N>::zeros();
    let mut power = SMatrix::<f64, N, N>::identity();
    for (k, &c) in PADE6.iter().enumerate().skip(1) {
        power *= scaled;
        if k % 2 == 0 {
            even += power * c;
        } else {
            odd += power * c;
        }
    }
    let numer = even + odd;
    let denom = even - odd;
    let mut result = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is invertible for scaled matrices");
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// `(exp(B), phi1(B), phi2(B))` with `phi1(z) = (e^z - 1)/z` and
/// `phi2(z) = (e^z - 1 - z)/z^2`, via the exponential of the augmented
/// block matrix `[[B, I, 0], [0, 0, I], [0, 0, 0]]`. Well defined for every
/// B, including singular and defective ones.
pub fn exp_phi_matrices(b: &Matrix3<f64>) -> (Matrix3<f64>, Matrix3<f64>, Matrix3<f64>) {
    let mut aug = SMatrix::<f64, 9, 9>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            aug[(i, j)] = b[(i, j)];
        }
        aug[(i, 3 + i)] = 1.0;
        aug[(3 + i, 6 + i)] = 1.0;
    }
    let e = expm(&aug);
    let mut w = Matrix3::zeros();
    let mut phi1 = Matrix3::zeros();
    let mut phi2 = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            w[(i, j)] = e[(i, j)];
            phi1[(i, j)] = e[(i, 3 + j)];
            phi2[(i, j)] = e[(i, 6 + j)];
        }
    }
    (w, phi1, phi2)
}

/// Scalar phi functions with series evaluation near zero.
pub fn phi1_scalar(z: Complex64) -> Complex64 {
    if z.norm() < 0.05 {
        // sum z^k/(k+1)!
        let mut acc = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..=8 {
            term *= z / (k as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

pub fn phi2_scalar(z: Complex64) -> Complex64 {
    if z.norm() < 0.05 {
        // sum z^k/(k+2)!
        let mut acc = Complex64::new(0.5, 0.0);
        let mut term = Complex64::new(0.5, 0.0);
        for k in 1..=8 {
            term *= z / (k as f64 + 2.0);
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}
