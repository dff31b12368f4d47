//! Brute-force eigenvalue oracle for small symmetric matrices, independent
//! of the Jacobi path: characteristic polynomial by Faddeev-LeVerrier, real
//! roots by sign-change bisection inside the Gershgorin disc.

use mercerlab::Mat;

/// Coefficients [1, c1, ..., cn] of det(lambda I - A).
pub fn char_poly(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let matmul = |x: &Mat, y: &Mat| -> Mat {
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += x[(i, k)] * y[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    };
    let trace = |x: &Mat| -> f64 { (0..n).map(|i| x[(i, i)]).sum() };
    let mut coeffs = vec![1.0];
    let mut m = Mat::identity(n);
    for k in 1..=n {
        let am = matmul(a, &m);
        let c = -trace(&am) / k as f64;
        coeffs.push(c);
        if k < n {
            m = am;
            for i in 0..n {
                m[(i, i)] += c;
            }
        }
    }
    coeffs
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

/// All real roots of the characteristic polynomial of a symmetric matrix
/// with simple, separated eigenvalues; descending order.
pub fn eigenvalues_by_char_poly(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    let coeffs = char_poly(a);
    // Gershgorin bound on the spectrum
    let radius = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let (lo, hi) = (-radius * 1.001 - 1e-9, radius * 1.001 + 1e-9);
    let samples = 20_000 * n;
    let h = (hi - lo) / samples as f64;
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev_f = horner(&coeffs, lo);
    for k in 1..=samples {
        let x = lo + h * k as f64;
        let f = horner(&coeffs, x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f.signum() != f.signum() && f != 0.0 {
            let (mut a0, mut b0, mut fa) = (prev_x, x, prev_f);
            for _ in 0..200 {
                let mid = 0.5 * (a0 + b0);
                let fm = horner(&coeffs, mid);
                if fm == 0.0 {
                    a0 = mid;
                    b0 = mid;
                    break;
                }
                if fa.signum() != fm.signum() {
                    b0 = mid;
                } else {
                    a0 = mid;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a0 + b0));
        }
        prev_x = x;
        prev_f = f;
    }
    assert_eq!(
        roots.len(),
        n,
        "char-poly oracle expects {n} simple roots, found {}",
        roots.len()
    );
    roots.sort_by(|p, q| q.total_cmp(p));
    roots
}
