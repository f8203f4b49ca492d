//! Reference computations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Round-sphere mode eigenvalue λ_k^j = (k + j - 1)(k + j), j ≥ 1.
pub fn spherical(k: u32, j: usize) -> f64 {
    let l = (k as usize + j - 1) as f64;
    l * (l + 1.0)
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss–Legendre over `panels` equal panels of [-1, 1].
pub fn composite_gauss<F: Fn(f64) -> f64>(g: F, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = 2.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let c = -1.0 + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            total += wi * g(c + 0.5 * h * xi);
        }
    }
    0.5 * h * total
}

/// Composite Simpson on [-1, 1] with an even number of intervals.
pub fn simpson<F: Fn(f64) -> f64>(g: F, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = 2.0 / n as f64;
    let mut s = g(-1.0) + g(1.0);
    for i in 1..n {
        let x = -1.0 + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(x);
    }
    s * h / 3.0
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lower-triangular Cholesky factor.
fn cholesky(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (m[i][i] - s).sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Eigenvalues of K v = λ M v via L⁻¹ K L⁻ᵀ.
pub fn generalized_eigenvalues(k: &[Vec<f64>], m: &[Vec<f64>]) -> Vec<f64> {
    let n = k.len();
    let l = cholesky(m);
    // Solve L Y = K, then L Z = Yᵀ so Z = L⁻¹ K L⁻ᵀ.
    let forward = |b: &[f64]| {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|j| l[i][j] * y[j]).sum();
            y[i] = (b[i] - s) / l[i][i];
        }
        y
    };
    let cols: Vec<Vec<f64>> = (0..n).map(|j| forward(&(0..n).map(|i| k[i][j]).collect::<Vec<_>>())).collect();
    // cols[j] = column j of L⁻¹K; transpose rows of L⁻¹K and apply again.
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    let z: Vec<Vec<f64>> = rows.iter().map(|r| forward(r)).collect();
    let sym: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (z[i][j] + z[j][i])).collect()).collect();
    jacobi_eigenvalues(sym)
}

/// Legendre polynomials P_0..P_{n-1} and derivatives at x.
fn legendre(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n];
    let mut d = vec![0.0; n];
    p[0] = 1.0;
    if n > 1 {
        p[1] = x;
        d[1] = 1.0;
    }
    for m in 2..n {
        let mf = m as f64;
        p[m] = ((2.0 * mf - 1.0) * x * p[m - 1] - (mf - 1.0) * p[m - 2]) / mf;
        d[m] = d[m - 2] + (2.0 * mf - 1.0) * p[m - 1];
    }
    (p, d)
}

/// Rayleigh–Ritz eigenvalues of -(f u')' + k² u / f for f = (1 - x²) q(x),
/// with trial space (1 - x²)^{k/2} · polynomials of degree < `basis`.
/// Upper bounds converging spectrally for smooth positive q.
pub fn galerkin_mode<Q: Fn(f64) -> f64>(q: Q, k: u32, basis: usize) -> Vec<f64> {
    let (xs, ws) = gauss_legendre(4 * basis + 40);
    let kf = k as f64;
    let mut stiff = vec![vec![0.0; basis]; basis];
    let mut mass = vec![vec![0.0; basis]; basis];
    for (&x, &w) in xs.iter().zip(&ws) {
        let (p, d) = legendre(basis, x);
        let s = 1.0 - x * x;
        let qx = q(x);
        // u = s^{k/2} P, u' = s^{k/2-1} (-k x P + s P')
        let a: Vec<f64> = (0..basis).map(|i| -kf * x * p[i] + s * d[i]).collect();
        let wk1 = if k == 0 { 0.0 } else { s.powi(k as i32 - 1) };
        let wk = s.powi(k as i32);
        for i in 0..basis {
            for j in 0..basis {
                let grad = if k == 0 { qx * s * d[i] * d[j] } else { qx * wk1 * a[i] * a[j] };
                let pot = if k == 0 { 0.0 } else { kf * kf * wk1 * p[i] * p[j] / qx };
                stiff[i][j] += w * (grad + pot);
                mass[i][j] += w * wk * p[i] * p[j];
            }
        }
    }
    generalized_eigenvalues(&stiff, &mass)
}

/// q for the bulged family f = (1 - x²)(1 + c(1 - x²)).
pub fn bulge_q(c: f64) -> impl Fn(f64) -> f64 {
    move |x| 1.0 + c * (1.0 - x * x)
}

/// q for f = 2(1 - x²)/(1 + x²).
pub fn example_q(x: f64) -> f64 {
    2.0 / (1.0 + x * x)
}

pub fn example_f(x: f64) -> f64 {
    2.0 * (1.0 - x * x) / (1.0 + x * x)
}

/// Closed-form ∫(1 - x²)^m dx = 2^{2m+1} (m!)² / (2m+1)!.
pub fn canonical_moment(m: u32) -> f64 {
    let mut v = 2.0;
    for i in 1..=m {
        v *= (2 * i) as f64 / (2 * i + 1) as f64;
    }
    v
}
