//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

/// Symmetric tridiagonal matrix: `diag[0..n]`, `off[0..n-1]`.
#[derive(Clone, Debug)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        debug_assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// y = A x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }
}

/// Number of eigenvalues strictly below `sigma` (negative LDLᵀ pivots).
pub fn sturm_count(diag: &[f64], off_sq: &[f64], sigma: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - sigma;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - sigma - off_sq[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

const LANES: usize = 8;

/// Sturm counts at `LANES` shifts in one pass; the independent recurrences
/// interleave, hiding the division latency.
fn sturm_counts(diag: &[f64], off_sq: &[f64], sigma: &[f64; LANES], pivmin: f64) -> [usize; LANES] {
    let mut q = [0.0f64; LANES];
    let mut count = [0usize; LANES];
    for l in 0..LANES {
        q[l] = diag[0] - sigma[l];
        if q[l].abs() < pivmin {
            q[l] = -pivmin;
        }
        count[l] += (q[l] < 0.0) as usize;
    }
    for i in 1..diag.len() {
        let d = diag[i];
        let e = off_sq[i - 1];
        for l in 0..LANES {
            let mut v = d - sigma[l] - e / q[l];
            if v.abs() < pivmin {
                v = -pivmin;
            }
            count[l] += (v < 0.0) as usize;
            q[l] = v;
        }
    }
    count
}

/// The `count` smallest eigenvalues in ascending order.
///
/// Bisection with shared brackets: every Sturm count tightens the brackets of
/// all eigenvalues it separates. Up to eight distinct brackets are split per
/// pass over the matrix.
pub fn lowest_eigenvalues(a: &SymTridiagonal, count: usize) -> Vec<f64> {
    let n = a.len();
    let count = count.min(n);
    if count == 0 {
        return Vec::new();
    }
    let off_sq: Vec<f64> = a.off.iter().map(|e| e * e).collect();
    let (glo, ghi) = a.gershgorin();
    let norm = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(off_sq.iter().cloned().fold(0.0, f64::max) * 1e-300);
    let pad = 2.0 * f64::EPSILON * norm;
    // Resolve well below the eps·‖A‖ noise so bisection adds no bias of its own.
    let abs_floor = 1e-3 * f64::EPSILON * norm;

    let mut lower = vec![glo - pad; count];
    let mut upper = vec![ghi + pad; count];
    let done = |lo: f64, hi: f64| {
        let mid = 0.5 * (lo + hi);
        hi - lo <= abs_floor.max(2.0 * f64::EPSILON * mid.abs()) || mid <= lo || mid >= hi
    };

    loop {
        let mut shifts = [0.0f64; LANES];
        let mut used = 0;
        for i in 0..count {
            if used == LANES {
                break;
            }
            if done(lower[i], upper[i]) {
                continue;
            }
            let mid = 0.5 * (lower[i] + upper[i]);
            if shifts[..used].contains(&mid) {
                continue;
            }
            shifts[used] = mid;
            used += 1;
        }
        if used == 0 {
            break;
        }
        // Idle lanes repeat the first shift.
        for l in used..LANES {
            shifts[l] = shifts[0];
        }
        let counts = if n >= LANES * 4 {
            sturm_counts(&a.diag, &off_sq, &shifts, pivmin)
        } else {
            let mut c = [0usize; LANES];
            for l in 0..used {
                c[l] = sturm_count(&a.diag, &off_sq, shifts[l], pivmin);
            }
            c
        };
        for l in 0..used {
            let (mid, c) = (shifts[l], counts[l]);
            // Eigenvalues with index < c lie below mid.
            for j in 0..count {
                if j < c {
                    if upper[j] > mid {
                        upper[j] = mid;
                    }
                } else if lower[j] < mid {
                    lower[j] = mid;
                }
            }
        }
    }
    lower
        .iter()
        .zip(&upper)
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect()
}

/// Solves (A - sigma I) x = b by Gaussian elimination with partial pivoting.
pub fn shifted_solve(a: &SymTridiagonal, sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        let d = a.diag[0] - sigma;
        return vec![b[0] / if d == 0.0 { f64::EPSILON } else { d }];
    }
    // Row i of U holds u0[i] (diagonal), u1[i], u2[i] (two superdiagonals).
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    // Working row i: [cur_d, cur_u1, cur_u2] for columns i, i+1, i+2.
    let mut cur_d = a.diag[0] - sigma;
    let mut cur_u1 = a.off[0];
    let mut cur_u2 = 0.0;
    let tiny = f64::EPSILON * a.gershgorin().1.abs().max(1.0);
    for i in 0..n - 1 {
        let sub = a.off[i];
        let next_d = a.diag[i + 1] - sigma;
        let next_u1 = if i + 2 < n { a.off[i + 1] } else { 0.0 };
        if cur_d.abs() >= sub.abs() {
            let piv = if cur_d == 0.0 { tiny } else { cur_d };
            let m = sub / piv;
            u0[i] = piv;
            u1[i] = cur_u1;
            u2[i] = cur_u2;
            rhs[i + 1] -= m * rhs[i];
            cur_d = next_d - m * cur_u1;
            cur_u1 = next_u1 - m * cur_u2;
            cur_u2 = 0.0;
        } else {
            // Swap rows i and i+1.
            let m = cur_d / sub;
            u0[i] = sub;
            u1[i] = next_d;
            u2[i] = next_u1;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= m * rhs[i];
            let nd = cur_u1 - m * next_d;
            let nu1 = cur_u2 - m * next_u1;
            cur_d = nd;
            cur_u1 = nu1;
            cur_u2 = 0.0;
        }
    }
    u0[n - 1] = if cur_d == 0.0 { tiny } else { cur_d };
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / u0[i];
    }
    x
}

/// Eigenvector for an isolated eigenvalue `lambda` by inverse iteration,
/// normalized to unit Euclidean norm.
pub fn inverse_iteration(a: &SymTridiagonal, lambda: f64) -> Vec<f64> {
    let n = a.len();
    // Deterministic start vector with no symmetry.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let (glo, ghi) = a.gershgorin();
    let shift = lambda - 8.0 * f64::EPSILON * glo.abs().max(ghi.abs()).max(1.0);
    for _ in 0..4 {
        let mut w = shifted_solve(a, shift, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        v = w;
    }
    v
}
