//! Restarted GMRES for complex systems given only a matrix-vector product.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    /// `||b - A x|| / ||b||`, recomputed from the final iterate.
    pub relative_residual: f64,
    pub iterations: usize,
    /// Ratio of extreme singular values of the last Hessenberg matrix.
    pub condition: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotation `[c, conj(s); -s, c]` with real `c` that zeroes `b` below `a`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    if b.norm() == 0.0 {
        return (1.0, 0.0.into());
    }
    let r = (an * an + b.norm_sqr()).sqrt();
    if an == 0.0 {
        return (0.0, 1.0.into());
    }
    (an / r, b * an / (a * r))
}

fn residual(apply: &impl Fn(&[Complex64]) -> Vec<Complex64>, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let ax = apply(x);
    b.iter().zip(&ax).map(|(b, a)| b - a).collect()
}

/// Solves `A x = b` starting from zero.
pub fn gmres(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    restart: usize,
    max_cycles: usize,
    tol: f64,
) -> GmresOutcome {
    let n = b.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let bn = norm(b);
    if bn == 0.0 {
        return GmresOutcome { x, relative_residual: 0.0, iterations: 0, condition: 1.0 };
    }
    let mut iterations = 0;
    let mut condition = 1.0;
    for _ in 0..max_cycles {
        let r = residual(&apply, &x, b);
        let beta = norm(&r);
        if beta / bn <= tol {
            break;
        }
        let m = restart.min(n);
        let mut v: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        let mut rm = DMatrix::<Complex64>::zeros(m, m);
        let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = beta.into();
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&v[k]);
            let mut col = vec![Complex64::new(0.0, 0.0); k + 2];
            // Gram-Schmidt twice
            for _ in 0..2 {
                for (j, vj) in v.iter().enumerate() {
                    let c = dot(vj, &w);
                    col[j] += c;
                    for (wi, vi) in w.iter_mut().zip(vj) {
                        *wi -= c * vi;
                    }
                }
            }
            let wn = norm(&w);
            col[k + 1] = wn.into();
            iterations += 1;
            k_used = k + 1;
            for (j, &(c, s)) in rot.iter().enumerate() {
                let t = col[j] * c + s.conj() * col[j + 1];
                col[j + 1] = -s * col[j] + col[j + 1] * c;
                col[j] = t;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            col[k] = col[k] * c + s.conj() * col[k + 1];
            g[k + 1] = -s * g[k];
            g[k] *= c;
            rot.push((c, s));
            for i in 0..=k {
                rm[(i, k)] = col[i];
            }
            let converged = g[k + 1].norm() / bn <= tol;
            if wn == 0.0 || converged {
                break;
            }
            v.push(w.iter().map(|z| z / wn).collect());
        }
        let r_mat = rm.view((0, 0), (k_used, k_used)).into_owned();
        let mut y = vec![Complex64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= r_mat[(i, j)] * y[j];
            }
            y[i] = s / r_mat[(i, i)];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[j]) {
                *xi += yj * vi;
            }
        }
        let sv = r_mat.singular_values();
        let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
        condition = if mn > 0.0 { mx / mn } else { f64::INFINITY };
    }
    let relative_residual = norm(&residual(&apply, &x, b)) / bn;
    GmresOutcome { x, relative_residual, iterations, condition }
}
