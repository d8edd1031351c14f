//! Brute-force solver for the ε-SVR dual on tiny problems.
//!
//! In terms of `β = α − α*` the dual is
//!
//! ```text
//! min ½ βᵀKβ + ε‖β‖₁ − zᵀβ   s.t.  Σβ = 0,  −C ≤ β ≤ C
//! ```
//!
//! Each point is in one of five states: `β = 0`, `β = ±C`, or free with
//! sign `±`. For every assignment the free coefficients solve the
//! stationarity system `K_FF β_F + λ = z_F − ε s_F − K_F,fixed β_fixed`
//! together with the equality constraint `Σβ = 0`. Every primal-feasible candidate is
//! a feasible point, and the optimum is one of them, so the smallest
//! objective over candidates is the optimum.

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub beta: Vec<f64>,
    pub objective: f64,
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

pub fn objective(k: &[Vec<f64>], z: &[f64], eps: f64, beta: &[f64]) -> f64 {
    let n = z.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * k[i][j] * beta[j];
        }
    }
    0.5 * quad
        + beta
            .iter()
            .zip(z)
            .map(|(b, zi)| eps * b.abs() - zi * b)
            .sum::<f64>()
}

/// Inverse by Gauss–Jordan elimination with partial pivoting; `None` if
/// singular. `a` is row-major `n × n`.
fn invert(mut a: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-12 {
            return None;
        }
        for c in 0..n {
            a.swap(col * n + c, piv * n + c);
            inv.swap(col * n + c, piv * n + c);
        }
        let d = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                if f != 0.0 {
                    for c in 0..n {
                        a[r * n + c] -= f * a[col * n + c];
                        inv[r * n + c] -= f * inv[col * n + c];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|r| (0..n).map(|c| m[r * n + c] * v[c]).sum())
        .collect()
}

/// Exact optimum of the dual for at most 8 points.
///
/// For a fixed free set `F` the solution is `M⁻¹(a_s − b_fixed)` where `a_s`
/// depends only on the signs of the free points and `b_fixed` only on the
/// bounded ones, so both halves are tabulated once per free set.
pub fn solve_dual(x: &[Vec<f64>], z: &[f64], c: f64, eps: f64, gamma: f64) -> OracleSolution {
    let n = z.len();
    assert!(n <= 8, "enumeration is 5^n");
    let k: Vec<Vec<f64>> = x
        .iter()
        .map(|a| x.iter().map(|b| rbf(a, b, gamma)).collect())
        .collect();
    let tol = 1e-10 * c.max(1.0);
    let mut best = OracleSolution {
        beta: vec![0.0; n],
        objective: 0.0,
    };
    let mut consider = |beta: Vec<f64>| {
        let f = objective(&k, z, eps, &beta);
        if f < best.objective {
            best = OracleSolution { beta, objective: f };
        }
    };

    for free_mask in 0u32..(1 << n) {
        let free: Vec<usize> = (0..n).filter(|&i| free_mask & (1 << i) != 0).collect();
        let fixed: Vec<usize> = (0..n).filter(|&i| free_mask & (1 << i) == 0).collect();
        let m = free.len();
        let n_bound = 3usize.pow(fixed.len() as u32);
        // Bounded states per fixed point: 0 → 0, 1 → +C, 2 → −C.
        let bound_beta = |code: usize| {
            let mut beta = vec![0.0; n];
            let mut code = code;
            for &i in &fixed {
                beta[i] = [0.0, c, -c][code % 3];
                code /= 3;
            }
            beta
        };
        if m == 0 {
            for code in 0..n_bound {
                let beta = bound_beta(code);
                if beta.iter().sum::<f64>().abs() <= tol {
                    consider(beta);
                }
            }
            continue;
        }
        let dim = m + 1;
        let mut a = vec![0.0; dim * dim];
        for (r, &i) in free.iter().enumerate() {
            for (cc, &j) in free.iter().enumerate() {
                a[r * dim + cc] = k[i][j];
            }
            a[r * dim + m] = 1.0;
            a[m * dim + r] = 1.0;
        }
        let Some(inv) = invert(a, dim) else { continue };

        let sign_parts: Vec<Vec<f64>> = (0..1u32 << m)
            .map(|signs| {
                let mut v = vec![0.0; dim];
                for (r, &i) in free.iter().enumerate() {
                    let s = if signs & (1 << r) == 0 { 1.0 } else { -1.0 };
                    v[r] = z[i] - eps * s;
                }
                mat_vec(&inv, &v)
            })
            .collect();
        for code in 0..n_bound {
            let mut beta = bound_beta(code);
            let mut v = vec![0.0; dim];
            for (r, &i) in free.iter().enumerate() {
                v[r] = fixed.iter().map(|&j| k[i][j] * beta[j]).sum();
            }
            v[m] = beta.iter().sum();
            let bound_part = mat_vec(&inv, &v);
            for (signs, part) in sign_parts.iter().enumerate() {
                let feasible = (0..m).all(|r| {
                    let b = part[r] - bound_part[r];
                    if signs & (1 << r) == 0 {
                        b > -tol && b < c + tol
                    } else {
                        b < tol && b > -c - tol
                    }
                });
                if feasible {
                    for (r, &i) in free.iter().enumerate() {
                        beta[i] = part[r] - bound_part[r];
                    }
                    consider(beta.clone());
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_closed_form() {
        // β = (b, −b): objective ½·b²·2(1 − k) + 2ε|b| − b(z1 − z2).
        let x = vec![vec![0.0], vec![1.0]];
        for (z1, c) in [(1.0f64, 10.0f64), (1.0, 0.2), (0.1, 1.0)] {
            let (eps, gamma): (f64, f64) = (0.1, 0.5);
            let k = (-gamma).exp();
            let b = ((z1 - 2.0 * eps) / (2.0 * (1.0 - k))).clamp(0.0, c);
            let sol = solve_dual(&x, &[z1, 0.0], c, eps, gamma);
            assert!(
                (sol.beta[0] - b).abs() < 1e-12 && (sol.beta[1] + b).abs() < 1e-12,
                "{sol:?} vs {b}"
            );
        }
    }

    #[test]
    fn inverse_round_trip() {
        let a = vec![4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 5.0];
        let inv = invert(a.clone(), 3).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let p: f64 = (0..3).map(|k| a[r * 3 + k] * inv[k * 3 + c]).sum();
                assert!((p - f64::from(u8::from(r == c))).abs() < 1e-14);
            }
        }
        assert!(invert(vec![1.0, 2.0, 2.0, 4.0], 2).is_none());
    }
}
