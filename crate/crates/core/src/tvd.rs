//! Exact univariate total variation denoising,
//! `argmin_θ ½‖y − θ‖² + λ Σ |θ_{k+1} − θ_k|`.
//!
//! Direct taut-string style scan (Condat, 2013): linear in practice and
//! exact up to floating point, with no iteration tolerance.

use crate::error::{MtfError, Result};

pub fn solve_tvd(y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(MtfError::invalid(format!(
            "penalty must be finite and non-negative, got {lambda}"
        )));
    }
    let n = y.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return Ok(out);
    }
    if lambda == 0.0 {
        out.copy_from_slice(y);
        return Ok(out);
    }

    let twolambda = 2.0 * lambda;
    let minlambda = -lambda;
    let (mut k, mut k0, mut kplus, mut kminus) = (0usize, 0usize, 0usize, 0usize);
    let mut umin = lambda;
    let mut umax = minlambda;
    let mut vmin = y[0] - lambda;
    let mut vmax = y[0] + lambda;

    loop {
        while k == n - 1 {
            if umin < 0.0 {
                loop {
                    out[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k0;
                vmin = y[k0];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                loop {
                    out[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k0;
                vmax = y[k0];
                umax = minlambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                while k0 <= k {
                    out[k0] = vmin;
                    k0 += 1;
                }
                return Ok(out);
            }
        }
        umin += y[k + 1] - vmin;
        if umin < minlambda {
            loop {
                out[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = y[k0];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = minlambda;
            continue;
        }
        umax += y[k + 1] - vmax;
        if umax > lambda {
            loop {
                out[k0] = vmax;
                k0 += 1;
                if k0 > kplus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = y[k0];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = minlambda;
        } else {
            k += 1;
            if umin >= lambda {
                kminus = k;
                vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
                umin = lambda;
            }
            if umax <= minlambda {
                kplus = k;
                vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
                umax = minlambda;
            }
        }
    }
}

/// `½‖y − θ‖² + λ TV(θ)`.
pub fn objective(y: &[f64], lambda: f64, theta: &[f64]) -> f64 {
    let fidelity: f64 = y.iter().zip(theta).map(|(a, b)| (a - b).powi(2)).sum();
    let tv: f64 = theta.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    0.5 * fidelity + lambda * tv
}

/// Largest violation of the optimality conditions.
///
/// With `R_k = Σ_{t ≤ k} (y_t − θ_t)`, optimality means `R_n = 0`,
/// `|R_k| ≤ λ`, and `R_k = −λ·sign(θ_{k+1} − θ_k)` wherever `θ` jumps.
pub fn kkt_residual(y: &[f64], lambda: f64, theta: &[f64]) -> Result<f64> {
    if y.len() != theta.len() {
        return Err(MtfError::invalid(format!(
            "length mismatch: y has {}, theta has {}",
            y.len(),
            theta.len()
        )));
    }
    let n = y.len();
    let mut worst: f64 = 0.0;
    let mut partial = 0.0;
    for k in 0..n {
        partial += y[k] - theta[k];
        if k + 1 == n {
            worst = worst.max(partial.abs());
            break;
        }
        worst = worst.max(partial.abs() - lambda);
        let diff = theta[k + 1] - theta[k];
        if diff > 0.0 {
            worst = worst.max((partial + lambda).abs());
        } else if diff < 0.0 {
            worst = worst.max((partial - lambda).abs());
        }
    }
    Ok(worst)
}
