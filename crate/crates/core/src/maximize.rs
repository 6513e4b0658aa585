use crate::poly::univariate;
use nalgebra::DMatrix;

/// Candidates whose values are within this of the maximum count as maximizers.
pub const TIE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateMax {
    /// Smallest maximizer.
    pub t_star: f64,
    pub value: f64,
    /// Every critical point or endpoint whose value is within [`TIE_TOL`] of
    /// the maximum, ascending.
    pub maximizers: Vec<f64>,
}

/// Real roots of `p` (ascending coefficients) in `[-1, 1]`, polished by Newton
/// steps. Roots are eigenvalues of the companion matrix; eigenvalues with
/// small imaginary parts are kept to catch clustered roots.
fn roots_in_interval(p: &[f64]) -> Vec<f64> {
    let p = univariate::trimmed(p, 1e-13);
    if p.len() < 2 {
        return Vec::new();
    }
    let n = p.len() - 1;
    let lead = p[n];
    let mut companion = DMatrix::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -p[i] / lead;
    }
    let dp = univariate::derivative(&p);
    companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-4 * (1.0 + z.re.abs()) && z.re.abs() <= 1.0 + 1e-6)
        .map(|z| {
            let mut t = z.re.clamp(-1.0, 1.0);
            for _ in 0..8 {
                let d = univariate::eval(&dp, t);
                if d == 0.0 {
                    break;
                }
                let next = (t - univariate::eval(&p, t) / d).clamp(-1.0, 1.0);
                if univariate::eval(&p, next).abs() >= univariate::eval(&p, t).abs() {
                    break;
                }
                t = next;
            }
            t
        })
        .collect()
}

/// Global maximum of a univariate polynomial over `[-1, 1]`, from the real
/// critical points and the endpoints.
pub fn maximize_univariate(coeffs: &[f64]) -> UnivariateMax {
    let mut candidates = vec![-1.0, 1.0];
    candidates.extend(roots_in_interval(&univariate::derivative(coeffs)));
    let values: Vec<f64> = candidates
        .iter()
        .map(|&t| univariate::eval(coeffs, t))
        .collect();
    let value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut maximizers: Vec<f64> = candidates
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v >= value - TIE_TOL)
        .map(|(&t, _)| t)
        .collect();
    maximizers.sort_by(f64::total_cmp);
    maximizers.dedup_by(|b, a| (*b - *a).abs() <= TIE_TOL);
    UnivariateMax {
        t_star: maximizers[0],
        value,
        maximizers,
    }
}
