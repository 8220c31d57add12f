//! Finite-difference weights on arbitrary node sets (Fornberg recursion).

/// Weights `w` such that `Σ w_i f(x_i) ≈ f^(m)(z)` with the order of
/// accuracy set by the stencil size.
pub fn fd_weights(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > m);
    // c[k][i]: weight of node i for derivative order k.
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        let x_im1 = xs[i];
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=m.min(i)).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - (xs[i - 1] - z) * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * (xs[i - 1] - z) * c[0][i - 1] / c2;
            }
            for k in (1..=m.min(i)).rev() {
                c[k][j] = ((xs[i] - z) * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = (xs[i] - z) * c[0][j] / c3;
        }
        c1 = c2;
        let _ = x_im1;
    }
    c.pop().unwrap()
}

/// Local cubic Lagrange interpolation through the four nodes bracketing
/// `x`; classical O(h⁴) accuracy on smooth data.
pub fn lagrange4_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    assert!(n >= 4 && ys.len() == n);
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let lo = k.saturating_sub(1).min(n - 4);
    let xs = &xs[lo..lo + 4];
    let ys = &ys[lo..lo + 4];
    let mut acc = 0.0;
    for i in 0..4 {
        let mut term = ys[i];
        for j in 0..4 {
            if i != j {
                term *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += term;
    }
    acc
}

/// First derivative of nodal data by five-point stencils: 4th-order
/// accurate, one-sided at the ends. Works on non-uniform grids.
pub fn derivative_on_grid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 5 && ys.len() == n);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n - 5);
        let w = fd_weights(xs[i], &xs[lo..lo + 5], 1);
        out[i] = w.iter().zip(&ys[lo..lo + 5]).map(|(w, y)| w * y).sum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_classic_central_weights() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(0.0, &xs, 1);
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn quartic_is_differentiated_exactly() {
        let xs: Vec<f64> = vec![0.0, 0.3, 0.7, 1.2, 1.4, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x * x).collect();
        let d = derivative_on_grid(&xs, &ys);
        for (x, d) in xs.iter().zip(&d) {
            let exact = 4.0 * x.powi(3) - 4.0 * x;
            assert!((d - exact).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn lagrange_interpolation_is_fourth_order() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            let x = 4.5 * i as f64 / 400.0;
            worst = worst.max((lagrange4_eval(&xs, &ys, x) - x.sin()).abs());
        }
        assert!(worst < 5e-6, "worst {worst}");
    }

    #[test]
    fn second_derivative_weights() {
        let xs = [0.0, 0.1, 0.25, 0.3, 0.5];
        let w = fd_weights(0.25, &xs, 2);
        let val: f64 = w
            .iter()
            .zip(&xs)
            .map(|(w, x): (&f64, &f64)| w * x.sin())
            .sum();
        assert!((val + 0.25_f64.sin()).abs() < 1e-3);
    }
}
