//! Chebyshev-Gauss-Lobatto nodes, differentiation matrices and piecewise
//! barycentric interpolation on graded meshes of `[0, 1]`.

use nalgebra::DMatrix;

/// Lobatto nodes `cos(pi j / N)` on `[-1, 1]`, in descending order.
pub fn lobatto_nodes(degree: usize) -> Vec<f64> {
    let n = degree as f64;
    (0..=degree)
        .map(|j| (std::f64::consts::PI * j as f64 / n).cos())
        .collect()
}

/// First-derivative matrix on the Lobatto nodes (Trefethen's `cheb`).
pub fn differentiation_matrix(degree: usize) -> DMatrix<f64> {
    let x = lobatto_nodes(degree);
    let m = degree + 1;
    let c: Vec<f64> = (0..m)
        .map(|i| {
            let edge = if i == 0 || i == degree { 2.0 } else { 1.0 };
            if i % 2 == 0 {
                edge
            } else {
                -edge
            }
        })
        .collect();
    let mut d = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                d[(i, j)] = c[i] / c[j] / (x[i] - x[j]);
            }
        }
    }
    // negative-sum trick for the diagonal
    for i in 0..m {
        let s: f64 = (0..m).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

/// Cumulative integration on the Lobatto nodes: `(Q f)_j = int_{-1}^{x_j} p`
/// where `p` interpolates `f`.
pub fn integration_matrix(degree: usize) -> DMatrix<f64> {
    let x = lobatto_nodes(degree);
    let m = degree + 1;
    let v = DMatrix::from_fn(m, m, |k, n| (n as f64 * (std::f64::consts::PI * k as f64 / degree as f64)).cos());
    let cheb = |n: usize, x: f64| (n as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    let antiderivative = |n: usize, x: f64| match n {
        0 => x,
        1 => 0.5 * x * x,
        _ => 0.5 * (cheb(n + 1, x) / (n as f64 + 1.0) - cheb(n - 1, x) / (n as f64 - 1.0)),
    };
    let w = DMatrix::from_fn(m, m, |j, n| antiderivative(n, x[j]) - antiderivative(n, -1.0));
    w * v.try_inverse().expect("Chebyshev Vandermonde matrix is invertible")
}

/// Barycentric weights for the Lobatto nodes.
pub fn barycentric_weights(degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|j| {
            let w = if j == 0 || j == degree { 0.5 } else { 1.0 };
            if j % 2 == 0 {
                w
            } else {
                -w
            }
        })
        .collect()
}

/// Element breakpoints `0, g^(K-1), ..., g, 1` graded geometrically toward 0.
pub fn graded_breakpoints(elements: usize, grading: f64) -> Vec<f64> {
    let mut b = Vec::with_capacity(elements + 1);
    b.push(0.0);
    for j in 1..elements {
        b.push(grading.powi((elements - j) as i32));
    }
    b.push(1.0);
    b
}

/// A continuous piecewise polynomial on `[0, 1]` stored by nodal values of the
/// function and its first two derivatives on each element.
#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev {
    breakpoints: Vec<f64>,
    degree: usize,
    reference: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl PiecewiseChebyshev {
    /// Builds the interpolant from nodal values; derivatives are obtained by
    /// spectral differentiation on each element.
    pub fn from_nodal_values(breakpoints: Vec<f64>, degree: usize, values: Vec<Vec<f64>>) -> Self {
        let d = differentiation_matrix(degree);
        let mut first = Vec::with_capacity(values.len());
        let mut second = Vec::with_capacity(values.len());
        for (e, v) in values.iter().enumerate() {
            let scale = 2.0 / (breakpoints[e + 1] - breakpoints[e]);
            let vv = nalgebra::DVector::from_column_slice(v);
            let d1 = &d * &vv * scale;
            let d2 = &d * &d1 * scale;
            first.push(d1.iter().copied().collect());
            second.push(d2.iter().copied().collect());
        }
        Self {
            breakpoints,
            degree,
            reference: lobatto_nodes(degree),
            weights: barycentric_weights(degree),
            values,
            first,
            second,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Node positions of element `e` in `t`.
    pub fn element_nodes(&self, e: usize) -> Vec<f64> {
        let (a, b) = (self.breakpoints[e], self.breakpoints[e + 1]);
        self.reference
            .iter()
            .map(|x| a + 0.5 * (x + 1.0) * (b - a))
            .collect()
    }

    pub fn nodal_values(&self, e: usize) -> &[f64] {
        &self.values[e]
    }

    fn locate(&self, t: f64) -> usize {
        let k = self.breakpoints.len() - 1;
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(k - 1),
            Err(i) => i.saturating_sub(1).min(k - 1),
        }
    }

    fn interpolate(&self, data: &[f64], e: usize, t: f64) -> f64 {
        let (a, b) = (self.breakpoints[e], self.breakpoints[e + 1]);
        let x = 2.0 * (t - a) / (b - a) - 1.0;
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&xj, &wj)) in self.reference.iter().zip(&self.weights).enumerate() {
            let dx = x - xj;
            if dx == 0.0 {
                return data[j];
            }
            let c = wj / dx;
            num += c * data[j];
            den += c;
        }
        num / den
    }

    /// `(f, f_t, f_tt)` at `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let e = self.locate(t);
        (
            self.interpolate(&self.values[e], e, t),
            self.interpolate(&self.first[e], e, t),
            self.interpolate(&self.second[e], e, t),
        )
    }
}
