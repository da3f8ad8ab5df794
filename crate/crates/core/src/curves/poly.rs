//! Per-span power-basis form of B-spline basis functions.

/// Basis functions of one knot span written as polynomials in the local
/// coordinate `t = u - knots[span]`.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    pub span: usize,
    pub start: f64,
    pub end: f64,
    /// `coeffs[j][k]` is the `t^k` coefficient of basis `span - p + j`.
    pub coeffs: Vec<Vec<f64>>,
}

impl SpanBasis {
    /// Build the `p + 1` non-zero basis polynomials on `[knots[span], knots[span+1])`
    /// by running the Cox–de Boor recursion on polynomials.
    pub fn new(knots: &[f64], p: usize, span: usize) -> Self {
        let a = knots[span];
        // level-0: only N_{span,0} = 1
        let mut level: Vec<Vec<f64>> = vec![vec![1.0]];
        for d in 1..=p {
            // functions span-d ..= span of degree d
            let mut next = Vec::with_capacity(d + 1);
            for r in 0..=d {
                let i = span - d + r;
                let mut poly = vec![0.0; d + 1];
                // left term uses N_{i,d-1} which is level[r-1] (index shift)
                if r >= 1 {
                    let denom = knots[i + d] - knots[i];
                    if denom > 0.0 {
                        let prev = &level[r - 1];
                        // (u - u_i)/denom = (t + a - u_i)/denom
                        let c0 = (a - knots[i]) / denom;
                        let c1 = 1.0 / denom;
                        for (k, &pk) in prev.iter().enumerate() {
                            poly[k] += c0 * pk;
                            poly[k + 1] += c1 * pk;
                        }
                    }
                }
                if r < d {
                    let denom = knots[i + d + 1] - knots[i + 1];
                    if denom > 0.0 {
                        let prev = &level[r];
                        // (u_{i+d+1} - u)/denom = (u_{i+d+1} - a - t)/denom
                        let c0 = (knots[i + d + 1] - a) / denom;
                        let c1 = -1.0 / denom;
                        for (k, &pk) in prev.iter().enumerate() {
                            poly[k] += c0 * pk;
                            poly[k + 1] += c1 * pk;
                        }
                    }
                }
                next.push(poly);
            }
            level = next;
        }
        Self { span, start: a, end: knots[span + 1], coeffs: level }
    }

    /// Basis values and first/second derivatives at local coordinate `t`.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = self.coeffs.len();
        let mut v = vec![0.0; m];
        let mut d1 = vec![0.0; m];
        let mut d2 = vec![0.0; m];
        for (j, c) in self.coeffs.iter().enumerate() {
            let (a, b, e) = horner3(c, t);
            v[j] = a;
            d1[j] = b;
            d2[j] = e;
        }
        (v, d1, d2)
    }

    /// Combine control values into the span polynomial `sum_j c_j N_j(t)`.
    pub fn combine(&self, values: &[f64]) -> Vec<f64> {
        let first = self.span + 1 - self.coeffs.len();
        let deg = self.coeffs[0].len();
        let mut out = vec![0.0; deg];
        for (j, c) in self.coeffs.iter().enumerate() {
            let w = values[first + j];
            for k in 0..deg {
                out[k] += w * c[k];
            }
        }
        out
    }

    pub fn first_index(&self) -> usize {
        self.span + 1 - self.coeffs.len()
    }
}

/// Value, first and second derivative of a polynomial by Horner's rule.
pub fn horner3(c: &[f64], t: f64) -> (f64, f64, f64) {
    let mut v = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for &ck in c.iter().rev() {
        d2 = d2 * t + 2.0 * d1;
        d1 = d1 * t + v;
        v = v * t + ck;
    }
    (v, d1, d2)
}
