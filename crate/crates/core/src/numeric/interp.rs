//! Monotone cubic interpolation (Fritsch-Carlson) and a guarded log-log table.

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes: preserves
/// monotonicity of the data and never overshoots between nodes.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// `x` strictly increasing, `y` same length (>= 2).
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, &'static str> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err("need at least two nodes and matching lengths");
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err("abscissae must be strictly increasing");
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err("nonfinite table entry");
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = s[0];
            d[1] = s[0];
        } else {
            for i in 1..n - 1 {
                if s[i - 1] * s[i] <= 0.0 {
                    d[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], s[0], s[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        }
        Ok(Pchip { x, y, d })
    }

    fn segment(&self, xq: f64) -> usize {
        // clamp outside the table to the boundary segment
        let n = self.x.len();
        if xq <= self.x[0] {
            return 0;
        }
        if xq >= self.x[n - 2] {
            return n - 2;
        }
        self.x.partition_point(|&v| v <= xq) - 1
    }

    /// Evaluate at `xq`; linear continuation of the boundary cubic outside the table.
    pub fn eval(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn eval_derivative(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        (dh00 * self.y[i] + dh01 * self.y[i + 1]) / h + dh10 * self.d[i] + dh11 * self.d[i + 1]
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

/// Three-point end slope with the Fritsch-Carlson monotonicity clamp.
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() {
        0.0
    } else if s0.signum() != s1.signum() && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

/// Table of a positive function sampled on positive abscissae, interpolated
/// linearly in (ln x, ln y). Nonpositive table values are skipped; queries
/// below the table return 0 and queries above hold the last value. Used for
/// tabulated eigenfunction surrogates where positivity and tail behavior
/// matter more than smoothness.
#[derive(Debug, Clone)]
pub struct LogLogTable {
    lx: Vec<f64>,
    ly: Vec<f64>,
}

impl LogLogTable {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, &'static str> {
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        for &(x, y) in points {
            if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                lx.push(x.ln());
                ly.push(y.ln());
            }
        }
        if lx.len() < 2 {
            return Err("fewer than two positive table points");
        }
        if lx.windows(2).any(|w| w[1] <= w[0]) {
            return Err("abscissae must be strictly increasing");
        }
        Ok(LogLogTable { lx, ly })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let l = x.ln();
        let n = self.lx.len();
        if l < self.lx[0] {
            return 0.0;
        }
        if l >= self.lx[n - 1] {
            return self.ly[n - 1].exp();
        }
        let i = self.lx.partition_point(|&v| v <= l) - 1;
        let t = (l - self.lx[i]) / (self.lx[i + 1] - self.lx[i]);
        (self.ly[i] * (1.0 - t) + self.ly[i + 1] * t).exp()
    }
}
