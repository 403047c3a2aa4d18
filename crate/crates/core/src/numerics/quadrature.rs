//! Gauss–Hermite and Gauss–Legendre rules.
//!
//! Nodes are the eigenvalues of the Jacobi matrix of the orthonormal
//! polynomial family (Golub–Welsch), found with an implicit QL sweep on the
//! symmetric tridiagonal matrix and then polished by Newton steps on the
//! three-term recurrence. Weights come from the Christoffel function
//! `w_i = 1 / sum_k p_k(x_i)^2`, which keeps full relative accuracy even for
//! the tiny outer Hermite weights.

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// Weight `exp(-t^2)` on the real line.
    Hermite,
    /// Weight `1` on `[-1, 1]`.
    Legendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(x_i)` against the rule's own weight function.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Legendre rule mapped onto `[a, b]`.
    pub fn integrate_interval<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        debug_assert_eq!(self.kind, RuleKind::Legendre);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|t| f(mid + half * t))
    }

    /// Composite Legendre rule on `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate_interval(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// `n`-point Gauss–Hermite rule for `∫ f(t) exp(-t^2) dt`.
///
/// For `n` above roughly 360 the outermost weights underflow `f64` and are
/// returned as exact zeros.
pub fn gauss_hermite(n: usize) -> Result<QuadratureRule> {
    check_order(n)?;
    let family = Family {
        p0: std::f64::consts::PI.powf(-0.25),
        coupling: |k| (k as f64 / 2.0).sqrt(),
    };
    Ok(family.rule(n, RuleKind::Hermite))
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    check_order(n)?;
    let family = Family {
        p0: std::f64::consts::FRAC_1_SQRT_2,
        coupling: |k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        },
    };
    Ok(family.rule(n, RuleKind::Legendre))
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::range("quadrature order", n as f64));
    }
    Ok(())
}

/// Orthonormal family with zero recurrence diagonal:
/// `x p_k = b_{k+1} p_{k+1} + b_k p_{k-1}`.
struct Family<B: Fn(usize) -> f64> {
    p0: f64,
    coupling: B,
}

const RESCALE_AT: f64 = 1e100;

impl<B: Fn(usize) -> f64> Family<B> {
    fn rule(&self, n: usize, kind: RuleKind) -> QuadratureRule {
        let b: Vec<f64> = (0..=n)
            .map(|k| if k == 0 { 0.0 } else { (self.coupling)(k) })
            .collect();

        let mut diag = vec![0.0; n];
        let mut off: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { b[i + 1] } else { 0.0 })
            .collect();
        tridiagonal_eigenvalues(&mut diag, &mut off);
        diag.sort_by(|a, b| a.total_cmp(b));

        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &guess in &diag {
            let x = self.polish(guess, n, &b);
            nodes.push(x);
            weights.push(self.christoffel_weight(x, n, &b));
        }
        symmetrize(&mut nodes, &mut weights);
        QuadratureRule {
            nodes,
            weights,
            kind,
        }
    }

    /// Returns `(p_n, p_n', sum_{k<n} p_k^2, decades)` where the true values
    /// are the returned ones times `10^(100 * decades)` (squared for the sum).
    fn evaluate(&self, x: f64, n: usize, b: &[f64]) -> (f64, f64, f64, i32) {
        let (mut p_prev, mut p) = (0.0, self.p0);
        let (mut dp_prev, mut dp) = (0.0, 0.0);
        let mut sum = 0.0;
        let mut decades = 0;
        for k in 0..n {
            sum += p * p;
            let p_next = (x * p - b[k] * p_prev) / b[k + 1];
            let dp_next = (p + x * dp - b[k] * dp_prev) / b[k + 1];
            p_prev = p;
            p = p_next;
            dp_prev = dp;
            dp = dp_next;
            if p.abs() > RESCALE_AT {
                let s = 1.0 / RESCALE_AT;
                p *= s;
                p_prev *= s;
                dp *= s;
                dp_prev *= s;
                sum *= s * s;
                decades += 1;
            }
        }
        (p, dp, sum, decades)
    }

    fn polish(&self, mut x: f64, n: usize, b: &[f64]) -> f64 {
        for _ in 0..8 {
            let (p, dp, _, _) = self.evaluate(x, n, b);
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                break;
            }
        }
        x
    }

    fn christoffel_weight(&self, x: f64, n: usize, b: &[f64]) -> f64 {
        let (_, _, sum, decades) = self.evaluate(x, n, b);
        let mut w = 1.0 / sum;
        for _ in 0..decades {
            w /= RESCALE_AT * RESCALE_AT;
        }
        w
    }
}

/// Enforces `x_i = -x_{n-1-i}` and equal mirrored weights.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson
/// shifts. `off[i]` couples rows `i` and `i + 1`; it is destroyed. The
/// eigenvalues are left in `diag`.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    if n < 2 {
        return;
    }
    let norm = diag
        .iter()
        .zip(off.iter())
        .map(|(d, e)| d.abs() + 2.0 * e.abs())
        .fold(0.0, f64::max);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd.max(norm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations < 100, "tridiagonal QL failed to converge");

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}
