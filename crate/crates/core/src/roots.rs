//! Bracketing root finding: a sign-change scan to isolate roots, then Brent's
//! method (bisection safeguarded inverse quadratic interpolation).
//!
//! Both stages take fallible closures so index-evaluation errors propagate
//! instead of being turned into NaNs.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// Outcome of scanning an interval for sign changes.
#[derive(Debug, Clone, PartialEq)]
pub enum Scan {
    /// Brackets around each isolated root. A bracket with `lo == hi` marks a
    /// sample where the function is exactly zero.
    Roots(Vec<Bracket>),
    /// No sign change and no zero; carries the sign of the function.
    NoRoot { positive: bool },
    /// The function vanishes on two or more consecutive samples.
    Degenerate,
}

pub fn scan<F, E>(mut f: F, lo: f64, hi: f64, samples: usize) -> Result<Scan, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    assert!(samples >= 2 && lo < hi);
    let step = (hi - lo) / (samples - 1) as f64;
    let x_at = |i: usize| if i == samples - 1 { hi } else { lo + step * i as f64 };
    let mut brackets = Vec::new();
    let mut prev_x = lo;
    let mut prev = f(lo)?;
    if prev == 0.0 {
        brackets.push(Bracket { lo, hi: lo });
    }
    for i in 1..samples {
        let x = x_at(i);
        let y = f(x)?;
        if y == 0.0 {
            if prev == 0.0 {
                return Ok(Scan::Degenerate);
            }
            brackets.push(Bracket { lo: x, hi: x });
        } else if prev != 0.0 && (prev < 0.0) != (y < 0.0) {
            brackets.push(Bracket { lo: prev_x, hi: x });
        }
        prev_x = x;
        prev = y;
    }
    if brackets.is_empty() {
        Ok(Scan::NoRoot { positive: prev > 0.0 })
    } else {
        Ok(Scan::Roots(brackets))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("endpoints f({lo}) and f({hi}) do not bracket a root")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("no convergence after {0} iterations")]
    IterationLimit(usize),
}

pub const MAX_ITERATIONS: usize = 200;

/// Brent's method on a bracket whose endpoints have opposite signs (or one
/// of which is zero). Converges until the bracket is narrower than
/// `x_tol` plus a few ulps of the root.
pub fn brent<F, E>(mut f: F, bracket: Bracket, x_tol: f64) -> Result<Result<f64, RootError>, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Ok(a));
    }
    if fb == 0.0 {
        return Ok(Ok(b));
    }
    if (fa < 0.0) == (fb < 0.0) {
        return Ok(Err(RootError::NotBracketed { lo: a, hi: b }));
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITERATIONS {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Ok(b));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * m * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(Err(RootError::IterationLimit(MAX_ITERATIONS)))
}
