//! Small derivative-free maximizers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on [lo, hi].
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CoordinateOptions {
    /// Each line search covers [x - span, x + span].
    pub span: f64,
    pub max_sweeps: usize,
    pub line_tol: f64,
    /// Stop once a sweep improves the objective by less than this.
    pub converge: f64,
}

impl Default for CoordinateOptions {
    fn default() -> Self {
        CoordinateOptions {
            span: std::f64::consts::PI,
            max_sweeps: 500,
            line_tol: 1e-10,
            converge: 1e-14,
        }
    }
}

/// Cyclic coordinate ascent with a golden-section line search per coordinate.
pub fn coordinate_ascent(
    f: impl Fn(&[f64]) -> f64,
    x0: Vec<f64>,
    opts: &CoordinateOptions,
) -> (Vec<f64>, f64) {
    let mut x = x0;
    let mut best = f(&x);
    for _ in 0..opts.max_sweeps {
        let start = best;
        for k in 0..x.len() {
            let centre = x[k];
            let mut probe = x.clone();
            let (xk, fk) = golden_section_max(
                |t| {
                    probe[k] = t;
                    f(&probe)
                },
                centre - opts.span,
                centre + opts.span,
                opts.line_tol,
            );
            if fk > best {
                x[k] = xk;
                best = fk;
            }
        }
        if best - start < opts.converge {
            break;
        }
    }
    (x, best)
}

#[derive(Clone, Copy, Debug)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iter: 400,
            grad_tol: 1e-9,
            step: 1e-6,
        }
    }
}

fn gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|k| {
            p[k] = x[k] + h;
            let up = f(&p);
            p[k] = x[k] - h;
            let down = f(&p);
            p[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Quasi-Newton (BFGS) ascent with central-difference gradients and a
/// backtracking line search.
pub fn bfgs_max(f: impl Fn(&[f64]) -> f64, x0: Vec<f64>, opts: &BfgsOptions) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut g = gradient(&f, &x, opts.step);
    // Inverse Hessian approximation of -f.
    let mut h = vec![vec![0.0; n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..opts.max_iter {
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < opts.grad_tol {
            break;
        }
        let mut dir: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * g[j]).sum()).collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, g)| d * g).sum();
        if slope <= 0.0 {
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = 1.0;
            }
            dir = g.clone();
            slope = gnorm * gnorm;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let fc = f(&cand);
            if fc >= fx + 1e-4 * t * slope {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fxn)) = accepted else { break };
        let gn = gradient(&f, &xn, opts.step);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        // y for the minimization of -f.
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let improved = fxn - fx;
        x = xn;
        fx = fxn;
        g = gn;
        if improved.abs() < 1e-16 {
            break;
        }
    }
    (x, fx)
}
