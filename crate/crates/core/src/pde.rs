//! The limiting heat equation: stationary solutions, a Crank-Nicolson
//! solver for the three boundary regimes, test functions and their
//! boundary conditions, and the corrected discrete test functions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::model::{ModelParams, Regime};

#[derive(Clone)]
enum Shape {
    Sin(f64),
    Cos(f64),
    Const(f64),
    Exp,
    /// `cos(l u) + (a / l) sin(l u)`.
    RobinMode { l: f64, a: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A smooth function on `[0, 1]` with first and second derivatives.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    /// Boundary regime whose conditions this function is built to satisfy.
    pub regime: Option<Regime>,
    shape: Shape,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("regime", &self.regime)
            .finish()
    }
}

impl TestFunction {
    /// `sin(k pi u)`.
    pub fn sin_k(k: u32) -> Self {
        TestFunction {
            name: format!("sin_{k}"),
            regime: Some(Regime::Dirichlet),
            shape: Shape::Sin(k as f64 * PI),
        }
    }

    /// `cos(k pi u)`.
    pub fn cos_k(k: u32) -> Self {
        TestFunction {
            name: format!("cos_{k}"),
            regime: Some(Regime::Neumann),
            shape: Shape::Cos(k as f64 * PI),
        }
    }

    pub fn constant(c: f64) -> Self {
        TestFunction {
            name: "one".into(),
            regime: Some(Regime::Neumann),
            shape: Shape::Const(c),
        }
    }

    /// `e^u`, with no declared regime.
    pub fn exp() -> Self {
        TestFunction {
            name: "exp".into(),
            regime: None,
            shape: Shape::Exp,
        }
    }

    /// `k`-th eigenfunction of the second derivative under the Robin
    /// conditions of `params`; it satisfies them at every even order.
    pub fn robin_mode(params: &ModelParams, k: u32) -> Self {
        let a = params.alpha_l / params.alpha;
        let b = params.alpha_r / params.alpha;
        TestFunction {
            name: format!("robin_{k}"),
            regime: Some(Regime::Robin),
            shape: Shape::RobinMode {
                l: robin_root(a, b, k.max(1)),
                a,
            },
        }
    }

    /// Wraps an arbitrary closure; derivatives use a five-point stencil, so
    /// `f` must be defined slightly beyond `[0, 1]`.
    pub fn custom<F>(name: &str, regime: Option<Regime>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TestFunction {
            name: name.into(),
            regime,
            shape: Shape::Custom(Arc::new(f)),
        }
    }

    /// Looks up `sin_<k>`, `cos_<k>`, `robin_<k>`, `robin_adapted`, `one`
    /// or `exp`.
    pub fn by_name(name: &str, params: &ModelParams) -> Result<Self> {
        let unknown = || Error::InvalidArgument(format!("unknown test function `{name}`"));
        let index = |s: &str| s.parse::<u32>().ok().filter(|&k| k >= 1).ok_or_else(unknown);
        match name {
            "one" => Ok(Self::constant(1.0)),
            "exp" => Ok(Self::exp()),
            "robin_adapted" => Ok(Self::robin_mode(params, 1)),
            _ => {
                if let Some(k) = name.strip_prefix("sin_") {
                    Ok(Self::sin_k(index(k)?))
                } else if let Some(k) = name.strip_prefix("cos_") {
                    Ok(Self::cos_k(index(k)?))
                } else if let Some(k) = name.strip_prefix("robin_") {
                    Ok(Self::robin_mode(params, index(k)?))
                } else {
                    Err(unknown())
                }
            }
        }
    }

    /// Default test functions for the regime of `params`.
    pub fn catalog(params: &ModelParams) -> Vec<TestFunction> {
        match params.regime() {
            Regime::Dirichlet => vec![Self::sin_k(1), Self::sin_k(2)],
            Regime::Robin => vec![Self::robin_mode(params, 1), Self::robin_mode(params, 2)],
            Regime::Neumann => vec![Self::constant(1.0), Self::cos_k(1)],
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Sin(w) => (w * u).sin(),
            Shape::Cos(w) => (w * u).cos(),
            Shape::Const(c) => *c,
            Shape::Exp => u.exp(),
            Shape::RobinMode { l, a } => (l * u).cos() + a / l * (l * u).sin(),
            Shape::Custom(f) => f(u),
        }
    }

    pub fn d1(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Sin(w) => w * (w * u).cos(),
            Shape::Cos(w) => -w * (w * u).sin(),
            Shape::Const(_) => 0.0,
            Shape::Exp => u.exp(),
            Shape::RobinMode { l, a } => -l * (l * u).sin() + a * (l * u).cos(),
            Shape::Custom(f) => {
                let h = 1e-3;
                (f(u - 2.0 * h) - 8.0 * f(u - h) + 8.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h)
            }
        }
    }

    pub fn d2(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Sin(w) => -w * w * (w * u).sin(),
            Shape::Cos(w) => -w * w * (w * u).cos(),
            Shape::Const(_) => 0.0,
            Shape::Exp => u.exp(),
            Shape::RobinMode { l, .. } => -l * l * self.value(u),
            Shape::Custom(f) => {
                let h = 1e-3;
                (-f(u - 2.0 * h) + 16.0 * f(u - h) - 30.0 * f(u) + 16.0 * f(u + h) - f(u + 2.0 * h))
                    / (12.0 * h * h)
            }
        }
    }

    /// Sup norms of `G`, `G'`, `G''` sampled on a fine grid.
    pub fn sup_norms(&self) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for i in 0..=2000 {
            let u = i as f64 / 2000.0;
            out[0] = out[0].max(self.value(u).abs());
            out[1] = out[1].max(self.d1(u).abs());
            out[2] = out[2].max(self.d2(u).abs());
        }
        out
    }
}

/// `k`-th positive root of `(l^2 - ab) sin l = (a + b) l cos l`, which lies in
/// `((k-1) pi, k pi)`.
fn robin_root(a: f64, b: f64, k: u32) -> f64 {
    let f = |l: f64| (l * l - a * b) * l.sin() - (a + b) * l * l.cos();
    let mut lo = (k as f64 - 1.0) * PI + 1e-12;
    let mut hi = k as f64 * PI;
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Boundary residuals of a test function for one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcCheck {
    pub left: f64,
    pub right: f64,
    pub pass: bool,
}

/// Checks the order-zero boundary conditions of `regime`. The derivative at
/// `1` is taken in the direction of decreasing `u`.
pub fn check_bc(g: &TestFunction, regime: Regime, params: &ModelParams, tol: f64) -> BcCheck {
    let (left, right) = match regime {
        Regime::Dirichlet => (g.value(0.0).abs(), g.value(1.0).abs()),
        Regime::Robin => (
            (g.d1(0.0) - params.alpha_l / params.alpha * g.value(0.0)).abs(),
            (-g.d1(1.0) - params.alpha_r / params.alpha * g.value(1.0)).abs(),
        ),
        Regime::Neumann => (g.d1(0.0).abs(), g.d1(1.0).abs()),
    };
    BcCheck {
        left,
        right,
        pass: left <= tol && right <= tol,
    }
}

/// Stationary solution of the macroscopic equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarySolution {
    pub regime: Regime,
    offset: f64,
    slope: f64,
}

impl StationarySolution {
    pub fn value(&self, u: f64) -> f64 {
        self.offset + self.slope * u
    }

    pub fn d1(&self) -> f64 {
        self.slope
    }
}

/// Linear in the Dirichlet and Robin regimes, constant in the Neumann one.
pub fn stationary_solution(params: &ModelParams) -> StationarySolution {
    HeatProblem::from_params(params).stationary()
}

/// Boundary data of the heat equation `d_t theta = alpha d_uu theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatProblem {
    pub alpha: f64,
    pub regime: Regime,
    pub theta_l: f64,
    pub theta_r: f64,
    /// `alpha_l / alpha`: Robin coefficient, and the Neumann weight of `theta_l`.
    pub robin_l: f64,
    /// `alpha_r / alpha`.
    pub robin_r: f64,
}

impl HeatProblem {
    pub fn from_params(params: &ModelParams) -> Self {
        HeatProblem {
            alpha: params.alpha,
            regime: params.regime(),
            theta_l: params.theta_l,
            theta_r: params.theta_r,
            robin_l: params.alpha_l / params.alpha,
            robin_r: params.alpha_r / params.alpha,
        }
    }

    pub fn stationary(&self) -> StationarySolution {
        let (tl, tr) = (self.theta_l, self.theta_r);
        let (offset, slope) = match self.regime {
            Regime::Dirichlet => (tl, tr - tl),
            Regime::Robin => {
                let sl = 1.0 / self.robin_l;
                let sr = 1.0 / self.robin_r;
                let d = sl + 1.0 + sr;
                (tl + (tr - tl) * sl / d, (tr - tl) / d)
            }
            Regime::Neumann => (
                (self.robin_l * tl + self.robin_r * tr) / (self.robin_l + self.robin_r),
                0.0,
            ),
        };
        StationarySolution {
            regime: self.regime,
            offset,
            slope,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatGrid {
    /// Number of space intervals; nodes are `j / J`.
    pub j: usize,
    pub dt: f64,
}

impl HeatGrid {
    /// `dt = 0.5 / J^2`.
    pub fn new(j: usize) -> Self {
        HeatGrid {
            j,
            dt: 0.5 / (j * j) as f64,
        }
    }
}

/// Grid values of a solution at the requested times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumProfile {
    pub regime: Regime,
    pub u: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[i][j]` is `theta(times[i], u[j])`.
    pub values: Vec<Vec<f64>>,
}

impl ContinuumProfile {
    /// Trapezoid approximation of `int G theta(times[i]) du`.
    pub fn pairing(&self, i: usize, g: &TestFunction) -> f64 {
        trapezoid(&self.u, |j| g.value(self.u[j]) * self.values[i][j])
    }

    /// Linear interpolation of `theta(times[i], .)` at `u`.
    pub fn interpolate(&self, i: usize, u: f64) -> f64 {
        let j_max = self.u.len() - 1;
        let s = (u * j_max as f64).clamp(0.0, j_max as f64);
        let j = (s.floor() as usize).min(j_max - 1);
        let w = s - j as f64;
        (1.0 - w) * self.values[i][j] + w * self.values[i][j + 1]
    }
}

pub(crate) fn trapezoid(u: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let m = u.len() - 1;
    let h = u[1] - u[0];
    h * (0.5 * f(0) + (1..m).map(&f).sum::<f64>() + 0.5 * f(m))
}

/// Crank-Nicolson solve with ghost-point boundary rows, sampled at the
/// increasing `times` (the initial condition is `theta0` at `t = 0`).
pub fn solve_heat<F>(problem: &HeatProblem, theta0: F, times: &[f64], grid: HeatGrid) -> Result<ContinuumProfile>
where
    F: Fn(f64) -> f64,
{
    let jn = grid.j;
    if jn < 9 {
        return Err(Error::GridTooCoarse(jn.saturating_sub(1)));
    }
    if grid.dt.is_nan() || grid.dt <= 0.0 {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("times must be non-negative and increasing".into()));
    }
    let h = 1.0 / jn as f64;
    let u: Vec<f64> = (0..=jn).map(|j| j as f64 * h).collect();
    let mut theta: Vec<f64> = u.iter().map(|&x| theta0(x)).collect();
    let dirichlet = problem.regime == Regime::Dirichlet;
    if dirichlet {
        theta[0] = problem.theta_l;
        theta[jn] = problem.theta_r;
    }
    let (a, b) = match problem.regime {
        Regime::Robin => (problem.robin_l, problem.robin_r),
        _ => (0.0, 0.0),
    };
    // theta' = M theta + s on the unknown nodes.
    let k = problem.alpha / (h * h);
    let (lo, hi) = if dirichlet { (1, jn - 1) } else { (0, jn) };
    let m = hi - lo + 1;
    let mut ms = vec![0.0; m];
    let mut md = vec![0.0; m];
    let mut mp = vec![0.0; m];
    let mut src = vec![0.0; m];
    for (i, j) in (lo..=hi).enumerate() {
        if j == 0 {
            md[i] = -2.0 * k * (1.0 + h * a);
            mp[i] = 2.0 * k;
            src[i] = 2.0 * k * h * a * problem.theta_l;
        } else if j == jn {
            ms[i] = 2.0 * k;
            md[i] = -2.0 * k * (1.0 + h * b);
            src[i] = 2.0 * k * h * b * problem.theta_r;
        } else {
            ms[i] = k;
            md[i] = -2.0 * k;
            mp[i] = k;
            if dirichlet && j == 1 {
                ms[i] = 0.0;
                src[i] = k * problem.theta_l;
            }
            if dirichlet && j == jn - 1 {
                mp[i] = 0.0;
                src[i] += k * problem.theta_r;
            }
        }
    }
    let mut t = 0.0;
    let mut values = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / grid.dt).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            let sub: Vec<f64> = ms.iter().map(|v| -0.5 * dt * v).collect();
            let diag: Vec<f64> = md.iter().map(|v| 1.0 - 0.5 * dt * v).collect();
            let sup: Vec<f64> = mp.iter().map(|v| -0.5 * dt * v).collect();
            for _ in 0..steps {
                let x = &theta[lo..=hi];
                let rhs: Vec<f64> = (0..m)
                    .map(|i| {
                        let mut r = x[i] + 0.5 * dt * md[i] * x[i] + dt * src[i];
                        if i > 0 {
                            r += 0.5 * dt * ms[i] * x[i - 1];
                        }
                        if i + 1 < m {
                            r += 0.5 * dt * mp[i] * x[i + 1];
                        }
                        r
                    })
                    .collect();
                let next = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
                theta[lo..=hi].copy_from_slice(&next);
            }
        }
        t = target;
        values.push(theta.clone());
    }
    Ok(ContinuumProfile {
        regime: problem.regime,
        u,
        times: times.to_vec(),
        values,
    })
}

/// `N^2 (G((x+1)/N) - 2 G(x/N) + G((x-1)/N))` on `0..=N` (zero at the ends).
pub fn discrete_laplacian(g: &TestFunction, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut out = vec![0.0; n + 1];
    for x in 1..n {
        let u = x as f64 / nf;
        out[x] = nf * nf * (g.value(u + 1.0 / nf) - 2.0 * g.value(u) + g.value(u - 1.0 / nf));
    }
    out
}

/// Discrete modification `G_N` of a test function with `G(0) = G(1) = 0`:
/// it vanishes at `0` and `N`, and the single dual walk generator maps it
/// to `alpha` times the discrete Laplacian of `G` on the bulk.
pub fn corrected_test_function(params: &ModelParams, g: &TestFunction) -> Result<Vec<f64>> {
    if params.beta >= 1.0 {
        return Err(Error::WrongRegime(params.beta));
    }
    let n = params.n;
    let nf = n as f64;
    let nb = nf.powf(params.beta);
    let kl = params.alpha * nb / params.alpha_l;
    let kr = params.alpha * nb / params.alpha_r;
    let g1 = g.value(1.0 / nf);
    let gn1 = g.value((nf - 1.0) / nf);
    let c_n = ((kl - 1.0) * g1 + (1.0 - kr) * gn1) / ((kl + nf - 2.0 + kr) / nf);
    let c = kl * (g1 - c_n / nf);
    let mut out = vec![0.0; n + 1];
    out[1] = c;
    for (x, v) in out.iter_mut().enumerate().take(n).skip(2) {
        *v = c + g.value(x as f64 / nf) - g1 - (x as f64 - 1.0) * c_n / nf;
    }
    Ok(out)
}
