//! Stationary dual moments: the harmonic profile of the single dual walk,
//! the two-point function of the dual pair, the lookdown representation of
//! the pair generator, and absorption times of the single walk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmc::{PairKind, PairState, PairWalk};
use crate::linalg::{solve_tridiagonal, BandMatrix};
use crate::model::ModelParams;
use crate::rng::replica_rng;
use crate::stats::Estimate;

/// Default cap on `N` for the pair systems.
pub const TWO_POINT_CAP: usize = 256;

/// Values of a function on `0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileVector {
    pub values: Vec<f64>,
}

impl ProfileVector {
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn max_abs_diff(&self, other: &ProfileVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Jump rates `(left, right)` of one dual particle at bulk site `x`.
fn rates(params: &ModelParams, x: usize) -> (f64, f64) {
    let n = params.n;
    let bulk = params.bulk_speed() * params.alpha;
    let bs = params.boundary_speed();
    (
        if x == 1 { bs * params.alpha_l } else { bulk },
        if x == n - 1 { bs * params.alpha_r } else { bulk },
    )
}

/// Single dual walk generator applied to `f` on `0..=N` (zero at the
/// absorbing ends).
pub fn apply_a(params: &ModelParams, f: &[f64]) -> Vec<f64> {
    let n = params.n;
    let mut out = vec![0.0; n + 1];
    for x in 1..n {
        let (l, r) = rates(params, x);
        out[x] = l * (f[x - 1] - f[x]) + r * (f[x + 1] - f[x]);
    }
    out
}

/// Harmonic function of the single walk with end values `left`, `right`,
/// from the series-resistance formula.
pub fn harmonic(params: &ModelParams, left: f64, right: f64) -> ProfileVector {
    let n = params.n;
    let nb = (n as f64).powf(-params.beta);
    let mut inc = Vec::with_capacity(n);
    inc.push(1.0);
    inc.extend(std::iter::repeat_n(nb * params.alpha_l / params.alpha, n - 2));
    inc.push(params.alpha_l / params.alpha_r);
    let total: f64 = inc.iter().sum();
    let mut values = Vec::with_capacity(n + 1);
    values.push(left);
    let mut acc = 0.0;
    for (i, d) in inc.iter().enumerate() {
        acc += d;
        values.push(if i == n - 1 {
            right
        } else {
            left + (right - left) * (acc / total)
        });
    }
    ProfileVector { values }
}

/// Stationary first dual moment `h^N` with `h(0) = theta_l`, `h(N) = theta_r`.
pub fn stationary_profile(params: &ModelParams) -> ProfileVector {
    if params.theta_l == params.theta_r {
        return ProfileVector {
            values: vec![params.theta_l; params.n + 1],
        };
    }
    harmonic(params, params.theta_l, params.theta_r)
}

/// Same profile obtained from a tridiagonal solve of `A^N h = 0`.
pub fn stationary_profile_solve(params: &ModelParams) -> Result<ProfileVector> {
    let n = params.n;
    let m = n - 1;
    let (mut sub, mut diag, mut sup, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for x in 1..n {
        let (l, r) = rates(params, x);
        let i = x - 1;
        diag[i] = l + r;
        if x > 1 {
            sub[i] = -l;
        } else {
            rhs[i] += l * params.theta_l;
        }
        if x < n - 1 {
            sup[i] = -r;
        } else {
            rhs[i] += r * params.theta_r;
        }
    }
    let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(params.theta_l);
    values.extend(inner);
    values.push(params.theta_r);
    Ok(ProfileVector { values })
}

/// `max_x |A^N f(x)|` over the bulk.
pub fn harmonic_residual(params: &ModelParams, f: &ProfileVector) -> f64 {
    apply_a(params, &f.values).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// The closed form `theta_l + p(x) (theta_r - theta_l)` with
/// `p(x) = 1{x>0} / (N Z) * (N^beta/(alpha_l alpha) + (x-1)/alpha^2 + 1{x=N} N^beta/(alpha_r alpha))`
/// and `Z = (N^beta/(alpha_l alpha) + (N-1)/alpha^2 + N^beta/(alpha_r alpha)) / N`.
/// It differs from [`stationary_profile`] by `O(1/N)`.
pub fn profile_closed_form(params: &ModelParams) -> ProfileVector {
    let n = params.n;
    let nf = n as f64;
    let a = params.alpha;
    let nb = nf.powf(params.beta);
    let left = nb / (params.alpha_l * a);
    let right = nb / (params.alpha_r * a);
    let z = (left + (nf - 1.0) / (a * a) + right) / nf;
    let values = (0..=n)
        .map(|x| {
            let p = if x == 0 {
                0.0
            } else {
                let end = if x == n { right } else { 0.0 };
                (left + (x as f64 - 1.0) / (a * a) + end) / nf / z
            };
            params.theta_l + p * (params.theta_r - params.theta_l)
        })
        .collect();
    ProfileVector { values }
}

/// Symmetric matrix on `0..=N` x `0..=N` holding the stationary second dual
/// moment `k^N` together with `h^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub n: usize,
    pub h: Vec<f64>,
    /// Row-major `(N+1) x (N+1)` values of `k^N`.
    pub k: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.k[x * (self.n + 1) + y]
    }

    /// Centered covariance `k(x,y) - h(x) h(y)`.
    pub fn centered(&self, x: usize, y: usize) -> f64 {
        self.get(x, y) - self.h[x] * self.h[y]
    }

    /// Minimum of the centered covariance over bulk pairs.
    pub fn min_centered(&self) -> f64 {
        let mut m = f64::INFINITY;
        for x in 1..self.n {
            for y in 1..self.n {
                m = m.min(self.centered(x, y));
            }
        }
        m
    }

    /// Full centered covariance on the `(N+1) x (N+1)` grid.
    pub fn centered_grid(&self) -> Vec<f64> {
        let s = self.n + 1;
        (0..s * s).map(|i| self.centered(i / s, i % s)).collect()
    }
}

/// Index of the bulk pair `1 <= x <= y <= M` in lexicographic order.
fn pair_index(m: usize, x: usize, y: usize) -> usize {
    (x - 1) * m - (x - 1) * (x.saturating_sub(2)) / 2 + (y - x)
}

/// Solves the stationary two-point problem for the dual pair.
pub fn two_point(params: &ModelParams) -> Result<CorrelationMatrix> {
    two_point_with_cap(params, TWO_POINT_CAP)
}

pub fn two_point_with_cap(params: &ModelParams, cap: usize) -> Result<CorrelationMatrix> {
    let n = params.n;
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let h = stationary_profile(params).values;
    let s = n + 1;
    let mut k: Vec<f64> = (0..s * s).map(|i| h[i / s] * h[i % s]).collect();
    if params.theta_l == params.theta_r || n == 2 {
        return Ok(CorrelationMatrix { n, h, k });
    }
    let c = centered_two_point(params, &h)?;
    for x in 1..n {
        for y in 1..n {
            k[x * s + y] += c[x * s + y];
        }
    }
    Ok(CorrelationMatrix { n, h, k })
}

/// Solves `B c = -N^2 (h(x) - h(y))^2 1{|x-y| = 1}` on bulk pairs with `c = 0`
/// once a coordinate is absorbed; `k = h (x) h + c`.
fn centered_two_point(params: &ModelParams, h: &[f64]) -> Result<Vec<f64>> {
    let n = params.n;
    let m = n - 1;
    let dim = m * (m + 1) / 2;
    let n2 = params.bulk_speed();
    let mut a = BandMatrix::zeros(dim, m, m);
    let mut rhs = vec![0.0; dim];
    let sorted = |p: usize, q: usize| if p <= q { (p, q) } else { (q, p) };
    for x in 1..n {
        for y in x..n {
            let row = pair_index(m, x, y);
            let mut diag = 0.0;
            for (moving, other) in [(x, y), (y, x)] {
                let (l, r) = rates(params, moving);
                for (to, rate) in [(moving - 1, l), (moving + 1, r)] {
                    diag += rate;
                    if to != 0 && to != n {
                        let (p, q) = sorted(to, other);
                        a.add(row, pair_index(m, p, q), -rate);
                    }
                }
            }
            if y == x + 1 {
                diag += 2.0 * n2;
                a.add(row, pair_index(m, x, x), -n2);
                a.add(row, pair_index(m, y, y), -n2);
                rhs[row] = n2 * (h[x] - h[y]).powi(2);
            }
            a.add(row, row, diag);
        }
    }
    let sol = a.solve(&rhs)?;
    let s = n + 1;
    let mut c = vec![0.0; s * s];
    for x in 1..n {
        for y in x..n {
            let v = sol[pair_index(m, x, y)];
            c[x * s + y] = v;
            c[y * s + x] = v;
        }
    }
    Ok(c)
}

fn apply_pair(params: &ModelParams, f: &[f64], interaction: impl Fn(f64, f64, f64, f64) -> f64) -> Vec<f64> {
    let n = params.n;
    let s = n + 1;
    let n2 = params.bulk_speed();
    let mut out = vec![0.0; s * s];
    let at = |x: usize, y: usize| f[x * s + y];
    for x in 0..=n {
        for y in 0..=n {
            let mut v = 0.0;
            if x != 0 && x != n {
                let (l, r) = rates(params, x);
                v += l * (at(x - 1, y) - at(x, y)) + r * (at(x + 1, y) - at(x, y));
            }
            if y != 0 && y != n {
                let (l, r) = rates(params, y);
                v += l * (at(x, y - 1) - at(x, y)) + r * (at(x, y + 1) - at(x, y));
            }
            if x != 0 && x != n && y != 0 && y != n && x.abs_diff(y) == 1 {
                v += n2 * interaction(at(x, y), at(x, x), at(y, y), at(y, x));
            }
            out[x * s + y] = v;
        }
    }
    out
}

/// Symmetric pair generator applied to `f` on the `(N+1) x (N+1)` grid.
pub fn apply_b(params: &ModelParams, f: &[f64]) -> Vec<f64> {
    apply_pair(params, f, |fxy, fxx, fyy, _| (fxx - fxy) + (fyy - fxy))
}

/// Lookdown pair generator: the second coordinate jumps onto the first at
/// rate `2 N^2` when they are adjacent in the bulk.
pub fn apply_c(params: &ModelParams, f: &[f64]) -> Vec<f64> {
    apply_pair(params, f, |fxy, fxx, _, _| 2.0 * (fxx - fxy))
}

/// `max |B k|` over bulk pairs.
pub fn two_point_residual(params: &ModelParams, k: &CorrelationMatrix) -> f64 {
    let n = params.n;
    let bk = apply_b(params, &k.k);
    let mut m: f64 = 0.0;
    for x in 1..n {
        for y in 1..n {
            m = m.max(bk[x * (n + 1) + y].abs());
        }
    }
    m
}

/// Weighted pair inner product `(1/N^2) sum_{x,y in bulk} f g alpha (alpha + 1{x=y})`.
pub fn pair_inner_product(params: &ModelParams, f: &[f64], g: &[f64]) -> f64 {
    let n = params.n;
    let a = params.alpha;
    let mut acc = 0.0;
    for x in 1..n {
        for y in 1..n {
            let w = a * (a + if x == y { 1.0 } else { 0.0 });
            acc += f[x * (n + 1) + y] * g[x * (n + 1) + y] * w;
        }
    }
    acc / params.bulk_speed()
}

/// `|<<f, B g>> - <<B f, g>>|` for `f`, `g` vanishing once a coordinate is absorbed.
pub fn pair_symmetry_residual(params: &ModelParams, f: &[f64], g: &[f64]) -> f64 {
    (pair_inner_product(params, f, &apply_b(params, g)) - pair_inner_product(params, &apply_b(params, f), g)).abs()
}

/// Maximum over every symmetric indicator `f` and ordered pair `(x, y)` of
/// `|B f(x,y) - (C f(x,y) + C f(y,x)) / 2|`.
pub fn lookdown_generator_check(params: &ModelParams) -> f64 {
    let n = params.n;
    let s = n + 1;
    (0..s)
        .into_par_iter()
        .map(|a| {
            let mut worst: f64 = 0.0;
            let mut f = vec![0.0; s * s];
            for b in a..s {
                f[a * s + b] = 1.0;
                f[b * s + a] = 1.0;
                let bf = apply_b(params, &f);
                let cf = apply_c(params, &f);
                for x in 0..s {
                    for y in 0..s {
                        let r = bf[x * s + y] - 0.5 * (cf[x * s + y] + cf[y * s + x]);
                        worst = worst.max(r.abs());
                    }
                }
                f[a * s + b] = 0.0;
                f[b * s + a] = 0.0;
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Monte Carlo estimate of `k(x,y) - h(x) h(y)` as the expected time
/// integral of `N^2 (h(z+1) - h(z))^2` while the symmetric pair sits on
/// `{z, z+1}`.
pub fn correlation_mc(
    params: &ModelParams,
    x: usize,
    y: usize,
    t_cap: f64,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    let n = params.n;
    if !(1..n).contains(&x) || !(1..n).contains(&y) {
        return Err(Error::InvalidArgument(format!("({x}, {y}) is not a bulk pair")));
    }
    let h = stationary_profile(params).values;
    let n2 = params.bulk_speed();
    let weight: Vec<f64> = (0..n).map(|z| n2 * (h[z + 1] - h[z]).powi(2)).collect();
    let runs: Vec<(f64, bool)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut walk = PairWalk::new(
                params,
                PairState::new(x, y, PairKind::Symmetric),
                replica_rng(seed, r as u64),
            );
            let mut integral = 0.0;
            let absorbed = walk.run_until(t_cap, |t0, t1, s| {
                if s.x.abs_diff(s.y) == 1 && s.x.min(s.y) >= 1 && s.x.max(s.y) < n {
                    integral += weight[s.x.min(s.y)] * (t1 - t0);
                }
            })?;
            Ok((integral, absorbed))
        })
        .collect::<Result<_>>()?;
    let unabsorbed = runs.iter().filter(|r| !r.1).count();
    if unabsorbed as f64 > 1e-3 * replicas as f64 {
        return Err(Error::InsufficientAbsorption { unabsorbed, replicas });
    }
    let samples: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(Estimate::from_samples(&samples))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionTimes {
    /// Expected absorption time from each site of `0..=N`.
    pub u: Vec<f64>,
    pub sup: f64,
    /// `sup / max(1, N^(beta - 1))`.
    pub scaled: f64,
}

/// Exact expected absorption times of the single walk from `A^N u = -1`.
pub fn expected_absorption_time(params: &ModelParams) -> Result<AbsorptionTimes> {
    let n = params.n;
    let m = n - 1;
    let (mut sub, mut diag, mut sup) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for x in 1..n {
        let (l, r) = rates(params, x);
        diag[x - 1] = l + r;
        if x > 1 {
            sub[x - 1] = -l;
        }
        if x < n - 1 {
            sup[x - 1] = -r;
        }
    }
    let inner = solve_tridiagonal(&sub, &diag, &sup, &vec![1.0; m])?;
    let sup_u = inner.iter().cloned().fold(0.0, f64::max);
    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    u.extend(inner);
    u.push(0.0);
    let norm = (n as f64).powf(params.beta - 1.0).max(1.0);
    Ok(AbsorptionTimes {
        u,
        sup: sup_u,
        scaled: sup_u / norm,
    })
}

/// Probability that the single walk started at `x` is absorbed at `N`.
pub fn absorption_probability_right(params: &ModelParams) -> ProfileVector {
    harmonic(params, 0.0, 1.0)
}
