use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{PreparedProtocol, ProtocolConfig};
use super::party::{Party, PartyId, Role};
use super::shots::{party_stream, shared_stream, ShotTable};
use crate::error::{Error, Result};
use crate::numkit::haar_state;
use crate::svt::Part;

/// Per-iteration statistics `X^p, Y^p, Z^{pq}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationComponents {
    pub x_re: f64,
    pub x_im: f64,
    pub y_re: f64,
    pub y_im: f64,
    pub z_rr: f64,
    pub z_ri: f64,
    pub z_ir: f64,
    pub z_ii: f64,
}

impl IterationComponents {
    pub fn x(&self) -> Complex64 {
        Complex64::new(self.x_re, -self.x_im)
    }

    pub fn y(&self) -> Complex64 {
        Complex64::new(self.y_re, -self.y_im)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z_rr - self.z_ii, -self.z_ri - self.z_ir)
    }
}

/// Estimate of `Tr(PQ)` and the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub value: Complex64,
    /// Present when the estimate was computed from a shot table.
    pub components: Option<Vec<IterationComponents>>,
    /// Estimated `Var(T)` (delta method over iterations).
    pub empirical_variance: f64,
    pub n_queries_simulated: u64,
    pub n_iterations: usize,
    pub m: usize,
    pub d: usize,
}

/// `(1/N) Σ_i (Z^RR − iZ^RI − iZ^IR − Z^II) − (1/N²) Σ_{k,l} (X^R Y^R − iX^R Y^I − iX^I Y^R − X^I Y^I)`.
///
/// The double sum is evaluated as the product of the single sums.
pub fn combine_components(c: &[IterationComponents]) -> Complex64 {
    let n = c.len() as f64;
    let (mut sz, mut sx, mut sy) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for it in c {
        sz += it.z();
        sx += it.x();
        sy += it.y();
    }
    sz / n - sx * sy / (n * n)
}

fn delta_method_variance(c: &[IterationComponents]) -> f64 {
    let n = c.len();
    if n < 2 {
        return f64::NAN;
    }
    let nf = n as f64;
    let xbar = c.iter().map(IterationComponents::x).sum::<Complex64>() / nf;
    let ybar = c.iter().map(IterationComponents::y).sum::<Complex64>() / nf;
    let phi: Vec<Complex64> = c.iter().map(|it| it.z() - ybar * it.x() - xbar * it.y()).collect();
    let mean = phi.iter().sum::<Complex64>() / nf;
    phi.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>() / (nf - 1.0) / nf
}

impl TraceEstimate {
    fn from_components(c: Vec<IterationComponents>, d: usize, m: usize, queries: u64) -> Self {
        Self {
            value: combine_components(&c),
            empirical_variance: delta_method_variance(&c),
            n_queries_simulated: queries,
            n_iterations: c.len(),
            m,
            d,
            components: Some(c),
        }
    }

    /// `N · Var(T)`, the per-iteration variance.
    pub fn variance_per_iteration(&self) -> f64 {
        self.empirical_variance * self.n_iterations as f64
    }
}

/// Applies the estimator to a recorded shot table.
pub fn estimate_trace(table: &ShotTable, cfg: &ProtocolConfig) -> Result<TraceEstimate> {
    if table.d != cfg.d || table.m != cfg.m || table.n_iterations != cfg.n_iterations {
        return Err(Error::InvalidInput(format!(
            "table (d={}, N={}, m={}) does not match config (d={}, N={}, m={})",
            table.d, table.n_iterations, table.m, cfg.d, cfg.n_iterations, cfg.m
        )));
    }
    let degrees = (cfg.poly_f.degree().max(1) + cfg.poly_g.degree().max(1)) as u64;
    estimate_from_table(table, 4 * (cfg.m * cfg.n_iterations) as u64 * degrees)
}

fn estimate_from_table(table: &ShotTable, queries: u64) -> Result<TraceEstimate> {
    let (d, m) = (table.d as f64, table.m as f64);
    let mut comps = Vec::with_capacity(table.n_iterations);
    for i in 0..table.n_iterations {
        let count = |party, role, part| table.zeros(i, party, role, part).map(|z| z as f64);
        let x = |part| -> Result<f64> { Ok(2.0 * d / m * count(PartyId::Alice, Role::V, part)? - d) };
        let y = |part| -> Result<f64> { Ok(2.0 * d / m * count(PartyId::Bob, Role::W, part)? - d) };
        let z = |p: Part, q: Part| -> Result<f64> {
            // Σ_{j,j'} 1[A_j = B_j'] = n0(A)·n0(B) + n1(A)·n1(B).
            let a0 = count(PartyId::Alice, Role::U, p)?;
            let b0 = count(PartyId::Bob, Role::U, q)?;
            let agree = a0 * b0 + (m - a0) * (m - b0);
            Ok(2.0 * d * (d + 1.0) / (m * m) * agree - d * (d + 1.0))
        };
        comps.push(IterationComponents {
            x_re: x(Part::Re)?,
            x_im: x(Part::Im)?,
            y_re: y(Part::Re)?,
            y_im: y(Part::Im)?,
            z_rr: z(Part::Re, Part::Re)?,
            z_ri: z(Part::Re, Part::Im)?,
            z_ir: z(Part::Im, Part::Re)?,
            z_ii: z(Part::Im, Part::Im)?,
        });
    }
    Ok(TraceEstimate::from_components(comps, table.d, table.m, queries))
}

/// Exact integer sums over iterations of the sign-sum statistics.
///
/// With `a`, `b` the complex sign sums `S^Re − i S^Im` of Alice and Bob on
/// `U_i`, `u` Alice's on `V_i` and `w` Bob's on `W_i`, the estimator is
/// `κ_Z mean(ab) − κ_X² mean(u) mean(w)` with `κ_Z = d(d+1)/m²`, `κ_X = d/m`.
/// Integer accumulation makes the reduction order irrelevant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub z: [i128; 2],
    pub x: [i128; 2],
    pub y: [i128; 2],
    pub zz: i128,
    pub xx: i128,
    pub yy: i128,
    pub zx: [i128; 2],
    pub zy: [i128; 2],
    pub xy: [i128; 2],
}

type CInt = [i128; 2];

fn cmul(a: CInt, b: CInt) -> CInt {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn cmul_conj(a: CInt, b: CInt) -> CInt {
    cmul(a, [b[0], -b[1]])
}

fn add(a: CInt, b: CInt) -> CInt {
    [a[0] + b[0], a[1] + b[1]]
}

fn to_c(a: CInt) -> Complex64 {
    Complex64::new(a[0] as f64, a[1] as f64)
}

impl Moments {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Record of one iteration from the four complex sign sums.
    pub fn single(a: CInt, b: CInt, u: CInt, w: CInt) -> Self {
        let z = cmul(a, b);
        let norm = |v: CInt| v[0] * v[0] + v[1] * v[1];
        Self {
            n: 1,
            z,
            x: u,
            y: w,
            zz: norm(z),
            xx: norm(u),
            yy: norm(w),
            zx: cmul_conj(z, u),
            zy: cmul_conj(z, w),
            xy: cmul_conj(u, w),
        }
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            n: self.n + o.n,
            z: add(self.z, o.z),
            x: add(self.x, o.x),
            y: add(self.y, o.y),
            zz: self.zz + o.zz,
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zx: add(self.zx, o.zx),
            zy: add(self.zy, o.zy),
            xy: add(self.xy, o.xy),
        }
    }

    /// Estimator value for dimension `d` and `m` shots.
    pub fn value(&self, d: usize, m: usize) -> Complex64 {
        let (kz, kx) = kappas(d, m);
        let n = self.n as f64;
        kz * to_c(self.z) / n - kx * kx * to_c(self.x) * to_c(self.y) / (n * n)
    }

    /// Delta-method estimate of `Var(T)`.
    pub fn variance(&self, d: usize, m: usize) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let (kz, kx) = kappas(d, m);
        let n = self.n as f64;
        let (zb, xb, yb) = (to_c(self.z) / n, to_c(self.x) / n, to_c(self.y) / n);
        let k2 = kx * kx;
        let e_abs2 = kz * kz * self.zz as f64 / n
            + k2 * k2 * (yb.norm_sqr() * self.xx as f64 / n + xb.norm_sqr() * self.yy as f64 / n)
            + 2.0 * k2 * k2 * (yb * xb.conj() * to_c(self.xy) / n).re
            - 2.0 * kz * k2 * (yb.conj() * to_c(self.zx) / n + xb.conj() * to_c(self.zy) / n).re;
        let mean = kz * zb - 2.0 * k2 * xb * yb;
        ((e_abs2 - mean.norm_sqr()) * n / (n - 1.0)).max(0.0) / n
    }
}

fn kappas(d: usize, m: usize) -> (f64, f64) {
    let (d, m) = (d as f64, m as f64);
    (d * (d + 1.0) / (m * m), d / m)
}

fn sign_sums<R: rand::Rng + ?Sized>(p0: [f64; 2], m: usize, rng: &mut R) -> CInt {
    let re = Party::sample_sign_sum(p0[0], m, rng);
    let im = Party::sample_sign_sum(p0[1], m, rng);
    [re as i128, -(im as i128)]
}

impl PreparedProtocol {
    /// Integer moments of one iteration, drawing shot counts directly.
    pub fn iteration_moments(&self, i: usize) -> Result<Moments> {
        let d = self.d;
        let mut u = Vec::with_capacity(d);
        haar_state(d, &mut shared_stream(&self.stream, i).rng(), &mut u);
        let mut ra = party_stream(&self.stream, PartyId::Alice, i).rng();
        let mut v = Vec::with_capacity(d);
        haar_state(d, &mut ra, &mut v);
        let a = sign_sums(self.alice.outcome_p0(&u)?, self.m, &mut ra);
        let x = sign_sums(self.alice.outcome_p0(&v)?, self.m, &mut ra);
        let mut rb = party_stream(&self.stream, PartyId::Bob, i).rng();
        let mut w = Vec::with_capacity(d);
        haar_state(d, &mut rb, &mut w);
        let b = sign_sums(self.bob.outcome_p0(&u)?, self.m, &mut rb);
        let y = sign_sums(self.bob.outcome_p0(&w)?, self.m, &mut rb);
        Ok(Moments::single(a, b, x, y))
    }

    /// Reduced moments over all iterations.
    pub fn moments(&self) -> Result<Moments> {
        self.execution.map_reduce(
            self.n_iterations,
            || Ok(Moments::zero()),
            |i| self.iteration_moments(i),
            |a: Result<Moments>, b: Result<Moments>| Ok(a?.merge(b?)),
        )
    }

    /// Streaming estimate: only the sign sums of each test are drawn, the
    /// individual bits are never materialized.
    pub fn estimate(&self) -> Result<TraceEstimate> {
        let mom = self.moments()?;
        Ok(TraceEstimate {
            value: mom.value(self.d, self.m),
            components: None,
            empirical_variance: mom.variance(self.d, self.m),
            n_queries_simulated: self.queries(),
            n_iterations: self.n_iterations,
            m: self.m,
            d: self.d,
        })
    }

    /// Estimate from a fully recorded shot table.
    pub fn estimate_recorded(&self) -> Result<TraceEstimate> {
        estimate_from_table(&self.run_shots()?, self.queries())
    }
}
