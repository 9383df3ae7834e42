//! Joint real/p-adic equidistribution counts of primitive vectors.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{isqrt, lattice_growth_oracle, ZETA_2};
use crate::padic::pow_p_rational;
use crate::plane::{circle_measure, sector_of, ArcPartition};

/// Largest radius accepted by the counters; keeps totals well inside u64.
pub const MAX_RADIUS: u64 = 100_000;

/// The rate exponent attached to the error term of the joint count. Documented
/// only; desk-scale radii cannot resolve it.
pub const TAU_P: (u64, u64) = (1, 28);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: u64,
    /// Strictly increasing radii; the last one is the headline run.
    pub radii: Vec<u64>,
    pub real_sectors: usize,
    pub padic_level: u32,
    /// `(t1, t2)` for the Z[1/p] count.
    pub t_range: Option<(i64, i64)>,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(p: u64, radius: u64, real_sectors: usize, padic_level: u32) -> Self {
        ExperimentConfig { p, radii: vec![radius], real_sectors, padic_level, t_range: None, seed: 0, threads: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !crate::padic::is_prime(self.p) {
            return Err(Error::NotPrime(self.p));
        }
        if self.radii.is_empty() || self.radii[0] < 1 {
            return Err(Error::InvalidConfig("radius must be at least 1".into()));
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("radius schedule must be strictly increasing".into()));
        }
        if *self.radii.last().unwrap() > MAX_RADIUS {
            return Err(Error::Infeasible(format!("radius above {MAX_RADIUS}")));
        }
        if self.real_sectors == 0 || self.padic_level == 0 {
            return Err(Error::InvalidConfig("grid sizes must be at least 1".into()));
        }
        if let Some((t1, t2)) = self.t_range {
            if t1 > t2 {
                return Err(Error::InvalidConfig(format!("empty t-range [{t1}, {t2}]")));
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> u64 {
        *self.radii.last().expect("validated")
    }
}

/// Runs `f` on a pool with the requested number of threads.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Every `(a, b)` with `gcd(a, b) = 1` and `a² + b² <= r2`, ordered by `a`
/// then `b`.
pub fn prim_within(r2: u64) -> impl Iterator<Item = (i64, i64)> {
    let r = isqrt(r2) as i64;
    (-r..=r).flat_map(move |a| {
        let h = isqrt(r2 - (a * a) as u64) as i64;
        (-h..=h).filter(move |&b| a.gcd(&b) == 1).map(move |b| (a, b))
    })
}

/// Primitive vectors of Z^2 with `‖v‖ <= R`.
pub fn enumerate_prim(r: u64) -> impl Iterator<Item = (i64, i64)> {
    prim_within(r * r)
}

/// Histogram over `sector × arc` for each norm bound in `bounds` (ascending).
/// Returns cumulative counts per bound and the number of sector ties.
fn histograms(bounds: &[u64], sectors: usize, part: &ArcPartition) -> (Vec<Vec<u64>>, u64) {
    let bins = sectors * part.len();
    let top = *bounds.last().expect("nonempty");
    let r = isqrt(top) as i64;
    let stripes: Vec<(Vec<Vec<u64>>, u64)> = (-r..=r)
        .into_par_iter()
        .map(|a| {
            let mut local = vec![vec![0u64; bins]; bounds.len()];
            let mut ties = 0;
            let h = isqrt(top - (a * a) as u64) as i64;
            for b in -h..=h {
                if a.gcd(&b) != 1 {
                    continue;
                }
                let n2 = (a * a + b * b) as u64;
                let slot = bounds.partition_point(|&x| x < n2);
                let (s, tie) = sector_of(a, b, sectors);
                ties += u64::from(tie);
                let arc = part.index_of(a, b).expect("primitive vectors lie on the unit circle");
                local[slot][s * part.len() + arc] += 1;
            }
            (local, ties)
        })
        .collect();
    let mut out = vec![vec![0u64; bins]; bounds.len()];
    let mut ties = 0;
    for (local, t) in stripes {
        ties += t;
        for (acc, row) in out.iter_mut().zip(local) {
            for (x, y) in acc.iter_mut().zip(row) {
                *x += y;
            }
        }
    }
    for i in 1..out.len() {
        let (done, rest) = out.split_at_mut(i);
        for (x, y) in rest[0].iter_mut().zip(&done[i - 1]) {
            *x += y;
        }
    }
    (out, ties)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub bin: String,
    pub sector: usize,
    pub arc: String,
    pub count: u64,
    pub empirical: f64,
    pub predicted: f64,
    /// `empirical / predicted - 1`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub tau_p: String,
    pub zeta_2: f64,
    /// Expected total `(6/π²) · πR²`.
    pub main_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub p: u64,
    pub radius: u64,
    pub real_sectors: usize,
    pub padic_level: u32,
    pub total: u64,
    pub ties: u64,
    pub bins: Vec<BinRow>,
    pub max_rel_deviation: f64,
    pub mean_rel_deviation: f64,
    /// `max_bin |count - predicted · total|`.
    pub max_abs_deviation: f64,
    pub constants: Constants,
}

/// Predicted probability of one `sector × arc` bin: `(1/n) · μ(arc) / μ(S¹_p)`.
pub fn predicted_probability(p: u64, level: u32, sectors: usize) -> (f64, BigRational) {
    let padic = pow_p_rational(p, -2 * level as i64) / circle_measure(p);
    (1.0 / sectors as f64, padic)
}

/// Sum of the predicted probabilities: the real factor Kahan-summed, the
/// p-adic factor exact.
pub fn predicted_totals(p: u64, level: u32, sectors: usize) -> Result<(f64, BigRational)> {
    let part = ArcPartition::new(p, level)?;
    let (real, padic) = predicted_probability(p, level, sectors);
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for _ in 0..sectors {
        let y = real - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    let padic_total = part.arcs().iter().fold(BigRational::zero(), |acc, _| acc + &padic);
    Ok((sum, padic_total))
}

fn build_report(p: u64, radius: u64, sectors: usize, part: &ArcPartition, counts: &[u64], ties: u64) -> CountReport {
    let total: u64 = counts.iter().sum();
    let (real, padic) = predicted_probability(p, part.level(), sectors);
    let predicted = real * crate::haar::rational_to_f64(&padic);
    let mut bins = Vec::with_capacity(counts.len());
    let (mut max_rel, mut sum_rel, mut max_abs) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..sectors {
        for (i, arc) in part.arcs().iter().enumerate() {
            let count = counts[s * part.len() + i];
            let empirical = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            let deviation = empirical / predicted - 1.0;
            max_rel = max_rel.max(deviation.abs());
            sum_rel += deviation.abs();
            max_abs = max_abs.max((count as f64 - predicted * total as f64).abs());
            bins.push(BinRow { bin: format!("s{s}:{arc}"), sector: s, arc: arc.to_string(), count, empirical, predicted, deviation });
        }
    }
    let main_term = (radius as f64).powi(2) / ZETA_2 * std::f64::consts::PI;
    CountReport {
        p,
        radius,
        real_sectors: sectors,
        padic_level: part.level(),
        total,
        ties,
        mean_rel_deviation: sum_rel / bins.len() as f64,
        bins,
        max_rel_deviation: max_rel,
        max_abs_deviation: max_abs,
        constants: Constants { tau_p: format!("{}/{}", TAU_P.0, TAU_P.1), zeta_2: ZETA_2, main_term },
    }
}

/// Headline count at the largest radius of the config.
pub fn run_joint_count(config: &ExperimentConfig) -> Result<CountReport> {
    let runs = run_schedule(&ExperimentConfig { radii: vec![config.radius()], ..config.clone() })?;
    Ok(runs.runs.into_iter().next().expect("one radius"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub runs: Vec<CountReport>,
    /// Least-squares slope of `log max_abs_deviation` against `log R`; `None`
    /// with fewer than two radii.
    pub slope: Option<f64>,
    /// Fraction of consecutive radii with non-increasing max relative deviation.
    pub monotone_fraction: Option<f64>,
}

/// One pass over the largest disc, binned for every radius of the schedule.
pub fn run_schedule(config: &ExperimentConfig) -> Result<ScheduleReport> {
    config.validate()?;
    let part = ArcPartition::new(config.p, config.padic_level)?;
    let bounds: Vec<u64> = config.radii.iter().map(|r| r * r).collect();
    let (hists, ties) = with_threads(config.threads, || histograms(&bounds, config.real_sectors, &part))?;
    let runs: Vec<CountReport> = config
        .radii
        .iter()
        .zip(&hists)
        .map(|(&r, h)| build_report(config.p, r, config.real_sectors, &part, h, ties))
        .collect();
    let slope = fit_slope(&runs.iter().map(|r| (r.radius as f64, r.max_abs_deviation)).collect::<Vec<_>>());
    let monotone_fraction = (runs.len() > 1).then(|| {
        let steps = runs.windows(2).filter(|w| w[1].max_rel_deviation <= w[0].max_rel_deviation).count();
        steps as f64 / (runs.len() - 1) as f64
    });
    Ok(ScheduleReport { runs, slope, monotone_fraction })
}

/// Least-squares slope of `ln y` on `ln x`; zero deviations are clamped to 1.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.max(1.0).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TCount {
    pub t: i64,
    pub count: u64,
    /// Same count from the lattice growth oracle.
    pub oracle: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZInvPReport {
    pub t1: i64,
    pub t2: i64,
    pub per_t: Vec<TCount>,
    pub oracle_agrees: bool,
    pub report: CountReport,
}

/// `‖w‖² <= R² p^{2t}` as an integer bound.
fn scaled_bound(p: u64, r: u64, t: i64) -> Result<u64> {
    let scale = p.checked_pow(2 * t.unsigned_abs() as u32).ok_or_else(|| Error::Infeasible(format!("p^{t} overflows")))?;
    let r2 = r * r;
    let bound = if t >= 0 { r2.checked_mul(scale) } else { Some(r2 / scale) };
    match bound {
        Some(b) if b <= MAX_RADIUS * MAX_RADIUS => Ok(b),
        _ => Err(Error::Infeasible(format!("R·p^{t} exceeds {MAX_RADIUS}"))),
    }
}

/// Counts Z[1/p]-primitive `v` with `‖v‖ <= R` and `p^{t1} <= ‖v‖_p <= p^{t2}`.
/// Those with `‖v‖_p = p^t` are `p^{-t} w` with `w ∈ Z²_prim`, `‖w‖ <= R p^t`,
/// and `w` has the same real sector and p-adic direction as `v`.
pub fn run_zinvp_count(config: &ExperimentConfig) -> Result<ZInvPReport> {
    config.validate()?;
    let (t1, t2) = config.t_range.ok_or_else(|| Error::InvalidConfig("t-range required".into()))?;
    let (p, r) = (config.p, config.radius());
    let part = ArcPartition::new(p, config.padic_level)?;
    let ts: Vec<i64> = (t1..=t2).collect();
    let mut bounds = Vec::with_capacity(ts.len());
    for &t in &ts {
        bounds.push(scaled_bound(p, r, t)?);
    }
    let (hists, ties) = with_threads(config.threads, || histograms(&bounds, config.real_sectors, &part))?;
    let mut counts = vec![0u64; config.real_sectors * part.len()];
    let mut per_t = Vec::with_capacity(ts.len());
    for (&t, h) in ts.iter().zip(&hists) {
        for (acc, x) in counts.iter_mut().zip(h) {
            *acc += x;
        }
        per_t.push(TCount { t, count: h.iter().sum(), oracle: lattice_growth_oracle(p, r, t)? });
    }
    let oracle_agrees = per_t.iter().all(|c| c.count == c.oracle);
    let report = build_report(p, r, config.real_sectors, &part, &counts, ties);
    Ok(ZInvPReport { t1, t2, per_t, oracle_agrees, report })
}

/// Exact `μ(arc)/μ(S¹_p)` for every arc; sums to 1.
pub fn normalized_arc_measures(p: u64, level: u32) -> Result<Vec<BigRational>> {
    let part = ArcPartition::new(p, level)?;
    let circle = circle_measure(p);
    Ok(part.arcs().iter().map(|a| a.measure() / &circle).collect())
}

pub fn sums_to_one(xs: &[BigRational]) -> bool {
    xs.iter().fold(BigRational::zero(), |acc, x| acc + x) == BigRational::one()
}
