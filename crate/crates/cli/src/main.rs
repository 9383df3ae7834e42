use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use primdir::experiment::{predicted_totals, run_schedule, run_zinvp_count, with_threads, ExperimentConfig};
use primdir::haar::{
    arbitrate_box, arbitrate_real_density, arbitrate_t_exponent, residue_haar_oracle, standard_boxes, BruhatBox, MeasureRow,
    QRegion, Variant, N_FACTOR_WINNER, REAL_DENSITY_WINNER, RESIDUE_CAP, T_EXPONENT_WINNER,
};
use primdir::plane::{half_circle_measure, ArcPartition};
use primdir::report::{write_bins_csv, write_measure_csv, write_wr_csv, Check, Document};
use primdir::wellround::{sampled_suite, wr_box_equality_at, WR_BUDGET};
use primdir::{Error, Result, ZInvP};

#[derive(Parser)]
#[command(name = "primdir", version, about = "Primitive vector equidistribution experiments over Z[1/p]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bin primitive vectors of Z^2 by real sector and p-adic arc.
    Count(Opts),
    /// Same count for Z[1/p]-primitive vectors over a range of p-adic norms.
    CountZinvp(Opts),
    /// Compare box volumes with exact SL2(Z/p^N) enumeration.
    HaarCheck(Opts),
    /// Residue-level bi-invariance of Bruhat boxes plus sampled neighbourhood checks.
    WellroundCheck(Opts),
    /// Decide between the candidate measure formulas.
    MeasureArbitrate(Opts),
}

#[derive(Args, Clone, Serialize)]
struct Opts {
    #[arg(long, default_value_t = 2)]
    prime: u64,
    #[arg(long, conflicts_with = "radius_schedule")]
    radius: Option<u64>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    radius_schedule: Option<Vec<u64>>,
    #[arg(long, default_value_t = 1)]
    padic_level: u32,
    #[arg(long, default_value_t = 4)]
    real_sectors: usize,
    /// `t1,t2` or `t1..t2`.
    #[arg(long, allow_hyphen_values = true)]
    t_range: Option<String>,
    #[arg(long, default_value_t = 1)]
    psi: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[serde(skip)]
    #[arg(long)]
    threads: Option<usize>,
    #[serde(skip)]
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[serde(skip)]
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    precision: Option<u32>,
    /// Samples for the randomized checks of `wellround-check`.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

fn parse_t_range(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once("..").or_else(|| s.split_once(',')).ok_or_else(|| Error::Parse(format!("bad t-range {s:?}")))?;
    let parse = |x: &str| x.trim().parse::<i64>().map_err(|e| Error::Parse(format!("bad t-range {s:?}: {e}")));
    Ok((parse(a)?, parse(b)?))
}

impl Opts {
    fn radii(&self, default: u64) -> Vec<u64> {
        match (&self.radius_schedule, self.radius) {
            (Some(s), _) => s.clone(),
            (None, Some(r)) => vec![r],
            (None, None) => vec![default],
        }
    }

    fn t_range(&self) -> Result<Option<(i64, i64)>> {
        self.t_range.as_deref().map(parse_t_range).transpose()
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            p: self.prime,
            radii: self.radii(2000),
            real_sectors: self.real_sectors,
            padic_level: self.padic_level,
            t_range: self.t_range()?,
            seed: self.seed,
            threads: self.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Table {
    Bins(Vec<primdir::experiment::BinRow>),
    Measures(Vec<MeasureRow>),
    Verdicts(Vec<primdir::wellround::WRVerdict>),
}

fn count(opts: &Opts) -> Result<(Document, Table)> {
    let cfg = opts.experiment()?;
    let sched = run_schedule(&cfg)?;
    let head = sched.runs.last().expect("nonempty schedule").clone();
    let mut doc = Document::new("count", opts, &sched)?;
    let binned: u64 = head.bins.iter().map(|b| b.count).sum();
    doc.push_check(Check::new("bins_sum_to_total", binned == head.total, format!("{binned} of {}", head.total)));
    let oracle = primdir::haar::primitive_count(u128::from(head.radius).pow(2), 1)?;
    doc.push_check(Check::new("total_matches_oracle", oracle == head.total, format!("oracle {oracle}")));
    let (real, padic) = predicted_totals(cfg.p, cfg.padic_level, cfg.real_sectors)?;
    let sums = (real - 1.0).abs() < 1e-12 && padic == num_traits::One::one();
    doc.push_check(Check::new("predicted_sum_to_one", sums, format!("real {real}, p-adic {padic}")));
    Ok((doc, Table::Bins(head.bins)))
}

fn count_zinvp(opts: &Opts) -> Result<(Document, Table)> {
    let mut cfg = opts.experiment()?;
    cfg.t_range.get_or_insert((0, 0));
    let rep = run_zinvp_count(&cfg)?;
    let mut doc = Document::new("count-zinvp", opts, &rep)?;
    doc.push_check(Check::new("per_t_matches_growth_oracle", rep.oracle_agrees, ""));
    let binned: u64 = rep.report.bins.iter().map(|b| b.count).sum();
    let total: u64 = rep.per_t.iter().map(|c| c.count).sum();
    doc.push_check(Check::new("bins_sum_to_total", binned == total, format!("{binned} of {total}")));
    Ok((doc, Table::Bins(rep.report.bins)))
}

fn haar_check(opts: &Opts) -> Result<(Document, Table)> {
    let p = opts.prime;
    let n = opts.precision.unwrap_or(2);
    let max_psi = u32::try_from(opts.psi).map_err(|_| Error::InvalidConfig("--psi must be non-negative".into()))?;
    let boxes = standard_boxes(p, opts.padic_level, max_psi)?;
    let mut rows = Vec::with_capacity(boxes.len());
    let mut agree = 0;
    for bx in &boxes {
        let rep = arbitrate_box(bx, n, RESIDUE_CAP)?;
        agree += usize::from(rep.agree());
        rows.push(rep.row(bx));
    }
    let full = BruhatBox::new(p, QRegion::HalfSphere, 0, 0, ZInvP::zero(p), 0)?;
    let full_mass = residue_haar_oracle(&full, n, RESIDUE_CAP)?;
    let mut doc = Document::new("haar-check", opts, &rows)?;
    doc.push_check(Check::new(
        "oracle_equals_winning_variant",
        agree == boxes.len(),
        format!("{agree} of {} boxes, winner {N_FACTOR_WINNER}", boxes.len()),
    ));
    doc.push_check(Check::new("full_space_mass", full_mass == half_circle_measure(p), full_mass.to_string()));
    Ok((doc, Table::Measures(rows)))
}

fn wellround_check(opts: &Opts) -> Result<(Document, Table)> {
    let p = opts.prime;
    let k = opts.padic_level;
    let top = opts.precision.unwrap_or(k + 2);
    let max_psi = u32::try_from(opts.psi).map_err(|_| Error::InvalidConfig("--psi must be non-negative".into()))?;
    let mut verdicts = Vec::new();
    for arc in ArcPartition::new(p, k)?.arcs().iter().filter(|a| a.in_plus_half()) {
        for psi in 0..=max_psi {
            for alpha in 0..p.pow(psi) {
                let bx = BruhatBox::new(p, QRegion::Arc(*arc), 0, 0, ZInvP::from_int(p, alpha as i64), psi as i64)?;
                for level in k + 1..=top.max(k + 1) {
                    verdicts.push(wr_box_equality_at(&bx, level, WR_BUDGET)?);
                }
            }
        }
    }
    let suite = sampled_suite(p, opts.precision.unwrap_or(6).max(1), k + 1, opts.samples, opts.seed)?;
    let mut doc = Document::new("wellround-check", opts, &suite)?;
    let in_regime: Vec<_> = verdicts.iter().filter(|v| v.in_regime).collect();
    let held = in_regime.iter().filter(|v| v.holds()).count();
    doc.push_check(Check::new("box_set_equality", held == in_regime.len(), format!("{held} of {} in-regime verdicts", in_regime.len())));
    doc.push_check(Check::new("ad_norm_integral", suite.ad_integral.all_passed(), format!("{:?}", suite.ad_integral)));
    doc.push_check(Check::new("conjugation_inclusion", suite.conjugation.all_passed(), format!("{:?}", suite.conjugation)));
    doc.push_check(Check::new("conjugation_identities", suite.identities.all_passed(), format!("{:?}", suite.identities)));
    doc.push_check(Check::new("nbhd_splitting", suite.splitting.all_passed(), format!("{:?}", suite.splitting)));
    doc.push_check(Check::new("inclusion_proof_constant", suite.inclusion_t0.all_passed() && suite.inclusion_proof.all_passed(), ""));
    doc.wr_verdicts = verdicts.clone();
    Ok((doc, Table::Verdicts(verdicts)))
}

#[derive(Serialize)]
struct Arbitration {
    growth: primdir::haar::GrowthVerdict,
    real_density: primdir::haar::RealDensityVerdict,
    rows: Vec<MeasureRow>,
}

fn measure_arbitrate(opts: &Opts) -> Result<(Document, Table)> {
    let p = opts.prime;
    let r = *opts.radii(2000).last().expect("nonempty");
    let (t1, t2) = opts.t_range()?.unwrap_or((-1, 1));
    if t1 >= t2 {
        return Err(Error::InvalidConfig("arbitration needs at least two values of t".into()));
    }
    let ts: Vec<i64> = (t1..=t2).collect();
    let (growth, real_density) = with_threads(opts.threads, || -> Result<_> {
        Ok((arbitrate_t_exponent(p, r, &ts)?, arbitrate_real_density(r)?))
    })??;
    let pf = p as f64;
    let mut rows: Vec<MeasureRow> = growth
        .counts
        .windows(2)
        .zip(&growth.ratios)
        .map(|(w, ratio)| MeasureRow {
            bx: format!("growth:R={r};t={}->{}", w[0].0, w[1].0),
            variant_l: (pf * pf).to_string(),
            variant_t: (1.0 / (pf * pf)).to_string(),
            oracle: ratio.to_string(),
            winner: growth.winner,
        })
        .collect();
    let n = opts.precision.unwrap_or(2);
    let max_psi = u32::try_from(opts.psi).map_err(|_| Error::InvalidConfig("--psi must be non-negative".into()))?;
    let mut n_winners = Vec::new();
    for bx in standard_boxes(p, opts.padic_level.min(n), max_psi.min(n))? {
        if p.pow(n) > RESIDUE_CAP {
            break;
        }
        let rep = arbitrate_box(&bx, n, RESIDUE_CAP)?;
        n_winners.push(rep.winner);
        rows.push(rep.row(&bx));
    }
    let mut doc = Document::new("measure-arbitrate", opts, &Arbitration { growth: growth.clone(), real_density: real_density.clone(), rows: rows.clone() })?;
    doc.push_check(Check::new("t_exponent_winner", growth.winner == T_EXPONENT_WINNER, format!("{} (ratios {:?})", growth.winner, growth.ratios)));
    doc.push_check(Check::new(
        "real_density_winner",
        real_density.winner == REAL_DENSITY_WINNER,
        format!("{} (count {})", real_density.winner, real_density.count),
    ));
    let n_ok = n_winners.iter().all(|w| *w == N_FACTOR_WINNER || *w == Variant::Both);
    doc.push_check(Check::new("n_factor_winner", n_ok, format!("{} boxes", n_winners.len())));
    Ok((doc, Table::Measures(rows)))
}

fn run(cli: &Cli) -> Result<bool> {
    let (opts, result) = match &cli.command {
        Command::Count(o) => (o, count(o)),
        Command::CountZinvp(o) => (o, count_zinvp(o)),
        Command::HaarCheck(o) => (o, haar_check(o)),
        Command::WellroundCheck(o) => (o, wellround_check(o)),
        Command::MeasureArbitrate(o) => (o, measure_arbitrate(o)),
    };
    let (doc, table) = result?;
    if let Some(path) = &opts.out_csv {
        let out = BufWriter::new(File::create(path)?);
        match &table {
            Table::Bins(rows) => write_bins_csv(rows, out)?,
            Table::Measures(rows) => write_measure_csv(rows, out)?,
            Table::Verdicts(rows) => write_wr_csv(rows, out)?,
        }
    }
    if let Some(path) = &opts.out_json {
        std::fs::write(path, doc.to_json()?)?;
    }
    for c in &doc.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(doc.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
