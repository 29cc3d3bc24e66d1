//! Ratio audit rows, benchmark suites and their CSV/JSON forms.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use setpack::hereditary::{hereditary_closure, HereditaryInstance};
use setpack::instance::{generate_3dm, generate_random};
use setpack::oracle::solve_exact;
use setpack::{solve, Instance, Mode, SearchParams};

/// One audited instance. `ratio_num / ratio_den = opt / alg` in lowest
/// terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub instance: String,
    pub alg_weight: u32,
    pub opt_weight: u32,
    pub ratio_num: u64,
    pub ratio_den: u64,
    pub iterations: u64,
    pub binoculars: u64,
    pub wall_ms: u64,
    /// `[4, 3]` for hereditary runs; general runs are reported only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<[u64; 2]>,
}

impl AuditRow {
    pub fn violates_guarantee(&self) -> bool {
        match self.guarantee {
            Some([num, den]) => self.ratio_num * den > num * self.ratio_den,
            None => false,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `opt / alg` reduced; `0 / 0` counts as `1 / 1`.
pub fn exact_ratio(opt: u32, alg: u32) -> (u64, u64) {
    let (n, d) = (opt as u64, alg as u64);
    if n == 0 && d == 0 {
        return (1, 1);
    }
    let g = gcd(n, d);
    (n / g, d / g)
}

/// Solves `instance` with `params`, computes the optimum with the exact
/// oracle and returns the audit row.
pub fn audit_instance(id: &str, instance: &Instance, params: &SearchParams, oracle_budget: u64) -> Result<AuditRow> {
    let start = Instant::now();
    let (_, stats) = solve(instance, params)?;
    let wall_ms = start.elapsed().as_millis() as u64;
    let opt = solve_exact(instance, oracle_budget)?.optimum_weight;
    if opt < stats.final_weight {
        bail!("{id}: local search weight {} exceeds the optimum {opt}", stats.final_weight);
    }
    let (ratio_num, ratio_den) = exact_ratio(opt, stats.final_weight);
    Ok(AuditRow {
        instance: id.to_string(),
        alg_weight: stats.final_weight,
        opt_weight: opt,
        ratio_num,
        ratio_den,
        iterations: stats.iterations,
        binoculars: stats.binoculars_applied,
        wall_ms,
        guarantee: (params.mode == Mode::Hereditary).then_some([4, 3]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[allow(clippy::enum_variant_names)]
pub enum Suite {
    /// Closures of random 3-set instances, solved in hereditary mode.
    HereditarySmall,
    /// Random 3DM instances with at most 12 triples, general mode.
    #[value(name = "3dm-small")]
    ThreeDmSmall,
    /// Random mixed instances with at most 14 sets, general mode.
    RandomSmall,
}

/// The next instance of `suite` together with the parameters it is solved with.
fn suite_case(suite: Suite, rng: &mut ChaCha8Rng, base: &SearchParams) -> Result<(Instance, SearchParams)> {
    let seed: u64 = rng.gen();
    let params = SearchParams { seed, ..base.clone() };
    Ok(match suite {
        Suite::HereditarySmall => {
            let base = generate_random(rng.gen_range(9..=15), rng.gen_range(5..=10), 1.0, seed)?;
            let closed: HereditaryInstance = hereditary_closure(&base);
            (closed.into_instance(), SearchParams::hereditary(seed))
        }
        Suite::ThreeDmSmall => {
            let inst = generate_3dm(rng.gen_range(3..=4), rng.gen_range(6..=12), seed)?;
            (inst, params)
        }
        Suite::RandomSmall => {
            let m = rng.gen_range(4..=14);
            let inst = generate_random(rng.gen_range(m.max(6)..=m + 6), m, rng.gen_range(0.2..=0.9), seed)?;
            (inst, params)
        }
    })
}

pub fn suite_name(suite: Suite) -> &'static str {
    match suite {
        Suite::HereditarySmall => "hereditary-small",
        Suite::ThreeDmSmall => "3dm-small",
        Suite::RandomSmall => "random-small",
    }
}

/// Audits `count` instances of `suite`. Instances and their seeds are
/// derived sequentially from `seed`, so the rows do not depend on thread
/// scheduling; rows come back in instance order.
pub fn run_suite(suite: Suite, count: usize, seed: u64, base: &SearchParams, oracle_budget: u64) -> Result<Vec<AuditRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = (0..count)
        .map(|i| Ok((format!("{}-{i:04}", suite_name(suite)), suite_case(suite, &mut rng, base)?)))
        .collect::<Result<Vec<_>>>()?;
    cases
        .par_iter()
        .map(|(id, (inst, params))| audit_instance(id, inst, params, oracle_budget))
        .collect()
}

pub const CSV_COLUMNS: [&str; 8] = [
    "instance",
    "alg_weight",
    "opt_weight",
    "ratio_num",
    "ratio_den",
    "iterations",
    "binoculars",
    "wall_ms",
];

pub fn write_csv(rows: &[AuditRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.alg_weight.to_string(),
            r.opt_weight.to_string(),
            r.ratio_num.to_string(),
            r.ratio_den.to_string(),
            r.iterations.to_string(),
            r.binoculars.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`]. The guarantee is not part of the
/// CSV form and comes back as `None`.
pub fn read_csv(input: impl std::io::Read) -> Result<Vec<AuditRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        bail!("unexpected CSV header {header:?}");
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}
