use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sublab_core::grid::Grid;
use sublab_core::harness::random::{axiom_batch, exponential_batch, independent_rosenthal_batch, rosenthal_batch, BatchSummary};
use sublab_core::harness::{
    clt_gap, counterexample_check, default_rosenthal_constant, fclt_gap, levy_demo, ConvergenceTable, GridPolicy,
    RosenthalVariant,
};
use sublab_core::{g_normal_expect, GCoefficients, HeatSolveConfig, KernelArray};

use crate::scenario::{FunctionSpec, GapCriteria, RosenthalKind, Scenario, ScenarioKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// One output line. Unused columns stay empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: Option<String>,
    pub n: Option<usize>,
    pub prelimit: Option<f64>,
    pub limit: Option<f64>,
    pub gap: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub grid_dx: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grid_dx: Option<f64>,
    pub time_steps: Option<usize>,
    pub clip: Option<f64>,
    pub seed: Option<u64>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario_id: String,
    pub kind: String,
    pub status: Status,
    pub message: Option<String>,
    pub rows: Vec<ReportRow>,
    pub provenance: Provenance,
    pub detail: serde_json::Value,
}

struct Outcome {
    status: Status,
    message: Option<String>,
    rows: Vec<ReportRow>,
    provenance: Provenance,
    detail: serde_json::Value,
}

type Res<T> = sublab_core::Result<T>;

/// Runs every scenario on a pool of `parallelism` threads; reports come back
/// in input order. A failing or erroring scenario does not affect the
/// others.
pub fn run(scenarios: &[Scenario], parallelism: usize) -> anyhow::Result<Vec<RunReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()?;
    Ok(pool.install(|| scenarios.par_iter().map(run_one).collect()))
}

pub fn run_one(scenario: &Scenario) -> RunReport {
    let start = Instant::now();
    let outcome = execute(&scenario.kind).unwrap_or_else(|e| Outcome {
        status: Status::Error,
        message: Some(e.to_string()),
        rows: Vec::new(),
        provenance: Provenance {
            seed: scenario.kind.seed(),
            ..Default::default()
        },
        detail: serde_json::Value::Null,
    });
    let mut provenance = outcome.provenance;
    provenance.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    RunReport {
        scenario_id: scenario.id.clone(),
        kind: scenario.kind.name().to_string(),
        status: outcome.status,
        message: outcome.message,
        rows: outcome.rows,
        provenance,
        detail: outcome.detail,
    }
}

fn verdict(failures: Vec<String>) -> (Status, Option<String>) {
    if failures.is_empty() {
        (Status::Pass, None)
    } else {
        (Status::Fail, Some(failures.join("; ")))
    }
}

fn judge(table: &ConvergenceTable, c: &GapCriteria, label: &str) -> Vec<String> {
    let judged = ConvergenceTable {
        rows: table
            .rows
            .iter()
            .filter(|r| c.judge_from.map_or(true, |m| r.n >= m))
            .copied()
            .collect(),
    };
    let mut out = Vec::new();
    if c.nonincreasing && !judged.is_nonincreasing(c.monotone_tolerance) {
        out.push(format!("{label}gaps increase"));
    }
    if c.strictly_decreasing && !judged.is_strictly_decreasing() {
        out.push(format!("{label}gaps not strictly decreasing"));
    }
    if let (Some(ratio), Some(first), Some(last)) = (c.last_over_first, judged.first_gap(), judged.last_gap()) {
        if judged.rows.len() > 1 && !(last <= ratio * first) {
            out.push(format!("{label}last gap {last} exceeds {ratio} x first gap {first}"));
        }
    }
    out
}

fn table_rows(table: &ConvergenceTable, label: Option<&str>, dx: &dyn Fn(usize) -> Option<f64>) -> Vec<ReportRow> {
    table
        .rows
        .iter()
        .map(|r| ReportRow {
            label: label.map(str::to_owned),
            n: Some(r.n),
            prelimit: Some(r.prelimit),
            limit: Some(r.limit),
            gap: Some(r.gap),
            grid_dx: dx(r.n),
            ..Default::default()
        })
        .collect()
}

fn dp_dx(policy: GridPolicy, build: &dyn Fn(usize) -> Res<KernelArray>) -> impl Fn(usize) -> Option<f64> + '_ {
    move |n| {
        build(n)
            .and_then(|arr| policy.grid_for(&arr))
            .map(|g: Grid| g.dx())
            .ok()
    }
}

fn batch_outcome(summary: &BatchSummary, seed: u64, extra: serde_json::Value) -> Outcome {
    let worst = summary.worst.as_ref();
    let rows = vec![ReportRow {
        label: worst.map(|w| w.instance.clone()),
        n: Some(summary.instances),
        lhs: worst.map(|w| w.lhs),
        rhs: worst.map(|w| w.rhs),
        slack: worst.map(|w| w.slack),
        ..Default::default()
    }];
    let (status, message) = if summary.passed() {
        (Status::Pass, None)
    } else {
        (
            Status::Fail,
            Some(format!("{} of {} instances violate the inequality", summary.violations, summary.instances)),
        )
    };
    Outcome {
        status,
        message,
        rows,
        provenance: Provenance {
            seed: Some(seed),
            ..Default::default()
        },
        detail: json!({ "summary": summary, "extra": extra }),
    }
}

fn execute(kind: &ScenarioKind) -> Res<Outcome> {
    match kind {
        ScenarioKind::Gnormal {
            g,
            rho,
            phi,
            expected,
            tolerance,
            pde,
            grid,
        } => {
            let f = phi.build()?;
            let cfg = match grid {
                Some(gr) => HeatSolveConfig::new(Grid::symmetric(gr.half_width, gr.dx)?, pde.cfl)?,
                None => pde.config_for(f.support_hull(), *rho, g.0)?,
            };
            let value = g_normal_expect(&f, *rho, g.0, &cfg)?;
            let gap = expected.map(|e| (value - e).abs());
            let (status, message) = match gap {
                Some(d) if !(d <= *tolerance) => (
                    Status::Fail,
                    Some(format!("value {value} differs from {} by {d} > {tolerance}", expected.unwrap())),
                ),
                _ => (Status::Pass, None),
            };
            Ok(Outcome {
                status,
                message,
                rows: vec![ReportRow {
                    prelimit: *expected,
                    limit: Some(value),
                    gap,
                    ..Default::default()
                }],
                provenance: Provenance {
                    grid_dx: Some(cfg.grid.dx()),
                    time_steps: Some(cfg.time_steps(*rho, g.0).0),
                    clip: phi.clip(),
                    ..Default::default()
                },
                detail: json!({ "value": value }),
            })
        }
        ScenarioKind::Clt {
            array,
            phi,
            n_list,
            g,
            rho,
            grid_policy,
            pde,
            criteria,
        } => {
            let build = |n: usize| array.build(n);
            let study = clt_gap(&build, &phi.build()?, n_list, *rho, g.0, *grid_policy, *pde)?;
            let (status, message) = verdict(judge(&study.table, criteria, ""));
            let dx = dp_dx(*grid_policy, &build);
            let rows = table_rows(&study.table, None, &dx);
            Ok(Outcome {
                status,
                message,
                rows,
                provenance: Provenance {
                    grid_dx: Some(pde.dx),
                    time_steps: Some(pde.config_for(phi.build()?.support_hull(), *rho, g.0)?.time_steps(*rho, g.0).0),
                    clip: phi.clip(),
                    ..Default::default()
                },
                detail: json!({ "conditions": study.conditions }),
            })
        }
        ScenarioKind::Fclt {
            array,
            functional,
            n_list,
            g,
            rho,
            grid_policy,
            pde,
            criteria,
        } => {
            let build = |n: usize| array.build(n);
            let f = functional.build()?;
            let table = fclt_gap(&build, &f, n_list, *rho, g.0, *grid_policy, *pde)?;
            let (status, message) = verdict(judge(&table, criteria, ""));
            let dx = dp_dx(*grid_policy, &build);
            let rows = table_rows(&table, None, &dx);
            Ok(Outcome {
                status,
                message,
                rows,
                provenance: Provenance {
                    grid_dx: Some(pde.dx),
                    clip: functional.clip(),
                    ..Default::default()
                },
                detail: json!({
                    "functional": f.kind_name(),
                    "cauchy": matches!(f.kind_name(), "running_max" | "running_max_abs" | "suffix_max"),
                }),
            })
        }
        ScenarioKind::Rosenthal {
            variant,
            count,
            seed,
            p,
            c_p,
        } => {
            let p = p.unwrap_or(2.0);
            let c_p = c_p.unwrap_or_else(|| default_rosenthal_constant(p));
            let (summary, constant) = match variant {
                RosenthalKind::SuffixSq => (rosenthal_batch(*seed, *count, RosenthalVariant::SuffixSq)?, 1.0),
                RosenthalKind::MaxSq => (rosenthal_batch(*seed, *count, RosenthalVariant::MaxSq)?, 256.0),
                RosenthalKind::MaxP => (rosenthal_batch(*seed, *count, RosenthalVariant::MaxP { p, c_p })?, c_p),
                RosenthalKind::Independent => (independent_rosenthal_batch(*seed, *count, p, c_p)?, c_p),
            };
            Ok(batch_outcome(
                &summary,
                *seed,
                json!({
                    "variant": variant,
                    "p": p,
                    "constant": constant,
                    "empirical_constant": summary.empirical_constant(constant),
                }),
            ))
        }
        ScenarioKind::Exponential { count, seed } => {
            Ok(batch_outcome(&exponential_batch(*seed, *count)?, *seed, serde_json::Value::Null))
        }
        ScenarioKind::Counterexample { tau, a, config } => {
            let rep = counterexample_check(*tau, *a, config)?;
            let mut failures = Vec::new();
            if !rep.within_bounds {
                failures.push(format!("E[xi^3] = {} outside the widened bounds", rep.third_moment_xi));
            }
            if !rep.sums_agree {
                failures.push(format!(
                    "E[(xi + a eta)^3] = {} differs from E[xi^3] = {}",
                    rep.third_moment_sum, rep.third_moment_xi
                ));
            }
            if !rep.consistent && failures.is_empty() {
                failures.push("no contradiction although |a| >= 6".into());
            }
            let (status, message) = verdict(failures);
            Ok(Outcome {
                status,
                message,
                rows: vec![ReportRow {
                    prelimit: Some(rep.third_moment_sum),
                    limit: Some(rep.third_moment_xi),
                    gap: Some((rep.third_moment_sum - rep.third_moment_xi).abs()),
                    lhs: Some(rep.bounds.1),
                    rhs: Some(rep.scaled_lower_bound),
                    slack: Some(rep.scaled_lower_bound - rep.bounds.1),
                    ..Default::default()
                }],
                provenance: Provenance {
                    grid_dx: Some(config.dx),
                    clip: Some(config.clip),
                    ..Default::default()
                },
                detail: serde_json::to_value(rep).unwrap_or_default(),
            })
        }
        ScenarioKind::Levy {
            g,
            n_list,
            phis,
            grid_policy,
            pde,
            criteria,
        } => {
            let fs = phis.iter().map(FunctionSpec::build).collect::<Res<Vec<_>>>()?;
            let rep = levy_demo(g.0, n_list, &fs, *grid_policy, *pde)?;
            let g0: GCoefficients = g.0;
            let build = move |n: usize| KernelArray::iid(n, sublab_core::harness::levy_family(g0, n)?);
            let dx = dp_dx(*grid_policy, &build);
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for (i, table) in rep.tables.iter().enumerate() {
                let label = format!("phi{i}");
                rows.extend(table_rows(table, Some(&label), &dx));
                failures.extend(judge(table, criteria, &format!("{label}: ")));
            }
            let (status, message) = verdict(failures);
            Ok(Outcome {
                status,
                message,
                rows,
                provenance: Provenance {
                    grid_dx: Some(pde.dx),
                    clip: phis.iter().filter_map(FunctionSpec::clip).reduce(f64::max),
                    ..Default::default()
                },
                detail: json!({ "step_stats": rep.step_stats }),
            })
        }
        ScenarioKind::Axioms { count, seed } => {
            let summary = axiom_batch(*seed, *count);
            let failures = summary.failures.len();
            let (status, message) = if summary.passed() {
                (Status::Pass, None)
            } else {
                (Status::Fail, Some(format!("{failures} of {} checks failed", summary.checks)))
            };
            Ok(Outcome {
                status,
                message,
                rows: vec![ReportRow {
                    n: Some(summary.checks),
                    lhs: Some(failures as f64),
                    rhs: Some(0.0),
                    slack: Some(0.0 - failures as f64),
                    ..Default::default()
                }],
                provenance: Provenance {
                    seed: Some(*seed),
                    ..Default::default()
                },
                detail: serde_json::to_value(&summary).unwrap_or_default(),
            })
        }
    }
}
