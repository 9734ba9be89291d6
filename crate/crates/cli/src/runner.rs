//! Executes resolved sweeps and serialises their rows.

use std::io::Write;
use std::path::{Path, PathBuf};

use rwdre::estimators::{
    discrete_speed_sweep, estimate_quenched_rates, estimate_slowdown, estimate_speed_curve,
    estimate_traffic_jam, estimate_upper_rates, fmt_value, slowdown_radius, traffic_jam_bound,
    EnvKind, EstimateRow, JamMethod, ESTIMATE_HEADER, Z95,
};
use rwdre::oracle::srw_range_mean;
use rwdre::rng::stream;
use rwdre::theory::{static_speed_mirrored, ModelParams};

use crate::config::{auto_window_note, Loaded, Mode, Resolved};
use crate::CliError;

pub const FIG_HEADER: &str = "sweep_key,curve_name,value,stderr";

/// Curve names of the discrete-time speed figures, bottom to top.
pub const FIG_CURVES: [&str; 4] = ["theory_static", "static", "dynamic", "averaged"];

#[derive(Clone, Debug, PartialEq)]
pub struct FigRow {
    pub key: f64,
    pub curve: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Table {
    Fig(Vec<FigRow>),
    Estimates(Vec<EstimateRow>),
}

impl Table {
    pub fn header(&self) -> &'static str {
        match self {
            Table::Fig(_) => FIG_HEADER,
            Table::Estimates(_) => ESTIMATE_HEADER,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Table::Fig(r) => r.len(),
            Table::Estimates(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zero_hit_rows(&self) -> usize {
        match self {
            Table::Fig(_) => 0,
            Table::Estimates(rows) => rows.iter().filter(|r| r.flag() != "ok").count(),
        }
    }

    /// CSV bytes: header, then rows in their (sorted) order.
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        let run = |e: csv::Error| CliError::Run(e.to_string());
        w.write_record(self.header().split(',')).map_err(run)?;
        match self {
            Table::Fig(rows) => {
                for r in rows {
                    w.write_record([
                        fmt_value(r.key),
                        r.curve.clone(),
                        fmt_value(r.value),
                        fmt_value(r.stderr),
                    ])
                    .map_err(run)?;
                }
            }
            Table::Estimates(rows) => {
                for r in rows {
                    w.write_record([
                        r.estimator.clone(),
                        r.key.clone(),
                        fmt_value(r.t),
                        r.n.to_string(),
                        r.hits.to_string(),
                        fmt_value(r.rate_hat),
                        fmt_value(r.ci_low),
                        fmt_value(r.ci_high),
                        r.seed.to_string(),
                        r.flag().to_string(),
                    ])
                    .map_err(run)?;
                }
            }
        }
        w.into_inner().map_err(|e| CliError::Run(e.to_string()))
    }
}

/// What one sweep produced.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub name: String,
    pub kind: &'static str,
    pub file: PathBuf,
    pub header: &'static str,
    pub window_offset: i64,
    pub window_len: usize,
    pub rows: usize,
    pub zero_hit_rows: usize,
}

fn sort_fig(rows: &mut [FigRow], curves: &[&str]) {
    let rank = |c: &str| curves.iter().position(|&x| x == c).unwrap_or(curves.len());
    rows.sort_by(|a, b| {
        a.key
            .total_cmp(&b.key)
            .then(rank(&a.curve).cmp(&rank(&b.curve)))
    });
}

fn sort_estimates(rows: &mut [EstimateRow]) {
    rows.sort_by(|a, b| {
        let ka = a.key.parse::<f64>().unwrap_or(f64::NAN);
        let kb = b.key.parse::<f64>().unwrap_or(f64::NAN);
        a.estimator
            .cmp(&b.estimator)
            .then(ka.total_cmp(&kb))
            .then(a.key.cmp(&b.key))
            .then(a.t.total_cmp(&b.t))
            .then(a.seed.cmp(&b.seed))
    });
}

#[allow(clippy::too_many_arguments)]
fn survival_row(
    estimator: &str,
    key: &str,
    t: f64,
    n: u64,
    hits: u64,
    p: f64,
    lo: f64,
    hi: f64,
    seed: u64,
) -> EstimateRow {
    let rate = |q: f64| {
        if q <= 0.0 {
            f64::INFINITY
        } else {
            (-q.ln() / t).max(0.0)
        }
    };
    EstimateRow {
        estimator: estimator.into(),
        key: key.into(),
        t,
        n,
        hits,
        rate_hat: rate(p),
        ci_low: rate(hi),
        ci_high: rate(lo),
        seed,
    }
}

/// Runs one sweep and returns its rows, sorted by sweep key.
pub fn run_sweep(sweep: &Resolved) -> Result<Table, CliError> {
    Ok(match sweep {
        Resolved::Fig { sweep, key } => {
            let points = discrete_speed_sweep(sweep)?;
            let mut rows = Vec::with_capacity(points.len() * 4);
            for pt in points {
                let k = if *key == "p" { pt.p } else { pt.rho };
                let averaged = (2.0 * pt.rho - 1.0) * (2.0 * pt.p - 1.0);
                for (curve, value, stderr) in [
                    ("theory_static", pt.theory_static, 0.0),
                    ("static", pt.static_speed.v_hat, pt.static_speed.stderr),
                    ("dynamic", pt.dynamic_speed.v_hat, pt.dynamic_speed.stderr),
                    ("averaged", averaged, 0.0),
                ] {
                    rows.push(FigRow {
                        key: k,
                        curve: curve.into(),
                        value,
                        stderr,
                    });
                }
            }
            sort_fig(&mut rows, &FIG_CURVES);
            Table::Fig(rows)
        }
        Resolved::Speed(plan) => {
            let mut rows = Vec::new();
            if let EnvKind::Frozen { rho } = plan.env {
                let m = ModelParams::new(plan.walker.alpha, plan.walker.beta, rho)?;
                let v = static_speed_mirrored(&m)?;
                rows.extend(plan.horizons.iter().map(|&t| FigRow {
                    key: t,
                    curve: "theory_static".into(),
                    value: v,
                    stderr: 0.0,
                }));
            }
            for s in estimate_speed_curve(plan)? {
                rows.push(FigRow {
                    key: s.t,
                    curve: "simulated".into(),
                    value: s.v_hat,
                    stderr: s.stderr,
                });
            }
            sort_fig(&mut rows, &["theory_static", "simulated"]);
            Table::Fig(rows)
        }
        Resolved::Rates {
            plan,
            thetas,
            mode,
            env_seeds,
        } => {
            let mut rows = Vec::new();
            match mode {
                Mode::Annealed => {
                    for d in estimate_upper_rates(plan, thetas)? {
                        rows.push(EstimateRow::from_deviation(
                            "upper_rate",
                            format!("{}", d.theta),
                            &d,
                            plan.seed.0,
                        ));
                    }
                }
                Mode::Quenched => {
                    for &env_seed in env_seeds {
                        for d in estimate_quenched_rates(plan, thetas, env_seed)? {
                            rows.push(EstimateRow::from_deviation(
                                "quenched_rate",
                                format!("{}", d.theta),
                                &d,
                                env_seed,
                            ));
                        }
                    }
                }
            }
            sort_estimates(&mut rows);
            Table::Estimates(rows)
        }
        Resolved::Slowdown(plan) => {
            let mut rows: Vec<EstimateRow> = estimate_slowdown(plan)?
                .iter()
                .map(|d| {
                    EstimateRow::from_deviation(
                        "slowdown",
                        format!("{}", slowdown_radius(d.t)),
                        d,
                        plan.seed.0,
                    )
                })
                .collect();
            sort_estimates(&mut rows);
            Table::Estimates(rows)
        }
        Resolved::Jam {
            plan,
            horizons,
            sites,
            method,
            range_replicas,
        } => {
            let key = sites
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(";");
            let name = match method {
                JamMethod::Graphical => "traffic_jam_graphical",
                JamMethod::Direct => "traffic_jam_direct",
            };
            let mut rows = Vec::new();
            for &t in horizons {
                let est = estimate_traffic_jam(plan, sites, t, *method)?;
                rows.push(survival_row(
                    name,
                    &key,
                    t,
                    est.n_replicas,
                    est.hits,
                    est.p_hat,
                    est.ci_low,
                    est.ci_high,
                    plan.seed.0,
                ));
                let range_seed = plan.seed.derive(stream::AUX);
                let (m, se) = srw_range_mean(t, *range_replicas as usize, range_seed)?;
                let bound = |r: f64| traffic_jam_bound(plan.rho, sites.len(), r);
                rows.push(survival_row(
                    "traffic_jam_bound",
                    &key,
                    t,
                    *range_replicas,
                    *range_replicas,
                    bound(m),
                    bound(m + Z95 * se),
                    bound((m - Z95 * se).max(0.0)),
                    range_seed.0,
                ));
            }
            sort_estimates(&mut rows);
            Table::Estimates(rows)
        }
    })
}

/// Runs every sweep and writes `<name>.csv` files into `dir`.
pub fn execute(loaded: &Loaded, dir: &Path) -> Result<Vec<SweepReport>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Run(format!("cannot create {}: {e}", dir.display())))?;
    let mut tables = Vec::with_capacity(loaded.sweeps.len());
    for (name, sweep) in &loaded.sweeps {
        tables.push((name, sweep, run_sweep(sweep)?));
    }
    let mut reports = Vec::with_capacity(tables.len());
    for (name, sweep, table) in tables {
        let file = PathBuf::from(format!("{name}.csv"));
        std::fs::write(dir.join(&file), table.to_csv()?)?;
        let window = sweep.window();
        reports.push(SweepReport {
            name: name.clone(),
            kind: sweep.kind(),
            file,
            header: table.header(),
            window_offset: window.offset,
            window_len: window.len,
            rows: table.len(),
            zero_hit_rows: table.zero_hit_rows(),
        });
    }
    Ok(reports)
}

/// Human-readable summary of a parsed config.
pub fn validation_report(loaded: &Loaded, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(
        out,
        "config ok: {} sweep(s), master seed {}",
        loaded.sweeps.len(),
        loaded.config.run.seed
    )?;
    let mut total = 0u64;
    for (name, s) in &loaded.sweeps {
        let w = s.window();
        writeln!(
            out,
            "sweep {name} ({}): {} sweep points per curve, {} curve(s), replica budget {}, window [{}, {}] of length {}",
            s.kind(),
            s.points(),
            s.curves(),
            s.replica_budget(),
            w.leftmost(),
            w.rightmost(),
            w.len
        )?;
        if let Resolved::Speed(plan) | Resolved::Rates { plan, .. } | Resolved::Slowdown(plan) = s {
            if let Some(h) = auto_window_note(plan) {
                writeln!(out, "  automatic half-width {h} for t_max {}", plan.t_max())?;
            }
        }
        total += s.replica_budget();
    }
    writeln!(out, "total replica budget {total}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinities_serialise_as_tokens() {
        let row = EstimateRow {
            estimator: "upper_rate".into(),
            key: "2".into(),
            t: 1.0,
            n: 10,
            hits: 0,
            rate_hat: f64::INFINITY,
            ci_low: 1.2,
            ci_high: f64::INFINITY,
            seed: 3,
        };
        let csv = String::from_utf8(Table::Estimates(vec![row]).to_csv().unwrap()).unwrap();
        assert_eq!(
            csv,
            format!("{ESTIMATE_HEADER}\nupper_rate,2,1,10,0,inf,1.2,inf,3,zero_hits\n")
        );
    }

    #[test]
    fn fig_rows_sorted_by_key_then_curve() {
        let mut rows: Vec<FigRow> = [(0.9, "dynamic"), (0.5, "averaged"), (0.5, "theory_static")]
            .iter()
            .map(|&(k, c)| FigRow {
                key: k,
                curve: c.into(),
                value: 0.0,
                stderr: 0.0,
            })
            .collect();
        sort_fig(&mut rows, &FIG_CURVES);
        let order: Vec<_> = rows.iter().map(|r| (r.key, r.curve.as_str())).collect();
        assert_eq!(
            order,
            vec![(0.5, "theory_static"), (0.5, "averaged"), (0.9, "dynamic")]
        );
    }
}
