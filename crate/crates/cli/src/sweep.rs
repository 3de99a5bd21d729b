//! Parameter sweeps emitted as plot-ready CSV.
//!
//! Columns depend only on the scenario's mode, provider counts, objective
//! flags and baselines, never on solver outcomes. A point whose solve fails
//! keeps its row: the numbers become `nan` and `status` names the error.

use spectrum_core::alpha::{optimize_alpha, welfare_gap_report, W_CAP};
use spectrum_core::market::{Share, Tariff};
use spectrum_core::EquilibriumResult;
use spectrum_core::{find_equilibrium_with, MarketMode, Multiplicity, NashOptions, Objective};

use crate::format::num;
use crate::scenario::{Baseline, Extent, Mode, Point, ScenarioSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Labels of the providers that get their own columns: one representative
/// for symmetric incumbents, then every entrant.
fn provider_labels(spec: &ScenarioSpec) -> Vec<(String, bool)> {
    let mut out: Vec<(String, bool)> = if spec.symmetric() {
        if spec.m > 0 {
            vec![("sp".into(), true)]
        } else {
            Vec::new()
        }
    } else {
        (0..spec.m).map(|i| (i.to_string(), true)).collect()
    };
    out.extend((0..spec.n).map(|j| (format!("e{j}"), false)));
    out
}

fn provider_columns(spec: &ScenarioSpec, prefix: &str) -> Vec<String> {
    let mut cols = Vec::new();
    for (label, incumbent) in provider_labels(spec) {
        if spec.mode == Mode::Unbundled && incumbent {
            for name in ["pl", "pu", "xl", "xu"] {
                cols.push(format!("{prefix}{name}_{label}"));
            }
        } else {
            cols.push(format!("{prefix}p_{label}"));
            cols.push(format!("{prefix}x_{label}"));
        }
        cols.push(format!("{prefix}profit_{label}"));
    }
    for name in ["Q", "CS", "SW"] {
        cols.push(format!("{prefix}{name}"));
    }
    cols
}

/// Header for `spec`.
pub fn columns(spec: &ScenarioSpec) -> Vec<String> {
    let mut cols = Vec::new();
    if let Some(series) = &spec.series {
        cols.push(series.variable.column().to_string());
    }
    cols.push(spec.sweep.variable.column().to_string());
    let o = spec.objectives;
    if o.welfare_gap {
        cols.extend(["gap", "popt_alpha", "popt_SW", "wopt_alpha", "wopt_SW"].map(String::from));
    } else if o.any() {
        if o.profit_optimal_alpha {
            cols.push("popt_alpha".into());
            cols.extend(provider_columns(spec, "popt_"));
        }
        if o.welfare_optimal_alpha {
            cols.push("wopt_alpha".into());
            cols.extend(provider_columns(spec, "wopt_"));
        }
    } else {
        cols.extend(provider_columns(spec, ""));
        cols.push("eps_ne".into());
    }
    for b in &spec.compare {
        for name in ["profit", "CS", "SW"] {
            cols.push(format!("{}_{name}", b.name()));
        }
    }
    cols.push("status".into());
    cols
}

/// Collects cells and the first failure of a row.
struct Row {
    cells: Vec<String>,
    status: Option<String>,
}

impl Row {
    fn push(&mut self, x: f64) {
        self.cells.push(num(x));
    }

    fn blank(&mut self, n: usize) {
        self.cells.extend(std::iter::repeat_n("nan".to_string(), n));
    }

    fn fail(&mut self, code: &str) {
        self.status.get_or_insert_with(|| code.to_string());
    }
}

fn provider_indices(spec: &ScenarioSpec, point: &Point) -> Vec<(usize, bool)> {
    let m = match point.m {
        Multiplicity::Finite(m) => m,
        Multiplicity::Infinite => 0,
    };
    let mut out: Vec<(usize, bool)> = if spec.symmetric() {
        if spec.m > 0 {
            vec![(0, true)]
        } else {
            Vec::new()
        }
    } else {
        (0..m).map(|i| (i, true)).collect()
    };
    out.extend((0..spec.n).map(|j| (m + j, false)));
    out
}

fn push_equilibrium(row: &mut Row, spec: &ScenarioSpec, point: &Point, eq: &EquilibriumResult) {
    for (i, _) in provider_indices(spec, point) {
        match (eq.prices.tariffs[i], eq.solution.alloc.shares[i]) {
            (Tariff::Split { licensed, unlicensed }, Share::Split { licensed: xl, unlicensed: xu }) => {
                for v in [licensed, unlicensed, xl, xu] {
                    row.push(v);
                }
            }
            (t, s) => {
                row.push(match t {
                    Tariff::Single(p) => p,
                    Tariff::Split { licensed, .. } => licensed,
                });
                row.push(s.total());
            }
        }
        row.push(eq.welfare.profits[i]);
    }
    row.push(eq.welfare.total_mass);
    row.push(eq.welfare.consumer_surplus);
    row.push(eq.welfare.social_welfare);
    if !eq.converged {
        row.fail("not_converged");
    }
}

fn baseline(point: &Point, b: Baseline, opts: &NashOptions) -> spectrum_core::Result<EquilibriumResult> {
    let config = match b {
        Baseline::Unbundled => point.market(MarketMode::Unbundled)?,
        Baseline::Exclusive => {
            // Exclusive use needs a finite band; an unbounded one is capped as
            // in the alpha stage.
            let mut p = point.clone();
            if p.w == Extent::Infinite {
                p.w = Extent::Finite(W_CAP);
            }
            p.market(MarketMode::Exclusive)?
        }
    };
    find_equilibrium_with(&config, opts)
}

fn evaluate(spec: &ScenarioSpec, point: &Point, opts: &NashOptions) -> Row {
    let mut row = Row { cells: Vec::new(), status: None };
    let mode: MarketMode = spec.mode.into();
    let width = provider_columns(spec, "").len();
    let o = spec.objectives;
    if o.welfare_gap {
        let b_total = point.b_total.expect("validated: gap scenarios use B_t");
        match welfare_gap_report(point.m, b_total, point.w.band(), opts) {
            Ok(r) => {
                for v in [r.gap, r.profit_alpha, r.profit_welfare, r.welfare_alpha, r.welfare_value] {
                    row.push(v);
                }
            }
            Err(e) => {
                row.blank(5);
                row.fail(e.code());
            }
        }
    } else if o.any() {
        for (flag, objective) in
            [(o.profit_optimal_alpha, Objective::Profit), (o.welfare_optimal_alpha, Objective::Welfare)]
        {
            if !flag {
                continue;
            }
            match point.market(mode).and_then(|c| optimize_alpha(&c, objective, opts)) {
                Ok(r) => {
                    row.push(r.alpha_star);
                    push_equilibrium(&mut row, spec, point, &r.equilibrium);
                    if !r.failures.is_empty() {
                        row.fail("alpha_grid_failures");
                    }
                }
                Err(e) => {
                    row.blank(width + 1);
                    row.fail(e.code());
                }
            }
        }
    } else {
        match point.market(mode).and_then(|c| find_equilibrium_with(&c, opts)) {
            Ok(eq) => {
                push_equilibrium(&mut row, spec, point, &eq);
                row.push(eq.eps_ne);
            }
            Err(e) => {
                row.blank(width + 1);
                row.fail(e.code());
            }
        }
    }
    for &b in &spec.compare {
        match baseline(point, b, opts) {
            Ok(eq) => {
                row.push(eq.welfare.profits[0]);
                row.push(eq.welfare.consumer_surplus);
                row.push(eq.welfare.social_welfare);
                if !eq.converged {
                    row.fail("baseline_not_converged");
                }
            }
            Err(e) => {
                row.blank(3);
                row.fail(e.code());
            }
        }
    }
    row
}

/// Runs every point of `spec` in sweep order.
pub fn run_sweep(spec: &ScenarioSpec, opts: &NashOptions) -> Dataset {
    let header = columns(spec);
    let mut rows = Vec::new();
    for series in spec.series_values() {
        for x in spec.sweep.points() {
            let point = spec.point(series, x);
            let row = evaluate(spec, &point, opts);
            let mut cells = Vec::with_capacity(header.len());
            if let Some(s) = series {
                cells.push(s.to_string());
            }
            cells.push(num(x));
            cells.extend(row.cells);
            cells.push(row.status.unwrap_or_else(|| "ok".into()));
            debug_assert_eq!(cells.len(), header.len());
            rows.push(cells);
        }
    }
    Dataset { header, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> ScenarioSpec {
        let s: ScenarioSpec = serde_json::from_str(json).unwrap();
        s.validate().unwrap();
        s
    }

    #[test]
    fn header_layout() {
        let s = spec(
            r#"{"name":"t","mode":"bundled","M":1,"N":1,"B":[1],"W":1,
                "sweep":{"variable":"alpha","start":0,"stop":1,"step":0.5},"compare":["exclusive"]}"#,
        );
        assert_eq!(
            columns(&s).join(","),
            "alpha,p_0,x_0,profit_0,p_e0,x_e0,profit_e0,Q,CS,SW,eps_ne,exclusive_profit,exclusive_CS,exclusive_SW,status"
        );
        let data = run_sweep(&s, &NashOptions::default());
        assert_eq!(data.rows.len(), 3);
        assert!(data.rows.iter().all(|r| r.len() == data.header.len()));
        let ex = data.column("exclusive_profit").unwrap();
        let v: f64 = data.rows[0][ex].parse().unwrap();
        assert!((v - 2.0 / 27.0).abs() < 1e-8);
    }

    #[test]
    fn failures_keep_their_row() {
        // An unbounded incumbent count has no finite-band market.
        let s = spec(
            r#"{"name":"t","mode":"bundled","M":2,"B_t":1,"W":1,"objectives":{"welfare_gap":true},
                "series":{"variable":"M","values":["inf"]},
                "sweep":{"variable":"W","start":1,"stop":1,"step":1}}"#,
        );
        let data = run_sweep(&s, &NashOptions::default());
        assert_eq!(data.rows.len(), 1);
        let row = &data.rows[0];
        assert_eq!(row.last().unwrap(), "unsupported");
        assert_eq!(row[data.column("gap").unwrap()], "nan");
    }
}
