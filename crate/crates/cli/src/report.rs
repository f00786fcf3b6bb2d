//! Command results and their text, CSV and JSON renderings.

use geostep_core::greeks::GreekPoint;
use geostep_core::tables::TableRow;
use serde::Serialize;

/// Finite values only; NaN and infinities become `None`.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn fixed(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "--".to_string(), |x| format!("{x:.decimals$}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedValue {
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PriceReport {
    pub t: f64,
    pub x: f64,
    pub values: Vec<NamedValue>,
    /// `100 eep / amer`, when both are priced.
    pub eep_pct: Option<f64>,
    /// `100 eep_diffusion / eep`, when both are priced.
    pub dc_pct: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableLine {
    pub table: u8,
    pub block: usize,
    pub lambda: f64,
    pub spot: f64,
    pub contract: String,
    pub knock_rate: f64,
    pub euro: f64,
    pub amer: f64,
    pub eep: f64,
    pub eep_diffusion: f64,
    pub eep_pct: Option<f64>,
    pub dc_pct: Option<f64>,
    pub ref_euro: Option<f64>,
    pub ref_eep: Option<f64>,
    pub ref_amer: Option<f64>,
    pub ref_eep_pct: Option<f64>,
    pub ref_dc_pct: Option<f64>,
    pub gs_order: usize,
    pub engine_version: String,
}

impl TableLine {
    pub fn from_row(r: &TableRow, gs_order: usize) -> Self {
        TableLine {
            table: r.table,
            block: r.block,
            lambda: r.lambda,
            spot: r.spot,
            contract: r.contract.clone(),
            knock_rate: r.knock_rate,
            euro: r.euro,
            amer: r.amer,
            eep: r.eep,
            eep_diffusion: r.eep_diffusion,
            eep_pct: finite(r.eep_pct),
            dc_pct: finite(r.dc_pct),
            ref_euro: r.reference.euro,
            ref_eep: r.reference.eep,
            ref_amer: r.reference.amer,
            ref_eep_pct: r.reference.eep_pct.and_then(finite),
            ref_dc_pct: r.reference.dc_pct.and_then(finite),
            gs_order,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootLine {
    pub side: &'static str,
    pub index: usize,
    pub root: f64,
    /// Bracket ends; `None` is unbounded.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub engine: f64,
    pub mc_value: f64,
    pub mc_std_error: f64,
    /// `(mc - engine) / se`.
    pub deviation_se: f64,
    pub dual_call: f64,
    pub dual_put: f64,
    pub dual_difference: f64,
    pub pooled_se: f64,
    pub duality_z: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Report {
    Price(PriceReport),
    Table(Vec<TableLine>),
    Greeks(Vec<GreekPoint>),
    Roots { alpha: f64, roots: Vec<RootLine> },
    Verify(VerifyReport),
}

impl Report {
    /// Header and rows with full-precision numbers.
    pub fn csv(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        match self {
            Report::Price(p) => {
                let mut head = s(&["t", "x"]);
                let mut row = vec![p.t.to_string(), p.x.to_string()];
                for v in &p.values {
                    head.push(v.quantity.clone());
                    row.push(v.value.to_string());
                }
                if p.eep_pct.is_some() || p.dc_pct.is_some() {
                    head.extend(s(&["eep_pct", "dc_pct"]));
                    row.extend([cell(p.eep_pct), cell(p.dc_pct)]);
                }
                (head, vec![row])
            }
            Report::Table(lines) => (
                s(&[
                    "table", "block", "lambda", "spot", "contract", "knock_rate", "euro", "amer", "eep",
                    "eep_diffusion", "eep_pct", "dc_pct", "ref_euro", "ref_eep", "ref_amer", "ref_eep_pct",
                    "ref_dc_pct", "gs_order", "engine_version",
                ]),
                lines
                    .iter()
                    .map(|l| {
                        vec![
                            l.table.to_string(),
                            l.block.to_string(),
                            l.lambda.to_string(),
                            l.spot.to_string(),
                            l.contract.clone(),
                            l.knock_rate.to_string(),
                            l.euro.to_string(),
                            l.amer.to_string(),
                            l.eep.to_string(),
                            l.eep_diffusion.to_string(),
                            cell(l.eep_pct),
                            cell(l.dc_pct),
                            cell(l.ref_euro),
                            cell(l.ref_eep),
                            cell(l.ref_amer),
                            cell(l.ref_eep_pct),
                            cell(l.ref_dc_pct),
                            l.gs_order.to_string(),
                            l.engine_version.clone(),
                        ]
                    })
                    .collect(),
            ),
            Report::Greeks(points) => (
                s(&["x", "value", "delta", "gamma"]),
                points
                    .iter()
                    .map(|p| vec![p.x.to_string(), p.value.to_string(), p.delta.to_string(), p.gamma.to_string()])
                    .collect(),
            ),
            Report::Roots { alpha, roots } => (
                s(&["alpha", "side", "index", "root", "lower", "upper", "residual"]),
                roots
                    .iter()
                    .map(|r| {
                        vec![
                            alpha.to_string(),
                            r.side.to_string(),
                            r.index.to_string(),
                            r.root.to_string(),
                            cell(r.lower),
                            cell(r.upper),
                            r.residual.to_string(),
                        ]
                    })
                    .collect(),
            ),
            Report::Verify(v) => (
                s(&[
                    "engine", "mc_value", "mc_std_error", "deviation_se", "dual_call", "dual_put",
                    "dual_difference", "pooled_se", "duality_z", "n_paths", "dt", "seed",
                ]),
                vec![vec![
                    v.engine.to_string(),
                    v.mc_value.to_string(),
                    v.mc_std_error.to_string(),
                    v.deviation_se.to_string(),
                    v.dual_call.to_string(),
                    v.dual_put.to_string(),
                    v.dual_difference.to_string(),
                    v.pooled_se.to_string(),
                    v.duality_z.to_string(),
                    v.n_paths.to_string(),
                    v.dt.to_string(),
                    v.seed.to_string(),
                ]],
            ),
        }
    }

    /// Human-readable rendering; prices at three decimals.
    pub fn text(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Price(p) => {
                for v in &p.values {
                    out += &format!("{:<14} {:.3}\n", v.quantity, v.value);
                }
                if let Some(v) = p.eep_pct {
                    out += &format!("{:<14} {v:.2}%\n", "eep%");
                }
                if let Some(v) = p.dc_pct {
                    out += &format!("{:<14} {v:.2}%\n", "dc%");
                }
            }
            Report::Table(lines) => {
                out += &format!(
                    "{:>5} {:>6} {:>6} {:<9} {:>8} {:>8} {:>8} {:>8} {:>8}   {:>8} {:>8} {:>8} {:>8} {:>8}\n",
                    "block", "lambda", "spot", "contract", "euro", "amer", "eep", "eep%", "dc%", "ref euro", "ref amer",
                    "ref eep", "ref eep%", "ref dc%"
                );
                for l in lines {
                    out += &format!(
                        "{:>5} {:>6} {:>6} {:<9} {:>8.3} {:>8.3} {:>8.3} {:>8} {:>8}   {:>8} {:>8} {:>8} {:>8} {:>8}\n",
                        l.block,
                        l.lambda,
                        l.spot,
                        l.contract,
                        l.euro,
                        l.amer,
                        l.eep,
                        fixed(l.eep_pct, 2),
                        fixed(l.dc_pct, 2),
                        fixed(l.ref_euro, 3),
                        fixed(l.ref_amer, 3),
                        fixed(l.ref_eep, 3),
                        fixed(l.ref_eep_pct, 2),
                        fixed(l.ref_dc_pct, 2),
                    );
                }
            }
            Report::Greeks(points) => {
                out += &format!("{:>10} {:>10} {:>10} {:>10}\n", "x", "value", "delta", "gamma");
                for p in points {
                    out += &format!("{:>10.3} {:>10.3} {:>10.4} {:>10.5}\n", p.x, p.value, p.delta, p.gamma);
                }
            }
            Report::Roots { alpha, roots } => {
                out += &format!("alpha = {alpha}\n");
                out += &format!("{:<6} {:>3} {:>22} {:>12} {:>12} {:>10}\n", "side", "i", "root", "lower", "upper", "residual");
                for r in roots {
                    let bound = |b: Option<f64>, inf: &str| b.map_or_else(|| inf.to_string(), |v| format!("{v:.6}"));
                    out += &format!(
                        "{:<6} {:>3} {:>22.15} {:>12} {:>12} {:>10.2e}\n",
                        r.side,
                        r.index,
                        r.root,
                        bound(r.lower, "-inf"),
                        bound(r.upper, "inf"),
                        r.residual
                    );
                }
            }
            Report::Verify(v) => {
                out += &format!("engine         {:.3}\n", v.engine);
                out += &format!("monte carlo    {:.3} (se {:.4}, {:+.2} se)\n", v.mc_value, v.mc_std_error, v.deviation_se);
                out += &format!("dual call      {:.3}\n", v.dual_call);
                out += &format!("dual put       {:.3}\n", v.dual_put);
                out += &format!("difference     {:.4} ({:.2} pooled se)\n", v.dual_difference, v.duality_z);
                out += &format!("paths {} dt {} seed {}\n", v.n_paths, v.dt, v.seed);
            }
        }
        out
    }
}
