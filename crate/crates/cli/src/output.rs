use std::collections::BTreeMap;
use std::fmt::Write;

use clap::ValueEnum;
use permoment::{Method, Mode, MomentVector, PvalueEstimate, PvalueMethod, Tail};
use serde::Serialize;

use crate::bench::BenchRow;
use crate::validate::ValidationTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub enum Report {
    Moments(MomentVector),
    Pvalue {
        n: usize,
        mode: Mode,
        estimate: PvalueEstimate,
    },
    Validate(ValidationTable),
    SpearmanTable(Vec<MomentVector>),
    Bench(Vec<BenchRow>),
}

#[derive(Serialize)]
struct MomentsJson<'a> {
    n: usize,
    mode: Mode,
    moments: &'a [f64],
    method_per_k: &'a [Method],
}

#[derive(Serialize)]
struct PvalueJson<'a> {
    n: usize,
    mode: Mode,
    rho_obs: f64,
    p: f64,
    method: PvalueMethod,
    tail: Tail,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    diagnostics: &'a BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct SpearmanRow {
    n: usize,
    k: usize,
    moment: f64,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable report");
    s.push('\n');
    s
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::ClosedForm => "closed-form",
        Method::Inductive => "inductive",
        Method::OracleExact => "oracle-exact",
        Method::OracleMc => "oracle-mc",
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Pearson => "pearson",
        Mode::Spearman => "spearman",
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match self {
            Report::Moments(mv) => render_moments(mv, format),
            Report::Pvalue { n, mode, estimate } => render_pvalue(*n, *mode, estimate, format),
            Report::Validate(t) => t.render(format),
            Report::SpearmanTable(rows) => render_spearman(rows, format),
            Report::Bench(rows) => crate::bench::render(rows, format),
        }
    }
}

fn render_moments(mv: &MomentVector, format: Format) -> String {
    match format {
        Format::Json => json(&MomentsJson {
            n: mv.n,
            mode: mv.mode,
            moments: &mv.values,
            method_per_k: &mv.methods,
        }),
        Format::Csv => {
            let mut out = String::from("k,moment,method\n");
            for (k, (v, m)) in mv.values.iter().zip(&mv.methods).enumerate() {
                writeln!(out, "{k},{v:e},{}", method_name(*m)).unwrap();
            }
            out
        }
        Format::Text => {
            let mut out = format!("n = {}, mode = {}\n", mv.n, mode_name(mv.mode));
            for (k, (v, m)) in mv.values.iter().zip(&mv.methods).enumerate() {
                writeln!(out, "<rho^{k:<2}> = {v:>24.17e}  ({})", method_name(*m)).unwrap();
            }
            out
        }
    }
}

fn render_pvalue(n: usize, mode: Mode, e: &PvalueEstimate, format: Format) -> String {
    match format {
        Format::Json => json(&PvalueJson {
            n,
            mode,
            rho_obs: e.rho_obs,
            p: e.p,
            method: e.method,
            tail: e.tail,
            k: e.order,
            diagnostics: &e.diagnostics,
        }),
        Format::Csv => {
            let mut out = String::from("n,mode,rho_obs,p,method,tail\n");
            writeln!(
                out,
                "{n},{},{:e},{:e},{},{}",
                mode_name(mode),
                e.rho_obs,
                e.p,
                e.method,
                e.tail
            )
            .unwrap();
            out
        }
        Format::Text => {
            let mut out = format!(
                "n = {n}, mode = {}, rho_obs = {:.6}\np = {:.6} ({}, {}-tailed)\n",
                mode_name(mode),
                e.rho_obs,
                e.p,
                e.method,
                e.tail
            );
            for (k, v) in &e.diagnostics {
                writeln!(out, "  {k}: {v}").unwrap();
            }
            out
        }
    }
}

fn render_spearman(rows: &[MomentVector], format: Format) -> String {
    let flat: Vec<SpearmanRow> = rows
        .iter()
        .flat_map(|mv| {
            mv.values
                .iter()
                .enumerate()
                .skip(1)
                .map(move |(k, &moment)| SpearmanRow { n: mv.n, k, moment })
        })
        .collect();
    match format {
        Format::Json => json(&flat),
        Format::Csv => {
            let mut out = String::from("n,k,moment\n");
            for r in &flat {
                writeln!(out, "{},{},{:e}", r.n, r.k, r.moment).unwrap();
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for r in &flat {
                writeln!(out, "n={:<4} k={:<3} {:>24.17e}", r.n, r.k, r.moment).unwrap();
            }
            out
        }
    }
}
