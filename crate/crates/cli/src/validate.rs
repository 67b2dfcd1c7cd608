//! Mean squared error between closed-form moments and moments obtained by
//! enumerating every permutation, over random datasets at each size.

use std::fmt::Write;

use clap::{Args, ValueEnum};
use permoment::{
    central_moments, closed_form_moment, ClosedForm, Dataset, ExactOracle, DEFAULT_ENUMERATION_CAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::output::Format;
use crate::{with_threads, CmdResult, Failure};

/// Orders compared in the validation table.
pub const ORDERS: [usize; 4] = [2, 3, 4, 5];

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Distribution of the random x and y coordinates.
    #[arg(long, value_enum, default_value_t = Generator::Uniform)]
    pub generator: Generator,
    /// Which closed-form expressions to check.
    #[arg(long, value_enum, default_value_t = FormArg::Corrected)]
    pub closed_form: FormArg,
    /// Largest n the enumeration may take.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    /// Independent uniform(0, 1) coordinates.
    Uniform,
    /// Independent standard normal coordinates.
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Corrected,
    Verbatim,
}

impl From<FormArg> for ClosedForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Corrected => ClosedForm::Corrected,
            FormArg::Verbatim => ClosedForm::Verbatim,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ValidationRow {
    pub n: usize,
    /// MSE for k = 2, 3, 4, 5.
    pub mse: [f64; 4],
}

#[derive(Debug, Serialize)]
pub struct ValidationTable {
    pub generator: Generator,
    pub seed: u64,
    pub trials: usize,
    pub closed_form: ClosedForm,
    pub orders: [usize; 4],
    pub rows: Vec<ValidationRow>,
}

impl ValidationTable {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string(self).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut out = String::from("n,k2,k3,k4,k5\n");
                for r in &self.rows {
                    let cells: Vec<String> = r.mse.iter().map(|v| format!("{v:e}")).collect();
                    writeln!(out, "{},{}", r.n, cells.join(",")).unwrap();
                }
                out
            }
            Format::Text => {
                let mut out = format!(
                    "MSE of k-th moment ({} trials, {:?} data, seed {})\n{:>8} {:>10} {:>10} {:>10} {:>10}\n",
                    self.trials, self.generator, self.seed, "n", "k=2", "k=3", "k=4", "k=5"
                );
                for r in &self.rows {
                    write!(out, "{:>8}", r.n).unwrap();
                    for v in r.mse {
                        write!(out, " {v:>10.2e}").unwrap();
                    }
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, generator: Generator, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match generator {
            Generator::Uniform => rng.random::<f64>(),
            Generator::Normal => rng.sample(StandardNormal),
        })
        .collect()
}

pub fn run(args: &ValidateArgs) -> CmdResult {
    if args.trials == 0 {
        return Err(Failure::config("--trials must be at least 1"));
    }
    if args.n_min < 3 || args.n_min > args.n_max {
        return Err(Failure::config("need 3 <= --n-min <= --n-max"));
    }
    let oracle = ExactOracle::with_cap(args.cap);
    if args.n_max > oracle.cap {
        return Err(permoment::Error::TooLarge {
            n: args.n_max,
            cap: oracle.cap,
        }
        .into());
    }
    let form: ClosedForm = args.closed_form.into();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let rows = with_threads(args.threads, || -> permoment::Result<Vec<ValidationRow>> {
        let mut rows = Vec::new();
        for n in args.n_min..=args.n_max {
            let mut sq = [0.0f64; 4];
            let mut done = 0;
            while done < args.trials {
                let x = draw(&mut rng, args.generator, n);
                let y = draw(&mut rng, args.generator, n);
                let data = Dataset::new(x, y)?;
                let sx = central_moments(data.x(), 5)?;
                let sy = central_moments(data.y(), 5)?;
                if sx.sum(2) <= 0.0 || sy.sum(2) <= 0.0 {
                    continue;
                }
                let truth = oracle.moments(&data, 5)?;
                for (slot, &k) in sq.iter_mut().zip(&ORDERS) {
                    let closed = closed_form_moment(&sx, &sy, k, form)?;
                    *slot += (truth.values[k] - closed).powi(2);
                }
                done += 1;
            }
            rows.push(ValidationRow {
                n,
                mse: sq.map(|s| s / args.trials as f64),
            });
        }
        Ok(rows)
    })??;

    Ok(crate::output::Report::Validate(ValidationTable {
        generator: args.generator,
        seed: args.seed,
        trials: args.trials,
        closed_form: form,
        orders: ORDERS,
        rows,
    }))
}
