use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kumiw::bayes::{self, GammaPrior, McmcConfig, PriorSpec};
use kumiw::mle::{self, MleOptions};
use kumiw::survdata::{self, format_float as num, kaplan_meier, km_vs_parametric};
use kumiw::{CensoredDataset, KumIwParams, SubModel};

use crate::args::{
    Cli, Command, CompareArgs, DataArgs, DistArgs, FitBayesArgs, FitMleArgs, Format, KmArgs, ParamArgs, SampleArgs,
};
use crate::config::FileConfig;
use crate::report::{BayesReport, MleReport, ParamsSource, StudyReport};
use crate::CliError;

type CliResult<T = ()> = Result<T, CliError>;

/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

struct Ctx {
    config: FileConfig,
    out_dir: PathBuf,
}

impl Ctx {
    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        fs::create_dir_all(&self.out_dir)?;
        Ok(BufWriter::new(File::create(self.out_dir.join(name))?))
    }

    fn write_text(&self, name: &str, text: &str) -> CliResult {
        let mut w = self.create(name)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    fn params(&self, flags: &ParamArgs) -> CliResult<KumIwParams> {
        let cfg = &self.config.params;
        let pick = |flag: Option<f64>, file: Option<f64>, name: &str| {
            flag.or(file)
                .ok_or_else(|| CliError::Usage(format!("parameter {name} not given (use --{name} or [params] in the config)")))
        };
        Ok(KumIwParams::new(
            pick(flags.b, cfg.b, "b")?,
            pick(flags.c, cfg.c, "c")?,
            pick(flags.beta, cfg.beta, "beta")?,
        )?)
    }
}

pub fn run(cli: Cli) -> CliResult {
    let config = FileConfig::load(cli.config.as_deref())?;
    let out_dir = cli
        .out_dir
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx { config, out_dir };
    match cli.command {
        Command::Dist(a) => dist(&ctx, a),
        Command::Sample(a) => sample(&ctx, a),
        Command::FitMle(a) => fit_mle(&ctx, a),
        Command::FitBayes(a) => fit_bayes(&ctx, a),
        Command::Km(a) => km(&ctx, a),
        Command::Compare(a) => compare(&ctx, a),
    }
}

fn triple(v: &[f64], what: &str) -> CliResult<KumIwParams> {
    match v {
        [b, c, beta] => Ok(KumIwParams::new(*b, *c, *beta)?),
        _ => Err(CliError::Usage(format!("{what} needs three values b,c,beta, got {}", v.len()))),
    }
}

fn gamma_prior(flag: Option<&Vec<f64>>, file: Option<[f64; 2]>, name: &str) -> CliResult<GammaPrior> {
    match (flag.map(Vec::as_slice), file.as_ref()) {
        (Some([shape, rate]), _) | (None, Some([shape, rate])) => Ok(GammaPrior::new(*shape, *rate)?),
        (Some(v), _) => Err(CliError::Usage(format!("--prior-{name} needs shape,rate, got {} values", v.len()))),
        (None, None) => Ok(GammaPrior::default()),
    }
}

fn load_data(a: &DataArgs) -> CliResult<CensoredDataset> {
    if a.stand_in {
        return Ok(survdata::synthetic_stand_in());
    }
    let path = a
        .data
        .as_deref()
        .ok_or_else(|| CliError::Usage("a dataset is required: pass --data <file> or --stand-in".into()))?;
    let text = fs::read_to_string(path).map_err(|e| kumiw::Error::Data {
        row: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let has_status = text
        .lines()
        .next()
        .is_some_and(|h| h.split(',').any(|f| f.trim().trim_matches('"') == a.status_col));
    let status = has_status.then_some(a.status_col.as_str());
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    Ok(survdata::read_csv(text.as_bytes(), name, &a.time_col, status)?)
}

fn dist(ctx: &Ctx, a: DistArgs) -> CliResult {
    let p = ctx.params(&a.params)?;
    let grid = match a.t {
        Some(t) => t,
        None => {
            let g = &ctx.config.grid;
            let lo = a.t_min.or(g.t_min).unwrap_or(0.1);
            let hi = a.t_max.or(g.t_max).unwrap_or(5.0);
            let m = a.points.or(g.points).unwrap_or(100);
            if m == 0 || !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(CliError::Usage(format!("bad grid: t from {lo} to {hi} with {m} points")));
            }
            if m == 1 {
                vec![lo]
            } else {
                (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
            }
        }
    };
    let mut out = String::from("t,pdf,cdf,survival,hazard\n");
    for t in grid {
        writeln!(out, "{},{},{},{},{}", num(t), num(p.pdf(t)?), num(p.cdf(t)?), num(p.survival(t)?), num(p.hazard(t)?)).unwrap();
    }
    ctx.write_text("dist.csv", &out)
}

fn sample(ctx: &Ctx, a: SampleArgs) -> CliResult {
    let p = ctx.params(&a.params)?;
    let seed = ctx.config.seed(a.seed.seed);
    match a.censor_rate {
        None => {
            let mut out = String::from("time\n");
            for t in p.sample(a.n, seed) {
                writeln!(out, "{}", num(t)).unwrap();
            }
            ctx.write_text("sample.csv", &out)
        }
        Some(_) if a.n == 0 => ctx.write_text("sample.csv", "time,status\n"),
        Some(rate) => {
            if !(0.0..1.0).contains(&rate) {
                return Err(CliError::Usage(format!("--censor-rate must lie in [0, 1), got {rate}")));
            }
            let d = survdata::simulate_censored(&p, a.n, rate, seed)?;
            let mut w = ctx.create("sample.csv")?;
            d.write_csv(&mut w)?;
            w.flush()?;
            eprintln!("{} observations, {} censored", d.len(), d.n_censored());
            Ok(())
        }
    }
}

fn mle_options(ctx: &Ctx, level: Option<f64>) -> CliResult<MleOptions> {
    let level = level.or(ctx.config.mle.level).unwrap_or(MleOptions::default().level);
    mle::normal_critical_value(level).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(MleOptions {
        level,
        ..MleOptions::default()
    })
}

fn parse_model(s: &str) -> CliResult<SubModel> {
    SubModel::from_str(s).map_err(|e| CliError::Usage(e.to_string()))
}

fn fit_mle(ctx: &Ctx, a: FitMleArgs) -> CliResult {
    let opts = mle_options(ctx, a.level)?;
    if let Some(reps) = a.replicates {
        return simulation_study(ctx, &a, reps, &opts);
    }
    let model = parse_model(&a.model)?;
    let nulls = a.lr_null.iter().map(|s| parse_model(s)).collect::<CliResult<Vec<_>>>()?;
    let init = a.init.as_deref().map(|v| triple(v, "--init")).transpose()?;
    let d = load_data(&a.data)?;
    let fit = mle::fit_submodel(&d, model, init.as_ref(), &opts)?;
    let tests = nulls
        .iter()
        .map(|null| mle::lr_test(&d, *null, &opts))
        .collect::<kumiw::Result<Vec<_>>>()?;
    let report = MleReport::new(&d, &fit, &tests);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match a.format {
        Format::Json => ctx.write_text("fit_mle.json", &(json.clone() + "\n"))?,
        Format::Csv => {
            let mut out = String::from("parameter,estimate,free,std_error,ci_lower,ci_upper\n");
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            for r in &report.parameters {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.name,
                    num(r.estimate),
                    r.free,
                    opt(r.std_error),
                    opt(r.ci_lower),
                    opt(r.ci_upper)
                )
                .unwrap();
            }
            ctx.write_text("fit_mle.csv", &out)?;
            if !tests.is_empty() {
                let mut out = String::from("null_model,statistic,df,p_value,full_loglik,null_loglik\n");
                for t in &report.lr_tests {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        t.null_model,
                        num(t.statistic),
                        t.df,
                        num(t.p_value),
                        num(t.full_loglik),
                        num(t.null_loglik)
                    )
                    .unwrap();
                }
                ctx.write_text("lr_tests.csv", &out)?;
            }
        }
    }
    say!("{json}");
    if !fit.converged {
        return Err(kumiw::Error::NonConvergence {
            routine: "maximum likelihood fit",
            iterations: fit.iterations,
        }
        .into());
    }
    Ok(())
}

fn simulation_study(ctx: &Ctx, a: &FitMleArgs, reps: usize, opts: &MleOptions) -> CliResult {
    let truth = ctx.params(&a.truth)?;
    let n = a.n.unwrap_or(500);
    let rate = a.censor_rate.unwrap_or(0.0);
    let seed = ctx.config.seed(a.seed.seed);
    let outcomes = mle::simulation_study(&truth, n, rate, reps, seed, opts)?;
    let summary = mle::summarize_study(&truth, &outcomes);
    let report = StudyReport::new(truth, n, rate, seed, opts.level, &outcomes, &summary);
    match a.format {
        Format::Json => {
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            ctx.write_text("study.json", &(json + "\n"))?;
        }
        Format::Csv => {
            let mut out = String::from("seed,converged,b,c,beta,loglik,loglik_truth\n");
            for r in &report.runs {
                let (b, c, beta, ll) = match (r.estimates, r.loglik) {
                    (Some(e), Some(ll)) => (num(e.b()), num(e.c()), num(e.beta()), num(ll)),
                    _ => Default::default(),
                };
                writeln!(out, "{},{},{b},{c},{beta},{ll},{}", r.seed, r.converged, num(r.loglik_truth)).unwrap();
            }
            ctx.write_text("study.csv", &out)?;
        }
    }
    say!(
        "{} of {} replicates converged\nmedian |relative error|: b {:.4}, c {:.4}, beta {:.4}\ncoverage at level {}: b {:.3}, c {:.3}, beta {:.3}",
        summary.converged,
        summary.replicates,
        summary.median_abs_rel_error[0],
        summary.median_abs_rel_error[1],
        summary.median_abs_rel_error[2],
        opts.level,
        summary.coverage[0],
        summary.coverage[1],
        summary.coverage[2],
    );
    Ok(())
}

fn fit_bayes(ctx: &Ctx, a: FitBayesArgs) -> CliResult {
    let pc = &ctx.config.prior;
    let prior = PriorSpec {
        b: gamma_prior(a.prior_b.as_ref(), pc.b, "b")?,
        c: gamma_prior(a.prior_c.as_ref(), pc.c, "c")?,
        beta: gamma_prior(a.prior_beta.as_ref(), pc.beta, "beta")?,
    };
    let mc = &ctx.config.mcmc;
    let defaults = McmcConfig::default();
    let scale = a.proposal_scale.or(mc.proposal_scale);
    let cfg = McmcConfig {
        n_iter: a.n_iter.or(mc.n_iter).unwrap_or(defaults.n_iter),
        burn_in: a.burn_in.or(mc.burn_in).unwrap_or(defaults.burn_in),
        thin: a.thin.or(mc.thin).unwrap_or(defaults.thin),
        seed: ctx.config.seed(a.seed.seed),
        proposal_scales: scale.map(|s| [s; 3]).unwrap_or(defaults.proposal_scales),
        adapt: !a.no_adapt,
        init: a.init.as_deref().map(|v| triple(v, "--init")).transpose()?,
        ..defaults
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let d = load_data(&a.data)?;
    let chain = bayes::run_mcmc(&d, &prior, &cfg)?;
    let summary = bayes::summarize(&chain)?;
    let mut w = ctx.create("chain.csv")?;
    chain.write_csv(&mut w)?;
    w.flush()?;
    let mut w = ctx.create("summary.csv")?;
    summary.write_csv(&mut w)?;
    w.flush()?;
    if a.format == Format::Json {
        let report = BayesReport::new(&d, &prior, &cfg, &chain, &summary);
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        ctx.write_text("fit_bayes.json", &(json + "\n"))?;
    }
    let _ = write!(std::io::stdout().lock(), "{summary}");
    say!(
        "acceptance rates: b {:.3}, c {:.3}, beta {:.3}",
        chain.acceptance_rates[0], chain.acceptance_rates[1], chain.acceptance_rates[2]
    );
    for w in &chain.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn km(ctx: &Ctx, a: KmArgs) -> CliResult {
    let d = load_data(&a.data)?;
    let curve = kaplan_meier(&d)?;
    let mut w = ctx.create("km.csv")?;
    curve.write_csv(&mut w)?;
    w.flush()?;
    say!("{} distinct event times from {} observations", curve.len(), d.len());
    Ok(())
}

fn read_params_file(path: &Path) -> CliResult<KumIwParams> {
    let text = fs::read_to_string(path).map_err(kumiw::Error::from)?;
    let bad = |e: String| CliError::Usage(format!("cannot read parameters from {}: {e}", path.display()));
    let source: ParamsSource = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    Ok(source.params())
}

fn compare(ctx: &Ctx, a: CompareArgs) -> CliResult {
    let d = load_data(&a.data)?;
    let flags = &a.params;
    let any_flag = flags.b.is_some() || flags.c.is_some() || flags.beta.is_some();
    let cfg = &ctx.config.params;
    let p = if any_flag {
        ctx.params(flags)?
    } else if let Some(path) = &a.params_file {
        read_params_file(path)?
    } else if cfg.b.is_some() || cfg.c.is_some() || cfg.beta.is_some() {
        ctx.params(flags)?
    } else {
        let fit = mle::fit_mle(&d, None, &mle_options(ctx, None)?)?;
        if !fit.converged {
            return Err(kumiw::Error::NonConvergence {
                routine: "maximum likelihood fit",
                iterations: fit.iterations,
            }
            .into());
        }
        eprintln!("fitted by maximum likelihood: {}", fit.estimates);
        fit.estimates
    };
    let curve = kaplan_meier(&d)?;
    let table = km_vs_parametric(&d, &p)?;
    let mut w = ctx.create("km.csv")?;
    curve.write_csv(&mut w)?;
    w.flush()?;
    let mut w = ctx.create("compare.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let mut w = ctx.create("qq.csv")?;
    table.write_qq_csv(&mut w)?;
    w.flush()?;
    say!(
        "model {p}\nmean |KM - model| {:.6}\nmax |KM - model| {:.6}",
        table.mean_abs_diff(),
        table.max_abs_diff()
    );
    Ok(())
}
