use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fermicorr::discord::{discord_direct, discord_mcmc, discord_werner_closed_form, singlet_werner_state, McmcOptions};
use fermicorr::hubbard::{
    asymptotic_rcrit, critical_distance_gibbs, critical_distance_mode, critical_distance_particle, default_grid, scan,
    thermal_bound, DimerParams, Ensemble, Picture, ScanOptions,
};
use fermicorr::rdmio::{parse_rdm, write_scan, write_scan_file, ScanFormat, ScanRecord};
use fermicorr::scan::{par_map, parse_grid, resolve_jobs};
use fermicorr::sep_opt::{
    closest_separable_alternating, e_ppt, horodecki_state, werner_state, AltOptions, FactorField,
};
use fermicorr::ssr::{ssr_measure, SsrMeasure};
use fermicorr::twoorb::{intrinsic_correlation, single_orbital_measures};
use fermicorr::{DensityMatrix, Error, LogBase, Result, SsrKind, TensorShape};

#[derive(Parser)]
#[command(name = "fermicorr", version, about = "Correlation and entanglement of fermionic states")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Superselection rule: none, p or n. Each command has its own default.
    #[arg(long, global = true)]
    ssr: Option<SsrKind>,
    #[arg(long, global = true, value_enum, default_value = "e")]
    log_base: Base,
    /// Seed of every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; defaults to json for a .json output file and csv otherwise.
    #[arg(long, global = true)]
    format: Option<ScanFormat>,
    /// Worker threads for scans; falls back to FERMICORR_JOBS, then the core count.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    E,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Canonical,
    Grand,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiscordMethod {
    Mcmc,
    Direct,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ppt,
    Alternating,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    Auto,
    Complex,
    RealPart,
    Real,
}

#[derive(Clone, Copy, ValueEnum)]
enum RcritMethod {
    /// Root of the ground-plus-triplet criterion.
    Spectral,
    /// Root of the measure on the full Gibbs state.
    Gibbs,
}

#[derive(Subcommand)]
enum Command {
    /// Total correlation, entanglement and classical correlation of the Bell state.
    Bell,
    /// Geometric discord of the singlet Werner family against its closed form.
    Discord {
        #[arg(long, default_value = "werner")]
        family: String,
        /// Mixing parameter grid `start:stop:step`.
        #[arg(long, default_value = "0:1:0.1")]
        c: String,
        #[arg(long, value_enum, default_value = "mcmc")]
        method: DiscordMethod,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Basis pairs drawn by the direct method.
        #[arg(long, default_value_t = 20000)]
        samples: usize,
    },
    /// Relative entropy of entanglement of the two-qubit Werner family.
    Werner {
        #[arg(long, default_value = "0:1:0.02")]
        p: String,
        #[command(flatten)]
        alt: AltArgs,
    },
    /// Upper and PPT bounds on the 3×3 bound-entangled family.
    Horodecki {
        #[arg(long, default_value = "0:1:0.025")]
        a: String,
        #[command(flatten)]
        alt: AltArgs,
    },
    /// Hubbard dimer scans, critical distances and the thermal bound.
    Hubbard {
        #[command(subcommand)]
        action: HubbardAction,
    },
    /// I, E and C of a two-orbital state read from an RDM file.
    Twoorb {
        #[arg(long)]
        rdm: PathBuf,
    },
    /// Particle-picture measures of the Hubbard dimer, or the intrinsic correlation of occupations.
    Particle {
        #[command(flatten)]
        grid: GridArgs,
        /// Descending natural occupation numbers, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["temperature", "r"])]
        occupations: Option<Vec<f64>>,
        #[arg(long, requires = "occupations")]
        particles: Option<usize>,
    },
    /// Closest separable state of an RDM file or a named family member.
    SepOpt {
        /// RDM file; alternatively `--state werner:P` or `--state horodecki:A`.
        #[arg(long, conflicts_with = "state")]
        rdm: Option<PathBuf>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        #[command(flatten)]
        alt: AltArgs,
    },
    /// Validates an RDM file and summarizes it.
    Rdm { file: PathBuf },
}

#[derive(Subcommand)]
enum HubbardAction {
    /// Measures on a (T, r) grid; the default grid is used when neither flag is given.
    Scan {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "mode")]
        picture: Picture,
    },
    /// Distance beyond which the entanglement vanishes.
    Rcrit {
        #[arg(long, default_value = "mode")]
        picture: Picture,
        #[arg(long = "T", default_value = "0.1")]
        temperature: String,
        #[arg(long, value_enum, default_value = "spectral")]
        method: RcritMethod,
    },
    /// Mutual information against the coupling bound.
    Bound {
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Temperature grid `start:stop:step` or a single value.
    #[arg(long = "T")]
    temperature: Option<String>,
    /// Distance grid `start:stop:step` or a single value.
    #[arg(long)]
    r: Option<String>,
    #[arg(long, value_enum, default_value = "canonical")]
    ensemble: EnsembleArg,
}

#[derive(Args)]
struct AltArgs {
    /// Product terms of the alternating search; the field's default budget if omitted.
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, value_enum, default_value = "auto")]
    field: Field,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
}

impl Global {
    fn base(&self) -> LogBase {
        match self.log_base {
            Base::E => LogBase::E,
            Base::Two => LogBase::Two,
        }
    }

    fn nats(&self, x: f64) -> f64 {
        self.base().from_nats(x)
    }

    fn jobs(&self) -> usize {
        resolve_jobs(self.jobs)
    }

    fn emit(&self, records: &[ScanRecord]) -> Result<()> {
        let format = self.format.unwrap_or_else(|| match &self.out {
            Some(p) if p.extension().is_some_and(|e| e == "json") => ScanFormat::Json,
            _ => ScanFormat::Csv,
        });
        match &self.out {
            Some(path) => write_scan_file(records, format, path),
            None => write_scan(records, format, std::io::stdout().lock()),
        }
    }
}

impl AltArgs {
    fn options(&self, seed: u64) -> AltOptions {
        let field = match self.field {
            Field::Auto => FactorField::Auto,
            Field::Complex => FactorField::Complex,
            Field::RealPart => FactorField::RealPart,
            Field::Real => FactorField::Real,
        };
        AltOptions {
            terms: self.terms,
            restarts: self.restarts,
            seed,
            field,
            max_sweeps: self.max_sweeps,
            ..Default::default()
        }
    }
}

impl GridArgs {
    fn ensemble(&self) -> Ensemble {
        match self.ensemble {
            EnsembleArg::Canonical => Ensemble::Canonical,
            EnsembleArg::Grand => Ensemble::GrandCanonical,
        }
    }

    fn points(&self) -> Result<Vec<(f64, f64)>> {
        match (&self.temperature, &self.r) {
            (None, None) => Ok(default_grid()),
            (Some(t), Some(r)) => {
                let (ts, rs) = (parse_grid(t)?, parse_grid(r)?);
                Ok(ts.iter().flat_map(|&t| rs.iter().map(move |&r| (t, r))).collect())
            }
            _ => Err(Error::Argument("give both --T and --r, or neither for the default grid".into())),
        }
    }
}

fn row(params: &[(&str, f64)], measures: &[(&str, f64)]) -> ScanRecord {
    let own = |v: &[(&str, f64)]| v.iter().map(|&(k, x)| (k.to_string(), x)).collect();
    let mut r = ScanRecord::new(own(params));
    r.measures = own(measures);
    r
}

/// Converts the named measure columns of scan records to the output base.
fn rebase(records: &mut [ScanRecord], g: &Global) {
    for r in records {
        for (_, v) in &mut r.measures {
            *v = g.nats(*v);
        }
    }
}

fn bell_state() -> Result<DensityMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = fermicorr::densmat::CVec::from_vec(
        [h, 0.0, 0.0, h].iter().map(|&x| fermicorr::densmat::C64::new(x, 0.0)).collect(),
    );
    DensityMatrix::from_pure(TensorShape::bipartite(2, 2), &psi)
}

/// I, E and C under `ssr` for a bipartite state whose factors hold `modes` modes each.
fn triple(rho: &DensityMatrix, ssr: SsrKind, modes: &[usize], g: &Global) -> Result<ScanRecord> {
    let m = |k| ssr_measure(rho, ssr, modes, k).map(|x| g.nats(x));
    Ok(row(
        &[],
        &[
            ("I", m(SsrMeasure::TotalCorrelation)?),
            ("E", m(SsrMeasure::Entanglement)?),
            ("C", m(SsrMeasure::ClassicalCorrelation)?),
        ],
    ))
}

/// Runs `f` over a parameter grid in parallel; the first failing point aborts.
fn grid_rows(
    name: &str,
    grid: &str,
    g: &Global,
    f: impl Fn(f64) -> Result<Vec<(&'static str, f64)>> + Sync,
) -> Result<Vec<ScanRecord>> {
    let xs = parse_grid(grid)?;
    par_map(&xs, g.jobs(), |&x| f(x).map(|m| row(&[(name, x)], &m))).into_iter().collect()
}

fn named_state(spec: &str) -> Result<DensityMatrix> {
    let (family, value) =
        spec.split_once(':').ok_or_else(|| Error::Argument(format!("state {spec:?} is not family:value")))?;
    let x: f64 = value.parse().map_err(|_| Error::Argument(format!("bad parameter {value:?}")))?;
    match family {
        "werner" => werner_state(x),
        "horodecki" => horodecki_state(x),
        "bell" => bell_state(),
        _ => Err(Error::Argument(format!("unknown family {family:?}"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let records = match cli.command {
        Command::Bell => vec![triple(&bell_state()?, g.ssr.unwrap_or(SsrKind::None), &[1, 1], g)?],
        Command::Discord { family, c, method, steps, restarts, samples } => {
            if family != "werner" {
                return Err(Error::Argument(format!("unknown discord family {family:?}")));
            }
            grid_rows("c", &c, g, |c| {
                let rho = singlet_werner_state(c)?;
                let d = match method {
                    DiscordMethod::Mcmc => {
                        let opts = McmcOptions { steps, restarts, seed: g.seed, ..Default::default() };
                        discord_mcmc(&rho, &opts)?
                    }
                    DiscordMethod::Direct => discord_direct(&rho, samples, g.seed)?,
                };
                Ok(vec![("discord", g.nats(d.discord)), ("closed_form", g.nats(discord_werner_closed_form(c)?))])
            })?
        }
        Command::Werner { p, alt } => grid_rows("p", &p, g, |p| {
            let rho = werner_state(p)?;
            let upper = closest_separable_alternating(&rho, &alt.options(g.seed))?;
            Ok(vec![("E_RE", g.nats(upper.value)), ("E_PPT", g.nats(e_ppt(&rho)?.value))])
        })?,
        Command::Horodecki { a, alt } => grid_rows("a", &a, g, |a| {
            let rho = horodecki_state(a)?;
            let upper = closest_separable_alternating(&rho, &alt.options(g.seed))?;
            Ok(vec![("E_alt", g.nats(upper.value)), ("E_PPT", g.nats(e_ppt(&rho)?.value))])
        })?,
        Command::Hubbard { action } => hubbard(action, g)?,
        Command::Twoorb { rdm } => {
            let rho = parse_rdm(rdm)?;
            if rho.dim() != 16 {
                return Err(Error::Shape("twoorb needs a two-orbital RDM".into()));
            }
            vec![triple(&rho, g.ssr.unwrap_or(SsrKind::Number), &[2, 2], g)?]
        }
        Command::Particle { grid, occupations, particles } => match occupations {
            Some(occ) => {
                let n = particles.ok_or_else(|| Error::Argument("--occupations needs --particles".into()))?;
                vec![row(&[("N", n as f64)], &[("intrinsic_correlation", intrinsic_correlation(&occ, n)?)])]
            }
            None => {
                let opts = ScanOptions {
                    picture: Picture::Particle,
                    ensemble: grid.ensemble(),
                    jobs: g.jobs(),
                    ..Default::default()
                };
                let mut recs = scan(&grid.points()?, &opts)?;
                rebase(&mut recs, g);
                recs
            }
        },
        Command::SepOpt { rdm, state, method, alt } => {
            let rho = match (rdm, state) {
                (Some(path), _) => parse_rdm(path)?,
                (None, Some(spec)) => named_state(&spec)?,
                (None, None) => return Err(Error::Argument("give --rdm or --state".into())),
            };
            sep_opt(&rho, method, &alt, g)?
        }
        Command::Rdm { file } => vec![rdm_summary(&parse_rdm(file)?, g)?],
    };
    g.emit(&records)
}

fn sep_opt(rho: &DensityMatrix, method: Method, alt: &AltArgs, g: &Global) -> Result<Vec<ScanRecord>> {
    let mut measures = Vec::new();
    if matches!(method, Method::Ppt | Method::Both) {
        measures.push(("E_PPT", g.nats(e_ppt(rho)?.value)));
    }
    if matches!(method, Method::Alternating | Method::Both) {
        let r = closest_separable_alternating(rho, &alt.options(g.seed))?;
        if !r.converged {
            return Err(Error::NoConvergence(format!(
                "alternating search stopped after {} sweeps at {}",
                r.iterations, r.value
            )));
        }
        measures.push(("E_alt", g.nats(r.value)));
    }
    Ok(vec![row(&[], &measures)])
}

fn rdm_summary(rho: &DensityMatrix, g: &Global) -> Result<ScanRecord> {
    let spectrum = rho.spectrum();
    let entropy = g.nats(fermicorr::densmat::von_neumann_entropy(rho, LogBase::E));
    let mut measures = vec![("min_eigenvalue", spectrum[0]), ("entropy", entropy)];
    if rho.dim() == 4 {
        // A one-orbital state is diagonal in (Ω, ↑, ↓, ↑↓) when it respects the number rule.
        let p: Vec<f64> = (0..4).map(|i| rho.matrix()[(i, i)].re).collect();
        let s = single_orbital_measures(&p)?;
        measures.extend([
            ("E_none", g.nats(s.entanglement.none)),
            ("E_p", g.nats(s.entanglement.parity)),
            ("E_n", g.nats(s.entanglement.number)),
        ]);
    }
    Ok(row(&[("dim", rho.dim() as f64)], &measures))
}

fn hubbard(action: HubbardAction, g: &Global) -> Result<Vec<ScanRecord>> {
    match action {
        HubbardAction::Scan { grid, picture } => {
            let opts = ScanOptions {
                picture,
                ssr: g.ssr.unwrap_or(SsrKind::Number),
                ensemble: grid.ensemble(),
                jobs: g.jobs(),
                ..Default::default()
            };
            let mut recs = scan(&grid.points()?, &opts)?;
            rebase(&mut recs, g);
            Ok(recs)
        }
        HubbardAction::Rcrit { picture, temperature, method } => {
            let ts = parse_grid(&temperature)?;
            par_map(&ts, g.jobs(), |&t| {
                let r = match (method, picture) {
                    (RcritMethod::Spectral, Picture::Mode) => critical_distance_mode(t)?,
                    (RcritMethod::Spectral, Picture::Particle) => critical_distance_particle(t)?,
                    (RcritMethod::Gibbs, p) => critical_distance_gibbs(t, p)?,
                };
                Ok(row(&[("T", t)], &[("r_crit", r), ("r_asymptotic", asymptotic_rcrit(t, picture))]))
            })
            .into_iter()
            .collect()
        }
        HubbardAction::Bound { grid } => {
            let ensemble = grid.ensemble();
            par_map(&grid.points()?, g.jobs(), |&(t, r)| {
                let b = thermal_bound(&DimerParams::from_r(r, t)?, ensemble)?;
                Ok(row(
                    &[("T", t), ("r", r)],
                    &[
                        ("mutual_information", g.nats(b.lhs)),
                        ("bound", g.nats(b.rhs)),
                        ("satisfied", f64::from(u8::from(b.satisfied))),
                    ],
                ))
            })
            .into_iter()
            .collect()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::NoConvergence(_)) { 2 } else { 1 })
        }
    }
}
