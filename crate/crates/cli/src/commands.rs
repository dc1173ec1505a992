//! Subcommands. Each returns the text that goes to stdout or `--output`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use fermiqit::channels::{
    apply_kraus, choi_of_channel, kraus_from_choi, kraus_from_stinespring, stinespring_from_kraus,
    stinespring_from_kraus_with_env, verify_axioms, ChoiState, KrausChannel, LinearMap,
};
use fermiqit::entanglement::{purify, schmidt, von_neumann_entropy};
use fermiqit::jordan_wigner::demonstrate_inconsistency;
use fermiqit::nosignal::run_protocol;
use fermiqit::random::seeded;
use fermiqit::ssr::{check_ssr_observable, check_ssr_projector, check_ssr_unitary, is_ssr_state, SsrVerdict};
use fermiqit::{CMatrix, FockOperator, ModeSet, Parity, C64};

use crate::artifact::{read_path, relabel_operator, relabel_state, to_json, Artifact, Document};
use crate::error::CliError;

/// Tolerance for validity checks on file inputs.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "fermiqit",
    version,
    about = "Fermionic-mode quantum information under the parity super-selection rule"
)]
pub struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that an artifact is physically allowed.
    Validate {
        file: PathBuf,
        /// How to read an operator file.
        #[arg(long = "as", value_enum, default_value_t = Role::State)]
        role: Role,
    },
    /// Trace out a set of modes, e.g. `--modes 2,3`.
    Ptrace {
        file: PathBuf,
        #[arg(long, default_value = "")]
        modes: String,
    },
    /// Schmidt decomposition of a pure state across `--partition` and the rest.
    Schmidt {
        file: PathBuf,
        #[arg(long)]
        partition: String,
    },
    /// Even purification with the environment above the system.
    Purify { file: PathBuf },
    /// Von Neumann entropy in bits.
    Entropy { file: PathBuf },
    /// Channel conversions and checks.
    Channel {
        #[command(subcommand)]
        action: ChannelCommand,
    },
    /// Compare the fermionic and qubit partial traces.
    JwCheck {
        file: PathBuf,
        #[arg(long)]
        trace: String,
    },
    /// Run the controlled-unitary signalling protocol.
    Nosignal {
        /// Unitary on party A (modes 1..nA).
        #[arg(long)]
        ua: PathBuf,
        /// Unitary on party B, or `none`.
        #[arg(long)]
        ub: String,
        /// Joint state of A and B; maximally mixed by default.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChannelCommand {
    /// Apply a channel or dilation to a state.
    Apply {
        channel: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Choi operator, ancilla modes above the system.
    Choi { channel: PathBuf },
    /// Stinespring dilation with the environment in the vacuum.
    Dilate {
        channel: PathBuf,
        #[arg(long)]
        env_modes: Option<usize>,
    },
    /// Check trace preservation, convex linearity and complete positivity.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Kraus operators from a dilation or a Choi operator.
    Kraus { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Role {
    State,
    Observable,
    Unitary,
    Projector,
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Validate { file, role } => validate(file, *role),
        Command::Ptrace { file, modes } => cmd_ptrace(file, modes),
        Command::Schmidt { file, partition } => cmd_schmidt(file, partition),
        Command::Purify { file } => cmd_purify(file),
        Command::Entropy { file } => cmd_entropy(file),
        Command::Channel { action } => cmd_channel(action, cli.seed),
        Command::JwCheck { file, trace } => cmd_jw_check(file, trace),
        Command::Nosignal { ua, ub, state } => cmd_nosignal(ua, ub, state.as_deref()),
    }
}

/// Parses `"2,3"`, `"{2,3}"` or `""`.
pub fn parse_mode_list(text: &str) -> Result<Vec<usize>, CliError> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| CliError::Parse(format!("bad mode label {s:?}"))))
        .collect()
}

fn mode_set(text: &str) -> Result<ModeSet, CliError> {
    ModeSet::new(parse_mode_list(text)?).map_err(|e| CliError::Parse(e.to_string()))
}

/// Rounds values that would print as `-0.000000`.
fn clean(x: f64) -> f64 {
    if x.abs() < 5e-7 {
        0.0
    } else {
        x
    }
}

pub fn fmt_real(x: f64) -> String {
    format!("{:.6}", clean(x))
}

pub fn fmt_complex(z: C64) -> String {
    format!("{:.6}{:+.6}i", clean(z.re), clean(z.im))
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(" ")
}

fn fmt_matrix(m: &CMatrix, indent: &str) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_complex(m[(r, c)])).collect();
        let _ = writeln!(s, "{indent}[{}]", row.join(", "));
    }
    s
}

/// An operator file, or a pure state file turned into its projector.
fn read_density(path: &Path) -> Result<(FockOperator, Option<String>), CliError> {
    let doc = read_path(path)?;
    match doc.artifact {
        Artifact::Operator(op) => Ok((op, doc.comment)),
        Artifact::State(st) => Ok((st.projector(), doc.comment)),
        other => {
            Err(CliError::Parse(format!("{}: expected a state or operator, found {:?}", path.display(), other.kind())))
        }
    }
}

fn read_operator(path: &Path) -> Result<FockOperator, CliError> {
    match read_path(path)?.artifact {
        Artifact::Operator(op) => Ok(op),
        other => Err(CliError::Parse(format!("{}: expected an operator, found {:?}", path.display(), other.kind()))),
    }
}

fn verdict_to_result(v: SsrVerdict) -> Result<(), CliError> {
    match v.violation {
        None => Ok(()),
        Some(v) if v.is_parity_violation() => Err(CliError::Ssr(v.to_string())),
        Some(v) => Err(CliError::Verification(v.to_string())),
    }
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
    }
}

fn validate(file: &Path, role: Role) -> Result<String, CliError> {
    let doc = read_path(file)?;
    let n = doc.artifact.n_modes();
    match doc.artifact {
        Artifact::State(st) => {
            let norm = st.norm();
            if (norm - 1.0).abs() > CHECK_TOL {
                return Err(CliError::Verification(format!("state is not normalised (norm {norm:.6})")));
            }
            let p = st.definite_parity(CHECK_TOL).ok_or_else(|| {
                CliError::Ssr("parity SSR violated: state superposes even and odd occupation patterns".into())
            })?;
            Ok(format!("valid: pure state on {n} modes, {} parity\n", parity_name(p)))
        }
        Artifact::Operator(op) => {
            let verdict = match role {
                Role::State => is_ssr_state(&op, CHECK_TOL),
                Role::Observable => check_ssr_observable(&op, CHECK_TOL),
                Role::Unitary => check_ssr_unitary(&op, CHECK_TOL),
                Role::Projector => check_ssr_projector(&op, CHECK_TOL),
            };
            verdict_to_result(verdict)?;
            let what = format!("{role:?}").to_lowercase();
            Ok(format!("valid: {what} on {n} modes\n"))
        }
        Artifact::Channel(ch) => {
            let dev = ch.completeness_deviation();
            if dev > CHECK_TOL {
                return Err(CliError::Verification(format!(
                    "Kraus operators are not trace preserving (deviation {dev:.3e})"
                )));
            }
            let (even, odd) = ch.parity_counts();
            Ok(format!("valid: channel on {n} modes with {} Kraus operators ({even} even, {odd} odd)\n", ch.len()))
        }
        Artifact::Dilation(d) => Ok(format!("valid: dilation on {n} system and {} environment modes\n", d.env().len())),
    }
}

fn cmd_ptrace(file: &Path, modes: &str) -> Result<String, CliError> {
    let traced = mode_set(modes)?;
    let doc = read_path(file)?;
    if traced.is_empty() {
        return Ok(to_json(&doc));
    }
    let rho = match doc.artifact {
        Artifact::Operator(op) => op,
        Artifact::State(st) => st.projector(),
        other => return Err(CliError::Parse(format!("cannot trace a {:?} artifact", other.kind()))),
    };
    let reduced = fermiqit::ptrace::ptrace(&rho, &traced)?;
    let kept = reduced.modes().clone();
    let out = relabel_operator(&reduced)?;
    let comment = format!("partial trace over modes {traced}; kept modes {kept} renumbered from 1");
    Ok(to_json(&Document::new(Artifact::Operator(out), Some(comment))))
}

fn cmd_schmidt(file: &Path, partition: &str) -> Result<String, CliError> {
    let a = mode_set(partition)?;
    let psi = match read_path(file)?.artifact {
        Artifact::State(st) => st,
        other => return Err(CliError::Parse(format!("schmidt needs a pure state, found {:?}", other.kind()))),
    };
    let dec = schmidt(&psi, &a, 1e-12)?;
    let b = psi.modes().difference(&a);
    let recon = dec.reconstruct()?;
    let err = (recon.amplitudes() - psi.amplitudes()).norm();
    let mut s = String::new();
    let _ = writeln!(s, "partition = {a} | {b}");
    let _ = writeln!(s, "schmidt_number = {}", dec.schmidt_number(1e-12));
    let _ = writeln!(s, "probabilities = {}", fmt_list(&dec.coeffs));
    let parities: Vec<&str> = dec.left.iter().map(|v| v.definite_parity(1e-8).map_or("?", parity_name)).collect();
    let _ = writeln!(s, "left_parities = {}", parities.join(" "));
    let _ = writeln!(s, "entropy = {}", fmt_real(dec.entropy()));
    let _ = writeln!(s, "reconstruction_error = {err:.3e}");
    Ok(s)
}

fn cmd_purify(file: &Path) -> Result<String, CliError> {
    let (rho, _) = read_density(file)?;
    let psi = purify(&rho, CHECK_TOL)?;
    let n = rho.modes().len();
    let comment = format!("even purification; environment modes {}..{}", n + 1, 2 * n);
    Ok(to_json(&Document::new(Artifact::State(relabel_state(&psi)?), Some(comment))))
}

fn cmd_entropy(file: &Path) -> Result<String, CliError> {
    let (rho, _) = read_density(file)?;
    Ok(format!("entropy = {}\n", fmt_real(von_neumann_entropy(&rho, CHECK_TOL)?)))
}

enum MapFile {
    Kraus(KrausChannel),
    Dilation(fermiqit::channels::StinespringDilation),
}

impl MapFile {
    fn read(path: &Path) -> Result<Self, CliError> {
        match read_path(path)?.artifact {
            Artifact::Channel(c) => Ok(MapFile::Kraus(c)),
            Artifact::Dilation(d) => Ok(MapFile::Dilation(d)),
            other => Err(CliError::Parse(format!(
                "{}: expected a channel or dilation, found {:?}",
                path.display(),
                other.kind()
            ))),
        }
    }

    fn as_map(&self) -> &dyn LinearMap {
        match self {
            MapFile::Kraus(c) => c,
            MapFile::Dilation(d) => d,
        }
    }

    fn into_channel(self) -> Result<KrausChannel, CliError> {
        match self {
            MapFile::Kraus(c) => Ok(c),
            MapFile::Dilation(_) => Err(CliError::Parse("expected a channel file".into())),
        }
    }
}

fn cmd_channel(action: &ChannelCommand, seed: u64) -> Result<String, CliError> {
    match action {
        ChannelCommand::Apply { channel, input } => {
            let map = MapFile::read(channel)?;
            let (rho, _) = read_density(input)?;
            if rho.modes() != map.as_map().modes() {
                return Err(CliError::Parse(format!(
                    "input has {} modes but the channel acts on {}",
                    rho.modes().len(),
                    map.as_map().modes().len()
                )));
            }
            let out = match &map {
                MapFile::Kraus(c) => apply_kraus(c, &rho)?,
                MapFile::Dilation(d) => d.apply(&rho)?,
            };
            Ok(to_json(&Document::new(Artifact::Operator(out), Some("channel output".into()))))
        }
        ChannelCommand::Choi { channel } => {
            let ch = MapFile::read(channel)?.into_channel()?;
            let choi = choi_of_channel(&ch)?;
            let n = ch.n_modes();
            let comment = format!("Choi operator; system modes 1..{n}, ancilla modes {}..{}", n + 1, 2 * n);
            Ok(to_json(&Document::new(Artifact::Operator(choi.operator().clone()), Some(comment))))
        }
        ChannelCommand::Dilate { channel, env_modes } => {
            let ch = MapFile::read(channel)?.into_channel()?;
            let dil = match env_modes {
                Some(k) => stinespring_from_kraus_with_env(&ch, *k)?,
                None => stinespring_from_kraus(&ch)?,
            };
            Ok(to_json(&Document::new(Artifact::Dilation(dil), Some("Stinespring dilation".into()))))
        }
        ChannelCommand::Verify { file, trials } => {
            let map = MapFile::read(file)?;
            let mut rng = seeded(seed);
            let report = verify_axioms(map.as_map(), *trials, CHECK_TOL, &mut rng)?;
            let mut s = String::new();
            if let MapFile::Kraus(c) = &map {
                let _ = writeln!(s, "completeness_deviation = {:.3e}", c.completeness_deviation());
            }
            let _ = writeln!(s, "trace_deviation = {:.3e}", report.trace_deviation);
            let _ = writeln!(s, "convexity_deviation = {:.3e}", report.convexity_deviation);
            let _ = writeln!(s, "choi_min_eigenvalue = {}", fmt_real(report.choi_min_eigenvalue));
            let _ = writeln!(s, "trace_preserving = {}", report.trace_preserving);
            let _ = writeln!(s, "convex_linear = {}", report.convex_linear);
            let _ = writeln!(s, "completely_positive = {}", report.completely_positive);
            if !report.all_pass() {
                return Err(CliError::Verification(s));
            }
            Ok(s)
        }
        ChannelCommand::Kraus { file } => {
            let doc = read_path(file)?;
            let ch = match doc.artifact {
                Artifact::Dilation(d) => kraus_from_stinespring(&d)?,
                Artifact::Operator(op) => {
                    let total = op.modes().len();
                    if total % 2 != 0 {
                        return Err(CliError::Parse("a Choi operator needs an even number of modes".into()));
                    }
                    let choi = ChoiState::from_operator(ModeSet::first(total / 2)?, op)?;
                    kraus_from_choi(&choi, 1e-12)?
                }
                other => {
                    return Err(CliError::Parse(format!(
                        "expected a dilation or Choi operator, found {:?}",
                        other.kind()
                    )))
                }
            };
            Ok(to_json(&Document::new(Artifact::Channel(ch), Some("Kraus operators".into()))))
        }
    }
}

fn cmd_jw_check(file: &Path, trace: &str) -> Result<String, CliError> {
    let traced = mode_set(trace)?;
    let (rho, _) = read_density(file)?;
    let report = demonstrate_inconsistency(&rho, &traced)?;
    let mut s = String::new();
    let _ = writeln!(s, "traced modes = {traced}");
    let _ = writeln!(s, "fermionic trace, then qubit map:");
    s.push_str(&fmt_matrix(&report.fermionic_first.matrix, "  "));
    let _ = writeln!(s, "  spectrum = {}", fmt_list(&report.fermionic_spectrum));
    let _ = writeln!(s, "  entropy = {}", fmt_real(report.fermionic_entropy));
    let _ = writeln!(s, "qubit map, then qubit trace:");
    s.push_str(&fmt_matrix(&report.qubit_first.matrix, "  "));
    let _ = writeln!(s, "  spectrum = {}", fmt_list(&report.qubit_spectrum));
    let _ = writeln!(s, "  entropy = {}", fmt_real(report.qubit_entropy));
    let _ = writeln!(s, "discrepancy = {}", fmt_real(report.discrepancy()));
    Ok(s)
}

fn cmd_nosignal(ua_path: &Path, ub: &str, state: Option<&Path>) -> Result<String, CliError> {
    let ua = read_operator(ua_path)?;
    let na = ua.modes().len();
    let ub_op = if ub.eq_ignore_ascii_case("none") { None } else { Some(read_operator(Path::new(ub))?) };
    let rho = match state {
        Some(p) => Some(read_density(p)?.0),
        None => None,
    };
    let nb = match (&ub_op, &rho) {
        (Some(u), _) => u.modes().len(),
        (None, Some(r)) => r.modes().len().saturating_sub(na),
        (None, None) => na,
    };
    let all = ModeSet::first(na + nb)?;
    let rho = match rho {
        Some(r) if r.modes().len() != na + nb => {
            return Err(CliError::Parse(format!("state has {} modes, expected {}", r.modes().len(), na + nb)))
        }
        Some(r) => r,
        None => FockOperator::identity(&all).scaled(C64::from(1.0 / all.dim() as f64)),
    };
    let a = ModeSet::first(na)?;
    let b = ModeSet::contiguous(na + 1, nb)?;
    let ub_op = match ub_op {
        Some(u) => Some(FockOperator::new(b.clone(), u.into_matrix())?),
        None => None,
    };
    let outcome = run_protocol(&rho, &a, &ua, ub_op.as_ref())?;
    let change = outcome.fermionic.max_deviation(&rho)?;
    let mut s = String::new();
    let _ = writeln!(s, "party A = {a}, party B = {b}");
    let _ = writeln!(s, "control qubit:");
    s.push_str(&fmt_matrix(&outcome.qubit, "  "));
    let _ = writeln!(s, "signal_strength = {}", fmt_real(outcome.signal_strength()));
    let _ = writeln!(s, "fermionic_change = {change:.3e}");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_lists() {
        assert_eq!(parse_mode_list("2,3").unwrap(), vec![2, 3]);
        assert_eq!(parse_mode_list("{1, 4}").unwrap(), vec![1, 4]);
        assert!(parse_mode_list("").unwrap().is_empty());
        assert!(matches!(parse_mode_list("a"), Err(CliError::Parse(_))));
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_real(-1e-12), "0.000000");
        assert_eq!(fmt_complex(C64::new(0.25, -0.5)), "0.250000-0.500000i");
    }
}
