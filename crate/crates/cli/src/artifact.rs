//! JSON artifact files for states, operators, channels and dilations.
//!
//! Entries are sparse. Bitstrings list occupations with mode 1 first, and
//! artifacts always describe modes `1..=modes`.

use std::collections::BTreeMap;
use std::path::Path;

use fermiqit::channels::{KrausChannel, StinespringDilation};
use fermiqit::{CMatrix, CVector, FockOperator, FockState, ModeSet, OccPattern, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Entries smaller than this are left out when writing.
pub const WRITE_CUTOFF: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    State,
    Operator,
    Channel,
    Dilation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub row: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col: Option<String>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorBlock {
    pub entries: Vec<Entry>,
}

/// On-disk layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactFile {
    pub modes: usize,
    pub kind: ArtifactKind,
    pub basis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<OperatorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_state: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Vec<Entry>>,
}

/// A parsed artifact.
#[derive(Clone, Debug, PartialEq)]
pub enum Artifact {
    State(FockState),
    Operator(FockOperator),
    Channel(KrausChannel),
    Dilation(StinespringDilation),
}

impl Artifact {
    pub fn kind(&self) -> ArtifactKind {
        match self {
            Artifact::State(_) => ArtifactKind::State,
            Artifact::Operator(_) => ArtifactKind::Operator,
            Artifact::Channel(_) => ArtifactKind::Channel,
            Artifact::Dilation(_) => ArtifactKind::Dilation,
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            Artifact::State(s) => s.modes().len(),
            Artifact::Operator(o) => o.modes().len(),
            Artifact::Channel(c) => c.n_modes(),
            Artifact::Dilation(d) => d.system().len(),
        }
    }
}

/// An artifact together with its free-text comment.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub artifact: Artifact,
    pub comment: Option<String>,
}

impl Document {
    pub fn new(artifact: Artifact, comment: Option<String>) -> Self {
        Document { artifact, comment }
    }
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn pattern_index(bits: &str, n: usize, what: &str) -> Result<usize, CliError> {
    let p: OccPattern = bits.parse().map_err(|e| parse_err(format!("{what}: {e}")))?;
    if p.n_modes() != n {
        return Err(parse_err(format!("{what}: bitstring {bits:?} has length {}, expected {n}", p.n_modes())));
    }
    Ok(p.index())
}

fn bitstring(index: usize, n: usize) -> String {
    (0..n).map(|p| if index >> p & 1 == 1 { '1' } else { '0' }).collect()
}

fn check_value(e: &Entry, what: &str) -> Result<C64, CliError> {
    if !e.re.is_finite() || !e.im.is_finite() {
        return Err(parse_err(format!("{what}: non-finite value at row {:?}", e.row)));
    }
    Ok(C64::new(e.re, e.im))
}

fn modes_for(n: usize) -> Result<ModeSet, CliError> {
    ModeSet::first(n).map_err(CliError::from)
}

fn read_vector(entries: &[Entry], n: usize, what: &str) -> Result<CVector, CliError> {
    let mut v = CVector::zeros(1 << n);
    let mut seen = BTreeMap::new();
    for e in entries {
        if e.col.is_some() {
            return Err(parse_err(format!("{what}: state entries must not have a col field")));
        }
        let i = pattern_index(&e.row, n, what)?;
        if seen.insert(i, ()).is_some() {
            return Err(parse_err(format!("{what}: duplicate entry for row {:?}", e.row)));
        }
        v[i] = check_value(e, what)?;
    }
    Ok(v)
}

fn read_matrix(entries: &[Entry], n: usize, what: &str) -> Result<CMatrix, CliError> {
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    let mut seen = BTreeMap::new();
    for e in entries {
        let col = e.col.as_deref().ok_or_else(|| parse_err(format!("{what}: operator entry without col")))?;
        let r = pattern_index(&e.row, n, what)?;
        let c = pattern_index(col, n, what)?;
        if seen.insert((r, c), ()).is_some() {
            return Err(parse_err(format!("{what}: duplicate entry for ({:?}, {col:?})", e.row)));
        }
        m[(r, c)] = check_value(e, what)?;
    }
    Ok(m)
}

fn write_vector(v: &CVector, n: usize) -> Vec<Entry> {
    v.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() >= WRITE_CUTOFF)
        .map(|(i, z)| Entry { row: bitstring(i, n), col: None, re: z.re, im: z.im })
        .collect()
}

fn write_matrix(m: &CMatrix, n: usize) -> Vec<Entry> {
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if z.norm() >= WRITE_CUTOFF {
                out.push(Entry { row: bitstring(r, n), col: Some(bitstring(c, n)), re: z.re, im: z.im });
            }
        }
    }
    out
}

impl ArtifactFile {
    pub fn to_document(&self) -> Result<Document, CliError> {
        if self.basis != "canonical" {
            return Err(parse_err(format!("unsupported basis {:?}; only \"canonical\" is accepted", self.basis)));
        }
        let n = self.modes;
        let modes = modes_for(n)?;
        let extra = |field: &str, present: bool| -> Result<(), CliError> {
            if present {
                Err(parse_err(format!("field {field:?} is not allowed for kind {:?}", self.kind)))
            } else {
                Ok(())
            }
        };
        let artifact = match self.kind {
            ArtifactKind::State => {
                extra("operators", !self.operators.is_empty())?;
                extra("env_modes", self.env_modes.is_some() || self.env_state.is_some() || self.unitary.is_some())?;
                Artifact::State(FockState::new(modes, read_vector(&self.entries, n, "state")?)?)
            }
            ArtifactKind::Operator => {
                extra("operators", !self.operators.is_empty())?;
                extra("env_modes", self.env_modes.is_some() || self.env_state.is_some() || self.unitary.is_some())?;
                Artifact::Operator(FockOperator::new(modes, read_matrix(&self.entries, n, "operator")?)?)
            }
            ArtifactKind::Channel => {
                extra("entries", !self.entries.is_empty())?;
                extra("env_modes", self.env_modes.is_some() || self.env_state.is_some() || self.unitary.is_some())?;
                if self.operators.is_empty() {
                    return Err(parse_err("channel has no operators"));
                }
                let ops = self
                    .operators
                    .iter()
                    .enumerate()
                    .map(|(k, b)| {
                        let m = read_matrix(&b.entries, n, &format!("operator {k}"))?;
                        FockOperator::new(modes.clone(), m).map_err(CliError::from)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Artifact::Channel(KrausChannel::new(modes, ops)?)
            }
            ArtifactKind::Dilation => {
                extra("entries", !self.entries.is_empty())?;
                extra("operators", !self.operators.is_empty())?;
                let k = self.env_modes.ok_or_else(|| parse_err("dilation needs env_modes"))?;
                let env_entries = self.env_state.as_ref().ok_or_else(|| parse_err("dilation needs env_state"))?;
                let u_entries = self.unitary.as_ref().ok_or_else(|| parse_err("dilation needs unitary"))?;
                let env = ModeSet::contiguous(n + 1, k)?;
                let total = modes.union(&env)?;
                let omega = FockState::new(env.clone(), read_vector(env_entries, k, "env_state")?)?;
                let u = FockOperator::new(total, read_matrix(u_entries, n + k, "unitary")?)?;
                Artifact::Dilation(StinespringDilation::new(modes, env, omega, u)?)
            }
        };
        Ok(Document { artifact, comment: self.comment.clone() })
    }

    pub fn from_document(doc: &Document) -> Self {
        let base = |kind: ArtifactKind, modes: usize| ArtifactFile {
            modes,
            kind,
            basis: "canonical".into(),
            comment: doc.comment.clone(),
            entries: Vec::new(),
            operators: Vec::new(),
            env_modes: None,
            env_state: None,
            unitary: None,
        };
        match &doc.artifact {
            Artifact::State(s) => {
                let n = s.modes().len();
                ArtifactFile { entries: write_vector(s.amplitudes(), n), ..base(ArtifactKind::State, n) }
            }
            Artifact::Operator(o) => {
                let n = o.modes().len();
                ArtifactFile { entries: write_matrix(o.matrix(), n), ..base(ArtifactKind::Operator, n) }
            }
            Artifact::Channel(c) => {
                let n = c.n_modes();
                let operators =
                    c.operators().iter().map(|e| OperatorBlock { entries: write_matrix(e.matrix(), n) }).collect();
                ArtifactFile { operators, ..base(ArtifactKind::Channel, n) }
            }
            Artifact::Dilation(d) => {
                let n = d.system().len();
                let k = d.env().len();
                ArtifactFile {
                    env_modes: Some(k),
                    env_state: Some(write_vector(d.env_state().amplitudes(), k)),
                    unitary: Some(write_matrix(d.unitary().matrix(), n + k)),
                    ..base(ArtifactKind::Dilation, n)
                }
            }
        }
    }
}

pub fn parse_str(text: &str) -> Result<Document, CliError> {
    let file: ArtifactFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    file.to_document()
}

pub fn to_json(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(&ArtifactFile::from_document(doc)).expect("artifact serialises");
    s.push('\n');
    s
}

pub fn read_path(path: &Path) -> Result<Document, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Renumbers an operator onto modes `1..=n`.
pub fn relabel_operator(op: &FockOperator) -> Result<FockOperator, CliError> {
    Ok(FockOperator::new(modes_for(op.modes().len())?, op.matrix().clone())?)
}

pub fn relabel_state(st: &FockState) -> Result<FockState, CliError> {
    Ok(FockState::new(modes_for(st.modes().len())?, st.amplitudes().clone())?)
}
