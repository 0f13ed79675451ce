//! Text grammar for naming states, plus JSON state files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::*;
use crate::serde_complex;

/// A pure or mixed state produced from a spec.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl State {
    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(p) => p.dims(),
            State::Mixed(m) => m.dims(),
        }
    }

    pub fn num_sites(&self) -> usize {
        self.dims().len()
    }

    pub fn register(&self) -> &QuditRegister {
        match self {
            State::Pure(p) => p.register(),
            State::Mixed(m) => m.register(),
        }
    }

    /// Reduced state on `keep` (ascending site order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        match self {
            State::Pure(p) => p.reduced(keep),
            State::Mixed(m) => m.reduced(keep),
        }
    }

    pub fn density(&self) -> Result<DensityOperator> {
        match self {
            State::Pure(p) => p.density(),
            State::Mixed(m) => Ok(m.clone()),
        }
    }

    pub fn as_pure(&self) -> Option<&StateVector> {
        match self {
            State::Pure(p) => Some(p),
            State::Mixed(_) => None,
        }
    }
}

impl From<StateVector> for State {
    fn from(v: StateVector) -> Self {
        State::Pure(v)
    }
}

impl From<DensityOperator> for State {
    fn from(m: DensityOperator) -> Self {
        State::Mixed(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum StateSpec {
    Ghz { n: usize, d: usize },
    W { n: usize },
    Dicke { n: usize, m: usize },
    Ti { n: usize, m: usize },
    Linear { n: usize },
    Ring { n: usize },
    Grid { rows: usize, cols: usize, periodic: bool },
    /// `b = None` selects [`psi_default_b`].
    Psi { n: usize, b: Option<f64> },
    Psi4,
    Bisep3,
    Fcbell { n: usize },
    File { path: PathBuf },
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Ghz { n, d: 2 } => write!(f, "ghz:{n}"),
            StateSpec::Ghz { n, d } => write!(f, "ghz:{n}:{d}"),
            StateSpec::W { n } => write!(f, "w:{n}"),
            StateSpec::Dicke { n, m } => write!(f, "dicke:{n}:{m}"),
            StateSpec::Ti { n, m } => write!(f, "ti:{n}:{m}"),
            StateSpec::Linear { n } => write!(f, "linear:{n}"),
            StateSpec::Ring { n } => write!(f, "ring:{n}"),
            StateSpec::Grid { rows, cols, periodic: false } => write!(f, "grid:{rows}x{cols}"),
            StateSpec::Grid { rows, cols, periodic: true } => write!(f, "grid:{rows}x{cols}:periodic"),
            StateSpec::Psi { n, b: None } => write!(f, "psi:{n}"),
            StateSpec::Psi { n, b: Some(b) } => write!(f, "psi:{n}:b={b}"),
            StateSpec::Psi4 => write!(f, "psi4"),
            StateSpec::Bisep3 => write!(f, "bisep3"),
            StateSpec::Fcbell { n } => write!(f, "fcbell:{n}"),
            StateSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

struct Fields<'a> {
    parts: Vec<(usize, &'a str)>,
}

impl<'a> Fields<'a> {
    fn split(text: &'a str) -> Self {
        let mut parts = Vec::new();
        let mut start = 0;
        for (i, ch) in text.char_indices() {
            if ch == ':' {
                parts.push((start, &text[start..i]));
                start = i + 1;
            }
        }
        parts.push((start, &text[start..]));
        Fields { parts }
    }

    fn end(&self) -> usize {
        self.parts.last().map(|(p, s)| p + s.len()).unwrap_or(0)
    }

    fn arity(&self, min: usize, max: usize) -> Result<()> {
        let got = self.parts.len() - 1;
        if got < min {
            return Err(parse_err(self.end(), format!("expected {min} parameter(s) after the family name")));
        }
        if got > max {
            let (pos, _) = self.parts[max + 1];
            return Err(parse_err(pos, "unexpected extra parameter"));
        }
        Ok(())
    }

    fn int(&self, i: usize) -> Result<usize> {
        let (pos, s) = self.parts[i];
        s.trim()
            .parse::<usize>()
            .map_err(|_| parse_err(pos, format!("expected a nonnegative integer, found {s:?}")))
    }
}

fn parse_err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn out_of_range(msg: String) -> Error {
    Error::ParameterOutOfRange(msg)
}

impl StateSpec {
    /// Parses the case-insensitive spec grammar, e.g. `"w:6"`,
    /// `"grid:2x3:periodic"` or `"psi:3:b=0.4518"`. Character positions in
    /// errors are 0-based byte offsets into `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        let offset = text.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        if trimmed.is_empty() {
            return Err(parse_err(0, "empty state spec"));
        }
        // file paths keep their case
        if trimmed.len() >= 5 && trimmed[..5].eq_ignore_ascii_case("file:") {
            let path = &trimmed[5..];
            if path.is_empty() {
                return Err(parse_err(offset + 5, "missing file path"));
            }
            return Ok(StateSpec::File { path: PathBuf::from(path) });
        }
        let lower = trimmed.to_ascii_lowercase();
        let fields = Fields::split(&lower);
        let shift = |e: Error| match e {
            Error::Parse { pos, msg } => Error::Parse { pos: pos + offset, msg },
            other => other,
        };
        Self::parse_fields(&fields).map_err(shift)
    }

    fn parse_fields(f: &Fields<'_>) -> Result<Self> {
        let family = f.parts[0].1;
        let spec = match family {
            "ghz" => {
                f.arity(1, 2)?;
                let d = if f.parts.len() > 2 { f.int(2)? } else { 2 };
                StateSpec::Ghz { n: f.int(1)?, d }
            }
            "w" => {
                f.arity(1, 1)?;
                StateSpec::W { n: f.int(1)? }
            }
            "dicke" | "ti" => {
                f.arity(2, 2)?;
                let (n, m) = (f.int(1)?, f.int(2)?);
                if family == "dicke" {
                    StateSpec::Dicke { n, m }
                } else {
                    StateSpec::Ti { n, m }
                }
            }
            "linear" => {
                f.arity(1, 1)?;
                StateSpec::Linear { n: f.int(1)? }
            }
            "ring" => {
                f.arity(1, 1)?;
                StateSpec::Ring { n: f.int(1)? }
            }
            "grid" => {
                f.arity(1, 2)?;
                let (pos, shape) = f.parts[1];
                let x = shape.find('x').ok_or_else(|| parse_err(pos, "expected a grid shape RxC"))?;
                let rows = shape[..x]
                    .parse()
                    .map_err(|_| parse_err(pos, format!("invalid row count {:?}", &shape[..x])))?;
                let cols = shape[x + 1..]
                    .parse()
                    .map_err(|_| parse_err(pos + x + 1, format!("invalid column count {:?}", &shape[x + 1..])))?;
                let periodic = match f.parts.get(2) {
                    None => false,
                    Some((_, "periodic")) => true,
                    Some((p, other)) => return Err(parse_err(*p, format!("expected \"periodic\", found {other:?}"))),
                };
                StateSpec::Grid { rows, cols, periodic }
            }
            "psi" => {
                f.arity(1, 2)?;
                let b = match f.parts.get(2) {
                    None => None,
                    Some((p, s)) => {
                        let v = s
                            .strip_prefix("b=")
                            .ok_or_else(|| parse_err(*p, "expected b=FLOAT"))?;
                        Some(v.parse::<f64>().map_err(|_| parse_err(p + 2, format!("invalid number {v:?}")))?)
                    }
                };
                StateSpec::Psi { n: f.int(1)?, b }
            }
            "psi4" => {
                f.arity(0, 0)?;
                StateSpec::Psi4
            }
            "bisep3" => {
                f.arity(0, 0)?;
                StateSpec::Bisep3
            }
            "fcbell" => {
                f.arity(1, 1)?;
                StateSpec::Fcbell { n: f.int(1)? }
            }
            other => return Err(parse_err(0, format!("unknown state family {other:?}"))),
        };
        Ok(spec)
    }

    /// True when the spec relies on a default that is not tied to a
    /// published value (currently only `psi:N` without `b`).
    pub fn uses_default_parameter(&self) -> bool {
        matches!(self, StateSpec::Psi { b: None, .. })
    }

    pub fn build(&self) -> Result<State> {
        let s: State = match self {
            StateSpec::Ghz { n, d } => ghz_state(*n, *d)?.into(),
            StateSpec::W { n } => w_state(*n)?.into(),
            StateSpec::Dicke { n, m } => dicke_state(*n, *m)?.into(),
            StateSpec::Ti { n, m } => translational_state(*n, *m)?.into(),
            StateSpec::Linear { n } => {
                if *n < 1 {
                    return Err(out_of_range("linear cluster needs N >= 1".into()));
                }
                linear_cluster(*n)?.into()
            }
            StateSpec::Ring { n } => {
                if *n < 3 {
                    return Err(out_of_range(format!("ring cluster needs N >= 3, got {n}")));
                }
                ring_cluster(*n)?.into()
            }
            StateSpec::Grid { rows, cols, periodic } => {
                if *rows < 1 || *cols < 1 {
                    return Err(out_of_range(format!("invalid grid shape {rows}x{cols}")));
                }
                grid_cluster(*rows, *cols, *periodic)?.into()
            }
            StateSpec::Psi { n, b } => {
                if *n < 3 || n % 2 == 0 {
                    return Err(out_of_range(format!("psi needs odd N >= 3, got {n}")));
                }
                psi_max_persistency(*n, b.unwrap_or_else(|| psi_default_b(*n)))?.into()
            }
            StateSpec::Psi4 => psi4_appendix().into(),
            StateSpec::Bisep3 => biseparable_example().into(),
            StateSpec::Fcbell { n } => fully_connected_bell(*n)?.into(),
            StateSpec::File { path } => load_state_file(path)?,
        };
        Ok(s)
    }
}

impl std::str::FromStr for StateSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StateSpec::parse(s)
    }
}

/// Parses and builds in one step.
pub fn parse_state_spec(text: &str) -> Result<State> {
    StateSpec::parse(text)?.build()
}

/// On-disk JSON form of a state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

impl StateFile {
    pub fn from_state(state: &State) -> Self {
        match state {
            State::Pure(p) => StateFile {
                dims: p.dims().to_vec(),
                amplitudes: Some(serde_complex::to_pairs(p.amplitudes().as_slice())),
                matrix: None,
            },
            State::Mixed(m) => StateFile {
                dims: m.dims().to_vec(),
                amplitudes: None,
                matrix: Some(serde_complex::matrix_to_rows(m.matrix())),
            },
        }
    }

    pub fn into_state(self) -> Result<State> {
        let reg = QuditRegister::new(self.dims)?;
        match (self.amplitudes, self.matrix) {
            (Some(a), None) => {
                let v = CVector::from_vec(serde_complex::from_pairs(&a));
                Ok(State::Pure(StateVector::new(reg, v)?))
            }
            (None, Some(rows)) => {
                let m = serde_complex::matrix_from_rows(&rows).map_err(Error::InvalidState)?;
                Ok(State::Mixed(DensityOperator::new(reg, m)?))
            }
            _ => Err(Error::InvalidState("state file needs exactly one of \"amplitudes\" or \"matrix\"".into())),
        }
    }
}

pub fn load_state_file(path: &Path) -> Result<State> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    file.into_state()
}

pub fn write_state_file(path: &Path, state: &State) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_state(state))?;
    std::fs::write(path, text)?;
    Ok(())
}
