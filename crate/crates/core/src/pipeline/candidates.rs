use std::fmt;
use std::str::FromStr;

use crate::copula::{fit_copula, CopulaSpec, Family, Sample};
use crate::error::{Error, Result};

/// A candidate is either estimated from the data or used as given.
#[derive(Clone, Debug)]
pub enum CandidateEntry {
    Fit(Family),
    Fixed(CopulaSpec),
}

impl CandidateEntry {
    /// The copula to sample from, fitting to `pseudo` when required.
    pub fn resolve(&self, pseudo: &Sample) -> Result<CopulaSpec> {
        match self {
            CandidateEntry::Fit(f) => fit_copula(*f, pseudo),
            CandidateEntry::Fixed(s) => {
                if s.dim() != pseudo.d() {
                    return Err(Error::Shape(format!(
                        "candidate has dimension {}, data has {}",
                        s.dim(),
                        pseudo.d()
                    )));
                }
                Ok(s.clone())
            }
        }
    }
}

impl FromStr for CandidateEntry {
    type Err = Error;

    /// `fit:<family>` or a fixed copula description such as
    /// `clayton:d=3,tau=0.4`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix("fit:") {
            Some(f) => Ok(CandidateEntry::Fit(f.parse()?)),
            None => Ok(CandidateEntry::Fixed(s.parse()?)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub label: String,
    pub entry: CandidateEntry,
}

impl FromStr for Candidate {
    type Err = Error;

    /// `label=entry`, or just `entry` (labelled by itself). A `=` only acts
    /// as the label separator when it precedes the first `:`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let colon = s.find(':').unwrap_or(s.len());
        let (label, entry) = match s.find('=') {
            Some(eq) if eq < colon => (s[..eq].trim().to_string(), &s[eq + 1..]),
            _ => {
                let label = match s.strip_prefix("fit:") {
                    Some(f) => f.trim().to_string(),
                    None => s.to_string(),
                };
                (label, s)
            }
        };
        if label.is_empty() {
            return Err(Error::Config(format!("empty candidate label in '{s}'")));
        }
        Ok(Candidate {
            label,
            entry: entry.parse()?,
        })
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.entry {
            CandidateEntry::Fit(fam) => write!(f, "{}=fit:{fam}", self.label),
            CandidateEntry::Fixed(s) => write!(f, "{}={}", self.label, s.describe()),
        }
    }
}

/// Label reserved for the empirical-copula benchmark.
pub const EMPIRICAL_LABEL: &str = "empirical";

/// Candidate models with unique labels.
#[derive(Clone, Debug, Default)]
pub struct CandidateSet {
    items: Vec<Candidate>,
}

impl CandidateSet {
    pub fn new(items: Vec<Candidate>) -> Result<Self> {
        for (i, c) in items.iter().enumerate() {
            if c.label == EMPIRICAL_LABEL {
                return Err(Error::Config(format!("label '{EMPIRICAL_LABEL}' is reserved")));
            }
            if items[..i].iter().any(|o| o.label == c.label) {
                return Err(Error::Config(format!("duplicate candidate label '{}'", c.label)));
            }
        }
        Ok(CandidateSet { items })
    }

    /// Parses a `;`-separated list of candidates.
    pub fn parse_list(s: &str) -> Result<Self> {
        let items = s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Candidate>>>()?;
        CandidateSet::new(items)
    }

    pub fn items(&self) -> &[Candidate] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}
