//! JSON model files.
//!
//! ```json
//! {"n_sites": 2,
//!  "topplings": [[{"delta": [-1, 0], "prob": "1/2"}, ...], ...],
//!  "mu": ["1/3", "2/3"]}
//! ```
//!
//! `topplings[v - 1]` lists the support of site `v`; `mu` is optional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_model, AdditionDistribution, ModelDescription, SandpileModel};
use crate::rational::{format_rational, parse_rational, Probability};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CardEntry {
    pub delta: Vec<i64>,
    pub prob: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n_sites: usize,
    pub topplings: Vec<Vec<CardEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<String>>,
}

impl ModelFile {
    pub fn from_model(model: &SandpileModel, mu: Option<&AdditionDistribution>) -> Self {
        Self {
            n_sites: model.n_sites(),
            topplings: model
                .topplings()
                .iter()
                .map(|d| {
                    d.support()
                        .iter()
                        .map(|(nu, p)| CardEntry {
                            delta: nu.delta().to_vec(),
                            prob: p.to_string(),
                        })
                        .collect()
                })
                .collect(),
            mu: mu.map(|m| m.weights().iter().map(Probability::to_string).collect()),
        }
    }

    pub fn description(&self) -> Result<ModelDescription> {
        let topplings = self
            .topplings
            .iter()
            .enumerate()
            .map(|(v, cards)| {
                cards
                    .iter()
                    .enumerate()
                    .map(|(i, card)| {
                        let prob =
                            parse_rational(&card.prob).map_err(|e| Error::InvalidProbability {
                                context: format!("site {}, entry {}", v + 1, i + 1),
                                value: card.prob.clone(),
                                reason: e.to_string(),
                            })?;
                        Ok((card.delta.clone(), prob))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelDescription {
            n_sites: self.n_sites,
            topplings,
        })
    }

    pub fn model(&self) -> Result<SandpileModel> {
        validate_model(&self.description()?)
    }

    pub fn addition(&self) -> Result<Option<AdditionDistribution>> {
        self.mu
            .as_ref()
            .map(|weights| {
                let mu = parse_mu_entries(weights.iter().map(String::as_str))?;
                if mu.len() != self.n_sites {
                    return Err(Error::DimensionMismatch {
                        expected: self.n_sites,
                        found: mu.len(),
                    });
                }
                Ok(mu)
            })
            .transpose()
    }
}

fn parse_mu_entries<'a>(entries: impl Iterator<Item = &'a str>) -> Result<AdditionDistribution> {
    let weights = entries
        .enumerate()
        .map(|(i, s)| {
            s.parse::<Probability>()
                .map_err(|e| Error::InvalidProbability {
                    context: format!("mu entry {}", i + 1),
                    value: s.to_string(),
                    reason: e.to_string(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    AdditionDistribution::new(weights)
}

/// Parses `"p/q,p/q,..."`.
pub fn parse_mu(inline: &str) -> Result<AdditionDistribution> {
    parse_mu_entries(inline.split(',').map(str::trim))
}

pub fn parse_model_json(text: &str) -> Result<(SandpileModel, Option<AdditionDistribution>)> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
    let model = file.model()?;
    let mu = file.addition()?;
    Ok((model, mu))
}

pub fn model_to_json(model: &SandpileModel, mu: Option<&AdditionDistribution>) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(model, mu))
        .expect("model files always serialize")
}

/// `"p/q"` strings for a rational vector.
pub fn rationals_to_strings(values: &[num_rational::BigRational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}
