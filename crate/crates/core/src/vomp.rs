//! Variable-order Markov model over crossing letters, and the homotopic belief it induces.
//!
//! A full word `h` is scored by the chain rule over its letters followed by a
//! terminal symbol. The context for position `i` is the whole history (anchored
//! at the word start) while `i < D`, otherwise the last `D` letters. Each context
//! predicts with Laplace smoothing over the observed letters plus the terminal.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{is_compatible, HWord};

/// Terminal symbol; letters are never zero.
pub const END: i32 = 0;

#[derive(Debug, Error)]
pub enum VompError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
struct Context {
    anchored: bool,
    letters: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VompModel {
    max_order: usize,
    alpha: f64,
    alphabet: BTreeSet<i32>,
    counts: BTreeMap<Context, BTreeMap<i32, u64>>,
    support: BTreeMap<HWord, usize>,
}

#[derive(Serialize, Deserialize)]
struct ContextEntry {
    anchored: bool,
    context: Vec<i32>,
    counts: BTreeMap<i32, u64>,
}

#[derive(Serialize, Deserialize)]
struct SupportEntry {
    word: HWord,
    count: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    max_order: usize,
    alpha: f64,
    alphabet: Vec<i32>,
    contexts: Vec<ContextEntry>,
    support: Vec<SupportEntry>,
}

impl VompModel {
    /// Counts symbols after each context in a corpus of words with multiplicities.
    pub fn fit(words: &[(HWord, usize)], max_order: usize, alpha: f64) -> Result<Self, VompError> {
        let mut support: BTreeMap<HWord, usize> = BTreeMap::new();
        for (w, m) in words {
            if *m > 0 {
                *support.entry(w.clone()).or_default() += m;
            }
        }
        if support.is_empty() {
            return Err(VompError::EmptyCorpus);
        }
        let mut alphabet: BTreeSet<i32> = BTreeSet::from([END]);
        let mut counts: BTreeMap<Context, BTreeMap<i32, u64>> = BTreeMap::new();
        for (w, &m) in &support {
            alphabet.extend(w.letters().iter().copied());
            for i in 0..=w.len() {
                let symbol = w.letters().get(i).copied().unwrap_or(END);
                *counts
                    .entry(context_at(w.letters(), i, max_order))
                    .or_default()
                    .entry(symbol)
                    .or_default() += m as u64;
            }
        }
        Ok(Self {
            max_order,
            alpha,
            alphabet,
            counts,
            support,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distinct training words with their multiplicities.
    pub fn support(&self) -> &BTreeMap<HWord, usize> {
        &self.support
    }

    /// Smoothed probability of `symbol` following the history `letters[..i]`.
    pub fn symbol_prob(&self, letters: &[i32], i: usize, symbol: i32) -> f64 {
        let ctx = context_at(letters, i, self.max_order);
        let (count, total) = match self.counts.get(&ctx) {
            Some(c) => (
                c.get(&symbol).copied().unwrap_or(0) as f64,
                c.values().sum::<u64>() as f64,
            ),
            None => (0.0, 0.0),
        };
        let denom = total + self.alpha * self.alphabet.len() as f64;
        if denom == 0.0 {
            0.0
        } else {
            (count + self.alpha) / denom
        }
    }

    /// Chain-rule probability of a full word including the terminal; zero outside the support.
    pub fn sequence_prob(&self, w: &HWord) -> f64 {
        if !self.support.contains_key(w) {
            return 0.0;
        }
        let letters = w.letters();
        (0..=letters.len())
            .map(|i| self.symbol_prob(letters, i, letters.get(i).copied().unwrap_or(END)))
            .product()
    }

    /// Belief over support words compatible with the partial word `rho`.
    ///
    /// Falls back to the whole support when nothing is compatible.
    pub fn homotopic_belief(&self, rho: &HWord) -> HomotopicBelief {
        let compatible: Vec<&HWord> = self
            .support
            .keys()
            .filter(|h| is_compatible(h, rho))
            .collect();
        let pool: Vec<&HWord> = if compatible.is_empty() {
            self.support.keys().collect()
        } else {
            compatible
        };
        HomotopicBelief::from_weights(pool.into_iter().map(|h| (h.clone(), self.sequence_prob(h))))
    }

    /// True when some support word starts with `rho`.
    pub fn has_compatible(&self, rho: &HWord) -> bool {
        self.support.keys().any(|h| is_compatible(h, rho))
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            max_order: self.max_order,
            alpha: self.alpha,
            alphabet: self.alphabet.iter().copied().collect(),
            contexts: self
                .counts
                .iter()
                .map(|(c, m)| ContextEntry {
                    anchored: c.anchored,
                    context: c.letters.clone(),
                    counts: m.clone(),
                })
                .collect(),
            support: self
                .support
                .iter()
                .map(|(w, &count)| SupportEntry {
                    word: w.clone(),
                    count,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, VompError> {
        let file: ModelFile = serde_json::from_str(text)?;
        Ok(Self {
            max_order: file.max_order,
            alpha: file.alpha,
            alphabet: file.alphabet.into_iter().collect(),
            counts: file
                .contexts
                .into_iter()
                .map(|e| {
                    (
                        Context {
                            anchored: e.anchored,
                            letters: e.context,
                        },
                        e.counts,
                    )
                })
                .collect(),
            support: file.support.into_iter().map(|e| (e.word, e.count)).collect(),
        })
    }
}

fn context_at(letters: &[i32], i: usize, max_order: usize) -> Context {
    if i < max_order {
        Context {
            anchored: true,
            letters: letters[..i].to_vec(),
        }
    } else {
        Context {
            anchored: false,
            letters: letters[i - max_order..i].to_vec(),
        }
    }
}

/// Normalized distribution over full words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopicBelief {
    support: Vec<HWord>,
    probs: Vec<f64>,
}

impl HomotopicBelief {
    /// Normalizes nonnegative weights, merging repeated words; order follows first occurrence.
    ///
    /// All-zero weights become uniform.
    pub fn from_weights(pairs: impl IntoIterator<Item = (HWord, f64)>) -> Self {
        let mut support: Vec<HWord> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (h, p) in pairs {
            match support.iter().position(|s| *s == h) {
                Some(i) => probs[i] += p,
                None => {
                    support.push(h);
                    probs.push(p);
                }
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        } else if !probs.is_empty() {
            let u = 1.0 / probs.len() as f64;
            probs.iter_mut().for_each(|p| *p = u);
        }
        Self { support, probs }
    }

    pub fn point_mass(h: HWord) -> Self {
        Self {
            support: vec![h],
            probs: vec![1.0],
        }
    }

    pub fn support(&self) -> &[HWord] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HWord, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// Probability of `h` (zero off the support).
    pub fn prob(&self, h: &HWord) -> f64 {
        self.support
            .iter()
            .position(|s| s == h)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Exactly one word carries positive mass.
    pub fn is_point_mass(&self) -> bool {
        self.probs.iter().filter(|&&p| p > 0.0).count() == 1
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    /// Support sorted by word with matching probabilities, for order-independent comparison.
    pub fn sorted(&self) -> Vec<(HWord, f64)> {
        let mut v: Vec<(HWord, f64)> = self.iter().map(|(h, p)| (h.clone(), p)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}
