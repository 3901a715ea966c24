//! Activation-trace plasticity.
//!
//! Every plastic connection keeps a trace of the four joint binary activation
//! states of its (post, pre) neuron pair over an episode. After the episode
//! the trace is thresholded into a 4-bit pattern which indexes a 16-entry
//! rule table of weight deltas in {-1, 0, +1}; the update is scaled by a
//! learning rate and followed by per-neuron unit-length normalization of the
//! incoming weight vectors.

use crate::error::{Error, Result};
use crate::rnn::{MatrixKind, NetworkState, NetworkWeights};
use crate::scalar::Scalar;

/// Joint activation counters for one connection. Counter order is
/// `(post, pre)`: `f00, f01, f10, f11`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Nat {
    pub counts: [u32; 4],
}

impl Nat {
    pub fn record(&mut self, post: u8, pre: u8) {
        self.counts[(post as usize) * 2 + pre as usize] += 1;
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Thresholds the normalized frequencies of a trace into the rule-table
/// index (0..16). The 4-bit pattern is read as `f00 f01 f10 f11`, most
/// significant bit first; frequencies tie toward 1 (`>= theta`).
pub fn binarize<S: Scalar>(nat: &Nat, steps: u32, theta: S) -> Result<usize> {
    if steps == 0 {
        return Err(Error::DegenerateEpisode);
    }
    let total = S::from_u32(steps).expect("step count fits scalar");
    let mut pattern = 0usize;
    for &count in &nat.counts {
        let freq = S::from_u32(count).expect("count fits scalar") / total;
        pattern = (pattern << 1) | usize::from(freq >= theta);
    }
    Ok(pattern)
}

/// The evolved plasticity rule: the 16-entry delta table plus the continuous
/// parameters (learning rate, binarization threshold, recurrent and feedback
/// scales). `alpha_h` is absent for controllers without a hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NpspRule<S> {
    pub table: [i8; 16],
    pub eta: S,
    pub theta: S,
    pub alpha_h: Option<S>,
    pub alpha_o: S,
}

impl<S: Scalar> NpspRule<S> {
    pub fn delta(&self, index: usize) -> i8 {
        self.table[index]
    }

    /// Serializes as two lines: the 16 table entries, then the continuous
    /// parameters `eta theta [alpha_h] alpha_o`.
    pub fn to_file_string(&self) -> String {
        let table: Vec<String> = self.table.iter().map(|x| x.to_string()).collect();
        let mut params = vec![format!("{}", self.eta), format!("{}", self.theta)];
        if let Some(ah) = self.alpha_h {
            params.push(format!("{ah}"));
        }
        params.push(format!("{}", self.alpha_o));
        format!("{}\n{}\n", table.join(" "), params.join(" "))
    }

    pub fn parse(text: &str) -> Result<NpspRule<S>> {
        let mut lines = text.lines();
        let table_line = lines
            .next()
            .ok_or_else(|| Error::RuleParse("empty rule file".into()))?;
        let entries: Vec<&str> = table_line.split_whitespace().collect();
        if entries.len() != 16 {
            return Err(Error::RuleParse(format!(
                "expected 16 table entries, got {}",
                entries.len()
            )));
        }
        let mut table = [0i8; 16];
        for (i, e) in entries.iter().enumerate() {
            table[i] = match *e {
                "-1" => -1,
                "0" => 0,
                "1" => 1,
                other => return Err(Error::RuleParse(format!("bad table entry `{other}`"))),
            };
        }
        let param_line = lines
            .next()
            .ok_or_else(|| Error::RuleParse("missing parameter line".into()))?;
        let params: Vec<S> = param_line
            .split_whitespace()
            .map(|p| {
                p.parse::<S>()
                    .map_err(|_| Error::RuleParse(format!("bad parameter `{p}`")))
            })
            .collect::<Result<_>>()?;
        let (eta, theta, alpha_h, alpha_o) = match params[..] {
            [eta, theta, alpha_o] => (eta, theta, None, alpha_o),
            [eta, theta, alpha_h, alpha_o] => (eta, theta, Some(alpha_h), alpha_o),
            _ => {
                return Err(Error::RuleParse(format!(
                    "expected 3 or 4 parameters, got {}",
                    params.len()
                )))
            }
        };
        Ok(NpspRule {
            table,
            eta,
            theta,
            alpha_h,
            alpha_o,
        })
    }
}

/// Activation traces for every plastic connection of a controller, stored
/// in matrices parallel to the weight groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatSet {
    hidden: usize,
    /// One `Vec<Nat>` per weight group, row-major like the weights.
    traces: Vec<Vec<Nat>>,
    pub steps: u32,
}

impl NatSet {
    pub fn new<S: Scalar>(weights: &NetworkWeights<S>) -> Self {
        let traces = weights
            .groups()
            .iter()
            .map(|g| vec![Nat::default(); g.mat.rows() * g.mat.cols()])
            .collect();
        NatSet {
            hidden: weights.hidden(),
            traces,
            steps: 0,
        }
    }

    pub fn reset(&mut self) {
        for group in &mut self.traces {
            group.fill(Nat::default());
        }
        self.steps = 0;
    }

    pub fn trace(&self, group: usize, row: usize, col: usize, cols: usize) -> &Nat {
        &self.traces[group][row * cols + col]
    }

    /// Records one step of joint activations. For each connection the post
    /// activation comes from the freshly computed state and the pre
    /// activation is the value that fed the weighted sum (current inputs
    /// for input groups, previous-step activations for recurrent and
    /// feedback groups).
    pub fn record_step<S: Scalar>(
        &mut self,
        weights: &NetworkWeights<S>,
        previous: &NetworkState<S>,
        current: &NetworkState<S>,
    ) {
        for (group, traces) in weights.groups().iter().zip(&mut self.traces) {
            let (post, pre): (&[u8], &[u8]) = match group.kind {
                MatrixKind::OutputFromInput => (&current.outputs, &current.inputs),
                MatrixKind::OutputRecurrent => (&current.outputs, &previous.outputs),
                MatrixKind::HiddenFromInput => (&current.hidden, &current.inputs),
                MatrixKind::HiddenRecurrent => (&current.hidden, &previous.hidden),
                MatrixKind::HiddenFromOutput => (&current.hidden, &previous.outputs),
                MatrixKind::OutputFromHidden => (&current.outputs, &current.hidden),
            };
            debug_assert_eq!(post.len(), group.mat.rows());
            debug_assert_eq!(pre.len(), group.mat.cols());
            for (r, &a_post) in post.iter().enumerate() {
                for (c, &a_pre) in pre.iter().enumerate() {
                    traces[r * group.mat.cols() + c].record(a_post, a_pre);
                }
            }
        }
        self.steps += 1;
    }
}

/// Outcome diagnostics of one plasticity update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApplyStats {
    /// Incoming vectors that were exactly zero after the raw update and
    /// were left unnormalized.
    pub zero_rows: usize,
}

/// Applies the rule to every plastic connection and renormalizes the
/// incoming weight vectors. Zero diagonals are preserved.
pub fn apply_npsp<S: Scalar>(
    weights: &mut NetworkWeights<S>,
    nats: &NatSet,
    rule: &NpspRule<S>,
) -> Result<ApplyStats> {
    if nats.steps == 0 {
        return Err(Error::DegenerateEpisode);
    }
    for (group, traces) in weights.groups_mut().iter_mut().zip(&nats.traces) {
        let zero_diag = group.kind.zero_diagonal();
        let cols = group.mat.cols();
        for r in 0..group.mat.rows() {
            for c in 0..cols {
                if zero_diag && r == c {
                    continue;
                }
                let index = binarize(&traces[r * cols + c], nats.steps, rule.theta)?;
                let delta = rule.delta(index);
                if delta != 0 {
                    let dw = rule.eta * S::from_i8(delta).unwrap();
                    let w = group.mat.get(r, c);
                    group.mat.set(r, c, w + dw);
                }
            }
        }
    }
    let zero_rows = weights.normalize_incoming();
    Ok(ApplyStats { zero_rows })
}
