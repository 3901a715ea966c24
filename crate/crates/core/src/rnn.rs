//! Binary-threshold recurrent controllers.
//!
//! Two architectures: a direct network (sensors + bias to outputs, with
//! recurrent output connections) and a layered one with a hidden layer.
//! Activations are binary; the step function maps negative sums to 0 and
//! everything else to 1. Pre-threshold output sums are kept for action
//! selection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::maze::{Action, SensorReading};
use crate::scalar::Scalar;

/// Sensor inputs plus the constant bias input.
pub const NUM_INPUTS: usize = 4;
pub const NUM_OUTPUTS: usize = 5;

/// Network shape and the evolved scale factors for recurrent (`alpha_h`)
/// and feedback (`alpha_o`) connections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkTopology<S> {
    pub hidden: usize,
    pub alpha_h: S,
    pub alpha_o: S,
}

impl<S: Scalar> NetworkTopology<S> {
    pub fn direct(alpha_o: S) -> Self {
        NetworkTopology {
            hidden: 0,
            alpha_h: S::zero(),
            alpha_o,
        }
    }

    pub fn layered(hidden: usize, alpha_h: S, alpha_o: S) -> Self {
        assert!(hidden > 0);
        NetworkTopology {
            hidden,
            alpha_h,
            alpha_o,
        }
    }
}

/// Dense row-major matrix; row = post-synaptic neuron, column = pre-synaptic.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn dot_row_binary(&self, r: usize, v: &[u8]) -> S {
        debug_assert_eq!(v.len(), self.cols);
        let mut acc = S::zero();
        for (w, &a) in self.row(r).iter().zip(v) {
            if a != 0 {
                acc += *w;
            }
        }
        acc
    }
}

/// Which weight matrix a connection group belongs to. Naming is
/// post-layer-from-pre-layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    OutputFromInput,
    OutputRecurrent,
    HiddenFromInput,
    HiddenRecurrent,
    HiddenFromOutput,
    OutputFromHidden,
}

impl MatrixKind {
    pub fn label(self) -> &'static str {
        match self {
            MatrixKind::OutputFromInput => "W_oi",
            MatrixKind::OutputRecurrent => "W_o",
            MatrixKind::HiddenFromInput => "W_hi",
            MatrixKind::HiddenRecurrent => "W_h",
            MatrixKind::HiddenFromOutput => "W_ho",
            MatrixKind::OutputFromHidden => "W_oh",
        }
    }

    /// True if the post-synaptic side is the hidden layer.
    pub fn post_is_hidden(self) -> bool {
        matches!(
            self,
            MatrixKind::HiddenFromInput
                | MatrixKind::HiddenRecurrent
                | MatrixKind::HiddenFromOutput
        )
    }

    /// Recurrent groups keep a fixed zero diagonal (no self connections).
    pub fn zero_diagonal(self) -> bool {
        matches!(
            self,
            MatrixKind::OutputRecurrent | MatrixKind::HiddenRecurrent
        )
    }
}

/// One weight matrix of the controller.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGroup<S> {
    pub kind: MatrixKind,
    pub mat: Matrix<S>,
}

/// All weight matrices of a controller. The set of groups is fixed by the
/// topology: `[W_oi, W_o]` for the direct network, `[W_hi, W_h, W_ho, W_oh]`
/// with a hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWeights<S> {
    hidden: usize,
    groups: Vec<WeightGroup<S>>,
}

/// Shapes of the weight matrices for a given hidden-layer size.
pub fn layout(hidden: usize) -> Vec<(MatrixKind, usize, usize)> {
    if hidden == 0 {
        vec![
            (MatrixKind::OutputFromInput, NUM_OUTPUTS, NUM_INPUTS),
            (MatrixKind::OutputRecurrent, NUM_OUTPUTS, NUM_OUTPUTS),
        ]
    } else {
        vec![
            (MatrixKind::HiddenFromInput, hidden, NUM_INPUTS),
            (MatrixKind::HiddenRecurrent, hidden, hidden),
            (MatrixKind::HiddenFromOutput, hidden, NUM_OUTPUTS),
            (MatrixKind::OutputFromHidden, NUM_OUTPUTS, hidden),
        ]
    }
}

impl<S: Scalar> NetworkWeights<S> {
    pub fn zeros(hidden: usize) -> Self {
        let groups = layout(hidden)
            .into_iter()
            .map(|(kind, r, c)| WeightGroup {
                kind,
                mat: Matrix::zeros(r, c),
            })
            .collect();
        NetworkWeights { hidden, groups }
    }

    /// Uniform random weights in [-1, 1] with zero diagonals, each incoming
    /// vector normalized to unit length.
    pub fn init_random<R: Rng + ?Sized>(hidden: usize, rng: &mut R) -> Self {
        let mut w = Self::zeros(hidden);
        for group in &mut w.groups {
            let zero_diag = group.kind.zero_diagonal();
            for r in 0..group.mat.rows() {
                for c in 0..group.mat.cols() {
                    if zero_diag && r == c {
                        continue;
                    }
                    group.mat.set(r, c, rng.random_range(-S::one()..=S::one()));
                }
            }
        }
        w.normalize_incoming();
        w
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn groups(&self) -> &[WeightGroup<S>] {
        &self.groups
    }

    pub fn groups_mut(&mut self) -> &mut [WeightGroup<S>] {
        &mut self.groups
    }

    pub fn mat(&self, kind: MatrixKind) -> &Matrix<S> {
        &self
            .groups
            .iter()
            .find(|g| g.kind == kind)
            .expect("matrix kind not present in this topology")
            .mat
    }

    /// Free parameters, excluding the fixed zero diagonals.
    pub fn param_count(&self) -> usize {
        self.groups
            .iter()
            .map(|g| {
                let n = g.mat.rows() * g.mat.cols();
                if g.kind.zero_diagonal() {
                    n - g.mat.rows()
                } else {
                    n
                }
            })
            .sum()
    }

    /// Rescales every post-synaptic neuron's concatenated incoming weight
    /// vector to unit Euclidean length. Exactly-zero vectors are left as-is;
    /// the returned count reports how many were skipped.
    pub fn normalize_incoming(&mut self) -> usize {
        let mut zero_rows = 0;
        let post_rows = |hidden: bool, w: &Self| {
            if hidden {
                w.hidden
            } else {
                NUM_OUTPUTS
            }
        };
        for post_hidden in [true, false] {
            let rows = post_rows(post_hidden, self);
            if rows == 0 {
                continue;
            }
            if post_hidden && self.hidden == 0 {
                continue;
            }
            for r in 0..rows {
                let mut sq = S::zero();
                for g in &self.groups {
                    if g.kind.post_is_hidden() == post_hidden {
                        for &w in g.mat.row(r) {
                            sq += w * w;
                        }
                    }
                }
                if sq == S::zero() {
                    zero_rows += 1;
                    continue;
                }
                let inv = S::one() / sq.sqrt();
                for g in &mut self.groups {
                    if g.kind.post_is_hidden() == post_hidden {
                        for w in g.mat.row_mut(r) {
                            *w = *w * inv;
                        }
                    }
                }
            }
        }
        zero_rows
    }

    /// Labeled CSV snapshot of all matrices.
    pub fn to_snapshot(&self) -> String {
        let mut out = format!("hidden,{}\n", self.hidden);
        for g in &self.groups {
            out.push_str(&format!(
                "{},{},{}\n",
                g.kind.label(),
                g.mat.rows(),
                g.mat.cols()
            ));
            for r in 0..g.mat.rows() {
                let row: Vec<String> = g.mat.row(r).iter().map(|w| format!("{w}")).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::SnapshotParse("empty snapshot".into()))?;
        let hidden: usize = header
            .strip_prefix("hidden,")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::SnapshotParse("bad topology header".into()))?;
        let mut w = Self::zeros(hidden);
        for g in &mut w.groups {
            let head = lines
                .next()
                .ok_or_else(|| Error::SnapshotParse("truncated snapshot".into()))?;
            let expect = format!("{},{},{}", g.kind.label(), g.mat.rows(), g.mat.cols());
            if head != expect {
                return Err(Error::SnapshotParse(format!(
                    "expected `{expect}`, got `{head}`"
                )));
            }
            for r in 0..g.mat.rows() {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::SnapshotParse("truncated matrix".into()))?;
                let values: Vec<&str> = line.split(',').collect();
                if values.len() != g.mat.cols() {
                    return Err(Error::SnapshotParse(format!("bad row width in {head}")));
                }
                for (c, v) in values.iter().enumerate() {
                    let parsed = v
                        .parse::<S>()
                        .map_err(|_| Error::SnapshotParse(format!("bad number `{v}`")))?;
                    g.mat.set(r, c, parsed);
                }
            }
        }
        Ok(w)
    }
}

/// Binary activation vectors plus the retained pre-threshold output sums.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState<S> {
    pub inputs: [u8; NUM_INPUTS],
    pub hidden: Vec<u8>,
    pub outputs: [u8; NUM_OUTPUTS],
    pub net_outputs: [S; NUM_OUTPUTS],
}

impl<S: Scalar> NetworkState<S> {
    /// Episode-start state: all activations zero, bias input set to 1.
    pub fn reset(hidden: usize) -> Self {
        let mut inputs = [0u8; NUM_INPUTS];
        inputs[NUM_INPUTS - 1] = 1;
        NetworkState {
            inputs,
            hidden: vec![0; hidden],
            outputs: [0; NUM_OUTPUTS],
            net_outputs: [S::zero(); NUM_OUTPUTS],
        }
    }
}

/// Step function: 0 for negative sums, 1 otherwise.
pub fn step_fn<S: Scalar>(x: S) -> u8 {
    if x < S::zero() {
        0
    } else {
        1
    }
}

/// One synchronous update of the network given fresh sensor inputs.
pub fn forward_step<S: Scalar>(
    weights: &NetworkWeights<S>,
    topology: &NetworkTopology<S>,
    state: &NetworkState<S>,
    sensors: SensorReading,
) -> NetworkState<S> {
    let inputs = [sensors.left, sensors.front, sensors.right, 1];
    let mut next = NetworkState {
        inputs,
        hidden: vec![0; weights.hidden()],
        outputs: [0; NUM_OUTPUTS],
        net_outputs: [S::zero(); NUM_OUTPUTS],
    };
    if weights.hidden() == 0 {
        let w_oi = weights.mat(MatrixKind::OutputFromInput);
        let w_o = weights.mat(MatrixKind::OutputRecurrent);
        for i in 0..NUM_OUTPUTS {
            let net = w_oi.dot_row_binary(i, &inputs)
                + topology.alpha_o * w_o.dot_row_binary(i, &state.outputs);
            next.net_outputs[i] = net;
            next.outputs[i] = step_fn(net);
        }
    } else {
        let w_hi = weights.mat(MatrixKind::HiddenFromInput);
        let w_h = weights.mat(MatrixKind::HiddenRecurrent);
        let w_ho = weights.mat(MatrixKind::HiddenFromOutput);
        let w_oh = weights.mat(MatrixKind::OutputFromHidden);
        for i in 0..weights.hidden() {
            let net = w_hi.dot_row_binary(i, &inputs)
                + topology.alpha_h * w_h.dot_row_binary(i, &state.hidden)
                + topology.alpha_o * w_ho.dot_row_binary(i, &state.outputs);
            next.hidden[i] = step_fn(net);
        }
        for i in 0..NUM_OUTPUTS {
            let net = w_oh.dot_row_binary(i, &next.hidden);
            next.net_outputs[i] = net;
            next.outputs[i] = step_fn(net);
        }
    }
    next
}

/// Action of the output neuron with the largest pre-threshold sum; ties go
/// to the lowest index.
pub fn select_action<S: Scalar>(state: &NetworkState<S>) -> Action {
    let mut best = 0;
    for i in 1..NUM_OUTPUTS {
        if state.net_outputs[i] > state.net_outputs[best] {
            best = i;
        }
    }
    Action::ALL[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sensors(l: u8, f: u8, r: u8) -> SensorReading {
        SensorReading {
            left: l,
            front: f,
            right: r,
        }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = NetworkWeights::<f64>::init_random(15, &mut ChaCha8Rng::seed_from_u64(7));
        let b = NetworkWeights::<f64>::init_random(15, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        let c = NetworkWeights::<f64>::init_random(15, &mut ChaCha8Rng::seed_from_u64(8));
        assert_ne!(a, c);
    }

    fn incoming_norms<S: Scalar>(w: &NetworkWeights<S>) -> Vec<S> {
        let mut norms = Vec::new();
        for post_hidden in [true, false] {
            let rows = if post_hidden { w.hidden() } else { NUM_OUTPUTS };
            if post_hidden && w.hidden() == 0 {
                continue;
            }
            for r in 0..rows {
                let mut sq = S::zero();
                for g in w.groups() {
                    if g.kind.post_is_hidden() == post_hidden {
                        for c in 0..g.mat.cols() {
                            let v = g.mat.get(r, c);
                            sq += v * v;
                        }
                    }
                }
                norms.push(sq.sqrt());
            }
        }
        norms
    }

    #[test]
    fn init_produces_unit_incoming_vectors() {
        let w = NetworkWeights::<f64>::init_random(15, &mut ChaCha8Rng::seed_from_u64(3));
        for n in incoming_norms(&w) {
            assert!((n - 1.0).abs() < 1e-9, "norm {n}");
        }
    }

    #[test]
    fn parameter_counts_match_architecture() {
        for (hidden, expect) in [(0, 40), (15, 420), (30, 1290), (50, 3150)] {
            let w = NetworkWeights::<f64>::init_random(hidden, &mut ChaCha8Rng::seed_from_u64(1));
            assert_eq!(w.param_count(), expect, "hidden = {hidden}");
        }
    }

    #[test]
    fn zero_weights_give_all_ones_output() {
        // net sums are exactly zero and the step function maps 0 to 1
        let w = NetworkWeights::<f64>::zeros(0);
        let top = NetworkTopology::direct(1.0);
        let state = NetworkState::reset(0);
        let next = forward_step(&w, &top, &state, sensors(1, 1, 1));
        assert_eq!(next.outputs, [1, 1, 1, 1, 1]);
        assert_eq!(next.net_outputs, [0.0; 5]);
    }

    #[test]
    fn zero_feedback_scale_ignores_previous_outputs() {
        let w = NetworkWeights::<f64>::init_random(0, &mut ChaCha8Rng::seed_from_u64(11));
        let top = NetworkTopology::direct(0.0);
        let mut a = NetworkState::reset(0);
        let mut b = NetworkState::reset(0);
        b.outputs = [1, 0, 1, 0, 1];
        let s = sensors(1, 0, 1);
        let na = forward_step(&w, &top, &a, s);
        let nb = forward_step(&w, &top, &b, s);
        assert_eq!(na.outputs, nb.outputs);
        assert_eq!(na.net_outputs, nb.net_outputs);
        a = na;
        b = nb;
        assert_eq!(a, b);
    }

    /// Straight-line recomputation of the layered dynamics, independent of
    /// the matrix helpers in the implementation.
    #[allow(clippy::needless_range_loop)]
    fn brute_force_layered(
        w: &NetworkWeights<f64>,
        top: &NetworkTopology<f64>,
        sensor_log: &[SensorReading],
    ) -> Vec<([u8; NUM_OUTPUTS], Vec<u8>)> {
        let h = w.hidden();
        let w_hi = w.mat(MatrixKind::HiddenFromInput);
        let w_h = w.mat(MatrixKind::HiddenRecurrent);
        let w_ho = w.mat(MatrixKind::HiddenFromOutput);
        let w_oh = w.mat(MatrixKind::OutputFromHidden);
        let mut a_h = vec![0u8; h];
        let mut a_o = [0u8; NUM_OUTPUTS];
        let mut trace = Vec::new();
        for s in sensor_log {
            let a_i = [s.left, s.front, s.right, 1u8];
            let mut new_h = vec![0u8; h];
            for i in 0..h {
                let mut net = 0.0;
                for j in 0..NUM_INPUTS {
                    net += w_hi.get(i, j) * a_i[j] as f64;
                }
                for j in 0..h {
                    net += top.alpha_h * w_h.get(i, j) * a_h[j] as f64;
                }
                for j in 0..NUM_OUTPUTS {
                    net += top.alpha_o * w_ho.get(i, j) * a_o[j] as f64;
                }
                new_h[i] = if net < 0.0 { 0 } else { 1 };
            }
            let mut new_o = [0u8; NUM_OUTPUTS];
            for i in 0..NUM_OUTPUTS {
                let mut net = 0.0;
                for j in 0..h {
                    net += w_oh.get(i, j) * new_h[j] as f64;
                }
                new_o[i] = if net < 0.0 { 0 } else { 1 };
            }
            a_h = new_h;
            a_o = new_o;
            trace.push((a_o, a_h.clone()));
        }
        trace
    }

    #[test]
    fn layered_dynamics_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let w = NetworkWeights::<f64>::init_random(15, &mut rng);
        let top = NetworkTopology::layered(15, 0.7, 0.3);
        let sensor_log: Vec<SensorReading> = (0..10)
            .map(|_| {
                sensors(
                    rng.random_range(0..=1),
                    rng.random_range(0..=1),
                    rng.random_range(0..=1),
                )
            })
            .collect();
        let expected = brute_force_layered(&w, &top, &sensor_log);
        let mut state = NetworkState::reset(15);
        for (s, (exp_o, exp_h)) in sensor_log.iter().zip(&expected) {
            state = forward_step(&w, &top, &state, *s);
            assert_eq!(&state.outputs, exp_o);
            assert_eq!(&state.hidden, exp_h);
        }
    }

    #[test]
    fn action_selection_is_argmax_with_low_index_ties() {
        let mut state = NetworkState::<f64>::reset(0);
        state.net_outputs = [0.0; 5];
        assert_eq!(select_action(&state), Action::Stop);
        state.net_outputs = [-1.0, 3.0, 0.0, 2.0, 1.0];
        assert_eq!(select_action(&state), Action::Left);
        state.net_outputs = [2.0, 2.0, 1.0, 0.0, 0.0];
        assert_eq!(select_action(&state), Action::Stop);
    }

    #[test]
    fn reset_state_is_zeroed_with_bias() {
        let state = NetworkState::<f64>::reset(15);
        assert_eq!(state.hidden, vec![0u8; 15]);
        assert_eq!(state.outputs, [0; 5]);
        assert_eq!(state.inputs[NUM_INPUTS - 1], 1);
        assert_eq!(state, NetworkState::<f64>::reset(15));
    }

    #[test]
    fn snapshot_round_trips() {
        let w = NetworkWeights::<f64>::init_random(15, &mut ChaCha8Rng::seed_from_u64(5));
        let text = w.to_snapshot();
        let back = NetworkWeights::<f64>::from_snapshot(&text).unwrap();
        assert_eq!(w, back);
    }
}
