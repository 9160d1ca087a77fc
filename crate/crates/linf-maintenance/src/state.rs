//! Tracker state: window schedule, sample budgets, descent, corrections.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketching::SamplingTree;

use crate::{LinfError, VectorOracle};

/// Below this projected change-mass a window is treated as motionless and
/// skipped; the accept/reject loop would otherwise never terminate.
const ZERO_ESTIMATE: f64 = 1e-24;

/// Hard cap on accept/reject rounds per draw. The expected count is about
/// ten, so hitting the cap means the oracle's type-I and type-II answers
/// describe different vectors.
const STALL_ROUNDS: usize = 100_000;

/// Tolerances and budgets for one tracker instance.
#[derive(Debug, Clone)]
pub struct LinfParams {
    /// Entry-wise error bound the tracker maintains.
    pub eps_apx: f64,
    /// Failure budget entering the sample counts: larger values mean fewer
    /// samples and a weaker confidence statement.
    pub delta_apx: f64,
    /// Per-step movement bound `‖y(ℓ) − y(ℓ−1)‖₂ ≤ ζ` promised by the
    /// caller; budgets are sized against it.
    pub zeta: f64,
    /// Number of queries supported before the structure must be rebuilt.
    pub horizon: usize,
    /// Leading constant of the per-window sample budget. The default of 8 is
    /// deliberately generous; statistical harnesses lower it to exercise the
    /// sampling path on small inputs.
    pub budget_constant: f64,
    /// Seed for the descent's randomness; equal seeds replay exactly.
    pub seed: u64,
}

impl LinfParams {
    /// Parameters with the default budget constant and a fixed seed.
    pub fn new(eps_apx: f64, delta_apx: f64, zeta: f64, horizon: usize) -> Self {
        LinfParams {
            eps_apx,
            delta_apx,
            zeta,
            horizon,
            budget_constant: 8.0,
            seed: 0x1f5d_97c3,
        }
    }

    /// Same parameters with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same parameters with a different leading budget constant.
    pub fn with_budget_constant(mut self, c: f64) -> Self {
        self.budget_constant = c;
        self
    }
}

/// What one window of one query did.
#[derive(Debug, Clone)]
pub struct WindowReport {
    /// Window length exponent: the window spans `2ʲ` steps.
    pub j: u32,
    /// First step of the window (inclusive); the change examined is
    /// `y(end) − y(start − 1)`.
    pub start: usize,
    /// Last step of the window — always the current step.
    pub end: usize,
    /// Sample budget assigned to the window.
    pub budget: usize,
    /// Whether the budget reached `n` and the window read every coordinate
    /// directly instead of sampling.
    pub swept: bool,
    /// Coordinates examined (draws if sampled, `n` if swept).
    pub draws: usize,
    /// Whether the window was skipped because its change-mass was zero.
    pub skipped: bool,
    /// Coordinates whose stored value was refreshed.
    pub corrected: Vec<usize>,
}

/// What one query did, across all of its windows.
#[derive(Debug, Clone)]
pub struct QueryReport {
    /// The step the query advanced to.
    pub version: usize,
    /// One entry per power-of-two window ending at `version`, shortest
    /// first.
    pub windows: Vec<WindowReport>,
}

/// One draw of the change sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOutcome {
    /// The sampled coordinate, or `None` when the window's change-mass is
    /// zero and there is nothing to sample.
    pub index: Option<usize>,
    /// Accept/reject rounds the draw used.
    pub rounds: usize,
}

/// The power-of-two step windows examined at step `ell`, shortest first,
/// as inclusive `(start, end)` ranges: one window `(ell − 2ʲ + 1, ell)` for
/// every `j` with `2ʲ` dividing `ell`.
pub fn windows_at(ell: usize) -> Vec<(usize, usize)> {
    if ell == 0 {
        return Vec::new();
    }
    (0..=ell.trailing_zeros())
        .map(|j| (ell - (1usize << j) + 1, ell))
        .collect()
}

/// Entry-wise tracker for one oracle-backed vector sequence.
///
/// Holds the current approximation `z`, the step counter, and the sampling
/// tree the descent walks. The oracle is passed into each call rather than
/// owned, so several trackers can share one producer.
pub struct LinfState {
    tree: Arc<SamplingTree>,
    params: LinfParams,
    n: usize,
    ell: usize,
    z: Vec<f64>,
    rng: ChaCha8Rng,
    /// Change-mass estimates are reused across the many draws of one window:
    /// versions are immutable, so an estimate for a `(from, to, node)` triple
    /// never goes stale. Keyed by node, tagged with the version pair.
    cache_key: (usize, usize),
    cache: HashMap<usize, f64>,
}

impl LinfState {
    /// A tracker over `tree`'s coordinates starting from the exact initial
    /// vector: version 0 of the oracle's sequence must equal `initial`.
    pub fn new(
        tree: Arc<SamplingTree>,
        params: LinfParams,
        initial: &[f64],
    ) -> Result<LinfState, LinfError> {
        if initial.len() != tree.nvars() {
            return Err(LinfError::Dimension {
                reason: "initial vector length must match the tree's coordinate count",
            });
        }
        if !(params.eps_apx > 0.0) || !params.eps_apx.is_finite() {
            return Err(LinfError::Dimension {
                reason: "entry-wise tolerance must be positive and finite",
            });
        }
        if !(params.delta_apx > 0.0) {
            return Err(LinfError::Dimension {
                reason: "failure budget must be positive",
            });
        }
        if !(params.zeta >= 0.0) || !params.zeta.is_finite() {
            return Err(LinfError::Dimension {
                reason: "drift bound must be nonnegative and finite",
            });
        }
        if params.horizon == 0 {
            return Err(LinfError::Dimension {
                reason: "horizon must allow at least one query",
            });
        }
        if !(params.budget_constant > 0.0) {
            return Err(LinfError::Dimension {
                reason: "budget constant must be positive",
            });
        }
        let n = tree.nvars();
        Ok(LinfState {
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            tree,
            params,
            n,
            ell: 0,
            z: initial.to_vec(),
            cache_key: (usize::MAX, usize::MAX),
            cache: HashMap::new(),
        })
    }

    /// The current approximation.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Steps taken so far; also the newest oracle version read.
    pub fn version(&self) -> usize {
        self.ell
    }

    /// The parameters the tracker was built with.
    pub fn params(&self) -> &LinfParams {
        &self.params
    }

    /// The sampling tree the descent walks.
    pub fn tree(&self) -> &Arc<SamplingTree> {
        &self.tree
    }

    /// Sample budget for a window spanning `2ʲ` steps, capped at `n` — a
    /// budget that reaches `n` makes the window read every coordinate
    /// directly, which is both cheaper and exact.
    ///
    /// The count grows as `4ʲ · (ζ/ε)²` so that longer windows, which see
    /// proportionally more accumulated movement, keep the same per-window
    /// detection confidence.
    pub fn window_budget(&self, j: u32) -> usize {
        let p = &self.params;
        let k = p.horizon as f64;
        let n = self.n as f64;
        let ratio = p.zeta / p.eps_apx;
        let growth = 4f64.powi(j as i32);
        let poly_log = (k + 2.0).ln().powi(3);
        let tail = ((n * k * p.zeta) / (p.eps_apx * p.delta_apx) + std::f64::consts::E).ln();
        let raw = p.budget_constant * growth * ratio * ratio * poly_log * tail;
        if !raw.is_finite() || raw >= n {
            self.n
        } else {
            (raw.ceil() as usize).min(self.n)
        }
    }

    /// Advances one step and repairs `z` toward the new version.
    ///
    /// The oracle must already serve version `version() + 1`. For every
    /// power-of-two window ending exactly at the new step, the tracker
    /// either sweeps all coordinates (when the window's budget reaches `n`)
    /// or draws its budget of coordinates in proportion to squared change
    /// across the window; a touched coordinate is refreshed from an exact
    /// read when its stored value is off by more than the tolerance.
    pub fn query<O: VectorOracle>(&mut self, oracle: &mut O) -> Result<QueryReport, LinfError> {
        if self.ell >= self.params.horizon {
            return Err(LinfError::HorizonExceeded {
                step: self.ell + 1,
                horizon: self.params.horizon,
            });
        }
        self.ell += 1;
        let ell = self.ell;
        let mut windows = Vec::new();
        for j in 0..=ell.trailing_zeros() {
            let span = 1usize << j;
            let base = ell - span;
            let budget = self.window_budget(j);
            let mut report = WindowReport {
                j,
                start: base + 1,
                end: ell,
                budget,
                swept: false,
                draws: 0,
                skipped: false,
                corrected: Vec::new(),
            };
            if budget >= self.n {
                report.swept = true;
                report.draws = self.n;
                for i in 0..self.n {
                    self.correct(oracle, i, &mut report);
                }
            } else if budget > 0 {
                let total = self.estimate_cached(oracle, base, ell, self.tree.root());
                if total < ZERO_ESTIMATE {
                    report.skipped = true;
                } else {
                    for _ in 0..budget {
                        let outcome = self.draw(oracle, base, ell)?;
                        report.draws += 1;
                        match outcome.index {
                            Some(i) => self.correct(oracle, i, &mut report),
                            None => {
                                report.skipped = true;
                                break;
                            }
                        }
                    }
                }
            }
            windows.push(report);
        }
        Ok(QueryReport {
            version: ell,
            windows,
        })
    }

    /// Draws a coordinate with probability proportional to
    /// `(y(b)ᵢ − y(a)ᵢ)²`, up to the distortion of the oracle's projection.
    ///
    /// Each round walks the tree from the root, choosing among children in
    /// proportion to their projected change-mass, then accepts the reached
    /// coordinate with probability `(Δyᵢ)² / (10 · p · total)` where `p` is
    /// the walk's probability — so accepted draws follow the exact
    /// squared-change law regardless of projection error. Returns
    /// `index: None` when the root's change-mass is zero.
    pub fn sample<O: VectorOracle>(
        &mut self,
        oracle: &mut O,
        a: usize,
        b: usize,
    ) -> Result<SampleOutcome, LinfError> {
        self.draw(oracle, a, b)
    }

    /// The squared length of the projected change `Φ_{χ(v)}(y(b) − y(a))`,
    /// an unbiased estimate of the change-mass `‖(y(b) − y(a))_{χ(v)}‖₂²`.
    pub fn estimate<O: VectorOracle>(&self, oracle: &mut O, a: usize, b: usize, v: usize) -> f64 {
        estimate_direct(oracle, a, b, v)
    }

    /// Refreshes coordinate `i` from an exact read of the current version
    /// when it is off by more than the tolerance.
    fn correct<O: VectorOracle>(&mut self, oracle: &mut O, i: usize, report: &mut WindowReport) {
        let truth = oracle.type_ii(self.ell, i);
        if (self.z[i] - truth).abs() > self.params.eps_apx {
            self.z[i] = truth;
            report.corrected.push(i);
        }
    }

    fn estimate_cached<O: VectorOracle>(
        &mut self,
        oracle: &mut O,
        a: usize,
        b: usize,
        v: usize,
    ) -> f64 {
        if self.cache_key != (a, b) {
            self.cache_key = (a, b);
            self.cache.clear();
        }
        if let Some(&e) = self.cache.get(&v) {
            return e;
        }
        let e = estimate_direct(oracle, a, b, v);
        self.cache.insert(v, e);
        e
    }

    fn draw<O: VectorOracle>(
        &mut self,
        oracle: &mut O,
        a: usize,
        b: usize,
    ) -> Result<SampleOutcome, LinfError> {
        let tree = Arc::clone(&self.tree);
        let root = tree.root();
        let total = self.estimate_cached(oracle, a, b, root);
        if total < ZERO_ESTIMATE {
            return Ok(SampleOutcome {
                index: None,
                rounds: 0,
            });
        }
        let mut weights = Vec::new();
        let mut rounds = 0usize;
        loop {
            rounds += 1;
            if rounds > STALL_ROUNDS {
                return Err(LinfError::SamplingStalled { rounds });
            }
            let mut v = root;
            let mut p = 1.0f64;
            let mut dead = false;
            while self.tree.coordinate(v).is_none() {
                let kids = tree.children(v);
                weights.clear();
                for &c in kids {
                    weights.push(self.estimate_cached(oracle, a, b, c));
                }
                let sum: f64 = weights.iter().sum();
                if !(sum > 0.0) {
                    // A childless placeholder or a numerically dead subtree;
                    // treat the round as rejected.
                    dead = true;
                    break;
                }
                let mut pick = self.rng.gen::<f64>() * sum;
                let mut chosen = kids.len() - 1;
                for (idx, &w) in weights.iter().enumerate() {
                    if pick < w {
                        chosen = idx;
                        break;
                    }
                    pick -= w;
                }
                p *= weights[chosen] / sum;
                v = kids[chosen];
            }
            if dead {
                continue;
            }
            let i = self.tree.coordinate(v).expect("descent stops at a leaf");
            let dy = oracle.type_ii(b, i) - oracle.type_ii(a, i);
            let accept = (dy * dy) / (10.0 * p * total);
            if self.rng.gen::<f64>() < accept.min(1.0) {
                return Ok(SampleOutcome {
                    index: Some(i),
                    rounds,
                });
            }
        }
    }
}

fn estimate_direct<O: VectorOracle>(oracle: &mut O, a: usize, b: usize, v: usize) -> f64 {
    let ya = oracle.type_i(a, v);
    let yb = oracle.type_i(b, v);
    debug_assert_eq!(ya.len(), yb.len());
    ya.iter().zip(&yb).map(|(p, q)| (p - q) * (p - q)).sum()
}
