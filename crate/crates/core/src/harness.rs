//! Coded MIMO link simulation: one code block at a time, with the clipping
//! level carried from block to block by the adaptive controller.
//!
//! A block runs: random information bits, (5/7) encoding, interleaving,
//! Gray mapping onto `m_t`-symbol vectors, one fresh Rayleigh channel per
//! channel use, soft sphere detection at the current clipping level,
//! deinterleaving, log-MAP decoding, BER measurement and estimation, and one
//! controller update.
//!
//! Experiments run independent tracking chains per SNR point in parallel.
//! Every random draw comes from a substream keyed by `(point, chain, block,
//! channel use)`, so results do not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::adapt::{estimate_block_ber, init_clipping, Clamp, ClippingState, DEFAULT_L_MIN};
use crate::channel::{draw_channel, sigma2_for_snr, transmit, NoiseModel};
use crate::fec::{bcjr_decode, encode, hard_decision, Interleaver};
use crate::linalg::rotate_received;
use crate::modem::Constellation;
use crate::rng::{self, BlockCoord};
use crate::sphere::{DetectionProblem, SphereDecoder};
use crate::{Error, Result};
use rand::Rng;

/// How the detector's clipping level is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClipMode {
    /// Tracked by the controller, starting from `l_ter`.
    Adaptive,
    /// Constant level; `f64::INFINITY` is accepted and equals `Off`.
    Fixed(f64),
    /// No clipping.
    Off,
}

impl ClipMode {
    /// Level used for a block given the controller state.
    pub fn level(&self, state: &ClippingState) -> f64 {
        match *self {
            ClipMode::Adaptive => state.l_cl,
            ClipMode::Fixed(c) => c,
            ClipMode::Off => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for ClipMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClipMode::Adaptive => f.write_str("adaptive"),
            ClipMode::Fixed(c) => write!(f, "fixed={c}"),
            ClipMode::Off => f.write_str("off"),
        }
    }
}

impl std::str::FromStr for ClipMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "adaptive" => Ok(ClipMode::Adaptive),
            "off" => Ok(ClipMode::Off),
            _ => {
                let value = s.strip_prefix("fixed=").ok_or_else(|| {
                    Error::config(
                        "clip",
                        format!("expected adaptive, fixed=<C> or off, got `{s}`"),
                    )
                })?;
                let c: f64 = value.parse().map_err(|_| {
                    Error::config("clip", format!("cannot parse clip level `{value}`"))
                })?;
                if !(c > 0.0) {
                    return Err(Error::config(
                        "clip",
                        format!("clip level must be positive, got {c}"),
                    ));
                }
                Ok(ClipMode::Fixed(c))
            }
        }
    }
}

/// Simulation parameters. The defaults are the 4x4, 16-QAM, N = 1152 setup
/// with 100-block tracking chains, `mu = 0.1` and `n = 50`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m_t: usize,
    pub m_r: usize,
    pub order: usize,
    /// Information bits per code block.
    pub info_len: usize,
    pub snr_db: Vec<f64>,
    pub ter: f64,
    pub mu: f64,
    /// Number of least reliable bits used by the BER estimate.
    pub n_est: usize,
    /// Blocks per tracking chain.
    pub frames: usize,
    /// Chains per SNR point, and the batch size when more are needed.
    pub chains: usize,
    /// Cap on chains per SNR point under the error-count stopping rule.
    pub max_chains: usize,
    /// Steady-state bit errors after which a point stops adding chains.
    pub min_errors: u64,
    pub seed: u64,
    pub clip: ClipMode,
    pub l_min: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            m_t: 4,
            m_r: 4,
            order: 16,
            info_len: 1152,
            snr_db: (10..=16).map(f64::from).collect(),
            ter: 1e-4,
            mu: 0.1,
            n_est: 50,
            frames: 100,
            chains: 1,
            max_chains: 1,
            min_errors: 100,
            seed: 1,
            clip: ClipMode::Adaptive,
            l_min: DEFAULT_L_MIN,
            threads: None,
        }
    }
}

impl SimConfig {
    pub fn bits_per_use(&self) -> usize {
        self.m_t * self.order.trailing_zeros() as usize
    }

    pub fn uses_per_block(&self) -> usize {
        2 * self.info_len / self.bits_per_use()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_t == 0 {
            return Err(Error::config("m-t", "need at least one transmit antenna"));
        }
        if self.m_r < self.m_t {
            return Err(Error::config(
                "m-r",
                format!("need m_r >= m_t = {}", self.m_t),
            ));
        }
        Constellation::from_order(self.order).map_err(|e| Error::config("order", e.to_string()))?;
        if self.info_len == 0 {
            return Err(Error::config("info-len", "block length must be positive"));
        }
        if !(2 * self.info_len).is_multiple_of(self.bits_per_use()) {
            return Err(Error::config(
                "info-len",
                format!(
                    "{} coded bits do not fill whole channel uses of {} bits",
                    2 * self.info_len,
                    self.bits_per_use()
                ),
            ));
        }
        if self.uses_per_block() > rng::MAX_USES {
            return Err(Error::config("info-len", "too many channel uses per block"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("snr", "SNR grid is empty"));
        }
        if self.snr_db.len() > rng::MAX_POINTS {
            return Err(Error::config("snr", "too many SNR points"));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::config("snr", format!("SNR {s} is not finite")));
        }
        if !(self.ter > 0.0 && self.ter < 0.5) {
            return Err(Error::config(
                "ter",
                format!("must lie in (0, 0.5), got {}", self.ter),
            ));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::config(
                "mu",
                format!("must be finite and >= 0, got {}", self.mu),
            ));
        }
        if self.n_est == 0 || self.n_est > self.info_len {
            return Err(Error::config(
                "n-est",
                format!("must lie in 1..={}, got {}", self.info_len, self.n_est),
            ));
        }
        if self.frames == 0 || self.frames > rng::MAX_BLOCKS {
            return Err(Error::config(
                "frames",
                format!("must lie in 1..={}", rng::MAX_BLOCKS),
            ));
        }
        if self.chains == 0 {
            return Err(Error::config("chains", "need at least one chain"));
        }
        if self.max_chains < self.chains || self.max_chains > rng::MAX_CHAINS {
            return Err(Error::config(
                "max-chains",
                format!("must lie in {}..={}", self.chains, rng::MAX_CHAINS),
            ));
        }
        let l_ter = crate::adapt::ter_llr(self.ter);
        if !(self.l_min > 0.0) || self.l_min > l_ter {
            return Err(Error::config("l-min", format!("must lie in (0, {l_ter}]")));
        }
        if let ClipMode::Fixed(c) = self.clip {
            if !(c > 0.0) {
                return Err(Error::config("clip", "clip level must be positive"));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "need at least one thread"));
        }
        Ok(())
    }
}

/// Outcome of one code block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub point: usize,
    pub snr_db: f64,
    pub chain: usize,
    pub block: usize,
    /// Clipping level the detector used for this block.
    pub l_cl: f64,
    pub bit_errors: u64,
    pub info_bits: u64,
    /// Estimate from the `n_est` least reliable bits.
    pub ber_estimated: f64,
    /// Estimate over all information bits.
    pub ber_estimated_full: f64,
    pub visited_nodes: u64,
    pub channel_uses: u64,
    /// Clamp reported by the controller update after this block, if it ran.
    pub clamp: Option<Clamp>,
}

impl BlockRecord {
    pub fn ber_measured(&self) -> f64 {
        self.bit_errors as f64 / self.info_bits as f64
    }

    pub fn avg_visited_nodes(&self) -> f64 {
        self.visited_nodes as f64 / self.channel_uses as f64
    }
}

/// Per-(SNR, block index) row aggregated over chains.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub snr_db: f64,
    pub ter: f64,
    pub mu: f64,
    pub n_est: usize,
    pub clip_mode: ClipMode,
    pub block_index: usize,
    /// Mean clipping level over the aggregated chains.
    pub l_cl: f64,
    pub ber_measured: f64,
    pub ber_estimated: f64,
    pub avg_visited_nodes: f64,
    pub frames: usize,
}

/// Statistics over the second half of every chain at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub snr_db: f64,
    pub chains: usize,
    pub blocks: usize,
    pub bit_errors: u64,
    pub info_bits: u64,
    pub avg_visited_nodes: f64,
    pub mean_l_cl: f64,
    pub mean_ber_estimated: f64,
    pub mean_ber_estimated_full: f64,
    /// Fraction of blocks whose controller update hit the `l_ter` bound.
    pub upper_clamp_fraction: f64,
}

impl SteadyState {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.info_bits as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<MetricsRecord>,
    pub steady_state: Vec<SteadyState>,
    /// Raw block records ordered by (point, chain, block).
    pub blocks: Vec<BlockRecord>,
}

/// Immutable per-run state shared by all blocks.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    constellation: Constellation,
    interleaver: Interleaver,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let constellation = Constellation::from_order(cfg.order)?;
        let interleaver = Interleaver::random(2 * cfg.info_len, rng::interleaver_seed(cfg.seed));
        Ok(Self {
            cfg,
            constellation,
            interleaver,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn initial_state(&self) -> Result<ClippingState> {
        init_clipping(self.cfg.ter, self.cfg.mu, self.cfg.l_min)
    }

    /// Runs one block and returns its record with the next controller state.
    pub fn run_block(
        &self,
        coord: BlockCoord,
        noise: &NoiseModel,
        state: &ClippingState,
        decoder: &mut SphereDecoder,
    ) -> Result<(BlockRecord, ClippingState)> {
        let cfg = &self.cfg;
        let con = &self.constellation;
        let bps = con.bits_per_symbol();
        let bits_per_use = cfg.bits_per_use();
        let uses = cfg.uses_per_block();
        let clip = cfg.clip.level(state);

        let mut bits_rng = coord.bits_rng(cfg.seed);
        let info: Vec<u8> = (0..cfg.info_len)
            .map(|_| bits_rng.random_range(0..2u8))
            .collect();
        let block = encode(&info)?;
        let tx_bits = self.interleaver.interleave(&block.coded_bits)?;

        let mut det_llrs = vec![0.0; tx_bits.len()];
        let mut visited = 0u64;
        let mut symbols = vec![Complex64::new(0.0, 0.0); cfg.m_t];
        for u in 0..uses {
            let chunk = &tx_bits[u * bits_per_use..(u + 1) * bits_per_use];
            for (t, sym) in symbols.iter_mut().enumerate() {
                let index = chunk[t * bps..(t + 1) * bps]
                    .iter()
                    .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
                *sym = con.point(index);
            }
            let mut rng = coord.use_rng(cfg.seed, u);
            let ch = draw_channel(cfg.m_r, cfg.m_t, u, &mut rng)?;
            let y = transmit(&symbols, &ch, noise, &mut rng)?;
            let y_rot = rotate_received(&ch.qr.q, &y)?.into_vec();
            let out = decoder.detect(&DetectionProblem {
                r: &ch.qr.r,
                y_rot: &y_rot,
                constellation: con,
                sigma2: noise.sigma2,
                clip,
            })?;
            visited += out.visited_nodes;
            det_llrs[u * bits_per_use..(u + 1) * bits_per_use].copy_from_slice(&out.llrs);
        }

        let a_priori = self.interleaver.deinterleave(&det_llrs)?;
        let decoded = bcjr_decode(&a_priori)?;
        let bit_errors = decoded
            .app_info
            .iter()
            .zip(&info)
            .filter(|(&l, &b)| hard_decision(l) != b)
            .count() as u64;
        let estimate = estimate_block_ber(&decoded.app_info, cfg.n_est)?;
        let estimate_full = estimate_block_ber(&decoded.app_info, cfg.info_len)?;

        let (next, clamp) = match cfg.clip {
            ClipMode::Adaptive => {
                let (s, c) = state.update(estimate.p_hat)?;
                (s, Some(c))
            }
            _ => (*state, None),
        };

        let record = BlockRecord {
            point: coord.point,
            snr_db: noise.snr_db,
            chain: coord.chain,
            block: coord.block,
            l_cl: clip,
            bit_errors,
            info_bits: cfg.info_len as u64,
            ber_estimated: estimate.p_hat,
            ber_estimated_full: estimate_full.p_hat,
            visited_nodes: visited,
            channel_uses: uses as u64,
            clamp,
        };
        Ok((record, next))
    }

    /// Runs a full tracking chain from the initial controller state.
    pub fn run_chain(&self, point: usize, chain: usize) -> Result<Vec<BlockRecord>> {
        let snr_db = self.cfg.snr_db[point];
        let noise = sigma2_for_snr(snr_db, self.cfg.m_t);
        let mut state = self.initial_state()?;
        let mut decoder = SphereDecoder::new();
        let mut out = Vec::with_capacity(self.cfg.frames);
        for block in 0..self.cfg.frames {
            let coord = BlockCoord::new(point, chain, block)?;
            let (record, next) = self.run_block(coord, &noise, &state, &mut decoder)?;
            out.push(record);
            state = next;
        }
        Ok(out)
    }
}

/// First block index counted as steady state.
pub fn steady_state_start(frames: usize) -> usize {
    frames / 2
}

/// Runs every SNR point of `cfg` and aggregates the results.
pub fn run_experiment(cfg: &SimConfig) -> Result<ExperimentReport> {
    let sim = Simulator::new(cfg.clone())?;
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            pool.install(|| run_cells(&sim))
        }
        None => run_cells(&sim),
    }
}

fn run_cells(sim: &Simulator) -> Result<ExperimentReport> {
    let cfg = sim.config();
    let points = cfg.snr_db.len();
    let start = steady_state_start(cfg.frames);
    let mut chains_done = vec![0usize; points];
    let mut active: Vec<bool> = vec![true; points];
    let mut per_point: Vec<Vec<Vec<BlockRecord>>> = vec![Vec::new(); points];

    // Chains are added in batches of `cfg.chains`; the decision to continue
    // depends only on finished batches, never on scheduling.
    while active.iter().any(|&a| a) {
        let cells: Vec<(usize, usize)> = (0..points)
            .filter(|&p| active[p])
            .flat_map(|p| {
                let first = chains_done[p];
                let last = (first + cfg.chains).min(cfg.max_chains);
                (first..last).map(move |c| (p, c))
            })
            .collect();
        let results: Vec<Result<Vec<BlockRecord>>> = cells
            .par_iter()
            .map(|&(p, c)| sim.run_chain(p, c))
            .collect();
        for (&(p, _), chain) in cells.iter().zip(results) {
            per_point[p].push(chain?);
            chains_done[p] += 1;
        }
        for p in 0..points {
            if !active[p] {
                continue;
            }
            let errors: u64 = per_point[p]
                .iter()
                .flat_map(|chain| &chain[start..])
                .map(|r| r.bit_errors)
                .sum();
            if chains_done[p] >= cfg.max_chains || errors >= cfg.min_errors {
                active[p] = false;
            }
        }
    }

    let mut rows = Vec::new();
    let mut steady_state = Vec::with_capacity(points);
    for (p, chains) in per_point.iter().enumerate() {
        for b in 0..cfg.frames {
            let recs: Vec<&BlockRecord> = chains.iter().map(|c| &c[b]).collect();
            rows.push(aggregate_row(cfg, cfg.snr_db[p], b, &recs));
        }
        steady_state.push(summarize(cfg.snr_db[p], chains, start));
    }
    let blocks = per_point.into_iter().flatten().flatten().collect();
    Ok(ExperimentReport {
        rows,
        steady_state,
        blocks,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn aggregate_row(
    cfg: &SimConfig,
    snr_db: f64,
    block: usize,
    recs: &[&BlockRecord],
) -> MetricsRecord {
    let errors: u64 = recs.iter().map(|r| r.bit_errors).sum();
    let bits: u64 = recs.iter().map(|r| r.info_bits).sum();
    let nodes: u64 = recs.iter().map(|r| r.visited_nodes).sum();
    let uses: u64 = recs.iter().map(|r| r.channel_uses).sum();
    MetricsRecord {
        snr_db,
        ter: cfg.ter,
        mu: cfg.mu,
        n_est: cfg.n_est,
        clip_mode: cfg.clip,
        block_index: block,
        l_cl: mean(recs.iter().map(|r| r.l_cl)),
        ber_measured: errors as f64 / bits as f64,
        ber_estimated: mean(recs.iter().map(|r| r.ber_estimated)),
        avg_visited_nodes: nodes as f64 / uses as f64,
        frames: recs.len(),
    }
}

fn summarize(snr_db: f64, chains: &[Vec<BlockRecord>], start: usize) -> SteadyState {
    let recs: Vec<&BlockRecord> = chains.iter().flat_map(|c| &c[start..]).collect();
    let nodes: u64 = recs.iter().map(|r| r.visited_nodes).sum();
    let uses: u64 = recs.iter().map(|r| r.channel_uses).sum();
    let upper = recs
        .iter()
        .filter(|r| r.clamp == Some(Clamp::Upper))
        .count();
    SteadyState {
        snr_db,
        chains: chains.len(),
        blocks: recs.len(),
        bit_errors: recs.iter().map(|r| r.bit_errors).sum(),
        info_bits: recs.iter().map(|r| r.info_bits).sum(),
        avg_visited_nodes: nodes as f64 / uses as f64,
        mean_l_cl: mean(recs.iter().map(|r| r.l_cl)),
        mean_ber_estimated: mean(recs.iter().map(|r| r.ber_estimated)),
        mean_ber_estimated_full: mean(recs.iter().map(|r| r.ber_estimated_full)),
        upper_clamp_fraction: upper as f64 / recs.len() as f64,
    }
}
