//! Multiuser hybrid precoding with limited feedback.
//!
//! A slot serves `U` users with `U` RF chains. Each user's analog beam pair
//! comes from the single-user beam search (on the full array, or on the
//! user's own subarray for the partially-connected structure). Users then
//! quantize their effective channels with per-user RVQ codebooks, and the
//! BS builds a zero-forcing baseband precoder from the feedback.

use crate::beamforming::{beam_search, BeamSelection, LinkBudget};
use crate::error::{Error, Result};
use crate::phy::{build_beam_codebook, build_rvq_codebook, ArrayGeometry, CMatrix, CVector, ChannelMatrix, Codebook};
use num_complex::Complex64;

/// Condition number above which the stacked feedback matrix is treated as
/// singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    FullyConnected,
    PartiallyConnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feedback {
    Perfect,
    Bits(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseband {
    #[default]
    ZeroForcing,
    /// `F_BB = I_U`, the no-digital-precoding ablation.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    pub structure: Structure,
    /// Users per slot; also the number of RF chains.
    pub users: usize,
    pub feedback: Feedback,
    pub baseband: Baseband,
    /// Antennas per subarray (`N_t / U` when partially connected, `N_t`
    /// otherwise).
    pub subarray_size: usize,
}

impl HybridConfig {
    pub fn new(structure: Structure, users: usize, feedback: Feedback, tx_antennas: usize) -> Result<Self> {
        if users == 0 {
            return Err(Error::Config("at least one user per slot is required".into()));
        }
        let subarray_size = match structure {
            Structure::FullyConnected => tx_antennas,
            Structure::PartiallyConnected => {
                if !tx_antennas.is_multiple_of(users) {
                    return Err(Error::Config(format!(
                        "partially-connected structure needs U | N_t (U = {users}, N_t = {tx_antennas})"
                    )));
                }
                tx_antennas / users
            }
        };
        Ok(HybridConfig {
            structure,
            users,
            feedback,
            baseband: Baseband::ZeroForcing,
            subarray_size,
        })
    }

    pub fn with_baseband(mut self, baseband: Baseband) -> Self {
        self.baseband = baseband;
        self
    }

    pub fn rf_chains(&self) -> usize {
        self.users
    }

    pub fn phase_shifters(&self, tx_antennas: usize) -> usize {
        match self.structure {
            Structure::FullyConnected => tx_antennas * self.rf_chains(),
            Structure::PartiallyConnected => tx_antennas,
        }
    }
}

/// Transmitter power consumption figures, W.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerModel {
    pub common: f64,
    pub rf_chain: f64,
    pub amplifier: f64,
    pub phase_shifter: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            common: 10.0,
            rf_chain: 0.1,
            amplifier: 0.1,
            phase_shifter: 0.01,
        }
    }
}

impl PowerModel {
    /// Total consumed power for a configuration, W.
    pub fn consumption(&self, cfg: &HybridConfig, tx_antennas: usize) -> f64 {
        self.common
            + cfg.rf_chains() as f64 * self.rf_chain
            + tx_antennas as f64 * self.amplifier
            + cfg.phase_shifters(tx_antennas) as f64 * self.phase_shifter
    }
}

/// Geometry of one contiguous block of `subarray_size` elements of `full`.
pub fn subarray_geometry(full: &ArrayGeometry, subarray_size: usize) -> Result<ArrayGeometry> {
    if subarray_size == full.len() {
        return Ok(*full);
    }
    if subarray_size > 0 && subarray_size.is_multiple_of(full.rows) {
        Ok(full.reshaped(full.rows, subarray_size / full.rows))
    } else if subarray_size > 0 && full.rows.is_multiple_of(subarray_size) {
        Ok(full.reshaped(subarray_size, 1))
    } else {
        Err(Error::Config(format!(
            "subarrays of {subarray_size} elements do not tile a {}×{} array",
            full.rows, full.cols
        )))
    }
}

/// Output of the analog stage for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogStage {
    /// `N_t × U`; block diagonal when partially connected.
    pub rf_precoder: CMatrix,
    pub combiners: Vec<CVector>,
    pub selections: Vec<BeamSelection>,
}

/// Picks each user's analog beam pair and stacks the precoders.
///
/// `precoders` is the full-array codebook for the fully-connected
/// structure and the subarray codebook otherwise. User `u` owns antenna
/// columns `[u·N_sub, (u+1)·N_sub)`.
pub fn analog_stage(
    channels: &[ChannelMatrix],
    precoders: &Codebook,
    combiners: &Codebook,
    cfg: &HybridConfig,
) -> Result<AnalogStage> {
    if channels.len() != cfg.users {
        return Err(Error::Dimension {
            context: "channels per slot",
            expected: cfg.users,
            actual: channels.len(),
        });
    }
    let n_t = channels[0].tx_antennas();
    if channels.iter().any(|h| h.tx_antennas() != n_t || h.rx_antennas() != channels[0].rx_antennas()) {
        return Err(Error::Config("channels in a slot must share dimensions".into()));
    }
    let mut rf_precoder = CMatrix::zeros(n_t, cfg.users);
    let mut combiner_vectors = Vec::with_capacity(cfg.users);
    let mut selections = Vec::with_capacity(cfg.users);
    for (u, h) in channels.iter().enumerate() {
        let (offset, sub) = match cfg.structure {
            Structure::FullyConnected => (0, h.clone()),
            Structure::PartiallyConnected => {
                if cfg.subarray_size * cfg.users != n_t {
                    return Err(Error::Dimension {
                        context: "subarrays times users",
                        expected: n_t,
                        actual: cfg.subarray_size * cfg.users,
                    });
                }
                (u * cfg.subarray_size, h.columns(u * cfg.subarray_size, cfg.subarray_size))
            }
        };
        let sel = beam_search(&sub, precoders, combiners)?;
        let f = precoders.codewords.column(sel.precoder_index);
        rf_precoder.view_mut((offset, u), (f.len(), 1)).copy_from(&f);
        combiner_vectors.push(combiners.codeword(sel.combiner_index));
        selections.push(sel);
    }
    Ok(AnalogStage {
        rf_precoder,
        combiners: combiner_vectors,
        selections,
    })
}

/// Effective channels `h_u` with `h_uᴴ = w_uᴴ H_u F_RF`, one per user.
pub fn effective_channels(channels: &[ChannelMatrix], stage: &AnalogStage) -> Vec<CVector> {
    channels
        .iter()
        .zip(&stage.combiners)
        .map(|(h, w)| {
            let row = w.adjoint() * &h.entries * &stage.rf_precoder;
            row.adjoint().column(0).into_owned()
        })
        .collect()
}

/// Index of the codeword maximising |h_uᴴ c|; ties go to the lowest index.
pub fn quantize_effective(h_u: &CVector, codebook: &Codebook) -> Result<(usize, CVector)> {
    if codebook.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    if codebook.dimension() != h_u.len() {
        return Err(Error::Dimension {
            context: "RVQ codebook vs effective channel",
            expected: h_u.len(),
            actual: codebook.dimension(),
        });
    }
    let mut best = (0usize, -1.0f64);
    for (i, c) in codebook.codewords.column_iter().enumerate() {
        let metric = h_u.dotc(&c).norm_sqr();
        if metric > best.1 {
            best = (i, metric);
        }
    }
    Ok((best.0, codebook.codeword(best.0)))
}

/// Stacks feedback into `Ĥ = [ĥ_1, …, ĥ_U]ᴴ`.
fn stack_feedback(feedback: &[CVector]) -> CMatrix {
    let u = feedback.len();
    CMatrix::from_fn(u, u, |r, c| feedback[r][c].conj())
}

/// `Ĥᴴ(ĤĤᴴ)⁻¹` before normalisation.
pub fn zf_unnormalized(feedback: &[CVector]) -> Result<CMatrix> {
    let h = stack_feedback(feedback);
    if h.nrows() == 0 || h.ncols() != h.nrows() {
        return Err(Error::Dimension {
            context: "stacked feedback must be U×U",
            expected: h.nrows(),
            actual: h.ncols(),
        });
    }
    let sv = h.clone().singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let gram = &h * h.adjoint();
    let inv = gram.try_inverse().ok_or(Error::Singular { condition })?;
    Ok(h.adjoint() * inv)
}

/// Scales each baseband column so that ‖F_RF f_u‖ = 1.
pub fn normalize_baseband(baseband: &CMatrix, rf_precoder: &CMatrix) -> CMatrix {
    let mut out = baseband.clone();
    for u in 0..out.ncols() {
        let norm = (rf_precoder * out.column(u)).norm();
        if norm > 0.0 {
            let scaled = out.column(u) / Complex64::from(norm);
            out.set_column(u, &scaled);
        }
    }
    out
}

/// Normalised zero-forcing baseband precoder.
pub fn zf_precoder(feedback: &[CVector], rf_precoder: &CMatrix) -> Result<CMatrix> {
    Ok(normalize_baseband(&zf_unnormalized(feedback)?, rf_precoder))
}

/// Normalised `I_U`.
pub fn identity_baseband(users: usize, rf_precoder: &CMatrix) -> CMatrix {
    normalize_baseband(&CMatrix::identity(users, users), rf_precoder)
}

/// Signal and interference powers per user, before scaling by P/U.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTerms {
    pub signal: f64,
    pub interference: f64,
}

pub fn link_terms(
    channels: &[ChannelMatrix],
    combiners: &[CVector],
    rf_precoder: &CMatrix,
    baseband: &CMatrix,
) -> Vec<LinkTerms> {
    let precoder = rf_precoder * baseband;
    channels
        .iter()
        .zip(combiners)
        .enumerate()
        .map(|(u, (h, w))| {
            let row = w.adjoint() * &h.entries * &precoder;
            let mut terms = LinkTerms { signal: 0.0, interference: 0.0 };
            for (n, z) in row.iter().enumerate() {
                if n == u {
                    terms.signal = z.norm_sqr();
                } else {
                    terms.interference += z.norm_sqr();
                }
            }
            terms
        })
        .collect()
}

/// Per-user rates in bit/s, each stream transmitted with power P/U.
pub fn mu_rate(
    channels: &[ChannelMatrix],
    combiners: &[CVector],
    rf_precoder: &CMatrix,
    baseband: &CMatrix,
    budget: &LinkBudget,
    users: usize,
) -> Vec<f64> {
    let p = budget.tx_power_w() / users as f64;
    let noise = budget.noise_power_w();
    link_terms(channels, combiners, rf_precoder, baseband)
        .into_iter()
        .map(|t| budget.bandwidth_hz * (1.0 + p * t.signal / (p * t.interference + noise)).log2())
        .collect()
}

/// Bits per joule.
pub fn energy_efficiency(rate: f64, cfg: &HybridConfig, power: &PowerModel, tx_antennas: usize) -> f64 {
    rate / power.consumption(cfg, tx_antennas)
}

/// Codebooks shared by every slot of a run.
#[derive(Debug, Clone)]
pub struct HybridCodebooks {
    pub precoders: Codebook,
    pub combiners: Codebook,
    /// One feedback codebook per slot position; empty with perfect CSIT.
    pub feedback: Vec<Codebook>,
}

impl HybridCodebooks {
    pub fn build(
        cfg: &HybridConfig,
        tx_geom: &ArrayGeometry,
        rx_geom: &ArrayGeometry,
        oversampling: usize,
        seed: u64,
        max_bits: u32,
    ) -> Result<Self> {
        let sub = subarray_geometry(tx_geom, cfg.subarray_size)?;
        let feedback = match cfg.feedback {
            Feedback::Perfect => Vec::new(),
            Feedback::Bits(bits) => (0..cfg.users)
                .map(|u| build_rvq_codebook(cfg.users, bits, feedback_seed(seed, u), max_bits))
                .collect::<Result<_>>()?,
        };
        Ok(HybridCodebooks {
            precoders: build_beam_codebook(&sub, oversampling)?,
            combiners: build_beam_codebook(rx_geom, oversampling)?,
            feedback,
        })
    }
}

fn feedback_seed(seed: u64, position: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(position as u64 + 1)
}

/// Result of one scheduling slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub rates: Vec<f64>,
    pub energy_efficiency: Vec<f64>,
    pub terms: Vec<LinkTerms>,
    /// Slot dropped because the stacked feedback was singular; rates are 0.
    pub singular: bool,
}

/// Runs the full hybrid chain for the users in `channels`.
pub fn evaluate_slot(
    channels: &[ChannelMatrix],
    books: &HybridCodebooks,
    cfg: &HybridConfig,
    budget: &LinkBudget,
    power: &PowerModel,
) -> Result<SlotOutcome> {
    let stage = analog_stage(channels, &books.precoders, &books.combiners, cfg)?;
    let effective = effective_channels(channels, &stage);
    let feedback: Vec<CVector> = match cfg.feedback {
        Feedback::Perfect => effective.clone(),
        Feedback::Bits(_) => effective
            .iter()
            .zip(&books.feedback)
            .map(|(h, cb)| quantize_effective(h, cb).map(|(_, c)| c))
            .collect::<Result<_>>()?,
    };
    let baseband = match cfg.baseband {
        Baseband::Identity => identity_baseband(cfg.users, &stage.rf_precoder),
        Baseband::ZeroForcing => match zf_precoder(&feedback, &stage.rf_precoder) {
            Ok(b) => b,
            Err(Error::Singular { condition }) => {
                log::debug!("dropping slot with singular feedback (condition {condition:e})");
                let zeros = vec![0.0; cfg.users];
                return Ok(SlotOutcome {
                    rates: zeros.clone(),
                    energy_efficiency: zeros,
                    terms: vec![LinkTerms { signal: 0.0, interference: 0.0 }; cfg.users],
                    singular: true,
                });
            }
            Err(e) => return Err(e),
        },
    };
    let n_t = stage.rf_precoder.nrows();
    let terms = link_terms(channels, &stage.combiners, &stage.rf_precoder, &baseband);
    let rates = mu_rate(channels, &stage.combiners, &stage.rf_precoder, &baseband, budget, cfg.users);
    let energy_efficiency = rates.iter().map(|&r| energy_efficiency(r, cfg, power, n_t)).collect();
    Ok(SlotOutcome {
        rates,
        energy_efficiency,
        terms,
        singular: false,
    })
}
