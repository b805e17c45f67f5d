//! Single-user analog stage: exhaustive beam search over precoder and
//! combiner codebooks, and the resulting link rate.

use crate::error::{Error, Result};
use crate::phy::{ChannelMatrix, CMatrix, Codebook};
use crate::units::{dbm_to_watts, NOISE_FLOOR_DBM_PER_HZ};

/// Thermal noise power over `bandwidth_hz`, in dBm.
pub fn noise_power(bandwidth_hz: f64) -> f64 {
    NOISE_FLOOR_DBM_PER_HZ + 10.0 * bandwidth_hz.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
}

impl LinkBudget {
    pub fn new(tx_power_dbm: f64, bandwidth_hz: f64) -> Self {
        LinkBudget { tx_power_dbm, bandwidth_hz }
    }

    pub fn noise_power_dbm(&self) -> f64 {
        noise_power(self.bandwidth_hz)
    }

    pub fn tx_power_w(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm)
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm())
    }

    /// `B·log2(1 + P·gain²/σ²)` in bit/s.
    pub fn rate(&self, gain: f64) -> f64 {
        self.bandwidth_hz * (1.0 + self.tx_power_w() * gain * gain / self.noise_power_w()).log2()
    }
}

/// Winning beam pair of an exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSelection {
    pub precoder_index: usize,
    pub combiner_index: usize,
    /// |wᴴ H f|.
    pub effective_gain: f64,
}

/// Returns `H·F`, one column per precoder.
pub(crate) fn project_precoders(h: &CMatrix, precoders: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(h.nrows(), precoders.ncols());
    for (c, f) in precoders.column_iter().enumerate() {
        let mut col = out.column_mut(c);
        for (j, fj) in f.iter().enumerate() {
            if fj.re == 0.0 && fj.im == 0.0 {
                continue;
            }
            for i in 0..h.nrows() {
                col[i] += h[(i, j)] * fj;
            }
        }
    }
    out
}

/// Exhaustive search maximising |wᴴ H f| over all codeword pairs. Ties go to
/// the lowest `(combiner_index, precoder_index)`.
pub fn beam_search(h: &ChannelMatrix, precoders: &Codebook, combiners: &Codebook) -> Result<BeamSelection> {
    if precoders.is_empty() || combiners.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    if precoders.dimension() != h.tx_antennas() {
        return Err(Error::Dimension {
            context: "precoder codebook vs channel columns",
            expected: h.tx_antennas(),
            actual: precoders.dimension(),
        });
    }
    if combiners.dimension() != h.rx_antennas() {
        return Err(Error::Dimension {
            context: "combiner codebook vs channel rows",
            expected: h.rx_antennas(),
            actual: combiners.dimension(),
        });
    }
    let hf = project_precoders(&h.entries, &precoders.codewords);
    let mut best = (0usize, 0usize, -1.0f64);
    for (wi, w) in combiners.codewords.column_iter().enumerate() {
        for (fi, y) in hf.column_iter().enumerate() {
            let metric = w.dotc(&y).norm_sqr();
            if metric > best.2 {
                best = (wi, fi, metric);
            }
        }
    }
    Ok(BeamSelection {
        combiner_index: best.0,
        precoder_index: best.1,
        effective_gain: best.2.sqrt(),
    })
}

/// Achievable single-user rate for a selected beam pair, bit/s.
pub fn su_rate(_h: &ChannelMatrix, selection: &BeamSelection, budget: &LinkBudget) -> f64 {
    budget.rate(selection.effective_gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::{build_beam_codebook, steering_vector, ArrayGeometry};
    use num_complex::Complex64;

    #[test]
    fn noise_floor_values() {
        assert_eq!(noise_power(1.0), -173.8);
        assert!((noise_power(850e6) - -84.506).abs() < 0.01);
        assert!((noise_power(1.6e9) - -81.759).abs() < 0.01);
    }

    fn books() -> (ArrayGeometry, ArrayGeometry, Codebook, Codebook) {
        let tg = ArrayGeometry::half_wavelength(4, 4, 28e9);
        let rg = ArrayGeometry::half_wavelength(2, 2, 28e9);
        let f = build_beam_codebook(&tg, 1).unwrap();
        let w = build_beam_codebook(&rg, 1).unwrap();
        (tg, rg, f, w)
    }

    #[test]
    fn zero_channel_ties_to_first_pair() {
        let (_, _, f, w) = books();
        let sel = beam_search(&ChannelMatrix::zeros(4, 16), &f, &w).unwrap();
        assert_eq!((sel.combiner_index, sel.precoder_index, sel.effective_gain), (0, 0, 0.0));
    }

    #[test]
    fn matched_rank_one_channel() {
        let (_, _, f, w) = books();
        let (wi, fi) = (1, 9);
        let h = ChannelMatrix {
            entries: w.codeword(wi) * f.codeword(fi).adjoint(),
            tx_index: 0,
            rx_index: 0,
        };
        let sel = beam_search(&h, &f, &w).unwrap();
        assert!((sel.effective_gain - 1.0).abs() < 1e-12);
        // The regular 2×2 book has a duplicated beam; the lowest index wins.
        let wi_first = (0..w.len()).find(|&i| w.codeword(i) == w.codeword(wi)).unwrap();
        assert_eq!((sel.combiner_index, sel.precoder_index), (wi_first, fi));
    }

    #[test]
    fn empty_and_mismatched_books_error() {
        let (_, _, f, w) = books();
        let empty = Codebook { codewords: CMatrix::zeros(16, 0), kind: f.kind.clone() };
        assert!(matches!(beam_search(&ChannelMatrix::zeros(4, 16), &empty, &w), Err(Error::EmptyCodebook)));
        assert!(matches!(
            beam_search(&ChannelMatrix::zeros(4, 8), &f, &w),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn selection_gain_matches_recomputed_metric() {
        let (tg, rg, f, w) = books();
        let h = ChannelMatrix {
            entries: steering_vector(&rg, 0.3, 1.2) * steering_vector(&tg, -0.7, 1.8).adjoint()
                * Complex64::new(0.3, -0.2)
                + steering_vector(&rg, -1.1, 1.5) * steering_vector(&tg, 0.2, 1.4).adjoint() * Complex64::new(0.1, 0.0),
            tx_index: 0,
            rx_index: 0,
        };
        let sel = beam_search(&h, &f, &w).unwrap();
        let recomputed = (w.codeword(sel.combiner_index).adjoint() * &h.entries * f.codeword(sel.precoder_index))
            [(0, 0)]
            .norm();
        assert!((recomputed - sel.effective_gain).abs() < 1e-12);
        for wi in 0..w.len() {
            for fi in 0..f.len() {
                let m = (w.codeword(wi).adjoint() * &h.entries * f.codeword(fi))[(0, 0)].norm();
                assert!(m <= sel.effective_gain + 1e-12);
            }
        }
    }

    #[test]
    fn rate_examples() {
        let budget = LinkBudget::new(0.0, 850e6);
        let zero = BeamSelection { precoder_index: 0, combiner_index: 0, effective_gain: 0.0 };
        let h = ChannelMatrix::zeros(1, 1);
        assert_eq!(su_rate(&h, &zero, &budget), 0.0);
        let unit = BeamSelection { effective_gain: 1.0, ..zero };
        // 850e6 · log2(1 + 10^(84.506/10)) evaluated by hand ≈ 2.3861e10.
        let r = su_rate(&h, &unit, &budget);
        assert!((r / 2.3861e10 - 1.0).abs() < 0.005, "{r}");
    }

    #[test]
    fn doubling_power_adds_one_bit_per_hz() {
        let h = ChannelMatrix::zeros(1, 1);
        let sel = BeamSelection { precoder_index: 0, combiner_index: 0, effective_gain: 1e-3 };
        let low = su_rate(&h, &sel, &LinkBudget::new(20.0, 850e6));
        let high = su_rate(&h, &sel, &LinkBudget::new(20.0 + 10.0 * 2f64.log10(), 850e6));
        assert!(((high - low) / 850e6 - 1.0).abs() < 1e-3);
    }

    proptest::proptest! {
        #[test]
        fn rate_is_monotone(g1 in 0.0f64..1.0, dg in 1e-6f64..1.0, p in -20.0f64..40.0) {
            let budget = LinkBudget::new(p, 850e6);
            proptest::prop_assert!(budget.rate(g1 + dg) > budget.rate(g1));
            if g1 > 1e-6 {
                proptest::prop_assert!(LinkBudget::new(p + 1.0, 850e6).rate(g1) > budget.rate(g1));
            }
        }
    }
}
