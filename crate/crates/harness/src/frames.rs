//! Frame generation from an experiment's channel settings.

use metapred_core::channel::{
    add_estimation_noise, sample_frame_gaussian, sample_frame_scm, ChannelFrame, DopplerSpectrum, NoiseConfig,
    SpectrumFamily,
};
use metapred_core::rng::{derive_seed, seeded};
use rand::Rng;

use crate::config::{ChannelConfig, ChannelKind};
use crate::error::Result;

const TAG_SPECTRUM: u64 = 0x5350;
const TAG_PROCESS: u64 = 0x5052;
const TAG_NOISE: u64 = 0x4e4f;

/// Picks the frame's spectrum from its own seed stream.
pub fn draw_spectrum(channel: &ChannelConfig, seed: u64) -> Result<DopplerSpectrum> {
    let mut rng = seeded(derive_seed(seed, TAG_SPECTRUM));
    let [lo, hi] = channel.doppler_range;
    let mut doppler = || if lo == hi { lo } else { rng.random_range(lo..hi) };
    let family = match channel.kind {
        ChannelKind::Flat => return Ok(DopplerSpectrum::Flat),
        ChannelKind::Jakes => SpectrumFamily::Jakes,
        ChannelKind::Rounded => SpectrumFamily::Rounded,
        ChannelKind::DopplerMix | ChannelKind::Scm => {
            // Family bit first, then the Doppler.
            let jakes = seeded(derive_seed(seed, TAG_SPECTRUM ^ 1)).random_bool(0.5);
            if jakes {
                SpectrumFamily::Jakes
            } else {
                SpectrumFamily::Rounded
            }
        }
    };
    channel.spectrum(family, doppler())
}

/// One frame of `length` slots, with estimation noise when configured.
pub fn generate_frame(
    channel: &ChannelConfig,
    noise: Option<&NoiseConfig>,
    length: usize,
    seed: u64,
    frame_id: usize,
) -> Result<ChannelFrame> {
    let clean = match channel.kind {
        ChannelKind::Scm => sample_frame_scm(&channel.scm(), length, derive_seed(seed, TAG_PROCESS))?,
        _ => sample_frame_gaussian(&draw_spectrum(channel, seed)?, length, derive_seed(seed, TAG_PROCESS))?,
    };
    let mut frame = match noise {
        Some(n) => add_estimation_noise(&clean, n, derive_seed(seed, TAG_NOISE))?,
        None => clean,
    };
    frame.meta.seed = seed;
    Ok(frame.with_id(frame_id))
}
