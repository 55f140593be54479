//! Per-element cascaded channel gains: synthetic generators (free-space
//! geometric, sparse angular), end-to-end composition under a phase
//! configuration, and noisy pilot observations.

use num_complex::Complex;
use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::configure::PhaseConfig;
use crate::error::{Result, RisError};
use crate::scalar::Scalar;
use crate::scene::{self, Scene};
use crate::sensing::{angular_to_spatial, dft2_matrix, SensingMatrix};

/// Per-element cascaded gains ϱ in flat order, with optional direct Tx→Rx
/// (LOS) gain and optional element mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RisChannel<T> {
    /// Cascaded gain per element; masked-out entries are exactly zero.
    pub gains: Vec<Complex<T>>,
    /// Direct Tx→Rx gain, absent when the campaign excludes the LOS link.
    pub los: Option<Complex<T>>,
    pub rows: usize,
    pub cols: usize,
    pub mask: Option<Vec<bool>>,
}

impl<T: Scalar> RisChannel<T> {
    pub fn new(gains: Vec<Complex<T>>, rows: usize, cols: usize) -> Result<Self> {
        let ch = RisChannel {
            gains,
            los: None,
            rows,
            cols,
            mask: None,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn with_los(mut self, los: Complex<T>) -> Self {
        self.los = Some(los);
        self
    }

    /// Attaches a mask and zeroes the gains of inactive elements.
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.gains.len() {
            return Err(RisError::DimensionMismatch(format!(
                "mask has {} entries, channel has {}",
                mask.len(),
                self.gains.len()
            )));
        }
        if !mask.iter().any(|&a| a) {
            return Err(RisError::InvalidScene("mask disables every element".into()));
        }
        for (g, &active) in self.gains.iter_mut().zip(&mask) {
            if !active {
                *g = Complex::new(T::zero(), T::zero());
            }
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gains.len() != self.rows * self.cols {
            return Err(RisError::DimensionMismatch(format!(
                "{} gains for a {}x{} lattice",
                self.gains.len(),
                self.rows,
                self.cols
            )));
        }
        for (j, g) in self.gains.iter().enumerate() {
            if !(g.re.is_finite() && g.im.is_finite()) {
                return Err(RisError::Domain(format!("non-finite gain at element {j}")));
            }
        }
        if let Some(los) = &self.los {
            if !(los.re.is_finite() && los.im.is_finite()) {
                return Err(RisError::Domain("non-finite LOS gain".into()));
            }
        }
        if let Some(mask) = &self.mask {
            if mask.len() != self.gains.len() {
                return Err(RisError::DimensionMismatch(format!(
                    "mask has {} entries, channel has {}",
                    mask.len(),
                    self.gains.len()
                )));
            }
            for (j, (&active, g)) in mask.iter().zip(&self.gains).enumerate() {
                if !active && (g.re != T::zero() || g.im != T::zero()) {
                    return Err(RisError::Domain(format!(
                        "masked element {j} carries a nonzero gain"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn active_count(&self) -> usize {
        match &self.mask {
            Some(mask) => mask.iter().filter(|&&a| a).count(),
            None => self.num_elements(),
        }
    }

    pub fn active_indices(&self) -> Vec<usize> {
        match &self.mask {
            Some(mask) => mask
                .iter()
                .enumerate()
                .filter_map(|(j, &a)| a.then_some(j))
                .collect(),
            None => (0..self.num_elements()).collect(),
        }
    }

    /// Σ|ϱ| over all elements (masked entries contribute zero).
    pub fn amplitude_sum(&self) -> T {
        self.gains.iter().map(|g| g.norm()).sum()
    }

    /// Gains at active positions, ascending flat order.
    pub fn active_gains(&self) -> Vec<Complex<T>> {
        match &self.mask {
            Some(mask) => self
                .gains
                .iter()
                .zip(mask)
                .filter_map(|(g, &a)| a.then_some(*g))
                .collect(),
            None => self.gains.clone(),
        }
    }
}

/// AWGN level for pilot observations: either noiseless or a per-measurement
/// SNR in dB with the seed of the counter-indexed noise stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    /// `None` = noiseless.
    pub snr_db: Option<T>,
    pub seed: u64,
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn noiseless() -> Self {
        NoiseSpec {
            snr_db: None,
            seed: 0,
        }
    }

    pub fn with_snr(snr_db: T, seed: u64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(RisError::Domain(format!("snr_db must be finite, got {snr_db}")));
        }
        Ok(NoiseSpec {
            snr_db: Some(snr_db),
            seed,
        })
    }
}

/// Noisy end-to-end gains, one entry per sensing-matrix row.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub h_hat: Vec<Complex<T>>,
}

impl<T> Observation<T> {
    pub fn len(&self) -> usize {
        self.h_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_hat.is_empty()
    }
}

/// Free-space amplitude gain `(λ/(4πd))·exp(−i2πd/λ)`.
pub fn freespace_gain<T: Scalar>(d: T, wavelength: T) -> Result<Complex<T>> {
    if !d.is_finite() || d <= T::zero() {
        return Err(RisError::Domain(format!(
            "path length must be positive, got {d}"
        )));
    }
    if !wavelength.is_finite() || wavelength <= T::zero() {
        return Err(RisError::Domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let four_pi = T::real(4.0) * T::PI();
    let amplitude = wavelength / (four_pi * d);
    let phase = -T::real(2.0) * T::PI() * d / wavelength;
    Ok(Complex::new(amplitude * phase.cos(), amplitude * phase.sin()))
}

/// Free-space cascaded gains for every element of the scene; the optional
/// direct Tx→Rx gain is included on request.
pub fn synth_freespace<T: Scalar>(scene: &Scene<T>, include_los: bool) -> Result<RisChannel<T>> {
    let lambda = scene.wavelength();
    let lengths = scene::path_lengths(scene)?;
    let gains = lengths
        .iter()
        .map(|&(d_tx, d_rx)| Ok(freespace_gain(d_tx, lambda)? * freespace_gain(d_rx, lambda)?))
        .collect::<Result<Vec<_>>>()?;
    let mut channel = RisChannel::new(gains, scene.rows, scene.cols)?;
    if let Some(mask) = scene.mask.clone() {
        channel = channel.with_mask(mask)?;
    }
    if include_los {
        let d_los = scene::distance(&scene.tx_position, &scene.rx_position);
        if d_los <= T::zero() {
            return Err(RisError::SingularGeometry("tx coincides with rx".into()));
        }
        channel = channel.with_los(freespace_gain(d_los, lambda)?);
    }
    Ok(channel)
}

/// Magnitude model for the nonzero angular coefficients of
/// [`synth_sparse_angular`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeProfile {
    /// Every coefficient has magnitude exactly 1.
    #[default]
    Unit,
    /// Rayleigh-distributed magnitudes scaled to unit mean.
    Rayleigh,
}

/// Channel that is exactly S-sparse in the angular domain: S distinct bins
/// drawn uniformly (seeded), coefficients with unit-mean magnitude and
/// uniform phase, mapped to the spatial domain through the 2D DFT.
pub fn synth_sparse_angular<T: Scalar>(
    rows: usize,
    cols: usize,
    sparsity: usize,
    seed: u64,
    profile: Option<AmplitudeProfile>,
) -> Result<RisChannel<T>> {
    let n = rows * cols;
    if sparsity == 0 || sparsity > n {
        return Err(RisError::Domain(format!(
            "sparsity {sparsity} outside 1..={n}"
        )));
    }
    let u = dft2_matrix::<T>(rows, cols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins = rand::seq::index::sample(&mut rng, n, sparsity).into_vec();
    bins.sort_unstable();
    let profile = profile.unwrap_or_default();
    let mut gamma = vec![Complex::new(T::zero(), T::zero()); n];
    for &bin in &bins {
        // Draw in f64 so the stream is identical across scalar types.
        let magnitude = match profile {
            AmplitudeProfile::Unit => 1.0,
            AmplitudeProfile::Rayleigh => {
                let g1: f64 = StandardNormal.sample(&mut rng);
                let g2: f64 = StandardNormal.sample(&mut rng);
                // Unit-mean Rayleigh: E[√(g1²+g2²)·σ] = σ√(π/2).
                (g1 * g1 + g2 * g2).sqrt() / (std::f64::consts::PI / 2.0).sqrt()
            }
        };
        let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        gamma[bin] = Complex::new(
            T::real(magnitude * phase.cos()),
            T::real(magnitude * phase.sin()),
        );
    }
    let gains = angular_to_spatial(&gamma, &u)?;
    RisChannel::new(gains, rows, cols)
}

/// End-to-end gain `h = Σ ϱ_j·exp(iψ_j) + h_los` for one configuration.
pub fn end_to_end<T: Scalar>(channel: &RisChannel<T>, config: &PhaseConfig<T>) -> Result<Complex<T>> {
    if config.len() != channel.num_elements() {
        return Err(RisError::DimensionMismatch(format!(
            "config has {} phases, channel has {} elements",
            config.len(),
            channel.num_elements()
        )));
    }
    let mut h = Complex::new(T::zero(), T::zero());
    for (j, g) in channel.gains.iter().enumerate() {
        h += g * config.coefficient(j);
    }
    if let Some(los) = channel.los {
        h += los;
    }
    Ok(h)
}

/// Noise variance σ² = (Σ|ϱ|)²·10^(−snr/10)/(K·L): the SNR is referenced to
/// a cancellation-proof amplitude scale rather than the identity-config sum,
/// which can vanish by destructive interference.
pub fn noise_sigma2<T: Scalar>(channel: &RisChannel<T>, snr_db: T) -> T {
    let a = channel.amplitude_sum();
    let n = T::from_usize(channel.num_elements()).unwrap();
    a * a * T::real(10.0).powf(-snr_db / T::real(10.0)) / n
}

/// One circularly-symmetric complex Gaussian draw from the stream at
/// position `draw`; deterministic per (seed, draw).
fn noise_sample<T: Scalar>(seed: u64, draw: u64, sigma2: T) -> Complex<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    // f64 draws keep the stream identical across scalar types.
    let g_re: f64 = StandardNormal.sample(&mut rng);
    let g_im: f64 = StandardNormal.sample(&mut rng);
    let scale = (sigma2 / T::real(2.0)).sqrt();
    Complex::new(scale * T::real(g_re), scale * T::real(g_im))
}

/// Single pilot observation `ĥ = h + n` with the noise draw at stream
/// position `draw` (the per-campaign row counter).
pub fn observe<T: Scalar>(
    channel: &RisChannel<T>,
    config: &PhaseConfig<T>,
    noise: &NoiseSpec<T>,
    draw: u64,
) -> Result<Complex<T>> {
    let h = end_to_end(channel, config)?;
    match noise.snr_db {
        None => Ok(h),
        Some(snr_db) => {
            let sigma2 = noise_sigma2(channel, snr_db);
            Ok(h + noise_sample(noise.seed, draw, sigma2))
        }
    }
}

/// Runs the pilot campaign: row m of W becomes the probe configuration
/// (+1 ↦ phase 0, −1 ↦ phase π), with one indexed noise draw per row.
///
/// For masked channels W has one column per active element (ascending flat
/// order); otherwise one column per lattice element.
pub fn run_campaign<T: Scalar>(
    channel: &RisChannel<T>,
    w: &SensingMatrix,
    noise: &NoiseSpec<T>,
) -> Result<Observation<T>> {
    let active = channel.active_indices();
    if w.cols() != active.len() {
        return Err(RisError::DimensionMismatch(format!(
            "sensing matrix has {} columns, channel has {} active elements",
            w.cols(),
            active.len()
        )));
    }
    let sigma2 = noise.snr_db.map(|snr| noise_sigma2(channel, snr));
    let mut h_hat = Vec::with_capacity(w.rows());
    for m in 0..w.rows() {
        let signs = w.row(m);
        let mut h = Complex::new(T::zero(), T::zero());
        for (j, &flat) in active.iter().enumerate() {
            let g = channel.gains[flat];
            if signs[j] > 0 {
                h += g;
            } else {
                h -= g;
            }
        }
        if let Some(los) = channel.los {
            h += los;
        }
        if let Some(s2) = sigma2 {
            h += noise_sample(noise.seed, m as u64, s2);
        }
        h_hat.push(h);
    }
    Ok(Observation { h_hat })
}
