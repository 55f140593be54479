//! Phase configurations: conjugate phases, 1-bit quantization, the
//! per-element greedy optimizer, and an exhaustive oracle for tiny lattices.

use num_complex::Complex;

use crate::error::{Result, RisError};
use crate::scalar::Scalar;
use crate::scene::wrap_two_pi;

/// Per-element phase shifts ψ in flat order, radians in `[0, 2π)`.
///
/// Quantized configs hold exactly 0 or π per entry and map to reflection
/// coefficients {+1, −1} without trigonometric round-off.  Masked elements
/// carry phase 0 and are flagged inactive.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig<T> {
    psi: Vec<T>,
    quantized: bool,
    mask: Option<Vec<bool>>,
}

impl<T: Scalar> PhaseConfig<T> {
    /// All-zero quantized config (the mirror-like baseline).
    pub fn zero(n: usize) -> Self {
        PhaseConfig {
            psi: vec![T::zero(); n],
            quantized: true,
            mask: None,
        }
    }

    /// Continuous config from raw phases; entries are wrapped into `[0, 2π)`.
    pub fn from_phases(phases: Vec<T>) -> Result<Self> {
        for (j, p) in phases.iter().enumerate() {
            if !p.is_finite() {
                return Err(RisError::Domain(format!(
                    "non-finite phase at element {j}"
                )));
            }
        }
        Ok(PhaseConfig {
            psi: phases.into_iter().map(wrap_two_pi).collect(),
            quantized: false,
            mask: None,
        })
    }

    /// Quantized config from per-element π-flags (`true` = phase π).
    pub fn from_flips(flips: &[bool]) -> Self {
        PhaseConfig {
            psi: flips
                .iter()
                .map(|&f| if f { T::PI() } else { T::zero() })
                .collect(),
            quantized: true,
            mask: None,
        }
    }

    /// Attaches a mask; masked elements are reset to phase 0.
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.psi.len() {
            return Err(RisError::DimensionMismatch(format!(
                "mask has {} entries, config has {}",
                mask.len(),
                self.psi.len()
            )));
        }
        for (p, &active) in self.psi.iter_mut().zip(&mask) {
            if !active {
                *p = T::zero();
            }
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn is_quantized(&self) -> bool {
        self.quantized
    }

    pub fn phases(&self) -> &[T] {
        &self.psi
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[j])
    }

    /// Reflection coefficient `exp(iψ_j)`; exact ±1 for quantized entries.
    pub fn coefficient(&self, j: usize) -> Complex<T> {
        let p = self.psi[j];
        if self.quantized {
            if p == T::zero() {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(-T::one(), T::zero())
            }
        } else {
            Complex::new(p.cos(), p.sin())
        }
    }

    /// Sets element `j` to phase π (`true`) or 0; quantized configs only.
    fn set_flip(&mut self, j: usize, flip: bool) {
        debug_assert!(self.quantized);
        self.psi[j] = if flip { T::PI() } else { T::zero() };
    }
}

/// Continuous conjugate configuration `ψ_j = −∠ϱ_j`, wrapped into `[0, 2π)`;
/// zero gains map to phase 0.
pub fn conjugate_phase<T: Scalar>(rho_hat: &[Complex<T>]) -> PhaseConfig<T> {
    let psi = rho_hat
        .iter()
        .map(|g| {
            if g.re == T::zero() && g.im == T::zero() {
                T::zero()
            } else {
                wrap_two_pi(-g.arg())
            }
        })
        .collect();
    PhaseConfig {
        psi,
        quantized: false,
        mask: None,
    }
}

/// 1-bit quantization: π where `π/2 ≤ ψ ≤ 3π/2` (bounds inclusive), else 0.
pub fn quantize_binary<T: Scalar>(config: &PhaseConfig<T>) -> PhaseConfig<T> {
    let half_pi = T::PI() / T::real(2.0);
    let three_half_pi = T::real(3.0) * half_pi;
    let psi = config
        .psi
        .iter()
        .map(|&p| {
            if p >= half_pi && p <= three_half_pi {
                T::PI()
            } else {
                T::zero()
            }
        })
        .collect();
    PhaseConfig {
        psi,
        quantized: true,
        mask: config.mask.clone(),
    }
}

/// Reflection coefficients `Φ̄_j = exp(iψ_j)`; exactly ±1 for quantized
/// configs.
pub fn config_to_coefficients<T: Scalar>(config: &PhaseConfig<T>) -> Vec<Complex<T>> {
    (0..config.len()).map(|j| config.coefficient(j)).collect()
}

/// Options for [`iterative_optimize_with`].
#[derive(Debug, Clone, Copy)]
pub struct IterativeOptions {
    /// Probe both states of every element instead of reusing the running
    /// best as the baseline (doubles the probe count).
    pub two_probe: bool,
    /// Number of full sweeps over the elements.
    pub passes: usize,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            two_probe: false,
            passes: 1,
        }
    }
}

/// Single-pass greedy optimizer with the reused-baseline probe policy: one
/// initial probe of the all-zero config, then one probe per element.
pub fn iterative_optimize<T, F>(
    power_probe: F,
    rows: usize,
    cols: usize,
    mask: Option<&[bool]>,
) -> Result<(PhaseConfig<T>, Vec<T>)>
where
    T: Scalar,
    F: FnMut(&PhaseConfig<T>) -> Result<T>,
{
    iterative_optimize_with(power_probe, rows, cols, mask, IterativeOptions::default())
}

/// Greedy per-element binary phase search.
///
/// Starts from the all-zero quantized config and visits active elements in
/// flat order.  For each element the candidate states {0, π} are compared by
/// probed received power; the better state is kept (ties prefer 0).  Returns
/// the final config and the best-so-far power after each visit; the trace is
/// non-decreasing when the probe is deterministic.
pub fn iterative_optimize_with<T, F>(
    mut power_probe: F,
    rows: usize,
    cols: usize,
    mask: Option<&[bool]>,
    options: IterativeOptions,
) -> Result<(PhaseConfig<T>, Vec<T>)>
where
    T: Scalar,
    F: FnMut(&PhaseConfig<T>) -> Result<T>,
{
    let n = rows * cols;
    if n == 0 {
        return Err(RisError::Domain("lattice must be at least 1x1".into()));
    }
    if options.passes == 0 {
        return Err(RisError::Domain("passes must be at least 1".into()));
    }
    let mut config = PhaseConfig::zero(n);
    if let Some(m) = mask {
        config = config.with_mask(m.to_vec())?;
    }
    let active: Vec<usize> = match mask {
        Some(m) => {
            if m.len() != n {
                return Err(RisError::DimensionMismatch(format!(
                    "mask has {} entries, lattice has {n}",
                    m.len()
                )));
            }
            m.iter()
                .enumerate()
                .filter_map(|(j, &a)| a.then_some(j))
                .collect()
        }
        None => (0..n).collect(),
    };
    if active.is_empty() {
        return Err(RisError::InvalidScene("mask disables every element".into()));
    }

    let mut probe = |config: &PhaseConfig<T>, element: usize| {
        power_probe(config).map_err(|source| RisError::Probe {
            element,
            source: Box::new(source),
        })
    };

    let mut best = if options.two_probe {
        T::zero() // never read before the first element's own two probes
    } else {
        probe(&config, active[0])?
    };
    let mut trace = Vec::with_capacity(active.len() * options.passes);
    for _pass in 0..options.passes {
        for &j in &active {
            let current_flip = config.phases()[j] != T::zero();
            if options.two_probe {
                config.set_flip(j, false);
                let p_zero = probe(&config, j)?;
                config.set_flip(j, true);
                let p_pi = probe(&config, j)?;
                if p_pi > p_zero {
                    best = p_pi;
                } else {
                    config.set_flip(j, false);
                    best = p_zero;
                }
            } else {
                config.set_flip(j, !current_flip);
                let p_flip = probe(&config, j)?;
                // Ties prefer phase 0, so a tied flip to 0 is accepted while
                // a tied flip to π is rolled back.
                let accept = if current_flip {
                    p_flip >= best
                } else {
                    p_flip > best
                };
                if accept {
                    best = p_flip;
                } else {
                    config.set_flip(j, current_flip);
                }
            }
            trace.push(best);
        }
    }
    Ok((config, trace))
}

/// Exhaustively enumerates all binary configurations of the active elements
/// and returns the power-maximizing one (ties break to the lexicographically
/// smallest config, element 0 most significant).
pub fn exhaustive_oracle<T: Scalar>(
    channel: &crate::channel::RisChannel<T>,
) -> Result<(PhaseConfig<T>, T)> {
    let active = channel.active_indices();
    let a = active.len();
    if a > 16 {
        return Err(RisError::Capacity(format!(
            "exhaustive search over {a} elements exceeds the 16-element limit"
        )));
    }
    let los = channel
        .los
        .unwrap_or_else(|| Complex::new(T::zero(), T::zero()));
    let mut best_power = T::neg_infinity();
    let mut best_counter = 0u64;
    for counter in 0u64..(1u64 << a) {
        let mut h = los;
        for (bit, &flat) in active.iter().enumerate() {
            // Element order maps to counter bits most-significant-first so
            // ascending counters enumerate configs in lexicographic order.
            let flip = (counter >> (a - 1 - bit)) & 1 == 1;
            let g = channel.gains[flat];
            if flip {
                h -= g;
            } else {
                h += g;
            }
        }
        let power = h.norm_sqr();
        if power > best_power {
            best_power = power;
            best_counter = counter;
        }
    }
    let mut flips = vec![false; channel.num_elements()];
    for (bit, &flat) in active.iter().enumerate() {
        flips[flat] = (best_counter >> (a - 1 - bit)) & 1 == 1;
    }
    let mut config = PhaseConfig::from_flips(&flips);
    if let Some(mask) = channel.mask.clone() {
        config = config.with_mask(mask)?;
    }
    Ok((config, best_power))
}
