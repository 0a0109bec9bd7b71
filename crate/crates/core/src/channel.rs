//! Channel gains and downlink rates for the three layers.
//!
//! Gains for one slice class are kept in a single `(K, C, N)` array whose
//! component axis lists the vBSs, then the vUAVs, then the vLEO.

use ndarray::{Array2, Array3, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Result, SimError};
use crate::slices::SliceAllocation;
use crate::topology::config::SPEED_OF_LIGHT;
use crate::topology::{ScenarioConfig, TopologyState};

/// Which layer a component index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    Vbs,
    Uav,
    Leo,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Vbs, Layer::Uav, Layer::Leo];

    pub fn index(self) -> usize {
        match self {
            Layer::Vbs => 0,
            Layer::Uav => 1,
            Layer::Leo => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Vbs => "vBS",
            Layer::Uav => "vUAV",
            Layer::Leo => "vLEO",
        }
    }
}

/// Component-axis bookkeeping for `M` vBSs and `V` vUAVs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Components {
    pub vbs: usize,
    pub uav: usize,
}

impl Components {
    pub fn of(config: &ScenarioConfig) -> Self {
        Self { vbs: config.num_vbs(), uav: config.num_uavs }
    }

    pub fn count(self) -> usize {
        self.vbs + self.uav + 1
    }

    pub fn leo(self) -> usize {
        self.vbs + self.uav
    }

    pub fn layer(self, c: usize) -> Layer {
        if c < self.vbs {
            Layer::Vbs
        } else if c < self.vbs + self.uav {
            Layer::Uav
        } else {
            Layer::Leo
        }
    }

    /// Component indices sharing a layer with `c` (including `c`).
    pub fn peers(self, c: usize) -> std::ops::Range<usize> {
        match self.layer(c) {
            Layer::Vbs => 0..self.vbs,
            Layer::Uav => self.vbs..self.vbs + self.uav,
            Layer::Leo => self.leo()..self.leo() + 1,
        }
    }

    pub fn budget_w(self, c: usize, config: &ScenarioConfig) -> f64 {
        match self.layer(c) {
            Layer::Vbs => config.vbs_power_w(),
            Layer::Uav => config.uav_power_w(),
            Layer::Leo => config.leo_power_w(),
        }
    }
}

/// Source of small-scale fading draws; tests substitute fixed values.
pub trait Fading {
    /// Rayleigh power fading, exponential with unit mean.
    fn rayleigh(&mut self) -> f64;
    /// Circular complex normal NLoS term with unit variance, as (re, im).
    fn scatter(&mut self) -> (f64, f64);
}

pub struct RandomFading<'a, R: Rng>(pub &'a mut R);

impl<R: Rng> Fading for RandomFading<'_, R> {
    fn rayleigh(&mut self) -> f64 {
        Exp1.sample(self.0)
    }

    fn scatter(&mut self) -> (f64, f64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re: f64 = StandardNormal.sample(self.0);
        let im: f64 = StandardNormal.sample(self.0);
        (re * s, im * s)
    }
}

/// Deterministic fading for tests and worked examples.
#[derive(Debug, Clone, Copy)]
pub struct FixedFading {
    pub rayleigh: f64,
    pub scatter: (f64, f64),
}

impl Fading for FixedFading {
    fn rayleigh(&mut self) -> f64 {
        self.rayleigh
    }

    fn scatter(&mut self) -> (f64, f64) {
        self.scatter
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(SimError::Domain(d))
    }
}

/// Ground link: `h * d^-alpha` with Rayleigh power fading `h`.
pub fn terrestrial_gain(d: f64, config: &ScenarioConfig, fading: &mut impl Fading) -> Result<f64> {
    check_distance(d)?;
    Ok(fading.rayleigh() * d.powf(-config.path_loss_exponent))
}

/// Air link: `h0 * d^-alpha * |R/(R+1) + h~/(R+1)|`, LoS phase fixed at zero.
/// The magnitude of the Rician combination is used so the gain is a
/// non-negative real.
pub fn uav_gain(d: f64, config: &ScenarioConfig, fading: &mut impl Fading) -> Result<f64> {
    check_distance(d)?;
    let r = config.rician_factor;
    let (re, im) = fading.scatter();
    let los = r / (r + 1.0);
    let nlos = 1.0 / (r + 1.0);
    let magnitude = (los + nlos * re).hypot(nlos * im);
    Ok(config.uav_ref_gain() * d.powf(-config.path_loss_exponent) * magnitude)
}

/// Satellite link: free-space factor `(c / 4 pi fc)^2 * d^-alpha`.
pub fn leo_gain(d: f64, config: &ScenarioConfig) -> Result<f64> {
    check_distance(d)?;
    let k = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * config.carrier_hz);
    Ok(k * k * d.powf(-config.path_loss_exponent))
}

/// Shannon rate of one subchannel: `(B/N) log2(1 + p g / (I + (B/N) N0))`.
pub fn subchannel_rate(p: f64, g: f64, interference: f64, config: &ScenarioConfig) -> f64 {
    config.subchannel_bandwidth() * (1.0 + link_sinr(p, g, interference, config)).log2()
}

pub fn link_sinr(p: f64, g: f64, interference: f64, config: &ScenarioConfig) -> f64 {
    p * g / (interference + config.subchannel_noise_w())
}

/// Gains of every (user, component, subchannel) triple for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub classes: [Array3<f64>; 3],
    pub t: usize,
}

/// Users closer than this to a component are treated as sitting at this range
/// so the path loss stays finite.
pub const MIN_LINK_DISTANCE_M: f64 = 1.0;

impl ChannelRealization {
    /// Draw fresh fading for every link. The number of draws depends only on
    /// the user and component counts, never on the allocation.
    pub fn sample(
        state: &TopologyState,
        config: &ScenarioConfig,
        fading: &mut impl Fading,
    ) -> Result<Self> {
        let comps = Components::of(config);
        let n = config.subchannels;
        let mut classes: [Array3<f64>; 3] = Default::default();
        for (s, out) in classes.iter_mut().enumerate() {
            let k_s = state.num_users(s);
            let mut g = Array3::zeros((k_s, comps.count(), n));
            for k in 0..k_s {
                let d = state.distances(s, k)?;
                for (m, &dm) in d.vbs.iter().enumerate() {
                    for j in 0..n {
                        g[[k, m, j]] = terrestrial_gain(dm.max(MIN_LINK_DISTANCE_M), config, fading)?;
                    }
                }
                for (v, &dv) in d.uav.iter().enumerate() {
                    for j in 0..n {
                        g[[k, comps.vbs + v, j]] =
                            uav_gain(dv.max(MIN_LINK_DISTANCE_M), config, fading)?;
                    }
                }
                let gl = leo_gain(d.leo, config)?;
                for j in 0..n {
                    g[[k, comps.leo(), j]] = gl;
                }
            }
            *out = g;
        }
        Ok(Self { classes, t: state.t })
    }

    pub fn vbs_gain(&self, s: usize, k: usize, m: usize, n: usize) -> f64 {
        self.classes[s][[k, m, n]]
    }

    pub fn leo_gain(&self, s: usize, k: usize, comps: Components, n: usize) -> f64 {
        self.classes[s][[k, comps.leo(), n]]
    }
}

/// Transmitted power per (component, subchannel) for one class:
/// `sum_k phi xi p`.
pub fn transmit_power(alloc: &SliceAllocation) -> Array2<f64> {
    let (k_s, c_n) = alloc.phi.dim();
    let n = alloc.xi.ncols();
    let mut tx = Array2::zeros((c_n, n));
    for k in 0..k_s {
        for c in 0..c_n {
            let phi = alloc.phi[[k, c]];
            if phi == 0.0 {
                continue;
            }
            for j in 0..n {
                tx[[c, j]] += phi * alloc.xi[[k, j]] * alloc.power[[k, c, j]];
            }
        }
    }
    tx
}

/// Co-layer interference seen by user `k` served by component `c` on
/// subchannel `n`: transmissions of the other cells of the same layer on the
/// same subchannel. The satellite layer has a single cell and sees none.
pub fn interference(
    k: usize,
    c: usize,
    n: usize,
    tx: ArrayView2<f64>,
    gains: &Array3<f64>,
    comps: Components,
) -> f64 {
    if comps.layer(c) == Layer::Leo {
        return 0.0;
    }
    comps
        .peers(c)
        .filter(|&j| j != c)
        .map(|j| tx[[j, n]] * gains[[k, j, n]])
        .sum()
}

/// Rate and SINR of every user of one class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkStats {
    pub rate_bps: f64,
    pub sinr: f64,
    /// LEO share of the rate before the satellite cap.
    pub leo_rate_bps: f64,
}

/// Per-user aggregate rate and SINR for class allocation `alloc`: the
/// `phi xi`-weighted sum over all components and subchannels, with the
/// per-user satellite total clamped to the satellite capacity.
pub fn class_link_stats(
    alloc: &SliceAllocation,
    gains: &Array3<f64>,
    config: &ScenarioConfig,
) -> Vec<LinkStats> {
    let comps = Components::of(config);
    let tx = transmit_power(alloc);
    let (k_s, c_n) = alloc.phi.dim();
    let n = alloc.xi.ncols();
    (0..k_s)
        .map(|k| {
            let mut terrestrial = 0.0;
            let mut leo = 0.0;
            let mut sinr = 0.0;
            for c in 0..c_n {
                let phi = alloc.phi[[k, c]];
                if phi == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let w = phi * alloc.xi[[k, j]];
                    if w == 0.0 {
                        continue;
                    }
                    let i = interference(k, c, j, tx.view(), gains, comps);
                    let p = alloc.power[[k, c, j]];
                    let g = gains[[k, c, j]];
                    let r = w * subchannel_rate(p, g, i, config);
                    sinr += w * link_sinr(p, g, i, config);
                    if comps.layer(c) == Layer::Leo {
                        leo += r;
                    } else {
                        terrestrial += r;
                    }
                }
            }
            LinkStats {
                rate_bps: terrestrial + leo.min(config.leo_rate_cap_bps),
                sinr,
                leo_rate_bps: leo,
            }
        })
        .collect()
}

/// Aggregate downlink rate of user `k` in class allocation `alloc`.
pub fn user_rate(
    k: usize,
    alloc: &SliceAllocation,
    gains: &Array3<f64>,
    config: &ScenarioConfig,
) -> Result<f64> {
    let stats = class_link_stats(alloc, gains, config);
    stats.get(k).map(|s| s.rate_bps).ok_or(SimError::IndexOutOfRange {
        what: "user",
        index: k,
        len: stats.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use proptest::prelude::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    const UNIT: FixedFading = FixedFading { rayleigh: 1.0, scatter: (0.0, 0.0) };

    #[test]
    fn terrestrial_examples() {
        let c = cfg();
        let mut f = UNIT;
        assert_eq!(terrestrial_gain(1.0, &c, &mut f).unwrap(), 1.0);
        assert!((terrestrial_gain(100.0, &c, &mut f).unwrap() - 1e-3).abs() < 1e-15);
        assert!(matches!(terrestrial_gain(0.0, &c, &mut f), Err(SimError::Domain(_))));
    }

    #[test]
    fn rayleigh_sample_mean_is_unity() {
        let c = cfg();
        let mut rng = seeds::substream(5, seeds::FADING);
        let mut f = RandomFading(&mut rng);
        let d = 250.0;
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| terrestrial_gain(d, &c, &mut f).unwrap() * d.powf(1.5))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn uav_examples() {
        let mut c = cfg();
        let mut f = UNIT;
        c.uav_ref_gain_db = 0.0;
        assert!((uav_gain(1.0, &c, &mut f).unwrap() - 6.0 / 7.0).abs() < 1e-15);
        c.uav_ref_gain_db = -30.0;
        let g = uav_gain(100.0, &c, &mut f).unwrap();
        assert!((g - 8.571_428_571e-7).abs() < 1e-15);
        assert!(uav_gain(0.0, &c, &mut f).is_err());
    }

    #[test]
    fn leo_examples() {
        let mut c = cfg();
        let g1 = leo_gain(1.0, &c).unwrap();
        assert!((g1 - 2.2765e-5).abs() / 2.2765e-5 < 1e-4);
        let g = leo_gain(200_000.0, &c).unwrap();
        assert!((g - 2.545e-13).abs() / 2.545e-13 < 1e-3);
        c.carrier_hz *= 2.0;
        assert!((leo_gain(1.0, &c).unwrap() * 4.0 - g1).abs() < 1e-18);
        assert!(leo_gain(0.0, &c).is_err());
    }

    #[test]
    fn rate_examples() {
        let c = cfg();
        assert_eq!(subchannel_rate(0.0, 1.0, 0.0, &c), 0.0);
        let bn = c.subchannel_bandwidth();
        let noise = c.subchannel_noise_w();
        assert!((subchannel_rate(1.0, noise, 0.0, &c) - bn).abs() < 1e-6);
        let r = subchannel_rate(1.0, 1e-9, 0.0, &c);
        assert!((r - 7.444e6).abs() / 7.444e6 < 1e-3, "{r}");
    }

    proptest! {
        #[test]
        fn rate_is_monotone(p in 0.0..100.0f64, dp in 0.0..10.0f64, g in 0.0..1e-6f64,
                            i in 0.0..1e-8f64, di in 0.0..1e-8f64) {
            let c = cfg();
            let base = subchannel_rate(p, g, i, &c);
            prop_assert!(subchannel_rate(p + dp, g, i, &c) >= base);
            prop_assert!(subchannel_rate(p, g * 1.5, i, &c) >= base);
            prop_assert!(subchannel_rate(p, g, i + di, &c) <= base);
        }
    }

    #[test]
    fn single_vbs_sees_no_interference() {
        let comps = Components { vbs: 1, uav: 0 };
        let tx = Array2::from_elem((2, 3), 5.0);
        let g = Array3::from_elem((1, 2, 3), 1.0);
        assert_eq!(interference(0, 0, 1, tx.view(), &g, comps), 0.0);
        assert_eq!(interference(0, 1, 1, tx.view(), &g, comps), 0.0);
    }

    #[test]
    fn two_vbs_single_term() {
        let comps = Components { vbs: 2, uav: 0 };
        let mut tx = Array2::zeros((3, 1));
        tx[[1, 0]] = 1.0;
        let g = Array3::from_elem((1, 3, 1), 1e-10);
        assert_eq!(interference(0, 0, 0, tx.view(), &g, comps), 1e-10);
        assert_eq!(interference(0, 1, 0, tx.view(), &g, comps), 0.0);
    }

    #[test]
    fn realization_shapes_and_leo_uniformity() {
        let c = ScenarioConfig::with_users([3, 2, 4]);
        let state = crate::topology::init_topology(&c, 4).unwrap();
        let mut rng = seeds::substream(4, seeds::FADING);
        let r = ChannelRealization::sample(&state, &c, &mut RandomFading(&mut rng)).unwrap();
        let comps = Components::of(&c);
        assert_eq!(r.classes[2].dim(), (4, 6, 7));
        let g0 = r.leo_gain(0, 0, comps, 0);
        for s in 0..3 {
            for k in 0..state.num_users(s) {
                for n in 0..7 {
                    assert_eq!(r.leo_gain(s, k, comps, n), g0);
                }
            }
        }
        assert!(r.classes.iter().all(|g| g.iter().all(|v| v.is_finite() && *v >= 0.0)));
        assert!(r.vbs_gain(0, 0, 0, 0) > 0.0);
    }
}
