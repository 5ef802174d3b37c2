//! Received-power computation: free-space baseline plus multiple-knife-edge
//! obstruction attenuation, link-up decision and per-link packet delivery
//! probability.
//!
//! Obstacles are combined with the Epstein-Peterson method: each knife edge
//! is evaluated against the straight line joining its neighboring edge tops
//! (or the antennas at the ends) and the single-edge losses add up in dB.

use rand::RngCore;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{self, LinkProfile, Vehicle};
use crate::routing::Route;
use crate::scenario::Scenario;
use crate::stats::q_function;

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("path loss requires a positive distance, got {0}")]
    NonPositiveDistance(f64),
}

/// Radio parameters of every link in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Carrier frequency (Hz).
    pub frequency: f64,
    /// Transmit power (dBm).
    pub tx_power: f64,
    /// Transmitter antenna gain (dBi).
    pub antenna_gain_tx: f64,
    /// Receiver antenna gain (dBi).
    pub antenna_gain_rx: f64,
    /// Receiver sensitivity threshold (dBm).
    pub sensitivity: f64,
    /// Log-normal shadowing spread (dB); 0 disables shadowing.
    pub shadowing_sigma: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            frequency: 5.9e9,
            tx_power: 10.0,
            antenna_gain_tx: 6.0,
            antenna_gain_rx: 6.0,
            sensitivity: -90.0,
            shadowing_sigma: 0.0,
        }
    }
}

impl ChannelParams {
    pub fn with_tx_power(tx_power: f64) -> Self {
        ChannelParams {
            tx_power,
            ..ChannelParams::default()
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    /// Sum of transmit power and antenna gains (dBm).
    pub fn eirp(&self) -> f64 {
        self.tx_power + self.antenna_gain_tx + self.antenna_gain_rx
    }

    /// Distance beyond which even an unobstructed link falls below the
    /// sensitivity threshold. Obstruction only subtracts power, so no link
    /// longer than this can be up.
    pub fn max_los_range(&self) -> f64 {
        let headroom_db = self.eirp() - self.sensitivity;
        if headroom_db <= 0.0 {
            return 0.0;
        }
        self.wavelength() / (4.0 * std::f64::consts::PI) * 10f64.powf(headroom_db / 20.0)
    }
}

/// Link budget of one evaluated link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Antenna-to-antenna distance (m).
    pub distance: f64,
    pub free_space_loss: f64,
    pub obstruction_loss: f64,
    pub received_power: f64,
    /// True iff the obstruction profile was empty.
    pub los: bool,
}

/// Free-space path loss `20 log10(4 pi d / lambda)` in dB.
pub fn free_space_path_loss(distance: f64, frequency: f64) -> Result<f64, ChannelError> {
    if !(distance > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance));
    }
    let wavelength = SPEED_OF_LIGHT / frequency;
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance / wavelength).log10())
}

/// Single knife-edge attenuation for diffraction parameter `nu`, in dB.
///
/// Approximation `6.9 + 20 log10(sqrt((nu - 0.1)^2 + 1) + nu - 0.1)` for
/// `nu > -0.78`, zero otherwise, clamped to be non-negative near the cutoff.
pub fn knife_edge_loss(nu: f64) -> f64 {
    if nu <= -0.78 {
        return 0.0;
    }
    let t = ((nu - 0.1) * (nu - 0.1) + 1.0).sqrt() + nu - 0.1;
    (6.9 + 20.0 * t.log10()).max(0.0)
}

/// Total obstruction attenuation of a link profile (dB), Epstein-Peterson.
///
/// Each edge's effective height is measured against the straight line
/// joining the previous edge top (or the Tx antenna) and the next edge top
/// (or the Rx antenna); per-edge losses add. Edges at numerically identical
/// axial positions are merged, keeping the highest top.
pub fn obstruction_loss(profile: &LinkProfile, wavelength: f64) -> f64 {
    if profile.obstacles.is_empty() {
        return 0.0;
    }
    let axial = profile.axial_length();
    // Vertical-plane polyline: (axial position, elevation) of Tx, edges, Rx.
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(profile.obstacles.len() + 2);
    nodes.push((0.0, profile.tx_antenna.z));
    for o in &profile.obstacles {
        let top = profile.line_elevation(o.d1) + o.clearance;
        match nodes.last_mut() {
            Some(last) if (o.d1 - last.0).abs() < 1e-9 && last.0 > 0.0 => {
                last.1 = last.1.max(top);
            }
            _ => nodes.push((o.d1, top)),
        }
    }
    nodes.push((axial, profile.rx_antenna.z));

    let mut total = 0.0;
    for i in 1..nodes.len() - 1 {
        let (xa, za) = nodes[i - 1];
        let (x, z) = nodes[i];
        let (xb, zb) = nodes[i + 1];
        let d_a = x - xa;
        let d_b = xb - x;
        if d_a <= 0.0 || d_b <= 0.0 {
            continue;
        }
        let line_z = za + (zb - za) * d_a / (d_a + d_b);
        let h = z - line_z;
        let nu = h * (2.0 * (d_a + d_b) / (wavelength * d_a * d_b)).sqrt();
        total += knife_edge_loss(nu);
    }
    total
}

/// Evaluates the `tx` -> `rx` link budget under `params`.
///
/// With `shadowing_sigma > 0` and an RNG supplied, a Gaussian shadowing term
/// is added to the received power; otherwise the budget is deterministic.
pub fn received_power(
    tx: &Vehicle,
    rx: &Vehicle,
    scenario: &Scenario,
    params: &ChannelParams,
    rng: Option<&mut dyn RngCore>,
) -> LinkBudget {
    let profile = geometry::link_profile(tx, rx, scenario, params.wavelength());
    budget_from_profile(&profile, params, rng)
}

/// Assembles the budget for an already-computed obstruction profile.
pub fn budget_from_profile(
    profile: &LinkProfile,
    params: &ChannelParams,
    rng: Option<&mut dyn RngCore>,
) -> LinkBudget {
    let free_space_loss =
        free_space_path_loss(profile.distance, params.frequency).expect("distinct antenna positions");
    let obstruction_loss = obstruction_loss(profile, params.wavelength());
    let mut received = params.eirp() - free_space_loss - obstruction_loss;
    if params.shadowing_sigma > 0.0 {
        if let Some(rng) = rng {
            let shadow = Normal::new(0.0, params.shadowing_sigma).expect("positive sigma");
            received += shadow.sample(rng);
        }
    }
    LinkBudget {
        distance: profile.distance,
        free_space_loss,
        obstruction_loss,
        received_power: received,
        los: geometry::is_los(profile),
    }
}

/// Packet delivery probability of a link.
///
/// With `shadowing_sigma = 0` this is a hard threshold on the received
/// power; with `sigma > 0` the Gaussian shadowing is integrated
/// analytically: `Q((sensitivity - received) / sigma)`. The budget must have
/// been computed without a sampled shadowing term.
pub fn link_pdr(budget: &LinkBudget, params: &ChannelParams) -> f64 {
    if params.shadowing_sigma > 0.0 {
        q_function((params.sensitivity - budget.received_power) / params.shadowing_sigma)
    } else if budget.received_power >= params.sensitivity {
        1.0
    } else {
        0.0
    }
}

/// End-to-end delivery probability of a route: the product of its per-hop
/// delivery probabilities.
pub fn route_pdr(route: &Route, params: &ChannelParams) -> f64 {
    debug_assert!(!route.links.is_empty(), "route must have at least one hop");
    route
        .links
        .iter()
        .map(|budget| link_pdr(budget, params))
        .product()
}
