//! Pure 3-D link geometry: first-Fresnel-zone radii, per-link obstruction
//! profiles, LOS classification and per-vehicle LOS-ratio statistics.
//!
//! A link is the straight line between two roof antennas. Every other
//! vehicle is a flat-roofed rectangle; it becomes a knife-edge obstacle when
//! its body penetrates the ellipsoid at 60% of the first Fresnel zone, tested
//! laterally (closest approach of the footprint to the link axis) and
//! vertically (roof clearance against the antenna-to-antenna line).

use thiserror::Error;

use crate::scenario::Scenario;

/// Fraction of the first Fresnel radius that defines the obstruction
/// ellipsoid.
pub const FRESNEL_FRACTION: f64 = 0.6;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("fresnel radius requires positive inputs (d1={d1}, d2={d2}, wavelength={wavelength})")]
    NonPositiveInput { d1: f64, d2: f64, wavelength: f64 },
}

/// Stable vehicle identifier, unique within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId(pub u64);

impl std::fmt::Display for VehicleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Height class: short vehicles are passenger cars, tall vehicles are
/// vans, buses and trucks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VehicleClass {
    Short,
    Tall,
}

impl VehicleClass {
    pub fn label(self) -> &'static str {
        match self {
            VehicleClass::Short => "short",
            VehicleClass::Tall => "tall",
        }
    }
}

/// 2-D vector in the road frame (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Perpendicular (rotated +90 degrees).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;

    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;

    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// 3-D point: road-frame x/y plus elevation above the road surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A vehicle: both a network node (roof-center antenna) and an obstacle
/// (flat-roofed rectangular footprint).
#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: VehicleId,
    /// Footprint center, road frame (m).
    pub x: f64,
    pub y: f64,
    pub lane: i32,
    /// Unit travel direction.
    pub heading: Vec2,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub class: VehicleClass,
    /// Antenna elevation above the roof (m).
    pub antenna_offset: f64,
}

impl Vehicle {
    /// Convenience constructor: class-typical footprint, +x heading,
    /// roof-mounted antenna.
    pub fn new(id: u64, x: f64, y: f64, height: f64, class: VehicleClass) -> Self {
        let (length, width) = match class {
            VehicleClass::Short => (4.2, 1.8),
            VehicleClass::Tall => (6.3, 2.0),
        };
        Vehicle {
            id: VehicleId(id),
            x,
            y,
            lane: 0,
            heading: Vec2::new(1.0, 0.0),
            length,
            width,
            height,
            class,
            antenna_offset: 0.0,
        }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Antenna elevation above the road surface.
    pub fn antenna_height(&self) -> f64 {
        self.height + self.antenna_offset
    }

    pub fn antenna_point(&self) -> Point3 {
        Point3 {
            x: self.x,
            y: self.y,
            z: self.antenna_height(),
        }
    }

    /// 2-D center-to-center distance.
    pub fn distance_to(&self, other: &Vehicle) -> f64 {
        (self.center() - other.center()).norm()
    }

    /// Half of the footprint diagonal; bounds how far the body can reach
    /// from the center.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * (self.length * self.length + self.width * self.width).sqrt()
    }
}

/// One knife edge on a link: which vehicle, where along the Tx->Rx axis, and
/// the signed height of its roof relative to the antenna-to-antenna line
/// (positive above).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleSample {
    pub vehicle_id: VehicleId,
    /// Distance from the transmitter along the Tx->Rx axis (m).
    pub d1: f64,
    /// Roof top minus line elevation at `d1` (m).
    pub clearance: f64,
}

/// Obstruction profile of one directed link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkProfile {
    pub tx_antenna: Point3,
    pub rx_antenna: Point3,
    /// 3-D antenna-to-antenna distance (m).
    pub distance: f64,
    /// Knife edges sorted ascending by `d1`.
    pub obstacles: Vec<ObstacleSample>,
}

impl LinkProfile {
    /// Length of the link projected on the road plane; the axial coordinate
    /// that `ObstacleSample::d1` is measured along.
    pub fn axial_length(&self) -> f64 {
        let dx = self.rx_antenna.x - self.tx_antenna.x;
        let dy = self.rx_antenna.y - self.tx_antenna.y;
        (dx * dx + dy * dy).sqrt()
    }

    /// Elevation of the straight antenna-to-antenna line at axial position
    /// `d1`.
    pub fn line_elevation(&self, d1: f64) -> f64 {
        let l = self.axial_length();
        if l <= 0.0 {
            return self.tx_antenna.z;
        }
        self.tx_antenna.z + (self.rx_antenna.z - self.tx_antenna.z) * (d1 / l)
    }
}

/// First Fresnel zone radius at distances `d1` and `d2` from the endpoints.
pub fn fresnel_radius(d1: f64, d2: f64, wavelength: f64) -> Result<f64, GeometryError> {
    if d1 <= 0.0 || d2 <= 0.0 || wavelength <= 0.0 {
        return Err(GeometryError::NonPositiveInput { d1, d2, wavelength });
    }
    Ok(first_fresnel(d1, d2, wavelength))
}

#[inline]
fn first_fresnel(d1: f64, d2: f64, wavelength: f64) -> f64 {
    (wavelength * d1 * d2 / (d1 + d2)).sqrt()
}

/// Closest approach between the segment `a`-`b` and a vehicle footprint.
///
/// Returns `(lateral, t)`: the 2-D distance from the segment to the
/// rectangle and the position of the closest point along the segment, in
/// meters from `a`. When the segment crosses the footprint the distance is
/// zero and `t` is the midpoint of the crossing interval.
fn segment_footprint_approach(a: Vec2, b: Vec2, v: &Vehicle) -> (f64, f64) {
    // Work in the footprint's local frame: x along heading, y across.
    let u = v.heading;
    let p = u.perp();
    let to_local = |w: Vec2| {
        let d = w - v.center();
        Vec2::new(d.dot(u), d.dot(p))
    };
    let al = to_local(a);
    let bl = to_local(b);
    let hx = 0.5 * v.length;
    let hy = 0.5 * v.width;
    let seg_len = (bl - al).norm();

    if let Some((t0, t1)) = clip_segment_aabb(al, bl, hx, hy) {
        return (0.0, 0.5 * (t0 + t1) * seg_len);
    }

    // No crossing: the minimum is attained against one of the four edges.
    let corners = [
        Vec2::new(-hx, -hy),
        Vec2::new(hx, -hy),
        Vec2::new(hx, hy),
        Vec2::new(-hx, hy),
    ];
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..4 {
        let (d2, s) = segment_segment_dist2(al, bl, corners[i], corners[(i + 1) % 4]);
        if d2 < best.0 {
            best = (d2, s);
        }
    }
    (best.0.sqrt(), best.1 * seg_len)
}

/// Liang-Barsky clip of the segment `a`-`b` (parameter in [0,1]) against the
/// axis-aligned box `|x| <= hx, |y| <= hy`. Returns the surviving parameter
/// interval, if any.
fn clip_segment_aabb(a: Vec2, b: Vec2, hx: f64, hy: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    let bounds = [
        (-d.x, a.x + hx),
        (d.x, hx - a.x),
        (-d.y, a.y + hy),
        (d.y, hy - a.y),
    ];
    for (p, q) in bounds {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
            continue;
        }
        let r = q / p;
        if p < 0.0 {
            if r > t1 {
                return None;
            }
            if r > t0 {
                t0 = r;
            }
        } else {
            if r < t0 {
                return None;
            }
            if r < t1 {
                t1 = r;
            }
        }
    }
    Some((t0, t1))
}

/// Squared distance between segments `p1`-`q1` and `p2`-`q2`, plus the
/// parameter on the first segment where it is attained.
fn segment_segment_dist2(p1: Vec2, q1: Vec2, p2: Vec2, q2: Vec2) -> (f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    const EPS: f64 = 1e-12;

    let (s, t);
    if a <= EPS && e <= EPS {
        s = 0.0;
        t = 0.0;
    } else if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s_ = if denom.abs() > EPS {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t_ = (b * s_ + f) / e;
            let t_clamped = t_.clamp(0.0, 1.0);
            if t_ != t_clamped {
                s_ = ((t_clamped * b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_clamped;
        }
    }
    let cp1 = p1 + d1.scale(s);
    let cp2 = p2 + d2.scale(t);
    let diff = cp1 - cp2;
    (diff.dot(diff), s)
}

/// Builds the obstruction profile of the `tx` -> `rx` link.
///
/// A third vehicle is included as a knife edge when the closest approach of
/// the link axis to its footprint is within `0.6 * fresnel_radius` at that
/// axial position (inclusive) and its roof clearance is above
/// `-0.6 * fresnel_radius` (the body penetrates the 60% ellipsoid). The
/// transmitter's and receiver's own bodies never obstruct their link.
///
/// The geometry is evaluated in a canonical endpoint order so that the
/// forward and reverse profiles of a link are bit-identical up to the
/// direction of the `d1` coordinate.
///
/// Panics if `tx` and `rx` share an id.
pub fn link_profile(tx: &Vehicle, rx: &Vehicle, scenario: &Scenario, wavelength: f64) -> LinkProfile {
    assert!(tx.id != rx.id, "link endpoints must differ");
    let tx_antenna = tx.antenna_point();
    let rx_antenna = rx.antenna_point();
    let dx = rx_antenna.x - tx_antenna.x;
    let dy = rx_antenna.y - tx_antenna.y;
    let dz = rx_antenna.z - tx_antenna.z;
    let distance = (dx * dx + dy * dy + dz * dz).sqrt();

    let swapped = (tx.x, tx.y, tx.id) > (rx.x, rx.y, rx.id);
    let (first, second) = if swapped { (rx, tx) } else { (tx, rx) };
    let a = first.center();
    let b = second.center();
    let za = first.antenna_height();
    let zb = second.antenna_height();
    let axial_len = (b - a).norm();

    let mut profile = LinkProfile {
        tx_antenna,
        rx_antenna,
        distance,
        obstacles: Vec::new(),
    };
    if axial_len <= 0.0 {
        return profile;
    }

    // Vehicles outside this x window cannot reach the obstruction corridor:
    // the corridor half-width never exceeds 0.6 * sqrt(lambda * L) / 2.
    let corridor_max = FRESNEL_FRACTION * 0.5 * (wavelength * axial_len).sqrt();
    let margin = corridor_max + scenario.max_half_diagonal() + 1e-6;
    let lo = a.x.min(b.x) - margin;
    let hi = a.x.max(b.x) + margin;

    for v in scenario.vehicles_in_x_window(lo, hi) {
        if v.id == tx.id || v.id == rx.id {
            continue;
        }
        let (lateral, d1c) = segment_footprint_approach(a, b, v);
        if d1c <= 0.0 || d1c >= axial_len {
            continue;
        }
        let corridor = FRESNEL_FRACTION * first_fresnel(d1c, axial_len - d1c, wavelength);
        if lateral > corridor {
            continue;
        }
        let line_z = za + (zb - za) * (d1c / axial_len);
        let clearance = v.height - line_z;
        if clearance <= -corridor {
            continue;
        }
        let d1 = if swapped { axial_len - d1c } else { d1c };
        profile.obstacles.push(ObstacleSample {
            vehicle_id: v.id,
            d1,
            clearance,
        });
    }
    profile
        .obstacles
        .sort_by(|l, r| l.d1.partial_cmp(&r.d1).unwrap().then(l.vehicle_id.cmp(&r.vehicle_id)));
    profile
}

/// A link is LOS iff nothing penetrates its 60% Fresnel ellipsoid.
pub fn is_los(profile: &LinkProfile) -> bool {
    profile.obstacles.is_empty()
}

/// Fraction of LOS links among each vehicle's neighbors within `range`
/// (2-D center distance). Vehicles with no in-range neighbor are omitted.
pub fn per_vehicle_los_ratio(
    scenario: &Scenario,
    range: f64,
    wavelength: f64,
) -> std::collections::BTreeMap<VehicleId, f64> {
    assert!(range > 0.0, "range must be positive");
    let vehicles = scenario.vehicles();
    let n = vehicles.len();
    let mut total = vec![0u32; n];
    let mut los = vec![0u32; n];

    for i in 0..n {
        let vi = &vehicles[i];
        for j in scenario.indices_in_x_window(vi.x, vi.x + range) {
            if j == i {
                continue;
            }
            let vj = &vehicles[j];
            // Forward x-window plus the distance check visits every
            // unordered pair at most once (ties on x resolved by index).
            if vj.x < vi.x || (vj.x == vi.x && j < i) {
                continue;
            }
            if vi.distance_to(vj) > range {
                continue;
            }
            let clear = is_los(&link_profile(vi, vj, scenario, wavelength));
            total[i] += 1;
            total[j] += 1;
            if clear {
                los[i] += 1;
                los[j] += 1;
            }
        }
    }

    let mut out = std::collections::BTreeMap::new();
    for i in 0..n {
        if total[i] > 0 {
            out.insert(vehicles[i].id, f64::from(los[i]) / f64::from(total[i]));
        }
    }
    out
}
