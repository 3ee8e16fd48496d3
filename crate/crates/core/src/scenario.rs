//! Network data model, the medium and large reference layouts, and the JSON
//! scenario format.
//!
//! Transmitter index 0 is always the HAPS; indices `1..=N_B` are ground base
//! stations. Positions are in meters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Position = [f64; 3];

pub fn distance(a: &Position, b: &Position) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Haps,
    GroundBs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transmitter {
    pub position: Position,
    pub n_antennas: usize,
    pub p_max_watts: f64,
    pub role: Role,
}

/// Link-budget terms of the satellite-to-HAPS optical backhaul.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsoParams {
    /// Satellite optical transmit power (W).
    pub p_t_watts: f64,
    pub eta_t: f64,
    pub eta_r: f64,
    pub l_poi_db: f64,
    pub l_atm_db: f64,
    /// Receiver aperture area over beam footprint area (geometrical loss).
    pub area_ratio: f64,
    /// Photon energy (J).
    pub e_p_joules: f64,
    /// Receiver sensitivity (photons per bit).
    pub eta_b_photons_per_bit: f64,
}

impl Default for FsoParams {
    /// 1550 nm terminal sized so the backhaul carries roughly 1 Gbit/s.
    fn default() -> Self {
        FsoParams {
            p_t_watts: 1.0,
            eta_t: 0.8,
            eta_r: 0.8,
            l_poi_db: 2.0,
            l_atm_db: 1.0,
            area_ratio: 4.0e-8,
            e_p_joules: 1.282e-19,
            eta_b_photons_per_bit: 100.0,
        }
    }
}

impl FsoParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("fso.p_t_watts", self.p_t_watts),
            ("fso.area_ratio", self.area_ratio),
            ("fso.e_p_joules", self.e_p_joules),
            ("fso.eta_b_photons_per_bit", self.eta_b_photons_per_bit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("fso.eta_t", self.eta_t), ("fso.eta_r", self.eta_r)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(name, format!("must lie in (0, 1], got {v}")));
            }
        }
        for (name, v) in [("fso.l_poi_db", self.l_poi_db), ("fso.l_atm_db", self.l_atm_db)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(name, format!("must be >= 0, got {v}")));
            }
        }
        if self.area_ratio > 1.0 {
            return Err(Error::validation("fso.area_ratio", "must be <= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Index 0 is the HAPS, the rest are ground base stations.
    pub transmitters: Vec<Transmitter>,
    pub users: Vec<Position>,
    pub satellite_position: Position,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub noise_psd_dbm_hz: f64,
    /// Maximum number of users the HAPS payload can serve (K0).
    pub haps_user_cap: usize,
    /// Data availability: `gamma[i][j]` is true when transmitter `i` holds
    /// the content requested by user `j`.
    pub gamma: Vec<Vec<bool>>,
    pub fso: FsoParams,
    /// When set, replaces the link-budget backhaul rate (bit/s).
    pub fso_rate_override: Option<f64>,
    pub rician_kappa: f64,
    pub shadowing_sigma_db: f64,
}

impl Scenario {
    pub fn n_transmitters(&self) -> usize {
        self.transmitters.len()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn haps(&self) -> &Transmitter {
        &self.transmitters[0]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(&self.transmitters[i].position, &self.users[j])
    }

    /// Maximum number of users transmitter `i` may serve in the baselines:
    /// the antenna count for a base station, K0 for the HAPS.
    pub fn slot_limit(&self, i: usize) -> usize {
        if i == 0 {
            self.haps_user_cap
        } else {
            self.transmitters[i].n_antennas
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.transmitters.is_empty() {
            return Err(Error::validation("transmitters", "at least the HAPS is required"));
        }
        for (i, t) in self.transmitters.iter().enumerate() {
            let field = format!("transmitters[{i}]");
            match (i, t.role) {
                (0, Role::Haps) => {
                    if !(t.position[2] > 0.0) {
                        return Err(Error::validation(field, "HAPS altitude must be positive"));
                    }
                }
                (0, Role::GroundBs) => {
                    return Err(Error::validation(field, "transmitter 0 must be the HAPS"));
                }
                (_, Role::Haps) => {
                    return Err(Error::validation(field, "only transmitter 0 may be a HAPS"));
                }
                (_, Role::GroundBs) => {
                    if t.position[2] != 0.0 {
                        return Err(Error::validation(field, "ground BS must have z = 0"));
                    }
                }
            }
            if t.n_antennas == 0 {
                return Err(Error::validation(field, "antenna count must be >= 1"));
            }
            if !(t.p_max_watts.is_finite() && t.p_max_watts > 0.0) {
                return Err(Error::validation(field, "power budget must be positive"));
            }
            if t.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::validation(field, "position must be finite"));
            }
        }
        for (j, u) in self.users.iter().enumerate() {
            if u.iter().any(|c| !c.is_finite()) || u[2] != 0.0 {
                return Err(Error::validation(format!("users[{j}]"), "user must be finite with z = 0"));
            }
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::validation("bandwidth_hz", "must be positive"));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::validation("carrier_hz", "must be positive"));
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::validation("noise_psd_dbm_hz", "must be finite"));
        }
        if !(self.rician_kappa.is_finite() && self.rician_kappa >= 0.0) {
            return Err(Error::validation("rician_kappa", "must be >= 0"));
        }
        if !(self.shadowing_sigma_db.is_finite() && self.shadowing_sigma_db >= 0.0) {
            return Err(Error::validation("shadowing_sigma_db", "must be >= 0"));
        }
        if self.gamma.len() != self.n_transmitters() || self.gamma.iter().any(|row| row.len() != self.n_users()) {
            return Err(Error::validation("gamma", format!("must be {} x {}", self.n_transmitters(), self.n_users())));
        }
        if let Some(r) = self.fso_rate_override {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::validation("fso.rate_override_bps", "must be finite and >= 0"));
            }
        }
        self.fso.validate()
    }
}

// ---------------------------------------------------------------------------
// Reference layouts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// 5 km x 5 km: 12 urban BSs in the 1 km corner, 60/40 user split.
    Medium,
    /// 30 km x 30 km: urban, suburban and rural subareas (60/30/8 BSs).
    Large,
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "medium" | "mid" => Ok(Layout::Medium),
            "large" | "big" => Ok(Layout::Large),
            _ => Err(Error::Unknown { kind: "layout", value: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    const fn km(x0: f64, x1: f64, y0: f64, y1: f64) -> Rect {
        Rect { x0: x0 * 1e3, x1: x1 * 1e3, y0: y0 * 1e3, y1: y1 * 1e3 }
    }

    fn contains(&self, p: &Position) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    fn sample(&self, rng: &mut impl Rng) -> Position {
        [rng.random_range(self.x0..self.x1), rng.random_range(self.y0..self.y1), 0.0]
    }
}

#[derive(Debug, Clone, Copy)]
enum Region {
    Rect(Rect),
    /// Footprint minus every rectangular subarea of the layout.
    Remainder,
}

#[derive(Debug, Clone, Copy)]
struct Subarea {
    region: Region,
    n_bs: usize,
    user_percent: usize,
    bs_power_watts: f64,
}

struct LayoutDef {
    footprint: Rect,
    subareas: &'static [Subarea],
    haps_antennas: usize,
    haps_power_watts: f64,
}

const HAPS_ALTITUDE_M: f64 = 18e3;
const SATELLITE_ALTITUDE_M: f64 = 36_000e3;

const MEDIUM: LayoutDef = LayoutDef {
    footprint: Rect::km(0.0, 5.0, 0.0, 5.0),
    subareas: &[
        Subarea { region: Region::Rect(Rect::km(0.0, 1.0, 0.0, 1.0)), n_bs: 12, user_percent: 60, bs_power_watts: 1.0 },
        Subarea { region: Region::Remainder, n_bs: 0, user_percent: 40, bs_power_watts: 2.0 },
    ],
    haps_antennas: 20,
    haps_power_watts: 100.0,
};

const LARGE: LayoutDef = LayoutDef {
    footprint: Rect::km(0.0, 30.0, 0.0, 30.0),
    subareas: &[
        Subarea { region: Region::Rect(Rect::km(0.0, 5.0, 0.0, 5.0)), n_bs: 60, user_percent: 60, bs_power_watts: 1.0 },
        Subarea {
            region: Region::Rect(Rect::km(25.0, 30.0, 25.0, 30.0)),
            n_bs: 30,
            user_percent: 30,
            bs_power_watts: 2.0,
        },
        Subarea { region: Region::Remainder, n_bs: 8, user_percent: 10, bs_power_watts: 5.0 },
    ],
    haps_antennas: 40,
    haps_power_watts: 200.0,
};

impl Layout {
    fn def(self) -> &'static LayoutDef {
        match self {
            Layout::Medium => &MEDIUM,
            Layout::Large => &LARGE,
        }
    }

    pub fn n_subareas(self) -> usize {
        self.def().subareas.len()
    }

    /// Index of the subarea containing `p`, or `None` outside the footprint.
    pub fn subarea_of(self, p: &Position) -> Option<usize> {
        let def = self.def();
        if !def.footprint.contains(p) {
            return None;
        }
        let mut remainder = None;
        for (k, s) in def.subareas.iter().enumerate() {
            match s.region {
                Region::Rect(r) if r.contains(p) => return Some(k),
                Region::Rect(_) => {}
                Region::Remainder => remainder = Some(k),
            }
        }
        remainder
    }

    /// Users per subarea for a population of `n_users`: floor on every
    /// subarea but the last, which takes the remainder.
    pub fn user_split(self, n_users: usize) -> Vec<usize> {
        let subareas = self.def().subareas;
        let mut counts: Vec<usize> = subareas.iter().map(|s| n_users * s.user_percent / 100).collect();
        let assigned: usize = counts[..counts.len() - 1].iter().sum();
        *counts.last_mut().unwrap() = n_users - assigned;
        counts
    }

    pub fn subarea_counts(self, users: &[Position]) -> Vec<usize> {
        let mut counts = vec![0; self.n_subareas()];
        for u in users {
            if let Some(k) = self.subarea_of(u) {
                counts[k] += 1;
            }
        }
        counts
    }
}

/// Optional replacements for the layout defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub haps_antennas: Option<usize>,
    pub haps_power_watts: Option<f64>,
    /// K0; follows the HAPS antenna count when unset.
    pub haps_user_cap: Option<usize>,
    pub bs_antennas: Option<usize>,
    pub fso_rate_bps: Option<f64>,
    pub shadowing_sigma_db: Option<f64>,
    pub rician_kappa: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub carrier_hz: Option<f64>,
    pub noise_psd_dbm_hz: Option<f64>,
}

impl Overrides {
    pub const KEYS: &'static [&'static str] = &[
        "haps_antennas",
        "haps_power_watts",
        "haps_power_dbw",
        "haps_user_cap",
        "bs_antennas",
        "fso_rate_bps",
        "shadowing_sigma_db",
        "rician_kappa",
        "bandwidth_hz",
        "carrier_hz",
        "noise_psd_dbm_hz",
    ];

    /// Sets one override from its textual form, e.g. `("haps_power_dbw", "30")`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| Error::validation(key, format!("cannot parse `{value}`")))
        }
        match key {
            "haps_antennas" => self.haps_antennas = Some(num(key, value)?),
            "haps_power_watts" => self.haps_power_watts = Some(num(key, value)?),
            "haps_power_dbw" => self.haps_power_watts = Some(dbw_to_watts(num(key, value)?)),
            "haps_user_cap" => self.haps_user_cap = Some(num(key, value)?),
            "bs_antennas" => self.bs_antennas = Some(num(key, value)?),
            "fso_rate_bps" => self.fso_rate_bps = Some(num(key, value)?),
            "shadowing_sigma_db" => self.shadowing_sigma_db = Some(num(key, value)?),
            "rician_kappa" => self.rician_kappa = Some(num(key, value)?),
            "bandwidth_hz" => self.bandwidth_hz = Some(num(key, value)?),
            "carrier_hz" => self.carrier_hz = Some(num(key, value)?),
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = Some(num(key, value)?),
            _ => return Err(Error::Unknown { kind: "override", value: key.to_string() }),
        }
        Ok(())
    }

    /// Parses a `key=value` pair.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::validation("override", format!("expected key=value, got `{pair}`")))?;
        self.set(k.trim(), v)
    }
}

/// Recipe for a generated scenario; a scenario is a pure function of the
/// recipe and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub layout: Layout,
    pub n_users: usize,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ScenarioSpec {
    pub fn generate(&self, seed: u64) -> Result<Scenario> {
        generate(self.layout, seed, self.n_users, &self.overrides)
    }
}

pub fn generate_medium_scenario(seed: u64, n_users: usize, overrides: &Overrides) -> Result<Scenario> {
    generate(Layout::Medium, seed, n_users, overrides)
}

pub fn generate_large_scenario(seed: u64, n_users: usize, overrides: &Overrides) -> Result<Scenario> {
    generate(Layout::Large, seed, n_users, overrides)
}

const BS_STREAM: u64 = 1;
const USER_STREAM: u64 = 2;

pub fn generate(layout: Layout, seed: u64, n_users: usize, ov: &Overrides) -> Result<Scenario> {
    if n_users == 0 {
        return Err(Error::validation("n_users", "must be at least 1"));
    }
    let def = layout.def();
    let fp = def.footprint;
    let center = [(fp.x0 + fp.x1) / 2.0, (fp.y0 + fp.y1) / 2.0];
    let rects: Vec<Rect> = def
        .subareas
        .iter()
        .filter_map(|s| match s.region {
            Region::Rect(r) => Some(r),
            Region::Remainder => None,
        })
        .collect();
    let sample = |region: Region, rng: &mut ChaCha8Rng| -> Position {
        match region {
            Region::Rect(r) => r.sample(rng),
            Region::Remainder => loop {
                let p = fp.sample(rng);
                if !rects.iter().any(|r| r.contains(&p)) {
                    break p;
                }
            },
        }
    };

    let haps_antennas = ov.haps_antennas.unwrap_or(def.haps_antennas);
    let mut transmitters = vec![Transmitter {
        position: [center[0], center[1], HAPS_ALTITUDE_M],
        n_antennas: haps_antennas,
        p_max_watts: ov.haps_power_watts.unwrap_or(def.haps_power_watts),
        role: Role::Haps,
    }];

    // Separate streams keep BS placement independent of the user count.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BS_STREAM);
    for s in def.subareas {
        for _ in 0..s.n_bs {
            transmitters.push(Transmitter {
                position: sample(s.region, &mut rng),
                n_antennas: ov.bs_antennas.unwrap_or(1),
                p_max_watts: s.bs_power_watts,
                role: Role::GroundBs,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(USER_STREAM);
    let mut users = Vec::with_capacity(n_users);
    for (s, count) in def.subareas.iter().zip(layout.user_split(n_users)) {
        for _ in 0..count {
            users.push(sample(s.region, &mut rng));
        }
    }

    let n_tx = transmitters.len();
    let scenario = Scenario {
        transmitters,
        users,
        satellite_position: [center[0], center[1], SATELLITE_ALTITUDE_M],
        bandwidth_hz: ov.bandwidth_hz.unwrap_or(10e6),
        carrier_hz: ov.carrier_hz.unwrap_or(3e9),
        noise_psd_dbm_hz: ov.noise_psd_dbm_hz.unwrap_or(-174.0),
        haps_user_cap: ov.haps_user_cap.unwrap_or(haps_antennas),
        gamma: vec![vec![true; n_users]; n_tx],
        fso: FsoParams::default(),
        fso_rate_override: ov.fso_rate_bps,
        rician_kappa: ov.rician_kappa.unwrap_or(5.0),
        shadowing_sigma_db: ov.shadowing_sigma_db.unwrap_or(5.0),
    };
    scenario.validate()?;
    Ok(scenario)
}

// ---------------------------------------------------------------------------
// JSON format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadioDoc {
    bandwidth_hz: f64,
    carrier_hz: f64,
    noise_psd_dbm_hz: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HapsDoc {
    user_cap: usize,
    rician_kappa: f64,
}

/// Either the full link budget or a direct rate; with a rate override the
/// link-budget fields are optional and default when absent.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FsoDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_override_bps: Option<f64>,
    p_t_watts: Option<f64>,
    eta_t: Option<f64>,
    eta_r: Option<f64>,
    l_poi_db: Option<f64>,
    l_atm_db: Option<f64>,
    area_ratio: Option<f64>,
    e_p_joules: Option<f64>,
    eta_b_photons_per_bit: Option<f64>,
}

impl FsoDoc {
    fn into_params(self) -> Result<(FsoParams, Option<f64>)> {
        let defaults = FsoParams::default();
        let has_override = self.rate_override_bps.is_some();
        let pick = |name: &str, v: Option<f64>, d: f64| -> Result<f64> {
            match (v, has_override) {
                (Some(v), _) => Ok(v),
                (None, true) => Ok(d),
                (None, false) => Err(Error::Schema(format!("missing field `fso.{name}`"))),
            }
        };
        let params = FsoParams {
            p_t_watts: pick("p_t_watts", self.p_t_watts, defaults.p_t_watts)?,
            eta_t: pick("eta_t", self.eta_t, defaults.eta_t)?,
            eta_r: pick("eta_r", self.eta_r, defaults.eta_r)?,
            l_poi_db: pick("l_poi_db", self.l_poi_db, defaults.l_poi_db)?,
            l_atm_db: pick("l_atm_db", self.l_atm_db, defaults.l_atm_db)?,
            area_ratio: pick("area_ratio", self.area_ratio, defaults.area_ratio)?,
            e_p_joules: pick("e_p_joules", self.e_p_joules, defaults.e_p_joules)?,
            eta_b_photons_per_bit: pick(
                "eta_b_photons_per_bit",
                self.eta_b_photons_per_bit,
                defaults.eta_b_photons_per_bit,
            )?,
        };
        Ok((params, self.rate_override_bps))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    transmitters: Vec<Transmitter>,
    users: Vec<Position>,
    satellite: Position,
    radio: RadioDoc,
    haps: HapsDoc,
    fso: FsoDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<Vec<Vec<u8>>>,
    shadowing_sigma_db: f64,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let n_tx = doc.transmitters.len();
    let n_users = doc.users.len();
    let gamma = match doc.gamma {
        None => vec![vec![true; n_users]; n_tx],
        Some(rows) => {
            let mut gamma = Vec::with_capacity(rows.len());
            for (i, row) in rows.into_iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, v) in row.into_iter().enumerate() {
                    match v {
                        0 => out.push(false),
                        1 => out.push(true),
                        _ => {
                            return Err(Error::validation(
                                format!("gamma[{i}][{j}]"),
                                format!("entries must be 0 or 1, got {v}"),
                            ))
                        }
                    }
                }
                gamma.push(out);
            }
            gamma
        }
    };
    let (fso, fso_rate_override) = doc.fso.into_params()?;
    let scenario = Scenario {
        transmitters: doc.transmitters,
        users: doc.users,
        satellite_position: doc.satellite,
        bandwidth_hz: doc.radio.bandwidth_hz,
        carrier_hz: doc.radio.carrier_hz,
        noise_psd_dbm_hz: doc.radio.noise_psd_dbm_hz,
        haps_user_cap: doc.haps.user_cap,
        gamma,
        fso,
        fso_rate_override,
        rician_kappa: doc.haps.rician_kappa,
        shadowing_sigma_db: doc.shadowing_sigma_db,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn serialize_scenario(s: &Scenario) -> String {
    let all_ones = s.gamma.iter().all(|row| row.iter().all(|&g| g));
    let doc = ScenarioDoc {
        transmitters: s.transmitters.clone(),
        users: s.users.clone(),
        satellite: s.satellite_position,
        radio: RadioDoc {
            bandwidth_hz: s.bandwidth_hz,
            carrier_hz: s.carrier_hz,
            noise_psd_dbm_hz: s.noise_psd_dbm_hz,
        },
        haps: HapsDoc { user_cap: s.haps_user_cap, rician_kappa: s.rician_kappa },
        fso: FsoDoc {
            rate_override_bps: s.fso_rate_override,
            p_t_watts: Some(s.fso.p_t_watts),
            eta_t: Some(s.fso.eta_t),
            eta_r: Some(s.fso.eta_r),
            l_poi_db: Some(s.fso.l_poi_db),
            l_atm_db: Some(s.fso.l_atm_db),
            area_ratio: Some(s.fso.area_ratio),
            e_p_joules: Some(s.fso.e_p_joules),
            eta_b_photons_per_bit: Some(s.fso.eta_b_photons_per_bit),
        },
        gamma: (!all_ones).then(|| s.gamma.iter().map(|row| row.iter().map(|&g| g as u8).collect()).collect()),
        shadowing_sigma_db: s.shadowing_sigma_db,
    };
    serde_json::to_string_pretty(&doc).expect("scenario serialization cannot fail")
}
