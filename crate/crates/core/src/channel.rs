//! FSO backhaul capacity and random RF channel vectors.
//!
//! Ground links combine free-space amplitude pathloss, log-normal shadowing
//! (one draw per BS-user pair, shared across the BS antennas) and Rayleigh
//! small-scale fading. HAPS links have no shadowing and Rician fading whose
//! line-of-sight phase is drawn once per user.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scenario::{FsoParams, Scenario};
use crate::CVector;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Backhaul rate in bit/s: received photon flux divided by photons per bit.
pub fn fso_backhaul_rate(p: &FsoParams) -> f64 {
    let received_watts = p.p_t_watts
        * p.eta_t
        * p.eta_r
        * 10f64.powf(-p.l_poi_db / 10.0)
        * 10f64.powf(-p.l_atm_db / 10.0)
        * p.area_ratio;
    received_watts / (p.e_p_joules * p.eta_b_photons_per_bit)
}

/// Thermal noise power in watts over `bandwidth_hz`.
pub fn noise_power(bandwidth_hz: f64, noise_psd_dbm_hz: f64) -> f64 {
    10f64.powf((noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz
}

/// Free-space amplitude gain `c / (4 pi d f_c)`.
pub fn pathloss_amplitude(distance_m: f64, carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / (4.0 * PI * distance_m * carrier_hz)
}

/// Circularly-symmetric complex normal sample with unit variance.
pub fn rayleigh_sample(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Rician sample with K-factor `kappa` and line-of-sight phase `theta`;
/// unit second moment for every `kappa`.
pub fn rician_sample(rng: &mut impl Rng, kappa: f64, theta: f64) -> Complex64 {
    let los = Complex64::from_polar((kappa / (kappa + 1.0)).sqrt(), theta);
    los + rayleigh_sample(rng) * (1.0 / (kappa + 1.0)).sqrt()
}

/// Shadowing in dB, `N(0, sigma^2)`.
pub fn shadowing_db_sample(rng: &mut impl Rng, sigma_db: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma_db * z
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `h[i][j]` is the channel from transmitter `i` to user `j`.
    h: Vec<Vec<CVector>>,
    /// Shadowing draw in dB per pair; zero on the HAPS row.
    shadowing_db: Vec<Vec<f64>>,
    pub fso_rate_bps: f64,
    pub noise_power_watts: f64,
    pub bandwidth_hz: f64,
}

impl ChannelSet {
    /// Builds a channel set from explicit vectors, e.g. for hand-made test
    /// instances.
    pub fn from_parts(
        h: Vec<Vec<CVector>>,
        fso_rate_bps: f64,
        noise_power_watts: f64,
        bandwidth_hz: f64,
    ) -> Result<Self> {
        let n_users = h.first().map_or(0, Vec::len);
        if h.iter().any(|row| row.len() != n_users) {
            return Err(Error::validation("h", "every transmitter needs one vector per user"));
        }
        for (i, row) in h.iter().enumerate() {
            if row.iter().any(|v| v.len() != row[0].len() || v.is_empty()) {
                return Err(Error::validation(
                    format!("h[{i}]"),
                    "vectors of one transmitter must share a nonzero length",
                ));
            }
        }
        if !(fso_rate_bps >= 0.0) {
            return Err(Error::validation("fso_rate_bps", "must be >= 0"));
        }
        if !(noise_power_watts > 0.0) {
            return Err(Error::validation("noise_power_watts", "must be positive"));
        }
        if !(bandwidth_hz > 0.0) {
            return Err(Error::validation("bandwidth_hz", "must be positive"));
        }
        let shadowing_db = h.iter().map(|row| vec![0.0; row.len()]).collect();
        Ok(ChannelSet { h, shadowing_db, fso_rate_bps, noise_power_watts, bandwidth_hz })
    }

    pub fn n_transmitters(&self) -> usize {
        self.h.len()
    }

    pub fn n_users(&self) -> usize {
        self.h.first().map_or(0, Vec::len)
    }

    pub fn n_antennas(&self, i: usize) -> usize {
        self.h[i].first().map_or(0, |v| v.len())
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> &CVector {
        &self.h[i][j]
    }

    /// `||h_ij||^2`.
    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.h[i][j].norm_squared()
    }

    pub fn shadowing_db(&self, i: usize, j: usize) -> f64 {
        self.shadowing_db[i][j]
    }

    pub fn with_fso_rate(mut self, fso_rate_bps: f64) -> Self {
        self.fso_rate_bps = fso_rate_bps;
        self
    }

    /// Dumps every coefficient as `i,j,n,re,im` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "n", "re", "im"])?;
        for (i, row) in self.h.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                for (n, c) in v.iter().enumerate() {
                    w.serialize((i, j, n, c.re, c.im))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws every channel vector of `s`. Transmitter `i` uses its own random
/// stream, so its draws do not depend on other transmitters' antenna counts.
pub fn draw_channels(s: &Scenario, seed: u64) -> ChannelSet {
    let n_users = s.n_users();
    let mut h = Vec::with_capacity(s.n_transmitters());
    let mut shadowing_db = Vec::with_capacity(s.n_transmitters());
    for (i, t) in s.transmitters.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let mut row = Vec::with_capacity(n_users);
        let mut shadow_row = Vec::with_capacity(n_users);
        for j in 0..n_users {
            let amp = pathloss_amplitude(s.distance(i, j), s.carrier_hz);
            let v = if i == 0 {
                let theta = rng.random_range(0.0..2.0 * PI);
                shadow_row.push(0.0);
                CVector::from_fn(t.n_antennas, |_, _| rician_sample(&mut rng, s.rician_kappa, theta) * amp)
            } else {
                let x = shadowing_db_sample(&mut rng, s.shadowing_sigma_db);
                shadow_row.push(x);
                let a = amp * 10f64.powf(x / 20.0);
                CVector::from_fn(t.n_antennas, |_, _| rayleigh_sample(&mut rng) * a)
            };
            row.push(v);
        }
        h.push(row);
        shadowing_db.push(shadow_row);
    }
    ChannelSet {
        h,
        shadowing_db,
        fso_rate_bps: s.fso_rate_override.unwrap_or_else(|| fso_backhaul_rate(&s.fso)),
        noise_power_watts: noise_power(s.bandwidth_hz, s.noise_psd_dbm_hz),
        bandwidth_hz: s.bandwidth_hz,
    }
}
