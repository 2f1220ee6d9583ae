//! SINR, spectral rates, network energy efficiency and feasibility checks for a
//! slot assignment. Powers are held in mW and converted to W at evaluation.

use crate::error::{Error, Result};
use crate::scenario::{ChannelState, DeviceKind, ScenarioConfig};

/// Subchannel indicators and transmit powers for every link.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    pub num_c: usize,
    pub num_d: usize,
    pub num_subchannels: usize,
    /// `[k * N + n]`
    pub rho_c: Vec<bool>,
    /// `[m * N + n]`
    pub rho_d: Vec<bool>,
    /// mW, `[k * N + n]`
    pub power_c: Vec<f64>,
    /// mW, `[m * N + n]`
    pub power_d: Vec<f64>,
}

impl AssignmentMatrix {
    pub fn zeros(num_c: usize, num_d: usize, num_subchannels: usize) -> Self {
        Self {
            num_c,
            num_d,
            num_subchannels,
            rho_c: vec![false; num_c * num_subchannels],
            rho_d: vec![false; num_d * num_subchannels],
            power_c: vec![0.0; num_c * num_subchannels],
            power_d: vec![0.0; num_d * num_subchannels],
        }
    }

    pub fn for_config(config: &ScenarioConfig) -> Self {
        Self::zeros(config.num_cdevices, config.num_d2d_pairs, config.num_subchannels)
    }

    pub fn num_links(&self) -> usize {
        self.num_c + self.num_d
    }

    /// Builds an assignment from one optional `(subchannel, power mW)` choice per link.
    pub fn from_choices(
        num_c: usize,
        num_d: usize,
        num_subchannels: usize,
        choices: &[Option<(usize, f64)>],
    ) -> Result<Self> {
        if choices.len() != num_c + num_d {
            return Err(Error::DimensionMismatch {
                expected: num_c + num_d,
                got: choices.len(),
            });
        }
        let mut a = Self::zeros(num_c, num_d, num_subchannels);
        for (link, choice) in choices.iter().enumerate() {
            if let Some((n, p)) = *choice {
                a.set(link, n, p)?;
            }
        }
        Ok(a)
    }

    /// Switches link `link` on subchannel `n` with power `power_mw`
    /// (zero power clears the indicator).
    pub fn set(&mut self, link: usize, n: usize, power_mw: f64) -> Result<()> {
        if n >= self.num_subchannels {
            return Err(Error::IndexOutOfRange {
                what: "subchannel",
                index: n,
                len: self.num_subchannels,
            });
        }
        let on = power_mw > 0.0;
        let p = if on { power_mw } else { 0.0 };
        if link < self.num_c {
            let i = link * self.num_subchannels + n;
            self.rho_c[i] = on;
            self.power_c[i] = p;
        } else if link < self.num_links() {
            let i = (link - self.num_c) * self.num_subchannels + n;
            self.rho_d[i] = on;
            self.power_d[i] = p;
        } else {
            return Err(Error::IndexOutOfRange {
                what: "link",
                index: link,
                len: self.num_links(),
            });
        }
        Ok(())
    }

    /// Clears every indicator and power of `link`.
    pub fn clear_link(&mut self, link: usize) {
        let n_sub = self.num_subchannels;
        let (rho, pow, row) = if link < self.num_c {
            (&mut self.rho_c, &mut self.power_c, link)
        } else {
            (&mut self.rho_d, &mut self.power_d, link - self.num_c)
        };
        for n in 0..n_sub {
            rho[row * n_sub + n] = false;
            pow[row * n_sub + n] = 0.0;
        }
    }

    pub fn rho(&self, link: usize, n: usize) -> bool {
        if link < self.num_c {
            self.rho_c[link * self.num_subchannels + n]
        } else {
            self.rho_d[(link - self.num_c) * self.num_subchannels + n]
        }
    }

    /// Power in mW of `link` on subchannel `n`.
    pub fn power(&self, link: usize, n: usize) -> f64 {
        if link < self.num_c {
            self.power_c[link * self.num_subchannels + n]
        } else {
            self.power_d[(link - self.num_c) * self.num_subchannels + n]
        }
    }

    /// Total transmit power of `link` in mW.
    pub fn link_power_mw(&self, link: usize) -> f64 {
        (0..self.num_subchannels).map(|n| self.power(link, n)).sum()
    }

    /// Subchannels currently used by `link`.
    pub fn subchannels_of(&self, link: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_subchannels).filter(move |&n| self.rho(link, n))
    }

    /// Whether any link other than `exclude` occupies subchannel `n`.
    pub fn occupied_by_other(&self, n: usize, exclude: usize) -> bool {
        (0..self.num_links()).any(|l| l != exclude && self.rho(l, n))
    }
}

/// Per-link spectral rates and per-(link, subchannel) linear SINRs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRates {
    pub rate_c: Vec<f64>,
    pub rate_d: Vec<f64>,
    /// `[link * N + n]`, zero where the link is not assigned.
    pub sinr_per_subchannel: Vec<f64>,
    pub num_subchannels: usize,
}

impl LinkRates {
    pub fn rate(&self, link: usize) -> f64 {
        if link < self.rate_c.len() {
            self.rate_c[link]
        } else {
            self.rate_d[link - self.rate_c.len()]
        }
    }

    pub fn sinr(&self, link: usize, n: usize) -> f64 {
        self.sinr_per_subchannel[link * self.num_subchannels + n]
    }

    pub fn total_rate(&self) -> f64 {
        self.rate_c.iter().chain(&self.rate_d).sum()
    }
}

fn check_index(what: &'static str, index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { what, index, len })
    }
}

/// Uplink SINR of C-device `k` on subchannel `n` at the base station.
pub fn sinr_cellular(
    k: usize,
    n: usize,
    a: &AssignmentMatrix,
    ch: &ChannelState,
    config: &ScenarioConfig,
) -> Result<f64> {
    check_index("C-device", k, a.num_c)?;
    check_index("subchannel", n, a.num_subchannels)?;
    let n_sub = a.num_subchannels;
    let p = a.power_c[k * n_sub + n] * 1e-3;
    if p == 0.0 {
        return Ok(0.0);
    }
    let interference: f64 = (0..a.num_d)
        .filter(|&m| a.rho_d[m * n_sub + n])
        .map(|m| a.power_d[m * n_sub + n] * 1e-3 * ch.g_db[m])
        .sum();
    Ok(p * ch.h_c[k] / (interference + config.noise_power_w()))
}

/// SINR at the receiver of D2D pair `m` on subchannel `n`. The cellular term is
/// zero when no C-device occupies `n`.
pub fn sinr_d2d(
    m: usize,
    n: usize,
    a: &AssignmentMatrix,
    ch: &ChannelState,
    config: &ScenarioConfig,
) -> Result<f64> {
    check_index("D2D pair", m, a.num_d)?;
    check_index("subchannel", n, a.num_subchannels)?;
    let n_sub = a.num_subchannels;
    let p = a.power_d[m * n_sub + n] * 1e-3;
    if p == 0.0 {
        return Ok(0.0);
    }
    let from_c: f64 = (0..a.num_c)
        .filter(|&k| a.rho_c[k * n_sub + n])
        .map(|k| a.power_c[k * n_sub + n] * 1e-3 * ch.g_cd(k, m))
        .sum();
    let from_d: f64 = (0..a.num_d)
        .filter(|&o| o != m && a.rho_d[o * n_sub + n])
        .map(|o| a.power_d[o * n_sub + n] * 1e-3 * ch.g_dd(o, m))
        .sum();
    Ok(p * ch.h_d[m] / (from_c + from_d + config.noise_power_w()))
}

/// Rates `R = Σ_n ρ log2(1 + SINR)` for every link.
pub fn link_rates(a: &AssignmentMatrix, ch: &ChannelState, config: &ScenarioConfig) -> LinkRates {
    let n_sub = a.num_subchannels;
    let z = a.num_links();
    let mut sinr = vec![0.0; z * n_sub];
    let mut rate_c = vec![0.0; a.num_c];
    let mut rate_d = vec![0.0; a.num_d];
    for n in 0..n_sub {
        let any = (0..z).any(|l| a.rho(l, n));
        if !any {
            continue;
        }
        for k in 0..a.num_c {
            if a.rho_c[k * n_sub + n] {
                let s = sinr_cellular(k, n, a, ch, config).unwrap_or(0.0);
                sinr[k * n_sub + n] = s;
                rate_c[k] += (1.0 + s).log2();
            }
        }
        for m in 0..a.num_d {
            if a.rho_d[m * n_sub + n] {
                let s = sinr_d2d(m, n, a, ch, config).unwrap_or(0.0);
                sinr[(a.num_c + m) * n_sub + n] = s;
                rate_d[m] += (1.0 + s).log2();
            }
        }
    }
    LinkRates {
        rate_c,
        rate_d,
        sinr_per_subchannel: sinr,
        num_subchannels: n_sub,
    }
}

/// Total transmit power of all links in W.
pub fn total_transmit_power_w(a: &AssignmentMatrix) -> f64 {
    let c: f64 = a
        .rho_c
        .iter()
        .zip(&a.power_c)
        .filter(|(r, _)| **r)
        .map(|(_, p)| p)
        .sum();
    let d: f64 = a
        .rho_d
        .iter()
        .zip(&a.power_d)
        .filter(|(r, _)| **r)
        .map(|(_, p)| p)
        .sum();
    (c + d) * 1e-3
}

/// Network EE: summed spectral rate over total transmit power plus `Z · P_cir`
/// (bps/Hz/W).
pub fn network_ee(a: &AssignmentMatrix, rates: &LinkRates, config: &ScenarioConfig) -> f64 {
    let denom = total_transmit_power_w(a) + a.num_links() as f64 * config.circuit_power_w();
    rates.total_rate() / denom
}

/// Pass/fail per feasibility constraint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintReport {
    /// Indicators are binary. Holds by construction of [`AssignmentMatrix`].
    pub binary: bool,
    /// At most one C-device per subchannel.
    pub cellular_exclusive: bool,
    /// Per-C-device power sum within its limit.
    pub power_c: bool,
    /// Per-D2D power sum within its limit.
    pub power_d: bool,
    /// Power is zero wherever the indicator is zero, and non-negative.
    pub power_consistent: bool,
    pub violations: Vec<String>,
}

impl ConstraintReport {
    pub fn all_ok(&self) -> bool {
        self.binary && self.cellular_exclusive && self.power_c && self.power_d && self.power_consistent
    }
}

pub fn check_constraints(a: &AssignmentMatrix, config: &ScenarioConfig) -> ConstraintReport {
    let n_sub = a.num_subchannels;
    let mut report = ConstraintReport {
        binary: true,
        cellular_exclusive: true,
        power_c: true,
        power_d: true,
        power_consistent: true,
        violations: Vec::new(),
    };
    for n in 0..n_sub {
        let users: Vec<usize> = (0..a.num_c).filter(|&k| a.rho_c[k * n_sub + n]).collect();
        if users.len() > 1 {
            report.cellular_exclusive = false;
            report
                .violations
                .push(format!("subchannel {n} shared by C-devices {users:?}"));
        }
    }
    // Tiny slack absorbs summation rounding of exactly-at-limit powers.
    let slack = 1e-9;
    for link in 0..a.num_links() {
        let kind = if link < a.num_c {
            DeviceKind::Cellular
        } else {
            DeviceKind::D2d
        };
        let limit = config.max_power_mw(kind);
        let total = a.link_power_mw(link);
        if total > limit + slack {
            match kind {
                DeviceKind::Cellular => report.power_c = false,
                DeviceKind::D2d => report.power_d = false,
            }
            report
                .violations
                .push(format!("link {link} power {total} mW exceeds {limit} mW"));
        }
        for n in 0..n_sub {
            let p = a.power(link, n);
            if p < 0.0 || !p.is_finite() || (!a.rho(link, n) && p != 0.0) {
                report.power_consistent = false;
                report
                    .violations
                    .push(format!("link {link} subchannel {n} has inconsistent power {p}"));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_topology, sample_channel};
    use proptest::prelude::*;

    fn chan(num_c: usize, num_d: usize, fill: f64) -> ChannelState {
        ChannelState {
            num_c,
            num_d,
            h_c: vec![fill; num_c],
            h_d: vec![fill; num_d],
            g_cd: vec![fill; num_c * num_d],
            g_db: vec![fill; num_d],
            g_dd: vec![fill; num_d * num_d],
        }
    }

    fn cfg(num_c: usize, num_d: usize, n: usize) -> ScenarioConfig {
        ScenarioConfig {
            num_cdevices: num_c,
            num_d2d_pairs: num_d,
            num_subchannels: n,
            ..Default::default()
        }
    }

    #[test]
    fn zero_power_gives_zero_sinr() {
        let c = cfg(1, 0, 1);
        let a = AssignmentMatrix::for_config(&c);
        assert_eq!(sinr_cellular(0, 0, &a, &chan(1, 0, 1e-9), &c).unwrap(), 0.0);
    }

    #[test]
    fn signal_equal_to_noise_gives_unit_sinr() {
        let c = cfg(1, 1, 2);
        let noise = c.noise_power_w();
        let mut ch = chan(1, 1, 1e-9);
        // 100 mW * h = noise
        ch.h_c[0] = noise / 0.1;
        ch.h_d[0] = noise / 0.1;
        let mut a = AssignmentMatrix::for_config(&c);
        a.set(0, 0, 100.0).unwrap();
        a.set(1, 1, 100.0).unwrap();
        assert!((sinr_cellular(0, 0, &a, &ch, &c).unwrap() - 1.0).abs() < 1e-12);
        assert!((sinr_d2d(0, 1, &a, &ch, &c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cellular_sinr_hand_evaluation() {
        let mut c = cfg(1, 1, 1);
        c.noise_power_dbm = 10.0 * (-14.3f64) + 30.0; // 10^-14.3 W
        let mut ch = chan(1, 1, 0.0);
        ch.h_c[0] = 1e-9;
        ch.g_db[0] = 1e-11;
        let mut a = AssignmentMatrix::for_config(&c);
        a.set(0, 0, 200.0).unwrap();
        a.set(1, 0, 100.0).unwrap();
        let expected = (0.2 * 1e-9) / (0.1 * 1e-11 + 10f64.powf(-14.3));
        let got = sinr_cellular(0, 0, &a, &ch, &c).unwrap();
        assert!((got - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn second_d2d_interferer_lowers_sinr() {
        let c = cfg(0, 3, 1);
        let ch = chan(0, 3, 1e-10);
        let mut a = AssignmentMatrix::for_config(&c);
        a.set(0, 0, 100.0).unwrap();
        a.set(1, 0, 100.0).unwrap();
        let one = sinr_d2d(0, 0, &a, &ch, &c).unwrap();
        a.set(2, 0, 100.0).unwrap();
        let two = sinr_d2d(0, 0, &a, &ch, &c).unwrap();
        assert!(two < one);
    }

    #[test]
    fn three_links_on_one_subchannel_brute_force() {
        // C-device 0 and D2D pairs 0, 1 share subchannel 0.
        let c = cfg(1, 2, 1);
        let ch = ChannelState {
            num_c: 1,
            num_d: 2,
            h_c: vec![3e-10],
            h_d: vec![2e-8, 5e-9],
            g_cd: vec![4e-12, 7e-13],
            g_db: vec![1e-12, 2e-12],
            g_dd: vec![2e-8, 3e-12, 6e-12, 5e-9],
        };
        let mut a = AssignmentMatrix::for_config(&c);
        a.set(0, 0, 500.0).unwrap();
        a.set(1, 0, 150.0).unwrap();
        a.set(2, 0, 300.0).unwrap();
        let noise = 10f64.powf((-114.0 - 30.0) / 10.0);
        let (pc, p0, p1) = (0.5, 0.15, 0.3);
        let want_d0 = p0 * 2e-8 / (pc * 4e-12 + p1 * 6e-12 + noise);
        let want_d1 = p1 * 5e-9 / (pc * 7e-13 + p0 * 3e-12 + noise);
        let want_c = pc * 3e-10 / (p0 * 1e-12 + p1 * 2e-12 + noise);
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        assert!(rel(sinr_d2d(0, 0, &a, &ch, &c).unwrap(), want_d0) < 1e-12);
        assert!(rel(sinr_d2d(1, 0, &a, &ch, &c).unwrap(), want_d1) < 1e-12);
        assert!(rel(sinr_cellular(0, 0, &a, &ch, &c).unwrap(), want_c) < 1e-12);
    }

    #[test]
    fn out_of_range_indices_are_errors() {
        let c = cfg(1, 1, 2);
        let a = AssignmentMatrix::for_config(&c);
        let ch = chan(1, 1, 1e-9);
        assert!(sinr_cellular(1, 0, &a, &ch, &c).is_err());
        assert!(sinr_d2d(0, 2, &a, &ch, &c).is_err());
    }

    #[test]
    fn rates_follow_log2() {
        let c = cfg(1, 0, 2);
        let noise = c.noise_power_w();
        let mut ch = chan(1, 0, 0.0);
        ch.h_c[0] = noise / 0.1;
        let mut a = AssignmentMatrix::for_config(&c);
        a.set(0, 0, 100.0).unwrap();
        let r = link_rates(&a, &ch, &c);
        assert!((r.rate_c[0] - 1.0).abs() < 1e-12);

        ch.h_c[0] = 3.0 * noise / 0.1;
        a.set(0, 1, 100.0).unwrap();
        let r = link_rates(&a, &ch, &c);
        assert!((r.rate_c[0] - 4.0).abs() < 1e-12);

        let zero = AssignmentMatrix::for_config(&c);
        assert_eq!(link_rates(&zero, &ch, &c).total_rate(), 0.0);
    }

    #[test]
    fn ee_with_circuit_power_only() {
        let c = cfg(2, 1, 1);
        let a = AssignmentMatrix::for_config(&c);
        let rates = LinkRates {
            rate_c: vec![1.0, 2.0],
            rate_d: vec![3.0],
            sinr_per_subchannel: vec![0.0; 3],
            num_subchannels: 1,
        };
        let ee = network_ee(&a, &rates, &c);
        assert!((ee - 6.0 / (3.0 * 0.05)).abs() < 1e-12);
        let doubled = LinkRates {
            rate_c: vec![2.0, 4.0],
            rate_d: vec![6.0],
            ..rates
        };
        assert!((network_ee(&a, &doubled, &c) - 2.0 * ee).abs() < 1e-9);
    }

    #[test]
    fn ee_five_link_recount() {
        let c = cfg(3, 2, 4);
        let topo = generate_topology(&c).unwrap();
        let ch = sample_channel(&topo, &c, 3);
        let picks = [
            Some((0, 500.0)),
            Some((1, 150.0)),
            None,
            Some((0, 50.0)),
            Some((3, 300.0)),
        ];
        let a = AssignmentMatrix::from_choices(3, 2, 4, &picks).unwrap();
        let rates = link_rates(&a, &ch, &c);
        let sum_rate: f64 = (0..5).map(|l| rates.rate(l)).sum();
        let sum_power_w = (500.0 + 150.0 + 50.0 + 300.0) / 1000.0;
        let want = sum_rate / (sum_power_w + 5.0 * 0.05);
        assert!((network_ee(&a, &rates, &c) - want).abs() < 1e-12 * want.max(1.0));
    }

    #[test]
    fn constraint_checks() {
        let c = cfg(2, 1, 2);
        let mut a = AssignmentMatrix::for_config(&c);
        assert!(check_constraints(&a, &c).all_ok());
        a.set(0, 0, 100.0).unwrap();
        a.set(1, 0, 100.0).unwrap();
        let r = check_constraints(&a, &c);
        assert!(!r.cellular_exclusive);

        let mut a = AssignmentMatrix::for_config(&c);
        a.set(0, 0, 300.0).unwrap();
        a.set(0, 1, 201.0).unwrap();
        let r = check_constraints(&a, &c);
        assert!(!r.power_c && r.cellular_exclusive);
    }

    fn random_assignment() -> impl Strategy<Value = (Vec<Option<(usize, usize)>>, u64)> {
        (
            proptest::collection::vec(proptest::option::of((0usize..3, 0usize..4)), 5),
            any::<u64>(),
        )
    }

    proptest! {
        #[test]
        fn sinr_non_increasing_in_other_power((picks, seed) in random_assignment(), victim in 0usize..5, other in 0usize..5, bump in 1.0f64..400.0) {
            let mut c = cfg(2, 3, 3);
            c.rng_seed = seed;
            let topo = generate_topology(&c).unwrap();
            let ch = sample_channel(&topo, &c, 0);
            let levels = c.power_levels_mw.clone();
            let choices: Vec<_> = picks.iter().map(|p| p.map(|(n, l)| (n, levels[l]))).collect();
            let a = AssignmentMatrix::from_choices(2, 3, 3, &choices).unwrap();
            prop_assume!(victim != other);
            if let (Some((n, _)), Some((no, po))) = (choices[victim], choices[other]) {
                let before = link_rates(&a, &ch, &c).sinr(victim, n);
                let mut b = a.clone();
                b.set(other, no, po + bump).unwrap();
                let after = link_rates(&b, &ch, &c).sinr(victim, n);
                prop_assert!(after <= before * (1.0 + 1e-12));
            }
        }

        #[test]
        fn ee_invariant_under_link_permutation(rates in proptest::collection::vec(0.0f64..20.0, 4), perm_seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let c = cfg(0, 4, 4);
            let powers = [50.0, 150.0, 300.0, 500.0];
            let mut idx: Vec<usize> = (0..4).collect();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
            idx.shuffle(&mut rng);
            let build = |order: &[usize]| {
                let choices: Vec<_> = order.iter().map(|&i| Some((i, powers[i]))).collect();
                let a = AssignmentMatrix::from_choices(0, 4, 4, &choices).unwrap();
                let r = LinkRates {
                    rate_c: vec![],
                    rate_d: order.iter().map(|&i| rates[i]).collect(),
                    sinr_per_subchannel: vec![0.0; 16],
                    num_subchannels: 4,
                };
                network_ee(&a, &r, &c)
            };
            let base = build(&[0, 1, 2, 3]);
            let perm = build(&idx);
            prop_assert!((base - perm).abs() <= 1e-12 * base.abs().max(1.0));
        }
    }
}
