//! Latency and reliability constraints of URLLC links: the lower Lambert-W
//! branch, the latency-to-rate bound, and a packet-level queue simulation used
//! to validate that bound.

use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::scenario::{stream_rng, LinkProfile, QosThresholds, ScenarioConfig, Service, StreamTag};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Lower real branch `W₋₁(x)` for `x ∈ [−1/e, 0)`; returns `w ≤ −1` with
/// `w·e^w = x`.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    // A few ulp of slack below -1/e so that the rounded constant is accepted.
    let branch = -INV_E;
    if x.is_nan() || x >= 0.0 || x < branch - 4.0 * f64::EPSILON {
        return Err(Error::Domain(format!(
            "lambert_w_minus1 argument {x} outside [-1/e, 0)"
        )));
    }
    let x = x.max(branch);
    let g = |w: f64| w * w.exp();

    let dist = std::f64::consts::E * x + 1.0;
    let mut w = if dist < 0.25 {
        // Series about the branch point.
        let p = -(2.0 * dist.max(0.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p - 43.0 / 540.0 * p.powi(4)
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    if dist <= 0.0 {
        return Ok(-1.0);
    }

    // g is strictly decreasing on (-inf, -1]: g(lo) > x >= g(hi).
    let hi0 = -1.0;
    let mut lo = -2.0;
    while g(lo) <= x {
        lo *= 2.0;
    }
    let mut hi = hi0;
    w = w.clamp(lo, hi);

    for _ in 0..200 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            return Ok(w);
        }
        if f > 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let wp1 = w + 1.0;
        let candidate = if wp1 != 0.0 {
            let fp = ew * wp1;
            let denom = fp - (w + 2.0) * f / (2.0 * wp1);
            if denom != 0.0 && denom.is_finite() {
                w - f / denom
            } else {
                f64::NAN
            }
        } else {
            f64::NAN
        };
        let next = if candidate.is_finite() && candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - w).abs();
        w = next;
        if step <= 4.0 * f64::EPSILON * w.abs() || (hi - lo) <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    Ok(w)
}

/// Quantities of the latency-to-rate bound for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrllcBound {
    pub f_i: f64,
    pub w_argument: f64,
    /// bps/Hz
    pub rate_min_urllc: f64,
}

/// Minimum spectral rate that keeps the latency-violation probability of a
/// URLLC link below `qos.p_latency_max`.
///
/// The bound is applied to the queueing and transmission budget `T_max − T_pc`,
/// since every packet also pays the processing delay. `λ·T` is formed in
/// packets by converting `T` to slots. At `λ = 0` the continuous limit `F = −1`
/// is used.
pub fn min_rate_urllc(profile: &LinkProfile, config: &ScenarioConfig) -> Result<UrllcBound> {
    if profile.service != Service::Urllc {
        return Err(Error::Domain(format!(
            "link {} is not a URLLC link",
            profile.link_id
        )));
    }
    min_rate_from_parts(
        profile.arrival_rate,
        profile.mean_packet_bits,
        &profile.qos,
        config.subchannel_bandwidth_hz,
        config.slot_duration_s,
    )
}

pub fn min_rate_from_parts(
    arrival_rate_per_slot: f64,
    mean_packet_bits: f64,
    qos: &QosThresholds,
    bandwidth_hz: f64,
    slot_duration_s: f64,
) -> Result<UrllcBound> {
    let t_max = qos.latency_max_s - qos.t_pc_s;
    let p = qos.p_latency_max;
    if !(arrival_rate_per_slot >= 0.0) || !arrival_rate_per_slot.is_finite() {
        return Err(Error::Domain(format!("arrival rate {arrival_rate_per_slot}")));
    }
    if !(t_max > 0.0) || !(mean_packet_bits > 0.0) || !(bandwidth_hz > 0.0) {
        return Err(Error::Domain(
            "latency budget after processing, packet size and bandwidth must be positive".into(),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p_latency_max = {p} outside (0, 1)")));
    }
    let lt = arrival_rate_per_slot * t_max / slot_duration_s;
    let f_i = if lt == 0.0 { -1.0 } else { -lt / lt.exp_m1() };
    let w_argument = p * f_i * f_i.exp();
    if !(w_argument >= -INV_E && w_argument < 0.0) {
        return Err(Error::Domain(format!(
            "infeasible latency target: Lambert argument {w_argument} outside [-1/e, 0)"
        )));
    }
    let w = lambert_w_minus1(w_argument)?;
    let rate_min_urllc = mean_packet_bits / (bandwidth_hz * t_max) * (f_i - w);
    if !(rate_min_urllc > 0.0) || !rate_min_urllc.is_finite() {
        return Err(Error::Domain(format!("degenerate rate bound {rate_min_urllc}")));
    }
    Ok(UrllcBound {
        f_i,
        w_argument,
        rate_min_urllc,
    })
}

/// `bits / (W·rate) + queue_wait + T_pc` in seconds; infinite for a zero rate.
pub fn total_latency(bits: f64, rate: f64, queue_wait_s: f64, config: &ScenarioConfig) -> f64 {
    let t_pc = config.qos.t_pc_s;
    if bits == 0.0 {
        return queue_wait_s + t_pc;
    }
    if !(rate > 0.0) {
        return f64::INFINITY;
    }
    bits / (config.subchannel_bandwidth_hz * rate) + queue_wait_s + t_pc
}

/// Per-slot reliability event: the received SINR reaches the threshold.
pub fn reliability_ok(sinr: f64, qos: &QosThresholds) -> bool {
    sinr >= qos.sinr_min_linear()
}

/// Result of a queue simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub packets: u64,
    pub violations: u64,
}

impl OracleReport {
    pub fn probability(&self) -> f64 {
        if self.packets == 0 {
            0.0
        } else {
            self.violations as f64 / self.packets as f64
        }
    }

    /// Monte-Carlo standard error of an estimate of `p` from this many packets.
    pub fn standard_error(&self, p: f64) -> f64 {
        if self.packets == 0 {
            0.0
        } else {
            (p * (1.0 - p) / self.packets as f64).sqrt()
        }
    }
}

/// FIFO queue with Poisson arrivals (rate `λ` per slot), exponential packet
/// sizes of mean `L̄` and a server of `W·rate` bits per second. Each packet's
/// latency is its sojourn time plus `T_pc`; the report counts packets whose
/// latency exceeds `T_max`.
pub fn queue_latency_simulation(
    profile: &LinkProfile,
    rate: f64,
    config: &ScenarioConfig,
    num_slots: u64,
    seed: u64,
) -> OracleReport {
    let lambda = profile.arrival_rate;
    let mut report = OracleReport {
        packets: 0,
        violations: 0,
    };
    if !(lambda > 0.0) || num_slots == 0 {
        return report;
    }
    let slot = config.slot_duration_s;
    let horizon = num_slots as f64 * slot;
    let t_pc = profile.qos.t_pc_s;
    let t_max = profile.qos.latency_max_s;
    let service_bps = config.subchannel_bandwidth_hz * rate;
    let gap = Exp::new(lambda / slot).expect("positive rate");
    let size = Exp::new(1.0 / profile.mean_packet_bits).expect("positive size");
    let mut rng = stream_rng(seed, StreamTag::Oracle, profile.link_id as u64);

    let mut now = 0.0f64;
    let mut server_free = 0.0f64;
    loop {
        now += gap.sample(&mut rng);
        if now >= horizon {
            break;
        }
        let bits: f64 = size.sample(&mut rng);
        let sojourn = if service_bps.is_infinite() {
            0.0
        } else {
            let start = now.max(server_free);
            server_free = start + bits / service_bps;
            server_free - now
        };
        report.packets += 1;
        if sojourn + t_pc > t_max {
            report.violations += 1;
        }
    }
    report
}

/// Empirical latency-violation probability; zero when no packet arrives.
pub fn queue_latency_oracle(
    profile: &LinkProfile,
    rate: f64,
    config: &ScenarioConfig,
    num_slots: u64,
    seed: u64,
) -> f64 {
    queue_latency_simulation(profile, rate, config, num_slots, seed).probability()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::DeviceKind;
    use proptest::prelude::*;
    use rand::Rng;

    /// Plain bisection on w·e^w over [-50, -1].
    fn bisect_w(x: f64) -> f64 {
        let (mut lo, mut hi) = (-50.0f64, -1.0f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn urllc_profile(lambda: f64, bits: f64, t_max: f64, p: f64) -> LinkProfile {
        LinkProfile {
            link_id: 0,
            kind: DeviceKind::Cellular,
            service: Service::Urllc,
            arrival_rate: lambda,
            mean_packet_bits: bits,
            qos: QosThresholds {
                latency_max_s: t_max,
                p_latency_max: p,
                p_outage_max: p,
                ..Default::default()
            },
        }
    }

    #[test]
    fn branch_point() {
        assert_eq!(lambert_w_minus1(-INV_E).unwrap(), -1.0);
        assert_eq!(lambert_w_minus1(-(-1.0f64).exp()).unwrap(), -1.0);
    }

    #[test]
    fn matches_bisection_oracle() {
        let want = bisect_w(-0.1);
        let got = lambert_w_minus1(-0.1).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - (-3.577152063957297)).abs() < 1e-12);
    }

    #[test]
    fn round_trip_over_w() {
        let mut rng = stream_rng(5, StreamTag::Oracle, 0);
        for _ in 0..1000 {
            let w: f64 = rng.gen_range(-30.0..-1.0);
            let back = lambert_w_minus1(w * w.exp()).unwrap();
            assert!((back - w).abs() <= 1e-9, "w {w} back {back}");
        }
    }

    #[test]
    fn dense_residual_sweep() {
        let n = 20_000;
        for i in 0..=n {
            let x = -INV_E * (1.0 - i as f64 / (n as f64 + 1.0));
            let w = lambert_w_minus1(x).unwrap();
            assert!(w <= -1.0);
            assert!((w * w.exp() - x).abs() <= 1e-12, "x {x}");
        }
    }

    #[test]
    fn domain_errors() {
        for x in [0.0, 0.5, -0.4, f64::NAN, -1.0] {
            assert!(matches!(lambert_w_minus1(x), Err(Error::Domain(_))), "x {x}");
        }
        // tiny negative arguments are valid
        let w = lambert_w_minus1(-1e-300).unwrap();
        assert!((w * w.exp() + 1e-300).abs() <= 1e-12);
    }

    #[test]
    fn f_is_negative() {
        for lambda in [1e-4, 0.03, 0.5, 3.0] {
            let b = min_rate_from_parts(lambda, 8192.0, &QosThresholds::default(), 1e6, 1e-3)
                .unwrap();
            assert!(b.f_i < 0.0);
            assert!(b.w_argument >= -INV_E && b.w_argument < 0.0);
            assert!(b.rate_min_urllc > 0.0);
        }
    }

    #[test]
    fn rejects_normal_links() {
        let mut p = urllc_profile(0.03, 8192.0, 5e-3, 1e-5);
        p.service = Service::Normal;
        assert!(min_rate_urllc(&p, &ScenarioConfig::default()).is_err());
    }

    #[test]
    fn rate_bound_decreases_with_deadline() {
        let cfg = ScenarioConfig::default();
        let mut prev = f64::INFINITY;
        for ms in 1..=10 {
            let p = urllc_profile(0.03, 8192.0, ms as f64 * 1e-3, 1e-5);
            let r = min_rate_urllc(&p, &cfg).unwrap().rate_min_urllc;
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn processing_delay_shrinks_the_budget() {
        let q = QosThresholds::default();
        let no_pc = QosThresholds {
            t_pc_s: 0.0,
            latency_max_s: q.latency_max_s - q.t_pc_s,
            ..q.clone()
        };
        let a = min_rate_from_parts(0.03, 8192.0, &q, 1e6, 1e-3).unwrap();
        let b = min_rate_from_parts(0.03, 8192.0, &no_pc, 1e6, 1e-3).unwrap();
        assert!((a.rate_min_urllc - b.rate_min_urllc).abs() < 1e-12);
        let wide = QosThresholds {
            t_pc_s: 0.0,
            ..q.clone()
        };
        assert!(min_rate_from_parts(0.03, 8192.0, &wide, 1e6, 1e-3).unwrap().rate_min_urllc < a.rate_min_urllc);
    }

    #[test]
    fn monotone_in_all_inputs() {
        let base = |lambda: f64, bits: f64, t: f64, p: f64| {
            let q = QosThresholds {
                latency_max_s: t,
                p_latency_max: p,
                ..Default::default()
            };
            min_rate_from_parts(lambda, bits, &q, 1e6, 1e-3)
                .unwrap()
                .rate_min_urllc
        };
        let lambdas = [0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0];
        for w in lambdas.windows(2) {
            assert!(base(w[1], 8192.0, 5e-3, 1e-5) >= base(w[0], 8192.0, 5e-3, 1e-5));
        }
        for w in [1024.0, 4096.0, 8192.0, 16384.0].windows(2) {
            assert!(base(0.03, w[1], 5e-3, 1e-5) >= base(0.03, w[0], 5e-3, 1e-5));
        }
        for w in [1e-7, 1e-5, 1e-3, 1e-1].windows(2) {
            assert!(base(0.03, 8192.0, 5e-3, w[1]) <= base(0.03, 8192.0, 5e-3, w[0]));
        }
    }

    #[test]
    fn latency_decomposition() {
        let cfg = ScenarioConfig {
            subchannel_bandwidth_hz: 1e6,
            ..Default::default()
        };
        // W·rate = 1e9 bps
        let t = total_latency(1e6, 1000.0, 0.0, &cfg);
        assert!((t - 1.3e-3).abs() < 1e-15);
        assert_eq!(total_latency(0.0, 5.0, 0.0, &cfg), cfg.qos.t_pc_s);
        let t1 = total_latency(8192.0, 2.0, 1e-3, &cfg);
        let t2 = total_latency(8192.0, 4.0, 1e-3, &cfg);
        let tx1 = t1 - 1e-3 - cfg.qos.t_pc_s;
        let tx2 = t2 - 1e-3 - cfg.qos.t_pc_s;
        assert!((tx1 / tx2 - 2.0).abs() < 1e-9);
        assert!(total_latency(10.0, 0.0, 0.0, &cfg).is_infinite());
    }

    #[test]
    fn reliability_boundary() {
        let q = QosThresholds::default();
        assert!(reliability_ok(q.sinr_min_linear(), &q));
        assert!(!reliability_ok(0.0, &q));
        assert!(reliability_ok(3.2, &q));
        assert!(!reliability_ok(3.1, &q));
    }

    #[test]
    fn oracle_trivial_cases() {
        let cfg = ScenarioConfig::default();
        let p = urllc_profile(0.0, 8192.0, 5e-3, 1e-3);
        assert_eq!(queue_latency_oracle(&p, 10.0, &cfg, 100_000, 1), 0.0);
        let p = urllc_profile(0.3, 8192.0, 5e-3, 1e-3);
        assert_eq!(queue_latency_oracle(&p, f64::INFINITY, &cfg, 100_000, 1), 0.0);
    }

    #[test]
    fn bound_is_sufficient_at_table_point() {
        let cfg = ScenarioConfig::default();
        let p = urllc_profile(0.03, 8192.0, 5e-3, 1e-5);
        let rate = min_rate_urllc(&p, &cfg).unwrap().rate_min_urllc;
        let rep = queue_latency_simulation(&p, rate, &cfg, 1_000_000, 11);
        let limit = 1e-5 + 3.0 * rep.standard_error(1e-5);
        assert!(rep.probability() <= limit, "{rep:?}");
    }

    #[test]
    fn bound_is_sufficient_at_loose_target() {
        let cfg = ScenarioConfig::default();
        let p = urllc_profile(0.3, 8192.0, 5e-3, 1e-3);
        let rate = min_rate_urllc(&p, &cfg).unwrap().rate_min_urllc;
        let rep = queue_latency_simulation(&p, rate, &cfg, 1_000_000, 3);
        assert!(rep.probability() <= 1e-3 * 1.5, "{rep:?}");
        // Halving the rate should visibly break the target.
        let slow = queue_latency_simulation(&p, rate / 4.0, &cfg, 1_000_000, 3);
        assert!(slow.probability() > 1e-3);
    }

    proptest! {
        #[test]
        fn residual_within_tolerance(u in 0.0f64..1.0) {
            let x = -INV_E * (1.0 - u).max(1e-300);
            prop_assume!(x < 0.0);
            let w = lambert_w_minus1(x).unwrap();
            prop_assert!((w * w.exp() - x).abs() <= 1e-12);
            prop_assert!(w <= -1.0);
        }
    }
}
