//! Downlink QoS planning end to end: finite-blocklength rate targets,
//! sensor/broadband pairing, minimal per-cluster power splits, and
//! greedy admission under a total power budget.
//!
//! Run with: `cargo run -p noma-mc --example downlink_planning`

use noma_mc::downlink::{
    fb_rate, maximize_connectivity, plan_clusters, required_sensor_sinr, BroadbandProfile,
    SensorProfile,
};

fn main() {
    // The short-packet penalty: achievable rate vs blocklength at the
    // same SINR and reliability.
    let (gamma, delta) = (1.0, 1e-5);
    println!("Achievable rate at SINR {gamma}, decoding error {delta}:");
    for n in [50u64, 100, 500, 5_000, 1_000_000_000] {
        println!(
            "  n = {n:>10} channel uses -> {:.4} bits/s/Hz",
            fb_rate(gamma, n, delta).unwrap()
        );
    }
    println!("  (Shannon limit {:.4})\n", (1.0 + gamma).log2());

    let sensors = vec![
        SensorProfile {
            payload_bits: 100.0,
            blocklength: 100,
            decoding_error: 1e-5,
            channel_gain: 0.50,
        },
        SensorProfile {
            payload_bits: 60.0,
            blocklength: 120,
            decoding_error: 1e-7,
            channel_gain: 0.35,
        },
        SensorProfile {
            payload_bits: 40.0,
            blocklength: 80,
            decoding_error: 1e-3,
            channel_gain: 0.20,
        },
        SensorProfile {
            payload_bits: 200.0,
            blocklength: 150,
            decoding_error: 1e-5,
            channel_gain: 0.90,
        },
    ];
    let broadbands = vec![
        BroadbandProfile {
            target_rate: 2.0,
            channel_gain: 2.5,
        },
        BroadbandProfile {
            target_rate: 1.5,
            channel_gain: 0.8,
        },
        BroadbandProfile {
            target_rate: 3.0,
            channel_gain: 4.0,
        },
    ];

    println!("Sensor SINR demands (max of plain threshold and short-packet requirement):");
    for (i, s) in sensors.iter().enumerate() {
        let gamma = required_sensor_sinr(s.payload_bits, s.blocklength, s.decoding_error).unwrap();
        println!(
            "  sensor {i}: {} bits / {} uses @ {:.0e} -> needs SINR {gamma:.3}",
            s.payload_bits, s.blocklength, s.decoding_error
        );
    }

    let (plans, pairing) = plan_clusters(&sensors, &broadbands).unwrap();
    println!("\nClusters (each sensor takes the weakest broadband partner that still");
    println!("out-gains it, so the sensor can be decoded first at both receivers):");
    for (idx, plan) in plans.iter().enumerate() {
        println!(
            "  cluster {idx}: sensor {} (gain {:.2}) + broadband {} (gain {:.2}) \
             -> p_s {:.3}, p_b {:.3}, total {:.3}",
            plan.sensor,
            plan.sensor_gain,
            plan.broadband,
            plan.broadband_gain,
            plan.split.p_sensor,
            plan.split.p_broadband,
            plan.split.required_total,
        );
    }
    if !pairing.unpaired_sensors.is_empty() || !pairing.unpaired_broadbands.is_empty() {
        println!(
            "  unpaired: sensors {:?}, broadbands {:?}",
            pairing.unpaired_sensors, pairing.unpaired_broadbands
        );
    }

    for budget in [2.0, 6.0, 30.0] {
        let admitted = maximize_connectivity(&plans, budget);
        let spent: f64 = admitted
            .iter()
            .map(|&i| plans[i].split.required_total)
            .sum();
        println!(
            "\nbudget {budget:>5.1}: admit clusters {admitted:?} ({} of {}, power used {spent:.3})",
            admitted.len(),
            plans.len()
        );
    }
}
