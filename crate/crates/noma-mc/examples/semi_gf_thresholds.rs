//! Single-ORB semi-grant-free access: what the base station broadcasts
//! (MTP and MTI) for a realized GB channel, and what the thresholds do
//! to connectivity and GB safety over many slots.
//!
//! Run with: `cargo run -p noma-mc --example semi_gf_thresholds`

use noma_mc::channel::{db_to_linear, FadingModel, RngStream};
use noma_mc::semigf::{
    compute_mti, compute_mtp, run_single_orb_slot, BroadcastThreshold, DelayClass, GbUser,
    GfPopulation, MtiMode,
};

fn main() {
    // Threshold arithmetic for one realized GB SNR.
    let alpha_gb = 10.0;
    let (eps_gb, eps_gf) = (1.0, 1.0);
    println!("GB user realized at alpha = {alpha_gb}, eps_gb = {eps_gb}, eps_gf = {eps_gf}");
    println!(
        "  MTP floor (decode a GF user before the GB signal): {}",
        compute_mtp(alpha_gb, eps_gf)
    );
    for (mode, label) in [
        (MtiMode::WorstCase, "worst-case"),
        (MtiMode::AverageActive, "average-active"),
    ] {
        let cap = compute_mti(alpha_gb, eps_gb, mode, 8, 0.25).unwrap();
        println!("  MTI cap per user, {label} split over K=8 (rho 0.25): {cap:.4}");
    }
    let broadcast = BroadcastThreshold::announce(
        DelayClass::Sensitive,
        alpha_gb,
        eps_gb,
        eps_gf,
        MtiMode::WorstCase,
        8,
        0.25,
    )
    .unwrap();
    println!("  delay-sensitive broadcast: {broadcast:?} (no MTP: the GB user cannot wait)\n");

    // Many random slots: how often the GF population gets served, and
    // whether the GB user ever pays for it.
    let pop = GfPopulation {
        count: 8,
        activation_prob: 0.25,
        power_range: (db_to_linear(5.0), db_to_linear(15.0)),
        fading: FadingModel::rayleigh(1.0).unwrap(),
        target_rate: 1.0,
    };
    let slots = 50_000;
    println!(
        "{slots} slots, K = {}, rho = {}:",
        pop.count, pop.activation_prob
    );
    println!(
        "{:<16} {:<15} {:>10} {:>10} {:>12} {:>14}",
        "GB class", "MTI mode", "GF/slot", "GB served", "collisions", "extra GB loss"
    );
    for (class, mode) in [
        (DelayClass::Sensitive, MtiMode::WorstCase),
        (DelayClass::Sensitive, MtiMode::AverageActive),
        (DelayClass::Tolerant, MtiMode::WorstCase),
        (DelayClass::Tolerant, MtiMode::AverageActive),
    ] {
        let gb = GbUser::new(
            1.0,
            class,
            db_to_linear(10.0),
            0,
            FadingModel::rayleigh(1.0).unwrap(),
        );
        let root = RngStream::new(314, 0);
        let (mut gf, mut gb_ok, mut collisions, mut extra_loss) = (0usize, 0usize, 0usize, 0usize);
        for slot_idx in 0..slots {
            let stream = root.substream(slot_idx);
            let slot = run_single_orb_slot(&gb, &pop, mode, &stream).unwrap();
            gf += slot.served_gf;
            gb_ok += slot.served_gb;
            collisions += slot.collisions;
            // GB outage beyond what the channel alone would cause.
            let g = noma_mc::channel::sample_gains(
                &gb.fading,
                &mut stream
                    .substream(noma_mc::semigf::stream_purpose::GB_GAINS)
                    .rng(),
                1,
            )
            .unwrap()[0];
            if slot.gb_outage[0] && gb.transmit_power * g >= gb.sinr_threshold() {
                extra_loss += 1;
            }
        }
        println!(
            "{:<16} {:<15} {:>10.4} {:>10.4} {:>12} {:>14}",
            format!("{class:?}"),
            format!("{mode:?}"),
            gf as f64 / slots as f64,
            gb_ok as f64 / slots as f64,
            collisions,
            extra_loss,
        );
    }
    println!("\nWith the worst-case MTI the extra GB loss is exactly zero by construction;");
    println!("the average-active split and the MTP route trade some GB protection for GF access.");
}
