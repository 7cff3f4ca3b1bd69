//! Multi-ORB semi-grant-free connectivity under rising offered load,
//! comparing plain contention, the layered power pool, pool plus access
//! class barring, and grant-based-only service. All variants run on the
//! same seeded channel and activation draws.
//!
//! Run with: `cargo run -p noma-mc --release --example connectivity_sweep`

use noma_mc::channel::{db_to_linear, FadingModel, RngStream};
use noma_mc::semigf::{
    connectivity, AcbPolicy, AccessVariant, DelayClass, GbUser, GfPopulation, MultiOrbScenario,
    PowerPool,
};

fn main() {
    let orbs = 10;
    let rho = 0.2;
    let slots = 2_000;
    let pool = PowerPool::layered(1.0, 1.1, 4);
    println!(
        "{orbs} ORBs, cluster capacity 2 (1 GB + at most 1 GF), rho = {rho}, {slots} slots/point"
    );
    println!(
        "power pool levels (target receive powers): {:?}\n",
        pool.levels()
    );

    let gb_users: Vec<GbUser> = (0..orbs)
        .map(|orb| {
            GbUser::new(
                1.0,
                DelayClass::Tolerant,
                db_to_linear(20.0),
                orb,
                FadingModel::rayleigh(1.0).unwrap(),
            )
        })
        .collect();

    println!(
        "{:>8} {:>6} {:>10} {:>10} {:>12} {:>16}",
        "K pgfu", "load", "gb_only", "plain", "power_pool", "pool + barring"
    );
    for (point, k) in [5usize, 25, 50, 100, 150, 200].into_iter().enumerate() {
        let population = GfPopulation {
            count: k,
            activation_prob: rho,
            power_range: (db_to_linear(10.0), db_to_linear(20.0)),
            fading: FadingModel::rayleigh(1.0).unwrap(),
            target_rate: 1.0,
        };
        let stream = RngStream::new(808, 0).substream(point as u64);
        let mean = |variant: AccessVariant| {
            let scenario = MultiOrbScenario {
                gb_users: gb_users.clone(),
                population: population.clone(),
                variant,
            };
            connectivity(&scenario, slots, &stream).unwrap().mean_served
        };
        println!(
            "{k:>8} {:>6.0} {:>10.3} {:>10.3} {:>12.3} {:>16.3}",
            rho * k as f64,
            mean(AccessVariant::GbOnly),
            mean(AccessVariant::Plain),
            mean(AccessVariant::PowerPool(pool.clone())),
            mean(AccessVariant::PowerPoolAcb(
                pool.clone(),
                AcbPolicy::load_matched(orbs, rho, k)
            )),
        );
    }
    println!("\nUncontrolled GF power drags plain contention below GB-only service at high");
    println!("load; the pool caps the damage and barring thins the offered load back down.");
}
