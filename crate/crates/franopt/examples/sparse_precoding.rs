//! Solve one full-scale sparse precoding instance and print the
//! reweighting trajectory: total transmit power per iteration, the final
//! per-UE rates, and the computing load against the active capacity.

use franopt::{Env, ScenarioConfig, SystemState};

fn main() -> franopt::Result<()> {
    let cfg = ScenarioConfig::default();
    let env = Env::new(cfg.clone(), 1, 2)?;
    let state = SystemState::initial(&cfg);

    let sol = env.precoding_for(&state);
    println!(
        "converged: {} after {} iterations (status {:?})",
        sol.converged, sol.iterations, sol.status
    );
    for (i, p) in sol.power_trace.iter().enumerate() {
        println!("  iteration {:2}: total tx power {:.6e} W", i + 1, p);
    }
    println!("per-UE rates (bits/s/Hz): {:?}", sol.rates);
    println!("per-RRH tx power (W): {:?}", sol.rrh_power);
    println!(
        "computing load {:.3} MOPTS of {:.3} available; {} nonzero coefficients of {}",
        sol.computing_load,
        cfg.active_capacity(&state.processor_on),
        sol.nnz,
        cfg.num_ue * cfg.num_rrh * cfg.antennas_per_rrh
    );
    Ok(())
}
