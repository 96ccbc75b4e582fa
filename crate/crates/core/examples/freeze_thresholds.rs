//! Oracle run behind `thresholds.json`.
//!
//! Computes every frozen regression value with budgets well above those used
//! by the test suite and prints the resulting JSON document:
//!
//! ```text
//! cargo run --release -p pbnc-core --example freeze_thresholds > crates/core/thresholds.json
//! ```
//!
//! Bands are the oracle values widened by the margins below; a regression run
//! passes when its value lies inside the band.

use std::time::Instant;

use pbnc_core::coeff_systems::{car_jordan_wigner, haar_unitaries, row_bound, tensor_conj_norm};
use pbnc_core::counterexample::{build_t_default, fcn_experiment, pb_probe, FcnOptions, PbSearch};
use pbnc_core::hankel::{bound_scan, lacunary_default, scan_maxima, FreqMap, MultiplierSeq, ProbeBudget, ProbeFamily};
use pbnc_core::martingale::{block_eta_sup, eta_sup};
use pbnc_core::thresholds::{self, Band};
use pbnc_core::{coeff_systems, Complex64};
use serde_json::json;

fn log(msg: &str, t: Instant) {
    eprintln!("[{:>8.1}s] {msg}", t.elapsed().as_secs_f64());
}

fn main() -> pbnc_core::Result<()> {
    let t0 = Instant::now();

    // Exact 16×16 eigensolve for the CAR n = 2 tensor sum.
    let tcn_car2 = tensor_conj_norm(&car_jordan_wigner(2)?)?;
    log(&format!("tcn car2 = {tcn_car2}"), t0);

    // Row bound of haar(8, 8) with 16× the default restart budget.
    let haar = haar_unitaries(8, 8, thresholds::HAAR_SEED)?;
    let rb_oracle = row_bound(&haar, 16 * coeff_systems::DEFAULT_RESTARTS, thresholds::HAAR_SEED)?;
    let rb_default = row_bound(&haar, coeff_systems::DEFAULT_RESTARTS, thresholds::HAAR_SEED)?;
    log(&format!("haar row bound oracle {} default {}", rb_oracle.value, rb_default.value), t0);

    // Hankel scans: lacunary basis mode and m ≡ 1.
    let d_grid = thresholds::SCAN_D_GRID;
    let dmax = *d_grid.iter().max().unwrap();
    let budget = ProbeBudget { random_polys: 16, ascent_restarts: 3, ascent_steps: 60, ..ProbeBudget::default() };
    let l = (2 * dmax - 1).ilog2() as usize;
    let spec = lacunary_default(l)?;
    let lac_rows = bound_scan(
        &MultiplierSeq::indicator(&spec),
        &FreqMap::Lacunary(spec.clone()),
        &coeff_systems::basis_vectors(l)?,
        &d_grid,
        &ProbeFamily::ALL,
        &budget,
        thresholds::SCAN_SEED,
    )?;
    let lac = scan_maxima(&lac_rows);
    log(&format!("lacunary maxima {lac:?}"), t0);
    let ones = MultiplierSeq::constant(Complex64::new(1.0, 0.0), 2 * dmax - 1)?;
    let flat_rows = bound_scan(
        &ones,
        &FreqMap::Direct,
        &coeff_systems::basis_vectors(2 * dmax - 1)?,
        &d_grid,
        &ProbeFamily::ALL,
        &budget,
        thresholds::SCAN_SEED,
    )?;
    let flat = scan_maxima(&flat_rows);
    log(&format!("m = 1 maxima {flat:?}"), t0);
    let growth: Vec<f64> = flat.windows(2).map(|w| w[1].1 / w[0].1).collect();

    // CAR separation: pb_probe with a high budget.
    let mut pb = Vec::new();
    let mut sep = Vec::new();
    for n in thresholds::SEPARATION_NS {
        let b = build_t_default(&car_jordan_wigner(n)?, &lacunary_default(n)?, 1.0)?;
        let search = PbSearch { restarts: 6, random_polys: 64, ascent_steps: 120, ..PbSearch::for_bundle(&b, thresholds::PB_SEED) };
        let v = pb_probe(&b, &search)?;
        let cb = pbnc_core::counterexample::similarity_lower(&b)?;
        log(&format!("car n={n} pb_probe {} ({}) cb {cb}", v.value, v.argmax), t0);
        pb.push(v.value);
        sep.push(cb / v.value);
    }

    // Haar fcn curve.
    let mut fcn = Vec::new();
    for n in thresholds::FCN_NS {
        let row = fcn_experiment(n, 2.0, thresholds::FCN_SEED, &FcnOptions::default())?;
        log(&format!("fcn {row:?}"), t0);
        fcn.push(row);
    }

    let eta20 = eta_sup(20);
    let block_eta10 = (2..=10).map(block_eta_sup).fold(0.0, f64::max);

    let band = |lo: f64, hi: f64| Band { lo, hi };
    let lac_vals: Vec<f64> = lac.iter().map(|x| x.1).collect();
    let lac_lo = lac_vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let lac_hi = lac_vals.iter().cloned().fold(0.0, f64::max);
    let pb_lo = pb.iter().cloned().fold(f64::INFINITY, f64::min);
    let pb_hi = pb.iter().cloned().fold(0.0, f64::max);
    let fcn_log: Vec<f64> = fcn.iter().map(|r| r.scaled_log).collect();
    let fcn_lo = fcn_log.iter().cloned().fold(f64::INFINITY, f64::min);
    let fcn_hi = fcn_log.iter().cloned().fold(0.0, f64::max);
    let min_growth = growth.iter().cloned().fold(f64::INFINITY, f64::min);

    let doc = json!({
        "tensor_conj_norm_car2": tcn_car2,
        "haar8_row_bound": { "oracle": rb_oracle.value, "oracle_restarts": rb_oracle.restarts, "regression": rb_default.value },
        "lacunary_plateau": band(0.9 * lac_lo, 1.1 * lac_hi),
        "lacunary_oracle": lac,
        "flat_growth_min_factor": 0.9 * min_growth,
        "flat_oracle": flat,
        "separation_pb_band": band(0.9 * pb_lo, 1.1 * pb_hi),
        "separation_pb_oracle": pb,
        "separation_ratio_oracle": sep,
        "fcn_scaled_log_band": band(0.5 * fcn_lo, 2.0 * fcn_hi),
        "fcn_oracle": fcn,
        "eta_sup_n20": eta20,
        "block_eta_sup_n10": block_eta10,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    log("done", t0);
    Ok(())
}
