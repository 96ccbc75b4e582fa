//! Subcommand configurations and their computations.

use serde::{Deserialize, Serialize};
use serde_json::json;

use pbnc_core::coeff_systems::{
    self, car_jordan_wigner, car_residual, haar_unitaries, row_bound, tensor_conj_norm, trace_witness,
    unitarity_residual, CoefficientSystem, SystemKind,
};
use pbnc_core::counterexample::{
    build_t_default, certify, fcn_experiment, CertifyReport, FcnOptions, FcnRow, OperatorBundle, PbSearch,
};
use pbnc_core::hankel::{
    bound_probe, bound_scan, build_hankel_with, hankel_symbol, lacunary_default, scan_maxima, FreqMap,
    MultiplierSeq, ProbeBudget, ProbeFamily, ScanRow,
};
use pbnc_core::martingale::{
    self, block_eta_sup, eta_sup, eta_weights, fourier_extract, multiplicativity_check, multiplier_extract,
    orthogonality_check, radial_mean_check, simulate_paths, MartingaleConfig, McEstimate, PathBatch,
};
use pbnc_core::numkit::{families, op_norm, Polynomial};
use pbnc_core::thresholds::{self, Thresholds};
use pbnc_core::{rng, Complex64};

use crate::config::CliResult;
use crate::output::{Check, Outcome, Table};

/// Flattened Hankel matrices above this many entries skip the dense identity checks.
const FLAT_CHECK_LIMIT: usize = 4_000_000;

fn thresholds() -> CliResult<Thresholds> {
    Ok(Thresholds::embedded()?)
}

// ---------------------------------------------------------------- coeffs

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffsConfig {
    pub kind: SystemKind,
    pub n: usize,
    /// Matrix size of the Haar unitaries.
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Also write the system as `system/` inside the run directory.
    pub save_system: bool,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        Self {
            kind: SystemKind::Car,
            n: 3,
            dim: 4,
            restarts: coeff_systems::DEFAULT_RESTARTS,
            seed: thresholds::HAAR_SEED,
            save_system: false,
        }
    }
}

fn build_system(kind: SystemKind, n: usize, dim: usize, seed: u64) -> CliResult<CoefficientSystem> {
    Ok(match kind {
        SystemKind::Car => car_jordan_wigner(n)?,
        SystemKind::HaarUnitary => haar_unitaries(n, dim, seed)?,
        SystemKind::BasisVector => coeff_systems::basis_vectors(n)?,
    })
}

pub fn coeffs(cfg: &CoeffsConfig, run_dir: &std::path::Path) -> CliResult<Outcome> {
    let s = build_system(cfg.kind, cfg.n, cfg.dim, cfg.seed)?;
    let th = thresholds()?;
    let rb = row_bound(&s, cfg.restarts, cfg.seed)?;
    let small = s.is_square() && s.op_dim.0 * s.op_dim.0 <= pbnc_core::numkit::norm::EXACT_LIMIT;
    let tcn = if small { Some(tensor_conj_norm(&s)?) } else { None };
    let witness = if s.is_square() { Some(trace_witness(&s)?) } else { None };
    let mut checks = Vec::new();
    let n = cfg.n as f64;
    let residual = match cfg.kind {
        SystemKind::Car => {
            let r = car_residual(&s)?;
            checks.push(Check::at_most("car_residual", r, 1e-12));
            checks.push(Check::within("row_bound_equality", rb.value, 1.0, 1e-6));
            if let Some(w) = witness {
                checks.push(Check::within("trace_witness", w, n / 2.0, 1e-9));
            }
            if let Some(t) = tcn {
                checks.push(Check::at_least("tensor_conj_norm", t, n / 2.0 - 1e-9));
            }
            Some(r)
        }
        SystemKind::HaarUnitary => {
            let r = unitarity_residual(&s)?;
            checks.push(Check::at_most("unitarity_residual", r, 1e-12));
            if let Some(t) = tcn {
                checks.push(Check::within("tensor_conj_norm", t, n, 1e-8));
            }
            let frozen = &th.haar8_row_bound;
            if (cfg.n, cfg.dim, cfg.seed, cfg.restarts)
                == (8, 8, thresholds::HAAR_SEED, coeff_systems::DEFAULT_RESTARTS)
            {
                checks.push(Check::within("row_bound_regression", rb.value, frozen.regression, 1e-9));
                checks.push(Check::at_most("row_bound_below_oracle", rb.value, frozen.oracle + 1e-9));
            }
            Some(r)
        }
        SystemKind::BasisVector => {
            checks.push(Check::within("row_bound_equality", rb.value, 1.0, 1e-6));
            None
        }
    };
    if cfg.save_system {
        s.save_dir(&run_dir.join("system"))?;
    }
    Ok(Outcome {
        results: json!({
            "kind": s.kind,
            "n": s.n,
            "op_dim": s.op_dim,
            "residual": residual,
            "row_bound": rb.value,
            "row_bound_restarts": rb.restarts,
            "row_bound_per_restart": rb.per_restart,
            "tensor_conj_norm": tcn,
            "trace_witness": witness,
        }),
        checks,
        table: None,
    })
}

// ---------------------------------------------------------------- hankel

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `m = 1` on `{2, 4, 8, …}`, basis-vector coefficients in lacunary mode.
    Lacunary,
    /// `m ≡ 1` with one basis vector per frequency.
    Ones,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HankelConfig {
    pub multiplier: MultiplierKind,
    pub d_list: Vec<usize>,
    pub families: Vec<ProbeFamily>,
    pub dense_monomials: usize,
    pub random_polys: usize,
    pub ascent_restarts: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for HankelConfig {
    fn default() -> Self {
        let b = ProbeBudget::default();
        Self {
            multiplier: MultiplierKind::Lacunary,
            d_list: vec![3],
            families: ProbeFamily::ALL.to_vec(),
            dense_monomials: b.dense_monomials,
            random_polys: b.random_polys,
            ascent_restarts: b.ascent_restarts,
            ascent_steps: b.ascent_steps,
            seed: thresholds::SCAN_SEED,
        }
    }
}

pub fn hankel(cfg: &HankelConfig) -> CliResult<Outcome> {
    let dmax = *cfg
        .d_list
        .iter()
        .max()
        .ok_or_else(|| crate::config::CliError::Config("d_list must not be empty".into()))?;
    if cfg.d_list.contains(&0) {
        return Err(crate::config::CliError::Config("every D must be at least 1".into()));
    }
    let budget = ProbeBudget {
        dense_monomials: cfg.dense_monomials,
        random_polys: cfg.random_polys,
        ascent_restarts: cfg.ascent_restarts,
        ascent_steps: cfg.ascent_steps,
    };
    let top = 2 * dmax - 1;
    let (m, map, system) = match cfg.multiplier {
        MultiplierKind::Lacunary => {
            let spec = lacunary_default(top.ilog2() as usize)?;
            let l = spec.len();
            (MultiplierSeq::indicator(&spec), FreqMap::Lacunary(spec), coeff_systems::basis_vectors(l)?)
        }
        MultiplierKind::Ones => (
            MultiplierSeq::constant(Complex64::new(1.0, 0.0), top)?,
            FreqMap::Direct,
            coeff_systems::basis_vectors(top)?,
        ),
    };
    let rows = bound_scan(&m, &map, &system, &cfg.d_list, &cfg.families, &budget, cfg.seed)?;
    let maxima = scan_maxima(&rows);
    let mut checks = Vec::new();
    let mut identities = Vec::new();
    for &d in &cfg.d_list {
        let g = build_hankel_with(&m, &map, &system, d)?;
        let (r, c) = g.flat_shape();
        if r * c > FLAT_CHECK_LIMIT {
            continue;
        }
        let defect = g.hankel_defect();
        let roundtrip = hankel_symbol(&g).to_hankel(d, &g).to_flat().max_abs_diff(&g.to_flat());
        let norm_g = op_norm(&g.to_flat(), 1e-13)?.value;
        let probe_z = bound_probe(&g, &Polynomial::monomial(1)?)?.ratio;
        checks.push(Check::at_most(format!("hankel_property_D{d}"), defect, 0.0));
        checks.push(Check::at_most(format!("symbol_roundtrip_D{d}"), roundtrip, 0.0));
        checks.push(Check::within(format!("probe_z_equals_norm_D{d}"), probe_z, norm_g, 1e-10));
        identities.push(json!({ "D": d, "hankel_defect": defect, "symbol_roundtrip": roundtrip, "norm_g": norm_g, "probe_z": probe_z }));
    }
    let th = thresholds()?;
    let on_grid = cfg.d_list == thresholds::SCAN_D_GRID && cfg.families == ProbeFamily::ALL;
    if on_grid {
        match cfg.multiplier {
            MultiplierKind::Lacunary => {
                for &(d, v) in &maxima {
                    checks.push(Check::in_band(format!("lacunary_plateau_D{d}"), v, th.lacunary_plateau));
                }
            }
            MultiplierKind::Ones => {
                for w in maxima.windows(2) {
                    let name = format!("flat_growth_D{}_to_D{}", w[0].0, w[1].0);
                    checks.push(Check::at_least(name, w[1].1 / w[0].1, th.flat_growth_min_factor));
                }
            }
        }
    }
    Ok(Outcome {
        results: json!({ "rows": rows, "maxima": maxima, "identities": identities }),
        checks,
        table: Some(Table::from_rows::<ScanRow>(&rows)?),
    })
}

// ---------------------------------------------------------------- certify

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub kind: SystemKind,
    pub n: usize,
    /// Matrix size of the Haar unitaries.
    pub dim: usize,
    pub eps: f64,
    pub seed: u64,
    /// Row-bound restarts used to normalize Haar systems.
    pub row_restarts: usize,
    pub restarts: Option<usize>,
    pub max_degree: Option<usize>,
    pub random_polys: Option<usize>,
    pub ascent_steps: Option<usize>,
    pub dense_monomials: Option<usize>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            kind: SystemKind::Car,
            n: 3,
            dim: 4,
            eps: 1.0,
            seed: thresholds::PB_SEED,
            row_restarts: coeff_systems::DEFAULT_RESTARTS,
            restarts: None,
            max_degree: None,
            random_polys: None,
            ascent_steps: None,
            dense_monomials: None,
        }
    }
}

fn certify_bundle(cfg: &CertifyConfig, eps: f64) -> CliResult<(OperatorBundle, PbSearch)> {
    let raw = build_system(cfg.kind, cfg.n, cfg.dim, cfg.seed)?;
    let system = if cfg.kind == SystemKind::HaarUnitary {
        let k2 = row_bound(&raw, cfg.row_restarts, cfg.seed)?.value;
        raw.scaled(1.0 / k2)?
    } else {
        raw
    };
    let b = build_t_default(&system, &lacunary_default(cfg.n)?, eps)?;
    let base = PbSearch::for_bundle(&b, cfg.seed);
    let search = PbSearch {
        restarts: cfg.restarts.unwrap_or(base.restarts),
        max_degree: cfg.max_degree.unwrap_or(base.max_degree),
        random_polys: cfg.random_polys.unwrap_or(base.random_polys),
        ascent_steps: cfg.ascent_steps.unwrap_or(base.ascent_steps),
        dense_monomials: cfg.dense_monomials.unwrap_or(base.dense_monomials),
        ..base
    };
    Ok((b, search))
}

fn certify_checks(cfg: &CertifyConfig, r: &CertifyReport, th: &Thresholds) -> Vec<Check> {
    let mut checks = Vec::new();
    let n = cfg.n as f64;
    if r.eps == 0.0 {
        checks.push(Check::at_most("similarity_lower_zero", r.similarity_lower.abs(), 0.0));
        checks.push(Check::at_most("von_neumann", r.pb_probe, 1.0 + 1e-6));
    } else if cfg.kind == SystemKind::Car {
        checks.push(Check::at_least("similarity_lower_certified", r.similarity_lower, r.eps * n.sqrt() / 2.0 - 1e-8));
        if r.eps == 1.0 && thresholds::SEPARATION_NS.contains(&cfg.n) && cfg.seed == thresholds::PB_SEED {
            checks.push(Check::in_band("pb_probe_band", r.pb_probe, th.separation_pb_band));
        }
    } else {
        checks.push(Check::at_least("similarity_lower_positive", r.similarity_lower, f64::MIN_POSITIVE));
    }
    checks
}

pub fn certify_cmd(cfg: &CertifyConfig) -> CliResult<Outcome> {
    let (b, search) = certify_bundle(cfg, cfg.eps)?;
    let r = certify(&b, &search)?;
    let checks = certify_checks(cfg, &r, &thresholds()?);
    Ok(Outcome { results: serde_json::to_value(&r)?, checks, table: Some(Table::from_rows(&[flat_certify(&r)])?) })
}

#[derive(Serialize)]
struct CertifyRow {
    n: usize,
    #[serde(rename = "D")]
    d: usize,
    #[serde(rename = "N_total")]
    n_total: usize,
    eps: f64,
    system_kind: &'static str,
    seed: u64,
    pb_probe: f64,
    pb_argmax: String,
    similarity_lower: f64,
    cb_over_pb: f64,
    row_bound: f64,
    row_bound_exact: bool,
}

fn flat_certify(r: &CertifyReport) -> CertifyRow {
    CertifyRow {
        n: r.n,
        d: r.d,
        n_total: r.n_total,
        eps: r.eps,
        system_kind: r.system_kind.as_str(),
        seed: r.seed,
        pb_probe: r.pb_probe,
        pb_argmax: r.pb_argmax.clone(),
        similarity_lower: r.similarity_lower,
        cb_over_pb: r.similarity_lower / r.pb_probe,
        row_bound: r.row_bound,
        row_bound_exact: r.row_bound_exact,
    }
}

// ---------------------------------------------------------------- sweep

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SystemKind,
    pub ns: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub dim: usize,
    pub seed: u64,
    pub restarts: usize,
    pub random_polys: usize,
    pub ascent_steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            kind: SystemKind::Car,
            ns: thresholds::SEPARATION_NS.to_vec(),
            eps_list: vec![0.0, 0.5, 1.0],
            dim: 4,
            seed: thresholds::PB_SEED,
            restarts: 2,
            random_polys: 8,
            ascent_steps: 20,
        }
    }
}

/// `certify` over an `n × eps` grid.
pub fn sweep(cfg: &SweepConfig) -> CliResult<Outcome> {
    if cfg.ns.is_empty() || cfg.eps_list.is_empty() {
        return Err(crate::config::CliError::Config("ns and eps_list must not be empty".into()));
    }
    let mut reports = Vec::new();
    for &n in &cfg.ns {
        for &eps in &cfg.eps_list {
            let c = CertifyConfig {
                kind: cfg.kind,
                n,
                dim: cfg.dim,
                eps,
                seed: cfg.seed,
                restarts: Some(cfg.restarts),
                random_polys: Some(cfg.random_polys),
                ascent_steps: Some(cfg.ascent_steps),
                ..CertifyConfig::default()
            };
            let (b, search) = certify_bundle(&c, eps)?;
            reports.push(certify(&b, &search)?);
        }
    }
    let mut checks = Vec::new();
    for &n in &cfg.ns {
        let mut pts: Vec<(f64, f64)> =
            reports.iter().filter(|r| r.n == n).map(|r| (r.eps, r.similarity_lower)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let worst_drop = pts.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("eps_monotone_n{n}"), worst_drop, 1e-12));
    }
    let at_one: Vec<&CertifyReport> = reports.iter().filter(|r| r.eps == 1.0).collect();
    if let (Some(first), Some(last)) = (at_one.iter().min_by_key(|r| r.n), at_one.iter().max_by_key(|r| r.n)) {
        if first.n < last.n {
            let gain = last.similarity_lower / last.pb_probe - first.similarity_lower / first.pb_probe;
            checks.push(Check::new("separation_grows", gain > 0.0, gain, "> 0"));
        }
    }
    let rows: Vec<CertifyRow> = reports.iter().map(flat_certify).collect();
    Ok(Outcome { results: json!({ "rows": reports }), checks, table: Some(Table::from_rows(&rows)?) })
}

// ---------------------------------------------------------------- fcn

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcnConfig {
    pub ns: Vec<usize>,
    pub c: f64,
    pub seed: u64,
    pub options: FcnOptions,
}

impl Default for FcnConfig {
    fn default() -> Self {
        Self { ns: thresholds::FCN_NS.to_vec(), c: 2.0, seed: thresholds::FCN_SEED, options: FcnOptions::default() }
    }
}

pub fn fcn(cfg: &FcnConfig) -> CliResult<Outcome> {
    let rows = cfg.ns.iter().map(|&n| fcn_experiment(n, cfg.c, cfg.seed, &cfg.options)).collect::<Result<Vec<_>, _>>()?;
    let th = thresholds()?;
    let mut checks = Vec::new();
    for r in &rows {
        checks.push(Check::at_least(format!("scaled_positive_n{}", r.n), r.scaled_log, f64::MIN_POSITIVE));
        if r.c == 2.0 && r.seed == thresholds::FCN_SEED && thresholds::FCN_NS.contains(&r.n) {
            checks.push(Check::in_band(format!("scaled_band_n{}", r.n), r.scaled_log, th.fcn_scaled_log_band));
        }
    }
    Ok(Outcome { results: json!({ "rows": rows }), checks, table: Some(Table::from_rows::<FcnRow>(&rows)?) })
}

// ---------------------------------------------------------------- mc

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McCheckKind {
    Radius,
    RadialMean,
    FourierExtract,
    MultiplierExtract,
    Orthogonality,
    EtaBound,
    Multiplicativity,
}

impl McCheckKind {
    pub const ALL: [McCheckKind; 7] = [
        McCheckKind::Radius,
        McCheckKind::RadialMean,
        McCheckKind::FourierExtract,
        McCheckKind::MultiplierExtract,
        McCheckKind::Orthogonality,
        McCheckKind::EtaBound,
        McCheckKind::Multiplicativity,
    ];
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub levels: usize,
    pub n_samples: usize,
    pub block_size: usize,
    pub seed: u64,
    /// Seeded random polynomials per level and check.
    pub polys: usize,
    pub bins: usize,
    /// Standard errors allowed between estimate and target.
    pub k_sigma: f64,
    pub checks: Vec<McCheckKind>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            levels: 6,
            n_samples: martingale::DEFAULT_SAMPLES,
            block_size: martingale::DEFAULT_BLOCK,
            seed: 11,
            polys: 10,
            bins: martingale::DEFAULT_BINS,
            k_sigma: 4.0,
            checks: McCheckKind::ALL.to_vec(),
        }
    }
}

/// One line of the `mc` output.
#[derive(Clone, Debug, Serialize)]
pub struct McRow {
    pub check: String,
    pub level: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub target_re: f64,
    pub target_im: f64,
    pub stderr: f64,
    pub pass: bool,
}

impl McRow {
    fn from_estimate(check: String, level: usize, e: &McEstimate, target: Complex64, k: f64) -> Self {
        Self {
            check,
            level,
            n_samples: e.n_samples,
            seed: e.seed,
            estimate_re: e.mean.re,
            estimate_im: e.mean.im,
            target_re: target.re,
            target_im: target.im,
            stderr: e.stderr,
            pass: e.within(target, k),
        }
    }

    fn bound(check: String, level: usize, value: f64, bound: f64, paths: &PathBatch) -> Self {
        Self {
            check,
            level,
            n_samples: paths.n_samples,
            seed: paths.seed,
            estimate_re: value,
            estimate_im: 0.0,
            target_re: bound,
            target_im: 0.0,
            stderr: 0.0,
            pass: value <= bound,
        }
    }
}

/// Seeded random polynomial number `i` of family `tag` at `level`.
fn mc_poly(seed: u64, tag: u64, level: usize, i: usize, degree: usize) -> Polynomial {
    let mut r = rng::seeded(rng::derive_seed(rng::derive_seed(seed, tag), (level * 1000 + i) as u64));
    families::random_poly(&mut r, degree)
}

pub fn mc_rows(cfg: &McConfig) -> CliResult<Vec<McRow>> {
    if cfg.levels == 0 || cfg.n_samples < 2 {
        return Err(crate::config::CliError::Config("mc needs levels ≥ 1 and n_samples ≥ 2".into()));
    }
    let paths = simulate_paths(&MartingaleConfig {
        levels: cfg.levels,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        block_size: cfg.block_size,
    })?;
    let spec = lacunary_default(cfg.levels)?;
    let th = thresholds()?;
    let k = cfg.k_sigma;
    let l = cfg.levels;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut rows = Vec::new();
    for check in &cfg.checks {
        match check {
            McCheckKind::Radius => {
                rows.push(McRow::bound("radius".into(), l, paths.max_radius_error(), martingale::RADIUS_TOL, &paths));
            }
            McCheckKind::RadialMean => {
                for m in 1..=4 {
                    let e = radial_mean_check(&paths, &Polynomial::monomial(m)?, l)?;
                    rows.push(McRow::from_estimate(format!("radial_mean:z^{m}"), l, &e, zero, k));
                }
                for i in 0..cfg.polys {
                    let e = radial_mean_check(&paths, &mc_poly(cfg.seed, 1, l, i, 6), l)?;
                    rows.push(McRow::from_estimate(format!("radial_mean:random{i}"), l, &e, zero, k));
                }
            }
            McCheckKind::FourierExtract => {
                for n in 2..=l {
                    let kn = spec.k()[n - 1];
                    let e = fourier_extract(&paths, &Polynomial::monomial(kn)?, &spec, n)?;
                    rows.push(McRow::from_estimate(format!("fourier_extract:z^{kn}"), n, &e, one, k));
                    let e = fourier_extract(&paths, &Polynomial::monomial(kn + 1)?, &spec, n)?;
                    rows.push(McRow::from_estimate(format!("fourier_extract:z^{}", kn + 1), n, &e, zero, k));
                    for i in 0..cfg.polys {
                        let f = mc_poly(cfg.seed, 2, n, i, (1 << n) + 3);
                        let e = fourier_extract(&paths, &f, &spec, n)?;
                        rows.push(McRow::from_estimate(format!("fourier_extract:random{i}"), n, &e, f.coeff(kn), k));
                    }
                }
            }
            McCheckKind::MultiplierExtract => {
                for n in 2..=l {
                    for freq in [(1 << (n - 1)) + 1, 1 << n] {
                        let e = multiplier_extract(&paths, &Polynomial::monomial(freq)?, n, freq)?;
                        rows.push(McRow::from_estimate(format!("multiplier_extract:z^{freq}"), n, &e, one, k));
                    }
                }
            }
            McCheckKind::Orthogonality => {
                let z = Polynomial::monomial(1)?;
                for n in 1..=l {
                    let e = orthogonality_check(&paths, &z, &z, n, &|_| one)?;
                    rows.push(McRow::from_estimate("orthogonality:z,z".into(), n, &e, zero, k));
                    let f = mc_poly(cfg.seed, 3, n, 0, 6);
                    let g = mc_poly(cfg.seed, 3, n, 1, 6);
                    let e = orthogonality_check(&paths, &f, &g, n, &|w: Complex64| w.conj())?;
                    rows.push(McRow::from_estimate("orthogonality:random".into(), n, &e, zero, k));
                }
            }
            McCheckKind::EtaBound => {
                for n in 2..=l {
                    let w = eta_weights(&paths, &spec, n)?;
                    let dev = w.values.iter().map(|v| (v.norm() - w.modulus).abs()).fold(0.0, f64::max);
                    rows.push(McRow::bound("eta_modulus_deviation".into(), n, dev, 1e-12 * w.modulus, &paths));
                }
                rows.push(McRow::bound("eta_sup_n20".into(), 20, eta_sup(20), th.eta_sup_n20, &paths));
                let block = (2..=10).map(block_eta_sup).fold(0.0, f64::max);
                rows.push(McRow::bound("block_eta_sup_n10".into(), 10, block, th.block_eta_sup_n10, &paths));
            }
            McCheckKind::Multiplicativity => {
                let level = (l / 2).max(1);
                let f = Polynomial::monomial(1)?;
                let g = mc_poly(cfg.seed, 4, level, 0, 3);
                let m = multiplicativity_check(&paths, &f, &g, level, cfg.bins)?;
                rows.push(McRow::bound("multiplicativity_worst_z".into(), level, m.worst_z, k, &paths));
            }
        }
    }
    Ok(rows)
}

pub fn mc(cfg: &McConfig) -> CliResult<Outcome> {
    let rows = mc_rows(cfg)?;
    let checks = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Check::new(format!("{i:03}:{}@{}", r.check, r.level), r.pass, r.estimate_re, format!("{}", r.target_re)))
        .collect();
    Ok(Outcome { results: json!({ "checks": rows }), checks, table: Some(Table::from_rows(&rows)?) })
}
