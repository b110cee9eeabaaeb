//! Acceptance suite. Prints one PASS/FAIL line per criterion followed by the
//! individual checks. Tolerances and reference values are pinned below.
//!
//! A criterion listed in `KNOWN_UNATTAINABLE` is expected to fail; the process
//! exits non-zero when any criterion disagrees with its expectation, so a
//! known failure that starts passing is flagged too.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bpm_spdc_core::analysis::{analyze, AnalysisOptions, AnalysisReport};
use bpm_spdc_core::dispersion::{
    load_material, IndexBranch, Interpolation, MaterialDispersion, PropagationAngle, SellmeierForm,
};
use bpm_spdc_core::montecarlo::{
    generate_tags, read_tags, write_tags, write_tags_to, PerChannel, SourceModel, TagStream,
};
use bpm_spdc_core::phasematch::{
    delta_k, linear_grid, solve_pm_angle, solve_pm_wavelength, tuning_rate, ShgSpectrum, WaveguideConfig,
};
use bpm_spdc_core::photonstats::{
    analytic_forward, heralding_efficiency_from_loss, pgr, Estimate, LossBudget,
};
use bpm_spdc_core::report::{histogram_csv, metrics_csv, CsvHeader};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances.
const ENDPOINT_REL: f64 = 1e-12;
const PROPERTY_SAMPLES: usize = 10_000;
const HERALD_PP: f64 = 0.05;
const SOLVER_NM: f64 = 0.01;
const SOLVER_DEG: f64 = 0.01;
const SCAN_NM: f64 = 1e-4;
const SCAN_DEG: f64 = 1e-4;
const ANCHOR_REL: f64 = 0.01;
const TUNING_REL: f64 = 0.01;
const TUNING_BAND: (f64, f64) = (0.1, 2.0);
const FWHM_REL: f64 = 0.02;
const MC_SIGMAS: f64 = 3.0;
const PRODUCT_SPREAD: f64 = 0.15;
const ANALYTIC_PRODUCT_REL: f64 = 1e-9;
const G2_LOW_PUMP_MAX: f64 = 0.05;
const ROUND_TRIP_EVENTS: usize = 1_000_000;

// Reported device figures.
const DEVICE_ETA_IDLER_PCT: f64 = 13.0;
const DEVICE_ETA_SIGNAL_PCT: f64 = 13.8;
const DEVICE_N_O_1550: f64 = 2.20401;
const DEVICE_N_E_775: f64 = 2.20405;
const DEVICE_THETA_DEG: f64 = 53.5;
const DEVICE_TUNING_NM_PER_K: f64 = 0.617;
const DEVICE_PRODUCT_HZ: f64 = 4.4e9;
const DEVICE_BRIGHTNESS_HZ_PER_MW: f64 = 2.2e6;
const DEVICE_LOW_PUMP_MW: f64 = 0.81;
const DEVICE_G2: (f64, f64) = (0.013, 0.006);
const ON_CHIP_DB: f64 = 3.76;
const OFF_CHIP_SIGNAL_DB: f64 = 4.82;
const OFF_CHIP_IDLER_DB: f64 = 5.09;

// Independent oracles (40-digit mpmath evaluations).
/// `(2π/775 nm)·(2.20401 − 2.20405)` in rad/mm.
const ORACLE_ANCHOR_DK: f64 = -0.324_293_435_209_269;
/// Synthetic crystal: degenerate crossing at θ = 70°.
const ORACLE_SYNTH_LP_70: f64 = 650.660_376_318_286;
/// Synthetic crystal: phase-matching angle for λp = 700 nm.
const ORACLE_SYNTH_THETA_700: f64 = 60.694_477_403_199_2;
/// Synthetic crystal at 70° with dn_o/dT = 2e-5, dn_e/dT = 6e-5: implicit dλ_FH/dT.
const ORACLE_SYNTH_RATE: f64 = 0.652_651_483_306_581;

const SEED: u64 = 0x5eed_2024;

/// `(id, reason)` for criteria that cannot pass as written.
const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "AC2",
    "10^(-8.58/10) = 13.868 %, 0.068 pp above the quoted 13.8 %; the quoted figure is truncated, not rounded",
)];

struct Checks {
    lines: Vec<String>,
    ok: bool,
}

impl Checks {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            ok: true,
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        self.ok &= ok;
        self.lines
            .push(format!("      {} {}", if ok { "ok" } else { "!!" }, msg.into()));
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.lines.push(format!("      -- {}", msg.into()));
    }
}

fn material(name: &str) -> Arc<MaterialDispersion> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "materials", name].iter().collect();
    Arc::new(load_material(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
}

fn theta(deg: f64) -> PropagationAngle {
    PropagationAngle::from_degrees(deg).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn synthetic(dn_o: f64, dn_e: f64) -> Arc<MaterialDispersion> {
    Arc::new(
        MaterialDispersion::new(
            "synthetic",
            IndexBranch::closed(SellmeierForm::PolyInverseLambda2, vec![2.20, 2.0e4], dn_o).unwrap(),
            IndexBranch::closed(SellmeierForm::PolyInverseLambda2, vec![2.16, 2.0e4], dn_e).unwrap(),
            (400.0, 2000.0),
            300.0,
        )
        .unwrap(),
    )
}

fn device_loss() -> LossBudget {
    LossBudget::new(ON_CHIP_DB, OFF_CHIP_SIGNAL_DB, OFF_CHIP_IDLER_DB)
}

fn simulate(model: &SourceModel) -> (TagStream, AnalysisReport) {
    let stream = generate_tags(model).unwrap();
    let report = analyze(&stream, &AnalysisOptions::for_model(model)).unwrap();
    (stream, report)
}

/// Brute-force sign changes of `f` on `lo + k·step`; returns bracket midpoints.
fn scan_roots(lo: f64, hi: f64, step: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    let mut roots = Vec::new();
    let mut prev = f(lo);
    for k in 1..=n {
        let x = lo + step * k as f64;
        let v = f(x);
        if v == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            roots.push(x - 0.5 * step);
        }
        prev = v;
    }
    roots
}

fn ac1() -> Checks {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (name, m) in [
        ("bulk LN", material("ln_congruent_bulk.mat")),
        ("synthetic", material("synthetic_cauchy.mat")),
    ] {
        let (lo, hi) = m.valid_range();
        let t0 = m.reference_temperature();
        let mut worst_endpoint: f64 = 0.0;
        let (mut bound_fail, mut mono_fail) = (0usize, 0usize);
        for _ in 0..PROPERTY_SAMPLES {
            let lambda = rng.random_range(lo..=hi);
            let t = t0 + rng.random_range(-50.0..=50.0);
            let n_o = m.index_ordinary(lambda, t).unwrap();
            let n_e = m.index_extraordinary_principal(lambda, t).unwrap();
            let at = |deg: f64| m.index_extraordinary_at_angle(lambda, t, theta(deg)).unwrap();
            worst_endpoint = worst_endpoint.max(rel(at(90.0), n_e)).max(rel(at(0.0), n_o));

            let th = rng.random_range(0.0..90.0);
            let th2 = rng.random_range(th..=90.0);
            let (a, b) = (at(th), at(th2));
            if a < n_o.min(n_e) || a > n_o.max(n_e) {
                bound_fail += 1;
            }
            // n(θ) moves monotonically from n_o toward n_e.
            let step = b - a;
            if step * (n_e - n_o) < 0.0 {
                mono_fail += 1;
            }
        }
        c.check(
            worst_endpoint <= ENDPOINT_REL,
            format!("{name}: θ = 90°/0° reproduce n_e/n_o, worst relative error {worst_endpoint:.1e}"),
        );
        c.check(
            bound_fail == 0 && mono_fail == 0,
            format!(
                "{name}: {PROPERTY_SAMPLES} random (λ, T, θ): {bound_fail} outside [n_o, n_e], {mono_fail} non-monotone"
            ),
        );
    }
    c
}

fn ac2() -> Checks {
    let mut c = Checks::new();
    for (arm, db, quoted) in [
        ("idler", ON_CHIP_DB + OFF_CHIP_IDLER_DB, DEVICE_ETA_IDLER_PCT),
        ("signal", ON_CHIP_DB + OFF_CHIP_SIGNAL_DB, DEVICE_ETA_SIGNAL_PCT),
    ] {
        let pct = 100.0 * heralding_efficiency_from_loss(db).unwrap();
        let gap = (pct - quoted).abs();
        c.check(
            gap <= HERALD_PP,
            format!("{arm}: {db:.2} dB → {pct:.4} % vs quoted {quoted} % (gap {gap:.3} pp, allowed {HERALD_PP})"),
        );
    }
    c
}

fn ac3() -> Checks {
    let mut c = Checks::new();
    let m = synthetic(0.0, 0.0);
    let (lo, hi) = (400.0, 1000.0);
    for deg in [60.0, 70.0, 80.0] {
        let wg = WaveguideConfig::new(m.clone(), theta(deg), 20.0, 300.0).unwrap();
        let sol = solve_pm_wavelength(&wg).unwrap();
        let scan = scan_roots(lo, hi, SCAN_NM, |l| wg.degenerate_index_mismatch(l).unwrap());
        let ok_scan = scan.len() == 1 && (sol.lambda_p_nm - scan[0]).abs() < SOLVER_NM;
        c.check(
            ok_scan,
            format!("θ = {deg}°: λp = {:.6} nm, scan {:?}", sol.lambda_p_nm, scan),
        );
        let back = solve_pm_angle(&wg, sol.lambda_p_nm).unwrap();
        c.check(
            (back.theta_deg - deg).abs() < SOLVER_DEG,
            format!("θ = {deg}°: wavelength → angle round trip gives {:.6}°", back.theta_deg),
        );
        if deg == 70.0 {
            c.check(
                (sol.lambda_p_nm - ORACLE_SYNTH_LP_70).abs() < SOLVER_NM,
                format!("θ = 70°: closed-form reference {ORACLE_SYNTH_LP_70} nm"),
            );
        }
    }
    for lp in [620.0, 700.0, 800.0] {
        let wg = WaveguideConfig::new(m.clone(), theta(45.0), 20.0, 300.0).unwrap();
        let sol = solve_pm_angle(&wg, lp).unwrap();
        let target = m.index_ordinary(2.0 * lp, 300.0).unwrap();
        let scan = scan_roots(0.0, 90.0, SCAN_DEG, |d| {
            m.index_extraordinary_at_angle(lp, 300.0, theta(d)).unwrap() - target
        });
        c.check(
            scan.len() == 1 && (sol.theta_deg - scan[0]).abs() < SOLVER_DEG,
            format!("λp = {lp} nm: θ* = {:.6}°, scan {:?}", sol.theta_deg, scan),
        );
        let back = solve_pm_wavelength(&wg.with_theta(theta(sol.theta_deg))).unwrap();
        c.check(
            (back.lambda_p_nm - lp).abs() < SOLVER_NM,
            format!("λp = {lp} nm: angle → wavelength round trip gives {:.6} nm", back.lambda_p_nm),
        );
        if lp == 700.0 {
            c.check(
                (sol.theta_deg - ORACLE_SYNTH_THETA_700).abs() < SOLVER_DEG,
                format!("λp = 700 nm: closed-form reference {ORACLE_SYNTH_THETA_700}°"),
            );
        }
    }
    c
}

/// The calibrated effective-index model tabulated every 25 nm over [650, 1800] nm.
fn tabulated_ln(extraordinary_shift: f64) -> Arc<MaterialDispersion> {
    let src = material("ln_lnoi_effective.mat");
    let t = src.reference_temperature();
    let grid = linear_grid(650.0, 1800.0, 25.0);
    let o: Vec<_> = grid.iter().map(|&l| (l, src.index_ordinary(l, t).unwrap())).collect();
    let e: Vec<_> = grid
        .iter()
        .map(|&l| (l, src.index_extraordinary_principal(l, t).unwrap() + extraordinary_shift))
        .collect();
    Arc::new(
        MaterialDispersion::new(
            "tabulated LN",
            IndexBranch::tabulated(&o, Interpolation::Cubic, 0.0).unwrap(),
            IndexBranch::tabulated(&e, Interpolation::Cubic, 0.0).unwrap(),
            (650.0, 1800.0),
            t,
        )
        .unwrap(),
    )
}

fn ac4() -> Checks {
    let mut c = Checks::new();
    let m = tabulated_ln(0.0);
    let t = m.reference_temperature();
    let th = theta(DEVICE_THETA_DEG);
    let n_o = m.index_ordinary(1550.0, t).unwrap();
    let n_e = m.index_extraordinary_at_angle(775.0, t, th).unwrap();
    c.check(
        (n_o - DEVICE_N_O_1550).abs() < 1e-9 && (n_e - DEVICE_N_E_775).abs() < 1e-9,
        format!("fixture encodes n_o(1550) = {n_o:.9}, n_e(53.5°; 775) = {n_e:.9}"),
    );
    let wg = WaveguideConfig::new(m.clone(), th, 20.0, t).unwrap();
    let dk = delta_k(&wg, 775.0, 1550.0, 1550.0).unwrap();
    c.check(
        rel(dk, ORACLE_ANCHOR_DK) < ANCHOR_REL,
        format!("Δk(775; 1550, 1550) = {dk:.6} rad/mm vs {ORACLE_ANCHOR_DK:.6}"),
    );

    // Raise n_e so that n_e(53.5°; 775) equals n_o(1550).
    let n_o_775 = m.index_ordinary(775.0, t).unwrap();
    let (s, co) = DEVICE_THETA_DEG.to_radians().sin_cos();
    let ne_needed = s / (1.0 / (n_o * n_o) - co * co / (n_o_775 * n_o_775)).sqrt();
    let shift = ne_needed - m.index_extraordinary_principal(775.0, t).unwrap();
    let equal = WaveguideConfig::new(tabulated_ln(shift), th, 20.0, t).unwrap();
    let sol = solve_pm_wavelength(&equal).unwrap();
    c.check(
        (sol.lambda_p_nm - 775.0).abs() < SOLVER_NM,
        format!(
            "after shifting n_e by {shift:.3e} the root is {:.6} nm (residual Δk {:.1e} rad/mm)",
            sol.lambda_p_nm, sol.residual_delta_k
        ),
    );
    c
}

/// `dλ_FH/dT` for the synthetic Cauchy crystal by implicit differentiation of
/// `f(λ, T) = n_e(θ; λ, T) − n_o(2λ, T)`.
fn synthetic_rate_closed_form(theta_deg: f64, lambda_p: f64, dn_o: f64, dn_e: f64) -> f64 {
    let c1 = 2.0e4;
    let no = |l: f64| 2.20 + c1 / (l * l);
    let ne = |l: f64| 2.16 + c1 / (l * l);
    let dn = |l: f64| -2.0 * c1 / (l * l * l);
    let (s, c) = theta_deg.to_radians().sin_cos();
    let (o, e) = (no(lambda_p), ne(lambda_p));
    let n = 1.0 / (s * s / (e * e) + c * c / (o * o)).sqrt();
    let n3 = n * n * n;
    // ∂n/∂n_e = n³ sin²θ / n_e³ and ∂n/∂n_o = n³ cos²θ / n_o³.
    let (w_e, w_o) = (n3 * s * s / (e * e * e), n3 * c * c / (o * o * o));
    let df_dt = w_e * dn_e + w_o * dn_o - dn_o;
    let df_dl = w_e * dn(lambda_p) + w_o * dn(lambda_p) - 2.0 * dn(2.0 * lambda_p);
    -2.0 * df_dt / df_dl
}

fn ac5() -> Checks {
    let mut c = Checks::new();
    let (a, b) = (2e-5, 6e-5);
    let wg = WaveguideConfig::new(synthetic(a, b), theta(70.0), 20.0, 300.0).unwrap();
    let lp = solve_pm_wavelength(&wg).unwrap().lambda_p_nm;
    let closed = synthetic_rate_closed_form(70.0, lp, a, b);
    let fd = tuning_rate(&wg, 1.0).unwrap().fh_nm_per_k;
    c.check(
        rel(fd, closed) < TUNING_REL,
        format!("linear thermo-optic fixture: finite difference {fd:.6} vs implicit {closed:.6} nm/K"),
    );
    c.check(
        rel(closed, ORACLE_SYNTH_RATE) < 1e-6,
        format!("implicit form agrees with high-precision reference {ORACLE_SYNTH_RATE:.6} nm/K"),
    );

    let eff = material("ln_lnoi_effective.mat");
    let wg = WaveguideConfig::new(eff.clone(), theta(DEVICE_THETA_DEG), 20.0, eff.reference_temperature()).unwrap();
    let rate = tuning_rate(&wg, 1.0).unwrap();
    c.check(
        rate.fh_nm_per_k > TUNING_BAND.0 && rate.fh_nm_per_k < TUNING_BAND.1,
        format!(
            "effective-index LN at 53.5°: {:.4} nm/K, positive and inside {TUNING_BAND:?}",
            rate.fh_nm_per_k
        ),
    );
    let bulk = material("ln_congruent_bulk.mat");
    let t = bulk.reference_temperature();
    let probe = WaveguideConfig::new(bulk.clone(), theta(45.0), 20.0, t).unwrap();
    let th = solve_pm_angle(&probe, 775.0).unwrap().theta_deg;
    let bulk_rate = tuning_rate(&probe.with_theta(theta(th)), 1.0).unwrap().fh_nm_per_k;
    c.check(
        bulk_rate > TUNING_BAND.0 && bulk_rate < TUNING_BAND.1,
        format!("bulk LN at its 775 nm angle {th:.4}°: {bulk_rate:.4} nm/K"),
    );
    c.note(format!(
        "quoted device rate {DEVICE_TUNING_NM_PER_K} nm/K (ratio {:.2}); not expected without mode dispersion",
        rate.fh_nm_per_k / DEVICE_TUNING_NM_PER_K
    ));
    c
}

/// Full width at half maximum by linear interpolation between grid points.
fn fwhm(points: &[(f64, f64)]) -> f64 {
    let (imax, _) = points
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, p)| if p.1 > best.1 { (i, p.1) } else { best });
    let cross = |i: usize, j: usize| {
        let ((x0, y0), (x1, y1)) = (points[i], points[j]);
        x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0)
    };
    let mut r = imax;
    while points[r + 1].1 >= 0.5 {
        r += 1;
    }
    let mut l = imax;
    while points[l - 1].1 >= 0.5 {
        l -= 1;
    }
    cross(r, r + 1) - cross(l - 1, l)
}

fn ac6() -> Checks {
    let mut c = Checks::new();
    let eff = material("ln_lnoi_effective.mat");
    let wg = WaveguideConfig::new(eff.clone(), theta(DEVICE_THETA_DEG), 20.0, eff.reference_temperature()).unwrap();
    let fh0 = solve_pm_wavelength(&wg).unwrap().lambda_s_nm;
    let grid: Vec<f64> = (-500..=500).map(|k| fh0 + 0.01 * k as f64).collect();
    let spec = ShgSpectrum::compute(&wg, &grid).unwrap();
    let at_pm = spec.points[500].1;
    c.check(
        at_pm == 1.0 && spec.max_efficiency() == 1.0 && spec.peak_lambda_nm == fh0,
        format!("efficiency at the solved FH {fh0:.6} nm is {at_pm:?}; peak at {:.6} nm", spec.peak_lambda_nm),
    );

    // Δk linear in λ: main lobe width 2·2.7831/(|κ|·L).
    let (kappa, center) = (-0.08, 1550.0);
    let grid = linear_grid(1545.0, 1555.0, 1e-4);
    let width = |length: f64| {
        let s = ShgSpectrum::from_phase_mismatch(&grid, length, |l| Ok(kappa * (l - center))).unwrap();
        fwhm(&s.points)
    };
    let (w10, w20) = (width(10.0), width(20.0));
    let ratio = w10 / w20;
    c.check(
        (ratio / 2.0 - 1.0).abs() < FWHM_REL,
        format!("linear Δk: FWHM {w10:.5} nm at 10 mm, {w20:.5} nm at 20 mm, ratio {ratio:.5}"),
    );
    let closed = 2.0 * 2.0 * 1.391_557_377_7 / (kappa.abs() * 10.0);
    c.check(
        rel(w10, closed) < FWHM_REL,
        format!("10 mm width vs sinc² half-power point 4·1.39156/(|κ|L) = {closed:.5} nm"),
    );
    let ln_ratio = fwhm(&ShgSpectrum::compute(&wg.with_length(10.0).unwrap(), &grid_around(fh0)).unwrap().points)
        / fwhm(&ShgSpectrum::compute(&wg, &grid_around(fh0)).unwrap().points);
    c.note(format!("on the LN model itself the 10 mm / 20 mm width ratio is {ln_ratio:.4}"));
    c
}

fn grid_around(center: f64) -> Vec<f64> {
    (-20_000..=20_000).map(|k| center + 1e-4 * k as f64).collect()
}

fn z(observed: f64, expected: f64, sigma: f64) -> f64 {
    (observed - expected) / sigma
}

fn ac7() -> Checks {
    let mut c = Checks::new();
    let mut model = SourceModel::new(1e6, device_loss());
    model.duration_s = 30.0;
    model.seed = SEED;
    let f = analytic_forward(&model).unwrap();
    let (stream, report) = simulate(&model);
    c.note(format!("{} events over {} s", stream.len(), model.duration_s));
    let r = report.rates;
    let e = f.measured;
    let t = model.duration_s;
    for (name, got, want) in [
        ("C_s", r.c_s, e.c_s),
        ("C_i", r.c_i, e.c_i),
        ("C_si", r.c_si, e.c_si),
        ("C_si1", r.c_si1, e.c_si1),
        ("C_si2", r.c_si2, e.c_si2),
    ] {
        let sigma = (want * t).sqrt() / t;
        let zs = z(got, want, sigma);
        c.check(
            zs.abs() < MC_SIGMAS,
            format!("{name}: {got:.2} Hz vs analytic {want:.2} Hz ({zs:+.2}σ)"),
        );
    }
    let p = report.metrics.pgr.clone().unwrap();
    let p_ref = pgr(&e).unwrap().value;
    c.check(
        p.z_score(p_ref).abs() < MC_SIGMAS,
        format!("PGR: {:.1} ± {:.1} Hz vs analytic {p_ref:.1} Hz ({:+.2}σ)", p.value, p.sigma, p.z_score(p_ref)),
    );
    c.check(
        p.z_score(model.pair_rate_hz).abs() < MC_SIGMAS,
        format!("PGR recovers μ = {} Hz ({:+.2}σ)", model.pair_rate_hz, p.z_score(model.pair_rate_hz)),
    );
    let car = report.metrics.car.clone().unwrap();
    let car_est = Estimate::new(car.value, car.sigma);
    c.check(
        !car.lower_bound && car_est.z_score(f.car).abs() < MC_SIGMAS,
        format!(
            "CAR: {:.2} ± {:.2} vs analytic {:.2} ({:+.2}σ)",
            car.value,
            car.sigma,
            f.car,
            car_est.z_score(f.car)
        ),
    );
    c
}

fn ac8() -> Checks {
    let mut c = Checks::new();
    let mus = [1e5, 3e5, 1e6, 3e6, 1e7];
    let mut products = Vec::new();
    let mut analytic = Vec::new();
    for (k, &mu) in mus.iter().enumerate() {
        let mut model = SourceModel::new(mu, device_loss());
        model.dark_rate_hz = PerChannel::uniform(0.0);
        model.duration_s = 1e7 / mu;
        model.seed = SEED + k as u64;
        let (_, report) = simulate(&model);
        let prod = report.metrics.car_times_pgr().unwrap();
        c.note(format!(
            "μ = {mu:.0e} Hz, {:.1} s: CAR {:.1}, PGR {:.4e} Hz, CAR×PGR {:.4e} ± {:.1e} Hz",
            model.duration_s,
            report.metrics.car.as_ref().unwrap().value,
            report.metrics.pgr.as_ref().unwrap().value,
            prod.value,
            prod.sigma
        ));
        products.push(prod.value);
        let f = analytic_forward(&model).unwrap();
        analytic.push(f.car * pgr(&f.true_rates).unwrap().value);
    }
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    let spread = (products.iter().cloned().fold(f64::MIN, f64::max) - products.iter().cloned().fold(f64::MAX, f64::min)) / mean;
    c.check(
        spread < PRODUCT_SPREAD,
        format!("simulated CAR×PGR spread (max − min)/mean = {:.2} % (allowed {:.0} %)", 100.0 * spread, 100.0 * PRODUCT_SPREAD),
    );
    let worst = analytic.iter().map(|v| rel(*v, analytic[0])).fold(0.0, f64::max);
    c.check(
        worst < ANALYTIC_PRODUCT_REL,
        format!("dark-free analytic product {:.6e} Hz, constant to {worst:.1e}", analytic[0]),
    );
    c.note(format!(
        "quoted ≈ {DEVICE_PRODUCT_HZ:.1e} Hz; mean here {mean:.3e} Hz. Reproducing the quoted value needs an effective window of {:.0} ps",
        1e12 / DEVICE_PRODUCT_HZ * (mean * 1e-9)
    ));
    c
}

fn ac9() -> Checks {
    let mut c = Checks::new();
    let mut low = SourceModel::from_brightness(DEVICE_BRIGHTNESS_HZ_PER_MW, DEVICE_LOW_PUMP_MW, device_loss());
    low.duration_s = 30.0;
    low.seed = SEED;
    let (_, report) = simulate(&low);
    let g2 = report.metrics.g2h_zero.clone().unwrap();
    c.check(
        g2.value < G2_LOW_PUMP_MAX,
        format!(
            "μ = {:.3e} Hz ({DEVICE_LOW_PUMP_MW} mW): g2_H(0) = {:.4} ± {:.4} from {} triples (quoted {} ± {})",
            low.pair_rate_hz, g2.value, g2.sigma, report.counts.s_i1_i2, DEVICE_G2.0, DEVICE_G2.1
        ),
    );
    let sweep = [(1e6, 40.0), (2e6, 20.0), (4e6, 10.0), (1e7, 4.0)];
    let mut values = Vec::new();
    for (k, &(mu, secs)) in sweep.iter().enumerate() {
        let mut m = SourceModel::new(mu, device_loss());
        m.duration_s = secs;
        m.seed = SEED + 100 + k as u64;
        let (_, rep) = simulate(&m);
        let g = rep.metrics.g2h_zero.clone().unwrap();
        c.note(format!("μ = {mu:.0e} Hz: g2_H(0) = {:.5} ± {:.5}", g.value, g.sigma));
        values.push(g.value);
    }
    c.check(
        values.windows(2).all(|w| w[1] > w[0]),
        "g2_H(0) rises monotonically across the 10× sweep",
    );
    c
}

fn ac10() -> Checks {
    let mut c = Checks::new();
    let mut model = SourceModel::new(2e6, device_loss());
    model.duration_s = 2.0;
    model.seed = SEED;
    let first = generate_tags(&model).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let second = pool.install(|| generate_tags(&model).unwrap());
    c.check(
        first.len() >= ROUND_TRIP_EVENTS,
        format!("stream holds {} events", first.len()),
    );
    c.check(first == second, "same seed on 1 thread and on the default pool gives identical streams");

    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    write_tags(&first, &pa).unwrap();
    write_tags(&second, &pb).unwrap();
    let bytes = std::fs::read(&pa).unwrap();
    c.check(bytes == std::fs::read(&pb).unwrap(), "tag files are byte-identical");
    let back = read_tags(&pa).unwrap();
    c.check(back == first, "read(write(stream)) equals the stream");
    let mut again = Vec::new();
    write_tags_to(&back, &mut again).unwrap();
    c.check(again == bytes, "re-serialization is byte-identical");

    let header = CsvHeader::new(b"acceptance", model.seed);
    let opts = AnalysisOptions::for_model(&model);
    let csvs = |s: &TagStream| {
        let r = analyze(s, &opts).unwrap();
        (metrics_csv(&header, &r), histogram_csv(&header, &r.histogram))
    };
    let (m1, h1) = csvs(&first);
    let (m2, h2) = csvs(&back);
    c.check(m1 == m2 && h1 == h2, "metrics and histogram CSVs identical for original and re-read stream");
    c
}

type Criterion = (&'static str, &'static str, Duration, fn() -> Checks);

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", "index ellipsoid endpoints, bounds, monotonicity", Duration::from_secs(1), ac1),
        ("AC2", "heralding efficiency from arm loss", Duration::from_secs(1), ac2),
        ("AC3", "phase-matching solver vs exhaustive scan", Duration::from_secs(5), ac3),
        ("AC4", "tabulated crossing anchor", Duration::from_secs(1), ac4),
        ("AC5", "thermal tuning rate", Duration::from_secs(5), ac5),
        ("AC6", "SHG spectrum peak and width scaling", Duration::from_secs(2), ac6),
        ("AC7", "Monte Carlo vs analytic forward model", Duration::from_secs(60), ac7),
        ("AC8", "CAR×PGR invariance", Duration::from_secs(180), ac8),
        ("AC9", "heralded antibunching", Duration::from_secs(180), ac9),
        ("AC10", "determinism and tag-file round trip", Duration::from_secs(30), ac10),
    ];
    let mut unexpected = 0;
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let mut checks = run();
        let elapsed = start.elapsed();
        checks.check(
            elapsed <= budget,
            format!("runtime {:.2} s within {} s", elapsed.as_secs_f64(), budget.as_secs()),
        );
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id);
        let verdict = if checks.ok { "PASS" } else { "FAIL" };
        let suffix = match (checks.ok, known) {
            (false, Some((_, why))) => format!(" (known: {why})"),
            (true, Some(_)) => {
                unexpected += 1;
                " (listed as unattainable but passed)".to_string()
            }
            (false, None) => {
                unexpected += 1;
                String::new()
            }
            (true, None) => String::new(),
        };
        println!("{id:<5} {verdict}  {title}  [{:.2} s]{suffix}", elapsed.as_secs_f64());
        for line in &checks.lines {
            println!("{line}");
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criterion result(s) differ from expectation");
        std::process::exit(1);
    }
}
