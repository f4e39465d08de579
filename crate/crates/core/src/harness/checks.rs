//! The verification checks behind `tangency-lab run`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::currents::{CurrentError, PolyhedralCurrent};
use crate::density::{
    ball_mass, cone_fraction, density, lebesgue_value, monte_carlo_ball_mass, superdensity_ratio,
    AnnihilatorMask, BallOptions, Complement, DensityReport, Full, MeasureSpec, Normalization,
    RadiusSchedule, TangencyMask, Tolerance, Trend, DEFAULT_MAX_SPLITS, TAIL_LEN,
};
use crate::exterior::{interior, is_simple, pair, span, KCovector, KVector, MultiIndex};
use crate::forms::{DifferentialForm, Distribution, FormError};
use crate::plane::tangency_defect;

use super::report::{CheckRecord, LevelRecord, PointRecord, Report, Series, Verdict};
use super::scenario::{
    CheckKind, FrobeniusExpectation, FrobeniusParams, RefinementParams, Scenario,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Current(#[from] CurrentError),
}

/// Threshold below which the pointwise orientation counts as zero.
const TAU_ZERO: f64 = 1e-12;

/// Runs every selected check in scenario order.
pub fn run(scenario: &Scenario) -> Result<Report, RunError> {
    let mut report = Report::empty(&scenario.name, scenario.seed);
    for &check in &scenario.checks {
        log::info!("running {}", check.name());
        let record = match check {
            CheckKind::Frobenius => run_frobenius(scenario)?,
            CheckKind::Density => run_density(scenario),
            CheckKind::Tangency => run_tangency(scenario)?,
            CheckKind::InvolutiveSet => run_involutive_set(scenario)?,
            CheckKind::Refinement => run_refinement(scenario)?,
            CheckKind::Stokes => run_stokes(scenario)?,
            CheckKind::MonteCarlo => run_montecarlo(scenario),
        };
        report.checks.push(record);
    }
    Ok(report)
}

fn ball_options(sc: &Scenario) -> BallOptions {
    BallOptions {
        tol: Tolerance::Relative(sc.tolerances.ball),
        depth: sc.tolerances.depth,
        max_splits: DEFAULT_MAX_SPLITS,
    }
}

fn boundary_of(current: &PolyhedralCurrent) -> PolyhedralCurrent {
    if current.grade() == 0 {
        return PolyhedralCurrent::empty(current.ambient(), 0);
    }
    current.boundary().expect("grade at least 1")
}

fn echo_common(record: &mut CheckRecord, sc: &Scenario) {
    let RadiusSchedule { r0, factor, count } = sc.schedule;
    record.param(
        "schedule",
        format!("r0={r0}, factor={factor}, count={count}"),
    );
    record.param("ball_tol", format!("{}·(2r)^k", sc.tolerances.ball));
    record.param("depth", sc.tolerances.depth);
}

fn distribution(sc: &Scenario) -> &Distribution {
    sc.distribution
        .as_ref()
        .expect("validated: distribution present")
}

fn grid(params: &FrobeniusParams) -> Vec<Vec<f64>> {
    let axis = |i: usize| -> Vec<f64> {
        let (a, b) = (params.lower[i], params.upper[i]);
        if params.count == 1 {
            return vec![a];
        }
        (0..params.count)
            .map(|j| a + (b - a) * j as f64 / (params.count - 1) as f64)
            .collect()
    };
    let axes: Vec<Vec<f64>> = (0..params.lower.len()).map(axis).collect();
    let mut points = vec![Vec::new()];
    for values in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Involutivity defect over a grid.
pub fn run_frobenius(sc: &Scenario) -> Result<CheckRecord, RunError> {
    let d = distribution(sc);
    let params = sc
        .frobenius
        .as_ref()
        .expect("validated: frobenius block present");
    let tol = sc.tolerances.involutivity;
    let mut record = CheckRecord::new("frobenius");
    record.param(
        "grid",
        format!("{:?}..{:?} x{}", params.lower, params.upper, params.count),
    );
    record.param("involutivity_tol", tol);
    let (mut max, mut min, mut involutive, mut degenerate) =
        (0.0_f64, f64::INFINITY, 0usize, 0usize);
    let mut verdicts = Vec::new();
    for x in grid(params) {
        let mut p = PointRecord::new(None, x.clone());
        match d.involutivity_defect(&x) {
            Ok(defect) => {
                p.value("defect", defect);
                p.flag("involutive", defect < tol);
                max = max.max(defect);
                min = min.min(defect);
                if defect < tol {
                    involutive += 1;
                }
                p.verdict = match params.expect {
                    None => Verdict::Info,
                    Some(FrobeniusExpectation::Involutive) if defect < tol => Verdict::Pass,
                    Some(FrobeniusExpectation::NonInvolutive) if defect >= tol => Verdict::Pass,
                    Some(_) => Verdict::Fail,
                };
            }
            Err(FormError::Degenerate(_)) => {
                degenerate += 1;
                p.flag("degenerate", true);
                p.notes
                    .push("defining forms are linearly dependent here".into());
                p.verdict = if params.expect.is_some() {
                    Verdict::HypothesesNotMet
                } else {
                    Verdict::Info
                };
            }
            Err(e) => return Err(e.into()),
        }
        verdicts.push(p.verdict);
        record.points.push(p);
    }
    let total = record.points.len();
    record.values.insert("max_defect".into(), max);
    record.values.insert("min_defect".into(), min);
    record
        .values
        .insert("involutive_points".into(), involutive as f64);
    record
        .values
        .insert("degenerate_points".into(), degenerate as f64);
    record.verdict = Verdict::combine(verdicts);
    record.summary = format!(
        "{involutive}/{total} grid points involutive at tol {tol:e}; defect range [{min:.3e}, {max:.3e}]; {degenerate} degenerate"
    );
    Ok(record)
}

/// `μ(B_r(x))/(2r)ˢ` at every query point and level.
pub fn run_density(sc: &Scenario) -> CheckRecord {
    let mut record = CheckRecord::new("density");
    echo_common(&mut record, sc);
    record.param("s", sc.s);
    if let Some([lo, hi]) = sc.density_expect {
        record.param("expect", format!("[{lo}, {hi}]"));
    }
    let opts = ball_options(sc);
    let mut verdicts = Vec::new();
    for (l, level) in sc.levels.iter().enumerate() {
        let mu = MeasureSpec::new(&level.current, &Full);
        for x in sc.points_f64() {
            let report = density(&mu, &x, sc.s, &sc.schedule, &opts);
            let mut p = PointRecord::new(Some(l), x);
            p.value("theta_lower", report.theta_lower);
            p.value("theta_upper", report.theta_upper);
            p.value("slack", report.slack);
            if let Some(s) = report.slope {
                p.value("slope", s);
            }
            p.verdict = match sc.density_expect {
                None => Verdict::Info,
                Some([lo, hi]) => {
                    let inside = |v: f64| (lo..=hi).contains(&v);
                    if inside(report.theta_lower) && inside(report.theta_upper) {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    }
                }
            };
            p.series
                .push(Series::new("density", format!("(2r)^{}", sc.s), &report));
            verdicts.push(p.verdict);
            record.points.push(p);
        }
    }
    record.verdict = Verdict::combine(verdicts);
    record.summary = format!("{} point evaluations", record.points.len());
    record
}

fn tail_max(report: &DensityReport) -> f64 {
    let start = report.rows.len().saturating_sub(TAIL_LEN);
    report.rows[start..]
        .iter()
        .filter(|r| !r.skipped)
        .map(|r| r.mid())
        .fold(0.0, f64::max)
}

/// Whether the lower and upper density estimates agree within the band and
/// lie in `(0, ∞)`.
fn density_matches(report: &DensityReport, band: f64) -> bool {
    report.verdict == Trend::Bounded
        && report.theta_lower > 0.0
        && report.theta_upper.is_finite()
        && report.theta_upper - report.theta_lower <= band * report.theta_upper
}

/// Evaluation of the four conditions and two conclusions at one point.
#[derive(Debug, Clone)]
pub struct TangencyPoint {
    pub record: PointRecord,
    pub superdensity: DensityReport,
}

/// Conditions (i)–(iv) and, when they all hold, the two conclusions at
/// one point.
pub fn tangency_at(sc: &Scenario, level: usize, x: &[f64]) -> Result<TangencyPoint, RunError> {
    let d = distribution(sc);
    let tol = sc.tolerances.tangency;
    let opts = ball_options(sc);
    let t = &sc.levels[level].current;
    let bd = boundary_of(t);
    let mut p = PointRecord::new(Some(level), x.to_vec());

    let tau = lebesgue_value(t, x);
    let cond_i = tau.norm() > TAU_ZERO;
    p.value("tau_norm", tau.norm());

    let mu = MeasureSpec::new(t, &Full);
    let dens = density(&mu, x, sc.s, &sc.schedule, &opts);
    let cond_ii = density_matches(&dens, sc.tolerances.density_band);

    let gamma = TangencyMask::new(t, d, tol);
    let outside = Complement(&gamma);
    let sup = superdensity_ratio(
        &mu,
        &outside,
        x,
        Normalization::BallMass(sc.h),
        &sc.schedule,
        &opts,
    );
    let cond_iii = sup.verdict == Trend::Vanishing;

    let gamma_b = TangencyMask::new(&bd, d, tol);
    let outside_b = Complement(&gamma_b);
    let bd_measure = MeasureSpec::new(&bd, &Full);
    let bsup = superdensity_ratio(
        &bd_measure,
        &outside_b,
        x,
        Normalization::Power(sc.s),
        &sc.schedule,
        &opts,
    );
    let cond_iv = bsup.verdict == Trend::Vanishing;

    for (name, ok) in [
        ("i", cond_i),
        ("ii", cond_ii),
        ("iii", cond_iii),
        ("iv", cond_iv),
    ] {
        p.flag(&format!("condition_{name}"), ok);
    }

    // diagnostics recorded whether or not the hypotheses hold
    let span_defect = match d.plane(x) {
        Ok(plane) if cond_i => tangency_defect(&span(&tau), &plane).ok(),
        _ => None,
    };
    if let Some(v) = span_defect {
        p.value("tangency_defect", v);
    }
    let simple = cond_i && is_simple(&tau) && span(&tau).dim() == sc.k;
    p.flag("tau_simple", simple);
    let inv = d.involutivity_defect(x).ok();
    if let Some(v) = inv {
        p.value("involutivity_defect", v);
    }

    let failed: Vec<&str> = [
        ("(i)", cond_i),
        ("(ii)", cond_ii),
        ("(iii)", cond_iii),
        ("(iv)", cond_iv),
    ]
    .iter()
    .filter(|(_, ok)| !ok)
    .map(|(n, _)| *n)
    .collect();
    if failed.is_empty() {
        let c1 = simple && span_defect.is_some_and(|v| v < tol);
        let c2 = inv.is_some_and(|v| v < sc.tolerances.involutivity);
        p.flag("conclusion_1", c1);
        p.flag("conclusion_2", c2);
        p.verdict = if c1 && c2 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        if !c1 {
            p.notes.push("span of τ(x) differs from 𝒟(x)".into());
        }
        if !c2 {
            p.notes.push("distribution not involutive at x".into());
        }
    } else {
        p.verdict = Verdict::HypothesesNotMet;
        p.notes
            .push(format!("conditions not met: {}", failed.join(", ")));
    }
    p.series
        .push(Series::new("density", format!("(2r)^{}", sc.s), &dens));
    p.series.push(Series::new(
        "superdensity_gamma",
        format!("lambda(B_r)*r^{}", sc.h),
        &sup,
    ));
    p.series.push(Series::new(
        "boundary_outside_gamma",
        format!("r^{}", sc.s),
        &bsup,
    ));
    Ok(TangencyPoint {
        record: p,
        superdensity: sup,
    })
}

pub fn run_tangency(sc: &Scenario) -> Result<CheckRecord, RunError> {
    let mut record = CheckRecord::new("tangency");
    echo_common(&mut record, sc);
    record.param("s", sc.s);
    record.param("h", sc.h);
    record.param("tangency_tol", sc.tolerances.tangency);
    record.param("involutivity_tol", sc.tolerances.involutivity);
    record.param("null_set", "complement of the carrier");
    let mut verdicts = Vec::new();
    for l in 0..sc.levels.len() {
        let mut worst_defect = 0.0_f64;
        for x in sc.points_f64() {
            let point = tangency_at(sc, l, &x)?;
            if let Some(&v) = point.record.values.get("tangency_defect") {
                worst_defect = worst_defect.max(v);
            }
            verdicts.push(point.record.verdict);
            record.points.push(point.record);
        }
        let level = &sc.levels[l];
        let mut values = std::collections::BTreeMap::new();
        values.insert("max_tangency_defect".to_string(), worst_defect);
        record.levels.push(LevelRecord {
            level: l,
            label: level.label.clone(),
            mesh_size: level.mesh_size,
            values,
        });
    }
    if let Some(slope) = level_slope(&record.levels, "max_tangency_defect") {
        record.values.insert("tangency_defect_order".into(), slope);
    }
    record.verdict = Verdict::combine(verdicts);
    let passed = record
        .points
        .iter()
        .filter(|p| p.verdict == Verdict::Pass)
        .count();
    let unmet = record
        .points
        .iter()
        .filter(|p| p.verdict == Verdict::HypothesesNotMet)
        .count();
    record.summary = format!(
        "{passed} pass, {unmet} hypotheses not met, of {}",
        record.points.len()
    );
    Ok(record)
}

/// Log-log slope of a level value against mesh size.
fn level_slope(levels: &[LevelRecord], key: &str) -> Option<f64> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .filter_map(|l| Some((l.mesh_size?, *l.values.get(key)?)))
        .filter(|(h, v)| *h > 0.0 && *v > 0.0)
        .map(|(h, v)| (h.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// The two ratio sequences deciding membership in 𝒥, and the involutivity
/// test for members.
pub fn run_involutive_set(sc: &Scenario) -> Result<CheckRecord, RunError> {
    let d = distribution(sc);
    let tol = sc.tolerances.tangency;
    let opts = ball_options(sc);
    let k = sc.k as f64;
    let mut record = CheckRecord::new("involutive-set");
    echo_common(&mut record, sc);
    record.param("tangency_tol", tol);
    record.param("involutivity_tol", sc.tolerances.involutivity);
    let (mut members, mut passing) = (0usize, 0usize);
    let mut verdicts = Vec::new();
    for (l, level) in sc.levels.iter().enumerate() {
        let t = &level.current;
        let bd = boundary_of(t);
        let gamma = TangencyMask::new(t, d, tol);
        let gamma_b = TangencyMask::new(&bd, d, tol);
        let outside = Complement(&gamma);
        let outside_b = Complement(&gamma_b);
        let mu = MeasureSpec::new(t, &Full);
        let mu_b = MeasureSpec::new(&bd, &Full);
        for x in sc.points_f64() {
            let mut p = PointRecord::new(Some(l), x.clone());
            let first = superdensity_ratio(
                &mu,
                &outside,
                &x,
                Normalization::Power(k + 1.0),
                &sc.schedule,
                &opts,
            );
            let second = superdensity_ratio(
                &mu_b,
                &outside_b,
                &x,
                Normalization::Power(k),
                &sc.schedule,
                &opts,
            );
            let in_j = first.verdict == Trend::Vanishing && second.verdict == Trend::Vanishing;
            p.flag("in_j", in_j);
            p.value("first_ratio_tail_max", tail_max(&first));
            p.value("second_ratio_tail_max", tail_max(&second));
            if let Some(s) = first.slope {
                p.value("first_ratio_slope", s);
            }
            match d.involutivity_defect(&x) {
                Ok(v) => p.value("involutivity_defect", v),
                Err(_) => p.flag("degenerate", true),
            }
            p.verdict = if !in_j {
                p.notes.push(format!(
                    "not in J: first ratio {}, second ratio {}",
                    first.verdict.as_str(),
                    second.verdict.as_str()
                ));
                Verdict::HypothesesNotMet
            } else {
                members += 1;
                match p.values.get("involutivity_defect") {
                    Some(&v) if v < sc.tolerances.involutivity => {
                        passing += 1;
                        Verdict::Pass
                    }
                    Some(_) => Verdict::Fail,
                    None => Verdict::HypothesesNotMet,
                }
            };
            p.series.push(Series::new(
                "outside_gamma",
                format!("r^{}", k + 1.0),
                &first,
            ));
            p.series.push(Series::new(
                "boundary_outside_gamma",
                format!("r^{k}"),
                &second,
            ));
            verdicts.push(p.verdict);
            record.points.push(p);
        }
    }
    let total = record.points.len();
    record.values.insert("j_members".into(), members as f64);
    record.values.insert("j_passing".into(), passing as f64);
    if members > 0 {
        record
            .values
            .insert("j_pass_fraction".into(), passing as f64 / members as f64);
    }
    record.verdict = Verdict::combine(verdicts);
    record.summary = format!("{members}/{total} sampled points in J; {passing} of them involutive");
    Ok(record)
}

/// Terms of the contraction estimate at one point and level.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementPoint {
    pub lhs: f64,
    pub driver1: f64,
    pub driver2: f64,
    pub driver2_ball: f64,
    /// Relative interval slack of the density tail, bounding the noise in `driver1`.
    pub slack: f64,
    pub density_ok: bool,
    pub k_superdensity: Trend,
    pub k_defect: f64,
}

/// `max_α |⟨τ(x)⌞α; (dω)_x⟩|` over basis covectors `α` of grade `k − l − 1`.
pub fn contraction_lhs(
    tau: &KVector<f64>,
    form: &DifferentialForm,
    x: &[f64],
) -> Result<f64, RunError> {
    let n = form.ambient();
    let k = tau.grade();
    let dw = form.d()?.eval(x)?;
    let mut worst = 0.0_f64;
    for index in MultiIndex::all(n, k - form.grade() - 1) {
        let contracted = interior(tau, &KCovector::basis(n, index)).expect("grade fits");
        worst = worst.max(pair(&contracted, &dw).expect("grades agree").abs());
    }
    Ok(worst)
}

pub fn refinement_at(
    sc: &Scenario,
    params: &RefinementParams,
    level: usize,
    x: &[f64],
) -> Result<RefinementPoint, RunError> {
    let opts = ball_options(sc);
    let tol = sc.tolerances.tangency;
    let t = &sc.levels[level].current;
    let bd = boundary_of(t);
    let tau = lebesgue_value(t, x);
    let lhs = contraction_lhs(&tau, &params.form, x)?;

    let mu = MeasureSpec::new(t, &Full);
    let dens = density(&mu, x, sc.s, &sc.schedule, &opts);
    let density_ok =
        dens.theta_lower > 0.0 && dens.theta_upper.is_finite() && dens.verdict != Trend::Diverging;
    let driver1 = if dens.theta_upper > 0.0 {
        (1.0 - dens.theta_lower / dens.theta_upper).max(0.0)
    } else {
        f64::NAN
    };

    let k_prime = AnnihilatorMask::new(&bd, &params.form, tol);
    let outside_b = Complement(&k_prime);
    let bd_measure = MeasureSpec::new(&bd, &Full);
    let second = superdensity_ratio(
        &bd_measure,
        &outside_b,
        x,
        Normalization::Power(sc.s),
        &sc.schedule,
        &opts,
    );
    let driver2 = tail_max(&second);

    // variant dividing by μ(B_r) instead of rˢ
    let start = sc.schedule.count.saturating_sub(TAIL_LEN);
    let mut driver2_ball = 0.0_f64;
    for r in sc.schedule.radii().into_iter().skip(start) {
        let a = ball_mass(&bd, &outside_b, x, r, &opts);
        let b = ball_mass(t, &Full, x, r, &opts);
        if b.lower > 0.0 {
            driver2_ball = driver2_ball.max(a.mid() / b.mid());
        }
    }

    let k_mask = AnnihilatorMask::new(t, &params.form, tol);
    let outside = Complement(&k_mask);
    let k_sup = superdensity_ratio(
        &mu,
        &outside,
        x,
        Normalization::BallMass(1.0),
        &sc.schedule,
        &opts,
    );
    let k_defect = t
        .simplices()
        .iter()
        .enumerate()
        .filter(|(_, s)| cone_fraction(s, x) > 0.0)
        .map(|(i, _)| k_mask.defect(i, x))
        .fold(0.0, f64::max);

    Ok(RefinementPoint {
        lhs,
        driver1,
        driver2,
        driver2_ball,
        slack: dens.slack,
        density_ok,
        k_superdensity: k_sup.verdict,
        k_defect,
    })
}

/// Whether `values` never increase beyond `slack` from one entry to the next.
fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// The contraction estimate across a mesh family: hypotheses, drivers and the
/// left-hand side at each level, and the limiting trend.
pub fn run_refinement(sc: &Scenario) -> Result<CheckRecord, RunError> {
    let params = sc
        .refinement
        .as_ref()
        .expect("validated: refinement block present");
    let mut record = CheckRecord::new("refinement");
    echo_common(&mut record, sc);
    record.param("s", sc.s);
    record.param("form_grade", params.form.grade());
    record.param("annihilator_tol", sc.tolerances.tangency);
    record.param("decay", params.decay);
    record.param("driver_limit", params.driver_limit);
    let zero = sc.tolerances.involutivity;
    let points = sc.points_f64();
    let mut per_point: Vec<Vec<RefinementPoint>> = vec![Vec::new(); points.len()];
    for l in 0..sc.levels.len() {
        for (i, x) in points.iter().enumerate() {
            let v = refinement_at(sc, params, l, x)?;
            let mut p = PointRecord::new(Some(l), x.clone());
            p.value("lhs", v.lhs);
            p.value("driver1", v.driver1);
            p.value("driver2", v.driver2);
            p.value("driver2_ball", v.driver2_ball);
            p.value("k_defect", v.k_defect);
            let drivers = v.driver1 + v.driver2;
            if drivers > 0.0 {
                p.value("empirical_constant", v.lhs / drivers);
            }
            p.flag("density_hypothesis", v.density_ok);
            p.flag("k_superdensity", v.k_superdensity == Trend::Vanishing);
            record.points.push(p);
            per_point[i].push(v);
        }
        let level = &sc.levels[l];
        let mut values = std::collections::BTreeMap::new();
        let col =
            |f: fn(&RefinementPoint) -> f64| per_point.iter().map(|v| f(&v[l])).fold(0.0, f64::max);
        values.insert("max_lhs".to_string(), col(|v| v.lhs));
        values.insert("max_driver1".to_string(), col(|v| v.driver1));
        values.insert("max_driver2".to_string(), col(|v| v.driver2));
        values.insert("max_k_defect".to_string(), col(|v| v.k_defect));
        record.levels.push(LevelRecord {
            level: l,
            label: level.label.clone(),
            mesh_size: level.mesh_size,
            values,
        });
    }
    if let Some(slope) = level_slope(&record.levels, "max_lhs") {
        record.values.insert("lhs_order".into(), slope);
    }

    let mut verdicts = Vec::new();
    let mut notes = Vec::new();
    for (x, series) in points.iter().zip(&per_point) {
        let (verdict, note) = refinement_trend(series, params, zero);
        notes.push(format!("{x:?}: {note}"));
        verdicts.push(verdict);
        for p in record.points.iter_mut().filter(|p| &p.point == x) {
            p.verdict = verdict;
        }
    }
    record.verdict = Verdict::combine(verdicts);
    record.summary = notes.join("; ");
    Ok(record)
}

/// Verdict for one point's level series.
pub fn refinement_trend(
    series: &[RefinementPoint],
    params: &RefinementParams,
    zero: f64,
) -> (Verdict, String) {
    let lhs: Vec<f64> = series.iter().map(|v| v.lhs).collect();
    if lhs.iter().all(|&v| v < zero) {
        return (
            Verdict::Pass,
            "left-hand side vanishes at every level".into(),
        );
    }
    if !series.iter().all(|v| v.density_ok) {
        return (Verdict::HypothesesNotMet, "density bounds fail".into());
    }
    let k_defects: Vec<f64> = series.iter().map(|v| v.k_defect).collect();
    let k_every_level = series.iter().all(|v| v.k_superdensity == Trend::Vanishing);
    let k_in_limit = series.len() >= 2
        && non_increasing(&k_defects, 0.0)
        && k_defects[k_defects.len() - 1] <= 0.5 * k_defects[0];
    if !(k_every_level || k_in_limit) {
        return (
            Verdict::HypothesesNotMet,
            "x is not a 1-superdensity point of K".into(),
        );
    }
    let drivers: Vec<f64> = series.iter().map(|v| v.driver1 + v.driver2).collect();
    let slack = series.iter().map(|v| 2.0 * v.slack).fold(0.0, f64::max);
    let last = drivers[drivers.len() - 1];
    if !(last <= params.driver_limit && non_increasing(&drivers, slack)) {
        return (
            Verdict::HypothesesNotMet,
            format!("drivers do not tend to zero (final {last:.3e})"),
        );
    }
    if series.len() < 2 {
        return (
            Verdict::HypothesesNotMet,
            "a single level cannot show a trend".into(),
        );
    }
    let decreasing = lhs.windows(2).all(|w| w[1] < w[0]);
    let ratio = lhs[lhs.len() - 1] / lhs[0];
    if decreasing && ratio < params.decay {
        (
            Verdict::Pass,
            format!("left-hand side decays by {ratio:.3e}"),
        )
    } else {
        (
            Verdict::Fail,
            format!("left-hand side does not decay (final/initial {ratio:.3e})"),
        )
    }
}

/// Exact Stokes residuals and `∂∂ = 0` on every level.
pub fn run_stokes(sc: &Scenario) -> Result<CheckRecord, RunError> {
    let mut record = CheckRecord::new("stokes");
    record.param("forms", sc.stokes_forms.len());
    let mut ok = true;
    for (l, level) in sc.levels.iter().enumerate() {
        let t = &level.current;
        let mut values = std::collections::BTreeMap::new();
        if t.grade() == 0 {
            record.levels.push(LevelRecord {
                level: l,
                label: level.label.clone(),
                mesh_size: level.mesh_size,
                values,
            });
            continue;
        }
        let mut nonzero = 0usize;
        let mut worst = 0.0_f64;
        for f in &sc.stokes_forms {
            let residual = t.check_stokes(f)?;
            if !num_traits::Zero::is_zero(&residual) {
                nonzero += 1;
                worst = worst.max(crate::scalar::Scalar::to_f64(&residual));
            }
        }
        let bb = if t.grade() >= 2 {
            t.boundary()?.boundary()?.simplices().len()
        } else {
            0
        };
        ok &= nonzero == 0 && bb == 0;
        values.insert("nonzero_residuals".to_string(), nonzero as f64);
        values.insert("max_residual".to_string(), worst);
        values.insert("boundary_of_boundary_simplices".to_string(), bb as f64);
        values.insert("mass".to_string(), t.mass());
        record.levels.push(LevelRecord {
            level: l,
            label: level.label.clone(),
            mesh_size: level.mesh_size,
            values,
        });
    }
    record.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    record.summary = if ok {
        "all residuals exactly zero; boundary of boundary empty".into()
    } else {
        "nonzero Stokes residual or nonempty boundary of boundary".into()
    };
    Ok(record)
}

/// Seeded Monte-Carlo cross-check of the ball-mass intervals.
pub fn run_montecarlo(sc: &Scenario) -> CheckRecord {
    let opts = ball_options(sc);
    let mut record = CheckRecord::new("montecarlo");
    echo_common(&mut record, sc);
    record.param("samples", sc.montecarlo.samples);
    record.param("radii", sc.montecarlo.radii);
    let mut verdicts = Vec::new();
    let mut stream = 0u64;
    for (l, level) in sc.levels.iter().enumerate() {
        for x in sc.points_f64() {
            let mut p = PointRecord::new(Some(l), x.clone());
            let mut inside = true;
            for (j, r) in sc
                .schedule
                .radii()
                .into_iter()
                .take(sc.montecarlo.radii)
                .enumerate()
            {
                let e = ball_mass(&level.current, &Full, &x, r, &opts);
                let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
                rng.set_stream(stream);
                stream += 1;
                let (est, sigma) = monte_carlo_ball_mass(
                    &level.current,
                    &Full,
                    &x,
                    r,
                    sc.montecarlo.samples,
                    &mut rng,
                );
                let ok = e.lower - 3.0 * sigma <= est && est <= e.upper + 3.0 * sigma;
                inside &= ok;
                p.value(&format!("r{j}_lower"), e.lower);
                p.value(&format!("r{j}_upper"), e.upper);
                p.value(&format!("r{j}_mc"), est);
                p.value(&format!("r{j}_sigma"), sigma);
            }
            p.verdict = if inside { Verdict::Pass } else { Verdict::Fail };
            verdicts.push(p.verdict);
            record.points.push(p);
        }
    }
    record.verdict = Verdict::combine(verdicts);
    let passed = record
        .points
        .iter()
        .filter(|p| p.verdict == Verdict::Pass)
        .count();
    record.summary = format!(
        "{passed}/{} points within 3σ of the interval",
        record.points.len()
    );
    record
}
