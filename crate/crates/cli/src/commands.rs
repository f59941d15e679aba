//! Subcommand drivers. Each returns a report whose gates decide the exit code.

use std::f64::consts::PI;
use std::sync::Arc;

use nctorus::algebra::random_element;
use nctorus::curvature::{curvature_functional, heat_oracle, scalar_curvature};
use nctorus::gns::{det_algebra, element_power, extract_element, represent, MatrixOverAlgebra, TruncationBox};
use nctorus::laplace::{
    conjugate, conjugation_residual, curved_integration_check, curved_integration_series, low_eigenvalue_drift,
    lower_dim_volume,
};
use nctorus::metric::RiemannianMetric;
use nctorus::spectral::{
    counting, dixmier_estimate_complex, partial_sum_triples, trace_diagonal, weyl_fit, TraceSymbol,
};
use nctorus::{Element, Theta, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::metric_spec::{self, MetricContext};
use crate::report::{Gate, Report, Table};
use crate::{expr, symbol, CliError, Subcommand};

fn stage(name: &'static str) -> impl Fn(nctorus::Error) -> CliError {
    move |e| CliError::Numerical { stage: name.into(), message: e.to_string() }
}

fn new_report(sub: Subcommand, cfg: &ExperimentConfig) -> Report {
    let quad = cfg.sphere();
    Report::new(
        sub.name(),
        serde_json::to_value(cfg).expect("config serializes"),
        json!({ "k": cfg.bx.k, "p": cfg.bx.p }),
        json!({
            "sphere_order": cfg.sphere_order(),
            "sphere_nodes": quad.len(),
            "sphere_degree": quad.degree,
            "radial": cfg.quadrature.radial,
            "contour_nodes": cfg.contour.nodes,
        }),
    )
}

fn build_metric(cfg: &ExperimentConfig, theta: &Arc<Theta>) -> Result<RiemannianMetric, CliError> {
    let spec = metric_spec::parse(&cfg.metric).map_err(|e| CliError::Config(format!("in metric '{}': {e}", cfg.metric)))?;
    MetricContext { theta, tr: cfg.truncation(), factor_radius: cfg.factor_radius }.build(&spec)
}

fn records(e: &Element) -> serde_json::Value {
    serde_json::to_value(e.to_records()).expect("records serialize")
}

fn complex(z: C64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

fn rel(a: &Element, b: &Element) -> f64 {
    a.distance(b) / b.norm_l2().max(1.0)
}

pub fn run(sub: Subcommand, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match sub {
        Subcommand::AlgebraSelftest => algebra_selftest(cfg),
        Subcommand::Weyl => weyl(cfg),
        Subcommand::TraceTheorem => trace_theorem(cfg),
        Subcommand::Density => density(cfg),
        Subcommand::Integration => integration(cfg),
        Subcommand::Curvature => curvature(cfg),
        Subcommand::Volumes => volumes(cfg),
    }
}

fn algebra_selftest(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let theta = cfg.theta()?;
    let n = theta.n();
    let mut rep = new_report(Subcommand::AlgebraSelftest, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tol = cfg.tolerances.algebra;
    let active = vec![true; n];
    let radius = if n <= 3 { 2 } else { 1 };

    let mut cocycle: f64 = 0.0;
    for _ in 0..64 * cfg.samples {
        let mut pick = || -> Vec<i64> { (0..n).map(|_| rng.random_range(-3..=3)).collect() };
        let (k, l, m) = (pick(), pick(), pick());
        let kl: Vec<i64> = k.iter().zip(&l).map(|(a, b)| a + b).collect();
        let lm: Vec<i64> = l.iter().zip(&m).map(|(a, b)| a + b).collect();
        let lhs = theta.phase(&k, &l) * theta.phase(&kl, &m);
        let rhs = theta.phase(&k, &lm) * theta.phase(&l, &m);
        cocycle = cocycle.max((lhs - rhs).norm());
    }

    let (mut assoc, mut trace, mut leibniz, mut involution, mut anti, mut round_trip, mut commutator) =
        (0f64, 0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    let bx = Arc::new(TruncationBox::new(n, if n <= 3 { 4 } else { 2 }, radius as usize));
    for _ in 0..cfg.samples {
        let a = random_element(&theta, radius, &active, &mut rng);
        let b = random_element(&theta, radius, &active, &mut rng);
        let c = random_element(&theta, radius, &active, &mut rng);
        let ab = &a * &b;
        let scale = a.norm_l1() * b.norm_l1();
        assoc = assoc.max((&ab * &c).distance(&(&a * &(&b * &c))) / (scale * c.norm_l1()));
        trace = trace.max((ab.trace() - (&b * &a).trace()).norm() / scale);
        for j in 0..n {
            let lhs = ab.delta_j(j);
            let rhs = &(&a.delta_j(j) * &b) + &(&a * &b.delta_j(j));
            leibniz = leibniz.max(lhs.distance(&rhs) / scale);
        }
        involution = involution.max(a.adjoint().adjoint().distance(&a) / a.norm_l1());
        anti = anti.max(ab.adjoint().distance(&(&b.adjoint() * &a.adjoint())) / scale);
        let op = represent(&a, &bx);
        round_trip = round_trip.max(extract_element(&op, &theta).distance(&a) / a.norm_l1());
        for j in 0..n {
            let d = op.mode_commutator(j).sub(&represent(&a.delta_j(j), &bx));
            commutator = commutator.max(d.frobenius() / a.norm_l1());
        }
    }
    for (name, v) in [
        ("cocycle", cocycle),
        ("associativity", assoc),
        ("trace_property", trace),
        ("leibniz", leibniz),
        ("adjoint_involution", involution),
        ("adjoint_antimultiplicative", anti),
        ("represent_extract", round_trip),
        ("mode_commutator", commutator),
    ] {
        rep.set(name, v);
        rep.gate(Gate::at_most(name, v, tol));
    }
    rep.set("samples", cfg.samples);
    Ok(rep)
}

fn weyl(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let theta = cfg.theta()?;
    let rho = symbol::scalar(&cfg.rho, cfg.rho_power, &theta)?;
    let quad = cfg.sphere();
    let mut rep = new_report(Subcommand::Weyl, cfg);
    let w = weyl_fit(&rho, cfg.lambda_max, &quad).map_err(stage("weyl_fit"))?;
    let err = (w.c_hat - w.c_quadrature).abs() / w.c_quadrature;
    rep.set("weyl", &w);
    rep.set("relative_error", err);
    rep.gate(Gate::at_most("weyl_constant", err, cfg.tolerances.weyl_rel));
    if cfg.output.csv {
        let mut t = Table::new("counting", &["lambda", "count", "count_over_lambda_n"]);
        for i in 0..40 {
            let lam = cfg.lambda_max / 16.0 * 16f64.powf(i as f64 / 39.0);
            let c = counting(&rho, lam).map_err(stage("counting"))? as f64;
            t.rows.push(vec![lam, c, c / lam.powi(cfg.n as i32)]);
        }
        rep.tables.push(t);
    }
    Ok(rep)
}

fn trace_theorem(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let theta = cfg.theta()?;
    let p = TraceSymbol::Classical(symbol::classical(&cfg.symbol, &theta, Some(cfg.truncation()))?);
    let quad = cfg.sphere();
    let mut rep = new_report(Subcommand::TraceTheorem, cfg);
    let (seq, reliable, radius) = trace_diagonal(&p, cfg.n_max).map_err(stage("trace_diagonal"))?;
    let d = dixmier_estimate_complex(&seq, (cfg.n_min, cfg.n_max)).map_err(stage("dixmier_window"))?;
    let target = p.target(&quad);
    let scale = if target.norm() > 0.0 { target.norm() } else { 1.0 };
    let slope_err = (d.slope() - target).norm() / scale;
    let spread = d.re.spread.max(d.im.spread) / scale;
    rep.set("dixmier", &d);
    rep.set("target", complex(target));
    rep.set("reliable", reliable);
    rep.set("values", seq.len());
    rep.set("radius", radius);
    rep.set("slope_relative_error", slope_err);
    rep.set("estimator_relative_spread", spread);
    rep.gate(Gate::at_most("trace_slope", slope_err, cfg.tolerances.trace_rel));
    rep.gate(Gate::at_most("estimator_spread", spread, cfg.tolerances.spread_rel));
    if cfg.output.csv {
        let re: Vec<f64> = seq.iter().map(|z| z.re).collect();
        rep.tables.push(partial_sum_table(&re, (cfg.n_min, cfg.n_max)));
    }
    Ok(rep)
}

fn partial_sum_table(mu: &[f64], window: (usize, usize)) -> Table {
    let mut t = Table::new("partial_sums", &["n", "partial_sum", "over_log_n"]);
    for (k, s, r) in partial_sum_triples(mu, window, 200) {
        t.rows.push(vec![k as f64, s, r]);
    }
    t
}

fn density(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let theta = cfg.theta()?;
    let g = build_metric(cfg, &theta)?;
    let quad = cfg.sphere();
    let tol = cfg.tolerances;
    let mut rep = new_report(Subcommand::Density, cfg);
    let nu_t = g.spectral_density(&quad).map_err(stage("spectral_density"))?;
    let gauss = g.gaussian_density(&quad, cfg.quadrature.radial).map_err(stage("gaussian_density"))?;
    rep.set("spectral_density", records(&nu_t));
    rep.set("self_compatible", g.self_compatible);
    rep.set("compat_norm", g.compat_norm);
    rep.set("inverse_residual", g.inverse_residual);
    let gd = rel(&gauss, &nu_t);
    rep.set("gaussian_distance", gd);
    rep.gate(Gate::at_most("gaussian_identity", gd, tol.gaussian));
    let one = Element::one(&theta);
    let tr = g.tr;
    if g.is_flat() {
        let d = nu_t.distance(&one);
        rep.set("flat_distance", d);
        rep.gate(Gate::at_most("flat_density", d, tol.density_flat));
        let det_id = det_algebra(&MatrixOverAlgebra::identity(&theta, g.n()), tr).map_err(stage("det"))?;
        let d = det_id.distance(&one);
        rep.set("det_identity_distance", d);
        rep.gate(Gate::at_most("det_identity", d, tol.density_flat));
    } else if let Some(k) = g.conformal_factor.clone() {
        let kn = k.pow(g.n() as u32);
        let d = rel(&nu_t, &kn);
        rep.set("conformal_distance", d);
        rep.gate(Gate::at_most("conformal_density", d, tol.density_conformal));
        let s = 0.5;
        let hs = element_power(&(&k * &k), s, tr).map_err(stage("element_power"))?;
        let lhs = det_algebra(&MatrixOverAlgebra::diagonal(&vec![hs; g.n()]), tr).map_err(stage("det"))?;
        let det_h = det_algebra(&g.g, tr).map_err(stage("det"))?;
        let rhs = element_power(&det_h, s, tr).map_err(stage("element_power"))?;
        let d = rel(&lhs, &rhs);
        rep.set("det_power_distance", d);
        rep.gate(Gate::at_most("det_power", d, tol.det_power));
    } else {
        match g.riemannian_density() {
            Ok(nu) => {
                let d = rel(&nu_t, &nu);
                rep.set("riemannian_density", records(&nu));
                rep.set("compatible_distance", d);
                if g.self_compatible {
                    rep.gate(Gate::at_most("compatible_density", d, tol.density_compatible));
                }
            }
            Err(e) => rep.set("riemannian_density_error", e.to_string()),
        }
        if g.n() == 2 && g.self_compatible {
            let leibniz = &(g.g.get(0, 0) * g.g.get(1, 1)) - &(g.g.get(0, 1) * g.g.get(1, 0));
            let det = g.det().map_err(stage("det"))?;
            let d = rel(&det, &leibniz);
            rep.set("det_leibniz_distance", d);
            rep.gate(Gate::at_most("det_leibniz", d, tol.det_leibniz));
        }
    }
    if let Ok(v) = g.volume() {
        rep.set("volume", v);
    }
    Ok(rep)
}

fn integration(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let theta = cfg.theta()?;
    let g = build_metric(cfg, &theta)?;
    let a = expr::element(&cfg.element, &theta, Some(cfg.truncation()))?;
    let quad = cfg.sphere();
    let tol = cfg.tolerances;
    let mut rep = new_report(Subcommand::Integration, cfg);
    let r = curved_integration_check(&g, &a, cfg.n_min, cfg.fill, &quad).map_err(stage("integration_window"))?;
    rep.set("integration", &r);
    rep.set("estimate", complex(r.dixmier.slope()));
    rep.set("target", json!({ "re": r.target_re, "im": r.target_im }));
    rep.gate(Gate::at_most("integration_slope", r.relative_error, tol.integration_rel));
    rep.gate(Gate::at_least("reliable_count", r.reliable as f64, tol.min_reliable as f64));
    rep.gate(Gate::at_most("kernel_dimension", r.kernel_dim as f64, 1.0));
    if !g.is_flat() {
        let c = conjugation_residual(&g).map_err(stage("conjugation"))?;
        rep.set("conjugation_residual", c);
        if cfg.drift {
            let d = low_eigenvalue_drift(&g, cfg.drift_count).map_err(stage("eigenvalue_drift"))?;
            rep.set("low_eigenvalue_drift", d);
            rep.gate(Gate::at_most("eigenvalue_drift", d, tol.drift));
        }
    }
    if cfg.output.csv {
        let s = curved_integration_series(&g, &a).map_err(stage("integration_series"))?;
        let re: Vec<f64> = s.series.iter().map(|z| z.re).collect();
        rep.tables.push(partial_sum_table(&re, (cfg.n_min, r.reliable)));
    }
    Ok(rep)
}

fn curvature(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let theta = cfg.theta()?;
    let g = build_metric(cfg, &theta)?;
    let a = expr::element(&cfg.element, &theta, Some(cfg.truncation()))?;
    let quad = cfg.sphere();
    let policy = cfg.contour_policy();
    let tol = cfg.tolerances;
    let mut rep = new_report(Subcommand::Curvature, cfg);
    let kappa = scalar_curvature(&g, &quad, &policy).map_err(stage("curvature"))?;
    let norm = kappa.norm_l2();
    rep.set("kappa", records(&kappa));
    rep.set("kappa_norm", norm);
    rep.set("kappa_trace", complex(kappa.trace()));
    rep.set("kappa_selfadjoint_defect", kappa.selfadjoint_defect());
    rep.set("functional", complex(curvature_functional(&kappa, &a)));
    if g.is_flat() {
        rep.gate(Gate::at_most("flat_curvature", norm, tol.curvature_flat));
    }
    let (b, s) = cfg.contour.perturbation;
    let pert = scalar_curvature(&g, &quad, &policy.perturbed(b, s)).map_err(stage("curvature_perturbed"))?;
    let d = pert.distance(&kappa) / norm.max(1.0);
    rep.set("contour_perturbation", d);
    rep.gate(Gate::at_most("contour_perturbation", d, tol.contour_perturbation));
    let dbl = scalar_curvature(&g, &quad.doubled(), &policy.doubled()).map_err(stage("curvature_doubled"))?;
    let d = dbl.distance(&kappa) / norm.max(1.0);
    rep.set("quadrature_doubling", d);
    rep.gate(Gate::at_most("quadrature_doubling", d, tol.quadrature_doubling));
    if let Some((heat_box, window, modes)) = cfg.heat_box() {
        let op = conjugate(&g).map_err(stage("conjugate"))?;
        let oracle = heat_oracle(&op, heat_box, window, &modes).map_err(stage("heat_oracle"))?;
        let (mut diff, mut base) = (0.0, 0.0);
        let mut per_mode = Vec::new();
        for f in &oracle.fits {
            let h = C64::new(f.kappa.0, f.kappa.1);
            let c = kappa.coeff(&f.mode);
            diff += (c - h).norm_sqr();
            base += h.norm_sqr();
            per_mode.push(json!({ "mode": f.mode, "contour": complex(c), "heat": complex(h), "residual": f.residual }));
        }
        let l2 = (diff / base.max(f64::MIN_POSITIVE)).sqrt();
        rep.set("heat_modes", per_mode);
        rep.set("heat_tail", oracle.tail);
        rep.set("heat_dim", oracle.dim);
        rep.set("heat_relative_l2", l2);
        rep.gate(Gate::at_most("heat_oracle", l2, tol.heat_rel));
        if let Some(f0) = oracle.fit(&vec![0; g.n()]) {
            let h = f0.kappa.0;
            if h.abs() >= 0.1 * base.sqrt() {
                let e = (kappa.trace().re - h).abs() / h.abs();
                rep.set("heat_trace_relative_error", e);
                rep.gate(Gate::at_most("heat_trace", e, tol.heat_rel));
            }
        }
    }
    Ok(rep)
}

fn volumes(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let theta = cfg.theta()?;
    let g = build_metric(cfg, &theta)?;
    let quad = cfg.sphere();
    let policy = cfg.contour_policy();
    let n = g.n();
    let mut rep = new_report(Subcommand::Volumes, cfg);
    let mut vols = serde_json::Map::new();
    for k in (n - 2)..=n {
        let v = lower_dim_volume(&g, k, &quad, &policy).map_err(stage("volume"))?;
        vols.insert(k.to_string(), complex(v));
        if k == n && g.self_compatible {
            let vol = g.volume().map_err(stage("volume"))?;
            let d = (v.re - vol).abs() / vol.abs().max(1.0);
            rep.set("riemannian_volume", vol);
            rep.gate(Gate::at_most("top_volume", d, cfg.tolerances.volume));
        }
    }
    rep.set("volumes", vols);
    rep.set("flat_reference", (2.0 * PI).powi(n as i32));
    Ok(rep)
}
