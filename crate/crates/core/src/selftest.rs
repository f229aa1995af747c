//! Fast sanity suite behind `chemospread selftest`: closed-form cases that
//! every build must reproduce exactly or to rounding.

use crate::comparison::{envelope_pair, logistic};
use crate::elliptic::{gradient, kernel_oracle_1d, solve_screened, GradientMethod};
use crate::grid::{make_initial, Field, Grid, InitialSpec};
use crate::io::{format_real, parse_config};
use crate::regime::{speeds, thresholds, Bound, ModelParams};
use crate::stepper::{run, RunConfig, SchemeConfig, Stepper};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

const FISHER_CONFIG: &str = "[model]\nchi1 = 0\nchi2 = 0\na = 1\nb = 1\ndim = 1\n\n\
[grid]\nn = 4096\nhalf_length = 200\n\n[experiment]\nkind = \"spreading\"\nT = 80\n";

pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();
    let mut check = |name: &'static str, passed: bool| out.push(Check { name, passed });

    let fisher = ModelParams::fisher(1.0, 1.0, 1);
    let sp = speeds(&fisher);
    check(
        "fisher_speed_bounds",
        sp.c_plus == Bound::Value(2.0) && sp.c_minus == Bound::Value(2.0),
    );

    let cancel = ModelParams::new(0.5, 1.0, 2.0, 1.0, 1.5, 1.5, 2.0, 1.0, 1).unwrap();
    let th = thresholds(&cancel);
    check(
        "cancellation_thresholds_vanish",
        th.m == 0.0 && th.k == 0.0 && th.d == 0.0 && th.l == Bound::Value(0.0),
    );

    let g = Grid::new(1, 64, 8.0).unwrap();
    let v = solve_screened(&Field::constant(g, 2.0), 0.5, 3.0).unwrap();
    check(
        "screened_constant",
        v.values().iter().all(|&x| close(x, 12.0, 1e-12)),
    );

    let k1 = std::f64::consts::PI / 8.0;
    let u = Field::from_fn(g, |x| (k1 * x[0]).cos());
    let v = solve_screened(&u, 1.0, 1.0).unwrap();
    check(
        "screened_eigenfunction",
        v.values()
            .iter()
            .zip(u.values())
            .all(|(a, c)| close(*a, c / (1.0 + k1 * k1), 1e-12)),
    );

    check(
        "oracle_zero",
        kernel_oracle_1d(&Field::zeros(g), 1.0, 1.0, 0.5) == Ok(0.0),
    );
    let gs = Grid::new(1, 1024, 20.0).unwrap();
    let mut spike = Field::zeros(gs);
    spike.values_mut()[512] = 1.0 / gs.dx();
    check(
        "oracle_spike",
        kernel_oracle_1d(&spike, 1.0, 1.0, 2.0)
            .is_ok_and(|v| close(v, 0.5 * (-2.0f64).exp(), 1e-12)),
    );

    let flat = gradient(&Field::constant(g, 3.0), GradientMethod::Spectral);
    check(
        "gradient_of_constant",
        flat[0].values().iter().all(|w| w.abs() < 1e-12),
    );

    let mut st = Stepper::new(cancel, g, SchemeConfig::default()).unwrap();
    let mut s = st.init(Field::constant(g, 2.0));
    let dt = st.cfl_dt(&s);
    let stepped = st.step(&mut s, dt).is_ok();
    check(
        "equilibrium_fixed_point",
        stepped && s.u().values().iter().all(|&x| close(x, 2.0, 1e-12)),
    );

    let mut st = Stepper::new(fisher, g, SchemeConfig::default()).unwrap();
    let mut s = st.init(Field::constant(g, 0.5));
    let stepped = st.step(&mut s, 0.01).is_ok();
    check(
        "logistic_euler_step",
        stepped && s.u().values().iter().all(|&x| close(x, 0.5025, 1e-15)),
    );

    let u0 = make_initial(g, InitialSpec::CompactBump { h: 1.0, rho: 1.5 }).unwrap();
    let cancel_fisher_like = ModelParams::new(0.5, 1.0, 2.0, 1.0, 1.5, 1.5, 1.0, 1.0, 1).unwrap();
    let cfg = RunConfig::new(0.5, 0.25);
    let a = run(&fisher, u0.clone(), SchemeConfig::default(), cfg, &mut []);
    let b = run(
        &cancel_fisher_like,
        u0.clone(),
        SchemeConfig::default(),
        cfg,
        &mut [],
    );
    check(
        "cancellation_bitwise",
        matches!((&a, &b), (Ok(a), Ok(b)) if a.state.u() == b.state.u()),
    );

    let zero = run(
        &fisher,
        u0.clone(),
        SchemeConfig::default(),
        RunConfig::new(0.0, 0.5),
        &mut [],
    );
    check(
        "zero_horizon",
        zero.is_ok_and(|o| o.series.len() == 1 && o.state.u() == &u0),
    );

    check(
        "logistic_fixed_point",
        close(logistic(2.0, 4.0, 0.5, 3.0), 0.5, 1e-15),
    );
    check(
        "logistic_capacity",
        close(logistic(1.0, 1.0, 0.5, 50.0), 1.0, 1e-15),
    );
    check(
        "envelope_without_taxis",
        envelope_pair(&ModelParams::fisher(1.5, 2.0, 1), 0.1, 2.0) == Ok((0.75, 0.75)),
    );

    let parsed = parse_config(FISHER_CONFIG);
    check(
        "config_minimal",
        parsed.as_ref().is_ok_and(|c| c.params() == fisher),
    );
    check(
        "config_echo_fixed_point",
        parsed
            .as_ref()
            .is_ok_and(|c| parse_config(&c.echo()).is_ok_and(|d| &d == c)),
    );
    check(
        "config_rejects_lam1_zero",
        parse_config(&FISHER_CONFIG.replace("b = 1", "b = 1\nlam1 = 0"))
            .is_err_and(|e| e.to_string() == "lam1 must be > 0"),
    );
    check(
        "config_rejects_unknown_key",
        parse_config(&FISHER_CONFIG.replace("chi1", "ch1"))
            .is_err_and(|e| e.to_string().contains("ch1")),
    );
    check(
        "nan_literal",
        format_real(f64::NAN) == "nan" && "nan".parse::<f64>().is_ok_and(f64::is_nan),
    );

    out
}
