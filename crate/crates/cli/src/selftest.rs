//! Built-in consistency checks: every identity here has two independent
//! routes inside the library, so a pass means the numerical and exact
//! layers agree on a small graph.

use gasket_core::closed_form::{
    normal_derivative_limit, normal_derivative_partial, profile_center_value, ExactObstacle,
};
use gasket_core::fields::{discretize, Density};
use gasket_core::gasket::{GasketLevel, Vertex};
use gasket_core::green::{GreenSeries, GreenTable};
use gasket_core::harmonic::{laplacian, uniform_load_profile};
use gasket_core::obstacle::{build_obstacle, obstacle_profile};
use gasket_core::scalar::Scalar;
use gasket_core::{Error, Result};
use num_rational::BigRational;

fn rat(num: i64, den: u64) -> BigRational {
    BigRational::from_ratio(num, den)
}

fn ball3() -> Density {
    Density::from_json(
        r#"{"bound_L": 2, "terms": [{"coeff": "3",
            "center": {"half": "+", "a": 0, "b": 0, "level": 0},
            "radius_log2": 0}]}"#,
    )
    .expect("built-in density parses")
}

fn green_routes_agree() -> std::result::Result<String, String> {
    let g = GasketLevel::new(2, 1);
    let table = GreenTable::build(&g);
    let series = GreenSeries::<f64>::build(&g);
    let interior = g.interior_indices();
    let mut worst = 0.0f64;
    for &x in &interior {
        for &y in &interior {
            worst = worst.max((table.green(x, y) - series.value(x, y)).abs());
        }
    }
    if worst < 1e-9 {
        Ok(format!("max gap {worst:.2e}"))
    } else {
        Err(format!("max gap {worst:.2e} exceeds 1e-9"))
    }
}

fn cap_matches_axis_start() -> std::result::Result<String, String> {
    let e = ExactObstacle::new(0, 2);
    let want = rat(8, 3) * rat(25, 1);
    if e.cap() == want && e.axis_value(0) == want {
        Ok("200/3 on both routes".into())
    } else {
        Err(format!("cap {} axis {} want {}", e.cap(), e.axis_value(0), want))
    }
}

fn profile_center_values_pin() -> std::result::Result<String, String> {
    let want = [rat(-4, 3), rat(-20, 3), rat(-100, 3), rat(-500, 3)];
    for (i, w) in want.iter().enumerate() {
        let got = profile_center_value(i as u32);
        if got != *w {
            return Err(format!("center value at depth {i}: {got}, want {w}"));
        }
    }
    Ok("depths 0..4 exact".into())
}

fn normal_derivative_converges() -> std::result::Result<String, String> {
    let limit = normal_derivative_limit(0).to_f64();
    let partial = normal_derivative_partial(0, 24);
    if partial >= normal_derivative_limit(0) {
        return Err(format!("partial sum {partial} not below the limit"));
    }
    let rel = (limit - partial.to_f64()) / limit;
    if rel < 1e-9 {
        Ok(format!("rel gap {rel:.2e} at depth 24"))
    } else {
        Err(format!("rel gap {rel:.2e} exceeds 1e-9"))
    }
}

fn uniform_load_identity() -> std::result::Result<String, String> {
    let (n, l) = (2u32, 1u32);
    let lambda = rat(4, 3);
    let phi = uniform_load_profile::<BigRational>(n, l, lambda.clone());
    let g = GasketLevel::new(n, l);
    let lap = laplacian(&g, n as i32, &phi);
    for i in 0..g.vertex_count() as u32 {
        if !g.is_boundary(i) && lap[i as usize] != lambda {
            return Err(format!("laplacian at {:?} is {}", g.vertex(i), lap[i as usize]));
        }
    }
    let o = g.index_of(Vertex::origin()).unwrap();
    if phi[o as usize] != rat(-20, 3) {
        return Err(format!("center value {}", phi[o as usize]));
    }
    Ok("constant laplacian, exact center value".into())
}

fn obstacle_routes_agree() -> std::result::Result<String, String> {
    let g = GasketLevel::new(2, 2);
    let sigma = discretize(&ball3(), &g).map_err(|e| e.to_string())?;
    let direct = obstacle_profile(&g, &sigma.values).map_err(|e| e.to_string())?;
    let via_green = build_obstacle(&GreenTable::build(&g), &sigma.values);
    let worst = direct
        .iter()
        .zip(&via_green)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if worst < 1e-9 {
        Ok(format!("max gap {worst:.2e}"))
    } else {
        Err(format!("max gap {worst:.2e} exceeds 1e-9"))
    }
}

pub fn run() -> Result<()> {
    let checks: [(&str, fn() -> std::result::Result<String, String>); 6] = [
        ("green table vs series", green_routes_agree),
        ("obstacle cap vs axis family", cap_matches_axis_start),
        ("source profile center values", profile_center_values_pin),
        ("normal derivative convergence", normal_derivative_converges),
        ("uniform load laplacian", uniform_load_identity),
        ("obstacle potential dual routes", obstacle_routes_agree),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("ok   {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("selftest: {} checks, {failures} failures", checks.len());
    if failures > 0 {
        return Err(Error::Solver(format!("{failures} selftest checks failed")));
    }
    Ok(())
}
