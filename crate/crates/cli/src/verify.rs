//! Reproduction checks for the three-marginal planar counterexample.

use std::time::Instant;

use mmot::fixtures::{
    EXAMPLE_ONE_LP_VALUE, EXAMPLE_ONE_MMC, EXAMPLE_ONE_MONGE_SUPPORT, EXAMPLE_ONE_OPTIMAL_SUPPORT,
};
use mmot::monge::enumerate_mmc;
use mmot::scalar::rational_string;
use mmot::simplex::{verify_certificate, TransportLp};
use mmot::{build_tensor, Convention, IndexTuple, Instance, Rational, Result, SimplexConfig};

/// Published values are rounded to three decimals.
pub const VALUE_TOL: f64 = 1e-3;
pub const WEIGHT_TOL: f64 = 1e-12;

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn support_of(tuples: &[IndexTuple]) -> Vec<Vec<usize>> {
    tuples.iter().map(IndexTuple::one_based).collect()
}

fn fmt_support(s: &[Vec<usize>]) -> String {
    s.iter()
        .map(|t| format!("({})", t.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs every check against `instance` (normally the embedded fixture).
pub fn run_checks(instance: &Instance) -> Result<Vec<Check>> {
    let start = Instant::now();
    let config = SimplexConfig::default();
    let mut checks = Vec::new();

    let tensor = build_tensor::<f64>(instance, Convention::PairwiseUnordered)?;
    let lp = mmot::solve_lp(instance, &tensor, &config)?;
    checks.push(check(
        "lp_value",
        (lp.value - EXAMPLE_ONE_LP_VALUE).abs() <= VALUE_TOL,
        format!("{:.6} (expected {EXAMPLE_ONE_LP_VALUE} ± {VALUE_TOL})", lp.value),
    ));

    let support = support_of(&lp.coupling.support());
    let expected: Vec<Vec<usize>> = EXAMPLE_ONE_OPTIMAL_SUPPORT.iter().map(|a| a.to_vec()).collect();
    let weights_ok = lp
        .coupling
        .entries()
        .iter()
        .all(|(_, w)| (w - 1.0 / 6.0).abs() <= WEIGHT_TOL);
    checks.push(check(
        "optimal_support",
        support == expected && weights_ok,
        format!("{} at weight 1/6", fmt_support(&support)),
    ));

    let monge = enumerate_mmc(instance, &tensor)?;
    checks.push(check(
        "mmc",
        (monge.mmc - EXAMPLE_ONE_MMC).abs() <= VALUE_TOL,
        format!("{:.6} (expected {EXAMPLE_ONE_MMC} ± {VALUE_TOL}) over {} maps", monge.mmc, monge.enumerated),
    ));

    let monge_support = support_of(&monge.best.tuples());
    let expected: Vec<Vec<usize>> = EXAMPLE_ONE_MONGE_SUPPORT.iter().map(|a| a.to_vec()).collect();
    checks.push(check(
        "monge_support",
        monge_support == expected,
        fmt_support(&monge_support),
    ));

    let exact_tensor = build_tensor::<Rational>(instance, Convention::PairwiseUnordered)?;
    let exact_lp = mmot::solve_lp(instance, &exact_tensor, &config)?;
    let exact_mmc = enumerate_mmc(instance, &exact_tensor)?.mmc;
    let gap = exact_mmc - exact_lp.value.clone();
    checks.push(check(
        "strict_gap",
        num_traits::Signed::is_positive(&gap),
        format!("strict gap certified: MMC - LP = {} (≈ {:.6e})", rational_string(&gap), mmot::Scalar::to_f64(&gap)),
    ));

    let cert = verify_certificate(&TransportLp::uniform(&exact_tensor), &exact_lp.coupling, &exact_lp.certificate);
    checks.push(check(
        "exact_certificate",
        cert.is_ok(),
        match &cert {
            Ok(c) => format!(
                "dual feasible at all {} tuples, complementary on {} support tuples, zero duality gap",
                c.tuples_scanned,
                exact_lp.coupling.support_size()
            ),
            Err(e) => e.to_string(),
        },
    ));

    let elapsed = start.elapsed();
    checks.push(check(
        "runtime",
        elapsed.as_secs_f64() < 1.0,
        format!("{:.3} s (limit 1 s)", elapsed.as_secs_f64()),
    ));
    Ok(checks)
}
