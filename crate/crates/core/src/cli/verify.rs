//! Self-checks run by `verify`: stencil moment identities, the closed-form
//! symbol, Parseval, unitarity of the exact flow, norm conservation of
//! central Crank–Nicolson, the stability table and the dense-solver oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{l2_discrete_norm, parseval_check, FieldState, GridSpec};
use crate::reference::exact_evolve;
use crate::stencil::{build_stencil, difference_moment_exact, SchemeSpec, StencilKind, StencilWeights};
use crate::timestepper::{build_step_operator, dense_reference_step};
use crate::vonneumann::{classify_stability, symbol_closed_form, symbol_sum, DEFAULT_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Optional fault injected into the stencil before checks run.
pub type Tamper = fn(&mut StencilWeights);

/// Adds one to the first weight.
pub fn bump_first_weight(weights: &mut StencilWeights) {
    weights.weights_mut()[0] += 1.0;
}

type Check = Result<String, String>;

/// `Σ_j C(l,j) (-p)^(l-j) n! S(j,n)` with `n = 2p+1`: the `n`-th forward
/// difference of `y^l` at `y = -p`, written with Stirling numbers of the
/// second kind.
pub fn moment_by_stirling(p: u32, l: u32) -> Option<i128> {
    let n = (2 * p + 1) as usize;
    let l = l as usize;
    let mut stirling = vec![vec![0i128; n + 1]; l + 1];
    stirling[0][0] = 1;
    for j in 1..=l {
        for k in 1..=n.min(j) {
            stirling[j][k] = (k as i128)
                .checked_mul(stirling[j - 1][k])?
                .checked_add(stirling[j - 1][k - 1])?;
        }
    }
    let factorial: i128 = (1..=n as i128).product();
    let mut binom = 1i128;
    let mut total = 0i128;
    for j in 0..=l {
        if j > 0 {
            binom = binom * (l - j + 1) as i128 / j as i128;
        }
        let power = (-(p as i128)).checked_pow((l - j) as u32)?;
        let term = binom.checked_mul(power)?.checked_mul(factorial)?.checked_mul(stirling[j][n])?;
        total = total.checked_add(term)?;
    }
    Some(total)
}

fn difference_moments(tamper: Option<Tamper>) -> Check {
    for p in 0..=4u32 {
        let scheme = SchemeSpec::new(StencilKind::Forward, p, 1.0).map_err(|e| e.to_string())?;
        let mut weights = build_stencil(&scheme).map_err(|e| e.to_string())?;
        if let Some(t) = tamper {
            t(&mut weights);
        }
        for l in 0..=3 * (2 * p + 1) {
            let expected = moment_by_stirling(p, l).ok_or("oracle overflow")?;
            let library = difference_moment_exact(p, l).map_err(|e| e.to_string())?;
            let mut from_weights = 0i128;
            for (offset, w) in weights.iter() {
                if w.fract() != 0.0 {
                    return Err(format!("p={p}: non-integer weight {w}"));
                }
                from_weights += w as i128 * i128::from(offset).pow(l);
            }
            if library != expected || from_weights != expected {
                return Err(format!(
                    "p={p} l={l}: expected {expected}, moment {library}, stencil {from_weights}"
                ));
            }
        }
    }
    Ok("p ≤ 4, l ≤ 3(2p+1) exact".into())
}

fn symbol_identity() -> Check {
    let mut worst: f64 = 0.0;
    for p in 0..=4 {
        for i in 0..1024 {
            let xi = i as f64 / 1024.0;
            worst = worst.max((symbol_sum(p, xi) - symbol_closed_form(p, xi)).norm());
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max gap {worst:.2e}"))
    } else {
        Err(format!("max gap {worst:.2e}"))
    }
}

fn random_field(rng: &mut ChaCha8Rng, cells: usize) -> FieldState {
    FieldState::new((0..cells).map(|_| rng.gen_range(-1.0..1.0)).collect(), 0)
        .expect("finite values")
}

fn parseval() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for cells in [16, 33, 64, 100] {
        let g = GridSpec::new(7.5, cells, 0.01, 0.1).map_err(|e| e.to_string())?;
        let v = random_field(&mut rng, cells);
        let gap = parseval_check(&v, &g).map_err(|e| e.to_string())?;
        let norm = l2_discrete_norm(&v, &g).map_err(|e| e.to_string())?;
        if gap > 1e-10 * norm * norm {
            return Err(format!("J={cells}: gap {gap:.2e}"));
        }
    }
    Ok("J ∈ {16, 33, 64, 100}".into())
}

fn unitarity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for p in 0..4 {
        let g = GridSpec::new(10.0, 64, 0.01, 0.1).map_err(|e| e.to_string())?;
        let v = random_field(&mut rng, 64);
        let n0 = l2_discrete_norm(&v, &g).map_err(|e| e.to_string())?;
        let out = exact_evolve(&v, &g, p, 0.73).map_err(|e| e.to_string())?;
        let n1 = l2_discrete_norm(&out, &g).map_err(|e| e.to_string())?;
        if (n1 - n0).abs() > 1e-12 * n0 {
            return Err(format!("p={p}: {n0} -> {n1}"));
        }
    }
    Ok("p ≤ 3".into())
}

fn crank_nicolson() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for p in 0..3 {
        let g = GridSpec::new(10.0, 64, 0.05, 1.0).map_err(|e| e.to_string())?;
        let scheme = SchemeSpec::new(StencilKind::Central, p, 0.5).map_err(|e| e.to_string())?;
        let op = build_step_operator(&scheme, &g).map_err(|e| e.to_string())?;
        let mut v = random_field(&mut rng, 64);
        for _ in 0..20 {
            let next = op.step(&v).map_err(|e| e.to_string())?;
            let (a, b) = (
                l2_discrete_norm(&v, &g).map_err(|e| e.to_string())?,
                l2_discrete_norm(&next, &g).map_err(|e| e.to_string())?,
            );
            if (a - b).abs() > 1e-10 * a {
                return Err(format!("p={p}: {a} -> {b}"));
            }
            v = next;
        }
    }
    Ok("central, θ = 1/2, p ≤ 2".into())
}

/// The full stability table sweep; returns the number of disagreements.
pub fn stability_sweep(dx: f64) -> Result<(usize, usize), String> {
    let mut cases = 0;
    let mut disagreements = 0;
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for p in 0..4u32 {
            for kind in StencilKind::ALL {
                for r in [0.1, 1.0, 10.0] {
                    let scheme = SchemeSpec::new(kind, p, theta).map_err(|e| e.to_string())?;
                    let dt = r * dx.powi(2 * p as i32 + 1);
                    let report = classify_stability(&scheme, dt, dx, 1.0, DEFAULT_SAMPLES)
                        .map_err(|e| e.to_string())?;
                    cases += 1;
                    if !report.agrees() {
                        disagreements += 1;
                    }
                }
            }
        }
    }
    Ok((cases, disagreements))
}

fn stability() -> Check {
    let (cases, bad) = stability_sweep(0.01)?;
    if bad == 0 {
        Ok(format!("{cases} cases agree"))
    } else {
        Err(format!("{bad} of {cases} cases disagree"))
    }
}

/// Largest relative gap between the spectral step and the dense solve.
pub fn dense_oracle_gap(cells: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for p in 0..3u32 {
        let dx: f64 = 0.25;
        let dt = 0.37 * dx.powi(2 * p as i32 + 1);
        let g = GridSpec::new(dx * cells as f64, cells, dt, dt).map_err(|e| e.to_string())?;
        for kind in StencilKind::ALL {
            for theta in [0.0, 0.5, 1.0] {
                let scheme = SchemeSpec::new(kind, p, theta).map_err(|e| e.to_string())?;
                let v = random_field(&mut rng, cells);
                let spectral = build_step_operator(&scheme, &g)
                    .and_then(|op| op.step(&v))
                    .map_err(|e| e.to_string())?;
                let dense = dense_reference_step(&scheme, &g, &v).map_err(|e| e.to_string())?;
                let diff = spectral.combine(1.0, &dense, -1.0).map_err(|e| e.to_string())?;
                let gap = l2_discrete_norm(&diff, &g).map_err(|e| e.to_string())?
                    / l2_discrete_norm(&dense, &g).map_err(|e| e.to_string())?;
                worst = worst.max(gap);
            }
        }
    }
    Ok(worst)
}

fn dense_oracle(level: Level) -> Check {
    let sizes: &[usize] = match level {
        Level::Fast => &[32],
        Level::Full => &[32, 64],
    };
    let mut worst: f64 = 0.0;
    for &cells in sizes {
        worst = worst.max(dense_oracle_gap(cells, cells as u64)?);
    }
    let detail = format!("J ∈ {sizes:?}, max relative gap {worst:.2e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Runs every check in order and stops at the first failure.
pub fn run(level: Level, tamper: Option<Tamper>) -> Vec<CheckOutcome> {
    let checks: Vec<(&'static str, Box<dyn Fn() -> Check>)> = vec![
        ("lemma1", Box::new(move || difference_moments(tamper))),
        ("symbol_identity", Box::new(symbol_identity)),
        ("parseval", Box::new(parseval)),
        ("unitarity", Box::new(unitarity)),
        ("crank_nicolson", Box::new(crank_nicolson)),
        ("stability_table", Box::new(stability)),
        ("dense_oracle", Box::new(move || dense_oracle(level))),
    ];
    let mut outcomes = Vec::new();
    for (name, check) in checks {
        let (passed, detail) = match check() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        outcomes.push(CheckOutcome { name, passed, detail });
        if !passed {
            break;
        }
    }
    outcomes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_moments_agree_with_direct_sums() {
        assert_eq!(moment_by_stirling(1, 2), Some(0));
        assert_eq!(moment_by_stirling(1, 3), Some(6));
        assert_eq!(moment_by_stirling(2, 5), Some(120));
        assert_eq!(moment_by_stirling(0, 2), Some(1));
    }

    #[test]
    fn tampering_fails_lemma1_first() {
        let out = run(Level::Fast, Some(bump_first_weight));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].name, "lemma1");
        assert!(!out[0].passed);
    }
}
