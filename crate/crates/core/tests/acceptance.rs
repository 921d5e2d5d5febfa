//! One PASS/FAIL line per acceptance criterion.
//!
//! A criterion whose only failing cells are published values that disagree
//! with their own formula is still reported as FAIL, with the reason taken
//! from `KNOWN_CONFLICTS`, but does not fail the run. Any other failure does.

use std::process::ExitCode;
use std::time::Instant;

use doublespend::asymptotics::{
    kappa_threshold, p_asymptotic, p_bounds, psn_asymptotic, psn_upper_bound, z0_sharp,
};
use doublespend::race::{
    attacker_success_closed, attacker_success_sum, conditional_probability, confirmations_required,
    deviation_tail, nakamoto_probability, recover_p_by_quadrature,
};
use doublespend::sim::{estimate_success, SimConfig};
use doublespend::{HashSplit, NetworkParams};

/// A failed check: what went wrong, and which table cells were off. An empty
/// cell list means the failure is not tied to a published value.
struct Failure {
    detail: String,
    cells: Vec<String>,
}

impl From<String> for Failure {
    fn from(detail: String) -> Self {
        Failure {
            detail,
            cells: Vec::new(),
        }
    }
}

impl From<doublespend::Error> for Failure {
    fn from(e: doublespend::Error) -> Self {
        e.to_string().into()
    }
}

type Outcome = Result<String, Failure>;

/// Published cells that contradict the formula they tabulate, by criterion.
const KNOWN_CONFLICTS: &[(u32, &str, &str)] = &[
    (
        1,
        "P(8)",
        "published 0.0000673, but P(8) = 0.00006724978 rounds to 0.0000672 (off by 5.02e-8)",
    ),
    (
        3,
        "z_SN(0.40)",
        "published 81, but P_SN(81) = 0.00177 >= 0.001 and P_SN(89) = 0.00099 < 0.001 \
         (Nakamoto's own table lists 89)",
    ),
];

const PZ_Q01: &str = include_str!("fixtures/pz_q01.csv");
const PZ_Q03: &str = include_str!("fixtures/pz_q03.csv");
const SATOSHI3: &str = include_str!("fixtures/satoshi3.csv");
const SATOSHI6: &str = include_str!("fixtures/satoshi6.csv");

fn split(q: f64) -> HashSplit {
    HashSplit::new(q).expect("valid split")
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|c| c.parse().expect("number")).collect())
        .collect()
}

fn header(csv: &str) -> Vec<f64> {
    let first = csv.lines().next().expect("header");
    first
        .split(',')
        .skip(1)
        .map(|c| c.parse().expect("number"))
        .collect()
}

fn q_grid() -> Vec<f64> {
    (1..=9).map(|i| 0.05 * i as f64).collect()
}

fn pz_table(csv: &str, q: f64) -> Outcome {
    let h = split(q);
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for r in rows(csv) {
        let z = r[0] as u64;
        let exact = attacker_success_closed(&h, z)?;
        let nak = nakamoto_probability(&h, z)?;
        if (exact - r[1]).abs() > 5e-8 {
            cells.push(format!("P({z})"));
        }
        if (nak - r[2]).abs() > 5e-8 {
            cells.push(format!("P_SN({z})"));
        }
        worst = worst.max((exact - r[1]).abs()).max((nak - r[2]).abs());
    }
    let detail = format!("max deviation {worst:.2e}");
    if cells.is_empty() {
        Ok(detail)
    } else {
        Err(Failure {
            detail: format!("{detail} > 5e-8 at {}", cells.join(", ")),
            cells,
        })
    }
}

fn criterion_1() -> Outcome {
    pz_table(PZ_Q01, 0.1)
}

fn criterion_2() -> Outcome {
    pz_table(PZ_Q03, 0.3)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let qs = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45];
    let want_exact = [6, 9, 13, 20, 32, 58, 133, 539];
    let want_nak = [5, 8, 11, 15, 24, 41, 81, 340];
    let mut got_exact = Vec::new();
    let mut got_nak = Vec::new();
    let mut cells = Vec::new();
    for (i, &q) in qs.iter().enumerate() {
        let h = split(q);
        got_exact.push(confirmations_required(&h, 0.001, false)?);
        got_nak.push(confirmations_required(&h, 0.001, true)?);
        if got_exact[i] != want_exact[i] {
            cells.push(format!("z({q:.2})"));
        }
        if got_nak[i] != want_nak[i] {
            cells.push(format!("z_SN({q:.2})"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!("z = {got_exact:?}, z_SN = {got_nak:?}, {elapsed:.3} s");
    if elapsed >= 1.0 {
        return Err(format!("{detail}: slower than 1 s").into());
    }
    if cells.is_empty() {
        Ok(detail)
    } else {
        Err(Failure {
            detail: format!("{detail}; mismatched {}", cells.join(", ")),
            cells,
        })
    }
}

fn satoshi_table(csv: &str, z: u64) -> Result<(usize, f64), Failure> {
    let qs = header(csv);
    let mut cells = 0;
    let mut worst: f64 = 0.0;
    for r in rows(csv) {
        let kappa = r[0];
        for (j, &q) in qs.iter().enumerate() {
            let v = conditional_probability(&split(q), z, kappa)?;
            // printed cells are rounded to 2 decimals in percent
            let printed = (100.0 * v * 100.0).round() / 100.0;
            worst = worst.max((printed - r[j + 1]).abs());
            cells += 1;
        }
    }
    Ok((cells, worst))
}

fn criterion_4() -> Outcome {
    let (c3, w3) = satoshi_table(SATOSHI3, 3)?;
    let (c6, w6) = satoshi_table(SATOSHI6, 6)?;
    let detail = format!("{} cells, max deviation {:.4} pp", c3 + c6, w3.max(w6));
    if c3 + c6 == 2 * 35 * 13 && w3.max(w6) <= 0.005 + 1e-9 {
        Ok(detail)
    } else {
        Err(detail.into())
    }
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in q_grid() {
        let h = split(q);
        for z in 1..=200 {
            let a = attacker_success_sum(&h, z)?;
            let b = attacker_success_closed(&h, z)?;
            worst = worst.max((a - b).abs());
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max difference {worst:.2e}"))
    } else {
        Err(format!("max difference {worst:.2e} > 1e-10").into())
    }
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for &q in &[0.1, 0.3] {
        let h = split(q);
        for z in 1..=30 {
            let quad = recover_p_by_quadrature(&h, z)?;
            let exact = attacker_success_closed(&h, z)?;
            worst = worst.max((quad - exact).abs());
        }
    }
    if worst <= 1e-8 {
        Ok(format!("max difference {worst:.2e}"))
    } else {
        Err(format!("max difference {worst:.2e} > 1e-8").into())
    }
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in q_grid() {
        let h = split(q);
        for z in 1..=100 {
            let c = conditional_probability(&h, z, 1.0)?;
            let n = nakamoto_probability(&h, z)?;
            worst = worst.max((c - n).abs());
        }
    }
    if worst <= 1e-12 {
        Ok(format!("max difference {worst:.2e}"))
    } else {
        Err(format!("max difference {worst:.2e} > 1e-12").into())
    }
}

fn criterion_8() -> Outcome {
    let t6 = deviation_tail(6, 4.0)?;
    let t10 = deviation_tail(10, 4.0)?;
    let detail = format!("P[κ>4] = {t6:.4e} (z=6), {t10:.4e} (z=10)");
    if (2.5e-6..=3.5e-6).contains(&t6) && (3.5e-9..=4.5e-9).contains(&t10) {
        Ok(detail)
    } else {
        Err(detail.into())
    }
}

fn criterion_9() -> Outcome {
    for q in q_grid() {
        let h = split(q);
        for z in 1..=200 {
            let p = attacker_success_closed(&h, z)?;
            let (lo, hi) = p_bounds(&h, z)?;
            if !(lo <= p && p <= hi) {
                return Err(format!("q = {q}, z = {z}: {lo:e} <= {p:e} <= {hi:e} fails").into());
            }
            let n = nakamoto_probability(&h, z)?;
            let bound = psn_upper_bound(&h, z)?;
            if n.is_nan() || n >= bound {
                return Err(format!("q = {q}, z = {z}: P_SN {n:e} !< {bound:e}").into());
            }
        }
    }
    Ok("9 x 200 grid bracketed".into())
}

// Smallest q (to 1e-6) at which the sharp rank reaches `rank`.
fn rank_threshold(rank: u64) -> Result<f64, Failure> {
    let reaches = |q: f64| -> Result<bool, Failure> { Ok(z0_sharp(&split(q))? >= rank) };
    let (mut lo, mut hi) = (1e-6, 0.45);
    if reaches(lo)? {
        return Ok(0.0);
    }
    if !reaches(hi)? {
        return Err(format!("rank {rank} not reached below q = {hi}").into());
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn criterion_10() -> Outcome {
    let published = [
        0.000, 0.232, 0.305, 0.342, 0.365, 0.381, 0.393, 0.401, 0.409, 0.415,
    ];
    let mut found = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, &want) in published.iter().enumerate() {
        let rank = 2 + i as u64;
        let t = rank_threshold(rank)?;
        worst = worst.max((t - want).abs());
        found.push(format!("{t:.5}"));
    }
    let detail = format!(
        "thresholds [{}], max deviation {worst:.5}",
        found.join(", ")
    );
    if worst <= 0.001 {
        Ok(detail)
    } else {
        Err(detail.into())
    }
}

fn criterion_11() -> Outcome {
    for q in q_grid() {
        let k = kappa_threshold(&split(q), 2)?;
        let want = 1.0 / (2.0 * q) - 1.0;
        if (k - want).abs() > 1e-10 {
            return Err(format!("q = {q}: κ(2) = {k} vs {want}").into());
        }
    }
    let h = split(0.1);
    let mut last = 0.0;
    for z in 2..=100 {
        let k = kappa_threshold(&h, z)?;
        if k <= last {
            return Err(format!("κ({z}) = {k} not above κ({}) = {last}", z - 1).into());
        }
        last = k;
    }
    let predicted = 9.0 - 0.10125;
    let rel = (last - predicted).abs() / predicted;
    let detail = format!("κ(100) = {last:.6}, predicted {predicted}, relative gap {rel:.2e}");
    if rel <= 0.1 {
        Ok(detail)
    } else {
        Err(detail.into())
    }
}

fn criterion_12() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for &(q, z) in &[(0.1, 1u64), (0.3, 5), (0.1, 6)] {
        let h = split(q);
        let net = NetworkParams::bitcoin(&h);
        let r = estimate_success(&h, &net, &SimConfig::new(z, 1_000_000, 42))?;
        let exact = attacker_success_closed(&h, z)?;
        let score = (r.p_hat - exact) / r.std_err;
        if score.abs() > 4.0 {
            return Err(format!(
                "q = {q}, z = {z}: p_hat {} vs {exact}, {score:.2} sd",
                r.p_hat
            )
            .into());
        }
        parts.push(format!("{score:+.2}"));
    }
    let h = split(0.1);
    let net = NetworkParams::bitcoin(&h);
    let config = SimConfig::new(6, 1_000_000, 42);
    let a = estimate_success(&h, &net, &config)?;
    let b = estimate_success(&h, &net, &config)?;
    if format!("{a:?}") != format!("{b:?}") {
        return Err(String::from("two runs with seed 42 differ").into());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "z-scores [{}], repeat identical, {elapsed:.1} s",
        parts.join(", ")
    );
    if elapsed < 60.0 {
        Ok(detail)
    } else {
        Err(detail.into())
    }
}

fn criterion_13() -> Outcome {
    let mut parts = Vec::new();
    for &q in &[0.1, 0.2, 0.3] {
        let h = split(q);
        let ratios = |z: u64| -> Result<(f64, f64), Failure> {
            let e = attacker_success_closed(&h, z)? / p_asymptotic(&h, z)?;
            let n = nakamoto_probability(&h, z)? / psn_asymptotic(&h, z)?;
            Ok((e, n))
        };
        let (e200, n200) = ratios(200)?;
        let (e400, n400) = ratios(400)?;
        for r in [e200, n200] {
            if !(0.8..=1.2).contains(&r) {
                return Err(format!("q = {q}: ratio {r} at z = 200").into());
            }
        }
        if !((e400 - 1.0).abs() < (e200 - 1.0).abs() && (n400 - 1.0).abs() < (n200 - 1.0).abs()) {
            return Err(format!("q = {q}: ratios do not tighten from z = 200 to 400").into());
        }
        let half = conditional_probability(&h, 400, h.p() / q)?;
        if !(0.45..=0.55).contains(&half) {
            return Err(format!("q = {q}: P(400, p/q) = {half}").into());
        }
        parts.push(format!(
            "q={q}: {e200:.4}->{e400:.4}, {n200:.4}->{n400:.4}, P(400,p/q)={half:.4}"
        ));
    }
    Ok(parts.join("; "))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (1, "q=0.1 table", criterion_1),
        (2, "q=0.3 table", criterion_2),
        (3, "confirmation table", criterion_3),
        (4, "conditional tables z=3 and z=6", criterion_4),
        (5, "sum/closed-form equivalence", criterion_5),
        (6, "quadrature recovery", criterion_6),
        (7, "conditional consistency at kappa=1", criterion_7),
        (8, "kappa tail", criterion_8),
        (9, "bounds", criterion_9),
        (10, "sharp z0 table", criterion_10),
        (11, "kappa(z) threshold", criterion_11),
        (12, "Monte-Carlo agreement", criterion_12),
        (13, "asymptotics", criterion_13),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(f) => {
                let reasons: Vec<&str> = f
                    .cells
                    .iter()
                    .filter_map(|c| {
                        KNOWN_CONFLICTS
                            .iter()
                            .find(|(k, cell, _)| *k == id && cell == c)
                            .map(|(_, _, why)| *why)
                    })
                    .collect();
                let explained = !f.cells.is_empty() && reasons.len() == f.cells.len();
                if explained {
                    println!(
                        "FAIL {id:>2} {name}: {} [known conflict: {}]",
                        f.detail,
                        reasons.join("; ")
                    );
                } else {
                    unexpected += 1;
                    println!("FAIL {id:>2} {name}: {}", f.detail);
                }
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
