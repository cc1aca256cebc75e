//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL` line followed by its individual checks.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Pow;

use spiderweb::cli::{cmd_sweep, Format, QGrid, SweepConfig};
use spiderweb::genfun::{self, IntPoly};
use spiderweb::netgraph::{enumerate_paths, NetworkParams, VertexId};
use spiderweb::{asymptotics, limits, moments, simulate};

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    start: Instant,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: u32, title: &'static str, budget_secs: u64) -> Self {
        Self {
            id,
            title,
            budget: Duration::from_secs(budget_secs),
            start: Instant::now(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push((name.into(), ok));
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        self.check(
            format!("runtime {:.2?} within {:?}", elapsed, self.budget),
            elapsed <= self.budget,
        );
        let failed: Vec<&String> = self.checks.iter().filter(|c| !c.1).map(|c| &c.0).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} ({})", self.id, self.title);
        for (name, ok) in &self.checks {
            println!("    [{}] {name}", if *ok { "ok" } else { "FAILED" });
        }
        assert!(
            failed.is_empty(),
            "criterion {} failed: {failed:?}",
            self.id
        );
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn small_grid() -> Vec<(u32, u32, u32)> {
    let mut grid = Vec::new();
    for b in [2, 3] {
        for k in [1, 2] {
            for l in k..=k + 4 {
                grid.push((b, k, l));
            }
        }
    }
    grid
}

#[test]
fn criterion_1_path_counts() {
    let mut c = Criterion::new(1, "path counts b^(l-k)", 10);
    for (b, k, l) in small_grid() {
        let params = NetworkParams::new(b, k, l).unwrap();
        let n = enumerate_paths(&params, &VertexId::zero(0, k), &VertexId::zero(l, k))
            .unwrap()
            .len();
        let want = (b as usize).pow(l - k);
        c.check(
            format!("b={b} k={k} l={l}: {n} paths, want {want}"),
            n == want,
        );
    }
    c.finish();
}

#[test]
fn criterion_2_phi_oracle() {
    let mut c = Criterion::new(2, "phi polynomial equals brute force", 30);
    for (b, k, l) in small_grid() {
        let fast = genfun::phi_poly(b, k, l).unwrap();
        let brute = genfun::brute_phi(b, k, l).unwrap();
        c.check(format!("b={b} k={k} l={l}: {fast} == brute"), fast == brute);
        c.check(
            format!("b={b} k={k} l={l}: phi(1) = b^(l-k)"),
            fast.coefficient_sum() == BigInt::from(b).pow(l - k),
        );
        c.check(
            format!("b={b} k={k} l={l}: phi(0) = 1"),
            fast.coeff(0) == BigInt::from(1),
        );
        if l <= k {
            c.check(
                format!("b={b} k={k} l={l}: phi = 1"),
                fast == IntPoly::one(),
            );
        }
    }
    for k in 1..=4 {
        for l in 0..=k {
            c.check(
                format!("b=2 k={k} l={l}: phi = 1 below the scale"),
                genfun::phi_poly(2, k, l).unwrap() == IntPoly::one(),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_3_second_moment_identity() {
    let mut c = Criterion::new(3, "brute Ex[X^2] = Ex[X] phi_l(q)", 60);
    for (b, k, l) in small_grid() {
        for q in [0.3, 0.5, 0.8] {
            let brute = moments::brute_second_moment(b, k, l, q).unwrap();
            let fast = moments::expected_paths(b, k, l, q).unwrap()
                * genfun::phi_eval(b, k, l, q).unwrap();
            let r = rel(fast, brute);
            c.check(
                format!("b={b} k={k} l={l} q={q}: relative {r:.2e}"),
                r <= 1e-12,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_4_exact_q_oracle() {
    let mut c = Criterion::new(
        4,
        "exact linking probability and Monte-Carlo agreement",
        120,
    );
    let base = simulate::exact_q(&NetworkParams::new(2, 1, 2).unwrap(), 0.5).unwrap();
    c.check(format!("exact_Q(2,1,2,0.5) = {base}"), base == 0.75);
    for (b, k, l) in [(2, 1, 2), (2, 1, 3), (2, 2, 4)] {
        let params = NetworkParams::new(b, k, l).unwrap();
        for q in [0.3, 0.5, 0.8] {
            let exact = simulate::exact_q(&params, q).unwrap();
            let est = simulate::estimate_q(&params, q, 200_000, 2024).unwrap();
            let z = (est.p_hat - exact) / est.sigma_at(exact);
            c.check(
                format!(
                    "b={b} k={k} l={l} q={q}: p_hat {:.5} exact {exact:.5} z {z:+.2}",
                    est.p_hat
                ),
                z.abs() <= 3.0,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_5_phase_transition() {
    let mut c = Criterion::new(5, "simulated linking probability approaches the limit", 300);
    const STATED_LIMIT: f64 = 0.938886;
    let (b, cc) = (2u32, 2.0);
    let q = 0.85;
    let limit = limits::limiting_q(b, q, cc).unwrap();
    c.check(
        format!("limit (1-xi)^2 at q=0.85 is {limit:.12}"),
        limit > limits::critical_vacancy(b, cc).unwrap(),
    );

    let n = 100_000;
    let seed = 5;
    let mut gaps = Vec::new();
    let mut stated_gaps = Vec::new();
    for k in [2u32, 4, 6] {
        let params = NetworkParams::new(b, k, 2 * k).unwrap();
        let est = simulate::estimate_q(&params, q, n, seed).unwrap();
        gaps.push((est.p_hat - limit).abs());
        stated_gaps.push((est.p_hat - STATED_LIMIT).abs());
        println!(
            "    k={k} l={} p_hat={:.5} gap={:.5}",
            2 * k,
            est.p_hat,
            gaps.last().unwrap()
        );
    }
    c.check(
        format!("gaps {gaps:.5?} decrease over k = 2, 4, 6"),
        gaps.windows(2).all(|w| w[1] < w[0]),
    );
    c.check(
        format!("gap at k=6 is {:.5} < 0.05", gaps[2]),
        gaps[2] < 0.05,
    );
    c.check(
        format!("same verdicts against the stated value {STATED_LIMIT}: gaps {stated_gaps:.5?}"),
        stated_gaps.windows(2).all(|w| w[1] < w[0]) && stated_gaps[2] < 0.05,
    );

    let params = NetworkParams::new(b, 6, 12).unwrap();
    let low = simulate::estimate_q(&params, 0.55, n, seed).unwrap();
    let markov = moments::markov_upper_bound(b, 6, 12, 0.55).unwrap();
    let sigma = low.sigma_at(markov);
    c.check(
        format!(
            "q=0.55, k=6: p_hat {:.5} <= Markov {markov:.5} + 3 sigma",
            low.p_hat
        ),
        low.p_hat <= markov + 3.0 * sigma,
    );
    c.finish();
}

#[test]
fn criterion_6_residue_asymptotics() {
    let mut c = Criterion::new(6, "two-pole residue evaluation of phi", 10);
    let (b, q) = (2u32, 0.8f64);
    let err = |l: u32| {
        rel(
            asymptotics::residue_phi(b, 10, l, q).unwrap(),
            genfun::phi_eval(b, 10, l, q).unwrap(),
        )
    };
    let e25 = err(25);
    c.check(
        format!("k=10 l=25 relative error {e25:.2e} <= 1e-3"),
        e25 <= 1e-3,
    );
    let errs = [err(15), err(20), err(25)];
    c.check(
        format!(
            "errors {errs:?} decrease over l = 15, 20, 25",
            errs = errs.map(|e| format!("{e:.2e}"))
        ),
        errs[0] > errs[1] && errs[1] > errs[2],
    );

    let bf = b as f64;
    let (mut c2, mut c3, mut worst_residual) = (0.0f64, 0.0f64, 0.0f64);
    for k in 6..=14u32 {
        let r = asymptotics::denominator_roots(b, k, q).unwrap();
        worst_residual = worst_residual.max(r.residual.0).max(r.residual.1);
        c2 = c2.max((r.zeta2 - 1.0).abs() / q.powi(k as i32));
        let first_order = (1.0 / (bf * q))
            * (1.0 - (bf - 1.0) * (1.0 - q) / ((bf * q - 1.0) * bf.powi(k as i32)));
        c3 = c3.max(rel(r.zeta3, first_order) * bf.powi(2 * k as i32) / k as f64);
    }
    c.check(
        format!("root residuals <= 1e-12 (worst {worst_residual:.1e})"),
        worst_residual <= 1e-12,
    );
    c.check(
        format!("|zeta2 - 1| <= C q^k with C = {c2:.3} <= 10"),
        c2 <= 10.0,
    );
    c.check(
        format!("zeta3 first-order deviation <= C k / b^(2k) with C = {c3:.3} <= 10"),
        c3 <= 10.0,
    );
    c.finish();
}

#[test]
fn criterion_7_limit_closed_forms() {
    let mut c = Criterion::new(7, "limit closed forms and branching recursion", 1);
    let (b, q) = (2u32, 0.8f64);
    let xi = limits::fixed_point_xi(b, q).unwrap();
    c.check(
        format!("xi = {xi} within 1e-12 of 0.0625"),
        (xi - 0.0625).abs() <= 1e-12,
    );
    let eta = limits::eta(b, q).unwrap();
    c.check(
        format!("eta = {eta} equals 0.5"),
        (eta - 0.5).abs() <= 1e-12,
    );
    let alpha = limits::alpha_exponent(b, q).unwrap();
    let want_alpha = 2f64.ln() / 1.6f64.ln();
    c.check(
        format!("alpha = {alpha} within 1e-12 of ln 2 / ln 1.6"),
        (alpha - want_alpha).abs() <= 1e-12,
    );
    let q_c = limits::critical_vacancy(2, 2.0).unwrap();
    c.check(
        format!("q_c(2, 2) = {q_c} within 1e-15 of 2^(-1/2)"),
        (q_c - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-15,
    );

    let seq = limits::branching_extinction_seq(b, q, 21).unwrap();
    let ratio = (seq[21] - xi).abs() / (seq[20] - xi).abs();
    c.check(
        format!("contraction ratio at r=20 is {ratio:.6}, within 1% of eta = {eta}"),
        rel(ratio, eta) <= 0.01,
    );

    let q_near = 1.01 / b as f64;
    let xi_near = limits::fixed_point_xi(b, q_near).unwrap();
    let choose = (b * (b - 1) / 2) as f64;
    let lhs = (1.0 - xi_near).powi(2);
    let rhs = (b as f64 * q_near - 1.0).powi(2) / (choose * choose);
    c.check(
        format!(
            "bq-1 = 0.01: (1-xi)^2 = {lhs:.6e} vs (bq-1)^2/C(b,2)^2 = {rhs:.6e}, ratio {:.3}",
            lhs / rhs
        ),
        rel(lhs, rhs) <= 0.05,
    );
    c.finish();
}

#[test]
fn criterion_8_phi_bound_at_reduced_vacancy() {
    let mut c = Criterion::new(8, "phi_h(q_*) <= k for 0 <= h <= l - k", 5);
    let (b, cc, q) = (2u32, 3.0, 0.9);
    let at12 = limits::lemma36_check(b, 12, cc, q).unwrap();
    c.check(
        format!(
            "k=12 l={}: max phi_h(q_*) = {:.6} at h={} (q_* = {:.6})",
            at12.l, at12.max_phi, at12.argmax_h, at12.q_star
        ),
        at12.holds,
    );
    let maxima: Vec<f64> = [8u32, 12, 16]
        .iter()
        .map(|&k| limits::lemma36_check(b, k, cc, q).unwrap().max_phi)
        .collect();
    c.check(
        format!("max phi over k = 8, 12, 16: {maxima:.6?} non-increasing"),
        maxima.windows(2).all(|w| w[1] <= w[0]),
    );
    c.finish();
}

#[test]
fn criterion_9_sweep_determinism() {
    let mut c = Criterion::new(
        9,
        "sweep output is byte-identical across runs and thread counts",
        60,
    );
    let dir = tempfile::tempdir().unwrap();
    let config = |name: &str| SweepConfig {
        b: 2,
        c: 2.0,
        k_list: vec![2, 4, 6],
        q_grid: QGrid {
            start: 0.55,
            stop: 0.95,
            step: 0.1,
        },
        samples: 20_000,
        seed: 99,
        out: Some(dir.path().join(name)),
        format: Format::Csv,
    };
    let run_in_pool = |threads: usize, name: &str| {
        let cfg = config(name);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cmd_sweep(&cfg).unwrap());
        std::fs::read(cfg.out.unwrap()).unwrap()
    };
    let first = run_in_pool(4, "a.csv");
    let second = run_in_pool(4, "b.csv");
    let serial = run_in_pool(1, "c.csv");
    let wide = run_in_pool(8, "d.csv");
    let rows = String::from_utf8_lossy(&first).lines().count();
    c.check(
        format!("{rows} lines written (header + 15 rows)"),
        rows == 16,
    );
    c.check("identical config, identical bytes", first == second);
    c.check("one thread vs four threads", first == serial);
    c.check("eight threads vs four threads", first == wide);
    c.finish();
}
