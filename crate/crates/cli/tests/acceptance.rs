//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p psmm-cli --test acceptance -- --nocapture` to see
//! the report.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use psmm::bilinear::{load_scheme, parse_scheme, verify_scheme, Factor, OperatorChoice, Verification};
use psmm::linalg::random_matrix;
use psmm::privacy::{
    assert_secret_independence, beaver_mask_bijection_check, enumerate_view_distribution, Independence, DEFAULT_BUDGET,
};
use psmm::protocol::{
    deal_shares, min_agents_empirical, reconstruct, reconstruct_dof, run_protocol_detailed, DofConstraint,
    ProtocolConfig, ProtocolError,
};
use psmm::sharing::{
    beaver_multiply, struct_threshold, symbolic_product_support, threshold_closed_form, AdditiveShares, BeaverTriple,
    SharingParams, Symbol, SymbolicProduct, SymbolicTerm,
};
use psmm::{matmul_naive, FieldMatrix, FieldSpec, MultCounter, RngStream};
use psmm_cli::{cmd_complexity, cmd_thresholds, measure_agent_product, synthetic_dof};

const SHIPPED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/schemes/strassen.scheme");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, format!("took {took:?}, limit {limit:?}"))
}

fn parse_csv(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| {
            header
                .iter()
                .cloned()
                .zip(rec.unwrap().iter().map(str::to_string))
                .collect()
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> i64 {
    row[key].parse().unwrap()
}

fn truth(a: &FieldMatrix, b: &FieldMatrix) -> FieldMatrix {
    matmul_naive(&a.transpose(), b, &mut MultCounter::new()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ks = [2, 4, 8, 16, 32];
    let ts = [2, 4, 8, 16];
    let rows = parse_csv(&cmd_thresholds(&ks, &ts).map_err(|e| e.to_string())?);
    ensure(rows.len() == ks.len() * ts.len(), "row count")?;
    let mut table = BTreeMap::new();
    for r in &rows {
        let (k, t) = (num(r, "k"), num(r, "t"));
        let (ours, bgw) = (num(r, "n_ours"), num(r, "n_bgw"));
        ensure(ours < bgw, format!("n_ours >= n_bgw at k={k} t={t}"))?;
        table.insert((k, t), bgw - ours);
    }
    let row = |k: i64, t: i64| rows.iter().find(|r| num(r, "k") == k && num(r, "t") == t).unwrap();
    ensure(num(row(8, 4), "n_ours") == 98, "N_ours(8,4) != 98")?;
    ensure(num(row(8, 4), "n_bgw") == 448, "N_bgw(8,4) != 448")?;
    ensure(num(row(8, 8), "n_ours") == 134, "N_ours(8,8) != 134")?;
    for (i, &k) in ks.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let gap = table[&(k as i64, t as i64)];
            if i > 0 {
                ensure(
                    gap >= table[&(ks[i - 1] as i64, t as i64)],
                    format!("gap decreases in k at ({k},{t})"),
                )?;
            }
            if j > 0 {
                ensure(
                    gap >= table[&(k as i64, ts[j - 1] as i64)],
                    format!("gap decreases in t at ({k},{t})"),
                )?;
            }
        }
    }
    within(Duration::from_secs(1), start)?;
    Ok("N_ours(8,4)=98 N_bgw(8,4)=448 N_ours(8,8)=134, gap monotone on 20 rows".into())
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    for k in 1..=6 {
        for t in 1..=6 {
            let prod = SymbolicProduct::of_encoders(k, t);
            let sets = symbolic_product_support(k, t);
            let closed: Vec<usize> = sets.union.to_vec();
            ensure(prod.support() == closed, format!("support mismatch at k={k} t={t}"))?;
            ensure(
                closed.len() <= threshold_closed_form(k, t),
                format!("support exceeds closed form at k={k} t={t}"),
            )?;
            let mut targets = Vec::new();
            for i in 1..=k {
                for j in 1..=k {
                    let e = prod.target_exponent(i, j);
                    let expected = [SymbolicTerm {
                        left: Symbol::A(i),
                        right: Symbol::B(j),
                    }];
                    ensure(
                        prod.coefficient(e) == expected,
                        format!("coefficient {e} is not A_{i}^T B_{j} at k={k} t={t}"),
                    )?;
                    targets.push(e);
                }
            }
            for e in prod.support() {
                if !targets.contains(&e) {
                    ensure(
                        prod.coefficient(e).iter().any(SymbolicTerm::involves_mask),
                        format!("exponent {e} carries no mask at k={k} t={t}"),
                    )?;
                }
            }
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok("36 (k,t) pairs: oracle support = K1..K4 closed form, targets isolated, noise masked".into())
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let f = FieldSpec::mersenne31();
    let configs = [(4, 2, 2), (8, 2, 3), (16, 4, 2), (8, 4, 2)];
    for &(m, k, t) in &configs {
        let params = SharingParams::new(m, k, t).map_err(|e| e.to_string())?;
        for trial in 0..100u64 {
            let mut rng = RngStream::derive(trial, "acceptance-3", m as u64 * 100 + k as u64 * 10 + t as u64);
            let a = random_matrix(f, m, m, &mut rng);
            let b = random_matrix(f, m, m, &mut rng);
            let cfg = ProtocolConfig::new(params, f, trial);
            let n = cfg.n_agents;
            ensure(n == min_agents_empirical(k, t, None), "N is not |support|")?;
            let run = run_protocol_detailed(&cfg, &a, &b).map_err(|e| e.to_string())?;
            ensure(
                run.reconstruction.product == truth(&a, &b),
                format!("wrong product at {m},{k},{t} trial {trial}"),
            )?;
            let (_, ctx) = deal_shares(&cfg, &a, &b, &mut MultCounter::new()).map_err(|e| e.to_string())?;
            match reconstruct(&run.results[..n - 1], &ctx) {
                Err(ProtocolError::InsufficientShares { needed, got }) if needed == n && got < n => {}
                other => {
                    return Err(format!(
                        "N-1 results not refused at {m},{k},{t} trial {trial}: {other:?}"
                    ))
                }
            }
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok("400 trials exact; every N-1 decode refused".into())
}

fn criterion_4() -> Outcome {
    let f = FieldSpec::mersenne31();
    for &(m, k, t) in &[(16, 2, 2), (32, 4, 2)] {
        let params = SharingParams::new(m, k, t).map_err(|e| e.to_string())?;
        let mut rng = RngStream::derive(4, "acceptance-4", m as u64);
        let a = random_matrix(f, m, m, &mut rng);
        let b = random_matrix(f, m, m, &mut rng);
        let dense_cfg = ProtocolConfig::new(params, f, 44);
        let dense = run_protocol_detailed(&dense_cfg, &a, &b).map_err(|e| e.to_string())?;
        for d in [1usize, 2] {
            let op = OperatorChoice::strassen(f, d).map_err(|e| e.to_string())?;
            let run = run_protocol_detailed(&dense_cfg.clone().with_operator(op), &a, &b).map_err(|e| e.to_string())?;
            for (x, y) in dense.results.iter().zip(&run.results) {
                ensure(
                    x.m_eval == y.m_eval,
                    format!("agent {} differs at m={m} d={d}", x.agent_id),
                )?;
                ensure(
                    y.mults.base_products == 7u64.pow(d as u32),
                    format!("base products {} != 7^{d}", y.mults.base_products),
                )?;
            }
            ensure(
                run.reconstruction.product == dense.reconstruction.product,
                format!("final matrices differ at m={m} d={d}"),
            )?;
        }
    }
    Ok("(16,2,2),(32,4,2) x d in {1,2}: bit-identical agents and outputs, base products 7^d".into())
}

fn criterion_5() -> Outcome {
    let f = FieldSpec::new(101).unwrap();
    let mut rng = RngStream::derive(5, "acceptance-5", 0);
    for trial in 0..200 {
        let dims = (
            1 + (rng.next_u64() % 4) as usize,
            1 + (rng.next_u64() % 4) as usize,
            1 + (rng.next_u64() % 4) as usize,
        );
        let a = random_matrix(f, dims.0, dims.1, &mut rng);
        let b = random_matrix(f, dims.1, dims.2, &mut rng);
        let sa = AdditiveShares::share(&a, 3, &mut rng).map_err(|e| e.to_string())?;
        let sb = AdditiveShares::share(&b, 3, &mut rng).map_err(|e| e.to_string())?;
        let triple = BeaverTriple::deal(f, dims, 3, &mut rng).map_err(|e| e.to_string())?;
        let out = beaver_multiply(&sa, &sb, &triple, &mut MultCounter::new()).map_err(|e| e.to_string())?;
        ensure(
            out.open() == matmul_naive(&a, &b, &mut MultCounter::new()).unwrap(),
            format!("trial {trial} dims {dims:?}"),
        )?;
    }
    let f3 = FieldSpec::new(3).unwrap();
    ensure(
        beaver_mask_bijection_check(f3, (1, 1, 1), DEFAULT_BUDGET).map_err(|e| e.to_string())?,
        "masks -> (D, E) not bijective over F_3",
    )?;
    Ok("200 three-party products exact; (D,E) bijective in masks for all 9 secrets over F_3".into())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let f = FieldSpec::new(5).unwrap();
    let params = SharingParams::new(2, 2, 2).map_err(|e| e.to_string())?;
    let points: Vec<_> = (1..=4).map(|x| f.element(x)).collect();
    let a1 = FieldMatrix::from_rows(f, &[&[1, 2], &[3, 4]]);
    let b1 = FieldMatrix::from_rows(f, &[&[0, 1], &[1, 0]]);
    let a2 = FieldMatrix::from_rows(f, &[&[4, 4], &[0, 2]]);
    let b2 = FieldMatrix::from_rows(f, &[&[3, 1], &[2, 2]]);
    let run = |c: &[usize]| {
        let d1 = enumerate_view_distribution(params, f, &a1, &b1, c, &points, DEFAULT_BUDGET).unwrap();
        let d2 = enumerate_view_distribution(params, f, &a2, &b2, c, &points, DEFAULT_BUDGET).unwrap();
        let ind = assert_secret_independence(params, f, (&a1, &b1), (&a2, &b2), c, &points, DEFAULT_BUDGET).unwrap();
        (d1, d2, ind)
    };
    let (d1, d2, ind) = run(&[0]);
    ensure(
        d1.total == 625 && d1.histogram.len() == 625,
        "single-agent enumeration incomplete",
    )?;
    ensure(d1.histogram.values().all(|&c| c == 1), "single-agent view not uniform")?;
    ensure(d1.is_uniform(f) && d2.is_uniform(f), "not uniform")?;
    ensure(d1.histogram == d2.histogram, "histograms differ between secrets")?;
    ensure(ind == Independence::Independent, "dependence below threshold")?;
    let (_, _, ind2) = run(&[0, 1]);
    ensure(
        matches!(ind2, Independence::Dependent { .. }),
        "coalition of size t failed to show dependence",
    )?;
    within(Duration::from_secs(10), start)?;
    Ok("625 assignments: uniform and secret-independent at size 1, dependent at size 2".into())
}

fn criterion_7() -> Outcome {
    let text = std::fs::read_to_string(SHIPPED).map_err(|e| e.to_string())?;
    let scheme = parse_scheme(&text).map_err(|e| e.to_string())?;
    ensure(scheme.rank() == 7, "rank != 7")?;
    ensure(scheme.max_abs_coefficient() <= 1, "coefficient outside {-1,0,1}")?;
    let mut mutations = 0;
    for p in [101, psmm::field::MERSENNE_31] {
        let f = FieldSpec::new(p).unwrap();
        load_scheme(SHIPPED, f).map_err(|e| format!("p={p}: {e}"))?;
        for (factor, rows) in [
            (Factor::U, scheme.u()),
            (Factor::V, scheme.v()),
            (Factor::W, scheme.w()),
        ] {
            for (r, row) in rows.iter().enumerate() {
                for (pos, &c) in row.iter().enumerate() {
                    for delta in [-2i64, -1, 1, 2] {
                        let mutated = scheme.with_coefficient(factor, r, pos, c + delta);
                        mutations += 1;
                        if let Verification::Pass = verify_scheme(&mutated, f).map_err(|e| e.to_string())? {
                            return Err(format!("mutation {factor:?}[{r}][{pos}] += {delta} passed at p={p}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "rank 7, coefficients in {{-1,0,1}}, verified at p=101 and 2^31-1; {mutations} mutations all rejected"
    ))
}

fn criterion_8() -> Outcome {
    let (k, t) = (8usize, 4usize);
    let ms: Vec<usize> = (1..=40).map(|i| 8 * i).collect();
    let tls = [1usize, 2, 4];
    let rows =
        parse_csv(&cmd_complexity(&ms, k, t, &tls, false, psmm::field::MERSENNE_31, 0).map_err(|e| e.to_string())?);
    let pct = |r: &BTreeMap<String, String>| -> f64 { r["reduction_pct"].parse().unwrap() };
    for &tl in &tls {
        let series: Vec<_> = rows.iter().filter(|r| num(r, "t_l") == tl as i64).collect();
        ensure(series.iter().all(|r| num(r, "n") == 98), "N != 98")?;
        for pair in series.windows(2) {
            let g0: f64 = pair[0]["gain"].parse().unwrap();
            let g1: f64 = pair[1]["gain"].parse().unwrap();
            ensure(g1 > g0, format!("gain not increasing at T_l={tl}"))?;
        }
        let cross = 5 * k * tl;
        for r in &series {
            let m = num(r, "m") as usize;
            let ok = match m.cmp(&cross) {
                std::cmp::Ordering::Less => pct(r) < 80.0,
                std::cmp::Ordering::Equal => r["reduction_pct"] == "80.000000",
                std::cmp::Ordering::Greater => pct(r) > 80.0,
            };
            ensure(
                ok,
                format!("80% crossing wrong at m={m} T_l={tl}: {}", r["reduction_pct"]),
            )?;
        }
    }

    let small: Vec<usize> = vec![16, 32, 48, 64];
    let measured =
        parse_csv(&cmd_complexity(&small, k, t, &[1], true, psmm::field::MERSENNE_31, 0).map_err(|e| e.to_string())?);
    let f = FieldSpec::mersenne31();
    let mut checked = Vec::new();
    for (row, &m) in measured.iter().zip(&small) {
        ensure(
            row["measured_ratio"] == row["model_ratio"],
            format!("ratio columns differ at m={m}"),
        )?;
        let ms = measure_agent_product(m, k, f, 0).map_err(|e| e.to_string())?;
        let d = ms.depth as u32;
        ensure(d >= 1, format!("m={m} admits no lifting"))?;
        ensure(
            u128::from(ms.strassen_mults) * 8u128.pow(d) == u128::from(ms.naive_mults) * 7u128.pow(d),
            format!("measured counts off the 7^d/8^d model at m={m}"),
        )?;
        ensure(
            ms.strassen_base_products == 7u64.pow(d) && ms.naive_base_products == 8u64.pow(d),
            "block counts",
        )?;
        checked.push(format!("m={m}:d={d}"));
    }
    Ok(format!(
        "N=98, gain strictly increasing, 80% exactly at m=5kT_l for T_l in {{1,2,4}}; measured = 7^d/8^d at {}",
        checked.join(",")
    ))
}

fn criterion_9() -> Outcome {
    let f = FieldSpec::mersenne31();
    let (k, t) = (2, 2);
    let params = SharingParams::new(4, k, t).map_err(|e| e.to_string())?;
    let mut rng = RngStream::derive(9, "acceptance-9", 0);
    let (dof, a, b) = synthetic_dof(f, params, 1, &mut rng).map_err(|e| e.to_string())?;
    ensure(
        dof == DofConstraint::all_equal(k, f),
        "synthetic constraint is not all-equal",
    )?;
    let cfg = ProtocolConfig::new(params, f, 9).with_dof(dof.clone());
    let empirical = cfg.n_agents;
    let closed = struct_threshold(k, t, 1).map_err(|e| e.to_string())?;
    ensure(empirical == 5, format!("empirical minimal N = {empirical}, expected 5"))?;
    let run = run_protocol_detailed(&cfg, &a, &b).map_err(|e| e.to_string())?;
    ensure(
        run.reconstruction.product == truth(&a, &b),
        "recovered matrix differs from oracle",
    )?;
    let (_, ctx) = deal_shares(&cfg, &a, &b, &mut MultCounter::new()).map_err(|e| e.to_string())?;
    match reconstruct_dof(&run.results[..4], &ctx, &dof) {
        Err(ProtocolError::InsufficientShares { needed: 5, got: 4 }) => {}
        other => return Err(format!("4 results not refused: {other:?}")),
    }
    let plain = min_agents_empirical(k, t, None);
    Ok(format!(
        "s=1 decodes with N=5 < {plain}, refuses N=4; empirical minimal N = {empirical} vs closed-form {closed} (discrepancy: masked exponents remain unknowns)"
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("threshold table", criterion_1),
        ("support calculus", criterion_2),
        ("end-to-end correctness", criterion_3),
        ("operator invariance", criterion_4),
        ("beaver identity", criterion_5),
        ("exact privacy audit", criterion_6),
        ("scheme verification", criterion_7),
        ("complexity model", criterion_8),
        ("dof reduction", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({took:.2?}): {detail}", i + 1),
            Err(why) => {
                println!("FAIL [{}] {name} ({took:.2?}): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
