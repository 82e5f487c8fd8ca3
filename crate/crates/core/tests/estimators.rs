//! Exact estimator distributions by exhaustive enumeration of every hash
//! assignment (REPT) or every sampling outcome (MASCOT) on tiny streams,
//! compared with the variance formulas and with Monte-Carlo runs of the
//! real implementation.

use std::collections::HashMap;

use rept::eval::{compare_report, EvalConfig};
use rept::exact::exact_stream_counts;
use rept::rept::{estimate_gt_m_divisible, estimate_gt_m_general, estimate_leq_m, theoretical_variance};
use rept::{mascot_theoretical_variance, monte_carlo_eval, EdgeStream, Method};

fn k3() -> EdgeStream {
    EdgeStream::from_pairs(&[(1, 2), (1, 3), (2, 3)])
}

fn k4() -> EdgeStream {
    EdgeStream::from_pairs(&[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)])
}

fn two_triangles_a() -> EdgeStream {
    EdgeStream::from_pairs(&[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4)])
}

fn two_triangles_b() -> EdgeStream {
    EdgeStream::from_pairs(&[(1, 3), (2, 3), (1, 4), (2, 4), (1, 2)])
}

/// Triangles as stream positions of their edges, sorted by arrival.
fn triangles(s: &EdgeStream) -> Vec<[usize; 3]> {
    let pos: HashMap<(u32, u32), usize> = s.edges().iter().enumerate().map(|(t, e)| ((e.u(), e.v()), t)).collect();
    let at = |a: u32, b: u32| pos.get(&(a.min(b), a.max(b))).copied();
    let n = s.node_count() as u32;
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if let (Some(x), Some(y), Some(z)) = (at(a, b), at(a, c), at(b, c)) {
                    let mut t = [x, y, z];
                    t.sort_unstable();
                    out.push(t);
                }
            }
        }
    }
    out
}

/// Counts of one processor given its kept-edge mask: triangles whose two
/// earliest edges are kept, and ordered pairs of such triangles sharing an
/// edge that the processor holds and that is not the closing edge of the
/// later triangle.
fn processor_counts(tris: &[[usize; 3]], kept: &[bool]) -> (u64, u64) {
    let counted: Vec<&[usize; 3]> = tris.iter().filter(|t| kept[t[0]] && kept[t[1]]).collect();
    let mut eta = 0;
    for (i, a) in counted.iter().enumerate() {
        for b in &counted[i + 1..] {
            let Some(&e) = a.iter().find(|x| b.contains(x)) else {
                continue;
            };
            let later = if a[2] > b[2] { a } else { b };
            if e != later[2] && kept[e] {
                eta += 1;
            }
        }
    }
    (counted.len() as u64, eta)
}

/// Exact mean and variance of the REPT estimate over all `m^(groups * |E|)`
/// assignments of edges to slots.
fn rept_exact(s: &EdgeStream, m: u32, c: u32) -> (f64, f64) {
    let tris = triangles(s);
    let e = s.len();
    let groups = c.div_ceil(m) as usize;
    let total = (m as usize).pow((groups * e) as u32);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut digits = vec![0u32; groups * e];
    for code in 0..total {
        let mut x = code;
        for d in digits.iter_mut() {
            *d = (x % m as usize) as u32;
            x /= m as usize;
        }
        let mut taus = Vec::with_capacity(c as usize);
        let mut etas = Vec::with_capacity(c as usize);
        for i in 0..c {
            let (g, slot) = ((i / m) as usize, i % m);
            let kept: Vec<bool> = (0..e).map(|t| digits[g * e + t] == slot).collect();
            let (tau, eta) = processor_counts(&tris, &kept);
            taus.push(tau);
            etas.push(eta);
        }
        let est = if c <= m {
            estimate_leq_m(&taus, m, c)
        } else if c.is_multiple_of(m) {
            estimate_gt_m_divisible(&taus, m, c / m)
        } else {
            estimate_gt_m_general(&taus, &etas, m, c).tau_hat
        };
        sum += est;
        sum_sq += est * est;
    }
    let mean = sum / total as f64;
    (mean, sum_sq / total as f64 - mean * mean)
}

/// Exact mean and variance of the parallel MASCOT estimate with
/// independent keep-probability `1/m` per processor and edge.
fn mascot_exact(s: &EdgeStream, m: u32, c: u32) -> (f64, f64) {
    let tris = triangles(s);
    let e = s.len();
    let p = 1.0 / f64::from(m);
    let (mut mean1, mut second1) = (0.0, 0.0);
    for mask in 0u32..(1 << e) {
        let kept: Vec<bool> = (0..e).map(|t| mask >> t & 1 == 1).collect();
        let k = mask.count_ones() as i32;
        let w = p.powi(k) * (1.0 - p).powi(e as i32 - k);
        let (tau, _) = processor_counts(&tris, &kept);
        mean1 += w * tau as f64;
        second1 += w * (tau as f64).powi(2);
    }
    let var1 = second1 - mean1 * mean1;
    let scale = f64::from(m).powi(2) / f64::from(c);
    (scale * mean1 * f64::from(c), scale * scale * var1 * f64::from(c))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn enumerated_rept_matches_hand_values() {
    assert!(close(rept_exact(&k3(), 2, 2).1, 1.0));
    assert!(close(rept_exact(&k3(), 2, 4).1, 0.5));
    assert!(close(rept_exact(&k4(), 2, 2).1, 4.0));
    for s in [k3(), k4()] {
        for (m, c) in [(2, 1), (2, 2), (2, 4)] {
            let (mean, _) = rept_exact(&s, m, c);
            assert!(close(mean, exact_stream_counts(&s).tau as f64), "m={m} c={c}");
        }
    }
}

#[test]
fn enumerated_rept_matches_variance_formulas() {
    let cases = [
        (k3(), 2, 1),
        (k3(), 2, 2),
        (k3(), 3, 2),
        (k3(), 3, 3),
        (k3(), 2, 4),
        (k4(), 2, 1),
        (k4(), 2, 2),
        (k4(), 3, 3),
        (two_triangles_a(), 3, 3),
        (two_triangles_b(), 3, 3),
        (two_triangles_a(), 3, 2),
        (two_triangles_a(), 2, 4),
    ];
    for (s, m, c) in cases {
        let t = exact_stream_counts(&s);
        let (mean, var) = rept_exact(&s, m, c);
        let theo = theoretical_variance(t.tau as f64, t.eta as f64, m, c).unwrap();
        assert!(close(mean, t.tau as f64), "mean {mean} m={m} c={c}");
        assert!(close(var, theo), "var {var} vs {theo} m={m} c={c}");
    }
}

#[test]
fn enumerated_mascot_matches_variance_formula() {
    assert!(close(mascot_exact(&k3(), 2, 1).1, 3.0));
    for (s, m, c) in [
        (k3(), 2, 1),
        (k4(), 2, 3),
        (two_triangles_a(), 3, 3),
        (two_triangles_b(), 3, 3),
        (two_triangles_a(), 2, 1),
    ] {
        let t = exact_stream_counts(&s);
        let (mean, var) = mascot_exact(&s, m, c);
        let theo = mascot_theoretical_variance(t.tau as f64, t.eta as f64, m, c);
        assert!(close(mean, t.tau as f64));
        assert!(close(var, theo), "var {var} vs {theo} m={m} c={c}");
    }
}

#[test]
fn implementation_matches_enumerated_distribution() {
    const R: usize = 20_000;
    for (s, m, c) in [
        (k3(), 2, 3),
        (k4(), 2, 3),
        (two_triangles_a(), 3, 3),
        (two_triangles_a(), 2, 5),
        (k4(), 2, 4),
    ] {
        let (mean, var) = rept_exact(&s, m, c);
        let mut cfg = EvalConfig::new(Method::Rept, m, c, R, 77);
        cfg.compute_local = false;
        let r = monte_carlo_eval(&s, &cfg).unwrap();
        let se_mean = (var / R as f64).sqrt();
        assert!(
            (r.empirical_mean - mean).abs() <= 4.0 * se_mean + 1e-12,
            "m={m} c={c}: mean {} vs exact {mean}",
            r.empirical_mean
        );
        // Normal-theory bound for the sample variance, widened.
        let rel = (r.empirical_variance - var).abs() / var.max(1e-12);
        assert!(rel < 0.1, "m={m} c={c}: var {} vs exact {var}", r.empirical_variance);
    }
}

#[test]
fn combined_estimator_is_unbiased_when_both_groups_see_everything() {
    // With a single triangle a processor either counts it or not, so the
    // enumerated mean is exact truth under any data-dependent weights.
    let (mean, _) = rept_exact(&k3(), 2, 3);
    assert!(close(mean, 1.0));
}

#[test]
fn partial_group_bias_is_small_and_reproduced() {
    // Data-dependent weights leave a small bias on K4; the implementation
    // must reproduce the enumerated mean, not the truth.
    let (mean, var) = rept_exact(&k4(), 3, 4);
    assert!((mean - 3.919_958_023_34).abs() < 1e-9, "exact mean {mean}");
    assert!((var - 6.873_956_070_8).abs() < 1e-8, "exact var {var}");
    assert!((mean - 4.0).abs() / 4.0 < 0.03);
    let mut cfg = EvalConfig::new(Method::Rept, 3, 4, 20_000, 5);
    cfg.compute_local = false;
    let r = monte_carlo_eval(&k4(), &cfg).unwrap();
    let se = (var / 20_000.0).sqrt();
    assert!((r.empirical_mean - mean).abs() <= 4.0 * se, "mean {} vs exact {mean}", r.empirical_mean);
}

#[test]
fn mascot_variance_scales_inversely_with_processors() {
    let s = k4();
    let t = exact_stream_counts(&s);
    let mut base = None;
    for c in [1u32, 2, 4, 8] {
        let mut cfg = EvalConfig::new(Method::Mascot, 3, c, 20_000, 13);
        cfg.compute_local = false;
        let r = monte_carlo_eval(&s, &cfg).unwrap();
        let scaled = r.empirical_variance * f64::from(c);
        let b = *base.get_or_insert(scaled);
        assert!((scaled - b).abs() / b < 0.12, "c={c}: c*var {scaled} vs {b}");
        let theo = mascot_theoretical_variance(t.tau as f64, t.eta as f64, 3, c);
        assert!((r.empirical_variance - theo).abs() / theo < 0.1);
    }
}

#[test]
fn comparison_rows_for_both_methods() {
    let s = rept::stream::generate_synthetic(rept::GraphModel::ErdosRenyi, 40, 0.3, 8).unwrap();
    let rows: Vec<_> = [Method::Rept, Method::Mascot]
        .into_iter()
        .map(|method| {
            let mut cfg = EvalConfig::new(method, 4, 4, 2_000, 3);
            cfg.compute_local = false;
            monte_carlo_eval(&s, &cfg).unwrap()
        })
        .collect();
    let table = compare_report(&rows).unwrap().to_csv();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("rept,4,4,2000,"));
    assert!(lines[2].starts_with("mascot,4,4,2000,"));
    let ratio: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(ratio > 1.0, "MASCOT/REPT variance ratio {ratio}");
}

