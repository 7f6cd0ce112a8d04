//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p tordisc-core --test acceptance`. The process exits
//! nonzero if any hard criterion fails; criterion 15 (wall-clock speed) only
//! warns.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tordisc_core::discrepancy::fourier::{diaphony_truncated, periodic_l2_fourier_truncated};
use tordisc_core::discrepancy::oracle::l2_discrepancy_oracle;
use tordisc_core::discrepancy::spectral::{
    eta_fourier_identity_deviation, mu_zero_exact, periodic_energy_spectral, periodic_l2_spectral,
    permutation_lp_spectral,
};
use tordisc_core::discrepancy::{l2_discrepancy_grid_exact, l2_discrepancy_grid_f64, l2_discrepancy_warnock, DiscrepancyKind};
use tordisc_core::energy::{energy, excess_decomposition, hypercube_excess_identity, CoefficientTable, EnergyKind};
use tordisc_core::latin::{
    disjoint_family, enumerate_all, hamming_delta, permutation_set, sample_coordinate_permuted_with,
    UniformMethod, UniformSampler, WeakLatinHypercube,
};
use tordisc_core::optimize::{anneal_restarts, Design, Schedule, SearchState};
use tordisc_core::stats::{
    expected_lp_squared, exhaustive_moments, lp_lower_bound, monte_carlo_moments, pair_distribution,
    variance_lp_squared_d2, HypercubeSampler, Statistic,
};
use tordisc_core::{EnergyTriple, GridWeights, Rational, Scalar, TorusGrid, WeightedPointSet};

type Outcome = Result<String, String>;

/// `(id, name, check, hard)`
type Criterion = (u32, &'static str, fn() -> Outcome, bool);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

fn pow2(d: usize) -> Rational {
    Rational::int(2).powu(d as u32)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Lp² − 2^d Le²` by the generic rational Warnock formulas.
fn excess_of(set: &WeightedPointSet<Rational>) -> Rational {
    l2_discrepancy_warnock(set, DiscrepancyKind::Periodic)
        - pow2(set.dim()) * l2_discrepancy_warnock(set, DiscrepancyKind::Extreme)
}

fn permutation_identity() -> Outcome {
    let mut checked = 0;
    let check = |sigma: &[usize]| -> Result<(), String> {
        let n = sigma.len() as i64;
        let expected = q(n * n + 1, 18 * n * n);
        let exact = excess_of(&permutation_set::<Rational>(sigma).unwrap());
        ensure(exact == expected, || format!("sigma {sigma:?}: {exact} != {expected}"))?;
        let fx = permutation_set::<f64>(sigma).unwrap();
        let float = l2_discrepancy_warnock(&fx, DiscrepancyKind::Periodic)
            - 4.0 * l2_discrepancy_warnock(&fx, DiscrepancyKind::Extreme);
        ensure((float - expected.to_f64()).abs() <= 1e-12, || {
            format!("sigma {sigma:?}: float {float} vs {}", expected.to_f64())
        })
    };
    for n in 1..=6 {
        for h in enumerate_all(n, 2).unwrap() {
            check(h.table())?;
            checked += 1;
        }
    }
    ensure(checked == 873, || format!("{checked} exhaustive permutations, expected 873"))?;
    let mut r = rng(1);
    for _ in 0..1000 {
        let n = r.gen_range(1..=64);
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(&mut r);
        check(&sigma)?;
    }
    Ok("873 exhaustive + 1000 random permutations, exact and float".into())
}

fn hypercube_identity() -> Outcome {
    let mut count = 0;
    let check = |h: &WeakLatinHypercube| -> Result<(), String> {
        let expected = hypercube_excess_identity(h.order(), h.dim(), 1);
        let got = excess_of(&h.to_point_set());
        ensure(got == expected, || format!("{h:?}: {got} != {expected}"))
    };
    for (d, max_m) in [(2, 6), (3, 4)] {
        for m in 1..=max_m {
            for h in enumerate_all(m, d).unwrap() {
                check(&h)?;
                count += 1;
            }
        }
    }
    let mut r = rng(2);
    for (d, m) in [(4, 2), (4, 3), (4, 4), (5, 3)] {
        let h0 = WeakLatinHypercube::cyclic(m, d).unwrap();
        for _ in 0..100 {
            check(&sample_coordinate_permuted_with(&h0, &mut r))?;
            count += 1;
        }
    }
    Ok(format!("{count} hypercubes, exact"))
}

fn union_identity() -> Outcome {
    let mut count = 0;
    for d in 2..=3 {
        for m in 1..=4 {
            for r in 1..=m {
                for seed in 0..4 {
                    let fam = disjoint_family(m, d, r, seed).unwrap();
                    ensure(fam.is_disjoint(), || "family not disjoint".into())?;
                    let set = fam.union_point_set::<Rational>();
                    ensure(set.len() == r * m.pow(d as u32 - 1), || "wrong union size".into())?;
                    if r == m {
                        ensure(set.len() == m.pow(d as u32), || "r = M must give the full grid".into())?;
                    }
                    let expected = hypercube_excess_identity(m, d, r);
                    let got = excess_of(&set);
                    ensure(got == expected, || format!("d={d} M={m} r={r}: {got} != {expected}"))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} unions (d <= 3, M <= 4, all r <= M), exact"))
}

fn random_rational(r: &mut ChaCha8Rng) -> Rational {
    q(r.gen_range(-6..=6), r.gen_range(1..=5))
}

fn excess_decomposition_exact() -> Outcome {
    let triple = EnergyTriple::<Rational>::discrepancy();
    let mut r = rng(4);
    let mut trials = 0;
    for d in 2..=3 {
        for m in 2..=4 {
            let grid = TorusGrid::new(m, d).unwrap();
            let table = CoefficientTable::new(&triple.sample(m).unwrap(), grid).unwrap();
            for _ in 0..50 {
                let w = GridWeights::new(grid, (0..grid.cell_count()).map(|_| random_rational(&mut r)).collect()).unwrap();
                let rr = random_rational(&mut r);
                let rep = excess_decomposition(&table, &w, &rr).unwrap();
                ensure(rep.residual == q(0, 1), || format!("d={d} M={m}: residual {}", rep.residual))?;
                trials += 1;
            }
        }
    }
    Ok(format!("{trials} random rational weights, all residuals 0"))
}

/// Exact periodic energy of integer weights `a/den` under the discrepancy
/// triple, with all sums in `i128`: `η(k/M) = (M² − 2kM + 2k²)/(2M²)`.
fn integer_energy(grid: TorusGrid, a: &[i64], den: i64) -> Rational {
    let m = grid.order() as i128;
    let eta: Vec<i128> = (0..grid.order() as i128).map(|k| m * m - 2 * k * m + 2 * k * k).collect();
    let coords: Vec<Vec<usize>> = (0..grid.cell_count()).map(|c| grid.coords(c)).collect();
    let mut total: i128 = 0;
    for (i, x) in coords.iter().enumerate() {
        if a[i] == 0 {
            continue;
        }
        let mut row: i128 = 0;
        for (j, y) in coords.iter().enumerate() {
            if a[j] == 0 {
                continue;
            }
            let k: i128 = x.iter().zip(y).map(|(&p, &t)| eta[p.abs_diff(t)]).product();
            row += a[j] as i128 * k;
        }
        total += a[i] as i128 * row;
    }
    let scale = (Rational::int(2) * Rational::from_usize(grid.order()).powu(2)).powu(grid.dim() as u32)
        * Rational::int(den * den);
    Rational::from_integer(total.into()) / scale
}

fn spectral_equivalence() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let d = r.gen_range(1..=3);
        let m = r.gen_range(1..=16);
        let grid = TorusGrid::new(m, d).unwrap();
        let den = r.gen_range(1..=7);
        let a: Vec<i64> = (0..grid.cell_count()).map(|_| r.gen_range(-5..=5)).collect();
        let w = GridWeights::new(grid, a.iter().map(|&v| v as f64 / den as f64).collect()).unwrap();
        let exact = integer_energy(grid, &a, den);
        let triple = EnergyTriple::<f64>::discrepancy().sample(m).unwrap();
        let spec = periodic_energy_spectral(&triple, &w).unwrap();
        let rel = (spec - exact.to_f64()).abs() / exact.to_f64().abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure(rel <= 1e-9, || format!("trial {trial} (d={d}, M={m}): relative difference {rel:e}"))?;
        let total: f64 = w.weights().iter().sum();
        let lp_exact = exact.to_f64() - total * total / 3f64.powi(d as i32);
        let lp_spec = periodic_l2_spectral(&w).unwrap();
        ensure(
            (lp_spec - lp_exact).abs() <= 1e-9 * exact.to_f64().abs().max(1.0),
            || format!("trial {trial}: mu-form {lp_spec} vs {lp_exact}"),
        )?;
    }
    for m in 1..=16 {
        for d in 1..=3 {
            let (from_samples, closed) = mu_zero_exact(m, d).unwrap();
            ensure(from_samples == closed, || format!("mu_0 mismatch at M={m}, d={d}"))?;
        }
    }
    Ok(format!("100 arrays, worst relative difference {worst:.2e}; mu_0 exact"))
}

fn warnock_vs_definition() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for kind in DiscrepancyKind::ALL {
        for i in 0..10 {
            let d = r.gen_range(1..=3);
            let n = r.gen_range(1..=20);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen::<f64>()).collect()).collect();
            let ws: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..1.5)).collect();
            let set = WeightedPointSet::new(d, pts, ws).unwrap();
            let exact = l2_discrepancy_warnock(&set, kind);
            let est = l2_discrepancy_oracle(&set, kind, 1_000_000, 600 + i).unwrap();
            let z = (est.estimate - exact).abs() / est.std_error;
            worst = worst.max(z);
            ensure(z <= 3.0, || format!("{kind} set {i}: {} vs {exact} ({z:.2} SE)", est.estimate))?;
        }
    }
    Ok(format!("30 sets, largest deviation {worst:.2} standard errors"))
}

fn pair_distribution_exact() -> Outcome {
    let mut instances = 0;
    for (d, max_m) in [(2, 5), (3, 4)] {
        for m in 1..=max_m {
            let domain = TorusGrid::new(m, d - 1).unwrap();
            let cells = domain.cell_count();
            let mut counts = vec![0u64; cells * cells * m * m];
            let mut lambda = 0u64;
            for h in enumerate_all(m, d).unwrap() {
                let t = h.table();
                for i in 0..cells {
                    for j in 0..cells {
                        counts[((i * cells + j) * m + t[i]) * m + t[j]] += 1;
                    }
                }
                lambda += 1;
            }
            for i in 0..cells {
                for j in 0..cells {
                    let delta = hamming_delta(&domain.coords(i), &domain.coords(j)).unwrap();
                    let p = pair_distribution(m, delta).unwrap();
                    for a in 0..m {
                        for b in 0..m {
                            let c = counts[((i * cells + j) * m + a) * m + b];
                            let got = q(c as i64, lambda as i64);
                            ensure(&got == p.prob(a, b), || {
                                format!("d={d} M={m} delta={delta} ({a},{b}): {got} != {}", p.prob(a, b))
                            })?;
                        }
                    }
                }
            }
            instances += 1;
        }
    }
    Ok(format!("{instances} instances, every (m, n, p, q) exact"))
}

fn expectation() -> Outcome {
    for (d, max_m) in [(2, 7), (3, 4)] {
        for m in 2..=max_m {
            let rep = exhaustive_moments(m, d, Statistic::Lp2).unwrap();
            ensure(rep.exact_mean.as_ref() == Some(&rep.closed_form), || {
                format!("d={d} M={m}: mean {:?} vs {}", rep.exact_mean, rep.closed_form)
            })?;
        }
    }
    ensure(expected_lp_squared(2, 2).unwrap() == q(13, 72), || "spot value 13/72".into())?;
    let sampler = HypercubeSampler::coordinate_permuted(5, 3).unwrap();
    let mc = monte_carlo_moments(&sampler, Statistic::Lp2, 20_000, 8).unwrap();
    let se = mc.std_error.unwrap();
    let z = (mc.empirical_mean - mc.closed_form.to_f64()).abs() / se;
    ensure(z <= 4.0, || format!("(3,5) MC mean {} vs {} ({z:.2} SE)", mc.empirical_mean, mc.closed_form))?;
    Ok(format!("exhaustive exact for (2,<=7),(3,<=4); MC (3,5) within {z:.2} SE"))
}

fn variance_conjecture() -> Outcome {
    for n in 1..=7 {
        let expected = variance_lp_squared_d2(n).unwrap();
        let got = if n == 1 {
            q(0, 1)
        } else {
            exhaustive_moments(n, 2, Statistic::Lp2).unwrap().exact_variance.unwrap()
        };
        ensure(got == expected, || format!("N={n}: {got} != {expected}"))?;
    }
    ensure(variance_lp_squared_d2(3).unwrap() == q(0, 1), || "N=3 must give 0".into())?;
    let mut worst: f64 = 0.0;
    for n in 8..=13 {
        let grid = TorusGrid::new(n, 2).unwrap();
        let mut r = rng(900 + n as u64);
        let samples = 100_000;
        let values: Vec<f64> = (0..samples)
            .map(|_| {
                let mut sigma: Vec<usize> = (0..n).collect();
                sigma.shuffle(&mut r);
                let cells: Vec<usize> = sigma.iter().enumerate().map(|(i, &v)| i * n + v).collect();
                l2_discrepancy_grid_f64(grid, &cells, DiscrepancyKind::Periodic)
            })
            .collect();
        let k = samples as f64;
        let mean = values.iter().sum::<f64>() / k;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / k;
        let var = m2 * k / (k - 1.0);
        // standard error of the sample variance
        let se = ((m4 - m2 * m2 * (k - 3.0) / (k - 1.0)) / k).sqrt();
        let target = variance_lp_squared_d2(n).unwrap().to_f64();
        let z = (var - target).abs() / se;
        worst = worst.max(z);
        ensure(z <= 4.0, || format!("N={n}: sample variance {var:e} vs {target:e} ({z:.2} SE)"))?;
    }
    Ok(format!("exact for N <= 7; MC for 8 <= N <= 13 within {worst:.2} SE"))
}

fn lower_bound() -> Outcome {
    let mut count = 0;
    let check = |h: &WeakLatinHypercube| -> Result<(), String> {
        let b = lp_lower_bound(h.order(), h.dim()).unwrap();
        let lp2 = l2_discrepancy_grid_exact(h.grid(), &h.cells(), DiscrepancyKind::Periodic);
        ensure(lp2 >= b.lp2_exact, || format!("{h:?}: {lp2} below {}", b.lp2_exact))?;
        let lp = lp2.to_f64().sqrt();
        ensure(lp >= b.lp_simplified, || format!("{h:?}: Lp {lp} below {}", b.lp_simplified))
    };
    for (d, max_m) in [(2, 7), (3, 4)] {
        for m in 1..=max_m {
            for h in enumerate_all(m, d).unwrap() {
                check(&h)?;
                count += 1;
            }
        }
    }
    let mut r = rng(10);
    for (d, m) in [(2, 40), (3, 8), (4, 3), (4, 4), (5, 3)] {
        let h0 = WeakLatinHypercube::cyclic(m, d).unwrap();
        for _ in 0..50 {
            check(&sample_coordinate_permuted_with(&h0, &mut r))?;
            count += 1;
        }
    }
    let chain = UniformSampler::new(6, 3, UniformMethod::Chain, None).unwrap();
    for _ in 0..50 {
        check(&chain.sample(&mut r))?;
        count += 1;
    }
    Ok(format!("{count} hypercubes above both bounds"))
}

fn fourier_identity() -> Outcome {
    let worst = (1..=64).map(eta_fourier_identity_deviation).fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("M <= 64, worst deviation {worst:.2e}"))
}

fn permutation_spectral() -> Outcome {
    let mut r = rng(12);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.gen_range(1..=64);
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(&mut r);
        let spec = permutation_lp_spectral(&sigma).unwrap();
        let warnock = l2_discrepancy_warnock(&permutation_set::<Rational>(&sigma).unwrap(), DiscrepancyKind::Periodic).to_f64();
        let rel = (spec - warnock).abs() / warnock;
        worst = worst.max(rel);
        ensure(rel <= 1e-9, || format!("N={n}: {spec} vs {warnock}"))?;
    }
    Ok(format!("100 permutations, worst relative difference {worst:.2e}"))
}

fn truncated_fourier() -> Outcome {
    let mut r = rng(13);
    for i in 0..20 {
        let d = r.gen_range(1..=3);
        let n = r.gen_range(1..=10);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen::<f64>()).collect()).collect();
        let ws: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..2.0)).collect();
        let set = WeightedPointSet::new(d, pts.clone(), ws).unwrap();
        let warnock = l2_discrepancy_warnock(&set, DiscrepancyKind::Periodic);
        let cutoffs: &[usize] = if d == 3 { &[1, 2, 4, 8] } else { &[1, 2, 4, 8, 16, 32] };
        let (mut prev_p, mut prev_d) = (0.0, 0.0);
        for &k in cutoffs {
            let p = periodic_l2_fourier_truncated(&set, k).unwrap();
            let di = diaphony_truncated(d, &pts, k).unwrap();
            ensure(p >= prev_p && di >= prev_d, || format!("set {i}: not monotone at cutoff {k}"))?;
            ensure(p <= warnock + 1e-12, || format!("set {i}: partial sum {p} exceeds {warnock}"))?;
            prev_p = p;
            prev_d = di;
        }
    }
    Ok("20 sets: monotone, bounded by the closed form".into())
}

fn optimizer_sanity() -> Outcome {
    let schedule = Schedule::default();
    for (m, d) in [(2, 2), (3, 2), (4, 2), (5, 2), (6, 2), (3, 3)] {
        let min = enumerate_all(m, d)
            .unwrap()
            .map(|h| l2_discrepancy_grid_exact(h.grid(), &h.cells(), DiscrepancyKind::Periodic))
            .min()
            .unwrap();
        let (best, _) = anneal_restarts(m, d, schedule, 2, 14, false).unwrap();
        ensure(best.best_lp2_exact == min, || {
            format!("M={m} d={d}: found {} but minimum is {min}", best.best_lp2_exact)
        })?;
        ensure(best.best.is_valid(), || "invalid best design".into())?;
    }
    let mut worst: f64 = 0.0;
    for (m, d) in [(64, 2), (8, 3), (4, 4)] {
        let mut r = rng(140 + m as u64);
        let mut st = SearchState::new(Design::random(m, d, false, &mut r).unwrap());
        let mut tracked = st.lp2();
        for step in 0..10_000 {
            let mv = st.propose_move(&mut r);
            tracked += st.delta_lp2(&mv);
            st.apply(&mv);
            if step % 2500 == 0 {
                ensure(st.design().is_valid(), || "invalid state".into())?;
            }
        }
        let fresh = st.lp2_from_scratch();
        for v in [st.lp2(), tracked] {
            let rel = (v - fresh).abs() / fresh;
            worst = worst.max(rel);
            ensure(rel <= 1e-9, || format!("M={m} d={d}: {v} vs recomputed {fresh}"))?;
        }
    }
    Ok(format!("minima recovered; drift after 10^4 moves {worst:.2e}"))
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (Duration, T) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..reps {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed());
        out = Some(v);
    }
    (best, out.unwrap())
}

fn performance() -> Outcome {
    let h0 = WeakLatinHypercube::cyclic(32, 3).unwrap();
    let h = sample_coordinate_permuted_with(&h0, &mut rng(15));
    let w = h.indicator::<f64>();
    let triple = EnergyTriple::<f64>::discrepancy().sample(32).unwrap();
    let (t_pair, e_pair) = best_of(5, || energy(&triple, &w, EnergyKind::Periodic).unwrap());
    let (t_spec, e_spec) = best_of(5, || periodic_energy_spectral(&triple, &w).unwrap());
    ensure((e_pair - e_spec).abs() <= 1e-9 * e_pair, || "evaluators disagree".into())?;
    let speedup = t_pair.as_secs_f64() / t_spec.as_secs_f64();
    let detail = format!("pairwise {t_pair:?}, spectral {t_spec:?}, speedup {speedup:.1}x (N = 1024, M = 32, d = 3)");
    ensure(speedup >= 2.0, || detail.clone())?;
    Ok(detail)
}

fn main() {
    let criteria: [Criterion; 15] = [
        (1, "permutation identity", permutation_identity, true),
        (2, "hypercube identity", hypercube_identity, true),
        (3, "union identity", union_identity, true),
        (4, "excess decomposition", excess_decomposition_exact, true),
        (5, "spectral equivalence", spectral_equivalence, true),
        (6, "Warnock vs definition", warnock_vs_definition, true),
        (7, "pair distribution", pair_distribution_exact, true),
        (8, "expectation", expectation, true),
        (9, "variance formula", variance_conjecture, true),
        (10, "lower bound", lower_bound, true),
        (11, "Fourier identity", fourier_identity, true),
        (12, "permutation spectral formula", permutation_spectral, true),
        (13, "truncated Fourier series", truncated_fourier, true),
        (14, "optimizer sanity", optimizer_sanity, true),
        (15, "performance", performance, false),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, run, hard) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) if hard => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {detail} [{secs:.1}s]");
            }
            Err(detail) => println!("criterion {id:>2} FAIL (soft, warning only) {name}: {detail} [{secs:.1}s]"),
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
