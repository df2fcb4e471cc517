use std::process::ExitCode;
use std::time::Instant;

use blockwish::classify::{
    closed_form_generalized_moment, easy_case_eligible, is_symmetric, is_unital_mod_scalars, predict_limit_law,
    symmetric_components,
};
use blockwish::free_poisson::{
    asymptotic_limit, aubrun_law, bessel_limit, compound_from_choi, compound_moments, free_bessel,
};
use blockwish::maps::{builtin_map, choi_from_map, easy_choi, twisted_choi};
use blockwish::moments::{generalized_star_moment, generalized_star_moment_raw, is_multiplicative, law_moments, DEFAULT_BUDGET};
use blockwish::partition::{
    catalan_number, crossing_count, enumerate_noncrossing, enumerate_partitions, signature, signature_by_switch_search,
};
use blockwish::wishart::{empirical_star_moments, SampleStats, WishartConfig};
use blockwish::{ChoiMatrix, ExponentWord, Partition, Permutation};
use num_complex::Complex64;

const SEED: u64 = 20_240_917;
const D: usize = 100;
const TRIALS: usize = 200;
const EXACT_TOL: f64 = 1e-9;
const SIGMAS: f64 = 3.0;
const RELATIVE: f64 = 0.05;

type Outcome = Result<String, String>;

fn lit(s: &str) -> Partition {
    s.parse().unwrap()
}

fn word(s: &str) -> ExponentWord {
    s.parse().unwrap()
}

fn nc_perms(p: usize) -> Vec<Permutation> {
    enumerate_noncrossing(p).unwrap().iter().map(|s| Permutation::from_noncrossing(s).unwrap()).collect()
}

fn pow(n: usize, k: usize) -> f64 {
    (n as u64).pow(k as u32) as f64
}

fn tuples(n: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n.pow(len as u32)).map(move |mut k| {
        let mut t = vec![0; len];
        for slot in t.iter_mut().rev() {
            *slot = k % n;
            k /= n;
        }
        t
    })
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

/// Number of blocks of the join of the orbit partitions of `σ` and `τ`.
fn join_blocks(sigma: &Permutation, tau: &Permutation) -> usize {
    let p = sigma.size();
    let mut parent: Vec<usize> = (0..p).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    for x in 0..p {
        for y in [sigma.apply(x), tau.apply(x)] {
            let (a, b) = (root(&mut parent, x), root(&mut parent, y));
            parent[a] = b;
        }
    }
    (0..p).filter(|&x| root(&mut parent, x) == x).count()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for (literal, name) in [("ab/ab", "identity"), ("ab/ba", "transpose"), ("aa/bb", "trace-unit"), ("aa/aa", "diagonal")] {
        for n in [2, 3] {
            let choi = easy_choi(&lit(literal), n).unwrap();
            for p in 1..=4 {
                let e = ExponentWord::plain(p);
                for sigma in nc_perms(p) {
                    for tau in nc_perms(p) {
                        // unnormalized sums: the n^{-|σ|-|τ|} factor is common to both sides
                        let blocks = match name {
                            "identity" => sigma.compose(&tau.inverse()).unwrap().cycle_count(),
                            "transpose" => sigma.compose(&tau).unwrap().cycle_count(),
                            "trace-unit" => sigma.cycle_count() + tau.cycle_count(),
                            _ => join_blocks(&sigma, &tau),
                        };
                        let raw = generalized_star_moment_raw(&choi, &sigma, &tau, &e, DEFAULT_BUDGET).unwrap();
                        let expected = pow(n, blocks);
                        check(raw == Complex64::new(expected, 0.0), || {
                            format!("{name} n={n} σ={sigma:?} τ={tau:?}: {raw} vs {expected}")
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} (σ,τ) pairs exact"))
}

fn criterion_2(passing: &mut Vec<(String, ChoiMatrix)>) -> Outcome {
    for literal in ["ab/ab", "ab/ba", "aa/bb", "aa/aa"] {
        for n in [2, 3] {
            let choi = easy_choi(&lit(literal), n).unwrap();
            let report = is_multiplicative(&choi, 4, EXACT_TOL).unwrap();
            check(report.verdict, || format!("{literal} at N={n}: {:?}", report.first_failure()))?;
            passing.push((format!("{literal} N={n}"), choi));
        }
    }
    let report = is_multiplicative(&easy_choi(&lit("aaaa/aaaa"), 2).unwrap(), 4, EXACT_TOL).unwrap();
    let first = report.first_failure().ok_or("aaaa/aaaa passed")?;
    let witness = [first.left.0, first.right.0];
    let expected = [Complex64::new(2f64.powi(-5), 0.0), Complex64::new(2f64.powi(-6), 0.0)];
    check(!report.verdict && first.p == 2 && witness == expected, || format!("aaaa/aaaa first failure {first:?}"))?;
    Ok(format!(
        "basic four pass at N=2,3 to p=4; aaaa/aaaa fails at p=2 σ={} with {} vs {}",
        first.sigma, witness[0].re, witness[1].re
    ))
}

fn symmetric_even(s: usize) -> Vec<Partition> {
    enumerate_partitions(2 * s, 2 * s, true).unwrap().into_iter().filter(|pi| is_symmetric(pi).unwrap()).collect()
}

fn criterion_3() -> Outcome {
    let all = symmetric_even(2);
    let mut checked = 0;
    for pi in &all {
        let choi = easy_choi(pi, 2).unwrap();
        for p in 1..=3 {
            let e = ExponentWord::plain(p);
            for sigma in Permutation::all(p) {
                for tau in Permutation::all(p) {
                    let brute = generalized_star_moment(&choi, &sigma, &tau, &e).unwrap();
                    let closed = closed_form_generalized_moment(pi, &sigma, &tau, 2).unwrap();
                    check(brute == Complex64::new(closed, 0.0), || format!("{pi} σ={sigma:?} τ={tau:?}: {brute} vs {closed}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{} symmetric partitions, {checked} (σ,τ) pairs exact", all.len()))
}

fn criterion_4() -> Outcome {
    let mut pis = enumerate_partitions(2, 2, false).unwrap();
    let small = pis.len();
    pis.extend(enumerate_partitions(4, 4, true).unwrap());
    for pi in &pis {
        for n in [2, 3] {
            is_unital_mod_scalars(pi, n).map_err(|e| e.to_string())?;
        }
    }
    let symmetric = symmetric_even(2);
    let mut eligible = 0;
    for pi in &symmetric {
        let report = easy_case_eligible(pi).map_err(|e| e.to_string())?;
        check(report.verdict == report.unital_both && report.verdict == report.basic_copies, || format!("{pi}: {report:?}"))?;
        eligible += report.verdict as usize;
    }
    Ok(format!(
        "unitality routes agree on {small} + {} partitions; eligibility conditions agree on {} symmetric ({eligible} eligible)",
        pis.len() - small,
        symmetric.len()
    ))
}

/// `(1/n^{|σ|+|τ|}) Σ_{ker i ≥ στ} (-1)^{Σ_x [i_x ≠ i_σ(x)]}`
fn signed_sum(n: usize, sigma: &Permutation, tau: &Permutation) -> f64 {
    let st = sigma.compose(tau).unwrap();
    let p = sigma.size();
    let total: i64 = tuples(n, p)
        .filter(|i| (0..p).all(|x| i[x] == i[st.apply(x)]))
        .map(|i| if (0..p).filter(|&x| i[x] != i[sigma.apply(x)]).count() % 2 == 0 { 1 } else { -1 })
        .sum();
    total as f64 / pow(n, sigma.cycle_count() + tau.cycle_count())
}

fn criterion_5() -> Outcome {
    let pi2 = lit("ab/ba");
    let mut pairs = 0;
    for n in [2, 3] {
        let bar = twisted_choi(&pi2, n).unwrap();
        for p in 1..=4 {
            for sigma in Permutation::all(p) {
                for tau in Permutation::all(p) {
                    let brute = generalized_star_moment(&bar, &sigma, &tau, &ExponentWord::plain(p)).unwrap();
                    let formula = signed_sum(n, &sigma, &tau);
                    check(close(brute, Complex64::new(formula, 0.0), 1e-12), || {
                        format!("signed sum n={n} σ={sigma:?} τ={tau:?}: {brute} vs {formula}")
                    })?;
                    pairs += 1;
                }
            }
        }
    }
    for n in [2, 3, 4] {
        let bar = law_moments(&twisted_choi(&pi2, n).unwrap(), 6).unwrap();
        let plain = law_moments(&easy_choi(&pi2, n).unwrap(), 6).unwrap();
        check(bar.approx_eq(&plain, EXACT_TOL), || format!("law(Λ̄) ≠ law(Λ) for ab/ba at n={n}"))?;
    }
    let mut eligible = 0;
    let mut differing = Vec::new();
    for pi in symmetric_even(2) {
        if pi.is_noncrossing() || !easy_case_eligible(&pi).unwrap().verdict {
            continue;
        }
        eligible += 1;
        let plain = asymptotic_limit(&easy_choi(&pi, 2).unwrap(), 1, 4).unwrap();
        let bar = asymptotic_limit(&twisted_choi(&pi, 2).unwrap(), 1, 4).unwrap();
        let refused = predict_limit_law(&pi, 2, 1, true, 4).is_err();
        if refused || !bar.approx_eq(&plain, EXACT_TOL) {
            differing.push(pi.to_string());
        }
    }
    let head = format!("signed sum exact on {pairs} (σ,τ) pairs; law(Λ̄)=law(Λ) to p=6 at n=2,3,4");
    if differing.is_empty() {
        Ok(format!("{head}; twisted = untwisted on all {eligible} eligible crossing partitions"))
    } else {
        Err(format!(
            "{head}; twisted ≠ untwisted limit on {} of {eligible} eligible crossing partitions at N=2, e.g. {}",
            differing.len(),
            differing[..3].join(", ")
        ))
    }
}

fn restrict(pi: &Partition, upper: &[usize], lower: &[usize]) -> Partition {
    let mut labels: Vec<usize> = upper.iter().map(|&x| pi.upper_labels()[x]).collect();
    labels.extend(lower.iter().map(|&x| pi.lower_labels()[x]));
    Partition::from_labels(upper.len(), lower.len(), &labels).unwrap()
}

fn criterion_6() -> Outcome {
    let mut evens = 0;
    let mut merged = 0;
    for points in (2..=8).step_by(2) {
        for k in 0..=points {
            let all = enumerate_partitions(k, points - k, true).unwrap();
            let nc: Vec<&Partition> = all.iter().filter(|pi| pi.is_noncrossing()).collect();
            for pi in &all {
                let eps = signature(pi).unwrap();
                check(eps == signature_by_switch_search(pi).unwrap(), || format!("{pi}: refinement rule vs switch search"))?;
                if pi.is_pairing() {
                    let parity = if crossing_count(pi).unwrap().is_multiple_of(2) { 1 } else { -1 };
                    check(eps == parity, || format!("pairing {pi}: signature {eps}, crossing parity {parity}"))?;
                }
                if nc.iter().any(|sigma| pi.is_coarser(sigma).unwrap()) {
                    check(eps == 1, || format!("{pi} merges a noncrossing partition but has signature {eps}"))?;
                    merged += 1;
                }
                evens += 1;
            }
        }
    }
    for k in 1..=4 {
        for perm in Permutation::all(k) {
            let eps = signature(&Partition::from_permutation(&perm)).unwrap();
            check(eps == perm.sign(), || format!("{perm:?}: {eps} vs sign {}", perm.sign()))?;
        }
    }
    let head = format!("refinement rule = switch search on {evens} even partitions; {merged} merged-noncrossing have +1; pairings and permutations agree");
    let mut symmetric = 0;
    let mut violations = Vec::new();
    for s in 1..=2 {
        for pi in symmetric_even(s) {
            symmetric += 1;
            let product: i32 = symmetric_components(&pi)
                .unwrap()
                .iter()
                .map(|c| {
                    let (mut upper, mut lower) = (c.upper_legs.clone(), c.lower_legs.clone());
                    upper.sort_unstable();
                    lower.sort_unstable();
                    signature(&restrict(&pi, &upper, &lower)).unwrap()
                })
                .product();
            if product != signature(&pi).unwrap() {
                violations.push(pi.to_string());
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{head}; signature multiplicative over components on {symmetric} symmetric partitions"))
    } else {
        Err(format!(
            "{head}; signature not multiplicative over components on {} of {symmetric} symmetric partitions, e.g. {}",
            violations.len(),
            violations[..3].join(", ")
        ))
    }
}

fn simulate(map: &str, n: usize, m: usize, rescale: f64, words: Vec<ExponentWord>) -> SampleStats {
    let config = WishartConfig { d: D, n, m, trials: TRIALS, seed: SEED, p_max: 4, words: Some(words) };
    empirical_star_moments(&config, &builtin_map(map, n).unwrap(), rescale).unwrap()
}

fn plain_words() -> Vec<ExponentWord> {
    (1..=4).map(ExponentWord::plain).collect()
}

/// Compare every plain moment against `targets[p - 1]`.
fn within_targets(stats: &SampleStats, targets: &[f64]) -> Result<Vec<String>, String> {
    let mut shown = Vec::new();
    for (p, &target) in (1..=targets.len()).zip(targets) {
        let stat = stats.get(&ExponentWord::plain(p)).unwrap();
        let gap = (stat.mean.0 - Complex64::new(target, 0.0)).norm();
        let allowed = (SIGMAS * stat.standard_error).max(RELATIVE * target.abs());
        check(gap <= allowed, || format!("p={p}: mean {} vs {target}, gap {gap:.4} > {allowed:.4}", stat.mean.0))?;
        shown.push(format!("{:.3}/{target}", stat.mean.0.re));
    }
    Ok(shown)
}

fn free_poisson_nc_sum(t: f64, p: usize) -> f64 {
    enumerate_noncrossing(p).unwrap().iter().map(|s| t.powi(s.block_count() as i32)).sum()
}

fn criterion_7() -> Outcome {
    let targets: Vec<f64> = (1..=4).map(|p| catalan_number(p) as f64).collect();
    let limit = asymptotic_limit(&easy_choi(&lit("ab/ab"), 2).unwrap(), 2, 4).unwrap();
    for p in 1..=4 {
        let w = limit.plain(p).unwrap() / 2f64.powi(p as i32);
        check(close(w, Complex64::new(targets[p - 1], 0.0), EXACT_TOL), || format!("limit formula gives {w} at p={p}"))?;
    }
    let shown = within_targets(&simulate("identity", 2, 2, 1.0, plain_words()), &targets)?;
    Ok(format!("tr W^p at d={D}: {}", shown.join(" ")))
}

fn criterion_8() -> Outcome {
    let exact = compound_from_choi(&easy_choi(&lit("ab/ba"), 2).unwrap(), 1, 4).unwrap();
    let atomic = compound_moments(&aubrun_law(2, 1).unwrap(), 4).unwrap();
    check(exact.approx_eq(&atomic, EXACT_TOL), || "compound law of Λ differs from the α₊ − α₋ route".into())?;
    let targets: Vec<f64> = (1..=4).map(|p| exact.plain(p).unwrap().re).collect();
    let shown = within_targets(&simulate("transpose", 2, 1, 1.0, plain_words()), &targets)?;
    Ok(format!("mW̃ under transpose: {}", shown.join(" ")))
}

fn criterion_9() -> Outcome {
    let (n, m) = (2, 2);
    let mut lines = Vec::new();
    for (map, t) in [("trace-unit", (m * n) as f64), ("diagonal", m as f64)] {
        let targets: Vec<f64> = (1..=4).map(|p| free_poisson_nc_sum(t, p)).collect();
        let limit = asymptotic_limit(&choi_from_map(&builtin_map(map, n).unwrap()), m, 4).unwrap();
        for p in 1..=4 {
            check(close(limit.plain(p).unwrap(), Complex64::new(targets[p - 1], 0.0), EXACT_TOL), || {
                format!("{map}: limit formula disagrees with π_{t} at p={p}")
            })?;
        }
        let shown = within_targets(&simulate(map, n, m, m as f64, plain_words()), &targets).map_err(|e| format!("{map}: {e}"))?;
        lines.push(format!("{map} → π_{t}: {}", shown.join(" ")));
    }
    Ok(lines.join("; "))
}

fn criterion_10() -> Outcome {
    let (n, m) = (2, 2);
    let targets: Vec<f64> = (1..=4)
        .map(|p| enumerate_noncrossing(p).unwrap().iter().filter(|s| s.block_sizes().iter().all(|k| k % 2 == 0)).count() as f64)
        .collect();
    check(targets == [0.0, 1.0, 0.0, 3.0], || format!("NC_p(2) counts {targets:?}"))?;
    let e = word("1*1*");
    let exact = bessel_limit(n, m, &e).unwrap();
    let general = asymptotic_limit(&choi_from_map(&builtin_map("bessel", n).unwrap()), m, 4).unwrap().get(&e).unwrap();
    check(close(exact, general / pow(m, 4), EXACT_TOL), || format!("Bessel route {exact} vs limit formula {general}"))?;
    let compound = compound_moments(&free_bessel(n, 1.0).unwrap(), 4).unwrap().get(&e).unwrap();
    check(!close(exact, compound, 1e-6), || "exact and compound values coincide".into())?;
    let mut words = plain_words();
    words.push(e.clone());
    let stats = simulate("bessel", n, m, 1.0, words);
    let shown = within_targets(&stats, &targets)?;
    let stat = stats.get(&e).unwrap();
    let to_exact = (stat.mean.0 - exact).norm();
    let to_compound = (stat.mean.0 - compound).norm();
    let allowed = (SIGMAS * stat.standard_error).max(RELATIVE * exact.norm());
    check(to_exact <= allowed, || format!("1*1*: mean {} vs exact {exact}", stat.mean.0))?;
    check(to_compound >= 5.0 * stat.standard_error && to_compound > to_exact, || {
        format!("1*1*: mean {} not separated from compound value {compound} (SE {})", stat.mean.0, stat.standard_error)
    })?;
    Ok(format!(
        "plain {}; 1*1*: empirical {:.3} (SE {:.3}), exact {}, compound {}, {:.0} SE from compound",
        shown.join(" "),
        stat.mean.0.re,
        stat.standard_error,
        exact.re,
        compound.re,
        to_compound / stat.standard_error
    ))
}

fn criterion_11(mut passing: Vec<(String, ChoiMatrix)>) -> Outcome {
    let mut candidates: Vec<(String, ChoiMatrix)> = Vec::new();
    for name in ["twisted-crossing", "bessel"] {
        for n in [2, 3] {
            candidates.push((format!("{name} n={n}"), choi_from_map(&builtin_map(name, n).unwrap())));
        }
    }
    for pi in symmetric_even(2) {
        if easy_case_eligible(&pi).unwrap().verdict {
            candidates.push((format!("{pi} N=2"), easy_choi(&pi, 2).unwrap()));
            candidates.push((format!("twisted {pi} N=2"), twisted_choi(&pi, 2).unwrap()));
        }
    }
    let mut rejected = 0;
    for (label, choi) in candidates {
        if is_multiplicative(&choi, 4, EXACT_TOL).unwrap().verdict {
            passing.push((label, choi));
        } else {
            rejected += 1;
        }
    }
    for (label, choi) in &passing {
        for m in [1, 2] {
            let general = asymptotic_limit(choi, m, 4).unwrap();
            let compound = compound_from_choi(choi, m, 4).unwrap();
            check(general.approx_eq(&compound, EXACT_TOL), || {
                format!("{label} m={m}: max difference {}", general.max_abs_difference(&compound))
            })?;
        }
    }
    Ok(format!("{} multiplicative Choi matrices agree at m=1,2 ({rejected} non-multiplicative candidates skipped)", passing.len()))
}

fn main() -> ExitCode {
    let mut passing = Vec::new();
    let mut failed = 0;
    let mut report = |id: usize, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id}: FAIL ({secs:.1}s) {detail}");
            }
        }
    };
    report(1, &mut criterion_1);
    report(2, &mut || criterion_2(&mut passing));
    report(3, &mut criterion_3);
    report(4, &mut criterion_4);
    report(5, &mut criterion_5);
    report(6, &mut criterion_6);
    report(7, &mut criterion_7);
    report(8, &mut criterion_8);
    report(9, &mut criterion_9);
    report(10, &mut criterion_10);
    let basic = std::mem::take(&mut passing);
    report(11, &mut || criterion_11(basic.clone()));
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
