//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aggrelab_core::ballistic::*;
use aggrelab_core::oracle::{oracle_check, random_bd_instance, Budget, OracleKind};
use aggrelab_core::realize1::realizable_1d;
use aggrelab_core::realize2::realizable_2d;
use aggrelab_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2024;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

fn within(report_ok: bool, elapsed: Duration, limit: Duration, detail: String) -> Verdict {
    let timed = elapsed <= limit;
    Verdict {
        ok: report_ok && timed,
        detail: format!("{detail}; {:.2}s of {:.0}s allowed", elapsed.as_secs_f64(), limit.as_secs_f64()),
    }
}

fn sweep(kind: OracleKind, instances: usize, limit: Duration) -> Verdict {
    let r = oracle_check(kind, Budget { instances, seed: SEED });
    let mut detail = format!("{} instances, {} mismatches", r.instances, r.mismatches);
    for s in &r.samples {
        detail.push_str("\n    ");
        detail.push_str(&s.replace('\n', "\n    "));
    }
    within(r.mismatches == 0, r.elapsed, limit, detail)
}

fn worked_example() -> Verdict {
    let start = Instant::now();
    let drops = [2, 7, 7, 2, 6, 3, 4, 4, 4, 5, 6, 3, 2, 6, 2];
    let fig = run_script(&ThrowScript::from_drops(7, &drops), DirectionSet::new(1).unwrap()).unwrap();
    let want: [(usize, &[usize]); 7] =
        [(1, &[]), (2, &[1, 2, 4, 5]), (3, &[2, 4]), (4, &[2, 3, 4]), (5, &[4]), (6, &[2, 4, 5]), (7, &[1, 2])];
    let ok = fig.len() == 15 && want.iter().all(|&(c, hs)| fig.column_heights(c) == hs);
    within(ok, start.elapsed(), Duration::from_secs(1), format!("{} cells", fig.len()))
}

fn occupancy(g: &SubstrateGraph, drops: &[usize]) -> BTreeSet<(usize, usize)> {
    let rows = bd_simulate(g, &DropSequence::new(drops.to_vec())).unwrap();
    drops.iter().copied().zip(rows).collect()
}

fn commutativity() -> Verdict {
    let (mut pairs, mut broken, mut seed) = (0, 0, SEED);
    while pairs < 500 {
        seed += 1;
        let (g, s) = random_bd_instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.n_vertices();
        let (u, v) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
        if u == v || g.is_adjacent(u, v) {
            continue;
        }
        pairs += 1;
        let mut uv = s.drops.clone();
        uv.extend([u, v]);
        let mut vu = s.drops.clone();
        vu.extend([v, u]);
        if occupancy(&g, &uv) != occupancy(&g, &vu) {
            broken += 1;
        }
    }
    Verdict { ok: broken == 0, detail: format!("{pairs} swaps, {broken} changed the occupancy") }
}

fn bead_sorting() -> Verdict {
    let mut bad = usize::from(bead_sort(&[7, 4, 1, 10]).unwrap() != [10, 7, 4, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..50 {
        let len = rng.gen_range(1..=12);
        let values: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=15)).collect();
        let mut want = values.clone();
        want.sort_unstable_by(|a, b| b.cmp(a));
        bad += usize::from(bead_sort(&values).unwrap() != want);
    }
    Verdict { ok: bad == 0, detail: format!("51 inputs, {bad} wrong") }
}

fn dynamics_closure() -> Verdict {
    let mut rejected = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in [1u8, 2] {
        let dirs = DirectionSet::new(k).unwrap();
        for _ in 0..200 {
            let script = random_script(6, rng.gen_range(1..=20), rng.gen_range(6..=14), dirs, rng.gen());
            let fig = run_script(&script, dirs).unwrap();
            let accepted = if k == 1 { realizable_1d(&fig) } else { realizable_2d(&fig) };
            rejected += usize::from(!accepted);
        }
    }
    Verdict { ok: rejected == 0, detail: format!("400 simulated figures, {rejected} rejected") }
}

fn mutate(chain: &mut [ChainLink], rng: &mut ChaCha8Rng) {
    let i = rng.gen_range(0..chain.len());
    let link = &mut chain[i];
    let bump = |x: usize, rng: &mut ChaCha8Rng| if x > 1 && rng.gen_bool(0.5) { x - 1 } else { x + 1 };
    match rng.gen_range(0..4) {
        0 => link.particle.vertex = bump(link.particle.vertex, rng),
        1 => link.particle.num = bump(link.particle.num, rng),
        2 => link.particle.pos = bump(link.particle.pos, rng),
        _ => link.weight = 1 - link.weight.min(1),
    }
}

fn certificates() -> Verdict {
    let (mut chains, mut rejected_genuine, mut mutations, mut shifted, mut unsound) = (0, 0, 0, 0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut seed = SEED;
    while mutations < 1000 {
        seed += 1;
        let (g, s) = random_bd_instance(seed);
        let rows = bd_simulate(&g, &s).unwrap();
        let Some(i) = (!rows.is_empty()).then(|| rng.gen_range(0..rows.len())) else { continue };
        let site = BdSite::new(rows[i], s.drops[i]);
        let chain = certificate_for(&g, &s, site).unwrap().expect("occupied site has a certificate");
        chains += 1;
        rejected_genuine += usize::from(!verify_certificate(&g, &s, site, &chain));
        let mut bad = chain.clone();
        mutate(&mut bad, &mut rng);
        mutations += 1;
        let max_h = rows.iter().copied().max().unwrap_or(0) + 2;
        for h in 1..=max_h {
            for v in 1..=g.n_vertices() {
                let other = BdSite::new(h, v);
                if verify_certificate(&g, &s, other, &bad) {
                    shifted += usize::from(other != site);
                    unsound += usize::from(!bd_predict(&g, &s, other).unwrap());
                }
            }
        }
    }
    Verdict {
        ok: rejected_genuine == 0 && unsound == 0,
        detail: format!(
            "{chains} genuine chains ({rejected_genuine} rejected), {mutations} mutations \
             ({shifted} accepted elsewhere), {unsound} soundness violations"
        ),
    }
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("1 worked 1-DLA example", worked_example),
        ("2 DAG rows equal direct BD", || sweep(OracleKind::BdRows, 1000, Duration::from_secs(10))),
        ("3 commutativity of non-adjacent drops", commutativity),
        ("4 bead sort", bead_sorting),
        ("5 1-DLA realization oracle", || sweep(OracleKind::Realize1, 1000, Duration::from_secs(60))),
        ("6 2-DLA realization oracle", || sweep(OracleKind::Realize2, 1000, Duration::from_secs(300))),
        ("7 dynamics closure", dynamics_closure),
        ("8 circuit compiler", || sweep(OracleKind::Circuits, 100, Duration::from_secs(120))),
        ("9 reductions", || sweep(OracleKind::Reductions, 500, Duration::from_secs(60))),
        ("10 certificate verifier", certificates),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let v = run();
        println!("{} criterion {name}: {}", if v.ok { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
