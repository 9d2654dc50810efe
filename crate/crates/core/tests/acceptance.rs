//! Acceptance run: one verdict line per criterion. Expected values come from the
//! example files, counting arguments or hand-built oracles in this file.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::Zero;
use orbigentle::coeffs::{rat, Rational};
use orbigentle::curved::{CurvedStructure, DeformationParams};
use orbigentle::gentle::{Basis, Gentle, Path};
use orbigentle::grading::GradingData;
use orbigentle::hochschild::{arc_lambda, ArcSide, HhContext, HhError, NamedClass, ORDER};
use orbigentle::orbigon::compare_census;
use orbigentle::surface::{CombinatorialMap, SurfaceError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

// ---- 1: torus quiver ----

/// One arrow per consecutive pair in a rotation list, read straight from the JSON.
struct RawArrow {
    point: String,
    index: usize,
    valence: usize,
    tail: String,
    head: String,
    degree: u8,
}

fn raw_arrows(raw: &serde_json::Value) -> Vec<RawArrow> {
    let mut out = Vec::new();
    for (point, ends) in raw["rotation"].as_object().unwrap() {
        let ends: Vec<(&str, &str)> =
            ends.as_array().unwrap().iter().map(|e| e.as_str().unwrap().rsplit_once('.').unwrap()).collect();
        let v = ends.len();
        for i in 0..v {
            let (a, ea) = ends[i];
            let (b, eb) = ends[(i + 1) % v];
            out.push(RawArrow {
                point: point.clone(),
                index: i,
                valence: v,
                tail: a.to_string(),
                head: b.to_string(),
                degree: u8::from(ea != eb),
            });
        }
    }
    out
}

fn criterion_1() -> Verdict {
    let raw = common::raw("torus");
    let g = common::gentle("torus");
    let map = g.map();
    let arrows = raw_arrows(&raw);
    check(map.arc_count() == 4, || format!("{} quiver vertices", map.arc_count()))?;
    check(arrows.len() == 8 && map.dart_count() == 8, || format!("{} arrows", map.dart_count()))?;
    check(arrows.iter().all(|a| a.degree == 1), || "oracle degree != 1".into())?;
    check(g.arrows().iter().all(|a| a.degree == 1), || "library degree != 1".into())?;
    check(map.faces().len() == 2 && map.faces().iter().all(|f| f.size() == 4), || "faces are not two squares".into())?;

    // library arrow for each raw arrow, matched by point and arc names
    let lib: Vec<Path> = arrows
        .iter()
        .map(|r| {
            let a = g
                .arrows()
                .into_iter()
                .find(|a| {
                    map.point_name(a.point) == r.point
                        && map.arc_name(a.tail_arc) == r.tail
                        && map.arc_name(a.head_arc) == r.head
                })
                .expect("raw arrow present in library");
            g.arrow(a.dart)
        })
        .collect();

    // mixed products of composable arrows (different marked points) vanish
    let mut mixed = 0;
    for (i, x) in arrows.iter().enumerate() {
        for (j, y) in arrows.iter().enumerate() {
            if x.head == y.tail && x.point != y.point {
                mixed += 1;
                check(g.compose_paths(&lib[j], &lib[i]).is_none(), || format!("mixed product {i},{j} nonzero"))?;
            }
        }
    }
    check(mixed > 0, || "no mixed composable pairs".into())?;

    // every quiver walk up to length 8: nonzero iff it keeps turning around one point
    let mut walks = 0;
    let mut nonzero = 0;
    let mut stack: Vec<Vec<usize>> = (0..arrows.len()).map(|i| vec![i]).collect();
    while let Some(w) = stack.pop() {
        walks += 1;
        let oracle_nonzero = w.windows(2).all(|p| {
            let (x, y) = (&arrows[p[0]], &arrows[p[1]]);
            x.point == y.point && (x.index + 1) % x.valence == y.index
        });
        let mut acc = Some(lib[w[0]]);
        for &k in &w[1..] {
            acc = acc.and_then(|a| g.compose_paths(&lib[k], &a));
        }
        check(acc.is_some() == oracle_nonzero, || format!("walk {w:?} disagrees"))?;
        if oracle_nonzero {
            nonzero += 1;
            check(w.iter().all(|&k| arrows[k].point == arrows[w[0]].point), || "impure nonzero path".into())?;
        }
        if w.len() < 8 {
            let last = &arrows[*w.last().unwrap()];
            for (k, y) in arrows.iter().enumerate() {
                if y.tail == last.head {
                    let mut next = w.clone();
                    next.push(k);
                    stack.push(next);
                }
            }
        }
    }
    check(nonzero == 8 * 8, || format!("{nonzero} nonzero walks, expected 64"))?;
    Ok(format!("4 vertices, 8 arrows of degree 1, 2 squares; {mixed} mixed products zero; {walks} walks checked"))
}

// ---- 2: gentle pattern ----

fn gentle_pattern(g: &Gentle) -> Result<(), String> {
    let map = g.map();
    let arrows = g.arrows();
    check(arrows.len() == 2 * map.arc_count(), || format!("{} arrows for {} arcs", arrows.len(), map.arc_count()))?;
    for x in &arrows {
        let px = g.arrow(x.dart);
        let mut after = (0, 0);
        let mut before = (0, 0);
        for y in &arrows {
            let py = g.arrow(y.dart);
            if y.tail_arc == x.head_arc {
                if g.compose_paths(&py, &px).is_some() {
                    after.0 += 1;
                } else {
                    after.1 += 1;
                }
            }
            if y.head_arc == x.tail_arc {
                if g.compose_paths(&px, &py).is_some() {
                    before.0 += 1;
                } else {
                    before.1 += 1;
                }
            }
        }
        check(after == (1, 1) && before == (1, 1), || format!("arrow {} has pattern {after:?}/{before:?}", g.render_path(&px)))?;
    }
    Ok(())
}

fn criterion_2() -> Verdict {
    for name in ["tetra", "torus"] {
        gentle_pattern(&common::gentle(name)).map_err(|e| format!("{name}: {e}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut accepted = 0;
    let mut rejected = 0;
    while accepted < 50 {
        let points = rng.gen_range(2..=5);
        let extra = rng.gen_range(1..=4);
        let file = common::random_surface_file(&mut rng, points, extra);
        match CombinatorialMap::from_file(&file) {
            Ok(m) => {
                gentle_pattern(&Gentle::new(std::sync::Arc::new(m))).map_err(|e| format!("random system {accepted}: {e}"))?;
                accepted += 1;
            }
            Err(SurfaceError::GenusConstraint(_)) => rejected += 1,
            Err(e) => return Err(format!("generator produced an invalid file: {e}")),
        }
    }
    Ok(format!("2 examples and {accepted} random systems ({rejected} resampled for the genus constraint)"))
}

// ---- 3: center ----

fn criterion_3() -> Verdict {
    let mut parts = Vec::new();
    for name in ["torus", "tetra"] {
        let g = common::gentle(name);
        let map = g.map();
        let bound = 2 * map.max_valence();
        // 1 and ℓ_m^j for j·val(m) ≤ bound
        let expected = 1 + (0..map.point_count()).map(|m| bound / map.valence(m)).sum::<usize>();
        let cert = g.center_certificate(bound as u32);
        check(cert.holds() && cert.central_dim == expected, || {
            format!("{name}: central dim {} vs expected {expected}, certificate {cert:?}", cert.central_dim)
        })?;
        parts.push(format!("{name} dim {expected}"));
    }
    Ok(parts.join(", "))
}

// ---- 4: census ----

fn criterion_4() -> Verdict {
    let g = common::gentle("tetra");
    let c = compare_census(&g, 5, 2).map_err(|e| e.to_string())?;
    check(c.censuses_agree(), || format!("only in oracle {:?}, only in engine {:?}", c.only_in_oracle, c.only_in_engine))?;
    check(c.identities_hold(), || format!("token {:?}, euler {:?}", c.token_failures, c.euler_failures))?;
    let summary = format!("oracle {} = engine {} over {} patterns", c.oracle_size, c.engine_size, c.patterns_checked);
    check(c.short_sequences.is_empty(), || {
        format!("{summary}, identities hold, but {} reduced sequences of length < 3, e.g. {}", c.short_sequences.len(), c.short_sequences[0])
    })?;
    Ok(summary)
}

// ---- 5: axioms at desk scale ----

fn criterion_5() -> Verdict {
    let g = common::gentle("tetra");
    let params = DeformationParams::generic(g.map(), 2, 2);
    let s = CurvedStructure::new(g, params, 6, 12).map_err(|e| e.to_string())?;
    let r = s.verify_axioms(6, 6).map_err(|e| e.to_string())?;
    check(r.holds(), || {
        format!(
            "{} residuals, {} reduction mismatches, {} errors; first {:?}",
            r.violations.len(),
            r.reduction_mismatches.len(),
            r.errors.len(),
            r.violations.first()
        )
    })?;
    check(r.tuples_checked > 0 && !r.curvature.is_empty() && r.curvature != "0", || "curvature missing".into())?;
    Ok(format!("zero residual and r = 0 reduction on {} tuples", r.tuples_checked))
}

// ---- 6: cocycles and the face-sum gate ----

fn face_sums_vanish(map: &CombinatorialMap, lambda: &[Rational]) -> bool {
    map.faces().iter().all(|f| f.corners.iter().map(|&c| lambda[c].clone()).sum::<Rational>().is_zero())
}

fn criterion_6() -> Verdict {
    let ctx = HhContext::new(common::gentle("tetra"), 6).map_err(|e| e.to_string())?;
    let map = ctx.map();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cochains = vec![ctx.unit_class()];
    for m in 0..map.point_count() as u32 {
        for j in 1..=2 {
            cochains.push(ctx.odd_class((m, j)).map_err(|e| e.to_string())?);
        }
    }
    for a in 0..map.arc_count() {
        cochains.push(ctx.arc_class(a).map_err(|e| e.to_string())?);
    }
    // a random admissible λ: integer combination of single-arc λs
    let mut lambda = vec![Rational::zero(); map.dart_count()];
    for a in 0..map.arc_count() {
        let c = rat(rng.gen_range(-3..=3));
        for (x, y) in lambda.iter_mut().zip(arc_lambda(map, a, ArcSide::Left)) {
            *x += y * &c;
        }
    }
    cochains.push(ctx.build_named_class(&NamedClass::Arc(lambda)).map_err(|e| format!("admissible λ rejected: {e}"))?);
    let mut tuples = 0;
    for c in &cochains {
        let r = ctx.cocycle_check(c, 4, 4).map_err(|e| e.to_string())?;
        tuples = r.tuples_checked;
        check(r.holds(), || format!("{}: {} failures, e.g. {}", r.cochain, r.failures.len(), r.failures[0]))?;
    }
    let mut rejected = 0;
    while rejected < 20 {
        let lambda: Vec<Rational> = (0..map.dart_count()).map(|_| rat(rng.gen_range(-3..=3))).collect();
        if face_sums_vanish(map, &lambda) {
            continue;
        }
        match ctx.build_named_class(&NamedClass::Arc(lambda)) {
            Err(HhError::FaceSum { .. }) => rejected += 1,
            other => return Err(format!("invalid λ not rejected: {other:?}")),
        }
    }
    Ok(format!("{} cochains closed on {tuples} tuples (arity <= 4, length <= 4); {rejected} invalid λ rejected", cochains.len()))
}

// ---- 7: bases and arc classes ----

fn criterion_7() -> Verdict {
    let ctx = HhContext::new(common::gentle("tetra"), 6).map_err(|e| e.to_string())?;
    let map = ctx.map();
    let e = |x: HhError| x.to_string();
    let n = map.point_count();
    let genus = map.genus() as usize;
    let arc_dim = n + 2 * genus - 1;
    let odd = ctx.odd_basis(2).map_err(e)?;
    let even = ctx.even_basis(2).map_err(e)?;
    let classify = |cs: &[orbigentle::hochschild::Cochain]| -> Result<Vec<_>, String> {
        cs.iter().map(|c| ctx.classify(c, 2).map_err(|x| x.to_string())).collect()
    };
    let odd_rank = HhContext::descriptor_rank(&classify(&odd)?);
    let even_rank = HhContext::descriptor_rank(&classify(&even)?);
    check(odd.len() == 1 + 2 * n && odd_rank == odd.len(), || format!("odd size {} rank {odd_rank}", odd.len()))?;
    check(even.len() == 2 * n + arc_dim && even_rank == even.len(), || format!("even size {} rank {even_rank}", even.len()))?;

    let arcs = ctx.arc_class_space().map_err(e)?;
    check(arcs.dim_quotient == arc_dim, || format!("arc-class dimension {}", arcs.dim_quotient))?;
    check(arcs.lemma_statement_discrepancy, || "statement discrepancy not flagged".into())?;

    for a in 0..map.arc_count() {
        let left = ctx.classify(&ctx.arc_class(a).map_err(e)?, 2).map_err(e)?;
        let right_class = ctx.build_named_class(&NamedClass::Arc(arc_lambda(map, a, ArcSide::Right))).map_err(e)?;
        let right = ctx.classify(&right_class, 2).map_err(e)?;
        check(left == right, || format!("left and right differ on {}", map.arc_name(a)))?;
    }
    // Σ ±ν_a around each face, negative where the face lies right of the arc
    for (f, face) in map.faces().iter().enumerate() {
        let mut parts = Vec::new();
        for &c in &face.corners {
            let a = CombinatorialMap::arc_of(map.succ(c));
            let sign = if map.right_face(a) == f { rat(-1) } else { rat(1) };
            parts.push((sign, ctx.arc_class(a).map_err(e)?));
        }
        let sum = ctx.classify(&ctx.linear(&parts).map_err(e)?, 2).map_err(e)?;
        check(sum.is_zero(), || format!("face {f} sum {}", sum.render(map)))?;
    }
    Ok(format!(
        "odd {} and even {} independent; arc classes {} (stated form {} flagged); left = right; face sums vanish",
        odd.len(),
        even.len(),
        arcs.dim_quotient,
        arcs.lemma_statement_value
    ))
}

// ---- 8: tables ----

fn criterion_8() -> Verdict {
    let ctx = HhContext::new(common::gentle("tetra"), 6).map_err(|e| e.to_string())?;
    let r = ctx.verify_tables(3).map_err(|e| e.to_string())?;
    check(r.lines.len() == 11, || format!("{} table lines", r.lines.len()))?;
    let turn = r.cup3_readings.iter().filter(|c| c.observed.as_deref() == Some(c.turn_value.as_str())).count();
    let winding =
        r.cup3_readings.iter().filter(|c| c.observed.as_deref() == Some(c.winding_times_turn_value.as_str())).count();
    let lines: Vec<String> = r.lines.iter().map(|l| format!("{} {}/{}", l.line, l.matching, l.instances)).collect();
    let summary = format!(
        "{}; cup3 scalar matches turn reading {turn}/{n}, winding reading {winding}/{n}",
        lines.join(", "),
        n = r.cup3_readings.len()
    );
    check(r.holds(), || format!("{summary}; {}", r.discrepancies.join("; ")))?;
    Ok(summary)
}

// ---- 9: arc choice ----

fn criterion_9() -> Verdict {
    let ctx = HhContext::new(common::gentle("tetra"), 6).map_err(|e| e.to_string())?;
    let raw = common::raw("tetra");
    let entries = ctx.arc_choice_independence(2).map_err(|e| e.to_string())?;
    check(entries.len() == 4 * 2, || format!("{} entries", entries.len()))?;
    for entry in &entries {
        let valence = raw["rotation"][&entry.point].as_array().unwrap().len();
        check(entry.descriptors.len() == valence && entry.agree, || format!("{entry:?}"))?;
    }
    Ok(format!("{} (point, winding) pairs, 3 arcs each, all agree", entries.len()))
}

// ---- 10: gradings ----

fn criterion_10() -> Verdict {
    let mut parts = Vec::new();
    for name in ["torus", "tetra"] {
        let map = common::map(name);
        let r = GradingData::new(&map).report(&map);
        // χ(S, M) = V − E + F − n from the cell counts
        let chi = map.point_count() as i64 - map.arc_count() as i64 + map.faces().len() as i64 - map.point_count() as i64;
        check(r.pi_iota_zero && r.pi_corank_one && r.iota_kernel_is_diagonal, || format!("{name}: {r:?}"))?;
        check(r.face_lift_sums_ok, || format!("{name}: face lift sums"))?;
        check(r.sum_deg_ell.abs() == 2 * chi.abs() && 2 * chi.abs() == 4, || format!("{name}: sum {}", r.sum_deg_ell))?;
        check(r.lemma_sign_discrepancy == (r.sum_deg_ell != r.lemma_sign_value), || format!("{name}: flag"))?;
        check(r.lemma_sign_discrepancy, || format!("{name}: sign discrepancy not flagged"))?;
        parts.push(format!("{name} sum deg l = {} vs stated {}", r.sum_deg_ell, r.lemma_sign_value));
    }
    Ok(format!("all identities hold; sign flagged ({})", parts.join(", ")))
}

// ---- 11: dual ----

fn criterion_11() -> Verdict {
    let map = common::map("tetra");
    let (dual, r) = map.dual_report();
    let reparsed = CombinatorialMap::parse(&dual.to_json()).map_err(|e| format!("dual file invalid: {e}"))?;
    check(reparsed.genus() == 0 && reparsed.point_count() == 4 && reparsed.arc_count() == 6, || format!("{:?}", r.dual))?;
    let deg_one = |m: &CombinatorialMap| (0..m.dart_count()).filter(|&d| m.corner_degree(d) == 1).count();
    check(deg_one(&dual) == map.dart_count() - deg_one(&map), || "degree counts not complementary".into())?;
    check(r.degrees_complementary && r.double_dual_matches, || format!("{r:?}"))?;
    Ok("dual is genus 0 with 4 points and 6 arcs; degrees 1 - |a|; double dual matches".into())
}

// ---- 12: gauge ----

fn criterion_12() -> Verdict {
    let ctx = HhContext::new(common::gentle("tetra"), 6).map_err(|e| e.to_string())?;
    let g = ctx.gentle();
    let max_len = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    // κ¹(p) = c·ℓ^j·p, so ν = dκ has no arity 0 or 1 part
    let mut entries = HashMap::new();
    for p in g.paths_up_to(max_len) {
        let c: i64 = rng.gen_range(-2..=2);
        let j: u32 = rng.gen_range(0..=1);
        if c != 0 {
            let q = Path { len: p.len + j * g.valence(p.point), ..p };
            entries.insert(vec![Basis::Path(p)], g.path(q, ORDER).scale_rat(&rat(c)));
        }
    }
    let kappa = ctx.table(0, "kappa", entries, max_len);
    let nu = ctx.differential(&kappa);
    let eps = ctx.gauge_step(&nu, max_len).map_err(|e| e.to_string())?;
    let r = ctx.gauge_report(&nu, &eps, max_len).map_err(|e| e.to_string())?;
    check(r.pairs_nonzero_product > 0 && r.polygons > 0 && r.triples > 0, || format!("vacuous: {r:?}"))?;
    check(r.holds() && r.chained_failures.is_empty(), || format!("{r:?}"))?;
    Ok(format!(
        "{} pairs ({} arc-chained), {} polygons, {} triples, all consistent",
        r.pairs_nonzero_product, r.pairs_chained, r.polygons, r.triples
    ))
}

fn main() {
    let criteria: [(u32, fn() -> Verdict, Duration); 12] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(5)),
        (3, criterion_3, Duration::from_secs(5)),
        (4, criterion_4, Duration::from_secs(120)),
        (5, criterion_5, Duration::from_secs(600)),
        (6, criterion_6, Duration::from_secs(60)),
        (7, criterion_7, Duration::from_secs(60)),
        (8, criterion_8, Duration::from_secs(300)),
        (9, criterion_9, Duration::from_secs(60)),
        (10, criterion_10, Duration::from_secs(1)),
        (11, criterion_11, Duration::from_secs(1)),
        (12, criterion_12, Duration::from_secs(60)),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = BTreeMap::new();
    for (n, run, budget) in criteria {
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let verdict = verdict.and_then(|d| {
            if elapsed > budget {
                Err(format!("{d}; over the {budget:?} budget"))
            } else {
                Ok(d)
            }
        });
        match &verdict {
            Ok(detail) => println!("criterion {n}: PASS ({elapsed:.2?}) {detail}"),
            Err(detail) => {
                println!("criterion {n}: FAIL ({elapsed:.2?}) {detail}");
                failed.insert(n, detail.clone());
            }
        }
    }
    if !failed.is_empty() {
        let list: Vec<String> = failed.keys().map(u32::to_string).collect();
        println!("failed criteria: {}", list.join(", "));
        std::process::exit(1);
    }
}
