//! End-to-end acceptance run: one line per criterion, exact equality throughout.

use uq_core::bases::{check_highest_weight_set, highest_weight_set, verify_tensor_crystal};
use uq_core::cartan::Weight;
use uq_core::exec::Exec;
use uq_core::rmatrix::*;

fn w(x: &[i64]) -> Weight {
    Weight(x.to_vec())
}

struct Family {
    session: Session,
    weights: Vec<Weight>,
}

fn families() -> Vec<Family> {
    vec![
        Family { session: Session::from_type("A1").unwrap(), weights: vec![w(&[1]), w(&[2]), w(&[3])] },
        Family { session: Session::from_type("A2").unwrap(), weights: vec![w(&[1, 0]), w(&[0, 1]), w(&[1, 1])] },
        Family { session: Session::from_type("B2").unwrap(), weights: vec![w(&[1, 0]), w(&[0, 1])] },
    ]
}

fn pairs(f: &Family) -> Vec<(Weight, Weight)> {
    f.weights.iter().flat_map(|a| f.weights.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

/// Runs `check` on every item concurrently; returns the failing descriptions.
fn failures<T: Sync>(items: &[T], check: impl Fn(&T) -> Result<(), String> + Sync + Send) -> Vec<String> {
    Exec::default().map(items, |x| check(x)).into_iter().filter_map(Result::err).collect()
}

fn report(n: usize, title: &str, fails: &[String]) -> bool {
    let status = if fails.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} [{status}] {title}");
    for f in fails.iter().take(5) {
        println!("    {f}");
    }
    fails.is_empty()
}

fn ok(rep: CheckReport) -> Result<(), String> {
    if rep.pass {
        Ok(())
    } else {
        Err(format!("{}: {}", rep.name, rep.counterexamples.first().map(|c| c.input.clone()).unwrap_or_default()))
    }
}

fn main() {
    let fams = families();
    let all_pairs: Vec<(&Family, Weight, Weight)> =
        fams.iter().flat_map(|f| pairs(f).into_iter().map(move |(a, b)| (f, a, b))).collect();
    let label = |f: &Family, a: &Weight, b: &Weight| format!("{} {a}⊗{b}", f.session.cartan.label());
    let mut results = Vec::new();

    // 1
    let fails = failures(&all_pairs, |(f, a, b)| {
        let p = f.session.pair(a, b).map_err(|e| format!("{}: {e}", label(f, a, b)))?;
        ok(check_method_agreement(&p).map_err(|e| e.to_string())?).map_err(|e| format!("{}: {e}", label(f, a, b)))
    });
    results.push(report(1, "r_theta = r_krls = r_oracle on all pairs", &fails));

    // 2
    let hex_sets: Vec<(&Family, Vec<Weight>)> = vec![(&fams[0], vec![w(&[1]), w(&[2])]), (&fams[1], vec![w(&[1, 0]), w(&[0, 1])])];
    let mut triples: Vec<(&Family, Weight, Weight, Weight)> = Vec::new();
    for (f, ws) in &hex_sets {
        for u in ws {
            for v in ws {
                for x in ws {
                    triples.push((*f, u.clone(), v.clone(), x.clone()));
                }
            }
        }
    }
    let fails = failures(&triples, |(f, u, v, x)| {
        let s = &f.session;
        let e = |e: RError| e.to_string();
        let t = Triple::new(&*s.irrep(u).map_err(e)?, &*s.irrep(v).map_err(e)?, &*s.irrep(x).map_err(e)?, s.convention().map_err(e)?)
            .map_err(e)?;
        ok(check_hexagon(&t, Fault::None).map_err(e)?).map_err(|m| format!("{} ({u},{v},{x}): {m}", s.cartan.label()))
    });
    results.push(report(2, "hexagon equalities on all triples", &fails));

    // 3
    let ybe = [(&fams[0], w(&[1])), (&fams[0], w(&[2])), (&fams[1], w(&[1, 0])), (&fams[2], w(&[0, 1]))];
    let fails = failures(&ybe, |(f, v)| {
        let e = |e: RError| e.to_string();
        let p = f.session.pair(v, v).map_err(e)?;
        ok(check_ybe(&p.v, &p.product, Fault::None).map_err(e)?).map_err(|m| format!("{} {v}: {m}", f.session.cartan.label()))
    });
    results.push(report(3, "Yang-Baxter on V⊗V⊗V", &fails));

    // 4
    let irreps: Vec<(&Family, Weight)> = fams.iter().flat_map(|f| f.weights.iter().map(move |x| (f, x.clone()))).collect();
    let mut fails = failures(&irreps, |(f, v)| {
        let e = |e: RError| e.to_string();
        ok(check_operator_identities(&*f.session.irrep(v).map_err(e)?).map_err(e)?)
            .map_err(|m| format!("{} {v}: {m}", f.session.cartan.label()))
    });
    fails.extend(failures(&all_pairs, |(f, a, b)| {
        let e = |e: RError| e.to_string();
        ok(check_pair_identities(&*f.session.pair(a, b).map_err(e)?).map_err(e)?).map_err(|m| format!("{}: {m}", label(f, a, b)))
    }));
    results.push(report(4, "Γ/Θ/J/T_w0 identities, Θ∘Θ = 1, Γ-lemma", &fails));

    // 5
    let fails = failures(&all_pairs, |(f, a, b)| {
        let e = |e: RError| e.to_string();
        let p = f.session.pair(a, b).map_err(e)?;
        let r = p.r_theta().map_err(e)?;
        ok(check_normalization(&p, &r.matrix).map_err(e)?).map_err(|m| format!("{}: {m}", label(f, a, b)))
    });
    results.push(report(5, "R(b_λ⊗c) = q^(λ,wt c) b_λ⊗c", &fails));

    // 6
    let fails = failures(&all_pairs, |(f, a, b)| {
        let e = |e: RError| e.to_string();
        let p = f.session.pair(a, b).map_err(e)?;
        ok(check_scaling_independence(&p, f.session.convention().map_err(e)?).map_err(e)?)
            .map_err(|m| format!("{}: {m}", label(f, a, b)))
    });
    results.push(report(6, "r_theta invariant under hw rescaling, Θ scales by z/z̄", &fails));

    // 7
    let mut fails = failures(&irreps, |(f, v)| {
        let irrep = f.session.irrep(v).map_err(|e| e.to_string())?;
        irrep.basis.certify(&irrep.module).map_err(|e| format!("{} {v}: {e}", f.session.cartan.label()))?;
        if f.session.cartan.label() == "A1" {
            for (k, g) in irrep.basis.elements.iter().enumerate() {
                if *g != irrep.module.f_divided(0, k as u32).apply(irrep.hw()) {
                    return Err(format!("A1 {v}: element {k} is not F^({k}) hw"));
                }
            }
        }
        Ok(())
    });
    fails.extend(failures(&irreps, |(f, v)| {
        // recomputed from a rescaled pin, the basis scales by the same factor
        let irrep = f.session.irrep(v).map_err(|e| e.to_string())?;
        let order = irrep.module.order();
        let z = uq_core::qscalar::FieldElement::from_int(2, order) - uq_core::qscalar::FieldElement::q_int(-1, order);
        let scaled = Irrep::with_hw(irrep.module.clone(), &irrep.hw().scale(&z)).map_err(|e| e.to_string())?;
        if scaled.basis.elements.iter().zip(&irrep.basis.elements).all(|(a, b)| *a == b.scale(&z)) {
            Ok(())
        } else {
            Err(format!("{} {v}: rescaled pin does not rescale the basis", f.session.cartan.label()))
        }
    }));
    results.push(report(7, "global bases certified; A1 equals divided powers", &fails));

    // 8
    let fails = failures(&all_pairs, |(f, a, b)| {
        let e = |e: RError| e.to_string();
        let p = f.session.pair(a, b).map_err(e)?;
        let conv = f.session.convention().map_err(e)?;
        verify_tensor_crystal(&p.v.module, &p.v.basis, &p.w.module, &p.w.basis, &p.product.module, conv)
            .map_err(|x| format!("{}: {x}", label(f, a, b)))?;
        for (nu, mult) in p.product.module.decomposition().map_err(|x| x.to_string())?.multiplicities() {
            let set = highest_weight_set(a, &p.w.basis.crystal, &nu, conv);
            if set.len() != mult {
                return Err(format!("{}: |S^{nu}| = {} but multiplicity {mult}", label(f, a, b), set.len()));
            }
            check_highest_weight_set(&p.product.module, p.v.hw(), &p.w.basis, p.w.module.dim(), &nu, &set)
                .map_err(|x| format!("{}: {x}", label(f, a, b)))?;
        }
        Ok(())
    });
    results.push(report(8, "tensor crystal matches Kashiwara residues; |S^ν| = multiplicity", &fails));

    // 9
    let mut fails = failures(&irreps, |(f, v)| {
        let irrep = f.session.irrep(v).map_err(|e| e.to_string())?;
        irrep.module.check_relations().map_err(|e| format!("{} {v}: {e}", f.session.cartan.label()))?;
        let b = irrep.based();
        let (tb, tt) = (b.tw0_braid().map_err(|e| e.to_string())?, b.tw0_transport().map_err(|e| e.to_string())?);
        if tb.matrix != tt.matrix {
            return Err(format!("{} {v}: T_w0 braid product differs from transport", f.session.cartan.label()));
        }
        Ok(())
    });
    fails.extend(failures(&all_pairs, |(f, a, b)| {
        let p = f.session.pair(a, b).map_err(|e| e.to_string())?;
        p.product.module.check_relations().map_err(|e| format!("{}: {e}", label(f, a, b)))
    }));
    results.push(report(9, "module relations; T_w0 braid product = transport", &fails));

    // 10
    let mut fails = Vec::new();
    {
        let s = &fams[0].session;
        let p = s.pair(&w(&[1]), &w(&[1])).unwrap();
        let v = s.irrep(&w(&[1])).unwrap();
        let t = Triple::new(&v, &v, &v, s.convention().unwrap()).unwrap();
        let hex = check_hexagon(&t, Fault::ScaleBlock).unwrap();
        if hex.pass || hex.counterexamples.is_empty() {
            fails.push("scaled isotypic block not detected by the hexagon".to_string());
        }
        let ybe = check_ybe(&v, &p.product, Fault::WrongFlip).unwrap();
        if ybe.pass || ybe.counterexamples.is_empty() {
            fails.push("wrong Flip side not detected".to_string());
        }
        let oracle = p.r_oracle().unwrap().matrix;
        let vb = p.v.based();
        let flipped = vb.theta_flipped().unwrap().inverse().unwrap().kron(&p.w.based().theta_flipped().unwrap().inverse().unwrap());
        let flipped = flipped.unwrap().compose(&p.product.theta_flipped().unwrap()).matrix;
        let rep = compare("theta sign", &flipped, &oracle);
        if rep.pass || rep.counterexamples.is_empty() {
            fails.push("sign-flipped Θ exponent not detected".to_string());
        }
    }
    results.push(report(10, "negative controls detected with counterexamples", &fails));

    let passed = results.iter().filter(|x| **x).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
