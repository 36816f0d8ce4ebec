//! One function per task kind. Each returns checks plus kind-specific data;
//! precondition and schema failures come back as errors.

use cartan_core::chmod::{check_ch_relations, check_mod_epsilon, package_cone, PackageModule};
use cartan_core::coeff::{q, Coefficients, Q, Ring, Scalar};
use cartan_core::conn::matrix::{named_directions, LMat, MatrixConnection};
use cartan_core::conn::primitive::primitive_check;
use cartan_core::conn::stamp_of;
use cartan_core::graded::{koszul_suite, Lin};
use cartan_core::hoch::suite::{identity_suite, SuiteConfig};
use cartan_core::hoch::{a2, ainf_check, assemble_hochschild_ch, kx2, kx2_gapped_gamma, trivial, Category, CategorySpec, Cochain, Elem, Hoch, HochPackage, Mutation, Window};
use cartan_core::homol::{cyclic_homology, Order, Variant};
use cartan_core::models::{
    calculus_to_ch, dubrovin, exterior_calculus, hochschild_connection_report, hochschild_renaming_cohomology, hochschild_renaming_report, hypercom_gate,
    hypercom_to_ch, qh_p1, Dubrovin, HypercomData, ModelError, RenamingSpec,
};
use cartan_core::report::{Check, Report};
use serde_json::{json, Value};

use crate::task::{pre, schema, Params, Task, TaskError};

pub struct Output {
    pub report: Report,
    pub data: Value,
}

fn model_err(e: ModelError) -> TaskError {
    match e {
        ModelError::Schema(s) => schema(s),
        other => pre(other),
    }
}

pub const CATEGORIES: [&str; 3] = ["kx2", "a2", "trivial"];
pub const HYPERCOMS: [&str; 1] = ["qh-p1"];
pub const CALCULI: [&str; 1] = ["exterior"];

fn category(inputs: &Value, ring: &Ring) -> Result<Category, TaskError> {
    match inputs.get("category") {
        None => Err(schema("inputs.category is required by this task")),
        Some(Value::String(s)) => match s.as_str() {
            "kx2" => Ok(kx2(ring)),
            "a2" => Ok(a2(ring)),
            "trivial" => Ok(trivial(ring)),
            other => Err(schema(format!("inputs.category: unknown fixture `{other}`; shipped: {}", CATEGORIES.join(", ")))),
        },
        Some(v) => {
            let spec: CategorySpec = serde_json::from_value(v.clone()).map_err(|e| schema(format!("inputs.category: {e}")))?;
            Category::from_spec(&spec, ring).map_err(|e| schema(format!("inputs.category: {e}")))
        }
    }
}

fn hypercom(inputs: &Value, ring: &Ring) -> Result<HypercomData, TaskError> {
    let fixture = |name: &str, a: Q, bound: usize| match name {
        "qh-p1" => Ok(qh_p1(a, bound)),
        other => Err(schema(format!("inputs.hypercom: unknown fixture `{other}`; shipped: {}", HYPERCOMS.join(", ")))),
    };
    match inputs.get("hypercom") {
        None => Err(schema("inputs.hypercom is required by this task")),
        Some(Value::String(s)) => fixture(s, q(1), 5),
        Some(v) if v.get("fixture").is_some() => {
            let p = Params(v);
            let a = p.str("line_energy", "1")?.parse::<Q>().map_err(|_| schema("inputs.hypercom.line_energy: not a rational"))?;
            fixture(p.str("fixture", "")?, a, p.usize("arity_bound", 5)?)
        }
        Some(v) => {
            let spec = serde_json::from_value(v.clone()).map_err(|e| schema(format!("inputs.hypercom: {e}")))?;
            HypercomData::from_spec(&spec, ring).map_err(model_err)
        }
    }
}

fn dubrovin_of(inputs: &Value, ring: &Ring) -> Result<Dubrovin, TaskError> {
    dubrovin(&hypercom(inputs, ring)?, ring).map_err(model_err)
}

/// "gapped" for the shipped k[x]/(x²) element, or [{inputs, output, coeff}] by generator name.
fn gamma(p: &Params, cat: &Category, ring: &Ring) -> Result<Cochain, TaskError> {
    match p.0.get("gamma") {
        None | Some(Value::Null) => Ok(Lin::zero()),
        Some(Value::String(s)) if s == "gapped" => {
            if cat.name != "kx2" {
                return Err(pre("the gapped element is defined on kx2 only"));
            }
            if ring.tvars.len() != 1 {
                return Err(pre("the gapped element needs exactly one t-variable of degree 0"));
            }
            Ok(kx2_gapped_gamma(ring))
        }
        Some(Value::Array(es)) => {
            let gen = |n: &str| cat.gens.iter().position(|g| g.name == n).ok_or_else(|| schema(format!("params.gamma: unknown generator `{n}`")));
            let mut out = Lin::zero();
            for e in es {
                let names = |k: &str| -> Result<Vec<String>, TaskError> {
                    let a = e.get(k).ok_or_else(|| schema(format!("params.gamma: missing `{k}`")))?;
                    match a {
                        Value::String(s) => Ok(vec![s.clone()]),
                        Value::Array(v) => v.iter().map(|x| x.as_str().map(String::from).ok_or_else(|| schema("params.gamma: names are strings"))).collect(),
                        _ => Err(schema(format!("params.gamma: bad `{k}`"))),
                    }
                };
                let inputs = names("inputs")?.iter().map(|n| gen(n)).collect::<Result<Vec<_>, _>>()?;
                let output = gen(names("output")?.first().ok_or_else(|| schema("params.gamma: empty output"))?)?;
                let c = e.get("coeff").and_then(Value::as_str).ok_or_else(|| schema("params.gamma: missing coeff"))?;
                let c = Scalar::parse(c, ring).map_err(|e| schema(format!("params.gamma: {e}")))?;
                out.add_term(Elem { inputs, output }, c);
            }
            Ok(out.truncate(ring))
        }
        Some(_) => Err(schema("params.gamma: expected \"gapped\" or a list of terms")),
    }
}

fn structure_ok(cat: &Category, ring: &Ring) -> Result<(), TaskError> {
    let rep = ainf_check(cat, ring);
    match rep.checks.iter().find(|c| !c.passed()) {
        Some(c) => Err(pre(format!("{} is not a strictly unital A-infinity category: {} fails", cat.name, c.name))),
        None => Ok(()),
    }
}

fn order_of(s: &str) -> Order {
    if s == "reverse" {
        Order::Reverse
    } else {
        Order::Forward
    }
}

fn lit(c: &Scalar, ring: &Ring) -> String {
    c.to_literal(ring)
}

/// Row-major literals of z^{-pole}m, each entry valid below z^{z_order}, hence
/// kept in m below z^{z_order + pole}.
fn matrix_json(m: &LMat, base: &Ring) -> Value {
    let mut p = base.policy.clone();
    p.z_order += m.pole;
    let rows: Vec<Vec<String>> = m.m.iter().map(|r| r.iter().map(|c| lit(&c.truncate(&p), base)).collect()).collect();
    json!({ "pole": m.pole, "rows": rows })
}

fn operators_json(mc: &MatrixConnection, base: &Ring) -> Value {
    let ops: Vec<Value> = mc
        .operators(&named_directions(&mc.ring, mc.dz.is_some()))
        .iter()
        .map(|o| {
            let mut v = matrix_json(&o.op, base);
            v["direction"] = json!(o.direction);
            v
        })
        .collect();
    json!({ "basis": mc.names, "degrees": mc.degrees, "operators": ops, "stamp": stamp_of(base) })
}

fn verify_identities(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    let p = Params(&t.params);
    let seed = t.seed.unwrap_or(0);
    match p.choice("suite", "hochschild", &["hochschild", "koszul"])? {
        "koszul" => {
            let mut report = Report::new();
            report.push(koszul_suite(seed, p.usize("trials", 100)?, p.usize("max_k", 5)?));
            Ok(Output { report, data: json!({}) })
        }
        _ => {
            let cat = category(inputs, ring)?;
            structure_ok(&cat, ring)?;
            let cfg = SuiteConfig {
                trials: p.usize("trials", 50)?,
                seed,
                window: Window { word_bound: p.usize("word_bound", 4)?, arity_bound: p.usize("arity_bound", 3)? },
            };
            let mut h = Hoch::new(cat);
            match p.choice("mutation", "none", &["none", "lie-wrap-sign"])? {
                "none" => {}
                _ => h = h.with_mutation(Mutation::LieWrapSign),
            }
            let report = identity_suite(&h, &cfg, ring);
            let counts: serde_json::Map<String, Value> =
                report.checks.iter().map(|c| (c.name.clone(), json!({ "zero_residuals": c.zero_count(), "nonzero_residuals": c.failed }))).collect();
            Ok(Output { report, data: json!({ "trials": cfg.trials, "per_identity": counts }) })
        }
    }
}

fn ch_check(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    let p = Params(&t.params);
    let wb = p.usize("word_bound", 4)?;
    let ab = p.usize("arity_bound", 3)?;
    let gate_wb = p.usize("gate_word_bound", 3)?;
    let mut report = Report::new();
    match p.choice("target", "hochschild", &["hochschild", "hypercom", "calculus"])? {
        "hochschild" => {
            let cat = category(inputs, ring)?;
            let h = Hoch::new(cat);
            assemble_hochschild_ch(&h, Window { word_bound: wb, arity_bound: ab }, ring).map_err(pre)?;
            let pkg = HochPackage(&h);
            let ys = h.cat.elem_basis(ab, true);
            let ms = h.cat.chain_basis(wb, true);
            report.extend(check_ch_relations(&pkg, &ys, &ms, ring));
            let gys = h.cat.elem_basis(ab.min(2), true);
            let gms = h.cat.chain_basis(gate_wb, true);
            report.push(check_mod_epsilon(&package_cone(&pkg), &PackageModule(pkg), &gys, &gms, 2, gate_wb, ring));
        }
        "hypercom" => {
            let h = hypercom(inputs, ring)?;
            let n = p.usize("n", 2)?;
            if !(1..=3).contains(&n) {
                return Err(schema("params.n: 1, 2 or 3"));
            }
            report.extend(h.validate(ring));
            let ch = hypercom_to_ch(&h, n == 3, gate_wb, ring).map_err(model_err)?;
            report.push(hypercom_gate(&ch, n, gate_wb, ring));
        }
        _ => {
            match inputs.get("calculus").and_then(Value::as_str) {
                Some("exterior") => {}
                _ => return Err(schema(format!("inputs.calculus: shipped: {}", CALCULI.join(", ")))),
            }
            let c = exterior_calculus();
            report.extend(c.axioms(ring));
            calculus_to_ch(&c, ring).map_err(model_err)?;
        }
    }
    Ok(Output { report, data: json!({}) })
}

fn connection(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    let p = Params(&t.params);
    match p.choice("model", "hochschild", &["hochschild", "dubrovin"])? {
        "dubrovin" => {
            let d = dubrovin_of(inputs, ring)?;
            let mut report = d.chain_report();
            report.extend(d.series_report());
            Ok(Output { report, data: json!({ "d_gamma_vanishes": true }) })
        }
        _ => {
            let cat = category(inputs, ring)?;
            structure_ok(&cat, ring)?;
            let g = gamma(&p, &cat, ring)?;
            let (report, live) = hochschild_connection_report(&cat, &g, p.usize("word_bound", 3)?, ring).map_err(model_err)?;
            Ok(Output { report, data: json!({ "d_gamma_vanishes": !live }) })
        }
    }
}

fn flatness(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    let p = Params(&t.params);
    let d = dubrovin_of(inputs, ring)?;
    let mc = d.matrix_connection(p.bool("c1_variant", true)?);
    let report = cartan_core::conn::matrix::flatness_report(&mc, ring);
    Ok(Output { report, data: operators_json(&mc, ring) })
}

fn cyclic(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    let p = Params(&t.params);
    let cat = category(inputs, ring)?;
    structure_ok(&cat, ring)?;
    let h = Hoch::new(cat);
    let variant = match p.choice("variant", "negative", &["negative", "periodic"])? {
        "periodic" => Variant::Periodic,
        _ => Variant::Negative,
    };
    let z = p.usize("z_order", ring.policy.z_order as usize)? as u32;
    let wb = p.usize("word_bound", 6)?;
    let orders: Vec<String> = match p.0.get("orders") {
        None => vec!["forward".into(), "reverse".into()],
        Some(Value::Array(a)) => a.iter().map(|x| x.as_str().map(String::from).ok_or_else(|| schema("params.orders: strings"))).collect::<Result<_, _>>()?,
        Some(_) => return Err(schema("params.orders: expected a list")),
    };
    if orders.is_empty() || orders.iter().any(|o| o != "forward" && o != "reverse") {
        return Err(schema("params.orders: forward and/or reverse"));
    }
    let mut runs = vec![];
    for o in &orders {
        runs.push((o.clone(), cyclic_homology(&h, variant, z, wb, order_of(o)).map_err(pre)?));
    }
    let stamp = format!("z_order {z}, word_bound {wb}, validity window {}", runs[0].1.window);
    let mut agree = Check::new("elimination-orders-agree").with_stamp(stamp.clone());
    for (o, r) in &runs[1..] {
        agree.record_bool(|| format!("{} vs {o}", runs[0].0), r.ranks == runs[0].1.ranks, || format!("{:?} vs {:?}", runs[0].1.ranks, r.ranks));
    }
    let mut report = Report::new();
    report.push(agree);
    let first = &runs[0].1;
    let ranks: serde_json::Map<String, Value> = first.ranks.iter().map(|(d, r)| (d.to_string(), json!(r))).collect();
    let data = json!({
        "variant": format!("{variant:?}").to_lowercase(),
        "ranks": ranks,
        "exact_degrees": first.exact_degrees,
        "window": first.window,
        "stamp": stamp,
    });
    Ok(Output { report, data })
}

fn primitive(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    let p = Params(&t.params);
    let d = dubrovin_of(inputs, ring)?;
    let coeffs = match p.choice("coefficients", "lambda", &["lambda", "lambda0"])? {
        "lambda0" => Coefficients::Lambda0,
        _ => Coefficients::Lambda,
    };
    let base = ring.with_coeffs(coeffs);
    let mut zeta = vec![Scalar::zero(); d.dim()];
    match p.0.get("zeta") {
        Some(Value::Object(o)) => {
            for (k, v) in o {
                let i = d.data.index(k).ok_or_else(|| schema(format!("params.zeta: unknown basis element `{k}`")))?;
                let s = v.as_str().ok_or_else(|| schema("params.zeta: coefficients are literals"))?;
                zeta[i] = Scalar::parse(s, &d.work).map_err(|e| schema(format!("params.zeta: {e}")))?;
            }
        }
        _ => return Err(schema("params.zeta: expected {basis name: literal}")),
    }
    let r = p.int("r", 0)? as i32;
    let mc = d.matrix_connection(true);
    let v = primitive_check(&mc, &zeta, r, &base);
    let residue: Vec<Vec<String>> = v.residue.iter().map(|row| row.iter().map(|c| lit(&c.truncate(&base.policy), &base)).collect()).collect();
    let euler = v.euler.as_ref().map(|e| {
        let names: Vec<String> = base.tvars.iter().map(|t| t.name.clone()).collect();
        let comps: serde_json::Map<String, Value> = names.iter().zip(&e.t).map(|(n, c)| (format!("d/d{n}"), json!(lit(c, &base)))).collect();
        Value::Object(comps)
    });
    let data = json!({
        "r": r,
        "coefficients": format!("{coeffs:?}"),
        "residue_matrix": residue,
        "residue_det": lit(&v.det, &base),
        "induced_euler_field": euler,
        "stamp": stamp_of(&base),
    });
    Ok(Output { report: v.report, data })
}

fn compatibility(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    let p = Params(&t.params);
    let cat = category(inputs, ring)?;
    structure_ok(&cat, ring)?;
    let g = gamma(&p, &cat, ring)?;
    let spec = RenamingSpec { f1_multiplier: p.int("f1_multiplier", 0)? as i128, scale_by_length: p.bool("scale_by_length", false)? };
    let (mut report, raw) = hochschild_renaming_report(&cat, &g, spec, p.usize("word_bound", 3)?, ring).map_err(model_err)?;
    let mut data = json!({ "raw_commutator_vanishes": !raw });
    if let Some(c) = t.params.get("cohomology") {
        let cp = Params(c);
        let mut pol = ring.policy.clone();
        pol.z_order = cp.usize("z_order", pol.z_order as usize)? as u32;
        pol.t_order = cp.usize("t_order", pol.t_order as usize)? as u32;
        if let Some(e) = c.get("energy_cut") {
            pol.energy_cut = e.as_str().and_then(|s| s.parse().ok()).or_else(|| e.as_i64().map(|i| q(i as i128))).ok_or_else(|| schema("params.cohomology.energy_cut"))?;
        }
        if let Some(w) = c.get("e_window") {
            let w: Vec<i64> = w.as_array().map(|a| a.iter().filter_map(Value::as_i64).collect()).unwrap_or_default();
            if w.len() != 2 {
                return Err(schema("params.cohomology.e_window: [lo, hi]"));
            }
            pol.e_window = (w[0] as i32, w[1] as i32);
        }
        let small = ring.with_policy(pol);
        let cat_s = category(inputs, &small)?;
        let g_s = gamma(&p, &cat_s, &small)?;
        let chk = hochschild_renaming_cohomology(&cat_s, &g_s, spec, cp.int("nu_max", 1)? as i32, cp.usize("max_len", 6)?, &small).map_err(model_err)?;
        data["cohomology_stamp"] = json!(chk.stamp.clone());
        report.push(chk);
    }
    Ok(Output { report, data })
}

pub fn execute(t: &Task, inputs: &Value, ring: &Ring) -> Result<Output, TaskError> {
    match t.kind.as_str() {
        "verify-identities" => verify_identities(t, inputs, ring),
        "ch-check" => ch_check(t, inputs, ring),
        "connection" => connection(t, inputs, ring),
        "flatness" => flatness(t, inputs, ring),
        "cyclic-homology" => cyclic(t, inputs, ring),
        "primitive-form" => primitive(t, inputs, ring),
        "compatibility" => compatibility(t, inputs, ring),
        other => Err(schema(format!("unknown kind `{other}`"))),
    }
}
