//! End-to-end runs of one stream file, and their reports.

use kmatch::{
    materialize, max_weight_k_matching, DynamicConfig, DynamicMatcher, Error, InsertMatcher, Matching, Op, RealWeight,
    Result, Stream, StreamFile, Weight,
};
use serde::Serialize;

use crate::seed::rng_for;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeOut {
    pub u: u32,
    pub v: u32,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Answer {
    /// `None` when no k-matching was found.
    pub matching: Option<Vec<EdgeOut>>,
    pub weight: Option<f64>,
}

impl Answer {
    pub fn from_matching<W: Weight>(m: Option<&Matching<W>>) -> Self {
        Answer {
            matching: m.map(|m| {
                m.edges()
                    .iter()
                    .map(|e| EdgeOut {
                        u: e.u(),
                        v: e.v(),
                        w: e.weight().to_f64(),
                    })
                    .collect()
            }),
            weight: m.map(|m| m.weight().to_f64()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InsRunReport {
    pub n: u32,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub answer: Answer,
    pub hash_count: usize,
    pub segment_len: usize,
    pub arrivals: u64,
    pub step_budget: u64,
    pub max_steps_per_insert: u64,
    pub total_steps: u64,
    pub overrun_steps: u64,
    pub query_steps: u64,
    pub peak_stored_edges: usize,
    pub space_bound: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynRunReport {
    pub n: u32,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub seed: u64,
    pub answer: Answer,
    pub updates: u64,
    /// Distinct live weights.
    pub distinct_weights: usize,
    pub weight_keys: usize,
    pub peak_weight_keys: usize,
    pub live_samplers: usize,
    pub live_pairs: usize,
    pub sampler_fails: usize,
    pub sampled_edges: usize,
    pub keys_touched_per_update: u64,
    pub max_update_work: u64,
    pub update_work_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: u32,
    pub k: usize,
    pub mode: String,
    pub live_edges: usize,
    pub answer: Answer,
}

fn inserts_only(s: &Stream<RealWeight>) -> Result<()> {
    if let Some(pos) = s.elements.iter().position(|e| e.op == Op::Delete) {
        return Err(Error::InvalidParameter(format!(
            "element {} is a deletion; insert-only runs accept insertions only",
            pos + 1
        )));
    }
    Ok(())
}

/// Feeds an `ins` stream to the insert-only matcher and queries once at the end.
pub fn run_ins(file: &StreamFile, k: Option<usize>, epsilon: f64, seed: u64) -> Result<InsRunReport> {
    let StreamFile::Ins(s) = file else {
        return Err(Error::InvalidParameter("run-ins needs an `ins` stream".into()));
    };
    inserts_only(s)?;
    let k = k.unwrap_or(s.k);
    let mut m = InsertMatcher::new(s.n, k, epsilon, &mut rng_for(seed, 0))?;
    for el in &s.elements {
        m.process_insert(el.edge)?;
    }
    let best = m.query();
    let st = m.stats();
    Ok(InsRunReport {
        n: s.n,
        k,
        epsilon,
        seed,
        answer: Answer::from_matching(best.as_ref()),
        hash_count: m.hash_count(),
        segment_len: m.segment_len(),
        arrivals: st.arrivals,
        step_budget: st.budget,
        max_steps_per_insert: st.max_steps_per_insert,
        total_steps: st.total_steps,
        overrun_steps: st.overrun_steps,
        query_steps: st.query_steps,
        peak_stored_edges: st.peak_stored_edges,
        space_bound: m.space_bound(),
    })
}

/// Feeds a `dyn` stream to the dynamic matcher; `epsilon` selects the
/// approximate variant.
pub fn run_dyn(
    file: &StreamFile,
    k: Option<usize>,
    epsilon: Option<f64>,
    config: DynamicConfig,
    seed: u64,
) -> Result<DynRunReport> {
    let StreamFile::Dyn(s) = file else {
        return Err(Error::InvalidParameter("run-dyn needs a `dyn` stream".into()));
    };
    let k = k.unwrap_or(s.k);
    let mut m = DynamicMatcher::build(s.n, k, epsilon, config, &mut rng_for(seed, 0))?;
    for el in &s.elements {
        m.process_update(el)?;
    }
    let ans = m.query();
    let st = m.stats();
    Ok(DynRunReport {
        n: s.n,
        k,
        epsilon,
        delta: m.delta(),
        seed,
        answer: Answer::from_matching(ans.matching.as_ref()),
        updates: st.updates,
        distinct_weights: m.distinct_weights(),
        weight_keys: m.weight_keys(),
        peak_weight_keys: st.peak_weight_keys,
        live_samplers: ans.samplers,
        live_pairs: m.pair_count(),
        sampler_fails: ans.fails,
        sampled_edges: ans.sampled_edges,
        keys_touched_per_update: m.scheme().params().d2.pow(2),
        max_update_work: st.max_update_work,
        update_work_bound: m.update_work_bound(),
    })
}

/// Materializes the stream and solves it exactly.
pub fn run_oracle(file: &StreamFile, k: Option<usize>) -> Result<OracleReport> {
    let k = k.unwrap_or(file.k());
    let (live_edges, answer) = match file {
        StreamFile::Ins(s) => {
            let g = materialize(s)?;
            (
                g.len(),
                Answer::from_matching(max_weight_k_matching(&g.edges(), k).as_ref()),
            )
        }
        StreamFile::Dyn(s) => {
            let g = materialize(s)?;
            (
                g.len(),
                Answer::from_matching(max_weight_k_matching(&g.edges(), k).as_ref()),
            )
        }
    };
    Ok(OracleReport {
        n: file.n(),
        k,
        mode: file.mode().to_string(),
        live_edges,
        answer,
    })
}

/// Renders a report as `key: value` lines, flattening nested objects with
/// dots. The matching is printed as one `u v w` line per edge.
pub fn render_text<T: Serialize>(report: &T) -> String {
    let value = serde_json::to_value(report).expect("reports serialize");
    let mut out = String::new();
    flatten("", &value, &mut out);
    out
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut String) {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                let name = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&name, v, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| i.get("u").is_some()) => {
            out.push_str(&format!("{prefix}:\n"));
            for e in items {
                out.push_str(&format!("  {} {} {}\n", e["u"], e["v"], e["w"]));
            }
        }
        Value::Null if prefix.ends_with("matching") => out.push_str(&format!("{prefix}: no k-matching\n")),
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}
