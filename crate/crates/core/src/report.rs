//! Machine-readable run reports.
//!
//! Every command emits one JSON object with a fixed key set:
//! `command`, `input_digest`, `n`, `cap`, `result` (variant-tagged),
//! `map` (canonical polynomial strings, when a coordinate change is
//! produced), `trace` (step records), and `verified` (exact-check
//! booleans and bounds). Serialization order is fixed by the struct
//! layout, rationals are rendered as `p/q` text, and no floating point
//! is ever emitted, so identical inputs produce identical bytes. An
//! optional `timing_ms` field exists for interactive use and is the
//! one field excluded from the determinism contract.

use crate::classify::{IntegrabilityWitness, LinearNormalForm};
use crate::linearize::{LinearizationTrace, StepRecord};
use crate::rat::Rat;
use crate::textio::format_rat;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub n: usize,
    pub cap: u32,
    pub result: ResultPayload,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceStep>,
    pub verified: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultPayload {
    Integrability {
        integrable: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<IntegrabilityWitness>,
    },
    Classification {
        variant: String,
        q: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        r: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        s: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        signs: Option<Vec<i8>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        scales: Option<Vec<String>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        signature: Option<(usize, usize)>,
        nondegenerate: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        elliptic: Option<bool>,
        #[serde(skip_serializing_if = "Option::is_none")]
        hyperbolic: Option<bool>,
        #[serde(skip_serializing_if = "Option::is_none")]
        excluded_signature: Option<bool>,
        #[serde(skip_serializing_if = "Option::is_none")]
        b: Option<Vec<Vec<String>>>,
        normal_form: String,
    },
    Linearization {
        linear_through: u32,
        normal_form: String,
    },
    Canonical {
        text: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub step: u32,
    pub window: (u32, u32),
    pub residual_before: usize,
    pub residual_after: usize,
    pub map: Vec<String>,
}

impl From<&StepRecord> for TraceStep {
    fn from(r: &StepRecord) -> Self {
        TraceStep {
            step: r.step,
            window: r.window,
            residual_before: r.residual_before,
            residual_after: r.residual_after,
            map: crate::textio::map_component_strings(&r.map),
        }
    }
}

pub fn trace_steps(trace: &LinearizationTrace) -> Vec<TraceStep> {
    trace.steps.iter().map(TraceStep::from).collect()
}

pub fn classification_payload(form: &LinearNormalForm, cap: u32) -> ResultPayload {
    let normal_form = crate::textio::format_multivector(&form.normal_tensor(cap));
    match form {
        LinearNormalForm::Type1 {
            q,
            r,
            s,
            signs,
            scales,
            signature,
            nondegenerate,
            elliptic,
            hyperbolic,
            excluded_signature,
            ..
        } => ResultPayload::Classification {
            variant: "type1".into(),
            q: *q,
            r: Some(*r),
            s: Some(*s),
            signs: Some(signs.clone()),
            scales: Some(scales.iter().map(format_rat).collect()),
            signature: Some(*signature),
            nondegenerate: *nondegenerate,
            elliptic: Some(*elliptic),
            hyperbolic: Some(*hyperbolic),
            excluded_signature: Some(*excluded_signature),
            b: None,
            normal_form,
        },
        LinearNormalForm::Type2 {
            q,
            b,
            nondegenerate,
            ..
        } => ResultPayload::Classification {
            variant: "type2".into(),
            q: *q,
            r: None,
            s: None,
            signs: None,
            scales: None,
            signature: None,
            nondegenerate: *nondegenerate,
            elliptic: None,
            hyperbolic: None,
            excluded_signature: None,
            b: Some(
                b.iter()
                    .map(|row| row.iter().map(format_rat).collect())
                    .collect(),
            ),
            normal_form,
        },
    }
}

/// Machine-readable error object, printed on failure.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub command: String,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

/// FNV-1a digest of the input bytes, hex-rendered; identifies inputs in
/// reports without pulling in a hash dependency.
pub fn digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Keeps `Rat` in the module signature so reports and kernel agree on
/// rendering.
pub fn rat_string(r: &Rat) -> String {
    format_rat(r)
}
