//! SPEC documents and the rule-based harness generator built on them.
//!
//! A SPEC maps one C-facing (unidiomatic) function or struct layout to its
//! idiomatic counterpart: per-field pointer shape, length source,
//! nullability, ownership and compare hints. Validated documents drive
//! deterministic generation of C-ABI shims, bidirectional struct converters
//! with roundtrip selftests, and seed-value constructors. Mappings outside
//! the rule set become localized TODO sites for the model fallback.

pub mod function_harness;
pub mod rules;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use function_harness::generate_function_harness;

/// The published schema, embedded verbatim into the idiomatic prompt.
pub const SPEC_SCHEMA_JSON: &str = include_str!("../../schema/spec-v1.schema.json");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("SPEC schema violation at {path}: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("SPEC length source `{len_from}` does not name a sibling u_field")]
    DanglingLengthSource { len_from: String },
    #[error("unsupported pattern: {0}")]
    UnsupportedPattern(String),
    #[error(transparent)]
    Signature(#[from] crate::rustsrc::SigError),
    #[error("translation error during TODO completion: {0}")]
    Completion(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtrKind {
    Slice,
    Cstring,
    Ref,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullPolicy {
    Nullable,
    Forbidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ownership {
    Owning,
    Transient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareHint {
    ByValue,
    BySlice,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Ptr(PtrShape),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtrShape {
    pub kind: PtrKind,
    pub len_from: Option<String>,
    pub len_const: Option<u64>,
    pub null: Option<NullPolicy>,
}

impl PtrShape {
    /// Effective policy: slices tolerate NULL as empty, cstring/ref are
    /// strict unless the SPEC says otherwise.
    pub fn null_policy(&self) -> NullPolicy {
        self.null.unwrap_or(match self.kind {
            PtrKind::Slice => NullPolicy::Nullable,
            PtrKind::Cstring | PtrKind::Ref => NullPolicy::Forbidden,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UField {
    pub name: String,
    pub c_type: String,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IField {
    /// Identifier, `ret`, or derived length path `<field>.len`.
    pub path: String,
    pub ty: String,
}

impl IField {
    pub fn is_ret(&self) -> bool {
        self.path == "ret"
    }

    /// Base of a supported derived length path (`xs.len` -> `xs`).
    pub fn len_base(&self) -> Option<&str> {
        self.path.strip_suffix(".len").filter(|base| !base.is_empty() && !base.contains('.'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMapping {
    pub u_field: UField,
    pub i_field: IField,
    pub ownership: Option<Ownership>,
    pub compare: Option<CompareHint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecTarget {
    Function(String),
    Struct(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDocument {
    pub target: SpecTarget,
    pub fields: Vec<FieldMapping>,
}

impl SpecDocument {
    pub fn name(&self) -> &str {
        match &self.target {
            SpecTarget::Function(n) | SpecTarget::Struct(n) => n,
        }
    }

    pub fn mapping_for_u(&self, u_name: &str) -> Option<&FieldMapping> {
        self.fields.iter().find(|f| f.u_field.name == u_name)
    }

    /// u_field names consumed as length sources by slice mappings.
    pub fn length_source_names(&self) -> BTreeSet<&str> {
        self.fields
            .iter()
            .filter_map(|f| match &f.u_field.shape {
                Shape::Ptr(p) => p.len_from.as_deref(),
                Shape::Scalar => None,
            })
            .collect()
    }
}

// Raw serde mirror of the published schema.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    function_name: Option<String>,
    struct_name: Option<String>,
    fields: Vec<RawField>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    u_field: RawUField,
    i_field: RawIField,
    ownership: Option<Ownership>,
    compare: Option<CompareHint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUField {
    name: String,
    #[serde(rename = "type")]
    ty: String,
    shape: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIField {
    name: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPtr {
    kind: PtrKind,
    len_from: Option<String>,
    len_const: Option<u64>,
    null: Option<NullPolicy>,
}

/// Parses and schema-checks a SPEC document, resolving every cross-field
/// reference.
pub fn validate_spec(raw: &str) -> Result<SpecDocument, HarnessError> {
    let spec: RawSpec = serde_json::from_str(raw).map_err(|e| HarnessError::SchemaViolation {
        path: ".".into(),
        reason: e.to_string(),
    })?;
    let target = match (&spec.function_name, &spec.struct_name) {
        (Some(f), None) => SpecTarget::Function(f.clone()),
        (None, Some(s)) => SpecTarget::Struct(s.clone()),
        (Some(_), Some(_)) => {
            return Err(HarnessError::SchemaViolation {
                path: ".".into(),
                reason: "function_name and struct_name are mutually exclusive".into(),
            })
        }
        (None, None) => {
            return Err(HarnessError::SchemaViolation {
                path: ".".into(),
                reason: "one of function_name or struct_name is required".into(),
            })
        }
    };
    if spec.fields.is_empty() && matches!(target, SpecTarget::Struct(_)) {
        return Err(HarnessError::SchemaViolation {
            path: ".fields".into(),
            reason: "struct SPEC needs at least one field mapping".into(),
        });
    }
    let mut fields = Vec::new();
    for (idx, raw_field) in spec.fields.iter().enumerate() {
        let path = format!(".fields[{idx}]");
        let shape = parse_shape(&raw_field.u_field.shape, &path)?;
        if raw_field.u_field.name.is_empty() {
            return Err(HarnessError::SchemaViolation {
                path: format!("{path}.u_field.name"),
                reason: "empty name".into(),
            });
        }
        // Dotted paths other than `<field>.len` are valid SPEC but outside
        // the rule set; the generators turn them into TODO sites.
        let i_path = raw_field.i_field.name.clone();
        fields.push(FieldMapping {
            u_field: UField {
                name: raw_field.u_field.name.clone(),
                c_type: raw_field.u_field.ty.clone(),
                shape,
            },
            i_field: IField { path: i_path, ty: raw_field.i_field.ty.clone() },
            ownership: raw_field.ownership,
            compare: raw_field.compare,
        });
    }
    // Cross-field checks.
    let u_names: BTreeSet<&str> = fields.iter().map(|f| f.u_field.name.as_str()).collect();
    if u_names.len() != fields.len() {
        return Err(HarnessError::SchemaViolation {
            path: ".fields".into(),
            reason: "duplicate u_field names".into(),
        });
    }
    let ret_count = fields.iter().filter(|f| f.i_field.is_ret()).count();
    if ret_count > 1 {
        return Err(HarnessError::SchemaViolation {
            path: ".fields".into(),
            reason: "at most one mapping may target the idiomatic name `ret`".into(),
        });
    }
    for (idx, f) in fields.iter().enumerate() {
        if let Shape::Ptr(p) = &f.u_field.shape {
            match p.kind {
                PtrKind::Slice => {
                    if p.len_from.is_some() == p.len_const.is_some() {
                        return Err(HarnessError::SchemaViolation {
                            path: format!(".fields[{idx}].u_field.shape.ptr"),
                            reason: "a slice requires a length source: exactly one of len_from/len_const".into(),
                        });
                    }
                    if let Some(len_from) = &p.len_from {
                        if !u_names.contains(len_from.as_str()) {
                            return Err(HarnessError::DanglingLengthSource {
                                len_from: len_from.clone(),
                            });
                        }
                        if len_from == &f.u_field.name {
                            return Err(HarnessError::SchemaViolation {
                                path: format!(".fields[{idx}].u_field.shape.ptr.len_from"),
                                reason: "a slice cannot be its own length source".into(),
                            });
                        }
                    }
                }
                PtrKind::Cstring | PtrKind::Ref => {
                    if p.len_from.is_some() || p.len_const.is_some() {
                        return Err(HarnessError::SchemaViolation {
                            path: format!(".fields[{idx}].u_field.shape.ptr"),
                            reason: "length sources apply to slices only".into(),
                        });
                    }
                }
            }
        }
        if let Some(base) = f.i_field.len_base() {
            let target_exists = base == "ret"
                || fields.iter().any(|other| {
                    other.i_field.path == base
                        || (other.i_field.is_ret() && base == "ret")
                });
            if !target_exists {
                return Err(HarnessError::SchemaViolation {
                    path: format!(".fields[{idx}].i_field.name"),
                    reason: format!("derived length path refers to unknown idiomatic field `{base}`"),
                });
            }
        }
    }
    if matches!(target, SpecTarget::Struct(_)) {
        if let Some(f) = fields.iter().find(|f| f.i_field.is_ret() || f.i_field.path == "ret.len") {
            return Err(HarnessError::SchemaViolation {
                path: ".fields".into(),
                reason: format!(
                    "struct SPECs cannot map `{}`; return slots exist only for functions",
                    f.i_field.path
                ),
            });
        }
    }
    Ok(SpecDocument { target, fields })
}

fn parse_shape(v: &serde_json::Value, path: &str) -> Result<Shape, HarnessError> {
    match v {
        serde_json::Value::String(s) if s == "scalar" => Ok(Shape::Scalar),
        serde_json::Value::Object(map) => {
            let ptr = map.get("ptr").ok_or_else(|| HarnessError::SchemaViolation {
                path: format!("{path}.u_field.shape"),
                reason: "object shape must be {\"ptr\": {...}}".into(),
            })?;
            if map.len() != 1 {
                return Err(HarnessError::SchemaViolation {
                    path: format!("{path}.u_field.shape"),
                    reason: "unexpected keys next to `ptr`".into(),
                });
            }
            let raw: RawPtr =
                serde_json::from_value(ptr.clone()).map_err(|e| HarnessError::SchemaViolation {
                    path: format!("{path}.u_field.shape.ptr"),
                    reason: e.to_string(),
                })?;
            if raw.len_const == Some(0) {
                return Err(HarnessError::SchemaViolation {
                    path: format!("{path}.u_field.shape.ptr.len_const"),
                    reason: "len_const must be positive".into(),
                });
            }
            Ok(Shape::Ptr(PtrShape {
                kind: raw.kind,
                len_from: raw.len_from,
                len_const: raw.len_const,
                null: raw.null,
            }))
        }
        other => Err(HarnessError::SchemaViolation {
            path: format!("{path}.u_field.shape"),
            reason: format!("shape must be \"scalar\" or a pointer descriptor, got {other}"),
        }),
    }
}

/// One location where rule-based generation gave up and the model fills in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TodoSite {
    /// `<item>:<param or field>` naming the gap.
    pub location: String,
    /// The mapping excerpt the fallback should honor.
    pub spec_excerpt: String,
}

/// Generated harness text for one function or struct.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessArtifact {
    /// C-ABI shim exporting the original symbol (functions).
    pub shim_source: String,
    /// Bidirectional converters (structs).
    pub converter_sources: String,
    /// Roundtrip selftest (structs).
    pub selftest_source: String,
    pub todo_sites: Vec<TodoSite>,
}

impl HarnessArtifact {
    pub fn all_source(&self) -> String {
        let mut out = String::new();
        for part in [&self.shim_source, &self.converter_sources, &self.selftest_source] {
            if !part.is_empty() {
                out.push_str(part);
                if !part.ends_with('\n') {
                    out.push('\n');
                }
                out.push('\n');
            }
        }
        out
    }
}
