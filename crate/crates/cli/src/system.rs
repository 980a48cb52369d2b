//! Constraint-system input files.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major lists of
//! rows, and structure-constant indices are 1-based. Entries are taken
//! literally: both `(a, b, c)` and `(b, a, c)` must be listed.

use std::fmt;
use std::path::Path;

use brst_core::linalg::{is_hermitian_wrt, max_abs_diff, min_hermitian_eigenvalue, CMatrix, Tolerances};
use brst_core::observables::{ConstantsViolation, StructureConstants};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub type ComplexEntry = [f64; 2];
pub type MatrixEntries = Vec<Vec<ComplexEntry>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantEntry {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
}

/// The file format, before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub m: usize,
    pub dim_v: usize,
    pub g_matrices: Vec<MatrixEntries>,
    #[serde(default)]
    pub structure_constants: Vec<ConstantEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_product: Option<MatrixEntries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

/// A failed input invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Shape(String),
    ConstantIndex { a: usize, b: usize, c: usize },
    Constants(ConstantsViolation),
    Hermiticity { a: usize, residual: f64 },
    InnerNotHermitian { residual: f64 },
    InnerNotPositive { min_eigenvalue: f64 },
    Tolerance(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape: {msg}"),
            Violation::ConstantIndex { a, b, c } => write!(f, "structure constant index ({a},{b},{c}) out of range"),
            Violation::Constants(v) => write!(f, "{v}"),
            Violation::Hermiticity { a, residual } => {
                write!(f, "G_{a} is not Hermitian for the inner product (max asymmetry {residual:e})")
            }
            Violation::InnerNotHermitian { residual } => write!(f, "inner product is not Hermitian (max asymmetry {residual:e})"),
            Violation::InnerNotPositive { min_eigenvalue } => {
                write!(f, "inner product is not positive definite (smallest eigenvalue {min_eigenvalue:e})")
            }
            Violation::Tolerance(msg) => write!(f, "tolerance: {msg}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{} invariant violation(s):\n  {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<Violation>),
}

/// A validated system.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub name: String,
    pub constants: StructureConstants,
    pub g: Vec<CMatrix>,
    pub inner: CMatrix,
    pub tolerances: Tolerances,
    /// `sha256:` of the canonical JSON form of the input.
    pub digest: String,
    /// Largest entry of `H G_a - G_a^dagger H` over `a`.
    pub hermiticity_residual: f64,
}

impl ConstraintSystem {
    pub fn m(&self) -> usize {
        self.constants.m()
    }

    pub fn d(&self) -> usize {
        self.inner.nrows()
    }
}

/// Threshold for input invariants that should hold exactly.
const INPUT_TOL: f64 = 1e-12;

fn matrix(entries: &MatrixEntries, d: usize, what: &str, out: &mut Vec<Violation>) -> Option<CMatrix> {
    if entries.len() != d || entries.iter().any(|row| row.len() != d) {
        let cols: Vec<usize> = entries.iter().map(Vec::len).collect();
        out.push(Violation::Shape(format!("{what} must be {d}x{d}, got {} rows with lengths {cols:?}", entries.len())));
        return None;
    }
    Some(CMatrix::from_fn(d, d, |i, j| {
        let [re, im] = entries[i][j];
        Complex64::new(re, im)
    }))
}

pub fn digest(file: &SystemFile) -> String {
    let canonical = serde_json::to_vec(file).expect("system files serialize");
    let hash = Sha256::digest(&canonical);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Validates a parsed file, collecting every violated invariant.
pub fn validate(file: &SystemFile) -> Result<ConstraintSystem, Vec<Violation>> {
    let (m, d) = (file.m, file.dim_v);
    let mut violations = Vec::new();
    if m == 0 || m > 8 {
        violations.push(Violation::Shape(format!("m must be in 1..=8, got {m}")));
    }
    if d == 0 {
        violations.push(Violation::Shape("dim_v must be positive".into()));
    }
    if file.g_matrices.len() != m {
        violations.push(Violation::Shape(format!("expected {m} constraint matrices, got {}", file.g_matrices.len())));
    }
    let g: Vec<Option<CMatrix>> =
        file.g_matrices.iter().enumerate().map(|(k, e)| matrix(e, d, &format!("G_{}", k + 1), &mut violations)).collect();
    let inner = match &file.inner_product {
        Some(e) => matrix(e, d, "inner_product", &mut violations),
        None => Some(CMatrix::identity(d, d)),
    };

    let mut entries = Vec::with_capacity(file.structure_constants.len());
    for e in &file.structure_constants {
        if [e.a, e.b, e.c].iter().any(|&i| i < 1 || i > m) {
            violations.push(Violation::ConstantIndex { a: e.a, b: e.b, c: e.c });
        } else {
            entries.push((e.a, e.b, e.c, e.value));
        }
    }
    let constants = StructureConstants::from_entries(m, &entries).ok();
    if let Some(c) = &constants {
        violations.extend(c.violations(INPUT_TOL).into_iter().map(Violation::Constants));
    }

    let mut hermiticity_residual: f64 = 0.0;
    if let Some(h) = &inner {
        let asym = max_abs_diff(h, &h.adjoint());
        if asym > INPUT_TOL {
            violations.push(Violation::InnerNotHermitian { residual: asym });
        } else {
            let min_eigenvalue = min_hermitian_eigenvalue(h);
            if min_eigenvalue <= INPUT_TOL {
                violations.push(Violation::InnerNotPositive { min_eigenvalue });
            }
        }
        for (k, gk) in g.iter().enumerate() {
            if let Some(gk) = gk {
                let residual = is_hermitian_wrt(gk, h);
                hermiticity_residual = hermiticity_residual.max(residual);
                if residual > INPUT_TOL * d as f64 {
                    violations.push(Violation::Hermiticity { a: k + 1, residual });
                }
            }
        }
    }

    let mut tolerances = Tolerances::default();
    if let Some(t) = &file.tolerances {
        for (name, v, slot) in [("operator", t.operator, &mut tolerances.operator), ("rank", t.rank, &mut tolerances.rank)] {
            if let Some(v) = v {
                if v.is_finite() && v > 0.0 {
                    *slot = v;
                } else {
                    violations.push(Violation::Tolerance(format!("{name} must be positive, got {v}")));
                }
            }
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }
    Ok(ConstraintSystem {
        name: file.name.clone().unwrap_or_else(|| "unnamed".into()),
        constants: constants.expect("indices validated"),
        g: g.into_iter().map(|x| x.expect("shapes validated")).collect(),
        inner: inner.expect("shape validated"),
        tolerances,
        digest: digest(file),
        hermiticity_residual,
    })
}

pub fn parse_system(text: &str, path: &str) -> Result<SystemFile, LoadError> {
    serde_json::from_str(text).map_err(|source| LoadError::Parse { path: path.into(), source })
}

pub fn read_system_file(path: &Path) -> Result<SystemFile, LoadError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: p.clone(), source })?;
    parse_system(&text, &p)
}

/// Reads, parses and validates a system file.
pub fn load_system(path: &Path) -> Result<ConstraintSystem, LoadError> {
    validate(&read_system_file(path)?).map_err(LoadError::Invalid)
}

fn entries_of(a: &CMatrix) -> MatrixEntries {
    // `+ 0.0` turns negative zeros into zeros
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re + 0.0, a[(i, j)].im + 0.0]).collect()).collect()
}

/// Scalars, lists of scalars, lists of such lists, and objects of scalars
/// go on one line.
fn is_flat(v: &serde_json::Value) -> bool {
    use serde_json::Value;
    let scalar = |x: &Value| !x.is_array() && !x.is_object();
    match v {
        Value::Array(xs) => xs.iter().all(|x| scalar(x) || x.as_array().is_some_and(|ys| ys.iter().all(scalar))),
        Value::Object(map) => map.values().all(scalar),
        _ => true,
    }
}

fn inline(v: &serde_json::Value) -> String {
    use serde_json::Value;
    match v {
        Value::Array(xs) => format!("[{}]", xs.iter().map(inline).collect::<Vec<_>>().join(", ")),
        Value::Object(map) => {
            let fields: Vec<String> = map.iter().map(|(k, x)| format!("{}: {}", Value::String(k.clone()), inline(x))).collect();
            format!("{{{}}}", fields.join(", "))
        }
        _ => v.to_string(),
    }
}

fn write_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value;
    let pad = "  ".repeat(indent + 1);
    match v {
        _ if is_flat(v) => out.push_str(&inline(v)),
        Value::Array(xs) => {
            out.push_str("[\n");
            for (k, x) in xs.iter().enumerate() {
                out.push_str(&pad);
                write_value(x, indent + 1, out);
                out.push_str(if k + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                out.push_str(&format!("{pad}{}: ", Value::String(key.clone())));
                write_value(x, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        _ => unreachable!("scalars are flat"),
    }
}

/// Pretty JSON with one matrix row per line.
pub fn to_pretty_json(file: &SystemFile) -> String {
    let mut out = String::new();
    write_value(&serde_json::to_value(file).expect("system files serialize"), 0, &mut out);
    out.push('\n');
    out
}

/// File form of an in-memory system, for writing example inputs.
pub fn to_file(name: &str, constants: &StructureConstants, g: &[CMatrix], inner: Option<&CMatrix>) -> SystemFile {
    SystemFile {
        name: Some(name.into()),
        m: constants.m(),
        dim_v: g.first().map_or(0, CMatrix::nrows),
        g_matrices: g.iter().map(entries_of).collect(),
        structure_constants: constants.entries().into_iter().map(|(a, b, c, value)| ConstantEntry { a, b, c, value }).collect(),
        inner_product: inner.map(entries_of),
        tolerances: None,
    }
}
