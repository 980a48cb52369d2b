//! Running the pipeline on a loaded system and assembling the report.

use std::collections::BTreeMap;

use brst_core::brst::{assemble, brst_complex, certify};
use brst_core::cohomology::{
    cohomology, duality_check, extended_complex, half_integer_label, joint_kernel_dim, sphere_complex, CochainComplex,
    CohomologyReport,
};
use brst_core::koszul::{build_brst, BrstCharge};
use brst_core::linalg::{hermitian_eigenvalues, kron, max_abs, max_abs_diff, CMatrix, Tolerances};
use brst_core::observables::ObservableAlgebra;
use brst_core::par::Execution;
use brst_core::quantize::{adjoint, generator_ops, ghost_number_op, GeneratorOps};
use brst_core::states::{binomial, FockSpace};
use brst_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::system::{ConstraintSystem, Violation};

pub const SCHEMA_VERSION: &str = "brst-lab.report.v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Check,
    Brst,
    Quantize,
    Cohomology,
    Extended,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Brst => "brst",
            Command::Quantize => "quantize",
            Command::Cohomology => "cohomology",
            Command::Extended => "extended",
            Command::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ToleranceReport {
    pub operator: f64,
    pub rank: f64,
    /// `operator` scaled by the extended state space dimension.
    pub operator_scaled: f64,
}

#[derive(Clone, Debug, Default)]
struct Section {
    results: Value,
    residuals: Value,
    verdicts: BTreeMap<String, Verdict>,
    text: Vec<String>,
}

impl Section {
    fn verdict(&mut self, name: &str, ok: bool) -> Verdict {
        let v = Verdict::from_bool(ok);
        self.verdicts.insert(name.into(), v);
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: String,
    pub system: String,
    pub system_digest: String,
    pub results: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, Value>,
    pub verdicts: BTreeMap<String, BTreeMap<String, Verdict>>,
    pub tolerances: ToleranceReport,
    #[serde(skip)]
    text: Vec<(String, Vec<String>)>,
}

impl Report {
    fn new(command: Command, sys: &ConstraintSystem, tol: &Tolerances) -> Self {
        let dim = (1usize << sys.m()) * sys.d();
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.name().into(),
            system: sys.name.clone(),
            system_digest: sys.digest.clone(),
            results: BTreeMap::new(),
            residuals: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            tolerances: ToleranceReport { operator: tol.operator, rank: tol.rank, operator_scaled: tol.operator_for(dim) },
            text: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, s: Section) {
        self.results.insert(name.into(), s.results);
        self.residuals.insert(name.into(), s.residuals);
        self.verdicts.insert(name.into(), s.verdicts);
        self.text.push((name.into(), s.text));
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().flat_map(BTreeMap::values).all(|v| *v == Verdict::Pass)
    }

    /// 0 if every verdict passes, 1 if an input check fails, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        let failed = |section: &BTreeMap<String, Verdict>| section.values().any(|v| *v == Verdict::Fail);
        if self.verdicts.get("check").is_some_and(failed) {
            1
        } else if self.verdicts.values().any(failed) {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} on {} ({})\n", self.command, self.system, self.system_digest);
        for (name, lines) in &self.text {
            out.push_str(&format!("\n[{name}]\n"));
            for line in lines {
                out.push_str(&format!("  {line}\n"));
            }
            for (v, verdict) in &self.verdicts[name] {
                out.push_str(&format!("  {v}: {}\n", verdict.as_str()));
            }
        }
        out.push_str(&format!(
            "\ntolerances: operator {:e} (scaled {:e}), rank {:e}\n",
            self.tolerances.operator, self.tolerances.operator_scaled, self.tolerances.rank
        ));
        out
    }
}

/// Failure to produce a report.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("invalid system: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invalid(_) => 1,
            RunError::Core(e) => core_exit_code(e),
        }
    }
}

pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Consistency { .. } => 1,
        Error::Nilpotency { .. } | Error::TheoremViolation(_) | Error::InvalidComplex { .. } => 2,
        _ => 3,
    }
}

/// `+3/2`, `-1/2`, `0`.
fn signed(numerator: i64) -> String {
    let s = half_integer_label(numerator);
    if numerator > 0 {
        format!("+{s}")
    } else {
        s
    }
}

fn check_section(sys: &ConstraintSystem, space: &FockSpace, tol: &Tolerances) -> Result<(Section, Option<GeneratorOps>), Error> {
    let mut s = Section::default();
    let (ops, consistency) = match generator_ops(space, &sys.g, &sys.constants, tol) {
        Ok(ops) => {
            let r = ops.consistency_residual;
            (Some(ops), r)
        }
        Err(Error::Consistency { residual, .. }) => (None, residual),
        Err(e) => return Err(e),
    };
    s.results = json!({
        "m": sys.m(),
        "dim_v": sys.d(),
        "abelian": sys.constants.is_abelian(),
        "extended_dim": space.dim(),
    });
    s.residuals = json!({
        "consistency": consistency,
        "hermiticity": sys.hermiticity_residual,
    });
    s.text.push(format!("m = {}, dim V = {}, extended dimension {}", sys.m(), sys.d(), space.dim()));
    s.text.push(format!("max |[G_a, G_b] + i C_ab^c G_c| = {consistency:.3e}"));
    s.verdict(
        "input_invariants",
        sys.constants.violations(1e-12).is_empty() && sys.hermiticity_residual <= tol.operator_for(sys.d()),
    );
    s.verdict("consistency", ops.is_some());
    Ok((s, ops))
}

fn brst_section(sys: &ConstraintSystem) -> Result<(Section, BrstCharge), Error> {
    let alg = ObservableAlgebra::new(sys.constants.clone());
    let charge = build_brst(&alg, sys.m())?;
    let square = alg.poisson(&charge.total, &charge.total)?;
    let reality = (alg.conjugate(&charge.total)? - charge.total.clone()).max_abs();
    let mut s = Section::default();
    let pieces: Vec<String> = charge.pieces.iter().map(|p| p.to_string()).collect();
    s.results = json!({
        "rank": charge.rank(),
        "pieces": pieces,
        "terms": charge.total.num_monomials(),
    });
    s.residuals = json!({
        "poisson_omega_omega": square.max_abs(),
        "conjugate_minus_omega": reality,
    });
    for (p, piece) in pieces.iter().enumerate() {
        s.text.push(format!("Omega^({p}) = {piece}"));
    }
    s.text.push(format!("Omega = {}", charge.total));
    s.verdict("classical_nilpotency", square.is_zero());
    s.verdict("reality", reality == 0.0);
    s.verdict("antighost_pattern", charge.has_antighost_pattern());
    Ok((s, charge))
}

fn quantize_section(ops: &GeneratorOps, charge: &BrstCharge, tol: &Tolerances) -> Result<(Section, Option<CMatrix>), Error> {
    let space = ops.space();
    let (m, d) = (space.m(), space.d());
    let omega = assemble(charge, ops)?;
    let cert = certify(&omega, space, tol)?;
    let ghost = ghost_number_op(ops);
    let ghost_adjoint = max_abs_diff(&adjoint(&ghost, space, tol)?.matrix, &(-ghost.matrix.clone()));
    let grading = max_abs_diff(&(&ghost.matrix * &omega.matrix - &omega.matrix * &ghost.matrix), &omega.matrix);
    // eigenvalues of G rounded to half-integers, with the rounding error
    let ghost_herm = max_abs_diff(&ghost.matrix, &ghost.matrix.adjoint());
    let ev = hermitian_eigenvalues(&ghost.matrix);
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    let mut rounding: f64 = 0.0;
    for x in &ev {
        let twice = (2.0 * x).round();
        rounding = rounding.max((2.0 * x - twice).abs() / 2.0);
        *counts.entry(twice as i64).or_default() += 1;
    }
    let expected: BTreeMap<i64, usize> = (0..=m).map(|s| (2 * s as i64 - m as i64, binomial(m, s) * d)).collect();
    let spectrum: Vec<Value> =
        counts.iter().map(|(k, n)| json!({"eigenvalue": half_integer_label(*k), "multiplicity": n})).collect();

    let mut s = Section::default();
    s.results = json!({
        "dim": space.dim(),
        "ghost_number_spectrum": spectrum,
        "worst_square_sector": cert.worst_sector,
    });
    s.residuals = json!({
        "omega_squared": cert.square_norm,
        "omega_minus_adjoint": cert.self_adjoint_residual,
        "off_degree_blocks": cert.off_block_norm,
        "ghost_number_grading": grading,
        "ghost_number_adjoint_plus_self": ghost_adjoint,
        "ghost_number_eigenvalue_rounding": rounding.max(ghost_herm),
        "certificate_tolerance": cert.tolerance,
    });
    s.text.push(format!("|Omega^2| = {:.3e}, |Omega - Omega^dagger| = {:.3e}", cert.square_norm, cert.self_adjoint_residual));
    let spec: Vec<String> = counts.iter().map(|(k, n)| format!("{}: {n}", signed(*k))).collect();
    s.text.push(format!("ghost number spectrum {{{}}}", spec.join(", ")));
    let op_tol = tol.operator_for(space.dim());
    let nilpotent = s.verdict("nilpotent", cert.nilpotent());
    s.verdict("self_adjoint", cert.self_adjoint());
    s.verdict("ghost_degree_one", cert.off_block_norm <= op_tol && grading <= op_tol);
    s.verdict("ghost_number_spectrum", counts == expected && rounding.max(ghost_herm) <= op_tol);
    s.verdict("ghost_number_skew_adjoint", ghost_adjoint <= op_tol);
    let op = (nilpotent == Verdict::Pass).then_some(omega.matrix);
    Ok((s, op))
}

fn cohomology_section(
    sys: &ConstraintSystem,
    space: &FockSpace,
    omega: &CMatrix,
    tol: &Tolerances,
) -> Result<(Section, CochainComplex, CohomologyReport), Error> {
    let m = space.m();
    let complex = brst_complex(omega, space)?;
    let report = cohomology(&complex, tol, Execution::default())?;
    let dual = duality_check(omega, space, tol)?;
    let joint = joint_kernel_dim(&sys.g, tol.rank);
    let dims = report.dims();
    let degrees: Vec<Value> = report
        .degrees
        .iter()
        .map(|d| json!({"ghost_number": d.label, "dim": d.dim, "kernel": d.kernel, "image": d.image, "cohomology": d.cohomology}))
        .collect();
    let mut s = Section::default();
    s.results = json!({
        "degrees": degrees,
        "joint_kernel_dim": joint,
        "duality": {
            "kernel_dim": dual.kernel_dim,
            "quotient_dim": dual.quotient_dim,
            "lambda_rank": dual.lambda_rank,
            "injective": dual.injective,
            "surjective": dual.surjective,
        },
    });
    s.residuals = json!({ "complex_square": report.square_residual });
    for d in &report.degrees {
        s.text.push(format!("H^{{{}}} = {} (sector {}, kernel {}, image {})", d.label, d.cohomology, d.dim, d.kernel, d.image));
    }
    let duality = Verdict::from_bool(dual.holds());
    s.text.push(format!(
        "H^{{{}}}: {}, H^{{{}}}: {}, duality: {}",
        signed(-(m as i64)),
        dims[0],
        signed(m as i64),
        dims[m],
        duality.as_str()
    ));
    s.verdict("duality", dual.holds());
    s.verdict("extremes_equal_joint_kernel", dims[0] == joint && dims[m] == joint);
    Ok((s, complex, report))
}

fn extended_section(ops: &GeneratorOps, brst: &CochainComplex, h: &CohomologyReport, tol: &Tolerances) -> Result<Section, Error> {
    let space = ops.space();
    let m = space.m();
    let sphere = sphere_complex(m)?;
    let sphere_h = cohomology(&sphere, tol, Execution::default())?;
    let ext = extended_complex(brst, &sphere)?;
    let ext_h = cohomology(&ext.complex, tol, Execution::default())?;
    let k0 = ext.ghost_zero_degree();
    let h0 = ext_h.degrees[k0].cohomology;
    let (h_minus, h_plus) = (h.degrees[0].cohomology, h.degrees[m].cohomology);

    // ghost-zero representatives on the S^m (x) S~^0 branch
    let top = ext.block(m, 0).expect("top block exists");
    let reps = &ext_h.degrees[k0].representatives;
    let restricted = reps.view((top.offset, 0), (top.len, reps.ncols())).into_owned();
    let d0 = kron(&CMatrix::identity(brst.dims[m], brst.dims[m]), &sphere.differentials[0]);
    let mut constraint_residual = max_abs(&(&d0 * &restricted));
    let sector = space.sector(m);
    let id = CMatrix::identity(sphere.dims[0], sphere.dims[0]);
    for b in 1..=m {
        let eta = ops.eta(b);
        let eta_top = eta.view((0, sector.start), (eta.nrows(), sector.len())).into_owned();
        constraint_residual = constraint_residual.max(max_abs(&(kron(&eta_top, &id) * &restricted)));
    }

    let mut expected_sphere = vec![0; m + 1];
    expected_sphere[0] = 1;
    expected_sphere[m] = 1;
    let degrees: Vec<Value> = ext_h
        .degrees
        .iter()
        .map(|d| json!({"ghost_number": d.label, "dim": d.dim, "cohomology": d.cohomology}))
        .collect();
    let mut s = Section::default();
    s.results = json!({
        "sphere_dims": sphere.dims,
        "sphere_cohomology": sphere_h.dims(),
        "degrees": degrees,
        "h0": h0,
        "h_minus": h_minus,
        "h_plus": h_plus,
    });
    s.residuals = json!({
        "sphere_square": sphere_h.square_residual,
        "extended_square": ext_h.square_residual,
        "constraint_implementation": constraint_residual,
    });
    let theorem = Verdict::from_bool(h0 == h_minus + h_plus);
    s.text.push(format!("sphere model dims {:?}, cohomology {:?}", sphere.dims, sphere_h.dims()));
    s.text.push(format!(
        "dim H^0(Omega^ext) = {h0}, equals H^{{{}}} + H^{{{}}} = {} + {}: {}",
        signed(-(m as i64)),
        signed(m as i64),
        h_minus,
        h_plus,
        theorem.as_str()
    ));
    s.verdict("sphere_model", sphere_h.dims() == expected_sphere);
    s.verdict("ghost_zero_equals_extremes", h0 == h_minus + h_plus);
    s.verdict("constraint_implementation", constraint_residual <= tol.operator_for(ext_h.degrees[k0].dim));
    Ok(s)
}

/// Runs `command` on a validated system. Sections that depend on a failed
/// stage are omitted; the failed verdict determines the exit code.
pub fn run(command: Command, sys: &ConstraintSystem, tol: &Tolerances) -> Result<Report, RunError> {
    let mut report = Report::new(command, sys, tol);
    let space = FockSpace::with_inner(sys.m(), sys.inner.clone())?;
    let wants = |c: Command| command == c || command == Command::All;

    let (check, ops) = check_section(sys, &space, tol)?;
    if wants(Command::Check) || ops.is_none() {
        report.push("check", check);
    }
    if command == Command::Check {
        return Ok(report);
    }
    let Some(ops) = ops else { return Ok(report) };

    let (brst, charge) = brst_section(sys)?;
    let classical_ok = brst.verdicts.values().all(|v| *v == Verdict::Pass);
    if wants(Command::Brst) || !classical_ok {
        report.push("brst", brst);
    }
    if command == Command::Brst || !classical_ok {
        return Ok(report);
    }

    let (quant, omega) = quantize_section(&ops, &charge, tol)?;
    if wants(Command::Quantize) || omega.is_none() {
        report.push("quantize", quant);
    }
    if command == Command::Quantize {
        return Ok(report);
    }
    let Some(omega) = omega else { return Ok(report) };

    let (coh, complex, h) = cohomology_section(sys, &space, &omega, tol)?;
    if wants(Command::Cohomology) {
        report.push("cohomology", coh);
    }
    if command == Command::Cohomology {
        return Ok(report);
    }

    report.push("extended", extended_section(&ops, &complex, &h, tol)?);
    Ok(report)
}
