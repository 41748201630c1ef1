//! Structured SDP description: named variable blocks with cone membership,
//! affine constraints built from a small algebra of linear maps, and a linear
//! objective. The lowering pass turns this into solver standard form.

use num_complex::Complex64;
use qstrat_tensor::{LabeledOperator, SystemLabel};

use crate::ProgramError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarCone {
    /// Hermitian PSD matrix block.
    Psd,
    /// Hermitian block with no cone constraint.
    HermFree,
    NonnegScalar,
    FreeScalar,
}

#[derive(Debug, Clone)]
pub struct VarBlock {
    pub name: String,
    /// Empty for scalar variables.
    pub systems: Vec<SystemLabel>,
    pub cone: VarCone,
}

impl VarBlock {
    pub fn side(&self) -> usize {
        self.systems.iter().map(|s| s.dim).product()
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.cone, VarCone::NonnegScalar | VarCone::FreeScalar)
    }
}

/// Linear maps applied to a variable inside a constraint or objective term.
#[derive(Debug, Clone)]
pub enum TermMap {
    /// X itself.
    Identity,
    /// Tr over the named systems of X.
    TraceOut(Vec<String>),
    /// X tensor the identity on extra systems, appended after X's systems.
    TensorId(Vec<SystemLabel>),
    /// Scalar-valued Tr[K X].
    InnerProduct(LabeledOperator),
    /// Scalar variable times a fixed Hermitian kernel.
    ScalarKernel(LabeledOperator),
    /// Scalar variable times the identity on the constraint target systems.
    ScalarIdentity,
}

#[derive(Debug, Clone)]
pub struct Term {
    pub var: String,
    pub coeff: f64,
    pub map: TermMap,
}

impl Term {
    pub fn new(var: &str, coeff: f64, map: TermMap) -> Self {
        Term {
            var: var.into(),
            coeff,
            map,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub enum Target {
    Matrix(LabeledOperator),
    Scalar(f64),
}

impl Target {
    pub fn zero(systems: Vec<SystemLabel>) -> Self {
        Target::Matrix(LabeledOperator::zero(systems).expect("valid systems"))
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<Term>,
    pub rel: Rel,
    pub target: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub enum ObjCoeff {
    /// Tr[K X] contribution of a matrix variable.
    Matrix(LabeledOperator),
    /// c * x contribution of a scalar variable.
    Scalar(f64),
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub sense: Sense,
    pub vars: Vec<VarBlock>,
    pub objective: Vec<(String, ObjCoeff)>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn var(&self, name: &str) -> Result<&VarBlock, ProgramError> {
        self.vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| ProgramError::Build(format!("unknown variable '{name}'")))
    }

    /// Structural checks: every referenced variable exists, coefficient
    /// kernels are Hermitian, and term outputs land in the target space.
    pub fn validate(&self) -> Result<(), ProgramError> {
        for (name, coeff) in &self.objective {
            let v = self.var(name)?;
            match coeff {
                ObjCoeff::Matrix(k) => {
                    if v.is_scalar() {
                        return Err(ProgramError::Build(format!(
                            "matrix objective on scalar variable '{name}'"
                        )));
                    }
                    if k.side() != v.side() {
                        return Err(ProgramError::Build(format!(
                            "objective kernel side {} does not match variable '{name}' side {}",
                            k.side(),
                            v.side()
                        )));
                    }
                    if !k.is_hermitian(1e-12) {
                        return Err(ProgramError::Build(format!(
                            "objective kernel for '{name}' is not Hermitian"
                        )));
                    }
                }
                ObjCoeff::Scalar(_) => {
                    if !v.is_scalar() {
                        return Err(ProgramError::Build(format!(
                            "scalar objective on matrix variable '{name}'"
                        )));
                    }
                }
            }
        }
        for c in &self.constraints {
            let target_side = match &c.target {
                Target::Matrix(t) => {
                    if !t.is_hermitian(1e-12) {
                        return Err(ProgramError::Build(format!(
                            "constraint '{}' has a non-Hermitian target",
                            c.label
                        )));
                    }
                    Some(t.side())
                }
                Target::Scalar(_) => None,
            };
            for term in &c.terms {
                let v = self.var(&term.var)?;
                let out_side = self.term_output_side(term, v, &c.target)?;
                match (target_side, out_side) {
                    (Some(ts), Some(os)) if ts != os => {
                        return Err(ProgramError::Build(format!(
                            "constraint '{}': term on '{}' produces side {} against target side {}",
                            c.label, term.var, os, ts
                        )));
                    }
                    (None, Some(_)) => {
                        return Err(ProgramError::Build(format!(
                            "constraint '{}': matrix term against scalar target",
                            c.label
                        )));
                    }
                    (Some(_), None) => {
                        return Err(ProgramError::Build(format!(
                            "constraint '{}': scalar term against matrix target",
                            c.label
                        )));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    fn term_output_side(
        &self,
        term: &Term,
        v: &VarBlock,
        target: &Target,
    ) -> Result<Option<usize>, ProgramError> {
        Ok(match &term.map {
            TermMap::Identity => Some(v.side()),
            TermMap::TraceOut(names) => {
                let mut side = v.side();
                for n in names {
                    let s = v
                        .systems
                        .iter()
                        .find(|s| &s.name == n)
                        .ok_or_else(|| {
                            ProgramError::Build(format!(
                                "trace over unknown system '{n}' of '{}'",
                                v.name
                            ))
                        })?;
                    side /= s.dim;
                }
                Some(side)
            }
            TermMap::TensorId(extra) => {
                Some(v.side() * extra.iter().map(|s| s.dim).product::<usize>())
            }
            TermMap::InnerProduct(k) => {
                if k.side() != v.side() {
                    return Err(ProgramError::Build(format!(
                        "inner-product kernel side {} vs variable '{}' side {}",
                        k.side(),
                        v.name,
                        v.side()
                    )));
                }
                None
            }
            TermMap::ScalarKernel(k) => Some(k.side()),
            TermMap::ScalarIdentity => match target {
                Target::Matrix(t) => Some(t.side()),
                Target::Scalar(_) => {
                    return Err(ProgramError::Build(
                        "scalar-identity term against scalar target".into(),
                    ))
                }
            },
        })
    }

    /// All matrix data in the problem is exactly real (enables the
    /// real-symmetric lowering fast path).
    pub fn is_real(&self) -> bool {
        let op_real =
            |op: &LabeledOperator| op.entries().iter().all(|z| z.im == 0.0);
        for (_, coeff) in &self.objective {
            if let ObjCoeff::Matrix(k) = coeff {
                if !op_real(k) {
                    return false;
                }
            }
        }
        for c in &self.constraints {
            if let Target::Matrix(t) = &c.target {
                if !op_real(t) {
                    return false;
                }
            }
            for term in &c.terms {
                match &term.map {
                    TermMap::InnerProduct(k) | TermMap::ScalarKernel(k) if !op_real(k) => {
                        return false;
                    }
                    _ => {}
                }
            }
        }
        true
    }

    /// Summary dump for debugging interchange.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"sense\":");
        out.push_str(match self.sense {
            Sense::Min => "\"min\"",
            Sense::Max => "\"max\"",
        });
        out.push_str(",\"vars\":[");
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"name\":{},\"side\":{},\"cone\":\"{}\"}}",
                serde_name(&v.name),
                v.side(),
                match v.cone {
                    VarCone::Psd => "psd",
                    VarCone::HermFree => "herm_free",
                    VarCone::NonnegScalar => "nonneg_scalar",
                    VarCone::FreeScalar => "free_scalar",
                }
            ));
        }
        out.push_str("],\"constraints\":[");
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"label\":{},\"rel\":\"{}\",\"terms\":{}}}",
                serde_name(&c.label),
                match c.rel {
                    Rel::Eq => "eq",
                    Rel::Le => "le",
                    Rel::Ge => "ge",
                },
                c.terms.len()
            ));
        }
        out.push_str("]}");
        out
    }
}

fn serde_name(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// Forward application of a term to a concrete variable value. Matrix
/// variables pass their operator; scalar variables pass a 1x1 operator.
/// Used by the adjoint-identity tests and IR-level diagnostics.
pub fn apply_term(
    term: &Term,
    value: &LabeledOperator,
    target: &Target,
) -> Result<TermOutput, ProgramError> {
    let scaled = |op: LabeledOperator| op.scale(term.coeff);
    Ok(match &term.map {
        TermMap::Identity => TermOutput::Matrix(scaled(value.clone())),
        TermMap::TraceOut(names) => {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            TermOutput::Matrix(scaled(value.partial_trace(&refs)?))
        }
        TermMap::TensorId(extra) => {
            let eye = LabeledOperator::identity(extra.clone())?;
            TermOutput::Matrix(scaled(value.kron(&eye)?))
        }
        TermMap::InnerProduct(k) => {
            TermOutput::Scalar(term.coeff * k.trace_product(value).re)
        }
        TermMap::ScalarKernel(k) => {
            let x = value.at(0, 0).re;
            TermOutput::Matrix(k.scale(term.coeff * x))
        }
        TermMap::ScalarIdentity => {
            let Target::Matrix(t) = target else {
                return Err(ProgramError::Build(
                    "scalar-identity term needs a matrix target".into(),
                ));
            };
            let x = value.at(0, 0).re;
            TermOutput::Matrix(
                LabeledOperator::identity(t.systems().to_vec())?.scale(term.coeff * x),
            )
        }
    })
}

/// Adjoint application of a term's map to a target-space Hermitian operator,
/// yielding the variable-space coefficient (or a scalar for scalar
/// variables). The defining identity is <Y, map(X)> = <adjoint(Y), X> with
/// the real pairing <A, B> = Tr[A B] on Hermitian operators.
pub fn apply_term_adjoint(
    term: &Term,
    v: &VarBlock,
    y: &LabeledOperator,
) -> Result<TermOutput, ProgramError> {
    Ok(match &term.map {
        TermMap::Identity => TermOutput::Matrix(y.scale(term.coeff)),
        TermMap::TraceOut(names) => {
            // adjoint of Tr_names is tensoring the identity back in, at the
            // original positions of the traced systems.
            let traced: Vec<SystemLabel> = v
                .systems
                .iter()
                .filter(|s| names.contains(&s.name))
                .cloned()
                .collect();
            let eye = LabeledOperator::identity(traced)?;
            let lifted = y.kron(&eye)?;
            let order: Vec<&str> = v.systems.iter().map(|s| s.name.as_str()).collect();
            TermOutput::Matrix(lifted.permute_to_names(&order)?.scale(term.coeff))
        }
        TermMap::TensorId(extra) => {
            let refs: Vec<&str> = extra.iter().map(|s| s.name.as_str()).collect();
            TermOutput::Matrix(y.partial_trace(&refs)?.scale(term.coeff))
        }
        TermMap::InnerProduct(k) => {
            // y is scalar here, carried as a 1x1 operator.
            TermOutput::Matrix(k.scale(term.coeff * y.at(0, 0).re))
        }
        TermMap::ScalarKernel(k) => {
            TermOutput::Scalar(term.coeff * k.trace_product(y).re)
        }
        TermMap::ScalarIdentity => TermOutput::Scalar(term.coeff * y.trace().re),
    })
}

#[derive(Debug, Clone)]
pub enum TermOutput {
    Matrix(LabeledOperator),
    Scalar(f64),
}

impl TermOutput {
    pub fn as_matrix(&self) -> &LabeledOperator {
        match self {
            TermOutput::Matrix(m) => m,
            TermOutput::Scalar(_) => panic!("expected matrix output"),
        }
    }

    pub fn as_scalar(&self) -> f64 {
        match self {
            TermOutput::Scalar(s) => *s,
            TermOutput::Matrix(_) => panic!("expected scalar output"),
        }
    }
}

/// 1x1 stand-in operator for scalar variable values.
pub fn scalar_operator(v: f64) -> LabeledOperator {
    LabeledOperator::scalar(Complex64::new(v, 0.0))
}
