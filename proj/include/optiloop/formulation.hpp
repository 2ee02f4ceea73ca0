#pragma once

#include <nlohmann/json_fwd.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace optiloop {

// ---------------------------------------------------------------------------
// Declarative convex-QP formulation IR.
//
// A formulation is a set of index sets, data-bound parameters, variables,
// affine constraints and objective terms. One variable is public: the local
// copy of the shared plan over (item, node, period). Everything else is
// private to the agent. The IR is the unit of static analysis, fault
// injection and repair.
//
// Index conventions:
//  * a constraint is instantiated once per binding of its quantifiers;
//  * an index symbol used inside a term but not bound by a quantifier is
//    summed over the set implied by the slot it occupies;
//  * objective terms sum over all of their index symbols;
//  * a reference may use a literal index (fixed element of a set) or a
//    quantifier symbol with an additive offset; bindings whose offset falls
//    outside the set drop that product (standard inventory-recursion style).
// ---------------------------------------------------------------------------

enum class DimKind { item, node, period, warehouse, custom };

enum class Visibility { public_decision, private_decision };

enum class Relation { le, eq, ge };

enum class TermKind { linear_var, quadratic_var, const_data };

enum class FieldRoleKind { cost, capacity, inflow, demand, inventory, other };

struct IndexSet {
  std::string name;
  int size = 1;
  DimKind dim = DimKind::custom;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;
};

/// Reference to one position of a shaped entity: either a symbol (with an
/// optional additive offset) or a literal element index.
struct IndexRef {
  std::string symbol;  // empty <=> literal
  int offset = 0;
  int literal = -1;

  bool is_literal() const { return symbol.empty(); }

  static IndexRef sym(std::string s, int off = 0) {
    IndexRef r;
    r.symbol = std::move(s);
    r.offset = off;
    return r;
  }
  static IndexRef lit(int k) {
    IndexRef r;
    r.literal = k;
    return r;
  }

  friend bool operator==(const IndexRef&, const IndexRef&) = default;
  friend auto operator<=>(const IndexRef&, const IndexRef&) = default;
};

struct ParamRef {
  std::string name;
  std::vector<IndexRef> indices;

  friend bool operator==(const ParamRef&, const ParamRef&) = default;
  friend auto operator<=>(const ParamRef&, const ParamRef&) = default;
};

/// Product of a literal and zero or more parameter references.
struct CoefExpr {
  double literal = 1.0;
  std::vector<ParamRef> params;

  static CoefExpr lit(double v) {
    CoefExpr c;
    c.literal = v;
    return c;
  }
  static CoefExpr param(std::string name, std::vector<IndexRef> idx = {}) {
    CoefExpr c;
    c.params.push_back(ParamRef{std::move(name), std::move(idx)});
    return c;
  }

  friend bool operator==(const CoefExpr&, const CoefExpr&) = default;
};

/// Sum of coefficient products; affine in parameters (variables never
/// appear on the right-hand side).
struct AffineExpr {
  std::vector<CoefExpr> terms;

  static AffineExpr zero() { return {}; }
  static AffineExpr lit(double v) {
    AffineExpr e;
    if (v != 0.0) e.terms.push_back(CoefExpr::lit(v));
    return e;
  }

  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;
};

struct Parameter {
  std::string name;
  std::vector<std::string> shape;  // index-set names; empty = scalar
  std::string source_field;        // scenario data field this binds to
  std::vector<double> values;      // row-major over shape

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct Variable {
  std::string name;
  std::vector<std::string> shape;
  Visibility visibility = Visibility::private_decision;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  std::string role;  // optional tag used by the decision-variable audit

  friend bool operator==(const Variable&, const Variable&) = default;
};

struct VarRef {
  std::string name;
  std::vector<IndexRef> indices;

  friend bool operator==(const VarRef&, const VarRef&) = default;
};

struct ConstraintTerm {
  CoefExpr coef;
  VarRef var;

  friend bool operator==(const ConstraintTerm&, const ConstraintTerm&) = default;
};

struct Quantifier {
  std::string index;
  std::string set;

  friend bool operator==(const Quantifier&, const Quantifier&) = default;
};

struct LinearConstraint {
  std::string name;
  std::vector<Quantifier> quantifiers;
  std::vector<ConstraintTerm> lhs;
  Relation relation = Relation::le;
  AffineExpr rhs;

  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

struct ObjectiveTerm {
  std::string name;
  TermKind kind = TermKind::linear_var;
  double weight = 1.0;
  CoefExpr coef;
  std::optional<VarRef> var_a;  // linear_var and quadratic_var
  std::optional<VarRef> var_b;  // quadratic_var only

  friend bool operator==(const ObjectiveTerm&, const ObjectiveTerm&) = default;
};

struct FormulationIR {
  std::string name;
  std::vector<IndexSet> sets;
  std::vector<Parameter> parameters;
  std::vector<Variable> variables;
  std::vector<LinearConstraint> constraints;
  std::vector<ObjectiveTerm> objective;
  // sense is fixed to minimize

  const IndexSet* find_set(const std::string& n) const;
  const Parameter* find_parameter(const std::string& n) const;
  Parameter* find_parameter(const std::string& n);
  const Variable* find_variable(const std::string& n) const;
  const Variable* public_variable() const;

  friend bool operator==(const FormulationIR&, const FormulationIR&) = default;
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

struct FieldInfo {
  std::string name;
  FieldRoleKind role = FieldRoleKind::other;
};

/// One objective term caught multiplying a cost parameter into fixed data.
struct TermFlag {
  std::string term;
  std::string cost_parameter;
  std::string detail;
};

struct AuditReport {
  std::vector<std::string> missing_roles;          // expected but unmatched
  std::vector<std::string> unexpected_variables;   // matching no expected role
  std::vector<std::string> disconnected_variables; // no constraint path to the public plan
  bool clean() const {
    return missing_roles.empty() && unexpected_variables.empty() &&
           disconnected_variables.empty();
  }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

ValidationReport validate(const FormulationIR& ir);

std::vector<TermFlag> find_cost_data_antipatterns(
    const FormulationIR& ir, const std::vector<FieldInfo>& fields);

AuditReport audit_decision_variables(const FormulationIR& ir,
                                     const std::vector<std::string>& expected_roles);

std::vector<std::string> find_missing_cost_parameters(
    const FormulationIR& ir, const std::vector<FieldInfo>& fields);

FormulationIR canonical(const FormulationIR& ir);

bool structurally_equal(const FormulationIR& a, const FormulationIR& b);

/// Fill parameter values from named data fields (by source_field). Throws
/// std::invalid_argument on missing fields or length mismatches.
void bind_parameters(FormulationIR& ir,
                     const std::vector<std::pair<std::string, std::vector<double>>>& fields);

nlohmann::json ir_to_json(const FormulationIR& ir);
FormulationIR ir_from_json(const nlohmann::json& j);

std::string relation_name(Relation r);
Relation relation_from_name(const std::string& s);
std::string term_kind_name(TermKind k);
TermKind term_kind_from_name(const std::string& s);
std::string dim_kind_name(DimKind k);
DimKind dim_kind_from_name(const std::string& s);
std::string field_role_name(FieldRoleKind r);
FieldRoleKind field_role_from_name(const std::string& s);

}  // namespace optiloop
