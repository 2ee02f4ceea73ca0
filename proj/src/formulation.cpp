#include "optiloop/formulation.hpp"
#include "optiloop/ir_eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace optiloop {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// --- name maps ---------------------------------------------------------------

std::string relation_name(Relation r) {
  switch (r) {
    case Relation::le: return "<=";
    case Relation::eq: return "=";
    case Relation::ge: return ">=";
  }
  return "?";
}

Relation relation_from_name(const std::string& s) {
  if (s == "<=") return Relation::le;
  if (s == "=" || s == "==") return Relation::eq;
  if (s == ">=") return Relation::ge;
  throw std::invalid_argument("unknown relation '" + s + "'");
}

std::string term_kind_name(TermKind k) {
  switch (k) {
    case TermKind::linear_var: return "linear_var";
    case TermKind::quadratic_var: return "quadratic_var";
    case TermKind::const_data: return "const_data";
  }
  return "?";
}

TermKind term_kind_from_name(const std::string& s) {
  if (s == "linear_var") return TermKind::linear_var;
  if (s == "quadratic_var") return TermKind::quadratic_var;
  if (s == "const_data") return TermKind::const_data;
  throw std::invalid_argument("unknown term kind '" + s + "'");
}

std::string dim_kind_name(DimKind k) {
  switch (k) {
    case DimKind::item: return "item";
    case DimKind::node: return "node";
    case DimKind::period: return "period";
    case DimKind::warehouse: return "warehouse";
    case DimKind::custom: return "custom";
  }
  return "?";
}

DimKind dim_kind_from_name(const std::string& s) {
  if (s == "item") return DimKind::item;
  if (s == "node") return DimKind::node;
  if (s == "period") return DimKind::period;
  if (s == "warehouse") return DimKind::warehouse;
  if (s == "custom") return DimKind::custom;
  throw std::invalid_argument("unknown dim kind '" + s + "'");
}

std::string field_role_name(FieldRoleKind r) {
  switch (r) {
    case FieldRoleKind::cost: return "cost";
    case FieldRoleKind::capacity: return "capacity";
    case FieldRoleKind::inflow: return "inflow";
    case FieldRoleKind::demand: return "demand";
    case FieldRoleKind::inventory: return "inventory";
    case FieldRoleKind::other: return "other";
  }
  return "?";
}

FieldRoleKind field_role_from_name(const std::string& s) {
  if (s == "cost") return FieldRoleKind::cost;
  if (s == "capacity") return FieldRoleKind::capacity;
  if (s == "inflow") return FieldRoleKind::inflow;
  if (s == "demand") return FieldRoleKind::demand;
  if (s == "inventory") return FieldRoleKind::inventory;
  if (s == "other") return FieldRoleKind::other;
  throw std::invalid_argument("unknown field role '" + s + "'");
}

// --- accessors ---------------------------------------------------------------

const IndexSet* FormulationIR::find_set(const std::string& n) const {
  for (const auto& s : sets)
    if (s.name == n) return &s;
  return nullptr;
}

const Parameter* FormulationIR::find_parameter(const std::string& n) const {
  for (const auto& p : parameters)
    if (p.name == n) return &p;
  return nullptr;
}

Parameter* FormulationIR::find_parameter(const std::string& n) {
  for (auto& p : parameters)
    if (p.name == n) return &p;
  return nullptr;
}

const Variable* FormulationIR::find_variable(const std::string& n) const {
  for (const auto& v : variables)
    if (v.name == n) return &v;
  return nullptr;
}

const Variable* FormulationIR::public_variable() const {
  for (const auto& v : variables)
    if (v.visibility == Visibility::public_decision) return &v;
  return nullptr;
}

// --- validation --------------------------------------------------------------

namespace {

long shape_count(const FormulationIR& ir, const std::vector<std::string>& shape) {
  long n = 1;
  for (const auto& s : shape) {
    const IndexSet* is = ir.find_set(s);
    if (!is) return -1;
    n *= is->size;
  }
  return n;
}

void check_offsets_on_quantifiers(const LinearConstraint& c,
                                  std::vector<std::string>& errors) {
  std::set<std::string> quant;
  for (const auto& q : c.quantifiers) quant.insert(q.index);
  auto visit = [&](const std::vector<IndexRef>& idx) {
    for (const auto& r : idx) {
      if (!r.is_literal() && r.offset != 0 && !quant.count(r.symbol)) {
        errors.push_back("constraint '" + c.name + "': offset on summed index '" +
                         r.symbol + "'");
      }
    }
  };
  for (const auto& t : c.lhs) {
    visit(t.var.indices);
    for (const auto& p : t.coef.params) visit(p.indices);
  }
}

}  // namespace

ValidationReport validate(const FormulationIR& ir) {
  ValidationReport rep;
  auto& errors = rep.errors;

  std::set<std::string> names;
  for (const auto& s : ir.sets) {
    if (!names.insert(s.name).second)
      errors.push_back("duplicate set name '" + s.name + "'");
    if (s.size < 1) errors.push_back("set '" + s.name + "' has size < 1");
  }
  names.clear();
  for (const auto& p : ir.parameters) {
    if (!names.insert(p.name).second)
      errors.push_back("duplicate parameter name '" + p.name + "'");
    long n = shape_count(ir, p.shape);
    if (n < 0) {
      errors.push_back("parameter '" + p.name + "' has an unknown shape set");
    } else if (static_cast<long>(p.values.size()) != n) {
      errors.push_back("parameter '" + p.name + "' has " +
                       std::to_string(p.values.size()) + " values, expected " +
                       std::to_string(n));
    }
  }
  for (const auto& v : ir.variables) {
    if (!names.insert(v.name).second)
      errors.push_back("duplicate variable/parameter name '" + v.name + "'");
    if (shape_count(ir, v.shape) < 0)
      errors.push_back("variable '" + v.name + "' has an unknown shape set");
    if (v.lower > v.upper)
      errors.push_back("variable '" + v.name + "' has lower > upper");
  }

  // exactly one public variable shaped (item, node, period)
  int publics = 0;
  for (const auto& v : ir.variables) {
    if (v.visibility != Visibility::public_decision) continue;
    ++publics;
    bool shaped = v.shape.size() == 3;
    if (shaped) {
      const DimKind want[3] = {DimKind::item, DimKind::node, DimKind::period};
      for (int k = 0; k < 3; ++k) {
        const IndexSet* s = ir.find_set(v.shape[k]);
        if (!s || s->dim != want[k]) shaped = false;
      }
    }
    if (!shaped) {
      errors.push_back("public variable '" + v.name +
                       "' must be shaped (item, node, period)");
    }
  }
  if (publics == 0) errors.push_back("no public variable");
  if (publics > 1) errors.push_back("more than one public variable");

  for (const auto& c : ir.constraints) {
    ir_eval::constraint_scope(ir, c, &errors);
    check_offsets_on_quantifiers(c, errors);
  }

  for (const auto& t : ir.objective) {
    bool has_a = t.var_a.has_value(), has_b = t.var_b.has_value();
    switch (t.kind) {
      case TermKind::linear_var:
        if (!has_a || has_b)
          errors.push_back("objective term '" + t.name +
                           "' (linear_var) must reference exactly one variable");
        break;
      case TermKind::quadratic_var:
        if (!has_a || !has_b)
          errors.push_back("objective term '" + t.name +
                           "' (quadratic_var) must reference two variable factors");
        break;
      case TermKind::const_data:
        if (has_a || has_b)
          errors.push_back("objective term '" + t.name +
                           "' (const_data) must not reference variables");
        break;
    }
    ir_eval::Scope scope = ir_eval::term_scope(ir, t, &errors);
    for (const auto& ref :
         {t.var_a ? &*t.var_a : nullptr, t.var_b ? &*t.var_b : nullptr}) {
      if (!ref) continue;
      for (const auto& r : ref->indices) {
        if (!r.is_literal() && r.offset != 0)
          errors.push_back("objective term '" + t.name +
                           "': offsets are not allowed on objective indices");
      }
    }
    if (t.kind == TermKind::quadratic_var && has_a && has_b) {
      if (!(*t.var_a == *t.var_b)) {
        errors.push_back("objective term '" + t.name +
                         "' is a cross product; only diagonal squares are convex "
                         "in this IR");
      } else if (errors.empty()) {
        // effective square coefficient must be >= 0 at every binding
        bool negative = false;
        ir_eval::for_each_binding(scope, [&](const ir_eval::Binding& b) {
          auto c = ir_eval::eval_coef(ir, t.coef, scope, b);
          if (c && t.weight * *c < 0.0) negative = true;
        });
        if (negative) {
          errors.push_back("objective term '" + t.name +
                           "' has a negative square coefficient (non-convex)");
        }
      }
    }
  }

  return rep;
}

// --- static evidence queries ---------------------------------------------------

namespace {

FieldRoleKind role_of_field(const std::vector<FieldInfo>& fields,
                            const std::string& name) {
  for (const auto& f : fields)
    if (f.name == name) return f.role;
  return FieldRoleKind::other;
}

}  // namespace

std::vector<TermFlag> find_cost_data_antipatterns(
    const FormulationIR& ir, const std::vector<FieldInfo>& fields) {
  std::vector<TermFlag> flags;
  for (const auto& t : ir.objective) {
    if (t.kind != TermKind::const_data) continue;
    for (const auto& pr : t.coef.params) {
      const Parameter* p = ir.find_parameter(pr.name);
      if (!p) continue;
      if (role_of_field(fields, p->source_field) == FieldRoleKind::cost) {
        flags.push_back(TermFlag{
            t.name, p->name,
            "objective term '" + t.name + "' multiplies cost parameter '" +
                p->name + "' into fixed data instead of a decision variable"});
        break;
      }
    }
  }
  return flags;
}

AuditReport audit_decision_variables(const FormulationIR& ir,
                                     const std::vector<std::string>& expected_roles) {
  AuditReport rep;

  for (const auto& role : expected_roles) {
    bool found = false;
    for (const auto& v : ir.variables) {
      if (v.visibility == Visibility::private_decision && v.role == role) {
        found = true;
        break;
      }
    }
    if (!found) rep.missing_roles.push_back(role);
  }

  for (const auto& v : ir.variables) {
    if (v.visibility != Visibility::private_decision) continue;
    bool matches = false;
    for (const auto& role : expected_roles)
      if (v.role == role) matches = true;
    if (!matches) rep.unexpected_variables.push_back(v.name);
  }

  // connectivity: a private decision must reach the public plan through the
  // constraint graph, else it cannot implement the described decision
  const Variable* pub = ir.public_variable();
  if (pub) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& c : ir.constraints) {
      std::set<std::string> vars;
      for (const auto& t : c.lhs) vars.insert(t.var.name);
      for (const auto& a : vars)
        for (const auto& b : vars)
          if (a != b) adj[a].insert(b);
    }
    std::set<std::string> reached;
    std::queue<std::string> frontier;
    frontier.push(pub->name);
    reached.insert(pub->name);
    while (!frontier.empty()) {
      auto cur = frontier.front();
      frontier.pop();
      for (const auto& nxt : adj[cur]) {
        if (reached.insert(nxt).second) frontier.push(nxt);
      }
    }
    for (const auto& v : ir.variables) {
      if (v.visibility == Visibility::private_decision && !reached.count(v.name))
        rep.disconnected_variables.push_back(v.name);
    }
  }

  return rep;
}

std::vector<std::string> find_missing_cost_parameters(
    const FormulationIR& ir, const std::vector<FieldInfo>& fields) {
  // cost fields must be the source of a parameter referenced by an objective
  // term; use in a constraint alone does not count
  std::set<std::string> used;
  for (const auto& t : ir.objective) {
    for (const auto& pr : t.coef.params) {
      const Parameter* p = ir.find_parameter(pr.name);
      if (p) used.insert(p->source_field);
    }
  }
  std::vector<std::string> missing;
  for (const auto& f : fields) {
    if (f.role == FieldRoleKind::cost && !used.count(f.name))
      missing.push_back(f.name);
  }
  return missing;
}

// --- canonical form ------------------------------------------------------------

namespace {

std::string index_key(const IndexRef& r) {
  if (r.is_literal()) return "#" + std::to_string(r.literal);
  return r.symbol + (r.offset ? (r.offset > 0 ? "+" : "") + std::to_string(r.offset)
                              : std::string());
}

std::string coef_key(const CoefExpr& c) {
  std::ostringstream os;
  os << c.literal;
  for (const auto& p : c.params) {
    os << "*" << p.name << "(";
    for (const auto& r : p.indices) os << index_key(r) << ",";
    os << ")";
  }
  return os.str();
}

void sort_coef(CoefExpr& c) {
  std::sort(c.params.begin(), c.params.end());
}

/// Skeleton of a constraint term with summed symbols neutralized, used to
/// order terms before summation symbols are renamed.
std::string term_skeleton(const ConstraintTerm& t,
                          const std::set<std::string>& quantified) {
  std::ostringstream os;
  os << t.var.name << "(";
  for (const auto& r : t.var.indices) {
    if (!r.is_literal() && !quantified.count(r.symbol))
      os << "*,";
    else
      os << index_key(r) << ",";
  }
  os << ")" << coef_key(t.coef);
  return os.str();
}

void rename_refs(std::vector<IndexRef>& idx,
                 const std::map<std::string, std::string>& ren) {
  for (auto& r : idx) {
    if (r.is_literal()) continue;
    auto it = ren.find(r.symbol);
    if (it != ren.end()) r.symbol = it->second;
  }
}

void rename_coef(CoefExpr& c, const std::map<std::string, std::string>& ren) {
  for (auto& p : c.params) rename_refs(p.indices, ren);
}

}  // namespace

FormulationIR canonical(const FormulationIR& ir) {
  FormulationIR out = ir;

  auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
  std::sort(out.sets.begin(), out.sets.end(), by_name);
  std::sort(out.parameters.begin(), out.parameters.end(), by_name);
  std::sort(out.variables.begin(), out.variables.end(), by_name);
  std::sort(out.constraints.begin(), out.constraints.end(), by_name);
  std::sort(out.objective.begin(), out.objective.end(), by_name);

  for (auto& c : out.constraints) {
    // quantifiers in (set, symbol) order, renamed q0, q1, ...
    std::sort(c.quantifiers.begin(), c.quantifiers.end(),
              [](const Quantifier& a, const Quantifier& b) {
                return std::tie(a.set, a.index) < std::tie(b.set, b.index);
              });
    std::map<std::string, std::string> ren;
    for (size_t k = 0; k < c.quantifiers.size(); ++k) {
      ren[c.quantifiers[k].index] = "q" + std::to_string(k);
    }
    std::set<std::string> quantified;
    for (auto& q : c.quantifiers) {
      quantified.insert(q.index);
      q.index = ren[q.index];
    }

    std::stable_sort(c.lhs.begin(), c.lhs.end(),
                     [&](const ConstraintTerm& a, const ConstraintTerm& b) {
                       return term_skeleton(a, quantified) < term_skeleton(b, quantified);
                     });

    // summed symbols renamed s0, s1, ... by first appearance in sorted order
    int next = 0;
    for (auto& t : c.lhs) {
      for (auto& r : t.var.indices) {
        if (r.is_literal() || quantified.count(r.symbol) || ren.count(r.symbol))
          continue;
        ren[r.symbol] = "s" + std::to_string(next++);
      }
    }
    for (auto& t : c.lhs) {
      rename_refs(t.var.indices, ren);
      rename_coef(t.coef, ren);
      sort_coef(t.coef);
    }
    for (auto& t : c.rhs.terms) rename_coef(t, ren);
    std::sort(c.rhs.terms.begin(), c.rhs.terms.end(),
              [](const CoefExpr& a, const CoefExpr& b) {
                return coef_key(a) < coef_key(b);
              });
    for (auto& t : c.rhs.terms) sort_coef(t);
  }

  for (auto& t : out.objective) {
    // objective symbols renamed by slot order: var_a, var_b, then coef params
    std::map<std::string, std::string> ren;
    int next = 0;
    auto visit = [&](const std::vector<IndexRef>& idx) {
      for (const auto& r : idx) {
        if (r.is_literal() || ren.count(r.symbol)) continue;
        ren[r.symbol] = "s" + std::to_string(next++);
      }
    };
    if (t.var_a) visit(t.var_a->indices);
    if (t.var_b) visit(t.var_b->indices);
    for (const auto& p : t.coef.params) visit(p.indices);
    if (t.var_a) rename_refs(t.var_a->indices, ren);
    if (t.var_b) rename_refs(t.var_b->indices, ren);
    rename_coef(t.coef, ren);
    sort_coef(t.coef);
  }

  return out;
}

bool structurally_equal(const FormulationIR& a, const FormulationIR& b) {
  return canonical(a) == canonical(b);
}

void bind_parameters(
    FormulationIR& ir,
    const std::vector<std::pair<std::string, std::vector<double>>>& fields) {
  for (auto& p : ir.parameters) {
    const std::vector<double>* data = nullptr;
    for (const auto& [name, values] : fields) {
      if (name == p.source_field) data = &values;
    }
    if (!data) {
      if (p.values.empty()) {
        throw std::invalid_argument("parameter '" + p.name +
                                    "' binds to unknown field '" + p.source_field +
                                    "'");
      }
      continue;  // keeps authored values
    }
    long want = shape_count(ir, p.shape);
    if (want >= 0 && static_cast<long>(data->size()) != want) {
      throw std::invalid_argument("field '" + p.source_field + "' has " +
                                  std::to_string(data->size()) +
                                  " values but parameter '" + p.name + "' needs " +
                                  std::to_string(want));
    }
    p.values = *data;
  }
}

// --- JSON --------------------------------------------------------------------

namespace {

json index_to_json(const IndexRef& r) {
  if (r.is_literal()) return r.literal;
  if (r.offset == 0) return r.symbol;
  return json{{"index", r.symbol}, {"offset", r.offset}};
}

IndexRef index_from_json(const json& j) {
  if (j.is_number_integer()) return IndexRef::lit(j.get<int>());
  if (j.is_string()) return IndexRef::sym(j.get<std::string>());
  return IndexRef::sym(j.at("index").get<std::string>(),
                       j.value("offset", 0));
}

json indices_to_json(const std::vector<IndexRef>& idx) {
  json a = json::array();
  for (const auto& r : idx) a.push_back(index_to_json(r));
  return a;
}

std::vector<IndexRef> indices_from_json(const json& j) {
  std::vector<IndexRef> out;
  for (const auto& e : j) out.push_back(index_from_json(e));
  return out;
}

json coef_to_json(const CoefExpr& c) {
  json o;
  o["literal"] = c.literal;
  json params = json::array();
  for (const auto& p : c.params) {
    params.push_back(json{{"name", p.name}, {"indices", indices_to_json(p.indices)}});
  }
  o["params"] = params;
  return o;
}

CoefExpr coef_from_json(const json& j) {
  CoefExpr c;
  c.literal = j.value("literal", 1.0);
  if (j.contains("params")) {
    for (const auto& p : j.at("params")) {
      c.params.push_back(ParamRef{p.at("name").get<std::string>(),
                                  indices_from_json(p.value("indices", json::array()))});
    }
  }
  return c;
}

json affine_to_json(const AffineExpr& e) {
  json a = json::array();
  for (const auto& t : e.terms) a.push_back(coef_to_json(t));
  return a;
}

AffineExpr affine_from_json(const json& j) {
  AffineExpr e;
  for (const auto& t : j) e.terms.push_back(coef_from_json(t));
  return e;
}

json bound_to_json(double b) {
  if (std::isinf(b)) return nullptr;
  return b;
}

double bound_from_json(const json& j, double inf_value) {
  if (j.is_null()) return inf_value;
  return j.get<double>();
}

}  // namespace

nlohmann::json ir_to_json(const FormulationIR& ir) {
  json o;
  o["schema_version"] = 1;
  o["name"] = ir.name;
  o["sense"] = "minimize";

  json sets = json::array();
  for (const auto& s : ir.sets) {
    sets.push_back(json{{"name", s.name}, {"size", s.size}, {"dim", dim_kind_name(s.dim)}});
  }
  o["sets"] = sets;

  json params = json::array();
  for (const auto& p : ir.parameters) {
    params.push_back(json{{"name", p.name},
                          {"shape", p.shape},
                          {"source_field", p.source_field},
                          {"values", p.values}});
  }
  o["parameters"] = params;

  json vars = json::array();
  for (const auto& v : ir.variables) {
    vars.push_back(json{
        {"name", v.name},
        {"shape", v.shape},
        {"visibility", v.visibility == Visibility::public_decision ? "public" : "private"},
        {"lower", bound_to_json(v.lower)},
        {"upper", bound_to_json(v.upper)},
        {"role", v.role}});
  }
  o["variables"] = vars;

  json cons = json::array();
  for (const auto& c : ir.constraints) {
    json quant = json::array();
    for (const auto& q : c.quantifiers)
      quant.push_back(json{{"index", q.index}, {"set", q.set}});
    json lhs = json::array();
    for (const auto& t : c.lhs) {
      lhs.push_back(json{{"coef", coef_to_json(t.coef)},
                         {"var", t.var.name},
                         {"indices", indices_to_json(t.var.indices)}});
    }
    cons.push_back(json{{"name", c.name},
                        {"quantifiers", quant},
                        {"lhs", lhs},
                        {"relation", relation_name(c.relation)},
                        {"rhs", affine_to_json(c.rhs)}});
  }
  o["constraints"] = cons;

  json obj = json::array();
  for (const auto& t : ir.objective) {
    json e;
    e["name"] = t.name;
    e["kind"] = term_kind_name(t.kind);
    e["weight"] = t.weight;
    e["coef"] = coef_to_json(t.coef);
    if (t.var_a)
      e["var_a"] = json{{"name", t.var_a->name}, {"indices", indices_to_json(t.var_a->indices)}};
    if (t.var_b)
      e["var_b"] = json{{"name", t.var_b->name}, {"indices", indices_to_json(t.var_b->indices)}};
    obj.push_back(e);
  }
  o["objective"] = obj;

  return o;
}

FormulationIR ir_from_json(const nlohmann::json& o) {
  FormulationIR ir;
  ir.name = o.value("name", "");

  for (const auto& s : o.value("sets", json::array())) {
    ir.sets.push_back(IndexSet{s.at("name").get<std::string>(),
                               s.at("size").get<int>(),
                               dim_kind_from_name(s.value("dim", "custom"))});
  }
  for (const auto& p : o.value("parameters", json::array())) {
    Parameter param;
    param.name = p.at("name").get<std::string>();
    param.shape = p.value("shape", std::vector<std::string>{});
    param.source_field = p.value("source_field", param.name);
    param.values = p.value("values", std::vector<double>{});
    ir.parameters.push_back(std::move(param));
  }
  for (const auto& v : o.value("variables", json::array())) {
    Variable var;
    var.name = v.at("name").get<std::string>();
    var.shape = v.value("shape", std::vector<std::string>{});
    var.visibility = v.value("visibility", std::string("private")) == "public"
                         ? Visibility::public_decision
                         : Visibility::private_decision;
    var.lower = bound_from_json(v.value("lower", json(0.0)),
                                -std::numeric_limits<double>::infinity());
    var.upper = bound_from_json(v.value("upper", json()),
                                std::numeric_limits<double>::infinity());
    var.role = v.value("role", "");
    ir.variables.push_back(std::move(var));
  }
  for (const auto& c : o.value("constraints", json::array())) {
    LinearConstraint lc;
    lc.name = c.at("name").get<std::string>();
    for (const auto& q : c.value("quantifiers", json::array())) {
      lc.quantifiers.push_back(Quantifier{q.at("index").get<std::string>(),
                                          q.at("set").get<std::string>()});
    }
    for (const auto& t : c.value("lhs", json::array())) {
      lc.lhs.push_back(ConstraintTerm{
          coef_from_json(t.value("coef", json::object())),
          VarRef{t.at("var").get<std::string>(),
                 indices_from_json(t.value("indices", json::array()))}});
    }
    lc.relation = relation_from_name(c.at("relation").get<std::string>());
    lc.rhs = affine_from_json(c.value("rhs", json::array()));
    ir.constraints.push_back(std::move(lc));
  }
  for (const auto& t : o.value("objective", json::array())) {
    ObjectiveTerm term;
    term.name = t.at("name").get<std::string>();
    term.kind = term_kind_from_name(t.at("kind").get<std::string>());
    term.weight = t.value("weight", 1.0);
    term.coef = coef_from_json(t.value("coef", json::object()));
    if (t.contains("var_a")) {
      term.var_a = VarRef{t.at("var_a").at("name").get<std::string>(),
                          indices_from_json(t.at("var_a").value("indices", json::array()))};
    }
    if (t.contains("var_b")) {
      term.var_b = VarRef{t.at("var_b").at("name").get<std::string>(),
                          indices_from_json(t.at("var_b").value("indices", json::array()))};
    }
    ir.objective.push_back(std::move(term));
  }
  return ir;
}

}  // namespace optiloop
