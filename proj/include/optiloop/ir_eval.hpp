#pragma once

#include "optiloop/formulation.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Index-binding machinery shared by validation, QP compilation and fault
// injection. Symbols resolve against a Scope; enumeration walks every
// binding of the scope in row-major order (first symbol outermost), which
// fixes instantiation order everywhere.

namespace optiloop::ir_eval {

struct Scope {
  std::vector<std::string> symbols;
  std::vector<std::string> sets;
  std::vector<int> sizes;

  int find(const std::string& sym) const {
    for (size_t k = 0; k < symbols.size(); ++k) {
      if (symbols[k] == sym) return static_cast<int>(k);
    }
    return -1;
  }

  /// Registers `sym` against set `set_name`; complains on inconsistent reuse.
  void bind(const FormulationIR& ir, const std::string& sym,
            const std::string& set_name, std::vector<std::string>* errors) {
    const IndexSet* s = ir.find_set(set_name);
    if (!s) {
      if (errors) errors->push_back("unknown index set '" + set_name + "'");
      return;
    }
    int pos = find(sym);
    if (pos < 0) {
      symbols.push_back(sym);
      sets.push_back(set_name);
      sizes.push_back(s->size);
    } else if (sets[pos] != set_name) {
      if (errors) {
        errors->push_back("index symbol '" + sym + "' bound to both '" +
                          sets[pos] + "' and '" + set_name + "'");
      }
    }
  }
};

using Binding = std::vector<int>;

inline void for_each_binding(const Scope& scope,
                             const std::function<void(const Binding&)>& fn) {
  Binding b(scope.symbols.size(), 0);
  if (b.empty()) {
    fn(b);
    return;
  }
  while (true) {
    fn(b);
    int k = static_cast<int>(b.size()) - 1;
    while (k >= 0) {
      if (++b[k] < scope.sizes[k]) break;
      b[k] = 0;
      --k;
    }
    if (k < 0) return;
  }
}

/// Resolves one IndexRef to a concrete element of a set of size `size`.
/// nullopt means the reference fell outside the set (offset drop).
inline std::optional<int> resolve_index(const IndexRef& r, const Scope& scope,
                                        const Binding& b, int size) {
  int v = 0;
  if (r.is_literal()) {
    v = r.literal;
  } else {
    int pos = scope.find(r.symbol);
    if (pos < 0) throw std::logic_error("unbound index symbol '" + r.symbol + "'");
    v = b[pos] + r.offset;
  }
  if (v < 0 || v >= size) return std::nullopt;
  return v;
}

/// Flat row-major offset of a shaped reference, or nullopt when any index
/// dropped out of range.
template <typename Shaped>
std::optional<long> flat_offset(const FormulationIR& ir, const Shaped& entity,
                                const std::vector<IndexRef>& indices,
                                const Scope& scope, const Binding& b) {
  long flat = 0;
  for (size_t k = 0; k < entity.shape.size(); ++k) {
    const IndexSet* s = ir.find_set(entity.shape[k]);
    if (!s) throw std::logic_error("unknown set in shape of '" + entity.name + "'");
    auto idx = resolve_index(indices[k], scope, b, s->size);
    if (!idx) return std::nullopt;
    flat = flat * s->size + *idx;
  }
  return flat;
}

inline std::optional<double> eval_param(const FormulationIR& ir, const ParamRef& ref,
                                        const Scope& scope, const Binding& b) {
  const Parameter* p = ir.find_parameter(ref.name);
  if (!p) throw std::logic_error("unknown parameter '" + ref.name + "'");
  auto off = flat_offset(ir, *p, ref.indices, scope, b);
  if (!off) return std::nullopt;
  return p->values.at(static_cast<size_t>(*off));
}

inline std::optional<double> eval_coef(const FormulationIR& ir, const CoefExpr& c,
                                       const Scope& scope, const Binding& b) {
  double v = c.literal;
  for (const auto& pr : c.params) {
    auto pv = eval_param(ir, pr, scope, b);
    if (!pv) return std::nullopt;
    v *= *pv;
  }
  return v;
}

inline std::optional<double> eval_affine(const FormulationIR& ir, const AffineExpr& e,
                                         const Scope& scope, const Binding& b) {
  double v = 0.0;
  for (const auto& t : e.terms) {
    auto tv = eval_coef(ir, t, scope, b);
    if (tv) v += *tv;
  }
  return v;
}

// --- scope construction -----------------------------------------------------

/// Adds the symbols of a shaped reference to `scope`, inferring each
/// symbol's set from the slot it occupies.
template <typename Shaped>
void infer_symbols(const FormulationIR& ir, const Shaped& entity,
                   const std::vector<IndexRef>& indices, Scope& scope,
                   std::vector<std::string>* errors) {
  if (indices.size() != entity.shape.size()) {
    if (errors) {
      errors->push_back("'" + entity.name + "' referenced with " +
                        std::to_string(indices.size()) + " indices, expected " +
                        std::to_string(entity.shape.size()));
    }
    return;
  }
  for (size_t k = 0; k < indices.size(); ++k) {
    const IndexRef& r = indices[k];
    if (r.is_literal()) {
      const IndexSet* s = ir.find_set(entity.shape[k]);
      if (s && (r.literal < 0 || r.literal >= s->size) && errors) {
        errors->push_back("literal index " + std::to_string(r.literal) +
                          " out of range for set '" + entity.shape[k] + "' in '" +
                          entity.name + "'");
      }
      continue;
    }
    scope.bind(ir, r.symbol, entity.shape[k], errors);
  }
}

inline void infer_coef_symbols(const FormulationIR& ir, const CoefExpr& c,
                               Scope& scope, std::vector<std::string>* errors) {
  for (const auto& pr : c.params) {
    const Parameter* p = ir.find_parameter(pr.name);
    if (!p) {
      if (errors) errors->push_back("unknown parameter '" + pr.name + "'");
      continue;
    }
    infer_symbols(ir, *p, pr.indices, scope, errors);
  }
}

/// Scope of a whole constraint: quantifiers first (in declaration order),
/// then any summation symbols in order of first appearance.
inline Scope constraint_scope(const FormulationIR& ir, const LinearConstraint& c,
                              std::vector<std::string>* errors) {
  Scope scope;
  for (const auto& q : c.quantifiers) scope.bind(ir, q.index, q.set, errors);
  size_t n_quant = scope.symbols.size();
  for (const auto& term : c.lhs) {
    const Variable* v = ir.find_variable(term.var.name);
    if (!v) {
      if (errors) {
        errors->push_back("constraint '" + c.name + "' references unknown variable '" +
                          term.var.name + "'");
      }
      continue;
    }
    infer_symbols(ir, *v, term.var.indices, scope, errors);
    infer_coef_symbols(ir, term.coef, scope, errors);
  }
  // rhs must not introduce new (summed) symbols
  Scope rhs_probe = scope;
  for (const auto& t : c.rhs.terms) infer_coef_symbols(ir, t, rhs_probe, errors);
  if (errors && rhs_probe.symbols.size() > scope.symbols.size()) {
    errors->push_back("constraint '" + c.name +
                      "' rhs uses index symbols not bound on the lhs");
  }
  (void)n_quant;
  return scope;
}

/// Scope of one objective term; every symbol is summed.
inline Scope term_scope(const FormulationIR& ir, const ObjectiveTerm& t,
                        std::vector<std::string>* errors) {
  Scope scope;
  auto add_var = [&](const std::optional<VarRef>& vr) {
    if (!vr) return;
    const Variable* v = ir.find_variable(vr->name);
    if (!v) {
      if (errors) {
        errors->push_back("objective term '" + t.name +
                          "' references unknown variable '" + vr->name + "'");
      }
      return;
    }
    infer_symbols(ir, *v, vr->indices, scope, errors);
  };
  add_var(t.var_a);
  add_var(t.var_b);
  infer_coef_symbols(ir, t.coef, scope, errors);
  return scope;
}

}  // namespace optiloop::ir_eval
