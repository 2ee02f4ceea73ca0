#pragma once

// Small hand-built formulations used across the unit tests: a single-warehouse
// transport model (public plan aggregated from shipments, capacity per item
// and week, linear transport cost by destination).

#include "optiloop/formulation.hpp"

#include <vector>

namespace optiloop::testing {

/// 2 items x 2 nodes x 3 periods, one warehouse, transport cost {2, 3} by
/// node, outbound capacity 150 per item and week.
inline FormulationIR mini_transport_ir() {
  FormulationIR ir;
  ir.name = "mini_transport";
  ir.sets = {IndexSet{"item", 2, DimKind::item},
             IndexSet{"node", 2, DimKind::node},
             IndexSet{"period", 3, DimKind::period},
             IndexSet{"warehouse", 1, DimKind::warehouse}};
  ir.parameters = {
      Parameter{"transport_cost", {"node"}, "transport_cost", {2.0, 3.0}},
      Parameter{"warehouse_capacity", {}, "warehouse_capacity", {150.0}},
  };
  Variable po{"po", {"item", "node", "period"}, Visibility::public_decision,
              0.0, std::numeric_limits<double>::infinity(), "purchase_order"};
  Variable ship{"ship", {"item", "warehouse", "node", "period"},
                Visibility::private_decision, 0.0,
                std::numeric_limits<double>::infinity(), "shipment"};
  ir.variables = {po, ship};

  LinearConstraint agg;
  agg.name = "order_aggregation";
  agg.quantifiers = {{"i", "item"}, {"j", "node"}, {"t", "period"}};
  agg.lhs = {
      {CoefExpr::lit(1.0), {"po", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}}},
      {CoefExpr::lit(-1.0),
       {"ship",
        {IndexRef::sym("i"), IndexRef::sym("w"), IndexRef::sym("j"), IndexRef::sym("t")}}},
  };
  agg.relation = Relation::eq;
  ir.constraints.push_back(agg);

  LinearConstraint cap;
  cap.name = "outbound_capacity";
  cap.quantifiers = {{"i", "item"}, {"w", "warehouse"}, {"t", "period"}};
  cap.lhs = {{CoefExpr::lit(1.0),
              {"ship",
               {IndexRef::sym("i"), IndexRef::sym("w"), IndexRef::sym("j"),
                IndexRef::sym("t")}}}};
  cap.relation = Relation::le;
  cap.rhs.terms = {CoefExpr::param("warehouse_capacity")};
  ir.constraints.push_back(cap);

  ObjectiveTerm transport;
  transport.name = "transport";
  transport.kind = TermKind::linear_var;
  transport.coef = CoefExpr::param("transport_cost", {IndexRef::sym("j")});
  transport.var_a =
      VarRef{"ship",
             {IndexRef::sym("i"), IndexRef::sym("w"), IndexRef::sym("j"), IndexRef::sym("t")}};
  ir.objective.push_back(transport);

  return ir;
}

}  // namespace optiloop::testing
