#include "spsched/oracle.h"

#include "spsched/error.h"

namespace spsched {

std::map<IndexVar, int> indexVarExtents(const Assignment& assignment,
                                        const TensorMap& inputs) {
  std::map<IndexVar, int> extents;
  for (const Access& access : assignment.inputAccesses()) {
    auto it = inputs.find(access.tensor);
    if (it == inputs.end()) {
      throw Error(ErrorCode::UnboundTensor, "tensor '" + access.tensor + "' is not bound");
    }
    const Tensor& t = it->second;
    if (t.order() != access.vars.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "tensor '" + access.tensor + "' has order " +
                      std::to_string(t.order()) + " but is accessed with " +
                      std::to_string(access.vars.size()) + " variables");
    }
    for (size_t k = 0; k < access.vars.size(); ++k) {
      auto [pos, fresh] = extents.emplace(access.vars[k], t.dims()[k]);
      if (!fresh && pos->second != t.dims()[k]) {
        throw Error(ErrorCode::DimensionMismatch,
                    "index variable '" + access.vars[k].name() +
                        "' has extent " + std::to_string(pos->second) +
                        " and " + std::to_string(t.dims()[k]));
      }
    }
  }
  return extents;
}

namespace {

struct DenseOperand {
  DenseTensor data;
  std::vector<size_t> slots;  // index of each access variable in the odometer
};

double evaluate(const Expr& e, const std::map<std::string, DenseOperand>& operands,
                const std::map<std::string, std::vector<size_t>>& accessSlots,
                const std::vector<int>& point) {
  switch (e->kind) {
    case ExprKind::Literal:
      return e->value;
    case ExprKind::Mul:
      return evaluate(e->a, operands, accessSlots, point) *
             evaluate(e->b, operands, accessSlots, point);
    case ExprKind::Add:
      return evaluate(e->a, operands, accessSlots, point) +
             evaluate(e->b, operands, accessSlots, point);
    case ExprKind::Access: {
      const DenseOperand& op = operands.at(e->access.tensor);
      const auto& slots = accessSlots.at(toString(e->access));
      size_t off = 0;
      for (size_t k = 0; k < slots.size(); ++k) {
        off = off * static_cast<size_t>(op.data.dims[k]) + static_cast<size_t>(point[slots[k]]);
      }
      return op.data.vals[off];
    }
    case ExprKind::Workspace:
      break;
  }
  throw Error(ErrorCode::Unsupported, "workspace reads have no dense meaning");
}

}  // namespace

DenseTensor denseEval(const Assignment& assignment, const TensorMap& inputs) {
  std::map<IndexVar, int> extents = indexVarExtents(assignment, inputs);

  std::vector<IndexVar> vars = assignment.defaultOrder();
  std::map<IndexVar, size_t> slotOf;
  for (size_t s = 0; s < vars.size(); ++s) slotOf[vars[s]] = s;

  std::map<std::string, DenseOperand> operands;
  std::map<std::string, std::vector<size_t>> accessSlots;
  for (const Access& access : assignment.inputAccesses()) {
    if (!operands.count(access.tensor)) {
      const Tensor& t = inputs.at(access.tensor);
      DenseOperand op{DenseTensor(t.dims()), {}};
      for (const CooEntry& entry : enumerate(t)) op.data.at(entry.coord) = entry.value;
      operands.emplace(access.tensor, std::move(op));
    }
    std::vector<size_t> slots;
    for (const IndexVar& v : access.vars) slots.push_back(slotOf.at(v));
    accessSlots[toString(access)] = std::move(slots);
  }

  std::vector<int> outDims;
  for (const IndexVar& v : assignment.lhs.vars) outDims.push_back(extents.at(v));
  DenseTensor out(outDims);

  std::vector<int> bound;
  for (const IndexVar& v : vars) bound.push_back(extents.at(v));
  for (int b : bound) {
    if (b == 0) return out;
  }
  std::vector<int> point(vars.size(), 0);
  std::vector<int> outCoord(assignment.lhs.vars.size());
  while (true) {
    double v = evaluate(assignment.rhs, operands, accessSlots, point);
    for (size_t k = 0; k < outCoord.size(); ++k) outCoord[k] = point[k];
    out.at(outCoord) += v;
    // odometer, last variable fastest
    size_t k = vars.size();
    while (k > 0) {
      --k;
      if (++point[k] < bound[k]) break;
      point[k] = 0;
      if (k == 0) return out;
    }
    if (vars.empty()) return out;
  }
}

}  // namespace spsched
