#include "spsched/schedule.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "spsched/error.h"

namespace spsched {

const char* toString(ParallelUnit unit) {
  switch (unit) {
    case ParallelUnit::CPUThread: return "CPUThread";
    case ParallelUnit::CPUVector: return "CPUVector";
    case ParallelUnit::GPUBlock: return "GPUBlock";
    case ParallelUnit::GPUWarp: return "GPUWarp";
    case ParallelUnit::GPUThread: return "GPUThread";
  }
  return "?";
}

const char* toString(RaceStrategy strategy) {
  switch (strategy) {
    case RaceStrategy::NoRaces: return "NoRaces";
    case RaceStrategy::IgnoreRaces: return "IgnoreRaces";
    case RaceStrategy::Atomics: return "Atomics";
    case RaceStrategy::Temporary: return "Temporary";
  }
  return "?";
}

ParallelUnit parseParallelUnit(const std::string& text) {
  for (auto u : {ParallelUnit::CPUThread, ParallelUnit::CPUVector, ParallelUnit::GPUBlock,
                 ParallelUnit::GPUWarp, ParallelUnit::GPUThread}) {
    if (text == toString(u)) return u;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown parallel unit '" + text + "'");
}

RaceStrategy parseRaceStrategy(const std::string& text) {
  for (auto s : {RaceStrategy::NoRaces, RaceStrategy::IgnoreRaces, RaceStrategy::Atomics,
                 RaceStrategy::Temporary}) {
    if (text == toString(s)) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown race strategy '" + text + "'");
}

BoundType parseBoundType(const std::string& text) {
  if (text == "MaxExact") return BoundType::MaxExact;
  throw Error(ErrorCode::Unsupported, "unsupported bound type '" + text + "'");
}

std::optional<ParallelTag> ScheduledStmt::parallelTag(const IndexVar& var) const {
  auto it = parallel_.find(var);
  if (it == parallel_.end()) return std::nullopt;
  return it->second;
}

int ScheduledStmt::unrollFactor(const IndexVar& var) const {
  auto it = unroll_.find(var);
  return it == unroll_.end() ? 1 : it->second;
}

bool ScheduledStmt::races(const IndexVar& var) const {
  for (const auto& origin : provenance_.origins(var)) {
    if (assignment_.isReduction(origin)) return true;
  }
  return false;
}

void ScheduledStmt::requireInForest(const IndexVar& var, const char* op) const {
  if (!graph_.contains(var)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(op) + ": '" + var.name() + "' is not a loop variable");
  }
}

void ScheduledStmt::requireUntagged(const IndexVar& var, const char* op) const {
  if (parallel_.count(var) || unroll_.count(var)) {
    throw Error(ErrorCode::TaggedVariable,
                std::string(op) + ": '" + var.name() + "' carries a parallel or unroll tag");
  }
  if (precompute_ && precompute_->var == var) {
    throw Error(ErrorCode::TaggedVariable,
                std::string(op) + ": '" + var.name() + "' is precomputed");
  }
}

void ScheduledStmt::replaceInForest(const IndexVar& var, const std::vector<IndexVar>& with) {
  auto& f = graph_.forest;
  auto it = std::find(f.begin(), f.end(), var);
  it = f.erase(it);
  f.insert(it, with.begin(), with.end());
}

ScheduledStmt ScheduledStmt::checked() const {
  validateGraph(*this);
  return *this;
}

namespace {

bool hasUnionOrigin(const ScheduledStmt& s, const IndexVar& var) {
  for (const auto& o : s.provenance().origins(var)) {
    auto it = s.graph().merge.find(o);
    if (it != s.graph().merge.end() && it->second == MergeKind::Union) return true;
  }
  return false;
}

}  // namespace

ScheduledStmt ScheduledStmt::reorder(const std::vector<IndexVar>& ordered) const {
  std::set<IndexVar> seen;
  std::vector<int> depths;
  for (const auto& v : ordered) {
    requireInForest(v, "reorder");
    if (!seen.insert(v).second) {
      throw Error(ErrorCode::InvalidArgument, "reorder: '" + v.name() + "' listed twice");
    }
    depths.push_back(graph_.depthOf(v));
  }
  if (ordered.empty()) return *this;
  int lo = *std::min_element(depths.begin(), depths.end());
  int hi = *std::max_element(depths.begin(), depths.end());
  if (hi - lo + 1 != static_cast<int>(ordered.size())) {
    throw Error(ErrorCode::NotDirectlyNested,
                "reorder: variables are not directly nested in the loop chain");
  }
  // A union merge may not be hoisted above a reduction it was nested in.
  for (size_t a = 0; a < ordered.size(); ++a) {
    for (size_t b = a + 1; b < ordered.size(); ++b) {
      const IndexVar& up = ordered[a];
      const IndexVar& down = ordered[b];
      if (graph_.depthOf(up) > graph_.depthOf(down) && hasUnionOrigin(*this, up) &&
          races(down) && provenance_.origins(up) != provenance_.origins(down)) {
        throw Error(ErrorCode::UnionMerge,
                    "reorder: cannot move union-merged '" + up.name() +
                        "' above reduction variable '" + down.name() + "'");
      }
    }
  }
  ScheduledStmt out = *this;
  std::copy(ordered.begin(), ordered.end(), out.graph_.forest.begin() + lo);
  return out.checked();
}

ScheduledStmt ScheduledStmt::fuse(const IndexVar& outer, const IndexVar& inner,
                                  const IndexVar& fused) const {
  requireInForest(outer, "fuse");
  requireInForest(inner, "fuse");
  if (graph_.depthOf(inner) != graph_.depthOf(outer) + 1) {
    throw Error(ErrorCode::NotDirectlyNested,
                "fuse: '" + inner.name() + "' is not directly nested in '" + outer.name() + "'");
  }
  requireUntagged(outer, "fuse");
  requireUntagged(inner, "fuse");
  ScheduledStmt out = *this;
  Relation rel;
  rel.kind = RelKind::Fuse;
  rel.parents = {outer, inner};
  rel.children = {fused};
  out.provenance_.add(rel);
  out.replaceInForest(outer, {fused});
  out.graph_.forest.erase(std::find(out.graph_.forest.begin(), out.graph_.forest.end(), inner));
  return out.checked();
}

ScheduledStmt ScheduledStmt::split(const IndexVar& var, const IndexVar& outer,
                                   const IndexVar& inner, int64_t innerSize) const {
  if (innerSize < 1) {
    throw Error(ErrorCode::InvalidArgument, "split: size must be at least 1");
  }
  requireInForest(var, "split");
  requireUntagged(var, "split");
  ScheduledStmt out = *this;
  Relation rel;
  rel.kind = RelKind::Split;
  rel.parents = {var};
  rel.children = {outer, inner};
  rel.size = innerSize;
  out.provenance_.add(rel);
  out.replaceInForest(var, {outer, inner});
  return out.checked();
}

ScheduledStmt ScheduledStmt::divide(const IndexVar& var, const IndexVar& outer,
                                    const IndexVar& inner, int64_t outerCount) const {
  if (outerCount < 1) {
    throw Error(ErrorCode::InvalidArgument, "divide: size must be at least 1");
  }
  requireInForest(var, "divide");
  requireUntagged(var, "divide");
  ScheduledStmt out = *this;
  Relation rel;
  rel.kind = RelKind::Divide;
  rel.parents = {var};
  rel.children = {outer, inner};
  rel.size = outerCount;
  out.provenance_.add(rel);
  out.replaceInForest(var, {outer, inner});
  return out.checked();
}

ScheduledStmt ScheduledStmt::pos(const IndexVar& var, const IndexVar& posVar,
                                 const std::string& tensor) const {
  std::vector<Access> accesses = assignment_.inputAccesses();
  int found = -1;
  for (size_t k = 0; k < accesses.size(); ++k) {
    if (accesses[k].tensor != tensor) continue;
    if (found >= 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "pos: tensor '" + tensor + "' is accessed more than once; name the access");
    }
    found = static_cast<int>(k);
  }
  if (found < 0) {
    throw Error(ErrorCode::UnboundTensor, "pos: tensor '" + tensor + "' is not an input");
  }
  return pos(var, posVar, accesses[found]);
}

ScheduledStmt ScheduledStmt::pos(const IndexVar& var, const IndexVar& posVar,
                                 const Access& access) const {
  requireInForest(var, "pos");
  requireUntagged(var, "pos");
  if (provenance_.space(var) != Space::Coordinate) {
    throw Error(ErrorCode::InvalidArgument,
                "pos: '" + var.name() + "' is already in position space");
  }
  std::vector<Access> accesses = assignment_.inputAccesses();
  int index = -1;
  for (size_t k = 0; k < accesses.size(); ++k) {
    if (accesses[k] == access) {
      index = static_cast<int>(k);
      break;
    }
  }
  if (index < 0) {
    throw Error(ErrorCode::UnboundTensor,
                "pos: access " + spsched::toString(access) + " does not occur in the expression");
  }
  std::vector<IndexVar> parts = provenance_.constituents(var);
  if (parts.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "pos: '" + var.name() + "' does not linearize coordinates of " +
                    spsched::toString(access));
  }
  auto first = std::search(access.vars.begin(), access.vars.end(), parts.begin(), parts.end());
  if (first == access.vars.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "pos: the coordinates of '" + var.name() +
                    "' are not consecutive levels of " + spsched::toString(access));
  }
  int m = static_cast<int>(first - access.vars.begin());
  int last = m + static_cast<int>(parts.size()) - 1;
  const Format& format = formats_.at(access.tensor);
  if (format[last].kind == LevelKind::Dense) {
    for (int k = m; k < last; ++k) {
      if (format[k].kind == LevelKind::Compressed) {
        throw Error(ErrorCode::DenseLevel,
                    "pos: level " + std::to_string(last) + " of " + access.tensor +
                        " is dense below a compressed level");
      }
    }
  }
  for (const auto& p : parts) {
    auto it = graph_.merge.find(p);
    if (it != graph_.merge.end() && it->second == MergeKind::Union) {
      throw Error(ErrorCode::UnionMerge,
                  "pos: '" + p.name() + "' merges operands by union");
    }
  }
  ScheduledStmt out = *this;
  Relation rel;
  rel.kind = RelKind::Pos;
  rel.parents = {var};
  rel.children = {posVar};
  rel.access = access;
  rel.accessIndex = index;
  rel.firstLevel = m;
  rel.level = last;
  out.provenance_.add(rel);
  out.replaceInForest(var, {posVar});
  return out.checked();
}

ScheduledStmt ScheduledStmt::coord(const IndexVar& posVar, const IndexVar& coordVar) const {
  requireInForest(posVar, "coord");
  const Relation* rel = provenance_.producer(posVar);
  if (!rel || rel->kind != RelKind::Pos) {
    throw Error(ErrorCode::NotPositionSpace,
                "coord: '" + posVar.name() + "' is not a variable produced by pos");
  }
  requireUntagged(posVar, "coord");
  ScheduledStmt out = *this;
  Relation c;
  c.kind = RelKind::Coord;
  c.parents = {posVar};
  c.children = {coordVar};
  out.provenance_.add(c);
  out.replaceInForest(posVar, {coordVar});
  return out.checked();
}

ScheduledStmt ScheduledStmt::parallelize(const IndexVar& var, ParallelUnit unit,
                                         RaceStrategy strategy) const {
  requireInForest(var, "parallelize");
  if (parallel_.count(var)) {
    throw Error(ErrorCode::DuplicateParallel,
                "parallelize: '" + var.name() + "' is already parallelized");
  }
  if (strategy == RaceStrategy::NoRaces && races(var)) {
    throw Error(ErrorCode::RaceDetected,
                "parallelize: iterations of '" + var.name() +
                    "' reduce into the same output location");
  }
  ScheduledStmt out = *this;
  out.parallel_[var] = {unit, strategy};
  return out.checked();
}

ScheduledStmt ScheduledStmt::unroll(const IndexVar& var, int factor) const {
  bool isPre = precompute_ && precompute_->preVar == var;
  if (!isPre) requireInForest(var, "unroll");
  if (factor < 1) throw Error(ErrorCode::InvalidArgument, "unroll: factor must be at least 1");
  if (!provenance_.structuralExtent(var)) {
    throw Error(ErrorCode::NonConstantExtent,
                "unroll: the extent of '" + var.name() + "' is not a compile-time constant");
  }
  ScheduledStmt out = *this;
  out.unroll_[var] = factor;
  return out;
}

ScheduledStmt ScheduledStmt::bound(const IndexVar& var, const IndexVar& bounded, int64_t bound,
                                   BoundType type) const {
  requireInForest(var, "bound");
  requireUntagged(var, "bound");
  if (bound < 1) throw Error(ErrorCode::InvalidArgument, "bound: bound must be at least 1");
  ScheduledStmt out = *this;
  Relation rel;
  rel.kind = RelKind::Bound;
  rel.parents = {var};
  rel.children = {bounded};
  rel.size = bound;
  rel.boundType = type;
  out.provenance_.add(rel);
  out.replaceInForest(var, {bounded});
  return out.checked();
}

ScheduledStmt ScheduledStmt::precompute(const Expr& expr, const IndexVar& var,
                                        const IndexVar& preVar,
                                        const std::string& workspace) const {
  if (!replaceSubexpr(assignment_.rhs, expr, makeLiteral(0.0))) {
    throw Error(ErrorCode::ExprNotFound,
                "precompute: " + spsched::toString(expr) + " is not part of the expression");
  }
  requireInForest(var, "precompute");
  if (precompute_) {
    throw Error(ErrorCode::Unsupported, "precompute: only one precompute per statement");
  }
  if (graph_.forest.back() != var) {
    throw Error(ErrorCode::Unsupported,
                "precompute: '" + var.name() + "' must be the innermost loop");
  }
  if (workspace.empty() || formats_.count(workspace) || workspace == assignment_.lhs.tensor) {
    throw Error(ErrorCode::InvalidArgument,
                "precompute: workspace name '" + workspace + "' is empty or taken");
  }
  ScheduledStmt out = *this;
  Relation rel;
  rel.kind = RelKind::Precompute;
  rel.parents = {var};
  rel.children = {preVar};
  out.provenance_.add(rel);
  out.precompute_ = PrecomputeRecord{expr, var, preVar, workspace};
  return out.checked();
}

std::string ScheduledStmt::toString() const {
  std::ostringstream os;
  os << spsched::toString(assignment_) << "\n";
  os << "loops:";
  for (const auto& v : graph_.forest) {
    os << " " << v.name();
    if (auto t = parallelTag(v)) {
      os << "[" << spsched::toString(t->unit) << "," << spsched::toString(t->strategy) << "]";
    }
    if (unrollFactor(v) != 1) os << "[unroll " << unrollFactor(v) << "]";
  }
  os << "\n" << provenance_.toString();
  return os.str();
}

ScheduledStmt concretize(const Assignment& assignment,
                         const std::map<std::string, Format>& formats,
                         std::optional<std::vector<IndexVar>> order) {
  ScheduledStmt s;
  s.assignment_ = assignment;
  for (const auto& access : assignment.inputAccesses()) {
    auto it = formats.find(access.tensor);
    if (it == formats.end()) {
      throw Error(ErrorCode::UnboundTensor, "no format for tensor '" + access.tensor + "'");
    }
    if (it->second.size() != access.vars.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "format of '" + access.tensor + "' has " + std::to_string(it->second.size()) +
                      " levels but the tensor is accessed with " +
                      std::to_string(access.vars.size()) + " variables");
    }
    s.formats_[access.tensor] = it->second;
  }
  if (auto it = formats.find(assignment.lhs.tensor); it != formats.end()) {
    for (const auto& level : it->second) {
      if (level.kind != LevelKind::Dense) {
        throw Error(ErrorCode::Unsupported, "sparse outputs are not supported");
      }
    }
  }
  std::vector<IndexVar> all = assignment.defaultOrder();
  std::vector<IndexVar> chain = order ? *order : all;
  std::vector<IndexVar> sortedChain = chain, sortedAll = all;
  std::sort(sortedChain.begin(), sortedChain.end());
  std::sort(sortedAll.begin(), sortedAll.end());
  if (sortedChain != sortedAll) {
    throw Error(ErrorCode::InvalidArgument,
                "concretize: order must be a permutation of the index variables");
  }
  s.graph_ = buildIterationGraph(assignment, s.formats_, chain);
  s.provenance_ = ProvenanceGraph(all);
  return s.checked();
}

}  // namespace spsched
