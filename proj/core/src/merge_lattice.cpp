#include "spsched/merge_lattice.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "spsched/error.h"
#include "spsched/schedule.h"

namespace spsched {

bool MergeLattice::hasFullPoint() const {
  return std::any_of(points.begin(), points.end(),
                     [](const LatticePoint& p) { return p.iterators.empty(); });
}

std::vector<int> MergeLattice::iterators() const {
  std::set<int> all;
  for (const auto& p : points) all.insert(p.iterators.begin(), p.iterators.end());
  return {all.begin(), all.end()};
}

std::string MergeLattice::toString(const std::vector<Access>& accesses) const {
  std::ostringstream os;
  for (const auto& p : points) {
    os << "{";
    for (size_t k = 0; k < p.iterators.size(); ++k) {
      if (k) os << ", ";
      os << spsched::toString(accesses.at(p.iterators[k]));
    }
    os << "}: " << spsched::toString(p.expr) << "\n";
  }
  return os.str();
}

namespace {

std::vector<int> unite(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void addPoint(std::vector<LatticePoint>& points, LatticePoint p) {
  for (const auto& q : points) {
    if (q.iterators == p.iterators) return;
  }
  points.push_back(std::move(p));
}

MergeLattice build(const Expr& e, const std::function<bool(int)>& isIterator, int& next) {
  MergeLattice out;
  switch (e->kind) {
    case ExprKind::Access: {
      int index = next++;
      LatticePoint p{{}, e};
      if (isIterator(index)) p.iterators.push_back(index);
      out.points.push_back(std::move(p));
      return out;
    }
    case ExprKind::Literal:
    case ExprKind::Workspace:
      out.points.push_back({{}, e});
      return out;
    case ExprKind::Mul: {
      MergeLattice a = build(e->a, isIterator, next);
      MergeLattice b = build(e->b, isIterator, next);
      for (const auto& pa : a.points) {
        for (const auto& pb : b.points) {
          addPoint(out.points, {unite(pa.iterators, pb.iterators), makeMul(pa.expr, pb.expr)});
        }
      }
      break;
    }
    case ExprKind::Add: {
      MergeLattice a = build(e->a, isIterator, next);
      MergeLattice b = build(e->b, isIterator, next);
      for (const auto& pa : a.points) {
        for (const auto& pb : b.points) {
          addPoint(out.points, {unite(pa.iterators, pb.iterators), makeAdd(pa.expr, pb.expr)});
        }
      }
      for (const auto& pa : a.points) addPoint(out.points, pa);
      for (const auto& pb : b.points) addPoint(out.points, pb);
      break;
    }
  }
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const LatticePoint& x, const LatticePoint& y) {
                     return x.iterators.size() > y.iterators.size();
                   });
  return out;
}

}  // namespace

MergeLattice buildLattice(const Expr& rhs, const std::function<bool(int)>& isIterator) {
  int next = 0;
  return build(rhs, isIterator, next);
}

MergeLattice mergeLattice(const ScheduledStmt& stmt, const IndexVar& var) {
  if (stmt.provenance().space(var) != Space::Coordinate ||
      !stmt.provenance().isOriginal(var)) {
    throw Error(ErrorCode::InvalidArgument,
                "merge lattices are built for original coordinate variables, not '" +
                    var.name() + "'");
  }
  std::vector<Access> accesses = stmt.assignment().inputAccesses();
  auto isIterator = [&](int k) {
    const Access& a = accesses[k];
    const Format& f = stmt.formats().at(a.tensor);
    for (size_t l = 0; l < a.vars.size(); ++l) {
      if (a.vars[l] == var) return f[l].kind == LevelKind::Compressed;
    }
    return false;
  };
  MergeLattice lattice = buildLattice(stmt.assignment().rhs, isIterator);
  if (static_cast<int>(lattice.iterators().size()) > kMaxMergeIterators) {
    throw Error(ErrorCode::Unsupported,
                "more than " + std::to_string(kMaxMergeIterators) +
                    " sparse operands merged at '" + var.name() + "'");
  }
  return lattice;
}

}  // namespace spsched
