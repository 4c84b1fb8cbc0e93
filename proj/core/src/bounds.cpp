#include "spsched/bounds.h"

#include "spsched/error.h"

namespace spsched {

Symbols::Symbols(const ScheduledStmt& stmt,
                 const std::map<std::string, std::vector<int>>* specializedDims)
    : stmt_(&stmt), accesses_(stmt.assignment().inputAccesses()), specialized_(specializedDims) {
  std::map<std::string, int> seen;
  for (const auto& a : accesses_) {
    int n = ++seen[a.tensor];
    prefixes_.push_back(n == 1 ? a.tensor : a.tensor + "_" + std::to_string(n) + "_");
  }
  for (size_t k = 0; k < accesses_.size(); ++k) {
    for (size_t l = 0; l < accesses_[k].vars.size(); ++l) {
      positions_[position(static_cast<int>(k), static_cast<int>(l))] = {static_cast<int>(k),
                                                                        static_cast<int>(l)};
    }
  }
}

std::string Symbols::position(int access, int level) const {
  return "p" + prefixes_.at(access) + std::to_string(level + 1);
}

std::string Symbols::posArray(const std::string& tensor, int level) const {
  return tensor + std::to_string(level + 1) + "_pos";
}

std::string Symbols::crdArray(const std::string& tensor, int level) const {
  return tensor + std::to_string(level + 1) + "_crd";
}

std::string Symbols::dimensionName(const std::string& tensor, int level) const {
  return tensor + std::to_string(level + 1) + "_dimension";
}

ir::Expr Symbols::dimension(const std::string& tensor, int level) const {
  if (specialized_) {
    auto it = specialized_->find(tensor);
    if (it != specialized_->end() && level < static_cast<int>(it->second.size())) {
      return ir::intImm(it->second[level]);
    }
  }
  return ir::var(dimensionName(tensor, level));
}

ir::Expr Symbols::extent(const IndexVar& original) const {
  for (const auto& a : accesses_) {
    for (size_t l = 0; l < a.vars.size(); ++l) {
      if (a.vars[l] == original) return dimension(a.tensor, static_cast<int>(l));
    }
  }
  throw Error(ErrorCode::Unrecoverable,
              "no input access determines the extent of '" + original.name() + "'");
}

LevelKind Symbols::levelKind(int access, int level) const {
  return stmt_->formats().at(accesses_.at(access).tensor).at(level).kind;
}

std::optional<std::pair<int, int>> Symbols::parsePosition(const std::string& name) const {
  auto it = positions_.find(name);
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

ir::Expr Domain::extent() const {
  if (constant) return ir::intImm(*constant);
  return ir::sub(hi, lo);
}

std::vector<std::pair<ir::Expr, ir::Expr>> positionRanges(const Relation& rel,
                                                           const Symbols& symbols) {
  const std::string& tensor = rel.access.tensor;
  int m = rel.firstLevel;
  ir::Expr parent = m == 0 ? ir::intImm(0) : ir::var(symbols.position(rel.accessIndex, m - 1));
  ir::Expr lo = parent;
  ir::Expr hi = ir::add(parent, ir::intImm(1));
  std::vector<std::pair<ir::Expr, ir::Expr>> out;
  for (int k = m; k <= rel.level; ++k) {
    if (symbols.levelKind(rel.accessIndex, k) == LevelKind::Compressed) {
      std::string pos = symbols.posArray(tensor, k);
      // pos arrays start at 0
      lo = ir::isInt(lo, 0) ? lo : ir::load(pos, lo, false);
      hi = ir::load(pos, hi, false);
    } else {
      ir::Expr n = symbols.dimension(tensor, k);
      lo = ir::mul(lo, n);
      hi = ir::mul(hi, n);
    }
    out.emplace_back(lo, hi);
  }
  return out;
}

std::map<IndexVar, Domain> propagateBounds(const ScheduledStmt& stmt, const Symbols& symbols) {
  const auto& prov = stmt.provenance();
  std::map<IndexVar, Domain> out;
  for (const auto& o : prov.originals()) {
    Domain d{ir::intImm(0), symbols.extent(o), std::nullopt};
    d.constant = ir::constValue(d.hi);
    out[o] = d;
  }
  for (const auto& rel : prov.relations()) {
    switch (rel.kind) {
      case RelKind::Split: {
        const Domain& p = out.at(rel.parents[0]);
        Domain outer{ir::intImm(0), ir::ceilDiv(p.extent(), ir::intImm(rel.size)), std::nullopt};
        if (p.constant) outer.constant = (*p.constant + rel.size - 1) / rel.size;
        out[rel.children[0]] = outer;
        out[rel.children[1]] = Domain{ir::intImm(0), ir::intImm(rel.size), rel.size};
        break;
      }
      case RelKind::Divide: {
        const Domain& p = out.at(rel.parents[0]);
        Domain inner{ir::intImm(0), ir::ceilDiv(p.extent(), ir::intImm(rel.size)), std::nullopt};
        if (p.constant) inner.constant = (*p.constant + rel.size - 1) / rel.size;
        out[rel.children[0]] = Domain{ir::intImm(0), ir::intImm(rel.size), rel.size};
        out[rel.children[1]] = inner;
        break;
      }
      case RelKind::Fuse: {
        const Domain& a = out.at(rel.parents[0]);
        const Domain& b = out.at(rel.parents[1]);
        Domain f{ir::intImm(0), ir::mul(a.extent(), b.extent()), std::nullopt};
        if (a.constant && b.constant) f.constant = *a.constant * *b.constant;
        out[rel.children[0]] = f;
        break;
      }
      case RelKind::Pos: {
        auto ranges = positionRanges(rel, symbols);
        Domain p{ranges.back().first, ranges.back().second, std::nullopt};
        out[rel.children[0]] = p;
        break;
      }
      case RelKind::Coord: {
        const Relation* pos = prov.producer(rel.parents[0]);
        out[rel.children[0]] = out.at(pos->parents[0]);
        break;
      }
      case RelKind::Bound: {
        const Domain& v = out.at(rel.parents[0]);
        out[rel.children[0]] = Domain{v.lo, ir::add(v.lo, ir::intImm(rel.size)), rel.size};
        break;
      }
      case RelKind::Precompute:
        out[rel.children[0]] = out.at(rel.parents[0]);
        break;
    }
  }
  return out;
}

namespace {

// Locates the position of access `a` at `level` from original coordinates.
ir::Expr locate(const ScheduledStmt& stmt, const Symbols& symbols, int a, int level) {
  if (level < 0) return ir::intImm(0);
  const Access& access = symbols.accesses().at(a);
  ir::Expr parent = locate(stmt, symbols, a, level - 1);
  ir::Expr c = ir::var(access.vars[level].name());
  if (symbols.levelKind(a, level) == LevelKind::Dense) {
    return ir::add(ir::mul(parent, symbols.dimension(access.tensor, level)), c);
  }
  std::string pos = symbols.posArray(access.tensor, level);
  return ir::search(ir::SearchMode::Exact, symbols.crdArray(access.tensor, level),
                    ir::load(pos, parent, false),
                    ir::load(pos, ir::add(parent, ir::intImm(1)), false), c);
}

// Replaces position symbols in a bound expression by located positions.
ir::Expr locatePositions(const ScheduledStmt& stmt, const Symbols& symbols, const ir::Expr& e) {
  return ir::substitute(e, [&](const std::string& name) -> ir::Expr {
    if (auto p = symbols.parsePosition(name)) return locate(stmt, symbols, p->first, p->second);
    return nullptr;
  });
}

}  // namespace

ir::Expr recoverDerived(const ScheduledStmt& stmt, const Symbols& symbols,
                        const std::map<IndexVar, Domain>& domains, const IndexVar& target) {
  const auto& prov = stmt.provenance();
  const Relation* rel = prov.producer(target);
  if (!rel) return ir::var(target.name());
  auto lo = [&](const IndexVar& v) { return locatePositions(stmt, symbols, domains.at(v).lo); };
  auto ext = [&](const IndexVar& v) {
    return locatePositions(stmt, symbols, domains.at(v).extent());
  };
  auto rec = [&](const IndexVar& v) { return recoverDerived(stmt, symbols, domains, v); };
  switch (rel->kind) {
    case RelKind::Split: {
      const IndexVar& p = rel->parents[0];
      ir::Expr offset = ir::sub(rec(p), lo(p));
      ir::Expr s = ir::intImm(rel->size);
      return target == rel->children[0] ? ir::div(offset, s) : ir::mod(offset, s);
    }
    case RelKind::Divide: {
      const IndexVar& p = rel->parents[0];
      ir::Expr offset = ir::sub(rec(p), lo(p));
      ir::Expr w = ext(rel->children[1]);
      return target == rel->children[0] ? ir::div(offset, w) : ir::mod(offset, w);
    }
    case RelKind::Fuse: {
      const IndexVar& a = rel->parents[0];
      const IndexVar& b = rel->parents[1];
      return ir::add(ir::mul(ir::sub(rec(a), lo(a)), ext(b)), ir::sub(rec(b), lo(b)));
    }
    case RelKind::Pos:
      return locate(stmt, symbols, rel->accessIndex, rel->level);
    case RelKind::Coord:
      return rec(prov.producer(rel->parents[0])->parents[0]);
    case RelKind::Bound:
    case RelKind::Precompute:
      return rec(rel->parents[0]);
  }
  throw Error(ErrorCode::Unrecoverable, "cannot recover '" + target.name() + "'");
}

}  // namespace spsched
