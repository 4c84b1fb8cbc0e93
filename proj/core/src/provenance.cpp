#include "spsched/provenance.h"

#include <sstream>

#include "spsched/error.h"

namespace spsched {

const char* toString(Space space) {
  return space == Space::Coordinate ? "coordinate" : "position";
}

const char* toString(BoundType) { return "MaxExact"; }

const char* toString(RelKind kind) {
  switch (kind) {
    case RelKind::Split: return "split";
    case RelKind::Divide: return "divide";
    case RelKind::Fuse: return "fuse";
    case RelKind::Pos: return "pos";
    case RelKind::Coord: return "coord";
    case RelKind::Bound: return "bound";
    case RelKind::Precompute: return "precompute";
  }
  return "?";
}

std::string toString(const Relation& rel) {
  std::ostringstream os;
  os << toString(rel.kind) << "(";
  bool first = true;
  auto put = [&](const std::string& s) {
    if (!first) os << ", ";
    os << s;
    first = false;
  };
  for (const auto& v : rel.parents) put(v.name());
  for (const auto& v : rel.children) put(v.name());
  switch (rel.kind) {
    case RelKind::Split:
    case RelKind::Divide:
      put(std::to_string(rel.size));
      break;
    case RelKind::Pos:
      put(spsched::toString(rel.access));
      break;
    case RelKind::Bound:
      put(std::to_string(rel.size));
      put(toString(rel.boundType));
      break;
    default:
      break;
  }
  os << ")";
  return os.str();
}

ProvenanceGraph::ProvenanceGraph(std::vector<IndexVar> originals)
    : originals_(std::move(originals)) {
  for (const auto& v : originals_) {
    order_.push_back(v);
    space_[v] = Space::Coordinate;
  }
}

bool ProvenanceGraph::contains(const IndexVar& var) const { return space_.count(var) != 0; }

bool ProvenanceGraph::isOriginal(const IndexVar& var) const {
  return contains(var) && !producer_.count(var);
}

Space ProvenanceGraph::space(const IndexVar& var) const {
  auto it = space_.find(var);
  if (it == space_.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown index variable '" + var.name() + "'");
  }
  return it->second;
}

const Relation* ProvenanceGraph::producer(const IndexVar& var) const {
  auto it = producer_.find(var);
  return it == producer_.end() ? nullptr : &relations_[it->second];
}

const Relation* ProvenanceGraph::consumer(const IndexVar& var) const {
  auto it = consumer_.find(var);
  return it == consumer_.end() ? nullptr : &relations_[it->second];
}

std::vector<IndexVar> ProvenanceGraph::leaves() const {
  std::vector<IndexVar> out;
  for (const auto& v : order_) {
    if (!consumer_.count(v)) out.push_back(v);
  }
  return out;
}

std::set<IndexVar> ProvenanceGraph::origins(const IndexVar& var) const {
  std::set<IndexVar> out;
  std::vector<IndexVar> stack{var};
  while (!stack.empty()) {
    IndexVar v = stack.back();
    stack.pop_back();
    const Relation* rel = producer(v);
    if (!rel) {
      out.insert(v);
      continue;
    }
    for (const auto& p : rel->parents) stack.push_back(p);
  }
  return out;
}

std::set<IndexVar> ProvenanceGraph::leafDescendants(const IndexVar& var) const {
  std::set<IndexVar> out;
  std::vector<IndexVar> stack{var};
  while (!stack.empty()) {
    IndexVar v = stack.back();
    stack.pop_back();
    const Relation* rel = consumer(v);
    if (!rel) {
      out.insert(v);
      continue;
    }
    for (const auto& c : rel->children) stack.push_back(c);
  }
  return out;
}

std::vector<IndexVar> ProvenanceGraph::constituents(const IndexVar& var) const {
  const Relation* rel = producer(var);
  if (!rel) return {var};
  switch (rel->kind) {
    case RelKind::Fuse: {
      auto a = constituents(rel->parents[0]);
      auto b = constituents(rel->parents[1]);
      if (a.empty() || b.empty()) return {};
      a.insert(a.end(), b.begin(), b.end());
      return a;
    }
    case RelKind::Coord: {
      const Relation* pos = producer(rel->parents[0]);
      if (!pos || pos->kind != RelKind::Pos) return {};
      return constituents(pos->parents[0]);
    }
    default:
      return {};
  }
}

std::optional<int64_t> ProvenanceGraph::structuralExtent(const IndexVar& var) const {
  const Relation* rel = producer(var);
  if (!rel) return std::nullopt;
  auto parent = [&](size_t k) { return structuralExtent(rel->parents[k]); };
  switch (rel->kind) {
    case RelKind::Split:
      if (var == rel->children[1]) return rel->size;
      if (auto n = parent(0)) return (*n + rel->size - 1) / rel->size;
      return std::nullopt;
    case RelKind::Divide:
      if (var == rel->children[0]) return rel->size;
      if (auto n = parent(0)) return (*n + rel->size - 1) / rel->size;
      return std::nullopt;
    case RelKind::Fuse: {
      auto a = parent(0), b = parent(1);
      if (a && b) return *a * *b;
      return std::nullopt;
    }
    case RelKind::Bound:
      return rel->size;
    case RelKind::Precompute:
      return parent(0);
    case RelKind::Coord: {
      const Relation* pos = producer(rel->parents[0]);
      return pos ? structuralExtent(pos->parents[0]) : std::nullopt;
    }
    case RelKind::Pos:
      return std::nullopt;
  }
  return std::nullopt;
}

void ProvenanceGraph::add(Relation rel) {
  for (const auto& c : rel.children) {
    if (contains(c)) {
      throw Error(ErrorCode::InvalidArgument,
                  "index variable '" + c.name() + "' already exists");
    }
  }
  for (size_t a = 0; a < rel.children.size(); ++a) {
    for (size_t b = a + 1; b < rel.children.size(); ++b) {
      if (rel.children[a] == rel.children[b]) {
        throw Error(ErrorCode::InvalidArgument,
                    "index variable '" + rel.children[a].name() + "' named twice");
      }
    }
  }
  for (const auto& p : rel.parents) {
    if (!contains(p)) {
      throw Error(ErrorCode::InvalidArgument, "unknown index variable '" + p.name() + "'");
    }
    if (rel.kind != RelKind::Precompute && consumer_.count(p)) {
      throw Error(ErrorCode::InvalidArgument,
                  "index variable '" + p.name() + "' was already transformed");
    }
  }
  Space childSpace = Space::Coordinate;
  switch (rel.kind) {
    case RelKind::Pos:
      childSpace = Space::Position;
      break;
    case RelKind::Coord:
      childSpace = Space::Coordinate;
      break;
    default:
      for (const auto& p : rel.parents) {
        if (space(p) == Space::Position) childSpace = Space::Position;
      }
  }
  size_t index = relations_.size();
  for (const auto& c : rel.children) {
    order_.push_back(c);
    space_[c] = childSpace;
    producer_[c] = index;
  }
  if (rel.kind != RelKind::Precompute) {
    for (const auto& p : rel.parents) consumer_[p] = index;
  }
  relations_.push_back(std::move(rel));
}

std::string ProvenanceGraph::toString() const {
  std::ostringstream os;
  for (const auto& rel : relations_) os << spsched::toString(rel) << "\n";
  return os.str();
}

}  // namespace spsched
