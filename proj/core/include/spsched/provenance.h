#ifndef SPSCHED_PROVENANCE_H
#define SPSCHED_PROVENANCE_H

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spsched/index_notation.h"

namespace spsched {

enum class Space { Coordinate, Position };
enum class BoundType { MaxExact };

const char* toString(Space space);
const char* toString(BoundType type);

enum class RelKind { Split, Divide, Fuse, Pos, Coord, Bound, Precompute };

const char* toString(RelKind kind);

/// One derivation edge. `parents` are consumed, `children` produced:
///   Split/Divide  {parent} -> {outer, inner}   size = inner size / outer count
///   Fuse          {outer, inner} -> {fused}
///   Pos           {coordVar} -> {posVar}       access + level range
///   Coord         {posVar} -> {coordVar}
///   Bound         {var} -> {bounded}           size = bound
///   Precompute    {var} -> {producerVar}       var is not consumed
struct Relation {
  RelKind kind = RelKind::Split;
  std::vector<IndexVar> parents;
  std::vector<IndexVar> children;
  int64_t size = 0;
  Access access;      // Pos
  int accessIndex = -1;  // Pos: index among the rhs accesses
  int firstLevel = -1;   // Pos: shallowest level covered
  int level = -1;        // Pos: deepest level covered (the position level)
  BoundType boundType = BoundType::MaxExact;
};

std::string toString(const Relation& rel);

class ProvenanceGraph {
public:
  ProvenanceGraph() = default;
  explicit ProvenanceGraph(std::vector<IndexVar> originals);

  const std::vector<IndexVar>& originals() const { return originals_; }
  const std::vector<Relation>& relations() const { return relations_; }

  bool contains(const IndexVar& var) const;
  bool isOriginal(const IndexVar& var) const;
  bool isDerived(const IndexVar& var) const { return contains(var) && !isOriginal(var); }
  Space space(const IndexVar& var) const;

  /// Relation that produced `var`, if it is derived.
  const Relation* producer(const IndexVar& var) const;
  /// Relation that consumed `var`; precompute edges never consume.
  const Relation* consumer(const IndexVar& var) const;

  /// Variables with no consuming relation, in creation order.
  std::vector<IndexVar> leaves() const;

  /// Original variables `var` was derived from (itself for originals).
  std::set<IndexVar> origins(const IndexVar& var) const;
  /// Leaves reachable from `var` by following consuming relations.
  std::set<IndexVar> leafDescendants(const IndexVar& var) const;

  /// Original variables a coordinate-space variable stands for, outermost
  /// first: an original is itself, a fused variable concatenates its
  /// operands, a coord variable stands for whatever its position variable
  /// was derived from. Empty when the variable is not a plain linearization
  /// of originals (split, divide, bound outputs and position variables).
  std::vector<IndexVar> constituents(const IndexVar& var) const;

  /// Extent known from the schedule alone (split sizes, divide counts,
  /// bounds); original extents are runtime values and yield nullopt.
  std::optional<int64_t> structuralExtent(const IndexVar& var) const;

  /// Adds a relation; children must be fresh names, parents present and
  /// unconsumed (except for precompute).
  void add(Relation rel);

  std::string toString() const;

private:
  std::vector<IndexVar> originals_;
  std::vector<Relation> relations_;
  std::vector<IndexVar> order_;  // every variable, creation order
  std::map<IndexVar, Space> space_;
  std::map<IndexVar, size_t> producer_;
  std::map<IndexVar, size_t> consumer_;
};

}  // namespace spsched

#endif
