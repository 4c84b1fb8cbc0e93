#include "spsched/iteration_graph.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "spsched/error.h"
#include "spsched/merge_lattice.h"
#include "spsched/schedule.h"

namespace spsched {

const char* toString(MergeKind kind) {
  switch (kind) {
    case MergeKind::Single: return "single";
    case MergeKind::Intersection: return "intersection";
    case MergeKind::Union: return "union";
  }
  return "?";
}

int IterationGraph::depthOf(const IndexVar& var) const {
  auto it = std::find(forest.begin(), forest.end(), var);
  return it == forest.end() ? -1 : static_cast<int>(it - forest.begin());
}

IterationGraph buildIterationGraph(const Assignment& assignment,
                                   const std::map<std::string, Format>& formats,
                                   const std::vector<IndexVar>& order) {
  IterationGraph g;
  g.forest = order;
  std::vector<Access> accesses = assignment.inputAccesses();
  for (size_t k = 0; k < accesses.size(); ++k) {
    TensorPath path;
    path.accessIndex = static_cast<int>(k);
    path.access = accesses[k];
    for (size_t l = 0; l < accesses[k].vars.size(); ++l) {
      path.steps.push_back({accesses[k].vars[l], static_cast<int>(l)});
    }
    std::stable_sort(path.steps.begin(), path.steps.end(),
                     [&](const PathStep& a, const PathStep& b) {
                       return g.depthOf(a.var) < g.depthOf(b.var);
                     });
    g.paths.push_back(std::move(path));
  }
  (void)formats;
  for (const auto& v : order) {
    int users = 0;
    for (const auto& a : accesses) {
      users += std::count(a.vars.begin(), a.vars.end(), v) > 0;
    }
    MergeLattice lattice = buildLattice(assignment.rhs, [&](int k) {
      const auto& vars = accesses[k].vars;
      return std::find(vars.begin(), vars.end(), v) != vars.end();
    });
    if (lattice.points.size() > 1) {
      g.merge[v] = MergeKind::Union;
    } else {
      g.merge[v] = users >= 2 ? MergeKind::Intersection : MergeKind::Single;
    }
  }
  return g;
}

std::map<IndexVar, int> readyDepths(const ScheduledStmt& stmt) {
  std::map<IndexVar, int> out;
  for (const auto& o : stmt.provenance().originals()) {
    int depth = -1;
    for (const auto& leaf : stmt.provenance().leafDescendants(o)) {
      depth = std::max(depth, stmt.graph().depthOf(leaf));
    }
    out[o] = depth;
  }
  return out;
}

namespace {

// Original variables whose values the loop bounds of `var` are expressed in.
std::set<IndexVar> domainDeps(const ProvenanceGraph& prov, const IndexVar& var) {
  const Relation* rel = prov.producer(var);
  if (!rel) return {};
  std::set<IndexVar> out;
  switch (rel->kind) {
    case RelKind::Pos:
      for (int l = 0; l < rel->firstLevel; ++l) out.insert(rel->access.vars[l]);
      break;
    case RelKind::Coord: {
      const Relation* pos = prov.producer(rel->parents[0]);
      out = domainDeps(prov, pos->parents[0]);
      break;
    }
    default:
      for (const auto& p : rel->parents) {
        auto d = domainDeps(prov, p);
        out.insert(d.begin(), d.end());
      }
  }
  return out;
}

}  // namespace

void validateGraph(const ScheduledStmt& stmt) {
  const auto& prov = stmt.provenance();
  const auto& graph = stmt.graph();

  std::set<IndexVar> expected(graph.forest.begin(), graph.forest.end());
  if (expected.size() != graph.forest.size()) {
    throw Error(ErrorCode::InvalidArgument, "a loop variable appears twice in the loop chain");
  }
  if (const auto& pre = stmt.precomputeRecord()) {
    expected.insert(pre->preVar);
    if (graph.forest.back() != pre->var) {
      throw Error(ErrorCode::Unsupported,
                  "precomputed variable '" + pre->var.name() + "' must stay innermost");
    }
  }
  auto leaves = prov.leaves();
  if (std::set<IndexVar>(leaves.begin(), leaves.end()) != expected) {
    throw Error(ErrorCode::InvalidArgument,
                "derivation leaves do not match the loop variables");
  }

  auto ready = readyDepths(stmt);
  for (const auto& access : stmt.assignment().inputAccesses()) {
    const Format& format = stmt.formats().at(access.tensor);
    int above = -1;
    for (size_t l = 0; l < access.vars.size(); ++l) {
      int here = ready.at(access.vars[l]);
      if (l > 0 && format[l].kind == LevelKind::Compressed && here < above) {
        throw Error(ErrorCode::DiscordantTraversal,
                    "discordant traversal of " + access.tensor + " level " + std::to_string(l) +
                        ": '" + access.vars[l].name() +
                        "' is iterated outside the levels above it");
      }
      above = std::max(above, here);
    }
  }

  for (size_t d = 0; d < graph.forest.size(); ++d) {
    for (const auto& dep : domainDeps(prov, graph.forest[d])) {
      if (ready.at(dep) >= static_cast<int>(d)) {
        throw Error(ErrorCode::DiscordantTraversal,
                    "discordant traversal: bounds of '" + graph.forest[d].name() +
                        "' need '" + dep.name() + "', which is only known inside it");
      }
    }
  }
}

std::string toDot(const ScheduledStmt& stmt) {
  const auto& prov = stmt.provenance();
  const auto& graph = stmt.graph();
  std::ostringstream os;
  os << "digraph iteration_graph {\n";
  os << "  rankdir=TB;\n";
  std::vector<IndexVar> all = prov.originals();
  for (const auto& rel : prov.relations()) {
    all.insert(all.end(), rel.children.begin(), rel.children.end());
  }
  for (const auto& v : all) {
    bool loop = graph.contains(v);
    os << "  \"" << v.name() << "\" [label=\"" << v.name() << "\\n"
       << toString(prov.space(v)) << "\"";
    if (loop) os << ", shape=box";
    if (prov.space(v) == Space::Position) os << ", color=blue";
    os << "];\n";
  }
  for (size_t d = 0; d + 1 < graph.forest.size(); ++d) {
    os << "  \"" << graph.forest[d].name() << "\" -> \"" << graph.forest[d + 1].name()
       << "\" [style=bold];\n";
  }
  for (const auto& rel : prov.relations()) {
    for (const auto& p : rel.parents) {
      for (const auto& c : rel.children) {
        os << "  \"" << p.name() << "\" -> \"" << c.name() << "\" [style=dashed, label=\""
           << toString(rel.kind) << "\"];\n";
      }
    }
  }
  for (const auto& path : graph.paths) {
    for (size_t s = 0; s + 1 < path.steps.size(); ++s) {
      os << "  \"" << path.steps[s].var.name() << "\" -> \"" << path.steps[s + 1].var.name()
         << "\" [color=gray, label=\"" << path.access.tensor << "\"];\n";
    }
  }
  for (const auto& [var, kind] : graph.merge) {
    if (kind != MergeKind::Single) {
      os << "  // " << var.name() << ": " << toString(kind) << "\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace spsched
