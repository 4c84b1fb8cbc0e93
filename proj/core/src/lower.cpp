#include "spsched/lower.h"

#include <algorithm>
#include <functional>
#include <set>

#include "spsched/bounds.h"
#include "spsched/error.h"
#include "spsched/merge_lattice.h"

namespace spsched {

namespace {

using IExpr = ir::Expr;
using IStmt = ir::Stmt;

enum class LoopMode { Domain, Segment, While };

struct Iter {
  int access = -1;
  int level = -1;
};

struct Loop {
  IndexVar var;
  LoopMode mode = LoopMode::Domain;
  Iter segment;
  MergeLattice lattice;
  std::vector<Iter> iterators;
};

// Where a symbol's value comes from. Loop symbols are bound by a loop header
// or a merge-loop prologue; Expr symbols are declared once ready; Tracked
// symbols are initialized before a loop and advanced inside it.
enum class Src { Loop, Expr, Tracked };

struct Sym {
  Src src = Src::Expr;
  IExpr init;
  bool original = false;
  bool mayBeNeg = false;
  int loopDepth = -1;
  std::vector<std::pair<IExpr, bool>> guards;  // (condition, counted)
  std::string stepArray;
  IExpr stepKey;
  int order = 0;
  std::optional<int> depth;
};

enum class ItemKind { Decl, Guard, Step, Check };

struct Item {
  ItemKind kind = ItemKind::Decl;
  std::string sym;
  IExpr expr;
  bool counted = false;
  std::string message;
  int depth = -1;
  bool trackInit = false;
  int trackLoop = -1;
  std::vector<size_t> deps;
};

enum class Body { Normal, Producer, Consumer };

struct WritePlan {
  RaceStrategy strategy = RaceStrategy::NoRaces;
  int tempDepth = -1;
  RaceStrategy foldStrategy = RaceStrategy::NoRaces;
};

class Lowerer {
public:
  Lowerer(const ScheduledStmt& stmt, const LowerOptions& options)
      : stmt_(stmt),
        prov_(stmt.provenance()),
        options_(options),
        symbols_(stmt, options.specializedDims ? &*options.specializedDims : nullptr),
        accesses_(stmt.assignment().inputAccesses()) {}

  ir::Program run();

private:
  // ---- symbol definition ----
  void ensure(const std::string& name);
  IExpr use(const IExpr& e);
  IExpr value(const IndexVar& x);
  IExpr position(int access, int level);
  void defineVar(const IndexVar& x);
  void definePosition(int access, int level);
  void locate(int access, int level);
  void add(const std::string& name, Sym sym);
  Sym& sym(const std::string& name) { return syms_.at(name); }
  bool mayBeNeg(const IExpr& e) const;
  const Relation* absorbingPos(const IndexVar& original) const;
  const Relation* livePosAt(int access, int level) const;
  std::optional<IndexVar> trackLoop(const Relation& pos) const;
  IExpr inlineFor(const IExpr& e, const IndexVar& v);
  const Domain& domain(const IndexVar& v) const { return domains_.at(v); }
  IExpr dim(int access, int level) const {
    return symbols_.dimension(accesses_.at(access).tensor, level);
  }
  LevelKind kind(int access, int level) const { return symbols_.levelKind(access, level); }

  // ---- analysis ----
  void setupLoops();
  int depthOf(const std::string& name);
  int exprDepth(const IExpr& e);
  bool isAlias(const Sym& s) const;
  IExpr resolve(const IExpr& e) const;
  void computeRequired();
  void planWrites();
  void buildItems();
  std::vector<const Item*> orderedItems(int depth) const;

  // ---- emission ----
  IExpr accessValue(int access);
  IExpr lowerValue(const spsched::Expr& e, int& counter, const spsched::Expr& target,
                   const IExpr& replacement);
  IStmt emitScope(int depth, Body body);
  IStmt emitLoop(int depth);
  IStmt emitPrecompute();
  IStmt emitWhile(int depth);
  IStmt innermost(Body body);
  IStmt itemStmt(const Item& item);
  std::vector<IStmt> trackInits(int loop);
  ir::Program manifest(IStmt body);

  const ScheduledStmt& stmt_;
  const ProvenanceGraph& prov_;
  const LowerOptions& options_;
  Symbols symbols_;
  std::vector<Access> accesses_;
  std::map<IndexVar, Domain> domains_;
  std::vector<Loop> loops_;
  std::set<std::string> dimNames_;
  std::map<std::string, Sym> syms_;
  std::set<std::string> pending_;
  int nextOrder_ = 0;
  std::vector<bool> required_;
  std::vector<std::pair<IExpr, std::string>> checks_;
  std::vector<Item> items_;
  WritePlan write_;

  IExpr outputLoc_;
  IExpr outputSize_;
  std::vector<IExpr> outputDims_;
  std::string outArray_;
  std::string tmpArray_;
  // precompute
  spsched::Expr preTarget_;
  int preStart_ = 0;
  int preDepth_ = -1;
};

// ---------------------------------------------------------------------------
// Symbol definition

void Lowerer::add(const std::string& name, Sym s) {
  s.order = nextOrder_++;
  syms_[name] = std::move(s);
}

void Lowerer::ensure(const std::string& name) {
  if (syms_.count(name) || dimNames_.count(name)) return;
  if (pending_.count(name)) {
    throw Error(ErrorCode::Unrecoverable, "cyclic recovery of '" + name + "'");
  }
  pending_.insert(name);
  if (auto p = symbols_.parsePosition(name)) {
    definePosition(p->first, p->second);
  } else if (prov_.contains(IndexVar(name))) {
    defineVar(IndexVar(name));
  } else {
    throw Error(ErrorCode::Unrecoverable, "unknown symbol '" + name + "'");
  }
  pending_.erase(name);
}

IExpr Lowerer::use(const IExpr& e) {
  std::vector<std::string> names;
  ir::collectVars(e, names);
  for (const auto& n : names) ensure(n);
  return e;
}

IExpr Lowerer::value(const IndexVar& x) {
  ensure(x.name());
  return ir::var(x.name());
}

IExpr Lowerer::position(int access, int level) {
  if (level < 0) return ir::intImm(0);
  std::string name = symbols_.position(access, level);
  ensure(name);
  return ir::var(name);
}

bool Lowerer::mayBeNeg(const IExpr& e) const {
  if (e->kind != ir::ExprKind::Var) return false;
  auto it = syms_.find(e->name);
  return it != syms_.end() && it->second.mayBeNeg;
}

// The live position relation an original coordinate was folded into, found
// by following fusions and pos/coord round trips.
const Relation* Lowerer::absorbingPos(const IndexVar& original) const {
  IndexVar cur = original;
  while (const Relation* r = prov_.consumer(cur)) {
    if (r->kind == RelKind::Fuse) {
      cur = r->children[0];
    } else if (r->kind == RelKind::Pos) {
      const Relation* c = prov_.consumer(r->children[0]);
      if (c && c->kind == RelKind::Coord) {
        cur = c->children[0];
      } else {
        return r;
      }
    } else {
      return nullptr;
    }
  }
  return nullptr;
}

const Relation* Lowerer::livePosAt(int access, int level) const {
  for (const auto& r : prov_.relations()) {
    if (r.kind != RelKind::Pos || r.accessIndex != access) continue;
    if (level < r.firstLevel || level > r.level) continue;
    const Relation* c = prov_.consumer(r.children[0]);
    if (c && c->kind == RelKind::Coord) continue;
    return &r;
  }
  return nullptr;
}

// The loop a position variable increases by one per iteration in, if any:
// the deepest loop below it, reached only through inner split/divide and
// bound edges, and executed sequentially.
std::optional<IndexVar> Lowerer::trackLoop(const Relation& pos) const {
  if (!options_.enableTracking) return std::nullopt;
  IndexVar cur = pos.children[0];
  while (const Relation* r = prov_.consumer(cur)) {
    if (r->kind == RelKind::Split || r->kind == RelKind::Divide) {
      cur = r->children[1];
    } else if (r->kind == RelKind::Bound) {
      cur = r->children[0];
    } else {
      return std::nullopt;
    }
  }
  const auto& graph = stmt_.graph();
  int depth = graph.depthOf(cur);
  if (depth < 0) return std::nullopt;
  for (const auto& leaf : prov_.leafDescendants(pos.children[0])) {
    if (graph.depthOf(leaf) > depth) return std::nullopt;
  }
  if (stmt_.parallelTag(cur)) return std::nullopt;
  return cur;
}

// Rewrites `e` so that it only refers to values available before the loop
// over `v` starts, taking the first iteration of `v`.
IExpr Lowerer::inlineFor(const IExpr& e, const IndexVar& v) {
  int vd = stmt_.graph().depthOf(v);
  return ir::substitute(e, [&](const std::string& name) -> IExpr {
    if (name == v.name()) return resolve(domain(v).lo);
    auto it = syms_.find(name);
    if (it == syms_.end()) return nullptr;
    if (it->second.src == Src::Expr && depthOf(name) >= vd) {
      return inlineFor(it->second.init, v);
    }
    return nullptr;
  });
}

void Lowerer::defineVar(const IndexVar& x) {
  Sym s;
  s.original = prov_.isOriginal(x);
  if (s.original) {
    if (const Relation* r = absorbingPos(x)) {
      const auto& vars = r->access.vars;
      int k = static_cast<int>(std::find(vars.begin(), vars.end(), x) - vars.begin());
      int a = r->accessIndex;
      IExpr p = position(a, k);
      if (kind(a, k) == LevelKind::Compressed) {
        s.init = ir::load(symbols_.crdArray(r->access.tensor, k), p, false);
      } else {
        s.init = ir::sub(p, ir::mul(position(a, k - 1), dim(a, k)));
      }
      add(x.name(), std::move(s));
      return;
    }
  }
  const Relation* r = prov_.consumer(x);
  if (!r) {
    throw Error(ErrorCode::Unrecoverable, "'" + x.name() + "' is neither iterated nor derived");
  }
  const Domain& dom = domain(x);
  switch (r->kind) {
    case RelKind::Split:
    case RelKind::Divide: {
      IExpr lo = use(dom.lo);
      IExpr stride = r->kind == RelKind::Split ? ir::intImm(r->size)
                                               : use(domain(r->children[1]).extent());
      s.init = ir::add(ir::add(lo, ir::mul(value(r->children[0]), stride)),
                       value(r->children[1]));
      bool exact = dom.constant && *dom.constant % r->size == 0;
      if (!exact) s.guards.push_back({ir::lt(ir::var(x.name()), use(dom.hi)), true});
      break;
    }
    case RelKind::Fuse: {
      IExpr f = value(r->children[0]);
      const IndexVar& a = r->parents[0];
      const IndexVar& b = r->parents[1];
      IExpr extB = use(domain(b).extent());
      if (x == a) {
        s.init = ir::add(use(domain(a).lo), ir::div(f, extB));
      } else {
        s.init = ir::add(use(domain(b).lo), ir::mod(f, extB));
      }
      break;
    }
    case RelKind::Bound:
      s.init = value(r->children[0]);
      break;
    case RelKind::Pos: {
      const Relation* c = prov_.consumer(r->children[0]);
      if (!c || c->kind != RelKind::Coord) {
        throw Error(ErrorCode::Unrecoverable,
                    "'" + x.name() + "' is only known through its positions");
      }
      s.init = value(c->children[0]);
      break;
    }
    default:
      throw Error(ErrorCode::Unrecoverable, "cannot recover '" + x.name() + "'");
  }
  s.mayBeNeg = mayBeNeg(s.init);
  add(x.name(), std::move(s));
}

void Lowerer::definePosition(int a, int k) {
  const Relation* r = livePosAt(a, k);
  if (!r) {
    locate(a, k);
    return;
  }
  std::string name = symbols_.position(a, k);
  const std::string& tensor = accesses_.at(a).tensor;
  Sym s;
  if (k == r->level) {
    s.init = value(r->children[0]);
  } else if (kind(a, k + 1) == LevelKind::Dense) {
    s.init = ir::div(position(a, k + 1), dim(a, k + 1));
  } else {
    auto ranges = positionRanges(*r, symbols_);
    IExpr lo = use(ranges.at(k - r->firstLevel).first);
    IExpr hi = use(ranges.at(k - r->firstLevel).second);
    IExpr key = position(a, k + 1);
    std::string posArr = symbols_.posArray(tensor, k + 1);
    std::optional<IndexVar> v = trackLoop(*r);
    if (v) {
      int vd = stmt_.graph().depthOf(*v);
      IExpr keyInit = inlineFor(key, *v);
      IExpr init = ir::search(ir::SearchMode::SegmentOf, posArr, lo, hi, keyInit);
      if (exprDepth(init) < vd) {
        s.src = Src::Tracked;
        s.init = init;
        s.loopDepth = vd;
        s.stepArray = posArr;
        s.stepKey = key;
        add(name, std::move(s));
        return;
      }
    }
    s.init = ir::search(ir::SearchMode::SegmentOf, posArr, lo, hi, key);
  }
  add(name, std::move(s));
}

// Position of an access found from its coordinates: computed for dense
// levels, searched for in compressed ones. -1 marks an absent coordinate.
void Lowerer::locate(int a, int k) {
  const Access& access = accesses_.at(a);
  IExpr c = value(access.vars.at(k));
  IExpr parent = position(a, k - 1);
  bool parentNeg = mayBeNeg(parent);
  Sym s;
  if (kind(a, k) == LevelKind::Dense) {
    s.init = ir::add(ir::mul(parent, dim(a, k)), c);
    s.mayBeNeg = parentNeg;
  } else {
    std::string pos = symbols_.posArray(access.tensor, k);
    s.init = ir::search(ir::SearchMode::Exact, symbols_.crdArray(access.tensor, k),
                        ir::load(pos, parent, false),
                        ir::load(pos, ir::add(parent, ir::intImm(1)), false), c);
    s.mayBeNeg = true;
  }
  if (parentNeg) s.init = ir::select(ir::ge(parent, ir::intImm(0)), s.init, ir::intImm(-1));
  add(symbols_.position(a, k), std::move(s));
}

// ---------------------------------------------------------------------------
// Analysis

void Lowerer::setupLoops() {
  const auto& forest = stmt_.forest();
  const auto& pre = stmt_.precomputeRecord();
  for (size_t d = 0; d < forest.size(); ++d) {
    Loop loop;
    loop.var = forest[d];
    int depth = static_cast<int>(d);
    bool original = prov_.isOriginal(loop.var);
    if (original && !(pre && pre->var == loop.var)) {
      loop.lattice = mergeLattice(stmt_, loop.var);
      std::vector<int> iters = loop.lattice.iterators();
      if (!loop.lattice.points.empty() && !loop.lattice.hasFullPoint() && !iters.empty()) {
        for (int a : iters) {
          const auto& vars = accesses_[a].vars;
          int k = static_cast<int>(std::find(vars.begin(), vars.end(), loop.var) - vars.begin());
          loop.iterators.push_back({a, k});
        }
        loop.mode = loop.lattice.points.size() == 1 && iters.size() == 1 ? LoopMode::Segment
                                                                          : LoopMode::While;
      }
    }
    switch (loop.mode) {
      case LoopMode::Domain: {
        Sym s;
        s.src = Src::Loop;
        s.loopDepth = depth;
        s.original = original;
        add(loop.var.name(), std::move(s));
        break;
      }
      case LoopMode::Segment: {
        loop.segment = loop.iterators[0];
        const Access& acc = accesses_[loop.segment.access];
        std::string p = symbols_.position(loop.segment.access, loop.segment.level);
        Sym ps;
        ps.src = Src::Loop;
        ps.loopDepth = depth;
        add(p, std::move(ps));
        Sym vs;
        vs.original = true;
        vs.init = ir::load(symbols_.crdArray(acc.tensor, loop.segment.level), ir::var(p), false);
        add(loop.var.name(), std::move(vs));
        break;
      }
      case LoopMode::While: {
        Sym vs;
        vs.src = Src::Loop;
        vs.loopDepth = depth;
        vs.original = true;
        add(loop.var.name(), std::move(vs));
        for (const auto& it : loop.iterators) {
          Sym ps;
          ps.src = Src::Loop;
          ps.loopDepth = depth;
          ps.mayBeNeg = true;
          add(symbols_.position(it.access, it.level), std::move(ps));
        }
        break;
      }
    }
    loops_.push_back(std::move(loop));
  }
  if (pre) {
    Sym s;
    s.src = Src::Loop;
    s.loopDepth = static_cast<int>(forest.size()) - 1;
    add(pre->preVar.name(), std::move(s));
  }
}

int Lowerer::depthOf(const std::string& name) {
  auto it = syms_.find(name);
  if (it == syms_.end()) return -1;
  Sym& s = it->second;
  if (s.depth) return *s.depth;
  int d = s.src == Src::Expr ? exprDepth(s.init) : s.loopDepth;
  s.depth = d;
  return d;
}

int Lowerer::exprDepth(const IExpr& e) {
  std::vector<std::string> names;
  ir::collectVars(e, names);
  int d = -1;
  for (const auto& n : names) d = std::max(d, depthOf(n));
  return d;
}

bool Lowerer::isAlias(const Sym& s) const {
  return s.src == Src::Expr && !s.original && s.guards.empty() &&
         (s.init->kind == ir::ExprKind::Var || s.init->kind == ir::ExprKind::IntImm);
}

IExpr Lowerer::resolve(const IExpr& e) const {
  return ir::substitute(e, [&](const std::string& name) -> IExpr {
    auto it = syms_.find(name);
    if (it != syms_.end() && isAlias(it->second)) return resolve(it->second.init);
    return nullptr;
  });
}

namespace {

// Accesses that must be present for the expression to be nonzero.
std::set<int> requiredAccesses(const spsched::Expr& e, int& counter) {
  switch (e->kind) {
    case ExprKind::Access:
      return {counter++};
    case ExprKind::Mul: {
      auto a = requiredAccesses(e->a, counter);
      auto b = requiredAccesses(e->b, counter);
      a.insert(b.begin(), b.end());
      return a;
    }
    case ExprKind::Add: {
      auto a = requiredAccesses(e->a, counter);
      auto b = requiredAccesses(e->b, counter);
      std::set<int> out;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                            std::inserter(out, out.begin()));
      return out;
    }
    default:
      return {};
  }
}

int countAccesses(const spsched::Expr& e) {
  return static_cast<int>(collectAccesses(e).size());
}

// Locates `target` in `e` (by identity, else structurally) and the number
// of accesses preceding it.
bool findNode(const spsched::Expr& e, const spsched::Expr& target, bool structural, int& before,
              spsched::Expr& found) {
  if (structural ? structurallyEqual(e, target) : e == target) {
    found = e;
    return true;
  }
  if (e->kind == ExprKind::Mul || e->kind == ExprKind::Add) {
    if (findNode(e->a, target, structural, before, found)) return true;
    before += countAccesses(e->a);
    return findNode(e->b, target, structural, before, found);
  }
  if (e->kind == ExprKind::Access) return false;
  return false;
}

}  // namespace

void Lowerer::computeRequired() {
  int counter = 0;
  auto req = requiredAccesses(stmt_.assignment().rhs, counter);
  required_.assign(accesses_.size(), false);
  for (int a : req) required_[a] = true;
}

void Lowerer::planWrites() {
  const auto& forest = stmt_.forest();
  int n = static_cast<int>(forest.size());
  int racingInner = -1;
  for (int d = 0; d < n; ++d) {
    if (stmt_.parallelTag(forest[d]) && stmt_.races(forest[d])) racingInner = d;
  }
  auto strategyOver = [&](int from, int to) {
    bool atomics = false, racing = false;
    for (int d = from; d < to; ++d) {
      auto tag = stmt_.parallelTag(forest[d]);
      if (!tag) continue;
      atomics |= tag->strategy == RaceStrategy::Atomics;
      racing |= stmt_.races(forest[d]);
    }
    if (atomics) return RaceStrategy::Atomics;
    if (racing) return RaceStrategy::IgnoreRaces;
    return RaceStrategy::NoRaces;
  };
  if (racingInner >= 0 &&
      stmt_.parallelTag(forest[racingInner])->strategy == RaceStrategy::Temporary) {
    const Loop& t = loops_[racingInner];
    if (t.mode != LoopMode::Domain || (stmt_.precomputeRecord() && racingInner == n - 1)) {
      throw Error(ErrorCode::Unsupported,
                  "Temporary on '" + t.var.name() + "' needs a plain counted loop");
    }
    if (exprDepth(outputLoc_) >= racingInner) {
      throw Error(ErrorCode::Unsupported,
                  "Temporary on '" + t.var.name() +
                      "': the output location must be fixed outside the loop");
    }
    write_.tempDepth = racingInner;
    write_.strategy = strategyOver(racingInner + 1, n);
    write_.foldStrategy = strategyOver(0, racingInner);
    tmpArray_ = stmt_.assignment().lhs.tensor + "_tmp";
    use(domain(t.var).extent());
    use(domain(t.var).lo);
  } else {
    write_.strategy = strategyOver(0, n);
  }
}

void Lowerer::buildItems() {
  // Symbols in creation order.
  std::vector<std::pair<int, std::string>> order;
  for (const auto& [name, s] : syms_) order.push_back({s.order, name});
  std::sort(order.begin(), order.end());

  std::map<std::string, size_t> declItem, stepItem, initItem;
  std::map<std::string, std::vector<size_t>> guardItems;
  for (const auto& [_, name] : order) {
    Sym& s = sym(name);
    int d = depthOf(name);
    if (s.src == Src::Expr && !isAlias(s)) {
      Item it;
      it.kind = ItemKind::Decl;
      it.sym = name;
      it.expr = s.init;
      it.depth = d;
      declItem[name] = items_.size();
      items_.push_back(std::move(it));
    } else if (s.src == Src::Tracked) {
      Item init;
      init.kind = ItemKind::Decl;
      init.sym = name;
      init.expr = s.init;
      init.depth = s.loopDepth - 1;
      init.trackInit = true;
      init.trackLoop = s.loopDepth;
      initItem[name] = items_.size();
      items_.push_back(std::move(init));
      Item step;
      step.kind = ItemKind::Step;
      step.sym = name;
      step.expr = s.stepKey;
      step.depth = s.loopDepth;
      stepItem[name] = items_.size();
      items_.push_back(std::move(step));
    }
    for (const auto& [cond, counted] : s.guards) {
      Item g;
      g.kind = ItemKind::Guard;
      g.sym = name;
      g.expr = cond;
      g.counted = counted;
      g.depth = std::max(d, exprDepth(cond));
      guardItems[name].push_back(items_.size());
      items_.push_back(std::move(g));
    }
  }
  for (const auto& [cond, message] : checks_) {
    Item c;
    c.kind = ItemKind::Check;
    c.expr = cond;
    c.message = message;
    c.depth = exprDepth(cond);
    items_.push_back(std::move(c));
  }

  // Item that makes `name` current at `depth`, if it is defined there.
  std::function<void(const std::string&, int, std::vector<size_t>&)> definers =
      [&](const std::string& name, int depth, std::vector<size_t>& out) {
        auto it = syms_.find(name);
        if (it == syms_.end()) return;
        const Sym& s = it->second;
        if (isAlias(s)) {
          std::vector<std::string> names;
          ir::collectVars(s.init, names);
          for (const auto& n : names) definers(n, depth, out);
          return;
        }
        if (s.src == Src::Tracked) {
          if (depth == s.loopDepth) out.push_back(stepItem.at(name));
          if (depth == s.loopDepth - 1) out.push_back(initItem.at(name));
        } else if (s.src == Src::Expr && depthOf(name) == depth) {
          out.push_back(declItem.at(name));
        }
      };
  // Expression symbols `name` is computed from, transitively.
  std::function<void(const std::string&, std::set<std::string>&)> closure =
      [&](const std::string& name, std::set<std::string>& out) {
        if (!out.insert(name).second) return;
        auto it = syms_.find(name);
        if (it == syms_.end() || it->second.src != Src::Expr) return;
        std::vector<std::string> names;
        ir::collectVars(it->second.init, names);
        for (const auto& n : names) closure(n, out);
      };

  for (size_t i = 0; i < items_.size(); ++i) {
    Item& it = items_[i];
    std::vector<std::string> names;
    ir::collectVars(it.expr, names);
    for (const auto& n : names) definers(n, it.depth, it.deps);
    if (it.kind == ItemKind::Step) {
      std::set<std::string> deps;
      std::vector<std::string> keyNames;
      ir::collectVars(it.expr, keyNames);
      for (const auto& n : keyNames) closure(n, deps);
      for (const auto& n : deps) {
        auto g = guardItems.find(n);
        if (g == guardItems.end()) continue;
        for (size_t gi : g->second) {
          if (items_[gi].depth == it.depth) it.deps.push_back(gi);
        }
      }
    }
    it.deps.erase(std::remove(it.deps.begin(), it.deps.end(), i), it.deps.end());
  }
}

// Items at `depth` in dependency order; guards are placed as early as
// possible so that nothing is loaded for iterations they reject.
std::vector<const Item*> Lowerer::orderedItems(int depth) const {
  std::vector<size_t> pending;
  for (size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].depth == depth) pending.push_back(i);
  }
  std::set<size_t> done;
  std::vector<const Item*> out;
  auto ready = [&](size_t i) {
    for (size_t d : items_[i].deps) {
      if (items_[d].depth == depth && !done.count(d)) return false;
    }
    return true;
  };
  auto rank = [&](size_t i) {
    switch (items_[i].kind) {
      case ItemKind::Guard: return 0;
      case ItemKind::Step: return 1;
      default: return 2;
    }
  };
  while (!pending.empty()) {
    size_t best = pending.size();
    for (size_t k = 0; k < pending.size(); ++k) {
      if (!ready(pending[k])) continue;
      if (best == pending.size() || rank(pending[k]) < rank(pending[best])) best = k;
    }
    if (best == pending.size()) {
      throw Error(ErrorCode::Unrecoverable, "cyclic dependencies between recovered values");
    }
    done.insert(pending[best]);
    out.push_back(&items_[pending[best]]);
    pending.erase(pending.begin() + static_cast<long>(best));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emission

IExpr Lowerer::accessValue(int a) {
  const Access& access = accesses_.at(a);
  IExpr p = position(a, static_cast<int>(access.vars.size()) - 1);
  IExpr v = ir::load(symbols_.valsArray(access.tensor), p, true);
  if (mayBeNeg(p) && !required_[a]) {
    v = ir::select(ir::ge(p, ir::intImm(0)), v, ir::floatImm(0.0));
  }
  return v;
}

IExpr Lowerer::lowerValue(const spsched::Expr& e, int& counter, const spsched::Expr& target,
                          const IExpr& replacement) {
  if (replacement && e == target) {
    counter += countAccesses(e);
    return replacement;
  }
  switch (e->kind) {
    case ExprKind::Access:
      return accessValue(counter++);
    case ExprKind::Literal:
      return ir::floatImm(e->value);
    case ExprKind::Mul: {
      IExpr a = lowerValue(e->a, counter, target, replacement);
      IExpr b = lowerValue(e->b, counter, target, replacement);
      return ir::mul(a, b);
    }
    case ExprKind::Add: {
      IExpr a = lowerValue(e->a, counter, target, replacement);
      IExpr b = lowerValue(e->b, counter, target, replacement);
      return ir::add(a, b);
    }
    case ExprKind::Workspace:
      break;
  }
  throw Error(ErrorCode::Unsupported, "workspace reads cannot appear in an input expression");
}

IStmt Lowerer::itemStmt(const Item& it) {
  switch (it.kind) {
    case ItemKind::Decl:
      return ir::decl(it.sym, resolve(it.expr));
    case ItemKind::Step: {
      const Sym& s = syms_.at(it.sym);
      IExpr t = ir::var(it.sym);
      IExpr next = ir::add(t, ir::intImm(1));
      return ir::whileLoop(
          ir::binary(ir::BinOp::Le, ir::load(s.stepArray, next, false), resolve(s.stepKey)),
          ir::assign(it.sym, next));
    }
    case ItemKind::Check:
      return ir::check(resolve(it.expr), it.message);
    case ItemKind::Guard:
      break;
  }
  return nullptr;
}

std::vector<IStmt> Lowerer::trackInits(int loop) {
  std::vector<IStmt> out;
  for (const Item* it : orderedItems(loop - 1)) {
    if (it->trackInit && it->trackLoop == loop) out.push_back(itemStmt(*it));
  }
  return out;
}

IStmt Lowerer::emitScope(int depth, Body body) {
  int n = static_cast<int>(loops_.size());
  IStmt tail = depth == n - 1 ? innermost(body) : emitLoop(depth + 1);
  auto items = orderedItems(depth);
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    const Item& item = **it;
    if (item.trackInit && item.trackLoop == preDepth_) continue;  // emitted per loop
    if (item.kind == ItemKind::Guard) {
      tail = ir::ifThen(resolve(item.expr), tail, item.counted);
    } else {
      tail = ir::block({itemStmt(item), tail});
    }
  }
  return ir::block({tail});
}

IStmt Lowerer::innermost(Body body) {
  const auto& pre = stmt_.precomputeRecord();
  IExpr value;
  if (body == Body::Producer) {
    int counter = preStart_;
    IExpr v = lowerValue(preTarget_, counter, nullptr, nullptr);
    IExpr index = ir::sub(ir::var(pre->preVar.name()), resolve(domain(pre->var).lo));
    return ir::store(pre->workspace, index, resolve(v));
  }
  int counter = 0;
  IExpr replacement;
  if (body == Body::Consumer) {
    replacement = ir::load(pre->workspace,
                           ir::sub(ir::var(pre->var.name()), resolve(domain(pre->var).lo)), true);
  }
  value = resolve(lowerValue(stmt_.assignment().rhs, counter, preTarget_, replacement));
  if (write_.tempDepth >= 0) {
    const IndexVar& t = loops_[write_.tempDepth].var;
    IExpr index = ir::sub(ir::var(t.name()), resolve(domain(t).lo));
    return ir::reduceAdd(tmpArray_, index, value, write_.strategy, true);
  }
  return ir::reduceAdd(outArray_, resolve(outputLoc_), value, write_.strategy, true);
}

IStmt Lowerer::emitWhile(int depth) {
  const Loop& loop = loops_[depth];
  if (stmt_.parallelTag(loop.var)) {
    throw Error(ErrorCode::Unsupported,
                "cannot parallelize '" + loop.var.name() + "': it co-iterates sparse operands");
  }
  std::vector<IStmt> out;
  struct Cursor {
    std::string q, end, coord, pos;
    std::string crd;
  };
  std::vector<Cursor> cursors;
  for (const auto& it : loop.iterators) {
    const Access& acc = accesses_[it.access];
    std::string prefix = symbols_.accessPrefix(it.access) + std::to_string(it.level + 1);
    Cursor c{"q" + prefix, "q" + prefix + "_end", loop.var.name() + prefix,
             symbols_.position(it.access, it.level), symbols_.crdArray(acc.tensor, it.level)};
    IExpr parent = resolve(position(it.access, it.level - 1));
    std::string posArr = symbols_.posArray(acc.tensor, it.level);
    IExpr lo = ir::load(posArr, parent, false);
    IExpr hi = ir::load(posArr, ir::add(parent, ir::intImm(1)), false);
    if (mayBeNeg(position(it.access, it.level - 1))) {
      IExpr ok = ir::ge(parent, ir::intImm(0));
      lo = ir::select(ok, lo, ir::intImm(0));
      hi = ir::select(ok, hi, ir::intImm(0));
    }
    out.push_back(ir::decl(c.q, lo));
    out.push_back(ir::decl(c.end, hi));
    cursors.push_back(std::move(c));
  }
  IExpr v = ir::var(loop.var.name());
  for (const auto& point : loop.lattice.points) {
    std::vector<size_t> in;
    for (size_t k = 0; k < loop.iterators.size(); ++k) {
      if (std::count(point.iterators.begin(), point.iterators.end(), loop.iterators[k].access)) {
        in.push_back(k);
      }
    }
    IExpr cond;
    std::vector<IStmt> body;
    IExpr vmin;
    for (size_t k : in) {
      const Cursor& c = cursors[k];
      cond = ir::land(cond, ir::lt(ir::var(c.q), ir::var(c.end)));
      body.push_back(ir::decl(c.coord, ir::load(c.crd, ir::var(c.q), false)));
      vmin = vmin ? ir::min(vmin, ir::var(c.coord)) : ir::var(c.coord);
    }
    body.push_back(ir::decl(loop.var.name(), vmin));
    for (size_t k = 0; k < cursors.size(); ++k) {
      const Cursor& c = cursors[k];
      bool here = std::count(in.begin(), in.end(), k) > 0;
      body.push_back(ir::decl(c.pos, here ? ir::select(ir::eq(ir::var(c.coord), v),
                                                       ir::var(c.q), ir::intImm(-1))
                                          : ir::intImm(-1)));
    }
    body.push_back(emitScope(depth, Body::Normal));
    for (size_t k : in) {
      const Cursor& c = cursors[k];
      body.push_back(ir::assign(c.q, ir::add(ir::var(c.q), ir::eq(ir::var(c.coord), v))));
    }
    auto w = std::make_shared<ir::StmtNode>(*ir::whileLoop(cond, ir::block(std::move(body))));
    w->statsName = loop.var.name();
    out.push_back(w);
  }
  return ir::block(std::move(out));
}

IStmt Lowerer::emitPrecompute() {
  const auto& pre = *stmt_.precomputeRecord();
  int depth = preDepth_;
  const Domain& dom = domain(pre.var);
  IExpr lo = resolve(dom.lo);
  IExpr hi = resolve(dom.hi);
  IExpr ext = resolve(dom.extent());

  std::vector<IStmt> producer = trackInits(depth);
  IStmt pbody = ir::block({ir::decl(pre.var.name(), ir::var(pre.preVar.name())),
                           emitScope(depth, Body::Producer)});
  producer.push_back(ir::forLoop(pre.preVar.name(), lo, hi, pbody,
                                 stmt_.parallelTag(pre.preVar), stmt_.unrollFactor(pre.preVar),
                                 pre.preVar.name()));
  std::vector<IStmt> consumer = trackInits(depth);
  consumer.push_back(ir::forLoop(pre.var.name(), lo, hi, emitScope(depth, Body::Consumer),
                                 stmt_.parallelTag(pre.var), stmt_.unrollFactor(pre.var),
                                 pre.var.name()));
  return ir::block({ir::alloc(pre.workspace, ext), ir::block(std::move(producer), true),
                    ir::block(std::move(consumer), true)});
}

IStmt Lowerer::emitLoop(int depth) {
  const Loop& loop = loops_[depth];
  IStmt out;
  if (depth == preDepth_) {
    out = emitPrecompute();
  } else {
    switch (loop.mode) {
      case LoopMode::Domain: {
        const Domain& dom = domain(loop.var);
        out = ir::forLoop(loop.var.name(), resolve(dom.lo), resolve(dom.hi),
                          emitScope(depth, Body::Normal), stmt_.parallelTag(loop.var),
                          stmt_.unrollFactor(loop.var), loop.var.name());
        break;
      }
      case LoopMode::Segment: {
        const Iter& it = loop.segment;
        const Access& acc = accesses_[it.access];
        IExpr parentSym = position(it.access, it.level - 1);
        IExpr parent = resolve(parentSym);
        std::string posArr = symbols_.posArray(acc.tensor, it.level);
        IExpr lo = ir::load(posArr, parent, false);
        IExpr hi = ir::load(posArr, ir::add(parent, ir::intImm(1)), false);
        if (mayBeNeg(parentSym)) {
          IExpr ok = ir::ge(parent, ir::intImm(0));
          lo = ir::select(ok, lo, ir::intImm(0));
          hi = ir::select(ok, hi, ir::intImm(0));
        }
        out = ir::forLoop(symbols_.position(it.access, it.level), lo, hi,
                          emitScope(depth, Body::Normal), stmt_.parallelTag(loop.var),
                          stmt_.unrollFactor(loop.var), loop.var.name());
        break;
      }
      case LoopMode::While:
        out = emitWhile(depth);
        break;
    }
  }
  if (depth == write_.tempDepth) {
    const Domain& dom = domain(loop.var);
    IExpr ext = resolve(dom.extent());
    std::string i = tmpArray_ + "_i";
    IStmt fold = ir::forLoop(
        i, ir::intImm(0), ext,
        ir::reduceAdd(outArray_, resolve(outputLoc_), ir::load(tmpArray_, ir::var(i), true),
                      write_.foldStrategy, false));
    out = ir::block({ir::alloc(tmpArray_, ext), out, fold});
  }
  return out;
}

ir::Program Lowerer::manifest(IStmt body) {
  ir::Program p;
  const Assignment& asg = stmt_.assignment();
  p.body = std::move(body);
  p.outputTensor = asg.lhs.tensor;
  p.outputArray = outArray_;
  p.outputSize = resolve(outputSize_);
  for (const auto& d : outputDims_) p.outputDims.push_back(resolve(d));
  p.inputTensors = asg.inputTensors();
  int slot = 0, dimSlot = 0;
  for (size_t t = 0; t < p.inputTensors.size(); ++t) {
    const std::string& name = p.inputTensors[t];
    p.arrays.push_back({symbols_.valsArray(name), ir::ArrayRole::Vals, name, -1,
                        static_cast<int>(t)});
  }
  for (const auto& name : p.inputTensors) {
    const Format& format = stmt_.formats().at(name);
    for (size_t l = 0; l < format.size(); ++l) {
      if (format[l].kind == LevelKind::Compressed) {
        int level = static_cast<int>(l);
        p.arrays.push_back({symbols_.posArray(name, level), ir::ArrayRole::Pos, name, level, slot});
        p.arrays.push_back({symbols_.crdArray(name, level), ir::ArrayRole::Crd, name, level, slot});
        ++slot;
      }
    }
  }
  for (const auto& name : p.inputTensors) {
    const Format& format = stmt_.formats().at(name);
    for (size_t l = 0; l < format.size(); ++l) {
      p.dims.push_back({symbols_.dimensionName(name, static_cast<int>(l)), name,
                        static_cast<int>(l), dimSlot++});
    }
  }
  p.arrays.push_back({outArray_, ir::ArrayRole::Output, asg.lhs.tensor, -1, -1});
  if (const auto& pre = stmt_.precomputeRecord()) {
    p.arrays.push_back({pre->workspace, ir::ArrayRole::Workspace, "", -1, -1});
  }
  if (!tmpArray_.empty()) {
    p.arrays.push_back({tmpArray_, ir::ArrayRole::Workspace, "", -1, -1});
  }
  for (const auto& v : stmt_.forest()) p.visitSymbols.push_back(v.name());
  for (const auto& o : prov_.originals()) {
    if (!stmt_.graph().contains(o)) p.visitSymbols.push_back(o.name());
  }
  return p;
}

ir::Program Lowerer::run() {
  const Assignment& asg = stmt_.assignment();
  for (const auto& t : asg.inputTensors()) {
    for (size_t l = 0; l < stmt_.formats().at(t).size(); ++l) {
      dimNames_.insert(symbols_.dimensionName(t, static_cast<int>(l)));
    }
  }
  domains_ = propagateBounds(stmt_, symbols_);
  outArray_ = asg.lhs.tensor + "_vals";
  setupLoops();
  computeRequired();
  int n = static_cast<int>(loops_.size());
  if (const auto& pre = stmt_.precomputeRecord()) {
    preDepth_ = n - 1;
    int before = 0;
    spsched::Expr found;
    if (!findNode(asg.rhs, pre->expr, false, before, found)) {
      before = 0;
      findNode(asg.rhs, pre->expr, true, before, found);
    }
    if (!found) {
      throw Error(ErrorCode::ExprNotFound, "precomputed expression is not part of the statement");
    }
    preTarget_ = found;
    preStart_ = before;
  }

  // Demand everything the innermost body and the loop headers refer to.
  for (const auto& o : prov_.originals()) value(o);
  for (size_t a = 0; a < accesses_.size(); ++a) {
    position(static_cast<int>(a), static_cast<int>(accesses_[a].vars.size()) - 1);
  }
  outputLoc_ = ir::intImm(0);
  outputSize_ = ir::intImm(1);
  for (const auto& w : asg.lhs.vars) {
    IExpr ext = symbols_.extent(w);
    outputLoc_ = ir::add(ir::mul(outputLoc_, ext), value(w));
    outputSize_ = ir::mul(outputSize_, ext);
    outputDims_.push_back(ext);
  }
  for (size_t a = 0; a < accesses_.size(); ++a) {
    if (!required_[a]) continue;
    for (size_t k = 0; k < accesses_[a].vars.size(); ++k) {
      std::string p = symbols_.position(static_cast<int>(a), static_cast<int>(k));
      if (!syms_.count(p)) continue;
      Sym& s = sym(p);
      if (s.mayBeNeg) s.guards.push_back({ir::ge(ir::var(p), ir::intImm(0)), false});
    }
  }
  for (const auto& r : prov_.relations()) {
    if (r.kind != RelKind::Bound) continue;
    IExpr cond = ir::eq(domain(r.parents[0]).extent(), ir::intImm(r.size));
    if (ir::isInt(cond, 1)) continue;
    checks_.push_back({use(cond), "extent of '" + r.parents[0].name() + "' must equal " +
                                      std::to_string(r.size) + " (MaxExact)"});
  }
  for (int d = 0; d < n; ++d) {
    const Loop& loop = loops_[d];
    std::vector<IExpr> header;
    if (loop.mode == LoopMode::Domain || d == preDepth_) {
      header = {use(domain(loop.var).lo), use(domain(loop.var).hi)};
    } else {
      for (const auto& it : loop.iterators) header.push_back(position(it.access, it.level - 1));
    }
    for (const auto& h : header) {
      if (exprDepth(h) >= d) {
        throw Error(ErrorCode::DiscordantTraversal,
                    "discordant traversal: bounds of '" + loop.var.name() +
                        "' depend on values computed inside it");
      }
    }
  }
  if (preDepth_ >= 0) {
    use(domain(stmt_.precomputeRecord()->var).extent());
    // Lowering the value demands every position it reads.
    int counter = 0;
    lowerValue(asg.rhs, counter, nullptr, nullptr);
  }
  planWrites();
  buildItems();

  IStmt top = n == 0 ? innermost(Body::Normal) : emitScope(-1, Body::Normal);
  IStmt body = ir::block({ir::zero(outArray_, resolve(outputSize_)), top});
  return manifest(body);
}

}  // namespace

ir::Program lower(const ScheduledStmt& stmt, const LowerOptions& options) {
  return Lowerer(stmt, options).run();
}

std::map<std::string, std::vector<int>> tensorDims(const TensorMap& tensors) {
  std::map<std::string, std::vector<int>> out;
  for (const auto& [name, t] : tensors) out[name] = t.dims();
  return out;
}

}  // namespace spsched
