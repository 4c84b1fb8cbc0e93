#include "spsched/interpret.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <set>
#include <thread>
#include <unordered_map>

#include "spsched/error.h"

namespace spsched {

namespace {

struct Array {
  std::string name;
  const int32_t* ints = nullptr;
  const double* reals = nullptr;
  int buffer = -1;  // writable arrays live in the frame
  size_t size = 0;
};

struct CExpr {
  ir::ExprKind kind = ir::ExprKind::IntImm;
  ir::BinOp op = ir::BinOp::Add;
  ir::SearchMode mode = ir::SearchMode::Exact;
  bool isFloat = false;
  int64_t ival = 0;
  double fval = 0.0;
  int slot = -1;
  int array = -1;
  std::unique_ptr<CExpr> a, b, c;
};

struct CStmt {
  ir::StmtKind kind = ir::StmtKind::Block;
  std::vector<CStmt> stmts;
  int slot = -1;
  std::unique_ptr<CExpr> lo, hi, cond, index, value;
  std::unique_ptr<CStmt> body;
  bool parallel = false;
  bool threadable = false;  // CPUThread loop whose body may run on private copies
  int stats = -1;
  bool isGuard = false;
  int array = -1;
  bool countsAsWork = false;
  std::string message;
};

struct Frame {
  std::vector<int64_t> env;
  std::vector<std::vector<double>> buffers;
  std::vector<int64_t> iterations;
  std::vector<std::vector<int64_t>> instanceWork;
  int64_t guardPasses = 0;
  int64_t guardFailures = 0;
  int64_t work = 0;
  std::vector<std::vector<int64_t>> visits;
  bool inParallel = false;
};

class Machine {
public:
  Machine(const ir::Program& program, const TensorMap& inputs, const ExecOptions& options);

  ExecResult run();
  int slot(const std::string& name);
  std::unique_ptr<CExpr> compile(const ir::Expr& e);
  int64_t evalInt(const CExpr& e, Frame& f) const;
  Frame makeFrame() const;

private:
  CStmt compile(const ir::Stmt& s);
  int arrayIndex(const std::string& name) const;
  double evalReal(const CExpr& e, Frame& f) const;
  int64_t loadInt(int array, int64_t index, const Frame& f) const;
  double loadReal(int array, int64_t index, const Frame& f) const;
  double& element(int array, int64_t index, Frame& f) const;
  void exec(const CStmt& s, Frame& f) const;
  void execFor(const CStmt& s, Frame& f, int64_t lo, int64_t hi) const;
  void execThreaded(const CStmt& s, Frame& f, int64_t lo, int64_t hi) const;
  [[noreturn]] void outOfBounds(int array, int64_t index) const;

  const ir::Program& program_;
  const TensorMap& inputs_;
  ExecOptions options_;
  std::unordered_map<std::string, int> slots_;
  std::vector<Array> arrays_;
  std::unordered_map<std::string, int> arrayIndex_;
  std::vector<std::string> statsNames_;
  std::vector<bool> statsParallel_;
  std::vector<int> dimSlots_;
  std::vector<int64_t> dimValues_;
  std::vector<int> visitSlots_;
  int outputBuffer_ = -1;
  int buffers_ = 0;
};

Machine::Machine(const ir::Program& program, const TensorMap& inputs, const ExecOptions& options)
    : program_(program), inputs_(inputs), options_(options) {
  auto tensor = [&](const std::string& name) -> const Tensor& {
    auto it = inputs.find(name);
    if (it == inputs.end()) {
      throw Error(ErrorCode::UnboundTensor, "tensor '" + name + "' is not bound");
    }
    return it->second;
  };
  for (const auto& info : program.arrays) {
    Array a;
    a.name = info.name;
    switch (info.role) {
      case ir::ArrayRole::Vals: {
        const Tensor& t = tensor(info.tensor);
        a.reals = t.vals().data();
        a.size = t.vals().size();
        break;
      }
      case ir::ArrayRole::Pos:
      case ir::ArrayRole::Crd: {
        const Tensor& t = tensor(info.tensor);
        if (info.level >= static_cast<int>(t.order()) ||
            t.level(info.level).format.kind != LevelKind::Compressed) {
          throw Error(ErrorCode::InvalidArgument,
                      "tensor '" + info.tensor + "' level " + std::to_string(info.level + 1) +
                          " is not compressed");
        }
        const auto& v = info.role == ir::ArrayRole::Pos ? t.level(info.level).pos
                                                         : t.level(info.level).crd;
        a.ints = v.data();
        a.size = v.size();
        break;
      }
      case ir::ArrayRole::Output:
      case ir::ArrayRole::Workspace:
        a.buffer = buffers_++;
        if (info.role == ir::ArrayRole::Output) outputBuffer_ = a.buffer;
        break;
    }
    arrayIndex_[a.name] = static_cast<int>(arrays_.size());
    arrays_.push_back(std::move(a));
  }
  for (const auto& d : program.dims) {
    const Tensor& t = tensor(d.tensor);
    if (d.level >= static_cast<int>(t.order())) {
      throw Error(ErrorCode::DimensionMismatch, "tensor '" + d.tensor + "' has too few dimensions");
    }
    dimSlots_.push_back(slot(d.name));
    dimValues_.push_back(t.dims()[d.level]);
  }
}

int Machine::slot(const std::string& name) {
  auto [it, inserted] = slots_.try_emplace(name, static_cast<int>(slots_.size()));
  return it->second;
}

int Machine::arrayIndex(const std::string& name) const {
  auto it = arrayIndex_.find(name);
  if (it == arrayIndex_.end()) {
    throw Error(ErrorCode::Unrecoverable, "kernel refers to unknown array '" + name + "'");
  }
  return it->second;
}

std::unique_ptr<CExpr> Machine::compile(const ir::Expr& e) {
  if (!e) return nullptr;
  auto c = std::make_unique<CExpr>();
  c->kind = e->kind;
  c->op = e->op;
  c->mode = e->mode;
  c->isFloat = e->isFloat;
  c->ival = e->ival;
  c->fval = e->fval;
  if (e->kind == ir::ExprKind::Var) c->slot = slot(e->name);
  if (e->kind == ir::ExprKind::Load || e->kind == ir::ExprKind::Search) {
    c->array = arrayIndex(e->name);
  }
  c->a = compile(e->a);
  c->b = compile(e->b);
  c->c = compile(e->c);
  return c;
}

namespace {

void collectWrites(const ir::Stmt& s, std::set<std::string>& written,
                   std::set<std::string>& allocated) {
  if (!s) return;
  switch (s->kind) {
    case ir::StmtKind::Store:
    case ir::StmtKind::ReduceAdd:
      written.insert(s->array);
      break;
    case ir::StmtKind::Alloc:
      allocated.insert(s->array);
      break;
    default:
      break;
  }
  for (const auto& c : s->stmts) collectWrites(c, written, allocated);
  collectWrites(s->body, written, allocated);
}

}  // namespace

CStmt Machine::compile(const ir::Stmt& s) {
  CStmt c;
  c.kind = s->kind;
  for (const auto& child : s->stmts) c.stmts.push_back(compile(child));
  if (!s->var.empty()) c.slot = slot(s->var);
  c.lo = compile(s->lo);
  c.hi = compile(s->hi);
  c.cond = compile(s->cond);
  c.index = compile(s->index);
  c.value = compile(s->value);
  if (s->body) c.body = std::make_unique<CStmt>(compile(s->body));
  c.parallel = s->parallel.has_value();
  if (!s->statsName.empty()) {
    auto it = std::find(statsNames_.begin(), statsNames_.end(), s->statsName);
    c.stats = static_cast<int>(it - statsNames_.begin());
    if (it == statsNames_.end()) {
      statsNames_.push_back(s->statsName);
      statsParallel_.push_back(false);
    }
    if (c.parallel) statsParallel_[c.stats] = true;
  }
  if (s->kind == ir::StmtKind::For && s->parallel &&
      s->parallel->unit == ParallelUnit::CPUThread) {
    std::set<std::string> written, allocated;
    collectWrites(s->body, written, allocated);
    c.threadable = std::all_of(written.begin(), written.end(), [&](const std::string& a) {
      return a == program_.outputArray || allocated.count(a);
    });
  }
  c.isGuard = s->isGuard;
  if (!s->array.empty()) c.array = arrayIndex(s->array);
  c.countsAsWork = s->countsAsWork;
  c.message = s->message;
  return c;
}

void Machine::outOfBounds(int array, int64_t index) const {
  const Array& a = arrays_[array];
  throw Error(ErrorCode::ArrayBounds, "access " + a.name + "[" + std::to_string(index) +
                                          "] outside [0, " + std::to_string(a.size) + ")");
}

int64_t Machine::loadInt(int array, int64_t index, const Frame& f) const {
  const Array& a = arrays_[array];
  if (a.buffer >= 0) {
    const auto& buf = f.buffers[a.buffer];
    if (index < 0 || static_cast<size_t>(index) >= buf.size()) outOfBounds(array, index);
    return static_cast<int64_t>(buf[index]);
  }
  if (index < 0 || static_cast<size_t>(index) >= a.size) outOfBounds(array, index);
  return a.ints ? a.ints[index] : static_cast<int64_t>(a.reals[index]);
}

double Machine::loadReal(int array, int64_t index, const Frame& f) const {
  const Array& a = arrays_[array];
  if (a.buffer >= 0) {
    const auto& buf = f.buffers[a.buffer];
    if (index < 0 || static_cast<size_t>(index) >= buf.size()) outOfBounds(array, index);
    return buf[index];
  }
  if (index < 0 || static_cast<size_t>(index) >= a.size) outOfBounds(array, index);
  return a.reals ? a.reals[index] : a.ints[index];
}

double& Machine::element(int array, int64_t index, Frame& f) const {
  const Array& a = arrays_[array];
  if (a.buffer < 0) {
    throw Error(ErrorCode::Unrecoverable, "kernel writes to input array '" + a.name + "'");
  }
  auto& buf = f.buffers[a.buffer];
  if (index < 0 || static_cast<size_t>(index) >= buf.size()) {
    throw Error(ErrorCode::ArrayBounds, "write " + a.name + "[" + std::to_string(index) +
                                            "] outside [0, " + std::to_string(buf.size()) + ")");
  }
  return buf[index];
}

int64_t Machine::evalInt(const CExpr& e, Frame& f) const {
  switch (e.kind) {
    case ir::ExprKind::IntImm:
      return e.ival;
    case ir::ExprKind::FloatImm:
      return static_cast<int64_t>(e.fval);
    case ir::ExprKind::Var:
      return f.env[e.slot];
    case ir::ExprKind::Load:
      return loadInt(e.array, evalInt(*e.a, f), f);
    case ir::ExprKind::Select:
      return evalInt(*e.a, f) ? evalInt(*e.b, f) : evalInt(*e.c, f);
    case ir::ExprKind::Search: {
      int64_t lo = evalInt(*e.a, f), hi = evalInt(*e.b, f), key = evalInt(*e.c, f);
      const Array& a = arrays_[e.array];
      if (lo < 0 || hi > static_cast<int64_t>(a.size) || (lo > hi)) outOfBounds(e.array, lo < 0 ? lo : hi);
      const int32_t* base = a.ints;
      if (e.mode == ir::SearchMode::SegmentOf) {
        const int32_t* q = std::upper_bound(base + lo, base + hi, key);
        return (q - base) - 1;
      }
      const int32_t* q = std::lower_bound(base + lo, base + hi, key);
      return q != base + hi && *q == key ? q - base : -1;
    }
    case ir::ExprKind::Binary: {
      if (e.isFloat) return static_cast<int64_t>(evalReal(e, f));
      if (e.op == ir::BinOp::And) return evalInt(*e.a, f) && evalInt(*e.b, f);
      if (e.op == ir::BinOp::Or) return evalInt(*e.a, f) || evalInt(*e.b, f);
      int64_t x = evalInt(*e.a, f), y = evalInt(*e.b, f);
      switch (e.op) {
        case ir::BinOp::Add: return x + y;
        case ir::BinOp::Sub: return x - y;
        case ir::BinOp::Mul: return x * y;
        case ir::BinOp::Div:
          if (y == 0) throw Error(ErrorCode::ArrayBounds, "division by zero in index expression");
          return x / y;
        case ir::BinOp::Mod:
          if (y == 0) throw Error(ErrorCode::ArrayBounds, "division by zero in index expression");
          return x % y;
        case ir::BinOp::Min: return std::min(x, y);
        case ir::BinOp::Max: return std::max(x, y);
        case ir::BinOp::Lt: return x < y;
        case ir::BinOp::Le: return x <= y;
        case ir::BinOp::Gt: return x > y;
        case ir::BinOp::Ge: return x >= y;
        case ir::BinOp::Eq: return x == y;
        case ir::BinOp::Ne: return x != y;
        default: break;
      }
    }
  }
  return 0;
}

double Machine::evalReal(const CExpr& e, Frame& f) const {
  switch (e.kind) {
    case ir::ExprKind::FloatImm:
      return e.fval;
    case ir::ExprKind::Load:
      if (e.isFloat) return loadReal(e.array, evalInt(*e.a, f), f);
      return static_cast<double>(evalInt(e, f));
    case ir::ExprKind::Select:
      return evalInt(*e.a, f) ? evalReal(*e.b, f) : evalReal(*e.c, f);
    case ir::ExprKind::Binary: {
      if (!e.isFloat) return static_cast<double>(evalInt(e, f));
      double x = evalReal(*e.a, f), y = evalReal(*e.b, f);
      switch (e.op) {
        case ir::BinOp::Add: return x + y;
        case ir::BinOp::Sub: return x - y;
        case ir::BinOp::Mul: return x * y;
        case ir::BinOp::Div: return x / y;
        case ir::BinOp::Min: return std::min(x, y);
        case ir::BinOp::Max: return std::max(x, y);
        case ir::BinOp::Lt: return x < y;
        case ir::BinOp::Le: return x <= y;
        case ir::BinOp::Gt: return x > y;
        case ir::BinOp::Ge: return x >= y;
        case ir::BinOp::Eq: return x == y;
        case ir::BinOp::Ne: return x != y;
        default: return 0.0;
      }
    }
    default:
      return static_cast<double>(evalInt(e, f));
  }
}

void Machine::exec(const CStmt& s, Frame& f) const {
  switch (s.kind) {
    case ir::StmtKind::Block:
      for (const auto& c : s.stmts) exec(c, f);
      break;
    case ir::StmtKind::For: {
      int64_t lo = evalInt(*s.lo, f), hi = evalInt(*s.hi, f);
      if (s.threadable && options_.threads > 1 && !f.inParallel && hi - lo > 1) {
        execThreaded(s, f, lo, hi);
      } else {
        execFor(s, f, lo, hi);
      }
      break;
    }
    case ir::StmtKind::While:
      while (evalInt(*s.cond, f)) {
        if (s.stats >= 0) ++f.iterations[s.stats];
        exec(*s.body, f);
      }
      break;
    case ir::StmtKind::If:
      if (evalInt(*s.cond, f)) {
        if (s.isGuard) ++f.guardPasses;
        exec(*s.body, f);
      } else if (s.isGuard) {
        ++f.guardFailures;
      }
      break;
    case ir::StmtKind::Decl:
    case ir::StmtKind::Assign:
      f.env[s.slot] = evalInt(*s.value, f);
      break;
    case ir::StmtKind::Store:
      element(s.array, evalInt(*s.index, f), f) = evalReal(*s.value, f);
      break;
    case ir::StmtKind::ReduceAdd: {
      int64_t index = evalInt(*s.index, f);
      double v = evalReal(*s.value, f);
      element(s.array, index, f) += v;
      if (s.countsAsWork) {
        ++f.work;
        if (options_.recordVisits) {
          std::vector<int64_t> snap;
          snap.reserve(visitSlots_.size());
          for (int slot : visitSlots_) snap.push_back(f.env[slot]);
          f.visits.push_back(std::move(snap));
        }
      }
      break;
    }
    case ir::StmtKind::Alloc:
    case ir::StmtKind::Zero: {
      int64_t size = evalInt(*s.value, f);
      if (size < 0) throw Error(ErrorCode::ArrayBounds, "negative allocation size");
      auto& buf = f.buffers[arrays_[s.array].buffer];
      buf.assign(static_cast<size_t>(size), 0.0);
      break;
    }
    case ir::StmtKind::Check:
      if (!evalInt(*s.cond, f)) throw Error(ErrorCode::ContractViolation, s.message);
      break;
  }
}

void Machine::execFor(const CStmt& s, Frame& f, int64_t lo, int64_t hi) const {
  for (int64_t v = lo; v < hi; ++v) {
    f.env[s.slot] = v;
    if (s.stats >= 0) ++f.iterations[s.stats];
    if (s.parallel && s.stats >= 0) {
      int64_t before = f.work;
      exec(*s.body, f);
      f.instanceWork[s.stats].push_back(f.work - before);
    } else {
      exec(*s.body, f);
    }
  }
}

void Machine::execThreaded(const CStmt& s, Frame& f, int64_t lo, int64_t hi) const {
  int64_t count = hi - lo;
  int threads = static_cast<int>(std::min<int64_t>(options_.threads, count));
  std::vector<Frame> frames(threads, f);
  std::vector<std::exception_ptr> errors(threads);
  for (auto& fr : frames) {
    fr.inParallel = true;
    fr.buffers[outputBuffer_].assign(f.buffers[outputBuffer_].size(), 0.0);
    fr.iterations.assign(fr.iterations.size(), 0);
    for (auto& w : fr.instanceWork) w.clear();
    fr.guardPasses = fr.guardFailures = fr.work = 0;
    fr.visits.clear();
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    int64_t a = lo + count * t / threads, b = lo + count * (t + 1) / threads;
    pool.emplace_back([&, t, a, b] {
      try {
        execFor(s, frames[t], a, b);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  auto& out = f.buffers[outputBuffer_];
  for (auto& fr : frames) {
    const auto& part = fr.buffers[outputBuffer_];
    for (size_t i = 0; i < out.size(); ++i) out[i] += part[i];
    for (size_t k = 0; k < f.iterations.size(); ++k) f.iterations[k] += fr.iterations[k];
    for (size_t k = 0; k < f.instanceWork.size(); ++k) {
      auto& dst = f.instanceWork[k];
      dst.insert(dst.end(), fr.instanceWork[k].begin(), fr.instanceWork[k].end());
    }
    f.guardPasses += fr.guardPasses;
    f.guardFailures += fr.guardFailures;
    f.work += fr.work;
    f.visits.insert(f.visits.end(), std::make_move_iterator(fr.visits.begin()),
                    std::make_move_iterator(fr.visits.end()));
  }
}

Frame Machine::makeFrame() const {
  Frame f;
  f.env.assign(slots_.size(), 0);
  for (size_t k = 0; k < dimSlots_.size(); ++k) f.env[dimSlots_[k]] = dimValues_[k];
  f.buffers.resize(buffers_);
  f.iterations.assign(statsNames_.size(), 0);
  f.instanceWork.resize(statsNames_.size());
  return f;
}

ExecResult Machine::run() {
  CStmt body = compile(program_.body);
  std::vector<std::unique_ptr<CExpr>> dims;
  for (const auto& d : program_.outputDims) dims.push_back(compile(d));
  for (const auto& v : program_.visitSymbols) visitSlots_.push_back(slot(v));
  Frame f = makeFrame();

  std::vector<int> outDims;
  for (const auto& d : dims) outDims.push_back(static_cast<int>(evalInt(*d, f)));
  exec(body, f);

  ExecResult result;
  result.output = DenseTensor(outDims);
  const auto& out = f.buffers[outputBuffer_];
  if (out.size() != result.output.vals.size()) {
    throw Error(ErrorCode::ArrayBounds, "output buffer size does not match output dimensions");
  }
  result.output.vals = out;
  ExecStats& st = result.stats;
  for (size_t k = 0; k < statsNames_.size(); ++k) {
    st.loopIterations[statsNames_[k]] = f.iterations[k];
    if (statsParallel_[k]) st.instanceWork[statsNames_[k]] = std::move(f.instanceWork[k]);
  }
  st.guardPasses = f.guardPasses;
  st.guardFailures = f.guardFailures;
  st.totalWork = f.work;
  st.visitSymbols = program_.visitSymbols;
  st.visits = std::move(f.visits);
  return result;
}

}  // namespace

ExecResult interpret(const ir::Program& program, const TensorMap& inputs,
                     const ExecOptions& options) {
  return Machine(program, inputs, options).run();
}

int64_t evaluate(const ir::Expr& expr, const std::map<std::string, int64_t>& env,
                 const ir::Program& program, const TensorMap& inputs) {
  Machine m(program, inputs, {});
  auto c = m.compile(expr);
  std::vector<std::pair<int, int64_t>> bound;
  for (const auto& [name, v] : env) bound.push_back({m.slot(name), v});
  Frame f = m.makeFrame();
  for (const auto& [slot, v] : bound) f.env[slot] = v;
  return m.evalInt(*c, f);
}

}  // namespace spsched
