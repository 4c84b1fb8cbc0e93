#include "spsched/codegen_c.h"

#include <algorithm>
#include <set>
#include <sstream>

namespace spsched {

namespace {

using ir::StmtKind;

void scanExpr(const ir::Expr& e, std::set<std::string>& names, std::set<std::string>& helpers) {
  if (!e) return;
  if (e->kind == ir::ExprKind::Var || e->kind == ir::ExprKind::Load ||
      e->kind == ir::ExprKind::Search) {
    names.insert(e->name);
  }
  if (e->kind == ir::ExprKind::Search) {
    helpers.insert(e->mode == ir::SearchMode::SegmentOf ? "segment_of" : "find");
  }
  if (e->kind == ir::ExprKind::Binary && e->op == ir::BinOp::Min) helpers.insert("min");
  if (e->kind == ir::ExprKind::Binary && e->op == ir::BinOp::Max) helpers.insert("max");
  scanExpr(e->a, names, helpers);
  scanExpr(e->b, names, helpers);
  scanExpr(e->c, names, helpers);
}

void scan(const ir::Stmt& s, std::set<std::string>& names, std::set<std::string>& helpers) {
  if (!s) return;
  for (const auto& c : s->stmts) scan(c, names, helpers);
  for (const auto* e : {&s->lo, &s->hi, &s->cond, &s->index, &s->value}) {
    scanExpr(*e, names, helpers);
  }
  if (!s->array.empty()) names.insert(s->array);
  scan(s->body, names, helpers);
}

class Emitter {
public:
  explicit Emitter(const ir::Program& p) : program_(p) {}

  std::string run(std::vector<std::string>& manifest) {
    std::set<std::string> names, helpers;
    scan(program_.body, names, helpers);

    os_ << "/* Generated kernel.\n";
    for (const auto& a : program_.arrays) {
      std::string line;
      switch (a.role) {
        case ir::ArrayRole::Vals: line = "vals[" + std::to_string(a.slot) + "] = " + a.name; break;
        case ir::ArrayRole::Pos: line = "pos[" + std::to_string(a.slot) + "] = " + a.name; break;
        case ir::ArrayRole::Crd: line = "crd[" + std::to_string(a.slot) + "] = " + a.name; break;
        case ir::ArrayRole::Output: line = "out = " + a.name; break;
        case ir::ArrayRole::Workspace: continue;
      }
      manifest.push_back(line);
    }
    for (const auto& d : program_.dims) {
      manifest.push_back("dims[" + std::to_string(d.slot) + "] = " + d.name);
    }
    for (const auto& m : manifest) os_ << " *   " << m << "\n";
    os_ << " */\n#include <stdint.h>\n#include <string.h>\n";

    if (helpers.count("segment_of")) {
      os_ << "\n/* Largest q in [lo, hi) with a[q] <= key; lo - 1 if none. */\n"
             "static int64_t spsched_segment_of(const int32_t* a, int64_t lo, int64_t hi, "
             "int64_t key) {\n"
             "  int64_t first = lo;\n"
             "  while (first < hi) {\n"
             "    int64_t mid = first + (hi - first) / 2;\n"
             "    if (a[mid] <= key) first = mid + 1; else hi = mid;\n"
             "  }\n"
             "  return first - 1;\n"
             "}\n";
    }
    if (helpers.count("find")) {
      os_ << "\n/* The q in [lo, hi) with a[q] == key, or -1. */\n"
             "static int64_t spsched_find(const int32_t* a, int64_t lo, int64_t hi, "
             "int64_t key) {\n"
             "  int64_t end = hi;\n"
             "  while (lo < hi) {\n"
             "    int64_t mid = lo + (hi - lo) / 2;\n"
             "    if (a[mid] < key) lo = mid + 1; else hi = mid;\n"
             "  }\n"
             "  return lo < end && a[lo] == key ? lo : -1;\n"
             "}\n";
    }
    if (helpers.count("min")) {
      os_ << "\nstatic int64_t spsched_min(int64_t a, int64_t b) { return a < b ? a : b; }\n";
    }
    if (helpers.count("max")) {
      os_ << "\nstatic int64_t spsched_max(int64_t a, int64_t b) { return a > b ? a : b; }\n";
    }

    os_ << "\nvoid compute(double* out, const double** vals, const int32_t** pos, "
           "const int32_t** crd, const int32_t* dims) {\n";
    int depth = 1;
    std::set<std::string> params;
    for (const auto& a : program_.arrays) {
      if (!names.count(a.name)) continue;
      params.insert(a.role == ir::ArrayRole::Vals  ? "vals"
                    : a.role == ir::ArrayRole::Pos ? "pos"
                    : a.role == ir::ArrayRole::Crd ? "crd"
                                                   : "out");
      std::string slot = std::to_string(a.slot);
      switch (a.role) {
        case ir::ArrayRole::Vals:
          line(depth) << "const double* " << a.name << " = vals[" << slot << "];\n";
          break;
        case ir::ArrayRole::Pos:
          line(depth) << "const int32_t* " << a.name << " = pos[" << slot << "];\n";
          break;
        case ir::ArrayRole::Crd:
          line(depth) << "const int32_t* " << a.name << " = crd[" << slot << "];\n";
          break;
        case ir::ArrayRole::Output:
          line(depth) << "double* " << a.name << " = out;\n";
          break;
        case ir::ArrayRole::Workspace:
          continue;
      }
    }
    for (const auto& d : program_.dims) {
      if (!names.count(d.name)) continue;
      line(depth) << "const int64_t " << d.name << " = dims[" << d.slot << "];\n";
      params.insert("dims");
    }
    for (const char* p : {"out", "vals", "pos", "crd", "dims"}) {
      if (!params.count(p)) line(depth) << "(void)" << p << ";\n";
    }
    body(program_.body, depth);
    os_ << "}\n";
    return os_.str();
  }

private:
  std::ostream& line(int depth) {
    for (int i = 0; i < depth; ++i) os_ << "  ";
    return os_;
  }

  static std::string c(const ir::Expr& e) { return ir::print(e, ir::PrintStyle::C); }

  void body(const ir::Stmt& s, int depth) {
    if (s->kind == StmtKind::Block && !s->scoped) {
      sequence(s->stmts, depth);
    } else {
      sequence({s}, depth);
    }
  }

  // Declarations nothing later in the scope reads exist in the IR only for
  // visit records; they are dropped here.
  void sequence(const std::vector<ir::Stmt>& stmts, int depth) {
    for (size_t k = 0; k < stmts.size(); ++k) {
      if (stmts[k]->kind == StmtKind::Decl) {
        std::set<std::string> later, unusedHelpers;
        for (size_t m = k + 1; m < stmts.size(); ++m) scan(stmts[m], later, unusedHelpers);
        if (!later.count(stmts[k]->var)) continue;
      }
      stmt(stmts[k], depth);
    }
  }

  void stmt(const ir::Stmt& s, int depth) {
    if (!s->comment.empty()) line(depth) << "/* " << s->comment << " */\n";
    switch (s->kind) {
      case StmtKind::Block:
        if (s->scoped) {
          line(depth) << "{\n";
          sequence(s->stmts, depth + 1);
          line(depth) << "}\n";
        } else {
          sequence(s->stmts, depth);
        }
        break;
      case StmtKind::For:
        forLoop(*s, depth);
        break;
      case StmtKind::While:
        line(depth) << "while (" << c(s->cond) << ") {\n";
        body(s->body, depth + 1);
        line(depth) << "}\n";
        break;
      case StmtKind::If:
        line(depth) << "if (" << c(s->cond) << ") {\n";
        body(s->body, depth + 1);
        line(depth) << "}\n";
        break;
      case StmtKind::Decl:
        line(depth) << "int64_t " << s->var << " = " << c(s->value) << ";\n";
        break;
      case StmtKind::Assign:
        line(depth) << s->var << " = " << c(s->value) << ";\n";
        break;
      case StmtKind::Store:
        line(depth) << s->array << "[" << c(s->index) << "] = " << c(s->value) << ";\n";
        break;
      case StmtKind::ReduceAdd:
        if (s->strategy == RaceStrategy::Atomics) line(depth) << "#pragma omp atomic\n";
        line(depth) << s->array << "[" << c(s->index) << "] += " << c(s->value) << ";\n";
        break;
      case StmtKind::Alloc: {
        std::string n = c(s->value);
        auto size = ir::constValue(s->value);
        if (size) {
          line(depth) << "double " << s->array << "[" << std::max<int64_t>(*size, 1) << "];\n";
        } else {
          line(depth) << "double " << s->array << "[(" << n << ") > 0 ? (" << n << ") : 1];\n";
        }
        line(depth) << "memset(" << s->array << ", 0, sizeof(double) * (" << n << "));\n";
        break;
      }
      case StmtKind::Zero:
        line(depth) << "memset(" << s->array << ", 0, sizeof(double) * (" << c(s->value)
                    << "));\n";
        break;
      case StmtKind::Check:
        line(depth) << "if (!(" << c(s->cond) << ")) return; /* " << s->message << " */\n";
        break;
    }
  }

  void forLoop(const ir::StmtNode& s, int depth) {
    if (s.parallel) {
      line(depth) << "/* parallel: " << toString(s.parallel->unit) << ", "
                  << toString(s.parallel->strategy) << " */\n";
      if (s.parallel->unit == ParallelUnit::CPUThread) line(depth) << "#pragma omp parallel for\n";
    }
    std::string lo = c(s.lo), hi = c(s.hi);
    if (s.unroll <= 1) {
      line(depth) << "for (int64_t " << s.var << " = " << lo << "; " << s.var << " < " << hi
                  << "; " << s.var << "++) {\n";
      body(s.body, depth + 1);
      line(depth) << "}\n";
      return;
    }
    // Unrolled: one copy of the body per lane, guarded unless exact.
    int u = s.unroll;
    std::string base = s.var + "_base";
    auto extent = ir::constValue(ir::sub(s.hi, s.lo));
    bool exact = extent && *extent % u == 0;
    line(depth) << "/* unroll " << u << " */\n";
    line(depth) << "for (int64_t " << base << " = " << lo << "; " << base << " < " << hi << "; "
                << base << " += " << u << ") {\n";
    for (int k = 0; k < u; ++k) {
      std::string at = k == 0 ? base : base + " + " + std::to_string(k);
      if (exact || k == 0) {
        line(depth + 1) << "{\n";
      } else {
        line(depth + 1) << "if (" << at << " < " << hi << ") {\n";
      }
      line(depth + 2) << "const int64_t " << s.var << " = " << at << ";\n";
      body(s.body, depth + 2);
      line(depth + 1) << "}\n";
    }
    line(depth) << "}\n";
  }

  const ir::Program& program_;
  std::ostringstream os_;

};

}  // namespace

KernelSource emitC(const ir::Program& program) {
  KernelSource k;
  k.text = Emitter(program).run(k.manifest);
  return k;
}

}  // namespace spsched
