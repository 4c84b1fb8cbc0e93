#include "spsched/ir.h"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace spsched::ir {

namespace {

std::shared_ptr<ExprNode> node(ExprKind kind) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  return n;
}

std::shared_ptr<StmtNode> snode(StmtKind kind) {
  auto n = std::make_shared<StmtNode>();
  n->kind = kind;
  return n;
}

int64_t floorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Expr intImm(int64_t v) {
  auto n = node(ExprKind::IntImm);
  n->ival = v;
  return n;
}

Expr floatImm(double v) {
  auto n = node(ExprKind::FloatImm);
  n->fval = v;
  n->isFloat = true;
  return n;
}

Expr var(const std::string& name) {
  auto n = node(ExprKind::Var);
  n->name = name;
  return n;
}

bool isInt(const Expr& e, int64_t v) { return e && e->kind == ExprKind::IntImm && e->ival == v; }

std::optional<int64_t> constValue(const Expr& e) {
  if (e && e->kind == ExprKind::IntImm) return e->ival;
  return std::nullopt;
}

Expr binary(BinOp op, Expr a, Expr b) {
  auto ca = constValue(a), cb = constValue(b);
  if (ca && cb) {
    int64_t x = *ca, y = *cb;
    switch (op) {
      case BinOp::Add: return intImm(x + y);
      case BinOp::Sub: return intImm(x - y);
      case BinOp::Mul: return intImm(x * y);
      case BinOp::Div: if (y != 0) return intImm(floorDiv(x, y)); break;
      case BinOp::Mod: if (y != 0) return intImm(x - floorDiv(x, y) * y); break;
      case BinOp::Min: return intImm(std::min(x, y));
      case BinOp::Max: return intImm(std::max(x, y));
      case BinOp::Lt: return intImm(x < y);
      case BinOp::Le: return intImm(x <= y);
      case BinOp::Gt: return intImm(x > y);
      case BinOp::Ge: return intImm(x >= y);
      case BinOp::Eq: return intImm(x == y);
      case BinOp::Ne: return intImm(x != y);
      case BinOp::And: return intImm(x && y);
      case BinOp::Or: return intImm(x || y);
    }
  }
  bool isFloat = a->isFloat || b->isFloat;
  if (!isFloat) {
    switch (op) {
      case BinOp::Add:
        if (isInt(a, 0)) return b;
        if (isInt(b, 0)) return a;
        // (x + c1) + c2 -> x + (c1 + c2)
        if (cb && a->kind == ExprKind::Binary && a->op == BinOp::Add && constValue(a->b)) {
          return add(a->a, intImm(*constValue(a->b) + *cb));
        }
        break;
      case BinOp::Sub:
        if (isInt(b, 0)) return a;
        if (equal(a, b)) return intImm(0);
        if (cb && a->kind == ExprKind::Binary && a->op == BinOp::Add && constValue(a->b)) {
          return add(a->a, intImm(*constValue(a->b) - *cb));
        }
        // (x + y) - x -> y
        if (a->kind == ExprKind::Binary && a->op == BinOp::Add && equal(a->a, b)) return a->b;
        break;
      case BinOp::Mul:
        if (isInt(a, 1)) return b;
        if (isInt(b, 1)) return a;
        if (isInt(a, 0) || isInt(b, 0)) return intImm(0);
        break;
      case BinOp::Div:
        if (isInt(b, 1)) return a;
        if (isInt(a, 0)) return a;
        break;
      case BinOp::Mod:
        if (isInt(b, 1)) return intImm(0);
        if (isInt(a, 0)) return a;
        break;
      case BinOp::And:
        if (isInt(a, 1)) return b;
        if (isInt(b, 1)) return a;
        break;
      default:
        break;
    }
  }
  auto n = node(ExprKind::Binary);
  n->op = op;
  switch (op) {
    case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
    case BinOp::Eq: case BinOp::Ne: case BinOp::And: case BinOp::Or:
      n->isFloat = false;
      break;
    default:
      n->isFloat = isFloat;
  }
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr add(Expr a, Expr b) { return binary(BinOp::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return binary(BinOp::Sub, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return binary(BinOp::Mul, std::move(a), std::move(b)); }
Expr div(Expr a, Expr b) { return binary(BinOp::Div, std::move(a), std::move(b)); }
Expr mod(Expr a, Expr b) { return binary(BinOp::Mod, std::move(a), std::move(b)); }
Expr min(Expr a, Expr b) { return binary(BinOp::Min, std::move(a), std::move(b)); }
Expr lt(Expr a, Expr b) { return binary(BinOp::Lt, std::move(a), std::move(b)); }
Expr ge(Expr a, Expr b) { return binary(BinOp::Ge, std::move(a), std::move(b)); }
Expr eq(Expr a, Expr b) { return binary(BinOp::Eq, std::move(a), std::move(b)); }

Expr land(Expr a, Expr b) {
  if (!a) return b;
  if (!b) return a;
  return binary(BinOp::And, std::move(a), std::move(b));
}

Expr load(const std::string& array, Expr index, bool isFloat) {
  auto n = node(ExprKind::Load);
  n->name = array;
  n->a = std::move(index);
  n->isFloat = isFloat;
  return n;
}

Expr search(SearchMode mode, const std::string& array, Expr lo, Expr hi, Expr key) {
  auto n = node(ExprKind::Search);
  n->mode = mode;
  n->name = array;
  n->a = std::move(lo);
  n->b = std::move(hi);
  n->c = std::move(key);
  return n;
}

Expr select(Expr cond, Expr then, Expr otherwise) {
  if (auto c = constValue(cond)) return *c ? then : otherwise;
  auto n = node(ExprKind::Select);
  n->isFloat = then->isFloat || otherwise->isFloat;
  n->a = std::move(cond);
  n->b = std::move(then);
  n->c = std::move(otherwise);
  return n;
}

Expr ceilDiv(Expr a, Expr b) {
  if (auto cb = constValue(b)) {
    return div(add(a, intImm(*cb - 1)), b);
  }
  return div(sub(add(a, b), intImm(1)), b);
}

bool equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind || a->isFloat != b->isFloat) return false;
  switch (a->kind) {
    case ExprKind::IntImm: return a->ival == b->ival;
    case ExprKind::FloatImm: return a->fval == b->fval;
    case ExprKind::Var: return a->name == b->name;
    case ExprKind::Binary: return a->op == b->op && equal(a->a, b->a) && equal(a->b, b->b);
    case ExprKind::Load: return a->name == b->name && equal(a->a, b->a);
    case ExprKind::Search:
      return a->mode == b->mode && a->name == b->name && equal(a->a, b->a) &&
             equal(a->b, b->b) && equal(a->c, b->c);
    case ExprKind::Select:
      return equal(a->a, b->a) && equal(a->b, b->b) && equal(a->c, b->c);
  }
  return false;
}

void collectVars(const Expr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Var) {
    out.push_back(e->name);
    return;
  }
  collectVars(e->a, out);
  collectVars(e->b, out);
  collectVars(e->c, out);
}

Expr substitute(const Expr& e, const std::function<Expr(const std::string&)>& lookup) {
  if (!e) return e;
  switch (e->kind) {
    case ExprKind::IntImm:
    case ExprKind::FloatImm:
      return e;
    case ExprKind::Var: {
      Expr r = lookup(e->name);
      return r ? r : e;
    }
    case ExprKind::Binary:
      return binary(e->op, substitute(e->a, lookup), substitute(e->b, lookup));
    case ExprKind::Load:
      return load(e->name, substitute(e->a, lookup), e->isFloat);
    case ExprKind::Search:
      return search(e->mode, e->name, substitute(e->a, lookup), substitute(e->b, lookup),
                    substitute(e->c, lookup));
    case ExprKind::Select:
      return select(substitute(e->a, lookup), substitute(e->b, lookup),
                    substitute(e->c, lookup));
  }
  return e;
}

namespace {

int precedence(const Expr& e) {
  if (e->kind != ExprKind::Binary) return e->kind == ExprKind::Select ? 0 : 10;
  switch (e->op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq: case BinOp::Ne: return 3;
    case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 4;
    case BinOp::Add: case BinOp::Sub: return 5;
    case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 6;
    case BinOp::Min: case BinOp::Max: return 10;
  }
  return 10;
}

const char* opText(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Min: return "min";
    case BinOp::Max: return "max";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

std::string floatText(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void printTo(std::ostream& os, const Expr& e, PrintStyle style, int context) {
  int prec = precedence(e);
  bool paren = prec < context;
  if (paren) os << "(";
  switch (e->kind) {
    case ExprKind::IntImm:
      os << e->ival;
      break;
    case ExprKind::FloatImm:
      os << floatText(e->fval);
      break;
    case ExprKind::Var:
      os << e->name;
      break;
    case ExprKind::Binary:
      if (e->op == BinOp::Min || e->op == BinOp::Max) {
        os << (style == PrintStyle::C ? "spsched_" : "") << opText(e->op) << "(";
        printTo(os, e->a, style, 0);
        os << ", ";
        printTo(os, e->b, style, 0);
        os << ")";
      } else {
        // Left-associative: the right operand needs parentheses at equal
        // precedence.
        printTo(os, e->a, style, prec);
        os << " " << opText(e->op) << " ";
        printTo(os, e->b, style, prec + 1);
      }
      break;
    case ExprKind::Load:
      os << e->name << "[";
      printTo(os, e->a, style, 0);
      os << "]";
      break;
    case ExprKind::Search:
      if (style == PrintStyle::C) {
        os << (e->mode == SearchMode::SegmentOf ? "spsched_segment_of(" : "spsched_find(");
      } else {
        os << (e->mode == SearchMode::SegmentOf ? "segment_of(" : "find(");
      }
      os << e->name << ", ";
      printTo(os, e->a, style, 0);
      os << ", ";
      printTo(os, e->b, style, 0);
      os << ", ";
      printTo(os, e->c, style, 0);
      os << ")";
      break;
    case ExprKind::Select:
      printTo(os, e->a, style, 1);
      os << " ? ";
      printTo(os, e->b, style, 1);
      os << " : ";
      printTo(os, e->c, style, 1);
      break;
  }
  if (paren) os << ")";
}

}  // namespace

std::string print(const Expr& e, PrintStyle style) {
  std::ostringstream os;
  printTo(os, e, style, 0);
  return os.str();
}

Stmt block(std::vector<Stmt> stmts, bool scoped) {
  auto n = snode(StmtKind::Block);
  for (auto& s : stmts) {
    if (!s) continue;
    // Flatten unscoped nested blocks.
    if (s->kind == StmtKind::Block && !s->scoped && s->comment.empty()) {
      n->stmts.insert(n->stmts.end(), s->stmts.begin(), s->stmts.end());
    } else {
      n->stmts.push_back(std::move(s));
    }
  }
  n->scoped = scoped;
  return n;
}

Stmt forLoop(const std::string& var, Expr lo, Expr hi, Stmt body) {
  return forLoop(var, std::move(lo), std::move(hi), std::move(body), std::nullopt, 1, "");
}

Stmt forLoop(const std::string& var, Expr lo, Expr hi, Stmt body,
             std::optional<ParallelTag> parallel, int unroll, const std::string& statsName) {
  auto n = snode(StmtKind::For);
  n->var = var;
  n->lo = std::move(lo);
  n->hi = std::move(hi);
  n->body = std::move(body);
  n->parallel = parallel;
  n->unroll = unroll;
  n->statsName = statsName;
  return n;
}

Stmt whileLoop(Expr cond, Stmt body) {
  auto n = snode(StmtKind::While);
  n->cond = std::move(cond);
  n->body = std::move(body);
  return n;
}

Stmt ifThen(Expr cond, Stmt body, bool isGuard) {
  auto n = snode(StmtKind::If);
  n->cond = std::move(cond);
  n->body = std::move(body);
  n->isGuard = isGuard;
  return n;
}

Stmt decl(const std::string& var, Expr init) {
  auto n = snode(StmtKind::Decl);
  n->var = var;
  n->value = std::move(init);
  return n;
}

Stmt assign(const std::string& var, Expr value) {
  auto n = snode(StmtKind::Assign);
  n->var = var;
  n->value = std::move(value);
  return n;
}

Stmt store(const std::string& array, Expr index, Expr value) {
  auto n = snode(StmtKind::Store);
  n->array = array;
  n->index = std::move(index);
  n->value = std::move(value);
  return n;
}

Stmt reduceAdd(const std::string& array, Expr index, Expr value, RaceStrategy strategy,
               bool countsAsWork) {
  auto n = snode(StmtKind::ReduceAdd);
  n->array = array;
  n->index = std::move(index);
  n->value = std::move(value);
  n->strategy = strategy;
  n->countsAsWork = countsAsWork;
  return n;
}

Stmt alloc(const std::string& array, Expr size) {
  auto n = snode(StmtKind::Alloc);
  n->array = array;
  n->value = std::move(size);
  return n;
}

Stmt zero(const std::string& array, Expr size) {
  auto n = snode(StmtKind::Zero);
  n->array = array;
  n->value = std::move(size);
  return n;
}

Stmt check(Expr cond, const std::string& message) {
  auto n = snode(StmtKind::Check);
  n->cond = std::move(cond);
  n->message = message;
  return n;
}

const ArrayInfo* Program::findArray(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

bool Program::isFloatArray(const std::string& name) const {
  const ArrayInfo* a = findArray(name);
  return a && a->role != ArrayRole::Pos && a->role != ArrayRole::Crd;
}

namespace {

void printStmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(2 * indent, ' ');
  auto e = [](const Expr& x) { return print(x, PrintStyle::IR); };
  switch (s->kind) {
    case StmtKind::Block:
      if (!s->comment.empty()) os << pad << "// " << s->comment << "\n";
      if (s->scoped) {
        os << pad << "{\n";
        for (const auto& c : s->stmts) printStmt(os, c, indent + 1);
        os << pad << "}\n";
      } else {
        for (const auto& c : s->stmts) printStmt(os, c, indent);
      }
      break;
    case StmtKind::For:
      os << pad << "for " << s->var << " in [" << e(s->lo) << ", " << e(s->hi) << ")";
      if (s->parallel) {
        os << " parallel(" << toString(s->parallel->unit) << ", "
           << toString(s->parallel->strategy) << ")";
      }
      if (s->unroll > 1) os << " unroll(" << s->unroll << ")";
      os << " {\n";
      printStmt(os, s->body, indent + 1);
      os << pad << "}\n";
      break;
    case StmtKind::While:
      os << pad << "while " << e(s->cond) << " {\n";
      printStmt(os, s->body, indent + 1);
      os << pad << "}\n";
      break;
    case StmtKind::If:
      os << pad << (s->isGuard ? "guard " : "if ") << e(s->cond) << " {\n";
      printStmt(os, s->body, indent + 1);
      os << pad << "}\n";
      break;
    case StmtKind::Decl:
      os << pad << "decl " << s->var << " = " << e(s->value) << "\n";
      break;
    case StmtKind::Assign:
      os << pad << s->var << " = " << e(s->value) << "\n";
      break;
    case StmtKind::Store:
      os << pad << s->array << "[" << e(s->index) << "] = " << e(s->value) << "\n";
      break;
    case StmtKind::ReduceAdd:
      os << pad << s->array << "[" << e(s->index) << "] += " << e(s->value);
      if (s->strategy != RaceStrategy::NoRaces) os << " (" << toString(s->strategy) << ")";
      os << "\n";
      break;
    case StmtKind::Alloc:
      os << pad << "alloc " << s->array << "[" << e(s->value) << "]\n";
      break;
    case StmtKind::Zero:
      os << pad << "zero " << s->array << "[" << e(s->value) << "]\n";
      break;
    case StmtKind::Check:
      os << pad << "check " << e(s->cond) << "\n";
      break;
  }
}

}  // namespace

std::string print(const Stmt& s) {
  std::ostringstream os;
  printStmt(os, s, 0);
  return os.str();
}

std::string print(const Program& p) {
  std::ostringstream os;
  os << "// inputs:";
  for (const auto& t : p.inputTensors) os << " " << t;
  os << "\n// output: " << p.outputTensor << "\n";
  printStmt(os, p.body, 0);
  return os.str();
}

}  // namespace spsched::ir
