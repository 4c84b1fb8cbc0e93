#include "spsched/index_notation.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "spsched/error.h"

namespace spsched {

std::ostream& operator<<(std::ostream& os, const IndexVar& var) {
  return os << var.name();
}

std::string toString(const Access& access) {
  std::string s = access.tensor + "(";
  for (size_t i = 0; i < access.vars.size(); ++i) {
    if (i) s += ",";
    s += access.vars[i].name();
  }
  return s + ")";
}

Expr makeAccess(Access access) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Access;
  n->access = std::move(access);
  return n;
}

Expr makeLiteral(double value) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Literal;
  n->value = value;
  return n;
}

Expr makeMul(Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Mul;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr makeAdd(Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Add;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr makeWorkspaceRead(std::string workspace, IndexVar var) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Workspace;
  n->workspace = std::move(workspace);
  n->var = std::move(var);
  return n;
}

Expr withLabel(Expr e, std::string label) {
  auto n = std::make_shared<ExprNode>(*e);
  n->label = std::move(label);
  return n;
}

bool structurallyEqual(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Access:
      return a->access == b->access;
    case ExprKind::Literal:
      return a->value == b->value;
    case ExprKind::Workspace:
      return a->workspace == b->workspace && a->var == b->var;
    case ExprKind::Mul:
    case ExprKind::Add:
      return structurallyEqual(a->a, b->a) && structurallyEqual(a->b, b->b);
  }
  return false;
}

namespace {

std::string literalString(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

void print(std::ostream& os, const Expr& e, bool parenthesizeAdd) {
  switch (e->kind) {
    case ExprKind::Access:
      os << toString(e->access);
      break;
    case ExprKind::Literal:
      os << literalString(e->value);
      break;
    case ExprKind::Workspace:
      os << e->workspace << "(" << e->var.name() << ")";
      break;
    case ExprKind::Mul:
      print(os, e->a, true);
      os << " * ";
      print(os, e->b, true);
      break;
    case ExprKind::Add:
      if (parenthesizeAdd) os << "(";
      print(os, e->a, false);
      os << " + ";
      print(os, e->b, false);
      if (parenthesizeAdd) os << ")";
      break;
  }
}

void collect(const Expr& e, std::vector<Access>& out) {
  switch (e->kind) {
    case ExprKind::Access:
      out.push_back(e->access);
      break;
    case ExprKind::Mul:
    case ExprKind::Add:
      collect(e->a, out);
      collect(e->b, out);
      break;
    default:
      break;
  }
}

}  // namespace

std::string toString(const Expr& e) {
  std::ostringstream os;
  print(os, e, false);
  return os.str();
}

std::vector<Access> collectAccesses(const Expr& e) {
  std::vector<Access> out;
  collect(e, out);
  return out;
}

bool containsVar(const Expr& e, const IndexVar& var) {
  for (const Access& a : collectAccesses(e)) {
    if (std::find(a.vars.begin(), a.vars.end(), var) != a.vars.end()) return true;
  }
  return false;
}

bool containsAdd(const Expr& e) {
  if (e->kind == ExprKind::Add) return true;
  if (e->kind == ExprKind::Mul) return containsAdd(e->a) || containsAdd(e->b);
  return false;
}

Expr replaceSubexpr(const Expr& e, const Expr& target, const Expr& replacement) {
  // Identity matches win over structural ones so a labeled sub-expression is
  // replaced exactly where it was spliced in.
  std::function<Expr(const Expr&, bool)> rec = [&](const Expr& n, bool structural) -> Expr {
    if (structural ? structurallyEqual(n, target) : n == target) return replacement;
    if (n->kind == ExprKind::Mul || n->kind == ExprKind::Add) {
      Expr a = rec(n->a, structural);
      Expr b = rec(n->b, structural);
      if (!a && !b) return nullptr;
      auto copy = std::make_shared<ExprNode>(*n);
      copy->a = a ? a : n->a;
      copy->b = b ? b : n->b;
      return copy;
    }
    return nullptr;
  };
  if (Expr r = rec(e, false)) return r;
  return rec(e, true);
}

std::vector<IndexVar> Assignment::reductionVars() const {
  std::vector<IndexVar> out;
  for (const Access& a : inputAccesses()) {
    for (const IndexVar& v : a.vars) {
      bool inLhs = std::find(lhs.vars.begin(), lhs.vars.end(), v) != lhs.vars.end();
      if (!inLhs && std::find(out.begin(), out.end(), v) == out.end()) {
        out.push_back(v);
      }
    }
  }
  return out;
}

std::vector<IndexVar> Assignment::defaultOrder() const {
  std::vector<IndexVar> order = lhs.vars;
  for (const IndexVar& v : reductionVars()) order.push_back(v);
  return order;
}

std::vector<std::string> Assignment::inputTensors() const {
  std::vector<std::string> out;
  for (const Access& a : inputAccesses()) {
    if (std::find(out.begin(), out.end(), a.tensor) == out.end()) {
      out.push_back(a.tensor);
    }
  }
  return out;
}

bool Assignment::isReduction(const IndexVar& var) const {
  auto red = reductionVars();
  return std::find(red.begin(), red.end(), var) != red.end();
}

std::string toString(const Assignment& assignment) {
  return toString(assignment.lhs) + " = " + toString(assignment.rhs);
}

namespace {

class Parser {
public:
  Parser(std::string_view text, int line, const std::map<std::string, Expr>& labels)
      : text_(text), line_(line), labels_(labels) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(ErrorCode::Syntax, line_,
                     message + " at column " + std::to_string(pos_ + 1));
  }

  void skipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool atEnd() {
    skipSpace();
    return pos_ >= text_.size();
  }

  bool accept(char c) {
    skipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool peekIdentifier() {
    skipSpace();
    return pos_ < text_.size() &&
           (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_');
  }

  std::string identifier() {
    if (!peekIdentifier()) fail("expected identifier");
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Access accessAfterName(std::string name) {
    Access access{std::move(name), {}};
    expect('(');
    if (!accept(')')) {
      do {
        size_t at = pos_;
        IndexVar v(identifier());
        if (std::find(access.vars.begin(), access.vars.end(), v) != access.vars.end()) {
          pos_ = at;
          fail("index variable '" + v.name() + "' repeated within access " +
               access.tensor);
        }
        access.vars.push_back(v);
      } while (accept(','));
      expect(')');
    }
    return access;
  }

  Expr factor() {
    skipSpace();
    if (accept('(')) {
      Expr e = expression();
      expect(')');
      return e;
    }
    if (peekIdentifier()) {
      std::string name = identifier();
      skipSpace();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        return makeAccess(accessAfterName(std::move(name)));
      }
      auto it = labels_.find(name);
      if (it == labels_.end()) fail("unknown sub-expression '" + name + "'");
      return it->second;
    }
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    if (pos_ == start) fail("expected access, number or '('");
    std::string num(text_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size()) {
      pos_ = start;
      fail("malformed number '" + num + "'");
    }
    return makeLiteral(v);
  }

  Expr term() {
    Expr e = factor();
    while (accept('*')) e = makeMul(e, factor());
    return e;
  }

  Expr expression() {
    size_t start = pos_;
    Expr e = term();
    checkAddend(e, start);
    while (accept('+')) {
      size_t at = pos_;
      Expr t = term();
      checkAddend(t, at);
      e = makeAdd(e, t);
    }
    return e;
  }

  // Scalar constants may only scale a term; a purely constant addend would
  // make every coordinate nonzero.
  void checkAddend(const Expr& t, size_t at) {
    if (collectAccesses(t).empty()) {
      pos_ = at;
      fail("constant addends are not supported");
    }
  }

  size_t pos() const { return pos_; }

private:
  std::string_view text_;
  size_t pos_ = 0;
  int line_;
  const std::map<std::string, Expr>& labels_;
};

void checkAssignment(const Assignment& a, int line) {
  std::set<IndexVar> seen;
  for (const IndexVar& v : a.lhs.vars) {
    if (!seen.insert(v).second) {
      throw ParseError(ErrorCode::Syntax, line,
                       "index variable '" + v.name() + "' repeated in output");
    }
    if (!containsVar(a.rhs, v)) {
      throw ParseError(ErrorCode::Syntax, line,
                       "output variable '" + v.name() +
                           "' does not appear on the right-hand side");
    }
  }
  std::map<std::string, size_t> arity;
  arity[a.lhs.tensor] = a.lhs.vars.size();
  for (const Access& acc : a.inputAccesses()) {
    if (acc.tensor == a.lhs.tensor) {
      throw ParseError(ErrorCode::Syntax, line,
                       "output tensor '" + acc.tensor + "' used as an input");
    }
    auto [it, fresh] = arity.emplace(acc.tensor, acc.vars.size());
    if (!fresh && it->second != acc.vars.size()) {
      throw ParseError(ErrorCode::Syntax, line,
                       "tensor '" + acc.tensor + "' used with different orders");
    }
  }
}

}  // namespace

Assignment parseProgram(std::string_view text) {
  std::map<std::string, Expr> labels;
  std::optional<Assignment> result;
  int line = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find_first_of("\n;", start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view stmt = text.substr(start, end - start);
    line += 1;
    if (size_t hash = stmt.find('#'); hash != std::string_view::npos) {
      stmt = stmt.substr(0, hash);
    }
    Parser p(stmt, line, labels);
    if (!p.atEnd()) {
      std::string name = p.identifier();
      p.skipSpace();
      if (p.accept('(')) {
        // Output access: rewind by re-parsing with a fresh parser.
        Parser q(stmt, line, labels);
        std::string out = q.identifier();
        Access lhs = q.accessAfterName(out);
        q.expect('=');
        Expr rhs = q.expression();
        if (!q.atEnd()) q.fail("unexpected trailing input");
        if (result) {
          throw ParseError(ErrorCode::Syntax, line, "more than one assignment");
        }
        result = Assignment{std::move(lhs), std::move(rhs), {}};
      } else {
        p.expect('=');
        Expr e = p.expression();
        if (!p.atEnd()) p.fail("unexpected trailing input");
        labels[name] = withLabel(e, name);
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!result) {
    throw ParseError(ErrorCode::Syntax, line, "no assignment of the form out(vars) = expr");
  }
  result->labels = std::move(labels);
  checkAssignment(*result, line);
  return *result;
}

Assignment parseExpression(std::string_view text) {
  std::map<std::string, Expr> none;
  Parser p(text, 1, none);
  std::string out = p.identifier();
  Access lhs = p.accessAfterName(out);
  p.expect('=');
  Expr rhs = p.expression();
  if (!p.atEnd()) p.fail("unexpected trailing input");
  Assignment a{std::move(lhs), std::move(rhs), {}};
  checkAssignment(a, 1);
  return a;
}

}  // namespace spsched
