#include "spsched/schedule_dsl.h"

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "spsched/error.h"

namespace spsched {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool isIdentifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

class Script {
public:
  explicit Script(ScheduledStmt stmt) : stmt_(std::move(stmt)) {}

  void line(const std::string& text, int number) {
    line_ = number;
    size_t open = text.find('(');
    size_t eq = text.find('=');
    if (eq != std::string::npos && (open == std::string::npos || eq < open)) {
      std::string name = trim(text.substr(0, eq));
      if (!isIdentifier(name)) fail("invalid constant name '" + name + "'");
      constants_[name] = integer(text.substr(eq + 1));
      return;
    }
    if (open == std::string::npos || text.back() != ')') fail("expected a directive");
    std::string op = trim(text.substr(0, open));
    std::vector<std::string> args = split(text.substr(open + 1, text.size() - open - 2));
    directive(op, args);
  }

  const ScheduledStmt& result() const { return stmt_; }

private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(ErrorCode::Syntax, line_, message);
  }

  std::vector<std::string> split(const std::string& text) const {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : text) {
      if (c == '(' || c == '{') ++depth;
      if (c == ')' || c == '}') --depth;
      if (depth < 0) fail("unbalanced brackets");
      if (c == ',' && depth == 0) {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (depth != 0) fail("unbalanced brackets");
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
  }

  void arity(const std::string& op, const std::vector<std::string>& args, size_t n) const {
    if (args.size() != n) {
      fail(op + " takes " + std::to_string(n) + " arguments, got " + std::to_string(args.size()));
    }
  }

  IndexVar var(const std::string& s) const {
    if (!isIdentifier(s)) fail("expected an index variable, got '" + s + "'");
    return IndexVar(s);
  }

  // Integer expressions: + - * / over literals, constants and parentheses.
  int64_t integer(const std::string& text) const {
    size_t i = 0;
    int64_t v = sum(text, i);
    skip(text, i);
    if (i != text.size()) fail("unexpected '" + text.substr(i) + "' in integer expression");
    return v;
  }

  void skip(const std::string& t, size_t& i) const {
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
  }

  int64_t sum(const std::string& t, size_t& i) const {
    int64_t v = product(t, i);
    for (skip(t, i); i < t.size() && (t[i] == '+' || t[i] == '-'); skip(t, i)) {
      char op = t[i++];
      int64_t r = product(t, i);
      v = op == '+' ? v + r : v - r;
    }
    return v;
  }

  int64_t product(const std::string& t, size_t& i) const {
    int64_t v = atom(t, i);
    for (skip(t, i); i < t.size() && (t[i] == '*' || t[i] == '/'); skip(t, i)) {
      char op = t[i++];
      int64_t r = atom(t, i);
      if (op == '/' && r == 0) fail("division by zero");
      v = op == '*' ? v * r : v / r;
    }
    return v;
  }

  int64_t atom(const std::string& t, size_t& i) const {
    skip(t, i);
    if (i < t.size() && t[i] == '(') {
      ++i;
      int64_t v = sum(t, i);
      skip(t, i);
      if (i >= t.size() || t[i] != ')') fail("expected ')'");
      ++i;
      return v;
    }
    size_t b = i;
    if (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
      while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
      return std::stoll(t.substr(b, i - b));
    }
    while (i < t.size() && (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_')) ++i;
    std::string name = t.substr(b, i - b);
    if (name.empty()) fail("expected an integer");
    auto it = constants_.find(name);
    if (it == constants_.end()) fail("unknown constant '" + name + "'");
    return it->second;
  }

  void directive(const std::string& op, const std::vector<std::string>& args) {
    try {
      apply(op, args);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.code(), line_, e.what());
    }
  }

  void apply(const std::string& op, const std::vector<std::string>& a) {
    if (op == "split" || op == "divide") {
      arity(op, a, 4);
      int64_t n = integer(a[3]);
      stmt_ = op == "split" ? stmt_.split(var(a[0]), var(a[1]), var(a[2]), n)
                            : stmt_.divide(var(a[0]), var(a[1]), var(a[2]), n);
    } else if (op == "fuse") {
      arity(op, a, 3);
      stmt_ = stmt_.fuse(var(a[0]), var(a[1]), var(a[2]));
    } else if (op == "reorder") {
      std::vector<std::string> names = a;
      if (a.size() == 1 && a[0].size() >= 2 && a[0].front() == '{' && a[0].back() == '}') {
        names = split(a[0].substr(1, a[0].size() - 2));
      }
      std::vector<IndexVar> vars;
      for (const auto& n : names) vars.push_back(var(n));
      stmt_ = stmt_.reorder(vars);
    } else if (op == "pos") {
      arity(op, a, 3);
      size_t open = a[2].find('(');
      if (open == std::string::npos) {
        stmt_ = stmt_.pos(var(a[0]), var(a[1]), a[2]);
      } else {
        if (a[2].back() != ')') fail("malformed access '" + a[2] + "'");
        Access access;
        access.tensor = trim(a[2].substr(0, open));
        for (const auto& v : split(a[2].substr(open + 1, a[2].size() - open - 2))) {
          access.vars.push_back(var(v));
        }
        stmt_ = stmt_.pos(var(a[0]), var(a[1]), access);
      }
    } else if (op == "coord") {
      arity(op, a, 2);
      stmt_ = stmt_.coord(var(a[0]), var(a[1]));
    } else if (op == "parallelize") {
      arity(op, a, 3);
      stmt_ = stmt_.parallelize(var(a[0]), parseParallelUnit(a[1]), parseRaceStrategy(a[2]));
    } else if (op == "unroll") {
      arity(op, a, 2);
      stmt_ = stmt_.unroll(var(a[0]), static_cast<int>(integer(a[1])));
    } else if (op == "bound") {
      arity(op, a, 4);
      stmt_ = stmt_.bound(var(a[0]), var(a[1]), integer(a[2]), parseBoundType(a[3]));
    } else if (op == "precompute") {
      arity(op, a, 4);
      const auto& labels = stmt_.assignment().labels;
      auto it = labels.find(a[0]);
      if (it == labels.end()) {
        throw Error(ErrorCode::ExprNotFound, "no sub-expression labelled '" + a[0] + "'");
      }
      if (!isIdentifier(a[3])) fail("invalid workspace name '" + a[3] + "'");
      stmt_ = stmt_.precompute(it->second, var(a[1]), var(a[2]), a[3]);
    } else {
      fail("unknown directive '" + op + "'");
    }
  }

  ScheduledStmt stmt_;
  std::map<std::string, int64_t> constants_;
  int line_ = 0;
};

}  // namespace

ScheduledStmt applySchedule(const ScheduledStmt& stmt, std::string_view script) {
  Script s(stmt);
  int number = 0;
  size_t start = 0;
  while (start <= script.size()) {
    size_t end = script.find('\n', start);
    if (end == std::string_view::npos) end = script.size();
    ++number;
    std::string_view raw = script.substr(start, end - start);
    if (size_t hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string text = trim(raw);
    // allow method-chain style: leading '.' and trailing ';'
    if (!text.empty() && text.front() == '.') text = trim(text.substr(1));
    if (!text.empty() && text.back() == ';') text = trim(text.substr(0, text.size() - 1));
    if (!text.empty()) s.line(text, number);
    start = end + 1;
  }
  return s.result();
}

}  // namespace spsched
