#ifndef SPSCHED_INDEX_NOTATION_H
#define SPSCHED_INDEX_NOTATION_H

#include <compare>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace spsched {

/// An index variable. Identity is by name; the space (coordinate/position)
/// and derivation status of a variable live in the provenance graph of the
/// statement that uses it.
class IndexVar {
public:
  IndexVar() = default;
  explicit IndexVar(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  bool defined() const { return !name_.empty(); }

  auto operator<=>(const IndexVar&) const = default;

private:
  std::string name_;
};

std::ostream& operator<<(std::ostream& os, const IndexVar& var);

struct Access {
  std::string tensor;
  std::vector<IndexVar> vars;

  bool operator==(const Access&) const = default;
};

std::string toString(const Access& access);

enum class ExprKind { Access, Literal, Mul, Add, Workspace };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind = ExprKind::Literal;
  Access access;          // Access
  double value = 0.0;     // Literal
  Expr a, b;              // Mul, Add
  std::string label;      // optional name of this sub-expression
  std::string workspace;  // Workspace: buffer read at the loop of `var`
  IndexVar var;
};

Expr makeAccess(Access access);
Expr makeLiteral(double value);
Expr makeMul(Expr a, Expr b);
Expr makeAdd(Expr a, Expr b);
Expr makeWorkspaceRead(std::string workspace, IndexVar var);
Expr withLabel(Expr e, std::string label);

bool structurallyEqual(const Expr& a, const Expr& b);
std::string toString(const Expr& e);

/// Accesses in left-to-right order.
std::vector<Access> collectAccesses(const Expr& e);
bool containsVar(const Expr& e, const IndexVar& var);
bool containsAdd(const Expr& e);

/// Replaces every occurrence of `target` (by identity, then structurally)
/// with `replacement`. Returns nullptr when `target` does not occur.
Expr replaceSubexpr(const Expr& e, const Expr& target, const Expr& replacement);

/// out(vars) = rhs. Variables that appear on the right but not in the output
/// are summed over the whole right-hand side.
struct Assignment {
  Access lhs;
  Expr rhs;
  std::map<std::string, Expr> labels;

  std::vector<IndexVar> reductionVars() const;
  /// Output variables followed by reduction variables in first-appearance
  /// order.
  std::vector<IndexVar> defaultOrder() const;
  std::vector<Access> inputAccesses() const { return collectAccesses(rhs); }
  /// Input tensor names in order of first appearance.
  std::vector<std::string> inputTensors() const;
  bool isReduction(const IndexVar& var) const;
};

std::string toString(const Assignment& assignment);

/// Parses `out(vars) = term (+ term)*` where a term is a product of factors
/// and a factor is an access, a number, a parenthesized expression or a
/// sub-expression label.
Assignment parseExpression(std::string_view text);

/// Parses a sequence of statements separated by newlines or ';'. Lines of the
/// form `label = expr` define named sub-expressions; the one statement whose
/// left side is an access is the assignment. `#` starts a comment.
Assignment parseProgram(std::string_view text);

}  // namespace spsched

#endif
