#ifndef SPSCHED_IR_H
#define SPSCHED_IR_H

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spsched/schedule.h"

/// Imperative loop IR produced by lowering. Integer values are index
/// arithmetic; float values come from loads of value arrays.
namespace spsched::ir {

enum class BinOp { Add, Sub, Mul, Div, Mod, Min, Max, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

/// SegmentOf: largest q in [lo, hi) with arr[q] <= key (lo - 1 if none).
/// Exact: the q in [lo, hi) with arr[q] == key, or -1.
enum class SearchMode { SegmentOf, Exact };

enum class ExprKind { IntImm, FloatImm, Var, Binary, Load, Search, Select };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind = ExprKind::IntImm;
  bool isFloat = false;
  int64_t ival = 0;
  double fval = 0.0;
  std::string name;  // Var name; array name for Load and Search
  BinOp op = BinOp::Add;
  SearchMode mode = SearchMode::Exact;
  // Binary: a op b. Load: a = index. Search: a = lo, b = hi, c = key.
  // Select: a ? b : c.
  Expr a, b, c;
};

Expr intImm(int64_t v);
Expr floatImm(double v);
Expr var(const std::string& name);
/// Folds integer literals and identities (x+0, x*1, x*0, x/1).
Expr binary(BinOp op, Expr a, Expr b);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr mod(Expr a, Expr b);
Expr min(Expr a, Expr b);
Expr lt(Expr a, Expr b);
Expr ge(Expr a, Expr b);
Expr eq(Expr a, Expr b);
Expr land(Expr a, Expr b);  // a null operand means "true"
Expr load(const std::string& array, Expr index, bool isFloat);
Expr search(SearchMode mode, const std::string& array, Expr lo, Expr hi, Expr key);
Expr select(Expr cond, Expr then, Expr otherwise);
/// ceil(a / b) for non-negative a and positive b.
Expr ceilDiv(Expr a, Expr b);

bool isInt(const Expr& e, int64_t v);
std::optional<int64_t> constValue(const Expr& e);
bool equal(const Expr& a, const Expr& b);
/// Names of variables referenced (not arrays).
void collectVars(const Expr& e, std::vector<std::string>& out);
/// Replaces variables by expressions; `lookup` returns null to keep a var.
Expr substitute(const Expr& e, const std::function<Expr(const std::string&)>& lookup);

enum class PrintStyle { IR, C };
std::string print(const Expr& e, PrintStyle style = PrintStyle::IR);

enum class StmtKind { Block, For, While, If, Decl, Assign, Store, ReduceAdd, Alloc, Zero, Check };

struct StmtNode;
using Stmt = std::shared_ptr<const StmtNode>;

struct StmtNode {
  StmtKind kind = StmtKind::Block;
  std::vector<Stmt> stmts;  // Block
  bool scoped = false;      // Block: opens a C scope
  std::string var;          // For, Decl, Assign
  Expr lo, hi;              // For
  std::optional<ParallelTag> parallel;  // For
  int unroll = 1;                       // For
  std::string statsName;                // For, While: name reported in loop statistics
  Expr cond;                // While, If, Check
  Stmt body;                // For, While, If
  bool isGuard = false;     // If: counted in guard statistics
  std::string array;        // Store, ReduceAdd, Alloc, Zero
  Expr index;               // Store, ReduceAdd
  Expr value;  // Decl init, Assign value, Store/ReduceAdd value, Alloc/Zero size
  RaceStrategy strategy = RaceStrategy::NoRaces;  // ReduceAdd write discipline
  bool countsAsWork = false;                      // ReduceAdd
  std::string message;                            // Check
  std::string comment;                            // For/Block: emitted as a comment
};

Stmt block(std::vector<Stmt> stmts, bool scoped = false);
Stmt forLoop(const std::string& var, Expr lo, Expr hi, Stmt body);
Stmt forLoop(const std::string& var, Expr lo, Expr hi, Stmt body,
             std::optional<ParallelTag> parallel, int unroll, const std::string& statsName);
Stmt whileLoop(Expr cond, Stmt body);
Stmt ifThen(Expr cond, Stmt body, bool isGuard);
Stmt decl(const std::string& var, Expr init);
Stmt assign(const std::string& var, Expr value);
Stmt store(const std::string& array, Expr index, Expr value);
Stmt reduceAdd(const std::string& array, Expr index, Expr value, RaceStrategy strategy,
               bool countsAsWork);
Stmt alloc(const std::string& array, Expr size);
Stmt zero(const std::string& array, Expr size);
Stmt check(Expr cond, const std::string& message);

enum class ArrayRole { Vals, Pos, Crd, Output, Workspace };

struct ArrayInfo {
  std::string name;
  ArrayRole role = ArrayRole::Vals;
  std::string tensor;
  int level = -1;
  int slot = -1;  // index into the kernel's vals/pos/crd parameter
};

struct DimInfo {
  std::string name;
  std::string tensor;
  int level = 0;
  int slot = 0;  // index into the kernel's dims parameter
};

/// A lowered kernel plus its parameter manifest. Input tensors are numbered
/// by first appearance in the expression; compressed levels are numbered in
/// (tensor, level) order; dims are flattened tensor by tensor.
struct Program {
  Stmt body;
  std::string outputTensor;
  std::string outputArray;
  Expr outputSize;
  std::vector<Expr> outputDims;
  std::vector<std::string> inputTensors;
  std::vector<ArrayInfo> arrays;
  std::vector<DimInfo> dims;
  /// Symbols snapshotted at every unit of work when visit recording is on:
  /// loop variables first, then original coordinates.
  std::vector<std::string> visitSymbols;

  const ArrayInfo* findArray(const std::string& name) const;
  bool isFloatArray(const std::string& name) const;
};

std::string print(const Stmt& s);
std::string print(const Program& p);

}  // namespace spsched::ir

#endif
