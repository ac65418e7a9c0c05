#pragma once

#include <tsdae/error.hpp>
#include <tsdae/timescale.hpp>
#include <tsdae/types.hpp>

#include <cctype>
#include <charconv>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace tsdae {

/// Immutable scalar expression in the variable t.
///
/// Grammar (whitespace between tokens is ignored):
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := '-'? atom ('^' integer)?
///   atom   := number | 't' | '(' expr ')'
/// '^' binds tighter than unary minus, so "-t^2" is -(t^2). There is no
/// implicit multiplication.
class ScalarExpr {
 public:
  enum class Op { Number, Var, Neg, Add, Sub, Mul, Div, Pow };

  struct Node {
    Op op;
    double value = 0.0;          // Number
    unsigned exponent = 0;       // Pow
    std::shared_ptr<const Node> lhs = nullptr;
    std::shared_ptr<const Node> rhs = nullptr;
  };

  ScalarExpr() : root_(std::make_shared<const Node>(Node{Op::Number})) {}
  explicit ScalarExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  static ScalarExpr constant(double v) {
    return ScalarExpr(std::make_shared<const Node>(Node{Op::Number, v}));
  }

  /// Throws EvalError on division by zero.
  double eval(double t) const { return eval(*root_, t); }

  /// Canonical, fully parenthesized form; parses back to an equivalent tree.
  std::string to_string() const {
    std::string out;
    print(*root_, out);
    return out;
  }

  const Node& root() const noexcept { return *root_; }

 private:
  static double eval(const Node& n, double t) {
    switch (n.op) {
      case Op::Number: return n.value;
      case Op::Var: return t;
      case Op::Neg: return -eval(*n.lhs, t);
      case Op::Add: return eval(*n.lhs, t) + eval(*n.rhs, t);
      case Op::Sub: return eval(*n.lhs, t) - eval(*n.rhs, t);
      case Op::Mul: return eval(*n.lhs, t) * eval(*n.rhs, t);
      case Op::Div: {
        const double den = eval(*n.rhs, t);
        if (den == 0.0) throw EvalError(t, "DivisionByZero");
        return eval(*n.lhs, t) / den;
      }
      case Op::Pow: {
        double base = eval(*n.lhs, t);
        double acc = 1.0;
        for (unsigned e = n.exponent; e != 0; e >>= 1) {
          if (e & 1U) acc *= base;
          base *= base;
        }
        return acc;
      }
    }
    return 0.0;
  }

  static void print(const Node& n, std::string& out) {
    switch (n.op) {
      case Op::Number: {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, n.value);
        out.append(buf, res.ptr);
        return;
      }
      case Op::Var: out += 't'; return;
      case Op::Neg:
        out += "(-";
        print(*n.lhs, out);
        out += ')';
        return;
      case Op::Pow:
        out += '(';
        print(*n.lhs, out);
        out += '^';
        out += std::to_string(n.exponent);
        out += ')';
        return;
      default: break;
    }
    const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : " / ";
    out += '(';
    print(*n.lhs, out);
    out += sym;
    print(*n.rhs, out);
    out += ')';
  }

  std::shared_ptr<const Node> root_;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  ScalarExpr parse() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(pos_, "expected an expression, got empty input");
    auto root = expr();
    skip_ws();
    if (pos_ != src_.size()) {
      throw ParseError(pos_, std::string("unexpected '") + src_[pos_] + "', expected operator or end of input");
    }
    return ScalarExpr(std::move(root));
  }

 private:
  using NodePtr = std::shared_ptr<const ScalarExpr::Node>;
  using Op = ScalarExpr::Op;

  static NodePtr make(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
    return std::make_shared<const ScalarExpr::Node>(ScalarExpr::Node{op, 0.0, 0, std::move(lhs), std::move(rhs)});
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    const bool negate = accept('-');
    NodePtr base = atom();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) throw ParseError(start, "expected a non-negative integer exponent after '^'");
      unsigned e = 0;
      auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, e);
      if (ec != std::errc{} || ptr != src_.data() + pos_) throw ParseError(start, "exponent out of range");
      auto pow = std::make_shared<const ScalarExpr::Node>(ScalarExpr::Node{Op::Pow, 0.0, e, base, nullptr});
      base = pow;
    }
    return negate ? make(Op::Neg, base) : base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(pos_, "expected number, 't' or '(' but reached end of input");
    const char c = src_[pos_];
    if (c == 't') {
      ++pos_;
      reject_implicit_product();
      return std::make_shared<const ScalarExpr::Node>(ScalarExpr::Node{Op::Var});
    }
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) throw ParseError(pos_, "expected ')'");
      reject_implicit_product();
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    throw ParseError(pos_, std::string("unexpected '") + c + "', expected number, 't' or '('");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
        pos_ = p;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc{} || ptr != src_.data() + pos_) throw ParseError(start, "malformed number");
    reject_implicit_product();
    return std::make_shared<const ScalarExpr::Node>(ScalarExpr::Node{Op::Number, v});
  }

  // "2t", "t(1)", "(t)(t)" are rejected with a targeted message.
  void reject_implicit_product() {
    std::size_t p = pos_;
    while (p < src_.size() && std::isspace(static_cast<unsigned char>(src_[p]))) ++p;
    if (p < src_.size()) {
      const char c = src_[p];
      if (c == 't' || c == '(' || std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        throw ParseError(p, "implicit multiplication is not allowed; insert '*'");
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ScalarExpr parse_expr(std::string_view src) { return detail::ExprParser(src).parse(); }

/// rows x cols grid of scalar expressions evaluated entrywise.
class MatrixFunction {
 public:
  MatrixFunction() = default;

  MatrixFunction(Eigen::Index rows, Eigen::Index cols, std::vector<ScalarExpr> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(entries_.size()) != rows * cols) {
      throw Error(Errc::DimensionMismatch, "matrix function needs rows*cols entries");
    }
  }

  /// Parses a row-major grid of expression strings. Parse errors are rethrown
  /// with the offending (row, col) in the message.
  static MatrixFunction parse(const std::vector<std::vector<std::string>>& grid) {
    if (grid.empty() || grid.front().empty()) {
      throw Error(Errc::DimensionMismatch, "matrix function needs at least one entry");
    }
    const auto rows = static_cast<Eigen::Index>(grid.size());
    const auto cols = static_cast<Eigen::Index>(grid.front().size());
    std::vector<ScalarExpr> entries;
    entries.reserve(static_cast<std::size_t>(rows * cols));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (static_cast<Eigen::Index>(grid[i].size()) != cols) {
        throw Error(Errc::DimensionMismatch, "ragged matrix: row " + std::to_string(i + 1));
      }
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        try {
          entries.push_back(parse_expr(grid[i][j]));
        } catch (const ParseError& e) {
          throw ParseError(e.offset(), "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                           ") \"" + grid[i][j] + "\": " + e.what());
        }
      }
    }
    return MatrixFunction(rows, cols, std::move(entries));
  }

  static MatrixFunction parse_column(const std::vector<std::string>& column) {
    std::vector<std::vector<std::string>> grid;
    for (const auto& s : column) grid.push_back({s});
    return parse(grid);
  }

  static MatrixFunction constant(const Matrix& m) {
    std::vector<ScalarExpr> entries;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) entries.push_back(ScalarExpr::constant(m(i, j)));
    return MatrixFunction(m.rows(), m.cols(), std::move(entries));
  }

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  const ScalarExpr& entry(Eigen::Index i, Eigen::Index j) const {
    return entries_.at(static_cast<std::size_t>(i * cols_ + j));
  }

  Matrix eval(double t) const {
    Matrix out(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      for (Eigen::Index j = 0; j < cols_; ++j) {
        try {
          out(i, j) = entry(i, j).eval(t);
        } catch (const EvalError&) {
          throw EvalError(t, "DivisionByZero",
                          std::pair{static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
        }
      }
    }
    return out;
  }

  Matrix operator()(double t) const { return eval(t); }

  MatrixFn as_fn() const {
    return [self = *this](double t) { return self.eval(t); };
  }

  VectorFn as_vector_fn() const {
    if (cols_ != 1) throw Error(Errc::DimensionMismatch, "vector function needs a single column");
    return [self = *this](double t) -> Vector { return self.eval(t).col(0); };
  }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<ScalarExpr> entries_;
};

inline Matrix eval_matrix(const MatrixFunction& mf, double t) { return mf.eval(t); }

inline GridMatrixSamples tabulate(const MatrixFn& fn, const TimeScale& ts) {
  std::vector<Matrix> values;
  values.reserve(ts.size());
  for (double t : ts.points()) values.push_back(fn(t));
  return GridMatrixSamples(ts, std::move(values));
}

inline GridMatrixSamples tabulate(const MatrixFunction& mf, const TimeScale& ts) {
  std::vector<Matrix> values;
  values.reserve(ts.size());
  for (double t : ts.points()) values.push_back(mf.eval(t));
  return GridMatrixSamples(ts, std::move(values));
}

}  // namespace tsdae
