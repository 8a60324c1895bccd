#include "pacrit/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace pacrit {
namespace detail {

enum class Op : std::uint8_t {
  Const, VarX, VarY, VarR,
  Neg, Exp, Log, Abs,
  Add, Sub, Mul, Div, Pow, Min, Max,
};

struct ExprNode {
  Op op = Op::Const;
  double value = 0;
  ExprPtr a, b;
};

namespace {

ExprPtr leaf(Op op, double v = 0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->value = v;
  return n;
}

ExprPtr unary(Op op, ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

ExprPtr binary(Op op, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval(const ExprNode& n, double x, double y, double r) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::VarR: return r;
    case Op::Neg: return -eval(*n.a, x, y, r);
    case Op::Exp: return std::exp(eval(*n.a, x, y, r));
    case Op::Log: return std::log(eval(*n.a, x, y, r));
    case Op::Abs: return std::abs(eval(*n.a, x, y, r));
    case Op::Add: return eval(*n.a, x, y, r) + eval(*n.b, x, y, r);
    case Op::Sub: return eval(*n.a, x, y, r) - eval(*n.b, x, y, r);
    case Op::Mul: return eval(*n.a, x, y, r) * eval(*n.b, x, y, r);
    case Op::Div: return eval(*n.a, x, y, r) / eval(*n.b, x, y, r);
    case Op::Pow: return std::pow(eval(*n.a, x, y, r), eval(*n.b, x, y, r));
    case Op::Min: return std::min(eval(*n.a, x, y, r), eval(*n.b, x, y, r));
    case Op::Max: return std::max(eval(*n.a, x, y, r), eval(*n.b, x, y, r));
  }
  return 0;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  ExprPtr parse_scalar() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

  std::vector<ExprPtr> parse_matrix(int* rows_out) {
    skip_ws();
    expect('[');
    std::vector<ExprPtr> entries;
    int rows = 0, cols = -1;
    while (true) {
      std::vector<ExprPtr> row = parse_row();
      if (cols < 0) cols = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != cols) fail("matrix rows have unequal lengths");
      for (auto& e : row) entries.push_back(std::move(e));
      ++rows;
      skip_ws();
      if (consume(',')) continue;
      break;
    }
    expect(']');
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    if (rows != cols) fail("matrix must be square");
    if (rows < 1 || rows > 2) fail("matrix must be 1x1 or 2x2");
    *rows_out = rows;
    return entries;
  }

 private:
  std::vector<ExprPtr> parse_row() {
    skip_ws();
    expect('[');
    std::vector<ExprPtr> row;
    row.push_back(expr());
    skip_ws();
    while (consume(',')) row.push_back(expr());
    expect(']');
    return row;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (true) {
      skip_ws();
      if (consume('+')) e = binary(Op::Add, e, term());
      else if (consume('-')) e = binary(Op::Sub, e, term());
      else return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (true) {
      skip_ws();
      if (consume('*')) e = binary(Op::Mul, e, factor());
      else if (consume('/')) e = binary(Op::Div, e, factor());
      else return e;
    }
  }

  // '^' binds tighter than unary minus and associates right: -x^2 = -(x^2).
  ExprPtr factor() {
    skip_ws();
    if (consume('-')) return unary(Op::Neg, factor());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    skip_ws();
    if (consume('^')) return binary(Op::Pow, base, factor());
    return base;
  }

  ExprPtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (consume('(')) {
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    fail("expected number, variable, function or '('");
    return nullptr;
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    std::size_t idx = 0;
    double v = 0;
    try {
      v = std::stod(text_.substr(start), &idx);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ = start + idx;
    return leaf(Op::Const, v);
  }

  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name == "x") return leaf(Op::VarX);
    if (name == "y") return leaf(Op::VarY);
    if (name == "r") return leaf(Op::VarR);
    Op op;
    int nargs = 1;
    if (name == "exp") op = Op::Exp;
    else if (name == "log") op = Op::Log;
    else if (name == "abs") op = Op::Abs;
    else if (name == "min") { op = Op::Min; nargs = 2; }
    else if (name == "max") { op = Op::Max; nargs = 2; }
    else {
      fail_at("unknown identifier '" + name + "'", start);
      return nullptr;
    }
    skip_ws();
    expect('(');
    ExprPtr a = expr();
    if (nargs == 1) {
      expect(')');
      return unary(op, std::move(a));
    }
    skip_ws();
    expect(',');
    ExprPtr b = expr();
    expect(')');
    return binary(op, std::move(a), std::move(b));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& msg) { fail_at(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t pos) {
    throw ParseError("parse error: " + msg, pos);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace
}  // namespace detail

double CoefficientField::eval_scalar(const Point& x, int dim) const {
  if (kind_ != FieldKind::Scalar) throw ValidationError("matrix field used as scalar");
  const double y = dim == 2 ? x[1] : 0.0;
  const double r = dim == 2 ? std::hypot(x[0], y) : std::abs(x[0]);
  return detail::eval(*entries_[0], x[0], y, r);
}

Matrix2 CoefficientField::eval_matrix(const Point& x, int dim) const {
  if (kind_ != FieldKind::SpdMatrix) throw ValidationError("scalar field used as matrix");
  const double y = dim == 2 ? x[1] : 0.0;
  const double r = dim == 2 ? std::hypot(x[0], y) : std::abs(x[0]);
  Matrix2 m = Matrix2::Zero();
  if (rows_ == 1) {
    m(0, 0) = detail::eval(*entries_[0], x[0], y, r);
    m(1, 1) = 1.0;  // unused in 1D energies; keeps the matrix SPD
  } else {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        m(i, j) = detail::eval(*entries_[static_cast<std::size_t>(2 * i + j)], x[0], y, r);
    m = 0.5 * (m + m.transpose()).eval();  // symmetrize before the SPD check
  }
  return m;
}

namespace {

// Closed-form eigenvalues of a symmetric 2x2 matrix.
std::pair<double, double> sym_eigs(const Matrix2& m) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

std::string describe_point(const Point& x, int dim) {
  std::ostringstream os;
  os << "(" << x[0];
  if (dim == 2) os << ", " << x[1];
  os << ")";
  return os.str();
}

}  // namespace

SpdBounds CoefficientField::spd_bounds(const Grid& grid) const {
  if (kind_ != FieldKind::SpdMatrix) throw ValidationError("spd_bounds requires a matrix field");
  SpdBounds b{std::numeric_limits<double>::infinity(), 0.0};
  for (const Index raw : grid.active_cells()) {
    const Point x = grid.cell_center(raw);
    const Matrix2 m = eval_matrix(x, grid.dim());
    double lo, hi;
    if (grid.dim() == 1 || rows_ == 1) {
      lo = hi = m(0, 0);
    } else {
      std::tie(lo, hi) = sym_eigs(m);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw ValidationError("matrix field not finite at quadrature point " +
                            describe_point(x, grid.dim()));
    if (lo <= 0)
      throw ValidationError("matrix field not positive definite at quadrature point " +
                            describe_point(x, grid.dim()) +
                            " (smallest eigenvalue " + std::to_string(lo) + ")");
    b.theta = std::min(b.theta, lo);
    b.Theta = std::max(b.Theta, hi);
  }
  return b;
}

void CoefficientField::check_finite(const Grid& grid) const {
  for (const Index raw : grid.active_cells()) {
    const Point x = grid.cell_center(raw);
    if (kind_ == FieldKind::Scalar) {
      if (!std::isfinite(eval_scalar(x, grid.dim())))
        throw ValidationError("field not finite at quadrature point " +
                              describe_point(x, grid.dim()));
    } else {
      if (!eval_matrix(x, grid.dim()).allFinite())
        throw ValidationError("field not finite at quadrature point " +
                              describe_point(x, grid.dim()));
    }
  }
}

CoefficientField parse_field_expr(const std::string& text, FieldKind kind) {
  CoefficientField f;
  f.kind_ = kind;
  f.source_ = text;
  if (kind == FieldKind::Scalar) {
    detail::Parser p(text);
    f.entries_.push_back(p.parse_scalar());
    f.rows_ = 0;
  } else {
    detail::Parser p(text);
    f.entries_ = p.parse_matrix(&f.rows_);
  }
  return f;
}

CoefficientField constant_field(double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  std::string s = os.str();
  if (value < 0) s = "(0 - " + s.substr(1) + ")";
  return parse_field_expr(s, FieldKind::Scalar);
}

namespace {

std::string dist_sq_expr(const Point& center, int dim) {
  std::ostringstream os;
  os.precision(17);
  os << "((x - " << center[0] << ")^2";
  if (dim == 2) os << " + (y - " << center[1] << ")^2";
  os << ")";
  return os.str();
}

}  // namespace

CoefficientField bump_field(const Point& center, double radius, int dim, double amplitude) {
  const std::string s2 = dist_sq_expr(center, dim);
  std::ostringstream os;
  os.precision(17);
  const double r2 = radius * radius;
  os << amplitude << " * (max(0, " << r2 << " - " << s2 << ") / " << r2 << ")^2";
  return parse_field_expr(os.str(), FieldKind::Scalar);
}

CoefficientField plateau_bump_field(const Point& center, double radius, int dim,
                                    double plateau_fraction) {
  if (!(0 < plateau_fraction && plateau_fraction < 1))
    throw ValidationError("plateau fraction must lie in (0,1)");
  const std::string s2 = dist_sq_expr(center, dim);
  const double r2 = radius * radius;
  const double rp2 = plateau_fraction * plateau_fraction * r2;
  std::ostringstream os;
  os.precision(17);
  os << "min(1, (max(0, " << r2 << " - " << s2 << ") / " << (r2 - rp2) << ")^2)";
  return parse_field_expr(os.str(), FieldKind::Scalar);
}

CoefficientField annular_bump_field(const Point& center, double r_in, double r_out, int dim,
                                    double amplitude) {
  if (!(0 <= r_in && r_in < r_out))
    throw ValidationError("annular bump needs 0 <= r_in < r_out");
  const std::string s2 = dist_sq_expr(center, dim);
  const double a2 = r_in * r_in, b2 = r_out * r_out;
  const double peak = 0.25 * (b2 - a2) * (b2 - a2);  // value of the product at s^2=(a2+b2)/2
  std::ostringstream os;
  os.precision(17);
  os << amplitude << " * ((max(0, " << s2 << " - " << a2 << ") * max(0, " << b2 << " - " << s2
     << ")) / " << peak << ")^2";
  return parse_field_expr(os.str(), FieldKind::Scalar);
}

}  // namespace pacrit
