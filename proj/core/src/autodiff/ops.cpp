#include "tween/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace tween::ad {
namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw ContractError("operands live on different tapes");
  return *a.tape;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

template <typename F, typename DF>
Var unary(const char* op, Var x, F f, DF df) {
  Tape& t = *x.tape;
  Tensor out = x.value().unaryExpr(f);
  const int xi = x.id;
  return t.push(op, std::move(out), {xi}, [xi, df](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& in = t.value(xi);
    const Tensor& y = t.value(self);
    Tensor d(g.rows(), g.cols());
    for (Index k = 0; k < g.size(); ++k) d.data()[k] = g.data()[k] * df(in.data()[k], y.data()[k]);
    t.accumulate(xi, d);
  });
}

}  // namespace

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

double plu(double x) {
  return std::max(kPluAlpha * (x + kPluC) - kPluC, std::min(kPluAlpha * (x - kPluC) + kPluC, x));
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + shape_str(a.value()) + " * " + shape_str(b.value()));
  }
  Tensor out = a.value() * b.value();
  const int ai = a.id;
  const int bi = b.id;
  return t.push("matmul", std::move(out), {ai, bi}, [ai, bi](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    if (t.requires_grad(ai)) t.accumulate(ai, g * t.value(bi).transpose());
    if (t.requires_grad(bi)) t.accumulate(bi, t.value(ai).transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape("add", a.value(), b.value());
  const int ai = a.id;
  const int bi = b.id;
  return t.push("add", a.value() + b.value(), {ai, bi}, [ai, bi](Tape& t, int self) {
    t.accumulate(ai, t.grad_of(self));
    t.accumulate(bi, t.grad_of(self));
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape("sub", a.value(), b.value());
  const int ai = a.id;
  const int bi = b.id;
  return t.push("sub", a.value() - b.value(), {ai, bi}, [ai, bi](Tape& t, int self) {
    t.accumulate(ai, t.grad_of(self));
    t.accumulate(bi, -t.grad_of(self));
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape("mul", a.value(), b.value());
  const int ai = a.id;
  const int bi = b.id;
  return t.push("mul", a.value().cwiseProduct(b.value()), {ai, bi}, [ai, bi](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    if (t.requires_grad(ai)) t.accumulate(ai, g.cwiseProduct(t.value(bi)));
    if (t.requires_grad(bi)) t.accumulate(bi, g.cwiseProduct(t.value(ai)));
  });
}

Var add_row(Var x, Var row) {
  Tape& t = same_tape(x, row);
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeError("add_row: expected 1x" + std::to_string(x.cols()) + " row, got " + shape_str(row.value()));
  }
  Tensor out = x.value().rowwise() + row.value().row(0);
  const int xi = x.id;
  const int ri = row.id;
  return t.push("add_row", std::move(out), {xi, ri}, [xi, ri](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    t.accumulate(xi, g);
    if (t.requires_grad(ri)) t.accumulate(ri, g.colwise().sum());
  });
}

Var mul_col(Var x, Var col) {
  Tape& t = same_tape(x, col);
  if (col.cols() != 1 || col.rows() != x.rows()) {
    throw ShapeError("mul_col: expected " + std::to_string(x.rows()) + "x1 column, got " + shape_str(col.value()));
  }
  Tensor out = x.value().array().colwise() * col.value().col(0).array();
  const int xi = x.id;
  const int ci = col.id;
  return t.push("mul_col", std::move(out), {xi, ci}, [xi, ci](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    if (t.requires_grad(xi)) {
      Tensor d = g.array().colwise() * t.value(ci).col(0).array();
      t.accumulate(xi, d);
    }
    if (t.requires_grad(ci)) {
      Tensor d = g.cwiseProduct(t.value(xi)).rowwise().sum();
      t.accumulate(ci, d);
    }
  });
}

Var scale(Var x, double s) {
  const int xi = x.id;
  return x.tape->push("scale", x.value() * s, {xi},
                      [xi, s](Tape& t, int self) { t.accumulate(xi, t.grad_of(self) * s); });
}

Var add_scalar(Var x, double s) {
  const int xi = x.id;
  Tensor out = x.value().array() + s;
  return x.tape->push("add_scalar", std::move(out), {xi},
                      [xi](Tape& t, int self) { t.accumulate(xi, t.grad_of(self)); });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  Tape& t = *parts[0].tape;
  const Index rows = parts[0].rows();
  Index cols = 0;
  std::vector<int> ids;
  std::vector<Index> widths;
  for (const Var& p : parts) {
    if (p.tape != &t) throw ContractError("operands live on different tapes");
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    ids.push_back(p.id);
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Tensor out(rows, cols);
  Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return t.push("concat_cols", std::move(out), ids, [ids, widths](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Index c = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) t.accumulate(ids[k], g.middleCols(c, widths[k]));
      c += widths[k];
    }
  });
}

Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice_cols(Var x, Index start, Index count) {
  if (start < 0 || count < 1 || start + count > x.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                     ") outside " + std::to_string(x.cols()) + " columns");
  }
  const int xi = x.id;
  Tensor out = x.value().middleCols(start, count);
  return x.tape->push("slice_cols", std::move(out), {xi}, [xi, start, count](Tape& t, int self) {
    const Tensor& in = t.value(xi);
    Tensor d = Tensor::Zero(in.rows(), in.cols());
    d.middleCols(start, count) = t.grad_of(self);
    t.accumulate(xi, d);
  });
}

Var elu(Var x) {
  return unary(
      "elu", x, [](double v) { return elu(v); },
      [](double in, double out) { return in > 0.0 ? 1.0 : out + 1.0; });
}

Var plu(Var x) {
  return unary(
      "plu", x, [](double v) { return plu(v); },
      [](double in, double) { return (in > kPluC || in < -kPluC) ? kPluAlpha : 1.0; });
}

Var tanh(Var x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); }, [](double, double out) { return 1.0 - out * out; });
}

Var sigmoid(Var x) {
  return unary(
      "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double out) { return out * (1.0 - out); });
}

Var exp(Var x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double out) { return out; });
}

Var square(Var x) {
  return unary(
      "square", x, [](double v) { return v * v; }, [](double in, double) { return 2.0 * in; });
}

Var abs(Var x) {
  return unary(
      "abs", x, [](double v) { return std::abs(v); },
      [](double in, double) { return in > 0.0 ? 1.0 : (in < 0.0 ? -1.0 : 0.0); });
}

Var softmax(Var x) {
  const Tensor& in = x.value();
  Tensor out(in.rows(), in.cols());
  for (Index r = 0; r < in.rows(); ++r) {
    const double m = in.row(r).maxCoeff();
    out.row(r) = (in.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  const int xi = x.id;
  return x.tape->push("softmax", std::move(out), {xi}, [xi](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& y = t.value(self);
    Tensor d(y.rows(), y.cols());
    for (Index r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).dot(y.row(r));
      d.row(r) = y.row(r).array() * (g.row(r).array() - dot);
    }
    t.accumulate(xi, d);
  });
}

Var activate(Activation kind, Var x) {
  switch (kind) {
    case Activation::Identity: return x;
    case Activation::Elu: return elu(x);
    case Activation::Plu: return plu(x);
    case Activation::Tanh: return tanh(x);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Softmax: return softmax(x);
  }
  throw ContractError("unknown activation");
}

Var norm3(Var x, double eps) {
  const Tensor& in = x.value();
  if (in.cols() % 3 != 0) throw ShapeError("norm3: column count must be a multiple of 3");
  const Index k = in.cols() / 3;
  Tensor out(in.rows(), k);
  for (Index r = 0; r < in.rows(); ++r) {
    for (Index j = 0; j < k; ++j) {
      const double a = in(r, 3 * j), b = in(r, 3 * j + 1), c = in(r, 3 * j + 2);
      out(r, j) = std::sqrt(a * a + b * b + c * c + eps);
    }
  }
  const int xi = x.id;
  return x.tape->push("norm3", std::move(out), {xi}, [xi, k](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& y = t.value(self);
    const Tensor& in = t.value(xi);
    Tensor d(in.rows(), in.cols());
    for (Index r = 0; r < in.rows(); ++r) {
      for (Index j = 0; j < k; ++j) {
        const double s = g(r, j) / y(r, j);
        for (Index c = 0; c < 3; ++c) d(r, 3 * j + c) = s * in(r, 3 * j + c);
      }
    }
    t.accumulate(xi, d);
  });
}

Var sum(Var x) {
  Tensor out(1, 1);
  out(0, 0) = x.value().sum();
  const int xi = x.id;
  return x.tape->push("sum", std::move(out), {xi}, [xi](Tape& t, int self) {
    const Tensor& in = t.value(xi);
    t.accumulate(xi, Tensor::Constant(in.rows(), in.cols(), t.grad_of(self)(0, 0)));
  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  Tensor out(1, 1);
  out(0, 0) = x.value().sum() / n;
  const int xi = x.id;
  return x.tape->push("mean", std::move(out), {xi}, [xi, n](Tape& t, int self) {
    const Tensor& in = t.value(xi);
    t.accumulate(xi, Tensor::Constant(in.rows(), in.cols(), t.grad_of(self)(0, 0) / n));
  });
}

LstmState lstm_cell(Var x, const LstmState& state, Var wx, Var wh, Var b) {
  const Index hidden = wh.rows();
  if (wx.cols() != 4 * hidden || wh.cols() != 4 * hidden || b.cols() != 4 * hidden) {
    throw ShapeError("lstm_cell: gate weights must have 4*hidden columns");
  }
  if (state.h.cols() != hidden || state.c.cols() != hidden) {
    throw ShapeError("lstm_cell: state width " + std::to_string(state.h.cols()) + " differs from hidden size " +
                     std::to_string(hidden));
  }
  Var gates = add_row(add(matmul(x, wx), matmul(state.h, wh)), b);
  Tape& t = *x.tape;

  const Tensor& a = gates.value();
  const Tensor& c = state.c.value();
  const Index rows = a.rows();
  auto cache = std::make_shared<Tensor>(rows, 5 * hidden);  // i, f, g, o, tanh(c')
  Tensor out(rows, 2 * hidden);                              // h' | c'
  for (Index r = 0; r < rows; ++r) {
    for (Index k = 0; k < hidden; ++k) {
      const double i = 1.0 / (1.0 + std::exp(-a(r, k)));
      const double f = 1.0 / (1.0 + std::exp(-a(r, hidden + k)));
      const double g = std::tanh(a(r, 2 * hidden + k));
      const double o = 1.0 / (1.0 + std::exp(-a(r, 3 * hidden + k)));
      const double cn = f * c(r, k) + i * g;
      const double tc = std::tanh(cn);
      (*cache)(r, k) = i;
      (*cache)(r, hidden + k) = f;
      (*cache)(r, 2 * hidden + k) = g;
      (*cache)(r, 3 * hidden + k) = o;
      (*cache)(r, 4 * hidden + k) = tc;
      out(r, k) = o * tc;
      out(r, hidden + k) = cn;
    }
  }
  const int gi = gates.id;
  const int ci = state.c.id;
  Var both = t.push("lstm_pointwise", std::move(out), {gi, ci}, [gi, ci, hidden, cache](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& cprev = t.value(ci);
    const Tensor& z = *cache;
    const Index rows = g.rows();
    Tensor dgates(rows, 4 * hidden);
    Tensor dc(rows, hidden);
    for (Index r = 0; r < rows; ++r) {
      for (Index k = 0; k < hidden; ++k) {
        const double i = z(r, k), f = z(r, hidden + k), gg = z(r, 2 * hidden + k), o = z(r, 3 * hidden + k);
        const double tc = z(r, 4 * hidden + k);
        const double dh = g(r, k);
        const double dcn = g(r, hidden + k) + dh * o * (1.0 - tc * tc);
        dgates(r, k) = dcn * gg * i * (1.0 - i);
        dgates(r, hidden + k) = dcn * cprev(r, k) * f * (1.0 - f);
        dgates(r, 2 * hidden + k) = dcn * i * (1.0 - gg * gg);
        dgates(r, 3 * hidden + k) = dh * tc * o * (1.0 - o);
        dc(r, k) = dcn * f;
      }
    }
    t.accumulate(gi, dgates);
    t.accumulate(ci, dc);
  });
  return LstmState{slice_cols(both, 0, hidden), slice_cols(both, hidden, hidden)};
}

}  // namespace tween::ad
