#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dagq/matrix.hpp"

namespace dagq {

// Reverse-mode differentiation over the matrix primitives. Values are
// recorded in evaluation order; backward() replays the records once in
// reverse, accumulating adjoints. Single-threaded; one Tape per expression.
class Tape {
 public:
  using Id = int;

  Id input(Matrix value) { return push(std::move(value), nullptr); }

  Id matmul(Id a, Id b) {
    Id out = push(dagq::matmul(value(a), value(b)), nullptr);
    node(out).back = [a, b](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      accumulate(t.node(a).grad, dagq::matmul(g, dagq::transpose(t.value(b))));
      accumulate(t.node(b).grad, dagq::matmul(dagq::transpose(t.value(a)), g));
    };
    return out;
  }

  Id transpose(Id a) {
    Id out = push(dagq::transpose(value(a)), nullptr);
    node(out).back = [a](Tape& t, Id self) {
      accumulate(t.node(a).grad, dagq::transpose(t.grad(self)));
    };
    return out;
  }

  Id concat_cols(Id a, Id b, Id c) {
    Id out = push(dagq::concat_cols(value(a), value(b), value(c)), nullptr);
    node(out).back = [a, b, c](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      const int wa = t.value(a).cols();
      const int wb = t.value(b).cols();
      const int wc = t.value(c).cols();
      Matrix& ga = t.node(a).grad;
      Matrix& gb = t.node(b).grad;
      Matrix& gc = t.node(c).grad;
      for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < wa; ++j) ga(i, j) += g(i, j);
        for (int j = 0; j < wb; ++j) gb(i, j) += g(i, wa + j);
        for (int j = 0; j < wc; ++j) gc(i, j) += g(i, wa + wb + j);
      }
    };
    return out;
  }

  Id relu(Id a) {
    Id out = push(dagq::relu(value(a)), nullptr);
    node(out).back = [a](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      const Matrix& x = t.value(a);
      Matrix& ga = t.node(a).grad;
      for (std::size_t i = 0; i < g.count(); ++i)
        if (x.data()[i] > 0.0) ga.data()[i] += g.data()[i];
    };
    return out;
  }

  Id add_row_bias(Id a, Id bias) {
    Id out = push(dagq::add_row_bias(value(a), value(bias)), nullptr);
    node(out).back = [a, bias](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      accumulate(t.node(a).grad, g);
      Matrix& gb = t.node(bias).grad;
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
    };
    return out;
  }

  Id sum_rows(Id a) {
    Id out = push(dagq::sum_rows(value(a)), nullptr);
    node(out).back = [a](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      Matrix& ga = t.node(a).grad;
      for (int i = 0; i < ga.rows(); ++i)
        for (int j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j);
    };
    return out;
  }

  Id affine(Id x, Id w, Id b) { return add_row_bias(matmul(x, w), b); }

  Id sub(Id a, Id b) {
    Id out = push(dagq::sub(value(a), value(b)), nullptr);
    node(out).back = [a, b](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      accumulate(t.node(a).grad, g);
      Matrix& gb = t.node(b).grad;
      for (std::size_t i = 0; i < g.count(); ++i) gb.data()[i] -= g.data()[i];
    };
    return out;
  }

  Id square(Id a) {
    Id out = push(dagq::square(value(a)), nullptr);
    node(out).back = [a](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      const Matrix& x = t.value(a);
      Matrix& ga = t.node(a).grad;
      for (std::size_t i = 0; i < g.count(); ++i)
        ga.data()[i] += 2.0 * x.data()[i] * g.data()[i];
    };
    return out;
  }

  // d|x|/dx at exactly 0 is defined as 0, matching the ReLU convention.
  Id absval(Id a) {
    Id out = push(dagq::absval(value(a)), nullptr);
    node(out).back = [a](Tape& t, Id self) {
      const Matrix& g = t.grad(self);
      const Matrix& x = t.value(a);
      Matrix& ga = t.node(a).grad;
      for (std::size_t i = 0; i < g.count(); ++i) {
        const double s = x.data()[i] > 0.0 ? 1.0 : (x.data()[i] < 0.0 ? -1.0 : 0.0);
        ga.data()[i] += s * g.data()[i];
      }
    };
    return out;
  }

  Id scale(Id a, double c) {
    Id out = push(dagq::scale(value(a), c), nullptr);
    node(out).back = [a, c](Tape& t, Id self) {
      accumulate(t.node(a).grad, dagq::scale(t.grad(self), c));
    };
    return out;
  }

  const Matrix& value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad(Id id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  // Seeds the adjoint of a scalar output and propagates it to every recorded
  // value. Gradients from a previous backward pass are discarded.
  void backward(Id output, double seed = 1.0) {
    Matrix& out_value = nodes_[static_cast<std::size_t>(output)].value;
    if (out_value.rows() != 1 || out_value.cols() != 1)
      throw std::invalid_argument("backward: output must be a 1x1 scalar, got " +
                                  out_value.shape());
    for (Node& n : nodes_) n.grad = Matrix(n.value.rows(), n.value.cols());
    nodes_[static_cast<std::size_t>(output)].grad(0, 0) = seed;
    for (Id id = output; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.back) n.back(*this, id);
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&, Id)> back;
  };

  Node& node(Id id) { return nodes_[static_cast<std::size_t>(id)]; }

  Id push(Matrix value, std::function<void(Tape&, Id)> back) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(back)});
    return static_cast<Id>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
};

}  // namespace dagq
