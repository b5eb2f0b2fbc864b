#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagq/dag.hpp"
#include "dagq/env.hpp"
#include "dagq/matrix.hpp"
#include "dagq/rng.hpp"
#include "dagq/tape.hpp"

namespace dagq {

// Direction-aware graph convolutional Q-network. A graph state is scored by:
//
//   H0 = one-hot node features (n x b)
//   H  = ReLU(concat(H, A*H, At*H) * Wl + Bl)  for l = 1, 2
//   P  = sum_rows(H * W3 + B3)
//   Q  = ReLU(P) * W4 + B4
//
// With adjacency A[i][j] = 1 for edge i->j, A*H sums successor features and
// At*H predecessor features; concatenating both makes the network sensitive
// to edge direction. Sum pooling keeps type ratios and graph scale visible.
//
// The network scores a single graph. The Q-value of a (state, action) pair is
// the score of the action's successor graph, which is how action selection
// enumerates feasible extensions.
struct QNetConfig {
  int input_width = 1;   // b, the node type count
  int conv1_width = 32;
  int conv2_width = 32;
  int pooled_width = 32;

  void validate() const {
    if (input_width < 1 || conv1_width < 1 || conv2_width < 1 || pooled_width < 1)
      throw std::invalid_argument("QNetConfig: all widths must be >= 1");
  }
};

struct QNetParams {
  Matrix w1, b1, w2, b2, w3, b3, w4, b4;

  static QNetParams shaped(const QNetConfig& cfg) {
    cfg.validate();
    QNetParams p;
    p.w1 = Matrix(3 * cfg.input_width, cfg.conv1_width);
    p.b1 = Matrix(1, cfg.conv1_width);
    p.w2 = Matrix(3 * cfg.conv1_width, cfg.conv2_width);
    p.b2 = Matrix(1, cfg.conv2_width);
    p.w3 = Matrix(cfg.conv2_width, cfg.pooled_width);
    p.b3 = Matrix(1, cfg.pooled_width);
    p.w4 = Matrix(cfg.pooled_width, 1);
    p.b4 = Matrix(1, 1);
    return p;
  }

  QNetConfig config() const {
    return QNetConfig{w1.rows() / 3, w1.cols(), w2.cols(), w3.cols()};
  }

  static constexpr std::array<std::pair<const char*, Matrix QNetParams::*>, 8> kFields = {{
      {"W1", &QNetParams::w1}, {"B1", &QNetParams::b1},
      {"W2", &QNetParams::w2}, {"B2", &QNetParams::b2},
      {"W3", &QNetParams::w3}, {"B3", &QNetParams::b3},
      {"W4", &QNetParams::w4}, {"B4", &QNetParams::b4},
  }};

  std::size_t count() const {
    std::size_t total = 0;
    for (auto [name, field] : kFields) total += (this->*field).count();
    return total;
  }

  std::vector<double> flatten() const {
    std::vector<double> flat;
    flat.reserve(count());
    for (auto [name, field] : kFields) {
      const Matrix& m = this->*field;
      flat.insert(flat.end(), m.data().begin(), m.data().end());
    }
    return flat;
  }

  void unflatten(const std::vector<double>& flat) {
    if (flat.size() != count())
      throw std::invalid_argument("unflatten: expected " + std::to_string(count()) +
                                  " values, got " + std::to_string(flat.size()));
    std::size_t offset = 0;
    for (auto [name, field] : kFields) {
      Matrix& m = this->*field;
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                flat.begin() + static_cast<std::ptrdiff_t>(offset + m.count()),
                m.data().begin());
      offset += m.count();
    }
  }

  bool operator==(const QNetParams&) const = default;
};

// Glorot-uniform weights, zero biases. Weight matrices are filled in field
// order, row-major, so a seed pins the full parameter vector.
inline QNetParams init_params(const QNetConfig& cfg, Rng& rng) {
  QNetParams p = QNetParams::shaped(cfg);
  for (Matrix* w : {&p.w1, &p.w2, &p.w3, &p.w4}) {
    const double bound = std::sqrt(6.0 / (w->rows() + w->cols()));
    for (double& x : w->data()) x = (2.0 * rng.uniform01() - 1.0) * bound;
  }
  return p;
}

inline void copy_into(const QNetParams& source, QNetParams& dest) {
  for (auto [name, field] : QNetParams::kFields) {
    const Matrix& from = source.*field;
    Matrix& to = dest.*field;
    if (!from.same_shape(to))
      throw std::invalid_argument(std::string("copy_into: shape mismatch on ") + name +
                                  ": " + from.shape() + " vs " + to.shape());
    to = from;
  }
}

inline Matrix feature_matrix(const Dag& dag) {
  Matrix f(dag.size(), dag.num_types());
  for (int v = 1; v <= dag.size(); ++v) f(v - 1, dag.type_of(v)) = 1.0;
  return f;
}

inline Matrix adjacency_matrix(const Dag& dag) {
  Matrix a(dag.size(), dag.size());
  for (int i = 1; i <= dag.size(); ++i) {
    const std::uint64_t bits = dag.out_bits(i);
    for (int j = i + 1; j <= dag.size(); ++j)
      if ((bits >> (j - 1)) & 1u) a(i - 1, j - 1) = 1.0;
  }
  return a;
}

// Forward pass over explicit matrices. Exposed so tests can feed arbitrary
// adjacency structures (permuted labelings, disjoint unions) directly.
inline Matrix pooled_representation_matrices(const QNetParams& p, const Matrix& adjacency,
                                             const Matrix& features) {
  const Matrix at = transpose(adjacency);
  Matrix h = features;
  h = relu(affine(concat_cols(h, matmul(adjacency, h), matmul(at, h)), p.w1, p.b1));
  h = relu(affine(concat_cols(h, matmul(adjacency, h), matmul(at, h)), p.w2, p.b2));
  return sum_rows(affine(h, p.w3, p.b3));
}

inline double forward_matrices(const QNetParams& p, const Matrix& adjacency,
                               const Matrix& features) {
  if (features.rows() < 1)
    throw std::invalid_argument("forward: the null graph has no representation");
  if (features.cols() != p.w1.rows() / 3)
    throw std::invalid_argument("forward: feature width " +
                                std::to_string(features.cols()) +
                                " does not match network input width " +
                                std::to_string(p.w1.rows() / 3));
  const Matrix pooled = pooled_representation_matrices(p, adjacency, features);
  return affine(relu(pooled), p.w4, p.b4)(0, 0);
}

inline double forward(const QNetParams& p, const Dag& dag) {
  if (dag.size() == 0)
    throw std::invalid_argument("forward: the null graph has no representation");
  return forward_matrices(p, adjacency_matrix(dag), feature_matrix(dag));
}

inline Matrix pooled_representation(const QNetParams& p, const Dag& dag) {
  if (dag.size() == 0)
    throw std::invalid_argument("forward: the null graph has no representation");
  return pooled_representation_matrices(p, adjacency_matrix(dag), feature_matrix(dag));
}

// Forward pass recorded on a tape, for callers that need Q before deciding
// the upstream gradient (TD training inspects the error first).
struct TapedForward {
  Tape tape;
  Tape::Id q_id = -1;
  std::array<Tape::Id, 8> param_ids{};
  QNetConfig config;

  double q() const { return tape.value(q_id)(0, 0); }

  // Gradients of q * upstream with respect to every parameter.
  void backward(double upstream, QNetParams& grad_out) {
    tape.backward(q_id, upstream);
    grad_out = QNetParams::shaped(config);
    int idx = 0;
    for (auto [name, field] : QNetParams::kFields)
      grad_out.*field = tape.grad(param_ids[static_cast<std::size_t>(idx++)]);
  }
};

inline TapedForward taped_forward(const QNetParams& p, const Dag& dag) {
  if (dag.size() == 0)
    throw std::invalid_argument("forward: the null graph has no representation");
  TapedForward tf;
  tf.config = p.config();
  Tape& tape = tf.tape;
  const Tape::Id a = tape.input(adjacency_matrix(dag));
  const Tape::Id at = tape.transpose(a);
  const Tape::Id f = tape.input(feature_matrix(dag));

  int idx = 0;
  for (auto [name, field] : QNetParams::kFields)
    tf.param_ids[static_cast<std::size_t>(idx++)] = tape.input(p.*field);
  const auto pid = [&](int i) { return tf.param_ids[static_cast<std::size_t>(i)]; };

  Tape::Id h = f;
  h = tape.relu(tape.affine(tape.concat_cols(h, tape.matmul(a, h), tape.matmul(at, h)),
                            pid(0), pid(1)));
  h = tape.relu(tape.affine(tape.concat_cols(h, tape.matmul(a, h), tape.matmul(at, h)),
                            pid(2), pid(3)));
  const Tape::Id pooled = tape.sum_rows(tape.affine(h, pid(4), pid(5)));
  tf.q_id = tape.affine(tape.relu(pooled), pid(6), pid(7));
  return tf;
}

// Q together with d(Q * upstream)/dparams. Returns Q; the gradient lands in
// grad_out, shaped like the parameters.
inline double forward_grad(const QNetParams& p, const Dag& dag, double upstream,
                           QNetParams& grad_out) {
  TapedForward tf = taped_forward(p, dag);
  tf.backward(upstream, grad_out);
  return tf.q();
}

// Q(s, a) for every action: the score of each successor graph, aligned with
// the deterministic action ordering.
inline std::vector<double> evaluate_actions(const QNetParams& p, const Dag& state,
                                            const std::vector<Action>& actions,
                                            const Env& env) {
  std::vector<double> q;
  q.reserve(actions.size());
  for (const Action& a : actions) q.push_back(forward(p, env.apply(state, a)));
  return q;
}

// --- Checkpoints ------------------------------------------------------------
//
// Flat text: a header, then for each parameter a "<name> <rows> <cols>" line
// followed by one line of row-major values printed with %.17g (bit-faithful
// for IEEE doubles on round-trip).

inline void save_params(const QNetParams& p, std::ostream& out) {
  const QNetConfig cfg = p.config();
  out << "qnet v1\n";
  out << "dims " << cfg.input_width << ' ' << cfg.conv1_width << ' ' << cfg.conv2_width
      << ' ' << cfg.pooled_width << '\n';
  char buf[64];
  for (auto [name, field] : QNetParams::kFields) {
    const Matrix& m = p.*field;
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.count(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", m.data()[i]);
      if (i) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

inline void save_params(const QNetParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_params: cannot open " + path);
  save_params(p, out);
  if (!out) throw std::runtime_error("save_params: write to " + path + " failed");
}

inline QNetParams load_params(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  if (!in || magic != "qnet" || version != "v1")
    throw std::runtime_error("load_params: not a qnet v1 checkpoint");
  std::string dims_tag;
  QNetConfig cfg;
  in >> dims_tag >> cfg.input_width >> cfg.conv1_width >> cfg.conv2_width >>
      cfg.pooled_width;
  if (!in || dims_tag != "dims")
    throw std::runtime_error("load_params: malformed dims line");
  QNetParams p = QNetParams::shaped(cfg);
  for (auto [name, field] : QNetParams::kFields) {
    std::string got;
    int rows = 0, cols = 0;
    in >> got >> rows >> cols;
    if (!in || got != name)
      throw std::runtime_error("load_params: expected parameter " + std::string(name));
    Matrix& m = p.*field;
    if (rows != m.rows() || cols != m.cols())
      throw std::runtime_error("load_params: " + std::string(name) + " is " +
                               std::to_string(rows) + "x" + std::to_string(cols) +
                               ", expected " + m.shape());
    for (double& x : m.data()) {
      in >> x;
      if (!in) throw std::runtime_error("load_params: truncated values for " +
                                        std::string(name));
    }
  }
  return p;
}

inline QNetParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_params: cannot open " + path);
  return load_params(in);
}

}  // namespace dagq
