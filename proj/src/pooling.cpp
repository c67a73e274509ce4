#include "minet/pooling.hpp"

#include <cmath>

#include "minet/error.hpp"
#include "minet/ops.hpp"

namespace minet {

std::string to_string(PoolingKind kind) {
  switch (kind) {
    case PoolingKind::attention: return "attention";
    case PoolingKind::gated: return "gated";
    case PoolingKind::max: return "max";
    case PoolingKind::mean: return "mean";
  }
  return "?";
}

PoolingKind parse_pooling_kind(const std::string& name) {
  if (name == "attention") return PoolingKind::attention;
  if (name == "gated") return PoolingKind::gated;
  if (name == "max") return PoolingKind::max;
  if (name == "mean") return PoolingKind::mean;
  throw ConfigError("unknown pooling kind '" + name + "'");
}

std::vector<Param*> AttentionParams::params() {
  std::vector<Param*> out;
  if (gated) {
    out = {&gate_v, &gate_u, &head_w};
  } else if (!w.empty()) {
    out = {&w, &b};
  }
  return out;
}

AttentionParams make_attention_params(std::size_t d_in, const PoolingSpec& spec, Rng& rng) {
  AttentionParams p;
  if (spec.kind == PoolingKind::attention) {
    p.w = Param("attn.w", init_params(1, d_in, Init::glorot_uniform, rng));
    p.b = Param("attn.b", Matrix(1, 1, 0.0));
  } else if (spec.kind == PoolingKind::gated) {
    if (spec.gated_hidden < 1) {
      throw ConfigError("gated pooling: hidden width must be >= 1");
    }
    p.gated = true;
    p.gate_v = Param("attn.gate_v", init_params(spec.gated_hidden, d_in, Init::glorot_uniform, rng));
    p.gate_u = Param("attn.gate_u", init_params(spec.gated_hidden, d_in, Init::glorot_uniform, rng));
    p.head_w = Param("attn.head_w", init_params(1, spec.gated_hidden, Init::glorot_uniform, rng));
  }
  return p;
}

namespace {

void check_temperature(double t) {
  if (!(t > 0.0)) throw ConfigError("pooling temperature must be positive");
}

Matrix tanh_matrix(const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (std::size_t n = 0; n < x.size(); ++n) out.values[n] = std::tanh(x.values[n]);
  return out;
}

}  // namespace

std::vector<double> attention_weights(const Matrix& x, const AttentionParams& p,
                                      double temperature, AttentionTrace* trace) {
  check_temperature(temperature);
  if (x.rows == 0) throw DomainError("attention_weights: empty bag");

  std::vector<double> scores(x.rows);
  AttentionTrace local;
  AttentionTrace& t = trace ? *trace : local;

  if (p.gated) {
    if (x.cols != p.gate_v.value.cols) {
      throw ShapeError("gated attention: input width " + std::to_string(x.cols) +
                       " vs gate width " + std::to_string(p.gate_v.value.cols));
    }
    // score_i = head_w · (tanh(gate_v x_i) ⊙ sigmoid(gate_u x_i))
    t.gate_tanh = tanh_matrix(matmul(x, transpose(p.gate_v.value)));
    t.gate_sig = sigmoid(matmul(x, transpose(p.gate_u.value)));
    const double* head = p.head_w.value.row(0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double* tv = t.gate_tanh.row(i);
      const double* su = t.gate_sig.row(i);
      double s = 0.0;
      for (std::size_t l = 0; l < p.head_w.value.cols; ++l) s += head[l] * tv[l] * su[l];
      scores[i] = s / temperature;
    }
  } else {
    if (x.cols != p.w.value.cols) {
      throw ShapeError("attention: input width " + std::to_string(x.cols) +
                       " vs weight width " + std::to_string(p.w.value.cols));
    }
    // score_i = sigmoid(w · x_i + b); the sigmoid bounds pre-softmax logits
    // to [0, 1], capping the weight contrast at e for temperature 1.
    Matrix raw = matmul(x, transpose(p.w.value));
    const double bias = p.b.value(0, 0);
    for (std::size_t i = 0; i < x.rows; ++i) raw(i, 0) += bias;
    t.sig = sigmoid(raw);
    for (std::size_t i = 0; i < x.rows; ++i) scores[i] = t.sig(i, 0) / temperature;
  }

  t.weights = softmax_vec(scores);
  return t.weights;
}

void attention_weights_backward(const std::vector<double>& d_a, const Matrix& x,
                                AttentionParams& p, double temperature,
                                const AttentionTrace& trace, Matrix& d_x) {
  check_temperature(temperature);
  const std::size_t k = x.rows;
  if (d_a.size() != k || trace.weights.size() != k) {
    throw ShapeError("attention_weights_backward: weight/bag size mismatch");
  }
  if (d_x.rows != k || d_x.cols != x.cols) {
    throw ShapeError("attention_weights_backward: d_x must be " + x.shape_str());
  }

  // through softmax, then the 1/T scale
  std::vector<double> d_score = softmax_vec_backward(d_a, trace.weights);
  for (double& v : d_score) v /= temperature;

  if (p.gated) {
    const std::size_t hidden = p.head_w.value.cols;
    const double* head = p.head_w.value.row(0);
    Matrix d_zv(k, hidden);
    Matrix d_zu(k, hidden);
    double* d_head = p.head_w.grad.row(0);
    for (std::size_t i = 0; i < k; ++i) {
      const double* tv = trace.gate_tanh.row(i);
      const double* su = trace.gate_sig.row(i);
      double* zv = d_zv.row(i);
      double* zu = d_zu.row(i);
      for (std::size_t l = 0; l < hidden; ++l) {
        const double dh = d_score[i] * head[l];
        d_head[l] += d_score[i] * tv[l] * su[l];
        zv[l] = dh * su[l] * (1.0 - tv[l] * tv[l]);
        zu[l] = dh * tv[l] * su[l] * (1.0 - su[l]);
      }
    }
    // dV += d_zv^T x, dU += d_zu^T x, dx += d_zv V + d_zu U
    const Matrix dv = matmul(transpose(d_zv), x);
    const Matrix du = matmul(transpose(d_zu), x);
    for (std::size_t n = 0; n < dv.size(); ++n) p.gate_v.grad.values[n] += dv.values[n];
    for (std::size_t n = 0; n < du.size(); ++n) p.gate_u.grad.values[n] += du.values[n];
    const Matrix dx_v = matmul(d_zv, p.gate_v.value);
    const Matrix dx_u = matmul(d_zu, p.gate_u.value);
    for (std::size_t n = 0; n < d_x.size(); ++n) {
      d_x.values[n] += dx_v.values[n] + dx_u.values[n];
    }
  } else {
    double* dw = p.w.grad.row(0);
    const double* w = p.w.value.row(0);
    double db = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double g = trace.sig(i, 0);
      const double d_raw = d_score[i] * g * (1.0 - g);
      db += d_raw;
      const double* xrow = x.row(i);
      double* dxrow = d_x.row(i);
      for (std::size_t j = 0; j < x.cols; ++j) {
        dw[j] += d_raw * xrow[j];
        dxrow[j] += d_raw * w[j];
      }
    }
    p.b.grad(0, 0) += db;
  }
}

std::vector<double> weighted_pool(const Matrix& p, const std::vector<double>& a) {
  if (a.size() != p.rows) {
    throw ShapeError("weighted_pool: " + std::to_string(a.size()) + " weights vs " +
                     std::to_string(p.rows) + " rows");
  }
  std::vector<double> out(p.cols, 0.0);
  for (std::size_t i = 0; i < p.rows; ++i) {
    const double* row = p.row(i);
    for (std::size_t j = 0; j < p.cols; ++j) out[j] += a[i] * row[j];
  }
  return out;
}

void weighted_pool_backward(const std::vector<double>& d_out, const Matrix& p,
                            const std::vector<double>& a, Matrix& d_p,
                            std::vector<double>& d_a) {
  if (d_out.size() != p.cols || a.size() != p.rows) {
    throw ShapeError("weighted_pool_backward: shape mismatch");
  }
  d_a.assign(p.rows, 0.0);
  for (std::size_t i = 0; i < p.rows; ++i) {
    const double* row = p.row(i);
    double* drow = d_p.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < p.cols; ++j) {
      drow[j] += a[i] * d_out[j];
      acc += row[j] * d_out[j];
    }
    d_a[i] = acc;
  }
}

std::vector<double> max_pool(const Matrix& p, std::vector<std::size_t>* argmax_out) {
  if (p.rows == 0) throw DomainError("max_pool: empty bag");
  std::vector<double> out(p.cols);
  std::vector<std::size_t> argmax(p.cols, 0);
  for (std::size_t j = 0; j < p.cols; ++j) out[j] = p(0, j);
  for (std::size_t i = 1; i < p.rows; ++i) {
    const double* row = p.row(i);
    for (std::size_t j = 0; j < p.cols; ++j) {
      if (row[j] > out[j]) {  // strict: ties keep the lowest index
        out[j] = row[j];
        argmax[j] = i;
      }
    }
  }
  if (argmax_out) *argmax_out = std::move(argmax);
  return out;
}

void max_pool_backward(const std::vector<double>& d_out,
                       const std::vector<std::size_t>& argmax, Matrix& d_p) {
  if (d_out.size() != d_p.cols || argmax.size() != d_p.cols) {
    throw ShapeError("max_pool_backward: shape mismatch");
  }
  for (std::size_t j = 0; j < d_p.cols; ++j) {
    d_p(argmax[j], j) += d_out[j];
  }
}

std::vector<double> mean_pool(const Matrix& p) {
  if (p.rows == 0) throw DomainError("mean_pool: empty bag");
  std::vector<double> out(p.cols, 0.0);
  for (std::size_t i = 0; i < p.rows; ++i) {
    const double* row = p.row(i);
    for (std::size_t j = 0; j < p.cols; ++j) out[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(p.rows);
  for (double& v : out) v *= inv;
  return out;
}

void mean_pool_backward(const std::vector<double>& d_out, Matrix& d_p) {
  if (d_out.size() != d_p.cols) {
    throw ShapeError("mean_pool_backward: shape mismatch");
  }
  const double inv = 1.0 / static_cast<double>(d_p.rows);
  for (std::size_t i = 0; i < d_p.rows; ++i) {
    double* drow = d_p.row(i);
    for (std::size_t j = 0; j < d_p.cols; ++j) drow[j] += d_out[j] * inv;
  }
}

}  // namespace minet
