#include "handover/classifiers/lstm.hpp"

#include "handover/core/error.hpp"
#include "handover/core/rng.hpp"
#include "handover/core/text.hpp"
#include "handover/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace handover::classifiers {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z), stable for large |z|.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Activations of one layer over a sequence, kept for backpropagation.
struct LayerTrace {
  std::size_t steps = 0;
  std::size_t hidden = 0;
  std::vector<double> gates;  // [T x 4H]: i, f, g, o after their nonlinearities
  std::vector<double> c;      // [T x H]
  std::vector<double> h;      // [T x H]

  const double* h_at(std::size_t t) const { return h.data() + t * hidden; }
  const double* c_at(std::size_t t) const { return c.data() + t * hidden; }
};

struct ForwardTrace {
  std::vector<std::vector<double>> input;  // row-major copy of the sequence, [T x I]
  std::vector<LayerTrace> layers;
  std::vector<double> relu;  // head input
  double logit = 0.0;
};

void check_input(const LstmSpec& spec, const Matrix& seq) {
  if (seq.rows() < 1) throw DimensionError("LSTM input sequence is empty");
  if (seq.cols() != spec.input_dim) {
    throw DimensionError("LSTM expects " + std::to_string(spec.input_dim) + " input features, got " +
                         std::to_string(seq.cols()));
  }
}

ForwardTrace forward(const LstmModel& model, const LstmLayout& layout, const Matrix& seq) {
  const LstmSpec& spec = model.spec;
  check_input(spec, seq);
  const auto steps = static_cast<std::size_t>(seq.rows());
  const auto hidden = static_cast<std::size_t>(spec.hidden);
  const double* p = model.parameters.data();

  ForwardTrace tr;
  std::vector<double> x(steps * static_cast<std::size_t>(seq.cols()));
  for (std::size_t t = 0; t < steps; ++t)
    for (Eigen::Index j = 0; j < seq.cols(); ++j) x[t * seq.cols() + j] = seq(static_cast<Eigen::Index>(t), j);

  const std::vector<double>* layer_input = &x;
  std::size_t in_dim = static_cast<std::size_t>(seq.cols());
  std::vector<double> z(4 * hidden);
  for (const auto& L : layout.layers) {
    LayerTrace lt;
    lt.steps = steps;
    lt.hidden = hidden;
    lt.gates.resize(steps * 4 * hidden);
    lt.c.resize(steps * hidden);
    lt.h.resize(steps * hidden);
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy(p + L.bias, p + L.bias + 4 * hidden, z.begin());
      simd::gemv({p + L.w_ih, 4 * hidden * in_dim}, 4 * hidden, in_dim,
                 {layer_input->data() + t * in_dim, in_dim}, z);
      if (t > 0) simd::gemv({p + L.w_hh, 4 * hidden * hidden}, 4 * hidden, hidden, {lt.h_at(t - 1), hidden}, z);
      double* g = lt.gates.data() + t * 4 * hidden;
      double* c = lt.c.data() + t * hidden;
      double* h = lt.h.data() + t * hidden;
      for (std::size_t k = 0; k < hidden; ++k) {
        const double ig = sigmoid(z[k]);
        const double fg = sigmoid(z[hidden + k]);
        const double gg = std::tanh(z[2 * hidden + k]);
        const double og = sigmoid(z[3 * hidden + k]);
        g[k] = ig;
        g[hidden + k] = fg;
        g[2 * hidden + k] = gg;
        g[3 * hidden + k] = og;
        const double c_prev = t > 0 ? lt.c_at(t - 1)[k] : 0.0;
        c[k] = fg * c_prev + ig * gg;
        h[k] = og * std::tanh(c[k]);
      }
    }
    tr.layers.push_back(std::move(lt));
    layer_input = &tr.layers.back().h;
    in_dim = hidden;
  }
  tr.input.push_back(std::move(x));

  const double* top = tr.layers.back().h_at(steps - 1);
  tr.relu.resize(hidden);
  // NaN must pass through so divergence reaches the loss check.
  for (std::size_t k = 0; k < hidden; ++k) tr.relu[k] = top[k] > 0.0 || std::isnan(top[k]) ? top[k] : 0.0;
  tr.logit = p[layout.head_b] + simd::dot({p + layout.head_w, hidden}, tr.relu);
  return tr;
}

// Accumulates d(loss)/d(parameters) for one sequence given d(loss)/d(logit).
void backward(const LstmModel& model, const LstmLayout& layout, const ForwardTrace& tr, double dlogit,
              std::vector<double>& grad) {
  const auto hidden = static_cast<std::size_t>(model.spec.hidden);
  const double* p = model.parameters.data();
  const std::size_t steps = tr.layers.front().steps;

  for (std::size_t k = 0; k < hidden; ++k) grad[layout.head_w + k] += dlogit * tr.relu[k];
  grad[layout.head_b] += dlogit;

  // Gradient reaching each layer's outputs h_t from above; starts with the head.
  std::vector<double> dh_out(steps * hidden, 0.0);
  const double* top = tr.layers.back().h_at(steps - 1);
  for (std::size_t k = 0; k < hidden; ++k) {
    dh_out[(steps - 1) * hidden + k] = top[k] > 0.0 ? dlogit * p[layout.head_w + k] : 0.0;
  }

  std::vector<double> dz(4 * hidden), dh(hidden), dc(hidden), dh_next(hidden), dc_next(hidden);
  for (std::size_t li = layout.layers.size(); li-- > 0;) {
    const auto& L = layout.layers[li];
    const LayerTrace& lt = tr.layers[li];
    const std::size_t in_dim = L.input_dim;
    const double* input = li == 0 ? tr.input.front().data() : tr.layers[li - 1].h.data();
    std::vector<double> dx(li == 0 ? 0 : steps * in_dim, 0.0);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::fill(dc_next.begin(), dc_next.end(), 0.0);

    for (std::size_t t = steps; t-- > 0;) {
      const double* g = lt.gates.data() + t * 4 * hidden;
      const double* c = lt.c_at(t);
      for (std::size_t k = 0; k < hidden; ++k) {
        const double ig = g[k], fg = g[hidden + k], gg = g[2 * hidden + k], og = g[3 * hidden + k];
        const double tc = std::tanh(c[k]);
        const double dhk = dh_out[t * hidden + k] + dh_next[k];
        const double dck = dc_next[k] + dhk * og * (1.0 - tc * tc);
        const double c_prev = t > 0 ? lt.c_at(t - 1)[k] : 0.0;
        dz[k] = dck * gg * ig * (1.0 - ig);
        dz[hidden + k] = dck * c_prev * fg * (1.0 - fg);
        dz[2 * hidden + k] = dck * ig * (1.0 - gg * gg);
        dz[3 * hidden + k] = dhk * tc * og * (1.0 - og);
        dc_next[k] = dck * fg;
      }
      simd::axpy(1.0, dz, {grad.data() + L.bias, 4 * hidden});
      simd::ger(dz, {input + t * in_dim, in_dim}, {grad.data() + L.w_ih, 4 * hidden * in_dim});
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      if (t > 0) {
        simd::ger(dz, {lt.h_at(t - 1), hidden}, {grad.data() + L.w_hh, 4 * hidden * hidden});
        simd::gemv_t({p + L.w_hh, 4 * hidden * hidden}, 4 * hidden, hidden, dz, dh_next);
      }
      if (li > 0) simd::gemv_t({p + L.w_ih, 4 * hidden * in_dim}, 4 * hidden, in_dim, dz, {dx.data() + t * in_dim, in_dim});
    }
    if (li > 0) dh_out = std::move(dx);
  }
}

double bce(double logit, int label) { return softplus(logit) - (label == 1 ? logit : 0.0); }

void check_batch(const LstmSpec& spec, const SequenceBatch& batch) {
  if (batch.sequences.empty()) throw DimensionError("empty LSTM batch");
  if (batch.sequences.size() != batch.labels.size()) throw DimensionError("LSTM batch labels do not match sequences");
  for (const Matrix* s : batch.sequences) check_input(spec, *s);
}

}  // namespace

LstmSpec LstmSpec::eeg_recipe(int input_dim) {
  LstmSpec s;
  s.layers = 1;
  s.hidden = 128;
  s.input_dim = input_dim;
  s.batch_size = 16;
  s.max_epochs = 100;
  s.early_stop_after.reset();
  return s;
}

LstmSpec LstmSpec::gaze_motion_recipe(int input_dim) {
  LstmSpec s;
  s.input_dim = input_dim;
  return s;
}

void LstmSpec::validate() const {
  if (layers != 1 && layers != 2) throw SpecError("LSTM layers must be 1 or 2, got " + std::to_string(layers));
  if (hidden < 1) throw SpecError("LSTM hidden size must be at least 1");
  if (input_dim < 1) throw SpecError("LSTM input dimension must be at least 1");
  if (batch_size < 1) throw SpecError("LSTM batch size must be at least 1");
  if (max_epochs < 1) throw SpecError("LSTM max_epochs must be at least 1");
  if (patience < 1) throw SpecError("LSTM patience must be at least 1");
  if (early_stop_after && *early_stop_after < 0) throw SpecError("LSTM early_stop_after must be nonnegative");
  if (!(learning_rate > 0.0)) throw SpecError("LSTM learning rate must be positive");
  if (!(clip_norm > 0.0)) throw SpecError("LSTM gradient clip must be positive");
}

std::size_t LstmSpec::parameter_count() const { return LstmLayout(*this).total; }

LstmLayout::LstmLayout(const LstmSpec& spec) {
  spec.validate();
  const auto h = static_cast<std::size_t>(spec.hidden);
  std::size_t in = static_cast<std::size_t>(spec.input_dim);
  std::size_t off = 0;
  for (int l = 0; l < spec.layers; ++l) {
    Layer L{};
    L.input_dim = in;
    L.w_ih = off;
    off += 4 * h * in;
    L.w_hh = off;
    off += 4 * h * h;
    L.bias = off;
    off += 4 * h;
    layers.push_back(L);
    in = h;
  }
  head_w = off;
  off += h;
  head_b = off;
  total = off + 1;
}

LstmModel LstmModel::zeros(const LstmSpec& spec) {
  LstmModel m;
  m.spec = spec;
  m.parameters.assign(LstmLayout(spec).total, 0.0);
  return m;
}

LstmModel LstmModel::initialize(const LstmSpec& spec) {
  LstmModel m = zeros(spec);
  const LstmLayout layout(spec);
  Rng rng(derive_seed(spec.seed, {0x1417}));
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
  for (double& v : m.parameters) v = rng.uniform(-bound, bound);
  const auto h = static_cast<std::size_t>(spec.hidden);
  for (const auto& L : layout.layers)
    for (std::size_t k = 0; k < h; ++k) m.parameters[L.bias + h + k] = 1.0;
  return m;
}

double lstm_logit(const LstmModel& model, const Matrix& seq) {
  const LstmLayout layout(model.spec);
  if (model.parameters.size() != layout.total) throw DimensionError("LSTM parameter vector has the wrong length");
  return forward(model, layout, seq).logit;
}

double lstm_forward(const LstmModel& model, const Matrix& seq) { return sigmoid(lstm_logit(model, seq)); }

double lstm_loss(const LstmModel& model, const SequenceBatch& batch, double loss_scale) {
  check_batch(model.spec, batch);
  const LstmLayout layout(model.spec);
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.sequences.size(); ++i) {
    sum += bce(forward(model, layout, *batch.sequences[i]).logit, batch.labels[i]);
  }
  return loss_scale * sum / static_cast<double>(batch.sequences.size());
}

double lstm_loss_gradient(const LstmModel& model, const SequenceBatch& batch, std::vector<double>& gradient,
                          double loss_scale) {
  check_batch(model.spec, batch);
  const LstmLayout layout(model.spec);
  if (model.parameters.size() != layout.total) throw DimensionError("LSTM parameter vector has the wrong length");
  gradient.assign(layout.total, 0.0);
  const double inv = loss_scale / static_cast<double>(batch.sequences.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.sequences.size(); ++i) {
    const ForwardTrace tr = forward(model, layout, *batch.sequences[i]);
    sum += bce(tr.logit, batch.labels[i]);
    const double dlogit = (sigmoid(tr.logit) - (batch.labels[i] == 1 ? 1.0 : 0.0)) * inv;
    backward(model, layout, tr, dlogit, gradient);
  }
  return sum * inv;
}

GradientCheckResult gradient_check(const LstmModel& model, const SequenceBatch& batch, double loss_scale,
                                   double step) {
  std::vector<double> analytic;
  lstm_loss_gradient(model, batch, analytic, loss_scale);
  LstmModel probe = model;
  GradientCheckResult r;
  for (std::size_t i = 0; i < probe.parameters.size(); ++i) {
    const double saved = probe.parameters[i];
    probe.parameters[i] = saved + step;
    const double up = lstm_loss(probe, batch, loss_scale);
    probe.parameters[i] = saved - step;
    const double down = lstm_loss(probe, batch, loss_scale);
    probe.parameters[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    r.max_relative_error = std::max(r.max_relative_error, std::abs(a - numeric) / denom);
    r.max_abs_analytic = std::max(r.max_abs_analytic, std::abs(a));
    r.max_abs_numeric = std::max(r.max_abs_numeric, std::abs(numeric));
  }
  return r;
}

LstmModel lstm_train(const LstmSpec& spec, const std::vector<Matrix>& train_x, std::span<const int> train_y,
                     const std::vector<Matrix>& val_x, std::span<const int> val_y, LstmTrainReport* report) {
  spec.validate();
  if (train_x.empty() || val_x.empty()) throw DimensionError("LSTM training needs nonempty train and validation sets");
  if (train_x.size() != train_y.size() || val_x.size() != val_y.size()) {
    throw DimensionError("LSTM labels do not match sequences");
  }
  const bool has0 = std::find(train_y.begin(), train_y.end(), 0) != train_y.end();
  const bool has1 = std::find(train_y.begin(), train_y.end(), 1) != train_y.end();
  if (!has0 || !has1) throw NumericError("LSTM training data contains a single class");

  LstmModel model = LstmModel::initialize(spec);
  const std::size_t np = model.parameters.size();
  std::vector<double> m1(np, 0.0), m2(np, 0.0), grad;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long adam_step = 0;

  SequenceBatch val;
  for (std::size_t i = 0; i < val_x.size(); ++i) {
    val.sequences.push_back(&val_x[i]);
    val.labels.push_back(val_y[i]);
  }

  Rng rng(derive_seed(spec.seed, {0xba7c}));
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  LstmModel best = model;
  double best_loss = lstm_loss(model, val);
  int best_epoch = 0;
  LstmTrainReport local;

  for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(spec.batch_size));
      SequenceBatch batch;
      for (std::size_t j = start; j < stop; ++j) {
        batch.sequences.push_back(&train_x[order[j]]);
        batch.labels.push_back(train_y[order[j]]);
      }
      const double loss = lstm_loss_gradient(model, batch, grad);
      if (!std::isfinite(loss)) {
        throw NumericError("LSTM training diverged at epoch " + std::to_string(epoch) + " (learning rate " +
                           text::format_double(spec.learning_rate) + ")");
      }
      epoch_loss += loss * static_cast<double>(stop - start);

      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g;
      const double norm = std::sqrt(norm2);
      const double clip = norm > spec.clip_norm ? spec.clip_norm / norm : 1.0;

      ++adam_step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam_step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam_step));
      for (std::size_t i = 0; i < np; ++i) {
        const double g = grad[i] * clip;
        m1[i] = beta1 * m1[i] + (1.0 - beta1) * g;
        m2[i] = beta2 * m2[i] + (1.0 - beta2) * g * g;
        model.parameters[i] -= spec.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + eps);
      }
    }
    const double val_loss = lstm_loss(model, val);
    if (!std::isfinite(val_loss)) {
      throw NumericError("LSTM validation loss diverged at epoch " + std::to_string(epoch) + " (learning rate " +
                         text::format_double(spec.learning_rate) + ")");
    }
    local.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    local.val_loss.push_back(val_loss);
    local.epochs_run = epoch;
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = model;
      best_epoch = epoch;
    }
    if (spec.early_stop_after && epoch > *spec.early_stop_after && epoch - best_epoch >= spec.patience) break;
  }
  local.best_epoch = best_epoch;
  local.best_val_loss = best_loss;
  if (report) *report = std::move(local);
  return best;
}

}  // namespace handover::classifiers
