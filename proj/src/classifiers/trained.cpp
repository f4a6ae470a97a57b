#include "handover/classifiers/trained.hpp"

#include "handover/core/error.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

static_assert(std::endian::native == std::endian::little, "model format assumes little-endian hosts");

namespace handover::classifiers {

double ensemble_predict(std::span<const LstmMember> members, const Matrix& seq) {
  if (members.empty()) throw SpecError("ensemble has no members");
  double total = 0.0;
  for (const auto& m : members) {
    if (!(m.weight >= 0.0)) throw SpecError("ensemble weights must be nonnegative");
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SpecError("ensemble weights must sum to 1");
  double p = 0.0;
  for (const auto& m : members) p += m.weight * lstm_forward(m.model, seq);
  return p;
}

std::vector<double> normalize_weights(std::span<const double> scores) {
  if (scores.empty()) throw SpecError("no scores to normalize");
  double total = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0.0) throw SpecError("ensemble scores must be finite and nonnegative");
    total += s;
  }
  std::vector<double> w(scores.size(), 1.0 / static_cast<double>(scores.size()));
  if (total > 0.0)
    for (std::size_t i = 0; i < scores.size(); ++i) w[i] = scores[i] / total;
  return w;
}

Matrix Preprocessing::apply_flat(const Matrix& rows) const {
  Matrix x = rows;
  if (standardizer) standardizer->apply_in_place(x);
  if (pca) x = features::pca_apply(*pca, x);
  return x;
}

Matrix Preprocessing::apply_sequence(const Matrix& seq) const {
  if (pca) throw SpecError("PCA is not defined for sequence inputs");
  return standardizer ? standardizer->apply(seq) : seq;
}

Vector TrainedClassifier::predict_flat(const Matrix& rows) const {
  if (!is_lda()) throw SpecError("flat inputs are only accepted by LDA models");
  return lda_predict_proba(std::get<LdaModel>(model), preprocessing.apply_flat(rows));
}

Vector TrainedClassifier::predict_sequences(const std::vector<Matrix>& seqs) const {
  if (is_lda()) {
    std::vector<features::FeatureSequence> wrapped(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) wrapped[i].series = TimeSeries(0.0, 1.0, seqs[i]);
    return predict_flat(features::flatten_rows(wrapped));
  }
  Vector out(static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Matrix x = preprocessing.apply_sequence(seqs[i]);
    if (const auto* single = std::get_if<LstmModel>(&model)) {
      out(static_cast<Eigen::Index>(i)) = lstm_forward(*single, x);
    } else {
      out(static_cast<Eigen::Index>(i)) = ensemble_predict(std::get<std::vector<LstmMember>>(model), x);
    }
  }
  return out;
}

Vector TrainedClassifier::predict(const std::vector<features::FeatureSequence>& seqs) const {
  if (is_lda()) return predict_flat(features::flatten_rows(seqs));
  std::vector<Matrix> raw;
  raw.reserve(seqs.size());
  for (const auto& s : seqs) raw.push_back(s.series.values);
  return predict_sequences(raw);
}

// ---- serialization ----

namespace {

constexpr std::uint32_t kModelVersion = 1;

class Writer {
public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(const T& v) { out_.write(reinterpret_cast<const char*>(&v), sizeof(T)); }
  void vec(const std::vector<double>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void mat(const Matrix& m) {
    pod(static_cast<std::int64_t>(m.rows()));
    pod(static_cast<std::int64_t>(m.cols()));
    out_.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  void vec(const Vector& v) { mat(Matrix(v)); }

private:
  std::ostream& out_;
};

class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <typename T>
  T pod() {
    T v{};
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("truncated model file");
    return v;
  }
  std::vector<double> vec() {
    const auto n = pod<std::uint64_t>();
    if (n > (1ULL << 32)) throw DataError("model file: implausible vector length");
    std::vector<double> v(n);
    if (!in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
      throw DataError("truncated model file");
    return v;
  }
  Matrix mat() {
    const auto r = pod<std::int64_t>();
    const auto c = pod<std::int64_t>();
    if (r < 0 || c < 0 || r * c > (1LL << 32)) throw DataError("model file: implausible matrix shape");
    Matrix m(r, c);
    if (!in_.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double))))
      throw DataError("truncated model file");
    return m;
  }
  Vector column() {
    Matrix m = mat();
    if (m.cols() != 1 && m.size() != 0) throw DataError("model file: expected a vector");
    return Eigen::Map<Vector>(m.data(), m.size());
  }

private:
  std::istream& in_;
};

void write_spec(Writer& w, const LstmSpec& s) {
  w.pod<std::int32_t>(s.layers);
  w.pod<std::int32_t>(s.hidden);
  w.pod<std::int32_t>(s.input_dim);
  w.pod<std::int32_t>(s.batch_size);
  w.pod<std::int32_t>(s.max_epochs);
  w.pod<std::int32_t>(s.early_stop_after ? *s.early_stop_after : -1);
  w.pod<std::int32_t>(s.patience);
  w.pod(s.learning_rate);
  w.pod(s.clip_norm);
  w.pod(s.seed);
}

LstmSpec read_spec(Reader& r) {
  LstmSpec s;
  s.layers = r.pod<std::int32_t>();
  s.hidden = r.pod<std::int32_t>();
  s.input_dim = r.pod<std::int32_t>();
  s.batch_size = r.pod<std::int32_t>();
  s.max_epochs = r.pod<std::int32_t>();
  const auto esa = r.pod<std::int32_t>();
  if (esa >= 0) s.early_stop_after = esa;
  else s.early_stop_after.reset();
  s.patience = r.pod<std::int32_t>();
  s.learning_rate = r.pod<double>();
  s.clip_norm = r.pod<double>();
  s.seed = r.pod<std::uint64_t>();
  try {
    s.validate();
  } catch (const SpecError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  return s;
}

void write_lstm(Writer& w, const LstmModel& m) {
  write_spec(w, m.spec);
  w.vec(m.parameters);
}

LstmModel read_lstm(Reader& r) {
  LstmModel m;
  m.spec = read_spec(r);
  m.parameters = r.vec();
  if (m.parameters.size() != m.spec.parameter_count()) throw DataError("model file: parameter count does not match spec");
  return m;
}

}  // namespace

void save_model(std::ostream& out, const TrainedClassifier& model) {
  Writer w(out);
  out.write("HOMD", 4);
  w.pod(kModelVersion);
  w.pod(static_cast<std::uint8_t>(model.model.index()));

  const Preprocessing& p = model.preprocessing;
  w.pod(static_cast<std::uint8_t>(p.fitted_on_training_only));
  w.pod(static_cast<std::uint8_t>(p.standardizer.has_value()));
  if (p.standardizer) {
    w.vec(p.standardizer->mean);
    w.vec(p.standardizer->scale);
  }
  w.pod(static_cast<std::uint8_t>(p.pca.has_value()));
  if (p.pca) {
    w.vec(p.pca->mean);
    w.mat(p.pca->components);
    w.vec(p.pca->explained_variance_ratio);
  }

  if (const auto* lda = std::get_if<LdaModel>(&model.model)) {
    w.mat(lda->class_means);
    w.vec(lda->log_priors);
    w.pod(lda->shrinkage);
    w.vec(lda->weights);
    w.pod(lda->bias);
  } else if (const auto* lstm = std::get_if<LstmModel>(&model.model)) {
    write_lstm(w, *lstm);
  } else {
    const auto& members = std::get<std::vector<LstmMember>>(model.model);
    w.pod(static_cast<std::uint64_t>(members.size()));
    for (const auto& m : members) {
      w.pod(m.weight);
      write_lstm(w, m.model);
    }
  }
  if (!out) throw DataError("failed to write model");
}

TrainedClassifier load_model(std::istream& in) {
  Reader r(in);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "HOMD") throw DataError("not a model file (bad magic)");
  const auto version = r.pod<std::uint32_t>();
  if (version != kModelVersion) throw DataError("unsupported model format version " + std::to_string(version));
  const auto variant = r.pod<std::uint8_t>();

  TrainedClassifier out;
  out.preprocessing.fitted_on_training_only = r.pod<std::uint8_t>() != 0;
  if (r.pod<std::uint8_t>()) {
    dsp::Standardizer s;
    s.mean = r.column();
    s.scale = r.column();
    out.preprocessing.standardizer = std::move(s);
  }
  if (r.pod<std::uint8_t>()) {
    features::PcaModel p;
    p.mean = r.column();
    p.components = r.mat();
    p.explained_variance_ratio = r.column();
    out.preprocessing.pca = std::move(p);
  }

  switch (variant) {
    case 0: {
      LdaModel m;
      m.class_means = r.mat();
      m.log_priors = r.column();
      m.shrinkage = r.pod<double>();
      m.weights = r.column();
      m.bias = r.pod<double>();
      out.model = std::move(m);
      break;
    }
    case 1:
      out.model = read_lstm(r);
      break;
    case 2: {
      const auto n = r.pod<std::uint64_t>();
      if (n > 1024) throw DataError("model file: implausible ensemble size");
      std::vector<LstmMember> members;
      for (std::uint64_t i = 0; i < n; ++i) {
        LstmMember m;
        m.weight = r.pod<double>();
        m.model = read_lstm(r);
        members.push_back(std::move(m));
      }
      out.model = std::move(members);
      break;
    }
    default:
      throw DataError("model file: unknown classifier variant " + std::to_string(variant));
  }
  return out;
}

void save_model(const std::filesystem::path& file, const TrainedClassifier& model) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(file.string(), 0, "cannot open for writing");
  save_model(out, model);
}

TrainedClassifier load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError(file.string(), 0, "cannot open model file");
  return load_model(in);
}

}  // namespace handover::classifiers
