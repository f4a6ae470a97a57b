#include "handover/features/cache.hpp"

#include "handover/core/error.hpp"
#include "handover/core/rng.hpp"
#include "handover/core/text.hpp"

#include <atomic>
#include <bit>
#include <fstream>
#include <thread>

static_assert(std::endian::native == std::endian::little, "cache format assumes little-endian hosts");

namespace handover::features {

namespace {

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::ifstream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

std::atomic<std::uint64_t> temp_counter{0};

}  // namespace

FeatureCache::FeatureCache(std::filesystem::path dir, std::uint64_t dataset_tag)
    : dir_(std::move(dir)), dataset_tag_(dataset_tag) {
  std::filesystem::create_directories(dir_);
}

std::uint64_t FeatureCache::key(const TrialKey& trial, Modality modality, const EegOptions& options) const {
  const std::uint64_t options_hash = modality == Modality::Eeg ? options.fingerprint() : 0;
  return derive_seed(dataset_tag_, {static_cast<std::uint64_t>(trial.participant_id),
                                    static_cast<std::uint64_t>(trial.trial_id),
                                    static_cast<std::uint64_t>(modality), options_hash, kVersion});
}

std::filesystem::path FeatureCache::path_for(std::uint64_t key) const {
  return dir_ / (text::hex64(key) + ".hofc");
}

std::optional<TimeSeries> FeatureCache::load(std::uint64_t key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t stored_key = 0;
  std::int64_t rows = 0, cols = 0;
  double start = 0.0, step = 0.0;
  if (!in.read(magic, 4) || std::string(magic, 4) != "HOFC") return std::nullopt;
  if (!get(in, version) || version != kVersion) return std::nullopt;
  if (!get(in, stored_key) || stored_key != key) return std::nullopt;
  if (!get(in, rows) || !get(in, cols) || !get(in, start) || !get(in, step)) return std::nullopt;
  if (rows < 1 || cols < 1 || !(step > 0.0)) return std::nullopt;
  Matrix values(rows, cols);
  const auto bytes = static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rows * cols));
  if (!in.read(reinterpret_cast<char*>(values.data()), bytes)) return std::nullopt;
  if (in.peek() != std::ifstream::traits_type::eof()) return std::nullopt;
  return TimeSeries(start, step, std::move(values));
}

void FeatureCache::store(std::uint64_t key, const TimeSeries& series) const {
  const auto final_path = path_for(key);
  const auto tmp = dir_ / (text::hex64(key) + ".tmp" +
                           std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "-" +
                           std::to_string(temp_counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(tmp.string(), 0, "cannot open cache file for writing");
    out.write("HOFC", 4);
    put(out, kVersion);
    put(out, key);
    put(out, static_cast<std::int64_t>(series.samples()));
    put(out, static_cast<std::int64_t>(series.dims()));
    put(out, series.start_time_s);
    put(out, series.step_s);
    out.write(reinterpret_cast<const char*>(series.values.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(series.values.size())));
    if (!out) throw DataError(tmp.string(), 0, "short write to cache file");
  }
  std::filesystem::rename(tmp, final_path);
}

FeatureSequence FeatureCache::get_or_build(const TrialRecording& trial, Modality modality,
                                           const EegOptions& options) const {
  const std::uint64_t k = key(trial.key(), modality, options);
  if (auto cached = load(k)) {
    FeatureSequence seq;
    seq.modality = modality;
    seq.series = std::move(*cached);
    seq.trial_ref = trial.key();
    seq.label = label_of(trial.condition);
    return seq;
  }
  FeatureSequence seq = build_features(trial, modality, options);
  store(k, seq.series);
  return seq;
}

}  // namespace handover::features
