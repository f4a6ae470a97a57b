#pragma once

#include "handover/features/features.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace handover::features {

/// On-disk store for per-trial feature sequences so the Morlet transform runs once per
/// trial rather than once per window. One file per key:
///
///   "HOFC" | u32 version | u64 key | i64 rows | i64 cols | f64 start | f64 step | rows*cols f64
///
/// little-endian, values column-major. Files are written to a temporary name and renamed,
/// so concurrent writers of the same key are safe and readers never see partial files.
class FeatureCache {
public:
  static constexpr std::uint32_t kVersion = 1;

  explicit FeatureCache(std::filesystem::path dir, std::uint64_t dataset_tag = 0);

  /// Key of one (trial, modality, feature options) combination.
  std::uint64_t key(const TrialKey& trial, Modality modality, const EegOptions& options) const;
  std::filesystem::path path_for(std::uint64_t key) const;

  /// Cached series, or nullopt when absent, stale (other version or key) or unreadable.
  std::optional<TimeSeries> load(std::uint64_t key) const;
  void store(std::uint64_t key, const TimeSeries& series) const;

  /// Cached features for the trial, building and storing them on a miss.
  FeatureSequence get_or_build(const TrialRecording& trial, Modality modality,
                               const EegOptions& options) const;

private:
  std::filesystem::path dir_;
  std::uint64_t dataset_tag_;
};

}  // namespace handover::features
