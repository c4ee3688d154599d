#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csure/manifold.hpp"

namespace csure::classifier {

inline constexpr int kDefaultSignalLength = 128;

struct ComplexSignal {
  std::string id;
  int label = 0;
  std::optional<double> snr_db;
  std::vector<Complex> samples;
};

using Dataset = std::vector<ComplexSignal>;

/// Phase-shift-keying style generator. Class c transmits symbols from a
/// constellation of c + 2 equally spaced phases, rotated by c * phase_step,
/// held for samples_per_symbol samples with a per-symbol amplitude
/// 1 + amplitude_jitter * N(0, 1). Complex white Gaussian noise of power
/// 10^(-snr_db / 10) is added per sample.
struct SyntheticSpec {
  int classes = 4;
  /// Signals per class in total; the i-th signal of a class uses
  /// snr_db[i % snr_db.size()].
  int per_class = 40;
  std::vector<double> snr_db{10.0};
  int length = kDefaultSignalLength;
  int samples_per_symbol = 8;
  double amplitude_jitter = 0.1;
  double phase_step = 0.4;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
};

/// Rows are ordered by class, then by index within the class. Each signal
/// has its own seed derived from (seed, class, index).
Dataset generate_psk(const SyntheticSpec& spec);

/// All SNR values from -20 to 18 dB in steps of 2.
std::vector<double> full_snr_range();

/// CSV with header `id,label,snr_db,re_0,im_0,...,re_{L-1},im_{L-1}`;
/// snr_db is empty when absent. Numbers use 17 significant digits.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

/// Throws DataError on I/O failures, a bad header, or rows whose field count
/// differs from 2L + 3.
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Number of distinct labels, i.e. 1 + the largest label.
int count_classes(const Dataset& data);

}  // namespace csure::classifier
