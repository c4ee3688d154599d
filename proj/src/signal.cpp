#include "csure/classifier/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csure/errors.hpp"
#include "csure/rng.hpp"

namespace csure::classifier {

nlohmann::json SyntheticSpec::to_json() const {
  return {{"classes", classes},
          {"per_class", per_class},
          {"snr_db", snr_db},
          {"length", length},
          {"samples_per_symbol", samples_per_symbol},
          {"amplitude_jitter", amplitude_jitter},
          {"phase_step", phase_step},
          {"seed", seed}};
}

Dataset generate_psk(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw UsageError("generate_psk: need at least 2 classes");
  if (spec.per_class < 1) throw UsageError("generate_psk: per_class must be positive");
  if (spec.snr_db.empty()) throw UsageError("generate_psk: need at least one SNR");
  if (spec.length < 1 || spec.samples_per_symbol < 1) throw UsageError("generate_psk: bad length");

  Dataset out;
  out.reserve(static_cast<size_t>(spec.classes) * spec.per_class);
  for (int c = 0; c < spec.classes; ++c) {
    const int order = c + 2;
    const double rotation = c * spec.phase_step;
    for (int i = 0; i < spec.per_class; ++i) {
      Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)));
      const double snr = spec.snr_db[static_cast<size_t>(i) % spec.snr_db.size()];
      const double noise_sd = std::sqrt(std::pow(10.0, -snr / 10.0) / 2.0);

      ComplexSignal sig;
      sig.id = "c" + std::to_string(c) + "_" + std::to_string(i);
      sig.label = c;
      sig.snr_db = snr;
      sig.samples.reserve(spec.length);
      std::complex<double> symbol;
      for (int t = 0; t < spec.length; ++t) {
        if (t % spec.samples_per_symbol == 0) {
          const auto m = static_cast<double>(rng.below(static_cast<std::uint64_t>(order)));
          const double amp = std::max(0.05, 1.0 + spec.amplitude_jitter * rng.normal());
          symbol = std::polar(amp, rotation + 2.0 * kPi<double> * m / order);
        }
        const double re = noise_sd * rng.normal();
        const double im = noise_sd * rng.normal();
        sig.samples.push_back(Complex::from_complex(symbol + std::complex<double>(re, im)));
      }
      out.push_back(std::move(sig));
    }
  }
  return out;
}

std::vector<double> full_snr_range() {
  std::vector<double> out;
  for (int s = -20; s <= 18; s += 2) out.push_back(s);
  return out;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const size_t length = data.empty() ? kDefaultSignalLength : data.front().samples.size();
  out << "id,label,snr_db";
  for (size_t t = 0; t < length; ++t) out << ",re_" << t << ",im_" << t;
  out << '\n';
  char buf[64];
  for (const auto& sig : data) {
    if (sig.samples.size() != length) throw UsageError("write_dataset_csv: signals differ in length");
    out << sig.id << ',' << sig.label << ',';
    if (sig.snr_db) {
      std::snprintf(buf, sizeof buf, "%.17g", *sig.snr_db);
      out << buf;
    }
    for (const auto& x : sig.samples) {
      const auto c = x.to_complex();
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", c.real(), c.imag());
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double to_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d)) {
    throw DataError(where + ": invalid number '" + s + "'");
  }
  return d;
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 5 || header[0] != "id" || header[1] != "label" || header[2] != "snr_db" ||
      (header.size() - 3) % 2 != 0) {
    throw DataError(path.string() + ": bad header");
  }
  const size_t length = (header.size() - 3) / 2;

  Dataset data;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(row);
    if (fields.size() != 2 * length + 3) {
      throw DataError(where + ": expected " + std::to_string(2 * length + 3) + " fields, got " +
                      std::to_string(fields.size()));
    }
    ComplexSignal sig;
    sig.id = fields[0];
    const double label = to_double(fields[1], where);
    if (label < 0 || label != std::floor(label)) throw DataError(where + ": label must be a non-negative integer");
    sig.label = static_cast<int>(label);
    if (!fields[2].empty()) sig.snr_db = to_double(fields[2], where);
    sig.samples.reserve(length);
    for (size_t t = 0; t < length; ++t) {
      sig.samples.push_back(
          Complex::from_cartesian(to_double(fields[3 + 2 * t], where), to_double(fields[4 + 2 * t], where)));
    }
    data.push_back(std::move(sig));
  }
  return data;
}

int count_classes(const Dataset& data) {
  int c = 0;
  for (const auto& s : data) c = std::max(c, s.label + 1);
  return c;
}

}  // namespace csure::classifier
