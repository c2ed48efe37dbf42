#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gifrank {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad JSON, wrong field types, truncated binary data.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed JSON whose fields do not match the record schema.
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A record is well formed but breaks a domain rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Labels required but absent.
class LabelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Binary artifact written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or otherwise could not proceed.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 14695981039346656037ULL);

// 32-bit FNV-1a over raw bytes (the subword bucket hash).
std::uint32_t fnv1a32(std::string_view bytes);

std::uint64_t splitmix64(std::uint64_t x);

// Whole-file helpers. write_file replaces the target atomically.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

/// Seed for a named stage, independent of which other stages exist.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stage_name);

// Order-sensitive hash of a list of feature names.
std::uint64_t schema_hash(const std::vector<std::string>& schema);

/// Seeded generator with distribution helpers that do not depend on the
/// standard library's (implementation-defined) distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Uniform real in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln(1 + e^x) without overflow.
inline double softplus(double x) {
  if (x > 0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

}  // namespace gifrank
