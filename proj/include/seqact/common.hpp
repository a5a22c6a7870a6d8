// Shared error types, deterministic RNG, and small utilities.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqact {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/vector dimension disagreements.
struct ShapeError : Error {
  using Error::Error;
};

// File and format problems, with a machine-checkable kind.
struct DataError : Error {
  enum class Kind {
    kIo,
    kBadMagic,
    kBadVersion,
    kTruncated,
    kDimensionMismatch,
    kMalformed,
  };

  DataError(Kind k, const std::string& msg) : Error(msg), kind(k) {}

  Kind kind;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
  using Error::Error;
};

// splitmix64 step; used to derive independent stream seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Deterministic RNG. The engine is mt19937_64 (bit-exact by the standard) and
// every draw algorithm is spelled out here, so values never depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller.
  double gaussian();

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Runs fn(begin, end) over [0, n) split into at most `threads` contiguous
// chunks, one worker thread per chunk. threads <= 1 runs inline.
void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace seqact
