#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinwalk {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// ===== Error taxonomy =====
//
// Configuration and input errors are thrown, never silently patched.  Each
// class corresponds to one failure mode of the engine contracts.

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Walker amplitude would cross an open boundary.  Always a sizing bug: open
// lattices must satisfy n_sites >= 2*steps + 1.
class EdgeOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LengthMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonUnitaryInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveProbability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateWindow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CenterMisplaced : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BondDimOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ===== Angles =====

// Wrap into (-pi, pi].  Quasi-energies and gap arithmetic live on this branch.
inline double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// ===== Deterministic streams =====
//
// All randomness derives from a master seed through splitmix64 counters, so
// sample k of a run depends on (seed, k) alone.  Worker count and scheduling
// never enter.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stateless counter stream: value j of stream (seed, k).
inline std::uint64_t stream_value(std::uint64_t seed, std::uint64_t k, std::uint64_t j) {
  std::uint64_t s = splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (k + 1)));
  return splitmix64(s + j * 0xD1342543DE82EF95ull);
}

// ===== Fixed-shape pairwise reduction =====
//
// Binary-counter pairwise folding.  The reduction tree is a function of the
// leaf count alone, which makes ensemble means bitwise reproducible for any
// worker count: workers only decide who computes a leaf, not how leaves are
// combined.
template <typename T>
class PairwiseAccumulator {
 public:
  // add-assign merge; T must support operator+=.
  void push(T leaf) {
    slots_.push_back(std::move(leaf));
    levels_.push_back(0);
    while (levels_.size() >= 2 && levels_[levels_.size() - 1] == levels_[levels_.size() - 2]) {
      slots_[slots_.size() - 2] += slots_.back();
      slots_.pop_back();
      levels_[levels_.size() - 2] += 1;
      levels_.pop_back();
    }
  }

  bool empty() const { return slots_.empty(); }

  // Collapse remaining partials (right to left, fixed order).
  T take() {
    for (std::size_t i = slots_.size() - 1; i > 0; --i) slots_[i - 1] += slots_[i];
    T out = std::move(slots_.front());
    slots_.clear();
    levels_.clear();
    return out;
  }

 private:
  std::vector<T> slots_;
  std::vector<int> levels_;
};

}  // namespace spinwalk
