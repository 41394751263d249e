#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mbx {

/// Library-level failure: malformed input or a violated operation contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure carrying a 1-based source line.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Thrown when an exploration exceeds its node budget or is cancelled.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(std::uint64_t limit)
      : Error("exploration budget of " + std::to_string(limit) + " nodes exceeded"),
        limit_(limit) {}
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t limit_;
};

/// Node budget shared by long-running searches. Doubles as a cooperative
/// cancellation token: charge() polls the cancel flag.
class Budget {
 public:
  explicit Budget(std::uint64_t limit = 1'000'000) : limit_(limit) {}

  void charge(std::uint64_t n = 1) {
    used_ += n;
    if (used_ > limit_ || cancelled_.load(std::memory_order_relaxed))
      throw BudgetExceeded(limit_);
  }

  std::uint64_t used() const { return used_; }
  std::uint64_t limit() const { return limit_; }
  void cancel() { cancelled_.store(true, std::memory_order_relaxed); }

 private:
  std::uint64_t limit_;
  std::uint64_t used_ = 0;
  std::atomic<bool> cancelled_{false};
};

inline void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

template <typename It>
std::size_t hash_range(It first, It last) {
  std::size_t seed = 0xcbf29ce484222325ULL;
  for (; first != last; ++first) hash_combine(seed, std::hash<typename std::iterator_traits<It>::value_type>{}(*first));
  return seed;
}

}  // namespace mbx
