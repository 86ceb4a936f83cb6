#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace etale {

using ObjectId = int;
using ArrowId = int;
using ElementId = int;

inline constexpr int kNone = -1;

// Violations found by a validator. Empty means the structure is valid.
using Report = std::vector<std::string>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an exhaustive search would exceed its configured cap.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

// FNV-1a over a sequence of integers; stable across platforms and runs.
inline std::uint64_t stable_hash(const std::vector<int>& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int v : data) {
    auto u = static_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) {
      h ^= (u >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace etale
