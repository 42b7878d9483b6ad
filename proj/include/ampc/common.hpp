/*
 Copyright 2026 The ampc authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef AMPC_COMMON_HPP
#define AMPC_COMMON_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ampc {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

/// Axis-aligned box, used for input constraints and sampling regions.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Eigen::VectorXd& v, double tol = 0.0) const {
    if (v.size() != lo.size()) return false;
    for (int i = 0; i < v.size(); ++i) {
      if (v[i] < lo[i] - tol || v[i] > hi[i] + tol) return false;
    }
    return true;
  }

  Eigen::VectorXd clamp(const Eigen::VectorXd& v) const {
    return v.cwiseMax(lo).cwiseMin(hi);
  }
};

inline Box make_box(std::initializer_list<double> lo,
                    std::initializer_list<double> hi) {
  Box b;
  b.lo = Eigen::VectorXd(static_cast<int>(lo.size()));
  b.hi = Eigen::VectorXd(static_cast<int>(hi.size()));
  int i = 0;
  for (double v : lo) b.lo[i++] = v;
  i = 0;
  for (double v : hi) b.hi[i++] = v;
  require(b.lo.size() == b.hi.size(), "box bounds must have equal length");
  for (int j = 0; j < b.lo.size(); ++j)
    require(b.lo[j] <= b.hi[j], "box lower bound exceeds upper bound");
  return b;
}

/// splitmix64 round; used to derive independent seed streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic RNG wrapper. Draws map raw mt19937_64 output to doubles
/// directly so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    require(n > 0, "uniform_int needs n > 0");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  Eigen::VectorXd uniform_vec(const Box& box) {
    Eigen::VectorXd v(box.dim());
    for (int i = 0; i < v.size(); ++i) v[i] = uniform(box.lo[i], box.hi[i]);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

inline void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    int j = rng.uniform_int(i + 1);
    std::swap(idx[i], idx[j]);
  }
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  require(n >= 1, "linspace needs n >= 1");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return v;
}

/// FNV-1a over a byte string; used for artifact provenance hashes.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_u64(std::uint64_t v);

/// Runs fn(i) for i in [0, n) on `workers` threads. Results must be
/// written to per-index slots; scheduling never affects outputs.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace ampc

#endif  // AMPC_COMMON_HPP
