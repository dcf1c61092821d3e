// Copyright 2026 The tritrain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRITRAIN_RNG_HPP_
#define TRITRAIN_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace tritrain {

/// One step of the splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from a master seed and a path of tags.
///
/// The derivation folds each tag into the state with splitmix64, so
/// derive_seed(s, {a, b}) and derive_seed(s, {a, c}) are unrelated streams and
/// adding new tags never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Seeded random stream.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard. The
/// helpers below avoid the implementation-defined std distributions so that a
/// given seed produces the same draws with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Standard normal draw (Box-Muller, no cached second value).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tritrain

#endif  // TRITRAIN_RNG_HPP_
