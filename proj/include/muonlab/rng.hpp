// Copyright 2026 The muon-lab Authors.
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

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace muonlab {

// Mixes a 64-bit value; used for seed derivation only.
std::uint64_t splitmix64(std::uint64_t x);

// Hashes an ordered list of words into one seed. Order matters.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based generator. The key is the seed; the counter holds the stream
// id and a draw index, so a draw depends only on (seed, stream, index) and
// sequences are identical on every platform and thread count.
//
// Every draw (u64, uniform, normal) consumes exactly one Philox block.
// fill_normal(out) writes the same values as out.size() calls to normal().
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t position() const { return counter_; }

  // Independent generator keyed by (seed, stream, id).
  Rng substream(std::uint64_t id) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  double normal();
  bool bernoulli(double p);
  // Gamma(shape, 1), shape > 0.
  double gamma(double shape);
  double chi_squared(double df);
  // Student-t with df > 0 degrees of freedom.
  double student_t(double df);

  void fill_normal(std::span<double> out);

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t index) const;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace muonlab
