// Copyright 2026 The fmqa Authors
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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmqa {

/// Raised for every contract violation in the library (bad dimensions,
/// malformed input, invalid configuration).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary vector with entries in {0,1}; index 0 is the most significant bit
/// when the vector encodes an integer.
using BitVector = std::vector<std::uint8_t>;

/// Ising spin vector with entries in {-1,+1}.
using SpinVector = std::vector<std::int8_t>;

/// Packed basis state of up to 64 variables. Bit (n-1-i) holds x_i, so the
/// integer value equals the big-endian reading of the bit vector.
using StateCode = std::uint64_t;

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

/// Smallest n with 2^n >= count. ceil_log2(1) == 0.
inline int ceil_log2(std::uint64_t count) {
  require(count >= 1, "ceil_log2: count must be >= 1");
  int bits = 0;
  while (bits < 64 && (std::uint64_t{1} << bits) < count) ++bits;
  return bits;
}

/// Width used for an ID codebook with `count` entries. Never below one bit so
/// every QUBO has at least one variable.
inline int code_width(std::uint64_t count) {
  const int bits = ceil_log2(count);
  return bits == 0 ? 1 : bits;
}

/// Big-endian binary expansion of `index` into `n_bits` entries.
inline BitVector encode_index(std::uint64_t index, int n_bits) {
  require(n_bits >= 0 && n_bits <= 64, "encode_index: n_bits must be in [0, 64]");
  require(n_bits == 64 || index < (std::uint64_t{1} << n_bits),
          "encode_index: index " + std::to_string(index) + " out of range for " +
              std::to_string(n_bits) + " bits");
  BitVector bits(static_cast<std::size_t>(n_bits), 0);
  for (int i = 0; i < n_bits; ++i) {
    bits[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((index >> (n_bits - 1 - i)) & 1U);
  }
  return bits;
}

inline std::uint64_t decode_index(const BitVector& bits) {
  require(bits.size() <= 64, "decode_index: more than 64 bits");
  std::uint64_t value = 0;
  for (const auto b : bits) {
    require(b <= 1, "decode_index: entry is not binary");
    value = (value << 1) | b;
  }
  return value;
}

inline BitVector state_to_bits(StateCode code, int n) {
  return encode_index(n == 64 ? code : (code & ((std::uint64_t{1} << n) - 1)), n);
}

inline SpinVector state_to_spins(StateCode code, int n) {
  SpinVector s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    s[static_cast<std::size_t>(i)] = ((code >> (n - 1 - i)) & 1U) ? 1 : -1;
  }
  return s;
}

inline StateCode spins_to_state(const SpinVector& spins) {
  require(spins.size() <= 64, "spins_to_state: more than 64 spins");
  StateCode code = 0;
  for (const auto s : spins) {
    require(s == 1 || s == -1, "spins_to_state: entry is not a spin");
    code = (code << 1) | (s == 1 ? 1U : 0U);
  }
  return code;
}

inline BitVector spins_to_bits(const SpinVector& spins) {
  BitVector x(spins.size());
  for (std::size_t i = 0; i < spins.size(); ++i) {
    require(spins[i] == 1 || spins[i] == -1, "spins_to_bits: entry is not a spin");
    x[i] = spins[i] == 1 ? 1 : 0;
  }
  return x;
}

inline BitVector concat(const BitVector& head, const BitVector& tail) {
  BitVector out;
  out.reserve(head.size() + tail.size());
  out.insert(out.end(), head.begin(), head.end());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

}  // namespace fmqa
