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

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fmqa/bits.hpp"
#include "fmqa/dataset.hpp"

namespace fmqa {

/// Injective map from users to bitstrings: user index i has code i.
class UserCodebook {
 public:
  UserCodebook() = default;

  explicit UserCodebook(std::vector<RawId> user_ids)
      : user_ids_(std::move(user_ids)) {
    require(!user_ids_.empty(), "user codebook: no users");
    require(std::is_sorted(user_ids_.begin(), user_ids_.end()) &&
                std::adjacent_find(user_ids_.begin(), user_ids_.end()) == user_ids_.end(),
            "user codebook: ids must be strictly ascending");
    n_bits_ = code_width(user_ids_.size());
  }

  int n_bits() const { return n_bits_; }
  std::size_t size() const { return user_ids_.size(); }
  const std::vector<RawId>& user_ids() const { return user_ids_; }

  RawId raw_id(std::uint32_t index) const {
    require(index < user_ids_.size(), "user codebook: index out of range");
    return user_ids_[index];
  }

  std::optional<std::uint32_t> find(RawId id) const {
    const auto it = std::lower_bound(user_ids_.begin(), user_ids_.end(), id);
    if (it == user_ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - user_ids_.begin());
  }

  BitVector encode(std::uint32_t index) const {
    require(index < user_ids_.size(), "user codebook: index out of range");
    return encode_index(index, n_bits_);
  }

  std::uint32_t decode(const BitVector& code) const {
    require(static_cast<int>(code.size()) == n_bits_, "user codebook: code length mismatch");
    const auto value = decode_index(code);
    require(value < user_ids_.size(), "user codebook: code does not name a user");
    return static_cast<std::uint32_t>(value);
  }

  friend bool operator==(const UserCodebook&, const UserCodebook&) = default;

 private:
  std::vector<RawId> user_ids_;
  int n_bits_ = 0;
};

/// Total map from every n_bits-wide code onto an item.
///
/// Items are ranked by descending mean training rating (ties: ascending raw
/// id). The item at rank r owns primary code r; the surplus codes
/// N_m .. 2^n_bits - 1 go to ranks 0 .. surplus - 1, so the best-rated items
/// are the ones reachable through two codes.
class ItemCodebook {
 public:
  ItemCodebook() = default;

  /// Rebuilds a codebook from its serialized payload.
  ItemCodebook(std::vector<RawId> item_ids, std::vector<std::uint32_t> rank)
      : item_ids_(std::move(item_ids)), rank_(std::move(rank)) {
    require(!item_ids_.empty(), "item codebook: no items");
    require(rank_.size() == item_ids_.size(), "item codebook: rank length mismatch");
    n_bits_ = code_width(item_ids_.size());
    require(n_bits_ <= 32, "item codebook: more than 2^32 items");
    position_.assign(item_ids_.size(), UINT32_MAX);
    for (std::uint32_t r = 0; r < rank_.size(); ++r) {
      require(rank_[r] < item_ids_.size() && position_[rank_[r]] == UINT32_MAX,
              "item codebook: rank is not a permutation");
      position_[rank_[r]] = r;
    }
  }

  int n_bits() const { return n_bits_; }
  std::size_t size() const { return item_ids_.size(); }
  std::uint64_t num_codes() const { return std::uint64_t{1} << n_bits_; }
  std::uint64_t surplus() const { return num_codes() - item_ids_.size(); }
  const std::vector<RawId>& item_ids() const { return item_ids_; }
  /// Item indices in rank order (best first).
  const std::vector<std::uint32_t>& rank() const { return rank_; }

  RawId raw_id(std::uint32_t item) const {
    require(item < item_ids_.size(), "item codebook: index out of range");
    return item_ids_[item];
  }

  std::uint32_t rank_of(std::uint32_t item) const {
    require(item < item_ids_.size(), "item codebook: index out of range");
    return position_[item];
  }

  std::uint32_t decode_value(std::uint64_t code) const {
    require(code < num_codes(), "item codebook: code out of range");
    const auto n = item_ids_.size();
    return rank_[code < n ? code : code - n];
  }

  std::uint32_t decode(const BitVector& code) const {
    require(static_cast<int>(code.size()) == n_bits_, "item codebook: code length mismatch");
    return decode_value(decode_index(code));
  }

  /// Codes mapping to `item`, primary first.
  std::vector<std::uint64_t> codes_of(std::uint32_t item) const {
    const std::uint64_t r = rank_of(item);
    std::vector<std::uint64_t> codes{r};
    if (r < surplus()) codes.push_back(r + item_ids_.size());
    return codes;
  }

  BitVector primary_code(std::uint32_t item) const {
    return encode_index(rank_of(item), n_bits_);
  }

  friend bool operator==(const ItemCodebook& a, const ItemCodebook& b) {
    return a.item_ids_ == b.item_ids_ && a.rank_ == b.rank_;
  }

 private:
  std::vector<RawId> item_ids_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::uint32_t> position_;
  int n_bits_ = 0;
};

/// Ranks items by descending mean rating, ties by ascending raw id.
/// `mean_ratings[i]` belongs to `item_ids[i]`; use 0 for unrated items.
inline ItemCodebook build_item_codebook(const std::vector<RawId>& item_ids,
                                        const std::vector<double>& mean_ratings) {
  require(!item_ids.empty(), "item codebook: no items");
  require(mean_ratings.size() == item_ids.size(),
          "item codebook: one mean rating per item required");
  std::vector<std::uint32_t> rank(item_ids.size());
  std::iota(rank.begin(), rank.end(), 0U);
  std::sort(rank.begin(), rank.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (mean_ratings[a] != mean_ratings[b]) return mean_ratings[a] > mean_ratings[b];
    return item_ids[a] < item_ids[b];
  });
  return ItemCodebook(item_ids, std::move(rank));
}

struct Codebooks {
  UserCodebook users;
  ItemCodebook items;

  friend bool operator==(const Codebooks&, const Codebooks&) = default;
};

/// Codebooks for a training set: every user and item known to `data`, items
/// ranked by their mean rating in `data`.
inline Codebooks build_codebooks(const RatingsDataset& data) {
  return {UserCodebook(data.user_ids),
          build_item_codebook(data.item_ids, item_mean_ratings(data))};
}

}  // namespace fmqa
