#pragma once

#include <absl/container/flat_hash_map.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sdmdp {

/// Pending actions a_{t_h}, ..., a_{h-1}, packed base-A with the oldest
/// action in the lowest digit.
class ActionQueue {
 public:
  ActionQueue() = default;
  explicit ActionQueue(int num_actions) : base_(static_cast<std::uint64_t>(num_actions)) {}
  static ActionQueue from(std::span<const int> actions, int num_actions);

  int size() const noexcept { return len_; }
  bool empty() const noexcept { return len_ == 0; }
  int base() const noexcept { return static_cast<int>(base_); }
  std::uint64_t code() const noexcept { return code_; }

  int front() const noexcept { return static_cast<int>(code_ % base_); }
  int operator[](int i) const noexcept;
  ActionQueue pushed(int action) const noexcept {
    ActionQueue q = *this;
    q.code_ += static_cast<std::uint64_t>(action) * top_;
    q.top_ *= base_;
    ++q.len_;
    return q;
  }
  ActionQueue popped() const noexcept {
    ActionQueue q = *this;
    q.code_ /= base_;
    q.top_ /= base_;
    --q.len_;
    return q;
  }
  std::vector<int> to_vector() const;

  friend bool operator==(const ActionQueue& a, const ActionQueue& b) noexcept {
    return a.code_ == b.code_ && a.len_ == b.len_;
  }

 private:
  std::uint64_t base_ = 2;
  std::uint64_t code_ = 0;
  std::uint64_t top_ = 1;  // base^len
  int len_ = 0;
};

/// Tag value for the "tran" symbol; other tags are delta-tilde in [-1, delta_max].
inline constexpr int kTranTag = -2;

/// (last observed state, pending queue, tag, step). tag >= 0 marks a
/// decision state; tran and -1 are intermediate states inside one step.
struct AugState {
  int s = 0;
  ActionQueue queue;
  int tag = 0;
  int h = 1;

  bool is_tran() const noexcept { return tag == kTranTag; }
  bool is_decision() const noexcept { return tag >= 0; }
  /// 1: decision, 2: tran, 3: tag -1.
  int category() const noexcept { return tag >= 0 ? 1 : (tag == kTranTag ? 2 : 3); }

  friend bool operator==(const AugState& a, const AugState& b) noexcept {
    return a.s == b.s && a.queue == b.queue && a.tag == b.tag && a.h == b.h;
  }
};

std::string to_string(const AugState& st);

/// Dense index of augmented states: ((((h-1)*Qn + q)*T + tag)*S + s) with
/// Qn = sum_{L=0}^{D_max+1} A^L and T = delta_max + 3.
class AugIndexer {
 public:
  AugIndexer(int num_states, int num_actions, int horizon, int d_max, int delta_max);

  std::uint64_t key(const AugState& st) const noexcept {
    const std::uint64_t q = queue_offset_[static_cast<std::size_t>(st.queue.size())] + st.queue.code();
    const std::uint64_t tag = st.tag == kTranTag ? static_cast<std::uint64_t>(delta_max_ + 2)
                                                 : static_cast<std::uint64_t>(st.tag + 1);
    return (((static_cast<std::uint64_t>(st.h - 1) * queue_count_ + q) * tag_count_ + tag) *
                num_states_ +
            static_cast<std::uint64_t>(st.s));
  }
  AugState decode(std::uint64_t key) const;
  /// Number of possible keys, (H+1) * Qn * T * S.
  std::uint64_t size() const noexcept { return size_; }
  int num_actions() const noexcept { return num_actions_; }

 private:
  std::uint64_t num_states_;
  int num_actions_;
  int delta_max_;
  std::uint64_t queue_count_ = 0;
  std::uint64_t tag_count_;
  std::uint64_t size_ = 0;
  std::vector<std::uint64_t> queue_offset_;
};

/// Memo table over augmented-state keys: a flat array when the key space is
/// small, a hash map otherwise.
template <class V>
class AugMemo {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 20;

  explicit AugMemo(std::uint64_t key_space) {
    if (key_space <= kDenseLimit) {
      dense_.resize(key_space);
      filled_.assign(key_space, false);
    }
  }

  const V* find(std::uint64_t key) const {
    if (!filled_.empty()) return filled_[key] ? &dense_[key] : nullptr;
    auto it = sparse_.find(key);
    return it == sparse_.end() ? nullptr : &it->second;
  }
  V& insert(std::uint64_t key, V value) {
    ++size_;
    if (!filled_.empty()) {
      filled_[key] = true;
      return dense_[key] = std::move(value);
    }
    return sparse_.insert_or_assign(key, std::move(value)).first->second;
  }
  std::size_t size() const noexcept { return size_; }

  template <class F>
  void for_each(F&& f) const {
    if (!filled_.empty()) {
      for (std::size_t k = 0; k < dense_.size(); ++k) {
        if (filled_[k]) f(static_cast<std::uint64_t>(k), dense_[k]);
      }
    } else {
      for (const auto& [k, v] : sparse_) f(k, v);
    }
  }

 private:
  std::vector<V> dense_;
  std::vector<bool> filled_;
  absl::flat_hash_map<std::uint64_t, V> sparse_;
  std::size_t size_ = 0;
};

}  // namespace sdmdp
