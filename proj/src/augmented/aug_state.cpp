#include "sdmdp/augmented/aug_state.hpp"

#include "sdmdp/core/errors.hpp"

namespace sdmdp {

ActionQueue ActionQueue::from(std::span<const int> actions, int num_actions) {
  ActionQueue q(num_actions);
  for (int a : actions) {
    if (a < 0 || a >= num_actions) throw ValidationError("queued action out of range");
    q = q.pushed(a);
  }
  return q;
}

int ActionQueue::operator[](int i) const noexcept {
  std::uint64_t c = code_;
  for (int k = 0; k < i; ++k) c /= base_;
  return static_cast<int>(c % base_);
}

std::vector<int> ActionQueue::to_vector() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(len_));
  std::uint64_t c = code_;
  for (int k = 0; k < len_; ++k) {
    out.push_back(static_cast<int>(c % base_));
    c /= base_;
  }
  return out;
}

std::string to_string(const AugState& st) {
  std::string q;
  for (int a : st.queue.to_vector()) {
    if (!q.empty()) q += ',';
    q += std::to_string(a);
  }
  const std::string tag = st.tag == kTranTag ? "tran" : std::to_string(st.tag);
  return "(s=" + std::to_string(st.s) + ", a=(" + q + "), " + tag + ", h=" + std::to_string(st.h) + ")";
}

AugIndexer::AugIndexer(int num_states, int num_actions, int horizon, int d_max, int delta_max)
    : num_states_(static_cast<std::uint64_t>(num_states)),
      num_actions_(num_actions),
      delta_max_(delta_max),
      tag_count_(static_cast<std::uint64_t>(delta_max + 3)) {
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 60;
  std::uint64_t power = 1;
  for (int len = 0; len <= d_max + 1; ++len) {
    queue_offset_.push_back(queue_count_);
    queue_count_ += power;
    if (len <= d_max && power > kLimit / static_cast<std::uint64_t>(num_actions)) {
      throw ResourceError("augmented key space overflows 64 bits", 0);
    }
    power *= static_cast<std::uint64_t>(num_actions);
  }
  const long double total = static_cast<long double>(horizon + 1) * queue_count_ * tag_count_ * num_states_;
  if (total > static_cast<long double>(kLimit)) {
    throw ResourceError("augmented key space overflows 64 bits", 0);
  }
  size_ = static_cast<std::uint64_t>(horizon + 1) * queue_count_ * tag_count_ * num_states_;
}

AugState AugIndexer::decode(std::uint64_t key) const {
  AugState st;
  st.s = static_cast<int>(key % num_states_);
  key /= num_states_;
  const auto tag = key % tag_count_;
  key /= tag_count_;
  st.tag = tag == static_cast<std::uint64_t>(delta_max_ + 2) ? kTranTag : static_cast<int>(tag) - 1;
  std::uint64_t q = key % queue_count_;
  st.h = static_cast<int>(key / queue_count_) + 1;
  int len = 0;
  while (len + 1 < static_cast<int>(queue_offset_.size()) &&
         queue_offset_[static_cast<std::size_t>(len + 1)] <= q) {
    ++len;
  }
  q -= queue_offset_[static_cast<std::size_t>(len)];
  ActionQueue queue(num_actions_);
  for (int i = 0; i < len; ++i) {
    queue = queue.pushed(static_cast<int>(q % static_cast<std::uint64_t>(num_actions_)));
    q /= static_cast<std::uint64_t>(num_actions_);
  }
  st.queue = queue;
  return st;
}

}  // namespace sdmdp
