#ifndef CTBN_STATE_SPACE_HPP_
#define CTBN_STATE_SPACE_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctbn {

// A joint state is one local state index per component.
using JointState = std::vector<int>;
using StateIndex = std::int64_t;

// Mixed-radix enumeration of a product space.  The first component is the
// most significant digit, the last component varies fastest, so states are
// listed in lexicographic order of their index vectors.
class StateSpace {
 public:
  StateSpace() = default;

  explicit StateSpace(std::vector<int> cardinalities)
      : card_(std::move(cardinalities)) {
    for (int c : card_) {
      if (c < 1) {
        throw std::invalid_argument("StateSpace: cardinality must be >= 1, got " +
                                    std::to_string(c));
      }
      if (size_ > kMaxStates / c) {
        throw std::overflow_error("StateSpace: product of cardinalities overflows");
      }
      size_ *= c;
    }
  }

  int component_count() const { return static_cast<int>(card_.size()); }
  int cardinality(int pos) const { return card_[pos]; }
  const std::vector<int>& cardinalities() const { return card_; }

  // Number of joint states.  The empty product space has exactly one state,
  // the empty tuple; this is what makes parentless components uniform with
  // the rest.
  StateIndex size() const { return size_; }

  // Stride of component `pos` in the flat enumeration: flipping that
  // coordinate by +1 moves the index by +stride.
  StateIndex stride(int pos) const {
    StateIndex s = 1;
    for (int k = component_count() - 1; k > pos; --k) s *= card_[k];
    return s;
  }

  StateIndex encode(std::span<const int> state) const {
    if (static_cast<int>(state.size()) != component_count()) {
      throw std::invalid_argument("StateSpace::encode: state has " +
                                  std::to_string(state.size()) + " entries, expected " +
                                  std::to_string(component_count()));
    }
    StateIndex index = 0;
    for (int k = 0; k < component_count(); ++k) {
      if (state[k] < 0 || state[k] >= card_[k]) {
        throw std::out_of_range("StateSpace::encode: entry " + std::to_string(k) +
                                " = " + std::to_string(state[k]) + " outside [0, " +
                                std::to_string(card_[k]) + ")");
      }
      index = index * card_[k] + state[k];
    }
    return index;
  }

  JointState decode(StateIndex index) const {
    if (index < 0 || index >= size_) {
      throw std::out_of_range("StateSpace::decode: index " + std::to_string(index) +
                              " outside [0, " + std::to_string(size_) + ")");
    }
    JointState state(card_.size());
    for (int k = component_count() - 1; k >= 0; --k) {
      state[k] = static_cast<int>(index % card_[k]);
      index /= card_[k];
    }
    return state;
  }

  bool contains(std::span<const int> state) const {
    if (static_cast<int>(state.size()) != component_count()) return false;
    for (int k = 0; k < component_count(); ++k) {
      if (state[k] < 0 || state[k] >= card_[k]) return false;
    }
    return true;
  }

  // Advances `state` to the next tuple in enumeration order; returns false
  // after the last one.  Cheaper than decode() in a full sweep.
  bool next(JointState& state) const {
    for (int k = component_count() - 1; k >= 0; --k) {
      if (++state[k] < card_[k]) return true;
      state[k] = 0;
    }
    return false;
  }

 private:
  static constexpr StateIndex kMaxStates = StateIndex{1} << 62;

  std::vector<int> card_;
  StateIndex size_ = 1;
};

}  // namespace ctbn

#endif  // CTBN_STATE_SPACE_HPP_
