#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ltlac/model.hpp"

namespace ltlac {

/// One Rabin pair: a run is accepted by it if it visits `avoid` (L) finitely
/// often and `recur` (K) infinitely often. Stored as membership flags.
struct RabinPair {
  std::vector<char> avoid;
  std::vector<char> recur;

  bool operator==(const RabinPair&) const = default;
};

/// Deterministic Rabin automaton over the alphabet 2^props.
class RabinAutomaton {
 public:
  /// `delta` is indexed [state * 2^|props| + letter] and must be total.
  RabinAutomaton(std::size_t num_states, StateId initial, std::vector<std::string> props,
                 std::vector<StateId> delta, std::vector<RabinPair> pairs);

  std::size_t num_states() const { return num_states_; }
  StateId initial() const { return initial_; }
  const std::vector<std::string>& propositions() const { return props_; }
  std::size_t alphabet_size() const { return std::size_t{1} << props_.size(); }
  const std::vector<RabinPair>& pairs() const { return pairs_; }

  StateId step(StateId s, Letter letter) const {
    return delta_[static_cast<std::size_t>(s) * alphabet_size() + letter];
  }

 private:
  std::size_t num_states_;
  StateId initial_;
  std::vector<std::string> props_;
  std::vector<StateId> delta_;
  std::vector<RabinPair> pairs_;
};

/// Parses the line-oriented automaton format (see README). Per-state
/// `edge s else t` defaults are expanded so the result is total.
RabinAutomaton parse_dra(std::string_view text);

inline StateId dra_step(const RabinAutomaton& r, StateId s, Letter letter) {
  return r.step(s, letter);
}

}  // namespace ltlac
