#include "ltlac/rabin.hpp"

#include <fmt/format.h>

#include "text_util.hpp"

namespace ltlac {

RabinAutomaton::RabinAutomaton(std::size_t num_states, StateId initial,
                               std::vector<std::string> props, std::vector<StateId> delta,
                               std::vector<RabinPair> pairs)
    : num_states_(num_states),
      initial_(initial),
      props_(std::move(props)),
      delta_(std::move(delta)),
      pairs_(std::move(pairs)) {
  if (num_states_ == 0) throw ModelError("automaton has no states");
  if (props_.size() > kMaxPropositions) {
    throw ModelError(fmt::format("at most {} propositions supported", kMaxPropositions));
  }
  if (initial_ >= num_states_) throw ModelError("automaton initial state out of range");
  if (delta_.size() != num_states_ * alphabet_size()) {
    throw ModelError("automaton transition table has the wrong size");
  }
  for (std::size_t i = 0; i < delta_.size(); ++i) {
    if (delta_[i] >= num_states_) {
      throw ModelError(fmt::format("automaton state {} letter {}: target {} invalid",
                                   i / alphabet_size(), i % alphabet_size(), delta_[i]));
    }
  }
  if (pairs_.empty()) throw ModelError("automaton has no accepting pair");
  for (const auto& p : pairs_) {
    if (p.avoid.size() != num_states_ || p.recur.size() != num_states_) {
      throw ModelError("accepting pair size does not match the state count");
    }
  }
}

namespace {

std::vector<char> parse_state_set(std::string_view tok, std::string_view prefix, std::size_t n,
                                  int line) {
  if (tok.substr(0, prefix.size()) != prefix) {
    throw ParseError(line, fmt::format("expected '{}{{...}}', got '{}'", prefix, tok));
  }
  std::vector<char> set(n, 0);
  for (const auto& item : detail::parse_brace_set(tok.substr(prefix.size()), line)) {
    auto s = detail::parse_number<StateId>(item, line, "state id");
    if (s >= n) throw ParseError(line, fmt::format("state {} out of range", s));
    set[s] = 1;
  }
  return set;
}

}  // namespace

RabinAutomaton parse_dra(std::string_view text) {
  using detail::parse_number;
  std::size_t n = 0;
  StateId initial = 0;
  bool have_initial = false;
  bool have_props = false;
  std::vector<std::string> props;
  std::vector<StateId> delta;
  std::vector<StateId> fallback;
  std::vector<RabinPair> pairs;
  std::size_t letters = 1;

  auto state_arg = [&](std::string_view tok, int line) {
    if (n == 0) throw ParseError(line, "'states' must precede state references");
    auto s = parse_number<StateId>(tok, line, "state id");
    if (s >= n) throw ParseError(line, fmt::format("state {} out of range (states {})", s, n));
    return s;
  };

  for (const auto& [line, content] : detail::logical_lines(text)) {
    auto toks = detail::split_ws(content);
    const auto key = toks[0];
    if (key == "states") {
      if (toks.size() != 2) throw ParseError(line, "usage: states N");
      if (n != 0) throw ParseError(line, "duplicate 'states' line");
      n = parse_number<std::size_t>(toks[1], line, "state count");
      if (n == 0) throw ParseError(line, "state count must be positive");
    } else if (key == "initial") {
      if (toks.size() != 2) throw ParseError(line, "usage: initial s0");
      initial = state_arg(toks[1], line);
      have_initial = true;
    } else if (key == "props") {
      if (have_props) throw ParseError(line, "duplicate 'props' line");
      if (n == 0) throw ParseError(line, "'states' must precede 'props'");
      for (std::size_t i = 1; i < toks.size(); ++i) props.emplace_back(toks[i]);
      if (props.size() > kMaxPropositions) {
        throw ParseError(line, fmt::format("at most {} propositions supported", kMaxPropositions));
      }
      letters = std::size_t{1} << props.size();
      delta.assign(n * letters, kNoState);
      fallback.assign(n, kNoState);
      have_props = true;
    } else if (key == "edge") {
      if (!have_props) throw ParseError(line, "'props' must precede edges");
      // edge s {a,b} t  -- the letter may contain spaces after commas
      auto first_space = content.find_first_of(" \t");
      auto rest = detail::trim(content.substr(first_space));
      auto src_end = rest.find_first_of(" \t");
      if (src_end == std::string_view::npos) throw ParseError(line, "usage: edge s {p,...} t");
      const StateId s = state_arg(rest.substr(0, src_end), line);
      rest = detail::trim(rest.substr(src_end));
      auto dst_begin = rest.find_last_of(" \t");
      if (dst_begin == std::string_view::npos) throw ParseError(line, "usage: edge s {p,...} t");
      const StateId t = state_arg(rest.substr(dst_begin + 1), line);
      auto letter_tok = detail::trim(rest.substr(0, dst_begin));
      if (letter_tok == "else") {
        if (fallback[s] != kNoState) throw ParseError(line, fmt::format("state {} has two defaults", s));
        fallback[s] = t;
        continue;
      }
      auto names = detail::parse_brace_set(letter_tok, line);
      Letter l = 0;
      try {
        l = letter_from_names(names, props);
      } catch (const ModelError& e) {
        throw ParseError(line, e.what());
      }
      auto& slot = delta[s * letters + l];
      if (slot != kNoState) {
        throw ParseError(line, fmt::format("duplicate edge for state {} letter {}", s, letter_tok));
      }
      slot = t;
    } else if (key == "pair") {
      if (n == 0) throw ParseError(line, "'states' must precede pairs");
      if (toks.size() != 3) throw ParseError(line, "usage: pair L={...} K={...}");
      pairs.push_back({parse_state_set(toks[1], "L=", n, line), parse_state_set(toks[2], "K=", n, line)});
    } else {
      throw ParseError(line, fmt::format("unknown directive '{}'", key));
    }
  }
  if (n == 0) throw ParseError(0, "missing 'states' line");
  if (!have_initial) throw ParseError(0, "missing 'initial' line");
  if (!have_props) {
    letters = 1;
    delta.assign(n, kNoState);
    fallback.assign(n, kNoState);
  }
  if (pairs.empty()) throw ModelError("automaton declares no accepting pair");
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t l = 0; l < letters; ++l) {
      auto& slot = delta[s * letters + l];
      if (slot != kNoState) continue;
      if (fallback[s] == kNoState) {
        throw ModelError(fmt::format("automaton is not total: state {} has no edge for letter {}",
                                     s, letter_to_string(static_cast<Letter>(l), props)));
      }
      slot = fallback[s];
    }
  }
  return RabinAutomaton(n, initial, std::move(props), std::move(delta), std::move(pairs));
}

}  // namespace ltlac
