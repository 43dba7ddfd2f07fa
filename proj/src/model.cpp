#include "ltlac/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "text_util.hpp"

namespace ltlac {

namespace detail {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<Line> logical_lines(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    auto line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) out.push_back({number, line});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> parse_brace_set(std::string_view tok, int line) {
  tok = trim(tok);
  if (tok.size() < 2 || tok.front() != '{' || tok.back() != '}') {
    throw ParseError(line, fmt::format("expected '{{...}}' set, got '{}'", tok));
  }
  std::vector<std::string> out;
  auto body = tok.substr(1, tok.size() - 2);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto comma = body.find(',', pos);
    if (comma == std::string_view::npos) comma = body.size();
    auto item = trim(body.substr(pos, comma - pos));
    if (!item.empty()) {
      out.emplace_back(item);
    } else if (comma != body.size() || !out.empty()) {
      throw ParseError(line, fmt::format("empty element in set '{}'", tok));
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

ParseError::ParseError(int line, const std::string& what)
    : Error(fmt::format("line {}: {}", line, what)), line_(line) {}

Letter letter_from_names(std::span<const std::string> names,
                         std::span<const std::string> propositions) {
  Letter l = 0;
  for (const auto& n : names) {
    auto it = std::find(propositions.begin(), propositions.end(), n);
    if (it == propositions.end()) throw ModelError(fmt::format("unknown proposition '{}'", n));
    l |= Letter{1} << static_cast<unsigned>(it - propositions.begin());
  }
  return l;
}

std::string letter_to_string(Letter l, std::span<const std::string> propositions) {
  std::string out;
  for (std::size_t i = 0; i < propositions.size(); ++i) {
    if (l & (Letter{1} << i)) {
      if (!out.empty()) out += ',';
      out += propositions[i];
    }
  }
  return "{" + out + "}";
}

LabeledModel::LabeledModel(ModelData data) : d_(std::move(data)) {
  const std::size_t n = d_.labels.size();
  if (n == 0) throw ModelError("model has no states");
  if (d_.choices.size() != n) throw ModelError("label and transition tables disagree on state count");
  if (d_.initial >= n) throw ModelError(fmt::format("initial state {} out of range", d_.initial));
  if (d_.propositions.size() > kMaxPropositions) {
    throw ModelError(fmt::format("at most {} propositions supported", kMaxPropositions));
  }
  const Letter all = d_.propositions.size() == 32 ? ~Letter{0}
                                                  : (Letter{1} << d_.propositions.size()) - 1;
  for (std::size_t s = 0; s < n; ++s) {
    if (d_.labels[s] & ~all) throw ModelError(fmt::format("state {} label uses unknown bits", s));
    auto& cs = d_.choices[s];
    if (cs.empty()) throw ModelError(fmt::format("state {} has no enabled action", s));
    for (std::size_t i = 0; i < cs.size(); ++i) {
      auto& c = cs[i];
      if (c.action >= d_.actions.size()) {
        throw ModelError(fmt::format("state {} uses undeclared action id {}", s, c.action));
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (cs[j].action == c.action) {
          throw ModelError(fmt::format("state {} lists action '{}' twice", s, d_.actions[c.action]));
        }
      }
      std::erase_if(c.edges, [](const Edge& e) { return e.weight == 0.0; });
      std::sort(c.edges.begin(), c.edges.end(),
                [](const Edge& a, const Edge& b) { return a.target < b.target; });
      double sum = 0.0;
      for (std::size_t k = 0; k < c.edges.size(); ++k) {
        const auto& e = c.edges[k];
        if (e.target >= n) {
          throw ModelError(fmt::format("state {} action '{}': successor {} does not exist", s,
                                       d_.actions[c.action], e.target));
        }
        if (k > 0 && c.edges[k - 1].target == e.target) {
          throw ModelError(fmt::format("state {} action '{}': successor {} listed twice", s,
                                       d_.actions[c.action], e.target));
        }
        if (d_.mode == ModelMode::Nts && e.weight != 1.0) {
          throw ModelError(fmt::format("state {} action '{}': NTS weight must be 0 or 1, got {}", s,
                                       d_.actions[c.action], e.weight));
        }
        if (!(e.weight > 0.0 && e.weight <= 1.0)) {
          throw ModelError(fmt::format("state {} action '{}': probability {} outside [0,1]", s,
                                       d_.actions[c.action], e.weight));
        }
        sum += e.weight;
      }
      if (c.edges.empty()) {
        throw ModelError(
            fmt::format("state {} action '{}': no successors", s, d_.actions[c.action]));
      }
      if (d_.mode == ModelMode::Mdp && std::abs(sum - 1.0) > kStochasticTolerance) {
        throw ModelError(fmt::format("state {} action '{}': outgoing probabilities sum to {}", s,
                                     d_.actions[c.action], sum));
      }
    }
  }
}

const Choice* LabeledModel::find_choice(StateId s, ActionId a) const {
  for (const auto& c : d_.choices[s]) {
    if (c.action == a) return &c;
  }
  return nullptr;
}

std::vector<ActionId> LabeledModel::enabled(StateId s) const {
  std::vector<ActionId> out;
  out.reserve(d_.choices[s].size());
  for (const auto& c : d_.choices[s]) out.push_back(c.action);
  return out;
}

std::size_t LabeledModel::num_choices() const {
  std::size_t n = 0;
  for (const auto& cs : d_.choices) n += cs.size();
  return n;
}

std::optional<ActionId> LabeledModel::find_action(std::string_view name) const {
  auto it = std::find(d_.actions.begin(), d_.actions.end(), name);
  if (it == d_.actions.end()) return std::nullopt;
  return static_cast<ActionId>(it - d_.actions.begin());
}

std::string LabeledModel::label_string(StateId s) const {
  return letter_to_string(d_.labels[s], d_.propositions);
}

bool LabeledModel::operator==(const LabeledModel& o) const {
  return d_.mode == o.d_.mode && d_.initial == o.d_.initial && d_.actions == o.d_.actions &&
         d_.propositions == o.d_.propositions && d_.labels == o.d_.labels &&
         d_.choices == o.d_.choices;
}

LabeledModel nts_from_mdp(const LabeledModel& m) {
  ModelData d = m.data();
  d.mode = ModelMode::Nts;
  for (auto& cs : d.choices) {
    for (auto& c : cs) {
      for (auto& e : c.edges) e.weight = e.weight > 0.0 ? 1.0 : 0.0;
    }
  }
  return LabeledModel(std::move(d));
}

LabeledModel parse_model(std::string_view text) {
  using detail::parse_number;
  ModelData d;
  std::size_t n = 0;
  bool have_states = false;
  bool have_initial = false;
  bool have_props = false;
  std::map<std::pair<StateId, ActionId>, std::size_t> choice_index;

  auto state_arg = [&](std::string_view tok, int line) {
    if (!have_states) throw ParseError(line, "'states' must precede state references");
    auto s = parse_number<StateId>(tok, line, "state id");
    if (s >= n) throw ParseError(line, fmt::format("state {} out of range (states {})", s, n));
    return s;
  };
  auto intern_action = [&](std::string_view name) {
    auto it = std::find(d.actions.begin(), d.actions.end(), name);
    if (it != d.actions.end()) return static_cast<ActionId>(it - d.actions.begin());
    d.actions.emplace_back(name);
    return static_cast<ActionId>(d.actions.size() - 1);
  };

  for (const auto& [line, content] : detail::logical_lines(text)) {
    auto toks = detail::split_ws(content);
    const auto key = toks[0];
    if (key == "states") {
      if (toks.size() != 2) throw ParseError(line, "usage: states N");
      if (have_states) throw ParseError(line, "duplicate 'states' line");
      n = parse_number<std::size_t>(toks[1], line, "state count");
      if (n == 0) throw ParseError(line, "state count must be positive");
      d.labels.assign(n, 0);
      d.choices.assign(n, {});
      have_states = true;
    } else if (key == "initial") {
      if (toks.size() != 2) throw ParseError(line, "usage: initial q0");
      d.initial = state_arg(toks[1], line);
      have_initial = true;
    } else if (key == "mode") {
      if (toks.size() != 2) throw ParseError(line, "usage: mode mdp|nts");
      if (toks[1] == "mdp") {
        d.mode = ModelMode::Mdp;
      } else if (toks[1] == "nts") {
        d.mode = ModelMode::Nts;
      } else {
        throw ParseError(line, fmt::format("unknown mode '{}'", toks[1]));
      }
    } else if (key == "props") {
      if (have_props) throw ParseError(line, "duplicate 'props' line");
      for (std::size_t i = 1; i < toks.size(); ++i) d.propositions.emplace_back(toks[i]);
      if (d.propositions.size() > kMaxPropositions) {
        throw ParseError(line, fmt::format("at most {} propositions supported", kMaxPropositions));
      }
      have_props = true;
    } else if (key == "actions") {
      if (!d.actions.empty()) throw ParseError(line, "'actions' must precede transitions");
      for (std::size_t i = 1; i < toks.size(); ++i) intern_action(toks[i]);
    } else if (key == "label") {
      // label q: p1 p2
      auto colon = content.find(':');
      if (colon == std::string_view::npos) throw ParseError(line, "usage: label q: p1 p2 ...");
      auto head = detail::split_ws(content.substr(0, colon));
      if (head.size() != 2) throw ParseError(line, "usage: label q: p1 p2 ...");
      const StateId s = state_arg(head[1], line);
      std::vector<std::string> names;
      for (auto t : detail::split_ws(content.substr(colon + 1))) names.emplace_back(t);
      try {
        d.labels[s] |= letter_from_names(names, d.propositions);
      } catch (const ModelError& e) {
        throw ParseError(line, e.what());
      }
    } else if (key == "trans") {
      if (toks.size() != 5) throw ParseError(line, "usage: trans q u q' w");
      const StateId s = state_arg(toks[1], line);
      const ActionId a = intern_action(toks[2]);
      const StateId t = state_arg(toks[3], line);
      const double w = parse_number<double>(toks[4], line, "weight");
      auto [it, inserted] = choice_index.try_emplace({s, a}, d.choices[s].size());
      if (inserted) d.choices[s].push_back(Choice{a, {}});
      auto& edges = d.choices[s][it->second].edges;
      for (const auto& e : edges) {
        if (e.target == t) throw ParseError(line, fmt::format("duplicate transition {} {} {}", s, toks[2], t));
      }
      edges.push_back({t, w});
    } else {
      throw ParseError(line, fmt::format("unknown directive '{}'", key));
    }
  }
  if (!have_states) throw ParseError(0, "missing 'states' line");
  if (!have_initial) throw ParseError(0, "missing 'initial' line");
  return LabeledModel(std::move(d));
}

std::string serialize_model(const LabeledModel& m) {
  std::string out;
  out += fmt::format("states {}\n", m.num_states());
  out += fmt::format("initial {}\n", m.initial());
  out += fmt::format("mode {}\n", m.is_nts() ? "nts" : "mdp");
  out += "props";
  for (const auto& p : m.propositions()) out += " " + p;
  out += "\nactions";
  for (const auto& a : m.action_names()) out += " " + a;
  out += "\n";
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (m.label(s) == 0) continue;
    out += fmt::format("label {}:", s);
    for (std::size_t i = 0; i < m.propositions().size(); ++i) {
      if (m.label(s) & (Letter{1} << i)) out += " " + m.propositions()[i];
    }
    out += "\n";
  }
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const auto& c : m.choices(s)) {
      for (const auto& e : c.edges) {
        out += fmt::format("trans {} {} {} {:.17g}\n", s, m.action_name(c.action), e.target, e.weight);
      }
    }
  }
  return out;
}

StationaryPolicy::StationaryPolicy(PolicyKind kind, std::vector<std::vector<ActionProb>> table)
    : kind_(kind), table_(std::move(table)) {}

StationaryPolicy StationaryPolicy::deterministic(std::vector<ActionId> actions) {
  std::vector<std::vector<ActionProb>> table(actions.size());
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] != kNoState) table[s].push_back({actions[s], 1.0});
  }
  return StationaryPolicy(PolicyKind::Deterministic, std::move(table));
}

double StationaryPolicy::prob(StateId s, ActionId a) const {
  for (const auto& ap : table_[s]) {
    if (ap.action == a) return ap.prob;
  }
  return 0.0;
}

void StationaryPolicy::validate(const LabeledModel& m) const {
  if (table_.size() != m.num_states()) {
    throw ModelError(fmt::format("policy covers {} states, model has {}", table_.size(), m.num_states()));
  }
  for (StateId s = 0; s < table_.size(); ++s) {
    if (table_[s].empty()) continue;
    double sum = 0.0;
    for (const auto& ap : table_[s]) {
      if (!m.is_enabled(s, ap.action)) {
        throw ModelError(fmt::format("policy uses disabled action {} at state {}", ap.action, s));
      }
      if (ap.prob < 0.0) throw ModelError(fmt::format("negative probability at state {}", s));
      sum += ap.prob;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ModelError(fmt::format("policy distribution at state {} sums to {}", s, sum));
    }
    if (kind_ == PolicyKind::Deterministic && table_[s].size() != 1) {
      throw ModelError(fmt::format("deterministic policy has {} actions at state {}",
                                   table_[s].size(), s));
    }
  }
}

}  // namespace ltlac
