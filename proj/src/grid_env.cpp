#include "ltlac/grid_env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <mutex>
#include <random>

#include <fmt/format.h>

#include "ltlac/rsp.hpp"
#include "text_util.hpp"

namespace ltlac {

namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

Heading heading_from(std::string_view tok, int line) {
  if (tok == "N") return Heading::North;
  if (tok == "E") return Heading::East;
  if (tok == "S") return Heading::South;
  if (tok == "W") return Heading::West;
  throw ParseError(line, fmt::format("expected heading N/E/S/W, got '{}'", tok));
}

int turn(int h, int quarter_turns) { return (h + quarter_turns) % 4; }

struct RawLine {
  int number;
  std::string_view text;
};

std::vector<RawLine> raw_lines(std::string_view text) {
  std::vector<RawLine> out;
  int n = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back({++n, line});
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::string_view strip_comment(std::string_view s) {
  const auto h = s.find('#');
  return detail::trim(h == std::string_view::npos ? s : s.substr(0, h));
}

// Grid rows never contain blanks, so "# text" is a comment even there.
bool is_comment_line(std::string_view s) {
  return !s.empty() && s.front() == '#' && s.find_first_of(" \t") != std::string_view::npos;
}

bool is_keyword_line(std::string_view s) {
  const auto toks = detail::split_ws(s);
  return !toks.empty() && (toks[0] == "legend" || toks[0] == "start" || toks[0] == "props");
}

// Outcome of a primitive relative to the incoming heading.
enum Rel { kLeft = 0, kStraight = 1, kRight = 2 };

constexpr int kRelTurn[3] = {3, 0, 1};
constexpr ActionId kRelAction[3] = {kGoLeft, kGoStraight, kGoRight};

int rel_of_action(ActionId u) {
  switch (u) {
    case kGoLeft: return kLeft;
    case kGoStraight: return kStraight;
    case kGoRight: return kRight;
    default: return -1;
  }
}

// Heading of a robot that enters intersection `i` from corridor `c`.
int entry_heading(const EnvMap& env, RegionId c, RegionId i) {
  const auto& arms = env.arms(i);
  for (int d = 0; d < 4; ++d) {
    if (arms[d] == c) return turn(d, 2);
  }
  throw ModelError(fmt::format("{} does not touch {}", env.region(c).name, env.region(i).name));
}

std::vector<ActionId> enabled_primitives(const EnvMap& env, const PairState& p) {
  if (env.region(p.current).kind == RegionKind::Corridor) return {kFollowRoad};
  const int h = entry_heading(env, p.previous, p.current);
  std::vector<ActionId> out;
  for (int rel = 0; rel < 3; ++rel) {
    if (env.arms(p.current)[turn(h, kRelTurn[rel])] != kNoRegion) out.push_back(kRelAction[rel]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Closed-form outcome distribution; zero-probability outcomes are omitted.
std::vector<std::pair<PairState, double>> outcome_distribution(const EnvMap& env,
                                                               const NoiseModel& noise,
                                                               const PairState& p, ActionId u) {
  const auto& cur = env.region(p.current);
  if (cur.kind == RegionKind::Corridor) {
    if (u != kFollowRoad) throw ModelError("only FollowRoad is enabled in a corridor");
    const auto& ends = env.ends(p.current);
    RegionId next = p.previous;
    for (RegionId e : ends) {
      if (e != p.previous) next = e;
    }
    return {{{p.current, next}, 1.0}};
  }
  const int rel = rel_of_action(u);
  if (rel < 0) throw ModelError("FollowRoad is not enabled at an intersection");
  const int h = entry_heading(env, p.previous, p.current);
  const auto& arms = env.arms(p.current);
  auto arm = [&](int r) { return arms[turn(h, kRelTurn[r])]; };
  if (arm(rel) == kNoRegion) throw ModelError("primitive not enabled at this intersection");

  double wrong_total = 0.0;
  for (int r = 0; r < 3; ++r) {
    if (r != rel && arm(r) != kNoRegion) wrong_total += noise.confusion[rel][r];
  }
  std::vector<std::pair<PairState, double>> out;
  const double intended = wrong_total > 0.0 ? noise.eta_ok : 1.0;
  for (int r = 0; r < 3; ++r) {
    if (arm(r) == kNoRegion) continue;
    const double w =
        r == rel ? intended : (1.0 - noise.eta_ok) * noise.confusion[rel][r] / wrong_total;
    if (w > 0.0) out.push_back({{p.current, arm(r)}, w});
  }
  return out;
}

void validate_noise(const NoiseModel& noise) {
  if (!(noise.eta_ok > 0.0 && noise.eta_ok <= 1.0)) {
    throw Error(fmt::format("eta_ok must be in (0, 1], got {}", noise.eta_ok));
  }
  for (const auto& row : noise.confusion) {
    for (double w : row) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error("confusion weights must be finite and >= 0");
    }
  }
}

}  // namespace

EnvMap parse_map(std::string_view text) {
  EnvMap env;
  const auto lines = raw_lines(text);
  std::size_t i = 0;
  auto skippable = [&](std::size_t k) {
    const auto t = detail::trim(lines[k].text);
    return t.empty() || is_comment_line(t);
  };
  while (i < lines.size() && skippable(i)) ++i;

  std::vector<std::string_view> grid;
  std::vector<int> grid_line;
  int first_grid_line = i < lines.size() ? lines[i].number : 0;
  for (; i < lines.size(); ++i) {
    const auto t = detail::trim(lines[i].text);
    if (is_comment_line(t)) continue;
    if (t.empty() || is_keyword_line(t)) break;
    if (!grid.empty() && t.size() != grid.front().size()) {
      throw ParseError(lines[i].number, "non-rectangular grid");
    }
    for (char ch : t) {
      if (ch != '#' && ch != '.' && !std::isalpha(static_cast<unsigned char>(ch))) {
        throw ParseError(lines[i].number, fmt::format("unexpected grid character '{}'", ch));
      }
    }
    grid.push_back(t);
    grid_line.push_back(lines[i].number);
  }
  if (grid.empty()) throw ParseError(first_grid_line, "missing grid");

  std::map<char, std::vector<std::string>> legend;
  std::vector<std::string> declared_props;
  bool have_props = false;
  bool have_start = false;
  int start_line = 0;
  int start_r = 0, start_c = 0;
  Heading start_d = Heading::North;
  bool in_legend = false;
  for (; i < lines.size(); ++i) {
    const int ln = lines[i].number;
    const auto t = strip_comment(lines[i].text);
    if (t.empty()) continue;
    const auto toks = detail::split_ws(t);
    if (toks[0] == "legend") {
      if (toks.size() != 1) throw ParseError(ln, "usage: legend");
      in_legend = true;
    } else if (toks[0] == "props") {
      if (have_props) throw ParseError(ln, "duplicate props line");
      have_props = true;
      for (std::size_t k = 1; k < toks.size(); ++k) declared_props.emplace_back(toks[k]);
    } else if (toks[0] == "start") {
      if (toks.size() != 4) throw ParseError(ln, "usage: start row col N|E|S|W");
      if (have_start) throw ParseError(ln, "duplicate start line");
      have_start = true;
      start_line = ln;
      start_r = detail::parse_number<int>(toks[1], ln, "row");
      start_c = detail::parse_number<int>(toks[2], ln, "column");
      start_d = heading_from(toks[3], ln);
    } else if (in_legend) {
      const auto colon = t.find(':');
      const auto sym = detail::trim(t.substr(0, colon));
      if (colon == std::string_view::npos || sym.size() != 1 ||
          !std::isalpha(static_cast<unsigned char>(sym[0]))) {
        throw ParseError(ln, "usage: X: Obs ...");
      }
      auto& obs = legend[sym[0]];
      if (!obs.empty()) throw ParseError(ln, fmt::format("duplicate legend symbol '{}'", sym));
      for (auto o : detail::split_ws(t.substr(colon + 1))) obs.emplace_back(o);
      if (obs.empty()) throw ParseError(ln, fmt::format("legend symbol '{}' has no observations", sym));
    } else {
      throw ParseError(ln, fmt::format("unexpected '{}'", toks[0]));
    }
  }
  if (!have_start) throw ParseError(lines.empty() ? 0 : lines.back().number, "missing start line");

  if (have_props) {
    env.props_ = declared_props;
  } else {
    for (const auto& [sym, obs] : legend) {
      for (const auto& o : obs) {
        if (std::find(env.props_.begin(), env.props_.end(), o) == env.props_.end()) {
          env.props_.push_back(o);
        }
      }
    }
  }
  if (env.props_.size() > kMaxPropositions) throw ModelError("too many propositions");

  env.rows_ = static_cast<int>(grid.size());
  env.cols_ = static_cast<int>(grid.front().size());
  env.cells_.assign(grid.size() * grid.front().size(), Cell::Wall);
  auto open = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < env.rows_ && c < env.cols_ && grid[r][c] != '#';
  };
  for (int r = 0; r < env.rows_; ++r) {
    for (int c = 0; c < env.cols_; ++c) {
      if (!open(r, c)) continue;
      const char ch = grid[r][c];
      if (ch != '.' && !legend.count(ch)) {
        throw ParseError(grid_line[r], fmt::format("unknown legend symbol '{}'", ch));
      }
      int degree = 0;
      for (int d = 0; d < 4; ++d) degree += open(r + kDr[d], c + kDc[d]);
      env.cells_[env.index(r, c)] = degree >= 3 ? Cell::Intersection : Cell::Corridor;
    }
  }

  // Regions in row-major order of their first cell.
  env.region_of_.assign(env.cells_.size(), kNoRegion);
  int n_int = 0, n_cor = 0;
  for (int r = 0; r < env.rows_; ++r) {
    for (int c = 0; c < env.cols_; ++c) {
      const Cell kind = env.cell(r, c);
      if (kind == Cell::Wall || env.region_at(r, c) != kNoRegion) continue;
      const RegionId id = static_cast<RegionId>(env.regions_.size());
      Region reg;
      if (kind == Cell::Intersection) {
        for (int d = 0; d < 4; ++d) {
          const int rr = r + kDr[d], cc = c + kDc[d];
          if (open(rr, cc) && env.cell(rr, cc) == Cell::Intersection) {
            throw ParseError(grid_line[r],
                             fmt::format("intersections at ({}, {}) and ({}, {}) need a corridor "
                                         "between them",
                                         r, c, rr, cc));
          }
        }
        reg.kind = RegionKind::Intersection;
        reg.name = fmt::format("I{}", ++n_int);
        reg.cells.push_back({r, c});
        env.region_of_[env.index(r, c)] = id;
      } else {
        reg.kind = RegionKind::Corridor;
        reg.name = fmt::format("C{}", ++n_cor);
        std::deque<GridPos> queue{{r, c}};
        env.region_of_[env.index(r, c)] = id;
        while (!queue.empty()) {
          const GridPos p = queue.front();
          queue.pop_front();
          reg.cells.push_back(p);
          for (int d = 0; d < 4; ++d) {
            const int rr = p.row + kDr[d], cc = p.col + kDc[d];
            if (!open(rr, cc) || env.cell(rr, cc) != Cell::Corridor) continue;
            if (env.region_of_[env.index(rr, cc)] != kNoRegion) continue;
            env.region_of_[env.index(rr, cc)] = id;
            queue.push_back({rr, cc});
          }
        }
        std::sort(reg.cells.begin(), reg.cells.end(), [](const GridPos& a, const GridPos& b) {
          return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
      }
      for (const auto& p : reg.cells) {
        const char ch = grid[p.row][p.col];
        if (ch != '.') {
          try {
            reg.observations |= letter_from_names(legend.at(ch), env.props_);
          } catch (const ModelError& e) {
            throw ParseError(grid_line[p.row], e.what());
          }
        }
      }
      env.regions_.push_back(std::move(reg));
    }
  }

  env.arms_.assign(env.regions_.size(), {kNoRegion, kNoRegion, kNoRegion, kNoRegion});
  env.ends_.assign(env.regions_.size(), {});
  for (RegionId id = 0; id < env.regions_.size(); ++id) {
    const auto& reg = env.regions_[id];
    if (reg.kind != RegionKind::Intersection) continue;
    const auto [r, c] = reg.cells.front();
    for (int d = 0; d < 4; ++d) {
      const int rr = r + kDr[d], cc = c + kDc[d];
      if (!open(rr, cc)) continue;
      const RegionId cor = env.region_at(rr, cc);
      auto& ends = env.ends_[cor];
      if (std::find(ends.begin(), ends.end(), id) != ends.end()) {
        throw ParseError(grid_line[r],
                         fmt::format("corridor {} loops back to intersection {}",
                                     env.regions_[cor].name, reg.name));
      }
      ends.push_back(id);
      env.arms_[id][d] = cor;
    }
  }
  for (auto& e : env.ends_) std::sort(e.begin(), e.end());

  if (!open(start_r, start_c) || env.cell(start_r, start_c) != Cell::Intersection) {
    throw ParseError(start_line, fmt::format("start ({}, {}) is not an intersection", start_r, start_c));
  }
  env.start_toward_ = env.region_at(start_r, start_c);
  env.start_corridor_ = env.arms_[env.start_toward_][static_cast<int>(start_d)];
  if (env.start_corridor_ == kNoRegion) {
    throw ParseError(start_line, "start heading does not point into a corridor");
  }
  return env;
}

std::string pair_name(const EnvMap& env, const PairState& p) {
  return env.region(p.previous).name + "-" + env.region(p.current).name;
}

GridNts build_nts(const EnvMap& env, const NoiseModel& noise) {
  validate_noise(noise);
  std::vector<PairState> states;
  for (RegionId i = 0; i < env.regions().size(); ++i) {
    if (env.region(i).kind != RegionKind::Intersection) continue;
    for (RegionId c : env.arms(i)) {
      if (c == kNoRegion) continue;
      states.push_back({c, i});
      states.push_back({i, c});
    }
  }
  std::map<std::pair<RegionId, RegionId>, StateId> id;
  for (StateId s = 0; s < states.size(); ++s) id[{states[s].previous, states[s].current}] = s;

  const RegionId c0 = env.start_corridor();
  const RegionId front = env.start_toward();
  RegionId back = front;
  for (RegionId e : env.ends(c0)) {
    if (e != front) back = e;
  }
  const auto start = id.find({back, c0});
  if (start == id.end()) throw ModelError("start state is not a pair state of the map");

  ModelData d;
  d.mode = ModelMode::Nts;
  d.initial = start->second;
  d.actions = {"FollowRoad", "GoLeft", "GoRight", "GoStraight"};
  d.propositions = env.propositions();
  d.labels.resize(states.size());
  d.choices.resize(states.size());
  for (StateId s = 0; s < states.size(); ++s) {
    d.labels[s] = env.region(states[s].current).observations;
    for (ActionId u : enabled_primitives(env, states[s])) {
      Choice ch{u, {}};
      for (const auto& [next, w] : outcome_distribution(env, noise, states[s], u)) {
        ch.edges.push_back({id.at({next.previous, next.current}), 1.0});
      }
      d.choices[s].push_back(std::move(ch));
    }
  }
  return GridNts{LabeledModel(std::move(d)), std::move(states)};
}

GridTransitionSource::GridTransitionSource(const EnvMap& env, const GridNts& nts,
                                           const NoiseModel& noise)
    : env_(env), nts_(nts), noise_(noise) {
  validate_noise(noise);
  for (StateId s = 0; s < nts.states.size(); ++s) {
    state_of_[{nts.states[s].previous, nts.states[s].current}] = s;
  }
}

std::vector<Edge> GridTransitionSource::compute(StateId q, ActionId u) const {
  if (q >= nts_.states.size() || !nts_.model.is_enabled(q, u)) {
    throw ModelError(fmt::format("action {} is not enabled at grid state {}", u, q));
  }
  const auto dist = outcome_distribution(env_, noise_, nts_.states[q], u);
  std::vector<Edge> out;
  for (const auto& [next, w] : dist) out.push_back({state_of_.at({next.previous, next.current}), w});

  if (noise_.monte_carlo_samples > 0 && out.size() > 1) {
    std::seed_seq seq{static_cast<std::uint32_t>(noise_.seed), static_cast<std::uint32_t>(noise_.seed >> 32),
                      static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(u)};
    Rng rng(seq);
    std::vector<std::size_t> hits(out.size(), 0);
    for (std::size_t n = 0; n < noise_.monte_carlo_samples; ++n) {
      const double x = uniform01(rng);
      double acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < out.size(); ++k) {
        acc += out[k].weight;
        if (x < acc) break;
      }
      ++hits[k];
    }
    std::vector<Edge> est;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (hits[k] > 0) {
        est.push_back({out[k].target, static_cast<double>(hits[k]) /
                                          static_cast<double>(noise_.monte_carlo_samples)});
      }
    }
    out = std::move(est);
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return a.target < b.target; });
  return out;
}

std::vector<Edge> GridTransitionSource::transition_probs(StateId q, ActionId u) {
  {
    std::shared_lock lock(mu_);
    if (auto it = memo_.find({q, u}); it != memo_.end()) return it->second;
  }
  auto edges = compute(q, u);
  std::unique_lock lock(mu_);
  auto [it, inserted] = memo_.try_emplace({q, u}, std::move(edges));
  if (inserted) computed_.fetch_add(1);
  return it->second;
}

}  // namespace ltlac
