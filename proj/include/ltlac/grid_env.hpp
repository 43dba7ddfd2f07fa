#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ltlac/model.hpp"
#include "ltlac/provider.hpp"

namespace ltlac {

enum class Cell : std::uint8_t { Wall, Corridor, Intersection };
enum class RegionKind : std::uint8_t { Corridor, Intersection };

/// Compass headings in clockwise order.
enum class Heading : std::uint8_t { North, East, South, West };

struct GridPos {
  int row = 0;
  int col = 0;
  bool operator==(const GridPos&) const = default;
};

struct Region {
  RegionKind kind = RegionKind::Corridor;
  std::vector<GridPos> cells;  // row-major order
  Letter observations = 0;
  std::string name;  // "I3", "C7"
};

using RegionId = std::uint32_t;
inline constexpr RegionId kNoRegion = static_cast<RegionId>(-1);

class EnvMap {
 public:
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Cell cell(int r, int c) const { return cells_[index(r, c)]; }
  RegionId region_at(int r, int c) const { return region_of_[index(r, c)]; }
  const std::vector<Region>& regions() const { return regions_; }
  const Region& region(RegionId id) const { return regions_[id]; }
  const std::vector<std::string>& propositions() const { return props_; }

  /// Corridor on each arm of an intersection, indexed by Heading.
  const std::array<RegionId, 4>& arms(RegionId intersection) const { return arms_[intersection]; }
  /// Intersections touching a corridor, ascending (one or two of them).
  const std::vector<RegionId>& ends(RegionId corridor) const { return ends_[corridor]; }

  /// Start: the robot is in `start_corridor` heading for `start_toward`.
  RegionId start_corridor() const { return start_corridor_; }
  RegionId start_toward() const { return start_toward_; }

  friend EnvMap parse_map(std::string_view text);

 private:
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols_ + c; }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Cell> cells_;
  std::vector<RegionId> region_of_;
  std::vector<Region> regions_;
  std::vector<std::string> props_;
  std::vector<std::array<RegionId, 4>> arms_;  // per region; kNoRegion for corridors
  std::vector<std::vector<RegionId>> ends_;    // per region; empty for intersections
  RegionId start_corridor_ = kNoRegion;
  RegionId start_toward_ = kNoRegion;
};

/// Grid of '#' (wall), '.' (open) and letters (open, observed via the legend),
/// then a `legend` line followed by `X: Obs ...` entries, and
/// `start r c d`: intersection cell (r, c) with the robot in the corridor on
/// arm d (N/E/S/W), facing it.
EnvMap parse_map(std::string_view text);

inline constexpr ActionId kFollowRoad = 0;
inline constexpr ActionId kGoLeft = 1;
inline constexpr ActionId kGoRight = 2;
inline constexpr ActionId kGoStraight = 3;

struct NoiseModel {
  double eta_ok = 0.9;
  /// confusion[intended][actual]: relative weight of each wrong outcome,
  /// indexed left, straight, right. The diagonal is ignored.
  std::array<std::array<double, 3>, 3> confusion{{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}}};
  /// 0 = closed form; otherwise frequencies over this many sampled outcomes.
  std::size_t monte_carlo_samples = 0;
  std::uint64_t seed = 0;
};

/// Wrong outcomes only to the geometrically neighboring arm(s): left and
/// right are never confused with each other.
inline constexpr std::array<std::array<double, 3>, 3> kAdjacentConfusion{
    {{0.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}}};

struct PairState {
  RegionId previous = kNoRegion;
  RegionId current = kNoRegion;
  bool operator==(const PairState&) const = default;
};

struct GridNts {
  LabeledModel model;
  std::vector<PairState> states;  // model state id -> pair
};

/// Pair-state NTS: one state per ordered pair of adjacent regions. Possible
/// successors follow the support of `noise`.
GridNts build_nts(const EnvMap& env, const NoiseModel& noise = {});

/// Human-readable "C1-I2" name of a pair state.
std::string pair_name(const EnvMap& env, const PairState& p);

/// Transition probabilities of the pair-state model under a noise model,
/// computed on first request and memoized. Safe for concurrent use.
class GridTransitionSource : public TransitionSource {
 public:
  /// `env` and `nts` must outlive the source.
  GridTransitionSource(const EnvMap& env, const GridNts& nts, const NoiseModel& noise);

  std::vector<Edge> transition_probs(StateId q, ActionId u) override;
  /// Distinct (q, u) pairs computed so far.
  std::size_t pairs_computed() const override { return computed_.load(); }

 private:
  std::vector<Edge> compute(StateId q, ActionId u) const;

  const EnvMap& env_;
  const GridNts& nts_;
  NoiseModel noise_;
  std::map<std::pair<RegionId, RegionId>, StateId> state_of_;
  mutable std::shared_mutex mu_;
  std::map<std::pair<StateId, ActionId>, std::vector<Edge>> memo_;
  std::atomic<std::size_t> computed_{0};
};

}  // namespace ltlac
