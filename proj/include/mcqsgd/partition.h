#pragma once

#include <array>

#include "mcqsgd/energy_policy.h"
#include "mcqsgd/env.h"

namespace mcqsgd {

/// Phase-plane quadrants around (z_split, v_split), numbered counterclockwise
/// from the upper right. States on a split line belong to the >= side.
enum class Region : int { k1 = 1, k2 = 2, k3 = 3, k4 = 4 };

inline constexpr std::array<Region, 4> kAllRegions = {Region::k1, Region::k2, Region::k3,
                                                      Region::k4};

constexpr int region_number(Region r) { return static_cast<int>(r); }
constexpr std::size_t region_slot(Region r) { return static_cast<std::size_t>(r) - 1; }

/// Throws std::invalid_argument unless 1 <= n <= 4.
Region region_from_number(int n);

struct RegionPartition {
  double z_split = -0.35;
  double v_split = 0.0;

  void validate(const EnvParams& env = {}) const;

  bool operator==(const RegionPartition&) const = default;
};

/// Axis-aligned sub-box of a region. Upper bounds are exclusive on split lines
/// and inclusive on the outer box edges.
struct RegionBox {
  double z_lo, z_hi, v_lo, v_hi;
};

RegionBox region_box(Region r, const RegionPartition& p, const EnvParams& env = {});

/// Throws std::invalid_argument for states outside the box.
Region region_of(const State& s, const RegionPartition& p = {}, const EnvParams& env = {});

struct PartitionedTheta {
  std::array<Theta, 4> thetas{};

  static PartitionedTheta uniform(const Theta& t) { return {{t, t, t, t}}; }

  Theta& operator[](Region r) { return thetas[region_slot(r)]; }
  const Theta& operator[](Region r) const { return thetas[region_slot(r)]; }

  bool operator==(const PartitionedTheta&) const = default;
};

double partitioned_action(const PartitionedTheta& pt, const State& s,
                          const RegionPartition& p = {}, const EnvParams& env = {},
                          TieBreak tie = TieBreak::kZero);

}  // namespace mcqsgd
