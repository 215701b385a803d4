#pragma once

#include <cstddef>
#include <vector>

#include "g2s/canon.hpp"
#include "g2s/setup.hpp"
#include "g2s/stepnc.hpp"

namespace g2s {

enum class SegmentKind { Rapid, Feed, Cycle };

// Maximal run of motion calls of one kind. `calls` indexes the call list.
struct Segment {
  SegmentKind kind = SegmentKind::Rapid;
  std::vector<std::size_t> calls;

  bool operator==(const Segment&) const = default;
};

// Splits the motion calls into rapid chains, feed chains and cycle groups.
// Chains break on a kind switch and on tool, spindle, feed-rate or coolant
// changes; setting a value equal to the current one is not a change.
std::vector<Segment> segment(const std::vector<CanonicalCall>& calls);

// Emulates the calls and builds the explicit-toolpath project. Traverses made
// before the machine position is known (no initial position in the setup and
// no earlier motion) are not recorded.
Project build_cc1(const std::vector<CanonicalCall>& calls, const JobSetup& setup);

}  // namespace g2s
