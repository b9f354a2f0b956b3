#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regionprove/engine.hpp"
#include "regionprove/geometry.hpp"
#include "regionprove/oracle.hpp"

namespace regionprove {

struct RegionRecord {
  RegionKind kind = RegionKind::Unknown;
  Hyperrectangle bounds;
  int depth = 0;
  std::uint64_t seed = 0;
};

// Header `kind,depth,lb_0,ub_0,...,lb_{d-1},ub_{d-1},seed`, one row per
// region, floats at 9 significant digits, rows sorted by (kind,
// lexicographic bounds) so outputs diff cleanly.
std::string write_regions_csv(const VerificationOutcome& outcome);
std::vector<RegionRecord> read_regions_csv(const std::string& text);

// Versioned schema carrying the property, the tolerance parameters, the
// achieved confidences, rates, timings and all regions. Doubles render in
// shortest-round-trip form, so the JSON round-trip is lossless.
std::string write_outcome_json(const VerificationOutcome& outcome);
VerificationOutcome read_outcome_json(const std::string& text);
VerificationOutcome read_outcome_file(const std::string& path);

// 2-D partition plot: one rect per region (safe green, unsafe red,
// unknown grey), domain mapped onto the viewBox, element order as in the
// CSV. Throws std::invalid_argument unless the domain is 2-D.
std::string render_svg_2d(const VerificationOutcome& outcome, int width_px, int height_px);

std::string write_oracle_report_json(const OracleReport& report);

}  // namespace regionprove
