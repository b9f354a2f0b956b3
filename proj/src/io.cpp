#include "regionprove/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "json.hpp"

#include "regionprove/errors.hpp"

namespace regionprove {

namespace {

using nlohmann::json;

std::string format_sig9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int kind_order(RegionKind kind) {
  switch (kind) {
    case RegionKind::Safe: return 0;
    case RegionKind::Unsafe: return 1;
    case RegionKind::Unknown: return 2;
  }
  return 2;
}

RegionKind kind_from_string(std::string_view name, int line) {
  if (name == "safe") return RegionKind::Safe;
  if (name == "unsafe") return RegionKind::Unsafe;
  if (name == "unknown") return RegionKind::Unknown;
  throw ParseError("unknown region kind '" + std::string(name) + "'", line);
}

// (kind, region) rows in the canonical output order.
std::vector<std::pair<RegionKind, const ClassifiedRegion*>> sorted_rows(
    const VerificationOutcome& outcome) {
  std::vector<std::pair<RegionKind, const ClassifiedRegion*>> rows;
  for (RegionKind kind : {RegionKind::Safe, RegionKind::Unsafe, RegionKind::Unknown})
    for (const auto& r : outcome.regions(kind)) rows.emplace_back(kind, &r);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return kind_order(a.first) < kind_order(b.first);
    return bounds_less(a.second->box, b.second->box);
  });
  return rows;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

double field_to_double(std::string_view field, int line) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw ParseError("invalid numeric field '" + std::string(field) + "'", line);
  return v;
}

json region_to_json(const ClassifiedRegion& region) {
  json bounds = json::array();
  for (std::size_t i = 0; i < region.box.dim(); ++i)
    bounds.push_back(json::array({region.box.lower[i], region.box.upper[i]}));
  return json{{"bounds", std::move(bounds)}, {"depth", region.depth}, {"seed", region.seed}};
}

ClassifiedRegion region_from_json(const json& j) {
  if (!j.is_object() || !j.contains("bounds") || !j.contains("depth") || !j.contains("seed"))
    throw ParseError("region needs 'bounds', 'depth' and 'seed'");
  ClassifiedRegion region;
  for (const auto& pair : j["bounds"]) {
    if (!pair.is_array() || pair.size() != 2) throw ParseError("region bound must be a [lb, ub] pair");
    region.box.lower.push_back(pair[0].get<double>());
    region.box.upper.push_back(pair[1].get<double>());
  }
  region.depth = j["depth"].get<int>();
  region.seed = j["seed"].get<std::uint64_t>();
  return region;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

}  // namespace

std::string write_regions_csv(const VerificationOutcome& outcome) {
  const std::size_t d = outcome.property.domain.dim();
  std::string out = "kind,depth";
  for (std::size_t i = 0; i < d; ++i)
    out += ",lb_" + std::to_string(i) + ",ub_" + std::to_string(i);
  out += ",seed\n";
  for (const auto& [kind, region] : sorted_rows(outcome)) {
    out += to_string(kind);
    out += ',' + std::to_string(region->depth);
    for (std::size_t i = 0; i < d; ++i) {
      out += ',' + format_sig9(region->box.lower[i]);
      out += ',' + format_sig9(region->box.upper[i]);
    }
    out += ',' + std::to_string(region->seed) + '\n';
  }
  return out;
}

std::vector<RegionRecord> read_regions_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty regions CSV", 1);
  const auto header = split_fields(line);
  if (header.size() < 5 || header[0] != "kind" || header[1] != "depth" ||
      header.back() != "seed" || header.size() % 2 != 1)
    throw ParseError("malformed regions CSV header", 1);
  const std::size_t d = (header.size() - 3) / 2;
  std::vector<RegionRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    RegionRecord record;
    record.kind = kind_from_string(fields[0], line_no);
    record.depth = static_cast<int>(field_to_double(fields[1], line_no));
    for (std::size_t i = 0; i < d; ++i) {
      record.bounds.lower.push_back(field_to_double(fields[2 + 2 * i], line_no));
      record.bounds.upper.push_back(field_to_double(fields[3 + 2 * i], line_no));
    }
    std::uint64_t seed = 0;
    const auto sf = fields.back();
    const auto res = std::from_chars(sf.data(), sf.data() + sf.size(), seed);
    if (res.ec != std::errc() || res.ptr != sf.data() + sf.size())
      throw ParseError("invalid seed field", line_no);
    record.seed = seed;
    records.push_back(std::move(record));
  }
  return records;
}

std::string write_outcome_json(const VerificationOutcome& outcome) {
  json j;
  j["schema_version"] = 1;
  {
    json domain{{"lower", outcome.property.domain.lower},
                {"upper", outcome.property.domain.upper}};
    json constraints = json::array();
    for (const LinearConstraint& c : outcome.property.constraints) {
      json coeffs = json::array();
      for (Eigen::Index i = 0; i < c.coeffs.size(); ++i) coeffs.push_back(c.coeffs(i));
      constraints.push_back(json{{"coeffs", std::move(coeffs)}, {"offset", c.offset}});
    }
    j["property"] = {{"domain", std::move(domain)}, {"constraints", std::move(constraints)}};
  }
  j["params"] = {{"alpha", outcome.params.alpha},
                 {"rate", outcome.params.rate},
                 {"n", outcome.params.n},
                 {"m", outcome.params.m}};
  j["confidence"] = {{"per_region", outcome.confidence_per_region},
                     {"joint_achieved", outcome.confidence_joint_achieved}};
  j["safe_rate"] = outcome.safe_rate;
  j["unsafe_rate"] = outcome.unsafe_rate;
  j["unknown_rate"] = outcome.unknown_rate;
  j["wall_time_s"] = outcome.wall_time_s;
  json regions;
  for (RegionKind kind : {RegionKind::Safe, RegionKind::Unsafe, RegionKind::Unknown}) {
    json list = json::array();
    for (const auto& r : outcome.regions(kind)) list.push_back(region_to_json(r));
    regions[to_string(kind)] = std::move(list);
  }
  j["regions"] = std::move(regions);
  return j.dump();
}

namespace {

VerificationOutcome outcome_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw ParseError("outcome JSON needs 'schema_version'");
  if (j["schema_version"].get<int>() != 1)
    throw ParseError("unsupported outcome schema version");
  VerificationOutcome outcome;
  const json& jp = j.at("property");
  const json& jd = jp.at("domain");
  outcome.property.domain.lower = jd.at("lower").get<std::vector<double>>();
  outcome.property.domain.upper = jd.at("upper").get<std::vector<double>>();
  for (const auto& c : jp.at("constraints")) {
    const auto coeffs = c.at("coeffs").get<std::vector<double>>();
    LinearConstraint constraint;
    constraint.coeffs =
        Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    constraint.offset = c.at("offset").get<double>();
    outcome.property.constraints.push_back(std::move(constraint));
  }
  const json& jparams = j.at("params");
  outcome.params.alpha = jparams.at("alpha").get<double>();
  outcome.params.rate = jparams.at("rate").get<double>();
  outcome.params.n = jparams.at("n").get<std::int64_t>();
  outcome.params.m = jparams.at("m").get<std::int64_t>();
  outcome.confidence_per_region = j.at("confidence").at("per_region").get<double>();
  outcome.confidence_joint_achieved = j.at("confidence").at("joint_achieved").get<double>();
  outcome.safe_rate = j.at("safe_rate").get<double>();
  outcome.unsafe_rate = j.at("unsafe_rate").get<double>();
  outcome.unknown_rate = j.at("unknown_rate").get<double>();
  outcome.wall_time_s = j.at("wall_time_s").get<double>();
  const json& jr = j.at("regions");
  for (const auto& r : jr.at("safe")) outcome.safe.push_back(region_from_json(r));
  for (const auto& r : jr.at("unsafe")) outcome.unsafe.push_back(region_from_json(r));
  for (const auto& r : jr.at("unknown")) outcome.unknown.push_back(region_from_json(r));
  return outcome;
}

}  // namespace

VerificationOutcome read_outcome_json(const std::string& text) {
  const json j = parse_json_text(text);
  try {
    return outcome_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

VerificationOutcome read_outcome_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_outcome_json(ss.str());
}

std::string render_svg_2d(const VerificationOutcome& outcome, int width_px, int height_px) {
  if (outcome.property.domain.dim() != 2)
    throw std::invalid_argument("render_svg_2d requires a 2-D domain");
  if (width_px < 1 || height_px < 1)
    throw std::invalid_argument("render_svg_2d requires positive pixel sizes");
  const Hyperrectangle& domain = outcome.property.domain;
  const double sx = static_cast<double>(width_px) / domain.side(0);
  const double sy = static_cast<double>(height_px) / domain.side(1);

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_px) +
         "\" height=\"" + std::to_string(height_px) + "\" viewBox=\"0 0 " +
         std::to_string(width_px) + " " + std::to_string(height_px) + "\">\n";
  for (const auto& [kind, region] : sorted_rows(outcome)) {
    const char* fill = kind == RegionKind::Safe     ? "#4caf50"
                       : kind == RegionKind::Unsafe ? "#e53935"
                                                    : "#bdbdbd";
    const double x = (region->box.lower[0] - domain.lower[0]) * sx;
    // SVG y grows downward; flip so the domain's upper edge is at y = 0.
    const double y = (domain.upper[1] - region->box.upper[1]) * sy;
    const double w = region->box.side(0) * sx;
    const double h = region->box.side(1) * sy;
    out += "<rect x=\"" + format_px(x) + "\" y=\"" + format_px(y) + "\" width=\"" + format_px(w) +
           "\" height=\"" + format_px(h) + "\" fill=\"" + fill + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string write_oracle_report_json(const OracleReport& report) {
  json j;
  j["method"] = to_string(report.method);
  j["safe_rate"] = report.safe_rate;
  j["violation_rate"] = report.violation_rate;
  j["samples_or_cells"] = report.samples_or_cells;
  j["wall_time_s"] = report.wall_time_s;
  return j.dump();
}

}  // namespace regionprove
