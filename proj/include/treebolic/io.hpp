#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "treebolic/geometry.hpp"
#include "treebolic/kernels.hpp"
#include "treebolic/params.hpp"
#include "treebolic/simulate.hpp"
#include "treebolic/tree.hpp"

namespace treebolic {

using json = nlohmann::json;

/// FNV-1a over the canonical (key-sorted) dump of a JSON value.
std::uint64_t fnv1a_hash(const std::string& s);
std::string config_hash(const json& cfg);

json params_to_json(const Params& prm);
Params params_from_json(const json& j);

json sim_config_to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const json& j, const Params& prm);

/// {"x": ..., "u": ..., "w": "o.1", "t": offset}
json ht_point_to_json(Tree& t, const HtPoint& z);
HtPoint ht_point_from_json(Tree& t, const Params& prm, const json& j);

/// {"kind":"tree-end","word":"0.1.0"} | {"kind":"real","zeta":0.5}
/// | {"kind":"infinity"} | {"kind":"varpi"} | {"kind":"one"}
json boundary_param_to_json(const BoundaryParam& bp);
BoundaryParam boundary_param_from_json(Tree& t, const json& j);

/// One exit sample as a JSON line: {"x":..., "u":..., "w":"o.1",
/// "t_exit":..., "side":"hor"}.
std::string exit_sample_line(Tree& t, const ExitSample& e);

/// Metadata header lines (prefixed '#') embedding seed, replica range and
/// config hash.
std::string metadata_header(const json& cfg, std::uint64_t seed, int replicas);

/// CSV: metadata header lines, then a header row, then data rows.
std::string csv_table(const std::string& meta, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string format_double(double v);

}  // namespace treebolic
