#include "treebolic/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace treebolic {

std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a_hash(cfg.dump())));
  return std::string(buf);
}

json params_to_json(const Params& prm) {
  return json{{"q", prm.q}, {"p", prm.p}, {"alpha", prm.alpha}, {"beta", prm.beta}};
}

Params params_from_json(const json& j) {
  return make_params(j.at("q").get<double>(), j.at("p").get<int>(), j.at("alpha").get<double>(),
                     j.at("beta").get<double>());
}

json sim_config_to_json(const SimConfig& cfg) {
  return json{{"dt", cfg.dt},
              {"line_tol", cfg.line_tol},
              {"max_steps", cfg.max_steps},
              {"seed", cfg.seed},
              {"replica", cfg.replica},
              {"max_halvings", cfg.max_halvings}};
}

SimConfig sim_config_from_json(const json& j, const Params& prm) {
  SimConfig cfg = SimConfig::defaults(prm);
  if (j.contains("dt") && !j.at("dt").is_null()) cfg.dt = j.at("dt").get<double>();
  if (j.contains("line_tol")) cfg.line_tol = j.at("line_tol").get<double>();
  if (j.contains("max_steps")) cfg.max_steps = j.at("max_steps").get<long>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("replica")) cfg.replica = j.at("replica").get<int>();
  if (j.contains("max_halvings")) cfg.max_halvings = j.at("max_halvings").get<int>();
  if (!(cfg.dt > 0)) throw std::invalid_argument("config: dt must be positive");
  return cfg;
}

json ht_point_to_json(Tree& t, const HtPoint& z) {
  return json{{"x", z.x}, {"u", z.u}, {"w", t.address(z.w.upper)}, {"t", z.w.offset}};
}

HtPoint ht_point_from_json(Tree& t, const Params& prm, const json& j) {
  const NodeId upper = t.resolve(j.at("w").get<std::string>());
  double offset;
  if (j.contains("t"))
    offset = j.at("t").get<double>();
  else
    offset = j.at("u").get<double>() / prm.log_q;
  return make_ht_point(t, prm, j.at("x").get<double>(), j.at("u").get<double>(), TreePoint{upper, offset});
}

json boundary_param_to_json(const BoundaryParam& bp) {
  switch (bp.kind) {
    case BoundaryParam::Kind::varpi:
      return json{{"kind", "varpi"}};
    case BoundaryParam::Kind::infinity:
      return json{{"kind", "infinity"}};
    case BoundaryParam::Kind::one:
      return json{{"kind", "one"}};
    case BoundaryParam::Kind::real:
      return json{{"kind", "real"}, {"zeta", bp.zeta}};
    case BoundaryParam::Kind::tree_end: {
      std::string word;
      for (std::size_t i = 0; i < bp.end->word().size(); ++i) {
        if (i) word += '.';
        word += std::to_string(bp.end->word()[i]);
      }
      // Serialized ends are anchored at the root.
      return json{{"kind", "tree-end"}, {"word", word}};
    }
  }
  throw std::invalid_argument("boundary param: bad kind");
}

BoundaryParam boundary_param_from_json(Tree& t, const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "varpi") return BoundaryParam::varpi();
  if (kind == "infinity") return BoundaryParam::infinity();
  if (kind == "one") return BoundaryParam::one();
  if (kind == "real") return BoundaryParam::real(j.at("zeta").get<double>());
  if (kind == "tree-end") {
    std::vector<int> word;
    const std::string w = j.at("word").get<std::string>();
    std::stringstream ss(w);
    std::string tok;
    while (std::getline(ss, tok, '.')) word.push_back(std::stoi(tok));
    return BoundaryParam::tree_end(TreeEnd::upper(t.root(), std::move(word)));
  }
  throw std::invalid_argument("boundary param: unknown kind " + kind);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string exit_sample_line(Tree& t, const ExitSample& e) {
  json j{{"x", e.exit_point.x},
         {"u", e.exit_point.u},
         {"w", t.address(e.exit_point.w.upper)},
         {"t_exit", e.exit_time},
         {"side", e.side == Side::horizontal ? "hor" : "vert"}};
  return j.dump();
}

std::string metadata_header(const json& cfg, std::uint64_t seed, int replicas) {
  std::ostringstream os;
  os << "# config-hash: " << config_hash(cfg) << "\n";
  os << "# seed: " << seed << "\n";
  os << "# replicas: 0.." << (replicas - 1) << "\n";
  return os.str();
}

std::string csv_table(const std::string& meta, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << meta;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) os << ',';
    os << header[i];
  }
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace treebolic
