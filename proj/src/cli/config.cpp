#include "nlcouple/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nlcouple/error.hpp"

namespace nlc {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"geometry", {"mode", "a", "outer", "r1", "r2"}},
      {"kernel", {"profile", "delta", "table"}},
      {"mesh", {"h_local", "h_nonlocal"}},
      {"problem", {"lambda1", "lambda2", "case", "source"}},
      {"solver", {"method", "tol", "restart", "max_iterations"}},
      {"study", {"deltas", "h_ratio"}},
      {"output", {"dir"}},
      {"run", {"seed", "threads"}},
  };
  return s;
}

template <class T>
T read(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value");
  }
}

double positive(const YAML::Node& node, const std::string& key) {
  const double v = read<double>(node, key);
  if (!(v > 0.0)) throw ConfigError("config key '" + key + "' must be positive");
  return v;
}

void apply(RunConfig& c, const std::string& section, const std::string& key, const YAML::Node& v) {
  const std::string name = section + "." + key;
  if (section == "geometry") {
    if (key == "mode") {
      const auto mode = read<std::string>(v, name);
      if (mode == "interval") {
        c.mode = GeometryMode::Interval1D;
      } else if (mode == "radial") {
        c.mode = GeometryMode::RadialDisk2D;
      } else {
        throw ConfigError("geometry.mode must be 'interval' or 'radial', got '" + mode + "'");
      }
    } else if (key == "a" || key == "r1") {
      c.interface_position = positive(v, name);
    } else {
      c.outer = positive(v, name);
    }
  } else if (section == "kernel") {
    if (key == "profile") c.profile = read<std::string>(v, name);
    if (key == "delta") c.delta = positive(v, name);
    if (key == "table") c.kernel_table = read<std::string>(v, name);
  } else if (section == "mesh") {
    (key == "h_local" ? c.h_local : c.h_nonlocal) = positive(v, name);
  } else if (section == "problem") {
    if (key == "lambda1") c.lambda1 = positive(v, name);
    if (key == "lambda2") c.lambda2 = positive(v, name);
    if (key == "case") c.case_id = read<std::string>(v, name);
    if (key == "source") c.source = read<std::string>(v, name);
  } else if (section == "solver") {
    if (key == "method") c.solver.method = solver_method_from(read<std::string>(v, name));
    if (key == "tol") c.solver.tol = positive(v, name);
    if (key == "restart") c.solver.restart = static_cast<int>(positive(v, name));
    if (key == "max_iterations") c.solver.max_iterations = static_cast<int>(positive(v, name));
  } else if (section == "study") {
    if (key == "deltas") {
      if (!v.IsSequence() || v.size() == 0) {
        throw ConfigError("study.deltas must be a non-empty list");
      }
      c.deltas.clear();
      for (const auto& d : v) c.deltas.push_back(positive(d, name));
    } else {
      c.h_ratio = positive(v, name);
    }
  } else if (section == "output") {
    c.output_dir = read<std::string>(v, name);
  } else if (section == "run") {
    if (key == "seed") c.seed = read<std::uint64_t>(v, name);
    if (key == "threads") c.threads = read<unsigned>(v, name);
  }
}

void validate(RunConfig& c) {
  if (c.interface_position >= c.outer) {
    throw ConfigError("geometry: the interface must lie inside the domain (a < outer)");
  }
  for (std::size_t i = 1; i < c.deltas.size(); ++i) {
    if (!(c.deltas[i] < c.deltas[i - 1])) {
      throw ConfigError("study.deltas must be strictly decreasing");
    }
  }
  if (c.case_id && c.source) {
    throw ConfigError("problem: set either 'case' or 'source', not both");
  }
  if (!c.case_id && !c.source) c.case_id = "mc1";
  if (c.case_id) {
    const auto exact = c.exact();
    if (exact->mode != c.mode) {
      throw ConfigError("problem.case '" + *c.case_id + "' does not match geometry.mode");
    }
  } else {
    if (c.mode != GeometryMode::Interval1D) {
      throw ConfigError("problem.source is only available on the interval geometry");
    }
    if (*c.source != "random") named_source(*c.source);
  }
  c.kernel_profile();
}

}  // namespace

KernelProfile RunConfig::kernel_profile() const {
  if (kernel_table) return KernelProfile::load_table(*kernel_table);
  return KernelProfile::by_name(profile);
}

ScaledKernel RunConfig::kernel() const { return kernel(delta); }

ScaledKernel RunConfig::kernel(double d) const {
  return ScaledKernel(kernel_profile(), d, mode == GeometryMode::Interval1D ? 1 : 2);
}

std::pair<double, double> RunConfig::mesh_sizes() const {
  return {h_local.value_or(delta * h_ratio), h_nonlocal.value_or(delta * h_ratio)};
}

ProblemSpec RunConfig::problem_spec() const {
  ProblemSpec spec{lambda1, lambda2, Geometry::build(mode, interface_position, outer, delta), kernel()};
  spec.validate();
  return spec;
}

std::optional<ManufacturedSolution> RunConfig::exact() const {
  if (!case_id) return std::nullopt;
  return manufactured_case(*case_id, lambda1, lambda2, interface_position, outer);
}

ScalarFn RunConfig::source_function() const {
  if (case_id) return exact()->source();
  if (*source == "random") return random_bandlimited_source(seed, 8, outer);
  return named_source(*source);
}

HRule RunConfig::h_rule() const { return proportional_h_rule(h_ratio); }

RunConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) {
    validate(c);
    return c;
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping of blocks");
  for (const auto& block : root) {
    const auto section = block.first.as<std::string>();
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown config block '" + section + "'");
    if (!block.second.IsMap()) throw ConfigError("config block '" + section + "' must be a mapping");
    for (const auto& entry : block.second) {
      const auto key = entry.first.as<std::string>();
      if (!it->second.contains(key)) {
        throw ConfigError("unknown config key '" + section + "." + key + "'");
      }
      apply(c, section, key, entry.second);
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace nlc
