#include "waveguide/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace wg {

std::vector<double> SweepConfig::points() const {
  std::vector<double> k;
  if (samples == 1) return {k_start};
  for (int i = 0; i < samples; ++i) k.push_back(k_start + (k_end - k_start) * i / (samples - 1));
  return k;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

struct Entry {
  std::string value;
  int line;
  std::string field;
};

double to_double(const Entry& e) {
  double v = 0.0;
  const char* end = e.value.data() + e.value.size();
  auto [p, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || p != end)
    throw ConfigError("line " + std::to_string(e.line) + ": " + e.field + ": expected a number, got '" + e.value + "'",
                      e.line, e.field);
  return v;
}

int to_int(const Entry& e) {
  int v = 0;
  const char* end = e.value.data() + e.value.size();
  auto [p, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || p != end)
    throw ConfigError("line " + std::to_string(e.line) + ": " + e.field + ": expected an integer, got '" + e.value + "'",
                      e.line, e.field);
  return v;
}

bool to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError("line " + std::to_string(e.line) + ": " + e.field + ": expected true or false", e.line, e.field);
}

std::string one_of(const Entry& e, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (e.value == a) return e.value;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ConfigError("line " + std::to_string(e.line) + ": " + e.field + ": '" + e.value + "' is not one of " + list,
                    e.line, e.field);
}

BoundaryCondition to_bc(const Entry& e, const std::string& v) {
  if (v == "dirichlet") return BoundaryCondition::dirichlet;
  if (v == "neumann") return BoundaryCondition::neumann;
  throw ConfigError("line " + std::to_string(e.line) + ": " + e.field + ": unknown boundary condition '" + v + "'",
                    e.line, e.field);
}

[[noreturn]] void unknown(const Entry& e) {
  throw ConfigError("line " + std::to_string(e.line) + ": unknown field '" + e.field + "'", e.line, e.field);
}

void invalid(const Entry& e, const std::string& why) {
  throw ConfigError("line " + std::to_string(e.line) + ": " + e.field + ": " + why, e.line, e.field);
}

void apply_geometry(GeometryConfig& g, const std::string& key, const Entry& e) {
  if (key == "kind") g.kind = one_of(e, {"rectangle", "disc", "mesh"});
  else if (key == "a") g.a = to_double(e);
  else if (key == "b") g.b = to_double(e);
  else if (key == "radius") g.radius = to_double(e);
  else if (key == "mesh") g.mesh = e.value;
  else if (key == "backend") g.backend = one_of(e, {"analytic", "fem"});
  else unknown(e);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<int, GeometryConfig> ends;
  std::map<std::string, Entry> last;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'section.key = value'", line, "");
    const std::string field = trim(s.substr(0, eq));
    const Entry e{trim(s.substr(eq + 1)), line, field};
    const auto dot = field.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == field.size())
      throw ConfigError("line " + std::to_string(line) + ": field '" + field + "' is not of the form section.key", line,
                        field);
    if (e.value.empty()) invalid(e, "empty value");
    const std::string section = field.substr(0, dot), key = field.substr(dot + 1);
    last[field] = e;

    if (section.rfind("geometry", 0) == 0) {
      const std::string suffix = section.substr(8);
      int index = 1;
      if (!suffix.empty()) {
        const Entry n{suffix, line, field};
        index = to_int(n);
        if (index < 1) invalid(e, "end index must be >= 1");
      }
      apply_geometry(ends[index], key, e);
    } else if (section == "junction") {
      c.has_junction = true;
      JunctionConfig& j = c.junction;
      if (key == "kind") j.kind = one_of(e, {"straight", "step"});
      else if (key == "length") j.length = to_double(e);
      else if (key == "a1") j.a1 = to_double(e);
      else if (key == "a2") j.a2 = to_double(e);
      else if (key == "offset") j.offset = to_double(e);
      else if (key == "b") j.b = to_double(e);
      else if (key == "family") j.family = one_of(e, {"maxwell", "scalar", "sigma", "dirichlet", "neumann"});
      else unknown(e);
    } else if (section == "solve") {
      SolveConfig& v = c.solve;
      if (key == "bc") {
        v.bcs.clear();
        std::istringstream list(e.value);
        std::string item;
        while (std::getline(list, item, ',')) v.bcs.push_back(to_bc(e, trim(item)));
      } else if (key == "cutoff") v.cutoff = to_double(e);
      else if (key == "h") v.h = to_double(e);
      else if (key == "M") v.M = to_int(e);
      else if (key == "order") v.order = to_int(e);
      else if (key == "nodal") v.nodal = to_bool(e);
      else unknown(e);
    } else if (section == "sweep") {
      SweepConfig& w = c.sweep;
      if (key == "k_start") w.k_start = to_double(e);
      else if (key == "k_end") w.k_end = to_double(e);
      else if (key == "samples") w.samples = to_int(e);
      else if (key == "skip_radius") w.skip_radius = to_double(e);
      else unknown(e);
    } else if (section == "source") {
      c.has_source = true;
      if (key == "mode") c.source.mode = to_int(e);
      else if (key == "z0") c.source.z0 = to_double(e);
      else if (key == "z1") c.source.z1 = to_double(e);
      else unknown(e);
    } else if (section == "output") {
      if (key == "format") c.output.format = one_of(e, {"json", "csv"});
      else if (key == "path") c.output.path = e.value;
      else if (key == "precision") c.output.precision = to_int(e);
      else unknown(e);
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown section '" + section + "'", line, field);
    }
  }

  int expected = 1;
  for (auto& [index, g] : ends) {
    if (index != expected)
      throw ConfigError("geometry sections must be numbered consecutively (missing geometry" +
                            (expected == 1 ? std::string() : std::to_string(expected)) + ")",
                        0, "geometry" + std::to_string(expected));
    c.ends.push_back(g);
    ++expected;
  }

  auto at = [&](const std::string& field) {
    auto it = last.find(field);
    return it != last.end() ? it->second : Entry{"", 0, field};
  };
  if (!(c.sweep.k_start < c.sweep.k_end)) invalid(at("sweep.k_end"), "k_start < k_end is required");
  if (c.sweep.samples < 1) invalid(at("sweep.samples"), "samples >= 1 is required");
  if (!(c.sweep.skip_radius > 0.0)) invalid(at("sweep.skip_radius"), "skip radius must be positive");
  if (c.output.precision < 6 || c.output.precision > 17) invalid(at("output.precision"), "precision must lie in 6..17");
  if (c.solve.bcs.empty()) invalid(at("solve.bc"), "at least one boundary condition is required");
  if (!(c.solve.h > 0.0)) invalid(at("solve.h"), "mesh size must be positive");
  if (c.solve.M < 1) invalid(at("solve.M"), "truncation must be positive");
  if (c.solve.order < 2) invalid(at("solve.order"), "quadrature order must be at least 2");
  if (c.has_source && !(c.source.z0 < c.source.z1)) invalid(at("source.z1"), "z0 < z1 is required");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void require_geometry(const RunConfig& c) {
  if (c.ends.empty()) throw ConfigError("missing section 'geometry' (expected e.g. geometry.kind = rectangle)", 0, "geometry.kind");
}

CrossSection build_cross_section(const GeometryConfig& g, double mesh_size) {
  const std::optional<Backend> backend =
      g.backend == "fem" ? std::optional<Backend>(Backend::fem) : std::optional<Backend>(Backend::analytic);
  if (g.kind == "rectangle") return CrossSection::rectangle(g.a, g.b, backend, mesh_size);
  if (g.kind == "disc") return CrossSection::disc(g.radius, backend, mesh_size);
  if (g.mesh.empty()) throw ConfigError("geometry.mesh: a mesh path is required for kind = mesh", 0, "geometry.mesh");
  return CrossSection::from_mesh(read_mesh_file(g.mesh));
}

SeparableStep make_step(const JunctionConfig& j) {
  SeparableStep s{j.a1, j.a2, j.offset, j.b};
  validate(s);
  return s;
}

}  // namespace wg
