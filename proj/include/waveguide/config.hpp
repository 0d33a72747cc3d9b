#pragma once

#include <string>
#include <vector>

#include "waveguide/cross_section.hpp"
#include "waveguide/scattering.hpp"

namespace wg {

/// Malformed or invalid configuration; `line` is 0 when no single line is at fault.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line, std::string field)
      : Error(what), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

struct GeometryConfig {
  std::string kind = "rectangle";  // rectangle | disc | mesh
  double a = 1.0, b = 1.0, radius = 1.0;
  std::string mesh;                // path, for kind = mesh
  std::string backend = "analytic";  // analytic | fem
};

struct JunctionConfig {
  std::string kind = "straight";  // straight | step
  double length = 1.0;
  double a1 = 1.0, a2 = 2.0, offset = 0.0, b = 0.5;
  std::string family = "maxwell";  // maxwell | scalar | sigma | dirichlet | neumann
};

struct SolveConfig {
  std::vector<BoundaryCondition> bcs{BoundaryCondition::dirichlet, BoundaryCondition::neumann};
  double cutoff = 50.0;  // eigenvalue cutoff for the modes table
  double h = 0.05;       // fem mesh size
  int M = 40;            // step truncation
  int order = 24;        // quadrature order
  bool nodal = false;    // include fem nodal values in the modes export
};

struct SweepConfig {
  double k_start = 1.0;
  double k_end = 2.0;
  int samples = 1;
  double skip_radius = 1e-3;

  std::vector<double> points() const;
};

struct SourceConfig {
  int mode = 0;  // index into the outgoing Maxwell waves
  double z0 = 0.25, z1 = 0.75;
};

struct OutputConfig {
  std::string format = "json";  // json | csv
  std::string path;
  int precision = 12;
};

struct RunConfig {
  std::vector<GeometryConfig> ends;  // [geometry], [geometry2], ...
  bool has_junction = false;
  JunctionConfig junction;
  SolveConfig solve;
  SweepConfig sweep;
  bool has_source = false;
  SourceConfig source;
  OutputConfig output;
};

/// Parses `section.key = value` lines ('#' starts a comment). Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Throws ConfigError("missing section") when no geometry section was given.
void require_geometry(const RunConfig& c);

CrossSection build_cross_section(const GeometryConfig& g, double mesh_size);
SeparableStep make_step(const JunctionConfig& j);

}  // namespace wg
