#include "waveguide/cli.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "waveguide/export.hpp"

namespace wg {

using nlohmann::json;

namespace {

std::vector<CrossSection> build_ends(const RunConfig& c) {
  require_geometry(c);
  std::vector<CrossSection> ends;
  for (const auto& g : c.ends) ends.push_back(build_cross_section(g, c.solve.h));
  return ends;
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) s += (s.empty() ? "" : ",") + c;
  return s + "\n";
}

// Thresholds relevant to the scattering problem described by the config.
std::vector<double> scatter_thresholds(const RunConfig& c) {
  const double k_max = c.sweep.k_end + c.sweep.skip_radius + 1.0;
  std::vector<double> t;
  if (c.junction.kind == "straight") {
    for (const auto& th : thresholds(build_ends(c), k_max)) t.push_back(th.k);
  } else {
    const SeparableStep s = make_step(c.junction);
    for (double a : {s.a1, s.a2})
      for (int n = 1; n * kPi / a <= k_max; ++n) t.push_back(n * kPi / a);
  }
  return t;
}

void require_junction(const RunConfig& c) {
  if (!c.has_junction)
    throw ConfigError("missing section 'junction' (expected e.g. junction.kind = straight)", 0, "junction.kind");
}

ScatteringMatrix scatter_at(const RunConfig& c, const std::vector<CrossSection>& ends, double k) {
  const std::string& fam = c.junction.family;
  if (c.junction.kind == "straight") {
    const StraightGuide g{ends.front(), c.junction.length};
    if (fam == "maxwell") return straight_smatrix(g, k, FamilyFilter::maxwell);
    if (fam == "scalar") return straight_smatrix(g, k, FamilyFilter::scalar);
    if (fam == "sigma")
      return assemble_sigma(straight_smatrix(g, k, FamilyFilter::maxwell), straight_smatrix(g, k, FamilyFilter::scalar));
    throw ConfigError("junction.family = " + fam + " needs junction.kind = step", 0, "junction.family");
  }
  const SeparableStep s = make_step(c.junction);
  const int M = c.solve.M;
  if (fam == "dirichlet") return step_smatrix(s, k, BoundaryCondition::dirichlet, M);
  if (fam == "neumann") return step_smatrix(s, k, BoundaryCondition::neumann, M);
  if (fam == "maxwell") return maxwell_step_smatrix(s, k, M);
  if (fam == "scalar") return scalar_step_smatrix(s, k, M);
  return assemble_sigma(maxwell_step_smatrix(s, k, M), scalar_step_smatrix(s, k, M));
}

// Runs f(i) for i in [0, n) on a small pool; the first exception (in index order) is rethrown.
template <class F>
void parallel_for(int n, F f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  const int workers = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'", 0, "output.path");
  f << text;
}

}  // namespace

std::vector<double> retained_frequencies(const RunConfig& c, std::vector<std::pair<double, double>>& skipped) {
  const auto th = scatter_thresholds(c);
  std::vector<double> keep;
  for (double k : c.sweep.points()) {
    double nearest = std::numeric_limits<double>::infinity();
    for (double t : th)
      if (std::abs(t - k) < std::abs(nearest - k)) nearest = t;
    if (std::abs(nearest - k) < c.sweep.skip_radius)
      skipped.emplace_back(k, nearest);
    else
      keep.push_back(k);
  }
  return keep;
}

std::string cmd_modes(const RunConfig& c) {
  const auto ends = build_ends(c);
  const int prec = c.output.precision;
  const bool csv = c.output.format == "csv";
  std::string text = csv ? "end,bc,index,mu,label,analytic_mu,relative_error\n" : "";
  json doc = {{"command", "modes"}, {"cutoff", c.solve.cutoff}, {"ends", json::array()}};
  for (std::size_t q = 0; q < ends.size(); ++q) {
    const CrossSection& cs = ends[q];
    const bool compare = cs.backend() == Backend::fem && c.ends[q].kind != "mesh";
    json end = {{"end", q + 1}, {"geometry", cs.describe()}, {"modes", json::array()}};
    for (auto bc : c.solve.bcs) {
      const auto pairs = helmholtz_eigs(cs, bc, c.solve.cutoff);
      std::vector<ScalarEigenpair> ref;
      if (compare) {
        GeometryConfig g = c.ends[q];
        g.backend = "analytic";
        ref = helmholtz_eigs(build_cross_section(g, c.solve.h), bc, 1.5 * c.solve.cutoff + 10.0);
      }
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double mu = pairs[i].mu();
        json row = {{"bc", to_string(bc)}, {"index", i}, {"mu", round_to(mu, prec)}, {"label", pairs[i].label()}};
        std::string amu, rel;
        if (compare && i < ref.size()) {
          const double r = ref[i].mu();
          const double e = std::abs(mu - r) / std::max(1.0, std::abs(r));
          row["analytic_mu"] = round_to(r, prec);
          row["relative_error"] = round_to(e, prec);
          amu = format_number(r, prec);
          rel = format_number(e, prec);
        }
        if (c.solve.nodal && pairs[i].nodal()) {
          json v = json::array();
          for (double x : *pairs[i].nodal()) v.push_back(round_to(x, prec));
          row["nodal"] = v;
        }
        end["modes"].push_back(row);
        text += csv_line({std::to_string(q + 1), to_string(bc), std::to_string(i), format_number(mu, prec),
                          pairs[i].label(), amu, rel});
      }
    }
    doc["ends"].push_back(end);
  }
  return csv ? text : doc.dump(2) + "\n";
}

std::string cmd_thresholds(const RunConfig& c) {
  const auto ends = build_ends(c);
  const int prec = c.output.precision;
  std::string text = "k,end,bc,multiplicity\n";
  json rows = json::array();
  for (const auto& t : thresholds(ends, c.sweep.k_end))
    for (const auto& s : t.sources) {
      rows.push_back({{"k", round_to(t.k, prec)},
                      {"end", s.end + 1},
                      {"bc", to_string(s.bc)},
                      {"multiplicity", s.multiplicity},
                      {"total_multiplicity", t.multiplicity}});
      text += csv_line({format_number(t.k, prec), std::to_string(s.end + 1), to_string(s.bc),
                        std::to_string(s.multiplicity)});
    }
  if (c.output.format == "csv") return text;
  return json{{"command", "thresholds"}, {"k_max", c.sweep.k_end}, {"thresholds", rows}}.dump(2) + "\n";
}

std::string cmd_ledger(const RunConfig& c) {
  const auto ends = build_ends(c);
  const int prec = c.output.precision;
  const ModeLedger L = build_ledger(ends, c.sweep.k_start);
  std::string text = "end,list,label,family,lambda,direction\n";
  json doc = {{"command", "ledger"},
              {"k", round_to(L.k, prec)},
              {"upsilon", L.upsilon},
              {"t_total", L.t_total},
              {"threshold_distance", round_to(L.threshold_distance, prec)},
              {"ends", json::array()}};
  for (std::size_t q = 0; q < L.ends.size(); ++q) {
    const EndLedger& E = L.ends[q];
    json end = {{"end", q + 1}, {"upsilon", E.upsilon}};
    auto waves = [&](const char* name, const std::vector<CylinderWave>& list) {
      json a = json::array();
      for (const auto& w : list) {
        a.push_back({{"label", w.label},
                     {"family", to_string(w.family)},
                     {"lambda", round_to(w.lambda, prec)},
                     {"direction", to_string(w.direction)}});
        text += csv_line({std::to_string(q + 1), name, w.label, to_string(w.family), format_number(w.lambda, prec),
                          to_string(w.direction)});
      }
      end[name] = a;
    };
    waves("e_incoming", E.e_incoming);
    waves("e_outgoing", E.e_outgoing);
    waves("g_incoming", E.g_incoming);
    waves("g_outgoing", E.g_outgoing);
    json ev = json::array();
    for (const auto& p : E.evanescent)
      ev.push_back({{"mu", round_to(p.mu(), prec)}, {"decay", round_to(p.lambda().imag(), prec)}});
    end["evanescent"] = ev;
    doc["ends"].push_back(end);
  }
  return c.output.format == "csv" ? text : doc.dump(2) + "\n";
}

std::string cmd_scatter(const RunConfig& c, const std::string& out_dir, std::ostream& log, bool verbose) {
  require_junction(c);
  std::vector<CrossSection> ends;
  if (c.junction.kind == "straight") ends = build_ends(c);
  std::vector<std::pair<double, double>> skipped;
  const auto ks = retained_frequencies(c, skipped);
  for (const auto& [k, t] : skipped)
    log << "notice: skipped k = " << format_number(k, 8) << " (threshold " << format_number(t, 8) << " within "
        << format_number(c.sweep.skip_radius, 6) << ")\n";
  if (ks.empty()) throw EmptyBandError("sweep band is empty after threshold skipping");

  const int n = static_cast<int>(ks.size());
  std::vector<ScatteringMatrix> results(n);
  parallel_for(n, [&](int i) { results[i] = scatter_at(c, ends, ks[i]); });

  const int prec = c.output.precision;
  std::string summary = "k,dimension,unitarity_residual,rcond\n";
  std::string trace = "k,i,j,re,im\n";
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  for (int i = 0; i < n; ++i) {
    const auto& s = results[i];
    summary += csv_line({format_number(s.k, prec), std::to_string(s.size()), format_number(s.unitarity_residual, prec),
                         format_number(s.rcond, prec)});
    if (verbose) log << "k = " << format_number(s.k, 8) << ": dimension " << s.size() << ", residual "
                     << format_number(s.unitarity_residual, 3) << "\n";
    if (out_dir.empty()) continue;
    if (c.output.format == "json") {
      char name[32];
      std::snprintf(name, sizeof name, "smatrix_%04d.json", i);
      write_file(std::filesystem::path(out_dir) / name, smatrix_to_json(s, prec));
    } else {
      trace += smatrix_to_csv_rows(s, prec);
    }
  }
  if (!out_dir.empty()) {
    write_file(std::filesystem::path(out_dir) / "residuals.csv", summary);
    if (c.output.format == "csv") write_file(std::filesystem::path(out_dir) / "trace.csv", trace);
  }
  return summary;
}

std::string cmd_radiate(const RunConfig& c) {
  const auto ends = build_ends(c);
  if (c.has_junction && c.junction.kind != "straight")
    throw ConfigError("radiate needs junction.kind = straight", 0, "junction.kind");
  if (!c.has_source) throw ConfigError("missing section 'source' (expected e.g. source.mode = 0)", 0, "source.mode");
  const double k = c.sweep.k_start;
  const StraightGuide guide{ends.front(), c.junction.length};
  const ModeLedger L = build_ledger({guide.cs}, k);
  const auto out = L.e_outgoing();
  if (c.source.mode < 0 || c.source.mode >= static_cast<int>(out.size()))
    throw ConfigError("source.mode = " + std::to_string(c.source.mode) + " but only " + std::to_string(out.size()) +
                          " outgoing Maxwell waves propagate",
                      0, "source.mode");
  const SourceField f = modal_source(out[c.source.mode].section, sin2_bump(c.source.z0, c.source.z1));
  const RadiationResult r = radiation_coefficients(f, guide, k, std::min(c.solve.order, 16));
  const int prec = c.output.precision;
  std::string text = "end,label,lambda,re,im,direct_re,direct_im\n";
  json ch = json::array();
  for (std::size_t j = 0; j < r.channels.size(); ++j) {
    const Channel& cj = r.channels[j];
    ch.push_back({{"end", cj.end + 1},
                  {"label", cj.label},
                  {"lambda", round_to(cj.lambda, prec)},
                  {"c", {round_to(r.coefficients[j].real(), prec), round_to(r.coefficients[j].imag(), prec)}},
                  {"direct", {round_to(r.direct[j].real(), prec), round_to(r.direct[j].imag(), prec)}}});
    text += csv_line({std::to_string(cj.end + 1), cj.label, format_number(cj.lambda, prec),
                      format_number(r.coefficients[j].real(), prec), format_number(r.coefficients[j].imag(), prec),
                      format_number(r.direct[j].real(), prec), format_number(r.direct[j].imag(), prec)});
  }
  if (c.output.format == "csv") return text;
  return json{{"command", "radiate"},
              {"k", round_to(k, prec)},
              {"length", round_to(guide.length, prec)},
              {"source_mode", out[c.source.mode].label},
              {"compatibility", round_to(r.compatibility, prec)},
              {"channels", ch}}
             .dump(2) + "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cylindrical waveguide modes, thresholds and scattering matrices"};
  app.require_subcommand(1, 1);
  std::string config_path, out_path;
  bool verbose = false;
  for (const char* name : {"modes", "thresholds", "ledger", "scatter", "radiate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Configuration file (section.key = value)")->required();
    sub->add_option("--out", out_path, "Output file (scatter: output directory)");
    sub->add_flag("--verbose", verbose, "Progress messages on stderr");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? status::ok : status::config_error;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const RunConfig c = load_config(config_path);
    const std::string path = out_path.empty() ? c.output.path : out_path;
    if (verbose) err << "running " << cmd << " with " << config_path << "\n";
    std::string text;
    if (cmd == "modes") text = cmd_modes(c);
    else if (cmd == "thresholds") text = cmd_thresholds(c);
    else if (cmd == "ledger") text = cmd_ledger(c);
    else if (cmd == "scatter") text = cmd_scatter(c, path, err, verbose);
    else text = cmd_radiate(c);
    if (path.empty() || cmd == "scatter")
      out << text;
    else
      write_file(path, text);
    return status::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what();
    if (!e.field().empty()) err << " [field " << e.field() << (e.line() > 0 ? ", line " + std::to_string(e.line()) : "") << "]";
    err << "\n";
    return status::config_error;
  } catch (const EmptyBandError& e) {
    err << "error: " << e.what() << "\n";
    return status::empty_band;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return status::solver_error;
  }
}

}  // namespace wg
