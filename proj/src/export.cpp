#include "waveguide/export.hpp"

#include <charconv>

#include "json.hpp"

namespace wg {

using nlohmann::json;

std::string format_number(double x, int precision) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, precision);
  (void)ec;
  return std::string(buf, p);
}

double round_to(double x, int precision) {
  const std::string s = format_number(x, precision);
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::te, Family::tm, Family::alpha_scalar, Family::beta_scalar, Family::constant_special,
                   Family::general})
    if (s == to_string(f)) return f;
  throw DomainError("unknown family '" + s + "'");
}

namespace {

json channels_to_json(const std::vector<Channel>& cs, int precision) {
  json a = json::array();
  for (const auto& c : cs)
    a.push_back({{"end", c.end + 1},
                 {"family", to_string(c.family)},
                 {"mode", c.mode},
                 {"lambda", round_to(c.lambda, precision)},
                 {"label", c.label}});
  return a;
}

std::vector<Channel> channels_from_json(const json& a) {
  std::vector<Channel> cs;
  for (const auto& c : a)
    cs.push_back(Channel{c.at("end").get<int>() - 1, family_from_string(c.at("family").get<std::string>()),
                         c.at("mode").get<int>(), c.at("lambda").get<double>(), c.at("label").get<std::string>()});
  return cs;
}

}  // namespace

std::string smatrix_to_json(const ScatteringMatrix& s, int precision) {
  json entries = json::array();
  for (int i = 0; i < s.entries.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < s.entries.cols(); ++j)
      row.push_back({round_to(s.entries(i, j).real(), precision), round_to(s.entries(i, j).imag(), precision)});
    entries.push_back(row);
  }
  json doc = {{"k", round_to(s.k, precision)},
              {"kind", s.kind},
              {"dimension", s.size()},
              {"truncation", s.truncation},
              {"rcond", round_to(s.rcond, precision)},
              {"unitarity_residual", round_to(s.unitarity_residual, precision)},
              {"rows", channels_to_json(s.rows, precision)},
              {"cols", channels_to_json(s.cols, precision)},
              {"entries", entries}};
  return doc.dump(2) + "\n";
}

ScatteringMatrix smatrix_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    ScatteringMatrix s;
    s.k = doc.at("k").get<double>();
    s.kind = doc.at("kind").get<std::string>();
    s.truncation = doc.at("truncation").get<int>();
    s.rcond = doc.at("rcond").get<double>();
    s.unitarity_residual = doc.at("unitarity_residual").get<double>();
    s.rows = channels_from_json(doc.at("rows"));
    s.cols = channels_from_json(doc.at("cols"));
    const int n = doc.at("dimension").get<int>();
    const json& e = doc.at("entries");
    if (static_cast<int>(e.size()) != n) throw DomainError("smatrix: entry rows do not match the dimension");
    s.entries.resize(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(e[i].size()) != n) throw DomainError("smatrix: entry columns do not match the dimension");
      for (int j = 0; j < n; ++j) s.entries(i, j) = Complex(e[i][j].at(0).get<double>(), e[i][j].at(1).get<double>());
    }
    return s;
  } catch (const json::exception& ex) {
    throw DomainError(std::string("smatrix: malformed document: ") + ex.what());
  }
}

std::string smatrix_to_csv_rows(const ScatteringMatrix& s, int precision) {
  std::string out;
  const std::string k = format_number(s.k, precision);
  for (int i = 0; i < s.entries.rows(); ++i)
    for (int j = 0; j < s.entries.cols(); ++j)
      out += k + "," + std::to_string(i) + "," + std::to_string(j) + "," +
             format_number(s.entries(i, j).real(), precision) + "," + format_number(s.entries(i, j).imag(), precision) +
             "\n";
  return out;
}

}  // namespace wg
