#include "mbkdv/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace mbkdv {

nlohmann::json field_to_json(const SpectralField& f) {
  nlohmann::json modes = nlohmann::json::array();
  for (int k = 1; k <= f.n_max(); ++k) modes.push_back({k, f[k].real(), f[k].imag()});
  return {{"n_max", f.n_max()}, {"modes", std::move(modes)}};
}

SpectralField field_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n_max") || !j.contains("modes"))
    throw std::invalid_argument("field JSON needs \"n_max\" and \"modes\"");
  const int n_max = j.at("n_max").get<int>();
  std::vector<std::pair<int, Complex>> entries;
  for (const auto& m : j.at("modes")) {
    if (!m.is_array() || m.size() != 3) throw std::invalid_argument("field JSON mode entries are [k, re, im]");
    const int k = m[0].get<int>();
    if (k <= 0) throw std::invalid_argument("field JSON lists k > 0 only");
    entries.emplace_back(k, Complex(m[1].get<double>(), m[2].get<double>()));
  }
  return make_field(n_max, entries);
}

nlohmann::json pair_to_json(const SpectralPair& p) {
  return {{"u", field_to_json(p.u)},
          {"v", field_to_json(p.v)},
          {"gauge", p.gauge == Gauge::Physical ? "physical" : "interaction"},
          {"t_ref", p.t_ref}};
}

SpectralPair pair_from_json(const nlohmann::json& j) {
  Gauge g = Gauge::Interaction;
  if (j.contains("gauge")) {
    const auto name = j.at("gauge").get<std::string>();
    if (name == "physical") g = Gauge::Physical;
    else if (name != "interaction") throw std::invalid_argument("unknown gauge tag: " + name);
  }
  return SpectralPair(field_from_json(j.at("u")), field_from_json(j.at("v")), g, j.value("t_ref", 0.0));
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace mbkdv
