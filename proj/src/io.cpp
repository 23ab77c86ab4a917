#include "lsqcolor/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace lsqcolor {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string(what) + ": " + e.what());
  }
}

cplx json_complex(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  if (v.is_string())
    if (auto c = parse_complex(v.get<std::string>())) return *c;
  throw Error(ErrorKind::ParseError, "expected a number, [re, im] pair or complex literal, got " + v.dump());
}

std::vector<std::pair<double, double>> json_points(const json& pts, const char* what) {
  if (!pts.is_array() || pts.empty())
    throw Error(ErrorKind::InvalidArgument, std::string(what) + ": 'points' must be a non-empty array");
  std::vector<std::pair<double, double>> out;
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw Error(ErrorKind::InvalidArgument, std::string(what) + ": each point must be [frequency, value]");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

std::optional<cplx> parse_complex(std::string_view text) {
  auto s = trim(text);
  if (s.empty()) return std::nullopt;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = trim(s.substr(1, s.size() - 2));
  if (s.back() != 'j' && s.back() != 'i') {
    if (auto re = parse_double(s)) return cplx(*re, 0.0);
    return std::nullopt;
  }
  s.remove_suffix(1);
  // split at the last sign that is not an exponent sign
  std::size_t split = std::string_view::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  std::string_view re_part, im_part = s;
  if (split != std::string_view::npos) {
    re_part = s.substr(0, split);
    im_part = s.substr(split);
  }
  if (im_part == "+" || im_part == "-" || im_part.empty())
    im_part = im_part == "-" ? "-1" : "1";
  const auto im = parse_double(im_part);
  const auto re = re_part.empty() ? std::optional<double>(0.0) : parse_double(re_part);
  if (!re || !im) return std::nullopt;
  return cplx(*re, *im);
}

std::string format_complex(cplx v) {
  std::ostringstream os;
  os << std::setprecision(17) << v.real();
  if (v.imag() != 0.0) os << (std::signbit(v.imag()) ? "" : "+") << v.imag() << "j";
  return os.str();
}

SampledSignal read_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> times;
  std::vector<cplx> values;
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorKind::ParseError, source + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
      throw fail("expected two comma-separated fields, got '" + std::string(row) + "'");
    const auto t_text = trim(row.substr(0, comma));
    const auto v_text = trim(row.substr(comma + 1));
    if (!header_seen) {
      header_seen = true;
      if (t_text == "t" && v_text == "value") continue;
      throw fail("missing 't,value' header");
    }
    const auto t = parse_double(t_text);
    if (!t || !std::isfinite(*t)) throw fail("bad time '" + std::string(t_text) + "'");
    const auto v = parse_complex(v_text);
    if (!v || !std::isfinite(v->real()) || !std::isfinite(v->imag()))
      throw fail("bad value '" + std::string(v_text) + "'");
    times.push_back(*t);
    values.push_back(*v);
  }
  if (!header_seen) throw Error(ErrorKind::ParseError, source + ": empty dataset");
  if (times.size() < 2) throw Error(ErrorKind::ParseError, source + ": need at least two samples");
  const double dt = (times.back() - times.front()) / double(times.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorKind::ParseError, source + ": times must increase");
  const double origin = std::round(times[0] / dt);
  const double tol = 1e-9 * dt;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double expected = (origin + double(k)) * dt;
    if (std::abs(times[k] - expected) > tol * std::max(1.0, std::abs(origin + double(k)))) {
      std::ostringstream os;
      os << source << ": sample " << k + 1 << " at t=" << times[k]
         << " is off the uniform grid (expected " << expected << ")";
      throw Error(ErrorKind::ParseError, os.str());
    }
  }
  CVector v(Eigen::Index(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) v(Eigen::Index(k)) = values[k];
  return SampledSignal(dt, std::move(v), long(origin));
}

void write_dataset_csv(std::ostream& out, const SampledSignal& m) {
  out << "t,value\n";
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    std::ostringstream t;
    t << std::setprecision(17) << m.time(k);
    out << t.str() << ',' << format_complex(m.values()(k)) << '\n';
  }
}

std::string load_text(const std::string& path_or_inline) {
  const auto s = trim(path_or_inline);
  if (!s.empty() && (s.front() == '{' || s.front() == '[')) return std::string(s);
  std::ifstream in(path_or_inline);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path_or_inline + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PsdSpec parse_noise_spec(std::string_view json_text, double dt, std::size_t n) {
  const json j = parse_json(json_text, "noise spec");
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw Error(ErrorKind::InvalidArgument, "noise spec needs a string 'type'");
  const auto type = j["type"].get<std::string>();
  PsdSpec spec;
  if (type == "white") {
    if (j.contains("sigma")) {
      const double sigma = field_or(j, "sigma", 1.0);
      if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "white sigma must be >= 0");
      spec = white_from_sigma(sigma, dt);
    } else {
      spec = psd::White{field_or(j, "level", 1.0)};
    }
  } else if (type == "power_law") {
    auto p = power_law(field_or(j, "amplitude", 1.0), field_or(j, "exponent", -1.0), dt, n);
    p.f_min = field_or(j, "f_min", p.f_min);
    spec = p;
  } else if (type == "tabulated") {
    if (!j.contains("points")) throw Error(ErrorKind::InvalidArgument, "tabulated noise spec needs 'points'");
    spec = psd::Tabulated{json_points(j["points"], "tabulated noise spec")};
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown noise type '" + type + "'");
  }
  validate_psd(spec);
  return spec;
}

std::string noise_spec_to_json(const PsdSpec& spec) {
  json j;
  if (auto* w = std::get_if<psd::White>(&spec)) {
    j = {{"type", "white"}, {"level", w->level}};
  } else if (auto* p = std::get_if<psd::PowerLaw>(&spec)) {
    j = {{"type", "power_law"}, {"amplitude", p->amplitude}, {"exponent", p->exponent}, {"f_min", p->f_min}};
  } else {
    const auto& t = std::get<psd::Tabulated>(spec);
    json pts = json::array();
    for (const auto& [f, s] : t.points) pts.push_back({f, s});
    j = {{"type", "tabulated"}, {"points", pts}};
  }
  return j.dump();
}

ModelSpec parse_model_spec(std::string_view json_text) {
  const json j = parse_json(json_text, "model spec");
  if (!j.is_object() || !j.contains("basis") || !j["basis"].is_array() || j["basis"].empty())
    throw Error(ErrorKind::InvalidBasis, "model spec needs a non-empty 'basis' array");
  ModelSpec model;
  for (const auto& b : j["basis"]) {
    if (!b.is_object() || !b.contains("type"))
      throw Error(ErrorKind::InvalidBasis, "each basis entry needs a 'type'");
    const auto type = b["type"].get<std::string>();
    try {
      if (type == "constant") {
        model.basis.push_back(basis::Constant{b.contains("value") ? json_complex(b["value"]) : cplx(1.0)});
      } else if (type == "polynomial") {
        model.basis.push_back(basis::Polynomial{b.value("degree", 1)});
      } else if (type == "sinusoid") {
        model.basis.push_back(basis::Sinusoid{b.at("frequency").get<double>(), b.value("phase", 0.0)});
      } else if (type == "complex_exponential") {
        model.basis.push_back(
            basis::ComplexExponential{b.at("frequency").get<double>(), b.value("phase", 0.0)});
      } else if (type == "tabulated") {
        basis::Tabulated tab;
        for (const auto& v : b.at("samples")) tab.samples.push_back(json_complex(v));
        tab.label = b.value("label", std::string("tabulated"));
        model.basis.push_back(std::move(tab));
      } else {
        throw Error(ErrorKind::InvalidBasis, "unknown basis type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidBasis, "basis '" + type + "': " + e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError) throw Error(ErrorKind::InvalidBasis, e.what());
      throw;
    }
  }
  if (j.contains("x_true"))
    for (const auto& v : j["x_true"]) model.x_true.push_back(json_complex(v));
  if (j.contains("dt")) model.dt = j["dt"].get<double>();
  if (j.contains("n")) model.n = j["n"].get<std::size_t>();
  return model;
}

PsdFunction parse_perturbation(std::string_view json_text, const NoiseModel& model) {
  const json j = parse_json(json_text, "perturbation spec");
  if (!j.is_object() || !j.contains("type"))
    throw Error(ErrorKind::InvalidArgument, "perturbation spec needs a 'type'");
  const auto type = j["type"].get<std::string>();
  const double scale = field_or(j, "scale", 1.0);
  const auto s = model.psd_function();
  if (type == "proportional") return [s, scale](double f) { return scale * s(f); };
  if (type == "cosine") {
    const double cycles = field_or(j, "cycles", 1.0);
    const double dt = model.dt();
    return [s, scale, cycles, dt](double f) {
      return scale * s(f) * std::cos(2.0 * std::numbers::pi * cycles * f * dt);
    };
  }
  if (type == "tabulated") {
    if (!j.contains("points")) throw Error(ErrorKind::InvalidArgument, "tabulated perturbation needs 'points'");
    psd::Tabulated table{json_points(j["points"], "tabulated perturbation")};
    for (std::size_t i = 1; i < table.points.size(); ++i)
      if (!(table.points[i].first > table.points[i - 1].first))
        throw Error(ErrorKind::InvalidArgument, "perturbation frequencies must increase");
    // same interpolation as a tabulated PSD, but values may be negative
    return [table, scale](double f) {
      const auto& pts = table.points;
      const double x = pts.front().first >= 0.0 ? std::abs(f) : f;
      if (x <= pts.front().first) return scale * pts.front().second;
      if (x >= pts.back().first) return scale * pts.back().second;
      std::size_t i = 1;
      while (pts[i].first < x) ++i;
      const double u = (x - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
      return scale * ((1.0 - u) * pts[i - 1].second + u * pts[i].second);
    };
  }
  throw Error(ErrorKind::InvalidArgument, "unknown perturbation type '" + type + "'");
}

}  // namespace lsqcolor
