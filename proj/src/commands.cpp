#include "lsqcolor/cli.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lsqcolor/estimators.hpp"
#include "lsqcolor/io.hpp"
#include "lsqcolor/matched_filter.hpp"
#include "lsqcolor/spectral.hpp"

namespace lsqcolor::cli {

using nlohmann::json;

namespace {

json to_json(cplx v) { return json::array({v.real(), v.imag()}); }

json to_json(const CVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Writes to --out when given, else to `out`.
void emit(const RunConfig& config, std::ostream& out, const std::string& text) {
  if (config.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(config.out_path, std::ios::binary);
  if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + config.out_path + "'");
  f << text;
}

SampledSignal load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open data file '" + path + "'");
  return read_dataset_csv(in, path);
}

NoiseModel load_noise(const RunConfig& config, double dt, std::size_t n) {
  if (config.noise.empty()) throw Error(ErrorKind::ParseError, "--noise is required");
  const auto spec = parse_noise_spec(load_text(config.noise), dt, n);
  return NoiseModel(spec, dt, n > 0 ? n - 1 : 0);
}

struct SyntheticSetup {
  ModelSpec spec;
  DesignMatrix design;
  CVector x_true;
  double dt;
  std::size_t n;
};

SyntheticSetup load_synthetic(const RunConfig& config, bool need_truth) {
  if (config.model.empty()) throw Error(ErrorKind::ParseError, "--model is required");
  auto spec = parse_model_spec(load_text(config.model));
  if (!spec.n || !spec.dt)
    throw Error(ErrorKind::ParseError, "model spec needs 'n' and 'dt' for synthetic runs");
  auto design = build_design_matrix(spec.basis, Eigen::Index(*spec.n), *spec.dt);
  CVector x(design.cols());
  if (need_truth) {
    if (spec.x_true.size() != std::size_t(design.cols()))
      throw Error(ErrorKind::DimensionMismatch, "x_true must have one entry per basis function");
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = spec.x_true[std::size_t(i)];
  }
  const double dt = *spec.dt;
  const std::size_t n = *spec.n;
  return {std::move(spec), std::move(design), std::move(x), dt, n};
}

std::size_t scaled_grid(double factor, std::size_t length) {
  return std::size_t(std::ceil(factor * double(length)));
}

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands{"fit", "simulate", "compare", "mismatch-scan"};
  static const std::vector<std::string> methods{"ols", "gls", "gls-spectral", "matched"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw Error(ErrorKind::ParseError, "unknown command '" + c.command + "'");
  if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
    throw Error(ErrorKind::ParseError, "unknown method '" + c.method + "'");
  if (c.format != "json" && c.format != "csv")
    throw Error(ErrorKind::ParseError, "format must be json or csv");
  if (!(c.grid_factor >= 2.0)) throw Error(ErrorKind::ParseError, "grid factor must be >= 2");
  if (!(c.pad_factor >= 0.0)) throw Error(ErrorKind::ParseError, "pad factor must be >= 0");
  if (c.trials < 1) throw Error(ErrorKind::ParseError, "trials must be >= 1");
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidBasis:
    case ErrorKind::DimensionMismatch:
      return kInputError;
    default:
      return kNumericalError;
  }
}

/// Runs body(trial) for trial in [0, trials) across worker threads.
template <typename Body>
void parallel_trials(std::size_t trials, unsigned workers, Body body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = unsigned(std::min<std::size_t>(workers, trials));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < trials; t += workers) body(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct SampleMoments {
  CVector mean;
  CMatrix covariance;
};

SampleMoments moments(const std::vector<CVector>& xs) {
  const auto p = xs.front().size();
  SampleMoments m{CVector::Zero(p), CMatrix::Zero(p, p)};
  for (const auto& x : xs) m.mean += x;
  m.mean /= double(xs.size());
  for (const auto& x : xs) {
    const CVector d = x - m.mean;
    m.covariance += d * d.adjoint();
  }
  m.covariance /= double(xs.size() - 1);
  return m;
}

}  // namespace

int cmd_fit(const RunConfig& config, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (config.data_path.empty()) throw Error(ErrorKind::ParseError, "--data is required");
  if (config.model.empty()) throw Error(ErrorKind::ParseError, "--model is required");
  const auto data = load_dataset(config.data_path);
  const auto spec = parse_model_spec(load_text(config.model));
  const auto n = std::size_t(data.size());
  const auto j = build_design_matrix(spec.basis, data.size(), data.dt(), data.origin_index());

  Estimate est;
  if (config.method == "ols") {
    est = ols(j, data);
    if (!config.noise.empty()) {
      const auto model = load_noise(config, data.dt(), n);
      est.covariance = model.silent() ? CMatrix::Zero(j.cols(), j.cols())
                                      : ols_covariance_time(j, build_covariance(model, data.size()));
    }
  } else if (config.method == "gls") {
    const auto model = load_noise(config, data.dt(), n);
    est = gls_time(j, data, build_covariance(model, data.size()));
  } else if (config.method == "gls-spectral") {
    const auto model = load_noise(config, data.dt(), n);
    const long pad = std::lround(config.pad_factor * double(n));
    est = gls_spectral(j, data, model, pad, scaled_grid(config.grid_factor, n + 2 * std::size_t(pad)));
  } else {
    if (j.cols() != 1)
      throw Error(ErrorKind::DimensionMismatch, "matched filtering fits exactly one template");
    const auto model = load_noise(config, data.dt(), n);
    const auto filter = build_matched_filter(ZeroExtendedSequence::from_design(j), model,
                                             scaled_grid(config.grid_factor, n), 0.0, std::nullopt,
                                             j.labels().front());
    est.method = Method::MatchedFilter;
    est.x_star = CVector::Constant(1, apply_filter(filter, data));
    est.covariance = CMatrix::Constant(1, 1, filter.gain);
    est.condition = {1.0, "matched_filter"};
    est.residual_norm = (data.values() - j.entries() * est.x_star).norm();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::vector<double> se;
  if (est.covariance)
    for (Eigen::Index i = 0; i < est.covariance->rows(); ++i)
      se.push_back(std::sqrt(std::max(0.0, (*est.covariance)(i, i).real())));

  std::ostringstream os;
  if (config.format == "csv") {
    os << "param,label,re,im,std_error\n";
    for (Eigen::Index i = 0; i < est.x_star.size(); ++i)
      os << i << ',' << j.labels()[std::size_t(i)] << ',' << fmt(est.x_star(i).real()) << ','
         << fmt(est.x_star(i).imag()) << ',' << (se.empty() ? "" : fmt(se[std::size_t(i)])) << '\n';
  } else {
    json r;
    r["method"] = config.method;
    r["labels"] = j.labels();
    r["n"] = n;
    r["dt"] = data.dt();
    r["x_star"] = to_json(est.x_star);
    if (est.covariance) {
      r["covariance"] = to_json(*est.covariance);
      r["standard_errors"] = se;
    }
    r["residual_norm"] = est.residual_norm;
    r["condition"] = {{"condition_number", est.condition.condition_number},
                      {"solve_path", est.condition.solve_path}};
    r["timing_seconds"] = seconds;
    os << r.dump(2) << '\n';
  }
  emit(config, out, os.str());
  return kOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  if (config.out_path.empty()) throw Error(ErrorKind::ParseError, "simulate needs --out");
  const auto setup = load_synthetic(config, true);
  const auto model = load_noise(config, setup.dt, setup.n);
  const auto noise = synthesize_noise(model, Eigen::Index(setup.n), config.seed);
  const SampledSignal m(setup.dt, setup.design.entries() * setup.x_true + noise.values());

  std::ostringstream csv;
  write_dataset_csv(csv, m);
  emit(config, out, csv.str());

  json side;
  side["x_true"] = to_json(setup.x_true);
  side["labels"] = setup.design.labels();
  side["seed"] = config.seed;
  side["n"] = setup.n;
  side["dt"] = setup.dt;
  side["noise"] = json::parse(noise_spec_to_json(model.spec()));
  std::ofstream f(config.out_path + ".json", std::ios::binary);
  if (!f) throw Error(ErrorKind::ParseError, "cannot write sidecar for '" + config.out_path + "'");
  f << side.dump(2) << '\n';
  return kOk;
}

int cmd_compare(const RunConfig& config, std::ostream& out) {
  if (config.trials < 100) throw Error(ErrorKind::ParseError, "compare needs --trials >= 100");
  const auto setup = load_synthetic(config, true);
  const auto model = load_noise(config, setup.dt, setup.n);
  const auto omega = build_covariance(model, Eigen::Index(setup.n));
  const NoiseSynthesizer synth(model, Eigen::Index(setup.n));
  const CVector signal = setup.design.entries() * setup.x_true;

  std::vector<CVector> x_ols(config.trials), x_gls(config.trials);
  parallel_trials(config.trials, config.workers, [&](std::size_t t) {
    const auto e = synth.draw(config.seed, t);
    const SampledSignal m(setup.dt, signal + e.values());
    x_ols[t] = ols(setup.design, m).x_star;
    x_gls[t] = gls_time(setup.design, m, omega).x_star;
  });

  const CMatrix v_ols = ols_covariance_time(setup.design, omega);
  const auto probe = gls_time(setup.design, SampledSignal(setup.dt, signal), omega);
  const CMatrix v_gls = *probe.covariance;
  const double scale = std::max(1.0, v_ols.cwiseAbs().maxCoeff());
  const bool loewner = loewner_leq(v_gls, v_ols, 1e-9 * scale);

  struct Row {
    std::string method;
    SampleMoments mom;
    CMatrix predicted;
  };
  const std::vector<Row> rows{{"ols", moments(x_ols), v_ols}, {"gls", moments(x_gls), v_gls}};

  std::ostringstream os;
  if (config.format == "csv") {
    os << "method,param,label,x_true_re,x_true_im,mean_re,mean_im,bias_re,bias_im,bias_se,"
          "empirical_var,predicted_var,max_cov_rel_error,loewner_gls_le_ols\n";
    for (const auto& r : rows) {
      const double cov_err = (r.mom.covariance - r.predicted).cwiseAbs().maxCoeff() /
                             r.predicted.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < setup.x_true.size(); ++i) {
        const cplx bias = r.mom.mean(i) - setup.x_true(i);
        const double pv = r.predicted(i, i).real();
        os << r.method << ',' << i << ',' << setup.design.labels()[std::size_t(i)] << ','
           << fmt(setup.x_true(i).real()) << ',' << fmt(setup.x_true(i).imag()) << ','
           << fmt(r.mom.mean(i).real()) << ',' << fmt(r.mom.mean(i).imag()) << ','
           << fmt(bias.real()) << ',' << fmt(bias.imag()) << ','
           << fmt(std::sqrt(pv / double(config.trials))) << ','
           << fmt(r.mom.covariance(i, i).real()) << ',' << fmt(pv) << ',' << fmt(cov_err) << ','
           << (loewner ? "true" : "false") << '\n';
      }
    }
  } else {
    json j;
    j["trials"] = config.trials;
    j["seed"] = config.seed;
    j["loewner_gls_le_ols"] = loewner;
    for (const auto& r : rows) {
      j["methods"][r.method] = {{"bias", to_json(CVector(r.mom.mean - setup.x_true))},
                                {"empirical_covariance", to_json(r.mom.covariance)},
                                {"predicted_covariance", to_json(r.predicted)}};
    }
    os << j.dump(2) << '\n';
  }
  emit(config, out, os.str());
  return kOk;
}

int cmd_mismatch_scan(const RunConfig& config, std::ostream& out) {
  if (config.perturbation.empty()) throw Error(ErrorKind::ParseError, "--perturbation is required");
  if (config.epsilons.empty()) throw Error(ErrorKind::ParseError, "need at least one epsilon");
  const auto setup = load_synthetic(config, false);
  if (setup.design.cols() != 1)
    throw Error(ErrorKind::DimensionMismatch, "mismatch scan uses a single template");
  const auto model = load_noise(config, setup.dt, setup.n);
  const auto w = parse_perturbation(load_text(config.perturbation), model);
  const auto g = ZeroExtendedSequence::from_design(setup.design);
  const auto grid = scaled_grid(config.grid_factor, setup.n);

  std::vector<MismatchResult> results;
  for (double eps : config.epsilons) results.push_back(psd_mismatch_variance(g, model, w, eps, grid));

  std::optional<double> slope;
  if (results.size() >= 2) {
    std::vector<double> measured;
    for (const auto& r : results) measured.push_back(r.measured_rel_excess);
    if (std::all_of(measured.begin(), measured.end(), [](double v) { return v > 0.0; }))
      slope = loglog_slope(config.epsilons, measured);
  }

  std::ostringstream os;
  if (config.format == "csv") {
    os << "epsilon,measured_rel_excess,predicted_rel_excess,v_used,v_true\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      os << fmt(config.epsilons[i]) << ',' << fmt(r.measured_rel_excess) << ','
         << fmt(r.predicted_rel_excess) << ',' << fmt(r.v_used) << ',' << fmt(r.v_true) << '\n';
    }
    if (slope) os << "# loglog_slope=" << fmt(*slope) << '\n';
  } else {
    json j;
    j["rows"] = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      json row = {{"epsilon", config.epsilons[i]},
                  {"measured_rel_excess", r.measured_rel_excess},
                  {"predicted_rel_excess", r.predicted_rel_excess},
                  {"v_used", r.v_used},
                  {"v_true", r.v_true}};
      if (r.large_epsilon) row["warning"] = "epsilon above 0.3; second-order expansion unreliable";
      j["rows"].push_back(row);
    }
    if (slope) j["loglog_slope"] = *slope;
    os << j.dump(2) << '\n';
  }
  emit(config, out, os.str());
  return kOk;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    if (config.command == "fit") return cmd_fit(config, out);
    if (config.command == "simulate") return cmd_simulate(config, out);
    if (config.command == "compare") return cmd_compare(config, out);
    return cmd_mismatch_scan(config, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace lsqcolor::cli
