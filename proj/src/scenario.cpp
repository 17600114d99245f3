#include "isac/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace isac {

namespace {

std::string at_line(const std::string& source, const YAML::Mark& mark) {
  if (mark.line < 0) return source;
  return source + ":" + std::to_string(mark.line + 1);
}

template <typename T>
T read_scalar(const YAML::Node& node, const std::string& key, const std::string& source) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(at_line(source, node.Mark()) + ": invalid value for '" + key + "'");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid configuration: " + what);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double ScenarioConfig::total_power_mw() const { return dbm_to_linear(total_power_dbm); }
double ScenarioConfig::bs_noise_mw() const { return dbm_to_linear(bs_noise_dbm); }
double ScenarioConfig::user_noise_mw() const { return dbm_to_linear(user_noise_dbm); }
double ScenarioConfig::sinr_threshold_linear() const { return db_to_linear(sinr_threshold_db); }
double ScenarioConfig::similarity_radius_mw() const {
  return similarity_threshold.value_or(similarity_coeff * total_power_mw());
}

void ScenarioConfig::validate() const {
  require(num_tx_antennas >= 1, "num_tx_antennas must be positive");
  require(num_rx_antennas >= 0, "num_rx_antennas must be positive");
  require(num_users >= 0, "num_users must be non-negative");
  require(num_users <= num_tx_antennas, "num_users must not exceed num_tx_antennas");
  auto angle_ok = [](double a) { return std::isfinite(a) && a >= -90.0 && a < 90.0; };
  require(angle_ok(target_angle_deg), "target_angle_deg must lie in [-90, 90)");
  for (double a : clutter_angles_deg) require(angle_ok(a), "clutter angles must lie in [-90, 90)");
  require(std::isfinite(clutter_power_per_source) && clutter_power_per_source > 0.0,
          "clutter_power_per_source must be positive");
  require(std::isfinite(target_power) && target_power > 0.0, "target_power must be positive");
  require(std::isfinite(total_power_dbm), "total_power_dbm must be finite");
  require(std::isfinite(bs_noise_dbm), "bs_noise_dbm must be finite");
  require(std::isfinite(user_noise_dbm), "user_noise_dbm must be finite");
  require(std::isfinite(sinr_threshold_db), "sinr_threshold_db must be finite");
  require(similarity_coeff >= 0.0 && similarity_coeff <= 2.0, "similarity_coeff must lie in [0, 2]");
  require(std::isfinite(taper_width) && taper_width >= 0.0, "taper_width must be non-negative");
  require(convergence_tol > 0.0, "convergence_tol must be positive");
  require(block_length >= 1, "block_length must be positive");
  require(std::isfinite(element_spacing_over_wavelength) && element_spacing_over_wavelength > 0.0,
          "element_spacing_over_wavelength must be positive");
  if (similarity_threshold)
    require(*similarity_threshold >= 0.0, "similarity_threshold must be non-negative");
  require(max_inner_iterations >= 1, "max_inner_iterations must be positive");
  require(max_outer_iterations >= 1, "max_outer_iterations must be positive");
  require(solver_eps > 0.0, "solver_eps must be positive");
  require(solver_max_iters >= 1, "solver_max_iters must be positive");
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(at_line(source, e.mark) + ": " + e.msg);
  }
  ScenarioConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError(at_line(source, root.Mark()) + ": expected a mapping");

  using Setter = std::function<void(const YAML::Node&, const std::string&)>;
  auto integer = [&](int& field) {
    return Setter([&field, &source](const YAML::Node& n, const std::string& k) {
      field = read_scalar<int>(n, k, source);
    });
  };
  auto real = [&](double& field) {
    return Setter([&field, &source](const YAML::Node& n, const std::string& k) {
      field = read_scalar<double>(n, k, source);
    });
  };
  const std::map<std::string, Setter> setters{
      {"num_tx_antennas", integer(cfg.num_tx_antennas)},
      {"num_rx_antennas", integer(cfg.num_rx_antennas)},
      {"num_users", integer(cfg.num_users)},
      {"target_angle_deg", real(cfg.target_angle_deg)},
      {"clutter_angles_deg",
       [&](const YAML::Node& n, const std::string& k) {
         if (!n.IsSequence())
           throw ConfigError(at_line(source, n.Mark()) + ": '" + k + "' must be a list");
         cfg.clutter_angles_deg.clear();
         for (const auto& item : n) cfg.clutter_angles_deg.push_back(read_scalar<double>(item, k, source));
       }},
      {"clutter_power_per_source", real(cfg.clutter_power_per_source)},
      {"target_power", real(cfg.target_power)},
      {"total_power_dbm", real(cfg.total_power_dbm)},
      {"bs_noise_dbm", real(cfg.bs_noise_dbm)},
      {"user_noise_dbm", real(cfg.user_noise_dbm)},
      {"sinr_threshold_db", real(cfg.sinr_threshold_db)},
      {"similarity_coeff", real(cfg.similarity_coeff)},
      {"taper_width", real(cfg.taper_width)},
      {"convergence_tol", real(cfg.convergence_tol)},
      {"block_length", integer(cfg.block_length)},
      {"element_spacing_over_wavelength", real(cfg.element_spacing_over_wavelength)},
      {"rng_seed",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.rng_seed = read_scalar<std::uint64_t>(n, k, source);
       }},
      {"reference_waveform",
       [&](const YAML::Node& n, const std::string& k) {
         const auto v = read_scalar<std::string>(n, k, source);
         if (v == "chirp")
           cfg.reference_waveform = ReferenceWaveform::chirp;
         else if (v == "orthogonal")
           cfg.reference_waveform = ReferenceWaveform::orthogonal;
         else
           throw ConfigError(at_line(source, n.Mark()) + ": '" + k +
                             "' must be 'chirp' or 'orthogonal'");
       }},
      {"similarity_threshold",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.similarity_threshold = read_scalar<double>(n, k, source);
       }},
      {"max_inner_iterations", integer(cfg.max_inner_iterations)},
      {"max_outer_iterations", integer(cfg.max_outer_iterations)},
      {"solver_eps", real(cfg.solver_eps)},
      {"solver_max_iters", integer(cfg.solver_max_iters)},
  };

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError(at_line(source, kv.first.Mark()) + ": unknown key '" + key + "'");
    it->second(kv.second, key);
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string to_yaml(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "num_tx_antennas: " << cfg.num_tx_antennas << "\n"
     << "num_rx_antennas: " << cfg.rx() << "\n"
     << "num_users: " << cfg.num_users << "\n"
     << "target_angle_deg: " << format_double(cfg.target_angle_deg) << "\n"
     << "clutter_angles_deg: [";
  for (size_t i = 0; i < cfg.clutter_angles_deg.size(); ++i)
    os << (i ? ", " : "") << format_double(cfg.clutter_angles_deg[i]);
  os << "]\n"
     << "clutter_power_per_source: " << format_double(cfg.clutter_power_per_source) << "\n"
     << "target_power: " << format_double(cfg.target_power) << "\n"
     << "total_power_dbm: " << format_double(cfg.total_power_dbm) << "\n"
     << "bs_noise_dbm: " << format_double(cfg.bs_noise_dbm) << "\n"
     << "user_noise_dbm: " << format_double(cfg.user_noise_dbm) << "\n"
     << "sinr_threshold_db: " << format_double(cfg.sinr_threshold_db) << "\n"
     << "similarity_coeff: " << format_double(cfg.similarity_coeff) << "\n"
     << "taper_width: " << format_double(cfg.taper_width) << "\n"
     << "convergence_tol: " << format_double(cfg.convergence_tol) << "\n"
     << "block_length: " << cfg.block_length << "\n"
     << "element_spacing_over_wavelength: " << format_double(cfg.element_spacing_over_wavelength)
     << "\n"
     << "rng_seed: " << cfg.rng_seed << "\n"
     << "reference_waveform: "
     << (cfg.reference_waveform == ReferenceWaveform::chirp ? "chirp" : "orthogonal") << "\n";
  if (cfg.similarity_threshold)
    os << "similarity_threshold: " << format_double(*cfg.similarity_threshold) << "\n";
  os << "max_inner_iterations: " << cfg.max_inner_iterations << "\n"
     << "max_outer_iterations: " << cfg.max_outer_iterations << "\n"
     << "solver_eps: " << format_double(cfg.solver_eps) << "\n"
     << "solver_max_iters: " << cfg.solver_max_iters << "\n";
  return os.str();
}

CVector steering_vector(int n, double spacing, double theta_deg) {
  const double phase = 2.0 * std::numbers::pi * spacing * std::sin(theta_deg * std::numbers::pi / 180.0);
  CVector a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int m = 0; m < n; ++m) a(m) = std::polar(scale, phase * m);
  return a;
}

CVector steering_tx(const ScenarioConfig& cfg, double theta_deg) {
  return steering_vector(cfg.tx(), cfg.element_spacing_over_wavelength, theta_deg);
}

CVector steering_rx(const ScenarioConfig& cfg, double theta_deg) {
  return steering_vector(cfg.rx(), cfg.element_spacing_over_wavelength, theta_deg);
}

CMatrix response_matrix(const ScenarioConfig& cfg, double theta_deg) {
  return steering_rx(cfg, theta_deg) * steering_tx(cfg, theta_deg).adjoint();
}

ChannelSet draw_channels(const ScenarioConfig& cfg, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ChannelSet set;
  set.h.resize(cfg.tx(), cfg.num_users);
  for (int k = 0; k < cfg.num_users; ++k)
    for (int m = 0; m < cfg.tx(); ++m) {
      const double re = normal(rng);
      const double im = normal(rng);
      set.h(m, k) = Complex(re, im);
    }
  return set;
}

CMatrix BeamformerSet::combined() const {
  const Eigen::Index rows = std::max(w_c.rows(), w_s.rows());
  CMatrix w(rows, w_c.cols() + w_s.cols());
  if (w_c.cols() > 0) w.leftCols(w_c.cols()) = w_c;
  if (w_s.cols() > 0) w.rightCols(w_s.cols()) = w_s;
  return w;
}

HermitianMatrix BeamformerSet::covariance() const {
  const CMatrix w = combined();
  return HermitianMatrix::hermitian_part(w * w.adjoint());
}

HermitianMatrix reference_covariance(const ScenarioConfig& cfg) {
  const int m = cfg.tx();
  const double pt = cfg.total_power_mw();
  if (cfg.reference_waveform == ReferenceWaveform::orthogonal)
    return (pt / m) * HermitianMatrix::identity(m);
  CVector x0(m);
  for (int i = 0; i < m; ++i)
    x0(i) = std::polar(std::sqrt(pt / m), std::numbers::pi * i * i / static_cast<double>(m));
  return HermitianMatrix::outer(x0);
}

SymbolBlock draw_symbols(const ScenarioConfig& cfg, int num_users, int num_sensing, Rng& rng) {
  const int n = cfg.block_length;
  if (n < num_sensing)
    throw std::invalid_argument("block_length must be at least the number of sensing streams");
  SymbolBlock block;
  block.comm.resize(num_users, n);
  const double amp = 1.0 / std::sqrt(2.0);
  for (int t = 0; t < n; ++t)
    for (int k = 0; k < num_users; ++k) {
      const auto bits = rng();
      block.comm(k, t) = Complex(bits & 1 ? amp : -amp, bits & 2 ? amp : -amp);
    }
  // Rows of the N-point DFT are exactly orthogonal with squared norm N.
  block.sensing.resize(num_sensing, n);
  for (int i = 0; i < num_sensing; ++i)
    for (int t = 0; t < n; ++t) {
      const long long idx = (static_cast<long long>(i) * t) % n;
      block.sensing(i, t) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(idx) / n);
    }
  return block;
}

CMatrix synthesize_block(const BeamformerSet& w, const SymbolBlock& symbols) {
  if (w.w_c.cols() != symbols.comm.rows() || w.w_s.cols() != symbols.sensing.rows())
    throw std::invalid_argument("beamformer and symbol dimensions disagree");
  CMatrix x = CMatrix::Zero(std::max(w.w_c.rows(), w.w_s.rows()), symbols.sensing.cols());
  if (w.w_c.cols() > 0) x += w.w_c * symbols.comm;
  if (w.w_s.cols() > 0) x += w.w_s * symbols.sensing;
  return x;
}

CMatrix synthesize_block(const ScenarioConfig& cfg, const BeamformerSet& w, Rng& rng) {
  if (cfg.block_length < cfg.tx())
    throw std::invalid_argument("block_length must be at least num_tx_antennas");
  if ((w.w_c.cols() > 0 && w.w_c.rows() != cfg.tx()) || (w.w_s.cols() > 0 && w.w_s.rows() != cfg.tx()))
    throw std::invalid_argument("beamformer rows must equal num_tx_antennas");
  const auto symbols = draw_symbols(cfg, static_cast<int>(w.w_c.cols()), static_cast<int>(w.w_s.cols()), rng);
  return synthesize_block(w, symbols);
}

}  // namespace isac
