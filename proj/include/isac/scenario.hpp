#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/hermitian.hpp"

namespace isac {

using Rng = std::mt19937_64;

/// Invalid or unreadable scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReferenceWaveform {
  chirp,       // x0_m = sqrt(Pt/M) exp(j pi m^2 / M), rank-one R0
  orthogonal,  // R0 = (Pt/M) I
};

struct ScenarioConfig {
  int num_tx_antennas = 16;
  int num_rx_antennas = 0;  // 0: same as num_tx_antennas
  int num_users = 2;
  double target_angle_deg = 0.0;
  std::vector<double> clutter_angles_deg{50.0, -26.0, -27.0, -28.0, -29.0, -30.0};
  double clutter_power_per_source = 1.0;
  double target_power = 1.0;
  double total_power_dbm = 43.0;
  double bs_noise_dbm = -80.0;
  double user_noise_dbm = -80.0;
  double sinr_threshold_db = 5.0;
  double similarity_coeff = 1.0;
  double taper_width = 0.03;
  double convergence_tol = 1e-3;
  int block_length = 1024;
  double element_spacing_over_wavelength = 0.5;
  std::uint64_t rng_seed = 0;

  ReferenceWaveform reference_waveform = ReferenceWaveform::chirp;
  /// Similarity radius in mW; defaults to similarity_coeff * Pt.
  std::optional<double> similarity_threshold;
  int max_inner_iterations = 30;
  int max_outer_iterations = 50;
  double solver_eps = 1e-6;
  int solver_max_iters = 50000;

  int tx() const { return num_tx_antennas; }
  int rx() const { return num_rx_antennas > 0 ? num_rx_antennas : num_tx_antennas; }
  double total_power_mw() const;
  double bs_noise_mw() const;
  double user_noise_mw() const;
  double sinr_threshold_linear() const;
  double similarity_radius_mw() const;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

/// Parses YAML text; keys are the ScenarioConfig field names and missing
/// keys keep their defaults. Errors carry `source:line`.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);
/// Canonical YAML rendering, stable across runs (used for hashing).
std::string to_yaml(const ScenarioConfig& cfg);

double dbm_to_linear(double dbm);
double db_to_linear(double db);
double linear_to_db(double linear);

/// Half-wavelength-style ULA response, unit norm:
/// a_m = exp(j 2 pi d m sin(theta)) / sqrt(n).
CVector steering_vector(int n, double spacing, double theta_deg);
CVector steering_tx(const ScenarioConfig& cfg, double theta_deg);
CVector steering_rx(const ScenarioConfig& cfg, double theta_deg);
/// A(theta) = a_r a_t^H.
CMatrix response_matrix(const ScenarioConfig& cfg, double theta_deg);

/// Column k is the channel h_k from the transmitter to user k.
struct ChannelSet {
  CMatrix h;
  int num_users() const { return static_cast<int>(h.cols()); }
  CVector user(int k) const { return h.col(k); }
};

/// i.i.d. CN(0, 1) entries.
ChannelSet draw_channels(const ScenarioConfig& cfg, Rng& rng);

struct BeamformerSet {
  CMatrix w_c;  // M x K
  CMatrix w_s;  // M x M'
  CMatrix combined() const;
  HermitianMatrix covariance() const;
};

HermitianMatrix reference_covariance(const ScenarioConfig& cfg);

struct SymbolBlock {
  CMatrix comm;     // K x N QPSK symbols
  CMatrix sensing;  // M' x N orthogonal sensing waveforms
};

/// QPSK symbols and DFT-row sensing waveforms with (1/N) S S^H = I.
SymbolBlock draw_symbols(const ScenarioConfig& cfg, int num_users, int num_sensing, Rng& rng);
/// X = W_c S_c + W_s S_s (M x N).
CMatrix synthesize_block(const ScenarioConfig& cfg, const BeamformerSet& w, Rng& rng);
CMatrix synthesize_block(const BeamformerSet& w, const SymbolBlock& symbols);

}  // namespace isac
