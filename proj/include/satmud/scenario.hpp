#ifndef SATMUD_SCENARIO_HPP
#define SATMUD_SCENARIO_HPP

#include <vector>

#include "satmud/common.hpp"

namespace satmud {

enum class FadingModel { none, rayleigh, rician };

// Problem dimensions and link-budget parameters of one uplink scenario:
// K ground users spread symbols over N resource elements, received by J
// cooperating satellites.
struct ScenarioConfig {
  int num_users = 32;           // K
  int num_res = 12;             // N
  int num_sats = 8;             // J
  int modulation_order = 8;     // M, power of two
  double carrier_freq_hz = 2e9;
  double bandwidth_hz = 15e6;
  double orbit_altitude_m = 600e3;
  double eirp_dbw = -7.0;
  double g_over_t_dbk = -33.6;
  double noise_density_dbm_hz = -173.0;
  FadingModel fading_model = FadingModel::rician;
  double rician_k_db = 10.0;
  int signature_column_weight = 2;  // d_v
  uint64_t rng_seed = 1;
  // Layout of the surrogate geometry: users uniform in a ground disc,
  // satellites on an along-track line at orbit altitude.
  double disc_radius_m = 500e3;
  double sat_spacing_m = 300e3;

  void validate() const;  // throws ConfigError
};

// Sparse spreading signatures, one unit-norm column per user.
struct SignatureMatrix {
  int num_res = 0;   // N
  int num_users = 0; // K
  std::vector<cplx> s;  // row-major N x K
  std::vector<std::vector<int>> occupancy;  // F(n): users with s[n][k] != 0
  int max_collision_degree = 0;             // d_f = max_n |F(n)|

  cplx at(int n, int k) const { return s[static_cast<size_t>(n) * num_users + k]; }
  cplx& at(int n, int k) { return s[static_cast<size_t>(n) * num_users + k]; }
};

// Channel coefficients h[n][k][j] = g[n][k][j] / D(d[k][j]) together with the
// slant ranges and the per-RE noise power.
struct ChannelTensor {
  CTensor3 h;            // N x K x J
  Mat distances;         // K x J, meters
  double sigma2 = 0.0;   // linear watts per RE
};

struct Scenario {
  ScenarioConfig config;
  SignatureMatrix signatures;
  ChannelTensor channel;
};

// Free-space amplitude loss divisor D(d): 20*log10(D) = FSPL(dB)
// = 20*log10(d_km) + 20*log10(f_GHz) + 92.45. Throws std::domain_error on
// non-positive inputs.
double path_loss(double distance_m, double carrier_freq_hz);

// Slant ranges d[k][j]. Users drawn uniformly in the ground disc, satellites
// at nested along-track offsets 0, +s, -s, +2s, ... so growing J keeps the
// existing satellites in place.
Mat generate_geometry(const ScenarioConfig& config);

// Regular sparse signatures: column weight exactly d_v, unit column norms,
// row degrees balanced to within 1, +-1 phases.
SignatureMatrix generate_signatures(const ScenarioConfig& config);

// Fading gains scaled by the link budget and path loss; sigma2 from the
// noise density split evenly across REs. Per-(k,j) substreams keep the draw
// stable when K or J grows.
ChannelTensor generate_channels(const ScenarioConfig& config, const Mat& distances);

// Full pipeline: validate config, geometry, signatures, channels.
Scenario make_scenario(const ScenarioConfig& config);

}  // namespace satmud

#endif  // SATMUD_SCENARIO_HPP
