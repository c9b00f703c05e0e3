#include "satmud/scenario.hpp"

#include <algorithm>
#include <numeric>

namespace satmud {

namespace {

constexpr double kBoltzmann = 1.380649e-23;  // J/K

bool is_power_of_two(int m) { return m >= 1 && (m & (m - 1)) == 0; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

void ScenarioConfig::validate() const {
  if (num_users < 1 || num_res < 1 || num_sats < 1)
    throw ConfigError("K, N, J must all be >= 1");
  if (modulation_order < 2 || !is_power_of_two(modulation_order))
    throw ConfigError("modulation_order must be a power of two >= 2");
  if (signature_column_weight < 1 || signature_column_weight > num_res)
    throw ConfigError("signature_column_weight must lie in [1, num_res]");
  if (carrier_freq_hz <= 0 || bandwidth_hz <= 0 || orbit_altitude_m <= 0)
    throw ConfigError("carrier_freq_hz, bandwidth_hz, orbit_altitude_m must be positive");
  if (disc_radius_m < 0 || sat_spacing_m < 0)
    throw ConfigError("disc_radius_m and sat_spacing_m must be non-negative");
}

double path_loss(double distance_m, double carrier_freq_hz) {
  if (distance_m <= 0 || carrier_freq_hz <= 0)
    throw std::domain_error("path_loss requires positive distance and frequency");
  const double fspl_db = 20.0 * std::log10(distance_m / 1e3) +
                         20.0 * std::log10(carrier_freq_hz / 1e9) + 92.45;
  return std::pow(10.0, fspl_db / 20.0);
}

Mat generate_geometry(const ScenarioConfig& config) {
  const int K = config.num_users;
  const int J = config.num_sats;

  // Along-track offsets 0, +1, -1, +2, -2, ... in units of sat_spacing_m.
  std::vector<double> sat_x(J);
  for (int j = 0; j < J; ++j) {
    const int step = (j + 1) / 2;
    sat_x[j] = (j % 2 == 1 ? +step : -step) * config.sat_spacing_m;
  }

  Mat d(K, J);
  for (int k = 0; k < K; ++k) {
    Rng rng(substream(config.rng_seed, 0x67656f6dULL, static_cast<uint64_t>(k)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r = config.disc_radius_m * std::sqrt(unif(rng));
    const double phi = 2.0 * M_PI * unif(rng);
    const double ux = r * std::cos(phi);
    const double uy = r * std::sin(phi);
    for (int j = 0; j < J; ++j) {
      const double dx = ux - sat_x[j];
      d(k, j) = std::sqrt(dx * dx + uy * uy +
                          config.orbit_altitude_m * config.orbit_altitude_m);
    }
  }
  return d;
}

SignatureMatrix generate_signatures(const ScenarioConfig& config) {
  const int N = config.num_res;
  const int K = config.num_users;
  const int dv = config.signature_column_weight;
  if (dv > N) throw ConfigError("signature column weight exceeds number of REs");

  Rng rng(substream(config.rng_seed, 0x7369676eULL));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SignatureMatrix sig;
  sig.num_res = N;
  sig.num_users = K;
  sig.s.assign(static_cast<size_t>(N) * K, cplx(0.0, 0.0));
  sig.occupancy.assign(N, {});

  std::vector<int> degree(N, 0);
  std::vector<int> order(N);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dv));
  for (int k = 0; k < K; ++k) {
    // Pick the d_v rows of least degree, randomizing ties.
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> key(N);
    for (int n = 0; n < N; ++n) key[n] = degree[n] + unif(rng);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return key[a] < key[b]; });
    for (int t = 0; t < dv; ++t) {
      const int n = order[t];
      const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
      sig.at(n, k) = cplx(sign * amp, 0.0);
      degree[n]++;
      sig.occupancy[n].push_back(k);
    }
  }
  for (int n = 0; n < N; ++n) {
    std::sort(sig.occupancy[n].begin(), sig.occupancy[n].end());
    sig.max_collision_degree =
        std::max(sig.max_collision_degree, static_cast<int>(sig.occupancy[n].size()));
  }
  return sig;
}

ChannelTensor generate_channels(const ScenarioConfig& config, const Mat& distances) {
  const int N = config.num_res;
  const int K = config.num_users;
  const int J = config.num_sats;

  // Link budget in amplitude terms: |h|^2 = EIRP * G_rx / FSPL with the
  // receive gain recovered from G/T and the system temperature implied by
  // the noise density.
  const double eirp_w = db_to_linear(config.eirp_dbw);
  const double n0_w_hz = db_to_linear(config.noise_density_dbm_hz - 30.0);
  const double t_sys_k = n0_w_hz / kBoltzmann;
  const double g_rx = db_to_linear(config.g_over_t_dbk) * t_sys_k;
  const double amp = std::sqrt(eirp_w * g_rx);

  ChannelTensor ch;
  ch.distances = distances;
  ch.sigma2 = n0_w_hz * config.bandwidth_hz / static_cast<double>(N);
  ch.h = CTensor3(N, K, J);

  const double kappa = db_to_linear(config.rician_k_db);
  const double los = std::sqrt(kappa / (kappa + 1.0));
  const double diffuse = std::sqrt(1.0 / (kappa + 1.0));

  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) {
      Rng rng(substream(config.rng_seed, 0x6661646550ULL,
                        static_cast<uint64_t>(k), static_cast<uint64_t>(j)));
      std::normal_distribution<double> nrm(0.0, 1.0);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double inv_d = amp / path_loss(distances(k, j), config.carrier_freq_hz);
      for (int n = 0; n < N; ++n) {
        cplx g;
        switch (config.fading_model) {
          case FadingModel::none:
            g = cplx(1.0, 0.0);
            break;
          case FadingModel::rayleigh: {
            const double re = nrm(rng), im = nrm(rng);
            g = cplx(re, im) / std::sqrt(2.0);
            break;
          }
          case FadingModel::rician: {
            const double phi = 2.0 * M_PI * unif(rng);
            const double re = nrm(rng), im = nrm(rng);
            g = los * cplx(std::cos(phi), std::sin(phi)) +
                diffuse * cplx(re, im) / std::sqrt(2.0);
            break;
          }
        }
        ch.h(n, k, j) = g * inv_d;
      }
    }
  }
  return ch;
}

Scenario make_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario sc;
  sc.config = config;
  sc.signatures = generate_signatures(config);
  sc.channel = generate_channels(config, generate_geometry(config));
  return sc;
}

}  // namespace satmud
