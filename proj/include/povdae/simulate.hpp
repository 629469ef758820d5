#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "povdae/sysmodel.hpp"

namespace povdae {

struct GaussianWhite {
  double mean = 0.0;
  double variance = 1.0;
};

// Random binary sequence of +/- amplitude; a new sign is drawn every
// ceil(1 / band) samples, band in (0, 1].
struct Prbs {
  double amplitude = 1.0;
  double band = 1.0;
};

// 0 before `time`, `height` from `time` on. Time counts from the first
// simulated step, burn-in included.
struct Step {
  std::size_t time = 0;
  double height = 1.0;
};

struct ExternalSamples {
  std::vector<double> samples;
};

using SignalGenerator = std::variant<GaussianWhite, Prbs, Step, ExternalSamples>;

struct SourceSignalSpec {
  std::size_t variable = 0;
  SignalGenerator generator = GaussianWhite{};
  std::uint64_t seed_offset = 0;
};

struct Trajectory {
  Eigen::MatrixXd data;  // M x N_total
  std::vector<std::string> names;
};

struct MeasurementSet {
  Eigen::MatrixXd data;  // M x N_total
  std::vector<std::string> names;
  std::vector<double> true_sigmas;
  std::vector<double> snr;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t default_burn_in = 500;

// Unit-variance white noise on every variable that is not an equation output.
std::vector<SourceSignalSpec> default_sources(const LtiDaeSystem& system);

// Zero initial conditions; the first `burn_in` steps are simulated and dropped.
Trajectory simulate_noise_free(const LtiDaeSystem& system, const std::vector<SourceSignalSpec>& sources,
                               std::size_t n_total, std::size_t burn_in, std::uint64_t seed);

// sigma_i = sqrt(var(x_i) / snr_i) with var the unbiased sample variance of the trajectory.
MeasurementSet add_noise(const Trajectory& trajectory, const std::vector<double>& snr, std::uint64_t seed);

// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace povdae
