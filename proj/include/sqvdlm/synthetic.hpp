#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "sqvdlm/dlm.hpp"
#include "sqvdlm/series.hpp"

namespace sqvdlm {

struct SimConfig {
    DlmParams params;
    std::size_t replicates = 11;
    std::size_t months = 117;
    MonthStamp start{2004, 1};
    std::uint64_t seed = 1;

    /// Throws DomainError: months >= 2, replicates >= 1, variances >= 0 and finite.
    void validate() const;
};

struct Simulation {
    ObservationPanel panel;
    Matrix latent;             // months x 2, true x_t
    Matrix state_noise;        // months x 2, w_t
    Matrix observation_noise;  // months x (a+1), v_t
};

/// Runs the replicate model forward. Each noise series has its own generator
/// stream keyed by (seed, stream), so adding replicates never changes the
/// draws of existing ones. Stream ids: 0, 1 state noise; 2 target; 3.. replicates.
Simulation simulate(const SimConfig& config);

/// Standard normal draws from a stream: 64-bit Mersenne Twister seeded with
/// seed_seq{seed_lo, seed_hi, stream}, mapped through the inverse normal CDF so
/// the sequence does not depend on the standard library's distribution code.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t stream);
    double operator()();

private:
    std::mt19937_64 engine_;
};

struct Scenario {
    std::string name;
    SimConfig config;
    std::string note;
};

/// Published DLM1 point estimates with a March-peak / September-trough
/// seasonal pattern; mirrors data/scenarios/paper_like.json.
Scenario paper_like_scenario();
/// Monthly effects C[m] = s(m) - s(m-1) with s(m) = amplitude * cos(2 pi (m - 3) / 12).
Eigen::Matrix<double, 1, 12> march_peak_effects(double amplitude);

Scenario parse_scenario_json(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario_file(const std::string& path);

}  // namespace sqvdlm
