#pragma once

/**
 * @file config.hpp
 * @brief Experiment configuration: a TOML-style text format holding the
 *        agent model, gains, graph family, schedule and initial conditions.
 */

#include "consensus/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace consensus::config {

struct ExperimentConfig {
    // [model]
    Matrix A;
    Matrix B;
    std::optional<Matrix> C;
    std::optional<Matrix> Q;

    // [gains]
    std::optional<Matrix> K;
    std::optional<Matrix> H;
    std::optional<std::vector<double>> gamma;
    double margin = 0.25;

    // [family] + one sub-table per graph, in file order
    double alpha_floor = 1e-6;
    std::vector<std::pair<std::string, Matrix>> graphs;

    // [schedule]
    std::uint64_t seed = 1;
    double dwell_low = 0.5;
    double dwell_high = 1.0;
    double horizon = 30.0;
    std::optional<std::vector<double>> switch_times;  // explicit schedule
    std::optional<std::vector<int>> modes;            // 1-based mode indices

    // [initial]
    Matrix w0;
    std::optional<Matrix> eta0;
    double eta_scale = 0.0;
    std::optional<Matrix> what0;

    // [run]
    std::string engine = "ode";  // modal | ode | both
    double step = 0.0;           // 0 = automatic
    bool strict_jordan = true;
    std::string out_dir = "out";

    int n() const { return static_cast<int>(A.rows()); }
    int agent_count() const { return static_cast<int>(w0.rows()); }

    /// Dimensional and value checks; throws ConfigError naming the field.
    void validate() const;

    std::string to_toml() const;
    static ExperimentConfig from_toml(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace consensus::config
