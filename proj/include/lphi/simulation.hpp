#pragma once

#include <cstdint>
#include <vector>

#include "lphi/estimation.hpp"
#include "lphi/report.hpp"

namespace lphi {

enum class StartRule { mle, min_l2 };

struct SimulationConfig {
  MixtureSpec mixture = contaminated_normal(0.1, 5.0);
  ModelPtr model = normal_location(1.0);
  std::size_t n = 50;
  int replications = 1000;
  std::uint64_t seed = 1;
  std::vector<Tuning> grid;
  Vector target = Vector::Zero(1);
  StartRule start = StartRule::mle;
  QuadratureSpec q;
  int threads = 1;

  void validate() const;
  Json to_json() const;
};

// Row/column labels of a tuning in a (β, γ) table; the DPD and MLE sit in the γ = 0 column.
std::pair<std::string, std::string> table_position(const Tuning& t);

// Replication r draws its sample from stream (seed, r) in every cell.
ReportTable simulate_mse_table(const SimulationConfig& config);

// ARE percentages; γ = 0 gives the DPD at α = β.
ReportTable are_table(const ParametricModel& m, const Vector& theta, const std::vector<double>& betas,
                      const std::vector<double>& gammas, const QuadratureSpec& q = {}, int threads = 1);

// Rows are y, columns are one series per tuning pair (and per parameter when p > 1).
ReportTable influence_curve_export(const ParametricModel& m, const Vector& theta, const std::vector<TuningPair>& pairs,
                                   const std::vector<double>& ys, const QuadratureSpec& q = {});

}  // namespace lphi
