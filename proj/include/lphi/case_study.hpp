#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lphi/dataset.hpp"
#include "lphi/report.hpp"
#include "lphi/tuning.hpp"

namespace lphi {

struct CaseStudyOptions {
  std::optional<std::filesystem::path> data_path;
  std::uint64_t seed = 1;
  QuadratureSpec q;
  int threads = 1;
  // Regression studies: the pair to fit, and whether to also run tuning selection.
  TuningPair pair{1.0, 0.9};
  bool tune_regression = false;
  int lms_subsets = 3000;
  AmseMatrices matrices = AmseMatrices::empirical;
  BetaRange beta_range = BetaRange::below_alpha_w;
  // Mosquito
  TuningPair test_pair{0.3, 0.05};
  double null_p = 0.5;
  std::size_t mc_draws = 1'000'000;

  Json to_json(const std::string& name) const;
};

const std::vector<std::string>& case_study_names();

// Design with an intercept column and the response, from a bundled regression dataset.
RegressionData regression_design(const Dataset& d);

Report run_case_study(const std::string& name, const CaseStudyOptions& options = {});

}  // namespace lphi
