#pragma once

// Accuracy and recall of phase estimates against a known plan.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spat/config.hpp"
#include "spat/fcd_model.hpp"

namespace spat {

/// Fraction of pairs with |pred - truth| <= k. Throws DomainError on a length
/// mismatch or empty input.
double acc_k(std::span<const double> preds, std::span<const double> truths, double k);

/// Fraction of estimates that are not recalled. 0 for an empty list.
double recall(std::span<const PhaseEstimate> estimates);

struct ScoreReport {
  double acc3 = 0.0;
  double acc5 = 0.0;
  double recall = 0.0;
  std::size_t n_cases = 0;
  std::size_t n_scored = 0;
  std::vector<double> residuals;  // pred - truth, one per scored case
};

/// Cases are (intersection, approach, slice) for every approach in the truth
/// plans and every evaluation slice. A case is matched to the estimate whose
/// period contains the slice midpoint. Cycle accuracy is scored wherever a cycle
/// was estimated; red accuracy only where the estimate was confirmed.
struct EvaluationReport {
  ScoreReport cycle;
  ScoreReport red;
};

EvaluationReport evaluate(std::span<const PhaseEstimate> estimates, std::span<const SignalPlanTruth> truth,
                          const EvalConfig& cfg = {});

/// Aligned text table, one row per metric group.
std::string format_report_table(const EvaluationReport& report);

}  // namespace spat
