#include "spat/eval.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "spat/error.hpp"

namespace spat {

double acc_k(std::span<const double> preds, std::span<const double> truths, double k) {
  if (preds.size() != truths.size()) throw DomainError("acc_k needs paired lists of equal length");
  if (preds.empty()) throw DomainError("acc_k of an empty list");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (std::abs(preds[i] - truths[i]) <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double recall(std::span<const PhaseEstimate> estimates) {
  if (estimates.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& e : estimates) ok += e.valid ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(estimates.size());
}

namespace {

void finish(ScoreReport& r, const std::vector<double>& preds, const std::vector<double>& truths) {
  r.n_scored = preds.size();
  r.recall = r.n_cases ? static_cast<double>(r.n_scored) / static_cast<double>(r.n_cases) : 0.0;
  if (!preds.empty()) {
    r.acc3 = acc_k(preds, truths, 3.0);
    r.acc5 = acc_k(preds, truths, 5.0);
  }
  for (std::size_t i = 0; i < preds.size(); ++i) r.residuals.push_back(preds[i] - truths[i]);
}

}  // namespace

EvaluationReport evaluate(std::span<const PhaseEstimate> estimates, std::span<const SignalPlanTruth> truth,
                          const EvalConfig& cfg) {
  std::map<std::tuple<std::string, Approach>, std::vector<const PhaseEstimate*>> by_approach;
  for (const auto& e : estimates) by_approach[{e.intersection_id, e.approach}].push_back(&e);

  EvaluationReport report;
  std::vector<double> cycle_pred, cycle_true, red_pred, red_true;
  for (const auto& plan : truth) {
    std::map<Approach, bool> approaches;
    for (const auto& p : plan.periods) {
      for (const auto& [a, red] : p.red_s) approaches[a] = true;
    }
    for (const auto& [approach, unused] : approaches) {
      const auto it = by_approach.find({plan.intersection_id, approach});
      for (auto s = cfg.from_s; s + cfg.slice_s <= cfg.to_s; s += cfg.slice_s) {
        const auto mid = s + cfg.slice_s / 2;
        const auto& period = plan.period_at(mid);
        const auto red_it = period.red_s.find(approach);
        if (red_it == period.red_s.end()) continue;
        ++report.cycle.n_cases;
        ++report.red.n_cases;
        if (it == by_approach.end()) continue;
        const PhaseEstimate* match = nullptr;
        for (const auto* e : it->second) {
          if (mid >= e->period_start_s && mid < e->period_end_s) {
            match = e;
            break;
          }
        }
        if (!match) continue;
        if (match->cycle_s > 0) {
          cycle_pred.push_back(match->cycle_s);
          cycle_true.push_back(period.cycle_s);
        }
        if (match->valid) {
          red_pred.push_back(match->red_s);
          red_true.push_back(red_it->second);
        }
      }
    }
  }
  finish(report.cycle, cycle_pred, cycle_true);
  finish(report.red, red_pred, red_true);
  return report;
}

std::string format_report_table(const EvaluationReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-8s %7s %7s %7s %8s %8s\n", "metric", "ACC-3", "ACC-5", "recall", "scored",
                "cases");
  out += line;
  for (const auto& [name, r] : {std::pair{"cycle", &report.cycle}, std::pair{"red", &report.red}}) {
    std::snprintf(line, sizeof line, "%-8s %7.3f %7.3f %7.3f %8zu %8zu\n", name, r->acc3, r->acc5, r->recall,
                  r->n_scored, r->n_cases);
    out += line;
  }
  return out;
}

}  // namespace spat
