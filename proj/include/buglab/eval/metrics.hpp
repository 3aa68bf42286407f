#pragma once

// Metrics for bug detection and repair. A detector prediction is scored
// per record along three axes:
//   joint  — the full prediction (location and rewrite, or NoBug) is right;
//   loc    — the location is right (clean records count when NoBug is chosen);
//   repair — the rewrite chosen at the *true* location is right (buggy only).
// Warning-style rates (DFW/DTW/FDR/DPr/DRe and their detect-and-repair
// counterparts TW/FW/Pr/Re) treat every non-NoBug prediction as a raised
// warning. The precision-recall curve sweeps a confidence threshold over
// records; confidence is 1 - p_loc(NoBug).

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "buglab/rewrite/rules.hpp"

namespace buglab {

struct EvalRecord {
  bool truth_nobug = true;
  RuleKind bug_kind = RuleKind::Identity;  // Identity for clean records
  bool predicted_nobug = true;
  bool loc_match = false;        // predicted location equals the true bug location
  bool rewrite_match = false;    // loc_match and the predicted rewrite equals truth
  bool repair_at_truth = false;  // best rewrite scored at the true location equals truth
  double confidence = 0.0;       // 1 - p_loc(NoBug)
};

struct KindCounts {
  long total = 0;
  long joint = 0;
  long loc = 0;
  long repair = 0;
};

struct MetricReport {
  long num_samples = 0;
  long num_buggy = 0;
  long dfw = 0;  // detection false warnings
  long dtw = 0;  // detection true warnings
  long tw = 0;   // detect-and-repair true warnings
  long fw = 0;   // detect-and-repair false warnings
  double fdr = 0.0;   // DFW / (DFW + DTW)
  double dpr = 0.0;   // 1 - FDR
  double dre = 0.0;   // DTW / num_buggy
  double racc = 0.0;  // correct rewrites at the true location / num_buggy
  double pr = 0.0;    // TW / (TW + FW)
  double re = 0.0;    // TW / num_buggy
  double joint_accuracy = 0.0;
  double loc_accuracy = 0.0;
  double repair_accuracy = 0.0;  // same numerator as racc, reported per buggy subset
  std::map<std::string, KindCounts> per_kind;
  std::vector<std::pair<double, double>> pr_curve;  // (recall, precision), recall ascending
  double pr_auc = 0.0;
};

namespace detail {

inline bool record_dtw(const EvalRecord& r) { return !r.truth_nobug && r.loc_match; }

inline bool record_dfw(const EvalRecord& r) { return !r.predicted_nobug && !record_dtw(r); }

inline bool record_tw(const EvalRecord& r) { return record_dtw(r) && r.rewrite_match; }

inline bool record_fw(const EvalRecord& r) {
  return record_dfw(r) || (!r.predicted_nobug && !r.rewrite_match);
}

inline bool record_joint(const EvalRecord& r) {
  return r.truth_nobug ? r.predicted_nobug : r.rewrite_match;
}

inline bool record_loc(const EvalRecord& r) {
  return r.truth_nobug ? r.predicted_nobug : r.loc_match;
}

}  // namespace detail

inline MetricReport compute_metrics(const std::vector<EvalRecord>& records) {
  MetricReport m;
  m.num_samples = static_cast<long>(records.size());
  long joint = 0, loc = 0, repair = 0;
  for (const EvalRecord& r : records) {
    if (!r.truth_nobug) ++m.num_buggy;
    if (detail::record_dtw(r)) ++m.dtw;
    if (detail::record_dfw(r)) ++m.dfw;
    if (detail::record_tw(r)) ++m.tw;
    if (detail::record_fw(r)) ++m.fw;
    if (detail::record_joint(r)) ++joint;
    if (detail::record_loc(r)) ++loc;
    if (!r.truth_nobug && r.repair_at_truth) ++repair;
    KindCounts& k = m.per_kind[rule_kind_name(r.bug_kind)];
    ++k.total;
    if (detail::record_joint(r)) ++k.joint;
    if (detail::record_loc(r)) ++k.loc;
    if (!r.truth_nobug && r.repair_at_truth) ++k.repair;
  }
  if (m.dfw + m.dtw > 0) m.fdr = static_cast<double>(m.dfw) / static_cast<double>(m.dfw + m.dtw);
  m.dpr = 1.0 - m.fdr;
  if (m.num_buggy > 0) {
    m.dre = static_cast<double>(m.dtw) / static_cast<double>(m.num_buggy);
    m.racc = static_cast<double>(repair) / static_cast<double>(m.num_buggy);
    m.re = static_cast<double>(m.tw) / static_cast<double>(m.num_buggy);
    m.repair_accuracy = m.racc;
  }
  if (m.tw + m.fw > 0) m.pr = static_cast<double>(m.tw) / static_cast<double>(m.tw + m.fw);
  if (m.num_samples > 0) {
    m.joint_accuracy = static_cast<double>(joint) / static_cast<double>(m.num_samples);
    m.loc_accuracy = static_cast<double>(loc) / static_cast<double>(m.num_samples);
  }

  // precision-recall sweep: at threshold t, records with confidence >= t keep
  // their prediction; the rest are treated as NoBug. Thresholds descend, so
  // recall is non-decreasing along the curve.
  if (m.num_buggy > 0) {
    std::vector<double> thresholds;
    for (const EvalRecord& r : records) thresholds.push_back(r.confidence);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    for (double t : thresholds) {
      long tw_t = 0, fw_t = 0;
      for (const EvalRecord& r : records) {
        if (r.predicted_nobug || r.confidence < t) continue;
        if (detail::record_tw(r))
          ++tw_t;
        else
          ++fw_t;
      }
      double recall = static_cast<double>(tw_t) / static_cast<double>(m.num_buggy);
      double precision =
          tw_t + fw_t > 0 ? static_cast<double>(tw_t) / static_cast<double>(tw_t + fw_t) : 1.0;
      m.pr_curve.push_back({recall, precision});
    }
    if (m.pr_curve.empty() || m.pr_curve.front().first > 0.0)
      m.pr_curve.insert(m.pr_curve.begin(), {0.0, m.pr_curve.empty() ? 1.0 : m.pr_curve.front().second});
    for (size_t i = 1; i < m.pr_curve.size(); ++i) {
      double dr = m.pr_curve[i].first - m.pr_curve[i - 1].first;
      m.pr_auc += dr * 0.5 * (m.pr_curve[i].second + m.pr_curve[i - 1].second);
    }
  }
  return m;
}

inline nlohmann::json report_to_json(const MetricReport& m) {
  nlohmann::json kinds = nlohmann::json::object();
  for (const auto& [name, k] : m.per_kind)
    kinds[name] = {{"total", k.total}, {"joint", k.joint}, {"loc", k.loc}, {"repair", k.repair}};
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [r, p] : m.pr_curve) curve.push_back({r, p});
  return {{"num_samples", m.num_samples},
          {"num_buggy", m.num_buggy},
          {"DFW", m.dfw},
          {"DTW", m.dtw},
          {"FDR", m.fdr},
          {"DPr", m.dpr},
          {"DRe", m.dre},
          {"RAcc", m.racc},
          {"TW", m.tw},
          {"FW", m.fw},
          {"Pr", m.pr},
          {"Re", m.re},
          {"joint_accuracy", m.joint_accuracy},
          {"loc_accuracy", m.loc_accuracy},
          {"repair_accuracy", m.repair_accuracy},
          {"per_kind", std::move(kinds)},
          {"pr_curve", std::move(curve)},
          {"pr_auc", m.pr_auc}};
}

inline std::string format_report(const MetricReport& m) {
  char buf[256];
  std::string out;
  auto row = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "  %-22s %8.4f\n", name, v);
    out += buf;
  };
  out += "samples: " + std::to_string(m.num_samples) +
         "  buggy: " + std::to_string(m.num_buggy) + "\n";
  out += "warnings: DTW=" + std::to_string(m.dtw) + " DFW=" + std::to_string(m.dfw) +
         " TW=" + std::to_string(m.tw) + " FW=" + std::to_string(m.fw) + "\n";
  row("FDR", m.fdr);
  row("DPr", m.dpr);
  row("DRe", m.dre);
  row("RAcc", m.racc);
  row("Pr", m.pr);
  row("Re", m.re);
  row("joint accuracy", m.joint_accuracy);
  row("loc accuracy", m.loc_accuracy);
  row("repair accuracy", m.repair_accuracy);
  row("PR-AUC", m.pr_auc);
  out += "  per kind (total/joint/loc/repair):\n";
  for (const auto& [name, k] : m.per_kind) {
    std::snprintf(buf, sizeof(buf), "    %-20s %5ld %5ld %5ld %5ld\n", name.c_str(), k.total,
                  k.joint, k.loc, k.repair);
    out += buf;
  }
  return out;
}

}  // namespace buglab
