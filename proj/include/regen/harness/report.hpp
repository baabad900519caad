//
// Copyright 2026 The Regen Concentration Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef REGEN_HARNESS_REPORT_HPP_
#define REGEN_HARNESS_REPORT_HPP_

// CSV and JSON writers. Doubles go out with 17 significant digits so that
// files round-trip and compare byte for byte across runs.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "regen/harness/experiment.hpp"

namespace regen::harness {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const char* fmt(bool b) { return b ? "true" : "false"; }

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline json params_json(const BoundParams& p) {
  json j = json::object();
  auto put = [&](const char* k, const auto& v) {
    if (v) j[k] = *v;
  };
  put("n", p.n);
  put("a", p.a);
  put("sigma_sq", p.sigma_sq);
  put("v_strong", p.v_strong);
  put("ez", p.ez);
  put("eta", p.eta);
  put("slack_delta", p.slack_delta);
  if (p.alpha) j["alpha"] = p.alpha->value();
  put("max_norm", p.max_norm);
  put("tau", p.tau);
  put("m", p.m);
  put("et2", p.et2);
  put("var_z1", p.var_z1);
  put("lipschitz", p.lipschitz);
  return j;
}

inline json constants_json(const ConstantLedger& ledger) {
  json j = json::object();
  for (const auto& [k, e] : ledger.snapshot()) {
    j[k] = {{"value", e.value}, {"calibrated", e.calibrated}};
  }
  return j;
}

inline json streams_json(std::uint64_t seed) {
  return {{"base", seed},
          {"main", static_cast<std::uint64_t>(Stream::kMain)},
          {"pilot", static_cast<std::uint64_t>(Stream::kPilot)},
          {"validation", static_cast<std::uint64_t>(Stream::kValidation)},
          {"auxiliary", static_cast<std::uint64_t>(Stream::kAuxiliary)}};
}

inline json rows_json(const std::vector<TailRow>& rows) {
  json a = json::array();
  for (const TailRow& r : rows) {
    a.push_back({{"t", r.t},
                 {"mc_estimate", r.mc_estimate},
                 {"mc_se", r.mc_se},
                 {"bound", r.bound},
                 {"dominated", r.dominated},
                 {"vacuous", r.vacuous}});
  }
  return a;
}

inline std::string tail_csv(const std::string& id, const std::vector<TailRow>& rows) {
  std::string out = "experiment_id,t,mc_estimate,mc_se,bound,dominated,vacuous\n";
  for (const TailRow& r : rows) {
    out += id + "," + fmt(r.t) + "," + fmt(r.mc_estimate) + "," + fmt(r.mc_se) + "," +
           fmt(r.bound) + "," + fmt(r.dominated) + "," + fmt(r.vacuous) + "\n";
  }
  return out;
}

inline std::string tail_csv(const TailReport& rep) {
  return tail_csv(rep.experiment_id, rep.rows);
}

inline json tail_json(const TailReport& rep) {
  return {{"experiment_id", rep.experiment_id},
          {"bound", rep.bound},
          {"side", rep.side},
          {"statistic", rep.statistic},
          {"reps", rep.reps},
          {"pilot_reps", rep.pilot_reps},
          {"seeds", streams_json(rep.seed)},
          {"params", params_json(rep.params.params)},
          {"param_sources", rep.params.sources},
          {"constants", constants_json(rep.ledger)},
          {"rows", rows_json(rep.rows)},
          {"warnings", rep.warnings},
          {"passed", rep.passed}};
}

// One row per grid point, training grid first.
inline std::string calibration_csv(const CalibrationReport& rep) {
  const std::string constants = csv_quote(constants_json(rep.ledger).dump());
  std::string out = "evaluator,t,bound,mc_estimate,mc_se,constants_json\n";
  for (const auto* rows : {&rep.train, &rep.validation}) {
    for (const TailRow& r : *rows) {
      out += rep.bound + "," + fmt(r.t) + "," + fmt(r.bound) + "," + fmt(r.mc_estimate) +
             "," + fmt(r.mc_se) + "," + constants + "\n";
    }
  }
  return out;
}

inline json calibration_json(const CalibrationReport& rep) {
  return {{"experiment_id", rep.experiment_id},
          {"bound", rep.bound},
          {"statistic", rep.statistic},
          {"knob", rep.knob},
          {"constant", rep.constant},
          {"reps", rep.reps},
          {"seeds", streams_json(rep.seed)},
          {"params", params_json(rep.params.params)},
          {"param_sources", rep.params.sources},
          {"constants", constants_json(rep.ledger)},
          {"train", rows_json(rep.train)},
          {"validation", rows_json(rep.validation)},
          {"validation_passed", rep.validation_passed}};
}

inline json estimate_json(const EstimateReport& rep) {
  json fns = json::object();
  const BlockStats& s = rep.stats;
  for (std::size_t f = 0; f < s.names.size(); ++f) {
    fns[s.names[f]] = {{"mean_z1", s.mean_z1[f]},
                       {"se_mean_z1", s.se_mean_z1[f]},
                       {"var_z1", s.var_z1[f]},
                       {"se_var_z1", s.se_var_z1[f]},
                       {"cov_z1z2", s.cov_z1z2[f]},
                       {"asymptotic_variance", rep.asymptotic_variance[f]}};
  }
  return {{"experiment_id", rep.experiment_id},
          {"seed", rep.seed},
          {"trajectories", rep.trajectories},
          {"n", rep.n},
          {"m", rep.m},
          {"blocks_per_path", rep.blocks_per_path},
          {"block_count", s.block_count},
          {"mean_t2", s.mean_t2},
          {"se_mean_t2", s.se_mean_t2},
          {"sigma_sq_class", s.sigma_sq_class},
          {"functions", fns},
          {"reference", rep.reference}};
}

inline std::string estimate_csv(const EstimateReport& rep) {
  std::string out =
      "experiment_id,function,block_count,mean_t2,se_mean_t2,mean_z1,se_mean_z1,var_z1,"
      "se_var_z1,cov_z1z2,asymptotic_variance\n";
  const BlockStats& s = rep.stats;
  for (std::size_t f = 0; f < s.names.size(); ++f) {
    out += rep.experiment_id + "," + s.names[f] + "," + std::to_string(s.block_count) + "," +
           fmt(s.mean_t2) + "," + fmt(s.se_mean_t2) + "," + fmt(s.mean_z1[f]) + "," +
           fmt(s.se_mean_z1[f]) + "," + fmt(s.var_z1[f]) + "," + fmt(s.se_var_z1[f]) + "," +
           fmt(s.cov_z1z2[f]) + "," + fmt(rep.asymptotic_variance[f]) + "\n";
  }
  return out;
}

inline json truncation_json(const TruncationReport& t) {
  return {{"rho", t.rho},
          {"pilot_reps", t.pilot_reps},
          {"check_reps", t.check_reps},
          {"exceedance", t.exceedance},
          {"exceedance_se", t.exceedance_se},
          {"exceedance_ok", t.exceedance_ok},
          {"f2_mean", t.f2_mean},
          {"f2_se", t.f2_se},
          {"f2_ok", t.f2_ok},
          {"max_sup_norm", t.max_sup_norm.value},
          {"degenerate", t.degenerate}};
}

inline std::string lognecessity_csv(const LogNecessityReport& rep) {
  std::string out =
      "source,r,n,beta,mc_estimate,mc_se,levy_lower,hypothetical,violated\n";
  for (const LogNecessityRow& row : rep.rows) {
    for (std::size_t b = 0; b < rep.betas.size(); ++b) {
      out += "iid," + std::to_string(row.r) + "," + std::to_string(row.n) + "," +
             fmt(rep.betas[b]) + "," + fmt(row.p_sum) + "," + fmt(row.se_sum) + "," +
             fmt(row.levy_lower) + "," + fmt(row.hypothetical[b]) + "," +
             fmt(static_cast<bool>(row.violated[b])) + "\n";
    }
    for (std::size_t b = 0; b < rep.betas.size(); ++b) {
      out += "loop," + std::to_string(row.r) + "," + std::to_string(row.n) + "," +
             fmt(rep.betas[b]) + "," + fmt(row.loop_p_sum) + "," + fmt(row.loop_se_sum) +
             ",," + fmt(row.loop_hypothetical[b]) + "," +
             fmt(static_cast<bool>(row.loop_violated[b])) + "\n";
    }
  }
  return out;
}

inline json lognecessity_json(const LogNecessityReport& rep) {
  json rows = json::array();
  for (const LogNecessityRow& row : rep.rows) {
    json hyp = json::array();
    for (std::size_t b = 0; b < rep.betas.size(); ++b) {
      hyp.push_back({{"beta", rep.betas[b]},
                     {"iid_bound", row.hypothetical[b]},
                     {"iid_violated", static_cast<bool>(row.violated[b])},
                     {"loop_bound", row.loop_hypothetical[b]},
                     {"loop_violated", static_cast<bool>(row.loop_violated[b])}});
    }
    rows.push_back({{"r", row.r},
                    {"n", row.n},
                    {"p_sum", row.p_sum},
                    {"se_sum", row.se_sum},
                    {"levy_lower", row.levy_lower},
                    {"levy_ok", row.levy_ok},
                    {"p_max", row.p_max},
                    {"se_max", row.se_max},
                    {"max_lower", row.max_lower},
                    {"max_exact", row.max_exact},
                    {"max_ok", row.max_ok},
                    {"loop_p_sum", row.loop_p_sum},
                    {"loop_se_sum", row.loop_se_sum},
                    {"loop_block_tail", row.loop_block_tail},
                    {"loop_block_se", row.loop_block_se},
                    {"loop_block_exact", row.loop_block_exact},
                    {"loop_block_ok", row.loop_block_ok},
                    {"hypothetical", hyp}});
  }
  std::vector<bool> v(rep.violated_somewhere.begin(), rep.violated_somewhere.end());
  std::vector<bool> lv(rep.loop_violated_somewhere.begin(), rep.loop_violated_somewhere.end());
  return {{"seeds", streams_json(rep.seed)},
          {"reps", rep.reps},
          {"betas", rep.betas},
          {"K_hypothetical", {{"value", rep.k_calibrated}, {"calibrated", true}}},
          {"loop_K_hypothetical", {{"value", rep.loop_k_calibrated}, {"calibrated", true}}},
          {"levy_all_ok", rep.levy_all_ok},
          {"max_all_ok", rep.max_all_ok},
          {"loop_blocks_ok", rep.loop_blocks_ok},
          {"violated_somewhere", v},
          {"loop_violated_somewhere", lv},
          {"rows", rows}};
}

}  // namespace regen::harness

#endif  // REGEN_HARNESS_REPORT_HPP_
