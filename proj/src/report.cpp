#include "flattorus/report.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "flattorus/lattice_io.hpp"

namespace flattorus {

Json number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

namespace {

Json maybe_number(const std::optional<double>& value) {
  return value ? number(*value) : Json(nullptr);
}

Json to_json(const DistortionStats& stats) {
  Json j;
  j["max_expansion"] = number(stats.max_expansion);
  j["max_contraction"] = number(stats.max_contraction);
  j["empirical_distortion"] = number(stats.distortion);
  return j;
}

std::string csv_number(double value) { return std::isfinite(value) ? format_double(value) : ""; }

std::string csv_maybe(const std::optional<double>& value) {
  return value ? csv_number(*value) : "";
}

}  // namespace

Json to_json(const ResolvedSpec& spec) {
  Json j;
  j["alpha"] = number(spec.alpha);
  j["gamma"] = number(spec.gamma);
  j["q"] = number(spec.q);
  j["k"] = spec.k;
  j["p_n"] = number(spec.p_n);
  j["rel_tol"] = number(spec.rel_tol);
  return j;
}

Json to_json(const DistortionReport& report) {
  Json j;
  j["lattice_id"] = report.lattice_id;
  j["dim"] = report.dim;
  Json config = to_json(report.spec);
  config["seed"] = report.seed;
  j["config"] = config;
  j["cuts"] = report.cuts;
  Json lambdas = Json::array();
  for (const double l : report.stage_lambda1) lambdas.push_back(number(l));
  j["stage_lambda1"] = lambdas;
  j["pair_count"] = report.pair_count;
  j["excluded_pairs"] = report.excluded;
  j["composed"] = to_json(report.composed);
  j["baseline"] = to_json(report.baseline);

  Json constants;
  constants["c_H"] = maybe_number(report.constants.c_h);
  constants["c_E"] = maybe_number(report.constants.c_e);
  constants["c_E_upper"] = maybe_number(report.constants.c_e_upper);
  constants["c_E_lower"] = maybe_number(report.constants.c_e_lower);
  constants["c_small_scale"] = maybe_number(report.constants.c_small);
  j["measured_constants"] = constants;

  Json pairs = Json::array();
  for (const PairRecord& p : report.pairs) {
    Json r;
    r["kind"] = to_string(p.kind);
    r["true_dist"] = number(p.true_dist);
    r["embedded_dist"] = number(p.embedded_dist);
    const bool excluded = p.true_dist < kExcludedDistance;
    r["excluded"] = excluded;
    r["ratio"] = excluded ? Json(nullptr) : number(p.ratio);
    r["baseline_dist"] = number(p.baseline_dist);
    r["baseline_ratio"] = excluded ? Json(nullptr) : number(p.baseline_ratio);
    Json stages = Json::array();
    for (const StageRecord& s : p.stages) {
      stages.push_back(Json{{"torus_dist", number(s.torus_dist)},
                            {"embedded_dist", number(s.embedded_dist)}});
    }
    r["stages"] = stages;
    pairs.push_back(r);
  }
  j["pairs"] = pairs;
  return j;
}

Json to_json(const LemmaLedger& ledger) {
  Json j;
  j["seed"] = ledger.seed;
  j["lattices"] = ledger.lattices;
  j["all_passed"] = ledger.all_passed();
  Json entries = Json::array();
  for (const LedgerEntry& e : ledger.entries) {
    Json r;
    r["id"] = e.id;
    r["statement"] = e.statement;
    r["passed"] = e.passed;
    r["checks"] = e.checks;
    r["failures"] = e.failures;
    r["worst_slack"] = maybe_number(e.worst_slack);
    r["measured"] = maybe_number(e.measured);
    r["first_failure"] = e.first_failure;
    entries.push_back(r);
  }
  j["entries"] = entries;
  return j;
}

Json to_json(const BuiltFiltration& built, const FiltrationValidation& validation) {
  const Filtration& f = built.filtration;
  const GramSchmidtData& gs = f.lattice().gram_schmidt();
  Json j;
  j["dim"] = f.dim();
  j["gamma"] = number(built.params.gamma);
  j["q"] = number(built.params.q);
  j["size"] = f.size();
  j["cuts"] = f.cuts();
  Json norms = Json::array();
  for (int i = 0; i < gs.dim(); ++i) norms.push_back(number(gs.norm(i)));
  j["gs_norms"] = norms;
  Json basis = Json::array();
  for (int i = 0; i < f.dim(); ++i) {
    Json row = Json::array();
    for (int c = 0; c < f.dim(); ++c) row.push_back(number(f.lattice().basis()(i, c)));
    basis.push_back(row);
  }
  j["kz_basis"] = basis;
  Json blocks = Json::array();
  for (std::size_t b = 0; b < validation.blocks.size(); ++b) {
    const BlockCheck& c = validation.blocks[b];
    Json r;
    r["begin"] = f.block_begin(static_cast<int>(b));
    r["end"] = f.block_end(static_cast<int>(b));
    r["lambda1"] = number(c.lambda1);
    r["covering_upper"] = number(c.covering_upper);
    r["covering_ratio"] = number(c.covering_ratio);
    r["covering_ok"] = c.covering_ok;
    if (b + 1 < validation.blocks.size()) {
      r["growth_ratio"] = number(c.growth_ratio);
    } else {
      r["growth_ratio"] = nullptr;
    }
    r["growth_ok"] = c.growth_ok;
    blocks.push_back(r);
  }
  j["blocks"] = blocks;
  j["valid"] = validation.valid;
  return j;
}

void write_csv(std::ostream& out, const DistortionReport& report) {
  std::size_t stages = 0;
  for (const PairRecord& p : report.pairs) stages = std::max(stages, p.stages.size());
  out << "index,kind,true_dist,embedded_dist,ratio,baseline_dist,baseline_ratio";
  for (std::size_t j = 0; j < stages; ++j) {
    out << ",stage" << j << "_torus_dist,stage" << j << "_embedded_dist";
  }
  out << '\n';
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    const PairRecord& p = report.pairs[i];
    const bool excluded = p.true_dist < kExcludedDistance;
    out << i << ',' << to_string(p.kind) << ',' << csv_number(p.true_dist) << ','
        << csv_number(p.embedded_dist) << ',' << (excluded ? "" : csv_number(p.ratio)) << ','
        << csv_number(p.baseline_dist) << ',' << (excluded ? "" : csv_number(p.baseline_ratio));
    for (const StageRecord& s : p.stages) {
      out << ',' << csv_number(s.torus_dist) << ',' << csv_number(s.embedded_dist);
    }
    out << '\n';
  }
}

void write_csv(std::ostream& out, const LemmaLedger& ledger) {
  out << "id,passed,checks,failures,worst_slack,measured\n";
  for (const LedgerEntry& e : ledger.entries) {
    out << e.id << ',' << (e.passed ? "true" : "false") << ',' << e.checks << ',' << e.failures
        << ',' << csv_maybe(e.worst_slack) << ',' << csv_maybe(e.measured) << '\n';
  }
}

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

}  // namespace flattorus
