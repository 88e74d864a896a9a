#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "flattorus/embedding.hpp"
#include "flattorus/filtration.hpp"
#include "flattorus/harness.hpp"
#include "flattorus/lemma_suite.hpp"

namespace flattorus {

using Json = nlohmann::ordered_json;

/// Non-finite numbers and absent optionals become null.
Json number(double value);

Json to_json(const ResolvedSpec& spec);
Json to_json(const DistortionReport& report);
Json to_json(const LemmaLedger& ledger);
Json to_json(const BuiltFiltration& built, const FiltrationValidation& validation);

/// One row per pair: index, kind, true, embedded, ratio, baseline, baseline
/// ratio, then per-stage torus and embedded distances.
void write_csv(std::ostream& out, const DistortionReport& report);
void write_csv(std::ostream& out, const LemmaLedger& ledger);

/// Pretty-printed with two-space indent and a trailing newline.
std::string dump(const Json& json);

}  // namespace flattorus
