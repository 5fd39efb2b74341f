#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "nash/analysis.hpp"
#include "nash/minimality.hpp"
#include "nash/reduction.hpp"
#include "nash/system.hpp"

namespace nash {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// Term list [{"coeff": "3/1", "exps": ["2/1", "-1/2"]}, ...].
Json expr_to_json(const NashExpr& e);
NashExpr expr_from_json(const Json& j, std::size_t nvars);

Json alphabet_to_json(const InputAlphabet& a);
InputAlphabet alphabet_from_json(const Json& j);

/// [["a1", 0.25], ["a0", 0.1]].
Json word_to_json(const InputAlphabet& a, const GeneralizedInput& u);
GeneralizedInput word_from_json(const InputAlphabet& a, const Json& j);

Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j);

Json system_to_json(const NashSystem& sys, const std::string& name = "");
NashSystem system_from_json(const Json& j);
NashSystem load_system(const std::string& path);
/// The "name" field of a system file, or the file stem.
std::string system_name(const Json& j, const std::string& fallback);

Json table_to_json(const ResponseTable& t);
ResponseTable table_from_json(const Json& j);

/// A system file or a table file ({"kind": "table", ...}).
ResponseOracle oracle_from_json(const Json& j, const FlowOptions& flow = {});

Json trajectory_to_json(const ControlSystem& sys, const GeneralizedInput& u, const Trajectory& t);
Json report_to_json(const TranscendenceReport& r);
Json verification_to_json(const InputAlphabet& a, const VerificationReport& r);
Json verdict_to_json(const MinimalityVerdict& v);

Json relation_to_json(const PolynomialRelation& q);
PolynomialRelation relation_from_json(const Json& j);
Json implicit_map_to_json(const ImplicitMap& m);
ImplicitMap implicit_map_from_json(const Json& j);

Json realization_to_json(const LocalRealization& r);
/// Chart realizations need the symbolic system they were reduced from.
LocalRealization realization_from_json(const Json& j, std::shared_ptr<const NashSystem> base = nullptr);

Json isomorphism_to_json(const InputAlphabet& a, const LocalIsomorphism& iso);
LocalIsomorphism isomorphism_from_json(const InputAlphabet& a, const Json& j);
Json iso_report_to_json(const IsomorphismReport& r);

}  // namespace nash
