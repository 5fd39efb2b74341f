#include "nash/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nash/error.hpp"

namespace nash {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { raise(ErrorCode::ParseError, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

Rational rational_of(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number()) return rational_from_double(j.get<double>());
  parse_fail("expected a rational as \"p/q\" or a number");
}

double number_of(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return rational_of(j).get_d();
  parse_fail("expected a number");
}

/// Infinity as null, since JSON has no literal for it.
Json bound_to_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double bound_from_json(const Json& j, double inf) { return j.is_null() ? inf : number_of(j); }

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    parse_fail(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    parse_fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

Json expr_to_json(const NashExpr& e) {
  Json terms = Json::array();
  for (const auto& t : e.terms()) {
    Json exps = Json::array();
    for (const auto& x : t.exps) exps.push_back(format_rational(x));
    terms.push_back({{"coeff", format_rational(t.coeff)}, {"exps", exps}});
  }
  return terms;
}

NashExpr expr_from_json(const Json& j, std::size_t nvars) {
  return guarded("expression", [&] {
    if (!j.is_array()) parse_fail("expression must be a term list");
    std::vector<Term> terms;
    for (const auto& t : j) {
      Term term{rational_of(field(t, "coeff")), {}};
      const auto& exps = field(t, "exps");
      if (!exps.is_array() || exps.size() != nvars)
        raise(ErrorCode::ArityMismatch, "term needs " + std::to_string(nvars) + " exponents");
      for (const auto& e : exps) term.exps.push_back(rational_of(e));
      terms.push_back(std::move(term));
    }
    return NashExpr::from_terms_auto(nvars, std::move(terms));
  });
}

Json alphabet_to_json(const InputAlphabet& a) {
  Json j = Json::object();
  for (std::size_t i = 0; i < a.size(); ++i) j[a.name(i)] = a.value(i);
  return j;
}

InputAlphabet alphabet_from_json(const Json& j) {
  return guarded("alphabet", [&] {
    if (!j.is_object()) parse_fail("alphabet must map letter names to values");
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (auto it = j.begin(); it != j.end(); ++it) {
      names.push_back(it.key());
      std::vector<double> v;
      if (it.value().is_array()) {
        for (const auto& x : it.value()) v.push_back(number_of(x));
      } else {
        v.push_back(number_of(it.value()));
      }
      values.push_back(std::move(v));
    }
    return InputAlphabet(std::move(names), std::move(values));
  });
}

Json word_to_json(const InputAlphabet& a, const GeneralizedInput& u) {
  Json j = Json::array();
  for (const auto& s : u.word()) j.push_back(Json::array({a.name(s.letter), s.duration}));
  return j;
}

GeneralizedInput word_from_json(const InputAlphabet& a, const Json& j) {
  return guarded("input word", [&] {
    if (!j.is_array()) parse_fail("input word must be a list of [letter, duration] pairs");
    GeneralizedInput u;
    for (const auto& s : j) {
      if (!s.is_array() || s.size() != 2 || !s[0].is_string())
        parse_fail("each segment must be [letter, duration]");
      double t = number_of(s[1]);
      if (!std::isfinite(t)) raise(ErrorCode::InvalidArgument, "durations must be finite");
      u.append(a.index_of(s[0].get<std::string>()), t);
    }
    return u;
  });
}

Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) parse_fail("expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_of(j[i]);
  return v;
}

Json system_to_json(const NashSystem& sys, const std::string& name) {
  Json j = Json::object();
  if (!name.empty()) j["name"] = name;
  const auto& dom = sys.domain();
  Json lower = Json::array(), upper = Json::array();
  for (std::size_t i = 0; i < sys.dim(); ++i) {
    lower.push_back(bound_to_json(dom.lower[i]));
    upper.push_back(bound_to_json(dom.upper[i]));
  }
  std::vector<bool> pos(dom.positive.begin(), dom.positive.end());
  j["n"] = sys.dim();
  j["domain"] = {{"lower", lower}, {"upper", upper}, {"positive", pos}};
  j["alphabet"] = alphabet_to_json(sys.alphabet());
  Json fields = Json::object();
  for (std::size_t a = 0; a < sys.alphabet().size(); ++a) {
    Json comps = Json::array();
    for (const auto& e : sys.field_exprs(a)) comps.push_back(expr_to_json(e));
    fields[sys.alphabet().name(a)] = comps;
  }
  j["fields"] = fields;
  Json readout = Json::array();
  for (const auto& e : sys.readout_exprs()) readout.push_back(expr_to_json(e));
  j["readout"] = readout;
  j["x0"] = vec_to_json(sys.x0());
  return j;
}

NashSystem system_from_json(const Json& j) {
  return guarded("system", [&] {
    const auto n = field(j, "n").get<std::size_t>();
    const double inf = std::numeric_limits<double>::infinity();
    Box box = Box::unbounded(n);
    if (j.contains("domain")) {
      const auto& d = j.at("domain");
      if (d.contains("lower")) {
        if (d.at("lower").size() != n) raise(ErrorCode::ArityMismatch, "domain.lower needs n entries");
        for (std::size_t i = 0; i < n; ++i) box.lower[i] = bound_from_json(d.at("lower")[i], -inf);
      }
      if (d.contains("upper")) {
        if (d.at("upper").size() != n) raise(ErrorCode::ArityMismatch, "domain.upper needs n entries");
        for (std::size_t i = 0; i < n; ++i) box.upper[i] = bound_from_json(d.at("upper")[i], inf);
      }
      if (d.contains("positive")) {
        if (d.at("positive").size() != n) raise(ErrorCode::ArityMismatch, "domain.positive needs n entries");
        for (std::size_t i = 0; i < n; ++i) {
          box.positive[i] = d.at("positive")[i].get<bool>();
          if (box.positive[i]) box.lower[i] = std::max(box.lower[i], 0.0);
        }
      }
    }
    InputAlphabet alphabet = alphabet_from_json(field(j, "alphabet"));
    const auto& fj = field(j, "fields");
    std::vector<std::vector<NashExpr>> fields;
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
      if (!fj.contains(alphabet.name(a))) parse_fail("no field for letter '" + alphabet.name(a) + "'");
      const auto& comps = fj.at(alphabet.name(a));
      if (!comps.is_array() || comps.size() != n)
        raise(ErrorCode::ArityMismatch, "field '" + alphabet.name(a) + "' must have n components");
      std::vector<NashExpr> f;
      for (const auto& c : comps) f.push_back(expr_from_json(c, n));
      fields.push_back(std::move(f));
    }
    if (fj.size() != alphabet.size()) raise(ErrorCode::AlphabetMismatch, "fields name letters outside the alphabet");
    std::vector<NashExpr> readout;
    for (const auto& c : field(j, "readout")) readout.push_back(expr_from_json(c, n));
    Vec x0 = vec_from_json(field(j, "x0"));
    if (static_cast<std::size_t>(x0.size()) != n) raise(ErrorCode::ArityMismatch, "x0 needs n entries");
    return NashSystem(std::move(box), std::move(alphabet), std::move(fields), std::move(readout), std::move(x0));
  });
}

NashSystem load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

std::string system_name(const Json& j, const std::string& fallback) {
  if (j.is_object() && j.contains("name") && j.at("name").is_string()) return j.at("name").get<std::string>();
  return std::filesystem::path(fallback).stem().string();
}

Json table_to_json(const ResponseTable& t) {
  Json words = Json::array();
  for (const auto& [letters, values] : t.words()) {
    Json ls = Json::array();
    for (auto a : letters) ls.push_back(t.alphabet().name(a));
    Json vs = Json::array();
    for (const auto& v : values) vs.push_back(vec_to_json(v));
    words.push_back({{"letters", ls}, {"values", vs}});
  }
  return {{"kind", "table"},         {"alphabet", alphabet_to_json(t.alphabet())},
          {"outputs", t.num_outputs()}, {"step", t.step()},
          {"points", t.points()},     {"words", words}};
}

ResponseTable table_from_json(const Json& j) {
  return guarded("table", [&] {
    ResponseTable t(alphabet_from_json(field(j, "alphabet")), field(j, "outputs").get<std::size_t>(),
                    number_of(field(j, "step")), field(j, "points").get<std::size_t>());
    for (const auto& w : field(j, "words")) {
      std::vector<std::size_t> letters;
      for (const auto& l : field(w, "letters")) letters.push_back(t.alphabet().index_of(l.get<std::string>()));
      std::vector<Vec> values;
      for (const auto& v : field(w, "values")) values.push_back(vec_from_json(v));
      t.set_word(std::move(letters), std::move(values));
    }
    return t;
  });
}

ResponseOracle oracle_from_json(const Json& j, const FlowOptions& flow) {
  if (j.is_object() && j.value("kind", "") == "table")
    return ResponseOracle::from_table(std::make_shared<ResponseTable>(table_from_json(j)));
  return ResponseOracle::from_system(std::make_shared<NashSystem>(system_from_json(j)), flow);
}

Json trajectory_to_json(const ControlSystem& sys, const GeneralizedInput& u, const Trajectory& t) {
  Json j = {{"input", word_to_json(sys.alphabet(), u)},
            {"success", t.success},
            {"num_steps", t.num_steps},
            {"breakpoints", t.breakpoints}};
  if (t.success) {
    j["terminal"] = vec_to_json(t.terminal);
    j["output"] = vec_to_json(sys.readout(t.terminal));
  } else {
    j["status"] = t.status == FlowStatus::DomainExit ? "DomainExit" : "BlowUp";
  }
  return j;
}

Json report_to_json(const TranscendenceReport& r) {
  Json samples = Json::array();
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    const auto& e = r.samples[s];
    Json js = {{"rank", e.rank},
               {"gap", bound_to_json(e.gap)},
               {"confident", e.confident},
               {"exact", e.exact},
               {"singular_values", e.singular_values}};
    if (s < r.sample_points.size()) js["point"] = r.sample_points[s];
    samples.push_back(js);
  }
  return {{"estimated_trdeg", r.estimated_trdeg},
          {"ambient_dim", r.ambient_dim},
          {"num_generators", r.num_generators},
          {"method", r.method},
          {"rank_tolerance", r.rank_tolerance},
          {"gap_ratio", r.gap_ratio},
          {"low_confidence", r.low_confidence},
          {"basis_indices", r.basis_indices},
          {"best_sample", r.best_sample},
          {"notes", r.notes},
          {"samples", samples}};
}

Json verification_to_json(const InputAlphabet& a, const VerificationReport& r) {
  Json failures = Json::array();
  for (const auto& w : r.failures) failures.push_back(word_to_json(a, w));
  return {{"trials", r.trials},
          {"accepted", r.accepted},
          {"rejected", r.rejected},
          {"max_deviation", bound_to_json(r.max_deviation)},
          {"tol", r.tol},
          {"pass", r.pass},
          {"failures", failures}};
}

Json verdict_to_json(const MinimalityVerdict& v) {
  auto opt = [](const std::optional<std::size_t>& x) { return x ? Json(*x) : Json("NOT_EVALUATED"); };
  Json j = {{"verdict", verdict_name(v.verdict)},
            {"dim_sigma", v.dim_sigma},
            {"trdeg_response", v.trdeg_response},
            {"reachable_trdeg", opt(v.reachable_trdeg)},
            {"trdeg_obs_sigma", opt(v.trdeg_obs_sigma)},
            {"realizes_oracle", v.realizes_oracle},
            {"realization_deviation", bound_to_json(v.realization_deviation)},
            {"low_confidence", v.low_confidence},
            {"witnesses", v.witnesses},
            {"response_report", report_to_json(v.response_report)}};
  j["reach_report"] = v.reach_report ? report_to_json(*v.reach_report) : Json(nullptr);
  j["obs_report"] = v.obs_report ? report_to_json(*v.obs_report) : Json(nullptr);
  return j;
}

Json relation_to_json(const PolynomialRelation& q) {
  return {{"num_basis", q.num_basis()},       {"exponents", q.exponents()},
          {"coefficients", q.coefficients()}, {"center", q.center()},
          {"scale", q.scale()},               {"residual", q.residual},
          {"singular_ratio", q.singular_ratio}};
}

PolynomialRelation relation_from_json(const Json& j) {
  return guarded("relation", [&] {
    PolynomialRelation q(field(j, "num_basis").get<std::size_t>(),
                         field(j, "exponents").get<std::vector<std::vector<unsigned>>>(),
                         field(j, "coefficients").get<std::vector<double>>(), field(j, "center").get<std::vector<double>>(),
                         field(j, "scale").get<std::vector<double>>());
    q.residual = j.value("residual", 0.0);
    q.singular_ratio = j.value("singular_ratio", 0.0);
    return q;
  });
}

Json implicit_map_to_json(const ImplicitMap& m) {
  const auto& o = m.options();
  return {{"relation", relation_to_json(m.relation())},
          {"z_star", m.z_star()},
          {"q_star", m.q_star()},
          {"radius", bound_to_json(m.radius())},
          {"options",
           {{"newton_tol", o.newton_tol},
            {"max_iter", o.max_iter},
            {"derivative_floor", o.derivative_floor},
            {"probe_rays", o.probe_rays}}}};
}

ImplicitMap implicit_map_from_json(const Json& j) {
  return guarded("implicit map", [&] {
    ImplicitOptions o;
    if (j.contains("options")) {
      const auto& oj = j.at("options");
      o.newton_tol = oj.value("newton_tol", o.newton_tol);
      o.max_iter = oj.value("max_iter", o.max_iter);
      o.derivative_floor = oj.value("derivative_floor", o.derivative_floor);
      o.probe_rays = oj.value("probe_rays", o.probe_rays);
    }
    return ImplicitMap::restore(relation_from_json(field(j, "relation")), field(j, "z_star").get<std::vector<double>>(),
                                field(j, "q_star").get<double>(), o,
                                bound_from_json(field(j, "radius"), std::numeric_limits<double>::infinity()));
  });
}

namespace {

Provenance provenance_from(const std::string& s) {
  if (s == "REACH_REDUCED") return Provenance::ReachReduced;
  if (s == "OBS_REDUCED") return Provenance::ObsReduced;
  if (s == "MINIMIZED") return Provenance::Minimized;
  parse_fail("unknown provenance '" + s + "'");
}

}  // namespace

Json realization_to_json(const LocalRealization& r) {
  const auto& a = r.alphabet();
  Json j = {{"kind", r.kind() == LocalRealization::Kind::Chart ? "chart" : "observed"},
            {"provenance", provenance_name(r.provenance())},
            {"dim", r.dim()},
            {"alphabet", alphabet_to_json(a)},
            {"x0", vec_to_json(r.initial_state())},
            {"shift", word_to_json(a, r.shift())},
            {"shift_time", r.shift().total_time()},
            {"gate_deviation", r.gate_deviation}};
  if (r.kind() == LocalRealization::Kind::Chart) {
    j["basis"] = r.basis();
    Json lifts = Json::array();
    for (const auto& l : r.lifts()) lifts.push_back(l ? implicit_map_to_json(*l) : Json(nullptr));
    j["lifts"] = lifts;
  } else {
    Json fields = Json::object();
    for (std::size_t l = 0; l < a.size(); ++l) {
      Json comps = Json::array();
      for (const auto& m : r.field_maps()[l]) comps.push_back(implicit_map_to_json(m));
      fields[a.name(l)] = comps;
    }
    j["fields"] = fields;
    Json readout = Json::array();
    for (const auto& m : r.readout_maps()) readout.push_back(implicit_map_to_json(m));
    j["readout"] = readout;
    Json coords = Json::array();
    for (const auto& g : r.coordinate_generators) {
      Json word = Json::array();
      for (auto l : g.word) word.push_back(a.name(l));
      coords.push_back({{"output", g.output}, {"word", word}, {"expr", expr_to_json(g.expr)}});
    }
    j["coordinate_generators"] = coords;
    j["parent_chart"] = r.parent_chart ? realization_to_json(*r.parent_chart) : Json(nullptr);
  }
  return j;
}

LocalRealization realization_from_json(const Json& j, std::shared_ptr<const NashSystem> base) {
  return guarded("realization", [&]() -> LocalRealization {
    InputAlphabet a = alphabet_from_json(field(j, "alphabet"));
    Vec x0 = vec_from_json(field(j, "x0"));
    GeneralizedInput shift = word_from_json(a, field(j, "shift"));
    const std::string kind = field(j, "kind").get<std::string>();
    std::optional<LocalRealization> r;
    if (kind == "chart") {
      if (!base) raise(ErrorCode::InvalidArgument, "a chart realization needs its original system");
      if (!(base->alphabet() == a)) raise(ErrorCode::AlphabetMismatch, "system and realization alphabets differ");
      std::vector<std::optional<ImplicitMap>> lifts;
      for (const auto& l : field(j, "lifts")) {
        if (l.is_null()) lifts.emplace_back();
        else lifts.emplace_back(implicit_map_from_json(l));
      }
      r = LocalRealization::chart(base, field(j, "basis").get<std::vector<std::size_t>>(), std::move(lifts), x0, shift);
    } else if (kind == "observed") {
      const auto& fj = field(j, "fields");
      std::vector<std::vector<ImplicitMap>> fields;
      for (std::size_t l = 0; l < a.size(); ++l) {
        std::vector<ImplicitMap> comps;
        for (const auto& m : fj.at(a.name(l))) comps.push_back(implicit_map_from_json(m));
        fields.push_back(std::move(comps));
      }
      std::vector<ImplicitMap> readout;
      for (const auto& m : field(j, "readout")) readout.push_back(implicit_map_from_json(m));
      r = LocalRealization::observed(a, std::move(fields), std::move(readout), x0, shift);
      if (j.contains("coordinate_generators") && base) {
        for (const auto& g : j.at("coordinate_generators")) {
          ObsGenerator og;
          og.output = g.at("output").get<std::size_t>();
          for (const auto& l : g.at("word")) og.word.push_back(a.index_of(l.get<std::string>()));
          og.expr = expr_from_json(g.at("expr"), base->dim());
          r->coordinate_generators.push_back(std::move(og));
        }
      }
      if (j.contains("parent_chart") && !j.at("parent_chart").is_null() && base)
        r->parent_chart = std::make_shared<LocalRealization>(realization_from_json(j.at("parent_chart"), base));
    } else {
      parse_fail("unknown realization kind '" + kind + "'");
    }
    r->set_provenance(provenance_from(field(j, "provenance").get<std::string>()));
    r->gate_deviation = j.value("gate_deviation", 0.0);
    return std::move(*r);
  });
}

Json isomorphism_to_json(const InputAlphabet& a, const LocalIsomorphism& iso) {
  Json fwd = Json::array(), bwd = Json::array();
  for (const auto& m : iso.forward) fwd.push_back(implicit_map_to_json(m));
  for (const auto& m : iso.backward) bwd.push_back(implicit_map_to_json(m));
  Json jac = Json::array();
  for (Eigen::Index r = 0; r < iso.jacobian.rows(); ++r) jac.push_back(vec_to_json(iso.jacobian.row(r).transpose()));
  return {{"dim", iso.dim()},
          {"base1", vec_to_json(iso.base1)},
          {"base2", vec_to_json(iso.base2)},
          {"shift", word_to_json(a, iso.shift)},
          {"radius", bound_to_json(iso.radius)},
          {"jacobian", jac},
          {"condition_number", iso.condition_number},
          {"round_trip", iso.round_trip},
          {"forward", fwd},
          {"backward", bwd}};
}

LocalIsomorphism isomorphism_from_json(const InputAlphabet& a, const Json& j) {
  return guarded("isomorphism", [&] {
    LocalIsomorphism iso;
    iso.base1 = vec_from_json(field(j, "base1"));
    iso.base2 = vec_from_json(field(j, "base2"));
    iso.shift = word_from_json(a, field(j, "shift"));
    iso.radius = bound_from_json(field(j, "radius"), std::numeric_limits<double>::infinity());
    for (const auto& m : field(j, "forward")) iso.forward.push_back(implicit_map_from_json(m));
    for (const auto& m : field(j, "backward")) iso.backward.push_back(implicit_map_from_json(m));
    const auto& jac = field(j, "jacobian");
    iso.jacobian.resize(static_cast<Eigen::Index>(jac.size()), static_cast<Eigen::Index>(iso.dim()));
    for (std::size_t r = 0; r < jac.size(); ++r) iso.jacobian.row(static_cast<Eigen::Index>(r)) = vec_from_json(jac[r]).transpose();
    iso.condition_number = j.value("condition_number", 0.0);
    iso.round_trip = j.value("round_trip", 0.0);
    return iso;
  });
}

Json iso_report_to_json(const IsomorphismReport& r) {
  return {{"pass", r.pass},
          {"probes", r.probes},
          {"words", r.words},
          {"tol", r.tol},
          {"round_trip", {{"deviation", bound_to_json(r.round_trip)}, {"pass", r.pass_round_trip}}},
          {"pushforward", {{"deviation", bound_to_json(r.pushforward)}, {"pass", r.pass_pushforward}}},
          {"readout", {{"deviation", bound_to_json(r.readout)}, {"pass", r.pass_readout}}},
          {"intertwining", {{"deviation", bound_to_json(r.intertwining)}, {"pass", r.pass_intertwining}}},
          {"jacobian_round_trip", r.jacobian_round_trip},
          {"probed_radius", r.probed_radius}};
}

}  // namespace nash
