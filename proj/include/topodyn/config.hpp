#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "topodyn/errors.hpp"
#include "topodyn/geometry.hpp"
#include "topodyn/shifts.hpp"
#include "topodyn/systems.hpp"

namespace topodyn {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline const ordered_json& require_key(const ordered_json& j,
                                       const std::string& key,
                                       const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    throw invalid_input(ctx + ": missing key '" + key + "'");
  return j.at(key);
}

inline double require_double(const ordered_json& j, const std::string& key,
                             const std::string& ctx) {
  const ordered_json& v = require_key(j, key, ctx);
  if (!v.is_number()) throw invalid_input(ctx + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline long require_long(const ordered_json& j, const std::string& key,
                         const std::string& ctx) {
  const ordered_json& v = require_key(j, key, ctx);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw invalid_input(ctx + ": '" + key + "' must be an integer");
  return v.get<long>();
}

inline long get_long(const ordered_json& j, const std::string& key, long dflt) {
  if (!j.is_object() || !j.contains(key)) return dflt;
  const ordered_json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw invalid_input("'" + key + "' must be an integer");
  return v.get<long>();
}

inline double get_double(const ordered_json& j, const std::string& key,
                         double dflt) {
  if (!j.is_object() || !j.contains(key)) return dflt;
  const ordered_json& v = j.at(key);
  if (!v.is_number()) throw invalid_input("'" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// System catalogue. kind selects the map; wrappers nest through "base".

inline WeightedShiftSpec shift_spec_from_json(const ordered_json& j) {
  WeightedShiftSpec spec;
  const ordered_json& wj = detail::require_key(j, "weights", "shift");
  std::string rule = detail::require_key(wj, "rule", "weights").get<std::string>();
  if (rule == "constant") {
    spec.weights = ConstantWeights{detail::require_double(wj, "value", "weights")};
  } else if (rule == "ratio") {
    spec.weights = RatioWeights{};
  } else if (rule == "custom") {
    CustomWeights cw;
    cw.values = detail::require_key(wj, "values", "weights")
                    .get<std::vector<double>>();
    cw.tail = detail::get_double(wj, "tail", 1.0);
    spec.weights = cw;
  } else {
    throw invalid_input("unknown weight rule: " + rule);
  }
  spec.block_dim =
      static_cast<std::size_t>(detail::get_long(j, "block_dim", 1));
  spec.truncation =
      static_cast<std::size_t>(detail::require_long(j, "truncation", "shift"));
  std::string field = j.contains("field") ? j.at("field").get<std::string>()
                                          : std::string("real");
  if (field == "real")
    spec.field = ScalarField::real;
  else if (field == "complex")
    spec.field = ScalarField::complex_field;
  else
    throw invalid_input("unknown scalar field: " + field);
  spec.validate();
  return spec;
}

inline Point point_from_config(const ordered_json& j, const System& sys);

inline System system_from_json(const ordered_json& j) {
  std::string kind = detail::require_key(j, "kind", "system").get<std::string>();
  if (kind == "doubling") return make_doubling();
  if (kind == "rotation")
    return make_rotation(detail::require_double(j, "alpha", "rotation"));
  if (kind == "tent") return make_tent();
  if (kind == "interchange") return make_interchange();
  if (kind == "contraction") {
    double factor = detail::require_double(j, "factor", "contraction");
    const ordered_json& fj = detail::require_key(j, "fixed", "contraction");
    Point fixed;
    fixed.space = parse_space_tag(
        detail::require_key(fj, "space", "fixed point").get<std::string>());
    fixed.coords = detail::require_key(fj, "coords", "fixed point")
                       .get<std::vector<double>>();
    return make_contraction(factor, std::move(fixed));
  }
  if (kind == "shift") return make_shift(shift_spec_from_json(j));
  if (kind == "power") {
    System base = system_from_json(detail::require_key(j, "base", "power"));
    return power_system(std::move(base),
                        detail::require_long(j, "exponent", "power"));
  }
  if (kind == "scale") {
    System base = system_from_json(detail::require_key(j, "base", "scale"));
    const ordered_json& lj = detail::require_key(j, "lambda", "scale");
    Complex lambda{detail::require_double(lj, "re", "lambda"),
                   detail::get_double(lj, "im", 0.0)};
    return scale_unimodular(std::move(base), lambda);
  }
  throw invalid_input("unknown system kind: " + kind);
}

// ---------------------------------------------------------------------------
// Points in configs: scalar spaces take {"coords":[x]} or a bare number;
// shift systems also accept sparse {"entries":[{block,comp,re,im}…]}.

inline ShiftVector shift_vector_from_config(const ordered_json& j,
                                            const WeightedShiftSpec& spec) {
  ShiftVector v = ShiftVector::zero(spec);
  if (j.is_object() && j.contains("entries")) {
    for (const auto& e : j.at("entries")) {
      auto block = static_cast<std::size_t>(
          detail::require_long(e, "block", "entry"));
      auto comp =
          static_cast<std::size_t>(detail::get_long(e, "comp", 1));
      if (block < 1 || block > spec.truncation || comp < 1 ||
          comp > spec.block_dim)
        throw invalid_input("entry block/comp outside the spec");
      double re = detail::get_double(e, "re", 0.0);
      double im = detail::get_double(e, "im", 0.0);
      if (im != 0.0 && spec.field == ScalarField::real)
        throw invalid_input("imaginary entry in a real-field shift vector");
      v.set(block, comp, Complex{re, im});
    }
    return v;
  }
  if (j.is_object() && j.contains("coords")) {
    auto coords = j.at("coords").get<std::vector<double>>();
    if (coords.size() != spec.coord_count())
      throw invalid_input("dense shift coords have wrong length");
    Point p;
    p.space = SpaceTag::l2;
    p.coords = std::move(coords);
    return point_to_shift(spec, p);
  }
  throw invalid_input("shift vector needs 'entries' or 'coords'");
}

inline Point point_from_config(const ordered_json& j, const System& sys) {
  if (sys.space() == SpaceTag::l2) {
    auto view = shift_view(sys);
    if (view && j.is_object() && j.contains("entries"))
      return shift_to_point(*view.value().spec,
                            shift_vector_from_config(j, *view.value().spec));
  }
  Point p;
  p.space = sys.space();
  if (j.is_number()) {
    p.coords = {j.get<double>()};
  } else if (j.is_object() && j.contains("coords")) {
    p.coords = j.at("coords").get<std::vector<double>>();
  } else if (j.is_array()) {
    p.coords = j.get<std::vector<double>>();
  } else {
    throw invalid_input("point needs 'coords', a number, or shift 'entries'");
  }
  sys.validate_point(p);
  return p;
}

inline Ball ball_from_config(const ordered_json& j, const System& sys) {
  Ball b;
  b.center = point_from_config(detail::require_key(j, "center", "ball"), sys);
  b.radius = detail::require_double(j, "radius", "ball");
  if (!(b.radius > 0.0)) throw invalid_input("ball radius must be > 0");
  return b;
}

// ---------------------------------------------------------------------------
// Experiment configs. The raw document is echoed into reports; seed and
// output names have CLI overrides.

struct ExperimentConfig {
  ordered_json raw;
  std::string operation;
  System system;
  ordered_json params;
  std::uint64_t seed = 0;

  std::string report_name;       // default: <operation>-report.json
  std::string certificate_name;  // default: certificate.json (construct only)
  std::string csv_name;          // default: scan.csv (scans only)
};

inline ExperimentConfig parse_config(const ordered_json& doc,
                                     const std::string& operation) {
  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.operation = operation;
  if (doc.contains("operation")) {
    std::string declared = doc.at("operation").get<std::string>();
    if (declared != operation)
      throw invalid_input("config declares operation '" + declared +
                          "' but subcommand is '" + operation + "'");
  }
  cfg.system = system_from_json(detail::require_key(doc, "system", "config"));
  cfg.params = doc.contains("params") ? doc.at("params") : ordered_json::object();
  if (doc.contains("seed")) {
    const ordered_json& s = doc.at("seed");
    if (!s.is_number_integer() && !s.is_number_unsigned())
      throw invalid_input("seed must be an integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  const ordered_json out =
      doc.contains("out") ? doc.at("out") : ordered_json::object();
  cfg.report_name = out.contains("report") ? out.at("report").get<std::string>()
                                           : operation + "-report.json";
  cfg.certificate_name = out.contains("certificate")
                             ? out.at("certificate").get<std::string>()
                             : "certificate.json";
  cfg.csv_name =
      out.contains("csv") ? out.at("csv").get<std::string>() : "scan.csv";
  return cfg;
}

}  // namespace topodyn
