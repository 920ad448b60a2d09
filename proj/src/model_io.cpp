#include "spad/model_io.hpp"

#include <fstream>

namespace spad {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ContractError(std::string("json: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

std::string family(const Json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw ContractError("json: tagged entry needs a string 'family'");
  }
  return j.at("family").get<std::string>();
}

}  // namespace

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ContractError("json: expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ContractError("json: expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json to_json(const DetectabilitySpec& spec) {
  return std::visit(
      overloaded{
          [](const detect::Exponential& e) { return Json{{"family", "exponential"}, {"kappa", e.kappa}}; },
          [](const detect::GaussianReduced& g) {
            return Json{{"family", "gaussian"},
                        {"sensitivity", g.sensitivity},
                        {"delta", g.delta_dp},
                        {"level", g.level},
                        {"h_ref", g.h_ref}};
          },
          [](const detect::LaplaceReduced& l) {
            return Json{{"family", "laplace"},
                        {"sensitivity", l.sensitivity},
                        {"c_null", l.c_null},
                        {"h_ref", l.h_ref}};
          },
          [](const detect::RandomizedResponseReduced& r) {
            return Json{{"family", "randomized_response"}, {"n", r.n}, {"level", r.level}, {"h_ref", r.h_ref}};
          },
      },
      spec);
}

Json to_json(const HarmResponseSpec& spec) {
  return std::visit(overloaded{
                        [](const harm::ExponentialDecay& e) {
                          return Json{{"family", "exponential_decay"}, {"beta", e.beta}};
                        },
                        [](const harm::LinearClamp& l) {
                          return Json{{"family", "linear_clamp"}, {"gamma", l.gamma}};
                        },
                    },
                    spec);
}

Json to_json(const CostSpec& spec) { return Json{{"family", "power_law"}, {"p", spec.p}}; }

Json to_json(const Environment& env) {
  Json det = Json::array(), resp = Json::array(), cost = Json::array();
  for (const auto& s : env.det) det.push_back(to_json(s));
  for (const auto& s : env.harm_resp) resp.push_back(to_json(s));
  for (const auto& s : env.cost) cost.push_back(to_json(s));
  return Json{{"d", env.dim()},       {"h", vector_to_json(env.h)}, {"w", vector_to_json(env.w)},
              {"det", det},           {"harm_resp", resp},          {"cost", cost},
              {"B", env.budget},      {"eps_tot", env.eps_tot}};
}

Json to_json(const AuditPolicy& policy) {
  Json j{{"pi", vector_to_json(policy.pi())}, {"eps", vector_to_json(policy.eps())}};
  if (policy.full_detectability()) j["full_detectability"] = true;
  return j;
}

Json to_json(const AuditMetrics& m) {
  return Json{{"DH", m.dh}, {"TRH", m.trh}, {"B_w", m.bw}, {"delta", vector_to_json(m.delta)}};
}

DetectabilitySpec detectability_from_json(const Json& j) {
  const std::string f = family(j);
  if (f == "exponential") return detect::Exponential{number(j, "kappa")};
  if (f == "gaussian") {
    return detect::GaussianReduced{number(j, "sensitivity"), number(j, "delta"), number(j, "level"),
                                   number(j, "h_ref")};
  }
  if (f == "laplace") return detect::LaplaceReduced{number(j, "sensitivity"), number(j, "c_null"), number(j, "h_ref")};
  if (f == "randomized_response") {
    return detect::RandomizedResponseReduced{number(j, "n"), number(j, "level"), number(j, "h_ref")};
  }
  throw ContractError("json: unknown detectability family '" + f + "'");
}

HarmResponseSpec harm_response_from_json(const Json& j) {
  const std::string f = family(j);
  if (f == "exponential_decay") return harm::ExponentialDecay{number(j, "beta")};
  if (f == "linear_clamp") return harm::LinearClamp{number(j, "gamma")};
  throw ContractError("json: unknown harm-response family '" + f + "'");
}

CostSpec cost_from_json(const Json& j) {
  const std::string f = family(j);
  if (f != "power_law") throw ContractError("json: unknown cost family '" + f + "'");
  return PowerLawCost{number(j, "p")};
}

Environment environment_from_json(const Json& j) {
  if (!j.is_object()) throw ContractError("json: environment must be an object");
  for (const char* key : {"h", "w", "det", "harm_resp", "cost"}) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      throw ContractError(std::string("json: environment needs array '") + key + "'");
    }
  }
  Environment env;
  env.h = vector_from_json(j.at("h"));
  env.w = vector_from_json(j.at("w"));
  for (const auto& e : j.at("det")) env.det.push_back(detectability_from_json(e));
  for (const auto& e : j.at("harm_resp")) env.harm_resp.push_back(harm_response_from_json(e));
  for (const auto& e : j.at("cost")) env.cost.push_back(cost_from_json(e));
  env.budget = number(j, "B");
  env.eps_tot = number(j, "eps_tot");
  if (j.contains("d") && j.at("d").get<int>() != env.dim()) {
    throw ContractError("json: 'd' does not match the length of 'h'");
  }
  env.validate();
  return env;
}

AuditPolicy policy_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("pi") || !j.contains("eps")) {
    throw ContractError("json: policy needs 'pi' and 'eps'");
  }
  const Vector pi = vector_from_json(j.at("pi"));
  if (j.value("full_detectability", false)) {
    const Vector eps = vector_from_json(j.at("eps"));
    return AuditPolicy::full_detectability_reference(static_cast<int>(pi.size()), eps.sum());
  }
  return AuditPolicy::create(pi, vector_from_json(j.at("eps")));
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace spad
