#include "multicoap/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>

#include "multicoap/error.hpp"

namespace multicoap::config {

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type: " + j.at(key).dump());
  }
}

const char* backend_name(Backend b) { return b == Backend::Reference ? "reference" : "parallel"; }

}  // namespace

Json to_json(const FitConfig& c) {
  Json j;
  j["q"] = c.q;
  j["qs"] = c.qs;
  j["rank"] = c.rank ? Json(*c.rank) : Json(nullptr);
  j["max_iter"] = c.max_iter;
  j["eps"] = c.eps;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["backend"] = backend_name(c.backend);
  j["parameter_expansion"] = c.parameter_expansion;
  return j;
}

Json to_json(const SimConfig& c) {
  Json j;
  j["n"] = c.n;
  j["p"] = c.p;
  j["d"] = c.d;
  j["q"] = c.q;
  j["qs"] = c.qs;
  j["r0"] = c.r0;
  j["rho_a"] = c.rho_a;
  j["rho_b"] = c.rho_b;
  j["rho_z"] = c.rho_z;
  j["sigma0_sq"] = c.sigma0_sq;
  j["a_range"] = c.a_range;
  j["seed"] = c.seed;
  j["structure_seed"] = c.structure_seed;
  j["censor_rates"] = c.censor_rates;
  return j;
}

FitConfig fit_config_from_json(const Json& j) {
  reject_unknown(j, {"q", "qs", "rank", "max_iter", "eps", "seed", "threads", "backend", "parameter_expansion"},
                 "fit config");
  FitConfig c;
  read(j, "q", c.q);
  if (j.contains("qs")) {
    if (j.at("qs").is_number_integer()) {
      c.qs = {j.at("qs").get<int>()};
    } else {
      read(j, "qs", c.qs);
    }
  }
  if (j.contains("rank") && !j.at("rank").is_null()) {
    int r = 0;
    read(j, "rank", r);
    c.rank = r;
  }
  read(j, "max_iter", c.max_iter);
  read(j, "eps", c.eps);
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  read(j, "parameter_expansion", c.parameter_expansion);
  if (j.contains("backend")) {
    std::string name;
    read(j, "backend", name);
    if (name == "parallel") {
      c.backend = Backend::Parallel;
    } else if (name == "reference") {
      c.backend = Backend::Reference;
    } else {
      throw ConfigError("backend must be 'parallel' or 'reference', got '" + name + "'");
    }
  }
  return c;
}

SimConfig sim_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"n", "p", "d", "q", "qs", "r0", "rho_a", "rho_b", "rho_z", "sigma0_sq", "a_range", "seed",
                  "structure_seed", "censor_rates"},
                 "simulation config");
  SimConfig c;
  read(j, "n", c.n);
  read(j, "p", c.p);
  read(j, "d", c.d);
  read(j, "q", c.q);
  if (j.contains("qs") && j.at("qs").is_number_integer()) {
    c.qs.assign(c.n.size(), j.at("qs").get<int>());
  } else {
    read(j, "qs", c.qs);
  }
  read(j, "r0", c.r0);
  read(j, "rho_a", c.rho_a);
  read(j, "rho_b", c.rho_b);
  read(j, "rho_z", c.rho_z);
  read(j, "sigma0_sq", c.sigma0_sq);
  read(j, "a_range", c.a_range);
  read(j, "seed", c.seed);
  read(j, "structure_seed", c.structure_seed);
  read(j, "censor_rates", c.censor_rates);
  c.validate();
  return c;
}

void resolve_qs(FitConfig& c, std::size_t num_studies) {
  if (c.qs.size() == 1 && num_studies > 1) c.qs.assign(num_studies, c.qs.front());
}

Json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("command") && j.contains("config")) return j.at("config");
  return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError(DataErrorKind::Io, "failed writing " + path.string());
}

}  // namespace multicoap::config
