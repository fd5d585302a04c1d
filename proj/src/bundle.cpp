#include "exsim/bundle.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "exsim/csv.hpp"
#include "exsim/errors.hpp"

namespace exsim {

nlohmann::json bundle_to_json(const ModelBundle& b) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : b.history) {
    history.push_back(nlohmann::json{{"ell_x_prev", h.ell_x_prev},
                                     {"ell_eps", h.ell_eps},
                                     {"lagged", h.lagged},
                                     {"predecessor_index", h.predecessor_index}});
  }
  nlohmann::json margins = nlohmann::json::array();
  for (const auto& m : b.margins) margins.push_back(mixture_to_json(m));
  return nlohmann::json{{"schema_version", b.schema_version},
                        {"length", b.length},
                        {"delta", b.delta},
                        {"p_u", b.p_u},
                        {"u_ell", b.u_ell},
                        {"trend", trend_to_json(b.trend)},
                        {"ar", ar_to_json(b.ar)},
                        {"margins", margins},
                        {"polar", polar_to_json(b.polar)},
                        {"angular", angular_to_json(b.angular)},
                        {"history", history}};
}

ModelBundle bundle_from_json(const nlohmann::json& j) {
  ModelBundle b;
  b.schema_version = j.at("schema_version").get<int>();
  if (b.schema_version != kBundleSchemaVersion)
    throw DataError("bundle schema version " +
                    std::to_string(b.schema_version) + " not supported");
  b.length = j.at("length").get<int>();
  b.delta = j.at("delta").get<int>();
  b.p_u = j.at("p_u").get<double>();
  b.u_ell = j.at("u_ell").get<double>();
  b.trend = trend_from_json(j.at("trend"));
  b.ar = ar_from_json(j.at("ar"));
  for (const auto& jm : j.at("margins"))
    b.margins.push_back(mixture_from_json(jm));
  b.polar = polar_from_json(j.at("polar"));
  b.angular = angular_from_json(j.at("angular"));
  for (const auto& jh : j.at("history")) {
    HistoryEntry h;
    h.ell_x_prev = jh.at("ell_x_prev").get<double>();
    h.ell_eps = jh.at("ell_eps").get<double>();
    h.lagged = jh.at("lagged").get<std::vector<std::vector<double>>>();
    h.predecessor_index = jh.at("predecessor_index").get<std::int64_t>();
    b.history.push_back(std::move(h));
  }
  return b;
}

void save_bundle(const ModelBundle& b, const std::filesystem::path& path) {
  write_file_atomic(path, bundle_to_json(b).dump(1) + "\n");
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open bundle: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError("bundle parse error: " + std::string(e.what()));
  }
  return bundle_from_json(j);
}

}  // namespace exsim
