#pragma once

#include <nlohmann/json.hpp>

#include "ivs/datapipe.hpp"
#include "ivs/network.hpp"

namespace ivs::detail {

using nlohmann::json;

inline json to_json(const Hyperparameters& h) {
  return {{"lambda", h.lambda}, {"nu", h.nu}, {"omega", h.omega},
          {"kappa", h.kappa},   {"mu", h.mu}, {"k", h.k}};
}

inline void update_from(Hyperparameters& h, const json& j) {
  h.lambda = j.value("lambda", h.lambda);
  h.nu = j.value("nu", h.nu);
  h.omega = j.value("omega", h.omega);
  h.kappa = j.value("kappa", h.kappa);
  h.mu = j.value("mu", h.mu);
  h.k = j.value("k", h.k);
}

inline json to_json(const Architecture& a) {
  json convs = json::array();
  for (const auto& c : a.convs) convs.push_back({{"kernel", c.kernel}, {"channels", c.channels}});
  return {{"input_size", a.input_size}, {"input_channels", a.input_channels}, {"convs", convs},
          {"hidden", a.hidden},         {"dropout", a.dropout}};
}

inline Architecture architecture_from(const json& j) {
  Architecture a;
  a.input_size = j.at("input_size").get<int>();
  a.input_channels = j.at("input_channels").get<int>();
  a.convs.clear();
  for (const auto& c : j.at("convs")) a.convs.push_back({c.at("kernel").get<int>(), c.at("channels").get<int>()});
  a.hidden = j.at("hidden").get<int>();
  a.dropout = j.at("dropout").get<double>();
  return a;
}

}  // namespace ivs::detail
