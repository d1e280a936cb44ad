#pragma once

#include <nlohmann/json.hpp>

#include "unmix/denoise.hpp"

namespace unmix {

inline nlohmann::ordered_json denoiser_to_json(const DenoiserSpec& d) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(d.kind);
  switch (d.kind) {
    case DenoiserKind::Gaussian: j["sigma"] = d.sigma; break;
    case DenoiserKind::Median: j["radius"] = d.radius; break;
    case DenoiserKind::Nlm:
      j["patch_radius"] = d.patch_radius;
      j["search_radius"] = d.search_radius;
      j["h"] = d.h;
      break;
    case DenoiserKind::LinearScale: j["c"] = d.scale_c; break;
    default: break;
  }
  return j;
}

inline DenoiserSpec denoiser_from_json(const nlohmann::json& j) {
  DenoiserSpec d;
  d.kind = denoiser_kind_from_string(j.at("kind").get<std::string>());
  d.sigma = j.value("sigma", d.sigma);
  d.radius = j.value("radius", d.radius);
  d.patch_radius = j.value("patch_radius", d.patch_radius);
  d.search_radius = j.value("search_radius", d.search_radius);
  d.h = j.value("h", d.h);
  d.scale_c = j.value("c", d.scale_c);
  check_denoiser(d);
  return d;
}

}  // namespace unmix
