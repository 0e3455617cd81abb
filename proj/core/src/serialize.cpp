#include "relight/serialize.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "relight/errors.hpp"

namespace relight::io {

using nlohmann::json;

namespace {

json lighting_json(const ShLighting& light) {
  return json{{"coeffs", light.coeffs}, {"color", light.color}};
}

template <std::size_t N>
std::array<double, N> fixed_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != N) {
    throw IoError(std::string("expected an array of ") + std::to_string(N) + " numbers under \"" +
                  key + "\"");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j.at(key)[i].is_number()) throw IoError(std::string("non-numeric entry in \"") + key + "\"");
    out[i] = j.at(key)[i].get<double>();
  }
  return out;
}

ShLighting lighting_value(const json& j) {
  if (!j.is_object()) throw IoError("lighting must be a JSON object");
  ShLighting light;
  light.coeffs = fixed_array<sh::kNumCoeffs>(j, "coeffs");
  if (j.contains("color")) light.color = fixed_array<3>(j, "color");
  light.validate();
  return light;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("invalid JSON: ") + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> number_array(const json& j, const char* key, std::size_t expected) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != expected) {
    throw IoError(std::string("\"") + key + "\" must hold " + std::to_string(expected) + " numbers");
  }
  try {
    return j.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw IoError(std::string("\"") + key + "\" holds non-numeric entries");
  }
}

}  // namespace

std::string lighting_to_json(const ShLighting& light) { return lighting_json(light).dump(2); }

ShLighting lighting_from_json(const std::string& text) { return lighting_value(parse(text)); }

void write_lighting(const std::filesystem::path& path, const ShLighting& light) {
  dump(path, lighting_to_json(light));
}

ShLighting read_lighting(const std::filesystem::path& path) { return lighting_from_json(slurp(path)); }

std::string fit_state_to_json(const fit::FitState& state) {
  const int w = state.albedo.width;
  const int h = state.albedo.height;
  if (!state.normals.mask.same_shape(w, h)) throw ShapeError("fit state albedo and normals differ");
  json j;
  j["width"] = w;
  j["height"] = h;
  j["lights"] = json::array();
  for (const auto& l : state.lights) j["lights"].push_back(lighting_json(l));
  std::vector<double> albedo, normals;
  std::vector<int> mask;
  albedo.reserve(3 * state.albedo.size());
  normals.reserve(3 * state.normals.size());
  for (std::size_t p = 0; p < state.albedo.size(); ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      albedo.push_back(state.albedo[p][ch]);
      normals.push_back(state.normals.normals[p][ch]);
    }
    mask.push_back(state.normals.mask[p] ? 1 : 0);
  }
  j["albedo"] = albedo;
  j["normals"] = normals;
  j["mask"] = mask;
  if (state.spec) {
    j["spec"] = json{{"s_p", state.spec->spec_reflectance}, {"alpha", state.spec->shininess}};
  } else {
    j["spec"] = nullptr;
  }
  j["objective"] = state.objective;
  j["iterations"] = state.iterations;
  return j.dump();
}

fit::FitState fit_state_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object() || !j.contains("width") || !j.contains("height")) {
    throw IoError("fit state needs width and height");
  }
  const int w = j.at("width").get<int>();
  const int h = j.at("height").get<int>();
  if (w <= 0 || h <= 0) throw IoError("fit state has a non-positive size");
  const auto n = static_cast<std::size_t>(w) * h;

  fit::FitState state;
  if (!j.contains("lights") || !j.at("lights").is_array()) throw IoError("fit state needs lights");
  for (const auto& l : j.at("lights")) state.lights.push_back(lighting_value(l));

  const auto albedo = number_array(j, "albedo", 3 * n);
  const auto normals = number_array(j, "normals", 3 * n);
  const auto mask = number_array(j, "mask", n);
  state.albedo = RadianceImage(w, h);
  state.normals = NormalMap(w, h);
  for (std::size_t p = 0; p < n; ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      state.albedo[p][ch] = albedo[3 * p + ch];
      state.normals.normals[p][ch] = normals[3 * p + ch];
    }
    state.normals.mask.values[p] = mask[p] != 0.0 ? 1 : 0;
  }
  state.normals.validate();

  if (j.contains("spec") && !j.at("spec").is_null()) {
    const auto& s = j.at("spec");
    state.spec = fit::SpecularParams{s.at("s_p").get<double>(), s.at("alpha").get<double>()};
    if (!(state.spec->shininess >= 1.0) || !(state.spec->spec_reflectance >= 0.0)) {
      throw IoError("fit state has invalid specular parameters");
    }
  }
  state.objective = j.value("objective", 0.0);
  state.iterations = j.value("iterations", 0);
  return state;
}

void write_fit_state(const std::filesystem::path& path, const fit::FitState& state) {
  dump(path, fit_state_to_json(state));
}

fit::FitState read_fit_state(const std::filesystem::path& path) {
  return fit_state_from_json(slurp(path));
}

}  // namespace relight::io
