#include "grasp/scene_io.hpp"

#include "grasp/error.hpp"
#include "json.hpp"

namespace grasp {

using json = nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json quat(const Rotation& r) { return json::array({r.w(), r.x(), r.y(), r.z()}); }
json obb(const Obb& b) {
  return {{"center", vec(b.center)}, {"half_extents", vec(b.half_extents)}, {"rotation_wxyz", quat(b.rotation)}};
}

Vec3 read_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
Rotation read_quat(const json& j) {
  return Rotation::from_unit_quaternion(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
                                        j.at(3).get<double>());
}
Obb read_obb(const json& j) {
  return {read_vec(j.at("center")), read_vec(j.at("half_extents")), read_quat(j.at("rotation_wxyz"))};
}

}  // namespace

std::string episode_to_json(const EpisodeConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["target_index"] = c.target_index;
  j["support"] = obb(c.support);
  j["camera"] = {{"position", vec(c.camera.pose.position)},
                 {"rotation_wxyz", quat(c.camera.pose.rotation)},
                 {"near", c.camera.near},
                 {"far", c.camera.far}};
  j["light"] = {{"position", vec(c.light.position)}, {"intensity", c.light.intensity}};
  json blocks = json::array();
  for (const auto& b : c.blocks) {
    json parts = json::array();
    for (const auto& p : b.shape.parts) parts.push_back(obb(p));
    blocks.push_back({{"kind", std::string(to_string(b.shape.kind))},
                      {"dims", vec(b.shape.dims)},
                      {"wall_thickness", b.shape.wall_thickness},
                      {"scale", b.scale},
                      {"position", vec(b.pose.position)},
                      {"rotation_wxyz", quat(b.pose.rotation)},
                      {"parts", parts}});
  }
  j["blocks"] = blocks;
  return j.dump(2);
}

EpisodeConfig episode_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EpisodeConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.target_index = j.at("target_index").get<int>();
    c.support = read_obb(j.at("support"));
    const auto& cam = j.at("camera");
    c.camera.pose = Pose{read_vec(cam.at("position")), read_quat(cam.at("rotation_wxyz"))};
    c.camera.near = cam.at("near").get<double>();
    c.camera.far = cam.at("far").get<double>();
    c.light.position = read_vec(j.at("light").at("position"));
    c.light.intensity = j.at("light").at("intensity").get<double>();
    for (const auto& jb : j.at("blocks")) {
      Block b;
      b.shape.kind = shape_kind_from_string(jb.at("kind").get<std::string>());
      b.shape.dims = read_vec(jb.at("dims"));
      b.shape.wall_thickness = jb.at("wall_thickness").get<double>();
      for (const auto& p : jb.at("parts")) b.shape.parts.push_back(read_obb(p));
      b.scale = jb.at("scale").get<double>();
      b.pose = Pose{read_vec(jb.at("position")), read_quat(jb.at("rotation_wxyz"))};
      c.blocks.push_back(std::move(b));
    }
    if (c.target_index < 0 || c.target_index >= static_cast<int>(c.blocks.size()))
      throw Error(ErrorKind::Config, "target_index out of range");
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed episode document: ") + e.what());
  }
}

}  // namespace grasp
