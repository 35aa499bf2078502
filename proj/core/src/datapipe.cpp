#include "ivs/datapipe.hpp"

#include <tuple>

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ivs/errors.hpp"

namespace ivs {

using nlohmann::json;

void Hyperparameters::validate() const {
  if (!(lambda > 0.0)) throw Error("hyperparameters: lambda must be > 0");
  if (!(nu > 0.0)) throw Error("hyperparameters: nu must be > 0");
  if (!(omega >= 0.0 && omega <= 1.0)) throw Error("hyperparameters: omega must be in [0, 1]");
  if (k < 1) throw Error("hyperparameters: k must be >= 1");
  if (kappa < 1 || kappa > k) throw Error("hyperparameters: kappa must be in [1, k]");
  if (!(mu >= 0.0)) throw Error("hyperparameters: mu must be >= 0");
}

Image preprocess(const Image& raw, const Pose2& peg_center, const Camera& cam) {
  const PixelRect win = centered_window(cam, peg_center, kCropSize);
  const int c0 = win.col - raw.origin_col;
  const int r0 = win.row - raw.origin_row;
  if (c0 < 0 || r0 < 0 || c0 + win.width > raw.width || r0 + win.height > raw.height)
    throw Error("preprocess: crop window around the peg leaves the raw image");
  Image out = crop(raw, c0, r0, win.width, win.height);
  const double keep = kBlockKeepRadiusMm;
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      const Rgb px = out.at(c, r);
      if (!is_red(px)) continue;
      if (distance(cam.pixel_center(win.col + c, win.row + r), peg_center) > keep)
        out.set(c, r, palette::background);
    }
  }
  return out;
}

Pose2 dihedral(const Pose2& v, int g) {
  expects(g >= 0 && g < kDihedralOrder, "dihedral: element out of range");
  Pose2 r = v;
  for (int i = 0; i < g % 4; ++i) r = {-r.y, r.x};
  if (g >= 4) r.x = -r.x;
  return r;
}

Image dihedral(const Image& img, int g) {
  expects(g >= 0 && g < kDihedralOrder, "dihedral: element out of range");
  expects(img.width == img.height, "dihedral: image must be square");
  const int n = img.width;
  Image out(n, n);
  out.origin_col = img.origin_col;
  out.origin_row = img.origin_row;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      // Offsets from the center in world orientation (row axis points down).
      int u = 2 * c - (n - 1), v = (n - 1) - 2 * r;
      for (int i = 0; i < g % 4; ++i) std::tie(u, v) = std::pair{-v, u};
      if (g >= 4) u = -u;
      out.set((u + n - 1) / 2, ((n - 1) - v) / 2, img.at(c, r));
    }
  return out;
}

std::vector<Pose2> action_labels(std::span<const Pose2> p, double lambda) {
  expects(lambda > 0.0, "action_labels: lambda must be > 0");
  std::vector<Pose2> out(p.size());
  if (p.empty()) return out;
  const std::size_t T = p.size() - 1;
  for (std::size_t t = 0; t < p.size(); ++t) {
    std::size_t tp = T;
    for (std::size_t u = t + 1; u <= T; ++u) {
      if (distance(p[u], p[t]) >= lambda) {
        tp = u;
        break;
      }
    }
    const Pose2 d = p[tp] - p[t];
    const double n = d.norm();
    out[t] = n > 0.0 ? (lambda / n) * d : Pose2{};
  }
  return out;
}

std::vector<int> termination_labels(std::span<const Pose2> p, double nu) {
  expects(nu > 0.0, "termination_labels: nu must be > 0");
  std::vector<int> out(p.size());
  if (p.empty()) return out;
  for (std::size_t t = 0; t < p.size(); ++t) out[t] = distance(p.back(), p[t]) <= nu ? 1 : 0;
  return out;
}

std::vector<Pose2> positions_of(const RawTrajectory& traj) {
  std::vector<Pose2> p;
  p.reserve(traj.frames.size());
  for (const auto& f : traj.frames) p.push_back(f.p);
  return p;
}

std::vector<std::pair<Image, Pose2>> extract_actions(const RawTrajectory& traj, double lambda,
                                                     const Camera& cam) {
  const auto labels = action_labels(positions_of(traj), lambda);
  std::vector<std::pair<Image, Pose2>> out;
  out.reserve(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t)
    out.emplace_back(preprocess(traj.frames[t].image, traj.crop_center, cam), labels[t]);
  return out;
}

std::vector<std::pair<Image, int>> extract_termination(const RawTrajectory& traj, double nu,
                                                       const Camera& cam) {
  const auto labels = termination_labels(positions_of(traj), nu);
  std::vector<std::pair<Image, int>> out;
  out.reserve(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t)
    out.emplace_back(preprocess(traj.frames[t].image, traj.crop_center, cam), labels[t]);
  return out;
}

std::vector<LabeledSample> label_trajectory(const RawTrajectory& traj, const Hyperparameters& hyper,
                                            const Camera& cam) {
  const auto p = positions_of(traj);
  const auto actions = action_labels(p, hyper.lambda);
  const auto terms = termination_labels(p, hyper.nu);
  std::vector<LabeledSample> out;
  out.reserve(p.size());
  for (std::size_t t = 0; t < p.size(); ++t)
    out.push_back({preprocess(traj.frames[t].image, traj.crop_center, cam), actions[t], terms[t]});
  return out;
}

namespace {

std::string image_name(int traj_id, std::size_t frame) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "images/%06d_%03zu.ppm", traj_id, frame);
  return buf;
}

json pose_json(const Pose2& p) { return json::array({p.x, p.y}); }

Pose2 pose_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void write_dataset(std::span<const RawTrajectory> trajs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::trunc);
  if (!manifest) throw Error("cannot write " + (dir / "manifest.jsonl").string());
  for (const auto& tr : trajs) {
    json rec;
    rec["id"] = tr.id;
    rec["subtask"] = std::string(to_string(tr.subtask));
    rec["peg_id"] = tr.peg_id;
    rec["instrument"] = tr.instrument;
    rec["capture_rate"] = tr.capture_rate;
    rec["crop_center"] = pose_json(tr.crop_center);
    json frames = json::array();
    for (std::size_t i = 0; i < tr.frames.size(); ++i) {
      const auto& f = tr.frames[i];
      const std::string name = image_name(tr.id, i);
      write_ppm(dir / name, f.image);
      frames.push_back({{"t", f.t},
                        {"image_path", name},
                        {"origin", json::array({f.image.origin_col, f.image.origin_row})},
                        {"p", pose_json(f.p)}});
    }
    rec["frames"] = std::move(frames);
    manifest << rec.dump() << '\n';
  }
  if (!manifest) throw Error("write failed: " + (dir / "manifest.jsonl").string());
}

std::vector<RawTrajectory> read_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.jsonl";
  std::ifstream in(path);
  if (!in) throw Error("missing manifest " + path.string());
  std::vector<RawTrajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(lineno);
    try {
      const json rec = json::parse(line);
      RawTrajectory tr;
      tr.id = rec.at("id").get<int>();
      tr.subtask = parse_subtask(rec.at("subtask").get<std::string>());
      tr.peg_id = rec.at("peg_id").get<int>();
      tr.instrument = rec.at("instrument").get<std::string>();
      tr.capture_rate = rec.at("capture_rate").get<double>();
      tr.crop_center = pose_from(rec.at("crop_center"));
      for (const auto& f : rec.at("frames")) {
        RawFrame fr;
        fr.t = f.at("t").get<double>();
        fr.p = pose_from(f.at("p"));
        fr.image = read_ppm(dir / f.at("image_path").get<std::string>());
        const auto& origin = f.at("origin");
        fr.image.origin_col = origin.at(0).get<int>();
        fr.image.origin_row = origin.at(1).get<int>();
        tr.frames.push_back(std::move(fr));
      }
      if (tr.frames.size() < 2) throw Error("trajectory has fewer than 2 frames");
      out.push_back(std::move(tr));
    } catch (const json::exception& e) {
      throw Error(where + ": malformed record: " + e.what());
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ivs
