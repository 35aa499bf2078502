#include "ivs/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "ivs/errors.hpp"
#include "ivs/rng.hpp"
#include "json_io.hpp"
#include "parallel.hpp"

namespace ivs {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("training: learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("training: momentum must be in [0, 1)");
  if (batch_size < 1) throw Error("training: batch_size must be >= 1");
  if (epochs < 0) throw Error("training: epochs must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("training: train_fraction must be in (0, 1)");
}

SubtaskData label_dataset(std::span<const RawTrajectory> trajs, const Hyperparameters& hyper, const Camera& cam) {
  SubtaskData out;
  out.reserve(trajs.size());
  for (const auto& t : trajs) out.push_back(label_trajectory(t, hyper, cam));
  return out;
}

Split split_trajectories(int n, double train_fraction, std::uint64_t seed, Subtask subtask) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng = make_rng(seed, {stream::split, subtask == Subtask::pick ? 0u : 1u});
  std::shuffle(idx.begin(), idx.end(), rng);
  const int n_train = static_cast<int>(std::lround(n * train_fraction));
  Split s;
  s.train.assign(idx.begin(), idx.begin() + std::clamp(n_train, 0, n));
  s.heldout.assign(idx.begin() + std::clamp(n_train, 0, n), idx.end());
  return s;
}

namespace {

std::vector<const LabeledSample*> gather(const SubtaskData& data, std::span<const int> trajs) {
  std::vector<const LabeledSample*> out;
  for (int t : trajs)
    for (const auto& s : data[t]) out.push_back(&s);
  return out;
}

Example<float> to_example(const LabeledSample& s) {
  return {to_input<float>(s.image), s.action, s.termination};
}

double sample_loss(const NetOutput& o, const LabeledSample& s, double mu) {
  const double dx = o.action.x - s.action.x;
  const double dy = o.action.y - s.action.y;
  const double ce = s.termination ? -std::log(o.phi_prob) : -std::log(1.0 - o.phi_prob);
  return dx * dx + dy * dy + mu * ce;
}

}  // namespace

HeldoutMetrics evaluate_member(const Network<float>& member, const SubtaskData& data,
                               std::span<const int> trajectories, Subtask subtask, double mu) {
  HeldoutMetrics m;
  int directional = 0, correct = 0;
  double angle_sum = 0.0, loss_sum = 0.0;
  for (const LabeledSample* s : gather(data, trajectories)) {
    const NetOutput o = member.forward(s->image, subtask);
    loss_sum += sample_loss(o, *s, mu);
    correct += (o.phi_prob >= 0.5) == (s->termination == 1);
    const double ln = s->action.norm();
    if (ln > 0.0) {
      const double pn = o.action.norm();
      double ang = 90.0;
      if (pn > 0.0) {
        const double c = (o.action.x * s->action.x + o.action.y * s->action.y) / (pn * ln);
        ang = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
      }
      angle_sum += ang;
      ++directional;
    }
    ++m.samples;
  }
  if (m.samples > 0) {
    m.loss = loss_sum / m.samples;
    m.termination_accuracy = static_cast<double>(correct) / m.samples;
  }
  if (directional > 0) m.mean_angle_deg = angle_sum / directional;
  return m;
}

TrainingReport train_member(Network<float>& member, const SubtaskData& pick, const SubtaskData& place,
                            const Hyperparameters& hyper, const TrainingConfig& cfg, std::uint64_t seed,
                            const EpochCallback& on_epoch) {
  cfg.validate();
  hyper.validate();
  if (pick.size() < 2 || place.size() < 2)
    throw Error("training needs at least 2 trajectories per subtask");
  const Split sp_pick = split_trajectories(static_cast<int>(pick.size()), cfg.train_fraction, seed, Subtask::pick);
  const Split sp_place = split_trajectories(static_cast<int>(place.size()), cfg.train_fraction, seed, Subtask::place);
  auto tr_pick = gather(pick, sp_pick.train);
  auto tr_place = gather(place, sp_place.train);
  const auto ho_pick = gather(pick, sp_pick.heldout);
  const auto ho_place = gather(place, sp_place.heldout);
  if (tr_pick.empty() || tr_place.empty() || ho_pick.empty() || ho_place.empty())
    throw Error("empty train/held-out split");

  TrainingReport rep;
  rep.seed = seed;
  rep.train_samples = static_cast<int>(tr_pick.size() + tr_place.size());
  rep.heldout_samples = static_cast<int>(ho_pick.size() + ho_place.size());

  auto heldout_loss = [&] {
    const auto a = evaluate_member(member, pick, sp_pick.heldout, Subtask::pick, hyper.mu);
    const auto b = evaluate_member(member, place, sp_place.heldout, Subtask::place, hyper.mu);
    return (a.loss * a.samples + b.loss * b.samples) / (a.samples + b.samples);
  };
  rep.initial_heldout_loss = heldout_loss();

  std::vector<float>& theta = member.params();
  std::vector<float> grad(theta.size(), 0.0f), vel(theta.size(), 0.0f);
  const float lr = static_cast<float>(cfg.learning_rate);
  const float mom = static_cast<float>(cfg.momentum);

  struct Batch {
    Subtask subtask;
    std::size_t begin, end;
  };
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = make_rng(seed, {stream::shuffle, static_cast<std::uint64_t>(epoch)});
    std::shuffle(tr_pick.begin(), tr_pick.end(), rng);
    std::shuffle(tr_place.begin(), tr_place.end(), rng);
    // Alternate pick and place batches; the longer list finishes alone.
    std::vector<Batch> batches;
    const std::size_t B = cfg.batch_size;
    for (std::size_t i = 0, j = 0; i < tr_pick.size() || j < tr_place.size();) {
      if (i < tr_pick.size()) {
        batches.push_back({Subtask::pick, i, std::min(i + B, tr_pick.size())});
        i += B;
      }
      if (j < tr_place.size()) {
        batches.push_back({Subtask::place, j, std::min(j + B, tr_place.size())});
        j += B;
      }
    }
    double loss_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& b = batches[bi];
      const auto& list = b.subtask == Subtask::pick ? tr_pick : tr_place;
      std::vector<Example<float>> ex;
      ex.reserve(b.end - b.begin);
      Rng aug = make_rng(seed, {stream::augment, static_cast<std::uint64_t>(epoch), bi});
      for (std::size_t i = b.begin; i < b.end; ++i) {
        if (!cfg.augment) {
          ex.push_back(to_example(*list[i]));
          continue;
        }
        const int g = static_cast<int>(aug() % kDihedralOrder);
        ex.push_back({to_input<float>(dihedral(list[i]->image, g)), dihedral(list[i]->action, g),
                      list[i]->termination});
      }
      std::vector<const Example<float>*> ptrs;
      for (const auto& e : ex) ptrs.push_back(&e);
      std::fill(grad.begin(), grad.end(), 0.0f);
      const std::uint64_t dseed = make_rng(seed, {stream::dropout, static_cast<std::uint64_t>(epoch), bi})();
      const double l = member.loss_and_gradient(ptrs, b.subtask, hyper.mu, Mode::train, dseed, &grad);
      loss_sum += l * ex.size();
      count += ex.size();
      for (std::size_t p = 0; p < theta.size(); ++p) {
        vel[p] = mom * vel[p] - lr * grad[p];
        theta[p] += vel[p];
      }
    }
    EpochStats st{epoch + 1, loss_sum / static_cast<double>(count), heldout_loss()};
    rep.epochs.push_back(st);
    if (on_epoch) on_epoch(st);
  }
  const auto a = evaluate_member(member, pick, sp_pick.heldout, Subtask::pick, hyper.mu);
  const auto b = evaluate_member(member, place, sp_place.heldout, Subtask::place, hyper.mu);
  auto& m = rep.final_metrics;
  m.samples = a.samples + b.samples;
  m.loss = (a.loss * a.samples + b.loss * b.samples) / m.samples;
  m.termination_accuracy = (a.termination_accuracy * a.samples + b.termination_accuracy * b.samples) / m.samples;
  m.mean_angle_deg = (a.mean_angle_deg + b.mean_angle_deg) / 2.0;
  return rep;
}

int EnsemblePolicy::effective_kappa() const { return std::clamp(hyper.kappa, 1, std::max(k(), 1)); }

EnsemblePolicy init_ensemble(int k, std::uint64_t seed, const Hyperparameters& hyper, const Architecture& arch) {
  expects(k >= 1, "init_ensemble: k must be >= 1");
  EnsemblePolicy p;
  p.hyper = hyper;
  p.hyper.k = k;
  for (int i = 0; i < k; ++i) {
    p.members.emplace_back(arch);
    p.members.back().init(seed + i);
    p.member_seeds.push_back(seed + i);
  }
  return p;
}

std::vector<TrainingReport> train_ensemble(EnsemblePolicy& policy, const SubtaskData& pick,
                                           const SubtaskData& place, const TrainingConfig& cfg, int threads,
                                           const MemberEpochCallback& on_epoch) {
  std::vector<TrainingReport> reports(policy.members.size());
  detail::parallel_for(policy.k(), threads, [&](int i) {
    EpochCallback cb;
    if (on_epoch) cb = [&on_epoch, i](const EpochStats& e) { on_epoch(i, e); };
    reports[i] = train_member(policy.members[i], pick, place, policy.hyper, cfg, policy.member_seeds[i], cb);
  });
  return reports;
}

EnsemblePolicy ensemble_prefix(const EnsemblePolicy& policy, int k) {
  expects(k >= 1 && k <= policy.k(), "ensemble_prefix: k out of range");
  EnsemblePolicy p;
  p.hyper = policy.hyper;
  p.hyper.k = k;
  p.members.assign(policy.members.begin(), policy.members.begin() + k);
  p.member_seeds.assign(policy.member_seeds.begin(), policy.member_seeds.begin() + k);
  return p;
}

QueryResult combine_votes(std::span<const NetOutput> outputs, double omega, int kappa) {
  expects(!outputs.empty(), "combine_votes: no member outputs");
  QueryResult r;
  r.members.assign(outputs.begin(), outputs.end());
  for (const auto& o : outputs) {
    r.action += o.action;
    r.votes += o.phi_prob >= omega ? 1 : 0;
  }
  r.action = (1.0 / outputs.size()) * r.action;
  r.termination = r.votes >= kappa ? 1 : 0;
  return r;
}

QueryResult query(const EnsemblePolicy& policy, const Image& image, Subtask subtask, double omega, int kappa,
                  int threads) {
  expects(policy.k() >= 1, "query: empty ensemble");
  const int n = policy.members[0].arch().input_size;
  if (image.width != n || image.height != n) throw Error("query: image has the wrong shape");
  const auto input = to_input<float>(image);
  std::vector<NetOutput> out(policy.members.size());
  detail::parallel_for(policy.k(), threads, [&](int i) {
    out[i] = policy.members[i].forward(std::span<const float>(input), subtask, Mode::eval);
  });
  return combine_votes(out, omega, std::clamp(kappa, 1, policy.k()));
}

QueryResult query(const EnsemblePolicy& policy, const Image& image, Subtask subtask, int threads) {
  return query(policy, image, subtask, policy.hyper.omega, policy.effective_kappa(), threads);
}

namespace {
constexpr char kMagic[4] = {'I', 'V', 'S', 'M'};
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

// Layout: "IVSM", u32 version, u64 header length, JSON header, then per member
// u64 count + raw little-endian float32 parameters.
void save_checkpoint(const EnsemblePolicy& policy, const std::filesystem::path& path) {
  expects(policy.k() >= 1, "save_checkpoint: empty ensemble");
  detail::json header{{"architecture", detail::to_json(policy.members[0].arch())},
                      {"hyper", detail::to_json(policy.hyper)},
                      {"member_seeds", policy.member_seeds}};
  const std::string h = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  auto put = [&](const void* p, std::size_t n) { out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
  put(kMagic, 4);
  put(&kCheckpointVersion, sizeof kCheckpointVersion);
  const std::uint64_t hl = h.size();
  put(&hl, sizeof hl);
  put(h.data(), h.size());
  for (const auto& m : policy.members) {
    const std::uint64_t n = m.params().size();
    put(&n, sizeof n);
    put(m.params().data(), n * sizeof(float));
  }
  if (!out) throw Error("write failed: " + path.string());
}

EnsemblePolicy load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing checkpoint " + path.string());
  auto get = [&](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw Error("truncated checkpoint " + path.string());
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error("not an ivs checkpoint: " + path.string());
  std::uint32_t version = 0;
  get(&version, sizeof version);
  if (version != kCheckpointVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  std::uint64_t hl = 0;
  get(&hl, sizeof hl);
  if (hl > (1u << 20)) throw Error("corrupt checkpoint header in " + path.string());
  std::string h(hl, '\0');
  get(h.data(), hl);
  EnsemblePolicy p;
  try {
    const auto header = detail::json::parse(h);
    const Architecture arch = detail::architecture_from(header.at("architecture"));
    detail::update_from(p.hyper, header.at("hyper"));
    p.member_seeds = header.at("member_seeds").get<std::vector<std::uint64_t>>();
    for (std::size_t i = 0; i < p.member_seeds.size(); ++i) {
      p.members.emplace_back(arch);
      std::uint64_t n = 0;
      get(&n, sizeof n);
      if (n != p.members.back().params().size())
        throw Error("parameter count mismatch for member " + std::to_string(i));
      get(p.members.back().params().data(), n * sizeof(float));
    }
  } catch (const detail::json::exception& e) {
    throw Error("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  if (p.members.empty()) throw Error("checkpoint has no members: " + path.string());
  p.hyper.k = p.k();
  return p;
}

}  // namespace ivs
