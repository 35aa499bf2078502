#include "ivs/bench.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ivs/errors.hpp"
#include "ivs/rng.hpp"

namespace ivs {

std::string MethodSpec::label() const {
  switch (method) {
    case Method::uncal: return "UNCAL";
    case Method::cal: return "CAL_" + trained_on;
    case Method::ivs: return "IVS_" + trained_on;
  }
  return "?";
}

MethodSpec parse_method_spec(std::string_view s) {
  const auto us = s.find('_');
  std::string head(s.substr(0, us));
  for (auto& c : head) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  MethodSpec m;
  m.method = parse_method(head);
  if (m.method == Method::uncal) {
    if (us != std::string_view::npos) throw Error("UNCAL takes no training instrument: '" + std::string(s) + "'");
    return m;
  }
  m.trained_on = us == std::string_view::npos ? "A" : std::string(s.substr(us + 1));
  if (m.trained_on.empty()) throw Error("missing training instrument in '" + std::string(s) + "'");
  return m;
}

Observer fit_observer_for(const std::string& instrument, const Config& cfg, std::uint64_t seed) {
  auto rollouts = excitation_rollouts(cfg.instrument(instrument), cfg.observer_rollouts, seed);
  Observer obs = fit_observer(rollouts);
  obs.trained_on = instrument;
  return obs;
}

namespace {

void add(CorrectionStats& s, const CorrectionResult& c) {
  // running sums; divided in finish()
  ++s.count;
  s.mean_steps += c.steps;
  s.mean_mm += c.distance;
  s.mean_seconds += c.elapsed;
}

void finish(CorrectionStats& s) {
  if (s.count == 0) return;
  s.mean_steps /= s.count;
  s.mean_mm /= s.count;
  s.mean_seconds /= s.count;
}

}  // namespace

TrialReport run_trial(const MethodSpec& method, const std::string& instrument, const Resources& res,
                      const Config& cfg, std::uint64_t seed) {
  const Observer* observer = nullptr;
  if (method.method == Method::cal) {
    auto it = res.observers.find(method.trained_on);
    if (it == res.observers.end()) throw Error("no observer fitted on instrument " + method.trained_on);
    observer = &it->second;
  }
  if (method.method == Method::ivs && (res.policy == nullptr || res.policy->k() < 1))
    throw Error("IVS needs a trained model");

  TrialReport rep;
  rep.method = method.label();
  rep.instrument = instrument;
  rep.seed = seed;
  ServoConfig servo;
  if (method.method == Method::ivs) {
    Hyperparameters h = cfg.hyper;
    h.k = res.policy->k();
    h.kappa = std::min(h.kappa, h.k);
    servo = servo_config_for(cfg.timing, h, cfg.max_steps);
    rep.k = h.k;
    rep.servo_rate = servo.rate;
  }

  InstrumentModel inst = cfg.instrument(instrument);
  inst.reseed(make_rng(seed, {stream::trial, stream::actuator})());
  Simulation sim = Simulation::start(init_board(seed, Side::left), std::move(inst), cfg.camera, cfg.timing, observer);

  double time_sum = 0.0, corr_sum = 0.0;
  for (int round = 0; round < 2; ++round) {
    for (int local = 0; local < 6; ++local) {
      const int src = round == 0 ? local : local + 6;
      const auto block = block_on_peg(sim.state, src);
      if (!block) continue;
      TransferRecord tr;
      tr.round = round;
      tr.block_id = *block;
      tr.source_peg = src;
      tr.target_peg = mirror_peg(src);
      ++rep.transfers_attempted;

      Perception perc;
      double t_start = 0.0;
      SubtaskResult pick;
      for (int attempt = 0; attempt < 2 && !tr.picked; ++attempt) {
        t_start = sim.state.clock;
        const std::uint64_t ps = make_rng(seed, {stream::perception, static_cast<std::uint64_t>(round),
                                                 static_cast<std::uint64_t>(local),
                                                 static_cast<std::uint64_t>(attempt)})();
        perc = perceive_poses(sim.state, ps, cfg.perception);
        SubtaskRequest req{Subtask::pick, method.method, pick_target(perc, *block), src, perc.pegs[src]};
        pick = run_subtask(sim, req, res.policy, servo);
        ++rep.picks_attempted;
        ++tr.pick_attempts;
        if (method.method == Method::ivs) add(rep.pick_correction, pick.correction);
        tr.picked = pick.success;
      }
      tr.pick_correction = pick.correction;
      if (tr.picked) {
        ++rep.picks_succeeded;
        // The controller's belief of the grip: perceived opening relative to
        // where it thinks the jaws closed.
        const Pose2 grip = perc.blocks[*block] - sim.believed_tip();
        SubtaskRequest req{Subtask::place, method.method, place_target(perc, tr.target_peg, grip), tr.target_peg,
                           perc.pegs[tr.target_peg]};
        const SubtaskResult place = run_subtask(sim, req, res.policy, servo);
        ++rep.places_attempted;
        if (method.method == Method::ivs) add(rep.place_correction, place.correction);
        tr.place_correction = place.correction;
        tr.placed = place.success;
        if (tr.placed) {
          ++rep.places_succeeded;
          ++rep.transfers_succeeded;
          tr.time = sim.state.clock - t_start;
          time_sum += tr.time;
          corr_sum += tr.pick_correction.elapsed + tr.place_correction.elapsed;
        }
      }
      rep.transfers.push_back(tr);
    }
  }
  if (rep.transfers_succeeded > 0) {
    rep.mean_transfer_time = time_sum / rep.transfers_succeeded;
    rep.mean_correction_time = corr_sum / rep.transfers_succeeded;
  }
  finish(rep.pick_correction);
  finish(rep.place_correction);
  rep.total_time = sim.state.clock;
  return rep;
}

CellSummary summarize(std::span<const TrialReport> trials) {
  CellSummary c;
  if (trials.empty()) return c;
  c.method = trials.front().method;
  c.instrument = trials.front().instrument;
  c.trials = static_cast<int>(trials.size());
  double time_sum = 0.0;
  CorrectionStats* stats[2] = {&c.pick_correction, &c.place_correction};
  for (const auto& t : trials) {
    c.transfers_attempted += t.transfers_attempted;
    c.transfers_succeeded += t.transfers_succeeded;
    c.picks_attempted += t.picks_attempted;
    c.picks_succeeded += t.picks_succeeded;
    c.places_attempted += t.places_attempted;
    c.places_succeeded += t.places_succeeded;
    time_sum += t.mean_transfer_time * t.transfers_succeeded;
    const CorrectionStats* src[2] = {&t.pick_correction, &t.place_correction};
    for (int i = 0; i < 2; ++i) {
      stats[i]->count += src[i]->count;
      stats[i]->mean_steps += src[i]->mean_steps * src[i]->count;
      stats[i]->mean_mm += src[i]->mean_mm * src[i]->count;
      stats[i]->mean_seconds += src[i]->mean_seconds * src[i]->count;
    }
  }
  for (auto* s : stats) finish(*s);
  auto rate = [](int s, int a) { return a > 0 ? static_cast<double>(s) / a : 0.0; };
  c.transfer_rate = rate(c.transfers_succeeded, c.transfers_attempted);
  c.pick_rate = rate(c.picks_succeeded, c.picks_attempted);
  c.place_rate = rate(c.places_succeeded, c.places_attempted);
  if (c.transfers_succeeded > 0) c.mean_transfer_time = time_sum / c.transfers_succeeded;
  return c;
}

BenchmarkSummary benchmark(const std::vector<MethodSpec>& methods, const std::vector<std::string>& instruments,
                           int n_trials, std::uint64_t base_seed, const Resources& res, const Config& cfg) {
  if (n_trials < 1) throw Error("benchmark: n_trials must be >= 1");
  BenchmarkSummary s;
  s.config_hash = config_hash(cfg);
  for (const auto& m : methods)
    for (const auto& inst : instruments) {
      std::vector<TrialReport> cell;
      for (int i = 0; i < n_trials; ++i) cell.push_back(run_trial(m, inst, res, cfg, base_seed + i));
      s.cells.push_back(summarize(cell));
      s.trials.insert(s.trials.end(), cell.begin(), cell.end());
    }
  return s;
}

std::vector<AblationRow> ablate_ensemble(const EnsemblePolicy& policy, const std::vector<int>& k_list, int n_trials,
                                         std::uint64_t base_seed, const std::string& instrument, const Config& cfg,
                                         std::vector<TrialReport>* trials) {
  if (n_trials < 1) throw Error("ablate: n_trials must be >= 1");
  std::vector<AblationRow> rows;
  for (int k : k_list) {
    if (k < 1 || k > policy.k())
      throw Error("ablate: k=" + std::to_string(k) + " but the model has " + std::to_string(policy.k()) + " members");
    const EnsemblePolicy sub = ensemble_prefix(policy, k);
    Resources res;
    res.policy = &sub;
    std::vector<TrialReport> cell;
    for (int i = 0; i < n_trials; ++i)
      cell.push_back(run_trial({Method::ivs, "A"}, instrument, res, cfg, base_seed + i));
    const CellSummary c = summarize(cell);
    rows.push_back({k, cfg.timing.rate_for(k), n_trials, c.transfers_attempted, c.transfers_succeeded, c.transfer_rate});
    if (trials) trials->insert(trials->end(), cell.begin(), cell.end());
  }
  return rows;
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CorrectionResult, steps, distance, elapsed, terminated)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TransferRecord, round, block_id, source_peg, target_peg, pick_attempts, picked,
                                   placed, time, pick_correction, place_correction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CorrectionStats, count, mean_steps, mean_mm, mean_seconds)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrialReport, method, instrument, seed, k, servo_rate, picks_attempted,
                                   picks_succeeded, places_attempted, places_succeeded, transfers_attempted,
                                   transfers_succeeded, mean_transfer_time, mean_correction_time, pick_correction,
                                   place_correction, total_time, transfers)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CellSummary, method, instrument, trials, transfers_attempted, transfers_succeeded,
                                   picks_attempted, picks_succeeded, places_attempted, places_succeeded, transfer_rate,
                                   pick_rate, place_rate, mean_transfer_time, pick_correction, place_correction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AblationRow, k, rate_hz, trials, transfers_attempted, transfers_succeeded,
                                   transfer_rate)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BenchmarkSummary, schema_version, config_hash, trials, cells, ablation)

std::string report_json(const BenchmarkSummary& summary) { return nlohmann::json(summary).dump(2) + "\n"; }

BenchmarkSummary parse_report(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const int v = j.at("schema_version").get<int>();
    if (v != kReportSchemaVersion) throw Error("unsupported report schema version " + std::to_string(v));
    return j.get<BenchmarkSummary>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

void emit_report(const BenchmarkSummary& summary, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report " + path.string());
  out << report_json(summary);
  if (!out) throw Error("write failed: " + path.string());
}

BenchmarkSummary read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

}  // namespace ivs
