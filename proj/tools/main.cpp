// ivs: demo generation, training, evaluation and ablation from the shell.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ivs/bench.hpp"
#include "ivs/config.hpp"
#include "ivs/errors.hpp"
#include "ivs/policy.hpp"
#include "ivs/supervisor.hpp"

namespace {

using namespace ivs;

struct Global {
  std::string config_path;
  int threads = 1;
  Config load() const { return config_path.empty() ? Config{} : load_config(config_path); }
};

double positive_fraction(const std::vector<RawTrajectory>& trajs, double nu) {
  std::size_t pos = 0, total = 0;
  for (const auto& t : trajs) {
    for (int f : termination_labels(positions_of(t), nu)) pos += f;
    total += t.frames.size();
  }
  return total ? static_cast<double>(pos) / total : 0.0;
}

std::size_t frame_count(const std::vector<RawTrajectory>& trajs) {
  std::size_t n = 0;
  for (const auto& t : trajs) n += t.frames.size();
  return n;
}

void gen_demos(const Global& g, const std::string& out, std::uint64_t seed, const std::string& instrument) {
  const Config cfg = g.load();
  const auto ds = collect_dataset(cfg.demo, cfg.instrument(instrument), seed, cfg.camera, cfg.demos_per_peg, g.threads);
  write_dataset(ds.pick, std::filesystem::path(out) / "pick");
  write_dataset(ds.place, std::filesystem::path(out) / "place");
  std::vector<RawTrajectory> all = ds.pick;
  all.insert(all.end(), ds.place.begin(), ds.place.end());
  nlohmann::json s{{"pick_trajectories", ds.pick.size()},
                   {"place_trajectories", ds.place.size()},
                   {"pick_frames", frame_count(ds.pick)},
                   {"place_frames", frame_count(ds.place)},
                   {"positive_fraction", positive_fraction(all, cfg.hyper.nu)}};
  std::cout << s.dump() << "\n";
}

void train(const Global& g, const std::string& data, int k, std::uint64_t seed, const std::string& out) {
  Config cfg = g.load();
  cfg.hyper.k = k;
  cfg.hyper.kappa = std::min(cfg.hyper.kappa, k);
  const std::filesystem::path dir(data);
  const auto pick = label_dataset(read_dataset(dir / "pick"), cfg.hyper, cfg.camera);
  const auto place = label_dataset(read_dataset(dir / "place"), cfg.hyper, cfg.camera);
  EnsemblePolicy policy = init_ensemble(k, seed, cfg.hyper);
  const auto all = train_ensemble(policy, pick, place, cfg.training, g.threads, [](int i, const EpochStats& e) {
    std::fprintf(stderr, "member %d epoch %d train %.5f heldout %.5f\n", i, e.epoch, e.train_loss, e.heldout_loss);
  });
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& rep : all) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : rep.epochs) epochs.push_back({e.epoch, e.train_loss, e.heldout_loss});
    reports.push_back({{"seed", rep.seed},
                       {"initial_heldout_loss", rep.initial_heldout_loss},
                       {"epochs", epochs},
                       {"heldout_angle_deg", rep.final_metrics.mean_angle_deg},
                       {"heldout_termination_accuracy", rep.final_metrics.termination_accuracy}});
  }
  save_checkpoint(policy, out);
  std::cout << nlohmann::json{{"model", out}, {"members", reports}}.dump() << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

Resources resources_for(const std::vector<MethodSpec>& methods, const std::string& model, const Config& cfg,
                        std::uint64_t seed, std::optional<EnsemblePolicy>& holder) {
  Resources res;
  for (const auto& m : methods) {
    if (m.method == Method::cal && !res.observers.count(m.trained_on))
      res.observers[m.trained_on] = fit_observer_for(m.trained_on, cfg, seed);
    if (m.method == Method::ivs && !holder) {
      if (model.empty()) throw Error("IVS needs --model");
      holder = load_checkpoint(model);
      res.policy = &*holder;
    }
  }
  return res;
}

void finish_report(const BenchmarkSummary& s, const std::string& out) {
  if (!out.empty()) emit_report(s, out);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : s.cells)
    cells.push_back({{"method", c.method}, {"instrument", c.instrument}, {"transfer_rate", c.transfer_rate},
                     {"transfers", std::to_string(c.transfers_succeeded) + "/" + std::to_string(c.transfers_attempted)},
                     {"mean_transfer_time", c.mean_transfer_time}});
  for (const auto& a : s.ablation)
    cells.push_back({{"k", a.k}, {"rate_hz", a.rate_hz}, {"transfer_rate", a.transfer_rate}});
  std::cout << cells.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intermittent visual servoing simulator and benchmark"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config_path, "JSON config overriding defaults")->check(CLI::ExistingFile);
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

  std::string out, data, model, instrument = "A", method = "ivs", methods = "uncal,cal_A,ivs_A",
                                 instruments = "A,B,C", k_list = "1,2,4,8", cal_train = "A";
  std::uint64_t seed = 0;
  int k = 4, trials = 10;

  auto* gen = app.add_subcommand("gen-demos", "generate pick and place demonstrations");
  gen->add_option("--out", out)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--instrument", instrument);

  auto* tr = app.add_subcommand("train", "train an ensemble on a demo directory");
  tr->add_option("--data", data)->required()->check(CLI::ExistingDirectory);
  tr->add_option("--k", k)->check(CLI::PositiveNumber);
  tr->add_option("--seed", seed);
  tr->add_option("--out", out)->required();

  auto* ev = app.add_subcommand("eval", "run trials for one method on one instrument");
  ev->add_option("--method", method)->check(CLI::IsMember({"uncal", "cal", "ivs"}));
  ev->add_option("--cal-train", cal_train, "instrument the CAL observer is fitted on");
  ev->add_option("--instrument", instrument);
  ev->add_option("--model", model);
  ev->add_option("--trials", trials)->check(CLI::PositiveNumber);
  ev->add_option("--seed", seed);
  ev->add_option("--out", out);

  auto* bm = app.add_subcommand("benchmark", "methods x instruments");
  bm->add_option("--methods", methods);
  bm->add_option("--instruments", instruments);
  bm->add_option("--model", model);
  bm->add_option("--trials", trials)->check(CLI::PositiveNumber);
  bm->add_option("--seed", seed);
  bm->add_option("--out", out);

  auto* ab = app.add_subcommand("ablate", "ensemble-size ablation (nested member prefixes)");
  ab->add_option("--k", k_list);
  ab->add_option("--model", model)->required();
  ab->add_option("--instrument", instrument);
  ab->add_option("--trials", trials)->check(CLI::PositiveNumber);
  ab->add_option("--seed", seed);
  ab->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (*gen) {
      gen_demos(g, out, seed, instrument);
    } else if (*tr) {
      train(g, data, k, seed, out);
    } else if (*ev || *bm) {
      const Config cfg = g.load();
      std::vector<MethodSpec> specs;
      std::vector<std::string> insts;
      if (*ev) {
        specs.push_back(parse_method_spec(method == "uncal" ? method : method + "_" + (method == "cal" ? cal_train : "A")));
        insts.push_back(instrument);
      } else {
        for (const auto& m : split_list(methods)) specs.push_back(parse_method_spec(m));
        insts = split_list(instruments);
      }
      std::optional<EnsemblePolicy> holder;
      const Resources res = resources_for(specs, model, cfg, seed, holder);
      finish_report(benchmark(specs, insts, trials, seed, res, cfg), out);
    } else if (*ab) {
      const Config cfg = g.load();
      std::vector<int> ks;
      for (const auto& s : split_list(k_list)) ks.push_back(std::stoi(s));
      const EnsemblePolicy policy = load_checkpoint(model);
      BenchmarkSummary s;
      s.config_hash = config_hash(cfg);
      s.ablation = ablate_ensemble(policy, ks, trials, seed, instrument, cfg, &s.trials);
      finish_report(s, out);
    }
  } catch (const ivs::Error& e) {
    std::cerr << nlohmann::json{{"error", "runtime"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const ivs::ContractViolation& e) {
    std::cerr << nlohmann::json{{"error", "contract"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 4;
  }
  return 0;
}
