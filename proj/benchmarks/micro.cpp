#include <benchmark/benchmark.h>

#include "ivs/actuator.hpp"
#include "ivs/datapipe.hpp"
#include "ivs/network.hpp"
#include "ivs/render.hpp"

using namespace ivs;

static void BM_ForwardEval(benchmark::State& st) {
  Network<float> net;
  net.init(1);
  const std::vector<float> x(3 * 150 * 150, 0.5f);
  for (auto _ : st) benchmark::DoNotOptimize(net.forward(x, Subtask::pick));
}
BENCHMARK(BM_ForwardEval)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& st) {
  Network<float> net;
  net.init(1);
  std::vector<Example<float>> ex(static_cast<std::size_t>(st.range(0)),
                                 {std::vector<float>(3 * 150 * 150, 0.5f), {1.0, 0.0}, 1});
  std::vector<const Example<float>*> batch;
  for (const auto& e : ex) batch.push_back(&e);
  std::vector<float> grad(net.params().size());
  for (auto _ : st) {
    std::fill(grad.begin(), grad.end(), 0.0f);
    benchmark::DoNotOptimize(net.loss_and_gradient(batch, Subtask::pick, 1.0, Mode::train, 1, &grad));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_RenderCrop(benchmark::State& st) {
  const Camera cam;
  TaskState s = init_board(1, Side::left);
  s.tip_true = s.pegs[2].center + Pose2{3.0, 1.0};
  const Pose2 peg = s.pegs[2].center;
  const PixelRect win = centered_window(cam, peg, kCropSize);
  for (auto _ : st) benchmark::DoNotOptimize(preprocess(render_rgb(s, cam, win), peg, cam));
}
BENCHMARK(BM_RenderCrop)->Unit(benchmark::kMicrosecond);

static void BM_RenderFullFrame(benchmark::State& st) {
  const Camera cam;
  const TaskState s = init_board(1, Side::left);
  for (auto _ : st) benchmark::DoNotOptimize(render_rgb(s, cam));
}
BENCHMARK(BM_RenderFullFrame)->Unit(benchmark::kMillisecond);

static void BM_PlayOperator(benchmark::State& st) {
  InstrumentModel inst = make_instrument("B");
  inst.reseed(1);
  double t = 0.0;
  for (auto _ : st) {
    t += 0.01;
    benchmark::DoNotOptimize(command_move(inst, {20.0 * std::sin(t), 15.0 * std::cos(1.3 * t)}));
  }
}
BENCHMARK(BM_PlayOperator);
BENCHMARK_MAIN();
