/**
 * Copyright 2026, the mangrove-toolkit authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <benchmark/benchmark.h>

#include "mangrove/rng.hpp"
#include "mangrove/unetpp.hpp"

using namespace mangrove;
using namespace mangrove::nn;

namespace {

Tensor random_tensor(int n, int c, int h, int w, uint64_t seed) {
    Tensor t(n, c, h, w);
    Rng rng(seed);
    for (double& v : t.data) v = rng.uniform();
    return t;
}

void BM_Conv3x3Forward(benchmark::State& state) {
    const int cin = static_cast<int>(state.range(0));
    const int cout = static_cast<int>(state.range(1));
    Param w{"w.weight", Tensor(cout, cin, 3, 3), {}};
    Param b{"b.bias", Tensor(cout, 1, 1, 1), {}};
    Rng rng(1);
    for (double& v : w.value.data) v = rng.normal(0.0, 0.1);
    Tensor x = random_tensor(1, cin, 256, 256, 2);
    for (auto _ : state) {
        Graph g(false);
        benchmark::DoNotOptimize(g.conv2d(g.input(x), w, b, 1, true));
    }
    state.SetItemsProcessed(state.iterations() * 2l * cin * cout * 9 * 256 * 256);
}
BENCHMARK(BM_Conv3x3Forward)->Args({8, 8})->Args({24, 8})->Args({32, 16});

void BM_Conv3x3Backward(benchmark::State& state) {
    const int cin = static_cast<int>(state.range(0));
    const int cout = static_cast<int>(state.range(1));
    Param w{"w.weight", Tensor(cout, cin, 3, 3), {}};
    Param b{"b.bias", Tensor(cout, 1, 1, 1), {}};
    Rng rng(1);
    for (double& v : w.value.data) v = rng.normal(0.0, 0.1);
    Tensor x = random_tensor(1, cin, 256, 256, 2);
    for (auto _ : state) {
        w.zero_grad();
        b.zero_grad();
        Graph g(true);
        int out = g.conv2d(g.input(x), w, b, 1, true);
        g.backward(out);
    }
    state.SetItemsProcessed(state.iterations() * 6l * cin * cout * 9 * 256 * 256);
}
BENCHMARK(BM_Conv3x3Backward)->Args({8, 8})->Args({24, 8});

void BM_ModelForward256(benchmark::State& state) {
    ModelConfig cfg;
    cfg.in_channels = 11;
    cfg.depth = static_cast<int>(state.range(0));
    cfg.base_width = static_cast<int>(state.range(1));
    SegmentationModel model(cfg);
    Tensor x = random_tensor(1, 11, 256, 256, 3);
    for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_ModelForward256)->Args({3, 8})->Args({5, 8})->Unit(benchmark::kMillisecond);

void BM_CombinedLoss(benchmark::State& state) {
    Tensor z = random_tensor(16, 1, 256, 256, 4);
    Tensor y(16, 1, 256, 256);
    Rng rng(5);
    for (double& v : y.data) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    LossConfig cfg;
    Tensor grad;
    for (auto _ : state)
        benchmark::DoNotOptimize(combined_loss_with_grad(z, y, cfg, nullptr, grad));
    state.SetItemsProcessed(state.iterations() * z.numel());
}
BENCHMARK(BM_CombinedLoss);

} // namespace
