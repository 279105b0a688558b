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

#include "mangrove/metrics.hpp"
#include "mangrove/preprocess.hpp"
#include "mangrove/raster_ops.hpp"
#include "mangrove/rng.hpp"

using namespace mangrove;

namespace {

RasterGrid random_grid(int w, int h, uint64_t seed, double lo = 0.0, double hi = 10000.0) {
    RasterGrid g(w, h, 0.0, kDefaultNodata);
    Rng rng(seed);
    for (double& v : g.values) v = rng.uniform(lo, hi);
    return g;
}

void BM_Ndwi(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    RasterGrid green = random_grid(s, s, 1);
    RasterGrid nir = random_grid(s, s, 2);
    for (auto _ : state) benchmark::DoNotOptimize(ndwi(green, nir));
    state.SetItemsProcessed(state.iterations() * s * s);
}
BENCHMARK(BM_Ndwi)->Arg(512)->Arg(2048);

void BM_MosaicMedian(benchmark::State& state) {
    std::vector<MultispectralScene> scenes;
    for (int i = 0; i < 5; ++i) {
        MultispectralScene s;
        s.id = "s" + std::to_string(i);
        s.year = 2020;
        s.month = 1;
        s.band_names = {"B3"};
        s.bands.push_back(random_grid(512, 512, static_cast<uint64_t>(i + 1)));
        scenes.push_back(std::move(s));
    }
    for (auto _ : state) benchmark::DoNotOptimize(mosaic(scenes, Reducer::Median));
    state.SetItemsProcessed(state.iterations() * 512 * 512);
}
BENCHMARK(BM_MosaicMedian)->Unit(benchmark::kMillisecond);

void BM_Confusion(benchmark::State& state) {
    const int s = 2048;
    RasterGrid truth(s, s, 0.0);
    RasterGrid pred(s, s, 0.0);
    Rng rng(3);
    for (double& v : truth.values) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    for (double& v : pred.values) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(confusion(pred, truth));
    state.SetItemsProcessed(state.iterations() * s * s);
}
BENCHMARK(BM_Confusion);

} // namespace
