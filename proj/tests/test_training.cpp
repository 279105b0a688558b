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
#include <doctest.h>

#include <cmath>

#include "mangrove/train.hpp"
#include "testutil.hpp"

using namespace mangrove;
using namespace mangrove::nn;

namespace {

Tensor full(int n, int c, int h, int w, double v) { return Tensor(n, c, h, w, v); }

} // namespace

TEST_CASE("soft_cross_entropy") {
    SUBCASE("logit 0 everywhere costs ln 2") {
        Tensor z(1, 1, 4, 4, 0.0);
        Tensor y(1, 1, 4, 4, 1.0);
        CHECK(soft_cross_entropy(z, y, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    }

    SUBCASE("smoothed hand-computed case: s=0.2, y=1, p=0.9") {
        Tensor z(1, 1, 1, 1);
        z.data[0] = std::log(0.9 / 0.1);
        Tensor y(1, 1, 1, 1, 1.0);
        const double expect = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
        CHECK(soft_cross_entropy(z, y, 0.2) == doctest::Approx(expect).epsilon(1e-9));
        CHECK(soft_cross_entropy(z, y, 0.2) == doctest::Approx(0.3251).epsilon(2e-4));
    }

    SUBCASE("confident correct predictions drive the loss to 0") {
        Tensor z(1, 1, 2, 2);
        Tensor y(1, 1, 2, 2);
        y.data = {1.0, 0.0, 1.0, 0.0};
        z.data = {50.0, -50.0, 50.0, -50.0};
        CHECK(soft_cross_entropy(z, y, 0.0) < 1e-12);
    }

    SUBCASE("nodata pixels are excluded; empty set errors") {
        Tensor z(1, 1, 1, 2);
        z.data = {0.0, 1000.0};
        Tensor y(1, 1, 1, 2, 1.0);
        Tensor valid(1, 1, 1, 2);
        valid.data = {1.0, 0.0};
        CHECK(soft_cross_entropy(z, y, 0.0, &valid) == doctest::Approx(std::log(2.0)));
        Tensor none(1, 1, 1, 2, 0.0);
        CHECK_THROWS_AS(soft_cross_entropy(z, y, 0.0, &none), UndefinedLossError);
    }

    SUBCASE("invalid smoothing rejected") {
        Tensor z(1, 1, 1, 1), y(1, 1, 1, 1);
        CHECK_THROWS_AS(soft_cross_entropy(z, y, 0.5), ArgumentError);
    }
}

TEST_CASE("dice_loss") {
    SUBCASE("perfect binary overlap is exactly 0 (eps-corrected)") {
        Tensor y(1, 1, 16, 16);
        for (size_t i = 0; i < y.data.size(); ++i) y.data[i] = (i % 3 == 0) ? 1.0 : 0.0;
        CHECK(dice_loss(y, y, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("disjoint prediction saturates toward 1") {
        const int n = 2048;
        Tensor p(1, 1, 1, n), y(1, 1, 1, n);
        for (int i = 0; i < n / 2; ++i) p.data[static_cast<size_t>(i)] = 1.0;
        for (int i = n / 2; i < n; ++i) y.data[static_cast<size_t>(i)] = 1.0;
        const double expect = 1.0 - 1.0 / (n / 2 + n / 2 + 1.0);
        CHECK(dice_loss(p, y, 1.0) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(dice_loss(p, y, 1.0) > 0.999);
    }

    SUBCASE("plug-in case: p=0.5, half positives, eps=0") {
        Tensor p(1, 1, 2, 2, 0.5);
        Tensor y(1, 1, 2, 2);
        y.data = {1.0, 1.0, 0.0, 0.0};
        CHECK(dice_loss(p, y, 0.0) == doctest::Approx(0.5));
    }

    SUBCASE("permutation-invariant over pixels") {
        Rng rng(10);
        const int n = 64;
        Tensor p(1, 1, 1, n), y(1, 1, 1, n);
        for (int i = 0; i < n; ++i) {
            p.data[static_cast<size_t>(i)] = rng.uniform();
            y.data[static_cast<size_t>(i)] = rng.bernoulli(0.3) ? 1.0 : 0.0;
        }
        double base = dice_loss(p, y, 1.0);
        std::vector<size_t> perm(n);
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        Tensor p2 = p, y2 = y;
        for (int i = 0; i < n; ++i) {
            p2.data[static_cast<size_t>(i)] = p.data[perm[static_cast<size_t>(i)]];
            y2.data[static_cast<size_t>(i)] = y.data[perm[static_cast<size_t>(i)]];
        }
        CHECK(dice_loss(p2, y2, 1.0) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("combined_loss") {
    Rng rng(11);
    Tensor z(1, 1, 4, 4), y(1, 1, 4, 4);
    for (size_t i = 0; i < z.data.size(); ++i) {
        z.data[i] = rng.uniform(-2.0, 2.0);
        y.data[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }

    SUBCASE("weight projections") {
        LossConfig ce_only{0.1, 1.0, 0.0, 1.0};
        CHECK(combined_loss(z, y, ce_only) ==
              doctest::Approx(soft_cross_entropy(z, y, 0.1)).epsilon(1e-12));

        LossConfig dice_only{0.1, 0.0, 1.0, 1.0};
        Tensor p = z;
        for (double& v : p.data) v = sigmoid(v);
        CHECK(combined_loss(z, y, dice_only) ==
              doctest::Approx(dice_loss(p, y, 1.0)).epsilon(1e-12));
    }

    SUBCASE("additivity of the weighted parts") {
        LossConfig both{0.1, 1.0, 1.0, 1.0};
        LossConfig ce_only{0.1, 1.0, 0.0, 1.0};
        LossConfig dice_only{0.1, 0.0, 1.0, 1.0};
        CHECK(combined_loss(z, y, both) ==
              doctest::Approx(combined_loss(z, y, ce_only) + combined_loss(z, y, dice_only))
                  .epsilon(1e-12));
    }

    SUBCASE("non-negative, zero only in the perfect zero-smoothing limit") {
        LossConfig cfg{0.0, 1.0, 1.0, 1.0};
        CHECK(combined_loss(z, y, cfg) > 0.0);
        Tensor zz(1, 1, 4, 4), yy(1, 1, 4, 4);
        for (size_t i = 0; i < zz.data.size(); ++i) {
            yy.data[i] = (i % 2) ? 1.0 : 0.0;
            zz.data[i] = yy.data[i] > 0.5 ? 200.0 : -200.0;
        }
        CHECK(combined_loss(zz, yy, cfg) < 1e-6);
    }

    SUBCASE("analytic gradient matches central differences") {
        LossConfig cfg{0.15, 0.8, 1.2, 1.0};
        Tensor valid(1, 1, 4, 4, 1.0);
        valid.data[5] = 0.0;
        Tensor grad;
        combined_loss_with_grad(z, y, cfg, &valid, grad);
        for (size_t i = 0; i < z.data.size(); ++i) {
            const double h = 1e-6;
            Tensor zp = z, zm = z;
            zp.data[i] += h;
            zm.data[i] -= h;
            double numeric =
                (combined_loss(zp, y, cfg, &valid) - combined_loss(zm, y, cfg, &valid)) / (2 * h);
            CHECK(grad.data[i] == doctest::Approx(numeric).epsilon(1e-6));
        }
    }
}

TEST_CASE("lr_at cosine schedule with warm restarts") {
    TrainConfig cfg; // lr0 1e-4, lr_min 1e-5, T0=2, Tmult=2

    SUBCASE("restart instants give lr0 exactly") {
        for (double t : {0.0, 2.0, 6.0, 14.0, 30.0, 62.0})
            CHECK(lr_at(t, cfg) == doctest::Approx(1e-4).epsilon(1e-15));
    }

    SUBCASE("period ends approach lr_min") {
        for (double t : {2.0, 6.0, 14.0, 30.0, 62.0})
            CHECK(lr_at(t - 1e-7, cfg) == doctest::Approx(1e-5).epsilon(1e-9));
    }

    SUBCASE("closed-form midpoint value 5.5e-5") {
        CHECK(lr_at(1.0, cfg) == doctest::Approx(5.5e-5).epsilon(1e-12));
    }

    SUBCASE("never leaves [lr_min, lr0] and is continuous within periods") {
        double prev_t = 0.0, prev = lr_at(0.0, cfg);
        for (int i = 1; i < 7000; ++i) {
            double t = 0.01 * i;
            double lr = lr_at(t, cfg);
            CHECK(lr >= cfg.lr_min - 1e-18);
            CHECK(lr <= cfg.lr0 + 1e-18);
            bool crosses_restart = false;
            for (double r : {2.0, 6.0, 14.0, 30.0, 62.0})
                if (r > prev_t && r <= t + 1e-9) crosses_restart = true;
            if (!crosses_restart) CHECK(std::abs(lr - prev) < 2e-6); // small step, small change
            prev = lr;
            prev_t = t;
        }
    }

    SUBCASE("t_mult = 1 gives fixed-length periods") {
        TrainConfig flat = cfg;
        flat.t_mult = 1;
        CHECK(lr_at(0.0, flat) == doctest::Approx(1e-4));
        CHECK(lr_at(2.0, flat) == doctest::Approx(1e-4));
        CHECK(lr_at(4.0, flat) == doctest::Approx(1e-4));
        CHECK(lr_at(3.0, flat) == doctest::Approx(5.5e-5));
    }

    SUBCASE("negative epoch fraction rejected") {
        CHECK_THROWS_AS(lr_at(-0.5, cfg), ArgumentError);
    }
}

TEST_CASE("early_stop_update") {
    SUBCASE("strictly increasing mIoU never stops") {
        EarlyStopState s;
        bool stop = false;
        for (int e = 1; e <= 50; ++e) {
            std::tie(s, stop) = early_stop_update(s, 0.01 * e, 10);
            CHECK_FALSE(stop);
        }
        CHECK(s.best_epoch == 50);
    }

    SUBCASE("constant mIoU stops after the 10th non-improving epoch") {
        EarlyStopState s;
        bool stop = false;
        int epochs = 0;
        while (!stop && epochs < 100) {
            std::tie(s, stop) = early_stop_update(s, 0.5, 10);
            ++epochs;
        }
        CHECK(epochs == 11); // first epoch improves, then 10 flat ones
        CHECK(s.epochs_since_improve == 10);
    }

    SUBCASE("best epoch is recorded at the last improvement") {
        EarlyStopState s;
        bool stop = false;
        for (int e = 1; e <= 40 && !stop; ++e) {
            double miou = e <= 28 ? 0.5 + 0.01 * e : 0.5 + 0.01 * 28;
            std::tie(s, stop) = early_stop_update(s, miou, 10);
        }
        CHECK(s.best_epoch == 28);
        CHECK(stop);
    }

    SUBCASE("patience 1 with constant mIoU runs exactly 2 updates") {
        EarlyStopState s;
        auto [s1, stop1] = early_stop_update(s, 0.4, 1);
        CHECK_FALSE(stop1);
        auto [s2, stop2] = early_stop_update(s1, 0.4, 1);
        CHECK(stop2);
    }
}

TEST_CASE("AdamW") {
    SUBCASE("minimizes a quadratic") {
        Param p{"p.weight", Tensor(1, 1, 1, 4), {}};
        p.value.data = {10.0, -6.0, 2.5, 0.0};
        AdamW opt({&p}, 0.0);
        for (int step = 0; step < 2000; ++step) {
            opt.zero_grad();
            for (size_t i = 0; i < 4; ++i) p.grad.data[i] = 2.0 * (p.value.data[i] - 3.0);
            opt.step(0.05);
        }
        for (double v : p.value.data) CHECK(v == doctest::Approx(3.0).epsilon(1e-3));
    }

    SUBCASE("decoupled decay shrinks weights even with zero gradient") {
        Param p{"p.weight", Tensor(1, 1, 1, 1), {}};
        p.value.data[0] = 2.0;
        AdamW opt({&p}, 0.1);
        opt.zero_grad();
        opt.step(0.5);
        CHECK(p.value.data[0] == doctest::Approx(2.0 * (1.0 - 0.5 * 0.1)).epsilon(1e-12));
    }

    SUBCASE("biases are excluded from decay") {
        Param b{"p.bias", Tensor(1, 1, 1, 1), {}};
        b.value.data[0] = 2.0;
        AdamW opt({&b}, 0.1);
        opt.zero_grad();
        opt.step(0.5);
        CHECK(b.value.data[0] == doctest::Approx(2.0));
    }
}

namespace {

// Separable synthetic tile set: the label thresholds channel 0.
struct Fixture {
    MemoryTileStore store;
    std::vector<TileMeta> train_meta, val_meta;
};

Fixture make_fixture(int n_tiles, int size, int channels, uint64_t seed) {
    Fixture f;
    Rng rng(seed);
    for (int t = 0; t < n_tiles; ++t) {
        TileSample s;
        s.channels = channels;
        s.size = size;
        s.image = Tensor(1, channels, size, size);
        s.label.assign(static_cast<size_t>(size) * size, 0);
        s.valid.assign(static_cast<size_t>(size) * size, 1);
        // channel 0 separates the classes by value; the rest is noise
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double v = 0.5 + 0.5 * std::sin(0.2 * x + 0.1 * t) * std::cos(0.15 * y);
                bool positive = v > 0.55;
                s.image.at(0, 0, y, x) = (positive ? 0.8 : 0.3) + rng.uniform(-0.05, 0.05);
                for (int c = 1; c < channels; ++c)
                    s.image.at(0, c, y, x) = rng.uniform(0.0, 1.0);
                s.label[static_cast<size_t>(y) * size + x] = positive ? 1 : 0;
            }
        }
        s.meta.id = "tile" + std::to_string(t);
        s.meta.scene_id = "synthetic";
        s.meta.stratum = t % 2;
        s.meta.has_mangrove = s.compute_has_mangrove();
        if (t < n_tiles - 1)
            f.train_meta.push_back(s.meta);
        else
            f.val_meta.push_back(s.meta);
        f.store.add(std::move(s));
    }
    return f;
}

} // namespace

TEST_CASE("train learns a separable fixture and is reproducible") {
    Fixture f = make_fixture(9, 64, 3, 1234);

    ModelConfig mcfg;
    mcfg.in_channels = 3;
    mcfg.depth = 3;
    mcfg.base_width = 8;
    mcfg.init_seed = 5;

    TrainConfig tcfg;
    tcfg.lr0 = 0.005;
    tcfg.lr_min = 0.0005;
    tcfg.batch_size = 1;
    tcfg.max_epochs = 30;
    tcfg.patience = 10;
    tcfg.seed = 99;

    SegmentationModel model(mcfg);
    TrainResult r1 = train(model, f.store, f.train_meta, f.val_meta, tcfg);
    CHECK(r1.best_miou > 0.95);
    CHECK(r1.epochs_run <= 30);
    CHECK(r1.curve.records.size() == static_cast<size_t>(r1.epochs_run));

    SUBCASE("best checkpoint mIoU matches a recomputation with the returned weights") {
        double recomputed = validation_miou(model, f.store, f.val_meta);
        CHECK(recomputed == doctest::Approx(r1.best_miou).epsilon(1e-9));
    }

    SUBCASE("identical seed reruns give an identical curve") {
        SegmentationModel model2(mcfg);
        TrainResult r2 = train(model2, f.store, f.train_meta, f.val_meta, tcfg);
        REQUIRE(r1.curve.records.size() == r2.curve.records.size());
        for (size_t i = 0; i < r1.curve.records.size(); ++i) {
            CHECK(r1.curve.records[i].train_loss == r2.curve.records[i].train_loss);
            CHECK(r1.curve.records[i].val_miou == r2.curve.records[i].val_miou);
            CHECK(r1.curve.records[i].lr == r2.curve.records[i].lr);
        }
    }

    SUBCASE("a different seed changes the batch order but still trains") {
        TrainConfig other = tcfg;
        other.seed = 4242;
        SegmentationModel model3(mcfg);
        TrainResult r3 = train(model3, f.store, f.train_meta, f.val_meta, other);
        CHECK(r3.best_miou > 0.9);
    }
}

TEST_CASE("train stops after exactly 2 epochs with patience 1 and frozen weights") {
    Fixture f = make_fixture(4, 32, 2, 77);
    ModelConfig mcfg;
    mcfg.in_channels = 2;
    mcfg.depth = 2;
    mcfg.base_width = 4;
    SegmentationModel model(mcfg);

    TrainConfig tcfg;
    tcfg.lr0 = 1e-300; // effectively frozen: validation mIoU is constant
    tcfg.lr_min = 1e-301;
    tcfg.batch_size = 4;
    tcfg.max_epochs = 50;
    tcfg.patience = 1;
    TrainResult r = train(model, f.store, f.train_meta, f.val_meta, tcfg);
    CHECK(r.epochs_run == 2);
    CHECK(r.early_stopped);
}

TEST_CASE("training divergence raises a TrainingError with epoch context") {
    Fixture f = make_fixture(4, 32, 2, 78);
    ModelConfig mcfg;
    mcfg.in_channels = 2;
    mcfg.depth = 2;
    mcfg.base_width = 4;
    SegmentationModel model(mcfg);

    TrainConfig tcfg;
    tcfg.lr0 = 1e280; // guaranteed overflow on the second step
    tcfg.lr_min = 1.0;
    tcfg.batch_size = 4;
    tcfg.max_epochs = 5;
    tcfg.patience = 3;
    CHECK_THROWS_WITH_AS(train(model, f.store, f.train_meta, f.val_meta, tcfg),
                         doctest::Contains("diverged"), TrainingError);
}

TEST_CASE("train persists the best checkpoint") {
    mangrove::test::TempDir dir("train_ckpt");
    Fixture f = make_fixture(6, 32, 2, 55);
    ModelConfig mcfg;
    mcfg.in_channels = 2;
    mcfg.depth = 2;
    mcfg.base_width = 6;
    SegmentationModel model(mcfg);

    TrainConfig tcfg;
    tcfg.lr0 = 0.02;
    tcfg.lr_min = 0.002;
    tcfg.batch_size = 8;
    tcfg.max_epochs = 10;
    tcfg.patience = 10;

    TrainOptions opts;
    opts.checkpoint_path = dir.str("best.ckpt");
    opts.band_names = {"c0", "c1"};
    TrainResult r = train(model, f.store, f.train_meta, f.val_meta, tcfg, opts);

    CheckpointMeta meta;
    SegmentationModel restored = load_checkpoint(dir.str("best.ckpt"), &meta);
    CHECK(meta.epoch == r.best_epoch);
    CHECK(meta.best_miou == doctest::Approx(r.best_miou));
    double recomputed = validation_miou(restored, f.store, f.val_meta);
    CHECK(recomputed == doctest::Approx(r.best_miou).epsilon(1e-9));
}
