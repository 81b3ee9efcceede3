#include "colearn/nn.hpp"

#include "colearn/error.hpp"
#include "colearn/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace colearn;

namespace {

SensorWindow window_of(std::vector<std::vector<double>> rows, int label) {
    SensorWindow w;
    w.channels = static_cast<int>(rows.size());
    w.length = static_cast<int>(rows.front().size());
    w.label = label;
    for (const auto& row : rows) w.values.insert(w.values.end(), row.begin(), row.end());
    return w;
}

// Test-side loss: mean softmax cross-entropy computed from forward()
// logits, independent of the gradient path under test.
double ref_loss(const ParamVector& params, const ModelArchitecture& arch,
                const std::vector<SensorWindow>& batch) {
    double total = 0.0;
    for (const auto& w : batch) {
        const auto logits = forward(params, arch, w);
        double m = *std::max_element(logits.begin(), logits.end());
        double s = 0.0;
        for (double l : logits) s += std::exp(l - m);
        total += std::log(s) - (logits[static_cast<std::size_t>(w.label)] - m);
    }
    return total / static_cast<double>(batch.size());
}

SensorWindow random_window(const ModelArchitecture& arch, Rng& rng) {
    SensorWindow w;
    w.channels = arch.input_channels;
    w.length = arch.window_length;
    w.label = static_cast<int>(rng.below(static_cast<std::uint64_t>(arch.num_classes)));
    w.values.resize(static_cast<std::size_t>(arch.input_channels) * arch.window_length);
    for (auto& v : w.values) v = rng.uniform(-1.0, 1.0);
    return w;
}

double max_grad_rel_error(const ModelArchitecture& arch, std::uint64_t seed, int batch_size) {
    Rng rng(seed);
    ParamVector params = init_params(arch, seed);
    for (auto& p : params) p += rng.uniform(-0.2, 0.2);  // non-zero biases too

    std::vector<SensorWindow> batch;
    for (int i = 0; i < batch_size; ++i) batch.push_back(random_window(arch, rng));

    ParamVector grad;
    loss_and_grad(params, arch, batch, grad);

    const double h = 1e-5;
    double worst = 0.0;
    ParamVector probe = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + h;
        const double up = ref_loss(probe, arch, batch);
        probe[i] = params[i] - h;
        const double down = ref_loss(probe, arch, batch);
        probe[i] = params[i];
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(grad[i] - fd) / std::max({std::abs(grad[i]), std::abs(fd), 1e-4});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

TEST_CASE("init_params is deterministic per seed with zero biases") {
    ModelArchitecture arch{.input_channels = 2, .window_length = 10, .conv_out_channels = 3,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 2};
    const auto a = init_params(arch, 7);
    const auto b = init_params(arch, 7);
    const auto c = init_params(arch, 8);
    CHECK(a == b);
    CHECK(a != c);

    const auto views = param_views(a, arch);
    for (double bias : views.conv_b) CHECK(bias == 0.0);
    for (double bias : views.dense_b) CHECK(bias == 0.0);

    // fan-in bounds
    const double conv_bound = 1.0 / std::sqrt(2.0 * 3.0);
    for (double w : views.conv_w) {
        CHECK(w >= -conv_bound);
        CHECK(w <= conv_bound);
    }
}

TEST_CASE("param views partition the flat vector in layout order") {
    ModelArchitecture arch{.input_channels = 2, .window_length = 8, .conv_out_channels = 2,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 3};
    ParamVector params(arch.param_count(), 0.0);
    auto v = param_views(params, arch);
    CHECK(v.conv_w.data() == params.data());
    CHECK(v.conv_b.data() == v.conv_w.data() + v.conv_w.size());
    CHECK(v.dense_w.data() == v.conv_b.data() + v.conv_b.size());
    CHECK(v.dense_b.data() == v.dense_w.data() + v.dense_w.size());
    CHECK(v.conv_w.size() + v.conv_b.size() + v.dense_w.size() + v.dense_b.size() == params.size());

    // writes through views land in the vector and read back identically
    for (std::size_t i = 0; i < v.conv_w.size(); ++i) v.conv_w[i] = 1.0 + static_cast<double>(i);
    v.dense_b[2] = -5.0;
    CHECK(params[0] == 1.0);
    CHECK(params.back() == -5.0);
}

TEST_CASE("param_count matches the serialized length across a shape sweep") {
    for (int ch : {1, 2, 5}) {
        for (int len : {4, 9, 100}) {
            for (int out : {1, 4, 16}) {
                for (int k : {1, 3}) {
                    for (int pool : {1, 2, 3}) {
                        ModelArchitecture arch{.input_channels = ch, .window_length = len,
                                               .conv_out_channels = out, .conv_kernel = k,
                                               .pool_kernel = pool, .num_classes = 3};
                        if (len < k || arch.pool_output_length() < 1) continue;
                        CHECK(init_params(arch, 1).size() == arch.param_count());
                    }
                }
            }
        }
    }
}

TEST_CASE("default architecture feeds 64x49 features into the dense layer") {
    ModelArchitecture arch{.input_channels = 36, .window_length = 100, .conv_out_channels = 64,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 12};
    CHECK(arch.conv_output_length() == 98);
    CHECK(arch.pool_output_length() == 49);
    CHECK(arch.dense_input() == 64 * 49);
}

TEST_CASE("forward with all-zero parameters yields zero logits") {
    ModelArchitecture arch{.input_channels = 1, .window_length = 6, .conv_out_channels = 2,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 3};
    ParamVector zeros(arch.param_count(), 0.0);
    const auto logits = forward(zeros, arch, window_of({{1, 2, 3, 4, 5, 6}}, 0));
    for (double l : logits) CHECK(l == 0.0);
}

TEST_CASE("forward matches the hand-computed conv/pool/dense pipeline") {
    ModelArchitecture arch{.input_channels = 1, .window_length = 4, .conv_out_channels = 1,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 2};
    // conv [1,1,1] on [1,2,3,4] -> [6,9]; ReLU keeps both; pool(2) -> [9]
    ParamVector params(arch.param_count(), 0.0);
    auto v = param_views(params, arch);
    v.conv_w[0] = v.conv_w[1] = v.conv_w[2] = 1.0;
    v.dense_w[0] = 2.0;   // class 0 reads the pooled feature
    v.dense_w[1] = -1.0;  // class 1
    v.dense_b[0] = 0.5;

    const auto logits = forward(params, arch, window_of({{1, 2, 3, 4}}, 0));
    CHECK(logits[0] == doctest::Approx(2.0 * 9.0 + 0.5));
    CHECK(logits[1] == doctest::Approx(-9.0));

    // pool kernel 1 exposes the raw ReLU-conv sequence [6,9]
    ModelArchitecture probe = arch;
    probe.pool_kernel = 1;
    ParamVector pp(probe.param_count(), 0.0);
    auto pv = param_views(pp, probe);
    pv.conv_w[0] = pv.conv_w[1] = pv.conv_w[2] = 1.0;
    pv.dense_w[0] = 1.0;  // class 0 <- position 0
    pv.dense_w[3] = 1.0;  // class 1 <- position 1
    const auto conv_readout = forward(pp, probe, window_of({{1, 2, 3, 4}}, 0));
    CHECK(conv_readout[0] == doctest::Approx(6.0));
    CHECK(conv_readout[1] == doctest::Approx(9.0));
}

TEST_CASE("forward rejects mismatched parameter length") {
    ModelArchitecture arch{.input_channels = 1, .window_length = 4, .conv_out_channels = 1,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 2};
    ParamVector bad(arch.param_count() + 1, 0.0);
    CHECK_THROWS_AS(forward(bad, arch, window_of({{1, 2, 3, 4}}, 0)), architecture_error);
}

TEST_CASE("uniform logits give ln(C) loss") {
    ModelArchitecture arch{.input_channels = 1, .window_length = 5, .conv_out_channels = 2,
                           .conv_kernel = 2, .pool_kernel = 2, .num_classes = 4};
    ParamVector zeros(arch.param_count(), 0.0);
    std::vector<SensorWindow> batch = {window_of({{1, 2, 3, 4, 5}}, 1),
                                       window_of({{5, 4, 3, 2, 1}}, 3)};
    ParamVector grad;
    const double loss = loss_and_grad(zeros, arch, batch, grad);
    CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("loss_and_grad rejects an empty batch") {
    ModelArchitecture arch{.input_channels = 1, .window_length = 4, .conv_out_channels = 1,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 2};
    ParamVector params(arch.param_count(), 0.0);
    ParamVector grad;
    std::vector<SensorWindow> empty;
    CHECK_THROWS_AS(loss_and_grad(params, arch, empty, grad), usage_error);
}

TEST_CASE("analytic gradient matches central finite differences") {
    // p ~= 50
    ModelArchitecture small{.input_channels = 1, .window_length = 8, .conv_out_channels = 2,
                            .conv_kernel = 3, .pool_kernel = 2, .num_classes = 3};
    CHECK(small.param_count() <= 50);
    CHECK(max_grad_rel_error(small, 2024, 4) < 1e-4);

    ModelArchitecture wider{.input_channels = 3, .window_length = 10, .conv_out_channels = 3,
                            .conv_kernel = 3, .pool_kernel = 2, .num_classes = 4};
    CHECK(wider.param_count() <= 200);
    CHECK(max_grad_rel_error(wider, 5, 6) < 1e-4);
}

TEST_CASE("duplicating every window leaves loss and gradient unchanged") {
    ModelArchitecture arch{.input_channels = 2, .window_length = 8, .conv_out_channels = 2,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 3};
    Rng rng(11);
    const auto params = init_params(arch, 11);
    std::vector<SensorWindow> batch;
    for (int i = 0; i < 3; ++i) batch.push_back(random_window(arch, rng));
    std::vector<SensorWindow> doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());

    ParamVector g1, g2;
    const double l1 = loss_and_grad(params, arch, batch, g1);
    const double l2 = loss_and_grad(params, arch, doubled, g2);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-10));
}

TEST_CASE("loss_and_grad and forward are bitwise deterministic") {
    ModelArchitecture arch{.input_channels = 2, .window_length = 10, .conv_out_channels = 3,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 3};
    Rng rng(3);
    const auto params = init_params(arch, 3);
    std::vector<SensorWindow> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(random_window(arch, rng));

    ParamVector g1, g2;
    const double l1 = loss_and_grad(params, arch, batch, g1);
    const double l2 = loss_and_grad(params, arch, batch, g2);
    CHECK(l1 == l2);
    CHECK(g1 == g2);
    CHECK(forward(params, arch, batch[0]) == forward(params, arch, batch[0]));
}

TEST_CASE("adam: zero gradient leaves parameters and moments untouched") {
    ParamVector params = {1.0, -2.0};
    AdamState st = AdamState::create(2);
    ParamVector grad = {0.0, 0.0};
    adam_step(params, grad, st);
    CHECK(params == ParamVector{1.0, -2.0});
    CHECK(st.first_moment == ParamVector{0.0, 0.0});
    CHECK(st.second_moment == ParamVector{0.0, 0.0});
    CHECK(st.step_count == 1);
}

TEST_CASE("adam: first step with unit gradient moves by ~alpha") {
    ParamVector params = {0.0};
    AdamState st = AdamState::create(1);
    ParamVector grad = {1.0};
    adam_step(params, grad, st);
    CHECK(st.first_moment[0] == doctest::Approx(0.1));
    CHECK(st.second_moment[0] == doctest::Approx(0.001));
    // bias correction makes mhat = vhat = 1, so the step is -alpha/(1+eps)
    CHECK(params[0] == doctest::Approx(-0.001).epsilon(1e-6));

    adam_step(params, grad, st);
    CHECK(st.step_count == 2);
    CHECK(params[0] < -0.001);  // keeps descending on a linear loss
}

TEST_CASE("adam rejects mismatched lengths") {
    ParamVector params = {0.0, 0.0};
    AdamState st = AdamState::create(2);
    ParamVector bad = {1.0};
    CHECK_THROWS_AS(adam_step(params, bad, st), usage_error);
}

TEST_CASE("predict breaks ties toward the lowest class") {
    CHECK(argmax(std::vector<double>{0.1, 0.9, 0.3}) == 1);
    CHECK(argmax(std::vector<double>{0.5, 0.5, 0.5}) == 0);

    ModelArchitecture arch{.input_channels = 1, .window_length = 6, .conv_out_channels = 2,
                           .conv_kernel = 3, .pool_kernel = 2, .num_classes = 4};
    ParamVector zeros(arch.param_count(), 0.0);
    Rng rng(9);
    for (int i = 0; i < 5; ++i) CHECK(predict(zeros, arch, random_window(arch, rng)) == 0);
}
