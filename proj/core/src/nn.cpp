#include "colearn/nn.hpp"

#include "colearn/error.hpp"
#include "colearn/rng.hpp"
#include "colearn/util.hpp"

#include <cmath>
#include <string>

namespace colearn {

std::uint64_t ModelArchitecture::fingerprint() const {
    const std::int64_t fields[6] = {input_channels, window_length, conv_out_channels,
                                    conv_kernel,    pool_kernel,   num_classes};
    return fnv1a(fields, sizeof(fields));
}

void ModelArchitecture::validate() const {
    if (input_channels < 1) throw architecture_error("input_channels must be >= 1");
    if (conv_kernel < 1) throw architecture_error("conv_kernel must be >= 1");
    if (window_length < conv_kernel)
        throw architecture_error("window_length " + std::to_string(window_length) +
                                 " is shorter than conv_kernel " + std::to_string(conv_kernel));
    if (conv_out_channels < 1) throw architecture_error("conv_out_channels must be >= 1");
    if (pool_kernel < 1) throw architecture_error("pool_kernel must be >= 1");
    if (pool_output_length() < 1)
        throw architecture_error("pool output is empty: conv output length " +
                                 std::to_string(conv_output_length()) + " with pool kernel " +
                                 std::to_string(pool_kernel));
    if (num_classes < 1) throw architecture_error("num_classes must be >= 1");
}

AdamState AdamState::create(std::size_t param_count) {
    AdamState st;
    st.first_moment.assign(param_count, 0.0);
    st.second_moment.assign(param_count, 0.0);
    return st;
}

namespace {

void check_param_length(std::size_t got, const ModelArchitecture& arch) {
    if (got != arch.param_count())
        throw architecture_error("parameter vector has length " + std::to_string(got) +
                                 ", architecture requires " + std::to_string(arch.param_count()));
}

void check_window_shape(const SensorWindow& w, const ModelArchitecture& arch) {
    if (w.channels != arch.input_channels || w.length != arch.window_length)
        throw architecture_error("window shape [" + std::to_string(w.channels) + "x" +
                                 std::to_string(w.length) + "] does not match architecture [" +
                                 std::to_string(arch.input_channels) + "x" +
                                 std::to_string(arch.window_length) + "]");
}

template <typename Span, typename Ptr>
BasicParamViews<Span> make_views(Ptr data, const ModelArchitecture& arch) {
    const std::size_t conv_w = static_cast<std::size_t>(arch.conv_kernel) * arch.input_channels *
                               arch.conv_out_channels;
    const std::size_t conv_b = static_cast<std::size_t>(arch.conv_out_channels);
    const std::size_t dense_w = static_cast<std::size_t>(arch.dense_input()) * arch.num_classes;
    const std::size_t dense_b = static_cast<std::size_t>(arch.num_classes);
    BasicParamViews<Span> v;
    v.conv_w = Span(data, conv_w);
    v.conv_b = Span(data + conv_w, conv_b);
    v.dense_w = Span(data + conv_w + conv_b, dense_w);
    v.dense_b = Span(data + conv_w + conv_b + dense_w, dense_b);
    return v;
}

// Scratch space for one window's forward (and optionally backward) pass.
struct Workspace {
    std::vector<double> conv;     // pre-activation conv output [O x Lc]
    std::vector<double> flat;     // pooled features, ReLU applied [O x Lp]
    std::vector<int> pool_arg;    // winning conv position per pooled feature
    std::vector<double> logits;   // [Y]
    std::vector<double> dlogits;  // [Y]
    std::vector<double> dflat;    // [O x Lp]

    void resize(const ModelArchitecture& arch) {
        conv.resize(static_cast<std::size_t>(arch.conv_out_channels) * arch.conv_output_length());
        flat.resize(static_cast<std::size_t>(arch.dense_input()));
        pool_arg.resize(flat.size());
        logits.resize(static_cast<std::size_t>(arch.num_classes));
        dlogits.resize(logits.size());
        dflat.resize(flat.size());
    }
};

void forward_window(std::span<const double> params, const ModelArchitecture& arch,
                    const SensorWindow& w, Workspace& ws) {
    const auto v = make_views<std::span<const double>>(params.data(), arch);
    const int C = arch.input_channels;
    const int K = arch.conv_kernel;
    const int O = arch.conv_out_channels;
    const int Lc = arch.conv_output_length();
    const int P = arch.pool_kernel;
    const int Lp = arch.pool_output_length();
    const int Y = arch.num_classes;

    for (int o = 0; o < O; ++o) {
        double* out = ws.conv.data() + static_cast<std::size_t>(o) * Lc;
        const double b = v.conv_b[static_cast<std::size_t>(o)];
        for (int t = 0; t < Lc; ++t) out[t] = b;
        for (int c = 0; c < C; ++c) {
            const double* kw = v.conv_w.data() + (static_cast<std::size_t>(o) * C + c) * K;
            const double* x = w.values.data() + static_cast<std::size_t>(c) * w.length;
            for (int k = 0; k < K; ++k) {
                const double wk = kw[k];
                for (int t = 0; t < Lc; ++t) out[t] += wk * x[t + k];
            }
        }
    }

    // ReLU + max-pool fused; ties pick the earliest position so backward is
    // deterministic.
    for (int o = 0; o < O; ++o) {
        const double* z = ws.conv.data() + static_cast<std::size_t>(o) * Lc;
        for (int j = 0; j < Lp; ++j) {
            int best = j * P;
            double best_v = z[best];
            for (int u = 1; u < P; ++u) {
                if (z[j * P + u] > best_v) {
                    best = j * P + u;
                    best_v = z[best];
                }
            }
            const std::size_t f = static_cast<std::size_t>(o) * Lp + j;
            ws.pool_arg[f] = best;
            ws.flat[f] = best_v > 0.0 ? best_v : 0.0;
        }
    }

    const std::size_t D = ws.flat.size();
    for (int y = 0; y < Y; ++y) {
        const double* dw = v.dense_w.data() + static_cast<std::size_t>(y) * D;
        double acc = v.dense_b[static_cast<std::size_t>(y)];
        for (std::size_t i = 0; i < D; ++i) acc += dw[i] * ws.flat[i];
        ws.logits[static_cast<std::size_t>(y)] = acc;
    }
}

// Backward pass for one window; expects ws.dlogits filled with dL/dlogits.
// Accumulates into grad views.
void backward_window(std::span<const double> params, const ModelArchitecture& arch,
                     const SensorWindow& w, Workspace& ws, ParamViews g) {
    const auto v = make_views<std::span<const double>>(params.data(), arch);
    const int C = arch.input_channels;
    const int K = arch.conv_kernel;
    const int O = arch.conv_out_channels;
    const int Lc = arch.conv_output_length();
    const int Lp = arch.pool_output_length();
    const int Y = arch.num_classes;
    const std::size_t D = ws.flat.size();

    for (std::size_t i = 0; i < D; ++i) ws.dflat[i] = 0.0;
    for (int y = 0; y < Y; ++y) {
        const double dy = ws.dlogits[static_cast<std::size_t>(y)];
        if (dy == 0.0) continue;
        double* gw = g.dense_w.data() + static_cast<std::size_t>(y) * D;
        const double* dw = v.dense_w.data() + static_cast<std::size_t>(y) * D;
        for (std::size_t i = 0; i < D; ++i) {
            gw[i] += dy * ws.flat[i];
            ws.dflat[i] += dy * dw[i];
        }
        g.dense_b[static_cast<std::size_t>(y)] += dy;
    }

    // Route pooled-feature gradients back to the winning conv positions,
    // masked by ReLU (flat value 0 means the pre-activation was <= 0).
    for (int o = 0; o < O; ++o) {
        for (int j = 0; j < Lp; ++j) {
            const std::size_t f = static_cast<std::size_t>(o) * Lp + j;
            const double df = ws.dflat[f];
            if (df == 0.0 || ws.flat[f] <= 0.0) continue;
            const int t = ws.pool_arg[f];
            g.conv_b[static_cast<std::size_t>(o)] += df;
            const double* x_base = w.values.data();
            double* gw = g.conv_w.data() + static_cast<std::size_t>(o) * C * K;
            for (int c = 0; c < C; ++c) {
                const double* x = x_base + static_cast<std::size_t>(c) * w.length;
                for (int k = 0; k < K; ++k) gw[static_cast<std::size_t>(c) * K + k] += df * x[t + k];
            }
        }
    }
    (void)Lc;
}

}  // namespace

ParamViews param_views(ParamVector& params, const ModelArchitecture& arch) {
    check_param_length(params.size(), arch);
    return make_views<std::span<double>>(params.data(), arch);
}

ConstParamViews param_views(const ParamVector& params, const ModelArchitecture& arch) {
    check_param_length(params.size(), arch);
    return make_views<std::span<const double>>(params.data(), arch);
}

ParamVector init_params(const ModelArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    ParamVector params(arch.param_count(), 0.0);
    auto v = param_views(params, arch);
    Rng rng(seed);

    const double conv_bound = 1.0 / std::sqrt(static_cast<double>(arch.input_channels) * arch.conv_kernel);
    for (auto& w : v.conv_w) w = rng.uniform(-conv_bound, conv_bound);
    const double dense_bound = 1.0 / std::sqrt(static_cast<double>(arch.dense_input()));
    for (auto& w : v.dense_w) w = rng.uniform(-dense_bound, dense_bound);
    // biases stay zero
    return params;
}

std::vector<double> forward(std::span<const double> params, const ModelArchitecture& arch,
                            const SensorWindow& window) {
    check_param_length(params.size(), arch);
    check_window_shape(window, arch);
    Workspace ws;
    ws.resize(arch);
    forward_window(params, arch, window, ws);
    return ws.logits;
}

double cross_entropy(std::span<const double> logits, int label) {
    double m = logits[0];
    for (double l : logits)
        if (l > m) m = l;
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - m);
    return std::log(sum) - (logits[static_cast<std::size_t>(label)] - m);
}

double loss_and_grad(std::span<const double> params, const ModelArchitecture& arch,
                     std::span<const SensorWindow* const> batch, ParamVector& grad) {
    if (batch.empty()) throw usage_error("loss_and_grad: empty batch");
    check_param_length(params.size(), arch);

    grad.assign(arch.param_count(), 0.0);
    auto g = make_views<std::span<double>>(grad.data(), arch);

    Workspace ws;
    ws.resize(arch);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const int Y = arch.num_classes;
    double loss = 0.0;

    for (const SensorWindow* w : batch) {
        check_window_shape(*w, arch);
        if (w->label < 0 || w->label >= Y)
            throw usage_error("window label " + std::to_string(w->label) + " outside [0, " +
                              std::to_string(Y) + ")");
        forward_window(params, arch, *w, ws);

        double m = ws.logits[0];
        for (double l : ws.logits)
            if (l > m) m = l;
        double sum = 0.0;
        for (int y = 0; y < Y; ++y) {
            ws.dlogits[static_cast<std::size_t>(y)] = std::exp(ws.logits[static_cast<std::size_t>(y)] - m);
            sum += ws.dlogits[static_cast<std::size_t>(y)];
        }
        loss += (std::log(sum) - (ws.logits[static_cast<std::size_t>(w->label)] - m)) * inv_n;

        // dL/dlogit = (softmax - onehot) / n
        const double inv_sum = 1.0 / sum;
        for (int y = 0; y < Y; ++y) {
            double p = ws.dlogits[static_cast<std::size_t>(y)] * inv_sum;
            if (y == w->label) p -= 1.0;
            ws.dlogits[static_cast<std::size_t>(y)] = p * inv_n;
        }
        backward_window(params, arch, *w, ws, g);
    }
    return loss;
}

double loss_and_grad(std::span<const double> params, const ModelArchitecture& arch,
                     std::span<const SensorWindow> batch, ParamVector& grad) {
    std::vector<const SensorWindow*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& w : batch) ptrs.push_back(&w);
    return loss_and_grad(params, arch, std::span<const SensorWindow* const>(ptrs), grad);
}

void adam_step(ParamVector& params, std::span<const double> grad, AdamState& state) {
    const std::size_t p = params.size();
    if (grad.size() != p || state.first_moment.size() != p || state.second_moment.size() != p)
        throw usage_error("adam_step: length mismatch between params, grad and moments");

    state.step_count += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < p; ++i) {
        const double gi = grad[i];
        state.first_moment[i] = b1 * state.first_moment[i] + (1.0 - b1) * gi;
        state.second_moment[i] = b2 * state.second_moment[i] + (1.0 - b2) * gi * gi;
        const double mhat = state.first_moment[i] / bc1;
        const double vhat = state.second_moment[i] / bc2;
        params[i] -= state.alpha * mhat / (std::sqrt(vhat) + state.epsilon);
    }
}

int argmax(std::span<const double> logits) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(logits.size()); ++i)
        if (logits[static_cast<std::size_t>(i)] > logits[static_cast<std::size_t>(best)]) best = i;
    return best;
}

int predict(std::span<const double> params, const ModelArchitecture& arch,
            const SensorWindow& window) {
    const auto logits = forward(params, arch, window);
    return argmax(logits);
}

}  // namespace colearn
