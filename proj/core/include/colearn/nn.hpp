#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace colearn {

// Flat, ordered vector of all model parameters. Layout (see param_views):
//   [conv weights][conv biases][dense weights][dense biases]
using ParamVector = std::vector<double>;

// Static shape description of the classifier every agent in a network
// shares: 1-D valid convolution (stride 1) -> ReLU -> max-pool -> dense.
struct ModelArchitecture {
    int input_channels = 0;
    int window_length = 100;
    int conv_out_channels = 64;
    int conv_kernel = 3;
    int pool_kernel = 2;
    int num_classes = 0;

    int conv_output_length() const { return window_length - conv_kernel + 1; }
    int pool_output_length() const { return conv_output_length() / pool_kernel; }
    int dense_input() const { return conv_out_channels * pool_output_length(); }

    // Total parameter count:
    //   K*C*O conv weights + O conv biases + D*Y dense weights + Y dense biases
    std::size_t param_count() const {
        const std::size_t conv_w = static_cast<std::size_t>(conv_kernel) * input_channels * conv_out_channels;
        const std::size_t dense_w = static_cast<std::size_t>(dense_input()) * num_classes;
        return conv_w + static_cast<std::size_t>(conv_out_channels) + dense_w +
               static_cast<std::size_t>(num_classes);
    }

    // Field-wise hash; two agents can exchange parameters only when their
    // fingerprints agree.
    std::uint64_t fingerprint() const;

    // Throws architecture_error when shapes are unusable.
    void validate() const;

    bool operator==(const ModelArchitecture&) const = default;
};

// One fixed-length multichannel segment with a single activity label; the
// unit of training and inference. Values are stored row-major [channel][t].
struct SensorWindow {
    int channels = 0;
    int length = 0;
    std::vector<double> values;
    int label = 0;
    std::string subject_id;  // provenance, checked by experiment plans

    double at(int c, int t) const { return values[static_cast<std::size_t>(c) * length + t]; }
    double& at(int c, int t) { return values[static_cast<std::size_t>(c) * length + t]; }
};

// Adam optimizer state. Defaults are the optimizer's suggested settings.
struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long step_count = 0;
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState create(std::size_t param_count);
};

// Typed views into the flat parameter vector, in layout order. conv_w is
// indexed [(o*C + c)*K + k], dense_w is indexed [y*D + i].
template <typename Span>
struct BasicParamViews {
    Span conv_w;
    Span conv_b;
    Span dense_w;
    Span dense_b;
};
using ParamViews = BasicParamViews<std::span<double>>;
using ConstParamViews = BasicParamViews<std::span<const double>>;

ParamViews param_views(ParamVector& params, const ModelArchitecture& arch);
ConstParamViews param_views(const ParamVector& params, const ModelArchitecture& arch);

// Deterministic initialization: each layer's weights uniform in
// [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
ParamVector init_params(const ModelArchitecture& arch, std::uint64_t seed);

// Logits for one window: valid conv -> ReLU -> max-pool -> flatten -> dense.
// The flattened feature order is [out_channel][pool_position].
std::vector<double> forward(std::span<const double> params, const ModelArchitecture& arch,
                            const SensorWindow& window);

// Mean softmax cross-entropy over the batch plus its analytic gradient.
// `grad` is resized to param_count(). Throws usage_error on an empty batch.
double loss_and_grad(std::span<const double> params, const ModelArchitecture& arch,
                     std::span<const SensorWindow* const> batch, ParamVector& grad);
double loss_and_grad(std::span<const double> params, const ModelArchitecture& arch,
                     std::span<const SensorWindow> batch, ParamVector& grad);

// One bias-corrected Adam update, in place. Throws usage_error on length
// mismatch between params, grad and moments.
void adam_step(ParamVector& params, std::span<const double> grad, AdamState& state);

// argmax of the logits; ties break toward the lowest class index.
int predict(std::span<const double> params, const ModelArchitecture& arch,
            const SensorWindow& window);
int argmax(std::span<const double> logits);

// Softmax cross-entropy of one logit vector against a label.
double cross_entropy(std::span<const double> logits, int label);

}  // namespace colearn
