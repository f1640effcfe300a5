#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kale/rng.hpp"
#include "kale/tensor.hpp"

namespace kale::nn {

enum class LayerKind { dense, conv1d, embedding, relu, global_max_pool, flatten, grad_reverse };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

/// Layer description. Sample shapes (without the batch axis) per kind:
///   dense(in, out)                     {in}          -> {out}
///   conv1d(in_ch, out_ch, k, stride)   {in_ch, L}    -> {out_ch, (L - k) / stride + 1}
///   embedding(vocab, dim)              {L}           -> {dim, L}   (channels first)
///   relu, grad_reverse                 any           -> same
///   global_max_pool                    {C, L}        -> {C}
///   flatten                            any           -> {prod}
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t kernel = 1;
    std::size_t stride = 1;
    double lambda = 1.0;

    static LayerSpec dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out}; }
    static LayerSpec conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride = 1) {
        return {LayerKind::conv1d, in_ch, out_ch, kernel, stride};
    }
    static LayerSpec embedding(std::size_t vocab, std::size_t dim) { return {LayerKind::embedding, vocab, dim}; }
    static LayerSpec relu() { return {LayerKind::relu}; }
    static LayerSpec global_max_pool() { return {LayerKind::global_max_pool}; }
    static LayerSpec flatten() { return {LayerKind::flatten}; }
    static LayerSpec grad_reverse(double lambda) { return {LayerKind::grad_reverse, 0, 0, 1, 1, lambda}; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Layer {
    LayerSpec spec;
    Shape input_shape;   // per sample
    Shape output_shape;  // per sample
    std::vector<Tensor> params;  // dense/conv1d: {weight, bias}; embedding: {table}
    std::vector<Tensor> grads;
};

/// Input batch followed by every layer's output.
struct Activations {
    std::vector<Tensor> values;
    const Tensor& output() const { return values.back(); }
};

/// Ordered layer stack with explicit forward/backward.
///
/// Gradients accumulate across backward calls until zero_grad() or an
/// optimizer step, so several losses can feed one net.
class Net {
public:
    /// Checks every layer against the shape produced by its predecessor and
    /// initializes parameters: dense/conv1d weights uniform(-a, a) with
    /// a = sqrt(6 / (fan_in + fan_out)), zero biases, embeddings N(0, 1) / sqrt(dim).
    /// Layer i draws from rng.child(i).
    Net(Shape input_shape, std::vector<LayerSpec> layers, RngStream rng);

    const Shape& input_shape() const noexcept { return input_shape_; }
    const Shape& output_shape() const noexcept;
    std::size_t num_layers() const noexcept { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return layers_.at(i); }
    Layer& layer(std::size_t i) { return layers_.at(i); }

    /// `batch` has shape (B, input_shape...). Shape errors name the layer index.
    Activations forward(const Tensor& batch) const;

    /// Accumulates parameter gradients for upstream gradient `grad_output`
    /// and returns the gradient with respect to the input batch (zeros for
    /// embedding inputs, which are indices).
    Tensor backward(const Activations& acts, const Tensor& grad_output);

    void zero_grad() noexcept;
    /// Sets lambda on every grad_reverse layer.
    void set_grad_reverse_lambda(double lambda) noexcept;

    std::size_t parameter_count() const noexcept;
    std::vector<Tensor*> parameters();
    std::vector<Tensor*> gradients();
    std::vector<const Tensor*> parameters() const;

    /// Bitwise equality of specs and parameters.
    bool same_parameters(const Net& other) const;

private:
    Shape input_shape_;
    std::vector<Layer> layers_;
};

enum class LossKind { softmax_cross_entropy, mse, hinge };

/// Losses reduce by the mean.
///   softmax_cross_entropy: output (B, C), targets B class indices
///   mse:                   targets with the same element count as output
///   hinge:                 output B scores, targets in {0, 1}
struct LossSpec {
    LossKind kind = LossKind::mse;
};

struct LossResult {
    double value = 0.0;
    Tensor grad;  // d value / d output
};

LossResult compute_loss(const LossSpec& loss, const Tensor& output, const Tensor& targets);

Activations net_forward(const Net& net, const Tensor& batch);

/// Loss of the cached output; accumulates parameter gradients.
double net_backward(Net& net, const Activations& acts, const Tensor& targets, const LossSpec& loss);

struct OptimizerSpec {
    enum class Kind { sgd, adam };
    Kind kind = Kind::adam;
    double lr = 1e-3;
    double momentum = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static OptimizerSpec sgd(double lr, double momentum = 0.0) { return {Kind::sgd, lr, momentum}; }
    static OptimizerSpec adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
        return {Kind::adam, lr, 0.0, beta1, beta2, eps};
    }
};

/// SGD with momentum (v = mu v + g; p -= lr v) or bias-corrected Adam.
/// State is allocated on the first step and keyed by parameter position, so
/// the same nets must be passed in the same order every step.
class Optimizer {
public:
    explicit Optimizer(OptimizerSpec spec) : spec_(spec) {}

    void step(std::span<Net* const> nets);
    void step(Net& net) {
        Net* nets[] = {&net};
        step(nets);
    }

    const OptimizerSpec& spec() const noexcept { return spec_; }
    void set_lr(double lr) noexcept { spec_.lr = lr; }
    std::size_t steps_taken() const noexcept { return t_; }

private:
    OptimizerSpec spec_;
    std::size_t t_ = 0;
    std::vector<Tensor> first_;   // momentum / Adam m
    std::vector<Tensor> second_;  // Adam v
};

/// Updates parameters from the accumulated gradients, then zeroes them.
inline void optimizer_step(Optimizer& opt, Net& net) { opt.step(net); }

struct MmdResult {
    double value = 0.0;
    Tensor grad_x;
    Tensor grad_y;
};

/// Biased MMD^2 between the rows of x (n x d) and y (m x d), averaged over
/// the Gaussian bandwidths: k(u, v) = exp(-|u - v|^2 / (2 sigma^2)).
MmdResult mmd_rbf(const Tensor& x, const Tensor& y, std::span<const double> bandwidths);

/// Worst relative error between analytic and central-difference parameter
/// gradients, each error scaled by max(|analytic|, |numeric|, 1e-8).
double finite_diff_grad_check(Net& net, const Tensor& batch, const Tensor& targets, const LossSpec& loss, double h);

/// Writes manifest.json plus one KTF file per parameter tensor into `dir`.
void save_net(const Net& net, const std::filesystem::path& dir);
Net load_net(const std::filesystem::path& dir);

}  // namespace kale::nn
