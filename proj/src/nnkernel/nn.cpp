#include "kale/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "kale/errors.hpp"
#include "kale/loaddata.hpp"

namespace kale::nn {

namespace {

std::string layer_label(std::size_t index, const LayerSpec& spec) {
    return "layer " + std::to_string(index) + " (" + to_string(spec.kind) + ")";
}

Shape infer_output_shape(const LayerSpec& s, const Shape& in, std::size_t index) {
    auto fail = [&](const std::string& why) {
        return ShapeError(layer_label(index, s) + ": " + why + ", input sample shape " + shape_to_string(in));
    };
    switch (s.kind) {
        case LayerKind::dense:
            if (s.in == 0 || s.out == 0) throw fail("dense dims must be positive");
            if (in != Shape{s.in}) throw fail("expects {" + std::to_string(s.in) + "}");
            return {s.out};
        case LayerKind::conv1d: {
            if (s.in == 0 || s.out == 0 || s.kernel == 0 || s.stride == 0) throw fail("conv1d dims must be positive");
            if (in.size() != 2 || in[0] != s.in) throw fail("expects {" + std::to_string(s.in) + ", L}");
            if (in[1] < s.kernel) throw fail("sequence shorter than kernel");
            return {s.out, (in[1] - s.kernel) / s.stride + 1};
        }
        case LayerKind::embedding:
            if (s.in == 0 || s.out == 0) throw fail("embedding dims must be positive");
            if (in.size() != 1) throw fail("expects index sequences {L}");
            return {s.out, in[0]};
        case LayerKind::relu:
        case LayerKind::grad_reverse: return in;
        case LayerKind::global_max_pool:
            if (in.size() != 2 || in[1] == 0) throw fail("expects {C, L}");
            return {in[0]};
        case LayerKind::flatten: return {shape_size(in)};
    }
    throw fail("unknown layer kind");
}

Shape batched(std::size_t batch, const Shape& sample) {
    Shape s{batch};
    s.insert(s.end(), sample.begin(), sample.end());
    return s;
}

void init_params(Layer& layer, RngStream rng) {
    const auto& s = layer.spec;
    auto uniform_fill = [&](Tensor& t, double fan_in, double fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& v : t.data()) v = rng.uniform(-a, a);
    };
    switch (s.kind) {
        case LayerKind::dense: {
            Tensor w({s.out, s.in});
            uniform_fill(w, static_cast<double>(s.in), static_cast<double>(s.out));
            layer.params = {std::move(w), Tensor({s.out})};
            break;
        }
        case LayerKind::conv1d: {
            Tensor w({s.out, s.in, s.kernel});
            uniform_fill(w, static_cast<double>(s.in * s.kernel), static_cast<double>(s.out * s.kernel));
            layer.params = {std::move(w), Tensor({s.out})};
            break;
        }
        case LayerKind::embedding: {
            Tensor table({s.in, s.out});
            const double scale = 1.0 / std::sqrt(static_cast<double>(s.out));
            for (auto& v : table.data()) v = scale * rng.normal();
            layer.params = {std::move(table)};
            break;
        }
        default: break;
    }
    layer.grads.clear();
    for (const auto& p : layer.params) layer.grads.emplace_back(p.shape());
}

Tensor layer_forward(const Layer& layer, const Tensor& in) {
    const auto& s = layer.spec;
    const std::size_t batch = in.dim(0);
    Tensor out(batched(batch, layer.output_shape));
    const double* x = in.data().data();
    double* y = out.data().data();
    switch (s.kind) {
        case LayerKind::dense: {
            const double* w = layer.params[0].data().data();
            const double* b = layer.params[1].data().data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t o = 0; o < s.out; ++o) {
                    double acc = b[o];
                    const double* wo = w + o * s.in;
                    const double* xn = x + n * s.in;
                    for (std::size_t i = 0; i < s.in; ++i) acc += wo[i] * xn[i];
                    y[n * s.out + o] = acc;
                }
            break;
        }
        case LayerKind::conv1d: {
            const std::size_t len = layer.input_shape[1], out_len = layer.output_shape[1];
            const double* w = layer.params[0].data().data();
            const double* b = layer.params[1].data().data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t o = 0; o < s.out; ++o) {
                    double* yo = y + (n * s.out + o) * out_len;
                    std::fill(yo, yo + out_len, b[o]);
                    for (std::size_t c = 0; c < s.in; ++c) {
                        const double* xc = x + (n * s.in + c) * len;
                        const double* wk = w + (o * s.in + c) * s.kernel;
                        for (std::size_t k = 0; k < s.kernel; ++k) {
                            const double wv = wk[k];
                            const double* xs = xc + k;
                            if (s.stride == 1) {
                                for (std::size_t t = 0; t < out_len; ++t) yo[t] += wv * xs[t];
                            } else {
                                for (std::size_t t = 0; t < out_len; ++t) yo[t] += wv * xs[t * s.stride];
                            }
                        }
                    }
                }
            break;
        }
        case LayerKind::embedding: {
            const std::size_t len = layer.input_shape[0];
            const double* table = layer.params[0].data().data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t l = 0; l < len; ++l) {
                    const double raw = x[n * len + l];
                    if (!(raw >= 0) || raw >= static_cast<double>(s.in) || raw != std::floor(raw)) {
                        throw ValueError("embedding index " + std::to_string(raw) + " outside vocabulary of " +
                                         std::to_string(s.in));
                    }
                    const auto idx = static_cast<std::size_t>(raw);
                    for (std::size_t d = 0; d < s.out; ++d) y[(n * s.out + d) * len + l] = table[idx * s.out + d];
                }
            break;
        }
        case LayerKind::relu:
            for (std::size_t i = 0; i < in.size(); ++i) y[i] = x[i] < 0 ? 0.0 : x[i];  // NaN passes through
            break;
        case LayerKind::grad_reverse:
        case LayerKind::flatten: std::copy(x, x + in.size(), y); break;
        case LayerKind::global_max_pool: {
            const std::size_t ch = layer.input_shape[0], len = layer.input_shape[1];
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* xc = x + (n * ch + c) * len;
                    y[n * ch + c] = *std::max_element(xc, xc + len);
                }
            break;
        }
    }
    return out;
}

Tensor layer_backward(Layer& layer, const Tensor& in, const Tensor& g_out) {
    const auto& s = layer.spec;
    const std::size_t batch = in.dim(0);
    Tensor g_in(in.shape());
    const double* x = in.data().data();
    const double* g = g_out.data().data();
    double* gx = g_in.data().data();
    switch (s.kind) {
        case LayerKind::dense: {
            const double* w = layer.params[0].data().data();
            double* gw = layer.grads[0].data().data();
            double* gb = layer.grads[1].data().data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t o = 0; o < s.out; ++o) {
                    const double go = g[n * s.out + o];
                    gb[o] += go;
                    double* gwo = gw + o * s.in;
                    const double* wo = w + o * s.in;
                    const double* xn = x + n * s.in;
                    double* gxn = gx + n * s.in;
                    for (std::size_t i = 0; i < s.in; ++i) {
                        gwo[i] += go * xn[i];
                        gxn[i] += go * wo[i];
                    }
                }
            break;
        }
        case LayerKind::conv1d: {
            const std::size_t len = layer.input_shape[1], out_len = layer.output_shape[1];
            const double* w = layer.params[0].data().data();
            double* gw = layer.grads[0].data().data();
            double* gb = layer.grads[1].data().data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t o = 0; o < s.out; ++o) {
                    const double* go = g + (n * s.out + o) * out_len;
                    for (std::size_t t = 0; t < out_len; ++t) gb[o] += go[t];
                    for (std::size_t c = 0; c < s.in; ++c) {
                        const double* xc = x + (n * s.in + c) * len;
                        double* gxc = gx + (n * s.in + c) * len;
                        const double* wk = w + (o * s.in + c) * s.kernel;
                        double* gwk = gw + (o * s.in + c) * s.kernel;
                        for (std::size_t k = 0; k < s.kernel; ++k) {
                            const double wv = wk[k];
                            double acc = 0.0;
                            for (std::size_t t = 0; t < out_len; ++t) {
                                const std::size_t pos = t * s.stride + k;
                                acc += go[t] * xc[pos];
                                gxc[pos] += wv * go[t];
                            }
                            gwk[k] += acc;
                        }
                    }
                }
            break;
        }
        case LayerKind::embedding: {
            const std::size_t len = layer.input_shape[0];
            double* gt = layer.grads[0].data().data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t l = 0; l < len; ++l) {
                    const auto idx = static_cast<std::size_t>(x[n * len + l]);
                    for (std::size_t d = 0; d < s.out; ++d) gt[idx * s.out + d] += g[(n * s.out + d) * len + l];
                }
            break;
        }
        case LayerKind::relu:
            for (std::size_t i = 0; i < in.size(); ++i) gx[i] = x[i] > 0 ? g[i] : 0.0;
            break;
        case LayerKind::grad_reverse:
            for (std::size_t i = 0; i < in.size(); ++i) gx[i] = -s.lambda * g[i];
            break;
        case LayerKind::flatten: std::copy(g, g + in.size(), gx); break;
        case LayerKind::global_max_pool: {
            const std::size_t ch = layer.input_shape[0], len = layer.input_shape[1];
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* xc = x + (n * ch + c) * len;
                    const auto arg = static_cast<std::size_t>(std::max_element(xc, xc + len) - xc);
                    gx[(n * ch + c) * len + arg] = g[n * ch + c];
                }
            break;
        }
    }
    return g_in;
}

}  // namespace

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::embedding: return "embedding";
        case LayerKind::relu: return "relu";
        case LayerKind::global_max_pool: return "global_max_pool";
        case LayerKind::flatten: return "flatten";
        case LayerKind::grad_reverse: return "grad_reverse";
    }
    return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
    for (auto k : {LayerKind::dense, LayerKind::conv1d, LayerKind::embedding, LayerKind::relu,
                   LayerKind::global_max_pool, LayerKind::flatten, LayerKind::grad_reverse})
        if (to_string(k) == name) return k;
    throw FormatError("unknown layer kind '" + name + "'");
}

Net::Net(Shape input_shape, std::vector<LayerSpec> layers, RngStream rng) : input_shape_(std::move(input_shape)) {
    Shape current = input_shape_;
    layers_.reserve(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Layer layer{layers[i], current, infer_output_shape(layers[i], current, i), {}, {}};
        init_params(layer, rng.child(i));
        current = layer.output_shape;
        layers_.push_back(std::move(layer));
    }
}

const Shape& Net::output_shape() const noexcept {
    return layers_.empty() ? input_shape_ : layers_.back().output_shape;
}

Activations Net::forward(const Tensor& batch) const {
    if (batch.order() != input_shape_.size() + 1 ||
        !std::equal(input_shape_.begin(), input_shape_.end(), batch.shape().begin() + 1)) {
        throw ShapeError("net input: expected (B, " + shape_to_string(input_shape_) + "), got " +
                         shape_to_string(batch.shape()));
    }
    Activations acts;
    acts.values.reserve(layers_.size() + 1);
    acts.values.push_back(batch);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        try {
            acts.values.push_back(layer_forward(layers_[i], acts.values.back()));
        } catch (const ValueError& e) {
            throw ValueError(layer_label(i, layers_[i].spec) + ": " + e.what());
        }
    }
    return acts;
}

Tensor Net::backward(const Activations& acts, const Tensor& grad_output) {
    if (acts.values.size() != layers_.size() + 1) throw ShapeError("activations do not belong to this net");
    if (grad_output.shape() != acts.output().shape()) {
        throw ShapeError("upstream gradient shape " + shape_to_string(grad_output.shape()) + " does not match output " +
                         shape_to_string(acts.output().shape()));
    }
    Tensor g = grad_output;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layer_backward(layers_[i], acts.values[i], g);
    return g;
}

void Net::zero_grad() noexcept {
    for (auto& l : layers_)
        for (auto& g : l.grads) g.fill(0.0);
}

void Net::set_grad_reverse_lambda(double lambda) noexcept {
    for (auto& l : layers_)
        if (l.spec.kind == LayerKind::grad_reverse) l.spec.lambda = lambda;
}

std::size_t Net::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_)
        for (const auto& p : l.params) n += p.size();
    return n;
}

std::vector<Tensor*> Net::parameters() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (auto& p : l.params) out.push_back(&p);
    return out;
}

std::vector<const Tensor*> Net::parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_)
        for (const auto& p : l.params) out.push_back(&p);
    return out;
}

std::vector<Tensor*> Net::gradients() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (auto& g : l.grads) out.push_back(&g);
    return out;
}

bool Net::same_parameters(const Net& other) const {
    if (input_shape_ != other.input_shape_ || layers_.size() != other.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        if (!(layers_[i].spec == other.layers_[i].spec) || layers_[i].params != other.layers_[i].params) return false;
    return true;
}

LossResult compute_loss(const LossSpec& loss, const Tensor& output, const Tensor& targets) {
    LossResult r{0.0, Tensor(output.shape())};
    const auto o = output.data();
    const auto t = targets.data();
    auto& g = r.grad;
    switch (loss.kind) {
        case LossKind::softmax_cross_entropy: {
            if (output.order() != 2) throw ShapeError("cross-entropy expects (B, C) logits");
            const std::size_t batch = output.dim(0), classes = output.dim(1);
            if (targets.size() != batch) throw ShapeError("cross-entropy expects one class index per row");
            const double inv_b = 1.0 / static_cast<double>(batch);
            for (std::size_t n = 0; n < batch; ++n) {
                const double label = t[n];
                if (!(label >= 0) || label >= static_cast<double>(classes) || label != std::floor(label)) {
                    throw ValueError("class index " + std::to_string(label) + " outside [0, " +
                                     std::to_string(classes) + ")");
                }
                const auto y = static_cast<std::size_t>(label);
                const double* row = o.data() + n * classes;
                const double mx = *std::max_element(row, row + classes);
                double z = 0.0;
                for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
                const double log_z = mx + std::log(z);
                r.value += (log_z - row[y]) * inv_b;
                for (std::size_t c = 0; c < classes; ++c)
                    g[n * classes + c] = (std::exp(row[c] - log_z) - (c == y ? 1.0 : 0.0)) * inv_b;
            }
            break;
        }
        case LossKind::mse: {
            if (targets.size() != output.size()) throw ShapeError("mse target size does not match output");
            const double inv_n = 1.0 / static_cast<double>(output.size());
            for (std::size_t i = 0; i < output.size(); ++i) {
                const double d = o[i] - t[i];
                r.value += d * d * inv_n;
                g[i] = 2.0 * d * inv_n;
            }
            break;
        }
        case LossKind::hinge: {
            const std::size_t batch = output.order() ? output.dim(0) : 1;
            if (output.size() != batch || targets.size() != batch) throw ShapeError("hinge expects one score per row");
            const double inv_b = 1.0 / static_cast<double>(batch);
            for (std::size_t n = 0; n < batch; ++n) {
                if (t[n] != 0.0 && t[n] != 1.0) throw ValueError("hinge targets must be 0 or 1");
                const double y = 2.0 * t[n] - 1.0;
                const double margin = y * o[n];
                if (margin < 1.0) {
                    r.value += (1.0 - margin) * inv_b;
                    g[n] = -y * inv_b;
                }
            }
            break;
        }
    }
    return r;
}

Activations net_forward(const Net& net, const Tensor& batch) { return net.forward(batch); }

double net_backward(Net& net, const Activations& acts, const Tensor& targets, const LossSpec& loss) {
    auto r = compute_loss(loss, acts.output(), targets);
    net.backward(acts, r.grad);
    return r.value;
}

void Optimizer::step(std::span<Net* const> nets) {
    std::vector<Tensor*> params, grads;
    for (Net* n : nets) {
        auto p = n->parameters();
        auto g = n->gradients();
        params.insert(params.end(), p.begin(), p.end());
        grads.insert(grads.end(), g.begin(), g.end());
    }
    if (t_ == 0) {
        for (auto* p : params) {
            first_.emplace_back(p->shape());
            if (spec_.kind == OptimizerSpec::Kind::adam) second_.emplace_back(p->shape());
        }
    }
    if (first_.size() != params.size()) throw StateError("optimizer stepped with a different parameter set");
    ++t_;

    const double lr = spec_.lr;
    if (spec_.kind == OptimizerSpec::Kind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (first_[i].shape() != params[i]->shape()) throw StateError("optimizer state shape mismatch");
            auto p = params[i]->data();
            auto g = grads[i]->data();
            auto v = first_[i].data();
            for (std::size_t j = 0; j < p.size(); ++j) {
                v[j] = spec_.momentum * v[j] + g[j];
                p[j] -= lr * v[j];
                g[j] = 0.0;
            }
        }
        return;
    }
    const double b1 = spec_.beta1, b2 = spec_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (first_[i].shape() != params[i]->shape()) throw StateError("optimizer state shape mismatch");
        auto p = params[i]->data();
        auto g = grads[i]->data();
        auto m = first_[i].data();
        auto v = second_[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + spec_.eps);
            g[j] = 0.0;
        }
    }
}

MmdResult mmd_rbf(const Tensor& x, const Tensor& y, std::span<const double> bandwidths) {
    if (x.order() != 2 || y.order() != 2) throw ShapeError("mmd expects (n, d) and (m, d) matrices");
    const std::size_t n = x.dim(0), m = y.dim(0), d = x.dim(1);
    if (n == 0 || m == 0) throw ValueError("mmd needs non-empty samples");
    if (y.dim(1) != d) throw ShapeError("mmd feature dimensions differ");
    if (bandwidths.empty()) throw ValueError("mmd needs at least one bandwidth");
    for (double s : bandwidths)
        if (!(s > 0)) throw ValueError("mmd bandwidths must be positive");

    MmdResult r{0.0, Tensor(x.shape()), Tensor(y.shape())};
    const double* xd = x.data().data();
    const double* yd = y.data().data();
    double* gx = r.grad_x.data().data();
    double* gy = r.grad_y.data().data();
    const double inv_k = 1.0 / static_cast<double>(bandwidths.size());
    const double wxx = inv_k / static_cast<double>(n * n);
    const double wyy = inv_k / static_cast<double>(m * m);
    const double wxy = -2.0 * inv_k / static_cast<double>(n * m);

    // Adds w * k(a, b) to the value and its gradient to ga / gb.
    auto accumulate = [&](const double* a, const double* b, double* ga, double* gb, double w) {
        double dist2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) dist2 += (a[k] - b[k]) * (a[k] - b[k]);
        for (double sigma : bandwidths) {
            const double inv_s2 = 1.0 / (sigma * sigma);
            const double kv = std::exp(-0.5 * dist2 * inv_s2);
            r.value += w * kv;
            const double coef = w * kv * inv_s2;  // d k / d a = -k (a - b) / sigma^2
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = a[k] - b[k];
                ga[k] -= coef * diff;
                gb[k] += coef * diff;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) accumulate(xd + i * d, xd + j * d, gx + i * d, gx + j * d, wxx);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) accumulate(yd + i * d, yd + j * d, gy + i * d, gy + j * d, wyy);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) accumulate(xd + i * d, yd + j * d, gx + i * d, gy + j * d, wxy);
    r.value = std::max(r.value, 0.0);
    return r;
}

double finite_diff_grad_check(Net& net, const Tensor& batch, const Tensor& targets, const LossSpec& loss, double h) {
    if (!(h > 0)) throw ValueError("finite-difference step must be positive");
    net.zero_grad();
    net_backward(net, net.forward(batch), targets, loss);
    std::vector<Tensor> analytic;
    for (auto* g : net.gradients()) analytic.push_back(*g);
    net.zero_grad();

    auto loss_at = [&] { return compute_loss(loss, net.forward(batch).output(), targets).value; };
    double worst = 0.0;
    auto params = net.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto values = params[p]->data();
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double saved = values[j];
            values[j] = saved + h;
            const double up = loss_at();
            values[j] = saved - h;
            const double down = loss_at();
            values[j] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[p][j];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

void save_net(const Net& net, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format"] = "kale-net";
    manifest["input_shape"] = net.input_shape();
    auto& layers = manifest["layers"] = nlohmann::json::array();
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const auto& l = net.layer(i);
        nlohmann::json entry{{"kind", to_string(l.spec.kind)},
                             {"in", l.spec.in},
                             {"out", l.spec.out},
                             {"kernel", l.spec.kernel},
                             {"stride", l.spec.stride},
                             {"lambda", l.spec.lambda},
                             {"output_shape", l.output_shape}};
        auto& files = entry["params"] = nlohmann::json::array();
        for (std::size_t p = 0; p < l.params.size(); ++p) {
            const auto name = "layer" + std::to_string(i) + "_param" + std::to_string(p) + ".ktf";
            save_ktf(dir / name, l.params[p]);
            files.push_back({{"file", name}, {"shape", l.params[p].shape()}});
        }
        layers.push_back(std::move(entry));
    }
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

Net load_net(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("cannot read " + (dir / "manifest.json").string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad net manifest: ") + e.what());
    }
    std::vector<LayerSpec> specs;
    for (const auto& e : manifest.at("layers")) {
        specs.push_back({layer_kind_from_string(e.at("kind").get<std::string>()), e.at("in").get<std::size_t>(),
                         e.at("out").get<std::size_t>(), e.at("kernel").get<std::size_t>(),
                         e.at("stride").get<std::size_t>(), e.at("lambda").get<double>()});
    }
    Net net(manifest.at("input_shape").get<Shape>(), specs, RngStream(0));
    const auto& layers = manifest.at("layers");
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        auto& layer = net.layer(i);
        const auto& files = layers[i].at("params");
        if (files.size() != layer.params.size()) throw FormatError("parameter count mismatch in layer " + std::to_string(i));
        for (std::size_t p = 0; p < files.size(); ++p) {
            auto t = load_ktf(dir / files[p].at("file").get<std::string>());
            if (t.shape() != layer.params[p].shape()) throw FormatError("parameter shape mismatch in layer " + std::to_string(i));
            layer.params[p] = std::move(t);
        }
    }
    return net;
}

}  // namespace kale::nn
