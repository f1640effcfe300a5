#include "kale/embed.hpp"
#include "kale/errors.hpp"

namespace kale {

ExtractorSpec ExtractorSpec::small_vector_mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                                              std::size_t output_dim) {
    ExtractorSpec s;
    s.kind = Kind::small_vector_mlp;
    s.input_dim = input_dim;
    s.hidden = std::move(hidden);
    s.output_dim = output_dim;
    return s;
}

ExtractorSpec ExtractorSpec::sequence_cnn(std::size_t vocab_size, std::size_t seq_len, std::size_t embedding_dim,
                                          std::vector<std::size_t> filters, std::vector<std::size_t> kernels,
                                          std::size_t output_dim) {
    ExtractorSpec s;
    s.kind = Kind::sequence_cnn;
    s.vocab_size = vocab_size;
    s.seq_len = seq_len;
    s.embedding_dim = embedding_dim;
    s.filters = std::move(filters);
    s.kernels = std::move(kernels);
    s.output_dim = output_dim;
    return s;
}

nn::Net build_feature_extractor(const ExtractorSpec& spec, RngStream rng) {
    using nn::LayerSpec;
    std::vector<LayerSpec> layers;
    if (spec.kind == ExtractorSpec::Kind::small_vector_mlp) {
        if (spec.input_dim == 0 || spec.output_dim == 0) throw ValueError("mlp extractor dims must be positive");
        std::size_t prev = spec.input_dim;
        for (auto h : spec.hidden) {
            if (h == 0) throw ValueError("mlp hidden dims must be positive");
            layers.push_back(LayerSpec::dense(prev, h));
            layers.push_back(LayerSpec::relu());
            prev = h;
        }
        layers.push_back(LayerSpec::dense(prev, spec.output_dim));
        layers.push_back(LayerSpec::relu());
        return nn::Net({spec.input_dim}, std::move(layers), rng);
    }

    if (spec.vocab_size == 0 || spec.seq_len == 0 || spec.embedding_dim == 0) {
        throw ValueError("sequence cnn dims must be positive");
    }
    if (spec.filters.empty() || spec.filters.size() != spec.kernels.size()) {
        throw ValueError("sequence cnn needs one kernel size per filter count");
    }
    layers.push_back(LayerSpec::embedding(spec.vocab_size, spec.embedding_dim));
    std::size_t channels = spec.embedding_dim;
    for (std::size_t i = 0; i < spec.filters.size(); ++i) {
        if (spec.filters[i] == 0 || spec.kernels[i] == 0) throw ValueError("sequence cnn filters must be positive");
        layers.push_back(LayerSpec::conv1d(channels, spec.filters[i], spec.kernels[i]));
        layers.push_back(LayerSpec::relu());
        channels = spec.filters[i];
    }
    layers.push_back(LayerSpec::global_max_pool());
    if (spec.output_dim != 0 && spec.output_dim != channels) {
        layers.push_back(LayerSpec::dense(channels, spec.output_dim));
        layers.push_back(LayerSpec::relu());
    }
    return nn::Net({spec.seq_len}, std::move(layers), rng);
}

}  // namespace kale
